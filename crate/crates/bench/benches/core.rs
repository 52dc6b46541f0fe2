use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use rebact_core::backend::{bfs_plan, planner_backend};
use rebact_core::env::samples::{random_commands, random_task};
use rebact_core::env::{generate_tasks, GenerateOptions, RecipeUniverse};
use rebact_core::protocol::{parse_reflection, FormatId};
use rebact_core::{run_episode, AgentConfig, CraftEnv, Policy};

fn protocol(c: &mut Criterion) {
    let reply = "Previous action 'get 1 beehive' is wrong. It should be modified to: get 3 honeycomb.\nThe next action is: get 6 oak planks.";
    c.bench_function("parse_reflection/textcraft", |b| {
        b.iter(|| parse_reflection(black_box(reply), FormatId::Textcraft).unwrap())
    });
}

fn planning(c: &mut Criterion) {
    let universe = RecipeUniverse::synthetic(1);
    let tasks = generate_tasks(&universe, 3, 10, 1, &GenerateOptions::default()).unwrap();
    c.bench_function("bfs_plan/depth3", |b| {
        b.iter(|| {
            for t in &tasks {
                black_box(bfs_plan(t).unwrap());
            }
        })
    });
}

fn environment(c: &mut Criterion) {
    let task = Arc::new(random_task(3));
    let lines = random_commands(&task, 3, 100);
    c.bench_function("env/100_steps", |b| {
        b.iter(|| {
            let mut env = CraftEnv::new(task.clone());
            for l in &lines {
                black_box(env.step_text(l));
            }
        })
    });
}

fn episodes(c: &mut Criterion) {
    let universe = RecipeUniverse::synthetic(2);
    let task = Arc::new(
        generate_tasks(&universe, 3, 1, 2, &GenerateOptions::default())
            .unwrap()
            .remove(0),
    );
    let cfg = AgentConfig::new(Policy::Rebact);
    c.bench_function("episode/planner_depth3", |b| {
        b.iter(|| {
            let mut backend = planner_backend(task.clone());
            let mut log = Vec::new();
            black_box(run_episode(&cfg, task.clone(), &mut backend, &mut log).unwrap())
        })
    });
}

criterion_group!(benches, protocol, planning, environment, episodes);
criterion_main!(benches);
