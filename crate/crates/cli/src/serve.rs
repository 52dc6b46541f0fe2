use std::collections::BTreeMap;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::net::TcpListener;
use std::sync::Arc;

use rebact_core::{CraftEnv, CraftTask};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transport {
    Stdio,
    Tcp(u16),
}

/// Runs the line server on the chosen transport until stdin closes or, for
/// TCP, forever.
pub fn cmd_serve(transport: Transport, tasks: Vec<Arc<CraftTask>>) -> io::Result<()> {
    let tasks: Arc<BTreeMap<String, Arc<CraftTask>>> =
        Arc::new(tasks.into_iter().map(|t| (t.id().to_string(), t)).collect());
    match transport {
        Transport::Stdio => serve_session(&tasks, io::stdin().lock(), io::stdout().lock()),
        Transport::Tcp(port) => {
            let listener = TcpListener::bind(("127.0.0.1", port))?;
            tracing::info!(addr = %listener.local_addr()?, "serving");
            serve_tcp(listener, tasks)
        }
    }
}

/// Accepts connections forever, one thread and one environment each.
pub fn serve_tcp(
    listener: TcpListener,
    tasks: Arc<BTreeMap<String, Arc<CraftTask>>>,
) -> io::Result<()> {
    for stream in listener.incoming() {
        let stream = match stream {
            Ok(s) => s,
            Err(e) => {
                tracing::warn!(error = %e, "accept failed");
                continue;
            }
        };
        if let Err(e) = stream.set_nodelay(true) {
            tracing::debug!(error = %e, "cannot disable Nagle's algorithm");
        }
        let tasks = Arc::clone(&tasks);
        std::thread::spawn(move || {
            let reader = match stream.try_clone() {
                Ok(r) => BufReader::new(r),
                Err(e) => {
                    tracing::warn!(error = %e, "cannot clone connection");
                    return;
                }
            };
            if let Err(e) = serve_session(&tasks, reader, BufWriter::new(stream)) {
                tracing::debug!(error = %e, "session ended");
            }
        });
    }
    Ok(())
}

/// Plays one session: `RESET <task-id>` loads a task, every other line is a
/// command, `QUIT` or end of input ends the session. Each reply is followed
/// by a blank line.
pub fn serve_session<R: BufRead, W: Write>(
    tasks: &BTreeMap<String, Arc<CraftTask>>,
    mut input: R,
    mut output: W,
) -> io::Result<()> {
    let mut env: Option<CraftEnv> = None;
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            return Ok(());
        }
        let reply = match std::str::from_utf8(&buf) {
            Err(_) => "ERR invalid utf-8".to_string(),
            Ok(line) => {
                let line = line.trim();
                if line == "QUIT" {
                    return Ok(());
                }
                respond(tasks, &mut env, line)
            }
        };
        output.write_all(reply.as_bytes())?;
        output.write_all(b"\n\n")?;
        output.flush()?;
    }
}

fn respond(
    tasks: &BTreeMap<String, Arc<CraftTask>>,
    env: &mut Option<CraftEnv>,
    line: &str,
) -> String {
    if line.is_empty() {
        return "ERR empty command".into();
    }
    if let Some(rest) = line
        .strip_prefix("RESET")
        .filter(|r| r.is_empty() || r.starts_with(' '))
    {
        let id = rest.trim();
        if id.is_empty() {
            return "ERR missing task id".into();
        }
        return match tasks.get(id) {
            Some(task) => {
                *env = Some(CraftEnv::new(Arc::clone(task)));
                task.description()
            }
            None => format!("ERR unknown task {id}"),
        };
    }
    match env {
        Some(env) => env.step_text(line).text,
        None => "ERR no task loaded".into(),
    }
}
