use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::faulty::faulty_backend;
use super::http::{HttpBackend, HttpConfig};
use super::planner::PlannerBackend;
use super::scripted::{parse_script, ScriptedBackend};
use super::Backend;
use crate::env::CraftTask;

pub const DEFAULT_FAULT_PROBABILITY: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Scripted,
    Planner,
    Faulty,
    Http,
}

/// Backend settings as read from a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendConfig {
    pub kind: BackendKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub script_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub token_env: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_ms: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_retries: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub response_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub request_template: Option<serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_in_flight: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid backend config {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("backend kind {kind:?} requires `{field}`")]
    MissingField {
        kind: BackendKind,
        field: &'static str,
    },
    #[error("fault probability {0} is outside [0, 1]")]
    Probability(f64),
    #[error("unknown backend {0:?}: expected planner, faulty, faulty:<p> or a config file")]
    UnknownSpec(String),
}

impl BackendConfig {
    pub fn of_kind(kind: BackendKind) -> Self {
        Self {
            kind,
            script_path: None,
            p: None,
            seed: None,
            url: None,
            model: None,
            token_env: None,
            timeout_ms: None,
            max_retries: None,
            response_path: None,
            request_template: None,
            max_in_flight: None,
        }
    }

    pub fn scripted(path: impl Into<PathBuf>) -> Self {
        Self {
            script_path: Some(path.into()),
            ..Self::of_kind(BackendKind::Scripted)
        }
    }

    pub fn faulty(p: f64) -> Self {
        Self {
            p: Some(p),
            ..Self::of_kind(BackendKind::Faulty)
        }
    }

    /// Reads a JSON config. A relative `script_path` is resolved against the
    /// config file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        if let (Some(script), Some(dir)) = (&cfg.script_path, path.parent()) {
            if script.is_relative() {
                cfg.script_path = Some(dir.join(script));
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Interprets a command-line backend argument: `planner`, `faulty`,
    /// `faulty:<p>`, or a path to a config file.
    pub fn from_spec(spec: &str) -> Result<Self, ConfigError> {
        let cfg = match spec {
            "planner" => Self::of_kind(BackendKind::Planner),
            "faulty" => Self::faulty(DEFAULT_FAULT_PROBABILITY),
            s => {
                if let Some(p) = s.strip_prefix("faulty:") {
                    let p: f64 = p.parse().map_err(|_| ConfigError::UnknownSpec(s.into()))?;
                    Self::faulty(p)
                } else if Path::new(s).is_file() {
                    return Self::load(Path::new(s));
                } else {
                    return Err(ConfigError::UnknownSpec(s.into()));
                }
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let missing = |field| ConfigError::MissingField {
            kind: self.kind,
            field,
        };
        match self.kind {
            BackendKind::Scripted if self.script_path.is_none() => Err(missing("script_path")),
            BackendKind::Http if self.url.is_none() => Err(missing("url")),
            BackendKind::Faulty => match self.p {
                Some(p) if !(0.0..=1.0).contains(&p) => Err(ConfigError::Probability(p)),
                _ => Ok(()),
            },
            _ => Ok(()),
        }
    }

    fn http_config(&self) -> HttpConfig {
        let mut http = HttpConfig::new(
            self.url.clone().unwrap_or_default(),
            self.model.clone().unwrap_or_default(),
        );
        http.token_env = self.token_env.clone();
        if let Some(ms) = self.timeout_ms {
            http.timeout = Duration::from_millis(ms);
        }
        if let Some(n) = self.max_retries {
            http.max_retries = n;
        }
        if let Some(path) = &self.response_path {
            http.response_path = path.clone();
        }
        if let Some(t) = &self.request_template {
            http.request_template = t.clone();
        }
        if let Some(n) = self.max_in_flight {
            http.max_in_flight = n;
        }
        http
    }
}

#[derive(Clone)]
enum Shared {
    Script(Arc<Vec<String>>),
    Http(HttpBackend),
    None,
}

/// Builds a fresh backend per episode from one config.
///
/// Scripts are read once and replayed from the start for every episode;
/// HTTP handles share one connection pool and in-flight cap.
#[derive(Clone)]
pub struct BackendFactory {
    config: BackendConfig,
    run_seed: u64,
    shared: Shared,
}

impl BackendFactory {
    pub fn new(config: BackendConfig, run_seed: u64) -> Result<Self, ConfigError> {
        config.validate()?;
        let shared = match config.kind {
            BackendKind::Scripted => {
                let path = config.script_path.clone().expect("validated");
                let text = std::fs::read_to_string(&path)
                    .map_err(|source| ConfigError::Io { path, source })?;
                Shared::Script(Arc::new(parse_script(&text)))
            }
            BackendKind::Http => Shared::Http(HttpBackend::new(config.http_config())),
            _ => Shared::None,
        };
        Ok(Self {
            config,
            run_seed,
            shared,
        })
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    /// The fault seed for an episode; stable across runs and policies.
    pub fn fault_seed(&self) -> u64 {
        self.config.seed.unwrap_or(self.run_seed)
    }

    pub fn for_task(&self, task: Arc<CraftTask>) -> Box<dyn Backend> {
        match (&self.shared, self.config.kind) {
            (Shared::Script(lines), _) => Box::new(ScriptedBackend::new(lines.as_ref().clone())),
            (Shared::Http(http), _) => Box::new(http.fork()),
            (_, BackendKind::Faulty) => {
                let goal = task.goal().item.to_string();
                let id = task.id().to_string();
                Box::new(faulty_backend(
                    PlannerBackend::open_loop(task),
                    self.config.p.unwrap_or(DEFAULT_FAULT_PROBABILITY),
                    self.fault_seed(),
                    &id,
                    &goal,
                ))
            }
            _ => Box::new(PlannerBackend::new(task, false)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_shorthands() {
        assert_eq!(
            BackendConfig::from_spec("planner").unwrap().kind,
            BackendKind::Planner
        );
        let f = BackendConfig::from_spec("faulty:0.25").unwrap();
        assert_eq!((f.kind, f.p), (BackendKind::Faulty, Some(0.25)));
        assert!(matches!(
            BackendConfig::from_spec("faulty:2"),
            Err(ConfigError::Probability(_))
        ));
        assert!(matches!(
            BackendConfig::from_spec("nonsense"),
            Err(ConfigError::UnknownSpec(_))
        ));
    }

    #[test]
    fn file_config_resolves_script_relative_to_itself() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("s.txt"), "a\n---\nb\n").unwrap();
        let cfg_path = dir.path().join("b.json");
        std::fs::write(&cfg_path, r#"{"kind": "scripted", "script_path": "s.txt"}"#).unwrap();
        let cfg = BackendConfig::load(&cfg_path).unwrap();
        assert_eq!(
            cfg.script_path.as_deref(),
            Some(dir.path().join("s.txt").as_path())
        );
        assert!(BackendFactory::new(cfg, 0).is_ok());
    }

    #[test]
    fn missing_required_fields_are_reported() {
        let cfg = BackendConfig::of_kind(BackendKind::Http);
        assert!(matches!(
            cfg.validate(),
            Err(ConfigError::MissingField { field: "url", .. })
        ));
        let cfg: Result<BackendConfig, _> =
            serde_json::from_str(r#"{"kind": "planner", "bogus": 1}"#);
        assert!(cfg.is_err());
    }
}
