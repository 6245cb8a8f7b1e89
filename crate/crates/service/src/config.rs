use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use spoofeval_core::coeffs_config::{CoefficientEntry, CoefficientSets, CoeffsConfigError};
use spoofeval_core::metrics::TdcfCoefficients;
use spoofeval_core::trialdata::{Phase, Task};

pub const PORT_ENV: &str = "SPOOFEVAL_PORT";
pub const DATA_DIR_ENV: &str = "SPOOFEVAL_DATA_DIR";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Coefficients(#[from] CoeffsConfigError),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseName {
    Progress,
    Evaluation,
    PostEvaluation,
}

impl PhaseName {
    pub fn as_str(self) -> &'static str {
        match self {
            PhaseName::Progress => "progress",
            PhaseName::Evaluation => "evaluation",
            PhaseName::PostEvaluation => "post_evaluation",
        }
    }

    /// Key subset scored by default in this phase.
    pub fn default_subset(self) -> Phase {
        match self {
            PhaseName::Progress => Phase::Progress,
            PhaseName::Evaluation | PhaseName::PostEvaluation => Phase::Evaluation,
        }
    }

    /// Coefficient set applied in this phase.
    pub fn coefficient_phase(self) -> Phase {
        self.default_subset()
    }
}

impl fmt::Display for PhaseName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PhaseName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "progress" => Ok(PhaseName::Progress),
            "evaluation" => Ok(PhaseName::Evaluation),
            "post_evaluation" => Ok(PhaseName::PostEvaluation),
            _ => Err(format!("unknown phase {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub name: PhaseName,
    pub start: DateTime<Utc>,
    /// Exclusive.
    pub end: DateTime<Utc>,
    /// Scored submissions per team per UTC day; absent means the phase
    /// default (3 for progress, unlimited otherwise).
    #[serde(default)]
    pub daily_quota: Option<u32>,
    /// Scored submissions per team over the phase; absent means the phase
    /// default (1 for evaluation, unlimited otherwise).
    #[serde(default)]
    pub total_quota: Option<u32>,
    #[serde(default)]
    pub trial_subset: Option<Phase>,
}

impl PhaseConfig {
    pub fn daily_limit(&self) -> Option<u32> {
        self.daily_quota
            .or((self.name == PhaseName::Progress).then_some(3))
    }

    pub fn total_limit(&self) -> Option<u32> {
        self.total_quota
            .or((self.name == PhaseName::Evaluation).then_some(1))
    }

    pub fn subset(&self) -> Phase {
        self.trial_subset.unwrap_or(self.name.default_subset())
    }

    pub fn contains(&self, t: DateTime<Utc>) -> bool {
        self.start <= t && t < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    /// Relative paths resolve against the config file's directory.
    pub key_file: PathBuf,
    pub phases: Vec<PhaseConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeamConfig {
    pub name: String,
    pub token: String,
    /// Appear on the anonymised leaderboard.
    #[serde(default)]
    pub leaderboard: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerConfig {
    #[serde(default = "default_port")]
    pub port: u16,
    #[serde(default = "default_data_dir")]
    pub data_dir: PathBuf,
}

fn default_port() -> u16 {
    8080
}

fn default_data_dir() -> PathBuf {
    PathBuf::from("data")
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self {
            port: default_port(),
            data_dir: default_data_dir(),
        }
    }
}

/// Platform configuration file (TOML). See `docs/API.md` for an example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformConfig {
    #[serde(default)]
    pub server: ServerConfig,
    /// Mixed into leaderboard aliases so they cannot be recomputed from
    /// team names alone.
    pub alias_salt: String,
    #[serde(default)]
    pub teams: Vec<TeamConfig>,
    #[serde(default)]
    pub tasks: BTreeMap<Task, TaskConfig>,
    #[serde(default)]
    pub coefficients: BTreeMap<Task, BTreeMap<Phase, CoefficientEntry>>,
}

impl PlatformConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`, resolves relative key-file and data paths against its
    /// directory, and applies environment overrides.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for task in cfg.tasks.values_mut() {
            if task.key_file.is_relative() {
                task.key_file = base.join(&task.key_file);
            }
        }
        if cfg.server.data_dir.is_relative() {
            cfg.server.data_dir = base.join(&cfg.server.data_dir);
        }
        cfg.apply_env(|k| std::env::var(k).ok())?;
        Ok(cfg)
    }

    /// Overrides the port and data directory from `SPOOFEVAL_PORT` and
    /// `SPOOFEVAL_DATA_DIR`.
    pub fn apply_env(&mut self, get: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(p) = get(PORT_ENV) {
            self.server.port = p
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("{PORT_ENV}={p:?} is not a port")))?;
        }
        if let Some(d) = get(DATA_DIR_ENV) {
            self.server.data_dir = PathBuf::from(d);
        }
        Ok(())
    }

    pub fn coefficient_sets(&self) -> Result<CoefficientSets, ConfigError> {
        for (task, phases) in &self.coefficients {
            for (phase, e) in phases {
                TdcfCoefficients::new(e.c0, e.c1, e.c2).map_err(|source| {
                    ConfigError::Coefficients(CoeffsConfigError::Invalid {
                        task: *task,
                        phase: *phase,
                        source,
                    })
                })?;
            }
        }
        Ok(CoefficientSets {
            coefficients: self.coefficients.clone(),
        })
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        let mut names = HashSet::new();
        let mut tokens = HashSet::new();
        for t in &self.teams {
            if t.name.is_empty() || t.token.is_empty() {
                return bad("team name and token must be non-empty".into());
            }
            if !names.insert(&t.name) {
                return bad(format!("duplicate team {:?}", t.name));
            }
            if !tokens.insert(&t.token) {
                return bad(format!("team {:?} reuses another team's token", t.name));
            }
        }
        for (task, tc) in &self.tasks {
            let mut phases: Vec<&PhaseConfig> = tc.phases.iter().collect();
            phases.sort_by_key(|p| p.start);
            for p in &phases {
                if p.start >= p.end {
                    return bad(format!("{task} {}: start must precede end", p.name));
                }
                if p.subset() == Phase::Hidden {
                    return bad(format!("{task} {}: hidden trials cannot be scored", p.name));
                }
            }
            for w in phases.windows(2) {
                if w[1].start < w[0].end {
                    return bad(format!(
                        "{task}: phases {} and {} overlap",
                        w[0].name, w[1].name
                    ));
                }
            }
            let mut seen = HashSet::new();
            if let Some(p) = tc.phases.iter().find(|p| !seen.insert(p.name)) {
                return bad(format!("{task}: phase {} declared twice", p.name));
            }
        }
        self.coefficient_sets().map(|_| ())
    }

    pub fn team_by_token(&self, token: &str) -> Option<&TeamConfig> {
        self.teams.iter().find(|t| t.token == token)
    }
}
