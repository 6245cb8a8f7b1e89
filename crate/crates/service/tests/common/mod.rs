#![allow(dead_code)]

use std::path::Path;
use std::sync::Arc;

use chrono::{DateTime, Utc};
use spoofeval_service::{ManualClock, Platform, PlatformConfig};

pub const KEYS: &str = "\
p1 LA LA-C1 - bonafide progress
p2 LA LA-C1 - bonafide progress
p3 LA LA-C2 - bonafide progress
p4 LA LA-C2 - bonafide progress
p5 LA LA-C1 A07 spoof progress
p6 LA LA-C1 A07 spoof progress
p7 LA LA-C2 A08 spoof progress
p8 LA LA-C2 A08 spoof progress
e1 LA LA-C3 - bonafide evaluation
e2 LA LA-C3 A09 spoof evaluation
h1 LA LA-C4 A10 spoof hidden
d1 DF DF-C1 - bonafide progress
d2 DF DF-C1 A13 spoof progress
d3 DF DF-C2 A13 spoof progress
";

/// Bona {0.9,0.8,0.7,0.6}, spoof {0.75,0.3,0.2,0.1}: EER 25%, one spoof
/// above the lowest bonafide.
pub const LA_PROGRESS_SCORES: &str = "\
p1 0.9
p2 0.8
p3 0.7
p4 0.6
p5 0.75
p6 0.3
p7 0.2
p8 0.1
";

pub const LA_SEPARABLE: &str = "p1 4\np2 3\np3 2\np4 1\np5 0\np6 -1\np7 -2\np8 -3\n";

pub const LA_EVAL_SCORES: &str = "e1 1.0\ne2 0.0\n";

pub const DF_SCORES: &str = "d1 0.5\nd2 0.6\nd3 0.1\n";

pub fn config_text(data_dir: &Path, key_file: &Path) -> String {
    format!(
        r#"
alias_salt = "test-salt"

[server]
data_dir = {data:?}

[[teams]]
name = "alpha"
token = "tok-alpha"
leaderboard = true

[[teams]]
name = "beta"
token = "tok-beta"
leaderboard = true

[[teams]]
name = "gamma"
token = "tok-gamma"

[tasks.LA]
key_file = {keys:?}

[[tasks.LA.phases]]
name = "progress"
start = "2021-07-28T00:00:00Z"
end = "2021-08-10T00:00:00Z"

[[tasks.LA.phases]]
name = "evaluation"
start = "2021-08-10T00:00:00Z"
end = "2021-08-12T00:00:00Z"

[tasks.DF]
key_file = {keys:?}

[[tasks.DF.phases]]
name = "progress"
start = "2021-07-28T00:00:00Z"
end = "2021-08-10T00:00:00Z"
"#,
        data = data_dir.display().to_string(),
        keys = key_file.display().to_string(),
    )
}

pub fn at(s: &str) -> DateTime<Utc> {
    s.parse().unwrap()
}

pub struct Fixture {
    pub dir: tempfile::TempDir,
    pub clock: Arc<ManualClock>,
    pub config: PlatformConfig,
}

impl Fixture {
    pub fn new(now: &str) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let keys = dir.path().join("keys.txt");
        std::fs::write(&keys, KEYS).unwrap();
        let config =
            PlatformConfig::from_toml(&config_text(&dir.path().join("data"), &keys)).unwrap();
        Self {
            dir,
            clock: Arc::new(ManualClock::new(at(now))),
            config,
        }
    }

    pub fn open(&self) -> Platform {
        Platform::open(self.config.clone(), self.clock.clone()).unwrap()
    }
}
