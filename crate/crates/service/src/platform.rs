use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Days, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use spoofeval_core::trialdata::{parse_score_file, Task, TrialDataError};

use crate::clock::Clock;
use crate::config::{ConfigError, PhaseConfig, PhaseName, PlatformConfig, TeamConfig};
use crate::keystore::{EvalContext, KeyStoreError, ScoringError};
use crate::store::{sha256_hex, Store, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubmissionStatus {
    Scored,
    Rejected,
}

/// Pooled metrics of a scored submission. `eer` is in percent; `min_tdcf`
/// is normalized and absent for DF.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubmissionResults {
    pub min_tdcf: Option<f64>,
    pub eer: f64,
    pub n_trials: usize,
}

impl SubmissionResults {
    /// Ranking metric: min t-DCF where available, else EER.
    pub fn primary(&self) -> f64 {
        self.min_tdcf.unwrap_or(self.eer)
    }
}

/// One record of the submission log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub id: u64,
    /// Team name; tokens are never stored.
    pub team: String,
    pub task: Task,
    pub phase: PhaseName,
    pub received_at: DateTime<Utc>,
    /// SHA-256 of the raw score file.
    pub digest: String,
    pub status: SubmissionStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub results: Option<SubmissionResults>,
}

impl Submission {
    fn scored(&self) -> Option<&SubmissionResults> {
        match self.status {
            SubmissionStatus::Scored => self.results.as_ref(),
            SubmissionStatus::Rejected => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardEntry {
    pub rank: usize,
    pub alias: String,
    pub metric: String,
    pub best: f64,
    pub results: SubmissionResults,
    /// Scored submissions in this phase.
    pub submissions: usize,
    pub last_update: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressPoint {
    pub date: NaiveDate,
    /// Best primary metric over all scored submissions up to this day.
    pub best: f64,
    /// Scored submissions received on this day.
    pub submissions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProgressSeries {
    pub task: Task,
    pub phase: PhaseName,
    pub metric: String,
    pub points: Vec<ProgressPoint>,
}

#[derive(Debug, thiserror::Error)]
pub enum SubmitError {
    #[error("unknown or missing token")]
    Auth,
    #[error("task {0} is not open on this platform")]
    UnknownTask(Task),
    #[error("no {0} phase is open")]
    PhaseClosed(Task),
    #[error("quota exceeded: {limit} scored submission(s) per {window}")]
    QuotaExceeded { limit: u32, window: &'static str },
    #[error("cannot parse score file: {0}")]
    Parse(TrialDataError),
    /// Only counts are reported, so the split of trials into phase subsets
    /// cannot be probed.
    #[error("scores do not match the phase's trials: {missing} missing, {unknown} unknown")]
    Alignment { missing: usize, unknown: usize },
    #[error("scoring failed: {0}")]
    Scoring(String),
    #[error("submission not found")]
    NotFound,
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, thiserror::Error)]
pub enum PlatformError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    KeyStore(#[from] KeyStoreError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

fn metric_name(task: Task) -> &'static str {
    if task.uses_tdcf() {
        "min_tdcf"
    } else {
        "eer"
    }
}

/// Anonymous leaderboard name: `team-` and 8 hex digits of a salted hash.
pub fn team_alias(salt: &str, team: &str) -> String {
    format!(
        "team-{}",
        &sha256_hex(format!("{salt}:{team}").as_bytes())[..8]
    )
}

struct Inner {
    store: Store,
    records: Vec<Submission>,
}

/// Platform state: configuration, sealed keys, and the replayed log.
///
/// Admission is serialized per team so quota checks are exact; scoring runs
/// outside the shared lock, so teams are scored in parallel. Reads take a
/// snapshot under the shared lock.
pub struct Platform {
    config: PlatformConfig,
    ctx: EvalContext,
    clock: Arc<dyn Clock>,
    team_locks: HashMap<String, Mutex<()>>,
    inner: Mutex<Inner>,
}

impl std::fmt::Debug for Platform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Platform")
            .field("data_dir", &self.config.server.data_dir)
            .field("ctx", &self.ctx)
            .finish_non_exhaustive()
    }
}

impl Platform {
    /// Loads every configured key file and replays the log in the data
    /// directory.
    pub fn open(config: PlatformConfig, clock: Arc<dyn Clock>) -> Result<Self, PlatformError> {
        let mut ctx = EvalContext::new(config.coefficient_sets()?);
        let mut loaded: Vec<&PathBuf> = Vec::new();
        for tc in config.tasks.values() {
            if !loaded.contains(&&tc.key_file) {
                ctx.add_key_file(&tc.key_file)?;
                loaded.push(&tc.key_file);
            }
        }
        Self::with_context(config, ctx, clock)
    }

    pub fn with_context(
        config: PlatformConfig,
        ctx: EvalContext,
        clock: Arc<dyn Clock>,
    ) -> Result<Self, PlatformError> {
        let (store, records) = Store::open(&config.server.data_dir)?;
        let team_locks = config
            .teams
            .iter()
            .map(|t| (t.name.clone(), Mutex::new(())))
            .collect();
        Ok(Self {
            config,
            ctx,
            clock,
            team_locks,
            inner: Mutex::new(Inner { store, records }),
        })
    }

    pub fn config(&self) -> &PlatformConfig {
        &self.config
    }

    fn team(&self, token: &str) -> Result<&TeamConfig, SubmitError> {
        self.config.team_by_token(token).ok_or(SubmitError::Auth)
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, Inner> {
        self.inner.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Active phase of `task` at `at`, if any.
    pub fn phase_at(&self, task: Task, at: DateTime<Utc>) -> Option<&PhaseConfig> {
        self.config
            .tasks
            .get(&task)?
            .phases
            .iter()
            .find(|p| p.contains(at))
    }

    /// Authenticates, enforces phase and quota, then scores `file` against
    /// the phase's trial subset. Every attempt by a known team is logged;
    /// only scored submissions count toward quota.
    pub fn submit(&self, token: &str, task: Task, file: &[u8]) -> Result<Submission, SubmitError> {
        let team = self.team(token)?;
        if !self.config.tasks.contains_key(&task) {
            return Err(SubmitError::UnknownTask(task));
        }
        let _admission = self.team_locks[&team.name]
            .lock()
            .unwrap_or_else(|e| e.into_inner());
        let now = self.clock.now();
        let phase = self
            .phase_at(task, now)
            .ok_or(SubmitError::PhaseClosed(task))?;

        let digest = self.lock().store.put_blob(file)?;
        let outcome = self
            .check_quota(&team.name, task, phase, now)
            .and_then(|()| self.score(task, phase, file));

        let mut inner = self.lock();
        let mut rec = Submission {
            id: inner.records.last().map_or(1, |r| r.id + 1),
            team: team.name.clone(),
            task,
            phase: phase.name,
            received_at: now,
            digest,
            status: SubmissionStatus::Scored,
            reason: None,
            results: None,
        };
        match &outcome {
            Ok(results) => rec.results = Some(*results),
            Err(e) => {
                rec.status = SubmissionStatus::Rejected;
                rec.reason = Some(e.to_string());
            }
        }
        inner.store.append(&rec)?;
        inner.records.push(rec.clone());
        drop(inner);
        log::info!(
            "submission {} by {} on {task}: {:?}",
            rec.id,
            rec.team,
            rec.status
        );
        outcome.map(|_| rec)
    }

    fn check_quota(
        &self,
        team: &str,
        task: Task,
        phase: &PhaseConfig,
        now: DateTime<Utc>,
    ) -> Result<(), SubmitError> {
        let inner = self.lock();
        let scored = || {
            inner.records.iter().filter(|r| {
                r.team == team && r.task == task && r.phase == phase.name && r.scored().is_some()
            })
        };
        if let Some(limit) = phase.total_limit() {
            if scored().count() >= limit as usize {
                return Err(SubmitError::QuotaExceeded {
                    limit,
                    window: "phase",
                });
            }
        }
        if let Some(limit) = phase.daily_limit() {
            let today = now.date_naive();
            if scored()
                .filter(|r| r.received_at.date_naive() == today)
                .count()
                >= limit as usize
            {
                return Err(SubmitError::QuotaExceeded {
                    limit,
                    window: "UTC day",
                });
            }
        }
        Ok(())
    }

    fn score(
        &self,
        task: Task,
        phase: &PhaseConfig,
        file: &[u8],
    ) -> Result<SubmissionResults, SubmitError> {
        let scores = parse_score_file(file).map_err(SubmitError::Parse)?;
        self.ctx
            .score(
                task,
                phase.subset(),
                phase.name.coefficient_phase(),
                &scores,
            )
            .map_err(|e| match e {
                ScoringError::Alignment(TrialDataError::MissingTrial(v)) => {
                    SubmitError::Alignment {
                        missing: v.len(),
                        unknown: 0,
                    }
                }
                ScoringError::Alignment(TrialDataError::ExtraTrial(v)) => SubmitError::Alignment {
                    missing: 0,
                    unknown: v.len(),
                },
                ScoringError::Alignment(e) => SubmitError::Parse(e),
                other => SubmitError::Scoring(other.to_string()),
            })
    }

    /// A submission, visible to its owner only; others get `NotFound`.
    pub fn get_submission(&self, token: &str, id: u64) -> Result<Submission, SubmitError> {
        let team = self.team(token)?;
        self.lock()
            .records
            .iter()
            .find(|r| r.id == id && r.team == team.name)
            .cloned()
            .ok_or(SubmitError::NotFound)
    }

    /// Snapshot of the full log.
    pub fn records(&self) -> Vec<Submission> {
        self.lock().records.clone()
    }

    /// Opted-in teams ranked by their best primary metric, ascending; ties
    /// go to the earliest submission that achieved the value.
    pub fn leaderboard(&self, task: Task, phase: PhaseName) -> Vec<LeaderboardEntry> {
        let inner = self.lock();
        leaderboard(&inner.records, &self.config, task, phase)
    }

    pub fn best_over_time(&self, task: Task, phase: PhaseName) -> ProgressSeries {
        progress_series(&self.lock().records, task, phase)
    }
}

fn leaderboard(
    records: &[Submission],
    config: &PlatformConfig,
    task: Task,
    phase: PhaseName,
) -> Vec<LeaderboardEntry> {
    struct Best<'a> {
        rec: &'a Submission,
        results: SubmissionResults,
        count: usize,
        last: DateTime<Utc>,
    }
    let opted: HashMap<&str, &TeamConfig> = config
        .teams
        .iter()
        .filter(|t| t.leaderboard)
        .map(|t| (t.name.as_str(), t))
        .collect();
    let mut best: BTreeMap<&str, Best> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| r.task == task && r.phase == phase)
    {
        let (Some(res), true) = (r.scored(), opted.contains_key(r.team.as_str())) else {
            continue;
        };
        let b = best.entry(&r.team).or_insert(Best {
            rec: r,
            results: *res,
            count: 0,
            last: r.received_at,
        });
        b.count += 1;
        b.last = b.last.max(r.received_at);
        let better = res.primary() < b.results.primary()
            || (res.primary() == b.results.primary()
                && (r.received_at, r.id) < (b.rec.received_at, b.rec.id));
        if better {
            b.rec = r;
            b.results = *res;
        }
    }
    let mut rows: Vec<Best> = best.into_values().collect();
    rows.sort_by(|a, b| {
        a.results
            .primary()
            .total_cmp(&b.results.primary())
            .then((a.rec.received_at, a.rec.id).cmp(&(b.rec.received_at, b.rec.id)))
    });
    rows.into_iter()
        .enumerate()
        .map(|(i, b)| LeaderboardEntry {
            rank: i + 1,
            alias: team_alias(&config.alias_salt, &b.rec.team),
            metric: metric_name(task).into(),
            best: b.results.primary(),
            results: b.results,
            submissions: b.count,
            last_update: b.last,
        })
        .collect()
}

/// Running best of the primary metric per UTC day over all scored
/// submissions of `task` in `phase`, from the first to the last day with a
/// submission. Days without submissions carry the previous best forward.
pub fn progress_series(records: &[Submission], task: Task, phase: PhaseName) -> ProgressSeries {
    let mut per_day: BTreeMap<NaiveDate, (f64, usize)> = BTreeMap::new();
    for r in records
        .iter()
        .filter(|r| r.task == task && r.phase == phase)
    {
        if let Some(res) = r.scored() {
            let e = per_day
                .entry(r.received_at.date_naive())
                .or_insert((f64::INFINITY, 0));
            e.0 = e.0.min(res.primary());
            e.1 += 1;
        }
    }
    let mut points = Vec::new();
    if let (Some((&first, _)), Some((&last, _))) =
        (per_day.first_key_value(), per_day.last_key_value())
    {
        let mut best = f64::INFINITY;
        let mut day = first;
        while day <= last {
            let (m, n) = per_day.get(&day).copied().unwrap_or((f64::INFINITY, 0));
            best = best.min(m);
            points.push(ProgressPoint {
                date: day,
                best,
                submissions: n,
            });
            day = day + Days::new(1);
        }
    }
    ProgressSeries {
        task,
        phase,
        metric: metric_name(task).into(),
        points,
    }
}
