use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use spoofeval_core::gmm::{FrontEnd, InitMethod};
use spoofeval_core::trialdata::{Phase, Task};
use spoofeval_service::PhaseName;

#[derive(Debug, Parser)]
#[command(
    name = "spoofeval",
    version,
    about = "Spoofing countermeasure evaluation toolkit"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    pub format: Format,
    /// Write the report (or the artifact, for commands that produce one)
    /// here instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// Log more (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    /// Aligned text for reading.
    Human,
    /// Flat `key=value` lines (CSV for tabular output).
    Kv,
    /// JSON at full precision.
    Structured,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pooled and per-condition min t-DCF and EER for one score file.
    Evaluate(EvaluateArgs),
    /// Equal error rate.
    Eer(EerArgs),
    /// Minimum t-DCF.
    Tdcf(TdcfArgs),
    /// Pairwise HTER z-tests with Holm-Bonferroni correction.
    Significance(SignificanceArgs),
    /// Cepstral features from WAV files.
    Extract(ExtractArgs),
    /// Telephony companding round trip of a WAV file.
    Channel(ChannelArgs),
    /// Train a diagonal GMM on feature files.
    GmmTrain(GmmTrainArgs),
    /// Log-likelihood-ratio scores of feature files.
    GmmScore(GmmScoreArgs),
    /// Train and score a CQCC-GMM or LFCC-GMM baseline end to end.
    Baseline(BaselineArgs),
    /// Run the submission service.
    Serve(ServeArgs),
    /// Best primary metric per day from a service's submission log.
    ProgressSeries(ProgressSeriesArgs),
}

fn parse_task(s: &str) -> Result<Task, String> {
    s.parse()
        .map_err(|()| format!("unknown task {s:?} (expected LA, PA or DF)"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhaseArg {
    Progress,
    Evaluation,
    Hidden,
}

impl From<PhaseArg> for Phase {
    fn from(p: PhaseArg) -> Self {
        match p {
            PhaseArg::Progress => Phase::Progress,
            PhaseArg::Evaluation => Phase::Evaluation,
            PhaseArg::Hidden => Phase::Hidden,
        }
    }
}

/// Labelled scores: a score file joined to a key file, or two files of
/// bare class scores.
#[derive(Debug, Args)]
pub struct ScoreInput {
    /// Score file (`trial_id score` per line).
    #[arg(long, value_name = "PATH", requires = "keys", conflicts_with_all = ["bona", "spoof"])]
    pub scores: Option<PathBuf>,
    /// Key file (`trial_id task condition attack label phase`).
    #[arg(long, value_name = "PATH", requires = "scores")]
    pub keys: Option<PathBuf>,
    /// Bonafide scores, one per line.
    #[arg(long, value_name = "PATH", requires = "spoof")]
    pub bona: Option<PathBuf>,
    /// Spoof scores, one per line.
    #[arg(long, value_name = "PATH", requires = "bona")]
    pub spoof: Option<PathBuf>,
    /// Keep only keys of this task.
    #[arg(long, value_parser = parse_task)]
    pub task: Option<Task>,
    /// Keep only trials of this key subset (default: all). Also picks the
    /// coefficient set: progress, or evaluation for anything else.
    #[arg(long, value_enum)]
    pub phase: Option<PhaseArg>,
    /// Drop scores without a key instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct CoeffArgs {
    /// Explicit t-DCF coefficients; all three are required together.
    #[arg(long, requires_all = ["c1", "c2"], conflicts_with = "coeffs_config")]
    pub c0: Option<f64>,
    #[arg(long, requires_all = ["c0", "c2"])]
    pub c1: Option<f64>,
    #[arg(long, requires_all = ["c0", "c1"])]
    pub c2: Option<f64>,
    /// TOML file with `[coefficients.<TASK>.<phase>]` tables (the service
    /// config format); unlisted sets keep their defaults.
    #[arg(long, value_name = "PATH")]
    pub coeffs_config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long, value_name = "PATH")]
    pub scores: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub keys: PathBuf,
    #[arg(long, value_parser = parse_task)]
    pub task: Task,
    /// Key subset to score; also selects the coefficient set.
    #[arg(long, value_enum, default_value_t = PhaseArg::Evaluation)]
    pub phase: PhaseArg,
    #[command(flatten)]
    pub coeffs: CoeffArgs,
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct EerArgs {
    #[command(flatten)]
    pub input: ScoreInput,
}

#[derive(Debug, Args)]
pub struct TdcfArgs {
    #[command(flatten)]
    pub input: ScoreInput,
    #[command(flatten)]
    pub coeffs: CoeffArgs,
}

#[derive(Debug, Args)]
pub struct SignificanceArgs {
    /// Directory of score files, one system per file (id = file stem).
    #[arg(
        long,
        value_name = "DIR",
        requires = "keys",
        conflicts_with = "results"
    )]
    pub systems: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub keys: Option<PathBuf>,
    /// CSV of precomputed operating points:
    /// `system_id,eer,pmiss,pfa,n_bona,n_spoof` (rates as fractions).
    #[arg(long, value_name = "PATH")]
    pub results: Option<PathBuf>,
    #[arg(long, value_parser = parse_task)]
    pub task: Option<Task>,
    #[arg(long, value_enum)]
    pub phase: Option<PhaseArg>,
    /// Family-wise significance level.
    #[arg(long, default_value_t = spoofeval_core::stats::DEFAULT_ALPHA)]
    pub alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FeatureKind {
    Lfcc,
    Cqcc,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(value_enum)]
    pub kind: FeatureKind,
    /// 16-bit mono WAV files. With several inputs `--out` is a directory.
    #[arg(required = true, value_name = "WAV")]
    pub inputs: Vec<PathBuf>,
    /// Use the task's maximum frequency (LA/DF 4 kHz, PA 8 kHz).
    #[arg(long, value_parser = parse_task, conflicts_with = "fmax")]
    pub task: Option<Task>,
    #[arg(long, value_name = "HZ")]
    pub fmax: Option<f64>,
    /// Static coefficients only, without deltas.
    #[arg(long)]
    pub statics: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Codec {
    Mulaw,
    Alaw,
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    #[arg(value_enum)]
    pub codec: Codec,
    #[arg(value_name = "WAV")]
    pub input: PathBuf,
    /// Band-limit to 3.4 kHz around an 8 kHz codec (16 kHz input only).
    #[arg(long)]
    pub narrowband: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Split,
    Random,
}

impl From<InitArg> for InitMethod {
    fn from(i: InitArg) -> Self {
        match i {
            InitArg::Split => InitMethod::Split,
            InitArg::Random => InitMethod::RandomFrames,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Mixture components.
    #[arg(long, short = 'k', default_value_t = 512)]
    pub components: usize,
    /// EM iterations per splitting stage.
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-5)]
    pub tolerance: f64,
    /// Fraction of the global variance.
    #[arg(long, default_value_t = 1e-3)]
    pub variance_floor: f64,
    #[arg(long, value_enum, default_value_t = InitArg::Split)]
    pub init: InitArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct GmmTrainArgs {
    /// Feature files written by `extract`; frames are pooled.
    #[arg(required = true, value_name = "FEAT")]
    pub features: Vec<PathBuf>,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Args)]
pub struct GmmScoreArgs {
    #[arg(long, value_name = "PATH")]
    pub bona_model: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub spoof_model: PathBuf,
    /// Feature files; trial ids are the file stems.
    #[arg(required = true, value_name = "FEAT")]
    pub features: Vec<PathBuf>,
}

fn parse_front_end(s: &str) -> Result<FrontEnd, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[arg(long, value_parser = parse_task)]
    pub task: Task,
    #[arg(long, value_parser = parse_front_end)]
    pub front_end: FrontEnd,
    /// Directory of bonafide training WAVs.
    #[arg(long, value_name = "DIR")]
    pub train_bona: PathBuf,
    /// Directory of spoofed training WAVs.
    #[arg(long, value_name = "DIR")]
    pub train_spoof: PathBuf,
    /// Directory of trial WAVs; trial ids are the file stems.
    #[arg(long, value_name = "DIR")]
    pub eval: PathBuf,
    /// Also write `bona.gmm` and `spoof.gmm` here.
    #[arg(long, value_name = "DIR")]
    pub models_dir: Option<PathBuf>,
    #[command(flatten)]
    pub train: TrainArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long)]
    pub port: Option<u16>,
    #[arg(long, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,
}

fn parse_phase_name(s: &str) -> Result<PhaseName, String> {
    s.parse()
}

#[derive(Debug, Args)]
pub struct ProgressSeriesArgs {
    /// Service config; locates the data directory.
    #[arg(long, value_name = "PATH", required_unless_present = "data_dir")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,
    #[arg(long, value_parser = parse_task)]
    pub task: Task,
    #[arg(long, value_parser = parse_phase_name, default_value = "progress")]
    pub phase: PhaseName,
}
