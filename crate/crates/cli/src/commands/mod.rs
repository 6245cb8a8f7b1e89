mod audio;
mod gmm;
mod platform;
mod scoring;

use std::path::{Path, PathBuf};

use spoofeval_core::features::{read_wav, AudioSignal};

use crate::args::Command;
use crate::error::{ctx, CliError, CliResult};
use crate::output::Output;

pub fn dispatch(cmd: &Command, out: &mut Output) -> CliResult<()> {
    match cmd {
        Command::Evaluate(a) => scoring::evaluate(a, out),
        Command::Eer(a) => scoring::eer(a, out),
        Command::Tdcf(a) => scoring::tdcf(a, out),
        Command::Significance(a) => scoring::significance(a, out),
        Command::Extract(a) => audio::extract(a, out),
        Command::Channel(a) => audio::channel(a, out),
        Command::GmmTrain(a) => gmm::train(a, out),
        Command::GmmScore(a) => gmm::score(a, out),
        Command::Baseline(a) => gmm::baseline(a, out),
        Command::Serve(a) => platform::serve(a),
        Command::ProgressSeries(a) => platform::progress_series(a, out),
    }
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(ctx(path))
}

fn load_wav(path: &Path) -> CliResult<AudioSignal> {
    let f = std::fs::File::open(path).map_err(ctx(path))?;
    read_wav(std::io::BufReader::new(f)).map_err(ctx(path))
}

/// File stem as a trial or system id.
fn stem(path: &Path) -> CliResult<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_owned)
        .ok_or_else(|| CliError::Data(format!("{}: no usable file name", path.display())))
}

/// Files in `dir` with extension `ext`, sorted by name.
fn list_dir(dir: &Path, ext: &str) -> CliResult<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(ctx(dir))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|e| e.eq_ignore_ascii_case(ext)))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::Data(format!(
            "{}: no .{ext} files",
            dir.display()
        )));
    }
    Ok(files)
}
