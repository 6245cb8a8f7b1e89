use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use spoofeval_core::features::{
    alaw_roundtrip, mulaw_roundtrip, write_features, write_wav, CqccConfig, CqccExtractor,
    FeatureMatrix, LfccConfig, LfccExtractor,
};

use super::{load_wav, stem};
use crate::args::{ChannelArgs, Codec, ExtractArgs, FeatureKind, Format};
use crate::error::{ctx, CliResult};
use crate::output::{json, Output};

#[derive(Serialize)]
struct Extracted {
    input: PathBuf,
    output: PathBuf,
    frames: usize,
    dim: usize,
}

fn extract_one(a: &ExtractArgs, fmax: f64, input: &Path) -> CliResult<FeatureMatrix> {
    let signal = load_wav(input)?;
    let rate = signal.sample_rate();
    let m = match a.kind {
        FeatureKind::Lfcc => {
            let e = LfccExtractor::new(LfccConfig::with_fmax(fmax), rate).map_err(ctx(input))?;
            if a.statics {
                e.statics(&signal)
            } else {
                e.extract(&signal)
            }
        }
        FeatureKind::Cqcc => {
            let e = CqccExtractor::new(CqccConfig::with_fmax(fmax), rate).map_err(ctx(input))?;
            if a.statics {
                e.statics(&signal)
            } else {
                e.extract(&signal)
            }
        }
    };
    m.map_err(ctx(input))
}

fn write_matrix(path: &Path, m: &FeatureMatrix) -> CliResult<()> {
    let f = std::fs::File::create(path).map_err(ctx(path))?;
    write_features(BufWriter::new(f), m).map_err(ctx(path))
}

pub fn extract(a: &ExtractArgs, out: &mut Output) -> CliResult<()> {
    let dest = out.artifact("feature file, or directory for several inputs")?;
    let fmax = match (a.task, a.fmax) {
        (Some(t), _) => t.baseline_fmax(),
        (None, Some(f)) => f,
        (None, None) => 4000.0,
    };
    let outputs: Vec<PathBuf> = if a.inputs.len() == 1 {
        vec![dest.to_path_buf()]
    } else {
        std::fs::create_dir_all(dest).map_err(ctx(dest))?;
        a.inputs
            .iter()
            .map(|p| Ok(dest.join(format!("{}.feat", stem(p)?))))
            .collect::<CliResult<_>>()?
    };
    let rows = a
        .inputs
        .par_iter()
        .zip(&outputs)
        .map(|(input, output)| {
            let m = extract_one(a, fmax, input)?;
            write_matrix(output, &m)?;
            Ok(Extracted {
                input: input.clone(),
                output: output.clone(),
                frames: m.n_frames(),
                dim: m.dim(),
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    out.summary(&match out.format {
        Format::Human | Format::Kv => rows
            .iter()
            .map(|r| {
                format!(
                    "{} -> {} ({} x {})\n",
                    r.input.display(),
                    r.output.display(),
                    r.frames,
                    r.dim
                )
            })
            .collect(),
        Format::Structured => json(&rows),
    })
}

pub fn channel(a: &ChannelArgs, out: &mut Output) -> CliResult<()> {
    let dest = out.artifact("output WAV")?;
    let signal = load_wav(&a.input)?;
    let processed = match a.codec {
        Codec::Mulaw => mulaw_roundtrip(&signal, a.narrowband),
        Codec::Alaw => alaw_roundtrip(&signal, a.narrowband),
    }
    .map_err(ctx(&a.input))?;
    let f = std::fs::File::create(dest).map_err(ctx(dest))?;
    write_wav(BufWriter::new(f), &processed).map_err(ctx(dest))?;
    let codec = match a.codec {
        Codec::Mulaw => "mulaw",
        Codec::Alaw => "alaw",
    };
    out.summary(&match out.format {
        Format::Human | Format::Kv => format!(
            "{} -> {} ({codec}{}, {} samples)\n",
            a.input.display(),
            dest.display(),
            if a.narrowband { ", narrowband" } else { "" },
            processed.len()
        ),
        Format::Structured => json(&serde_json::json!({
            "input": a.input,
            "output": dest,
            "codec": codec,
            "narrowband": a.narrowband,
            "samples": processed.len(),
        })),
    })
}
