use std::io::Write;
use std::path::Path;

use crate::args::Format;
use crate::error::{ctx, CliError, CliResult};

/// Where a command's report goes: `--out` if given, else standard output.
/// Standard output is buffered and written once the command finishes.
pub struct Output<'a> {
    pub format: Format,
    out: Option<&'a Path>,
    stdout: Vec<u8>,
}

impl<'a> Output<'a> {
    pub fn new(format: Format, out: Option<&'a Path>) -> Self {
        Self {
            format,
            out,
            stdout: Vec::new(),
        }
    }

    pub fn flush_to(&self, w: &mut dyn Write) -> CliResult<()> {
        w.write_all(&self.stdout)
            .and_then(|()| w.flush())
            .map_err(CliError::data)
    }

    /// Writes the command's main report.
    pub fn report(&mut self, text: &str) -> CliResult<()> {
        match self.out {
            Some(p) => std::fs::write(p, text).map_err(ctx(p)),
            None => {
                self.stdout.extend_from_slice(text.as_bytes());
                Ok(())
            }
        }
    }

    /// Writes a summary to standard output regardless of `--out`.
    pub fn summary(&mut self, text: &str) -> CliResult<()> {
        self.stdout.extend_from_slice(text.as_bytes());
        Ok(())
    }

    /// Destination of commands that produce a file.
    pub fn artifact(&self, what: &str) -> CliResult<&'a Path> {
        self.out
            .ok_or_else(|| CliError::Usage(format!("--out is required ({what})")))
    }
}

pub fn json(value: &impl serde::Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    s
}
