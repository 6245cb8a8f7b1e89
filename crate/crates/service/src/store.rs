use std::fs::{File, OpenOptions};
use std::io::{self, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::platform::Submission;

pub const LOG_FILE: &str = "submissions.jsonl";
pub const BLOB_DIR: &str = "blobs";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path} line {line}: corrupt record: {message}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

/// Reads the submission log in `dir` without modifying it; a torn trailing
/// record is skipped.
pub fn read_log(dir: &Path) -> Result<Vec<Submission>, StoreError> {
    let path = dir.join(LOG_FILE);
    let text = match std::fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(source) => return Err(StoreError::Io { path, source }),
    };
    let complete = text.rfind('\n').map_or(0, |i| i + 1);
    parse_records(&path, &text[..complete])
}

fn parse_records(path: &Path, text: &str) -> Result<Vec<Submission>, StoreError> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(line).map_err(|e| StoreError::Corrupt {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push(rec);
    }
    Ok(records)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Append-only JSON-lines record log plus content-addressed raw files.
///
/// Each append is flushed and fsynced before returning. On open, a
/// trailing line without its newline is taken as a torn write from a crash:
/// it is discarded and truncated away. Malformed complete lines are errors.
#[derive(Debug)]
pub struct Store {
    dir: PathBuf,
    log: File,
}

impl Store {
    pub fn open(dir: &Path) -> Result<(Self, Vec<Submission>), StoreError> {
        let io_err = |path: &Path| {
            let path = path.to_path_buf();
            move |source| StoreError::Io { path, source }
        };
        std::fs::create_dir_all(dir.join(BLOB_DIR)).map_err(io_err(dir))?;
        let path = dir.join(LOG_FILE);
        let mut log = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(&path)
            .map_err(io_err(&path))?;
        let mut text = String::new();
        log.read_to_string(&mut text).map_err(io_err(&path))?;

        let complete = text.rfind('\n').map_or(0, |i| i + 1);
        if complete < text.len() {
            log::warn!(
                "{}: discarding {} bytes of torn trailing record",
                path.display(),
                text.len() - complete
            );
            log.set_len(complete as u64).map_err(io_err(&path))?;
            log.sync_all().map_err(io_err(&path))?;
        }
        log.seek(SeekFrom::End(0)).map_err(io_err(&path))?;

        let records = parse_records(&path, &text[..complete])?;
        Ok((
            Self {
                dir: dir.to_path_buf(),
                log,
            },
            records,
        ))
    }

    pub fn append(&mut self, rec: &Submission) -> Result<(), StoreError> {
        let path = self.dir.join(LOG_FILE);
        let mut line = serde_json::to_string(rec).expect("submission serializes");
        line.push('\n');
        self.log
            .write_all(line.as_bytes())
            .and_then(|()| self.log.sync_data())
            .map_err(|source| StoreError::Io { path, source })
    }

    /// Stores `bytes` under their SHA-256 digest and returns the digest.
    pub fn put_blob(&self, bytes: &[u8]) -> Result<String, StoreError> {
        let digest = sha256_hex(bytes);
        let path = self.blob_path(&digest);
        if !path.exists() {
            let tmp = path.with_extension("tmp");
            let write = || -> io::Result<()> {
                let mut f = File::create(&tmp)?;
                f.write_all(bytes)?;
                f.sync_all()?;
                std::fs::rename(&tmp, &path)
            };
            write().map_err(|source| StoreError::Io { path, source })?;
        }
        Ok(digest)
    }

    pub fn blob_path(&self, digest: &str) -> PathBuf {
        self.dir.join(BLOB_DIR).join(digest)
    }
}
