use std::collections::HashSet;
use std::fmt::Write as _;

use super::{ScoreSet, TrialDataError, TrialId};

/// Iterates non-empty lines as (1-based line number, trimmed content).
/// A trailing `\r` is tolerated.
pub(crate) fn lines(text: &[u8]) -> Result<impl Iterator<Item = (usize, &str)>, TrialDataError> {
    let text = std::str::from_utf8(text).map_err(|_| TrialDataError::NotUtf8)?;
    Ok(text
        .split('\n')
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty()))
}

/// Parses `<trial_id> <score>` lines. Blank lines are skipped; any run of
/// spaces or tabs separates the two fields.
pub fn parse_score_file(text: &[u8]) -> Result<ScoreSet, TrialDataError> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for (line_no, line) in lines(text)? {
        let mut fields = line.split_whitespace();
        let (Some(id), Some(score), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(TrialDataError::MalformedLine(line_no));
        };
        let score: f64 = score
            .parse()
            .map_err(|_| TrialDataError::MalformedLine(line_no))?;
        if !score.is_finite() {
            return Err(TrialDataError::NonFiniteScore(line_no));
        }
        if !seen.insert(id) {
            return Err(TrialDataError::DuplicateTrial(id.to_string()));
        }
        entries.push((TrialId::new(id)?, score));
    }
    Ok(ScoreSet { entries })
}

/// Canonical form: single space separator, shortest round-trip decimal for
/// the score, `\n` after every line.
pub fn write_score_file(scores: &ScoreSet) -> String {
    let mut out = String::with_capacity(scores.len() * 24);
    for (id, score) in scores.entries() {
        writeln!(out, "{id} {score}").expect("write to String");
    }
    out
}
