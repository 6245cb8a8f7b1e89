use std::collections::HashSet;
use std::fmt::Write as _;

use super::score_file::lines;
use super::{Taxonomy, TrialDataError, TrialId, TrialKey};

/// Parses a six-field key file against the built-in condition taxonomy.
pub fn parse_key_file(text: &[u8]) -> Result<Vec<TrialKey>, TrialDataError> {
    parse_key_file_with(text, &Taxonomy::default())
}

pub fn parse_key_file_with(
    text: &[u8],
    taxonomy: &Taxonomy,
) -> Result<Vec<TrialKey>, TrialDataError> {
    let mut keys = Vec::new();
    let mut seen = HashSet::new();
    for (line, content) in lines(text)? {
        let fields: Vec<&str> = content.split_whitespace().collect();
        let [id, task, condition, attack, label, phase] = fields[..] else {
            return Err(TrialDataError::MalformedLine(line));
        };
        let task = task.parse().map_err(|_| TrialDataError::UnknownTask {
            line,
            value: task.to_string(),
        })?;
        if !taxonomy.contains(task, condition) {
            return Err(TrialDataError::UnknownCondition {
                line,
                task,
                value: condition.to_string(),
            });
        }
        let label = label.parse().map_err(|_| TrialDataError::UnknownLabel {
            line,
            value: label.to_string(),
        })?;
        let phase = phase.parse().map_err(|_| TrialDataError::UnknownPhase {
            line,
            value: phase.to_string(),
        })?;
        if !seen.insert(id) {
            return Err(TrialDataError::DuplicateTrial(id.to_string()));
        }
        keys.push(TrialKey {
            trial: TrialId::new(id)?,
            task,
            condition: condition.to_string(),
            attack: (attack != "-").then(|| attack.to_string()),
            label,
            phase,
        });
    }
    Ok(keys)
}

pub fn write_key_file(keys: &[TrialKey]) -> String {
    let mut out = String::new();
    for k in keys {
        writeln!(
            out,
            "{} {} {} {} {} {}",
            k.trial,
            k.task,
            k.condition,
            k.attack.as_deref().unwrap_or("-"),
            k.label.as_str(),
            k.phase
        )
        .expect("write to String");
    }
    out
}
