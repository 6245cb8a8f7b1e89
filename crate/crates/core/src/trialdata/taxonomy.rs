use std::collections::BTreeSet;

use super::Task;

/// Condition vocabulary per task.
///
/// LA conditions are `LA-C1`..`LA-C7`, DF conditions `DF-C1`..`DF-C9`.
/// PA conditions are dash-joined factor tuples such as `R1-M2-D3`, where
/// each factor comes from one of the PA factor families and no family
/// appears twice. Slots whose content is undisclosed are still registered
/// and treated as opaque tags. Additional tags can be registered with
/// [`Taxonomy::with_tag`].
#[derive(Debug, Clone, Default)]
pub struct Taxonomy {
    extra: BTreeSet<(Task, String)>,
}

/// PA factor families: (prefix, lowest index, highest index).
const PA_FACTORS: &[(char, u32, u32)] = &[
    ('R', 1, 9), // ASV room
    ('r', 1, 9), // attacker room
    ('M', 1, 3), // ASV microphone
    ('m', 1, 3), // attacker microphone
    ('D', 1, 6), // talker-to-ASV distance
    ('d', 1, 3), // attacker-to-talker distance
    ('s', 2, 4), // attacker replay device
];

impl Taxonomy {
    pub fn with_tag(mut self, task: Task, tag: impl Into<String>) -> Self {
        self.extra.insert((task, tag.into()));
        self
    }

    pub fn contains(&self, task: Task, tag: &str) -> bool {
        if self.extra.contains(&(task, tag.to_string())) {
            return true;
        }
        match task {
            Task::La => numbered(tag, "LA-C", 7),
            Task::Df => numbered(tag, "DF-C", 9),
            Task::Pa => pa_tuple(tag),
        }
    }

    /// The built-in LA/DF condition lists, in order.
    pub fn builtin_conditions(task: Task) -> Vec<String> {
        match task {
            Task::La => (1..=7).map(|i| format!("LA-C{i}")).collect(),
            Task::Df => (1..=9).map(|i| format!("DF-C{i}")).collect(),
            Task::Pa => Vec::new(),
        }
    }
}

fn numbered(tag: &str, prefix: &str, max: u32) -> bool {
    tag.strip_prefix(prefix)
        .filter(|n| !n.starts_with('0'))
        .and_then(|n| n.parse::<u32>().ok())
        .is_some_and(|n| (1..=max).contains(&n))
}

fn pa_tuple(tag: &str) -> bool {
    let mut used = BTreeSet::new();
    for factor in tag.split('-') {
        let mut chars = factor.chars();
        let Some(family) = chars.next() else {
            return false;
        };
        let Some(&(_, lo, hi)) = PA_FACTORS.iter().find(|(p, _, _)| *p == family) else {
            return false;
        };
        let digits = chars.as_str();
        let ok = digits.len() == 1 && digits.parse::<u32>().is_ok_and(|n| (lo..=hi).contains(&n));
        if !ok || !used.insert(family) {
            return false;
        }
    }
    true
}
