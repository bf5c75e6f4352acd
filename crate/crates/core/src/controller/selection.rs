use serde::{Deserialize, Serialize};

use super::separation::Subtask;
use crate::agents::Registry;
use crate::error::{Error, Result};

/// One subtask's selection, with the candidates that were considered.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentEntry {
    pub subtask_id: String,
    pub agent_id: String,
    pub agent_index: usize,
    /// Matching agent ids in registration order.
    pub candidates: Vec<String>,
    pub tie_break: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub entries: Vec<AssignmentEntry>,
}

impl Assignment {
    pub fn agent_for(&self, subtask_id: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|e| e.subtask_id == subtask_id)
            .map(|e| e.agent_id.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Maps each subtask to the lowest-index registered agent on its layer that
/// holds every required skill.
pub fn select_agents(subtasks: &[Subtask], registry: &Registry) -> Result<Assignment> {
    let mut entries = Vec::with_capacity(subtasks.len());
    for s in subtasks {
        let candidates: Vec<(usize, &str)> = registry
            .cards()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.layer == s.layer && c.has_skills(&s.skills))
            .map(|(i, c)| (i, c.id.as_str()))
            .collect();
        let Some(&(index, id)) = candidates.first() else {
            return Err(Error::UnsatisfiableSubtask {
                subtask: s.id.clone(),
                reason: format!(
                    "no registered {}-layer agent has skills {:?}",
                    s.layer, s.skills
                ),
            });
        };
        entries.push(AssignmentEntry {
            subtask_id: s.id.clone(),
            agent_id: id.to_string(),
            agent_index: index,
            candidates: candidates.iter().map(|(_, c)| c.to_string()).collect(),
            tie_break: (candidates.len() > 1)
                .then(|| format!("lowest registration index ({index}) among {}", candidates.len())),
        });
    }
    Ok(Assignment { entries })
}
