use serde::{Deserialize, Serialize};

use super::intent::SemanticGoal;
use crate::agents::Layer;
use crate::error::{Error, Result};

/// One per-layer piece of a goal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subtask {
    pub id: String,
    pub goal_id: String,
    pub layer: Layer,
    pub requirement: String,
    pub skills: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubtaskTemplate {
    pub layer: Layer,
    pub requirement: String,
    #[serde(default)]
    pub skills: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationEntry {
    pub goal: String,
    pub subtasks: Vec<SubtaskTemplate>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeparationTable {
    pub entries: Vec<SeparationEntry>,
}

impl SeparationTable {
    pub fn validate(&self) -> Result<()> {
        for e in &self.entries {
            if e.subtasks.is_empty() {
                return Err(Error::config(format!("goal `{}` separates into no subtasks", e.goal)));
            }
            let mut seen = Vec::new();
            for s in &e.subtasks {
                if seen.contains(&s.layer) {
                    return Err(Error::config(format!(
                        "goal `{}` lists the {} layer twice",
                        e.goal, s.layer
                    )));
                }
                seen.push(s.layer);
            }
        }
        Ok(())
    }
}

pub fn default_separation(levels: &[String], bands: &[String]) -> SeparationTable {
    SeparationTable {
        entries: vec![SeparationEntry {
            goal: "IncreaseResolution".into(),
            subtasks: vec![
                SubtaskTemplate {
                    layer: Layer::Application,
                    requirement: format!("resolution adaptation over {{{}}}", levels.join(", ")),
                    skills: vec!["resolution-adaptation".into()],
                },
                SubtaskTemplate {
                    layer: Layer::Physical,
                    requirement: format!("multi-band rate sensing over {{{}}}", bands.join(", ")),
                    skills: vec!["band-sensing".into()],
                },
                SubtaskTemplate {
                    layer: Layer::Network,
                    requirement: "end-to-end bandwidth tracking".into(),
                    skills: vec!["bandwidth-tracking".into()],
                },
            ],
        }],
    }
}

/// One subtask per layer listed for the goal, ids `<goal>/<layer>`.
pub fn separate_task(goal: &SemanticGoal, table: &SeparationTable) -> Result<Vec<Subtask>> {
    table.validate()?;
    let entry = table
        .entries
        .iter()
        .find(|e| e.goal == goal.id)
        .ok_or_else(|| Error::config(format!("goal `{}` has no separation entry", goal.id)))?;
    Ok(entry
        .subtasks
        .iter()
        .map(|s| Subtask {
            id: format!("{}/{}", goal.id, s.layer),
            goal_id: goal.id.clone(),
            layer: s.layer,
            requirement: s.requirement.clone(),
            skills: s.skills.clone(),
        })
        .collect())
}
