use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Intent {
    pub goal: String,
    pub description: String,
    pub task_index: u32,
    /// Substrings that trigger this goal, matched case-insensitively.
    pub prompts: Vec<String>,
}

/// Ordered intents; the first entry with a matching prompt wins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntentTable {
    pub intents: Vec<Intent>,
}

impl IntentTable {
    pub fn validate(&self) -> Result<()> {
        if self.intents.is_empty() {
            return Err(Error::config("intent table is empty"));
        }
        for i in &self.intents {
            if i.prompts.iter().any(|p| p.trim().is_empty()) || i.prompts.is_empty() {
                return Err(Error::config(format!("intent `{}` has an empty prompt list or prompt", i.goal)));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemanticGoal {
    pub id: String,
    pub description: String,
    pub matched_prompt: String,
    pub task_index: u32,
}

pub fn default_intents() -> IntentTable {
    IntentTable {
        intents: vec![Intent {
            goal: "IncreaseResolution".into(),
            description: "Raise the delivered video resolution as far as the network allows."
                .into(),
            task_index: 0,
            prompts: vec![
                "increase video resolution".into(),
                "make video clearer".into(),
            ],
        }],
    }
}

/// `None` when no prompt of any intent occurs in the utterance.
pub fn detect_goal(utterance: &str, table: &IntentTable) -> Option<SemanticGoal> {
    let text = utterance.to_lowercase();
    table.intents.iter().find_map(|intent| {
        intent
            .prompts
            .iter()
            .find(|p| text.contains(&p.to_lowercase()))
            .map(|p| SemanticGoal {
                id: intent.goal.clone(),
                description: intent.description.clone(),
                matched_prompt: p.clone(),
                task_index: intent.task_index,
            })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn golden_utterances() {
        let t = default_intents();
        let g = detect_goal("increase video resolution", &t).unwrap();
        assert_eq!(g.id, "IncreaseResolution");
        let g = detect_goal("please MAKE VIDEO CLEARER now", &t).unwrap();
        assert_eq!((g.id.as_str(), g.matched_prompt.as_str()), ("IncreaseResolution", "make video clearer"));
        for u in ["hello there", "", "make the video clearer"] {
            assert_eq!(detect_goal(u, &t), None, "{u}");
        }
    }

    #[test]
    fn first_entry_wins() {
        let mut t = default_intents();
        t.intents.push(Intent {
            goal: "Other".into(),
            description: String::new(),
            task_index: 1,
            prompts: vec!["video".into()],
        });
        assert_eq!(detect_goal("make video clearer", &t).unwrap().id, "IncreaseResolution");
        assert_eq!(detect_goal("video please", &t).unwrap().id, "Other");
    }

    proptest! {
        #[test]
        fn prepending_only_affects_matching_utterances(u in ".{0,40}", prompt in "[a-z]{3,6}") {
            let base = default_intents();
            let mut extended = base.clone();
            extended.intents.insert(0, Intent {
                goal: "New".into(),
                description: String::new(),
                task_index: 9,
                prompts: vec![prompt.clone()],
            });
            if !u.to_lowercase().contains(&prompt) {
                prop_assert_eq!(detect_goal(&u, &base), detect_goal(&u, &extended));
            }
        }
    }
}
