use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::objectives::LossKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layer {
    Application,
    Physical,
    Network,
}

impl Layer {
    pub const ALL: [Layer; 3] = [Layer::Application, Layer::Physical, Layer::Network];

    pub fn name(self) -> &'static str {
        match self {
            Layer::Application => "application",
            Layer::Physical => "physical",
            Layer::Network => "network",
        }
    }
}

impl std::fmt::Display for Layer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Capability card an agent submits before it can be called.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentCard {
    pub id: String,
    pub layer: Layer,
    pub description: String,
    /// Named signal channels the agent senses.
    pub state_space: Vec<String>,
    /// Named actions the agent may take.
    pub action_space: Vec<String>,
    pub loss: LossKind,
    pub skills: Vec<String>,
}

impl AgentCard {
    pub fn validate(&self) -> Result<()> {
        if self.id.trim().is_empty() {
            return Err(Error::config("agent card has an empty id"));
        }
        if self.action_space.is_empty() {
            return Err(Error::config(format!("agent `{}` declares no actions", self.id)));
        }
        if self.state_space.is_empty() {
            return Err(Error::config(format!("agent `{}` declares no state channels", self.id)));
        }
        Ok(())
    }

    pub fn has_skills(&self, required: &[String]) -> bool {
        required.iter().all(|s| self.skills.contains(s))
    }
}

/// Registered cards, indexed densely in registration order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Registry {
    cards: Vec<AgentCard>,
    index: HashMap<String, usize>,
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_cards(cards: impl IntoIterator<Item = AgentCard>) -> Result<Self> {
        let mut r = Self::new();
        for c in cards {
            r.register(c)?;
        }
        Ok(r)
    }

    pub fn register(&mut self, card: AgentCard) -> Result<usize> {
        card.validate()?;
        if self.index.contains_key(&card.id) {
            return Err(Error::Conflict(format!("agent id `{}` is already registered", card.id)));
        }
        let i = self.cards.len();
        self.index.insert(card.id.clone(), i);
        self.cards.push(card);
        Ok(i)
    }

    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    pub fn cards(&self) -> &[AgentCard] {
        &self.cards
    }

    pub fn get(&self, index: usize) -> Option<&AgentCard> {
        self.cards.get(index)
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }
}

/// The aAgent, pAgent and nAgent used by the video scenario.
pub fn default_cards(levels: &[String], bands: &[String]) -> Vec<AgentCard> {
    vec![
        AgentCard {
            id: "aAgent".into(),
            layer: Layer::Application,
            description: "Adapts video resolution to predicted user requests and available rate."
                .into(),
            state_space: vec!["requests".into()],
            action_space: levels.to_vec(),
            loss: LossKind::L1,
            skills: vec!["resolution-adaptation".into()],
        },
        AgentCard {
            id: "pAgent".into(),
            layer: Layer::Physical,
            description: "Senses per-band achievable rates and selects a band.".into(),
            state_space: bands.to_vec(),
            action_space: bands.to_vec(),
            loss: LossKind::Mse,
            skills: vec!["band-sensing".into()],
        },
        AgentCard {
            id: "nAgent".into(),
            layer: Layer::Network,
            description: "Tracks end-to-end bandwidth between the UE and the core.".into(),
            state_space: vec!["bandwidth".into()],
            action_space: vec!["report-bandwidth".into()],
            loss: LossKind::LogCosh,
            skills: vec!["bandwidth-tracking".into()],
        },
    ]
}

pub fn load_cards(path: &Path) -> Result<Vec<AgentCard>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let cards: Vec<AgentCard> = serde_json::from_str(&text)
        .map_err(|e| Error::json(path.display().to_string(), e))?;
    cards.iter().try_for_each(AgentCard::validate)?;
    Ok(cards)
}

pub fn save_cards(cards: &[AgentCard], path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(cards).map_err(|e| Error::json("agent cards", e))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
