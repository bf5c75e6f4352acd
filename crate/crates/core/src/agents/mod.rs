//! Layer agents: capability cards, the registry the controller selects
//! from, and per-agent records that own data, sense traces and act.

mod card;
mod record;
mod task;

pub use card::{default_cards, load_cards, save_cards, AgentCard, Layer, Registry};
pub use record::{
    ActionRule, AgentRecord, ExecutionInputs, LevelRate, ReportStatus, Sensing, SubtaskReport,
    DEFAULT_LEVEL_RATES,
};
pub use task::CrossLayerTask;
