use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{default_cards, load_cards, AgentCard, Registry};
use crate::controller::{
    default_intents, default_separation, CoordinationConfig, IntentTable, SeparationTable, Weighting,
};
use crate::error::{Error, Result};
use crate::moo_core::{ScheduleKind, StepSchedule, WeightUpdate};
use crate::objectives::{PredictorModel, QuadraticOracle};
use crate::simenv::{DatasetParams, TraceConfig};

/// Environment variable naming the default output root.
pub const OUT_DIR_ENV: &str = "XLAYER_OUT_DIR";
const FALLBACK_OUT_DIR: &str = "xlayer-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSettings {
    pub variant: WeightUpdate,
    pub schedule: ScheduleKind,
    pub eta0: f64,
    pub beta0: f64,
    /// Iterations `T`; also the horizon of the `theory` schedule.
    pub iterations: u64,
    pub seeds: Vec<u64>,
    /// Stride between G-error evaluations; `0` disables them.
    pub g_error_every: u64,
    pub mc_budget: usize,
    pub features: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        let s = StepSchedule::theory_default(1);
        Self {
            variant: WeightUpdate::Matrix,
            schedule: ScheduleKind::Theory,
            eta0: s.eta0,
            beta0: s.beta0,
            iterations: 1000,
            seeds: vec![0],
            g_error_every: 100,
            mc_budget: 10_000,
            features: PredictorModel::DEFAULT_FEATURES,
        }
    }
}

impl OptimizerSettings {
    pub fn step_schedule(&self) -> StepSchedule {
        StepSchedule {
            kind: self.schedule,
            eta0: self.eta0,
            beta0: self.beta0,
            horizon: self.iterations,
        }
    }

    pub fn coordination(&self, weighting: Weighting) -> CoordinationConfig {
        CoordinationConfig {
            schedule: self.step_schedule(),
            iterations: self.iterations,
            weighting,
            g_error_every: self.g_error_every,
            mc_budget: self.mc_budget,
            features: self.features,
        }
    }
}

/// Objective optimised by `compare` and `verify-bounds`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskConfig {
    QuadraticOracle {
        #[serde(default = "default_samples")]
        samples: usize,
        #[serde(default = "default_noise")]
        noise_std: f64,
    },
    CrosslayerSim,
}

fn default_samples() -> usize {
    1000
}

fn default_noise() -> f64 {
    0.1
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig::QuadraticOracle {
            samples: default_samples(),
            noise_std: default_noise(),
        }
    }
}

impl TaskConfig {
    /// The conflicting quadratic oracle for `seed`, if selected.
    pub fn oracle(&self, seed: u64) -> Result<Option<QuadraticOracle>> {
        match self {
            TaskConfig::QuadraticOracle { samples, noise_std } => {
                QuadraticOracle::conflicting(*samples, *noise_std, seed).map(Some)
            }
            TaskConfig::CrosslayerSim => Ok(None),
        }
    }
}

/// One `(η, β, T)` point of the C-error bound sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPoint {
    pub eta: f64,
    pub beta: f64,
    pub t: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    pub sweep: Vec<SweepPoint>,
    /// Horizons for the C-error rate fit under the theory schedule.
    pub rate_horizons: Vec<u64>,
    pub rate_seeds: u64,
    /// Training-set sizes for the G-error scaling fit.
    pub g_sizes: Vec<u64>,
    pub g_horizon: u64,
    pub g_seeds: u64,
    pub g_noise_std: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        let mut sweep = Vec::new();
        for (eta, t) in [(0.05, 500), (0.2, 1000), (0.5, 2000)] {
            for beta in [0.001, 0.01, 0.05] {
                sweep.push(SweepPoint { eta, beta, t });
            }
        }
        Self {
            sweep,
            rate_horizons: vec![256, 1024, 4096, 16384],
            rate_seeds: 10,
            g_sizes: vec![100, 1000, 10_000],
            g_horizon: 200,
            g_seeds: 10,
            g_noise_std: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AgentsSource {
    Inline(Vec<AgentCard>),
    /// Path to a card file, relative to the config file.
    File(PathBuf),
}

/// One experiment document. Unknown fields are rejected everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub trace: TraceConfig,
    pub dataset: DatasetParams,
    /// Default cards for the configured levels and bands when absent.
    pub agents: Option<AgentsSource>,
    pub intents: IntentTable,
    /// Default separation for the configured levels and bands when absent.
    pub separation: Option<SeparationTable>,
    pub optimizer: OptimizerSettings,
    pub task: TaskConfig,
    pub bounds: BoundsConfig,
    pub out_dir: Option<PathBuf>,
    /// Directory relative paths resolve against; set when loading.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            trace: TraceConfig::default(),
            dataset: DatasetParams::default(),
            agents: None,
            intents: default_intents(),
            separation: None,
            optimizer: OptimizerSettings::default(),
            task: TaskConfig::default(),
            bounds: BoundsConfig::default(),
            out_dir: None,
            base_dir: PathBuf::from("."),
        }
    }
}

/// Command-line values that take precedence over the config document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub variant: Option<WeightUpdate>,
    pub iterations: Option<u64>,
    pub eta0: Option<f64>,
    pub beta0: Option<f64>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| {
            Error::config(format!(
                "{}:{}:{}: {e}",
                path.display(),
                e.line(),
                e.column()
            ))
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.trace.validate()?;
        self.dataset.validate()?;
        self.intents.validate()?;
        if let Some(s) = &self.separation {
            s.validate()?;
        }
        if self.optimizer.seeds.is_empty() {
            return Err(Error::config("optimizer.seeds must not be empty"));
        }
        if self.optimizer.iterations == 0 {
            return Err(Error::config("optimizer.iterations must be at least 1"));
        }
        self.optimizer.step_schedule().validate()?;
        if let Some(AgentsSource::File(p)) = &self.agents {
            let full = self.base_dir.join(p);
            if !full.is_file() {
                return Err(Error::config(format!("agent card file {} does not exist", full.display())));
            }
        }
        Ok(())
    }

    /// Applies flag values; flags win over the document.
    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            match self.optimizer.seeds.first_mut() {
                Some(first) => *first = seed,
                None => self.optimizer.seeds.push(seed),
            }
            self.trace.seed = seed;
        }
        if let Some(d) = &o.out_dir {
            self.out_dir = Some(d.clone());
        }
        if let Some(v) = o.variant {
            self.optimizer.variant = v;
        }
        if let Some(t) = o.iterations {
            self.optimizer.iterations = t;
        }
        if let Some(e) = o.eta0 {
            self.optimizer.eta0 = e;
        }
        if let Some(b) = o.beta0 {
            self.optimizer.beta0 = b;
        }
        self.validate()
    }

    /// Flag or config value, else the environment variable, else `xlayer-out`.
    pub fn output_root(&self) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(FALLBACK_OUT_DIR))
    }

    pub fn seed(&self) -> u64 {
        self.optimizer.seeds[0]
    }

    pub fn cards(&self) -> Result<Vec<AgentCard>> {
        match &self.agents {
            None => Ok(default_cards(&self.trace.levels, &self.band_names())),
            Some(AgentsSource::Inline(c)) => Ok(c.clone()),
            Some(AgentsSource::File(p)) => load_cards(&self.base_dir.join(p)),
        }
    }

    pub fn registry(&self) -> Result<Registry> {
        Registry::from_cards(self.cards()?)
    }

    pub fn separation_table(&self) -> SeparationTable {
        self.separation
            .clone()
            .unwrap_or_else(|| default_separation(&self.trace.levels, &self.band_names()))
    }

    fn band_names(&self) -> Vec<String> {
        self.trace.bands.iter().map(|b| b.name.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str("{}").unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.optimizer.seeds, [0]);
        assert_eq!(cfg.registry().unwrap().len(), 3);
        assert_eq!(cfg.bounds.sweep.len(), 9);
    }

    #[test]
    fn unknown_fields_rejected_at_every_level() {
        for doc in [
            r#"{"extra": 1}"#,
            r#"{"optimizer": {"T": 5}}"#,
            r#"{"task": {"kind": "quadratic-oracle", "dim": 3}}"#,
            r#"{"trace": {"bands": [{"name": "n1", "rate": {"mean": 1, "phi": 0.5, "noise_std": 1, "x": 0}}]}}"#,
        ] {
            assert!(serde_json::from_str::<ExperimentConfig>(doc).is_err(), "{doc}");
        }
    }

    #[test]
    fn flags_override_document() {
        let mut cfg: ExperimentConfig =
            serde_json::from_str(r#"{"optimizer": {"seeds": [4, 5], "iterations": 10}}"#).unwrap();
        cfg.apply(&Overrides {
            seed: Some(9),
            iterations: Some(20),
            variant: Some(WeightUpdate::LiteralDiagonal),
            ..Default::default()
        })
        .unwrap();
        assert_eq!(cfg.optimizer.seeds, [9, 5]);
        assert_eq!(cfg.optimizer.iterations, 20);
        assert_eq!(cfg.optimizer.step_schedule().horizon, 20);
        assert_eq!(cfg.optimizer.variant, WeightUpdate::LiteralDiagonal);
    }

    #[test]
    fn invalid_values_rejected() {
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"optimizer": {"seeds": []}}"#).unwrap();
        assert!(cfg.validate().is_err());
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"optimizer": {"iterations": 0}}"#).unwrap();
        assert!(cfg.validate().is_err());
        let cfg: ExperimentConfig = serde_json::from_str(r#"{"agents": "missing.json"}"#).unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn load_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        fs::write(&p, "{\n  \"seed\": 1\n}").unwrap();
        let err = ExperimentConfig::load(&p).unwrap_err().to_string();
        assert!(err.contains("c.json:2:"), "{err}");
    }
}
