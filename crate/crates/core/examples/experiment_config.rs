//! Loads an experiment document, applies flag-style overrides and prints the
//! effective settings.
//!
//! ```text
//! cargo run --example experiment_config -- crates/core/configs/experiment.json
//! ```
use std::path::PathBuf;

use xlayer::cli::{ExperimentConfig, Overrides};
use xlayer::moo_core::WeightUpdate;

fn main() -> xlayer::Result<()> {
    let mut cfg = match std::env::args().nth(1) {
        Some(p) => ExperimentConfig::load(&PathBuf::from(p))?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides {
        seed: Some(42),
        variant: Some(WeightUpdate::LiteralDiagonal),
        ..Default::default()
    })?;
    println!("output root: {}", cfg.output_root().display());
    println!("seeds {:?}, T = {}", cfg.optimizer.seeds, cfg.optimizer.iterations);
    println!("schedule {:?}", cfg.optimizer.step_schedule());
    println!("task {:?}", cfg.task);
    println!("{}", serde_json::to_string_pretty(&cfg.optimizer).expect("serialisable"));
    Ok(())
}
