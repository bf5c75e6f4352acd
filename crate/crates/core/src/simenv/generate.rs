use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::{Ar1Params, TraceConfig};
use crate::error::{Error, Result};
use crate::rng::{keyed_rng, Stream};

/// One sampled signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub signal: String,
    /// Seconds between consecutive values.
    pub period_s: u64,
    /// `Mb/s` for rates and bandwidth, `level` for request indices.
    pub unit: String,
    pub values: Vec<f64>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// The seven traces of one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSet {
    pub config: TraceConfig,
    pub requests: Trace,
    pub bands: Vec<Trace>,
    pub bandwidth: Trace,
}

impl TraceSet {
    pub fn all(&self) -> impl Iterator<Item = &Trace> {
        std::iter::once(&self.requests)
            .chain(&self.bands)
            .chain(std::iter::once(&self.bandwidth))
    }
}

// Stream words separating the signals of one seed.
const REQUEST_WORD: u64 = 0;
const BANDWIDTH_WORD: u64 = 1;
const BAND_WORD: u64 = 2;

/// One uniformly drawn level index per request interval.
pub fn generate_user_requests(cfg: &TraceConfig) -> Result<Trace> {
    cfg.validate()?;
    let n = cfg.duration / cfg.request_interval;
    let mut rng = keyed_rng(cfg.seed, Stream::Trace, &[REQUEST_WORD]);
    Ok(Trace {
        signal: "requests".into(),
        period_s: cfg.request_interval,
        unit: "level".into(),
        values: (0..n).map(|_| rng.random_range(0..cfg.levels.len()) as f64).collect(),
    })
}

/// One independent AR(1) rate series per configured band.
pub fn generate_band_rate_traces(cfg: &TraceConfig) -> Result<Vec<Trace>> {
    cfg.validate()?;
    cfg.bands
        .iter()
        .enumerate()
        .map(|(i, b)| ar1_trace(cfg, &b.name, &b.rate, &[BAND_WORD, i as u64]))
        .collect()
}

pub fn generate_bandwidth_trace(cfg: &TraceConfig) -> Result<Trace> {
    cfg.validate()?;
    ar1_trace(cfg, "bandwidth", &cfg.bandwidth, &[BANDWIDTH_WORD])
}

pub fn generate_traces(cfg: &TraceConfig) -> Result<TraceSet> {
    Ok(TraceSet {
        config: cfg.clone(),
        requests: generate_user_requests(cfg)?,
        bands: generate_band_rate_traces(cfg)?,
        bandwidth: generate_bandwidth_trace(cfg)?,
    })
}

fn ar1_trace(cfg: &TraceConfig, name: &str, p: &Ar1Params, words: &[u64]) -> Result<Trace> {
    let n = (cfg.duration / cfg.sample_period) as usize;
    let noise = Normal::new(0.0, p.noise_std)
        .map_err(|e| Error::config(format!("{name}: {e}")))?;
    let mut rng = keyed_rng(cfg.seed, Stream::Trace, words);
    let mut x = p.mean;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        values.push(x);
        x = (p.mean + p.phi * (x - p.mean) + noise.sample(&mut rng)).max(0.0);
    }
    Ok(Trace {
        signal: name.to_string(),
        period_s: cfg.sample_period,
        unit: "Mb/s".into(),
        values,
    })
}
