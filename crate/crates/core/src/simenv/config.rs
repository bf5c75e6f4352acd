use serde::{Deserialize, Serialize};

use super::{DEFAULT_BANDS, DEFAULT_LEVELS};
use crate::error::{Error, Result};

/// Parameters of one clipped AR(1) signal
/// `x_{k+1} = max(0, mean + φ(x_k − mean) + σε)`, started at `mean`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ar1Params {
    pub mean: f64,
    pub phi: f64,
    pub noise_std: f64,
}

impl Ar1Params {
    pub fn new(mean: f64, phi: f64, noise_std: f64) -> Self {
        Self { mean, phi, noise_std }
    }

    pub fn validate(&self, signal: &str) -> Result<()> {
        if !(self.phi.abs() < 1.0) {
            return Err(Error::config(format!("{signal}: |phi| must be < 1, got {}", self.phi)));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::config(format!(
                "{signal}: noise_std must be non-negative, got {}",
                self.noise_std
            )));
        }
        if !(self.mean.is_finite() && self.mean >= 0.0) {
            return Err(Error::config(format!("{signal}: mean must be non-negative, got {}", self.mean)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandConfig {
    pub name: String,
    pub rate: Ar1Params,
}

/// Everything needed to regenerate the synthetic traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TraceConfig {
    pub seed: u64,
    /// Seconds.
    pub duration: u64,
    /// Seconds between user requests.
    pub request_interval: u64,
    /// Seconds between rate and bandwidth samples.
    pub sample_period: u64,
    pub levels: Vec<String>,
    /// Per-band achievable rate in Mb/s.
    pub bands: Vec<BandConfig>,
    /// End-to-end bandwidth in Mb/s.
    pub bandwidth: Ar1Params,
}

impl Default for TraceConfig {
    fn default() -> Self {
        let means = [60.0, 50.0, 40.0, 30.0, 20.0];
        Self {
            seed: 0,
            duration: 3600,
            request_interval: 5,
            sample_period: 1,
            levels: DEFAULT_LEVELS.iter().map(|s| s.to_string()).collect(),
            bands: DEFAULT_BANDS
                .iter()
                .zip(means)
                .map(|(name, mean)| BandConfig {
                    name: name.to_string(),
                    rate: Ar1Params::new(mean, 0.9, 4.0),
                })
                .collect(),
            bandwidth: Ar1Params::new(50.0, 0.95, 3.0),
        }
    }
}

impl TraceConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_duration(mut self, duration: u64) -> Self {
        self.duration = duration;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.request_interval == 0 || self.sample_period == 0 {
            return Err(Error::config("request interval and sample period must be positive"));
        }
        if self.duration < self.request_interval || self.duration < self.sample_period {
            return Err(Error::config(format!(
                "duration {} s is shorter than the request interval or sample period",
                self.duration
            )));
        }
        if !self.duration.is_multiple_of(self.sample_period) {
            return Err(Error::config("duration must be a multiple of the sample period"));
        }
        if self.levels.is_empty() || self.bands.is_empty() {
            return Err(Error::config("level and band lists must be non-empty"));
        }
        let mut names = std::collections::HashSet::new();
        for b in &self.bands {
            if !names.insert(b.name.as_str()) {
                return Err(Error::config(format!("duplicate band `{}`", b.name)));
            }
            b.rate.validate(&b.name)?;
        }
        self.bandwidth.validate("bandwidth")
    }

    pub fn band_names(&self) -> Vec<&str> {
        self.bands.iter().map(|b| b.name.as_str()).collect()
    }
}
