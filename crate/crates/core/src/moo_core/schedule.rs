use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScheduleKind {
    /// `η_t = eta0`, `β_t = beta0`.
    Constant,
    /// Horizon-scaled constants: `η = eta0·T^{-1/4}`, `β = beta0·T^{-3/4}`.
    Theory,
    /// Same exponents applied to the iteration count: `η_t = eta0·(t+1)^{-1/4}`.
    Decaying,
}

/// Step sizes for the weight update (`η`) and the model update (`β`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepSchedule {
    pub kind: ScheduleKind,
    #[serde(default = "default_eta0")]
    pub eta0: f64,
    #[serde(default = "default_beta0")]
    pub beta0: f64,
    /// Horizon `T` used by the `theory` kind.
    #[serde(default = "default_horizon")]
    pub horizon: u64,
}

fn default_eta0() -> f64 {
    0.5
}

fn default_beta0() -> f64 {
    0.1
}

fn default_horizon() -> u64 {
    1
}

impl StepSchedule {
    pub fn constant(eta: f64, beta: f64) -> Self {
        Self {
            kind: ScheduleKind::Constant,
            eta0: eta,
            beta0: beta,
            horizon: 1,
        }
    }

    pub fn theory(eta0: f64, beta0: f64, horizon: u64) -> Self {
        Self {
            kind: ScheduleKind::Theory,
            eta0,
            beta0,
            horizon,
        }
    }

    /// Theory schedule with the default constants `eta0 = 0.5`, `beta0 = 0.1`.
    pub fn theory_default(horizon: u64) -> Self {
        Self::theory(default_eta0(), default_beta0(), horizon)
    }

    pub fn decaying(eta0: f64, beta0: f64) -> Self {
        Self {
            kind: ScheduleKind::Decaying,
            eta0,
            beta0,
            horizon: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta0.is_finite() && self.eta0 > 0.0) {
            return Err(Error::config(format!("eta0 must be positive, got {}", self.eta0)));
        }
        if !(self.beta0.is_finite() && self.beta0 > 0.0) {
            return Err(Error::config(format!("beta0 must be positive, got {}", self.beta0)));
        }
        if self.horizon == 0 {
            return Err(Error::config("schedule horizon must be at least 1"));
        }
        Ok(())
    }

    pub fn eta(&self, t: u64) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.eta0,
            ScheduleKind::Theory => self.eta0 * (self.horizon as f64).powf(-0.25),
            ScheduleKind::Decaying => self.eta0 * ((t + 1) as f64).powf(-0.25),
        }
    }

    pub fn beta(&self, t: u64) -> f64 {
        match self.kind {
            ScheduleKind::Constant => self.beta0,
            ScheduleKind::Theory => self.beta0 * (self.horizon as f64).powf(-0.75),
            ScheduleKind::Decaying => self.beta0 * ((t + 1) as f64).powf(-0.75),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theory_ratio() {
        for &t in &[1u64, 16, 256, 10_000] {
            let s = StepSchedule::theory(0.5, 0.1, t);
            let expected = (0.1 / 0.5) * (t as f64).powf(-0.5);
            assert!((s.beta(0) / s.eta(0) - expected).abs() < 1e-14 * expected.max(1.0));
            assert_eq!(s.eta(0), s.eta(t - 1));
        }
    }

    #[test]
    fn steps_strictly_positive() {
        for s in [
            StepSchedule::constant(0.1, 0.01),
            StepSchedule::theory_default(1 << 20),
            StepSchedule::decaying(0.5, 0.1),
        ] {
            s.validate().unwrap();
            for t in [0u64, 1, 1000, 1 << 30] {
                assert!(s.eta(t) > 0.0 && s.beta(t) > 0.0);
            }
        }
        assert!(StepSchedule::constant(0.0, 0.1).validate().is_err());
        assert!(StepSchedule::theory(0.5, 0.1, 0).validate().is_err());
    }

    #[test]
    fn parses_kebab_case() {
        let s: StepSchedule = serde_json::from_str(r#"{"kind":"theory","horizon":64}"#).unwrap();
        assert_eq!(s, StepSchedule::theory(0.5, 0.1, 64));
        assert!(serde_json::from_str::<StepSchedule>(r#"{"kind":"theory","bogus":1}"#).is_err());
    }
}
