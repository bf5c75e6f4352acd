use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::generate::{Trace, TraceSet};
use crate::error::{Error, Result};
use crate::objectives::{DatasetSplit, DistributionDescriptor, Window};
use crate::rng::{keyed_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetParams {
    pub window: usize,
    /// Fraction of windows used for training; the count is floored.
    pub split_fraction: f64,
}

impl Default for DatasetParams {
    fn default() -> Self {
        Self {
            window: crate::objectives::PredictorModel::DEFAULT_WINDOW,
            split_fraction: 0.8,
        }
    }
}

impl DatasetParams {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::config("window length must be positive"));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::config(format!(
                "split fraction must lie in (0, 1), got {}",
                self.split_fraction
            )));
        }
        Ok(())
    }
}

/// Per-layer datasets. Values are divided by the matching scale, so
/// predictions are multiplied back to recover physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentDatasets {
    pub application: DatasetSplit,
    pub physical: DatasetSplit,
    pub network: DatasetSplit,
    /// Level indices per normalised unit.
    pub request_scale: f64,
    /// Mb/s per normalised unit, shared by all bands.
    pub rate_scale: f64,
    pub bandwidth_scale: f64,
}

/// Slices the traces into next-value windows and splits each agent's pool
/// into train and holdout by a seeded shuffle.
pub fn build_datasets(traces: &TraceSet, params: &DatasetParams, seed: u64) -> Result<AgentDatasets> {
    params.validate()?;
    let cfg = &traces.config;
    let request_scale = (cfg.levels.len().saturating_sub(1)).max(1) as f64;
    let rate_scale = positive_scale(cfg.bands.iter().map(|b| b.rate.mean).fold(0.0, f64::max));
    let bandwidth_scale = positive_scale(cfg.bandwidth.mean);

    let application = split(
        windows(&traces.requests, params.window, request_scale)?,
        params,
        seed,
        0,
        DistributionDescriptor::UniformLevels {
            levels: cfg.levels.len(),
            scale: request_scale,
        },
    )?;

    let mut band_windows = Vec::new();
    for t in &traces.bands {
        band_windows.extend(windows(t, params.window, rate_scale)?);
    }
    let physical = split(
        band_windows,
        params,
        seed,
        1,
        DistributionDescriptor::Mixture {
            components: cfg
                .bands
                .iter()
                .map(|b| ar1(b.rate, rate_scale))
                .collect(),
        },
    )?;

    let network = split(
        windows(&traces.bandwidth, params.window, bandwidth_scale)?,
        params,
        seed,
        2,
        ar1(cfg.bandwidth, bandwidth_scale),
    )?;

    Ok(AgentDatasets {
        application,
        physical,
        network,
        request_scale,
        rate_scale,
        bandwidth_scale,
    })
}

fn positive_scale(s: f64) -> f64 {
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

fn ar1(p: super::Ar1Params, scale: f64) -> DistributionDescriptor {
    DistributionDescriptor::Ar1 {
        mean: p.mean,
        phi: p.phi,
        noise_std: p.noise_std,
        scale,
        clip_at_zero: true,
    }
}

fn windows(trace: &Trace, w: usize, scale: f64) -> Result<Vec<Window>> {
    if trace.len() <= w {
        return Err(Error::config(format!(
            "trace `{}` has {} values, need more than the window length {w}",
            trace.signal,
            trace.len()
        )));
    }
    Ok(trace
        .values
        .windows(w + 1)
        .enumerate()
        .map(|(start, v)| Window {
            input: v[..w].iter().map(|x| x / scale).collect(),
            target: v[w] / scale,
            tag: Some(trace.signal.clone()),
            start,
        })
        .collect())
}

fn split(
    mut all: Vec<Window>,
    params: &DatasetParams,
    seed: u64,
    agent_word: u64,
    descriptor: DistributionDescriptor,
) -> Result<DatasetSplit> {
    let mut rng = keyed_rng(seed, Stream::Shuffle, &[agent_word]);
    all.shuffle(&mut rng);
    let n_train = (params.split_fraction * all.len() as f64).floor() as usize;
    let holdout = all.split_off(n_train);
    let ds = DatasetSplit {
        window: params.window,
        train: all,
        holdout,
        descriptor,
    };
    ds.validate()?;
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simenv::{generate_traces, TraceConfig};

    fn traces(duration: u64) -> TraceSet {
        generate_traces(&TraceConfig::default().with_duration(duration).with_seed(3)).unwrap()
    }

    #[test]
    fn window_and_split_counts() {
        let t = traces(100);
        let params = DatasetParams { window: 8, split_fraction: 0.8 };
        let ds = build_datasets(&t, &params, 1).unwrap();
        assert_eq!(ds.network.train.len(), 73);
        assert_eq!(ds.network.holdout.len(), 19);
        // 5 bands × 92 windows = 460 → 368 train
        assert_eq!(ds.physical.train.len() + ds.physical.holdout.len(), 460);
        assert_eq!(ds.physical.train.len(), 368);
        // 20 requests → 12 windows → 9 train
        assert_eq!(ds.application.train.len(), 9);
    }

    #[test]
    fn short_trace_is_rejected() {
        let t = traces(40); // 8 requests, not more than the window
        assert!(matches!(
            build_datasets(&t, &DatasetParams::default(), 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn split_is_a_partition_and_deterministic() {
        let t = traces(600);
        let params = DatasetParams::default();
        let a = build_datasets(&t, &params, 5).unwrap();
        assert_eq!(a, build_datasets(&t, &params, 5).unwrap());
        for ds in [&a.application, &a.physical, &a.network] {
            ds.validate().unwrap();
        }
        let b = build_datasets(&t, &params, 6).unwrap();
        assert_ne!(a.network.train, b.network.train);
    }

    #[test]
    fn windows_reconstruct_the_trace() {
        let t = traces(300);
        let ds = build_datasets(&t, &DatasetParams::default(), 2).unwrap();
        let scale = ds.bandwidth_scale;
        let mut seen: Vec<Option<f64>> = vec![None; t.bandwidth.len()];
        for w in ds.network.train.iter().chain(&ds.network.holdout) {
            let values = w.input.iter().chain(std::iter::once(&w.target));
            for (k, v) in values.enumerate() {
                let slot = &mut seen[w.start + k];
                if let Some(prev) = slot {
                    assert_eq!(*prev, *v);
                }
                *slot = Some(*v);
            }
        }
        for (s, v) in seen.iter().zip(&t.bandwidth.values) {
            assert_eq!(s.unwrap(), v / scale);
        }
    }

    #[test]
    fn band_windows_are_tagged() {
        let ds = build_datasets(&traces(200), &DatasetParams::default(), 0).unwrap();
        let tags: std::collections::BTreeSet<_> =
            ds.physical.train.iter().filter_map(|w| w.tag.as_deref()).collect();
        assert_eq!(tags.into_iter().collect::<Vec<_>>(), ["n1", "n2", "n3", "n5", "n7"]);
    }
}
