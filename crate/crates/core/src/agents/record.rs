use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::card::{AgentCard, Layer};
use crate::controller::Subtask;
use crate::error::{Error, Result};
use crate::moo_core::JointModel;
use crate::objectives::{
    loss_and_gradient, predictor_population_gradient, DatasetSplit, PopulationEstimate,
    PredictorModel,
};
use crate::rng::SampleKey;
use crate::simenv::Trace;

/// Rate a resolution level needs, in Mb/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelRate {
    pub level: String,
    pub required_mbps: f64,
}

pub const DEFAULT_LEVEL_RATES: [(&str, f64); 5] =
    [("360p", 1.0), ("480p", 2.5), ("640p", 4.0), ("720p", 5.0), ("1080p", 8.0)];

/// How a prediction turns into an action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ActionRule {
    /// Highest level whose required rate fits the available rate; the
    /// lowest level when none fits. Levels are ordered lowest first.
    Resolution { levels: Vec<LevelRate> },
    /// Band with the highest predicted rate; ties go to the earlier band.
    BestBand,
    /// Reports the predicted bandwidth.
    ReportBandwidth,
}

impl ActionRule {
    /// Default rule for the card's layer, checked against its action space.
    pub fn for_card(card: &AgentCard) -> Result<Self> {
        Ok(match card.layer {
            Layer::Application => {
                let levels = card
                    .action_space
                    .iter()
                    .map(|a| {
                        DEFAULT_LEVEL_RATES
                            .iter()
                            .find(|(l, _)| l == a)
                            .map(|&(l, r)| LevelRate { level: l.into(), required_mbps: r })
                            .ok_or_else(|| Error::config(format!("no required rate for level `{a}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                ActionRule::Resolution { levels }
            }
            Layer::Physical => ActionRule::BestBand,
            Layer::Network => ActionRule::ReportBandwidth,
        })
    }
}

/// Traces an agent reads when executing, in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct Sensing {
    pub traces: Vec<Trace>,
    /// Physical units per normalised predictor unit.
    pub scale: f64,
}

/// Values the controller hands to an activated agent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ExecutionInputs {
    /// Rate available to the application; unlimited when absent.
    pub available_rate_mbps: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportStatus {
    Completed,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtaskReport {
    pub agent_id: String,
    pub subtask_id: String,
    /// Predicted values per sensed channel, in physical units.
    pub sensed_state: BTreeMap<String, f64>,
    pub action: String,
    pub action_value: Option<f64>,
    pub local_loss: f64,
    pub status: ReportStatus,
    pub wall_steps: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl SubtaskReport {
    pub fn failed(agent_id: &str, subtask_id: &str, error: &Error) -> Self {
        Self {
            agent_id: agent_id.into(),
            subtask_id: subtask_id.into(),
            sensed_state: BTreeMap::new(),
            action: String::new(),
            action_value: None,
            local_loss: f64::NAN,
            status: ReportStatus::Failed,
            wall_steps: 0,
            error: Some(error.to_string()),
        }
    }
}

/// An activated agent: card, private dataset, predictor head and sensors.
#[derive(Debug)]
pub struct AgentRecord {
    card: AgentCard,
    head: usize,
    dataset: DatasetSplit,
    sensing: Sensing,
    rule: ActionRule,
    seed: u64,
    /// Index of the value the sensed window predicts.
    cursor: usize,
    accesses: AtomicU64,
}

impl Clone for AgentRecord {
    fn clone(&self) -> Self {
        Self {
            card: self.card.clone(),
            head: self.head,
            dataset: self.dataset.clone(),
            sensing: self.sensing.clone(),
            rule: self.rule.clone(),
            seed: self.seed,
            cursor: self.cursor,
            accesses: AtomicU64::new(self.accesses.load(Ordering::Relaxed)),
        }
    }
}

impl AgentRecord {
    /// `head` is the agent's position in the joint model. The cursor starts
    /// at the last value of the traces.
    pub fn new(
        card: AgentCard,
        head: usize,
        dataset: DatasetSplit,
        sensing: Sensing,
        seed: u64,
    ) -> Result<Self> {
        card.validate()?;
        dataset.validate()?;
        if !(sensing.scale.is_finite() && sensing.scale > 0.0) {
            return Err(Error::config(format!("agent `{}`: sensing scale must be positive", card.id)));
        }
        let rule = ActionRule::for_card(&card)?;
        let cursor = sensing.traces.iter().map(Trace::len).min().unwrap_or(0).saturating_sub(1);
        Ok(Self {
            card,
            head,
            dataset,
            sensing,
            rule,
            seed,
            cursor,
            accesses: AtomicU64::new(0),
        })
    }

    pub fn with_rule(mut self, rule: ActionRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn card(&self) -> &AgentCard {
        &self.card
    }

    pub fn head(&self) -> usize {
        self.head
    }

    pub fn dataset(&self) -> &DatasetSplit {
        &self.dataset
    }

    pub fn rule(&self) -> &ActionRule {
        &self.rule
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn set_cursor(&mut self, cursor: usize) {
        self.cursor = cursor;
    }

    /// Number of reads of this agent's dataset so far.
    pub fn accesses(&self) -> u64 {
        self.accesses.load(Ordering::Relaxed)
    }

    fn touch(&self) {
        self.accesses.fetch_add(1, Ordering::Relaxed);
    }

    /// Gradient on one training window drawn with `(seed, head, iteration, slot)`.
    pub fn sample_gradient(
        &self,
        predictor: &PredictorModel,
        omega: &JointModel,
        iteration: u64,
        slot: u8,
    ) -> Result<Vec<f64>> {
        if !(1..=3).contains(&slot) {
            return Err(Error::invalid(format!("sample slot must be 1, 2 or 3, got {slot}")));
        }
        let key = SampleKey { seed: self.seed, agent: self.head, iteration, slot };
        self.sample_with_key(predictor, omega, key)
    }

    pub fn sample_with_key(
        &self,
        predictor: &PredictorModel,
        omega: &JointModel,
        key: SampleKey,
    ) -> Result<Vec<f64>> {
        self.touch();
        let train = &self.dataset.train;
        if train.is_empty() {
            return Err(Error::config(format!("agent `{}` has no training data", self.card.id)));
        }
        let w = &train[key.rng().random_range(0..train.len())];
        let mut grad = vec![0.0; predictor.dim()];
        predictor.accumulate(omega, self.head, &w.input, w.target, self.card.loss, 1.0, &mut grad)?;
        Ok(grad)
    }

    /// Mean gradient over the training pool.
    pub fn full_gradient(&self, predictor: &PredictorModel, omega: &JointModel) -> Result<Vec<f64>> {
        self.touch();
        let train = &self.dataset.train;
        let weight = 1.0 / train.len() as f64;
        let mut grad = vec![0.0; predictor.dim()];
        for w in train {
            predictor.accumulate(omega, self.head, &w.input, w.target, self.card.loss, weight, &mut grad)?;
        }
        Ok(grad)
    }

    /// Mean loss over the training pool.
    pub fn train_loss(&self, predictor: &PredictorModel, omega: &JointModel) -> Result<f64> {
        self.touch();
        let mut total = 0.0;
        for w in &self.dataset.train {
            let p = predictor.predict(omega, self.head, &w.input)?;
            total += loss_and_gradient(self.card.loss, p, w.target)?.0;
        }
        Ok(total / self.dataset.train.len() as f64)
    }

    pub fn population_gradient(
        &self,
        predictor: &PredictorModel,
        omega: &JointModel,
        budget: usize,
        stream_key: &[u64],
    ) -> Result<PopulationEstimate> {
        self.touch();
        predictor_population_gradient(
            predictor,
            omega,
            &self.dataset,
            self.card.loss,
            self.head,
            budget,
            stream_key,
        )
    }

    /// Senses the current trace windows, predicts, and acts.
    pub fn execute_subtask(
        &self,
        subtask: &Subtask,
        predictor: &PredictorModel,
        omega: &JointModel,
        inputs: &ExecutionInputs,
    ) -> Result<SubtaskReport> {
        if subtask.layer != self.card.layer {
            return Err(Error::Assignment(format!(
                "subtask `{}` is {}-layer but agent `{}` is {}-layer",
                subtask.id, subtask.layer, self.card.id, self.card.layer
            )));
        }
        let w = predictor.window();
        if self.sensing.traces.is_empty() {
            return Err(Error::config(format!("agent `{}` has no traces to sense", self.card.id)));
        }
        let scale = self.sensing.scale;
        let mut sensed = Vec::with_capacity(self.sensing.traces.len());
        let mut loss = 0.0;
        for t in &self.sensing.traces {
            if t.len() <= w || self.cursor < w || self.cursor >= t.len() {
                return Err(Error::config(format!(
                    "agent `{}`: trace `{}` too short to sense a window of {w} at position {}",
                    self.card.id,
                    t.signal,
                    self.cursor
                )));
            }
            let input: Vec<f64> = t.values[self.cursor - w..self.cursor]
                .iter()
                .map(|v| v / scale)
                .collect();
            let pred = predictor.predict(omega, self.head, &input)?;
            loss += loss_and_gradient(self.card.loss, pred, t.values[self.cursor] / scale)?.0;
            sensed.push((t.signal.clone(), pred * scale));
        }
        let local_loss = loss / sensed.len() as f64;

        let (action, value) = match &self.rule {
            ActionRule::Resolution { levels } => {
                let available = inputs.available_rate_mbps.unwrap_or(f64::INFINITY);
                let chosen = levels
                    .iter()
                    .rposition(|l| l.required_mbps <= available)
                    .unwrap_or(0);
                let level = levels
                    .get(chosen)
                    .ok_or_else(|| Error::config("resolution rule has no levels"))?;
                (level.level.clone(), Some(level.required_mbps))
            }
            ActionRule::BestBand => {
                let mut best = 0;
                for (i, (_, r)) in sensed.iter().enumerate() {
                    if *r > sensed[best].1 {
                        best = i;
                    }
                }
                (sensed[best].0.clone(), Some(sensed[best].1))
            }
            ActionRule::ReportBandwidth => {
                let bw = sensed.first().map(|s| s.1);
                ("report-bandwidth".to_string(), bw)
            }
        };
        if !self.card.action_space.contains(&action) {
            return Err(Error::Assignment(format!(
                "agent `{}` chose `{action}`, outside its action space",
                self.card.id
            )));
        }
        let mut sensed_state: BTreeMap<String, f64> = sensed.iter().cloned().collect();
        if let Some(avail) = inputs.available_rate_mbps {
            sensed_state.insert("available_rate".into(), avail);
        }
        Ok(SubtaskReport {
            agent_id: self.card.id.clone(),
            subtask_id: subtask.id.clone(),
            sensed_state,
            action,
            action_value: value,
            local_loss,
            status: ReportStatus::Completed,
            wall_steps: sensed.len() as u64,
            error: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{default_cards, CrossLayerTask};
    use crate::controller::{Environment, Subtask};
    use crate::moo_core::{run_conflict_resolving, RunConfig, StepSchedule, StochasticTask};
    use crate::simenv::{Ar1Params, DatasetParams, TraceConfig, DEFAULT_BANDS, DEFAULT_LEVELS};

    fn strings(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    fn env(cfg: TraceConfig) -> Environment {
        Environment::generate(&cfg, &DatasetParams::default(), 0).unwrap()
    }

    fn records(env: &Environment) -> Vec<AgentRecord> {
        let cards = default_cards(&strings(&DEFAULT_LEVELS), &strings(&DEFAULT_BANDS));
        let d = &env.datasets;
        let t = &env.traces;
        vec![
            AgentRecord::new(
                cards[0].clone(),
                0,
                d.application.clone(),
                Sensing { traces: vec![t.requests.clone()], scale: d.request_scale },
                1,
            )
            .unwrap(),
            AgentRecord::new(
                cards[1].clone(),
                1,
                d.physical.clone(),
                Sensing { traces: t.bands.clone(), scale: d.rate_scale },
                1,
            )
            .unwrap(),
            AgentRecord::new(
                cards[2].clone(),
                2,
                d.network.clone(),
                Sensing { traces: vec![t.bandwidth.clone()], scale: d.bandwidth_scale },
                1,
            )
            .unwrap(),
        ]
    }

    fn predictor() -> PredictorModel {
        PredictorModel::new(8, 4, &["aAgent", "pAgent", "nAgent"]).unwrap()
    }

    fn subtask(layer: Layer) -> Subtask {
        Subtask {
            id: format!("g/{layer}"),
            goal_id: "g".into(),
            layer,
            requirement: String::new(),
            skills: vec![],
        }
    }

    #[test]
    fn band_ties_pick_the_first_band() {
        let e = env(TraceConfig::default().with_duration(300));
        let recs = records(&e);
        let p = predictor();
        let zeros = JointModel::zeros(p.layout());
        let r = recs[1]
            .execute_subtask(&subtask(Layer::Physical), &p, &zeros, &ExecutionInputs::default())
            .unwrap();
        assert_eq!(r.action, "n1");
        assert_eq!(r.status, ReportStatus::Completed);
    }

    #[test]
    fn resolution_respects_available_rate() {
        let e = env(TraceConfig::default().with_duration(300));
        let recs = records(&e);
        let p = predictor();
        let omega = JointModel::seeded_gaussian(p.layout(), 3, 0.1);
        let pick = |rate: Option<f64>| {
            recs[0]
                .execute_subtask(
                    &subtask(Layer::Application),
                    &p,
                    &omega,
                    &ExecutionInputs { available_rate_mbps: rate },
                )
                .unwrap()
                .action
        };
        assert_eq!(pick(Some(0.5)), "360p");
        assert_eq!(pick(Some(4.5)), "640p");
        assert_eq!(pick(Some(8.0)), "1080p");
        assert_eq!(pick(None), "1080p");
    }

    #[test]
    fn converged_predictor_tracks_constant_bandwidth() {
        let mut cfg = TraceConfig::default().with_duration(300);
        cfg.bandwidth = Ar1Params::new(50.0, 0.5, 0.0);
        let e = env(cfg);
        let rec = records(&e).remove(2);
        let rec = AgentRecord { head: 0, ..rec };
        let p = PredictorModel::new(8, 4, &["nAgent"]).unwrap();
        let task = CrossLayerTask::new(p.clone(), vec![rec]).unwrap();
        let run_cfg = RunConfig::new(StepSchedule::constant(0.1, 0.5), 3000, 7).with_g_error_every(0);
        let out = run_conflict_resolving(&task, &run_cfg).unwrap();
        let omega = &out.final_state().model;
        let r = task.agents()[0]
            .execute_subtask(&subtask(Layer::Network), &p, omega, &ExecutionInputs::default())
            .unwrap();
        let bw = r.action_value.unwrap();
        assert!((bw - 50.0).abs() < 0.5, "reported {bw}");
    }

    #[test]
    fn sampling_is_keyed_and_slot_checked() {
        let e = env(TraceConfig::default().with_duration(300));
        let recs = records(&e);
        let p = predictor();
        let omega = JointModel::seeded_gaussian(p.layout(), 5, 0.3);
        let a = recs[2].sample_gradient(&p, &omega, 4, 1).unwrap();
        assert_eq!(a, recs[2].sample_gradient(&p, &omega, 4, 1).unwrap());
        let slots: Vec<_> = (1..=3).map(|s| recs[2].sample_gradient(&p, &omega, 4, s).unwrap()).collect();
        assert!(slots[0] != slots[1] || slots[1] != slots[2]);
        assert!(recs[2].sample_gradient(&p, &omega, 4, 0).is_err());
        assert!(recs[2].sample_gradient(&p, &omega, 4, 4).is_err());
    }

    #[test]
    fn one_window_sample_equals_full_batch() {
        let e = env(TraceConfig::default().with_duration(300));
        let mut rec = records(&e).remove(2);
        rec.dataset.train.truncate(1);
        let p = predictor();
        let omega = JointModel::seeded_gaussian(p.layout(), 5, 0.3);
        assert_eq!(
            rec.sample_gradient(&p, &omega, 0, 3).unwrap(),
            rec.full_gradient(&p, &omega).unwrap()
        );
    }

    #[test]
    fn layer_mismatch_and_missing_traces() {
        let e = env(TraceConfig::default().with_duration(300));
        let recs = records(&e);
        let p = predictor();
        let omega = JointModel::zeros(p.layout());
        let inputs = ExecutionInputs::default();
        assert!(matches!(
            recs[0].execute_subtask(&subtask(Layer::Network), &p, &omega, &inputs),
            Err(Error::Assignment(_))
        ));
        let mut blind = recs[2].clone();
        blind.sensing.traces.clear();
        assert!(matches!(
            blind.execute_subtask(&subtask(Layer::Network), &p, &omega, &inputs),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn agents_only_read_their_own_data() {
        let e = env(TraceConfig::default().with_duration(300));
        let task = CrossLayerTask::new(predictor(), records(&e)).unwrap();
        let omega = task.initial_model(0);
        let key = SampleKey { seed: 0, agent: 1, iteration: 0, slot: 1 };
        task.sample_gradient(1, &omega, key).unwrap();
        let counts: Vec<_> = task.agents().iter().map(AgentRecord::accesses).collect();
        assert_eq!(counts, [0, 1, 0]);
        task.full_gradients(&omega).unwrap();
        let counts: Vec<_> = task.agents().iter().map(AgentRecord::accesses).collect();
        assert_eq!(counts, [1, 2, 1]);
    }

    #[test]
    fn actions_stay_in_the_action_space() {
        let e = env(TraceConfig::default().with_duration(300));
        let recs = records(&e);
        let p = predictor();
        for seed in 0..25 {
            let omega = JointModel::seeded_gaussian(p.layout(), seed, 1.0);
            for (rec, layer) in recs.iter().zip(Layer::ALL) {
                let inputs = ExecutionInputs { available_rate_mbps: Some(seed as f64 * 0.4) };
                let r = rec.execute_subtask(&subtask(layer), &p, &omega, &inputs).unwrap();
                assert!(rec.card().action_space.contains(&r.action));
            }
        }
    }
}
