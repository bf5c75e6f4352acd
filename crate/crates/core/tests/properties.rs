use proptest::prelude::*;

use xlayer::moo_core::{
    c_error_bound, conflict_error, dynamic_weight_step, generalization_error, min_norm_weights,
    project_to_simplex, run_conflict_resolving, run_static_baseline, BoundInputs, GradientMatrix,
    JointModel, RunConfig, StepSchedule, StochasticTask, WeightUpdate, WeightVector,
};
use xlayer::objectives::{loss_and_gradient, LossKind, QuadraticAgent, QuadraticOracle, QuadraticTask};
use xlayer::rng::SampleKey;

fn on_simplex(w: &[f64]) -> bool {
    w.iter().all(|&x| x >= 0.0) && (w.iter().sum::<f64>() - 1.0).abs() <= 1e-12
}

fn matrix_strategy(k: usize, dim: usize) -> impl Strategy<Value = GradientMatrix> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, dim), k)
        .prop_map(|cols| GradientMatrix::from_columns(cols).unwrap())
}

fn weights_strategy(k: usize) -> impl Strategy<Value = WeightVector> {
    prop::collection::vec(-1.0f64..2.0, k).prop_map(|v| project_to_simplex(&v).unwrap())
}

proptest! {
    #[test]
    fn projection_is_nearest_grid_point_or_better(v in prop::collection::vec(-2.0f64..2.0, 3)) {
        let p = project_to_simplex(&v).unwrap();
        let d = |w: &[f64]| w.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let best = d(p.as_slice());
        for i in 0..=100 {
            for j in 0..=100 - i {
                let w = [i as f64 / 100.0, j as f64 / 100.0, (100 - i - j) as f64 / 100.0];
                prop_assert!(best <= d(&w) + 1e-9);
            }
        }
    }

    #[test]
    fn weight_step_stays_on_simplex(
        (j1, j2, gamma) in (2usize..5).prop_flat_map(|k| (matrix_strategy(k, 4), matrix_strategy(k, 4), weights_strategy(k))),
        eta in 0.0f64..5.0,
        literal in any::<bool>(),
    ) {
        let variant = if literal { WeightUpdate::LiteralDiagonal } else { WeightUpdate::Matrix };
        let next = dynamic_weight_step(&gamma, &j1, &j2, eta, variant).unwrap();
        prop_assert!(on_simplex(next.as_slice()));
        let same = dynamic_weight_step(&gamma, &j1, &j2, 0.0, variant).unwrap();
        prop_assert_eq!(same, gamma);
    }

    #[test]
    fn equal_coordinates_are_a_fixed_point(c in -2.0f64..2.0, eta in 0.01f64..1.0) {
        // Every column has inner product 3c² with the column sum, so JᵀJγ ∝ (1, 1, 1).
        let j = GradientMatrix::from_columns(vec![vec![c, 1.0, 0.0], vec![c, 0.0, 1.0], vec![c, -1.0, -1.0]]).unwrap();
        let gamma = WeightVector::new(vec![1.0 / 3.0; 3]).unwrap();
        let next = dynamic_weight_step(&gamma, &j, &j, eta, WeightUpdate::Matrix).unwrap();
        for (a, b) in next.as_slice().iter().zip(gamma.as_slice()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn conflict_error_zero_and_permutation_invariant(
        (j, g, s) in (2usize..5).prop_flat_map(|k| (matrix_strategy(k, 3), weights_strategy(k), weights_strategy(k))),
        rot in 0usize..4,
    ) {
        prop_assert_eq!(conflict_error(&j, &g, &g).unwrap(), 0.0);
        let k = j.num_agents();
        let perm: Vec<usize> = (0..k).map(|i| (i + rot) % k).collect();
        let jp = GradientMatrix::from_columns(perm.iter().map(|&i| j.column(i).to_vec()).collect()).unwrap();
        let pick = |w: &WeightVector| WeightVector::new(perm.iter().map(|&i| w[i]).collect()).unwrap();
        let a = conflict_error(&j, &g, &s).unwrap();
        let b = conflict_error(&jp, &pick(&g), &pick(&s)).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        prop_assert_eq!(generalization_error(&j, &j, &g).unwrap(), 0.0);
    }

    #[test]
    fn min_norm_beats_every_vertex_and_the_centre(j in (1usize..6).prop_flat_map(|k| matrix_strategy(k, 5))) {
        let s = min_norm_weights(&j).unwrap();
        prop_assert!(on_simplex(s.weights.as_slice()));
        let norm = |w: &[f64]| j.combine(w).unwrap().iter().map(|x| x * x).sum::<f64>().sqrt();
        let k = j.num_agents();
        prop_assert!(s.value <= norm(&vec![1.0 / k as f64; k]) + 1e-9);
        for i in 0..k {
            prop_assert!(s.value <= norm(WeightVector::vertex(k, i).as_slice()) + 1e-9);
        }
        prop_assert!((s.value - norm(s.weights.as_slice())).abs() <= 1e-9);
    }

    #[test]
    fn bound_decreases_in_t_and_increases_in_beta(
        lf in 0.1f64..50.0, lfp in 0.1f64..10.0, eta in 1e-3f64..1.0, beta in 1e-4f64..1.0, t in 1u64..100_000,
    ) {
        let b = BoundInputs { lf, lfp, u: lf, d: 100, t, eta, beta };
        let base = c_error_bound(&b).unwrap();
        let longer = BoundInputs { t: 2 * t, ..b };
        let coarser = BoundInputs { beta: beta * 1.5, ..b };
        prop_assert!(c_error_bound(&longer).unwrap() < base);
        prop_assert!(c_error_bound(&coarser).unwrap() > base);
    }

    #[test]
    fn losses_are_even_and_vanish_at_target(p in -20.0f64..20.0, t in -20.0f64..20.0) {
        for kind in [LossKind::L1, LossKind::Mse, LossKind::LogCosh] {
            let (l, _) = loss_and_gradient(kind, p, t).unwrap();
            let (mirror, _) = loss_and_gradient(kind, t - (p - t), t).unwrap();
            prop_assert!(l >= 0.0);
            prop_assert!((l - mirror).abs() <= 1e-12 * l.max(1.0));
            prop_assert_eq!(loss_and_gradient(kind, t, t).unwrap().0, 0.0);
        }
    }
}

#[test]
fn log_cosh_is_below_abs_and_half_square() {
    for i in -10_000..=10_000 {
        let e = i as f64 / 1000.0;
        let (l, _) = loss_and_gradient(LossKind::LogCosh, e, 0.0).unwrap();
        assert!(l <= e.abs() + 1e-15 && l <= e * e / 2.0 + 1e-15, "e = {e}");
    }
}

fn single_agent_oracle() -> QuadraticOracle {
    let agent = QuadraticAgent::diagonal(&[0.8, 1.7, 0.4], vec![0.1, -0.4, 0.2]);
    QuadraticOracle::new(QuadraticTask::new(vec![agent], 10.0).unwrap(), 50, 0.5, 3).unwrap()
}

#[test]
fn single_agent_static_baseline_is_sgd() {
    let task = single_agent_oracle();
    let schedule = StepSchedule::decaying(0.5, 0.3);
    let cfg = RunConfig::new(schedule, 200, 8);
    let out = run_static_baseline(&task, &WeightVector::uniform(1), &cfg).unwrap();
    let mut omega: JointModel = task.initial_model(8);
    for t in 0..200 {
        let g = task.sample_gradient(0, &omega, SampleKey { seed: 8, agent: 0, iteration: t, slot: 3 }).unwrap();
        let next = omega.params().iter().zip(&g).map(|(w, d)| w - schedule.beta(t) * d).collect();
        omega = JointModel::new(next, omega.layout_arc().clone()).unwrap();
        task.confine(&mut omega);
        assert_eq!(out.trajectory[t as usize + 1].model.params(), omega.params());
    }
}

#[test]
fn runs_are_bit_reproducible() {
    let task = QuadraticOracle::conflicting(300, 0.2, 4).unwrap();
    for variant in [WeightUpdate::Matrix, WeightUpdate::LiteralDiagonal] {
        let cfg = RunConfig::new(StepSchedule::theory(0.5, 0.1, 400), 400, 21).with_variant(variant);
        let a = run_conflict_resolving(&task, &cfg).unwrap();
        let b = run_conflict_resolving(&task, &cfg).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.trajectory, b.trajectory);
        assert!(a.trajectory.iter().all(|s| on_simplex(s.gamma.as_slice())));
    }
}
