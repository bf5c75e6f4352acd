//! The three per-sample losses and the shared-backbone predictor.
use xlayer::moo_core::JointModel;
use xlayer::objectives::{finite_difference_check, loss_and_gradient, LossKind, PredictorModel, SampleBatch};

fn main() -> xlayer::Result<()> {
    for kind in [LossKind::L1, LossKind::Mse, LossKind::LogCosh] {
        let row: Vec<String> = [-2.0, -0.5, 0.0, 0.5, 2.0]
            .iter()
            .map(|&e| {
                let (l, g) = loss_and_gradient(kind, e, 0.0).unwrap();
                format!("{l:.3}/{g:+.3}")
            })
            .collect();
        println!("{kind:<8?} loss/grad at e = -2, -0.5, 0, 0.5, 2: {}", row.join("  "));
    }

    let model = PredictorModel::new(8, 4, &["aAgent", "pAgent", "nAgent"])?;
    let omega = JointModel::seeded_gaussian(model.layout(), 3, 0.5);
    let batch = SampleBatch::new(vec![vec![0.2; 8], vec![-0.4; 8]], vec![1.0, 0.3], 1, 0)?;
    let grad = model.agent_loss_gradient(&omega, &batch, LossKind::LogCosh)?;
    let layout = model.layout();
    let err = finite_difference_check(
        |p| model.agent_loss(&JointModel::new(p.to_vec(), layout.clone())?, &batch, LossKind::LogCosh),
        &grad,
        omega.params(),
        1e-6,
    )?;
    println!("{} parameters, finite-difference relative error {err:.2e}", model.dim());
    Ok(())
}
