use super::linalg::{norm, sub};
use super::types::{GradientMatrix, WeightVector};
use crate::error::{Error, Result};

/// Conflict error `‖J (γ − γ*)‖`.
pub fn conflict_error(
    j: &GradientMatrix,
    gamma: &WeightVector,
    gamma_star: &WeightVector,
) -> Result<f64> {
    if gamma.len() != j.num_agents() || gamma_star.len() != j.num_agents() {
        return Err(Error::invalid(format!(
            "weights of length {} / {} for {} agents",
            gamma.len(),
            gamma_star.len(),
            j.num_agents()
        )));
    }
    let diff = sub(gamma.as_slice(), gamma_star.as_slice());
    Ok(norm(&j.combine(&diff)?))
}

/// One agent's generalization error: `‖g_train − g_pop‖`.
pub fn per_agent_g_error(g_train: &[f64], g_pop: &[f64]) -> Result<f64> {
    if g_train.len() != g_pop.len() {
        return Err(Error::invalid(format!(
            "gradient dimensions differ: {} vs {}",
            g_train.len(),
            g_pop.len()
        )));
    }
    Ok(norm(&sub(g_train, g_pop)))
}

/// Weighted generalization error `‖(J_train − J_pop) γ‖`.
pub fn generalization_error(
    j_train: &GradientMatrix,
    j_pop: &GradientMatrix,
    gamma: &WeightVector,
) -> Result<f64> {
    j_train.check_same_shape(j_pop)?;
    let a = j_train.combine(gamma.as_slice())?;
    let b = j_pop.combine(gamma.as_slice())?;
    Ok(norm(&sub(&a, &b)))
}
