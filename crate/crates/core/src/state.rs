//! Post-measurement, conditional and coarse-grained states.

use serde::{Deserialize, Serialize};

use crate::coarse::{alpha_oe, outcomes, CoarseGraining};
use crate::divergence::{check_alpha, near_one, petz_renyi, renyi_entropy};
use crate::error::{Error, Result};
use crate::operator::{max_abs_diff, sqrt_psd, CMatrix, DensityOperator, Operator};

/// Outcomes with probability at or below this are left out of ensembles.
pub const MIN_CONDITIONAL_PROBABILITY: f64 = 1e-14;
/// Threshold for both equality tests of [`is_coarse_grained`].
pub const EQUALITY_TOL: f64 = 1e-8;

fn check_dim(cg: &CoarseGraining, rho: &DensityOperator) -> Result<()> {
    if cg.dim() == rho.dim() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: cg.dim(),
            found: rho.dim(),
        })
    }
}

/// `K_i ρ K_i†` with `K_i = √Π_i` (or `Π_i` itself when projective).
fn luders_terms(cg: &CoarseGraining, rho: &DensityOperator) -> Vec<CMatrix> {
    cg.effects()
        .iter()
        .map(|e| {
            let k = if cg.is_projective() {
                e.matrix().clone()
            } else {
                sqrt_psd(e.matrix())
            };
            &k * rho.matrix() * &k
        })
        .collect()
}

/// `ρ′ = Σ_i √Π_i ρ √Π_i`.
pub fn post_measurement_state(cg: &CoarseGraining, rho: &DensityOperator) -> Result<DensityOperator> {
    check_dim(cg, rho)?;
    let sum = luders_terms(cg, rho)
        .into_iter()
        .fold(CMatrix::zeros(cg.dim(), cg.dim()), |acc, t| acc + t);
    Ok(DensityOperator::from_trusted(sum))
}

/// One outcome of a [`ConditionalEnsemble`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalEntry {
    pub label: String,
    pub probability: f64,
    /// `ρ_i = √Π_i ρ √Π_i / p_i`.
    pub state: DensityOperator,
    /// `ω_i = Π_i / V_i`.
    pub reference: DensityOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalEnsemble {
    pub entries: Vec<ConditionalEntry>,
}

/// Conditional states and normalized effects for every outcome with
/// `p_i > 1e-14`.
pub fn conditional_ensemble(cg: &CoarseGraining, rho: &DensityOperator) -> Result<ConditionalEnsemble> {
    check_dim(cg, rho)?;
    let out = outcomes(cg, rho)?;
    let entries = luders_terms(cg, rho)
        .into_iter()
        .zip(cg.effects())
        .enumerate()
        .filter(|(i, _)| out.probabilities()[*i] > MIN_CONDITIONAL_PROBABILITY)
        .map(|(i, (term, effect))| {
            let p = out.probabilities()[i];
            let v = out.volumes()[i];
            ConditionalEntry {
                label: cg.labels()[i].clone(),
                probability: p,
                state: DensityOperator::from_trusted(term.unscale(p)),
                reference: DensityOperator::from_trusted(effect.matrix().unscale(v)),
            }
        })
        .collect();
    Ok(ConditionalEnsemble { entries })
}

/// The decomposition `−(1/(α−1)) ln Σ p_i^α + Σ p_i S^α(ρ_i)`, offered as
/// an expression for `S^α(ρ′)`.
///
/// This coincides with `S^α(ρ′)` at α = 1 and whenever all `Tr ρ_i^α` are
/// equal (e.g. rank-1 projective χ); in general it does not.
pub fn renyi_post_measurement(cg: &CoarseGraining, rho: &DensityOperator, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let ens = conditional_ensemble(cg, rho)?;
    let mut mixing = Vec::with_capacity(ens.entries.len());
    let mut inner = 0.0;
    for e in &ens.entries {
        mixing.push(e.probability);
        inner += e.probability * renyi_entropy(&e.state, alpha)?;
    }
    Ok(crate::divergence::classical_renyi_entropy(&mixing, alpha)? + inner)
}

/// `(S^α(ρ′), Σ_i p_i D_α(ρ_i ‖ ω_i))` for projective χ.
pub fn decompose_alpha_oe(cg: &CoarseGraining, rho: &DensityOperator, alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    check_dim(cg, rho)?;
    if !cg.is_projective() {
        let residual = cg
            .effects()
            .iter()
            .map(|e| max_abs_diff(&(e.matrix() * e.matrix()), e.matrix()))
            .fold(0.0, f64::max);
        return Err(Error::NonProjectiveCoarseGraining { residual });
    }
    let post = renyi_entropy(&post_measurement_state(cg, rho)?, alpha)?;
    let mut div = 0.0;
    for e in conditional_ensemble(cg, rho)?.entries {
        div += e.probability * petz_renyi(&e.state, &e.reference, alpha)?.value();
    }
    Ok((post, div))
}

/// `ρ_cg = Σ_i (p_i/V_i) Π_i`.
pub fn coarse_grained_state(cg: &CoarseGraining, rho: &DensityOperator) -> Result<DensityOperator> {
    check_dim(cg, rho)?;
    let out = outcomes(cg, rho)?;
    let m = cg
        .effects()
        .iter()
        .zip(out.probabilities().iter().zip(out.volumes()))
        .fold(CMatrix::zeros(cg.dim(), cg.dim()), |acc, (e, (&p, &v))| {
            acc + e.matrix().scale(p / v)
        });
    Ok(DensityOperator::from_trusted(m))
}

/// Both sides of the equality criterion `S^α_χ(ρ) = S^α(ρ) ⇔ ρ = ρ_cg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoarseGrainedReport {
    /// `‖ρ − ρ_cg‖_max`.
    pub state_distance: f64,
    pub state_test: bool,
    /// `S^α_χ(ρ) − S^α(ρ)`.
    pub entropy_gap: f64,
    pub entropy_test: bool,
    pub agree: bool,
}

pub fn is_coarse_grained(cg: &CoarseGraining, rho: &DensityOperator, alpha: f64) -> Result<CoarseGrainedReport> {
    check_alpha(alpha)?;
    let rho_cg = coarse_grained_state(cg, rho)?;
    let state_distance = max_abs_diff(rho.matrix(), rho_cg.matrix());
    let alpha = if near_one(alpha) { 1.0 } else { alpha };
    let entropy_gap = alpha_oe(cg, rho, alpha)? - renyi_entropy(rho, alpha)?;
    let state_test = state_distance <= EQUALITY_TOL;
    let entropy_test = entropy_gap.abs() <= EQUALITY_TOL;
    Ok(CoarseGrainedReport {
        state_distance,
        state_test,
        entropy_gap,
        entropy_test,
        agree: state_test == entropy_test,
    })
}
