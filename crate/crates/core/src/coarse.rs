//! Coarse-grainings (finite POVMs), the quantum-to-classical channel, and
//! observational entropy of order α.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::divergence::{check_alpha, classical_petz_renyi, kl_divergence, near_one, petz_renyi, Divergence};
use crate::error::{Error, Result};
use crate::operator::{
    identity, max_abs_diff, sqrt_psd, tensor, trace_product_re, trace_re, CMatrix, DensityOperator, Operator, Positive,
    PsdOperator,
};
use crate::tolerance::Tolerances;

/// Residual below which an effect counts as a projector.
const PROJECTIVE_TOL: f64 = 1e-8;
/// Row-sum tolerance for stochastic refinement maps.
const STOCHASTIC_TOL: f64 = 1e-10;
/// Residual tolerance of `Π′_j = Σ_i m_{j|i} Π_i`.
pub const REFINEMENT_TOL: f64 = 1e-8;
/// Outcome probabilities at or below this fraction of the largest one are
/// treated as exact zeros.
pub const PROBABILITY_SNAP: f64 = 1e-12;

/// A finite POVM `{Π_i}` with labelled outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGraining {
    dim: usize,
    labels: Vec<String>,
    effects: Vec<PsdOperator>,
    projective: bool,
}

impl CoarseGraining {
    pub fn new(labels: Vec<String>, effects: Vec<CMatrix>) -> Result<Self> {
        Self::with_tolerances(labels, effects, &Tolerances::default())
    }

    /// Validates every effect as PSD and `Σ Π_i = I`; effects with trace below
    /// `tol.zero_effect` are dropped.
    pub fn with_tolerances(labels: Vec<String>, effects: Vec<CMatrix>, tol: &Tolerances) -> Result<Self> {
        if labels.len() != effects.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} labels for {} effects",
                labels.len(),
                effects.len()
            )));
        }
        let Some(first) = effects.first() else {
            return Err(Error::EmptyCoarseGraining);
        };
        let dim = first.nrows();
        let mut seen = HashMap::new();
        let mut kept_labels = Vec::with_capacity(labels.len());
        let mut kept = Vec::with_capacity(effects.len());
        let mut sum = CMatrix::zeros(dim, dim);
        for (label, m) in labels.into_iter().zip(effects) {
            if m.nrows() != dim || m.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: m.nrows().max(m.ncols()),
                });
            }
            if seen.insert(label.clone(), ()).is_some() {
                return Err(Error::ShapeMismatch(format!("duplicate label {label:?}")));
            }
            let effect = PsdOperator::with_tolerances(m, tol)?;
            sum += effect.matrix();
            if effect.trace() >= tol.zero_effect {
                kept_labels.push(label);
                kept.push(effect);
            }
        }
        let residual = max_abs_diff(&sum, &identity(dim));
        if residual > tol.povm_sum {
            return Err(Error::NotAPovm { residual });
        }
        if kept.is_empty() {
            return Err(Error::EmptyCoarseGraining);
        }
        Ok(Self::assemble(dim, kept_labels, kept))
    }

    fn assemble(dim: usize, labels: Vec<String>, effects: Vec<PsdOperator>) -> Self {
        let projective = effects
            .iter()
            .all(|e| max_abs_diff(&(e.matrix() * e.matrix()), e.matrix()) <= PROJECTIVE_TOL);
        Self {
            dim,
            labels,
            effects,
            projective,
        }
    }

    /// Builds from effects known to form a POVM, dropping zero-trace ones.
    pub(crate) fn from_trusted(dim: usize, labels: Vec<String>, effects: Vec<CMatrix>) -> Self {
        let zero = Tolerances::default().zero_effect;
        let (labels, effects): (Vec<_>, Vec<_>) = labels
            .into_iter()
            .zip(effects)
            .map(|(l, m)| (l, PsdOperator::from_trusted(m)))
            .filter(|(_, e)| e.trace() >= zero)
            .unzip();
        Self::assemble(dim, labels, effects)
    }

    /// The single-outcome coarse-graining `{I}`.
    pub fn trivial(dim: usize) -> Self {
        Self::assemble(dim, vec!["I".into()], vec![PsdOperator::from_trusted(identity(dim))])
    }

    /// Rank-1 projectors onto `|0⟩, …, |d−1⟩`, labelled by index.
    pub fn computational_basis(dim: usize) -> Self {
        let effects = (0..dim)
            .map(|k| {
                let mut m = CMatrix::zeros(dim, dim);
                m[(k, k)] = 1.0.into();
                PsdOperator::from_trusted(m)
            })
            .collect();
        Self::assemble(dim, (0..dim).map(|k| k.to_string()).collect(), effects)
    }

    /// Rank-1 projectors onto the columns of `basis`, which must be unitary.
    pub fn from_basis(basis: &CMatrix) -> Result<Self> {
        let dim = basis.nrows();
        let labels = (0..basis.ncols()).map(|k| k.to_string()).collect();
        let effects = basis.column_iter().map(|c| c * c.adjoint()).collect();
        let cg = Self::new(labels, effects)?;
        cg.check_dim(dim)?;
        Ok(cg)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn effects(&self) -> &[PsdOperator] {
        &self.effects
    }

    /// True when every effect is a projector (within 1e-8).
    pub fn is_projective(&self) -> bool {
        self.projective
    }

    /// `V_i = Tr Π_i`.
    pub fn volumes(&self) -> Vec<f64> {
        self.effects.iter().map(PsdOperator::trace).collect()
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim == self.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                found: dim,
            })
        }
    }
}

/// Outcome probabilities `p_i` paired with volumes `V_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    labels: Vec<String>,
    probabilities: Vec<f64>,
    volumes: Vec<f64>,
}

impl OutcomeDistribution {
    /// Validates `Σ p = 1` (1e-9), `p ≥ −1e-12` and `V > 0`. Tiny negatives
    /// and probabilities below `1e-12·max p` become exact zeros.
    pub fn new(labels: Vec<String>, probabilities: Vec<f64>, volumes: Vec<f64>) -> Result<Self> {
        if labels.len() != probabilities.len() || labels.len() != volumes.len() {
            return Err(Error::LengthMismatch {
                left: probabilities.len(),
                right: volumes.len(),
            });
        }
        for (index, &value) in probabilities.iter().enumerate() {
            if !value.is_finite() || value < -1e-12 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        for (index, &value) in volumes.iter().enumerate() {
            if !value.is_finite() || value <= 0.0 {
                return Err(Error::NegativeWeight { index, value });
            }
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self {
            labels,
            probabilities: snap(probabilities),
            volumes,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// `−Σ p_i ln(p_i/V_i)`.
    pub fn entropy(&self) -> f64 {
        classical_oe(&self.probabilities, &self.volumes)
    }

    /// `−(1/(α−1)) ln Σ p_i^α V_i^{1−α}`, or [`Self::entropy`] near α = 1.
    pub fn alpha_entropy(&self, alpha: f64) -> Result<f64> {
        classical_alpha_oe(&self.probabilities, &self.volumes, alpha)
    }
}

fn snap(mut p: Vec<f64>) -> Vec<f64> {
    let max = p.iter().cloned().fold(0.0, f64::max);
    for x in &mut p {
        if *x <= PROBABILITY_SNAP * max {
            *x = 0.0;
        }
    }
    p
}

pub(crate) fn classical_oe(p: &[f64], v: &[f64]) -> f64 {
    -p.iter()
        .zip(v)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &vi)| pi * (pi / vi).ln())
        .sum::<f64>()
}

pub(crate) fn classical_alpha_oe(p: &[f64], v: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if near_one(alpha) {
        return Ok(classical_oe(p, v));
    }
    let z: f64 = p
        .iter()
        .zip(v)
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &vi)| pi.powf(alpha) * vi.powf(1.0 - alpha))
        .sum();
    Ok(-z.ln() / (alpha - 1.0))
}

/// Labelled non-negative weights: the image `ε(X)` of the measurement channel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub labels: Vec<String>,
    pub weights: Vec<f64>,
}

impl ClassicalState {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// `p_i = Tr(Π_i ρ)`, `V_i = Tr Π_i`.
pub fn outcomes(cg: &CoarseGraining, rho: &DensityOperator) -> Result<OutcomeDistribution> {
    cg.check_dim(rho.dim())?;
    let p = cg
        .effects
        .iter()
        .map(|e| trace_product_re(e.matrix(), rho.matrix()).max(0.0))
        .collect();
    Ok(OutcomeDistribution {
        labels: cg.labels.clone(),
        probabilities: snap(p),
        volumes: cg.volumes(),
    })
}

/// `ε(X) = Σ_i Tr(Π_i X) |i⟩⟨i|`, returned as labelled weights.
pub fn measurement_channel<O: Positive>(cg: &CoarseGraining, x: &O) -> Result<ClassicalState> {
    cg.check_dim(x.dim())?;
    Ok(ClassicalState {
        labels: cg.labels.clone(),
        weights: cg
            .effects
            .iter()
            .map(|e| trace_product_re(e.matrix(), x.matrix()).max(0.0))
            .collect(),
    })
}

/// Observational entropy `−Σ p_i ln(p_i/V_i)`.
pub fn observational_entropy(cg: &CoarseGraining, rho: &DensityOperator) -> Result<f64> {
    Ok(outcomes(cg, rho)?.entropy())
}

/// Observational entropy of order α.
pub fn alpha_oe(cg: &CoarseGraining, rho: &DensityOperator, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    outcomes(cg, rho)?.alpha_entropy(alpha)
}

/// `ln d − D_α(ε(ρ) ‖ ε(I/d))`, an independent route to [`alpha_oe`].
pub fn alpha_oe_divergence_form(cg: &CoarseGraining, rho: &DensityOperator, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let d = cg.dim as f64;
    let p = measurement_channel(cg, rho)?.weights;
    let q: Vec<f64> = measurement_channel(cg, &DensityOperator::maximally_mixed(cg.dim))?.weights;
    let div = classical_petz_renyi(&snap(p), &q, alpha)?;
    Ok(d.ln() - div.value())
}

/// `D_α(ρ ‖ I/d) − D_α(ε(ρ) ‖ ε(I/d))`, which equals `S^α_χ(ρ) − S^α(ρ)`.
pub fn alpha_oe_gap(cg: &CoarseGraining, rho: &DensityOperator, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let mixed = DensityOperator::maximally_mixed(cg.dim);
    cg.check_dim(rho.dim())?;
    let quantum = petz_renyi(rho, &mixed, alpha)?;
    let p = outcomes(cg, rho)?;
    let q = measurement_channel(cg, &mixed)?.weights;
    let classical = classical_petz_renyi(p.probabilities(), &q, alpha)?;
    Ok(quantum.value() - classical.value())
}

/// `∂S^α_χ/∂α = −D(x‖p)/(α−1)²` with `x_i ∝ t_i^α V_i`, `t_i = p_i/V_i`.
pub fn alpha_derivative(cg: &CoarseGraining, rho: &DensityOperator, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if near_one(alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let out = outcomes(cg, rho)?;
    let (p, v) = (out.probabilities(), out.volumes());
    let w: Vec<f64> = p
        .iter()
        .zip(v)
        .map(|(&pi, &vi)| if pi > 0.0 { (pi / vi).powf(alpha) * vi } else { 0.0 })
        .collect();
    let z: f64 = w.iter().sum();
    let x: Vec<f64> = w.iter().map(|wi| wi / z).collect();
    let d = kl_divergence(&x, p)?.value();
    Ok(-d / (alpha - 1.0).powi(2))
}

/// Tensor product `χ₁ ⊗ χ₂ ⊗ …`; labels are tuples `(a,b,…)`.
pub fn tensor_cg(parts: &[CoarseGraining]) -> Result<CoarseGraining> {
    let Some(first) = parts.first() else {
        return Err(Error::EmptyCoarseGraining);
    };
    if parts.len() == 1 {
        return Ok(first.clone());
    }
    let mut labels: Vec<Vec<&str>> = first.labels.iter().map(|l| vec![l.as_str()]).collect();
    let mut effects: Vec<CMatrix> = first.effects.iter().map(|e| e.matrix().clone()).collect();
    let mut dim = first.dim;
    for part in &parts[1..] {
        let mut nl = Vec::with_capacity(labels.len() * part.len());
        let mut ne = Vec::with_capacity(labels.len() * part.len());
        for (l, m) in labels.iter().zip(&effects) {
            for (pl, pe) in part.labels.iter().zip(&part.effects) {
                let mut lab = l.clone();
                lab.push(pl);
                nl.push(lab);
                ne.push(tensor(m, pe.matrix()));
            }
        }
        labels = nl;
        effects = ne;
        dim *= part.dim;
    }
    let labels = labels.iter().map(|l| format!("({})", l.join(","))).collect();
    Ok(CoarseGraining::from_trusted(dim, labels, effects))
}

/// Sequential coarse-graining: `χ₁` then `χ₂`, with Lüders effects
/// `√Π_i Π_j √Π_i` labelled `(i,j)`.
pub fn sequential(first: &CoarseGraining, second: &CoarseGraining) -> Result<CoarseGraining> {
    first.check_dim(second.dim)?;
    let mut labels = Vec::with_capacity(first.len() * second.len());
    let mut effects = Vec::with_capacity(first.len() * second.len());
    for (li, ei) in first.labels.iter().zip(&first.effects) {
        let root = if first.projective {
            ei.matrix().clone()
        } else {
            sqrt_psd(ei.matrix())
        };
        for (lj, ej) in second.labels.iter().zip(&second.effects) {
            labels.push(format!("({li},{lj})"));
            effects.push(&root * ej.matrix() * &root);
        }
    }
    Ok(CoarseGraining::from_trusted(first.dim, labels, effects))
}

/// Row-stochastic matrix `m_{j|i}`: rows index the finer outcomes, columns the
/// coarser ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementMap {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl RefinementMap {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || cols == 0 {
            return Err(Error::NotARefinement {
                residual: f64::INFINITY,
                reason: "empty map".into(),
            });
        }
        let mut entries = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::ShapeMismatch(format!(
                    "row {i} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            if let Some(&bad) = row.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
                return Err(Error::NotARefinement {
                    residual: bad.abs(),
                    reason: format!("row {i} has entry {bad}"),
                });
            }
            let residual = (row.iter().sum::<f64>() - 1.0).abs();
            if residual > STOCHASTIC_TOL {
                return Err(Error::NotARefinement {
                    residual,
                    reason: format!("row {i} does not sum to 1"),
                });
            }
            entries.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            entries,
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// `m_{j|i}`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.cols).map(<[f64]>::to_vec).collect()
    }
}

/// Outcome of [`check_refinement`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementCheck {
    pub holds: bool,
    pub max_residual: f64,
}

/// Tests `Π′_j = Σ_i m_{j|i} Π_i` for every coarse outcome `j`.
pub fn check_refinement(fine: &CoarseGraining, coarse: &CoarseGraining, m: &RefinementMap) -> Result<RefinementCheck> {
    fine.check_dim(coarse.dim)?;
    if m.rows != fine.len() || m.cols != coarse.len() {
        return Err(Error::ShapeMismatch(format!(
            "map is {}x{}, coarse-grainings have {} and {} outcomes",
            m.rows,
            m.cols,
            fine.len(),
            coarse.len()
        )));
    }
    let mut max_residual: f64 = 0.0;
    for (j, target) in coarse.effects.iter().enumerate() {
        let mut acc = CMatrix::zeros(fine.dim, fine.dim);
        for (i, e) in fine.effects.iter().enumerate() {
            let w = m.get(i, j);
            if w != 0.0 {
                acc += e.matrix() * nalgebra::Complex::new(w, 0.0);
            }
        }
        max_residual = max_residual.max(max_abs_diff(&acc, target.matrix()));
    }
    Ok(RefinementCheck {
        holds: max_residual <= REFINEMENT_TOL,
        max_residual,
    })
}

/// Merges outcome groups given by label. Each label must appear in exactly
/// one group. Merged labels are joined with `+`.
pub fn merge_outcomes(cg: &CoarseGraining, partition: &[Vec<String>]) -> Result<(CoarseGraining, RefinementMap)> {
    let groups = partition
        .iter()
        .map(|g| {
            g.iter()
                .map(|l| {
                    cg.index_of(l)
                        .ok_or_else(|| Error::InvalidPartition(format!("unknown label {l:?}")))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    merge_indices(cg, &groups)
}

/// As [`merge_outcomes`] with groups of outcome indices.
pub fn merge_indices(cg: &CoarseGraining, groups: &[Vec<usize>]) -> Result<(CoarseGraining, RefinementMap)> {
    let n = cg.len();
    let mut owner = vec![None; n];
    for (g, group) in groups.iter().enumerate() {
        if group.is_empty() {
            return Err(Error::InvalidPartition(format!("group {g} is empty")));
        }
        for &i in group {
            if i >= n {
                return Err(Error::InvalidPartition(format!("outcome {i} out of range")));
            }
            if owner[i].replace(g).is_some() {
                return Err(Error::InvalidPartition(format!(
                    "outcome {:?} appears twice",
                    cg.labels[i]
                )));
            }
        }
    }
    if let Some(i) = owner.iter().position(Option::is_none) {
        return Err(Error::InvalidPartition(format!(
            "outcome {:?} not covered",
            cg.labels[i]
        )));
    }
    let labels = groups
        .iter()
        .map(|g| g.iter().map(|&i| cg.labels[i].as_str()).collect::<Vec<_>>().join("+"))
        .collect();
    let effects = groups
        .iter()
        .map(|g| {
            g.iter()
                .fold(CMatrix::zeros(cg.dim, cg.dim), |acc, &i| acc + cg.effects[i].matrix())
        })
        .collect();
    let k = groups.len();
    let mut entries = vec![0.0; n * k];
    for (i, g) in owner.iter().enumerate() {
        entries[i * k + g.unwrap_or_default()] = 1.0;
    }
    let coarse = CoarseGraining::from_trusted(cg.dim, labels, effects);
    Ok((
        coarse,
        RefinementMap {
            rows: n,
            cols: k,
            entries,
        },
    ))
}

/// The coarse-graining `Π′_j = Σ_i m_{j|i} Π_i` induced by a stochastic map.
/// Columns that produce a zero effect are removed from the returned map.
pub fn coarsen(cg: &CoarseGraining, m: &RefinementMap) -> Result<(CoarseGraining, RefinementMap)> {
    if m.rows != cg.len() {
        return Err(Error::ShapeMismatch(format!(
            "map has {} rows for {} outcomes",
            m.rows,
            cg.len()
        )));
    }
    let zero = Tolerances::default().zero_effect;
    let mut labels = Vec::new();
    let mut effects = Vec::new();
    let mut keep = Vec::new();
    for j in 0..m.cols {
        let e = cg
            .effects
            .iter()
            .enumerate()
            .fold(CMatrix::zeros(cg.dim, cg.dim), |acc, (i, e)| {
                acc + e.matrix() * nalgebra::Complex::new(m.get(i, j), 0.0)
            });
        if trace_re(&e) >= zero {
            labels.push(format!("c{j}"));
            effects.push(e);
            keep.push(j);
        }
    }
    let cols = keep.len();
    let mut entries = Vec::with_capacity(m.rows * cols);
    for i in 0..m.rows {
        let row: Vec<f64> = keep.iter().map(|&j| m.get(i, j)).collect();
        let s: f64 = row.iter().sum();
        entries.extend(row.into_iter().map(|x| x / s));
    }
    Ok((
        CoarseGraining::from_trusted(cg.dim, labels, effects),
        RefinementMap {
            rows: m.rows,
            cols,
            entries,
        },
    ))
}

/// `D_α(P‖Q)` with `P_i = p_i` and
/// `Q_i = (Σ_j m_{j|i} (V_i p′_j / V′_j)^α)^{1/α}`, for α > 1.
pub fn refinement_gap_bound(
    fine: &CoarseGraining,
    coarse: &CoarseGraining,
    m: &RefinementMap,
    rho: &DensityOperator,
    alpha: f64,
) -> Result<Divergence> {
    check_alpha(alpha)?;
    if alpha <= 1.0 || near_one(alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let check = check_refinement(fine, coarse, m)?;
    if !check.holds {
        return Err(Error::NotARefinement {
            residual: check.max_residual,
            reason: "coarse effects are not the image of the fine ones".into(),
        });
    }
    let pf = outcomes(fine, rho)?;
    let pc = outcomes(coarse, rho)?;
    let q: Vec<f64> = (0..fine.len())
        .map(|i| {
            let vi = pf.volumes()[i];
            (0..coarse.len())
                .map(|j| m.get(i, j) * (vi * pc.probabilities()[j] / pc.volumes()[j]).powf(alpha))
                .sum::<f64>()
                .powf(1.0 / alpha)
        })
        .collect();
    classical_petz_renyi(pf.probabilities(), &q, alpha)
}
