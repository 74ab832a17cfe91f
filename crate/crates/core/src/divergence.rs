//! Classical and quantum entropies and divergences, in nats.
//!
//! Quantum divergences are evaluated from the two eigen-decompositions and the
//! overlap matrix `O_ij = |⟨u_i|v_j⟩|²`, e.g.
//! `Tr(ρ^α σ^{1−α}) = Σ_ij r_i^α s_j^{1−α} O_ij`. Support inclusion is decided
//! on the same data: the weight `Σ r_i O_ij` that `ρ` places on the kernel of
//! `σ` must not exceed [`SUPPORT_LEAK`].

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{eigh, partial_trace, DensityOperator, Operator, Subsystem};
use crate::tolerance::Tolerances;
use crate::ALPHA_ONE_WINDOW;

/// Largest weight of `ρ` on `ker σ` still treated as `supp ρ ⊆ supp σ`.
pub const SUPPORT_LEAK: f64 = 1e-10;

/// A divergence value in nats; `Infinite` is a regular outcome, not an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    /// The value as an `f64`, `+∞` for [`Divergence::Infinite`].
    pub fn value(self) -> f64 {
        match self {
            Divergence::Finite(v) => v,
            Divergence::Infinite => f64::INFINITY,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Divergence::Infinite)
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Divergence::Finite(v) => Some(v),
            Divergence::Infinite => None,
        }
    }
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Divergence::Finite(v) => write!(f, "{v}"),
            Divergence::Infinite => f.write_str("INFINITE"),
        }
    }
}

/// Non-negative weights; `normalized` records that they sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    weights: Vec<f64>,
    normalized: bool,
}

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        Ok(Self {
            weights,
            normalized: false,
        })
    }

    /// As [`WeightVector::new`], additionally requiring `|Σ w − 1| ≤ 1e-10`.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights)?;
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self {
            weights,
            normalized: true,
        })
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }
}

impl Deref for WeightVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.weights
    }
}

fn check_weights(w: &[f64]) -> Result<()> {
    for (index, &value) in w.iter().enumerate() {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::NegativeWeight { index, value });
        }
    }
    Ok(())
}

fn check_pair(x: &[f64], p: &[f64]) -> Result<()> {
    if x.len() != p.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: p.len(),
        });
    }
    check_weights(x)?;
    check_weights(p)
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidAlpha(alpha))
    }
}

#[inline]
pub(crate) fn near_one(alpha: f64) -> bool {
    (alpha - 1.0).abs() < ALPHA_ONE_WINDOW
}

/// `Σ x_i ln(x_i/p_i)` with `0 ln(0/q) = 0`; infinite when some `x_i > 0`
/// meets `p_i = 0`.
pub fn kl_divergence(x: &[f64], p: &[f64]) -> Result<Divergence> {
    check_pair(x, p)?;
    let mut acc = 0.0;
    for (&xi, &pi) in x.iter().zip(p) {
        if xi == 0.0 {
            continue;
        }
        if pi == 0.0 {
            return Ok(Divergence::Infinite);
        }
        acc += xi * (xi / pi).ln();
    }
    Ok(Divergence::Finite(acc))
}

/// Petz-Rényi divergence of two non-negative (possibly unnormalized) vectors,
/// `(1/(α−1)) ln Σ p_i^α q_i^{1−α}`. Near α = 1 it is the KL form.
pub fn classical_petz_renyi(p: &[f64], q: &[f64], alpha: f64) -> Result<Divergence> {
    check_pair(p, q)?;
    check_alpha(alpha)?;
    if near_one(alpha) {
        return kl_divergence(p, q);
    }
    let mut sum = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            if alpha > 1.0 {
                return Ok(Divergence::Infinite);
            }
            continue;
        }
        sum += pi.powf(alpha) * qi.powf(1.0 - alpha);
    }
    if sum <= 0.0 {
        return Ok(Divergence::Infinite);
    }
    Ok(Divergence::Finite(sum.ln() / (alpha - 1.0)))
}

/// `−Σ p ln p` over positive entries.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// Classical Rényi entropy `ln(Σ p^α)/(1−α)`; Shannon near α = 1.
pub fn classical_renyi_entropy(p: &[f64], alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if near_one(alpha) {
        return Ok(shannon_entropy(p));
    }
    let s: f64 = p.iter().filter(|&&x| x > 0.0).map(|&x| x.powf(alpha)).sum();
    Ok(s.ln() / (1.0 - alpha))
}

/// Eigenvalues inside the support (smaller ones are dropped).
pub(crate) fn support_spectrum(rho: &DensityOperator) -> Vec<f64> {
    let e = eigh(rho.matrix());
    let cut = e.support_cutoff(Tolerances::default().support);
    e.values.into_iter().filter(|&l| l > cut).collect()
}

/// `−Tr ρ ln ρ`.
pub fn von_neumann(rho: &DensityOperator) -> f64 {
    shannon_entropy(&support_spectrum(rho))
}

/// `ln(Tr ρ^α)/(1−α)`; evaluated as the von Neumann entropy when
/// `|α − 1| < 1e-6`.
pub fn renyi_entropy(rho: &DensityOperator, alpha: f64) -> Result<f64> {
    classical_renyi_entropy(&support_spectrum(rho), alpha)
}

struct SpectralPair {
    r: Vec<f64>,
    s: Vec<f64>,
    overlap: Vec<Vec<f64>>,
    leak: f64,
}

fn spectral_pair(rho: &DensityOperator, sigma: &DensityOperator) -> Result<SpectralPair> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let support = Tolerances::default().support;
    let er = eigh(rho.matrix());
    let es = eigh(sigma.matrix());
    let (cr, cs) = (er.support_cutoff(support), es.support_cutoff(support));
    let r: Vec<f64> = er.values.iter().map(|&l| if l > cr { l } else { 0.0 }).collect();
    let s: Vec<f64> = es.values.iter().map(|&l| if l > cs { l } else { 0.0 }).collect();
    let w = er.vectors.adjoint() * &es.vectors;
    let n = r.len();
    let overlap: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| w[(i, j)].norm_sqr()).collect()).collect();
    let mut leak = 0.0;
    for i in 0..n {
        if r[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if s[j] == 0.0 {
                leak += r[i] * overlap[i][j];
            }
        }
    }
    Ok(SpectralPair { r, s, overlap, leak })
}

/// Umegaki relative entropy `Tr ρ(ln ρ − ln σ)`; infinite unless
/// `supp ρ ⊆ supp σ`.
pub fn umegaki(rho: &DensityOperator, sigma: &DensityOperator) -> Result<Divergence> {
    let sp = spectral_pair(rho, sigma)?;
    if sp.leak > SUPPORT_LEAK {
        return Ok(Divergence::Infinite);
    }
    let mut acc = 0.0;
    for (i, &ri) in sp.r.iter().enumerate() {
        if ri == 0.0 {
            continue;
        }
        acc += ri * ri.ln();
        for (j, &sj) in sp.s.iter().enumerate() {
            if sj > 0.0 {
                acc -= ri * sp.overlap[i][j] * sj.ln();
            }
        }
    }
    Ok(Divergence::Finite(acc))
}

/// Petz-Rényi divergence `(1/(α−1)) ln Tr(ρ^α σ^{1−α})`.
///
/// Infinite for α > 1 when `supp ρ ⊄ supp σ`, and for α < 1 when the supports
/// are orthogonal. `|α − 1| < 1e-6` delegates to [`umegaki`].
pub fn petz_renyi(rho: &DensityOperator, sigma: &DensityOperator, alpha: f64) -> Result<Divergence> {
    check_alpha(alpha)?;
    if near_one(alpha) {
        return umegaki(rho, sigma);
    }
    let sp = spectral_pair(rho, sigma)?;
    if alpha > 1.0 && sp.leak > SUPPORT_LEAK {
        return Ok(Divergence::Infinite);
    }
    let mut q = 0.0;
    for (i, &ri) in sp.r.iter().enumerate() {
        if ri == 0.0 {
            continue;
        }
        let ra = ri.powf(alpha);
        for (j, &sj) in sp.s.iter().enumerate() {
            if sj > 0.0 {
                q += ra * sj.powf(1.0 - alpha) * sp.overlap[i][j];
            }
        }
    }
    if q <= 0.0 {
        return Ok(Divergence::Infinite);
    }
    Ok(Divergence::Finite(q.ln() / (alpha - 1.0)))
}

/// `S^α(ρ_A) + S^α(ρ_B) − S^α(ρ_AB)`. Not clamped: it can be negative for
/// α ≠ 1.
pub fn renyi_mutual_info(rho_ab: &DensityOperator, dims: (usize, usize), alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let a = partial_trace(rho_ab, dims, Subsystem::A)?;
    let b = partial_trace(rho_ab, dims, Subsystem::B)?;
    Ok(renyi_entropy(&a, alpha)? + renyi_entropy(&b, alpha)? - renyi_entropy(rho_ab, alpha)?)
}

/// Diagnostic `D_α(ρ_AB ‖ ρ_A ⊗ ρ_B)`; differs from [`renyi_mutual_info`] in
/// general.
pub fn renyi_mutual_info_divergence(rho_ab: &DensityOperator, dims: (usize, usize), alpha: f64) -> Result<Divergence> {
    let a = partial_trace(rho_ab, dims, Subsystem::A)?;
    let b = partial_trace(rho_ab, dims, Subsystem::B)?;
    petz_renyi(rho_ab, &a.tensor(&b), alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::c64;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    fn diag(d: &[f64]) -> DensityOperator {
        DensityOperator::from_diagonal(d).unwrap()
    }

    #[test]
    fn kl_examples() {
        assert_eq!(
            kl_divergence(&[0.5, 0.5], &[0.5, 0.5]).unwrap(),
            Divergence::Finite(0.0)
        );
        let d = kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap().value();
        assert!((d - LN_2).abs() < 1e-15);
        assert!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap().is_infinite());
        assert!(matches!(
            kl_divergence(&[1.0], &[0.5, 0.5]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn weight_vectors() {
        assert!(WeightVector::normalized(vec![0.3, 0.7]).unwrap().is_normalized());
        assert!(WeightVector::normalized(vec![0.3, 0.6]).is_err());
        assert!(WeightVector::new(vec![2.0, -0.1]).is_err());
        let w = WeightVector::new(vec![1.0, 3.0]).unwrap();
        assert_eq!(w.len(), 2);
    }

    #[test]
    fn von_neumann_examples() {
        assert!(von_neumann(&diag(&[1.0, 0.0])).abs() < 1e-15);
        assert!((von_neumann(&DensityOperator::maximally_mixed(3)) - 3f64.ln()).abs() < 1e-14);
        // −0.75 ln 0.75 − 0.25 ln 0.25
        let expected = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        let s = von_neumann(&diag(&[0.75, 0.25]));
        assert!((s - expected).abs() < 1e-14);
        assert!((s - 0.5623).abs() < 5e-5);
    }

    #[test]
    fn renyi_examples() {
        for a in [0.3, 2.0, 5.0] {
            let s = renyi_entropy(&DensityOperator::maximally_mixed(4), a).unwrap();
            assert!((s - 4f64.ln()).abs() < 1e-13);
            assert!(renyi_entropy(&diag(&[0.0, 1.0]), a).unwrap().abs() < 1e-15);
        }
        let s = renyi_entropy(&diag(&[0.75, 0.25]), 2.0).unwrap();
        assert!((s + 0.625f64.ln()).abs() < 1e-15);
        assert!((s - 0.4700).abs() < 5e-5);
        assert!(matches!(
            renyi_entropy(&diag(&[1.0, 0.0]), 0.0),
            Err(Error::InvalidAlpha(_))
        ));
        assert!(matches!(
            renyi_entropy(&diag(&[1.0, 0.0]), -1.0),
            Err(Error::InvalidAlpha(_))
        ));
    }

    #[test]
    fn umegaki_examples() {
        let r = diag(&[0.6, 0.4]);
        assert!(umegaki(&r, &r).unwrap().value().abs() < 1e-14);
        let pure = diag(&[0.0, 0.0, 1.0]);
        let d = umegaki(&pure, &DensityOperator::maximally_mixed(3)).unwrap().value();
        assert!((d - 3f64.ln()).abs() < 1e-14);
        assert!(umegaki(&DensityOperator::maximally_mixed(2), &diag(&[1.0, 0.0]))
            .unwrap()
            .is_infinite());
    }

    #[test]
    fn petz_examples() {
        let r = diag(&[0.2, 0.3, 0.5]);
        for a in [0.3, 0.7, 1.5, 2.0, 3.0] {
            assert!(petz_renyi(&r, &r, a).unwrap().value().abs() < 1e-14);
        }
        let d = petz_renyi(&diag(&[0.75, 0.25]), &DensityOperator::maximally_mixed(2), 2.0)
            .unwrap()
            .value();
        assert!((d - 1.25f64.ln()).abs() < 1e-14);
        assert!((d - 0.2231).abs() < 5e-5);
    }

    #[test]
    fn petz_support_rules() {
        let mixed = DensityOperator::maximally_mixed(2);
        let ket0 = diag(&[1.0, 0.0]);
        assert!(petz_renyi(&mixed, &ket0, 2.0).unwrap().is_infinite());
        // α < 1: finite unless supports are orthogonal
        assert!(!petz_renyi(&mixed, &ket0, 0.5).unwrap().is_infinite());
        assert!(petz_renyi(&diag(&[0.0, 1.0]), &ket0, 0.5).unwrap().is_infinite());
        assert!(matches!(
            petz_renyi(&mixed, &DensityOperator::maximally_mixed(3), 2.0),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn petz_half_on_partial_support() {
        // Tr(ρ^{1/2} σ^{1/2}) = sqrt(0.5)·1 for ρ = I/2, σ = |0⟩⟨0|
        let d = petz_renyi(&DensityOperator::maximally_mixed(2), &diag(&[1.0, 0.0]), 0.5)
            .unwrap()
            .value();
        assert!((d - 0.5f64.sqrt().ln() / -0.5).abs() < 1e-14);
    }

    #[test]
    fn mutual_information_examples() {
        let prod = diag(&[0.7, 0.3]).tensor(&diag(&[0.2, 0.5, 0.3]));
        for a in [0.5, 2.0, 3.0] {
            assert!(renyi_mutual_info(&prod, (2, 3), a).unwrap().abs() < 1e-13);
        }
        let s = FRAC_1_SQRT_2;
        let bell = DensityOperator::pure(&[c64(s, 0.), c64(0., 0.), c64(0., 0.), c64(s, 0.)]).unwrap();
        let i = renyi_mutual_info(&bell, (2, 2), 2.0).unwrap();
        assert!((i - 2.0 * LN_2).abs() < 1e-13);
        let classical = diag(&[0.5, 0.0, 0.0, 0.5]);
        let i = renyi_mutual_info(&classical, (2, 2), 2.0).unwrap();
        assert!((i - LN_2).abs() < 1e-13);
        // divergence form is a different quantity on the Bell state
        let dv = renyi_mutual_info_divergence(&classical, (2, 2), 2.0).unwrap().value();
        assert!((dv - LN_2).abs() < 1e-13);
    }

    #[test]
    fn classical_petz_matches_definition() {
        let d = classical_petz_renyi(&[0.5, 0.5], &[0.25, 0.75], 2.0).unwrap().value();
        let expected = (0.25 / 0.25 + 0.25 / 0.75f64).ln();
        assert!((d - expected).abs() < 1e-15);
        assert!(classical_petz_renyi(&[0.5, 0.5], &[1.0, 0.0], 2.0)
            .unwrap()
            .is_infinite());
        let d = classical_petz_renyi(&[0.5, 0.5], &[1.0, 0.0], 0.5).unwrap().value();
        assert!((d - (0.5f64.sqrt()).ln() / -0.5).abs() < 1e-15);
    }
}
