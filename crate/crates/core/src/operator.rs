//! Validated dense complex operators and the matrix functions built on them.
//!
//! Three validated wrappers share one representation (a dense
//! `DMatrix<Complex64>`):
//!
//! - [`HermitianOperator`]: `‖A − A†‖_max ≤ tol · ‖A‖_max`.
//! - [`PsdOperator`]: Hermitian with every eigenvalue `≥ −tol`.
//! - [`DensityOperator`]: PSD with unit trace.
//!
//! Validation stores the Hermitian part `(A + A†)/2`, so everything downstream
//! sees an exactly Hermitian matrix.
//!
//! Support convention: eigenvalues `≤ support · λ_max` are exact zeros. Powers
//! (negative ones included) map them to zero, so `A^s` is a pseudo-power on
//! the support of `A`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

pub type CMatrix = DMatrix<Complex64>;

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `max |A_ij − conj(A_ji)|`.
pub fn hermitian_deviation(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

pub fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Real part of the trace.
pub fn trace_re(m: &CMatrix) -> f64 {
    m.diagonal().iter().map(|z| z.re).sum()
}

/// Real part of `Tr(A B)` without forming the product.
pub fn trace_product_re(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            let x = a[(i, k)] * b[(k, i)];
            acc += x.re;
        }
    }
    acc
}

/// Sorted (ascending) eigen-decomposition of a Hermitian matrix; the columns
/// of `vectors` are the matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub(crate) struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub(crate) fn eigh(m: &CMatrix) -> Eigh {
    let n = m.nrows();
    if n == 0 {
        return Eigh {
            values: vec![],
            vectors: CMatrix::zeros(0, 0),
        };
    }
    let eig = SymmetricEigen::new(hermitize(m));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Eigh { values, vectors }
}

impl Eigh {
    /// `Σ f(λ_k) |v_k⟩⟨v_k|`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut out = CMatrix::zeros(n, n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            let v = self.vectors.column(k);
            out += (v * v.adjoint()).scale(w);
        }
        hermitize(&out)
    }

    /// Threshold under which eigenvalues count as exact zeros.
    pub fn support_cutoff(&self, support: f64) -> f64 {
        let lmax = self.values.last().copied().unwrap_or(0.0).max(0.0);
        support * lmax
    }
}

/// Common read access for the validated operator types.
pub trait Operator {
    fn matrix(&self) -> &CMatrix;

    fn dim(&self) -> usize {
        self.matrix().nrows()
    }
}

/// Marker for operators that are positive semidefinite.
pub trait Positive: Operator {}

macro_rules! operator_type {
    ($name:ident) => {
        impl Operator for $name {
            fn matrix(&self) -> &CMatrix {
                &self.0
            }
        }

        impl $name {
            pub fn into_matrix(self) -> CMatrix {
                self.0
            }

            /// Wraps a matrix already known to satisfy the invariants; only
            /// the Hermitian part is kept.
            pub(crate) fn from_trusted(m: CMatrix) -> Self {
                Self(hermitize(&m))
            }
        }
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(CMatrix);

#[derive(Debug, Clone, PartialEq)]
pub struct PsdOperator(CMatrix);

#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator(CMatrix);

operator_type!(HermitianOperator);
operator_type!(PsdOperator);
operator_type!(DensityOperator);

impl Positive for PsdOperator {}
impl Positive for DensityOperator {}

/// Which invariant set [`validate_operator`] enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Hermitian,
    Psd,
    Density,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidatedOperator {
    Hermitian(HermitianOperator),
    Psd(PsdOperator),
    Density(DensityOperator),
}

fn check_square_finite(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFinite { row: r, col: c });
            }
        }
    }
    Ok(())
}

fn check_hermitian(m: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    check_square_finite(m)?;
    let deviation = hermitian_deviation(m);
    let tolerance = tol.hermiticity * max_abs(m);
    if deviation > tolerance {
        return Err(Error::NotHermitian { deviation, tolerance });
    }
    Ok(hermitize(m))
}

fn check_psd(m: CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let min = eigh(&m).values.first().copied().unwrap_or(0.0);
    if min < -tol.psd {
        return Err(Error::NotPsd { min_eigenvalue: min });
    }
    Ok(m)
}

/// Validates `m` against the invariants of `kind`, naming the first violated
/// one together with its magnitude.
pub fn validate_operator(m: CMatrix, kind: OperatorKind, tol: &Tolerances) -> Result<ValidatedOperator> {
    Ok(match kind {
        OperatorKind::Hermitian => ValidatedOperator::Hermitian(HermitianOperator::with_tolerances(m, tol)?),
        OperatorKind::Psd => ValidatedOperator::Psd(PsdOperator::with_tolerances(m, tol)?),
        OperatorKind::Density => ValidatedOperator::Density(DensityOperator::with_tolerances(m, tol)?),
    })
}

impl HermitianOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    pub fn with_tolerances(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        Ok(Self(check_hermitian(&m, tol)?))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let d = diag.len();
        Self(CMatrix::from_fn(d, d, |r, c| {
            if r == c {
                c64(diag[r], 0.0)
            } else {
                c64(0.0, 0.0)
            }
        }))
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self(tensor(&self.0, &other.0))
    }

    /// Ascending eigenvalues, degeneracies not merged.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.0).values
    }
}

impl PsdOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    pub fn with_tolerances(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        let h = check_hermitian(&m, tol)?;
        Ok(Self(check_psd(h, tol)?))
    }

    pub fn trace(&self) -> f64 {
        trace_re(&self.0)
    }
}

impl DensityOperator {
    pub fn new(m: CMatrix) -> Result<Self> {
        Self::with_tolerances(m, &Tolerances::default())
    }

    pub fn with_tolerances(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        let h = check_hermitian(&m, tol)?;
        let trace = trace_re(&h);
        let h = check_psd(h, tol)?;
        if (trace - 1.0).abs() > tol.trace {
            return Err(Error::TraceNotOne { trace });
        }
        Ok(Self(h))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(HermitianOperator::from_diagonal(diag).into_matrix())
    }

    /// `|ψ⟩⟨ψ|` for the normalized `ψ`.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Schema("state vector has zero or non-finite norm".into()));
        }
        let v = nalgebra::DVector::from_iterator(psi.len(), psi.iter().map(|z| z / norm));
        Ok(Self::from_trusted(&v * v.adjoint()))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self(identity(dim).scale(1.0 / dim as f64))
    }

    /// Ascending spectrum.
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.0).values
    }

    pub fn purity(&self) -> f64 {
        trace_product_re(&self.0, &self.0)
    }

    pub fn tensor(&self, other: &Self) -> Self {
        Self(tensor(&self.0, &other.0))
    }

    /// Convex combination `λ self + (1 − λ) other`, `λ ∈ [0, 1]`.
    pub fn mix(&self, other: &Self, lambda: f64) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(Self::from_trusted(self.0.scale(lambda) + other.0.scale(1.0 - lambda)))
    }
}

/// Spectral decomposition with degenerate eigenvalues merged into one
/// projector per distinct level.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    /// Distinct eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthogonal projectors, one per entry of `eigenvalues`.
    pub projectors: Vec<CMatrix>,
    pub ranks: Vec<usize>,
}

impl EigenSystem {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.projectors.first().map_or(0, |p| p.nrows());
        self.eigenvalues
            .iter()
            .zip(&self.projectors)
            .fold(CMatrix::zeros(n, n), |acc, (&l, p)| acc + p.scale(l))
    }
}

/// Eigenvalues closer than `degeneracy_tol` to their predecessor are merged
/// into the same level; the level's eigenvalue is the mean of its members.
pub fn spectral(h: &HermitianOperator, degeneracy_tol: f64) -> EigenSystem {
    let e = eigh(h.matrix());
    let n = e.values.len();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..n {
        match groups.last_mut() {
            Some(g) if e.values[k] - e.values[*g.last().unwrap()] <= degeneracy_tol => g.push(k),
            _ => groups.push(vec![k]),
        }
    }
    let mut eigenvalues = Vec::with_capacity(groups.len());
    let mut projectors = Vec::with_capacity(groups.len());
    let mut ranks = Vec::with_capacity(groups.len());
    for g in groups {
        let mean = g.iter().map(|&k| e.values[k]).sum::<f64>() / g.len() as f64;
        let mut p = CMatrix::zeros(n, n);
        for &k in &g {
            let v = e.vectors.column(k);
            p += v * v.adjoint();
        }
        eigenvalues.push(mean);
        projectors.push(hermitize(&p));
        ranks.push(g.len());
    }
    EigenSystem {
        eigenvalues,
        projectors,
        ranks,
    }
}

pub(crate) fn power_matrix(m: &CMatrix, s: f64, support: f64) -> CMatrix {
    let e = eigh(m);
    let cut = e.support_cutoff(support);
    e.apply(|l| if l > cut { l.powf(s) } else { 0.0 })
}

/// `A^s` on the support of `A` (see the module docs for the convention).
pub fn op_power<O: Positive>(a: &O, s: f64) -> PsdOperator {
    op_power_with(a, s, Tolerances::default().support)
}

pub fn op_power_with<O: Positive>(a: &O, s: f64, support: f64) -> PsdOperator {
    PsdOperator::from_trusted(power_matrix(a.matrix(), s, support))
}

/// Orthogonal projector onto the support of `A`.
pub fn support_projector<O: Positive>(a: &O) -> CMatrix {
    let e = eigh(a.matrix());
    let cut = e.support_cutoff(Tolerances::default().support);
    e.apply(|l| if l > cut { 1.0 } else { 0.0 })
}

pub(crate) fn sqrt_psd(m: &CMatrix) -> CMatrix {
    power_matrix(m, 0.5, Tolerances::default().support)
}

/// Kronecker product `A ⊗ B`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial trace of a bipartite matrix (row index `a · d_B + b`).
pub fn partial_trace_matrix(m: &CMatrix, (da, db): (usize, usize), keep: Subsystem) -> Result<CMatrix> {
    if m.nrows() != da * db {
        return Err(Error::DimensionMismatch {
            expected: da * db,
            found: m.nrows(),
        });
    }
    Ok(match keep {
        Subsystem::A => CMatrix::from_fn(da, da, |i, j| (0..db).map(|b| m[(i * db + b, j * db + b)]).sum()),
        Subsystem::B => CMatrix::from_fn(db, db, |i, j| (0..da).map(|a| m[(a * db + i, a * db + j)]).sum()),
    })
}

pub fn partial_trace(rho: &DensityOperator, dims: (usize, usize), keep: Subsystem) -> Result<DensityOperator> {
    Ok(DensityOperator::from_trusted(partial_trace_matrix(
        rho.matrix(),
        dims,
        keep,
    )?))
}

/// Cached spectral data of a Hamiltonian for repeated evolution,
/// `U(t) = exp(−iHt)`.
#[derive(Debug, Clone)]
pub struct Propagator {
    eig: Eigh,
}

impl Propagator {
    pub fn new(h: &HermitianOperator) -> Self {
        Self { eig: eigh(h.matrix()) }
    }

    pub fn dim(&self) -> usize {
        self.eig.values.len()
    }

    pub fn unitary(&self, t: f64) -> CMatrix {
        let n = self.dim();
        let v = &self.eig.vectors;
        let phases = CMatrix::from_fn(n, n, |r, c| {
            if r == c {
                let th = -self.eig.values[r] * t;
                c64(th.cos(), th.sin())
            } else {
                c64(0.0, 0.0)
            }
        });
        v * phases * v.adjoint()
    }

    pub fn evolve(&self, rho: &DensityOperator, t: f64) -> Result<DensityOperator> {
        if rho.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: rho.dim(),
            });
        }
        let u = self.unitary(t);
        Ok(DensityOperator::from_trusted(&u * rho.matrix() * u.adjoint()))
    }
}

/// `ρ(t) = U ρ U†` with `U = exp(−iHt)` computed spectrally.
pub fn propagate(rho: &DensityOperator, h: &HermitianOperator, t: f64) -> Result<DensityOperator> {
    Propagator::new(h).evolve(rho, t)
}
