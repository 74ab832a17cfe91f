//! Seeded generators of random states, Hamiltonians and coarse-grainings.
//!
//! All generators take an explicit RNG; [`rng_for`] derives independent
//! ChaCha streams from a seed and instance coordinates.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::coarse::{CoarseGraining, RefinementMap};
use crate::operator::{c64, hermitize, power_matrix, trace_re, CMatrix, DensityOperator, HermitianOperator};

/// Deterministic stream for instance `index` of `stream` under `seed`.
pub fn rng_for(seed: u64, stream: &str, index: u64) -> ChaCha8Rng {
    // FNV-1a over the stream name keeps streams stable across builds.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in stream.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ h.rotate_left(17));
    rng.set_stream(index);
    rng
}

/// `rows × cols` matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        c64(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// `G G† / Tr(G G†)` with `G` of shape `dim × rank` (full rank by default).
pub fn random_density<R: Rng + ?Sized>(rng: &mut R, dim: usize, rank: Option<usize>) -> DensityOperator {
    let g = ginibre(rng, dim, rank.unwrap_or(dim).clamp(1, dim));
    let m = &g * g.adjoint();
    let t = trace_re(&m);
    DensityOperator::from_trusted(m.unscale(t))
}

/// `scale · (G + G†)/2`.
pub fn random_hermitian<R: Rng + ?Sized>(rng: &mut R, dim: usize, scale: f64) -> HermitianOperator {
    let g = ginibre(rng, dim, dim);
    HermitianOperator::from_trusted(hermitize(&g).scale(scale))
}

/// Haar-distributed unitary from the QR decomposition of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CMatrix {
    let qr = ginibre(rng, dim, dim).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    q
}

/// Probability vector drawn uniformly from the simplex.
pub fn random_probabilities<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Random set partition of `0..n` into between 1 and `n` non-empty groups.
pub fn random_partition<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    let groups = rng.random_range(1..=n.max(1));
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); groups];
    for (k, &i) in idx.iter().enumerate() {
        let g = if k < groups { k } else { rng.random_range(0..groups) };
        out[g].push(i);
    }
    for g in &mut out {
        g.sort_unstable();
    }
    out.sort();
    out
}

/// Projectors onto blocks of a random orthonormal frame, with random ranks.
pub fn random_projective_cg<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CoarseGraining {
    let u = random_unitary(rng, dim);
    let blocks = random_partition(rng, dim);
    let effects = blocks
        .iter()
        .map(|b| {
            b.iter().fold(CMatrix::zeros(dim, dim), |acc, &k| {
                let v = u.column(k);
                acc + v * v.adjoint()
            })
        })
        .collect();
    let labels = (0..blocks.len()).map(|k| k.to_string()).collect();
    CoarseGraining::from_trusted(dim, labels, effects)
}

/// Rank-1 projective measurement in a Haar-random basis.
pub fn random_basis_cg<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> CoarseGraining {
    let u = random_unitary(rng, dim);
    let effects = u.column_iter().map(|c| c * c.adjoint()).collect();
    CoarseGraining::from_trusted(dim, (0..dim).map(|k| k.to_string()).collect(), effects)
}

/// `n` effects `S^{-1/2} G_k S^{-1/2}` from random PSD `G_k`, `S = Σ G_k`.
/// `G_0` has full rank so that `S` is invertible.
pub fn random_povm<R: Rng + ?Sized>(rng: &mut R, dim: usize, n: usize) -> CoarseGraining {
    let raw: Vec<CMatrix> = (0..n.max(1))
        .map(|k| {
            let rank = if k == 0 { dim } else { rng.random_range(1..=dim) };
            let a = ginibre(rng, dim, rank);
            &a * a.adjoint()
        })
        .collect();
    let s = raw.iter().fold(CMatrix::zeros(dim, dim), |acc, g| acc + g);
    let s_inv_half = power_matrix(&s, -0.5, 0.0);
    let effects = raw
        .iter()
        .map(|g| hermitize(&(&s_inv_half * g * &s_inv_half)))
        .collect();
    CoarseGraining::from_trusted(dim, (0..n.max(1)).map(|k| k.to_string()).collect(), effects)
}

/// Row-stochastic `rows × cols` matrix with rows drawn from the simplex.
pub fn random_stochastic_map<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> RefinementMap {
    let m = (0..rows).map(|_| random_probabilities(rng, cols)).collect();
    RefinementMap::new(m).expect("rows are normalized")
}
