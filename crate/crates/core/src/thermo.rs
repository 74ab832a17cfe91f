//! Energy coarse-grainings, Gibbs states, effective temperatures, driven
//! closed and open runs, and free energies of level systems.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::coarse::{alpha_oe, classical_alpha_oe, outcomes, tensor_cg, CoarseGraining};
use crate::divergence::{check_alpha, classical_renyi_entropy, renyi_mutual_info};
use crate::error::{Error, Result};
use crate::operator::{
    identity, partial_trace, spectral, tensor, trace_product_re, CMatrix, DensityOperator, HermitianOperator, Operator,
    Propagator, Subsystem,
};
use crate::state::{is_coarse_grained, CoarseGrainedReport};
use crate::tolerance::Tolerances;

/// Interval searched for effective inverse temperatures.
pub const BETA_RANGE: (f64, f64) = (-50.0, 50.0);
/// Required `|Tr(Hρ) − Tr(Hγ(β))|` at the returned β.
pub const BETA_ENERGY_TOL: f64 = 1e-10;
/// Slack for the sign checks on entropy productions.
pub const PRODUCTION_TOL: f64 = 1e-9;
/// Relative shift applied before flooring so eigenvalues sitting on a bin edge
/// up to rounding land in the upper bin.
const EDGE_SLACK: f64 = 1e-9;

/// Energy windows `[origin + kδ, origin + (k+1)δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyWindowing {
    width: f64,
    origin: Option<f64>,
}

impl EnergyWindowing {
    /// Windows anchored at the lowest eigenvalue of each Hamiltonian.
    pub fn new(width: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::InvalidWindow(width));
        }
        Ok(Self { width, origin: None })
    }

    pub fn with_origin(width: f64, origin: f64) -> Result<Self> {
        if !origin.is_finite() {
            return Err(Error::InvalidWindow(origin));
        }
        Ok(Self {
            origin: Some(origin),
            ..Self::new(width)?
        })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn origin(&self) -> Option<f64> {
        self.origin
    }
}

/// One effect per non-empty energy window, each the sum of the eigenprojectors
/// whose level falls in it. Labels are the window indices.
pub fn energy_cg(h: &HermitianOperator, w: &EnergyWindowing) -> CoarseGraining {
    let eig = spectral(h, Tolerances::default().degeneracy);
    let origin = w.origin.unwrap_or(eig.eigenvalues[0]);
    let mut bins: BTreeMap<i64, CMatrix> = BTreeMap::new();
    for (&e, p) in eig.eigenvalues.iter().zip(&eig.projectors) {
        let k = ((e - origin) / w.width + EDGE_SLACK).floor() as i64;
        bins.entry(k).and_modify(|acc| *acc += p).or_insert_with(|| p.clone());
    }
    let (labels, effects) = bins.into_iter().map(|(k, m)| (k.to_string(), m)).unzip();
    CoarseGraining::from_trusted(h.dim(), labels, effects)
}

/// Boltzmann weights `e^{−β(λ−shift)}` with the shift chosen so no exponent is
/// positive.
fn boltzmann(levels: &[f64], beta: f64) -> Vec<f64> {
    let shift = if beta >= 0.0 {
        levels.iter().cloned().fold(f64::INFINITY, f64::min)
    } else {
        levels.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    };
    levels.iter().map(|&l| (-beta * (l - shift)).exp()).collect()
}

fn check_beta(beta: f64) -> Result<()> {
    if beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidTemperature(beta))
    }
}

/// `γ(β) = e^{−βH}/Z`.
pub fn gibbs_state(h: &HermitianOperator, beta: f64) -> Result<DensityOperator> {
    check_beta(beta)?;
    let eig = spectral(h, 0.0);
    let w = boltzmann(&eig.eigenvalues, beta);
    let z: f64 = w.iter().zip(&eig.ranks).map(|(x, &r)| x * r as f64).sum();
    let m = eig
        .projectors
        .iter()
        .zip(&w)
        .fold(CMatrix::zeros(h.dim(), h.dim()), |acc, (p, &x)| acc + p.scale(x / z));
    Ok(DensityOperator::from_trusted(m))
}

/// Rényi entropy of `γ(β)` from its spectrum.
fn gibbs_renyi(levels: &[f64], beta: f64, alpha: f64) -> Result<f64> {
    let w = boltzmann(levels, beta);
    let z: f64 = w.iter().sum();
    let p: Vec<f64> = w.iter().map(|x| x / z).collect();
    classical_renyi_entropy(&p, alpha)
}

fn gibbs_energy(levels: &[f64], beta: f64) -> f64 {
    let w = boltzmann(levels, beta);
    let z: f64 = w.iter().sum();
    levels.iter().zip(&w).map(|(l, x)| l * x).sum::<f64>() / z
}

/// Inverse temperature of the Gibbs state sharing the mean energy of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveTemperature {
    pub beta: f64,
    pub energy: f64,
    /// Population inversion (β < 0).
    pub negative: bool,
}

/// Bisection for `Tr(Hρ) = Tr(Hγ(β))` on β ∈ [−50, 50].
pub fn effective_beta(h: &HermitianOperator, rho: &DensityOperator) -> Result<EffectiveTemperature> {
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            found: rho.dim(),
        });
    }
    let levels = h.eigenvalues();
    let energy = trace_product_re(h.matrix(), rho.matrix());
    beta_for_energy(&levels, energy)
}

fn beta_for_energy(levels: &[f64], energy: f64) -> Result<EffectiveTemperature> {
    let (min, max) = (levels[0], levels[levels.len() - 1]);
    let slack = 1e-12 * (max - min).abs().max(1.0);
    if !(energy > min + slack && energy < max - slack) {
        return Err(Error::EnergyOutOfRange { energy, min, max });
    }
    let (mut lo, mut hi) = BETA_RANGE;
    let mut beta = 0.5 * (lo + hi);
    let mut mismatch = f64::INFINITY;
    for _ in 0..200 {
        beta = 0.5 * (lo + hi);
        mismatch = gibbs_energy(levels, beta) - energy;
        if mismatch.abs() <= BETA_ENERGY_TOL && hi - lo < 1e-12 {
            break;
        }
        // energy decreases with β
        if mismatch > 0.0 {
            lo = beta;
        } else {
            hi = beta;
        }
        if hi - lo <= f64::EPSILON * beta.abs().max(1.0) {
            break;
        }
    }
    if mismatch.abs() > BETA_ENERGY_TOL {
        return Err(Error::NoConvergence {
            mismatch: mismatch.abs(),
        });
    }
    Ok(EffectiveTemperature {
        beta,
        energy,
        negative: beta < 0.0,
    })
}

/// Piecewise-constant driving: `H(t) = H_k` for `T_k ≤ t < T_{k+1}`, the last
/// segment extending past the end of the schedule.
#[derive(Debug, Clone)]
pub struct DrivingProtocol {
    segments: Vec<(HermitianOperator, f64)>,
    propagators: Vec<Propagator>,
}

impl DrivingProtocol {
    pub fn new(segments: Vec<(HermitianOperator, f64)>) -> Result<Self> {
        let Some(first) = segments.first() else {
            return Err(Error::InvalidProtocol("no segments".into()));
        };
        let dim = first.0.dim();
        for (k, (h, d)) in segments.iter().enumerate() {
            if h.dim() != dim {
                return Err(Error::InvalidProtocol(format!(
                    "segment {k} has dimension {}, expected {dim}",
                    h.dim()
                )));
            }
            if !(d.is_finite() && *d >= 0.0) {
                return Err(Error::InvalidProtocol(format!("segment {k} has duration {d}")));
            }
        }
        let propagators = segments.iter().map(|(h, _)| Propagator::new(h)).collect();
        Ok(Self { segments, propagators })
    }

    /// A single time-independent Hamiltonian.
    pub fn constant(h: HermitianOperator) -> Self {
        let propagators = vec![Propagator::new(&h)];
        Self {
            segments: vec![(h, f64::INFINITY)],
            propagators,
        }
    }

    pub fn dim(&self) -> usize {
        self.segments[0].0.dim()
    }

    pub fn segments(&self) -> &[(HermitianOperator, f64)] {
        &self.segments
    }

    fn segment_index(&self, t: f64) -> usize {
        let mut start = 0.0;
        let last = self.segments.len() - 1;
        for (k, (_, d)) in self.segments.iter().enumerate() {
            if k == last || t < start + d {
                return k;
            }
            start += d;
        }
        last
    }

    pub fn hamiltonian_at(&self, t: f64) -> &HermitianOperator {
        &self.segments[self.segment_index(t)].0
    }

    /// `ρ(t)` for `t ≥ 0`, composed from exact segment propagators.
    pub fn evolve(&self, rho0: &DensityOperator, t: f64) -> Result<DensityOperator> {
        let mut rho = rho0.clone();
        let mut remaining = t;
        let last = self.segments.len() - 1;
        for (k, (_, d)) in self.segments.iter().enumerate() {
            let step = if k == last { remaining } else { remaining.min(*d) };
            if step > 0.0 {
                rho = self.propagators[k].evolve(&rho, step)?;
            } else if k == 0 && rho.dim() != self.dim() {
                return Err(Error::DimensionMismatch {
                    expected: self.dim(),
                    found: rho.dim(),
                });
            }
            remaining -= step;
            if remaining <= 0.0 {
                break;
            }
        }
        Ok(rho)
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    match times.first() {
        None => return Err(Error::InvalidSampleTimes("no sample times".into())),
        Some(&t0) if t0 != 0.0 => {
            return Err(Error::InvalidSampleTimes(format!(
                "first sample time is {t0}, expected 0"
            )))
        }
        _ => {}
    }
    for w in times.windows(2) {
        if w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater) || !w[1].is_finite() {
            return Err(Error::InvalidSampleTimes(format!(
                "times must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::InvalidAlpha(f64::NAN));
    }
    alphas.iter().try_for_each(|&a| check_alpha(a))
}

/// Something noteworthy observed during a run; never an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Finding {
    pub kind: FindingKind,
    pub t: f64,
    pub alpha: Option<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FindingKind {
    /// `ΔS^α < −1e-9` although the premise held.
    SecondLawViolation,
    /// `S^α_{E_t}(ρ) > S^α(γ(β_t)) + 1e-9`.
    GibbsMaxViolation,
    /// `ξ₃ < −1e-9` at a sample where the Gibbs-max monitor held.
    ClausiusViolation,
    NegativeTemperature,
    /// `ξ₁ < −1e-9` although the premise held.
    Xi1Violation,
    Xi2Negative,
    MutualInformationNegative,
    QuantumMutualInformationNegative,
    /// `|S_joint − (S_s + S_b − I)| > 1e-9` with uniform joint volumes.
    FactorizationResidual,
}

/// Per-α quantities of a closed run at one sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedAlphaSample {
    pub alpha: f64,
    pub s_oe: f64,
    pub ds: f64,
    /// `S^α(γ(β_t))`.
    pub renyi_gibbs: f64,
    /// `∫dQ/T = S^α(γ(β_t)) − S^α(γ(β_0))`.
    pub heat_over_t: f64,
    pub xi3: f64,
    pub gibbs_max_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedSample {
    pub t: f64,
    pub energy: f64,
    pub beta: f64,
    pub per_alpha: Vec<ClosedAlphaSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedRunRecord {
    pub guarantee_void: bool,
    pub premise: CoarseGrainedReport,
    pub samples: Vec<ClosedSample>,
    pub findings: Vec<Finding>,
}

impl ClosedRunRecord {
    /// Smallest `ΔS^α` over all samples for the given α.
    pub fn min_ds(&self, alpha: f64) -> Option<f64> {
        self.per_alpha(alpha).map(|a| a.ds).reduce(f64::min)
    }

    fn per_alpha(&self, alpha: f64) -> impl Iterator<Item = &ClosedAlphaSample> {
        self.samples
            .iter()
            .flat_map(|s| &s.per_alpha)
            .filter(move |a| a.alpha == alpha)
    }
}

/// Evolves `ρ₀` under the protocol and records α-OE of the instantaneous
/// energy coarse-graining together with the Clausius bookkeeping.
pub fn closed_run(
    protocol: &DrivingProtocol,
    rho0: &DensityOperator,
    windowing: &EnergyWindowing,
    alphas: &[f64],
    times: &[f64],
) -> Result<ClosedRunRecord> {
    if rho0.dim() != protocol.dim() {
        return Err(Error::DimensionMismatch {
            expected: protocol.dim(),
            found: rho0.dim(),
        });
    }
    check_alphas(alphas)?;
    check_times(times)?;
    let cg0 = energy_cg(protocol.hamiltonian_at(0.0), windowing);
    let premise = is_coarse_grained(&cg0, rho0, alphas[0])?;
    let guarantee_void = !premise.state_test;

    let mut samples = Vec::with_capacity(times.len());
    let mut findings = Vec::new();
    let mut first: Option<(Vec<f64>, Vec<f64>)> = None;
    for &t in times {
        let h = protocol.hamiltonian_at(t);
        let rho = protocol.evolve(rho0, t)?;
        let cg = energy_cg(h, windowing);
        let levels = h.eigenvalues();
        let eff = effective_beta(h, &rho)?;
        if eff.negative {
            findings.push(Finding {
                kind: FindingKind::NegativeTemperature,
                t,
                alpha: None,
                value: eff.beta,
            });
        }
        let s: Vec<f64> = alphas.iter().map(|&a| alpha_oe(&cg, &rho, a)).collect::<Result<_>>()?;
        let g: Vec<f64> = alphas
            .iter()
            .map(|&a| gibbs_renyi(&levels, eff.beta, a))
            .collect::<Result<_>>()?;
        let (s0, g0) = first.get_or_insert_with(|| (s.clone(), g.clone())).clone();
        let mut per_alpha = Vec::with_capacity(alphas.len());
        for (k, &alpha) in alphas.iter().enumerate() {
            let ds = s[k] - s0[k];
            let heat_over_t = g[k] - g0[k];
            let xi3 = s[k] - g[k] + heat_over_t;
            let gibbs_max_holds = s[k] <= g[k] + PRODUCTION_TOL;
            let mut note = |kind, value| {
                findings.push(Finding {
                    kind,
                    t,
                    alpha: Some(alpha),
                    value,
                })
            };
            if !guarantee_void && ds < -PRODUCTION_TOL {
                note(FindingKind::SecondLawViolation, ds);
            }
            if !gibbs_max_holds {
                note(FindingKind::GibbsMaxViolation, s[k] - g[k]);
            } else if xi3 < -PRODUCTION_TOL {
                note(FindingKind::ClausiusViolation, xi3);
            }
            per_alpha.push(ClosedAlphaSample {
                alpha,
                s_oe: s[k],
                ds,
                renyi_gibbs: g[k],
                heat_over_t,
                xi3,
                gibbs_max_holds,
            });
        }
        samples.push(ClosedSample {
            t,
            energy: eff.energy,
            beta: eff.beta,
            per_alpha,
        });
    }
    Ok(ClosedRunRecord {
        guarantee_void,
        premise,
        samples,
        findings,
    })
}

/// System, bath, coupling and the system measurement basis.
#[derive(Debug, Clone)]
pub struct OpenSystem {
    pub h_s: HermitianOperator,
    pub h_b: HermitianOperator,
    pub v_sb: HermitianOperator,
    pub system_cg: CoarseGraining,
}

impl OpenSystem {
    pub fn new(
        h_s: HermitianOperator,
        h_b: HermitianOperator,
        v_sb: HermitianOperator,
        system_cg: CoarseGraining,
    ) -> Result<Self> {
        let joint = h_s.dim() * h_b.dim();
        if v_sb.dim() != joint {
            return Err(Error::DimensionMismatch {
                expected: joint,
                found: v_sb.dim(),
            });
        }
        if system_cg.dim() != h_s.dim() {
            return Err(Error::DimensionMismatch {
                expected: h_s.dim(),
                found: system_cg.dim(),
            });
        }
        Ok(Self {
            h_s,
            h_b,
            v_sb,
            system_cg,
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.h_s.dim(), self.h_b.dim())
    }

    /// `H_s ⊗ I + I ⊗ H_b + V_sb`.
    pub fn joint_hamiltonian(&self) -> HermitianOperator {
        let (ds, db) = self.dims();
        let m =
            tensor(self.h_s.matrix(), &identity(db)) + tensor(&identity(ds), self.h_b.matrix()) + self.v_sb.matrix();
        HermitianOperator::from_trusted(m)
    }
}

/// Per-α quantities of an open run at one sample time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenAlphaSample {
    pub alpha: f64,
    pub s_joint: f64,
    pub s_system: f64,
    pub s_bath: f64,
    /// Rényi MI of the joint outcome distribution, from its own marginals.
    pub mi: f64,
    pub xi1: f64,
    pub xi2: f64,
    /// `S_joint − (S_s + S_b − I)`.
    pub factorization_residual: f64,
    /// `S^α(ρ_s) + S^α(ρ_b) − S^α(ρ_sb)`, diagnostic only.
    pub quantum_mi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenSample {
    pub t: f64,
    /// Effective inverse temperature of the reduced bath state, when defined.
    pub bath_beta: Option<f64>,
    pub per_alpha: Vec<OpenAlphaSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenRunRecord {
    pub guarantee_void: bool,
    pub premise: CoarseGrainedReport,
    /// All joint volumes equal, where the factorization is exact.
    pub uniform_volumes: bool,
    pub samples: Vec<OpenSample>,
    pub findings: Vec<Finding>,
}

impl OpenRunRecord {
    pub fn min_xi1(&self, alpha: f64) -> Option<f64> {
        self.samples
            .iter()
            .flat_map(|s| &s.per_alpha)
            .filter(|a| a.alpha == alpha)
            .map(|a| a.xi1)
            .reduce(f64::min)
    }
}

/// Joint evolution of `ρ_s0 ⊗ γ_b(β)` with the product coarse-graining
/// `Π_s ⊗ Π_{E_b}`.
/// Row and column sums of a joint distribution stored system-major.
fn marginals(joint: &[f64], ns: usize, nb: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if joint.len() != ns * nb {
        return Err(Error::LengthMismatch {
            left: joint.len(),
            right: ns * nb,
        });
    }
    let mut a = vec![0.0; ns];
    let mut b = vec![0.0; nb];
    for (k, p) in joint.iter().enumerate() {
        a[k / nb] += p;
        b[k % nb] += p;
    }
    Ok((a, b))
}

pub fn open_run(
    sys: &OpenSystem,
    rho_s0: &DensityOperator,
    bath_beta: f64,
    windowing: &EnergyWindowing,
    alphas: &[f64],
    times: &[f64],
) -> Result<OpenRunRecord> {
    let (ds, db) = sys.dims();
    if rho_s0.dim() != ds {
        return Err(Error::DimensionMismatch {
            expected: ds,
            found: rho_s0.dim(),
        });
    }
    check_alphas(alphas)?;
    check_times(times)?;
    let bath_cg = energy_cg(&sys.h_b, windowing);
    let joint_cg = tensor_cg(&[sys.system_cg.clone(), bath_cg.clone()])?;
    let rho0 = rho_s0.tensor(&gibbs_state(&sys.h_b, bath_beta)?);
    let premise = is_coarse_grained(&joint_cg, &rho0, alphas[0])?;
    let guarantee_void = !premise.state_test;
    let vols = joint_cg.volumes();
    let uniform_volumes = vols.iter().all(|v| (v - vols[0]).abs() <= 1e-9);
    let prop = Propagator::new(&sys.joint_hamiltonian());

    let mut samples = Vec::with_capacity(times.len());
    let mut findings = Vec::new();
    let mut initial: Option<Vec<(f64, f64, f64)>> = None;
    for &t in times {
        let rho = prop.evolve(&rho0, t)?;
        let rho_s = partial_trace(&rho, (ds, db), Subsystem::A)?;
        let rho_b = partial_trace(&rho, (ds, db), Subsystem::B)?;
        let joint = outcomes(&joint_cg, &rho)?;
        let ps = outcomes(&sys.system_cg, &rho_s)?;
        let pb = outcomes(&bath_cg, &rho_b)?;
        let (marg_s, marg_b) = marginals(
            joint.probabilities(),
            ps.probabilities().len(),
            pb.probabilities().len(),
        )?;
        let bath_beta_t = effective_beta(&sys.h_b, &rho_b).ok().map(|e| e.beta);
        let mut current = Vec::with_capacity(alphas.len());
        for &a in alphas {
            current.push((joint.alpha_entropy(a)?, ps.alpha_entropy(a)?, pb.alpha_entropy(a)?));
        }
        let base = initial.get_or_insert_with(|| current.clone()).clone();
        let mut per_alpha = Vec::with_capacity(alphas.len());
        for (k, &alpha) in alphas.iter().enumerate() {
            let (sj, ss, sb) = current[k];
            let mi = classical_renyi_entropy(&marg_s, alpha)? + classical_renyi_entropy(&marg_b, alpha)?
                - classical_renyi_entropy(joint.probabilities(), alpha)?;
            let quantum_mi = renyi_mutual_info(&rho, (ds, db), alpha)?;
            let xi1 = sj - base[k].0;
            let xi2 = (ss - base[k].1) + (sb - base[k].2);
            let factorization_residual = sj - (ss + sb - mi);
            let mut note = |kind, value| {
                findings.push(Finding {
                    kind,
                    t,
                    alpha: Some(alpha),
                    value,
                })
            };
            if !guarantee_void && xi1 < -PRODUCTION_TOL {
                note(FindingKind::Xi1Violation, xi1);
            }
            if xi2 < -PRODUCTION_TOL {
                note(FindingKind::Xi2Negative, xi2);
            }
            if mi < -PRODUCTION_TOL {
                note(FindingKind::MutualInformationNegative, mi);
            }
            if quantum_mi < -PRODUCTION_TOL {
                note(FindingKind::QuantumMutualInformationNegative, quantum_mi);
            }
            if uniform_volumes && factorization_residual.abs() > PRODUCTION_TOL {
                note(FindingKind::FactorizationResidual, factorization_residual);
            }
            per_alpha.push(OpenAlphaSample {
                alpha,
                s_joint: sj,
                s_system: ss,
                s_bath: sb,
                mi,
                xi1,
                xi2,
                factorization_residual,
                quantum_mi,
            });
        }
        samples.push(OpenSample {
            t,
            bath_beta: bath_beta_t,
            per_alpha,
        });
    }
    Ok(OpenRunRecord {
        guarantee_void,
        premise,
        uniform_volumes,
        samples,
        findings,
    })
}

/// Energy levels sharing a common outcome volume `V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSystem {
    energies: Vec<f64>,
    volume: f64,
}

impl LevelSystem {
    pub fn new(energies: Vec<f64>, volume: f64) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidLevels("no energies".into()));
        }
        if let Some(e) = energies.iter().find(|e| !e.is_finite()) {
            return Err(Error::InvalidLevels(format!("non-finite energy {e}")));
        }
        if !(volume.is_finite() && volume > 0.0) {
            return Err(Error::InvalidLevels(format!("volume {volume} must be positive")));
        }
        Ok(Self { energies, volume })
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }

    fn ln_z(&self, temperature: f64) -> f64 {
        let x: Vec<f64> = self.energies.iter().map(|e| -e / temperature).collect();
        let m = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        m + x.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
    }

    /// Gibbs probabilities at temperature `T`.
    pub fn gibbs(&self, temperature: f64) -> Vec<f64> {
        let ln_z = self.ln_z(temperature);
        self.energies.iter().map(|e| (-e / temperature - ln_z).exp()).collect()
    }
}

/// `Z`, `Z̃ = V·Z`, `A = −T ln Z`, `Ã = −T ln Z̃`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeEnergy {
    pub z: f64,
    pub z_tilde: f64,
    pub a: f64,
    pub a_tilde: f64,
}

fn check_temperature(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTemperature(t))
    }
}

pub fn free_energy(levels: &LevelSystem, temperature: f64) -> Result<FreeEnergy> {
    check_temperature(temperature)?;
    let ln_z = levels.ln_z(temperature);
    let ln_zt = ln_z + levels.volume.ln();
    Ok(FreeEnergy {
        z: ln_z.exp(),
        z_tilde: ln_zt.exp(),
        a: -temperature * ln_z,
        a_tilde: -temperature * ln_zt,
    })
}

/// Both sides of `S^α_χ(ρ_{T₀}) = −(Ã(T₀/α) − Ã(T₀))/(T₀/α − T₀)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JacksonCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Evaluates the α-OE of the Gibbs distribution at `T₀` (outcome volumes `V`)
/// and the Jackson difference quotient of `Ã`. Near α = 1 the quotient is
/// replaced by its limit `−dÃ/dT`.
pub fn jackson_check(levels: &LevelSystem, t0: f64, alpha: f64) -> Result<JacksonCheck> {
    check_temperature(t0)?;
    check_alpha(alpha)?;
    let p = levels.gibbs(t0);
    let v = vec![levels.volume; p.len()];
    let lhs = classical_alpha_oe(&p, &v, alpha)?;
    let rhs = if crate::divergence::near_one(alpha) {
        let mean: f64 = p.iter().zip(&levels.energies).map(|(p, e)| p * e).sum();
        let f = free_energy(levels, t0)?;
        f.z_tilde.ln() + mean / t0
    } else {
        let t = t0 / alpha;
        let (f, f0) = (free_energy(levels, t)?, free_energy(levels, t0)?);
        -(f.a_tilde - f0.a_tilde) / (t - t0)
    };
    Ok(JacksonCheck {
        lhs,
        rhs,
        gap: lhs - rhs,
    })
}
