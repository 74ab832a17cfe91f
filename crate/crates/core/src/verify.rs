//! Seeded randomized property suites with deterministic JSON reports.
//!
//! A property observed on an instance yields a margin; the instance passes
//! when `margin ≥ −tolerance`. Hard properties decide the exit status, survey
//! properties are only reported.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};
use serde_json::{json, Value};

use crate::coarse::{
    alpha_derivative, alpha_oe, alpha_oe_divergence_form, alpha_oe_gap, check_refinement, coarsen, measurement_channel,
    merge_indices, observational_entropy, outcomes, refinement_gap_bound, sequential, tensor_cg, CoarseGraining,
    RefinementMap,
};
use crate::divergence::{
    classical_petz_renyi, petz_renyi, renyi_entropy, renyi_mutual_info, renyi_mutual_info_divergence, umegaki,
    von_neumann,
};
use crate::error::{Error, Result};
use crate::io::{CoarseGrainingJson, OperatorJson};
use crate::operator::{max_abs_diff, CMatrix, DensityOperator, HermitianOperator, Operator};
use crate::par::{map_indexed, Execution};
use crate::random::{
    random_basis_cg, random_density, random_hermitian, random_partition, random_povm, random_projective_cg,
    random_stochastic_map, rng_for,
};
use crate::state::{
    coarse_grained_state, conditional_ensemble, decompose_alpha_oe, is_coarse_grained, post_measurement_state,
    renyi_post_measurement,
};
use crate::thermo::{
    closed_run, gibbs_state, jackson_check, open_run, DrivingProtocol, EnergyWindowing, LevelSystem, OpenSystem,
};

/// α values used by most properties.
pub const ALPHA_GRID: [f64; 5] = [0.3, 0.7, 1.5, 2.0, 3.0];
/// Violations kept per property.
const MAX_VIOLATIONS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Divergences,
    OeCore,
    Sequential,
    Refinement,
    Decomposition,
    Thermo,
    All,
}

impl Suite {
    pub const INDIVIDUAL: [Suite; 6] = [
        Suite::Divergences,
        Suite::OeCore,
        Suite::Sequential,
        Suite::Refinement,
        Suite::Decomposition,
        Suite::Thermo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Divergences => "divergences",
            Suite::OeCore => "oe-core",
            Suite::Sequential => "sequential",
            Suite::Refinement => "refinement",
            Suite::Decomposition => "decomposition",
            Suite::Thermo => "thermo",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::INDIVIDUAL
            .into_iter()
            .chain([Suite::All])
            .find(|x| x.name() == s)
            .ok_or_else(|| {
                format!("unknown suite {s:?}; expected one of divergences, oe-core, sequential, refinement, decomposition, thermo, all")
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub n: usize,
    pub max_dim: usize,
    /// Multiplies every property tolerance.
    pub tolerance_scale: f64,
    pub execution: Execution,
    /// Adds a non-stochastic refinement map to every refinement instance.
    pub inject_invalid_refinement: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            n: 200,
            max_dim: 6,
            tolerance_scale: 1.0,
            execution: Execution::Parallel,
            inject_invalid_refinement: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Hard,
    Survey,
}

/// A margin that serializes as a number, or as `"INFINITE"`, `"-INFINITE"`,
/// `"NaN"` when not finite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Margin(pub f64);

impl Serialize for Margin {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("NaN")
        } else if x > 0.0 {
            s.serialize_str("INFINITE")
        } else {
            s.serialize_str("-INFINITE")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub instance: usize,
    pub margin: Margin,
    pub input: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub name: String,
    pub mode: Mode,
    pub tolerance: f64,
    pub instances: usize,
    pub pass: usize,
    pub fail: usize,
    pub worst_margin: Margin,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub seed: u64,
    pub instances: usize,
    pub max_dim: usize,
    pub tolerance_scale: f64,
    pub passed: bool,
    pub properties: Vec<PropertyReport>,
}

impl Report {
    /// 0 when every hard property passed, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            2
        }
    }

    pub fn property(&self, name: &str) -> Option<&PropertyReport> {
        self.properties.iter().find(|p| p.name == name)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone)]
struct Observation {
    name: &'static str,
    mode: Mode,
    tolerance: f64,
    margin: f64,
}

#[derive(Default)]
struct Recorder {
    obs: Vec<Observation>,
    input: Value,
}

impl Recorder {
    fn record(&mut self, name: &'static str, mode: Mode, tolerance: f64, margin: f64) {
        self.obs.push(Observation {
            name,
            mode,
            tolerance,
            margin,
        });
    }

    fn hard(&mut self, name: &'static str, tolerance: f64, margin: f64) {
        self.record(name, Mode::Hard, tolerance, margin);
    }

    fn survey(&mut self, name: &'static str, tolerance: f64, margin: f64) {
        self.record(name, Mode::Survey, tolerance, margin);
    }

    fn hard_eq(&mut self, name: &'static str, tolerance: f64, a: f64, b: f64) {
        self.hard(name, tolerance, -(a - b).abs());
    }
}

struct InstanceOutcome {
    obs: Vec<Observation>,
    input: Value,
}

fn rho_json(rho: &DensityOperator) -> Value {
    json!(OperatorJson::from_matrix(rho.matrix()))
}

fn cg_json(cg: &CoarseGraining) -> Value {
    json!(CoarseGrainingJson::from_cg(cg))
}

fn pick_dim(rng: &mut ChaCha8Rng, min: usize, max: usize) -> usize {
    let max = max.max(min);
    rng.random_range(min..=max)
}

/// Full-rank or rank-deficient state, chosen at random.
fn any_density(rng: &mut ChaCha8Rng, dim: usize) -> DensityOperator {
    let rank = if rng.random_bool(0.25) {
        Some(rng.random_range(1..=dim))
    } else {
        None
    };
    random_density(rng, dim, rank)
}

fn any_cg(rng: &mut ChaCha8Rng, dim: usize) -> CoarseGraining {
    match rng.random_range(0..3) {
        0 => random_projective_cg(rng, dim),
        1 => random_basis_cg(rng, dim),
        _ => {
            let n = rng.random_range(2..=dim + 2);
            random_povm(rng, dim, n)
        }
    }
}

/// Runs one suite (or all of them) and aggregates the report.
pub fn run(suite: Suite, opts: &VerifyOptions) -> Report {
    let suites: Vec<Suite> = match suite {
        Suite::All => Suite::INDIVIDUAL.to_vec(),
        s => vec![s],
    };
    let mut properties: Vec<PropertyReport> = Vec::new();
    for s in suites {
        let outcomes = map_indexed(opts.n, opts.execution, |i| run_instance(s, i, opts));
        for (i, out) in outcomes.iter().enumerate() {
            aggregate(&mut properties, s, i, out, opts.tolerance_scale);
        }
    }
    let passed = properties.iter().all(|p| p.mode == Mode::Survey || p.fail == 0);
    Report {
        suite: suite.name().to_string(),
        seed: opts.seed,
        instances: opts.n,
        max_dim: opts.max_dim,
        tolerance_scale: opts.tolerance_scale,
        passed,
        properties,
    }
}

fn aggregate(props: &mut Vec<PropertyReport>, suite: Suite, instance: usize, out: &InstanceOutcome, scale: f64) {
    // Collapse repeated observations of a property within one instance.
    let mut merged: Vec<Observation> = Vec::new();
    for o in &out.obs {
        match merged.iter_mut().find(|m| m.name == o.name) {
            Some(m) => {
                if o.margin.is_nan() || o.margin < m.margin {
                    m.margin = o.margin;
                }
            }
            None => merged.push(o.clone()),
        }
    }
    for o in merged {
        let name = format!("{}/{}", suite.name(), o.name);
        let tolerance = o.tolerance * scale;
        let idx = match props.iter().position(|p| p.name == name) {
            Some(i) => i,
            None => {
                props.push(PropertyReport {
                    name,
                    mode: o.mode,
                    tolerance,
                    instances: 0,
                    pass: 0,
                    fail: 0,
                    worst_margin: Margin(f64::INFINITY),
                    violations: Vec::new(),
                });
                props.len() - 1
            }
        };
        let p = &mut props[idx];
        p.instances += 1;
        let w = p.worst_margin.0;
        if !w.is_nan() && (o.margin.is_nan() || o.margin < w) {
            p.worst_margin = Margin(o.margin);
        }
        if o.margin >= -tolerance {
            p.pass += 1;
        } else {
            p.fail += 1;
            if p.violations.len() < MAX_VIOLATIONS {
                p.violations.push(Violation {
                    instance,
                    margin: Margin(o.margin),
                    input: out.input.clone(),
                });
            }
        }
    }
}

fn run_instance(suite: Suite, index: usize, opts: &VerifyOptions) -> InstanceOutcome {
    let mut rng = rng_for(opts.seed, suite.name(), index as u64);
    let mut rec = Recorder::default();
    let result = match suite {
        Suite::Divergences => divergences(&mut rng, opts, &mut rec),
        Suite::OeCore => oe_core(&mut rng, opts, &mut rec),
        Suite::Sequential => sequential_suite(&mut rng, index, opts, &mut rec),
        Suite::Refinement => refinement(&mut rng, opts, &mut rec),
        Suite::Decomposition => decomposition(&mut rng, opts, &mut rec),
        Suite::Thermo => thermo(&mut rng, index, &mut rec),
        Suite::All => unreachable!("expanded by run"),
    };
    if let Err(e) = result {
        rec.hard("instance_error", 0.0, f64::NEG_INFINITY);
        if let Value::Object(map) = &mut rec.input {
            map.insert("error".into(), json!(e.to_string()));
        } else {
            rec.input = json!({ "error": e.to_string() });
        }
    }
    InstanceOutcome {
        obs: rec.obs,
        input: rec.input,
    }
}

fn divergences(rng: &mut ChaCha8Rng, opts: &VerifyOptions, rec: &mut Recorder) -> Result<()> {
    let d = pick_dim(rng, 1, opts.max_dim);
    let rho = any_density(rng, d);
    let sigma = random_density(rng, d, None);
    let cg = any_cg(rng, d);
    rec.input = json!({ "dim": d, "rho": rho_json(&rho), "sigma": rho_json(&sigma), "cg": cg_json(&cg) });

    let mut prev: Option<f64> = None;
    for &a in &ALPHA_GRID {
        let dq = petz_renyi(&rho, &sigma, a)?.value();
        rec.hard("nonnegativity", 1e-10, dq);
        if let Some(p) = prev {
            rec.hard("alpha_ordering", 1e-10, dq - p);
        }
        prev = Some(dq);
        let p = measurement_channel(&cg, &rho)?.weights;
        let q = measurement_channel(&cg, &sigma)?.weights;
        let dc = classical_petz_renyi(&p, &q, a)?.value();
        rec.hard("measurement_dpi", 1e-10, dq - dc);
    }

    let s = von_neumann(&rho);
    let u = umegaki(&rho, &sigma)?.value();
    for a in [1.0 - 1e-7, 1.0 + 1e-7] {
        rec.hard_eq("renyi_von_neumann_limit", 1e-5, renyi_entropy(&rho, a)?, s);
        rec.hard_eq("petz_umegaki_limit", 1e-5, petz_renyi(&rho, &sigma, a)?.value(), u);
    }
    // Just outside the delegation window the slope is half the variance of
    // the log-spectrum, which small eigenvalues make large.
    for a in [1.0 - 2e-6, 1.0 + 2e-6] {
        rec.survey("renyi_formula_near_one", 1e-5, -(renyi_entropy(&rho, a)? - s).abs());
        rec.survey(
            "petz_formula_near_one",
            1e-5,
            -(petz_renyi(&rho, &sigma, a)?.value() - u).abs(),
        );
    }

    let db = pick_dim(rng, 2, 3);
    let joint = any_density(rng, 2 * db);
    if let Value::Object(map) = &mut rec.input {
        map.insert("joint".into(), rho_json(&joint));
        map.insert("joint_dims".into(), json!([2, db]));
    }
    for a in [0.5, 2.0, 3.0] {
        let i = renyi_mutual_info(&joint, (2, db), a)?;
        rec.survey("mutual_info_sign", 1e-10, i);
        let idiv = renyi_mutual_info_divergence(&joint, (2, db), a)?.value();
        rec.survey("mutual_info_forms_agree", 1e-9, -(i - idiv).abs());
    }
    Ok(())
}

fn oe_core(rng: &mut ChaCha8Rng, opts: &VerifyOptions, rec: &mut Recorder) -> Result<()> {
    let d = pick_dim(rng, 1, opts.max_dim);
    let rho = any_density(rng, d);
    let full = random_density(rng, d, None);
    let cg = any_cg(rng, d);
    let other = random_density(rng, d, None);
    let lambda: f64 = rng.random_range(0.05..0.95);
    rec.input = json!({
        "dim": d, "rho": rho_json(&rho), "full_rank_rho": rho_json(&full),
        "mixing_partner": rho_json(&other), "lambda": lambda, "cg": cg_json(&cg),
    });

    let s1 = observational_entropy(&cg, &rho)?;
    for a in [1.0 - 1e-7, 1.0 + 1e-7] {
        rec.hard_eq("alpha_one_limit", 1e-5, alpha_oe(&cg, &rho, a)?, s1);
    }
    let logd = (d as f64).ln();
    let mut prev: Option<f64> = None;
    for &a in &ALPHA_GRID {
        let s = alpha_oe(&cg, &rho, a)?;
        let sr = renyi_entropy(&rho, a)?;
        rec.hard_eq("divergence_form", 1e-10, alpha_oe_divergence_form(&cg, &rho, a)?, s);
        let gap = alpha_oe_gap(&cg, &rho, a)?;
        rec.hard_eq("gap_identity", 1e-10, gap, s - sr);
        rec.hard("gap_nonnegative", 1e-10, gap);
        rec.hard("upper_bound_log_d", 1e-10, logd - s);
        rec.hard("lower_bound_renyi", 1e-10, s - sr);
        if let Some(p) = prev {
            rec.hard("alpha_ordering", 1e-10, p - s);
        }
        prev = Some(s);

        let h = 1e-5;
        let fd = (alpha_oe(&cg, &full, a + h)? - alpha_oe(&cg, &full, a - h)?) / (2.0 * h);
        let dv = alpha_derivative(&cg, &full, a)?;
        let abs = (dv - fd).abs();
        let rel = abs / fd.abs().max(f64::MIN_POSITIVE);
        rec.hard("derivative_finite_difference", 1e-5, -rel.min(abs * 1e5));
        rec.hard("derivative_sign", 1e-12, -dv);

        let mix = rho.mix(&other, lambda)?;
        let (sa, sb, sm) = (s, alpha_oe(&cg, &other, a)?, alpha_oe(&cg, &mix, a)?);
        if a < 1.0 {
            rec.hard("concavity", 1e-10, sm - lambda * sa - (1.0 - lambda) * sb);
        } else {
            rec.hard("quasi_concavity", 1e-10, sm - sa.min(sb));
        }
    }

    // products on 2 × 3
    let (ra, rb) = (any_density(rng, 2), any_density(rng, 3));
    let (ca, cb) = (any_cg(rng, 2), any_cg(rng, 3));
    let prod = tensor_cg(&[ca.clone(), cb.clone()])?;
    let joint = ra.tensor(&rb);
    for &a in &ALPHA_GRID {
        let lhs = alpha_oe(&prod, &joint, a)?;
        rec.hard_eq("additivity", 1e-9, lhs, alpha_oe(&ca, &ra, a)? + alpha_oe(&cb, &rb, a)?);
    }
    Ok(())
}

fn sequential_suite(rng: &mut ChaCha8Rng, index: usize, opts: &VerifyOptions, rec: &mut Recorder) -> Result<()> {
    let d = pick_dim(rng, 2, opts.max_dim);
    let chain: Vec<CoarseGraining> = (0..4)
        .map(|k| {
            if k == 0 {
                random_projective_cg(rng, d)
            } else {
                any_cg(rng, d)
            }
        })
        .collect();
    let raw = random_density(rng, d, None);
    // Even instances start from a state coarse-grained by the first element,
    // where the equality condition holds.
    let rho = if index.is_multiple_of(2) {
        coarse_grained_state(&chain[0], &raw)?
    } else {
        raw
    };
    rec.input = json!({
        "dim": d, "rho": rho_json(&rho),
        "chain": chain.iter().map(cg_json).collect::<Vec<_>>(),
    });

    let mut composed = vec![chain[0].clone()];
    for cg in &chain[1..] {
        let next = sequential(composed.last().expect("non-empty"), cg)?;
        composed.push(next);
    }
    // Σ_j Π_ij = Π_i for the first composition
    let first = &composed[0];
    let second = &composed[1];
    let mut residual: f64 = 0.0;
    for (i, e) in first.effects().iter().enumerate() {
        let label = &first.labels()[i];
        let sum = second
            .labels()
            .iter()
            .zip(second.effects())
            .filter(|(l, _)| l.starts_with(&format!("({label},")))
            .fold(CMatrix::zeros(d, d), |acc, (_, m)| acc + m.matrix());
        residual = residual.max(max_abs_diff(&sum, e.matrix()));
    }
    rec.hard("marginal_effects", 1e-8, -residual);

    for &a in &ALPHA_GRID {
        let s: Vec<f64> = composed.iter().map(|c| alpha_oe(c, &rho, a)).collect::<Result<_>>()?;
        let sr = renyi_entropy(&rho, a)?;
        rec.hard("monotone_under_composition", 1e-10, s[0] - s[1]);
        for w in s.windows(2) {
            rec.hard("chain_monotone", 1e-10, w[0] - w[1]);
        }
        rec.hard("chain_above_renyi", 1e-10, s[3] - sr);

        let (p1, p2) = (outcomes(first, &rho)?, outcomes(second, &rho)?);
        let mut cond: f64 = 0.0;
        for (j, label) in second.labels().iter().enumerate() {
            let parent = label[1..].split(',').next().unwrap_or_default();
            let i = first.index_of(parent).expect("parent label exists");
            let lhs = p2.probabilities()[j] / p2.volumes()[j];
            let rhs = p1.probabilities()[i] / p1.volumes()[i];
            cond = cond.max((lhs - rhs).abs());
        }
        let diff = (s[0] - s[1]).abs();
        if cond <= 1e-10 {
            rec.hard("equality_condition_sufficient", 1e-9, -diff);
        } else if diff <= 1e-9 {
            rec.survey("equality_condition_converse", 1e-10, -cond);
        }
    }
    Ok(())
}

fn refinement(rng: &mut ChaCha8Rng, opts: &VerifyOptions, rec: &mut Recorder) -> Result<()> {
    let d = pick_dim(rng, 2, opts.max_dim);
    let fine = any_cg(rng, d);
    let rho = any_density(rng, d);
    let merge = rng.random_bool(0.5);
    let (coarse, m) = if merge {
        let groups = random_partition(rng, fine.len());
        merge_indices(&fine, &groups)?
    } else {
        let cols = rng.random_range(1..=fine.len());
        coarsen(&fine, &random_stochastic_map(rng, fine.len(), cols))?
    };
    rec.input = json!({
        "dim": d, "rho": rho_json(&rho), "fine": cg_json(&fine), "coarse": cg_json(&coarse),
        "map": m.to_rows(), "construction": if merge { "merge" } else { "stochastic" },
    });

    if opts.inject_invalid_refinement {
        let rows: Vec<Vec<f64>> = (0..fine.len()).map(|_| vec![0.65; coarse.len()]).collect();
        match RefinementMap::new(rows) {
            Err(Error::NotARefinement { residual, reason }) => {
                rec.hard("refinement_map_valid", 0.0, -residual);
                if let Value::Object(map) = &mut rec.input {
                    map.insert("injected".into(), json!(format!("NotARefinement: {reason}")));
                }
            }
            Err(e) => return Err(e),
            Ok(_) => rec.hard("refinement_map_valid", 0.0, 0.0),
        }
    }

    let check = check_refinement(&fine, &coarse, &m)?;
    rec.hard("refinement_relation", 1e-8, -check.max_residual);
    let triv = CoarseGraining::trivial(d);
    let to_one = RefinementMap::new(vec![vec![1.0]; fine.len()])?;
    for &a in &ALPHA_GRID {
        let gap = alpha_oe(&coarse, &rho, a)? - alpha_oe(&fine, &rho, a)?;
        if a > 1.0 {
            rec.hard("monotonicity", 1e-10, gap);
            let bound = refinement_gap_bound(&fine, &coarse, &m, &rho, a)?.value();
            rec.hard("gap_bound", 1e-10, gap - bound);
            let tgap = alpha_oe(&triv, &rho, a)? - alpha_oe(&fine, &rho, a)?;
            let tb = refinement_gap_bound(&fine, &triv, &to_one, &rho, a)?.value();
            rec.hard_eq("trivial_bound_equality", 1e-9, tgap, tb);
        } else {
            rec.survey("monotonicity_alpha_below_one", 1e-10, gap);
        }
    }
    Ok(())
}

fn decomposition(rng: &mut ChaCha8Rng, opts: &VerifyOptions, rec: &mut Recorder) -> Result<()> {
    let d = pick_dim(rng, 1, opts.max_dim);
    let cg = random_projective_cg(rng, d);
    let n_effects = rng.random_range(2..=d + 2);
    let povm = random_povm(rng, d, n_effects);
    let rho = any_density(rng, d);
    let sigma = random_density(rng, d, None);
    let eps: f64 = rng.random_range(0.05..0.5);
    rec.input = json!({
        "dim": d, "rho": rho_json(&rho), "cg": cg_json(&cg), "povm": cg_json(&povm),
        "perturbation": rho_json(&sigma), "epsilon": eps,
    });

    let post = post_measurement_state(&cg, &rho)?;
    for a in [0.5, 2.0, 3.0] {
        let direct = renyi_entropy(&post, a)?;
        rec.hard_eq(
            "post_measurement_identity",
            1e-9,
            renyi_post_measurement(&cg, &rho, a)?,
            direct,
        );
        let (pt, dt) = decompose_alpha_oe(&cg, &rho, a)?;
        let s = alpha_oe(&cg, &rho, a)?;
        rec.hard_eq("alpha_oe_decomposition", 1e-9, pt + dt, s);
        let sr = renyi_entropy(&rho, a)?;
        rec.hard_eq("gap_assembly", 1e-9, s - sr, (pt - sr) + dt);

        let povm_post = renyi_entropy(&post_measurement_state(&povm, &rho)?, a)?;
        rec.survey(
            "post_measurement_identity_povm",
            1e-9,
            -(renyi_post_measurement(&povm, &rho, a)? - povm_post).abs(),
        );
        let ens = conditional_ensemble(&povm, &rho)?;
        let mut div = 0.0;
        for e in &ens.entries {
            div += e.probability * petz_renyi(&e.state, &e.reference, a)?.value();
        }
        rec.survey(
            "alpha_oe_decomposition_povm",
            1e-9,
            -(povm_post + div - alpha_oe(&povm, &rho, a)?).abs(),
        );
    }

    let equal = coarse_grained_state(&cg, &rho)?;
    let perturbed = equal.mix(&sigma, 1.0 - eps)?;
    let perturbed_far = max_abs_diff(perturbed.matrix(), coarse_grained_state(&cg, &perturbed)?.matrix()) >= 1e-3;
    for a in [0.5, 2.0, 3.0] {
        let r = is_coarse_grained(&cg, &equal, a)?;
        rec.hard(
            "equality_case_detected",
            0.0,
            if r.state_test && r.entropy_test { 0.0 } else { -1.0 },
        );
        rec.hard("criterion_agreement", 0.0, if r.agree { 0.0 } else { -1.0 });
        if perturbed_far {
            let r = is_coarse_grained(&cg, &perturbed, a)?;
            rec.hard(
                "perturbed_case_rejected",
                0.0,
                if !r.state_test && !r.entropy_test { 0.0 } else { -1.0 },
            );
            rec.hard("criterion_agreement", 0.0, if r.agree { 0.0 } else { -1.0 });
        }
    }
    Ok(())
}

fn nondegenerate_levels(rng: &mut ChaCha8Rng, n: usize, min_gap: f64) -> Vec<f64> {
    let mut e = vec![0.0];
    for _ in 1..n {
        let last = *e.last().expect("non-empty");
        e.push(last + min_gap + rng.random_range(0.0..1.0));
    }
    e
}

fn thermo(rng: &mut ChaCha8Rng, index: usize, rec: &mut Recorder) -> Result<()> {
    let alphas = [0.5, 1.0 + 1e-7, 2.0, 3.0];
    // Jackson identity
    let n_levels = rng.random_range(1..=8);
    let energies: Vec<f64> = (0..n_levels).map(|_| rng.random_range(0.0..3.0)).collect();
    let volume = f64::from(rng.random_range(1u32..=4));
    let t0: f64 = rng.random_range(0.3..3.0);
    let levels = LevelSystem::new(energies.clone(), volume)?;

    // Closed quench on a qubit or qutrit
    let d = if index.is_multiple_of(2) { 2 } else { 3 };
    let h0 = HermitianOperator::from_diagonal(&nondegenerate_levels(rng, d, 0.05));
    let h1 = random_hermitian(rng, d, 1.0);
    let beta0: f64 = rng.random_range(0.2..2.0);
    let durations = (rng.random_range(0.2..2.0), rng.random_range(1.0..4.0));

    // Open system: qubit + nondegenerate bath
    let db = rng.random_range(2..=6);
    let hs = HermitianOperator::from_diagonal(&[0.0, rng.random_range(0.5..1.5)]);
    let hb = HermitianOperator::from_diagonal(&nondegenerate_levels(rng, db, 0.05));
    let coupling: f64 = rng.random_range(0.0..0.2);
    let v = random_hermitian(rng, 2 * db, coupling);
    let p0: f64 = rng.random_range(0.5..1.0);
    let bath_beta: f64 = rng.random_range(0.2..2.0);

    rec.input = json!({
        "levels": { "energies": energies, "volume": volume }, "t0": t0,
        "closed": {
            "h0": OperatorJson::from_matrix(h0.matrix()), "h1": OperatorJson::from_matrix(h1.matrix()),
            "beta0": beta0, "durations": [durations.0, durations.1],
        },
        "open": {
            "h_s": OperatorJson::from_matrix(hs.matrix()), "h_b": OperatorJson::from_matrix(hb.matrix()),
            "v_sb": OperatorJson::from_matrix(v.matrix()), "p0": p0, "bath_beta": bath_beta,
        },
    });

    for a in [0.5, 2.0, 3.0, 5.0] {
        rec.hard("jackson_identity", 1e-9, -jackson_check(&levels, t0, a)?.gap.abs());
    }

    let protocol = DrivingProtocol::new(vec![(h0.clone(), durations.0), (h1, durations.1)])?;
    let rho0 = gibbs_state(&h0, beta0)?;
    let times: Vec<f64> = (0..10).map(|k| k as f64 * (durations.0 + durations.1) / 9.0).collect();
    let window = EnergyWindowing::new(0.01)?;
    match closed_run(&protocol, &rho0, &window, &alphas, &times) {
        Ok(run) => {
            for s in &run.samples {
                for a in &s.per_alpha {
                    if !run.guarantee_void {
                        rec.hard("closed_second_law", 1e-9, a.ds);
                    }
                    rec.survey("gibbs_max_monitor", 1e-9, a.renyi_gibbs - a.s_oe);
                    if a.gibbs_max_holds {
                        rec.hard("clausius_xi3", 1e-9, a.xi3);
                    }
                }
            }
        }
        Err(Error::EnergyOutOfRange { .. }) | Err(Error::NoConvergence { .. }) => {
            rec.survey("closed_effective_temperature_defined", 0.0, -1.0);
        }
        Err(e) => return Err(e),
    }

    let sys = OpenSystem::new(hs, hb, v, CoarseGraining::computational_basis(2))?;
    let rho_s0 = DensityOperator::from_diagonal(&[p0, 1.0 - p0])?;
    let run = open_run(&sys, &rho_s0, bath_beta, &window, &alphas, &times)?;
    for s in &run.samples {
        for a in &s.per_alpha {
            if !run.guarantee_void {
                rec.hard("open_xi1", 1e-9, a.xi1);
            }
            if run.uniform_volumes {
                rec.hard("open_factorization", 1e-9, -a.factorization_residual.abs());
            } else {
                rec.survey("open_factorization_nonuniform", 1e-9, -a.factorization_residual.abs());
            }
            if (a.alpha - 1.0).abs() < 1e-6 {
                rec.hard("open_xi2_alpha_one", 1e-9, a.xi2);
            } else {
                rec.survey("open_xi2", 1e-9, a.xi2);
            }
            rec.survey("outcome_mutual_info_sign", 1e-9, a.mi);
            rec.survey("quantum_mutual_info_sign", 1e-9, a.quantum_mi);
        }
    }
    Ok(())
}
