//! JSON schemas for operators, coarse-grainings, level systems and run
//! configurations, and the CSV writer for run records.
//!
//! Matrices are encoded row-major as `[[[re, im], ...], ...]`:
//!
//! ```json
//! {"dim": 2, "entries": [[[0.5, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]]}
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coarse::CoarseGraining;
use crate::error::{Error, Result};
use crate::operator::{c64, CMatrix, DensityOperator, HermitianOperator, Operator};
use crate::random::{random_hermitian, rng_for};
use crate::thermo::{
    gibbs_state, ClosedRunRecord, DrivingProtocol, EnergyWindowing, LevelSystem, OpenRunRecord, OpenSystem,
};
use crate::tolerance::Tolerances;

pub type Entries = Vec<Vec<[f64; 2]>>;

/// `{"dim": n, "entries": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorJson {
    pub dim: usize,
    pub entries: Entries,
}

impl OperatorJson {
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self {
            dim: m.nrows(),
            entries: entries_of(m),
        }
    }

    pub fn to_matrix(&self) -> Result<CMatrix> {
        matrix_from_entries(&self.entries, Some(self.dim))
    }
}

fn entries_of(m: &CMatrix) -> Entries {
    m.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

fn matrix_from_entries(entries: &Entries, dim: Option<usize>) -> Result<CMatrix> {
    let rows = entries.len();
    let cols = entries.first().map_or(0, Vec::len);
    if let Some(row) = entries.iter().find(|r| r.len() != cols) {
        return Err(Error::Schema(format!(
            "ragged matrix: row of length {} in a matrix with {cols} columns",
            row.len()
        )));
    }
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if let Some(d) = dim {
        if d != rows {
            return Err(Error::Schema(format!("declared dim {d} but matrix is {rows}x{cols}")));
        }
    }
    if rows == 0 {
        return Err(Error::Schema("empty matrix".into()));
    }
    for (r, row) in entries.iter().enumerate() {
        for (c, z) in row.iter().enumerate() {
            if !(z[0].is_finite() && z[1].is_finite()) {
                return Err(Error::NonFinite { row: r, col: c });
            }
        }
    }
    Ok(CMatrix::from_fn(rows, cols, |r, c| {
        c64(entries[r][c][0], entries[r][c][1])
    }))
}

pub fn parse_operator(text: &str) -> Result<CMatrix> {
    serde_json::from_str::<OperatorJson>(text)?.to_matrix()
}

pub fn operator_to_string(m: &CMatrix) -> String {
    serde_json::to_string_pretty(&OperatorJson::from_matrix(m)).expect("plain data serializes")
}

pub fn read_density(path: &Path, tol: &Tolerances) -> Result<DensityOperator> {
    DensityOperator::with_tolerances(parse_operator(&fs::read_to_string(path)?)?, tol)
}

pub fn read_hermitian(path: &Path, tol: &Tolerances) -> Result<HermitianOperator> {
    HermitianOperator::with_tolerances(parse_operator(&fs::read_to_string(path)?)?, tol)
}

/// An effect matrix given either as a bare entries array or as an operator
/// object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixJson {
    Entries(Entries),
    Operator(OperatorJson),
}

impl MatrixJson {
    fn to_matrix(&self, dim: usize) -> Result<CMatrix> {
        match self {
            MatrixJson::Entries(e) => matrix_from_entries(e, Some(dim)),
            MatrixJson::Operator(o) => {
                if o.dim != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: o.dim,
                    });
                }
                o.to_matrix()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffectJson {
    pub label: String,
    pub matrix: MatrixJson,
}

/// `{"dim": n, "effects": [{"label": str, "matrix": ...}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoarseGrainingJson {
    pub dim: usize,
    pub effects: Vec<EffectJson>,
}

impl CoarseGrainingJson {
    pub fn from_cg(cg: &CoarseGraining) -> Self {
        Self {
            dim: cg.dim(),
            effects: cg
                .labels()
                .iter()
                .zip(cg.effects())
                .map(|(l, e)| EffectJson {
                    label: l.clone(),
                    matrix: MatrixJson::Entries(entries_of(e.matrix())),
                })
                .collect(),
        }
    }

    pub fn to_cg(&self, tol: &Tolerances) -> Result<CoarseGraining> {
        let labels = self.effects.iter().map(|e| e.label.clone()).collect();
        let effects = self
            .effects
            .iter()
            .map(|e| e.matrix.to_matrix(self.dim))
            .collect::<Result<_>>()?;
        CoarseGraining::with_tolerances(labels, effects, tol)
    }
}

pub fn parse_cg(text: &str, tol: &Tolerances) -> Result<CoarseGraining> {
    serde_json::from_str::<CoarseGrainingJson>(text)?.to_cg(tol)
}

pub fn cg_to_string(cg: &CoarseGraining) -> String {
    serde_json::to_string_pretty(&CoarseGrainingJson::from_cg(cg)).expect("plain data serializes")
}

pub fn read_cg(path: &Path, tol: &Tolerances) -> Result<CoarseGraining> {
    parse_cg(&fs::read_to_string(path)?, tol)
}

/// `{"energies": [...], "volume": V}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsJson {
    pub energies: Vec<f64>,
    #[serde(default = "one")]
    pub volume: f64,
}

fn one() -> f64 {
    1.0
}

pub fn parse_levels(text: &str) -> Result<LevelSystem> {
    let l: LevelsJson = serde_json::from_str(text)?;
    LevelSystem::new(l.energies, l.volume)
}

pub fn read_levels(path: &Path) -> Result<LevelSystem> {
    parse_levels(&fs::read_to_string(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomHermitianSpec {
    pub dim: usize,
    #[serde(default = "one")]
    pub scale: f64,
}

/// A Hamiltonian given by file path (relative to the config), inline, or drawn
/// from the config seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSource {
    Path(String),
    Inline(OperatorJson),
    Random { random_hermitian: RandomHermitianSpec },
}

/// Initial states: a Gibbs state of the relevant Hamiltonian, a diagonal, or
/// any operator source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSource {
    Gibbs { gibbs_beta: f64 },
    Diagonal { diagonal: Vec<f64> },
    Operator(OperatorSource),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CgSource {
    Path(String),
    Inline(CoarseGrainingJson),
}

/// Either an explicit list or `count` evenly spaced points in `[start, end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimesSpec {
    List(Vec<f64>),
    Grid { start: f64, end: f64, count: usize },
}

impl TimesSpec {
    pub fn resolve(&self) -> Result<Vec<f64>> {
        match self {
            TimesSpec::List(v) => Ok(v.clone()),
            TimesSpec::Grid { start, end, count } => match count {
                0 => Err(Error::InvalidSampleTimes("count must be positive".into())),
                1 => Ok(vec![*start]),
                n => Ok((0..*n)
                    .map(|k| start + (end - start) * k as f64 / (*n - 1) as f64)
                    .collect()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentJson {
    pub hamiltonian: OperatorSource,
    pub duration: f64,
}

/// Configuration of `closed-sim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClosedConfig {
    pub protocol: Vec<SegmentJson>,
    pub initial_state: StateSource,
    pub delta: f64,
    #[serde(default)]
    pub origin: Option<f64>,
    pub alphas: Vec<f64>,
    pub times: TimesSpec,
    #[serde(default)]
    pub seed: u64,
}

/// Configuration of `open-sim`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpenConfig {
    pub h_s: OperatorSource,
    pub h_b: OperatorSource,
    pub v_sb: OperatorSource,
    #[serde(default)]
    pub system_cg: Option<CgSource>,
    pub rho_s0: StateSource,
    pub bath_beta: f64,
    pub delta: f64,
    #[serde(default)]
    pub origin: Option<f64>,
    pub alphas: Vec<f64>,
    pub times: TimesSpec,
    #[serde(default)]
    pub seed: u64,
}

struct Resolver<'a> {
    base: PathBuf,
    seed: u64,
    tol: &'a Tolerances,
    draws: u64,
}

impl Resolver<'_> {
    fn path(&self, p: &str) -> PathBuf {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    fn hermitian(&mut self, src: &OperatorSource) -> Result<HermitianOperator> {
        match src {
            OperatorSource::Path(p) => read_hermitian(&self.path(p), self.tol),
            OperatorSource::Inline(o) => HermitianOperator::with_tolerances(o.to_matrix()?, self.tol),
            OperatorSource::Random { random_hermitian: spec } => {
                if spec.dim == 0 {
                    return Err(Error::Schema("random_hermitian dim must be positive".into()));
                }
                let mut rng = rng_for(self.seed, "config", self.draws);
                self.draws += 1;
                Ok(random_hermitian(&mut rng, spec.dim, spec.scale))
            }
        }
    }

    fn state(&mut self, src: &StateSource, h: &HermitianOperator) -> Result<DensityOperator> {
        match src {
            StateSource::Gibbs { gibbs_beta } => gibbs_state(h, *gibbs_beta),
            StateSource::Diagonal { diagonal } => {
                let rho = DensityOperator::from_diagonal(diagonal)?;
                DensityOperator::with_tolerances(rho.into_matrix(), self.tol)
            }
            StateSource::Operator(OperatorSource::Path(p)) => read_density(&self.path(p), self.tol),
            StateSource::Operator(OperatorSource::Inline(o)) => {
                DensityOperator::with_tolerances(o.to_matrix()?, self.tol)
            }
            StateSource::Operator(OperatorSource::Random { .. }) => {
                Err(Error::Schema("random_hermitian is not a valid initial state".into()))
            }
        }
    }

    fn cg(&self, src: &CgSource) -> Result<CoarseGraining> {
        match src {
            CgSource::Path(p) => read_cg(&self.path(p), self.tol),
            CgSource::Inline(c) => c.to_cg(self.tol),
        }
    }
}

fn base_dir(config_path: &Path) -> PathBuf {
    config_path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Everything `closed_run` needs.
#[derive(Debug, Clone)]
pub struct ClosedSetup {
    pub protocol: DrivingProtocol,
    pub rho0: DensityOperator,
    pub windowing: EnergyWindowing,
    pub alphas: Vec<f64>,
    pub times: Vec<f64>,
}

impl ClosedConfig {
    /// Resolves sources; relative paths are taken from `base`.
    pub fn resolve(&self, base: &Path, tol: &Tolerances) -> Result<ClosedSetup> {
        let mut r = Resolver {
            base: base.to_path_buf(),
            seed: self.seed,
            tol,
            draws: 0,
        };
        let segments = self
            .protocol
            .iter()
            .map(|s| Ok((r.hermitian(&s.hamiltonian)?, s.duration)))
            .collect::<Result<Vec<_>>>()?;
        let protocol = DrivingProtocol::new(segments)?;
        let rho0 = r.state(&self.initial_state, protocol.hamiltonian_at(0.0))?;
        Ok(ClosedSetup {
            protocol,
            rho0,
            windowing: windowing(self.delta, self.origin)?,
            alphas: self.alphas.clone(),
            times: self.times.resolve()?,
        })
    }
}

/// Everything `open_run` needs.
#[derive(Debug, Clone)]
pub struct OpenSetup {
    pub system: OpenSystem,
    pub rho_s0: DensityOperator,
    pub bath_beta: f64,
    pub windowing: EnergyWindowing,
    pub alphas: Vec<f64>,
    pub times: Vec<f64>,
}

impl OpenConfig {
    pub fn resolve(&self, base: &Path, tol: &Tolerances) -> Result<OpenSetup> {
        let mut r = Resolver {
            base: base.to_path_buf(),
            seed: self.seed,
            tol,
            draws: 0,
        };
        let h_s = r.hermitian(&self.h_s)?;
        let h_b = r.hermitian(&self.h_b)?;
        let v_sb = r.hermitian(&self.v_sb)?;
        let system_cg = match &self.system_cg {
            Some(src) => r.cg(src)?,
            None => CoarseGraining::computational_basis(h_s.dim()),
        };
        let rho_s0 = r.state(&self.rho_s0, &h_s)?;
        Ok(OpenSetup {
            system: OpenSystem::new(h_s, h_b, v_sb, system_cg)?,
            rho_s0,
            bath_beta: self.bath_beta,
            windowing: windowing(self.delta, self.origin)?,
            alphas: self.alphas.clone(),
            times: self.times.resolve()?,
        })
    }
}

fn windowing(delta: f64, origin: Option<f64>) -> Result<EnergyWindowing> {
    match origin {
        Some(o) => EnergyWindowing::with_origin(delta, o),
        None => EnergyWindowing::new(delta),
    }
}

pub fn load_closed(path: &Path, tol: &Tolerances) -> Result<ClosedSetup> {
    let cfg: ClosedConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
    cfg.resolve(&base_dir(path), tol)
}

pub fn load_open(path: &Path, tol: &Tolerances) -> Result<OpenSetup> {
    let cfg: OpenConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
    cfg.resolve(&base_dir(path), tol)
}

/// Column names of run CSVs, in order.
pub const CSV_HEADER: [&str; 10] = [
    "t",
    "alpha",
    "S_oe",
    "dS",
    "beta_eff",
    "xi1",
    "xi2",
    "xi3",
    "mi",
    "heat_over_T",
];

/// One `(t, α)` row; absent quantities are written as empty fields.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub alpha: f64,
    pub s_oe: Option<f64>,
    pub ds: Option<f64>,
    pub beta_eff: Option<f64>,
    pub xi1: Option<f64>,
    pub xi2: Option<f64>,
    pub xi3: Option<f64>,
    pub mi: Option<f64>,
    pub heat_over_t: Option<f64>,
}

/// 17 significant digits in scientific notation, independent of locale.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

impl CsvRow {
    fn fields(&self) -> [String; 10] {
        let opt = |x: Option<f64>| x.map(format_number).unwrap_or_default();
        [
            format_number(self.t),
            format_number(self.alpha),
            opt(self.s_oe),
            opt(self.ds),
            opt(self.beta_eff),
            opt(self.xi1),
            opt(self.xi2),
            opt(self.xi3),
            opt(self.mi),
            opt(self.heat_over_t),
        ]
    }
}

pub fn closed_rows(rec: &ClosedRunRecord) -> Vec<CsvRow> {
    rec.samples
        .iter()
        .flat_map(|s| {
            s.per_alpha.iter().map(move |a| CsvRow {
                t: s.t,
                alpha: a.alpha,
                s_oe: Some(a.s_oe),
                ds: Some(a.ds),
                beta_eff: Some(s.beta),
                xi3: Some(a.xi3),
                heat_over_t: Some(a.heat_over_t),
                ..CsvRow::default()
            })
        })
        .collect()
}

/// Open runs report the joint α-OE as `S_oe` and `ξ₁` as `dS`; `beta_eff` is
/// the bath's effective inverse temperature.
pub fn open_rows(rec: &OpenRunRecord) -> Vec<CsvRow> {
    rec.samples
        .iter()
        .flat_map(|s| {
            s.per_alpha.iter().map(move |a| CsvRow {
                t: s.t,
                alpha: a.alpha,
                s_oe: Some(a.s_joint),
                ds: Some(a.xi1),
                beta_eff: s.bath_beta,
                xi1: Some(a.xi1),
                xi2: Some(a.xi2),
                mi: Some(a.mi),
                ..CsvRow::default()
            })
        })
        .collect()
}

pub fn write_csv<W: Write>(out: W, rows: &[CsvRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.fields())?;
    }
    w.flush()?;
    Ok(())
}
