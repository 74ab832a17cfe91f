use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use obsent::coarse::{alpha_oe, alpha_oe_divergence_form, alpha_oe_gap, observational_entropy};
use obsent::divergence::renyi_entropy;
use obsent::io::{closed_rows, load_closed, load_open, open_rows, read_cg, read_density, read_levels, write_csv};
use obsent::par::Execution;
use obsent::thermo::{closed_run, free_energy, jackson_check, open_run, Finding, FindingKind};
use obsent::tolerance::scale_from_env;
use obsent::verify::{self, Suite, VerifyOptions};
use obsent::{Error, Tolerances};

/// Observational entropy toolkit.
#[derive(Debug, Parser)]
#[command(name = "obsent", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entropies of a state under a coarse-graining.
    Entropy {
        /// Density operator JSON.
        state: PathBuf,
        /// Coarse-graining JSON.
        cg: PathBuf,
        #[arg(long = "alpha", default_values_t = [2.0])]
        alphas: Vec<f64>,
        /// Report bits instead of nats.
        #[arg(long)]
        bits: bool,
    },
    /// Randomized property suites.
    Verify {
        #[arg(long, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Largest Hilbert-space dimension drawn.
        #[arg(long, default_value_t = 6)]
        dim: usize,
        /// Report path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run instances on one thread.
        #[arg(long)]
        sequential: bool,
        /// Feed a non-stochastic map to every refinement instance.
        #[arg(long = "inject-invalid-map")]
        inject_invalid_map: bool,
    },
    /// Driven closed-system run.
    ClosedSim {
        config: PathBuf,
        /// CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the full run record as JSON.
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// System plus bath run.
    OpenSim {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        record: Option<PathBuf>,
    },
    /// Free energies and the Jackson-derivative identity.
    FreeEnergy {
        /// Levels JSON.
        levels: PathBuf,
        #[arg(long)]
        t0: f64,
        #[arg(long = "alpha", default_values_t = [2.0])]
        alphas: Vec<f64>,
    },
}

enum Failure {
    Usage(String),
    Violation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Violation) => ExitCode::from(2),
    }
}

fn tolerances() -> Result<(f64, Tolerances), Failure> {
    let scale = scale_from_env().map_err(Failure::Usage)?;
    Ok((scale, Tolerances::scaled(scale)))
}

fn sink(out: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn run(cmd: Command) -> Result<(), Failure> {
    let (scale, tol) = tolerances()?;
    match cmd {
        Command::Entropy {
            state,
            cg,
            alphas,
            bits,
        } => {
            let rho = read_density(&state, &tol)?;
            let cg = read_cg(&cg, &tol)?;
            let unit = if bits { std::f64::consts::LN_2 } else { 1.0 };
            // adding 0.0 turns -0.0 into 0.0
            let show = |x: f64| x / unit + 0.0;
            let oe = show(observational_entropy(&cg, &rho)?);
            println!("unit\t{}", if bits { "bits" } else { "nats" });
            println!("S_oe\t{oe:.12}");
            println!("alpha\tS_alpha_oe\tS_alpha_oe_div\tS_renyi\tgap");
            for a in alphas {
                println!(
                    "{a}\t{:.12}\t{:.12}\t{:.12}\t{:.12}",
                    show(alpha_oe(&cg, &rho, a)?),
                    show(alpha_oe_divergence_form(&cg, &rho, a)?),
                    show(renyi_entropy(&rho, a)?),
                    show(alpha_oe_gap(&cg, &rho, a)?),
                );
            }
            Ok(())
        }
        Command::Verify {
            suite,
            seed,
            n,
            dim,
            out,
            sequential,
            inject_invalid_map,
        } => {
            if dim == 0 {
                return Err(Failure::Usage("--dim must be positive".into()));
            }
            let opts = VerifyOptions {
                seed,
                n,
                max_dim: dim,
                tolerance_scale: scale,
                execution: if sequential {
                    Execution::Sequential
                } else {
                    Execution::Parallel
                },
                inject_invalid_refinement: inject_invalid_map,
            };
            let report = verify::run(suite, &opts);
            let mut w = sink(out.as_deref())?;
            w.write_all(report.to_json().as_bytes())?;
            w.flush()?;
            for p in report.properties.iter().filter(|p| p.fail > 0) {
                eprintln!("{:?} {}: {} of {} failed", p.mode, p.name, p.fail, p.instances);
            }
            if report.passed {
                Ok(())
            } else {
                Err(Failure::Violation)
            }
        }
        Command::ClosedSim { config, out, record } => {
            let s = load_closed(&config, &tol)?;
            let rec = closed_run(&s.protocol, &s.rho0, &s.windowing, &s.alphas, &s.times)?;
            if rec.guarantee_void {
                eprintln!("warning: guarantee_void (initial state is not coarse-grained in energy)");
            }
            for &a in &s.alphas {
                if let Some(m) = rec.min_ds(a) {
                    eprintln!(
                        "alpha={a}: min dS = {m:.3e} ({})",
                        if m >= -1e-9 { "monotone" } else { "NOT monotone" }
                    );
                }
            }
            report_findings(&rec.findings);
            write_record(record.as_deref(), &rec)?;
            let mut w = sink(out.as_deref())?;
            write_csv(&mut w, &closed_rows(&rec))?;
            Ok(())
        }
        Command::OpenSim { config, out, record } => {
            let s = load_open(&config, &tol)?;
            let rec = open_run(&s.system, &s.rho_s0, s.bath_beta, &s.windowing, &s.alphas, &s.times)?;
            if rec.guarantee_void {
                eprintln!("warning: guarantee_void (initial joint state is not coarse-grained)");
            }
            for &a in &s.alphas {
                if let Some(m) = rec.min_xi1(a) {
                    eprintln!("alpha={a}: min xi1 = {m:.3e}");
                }
            }
            report_findings(&rec.findings);
            write_record(record.as_deref(), &rec)?;
            let mut w = sink(out.as_deref())?;
            write_csv(&mut w, &open_rows(&rec))?;
            Ok(())
        }
        Command::FreeEnergy { levels, t0, alphas } => {
            let levels = read_levels(&levels)?;
            let f = free_energy(&levels, t0)?;
            println!("T0\tZ\tZ_tilde\tA\tA_tilde");
            println!("{t0}\t{:.12}\t{:.12}\t{:.12}\t{:.12}", f.z, f.z_tilde, f.a, f.a_tilde);
            println!("alpha\tlhs\trhs\tgap");
            for a in alphas {
                let j = jackson_check(&levels, t0, a)?;
                println!("{a}\t{:.12}\t{:.12}\t{:.3e}", j.lhs, j.rhs, j.gap);
            }
            Ok(())
        }
    }
}

fn report_findings(findings: &[Finding]) {
    let mut kinds: Vec<FindingKind> = findings.iter().map(|f| f.kind).collect();
    kinds.sort_by_key(|k| format!("{k:?}"));
    kinds.dedup();
    for kind in kinds {
        let of_kind: Vec<&Finding> = findings.iter().filter(|f| f.kind == kind).collect();
        let worst = of_kind.iter().map(|f| f.value).fold(f64::INFINITY, f64::min);
        let first = of_kind[0];
        eprintln!(
            "finding: {kind:?} at {} samples (first t={}{}), most negative value {worst:.3e}",
            of_kind.len(),
            first.t,
            first.alpha.map(|a| format!(" alpha={a}")).unwrap_or_default(),
        );
    }
}

fn write_record<T: serde::Serialize>(path: Option<&Path>, rec: &T) -> Result<(), Failure> {
    if let Some(p) = path {
        let text = serde_json::to_string_pretty(rec).map_err(|e| Failure::Usage(e.to_string()))?;
        fs::write(p, text)?;
    }
    Ok(())
}
