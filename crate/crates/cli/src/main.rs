//! `negent`: command-line front end for the negative entanglement measure.
//!
//! Exit codes: 0 success, 1 input/IO error or failed check, 2 entangled input
//! where separability is required.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use negent::ising::nem_sweep;
use negent::measures::{isotropic_i_concurrence, isotropic_state, lambda_two_qubit, ppt_min_eigenvalue, IsotropicParams};
use negent::nem::{is_ess_two_qubit, nem_isotropic_lower_bound, nem_oracle, sample_separable, OracleConfig, ESS_TOL, ENTANGLED_TOL};
use negent::qcore::DensityMatrix;
use negent::Error;
use negent_validation as selftest;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "negent", version, about = "Negative entanglement measure of separable states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Λ, concurrence, NEM, ESS flag and PPT minimum of a state file.
    Compute {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// NEM of the Ising two-site state across a coupling grid, as CSV.
    IsingSweep {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lambda_min: f64,
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        lambda_max: f64,
        #[arg(long, default_value_t = 201)]
        steps: usize,
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long, default_value_t = 1e-3)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare the variational oracle with the closed form on random
    /// separable two-qubit states.
    OracleCheck {
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Oracle configuration (JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// I-concurrence and NEM lower bound of an isotropic state.
    Isotropic {
        #[arg(long)]
        d: usize,
        #[arg(long = "F")]
        f: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance criteria and print a pass/fail table.
    Selftest {
        /// Run only these criteria (repeatable).
        #[arg(long = "criterion")]
        criteria: Vec<u8>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failure that maps to a process exit code.
enum Failure {
    Input(String),
    Domain(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EntangledInput(_) | Error::EntangledRdm { .. } => Failure::Domain(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Writes `contents` to `path` through a sibling temporary file and a rename.
fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn emit_json<T: Serialize>(report: &T, out: Option<&Path>) -> CmdResult {
    let text = serde_json::to_string_pretty(report).expect("reports serialize") + "\n";
    print!("{text}");
    if let Some(path) = out {
        write_atomic(path, &text)?;
    }
    Ok(())
}

fn read_state(path: &Path) -> Result<DensityMatrix, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    DensityMatrix::from_json_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct ComputeReport {
    dims: [usize; 2],
    lambda: Option<f64>,
    concurrence: Option<f64>,
    nem: Option<f64>,
    ess: Option<bool>,
    ppt_min_eigenvalue: f64,
}

fn cmd_compute(state: &Path, out: Option<&Path>) -> CmdResult {
    let rho = read_state(state)?;
    let (da, db) = rho.dims();
    let ppt = ppt_min_eigenvalue(&rho);
    if !rho.is_two_qubit() {
        // No closed form beyond two qubits; report the witness only.
        return emit_json(
            &ComputeReport {
                dims: [da, db],
                lambda: None,
                concurrence: None,
                nem: None,
                ess: None,
                ppt_min_eigenvalue: ppt,
            },
            out,
        );
    }
    let data = lambda_two_qubit(&rho)?;
    let entangled = data.lambda > ENTANGLED_TOL;
    let report = ComputeReport {
        dims: [2, 2],
        lambda: Some(data.lambda),
        concurrence: Some(data.concurrence),
        nem: (!entangled).then(|| data.lambda.min(0.0)),
        ess: if entangled { None } else { Some(is_ess_two_qubit(&rho, ESS_TOL)?) },
        ppt_min_eigenvalue: ppt,
    };
    emit_json(&report, out)?;
    if entangled {
        return Err(Failure::Domain(format!(
            "state is entangled (Lambda = {:.6e}); NEM is defined for separable states",
            data.lambda
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepSummary {
    rows: usize,
    r: usize,
    derivative_step: f64,
    extremum_lambda: f64,
    extremum_dnem_dlambda: f64,
    out: String,
}

#[derive(Serialize)]
struct EntangledRdmReport {
    error: &'static str,
    lambda: f64,
    r: usize,
    concurrence: f64,
}

fn cmd_ising_sweep(lambda_min: f64, lambda_max: f64, steps: usize, r: usize, h: f64, out: &Path) -> CmdResult {
    let sweep = match nem_sweep(lambda_min, lambda_max, steps, r, h) {
        Ok(s) => s,
        Err(Error::EntangledRdm { lambda, r, concurrence }) => {
            emit_json(
                &EntangledRdmReport {
                    error: "entangled_rdm",
                    lambda,
                    r,
                    concurrence,
                },
                None,
            )?;
            return Err(Failure::Domain(format!(
                "two-site state at lambda = {lambda}, r = {r} is entangled (concurrence {concurrence:.3e})"
            )));
        }
        Err(e) => return Err(e.into()),
    };
    write_atomic(out, &sweep.to_csv())?;
    let peak = sweep.derivative_extremum().expect("non-empty grid");
    emit_json(
        &SweepSummary {
            rows: sweep.rows.len(),
            r,
            derivative_step: h,
            extremum_lambda: peak.lambda,
            extremum_dnem_dlambda: peak.dnem_dlambda,
            out: out.display().to_string(),
        },
        None,
    )
}

#[derive(Serialize)]
struct OracleTrial {
    index: usize,
    k: usize,
    exact: f64,
    oracle: f64,
    gap: f64,
}

#[derive(Serialize)]
struct OracleCheckReport {
    trials: usize,
    seed: u64,
    config: OracleConfig,
    max_gap: f64,
    mean_gap: f64,
    tolerance: f64,
    passed: bool,
    results: Vec<OracleTrial>,
}

const ORACLE_CHECK_TOL: f64 = 1e-2;

fn cmd_oracle_check(trials: usize, seed: u64, config: Option<&Path>, out: Option<&Path>) -> CmdResult {
    if trials == 0 {
        return Err(Failure::Input("--trials must be at least 1".into()));
    }
    let cfg: OracleConfig = match config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        }
        None => OracleConfig::default(),
    };
    cfg.validate()?;
    let mut results = Vec::with_capacity(trials);
    for index in 0..trials {
        let k = index % 8 + 1;
        let rho = sample_separable(seed.wrapping_add(index as u64), k)?;
        let exact = lambda_two_qubit(&rho)?.lambda.min(0.0);
        let oracle = nem_oracle(&rho, &cfg)?.value;
        results.push(OracleTrial {
            index,
            k,
            exact,
            oracle,
            gap: (oracle - exact).abs(),
        });
    }
    let max_gap = results.iter().map(|t| t.gap).fold(0.0, f64::max);
    let mean_gap = results.iter().map(|t| t.gap).sum::<f64>() / trials as f64;
    let passed = max_gap <= ORACLE_CHECK_TOL;
    emit_json(
        &OracleCheckReport {
            trials,
            seed,
            config: cfg,
            max_gap,
            mean_gap,
            tolerance: ORACLE_CHECK_TOL,
            passed,
            results,
        },
        out,
    )?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Check(format!("max gap {max_gap:.3e} exceeds {ORACLE_CHECK_TOL:e}")))
    }
}

#[derive(Serialize)]
struct IsotropicReport {
    d: usize,
    #[serde(rename = "F")]
    f: f64,
    separable: bool,
    i_concurrence: f64,
    nem_lower_bound: Option<f64>,
    /// d = 2 only: Λ of the state, which is its exact NEM when separable.
    exact_lambda: Option<f64>,
}

fn cmd_isotropic(d: usize, f: f64, out: Option<&Path>) -> CmdResult {
    let p = IsotropicParams::new(d, f)?;
    let separable = f <= 1.0 / d as f64 + 1e-12;
    let exact_lambda = if d == 2 {
        Some(lambda_two_qubit(&isotropic_state(p))?.lambda)
    } else {
        None
    };
    emit_json(
        &IsotropicReport {
            d,
            f,
            separable,
            i_concurrence: isotropic_i_concurrence(p),
            nem_lower_bound: if separable { Some(nem_isotropic_lower_bound(p)?) } else { None },
            exact_lambda,
        },
        out,
    )
}

fn cmd_selftest(criteria: &[u8], out: Option<&Path>) -> CmdResult {
    let ids: Vec<u8> = if criteria.is_empty() { (1..=9).collect() } else { criteria.to_vec() };
    let mut table = String::new();
    let mut failed = Vec::new();
    for id in ids {
        let outcome = selftest::run(id)?;
        let line = outcome.line();
        println!("{line}");
        table.push_str(&line);
        table.push('\n');
        if !outcome.passed {
            failed.push(id);
        }
    }
    if let Some(path) = out {
        write_atomic(path, &table)?;
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failed criteria: {failed:?}")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compute { state, out } => cmd_compute(state, out.as_deref()),
        Command::IsingSweep {
            lambda_min,
            lambda_max,
            steps,
            r,
            h,
            out,
        } => cmd_ising_sweep(*lambda_min, *lambda_max, *steps, *r, *h, out),
        Command::OracleCheck {
            trials,
            seed,
            config,
            out,
        } => cmd_oracle_check(*trials, *seed, config.as_deref(), out.as_deref()),
        Command::Isotropic { d, f, out } => cmd_isotropic(*d, *f, out.as_deref()),
        Command::Selftest { criteria, out } => cmd_selftest(criteria, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) | Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Domain(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
