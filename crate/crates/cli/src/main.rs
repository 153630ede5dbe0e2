use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use ctilde::numerics::params::Constraint;
use ctilde::qkz::{build_polynomial_solution, KZSolution, KZSolutionJson};
use ctilde::suites::{exact_params, qkz_verify_report, run_suite, SuiteConfig, SuiteName};
use ctilde::transfer::HamiltonianForm;
use ctilde::{CheckReport, Error, Precision, Result};
use ctilde_cli::{emit_tables, koornwinder_json, load_config, params_for, parse_lambda, read_json, write_json, Overrides, TableKind};

#[derive(Parser)]
#[command(name = "ctilde", version, about = "Verification suites and solvers for the type C~_n affine Hecke algebra")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Debug, Default)]
struct Common {
    /// Chain length (number of sites).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// double | extended
    #[arg(long)]
    precision: Option<Precision>,
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    /// Parameter set JSON used instead of sampling.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Suite configuration JSON; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<i32>,
    /// Solve psi_n from the m-condition.
    #[arg(long)]
    constrain: bool,
    /// Bound on |lambda| for the Koornwinder suite and table.
    #[arg(long)]
    degree: Option<i32>,
    /// Record wall time in the report.
    #[arg(long)]
    timing: bool,
}

impl Common {
    fn config(&self) -> Result<SuiteConfig> {
        let o = Overrides {
            n: self.n,
            seed: self.seed,
            precision: self.precision,
            tolerance: self.tolerance,
            samples: self.samples,
            params: self.params.clone(),
            m: self.m,
            constrain: self.constrain,
            degree: self.degree,
        };
        load_config(self.config.as_deref(), &o)
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite: algebra, matchmaker, baxter, transfer, koornwinder, qkz or all.
    Verify {
        suite: SuiteName,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the spin operators rho(T_i) and rho_hat(e_i) to this file.
        #[arg(long)]
        dump_ops: Option<PathBuf>,
    },
    /// Nonsymmetric Koornwinder polynomials.
    Koornwinder {
        #[command(subcommand)]
        cmd: KoornwinderCmd,
    },
    /// Polynomial solutions of the reflection qKZ equations.
    Qkz {
        #[command(subcommand)]
        cmd: QkzCmd,
    },
    /// Write JSON tables.
    Emit {
        #[command(subcommand)]
        cmd: EmitCmd,
    },
}

#[derive(Subcommand)]
enum KoornwinderCmd {
    Compute {
        /// Weight as "a,b,...".
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum QkzCmd {
    Build {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum EmitCmd {
    Tables {
        /// koornwinder | hamiltonian_spectrum; none gives an empty manifest.
        #[arg(value_enum)]
        kinds: Vec<TableKind>,
        #[command(flatten)]
        common: Common,
        /// Forms included in the spectrum table.
        #[arg(long = "hamiltonian-form", value_delimiter = ',', default_values = ["transfer", "pauli", "tl"])]
        forms: Vec<HamiltonianForm>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn finish(mut report: CheckReport, started: Instant, timing: bool, path: Option<&Path>) -> Result<u8> {
    if timing {
        report.wall_time_ms = Some(started.elapsed().as_millis() as u64);
    }
    for c in report.failures() {
        eprintln!("FAIL {} [{}] residual {:e} >= {:e}", c.name, c.context, c.residual, c.tolerance);
    }
    let status = if report.pass() { "PASS" } else { "FAIL" };
    eprintln!("{}: {status} ({} checks)", report.suite, report.checks.len());
    write_json(path, &report)?;
    Ok(if report.pass() { 0 } else { 1 })
}

fn run(cli: Cli) -> Result<u8> {
    let started = Instant::now();
    match cli.cmd {
        Cmd::Verify { suite, common, report, dump_ops } => {
            let cfg = common.config()?;
            if let Some(path) = dump_ops {
                write_json(Some(&path), &ctilde_cli::dump_ops(&cfg)?)?;
            }
            finish(run_suite(suite, &cfg)?, started, common.timing, report.as_deref())
        }
        Cmd::Koornwinder { cmd: KoornwinderCmd::Compute { lambda, common, out } } => {
            let cfg = common.config()?;
            let lambda = parse_lambda(&lambda)?;
            if cfg.n.is_some_and(|n| n != lambda.len()) {
                return Err(Error::Invalid(format!("lambda has {} entries but --n is {}", lambda.len(), cfg.n.unwrap_or(0))));
            }
            let p = params_for(&cfg, lambda.len(), None)?;
            write_json(out.as_deref(), &koornwinder_json(&lambda, &p, cfg.precision)?)?;
            Ok(0)
        }
        Cmd::Qkz { cmd: QkzCmd::Build { common, out } } => {
            let cfg = common.config()?;
            let n = cfg.n.unwrap_or(2);
            let m = cfg.m.ok_or_else(|| Error::Invalid("--m is required".into()))?;
            let constraint = cfg.constrain.then_some(Constraint::MCondition { m });
            let p = params_for(&cfg, n, constraint)?;
            let json: KZSolutionJson = match cfg.precision {
                Precision::Double => build_polynomial_solution(&p, m)?.to_json(),
                Precision::Extended => {
                    let mut pe = exact_params(&p)?;
                    if cfg.constrain {
                        pe = pe.with_psin(ctilde::numerics::params::psin_for_mcondition(&pe, m))?;
                    }
                    build_polynomial_solution(&pe, m)?.to_json()
                }
            };
            write_json(out.as_deref(), &json)?;
            Ok(0)
        }
        Cmd::Qkz { cmd: QkzCmd::Verify { input, common, report } } => {
            let cfg = common.config()?;
            let sol = KZSolution::<f64>::from_json(&read_json::<KZSolutionJson>(&input)?, 1e-9)?;
            finish(qkz_verify_report(&sol, &cfg)?, started, common.timing, report.as_deref())
        }
        Cmd::Emit { cmd: EmitCmd::Tables { kinds, common, forms, out } } => {
            let cfg = common.config()?;
            let manifest = emit_tables(&kinds, &cfg, &forms, &out)?;
            eprintln!("wrote {} files", manifest.files.len());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            if let Error::ConditionUnsatisfied(report) = &e {
                if let Ok(text) = serde_json::to_string_pretty(report) {
                    eprintln!("{text}");
                }
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
