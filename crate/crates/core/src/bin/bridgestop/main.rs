//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or domain error, 2 internal solver
//! inconsistency, 3 verification failure. With `--json` standard output
//! carries exactly one JSON document; diagnostics go to standard error.

mod format;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use bridgestop::boundary::{self, FreeBoundary};
use bridgestop::mc::{self, McConfig, Policy};
use bridgestop::value::{self, HorizonState};
use bridgestop::verify::{self, VerifyOptions};
use bridgestop::Error;

use format::{csv, fmt12, round12};

#[derive(Debug, Parser)]
#[command(name = "bridgestop", version, about = "When to sell a bond whose premium follows a pinned Brownian motion")]
struct Cli {
    /// Emit a single JSON document on standard output.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for the free-boundary constant alpha.
    Alpha {
        /// Tolerance on the defining equation's residual, in (0, 1e-2].
        #[arg(long, default_value_t = boundary::DEFAULT_TOL)]
        tol: f64,
    },
    /// Evaluate the value function at (a, b).
    Value {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        /// Report the bridge value -a + b·V(a, b) instead of V(a, b).
        #[arg(long)]
        bridge: bool,
    },
    /// Write the boundary curve a0 = alpha·√b as CSV.
    Boundary {
        #[arg(long, default_value_t = 0.25, allow_negative_numbers = true)]
        b_min: f64,
        #[arg(long, default_value_t = 4.0, allow_negative_numbers = true)]
        b_max: f64,
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Output file (standard output when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the expected selling premium of a policy by simulation.
    Simulate {
        #[arg(long, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, allow_negative_numbers = true)]
        b: f64,
        /// immediate | fixed:T | threshold:C | optimal
        #[arg(long, default_value = "optimal")]
        policy: String,
        #[command(flatten)]
        mc: McArgs,
    },
    /// Run the numerical verification suite.
    Verify {
        /// Paths for the bridge-marginal checks.
        #[arg(long, default_value_t = 20_000)]
        paths: usize,
        #[arg(long, env = "BRIDGESTOP_SEED", default_value_t = mc::DEFAULT_SEED)]
        seed: u64,
        /// Shift alpha before checking (sensitivity test).
        #[arg(long, hide = true, default_value_t = 0.0, allow_negative_numbers = true)]
        perturb_alpha: f64,
    },
    /// Explore the exponential objective E[exp(-theta·ratio)] over thresholds, as CSV.
    Expmodel {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        a: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        b: f64,
        #[arg(long, allow_negative_numbers = true)]
        theta: f64,
        /// Comma-separated thresholds, e.g. 0.5,0.84,1.1
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        c_grid: Vec<f64>,
        #[command(flatten)]
        mc: McArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct McArgs {
    #[arg(long, default_value_t = mc::DEFAULT_PATHS)]
    paths: usize,
    #[arg(long, default_value_t = mc::DEFAULT_STEPS)]
    steps: usize,
    /// Defaults to $BRIDGESTOP_SEED, then 42.
    #[arg(long, env = "BRIDGESTOP_SEED", default_value_t = mc::DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    antithetic: bool,
}

impl McArgs {
    fn config(&self) -> McConfig {
        McConfig { paths: self.paths, steps: self.steps, seed: self.seed, antithetic: self.antithetic }
    }
}

enum Failure {
    Lib(Error),
    Io(std::io::Error),
    Verification(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            match e {
                Error::Inconsistent(_) => ExitCode::from(2),
                Error::Domain(_) | Error::Overflow(_) => ExitCode::from(1),
            }
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Verification(rows)) => {
            eprint!("{rows}");
            ExitCode::from(3)
        }
    }
}

fn solve() -> Result<FreeBoundary, Failure> {
    Ok(boundary::solve_alpha(boundary::DEFAULT_TOL)?)
}

fn emit_json(v: &Value) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, v).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn emit_text(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Alpha { tol } => {
            let fb = boundary::solve_alpha(tol)?;
            if cli.json {
                emit_json(&json!({
                    "alpha": round12(fb.alpha),
                    "b_const": round12(fb.big_b),
                    "residual": round12(fb.residual),
                    "iterations": fb.iterations,
                }))
            } else {
                emit_text(
                    None,
                    &format!(
                        "alpha={}\nb_const={}\nresidual={}\niterations={}\n",
                        fmt12(fb.alpha),
                        fmt12(fb.big_b),
                        fmt12(fb.residual),
                        fb.iterations
                    ),
                )
            }
        }
        Command::Value { a, b, bridge } => {
            let fb = solve()?;
            let s = HorizonState::new(a, b)?;
            let (kind, v) = if bridge {
                ("bridge_value", value::bridge_value(s, &fb)?)
            } else {
                ("value_hat", value::value_hat(s, &fb)?)
            };
            let region = value::classify(s, &fb);
            if cli.json {
                emit_json(&json!({
                    "a": round12(a),
                    "b": round12(b),
                    "kind": kind,
                    "value": round12(v),
                    "region": region.as_str(),
                }))
            } else {
                emit_text(None, &format!("{kind}={} region={region}\n", fmt12(v)))
            }
        }
        Command::Boundary { b_min, b_max, n, out } => {
            let fb = solve()?;
            let curve = boundary::boundary_curve(&fb, b_min, b_max, n)?;
            emit_text(out.as_ref(), &csv(&["b", "a0"], curve.into_iter().map(|(b, a)| vec![b, a])))
        }
        Command::Simulate { a, b, policy, mc: args } => {
            let fb = solve()?;
            let spec = HorizonState::new(a, b)?;
            let policy = Policy::parse(&policy, &fb)?;
            let cfg = args.config();
            let est = mc::evaluate_policy(spec, policy, &cfg)?;
            emit_json(&json!({
                "mean": round12(est.mean),
                "stderr": round12(est.stderr),
                "paths": est.paths,
                "steps": cfg.steps,
                "seed": est.seed,
                "policy": policy.to_string(),
            }))
        }
        Command::Verify { paths, seed, perturb_alpha } => {
            let report = verify::run(&VerifyOptions { seed, marginal_paths: paths, alpha_perturbation: perturb_alpha })?;
            let mut table = String::new();
            for c in &report.checks {
                table.push_str(&format!(
                    "{} {:<24} residual={} tolerance={}\n",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    fmt12(c.residual),
                    fmt12(c.tolerance)
                ));
            }
            if cli.json {
                let checks: Vec<Value> = report
                    .checks
                    .iter()
                    .map(|c| {
                        json!({
                            "name": c.name,
                            "residual": round12(c.residual),
                            "tolerance": round12(c.tolerance),
                            "pass": c.pass,
                        })
                    })
                    .collect();
                emit_json(&json!({ "overall": report.overall, "checks": checks }))?;
            } else {
                table.push_str(&format!("overall: {}\n", if report.overall { "PASS" } else { "FAIL" }));
                emit_text(None, &table)?;
            }
            if report.overall {
                Ok(())
            } else {
                let failing: String = report
                    .failures()
                    .map(|c| format!("FAIL {} residual={} tolerance={}\n", c.name, fmt12(c.residual), fmt12(c.tolerance)))
                    .collect();
                Err(Failure::Verification(failing))
            }
        }
        Command::Expmodel { a, b, theta, c_grid, mc: args, out } => {
            let spec = HorizonState::new(a, b)?;
            let rows = mc::exp_model_sweep(spec, theta, &c_grid, &args.config())?;
            emit_text(
                out.as_ref(),
                &csv(&["c", "mean", "stderr"], rows.into_iter().map(|(c, e)| vec![c, e.mean, e.stderr])),
            )
        }
    }
}
