//! Command-line runner: `check` sweeps residual checks from a JSON config,
//! `catalog` lists the solved example surfaces, `rotation` integrates a
//! minimal rotation profile and writes its CSV trace, `list-checks` prints
//! the runnable check names.
//!
//! Exit codes: 0 all checks passed, 1 a check failed (or a runtime failure),
//! 2 configuration error.

mod config;
mod expr;
mod report;
mod run;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use biharm_core::catalog::{self, LambdaStar};
use biharm_core::residuals::CHECK_NAMES;
use biharm_core::rotation::{
    minimal_profile_integrate, ode_residual, profile_state, rotation_principal_curvatures,
    RotationProfile,
};

use report::Format;

#[derive(Parser)]
#[command(name = "biharm", version, about = "Residual checks for hypersurface geometry in product spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks described by a JSON config file.
    Check(CheckArgs),
    /// List the named example surfaces and their solved lambda values.
    Catalog {
        /// Output format: json or csv (csv prints a plain table here).
        #[arg(long, default_value = "csv")]
        format: Format,
    },
    /// Integrate a minimal rotation profile and write its trace as CSV.
    Rotation(RotationArgs),
    /// Print the check names accepted in configs.
    ListChecks,
}

#[derive(Args)]
struct CheckArgs {
    /// Path to the JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output format for the report.
    #[arg(long, default_value = "json")]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override for randomized surfaces (echoed in the report).
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for the grid sweep; results are identical for any
    /// value.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct RotationArgs {
    /// Base curvature: 1 (spherical) or -1 (hyperbolic).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    c: f64,
    /// Hypersurface dimension.
    #[arg(long, default_value_t = 3)]
    m: usize,
    /// Initial profile slope h'(s0).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    initial_slope: f64,
    #[arg(long, default_value_t = 0.4)]
    s0: f64,
    #[arg(long, default_value_t = 1.1)]
    s1: f64,
    /// Integration step.
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// Thin the trace to every n-th sample.
    #[arg(long, default_value_t = 10)]
    every: usize,
    /// Write the CSV trace here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Check(args) => check(args),
        Command::Catalog { format } => catalog_cmd(format),
        Command::Rotation(args) => rotation_cmd(args),
        Command::ListChecks => {
            for name in CHECK_NAMES {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
    }
}

fn write_output(bytes: &[u8], out: Option<&PathBuf>) -> std::io::Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes),
        None => std::io::stdout().write_all(bytes),
    }
}

fn check(args: CheckArgs) -> ExitCode {
    let text = match std::fs::read_to_string(&args.config) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("cannot read {}: {e}", args.config.display());
            return ExitCode::from(2);
        }
    };
    let config = match config::parse_config(&text, args.seed) {
        Ok(config) => config,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    let report = run::run(&config, args.jobs.max(1));
    let bytes = report::emit(&report, args.format);
    if let Err(e) = write_output(&bytes, args.out.as_ref()) {
        eprintln!("cannot write report: {e}");
        return ExitCode::from(1);
    }
    if report.overall_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn catalog_cmd(format: Format) -> ExitCode {
    let entries = match catalog::standard_entries() {
        Ok(entries) => entries,
        Err(e) => {
            eprintln!("catalog construction failed: {e}");
            return ExitCode::from(1);
        }
    };
    match format {
        Format::Json => {
            let listed: Vec<serde_json::Value> = entries
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "name": e.name,
                        "description": e.description,
                        "lambda_star": match e.lambda_star {
                            LambdaStar::Any => serde_json::json!("any"),
                            LambdaStar::Value(v) => serde_json::json!(v),
                            LambdaStar::None => serde_json::Value::Null,
                        },
                        "minimal": e.minimal,
                        "ambient": {"c": e.immersion.space().c(), "m": e.immersion.m()},
                    })
                })
                .collect();
            println!("{}", serde_json::to_string_pretty(&listed).unwrap());
        }
        Format::Csv => {
            println!("name,c,m,lambda_star,minimal,description");
            for e in entries {
                let star = match e.lambda_star {
                    LambdaStar::Any => "any".to_string(),
                    LambdaStar::Value(v) => format!("{v}"),
                    LambdaStar::None => "none".to_string(),
                };
                println!(
                    "{},{},{},{},{},{}",
                    e.name,
                    e.immersion.space().c(),
                    e.immersion.m(),
                    star,
                    e.minimal,
                    e.description
                );
            }
        }
    }
    ExitCode::SUCCESS
}

fn rotation_cmd(args: RotationArgs) -> ExitCode {
    let sampled = match minimal_profile_integrate(
        args.c,
        args.m,
        args.initial_slope,
        args.s0,
        args.s1,
        args.step,
    ) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("profile integration failed: {e}");
            return ExitCode::from(1);
        }
    };
    for event in &sampled.events {
        eprintln!("note: {event}");
    }
    let (lo, step) = (sampled.s0, sampled.step);
    let count = sampled.samples.len();
    let profile = match RotationProfile::from_boxed(args.c, Box::new(sampled)) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("profile rejected: {e}");
            return ExitCode::from(1);
        }
    };

    let mut out = String::from("s,h,h_prime,alpha,H,lambda1,lambda2,ode_5_2_residual\n");
    let mut k = 0;
    while k < count {
        let s = lo + step * k as f64;
        let row = (|| -> biharm_core::Result<String> {
            let h = profile.h_jet(s)?;
            let st = profile_state(&profile, args.m, s)?;
            let (k1, k2) = rotation_principal_curvatures(&profile, s)?;
            let res = ode_residual(&profile, args.m, s)?;
            Ok(format!(
                "{},{},{},{},{},{},{},{}\n",
                s,
                h.val,
                h.d1,
                st.sin_alpha.atan2(st.cos_alpha),
                st.mean,
                k1,
                k2,
                res
            ))
        })();
        match row {
            Ok(row) => out.push_str(&row),
            Err(e) => {
                eprintln!("trace evaluation failed at s = {s}: {e}");
                return ExitCode::from(1);
            }
        }
        k += args.every.max(1);
    }
    if let Err(e) = write_output(out.as_bytes(), args.out.as_ref()) {
        eprintln!("cannot write trace: {e}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
