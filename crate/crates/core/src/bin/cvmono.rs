use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use cvmono::fuzz::{fuzz_monogamy, RESIDUAL_TOL};
use cvmono::mc::validate_against_state;
use cvmono::network::{build_circuit, closed_form_report, CircuitParams, ScenarioFamily, MODE_A, MODE_B, MODE_C};
use cvmono::quantifiers::check_monogamy;
use cvmono::sweep::{format_number, preset, write_csv, SweepSpec};
use cvmono::Error;

/// Largest closed-form discrepancy accepted by `scenario --closed-form`.
const DISCREPANCY_TOL: f64 = 1e-10;
/// Sampling mismatch threshold for `mc`, in standard errors.
const MC_SIGMA: f64 = 5.0;

#[derive(Parser)]
#[command(name = "cvmono", version, about = "Gaussian tripartite monogamy calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate every quantifier for one circuit configuration.
    Scenario {
        /// Inline JSON, a file path, or `-` for stdin.
        config: String,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        /// Also evaluate the analytic expressions and their discrepancy.
        #[arg(long)]
        closed_form: bool,
    },
    /// Run a parameter sweep and write CSV.
    Sweep {
        #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
        preset: Option<String>,
        /// Sweep specification as inline JSON or a file path.
        #[arg(long)]
        spec: Option<String>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Search random three-mode states for monogamy violations.
    Fuzz {
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        depth: usize,
    },
    /// Compare sampled conditional variances with exact values.
    Mc {
        config: String,
        #[arg(long, default_value_t = 1_000_000)]
        count: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    Check(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Lib(Error::Json(e))
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 4,
        Error::InvalidTransmission(_)
        | Error::NegativeOccupation(_)
        | Error::NonFinite(_)
        | Error::NonPhysical(_)
        | Error::NoClosedForm(_) => 3,
        _ => 2,
    }
}

fn read_text(source: &str) -> Result<String, Failure> {
    if source.trim_start().starts_with('{') {
        return Ok(source.to_string());
    }
    let mut text = String::new();
    if source == "-" {
        io::stdin().read_to_string(&mut text)?;
    } else {
        File::open(Path::new(source))?.read_to_string(&mut text)?;
    }
    Ok(text)
}

fn read_params(source: &str) -> Result<CircuitParams, Failure> {
    let params: CircuitParams = serde_json::from_str(&read_text(source)?)?;
    params.validate()?;
    Ok(params)
}

fn print_json(value: &impl serde::Serialize) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn print_table(value: &serde_json::Value) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    if let Some(map) = value.as_object() {
        for (k, v) in map {
            let text = match v.as_f64() {
                Some(x) => format_number(x),
                None => v.to_string(),
            };
            writeln!(out, "{k:<22} {text}")?;
        }
    }
    Ok(())
}

fn scenario(config: &str, as_json: bool, closed_form: bool) -> Result<(), Failure> {
    let params = read_params(config)?;
    let state = build_circuit(&params)?;
    let report = check_monogamy(&state, MODE_B, MODE_A, MODE_C)?;
    let mut problems = Vec::new();
    if report.min_residual() < -RESIDUAL_TOL {
        problems.push(format!("residual {} below tolerance", report.min_residual()));
    }
    if closed_form {
        let family = ScenarioFamily::detect(&params)
            .ok_or_else(|| Error::NoClosedForm("no analytic family covers these parameters".into()))?;
        let oracle = closed_form_report(&params, family)?;
        let discrepancy = oracle.max_discrepancy(&report);
        if discrepancy > DISCREPANCY_TOL {
            problems.push(format!("closed-form discrepancy {discrepancy:e}"));
        }
        let combined = json!({
            "report": report,
            "closed_form": oracle,
            "max_discrepancy": discrepancy,
        });
        if as_json {
            print_json(&combined)?;
        } else {
            print_table(&combined["report"])?;
            println!("\nclosed form ({})", family.name());
            print_table(&combined["closed_form"])?;
            println!("\nmax_discrepancy        {}", format_number(discrepancy));
        }
    } else if as_json {
        print_json(&report)?;
    } else {
        print_table(&serde_json::to_value(&report)?)?;
    }
    match problems.is_empty() {
        true => Ok(()),
        false => Err(Failure::Check(problems.join("; "))),
    }
}

fn sweep(preset_name: Option<&str>, spec: Option<&str>, out: Option<&Path>) -> Result<(), Failure> {
    let spec: SweepSpec = match (preset_name, spec) {
        (Some(name), _) => preset(name)?,
        (None, Some(source)) => serde_json::from_str(&read_text(source)?)?,
        (None, None) => return Err(Error::InvalidParameter("either --preset or --spec is required".into()).into()),
    };
    let rows = spec.run()?;
    match out {
        Some(path) => {
            let file = File::create(path)?;
            write_csv(&spec, &rows, BufWriter::new(file))?;
        }
        None => write_csv(&spec, &rows, io::stdout().lock())?,
    }
    let residual_cols = spec.residual_columns();
    for row in &rows {
        if row.values.iter().any(|v| !v.is_finite()) {
            return Err(Failure::Check(format!("non-finite value at {}", row.x)));
        }
        if let Some(&k) = residual_cols.iter().find(|&&k| row.values[k] < -RESIDUAL_TOL) {
            return Err(Failure::Check(format!("residual {} at {}", row.values[k], row.x)));
        }
    }
    Ok(())
}

fn fuzz(trials: usize, seed: u64, depth: usize) -> Result<(), Failure> {
    let report = fuzz_monogamy(trials, seed, depth)?;
    print_json(&report)?;
    for e in &report.min_residuals {
        eprintln!("min {:<12} {}", e.name, format_number(e.value));
    }
    eprintln!("saturated trials   {}", report.saturation_count);
    eprintln!("steering trials    {}", report.steering_count);
    match report.violations.first() {
        None => Ok(()),
        Some(v) => Err(Failure::Check(format!(
            "{} violation(s); first: {} = {:e} in trial {} with roles {:?}",
            report.violations.len(),
            v.name,
            v.value,
            v.trial,
            v.role
        ))),
    }
}

fn mc(config: &str, count: usize, seed: u64, as_json: bool) -> Result<(), Failure> {
    let params = read_params(config)?;
    let state = build_circuit(&params)?;
    let report = validate_against_state(&state, (MODE_B, MODE_A, MODE_C), count, seed, MC_SIGMA)?;
    if as_json {
        print_json(&report)?;
    } else {
        let mut out = io::stdout().lock();
        writeln!(
            out,
            "{:<20} {:>14} {:>14} {:>10} {:>14} {:>10} {:>8}",
            "quantity", "exact", "regression", "se", "binned", "se", "z"
        )?;
        for row in &report.rows {
            let (binned, binned_se) = match &row.binned {
                Some(b) => (format!("{:.8}", b.value), format!("{:.2e}", b.se)),
                None => ("-".into(), "-".into()),
            };
            writeln!(
                out,
                "{:<20} {:>14.8} {:>14.8} {:>10.2e} {:>14} {:>10} {:>8.2}",
                row.quantity, row.exact, row.regression.value, row.regression.se, binned, binned_se, row.z
            )?;
        }
        for check in &report.checks {
            writeln!(
                out,
                "check {:<40} {} (margin {:.2} sigma)",
                check.name,
                if check.passed { "pass" } else { "FAIL" },
                check.worst_margin_sigma
            )?;
        }
    }
    let worst = report.max_abs_z();
    if worst > MC_SIGMA {
        return Err(Failure::Check(format!("sampling mismatch of {worst:.2} sigma")));
    }
    if let Some(c) = report.checks.iter().find(|c| !c.passed) {
        return Err(Failure::Check(format!("check failed: {}", c.name)));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Scenario {
            config,
            json,
            closed_form,
        } => scenario(config, *json, *closed_form),
        Command::Sweep { preset, spec, out } => sweep(preset.as_deref(), spec.as_deref(), out.as_deref()),
        Command::Fuzz { trials, seed, depth } => fuzz(*trials, *seed, *depth),
        Command::Mc {
            config,
            count,
            seed,
            json,
        } => mc(config, *count, *seed, *json),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(msg)) => {
            eprintln!("cvmono: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("cvmono: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
