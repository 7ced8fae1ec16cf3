//! Command-line front end: argument parsing and command execution.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::error::MetroError;
use crate::experiments::{
    monte_carlo_mse, render, scenario_row, sweep_scaling, Emittable, OutputFormat, Scenario, ScenarioKind,
    ScenarioParams, ALL_SCENARIOS,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NUMERICAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const DEFAULT_SHOTS: u64 = 10_000;
const DEFAULT_TRIALS: usize = 200;

#[derive(Debug, Parser)]
#[command(name = "metrolab", version, about = "Quantum metrology bounds, sweeps and Monte Carlo estimation")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Args)]
struct Output {
    /// Output format.
    #[arg(long, default_value = "csv", value_parser = ["csv", "json"])]
    format: String,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Print the bound report of one scenario configuration.
    Bounds {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Phase in radians.
        #[arg(long, allow_negative_numbers = true)]
        phi: Option<f64>,
        /// Repetition count used in the Cramér-Rao bound.
        #[arg(long, default_value_t = 1)]
        t: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Run a scenario over several sizes and fit the log-log slope.
    Sweep {
        #[arg(long)]
        scenario: String,
        /// Sizes: N for register and Fock scenarios, mean photon number for kerr-coherent.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<f64>,
        #[arg(long, allow_negative_numbers = true)]
        phi: Option<f64>,
        #[arg(long, default_value_t = 1)]
        t: u64,
        #[command(flatten)]
        output: Output,
    },
    /// Monte Carlo maximum-likelihood estimation at a true phase.
    Simulate {
        #[arg(long)]
        scenario: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// True phase in radians.
        #[arg(long, allow_negative_numbers = true)]
        phi: Option<f64>,
        /// Shots per trial.
        #[arg(long, default_value_t = DEFAULT_SHOTS)]
        shots: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[command(flatten)]
        output: Output,
    },
    /// List the available scenarios and their parameters.
    Scenarios {
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Bounds { t: u64 },
    Sweep { sizes: Vec<f64>, t: u64 },
    Simulate { shots: u64, trials: usize, seed: u64 },
    Scenarios,
}

/// A validated command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub verb: Action,
    pub scenario: Option<Scenario>,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Malformed or schema-violating arguments.
    Usage(String),
    /// `--help` or `--version` output, which is not a failure.
    Info(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "UsageError: {m}"),
            CliError::Info(m) => f.write_str(m),
        }
    }
}

fn usage(e: MetroError) -> CliError {
    CliError::Usage(e.to_string())
}

fn scenario(name: &str, n: Option<usize>, alpha: Option<f64>, phi: Option<f64>) -> Result<Scenario, CliError> {
    let kind: ScenarioKind = name.parse().map_err(|_| {
        let known: Vec<&str> = ALL_SCENARIOS.iter().map(|k| k.name()).collect();
        CliError::Usage(format!("--scenario: unknown scenario '{name}' (one of {})", known.join(", ")))
    })?;
    Scenario::new(kind, ScenarioParams { n, alpha, phi, ..Default::default() }).map_err(usage)
}

/// Parses and validates `argv` (without the program name).
pub fn parse_args<I, S>(argv: I) -> Result<Command, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let args = std::iter::once(std::ffi::OsString::from("metrolab")).chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Info(e.render().to_string())
        }
        _ => CliError::Usage(e.render().to_string().trim_end().trim_start_matches("error: ").to_string()),
    })?;
    let out_fmt = |o: Output| -> (OutputFormat, Option<PathBuf>) { (o.format.parse().unwrap_or_default(), o.out) };
    let positive = |flag: &str, v: u64| {
        if v == 0 {
            Err(CliError::Usage(format!("{flag} must be >= 1")))
        } else {
            Ok(())
        }
    };
    let (verb, scenario, (format, out)) = match cli.verb {
        Verb::Bounds { scenario: name, n, alpha, phi, t, output } => {
            positive("--t", t)?;
            (Action::Bounds { t }, Some(scenario(&name, n, alpha, phi)?), out_fmt(output))
        }
        Verb::Sweep { scenario: name, sizes, phi, t, output } => {
            positive("--t", t)?;
            if sizes.len() < 3 {
                return Err(CliError::Usage(format!("--sizes: need at least 3 sizes, got {}", sizes.len())));
            }
            if sizes.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(CliError::Usage("--sizes: sizes must be strictly increasing".into()));
            }
            let s = scenario(&name, None, None, phi)?;
            for &size in &sizes {
                s.resized(size).map_err(|e| CliError::Usage(format!("--sizes: {e}")))?;
            }
            (Action::Sweep { sizes, t }, Some(s), out_fmt(output))
        }
        Verb::Simulate { scenario: name, n, alpha, phi, shots, trials, seed, output } => {
            positive("--shots", shots)?;
            positive("--trials", trials as u64)?;
            (Action::Simulate { shots, trials, seed }, Some(scenario(&name, n, alpha, phi)?), out_fmt(output))
        }
        Verb::Scenarios { output } => (Action::Scenarios, None, out_fmt(output)),
    };
    Ok(Command { verb, scenario, format, out })
}

fn catalog(format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut s = String::from("scenario,params,description\n");
            for k in ALL_SCENARIOS {
                s.push_str(&format!("{},\"{}\",\"{}\"\n", k.name(), k.required_params(), k.description()));
            }
            s
        }
        OutputFormat::Json => {
            let list: Vec<_> = ALL_SCENARIOS
                .iter()
                .map(|k| json!({"scenario": k.name(), "params": k.required_params(), "description": k.description()}))
                .collect();
            let mut s = serde_json::to_string_pretty(&json!({ "scenarios": list })).expect("JSON values serialize");
            s.push('\n');
            s
        }
    }
}

fn run(cmd: &Command, stderr: &mut dyn Write) -> Result<(String, bool), MetroError> {
    let mut failed = false;
    let text = match (&cmd.verb, &cmd.scenario) {
        (Action::Scenarios, _) => catalog(cmd.format),
        (Action::Bounds { t }, Some(s)) => {
            let row = scenario_row(s, *t)?;
            for (field, e) in row.report.errors() {
                let _ = writeln!(stderr, "error: {field}: {e}");
                failed = true;
            }
            render(Emittable::Row(&row), cmd.format)
        }
        (Action::Sweep { sizes, t }, Some(s)) => {
            let sweep = sweep_scaling(s, sizes, *t)?;
            for row in &sweep.rows {
                for (field, e) in row.report.errors() {
                    let _ = writeln!(stderr, "error: size {}: {field}: {e}", row.size);
                    failed = true;
                }
            }
            render(Emittable::Sweep(&sweep), cmd.format)
        }
        (Action::Simulate { shots, trials, seed }, Some(s)) => {
            let phi = match s.params.phi {
                Some(phi) => phi,
                None => s.setup()?.phi,
            };
            let mc = monte_carlo_mse(s, phi, *shots, *trials, *seed)?;
            render(Emittable::MonteCarlo(&mc), cmd.format)
        }
        (_, None) => return Err(MetroError::Schema("no scenario given".into())),
    };
    Ok((text, failed))
}

/// Runs `cmd`, writing results to `--out` or `stdout` and diagnostics to
/// `stderr`. Returns the process exit code.
///
/// A report that is printed but has failed fields still exits with 1.
pub fn execute(cmd: &Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match run(cmd, stderr) {
        Ok((text, failed)) => {
            let written = match &cmd.out {
                Some(path) => std::fs::write(path, &text).map_err(MetroError::from),
                None => stdout.write_all(text.as_bytes()).map_err(MetroError::from),
            };
            if let Err(e) = written {
                let _ = writeln!(stderr, "error: {e}");
                return EXIT_NUMERICAL;
            }
            if failed {
                EXIT_NUMERICAL
            } else {
                EXIT_OK
            }
        }
        Err(e @ MetroError::Schema(_)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_USAGE
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_NUMERICAL
        }
    }
}

/// Parses `argv` and executes it.
pub fn main_with<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    match parse_args(argv) {
        Ok(cmd) => execute(&cmd, stdout, stderr),
        Err(CliError::Info(text)) => {
            let _ = stdout.write_all(text.as_bytes());
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(stderr, "{e}");
            EXIT_USAGE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_bounds() {
        let cmd = parse_args(["bounds", "--scenario", "zero-n-superposition", "--n", "4", "--phi", "0.05"]).unwrap();
        assert_eq!(cmd.verb, Action::Bounds { t: 1 });
        let s = cmd.scenario.unwrap();
        assert_eq!(s.kind, ScenarioKind::ZeroNSuperposition);
        assert_eq!(s.params.n, Some(4));
        assert_eq!(s.params.phi, Some(0.05));
        assert_eq!(cmd.format, OutputFormat::Csv);
    }

    #[test]
    fn parses_sizes() {
        let cmd = parse_args(["sweep", "--scenario", "network-rb", "--sizes", "2,4,8"]).unwrap();
        assert_eq!(cmd.verb, Action::Sweep { sizes: vec![2.0, 4.0, 8.0], t: 1 });
    }

    #[test]
    fn usage_errors_name_the_flag() {
        let cases: [(&[&str], &str); 6] = [
            (&["bounds", "--bogus"], "--bogus"),
            (&["bounds", "--scenario", "nope"], "--scenario"),
            (&["sweep", "--scenario", "ghz-ramsey", "--sizes", "2,4"], "--sizes"),
            (&["sweep", "--scenario", "ghz-ramsey", "--sizes", "2,4,4"], "--sizes"),
            (&["bounds", "--scenario", "ghz-ramsey", "--t", "0"], "--t"),
            (&["simulate", "--scenario", "ghz-ramsey", "--n", "2", "--alpha", "1"], "alpha"),
        ];
        for (argv, flag) in cases {
            match parse_args(argv.iter().copied()) {
                Err(CliError::Usage(m)) => assert!(m.contains(flag), "{argv:?}: {m}"),
                other => panic!("{argv:?}: {other:?}"),
            }
        }
    }

    #[test]
    fn exactly_one_verb() {
        assert!(matches!(parse_args(Vec::<String>::new()), Err(CliError::Usage(_))));
        assert!(matches!(parse_args(["bounds", "sweep"]), Err(CliError::Usage(_))));
    }
}
