use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::Parser;

use qndlab_cli::config::parse_config;
use qndlab_cli::experiment::{run_experiment, ExperimentKind, ExperimentSpec};
use qndlab_cli::report::{write_report, OutputFormat};
use qndlab_cli::CliError;

/// Seeded, reproducible experiments over the qndlab core modules.
///
/// Every flag has a `key=value` spec-file equivalent (via --config);
/// command-line flags override file values. Reports are JSON (or CSV for
/// kinds with a row table) and byte-reproducible given (spec, seed) modulo
/// the two timestamp fields.
#[derive(Debug, Parser)]
#[command(name = "qndlab", version, about)]
struct Cli {
    /// Experiment kind: haar-mixed | kcopy-exact | kcopy-sample |
    /// net-coverage | complexity | qnd
    kind: Option<String>,

    /// Base seed for all derived random streams.
    #[arg(long)]
    seed: Option<u64>,

    /// Report destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,

    /// Report format.
    #[arg(long)]
    format: Option<String>,

    /// Spec file with key=value lines and optional [section] headers.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Ambient dimension (kcopy-*, net-coverage).
    #[arg(long)]
    d: Option<String>,

    /// Copy count (kcopy-*).
    #[arg(long)]
    k: Option<String>,

    /// Qubit count (haar-mixed).
    #[arg(long)]
    n: Option<String>,

    /// Sample count (haar-mixed, kcopy-sample, qnd random mode).
    #[arg(long)]
    samples: Option<String>,

    /// Measurement shot count (haar-mixed).
    #[arg(long)]
    shots: Option<String>,

    /// Distance threshold(s); comma-separated for sweeps (net-coverage,
    /// complexity).
    #[arg(long)]
    eps: Option<String>,

    /// Net size(s); comma-separated for sweeps (net-coverage, qnd).
    #[arg(long = "net-size")]
    net_size: Option<String>,

    /// Monte Carlo trials (net-coverage) or per-witness trials (qnd sampled
    /// mode).
    #[arg(long)]
    trials: Option<String>,

    /// Search depth limit (complexity).
    #[arg(long = "max-len")]
    max_len: Option<String>,

    /// Measurement budget (complexity).
    #[arg(long = "max-meas")]
    max_meas: Option<String>,

    /// Relation program file (qnd).
    #[arg(long)]
    program: Option<PathBuf>,

    /// Target state JSON file (complexity).
    #[arg(long)]
    target: Option<PathBuf>,

    /// Gate alphabet, comma-separated (complexity).
    #[arg(long)]
    gates: Option<String>,

    /// Witness evaluation mode (kcopy-sample: vector|labels; qnd:
    /// total|classical|random).
    #[arg(long)]
    mode: Option<String>,

    /// Classical x input as a bit string (qnd).
    #[arg(long = "x-basis")]
    x_basis: Option<String>,

    /// Accept threshold (qnd).
    #[arg(long = "accept-threshold")]
    accept_threshold: Option<String>,

    /// Reject threshold (qnd).
    #[arg(long = "reject-threshold")]
    reject_threshold: Option<String>,
}

fn merge(map: &mut BTreeMap<String, String>, key: &str, value: Option<String>) {
    if let Some(v) = value {
        map.insert(key.to_string(), v);
    }
}

fn build_spec(cli: Cli) -> Result<(ExperimentSpec, OutputFormat), CliError> {
    let mut map = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read config {path:?}: {e}")))?;
            parse_config(&text)?
        }
        None => BTreeMap::new(),
    };

    // Flags override file values.
    merge(&mut map, "kind", cli.kind);
    merge(&mut map, "seed", cli.seed.map(|s| s.to_string()));
    merge(&mut map, "out", cli.out.map(|p| p.display().to_string()));
    merge(&mut map, "format", cli.format);
    merge(&mut map, "d", cli.d);
    merge(&mut map, "k", cli.k);
    merge(&mut map, "n", cli.n);
    merge(&mut map, "samples", cli.samples);
    merge(&mut map, "shots", cli.shots);
    merge(&mut map, "eps", cli.eps);
    merge(&mut map, "net-size", cli.net_size);
    merge(&mut map, "trials", cli.trials);
    merge(&mut map, "max-len", cli.max_len);
    merge(&mut map, "max-meas", cli.max_meas);
    merge(
        &mut map,
        "program",
        cli.program.map(|p| p.display().to_string()),
    );
    merge(
        &mut map,
        "target",
        cli.target.map(|p| p.display().to_string()),
    );
    merge(&mut map, "gates", cli.gates);
    merge(&mut map, "mode", cli.mode);
    merge(&mut map, "x-basis", cli.x_basis);
    merge(&mut map, "accept-threshold", cli.accept_threshold);
    merge(&mut map, "reject-threshold", cli.reject_threshold);

    let kind_name = map.remove("kind").ok_or_else(|| {
        CliError::Validation("no experiment kind given (positional or kind=)".into())
    })?;
    let kind = ExperimentKind::from_str(&kind_name)?;
    let seed = match map.remove("seed") {
        Some(raw) => raw
            .parse()
            .map_err(|_| CliError::Validation(format!("seed `{raw}` is not an integer")))?,
        None => 0,
    };
    let output_path = map.remove("out").map(PathBuf::from);
    let format = match map.remove("format") {
        Some(raw) => OutputFormat::from_str(&raw)?,
        None => OutputFormat::Json,
    };
    Ok((
        ExperimentSpec {
            kind,
            params: map,
            seed,
            output_path,
        },
        format,
    ))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (spec, format) = build_spec(cli)?;
    let doc = run_experiment(&spec)?;
    match &spec.output_path {
        Some(path) => write_report(&doc, path, format)?,
        None => match format {
            OutputFormat::Json => print!("{}", doc.render_json()),
            OutputFormat::Csv => print!("{}", doc.render_csv()?),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("qndlab: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
