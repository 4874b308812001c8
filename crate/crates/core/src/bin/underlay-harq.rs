use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use underlay_harq::experiments::{
    preset_names, run_sweep, run_validation, write_csv, ConfigError, RawConfig, RowStatus,
    SweepSpec,
};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_CONFIG: u8 = 2;

#[derive(Parser)]
#[command(name = "underlay-harq", version, about = "HARQ throughput and outage in underlay spectrum sharing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a parameter sweep and write it as CSV.
    Sweep {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        mc: McArgs,
        /// Output CSV path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the closed forms against each other and against Monte Carlo.
    Validate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        mc: McArgs,
        /// Also write the JSON report to this path.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in preset name (fig1a, fig1b, fig2a, fig2b).
    #[arg(long)]
    preset: Option<String>,
    /// INI config file; may `include` a preset and override keys.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct McArgs {
    /// Monte Carlo packets per configuration (0 disables); overrides the config.
    #[arg(long)]
    mc: Option<u64>,
    /// RNG seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn load(source: &Source, mc: &McArgs) -> Result<SweepSpec, ConfigError> {
    let raw = match (&source.preset, &source.config) {
        (Some(name), _) => RawConfig::from_preset(name)?,
        (None, Some(path)) => RawConfig::from_file(path)?,
        (None, None) => unreachable!("clap enforces one source"),
    };
    let mut spec = SweepSpec::from_config(&raw)?;
    if let Some(n) = mc.mc {
        spec.mc_packets = n;
    }
    if let Some(seed) = mc.seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn open_output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn sweep(spec: &SweepSpec, out: Option<&PathBuf>) -> io::Result<usize> {
    let rows = run_sweep(spec);
    let mut w = open_output(out)?;
    write_csv(spec, &rows, &mut w)?;
    w.flush()?;
    for row in rows.iter().filter(|r| matches!(r.status, RowStatus::Error(_))) {
        eprintln!(
            "warning: {}={} {} {} M={}: {}",
            spec.axis, row.axis_value, row.protocol, row.traffic, row.m, row.status
        );
    }
    Ok(rows
        .iter()
        .filter(|r| matches!(r.status, RowStatus::Error(_)))
        .count())
}

fn validate(spec: &SweepSpec, report_path: Option<&PathBuf>) -> io::Result<bool> {
    let report = run_validation(spec, spec.mc_packets, spec.seed);
    let json = serde_json::to_string_pretty(&report).map_err(io::Error::other)?;
    if let Some(path) = report_path {
        std::fs::write(path, format!("{json}\n"))?;
    }
    writeln!(io::stdout().lock(), "{json}")?;
    for check in &report.checks {
        eprintln!(
            "{} {} (value {:.3e}, tolerance {:.3e})",
            if check.passed { "PASS" } else { "FAIL" },
            check.name,
            check.value,
            check.tolerance
        );
    }
    let failed = report.failures().count();
    eprintln!("{} checks, {} failed", report.checks.len(), failed);
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (source, mc) = match &cli.command {
        Command::Presets => {
            for name in preset_names().filter(|n| *n != "base") {
                println!("{name}");
            }
            return ExitCode::SUCCESS;
        }
        Command::Sweep { source, mc, .. } | Command::Validate { source, mc, .. } => (source, mc),
    };
    let spec = match load(source, mc) {
        Ok(spec) => spec,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let outcome = match &cli.command {
        Command::Sweep { out, .. } => sweep(&spec, out.as_ref()).map(|errors| errors == 0),
        Command::Validate { report, .. } => validate(&spec, report.as_ref()),
        Command::Presets => unreachable!(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_CHECK_FAILED),
        // The reader of stdout went away (for example `| head`).
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
    }
}
