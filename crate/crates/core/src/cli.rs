//! Command-line interface of the `loccw` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::asymmetry::Party;
use crate::constructions::XiVariant;
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, MatrixJson};
use crate::report::{
    analyze, asymmetry_report, canonical_family, detector_asymmetric, detector_general, detector_mixed, family_input,
    gamma_table_report, kmin_report, render_kmin_text, witness_report, AnalysisReport, Input, Source, WitnessOptions,
    DEFAULT_GAMMA_TOL,
};
use crate::setfile::{export_json, export_text, load_set, LoadedSet};

/// Exit code for malformed input or arguments.
pub const EXIT_INPUT: i32 = 2;
/// Exit code for an internal consistency failure.
pub const EXIT_INTERNAL: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "loccw", version, about = "Certify local indistinguishability of orthogonal state sets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Emit the JSON report instead of text.
    #[arg(long, global = true)]
    pub json: bool,

    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Once,
    Product,
}

impl From<VariantArg> for XiVariant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Once => XiVariant::ExtraOnce,
            VariantArg::Product => XiVariant::FullProduct,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PartyArg {
    Alice,
    Bob,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ExportFormat {
    Json,
    Text,
}

#[derive(Debug, Args)]
pub struct SetArgs {
    /// Built-in family name.
    #[arg(long, conflicts_with = "set")]
    pub family: Option<String>,

    /// Set file (text or JSON).
    #[arg(long)]
    pub set: Option<PathBuf>,

    /// Dimension parameter; for text set files without a header, the single factor order.
    #[arg(long)]
    pub d: Option<usize>,

    /// Factor orders for text set files without a header, e.g. `2,2`.
    #[arg(long, value_delimiter = ',', conflicts_with = "d")]
    pub factors: Option<Vec<u32>>,

    #[arg(long, value_enum, default_value = "once")]
    pub variant: VariantArg,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the orthogonality check and every applicable certificate.
    Analyze {
        #[command(flatten)]
        source: SetArgs,
        #[arg(long, default_value_t = DEFAULT_GAMMA_TOL)]
        tolerance: f64,
    },
    /// Tabulate γ over all basis labels.
    GammaTable {
        #[command(flatten)]
        source: SetArgs,
        #[arg(long, default_value_t = DEFAULT_GAMMA_TOL)]
        tolerance: f64,
    },
    /// Largest Schmidt coefficient of a detector state.
    Detector {
        /// `mixed` (with --d), `asymmetric` (with --set and --measurement) or `general` (with a set).
        #[arg(long)]
        family: String,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        set: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        factors: Option<Vec<u32>>,
        /// Built-in set for `asymmetric` and `general`.
        #[arg(long)]
        set_family: Option<String>,
        /// First-outcome operator as matrix JSON.
        #[arg(long)]
        measurement: Option<PathBuf>,
    },
    /// Nontrivial orthogonality-preserving first measurements.
    Asymmetry {
        #[command(flatten)]
        source: SetArgs,
        #[arg(long, value_enum, default_value = "both")]
        party: PartyArg,
    },
    /// Witness-operator checks in local dimension 2d.
    Witness {
        #[arg(long)]
        d: usize,
        /// Random product samples for the positivity check.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Random starts for the rank-2 falsifier.
        #[arg(long, default_value_t = 200)]
        falsifier_samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Smallest certified set size per local dimension.
    Kmin {
        #[arg(long, default_value_t = 24)]
        max_dim: usize,
    },
    /// Write a set in a file format.
    Export {
        #[command(flatten)]
        source: SetArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: ExportFormat,
        /// Output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn structure_hint(d: Option<usize>, factors: &Option<Vec<u32>>) -> Option<Vec<u32>> {
    factors.clone().or_else(|| d.map(|d| vec![d as u32]))
}

fn file_input(path: &Path, hint: Option<Vec<u32>>) -> Result<Input> {
    let set = load_set(path, hint.as_deref())?;
    Ok(Input::from_set(set, format!("file:{}", path.display())))
}

pub fn resolve(args: &SetArgs) -> Result<Input> {
    match (&args.family, &args.set) {
        (Some(f), None) => family_input(f, args.d, args.variant.into()),
        (None, Some(path)) => file_input(path, structure_hint(args.d, &args.factors)),
        _ => Err(Error::InvalidArgument("give exactly one of --family or --set".into())),
    }
}

fn read_matrix(path: &Path) -> Result<ComplexMatrix> {
    let text = std::fs::read_to_string(path)?;
    let json: MatrixJson = serde_json::from_str(&text)?;
    ComplexMatrix::from_json(&json)
}

/// Output of one invocation.
pub enum Output {
    Report(AnalysisReport),
    Raw(String),
}

pub fn execute(cli: &Cli) -> Result<Output> {
    let timing = cli.timing;
    let report = match &cli.command {
        Command::Analyze { source, tolerance } => analyze(&resolve(source)?, *tolerance, timing)?,
        Command::GammaTable { source, tolerance } => gamma_table_report(&resolve(source)?, *tolerance, timing)?,
        Command::Detector { family, d, set, factors, set_family, measurement } => match canonical_family(family) {
            "mixed" => {
                let d = d.ok_or_else(|| Error::InvalidArgument("detector mixed needs --d".into()))?;
                detector_mixed(d, timing)?
            }
            "asymmetric" | "general" => {
                let args = SetArgs {
                    family: set_family.clone(),
                    set: set.clone(),
                    d: *d,
                    factors: factors.clone(),
                    variant: VariantArg::Once,
                };
                let input = resolve(&args)?;
                if family == "general" {
                    detector_general(&input, timing)?
                } else {
                    let path = measurement
                        .as_ref()
                        .ok_or_else(|| Error::InvalidArgument("detector asymmetric needs --measurement".into()))?;
                    detector_asymmetric(&input, &read_matrix(path)?, timing)?
                }
            }
            other => {
                return Err(Error::InvalidArgument(format!(
                    "unknown detector '{other}', expected mixed, asymmetric or general"
                )))
            }
        },
        Command::Asymmetry { source, party } => {
            let parties: &[Party] = match party {
                PartyArg::Alice => &[Party::Alice],
                PartyArg::Bob => &[Party::Bob],
                PartyArg::Both => &[Party::Alice, Party::Bob],
            };
            asymmetry_report(&resolve(source)?, parties, timing)?
        }
        Command::Witness { d, samples, falsifier_samples, seed } => witness_report(
            WitnessOptions { d: *d, samples: *samples, falsifier_samples: *falsifier_samples, seed: *seed },
            timing,
        )?,
        Command::Kmin { max_dim } => {
            let report = kmin_report(*max_dim, timing)?;
            if !cli.json {
                if let Some(text) = render_kmin_text(&report) {
                    return Ok(Output::Raw(text));
                }
            }
            report
        }
        Command::Export { source, format, out } => {
            let input = resolve(source)?;
            let text = match (&input.source, format) {
                (Source::Set(set), ExportFormat::Json) => export_json(set)?,
                (Source::Set(LoadedSet::Mes(m)), ExportFormat::Text) => export_text(m)?,
                (Source::Set(LoadedSet::Product(_)), ExportFormat::Text) => {
                    return Err(Error::InvalidArgument("product sets export as JSON only".into()))
                }
                (Source::WeightedMixed { .. }, _) => {
                    return Err(Error::InvalidArgument(
                        "the weighted mixed family has no set-file form; use `detector --family mixed`".into(),
                    ))
                }
            };
            return match out {
                Some(path) => {
                    std::fs::write(path, text + "\n")?;
                    Ok(Output::Raw(String::new()))
                }
                None => Ok(Output::Raw(text + "\n")),
            };
        }
    };
    Ok(Output::Report(report))
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Consistency(_) => EXIT_INTERNAL,
        _ => EXIT_INPUT,
    }
}

/// Configures the global thread pool from LOCCW_THREADS.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("LOCCW_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("LOCCW_THREADS must be a positive integer, got '{v}'")))?;
        if n == 0 {
            return Err(Error::InvalidArgument("LOCCW_THREADS must be positive".into()));
        }
        // a pool already built by an earlier call is kept
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

/// Runs the parsed command, printing to stdout/stderr; returns the exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = configure_threads().and_then(|_| execute(cli)).and_then(|out| match out {
        Output::Report(r) if cli.json => r.to_json().map(|s| s + "\n"),
        Output::Report(r) => Ok(r.render_text()),
        Output::Raw(s) => Ok(s),
    });
    match result {
        Ok(text) => {
            print!("{text}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
