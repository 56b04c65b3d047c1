//! `chargeq` command line.
//!
//! Reports go to stdout (or `--out`), diagnostics to stderr as one line:
//! `chargeq: error[<class>]: <message>`.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::allocator::{allocate, validate_allocation, Band, MarginRule};
use crate::compiler::{compile, parse_circuit, simulate_timeline, FidelityReport, Model};
use crate::error::{Error, Result};
use crate::hamiltonian::check_simulable;
use crate::io::{
    load_device, load_layout, load_timeline, read_text, report_json, timeline_to_json, write_text,
    AllocationReport, DerivedReport,
};
use crate::physics::{derive_params, validate_device, ControlSettings};

#[derive(Debug, Parser)]
#[command(name = "chargeq", version, about = "Charge-qubit array simulator and schedule compiler")]
pub struct Cli {
    /// Reserved; every algorithm is deterministic.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Full,
    Rwa,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Full => Model::Full,
            ModelArg::Rwa => Model::Rwa,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Circuit energies and rates at zero flux.
    Derive {
        #[arg(long)]
        device: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Operating-regime checks at zero flux.
    Validate {
        #[arg(long)]
        device: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frequency assignment for a resonant layout.
    Allocate {
        #[arg(long)]
        device: PathBuf,
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Circuit to timeline.
    Compile {
        #[arg(long)]
        device: PathBuf,
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact simulation of a timeline file.
    Simulate {
        #[arg(long)]
        device: PathBuf,
        #[arg(long)]
        timeline: PathBuf,
        #[arg(long, value_enum, default_value = "rwa")]
        model: ModelArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse, compile and simulate in one go.
    Run {
        #[arg(long)]
        device: PathBuf,
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, value_enum, default_value = "rwa")]
        model: ModelArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub const EXIT_INVALID_INPUT: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;
pub const EXIT_SIZE_CAP: u8 = 4;
pub const EXIT_CONTRACT: u8 = 5;

/// Exit status and diagnostic class for an error.
pub fn classify(e: &Error) -> (u8, &'static str) {
    match e {
        Error::Crowding(_) | Error::LayerInfeasible { .. } | Error::UnreachableFrequency { .. } => {
            (EXIT_INFEASIBLE, "infeasible")
        }
        Error::SizeCap { .. } => (EXIT_SIZE_CAP, "size-cap"),
        Error::Contract(_) | Error::NonHermitian(_) => (EXIT_CONTRACT, "contract"),
        Error::Parse(_) => (EXIT_INVALID_INPUT, "parse"),
        Error::Schema(_) | Error::Io { .. } => (EXIT_INVALID_INPUT, "input"),
        Error::DegenerateDevice => (EXIT_INVALID_INPUT, "degenerate-device"),
        _ => (EXIT_INVALID_INPUT, "invalid"),
    }
}

/// Single-line diagnostic for stderr.
pub fn diagnostic(e: &Error) -> String {
    let (_, class) = classify(e);
    let msg = e.to_string().replace('\n', " ");
    format!("chargeq: error[{class}]: {msg}")
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct RunReport<'a> {
    total_duration_ns: f64,
    op_count: usize,
    #[serde(flatten)]
    fidelity: &'a FidelityReport,
}

/// Runs one command; `Ok(code)` for outcomes that still produce a report.
pub fn execute(cli: &Cli) -> Result<u8> {
    if let Some(seed) = cli.seed {
        log::debug!("seed {seed} ignored: all algorithms are deterministic");
    }
    match &cli.command {
        Command::Derive { device, out } => {
            let d = load_device(device)?;
            let p = derive_params(&d, &ControlSettings::uniform(d.n_qubits(), 0.0))?;
            emit(&report_json(&DerivedReport::new(&p)), out.as_deref())?;
            Ok(0)
        }
        Command::Validate { device, out } => {
            let d = load_device(device)?;
            let report = validate_device(&d, &ControlSettings::uniform(d.n_qubits(), 0.0));
            if report.error.is_some() {
                derive_params(&d, &ControlSettings::uniform(d.n_qubits(), 0.0))?;
            }
            emit(&report_json(&report), out.as_deref())?;
            Ok(0)
        }
        Command::Allocate { device, layout, out } => {
            let d = load_device(device)?;
            let l = load_layout(layout)?;
            let p = derive_params(&d, &ControlSettings::uniform(d.n_qubits(), 0.0))?;
            let band = Band::from_hz(d.band_low, d.band_high);
            let rule = MarginRule::default();
            let result = allocate(&l, &p, band, &rule)?;
            let check = result
                .feasible
                .then(|| validate_allocation(&result, &l, &p, &rule, band));
            emit(&report_json(&AllocationReport::new(&result, check.as_ref())), out.as_deref())?;
            if let Some(cert) = &result.certificate {
                eprintln!("chargeq: error[infeasible]: {}", cert.describe());
                return Ok(EXIT_INFEASIBLE);
            }
            if check.is_some_and(|c| !c.pass) {
                eprintln!("chargeq: error[contract]: allocation failed independent validation");
                return Ok(EXIT_CONTRACT);
            }
            Ok(0)
        }
        Command::Compile { device, circuit, out } => {
            let d = load_device(device)?;
            let c = parse_circuit(&read_text(circuit)?)?;
            let t = compile(&c, &d)?;
            emit(&timeline_to_json(&t), out.as_deref())?;
            Ok(0)
        }
        Command::Simulate {
            device,
            timeline,
            model,
            out,
        } => {
            let d = load_device(device)?;
            check_simulable(d.n_qubits())?;
            let t = load_timeline(timeline, &d)?;
            let report = simulate_timeline(&t, &d, (*model).into())?;
            emit(&report_json(&report), out.as_deref())?;
            Ok(0)
        }
        Command::Run {
            device,
            circuit,
            model,
            out,
        } => {
            let d = load_device(device)?;
            let c = parse_circuit(&read_text(circuit)?)?;
            let t = compile(&c, &d)?;
            let report = simulate_timeline(&t, &d, (*model).into())?;
            let run = RunReport {
                total_duration_ns: t.total_duration * 1e9,
                op_count: t.op_count,
                fidelity: &report,
            };
            emit(&report_json(&run), out.as_deref())?;
            Ok(0)
        }
    }
}

pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let msg = e.to_string();
                let first = msg.lines().next().unwrap_or("invalid arguments");
                eprintln!("chargeq: error[usage]: {}", first.trim_start_matches("error: "));
                return ExitCode::from(EXIT_INVALID_INPUT);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", diagnostic(&e));
            ExitCode::from(classify(&e).0)
        }
    }
}
