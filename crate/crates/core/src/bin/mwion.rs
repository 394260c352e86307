use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mwion::addressing::{epsilon_c, lamb_dicke};
use mwion::config::{ConfigDocument, DriveSettings};
use mwion::crystal::{solve_chain, ExtraForces};
use mwion::dynamics::{
    evolve_sampled, rabi_frequency_analytic, DriveSpec, EvolveOptions, PhaseConvention, QuantumState,
    TimeSeries, DEFAULT_N_MAX,
};
use mwion::fidelity::{
    ForceConvention, SamplingPlan, DEFAULT_ORACLE_SAMPLES, DEFAULT_SEED, MIN_ORACLE_SAMPLES,
};
use mwion::report::{
    compute_spectrum, design_report, drive_for, reference_table, table_entries, write_couplings_csv,
    write_modes_csv, write_spectrum_csv, write_table_csv, write_time_series_csv, DesignOptions, ModeTable,
    REPORT_SCHEMA_VERSION, TOOL_VERSION,
};
use mwion::{Error, Level, QubitLevels, TrapConfig};

#[derive(Parser)]
#[command(
    name = "mwion",
    version,
    about = "Gradient-addressed trapped-ion design and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: chain, couplings, addressing gradient, gate error.
    Design(DesignArgs),
    /// Reference table: gradient, ε_c and 1−f for six trap settings.
    Table1(TableArgs),
    /// Axial mode frequencies and eigenvectors.
    Modes(StageArgs),
    /// Carrier and sideband lines of every ion.
    Spectrum(StageArgs),
    /// Driven spin–phonon time evolution.
    Evolve(EvolveArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    MeanForce,
    IonInLowerState,
}

impl From<Convention> for ForceConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::MeanForce => ForceConvention::MeanForce,
            Convention::IonInLowerState => ForceConvention::IonInLowerState,
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StageArgs {
    config: PathBuf,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct DesignArgs {
    config: PathBuf,
    /// Skip the Monte-Carlo frequency spread and gate error.
    #[arg(long)]
    no_fidelity: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "mean-force")]
    convention: Convention,
    /// Samples for the numeric gate-error average (0 skips it).
    #[arg(long, default_value_t = DEFAULT_ORACLE_SAMPLES)]
    samples: usize,
    /// Exhaustive enumeration limit for other-ion configurations.
    #[arg(long)]
    sample_budget: Option<u64>,
    #[arg(long, default_value_t = 0)]
    bus_mode: usize,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct TableArgs {
    /// Skip the gate-error column.
    #[arg(long)]
    no_fidelity: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value = "csv", value_enum)]
    format: Format,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Transition {
    Carrier,
    Red,
    Blue,
}

#[derive(Args)]
struct EvolveArgs {
    /// Trap configuration; without it all drive parameters come from flags
    /// and frequencies are in units of the mode frequency.
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "blue")]
    sideband: Transition,
    /// Ion index (default: centre ion).
    #[arg(long)]
    ion: Option<usize>,
    #[arg(long, default_value_t = 0)]
    mode: usize,
    /// Ω_R, rad/s.
    #[arg(long)]
    rabi: Option<f64>,
    /// Δ = ω_M − ω₀, rad/s (default set by --sideband).
    #[arg(long)]
    detuning: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    epsilon_c: Option<f64>,
    /// ω_l, rad/s (only without a config).
    #[arg(long)]
    mode_frequency: Option<f64>,
    /// s (default: two periods of the selected transition).
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_N_MAX)]
    n_max: usize,
    /// Initial qubit level, 0 or 1.
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u8).range(0..=1))]
    initial_spin: u8,
    #[arg(long, default_value_t = 0)]
    initial_n: usize,
    /// Absorb the constant phase 2ηε_c into σ₊.
    #[arg(long)]
    absorb_phase: bool,
    #[command(flatten)]
    out: OutputArgs,
}

fn open_output(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(value: &T, path: &Option<PathBuf>) -> mwion::Result<()> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn read_document(path: &Path) -> mwion::Result<ConfigDocument> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
    ConfigDocument::parse(&text)
}

fn load(path: &Path) -> mwion::Result<(TrapConfig, DriveSettings)> {
    let doc = read_document(path)?;
    Ok((doc.trap_config()?, doc.drive_settings()?))
}

fn design(args: &DesignArgs) -> mwion::Result<()> {
    let (config, settings) = load(&args.config)?;
    let drive = drive_for(&config, &settings)?;
    let mut sampling = SamplingPlan::with_seed(args.seed);
    if let Some(b) = args.sample_budget {
        sampling.sample_budget = b;
    }
    let oracle_samples = match args.samples {
        0 => None,
        n if n < MIN_ORACLE_SAMPLES => {
            return Err(Error::TooFewSamples {
                got: n,
                min: MIN_ORACLE_SAMPLES,
            })
        }
        n => Some(n),
    };
    let opts = DesignOptions {
        bus_mode: args.bus_mode,
        fidelity: !args.no_fidelity,
        convention: args.convention.into(),
        sampling,
        oracle_samples,
    };
    let report = design_report(&config, &drive, &opts)?;
    match args.out.format {
        Format::Json => write_json(&report, &args.out.output),
        Format::Csv => {
            let mut out = open_output(&args.out.output)?;
            write_couplings_csv(&report.coupling, &mut out)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn table1(args: &TableArgs) -> mwion::Result<()> {
    let conventions: &[ForceConvention] = if args.no_fidelity {
        &[]
    } else {
        &ForceConvention::ALL
    };
    let cells = reference_table(conventions, &SamplingPlan::with_seed(args.seed))?;
    let entries = table_entries(&cells);
    match args.format {
        Format::Json => write_json(&entries, &args.output),
        Format::Csv => {
            let mut out = open_output(&args.output)?;
            write_table_csv(&entries, &mut out)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn modes(args: &StageArgs) -> mwion::Result<()> {
    let (config, _) = load(&args.config)?;
    let chain = solve_chain(&config, &ExtraForces::zero(config.n_ions))?;
    let table = ModeTable::new(&config, &chain);
    match args.out.format {
        Format::Json => write_json(&table, &args.out.output),
        Format::Csv => {
            let mut out = open_output(&args.out.output)?;
            write_modes_csv(&table, &mut out)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn spectrum(args: &StageArgs) -> mwion::Result<()> {
    let (config, _) = load(&args.config)?;
    let spec = compute_spectrum(&config)?;
    match args.out.format {
        Format::Json => write_json(&spec, &args.out.output),
        Format::Csv => {
            let mut out = open_output(&args.out.output)?;
            write_spectrum_csv(&spec, &mut out)?;
            out.flush()?;
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct EvolveHeader {
    schema_version: u32,
    tool_version: &'static str,
    transition: Transition,
    drive: DriveSpec,
    /// ω_l, rad/s
    mode_frequency: f64,
    n_max: usize,
    initial_spin: u8,
    initial_n: usize,
    /// Ω_R·|⟨n′|D(η_eff)|n⟩| for the selected transition, rad/s
    analytic_rabi_frequency: f64,
}

#[derive(Serialize)]
struct EvolveOutput<'a> {
    header: &'a EvolveHeader,
    series: &'a TimeSeries,
}

fn evolve(args: &EvolveArgs) -> mwion::Result<()> {
    let (mode_frequency, eta, eps, rabi) = match &args.config {
        Some(path) => {
            if args.mode_frequency.is_some() {
                return Err(Error::InvalidArgument(
                    "--mode-frequency conflicts with a config file".into(),
                ));
            }
            let (config, settings) = load(path)?;
            let drive = drive_for(&config, &settings)?;
            let chain = solve_chain(&config, &ExtraForces::zero(config.n_ions))?;
            let levels = QubitLevels::for_config(&config);
            let ion = args.ion.unwrap_or_else(|| chain.center_ion());
            let w = chain.mode_frequency(args.mode)?;
            (
                w,
                args.eta
                    .map(Ok)
                    .unwrap_or_else(|| lamb_dicke(&config, &chain, &drive, ion, args.mode))?,
                args.epsilon_c
                    .map(Ok)
                    .unwrap_or_else(|| epsilon_c(&config, &chain, &levels, ion, args.mode))?,
                args.rabi.unwrap_or(drive.rabi_frequency),
            )
        }
        None => {
            let w = args.mode_frequency.unwrap_or(1.0);
            (
                w,
                args.eta.unwrap_or(0.0),
                args.epsilon_c.unwrap_or(0.0075),
                args.rabi.unwrap_or(0.02 * w),
            )
        }
    };
    let n = args.initial_n;
    let (target, default_detuning) = match args.sideband {
        Transition::Carrier => (n, 0.0),
        Transition::Blue => (n + 1, mode_frequency),
        Transition::Red => (
            n.checked_sub(1)
                .ok_or_else(|| Error::InvalidArgument("red sideband needs --initial-n ≥ 1".into()))?,
            -mode_frequency,
        ),
    };
    let eta_eff = eta.hypot(eps);
    let analytic = rabi_frequency_analytic(target, n, eta_eff, rabi)?;
    let duration = match args.duration {
        Some(d) => d,
        None if analytic > 0.0 => 2.0 * std::f64::consts::TAU / analytic,
        None => {
            return Err(Error::InvalidArgument(
                "transition has zero coupling; pass --duration".into(),
            ))
        }
    };
    // at least 16 points per trap period so the micromotion-like ripple is resolved
    let samples = args.samples.unwrap_or_else(|| {
        ((duration * mode_frequency / std::f64::consts::TAU * 16.0).ceil() as usize + 1).max(2001)
    });
    let spin = if args.initial_spin == 1 {
        Level::Upper
    } else {
        Level::Lower
    };
    let drive = DriveSpec {
        phase: if args.absorb_phase {
            PhaseConvention::Absorbed
        } else {
            PhaseConvention::Explicit
        },
        ..DriveSpec::new(
            rabi,
            args.detuning.unwrap_or(default_detuning),
            eta,
            eps,
            duration,
        )
    };
    let state = QuantumState::basis(spin, n, args.n_max)?;
    let series = evolve_sampled(&state, &drive, mode_frequency, samples, &EvolveOptions::default())?;
    for w in &series.warnings {
        eprintln!("warning: {w}");
    }
    let header = EvolveHeader {
        schema_version: REPORT_SCHEMA_VERSION,
        tool_version: TOOL_VERSION,
        transition: args.sideband,
        drive,
        mode_frequency,
        n_max: args.n_max,
        initial_spin: args.initial_spin,
        initial_n: n,
        analytic_rabi_frequency: analytic,
    };
    match args.out.format {
        Format::Json => write_json(
            &EvolveOutput {
                header: &header,
                series: &series,
            },
            &args.out.output,
        ),
        Format::Csv => {
            let mut out = open_output(&args.out.output)?;
            write_time_series_csv(&series, &header, &mut out)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (stage, result) = match &cli.command {
        Command::Design(a) => ("design", design(a)),
        Command::Table1(a) => ("table1", table1(a)),
        Command::Modes(a) => ("modes", modes(a)),
        Command::Spectrum(a) => ("spectrum", spectrum(a)),
        Command::Evolve(a) => ("evolve", evolve(a)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mwion {stage}: {e}");
            if e.is_config_error() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
