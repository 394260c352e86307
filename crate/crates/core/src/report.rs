//! Aggregated design reports, the reference table and CSV writers.

use std::f64::consts::TAU;
use std::io::Write;

use serde::Serialize;

use crate::addressing::{
    coupling_report, epsilon_c, required_gradient, spectrum, CouplingReport, DriveField, Frequency, Spectrum,
};
use crate::config::{check_linearity, DriveSettings, Linearity, TrapConfig};
use crate::crystal::{
    highest_mode_empirical, highest_mode_empirical_in_range, min_spacing, solve_chain, spacing_law,
    ChainSolution, ExtraForces,
};
use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};
use crate::fidelity::{
    estimate_spread, gate_error_closed_form, gate_error_numeric_oracle, ForceConvention, GateErrorEstimate,
    SamplingPlan, SpreadEstimate, DEFAULT_ORACLE_SAMPLES,
};
use crate::species::IonSpecies;
use crate::zeeman::QubitLevels;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Drive used when a document has no `[drive]` table: resonant microwave
/// along the trap axis with Ω_R = ω_z/10.
pub fn drive_for(config: &TrapConfig, settings: &DriveSettings) -> Result<DriveField> {
    DriveField::new(
        settings
            .drive_frequency
            .unwrap_or(config.species.hyperfine_splitting),
        settings.incidence_angle.unwrap_or(0.0),
        settings.rabi_frequency.unwrap_or(0.1 * config.omega_z),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

const TOOL: ToolInfo = ToolInfo {
    name: TOOL_NAME,
    version: TOOL_VERSION,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainSummary {
    pub n_ions: usize,
    /// m
    pub length_scale_z0: f64,
    /// m
    pub positions: Vec<f64>,
    /// m
    pub min_spacing: Option<f64>,
    /// z₀·2/N^0.559, m
    pub spacing_law: Option<f64>,
    pub mode_frequencies: Vec<Frequency>,
    /// ω_N/ω_z
    pub highest_mode_ratio: f64,
    /// 2.7 + 0.5N for 5 ≤ N ≤ 100
    pub highest_mode_empirical: Option<f64>,
    pub warnings: Vec<String>,
}

impl ChainSummary {
    pub fn new(config: &TrapConfig, chain: &ChainSolution) -> Result<Self> {
        let n = chain.n_ions();
        let top = *chain.mode_frequencies.last().expect("at least one mode");
        Ok(ChainSummary {
            n_ions: n,
            length_scale_z0: chain.length_scale_z0,
            positions: chain.positions.clone(),
            min_spacing: if n >= 2 {
                Some(min_spacing(&chain.positions)?)
            } else {
                None
            },
            spacing_law: if n >= 2 {
                Some(spacing_law(n, chain.length_scale_z0)?)
            } else {
                None
            },
            mode_frequencies: chain.mode_frequencies.iter().map(|&w| w.into()).collect(),
            highest_mode_ratio: top / config.omega_z,
            highest_mode_empirical: highest_mode_empirical_in_range(n).then(|| highest_mode_empirical(n)),
            warnings: chain.warnings.clone(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignOptions {
    pub bus_mode: usize,
    pub fidelity: bool,
    pub convention: ForceConvention,
    pub sampling: SamplingPlan,
    /// Monte-Carlo samples for the numeric gate-error estimate; `None` skips it.
    pub oracle_samples: Option<usize>,
}

impl Default for DesignOptions {
    fn default() -> Self {
        DesignOptions {
            bus_mode: 0,
            fidelity: true,
            convention: ForceConvention::MeanForce,
            sampling: SamplingPlan::default(),
            oracle_samples: Some(DEFAULT_ORACLE_SAMPLES),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub timestamp: String,
    pub seed: Option<u64>,
    pub config: TrapConfig,
    pub linearity: Linearity,
    pub drive: DriveField,
    pub chain: ChainSummary,
    pub coupling: CouplingReport,
    pub convention: Option<ForceConvention>,
    pub spread: Option<SpreadEstimate>,
    pub gate_error: Option<GateErrorEstimate>,
}

impl DesignReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs crystal → Zeeman → addressing → (optionally) fidelity.
pub fn design_report(config: &TrapConfig, drive: &DriveField, opts: &DesignOptions) -> Result<DesignReport> {
    let levels = QubitLevels::for_config(config);
    let chain = solve_chain(config, &ExtraForces::zero(config.n_ions))?;
    let coupling = coupling_report(config, &chain, &levels, drive, opts.bus_mode)?;
    let (spread, gate_error) = if opts.fidelity && config.n_ions >= 2 {
        let spread = estimate_spread(config, &levels, &opts.sampling, opts.convention)?;
        let closed = gate_error_closed_form(spread.mean_sigma, drive.rabi_frequency)?;
        let numeric = opts
            .oracle_samples
            .map(|n| {
                gate_error_numeric_oracle(spread.mean_sigma, drive.rabi_frequency, n, opts.sampling.seed)
            })
            .transpose()?;
        let gate = GateErrorEstimate {
            rabi_frequency: drive.rabi_frequency,
            error_closed_form: closed,
            error_numeric: numeric,
        };
        (Some(spread), Some(gate))
    } else {
        (None, None)
    };
    Ok(DesignReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tool: TOOL,
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        seed: opts.fidelity.then_some(opts.sampling.seed),
        config: config.clone(),
        linearity: check_linearity(config),
        drive: *drive,
        chain: ChainSummary::new(config, &chain)?,
        coupling,
        convention: opts.fidelity.then_some(opts.convention),
        spread,
        gate_error,
    })
}

/// Published reference values for one trap setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReferenceCell {
    pub n_ions: usize,
    pub trap_frequency_hz: f64,
    /// T/m
    pub gradient: f64,
    pub epsilon_c: f64,
    pub gate_error: f64,
}

pub const REFERENCE_TABLE: [ReferenceCell; 6] = [
    ReferenceCell {
        n_ions: 10,
        trap_frequency_hz: 1e5,
        gradient: 9.89,
        epsilon_c: 0.0075,
        gate_error: 3.4e-6,
    },
    ReferenceCell {
        n_ions: 20,
        trap_frequency_hz: 1e5,
        gradient: 22.1,
        epsilon_c: 0.012,
        gate_error: 5.2e-5,
    },
    ReferenceCell {
        n_ions: 40,
        trap_frequency_hz: 1e5,
        gradient: 54.7,
        epsilon_c: 0.021,
        gate_error: 1.1e-3,
    },
    ReferenceCell {
        n_ions: 10,
        trap_frequency_hz: 1e6,
        gradient: 459.0,
        epsilon_c: 0.011,
        gate_error: 1.6e-5,
    },
    ReferenceCell {
        n_ions: 20,
        trap_frequency_hz: 1e6,
        gradient: 1030.0,
        epsilon_c: 0.018,
        gate_error: 2.4e-4,
    },
    ReferenceCell {
        n_ions: 40,
        trap_frequency_hz: 1e6,
        gradient: 2540.0,
        epsilon_c: 0.031,
        gate_error: 4.9e-3,
    },
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConventionError {
    pub convention: ForceConvention,
    pub sigma: f64,
    pub gate_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCell {
    pub reference: ReferenceCell,
    /// T/m
    pub gradient: f64,
    /// centre ion, centre-of-mass mode
    pub epsilon_c: f64,
    /// Ω_R = ω_z/10, rad/s
    pub rabi_frequency: f64,
    pub gate_errors: Vec<ConventionError>,
}

/// Computes one reference cell: the minimum gradient, ε_c at that gradient,
/// and the gate error from the frequency spread for each convention in
/// `conventions`.
pub fn table_cell(
    reference: &ReferenceCell,
    conventions: &[ForceConvention],
    plan: &SamplingPlan,
) -> Result<TableCell> {
    let base = TrapConfig::new(
        IonSpecies::yb171(),
        reference.n_ions,
        TAU * reference.trap_frequency_hz,
        None,
        0.0,
        0.0,
    )?;
    let levels = QubitLevels::for_config(&base);
    let gradient = required_gradient(&base, &levels)?;
    let config = base.with_gradient(gradient)?;
    let chain = solve_chain(&config, &ExtraForces::zero(config.n_ions))?;
    let eps = epsilon_c(&config, &chain, &levels, chain.center_ion(), 0)?;
    let rabi = 0.1 * config.omega_z;
    let gate_errors = conventions
        .iter()
        .map(|&c| {
            let s = estimate_spread(&config, &levels, plan, c)?;
            Ok(ConventionError {
                convention: c,
                sigma: s.mean_sigma,
                gate_error: gate_error_closed_form(s.mean_sigma, rabi)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TableCell {
        reference: *reference,
        gradient,
        epsilon_c: eps,
        rabi_frequency: rabi,
        gate_errors,
    })
}

pub fn reference_table(conventions: &[ForceConvention], plan: &SamplingPlan) -> Result<Vec<TableCell>> {
    REFERENCE_TABLE
        .iter()
        .map(|r| table_cell(r, conventions, plan))
        .collect()
}

/// One computed-vs-reference number.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableEntry {
    pub n_ions: usize,
    pub trap_frequency_hz: f64,
    pub quantity: &'static str,
    pub convention: Option<ForceConvention>,
    pub reference: f64,
    pub computed: f64,
    pub relative_deviation: f64,
}

pub fn table_entries(cells: &[TableCell]) -> Vec<TableEntry> {
    let entry = |c: &TableCell, quantity, convention, reference: f64, computed: f64| TableEntry {
        n_ions: c.reference.n_ions,
        trap_frequency_hz: c.reference.trap_frequency_hz,
        quantity,
        convention,
        reference,
        computed,
        relative_deviation: computed / reference - 1.0,
    };
    let mut out = Vec::new();
    for c in cells {
        out.push(entry(
            c,
            "gradient_t_per_m",
            None,
            c.reference.gradient,
            c.gradient,
        ));
        out.push(entry(c, "epsilon_c", None, c.reference.epsilon_c, c.epsilon_c));
        for g in &c.gate_errors {
            out.push(entry(
                c,
                "gate_error",
                Some(g.convention),
                c.reference.gate_error,
                g.gate_error,
            ));
        }
    }
    out
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidArgument(format!("csv: {other:?}")),
    }
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_table_csv<W: Write>(entries: &[TableEntry], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "n_ions",
        "trap_frequency_hz",
        "quantity",
        "convention",
        "reference",
        "computed",
        "relative_deviation",
    ])
    .map_err(csv_error)?;
    for e in entries {
        w.write_record([
            e.n_ions.to_string(),
            fmt(e.trap_frequency_hz),
            e.quantity.to_string(),
            e.convention.map(|c| c.label()).unwrap_or("").to_string(),
            fmt(e.reference),
            fmt(e.computed),
            fmt(e.relative_deviation),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Mode table: frequency, ratio to ω_z and the normalized eigenvector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeTable {
    pub omega_z: f64,
    pub frequencies: Vec<Frequency>,
    pub ratios: Vec<f64>,
    /// vectors[l][i]
    pub vectors: Vec<Vec<f64>>,
}

impl ModeTable {
    pub fn new(config: &TrapConfig, chain: &ChainSolution) -> Self {
        ModeTable {
            omega_z: config.omega_z,
            frequencies: chain.mode_frequencies.iter().map(|&w| w.into()).collect(),
            ratios: chain
                .mode_frequencies
                .iter()
                .map(|w| w / config.omega_z)
                .collect(),
            vectors: chain.mode_vectors.clone(),
        }
    }
}

pub fn write_modes_csv<W: Write>(modes: &ModeTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = modes.vectors.first().map_or(0, Vec::len);
    let mut header = vec![
        "mode".to_string(),
        "frequency_rad_s".into(),
        "frequency_hz".into(),
        "ratio".into(),
    ];
    header.extend((0..n).map(|i| format!("ion_{i}")));
    w.write_record(&header).map_err(csv_error)?;
    for (l, f) in modes.frequencies.iter().enumerate() {
        let mut row = vec![l.to_string(), fmt(f.rad_per_s), fmt(f.hz), fmt(modes.ratios[l])];
        row.extend(modes.vectors[l].iter().map(|&v| fmt(v)));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

pub fn compute_spectrum(config: &TrapConfig) -> Result<Spectrum> {
    let chain = solve_chain(config, &ExtraForces::zero(config.n_ions))?;
    Ok(spectrum(config, &chain, &QubitLevels::for_config(config)))
}

pub fn write_spectrum_csv<W: Write>(spec: &Spectrum, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "ion",
        "position_m",
        "line",
        "mode",
        "frequency_rad_s",
        "frequency_hz",
    ])
    .map_err(csv_error)?;
    for ion in &spec.ions {
        let mut row = |line: &str, mode: Option<usize>, f: f64| {
            w.write_record([
                ion.ion.to_string(),
                fmt(ion.position),
                line.to_string(),
                mode.map(|m| m.to_string()).unwrap_or_default(),
                fmt(f),
                fmt(f / TAU),
            ])
        };
        row("carrier", None, ion.carrier).map_err(csv_error)?;
        for (l, &f) in ion.red.iter().enumerate() {
            row("red", Some(l), f).map_err(csv_error)?;
        }
        for (l, &f) in ion.blue.iter().enumerate() {
            row("blue", Some(l), f).map_err(csv_error)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_couplings_csv<W: Write>(report: &CouplingReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "ion",
        "position_m",
        "local_field_t",
        "resonance_rad_s",
        "resonance_hz",
        "epsilon_c",
        "eta",
        "eta_eff",
    ])
    .map_err(csv_error)?;
    for c in &report.ions {
        w.write_record([
            c.ion.to_string(),
            fmt(c.position),
            fmt(c.local_field),
            fmt(c.resonance.rad_per_s),
            fmt(c.resonance.hz),
            fmt(c.epsilon_c),
            fmt(c.eta),
            fmt(c.eta_eff),
        ])
        .map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Time series as CSV, preceded by one `# {json}` line echoing `header`.
pub fn write_time_series_csv<W: Write, H: Serialize>(
    series: &TimeSeries,
    header: &H,
    mut out: W,
) -> Result<()> {
    let json = serde_json::to_string(header).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    writeln!(out, "# {json}")?;
    let mut w = csv::Writer::from_writer(out);
    let mut cols = vec!["time_s".to_string(), "norm".into()];
    cols.extend(series.column_labels());
    w.write_record(&cols).map_err(csv_error)?;
    for (i, t) in series.times.iter().enumerate() {
        let mut row = vec![fmt(*t), fmt(series.norms[i])];
        row.extend(series.populations[i].iter().map(|&p| fmt(p)));
        w.write_record(&row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}
