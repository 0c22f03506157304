//! Subcommand drivers: SNR sweeps, phase-configuration tables, and the
//! built-in self checks against analytic references.
//!
//! CSV bodies are assembled in memory with plain `Display` formatting, so a
//! given config and seed always produce byte-identical output files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use risim_core::{
    effective_channel, estimate_outage, evaluate_configs, mmse_sic_sinr, sample_realization,
    siso_outage_closed_form, trial_rng, zf_filter, ComplexMatrix, CoreError, ExperimentConfig,
    LinkParams, PhaseConfig, Receiver, Scheme, SystemDims,
};

use crate::config::{resolve_phase_table, resolve_sweep, FileConfig, Overrides};

/// Failure paired with the process exit status it maps to.
#[derive(Debug)]
pub struct AppError {
    pub code: u8,
    pub message: String,
}

impl AppError {
    fn io(context: &str, err: std::io::Error) -> Self {
        Self {
            code: 1,
            message: format!("{context}: {err}"),
        }
    }
}

/// Exit status classes: 2 for configuration problems, 3 for structural
/// capacity/dimension violations, 1 otherwise.
fn exit_code(err: &CoreError) -> u8 {
    match err {
        CoreError::DimensionMismatch(_)
        | CoreError::NonFinite { .. }
        | CoreError::CapacityExceeded { .. }
        | CoreError::PhaseLengthMismatch { .. } => 3,
        CoreError::InvalidConfig(_) | CoreError::EnumerationTooLarge { .. } => 2,
        CoreError::Singular => 1,
    }
}

impl From<CoreError> for AppError {
    fn from(err: CoreError) -> Self {
        AppError {
            code: exit_code(&err),
            message: err.to_string(),
        }
    }
}

pub struct RunSummary {
    pub csv_path: PathBuf,
    pub manifest_path: PathBuf,
    pub rows: usize,
}

const CSV_HEADER: &str =
    "snr_db,scheme,receiver,ris_elements,phase_bits,phase_indices,sensor_id,trials,outage,std_err,rate";

struct CsvRow<'a> {
    snr_db: f64,
    scheme: Scheme,
    receiver: Receiver,
    ris_elements: usize,
    phase: Option<&'a PhaseConfig>,
    sensor_id: usize,
    trials: u64,
    outage: f64,
    std_err: f64,
    rate: f64,
}

fn push_row(body: &mut String, row: &CsvRow) {
    let (bits, indices) = match row.phase {
        Some(p) => (
            p.phase_bits().to_string(),
            p.indices()
                .iter()
                .map(|m| m.to_string())
                .collect::<Vec<_>>()
                .join("-"),
        ),
        None => (String::new(), String::new()),
    };
    writeln!(
        body,
        "{},{},{},{},{},{},{},{},{},{},{}",
        row.snr_db,
        row.scheme.label(),
        row.receiver.label(),
        row.ris_elements,
        bits,
        indices,
        row.sensor_id,
        row.trials,
        row.outage,
        row.std_err,
        row.rate
    )
    .expect("writing to a String cannot fail");
}

#[derive(Serialize)]
struct ManifestVariant {
    scheme: String,
    receiver: String,
    sensors: usize,
    slots: usize,
    ris_elements: usize,
    retransmissions: usize,
    phase_bits: Option<u8>,
    phase_indices: Option<Vec<u32>>,
}

impl ManifestVariant {
    fn from_config(cfg: &ExperimentConfig) -> Self {
        Self {
            scheme: cfg.scheme.label().to_string(),
            receiver: cfg.receiver.label().to_string(),
            sensors: cfg.dims.sensors,
            slots: cfg.dims.slots,
            ris_elements: cfg.dims.ris_elements,
            retransmissions: cfg.retransmissions,
            phase_bits: cfg.phase.as_ref().map(|p| p.phase_bits()),
            phase_indices: cfg.phase.as_ref().map(|p| p.indices().to_vec()),
        }
    }
}

/// Provenance record written next to every CSV.
#[derive(Serialize)]
struct Manifest {
    subcommand: String,
    config_path: String,
    out_path: String,
    tool_version: String,
    seed: u64,
    independent_streams: bool,
    rate: f64,
    trials: u64,
    snr_db: Vec<f64>,
    variants: Vec<ManifestVariant>,
    rows: usize,
    duration_ms: u128,
}

fn manifest_path_for(out_path: &Path) -> PathBuf {
    let mut name = out_path.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

fn write_outputs(
    out_path: &Path,
    body: String,
    manifest: &Manifest,
) -> Result<PathBuf, AppError> {
    fs::write(out_path, body)
        .map_err(|e| AppError::io(&format!("writing {}", out_path.display()), e))?;
    let manifest_path = manifest_path_for(out_path);
    let json = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    fs::write(&manifest_path, json)
        .map_err(|e| AppError::io(&format!("writing {}", manifest_path.display()), e))?;
    Ok(manifest_path)
}

fn load_config(config_path: &Path) -> Result<FileConfig, AppError> {
    let text = fs::read_to_string(config_path)
        .map_err(|e| AppError::io(&format!("reading {}", config_path.display()), e))?;
    Ok(FileConfig::parse(&text)?)
}

/// Runs every configured variant across the SNR list and writes one CSV row
/// per (variant, SNR point, sensor).
pub fn run_sweep(
    config_path: &Path,
    out_path: &Path,
    overrides: Overrides,
) -> Result<RunSummary, AppError> {
    let started = Instant::now();
    let file = load_config(config_path)?;
    let variants = resolve_sweep(&file, overrides)?;
    let total_points: usize = variants.iter().map(|v| v.config.snr_db_list.len()).sum();

    let mut body = String::from(CSV_HEADER);
    body.push('\n');
    let mut rows = 0;
    let mut done = 0;
    for variant in &variants {
        let cfg = &variant.config;
        for (snr_index, &snr_db) in cfg.snr_db_list.iter().enumerate() {
            for est in estimate_outage(cfg, snr_index)? {
                push_row(
                    &mut body,
                    &CsvRow {
                        snr_db,
                        scheme: cfg.scheme,
                        receiver: cfg.receiver,
                        ris_elements: cfg.dims.ris_elements,
                        phase: cfg.phase.as_ref(),
                        sensor_id: est.sensor_id,
                        trials: est.trials,
                        outage: est.p_hat,
                        std_err: est.std_err,
                        rate: cfg.rate,
                    },
                );
                rows += 1;
            }
            done += 1;
            eprintln!(
                "sweep [{done}/{total_points}] {}/{} K={} snr={snr_db} dB",
                cfg.scheme.label(),
                cfg.receiver.label(),
                cfg.dims.ris_elements,
            );
        }
    }

    let first = &variants[0].config;
    let manifest = Manifest {
        subcommand: "sweep".into(),
        config_path: config_path.display().to_string(),
        out_path: out_path.display().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed: first.seed,
        independent_streams: first.independent_snr_streams,
        rate: first.rate,
        trials: first.trials,
        snr_db: first.snr_db_list.clone(),
        variants: variants
            .iter()
            .map(|v| ManifestVariant::from_config(&v.config))
            .collect(),
        rows,
        duration_ms: started.elapsed().as_millis(),
    };
    let manifest_path = write_outputs(out_path, body, &manifest)?;
    Ok(RunSummary {
        csv_path: out_path.to_path_buf(),
        manifest_path,
        rows,
    })
}

/// Scores every phase configuration at the single configured SNR and writes
/// the ranked table: one row per configuration, carrying its worst sensor.
pub fn run_phase_table(
    config_path: &Path,
    out_path: &Path,
    overrides: Overrides,
) -> Result<RunSummary, AppError> {
    let started = Instant::now();
    let file = load_config(config_path)?;
    let base = resolve_phase_table(&file, overrides)?;
    let snr_db = base.snr_db_list[0];
    let bits = base.phase.as_ref().map(|p| p.phase_bits()).unwrap_or(1);
    eprintln!(
        "phase-table: scoring {} configurations at snr={snr_db} dB",
        1u64 << (bits as usize * base.dims.ris_elements),
    );
    let table = evaluate_configs(&base, snr_db)?;

    let mut body = String::from(CSV_HEADER);
    body.push('\n');
    for row in &table {
        push_row(
            &mut body,
            &CsvRow {
                snr_db,
                scheme: base.scheme,
                receiver: base.receiver,
                ris_elements: base.dims.ris_elements,
                phase: Some(&row.phase),
                sensor_id: row.worst_sensor.sensor_id,
                trials: row.worst_sensor.trials,
                outage: row.worst_sensor.p_hat,
                std_err: row.worst_sensor.std_err,
                rate: base.rate,
            },
        );
    }

    let manifest = Manifest {
        subcommand: "phase-table".into(),
        config_path: config_path.display().to_string(),
        out_path: out_path.display().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        seed: base.seed,
        independent_streams: base.independent_snr_streams,
        rate: base.rate,
        trials: base.trials,
        snr_db: base.snr_db_list.clone(),
        variants: vec![ManifestVariant::from_config(&base)],
        rows: table.len(),
        duration_ms: started.elapsed().as_millis(),
    };
    let manifest_path = write_outputs(out_path, body, &manifest)?;
    Ok(RunSummary {
        csv_path: out_path.to_path_buf(),
        manifest_path,
        rows: table.len(),
    })
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

/// Self checks: the Monte Carlo path against the analytic single-link
/// formula, interference nulling of the zero-forcing filter, and the
/// cancellation receiver's determinant identity. Prints one line per check
/// and fails the process if any check fails.
pub fn run_validate() -> Result<(), AppError> {
    let mut checks = Vec::new();

    // Monte Carlo vs closed form on the scalar Rayleigh link.
    {
        let cfg = ExperimentConfig {
            dims: SystemDims::new(1, 1, 0).expect("valid dims"),
            scheme: Scheme::Dedicated,
            retransmissions: 0,
            receiver: Receiver::Zf,
            phase: None,
            rate: 2.0,
            snr_db_list: vec![10.0],
            trials: 100_000,
            seed: 0x5150,
            independent_snr_streams: false,
        };
        let est = &estimate_outage(&cfg, 0)?[0];
        let exact = siso_outage_closed_form(10.0, cfg.rate);
        let diff = (est.p_hat - exact).abs();
        let allowance = 3.0 * est.std_err;
        checks.push(Check {
            name: "siso-closed-form",
            pass: diff <= allowance,
            detail: format!("|{} - {exact:.7}| = {diff:.2e}, allowance {allowance:.2e}", est.p_hat),
        });
    }

    // Zero-forcing leaves no inter-stream leakage, with and without the
    // surface composition in front.
    {
        let mut worst: f64 = 0.0;
        for trial in 0..100u64 {
            let dims = SystemDims::new(5, 8, 6).expect("valid dims");
            let real = sample_realization(&mut trial_rng(0xA11CE, 0, trial), dims);
            let neutral = PhaseConfig::neutral(1, 6)?;
            for h in [real.h1.clone(), effective_channel(&real, &neutral)?] {
                let fh = zf_filter(&h)?.matmul(&h)?;
                for i in 0..5 {
                    for j in 0..5 {
                        if i != j {
                            worst = worst.max(fh.get(i, j).norm());
                        }
                    }
                }
            }
        }
        checks.push(Check {
            name: "zero-isi",
            pass: worst < 1e-9,
            detail: format!("max off-diagonal {worst:.2e}, limit 1e-9"),
        });
    }

    // Successive cancellation attains log2 det(I + snr H^H H).
    {
        let params = LinkParams::new(1.0, 0.1, 1).expect("valid params");
        let mut worst: f64 = 0.0;
        for trial in 0..100u64 {
            let dims = SystemDims::new(5, 6, 0).expect("valid dims");
            let h = sample_realization(&mut trial_rng(0xCAB, 0, trial), dims).h1;
            let report = mmse_sic_sinr(&h, &params)?;
            let sum: f64 = report
                .per_stream_sinr
                .iter()
                .map(|s| (1.0 + s).log2())
                .sum();
            let cap = h
                .hermitian()
                .matmul(&h)?
                .scale((params.power / params.noise_var).into())
                .add(&ComplexMatrix::identity(5))?
                .log_det_hermitian()?;
            worst = worst.max((sum - cap).abs() / cap);
        }
        checks.push(Check {
            name: "sic-sum-capacity",
            pass: worst < 1e-8,
            detail: format!("max relative gap {worst:.2e}, limit 1e-8"),
        });
    }

    let mut failures = 0;
    for check in &checks {
        let status = if check.pass { "ok" } else { "FAIL" };
        println!("{status} {} ({})", check.name, check.detail);
        if !check.pass {
            failures += 1;
        }
    }
    if failures > 0 {
        return Err(AppError {
            code: 1,
            message: format!("{failures} of {} checks failed", checks.len()),
        });
    }
    Ok(())
}
