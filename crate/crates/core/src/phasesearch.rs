//! Exhaustive search over discrete phase configurations.
//!
//! Every one of the `2^(b K)` index tuples is scored by Monte Carlo outage
//! under shared channel substreams, so differences between rows reflect the
//! phase choice alone. Ranking is by the worst sensor's outage estimate, the
//! natural objective when every sensor must meet the same reliability target.

use crate::channel::PhaseConfig;
use crate::error::{CoreError, Result};
use crate::outage::{estimate_outage, ExperimentConfig, OutageEstimate};

/// Largest allowed `phase_bits * elements`; beyond this the table would
/// exceed 2^24 rows.
pub const MAX_ENUMERATION_BITS: usize = 24;

/// One scored phase configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTableRow {
    pub phase: PhaseConfig,
    /// Estimate of the sensor with the highest outage (ties to the lowest
    /// sensor id).
    pub worst_sensor: OutageEstimate,
    pub per_sensor: Vec<OutageEstimate>,
}

/// All phase configurations for `elements` reflecting elements at the given
/// resolution, ordered lexicographically by index tuple (last element's index
/// varies fastest).
pub fn enumerate_configs(elements: usize, phase_bits: u8) -> Result<Vec<PhaseConfig>> {
    if elements == 0 {
        return Err(CoreError::InvalidConfig(
            "phase enumeration needs at least one reflecting element".into(),
        ));
    }
    let bits = phase_bits as usize * elements;
    if bits > MAX_ENUMERATION_BITS {
        return Err(CoreError::EnumerationTooLarge {
            bits: phase_bits,
            elements,
        });
    }
    let mask = (1u64 << phase_bits) - 1;
    (0..1u64 << bits)
        .map(|code| {
            let indices: Vec<u32> = (0..elements)
                .map(|i| {
                    let shift = phase_bits as usize * (elements - 1 - i);
                    ((code >> shift) & mask) as u32
                })
                .collect();
            PhaseConfig::from_indices(phase_bits, &indices)
        })
        .collect()
}

/// Scores every enumerated configuration with the base experiment's scheme,
/// receiver, seed and trial count at one SNR point. All rows share channel
/// substreams, making the comparison paired. Rows come back sorted by
/// worst-sensor outage ascending, ties by index tuple.
///
/// The resolution to enumerate is taken from the base config's phase field.
pub fn evaluate_configs(base: &ExperimentConfig, snr_db: f64) -> Result<Vec<PhaseTableRow>> {
    if base.dims.ris_elements == 0 {
        return Err(CoreError::InvalidConfig(
            "phase search needs at least one reflecting element".into(),
        ));
    }
    let phase_bits = base
        .phase
        .as_ref()
        .map(|p| p.phase_bits())
        .ok_or_else(|| {
            CoreError::InvalidConfig(
                "phase search takes its resolution from the configured phases".into(),
            )
        })?;
    let configs = enumerate_configs(base.dims.ris_elements, phase_bits)?;
    let mut rows = Vec::with_capacity(configs.len());
    for phase in configs {
        let cfg = ExperimentConfig {
            phase: Some(phase.clone()),
            snr_db_list: vec![snr_db],
            ..base.clone()
        };
        let per_sensor = estimate_outage(&cfg, 0)?;
        let mut worst = per_sensor[0].clone();
        for est in &per_sensor[1..] {
            if est.p_hat > worst.p_hat {
                worst = est.clone();
            }
        }
        rows.push(PhaseTableRow {
            phase,
            worst_sensor: worst,
            per_sensor,
        });
    }
    rows.sort_by(|a, b| {
        a.worst_sensor
            .p_hat
            .partial_cmp(&b.worst_sensor.p_hat)
            .expect("estimates are finite")
            .then_with(|| a.phase.indices().cmp(b.phase.indices()))
    });
    Ok(rows)
}

/// Configuration with the lowest worst-sensor outage; ties resolve to the
/// lexicographically smallest index tuple, so any row ordering gives the
/// same answer.
pub fn best_config(rows: &[PhaseTableRow]) -> Result<PhaseConfig> {
    rows.iter()
        .min_by(|a, b| {
            a.worst_sensor
                .p_hat
                .partial_cmp(&b.worst_sensor.p_hat)
                .expect("estimates are finite")
                .then_with(|| a.phase.indices().cmp(b.phase.indices()))
        })
        .map(|row| row.phase.clone())
        .ok_or_else(|| CoreError::InvalidConfig("phase table is empty".into()))
}
