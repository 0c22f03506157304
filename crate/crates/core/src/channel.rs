//! RIS-assisted channel model: i.i.d. Rayleigh sub-channels combined through a
//! discrete phase configuration.
//!
//! The uplink from `N` sensors to a base station with `M` virtual receive
//! slots passes through a direct path and, optionally, a reflecting surface
//! with `K` elements. Each element applies one of `2^b` phase rotations, so
//! the effective channel is `H1 + H3 diag(phi) H2`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{CoreError, Result};
use crate::matrix::ComplexMatrix;

/// Problem sizes shared by every module.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SystemDims {
    /// Number of sensors (transmit streams), at least 1.
    pub sensors: usize,
    /// Number of slots (virtual receive antennas), at least 1.
    pub slots: usize,
    /// Number of reflecting elements; 0 disables the surface.
    pub ris_elements: usize,
}

impl SystemDims {
    pub fn new(sensors: usize, slots: usize, ris_elements: usize) -> Result<Self> {
        if sensors == 0 || slots == 0 {
            return Err(CoreError::InvalidConfig(format!(
                "sensors and slots must be at least 1, got {sensors} and {slots}"
            )));
        }
        Ok(Self {
            sensors,
            slots,
            ris_elements,
        })
    }
}

/// One fading draw: direct channel `h1` (slots x sensors), sensor-to-surface
/// `h2` (elements x sensors) and surface-to-receiver `h3` (slots x elements).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h1: ComplexMatrix,
    pub h2: ComplexMatrix,
    pub h3: ComplexMatrix,
}

impl ChannelRealization {
    /// Dimensions implied by the stored matrices.
    pub fn dims(&self) -> SystemDims {
        SystemDims {
            sensors: self.h1.cols(),
            slots: self.h1.rows(),
            ris_elements: self.h3.cols(),
        }
    }
}

/// Discrete per-element phase rotations, always built from integer indices.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    phase_bits: u8,
    indices: Vec<u32>,
    coefficients: Vec<Complex64>,
}

impl PhaseConfig {
    /// Builds the configuration with coefficient `exp(j 2 pi m / 2^b)` per
    /// element index `m`. Every index must lie in `[0, 2^b)`.
    pub fn from_indices(phase_bits: u8, indices: &[u32]) -> Result<Self> {
        check_phase_bits(phase_bits)?;
        let levels = 1u32 << phase_bits;
        for &m in indices {
            if m >= levels {
                return Err(CoreError::InvalidConfig(format!(
                    "phase index {m} out of range for {phase_bits}-bit resolution"
                )));
            }
        }
        let coefficients = indices
            .iter()
            .map(|&m| unit_phase(m, phase_bits))
            .collect();
        Ok(Self {
            phase_bits,
            indices: indices.to_vec(),
            coefficients,
        })
    }

    /// All-zero indices: every coefficient is exactly +1.
    pub fn neutral(phase_bits: u8, elements: usize) -> Result<Self> {
        Self::from_indices(phase_bits, &vec![0; elements])
    }

    pub fn phase_bits(&self) -> u8 {
        self.phase_bits
    }

    pub fn indices(&self) -> &[u32] {
        &self.indices
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

fn check_phase_bits(phase_bits: u8) -> Result<()> {
    if !(1..=8).contains(&phase_bits) {
        return Err(CoreError::InvalidConfig(format!(
            "phase resolution must be 1..=8 bits, got {phase_bits}"
        )));
    }
    Ok(())
}

/// Coefficient for index `m` at resolution `b`, with quarter-turn angles
/// (0, 90, 180, 270 degrees) snapped to their exact values so 1-bit phases
/// are exactly {+1, -1}.
fn unit_phase(m: u32, phase_bits: u8) -> Complex64 {
    let levels = 1u64 << phase_bits;
    let quarter = (4 * m as u64) % (4 * levels);
    if quarter.is_multiple_of(levels) {
        match quarter / levels {
            0 => return Complex64::new(1.0, 0.0),
            1 => return Complex64::new(0.0, 1.0),
            2 => return Complex64::new(-1.0, 0.0),
            _ => return Complex64::new(0.0, -1.0),
        }
    }
    let angle = 2.0 * std::f64::consts::PI * m as f64 / levels as f64;
    Complex64::from_polar(1.0, angle)
}

/// The `2^b` available phase rotations, ordered by index.
pub fn phase_set(phase_bits: u8) -> Result<Vec<Complex64>> {
    check_phase_bits(phase_bits)?;
    Ok((0..1u32 << phase_bits)
        .map(|m| unit_phase(m, phase_bits))
        .collect())
}

/// Draws one independent Rayleigh-fading realization. Entries are
/// circularly-symmetric complex Gaussians with unit variance (each part has
/// variance 1/2). Consumption order is fixed (`h1`, then `h2`, then `h3`,
/// row-major) so a positioned stream always yields the same draw.
pub fn sample_realization<R: Rng + ?Sized>(rng: &mut R, dims: SystemDims) -> ChannelRealization {
    let part = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid std dev");
    let mut draw = |rows: usize, cols: usize| {
        ComplexMatrix::from_fn(rows, cols, |_, _| {
            Complex64::new(part.sample(rng), part.sample(rng))
        })
    };
    let h1 = draw(dims.slots, dims.sensors);
    let h2 = draw(dims.ris_elements, dims.sensors);
    let h3 = draw(dims.slots, dims.ris_elements);
    ChannelRealization { h1, h2, h3 }
}

/// Composes `H1 + H3 diag(phi) H2`; with no reflecting elements the direct
/// channel is returned unchanged. The diagonal is applied by scaling the
/// columns of `H3`.
pub fn effective_channel(real: &ChannelRealization, phase: &PhaseConfig) -> Result<ComplexMatrix> {
    let k = real.h3.cols();
    if phase.len() != k {
        return Err(CoreError::PhaseLengthMismatch {
            expected: k,
            got: phase.len(),
        });
    }
    if k == 0 {
        return Ok(real.h1.clone());
    }
    let reflected = real
        .h3
        .scale_columns(phase.coefficients())?
        .matmul(&real.h2)?;
    real.h1.add(&reflected)
}
