//! Slot assignment for dedicated and shared transmission schemes.
//!
//! A plan records which of the `M` slots each sensor transmits in and the
//! amplitude scale that splits one unit of per-sensor energy across those
//! transmissions. Applying a plan to an effective channel zeroes unassigned
//! entries and scales the rest, producing the matrix the receivers see.

use num_complex::Complex64;

use crate::channel::SystemDims;
use crate::error::{CoreError, Result};
use crate::matrix::ComplexMatrix;

/// How sensors divide the slots among themselves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Disjoint contiguous slot blocks, one per sensor.
    Dedicated,
    /// Every sensor repeats its symbol in every slot.
    Shared,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Dedicated => "dedicated",
            Scheme::Shared => "shared",
        }
    }
}

/// Slot assignment plus the per-sensor power split.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationPlan {
    scheme: Scheme,
    dims: SystemDims,
    /// Row-major `slots x sensors` mask; true where sensor `n` uses slot `m`.
    assignment: Vec<bool>,
    /// Number of slots each sensor transmits in.
    tx_count: Vec<usize>,
    /// `1 / sqrt(tx_count[n])`, so each sensor spends unit total energy.
    amplitude_scale: Vec<f64>,
}

impl AllocationPlan {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn dims(&self) -> SystemDims {
        self.dims
    }

    pub fn is_assigned(&self, slot: usize, sensor: usize) -> bool {
        self.assignment[slot * self.dims.sensors + sensor]
    }

    pub fn tx_count(&self) -> &[usize] {
        &self.tx_count
    }

    pub fn amplitude_scale(&self) -> &[f64] {
        &self.amplitude_scale
    }
}

/// Builds the slot plan for `scheme` with `retransmissions` extra copies per
/// sensor. Dedicated mode gives sensor `n` the contiguous block
/// `[n(1+r), (n+1)(1+r))` and fails when the blocks do not fit in `M` slots;
/// shared mode marks every slot for every sensor and ignores `r`.
pub fn build_plan(
    scheme: Scheme,
    dims: SystemDims,
    retransmissions: usize,
) -> Result<AllocationPlan> {
    let n = dims.sensors;
    let m = dims.slots;
    let mut assignment = vec![false; m * n];
    let tx_count: Vec<usize>;
    match scheme {
        Scheme::Dedicated => {
            let per_sensor = 1 + retransmissions;
            if n * per_sensor > m {
                return Err(CoreError::CapacityExceeded {
                    sensors: n,
                    slots_per_sensor: per_sensor,
                    slots: m,
                });
            }
            for sensor in 0..n {
                for slot in sensor * per_sensor..(sensor + 1) * per_sensor {
                    assignment[slot * n + sensor] = true;
                }
            }
            tx_count = vec![per_sensor; n];
        }
        Scheme::Shared => {
            assignment.fill(true);
            tx_count = vec![m; n];
        }
    }
    let amplitude_scale = tx_count.iter().map(|&t| 1.0 / (t as f64).sqrt()).collect();
    Ok(AllocationPlan {
        scheme,
        dims,
        assignment,
        tx_count,
        amplitude_scale,
    })
}

/// Masks and scales an effective channel according to the plan: entry (m, n)
/// becomes `H(m,n) / sqrt(T_n)` where assigned and 0 elsewhere.
pub fn apply_plan(h: &ComplexMatrix, plan: &AllocationPlan) -> Result<ComplexMatrix> {
    if h.rows() != plan.dims.slots || h.cols() != plan.dims.sensors {
        return Err(CoreError::DimensionMismatch(format!(
            "channel is {}x{} but plan expects {}x{}",
            h.rows(),
            h.cols(),
            plan.dims.slots,
            plan.dims.sensors
        )));
    }
    Ok(ComplexMatrix::from_fn(h.rows(), h.cols(), |m, n| {
        if plan.is_assigned(m, n) {
            h.get(m, n) * plan.amplitude_scale[n]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_realization, SystemDims};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn dedicated_blocks_are_contiguous() {
        let dims = SystemDims::new(2, 10, 0).unwrap();
        let plan = build_plan(Scheme::Dedicated, dims, 4).unwrap();
        for slot in 0..10 {
            assert_eq!(plan.is_assigned(slot, 0), slot < 5);
            assert_eq!(plan.is_assigned(slot, 1), slot >= 5);
        }
        assert_eq!(plan.tx_count(), &[5, 5]);
        for &s in plan.amplitude_scale() {
            assert!((s - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn shared_marks_every_slot() {
        let dims = SystemDims::new(5, 6, 0).unwrap();
        let plan = build_plan(Scheme::Shared, dims, 3).unwrap();
        for slot in 0..6 {
            for sensor in 0..5 {
                assert!(plan.is_assigned(slot, sensor));
            }
        }
        assert_eq!(plan.tx_count(), &[6; 5]);
        for &s in plan.amplitude_scale() {
            assert!((s - 1.0 / 6f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn dedicated_overflow_is_capacity_error() {
        let dims = SystemDims::new(5, 4, 0).unwrap();
        assert_eq!(
            build_plan(Scheme::Dedicated, dims, 0).unwrap_err(),
            CoreError::CapacityExceeded {
                sensors: 5,
                slots_per_sensor: 1,
                slots: 4
            }
        );
    }

    #[test]
    fn surplus_slots_stay_unassigned() {
        let dims = SystemDims::new(5, 11, 0).unwrap();
        let plan = build_plan(Scheme::Dedicated, dims, 1).unwrap();
        for sensor in 0..5 {
            assert!(!plan.is_assigned(10, sensor));
        }
        assert_eq!(plan.tx_count(), &[2; 5]);
    }

    #[test]
    fn shared_apply_scales_uniformly() {
        let dims = SystemDims::new(2, 4, 0).unwrap();
        let plan = build_plan(Scheme::Shared, dims, 0).unwrap();
        let h = ComplexMatrix::from_fn(4, 2, |m, n| c((m * 2 + n) as f64, 1.0));
        let masked = apply_plan(&h, &plan).unwrap();
        for m in 0..4 {
            for n in 0..2 {
                assert_eq!(masked.get(m, n), h.get(m, n) * 0.5);
            }
        }
    }

    #[test]
    fn dedicated_apply_zeroes_off_assignment() {
        let dims = SystemDims::new(2, 2, 0).unwrap();
        let plan = build_plan(Scheme::Dedicated, dims, 0).unwrap();
        let h = ComplexMatrix::new(
            2,
            2,
            vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)],
        )
        .unwrap();
        let masked = apply_plan(&h, &plan).unwrap();
        assert_eq!(masked.get(0, 0), c(1.0, 0.0));
        assert_eq!(masked.get(0, 1), c(0.0, 0.0));
        assert_eq!(masked.get(1, 0), c(0.0, 0.0));
        assert_eq!(masked.get(1, 1), c(4.0, 0.0));
    }

    #[test]
    fn single_sensor_retransmission_halves_energy_per_slot() {
        let dims = SystemDims::new(1, 2, 0).unwrap();
        let plan = build_plan(Scheme::Dedicated, dims, 1).unwrap();
        let h = ComplexMatrix::new(2, 1, vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        let masked = apply_plan(&h, &plan).unwrap();
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        assert!((masked.get(0, 0) - c(3.0 * inv_sqrt2, 0.0)).norm() < 1e-15);
        assert!((masked.get(1, 0) - c(0.0, 4.0 * inv_sqrt2)).norm() < 1e-15);
        // Combined received energy is half the raw column energy.
        let energy: f64 = masked.entries().iter().map(|z| z.norm_sqr()).sum();
        assert!((energy - 25.0 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn column_energy_is_split_never_amplified() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for (scheme, r) in [
            (Scheme::Dedicated, 0),
            (Scheme::Dedicated, 2),
            (Scheme::Shared, 0),
        ] {
            let dims = SystemDims::new(3, 9, 0).unwrap();
            let plan = build_plan(scheme, dims, r).unwrap();
            let h = sample_realization(&mut rng, dims).h1;
            let masked = apply_plan(&h, &plan).unwrap();
            for n in 0..3 {
                let masked_energy: f64 = (0..9).map(|m| masked.get(m, n).norm_sqr()).sum();
                let assigned_energy: f64 = (0..9)
                    .filter(|&m| plan.is_assigned(m, n))
                    .map(|m| h.get(m, n).norm_sqr())
                    .sum();
                assert!(
                    (masked_energy - assigned_energy / plan.tx_count()[n] as f64).abs() < 1e-12
                );
            }
        }
    }

    #[test]
    fn dedicated_columns_are_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let dims = SystemDims::new(3, 8, 0).unwrap();
        let plan = build_plan(Scheme::Dedicated, dims, 1).unwrap();
        let h = sample_realization(&mut rng, dims).h1;
        let masked = apply_plan(&h, &plan).unwrap();
        let gram = masked.hermitian().matmul(&masked).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    assert!(gram.get(i, j).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn shared_apply_twice_scales_by_slot_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let dims = SystemDims::new(2, 5, 0).unwrap();
        let plan = build_plan(Scheme::Shared, dims, 0).unwrap();
        let h = sample_realization(&mut rng, dims).h1;
        let twice = apply_plan(&apply_plan(&h, &plan).unwrap(), &plan).unwrap();
        let direct = h.scale(c(1.0 / 5.0, 0.0));
        let err = twice
            .entries()
            .iter()
            .zip(direct.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-15);
    }

    #[test]
    fn sensor_permutation_commutes_with_apply() {
        // Shared plans are symmetric across sensors, so permuting channel
        // columns before or after masking gives the same matrix.
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        let dims = SystemDims::new(3, 4, 0).unwrap();
        let plan = build_plan(Scheme::Shared, dims, 0).unwrap();
        let h = sample_realization(&mut rng, dims).h1;
        let perm = [2usize, 0, 1];
        let a = apply_plan(&h.select_columns(&perm), &plan).unwrap();
        let b = apply_plan(&h, &plan).unwrap().select_columns(&perm);
        assert_eq!(a, b);
    }

    #[test]
    fn apply_rejects_mismatched_channel() {
        let dims = SystemDims::new(2, 3, 0).unwrap();
        let plan = build_plan(Scheme::Shared, dims, 0).unwrap();
        let h = ComplexMatrix::zeros(3, 3);
        assert!(matches!(
            apply_plan(&h, &plan),
            Err(CoreError::DimensionMismatch(_))
        ));
    }
}
