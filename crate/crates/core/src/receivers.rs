//! Linear multi-stream detection and successive interference cancellation.
//!
//! Filters operate on an already masked effective channel whose columns are
//! the sensor streams. Zero-forcing inverts the channel outright, the MMSE
//! filter regularizes the Gram matrix by the noise-to-power ratio, and the
//! SIC variant re-derives an MMSE filter after peeling off the strongest
//! remaining stream at each stage.

use crate::error::{CoreError, Result};
use crate::matrix::ComplexMatrix;

/// Detection strategy identifiers, also used as CSV/config labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Receiver {
    Zf,
    Mmse,
    MmseSic,
}

impl Receiver {
    pub fn label(self) -> &'static str {
        match self {
            Receiver::Zf => "zf",
            Receiver::Mmse => "mmse",
            Receiver::MmseSic => "mmse-sic",
        }
    }
}

/// Link-level constants shared by all streams of a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    /// Per-sensor symbol power, linear.
    pub power: f64,
    /// Noise variance per receive dimension, linear.
    pub noise_var: f64,
    /// Channel uses per slot; reported SINRs do not depend on it.
    pub channel_uses: usize,
}

impl LinkParams {
    pub fn new(power: f64, noise_var: f64, channel_uses: usize) -> Result<Self> {
        if power <= 0.0 || !power.is_finite() {
            return Err(CoreError::InvalidConfig(format!(
                "symbol power must be positive and finite, got {power}"
            )));
        }
        if noise_var <= 0.0 || !noise_var.is_finite() {
            return Err(CoreError::InvalidConfig(format!(
                "noise variance must be positive and finite, got {noise_var}"
            )));
        }
        if channel_uses == 0 {
            return Err(CoreError::InvalidConfig(
                "channel uses per slot must be at least 1".into(),
            ));
        }
        Ok(Self {
            power,
            noise_var,
            channel_uses,
        })
    }

    /// Unit symbol power with noise variance `10^(-snr_db/10)`.
    pub fn from_snr_db(snr_db: f64) -> Self {
        Self {
            power: 1.0,
            noise_var: 10f64.powf(-snr_db / 10.0),
            channel_uses: 1,
        }
    }

    /// Noise-to-power ratio used to regularize the MMSE Gram system.
    fn regularizer(&self) -> f64 {
        self.noise_var / self.power
    }
}

/// Post-detection SINR per stream, with the order streams were decoded in
/// (the identity for purely linear receivers).
#[derive(Debug, Clone, PartialEq)]
pub struct SinrReport {
    pub per_stream_sinr: Vec<f64>,
    pub decode_order: Vec<usize>,
    pub receiver: Receiver,
}

/// Zero-forcing filter `(H^H H)^{-1} H^H`, the left inverse of `H`.
/// Fails when `H` is not full column rank.
pub fn zf_filter(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let gram = h.hermitian().matmul(h)?;
    gram.solve_hermitian(&h.hermitian())
}

/// MMSE filter `(H^H H + (noise_var/power) I)^{-1} H^H`.
pub fn mmse_filter(h: &ComplexMatrix, params: &LinkParams) -> Result<ComplexMatrix> {
    let n = h.cols();
    let gram = h.hermitian().matmul(h)?;
    let reg = ComplexMatrix::identity(n).scale(params.regularizer().into());
    gram.add(&reg)?.solve_hermitian(&h.hermitian())
}

/// Per-stream SINR of a linear filter: signal power through the filtered
/// channel diagonal against residual inter-stream leakage plus filtered
/// noise `noise_var * (F F^H)_{i,i}`.
pub fn linear_post_sinr(
    f: &ComplexMatrix,
    h: &ComplexMatrix,
    params: &LinkParams,
    receiver: Receiver,
) -> Result<SinrReport> {
    let fh = f.matmul(h)?;
    let n = h.cols();
    if fh.rows() != n {
        return Err(CoreError::DimensionMismatch(format!(
            "filter produces {} streams for a {}-stream channel",
            fh.rows(),
            n
        )));
    }
    let mut per_stream_sinr = Vec::with_capacity(n);
    for i in 0..n {
        let signal = params.power * fh.get(i, i).norm_sqr();
        let interference: f64 = (0..n)
            .filter(|&j| j != i)
            .map(|j| fh.get(i, j).norm_sqr())
            .sum();
        let noise_gain: f64 = (0..f.cols()).map(|m| f.get(i, m).norm_sqr()).sum();
        let denom = params.power * interference + params.noise_var * noise_gain;
        per_stream_sinr.push(if signal == 0.0 { 0.0 } else { signal / denom });
    }
    Ok(SinrReport {
        per_stream_sinr,
        decode_order: (0..n).collect(),
        receiver,
    })
}

/// MMSE detection with successive cancellation in best-first order: at each
/// stage the highest-SINR undecoded stream (ties to the lowest index) is
/// decoded, recorded, and dropped from the interference set.
pub fn mmse_sic_sinr(h: &ComplexMatrix, params: &LinkParams) -> Result<SinrReport> {
    sic_core(h, params, None)
}

/// As [`mmse_sic_sinr`] but decoding in the caller-supplied order, which must
/// be a permutation of the stream indices.
pub fn mmse_sic_sinr_with_order(
    h: &ComplexMatrix,
    params: &LinkParams,
    order: &[usize],
) -> Result<SinrReport> {
    let n = h.cols();
    let mut seen = vec![false; n];
    if order.len() != n || order.iter().any(|&s| s >= n || std::mem::replace(&mut seen[s], true)) {
        return Err(CoreError::InvalidConfig(format!(
            "decode order must be a permutation of 0..{n}"
        )));
    }
    sic_core(h, params, Some(order))
}

fn sic_core(h: &ComplexMatrix, params: &LinkParams, forced: Option<&[usize]>) -> Result<SinrReport> {
    let n = h.cols();
    // Kept in ascending stream order so the first maximum is the lowest index.
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut per_stream_sinr = vec![0.0; n];
    let mut decode_order = Vec::with_capacity(n);
    for stage in 0..n {
        let sub = h.select_columns(&remaining);
        let filter = mmse_filter(&sub, params)?;
        let stage_report = linear_post_sinr(&filter, &sub, params, Receiver::Mmse)?;
        let pos = match forced {
            Some(order) => remaining
                .iter()
                .position(|&s| s == order[stage])
                .expect("order entries come from remaining"),
            None => {
                let mut best = 0;
                for p in 1..remaining.len() {
                    if stage_report.per_stream_sinr[p] > stage_report.per_stream_sinr[best] {
                        best = p;
                    }
                }
                best
            }
        };
        let stream = remaining.remove(pos);
        per_stream_sinr[stream] = stage_report.per_stream_sinr[pos];
        decode_order.push(stream);
    }
    Ok(SinrReport {
        per_stream_sinr,
        decode_order,
        receiver: Receiver::MmseSic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{sample_realization, SystemDims};
    use num_complex::Complex64;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn params(power: f64, noise_var: f64) -> LinkParams {
        LinkParams::new(power, noise_var, 1).unwrap()
    }

    fn random_channel(seed: u64, slots: usize, sensors: usize) -> ComplexMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        sample_realization(&mut rng, SystemDims::new(sensors, slots, 0).unwrap()).h1
    }

    fn max_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
        a.entries()
            .iter()
            .zip(b.entries())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    fn sum_rate(report: &SinrReport) -> f64 {
        report.per_stream_sinr.iter().map(|s| (1.0 + s).log2()).sum()
    }

    /// log2 det(I + (power/noise) H^H H), the combined rate SIC must achieve.
    fn capacity_bound(h: &ComplexMatrix, p: &LinkParams) -> f64 {
        let gram = h.hermitian().matmul(h).unwrap();
        let scaled = gram.scale((p.power / p.noise_var).into());
        scaled
            .add(&ComplexMatrix::identity(h.cols()))
            .unwrap()
            .log_det_hermitian()
            .unwrap()
    }

    #[test]
    fn zf_of_identity_is_identity() {
        let i3 = ComplexMatrix::identity(3);
        assert!(max_diff(&zf_filter(&i3).unwrap(), &i3) < 1e-12);
    }

    #[test]
    fn zf_of_scalar_inverts() {
        let h = ComplexMatrix::new(1, 1, vec![c(2.0, 0.0)]).unwrap();
        let f = zf_filter(&h).unwrap();
        assert!((f.get(0, 0) - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zf_of_repeated_column_averages() {
        let h = ComplexMatrix::new(2, 1, vec![c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let f = zf_filter(&h).unwrap();
        assert!((f.get(0, 0) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((f.get(0, 1) - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zf_rejects_rank_deficient_channel() {
        let h = ComplexMatrix::new(
            2,
            2,
            vec![c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0)],
        )
        .unwrap();
        assert_eq!(zf_filter(&h).unwrap_err(), CoreError::Singular);
    }

    #[test]
    fn zf_cancels_inter_stream_interference() {
        for seed in 0..10 {
            let h = random_channel(seed, 5, 3);
            let fh = zf_filter(&h).unwrap().matmul(&h).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    let target = if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) };
                    assert!((fh.get(i, j) - target).norm() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn mmse_scalar_with_unit_ratio() {
        let h = ComplexMatrix::new(1, 1, vec![c(1.0, 0.0)]).unwrap();
        let f = mmse_filter(&h, &params(1.0, 1.0)).unwrap();
        assert!((f.get(0, 0) - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn mmse_identity_with_unit_ratio() {
        let f = mmse_filter(&ComplexMatrix::identity(2), &params(1.0, 1.0)).unwrap();
        assert!(max_diff(&f, &ComplexMatrix::identity(2).scale(c(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn mmse_approaches_zf_at_high_snr() {
        let h = random_channel(101, 4, 3);
        let f_mmse = mmse_filter(&h, &params(1.0, 1e-12)).unwrap();
        let f_zf = zf_filter(&h).unwrap();
        assert!(max_diff(&f_mmse, &f_zf) < 1e-6);
    }

    #[test]
    fn single_stream_sinr_ignores_filter_scale() {
        let h = ComplexMatrix::new(1, 1, vec![c(0.7, 0.3)]).unwrap();
        let p = params(2.0, 0.5);
        let expect = p.power * h.get(0, 0).norm_sqr() / p.noise_var;
        for f_val in [c(1.0, 0.0), c(2.5, -1.0), c(0.01, 0.02)] {
            let f = ComplexMatrix::new(1, 1, vec![f_val]).unwrap();
            let report = linear_post_sinr(&f, &h, &p, Receiver::Zf).unwrap();
            assert!((report.per_stream_sinr[0] - expect).abs() / expect < 1e-12);
        }
    }

    #[test]
    fn zf_sinr_matches_gram_inverse_identity() {
        let p = params(1.0, 0.25);
        for seed in 0..10 {
            let h = random_channel(200 + seed, 5, 3);
            let f = zf_filter(&h).unwrap();
            let report = linear_post_sinr(&f, &h, &p, Receiver::Zf).unwrap();
            let gram = h.hermitian().matmul(&h).unwrap();
            let inv = gram.solve_hermitian(&ComplexMatrix::identity(3)).unwrap();
            for i in 0..3 {
                let expect = p.power / (p.noise_var * inv.get(i, i).re);
                let got = report.per_stream_sinr[i];
                assert!((got - expect).abs() / expect < 1e-9, "stream {i}: {got} vs {expect}");
            }
        }
    }

    #[test]
    fn mmse_sinr_on_orthogonal_equal_norm_columns() {
        // Columns with disjoint support and squared norm 2: every stream
        // decouples and sees SINR = power * 2 / noise_var.
        let h = ComplexMatrix::new(
            4,
            2,
            vec![
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.0),
            ],
        )
        .unwrap();
        let p = params(1.0, 0.5);
        let f = mmse_filter(&h, &p).unwrap();
        let report = linear_post_sinr(&f, &h, &p, Receiver::Mmse).unwrap();
        for s in report.per_stream_sinr {
            assert!((s - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sic_on_identity_ties_to_lowest_index() {
        let report = mmse_sic_sinr(&ComplexMatrix::identity(2), &params(1.0, 1.0)).unwrap();
        assert_eq!(report.decode_order, vec![0, 1]);
        for s in report.per_stream_sinr {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sic_single_stream_equals_plain_mmse() {
        let h = random_channel(300, 4, 1);
        let p = params(1.0, 0.1);
        let sic = mmse_sic_sinr(&h, &p).unwrap();
        let f = mmse_filter(&h, &p).unwrap();
        let plain = linear_post_sinr(&f, &h, &p, Receiver::Mmse).unwrap();
        assert!((sic.per_stream_sinr[0] - plain.per_stream_sinr[0]).abs() < 1e-12);
    }

    #[test]
    fn sic_achieves_the_sum_capacity_identity() {
        let p = params(1.0, 0.2);
        for (seed, m, n) in [(400u64, 4, 3), (401, 6, 5), (402, 3, 3)] {
            let h = random_channel(seed, m, n);
            let report = mmse_sic_sinr(&h, &p).unwrap();
            let cap = capacity_bound(&h, &p);
            assert!(
                (sum_rate(&report) - cap).abs() / cap < 1e-8,
                "sum rate {} vs capacity {}",
                sum_rate(&report),
                cap
            );
        }
    }

    #[test]
    fn sum_capacity_holds_for_any_decode_order() {
        let p = params(1.0, 0.5);
        let h = random_channel(500, 5, 4);
        let cap = capacity_bound(&h, &p);
        let mut rng = ChaCha8Rng::seed_from_u64(501);
        for _ in 0..10 {
            let mut order: Vec<usize> = (0..4).collect();
            order.shuffle(&mut rng);
            let report = mmse_sic_sinr_with_order(&h, &p, &order).unwrap();
            assert_eq!(report.decode_order, order);
            assert!((sum_rate(&report) - cap).abs() / cap < 1e-8);
        }
    }

    #[test]
    fn sic_rejects_non_permutation_orders() {
        let h = random_channel(502, 3, 2);
        let p = params(1.0, 1.0);
        assert!(mmse_sic_sinr_with_order(&h, &p, &[0, 0]).is_err());
        assert!(mmse_sic_sinr_with_order(&h, &p, &[0, 2]).is_err());
        assert!(mmse_sic_sinr_with_order(&h, &p, &[0]).is_err());
    }

    #[test]
    fn mmse_dominates_zf_per_stream() {
        let p = params(1.0, 0.3);
        for seed in 0..20 {
            let h = random_channel(600 + seed, 5, 3);
            let zf = linear_post_sinr(&zf_filter(&h).unwrap(), &h, &p, Receiver::Zf).unwrap();
            let mmse =
                linear_post_sinr(&mmse_filter(&h, &p).unwrap(), &h, &p, Receiver::Mmse).unwrap();
            for i in 0..3 {
                assert!(mmse.per_stream_sinr[i] >= zf.per_stream_sinr[i] - 1e-9);
            }
        }
    }

    #[test]
    fn first_sic_stage_dominates_plain_mmse() {
        let p = params(1.0, 0.3);
        for seed in 0..20 {
            let h = random_channel(700 + seed, 5, 4);
            let sic = mmse_sic_sinr(&h, &p).unwrap();
            let first = sic.decode_order[0];
            let plain =
                linear_post_sinr(&mmse_filter(&h, &p).unwrap(), &h, &p, Receiver::Mmse).unwrap();
            let best_plain = plain
                .per_stream_sinr
                .iter()
                .fold(0.0f64, |a, &b| a.max(b));
            assert!(sic.per_stream_sinr[first] >= best_plain - 1e-9);
        }
    }

    #[test]
    fn sinr_is_invariant_to_joint_channel_noise_scaling() {
        let h = random_channel(800, 4, 3);
        let scale = c(0.0, 1.7);
        let h_scaled = h.scale(scale);
        let p = params(1.0, 0.4);
        let p_scaled = params(1.0, 0.4 * scale.norm_sqr());

        let pairs: [(SinrReport, SinrReport); 3] = [
            (
                linear_post_sinr(&zf_filter(&h).unwrap(), &h, &p, Receiver::Zf).unwrap(),
                linear_post_sinr(&zf_filter(&h_scaled).unwrap(), &h_scaled, &p_scaled, Receiver::Zf)
                    .unwrap(),
            ),
            (
                linear_post_sinr(&mmse_filter(&h, &p).unwrap(), &h, &p, Receiver::Mmse).unwrap(),
                linear_post_sinr(
                    &mmse_filter(&h_scaled, &p_scaled).unwrap(),
                    &h_scaled,
                    &p_scaled,
                    Receiver::Mmse,
                )
                .unwrap(),
            ),
            (
                mmse_sic_sinr(&h, &p).unwrap(),
                mmse_sic_sinr(&h_scaled, &p_scaled).unwrap(),
            ),
        ];
        for (base, scaled) in pairs {
            for (a, b) in base.per_stream_sinr.iter().zip(&scaled.per_stream_sinr) {
                assert!((a - b).abs() / a < 1e-9);
            }
        }
    }

    #[test]
    fn sinr_does_not_depend_on_channel_uses() {
        let h = random_channel(900, 4, 3);
        let short = LinkParams::new(1.0, 0.2, 1).unwrap();
        let long = LinkParams::new(1.0, 0.2, 64).unwrap();
        let a = mmse_sic_sinr(&h, &short).unwrap();
        let b = mmse_sic_sinr(&h, &long).unwrap();
        assert_eq!(a.per_stream_sinr, b.per_stream_sinr);
    }

    #[test]
    fn reported_sinrs_are_finite_and_nonnegative() {
        let p = params(1.0, 0.7);
        for seed in 0..10 {
            let h = random_channel(1000 + seed, 6, 4);
            for report in [
                linear_post_sinr(&zf_filter(&h).unwrap(), &h, &p, Receiver::Zf).unwrap(),
                linear_post_sinr(&mmse_filter(&h, &p).unwrap(), &h, &p, Receiver::Mmse).unwrap(),
                mmse_sic_sinr(&h, &p).unwrap(),
            ] {
                for s in &report.per_stream_sinr {
                    assert!(s.is_finite() && *s >= 0.0);
                }
            }
        }
    }

    #[test]
    fn params_reject_degenerate_values() {
        assert!(LinkParams::new(0.0, 1.0, 1).is_err());
        assert!(LinkParams::new(1.0, 0.0, 1).is_err());
        assert!(LinkParams::new(1.0, 1.0, 0).is_err());
        assert!(LinkParams::new(1.0, f64::NAN, 1).is_err());
    }

    #[test]
    fn snr_db_maps_to_noise_variance() {
        let p = LinkParams::from_snr_db(10.0);
        assert_eq!(p.power, 1.0);
        assert!((p.noise_var - 0.1).abs() < 1e-15);
    }
}
