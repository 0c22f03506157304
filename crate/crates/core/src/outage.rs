//! Monte Carlo outage estimation.
//!
//! A trial draws one fading realization, builds the masked effective channel,
//! runs the configured receiver, and flags each sensor whose target rate
//! exceeds its achievable rate `log2(1 + SINR)`. Trials use counter-derived
//! substreams of one ChaCha stream, so estimates are bit-identical for a
//! fixed seed no matter how work is scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::allocation::{apply_plan, build_plan, Scheme};
use crate::channel::{effective_channel, sample_realization, PhaseConfig, SystemDims};
use crate::error::{CoreError, Result};
use crate::receivers::{
    linear_post_sinr, mmse_filter, mmse_sic_sinr, zf_filter, LinkParams, Receiver, SinrReport,
};

/// Trial indices occupy the low bits of the ChaCha stream id; SNR-point
/// indices (independent-stream mode) occupy the bits above.
const TRIAL_STREAM_BITS: u32 = 40;

/// Everything needed to reproduce one outage experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dims: SystemDims,
    pub scheme: Scheme,
    pub retransmissions: usize,
    pub receiver: Receiver,
    /// Reflection coefficients; `None` only when `dims.ris_elements` is 0.
    pub phase: Option<PhaseConfig>,
    /// Target rate in bits/s/Hz.
    pub rate: f64,
    pub snr_db_list: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    /// When false (the default), every SNR point replays the same channel
    /// realizations: common random numbers for paired comparisons.
    pub independent_snr_streams: bool,
}

impl ExperimentConfig {
    /// Checks cross-field consistency; every estimation entry point calls
    /// this before touching a trial.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CoreError::InvalidConfig("trials must be at least 1".into()));
        }
        if self.trials > 1 << TRIAL_STREAM_BITS {
            return Err(CoreError::InvalidConfig(format!(
                "trials capped at 2^{TRIAL_STREAM_BITS} per run, got {}",
                self.trials
            )));
        }
        if self.rate <= 0.0 || !self.rate.is_finite() {
            return Err(CoreError::InvalidConfig(format!(
                "target rate must be positive and finite, got {}",
                self.rate
            )));
        }
        if self.snr_db_list.is_empty() {
            return Err(CoreError::InvalidConfig(
                "at least one SNR point is required".into(),
            ));
        }
        if self.snr_db_list.iter().any(|s| !s.is_finite()) {
            return Err(CoreError::InvalidConfig("SNR values must be finite".into()));
        }
        match &self.phase {
            Some(p) => {
                if p.len() != self.dims.ris_elements {
                    return Err(CoreError::PhaseLengthMismatch {
                        expected: self.dims.ris_elements,
                        got: p.len(),
                    });
                }
            }
            None => {
                if self.dims.ris_elements != 0 {
                    return Err(CoreError::InvalidConfig(format!(
                        "{} reflecting elements need a phase configuration",
                        self.dims.ris_elements
                    )));
                }
            }
        }
        // Surfaces the dedicated-scheme capacity error before any trial runs.
        build_plan(self.scheme, self.dims, self.retransmissions)?;
        Ok(())
    }
}

/// Outage frequency of one sensor at one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageEstimate {
    pub sensor_id: usize,
    pub outage_events: u64,
    pub trials: u64,
    /// `outage_events / trials`, exactly.
    pub p_hat: f64,
    /// Normal-approximation standard error `sqrt(p(1-p)/trials)`.
    pub std_err: f64,
}

impl OutageEstimate {
    pub fn from_counts(sensor_id: usize, outage_events: u64, trials: u64) -> Self {
        let p_hat = outage_events as f64 / trials as f64;
        let std_err = (p_hat * (1.0 - p_hat) / trials as f64).sqrt();
        Self {
            sensor_id,
            outage_events,
            trials,
            p_hat,
            std_err,
        }
    }
}

/// Highest reliably decodable rate at a given SINR, `log2(1 + sinr)`.
pub fn max_rate(sinr: f64) -> f64 {
    sinr.ln_1p() / std::f64::consts::LN_2
}

/// Exact outage probability of a single-sensor, single-slot, unit-variance
/// Rayleigh link: `1 - exp(-(2^rate - 1)/snr)`. Analytic oracle for the
/// Monte Carlo path.
pub fn siso_outage_closed_form(snr_linear: f64, rate: f64) -> f64 {
    let threshold = (2f64.powf(rate) - 1.0) / snr_linear;
    -(-threshold).exp_m1()
}

/// Deterministically positioned generator for one trial. The stream id packs
/// the SNR-point stream above [`TRIAL_STREAM_BITS`] bits of trial index, so
/// trials never overlap and common-random-numbers mode (snr_stream = 0) pairs
/// realizations across experiment variants.
pub fn trial_rng(seed: u64, snr_stream: u64, trial: u64) -> ChaCha8Rng {
    debug_assert!(trial < 1 << TRIAL_STREAM_BITS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((snr_stream << TRIAL_STREAM_BITS) | trial);
    rng
}

/// Runs one realization and reports which sensors are in outage at the given
/// SNR. A rank-deficient channel under zero-forcing counts as an outage for
/// every sensor: the realization is undetectable.
pub fn run_trial<R: Rng + ?Sized>(
    rng: &mut R,
    config: &ExperimentConfig,
    snr_db: f64,
) -> Vec<bool> {
    let real = sample_realization(rng, config.dims);
    let h_eff = match &config.phase {
        Some(p) => effective_channel(&real, p).expect("validated phase length"),
        None => real.h1,
    };
    let plan =
        build_plan(config.scheme, config.dims, config.retransmissions).expect("validated plan");
    let h = apply_plan(&h_eff, &plan).expect("plan dims match channel");
    let params = LinkParams::from_snr_db(snr_db);

    let report: Option<SinrReport> = match config.receiver {
        Receiver::Zf => zf_filter(&h)
            .and_then(|f| linear_post_sinr(&f, &h, &params, Receiver::Zf))
            .ok(),
        Receiver::Mmse => mmse_filter(&h, &params)
            .and_then(|f| linear_post_sinr(&f, &h, &params, Receiver::Mmse))
            .ok(),
        Receiver::MmseSic => mmse_sic_sinr(&h, &params).ok(),
    };
    match report {
        Some(r) => r
            .per_stream_sinr
            .iter()
            .map(|&s| config.rate > max_rate(s))
            .collect(),
        None => vec![true; config.dims.sensors],
    }
}

/// Estimates per-sensor outage at one point of the configured SNR list by
/// averaging `config.trials` independent realizations. Trials fan out over
/// the rayon pool; the reduction sums integer event counts, so the estimates
/// do not depend on worker count or scheduling.
pub fn estimate_outage(config: &ExperimentConfig, snr_index: usize) -> Result<Vec<OutageEstimate>> {
    config.validate()?;
    let snr_db = *config.snr_db_list.get(snr_index).ok_or_else(|| {
        CoreError::InvalidConfig(format!(
            "SNR index {snr_index} out of range for {} points",
            config.snr_db_list.len()
        ))
    })?;
    let snr_stream = if config.independent_snr_streams {
        snr_index as u64
    } else {
        0
    };
    let sensors = config.dims.sensors;
    let counts = (0..config.trials)
        .into_par_iter()
        .fold(
            || vec![0u64; sensors],
            |mut acc, trial| {
                let mut rng = trial_rng(config.seed, snr_stream, trial);
                for (slot, hit) in acc.iter_mut().zip(run_trial(&mut rng, config, snr_db)) {
                    *slot += hit as u64;
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; sensors],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(sensor, events)| OutageEstimate::from_counts(sensor, events, config.trials))
        .collect())
}
