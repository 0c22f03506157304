//! Experiment file format and its expansion into runnable configurations.
//!
//! A config file is a flat TOML document. `scheme`, `receivers` and
//! `ris_elements` accept either one value or a list; the sweep runs the
//! Cartesian product of those variants over the shared SNR list. The
//! `phase_mode` key selects how reflection coefficients are chosen: `none`
//! (no surface anywhere), `fixed` (explicit or all-zero indices), or
//! `enumerate` (exhaustive search, `phase-table` subcommand only).

use serde::Deserialize;

use risim_core::{
    CoreError, ExperimentConfig, PhaseConfig, Receiver, Result, Scheme, SystemDims,
};

/// Scalar-or-list field.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn to_vec(&self) -> Vec<T> {
        match self {
            OneOrMany::One(v) => vec![v.clone()],
            OneOrMany::Many(vs) => vs.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    Dedicated,
    Shared,
}

impl From<SchemeName> for Scheme {
    fn from(name: SchemeName) -> Scheme {
        match name {
            SchemeName::Dedicated => Scheme::Dedicated,
            SchemeName::Shared => Scheme::Shared,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReceiverName {
    Zf,
    Mmse,
    MmseSic,
}

impl From<ReceiverName> for Receiver {
    fn from(name: ReceiverName) -> Receiver {
        match name {
            ReceiverName::Zf => Receiver::Zf,
            ReceiverName::Mmse => Receiver::Mmse,
            ReceiverName::MmseSic => Receiver::MmseSic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhaseMode {
    /// No reflecting surface in any variant.
    None,
    /// One configuration per variant: `phase_indices`, or all zeros.
    #[default]
    Fixed,
    /// Exhaustive search over all index tuples (phase-table only).
    Enumerate,
}

/// On-disk experiment description.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub sensors: usize,
    pub slots: usize,
    pub ris_elements: OneOrMany<usize>,
    pub phase_bits: Option<u8>,
    pub scheme: OneOrMany<SchemeName>,
    #[serde(default)]
    pub retransmissions: usize,
    #[serde(alias = "receiver")]
    pub receivers: OneOrMany<ReceiverName>,
    pub rate: f64,
    pub snr_db: OneOrMany<f64>,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub phase_mode: PhaseMode,
    pub phase_indices: Option<Vec<u32>>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CoreError::InvalidConfig(e.to_string()))
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub independent_streams: bool,
}

/// One fully resolved experiment variant plus its CSV labels.
#[derive(Debug, Clone)]
pub struct Variant {
    pub config: ExperimentConfig,
}

fn phase_for(
    file: &FileConfig,
    ris_elements: usize,
) -> Result<Option<PhaseConfig>> {
    if ris_elements == 0 {
        return Ok(None);
    }
    let bits = file.phase_bits.ok_or_else(|| {
        CoreError::InvalidConfig("phase_bits is required when ris_elements > 0".into())
    })?;
    let phase = match &file.phase_indices {
        Some(indices) => {
            if indices.len() != ris_elements {
                return Err(CoreError::InvalidConfig(format!(
                    "phase_indices has {} entries but ris_elements is {ris_elements}",
                    indices.len()
                )));
            }
            PhaseConfig::from_indices(bits, indices)?
        }
        None => PhaseConfig::neutral(bits, ris_elements)?,
    };
    Ok(Some(phase))
}

fn build_variant(
    file: &FileConfig,
    scheme: SchemeName,
    receiver: ReceiverName,
    ris_elements: usize,
    overrides: Overrides,
) -> Result<Variant> {
    let phase = match file.phase_mode {
        PhaseMode::None => {
            if ris_elements != 0 {
                return Err(CoreError::InvalidConfig(
                    "phase_mode = \"none\" requires ris_elements = 0".into(),
                ));
            }
            None
        }
        PhaseMode::Fixed => phase_for(file, ris_elements)?,
        PhaseMode::Enumerate => {
            return Err(CoreError::InvalidConfig(
                "phase_mode = \"enumerate\" only applies to the phase-table subcommand".into(),
            ))
        }
    };
    let config = ExperimentConfig {
        dims: SystemDims::new(file.sensors, file.slots, ris_elements)?,
        scheme: scheme.into(),
        retransmissions: file.retransmissions,
        receiver: receiver.into(),
        phase,
        rate: file.rate,
        snr_db_list: file.snr_db.to_vec(),
        trials: file.trials,
        seed: overrides.seed.unwrap_or(file.seed),
        independent_snr_streams: overrides.independent_streams,
    };
    config.validate()?;
    Ok(Variant { config })
}

/// Expands the file into the sweep's variant list, in deterministic order:
/// schemes outermost, then receivers, then element counts.
pub fn resolve_sweep(file: &FileConfig, overrides: Overrides) -> Result<Vec<Variant>> {
    let mut variants = Vec::new();
    for &scheme in &file.scheme.to_vec() {
        for &receiver in &file.receivers.to_vec() {
            for &ris_elements in &file.ris_elements.to_vec() {
                variants.push(build_variant(file, scheme, receiver, ris_elements, overrides)?);
            }
        }
    }
    Ok(variants)
}

/// Resolves the phase-table base experiment. The table needs a single
/// variant (one scheme, one receiver, one element count >= 1), a single SNR
/// point, and `phase_mode = "enumerate"`.
pub fn resolve_phase_table(file: &FileConfig, overrides: Overrides) -> Result<ExperimentConfig> {
    if file.phase_mode != PhaseMode::Enumerate {
        return Err(CoreError::InvalidConfig(
            "phase-table requires phase_mode = \"enumerate\"".into(),
        ));
    }
    let one = |what: &str, n: usize| {
        if n == 1 {
            Ok(())
        } else {
            Err(CoreError::InvalidConfig(format!(
                "phase-table requires exactly one {what}, got {n}"
            )))
        }
    };
    let schemes = file.scheme.to_vec();
    let receivers = file.receivers.to_vec();
    let elements = file.ris_elements.to_vec();
    let snrs = file.snr_db.to_vec();
    one("scheme", schemes.len())?;
    one("receiver", receivers.len())?;
    one("ris_elements value", elements.len())?;
    one("snr_db value", snrs.len())?;
    if elements[0] == 0 {
        return Err(CoreError::InvalidConfig(
            "phase-table requires ris_elements >= 1".into(),
        ));
    }
    let bits = file.phase_bits.ok_or_else(|| {
        CoreError::InvalidConfig("phase_bits is required for phase-table".into())
    })?;
    let config = ExperimentConfig {
        dims: SystemDims::new(file.sensors, file.slots, elements[0])?,
        scheme: schemes[0].into(),
        retransmissions: file.retransmissions,
        receiver: receivers[0].into(),
        phase: Some(PhaseConfig::neutral(bits, elements[0])?),
        rate: file.rate,
        snr_db_list: snrs,
        trials: file.trials,
        seed: overrides.seed.unwrap_or(file.seed),
        independent_snr_streams: overrides.independent_streams,
    };
    config.validate()?;
    Ok(config)
}
