//! TOML run configuration and its conversion into core objects.

use serde::{Deserialize, Serialize};

use seqdisc_core::linalg::CMatrix;
use seqdisc_core::{Channel, Complex64, DensityOperator, Ensemble, Instrument};

use crate::CliError;

/// Rows of `[re, im]` pairs.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Number of receivers `N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub receivers: Option<usize>,
    pub ensemble: EnsembleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub channels: Option<Vec<ChannelSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSpec {
    pub priors: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bloch: Option<Vec<[f64; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub states: Option<Vec<MatrixSpec>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelSpec {
    Identity,
    Depolarizing { gamma: f64 },
    Kraus { operators: Vec<MatrixSpec> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverSpec {
    /// Kraus operators of each outcome.
    pub outcomes: Vec<Vec<MatrixSpec>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProtocolSpec {
    /// Every receiver measures Lüders on the optimal projectors.
    Optimal,
    /// First receiver rotated by the unitary `rotation`, later receivers projective.
    Rotated { rotation: MatrixSpec },
    /// Every receiver measures Lüders on the given projectors.
    Luders { projectors: Vec<MatrixSpec> },
    /// Explicit receivers.
    Kraus { receivers: Vec<ReceiverSpec> },
    /// Random receivers drawn from `seed` (overridden by `--seed`).
    Random {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kraus_per_outcome: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_end: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    /// Walk every chain through explicit normalized posteriors; a vanishing
    /// intermediate probability is then a numerical error.
    #[serde(default)]
    pub posterior_explicit: bool,
}

fn config_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

pub fn matrix_from_spec(field: &str, m: &MatrixSpec) -> Result<CMatrix, CliError> {
    let rows: Vec<Vec<Complex64>> =
        m.iter().map(|row| row.iter().map(|[re, im]| Complex64::new(*re, *im)).collect()).collect();
    CMatrix::from_rows(&rows).map_err(|e| config_err(field, e))
}

pub fn matrix_to_spec(m: &CMatrix) -> MatrixSpec {
    m.to_rows().iter().map(|row| row.iter().map(|z| [z.re, z.im]).collect()).collect()
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Resolves defaults that are implied by the rest of the configuration.
    pub fn normalize(&self) -> Result<Self, CliError> {
        let mut out = self.clone();
        out.receivers = Some(self.receiver_count()?);
        Ok(out)
    }

    pub fn receiver_count(&self) -> Result<usize, CliError> {
        let implied = match (&self.protocol, &self.channels) {
            (Some(ProtocolSpec::Kraus { receivers }), _) => Some(receivers.len()),
            (_, Some(ch)) => Some(ch.len()),
            _ => None,
        };
        let n = match (self.receivers, implied) {
            (Some(n), Some(m)) if n != m => {
                return Err(config_err("receivers", format!("{n} conflicts with {m} implied by protocol/channels")))
            }
            (Some(n), _) => n,
            (None, Some(m)) => m,
            (None, None) => 1,
        };
        if n == 0 {
            return Err(config_err("receivers", "must be at least 1"));
        }
        Ok(n)
    }

    pub fn ensemble(&self) -> Result<Ensemble, CliError> {
        let e = &self.ensemble;
        let result = match (&e.bloch, &e.states) {
            (Some(b), None) => Ensemble::from_bloch(b, e.priors.clone()),
            (None, Some(states)) => {
                let mut rhos = Vec::with_capacity(states.len());
                for (i, s) in states.iter().enumerate() {
                    let field = format!("ensemble.states[{i}]");
                    let m = matrix_from_spec(&field, s)?;
                    rhos.push(DensityOperator::new(m).map_err(|err| config_err(&field, err))?);
                }
                Ensemble::new(rhos, e.priors.clone())
            }
            _ => return Err(config_err("ensemble", "give exactly one of `bloch` or `states`")),
        };
        result.map_err(|err| config_err("ensemble", err))
    }

    pub fn channels(&self) -> Result<Option<Vec<Channel>>, CliError> {
        let Some(specs) = &self.channels else { return Ok(None) };
        let n = self.receiver_count()?;
        if specs.len() != n {
            return Err(config_err("channels", format!("{} channels for {n} receivers", specs.len())));
        }
        let dim = self.ensemble()?.dim();
        specs
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let field = format!("channels[{i}]");
                match s {
                    ChannelSpec::Identity => Ok(Channel::identity(dim)),
                    ChannelSpec::Depolarizing { gamma } => Channel::depolarizing(*gamma).map_err(|e| config_err(&field, e)),
                    ChannelSpec::Kraus { operators } => {
                        let ks = operators
                            .iter()
                            .enumerate()
                            .map(|(k, m)| matrix_from_spec(&format!("{field}.operators[{k}]"), m))
                            .collect::<Result<_, _>>()?;
                        Channel::new(ks).map_err(|e| config_err(&field, e))
                    }
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    pub fn sweep(&self) -> SweepSpec {
        self.sweep.clone().unwrap_or_default()
    }

    pub fn posterior_explicit(&self) -> bool {
        self.simulate.as_ref().is_some_and(|s| s.posterior_explicit)
    }
}

pub fn receivers_from_spec(specs: &[ReceiverSpec]) -> Result<Vec<Instrument>, CliError> {
    specs
        .iter()
        .enumerate()
        .map(|(n, r)| {
            let field = format!("protocol.receivers[{n}]");
            let kraus = r
                .outcomes
                .iter()
                .enumerate()
                .map(|(w, ks)| {
                    ks.iter()
                        .enumerate()
                        .map(|(l, m)| matrix_from_spec(&format!("{field}.outcomes[{w}][{l}]"), m))
                        .collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            Instrument::new(kraus).map_err(|e| config_err(&field, e))
        })
        .collect()
}

pub fn receiver_to_spec(m: &Instrument) -> ReceiverSpec {
    ReceiverSpec { outcomes: m.kraus_families().iter().map(|ks| ks.iter().map(matrix_to_spec).collect()).collect() }
}
