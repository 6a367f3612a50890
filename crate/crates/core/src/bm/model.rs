use serde::{Deserialize, Serialize};

use super::{BmState, DbmState, RbmState};
use crate::error::{NqsError, Result};
use crate::net::NetworkParameters;
use crate::spin::{Convention, SpinConfiguration};
use crate::state::{LogAmplitude, NqsState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Rbm,
    Bm,
    Dbm,
}

/// Any Boltzmann-machine state, as stored in model files.
#[derive(Debug, Clone, PartialEq)]
pub enum BoltzmannModel {
    Rbm(RbmState),
    Bm(BmState),
    Dbm(DbmState),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelRecord {
    family: Family,
    #[serde(default)]
    visible_convention: Convention,
    #[serde(default)]
    hidden_convention: Convention,
    params: NetworkParameters,
}

impl BoltzmannModel {
    pub fn family(&self) -> Family {
        match self {
            BoltzmannModel::Rbm(_) => Family::Rbm,
            BoltzmannModel::Bm(_) => Family::Bm,
            BoltzmannModel::Dbm(_) => Family::Dbm,
        }
    }

    fn base(&self) -> &RbmState {
        match self {
            BoltzmannModel::Rbm(s) => s,
            BoltzmannModel::Bm(s) => s.rbm(),
            BoltzmannModel::Dbm(s) => s.shallow(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let base = self.base();
        let params = match self {
            BoltzmannModel::Rbm(s) => s.to_parameters(),
            BoltzmannModel::Bm(s) => s.to_parameters(),
            BoltzmannModel::Dbm(s) => s.to_parameters(),
        };
        let rec = ModelRecord {
            family: self.family(),
            visible_convention: base.visible_convention(),
            hidden_convention: base.hidden_convention(),
            params,
        };
        Ok(serde_json::to_string_pretty(&rec)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rec: ModelRecord = serde_json::from_str(text)
            .map_err(|e| NqsError::Config(format!("model file: {e}")))?;
        let conv = |s: RbmState| s.with_conventions(rec.visible_convention, rec.hidden_convention);
        Ok(match rec.family {
            Family::Rbm => BoltzmannModel::Rbm(conv(RbmState::from_parameters(&rec.params)?)),
            Family::Bm => {
                let s = BmState::from_parameters(&rec.params)?;
                let (hh, vv) = (s.hidden_couplings().clone(), s.visible_couplings().clone());
                BoltzmannModel::Bm(BmState::new(conv(s.rbm().clone()), hh, vv)?)
            }
            Family::Dbm => {
                let s = DbmState::from_parameters(&rec.params)?;
                BoltzmannModel::Dbm(DbmState::new(
                    conv(s.shallow().clone()),
                    s.deep_bias().clone(),
                    s.deep_weights().clone(),
                )?)
            }
        })
    }
}

impl NqsState for BoltzmannModel {
    fn n_visible(&self) -> usize {
        self.base().n_visible()
    }

    fn visible_convention(&self) -> Convention {
        self.base().visible_convention()
    }

    fn log_amplitude(&self, v: &SpinConfiguration) -> Result<LogAmplitude> {
        match self {
            BoltzmannModel::Rbm(s) => s.log_amplitude(v),
            BoltzmannModel::Bm(s) => s.log_amplitude(v),
            BoltzmannModel::Dbm(s) => s.log_amplitude(v),
        }
    }
}
