use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bm::{BoltzmannModel, RbmState};
use crate::error::{NqsError, Result};
use crate::hamiltonian::HamiltonianSpec;
use crate::tomo::TomoConfig;
use crate::vmc::TrainConfig;

/// Parses a TOML file into `T`, mapping every failure to a config error.
pub fn load<T: DeserializeOwned>(path: &Path) -> Result<(T, Vec<u8>)> {
    let bytes = std::fs::read(path).map_err(|e| NqsError::Config(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| NqsError::Config(format!("{}: {e}", path.display())))?;
    let cfg = toml::from_str(text).map_err(|e| NqsError::Config(format!("{}: {e}", path.display())))?;
    Ok((cfg, bytes))
}

/// Resolves `p` against the directory holding the config file.
pub fn resolve(config_path: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        config_path.parent().unwrap_or(Path::new(".")).join(p)
    }
}

/// Where an RBM comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum RbmSource {
    /// Hidden units in groups of `per_window` over sliding windows.
    RandomLocal { n: usize, window: usize, per_window: usize, scale: f64 },
    RandomDense { n: usize, hidden: usize, scale: f64 },
    /// Random biases, no weights.
    Product { n: usize, hidden: usize, scale: f64 },
    File { path: PathBuf },
}

impl RbmSource {
    pub fn build(&self, seed: u64, config_path: &Path) -> Result<RbmState> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match self {
            RbmSource::RandomLocal { n, window, per_window, scale } => {
                RbmState::random_local(*n, *window, *per_window, *scale, &mut rng)
            }
            RbmSource::RandomDense { n, hidden, scale } => Ok(RbmState::random(*n, *hidden, *scale, &mut rng)),
            RbmSource::Product { n, hidden, scale } => {
                let mut s = RbmState::random(*n, *hidden, *scale, &mut rng);
                s.weights_mut().fill(Default::default());
                Ok(s)
            }
            RbmSource::File { path } => {
                let full = resolve(config_path, path);
                let text = std::fs::read_to_string(&full)
                    .map_err(|e| NqsError::Config(format!("model.path {}: {e}", full.display())))?;
                match BoltzmannModel::from_json(&text)? {
                    BoltzmannModel::Rbm(s) => Ok(s),
                    other => Err(NqsError::Config(format!("model.path holds a {:?} model; an RBM is required", other.family()))),
                }
            }
        }
    }

    pub fn file(&self) -> Option<&Path> {
        match self {
            RbmSource::File { path } => Some(path),
            _ => None,
        }
    }
}

/// Trainable ansatz for ground-state runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsModel {
    pub family: String,
    /// Hidden units; defaults to 2n.
    #[serde(default)]
    pub hidden: Option<usize>,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_scale() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GsConfig {
    pub seed: u64,
    pub hamiltonian: HamiltonianSpec,
    pub model: GsModel,
    /// `seed` inside this section is ignored; the top-level seed is used.
    pub train: TrainConfig,
    /// Relative error to the exact energy required for a pass.
    #[serde(default = "default_rel_tol")]
    pub rel_tolerance: f64,
}

fn default_rel_tol() -> f64 {
    5e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitRandom {
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitConfig {
    pub seed: u64,
    pub n_qubits: usize,
    /// One character per qubit, `0` or `+`.
    pub initial: String,
    /// Gate file, one gate per line; exclusive with `random`.
    #[serde(default)]
    pub circuit_file: Option<PathBuf>,
    #[serde(default)]
    pub random: Option<CircuitRandom>,
    #[serde(default = "default_circuit_tol")]
    pub tolerance: f64,
}

fn default_circuit_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TomoMode {
    Pure,
    Mixed,
}

/// Built-in targets with exact measurement tables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TomoTarget {
    Bell,
    W { n: usize },
    Ghz { n: usize },
    MaximallyMixed { n: usize },
    /// (1 - p) |Bell><Bell| + p I/4.
    DepolarizedBell { p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomoModel {
    pub hidden: usize,
    #[serde(default)]
    pub env: usize,
    #[serde(default = "default_tomo_scale")]
    pub scale: f64,
}

fn default_tomo_scale() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisSelection {
    /// `"all"`: every local Pauli setting.
    Named(String),
    List(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomoCliConfig {
    pub seed: u64,
    pub mode: TomoMode,
    /// Built-in target; exclusive with `records_file`.
    #[serde(default)]
    pub target: Option<TomoTarget>,
    /// JSON-lines measurement records.
    #[serde(default)]
    pub records_file: Option<PathBuf>,
    #[serde(default)]
    pub bases: Option<BasisSelection>,
    pub model: TomoModel,
    pub train: TomoConfig,
    #[serde(default = "default_min_fidelity")]
    pub min_fidelity: f64,
    #[serde(default = "default_max_trace_distance")]
    pub max_trace_distance: f64,
}

fn default_min_fidelity() -> f64 {
    0.99
}

fn default_max_trace_distance() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum EntropySource {
    Rbm { model: RbmSource },
    Bell,
    Ghz { n: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CutSelection {
    /// `"left"`: A = {0..k} for every k.
    Named(String),
    List(Vec<Vec<usize>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyConfig {
    pub seed: u64,
    pub source: EntropySource,
    #[serde(default)]
    pub cuts: Option<CutSelection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvertConfig {
    pub seed: u64,
    pub model: RbmSource,
    #[serde(default = "default_max_bond")]
    pub max_bond: usize,
    #[serde(default = "default_circuit_tol")]
    pub tolerance: f64,
}

fn default_max_bond() -> usize {
    crate::tensor::DEFAULT_MAX_BOND
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdConfig {
    pub seed: u64,
    pub hamiltonian: HamiltonianSpec,
    #[serde(default = "default_true")]
    pub write_state: bool,
}

fn default_true() -> bool {
    true
}
