use std::io::Write;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::estimate::{Batch, Estimator};
use super::optimize::{clip_gradient, gd_update, sgd_update, sr_direction};
use crate::error::{NqsError, Result};
use crate::hamiltonian::PauliStringHamiltonian;
use crate::state::{Variational, C64};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Optimizer {
    /// Plain (stochastic) gradient descent.
    #[default]
    Sgd,
    /// Adam moments on the real and imaginary parts separately.
    Adam {
        #[serde(default = "beta1")]
        beta1: f64,
        #[serde(default = "beta2")]
        beta2: f64,
        #[serde(default = "adam_eps")]
        eps: f64,
    },
    /// Stochastic reconfiguration (natural gradient).
    Sr {
        #[serde(default = "diag_shift")]
        diag_shift: f64,
    },
}

fn beta1() -> f64 {
    0.9
}
fn beta2() -> f64 {
    0.999
}
fn adam_eps() -> f64 {
    1e-8
}
fn diag_shift() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    /// Per-sample gradient terms averaged per update in sampled mode.
    pub batch_size: usize,
    /// Number of parameter updates.
    pub sweeps: usize,
    /// Metropolis samples per update; ignored in full-sum mode.
    pub samples_per_step: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub gradient_clip: Option<f64>,
    #[serde(default)]
    pub optimizer: Optimizer,
    /// Full-sum expectation instead of sampling.
    #[serde(default)]
    pub full_sum: bool,
    /// Restrict to one total-magnetization sector (full sum: summed
    /// configurations; sampled: exchange moves from a sector start).
    #[serde(default)]
    pub magnetization: Option<i64>,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(NqsError::Config(format!("learning_rate must be positive, got {}", self.learning_rate)));
        }
        if self.batch_size == 0 {
            return Err(NqsError::Config("batch_size must be at least 1".into()));
        }
        if !self.full_sum && self.samples_per_step == 0 {
            return Err(NqsError::Config("samples_per_step must be at least 1".into()));
        }
        if let Some(c) = self.gradient_clip {
            if !(c > 0.0) {
                return Err(NqsError::Config(format!("gradient_clip must be positive, got {c}")));
            }
        }
        Ok(())
    }

    fn estimator(&self) -> Estimator {
        if self.full_sum {
            Estimator::FullSum { magnetization: self.magnetization }
        } else {
            let mut options = super::SamplerOptions::default();
            if self.magnetization.is_some() {
                options.proposal = super::Proposal::Exchange;
            }
            Estimator::Sampled { n_samples: self.samples_per_step, options }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub mean: C64,
    pub stderr: f64,
    pub acceptance: f64,
}

#[derive(Debug, Clone)]
pub struct GroundStateResult<S> {
    /// Parameters with the lowest energy seen.
    pub best: S,
    pub best_energy: f64,
    /// Best energy so far after each row of `trace`.
    pub best_so_far: Vec<f64>,
    pub trace: Vec<TraceRow>,
}

pub fn write_trace_csv<W: Write>(trace: &[TraceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iter", "mean_re", "mean_im", "stderr", "acceptance"])?;
    for r in trace {
        w.write_record([
            r.iter.to_string(),
            format!("{:.12e}", r.mean.re),
            format!("{:.12e}", r.mean.im),
            format!("{:.12e}", r.stderr),
            format!("{:.6}", r.acceptance),
        ])?;
    }
    w.flush()?;
    Ok(())
}

struct AdamState {
    m: Vec<C64>,
    v: Vec<C64>,
    t: i32,
}

/// Minimizes <H> starting from `psi0`. Runs `sweeps` updates and evaluates
/// the final parameters once more, so the trace has `sweeps + 1` rows.
pub fn solve_ground_state<S: Variational + Clone>(
    h: &PauliStringHamiltonian,
    psi0: &S,
    config: &TrainConfig,
) -> Result<GroundStateResult<S>> {
    config.validate()?;
    let estimator = config.estimator();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut psi = psi0.clone();
    let mut params = psi.params();
    let mut adam = AdamState { m: vec![C64::new(0.0, 0.0); params.len()], v: vec![C64::new(0.0, 0.0); params.len()], t: 0 };
    let mut trace = Vec::with_capacity(config.sweeps + 1);
    let mut best_so_far = Vec::with_capacity(config.sweeps + 1);
    let mut best = psi.clone();
    let mut best_energy = f64::INFINITY;
    let mut initial = None;

    for iter in 0..=config.sweeps {
        let step_seed = config.seed.wrapping_add((iter as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let batch = Batch::collect(&psi, h, &estimator, step_seed)?;
        let energy = batch.energy();
        trace.push(TraceRow { iter, mean: energy.mean, stderr: energy.stderr, acceptance: energy.acceptance });
        let e = energy.mean.re;
        let e0 = *initial.get_or_insert(e);
        if !e.is_finite() || e > e0 + 10.0 * e0.abs().max(1.0) {
            return Err(NqsError::Training(format!(
                "energy diverged at iteration {iter}: {e} (initial {e0})"
            )));
        }
        if e < best_energy {
            best_energy = e;
            best = psi.clone();
        }
        best_so_far.push(best_energy);
        if iter == config.sweeps {
            break;
        }

        let (centered, _) = batch.centered_derivatives(&psi)?;
        let force = batch.force(&centered);
        let eta = config.learning_rate;
        params = match config.optimizer {
            Optimizer::Sgd if batch.sampled => {
                let n = centered.len();
                let e_mean = batch.mean_energy();
                let per_sample = |i: usize| -> Vec<C64> {
                    let de = batch.e_loc[i] - e_mean;
                    centered[i].iter().map(|o| 2.0 * o.conj() * de).collect()
                };
                let picks: Vec<Vec<C64>> = if config.batch_size >= n {
                    (0..n).map(per_sample).collect()
                } else {
                    index::sample(&mut rng, n, config.batch_size).into_iter().map(per_sample).collect()
                };
                sgd_update(&params, &picks, eta, config.gradient_clip)?
            }
            Optimizer::Sgd => {
                let g: Vec<C64> = force.iter().map(|f| 2.0 * f).collect();
                gd_update(&params, &g, eta, config.gradient_clip)?
            }
            Optimizer::Adam { beta1, beta2, eps } => {
                let mut g: Vec<C64> = force.iter().map(|f| 2.0 * f).collect();
                clip_gradient(&mut g, config.gradient_clip);
                adam.t += 1;
                let c1 = 1.0 - beta1.powi(adam.t);
                let c2 = 1.0 - beta2.powi(adam.t);
                let mut step = Vec::with_capacity(g.len());
                for k in 0..g.len() {
                    let sq = C64::new(g[k].re * g[k].re, g[k].im * g[k].im);
                    adam.m[k] = beta1 * adam.m[k] + (1.0 - beta1) * g[k];
                    adam.v[k] = beta2 * adam.v[k] + (1.0 - beta2) * sq;
                    let m = adam.m[k] / c1;
                    let v = adam.v[k] / c2;
                    step.push(C64::new(m.re / (v.re.sqrt() + eps), m.im / (v.im.sqrt() + eps)));
                }
                gd_update(&params, &step, eta, None)?
            }
            Optimizer::Sr { diag_shift } => {
                let dir = sr_direction(&centered, &batch.weights, &force, diag_shift)?;
                gd_update(&params, &dir, eta, config.gradient_clip)?
            }
        };
        psi.set_params(&params)?;
    }
    Ok(GroundStateResult { best, best_energy, best_so_far, trace })
}
