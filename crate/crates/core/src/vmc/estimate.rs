use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::sampler::{sample, SamplerOptions};
use crate::error::{NqsError, Result};
use crate::hamiltonian::{local_energy, PauliStringHamiltonian};
use crate::spin::{all_configurations, SpinConfiguration};
use crate::state::{LogAmplitude, NqsState, Variational, C64};

/// How expectation values over |Psi|^2 are formed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Estimator {
    /// Exact weighted sum over every configuration (n <= 20), optionally
    /// restricted to one total-magnetization sector.
    FullSum {
        #[serde(default)]
        magnetization: Option<i64>,
    },
    /// Metropolis samples.
    Sampled {
        n_samples: usize,
        #[serde(default)]
        options: SamplerOptions,
    },
}

pub const FULL_SUM_LIMIT: usize = 20;
const N_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyEstimate {
    pub mean: C64,
    pub stderr: f64,
    /// Metropolis acceptance rate; 1 in full-sum mode.
    pub acceptance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    /// dE/d(Re p) + i dE/d(Im p) for every parameter.
    pub gradient: Vec<C64>,
    pub energy: EnergyEstimate,
}

/// Weighted configurations with their local energies.
pub(crate) struct Batch {
    pub configs: Vec<SpinConfiguration>,
    /// Normalized weights; 1/n for samples, |Psi|^2/Z in full-sum mode.
    pub weights: Vec<f64>,
    pub e_loc: Vec<C64>,
    pub acceptance: f64,
    pub sampled: bool,
}

impl Batch {
    pub fn collect<S: NqsState + ?Sized>(
        psi: &S,
        h: &PauliStringHamiltonian,
        estimator: &Estimator,
        seed: u64,
    ) -> Result<Self> {
        let n = psi.n_visible();
        if n != h.n_sites() {
            return Err(NqsError::Shape { expected: h.n_sites(), got: n });
        }
        match *estimator {
            Estimator::FullSum { magnetization } => full_sum(psi, h, magnetization),
            Estimator::Sampled { n_samples, options } => {
                if n_samples == 0 {
                    return Err(NqsError::Domain("n_samples must be positive".into()));
                }
                let (configs, acceptance) = sample(psi, n_samples, seed, &options)?;
                let e_loc = configs
                    .iter()
                    .map(|v| local_energy(h, psi, v))
                    .collect::<Result<Vec<_>>>()?;
                let w = 1.0 / configs.len() as f64;
                Ok(Self { weights: vec![w; configs.len()], configs, e_loc, acceptance, sampled: true })
            }
        }
    }

    pub fn mean_energy(&self) -> C64 {
        self.weights.iter().zip(&self.e_loc).map(|(w, e)| *w * e).sum()
    }

    pub fn energy(&self) -> EnergyEstimate {
        let mean = self.mean_energy();
        let stderr = if self.sampled { binned_stderr(&self.e_loc) } else { 0.0 };
        EnergyEstimate { mean, stderr, acceptance: self.acceptance }
    }

    /// Log-derivatives for every configuration, centered by their weighted mean.
    pub fn centered_derivatives<S: Variational + ?Sized>(&self, psi: &S) -> Result<(Vec<Vec<C64>>, Vec<C64>)> {
        let p = psi.n_params();
        let mut rows = Vec::with_capacity(self.configs.len());
        let mut mean = vec![C64::new(0.0, 0.0); p];
        for (v, w) in self.configs.iter().zip(&self.weights) {
            let o = psi.log_derivatives(v)?;
            if o.len() != p {
                return Err(NqsError::Shape { expected: p, got: o.len() });
            }
            for (m, x) in mean.iter_mut().zip(&o) {
                *m += *w * x;
            }
            rows.push(o);
        }
        for row in &mut rows {
            for (x, m) in row.iter_mut().zip(&mean) {
                *x -= m;
            }
        }
        Ok((rows, mean))
    }

    /// Force vector F_k = <O_k^* (E - <E>)> from centered derivatives.
    pub fn force(&self, centered: &[Vec<C64>]) -> Vec<C64> {
        let e_mean = self.mean_energy();
        let p = centered.first().map_or(0, Vec::len);
        let mut f = vec![C64::new(0.0, 0.0); p];
        for ((row, w), e) in centered.iter().zip(&self.weights).zip(&self.e_loc) {
            let de = *w * (e - e_mean);
            for (fk, o) in f.iter_mut().zip(row) {
                *fk += o.conj() * de;
            }
        }
        f
    }
}

fn full_sum<S: NqsState + ?Sized>(psi: &S, h: &PauliStringHamiltonian, magnetization: Option<i64>) -> Result<Batch> {
    let n = psi.n_visible();
    if n > FULL_SUM_LIMIT {
        return Err(NqsError::Capacity { what: "full-sum sites".into(), value: n, limit: FULL_SUM_LIMIT });
    }
    let mut configs = Vec::new();
    let mut logs = Vec::new();
    let mut table: HashMap<usize, LogAmplitude> = HashMap::new();
    for v in all_configurations(n, psi.visible_convention()) {
        if magnetization.is_some_and(|m| v.magnetization() != m) {
            continue;
        }
        let la = psi.log_amplitude(&v)?;
        table.insert(v.index(), la);
        if let LogAmplitude::Finite(l) = la {
            configs.push(v);
            logs.push(l);
        }
    }
    if configs.is_empty() {
        return Err(NqsError::ZeroAmplitude("state vanishes on the summed configurations".into()));
    }
    let max_re = logs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let mut weights: Vec<f64> = logs.iter().map(|l| (2.0 * (l.re - max_re)).exp()).collect();
    let z: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= z);

    let mut e_loc = Vec::with_capacity(configs.len());
    for (v, &base) in configs.iter().zip(&logs) {
        let mut total = C64::new(0.0, 0.0);
        for (mask, element) in h.row(v) {
            if mask == 0 {
                total += element;
                continue;
            }
            let mut w = v.clone();
            for s in 0..n {
                if mask >> s & 1 == 1 {
                    w.flip(s);
                }
            }
            let la = match table.get(&w.index()) {
                Some(la) => *la,
                None => psi.log_amplitude(&w)?,
            };
            if let LogAmplitude::Finite(l) = la {
                total += element * (l - base).exp();
            }
        }
        e_loc.push(total);
    }
    Ok(Batch { configs, weights, e_loc, acceptance: 1.0, sampled: false })
}

/// Standard error of the mean from up to 20 contiguous bins.
pub(crate) fn binned_stderr(values: &[C64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let bins = N_BINS.min(n);
    let per = n / bins;
    let means: Vec<f64> = (0..bins)
        .map(|b| values[b * per..(b + 1) * per].iter().map(|e| e.re).sum::<f64>() / per as f64)
        .collect();
    let mu = means.iter().sum::<f64>() / bins as f64;
    let var = means.iter().map(|m| (m - mu).powi(2)).sum::<f64>() / (bins - 1) as f64;
    (var / bins as f64).sqrt()
}

/// <H> over |Psi|^2 with its standard error.
pub fn estimate_energy<S: NqsState + ?Sized>(
    psi: &S,
    h: &PauliStringHamiltonian,
    estimator: &Estimator,
    seed: u64,
) -> Result<EnergyEstimate> {
    Ok(Batch::collect(psi, h, estimator, seed)?.energy())
}

/// Energy gradient 2 (<O^* E> - <O^*><E>) with respect to the real and
/// imaginary part of every parameter.
pub fn estimate_gradient<S: Variational + ?Sized>(
    psi: &S,
    h: &PauliStringHamiltonian,
    estimator: &Estimator,
    seed: u64,
) -> Result<GradientEstimate> {
    let batch = Batch::collect(psi, h, estimator, seed)?;
    let (centered, _) = batch.centered_derivatives(psi)?;
    let gradient = batch.force(&centered).into_iter().map(|f| 2.0 * f).collect();
    Ok(GradientEstimate { gradient, energy: batch.energy() })
}
