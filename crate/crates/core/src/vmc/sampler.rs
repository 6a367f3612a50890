use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NqsError, Result};
use crate::spin::SpinConfiguration;
use crate::state::{LogAmplitude, NqsState, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Proposal {
    /// Flip one uniformly chosen site.
    #[default]
    SingleFlip,
    /// Swap two anti-aligned sites; keeps total magnetization fixed.
    Exchange,
}

/// A Metropolis walker over configurations distributed as |Psi|^2.
#[derive(Debug, Clone)]
pub struct MetropolisChain {
    current: SpinConfiguration,
    current_log_amp: C64,
    rng: ChaCha8Rng,
    seed: u64,
    proposal: Proposal,
    step_count: u64,
    accept_count: u64,
}

impl MetropolisChain {
    pub fn new<S: NqsState + ?Sized>(
        psi: &S,
        start: SpinConfiguration,
        seed: u64,
        proposal: Proposal,
    ) -> Result<Self> {
        let log = psi
            .log_amplitude(&start)?
            .log()
            .ok_or_else(|| NqsError::ZeroAmplitude(start.to_string()))?;
        Ok(Self {
            current: start,
            current_log_amp: log,
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
            proposal,
            step_count: 0,
            accept_count: 0,
        })
    }

    /// Starts from a random configuration with nonzero amplitude. With the
    /// exchange proposal the start has zero magnetization (n even) or +1.
    pub fn random_start<S: NqsState + ?Sized>(psi: &S, seed: u64, proposal: Proposal) -> Result<Self> {
        let n = psi.n_visible();
        let conv = psi.visible_convention();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
        for _ in 0..1000 {
            let bits: Vec<u8> = match proposal {
                Proposal::SingleFlip => (0..n).map(|_| rng.gen_range(0..2u8)).collect(),
                Proposal::Exchange => {
                    let mut b: Vec<u8> = (0..n).map(|i| u8::from(i < n / 2)).collect();
                    for i in (1..n).rev() {
                        b.swap(i, rng.gen_range(0..=i));
                    }
                    b
                }
            };
            let v = SpinConfiguration::new(bits, conv);
            if !psi.log_amplitude(&v)?.is_zero() {
                return Self::new(psi, v, seed, proposal);
            }
        }
        Err(NqsError::ZeroAmplitude("no nonzero start found in 1000 draws".into()))
    }

    pub fn current(&self) -> &SpinConfiguration {
        &self.current
    }

    pub fn current_log_amp(&self) -> C64 {
        self.current_log_amp
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn accept_count(&self) -> u64 {
        self.accept_count
    }

    pub fn acceptance(&self) -> f64 {
        if self.step_count == 0 {
            0.0
        } else {
            self.accept_count as f64 / self.step_count as f64
        }
    }

    fn propose(&mut self) -> Option<SpinConfiguration> {
        let n = self.current.len();
        match self.proposal {
            Proposal::SingleFlip => {
                let s = self.rng.gen_range(0..n);
                Some(self.current.flipped(&[s]))
            }
            Proposal::Exchange => {
                let ones: Vec<usize> = (0..n).filter(|&i| self.current.bit(i) == 1).collect();
                let zeros: Vec<usize> = (0..n).filter(|&i| self.current.bit(i) == 0).collect();
                if ones.is_empty() || zeros.is_empty() {
                    return None;
                }
                let a = ones[self.rng.gen_range(0..ones.len())];
                let b = zeros[self.rng.gen_range(0..zeros.len())];
                Some(self.current.flipped(&[a, b]))
            }
        }
    }

    /// One proposal, accepted with probability min(1, |Psi(v')/Psi(v)|^2).
    /// Returns whether the move was accepted.
    pub fn step<S: NqsState + ?Sized>(&mut self, psi: &S) -> Result<bool> {
        self.step_count += 1;
        let Some(candidate) = self.propose() else {
            return Ok(false);
        };
        let accepted = match psi.log_amplitude(&candidate)? {
            LogAmplitude::Zero => false,
            LogAmplitude::Finite(log) => {
                let ratio = (2.0 * (log - self.current_log_amp).re).exp();
                let u: f64 = self.rng.gen();
                if u < ratio {
                    self.current = candidate;
                    self.current_log_amp = log;
                    true
                } else {
                    false
                }
            }
        };
        if accepted {
            self.accept_count += 1;
        }
        Ok(accepted)
    }
}

/// Functional form of [`MetropolisChain::step`].
pub fn metropolis_step<S: NqsState + ?Sized>(chain: &MetropolisChain, psi: &S) -> Result<MetropolisChain> {
    let mut next = chain.clone();
    next.step(psi)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplerOptions {
    #[serde(default)]
    pub proposal: Proposal,
    /// Fraction of the requested sample count run and discarded first.
    #[serde(default = "default_burn_in")]
    pub burn_in_fraction: f64,
    /// Proposals between recorded samples; `None` means one per site.
    #[serde(default)]
    pub thinning: Option<usize>,
}

fn default_burn_in() -> f64 {
    0.1
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self { proposal: Proposal::SingleFlip, burn_in_fraction: default_burn_in(), thinning: None }
    }
}

/// Draws `n_samples` configurations distributed as |Psi|^2. Returns the
/// samples and the chain's acceptance rate.
pub fn sample<S: NqsState + ?Sized>(
    psi: &S,
    n_samples: usize,
    seed: u64,
    opts: &SamplerOptions,
) -> Result<(Vec<SpinConfiguration>, f64)> {
    let mut chain = MetropolisChain::random_start(psi, seed, opts.proposal)?;
    let thin = opts.thinning.unwrap_or(psi.n_visible()).max(1);
    let burn = (opts.burn_in_fraction * n_samples as f64).ceil() as usize;
    for _ in 0..burn * thin {
        chain.step(psi)?;
    }
    let mut out = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        for _ in 0..thin {
            chain.step(psi)?;
        }
        out.push(chain.current().clone());
    }
    Ok((out, chain.acceptance()))
}
