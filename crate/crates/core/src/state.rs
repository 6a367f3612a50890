//! The common interface every wavefunction ansatz implements.

use num_complex::Complex64;

use crate::error::{NqsError, Result};
use crate::spin::{Convention, SpinConfiguration};

pub type C64 = Complex64;

/// Logarithm of an unnormalized amplitude, with an explicit zero.
///
/// Ratios of amplitudes are formed from log differences, so an exact zero
/// is carried as its own variant instead of as `-inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LogAmplitude {
    Zero,
    Finite(C64),
}

impl LogAmplitude {
    /// Magnitudes at or below this relative threshold count as zero.
    pub const ZERO_TOLERANCE: f64 = 1e-12;

    pub fn from_amplitude(psi: C64) -> Self {
        if psi.norm() == 0.0 || !psi.is_finite() {
            LogAmplitude::Zero
        } else {
            LogAmplitude::Finite(psi.ln())
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, LogAmplitude::Zero)
    }

    pub fn log(&self) -> Option<C64> {
        match self {
            LogAmplitude::Zero => None,
            LogAmplitude::Finite(l) => Some(*l),
        }
    }

    pub fn amplitude(&self) -> C64 {
        match self {
            LogAmplitude::Zero => C64::new(0.0, 0.0),
            LogAmplitude::Finite(l) => l.exp(),
        }
    }

    /// Product of amplitudes.
    pub fn mul(self, other: LogAmplitude) -> LogAmplitude {
        match (self, other) {
            (LogAmplitude::Finite(a), LogAmplitude::Finite(b)) => LogAmplitude::Finite(a + b),
            _ => LogAmplitude::Zero,
        }
    }

    /// Psi(self) / Psi(base). Fails when the base amplitude vanishes.
    pub fn ratio_to(self, base: LogAmplitude) -> Option<C64> {
        match (self, base) {
            (_, LogAmplitude::Zero) => None,
            (LogAmplitude::Zero, _) => Some(C64::new(0.0, 0.0)),
            (LogAmplitude::Finite(a), LogAmplitude::Finite(b)) => Some((a - b).exp()),
        }
    }
}

/// Anything exposing an unnormalized amplitude over visible configurations.
pub trait NqsState: Sync {
    fn n_visible(&self) -> usize;

    fn visible_convention(&self) -> Convention {
        Convention::ZeroOne
    }

    fn log_amplitude(&self, v: &SpinConfiguration) -> Result<LogAmplitude>;

    fn amplitude(&self, v: &SpinConfiguration) -> Result<C64> {
        Ok(self.log_amplitude(v)?.amplitude())
    }
}

/// An ansatz with complex parameters and holomorphic log-derivatives.
pub trait Variational: NqsState {
    fn n_params(&self) -> usize;

    fn params(&self) -> Vec<C64>;

    fn set_params(&mut self, params: &[C64]) -> Result<()>;

    /// d log Psi(v) / d param_k for every parameter, in `params()` order.
    fn log_derivatives(&self, v: &SpinConfiguration) -> Result<Vec<C64>>;
}

pub(crate) fn check_input(
    n_visible: usize,
    convention: Convention,
    v: &SpinConfiguration,
) -> Result<()> {
    if v.len() != n_visible {
        return Err(NqsError::Shape {
            expected: n_visible,
            got: v.len(),
        });
    }
    if v.convention() != convention {
        return Err(NqsError::ConventionMismatch {
            expected: convention,
            got: v.convention(),
        });
    }
    Ok(())
}

/// log(1 + e^z), stable for large |Re z|. Returns None at an exact zero of 1 + e^z.
pub(crate) fn log1p_exp(z: C64) -> Option<C64> {
    let one = C64::new(1.0, 0.0);
    if z.re > 0.0 {
        let t = one + (-z).exp();
        if t.norm() <= LogAmplitude::ZERO_TOLERANCE {
            None
        } else {
            Some(z + t.ln())
        }
    } else {
        let t = one + z.exp();
        if t.norm() <= LogAmplitude::ZERO_TOLERANCE {
            None
        } else {
            Some(t.ln())
        }
    }
}

/// log(2 cosh z), stable for large |Re z|.
pub(crate) fn log_2cosh(z: C64) -> Option<C64> {
    let s = if z.re >= 0.0 { z } else { -z };
    let t = C64::new(1.0, 0.0) + (-2.0 * s).exp();
    if t.norm() <= LogAmplitude::ZERO_TOLERANCE {
        None
    } else {
        Some(s + t.ln())
    }
}

/// e^z / (1 + e^z), the mean of a {0,1} unit with field z.
pub(crate) fn logistic(z: C64) -> C64 {
    let one = C64::new(1.0, 0.0);
    if z.re > 0.0 {
        one / (one + (-z).exp())
    } else {
        let e = z.exp();
        e / (one + e)
    }
}
