use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{NqsError, Result};
use crate::state::C64;

const POLE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Activation {
    Logistic,
    Tanh,
    Cos,
    Relu,
    Softplus,
    Elu { alpha: f64 },
    Heaviside,
    SmoothedStep { a: f64 },
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Activation::Logistic => write!(f, "logistic"),
            Activation::Tanh => write!(f, "tanh"),
            Activation::Cos => write!(f, "cos"),
            Activation::Relu => write!(f, "relu"),
            Activation::Softplus => write!(f, "softplus"),
            Activation::Elu { alpha } => write!(f, "elu({alpha})"),
            Activation::Heaviside => write!(f, "heaviside"),
            Activation::SmoothedStep { a } => write!(f, "smoothed-step({a})"),
        }
    }
}

impl FromStr for Activation {
    type Err = NqsError;

    /// Accepts `logistic`, `tanh`, `cos`, `relu`, `softplus`, `heaviside`,
    /// `elu(alpha)` and `smoothed-step(a)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let arg = |prefix: &str| -> Option<Result<f64>> {
            let rest = s.strip_prefix(prefix)?.strip_prefix('(')?.strip_suffix(')')?;
            Some(
                rest.trim()
                    .parse::<f64>()
                    .map_err(|e| NqsError::Config(format!("bad activation argument in {s:?}: {e}"))),
            )
        };
        match s {
            "logistic" => Ok(Activation::Logistic),
            "tanh" => Ok(Activation::Tanh),
            "cos" => Ok(Activation::Cos),
            "relu" => Ok(Activation::Relu),
            "softplus" => Ok(Activation::Softplus),
            "heaviside" => Ok(Activation::Heaviside),
            _ => {
                if let Some(alpha) = arg("elu") {
                    Ok(Activation::Elu { alpha: alpha? })
                } else if let Some(a) = arg("smoothed-step") {
                    Ok(Activation::SmoothedStep { a: a? })
                } else {
                    Err(NqsError::Config(format!("unknown activation {s:?}")))
                }
            }
        }
    }
}

/// Evaluates an activation on a complex argument.
///
/// Analytic activations use their closed form over the complex plane. The
/// piecewise ones (relu, heaviside, elu branch choice, smoothed step) act on
/// the real part.
pub fn activate(tag: Activation, z: C64) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    match tag {
        Activation::Logistic => {
            let denom = one + (-z).exp();
            if denom.norm() < POLE_TOLERANCE {
                return Err(NqsError::Singularity(format!("logistic pole at z = {z}")));
            }
            Ok(one / denom)
        }
        Activation::Tanh => {
            if z.cosh().norm() < POLE_TOLERANCE {
                return Err(NqsError::Singularity(format!("tanh pole at z = {z}")));
            }
            Ok(z.tanh())
        }
        Activation::Cos => Ok(z.cos()),
        Activation::Relu => Ok(C64::new(z.re.max(0.0), 0.0)),
        Activation::Softplus => crate::state::log1p_exp(z)
            .ok_or_else(|| NqsError::Singularity(format!("softplus log of zero at z = {z}"))),
        Activation::Elu { alpha } => {
            if z.re >= 0.0 {
                Ok(z)
            } else {
                Ok(alpha * (z.exp() - one))
            }
        }
        Activation::Heaviside => Ok(C64::new(if z.re > 0.0 { 1.0 } else { 0.0 }, 0.0)),
        Activation::SmoothedStep { a } => Ok(C64::new(smoothed_step(a, z.re)?, 0.0)),
    }
}

/// Step function smoothed by a triangular kernel of support [-a/2, a/2].
///
/// Equal to 0 for x <= -a/2, 1 for x >= a/2, piecewise quadratic between,
/// with continuous first derivative (the kernel itself).
pub fn smoothed_step(a: f64, x: f64) -> Result<f64> {
    if a <= 0.0 || !a.is_finite() {
        return Err(NqsError::Domain(format!("smoothed step width must be positive, got {a}")));
    }
    let half = 0.5 * a;
    let t = x / a;
    Ok(if x <= -half {
        0.0
    } else if x <= 0.0 {
        2.0 * (t + 0.5) * (t + 0.5)
    } else if x < half {
        1.0 - 2.0 * (0.5 - t) * (0.5 - t)
    } else {
        1.0
    })
}

/// Single Heaviside neuron with weights (-2, -2) and bias -3.
pub fn perceptron_nand(x1: u8, x2: u8) -> u8 {
    assert!(x1 <= 1 && x2 <= 1, "perceptron inputs must be bits");
    let (w1, w2, bias) = (-2.0, -2.0, -3.0);
    let z = C64::new(w1 * x1 as f64 + w2 * x2 as f64 - bias, 0.0);
    match activate(Activation::Heaviside, z) {
        Ok(y) => y.re as u8,
        Err(_) => unreachable!("heaviside has no poles"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn logistic_and_tanh_at_zero() {
        assert_eq!(activate(Activation::Logistic, c(0.0, 0.0)).unwrap(), c(0.5, 0.0));
        assert_eq!(activate(Activation::Tanh, c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn logistic_pole_is_reported() {
        let err = activate(Activation::Logistic, c(0.0, PI)).unwrap_err();
        assert!(matches!(err, NqsError::Singularity(_)));
        assert!(activate(Activation::Logistic, c(0.0, 3.0 * PI)).is_err());
    }

    #[test]
    fn tanh_pole_is_reported() {
        assert!(activate(Activation::Tanh, c(0.0, PI / 2.0)).is_err());
    }

    #[test]
    fn piecewise_activations_use_real_part() {
        assert_eq!(activate(Activation::Relu, c(-1.0, 5.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(activate(Activation::Relu, c(2.0, 5.0)).unwrap(), c(2.0, 0.0));
        assert_eq!(activate(Activation::Heaviside, c(0.0, 1.0)).unwrap(), c(0.0, 0.0));
        assert_eq!(activate(Activation::Heaviside, c(1e-9, -1.0)).unwrap(), c(1.0, 0.0));
        let elu = activate(Activation::Elu { alpha: 2.0 }, c(-1.0, 0.0)).unwrap();
        assert!((elu.re - 2.0 * ((-1.0f64).exp() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn softplus_matches_closed_form() {
        let z = c(0.4, -0.3);
        let want = (z.exp() + 1.0).ln();
        assert!((activate(Activation::Softplus, z).unwrap() - want).norm() < 1e-14);
    }

    #[test]
    fn activation_tags_parse() {
        assert_eq!("elu(0.5)".parse::<Activation>().unwrap(), Activation::Elu { alpha: 0.5 });
        assert_eq!(
            "smoothed-step(2)".parse::<Activation>().unwrap(),
            Activation::SmoothedStep { a: 2.0 }
        );
        assert!(matches!("swish".parse::<Activation>(), Err(NqsError::Config(_))));
        for tag in [Activation::Cos, Activation::Elu { alpha: 1.5 }, Activation::SmoothedStep { a: 0.25 }] {
            assert_eq!(tag.to_string().parse::<Activation>().unwrap(), tag);
        }
    }

    #[test]
    fn smoothed_step_reference_points() {
        assert_eq!(smoothed_step(1.0, -0.5).unwrap(), 0.0);
        assert_eq!(smoothed_step(1.0, 0.5).unwrap(), 1.0);
        assert_eq!(smoothed_step(1.0, 0.0).unwrap(), 0.5);
        assert!(matches!(smoothed_step(0.0, 0.1), Err(NqsError::Domain(_))));
        assert!(smoothed_step(-1.0, 0.1).is_err());
    }

    #[test]
    fn smoothed_step_matches_kernel_quadrature() {
        // F(x) = integral of K(u) for u from -a/2 to min(x, a/2), midpoint rule
        let a = 1.7;
        let kernel = |u: f64| {
            if (-a / 2.0..=0.0).contains(&u) {
                4.0 * u / (a * a) + 2.0 / a
            } else if (0.0..a / 2.0).contains(&u) {
                2.0 / a - 4.0 * u / (a * a)
            } else {
                0.0
            }
        };
        for i in 0..=20 {
            let x = -a + i as f64 * (2.0 * a / 20.0);
            let upper = x.min(a / 2.0);
            let steps = 20_000;
            let mut sum = 0.0;
            if upper > -a / 2.0 {
                let h = (upper + a / 2.0) / steps as f64;
                for k in 0..steps {
                    sum += kernel(-a / 2.0 + (k as f64 + 0.5) * h) * h;
                }
            }
            assert!((smoothed_step(a, x).unwrap() - sum).abs() < 1e-7, "x = {x}");
        }
    }

    #[test]
    fn smoothed_step_flat_at_support_edges() {
        let a = 1.3;
        let h = 1e-6;
        for edge in [-a / 2.0, a / 2.0] {
            let d = (smoothed_step(a, edge + h).unwrap() - smoothed_step(a, edge - h).unwrap()) / (2.0 * h);
            assert!(d.abs() < 1e-5, "slope {d} at {edge}");
        }
        // strictly increasing inside
        let mut prev = smoothed_step(a, -a / 2.0).unwrap();
        for i in 1..100 {
            let x = -a / 2.0 + a * i as f64 / 100.0;
            let f = smoothed_step(a, x).unwrap();
            assert!(f > prev);
            prev = f;
        }
    }

    #[test]
    fn perceptron_is_nand() {
        assert_eq!(perceptron_nand(1, 1), 0);
        assert_eq!(perceptron_nand(0, 0), 1);
        assert_eq!(perceptron_nand(0, 1), 1);
        assert_eq!(perceptron_nand(1, 0), 1);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn smoothed_step_is_lipschitz(a in 0.05f64..5.0, x in -6.0f64..6.0, h in 0.0f64..0.5) {
                let f0 = smoothed_step(a, x).unwrap();
                let f1 = smoothed_step(a, x + h).unwrap();
                prop_assert!((f1 - f0).abs() <= 2.0 / a * h + 1e-12);
            }

            #[test]
            fn logistic_reflection(re in -20.0f64..20.0, im in -3.0f64..3.0) {
                let z = C64::new(re, im);
                if let (Ok(p), Ok(m)) = (activate(Activation::Logistic, z), activate(Activation::Logistic, -z)) {
                    // skip arguments too close to a pole for the identity to be well conditioned
                    if p.norm() < 1e6 && m.norm() < 1e6 {
                        prop_assert!((p + m - C64::new(1.0, 0.0)).norm() < 1e-12 * (1.0 + p.norm() + m.norm()));
                    }
                }
            }
        }
    }
}
