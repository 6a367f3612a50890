use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{NqsError, Result};
use crate::state::C64;

fn check_finite(gradient: &[C64]) -> Result<()> {
    match gradient.iter().position(|g| !g.is_finite()) {
        Some(k) => Err(NqsError::Training(format!("non-finite gradient entry {k}: {}", gradient[k]))),
        None => Ok(()),
    }
}

/// Rescales `g` to Euclidean norm at most `clip`.
pub(crate) fn clip_gradient(g: &mut [C64], clip: Option<f64>) {
    if let Some(c) = clip {
        let norm = g.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
        if norm > c {
            let s = c / norm;
            g.iter_mut().for_each(|x| *x *= s);
        }
    }
}

/// p' = p - eta g, real and imaginary parts moving independently.
pub fn gd_update(params: &[C64], gradient: &[C64], eta: f64, clip: Option<f64>) -> Result<Vec<C64>> {
    if params.len() != gradient.len() {
        return Err(NqsError::Shape { expected: params.len(), got: gradient.len() });
    }
    check_finite(gradient)?;
    let mut g = gradient.to_vec();
    clip_gradient(&mut g, clip);
    Ok(params.iter().zip(&g).map(|(p, g)| p - eta * g).collect())
}

/// p' = p - (eta / N') sum_i g_i over a batch of per-sample gradients.
pub fn sgd_update(params: &[C64], batch: &[Vec<C64>], eta: f64, clip: Option<f64>) -> Result<Vec<C64>> {
    if batch.is_empty() {
        return Err(NqsError::Domain("empty gradient batch".into()));
    }
    let mut mean = vec![C64::new(0.0, 0.0); params.len()];
    for g in batch {
        if g.len() != params.len() {
            return Err(NqsError::Shape { expected: params.len(), got: g.len() });
        }
        for (m, x) in mean.iter_mut().zip(g) {
            *m += x;
        }
    }
    let inv = 1.0 / batch.len() as f64;
    mean.iter_mut().for_each(|m| *m *= inv);
    gd_update(params, &mean, eta, clip)
}

/// Natural-gradient direction (S + shift)^-1 F, where S is the weighted
/// covariance of the centered log-derivatives and F the force vector.
pub fn sr_direction(centered: &[Vec<C64>], weights: &[f64], force: &[C64], diag_shift: f64) -> Result<Vec<C64>> {
    let n = centered.len();
    let p = force.len();
    if weights.len() != n {
        return Err(NqsError::Shape { expected: n, got: weights.len() });
    }
    if !(diag_shift > 0.0) {
        return Err(NqsError::Domain(format!("diag_shift must be positive, got {diag_shift}")));
    }
    let mut x = DMatrix::<C64>::zeros(n, p);
    for (i, (row, w)) in centered.iter().zip(weights).enumerate() {
        let s = w.sqrt();
        for (k, o) in row.iter().enumerate() {
            x[(i, k)] = *o * s;
        }
    }
    let f = DVector::from_column_slice(force);
    let shift = C64::new(diag_shift, 0.0);
    let solve = |mut m: DMatrix<C64>, rhs: DVector<C64>| -> Result<DVector<C64>> {
        for d in 0..m.nrows() {
            m[(d, d)] += shift;
        }
        let chol = Cholesky::new(m).ok_or_else(|| NqsError::Singularity("S matrix is not positive definite".into()))?;
        Ok(chol.solve(&rhs))
    };
    let delta = solve(x.ad_mul(&x), f)?;
    let out: Vec<C64> = delta.iter().copied().collect();
    check_finite(&out)?;
    Ok(out)
}
