use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::basis::{apply_local, MeasurementRecord};
use super::purified::{check_density, PurifiedRbm};
use crate::error::{NqsError, Result};
use crate::exact::{fidelity, DenseState};
use crate::linalg::trace_distance;
use crate::state::C64;

/// Argument order of the per-basis KL divergence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KlDirection {
    /// sum q log(q / p): data first.
    #[default]
    DataModel,
    /// sum p log(p / q): model first.
    ModelData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomoConfig {
    /// Initial step; grown by 1.2 after accepted steps, halved on a loss increase.
    pub learning_rate: f64,
    pub epochs: usize,
    /// Stop once the total divergence falls to this value.
    #[serde(default)]
    pub tolerance: f64,
    #[serde(default)]
    pub direction: KlDirection,
}

#[derive(Debug, Clone)]
pub struct TomoResult {
    pub model: PurifiedRbm,
    /// Total divergence before each epoch and after the last.
    pub divergence: Vec<f64>,
    /// Fidelity to the target per entry of `divergence` (pure runs with a target).
    pub fidelity: Vec<f64>,
    /// Trace distance to the target per entry of `divergence` (mixed runs with a target).
    pub trace_distance: Vec<f64>,
}

struct Evaluation {
    loss: f64,
    gradient: Vec<f64>,
}

fn loss_and_gradient(model: &PurifiedRbm, records: &[MeasurementRecord], dir: KlDirection, with_grad: bool) -> Result<Evaluation> {
    let n = model.n_visible();
    let l = model.n_env();
    let psi = model.purified_matrix();
    let mut adj = DMatrix::<C64>::zeros(psi.nrows(), psi.ncols());
    let mut loss = 0.0;
    for rec in records {
        if rec.basis.len() != n {
            return Err(NqsError::Shape { expected: n, got: rec.basis.len() });
        }
        let q = rec.probabilities();
        let mats = rec.basis.local_unitaries();
        let mut phi = psi.clone();
        apply_local(&mut phi, &mats, false);
        let p: Vec<f64> = (0..phi.nrows()).map(|s| phi.row(s).iter().map(|z| z.norm_sqr()).sum()).collect();
        let mut g = vec![0.0; p.len()];
        for s in 0..p.len() {
            match dir {
                KlDirection::DataModel => {
                    if q[s] > 0.0 {
                        if p[s] <= 0.0 {
                            return Err(NqsError::DivergenceInfinite { basis: rec.basis.to_string() });
                        }
                        loss += q[s] * (q[s] / p[s]).ln();
                        g[s] = q[s] / p[s];
                    }
                }
                KlDirection::ModelData => {
                    if p[s] > 0.0 {
                        if q[s] <= 0.0 {
                            return Err(NqsError::DivergenceInfinite { basis: rec.basis.to_string() });
                        }
                        let r = (p[s] / q[s]).ln();
                        loss += p[s] * r;
                        g[s] = -(1.0 + r);
                    }
                }
            }
        }
        if with_grad {
            let mut m = DMatrix::from_fn(phi.nrows(), phi.ncols(), |s, e| phi[(s, e)].conj() * g[s]);
            apply_local(&mut m, &mats, true);
            adj += m;
        }
    }
    if !with_grad {
        return Ok(Evaluation { loss, gradient: vec![] });
    }
    // dD/dlambda = -2 Re sum_{v,e} Psi(v,e) R(v,e) dlog Psi(v,e)/dlambda
    let k = psi.component_mul(&adj);
    let (na, np) = (model.amplitude.n_params(), model.phase.n_params());
    let mut mean_d1 = vec![0.0; na];
    let mut sum_k = 0.0;
    let mut grad_a = vec![0.0; na];
    let mut grad_p = vec![0.0; np];
    for vi in 0..psi.nrows() {
        let v = PurifiedRbm::bits(vi, n);
        for ei in 0..psi.ncols() {
            let e = PurifiedRbm::bits(ei, l);
            let w = psi[(vi, ei)].norm_sqr();
            let kk = k[(vi, ei)];
            let d1 = model.amplitude.log_p_derivatives(&v, &e);
            for (idx, d) in d1.iter().enumerate() {
                mean_d1[idx] += w * d;
                grad_a[idx] -= kk.re * d;
            }
            sum_k += kk.re;
            let d2 = model.phase.log_p_derivatives(&v, &e);
            for (idx, d) in d2.iter().enumerate() {
                grad_p[idx] += kk.im * d;
            }
        }
    }
    for (g, m) in grad_a.iter_mut().zip(&mean_d1) {
        *g += sum_k * m;
    }
    grad_a.extend(grad_p);
    Ok(Evaluation { loss, gradient: grad_a })
}

/// Total divergence of the model against the records.
pub fn total_divergence(model: &PurifiedRbm, records: &[MeasurementRecord], dir: KlDirection) -> Result<f64> {
    Ok(loss_and_gradient(model, records, dir, false)?.loss)
}

enum Target<'a> {
    None,
    Pure(&'a DenseState),
    Mixed(&'a DMatrix<C64>),
}

fn pure_state(model: &PurifiedRbm) -> Result<DenseState> {
    let psi = model.purified_matrix();
    DenseState::new(DVector::from_iterator(psi.nrows(), psi.column(0).iter().copied()))
}

fn fit(records: &[MeasurementRecord], model: &PurifiedRbm, config: &TomoConfig, target: Target<'_>) -> Result<TomoResult> {
    if !(config.learning_rate > 0.0) {
        return Err(NqsError::Config(format!("learning_rate must be positive, got {}", config.learning_rate)));
    }
    if records.is_empty() {
        return Err(NqsError::Domain("no measurement records".into()));
    }
    let mut model = model.clone();
    let mut params = model.params();
    let mut eta = config.learning_rate;
    let mut out = TomoResult { model: model.clone(), divergence: vec![], fidelity: vec![], trace_distance: vec![] };
    let record = |m: &PurifiedRbm, loss: f64, out: &mut TomoResult| -> Result<()> {
        out.divergence.push(loss);
        match target {
            Target::None => {}
            Target::Pure(t) => out.fidelity.push(fidelity(t, &pure_state(m)?)?),
            Target::Mixed(rho) => {
                let mine = super::purified::density_matrix(m)?;
                out.trace_distance.push(trace_distance(rho, &mine)?);
            }
        }
        Ok(())
    };
    let mut current = loss_and_gradient(&model, records, config.direction, true)?;
    record(&model, current.loss, &mut out)?;
    for _ in 0..config.epochs {
        if current.loss <= config.tolerance {
            break;
        }
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = params.iter().zip(&current.gradient).map(|(p, g)| p - eta * g).collect();
            let mut next = model.clone();
            next.set_params(&trial)?;
            match loss_and_gradient(&next, records, config.direction, true) {
                Ok(eval) if eval.loss <= current.loss && eval.loss.is_finite() => {
                    model = next;
                    params = trial;
                    current = eval;
                    eta *= 1.2;
                    accepted = true;
                    break;
                }
                Ok(_) | Err(NqsError::DivergenceInfinite { .. }) => eta *= 0.5,
                Err(e) => return Err(e),
            }
        }
        if !accepted {
            break;
        }
        record(&model, current.loss, &mut out)?;
    }
    out.model = model;
    Ok(out)
}

/// Fits a pure state (no environment units) to the records.
pub fn tomo_pure(
    records: &[MeasurementRecord],
    model: &PurifiedRbm,
    config: &TomoConfig,
    target: Option<&DenseState>,
) -> Result<TomoResult> {
    if model.n_env() != 0 {
        return Err(NqsError::Domain(format!("pure tomography takes a model without environment units, got {}", model.n_env())));
    }
    fit(records, model, config, target.map_or(Target::None, Target::Pure))
}

/// Fits a density operator through its purification.
pub fn tomo_mixed(
    records: &[MeasurementRecord],
    model: &PurifiedRbm,
    config: &TomoConfig,
    target: Option<&DMatrix<C64>>,
) -> Result<TomoResult> {
    if let Some(rho) = target {
        check_density(rho)?;
    }
    fit(records, model, config, target.map_or(Target::None, Target::Mixed))
}
