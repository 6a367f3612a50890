use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{log_sum_exp, RbmState, ENUMERATION_LIMIT};
use crate::error::{NqsError, Result};
use crate::net::{Layer, NetworkParameters, VertexId};
use crate::spin::{Convention, SpinConfiguration};
use crate::state::{check_input, log1p_exp, log_2cosh, LogAmplitude, NqsState, C64};

/// Two-hidden-layer Boltzmann machine with layered v - h - g couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct DbmState {
    /// Visible and shallow-hidden part (a, b, W).
    shallow: RbmState,
    /// Deep biases c_k.
    deep_bias: DVector<C64>,
    /// Shape (n_hidden_shallow, n_hidden_deep).
    deep_weights: DMatrix<C64>,
}

impl DbmState {
    pub fn new(shallow: RbmState, deep_bias: DVector<C64>, deep_weights: DMatrix<C64>) -> Result<Self> {
        if deep_weights.nrows() != shallow.n_hidden() {
            return Err(NqsError::Shape { expected: shallow.n_hidden(), got: deep_weights.nrows() });
        }
        if deep_weights.ncols() != deep_bias.len() {
            return Err(NqsError::Shape { expected: deep_bias.len(), got: deep_weights.ncols() });
        }
        Ok(Self { shallow, deep_bias, deep_weights })
    }

    pub fn random<R: Rng>(n_visible: usize, n_shallow: usize, n_deep: usize, scale: f64, rng: &mut R) -> Self {
        let shallow = RbmState::random(n_visible, n_shallow, scale, rng);
        let mut draw = || C64::new(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale));
        let deep_bias = DVector::from_fn(n_deep, |_, _| draw());
        let deep_weights = DMatrix::from_fn(n_shallow, n_deep, |_, _| draw());
        Self { shallow, deep_bias, deep_weights }
    }

    pub fn shallow(&self) -> &RbmState {
        &self.shallow
    }

    pub fn deep_bias(&self) -> &DVector<C64> {
        &self.deep_bias
    }

    pub fn deep_weights(&self) -> &DMatrix<C64> {
        &self.deep_weights
    }

    pub fn n_hidden_shallow(&self) -> usize {
        self.shallow.n_hidden()
    }

    pub fn n_hidden_deep(&self) -> usize {
        self.deep_bias.len()
    }

    pub fn disjoint_union(a: &DbmState, b: &DbmState) -> Result<DbmState> {
        let shallow = RbmState::disjoint_union(&a.shallow, &b.shallow)?;
        let (x, y) = (&a.deep_weights, &b.deep_weights);
        let mut w = DMatrix::zeros(x.nrows() + y.nrows(), x.ncols() + y.ncols());
        w.view_mut((0, 0), x.shape()).copy_from(x);
        w.view_mut(x.shape(), y.shape()).copy_from(y);
        let c = DVector::from_iterator(w.ncols(), a.deep_bias.iter().chain(b.deep_bias.iter()).copied());
        DbmState::new(shallow, c, w)
    }

    pub fn to_parameters(&self) -> NetworkParameters {
        let mut p = self.shallow.to_parameters();
        for (k, c) in self.deep_bias.iter().enumerate() {
            p.declare(VertexId::deep(k), *c);
        }
        for j in 0..self.n_hidden_shallow() {
            for k in 0..self.n_hidden_deep() {
                let w = self.deep_weights[(j, k)];
                if w != C64::new(0.0, 0.0) {
                    p.add_weight(VertexId::hidden(j), VertexId::deep(k), w).expect("distinct edges");
                }
            }
        }
        p
    }

    pub fn from_parameters(p: &NetworkParameters) -> Result<Self> {
        p.check_contiguous()?;
        let mut shallow = NetworkParameters::new();
        let (m, q) = (p.count(Layer::Hidden), p.count(Layer::Deep));
        let mut c = DVector::zeros(q);
        for (v, b) in p.biases() {
            match v.layer {
                Layer::Deep => c[v.index] = b,
                _ => shallow.declare(v, b),
            }
        }
        let mut w = DMatrix::zeros(m, q);
        for ((x, y), val) in p.weights() {
            match (x.layer, y.layer) {
                (Layer::Visible, Layer::Hidden) => shallow.add_weight(x, y, val)?,
                (Layer::Hidden, Layer::Deep) => w[(x.index, y.index)] = val,
                _ => return Err(NqsError::Config(format!("DBM is layered; edge {x}-{y} not allowed"))),
            }
        }
        DbmState::new(RbmState::from_parameters(&shallow)?, c, w)
    }
}

/// log sum_{h,g} exp(-E(v, h, g)), summing h analytically for each deep
/// assignment g.
pub fn dbm_log_amplitude_exact(state: &DbmState, v: &SpinConfiguration) -> Result<LogAmplitude> {
    let rbm = &state.shallow;
    check_input(rbm.n_visible(), rbm.visible_convention(), v)?;
    let (m, q) = (state.n_hidden_shallow(), state.n_hidden_deep());
    if m + q > ENUMERATION_LIMIT {
        return Err(NqsError::Capacity { what: "hidden units".into(), value: m + q, limit: ENUMERATION_LIMIT });
    }
    let mut visible = C64::new(0.0, 0.0);
    for i in 0..v.len() {
        visible += rbm.visible_bias()[i] * v.value(i);
    }
    let theta = rbm.effective_fields(v);
    let hidden = rbm.hidden_convention();
    let gv = hidden.values();
    let mut terms = Vec::with_capacity(1 << q);
    let mut field = theta.clone();
    'outer: for mask in 0..1usize << q {
        let mut t = visible;
        field.copy_from(&theta);
        for k in 0..q {
            let g = gv[(mask >> k) & 1];
            if g != 0.0 {
                t += state.deep_bias[k] * g;
                field += state.deep_weights.column(k) * C64::new(g, 0.0);
            }
        }
        for f in field.iter() {
            let gamma = match hidden {
                Convention::ZeroOne => log1p_exp(*f),
                Convention::PlusMinusOne => log_2cosh(*f),
            };
            match gamma {
                Some(l) => t += l,
                None => continue 'outer,
            }
        }
        terms.push(t);
    }
    Ok(log_sum_exp(&terms))
}

impl NqsState for DbmState {
    fn n_visible(&self) -> usize {
        self.shallow.n_visible()
    }

    fn visible_convention(&self) -> Convention {
        self.shallow.visible_convention()
    }

    fn log_amplitude(&self, v: &SpinConfiguration) -> Result<LogAmplitude> {
        dbm_log_amplitude_exact(self, v)
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::bm::rbm_log_amplitude;
    use crate::spin::all_configurations;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::LN_2;

    /// naive sum over every (h, g) assignment with the energy written out
    pub(crate) fn enumerate(state: &DbmState, v: &SpinConfiguration) -> C64 {
        let rbm = state.shallow();
        let (n, m, q) = (rbm.n_visible(), state.n_hidden_shallow(), state.n_hidden_deep());
        let mut total = C64::new(0.0, 0.0);
        for hm in 0..1usize << m {
            for gm in 0..1usize << q {
                let h: Vec<f64> = (0..m).map(|j| ((hm >> j) & 1) as f64).collect();
                let g: Vec<f64> = (0..q).map(|k| ((gm >> k) & 1) as f64).collect();
                let mut neg_e = C64::new(0.0, 0.0);
                for i in 0..n {
                    neg_e += rbm.visible_bias()[i] * v.value(i);
                }
                for k in 0..q {
                    neg_e += state.deep_bias()[k] * g[k];
                }
                for j in 0..m {
                    neg_e += rbm.hidden_bias()[j] * h[j];
                    for i in 0..n {
                        neg_e += rbm.weights()[(i, j)] * v.value(i) * h[j];
                    }
                    for k in 0..q {
                        neg_e += state.deep_weights()[(j, k)] * h[j] * g[k];
                    }
                }
                total += neg_e.exp();
            }
        }
        total
    }

    #[test]
    fn zero_deep_layer_decouples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rbm = RbmState::random(3, 2, 1.0, &mut rng);
        let dbm = DbmState::new(rbm.clone(), DVector::zeros(3), DMatrix::zeros(2, 3)).unwrap();
        for v in all_configurations(3, Convention::ZeroOne) {
            let a = dbm_log_amplitude_exact(&dbm, &v).unwrap().log().unwrap();
            let b = rbm_log_amplitude(&rbm, &v).unwrap().log().unwrap();
            assert!(((a - b - 3.0 * LN_2).exp() - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn no_deep_units_equals_rbm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rbm = RbmState::random(2, 3, 1.0, &mut rng);
        let dbm = DbmState::new(rbm.clone(), DVector::zeros(0), DMatrix::zeros(3, 0)).unwrap();
        for v in all_configurations(2, Convention::ZeroOne) {
            let a = dbm_log_amplitude_exact(&dbm, &v).unwrap().amplitude();
            let b = rbm_log_amplitude(&rbm, &v).unwrap().amplitude();
            assert!((a - b).norm() < 1e-12 * b.norm());
        }
    }

    #[test]
    fn matches_full_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let dbm = DbmState::random(2, 2, 2, 1.0, &mut rng);
            for v in all_configurations(2, Convention::ZeroOne) {
                let want = enumerate(&dbm, &v);
                let got = dbm_log_amplitude_exact(&dbm, &v).unwrap().amplitude();
                assert!((got - want).norm() < 1e-12 * want.norm());
            }
        }
    }

    #[test]
    fn capacity_guard() {
        let dbm = DbmState::new(RbmState::zeros(1, 12), DVector::zeros(11), DMatrix::zeros(12, 11)).unwrap();
        let v = SpinConfiguration::zeros(1, Convention::ZeroOne);
        assert!(matches!(dbm_log_amplitude_exact(&dbm, &v), Err(NqsError::Capacity { .. })));
    }

    #[test]
    fn layered_parameters_only() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dbm = DbmState::random(2, 2, 2, 1.0, &mut rng);
        let p = dbm.to_parameters();
        assert_eq!(DbmState::from_parameters(&p).unwrap(), dbm);
        let mut bad = p.clone();
        bad.add_weight(VertexId::visible(0), VertexId::deep(0), C64::new(1.0, 0.0)).unwrap();
        assert!(DbmState::from_parameters(&bad).is_err());
    }

    #[test]
    fn disjoint_union_multiplies() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DbmState::random(1, 2, 1, 1.0, &mut rng);
        let b = DbmState::random(2, 1, 2, 1.0, &mut rng);
        let u = DbmState::disjoint_union(&a, &b).unwrap();
        for idx in 0..8 {
            let vu = SpinConfiguration::from_index(idx, 3, Convention::ZeroOne);
            let va = SpinConfiguration::from_index(idx >> 2, 1, Convention::ZeroOne);
            let vb = SpinConfiguration::from_index(idx & 3, 2, Convention::ZeroOne);
            let lhs = dbm_log_amplitude_exact(&u, &vu).unwrap().amplitude();
            let rhs = dbm_log_amplitude_exact(&a, &va).unwrap().amplitude()
                * dbm_log_amplitude_exact(&b, &vb).unwrap().amplitude();
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm());
        }
    }
}
