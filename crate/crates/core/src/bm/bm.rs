use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{log_sum_exp, RbmState, ENUMERATION_LIMIT};
use crate::error::{NqsError, Result};
use crate::net::{Layer, NetworkParameters, VertexId};
use crate::spin::{Convention, SpinConfiguration};
use crate::state::{check_input, LogAmplitude, NqsState, C64};

/// Fully connected Boltzmann machine: an RBM plus hidden-hidden and
/// visible-visible couplings.
#[derive(Debug, Clone, PartialEq)]
pub struct BmState {
    rbm: RbmState,
    /// Strictly upper triangular (j < j').
    hidden_couplings: DMatrix<C64>,
    /// Strictly upper triangular (i < i').
    visible_couplings: DMatrix<C64>,
}

impl BmState {
    pub fn new(rbm: RbmState, hidden_couplings: DMatrix<C64>, visible_couplings: DMatrix<C64>) -> Result<Self> {
        let (n, m) = (rbm.n_visible(), rbm.n_hidden());
        if hidden_couplings.shape() != (m, m) {
            return Err(NqsError::Shape { expected: m, got: hidden_couplings.nrows() });
        }
        if visible_couplings.shape() != (n, n) {
            return Err(NqsError::Shape { expected: n, got: visible_couplings.nrows() });
        }
        for mat in [&hidden_couplings, &visible_couplings] {
            for r in 0..mat.nrows() {
                for c in 0..=r {
                    if mat[(r, c)] != C64::new(0.0, 0.0) {
                        return Err(NqsError::Config(
                            "intra-layer couplings must be strictly upper triangular".into(),
                        ));
                    }
                }
            }
        }
        Ok(Self { rbm, hidden_couplings, visible_couplings })
    }

    pub fn from_rbm(rbm: RbmState) -> Self {
        let (n, m) = (rbm.n_visible(), rbm.n_hidden());
        Self { rbm, hidden_couplings: DMatrix::zeros(m, m), visible_couplings: DMatrix::zeros(n, n) }
    }

    pub fn random<R: Rng>(n_visible: usize, n_hidden: usize, scale: f64, rng: &mut R) -> Self {
        let rbm = RbmState::random(n_visible, n_hidden, scale, rng);
        let mut s = Self::from_rbm(rbm);
        let mut draw = || C64::new(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale));
        for mat in [&mut s.hidden_couplings, &mut s.visible_couplings] {
            let k = mat.nrows();
            for r in 0..k {
                for c in r + 1..k {
                    mat[(r, c)] = draw();
                }
            }
        }
        s
    }

    pub fn rbm(&self) -> &RbmState {
        &self.rbm
    }

    pub fn n_hidden(&self) -> usize {
        self.rbm.n_hidden()
    }

    pub fn hidden_couplings(&self) -> &DMatrix<C64> {
        &self.hidden_couplings
    }

    pub fn visible_couplings(&self) -> &DMatrix<C64> {
        &self.visible_couplings
    }

    pub fn disjoint_union(a: &BmState, b: &BmState) -> Result<BmState> {
        let rbm = RbmState::disjoint_union(&a.rbm, &b.rbm)?;
        let block = |x: &DMatrix<C64>, y: &DMatrix<C64>| {
            let mut m = DMatrix::zeros(x.nrows() + y.nrows(), x.ncols() + y.ncols());
            m.view_mut((0, 0), x.shape()).copy_from(x);
            m.view_mut(x.shape(), y.shape()).copy_from(y);
            m
        };
        BmState::new(
            rbm,
            block(&a.hidden_couplings, &b.hidden_couplings),
            block(&a.visible_couplings, &b.visible_couplings),
        )
    }

    pub fn to_parameters(&self) -> NetworkParameters {
        let mut p = self.rbm.to_parameters();
        let zero = C64::new(0.0, 0.0);
        for (mat, mk) in [
            (&self.hidden_couplings, VertexId::hidden as fn(usize) -> VertexId),
            (&self.visible_couplings, VertexId::visible as fn(usize) -> VertexId),
        ] {
            for r in 0..mat.nrows() {
                for c in r + 1..mat.ncols() {
                    if mat[(r, c)] != zero {
                        p.add_weight(mk(r), mk(c), mat[(r, c)]).expect("distinct edges");
                    }
                }
            }
        }
        p
    }

    pub fn from_parameters(p: &NetworkParameters) -> Result<Self> {
        let mut bipartite = NetworkParameters::new();
        for (v, b) in p.biases() {
            bipartite.declare(v, b);
        }
        let (n, m) = (p.count(Layer::Visible), p.count(Layer::Hidden));
        let mut hh = DMatrix::zeros(m, m);
        let mut vv = DMatrix::zeros(n, n);
        for ((x, y), w) in p.weights() {
            match (x.layer, y.layer) {
                (Layer::Hidden, Layer::Hidden) => hh[(x.index.min(y.index), x.index.max(y.index))] = w,
                (Layer::Visible, Layer::Visible) => vv[(x.index.min(y.index), x.index.max(y.index))] = w,
                _ => bipartite.add_weight(x, y, w)?,
            }
        }
        BmState::new(RbmState::from_parameters(&bipartite)?, hh, vv)
    }
}

/// log sum_h exp(-E(h, v)) over every hidden assignment, with the full
/// energy including intra-layer couplings.
pub fn bm_log_amplitude(state: &BmState, v: &SpinConfiguration) -> Result<LogAmplitude> {
    let rbm = &state.rbm;
    check_input(rbm.n_visible(), rbm.visible_convention(), v)?;
    let m = rbm.n_hidden();
    if m > ENUMERATION_LIMIT {
        return Err(NqsError::Capacity { what: "hidden units".into(), value: m, limit: ENUMERATION_LIMIT });
    }
    let n = v.len();
    let x: Vec<f64> = v.values();
    let mut fixed = C64::new(0.0, 0.0);
    for i in 0..n {
        fixed += rbm.visible_bias()[i] * x[i];
        for k in i + 1..n {
            fixed += state.visible_couplings[(i, k)] * (x[i] * x[k]);
        }
    }
    let theta: DVector<C64> = rbm.effective_fields(v);
    let hv = rbm.hidden_convention().values();
    let mut terms = Vec::with_capacity(1 << m);
    let mut h = vec![0.0; m];
    for mask in 0..1usize << m {
        for (j, hj) in h.iter_mut().enumerate() {
            *hj = hv[(mask >> j) & 1];
        }
        let mut t = fixed;
        for j in 0..m {
            if h[j] == 0.0 {
                continue;
            }
            t += theta[j] * h[j];
            for k in j + 1..m {
                t += state.hidden_couplings[(j, k)] * (h[j] * h[k]);
            }
        }
        terms.push(t);
    }
    Ok(log_sum_exp(&terms))
}

impl NqsState for BmState {
    fn n_visible(&self) -> usize {
        self.rbm.n_visible()
    }

    fn visible_convention(&self) -> Convention {
        self.rbm.visible_convention()
    }

    fn log_amplitude(&self, v: &SpinConfiguration) -> Result<LogAmplitude> {
        bm_log_amplitude(self, v)
    }
}
