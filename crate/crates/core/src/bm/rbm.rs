use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{NqsError, Result};
use crate::net::{Layer, NetworkParameters, VertexId};
use crate::spin::{Convention, SpinConfiguration};
use crate::state::{check_input, log1p_exp, log_2cosh, logistic, LogAmplitude, NqsState, Variational, C64};

/// Restricted Boltzmann machine: visible biases a, hidden biases b and
/// visible-hidden weights W only.
#[derive(Debug, Clone, PartialEq)]
pub struct RbmState {
    visible_bias: DVector<C64>,
    hidden_bias: DVector<C64>,
    /// Shape (n_visible, n_hidden).
    weights: DMatrix<C64>,
    visible: Convention,
    hidden: Convention,
}

impl RbmState {
    pub fn new(visible_bias: DVector<C64>, hidden_bias: DVector<C64>, weights: DMatrix<C64>) -> Result<Self> {
        if weights.nrows() != visible_bias.len() {
            return Err(NqsError::Shape { expected: visible_bias.len(), got: weights.nrows() });
        }
        if weights.ncols() != hidden_bias.len() {
            return Err(NqsError::Shape { expected: hidden_bias.len(), got: weights.ncols() });
        }
        Ok(Self {
            visible_bias,
            hidden_bias,
            weights,
            visible: Convention::ZeroOne,
            hidden: Convention::ZeroOne,
        })
    }

    pub fn zeros(n_visible: usize, n_hidden: usize) -> Self {
        Self {
            visible_bias: DVector::zeros(n_visible),
            hidden_bias: DVector::zeros(n_hidden),
            weights: DMatrix::zeros(n_visible, n_hidden),
            visible: Convention::ZeroOne,
            hidden: Convention::ZeroOne,
        }
    }

    /// Fully connected RBM with every real and imaginary part drawn
    /// uniformly from [-scale, scale].
    pub fn random<R: Rng>(n_visible: usize, n_hidden: usize, scale: f64, rng: &mut R) -> Self {
        let mut s = Self::zeros(n_visible, n_hidden);
        let mut draw = || C64::new(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale));
        s.visible_bias.iter_mut().for_each(|x| *x = draw());
        s.hidden_bias.iter_mut().for_each(|x| *x = draw());
        s.weights.iter_mut().for_each(|x| *x = draw());
        s
    }

    /// Chain RBM where hidden unit group s connects to sites s..s+window.
    /// There are `n_visible - window + 1` groups of `per_window` units.
    pub fn random_local<R: Rng>(
        n_visible: usize,
        window: usize,
        per_window: usize,
        scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        if window == 0 || window > n_visible {
            return Err(NqsError::Domain(format!("window {window} must be in 1..={n_visible}")));
        }
        let groups = n_visible - window + 1;
        let mut s = Self::random(n_visible, groups * per_window, scale, rng);
        for g in 0..groups {
            for k in 0..per_window {
                let j = g * per_window + k;
                for i in 0..n_visible {
                    if i < g || i >= g + window {
                        s.weights[(i, j)] = C64::new(0.0, 0.0);
                    }
                }
            }
        }
        Ok(s)
    }

    pub fn with_conventions(mut self, visible: Convention, hidden: Convention) -> Self {
        self.visible = visible;
        self.hidden = hidden;
        self
    }

    pub fn n_hidden(&self) -> usize {
        self.hidden_bias.len()
    }

    pub fn visible_bias(&self) -> &DVector<C64> {
        &self.visible_bias
    }

    pub fn hidden_bias(&self) -> &DVector<C64> {
        &self.hidden_bias
    }

    pub fn weights(&self) -> &DMatrix<C64> {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.weights
    }

    pub fn visible_bias_mut(&mut self) -> &mut DVector<C64> {
        &mut self.visible_bias
    }

    pub fn hidden_bias_mut(&mut self) -> &mut DVector<C64> {
        &mut self.hidden_bias
    }

    pub fn hidden_convention(&self) -> Convention {
        self.hidden
    }

    /// Visible sites with a nonzero weight to hidden unit j.
    pub fn connections(&self, j: usize) -> Vec<usize> {
        (0..self.n_visible()).filter(|&i| self.weights[(i, j)] != C64::new(0.0, 0.0)).collect()
    }

    /// theta_j = b_j + sum_i v_i W_ij for every hidden unit.
    pub fn effective_fields(&self, v: &SpinConfiguration) -> DVector<C64> {
        let mut theta = self.hidden_bias.clone();
        for i in 0..v.len() {
            let x = v.value(i);
            if x != 0.0 {
                theta += self.weights.row(i).transpose() * C64::new(x, 0.0);
            }
        }
        theta
    }

    /// Same amplitudes with hidden units taking the other convention.
    /// Returns the new state and the log of the constant c with
    /// Psi_old(v) = exp(c) * Psi_new(v).
    pub fn with_hidden_convention(&self, target: Convention) -> (RbmState, C64) {
        if target == self.hidden {
            return (self.clone(), C64::new(0.0, 0.0));
        }
        let mut out = self.clone();
        out.hidden = target;
        let (hi, lo) = (self.hidden.values(), target.values());
        // h_old = alpha * h_new + beta maps the new value pair onto the old one
        let alpha = (hi[1] - hi[0]) / (lo[1] - lo[0]);
        let beta = hi[0] - alpha * lo[0];
        // exp(h_old * theta) = exp(beta * theta) * exp(h_new * alpha * theta)
        out.hidden_bias = &self.hidden_bias * C64::new(alpha, 0.0);
        out.weights = &self.weights * C64::new(alpha, 0.0);
        let row_sums = self.weights.column_sum();
        out.visible_bias = &self.visible_bias + row_sums * C64::new(beta, 0.0);
        let log_c = self.hidden_bias.sum() * beta;
        (out, log_c)
    }

    /// Same amplitudes under the other visible convention (same bits).
    /// Returns the log of the dropped constant as in [`Self::with_hidden_convention`].
    pub fn with_visible_convention(&self, target: Convention) -> (RbmState, C64) {
        if target == self.visible {
            return (self.clone(), C64::new(0.0, 0.0));
        }
        let (old, new) = (self.visible.values(), target.values());
        // old value = alpha * new value + beta, bit by bit
        let alpha = (old[1] - old[0]) / (new[1] - new[0]);
        let beta = old[0] - alpha * new[0];
        let mut out = self.clone();
        out.visible = target;
        out.visible_bias = &self.visible_bias * C64::new(alpha, 0.0);
        out.weights = &self.weights * C64::new(alpha, 0.0);
        out.hidden_bias = &self.hidden_bias + self.weights.row_sum().transpose() * C64::new(beta, 0.0);
        let log_c = self.visible_bias.sum() * beta;
        (out, log_c)
    }

    /// Block-diagonal union: the amplitude of the result on (v_a, v_b) is
    /// the product of the two amplitudes.
    pub fn disjoint_union(a: &RbmState, b: &RbmState) -> Result<RbmState> {
        if a.visible != b.visible || a.hidden != b.hidden {
            return Err(NqsError::Config("conventions differ between union operands".into()));
        }
        let (na, nb, ma, mb) = (a.n_visible(), b.n_visible(), a.n_hidden(), b.n_hidden());
        let mut w = DMatrix::zeros(na + nb, ma + mb);
        w.view_mut((0, 0), (na, ma)).copy_from(&a.weights);
        w.view_mut((na, ma), (nb, mb)).copy_from(&b.weights);
        let av = DVector::from_iterator(na + nb, a.visible_bias.iter().chain(b.visible_bias.iter()).copied());
        let bh = DVector::from_iterator(ma + mb, a.hidden_bias.iter().chain(b.hidden_bias.iter()).copied());
        Ok(RbmState::new(av, bh, w)?.with_conventions(a.visible, a.hidden))
    }

    pub fn to_parameters(&self) -> NetworkParameters {
        let mut p = NetworkParameters::new();
        for (i, a) in self.visible_bias.iter().enumerate() {
            p.declare(VertexId::visible(i), *a);
        }
        for (j, b) in self.hidden_bias.iter().enumerate() {
            p.declare(VertexId::hidden(j), *b);
        }
        for i in 0..self.n_visible() {
            for j in 0..self.n_hidden() {
                let w = self.weights[(i, j)];
                if w != C64::new(0.0, 0.0) {
                    p.add_weight(VertexId::visible(i), VertexId::hidden(j), w)
                        .expect("fresh parameter set has no duplicates");
                }
            }
        }
        p
    }

    pub fn from_parameters(p: &NetworkParameters) -> Result<Self> {
        p.check_contiguous()?;
        if p.count(Layer::Deep) > 0 {
            return Err(NqsError::Config("RBM parameters may not contain deep units".into()));
        }
        let (n, m) = (p.count(Layer::Visible), p.count(Layer::Hidden));
        let mut s = Self::zeros(n, m);
        for (v, b) in p.biases() {
            match v.layer {
                Layer::Visible => s.visible_bias[v.index] = b,
                Layer::Hidden => s.hidden_bias[v.index] = b,
                Layer::Deep => unreachable!(),
            }
        }
        for ((x, y), w) in p.weights() {
            match (x.layer, y.layer) {
                (Layer::Visible, Layer::Hidden) => s.weights[(x.index, y.index)] = w,
                _ => {
                    return Err(NqsError::Config(format!(
                        "RBM is bipartite; edge {x}-{y} not allowed"
                    )))
                }
            }
        }
        Ok(s)
    }
}

/// log[prod_i e^{a_i v_i} prod_j Gamma_j(v)] with Gamma_j = 1 + e^theta_j
/// for {0,1} hidden units and 2 cosh(theta_j) for {-1,+1}.
pub fn rbm_log_amplitude(state: &RbmState, v: &SpinConfiguration) -> Result<LogAmplitude> {
    check_input(state.n_visible(), state.visible, v)?;
    let mut log = C64::new(0.0, 0.0);
    for i in 0..v.len() {
        log += state.visible_bias[i] * v.value(i);
    }
    let theta = state.effective_fields(v);
    for t in theta.iter() {
        let g = match state.hidden {
            Convention::ZeroOne => log1p_exp(*t),
            Convention::PlusMinusOne => log_2cosh(*t),
        };
        match g {
            Some(g) => log += g,
            None => return Ok(LogAmplitude::Zero),
        }
    }
    Ok(LogAmplitude::Finite(log))
}

/// d log Psi / d(a, b, W) in `params()` order: a_i, b_j, then W_ij row-major.
pub fn rbm_log_derivatives(state: &RbmState, v: &SpinConfiguration) -> Result<Vec<C64>> {
    check_input(state.n_visible(), state.visible, v)?;
    let (n, m) = (state.n_visible(), state.n_hidden());
    let theta = state.effective_fields(v);
    let sigma: Vec<C64> = theta
        .iter()
        .map(|t| match state.hidden {
            Convention::ZeroOne => logistic(*t),
            Convention::PlusMinusOne => t.tanh(),
        })
        .collect();
    let mut out = Vec::with_capacity(n + m + n * m);
    out.extend((0..n).map(|i| C64::new(v.value(i), 0.0)));
    out.extend(sigma.iter().copied());
    for i in 0..n {
        let x = v.value(i);
        out.extend(sigma.iter().map(|s| s * x));
    }
    Ok(out)
}

impl NqsState for RbmState {
    fn n_visible(&self) -> usize {
        self.visible_bias.len()
    }

    fn visible_convention(&self) -> Convention {
        self.visible
    }

    fn log_amplitude(&self, v: &SpinConfiguration) -> Result<LogAmplitude> {
        rbm_log_amplitude(self, v)
    }
}

impl Variational for RbmState {
    fn n_params(&self) -> usize {
        let (n, m) = (self.n_visible(), self.n_hidden());
        n + m + n * m
    }

    fn params(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.n_params());
        out.extend(self.visible_bias.iter().copied());
        out.extend(self.hidden_bias.iter().copied());
        for i in 0..self.n_visible() {
            out.extend(self.weights.row(i).iter().copied());
        }
        out
    }

    fn set_params(&mut self, params: &[C64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(NqsError::Shape { expected: self.n_params(), got: params.len() });
        }
        let (n, m) = (self.n_visible(), self.n_hidden());
        self.visible_bias.copy_from_slice(&params[..n]);
        self.hidden_bias.copy_from_slice(&params[n..n + m]);
        for i in 0..n {
            for j in 0..m {
                self.weights[(i, j)] = params[n + m + i * m + j];
            }
        }
        Ok(())
    }

    fn log_derivatives(&self, v: &SpinConfiguration) -> Result<Vec<C64>> {
        rbm_log_derivatives(self, v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bm::testutil::rc;
    use crate::spin::all_configurations;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{LN_2, PI};

    fn zo(bits: &[u8]) -> SpinConfiguration {
        SpinConfiguration::new(bits.to_vec(), Convention::ZeroOne)
    }

    /// sum over hidden assignments of exp(-E(h, v)), enumerated directly
    fn enumerate(state: &RbmState, v: &SpinConfiguration) -> C64 {
        let m = state.n_hidden();
        let hv = state.hidden.values();
        let mut total = C64::new(0.0, 0.0);
        for mask in 0..1usize << m {
            let h: Vec<f64> = (0..m).map(|j| hv[(mask >> j) & 1]).collect();
            let mut neg_e = C64::new(0.0, 0.0);
            for i in 0..v.len() {
                neg_e += state.visible_bias[i] * v.value(i);
                for j in 0..m {
                    neg_e += state.weights[(i, j)] * v.value(i) * h[j];
                }
            }
            for j in 0..m {
                neg_e += state.hidden_bias[j] * h[j];
            }
            total += neg_e.exp();
        }
        total
    }

    #[test]
    fn zero_parameters_give_log_two() {
        let s = RbmState::zeros(1, 1);
        for b in [0u8, 1] {
            let l = rbm_log_amplitude(&s, &zo(&[b])).unwrap().log().unwrap();
            assert!((l - C64::new(LN_2, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn i_pi_weight_pins_zero() {
        let mut s = RbmState::zeros(1, 1);
        s.weights[(0, 0)] = C64::new(0.0, PI);
        assert!(rbm_log_amplitude(&s, &zo(&[1])).unwrap().is_zero());
        assert!(!rbm_log_amplitude(&s, &zo(&[0])).unwrap().is_zero());
    }

    #[test]
    fn matches_hidden_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for hidden in [Convention::ZeroOne, Convention::PlusMinusOne] {
            let s = RbmState::random(3, 2, 1.0, &mut rng).with_conventions(Convention::ZeroOne, hidden);
            for v in all_configurations(3, Convention::ZeroOne) {
                let want = enumerate(&s, &v);
                let got = rbm_log_amplitude(&s, &v).unwrap().amplitude();
                assert!((got - want).norm() <= 1e-12 * want.norm());
            }
        }
    }

    #[test]
    fn derivative_closed_forms() {
        let s = RbmState::zeros(3, 4);
        let d = rbm_log_derivatives(&s, &zo(&[1, 0, 1])).unwrap();
        for j in 0..4 {
            assert_eq!(d[3 + j], C64::new(0.5, 0.0));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = RbmState::random(3, 2, 1.0, &mut rng);
        let v = zo(&[1, 1, 0]);
        let d = rbm_log_derivatives(&r, &v).unwrap();
        for i in 0..3 {
            assert_eq!(d[i], C64::new(v.value(i), 0.0));
        }
    }

    /// central finite difference of log Psi in the holomorphic direction
    fn finite_difference(state: &RbmState, v: &SpinConfiguration, k: usize) -> C64 {
        let h = 1e-6;
        let base = state.params();
        let eval = |delta: C64| {
            let mut p = base.clone();
            p[k] += delta;
            let mut s = state.clone();
            s.set_params(&p).unwrap();
            rbm_log_amplitude(&s, v).unwrap().log().unwrap()
        };
        (eval(C64::new(h, 0.0)) - eval(C64::new(-h, 0.0))) / (2.0 * h)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for hidden in [Convention::ZeroOne, Convention::PlusMinusOne] {
            let s = RbmState::random(3, 2, 0.5, &mut rng).with_conventions(Convention::ZeroOne, hidden);
            let v = zo(&[1, 0, 1]);
            let d = rbm_log_derivatives(&s, &v).unwrap();
            for k in 0..s.n_params() {
                let fd = finite_difference(&s, &v, k);
                assert!((fd - d[k]).norm() <= 1e-6 * d[k].norm().max(1e-3), "param {k}: {fd} vs {}", d[k]);
            }
        }
    }

    #[test]
    fn hidden_convention_map_preserves_amplitudes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = RbmState::random(3, 3, 0.7, &mut rng).with_conventions(Convention::ZeroOne, Convention::PlusMinusOne);
        let (t, log_c) = s.with_hidden_convention(Convention::ZeroOne);
        let (back, log_c2) = t.with_hidden_convention(Convention::PlusMinusOne);
        for v in all_configurations(3, Convention::ZeroOne) {
            let a = rbm_log_amplitude(&s, &v).unwrap().amplitude();
            let b = rbm_log_amplitude(&t, &v).unwrap().amplitude() * log_c.exp();
            let c = rbm_log_amplitude(&back, &v).unwrap().amplitude() * (log_c + log_c2).exp();
            assert!((a - b).norm() < 1e-12 * a.norm());
            assert!((a - c).norm() < 1e-12 * a.norm());
        }
    }

    #[test]
    fn visible_convention_map_preserves_amplitudes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = RbmState::random(3, 2, 0.7, &mut rng);
        let (t, log_c) = s.with_visible_convention(Convention::PlusMinusOne);
        for v in all_configurations(3, Convention::ZeroOne) {
            let a = rbm_log_amplitude(&s, &v).unwrap().amplitude();
            let b = rbm_log_amplitude(&t, &v.clone().with_convention(Convention::PlusMinusOne))
                .unwrap()
                .amplitude()
                * log_c.exp();
            assert!((a - b).norm() < 1e-12 * a.norm());
        }
    }

    #[test]
    fn shape_and_convention_errors() {
        let s = RbmState::zeros(2, 1);
        assert!(matches!(rbm_log_amplitude(&s, &zo(&[0])), Err(NqsError::Shape { .. })));
        let pm = SpinConfiguration::new(vec![0, 1], Convention::PlusMinusOne);
        assert!(matches!(rbm_log_amplitude(&s, &pm), Err(NqsError::ConventionMismatch { .. })));
    }

    #[test]
    fn parameter_map_round_trip_and_bipartite_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = RbmState::random(2, 3, 1.0, &mut rng);
        assert_eq!(RbmState::from_parameters(&s.to_parameters()).unwrap(), s);
        let mut p = s.to_parameters();
        p.add_weight(VertexId::hidden(0), VertexId::hidden(1), rc(&mut rng, 1.0)).unwrap();
        assert!(RbmState::from_parameters(&p).is_err());
    }

    #[test]
    fn local_rbm_respects_window() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = RbmState::random_local(6, 2, 2, 1.0, &mut rng).unwrap();
        assert_eq!(s.n_hidden(), 10);
        for j in 0..s.n_hidden() {
            let c = s.connections(j);
            assert_eq!(c.len(), 2);
            assert_eq!(c[1], c[0] + 1);
        }
        assert!(RbmState::random_local(3, 4, 1, 1.0, &mut rng).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn disjoint_union_multiplies(seed in 0u64..10_000, va in 0usize..4, vb in 0usize..8) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = RbmState::random(2, 2, 1.0, &mut rng);
                let b = RbmState::random(3, 1, 1.0, &mut rng);
                let u = RbmState::disjoint_union(&a, &b).unwrap();
                let xa = SpinConfiguration::from_index(va, 2, Convention::ZeroOne);
                let xb = SpinConfiguration::from_index(vb, 3, Convention::ZeroOne);
                let xu = SpinConfiguration::from_index((va << 3) | vb, 5, Convention::ZeroOne);
                let lhs = rbm_log_amplitude(&u, &xu).unwrap().amplitude();
                let rhs = rbm_log_amplitude(&a, &xa).unwrap().amplitude() * rbm_log_amplitude(&b, &xb).unwrap().amplitude();
                prop_assert!((lhs - rhs).norm() <= 1e-12 * rhs.norm());
            }
        }
    }
}
