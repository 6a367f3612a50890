use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{NqsError, Result};
use crate::linalg::hermitian_eigenvalues;
use crate::state::C64;

/// Cap on visible plus environment units (exact partition function).
pub const MAX_PURIFIED_UNITS: usize = 14;

/// Real-parameter RBM over visible v, hidden h and environment e units,
/// all {0,1}. Environment units connect to visible units only.
#[derive(Debug, Clone, PartialEq)]
pub struct PurificationNet {
    pub visible_bias: Vec<f64>,
    pub hidden_bias: Vec<f64>,
    pub env_bias: Vec<f64>,
    /// (n_visible, n_hidden)
    pub hidden_weights: DMatrix<f64>,
    /// (n_visible, n_env)
    pub env_weights: DMatrix<f64>,
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl PurificationNet {
    pub fn zeros(n: usize, m: usize, l: usize) -> Self {
        Self {
            visible_bias: vec![0.0; n],
            hidden_bias: vec![0.0; m],
            env_bias: vec![0.0; l],
            hidden_weights: DMatrix::zeros(n, m),
            env_weights: DMatrix::zeros(n, l),
        }
    }

    pub fn random<R: Rng>(n: usize, m: usize, l: usize, scale: f64, rng: &mut R) -> Self {
        let mut s = Self::zeros(n, m, l);
        let p: Vec<f64> = (0..s.n_params()).map(|_| rng.gen_range(-scale..=scale)).collect();
        s.set_params(&p).expect("length matches");
        s
    }

    pub fn n_params(&self) -> usize {
        let (n, m, l) = (self.visible_bias.len(), self.hidden_bias.len(), self.env_bias.len());
        n + m + l + n * m + n * l
    }

    /// Parameters in the order a, b, c, W (row-major), U (row-major).
    pub fn params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        out.extend(&self.visible_bias);
        out.extend(&self.hidden_bias);
        out.extend(&self.env_bias);
        for i in 0..self.hidden_weights.nrows() {
            out.extend(self.hidden_weights.row(i).iter());
        }
        for i in 0..self.env_weights.nrows() {
            out.extend(self.env_weights.row(i).iter());
        }
        out
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.n_params() {
            return Err(NqsError::Shape { expected: self.n_params(), got: p.len() });
        }
        let (n, m, l) = (self.visible_bias.len(), self.hidden_bias.len(), self.env_bias.len());
        let mut it = p.iter().copied();
        self.visible_bias.iter_mut().for_each(|x| *x = it.next().unwrap());
        self.hidden_bias.iter_mut().for_each(|x| *x = it.next().unwrap());
        self.env_bias.iter_mut().for_each(|x| *x = it.next().unwrap());
        for i in 0..n {
            for j in 0..m {
                self.hidden_weights[(i, j)] = it.next().unwrap();
            }
        }
        for i in 0..n {
            for k in 0..l {
                self.env_weights[(i, k)] = it.next().unwrap();
            }
        }
        Ok(())
    }

    /// log sum_h exp(-E(v, h, e)).
    pub fn log_p(&self, v: &[u8], e: &[u8]) -> f64 {
        let mut out = 0.0;
        for (i, &vi) in v.iter().enumerate() {
            if vi == 1 {
                out += self.visible_bias[i];
                for (k, &ek) in e.iter().enumerate() {
                    if ek == 1 {
                        out += self.env_weights[(i, k)];
                    }
                }
            }
        }
        for (k, &ek) in e.iter().enumerate() {
            if ek == 1 {
                out += self.env_bias[k];
            }
        }
        for j in 0..self.hidden_bias.len() {
            let mut theta = self.hidden_bias[j];
            for (i, &vi) in v.iter().enumerate() {
                if vi == 1 {
                    theta += self.hidden_weights[(i, j)];
                }
            }
            out += softplus(theta);
        }
        out
    }

    /// d log p / d params, in `params()` order.
    pub fn log_p_derivatives(&self, v: &[u8], e: &[u8]) -> Vec<f64> {
        let (n, m, l) = (self.visible_bias.len(), self.hidden_bias.len(), self.env_bias.len());
        let mut out = Vec::with_capacity(self.n_params());
        out.extend(v.iter().map(|&x| x as f64));
        let sig: Vec<f64> = (0..m)
            .map(|j| {
                let theta = self.hidden_bias[j] + (0..n).filter(|&i| v[i] == 1).map(|i| self.hidden_weights[(i, j)]).sum::<f64>();
                sigmoid(theta)
            })
            .collect();
        out.extend(&sig);
        out.extend(e.iter().map(|&x| x as f64));
        for i in 0..n {
            out.extend(sig.iter().map(|s| v[i] as f64 * s));
        }
        for i in 0..n {
            out.extend((0..l).map(|k| (v[i] * e[k]) as f64));
        }
        out
    }
}

/// Purified state Psi(v, e) = sqrt(p1(v, e) / Z1) exp(i log p2(v, e) / 2).
#[derive(Debug, Clone, PartialEq)]
pub struct PurifiedRbm {
    pub amplitude: PurificationNet,
    pub phase: PurificationNet,
}

fn bits(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|q| ((index >> (n - 1 - q)) & 1) as u8).collect()
}

impl PurifiedRbm {
    pub fn new(amplitude: PurificationNet, phase: PurificationNet) -> Result<Self> {
        let shape = |p: &PurificationNet| (p.visible_bias.len(), p.hidden_bias.len(), p.env_bias.len());
        let (a, b) = (shape(&amplitude), shape(&phase));
        if (a.0, a.2) != (b.0, b.2) {
            return Err(NqsError::Domain(format!("amplitude net {a:?} and phase net {b:?} disagree on (visible, env)")));
        }
        if a.0 + a.2 > MAX_PURIFIED_UNITS {
            return Err(NqsError::Capacity { what: "visible + environment units".into(), value: a.0 + a.2, limit: MAX_PURIFIED_UNITS });
        }
        if a.0 == 0 {
            return Err(NqsError::Domain("no visible units".into()));
        }
        Ok(Self { amplitude, phase })
    }

    pub fn zeros(n_visible: usize, n_hidden: usize, n_env: usize) -> Result<Self> {
        Self::new(PurificationNet::zeros(n_visible, n_hidden, n_env), PurificationNet::zeros(n_visible, n_hidden, n_env))
    }

    pub fn random<R: Rng>(n_visible: usize, n_hidden: usize, n_env: usize, scale: f64, rng: &mut R) -> Result<Self> {
        let a = PurificationNet::random(n_visible, n_hidden, n_env, scale, rng);
        let p = PurificationNet::random(n_visible, n_hidden, n_env, scale, rng);
        Self::new(a, p)
    }

    pub fn n_visible(&self) -> usize {
        self.amplitude.visible_bias.len()
    }

    pub fn n_env(&self) -> usize {
        self.amplitude.env_bias.len()
    }

    pub fn n_params(&self) -> usize {
        self.amplitude.n_params() + self.phase.n_params()
    }

    pub fn params(&self) -> Vec<f64> {
        let mut p = self.amplitude.params();
        p.extend(self.phase.params());
        p
    }

    pub fn set_params(&mut self, p: &[f64]) -> Result<()> {
        if p.len() != self.n_params() {
            return Err(NqsError::Shape { expected: self.n_params(), got: p.len() });
        }
        let k = self.amplitude.n_params();
        self.amplitude.set_params(&p[..k])?;
        self.phase.set_params(&p[k..])
    }

    /// Tables of log p1 and log p2, shape (2^n, 2^l).
    pub(crate) fn log_tables(&self) -> (DMatrix<f64>, DMatrix<f64>) {
        let (n, l) = (self.n_visible(), self.n_env());
        let mut p1 = DMatrix::zeros(1 << n, 1 << l);
        let mut p2 = DMatrix::zeros(1 << n, 1 << l);
        for vi in 0..1usize << n {
            let v = bits(vi, n);
            for ei in 0..1usize << l {
                let e = bits(ei, l);
                p1[(vi, ei)] = self.amplitude.log_p(&v, &e);
                p2[(vi, ei)] = self.phase.log_p(&v, &e);
            }
        }
        (p1, p2)
    }

    /// Psi(v, e) for every (v, e); rows are visible, columns environment.
    pub fn purified_matrix(&self) -> DMatrix<C64> {
        let (p1, p2) = self.log_tables();
        let max = p1.max();
        let log_z = max + p1.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
        DMatrix::from_fn(p1.nrows(), p1.ncols(), |r, c| {
            C64::from_polar((0.5 * (p1[(r, c)] - log_z)).exp(), 0.5 * p2[(r, c)])
        })
    }

    pub(crate) fn bits(index: usize, n: usize) -> Vec<u8> {
        bits(index, n)
    }
}

/// Psi_SE(v, e) for one pair of configurations (bits, site 0 first).
pub fn purified_amplitude(p: &PurifiedRbm, v: &[u8], e: &[u8]) -> Result<C64> {
    if v.len() != p.n_visible() {
        return Err(NqsError::Shape { expected: p.n_visible(), got: v.len() });
    }
    if e.len() != p.n_env() {
        return Err(NqsError::Shape { expected: p.n_env(), got: e.len() });
    }
    if v.iter().chain(e).any(|&b| b > 1) {
        return Err(NqsError::Domain("units take values 0 and 1".into()));
    }
    let (p1, _) = p.log_tables();
    let max = p1.max();
    let log_z = max + p1.iter().map(|x| (x - max).exp()).sum::<f64>().ln();
    let l1 = p.amplitude.log_p(v, e);
    let l2 = p.phase.log_p(v, e);
    Ok(C64::from_polar((0.5 * (l1 - log_z)).exp(), 0.5 * l2))
}

pub const MAX_DENSITY_SITES: usize = 10;

/// rho = Tr_E |Psi_SE><Psi_SE|, checked Hermitian, PSD and unit trace.
pub fn density_matrix(p: &PurifiedRbm) -> Result<DMatrix<C64>> {
    if p.n_visible() > MAX_DENSITY_SITES {
        return Err(NqsError::Capacity { what: "density matrix sites".into(), value: p.n_visible(), limit: MAX_DENSITY_SITES });
    }
    let psi = p.purified_matrix();
    let mut rho = &psi * psi.adjoint();
    let tr = rho.trace().re;
    rho /= C64::new(tr, 0.0);
    check_density(&rho)?;
    Ok(rho)
}

pub(crate) fn check_density(rho: &DMatrix<C64>) -> Result<()> {
    let herm = (rho - rho.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm > 1e-12 {
        return Err(NqsError::Internal(format!("density matrix not Hermitian (deviation {herm:e})")));
    }
    let tr = rho.trace();
    if (tr - C64::new(1.0, 0.0)).norm() > 1e-12 {
        return Err(NqsError::Internal(format!("density matrix trace {tr}")));
    }
    let min = hermitian_eigenvalues(rho)?.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-12 {
        return Err(NqsError::Internal(format!("density matrix has eigenvalue {min:e}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_params_constant_amplitude() {
        let p = PurifiedRbm::zeros(2, 3, 2).unwrap();
        let m = p.purified_matrix();
        for z in m.iter() {
            assert!((z - m[(0, 0)]).norm() < 1e-15);
        }
        // phase net at zero: log p2 = m ln 2, a global phase
        assert!((m[(0, 0)].arg() - 0.5 * 3.0 * std::f64::consts::LN_2).abs() < 1e-12);
        let rho = density_matrix(&p).unwrap();
        let purity = (&rho * &rho).trace().re;
        assert!((purity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn normalization_by_exhaustive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = PurifiedRbm::random(3, 2, 2, 0.8, &mut rng).unwrap();
        let mut total = 0.0;
        for vi in 0..8 {
            for ei in 0..4 {
                total += purified_amplitude(&p, &bits(vi, 3), &bits(ei, 2)).unwrap().norm_sqr();
            }
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_environment_is_pure() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = PurifiedRbm::random(3, 3, 0, 0.8, &mut rng).unwrap();
        let rho = density_matrix(&p).unwrap();
        assert!(((&rho * &rho).trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_density_is_valid_and_matches_partial_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let p = PurifiedRbm::random(3, 2, 2, 1.0, &mut rng).unwrap();
            let rho = density_matrix(&p).unwrap();
            // explicit partial trace over e of the materialized purification
            let mut want = DMatrix::<C64>::zeros(8, 8);
            for v in 0..8 {
                for w in 0..8 {
                    for e in 0..4 {
                        let a = purified_amplitude(&p, &bits(v, 3), &bits(e, 2)).unwrap();
                        let b = purified_amplitude(&p, &bits(w, 3), &bits(e, 2)).unwrap();
                        want[(v, w)] += a * b.conj();
                    }
                }
            }
            assert!((&rho - &want).iter().all(|z| z.norm() < 1e-10));
            let eig = hermitian_eigenvalues(&rho).unwrap();
            assert!(eig.iter().all(|&x| x >= -1e-12));
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let net = PurificationNet::random(3, 2, 2, 0.7, &mut rng);
        let (v, e) = ([1u8, 0, 1], [0u8, 1]);
        let d = net.log_p_derivatives(&v, &e);
        let p0 = net.params();
        for k in 0..p0.len() {
            let mut a = net.clone();
            let mut b = net.clone();
            let mut p = p0.clone();
            p[k] += 1e-6;
            a.set_params(&p).unwrap();
            p[k] -= 2e-6;
            b.set_params(&p).unwrap();
            let fd = (a.log_p(&v, &e) - b.log_p(&v, &e)) / 2e-6;
            assert!((fd - d[k]).abs() < 1e-7, "k={k}: {fd} vs {}", d[k]);
        }
    }

    #[test]
    fn shape_checks() {
        let a = PurificationNet::zeros(2, 1, 1);
        let b = PurificationNet::zeros(2, 3, 2);
        assert!(PurifiedRbm::new(a.clone(), b).is_err());
        assert!(PurifiedRbm::new(a.clone(), PurificationNet::zeros(2, 5, 1)).is_ok());
        assert!(matches!(PurifiedRbm::zeros(10, 1, 5), Err(NqsError::Capacity { .. })));
    }
}
