//! Brute-force references: dense state vectors, exact ground states,
//! fidelity and KL divergence.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{NqsError, Result};
use crate::hamiltonian::{Pauli, PauliStringHamiltonian};
use crate::linalg::{hermitian_eigh, kron_all};
use crate::spin::SpinConfiguration;
use crate::state::{NqsState, C64};

/// Largest system materialized or diagonalized.
pub const MAX_SITES: usize = 14;
/// Largest system assembled as a dense matrix; larger ones use Lanczos.
pub const MAX_DENSE_SITES: usize = 10;

/// Amplitudes over all 2^n basis states, big-endian index order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseState {
    amplitudes: DVector<C64>,
    n_sites: usize,
}

impl DenseState {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(NqsError::Domain(format!("length {len} is not a power of two")));
        }
        if amplitudes.iter().any(|z| !z.is_finite()) {
            return Err(NqsError::Domain("non-finite amplitude".into()));
        }
        Ok(Self { amplitudes, n_sites: len.trailing_zeros() as usize })
    }

    pub fn basis(n_sites: usize, index: usize) -> Self {
        let mut a = DVector::zeros(1 << n_sites);
        a[index] = C64::new(1.0, 0.0);
        Self { amplitudes: a, n_sites }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.norm_squared()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.amplitudes.norm();
        if n == 0.0 {
            return Err(NqsError::Domain("cannot normalize a zero vector".into()));
        }
        Ok(Self { amplitudes: &self.amplitudes / C64::new(n, 0.0), n_sites: self.n_sites })
    }

    /// Probabilities |a_i|^2 / sum |a|^2.
    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.norm_sqr();
        self.amplitudes.iter().map(|a| a.norm_sqr() / total).collect()
    }

    /// Writes `index,re,im` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "re", "im"])?;
        for (i, a) in self.amplitudes.iter().enumerate() {
            w.write_record([i.to_string(), format!("{:.17e}", a.re), format!("{:.17e}", a.im)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates the state on every basis configuration.
pub fn materialize<S: NqsState + ?Sized>(psi: &S, n: usize) -> Result<DenseState> {
    if n > MAX_SITES {
        return Err(NqsError::Capacity { what: "sites".into(), value: n, limit: MAX_SITES });
    }
    if psi.n_visible() != n {
        return Err(NqsError::Shape { expected: psi.n_visible(), got: n });
    }
    let conv = psi.visible_convention();
    let mut amps = DVector::zeros(1 << n);
    for (idx, a) in amps.iter_mut().enumerate() {
        *a = psi.amplitude(&SpinConfiguration::from_index(idx, n, conv))?;
    }
    DenseState::new(amps)
}

fn pauli_matrix(p: Option<Pauli>) -> DMatrix<C64> {
    let c = |re: f64, im: f64| C64::new(re, im);
    match p {
        None => DMatrix::identity(2, 2),
        Some(Pauli::X) => DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
        Some(Pauli::Y) => DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
        Some(Pauli::Z) => DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
    }
}

/// Dense matrix assembled from Kronecker products of 2x2 Pauli matrices.
pub fn dense_hamiltonian(h: &PauliStringHamiltonian) -> Result<DMatrix<C64>> {
    let n = h.n_sites();
    if n > MAX_DENSE_SITES {
        return Err(NqsError::Capacity { what: "sites (dense)".into(), value: n, limit: MAX_DENSE_SITES });
    }
    let mut m = DMatrix::zeros(1 << n, 1 << n);
    for term in h.terms() {
        let factors: Vec<DMatrix<C64>> = (0..n)
            .map(|s| pauli_matrix(term.ops.iter().find(|(site, _)| *site == s).map(|(_, p)| *p)))
            .collect();
        m += kron_all(&factors) * term.coeff;
    }
    Ok(m)
}

/// Compressed sparse rows of H built from the Pauli-string action.
struct SparseHamiltonian {
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseHamiltonian {
    fn new(h: &PauliStringHamiltonian) -> Self {
        let n = h.n_sites();
        let conv = crate::spin::Convention::ZeroOne;
        let rows = (0..1usize << n)
            .map(|idx| {
                let v = SpinConfiguration::from_index(idx, n, conv);
                h.row(&v)
                    .into_iter()
                    .map(|(mask, e)| {
                        let flip = (0..n).filter(|s| mask >> s & 1 == 1).fold(0usize, |f, s| f | 1 << (n - 1 - s));
                        (idx ^ flip, e)
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    fn apply(&self, x: &DVector<C64>) -> DVector<C64> {
        DVector::from_iterator(
            x.len(),
            self.rows.iter().map(|row| row.iter().map(|(c, e)| e * x[*c]).sum::<C64>()),
        )
    }
}

/// Lowest eigenpair by Lanczos with full reorthogonalization.
fn lanczos_ground(h: &SparseHamiltonian, dim: usize) -> Result<(f64, DVector<C64>)> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut q = DVector::from_fn(dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    q /= C64::new(q.norm(), 0.0);
    let mut basis: Vec<DVector<C64>> = vec![q];
    let (mut alpha, mut beta): (Vec<f64>, Vec<f64>) = (Vec::new(), Vec::new());
    let mut last = f64::INFINITY;
    let max_iter = dim.min(400);
    for k in 0..max_iter {
        let mut w = h.apply(&basis[k]);
        let a = basis[k].dotc(&w).re;
        alpha.push(a);
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&w);
                w -= b * proj;
            }
        }
        let t = tridiagonal(&alpha, &beta);
        let eig = t.symmetric_eigen();
        let (imin, emin) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, e)| (i, *e))
            .expect("nonempty");
        let bnorm = w.norm();
        let converged = (emin - last).abs() < 1e-13 * emin.abs().max(1.0);
        if converged || bnorm < 1e-12 || k + 1 == max_iter {
            let coeffs = eig.eigenvectors.column(imin);
            let mut vec = DVector::zeros(dim);
            for (b, c) in basis.iter().zip(coeffs.iter()) {
                vec += b * C64::new(*c, 0.0);
            }
            let vec = &vec / C64::new(vec.norm(), 0.0);
            return Ok((emin, vec));
        }
        last = emin;
        beta.push(bnorm);
        basis.push(w / C64::new(bnorm, 0.0));
    }
    Err(NqsError::Internal("Lanczos did not run".into()))
}

fn tridiagonal(alpha: &[f64], beta: &[f64]) -> DMatrix<f64> {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    t
}

/// Lowest eigenpair. Dense diagonalization up to [`MAX_DENSE_SITES`],
/// Lanczos on the sparse Pauli action beyond.
pub fn ground_state_exact(h: &PauliStringHamiltonian) -> Result<(f64, DenseState)> {
    let n = h.n_sites();
    if n > MAX_SITES {
        return Err(NqsError::Capacity { what: "sites".into(), value: n, limit: MAX_SITES });
    }
    if n <= MAX_DENSE_SITES {
        let m = dense_hamiltonian(h)?;
        let (vals, vecs) = hermitian_eigh(&m)?;
        let ground = vecs.column(0).into_owned();
        return Ok((vals[0], DenseState::new(ground)?));
    }
    let (e, v) = lanczos_ground(&SparseHamiltonian::new(h), 1 << n)?;
    Ok((e, DenseState::new(v)?))
}

/// <psi|H|psi> / <psi|psi> using the dense matrix (or sparse action beyond the dense limit).
pub fn rayleigh_quotient(h: &PauliStringHamiltonian, psi: &DenseState) -> Result<f64> {
    if psi.n_sites() != h.n_sites() {
        return Err(NqsError::Shape { expected: h.n_sites(), got: psi.n_sites() });
    }
    let a = psi.amplitudes();
    let ha = if h.n_sites() <= MAX_DENSE_SITES {
        dense_hamiltonian(h)? * a
    } else {
        SparseHamiltonian::new(h).apply(a)
    };
    Ok((a.dotc(&ha) / a.dotc(a)).re)
}

/// |<a|b>|^2 / (<a|a><b|b>).
pub fn fidelity(a: &DenseState, b: &DenseState) -> Result<f64> {
    if a.n_sites() != b.n_sites() {
        return Err(NqsError::Shape { expected: a.n_sites(), got: b.n_sites() });
    }
    let (x, y) = (a.amplitudes(), b.amplitudes());
    let denom = x.norm_squared() * y.norm_squared();
    if denom == 0.0 {
        return Err(NqsError::Domain("fidelity with a zero vector".into()));
    }
    Ok((x.dotc(y).norm_sqr() / denom).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KlDivergence {
    Finite(f64),
    /// p has support where q vanishes.
    Infinite,
}

impl KlDivergence {
    pub fn value(self) -> f64 {
        match self {
            KlDivergence::Finite(x) => x,
            KlDivergence::Infinite => f64::INFINITY,
        }
    }
}

fn check_distribution(p: &[f64], name: &str) -> Result<()> {
    if p.iter().any(|x| *x < 0.0 || !x.is_finite()) {
        return Err(NqsError::Domain(format!("{name} has negative or non-finite entries")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(NqsError::Domain(format!("{name} sums to {s}, not 1")));
    }
    Ok(())
}

/// sum_i p_i log(p_i / q_i).
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<KlDivergence> {
    if p.len() != q.len() {
        return Err(NqsError::Shape { expected: p.len(), got: q.len() });
    }
    check_distribution(p, "p")?;
    check_distribution(q, "q")?;
    let mut total = 0.0;
    for (&pi, &qi) in p.iter().zip(q) {
        if pi == 0.0 {
            continue;
        }
        if qi == 0.0 {
            return Ok(KlDivergence::Infinite);
        }
        total += pi * (pi / qi).ln();
    }
    Ok(KlDivergence::Finite(total.max(0.0)))
}
