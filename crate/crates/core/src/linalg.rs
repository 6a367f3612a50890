//! Small dense linear-algebra helpers shared across modules.

use nalgebra::{DMatrix, DVector};

use crate::error::{NqsError, Result};
use crate::state::C64;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigh(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    check_hermitian(m, 1e-9)?;
    let n = m.nrows();
    let real = m.iter().all(|z| z.im == 0.0);
    let (vals, vecs): (Vec<f64>, DMatrix<C64>) = if real {
        let r = m.map(|z| z.re);
        let eig = r.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors.map(|x| C64::new(x, 0.0)))
    } else {
        let eig = m.clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    let sorted_vals = order.iter().map(|&i| vals[i]).collect();
    let sorted_vecs = DMatrix::from_fn(n, n, |r, c| vecs[(r, order[c])]);
    Ok((sorted_vals, sorted_vecs))
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Result<Vec<f64>> {
    check_hermitian(m, 1e-9)?;
    let mut vals: Vec<f64> = if m.iter().all(|z| z.im == 0.0) {
        m.map(|z| z.re).symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.clone().symmetric_eigenvalues().iter().copied().collect()
    };
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

pub fn check_hermitian(m: &DMatrix<C64>, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(NqsError::Internal(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let n = m.nrows();
    for r in 0..n {
        for c in r..n {
            if (m[(r, c)] - m[(c, r)].conj()).norm() > tol * scale {
                return Err(NqsError::Internal(format!("matrix not Hermitian at ({r}, {c})")));
            }
        }
    }
    Ok(())
}

/// Kronecker product of a list of square matrices, first factor most significant.
pub fn kron_all(factors: &[DMatrix<C64>]) -> DMatrix<C64> {
    factors
        .iter()
        .fold(DMatrix::from_element(1, 1, C64::new(1.0, 0.0)), |acc, f| acc.kronecker(f))
}

/// Trace norm distance (1/2) * sum |eigenvalues(a - b)| of two Hermitian matrices.
pub fn trace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<f64> {
    let d = a - b;
    Ok(0.5 * hermitian_eigenvalues(&d)?.iter().map(|x| x.abs()).sum::<f64>())
}

pub fn normalized(v: &DVector<C64>) -> DVector<C64> {
    let n = v.norm();
    v / C64::new(n, 0.0)
}
