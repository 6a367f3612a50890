//! Renyi and von Neumann entanglement entropies of materialized states and
//! the crossing-count bound for RBM states.

use std::io::Write;

use nalgebra::DMatrix;

use crate::bm::RbmState;
use crate::error::{NqsError, Result};
use crate::exact::{materialize, DenseState};
use crate::linalg::hermitian_eigenvalues;
use crate::state::{NqsState, C64};

pub const MAX_REGION: usize = 10;
/// Eigenvalues below this are treated as exact zeros.
pub const EIGEN_FLOOR: f64 = 1e-14;

/// Region A of an n-site system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    region_a: Vec<usize>,
    n_sites: usize,
}

impl Bipartition {
    pub fn new(n_sites: usize, region_a: &[usize]) -> Result<Self> {
        let mut a = region_a.to_vec();
        a.sort_unstable();
        a.dedup();
        if a.is_empty() || a.len() >= n_sites {
            return Err(NqsError::Domain(format!("region A must be a nonempty proper subset of {n_sites} sites")));
        }
        if let Some(s) = a.iter().find(|&&s| s >= n_sites) {
            return Err(NqsError::Domain(format!("site {s} outside {n_sites} sites")));
        }
        Ok(Self { region_a: a, n_sites })
    }

    /// A = {0, ..., k-1}.
    pub fn left(n_sites: usize, k: usize) -> Result<Self> {
        Self::new(n_sites, &(0..k).collect::<Vec<_>>())
    }

    pub fn region_a(&self) -> &[usize] {
        &self.region_a
    }

    pub fn complement(&self) -> Vec<usize> {
        (0..self.n_sites).filter(|s| !self.region_a.contains(s)).collect()
    }

    pub fn flipped(&self) -> Self {
        Self { region_a: self.complement(), n_sites: self.n_sites }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn size_a(&self) -> usize {
        self.region_a.len()
    }

    /// Hidden units with connections on both sides of the cut.
    pub fn crossings(&self, rbm: &RbmState) -> usize {
        (0..rbm.n_hidden())
            .filter(|&j| {
                let c = rbm.connections(j);
                c.iter().any(|s| self.region_a.contains(s)) && c.iter().any(|s| !self.region_a.contains(s))
            })
            .count()
    }

    /// e.g. "0;1;2"
    pub fn label(&self) -> String {
        self.region_a.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(";")
    }
}

/// Amplitudes arranged as a (2^|A|, 2^|B|) matrix.
fn split_matrix(state: &DenseState, cut: &Bipartition) -> Result<DMatrix<C64>> {
    let n = state.n_sites();
    if n != cut.n_sites {
        return Err(NqsError::Shape { expected: cut.n_sites, got: n });
    }
    let a = cut.region_a();
    let b = cut.complement();
    let psi = state.normalized()?;
    let amps = psi.amplitudes();
    let mut m = DMatrix::zeros(1 << a.len(), 1 << b.len());
    for idx in 0..amps.len() {
        let pick = |sites: &[usize]| sites.iter().fold(0usize, |acc, &s| (acc << 1) | ((idx >> (n - 1 - s)) & 1));
        m[(pick(a), pick(&b))] = amps[idx];
    }
    Ok(m)
}

/// rho_A = Tr_B |psi><psi| of the normalized state.
pub fn reduced_density(state: &DenseState, cut: &Bipartition) -> Result<DMatrix<C64>> {
    if cut.size_a() > MAX_REGION {
        return Err(NqsError::Capacity { what: "region size".into(), value: cut.size_a(), limit: MAX_REGION });
    }
    let m = split_matrix(state, cut)?;
    Ok(&m * m.adjoint())
}

fn spectrum(rho: &DMatrix<C64>) -> Result<Vec<f64>> {
    Ok(hermitian_eigenvalues(rho)?.into_iter().map(|x| if x < EIGEN_FLOOR { 0.0 } else { x }).collect())
}

/// S_alpha = log(Tr rho^alpha) / (1 - alpha); alpha = 1 gives von Neumann.
pub fn renyi_entropy(rho: &DMatrix<C64>, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(NqsError::Domain(format!("Renyi index must be positive and finite, got {alpha}")));
    }
    if alpha == 1.0 {
        return von_neumann_entropy(rho);
    }
    let p = spectrum(rho)?;
    let tr: f64 = p.iter().filter(|&&x| x > 0.0).map(|x| x.powf(alpha)).sum();
    Ok((tr.ln() / (1.0 - alpha)).max(0.0))
}

/// -Tr rho log rho.
pub fn von_neumann_entropy(rho: &DMatrix<C64>) -> Result<f64> {
    let p = spectrum(rho)?;
    Ok((-p.iter().filter(|&&x| x > 0.0).map(|x| x * x.ln()).sum::<f64>()).max(0.0))
}

/// Number of singular values of the split amplitude matrix above `tol`
/// times the largest.
pub fn schmidt_rank(state: &DenseState, cut: &Bipartition, tol: f64) -> Result<usize> {
    let m = split_matrix(state, cut)?;
    let sv = m.singular_values();
    let max = sv.max();
    Ok(sv.iter().filter(|&&s| s > tol * max).count())
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutReport {
    pub cut: String,
    pub size_a: usize,
    pub crossings: usize,
    pub s2: f64,
    /// crossings * ln 2
    pub bound: f64,
    pub von_neumann: f64,
}

/// S_2 and the bound (#crossing hidden units) ln 2 at each cut. A violated
/// bound is an error.
pub fn arealaw_probe(rbm: &RbmState, cuts: &[Bipartition]) -> Result<Vec<CutReport>> {
    let n = rbm.n_visible();
    let state = materialize(rbm, n)?;
    let mut out = Vec::with_capacity(cuts.len());
    for cut in cuts {
        // the smaller side keeps the reduced matrix small
        let side = if cut.size_a() <= n - cut.size_a() { cut.clone() } else { cut.flipped() };
        let rho = reduced_density(&state, &side)?;
        let s2 = renyi_entropy(&rho, 2.0)?;
        let von_neumann = von_neumann_entropy(&rho)?;
        let crossings = cut.crossings(rbm);
        let bound = crossings as f64 * std::f64::consts::LN_2;
        if s2 > bound + 1e-10 {
            return Err(NqsError::Internal(format!("S2 = {s2} exceeds crossing bound {bound} at cut {}", cut.label())));
        }
        out.push(CutReport { cut: cut.label(), size_a: cut.size_a(), crossings, s2, bound, von_neumann });
    }
    Ok(out)
}

/// CSV with columns cut, a_size, crossings, s2, bound, vn.
pub fn write_report_csv<W: Write>(rows: &[CutReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cut", "a_size", "crossings", "s2", "bound", "vn"])?;
    for r in rows {
        w.write_record([
            r.cut.clone(),
            r.size_a.to_string(),
            r.crossings.to_string(),
            format!("{:.12e}", r.s2),
            format!("{:.12e}", r.bound),
            format!("{:.12e}", r.von_neumann),
        ])?;
    }
    w.flush()?;
    Ok(())
}
