//! Spin-chain Hamiltonians as weighted Pauli strings, and the local-energy
//! estimator used by variational Monte Carlo.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{NqsError, Result};
use crate::spin::SpinConfiguration;
use crate::state::{NqsState, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// coefficient * (product of single-site Paulis), sites strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: C64,
    pub ops: Vec<(usize, Pauli)>,
}

impl PauliTerm {
    pub fn new(coeff: f64, ops: &[(usize, Pauli)]) -> Self {
        let mut ops = ops.to_vec();
        ops.sort();
        Self { coeff: C64::new(coeff, 0.0), ops }
    }

    /// Bit mask of the sites an X or Y flips.
    pub fn flip_mask(&self) -> u64 {
        self.ops
            .iter()
            .filter(|(_, p)| *p != Pauli::Z)
            .fold(0, |m, (s, _)| m | (1u64 << s))
    }

    /// <v|T|v'> where v' is v with the flip mask applied.
    pub fn element(&self, v: &SpinConfiguration) -> C64 {
        let mut out = self.coeff;
        for &(site, op) in &self.ops {
            let z = v.z(site);
            match op {
                Pauli::X => {}
                Pauli::Y => out *= C64::new(0.0, -z),
                Pauli::Z => out *= z,
            }
        }
        out
    }
}

/// A Hermitian sum of Pauli strings on a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliStringHamiltonian {
    n_sites: usize,
    boundary: Boundary,
    terms: Vec<PauliTerm>,
}

impl PauliStringHamiltonian {
    /// Merges repeated strings and checks that the sum is Hermitian (every
    /// merged coefficient real, since Pauli strings are self-adjoint).
    pub fn new(n_sites: usize, boundary: Boundary, terms: Vec<PauliTerm>) -> Result<Self> {
        if n_sites > 64 {
            return Err(NqsError::Capacity { what: "sites".into(), value: n_sites, limit: 64 });
        }
        let mut merged: BTreeMap<Vec<(usize, Pauli)>, C64> = BTreeMap::new();
        for mut t in terms {
            t.ops.sort();
            if t.ops.iter().any(|(s, _)| *s >= n_sites) {
                return Err(NqsError::Domain(format!("term acts outside {n_sites} sites")));
            }
            if t.ops.windows(2).any(|w| w[0].0 == w[1].0) {
                return Err(NqsError::Domain("term repeats a site".into()));
            }
            *merged.entry(t.ops).or_default() += t.coeff;
        }
        let mut out = Vec::with_capacity(merged.len());
        for (ops, coeff) in merged {
            if coeff.im.abs() > 1e-14 * coeff.norm().max(1.0) {
                return Err(NqsError::Domain(format!("non-Hermitian term {ops:?} with coefficient {coeff}")));
            }
            if coeff.re != 0.0 {
                out.push(PauliTerm { coeff: C64::new(coeff.re, 0.0), ops });
            }
        }
        Ok(Self { n_sites, boundary, terms: out })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// Nonzero off-row entries <v|H|v'> grouped by flip mask, ascending.
    pub fn row(&self, v: &SpinConfiguration) -> Vec<(u64, C64)> {
        let mut acc: BTreeMap<u64, C64> = BTreeMap::new();
        for t in &self.terms {
            *acc.entry(t.flip_mask()).or_default() += t.element(v);
        }
        acc.into_iter().filter(|(_, e)| e.norm() != 0.0).collect()
    }

    /// Whether every off-diagonal entry preserves total Z magnetization.
    pub fn conserves_magnetization(&self) -> bool {
        let mut by_mask: BTreeMap<u64, Vec<&PauliTerm>> = BTreeMap::new();
        for t in &self.terms {
            by_mask.entry(t.flip_mask()).or_default().push(t);
        }
        by_mask.iter().filter(|(m, _)| **m != 0).all(|(&mask, group)| {
            let mut sites: Vec<usize> = group.iter().flat_map(|t| t.ops.iter().map(|(s, _)| *s)).collect();
            sites.sort_unstable();
            sites.dedup();
            (0..1usize << sites.len()).all(|assign| {
                let mut v = SpinConfiguration::zeros(self.n_sites, crate::spin::Convention::ZeroOne);
                for (k, &s) in sites.iter().enumerate() {
                    if assign >> k & 1 == 1 {
                        v.flip(s);
                    }
                }
                let element: C64 = group.iter().map(|t| t.element(&v)).sum();
                let before = v.magnetization();
                for s in 0..self.n_sites {
                    if mask >> s & 1 == 1 {
                        v.flip(s);
                    }
                }
                element.norm() < 1e-14 || v.magnetization() == before
            })
        })
    }
}

fn bonds(n: usize, boundary: Boundary, distance: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for i in 0..n {
        let j = i + distance;
        let pair = match boundary {
            Boundary::Open if j < n => (i, j),
            Boundary::Open => continue,
            Boundary::Periodic => {
                let j = j % n;
                if i == j {
                    continue;
                }
                (i.min(j), i.max(j))
            }
        };
        if !out.contains(&pair) {
            out.push(pair);
        }
    }
    out
}

fn check_chain(n: usize) -> Result<()> {
    if n < 2 {
        return Err(NqsError::Domain(format!("chain needs at least 2 sites, got {n}")));
    }
    Ok(())
}

/// -J sum_<ij> Z_i Z_j - B sum_i X_i.
pub fn build_tfim(n: usize, j: f64, b: f64, boundary: Boundary) -> Result<PauliStringHamiltonian> {
    check_chain(n)?;
    let mut terms = Vec::new();
    for (p, q) in bonds(n, boundary, 1) {
        terms.push(PauliTerm::new(-j, &[(p, Pauli::Z), (q, Pauli::Z)]));
    }
    for i in 0..n {
        terms.push(PauliTerm::new(-b, &[(i, Pauli::X)]));
    }
    PauliStringHamiltonian::new(n, boundary, terms)
}

fn heisenberg_bond(terms: &mut Vec<PauliTerm>, coupling: f64, p: usize, q: usize) {
    // S = sigma / 2
    for op in [Pauli::X, Pauli::Y, Pauli::Z] {
        terms.push(PauliTerm::new(coupling / 4.0, &[(p, op), (q, op)]));
    }
}

/// J sum_<ij> S_i . S_j with S = sigma/2.
pub fn build_afh(n: usize, j: f64, boundary: Boundary) -> Result<PauliStringHamiltonian> {
    check_chain(n)?;
    if j <= 0.0 {
        return Err(NqsError::Domain(format!("antiferromagnetic coupling must be positive, got {j}")));
    }
    build_j1j2(n, j, 0.0, boundary)
}

/// J1 sum over nearest and J2 sum over next-nearest neighbours of S_i . S_j.
pub fn build_j1j2(n: usize, j1: f64, j2: f64, boundary: Boundary) -> Result<PauliStringHamiltonian> {
    check_chain(n)?;
    let mut terms = Vec::new();
    if j1 != 0.0 {
        for (p, q) in bonds(n, boundary, 1) {
            heisenberg_bond(&mut terms, j1, p, q);
        }
    }
    if j2 != 0.0 {
        for (p, q) in bonds(n, boundary, 2) {
            heisenberg_bond(&mut terms, j2, p, q);
        }
    }
    PauliStringHamiltonian::new(n, boundary, terms)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Tfim,
    Afh,
    J1j2,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Couplings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j2: Option<f64>,
}

/// Hamiltonian section of an experiment config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    pub model: ModelKind,
    pub n: usize,
    #[serde(default)]
    pub couplings: Couplings,
    #[serde(default)]
    pub boundary: Boundary,
}

impl HamiltonianSpec {
    pub fn build(&self) -> Result<PauliStringHamiltonian> {
        let need = |x: Option<f64>, name: &str| {
            x.ok_or_else(|| NqsError::Config(format!("hamiltonian.couplings.{name} is required for {:?}", self.model)))
        };
        let c = &self.couplings;
        match self.model {
            ModelKind::Tfim => build_tfim(self.n, need(c.j, "j")?, need(c.b, "b")?, self.boundary),
            ModelKind::Afh => build_afh(self.n, need(c.j, "j")?, self.boundary),
            ModelKind::J1j2 => build_j1j2(self.n, need(c.j1, "j1")?, need(c.j2, "j2")?, self.boundary),
        }
    }
}

/// E_loc(v) = sum_v' <v|H|v'> Psi(v') / Psi(v).
pub fn local_energy<S: NqsState + ?Sized>(
    h: &PauliStringHamiltonian,
    psi: &S,
    v: &SpinConfiguration,
) -> Result<C64> {
    if v.len() != h.n_sites() {
        return Err(NqsError::Shape { expected: h.n_sites(), got: v.len() });
    }
    let base = psi.log_amplitude(v)?;
    if base.is_zero() {
        return Err(NqsError::ZeroAmplitude(v.to_string()));
    }
    let mut total = C64::new(0.0, 0.0);
    for (mask, element) in h.row(v) {
        if mask == 0 {
            total += element;
            continue;
        }
        let mut w = v.clone();
        for s in 0..v.len() {
            if mask >> s & 1 == 1 {
                w.flip(s);
            }
        }
        let ratio = psi.log_amplitude(&w)?.ratio_to(base).expect("base amplitude is nonzero");
        total += element * ratio;
    }
    Ok(total)
}
