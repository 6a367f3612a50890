//! Brute-force references written directly from the definitions, sharing
//! no code with the library beyond its public accessors.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use nqs::bm::{BmState, DbmState, RbmState};
use nqs::{Convention, C64};

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Bits of `index`, site 0 first (most significant).
pub fn bits(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((index >> (n - 1 - i)) & 1) as u8).collect()
}

pub fn value(conv: Convention, b: u8) -> f64 {
    match conv {
        Convention::ZeroOne => b as f64,
        Convention::PlusMinusOne => 1.0 - 2.0 * b as f64,
    }
}

fn values(conv: Convention, bs: &[u8]) -> Vec<f64> {
    bs.iter().map(|&b| value(conv, b)).collect()
}

/// sum_h exp(a.v + b.h + v^T W h), every hidden assignment enumerated.
pub fn rbm_amplitude(s: &RbmState, v: &[u8]) -> C64 {
    let (n, m) = (v.len(), s.n_hidden());
    let x = values(nqs::NqsState::visible_convention(s), v);
    let mut total = c(0.0, 0.0);
    for hi in 0..1usize << m {
        let h = values(s.hidden_convention(), &bits(hi, m));
        let mut e = c(0.0, 0.0);
        for i in 0..n {
            e += s.visible_bias()[i] * x[i];
        }
        for j in 0..m {
            e += s.hidden_bias()[j] * h[j];
            for i in 0..n {
                e += s.weights()[(i, j)] * (x[i] * h[j]);
            }
        }
        total += e.exp();
    }
    total
}

pub fn bm_amplitude(s: &BmState, v: &[u8]) -> C64 {
    let r = s.rbm();
    let (n, m) = (v.len(), r.n_hidden());
    let x = values(nqs::NqsState::visible_convention(r), v);
    let mut total = c(0.0, 0.0);
    for hi in 0..1usize << m {
        let h = values(r.hidden_convention(), &bits(hi, m));
        let mut e = c(0.0, 0.0);
        for i in 0..n {
            e += r.visible_bias()[i] * x[i];
            for k in i + 1..n {
                e += s.visible_couplings()[(i, k)] * (x[i] * x[k]);
            }
        }
        for j in 0..m {
            e += r.hidden_bias()[j] * h[j];
            for k in j + 1..m {
                e += s.hidden_couplings()[(j, k)] * (h[j] * h[k]);
            }
            for i in 0..n {
                e += r.weights()[(i, j)] * (x[i] * h[j]);
            }
        }
        total += e.exp();
    }
    total
}

pub fn dbm_amplitude(s: &DbmState, v: &[u8]) -> C64 {
    let r = s.shallow();
    let (n, m, q) = (v.len(), s.n_hidden_shallow(), s.n_hidden_deep());
    let x = values(nqs::NqsState::visible_convention(r), v);
    let mut total = c(0.0, 0.0);
    for hi in 0..1usize << m {
        let h = values(r.hidden_convention(), &bits(hi, m));
        for gi in 0..1usize << q {
            let g = values(r.hidden_convention(), &bits(gi, q));
            let mut e = c(0.0, 0.0);
            for i in 0..n {
                e += r.visible_bias()[i] * x[i];
            }
            for j in 0..m {
                e += r.hidden_bias()[j] * h[j];
                for i in 0..n {
                    e += r.weights()[(i, j)] * (x[i] * h[j]);
                }
                for k in 0..q {
                    e += s.deep_weights()[(j, k)] * (h[j] * g[k]);
                }
            }
            for k in 0..q {
                e += s.deep_bias()[k] * g[k];
            }
            total += e.exp();
        }
    }
    total
}

/// The hidden sum done one unit at a time:
/// exp(a.v) prod_j sum_{h_j} exp(h_j (b_j + sum_i W_ij v_i)).
pub fn rbm_amplitude_factorized(s: &RbmState, v: &[u8]) -> C64 {
    let x = values(nqs::NqsState::visible_convention(s), v);
    let mut out = (0..v.len()).map(|i| s.visible_bias()[i] * x[i]).sum::<C64>().exp();
    for j in 0..s.n_hidden() {
        let theta = s.hidden_bias()[j] + (0..v.len()).map(|i| s.weights()[(i, j)] * x[i]).sum::<C64>();
        out *= [0u8, 1].iter().map(|&b| (theta * value(s.hidden_convention(), b)).exp()).sum::<C64>();
    }
    out
}

pub fn rbm_vector(s: &RbmState) -> DVector<C64> {
    let n = nqs::NqsState::n_visible(s);
    if s.n_hidden() <= 8 {
        DVector::from_fn(1 << n, |i, _| rbm_amplitude(s, &bits(i, n)))
    } else {
        DVector::from_fn(1 << n, |i, _| rbm_amplitude_factorized(s, &bits(i, n)))
    }
}

pub enum Spin {
    Tfim { j: f64, b: f64 },
    J1J2 { j1: f64, j2: f64 },
}

fn bond_list(n: usize, periodic: bool, range: usize) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = (0..n.saturating_sub(range)).map(|i| (i, i + range)).collect();
    if periodic && n > 2 * range {
        out.extend((n - range..n).map(|i| (i, (i + range) % n)));
    }
    out
}

/// Dense real matrix in the z basis: -J ZZ - B X for the Ising chain,
/// sum J S.S with S = sigma/2 for the Heisenberg-type chains.
pub fn spin_hamiltonian(model: &Spin, n: usize, periodic: bool) -> DMatrix<f64> {
    let dim = 1usize << n;
    let mut h = DMatrix::zeros(dim, dim);
    let z = |s: usize, i: usize| if s >> (n - 1 - i) & 1 == 0 { 1.0 } else { -1.0 };
    let flip = |s: usize, i: usize| s ^ (1 << (n - 1 - i));
    for s in 0..dim {
        match *model {
            Spin::Tfim { j, b } => {
                for (p, q) in bond_list(n, periodic, 1) {
                    h[(s, s)] -= j * z(s, p) * z(s, q);
                }
                for i in 0..n {
                    h[(flip(s, i), s)] -= b;
                }
            }
            Spin::J1J2 { j1, j2 } => {
                for (coupling, range) in [(j1, 1), (j2, 2)] {
                    if coupling == 0.0 {
                        continue;
                    }
                    for (p, q) in bond_list(n, periodic, range) {
                        h[(s, s)] += coupling / 4.0 * z(s, p) * z(s, q);
                        if z(s, p) != z(s, q) {
                            h[(flip(flip(s, p), q), s)] += coupling / 2.0;
                        }
                    }
                }
            }
        }
    }
    h
}

pub fn ground_energy(h: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(h.clone()).eigenvalues.min()
}

/// <psi|H|psi> / <psi|psi>.
pub fn energy(h: &DMatrix<f64>, psi: &DVector<C64>) -> f64 {
    let hc = h.map(|x| c(x, 0.0));
    ((psi.adjoint() * (&hc * psi))[(0, 0)] / psi.norm_squared()).re
}

/// Coefficient matrix with rows indexed by the sites in `a` and columns by
/// the rest, both in increasing site order.
pub fn split(psi: &DVector<C64>, n: usize, a: &[usize]) -> DMatrix<C64> {
    let b: Vec<usize> = (0..n).filter(|i| !a.contains(i)).collect();
    let mut m = DMatrix::zeros(1 << a.len(), 1 << b.len());
    for idx in 0..1usize << n {
        let bs = bits(idx, n);
        let r = a.iter().fold(0, |acc, &i| acc << 1 | bs[i] as usize);
        let col = b.iter().fold(0, |acc, &i| acc << 1 | bs[i] as usize);
        m[(r, col)] = psi[idx];
    }
    m
}

/// Squared Schmidt coefficients, normalized.
pub fn schmidt_spectrum(psi: &DVector<C64>, n: usize, a: &[usize]) -> Vec<f64> {
    let m = split(psi, n, a);
    let sv = m.svd(false, false).singular_values;
    let total: f64 = sv.iter().map(|s| s * s).sum();
    sv.iter().map(|s| s * s / total).collect()
}

pub fn renyi2(psi: &DVector<C64>, n: usize, a: &[usize]) -> f64 {
    -schmidt_spectrum(psi, n, a).iter().map(|p| p * p).sum::<f64>().ln()
}

/// Hidden units with nonzero weights on both sides of the bipartition.
pub fn crossing_units(s: &RbmState, a: &[usize]) -> usize {
    let n = nqs::NqsState::n_visible(s);
    (0..s.n_hidden())
        .filter(|&j| {
            let touches = |inside: bool| (0..n).any(|i| a.contains(&i) == inside && s.weights()[(i, j)] != c(0.0, 0.0));
            touches(true) && touches(false)
        })
        .count()
}
