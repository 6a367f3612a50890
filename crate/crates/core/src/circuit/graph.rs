use std::f64::consts::{LN_2, PI};
use std::io::Write;

use nalgebra::DVector;

use super::{Circuit, Gate, InitialState, QubitInit};
use crate::error::{NqsError, Result};
use crate::exact::DenseState;
use crate::spin::SpinConfiguration;
use crate::state::C64;

pub const MAX_QUBITS: usize = 12;

fn i(x: f64) -> C64 {
    C64::new(0.0, x)
}

fn r(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// W(v, H) = i pi/8 - ln2/2 - i pi v/2 - i pi H/4 + i pi v H.
pub fn hadamard_weight(v: u8, h: u8) -> C64 {
    let (v, h) = (v as f64, h as f64);
    i(PI / 8.0) - r(LN_2 / 2.0) - i(PI * v / 2.0) - i(PI * h / 4.0) + i(PI * v * h)
}

/// W(v, Z) = -ln2/2 + i theta v/2 + i pi v Z.
pub fn zrot_weight(theta: f64, v: u8, z: u8) -> C64 {
    let (v, z) = (v as f64, z as f64);
    -r(LN_2 / 2.0) + i(theta * v / 2.0) + i(PI * v * z)
}

/// (beta, delta) for w(v, h) = beta v + delta v h such that
/// sum_h exp(w(v1, h) + w(v2, h)) = 2 diag(1, 1, 1, e^{i theta}).
pub fn cz_phase_weights(theta: f64) -> Result<(C64, C64)> {
    let p = C64::from_polar(1.0, theta);
    let a = r(2.0) - p;
    // a y^2 - 2 p y + a = 0
    let disc = (p * p - a * a).sqrt();
    for y in [(p + disc) / a, (p - disc) / a] {
        let one_plus = r(1.0) + y;
        if y.norm() < 1e-12 || one_plus.norm() < 1e-12 {
            continue;
        }
        let (beta, delta) = ((r(2.0) / one_plus).ln(), y.ln());
        let f = |v1: f64, v2: f64| -> C64 {
            (beta * (v1 + v2)).exp() * (r(1.0) + (delta * (v1 + v2)).exp())
        };
        let want = [r(2.0), r(2.0), r(2.0), 2.0 * p];
        let got = [f(0.0, 0.0), f(0.0, 1.0), f(1.0, 0.0), f(1.0, 1.0)];
        if got.iter().zip(&want).all(|(g, w)| (g - w).norm() < 1e-12) {
            return Ok((beta, delta));
        }
    }
    Err(NqsError::Internal(format!("controlled-phase weights for theta = {theta} failed the transfer check")))
}

/// A visible vertex: qubit, time slice and its accumulated linear bias.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub qubit: usize,
    pub slice: usize,
    pub bias: C64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenKind {
    /// Acts on one frontier vertex (input preparation).
    Pin,
    /// Joins a retiring vertex to its successor on the same qubit.
    Bridge,
    /// Couples two frontier vertices.
    Diagonal,
}

/// Contributes sum_h exp(offset + bias h + sum_k w_k x_k h) for h in {0, 1}.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenUnit {
    pub kind: HiddenKind,
    pub offset: C64,
    pub bias: C64,
    pub edges: Vec<(usize, C64)>,
}

impl HiddenUnit {
    fn factor(&self, x: &[u8]) -> C64 {
        let field: C64 = self.edges.iter().zip(x).map(|((_, w), &b)| w * b as f64).sum();
        self.offset.exp() * (r(1.0) + (self.bias + field).exp())
    }
}

/// DBM grown gate by gate. Retired vertices and gate units are hidden; the
/// frontier holds the current visible vertex of each qubit.
/// `<v|U|in> = ledger * raw amplitude`.
#[derive(Debug, Clone, PartialEq)]
pub struct DbmCircuitGraph {
    n_qubits: usize,
    vertices: Vec<Vertex>,
    hidden: Vec<HiddenUnit>,
    frontier: Vec<usize>,
    ledger: C64,
}

impl DbmCircuitGraph {
    pub fn init(initial: &InitialState) -> Result<Self> {
        let n = initial.len();
        if n == 0 || n > MAX_QUBITS {
            return Err(NqsError::Capacity { what: "qubits".into(), value: n, limit: MAX_QUBITS });
        }
        let mut g = Self {
            n_qubits: n,
            vertices: (0..n).map(|q| Vertex { qubit: q, slice: 0, bias: r(0.0) }).collect(),
            hidden: Vec::new(),
            frontier: (0..n).collect(),
            ledger: r(1.0),
        };
        for (q, init) in initial.0.iter().enumerate() {
            match init {
                QubitInit::Zero => {
                    // 1 + e^{i pi v}: 2 at v = 0, 0 at v = 1
                    g.hidden.push(HiddenUnit { kind: HiddenKind::Pin, offset: r(0.0), bias: r(0.0), edges: vec![(q, i(PI))] });
                    g.ledger *= 0.5;
                }
                QubitInit::Plus => g.ledger *= std::f64::consts::FRAC_1_SQRT_2,
            }
        }
        Ok(g)
    }

    pub fn from_circuit(circuit: &Circuit, initial: &InitialState) -> Result<Self> {
        if initial.len() != circuit.n_qubits() {
            return Err(NqsError::Shape { expected: circuit.n_qubits(), got: initial.len() });
        }
        let mut g = Self::init(initial)?;
        for gate in circuit.gates() {
            g.apply(gate)?;
        }
        Ok(g)
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        match *gate {
            Gate::H(q) => self.apply_hadamard(q),
            Gate::Z { qubit, theta } => self.apply_zrot(qubit, theta),
            Gate::Cz(a, b) => self.apply_cz(a, b, None),
            Gate::CzPhase { q1, q2, theta } => self.apply_cz(q1, q2, Some(theta)),
        }
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n_qubits {
            return Err(NqsError::Domain(format!("qubit {q} out of range for {} qubits", self.n_qubits)));
        }
        Ok(())
    }

    /// Retires the frontier vertex of `q` behind a new hidden unit whose
    /// weight to both old and new vertex is `weight(v, h)`.
    fn bridge(&mut self, q: usize, weight: impl Fn(u8, u8) -> C64) {
        let old = self.frontier[q];
        let new = self.vertices.len();
        self.vertices.push(Vertex { qubit: q, slice: self.vertices[old].slice + 1, bias: r(0.0) });
        // W(v, h) = c + alpha v + beta h + gamma v h, read off at the corners
        let c = weight(0, 0);
        let alpha = weight(1, 0) - c;
        let beta = weight(0, 1) - c;
        let gamma = weight(1, 1) - c - alpha - beta;
        self.vertices[old].bias += alpha;
        self.vertices[new].bias += alpha;
        self.hidden.push(HiddenUnit {
            kind: HiddenKind::Bridge,
            offset: 2.0 * c,
            bias: 2.0 * beta,
            edges: vec![(old, gamma), (new, gamma)],
        });
        self.frontier[q] = new;
    }

    pub fn apply_hadamard(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        self.bridge(q, hadamard_weight);
        Ok(())
    }

    /// Builds diag(1, e^{i theta}); the phase e^{-i theta/2} goes to the ledger.
    pub fn apply_zrot(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        self.bridge(q, |v, z| zrot_weight(theta, v, z));
        self.ledger *= C64::from_polar(1.0, -theta / 2.0);
        Ok(())
    }

    pub fn apply_cz(&mut self, q1: usize, q2: usize, theta: Option<f64>) -> Result<()> {
        self.check_qubit(q1)?;
        self.check_qubit(q2)?;
        if q1 == q2 {
            return Err(NqsError::Domain(format!("controlled gate on repeated qubit {q1}")));
        }
        let (a, b) = (self.frontier[q1], self.frontier[q2]);
        match theta {
            None => {
                let c = hadamard_weight(0, 0);
                let alpha = hadamard_weight(1, 0) - c;
                let beta = hadamard_weight(0, 1) - c;
                let gamma = hadamard_weight(1, 1) - c - alpha - beta;
                self.vertices[a].bias += alpha;
                self.vertices[b].bias += alpha;
                self.hidden.push(HiddenUnit {
                    kind: HiddenKind::Diagonal,
                    offset: 2.0 * c,
                    bias: 2.0 * beta,
                    edges: vec![(a, gamma), (b, gamma)],
                });
                // transfer is diag(1, 1, 1, -1) / sqrt 2
                self.ledger *= std::f64::consts::SQRT_2;
            }
            Some(theta) => {
                let (beta, delta) = cz_phase_weights(theta)?;
                self.vertices[a].bias += beta;
                self.vertices[b].bias += beta;
                self.hidden.push(HiddenUnit {
                    kind: HiddenKind::Diagonal,
                    offset: r(0.0),
                    bias: r(0.0),
                    edges: vec![(a, delta), (b, delta)],
                });
                self.ledger *= 0.5;
            }
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn hidden_units(&self) -> &[HiddenUnit] {
        &self.hidden
    }

    pub fn frontier(&self) -> &[usize] {
        &self.frontier
    }

    /// Vertices no longer on the frontier.
    pub fn n_retired(&self) -> usize {
        self.vertices.len() - self.n_qubits
    }

    /// Constant with `<v|U|in> = ledger * raw amplitude(v)`.
    pub fn ledger(&self) -> C64 {
        self.ledger
    }

    /// Raw DBM amplitudes of every frontier configuration, summing hidden
    /// units in creation order and each retired vertex as it leaves the
    /// frontier. Cost O(#units * 2^n).
    pub fn raw_amplitudes(&self) -> DVector<C64> {
        let n = self.n_qubits;
        let dim = 1usize << n;
        let bit_of = |idx: usize, q: usize| ((idx >> (n - 1 - q)) & 1) as u8;
        let mut psi = DVector::from_element(dim, r(1.0));
        let mut slot: Vec<usize> = (0..n).collect(); // frontier vertex per qubit during the replay
        let mut owner = vec![usize::MAX; self.vertices.len()];
        for q in 0..n {
            owner[q] = q;
        }
        for unit in &self.hidden {
            match unit.kind {
                HiddenKind::Pin | HiddenKind::Diagonal => {
                    let qs: Vec<usize> = unit.edges.iter().map(|(v, _)| owner[*v]).collect();
                    for idx in 0..dim {
                        let x: Vec<u8> = qs.iter().map(|&q| bit_of(idx, q)).collect();
                        psi[idx] *= unit.factor(&x);
                    }
                }
                HiddenKind::Bridge => {
                    let (old, new) = (unit.edges[0].0, unit.edges[1].0);
                    let q = owner[old];
                    debug_assert_eq!(slot[q], old);
                    let a = self.vertices[old].bias;
                    let mut t = [[r(0.0); 2]; 2];
                    for (x, row) in t.iter_mut().enumerate() {
                        for (y, entry) in row.iter_mut().enumerate() {
                            *entry = (a * x as f64).exp() * unit.factor(&[x as u8, y as u8]);
                        }
                    }
                    let mask = 1usize << (n - 1 - q);
                    for idx in 0..dim {
                        if idx & mask != 0 {
                            continue;
                        }
                        let (p0, p1) = (psi[idx], psi[idx | mask]);
                        psi[idx] = t[0][0] * p0 + t[1][0] * p1;
                        psi[idx | mask] = t[0][1] * p0 + t[1][1] * p1;
                    }
                    owner[new] = q;
                    slot[q] = new;
                }
            }
        }
        for idx in 0..dim {
            for (q, &v) in self.frontier.iter().enumerate() {
                if bit_of(idx, q) == 1 {
                    psi[idx] *= self.vertices[v].bias.exp();
                }
            }
        }
        psi
    }

    /// Physical amplitudes ledger * raw.
    pub fn amplitudes(&self) -> Result<DenseState> {
        DenseState::new(self.raw_amplitudes() * self.ledger)
    }

    /// <v_out|U|in> for one output configuration.
    pub fn amplitude(&self, v_out: &SpinConfiguration) -> Result<C64> {
        if v_out.len() != self.n_qubits {
            return Err(NqsError::Shape { expected: self.n_qubits, got: v_out.len() });
        }
        Ok(self.raw_amplitudes()[v_out.index()] * self.ledger)
    }
}

/// CSV with columns index, bits, re, im.
pub fn write_amplitudes_csv<W: Write>(state: &DenseState, out: W) -> Result<()> {
    let n = state.n_sites();
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["index", "bits", "re", "im"])?;
    for (k, a) in state.amplitudes().iter().enumerate() {
        let bits = SpinConfiguration::from_index(k, n, crate::spin::Convention::ZeroOne).to_string();
        w.write_record([k.to_string(), bits, format!("{:.15e}", a.re), format!("{:.15e}", a.im)])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::statevector_oracle;
    use crate::spin::Convention;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn hadamard_identity_table() {
        for v in 0..2u8 {
            for w in 0..2u8 {
                let s: C64 = (0..2u8).map(|h| (hadamard_weight(v, h) + hadamard_weight(w, h)).exp()).sum();
                let sign = if v == 1 && w == 1 { -1.0 } else { 1.0 };
                assert!(close(s, r(sign * FRAC_1_SQRT_2), 1e-12), "({v},{w}) -> {s}");
            }
        }
    }

    #[test]
    fn zrot_transfer_is_diagonal() {
        for theta in [0.0, 0.3, PI, 4.0] {
            for v in 0..2u8 {
                for w in 0..2u8 {
                    let s: C64 = (0..2u8).map(|z| (zrot_weight(theta, v, z) + zrot_weight(theta, w, z)).exp()).sum();
                    let want = if v != w { r(0.0) } else if v == 0 { r(1.0) } else { C64::from_polar(1.0, theta) };
                    assert!(close(s, want, 1e-12));
                }
            }
        }
    }

    #[test]
    fn cz_phase_solutions_cover_the_circle() {
        for k in 0..64 {
            let theta = k as f64 * std::f64::consts::TAU / 64.0;
            cz_phase_weights(theta).unwrap();
        }
    }

    fn bits(b: &[u8]) -> SpinConfiguration {
        SpinConfiguration::new(b.to_vec(), Convention::ZeroOne)
    }

    #[test]
    fn initial_states() {
        let g = DbmCircuitGraph::init(&InitialState::zeros(2)).unwrap();
        let a = g.amplitudes().unwrap();
        assert!(close(a.amplitudes()[0], r(1.0), 1e-15));
        assert!(a.amplitudes().iter().skip(1).all(|z| z.norm() < 1e-15));
        let g = DbmCircuitGraph::init(&"0+".parse().unwrap()).unwrap();
        let a = g.amplitudes().unwrap();
        let c = r(FRAC_1_SQRT_2);
        for (k, want) in [c, c, r(0.0), r(0.0)].iter().enumerate() {
            assert!(close(a.amplitudes()[k], *want, 1e-15));
        }
    }

    #[test]
    fn hadamard_on_zero() {
        let mut g = DbmCircuitGraph::init(&InitialState::zeros(2)).unwrap();
        g.apply_hadamard(0).unwrap();
        assert!(close(g.amplitude(&bits(&[1, 0])).unwrap(), r(FRAC_1_SQRT_2), 1e-14));
        assert_eq!(g.hidden_units().len(), 3);
        assert_eq!(g.n_retired(), 1);
        assert_eq!(g.frontier().len(), 2);
    }

    #[test]
    fn z_pi_on_plus_and_cz_on_plus_plus() {
        let mut g = DbmCircuitGraph::init(&InitialState::plus(1)).unwrap();
        g.apply_zrot(0, PI).unwrap();
        let a = g.amplitudes().unwrap();
        // Z(pi) = diag(-i, i): (1, -1)/sqrt2 up to the phase -i
        let ratio = a.amplitudes()[1] / a.amplitudes()[0];
        assert!(close(ratio, r(-1.0), 1e-14));
        let mut g = DbmCircuitGraph::init(&InitialState::plus(2)).unwrap();
        g.apply_cz(0, 1, None).unwrap();
        let a = g.amplitudes().unwrap();
        for (k, s) in [1.0, 1.0, 1.0, -1.0].iter().enumerate() {
            assert!(close(a.amplitudes()[k], r(0.5 * s), 1e-14));
        }
        assert_eq!(g.hidden_units().len(), 1);
        assert!((g.ledger().norm() - 0.5 * std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn cz_pi_equals_cz() {
        let mut a = DbmCircuitGraph::init(&InitialState::plus(2)).unwrap();
        a.apply_cz(0, 1, None).unwrap();
        let mut b = DbmCircuitGraph::init(&InitialState::plus(2)).unwrap();
        b.apply_cz(0, 1, Some(PI)).unwrap();
        let (x, y) = (a.amplitudes().unwrap(), b.amplitudes().unwrap());
        for k in 0..4 {
            assert!(close(x.amplitudes()[k], y.amplitudes()[k], 1e-12));
        }
    }

    #[test]
    fn random_circuits_match_statevector() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..10 {
            let n = rng.gen_range(2..=5);
            let c = Circuit::random(n, 6, &mut rng);
            let init: InitialState = (0..n).map(|_| if rng.gen_bool(0.5) { '0' } else { '+' }).collect::<String>().parse().unwrap();
            let g = DbmCircuitGraph::from_circuit(&c, &init).unwrap();
            let dbm = g.amplitudes().unwrap();
            let sv = statevector_oracle(&c, &init).unwrap();
            for (x, y) in dbm.amplitudes().iter().zip(sv.amplitudes().iter()) {
                assert!(close(*x, *y, 1e-12), "{x} vs {y}");
            }
        }
    }

    #[test]
    fn capacity_guard() {
        assert!(matches!(DbmCircuitGraph::init(&InitialState::zeros(13)), Err(NqsError::Capacity { .. })));
    }

    #[test]
    fn csv_layout() {
        let g = DbmCircuitGraph::init(&InitialState::zeros(2)).unwrap();
        let mut out = Vec::new();
        write_amplitudes_csv(&g.amplitudes().unwrap(), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("index,bits,re,im\n0,00,1.000000000000000e0,0.000000000000000e0\n"), "{text}");
    }
}
