//! Quantum circuits over {H, Z(theta), CZ, CZ(theta)} simulated by growing a
//! deep Boltzmann machine one gate at a time, plus a state-vector reference.

mod graph;
mod oracle;

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{NqsError, Result};

pub use graph::{
    cz_phase_weights, hadamard_weight, write_amplitudes_csv, zrot_weight, DbmCircuitGraph, HiddenKind, HiddenUnit, Vertex,
    MAX_QUBITS,
};
pub use oracle::statevector_oracle;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    H(usize),
    Z { qubit: usize, theta: f64 },
    Cz(usize, usize),
    CzPhase { q1: usize, q2: usize, theta: f64 },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::Z { qubit: q, .. } => vec![q],
            Gate::Cz(a, b) | Gate::CzPhase { q1: a, q2: b, .. } => vec![a, b],
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::H(q) => write!(f, "h {q}"),
            Gate::Z { qubit, theta } => write!(f, "z {qubit} {theta:?}"),
            Gate::Cz(a, b) => write!(f, "cz {a} {b}"),
            Gate::CzPhase { q1, q2, theta } => write!(f, "cz {q1} {q2} {theta:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let qs = gate.qubits();
        if let Some(q) = qs.iter().find(|&&q| q >= self.n_qubits) {
            return Err(NqsError::Domain(format!("qubit {q} out of range for {} qubits", self.n_qubits)));
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(NqsError::Domain(format!("two-qubit gate on repeated qubit {}", qs[0])));
        }
        self.gates.push(gate);
        Ok(())
    }

    /// One gate per line: `h q`, `z q theta`, `cz q1 q2`, `cz q1 q2 theta`.
    /// Blank lines and text after `#` are ignored.
    pub fn parse(n_qubits: usize, text: &str) -> Result<Self> {
        let mut c = Circuit::new(n_qubits);
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let err = |message: String| NqsError::Parse { line, message };
            let tok: Vec<&str> = body.split_whitespace().collect();
            let qubit = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad qubit index '{s}'")));
            let angle = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| err(format!("bad angle '{s}'")))
            };
            let gate = match (tok[0].to_ascii_lowercase().as_str(), tok.len()) {
                ("h", 2) => Gate::H(qubit(tok[1])?),
                ("z", 3) => Gate::Z { qubit: qubit(tok[1])?, theta: angle(tok[2])? },
                ("cz", 3) => Gate::Cz(qubit(tok[1])?, qubit(tok[2])?),
                ("cz", 4) => Gate::CzPhase { q1: qubit(tok[1])?, q2: qubit(tok[2])?, theta: angle(tok[3])? },
                (name @ ("h" | "z" | "cz"), n) => return Err(err(format!("gate '{name}' given {} arguments", n - 1))),
                (name, _) => return Err(err(format!("unknown gate '{name}'"))),
            };
            c.push(gate).map_err(|e| err(e.to_string()))?;
        }
        Ok(c)
    }

    pub fn to_text(&self) -> String {
        self.gates.iter().map(|g| format!("{g}\n")).collect()
    }

    /// `depth` layers. Each layer pairs up shuffled qubits; a pair receives
    /// a CZ (sometimes controlled-phase) with probability 1/3, otherwise each
    /// qubit of the pair gets H or Z(theta) with theta uniform in [0, 2 pi).
    pub fn random<R: Rng>(n_qubits: usize, depth: usize, rng: &mut R) -> Self {
        let mut c = Circuit::new(n_qubits);
        let mut order: Vec<usize> = (0..n_qubits).collect();
        for _ in 0..depth {
            order.shuffle(rng);
            for pair in order.chunks(2) {
                if pair.len() == 2 && rng.gen_bool(1.0 / 3.0) {
                    let g = if rng.gen_bool(0.25) {
                        Gate::CzPhase { q1: pair[0], q2: pair[1], theta: rng.gen_range(0.0..std::f64::consts::TAU) }
                    } else {
                        Gate::Cz(pair[0], pair[1])
                    };
                    c.gates.push(g);
                    continue;
                }
                for &q in pair {
                    let g = if rng.gen_bool(0.5) {
                        Gate::H(q)
                    } else {
                        Gate::Z { qubit: q, theta: rng.gen_range(0.0..std::f64::consts::TAU) }
                    };
                    c.gates.push(g);
                }
            }
        }
        c
    }
}

/// Single-qubit product input state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QubitInit {
    Zero,
    Plus,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct InitialState(pub Vec<QubitInit>);

impl InitialState {
    pub fn zeros(n: usize) -> Self {
        Self(vec![QubitInit::Zero; n])
    }

    pub fn plus(n: usize) -> Self {
        Self(vec![QubitInit::Plus; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Written as one character per qubit, `0` or `+`, e.g. `"0+00"`.
impl FromStr for InitialState {
    type Err = NqsError;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(QubitInit::Zero),
                '+' => Ok(QubitInit::Plus),
                other => Err(NqsError::Unsupported(format!("initial state '{other}' is not |0> or |+>"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(InitialState)
    }
}

impl TryFrom<String> for InitialState {
    type Error = NqsError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InitialState> for String {
    fn from(s: InitialState) -> String {
        s.0.iter().map(|q| if *q == QubitInit::Zero { '0' } else { '+' }).collect()
    }
}
