use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{NqsError, Result};
use crate::exact::DenseState;
use crate::hamiltonian::Pauli;
use crate::state::C64;

/// One Pauli measurement axis per site, written like `"XZY"`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PauliBasis(pub Vec<Pauli>);

impl FromStr for PauliBasis {
    type Err = NqsError;
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                other => Err(NqsError::Domain(format!("unknown basis label '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliBasis)
    }
}

impl TryFrom<String> for PauliBasis {
    type Error = NqsError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl fmt::Display for PauliBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{p:?}")?;
        }
        Ok(())
    }
}

impl From<PauliBasis> for String {
    fn from(b: PauliBasis) -> String {
        b.to_string()
    }
}

impl PauliBasis {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Local change of basis: Z -> I, X -> H, Y -> H S^dagger.
    pub(crate) fn local_unitaries(&self) -> Vec<[[C64; 2]; 2]> {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let c = |re: f64, im: f64| C64::new(re, im);
        self.0
            .iter()
            .map(|p| match p {
                Pauli::Z => [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(1.0, 0.0)]],
                Pauli::X => [[c(h, 0.0), c(h, 0.0)], [c(h, 0.0), c(-h, 0.0)]],
                Pauli::Y => [[c(h, 0.0), c(0.0, -h)], [c(h, 0.0), c(0.0, h)]],
            })
            .collect()
    }
}

/// Applies the product of 2x2 site matrices (or their transposes) to every
/// column of `m`, whose rows are big-endian basis indices.
pub(crate) fn apply_local(m: &mut DMatrix<C64>, mats: &[[[C64; 2]; 2]], transpose: bool) {
    let n = mats.len();
    let dim = m.nrows();
    for (q, u) in mats.iter().enumerate() {
        if u[0][1] == C64::new(0.0, 0.0) && u[1][0] == C64::new(0.0, 0.0) && u[0][0] == u[1][1] && u[0][0] == C64::new(1.0, 0.0) {
            continue;
        }
        let u = if transpose { [[u[0][0], u[1][0]], [u[0][1], u[1][1]]] } else { *u };
        let mask = 1usize << (n - 1 - q);
        for col in 0..m.ncols() {
            for idx in (0..dim).filter(|i| i & mask == 0) {
                let (a, b) = (m[(idx, col)], m[(idx | mask, col)]);
                m[(idx, col)] = u[0][0] * a + u[0][1] * b;
                m[(idx | mask, col)] = u[1][0] * a + u[1][1] * b;
            }
        }
    }
}

/// Every local Pauli setting on n sites, lexicographic in X < Y < Z.
pub fn all_pauli_bases(n: usize) -> Vec<PauliBasis> {
    let labels = [Pauli::X, Pauli::Y, Pauli::Z];
    (0..3usize.pow(n as u32))
        .map(|mut code| {
            let mut b = vec![Pauli::Z; n];
            for q in (0..n).rev() {
                b[q] = labels[code % 3];
                code /= 3;
            }
            PauliBasis(b)
        })
        .collect()
}

pub enum MeasuredState<'a> {
    Pure(&'a DenseState),
    Mixed(&'a DMatrix<C64>),
}

/// Outcome distribution after rotating each site into `basis`.
pub fn measurement_probabilities(state: MeasuredState<'_>, basis: &PauliBasis) -> Result<Vec<f64>> {
    let mats = basis.local_unitaries();
    match state {
        MeasuredState::Pure(psi) => {
            if psi.n_sites() != basis.len() {
                return Err(NqsError::Shape { expected: psi.n_sites(), got: basis.len() });
            }
            let psi = psi.normalized()?;
            let mut m = DMatrix::from_column_slice(psi.amplitudes().len(), 1, psi.amplitudes().as_slice());
            apply_local(&mut m, &mats, false);
            Ok(m.iter().map(|z| z.norm_sqr()).collect())
        }
        MeasuredState::Mixed(rho) => {
            let dim = 1usize << basis.len();
            if rho.nrows() != dim || rho.ncols() != dim {
                return Err(NqsError::Shape { expected: dim, got: rho.nrows() });
            }
            // U rho, then U (U rho)^dagger = U rho U^dagger
            let mut a = rho.clone();
            apply_local(&mut a, &mats, false);
            let mut b = a.adjoint();
            apply_local(&mut b, &mats, false);
            let trace: C64 = rho.trace();
            Ok((0..dim).map(|k| (b[(k, k)].re / trace.re).max(0.0)).collect())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeasurementData {
    Probabilities(Vec<f64>),
    Counts { counts: Vec<u64>, shots: u64 },
}

/// Outcome statistics in one basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RecordJson", into = "RecordJson")]
pub struct MeasurementRecord {
    pub basis: PauliBasis,
    pub data: MeasurementData,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RecordJson {
    basis: PauliBasis,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    counts: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shots: Option<u64>,
}

impl TryFrom<RecordJson> for MeasurementRecord {
    type Error = NqsError;
    fn try_from(j: RecordJson) -> Result<Self> {
        let data = match (j.probs, j.counts, j.shots) {
            (Some(p), None, None) => MeasurementData::Probabilities(p),
            (None, Some(counts), Some(shots)) => MeasurementData::Counts { counts, shots },
            _ => return Err(NqsError::Config("record needs either probs or counts with shots".into())),
        };
        MeasurementRecord::new(j.basis, data)
    }
}

impl From<MeasurementRecord> for RecordJson {
    fn from(r: MeasurementRecord) -> Self {
        match r.data {
            MeasurementData::Probabilities(p) => RecordJson { basis: r.basis, probs: Some(p), counts: None, shots: None },
            MeasurementData::Counts { counts, shots } => {
                RecordJson { basis: r.basis, probs: None, counts: Some(counts), shots: Some(shots) }
            }
        }
    }
}

impl MeasurementRecord {
    pub fn new(basis: PauliBasis, data: MeasurementData) -> Result<Self> {
        let dim = 1usize << basis.len();
        match &data {
            MeasurementData::Probabilities(p) => {
                if p.len() != dim {
                    return Err(NqsError::Shape { expected: dim, got: p.len() });
                }
                if p.iter().any(|x| !(*x >= 0.0)) {
                    return Err(NqsError::Domain(format!("negative or NaN probability in basis {basis}")));
                }
                let total: f64 = p.iter().sum();
                if (total - 1.0).abs() > 1e-9 {
                    return Err(NqsError::Domain(format!("probabilities in basis {basis} sum to {total}")));
                }
            }
            MeasurementData::Counts { counts, shots } => {
                if counts.len() != dim {
                    return Err(NqsError::Shape { expected: dim, got: counts.len() });
                }
                if counts.iter().sum::<u64>() != *shots || *shots == 0 {
                    return Err(NqsError::Domain(format!("counts in basis {basis} do not add up to {shots} shots")));
                }
            }
        }
        Ok(Self { basis, data })
    }

    /// Outcome frequencies (exact probabilities or counts / shots).
    pub fn probabilities(&self) -> Vec<f64> {
        match &self.data {
            MeasurementData::Probabilities(p) => p.clone(),
            MeasurementData::Counts { counts, shots } => counts.iter().map(|c| *c as f64 / *shots as f64).collect(),
        }
    }
}

/// Exact records of `state` in each basis.
pub fn records_from_state(state: MeasuredState<'_>, bases: &[PauliBasis]) -> Result<Vec<MeasurementRecord>> {
    let mut out = Vec::with_capacity(bases.len());
    for b in bases {
        let st = match &state {
            MeasuredState::Pure(p) => MeasuredState::Pure(p),
            MeasuredState::Mixed(r) => MeasuredState::Mixed(r),
        };
        let mut p = measurement_probabilities(st, b)?;
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= total);
        out.push(MeasurementRecord::new(b.clone(), MeasurementData::Probabilities(p))?);
    }
    Ok(out)
}

/// One JSON object per line.
pub fn read_records<R: BufRead>(input: R) -> Result<Vec<MeasurementRecord>> {
    let mut out = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: MeasurementRecord =
            serde_json::from_str(&line).map_err(|e| NqsError::Parse { line: k + 1, message: e.to_string() })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn write_records<W: Write>(records: &[MeasurementRecord], mut out: W) -> Result<()> {
    for r in records {
        writeln!(out, "{}", serde_json::to_string(r)?)?;
    }
    Ok(())
}
