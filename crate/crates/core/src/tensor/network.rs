use super::dense::DenseTensor;
use crate::bm::RbmState;
use crate::error::{NqsError, Result};
use crate::spin::{Convention, SpinConfiguration};
use crate::state::{check_input, C64};

/// Largest intermediate tensor the greedy contraction will form.
const MAX_INTERMEDIATE: usize = 1 << 24;

/// Vertex and edge tensors of an RBM. Open indices `v0..v{n-1}` are the
/// physical legs; every other label appears on exactly two tensors.
#[derive(Debug, Clone)]
pub struct TensorNetwork {
    tensors: Vec<DenseTensor>,
    n_visible: usize,
}

fn one() -> C64 {
    C64::new(1.0, 0.0)
}

/// Visible neuron i becomes diag(1, e^{a_i}) feeding a copy tensor, hidden
/// neuron j becomes diag(1, e^{b_j}) closed by a vector of ones, and edge
/// (i, j) becomes [[1, 1], [1, e^{w_ij}]]. Both layers must use {0, 1}.
pub fn rbm_to_tensor_network(state: &RbmState) -> Result<TensorNetwork> {
    use crate::state::NqsState;
    for conv in [state.visible_convention(), state.hidden_convention()] {
        if conv != Convention::ZeroOne {
            return Err(NqsError::Unsupported(
                "tensor conversion needs {0,1} units; convert the RBM conventions first".into(),
            ));
        }
    }
    let n = state.n_visible();
    let m = state.n_hidden();
    let mut tensors = Vec::new();
    for i in 0..n {
        let a = state.visible_bias()[i];
        tensors.push(DenseTensor::diag(&[one(), a.exp()], [&format!("v{i}"), &format!("x{i}")]));
        let mut legs = vec![format!("x{i}")];
        legs.extend((0..m).map(|j| format!("e{i}_{j}")));
        tensors.push(DenseTensor::copy(2, legs));
    }
    for j in 0..m {
        for i in 0..n {
            let w = state.weights()[(i, j)];
            tensors.push(DenseTensor::new(
                vec![2, 2],
                vec![one(), one(), one(), w.exp()],
                vec![format!("e{i}_{j}"), format!("f{i}_{j}")],
            )?);
        }
        let mut legs: Vec<String> = (0..n).map(|i| format!("f{i}_{j}")).collect();
        legs.push(format!("y{j}"));
        tensors.push(DenseTensor::copy(2, legs));
        let b = state.hidden_bias()[j];
        tensors.push(DenseTensor::diag(&[one(), b.exp()], [&format!("y{j}"), &format!("z{j}")]));
        tensors.push(DenseTensor::new(vec![2], vec![one(), one()], vec![format!("z{j}")])?);
    }
    Ok(TensorNetwork { tensors, n_visible: n })
}

impl TensorNetwork {
    pub fn tensors(&self) -> &[DenseTensor] {
        &self.tensors
    }

    pub fn n_visible(&self) -> usize {
        self.n_visible
    }

    /// Contracts with the physical legs fixed to `v`.
    pub fn amplitude(&self, v: &SpinConfiguration) -> Result<C64> {
        check_input(self.n_visible, Convention::ZeroOne, v)?;
        let mut fixed = Vec::with_capacity(self.tensors.len());
        for t in &self.tensors {
            let mut t = t.clone();
            for i in 0..self.n_visible {
                let label = format!("v{i}");
                if t.position(&label).is_some() {
                    t = t.slice(&label, v.bit(i) as usize)?;
                }
            }
            fixed.push(t);
        }
        let out = contract_greedy(fixed)?;
        Ok(out.data()[0])
    }

    /// Full contraction, indices ordered v0..v{n-1} (big-endian basis order).
    pub fn contract_all(&self) -> Result<DenseTensor> {
        let out = contract_greedy(self.tensors.clone())?;
        let order: Vec<String> = (0..self.n_visible).map(|i| format!("v{i}")).collect();
        let refs: Vec<&str> = order.iter().map(String::as_str).collect();
        out.permute(&refs)
    }
}

/// Repeatedly contracts the connected pair with the smallest result.
fn contract_greedy(mut ts: Vec<DenseTensor>) -> Result<DenseTensor> {
    if ts.is_empty() {
        return Ok(DenseTensor::scalar(one()));
    }
    while ts.len() > 1 {
        let mut best: Option<(usize, usize, usize)> = None;
        for a in 0..ts.len() {
            for b in a + 1..ts.len() {
                let shares = ts[a].labels().iter().any(|l| ts[b].labels().contains(l));
                if !shares {
                    continue;
                }
                let size = result_size(&ts[a], &ts[b]);
                if best.is_none_or(|(_, _, s)| size < s) {
                    best = Some((a, b, size));
                }
            }
        }
        let (a, b, size) = best.unwrap_or_else(|| (0, 1, result_size(&ts[0], &ts[1])));
        if size > MAX_INTERMEDIATE {
            return Err(NqsError::Capacity { what: "intermediate tensor size".into(), value: size, limit: MAX_INTERMEDIATE });
        }
        let tb = ts.swap_remove(b);
        let ta = ts.swap_remove(a);
        ts.push(ta.contract(&tb)?);
    }
    Ok(ts.pop().unwrap())
}

fn result_size(a: &DenseTensor, b: &DenseTensor) -> usize {
    let free = |x: &DenseTensor, y: &DenseTensor| -> usize {
        x.labels().iter().zip(x.dims()).filter(|(l, _)| !y.labels().contains(l)).map(|(_, d)| *d).product()
    };
    free(a, b) * free(b, a)
}
