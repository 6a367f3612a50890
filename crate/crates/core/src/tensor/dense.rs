use crate::error::{NqsError, Result};
use crate::state::C64;

/// Row-major complex tensor with one label per index.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<C64>,
    labels: Vec<String>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<C64>, labels: Vec<String>) -> Result<Self> {
        let size: usize = dims.iter().product();
        if data.len() != size {
            return Err(NqsError::Shape { expected: size, got: data.len() });
        }
        if labels.len() != dims.len() {
            return Err(NqsError::Shape { expected: dims.len(), got: labels.len() });
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(NqsError::Domain(format!("repeated tensor label {l}")));
            }
        }
        Ok(Self { dims, data, labels })
    }

    pub fn scalar(value: C64) -> Self {
        Self { dims: vec![], data: vec![value], labels: vec![] }
    }

    /// Diagonal matrix with the given entries.
    pub fn diag(entries: &[C64], labels: [&str; 2]) -> Self {
        let d = entries.len();
        let mut data = vec![C64::new(0.0, 0.0); d * d];
        for (i, e) in entries.iter().enumerate() {
            data[i * d + i] = *e;
        }
        Self { dims: vec![d, d], data, labels: labels.iter().map(|s| s.to_string()).collect() }
    }

    /// Copy tensor: 1 when every index takes the same value.
    pub fn copy(dim: usize, labels: Vec<String>) -> Self {
        let rank = labels.len();
        let mut t = Self { dims: vec![dim; rank], data: vec![C64::new(0.0, 0.0); dim.pow(rank as u32)], labels };
        for k in 0..dim {
            let idx = vec![k; rank];
            let off = t.offset(&idx);
            t.data[off] = C64::new(1.0, 0.0);
        }
        t
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    fn offset(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.dims).fold(0, |acc, (i, d)| acc * d + i)
    }

    pub fn get(&self, idx: &[usize]) -> Result<C64> {
        if idx.len() != self.rank() {
            return Err(NqsError::Shape { expected: self.rank(), got: idx.len() });
        }
        if idx.iter().zip(&self.dims).any(|(i, d)| i >= d) {
            return Err(NqsError::Domain(format!("index {idx:?} out of range {:?}", self.dims)));
        }
        Ok(self.data[self.offset(idx)])
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// Fixes one index to `value`, dropping it.
    pub fn slice(&self, label: &str, value: usize) -> Result<Self> {
        let axis = self.position(label).ok_or_else(|| NqsError::Domain(format!("no index {label}")))?;
        if value >= self.dims[axis] {
            return Err(NqsError::Domain(format!("value {value} out of range for {label}")));
        }
        let outer: usize = self.dims[..axis].iter().product();
        let inner: usize = self.dims[axis + 1..].iter().product();
        let d = self.dims[axis];
        let mut data = Vec::with_capacity(outer * inner);
        for o in 0..outer {
            let start = (o * d + value) * inner;
            data.extend_from_slice(&self.data[start..start + inner]);
        }
        let mut dims = self.dims.clone();
        dims.remove(axis);
        let mut labels = self.labels.clone();
        labels.remove(axis);
        Ok(Self { dims, data, labels })
    }

    /// Reorders the indices to the given label order.
    pub fn permute(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.rank() {
            return Err(NqsError::Shape { expected: self.rank(), got: order.len() });
        }
        let perm: Vec<usize> = order
            .iter()
            .map(|l| self.position(l).ok_or_else(|| NqsError::Domain(format!("no index {l}"))))
            .collect::<Result<_>>()?;
        let dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let mut strides = vec![1usize; self.rank()];
        for k in (0..self.rank().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..self.data.len() {
            let off: usize = idx.iter().zip(&perm).map(|(i, &p)| i * strides[p]).sum();
            data.push(self.data[off]);
            for k in (0..dims.len()).rev() {
                idx[k] += 1;
                if idx[k] < dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(Self { dims, data, labels: order.iter().map(|s| s.to_string()).collect() })
    }

    /// Sums over every label the two tensors share. Result indices are the
    /// free indices of `self` followed by those of `other`.
    pub fn contract(&self, other: &DenseTensor) -> Result<Self> {
        let shared: Vec<&String> = self.labels.iter().filter(|l| other.labels.contains(l)).collect();
        for l in &shared {
            let (a, b) = (self.dims[self.position(l).unwrap()], other.dims[other.position(l).unwrap()]);
            if a != b {
                return Err(NqsError::Shape { expected: a, got: b });
            }
        }
        let free_a: Vec<&str> = self.labels.iter().filter(|l| !shared.contains(l)).map(String::as_str).collect();
        let free_b: Vec<&str> = other.labels.iter().filter(|l| !shared.contains(l)).map(String::as_str).collect();
        let sh: Vec<&str> = shared.iter().map(|s| s.as_str()).collect();
        let a = self.permute(&[free_a.clone(), sh.clone()].concat())?;
        let b = other.permute(&[sh.clone(), free_b.clone()].concat())?;
        let m: usize = free_a.iter().map(|l| self.dims[self.position(l).unwrap()]).product();
        let k: usize = sh.iter().map(|l| self.dims[self.position(l).unwrap()]).product();
        let n: usize = free_b.iter().map(|l| other.dims[other.position(l).unwrap()]).product();
        let mut data = vec![C64::new(0.0, 0.0); m * n];
        for i in 0..m {
            for p in 0..k {
                let x = a.data[i * k + p];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                let row = &b.data[p * n..(p + 1) * n];
                for (out, y) in data[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *out += x * y;
                }
            }
        }
        let dims: Vec<usize> = a.dims[..free_a.len()].iter().chain(&b.dims[sh.len()..]).copied().collect();
        let labels = free_a.iter().chain(&free_b).map(|s| s.to_string()).collect();
        Ok(Self { dims, data, labels })
    }
}
