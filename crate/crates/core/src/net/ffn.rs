use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::activation::{activate, Activation};
use crate::error::{NqsError, Result};
use crate::spin::{Convention, SpinConfiguration};
use crate::state::{check_input, LogAmplitude, NqsState, C64};

/// One fully connected layer computing y = f(W x - b).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// Shape (outputs, inputs).
    pub weights: DMatrix<C64>,
    pub bias: DVector<C64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn new(weights: DMatrix<C64>, bias: DVector<C64>, activation: Activation) -> Result<Self> {
        if weights.nrows() != bias.len() {
            return Err(NqsError::Shape { expected: weights.nrows(), got: bias.len() });
        }
        Ok(Self { weights, bias, activation })
    }

    pub fn n_in(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_out(&self) -> usize {
        self.weights.nrows()
    }

    fn forward(&self, x: &DVector<C64>) -> Result<DVector<C64>> {
        let pre = &self.weights * x - &self.bias;
        let mut out = DVector::zeros(pre.len());
        for (o, z) in out.iter_mut().zip(pre.iter()) {
            *o = activate(self.activation, *z)?;
        }
        Ok(out)
    }
}

/// Feed-forward complex network whose single output is the amplitude.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedForwardNet {
    layers: Vec<DenseLayer>,
    convention: Convention,
}

impl FeedForwardNet {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(NqsError::Config("network needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].n_out() != pair[1].n_in() {
                return Err(NqsError::Shape { expected: pair[0].n_out(), got: pair[1].n_in() });
            }
        }
        let last = layers.last().map(DenseLayer::n_out).unwrap_or(0);
        if last != 1 {
            return Err(NqsError::Shape { expected: 1, got: last });
        }
        Ok(Self { layers, convention: Convention::ZeroOne })
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn n_inputs(&self) -> usize {
        self.layers[0].n_in()
    }
}

/// Forward-propagates v through the network and returns the output neuron.
pub fn ffn_amplitude(net: &FeedForwardNet, v: &SpinConfiguration) -> Result<C64> {
    check_input(net.n_inputs(), net.convention, v)?;
    let mut x = DVector::from_iterator(v.len(), v.values().into_iter().map(|x| C64::new(x, 0.0)));
    for layer in &net.layers {
        x = layer.forward(&x)?;
    }
    Ok(x[0])
}

impl NqsState for FeedForwardNet {
    fn n_visible(&self) -> usize {
        self.n_inputs()
    }

    fn visible_convention(&self) -> Convention {
        self.convention
    }

    fn log_amplitude(&self, v: &SpinConfiguration) -> Result<LogAmplitude> {
        Ok(LogAmplitude::from_amplitude(ffn_amplitude(self, v)?))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerRecord {
    weights: Vec<Vec<C64>>,
    bias: Vec<C64>,
    activation: Activation,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetRecord {
    #[serde(default)]
    convention: Convention,
    layers: Vec<LayerRecord>,
}

impl Serialize for FeedForwardNet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let layers = self
            .layers
            .iter()
            .map(|l| LayerRecord {
                weights: l.weights.row_iter().map(|r| r.iter().copied().collect()).collect(),
                bias: l.bias.iter().copied().collect(),
                activation: l.activation,
            })
            .collect();
        NetRecord { convention: self.convention, layers }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for FeedForwardNet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let rec = NetRecord::deserialize(d)?;
        let mut layers = Vec::with_capacity(rec.layers.len());
        for l in rec.layers {
            let rows = l.weights.len();
            let cols = l.weights.first().map_or(0, Vec::len);
            if l.weights.iter().any(|r| r.len() != cols) {
                return Err(D::Error::custom("ragged weight matrix"));
            }
            let w = DMatrix::from_row_iterator(rows, cols, l.weights.into_iter().flatten());
            layers.push(DenseLayer::new(w, DVector::from_vec(l.bias), l.activation).map_err(D::Error::custom)?);
        }
        FeedForwardNet::new(layers)
            .map(|n| n.with_convention(rec.convention))
            .map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn zo(bits: &[u8]) -> SpinConfiguration {
        SpinConfiguration::new(bits.to_vec(), Convention::ZeroOne)
    }

    /// Two inputs, three hidden neurons, one output; all logistic.
    fn two_qubit_net(w_in: [[C64; 3]; 2], b_hidden: [C64; 3], w_out: [C64; 3], b_out: C64) -> FeedForwardNet {
        let w1 = DMatrix::from_fn(3, 2, |i, k| w_in[k][i]);
        let l1 = DenseLayer::new(w1, DVector::from_row_slice(&b_hidden), Activation::Logistic).unwrap();
        let w2 = DMatrix::from_row_slice(1, 3, &w_out);
        let l2 = DenseLayer::new(w2, DVector::from_element(1, b_out), Activation::Logistic).unwrap();
        FeedForwardNet::new(vec![l1, l2]).unwrap()
    }

    #[test]
    fn zero_parameters_give_uniform_state() {
        let z = c(0.0, 0.0);
        let net = two_qubit_net([[z; 3]; 2], [z; 3], [z; 3], z);
        for bits in [[0, 0], [0, 1], [1, 0], [1, 1]] {
            assert_eq!(ffn_amplitude(&net, &zo(&bits)).unwrap(), c(0.5, 0.0));
        }
    }

    #[test]
    fn heaviside_layer_reduces_to_nand() {
        let w = DMatrix::from_row_slice(1, 2, &[c(-2.0, 0.0), c(-2.0, 0.0)]);
        let l = DenseLayer::new(w, DVector::from_element(1, c(-3.0, 0.0)), Activation::Heaviside).unwrap();
        let net = FeedForwardNet::new(vec![l]).unwrap();
        for (x1, x2) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let amp = ffn_amplitude(&net, &zo(&[x1, x2])).unwrap();
            assert_eq!(amp.re as u8, super::super::perceptron_nand(x1, x2));
            assert_eq!(amp.im, 0.0);
        }
    }

    #[test]
    fn random_two_qubit_net_matches_hand_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut r = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let w_in = [[r(), r(), r()], [r(), r(), r()]];
        let b_h = [r(), r(), r()];
        let w_out = [r(), r(), r()];
        let b_out = r();
        let net = two_qubit_net(w_in, b_h, w_out, b_out);
        let f = |z: C64| 1.0 / (1.0 + (-z).exp());
        for bits in [[0u8, 0], [0, 1], [1, 0], [1, 1]] {
            let (v1, v2) = (bits[0] as f64, bits[1] as f64);
            let y: Vec<C64> = (0..3).map(|i| f(v1 * w_in[0][i] + v2 * w_in[1][i] - b_h[i])).collect();
            let psi = f(w_out[0] * y[0] + w_out[1] * y[1] + w_out[2] * y[2] - b_out);
            let got = ffn_amplitude(&net, &zo(&bits)).unwrap();
            assert!((got - psi).norm() < 1e-14);
        }
    }

    #[test]
    fn dimension_errors() {
        let z = c(0.0, 0.0);
        let net = two_qubit_net([[z; 3]; 2], [z; 3], [z; 3], z);
        assert!(matches!(ffn_amplitude(&net, &zo(&[0, 1, 1])), Err(NqsError::Shape { .. })));
        let l1 = DenseLayer::new(DMatrix::zeros(3, 2), DVector::zeros(3), Activation::Tanh).unwrap();
        let l2 = DenseLayer::new(DMatrix::zeros(1, 4), DVector::zeros(1), Activation::Tanh).unwrap();
        assert!(FeedForwardNet::new(vec![l1.clone(), l2]).is_err());
        assert!(FeedForwardNet::new(vec![l1]).is_err());
        assert!(DenseLayer::new(DMatrix::zeros(2, 2), DVector::zeros(3), Activation::Cos).is_err());
    }

    #[test]
    fn json_keeps_layer_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut r = || c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let net = two_qubit_net([[r(), r(), r()], [r(), r(), r()]], [r(), r(), r()], [r(), r(), r()], r());
        let text = serde_json::to_string(&net).unwrap();
        let back: FeedForwardNet = serde_json::from_str(&text).unwrap();
        assert_eq!(back, net);
    }

    mod props {
        use super::*;
        use proptest::prelude::{prop_assert, proptest};
        use rand::Rng;

        proptest! {
            #[test]
            fn hidden_neuron_order_is_irrelevant(seed in 0u64..1000, perm_seed in 0u64..6, bits in proptest::collection::vec(0u8..2, 2)) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut r = || c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
                let w_in = [[r(), r(), r()], [r(), r(), r()]];
                let b_h = [r(), r(), r()];
                let w_out = [r(), r(), r()];
                let b_out = r();
                let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
                let p = perms[perm_seed as usize];
                let permuted = two_qubit_net(
                    [[w_in[0][p[0]], w_in[0][p[1]], w_in[0][p[2]]], [w_in[1][p[0]], w_in[1][p[1]], w_in[1][p[2]]]],
                    [b_h[p[0]], b_h[p[1]], b_h[p[2]]],
                    [w_out[p[0]], w_out[p[1]], w_out[p[2]]],
                    b_out,
                );
                let net = two_qubit_net(w_in, b_h, w_out, b_out);
                let v = zo(&bits);
                let a = ffn_amplitude(&net, &v).unwrap();
                let b = ffn_amplitude(&permuted, &v).unwrap();
                prop_assert!((a - b).norm() < 1e-13);
            }
        }
    }
}
