//! Keyed parameter storage shared by every Boltzmann-machine family.
//!
//! Vertices are named `v<i>` (visible), `h<j>` (hidden) and `g<k>` (deep
//! hidden). Undirected edge keys are stored with the smaller vertex first.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{NqsError, Result};
use crate::state::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Layer {
    Visible,
    Hidden,
    Deep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId {
    pub layer: Layer,
    pub index: usize,
}

impl VertexId {
    pub fn visible(index: usize) -> Self {
        Self { layer: Layer::Visible, index }
    }

    pub fn hidden(index: usize) -> Self {
        Self { layer: Layer::Hidden, index }
    }

    pub fn deep(index: usize) -> Self {
        Self { layer: Layer::Deep, index }
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = match self.layer {
            Layer::Visible => 'v',
            Layer::Hidden => 'h',
            Layer::Deep => 'g',
        };
        write!(f, "{p}{}", self.index)
    }
}

impl FromStr for VertexId {
    type Err = NqsError;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        let layer = match chars.next() {
            Some('v') => Layer::Visible,
            Some('h') => Layer::Hidden,
            Some('g') => Layer::Deep,
            _ => return Err(NqsError::Config(format!("bad vertex name {s:?}"))),
        };
        let index = chars
            .as_str()
            .parse()
            .map_err(|_| NqsError::Config(format!("bad vertex name {s:?}")))?;
        Ok(Self { layer, index })
    }
}

impl Serialize for VertexId {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for VertexId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Biases per vertex and weights per undirected edge.
///
/// Every vertex that appears in the network has a bias entry (possibly
/// zero); weights may only reference declared vertices.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NetworkParameters {
    biases: BTreeMap<VertexId, C64>,
    weights: BTreeMap<(VertexId, VertexId), C64>,
}

fn edge_key(a: VertexId, b: VertexId) -> (VertexId, VertexId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl NetworkParameters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, vertex: VertexId, bias: C64) {
        self.biases.insert(vertex, bias);
    }

    pub fn set_bias(&mut self, vertex: VertexId, bias: C64) -> Result<()> {
        match self.biases.get_mut(&vertex) {
            Some(b) => {
                *b = bias;
                Ok(())
            }
            None => Err(NqsError::Config(format!("undeclared vertex {vertex}"))),
        }
    }

    /// Adds a new undirected edge. Self-loops, undeclared endpoints and
    /// duplicates are rejected.
    pub fn add_weight(&mut self, a: VertexId, b: VertexId, w: C64) -> Result<()> {
        if a == b {
            return Err(NqsError::Config(format!("self-loop on {a}")));
        }
        for v in [a, b] {
            if !self.biases.contains_key(&v) {
                return Err(NqsError::Config(format!("weight references undeclared vertex {v}")));
            }
        }
        let key = edge_key(a, b);
        if self.weights.contains_key(&key) {
            return Err(NqsError::Config(format!("duplicate edge {a}-{b}")));
        }
        self.weights.insert(key, w);
        Ok(())
    }

    pub fn bias(&self, v: VertexId) -> Option<C64> {
        self.biases.get(&v).copied()
    }

    pub fn weight(&self, a: VertexId, b: VertexId) -> Option<C64> {
        self.weights.get(&edge_key(a, b)).copied()
    }

    pub fn biases(&self) -> impl Iterator<Item = (VertexId, C64)> + '_ {
        self.biases.iter().map(|(k, v)| (*k, *v))
    }

    pub fn weights(&self) -> impl Iterator<Item = ((VertexId, VertexId), C64)> + '_ {
        self.weights.iter().map(|(k, v)| (*k, *v))
    }

    pub fn count(&self, layer: Layer) -> usize {
        self.biases.keys().filter(|v| v.layer == layer).count()
    }

    /// Vertex indices of each layer must be 0..count without gaps.
    pub(crate) fn check_contiguous(&self) -> Result<()> {
        for layer in [Layer::Visible, Layer::Hidden, Layer::Deep] {
            for (expected, v) in self.biases.keys().filter(|v| v.layer == layer).enumerate() {
                if v.index != expected {
                    return Err(NqsError::Config(format!(
                        "vertex indices must be contiguous, missing {}",
                        VertexId { layer, index: expected }
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeRecord {
    from: VertexId,
    to: VertexId,
    value: C64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsRecord {
    biases: BTreeMap<VertexId, C64>,
    weights: Vec<EdgeRecord>,
}

impl Serialize for NetworkParameters {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ParamsRecord {
            biases: self.biases.clone(),
            weights: self
                .weights
                .iter()
                .map(|(&(from, to), &value)| EdgeRecord { from, to, value })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for NetworkParameters {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rec = ParamsRecord::deserialize(d)?;
        let mut p = NetworkParameters { biases: rec.biases, weights: BTreeMap::new() };
        for e in rec.weights {
            p.add_weight(e.from, e.to, e.value).map_err(serde::de::Error::custom)?;
        }
        Ok(p)
    }
}
