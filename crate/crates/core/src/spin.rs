//! Spin configurations and basis indexing.
//!
//! Configurations are stored as bits. Site 0 is the most significant bit of
//! the basis index (big-endian), everywhere in the crate.

use serde::{Deserialize, Serialize};

/// Numeric value a bit takes when fed into a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Convention {
    /// bit b has value b
    #[default]
    ZeroOne,
    /// bit b has value 1 - 2b, the Pauli-Z eigenvalue
    PlusMinusOne,
}

impl Convention {
    #[inline]
    pub fn value(self, bit: u8) -> f64 {
        match self {
            Convention::ZeroOne => bit as f64,
            Convention::PlusMinusOne => 1.0 - 2.0 * bit as f64,
        }
    }

    /// The two values a unit can take, bit 0 first.
    pub fn values(self) -> [f64; 2] {
        [self.value(0), self.value(1)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpinConfiguration {
    bits: Vec<u8>,
    convention: Convention,
}

impl SpinConfiguration {
    /// Panics if any entry is not 0 or 1.
    pub fn new(bits: Vec<u8>, convention: Convention) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        Self { bits, convention }
    }

    pub fn zeros(n: usize, convention: Convention) -> Self {
        Self {
            bits: vec![0; n],
            convention,
        }
    }

    /// Builds a configuration from signed values (+1 -> bit 0, -1 -> bit 1).
    pub fn from_spins(spins: &[i8]) -> Self {
        let bits = spins
            .iter()
            .map(|&s| {
                assert!(s == 1 || s == -1, "spins must be +-1");
                u8::from(s < 0)
            })
            .collect();
        Self {
            bits,
            convention: Convention::PlusMinusOne,
        }
    }

    /// Big-endian: site 0 is the most significant bit.
    pub fn from_index(index: usize, n: usize, convention: Convention) -> Self {
        let bits = (0..n).map(|i| ((index >> (n - 1 - i)) & 1) as u8).collect();
        Self { bits, convention }
    }

    pub fn index(&self) -> usize {
        self.bits
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bit(&self, site: usize) -> u8 {
        self.bits[site]
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn with_convention(mut self, convention: Convention) -> Self {
        self.convention = convention;
        self
    }

    /// Network input value of a site under the carried convention.
    #[inline]
    pub fn value(&self, site: usize) -> f64 {
        self.convention.value(self.bits[site])
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.bits.len()).map(|i| self.value(i)).collect()
    }

    /// Pauli-Z eigenvalue of a site, independent of the convention.
    #[inline]
    pub fn z(&self, site: usize) -> f64 {
        1.0 - 2.0 * self.bits[site] as f64
    }

    pub fn flip(&mut self, site: usize) {
        self.bits[site] ^= 1;
    }

    pub fn flipped(&self, sites: &[usize]) -> Self {
        let mut out = self.clone();
        for &s in sites {
            out.flip(s);
        }
        out
    }

    pub fn magnetization(&self) -> i64 {
        self.bits.iter().map(|&b| 1 - 2 * b as i64).sum()
    }
}

impl std::fmt::Display for SpinConfiguration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// Iterates all 2^n configurations in basis-index order.
pub fn all_configurations(
    n: usize,
    convention: Convention,
) -> impl Iterator<Item = SpinConfiguration> {
    (0..1usize << n).map(move |i| SpinConfiguration::from_index(i, n, convention))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_is_big_endian() {
        let v = SpinConfiguration::new(vec![1, 0, 0], Convention::ZeroOne);
        assert_eq!(v.index(), 4);
        let w = SpinConfiguration::from_index(1, 3, Convention::ZeroOne);
        assert_eq!(w.bits(), &[0, 0, 1]);
    }

    #[test]
    fn index_round_trip() {
        for i in 0..32 {
            assert_eq!(SpinConfiguration::from_index(i, 5, Convention::ZeroOne).index(), i);
        }
    }

    #[test]
    fn plus_minus_values_follow_pauli_z() {
        let v = SpinConfiguration::new(vec![0, 1], Convention::PlusMinusOne);
        assert_eq!(v.values(), vec![1.0, -1.0]);
        assert_eq!(v.z(1), -1.0);
        assert_eq!(SpinConfiguration::from_spins(&[1, -1]), v);
    }

    #[test]
    #[should_panic]
    fn rejects_non_binary_bits() {
        SpinConfiguration::new(vec![0, 2], Convention::ZeroOne);
    }
}
