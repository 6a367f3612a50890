use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::bm::RbmState;
use crate::error::{NqsError, Result};
use crate::spin::SpinConfiguration;
use crate::state::{LogAmplitude, NqsState, C64};

/// Relative singular-value cutoff of the compression sweep.
pub const SVD_CUTOFF: f64 = 1e-12;
pub const DEFAULT_MAX_BOND: usize = 1 << 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MpsBoundary {
    #[default]
    Open,
    Periodic,
}

/// Rank-3 tensor A[left][physical][right], physical dimension 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SiteJson", into = "SiteJson")]
pub struct SiteTensor {
    left: usize,
    right: usize,
    data: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteJson {
    dims: [usize; 3],
    data: Vec<C64>,
}

impl TryFrom<SiteJson> for SiteTensor {
    type Error = NqsError;
    fn try_from(j: SiteJson) -> Result<Self> {
        if j.dims[1] != 2 {
            return Err(NqsError::Shape { expected: 2, got: j.dims[1] });
        }
        SiteTensor::new(j.dims[0], j.dims[2], j.data)
    }
}

impl From<SiteTensor> for SiteJson {
    fn from(s: SiteTensor) -> Self {
        SiteJson { dims: [s.left, 2, s.right], data: s.data }
    }
}

impl SiteTensor {
    pub fn new(left: usize, right: usize, data: Vec<C64>) -> Result<Self> {
        if left == 0 || right == 0 {
            return Err(NqsError::Domain("bond dimension must be positive".into()));
        }
        if data.len() != left * 2 * right {
            return Err(NqsError::Shape { expected: left * 2 * right, got: data.len() });
        }
        Ok(Self { left, right, data })
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn get(&self, l: usize, p: usize, r: usize) -> C64 {
        self.data[(l * 2 + p) * self.right + r]
    }

    /// The (left x right) matrix selected by physical index `p`.
    pub fn slice(&self, p: usize) -> DMatrix<C64> {
        DMatrix::from_fn(self.left, self.right, |l, r| self.get(l, p, r))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MpsState {
    boundary: MpsBoundary,
    sites: Vec<SiteTensor>,
}

impl MpsState {
    pub fn new(sites: Vec<SiteTensor>, boundary: MpsBoundary) -> Result<Self> {
        if sites.is_empty() {
            return Err(NqsError::Domain("an MPS needs at least one site".into()));
        }
        for w in sites.windows(2) {
            if w[0].right != w[1].left {
                return Err(NqsError::Shape { expected: w[0].right, got: w[1].left });
            }
        }
        let (first, last) = (sites[0].left, sites[sites.len() - 1].right);
        match boundary {
            MpsBoundary::Open if first != 1 || last != 1 => {
                return Err(NqsError::Domain(format!("open MPS end bonds must be 1, got {first} and {last}")))
            }
            MpsBoundary::Periodic if first != last => return Err(NqsError::Shape { expected: last, got: first }),
            _ => {}
        }
        Ok(Self { boundary, sites })
    }

    pub fn sites(&self) -> &[SiteTensor] {
        &self.sites
    }

    pub fn boundary(&self) -> MpsBoundary {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Dimensions of the n - 1 internal bonds.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.sites[..self.sites.len() - 1].iter().map(|s| s.right).collect()
    }

    pub fn max_bond(&self) -> usize {
        self.sites.iter().map(|s| s.left.max(s.right)).max().unwrap_or(1)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: MpsState = serde_json::from_str(text)?;
        MpsState::new(raw.sites, raw.boundary)
    }
}

impl NqsState for MpsState {
    fn n_visible(&self) -> usize {
        self.sites.len()
    }

    fn log_amplitude(&self, v: &SpinConfiguration) -> Result<LogAmplitude> {
        Ok(LogAmplitude::from_amplitude(mps_amplitude(self, v)?))
    }
}

/// Product of the selected physical slices, left to right (trace if periodic).
pub fn mps_amplitude(mps: &MpsState, v: &SpinConfiguration) -> Result<C64> {
    if v.len() != mps.len() {
        return Err(NqsError::Shape { expected: mps.len(), got: v.len() });
    }
    let mut acc = DMatrix::<C64>::identity(mps.sites[0].left, mps.sites[0].left);
    for (site, bit) in mps.sites.iter().zip(v.bits()) {
        acc = acc * site.slice(*bit as usize);
    }
    Ok(acc.trace())
}

/// An MPS equal to the RBM amplitude up to exp(log_constant).
#[derive(Debug, Clone, PartialEq)]
pub struct MpsConversion {
    pub mps: MpsState,
    /// Psi(v) = exp(log_constant) * mps_amplitude(v).
    pub log_constant: C64,
    /// Hidden units crossing each internal bond; the bond dimension is at
    /// most 2^crossings.
    pub crossings: Vec<usize>,
}

/// Exact conversion of an RBM along the site order 0..n. Hidden units are
/// carried on the bonds between their first and last connected site, then
/// a left-to-right SVD sweep drops singular values below `SVD_CUTOFF`
/// relative to the largest.
pub fn rbm_to_mps(state: &RbmState, max_bond: usize) -> Result<MpsConversion> {
    let n = state.n_visible();
    let m = state.n_hidden();
    let vv = state.visible_convention().values();
    let hv = state.hidden_convention().values();
    let mut log_constant = C64::new(0.0, 0.0);

    let spans: Vec<Option<(usize, usize)>> = (0..m)
        .map(|j| {
            let c = state.connections(j);
            c.first().map(|&lo| (lo, *c.last().unwrap()))
        })
        .collect();
    for j in 0..m {
        if spans[j].is_none() {
            let b = state.hidden_bias()[j];
            let z = (b * hv[0]).exp() + (b * hv[1]).exp();
            match LogAmplitude::from_amplitude(z) {
                LogAmplitude::Finite(l) => log_constant += l,
                LogAmplitude::Zero => return Err(NqsError::ZeroAmplitude(format!("hidden unit {j} annihilates the state"))),
            }
        }
    }
    let crossing = |cut: usize| -> Vec<usize> {
        (0..m).filter(|&j| matches!(spans[j], Some((lo, hi)) if lo <= cut && cut < hi)).collect()
    };
    let crossings: Vec<usize> = (0..n.saturating_sub(1)).map(|c| crossing(c).len()).collect();
    for (cut, &k) in crossings.iter().enumerate() {
        if k >= usize::BITS as usize - 1 || 1usize << k > max_bond {
            return Err(NqsError::Capacity {
                what: format!("bond dimension between sites {cut} and {}", cut + 1),
                value: if k >= 63 { usize::MAX } else { 1 << k },
                limit: max_bond,
            });
        }
    }

    let mut raw = Vec::with_capacity(n);
    for s in 0..n {
        let left_units = if s == 0 { vec![] } else { crossing(s - 1) };
        let right_units = if s + 1 == n { vec![] } else { crossing(s) };
        let local: Vec<usize> = (0..m).filter(|&j| spans[j] == Some((s, s))).collect();
        let (dl, dr) = (1usize << left_units.len(), 1usize << right_units.len());
        let mut data = vec![C64::new(0.0, 0.0); dl * 2 * dr];
        for p in 0..2 {
            let x = vv[p];
            let base = state.visible_bias()[s] * x;
            let mut local_factor = C64::new(1.0, 0.0);
            for &j in &local {
                let field = state.hidden_bias()[j] + state.weights()[(s, j)] * x;
                local_factor *= (field * hv[0]).exp() + (field * hv[1]).exp();
            }
            for l in 0..dl {
                for r in 0..dr {
                    let mut h: Vec<Option<usize>> = vec![None; m];
                    let mut consistent = true;
                    for (k, &j) in left_units.iter().enumerate() {
                        h[j] = Some(l >> k & 1);
                    }
                    for (k, &j) in right_units.iter().enumerate() {
                        let bit = r >> k & 1;
                        if h[j].is_some_and(|b| b != bit) {
                            consistent = false;
                            break;
                        }
                        h[j] = Some(bit);
                    }
                    if !consistent {
                        continue;
                    }
                    let mut exponent = base;
                    for (j, hj) in h.iter().enumerate() {
                        if let Some(bit) = hj {
                            exponent += state.weights()[(s, j)] * x * hv[*bit];
                            if spans[j].is_some_and(|(lo, _)| lo == s) {
                                exponent += state.hidden_bias()[j] * hv[*bit];
                            }
                        }
                    }
                    data[(l * 2 + p) * dr + r] = exponent.exp() * local_factor;
                }
            }
        }
        raw.push(SiteTensor::new(dl, dr, data)?);
    }
    let (sites, scale) = compress(raw)?;
    log_constant += scale;
    Ok(MpsConversion { mps: MpsState::new(sites, MpsBoundary::Open)?, log_constant, crossings })
}

/// Left-to-right SVD sweep. Returns the new sites and the log of the scale
/// factored out along the way.
fn compress(raw: Vec<SiteTensor>) -> Result<(Vec<SiteTensor>, C64)> {
    let n = raw.len();
    let mut log_scale = 0.0;
    let mut carry = DMatrix::<C64>::identity(1, 1);
    let mut out = Vec::with_capacity(n);
    for (s, site) in raw.into_iter().enumerate() {
        let dl = carry.nrows();
        // M[(l, p), r] = sum_k carry[l, k] A[k, p, r]
        let mut m = DMatrix::<C64>::zeros(dl * 2, site.right);
        for p in 0..2 {
            let prod = &carry * site.slice(p);
            for l in 0..dl {
                for r in 0..site.right {
                    m[(l * 2 + p, r)] = prod[(l, r)];
                }
            }
        }
        let norm = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if norm == 0.0 {
            return Err(NqsError::ZeroAmplitude("state vanishes identically".into()));
        }
        m /= C64::new(norm, 0.0);
        log_scale += norm.ln();
        if s + 1 == n {
            out.push(SiteTensor::new(dl, 1, m.iter().copied().collect::<Vec<_>>())?);
            break;
        }
        let svd = m.svd(true, true);
        let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
        let sigma = svd.singular_values;
        let smax = sigma.max();
        let keep = sigma.iter().filter(|&&x| x > SVD_CUTOFF * smax).count().max(1);
        let mut order: Vec<usize> = (0..sigma.len()).collect();
        order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
        let order = &order[..keep];
        let mut data = vec![C64::new(0.0, 0.0); dl * 2 * keep];
        for row in 0..dl * 2 {
            for (k, &c) in order.iter().enumerate() {
                data[row * keep + k] = u[(row, c)];
            }
        }
        out.push(SiteTensor::new(dl, keep, data)?);
        carry = DMatrix::from_fn(keep, site.right, |k, r| vt[(order[k], r)] * sigma[order[k]]);
    }
    Ok((out, C64::new(log_scale, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bm::rbm_log_amplitude;
    use crate::spin::{all_configurations, Convention};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_equal(s: &RbmState, conv: &MpsConversion) {
        for v in all_configurations(s.n_visible(), s.visible_convention()) {
            let want = rbm_log_amplitude(s, &v).unwrap().amplitude();
            let got = conv.log_constant.exp() * mps_amplitude(&conv.mps, &v).unwrap();
            assert!((got - want).norm() <= 1e-10 * want.norm().max(1e-300), "{v}: {got} vs {want}");
        }
    }

    #[test]
    fn product_rbm_has_unit_bonds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut s = RbmState::random(5, 3, 0.5, &mut rng);
        s.weights_mut().fill(C64::new(0.0, 0.0));
        let conv = rbm_to_mps(&s, DEFAULT_MAX_BOND).unwrap();
        assert_eq!(conv.mps.bond_dims(), vec![1; 4]);
        check_equal(&s, &conv);
    }

    #[test]
    fn one_unit_on_two_sites() {
        let mut s = RbmState::zeros(4, 1);
        s.weights_mut()[(1, 0)] = C64::new(0.8, 0.3);
        s.weights_mut()[(2, 0)] = C64::new(-0.5, 0.9);
        s.hidden_bias_mut()[0] = C64::new(0.2, 0.0);
        let conv = rbm_to_mps(&s, DEFAULT_MAX_BOND).unwrap();
        let bonds = conv.mps.bond_dims();
        assert_eq!(bonds[0], 1);
        assert!(bonds[1] <= 2);
        assert_eq!(bonds[2], 1);
        assert_eq!(conv.crossings, vec![0, 1, 0]);
        check_equal(&s, &conv);
    }

    #[test]
    fn random_local_rbms_match_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for conv_h in [Convention::ZeroOne, Convention::PlusMinusOne] {
            for window in 1..=3 {
                let s = RbmState::random_local(6, window, 2, 0.7, &mut rng).unwrap().with_conventions(Convention::ZeroOne, conv_h);
                let conv = rbm_to_mps(&s, DEFAULT_MAX_BOND).unwrap();
                check_equal(&s, &conv);
                for (d, c) in conv.mps.bond_dims().iter().zip(&conv.crossings) {
                    assert!(*d <= 1 << c);
                }
            }
        }
    }

    #[test]
    fn nonlocal_rbm_still_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = RbmState::random(6, 3, 0.5, &mut rng).with_conventions(Convention::PlusMinusOne, Convention::ZeroOne);
        check_equal(&s, &rbm_to_mps(&s, DEFAULT_MAX_BOND).unwrap());
    }

    #[test]
    fn capacity_error_names_cut() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = RbmState::random(5, 4, 0.5, &mut rng);
        match rbm_to_mps(&s, 8) {
            Err(NqsError::Capacity { what, .. }) => assert!(what.contains("sites 0 and 1"), "{what}"),
            other => panic!("{other:?}"),
        }
    }

    fn random_mps(rng: &mut ChaCha8Rng, n: usize, bond: usize, boundary: MpsBoundary) -> MpsState {
        let sites = (0..n)
            .map(|s| {
                let l = if s == 0 && boundary == MpsBoundary::Open { 1 } else { bond };
                let r = if s + 1 == n && boundary == MpsBoundary::Open { 1 } else { bond };
                let data = (0..l * 2 * r).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                SiteTensor::new(l, r, data).unwrap()
            })
            .collect();
        MpsState::new(sites, boundary).unwrap()
    }

    #[test]
    fn amplitude_matches_explicit_bond_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for boundary in [MpsBoundary::Open, MpsBoundary::Periodic] {
            let mps = random_mps(&mut rng, 5, 3, boundary);
            for v in all_configurations(5, Convention::ZeroOne) {
                // sum over every assignment of the 6 bond indices
                let mut total = C64::new(0.0, 0.0);
                for code in 0..3usize.pow(6) {
                    let b: Vec<usize> = (0..6).map(|k| code / 3usize.pow(k) % 3).collect();
                    let mut term = C64::new(1.0, 0.0);
                    let mut valid = true;
                    for s in 0..5 {
                        let (l, r) = (b[s], if s == 4 && boundary == MpsBoundary::Periodic { b[0] } else { b[s + 1] });
                        let site = &mps.sites()[s];
                        if l >= site.left() || r >= site.right() {
                            valid = false;
                            break;
                        }
                        term *= site.get(l, v.bit(s) as usize, r);
                    }
                    let open_fixed = if boundary == MpsBoundary::Periodic { b[5] == 0 } else { b[0] == 0 && b[5] == 0 };
                    if valid && open_fixed {
                        total += term;
                    }
                }
                assert!((mps_amplitude(&mps, &v).unwrap() - total).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn trivial_slices_give_one() {
        let sites = (0..4).map(|_| SiteTensor::new(1, 1, vec![C64::new(1.0, 0.0); 2]).unwrap()).collect();
        let mps = MpsState::new(sites, MpsBoundary::Open).unwrap();
        let v = SpinConfiguration::new(vec![1, 0, 1, 1], Convention::ZeroOne);
        assert_eq!(mps_amplitude(&mps, &v).unwrap(), C64::new(1.0, 0.0));
    }

    #[test]
    fn json_round_trip_and_validation() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mps = random_mps(&mut rng, 4, 2, MpsBoundary::Open);
        let back = MpsState::from_json(&mps.to_json().unwrap()).unwrap();
        assert_eq!(back, mps);
        let bad = r#"{"boundary":"open","sites":[{"dims":[1,2,2],"data":[[1,0],[1,0],[1,0],[1,0]]}]}"#;
        assert!(MpsState::from_json(bad).is_err());
    }
}
