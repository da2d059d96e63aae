//! Ising penalty functions: representation, evaluation, combination,
//! variable fixing with range rescaling, and JSON serialization.
//!
//! Energy of a state `z` is `offset + sum_i bias_i * z_i +
//! sum_(i,j) coupling_ij * z_i * z_j` with spins in `{-1, +1}`; the Boolean
//! reading is true <-> +1, false <-> -1. A model whose minimum over ancilla
//! completions is 0 exactly on satisfying assignments doubles as a penalty
//! function, so this type carries an optional `gap_hint`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::topology::coupler_key;
use crate::{Error, Qubit, Result};

/// Tolerance for range-validation checks.
pub const RANGE_TOL: f64 = 1e-9;

/// Closed interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.lo - RANGE_TOL && v <= self.hi + RANGE_TOL
    }

    /// Largest factor `<= 1` that brings `v` inside when multiplied in.
    /// Only shrinking toward zero is supported (intervals here contain 0).
    fn rescale_factor(&self, v: f64) -> f64 {
        if self.contains(v) {
            1.0
        } else if v > self.hi {
            self.hi / v
        } else {
            self.lo / v
        }
    }
}

/// Hardware coefficient ranges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RangeSpec {
    pub bias: Interval,
    pub coupling: Interval,
}

impl RangeSpec {
    /// Advantage-class ranges: biases in [-4, 4], couplings in [-2, 1].
    pub const fn pegasus() -> Self {
        RangeSpec { bias: Interval::new(-4.0, 4.0), coupling: Interval::new(-2.0, 1.0) }
    }

    /// Older-generation ranges: biases in [-2, 2], couplings in [-1, 1].
    pub const fn chimera() -> Self {
        RangeSpec { bias: Interval::new(-2.0, 2.0), coupling: Interval::new(-1.0, 1.0) }
    }
}

impl Default for RangeSpec {
    fn default() -> Self {
        RangeSpec::pegasus()
    }
}

/// Spin assignment over a set of qubits; values are -1 or +1.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SpinState(pub BTreeMap<Qubit, i8>);

impl SpinState {
    pub fn new() -> Self {
        SpinState(BTreeMap::new())
    }

    pub fn set(&mut self, q: Qubit, spin: i8) {
        debug_assert!(spin == 1 || spin == -1);
        self.0.insert(q, spin);
    }

    pub fn set_bool(&mut self, q: Qubit, value: bool) {
        self.set(q, if value { 1 } else { -1 });
    }

    pub fn get(&self, q: Qubit) -> Option<i8> {
        self.0.get(&q).copied()
    }

    pub fn get_bool(&self, q: Qubit) -> Option<bool> {
        self.get(q).map(|s| s > 0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Qubit, i8)> + '_ {
        self.0.iter().map(|(&q, &s)| (q, s))
    }

    pub fn qubits(&self) -> impl Iterator<Item = Qubit> + '_ {
        self.0.keys().copied()
    }

    pub fn flip(&mut self, q: Qubit) {
        if let Some(s) = self.0.get_mut(&q) {
            *s = -*s;
        }
    }

    /// Pack spins of `order` into hex (bit 1 = spin +1), little-endian in bit
    /// order; used by the sample-set file format.
    pub fn pack_hex(&self, order: &[Qubit]) -> String {
        let mut bytes = vec![0u8; (order.len() + 7) / 8];
        for (k, q) in order.iter().enumerate() {
            if self.get(*q) == Some(1) {
                bytes[k / 8] |= 1 << (k % 8);
            }
        }
        let mut s = String::with_capacity(bytes.len() * 2);
        for b in bytes {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }

    pub fn unpack_hex(hex: &str, order: &[Qubit]) -> Result<SpinState> {
        let mut bytes = Vec::with_capacity(hex.len() / 2);
        if hex.len() % 2 != 0 {
            return Err(Error::InvalidArgument("odd-length hex state".into()));
        }
        for i in (0..hex.len()).step_by(2) {
            let b = u8::from_str_radix(&hex[i..i + 2], 16)
                .map_err(|e| Error::InvalidArgument(format!("bad hex state: {e}")))?;
            bytes.push(b);
        }
        if bytes.len() < (order.len() + 7) / 8 {
            return Err(Error::InvalidArgument("hex state shorter than variable order".into()));
        }
        let mut st = SpinState::new();
        for (k, q) in order.iter().enumerate() {
            let bit = (bytes[k / 8] >> (k % 8)) & 1;
            st.set(*q, if bit == 1 { 1 } else { -1 });
        }
        Ok(st)
    }
}

impl FromIterator<(Qubit, i8)> for SpinState {
    fn from_iter<T: IntoIterator<Item = (Qubit, i8)>>(iter: T) -> Self {
        SpinState(iter.into_iter().collect())
    }
}

/// An Ising model / penalty function.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct IsingModel {
    pub offset: f64,
    pub biases: BTreeMap<Qubit, f64>,
    pub couplings: BTreeMap<(Qubit, Qubit), f64>,
    pub ranges: RangeSpec,
    pub gap_hint: Option<f64>,
}

impl IsingModel {
    pub fn new(ranges: RangeSpec) -> Self {
        IsingModel { offset: 0.0, biases: BTreeMap::new(), couplings: BTreeMap::new(), ranges, gap_hint: None }
    }

    pub fn add_bias(&mut self, q: Qubit, value: f64) {
        *self.biases.entry(q).or_insert(0.0) += value;
    }

    pub fn add_coupling(&mut self, a: Qubit, b: Qubit, value: f64) {
        assert_ne!(a, b, "self-coupling");
        *self.couplings.entry(coupler_key(a, b)).or_insert(0.0) += value;
    }

    /// All variables mentioned by the model.
    pub fn variables(&self) -> BTreeSet<Qubit> {
        let mut vars: BTreeSet<Qubit> = self.biases.keys().copied().collect();
        for &(a, b) in self.couplings.keys() {
            vars.insert(a);
            vars.insert(b);
        }
        vars
    }

    pub fn num_variables(&self) -> usize {
        self.variables().len()
    }

    /// Evaluate the energy of `state`, which must cover every variable.
    pub fn energy(&self, state: &SpinState) -> Result<f64> {
        let mut e = self.offset;
        for (&q, &h) in &self.biases {
            let s = state.get(q).ok_or(Error::MissingVariable(q))? as f64;
            e += h * s;
        }
        for (&(a, b), &j) in &self.couplings {
            let sa = state.get(a).ok_or(Error::MissingVariable(a))? as f64;
            let sb = state.get(b).ok_or(Error::MissingVariable(b))? as f64;
            e += j * sa * sb;
        }
        Ok(e)
    }

    /// Pointwise sum. Offsets, biases and couplings add; `gap_hint` is the
    /// minimum of the inputs' hints, matching how the gap of a conjunction of
    /// penalty functions composes.
    pub fn sum<'a>(models: impl IntoIterator<Item = &'a IsingModel>) -> IsingModel {
        let mut iter = models.into_iter();
        let first = match iter.next() {
            Some(m) => m.clone(),
            None => return IsingModel::default(),
        };
        let mut acc = first;
        for m in iter {
            acc.offset += m.offset;
            for (&q, &h) in &m.biases {
                acc.add_bias(q, h);
            }
            for (&(a, b), &j) in &m.couplings {
                acc.add_coupling(a, b, j);
            }
            acc.gap_hint = match (acc.gap_hint, m.gap_hint) {
                (Some(x), Some(y)) => Some(x.min(y)),
                (x, None) => x,
                (None, y) => y,
            };
        }
        acc
    }

    /// Substitute the given spins, folding constants into the offset and
    /// linear terms into biases. If any coefficient leaves its range, every
    /// coefficient (offset and `gap_hint` included) is multiplied by the
    /// largest factor `<= 1` restoring validity. Returns the reduced model
    /// and that factor.
    pub fn fix_variables(&self, assignment: &SpinState) -> Result<(IsingModel, f64)> {
        let vars = self.variables();
        for q in assignment.qubits() {
            if !vars.contains(&q) {
                return Err(Error::MissingVariable(q));
            }
        }
        let mut reduced = IsingModel::new(self.ranges);
        reduced.offset = self.offset;
        reduced.gap_hint = self.gap_hint;
        for (&q, &h) in &self.biases {
            match assignment.get(q) {
                Some(s) => reduced.offset += h * s as f64,
                None => reduced.add_bias(q, h),
            }
        }
        for (&(a, b), &j) in &self.couplings {
            match (assignment.get(a), assignment.get(b)) {
                (Some(sa), Some(sb)) => reduced.offset += j * (sa as f64) * (sb as f64),
                (Some(sa), None) => reduced.add_bias(b, j * sa as f64),
                (None, Some(sb)) => reduced.add_bias(a, j * sb as f64),
                (None, None) => reduced.add_coupling(a, b, j),
            }
        }
        let mut scale = 1.0f64;
        for &h in reduced.biases.values() {
            scale = scale.min(reduced.ranges.bias.rescale_factor(h));
        }
        for &j in reduced.couplings.values() {
            scale = scale.min(reduced.ranges.coupling.rescale_factor(j));
        }
        if scale < 1.0 {
            reduced.offset *= scale;
            for v in reduced.biases.values_mut() {
                *v *= scale;
            }
            for v in reduced.couplings.values_mut() {
                *v *= scale;
            }
            if let Some(g) = reduced.gap_hint.as_mut() {
                *g *= scale;
            }
        }
        Ok((reduced, scale))
    }

    /// List coefficients outside `ranges` (tolerance [`RANGE_TOL`]).
    pub fn validate_ranges(&self, ranges: &RangeSpec) -> RangeReport {
        let mut violations = Vec::new();
        for (&q, &h) in &self.biases {
            if !ranges.bias.contains(h) {
                violations.push(RangeViolation::Bias { qubit: q, value: h });
            }
        }
        for (&(a, b), &j) in &self.couplings {
            if !ranges.coupling.contains(j) {
                violations.push(RangeViolation::Coupling { qubits: (a, b), value: j });
            }
        }
        RangeReport { violations }
    }

    /// Relabel variables through `map` (panics on collisions in debug).
    pub fn relabel(&self, map: &BTreeMap<Qubit, Qubit>) -> IsingModel {
        let mut out = IsingModel::new(self.ranges);
        out.offset = self.offset;
        out.gap_hint = self.gap_hint;
        for (&q, &h) in &self.biases {
            out.add_bias(*map.get(&q).unwrap_or(&q), h);
        }
        for (&(a, b), &j) in &self.couplings {
            out.add_coupling(*map.get(&a).unwrap_or(&a), *map.get(&b).unwrap_or(&b), j);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RangeViolation {
    Bias { qubit: Qubit, value: f64 },
    Coupling { qubits: (Qubit, Qubit), value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeReport {
    pub violations: Vec<RangeViolation>,
}

impl RangeReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// On-disk model format: `{offset, ranges, biases: {id: v}, couplings:
/// [[i, j, v]], gap_hint, varmap?}`. Coefficient round-trips are bit-exact.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub offset: f64,
    pub ranges: RangeSpec,
    pub biases: BTreeMap<String, f64>,
    pub couplings: Vec<(Qubit, Qubit, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap_hint: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub varmap: Option<BTreeMap<String, Qubit>>,
}

impl ModelFile {
    pub fn from_model(m: &IsingModel, varmap: Option<BTreeMap<String, Qubit>>) -> Self {
        ModelFile {
            offset: m.offset,
            ranges: m.ranges,
            biases: m.biases.iter().map(|(q, v)| (q.to_string(), *v)).collect(),
            couplings: m.couplings.iter().map(|(&(a, b), &v)| (a, b, v)).collect(),
            gap_hint: m.gap_hint,
            varmap,
        }
    }

    pub fn into_model(self) -> Result<IsingModel> {
        let mut m = IsingModel::new(self.ranges);
        m.offset = self.offset;
        m.gap_hint = self.gap_hint;
        for (k, v) in self.biases {
            let q: Qubit = k
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad qubit id {k:?}")))?;
            m.biases.insert(q, v);
        }
        for (a, b, v) in self.couplings {
            m.couplings.insert(coupler_key(a, b), v);
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain_link(a: Qubit, b: Qubit) -> IsingModel {
        // 2 - 2*z*z': zero when aligned, 4 when broken.
        let mut m = IsingModel::new(RangeSpec::pegasus());
        m.offset = 2.0;
        m.add_coupling(a, b, -2.0);
        m.gap_hint = Some(4.0);
        m
    }

    #[test]
    fn zero_model_energy_is_zero() {
        let m = IsingModel::new(RangeSpec::pegasus());
        let s = SpinState::new();
        assert_eq!(m.energy(&s).unwrap(), 0.0);
    }

    #[test]
    fn chain_link_energy() {
        let m = chain_link(0, 1);
        let aligned: SpinState = [(0, 1), (1, 1)].into_iter().collect();
        let opposite: SpinState = [(0, 1), (1, -1)].into_iter().collect();
        assert_eq!(m.energy(&aligned).unwrap(), 0.0);
        assert_eq!(m.energy(&opposite).unwrap(), 4.0);
    }

    #[test]
    fn energy_matches_term_by_term_oracle() {
        // Independent summation oracle over a seeded 10-variable model.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut m = IsingModel::new(RangeSpec::pegasus());
        m.offset = rng.gen_range(-2.0..2.0);
        for q in 0..10u32 {
            m.add_bias(q, rng.gen_range(-4.0..4.0));
        }
        for a in 0..10u32 {
            for b in (a + 1)..10u32 {
                if rng.gen_bool(0.4) {
                    m.add_coupling(a, b, rng.gen_range(-2.0..1.0));
                }
            }
        }
        for _ in 0..20 {
            let s: SpinState =
                (0..10u32).map(|q| (q, if rng.gen_bool(0.5) { 1i8 } else { -1 })).collect();
            let mut oracle = m.offset;
            for (&q, &h) in &m.biases {
                oracle += h * s.get(q).unwrap() as f64;
            }
            for (&(a, b), &j) in &m.couplings {
                oracle += j * (s.get(a).unwrap() as f64) * (s.get(b).unwrap() as f64);
            }
            assert_eq!(m.energy(&s).unwrap(), oracle);
        }
    }

    #[test]
    fn energy_errors_on_missing_variable() {
        let m = chain_link(0, 1);
        let s: SpinState = [(0, 1)].into_iter().collect();
        assert!(matches!(m.energy(&s), Err(Error::MissingVariable(1))));
    }

    #[test]
    fn sum_of_one_is_identity() {
        let m = chain_link(0, 1);
        assert_eq!(IsingModel::sum([&m]), m);
    }

    #[test]
    fn sum_shares_qubits_and_adds_offsets() {
        let a = chain_link(0, 1);
        let b = chain_link(1, 2);
        let s = IsingModel::sum([&a, &b]);
        assert_eq!(s.offset, 4.0);
        assert_eq!(s.biases.get(&1).copied().unwrap_or(0.0), 0.0);
        assert_eq!(s.gap_hint, Some(4.0));
    }

    #[test]
    fn energy_is_linear_in_models() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let a = chain_link(0, 1);
        let mut b = IsingModel::new(RangeSpec::pegasus());
        b.offset = 0.25;
        b.add_bias(1, -1.5);
        b.add_coupling(1, 2, 0.75);
        let total = IsingModel::sum([&a, &b]);
        for _ in 0..32 {
            let st: SpinState =
                (0..3u32).map(|q| (q, if rng.gen_bool(0.5) { 1i8 } else { -1 })).collect();
            let lhs = total.energy(&st).unwrap();
            let rhs = a.energy(&st).unwrap() + b.energy(&st).unwrap();
            assert!((lhs - rhs).abs() < 1e-12);
        }
    }

    #[test]
    fn fix_variables_worked_example() {
        // 2 + 4*x1 + x2 + x1*x2 with x2 = +1 becomes 3 + 5*x1, rescaled by
        // 4/5 into 12/5 + 4*x1.
        let mut m = IsingModel::new(RangeSpec::pegasus());
        m.offset = 2.0;
        m.add_bias(1, 4.0);
        m.add_bias(2, 1.0);
        m.add_coupling(1, 2, 1.0);
        let fix: SpinState = [(2, 1)].into_iter().collect();
        let (reduced, scale) = m.fix_variables(&fix).unwrap();
        assert!((scale - 0.8).abs() < 1e-12);
        assert!((reduced.offset - 12.0 / 5.0).abs() < 1e-12);
        assert!((reduced.biases[&1] - 4.0).abs() < 1e-12);
        assert!(reduced.couplings.is_empty());
    }

    #[test]
    fn fix_nothing_is_identity() {
        let m = chain_link(0, 1);
        let (reduced, scale) = m.fix_variables(&SpinState::new()).unwrap();
        assert_eq!(scale, 1.0);
        assert_eq!(reduced, m);
    }

    #[test]
    fn fix_variables_preserves_scaled_energy_over_all_completions() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 8u32;
        let mut m = IsingModel::new(RangeSpec::pegasus());
        m.offset = rng.gen_range(-1.0..1.0);
        for q in 0..n {
            m.add_bias(q, rng.gen_range(-4.0..4.0));
        }
        for a in 0..n {
            for b in (a + 1)..n {
                if rng.gen_bool(0.5) {
                    m.add_coupling(a, b, rng.gen_range(-2.0..1.0));
                }
            }
        }
        let fix: SpinState = [(0u32, 1i8), (3, -1), (5, 1)].into_iter().collect();
        let (reduced, scale) = m.fix_variables(&fix).unwrap();
        let free: Vec<Qubit> = (0..n).filter(|q| fix.get(*q).is_none()).collect();
        for bits in 0..(1u32 << free.len()) {
            let mut full = fix.clone();
            let mut restricted = SpinState::new();
            for (k, &q) in free.iter().enumerate() {
                let spin = if (bits >> k) & 1 == 1 { 1i8 } else { -1 };
                full.set(q, spin);
                restricted.set(q, spin);
            }
            let lhs = reduced.energy(&restricted).unwrap();
            let rhs = scale * m.energy(&full).unwrap();
            assert!((lhs - rhs).abs() < 1e-9, "lhs={lhs} rhs={rhs}");
        }
    }

    #[test]
    fn validate_ranges_flags_violations() {
        let mut m = IsingModel::new(RangeSpec::pegasus());
        m.add_bias(0, 4.5);
        m.add_coupling(0, 1, -2.0);
        let report = m.validate_ranges(&RangeSpec::pegasus());
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(report.violations[0], RangeViolation::Bias { qubit: 0, .. }));
        let mut ok = IsingModel::new(RangeSpec::pegasus());
        ok.add_bias(0, -4.0);
        ok.add_coupling(0, 1, 1.0);
        assert!(ok.validate_ranges(&RangeSpec::pegasus()).is_valid());
    }

    #[test]
    fn model_file_roundtrip_is_bit_exact() {
        let mut m = IsingModel::new(RangeSpec::pegasus());
        m.offset = 0.1 + 0.2; // deliberately non-representable sum
        m.add_bias(3, -1.000000000000004);
        m.add_bias(7, 2.0f64.powi(-40));
        m.add_coupling(3, 7, -0.3333333333333333);
        m.gap_hint = Some(4.0 / 3.0);
        let json = serde_json::to_string(&ModelFile::from_model(&m, None)).unwrap();
        let back: ModelFile = serde_json::from_str(&json).unwrap();
        let m2 = back.into_model().unwrap();
        assert_eq!(m.offset.to_bits(), m2.offset.to_bits());
        for (k, v) in &m.biases {
            assert_eq!(v.to_bits(), m2.biases[k].to_bits());
        }
        for (k, v) in &m.couplings {
            assert_eq!(v.to_bits(), m2.couplings[k].to_bits());
        }
    }

    #[test]
    fn pack_unpack_hex_roundtrip() {
        let order: Vec<Qubit> = (0..19).collect();
        let st: SpinState = order.iter().map(|&q| (q, if q % 3 == 0 { 1i8 } else { -1 })).collect();
        let hex = st.pack_hex(&order);
        let back = SpinState::unpack_hex(&hex, &order).unwrap();
        assert_eq!(st, back);
    }
}
