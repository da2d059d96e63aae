//! Penalty-function synthesis for small Boolean gadgets.
//!
//! A gadget is a Boolean function over named decision variables placed on a
//! subgraph of the hardware, plus ancilla variables that give the synthesis
//! enough degrees of freedom. The synthesized Ising model must reach energy
//! 0 (minimizing over ancillae) exactly on satisfying assignments and at
//! least `gap` on falsifying ones; the synthesizer maximizes that gap.
//!
//! Every "for all assignments" condition expands to one linear inequality
//! over the coefficient vector, so for a fixed table of ancilla witnesses
//! (one satisfying ancilla completion pinned to energy 0 per satisfying
//! decision row) the problem is a linear program. The witness table itself
//! is searched: exhaustively when tiny, otherwise by alternating
//! LP/reassignment ascent with greedy row moves and seeded restarts.
//!
//! [`verify_penalty`] is the exact oracle: it enumerates all states and is
//! independent of the synthesis path.

mod cfa;
mod lp;

pub use cfa::{
    cfa_core, cfa_predicate, cfa_truth_table, cfa_v4_gadget_spec, cfa_v4_sharing, CfaVariant,
    CFA_V4_ANCILLAE, CFA_V4_ROLES,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ising::{Interval, IsingModel, RangeSpec, SpinState};
use crate::topology::{coupler_key, Topology};
use crate::{Error, Qubit, Result};

/// Equality tolerance used by the verification oracle.
pub const VERIFY_TOL: f64 = 1e-6;

/// A total Boolean function over `num_vars` variables, stored as a bitset
/// indexed by assignment (bit `k` of the index is variable `k`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthTable {
    num_vars: usize,
    bits: Vec<u64>,
}

impl TruthTable {
    pub fn from_fn(num_vars: usize, mut f: impl FnMut(u32) -> bool) -> Self {
        assert!(num_vars <= 24);
        let n = 1usize << num_vars;
        let mut bits = vec![0u64; (n + 63) / 64];
        for idx in 0..n {
            if f(idx as u32) {
                bits[idx / 64] |= 1 << (idx % 64);
            }
        }
        TruthTable { num_vars, bits }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn eval(&self, assignment: u32) -> bool {
        let idx = assignment as usize;
        (self.bits[idx / 64] >> (idx % 64)) & 1 == 1
    }

    pub fn satisfying_count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn satisfying_rows(&self) -> Vec<u32> {
        (0..1u32 << self.num_vars).filter(|&x| self.eval(x)).collect()
    }
}

/// Reference to a coefficient of the gadget, by variable role name.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaRef {
    Bias(String),
    Coupling(String, String),
}

/// Constraint forcing the sum of two coefficients into an interval, so two
/// overlaid copies of the gadget never push a shared qubit or coupler out of
/// hardware range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharingConstraint {
    pub members: (ThetaRef, ThetaRef),
    pub range: Interval,
}

impl SharingConstraint {
    pub fn bias_sum(a: &str, b: &str, range: Interval) -> Self {
        SharingConstraint {
            members: (ThetaRef::Bias(a.into()), ThetaRef::Bias(b.into())),
            range,
        }
    }

    pub fn coupling_sum(a: (&str, &str), b: (&str, &str), range: Interval) -> Self {
        SharingConstraint {
            members: (
                ThetaRef::Coupling(a.0.into(), a.1.into()),
                ThetaRef::Coupling(b.0.into(), b.1.into()),
            ),
            range,
        }
    }
}

/// A named Boolean function with its placement on the hardware subgraph.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GadgetSpec {
    pub name: String,
    pub decision_vars: Vec<String>,
    pub ancilla_vars: Vec<String>,
    /// Role name -> qubit. Injective over decision and ancilla variables.
    pub layout: BTreeMap<String, Qubit>,
    /// Couplers available to the synthesis (induced by the topology on the
    /// layout image).
    pub couplers: BTreeSet<(Qubit, Qubit)>,
    pub sharing: Vec<SharingConstraint>,
    pub truth: TruthTable,
    pub ranges: RangeSpec,
}

impl GadgetSpec {
    /// Assemble a spec, inducing the coupler set from `topo`.
    pub fn on_topology(
        name: &str,
        decision_vars: Vec<String>,
        ancilla_vars: Vec<String>,
        layout: BTreeMap<String, Qubit>,
        sharing: Vec<SharingConstraint>,
        truth: TruthTable,
        ranges: RangeSpec,
        topo: &Topology,
    ) -> Result<GadgetSpec> {
        let qubits: Vec<Qubit> = layout.values().copied().collect();
        let mut couplers = BTreeSet::new();
        for (i, &a) in qubits.iter().enumerate() {
            for &b in &qubits[i + 1..] {
                if topo.is_usable_coupler(a, b) {
                    couplers.insert(coupler_key(a, b));
                }
            }
        }
        let spec = GadgetSpec {
            name: name.into(),
            decision_vars,
            ancilla_vars,
            layout,
            couplers,
            sharing,
            truth,
            ranges,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let nv = self.decision_vars.len() + self.ancilla_vars.len();
        if nv > 16 {
            return Err(Error::InvalidArgument(format!(
                "gadget has {nv} variables; brute-force verification caps at 16"
            )));
        }
        if self.truth.num_vars() != self.decision_vars.len() {
            return Err(Error::InvalidArgument(
                "truth table arity does not match decision variables".into(),
            ));
        }
        let mut seen = BTreeSet::new();
        for name in self.var_names() {
            let q = self
                .layout
                .get(name)
                .ok_or_else(|| Error::InvalidArgument(format!("no layout entry for {name}")))?;
            if !seen.insert(*q) {
                return Err(Error::InvalidArgument(format!("layout is not injective at {name}")));
            }
        }
        for sc in &self.sharing {
            for member in [&sc.members.0, &sc.members.1] {
                match member {
                    ThetaRef::Bias(v) => {
                        if !self.layout.contains_key(v) {
                            return Err(Error::InvalidArgument(format!(
                                "sharing constraint references unknown variable {v}"
                            )));
                        }
                    }
                    ThetaRef::Coupling(u, v) => {
                        let (qu, qv) = (self.qubit_of(u)?, self.qubit_of(v)?);
                        if !self.couplers.contains(&coupler_key(qu, qv)) {
                            return Err(Error::InvalidArgument(format!(
                                "sharing constraint references missing coupler ({u}, {v})"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn var_names(&self) -> impl Iterator<Item = &String> {
        self.decision_vars.iter().chain(self.ancilla_vars.iter())
    }

    pub fn qubit_of(&self, name: &str) -> Result<Qubit> {
        self.layout
            .get(name)
            .copied()
            .ok_or_else(|| Error::InvalidArgument(format!("unknown variable {name}")))
    }

    fn num_decision(&self) -> usize {
        self.decision_vars.len()
    }

    fn num_ancilla(&self) -> usize {
        self.ancilla_vars.len()
    }
}

/// Indexed view of a gadget's coefficient space shared by the oracle and the
/// synthesizer. Slot 0 is the offset, then one slot per variable bias, then
/// one per coupler.
pub(crate) struct GadgetIndex {
    pub nx: usize,
    pub na: usize,
    pub var_qubits: Vec<Qubit>,
    pub pairs: Vec<(usize, usize)>,
    pub pair_keys: Vec<(Qubit, Qubit)>,
}

impl GadgetIndex {
    pub fn new(spec: &GadgetSpec) -> Result<GadgetIndex> {
        let nx = spec.num_decision();
        let na = spec.num_ancilla();
        let var_qubits: Vec<Qubit> = spec
            .var_names()
            .map(|n| spec.qubit_of(n))
            .collect::<Result<_>>()?;
        let index_of: BTreeMap<Qubit, usize> =
            var_qubits.iter().enumerate().map(|(i, &q)| (q, i)).collect();
        let mut pairs = Vec::new();
        let mut pair_keys = Vec::new();
        for &(a, b) in &spec.couplers {
            let (&ia, &ib) = (index_of.get(&a).unwrap(), index_of.get(&b).unwrap());
            pairs.push((ia.min(ib), ia.max(ib)));
            pair_keys.push((a, b));
        }
        Ok(GadgetIndex { nx, na, var_qubits, pairs, pair_keys })
    }

    pub fn num_vars(&self) -> usize {
        self.var_qubits.len()
    }

    pub fn num_slots(&self) -> usize {
        1 + self.num_vars() + self.pairs.len()
    }

    /// Extract the coefficient vector of `model`, verifying that the model
    /// mentions nothing outside the gadget subgraph.
    pub fn theta_of_model(&self, model: &IsingModel) -> Result<Vec<f64>> {
        let image: BTreeSet<Qubit> = self.var_qubits.iter().copied().collect();
        for q in model.variables() {
            if !image.contains(&q) {
                return Err(Error::LayoutMismatch);
            }
        }
        let keyset: BTreeSet<(Qubit, Qubit)> = self.pair_keys.iter().copied().collect();
        for k in model.couplings.keys() {
            if !keyset.contains(k) {
                return Err(Error::LayoutMismatch);
            }
        }
        let mut theta = vec![0.0; self.num_slots()];
        theta[0] = model.offset;
        for (k, &q) in self.var_qubits.iter().enumerate() {
            theta[1 + k] = model.biases.get(&q).copied().unwrap_or(0.0);
        }
        for (e, key) in self.pair_keys.iter().enumerate() {
            theta[1 + self.num_vars() + e] = model.couplings.get(key).copied().unwrap_or(0.0);
        }
        Ok(theta)
    }

    pub fn model_of_theta(&self, theta: &[f64], ranges: RangeSpec) -> IsingModel {
        let mut m = IsingModel::new(ranges);
        m.offset = theta[0];
        for (k, &q) in self.var_qubits.iter().enumerate() {
            m.biases.insert(q, theta[1 + k]);
        }
        for (e, &key) in self.pair_keys.iter().enumerate() {
            m.couplings.insert(key, theta[1 + self.num_vars() + e]);
        }
        m
    }

    /// Energy of assignment `z` (bit k = variable k true) under `theta`.
    pub fn energy(&self, theta: &[f64], z: u32) -> f64 {
        let spin = |k: usize| if (z >> k) & 1 == 1 { 1.0 } else { -1.0 };
        let mut e = theta[0];
        for k in 0..self.num_vars() {
            e += theta[1 + k] * spin(k);
        }
        for (idx, &(i, j)) in self.pairs.iter().enumerate() {
            e += theta[1 + self.num_vars() + idx] * spin(i) * spin(j);
        }
        e
    }

    /// Minimum energy over ancilla completions of decision row `x`, with the
    /// first argmin ancilla index.
    pub fn min_over_ancillae(&self, theta: &[f64], x: u32) -> (f64, u32) {
        let mut best = f64::INFINITY;
        let mut arg = 0u32;
        for a in 0..1u32 << self.na {
            let z = x | (a << self.nx);
            let e = self.energy(theta, z);
            if e < best {
                best = e;
                arg = a;
            }
        }
        (best, arg)
    }
}

/// Result of exhaustively checking a penalty function against its gadget.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub valid: bool,
    /// Minimum ancilla-minimized energy over falsifying decision rows;
    /// infinite for tautologies.
    pub gap: f64,
    /// Falsifying rows whose ancilla-minimized energy equals the gap
    /// (within [`VERIFY_TOL`]).
    pub num_first_excited: usize,
    /// Satisfying decision row -> ancilla completion reaching energy 0.
    pub witness_table: BTreeMap<u32, u32>,
    /// Worst |min energy| over satisfying rows (diagnostic).
    pub max_sat_residual: f64,
}

/// Exhaustively enumerate all `2^(|x|+|a|)` states of `pf` and check the
/// penalty-function conditions for `spec`.
pub fn verify_penalty(pf: &IsingModel, spec: &GadgetSpec) -> Result<VerificationReport> {
    spec.validate()?;
    let index = GadgetIndex::new(spec)?;
    let theta = index.theta_of_model(pf)?;
    Ok(verify_theta(&index, &theta, &spec.truth))
}

pub(crate) fn verify_theta(
    index: &GadgetIndex,
    theta: &[f64],
    truth: &TruthTable,
) -> VerificationReport {
    let mut gap = f64::INFINITY;
    let mut max_sat_residual: f64 = 0.0;
    let mut witness_table = BTreeMap::new();
    let mut sat_ok = true;
    for x in 0..1u32 << index.nx {
        let (min, arg) = index.min_over_ancillae(theta, x);
        if truth.eval(x) {
            max_sat_residual = max_sat_residual.max(min.abs());
            if min.abs() <= VERIFY_TOL {
                witness_table.insert(x, arg);
            } else {
                sat_ok = false;
            }
        } else {
            gap = gap.min(min);
        }
    }
    let mut num_first_excited = 0;
    if gap.is_finite() {
        for x in 0..1u32 << index.nx {
            if !truth.eval(x) {
                let (min, _) = index.min_over_ancillae(theta, x);
                if (min - gap).abs() <= VERIFY_TOL {
                    num_first_excited += 1;
                }
            }
        }
    }
    let valid = sat_ok && gap > VERIFY_TOL;
    VerificationReport { valid, gap, num_first_excited, witness_table, max_sat_residual }
}

/// Synthesis objective.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Objective {
    MaxGap,
    /// Maximize the gap, then re-solve with the gap pinned and greedily lift
    /// falsifying rows off the first excited level.
    MaxGapThenMinFirstExcited,
}

/// Search budget for the witness-table search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthBudget {
    pub restarts: usize,
    pub max_lp_solves: usize,
    pub seed: u64,
    /// Stop as soon as this gap is reached (known optimum short-circuit).
    pub target_gap: Option<f64>,
    /// Exhaustive witness enumeration when the combination count is below
    /// this limit.
    pub exhaustive_limit: usize,
    /// Candidate ancilla rewitnesses tried per row in a greedy sweep.
    pub greedy_candidates: usize,
    /// Slack forced above the gap when lifting first-excited rows.
    pub first_excited_epsilon: f64,
}

impl Default for SynthBudget {
    fn default() -> Self {
        SynthBudget {
            restarts: 8,
            max_lp_solves: 4000,
            seed: 7,
            target_gap: None,
            exhaustive_limit: 4096,
            greedy_candidates: 4,
            first_excited_epsilon: 1e-3,
        }
    }
}

/// Outcome of a successful synthesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthOutcome {
    pub model: IsingModel,
    pub report: VerificationReport,
    pub lp_solves: usize,
}

/// Synthesize a penalty function for `spec`.
///
/// Degenerate cases: a tautology synthesizes to the zero model; a
/// contradiction is an error (no satisfying row anchors energy 0).
pub fn synthesize(spec: &GadgetSpec, objective: Objective, budget: &SynthBudget) -> Result<SynthOutcome> {
    spec.validate()?;
    let index = GadgetIndex::new(spec)?;
    let sat_rows = spec.truth.satisfying_rows();
    if sat_rows.is_empty() {
        return Err(Error::Contradiction);
    }
    if sat_rows.len() == 1usize << index.nx {
        let mut model = IsingModel::new(spec.ranges);
        for &q in &index.var_qubits {
            model.biases.insert(q, 0.0);
        }
        let report = verify_theta(&index, &index.theta_of_model(&model)?, &spec.truth);
        return Ok(SynthOutcome { model, report, lp_solves: 0 });
    }

    let mut search = lp::WitnessSearch::new(spec, &index, &sat_rows, budget)?;
    let best = search.run()?;
    let (theta, gap) = match best {
        Some(b) => b,
        None => {
            return Err(Error::Infeasible(
                "no witness table admitted a positive gap within budget".into(),
            ))
        }
    };
    if gap <= VERIFY_TOL {
        return Err(Error::Infeasible(format!(
            "best achievable gap {gap:.6} is not positive"
        )));
    }

    let theta = match objective {
        Objective::MaxGap => theta,
        Objective::MaxGapThenMinFirstExcited => search.minimize_first_excited(&theta, gap)?,
    };

    let mut model = index.model_of_theta(&theta, spec.ranges);
    let report = verify_theta(&index, &index.theta_of_model(&model)?, &spec.truth);
    if !report.valid {
        return Err(Error::Infeasible(format!(
            "LP solution failed exact verification (gap {}, residual {})",
            report.gap, report.max_sat_residual
        )));
    }
    model.gap_hint = Some(report.gap);
    Ok(SynthOutcome { model, report, lp_solves: search.lp_solves() })
}

/// Equivalence-chain penalty along `path`: each link contributes offset `c`
/// and coupling `-c`, i.e. the per-link term `c - c*z*z'` (at the default
/// strength 2 this is `2 - 2*z*z'`). Aligned spins cost 0, each broken link
/// `2c`. Note the term rewards equal spins even though such chains are
/// conventionally described by their negative coupling sign.
pub fn chain_penalty(
    topo: &Topology,
    path: &[Qubit],
    strength: f64,
    ranges: RangeSpec,
) -> Result<IsingModel> {
    if !(strength > 0.0 && strength <= ranges.coupling.lo.abs() + 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "chain strength {strength} outside (0, {}]",
            ranges.coupling.lo.abs()
        )));
    }
    let mut m = IsingModel::new(ranges);
    for w in path.windows(2) {
        if !topo.is_usable_coupler(w[0], w[1]) {
            return Err(Error::NotCoupled(w[0], w[1]));
        }
        m.offset += strength;
        m.add_coupling(w[0], w[1], -strength);
    }
    m.gap_hint = Some(2.0 * strength);
    Ok(m)
}

/// Default chain strength: the magnitude of the strongest (most negative)
/// coupling, which performs best when it matches the gadget's own minimum
/// coupling.
pub const DEFAULT_CHAIN_STRENGTH: f64 = 2.0;
