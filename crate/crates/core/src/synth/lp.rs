//! Linear-programming backend of the synthesizer.
//!
//! For a fixed witness table the gap-maximization problem is linear in the
//! coefficient vector: every assignment contributes one row. The witness
//! table is improved by alternating ascent (re-solve, then re-witness each
//! satisfying row at its current argmin) plus greedy single-row moves, with
//! seeded restarts.

use std::collections::BTreeMap;

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ising::Interval;
use crate::synth::{GadgetIndex, GadgetSpec, SynthBudget, ThetaRef, VERIFY_TOL};
use crate::topology::coupler_key;
use crate::{Error, Result};

/// Sparse LP row in slot space: (slot, coefficient) plus the gap column.
struct RowTemplate {
    terms: Vec<(usize, f64)>,
}

pub(crate) struct WitnessSearch<'a> {
    index: &'a GadgetIndex,
    sat_rows: &'a [u32],
    budget: SynthBudget,
    rows: Vec<RowTemplate>,
    sharing: Vec<(Vec<(usize, f64)>, Interval)>,
    bias_bounds: Interval,
    coupling_bounds: Interval,
    solves: usize,
}

impl<'a> WitnessSearch<'a> {
    pub fn new(
        spec: &GadgetSpec,
        index: &'a GadgetIndex,
        sat_rows: &'a [u32],
        budget: &SynthBudget,
    ) -> Result<WitnessSearch<'a>> {
        let nv = index.num_vars();
        let total = 1usize << (index.nx + index.na);
        let mut rows = Vec::with_capacity(total);
        for z in 0..total as u32 {
            let spin = |k: usize| if (z >> k) & 1 == 1 { 1.0 } else { -1.0 };
            let mut terms = Vec::with_capacity(index.num_slots());
            terms.push((0, 1.0));
            for k in 0..nv {
                terms.push((1 + k, spin(k)));
            }
            for (e, &(i, j)) in index.pairs.iter().enumerate() {
                terms.push((1 + nv + e, spin(i) * spin(j)));
            }
            rows.push(RowTemplate { terms });
        }

        let slot_of = |theta: &ThetaRef| -> Result<usize> {
            match theta {
                ThetaRef::Bias(name) => {
                    let q = spec.qubit_of(name)?;
                    index
                        .var_qubits
                        .iter()
                        .position(|&v| v == q)
                        .map(|k| 1 + k)
                        .ok_or_else(|| Error::InvalidArgument(format!("unplaced variable {name}")))
                }
                ThetaRef::Coupling(u, v) => {
                    let key = coupler_key(spec.qubit_of(u)?, spec.qubit_of(v)?);
                    index
                        .pair_keys
                        .iter()
                        .position(|&k| k == key)
                        .map(|e| 1 + nv + e)
                        .ok_or_else(|| {
                            Error::InvalidArgument(format!("missing coupler ({u}, {v})"))
                        })
                }
            }
        };
        let mut sharing = Vec::new();
        for sc in &spec.sharing {
            let a = slot_of(&sc.members.0)?;
            let b = slot_of(&sc.members.1)?;
            sharing.push((vec![(a, 1.0), (b, 1.0)], sc.range));
        }

        Ok(WitnessSearch {
            index,
            sat_rows,
            budget: budget.clone(),
            rows,
            sharing,
            bias_bounds: spec.ranges.bias,
            coupling_bounds: spec.ranges.coupling,
            solves: 0,
        })
    }

    pub fn lp_solves(&self) -> usize {
        self.solves
    }

    fn z_of(&self, x: u32, a: u32) -> usize {
        (x | (a << self.index.nx)) as usize
    }

    /// Solve the gap LP for one witness table. Returns the coefficient
    /// vector (without the gap column) and the achieved gap.
    fn solve(&mut self, witness: &[u32], pinned_gap: Option<f64>, lifted: &[u32]) -> Option<(Vec<f64>, f64)> {
        self.solves += 1;
        let nv = self.index.num_vars();
        let ne = self.index.pairs.len();
        let mut problem = Problem::new(OptimizationDirection::Maximize);
        let mut vars: Vec<Variable> = Vec::with_capacity(self.index.num_slots());
        vars.push(problem.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)));
        for _ in 0..nv {
            vars.push(problem.add_var(0.0, (self.bias_bounds.lo, self.bias_bounds.hi)));
        }
        for _ in 0..ne {
            vars.push(problem.add_var(0.0, (self.coupling_bounds.lo, self.coupling_bounds.hi)));
        }
        let gap = match pinned_gap {
            Some(g) => problem.add_var(1.0, (g, g)),
            None => problem.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY)),
        };

        let row_terms = |z: usize, with_gap: bool| -> Vec<(Variable, f64)> {
            let mut terms: Vec<(Variable, f64)> =
                self.rows[z].terms.iter().map(|&(slot, coef)| (vars[slot], coef)).collect();
            if with_gap {
                terms.push((gap, -1.0));
            }
            terms
        };

        let witness_of: BTreeMap<u32, u32> =
            self.sat_rows.iter().copied().zip(witness.iter().copied()).collect();
        let lift_eps = self.budget.first_excited_epsilon;
        for x in 0..1u32 << self.index.nx {
            match witness_of.get(&x) {
                Some(&w) => {
                    for a in 0..1u32 << self.index.na {
                        let z = self.z_of(x, a);
                        let op = if a == w { ComparisonOp::Eq } else { ComparisonOp::Ge };
                        problem.add_constraint(&row_terms(z, false)[..], op, 0.0);
                    }
                }
                None => {
                    // Falsifying rows sit at or above the gap; lifted rows
                    // strictly above it.
                    let rhs = if lifted.contains(&x) { lift_eps } else { 0.0 };
                    for a in 0..1u32 << self.index.na {
                        let z = self.z_of(x, a);
                        problem.add_constraint(&row_terms(z, true)[..], ComparisonOp::Ge, rhs);
                    }
                }
            }
        }
        for (terms, range) in &self.sharing {
            let lp_terms: Vec<(Variable, f64)> =
                terms.iter().map(|&(slot, coef)| (vars[slot], coef)).collect();
            problem.add_constraint(&lp_terms[..], ComparisonOp::Ge, range.lo);
            problem.add_constraint(&lp_terms[..], ComparisonOp::Le, range.hi);
        }

        let solution = problem.solve().ok()?;
        let theta: Vec<f64> = vars.iter().map(|&v| solution[v]).collect();
        Some((theta, solution[gap]))
    }

    /// Re-witness every satisfying row at its argmin under `theta`. Keeping
    /// any zero-energy argmin preserves LP feasibility, so the subsequent
    /// solve can only match or improve the gap.
    fn rewitness(&self, theta: &[f64], witness: &mut [u32]) -> bool {
        let mut changed = false;
        for (r, &x) in self.sat_rows.iter().enumerate() {
            let (_, arg) = self.index.min_over_ancillae(theta, x);
            if witness[r] != arg {
                witness[r] = arg;
                changed = true;
            }
        }
        changed
    }

    /// Candidate replacement ancillae for a row: lowest current energy first
    /// (excluding the incumbent witness).
    fn candidates(&self, theta: &[f64], x: u32, incumbent: u32) -> Vec<u32> {
        let mut scored: Vec<(f64, u32)> = (0..1u32 << self.index.na)
            .filter(|&a| a != incumbent)
            .map(|a| (self.index.energy(theta, x | (a << self.index.nx)), a))
            .collect();
        scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        scored.truncate(self.budget.greedy_candidates);
        scored.into_iter().map(|(_, a)| a).collect()
    }

    fn reached_target(&self, gap: f64) -> bool {
        self.budget.target_gap.map(|t| gap >= t - 1e-9).unwrap_or(false)
    }

    /// Full search. Returns the best coefficient vector and its gap.
    pub fn run(&mut self) -> Result<Option<(Vec<f64>, f64)>> {
        let na_options = 1u64 << self.index.na;
        let combos = (na_options as f64).powi(self.sat_rows.len() as i32);
        let mut best: Option<(Vec<f64>, f64)> = None;

        let mut consider = |cand: Option<(Vec<f64>, f64)>, best: &mut Option<(Vec<f64>, f64)>| {
            if let Some((theta, gap)) = cand {
                if best.as_ref().map(|(_, g)| gap > *g).unwrap_or(true) {
                    *best = Some((theta, gap));
                }
            }
        };

        if combos <= self.budget.exhaustive_limit as f64 {
            let total = combos as u64;
            for combo in 0..total {
                let mut witness = vec![0u32; self.sat_rows.len()];
                let mut c = combo;
                for w in witness.iter_mut() {
                    *w = (c % na_options) as u32;
                    c /= na_options;
                }
                let cand = self.solve(&witness, None, &[]);
                consider(cand, &mut best);
                if let Some((_, g)) = &best {
                    if self.reached_target(*g) {
                        return Ok(best);
                    }
                }
            }
            return Ok(best);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(self.budget.seed);
        'restarts: for _ in 0..self.budget.restarts {
            let mut witness: Vec<u32> =
                (0..self.sat_rows.len()).map(|_| rng.gen_range(0..na_options as u32)).collect();

            // Alternating ascent to a fixpoint.
            let mut current = match self.solve(&witness, None, &[]) {
                Some(v) => v,
                None => continue 'restarts,
            };
            for _ in 0..32 {
                if !self.rewitness(&current.0, &mut witness) {
                    break;
                }
                match self.solve(&witness, None, &[]) {
                    Some(v) => current = v,
                    None => break,
                }
                if self.solves >= self.budget.max_lp_solves {
                    break;
                }
            }
            consider(Some(current.clone()), &mut best);
            if self.reached_target(best.as_ref().unwrap().1) {
                break 'restarts;
            }

            // Greedy single-row moves, candidates ordered by current energy.
            let mut improved = true;
            while improved && self.solves < self.budget.max_lp_solves {
                improved = false;
                for r in 0..witness.len() {
                    let x = self.sat_rows[r];
                    for a in self.candidates(&current.0, x, witness[r]) {
                        if self.solves >= self.budget.max_lp_solves {
                            break;
                        }
                        let saved = witness[r];
                        witness[r] = a;
                        match self.solve(&witness, None, &[]) {
                            Some((theta, gap)) if gap > current.1 + 1e-12 => {
                                current = (theta, gap);
                                improved = true;
                                break;
                            }
                            _ => witness[r] = saved,
                        }
                    }
                }
                consider(Some(current.clone()), &mut best);
                if self.reached_target(best.as_ref().unwrap().1) {
                    break 'restarts;
                }
            }
            if self.solves >= self.budget.max_lp_solves {
                break;
            }
        }
        Ok(best)
    }

    /// Second objective pass: pin the gap and greedily force falsifying rows
    /// strictly above it, keeping each lift only if the LP stays feasible.
    /// The witness table is recovered from the incumbent coefficients.
    pub fn minimize_first_excited(&mut self, theta: &[f64], gap: f64) -> Result<Vec<f64>> {
        let mut witness: Vec<u32> = self
            .sat_rows
            .iter()
            .map(|&x| self.index.min_over_ancillae(theta, x).1)
            .collect();
        // The incumbent theta must stay feasible under its own witnesses.
        self.rewitness(theta, &mut witness);

        let mut current = theta.to_vec();
        let mut lifted: Vec<u32> = Vec::new();
        loop {
            // Falsifying rows currently at the gap, in index order.
            let mut at_gap: Vec<u32> = Vec::new();
            for x in 0..1u32 << self.index.nx {
                if self.sat_rows.contains(&x) || lifted.contains(&x) {
                    continue;
                }
                let (min, _) = self.index.min_over_ancillae(&current, x);
                if (min - gap).abs() <= VERIFY_TOL {
                    at_gap.push(x);
                }
            }
            let mut progressed = false;
            for x in at_gap {
                if self.solves >= self.budget.max_lp_solves {
                    return Ok(current);
                }
                lifted.push(x);
                match self.solve(&witness, Some(gap), &lifted) {
                    Some((theta, _)) => {
                        current = theta;
                        progressed = true;
                    }
                    None => {
                        lifted.pop();
                    }
                }
            }
            if !progressed {
                break;
            }
        }
        Ok(current)
    }
}
