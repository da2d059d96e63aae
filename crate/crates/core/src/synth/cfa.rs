//! Controlled full adder (CFA) truth tables and the V4 gadget layout.
//!
//! A CFA is a full adder whose `in1` operand is gated by an `enable` bit:
//! with `enable` true it behaves as a standard full adder, with `enable`
//! false as if `in1` were false. Virtual-chain variants conjoin equivalences
//! that mirror a chained signal onto a neighbor-tile qubit, so the chain is
//! enforced by the gadget formula itself where no direct coupler exists.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ising::{Interval, RangeSpec};
use crate::synth::{GadgetSpec, SharingConstraint, TruthTable};
use crate::topology::{build_pegasus, CouplerProfile, RelQubit, H, V};
use crate::Result;

/// CFA flavors by number of virtually chained outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CfaVariant {
    /// Plain adder: `in2, in1, enable, c_in, c_out, out`.
    Basic,
    /// Adds `enable_out` with `enable <-> enable_out` (the V4 gadget).
    VirtualEnable,
    /// Additionally mirrors `in1` onto `in1_out` (V2-style chaining).
    VirtualEnableIn1,
}

impl CfaVariant {
    pub fn var_names(self) -> Vec<String> {
        let mut names: Vec<String> =
            ["in2", "in1", "enable", "c_in", "c_out", "out"].map(String::from).to_vec();
        match self {
            CfaVariant::Basic => {}
            CfaVariant::VirtualEnable => names.push("enable_out".into()),
            CfaVariant::VirtualEnableIn1 => {
                names.push("enable_out".into());
                names.push("in1_out".into());
            }
        }
        names
    }
}

/// The adder relation on core signals:
/// `c_out <-> ((c_in and ((enable and in1) or in2)) or ((enable and in1) and in2))`
/// and `out <-> ((enable and in1) xor in2 xor c_in)`.
pub fn cfa_core(in2: bool, in1: bool, enable: bool, c_in: bool, c_out: bool, out: bool) -> bool {
    let gated = enable && in1;
    let c_out_expected = (c_in && (gated || in2)) || (gated && in2);
    let out_expected = (gated ^ in2) ^ c_in;
    c_out == c_out_expected && out == out_expected
}

/// Predicate over the variant's variable vector, bit `k` of `assignment`
/// being variable `k` of [`CfaVariant::var_names`].
pub fn cfa_predicate(variant: CfaVariant, assignment: u32) -> bool {
    let bit = |k: usize| (assignment >> k) & 1 == 1;
    let core = cfa_core(bit(0), bit(1), bit(2), bit(3), bit(4), bit(5));
    match variant {
        CfaVariant::Basic => core,
        CfaVariant::VirtualEnable => core && bit(6) == bit(2),
        CfaVariant::VirtualEnableIn1 => core && bit(6) == bit(2) && bit(7) == bit(1),
    }
}

/// Truth table of a CFA variant, with its variable names.
pub fn cfa_truth_table(variant: CfaVariant) -> (Vec<String>, TruthTable) {
    let names = variant.var_names();
    let table = TruthTable::from_fn(names.len(), |z| cfa_predicate(variant, z));
    (names, table)
}

/// Role -> position relative to the gadget's home tile for the V4 layout.
///
/// Core inputs live in the home tile; `c_out` and `enable_out` sit on the
/// 45-degree neighbor's `c_in` and `enable` qubits, and `out` on the
/// 0-degree neighbor's `in2` qubit, which is where qubit sharing overlays
/// adjacent cells. The ancilla positions are a documented assumption of this
/// layout.
pub const CFA_V4_ROLES: [(&str, RelQubit); 11] = [
    ("in1", RelQubit { tile_row: 0, tile_col: 0, local: V(0) }),
    ("a0", RelQubit { tile_row: 0, tile_col: 0, local: V(1) }),
    ("enable", RelQubit { tile_row: 0, tile_col: 0, local: V(2) }),
    ("c_in", RelQubit { tile_row: 0, tile_col: 0, local: V(3) }),
    ("in2", RelQubit { tile_row: 0, tile_col: 0, local: H(0) }),
    ("a1", RelQubit { tile_row: 0, tile_col: 0, local: H(1) }),
    ("a2", RelQubit { tile_row: 0, tile_col: 0, local: H(2) }),
    ("a3", RelQubit { tile_row: 0, tile_col: 0, local: H(3) }),
    ("enable_out", RelQubit { tile_row: 1, tile_col: -1, local: V(2) }),
    ("c_out", RelQubit { tile_row: 1, tile_col: -1, local: V(3) }),
    ("out", RelQubit { tile_row: 0, tile_col: 1, local: H(0) }),
];

pub const CFA_V4_ANCILLAE: [&str; 4] = ["a0", "a1", "a2", "a3"];

/// Sharing constraints for overlaid V4 cells: shared-qubit bias sums stay in
/// the bias range and the one shared coupler's sum in the coupling range.
pub fn cfa_v4_sharing(ranges: RangeSpec) -> Vec<SharingConstraint> {
    vec![
        SharingConstraint::bias_sum("c_in", "c_out", ranges.bias),
        SharingConstraint::bias_sum("enable", "enable_out", ranges.bias),
        SharingConstraint::bias_sum("in2", "out", ranges.bias),
        SharingConstraint::coupling_sum(
            ("enable", "c_in"),
            ("enable_out", "c_out"),
            ranges.coupling,
        ),
    ]
}

/// Assemble the V4 CFA gadget spec on a minimal bounded grid that carries
/// the home tile plus the two neighbor tiles the layout reaches into.
pub fn cfa_v4_gadget_spec(ranges: RangeSpec) -> Result<GadgetSpec> {
    let topo = build_pegasus(2, 3, CouplerProfile::bounded());
    let home = (0i64, 1i64);
    let mut layout = BTreeMap::new();
    for (role, rel) in CFA_V4_ROLES {
        let (r, c) = topo
            .canonical_tile(home.0 + rel.tile_row, home.1 + rel.tile_col)
            .expect("gadget tile in range");
        layout.insert(role.to_string(), topo.flat_at(r, c, rel.local));
    }
    let (names, truth) = cfa_truth_table(CfaVariant::VirtualEnable);
    GadgetSpec::on_topology(
        "cfa_v4",
        names,
        CFA_V4_ANCILLAE.iter().map(|s| s.to_string()).collect(),
        layout,
        cfa_v4_sharing(ranges),
        truth,
        ranges,
        &topo,
    )
}

/// Interval helper for tests and ad-hoc specs.
pub fn interval(lo: f64, hi: f64) -> Interval {
    Interval::new(lo, hi)
}
