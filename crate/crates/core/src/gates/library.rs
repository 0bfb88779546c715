//! Built-in constraint library: 24 numbered gates plus OpenCheck.

use std::fmt;
use std::str::FromStr;

use super::{parse_gate, CompositePoly, GateError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateId {
    /// Numbered entries 0..=23.
    Table(u8),
    /// The OpenCheck row, which shares number 20 with the vanilla ZeroCheck.
    OpenCheck,
}

pub const BUILTIN_IDS: [GateId; 25] = {
    let mut ids = [GateId::OpenCheck; 25];
    let mut i = 0;
    while i < 24 {
        ids[i] = GateId::Table(i as u8);
        i += 1;
    }
    ids
};

const SOURCES: [&str; 24] = [
    include_str!("../../gates/00_verifiable_asics.gate"),
    include_str!("../../gates/01_spartan_1.gate"),
    include_str!("../../gates/02_spartan_2.gate"),
    include_str!("../../gates/03_halo2_nonzero_point.gate"),
    include_str!("../../gates/04_halo2_x_curve_check.gate"),
    include_str!("../../gates/05_halo2_y_curve_check.gate"),
    include_str!("../../gates/06_halo2_incomplete_add_1.gate"),
    include_str!("../../gates/07_halo2_incomplete_add_2.gate"),
    include_str!("../../gates/08_halo2_complete_add_1.gate"),
    include_str!("../../gates/09_halo2_complete_add_2.gate"),
    include_str!("../../gates/10_halo2_complete_add_3.gate"),
    include_str!("../../gates/11_halo2_complete_add_4.gate"),
    include_str!("../../gates/12_halo2_complete_add_5.gate"),
    include_str!("../../gates/13_halo2_complete_add_6.gate"),
    include_str!("../../gates/14_halo2_complete_add_7.gate"),
    include_str!("../../gates/15_halo2_complete_add_8.gate"),
    include_str!("../../gates/16_halo2_complete_add_9.gate"),
    include_str!("../../gates/17_halo2_complete_add_10.gate"),
    include_str!("../../gates/18_halo2_complete_add_11.gate"),
    include_str!("../../gates/19_halo2_complete_add_12.gate"),
    include_str!("../../gates/20_vanilla_zerocheck.gate"),
    include_str!("../../gates/21_vanilla_permcheck.gate"),
    include_str!("../../gates/22_jellyfish_zerocheck.gate"),
    include_str!("../../gates/23_jellyfish_permcheck.gate"),
];

const OPENCHECK: &str = include_str!("../../gates/opencheck.gate");

impl fmt::Display for GateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GateId::Table(n) => write!(f, "{n}"),
            GateId::OpenCheck => f.write_str("opencheck"),
        }
    }
}

impl FromStr for GateId {
    type Err = GateError;

    fn from_str(s: &str) -> Result<Self, GateError> {
        if s.eq_ignore_ascii_case("opencheck") {
            return Ok(GateId::OpenCheck);
        }
        match s.parse::<u8>() {
            Ok(n) if n < 24 => Ok(GateId::Table(n)),
            _ => Err(GateError::UnknownGate(s.to_string())),
        }
    }
}

/// Source text of a built-in gate.
pub fn builtin_gate_text(id: GateId) -> Result<&'static str, GateError> {
    match id {
        GateId::Table(n) => SOURCES
            .get(n as usize)
            .copied()
            .ok_or_else(|| GateError::UnknownGate(id.to_string())),
        GateId::OpenCheck => Ok(OPENCHECK),
    }
}

pub fn builtin_gate(id: GateId) -> Result<CompositePoly, GateError> {
    parse_gate(builtin_gate_text(id)?)
}

/// All 25 built-in gates in id order.
pub fn builtin_gates() -> Vec<CompositePoly> {
    BUILTIN_IDS
        .iter()
        .map(|&id| builtin_gate(id).expect("bundled gates parse"))
        .collect()
}

/// `q_1 w_1 + q_2 w_2 + q_3 w_1^{d-1} w_2 + q_c`, the degree-sweep polynomial.
pub fn sweep_gate(d: usize) -> CompositePoly {
    assert!(d >= 2, "sweep degree starts at 2");
    let text = format!(
        "gate sweep_d{d} (inputs: q_1:selector, q_2:selector, q_3:selector, q_c:selector, \
         w_1:witness, w_2:witness) {{ q_1*w_1 + q_2*w_2 + q_3*w_1^{}*w_2 + q_c }}",
        d - 1
    );
    parse_gate(&text).expect("sweep gate text is well formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::Role;

    fn g(n: u8) -> CompositePoly {
        builtin_gate(GateId::Table(n)).unwrap()
    }

    #[test]
    fn all_gates_parse() {
        let gates = builtin_gates();
        assert_eq!(gates.len(), 25);
        for gate in &gates {
            assert!(!gate.terms.is_empty(), "{}", gate.name);
            assert_eq!(
                gate.distinct_mles(),
                gate.inputs.len(),
                "{} declares unused inputs",
                gate.name
            );
        }
    }

    #[test]
    fn verifiable_asics_shape() {
        let gate = g(0);
        assert_eq!(gate.terms.len(), 3);
        assert_eq!(gate.degree(), 3);
    }

    #[test]
    fn incomplete_addition_degree() {
        assert_eq!(g(6).degree(), 4);
        assert_eq!(g(7).degree(), 3);
    }

    #[test]
    fn hyperplonk_degrees() {
        let vanilla = g(20);
        assert_eq!(vanilla.degree(), 4);
        assert_eq!(vanilla.terms.len(), 5);
        let jelly = g(22);
        assert_eq!(jelly.degree(), 7);
        assert_eq!(jelly.terms.len(), 13);
        assert_eq!(g(21).degree(), 5);
        assert_eq!(g(23).degree(), 7);
        let open = builtin_gate(GateId::OpenCheck).unwrap();
        assert_eq!(open.degree(), 2);
        assert_eq!(open.inputs.iter().filter(|m| m.role == Role::Eq).count(), 6);
    }

    #[test]
    fn jellyfish_permcheck_uses_five_columns() {
        let gate = g(23);
        for id in ["D_1", "D_2", "D_3", "D_4", "D_5", "N_1", "N_5"] {
            assert!(gate.input_index(id).is_some(), "{id}");
        }
    }

    #[test]
    fn gate_ids_parse() {
        assert_eq!("7".parse::<GateId>().unwrap(), GateId::Table(7));
        assert_eq!("OpenCheck".parse::<GateId>().unwrap(), GateId::OpenCheck);
        assert!("24".parse::<GateId>().is_err());
        assert_eq!(BUILTIN_IDS[24], GateId::OpenCheck);
    }

    #[test]
    fn sweep_gate_degree() {
        for d in 2..=30 {
            assert_eq!(sweep_gate(d).degree(), d + 1);
            assert_eq!(sweep_gate(d).terms.len(), 4);
        }
    }
}
