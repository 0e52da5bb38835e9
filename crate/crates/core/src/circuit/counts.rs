use std::fmt;
use std::iter::Sum;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use super::gate::Gate;

/// Gate tallies. Every gate lands in exactly one of `clifford`, `t_like`,
/// `rotations`, `measurements`, `resets`, or `other` (non-native multi-qubit
/// gates such as Toffoli or CSWAP that have not been lowered yet);
/// `two_qubit` additionally counts gates whose support is exactly two wires.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCounts {
    pub clifford: usize,
    pub t_like: usize,
    pub rotations: usize,
    pub measurements: usize,
    pub resets: usize,
    pub two_qubit: usize,
    pub other: usize,
}

impl GateCounts {
    pub fn of_gate(gate: &Gate) -> GateCounts {
        use super::gate::GateKind;
        let mut c = GateCounts::default();
        match gate.kind {
            GateKind::Measure(_) => c.measurements = 1,
            GateKind::Reset => c.resets = 1,
            ref k if k.is_t_like() => c.t_like = 1,
            ref k if k.is_rotation() => c.rotations = 1,
            ref k if k.is_clifford() => c.clifford = 1,
            _ => c.other = 1,
        }
        if gate.support_size() == 2 && !gate.kind.is_measurement_or_reset() {
            c.two_qubit = 1;
        }
        c
    }

    pub fn total(&self) -> usize {
        self.clifford + self.t_like + self.rotations + self.measurements + self.resets + self.other
    }

    /// Flat `key=value` report, one entry per line.
    pub fn to_report(&self) -> String {
        self.to_string()
    }
}

impl Add for GateCounts {
    type Output = GateCounts;

    fn add(self, rhs: GateCounts) -> GateCounts {
        GateCounts {
            clifford: self.clifford + rhs.clifford,
            t_like: self.t_like + rhs.t_like,
            rotations: self.rotations + rhs.rotations,
            measurements: self.measurements + rhs.measurements,
            resets: self.resets + rhs.resets,
            two_qubit: self.two_qubit + rhs.two_qubit,
            other: self.other + rhs.other,
        }
    }
}

impl Sum for GateCounts {
    fn sum<I: Iterator<Item = GateCounts>>(iter: I) -> Self {
        iter.fold(GateCounts::default(), Add::add)
    }
}

impl<'a> FromIterator<&'a Gate> for GateCounts {
    fn from_iter<I: IntoIterator<Item = &'a Gate>>(iter: I) -> Self {
        iter.into_iter().map(GateCounts::of_gate).sum()
    }
}

impl fmt::Display for GateCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "clifford={}", self.clifford)?;
        writeln!(f, "t_like={}", self.t_like)?;
        writeln!(f, "rotations={}", self.rotations)?;
        writeln!(f, "measurements={}", self.measurements)?;
        writeln!(f, "resets={}", self.resets)?;
        writeln!(f, "two_qubit={}", self.two_qubit)?;
        write!(f, "other={}", self.other)
    }
}
