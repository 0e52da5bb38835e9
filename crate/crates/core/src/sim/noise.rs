use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateKind};
use crate::error::{Error, Result};

/// Largest infidelity accepted for either gate class.
pub const MAX_INFIDELITY: f64 = 0.25;

/// Noise class a gate falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateClass {
    Clifford,
    /// T, T† and every other non-Clifford gate (rotations, unlowered
    /// multi-controlled gates, dense unitaries).
    NonClifford,
    /// Measurement and reset, which carry no channel.
    Noiseless,
}

impl GateClass {
    pub fn of(kind: &GateKind) -> GateClass {
        if kind.is_measurement_or_reset() {
            GateClass::Noiseless
        } else if kind.is_clifford() {
            GateClass::Clifford
        } else {
            GateClass::NonClifford
        }
    }
}

/// Per-class gate infidelities. Each gate is followed by a depolarizing
/// channel on its support whose parameter is the infidelity scaled by
/// `d/(d-1)` with `d = 2^k` for a `k`-qubit support: ×2 for one qubit and
/// ×4/3 for two.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    pub clifford_infidelity: f64,
    pub t_infidelity: f64,
}

impl NoiseModel {
    pub fn new(clifford_infidelity: f64, t_infidelity: f64) -> Result<Self> {
        for (name, v) in [("clifford", clifford_infidelity), ("t", t_infidelity)] {
            if !(0.0..=MAX_INFIDELITY).contains(&v) {
                return Err(Error::InvalidArgument(format!(
                    "{name} infidelity {v} outside [0, {MAX_INFIDELITY}]"
                )));
            }
        }
        Ok(NoiseModel {
            clifford_infidelity,
            t_infidelity,
        })
    }

    pub fn ideal() -> Self {
        NoiseModel::default()
    }

    pub fn is_ideal(&self) -> bool {
        self.clifford_infidelity == 0.0 && self.t_infidelity == 0.0
    }

    /// Depolarizing parameter for a channel on `support` qubits realizing
    /// the given average infidelity.
    pub fn depolarizing_parameter(infidelity: f64, support: usize) -> f64 {
        let d = (1u64 << support) as f64;
        infidelity * d / (d - 1.0)
    }

    pub fn infidelity(&self, class: GateClass) -> f64 {
        match class {
            GateClass::Clifford => self.clifford_infidelity,
            GateClass::NonClifford => self.t_infidelity,
            GateClass::Noiseless => 0.0,
        }
    }

    /// Channel parameter applied after `gate`.
    pub fn parameter_for(&self, gate: &Gate) -> f64 {
        let r = self.infidelity(GateClass::of(&gate.kind));
        if r == 0.0 {
            0.0
        } else {
            Self::depolarizing_parameter(r, gate.support_size())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mapping_doubles_single_qubit_and_scales_two_qubit() {
        assert_eq!(NoiseModel::depolarizing_parameter(1e-3, 1), 2e-3);
        assert!((NoiseModel::depolarizing_parameter(3e-3, 2) - 4e-3).abs() < 1e-18);
    }

    #[test]
    fn gate_classes() {
        let m = NoiseModel::new(1e-3, 1e-2).unwrap();
        assert_eq!(m.parameter_for(&Gate::h(0)), 2e-3);
        assert_eq!(m.parameter_for(&Gate::single(GateKind::Tdg, 0)), 2e-2);
        assert_eq!(m.parameter_for(&Gate::measure(0, 0)), 0.0);
        assert!((m.parameter_for(&Gate::cnot(0, 1)) - 4e-3 / 3.0).abs() < 1e-18);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(NoiseModel::new(0.3, 0.0).is_err());
        assert!(NoiseModel::new(0.0, -1e-3).is_err());
    }
}
