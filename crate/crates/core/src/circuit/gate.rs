use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// Whether a control fires on |1⟩ (closed) or on |0⟩ (open).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarity {
    Closed,
    Open,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Control {
    pub wire: usize,
    pub polarity: Polarity,
}

impl Control {
    pub fn closed(wire: usize) -> Self {
        Control {
            wire,
            polarity: Polarity::Closed,
        }
    }

    pub fn open(wire: usize) -> Self {
        Control {
            wire,
            polarity: Polarity::Open,
        }
    }

    /// Value the control wire must hold for the gate to act.
    pub fn active_value(&self) -> bool {
        self.polarity == Polarity::Closed
    }
}

/// Classical guard: the gate acts only if classical bit `bit` equals `value`.
/// A gate may carry several guards; all must hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Condition {
    pub bit: usize,
    pub value: bool,
}

/// An explicit unitary on `log2(dim)` target wires. Row/column index bit `j`
/// corresponds to `targets[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGate {
    pub label: String,
    pub matrix: DMatrix<C64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    /// Square root of X, `(1+i)/2·I + (1-i)/2·X`.
    Sx,
    Sxdg,
    Cnot,
    Cz,
    Swap,
    Ry(f64),
    Rz(f64),
    ControlledRy(f64),
    Toffoli,
    Ccz,
    Mcx(usize),
    Mcz(usize),
    Cswap,
    Measure(usize),
    Reset,
    Dense(Arc<DenseGate>),
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::T => "T",
            GateKind::Tdg => "TDG",
            GateKind::Sx => "SX",
            GateKind::Sxdg => "SXDG",
            GateKind::Cnot => "CNOT",
            GateKind::Cz => "CZ",
            GateKind::Swap => "SWAP",
            GateKind::Ry(_) => "RY",
            GateKind::Rz(_) => "RZ",
            GateKind::ControlledRy(_) => "CRY",
            GateKind::Toffoli => "CCX",
            GateKind::Ccz => "CCZ",
            GateKind::Mcx(_) => "MCX",
            GateKind::Mcz(_) => "MCZ",
            GateKind::Cswap => "CSWAP",
            GateKind::Measure(_) => "MEASURE",
            GateKind::Reset => "RESET",
            GateKind::Dense(_) => "DENSE",
        }
    }

    /// Number of controls the kind carries.
    pub fn control_count(&self) -> usize {
        match self {
            GateKind::Cnot | GateKind::Cz | GateKind::ControlledRy(_) | GateKind::Cswap => 1,
            GateKind::Toffoli | GateKind::Ccz => 2,
            GateKind::Mcx(n) | GateKind::Mcz(n) => *n,
            _ => 0,
        }
    }

    /// Number of target wires, or `None` for dense gates (set by the matrix).
    pub fn target_count(&self) -> Option<usize> {
        match self {
            GateKind::Swap | GateKind::Cswap => Some(2),
            GateKind::Dense(d) => {
                let dim = d.matrix.nrows();
                Some(dim.trailing_zeros() as usize)
            }
            _ => Some(1),
        }
    }

    pub fn is_measurement_or_reset(&self) -> bool {
        matches!(self, GateKind::Measure(_) | GateKind::Reset)
    }

    pub fn is_t_like(&self) -> bool {
        matches!(self, GateKind::T | GateKind::Tdg)
    }

    pub fn is_rotation(&self) -> bool {
        matches!(
            self,
            GateKind::Ry(_) | GateKind::Rz(_) | GateKind::ControlledRy(_)
        )
    }

    /// Clifford kinds, independent of control polarity.
    pub fn is_clifford(&self) -> bool {
        matches!(
            self,
            GateKind::X
                | GateKind::Y
                | GateKind::Z
                | GateKind::H
                | GateKind::S
                | GateKind::Sdg
                | GateKind::Sx
                | GateKind::Sxdg
                | GateKind::Cnot
                | GateKind::Cz
                | GateKind::Swap
        )
    }

    pub fn adjoint(&self) -> GateKind {
        match self {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            GateKind::Sx => GateKind::Sxdg,
            GateKind::Sxdg => GateKind::Sx,
            GateKind::Ry(t) => GateKind::Ry(-t),
            GateKind::Rz(t) => GateKind::Rz(-t),
            GateKind::ControlledRy(t) => GateKind::ControlledRy(-t),
            GateKind::Dense(d) => {
                let label = match d.label.strip_suffix('†') {
                    Some(base) => base.to_string(),
                    None => format!("{}†", d.label),
                };
                GateKind::Dense(Arc::new(DenseGate {
                    label,
                    matrix: d.matrix.adjoint(),
                }))
            }
            other => other.clone(),
        }
    }

    /// Single-qubit base matrix `[m00, m01, m10, m11]`, if the kind acts on
    /// one target.
    pub fn matrix_1q(&self) -> Option<[C64; 4]> {
        let z = C64::new(0.0, 0.0);
        let o = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let h = C64::new(FRAC_1_SQRT_2, 0.0);
        let m = match self {
            GateKind::X | GateKind::Cnot | GateKind::Toffoli | GateKind::Mcx(_) => [z, o, o, z],
            GateKind::Y => [z, -i, i, z],
            GateKind::Z | GateKind::Cz | GateKind::Ccz | GateKind::Mcz(_) => [o, z, z, -o],
            GateKind::H => [h, h, h, -h],
            GateKind::S => [o, z, z, i],
            GateKind::Sdg => [o, z, z, -i],
            GateKind::T => [o, z, z, C64::from_polar(1.0, FRAC_PI_4)],
            GateKind::Tdg => [o, z, z, C64::from_polar(1.0, -FRAC_PI_4)],
            GateKind::Sx => {
                let p = C64::new(0.5, 0.5);
                let q = C64::new(0.5, -0.5);
                [p, q, q, p]
            }
            GateKind::Sxdg => {
                let p = C64::new(0.5, -0.5);
                let q = C64::new(0.5, 0.5);
                [p, q, q, p]
            }
            GateKind::Ry(t) | GateKind::ControlledRy(t) => {
                let (s, c) = (t / 2.0).sin_cos();
                [c.into(), (-s).into(), s.into(), c.into()]
            }
            GateKind::Rz(t) => [
                C64::from_polar(1.0, -t / 2.0),
                z,
                z,
                C64::from_polar(1.0, t / 2.0),
            ],
            _ => return None,
        };
        Some(m)
    }

    /// Matrix on the target wires (controls excluded).
    pub fn base_matrix(&self) -> Option<DMatrix<C64>> {
        if let Some(m) = self.matrix_1q() {
            return Some(DMatrix::from_row_slice(2, 2, &m));
        }
        match self {
            GateKind::Swap | GateKind::Cswap => {
                let mut m = DMatrix::zeros(4, 4);
                m[(0, 0)] = C64::new(1.0, 0.0);
                m[(1, 2)] = C64::new(1.0, 0.0);
                m[(2, 1)] = C64::new(1.0, 0.0);
                m[(3, 3)] = C64::new(1.0, 0.0);
                Some(m)
            }
            GateKind::Dense(d) => Some(d.matrix.clone()),
            _ => None,
        }
    }
}

/// One circuit instruction over flat wire indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
    pub conditions: Vec<Condition>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: Vec<usize>, controls: Vec<Control>) -> Self {
        Gate {
            kind,
            targets,
            controls,
            conditions: Vec::new(),
        }
    }

    pub fn single(kind: GateKind, target: usize) -> Self {
        Gate::new(kind, vec![target], Vec::new())
    }

    pub fn x(q: usize) -> Self {
        Gate::single(GateKind::X, q)
    }

    pub fn h(q: usize) -> Self {
        Gate::single(GateKind::H, q)
    }

    pub fn z(q: usize) -> Self {
        Gate::single(GateKind::Z, q)
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cnot, vec![target], vec![Control::closed(control)])
    }

    pub fn cz(control: usize, target: usize) -> Self {
        Gate::new(GateKind::Cz, vec![target], vec![Control::closed(control)])
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Gate::new(GateKind::Swap, vec![a, b], Vec::new())
    }

    pub fn cswap(control: usize, a: usize, b: usize) -> Self {
        Gate::new(GateKind::Cswap, vec![a, b], vec![Control::closed(control)])
    }

    pub fn toffoli(c1: usize, c2: usize, target: usize) -> Self {
        Gate::new(
            GateKind::Toffoli,
            vec![target],
            vec![Control::closed(c1), Control::closed(c2)],
        )
    }

    pub fn ry(theta: f64, q: usize) -> Self {
        Gate::single(GateKind::Ry(theta), q)
    }

    pub fn rz(theta: f64, q: usize) -> Self {
        Gate::single(GateKind::Rz(theta), q)
    }

    pub fn cry(theta: f64, control: Control, target: usize) -> Self {
        Gate::new(GateKind::ControlledRy(theta), vec![target], vec![control])
    }

    /// Multi-controlled X, choosing CNOT / Toffoli / MCX by control count.
    pub fn mcx(controls: Vec<Control>, target: usize) -> Self {
        let kind = match controls.len() {
            0 => GateKind::X,
            1 => GateKind::Cnot,
            2 => GateKind::Toffoli,
            n => GateKind::Mcx(n),
        };
        Gate::new(kind, vec![target], controls)
    }

    /// Multi-controlled Z, choosing Z / CZ / CCZ / MCZ by control count.
    pub fn mcz(controls: Vec<Control>, target: usize) -> Self {
        let kind = match controls.len() {
            0 => GateKind::Z,
            1 => GateKind::Cz,
            2 => GateKind::Ccz,
            n => GateKind::Mcz(n),
        };
        Gate::new(kind, vec![target], controls)
    }

    pub fn measure(qubit: usize, cbit: usize) -> Self {
        Gate::single(GateKind::Measure(cbit), qubit)
    }

    pub fn reset(qubit: usize) -> Self {
        Gate::single(GateKind::Reset, qubit)
    }

    pub fn dense(label: impl Into<String>, matrix: DMatrix<C64>, targets: Vec<usize>) -> Self {
        let label: String = label
            .into()
            .chars()
            .map(|c| {
                if c.is_whitespace() || "|()".contains(c) {
                    '_'
                } else {
                    c
                }
            })
            .collect();
        let kind = GateKind::Dense(Arc::new(DenseGate { label, matrix }));
        Gate::new(kind, targets, Vec::new())
    }

    pub fn with_conditions(mut self, conditions: Vec<Condition>) -> Self {
        self.conditions = conditions;
        self
    }

    pub fn is_unitary(&self) -> bool {
        !self.kind.is_measurement_or_reset() && self.conditions.is_empty()
    }

    /// Every wire the gate touches, controls first.
    pub fn wires(&self) -> Vec<usize> {
        self.controls
            .iter()
            .map(|c| c.wire)
            .chain(self.targets.iter().copied())
            .collect()
    }

    pub fn support_size(&self) -> usize {
        self.controls.len() + self.targets.len()
    }

    pub fn adjoint(&self) -> Gate {
        Gate {
            kind: self.kind.adjoint(),
            targets: self.targets.clone(),
            controls: self.controls.clone(),
            conditions: self.conditions.clone(),
        }
    }

    /// Wire mask and required values for the control set.
    pub fn control_mask(&self) -> (usize, usize) {
        self.controls.iter().fold((0, 0), |(mask, value), c| {
            let bit = 1usize << c.wire;
            (
                mask | bit,
                if c.active_value() { value | bit } else { value },
            )
        })
    }

    /// Checks arity, wire ranges, disjointness, and unitarity of dense payloads.
    pub fn validate(&self, n_qubits: usize, n_cbits: usize) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidGate(format!("{}: {msg}", self.kind.name())));
        if self.controls.len() != self.kind.control_count() {
            return fail(format!(
                "expected {} controls, found {}",
                self.kind.control_count(),
                self.controls.len()
            ));
        }
        if let Some(expected) = self.kind.target_count() {
            if self.targets.len() != expected {
                return fail(format!(
                    "expected {expected} targets, found {}",
                    self.targets.len()
                ));
            }
        }
        let wires = self.wires();
        for (i, w) in wires.iter().enumerate() {
            if *w >= n_qubits {
                return fail(format!("wire {w} out of range (n = {n_qubits})"));
            }
            if wires[..i].contains(w) {
                return fail(format!("wire {w} used more than once"));
            }
        }
        if self.kind.is_measurement_or_reset() && !self.controls.is_empty() {
            return fail("measure/reset cannot be controlled".into());
        }
        if let GateKind::Measure(bit) = self.kind {
            if bit >= n_cbits {
                return fail(format!("classical bit {bit} out of range"));
            }
        }
        for c in &self.conditions {
            if c.bit >= n_cbits {
                return fail(format!("condition bit {} out of range", c.bit));
            }
        }
        if let GateKind::Dense(d) = &self.kind {
            let dim = d.matrix.nrows();
            if d.matrix.ncols() != dim || !dim.is_power_of_two() || dim < 2 {
                return fail(format!(
                    "matrix must be square with power-of-two size, got {dim}"
                ));
            }
            let err = unitarity_error(&d.matrix);
            if err > 1e-12 {
                return fail(format!("matrix is not unitary (‖U†U − I‖ = {err:.3e})"));
            }
        }
        Ok(())
    }
}

/// Frobenius-bounded deviation `‖U†U − I‖`, used as an operator-norm upper bound.
pub fn unitarity_error(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    let prod = m.adjoint() * m - DMatrix::<C64>::identity(n, n);
    prod.norm()
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::circuit::text::format_gate(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_fixed_kinds() -> Vec<GateKind> {
        vec![
            GateKind::X,
            GateKind::Y,
            GateKind::Z,
            GateKind::H,
            GateKind::S,
            GateKind::Sdg,
            GateKind::T,
            GateKind::Tdg,
            GateKind::Sx,
            GateKind::Sxdg,
            GateKind::Cnot,
            GateKind::Cz,
            GateKind::Swap,
            GateKind::Ry(0.3),
            GateKind::Rz(-1.2),
            GateKind::ControlledRy(2.0),
            GateKind::Toffoli,
            GateKind::Ccz,
            GateKind::Mcx(3),
            GateKind::Mcz(4),
            GateKind::Cswap,
        ]
    }

    #[test]
    fn every_base_matrix_is_unitary() {
        for kind in all_fixed_kinds() {
            let m = kind.base_matrix().unwrap();
            assert!(unitarity_error(&m) <= 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn adjoint_matrices_are_inverses() {
        for kind in all_fixed_kinds() {
            let m = kind.base_matrix().unwrap();
            let a = kind.adjoint().base_matrix().unwrap();
            let prod = &a * &m;
            let err = (prod - DMatrix::<C64>::identity(m.nrows(), m.nrows())).norm();
            assert!(err < 1e-12, "{kind:?}");
        }
    }

    #[test]
    fn sx_squares_to_x() {
        let sx = GateKind::Sx.base_matrix().unwrap();
        let x = GateKind::X.base_matrix().unwrap();
        assert!((&sx * &sx - x).norm() < 1e-15);
    }

    #[test]
    fn validation_rejects_overlap_and_bad_arity() {
        assert!(Gate::cnot(1, 1).validate(2, 0).is_err());
        assert!(Gate::cnot(0, 2).validate(2, 0).is_err());
        let bad = Gate::new(GateKind::Toffoli, vec![0], vec![Control::closed(1)]);
        assert!(bad.validate(3, 0).is_err());
        let m = Gate::new(GateKind::Measure(0), vec![0], vec![Control::closed(1)]);
        assert!(m.validate(2, 1).is_err());
        assert!(Gate::measure(0, 1).validate(1, 1).is_err());
        let mut nonunitary = DMatrix::<C64>::identity(2, 2);
        nonunitary[(0, 0)] = C64::new(2.0, 0.0);
        assert!(Gate::dense("bad", nonunitary, vec![0])
            .validate(1, 0)
            .is_err());
    }

    #[test]
    fn dense_adjoint_label_toggles() {
        let g = Gate::dense("U", GateKind::H.base_matrix().unwrap(), vec![0]);
        let a = g.adjoint();
        match &a.kind {
            GateKind::Dense(d) => assert_eq!(d.label, "U†"),
            _ => unreachable!(),
        }
        assert_eq!(a.adjoint(), g);
    }
}
