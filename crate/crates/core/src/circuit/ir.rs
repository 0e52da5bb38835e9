use nalgebra::DMatrix;

use super::counts::GateCounts;
use super::gate::{Control, Gate};
use super::kernel;
use super::layout::Layout;
use crate::error::{Error, Result};
use crate::C64;

/// Default qubit cap for [`Circuit::unitary`].
pub const UNITARY_QUBIT_CAP: usize = 12;

/// An ordered gate list over a fixed register layout.
///
/// Gates apply left to right: the first gate in the list acts first, so the
/// unitary of `[g1, g2]` is `U(g2) · U(g1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    layout: Layout,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(layout: Layout) -> Self {
        Circuit {
            layout,
            gates: Vec::new(),
        }
    }

    pub fn from_gates(layout: Layout, gates: Vec<Gate>) -> Result<Self> {
        let mut c = Circuit::new(layout);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn n_qubits(&self) -> usize {
        self.layout.n_qubits()
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        gate.validate(self.layout.n_qubits(), self.layout.cbits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Appends every gate of `other`, which must share this layout.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.layout != self.layout {
            return Err(Error::Layout(format!(
                "cannot compose {:?} with {:?}",
                self.layout, other.layout
            )));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// `self` followed by `other`.
    pub fn compose(&self, other: &Circuit) -> Result<Circuit> {
        let mut c = self.clone();
        c.append(other)?;
        Ok(c)
    }

    pub fn is_unitary_only(&self) -> bool {
        self.gates.iter().all(Gate::is_unitary)
    }

    fn first_non_unitary(&self) -> Option<(usize, &Gate)> {
        self.gates.iter().enumerate().find(|(_, g)| !g.is_unitary())
    }

    /// Reverses gate order and replaces every gate by its adjoint.
    pub fn inverse(&self) -> Result<Circuit> {
        if let Some((index, g)) = self.first_non_unitary() {
            return Err(Error::NonUnitary {
                index,
                kind: g.kind.name().to_string(),
            });
        }
        Ok(Circuit {
            layout: self.layout,
            gates: self.gates.iter().rev().map(Gate::adjoint).collect(),
        })
    }

    pub fn counts(&self) -> GateCounts {
        self.gates.iter().collect()
    }

    /// Re-targets the circuit onto `layout`, sending wire `w` to `map(w)`.
    /// Classical bits are shifted by `cbit_offset`.
    pub fn remap(
        &self,
        layout: Layout,
        map: impl Fn(usize) -> usize,
        cbit_offset: usize,
    ) -> Result<Circuit> {
        let mut out = Circuit::new(layout);
        for g in &self.gates {
            let mut kind = g.kind.clone();
            if let super::gate::GateKind::Measure(bit) = kind {
                kind = super::gate::GateKind::Measure(bit + cbit_offset);
            }
            let gate = Gate {
                kind,
                targets: g.targets.iter().map(|&t| map(t)).collect(),
                controls: g
                    .controls
                    .iter()
                    .map(|c| Control {
                        wire: map(c.wire),
                        polarity: c.polarity,
                    })
                    .collect(),
                conditions: g
                    .conditions
                    .iter()
                    .map(|c| super::gate::Condition {
                        bit: c.bit + cbit_offset,
                        value: c.value,
                    })
                    .collect(),
            };
            out.push(gate)?;
        }
        Ok(out)
    }

    /// Same gates on a layout with at least as many qubits and classical bits.
    pub fn widened(&self, layout: Layout) -> Result<Circuit> {
        if layout.n_qubits() < self.layout.n_qubits() || layout.cbits < self.layout.cbits {
            return Err(Error::Layout(format!(
                "{layout:?} is narrower than {:?}",
                self.layout
            )));
        }
        self.remap(layout, |w| w, 0)
    }

    /// Dense unitary with the default qubit cap.
    pub fn unitary(&self) -> Result<DMatrix<C64>> {
        self.unitary_with_cap(UNITARY_QUBIT_CAP)
    }

    /// Dense `2^n × 2^n` unitary; column `k` is the image of basis state `k`.
    pub fn unitary_with_cap(&self, cap: usize) -> Result<DMatrix<C64>> {
        let n = self.n_qubits();
        if n > cap {
            return Err(Error::QubitCap { qubits: n, cap });
        }
        if let Some((index, g)) = self.first_non_unitary() {
            return Err(Error::NonUnitary {
                index,
                kind: g.kind.name().to_string(),
            });
        }
        let dim = 1usize << n;
        let mut u = DMatrix::<C64>::identity(dim, dim);
        for col in 0..dim {
            let column = u.column_mut(col);
            let slice = column.data.into_slice_mut();
            for g in &self.gates {
                kernel::apply_gate(slice, g);
            }
        }
        Ok(u)
    }
}
