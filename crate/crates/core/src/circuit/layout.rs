use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Named register a qubit belongs to.
///
/// Particles and antisymmetrization ancillas are numbered from 1, matching
/// `p_i` / `a_i`; work ancillas (used by lowering) are numbered from 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Register {
    Particle(usize),
    AntisymAncilla(usize),
    WorkAncilla(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitRef {
    pub register: Register,
    pub offset: usize,
}

impl QubitRef {
    pub fn particle(index: usize, offset: usize) -> Self {
        QubitRef {
            register: Register::Particle(index),
            offset,
        }
    }

    pub fn ancilla(index: usize) -> Self {
        QubitRef {
            register: Register::AntisymAncilla(index),
            offset: 0,
        }
    }

    pub fn work(index: usize) -> Self {
        QubitRef {
            register: Register::WorkAncilla(index),
            offset: 0,
        }
    }
}

/// Register layout of a circuit.
///
/// Wire order is fixed: particle `i` occupies wires `[(i-1)·eta, i·eta)`,
/// then the antisymmetrization ancillas, then the work ancillas. Wire 0 is
/// the least significant bit of a basis-state index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Layout {
    pub n_particles: usize,
    pub eta: usize,
    pub ancillas: usize,
    pub work: usize,
    pub cbits: usize,
}

impl Layout {
    pub fn new(n_particles: usize, eta: usize) -> Self {
        Layout {
            n_particles,
            eta,
            ancillas: 0,
            work: 0,
            cbits: 0,
        }
    }

    /// Layout of a bare `width`-qubit register, used for orbital preparations.
    pub fn register(width: usize) -> Self {
        Layout::new(1, width)
    }

    pub fn with_ancillas(mut self, ancillas: usize) -> Self {
        self.ancillas = ancillas;
        self
    }

    pub fn with_work(mut self, work: usize) -> Self {
        self.work = work;
        self
    }

    pub fn with_cbits(mut self, cbits: usize) -> Self {
        self.cbits = cbits;
        self
    }

    pub fn particle_qubits(&self) -> usize {
        self.n_particles * self.eta
    }

    pub fn n_qubits(&self) -> usize {
        self.particle_qubits() + self.ancillas + self.work
    }

    pub fn particle_wires(&self, index: usize) -> Range<usize> {
        debug_assert!(index >= 1 && index <= self.n_particles);
        (index - 1) * self.eta..index * self.eta
    }

    pub fn ancilla_wire(&self, index: usize) -> usize {
        debug_assert!(index >= 1 && index <= self.ancillas);
        self.particle_qubits() + index - 1
    }

    pub fn work_wire(&self, index: usize) -> usize {
        debug_assert!(index < self.work);
        self.particle_qubits() + self.ancillas + index
    }

    pub fn wire(&self, q: QubitRef) -> Result<usize> {
        let out_of_range = || Error::Layout(format!("{q:?} is outside {self:?}"));
        match q.register {
            Register::Particle(i) => {
                if i == 0 || i > self.n_particles || q.offset >= self.eta {
                    return Err(out_of_range());
                }
                Ok((i - 1) * self.eta + q.offset)
            }
            Register::AntisymAncilla(i) => {
                if i == 0 || i > self.ancillas || q.offset != 0 {
                    return Err(out_of_range());
                }
                Ok(self.ancilla_wire(i))
            }
            Register::WorkAncilla(i) => {
                if i >= self.work || q.offset != 0 {
                    return Err(out_of_range());
                }
                Ok(self.work_wire(i))
            }
        }
    }

    pub fn qubit_ref(&self, wire: usize) -> Option<QubitRef> {
        let np = self.particle_qubits();
        if wire < np {
            Some(QubitRef::particle(wire / self.eta + 1, wire % self.eta))
        } else if wire < np + self.ancillas {
            Some(QubitRef::ancilla(wire - np + 1))
        } else if wire < self.n_qubits() {
            Some(QubitRef::work(wire - np - self.ancillas))
        } else {
            None
        }
    }
}
