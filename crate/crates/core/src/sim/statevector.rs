use std::ops::{Index, IndexMut};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{kernel, Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::C64;

/// Default qubit cap for statevector runs.
pub const STATEVECTOR_QUBIT_CAP: usize = 24;

/// Branches whose probability falls below this are dropped during enumeration.
const BRANCH_DROP: f64 = 1e-14;

/// Normalized amplitudes over `2^n` basis states; wire `w` is bit `w` of the
/// index.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl StateVector {
    pub fn zero(n_qubits: usize) -> Self {
        Self::basis(n_qubits, 0)
    }

    pub fn basis(n_qubits: usize, index: usize) -> Self {
        let mut amps = vec![C64::new(0.0, 0.0); 1 << n_qubits];
        amps[index] = C64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    /// Wraps amplitudes, checking the length is a power of two and the norm
    /// is 1 to 1e-10.
    pub fn from_amplitudes(amps: Vec<C64>) -> Result<Self> {
        if !amps.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {} is not a power of two",
                amps.len()
            )));
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        let s = StateVector { n_qubits, amps };
        let norm = s.norm();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::NotNormalized(norm));
        }
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension(self.dim(), other.dim()));
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|ψ⟩ ⊗ |other⟩` with `self` on the low wires.
    pub fn tensor(&self, high: &StateVector) -> StateVector {
        let mut amps = Vec::with_capacity(self.dim() * high.dim());
        for h in &high.amps {
            amps.extend(self.amps.iter().map(|l| l * h));
        }
        StateVector {
            n_qubits: self.n_qubits + high.n_qubits,
            amps,
        }
    }

    /// Applies a unitary gate, ignoring classical conditions.
    pub fn apply(&mut self, gate: &Gate) {
        kernel::apply_gate(&mut self.amps, gate);
    }

    /// Probability that `wire` reads 1.
    pub fn prob_one(&self, wire: usize) -> f64 {
        let bit = 1usize << wire;
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & bit != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Probability that every wire in `wires` reads 0.
    pub fn prob_all_zero(&self, wires: &[usize]) -> f64 {
        let mask: usize = wires.iter().map(|w| 1usize << w).sum();
        self.amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    /// Projects `wire` onto `value` and renormalizes; returns the
    /// pre-projection probability of that value.
    pub fn project(&mut self, wire: usize, value: bool) -> f64 {
        let bit = 1usize << wire;
        let want = if value { bit } else { 0 };
        let mut p = 0.0;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & bit == want {
                p += a.norm_sqr();
            } else {
                *a = C64::new(0.0, 0.0);
            }
        }
        if p > 0.0 {
            let s = 1.0 / p.sqrt();
            for a in &mut self.amps {
                *a *= s;
            }
        }
        p
    }

    /// Restriction to the wires in `keep` (new bit `j` is `keep[j]`),
    /// assuming every other wire is in a definite basis state.
    ///
    /// Returns an error if the dropped wires are entangled or in
    /// superposition (residual weight above 1e-10).
    pub fn restrict(&self, keep: &[usize]) -> Result<StateVector> {
        let (mut best, mut best_p) = (0usize, -1.0);
        for (i, a) in self.amps.iter().enumerate() {
            if a.norm_sqr() > best_p {
                best_p = a.norm_sqr();
                best = i;
            }
        }
        let keep_mask: usize = keep.iter().map(|w| 1usize << w).sum();
        let rest = best & !keep_mask;
        let mut amps = vec![C64::new(0.0, 0.0); 1 << keep.len()];
        let mut captured = 0.0;
        for (j, slot) in amps.iter_mut().enumerate() {
            let mut i = rest;
            for (b, w) in keep.iter().enumerate() {
                if j >> b & 1 == 1 {
                    i |= 1 << w;
                }
            }
            *slot = self.amps[i];
            captured += slot.norm_sqr();
        }
        if (1.0 - captured).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "dropped wires are not in a basis state (residual {:.3e})",
                1.0 - captured
            )));
        }
        Ok(StateVector {
            n_qubits: keep.len(),
            amps,
        })
    }
}

impl Index<usize> for StateVector {
    type Output = C64;

    fn index(&self, i: usize) -> &C64 {
        &self.amps[i]
    }
}

impl IndexMut<usize> for StateVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.amps[i]
    }
}

/// How measurements are resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    /// Follow every outcome with nonzero probability.
    Enumerate,
    /// Draw one outcome per measurement from a seeded generator.
    Sample { seed: u64 },
}

/// One measurement history and the state it leaves behind.
#[derive(Debug, Clone)]
pub struct BranchRecord {
    /// Classical register contents; unmeasured bits read `false`.
    pub bits: Vec<bool>,
    /// Probability of this history (in sample mode, of the drawn path).
    pub probability: f64,
    pub state: StateVector,
}

impl BranchRecord {
    /// Bits as a string with bit 0 on the left.
    pub fn bit_string(&self) -> String {
        self.bits
            .iter()
            .map(|b| if *b { '1' } else { '0' })
            .collect()
    }
}

pub fn run_statevector(c: &Circuit, mode: RunMode) -> Result<Vec<BranchRecord>> {
    let n = c.n_qubits();
    if n > STATEVECTOR_QUBIT_CAP {
        return Err(Error::QubitCap {
            qubits: n,
            cap: STATEVECTOR_QUBIT_CAP,
        });
    }
    run_statevector_from(c, StateVector::zero(n), mode)
}

/// Runs `c` from `initial`, which must span all of the circuit's wires.
pub fn run_statevector_from(
    c: &Circuit,
    initial: StateVector,
    mode: RunMode,
) -> Result<Vec<BranchRecord>> {
    if initial.n_qubits() != c.n_qubits() {
        return Err(Error::Dimension(initial.n_qubits(), c.n_qubits()));
    }
    let mut rng = match mode {
        RunMode::Sample { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
        RunMode::Enumerate => None,
    };
    let mut branches = vec![BranchRecord {
        bits: vec![false; c.layout().cbits],
        probability: 1.0,
        state: initial,
    }];
    for gate in c.gates() {
        let mut next = Vec::with_capacity(branches.len());
        for mut b in branches {
            if !gate.conditions.iter().all(|k| b.bits[k.bit] == k.value) {
                next.push(b);
                continue;
            }
            match gate.kind {
                GateKind::Measure(_) | GateKind::Reset => {
                    let wire = gate.targets[0];
                    let p1 = b.state.prob_one(wire);
                    let outcomes: Vec<bool> = match rng.as_mut() {
                        Some(r) => vec![r.gen::<f64>() < p1],
                        None => [false, true]
                            .into_iter()
                            .filter(|v| if *v { p1 } else { 1.0 - p1 } > BRANCH_DROP)
                            .collect(),
                    };
                    for v in outcomes {
                        let mut nb = b.clone();
                        let p = nb.state.project(wire, v);
                        nb.probability *= p;
                        match gate.kind {
                            GateKind::Measure(bit) => nb.bits[bit] = v,
                            _ => {
                                if v {
                                    nb.state.apply(&Gate::x(wire));
                                }
                            }
                        }
                        next.push(nb);
                    }
                }
                _ => {
                    b.state.apply(gate);
                    next.push(b);
                }
            }
        }
        branches = next;
    }
    Ok(branches)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Condition, Layout};

    #[test]
    fn h_then_measure_gives_two_even_branches() {
        let l = Layout::register(1).with_cbits(1);
        let c = Circuit::from_gates(l, vec![Gate::h(0), Gate::measure(0, 0)]).unwrap();
        let b = run_statevector(&c, RunMode::Enumerate).unwrap();
        assert_eq!(b.len(), 2);
        for r in &b {
            assert!((r.probability - 0.5).abs() < 1e-15);
            assert!((r.state.prob_one(0) - f64::from(u8::from(r.bits[0]))).abs() < 1e-15);
        }
    }

    #[test]
    fn conditions_are_honoured_per_branch() {
        let l = Layout::register(2).with_cbits(1);
        let gates = vec![
            Gate::h(0),
            Gate::measure(0, 0),
            Gate::x(1).with_conditions(vec![Condition {
                bit: 0,
                value: true,
            }]),
        ];
        let c = Circuit::from_gates(l, gates).unwrap();
        for r in run_statevector(&c, RunMode::Enumerate).unwrap() {
            assert_eq!(r.state.prob_one(1) > 0.5, r.bits[0]);
        }
    }

    #[test]
    fn reset_returns_qubit_to_zero() {
        let c = Circuit::from_gates(Layout::register(1), vec![Gate::h(0), Gate::reset(0)]).unwrap();
        let b = run_statevector(&c, RunMode::Enumerate).unwrap();
        let total: f64 = b.iter().map(|r| r.probability).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(b.iter().all(|r| r.state.prob_one(0) < 1e-15));
    }

    #[test]
    fn sample_frequencies_match_enumeration() {
        let l = Layout::register(2).with_cbits(2);
        let gates = vec![
            Gate::ry(1.1, 0),
            Gate::cnot(0, 1),
            Gate::h(1),
            Gate::measure(0, 0),
            Gate::measure(1, 1),
        ];
        let c = Circuit::from_gates(l, gates).unwrap();
        let exact = run_statevector(&c, RunMode::Enumerate).unwrap();
        let shots = 100_000u64;
        let mut freq = std::collections::HashMap::new();
        for s in 0..shots {
            let r = run_statevector(&c, RunMode::Sample { seed: s }).unwrap();
            *freq.entry(r[0].bit_string()).or_insert(0u64) += 1;
        }
        for e in exact {
            let seen = *freq.get(&e.bit_string()).unwrap_or(&0) as f64;
            let sigma = (shots as f64 * e.probability * (1.0 - e.probability)).sqrt();
            assert!((seen - shots as f64 * e.probability).abs() <= 5.0 * sigma.max(1.0));
        }
    }

    #[test]
    fn restrict_extracts_particle_register() {
        let mut s = StateVector::zero(3);
        s.apply(&Gate::h(0));
        s.apply(&Gate::x(2));
        let r = s.restrict(&[0, 1]).unwrap();
        assert!((r[0].re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        s.apply(&Gate::h(2));
        assert!(s.restrict(&[0, 1]).is_err());
    }

    #[test]
    fn from_amplitudes_rejects_unnormalized() {
        assert!(
            StateVector::from_amplitudes(vec![C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).is_err()
        );
        assert!(StateVector::from_amplitudes(vec![C64::new(1.0, 0.0); 3]).is_err());
    }
}
