//! Preparation of the ancilla superpositions that select which particle is
//! exchanged with the newest one.
//!
//! `Y_n` on `n` qubits has amplitude `+1/√(n+1)` on `|0…0⟩` and `−1/√(n+1)`
//! on each weight-1 string; `Ỹ_n` drops the minus signs. Qubit `j` flipped
//! corresponds to basis index `2^j`.

use crate::circuit::{Circuit, Control, Gate, Layout};
use crate::error::{Error, Result};

/// Largest `n` for which the doubling construction is used.
pub const TILDE_POW2_MAX: usize = 15;

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Probability(p))
    }
}

/// Rotation angle `θ` with `cos(θ/2) = √p`.
pub fn g_angle(p: f64) -> Result<f64> {
    check_probability(p)?;
    Ok(2.0 * p.sqrt().acos())
}

/// `G(p)|0⟩ = √p|0⟩ + √(1−p)|1⟩`, realized as `Ry(θ)`.
pub fn g_gate(p: f64, target: usize) -> Result<Gate> {
    Ok(Gate::ry(g_angle(p)?, target))
}

/// Controlled-`G(p)` on `control → target` followed by `CNOT(target → control)`.
///
/// Moves an excitation on `control` to `target` with amplitude `√(1−p)`.
pub fn b_gates(p: f64, control: usize, target: usize) -> Result<Vec<Gate>> {
    Ok(vec![
        Gate::cry(g_angle(p)?, Control::closed(control), target),
        Gate::cnot(target, control),
    ])
}

/// `B(p)` on a two-qubit register (wire 0 controls).
pub fn b_block(p: f64) -> Result<Circuit> {
    Circuit::from_gates(Layout::register(2), b_gates(p, 0, 1)?)
}

fn chain(n: usize) -> Result<Vec<Gate>> {
    let mut gates = vec![g_gate(1.0 / (n + 1) as f64, 0)?];
    for k in 0..n - 1 {
        gates.extend(b_gates(1.0 / (n - k) as f64, k, k + 1)?);
    }
    Ok(gates)
}

/// Circuit preparing `Y_n` from `|0…0⟩` on an `n`-qubit register.
///
/// `n = 1` is `H` then `Z`; larger `n` use one `G` rotation, the chain
/// `B(1/n), …, B(1/2)` and a final `Z` on every qubit.
pub fn prepare_y(n: usize) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::InvalidArgument("Y_n needs n >= 1".into()));
    }
    let mut gates = if n == 1 { vec![Gate::h(0)] } else { chain(n)? };
    gates.extend((0..n).map(Gate::z));
    Circuit::from_gates(Layout::register(n), gates)
}

/// Circuit preparing `Ỹ_n` for `n + 1` a power of two, using one work
/// ancilla (wire `n`) that is returned to `|0⟩`.
///
/// Starting from `Ỹ_1 = H|0⟩`, each round turns `Ỹ_k` on the first `k`
/// qubits into `Ỹ_{2k+1}`: a `|+⟩` work qubit decides whether an excitation
/// moves to the second half (CSWAPs); with no excitation it lands on the
/// last qubit, and the work qubit is uncomputed by parity. Beyond
/// [`TILDE_POW2_MAX`] the `B`-chain without the final `Z` layer is used.
pub fn prepare_y_tilde_pow2(n: usize) -> Result<Circuit> {
    if n == 0 || !(n + 1).is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "n + 1 = {} is not a power of two",
            n + 1
        )));
    }
    let layout = Layout::register(n).with_work(1);
    if n > TILDE_POW2_MAX {
        return Circuit::from_gates(layout, chain(n)?);
    }
    let w = layout.work_wire(0);
    let mut gates = vec![Gate::h(0)];
    let mut k = 1;
    while k < n {
        gates.push(Gate::h(w));
        for i in 0..k {
            gates.push(Gate::cswap(w, i, k + i));
        }
        let last = 2 * k;
        gates.push(Gate::cnot(w, last));
        for i in 0..k {
            gates.push(Gate::cnot(k + i, last));
        }
        for q in k..=last {
            gates.push(Gate::cnot(q, w));
        }
        k = 2 * k + 1;
    }
    Circuit::from_gates(layout, gates)
}

/// Which ancilla superposition to prepare.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YStateSpec {
    pub n: usize,
    /// `Y_n` (with minus signs) or `Ỹ_n`.
    pub signed: bool,
}

impl YStateSpec {
    pub fn circuit(&self) -> Result<Circuit> {
        if self.signed {
            prepare_y(self.n)
        } else {
            prepare_y_tilde_pow2(self.n)
        }
    }
}
