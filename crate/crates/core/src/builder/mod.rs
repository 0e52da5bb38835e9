//! Recursive antisymmetrization circuits.
//!
//! Step `n` takes the antisymmetric state of particles `1..n−1`, prepares
//! particle `n` with `U_n`, loads `Y_{n−1}` into ancillas `a_1..a_{n−1}` and
//! swaps `p_i ↔ p_n` controlled on `a_i`. The deterministic variant then
//! uncomputes each `a_i` with `U_n†`, an open-controlled `C^ηX` and `U_n`;
//! the measurement variant applies `H` to every ancilla, measures, and fixes
//! the signs with classically conditioned `𝒫(U_n)` blocks.

mod orbitals;
mod schedule;

pub use orbitals::{basis_orbital, dense_orbital, Orbital, OrbitalSet, ORTHO_TOL};
pub use schedule::{schedule_corrections, CorrectionSchedule, Outcome};

use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::ancilla::prepare_y;
use crate::circuit::{Circuit, Condition, Control, Gate, GateKind, Layout, QubitRef, Register};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Coherent uncomputation of the ancillas.
    #[default]
    Recursive,
    /// Ancilla measurement with conditioned phase corrections.
    Measurement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct BuildOptions {
    pub variant: Variant,
    /// Measurement variant: reset the measured ancillas and reuse them in
    /// the next step instead of allocating fresh ones.
    pub reuse_ancillas: bool,
    /// Reorder orbitals so the costliest preparation is `φ_1`.
    pub sort_by_cost: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            variant: Variant::Recursive,
            reuse_ancillas: true,
            sort_by_cost: false,
        }
    }
}

/// Structural tallies recorded while building.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildTrace {
    pub u_blocks: usize,
    pub u_dagger_blocks: usize,
    pub cswaps: usize,
    /// Open-controlled `C^ηX` uncompute gates.
    pub cnx: usize,
    /// Conditioned `𝒫(U)` blocks emitted (one per outcome pattern and
    /// corrected particle).
    pub phase_corrections: usize,
}

impl Add for BuildTrace {
    type Output = BuildTrace;

    fn add(self, o: BuildTrace) -> BuildTrace {
        BuildTrace {
            u_blocks: self.u_blocks + o.u_blocks,
            u_dagger_blocks: self.u_dagger_blocks + o.u_dagger_blocks,
            cswaps: self.cswaps + o.cswaps,
            cnx: self.cnx + o.cnx,
            phase_corrections: self.phase_corrections + o.phase_corrections,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuildOutput {
    pub circuit: Circuit,
    pub trace: BuildTrace,
}

/// `U · (−1 on |0…0⟩) · U†` on an η-qubit register: flips the sign of
/// `U|0…0⟩` and leaves its orthogonal complement alone.
///
/// Realized as `U†`, `X` on wire 0, `Z` on wire 0 open-controlled by the
/// other wires, `X` on wire 0, `U`.
pub fn phase_correction(u: &Circuit) -> Result<Circuit> {
    let eta = u.n_qubits();
    if eta == 0 || !u.is_unitary_only() {
        return Err(Error::InvalidArgument(
            "phase correction needs a unitary-only circuit on at least one qubit".into(),
        ));
    }
    let mut c = Circuit::new(*u.layout());
    c.append(&u.inverse()?)?;
    for g in zero_phase_gates(&(0..eta).collect::<Vec<_>>()) {
        c.push(g)?;
    }
    c.append(u)?;
    Ok(c)
}

/// `−1` on `|0…0⟩` of the given wires.
fn zero_phase_gates(wires: &[usize]) -> Vec<Gate> {
    let t = wires[0];
    let controls = wires[1..].iter().map(|&w| Control::open(w)).collect();
    vec![Gate::x(t), Gate::mcz(controls, t), Gate::x(t)]
}

fn map_onto(layout: &Layout, wires: &[usize], c: &Circuit) -> Result<Vec<Gate>> {
    Ok(c.remap(*layout, |w| wires[w], 0)?.gates().to_vec())
}

/// Re-targets `prev` onto `layout`, keeping every register position.
fn widen(prev: &Circuit, layout: Layout) -> Result<Circuit> {
    let old = *prev.layout();
    let map = |w: usize| {
        let q = old.qubit_ref(w).expect("wire inside old layout");
        layout.wire(q).expect("new layout contains the old one")
    };
    prev.remap(layout, map, 0)
}

fn check_step_inputs(prev: &Circuit, u_n: &Circuit) -> Result<(usize, usize)> {
    let l = prev.layout();
    if *u_n.layout() != Layout::register(l.eta) {
        return Err(Error::Layout(format!(
            "U_N acts on {:?}, expected a bare {}-qubit register",
            u_n.layout(),
            l.eta
        )));
    }
    if !u_n.is_unitary_only() {
        return Err(Error::InvalidArgument("U_N must be unitary-only".into()));
    }
    Ok((l.n_particles + 1, l.eta))
}

/// Common head of both variants: `U_n` on `p_n`, `Y_{n−1}` on the step's
/// ancillas, and the controlled swaps.
fn step_head(
    layout: &Layout,
    n: usize,
    ancillas: &[usize],
    u_n: &Circuit,
    trace: &mut BuildTrace,
) -> Result<Vec<Gate>> {
    let pn: Vec<usize> = layout.particle_wires(n).collect();
    let mut gates = map_onto(layout, &pn, u_n)?;
    trace.u_blocks += 1;
    gates.extend(map_onto(layout, ancillas, &prepare_y(n - 1)?)?);
    for (i, &a) in ancillas.iter().enumerate() {
        for (x, y) in layout.particle_wires(i + 1).zip(pn.iter().copied()) {
            gates.push(Gate::cswap(a, x, y));
            trace.cswaps += 1;
        }
    }
    Ok(gates)
}

fn recursive_step(prev: &Circuit, u_n: &Circuit) -> Result<(Circuit, BuildTrace)> {
    let (n, eta) = check_step_inputs(prev, u_n)?;
    let old = prev.layout();
    let layout = Layout::new(n, eta)
        .with_ancillas(old.ancillas.max(n - 1))
        .with_work(old.work)
        .with_cbits(old.cbits);
    let mut c = widen(prev, layout)?;
    let mut trace = BuildTrace::default();
    let ancillas: Vec<usize> = (1..n).map(|i| layout.ancilla_wire(i)).collect();
    let head = step_head(&layout, n, &ancillas, u_n, &mut trace)?;
    let u_dag = u_n.inverse()?;
    let mut gates = head;
    for (i, &a) in ancillas.iter().enumerate() {
        let pi: Vec<usize> = layout.particle_wires(i + 1).collect();
        gates.extend(map_onto(&layout, &pi, &u_dag)?);
        gates.push(Gate::mcx(pi.iter().map(|&w| Control::open(w)).collect(), a));
        gates.extend(map_onto(&layout, &pi, u_n)?);
        trace.u_dagger_blocks += 1;
        trace.u_blocks += 1;
        trace.cnx += 1;
    }
    for g in gates {
        c.push(g)?;
    }
    Ok((c, trace))
}

fn measurement_step(prev: &Circuit, u_n: &Circuit, reuse: bool) -> Result<(Circuit, BuildTrace)> {
    let (n, eta) = check_step_inputs(prev, u_n)?;
    let old = prev.layout();
    let (ancillas_total, first) = if reuse {
        (old.ancillas.max(n - 1), 1)
    } else {
        (old.ancillas + n - 1, old.ancillas + 1)
    };
    let layout = Layout::new(n, eta)
        .with_ancillas(ancillas_total)
        .with_work(old.work)
        .with_cbits(old.cbits + n - 1);
    let mut c = widen(prev, layout)?;
    let mut trace = BuildTrace::default();
    let ancillas: Vec<usize> = (first..first + n - 1)
        .map(|i| layout.ancilla_wire(i))
        .collect();
    let bits: Vec<usize> = (old.cbits..old.cbits + n - 1).collect();
    let mut gates = step_head(&layout, n, &ancillas, u_n, &mut trace)?;
    for (&a, &b) in ancillas.iter().zip(&bits) {
        gates.push(Gate::h(a));
        gates.push(Gate::measure(a, b));
        if reuse {
            gates.push(Gate::reset(a));
        }
    }
    let fix = phase_correction(u_n)?;
    for idx in 0..1usize << (n - 1) {
        let outcome = Outcome::from_index(idx, n - 1);
        let schedule = schedule_corrections(&outcome, n)?;
        let conditions: Vec<Condition> = bits
            .iter()
            .enumerate()
            .map(|(i, &bit)| Condition {
                bit,
                value: outcome.bits()[i],
            })
            .collect();
        for &p in &schedule.corrected_particles {
            let wires: Vec<usize> = layout.particle_wires(p).collect();
            for g in map_onto(&layout, &wires, &fix)? {
                gates.push(g.with_conditions(conditions.clone()));
            }
            trace.phase_corrections += 1;
        }
    }
    for g in gates {
        c.push(g)?;
    }
    Ok((c, trace))
}

/// Deterministic step: extends `prev` (on particles `1..N−1`) to `N`
/// particles, returning every ancilla to `|0⟩`.
pub fn build_recursive_step(prev: &Circuit, u_n: &Circuit) -> Result<Circuit> {
    Ok(recursive_step(prev, u_n)?.0)
}

/// Measurement-based step; `reuse` resets and recycles ancillas `a_1…`.
pub fn build_measurement_step(prev: &Circuit, u_n: &Circuit, reuse: bool) -> Result<Circuit> {
    Ok(measurement_step(prev, u_n, reuse)?.0)
}

/// Full circuit for the given orbitals and options.
pub fn build(orbitals: &OrbitalSet, opts: &BuildOptions) -> Result<BuildOutput> {
    let sorted;
    let orbitals = if opts.sort_by_cost {
        sorted = orbitals.sorted_by_cost();
        &sorted
    } else {
        orbitals
    };
    let eta = orbitals.eta();
    let mut circuit = Circuit::new(Layout::new(1, eta));
    circuit.append(&orbitals.prep(1).remap(Layout::new(1, eta), |w| w, 0)?)?;
    let mut trace = BuildTrace {
        u_blocks: 1,
        ..BuildTrace::default()
    };
    for n in 2..=orbitals.len() {
        let (c, t) = match opts.variant {
            Variant::Recursive => recursive_step(&circuit, orbitals.prep(n))?,
            Variant::Measurement => {
                measurement_step(&circuit, orbitals.prep(n), opts.reuse_ancillas)?
            }
        };
        circuit = c;
        trace = trace + t;
    }
    Ok(BuildOutput { circuit, trace })
}

pub fn build_full_recursive(orbitals: &OrbitalSet) -> Result<Circuit> {
    Ok(build(orbitals, &BuildOptions::default())?.circuit)
}

pub fn build_full_measurement(orbitals: &OrbitalSet, reuse_ancillas: bool) -> Result<Circuit> {
    let opts = BuildOptions {
        variant: Variant::Measurement,
        reuse_ancillas,
        sort_by_cost: false,
    };
    Ok(build(orbitals, &opts)?.circuit)
}

/// Wires of all particle registers, in order.
pub fn particle_wires(layout: &Layout) -> Vec<usize> {
    (0..layout.particle_qubits()).collect()
}

/// Wires of the antisymmetrization ancillas.
pub fn ancilla_wires(layout: &Layout) -> Vec<usize> {
    (1..=layout.ancillas)
        .map(|i| layout.ancilla_wire(i))
        .collect()
}

/// Number of CSWAP gates and open-controlled uncompute gates in a built
/// circuit, counted from its gate list.
pub fn structural_gate_counts(c: &Circuit) -> (usize, usize) {
    let layout = c.layout();
    let cswaps = c
        .gates()
        .iter()
        .filter(|g| g.kind == GateKind::Cswap)
        .count();
    let cnx = c
        .gates()
        .iter()
        .filter(|g| {
            let on_ancilla = g.targets.len() == 1
                && matches!(
                    layout.qubit_ref(g.targets[0]),
                    Some(QubitRef {
                        register: Register::AntisymAncilla(_),
                        ..
                    })
                );
            on_ancilla
                && g.controls.len() == layout.eta
                && g.controls.iter().all(|c| !c.active_value())
                && matches!(
                    g.kind,
                    GateKind::Cnot | GateKind::Toffoli | GateKind::Mcx(_)
                )
        })
        .count();
    (cswaps, cnx)
}

#[cfg(test)]
mod tests;
