//! Rewriting circuits into Clifford+T.
//!
//! Output gates are single-qubit Cliffords, `T`/`T†`, closed-control CNOTs,
//! measurements and resets (any of them classically conditioned), plus
//! `Rz` rotations when [`LoweringOptions::keep_rotations`] is set. Open
//! controls become `X` conjugations of the control wire; an `X` from such a
//! conjugation cancels against an adjacent `X` on the same wire.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Control, Gate, GateCounts, GateKind};
use crate::error::{Error, Result};
use crate::synth::{Axis, SynthCache, SynthOptions};

/// How the AND ladder inside multi-controlled X computes its work bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ToffoliStyle {
    /// Seven-T Toffoli for every rung.
    Exact,
    /// Four-T relative-phase Toffoli for the compute/uncompute rungs.
    #[default]
    Phase,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoweringOptions {
    pub toffoli_style: ToffoliStyle,
    pub absorb_open_controls: bool,
    /// Leave rotations as `Rz` (with `Ry` conjugated to `SX · Rz · SX†`)
    /// instead of synthesizing Clifford+T words.
    pub keep_rotations: bool,
    /// Synthesis tolerance per rotation when rotations are not kept.
    pub rotation_epsilon: f64,
    pub synth: SynthOptions,
}

impl Default for LoweringOptions {
    fn default() -> Self {
        LoweringOptions {
            toffoli_style: ToffoliStyle::Phase,
            absorb_open_controls: true,
            keep_rotations: true,
            rotation_epsilon: 1e-2,
            synth: SynthOptions::default(),
        }
    }
}

/// A lowered circuit with its tallies.
#[derive(Debug, Clone)]
pub struct Lowered {
    pub circuit: Circuit,
    pub counts: GateCounts,
    /// Tallies over gates without classical conditions.
    pub unconditioned: GateCounts,
    /// `X` gates removed by cancelling open-control conjugations.
    pub absorbed_x: usize,
}

fn t(q: usize) -> Gate {
    Gate::single(GateKind::T, q)
}

fn tdg(q: usize) -> Gate {
    Gate::single(GateKind::Tdg, q)
}

/// Toffoli with seven T gates; exact.
pub fn toffoli_gates(a: usize, b: usize, target: usize) -> Vec<Gate> {
    let mut g = vec![Gate::h(target)];
    g.extend(ccz_gates(a, b, target));
    g.push(Gate::h(target));
    g
}

/// CCZ: the Toffoli sequence without the target's Hadamards.
pub fn ccz_gates(a: usize, b: usize, c: usize) -> Vec<Gate> {
    vec![
        Gate::cnot(b, c),
        tdg(c),
        Gate::cnot(a, c),
        t(c),
        Gate::cnot(b, c),
        tdg(c),
        Gate::cnot(a, c),
        t(b),
        t(c),
        Gate::cnot(a, b),
        t(a),
        tdg(b),
        Gate::cnot(a, b),
    ]
}

/// Toffoli up to a diagonal phase, with four T gates. Only exact when
/// followed later by its adjoint.
pub fn phase_toffoli_gates(a: usize, b: usize, target: usize) -> Vec<Gate> {
    vec![
        Gate::h(target),
        t(target),
        Gate::cnot(b, target),
        tdg(target),
        Gate::cnot(a, target),
        t(target),
        Gate::cnot(b, target),
        tdg(target),
        Gate::h(target),
    ]
}

/// Multi-controlled X on closed controls. For `n ≥ 3` controls, `n − 2`
/// work wires (starting in `|0⟩`, returned to `|0⟩`) hold the AND ladder.
pub fn mcx_gates(
    controls: &[usize],
    target: usize,
    work: &[usize],
    style: ToffoliStyle,
) -> Result<Vec<Gate>> {
    let n = controls.len();
    match n {
        0 => return Ok(vec![Gate::x(target)]),
        1 => return Ok(vec![Gate::cnot(controls[0], target)]),
        2 => return Ok(toffoli_gates(controls[0], controls[1], target)),
        _ => {}
    }
    if work.len() < n - 2 {
        return Err(Error::InvalidArgument(format!(
            "{n}-controlled X needs {} work qubits, {} available",
            n - 2,
            work.len()
        )));
    }
    let rung = |a, b, t| match style {
        ToffoliStyle::Exact => toffoli_gates(a, b, t),
        ToffoliStyle::Phase => phase_toffoli_gates(a, b, t),
    };
    let mut compute = rung(controls[0], controls[1], work[0]);
    for k in 1..n - 2 {
        compute.extend(rung(work[k - 1], controls[k + 1], work[k]));
    }
    let mut gates = compute.clone();
    gates.extend(toffoli_gates(work[n - 3], controls[n - 1], target));
    gates.extend(compute.iter().rev().map(Gate::adjoint));
    Ok(gates)
}

/// `CNOT(b → a)`, Toffoli`(c, a → b)`, `CNOT(b → a)`.
pub fn cswap_gates(control: usize, a: usize, b: usize) -> Vec<Gate> {
    let mut g = vec![Gate::cnot(b, a)];
    g.extend(toffoli_gates(control, a, b));
    g.push(Gate::cnot(b, a));
    g
}

/// Controlled-H: a CNOT between `T` and `T†`, conjugated by a Clifford on the
/// target that maps `X → Z`, `Y → −X`, `Z → −Y`.
pub fn controlled_h_gates(control: usize, target: usize) -> Vec<Gate> {
    vec![
        Gate::single(GateKind::S, target),
        Gate::h(target),
        t(target),
        Gate::cnot(control, target),
        tdg(target),
        Gate::h(target),
        Gate::single(GateKind::Sdg, target),
    ]
}

fn is_quarter_turn(theta: f64) -> Option<bool> {
    let q = std::f64::consts::FRAC_PI_2;
    if (theta - q).abs() < 1e-12 {
        Some(true)
    } else if (theta + q).abs() < 1e-12 {
        Some(false)
    } else {
        None
    }
}

/// Controlled-`Ry(θ)` on a closed control. `θ = ±π/2` uses controlled-H and
/// a CNOT (`Ry(π/2) = X·H`); other angles use two CNOTs around `Ry(±θ/2)`.
pub fn controlled_ry_gates(theta: f64, control: usize, target: usize) -> Vec<Gate> {
    if theta == 0.0 {
        return Vec::new();
    }
    match is_quarter_turn(theta) {
        Some(true) => {
            let mut g = controlled_h_gates(control, target);
            g.push(Gate::cnot(control, target));
            g
        }
        Some(false) => {
            let mut g = vec![Gate::cnot(control, target)];
            g.extend(controlled_h_gates(control, target));
            g
        }
        None => vec![
            Gate::ry(theta / 2.0, target),
            Gate::cnot(control, target),
            Gate::ry(-theta / 2.0, target),
            Gate::cnot(control, target),
        ],
    }
}

pub fn lower_toffoli() -> Circuit {
    register_circuit(3, toffoli_gates(0, 1, 2))
}

pub fn lower_ccz() -> Circuit {
    register_circuit(3, ccz_gates(0, 1, 2))
}

pub fn lower_toffoli_phase() -> Circuit {
    register_circuit(3, phase_toffoli_gates(0, 1, 2))
}

/// `n_c`-controlled X on wires `0..n_c` with target `n_c` and `n_c − 2`
/// work wires after it.
pub fn lower_mcx(n_c: usize, style: ToffoliStyle) -> Result<Circuit> {
    let layout = crate::circuit::Layout::register(n_c + 1).with_work(n_c.saturating_sub(2));
    let controls: Vec<usize> = (0..n_c).collect();
    let work: Vec<usize> = (n_c + 1..layout.n_qubits()).collect();
    Circuit::from_gates(layout, mcx_gates(&controls, n_c, &work, style)?)
}

pub fn lower_cswap() -> Circuit {
    register_circuit(3, cswap_gates(0, 1, 2))
}

pub fn lower_controlled_h() -> Circuit {
    register_circuit(2, controlled_h_gates(0, 1))
}

/// Control on wire 0, target on wire 1; `Ry` factors are left in place.
pub fn lower_controlled_ry(theta: f64) -> Circuit {
    register_circuit(2, controlled_ry_gates(theta, 0, 1))
}

fn register_circuit(width: usize, gates: Vec<Gate>) -> Circuit {
    Circuit::from_gates(crate::circuit::Layout::register(width), gates)
        .expect("decomposition fits its register")
}

/// Work wires the gate needs for its AND ladder.
fn work_needed(g: &Gate) -> usize {
    match g.kind {
        GateKind::Mcx(n) | GateKind::Mcz(n) => n.saturating_sub(2),
        _ => 0,
    }
}

struct Emitter {
    gates: Vec<(Gate, bool, usize)>,
    alive: Vec<bool>,
    last: Vec<Vec<usize>>,
    absorb: bool,
    epoch: usize,
    absorbed: usize,
}

impl Emitter {
    fn new(n_qubits: usize, absorb: bool) -> Self {
        Emitter {
            gates: Vec::new(),
            alive: Vec::new(),
            last: vec![Vec::new(); n_qubits],
            absorb,
            epoch: 0,
            absorbed: 0,
        }
    }

    fn cancels(&self, g: &Gate, sandwich: bool) -> Option<usize> {
        if !self.absorb || g.kind != GateKind::X || !g.controls.is_empty() {
            return None;
        }
        let j = *self.last[g.targets[0]].last()?;
        let (h, h_sandwich, h_epoch) = &self.gates[j];
        let same_guard =
            h.conditions == g.conditions && (g.conditions.is_empty() || *h_epoch == self.epoch);
        (h.kind == GateKind::X && h.controls.is_empty() && same_guard && (sandwich || *h_sandwich))
            .then_some(j)
    }

    fn push(&mut self, g: Gate, sandwich: bool) {
        if let Some(j) = self.cancels(&g, sandwich) {
            self.alive[j] = false;
            self.last[g.targets[0]].pop();
            self.absorbed += 2;
            return;
        }
        let idx = self.gates.len();
        for w in g.wires() {
            self.last[w].push(idx);
        }
        if matches!(g.kind, GateKind::Measure(_)) {
            self.epoch += 1;
        }
        self.gates.push((g, sandwich, self.epoch));
        self.alive.push(true);
    }

    fn finish(self) -> (Vec<Gate>, usize) {
        let gates = self
            .gates
            .into_iter()
            .zip(self.alive)
            .filter_map(|((g, _, _), alive)| alive.then_some(g))
            .collect();
        (gates, self.absorbed)
    }
}

struct Lowerer<'a> {
    opts: &'a LoweringOptions,
    cache: &'a mut SynthCache,
    work: Vec<usize>,
}

impl Lowerer<'_> {
    fn rotation(&mut self, axis: Axis, theta: f64, q: usize) -> Result<Vec<Gate>> {
        if theta == 0.0 {
            return Ok(Vec::new());
        }
        if self.opts.keep_rotations {
            return Ok(match axis {
                Axis::Z => vec![Gate::rz(theta, q)],
                Axis::Y => vec![
                    Gate::single(GateKind::Sx, q),
                    Gate::rz(theta, q),
                    Gate::single(GateKind::Sxdg, q),
                ],
            });
        }
        let r = self
            .cache
            .synthesize(axis, theta, self.opts.rotation_epsilon, &self.opts.synth)?;
        Ok(r.word.into_iter().map(|k| Gate::single(k, q)).collect())
    }

    /// Replaces `Ry` factors left by a decomposition.
    fn expand_rotations(&mut self, gates: Vec<Gate>) -> Result<Vec<Gate>> {
        let mut out = Vec::with_capacity(gates.len());
        for g in gates {
            match g.kind {
                GateKind::Ry(theta) => out.extend(self.rotation(Axis::Y, theta, g.targets[0])?),
                _ => out.push(g),
            }
        }
        Ok(out)
    }

    /// Closed-control decomposition of one gate (conditions not applied).
    fn body(&mut self, g: &Gate, controls: &[usize]) -> Result<Vec<Gate>> {
        let tgt = g.targets.first().copied().unwrap_or(0);
        let style = self.opts.toffoli_style;
        Ok(match &g.kind {
            GateKind::X
            | GateKind::Y
            | GateKind::Z
            | GateKind::H
            | GateKind::S
            | GateKind::Sdg
            | GateKind::T
            | GateKind::Tdg
            | GateKind::Sx
            | GateKind::Sxdg
            | GateKind::Measure(_)
            | GateKind::Reset => vec![Gate::new(g.kind.clone(), g.targets.clone(), Vec::new())],
            GateKind::Cnot => vec![Gate::cnot(controls[0], tgt)],
            GateKind::Cz => vec![Gate::h(tgt), Gate::cnot(controls[0], tgt), Gate::h(tgt)],
            GateKind::Swap => {
                let (a, b) = (g.targets[0], g.targets[1]);
                vec![Gate::cnot(a, b), Gate::cnot(b, a), Gate::cnot(a, b)]
            }
            GateKind::Ry(theta) => self.rotation(Axis::Y, *theta, tgt)?,
            GateKind::Rz(theta) => self.rotation(Axis::Z, *theta, tgt)?,
            GateKind::ControlledRy(theta) => {
                let gates = controlled_ry_gates(*theta, controls[0], tgt);
                self.expand_rotations(gates)?
            }
            GateKind::Toffoli => toffoli_gates(controls[0], controls[1], tgt),
            GateKind::Ccz => ccz_gates(controls[0], controls[1], tgt),
            GateKind::Mcx(_) => mcx_gates(controls, tgt, &self.work, style)?,
            GateKind::Mcz(_) => {
                let mut v = vec![Gate::h(tgt)];
                v.extend(mcx_gates(controls, tgt, &self.work, style)?);
                v.push(Gate::h(tgt));
                v
            }
            GateKind::Cswap => cswap_gates(controls[0], g.targets[0], g.targets[1]),
            GateKind::Dense(d) => {
                return Err(Error::InvalidGate(format!(
                    "dense gate `{}` has no Clifford+T lowering",
                    d.label
                )))
            }
        })
    }
}

/// Lowers `c` to Clifford+T. Work wires for multi-controlled gates are
/// appended to the layout; lowering an already lowered circuit changes
/// nothing.
pub fn lower_circuit(c: &Circuit, opts: &LoweringOptions) -> Result<Lowered> {
    lower_circuit_with_cache(c, opts, &mut SynthCache::new())
}

pub fn lower_circuit_with_cache(
    c: &Circuit,
    opts: &LoweringOptions,
    cache: &mut SynthCache,
) -> Result<Lowered> {
    let old = *c.layout();
    let extra = c.gates().iter().map(work_needed).max().unwrap_or(0);
    let layout = old.with_work(old.work + extra);
    let work: Vec<usize> = (old.work..layout.work)
        .map(|i| layout.work_wire(i))
        .collect();
    let mut lowerer = Lowerer { opts, cache, work };
    let mut em = Emitter::new(layout.n_qubits(), opts.absorb_open_controls);
    for g in c.gates() {
        let open: Vec<usize> = g
            .controls
            .iter()
            .filter(|c| !c.active_value())
            .map(|c| c.wire)
            .collect();
        let controls: Vec<usize> = g.controls.iter().map(|c: &Control| c.wire).collect();
        let body = lowerer.body(g, &controls)?;
        let guard = |x: Gate| x.with_conditions(g.conditions.clone());
        for &w in &open {
            em.push(guard(Gate::x(w)), true);
        }
        for x in body {
            em.push(guard(x), false);
        }
        for &w in &open {
            em.push(guard(Gate::x(w)), true);
        }
    }
    let (gates, absorbed_x) = em.finish();
    let circuit = Circuit::from_gates(layout, gates)?;
    let counts = circuit.counts();
    let unconditioned = circuit
        .gates()
        .iter()
        .filter(|g| g.conditions.is_empty())
        .collect();
    Ok(Lowered {
        circuit,
        counts,
        unconditioned,
        absorbed_x,
    })
}

#[cfg(test)]
mod tests;
