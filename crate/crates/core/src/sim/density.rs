//! Density-matrix simulation with per-gate depolarizing noise.
//!
//! The simulator keeps only the qubits that currently matter. A wire enters
//! the active register when a gate first touches it, leaves it when it is
//! measured (its value becomes classical) or reset, and is traced out once
//! no later gate touches it and the caller has not asked to keep it.
//! Measurements split the run into branches; branches that agree on every
//! classical bit a later gate still reads are summed back together.

use nalgebra::{DMatrix, SymmetricEigen};

use super::noise::NoiseModel;
use super::statevector::StateVector;
use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::C64;

/// Default cap on simultaneously active qubits.
pub const DENSITY_QUBIT_CAP: usize = 12;

const BRANCH_DROP: f64 = 1e-14;

const ZERO: C64 = C64::new(0.0, 0.0);

/// A `2^n × 2^n` density operator; wire `w` is bit `w` of the row index.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: DMatrix<C64>,
}

impl DensityMatrix {
    /// Wraps a matrix after checking shape, Hermiticity and unit trace
    /// (both to 1e-10).
    pub fn from_matrix(matrix: DMatrix<C64>) -> Result<Self> {
        let d = matrix.nrows();
        if matrix.ncols() != d || !d.is_power_of_two() {
            return Err(Error::Dimension(matrix.nrows(), matrix.ncols()));
        }
        let rho = DensityMatrix {
            n_qubits: d.trailing_zeros() as usize,
            matrix,
        };
        let herm = rho.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "matrix is not Hermitian (deviation {herm:.3e})"
            )));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!("trace is {tr}, expected 1")));
        }
        Ok(rho)
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        let d = a.len();
        let matrix = DMatrix::from_fn(d, d, |r, c| a[r] * a[c].conj());
        DensityMatrix {
            n_qubits: psi.n_qubits(),
            matrix,
        }
    }

    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let d = 1usize << n_qubits;
        DensityMatrix {
            n_qubits,
            matrix: DMatrix::identity(d, d) * C64::new(1.0 / d as f64, 0.0),
        }
    }

    fn from_local(local: &Local) -> Self {
        let d = local.dim();
        DensityMatrix {
            n_qubits: local.n,
            matrix: DMatrix::from_row_slice(d, d, &local.data),
        }
    }

    fn to_local(&self) -> Local {
        Local {
            n: self.n_qubits,
            data: self.matrix.transpose().as_slice().to_vec(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    /// Real part of the trace.
    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Largest entry of `|ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.matrix[(r, c)] - self.matrix[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = SymmetricEigen::new(self.hermitian_part())
            .eigenvalues
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn purity(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub(crate) fn hermitian_part(&self) -> DMatrix<C64> {
        (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0)
    }

    /// `⟨ψ|ρ|ψ⟩`.
    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        if psi.dim() != self.dim() {
            return Err(Error::Dimension(psi.dim(), self.dim()));
        }
        let a = psi.amplitudes();
        let mut acc = ZERO;
        for c in 0..self.dim() {
            if a[c] == ZERO {
                continue;
            }
            let col: C64 = (0..self.dim())
                .map(|r| a[r].conj() * self.matrix[(r, c)])
                .sum();
            acc += col * a[c];
        }
        Ok(acc.re)
    }

    /// Probability that `wire` reads 1.
    pub fn prob_one(&self, wire: usize) -> f64 {
        (0..self.dim())
            .filter(|i| i >> wire & 1 == 1)
            .map(|i| self.matrix[(i, i)].re)
            .sum()
    }

    /// Applies a unitary gate in place.
    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        if !gate.is_unitary() {
            return Err(Error::InvalidGate(format!(
                "{} is not a unitary gate",
                gate.kind.name()
            )));
        }
        gate.validate(self.n_qubits, 0)?;
        let mut local = self.to_local();
        let (op, support) = LocalOp::from_gate(gate, |w| w);
        local.apply(&op, &support, 0.0);
        *self = DensityMatrix::from_local(&local);
        Ok(())
    }

    /// `(1−p)ρ + p·Tr_S(ρ) ⊗ I/2^|S|` on the qubits `S`.
    pub fn apply_depolarizing(&self, qubits: &[usize], p: f64) -> Result<DensityMatrix> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "depolarizing parameter {p} outside [0, 1]"
            )));
        }
        for (i, q) in qubits.iter().enumerate() {
            if *q >= self.n_qubits || qubits[..i].contains(q) {
                return Err(Error::InvalidArgument(format!("bad qubit list {qubits:?}")));
            }
        }
        let mut local = self.to_local();
        if !qubits.is_empty() {
            local.apply(&LocalOp::Identity, qubits, p);
        }
        Ok(DensityMatrix::from_local(&local))
    }

    /// Reduced state on `keep`; new bit `j` is wire `keep[j]`.
    pub fn partial_trace(&self, keep: &[usize]) -> DensityMatrix {
        DensityMatrix::from_local(&self.to_local().reduce(keep))
    }
}

/// Row-major density matrix over `n` local qubits.
#[derive(Debug, Clone)]
struct Local {
    n: usize,
    data: Vec<C64>,
}

/// Places the bits of `x` at the given positions.
fn spread(x: usize, positions: &[usize]) -> usize {
    positions
        .iter()
        .enumerate()
        .filter(|(j, _)| x >> j & 1 == 1)
        .map(|(_, p)| 1usize << p)
        .sum()
}

fn complement(n: usize, positions: &[usize]) -> Vec<usize> {
    (0..n).filter(|p| !positions.contains(p)).collect()
}

impl Local {
    fn scalar() -> Self {
        Local {
            n: 0,
            data: vec![C64::new(1.0, 0.0)],
        }
    }

    fn dim(&self) -> usize {
        1 << self.n
    }

    fn trace(&self) -> f64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i].re).sum()
    }

    fn prob_one(&self, q: usize) -> f64 {
        let d = self.dim();
        (0..d)
            .filter(|i| i >> q & 1 == 1)
            .map(|i| self.data[i * d + i].re)
            .sum()
    }

    /// Applies `op` on `support`, then the depolarizing channel with
    /// parameter `p` on the same qubits.
    fn apply(&mut self, op: &LocalOp, support: &[usize], p: f64) {
        if matches!(op, LocalOp::Identity) && p == 0.0 {
            return;
        }
        let d = self.dim();
        let k = support.len();
        let dd = 1usize << k;
        let offs: Vec<usize> = (0..dd).map(|a| spread(a, support)).collect();
        let rest_pos = complement(self.n, support);
        let rest: Vec<usize> = (0..1usize << rest_pos.len())
            .map(|r| spread(r, &rest_pos))
            .collect();
        let mut blk = vec![ZERO; dd * dd];
        let mut tmp = vec![ZERO; dd * dd];
        let keep = 1.0 - p;
        let mix = p / dd as f64;
        for (ri, &rr) in rest.iter().enumerate() {
            // ρ stays Hermitian, so only blocks on or above the block
            // diagonal are computed and mirrored.
            for &cr in &rest[ri..] {
                for a in 0..dd {
                    let row = (rr | offs[a]) * d;
                    for b in 0..dd {
                        blk[a * dd + b] = self.data[row + (cr | offs[b])];
                    }
                }
                match op {
                    LocalOp::Identity => {}
                    LocalOp::Monomial { perm, phase } => {
                        for a in 0..dd {
                            for b in 0..dd {
                                tmp[perm[a] * dd + perm[b]] =
                                    phase[a] * phase[b].conj() * blk[a * dd + b];
                            }
                        }
                        std::mem::swap(&mut blk, &mut tmp);
                    }
                    LocalOp::Dense(u) => {
                        for a in 0..dd {
                            for b in 0..dd {
                                let mut acc = ZERO;
                                for c in 0..dd {
                                    acc += u[a * dd + c] * blk[c * dd + b];
                                }
                                tmp[a * dd + b] = acc;
                            }
                        }
                        for a in 0..dd {
                            for b in 0..dd {
                                let mut acc = ZERO;
                                for c in 0..dd {
                                    acc += tmp[a * dd + c] * u[b * dd + c].conj();
                                }
                                blk[a * dd + b] = acc;
                            }
                        }
                    }
                }
                if p > 0.0 {
                    let tr: C64 = (0..dd).map(|a| blk[a * dd + a]).sum();
                    for z in blk.iter_mut() {
                        *z *= keep;
                    }
                    for a in 0..dd {
                        blk[a * dd + a] += tr * mix;
                    }
                }
                for a in 0..dd {
                    let row = (rr | offs[a]) * d;
                    for b in 0..dd {
                        self.data[row + (cr | offs[b])] = blk[a * dd + b];
                    }
                }
                if cr != rr {
                    for a in 0..dd {
                        for b in 0..dd {
                            self.data[(cr | offs[b]) * d + (rr | offs[a])] = blk[a * dd + b].conj();
                        }
                    }
                }
            }
        }
    }

    /// Partial trace keeping `keep` (in that order).
    fn reduce(&self, keep: &[usize]) -> Local {
        let d = self.dim();
        let rest_pos = complement(self.n, keep);
        let xs: Vec<usize> = (0..1usize << keep.len()).map(|x| spread(x, keep)).collect();
        let rs: Vec<usize> = (0..1usize << rest_pos.len())
            .map(|r| spread(r, &rest_pos))
            .collect();
        let m = xs.len();
        let mut data = vec![ZERO; m * m];
        for (x, &xi) in xs.iter().enumerate() {
            for (y, &yi) in xs.iter().enumerate() {
                data[x * m + y] = rs.iter().map(|&r| self.data[(xi | r) * d + (yi | r)]).sum();
            }
        }
        Local {
            n: keep.len(),
            data,
        }
    }

    /// Projects qubit `q` onto `v` and removes it; returns the probability
    /// and the renormalized remainder.
    fn project_out(&self, q: usize, v: bool) -> (f64, Local) {
        let d = self.dim();
        let half = d / 2;
        let fixed = if v { 1usize << q } else { 0 };
        let idx = |i: usize| crate::circuit::kernel::insert_zero_bit(i, q) | fixed;
        let mut data = vec![ZERO; half * half];
        let mut p = 0.0;
        for i in 0..half {
            let row = idx(i) * d;
            for j in 0..half {
                data[i * half + j] = self.data[row + idx(j)];
            }
            p += data[i * half + i].re;
        }
        if p > 0.0 {
            for z in &mut data {
                *z /= p;
            }
        }
        (
            p,
            Local {
                n: self.n - 1,
                data,
            },
        )
    }

    fn trace_out(&self, q: usize) -> Local {
        let keep = complement(self.n, &[q]);
        self.reduce(&keep)
    }

    /// Adds a new highest qubit in basis state `|v⟩`.
    fn push_qubit(&self, v: bool) -> Local {
        let d = self.dim();
        let nd = 2 * d;
        let shift = if v { d } else { 0 };
        let mut data = vec![ZERO; nd * nd];
        for i in 0..d {
            data[(i + shift) * nd + shift..(i + shift) * nd + shift + d]
                .copy_from_slice(&self.data[i * d..(i + 1) * d]);
        }
        Local {
            n: self.n + 1,
            data,
        }
    }

    /// New position `j` holds old position `perm[j]`.
    fn permuted(&self, perm: &[usize]) -> Local {
        if perm.iter().enumerate().all(|(j, p)| j == *p) {
            return self.clone();
        }
        let d = self.dim();
        let map: Vec<usize> = (0..d)
            .map(|i| {
                perm.iter()
                    .enumerate()
                    .filter(|(_, p)| i >> **p & 1 == 1)
                    .map(|(j, _)| 1usize << j)
                    .sum()
            })
            .collect();
        let mut data = vec![ZERO; d * d];
        for i in 0..d {
            for j in 0..d {
                data[map[i] * d + map[j]] = self.data[i * d + j];
            }
        }
        Local { n: self.n, data }
    }
}

/// Gate matrix on its full support (controls first, then targets).
enum LocalOp {
    Identity,
    /// `U|b⟩ = phase[b]·|perm[b]⟩`.
    Monomial {
        perm: Vec<usize>,
        phase: Vec<C64>,
    },
    /// Row-major dense matrix.
    Dense(Vec<C64>),
}

impl LocalOp {
    /// Builds the operator and its support positions, mapping wires through
    /// `pos`.
    fn from_gate(gate: &Gate, pos: impl Fn(usize) -> usize) -> (LocalOp, Vec<usize>) {
        let base = gate.kind.base_matrix().expect("unitary gate has a matrix");
        let kc = gate.controls.len();
        let kt = gate.targets.len();
        let dd = 1usize << (kc + kt);
        let active: usize = gate
            .controls
            .iter()
            .enumerate()
            .filter(|(_, c)| c.active_value())
            .map(|(j, _)| 1usize << j)
            .sum();
        let cmask = (1usize << kc) - 1;
        let mut u = vec![ZERO; dd * dd];
        for col in 0..dd {
            let ctrl = col & cmask;
            if ctrl != active {
                u[col * dd + col] = C64::new(1.0, 0.0);
                continue;
            }
            let tin = col >> kc;
            for tout in 0..1usize << kt {
                u[(ctrl | tout << kc) * dd + col] = base[(tout, tin)];
            }
        }
        let support: Vec<usize> = gate
            .controls
            .iter()
            .map(|c| pos(c.wire))
            .chain(gate.targets.iter().map(|&t| pos(t)))
            .collect();
        let mut perm = Vec::with_capacity(dd);
        let mut phase = Vec::with_capacity(dd);
        for col in 0..dd {
            let mut hits = (0..dd).filter(|r| u[r * dd + col] != ZERO);
            match (hits.next(), hits.next()) {
                (Some(r), None) => {
                    perm.push(r);
                    phase.push(u[r * dd + col]);
                }
                _ => return (LocalOp::Dense(u), support),
            }
        }
        (LocalOp::Monomial { perm, phase }, support)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Wire {
    Active(usize),
    /// Not in the active register; in the given basis state.
    Absent(bool),
    /// Never touched again and not kept.
    Dead,
}

#[derive(Debug, Clone)]
struct Branch {
    bits: Vec<bool>,
    prob: f64,
    wires: Vec<Wire>,
    /// Local position → wire.
    order: Vec<usize>,
    rho: Local,
}

impl Branch {
    fn activate(&mut self, w: usize) {
        if let Wire::Absent(v) = self.wires[w] {
            self.rho = self.rho.push_qubit(v);
            self.wires[w] = Wire::Active(self.order.len());
            self.order.push(w);
        }
    }

    fn drop_position(&mut self, q: usize, rho: Local, status: Wire) {
        let w = self.order.remove(q);
        self.wires[w] = status;
        for x in self.wires.iter_mut() {
            if let Wire::Active(p) = x {
                if *p > q {
                    *p -= 1;
                }
            }
        }
        self.rho = rho;
    }

    fn trace_wire(&mut self, w: usize, status: Wire) {
        match self.wires[w] {
            Wire::Active(q) => {
                let rho = self.rho.trace_out(q);
                self.drop_position(q, rho, status);
            }
            _ => self.wires[w] = status,
        }
    }

    fn active(&self) -> usize {
        self.order.len()
    }

    /// Reduced state on `wires` (order preserved), materializing absent ones.
    fn reduced(&self, wires: &[usize]) -> Local {
        let mut b = self.clone();
        for &w in wires {
            b.activate(w);
        }
        let positions: Vec<usize> = wires
            .iter()
            .map(|&w| match b.wires[w] {
                Wire::Active(p) => p,
                _ => unreachable!("wire activated above"),
            })
            .collect();
        b.rho.reduce(&positions)
    }
}

/// Options for [`run_density_with`] and [`DensitySimulator`].
#[derive(Debug, Clone)]
pub struct DensityOptions {
    /// Wires present in the output, in output bit order; `None` keeps all.
    pub keep: Option<Vec<usize>>,
    /// Classical bits whose values separate output branches.
    pub tracked_bits: Vec<usize>,
    /// Cap on simultaneously active qubits.
    pub qubit_cap: usize,
}

impl Default for DensityOptions {
    fn default() -> Self {
        DensityOptions {
            keep: None,
            tracked_bits: Vec::new(),
            qubit_cap: DENSITY_QUBIT_CAP,
        }
    }
}

/// Output state for one assignment of the tracked bits.
#[derive(Debug, Clone)]
pub struct DensityBranch {
    pub tracked: Vec<(usize, bool)>,
    pub probability: f64,
    /// Normalized state conditioned on this branch.
    pub rho: DensityMatrix,
}

#[derive(Debug, Clone)]
pub struct DensityRun {
    pub branches: Vec<DensityBranch>,
    pub peak_qubits: usize,
}

impl DensityRun {
    /// Probability-weighted sum over branches.
    pub fn mixture(&self) -> DensityMatrix {
        let first = &self.branches[0].rho;
        let mut m = DMatrix::zeros(first.dim(), first.dim());
        for b in &self.branches {
            m += &b.rho.matrix * C64::new(b.probability, 0.0);
        }
        DensityMatrix {
            n_qubits: first.n_qubits,
            matrix: m,
        }
    }

    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }

    /// Probability of the branch whose tracked bits all equal `value`.
    pub fn probability_all(&self, value: bool) -> f64 {
        self.branches
            .iter()
            .filter(|b| b.tracked.iter().all(|(_, v)| *v == value))
            .map(|b| b.probability)
            .sum()
    }
}

/// Step-wise noisy simulation of one circuit.
pub struct DensitySimulator<'a> {
    circuit: &'a Circuit,
    noise: NoiseModel,
    keep: Vec<usize>,
    tracked: Vec<usize>,
    cap: usize,
    next: usize,
    last_touch: Vec<Option<usize>>,
    /// `live[g][b]`: bit `b` is read by some gate after `g`, or tracked.
    live: Vec<Vec<bool>>,
    branches: Vec<Branch>,
    peak: usize,
}

impl<'a> DensitySimulator<'a> {
    pub fn new(circuit: &'a Circuit, noise: NoiseModel, opts: &DensityOptions) -> Result<Self> {
        let n = circuit.n_qubits();
        let cbits = circuit.layout().cbits;
        let keep = opts.keep.clone().unwrap_or_else(|| (0..n).collect());
        for (i, w) in keep.iter().enumerate() {
            if *w >= n || keep[..i].contains(w) {
                return Err(Error::InvalidArgument(format!("bad keep list {keep:?}")));
            }
        }
        if let Some(b) = opts.tracked_bits.iter().find(|b| **b >= cbits) {
            return Err(Error::InvalidArgument(format!(
                "tracked bit {b} out of range"
            )));
        }
        let gates = circuit.gates();
        let mut last_touch = vec![None; n];
        for (g, gate) in gates.iter().enumerate() {
            for w in gate.wires() {
                last_touch[w] = Some(g);
            }
        }
        let mut live = vec![vec![false; cbits]; gates.len()];
        let mut acc = vec![false; cbits];
        for b in &opts.tracked_bits {
            acc[*b] = true;
        }
        for g in (0..gates.len()).rev() {
            live[g] = acc.clone();
            for c in &gates[g].conditions {
                acc[c.bit] = true;
            }
        }
        let wires = (0..n)
            .map(|w| {
                if last_touch[w].is_none() && !keep.contains(&w) {
                    Wire::Dead
                } else {
                    Wire::Absent(false)
                }
            })
            .collect();
        Ok(DensitySimulator {
            circuit,
            noise,
            keep,
            tracked: opts.tracked_bits.clone(),
            cap: opts.qubit_cap,
            next: 0,
            last_touch,
            live,
            branches: vec![Branch {
                bits: vec![false; cbits],
                prob: 1.0,
                wires,
                order: Vec::new(),
                rho: Local::scalar(),
            }],
            peak: 0,
        })
    }

    pub fn peak_qubits(&self) -> usize {
        self.peak
    }

    pub fn branch_count(&self) -> usize {
        self.branches.len()
    }

    fn check_cap(&mut self, active: usize) -> Result<()> {
        self.peak = self.peak.max(active);
        if active > self.cap {
            return Err(Error::QubitCap {
                qubits: active,
                cap: self.cap,
            });
        }
        Ok(())
    }

    fn step(&mut self) -> Result<()> {
        let g = self.next;
        let gate = &self.circuit.gates()[g];
        let p = self.noise.parameter_for(gate);
        let mut out = Vec::with_capacity(self.branches.len());
        for mut b in std::mem::take(&mut self.branches) {
            if !gate.conditions.iter().all(|c| b.bits[c.bit] == c.value) {
                out.push(b);
                continue;
            }
            match gate.kind {
                GateKind::Reset => {
                    b.trace_wire(gate.targets[0], Wire::Absent(false));
                    out.push(b);
                }
                GateKind::Measure(bit) => {
                    let w = gate.targets[0];
                    match b.wires[w] {
                        Wire::Absent(v) => {
                            b.bits[bit] = v;
                            out.push(b);
                        }
                        Wire::Active(q) => {
                            let p1 = b.rho.prob_one(q);
                            for v in [false, true] {
                                let pv = if v { p1 } else { 1.0 - p1 };
                                if pv <= BRANCH_DROP {
                                    continue;
                                }
                                let (_, rho) = b.rho.project_out(q, v);
                                let mut nb = b.clone();
                                nb.prob *= pv;
                                nb.bits[bit] = v;
                                nb.drop_position(q, rho, Wire::Absent(v));
                                out.push(nb);
                            }
                        }
                        Wire::Dead => unreachable!("measured wire is touched"),
                    }
                }
                _ => {
                    for w in gate.wires() {
                        b.activate(w);
                    }
                    self.check_cap(b.active())?;
                    let wires = &b.wires;
                    let (op, support) = LocalOp::from_gate(gate, |w| match wires[w] {
                        Wire::Active(q) => q,
                        _ => unreachable!("gate wires are active"),
                    });
                    b.rho.apply(&op, &support, p);
                    out.push(b);
                }
            }
        }
        self.branches = out;
        for w in gate.wires() {
            if self.last_touch[w] == Some(g) && !self.keep.contains(&w) {
                for b in &mut self.branches {
                    b.trace_wire(w, Wire::Dead);
                }
            }
        }
        self.merge(g)?;
        self.next += 1;
        Ok(())
    }

    fn merge(&mut self, g: usize) -> Result<()> {
        if self.branches.len() < 2 {
            return Ok(());
        }
        let live = self.live[g].clone();
        let key =
            |b: &Branch| -> Vec<bool> { b.bits.iter().zip(&live).map(|(v, l)| *v && *l).collect() };
        let mut groups: Vec<(Vec<bool>, Branch)> = Vec::new();
        for b in std::mem::take(&mut self.branches) {
            let k = key(&b);
            match groups.iter_mut().find(|(gk, _)| *gk == k) {
                Some((_, a)) => {
                    merge_into(a, b);
                    let active = a.active();
                    self.check_cap(active)?;
                }
                None => groups.push((k, b)),
            }
        }
        self.branches = groups.into_iter().map(|(_, b)| b).collect();
        Ok(())
    }

    /// Runs gates up to (not including) index `end`.
    pub fn run_to(&mut self, end: usize) -> Result<()> {
        let end = end.min(self.circuit.len());
        while self.next < end {
            self.step()?;
        }
        Ok(())
    }

    /// Probability-weighted reduced state on `wires` at the current point.
    pub fn snapshot(&self, wires: &[usize]) -> Result<DensityMatrix> {
        let mut acc: Option<Vec<C64>> = None;
        let mut total = 0.0;
        for b in &self.branches {
            if let Some(w) = wires.iter().find(|w| b.wires[**w] == Wire::Dead) {
                return Err(Error::InvalidArgument(format!(
                    "wire {w} was already traced out"
                )));
            }
            let r = b.reduced(wires);
            total += b.prob;
            match acc.as_mut() {
                None => acc = Some(r.data.iter().map(|z| z * b.prob).collect()),
                Some(a) => {
                    for (x, z) in a.iter_mut().zip(&r.data) {
                        *x += z * b.prob;
                    }
                }
            }
        }
        let mut data = acc.unwrap_or_default();
        for z in &mut data {
            *z /= total;
        }
        Ok(DensityMatrix::from_local(&Local {
            n: wires.len(),
            data,
        }))
    }

    /// Runs the remaining gates and returns one state per tracked-bit value.
    pub fn finish(mut self) -> Result<DensityRun> {
        self.run_to(self.circuit.len())?;
        let keep = self.keep.clone();
        let mut out = Vec::with_capacity(self.branches.len());
        for b in &self.branches {
            let rho = b.reduced(&keep);
            let tr = rho.trace();
            let mut rho = rho;
            if tr > 0.0 {
                for z in &mut rho.data {
                    *z /= tr;
                }
            }
            out.push(DensityBranch {
                tracked: self.tracked.iter().map(|&t| (t, b.bits[t])).collect(),
                probability: b.prob,
                rho: DensityMatrix::from_local(&rho),
            });
        }
        out.sort_by(|a, b| a.tracked.cmp(&b.tracked));
        Ok(DensityRun {
            branches: out,
            peak_qubits: self.peak,
        })
    }
}

fn merge_into(a: &mut Branch, mut b: Branch) {
    for w in 0..a.wires.len() {
        match (a.wires[w], b.wires[w]) {
            (Wire::Absent(x), Wire::Absent(y)) if x != y => {
                a.activate(w);
                b.activate(w);
            }
            (Wire::Active(_), Wire::Absent(_)) => b.activate(w),
            (Wire::Absent(_), Wire::Active(_)) => a.activate(w),
            (x, y) => debug_assert!(
                x == y || matches!((x, y), (Wire::Active(_), Wire::Active(_))),
                "wire {w}: {x:?} vs {y:?}"
            ),
        }
    }
    let perm: Vec<usize> = a
        .order
        .iter()
        .map(|w| match b.wires[*w] {
            Wire::Active(q) => q,
            _ => unreachable!("aligned above"),
        })
        .collect();
    let rb = b.rho.permuted(&perm);
    let total = a.prob + b.prob;
    let (wa, wb) = (a.prob / total, b.prob / total);
    for (x, y) in a.rho.data.iter_mut().zip(&rb.data) {
        *x = *x * wa + *y * wb;
    }
    a.prob = total;
}

/// Noisy run of `c` from `|0…0⟩` over all wires, branches summed.
pub fn run_density(c: &Circuit, noise: NoiseModel) -> Result<DensityMatrix> {
    if c.n_qubits() > DENSITY_QUBIT_CAP {
        return Err(Error::QubitCap {
            qubits: c.n_qubits(),
            cap: DENSITY_QUBIT_CAP,
        });
    }
    Ok(run_density_with(c, noise, &DensityOptions::default())?.mixture())
}

pub fn run_density_with(
    c: &Circuit,
    noise: NoiseModel,
    opts: &DensityOptions,
) -> Result<DensityRun> {
    DensitySimulator::new(c, noise, opts)?.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{Condition, Layout};
    use crate::sim::statevector::{run_statevector, RunMode};
    use proptest::prelude::*;

    fn c(n: usize, cbits: usize, gates: Vec<Gate>) -> Circuit {
        Circuit::from_gates(Layout::register(n).with_cbits(cbits), gates).unwrap()
    }

    fn close(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
        (a.matrix() - b.matrix()).norm()
    }

    #[test]
    fn noisy_x_matches_closed_form() {
        let r = 0.01;
        let noise = NoiseModel::new(r, 0.0).unwrap();
        let rho = run_density(&c(1, 0, vec![Gate::x(0)]), noise).unwrap();
        let p = 2.0 * r;
        let expected = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(p / 2.0, 0.0),
                ZERO,
                ZERO,
                C64::new(1.0 - p + p / 2.0, 0.0),
            ],
        );
        assert!((rho.matrix() - expected).norm() < 1e-15);
    }

    #[test]
    fn depolarizing_extremes() {
        let psi = {
            let mut s = StateVector::zero(2);
            s.apply(&Gate::h(0));
            s.apply(&Gate::cnot(0, 1));
            s
        };
        let rho = DensityMatrix::from_pure(&psi);
        assert_eq!(rho.apply_depolarizing(&[0, 1], 0.0).unwrap(), rho);
        let full = rho.apply_depolarizing(&[0, 1], 1.0).unwrap();
        assert!(close(&full, &DensityMatrix::maximally_mixed(2)) < 1e-15);
        assert!(rho.apply_depolarizing(&[0], 1.5).is_err());
    }

    #[test]
    fn zero_noise_matches_statevector_with_branches() {
        let gates = vec![
            Gate::h(0),
            Gate::ry(0.7, 1),
            Gate::cnot(0, 2),
            Gate::measure(0, 0),
            Gate::h(1).with_conditions(vec![Condition {
                bit: 0,
                value: true,
            }]),
            Gate::toffoli(1, 2, 0),
            Gate::reset(2),
        ];
        let circ = c(3, 1, gates);
        let rho = run_density(&circ, NoiseModel::ideal()).unwrap();
        let mut expected = DMatrix::zeros(8, 8);
        for b in run_statevector(&circ, RunMode::Enumerate).unwrap() {
            expected += DensityMatrix::from_pure(&b.state).matrix() * C64::new(b.probability, 0.0);
        }
        assert!((rho.matrix() - expected).norm() < 1e-12);
    }

    #[test]
    fn dead_wires_are_traced_and_kept_wires_ordered() {
        let gates = vec![Gate::x(1), Gate::h(0), Gate::cnot(0, 2), Gate::x(0)];
        let circ = c(3, 0, gates);
        let opts = DensityOptions {
            keep: Some(vec![1, 0]),
            ..DensityOptions::default()
        };
        let run = run_density_with(&circ, NoiseModel::ideal(), &opts).unwrap();
        let rho = &run.branches[0].rho;
        // wire 1 is |1⟩ (bit 0), wire 0 is maximally mixed after tracing wire 2.
        assert!((rho.matrix()[(1, 1)].re - 0.5).abs() < 1e-15);
        assert!((rho.matrix()[(3, 3)].re - 0.5).abs() < 1e-15);
        assert!(rho.matrix()[(1, 3)].norm() < 1e-15);
    }

    #[test]
    fn tracked_bits_separate_branches() {
        let circ = c(1, 1, vec![Gate::ry(1.0, 0), Gate::measure(0, 0)]);
        let opts = DensityOptions {
            tracked_bits: vec![0],
            ..DensityOptions::default()
        };
        let run = run_density_with(&circ, NoiseModel::ideal(), &opts).unwrap();
        assert_eq!(run.branches.len(), 2);
        assert!((run.probability_all(true) - (0.5f64).sin().powi(2)).abs() < 1e-14);
        assert!((run.total_probability() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn snapshot_mid_circuit() {
        let circ = c(2, 0, vec![Gate::h(0), Gate::cnot(0, 1), Gate::cnot(0, 1)]);
        let mut sim =
            DensitySimulator::new(&circ, NoiseModel::ideal(), &DensityOptions::default()).unwrap();
        sim.run_to(2).unwrap();
        let reduced = sim.snapshot(&[1]).unwrap();
        assert!(close(&reduced, &DensityMatrix::maximally_mixed(1)) < 1e-15);
    }

    #[test]
    fn cap_counts_active_qubits() {
        let circ = c(3, 0, vec![Gate::h(0), Gate::cnot(0, 1), Gate::cnot(1, 2)]);
        let opts = DensityOptions {
            qubit_cap: 2,
            ..DensityOptions::default()
        };
        assert!(matches!(
            run_density_with(&circ, NoiseModel::ideal(), &opts),
            Err(Error::QubitCap { .. })
        ));
    }

    #[test]
    fn apply_gate_matches_unitary_conjugation() {
        let g = Gate::cry(0.9, crate::circuit::Control::open(1), 0);
        let mut s = StateVector::zero(2);
        s.apply(&Gate::h(1));
        s.apply(&Gate::ry(0.4, 0));
        let mut rho = DensityMatrix::from_pure(&s);
        rho.apply_gate(&g).unwrap();
        s.apply(&g);
        assert!(close(&rho, &DensityMatrix::from_pure(&s)) < 1e-14);
    }

    fn random_rho(seed: u64, n: usize) -> DensityMatrix {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = 1 << n;
        let a = DMatrix::from_fn(d, d, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let m = &a * a.adjoint();
        let tr = m.trace();
        DensityMatrix::from_matrix(m / tr).unwrap()
    }

    proptest! {
        #[test]
        fn depolarizing_is_cptp(seed in any::<u64>(), p in 0.0f64..=1.0, q in 0usize..3, two in any::<bool>()) {
            let rho = random_rho(seed, 3);
            let qubits = if two { vec![q, (q + 1) % 3] } else { vec![q] };
            let out = rho.apply_depolarizing(&qubits, p).unwrap();
            prop_assert!((out.trace() - 1.0).abs() <= 1e-10);
            prop_assert!(out.hermiticity_error() <= 1e-12);
            prop_assert!(out.min_eigenvalue() >= -1e-9);
        }
    }
}
