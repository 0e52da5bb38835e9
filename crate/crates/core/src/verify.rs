//! Reference antisymmetrizer and swap-test based antisymmetry checks.

use crate::builder::OrbitalSet;
use crate::circuit::{Circuit, Gate, Layout, QubitRef, Register};
use crate::error::{Error, Result};
use crate::sim::{run_statevector_from, RunMode, StateVector};
use crate::C64;

use serde::Serialize;

/// Largest particle count the permutation sum accepts (`7! = 5040`).
pub const ORACLE_MAX_PARTICLES: usize = 7;

/// All permutations of `0..n` with their signs, in lexicographic order.
pub fn signed_permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    loop {
        out.push((p.clone(), sign));
        // Next lexicographic permutation, tracking parity.
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            break;
        };
        let j = (i..n)
            .rev()
            .find(|&j| p[j] > p[i - 1])
            .expect("pivot exists");
        p.swap(i - 1, j);
        p[i..].reverse();
        let tail = n - i;
        let flips = 1 + tail / 2;
        if flips % 2 == 1 {
            sign = -sign;
        }
    }
    out
}

/// `Σ_σ sgn(σ) φ_{σ(1)} ⊗ … ⊗ φ_{σ(N)}`, normalized. Particle 1 sits on
/// the lowest wires.
pub fn antisymmetrizer_oracle(orbitals: &OrbitalSet) -> Result<StateVector> {
    let n = orbitals.len();
    if n == 0 || n > ORACLE_MAX_PARTICLES {
        return Err(Error::InvalidArgument(format!(
            "oracle supports 1..={ORACLE_MAX_PARTICLES} particles, got {n}"
        )));
    }
    let eta = orbitals.eta();
    let states = orbitals.states();
    let dim = 1usize << (n * eta);
    let mut amps = vec![C64::new(0.0, 0.0); dim];
    for (perm, sign) in signed_permutations(n) {
        // Product amplitude at each index, register by register.
        for (idx, a) in amps.iter_mut().enumerate() {
            let mut term = C64::new(sign, 0.0);
            for (slot, &orb) in perm.iter().enumerate() {
                let local = idx >> (slot * eta) & ((1 << eta) - 1);
                term *= states[orb][local];
                if term.norm_sqr() == 0.0 {
                    break;
                }
            }
            *a += term;
        }
    }
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect())
}

/// Applies the register permutation `perm` (register `k` moves to slot
/// `perm[k]`) to an `n`-register state; extra high wires are carried along.
pub fn permute_registers(s: &StateVector, n: usize, eta: usize, perm: &[usize]) -> StateVector {
    let mask = (1usize << eta) - 1;
    let particle_bits = n * eta;
    let mut out = vec![C64::new(0.0, 0.0); s.dim()];
    for (idx, a) in s.amplitudes().iter().enumerate() {
        let mut j = idx >> particle_bits << particle_bits;
        for (k, &dest) in perm.iter().enumerate() {
            j |= (idx >> (k * eta) & mask) << (dest * eta);
        }
        out[j] = *a;
    }
    StateVector::from_amplitudes(out).expect("permutation preserves the norm")
}

/// Projection onto the antisymmetric subspace of the first `n` registers.
/// Returns the normalized projection and its weight `‖P_A ψ‖²`.
pub fn project_antisymmetric(s: &StateVector, n: usize, eta: usize) -> Result<(StateVector, f64)> {
    if n > ORACLE_MAX_PARTICLES || n * eta > s.n_qubits() {
        return Err(Error::InvalidArgument(format!(
            "cannot antisymmetrize {n} registers of {eta} qubits in a {}-qubit state",
            s.n_qubits()
        )));
    }
    let perms = signed_permutations(n);
    let scale = 1.0 / perms.len() as f64;
    let mut acc = vec![C64::new(0.0, 0.0); s.dim()];
    for (perm, sign) in perms {
        let p = permute_registers(s, n, eta, &perm);
        for (x, y) in acc.iter_mut().zip(p.amplitudes()) {
            *x += y * (sign * scale);
        }
    }
    let weight: f64 = acc.iter().map(|a| a.norm_sqr()).sum();
    if weight < 1e-24 {
        return Err(Error::InvalidArgument(
            "state has no antisymmetric component".into(),
        ));
    }
    let norm = weight.sqrt();
    let state = StateVector::from_amplitudes(acc.into_iter().map(|a| a / norm).collect())?;
    Ok((state, weight))
}

/// `|⟨a|b⟩|`.
pub fn overlap_up_to_global_phase(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm().min(1.0))
}

/// Particle pairs `(i, j)`, `i < j`, in test order.
pub fn test_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..=n)
        .flat_map(|i| (i + 1..=n).map(move |j| (i, j)))
        .collect()
}

/// Swap tests of every particle pair on `N` registers, sharing one test
/// ancilla that is reset after each measurement. Pair `k` of
/// [`test_pairs`] writes classical bit `k`; an antisymmetric input yields
/// all ones.
pub fn antisym_probability_circuit(n: usize, eta: usize) -> Result<Circuit> {
    if n < 2 || eta == 0 {
        return Err(Error::InvalidArgument(format!(
            "swap tests need at least two registers, got N={n}, eta={eta}"
        )));
    }
    let pairs = test_pairs(n);
    let layout = Layout::new(n, eta).with_ancillas(1).with_cbits(pairs.len());
    let a = layout.ancilla_wire(1);
    let mut gates = Vec::new();
    for (k, &(i, j)) in pairs.iter().enumerate() {
        gates.push(Gate::h(a));
        for (x, y) in layout.particle_wires(i).zip(layout.particle_wires(j)) {
            gates.push(Gate::cswap(a, x, y));
        }
        gates.push(Gate::h(a));
        gates.push(Gate::measure(a, k));
        if k + 1 < pairs.len() {
            gates.push(Gate::reset(a));
        }
    }
    Circuit::from_gates(layout, gates)
}

/// `prep` followed by the pairwise swap tests on a fresh test ancilla.
/// Returns the combined circuit, the index where the tests start, and the
/// classical bits holding the test outcomes.
pub fn with_antisym_test(prep: &Circuit) -> Result<(Circuit, usize, Vec<usize>)> {
    let old = *prep.layout();
    let test = antisym_probability_circuit(old.n_particles, old.eta)?;
    let layout = old
        .with_ancillas(old.ancillas + 1)
        .with_cbits(old.cbits + test.layout().cbits);
    let to_new = |from: &Layout, w: usize| -> usize {
        layout
            .wire(from.qubit_ref(w).expect("wire inside layout"))
            .expect("layout was widened")
    };
    let mut out = prep.remap(layout, |w| to_new(&old, w), 0)?;
    let start = out.len();
    let t_layout = *test.layout();
    let test_ancilla = layout.wire(QubitRef {
        register: Register::AntisymAncilla(layout.ancillas),
        offset: 0,
    })?;
    let mapped = test.remap(
        layout,
        |w| {
            if w == t_layout.ancilla_wire(1) {
                test_ancilla
            } else {
                to_new(&t_layout, w)
            }
        },
        old.cbits,
    )?;
    out.append(&mapped)?;
    let bits = (old.cbits..layout.cbits).collect();
    Ok((out, start, bits))
}

/// Probability that every swap test reports `1` after running `prep` ideally.
pub fn antisymmetry_probability(prep: &Circuit) -> Result<f64> {
    let (c, _, bits) = with_antisym_test(prep)?;
    let runs = run_statevector_from(&c, StateVector::zero(c.n_qubits()), RunMode::Enumerate)?;
    Ok(runs
        .iter()
        .filter(|r| bits.iter().all(|&b| r.bits[b]))
        .map(|r| r.probability)
        .sum())
}

/// Swap-test outcome probability `(1 − Re⟨ψ|SWAP_ij|ψ⟩)/2` for each pair,
/// evaluated directly on the state.
pub fn pair_probabilities(s: &StateVector, n: usize, eta: usize) -> Vec<f64> {
    test_pairs(n)
        .into_iter()
        .map(|(i, j)| {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.swap(i - 1, j - 1);
            let swapped = permute_registers(s, n, eta, &perm);
            let ev = s.inner(&swapped).expect("same dimension").re;
            ((1.0 - ev) / 2.0).clamp(0.0, 1.0)
        })
        .collect()
}

/// Checks of a prepared circuit against the oracle state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub branches: usize,
    /// Smallest per-branch `√⟨σ|ρ_particles|σ⟩` over measurement histories.
    pub min_overlap: f64,
    /// Branch-averaged `⟨σ|ρ_particles|σ⟩`.
    pub fidelity: f64,
    /// Branch-averaged probability that every non-particle wire reads 0.
    pub ancilla_zero_probability: f64,
    /// Branch-averaged swap-test probabilities in [`test_pairs`] order.
    pub pair_probabilities: Vec<f64>,
    pub total_probability: f64,
}

/// `⟨σ|Tr_rest(|ψ⟩⟨ψ|)|σ⟩` for `σ` on the lowest wires of `psi`.
fn overlap_on_low_wires(psi: &StateVector, sigma: &StateVector) -> f64 {
    let d = sigma.dim();
    psi.amplitudes()
        .chunks(d)
        .map(|block| {
            block
                .iter()
                .zip(sigma.amplitudes())
                .map(|(a, s)| s.conj() * a)
                .sum::<C64>()
                .norm_sqr()
        })
        .sum()
}

/// Runs `c` ideally over every measurement history and compares the
/// particle registers with the antisymmetrized `orbitals`.
pub fn verify_circuit(c: &Circuit, orbitals: &OrbitalSet) -> Result<VerifyReport> {
    let layout = c.layout();
    if layout.n_particles != orbitals.len() || layout.eta != orbitals.eta() {
        return Err(Error::InvalidArgument(format!(
            "circuit has {} particles of {} qubits, orbitals give {} of {}",
            layout.n_particles,
            layout.eta,
            orbitals.len(),
            orbitals.eta()
        )));
    }
    let sigma = antisymmetrizer_oracle(orbitals)?;
    let p = layout.particle_qubits();
    let rest: Vec<usize> = (p..layout.n_qubits()).collect();
    let runs = run_statevector_from(c, StateVector::zero(c.n_qubits()), RunMode::Enumerate)?;
    let n = layout.n_particles;
    let mut report = VerifyReport {
        branches: runs.len(),
        min_overlap: 1.0,
        fidelity: 0.0,
        ancilla_zero_probability: 0.0,
        pair_probabilities: vec![0.0; test_pairs(n).len()],
        total_probability: 0.0,
    };
    for r in &runs {
        let f = overlap_on_low_wires(&r.state, &sigma);
        report.min_overlap = report.min_overlap.min(f.sqrt().min(1.0));
        report.fidelity += r.probability * f;
        report.ancilla_zero_probability += r.probability * r.state.prob_all_zero(&rest);
        for (acc, q) in report
            .pair_probabilities
            .iter_mut()
            .zip(pair_probabilities(&r.state, n, layout.eta))
        {
            *acc += r.probability * q;
        }
        report.total_probability += r.probability;
    }
    Ok(report)
}
