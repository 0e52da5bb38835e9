use super::*;
use crate::sim::{run_statevector, RunMode, StateVector};
use crate::C64;

/// `(1/√N!) Σ_σ sgn(σ) φ_{σ(1)} ⊗ … ⊗ φ_{σ(N)}`, particle 1 on the low wires.
fn oracle(states: &[StateVector]) -> StateVector {
    let n = states.len();
    let eta = states[0].n_qubits();
    let mut amps = vec![C64::new(0.0, 0.0); 1 << (n * eta)];
    let mut perm: Vec<usize> = (0..n).collect();
    let mut norm = 0.0f64;
    loop {
        let inversions = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| perm[i] > perm[j])
            .count();
        let sign = if inversions % 2 == 0 { 1.0 } else { -1.0 };
        let mut term = states[perm[0]].clone();
        for &p in &perm[1..] {
            term = term.tensor(&states[p]);
        }
        for (a, t) in amps.iter_mut().zip(term.amplitudes()) {
            *a += t * sign;
        }
        norm += 1.0;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    let s = norm.sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|a| a / s).collect()).unwrap()
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn overlap(a: &StateVector, b: &StateVector) -> f64 {
    a.inner(b).unwrap().norm()
}

fn particle_state(c: &Circuit, s: &StateVector) -> StateVector {
    s.restrict(&particle_wires(c.layout())).unwrap()
}

fn check_recursive(orbitals: &OrbitalSet) {
    let c = build_full_recursive(orbitals).unwrap();
    let mut runs = run_statevector(&c, RunMode::Enumerate).unwrap();
    assert_eq!(runs.len(), 1);
    let s = runs.remove(0).state;
    assert!(s.prob_all_zero(&ancilla_wires(c.layout())) > 1.0 - 1e-12);
    let got = particle_state(&c, &s);
    let want = oracle(orbitals.states());
    assert!(overlap(&got, &want) > 1.0 - 1e-10);
}

fn check_measurement(orbitals: &OrbitalSet, reuse: bool) {
    let c = build_full_measurement(orbitals, reuse).unwrap();
    let want = oracle(orbitals.states());
    let runs = run_statevector(&c, RunMode::Enumerate).unwrap();
    let total: f64 = runs.iter().map(|r| r.probability).sum();
    assert!((total - 1.0).abs() < 1e-10);
    for r in &runs {
        let got = particle_state(&c, &r.state);
        assert!(
            overlap(&got, &want) > 1.0 - 1e-10,
            "branch {} p={}",
            r.bit_string(),
            r.probability
        );
    }
}

#[test]
fn two_particles_one_qubit() {
    let orbitals = OrbitalSet::from_integers(1, &[0, 1]).unwrap();
    let c = build_full_recursive(&orbitals).unwrap();
    let s = run_statevector(&c, RunMode::Enumerate)
        .unwrap()
        .remove(0)
        .state;
    let p = particle_state(&c, &s);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let phase = p[0b01] / h;
    assert!((phase.norm() - 1.0).abs() < 1e-12);
    assert!((p[0b10] + phase * h).norm() < 1e-12);
    assert!(p[0b00].norm() < 1e-12 && p[0b11].norm() < 1e-12);
}

#[test]
fn recursive_matches_oracle() {
    check_recursive(&OrbitalSet::from_integers(3, &[0, 1, 2]).unwrap());
    check_recursive(&OrbitalSet::from_integers(2, &[3, 0, 2, 1]).unwrap());
    check_recursive(&OrbitalSet::random(3, 2, 7).unwrap());
    check_recursive(&OrbitalSet::random(4, 2, 11).unwrap());
}

#[test]
fn measurement_branches_match_oracle() {
    check_measurement(&OrbitalSet::from_integers(3, &[0, 1, 2]).unwrap(), true);
    check_measurement(&OrbitalSet::random(3, 2, 3).unwrap(), true);
    check_measurement(&OrbitalSet::random(3, 2, 5).unwrap(), false);
    check_measurement(&OrbitalSet::random(4, 2, 13).unwrap(), true);
}

#[test]
fn swapping_two_particles_flips_sign() {
    let orbitals = OrbitalSet::random(3, 2, 21).unwrap();
    let c = build_full_recursive(&orbitals).unwrap();
    let s = run_statevector(&c, RunMode::Enumerate)
        .unwrap()
        .remove(0)
        .state;
    let before = particle_state(&c, &s);
    let mut after = before.clone();
    for (a, b) in [(0, 2), (1, 3)] {
        after.apply(&Gate::swap(a, b));
    }
    let ip = before.inner(&after).unwrap();
    assert!((ip + C64::new(1.0, 0.0)).norm() < 1e-10);
}

#[test]
fn structural_counts() {
    for n in 2..=5usize {
        let orbitals = OrbitalSet::from_integers(3, &(0..n).collect::<Vec<_>>()).unwrap();
        let out = build(&orbitals, &BuildOptions::default()).unwrap();
        let t = out.trace;
        assert_eq!(t.u_blocks, n * (n + 1) / 2);
        assert_eq!(t.u_dagger_blocks, n * (n - 1) / 2);
        assert_eq!(t.cswaps, 3 * n * (n - 1) / 2);
        assert_eq!(t.cnx, n * (n - 1) / 2);
        assert_eq!(structural_gate_counts(&out.circuit), (t.cswaps, t.cnx));
        assert_eq!(out.circuit.layout().ancillas, n - 1);
    }
}

#[test]
fn measurement_layout() {
    let orbitals = OrbitalSet::from_integers(3, &[0, 1, 2, 3]).unwrap();
    let reuse = build_full_measurement(&orbitals, true).unwrap();
    assert_eq!((reuse.layout().ancillas, reuse.layout().cbits), (3, 6));
    let fresh = build_full_measurement(&orbitals, false).unwrap();
    assert_eq!((fresh.layout().ancillas, fresh.layout().cbits), (6, 6));
    let measured: Vec<usize> = fresh
        .gates()
        .iter()
        .filter(|g| matches!(g.kind, GateKind::Measure(_)))
        .map(|g| g.targets[0])
        .collect();
    let mut unique = measured.clone();
    unique.dedup();
    assert_eq!(unique.len(), 6);
}

#[test]
fn corrections_are_conditioned_on_all_step_bits() {
    let orbitals = OrbitalSet::from_integers(3, &[0, 1, 2]).unwrap();
    let out = build(
        &orbitals,
        &BuildOptions {
            variant: Variant::Measurement,
            ..BuildOptions::default()
        },
    )
    .unwrap();
    // Step 2: outcome 1 corrects p_1. Step 3: |01⟩, |10⟩, |11⟩ one each.
    assert_eq!(out.trace.phase_corrections, 4);
    for g in out
        .circuit
        .gates()
        .iter()
        .filter(|g| !g.conditions.is_empty())
    {
        let bits: Vec<usize> = g.conditions.iter().map(|c| c.bit).collect();
        assert!(bits == vec![0] || bits == vec![1, 2], "{bits:?}");
    }
}

#[test]
fn phase_correction_reflects_prepared_state() {
    let orbitals = OrbitalSet::random(2, 3, 9).unwrap();
    let u = orbitals.prep(1);
    let m = phase_correction(u).unwrap().unitary().unwrap();
    let phi = orbitals.state(1).amplitudes();
    for r in 0..8 {
        for c in 0..8 {
            let id = if r == c { 1.0 } else { 0.0 };
            let want = C64::new(id, 0.0) - phi[r] * phi[c].conj() * 2.0;
            assert!((m[(r, c)] - want).norm() < 1e-10);
        }
    }
    let one = phase_correction(&Circuit::new(Layout::register(1))).unwrap();
    let m1 = one.unitary().unwrap();
    assert!((m1[(0, 0)] + 1.0).norm() < 1e-12 && (m1[(1, 1)] - 1.0).norm() < 1e-12);
}

#[test]
fn step_rejects_mismatched_register() {
    let prev = Circuit::new(Layout::new(1, 2));
    assert!(build_recursive_step(&prev, &Circuit::new(Layout::register(3))).is_err());
    assert!(build_measurement_step(&prev, &Circuit::new(Layout::register(2)), true).is_ok());
}

#[test]
fn sorted_build_still_antisymmetric() {
    let orbitals = OrbitalSet::random(3, 2, 17).unwrap();
    let out = build(
        &orbitals,
        &BuildOptions {
            sort_by_cost: true,
            ..BuildOptions::default()
        },
    )
    .unwrap();
    let s = run_statevector(&out.circuit, RunMode::Enumerate)
        .unwrap()
        .remove(0)
        .state;
    let got = particle_state(&out.circuit, &s);
    assert!(overlap(&got, &oracle(orbitals.states())) > 1.0 - 1e-10);
}
