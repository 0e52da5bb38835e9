use super::*;
use crate::circuit::{Condition, Layout};
use crate::sim::{run_statevector, run_statevector_from, RunMode, StateVector};
use crate::C64;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn permutation(n: usize, f: impl Fn(usize) -> usize) -> DMatrix<C64> {
    let d = 1 << n;
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        m[(f(i), i)] = C64::new(1.0, 0.0);
    }
    m
}

fn bit(i: usize, w: usize) -> bool {
    i >> w & 1 == 1
}

fn toffoli_ref() -> DMatrix<C64> {
    permutation(3, |i| if bit(i, 0) && bit(i, 1) { i ^ 4 } else { i })
}

fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Distance after removing the global phase fixed by the largest entry.
fn diff_up_to_phase(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    let (k, _) = b
        .iter()
        .enumerate()
        .max_by(|x, y| x.1.norm().total_cmp(&y.1.norm()))
        .unwrap();
    let phase = a[k] / b[k];
    max_diff(a, &(b * phase))
}

fn tallies(c: &Circuit) -> (usize, usize) {
    let n = c.counts();
    (n.clifford, n.t_like)
}

#[test]
fn toffoli_exact() {
    let c = lower_toffoli();
    assert!(max_diff(&c.unitary().unwrap(), &toffoli_ref()) < 1e-12);
    assert_eq!(tallies(&c), (8, 7));
}

#[test]
fn ccz_exact() {
    let c = lower_ccz();
    let mut want = DMatrix::<C64>::identity(8, 8);
    want[(7, 7)] = C64::new(-1.0, 0.0);
    assert!(max_diff(&c.unitary().unwrap(), &want) < 1e-12);
    assert_eq!(tallies(&c), (6, 7));
}

#[test]
fn phase_toffoli_magnitudes() {
    let c = lower_toffoli_phase();
    let u = c.unitary().unwrap();
    let r = toffoli_ref();
    for (x, y) in u.iter().zip(r.iter()) {
        assert!((x.norm() - y.norm()).abs() < 1e-12);
    }
    assert_eq!(tallies(&c), (5, 4));
    // Only the phase differs, so it is Toffoli times a diagonal.
    let d = &u * r.adjoint();
    for i in 0..8 {
        for j in 0..8 {
            if i != j {
                assert!(d[(i, j)].norm() < 1e-12);
            }
        }
    }
}

#[test]
fn cswap_exact() {
    let c = lower_cswap();
    let want = permutation(3, |i| {
        if bit(i, 0) && bit(i, 1) != bit(i, 2) {
            i ^ 0b110
        } else {
            i
        }
    });
    assert!(max_diff(&c.unitary().unwrap(), &want) < 1e-12);
    assert_eq!(tallies(&c), (10, 7));
}

fn controlled(u: [C64; 4]) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::identity(4, 4);
    // Control is wire 0, target wire 1: indices 0b01 and 0b11.
    m[(1, 1)] = u[0];
    m[(1, 3)] = u[1];
    m[(3, 1)] = u[2];
    m[(3, 3)] = u[3];
    m
}

#[test]
fn controlled_h_exact() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let hm = [h, h, h, -h].map(|x| C64::new(x, 0.0));
    let c = lower_controlled_h();
    assert!(max_diff(&c.unitary().unwrap(), &controlled(hm)) < 1e-12);
    assert_eq!(c.counts().t_like, 2);
}

fn ry(theta: f64) -> [C64; 4] {
    let (s, c) = (theta / 2.0).sin_cos();
    [c, -s, s, c].map(|x| C64::new(x, 0.0))
}

#[test]
fn controlled_ry_exact() {
    for theta in [
        0.3,
        -1.7,
        2.9,
        std::f64::consts::FRAC_PI_2,
        -std::f64::consts::FRAC_PI_2,
    ] {
        let c = lower_controlled_ry(theta);
        assert!(
            max_diff(&c.unitary().unwrap(), &controlled(ry(theta))) < 1e-12,
            "{theta}"
        );
    }
    assert!(lower_controlled_ry(0.0).is_empty());
    let half = lower_controlled_ry(std::f64::consts::FRAC_PI_2);
    assert_eq!(half.counts().rotations, 0);
}

#[test]
fn kept_ry_is_conjugated_rz() {
    let c = Circuit::from_gates(Layout::register(1), vec![Gate::ry(0.77, 0)]).unwrap();
    let l = lower_circuit(&c, &LoweringOptions::default()).unwrap();
    let kinds: Vec<&str> = l.circuit.gates().iter().map(|g| g.kind.name()).collect();
    assert_eq!(kinds, ["SX", "RZ", "SXDG"]);
    let want = DMatrix::from_row_slice(2, 2, &ry(0.77));
    assert!(diff_up_to_phase(&l.circuit.unitary().unwrap(), &want) < 1e-12);
}

/// Action on basis states with work wires at zero, by bit logic.
fn check_mcx(n_c: usize, style: ToffoliStyle) {
    let c = lower_mcx(n_c, style).unwrap();
    let n = c.n_qubits();
    for i in 0..1usize << (n_c + 1) {
        let out = run_statevector_from(&c, StateVector::basis(n, i), RunMode::Enumerate)
            .unwrap()
            .remove(0)
            .state;
        let all = (0..n_c).all(|w| bit(i, w));
        let want = if all { i ^ 1 << n_c } else { i };
        assert!((out[want].norm() - 1.0).abs() < 1e-12, "n_c={n_c} i={i}");
        assert!(
            (out[want] - C64::new(1.0, 0.0)).norm() < 1e-12,
            "phase n_c={n_c} i={i}"
        );
    }
}

#[test]
fn mcx_ladder_exact() {
    for n_c in 3..=5 {
        check_mcx(n_c, ToffoliStyle::Phase);
        check_mcx(n_c, ToffoliStyle::Exact);
    }
    let c = lower_mcx(3, ToffoliStyle::Phase).unwrap();
    assert_eq!(tallies(&c), (18, 15));
    assert_eq!(
        lower_mcx(2, ToffoliStyle::Phase).unwrap().counts().t_like,
        7
    );
    assert!(mcx_gates(&[0, 1, 2, 3], 4, &[5], ToffoliStyle::Phase).is_err());
}

#[test]
fn mcz_is_basis_changed_mcx() {
    let c = Circuit::from_gates(
        Layout::register(4),
        vec![Gate::mcz((0..3).map(Control::closed).collect(), 3)],
    )
    .unwrap();
    let l = lower_circuit(&c, &LoweringOptions::default()).unwrap();
    assert_eq!(l.circuit.layout().work, 1);
    for i in 0..16usize {
        let s = run_statevector_from(&l.circuit, StateVector::basis(5, i), RunMode::Enumerate)
            .unwrap()
            .remove(0)
            .state;
        let sign = if i == 15 { -1.0 } else { 1.0 };
        assert!((s[i] - C64::new(sign, 0.0)).norm() < 1e-12);
    }
}

#[test]
fn open_control_sandwiches_cancel() {
    let g = Gate::mcx(vec![Control::open(0)], 1);
    let c = Circuit::from_gates(Layout::register(2), vec![g.clone(), g]).unwrap();
    let l = lower_circuit(&c, &LoweringOptions::default()).unwrap();
    assert_eq!(l.circuit.len(), 4);
    assert_eq!(l.absorbed_x, 2);
    let plain = LoweringOptions {
        absorb_open_controls: false,
        ..LoweringOptions::default()
    };
    let l2 = lower_circuit(&c, &plain).unwrap();
    assert_eq!(l2.circuit.len(), 6);
    assert!(
        max_diff(
            &l.circuit.unitary().unwrap(),
            &l2.circuit.unitary().unwrap()
        ) < 1e-12
    );
}

#[test]
fn guards_block_absorption() {
    let layout = Layout::register(2).with_cbits(1);
    let g = Gate::mcx(vec![Control::open(0)], 1);
    let guarded = g.clone().with_conditions(vec![Condition {
        bit: 0,
        value: true,
    }]);
    let c = Circuit::from_gates(layout, vec![g, guarded]).unwrap();
    let l = lower_circuit(&c, &LoweringOptions::default()).unwrap();
    assert_eq!(l.absorbed_x, 0);
    assert_eq!(l.unconditioned.clifford, 3);
    assert_eq!(l.counts.clifford, 6);
}

#[test]
fn dense_is_rejected() {
    let m = DMatrix::<C64>::identity(2, 2);
    let c = Circuit::from_gates(Layout::register(1), vec![Gate::dense("I", m, vec![0])]).unwrap();
    assert!(lower_circuit(&c, &LoweringOptions::default()).is_err());
}

#[test]
fn synthesized_rotations_leave_no_rotations() {
    let c = Circuit::from_gates(
        Layout::register(2),
        vec![
            Gate::ry(0.9, 0),
            Gate::cry(1.3, Control::closed(0), 1),
            Gate::rz(0.4, 1),
        ],
    )
    .unwrap();
    let opts = LoweringOptions {
        keep_rotations: false,
        rotation_epsilon: 1e-2,
        ..LoweringOptions::default()
    };
    let l = lower_circuit(&c, &opts).unwrap();
    assert_eq!(l.counts.rotations, 0);
    let ideal = run_statevector(&c, RunMode::Enumerate)
        .unwrap()
        .remove(0)
        .state;
    let approx = run_statevector(&l.circuit, RunMode::Enumerate)
        .unwrap()
        .remove(0)
        .state;
    let overlap = ideal.inner(&approx).unwrap().norm();
    // Four rotations at 1e-2 each.
    assert!(overlap > 1.0 - 4.0 * 1e-2, "{overlap}");
}

fn gate_strategy(n: usize) -> impl Strategy<Value = Gate> {
    let wires = proptest::sample::subsequence((0..n).collect::<Vec<_>>(), 4);
    (
        0usize..12,
        wires,
        proptest::collection::vec(any::<bool>(), 4),
        -3.0..3.0f64,
    )
        .prop_map(|(k, mut w, pol, theta)| {
            w.rotate_left(k % 4);
            let ctl = |i: usize| {
                if pol[i] {
                    Control::closed(w[i])
                } else {
                    Control::open(w[i])
                }
            };
            match k {
                0 => Gate::h(w[0]),
                1 => Gate::single(GateKind::T, w[0]),
                2 => Gate::ry(theta, w[0]),
                3 => Gate::rz(theta, w[0]),
                4 => Gate::mcx(vec![ctl(1)], w[0]),
                5 => Gate::new(GateKind::Cz, vec![w[0]], vec![ctl(1)]),
                6 => Gate::swap(w[0], w[1]),
                7 => Gate::cry(theta, ctl(1), w[0]),
                8 => Gate::mcx(vec![ctl(1), ctl(2)], w[0]),
                9 => Gate::new(GateKind::Cswap, vec![w[0], w[1]], vec![ctl(2)]),
                10 => Gate::mcx(vec![ctl(1), ctl(2), ctl(3)], w[0]),
                _ => Gate::mcz(vec![ctl(1), ctl(2), ctl(3)], w[0]),
            }
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]
    #[test]
    fn lowering_preserves_state(gates in proptest::collection::vec(gate_strategy(6), 1..25)) {
        let mut all = vec![Gate::h(0), Gate::h(2), Gate::ry(0.7, 4)];
        all.extend(gates);
        let c = Circuit::from_gates(Layout::register(6), all).unwrap();
        for style in [ToffoliStyle::Phase, ToffoliStyle::Exact] {
            let opts = LoweringOptions { toffoli_style: style, ..LoweringOptions::default() };
            let l = lower_circuit(&c, &opts).unwrap();
            for g in l.circuit.gates() {
                let native = g.kind.is_clifford() || g.kind.is_t_like()
                    || matches!(g.kind, GateKind::Rz(_));
                prop_assert!(native, "{}", g.kind.name());
                prop_assert!(g.controls.iter().all(|c| c.active_value()));
            }
            let ideal = run_statevector(&c, RunMode::Enumerate).unwrap().remove(0).state;
            let out = run_statevector(&l.circuit, RunMode::Enumerate).unwrap().remove(0).state;
            let work: Vec<usize> = (6..l.circuit.n_qubits()).collect();
            prop_assert!(out.prob_all_zero(&work) > 1.0 - 1e-10);
            let kept = out.restrict(&(0..6).collect::<Vec<_>>()).unwrap();
            prop_assert!(ideal.inner(&kept).unwrap().norm() > 1.0 - 1e-10);
            let again = lower_circuit(&l.circuit, &opts).unwrap();
            prop_assert_eq!(again.counts, l.counts);
            prop_assert_eq!(again.circuit.layout(), l.circuit.layout());
        }
    }
}
