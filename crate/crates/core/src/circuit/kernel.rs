//! In-place amplitude kernels shared by the statevector simulator and the
//! dense-unitary extraction.

use super::gate::Gate;
use crate::C64;

/// Inserts a zero bit at position `bit` of `i`.
#[inline]
pub(crate) fn insert_zero_bit(i: usize, bit: usize) -> usize {
    let low = i & ((1usize << bit) - 1);
    ((i >> bit) << (bit + 1)) | low
}

/// Applies a unitary gate (controls honoured, classical guards ignored) to a
/// statevector whose wire `w` is bit `w` of the amplitude index.
pub fn apply_gate(amps: &mut [C64], gate: &Gate) {
    debug_assert!(!gate.kind.is_measurement_or_reset());
    let (cmask, cval) = gate.control_mask();
    if gate.targets.len() == 1 {
        if let Some(m) = gate.kind.matrix_1q() {
            apply_1q(amps, gate.targets[0], &m, cmask, cval);
            return;
        }
    }
    let m = gate
        .kind
        .base_matrix()
        .expect("non-measurement gate has a matrix");
    let k = gate.targets.len();
    let dim = 1usize << k;
    let offsets: Vec<usize> = (0..dim)
        .map(|a| {
            (0..k)
                .filter(|j| a >> j & 1 == 1)
                .map(|j| 1usize << gate.targets[j])
                .sum()
        })
        .collect();
    let tmask: usize = gate.targets.iter().map(|t| 1usize << t).sum();
    let mut buf = vec![C64::new(0.0, 0.0); dim];
    for base in 0..amps.len() {
        if base & tmask != 0 || base & cmask != cval {
            continue;
        }
        for (a, off) in offsets.iter().enumerate() {
            buf[a] = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (c, v) in buf.iter().enumerate() {
                acc += m[(r, c)] * v;
            }
            amps[base | off] = acc;
        }
    }
}

pub(crate) fn apply_1q(amps: &mut [C64], target: usize, m: &[C64; 4], cmask: usize, cval: usize) {
    let half = amps.len() >> 1;
    let tbit = 1usize << target;
    let diagonal = m[1] == C64::new(0.0, 0.0) && m[2] == C64::new(0.0, 0.0);
    for j in 0..half {
        let i0 = insert_zero_bit(j, target);
        if i0 & cmask != cval {
            continue;
        }
        let i1 = i0 | tbit;
        if diagonal {
            amps[i0] *= m[0];
            amps[i1] *= m[3];
        } else {
            let a0 = amps[i0];
            let a1 = amps[i1];
            amps[i0] = m[0] * a0 + m[1] * a1;
            amps[i1] = m[2] * a0 + m[3] * a1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gate::Control;

    fn basis(n: usize, k: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); 1 << n];
        v[k] = C64::new(1.0, 0.0);
        v
    }

    #[test]
    fn insert_zero_bit_positions() {
        assert_eq!(insert_zero_bit(0b11, 0), 0b110);
        assert_eq!(insert_zero_bit(0b11, 1), 0b101);
        assert_eq!(insert_zero_bit(0b11, 2), 0b011);
    }

    #[test]
    fn open_and_closed_controls() {
        let mut v = basis(2, 0b00);
        apply_gate(&mut v, &Gate::cnot(0, 1));
        assert_eq!(v[0b00].re, 1.0);
        let open = Gate::mcx(vec![Control::open(0)], 1);
        apply_gate(&mut v, &open);
        assert_eq!(v[0b10].re, 1.0);
    }

    #[test]
    fn cswap_exchanges_targets_when_control_set() {
        let mut v = basis(3, 0b011);
        apply_gate(&mut v, &Gate::cswap(0, 1, 2));
        assert_eq!(v[0b101].re, 1.0);
        let mut w = basis(3, 0b010);
        apply_gate(&mut w, &Gate::cswap(0, 1, 2));
        assert_eq!(w[0b010].re, 1.0);
    }
}
