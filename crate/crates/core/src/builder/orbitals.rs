use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::circuit::{Circuit, Gate, Layout};
use crate::error::{Error, Result};
use crate::sim::{run_statevector, RunMode, StateVector};
use crate::C64;

/// Tolerance for orbital orthogonality and normalization.
pub const ORTHO_TOL: f64 = 1e-10;

/// Angles below this are treated as zero and their rotations elided.
const ANGLE_EPS: f64 = 1e-14;

/// X gates on the set bits of `r` (wire `j` ↔ bit `j`).
pub fn basis_orbital(r: usize, eta: usize) -> Result<Circuit> {
    if eta < usize::BITS as usize && r >> eta != 0 {
        return Err(Error::InvalidArgument(format!(
            "integer {r} does not fit in {eta} qubits"
        )));
    }
    let gates = (0..eta).filter(|j| r >> j & 1 == 1).map(Gate::x).collect();
    Circuit::from_gates(Layout::register(eta), gates)
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

/// Uniformly controlled rotation: applies `rot(alpha[j])` to `target` when
/// the control wires (bit `k` of `j` ↔ `controls[k]`) hold `j`.
///
/// Uses `2^m` single rotations interleaved with Gray-code CNOTs.
/// All-zero multiplexors emit nothing.
fn multiplexed(
    alpha: &[f64],
    controls: &[usize],
    target: usize,
    rot: fn(f64, usize) -> Gate,
    out: &mut Vec<Gate>,
) {
    if alpha.iter().all(|a| a.abs() < ANGLE_EPS) {
        return;
    }
    let m = controls.len();
    if m == 0 {
        out.push(rot(alpha[0], target));
        return;
    }
    let size = 1usize << m;
    let scale = 1.0 / size as f64;
    for i in 0..size {
        let g = gray(i);
        let theta: f64 = alpha
            .iter()
            .enumerate()
            .map(|(j, a)| {
                if (j & g).count_ones().is_multiple_of(2) {
                    *a
                } else {
                    -a
                }
            })
            .sum::<f64>()
            * scale;
        if theta.abs() >= ANGLE_EPS {
            out.push(rot(theta, target));
        }
        let next = if i + 1 == size { 0 } else { gray(i + 1) };
        let k = (g ^ next).trailing_zeros() as usize;
        out.push(Gate::cnot(controls[k], target));
    }
}

/// Binary-tree amplitude loading: magnitudes by uniformly controlled `Ry`
/// from the highest qubit down, then relative phases by uniformly
/// controlled `Rz` from the lowest qubit up. The global phase is dropped.
pub fn dense_orbital(amplitudes: &[C64]) -> Result<Circuit> {
    let dim = amplitudes.len();
    if dim < 2 || !dim.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "amplitude count {dim} is not a power of two >= 2"
        )));
    }
    let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > ORTHO_TOL {
        return Err(Error::NotNormalized(norm));
    }
    let eta = dim.trailing_zeros() as usize;
    let mut gates = Vec::new();
    for q in (0..eta).rev() {
        let controls: Vec<usize> = (q + 1..eta).collect();
        let alpha: Vec<f64> = (0..1usize << controls.len())
            .map(|j| {
                let (mut p0, mut p1) = (0.0, 0.0);
                for (x, a) in amplitudes.iter().enumerate() {
                    if x >> (q + 1) == j {
                        if x >> q & 1 == 1 {
                            p1 += a.norm_sqr();
                        } else {
                            p0 += a.norm_sqr();
                        }
                    }
                }
                2.0 * p1.sqrt().atan2(p0.sqrt())
            })
            .collect();
        multiplexed(&alpha, &controls, q, Gate::ry, &mut gates);
    }
    let mut phases: Vec<f64> = amplitudes
        .iter()
        .map(|a| if a.norm_sqr() > 0.0 { a.arg() } else { 0.0 })
        .collect();
    for q in 0..eta {
        let controls: Vec<usize> = (q + 1..eta).collect();
        let beta: Vec<f64> = phases.chunks(2).map(|p| p[1] - p[0]).collect();
        multiplexed(&beta, &controls, q, Gate::rz, &mut gates);
        phases = phases.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect();
    }
    Circuit::from_gates(Layout::register(eta), gates)
}

/// One single-particle state.
#[derive(Debug, Clone)]
pub enum Orbital {
    /// Computational basis state `|r⟩`.
    Basis(usize),
    /// Explicit amplitudes of length `2^eta`.
    Amplitudes(Vec<C64>),
    /// A preparation circuit on an `eta`-qubit register.
    Circuit(Circuit),
}

/// Orthonormal orbitals with their preparation circuits `U_n`.
#[derive(Debug, Clone)]
pub struct OrbitalSet {
    eta: usize,
    preps: Vec<Circuit>,
    states: Vec<StateVector>,
}

impl OrbitalSet {
    pub fn new(eta: usize, orbitals: Vec<Orbital>) -> Result<Self> {
        if eta == 0 {
            return Err(Error::InvalidArgument("eta must be at least 1".into()));
        }
        if orbitals.is_empty() {
            return Err(Error::InvalidArgument(
                "at least one orbital is required".into(),
            ));
        }
        let mut preps = Vec::with_capacity(orbitals.len());
        for o in orbitals {
            let c = match o {
                Orbital::Basis(r) => basis_orbital(r, eta)?,
                Orbital::Amplitudes(a) => {
                    if a.len() != 1 << eta {
                        return Err(Error::Dimension(a.len(), 1 << eta));
                    }
                    dense_orbital(&a)?
                }
                Orbital::Circuit(c) => {
                    if *c.layout() != Layout::register(eta) {
                        return Err(Error::Layout(format!(
                            "orbital circuit layout {:?} is not a bare {eta}-qubit register",
                            c.layout()
                        )));
                    }
                    if !c.is_unitary_only() {
                        return Err(Error::InvalidArgument(
                            "orbital circuits must be unitary-only".into(),
                        ));
                    }
                    c
                }
            };
            preps.push(c);
        }
        let states = preps
            .iter()
            .map(|c| Ok(run_statevector(c, RunMode::Enumerate)?.remove(0).state))
            .collect::<Result<Vec<_>>>()?;
        for m in 0..states.len() {
            for n in m + 1..states.len() {
                let overlap = states[m].inner(&states[n])?.norm();
                if overlap > ORTHO_TOL {
                    return Err(Error::NotOrthogonal {
                        first: m + 1,
                        second: n + 1,
                        overlap,
                    });
                }
            }
        }
        Ok(OrbitalSet { eta, preps, states })
    }

    pub fn from_integers(eta: usize, values: &[usize]) -> Result<Self> {
        OrbitalSet::new(eta, values.iter().map(|&r| Orbital::Basis(r)).collect())
    }

    pub fn from_amplitudes(eta: usize, vectors: Vec<Vec<C64>>) -> Result<Self> {
        OrbitalSet::new(eta, vectors.into_iter().map(Orbital::Amplitudes).collect())
    }

    /// `n` random orthonormal orbitals (columns of a random unitary).
    pub fn random(n: usize, eta: usize, seed: u64) -> Result<Self> {
        let dim = 1usize << eta;
        if n > dim {
            return Err(Error::InvalidArgument(format!(
                "{n} orthonormal orbitals do not fit in {eta} qubits"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(dim, dim, |_, _| {
            C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let q = m.qr().q();
        let vectors = (0..n)
            .map(|j| q.column(j).iter().copied().collect())
            .collect();
        OrbitalSet::from_amplitudes(eta, vectors)
    }

    pub fn eta(&self) -> usize {
        self.eta
    }

    pub fn len(&self) -> usize {
        self.preps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preps.is_empty()
    }

    /// `U_n`, 1-based.
    pub fn prep(&self, n: usize) -> &Circuit {
        &self.preps[n - 1]
    }

    /// `|φ_n⟩ = U_n|0…0⟩`, 1-based.
    pub fn state(&self, n: usize) -> &StateVector {
        &self.states[n - 1]
    }

    pub fn states(&self) -> &[StateVector] {
        &self.states
    }

    /// Reorders so the most expensive preparation comes first and the
    /// cheapest last: `U_n` is applied `n` times and `U_n†` `n − 1` times.
    /// Ties keep their input order.
    pub fn sorted_by_cost(&self) -> OrbitalSet {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by_key(|&i| std::cmp::Reverse(self.preps[i].counts().total()));
        OrbitalSet {
            eta: self.eta,
            preps: idx.iter().map(|&i| self.preps[i].clone()).collect(),
            states: idx.iter().map(|&i| self.states[i].clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::GateKind;

    fn prepared(c: &Circuit) -> StateVector {
        run_statevector(c, RunMode::Enumerate)
            .unwrap()
            .remove(0)
            .state
    }

    #[test]
    fn basis_orbitals() {
        assert!(basis_orbital(0, 3).unwrap().is_empty());
        let c = basis_orbital(2, 2).unwrap();
        assert_eq!(c.gates(), &[Gate::x(1)]);
        let c = basis_orbital(5, 3).unwrap();
        assert_eq!(c.gates(), &[Gate::x(0), Gate::x(2)]);
        assert!(basis_orbital(4, 2).is_err());
    }

    #[test]
    fn dense_orbital_trivial_cases() {
        let e0 = vec![
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ];
        assert!(dense_orbital(&e0).unwrap().is_empty());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = dense_orbital(&[C64::new(h, 0.0), C64::new(h, 0.0)]).unwrap();
        assert_eq!(plus.len(), 1);
        match plus.gates()[0].kind {
            GateKind::Ry(t) => assert!((t - std::f64::consts::FRAC_PI_2).abs() < 1e-15),
            ref k => panic!("unexpected {k:?}"),
        }
        assert!(dense_orbital(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn dense_orbital_prepares_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for eta in 1..=4 {
            for _ in 0..5 {
                let mut v: Vec<C64> = (0..1 << eta)
                    .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
                v.iter_mut().for_each(|a| *a /= n);
                let s = prepared(&dense_orbital(&v).unwrap());
                let target = StateVector::from_amplitudes(v).unwrap();
                let overlap = s.inner(&target).unwrap().norm();
                assert!(overlap >= 1.0 - 1e-10, "eta={eta}: {overlap}");
            }
        }
    }

    #[test]
    fn duplicate_orbitals_are_rejected() {
        let err = OrbitalSet::from_integers(2, &[1, 3, 1]).unwrap_err();
        assert!(matches!(
            err,
            Error::NotOrthogonal {
                first: 1,
                second: 3,
                ..
            }
        ));
    }

    #[test]
    fn random_sets_are_orthonormal() {
        let set = OrbitalSet::random(4, 2, 11).unwrap();
        assert_eq!(set.len(), 4);
        assert!(OrbitalSet::random(5, 2, 0).is_err());
    }

    #[test]
    fn sort_by_cost_puts_expensive_first() {
        let set = OrbitalSet::from_integers(2, &[0, 3, 1]).unwrap();
        let sorted = set.sorted_by_cost();
        let costs: Vec<usize> = (1..=3).map(|n| sorted.prep(n).len()).collect();
        assert_eq!(costs, vec![2, 1, 0]);
    }
}
