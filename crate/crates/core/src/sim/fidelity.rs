use nalgebra::{DMatrix, SymmetricEigen};

use super::density::DensityMatrix;
use super::statevector::StateVector;
use crate::error::{Error, Result};
use crate::C64;

/// Eigenvalues below `-NEG_TOL` are reported as errors; the rest are clamped
/// at zero before taking square roots.
pub const NEG_TOL: f64 = 1e-9;

/// Purity above which a state is treated as pure.
const PURE_TOL: f64 = 1e-12;

fn clamp(ev: f64) -> Result<f64> {
    if ev < -NEG_TOL {
        return Err(Error::NotPositive(ev));
    }
    Ok(ev.max(0.0))
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn sqrt_psd(m: &DMatrix<C64>) -> Result<DMatrix<C64>> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let mut scaled = eig.eigenvectors.clone();
    for (j, ev) in eig.eigenvalues.iter().enumerate() {
        let s = clamp(*ev)?.sqrt();
        scaled.column_mut(j).scale_mut(s);
    }
    Ok(&scaled * eig.eigenvectors.adjoint())
}

/// `⟨ψ|ρ|ψ⟩`, the fidelity of `ρ` with a pure state.
pub fn fidelity_with_pure(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    Ok(rho.expectation(psi)?.clamp(0.0, 1.0))
}

/// Dominant eigenvector of a (numerically) rank-one state.
fn pure_vector(rho: &DensityMatrix) -> StateVector {
    let m = rho.matrix();
    let d = rho.dim();
    let k = (0..d)
        .max_by(|a, b| m[(*a, *a)].re.total_cmp(&m[(*b, *b)].re))
        .unwrap_or(0);
    let scale = 1.0 / m[(k, k)].re.sqrt();
    let amps = (0..d).map(|r| m[(r, k)] * scale).collect();
    StateVector::from_amplitudes(amps).expect("column of a pure state is normalized")
}

/// Uhlmann fidelity `(tr √(√σ ρ √σ))²`.
///
/// When either argument is pure the closed form `⟨ψ|ρ|ψ⟩` is used.
pub fn fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(rho.dim(), sigma.dim()));
    }
    if sigma.purity() > 1.0 - PURE_TOL {
        return fidelity_with_pure(rho, &pure_vector(sigma));
    }
    if rho.purity() > 1.0 - PURE_TOL {
        return fidelity_with_pure(sigma, &pure_vector(rho));
    }
    uhlmann(rho, sigma)
}

/// The general eigendecomposition route, without the pure-state shortcut.
pub fn uhlmann(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(rho.dim(), sigma.dim()));
    }
    let s = sqrt_psd(sigma.matrix())?;
    let inner = &s * rho.hermitian_part() * &s;
    let eig = SymmetricEigen::new((&inner + inner.adjoint()) * C64::new(0.5, 0.0));
    let mut tr = 0.0;
    for ev in eig.eigenvalues.iter() {
        tr += clamp(*ev)?.sqrt();
    }
    Ok((tr * tr).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;

    fn pure(n: usize, gates: &[Gate]) -> (StateVector, DensityMatrix) {
        let mut s = StateVector::zero(n);
        for g in gates {
            s.apply(g);
        }
        let r = DensityMatrix::from_pure(&s);
        (s, r)
    }

    #[test]
    fn closed_forms() {
        let (_, zero) = pure(1, &[]);
        let (_, one) = pure(1, &[Gate::x(0)]);
        let mixed = DensityMatrix::maximally_mixed(1);
        assert!((fidelity(&zero, &zero).unwrap() - 1.0).abs() < 1e-14);
        assert!(fidelity(&zero, &one).unwrap().abs() < 1e-14);
        assert!((fidelity(&zero, &mixed).unwrap() - 0.5).abs() < 1e-14);
        assert!((uhlmann(&zero, &mixed).unwrap() - 0.5).abs() < 1e-7);
    }

    #[test]
    fn pure_shortcut_agrees_with_general_route() {
        let (_, a) = pure(2, &[Gate::ry(0.8, 0), Gate::cnot(0, 1)]);
        let noisy = a.apply_depolarizing(&[0, 1], 0.2).unwrap();
        let other = DensityMatrix::maximally_mixed(2)
            .apply_depolarizing(&[0], 0.5)
            .unwrap();
        let shortcut = fidelity(&noisy, &a).unwrap();
        let general = uhlmann(&noisy, &a).unwrap();
        assert!((shortcut - general).abs() < 1e-6, "{shortcut} vs {general}");
        let f1 = fidelity(&noisy, &other).unwrap();
        let f2 = fidelity(&other, &noisy).unwrap();
        assert!((f1 - f2).abs() < 1e-10);
    }

    #[test]
    fn mismatched_dimensions_rejected() {
        let a = DensityMatrix::maximally_mixed(1);
        let b = DensityMatrix::maximally_mixed(2);
        assert!(matches!(fidelity(&a, &b), Err(Error::Dimension(2, 4))));
    }
}
