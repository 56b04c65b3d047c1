use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{
    build_full, build_rwa, max_hermitian_deviation, HamiltonianMatrix, Operator, QuantumState,
    ResonantLayout,
};
use crate::error::{Error, Result};
use crate::physics::DerivedParams;

/// Largest tolerated `|H - H^dagger|`, relative to the largest entry.
const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Eigendecomposition `H = Q diag(lambda) Q^dagger` of a Hermitian operator.
///
/// Built once, it yields propagators at any number of times.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Operator,
}

impl Spectrum {
    pub fn new(h: &HamiltonianMatrix) -> Result<Spectrum> {
        Self::from_operator(&h.matrix)
    }

    pub fn from_operator(m: &Operator) -> Result<Spectrum> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                actual: m.ncols(),
            });
        }
        let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        let dev = max_hermitian_deviation(m);
        if dev > HERMITIAN_TOLERANCE * scale {
            return Err(Error::NonHermitian(dev));
        }
        let eig = SymmetricEigen::new(m.clone());
        Ok(Spectrum {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        })
    }

    /// `exp(-i H t)`.
    pub fn propagator(&self, t: f64) -> Result<Operator> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Contract(format!("evolution time {t} must be finite and >= 0")));
        }
        let q = &self.eigenvectors;
        let phases: Vec<Complex64> = self
            .eigenvalues
            .iter()
            .map(|&l| Complex64::from_polar(1.0, -l * t))
            .collect();
        let mut scaled = q.clone();
        for (c, ph) in phases.iter().enumerate() {
            for r in 0..scaled.nrows() {
                scaled[(r, c)] *= ph;
            }
        }
        Ok(scaled * q.adjoint())
    }
}

/// `U = exp(-i (H/hbar) t)`.
pub fn propagator(h: &HamiltonianMatrix, t: f64) -> Result<Operator> {
    if t == 0.0 {
        Spectrum::new(h)?;
        return Ok(DMatrix::identity(h.dim(), h.dim()));
    }
    Spectrum::new(h)?.propagator(t)
}

pub fn evolve(h: &HamiltonianMatrix, t: f64, psi: &QuantumState) -> Result<QuantumState> {
    if psi.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            expected: h.dim(),
            actual: psi.dim(),
        });
    }
    let u = propagator(h, t)?;
    let out: DVector<Complex64> = &u * &psi.amplitudes;
    Ok(QuantumState {
        amplitudes: out,
        n_qubits: psi.n_qubits,
    })
}

/// `|Tr(U^dagger V)| / d`, invariant under global phase.
pub fn compare(u: &Operator, v: &Operator) -> Result<f64> {
    if u.shape() != v.shape() || u.nrows() != u.ncols() {
        return Err(Error::DimensionMismatch {
            expected: u.nrows(),
            actual: v.nrows(),
        });
    }
    let d = u.nrows();
    if d == 0 {
        return Ok(1.0);
    }
    let tr: Complex64 = u.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok((tr.norm() / d as f64).min(1.0))
}

/// `1 - compare(U_full(t), U_rwa(t))`.
pub fn rwa_gap(params: &DerivedParams, layout: &ResonantLayout, t: f64) -> Result<f64> {
    let full = propagator(&build_full(params)?, t)?;
    let rwa = propagator(&build_rwa(params, layout)?, t)?;
    Ok(1.0 - compare(&full, &rwa)?)
}
