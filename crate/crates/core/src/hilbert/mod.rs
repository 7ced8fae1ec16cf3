//! Pure states, Hermitian operators and unitary phase evolution.

mod fock;
mod operator;
mod state;

pub use fock::{coherent_state, poisson_pmf, poisson_tail, zero_n_superposition, FockTruncation, TAIL_MASS_LIMIT};
pub use operator::{HermitianOperator, SupportSpectrum, DENSE_LIMIT};
pub use state::{ghz_state, tensor_product, StateVector, MAX_DIM};

use nalgebra::DVector;
use num_complex::Complex64 as C64;

use crate::error::{MetroError, Result};

fn check_match(state: &StateVector, op: &HermitianOperator) -> Result<()> {
    if state.dim() != op.dim() {
        return Err(MetroError::Dimension(format!(
            "state of dimension {} with operator of dimension {}",
            state.dim(),
            op.dim()
        )));
    }
    Ok(())
}

/// `<psi|H|psi>`; the imaginary rounding residue is dropped.
pub fn expectation(state: &StateVector, op: &HermitianOperator) -> Result<f64> {
    check_match(state, op)?;
    if let Some(d) = op.diagonal_fastpath() {
        return Ok(state.amplitudes().iter().zip(d).map(|(a, h)| a.norm_sqr() * h).sum());
    }
    let h_psi = op.apply(state.amplitudes())?;
    let z: C64 = state.amplitudes().iter().zip(&h_psi).map(|(a, b)| a.conj() * b).sum();
    debug_assert!(z.im.abs() <= 1e-10 * z.re.abs().max(1.0), "imaginary residue {}", z.im);
    Ok(z.re)
}

/// `<H^2> - <H>^2`, evaluated as `||(H - <H>) psi||^2` so it is never negative.
pub fn variance(state: &StateVector, op: &HermitianOperator) -> Result<f64> {
    let mean = expectation(state, op)?;
    let h_psi = op.apply(state.amplitudes())?;
    Ok(h_psi.iter().zip(state.amplitudes()).map(|(hp, a)| (hp - a * mean).norm_sqr()).sum())
}

/// `exp(-i phi H) |psi>`.
///
/// Diagonal generators apply per-amplitude phases; others are diagonalized on
/// the coordinates they touch, and the remaining amplitudes are left alone.
pub fn evolve(state: &StateVector, gen: &HermitianOperator, phi: f64) -> Result<StateVector> {
    check_match(state, gen)?;
    let amps = state.amplitudes();
    if let Some(d) = gen.diagonal_fastpath() {
        let out = amps.iter().zip(d).map(|(a, h)| a * C64::from_polar(1.0, -phi * h)).collect();
        return Ok(StateVector::from_parts_unchecked(state.dims().to_vec(), out));
    }
    let spec = gen.spectral_support()?;
    let sub = DVector::from_iterator(spec.support.len(), spec.support.iter().map(|&i| amps[i]));
    let v = &spec.vectors;
    let mut coeffs = v.adjoint() * sub;
    for (c, &lam) in coeffs.iter_mut().zip(&spec.values) {
        *c *= C64::from_polar(1.0, -phi * lam);
    }
    let rotated = v * coeffs;
    let mut out = amps.to_vec();
    for (k, &i) in spec.support.iter().enumerate() {
        out[i] = rotated[k];
    }
    Ok(StateVector::from_parts_unchecked(state.dims().to_vec(), out))
}
