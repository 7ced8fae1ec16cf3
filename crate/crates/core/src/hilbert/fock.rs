use num_complex::Complex64 as C64;

use super::state::StateVector;
use crate::error::{MetroError, Result};

/// Largest probability mass a truncated Fock state may discard.
pub const TAIL_MASS_LIMIT: f64 = 1e-12;

/// Single-mode Fock space truncated at `cutoff` photons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockTruncation {
    pub cutoff: usize,
    /// Probability mass discarded by the last state built on this truncation.
    pub tail_mass_bound: f64,
}

impl FockTruncation {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(MetroError::Dimension("Fock cutoff must be at least 1".into()));
        }
        Ok(FockTruncation { cutoff, tail_mass_bound: 0.0 })
    }

    /// Default cutoff `ceil(lambda + 10 sqrt(lambda) + 20)` for mean photon number `lambda`.
    pub fn for_mean_photons(lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(MetroError::Schema(format!("mean photon number {lambda} must be finite and >= 0")));
        }
        FockTruncation::new((lambda + 10.0 * lambda.sqrt() + 20.0).ceil() as usize)
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }
}

/// `ln n!` for `n = 0..=max`.
fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for n in 1..=max {
        acc += (n as f64).ln();
        out.push(acc);
    }
    out
}

/// Poisson probability mass `P(n; lambda)` for `n = 0..=max`.
pub fn poisson_pmf(lambda: f64, max: usize) -> Vec<f64> {
    if lambda == 0.0 {
        let mut p = vec![0.0; max + 1];
        p[0] = 1.0;
        return p;
    }
    let ln_lambda = lambda.ln();
    ln_factorials(max).iter().enumerate().map(|(n, lf)| (-lambda + n as f64 * ln_lambda - lf).exp()).collect()
}

/// Poisson mass strictly above `cutoff`, summed term by term so it stays
/// accurate far below machine epsilon.
pub fn poisson_tail(lambda: f64, cutoff: usize) -> f64 {
    if lambda == 0.0 {
        return 0.0;
    }
    let ln_lambda = lambda.ln();
    let mut ln_fact: f64 = (1..=cutoff + 1).map(|k| (k as f64).ln()).sum();
    let mut n = cutoff + 1;
    let mut tail = 0.0;
    loop {
        let term = (-lambda + n as f64 * ln_lambda - ln_fact).exp();
        tail += term;
        if (n as f64) > lambda && (term < 1e-18 * tail || term == 0.0) {
            break;
        }
        n += 1;
        ln_fact += (n as f64).ln();
    }
    tail
}

/// Coherent state `|alpha>` on the truncated Fock space, renormalized after
/// truncation. Fails if the discarded Poisson tail exceeds 1e-12.
pub fn coherent_state(alpha: C64, trunc: &mut FockTruncation) -> Result<StateVector> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(MetroError::Schema("coherent amplitude must be finite".into()));
    }
    let lambda = alpha.norm_sqr();
    let tail = poisson_tail(lambda, trunc.cutoff);
    if tail > TAIL_MASS_LIMIT {
        return Err(MetroError::Truncation { cutoff: trunc.cutoff, tail });
    }
    trunc.tail_mass_bound = tail;
    let dim = trunc.dim();
    let amplitudes: Vec<C64> = if lambda == 0.0 {
        let mut a = vec![C64::new(0.0, 0.0); dim];
        a[0] = C64::new(1.0, 0.0);
        a
    } else {
        let ln_r = alpha.norm().ln();
        let theta = alpha.arg();
        ln_factorials(trunc.cutoff)
            .iter()
            .enumerate()
            .map(|(n, lf)| {
                let n = n as f64;
                C64::from_polar((-lambda / 2.0 + n * ln_r - 0.5 * lf).exp(), n * theta)
            })
            .collect()
    };
    StateVector::normalized(vec![dim], amplitudes)
}

/// `(|0> + |N>)/sqrt(2)` in the truncated Fock space.
pub fn zero_n_superposition(n_photons: usize, trunc: &FockTruncation) -> Result<StateVector> {
    if n_photons == 0 {
        return Err(MetroError::Arity("zero-N superposition needs N >= 1".into()));
    }
    if trunc.cutoff < n_photons {
        return Err(MetroError::Dimension(format!("cutoff {} below N = {n_photons}", trunc.cutoff)));
    }
    let mut amplitudes = vec![C64::new(0.0, 0.0); trunc.dim()];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    amplitudes[0] = C64::new(h, 0.0);
    amplitudes[n_photons] = C64::new(h, 0.0);
    StateVector::new(vec![trunc.dim()], amplitudes)
}
