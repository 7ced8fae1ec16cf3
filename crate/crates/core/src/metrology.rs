//! Fisher information, statistical distances and the precision bounds.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use crate::error::{MetroError, Result};
use crate::generators::NormalizedGenerator;
use crate::hilbert::{evolve, expectation, variance, HermitianOperator, StateVector};
use crate::measurement::{born_derivative, observable_moments, OutcomeDistribution, Povm};
use crate::numeric::golden_section_min;

const ZERO_PROB: f64 = 1e-14;
const ZERO_DERIV: f64 = 1e-12;
const VANISHING: f64 = 1e-15;

/// `F = sum_x (dp_x/dphi)^2 / p_x`.
///
/// Outcomes with `p < 1e-14` contribute nothing when their derivative is also
/// negligible; a vanishing probability with a finite slope is reported as
/// [`MetroError::Degenerate`].
pub fn fisher_information(dist: &OutcomeDistribution) -> Result<f64> {
    let derivs =
        dist.derivs.as_ref().ok_or_else(|| MetroError::Schema("distribution carries no phase derivatives".into()))?;
    if derivs.len() != dist.probs.len() {
        return Err(MetroError::Dimension("probability and derivative lengths differ".into()));
    }
    let mut f = 0.0;
    for (x, (&p, &d)) in dist.probs.iter().zip(derivs).enumerate() {
        if p < ZERO_PROB {
            if d.abs() < ZERO_DERIV {
                continue;
            }
            return Err(MetroError::Degenerate { outcome: x, derivative: d });
        }
        f += d * d / p;
    }
    Ok(f)
}

/// `1 / sqrt(T F)`.
pub fn cramer_rao(fisher: f64, t_repeats: u64) -> Result<f64> {
    if !(fisher > 0.0) {
        return Err(MetroError::NoInformation(fisher));
    }
    if t_repeats == 0 {
        return Err(MetroError::Schema("repetition count T must be >= 1".into()));
    }
    Ok(1.0 / (t_repeats as f64 * fisher).sqrt())
}

/// Angle `arccos |<a|b>|` between two rays, in `[0, pi/2]`.
pub fn wootters_distance(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm().min(1.0).acos())
}

/// `ds/dphi = sqrt(F(phi))` on the probability simplex of `povm`.
pub fn statistical_speed(state0: &StateVector, gen: &HermitianOperator, phi: f64, povm: &Povm) -> Result<f64> {
    Ok(fisher_information(&born_derivative(state0, gen, phi, povm)?)?.sqrt())
}

/// Central finite-difference rate of `s(psi(0), psi(phi))` in `phi`.
pub fn wootters_rate(state0: &StateVector, gen: &HermitianOperator, phi: f64, step: f64) -> Result<f64> {
    let s = |p: f64| -> Result<f64> { wootters_distance(state0, &evolve(state0, gen, p)?) };
    Ok((s(phi + step)? - s(phi - step)?) / (2.0 * step))
}

/// Pure-state quantum Fisher information `4 (Delta H)^2`.
pub fn qfi_pure(state: &StateVector, gen: &HermitianOperator) -> Result<f64> {
    Ok(4.0 * variance(state, gen)?)
}

/// `1 / |<H>|` for a ground-normalized resource count.
pub fn heisenberg_bound(resource: f64) -> Result<f64> {
    if !(resource > VANISHING) {
        return Err(MetroError::NoResource(resource));
    }
    Ok(1.0 / resource)
}

/// `1 / (2 Delta H)`.
pub fn uncertainty_bound(state: &StateVector, gen: &HermitianOperator) -> Result<f64> {
    let spread = variance(state, gen)?.sqrt();
    if !(spread > VANISHING) {
        return Err(MetroError::SharpGenerator(spread));
    }
    Ok(1.0 / (2.0 * spread))
}

/// Smallest phase that can reach an orthogonal state, `pi / (2 |<H>|)`.
pub fn ml_phase_bound(resource: f64) -> Result<f64> {
    if !(resource > VANISHING) {
        return Err(MetroError::NoResource(resource));
    }
    Ok(FRAC_PI_2 / resource)
}

/// `Delta X / |d<X>/dphi|`.
pub fn error_propagation(mean_deriv: f64, stddev: f64) -> Result<f64> {
    if !(mean_deriv.abs() > VANISHING) {
        return Err(MetroError::FlatSignal(mean_deriv));
    }
    Ok(stddev / mean_deriv.abs())
}

/// `d<X>/dphi = 2 Im <X psi | H psi>` at `psi = exp(-i phi H) psi0`.
pub fn signal_slope(state0: &StateVector, gen: &HermitianOperator, phi: f64, obs: &HermitianOperator) -> Result<f64> {
    let psi = evolve(state0, gen, phi)?;
    let x_psi = obs.apply(psi.amplitudes())?;
    let h_psi = gen.apply(psi.amplitudes())?;
    let z: num_complex::Complex64 = x_psi.iter().zip(&h_psi).map(|(a, b)| a.conj() * b).sum();
    Ok(2.0 * z.im)
}

/// First phase in `(0, phi_max]` at which the evolved state is orthogonal to
/// the initial one (overlap below `1e-9`), if any.
///
/// The overlap magnitude is scanned on a uniform grid and each local minimum
/// is refined by golden section in order until one reaches zero.
pub fn orthogonalization_phase(state0: &StateVector, gen: &HermitianOperator, phi_max: f64) -> Result<Option<f64>> {
    const GRID: usize = 4096;
    let overlap = |p: f64| -> Result<f64> { Ok(state0.inner(&evolve(state0, gen, p)?)?.norm()) };
    let h = phi_max / GRID as f64;
    let values: Vec<f64> = (0..=GRID).map(|k| overlap(k as f64 * h)).collect::<Result<_>>()?;
    for k in 1..=GRID {
        let left = values[k - 1];
        let right = if k < GRID { values[k + 1] } else { f64::INFINITY };
        if values[k] <= left && values[k] <= right {
            let lo = (k - 1) as f64 * h;
            let hi = ((k + 1) as f64 * h).min(phi_max);
            let mut err = None;
            let phi = golden_section_min(
                |p| match overlap(p) {
                    Ok(v) => v,
                    Err(e) => {
                        err = Some(e);
                        f64::INFINITY
                    }
                },
                lo,
                hi,
                1e-13,
            );
            if let Some(e) = err {
                return Err(e);
            }
            if overlap(phi)? < 1e-9 {
                return Ok(Some(phi));
            }
        }
    }
    Ok(None)
}

pub type BoundValue = std::result::Result<f64, MetroError>;

/// Every bound for one (probe, generator, measurement, phase) configuration.
/// Fields that cannot be evaluated carry the error that prevented them.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub phi: f64,
    pub fisher_classical: BoundValue,
    pub qfi: BoundValue,
    pub resource: BoundValue,
    pub crb: BoundValue,
    pub heisenberg_eq8: BoundValue,
    pub uncertainty_eq9: BoundValue,
    pub ml_phase_eq10: BoundValue,
    /// Present only when an observable is configured.
    pub delta_phi_ep: Option<BoundValue>,
    /// `delta_phi_ep * resource`, reported as computed.
    pub ratio_eq8: Option<BoundValue>,
    pub t: u64,
}

/// Column names of the numeric report fields, in emission order.
pub const REPORT_FIELDS: [&str; 9] = [
    "resource",
    "fisher",
    "qfi",
    "crb",
    "delta_phi_ep",
    "heisenberg_eq8",
    "uncertainty_eq9",
    "ml_phase_eq10",
    "ratio_eq8",
];

impl BoundReport {
    /// Value of a column, `NaN` when missing or failed.
    pub fn value(&self, field: &str) -> f64 {
        self.field(field).and_then(|v| v.as_ref().ok().copied()).unwrap_or(f64::NAN)
    }

    pub fn field(&self, field: &str) -> Option<&BoundValue> {
        match field {
            "fisher" | "fisher_classical" => Some(&self.fisher_classical),
            "qfi" => Some(&self.qfi),
            "resource" => Some(&self.resource),
            "crb" => Some(&self.crb),
            "heisenberg_eq8" => Some(&self.heisenberg_eq8),
            "uncertainty_eq9" => Some(&self.uncertainty_eq9),
            "ml_phase_eq10" => Some(&self.ml_phase_eq10),
            "delta_phi_ep" => self.delta_phi_ep.as_ref(),
            "ratio_eq8" => self.ratio_eq8.as_ref(),
            _ => None,
        }
    }

    /// `(field, error)` for every field that failed.
    pub fn errors(&self) -> Vec<(&'static str, &MetroError)> {
        REPORT_FIELDS
            .iter()
            .filter_map(|&f| match self.field(f) {
                Some(Err(e)) => Some((f, e)),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct ReportOptions {
    /// Count resources with the raw generator instead of the ground-normalized one.
    pub unnormalized: bool,
}

/// Assembles a [`BoundReport`] from the ground-normalized generator.
pub fn bound_report(
    state0: &StateVector,
    gen: &NormalizedGenerator,
    phi: f64,
    povm: &Povm,
    observable: Option<&HermitianOperator>,
    t_repeats: u64,
) -> Result<BoundReport> {
    bound_report_with(state0, gen, phi, povm, observable, t_repeats, ReportOptions::default())
}

pub fn bound_report_with(
    state0: &StateVector,
    gen: &NormalizedGenerator,
    phi: f64,
    povm: &Povm,
    observable: Option<&HermitianOperator>,
    t_repeats: u64,
    opts: ReportOptions,
) -> Result<BoundReport> {
    if t_repeats == 0 {
        return Err(MetroError::Schema("repetition count T must be >= 1".into()));
    }
    let h = &gen.operator;
    if state0.dim() != h.dim() || povm.dim() != h.dim() || observable.is_some_and(|x| x.dim() != h.dim()) {
        return Err(MetroError::Dimension("state, generator, POVM and observable dimensions differ".into()));
    }
    let fisher_classical = born_derivative(state0, h, phi, povm).and_then(|d| fisher_information(&d));
    let qfi = qfi_pure(state0, h);
    let resource = if opts.unnormalized {
        expectation(state0, &gen.unnormalized()).map(f64::abs)
    } else {
        expectation(state0, h).map(f64::abs)
    };
    let crb = fisher_classical.clone().and_then(|f| cramer_rao(f, t_repeats));
    let heisenberg_eq8 = resource.clone().and_then(heisenberg_bound);
    let uncertainty_eq9 = uncertainty_bound(state0, h);
    let ml_phase_eq10 = resource.clone().and_then(ml_phase_bound);
    let delta_phi_ep = observable.map(|x| -> BoundValue {
        let psi = evolve(state0, h, phi)?;
        let (_, stddev) = observable_moments(&psi, x)?;
        error_propagation(signal_slope(state0, h, phi, x)?, stddev)
    });
    let ratio_eq8 = delta_phi_ep.as_ref().map(|d| {
        let d = d.clone()?;
        Ok(d * resource.clone()?)
    });
    Ok(BoundReport {
        phi,
        fisher_classical,
        qfi,
        resource,
        crb,
        heisenberg_eq8,
        uncertainty_eq9,
        ml_phase_eq10,
        delta_phi_ep,
        ratio_eq8,
        t: t_repeats,
    })
}
