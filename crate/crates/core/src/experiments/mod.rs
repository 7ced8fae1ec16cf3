//! Named scenarios, scaling sweeps, Monte Carlo estimation and result files.

mod emit;
mod estimation;

pub use emit::{emit_results, format_g17, render, Emittable, OutputFormat, CSV_HEADER};
pub use estimation::{mle_estimate, monte_carlo_mse, thread_pool, MonteCarloResult, MLE_GRID};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{MetroError, Result};
use crate::generators::{
    build_bfcg, build_glm, build_rb, normalize_ground_energy, AtomicGenerator, NormalizedGenerator,
};
use crate::hilbert::{
    coherent_state, expectation, ghz_state, zero_n_superposition, FockTruncation, HermitianOperator, StateVector,
};
use crate::measurement::Povm;
use crate::metrology::{bound_report, BoundReport};
use crate::numeric::ols_slope;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ScenarioKind {
    GhzRamsey,
    ZeroNSuperposition,
    KerrCoherent,
    NetworkGlm,
    NetworkBfcg,
    NetworkRb,
}

pub const ALL_SCENARIOS: [ScenarioKind; 6] = [
    ScenarioKind::GhzRamsey,
    ScenarioKind::ZeroNSuperposition,
    ScenarioKind::KerrCoherent,
    ScenarioKind::NetworkGlm,
    ScenarioKind::NetworkBfcg,
    ScenarioKind::NetworkRb,
];

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::GhzRamsey => "ghz-ramsey",
            ScenarioKind::ZeroNSuperposition => "zero-n-superposition",
            ScenarioKind::KerrCoherent => "kerr-coherent",
            ScenarioKind::NetworkGlm => "network-glm",
            ScenarioKind::NetworkBfcg => "network-bfcg",
            ScenarioKind::NetworkRb => "network-rb",
        }
    }

    /// Whether the size parameter is a register or photon count `N`
    /// (otherwise it is the mean photon number `lambda`).
    pub fn sized_by_n(self) -> bool {
        self != ScenarioKind::KerrCoherent
    }

    pub fn description(self) -> &'static str {
        match self {
            ScenarioKind::GhzRamsey => "GHZ probe on N qubits, unit splitting per qubit, parity readout",
            ScenarioKind::ZeroNSuperposition => "(|0>+|N>)/sqrt2 under n^2, readout X = |0><N| + |N><0|",
            ScenarioKind::KerrCoherent => "coherent state under n^2, phase-optimal projective readout",
            ScenarioKind::NetworkGlm => "GHZ probe, one query per qubit (Q = N), parity readout",
            ScenarioKind::NetworkBfcg => "GHZ probe, one query per qubit pair (Q = N(N-1)/2), parity readout",
            ScenarioKind::NetworkRb => "GHZ probe, one query per qubit subset (Q = 2^N - 1), parity readout",
        }
    }

    pub fn required_params(self) -> &'static str {
        match self {
            ScenarioKind::KerrCoherent => "--alpha <float> (default 10); optional --phi",
            ScenarioKind::ZeroNSuperposition => "--n <int >= 1> (default 2); optional --phi",
            ScenarioKind::NetworkBfcg => "--n <int >= 2> (default 4); optional --phi",
            _ => "--n <int >= 1> (default 4); optional --phi",
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioKind {
    type Err = MetroError;

    fn from_str(s: &str) -> Result<Self> {
        ALL_SCENARIOS
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| MetroError::Schema(format!("unknown scenario '{s}'")))
    }
}

/// Scenario parameters before validation. Unset fields take the scenario's
/// documented defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ScenarioParams {
    pub n: Option<usize>,
    pub alpha: Option<f64>,
    pub lambda: Option<f64>,
    pub phi: Option<f64>,
    pub cutoff: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub params: ScenarioParams,
}

/// Everything needed to run one scenario configuration.
#[derive(Debug, Clone)]
pub struct ScenarioSetup {
    pub state0: StateVector,
    pub generator: NormalizedGenerator,
    pub povm: Povm,
    pub observable: Option<HermitianOperator>,
    pub phi: f64,
    /// `N`, or `lambda = |alpha|^2` for the coherent scenario.
    pub size: f64,
    pub query_count: Option<u64>,
    /// Fringe frequency of the two-level protocols: `<X>` goes as `cos(rate * phi)`.
    pub phase_rate: Option<f64>,
}

impl Scenario {
    /// Validates `params` against the scenario's schema.
    pub fn new(kind: ScenarioKind, params: ScenarioParams) -> Result<Self> {
        let schema = |msg: String| Err(MetroError::Schema(format!("{}: {msg}", kind.name())));
        if let Some(phi) = params.phi {
            if !phi.is_finite() {
                return schema(format!("phi = {phi} is not finite"));
            }
        }
        match kind {
            ScenarioKind::KerrCoherent => {
                if params.n.is_some() {
                    return schema("takes --alpha, not --n".into());
                }
                if params.alpha.is_some() && params.lambda.is_some() {
                    return schema("give either alpha or lambda, not both".into());
                }
                if let Some(a) = params.alpha {
                    if !a.is_finite() {
                        return schema(format!("alpha = {a} is not finite"));
                    }
                }
                if let Some(l) = params.lambda {
                    if !(l.is_finite() && l >= 0.0) {
                        return schema(format!("lambda = {l} must be finite and >= 0"));
                    }
                }
            }
            _ => {
                if params.alpha.is_some() || params.lambda.is_some() {
                    return schema("takes --n, not --alpha".into());
                }
                let n = params.n.unwrap_or(Self::default_n(kind));
                let min = if kind == ScenarioKind::NetworkBfcg { 2 } else { 1 };
                if n < min {
                    return schema(format!("n = {n} must be >= {min}"));
                }
                if kind == ScenarioKind::ZeroNSuperposition {
                    if let Some(c) = params.cutoff {
                        if c < n {
                            return schema(format!("cutoff {c} below N = {n}"));
                        }
                    }
                } else if params.cutoff.is_some() {
                    return schema("has no Fock cutoff".into());
                }
                if kind != ScenarioKind::ZeroNSuperposition && n > 16 {
                    return schema(format!("n = {n} exceeds 16 qubits"));
                }
            }
        }
        Ok(Scenario { kind, params })
    }

    pub fn with_defaults(kind: ScenarioKind) -> Self {
        Scenario { kind, params: ScenarioParams::default() }
    }

    fn default_n(kind: ScenarioKind) -> usize {
        match kind {
            ScenarioKind::ZeroNSuperposition => 2,
            _ => 4,
        }
    }

    /// Same scenario at a different size (`N`, or `lambda` for the coherent one).
    pub fn resized(&self, size: f64) -> Result<Self> {
        let mut params = self.params.clone();
        if self.kind.sized_by_n() {
            if !(size >= 1.0 && size.fract() == 0.0) {
                return Err(MetroError::Schema(format!("{}: size {size} is not a positive integer", self.kind)));
            }
            params.n = Some(size as usize);
            if params.cutoff.is_some_and(|c| c < size as usize) {
                params.cutoff = None;
            }
        } else {
            params.alpha = None;
            params.lambda = Some(size);
            params.cutoff = None;
        }
        Scenario::new(self.kind, params)
    }

    pub fn setup(&self) -> Result<ScenarioSetup> {
        let p = &self.params;
        match self.kind {
            ScenarioKind::KerrCoherent => {
                let alpha = match (p.alpha, p.lambda) {
                    (Some(a), _) => C64::new(a, 0.0),
                    (None, Some(l)) => C64::new(l.sqrt(), 0.0),
                    (None, None) => C64::new(10.0, 0.0),
                };
                let lambda = alpha.norm_sqr();
                let mut trunc = match p.cutoff {
                    Some(c) => FockTruncation::new(c)?,
                    None => FockTruncation::for_mean_photons(lambda)?,
                };
                let state0 = coherent_state(alpha, &mut trunc)?;
                let generator = normalize_ground_energy(&HermitianOperator::number_power(trunc.cutoff, 2)?)?;
                let phi = p.phi.unwrap_or(1e-3);
                // A sharp generator (the vacuum) has no informative readout;
                // fall back to the photon-number basis.
                let povm = match Povm::phase_optimal(&state0, &generator.operator, phi) {
                    Ok(povm) => povm,
                    Err(MetroError::SharpGenerator(_)) => Povm::computational(trunc.dim())?,
                    Err(e) => return Err(e),
                };
                Ok(ScenarioSetup {
                    state0,
                    generator,
                    povm,
                    observable: None,
                    phi,
                    size: lambda,
                    query_count: None,
                    phase_rate: None,
                })
            }
            ScenarioKind::ZeroNSuperposition => {
                let n = p.n.unwrap_or(2);
                let trunc = FockTruncation::new(p.cutoff.unwrap_or(n))?;
                let state0 = zero_n_superposition(n, &trunc)?;
                let generator = normalize_ground_energy(&HermitianOperator::number_power(trunc.cutoff, 2)?)?;
                let x = HermitianOperator::coherence(trunc.dim(), 0, n)?;
                let rate = (n * n) as f64;
                Ok(ScenarioSetup {
                    povm: Povm::eigenbasis(&x)?,
                    state0,
                    generator,
                    observable: Some(x),
                    phi: p.phi.unwrap_or(PI / (4.0 * rate)),
                    size: n as f64,
                    query_count: None,
                    phase_rate: Some(rate),
                })
            }
            kind => {
                let n = p.n.unwrap_or(4);
                let atomic = AtomicGenerator::unit_qubit();
                let net = match kind {
                    ScenarioKind::NetworkBfcg => build_bfcg(&atomic, n)?,
                    ScenarioKind::NetworkRb => build_rb(&atomic, n)?,
                    _ => build_glm(&atomic, n)?,
                };
                let generator = normalize_ground_energy(net.total())?;
                let dim = net.total().dim();
                let parity = HermitianOperator::coherence(dim, 0, dim - 1)?;
                let top = StateVector::basis(vec![2; n], dim - 1)?;
                let bottom = StateVector::basis(vec![2; n], 0)?;
                let rate = expectation(&top, &generator.operator)? - expectation(&bottom, &generator.operator)?;
                Ok(ScenarioSetup {
                    state0: ghz_state(n)?,
                    povm: Povm::eigenbasis(&parity)?,
                    generator,
                    observable: Some(parity),
                    phi: p.phi.unwrap_or(PI / (4.0 * rate)),
                    size: n as f64,
                    query_count: Some(net.query_count() as u64),
                    phase_rate: Some(rate),
                })
            }
        }
    }
}

/// One emitted row: a scenario at one size with its bound report.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub scenario: ScenarioKind,
    pub size: f64,
    pub q: Option<u64>,
    /// Mean photon number of the probe, for Fock-space scenarios.
    pub mean_photons: Option<f64>,
    pub report: BoundReport,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    /// Least-squares slope of `log(designated column)` against `log(size)`.
    pub fitted_slope: f64,
    pub slope_column: &'static str,
}

/// Builds the scenario and returns its bound report.
pub fn run_scenario(s: &Scenario, t_repeats: u64) -> Result<BoundReport> {
    Ok(scenario_row(s, t_repeats)?.report)
}

pub fn scenario_row(s: &Scenario, t_repeats: u64) -> Result<SweepRow> {
    let setup = s.setup()?;
    let report =
        bound_report(&setup.state0, &setup.generator, setup.phi, &setup.povm, setup.observable.as_ref(), t_repeats)?;
    let mean_photons = match s.kind {
        ScenarioKind::KerrCoherent | ScenarioKind::ZeroNSuperposition => {
            let cutoff = setup.state0.dim() - 1;
            Some(expectation(&setup.state0, &HermitianOperator::number(cutoff)?)?)
        }
        _ => None,
    };
    Ok(SweepRow { scenario: s.kind, size: setup.size, q: setup.query_count, mean_photons, report })
}

/// Runs the scenario at each size and fits the log-log slope of the
/// designated column: `uncertainty_eq9` against `<n>` for the coherent
/// scenario, `delta_phi_ep` against `size` otherwise.
///
/// Unless the scenario fixes `phi`, each size runs at its own default phase.
pub fn sweep_scaling(s: &Scenario, sizes: &[f64], t_repeats: u64) -> Result<SweepResult> {
    if sizes.len() < 3 {
        return Err(MetroError::Schema(format!("sweep needs at least 3 sizes, got {}", sizes.len())));
    }
    if sizes.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(MetroError::Schema("sweep sizes must be strictly increasing".into()));
    }
    let scenarios: Vec<Scenario> = sizes.iter().map(|&size| s.resized(size)).collect::<Result<_>>()?;
    let rows: Vec<SweepRow> = thread_pool()?.install(|| {
        use rayon::prelude::*;
        scenarios.par_iter().map(|sc| scenario_row(sc, t_repeats)).collect::<Result<Vec<_>>>()
    })?;
    let (column, xs): (&'static str, Vec<f64>) = if s.kind == ScenarioKind::KerrCoherent {
        ("uncertainty_eq9", rows.iter().map(|r| r.mean_photons.unwrap_or(r.size)).collect())
    } else {
        ("delta_phi_ep", rows.iter().map(|r| r.size).collect())
    };
    let ys: Vec<f64> = rows.iter().map(|r| r.report.value(column)).collect();
    let fitted_slope = if ys.iter().all(|y| y.is_finite() && *y > 0.0) {
        let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
        ols_slope(&lx, &ly)
    } else {
        f64::NAN
    };
    Ok(SweepResult { rows, fitted_slope, slope_column: column })
}
