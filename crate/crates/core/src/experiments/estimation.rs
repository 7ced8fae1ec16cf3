//! Maximum-likelihood phase estimation and seeded Monte Carlo runs.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::{Scenario, ScenarioKind};
use crate::error::{MetroError, Result};
use crate::hilbert::evolve;
use crate::measurement::{born_derivative, born_probabilities, rng_stream, sample_with};
use crate::metrology::fisher_information;
use crate::numeric::golden_section_min;

/// Points in the coarse likelihood scan.
pub const MLE_GRID: usize = 1000;
const MLE_TOL: f64 = 1e-10;

/// Worker pool sized by `METROLAB_THREADS` (unset or 0 means one per core).
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var("METROLAB_THREADS") {
        Ok(v) if !v.trim().is_empty() => v
            .trim()
            .parse::<usize>()
            .map_err(|_| MetroError::Schema(format!("METROLAB_THREADS='{v}' is not a non-negative integer")))?,
        _ => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| MetroError::Schema(format!("cannot start worker pool: {e}")))
}

fn log_likelihood(counts: &[u64], probs: &[f64]) -> f64 {
    counts
        .iter()
        .zip(probs)
        .filter(|(&n, _)| n > 0)
        .map(|(&n, &p)| if p > 0.0 { n as f64 * p.ln() } else { f64::NEG_INFINITY })
        .sum()
}

fn check_window(window: (f64, f64)) -> Result<()> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(MetroError::Schema(format!("invalid estimation window ({lo}, {hi})")));
    }
    Ok(())
}

fn grid(window: (f64, f64)) -> Vec<f64> {
    let (lo, hi) = window;
    let step = (hi - lo) / (MLE_GRID - 1) as f64;
    (0..MLE_GRID).map(|i| if i + 1 == MLE_GRID { hi } else { lo + step * i as f64 }).collect()
}

/// Grid scan over precomputed log-likelihoods, then golden-section refinement
/// on the bracket around the best grid point.
fn maximize<F>(counts: &[u64], xs: &[f64], lls: &[f64], model: F) -> Result<f64>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    let best = lls.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &l)| if l > acc.1 { (i, l) } else { acc });
    if best.1 == f64::NEG_INFINITY {
        return Err(MetroError::Window(xs[0]));
    }
    let i = best.0;
    if i == 0 || i + 1 == xs.len() {
        return Err(MetroError::Window(xs[i]));
    }
    let mut failure = None;
    let phi = golden_section_min(
        |x| match model(x) {
            Ok(p) => -log_likelihood(counts, &p),
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        xs[i - 1],
        xs[i + 1],
        MLE_TOL,
    );
    match failure {
        Some(e) => Err(e),
        None => Ok(phi),
    }
}

/// Maximum-likelihood phase from outcome `counts` under `model`, searched
/// inside `window`. A maximum on the window edge is a [`MetroError::Window`].
pub fn mle_estimate<F>(counts: &[u64], model: F, window: (f64, f64)) -> Result<f64>
where
    F: Fn(f64) -> Result<Vec<f64>>,
{
    check_window(window)?;
    if counts.iter().all(|&n| n == 0) {
        return Err(MetroError::Schema("no counts to estimate from".into()));
    }
    let xs = grid(window);
    let mut lls = Vec::with_capacity(xs.len());
    for &x in &xs {
        let p = model(x)?;
        if p.len() != counts.len() {
            return Err(MetroError::Dimension(format!("{} counts for a {}-outcome model", counts.len(), p.len())));
        }
        lls.push(log_likelihood(counts, &p));
    }
    maximize(counts, &xs, &lls, model)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub scenario: ScenarioKind,
    pub size: f64,
    pub phi_true: f64,
    pub estimates: Vec<f64>,
    pub mse: f64,
    pub t_shots: u64,
    pub trials: usize,
    pub seed: u64,
    /// Classical Fisher information of one shot at `phi_true`.
    pub fisher: f64,
    #[serde(rename = "crb_at_T")]
    pub crb_at_t: f64,
}

impl MonteCarloResult {
    /// `mse * T * F`, which tends to 1 when the estimator attains the bound.
    pub fn efficiency(&self) -> f64 {
        self.mse * self.t_shots as f64 * self.fisher
    }
}

/// Runs `trials` independent `t_shots`-shot experiments at `phi_true`, each
/// estimated by maximum likelihood over `(0, pi / (2 * phase_rate))`.
///
/// Trial `i` draws from stream `i` of the seeded generator, so the result
/// does not depend on how trials are scheduled.
pub fn monte_carlo_mse(
    s: &Scenario,
    phi_true: f64,
    t_shots: u64,
    trials: usize,
    seed: u64,
) -> Result<MonteCarloResult> {
    if t_shots == 0 || trials == 0 {
        return Err(MetroError::Schema("shots and trials must both be >= 1".into()));
    }
    let setup = s.setup()?;
    let rate = setup
        .phase_rate
        .ok_or_else(|| MetroError::Schema(format!("{}: no identifiable estimation window for this readout", s.kind)))?;
    let window = (0.0, PI / (2.0 * rate));
    if !(phi_true > window.0 && phi_true < window.1) {
        return Err(MetroError::Schema(format!(
            "phi_true = {phi_true} outside the identifiable window (0, {})",
            window.1
        )));
    }
    let h = &setup.generator.operator;
    let truth = born_derivative(&setup.state0, h, phi_true, &setup.povm)?;
    let fisher = fisher_information(&truth)?;
    let live = truth.probs.iter().filter(|&&p| p > 1e-12).count();
    if live > 2 {
        return Err(MetroError::Schema(format!("{}: readout has {live} outcomes, expected two", s.kind)));
    }
    let model =
        |x: f64| -> Result<Vec<f64>> { Ok(born_probabilities(&evolve(&setup.state0, h, x)?, &setup.povm)?.probs) };

    let pool = super::thread_pool()?;
    let xs = grid(window);
    let grid_probs: Vec<Vec<f64>> = pool.install(|| xs.par_iter().map(|&x| model(x)).collect::<Result<_>>())?;
    let estimates: Vec<f64> = pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|trial| {
                let counts = sample_with(&truth, t_shots, &mut rng_stream(seed, trial as u64));
                let lls: Vec<f64> = grid_probs.iter().map(|p| log_likelihood(&counts, p)).collect();
                maximize(&counts, &xs, &lls, model)
            })
            .collect::<Result<_>>()
    })?;
    let mse = estimates.iter().map(|e| (e - phi_true).powi(2)).sum::<f64>() / trials as f64;
    Ok(MonteCarloResult {
        scenario: s.kind,
        size: setup.size,
        phi_true,
        estimates,
        mse,
        t_shots,
        trials,
        seed,
        fisher,
        crb_at_t: 1.0 / (t_shots as f64 * fisher).sqrt(),
    })
}
