//! Acceptance criteria. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits nonzero if any failed.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use metrolab::experiments::{monte_carlo_mse, run_scenario, sweep_scaling, Scenario, ScenarioKind, ScenarioParams};
use metrolab::generators::{
    build_bfcg, build_glm, build_rb, expected_query_count, normalize_ground_energy, query_count, AtomicGenerator,
    NetworkKind,
};
use metrolab::hilbert::{evolve, variance, zero_n_superposition, FockTruncation, HermitianOperator, StateVector};
use metrolab::measurement::{born_derivative, born_probabilities, Effect, Povm};
use metrolab::metrology::{fisher_information, orthogonalization_phase, wootters_distance};
use metrolab::MetroError;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn zero_n(n: usize, phi: f64) -> Scenario {
    let p = ScenarioParams { n: Some(n), phi: Some(phi), ..Default::default() };
    Scenario::new(ScenarioKind::ZeroNSuperposition, p).unwrap()
}

fn query_counts() -> Check {
    let atomic = AtomicGenerator::unit_qubit();
    for n in 1..=10usize {
        let glm = query_count(&build_glm(&atomic, n).map_err(|e| e.to_string())?);
        let rb = query_count(&build_rb(&atomic, n).map_err(|e| e.to_string())?);
        ensure(glm == n, || format!("GLM N={n}: Q={glm}"))?;
        ensure(rb == (1 << n) - 1, || format!("RB N={n}: Q={rb}"))?;
        let bfcg_closed = expected_query_count(NetworkKind::Bfcg, n).unwrap();
        ensure(bfcg_closed == (n * (n - 1) / 2) as u64, || format!("BFCG closed form N={n}: {bfcg_closed}"))?;
        match build_bfcg(&atomic, n) {
            Ok(net) => ensure(query_count(&net) == n * (n - 1) / 2, || format!("BFCG N={n}: Q={}", query_count(&net)))?,
            // A single system has no pairs to query.
            Err(MetroError::Arity(_)) if n == 1 => {}
            Err(e) => return Err(format!("BFCG N={n}: {e}")),
        }
    }
    let spot = [
        query_count(&build_glm(&atomic, 4).unwrap()),
        query_count(&build_bfcg(&atomic, 4).unwrap()),
        query_count(&build_rb(&atomic, 4).unwrap()),
    ];
    ensure(spot == [4, 6, 15], || format!("N=4 spot values {spot:?}"))?;
    Ok("GLM N, BFCG N(N-1)/2, RB 2^N-1 for N=1..10; N=4 gives 4/6/15".into())
}

fn attaining_protocol() -> Check {
    let mut worst = [0.0f64; 3];
    for n in [2usize, 4, 8] {
        let n2 = (n * n) as f64;
        for k in 0..10 {
            let phi = (k as f64 + 1.0) * PI / (11.0 * n2);
            let r = run_scenario(&zero_n(n, phi), 1).map_err(|e| e.to_string())?;
            let errs = [
                rel(r.value("delta_phi_ep"), 1.0 / n2),
                rel(r.value("fisher"), n2 * n2),
                rel(r.value("uncertainty_eq9"), 1.0 / n2),
            ];
            for (w, e) in worst.iter_mut().zip(errs) {
                *w = w.max(if e.is_nan() { f64::INFINITY } else { e });
            }
        }
    }
    ensure(worst[0] < 1e-10 && worst[1] < 1e-8 && worst[2] < 1e-10, || {
        format!("max rel errors delta_phi_ep {:.2e}, fisher {:.2e}, uncertainty {:.2e}", worst[0], worst[1], worst[2])
    })?;
    Ok(format!(
        "delta_phi_ep = 1/N^2 (max rel {:.1e}), fisher = N^4 ({:.1e}), uncertainty_eq9 = 1/N^2 ({:.1e})",
        worst[0], worst[1], worst[2]
    ))
}

fn resource_and_ratio() -> Check {
    let mut ratios = Vec::new();
    for n in [2usize, 4, 8] {
        let n2 = (n * n) as f64;
        let r = run_scenario(&zero_n(n, PI / (4.0 * n2)), 1).map_err(|e| e.to_string())?;
        let resource = r.value("resource");
        ensure(rel(resource, n2 / 2.0) < 1e-10, || format!("N={n}: resource {resource}, expected {}", n2 / 2.0))?;
        let ratio = r.value("ratio_eq8");
        ensure((ratio - 0.5).abs() < 1e-10, || format!("N={n}: ratio_eq8 {ratio}"))?;
        ratios.push(ratio);
    }
    Ok(format!("resource = N^2/2; ratio_eq8 reported as {ratios:?}"))
}

fn kerr_scaling() -> Check {
    let kerr = |lambda: f64| {
        Scenario::new(ScenarioKind::KerrCoherent, ScenarioParams { lambda: Some(lambda), ..Default::default() })
            .unwrap()
    };
    let r = run_scenario(&kerr(100.0), 1).map_err(|e| e.to_string())?;
    let u = r.value("uncertainty_eq9");
    let leading = 0.25 * 100f64.powf(-1.5);
    ensure(rel(u, leading) < 0.01, || format!("lambda=100: uncertainty_eq9 {u:e} vs {leading:e}"))?;
    let sweep = sweep_scaling(&kerr(100.0), &[25.0, 50.0, 100.0, 200.0], 1).map_err(|e| e.to_string())?;
    let slope = sweep.fitted_slope;
    ensure((slope + 1.5).abs() <= 0.02, || format!("slope {slope}"))?;
    Ok(format!("lambda=100 off leading order by {:.3}%; slope {slope:.4}", 100.0 * rel(u, leading)))
}

fn margolus_levitin() -> Check {
    let mut worst = 0.0f64;
    for n in [2usize, 4, 8] {
        let n2 = (n * n) as f64;
        let trunc = FockTruncation::new(n).unwrap();
        let psi0 = zero_n_superposition(n, &trunc).unwrap();
        let gen = normalize_ground_energy(&HermitianOperator::number_power(n, 2).unwrap()).unwrap();
        let first = orthogonalization_phase(&psi0, &gen.operator, 2.0 * PI / n2)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| format!("N={n}: no orthogonal state found"))?;
        let ml = run_scenario(&zero_n(n, PI / (4.0 * n2)), 1).map_err(|e| e.to_string())?.value("ml_phase_eq10");
        let distance = wootters_distance(&psi0, &evolve(&psi0, &gen.operator, first).unwrap()).unwrap();
        ensure((first - ml).abs() < 1e-8 && (ml - PI / n2).abs() < 1e-8, || {
            format!("N={n}: orthogonal at {first}, ml_phase_eq10 {ml}, pi/N^2 {}", PI / n2)
        })?;
        ensure((distance - PI / 2.0).abs() < 1e-8, || format!("N={n}: distance {distance} at {first}"))?;
        worst = worst.max((first - ml).abs());
    }
    Ok(format!("first orthogonal phase = ml_phase_eq10 = pi/N^2 (max diff {worst:.1e})"))
}

fn ghz_benchmarks() -> Check {
    for n in [2usize, 4, 8] {
        let nf = n as f64;
        let s = Scenario::new(ScenarioKind::GhzRamsey, ScenarioParams { n: Some(n), ..Default::default() }).unwrap();
        let r = run_scenario(&s, 1).map_err(|e| e.to_string())?;
        let (res, ep, f) = (r.value("resource"), r.value("delta_phi_ep"), r.value("fisher"));
        ensure((res - nf / 2.0).abs() <= 1e-12, || format!("N={n}: resource {res}"))?;
        ensure(rel(ep, 1.0 / nf) < 1e-10, || format!("N={n}: delta_phi_ep {ep}"))?;
        ensure(rel(f, nf * nf) < 1e-10, || format!("N={n}: fisher {f}"))?;
    }
    Ok("resource = N/2, delta_phi_ep = 1/N, fisher = N^2 for N = 2, 4, 8".into())
}

fn random_c64(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_matrix(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<C64> {
    DMatrix::from_fn(d, d, |_, _| random_c64(rng))
}

/// Random POVM `E_k = S^{-1/2} A_k S^{-1/2}` with `A_k = B_k B_k^dag` and `S = sum A_k`.
fn random_povm(rng: &mut ChaCha8Rng, d: usize, k: usize) -> Povm {
    let parts: Vec<DMatrix<C64>> = (0..k)
        .map(|_| {
            let b = random_matrix(rng, d);
            &b * b.adjoint()
        })
        .collect();
    let s = parts.iter().fold(DMatrix::zeros(d, d), |acc, a| acc + a);
    let eig = s.symmetric_eigen();
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::new(1.0 / l.sqrt(), 0.0)));
    let w = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
    let effects = parts.iter().map(|a| Effect::Dense(&w * a * &w)).collect();
    Povm::new(d, effects, (0..k).map(|i| i.to_string()).collect()).expect("valid POVM")
}

fn property_suite() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = [0.0f64; 4];
    for config in 0..500 {
        let d = rng.random_range(2..=8usize);
        let k = rng.random_range(2..=2 * d);
        let amps: Vec<C64> = (0..d).map(|_| random_c64(&mut rng)).collect();
        let psi0 = StateVector::normalized(vec![d], amps).unwrap();
        let m = random_matrix(&mut rng, d);
        let gen = HermitianOperator::from_dense((&m + m.adjoint()).scale(0.5)).unwrap();
        let povm = random_povm(&mut rng, d, k);
        let phi = rng.random_range(-PI..PI);

        let dist = born_derivative(&psi0, &gen, phi, &povm).map_err(|e| format!("config {config}: {e}"))?;
        let f = fisher_information(&dist).map_err(|e| format!("config {config}: {e}"))?;
        let qfi = 4.0 * variance(&psi0, &gen).unwrap();
        worst[0] = worst[0].max((f - qfi) / qfi);

        let h = 1e-5;
        let plus = born_probabilities(&evolve(&psi0, &gen, phi + h).unwrap(), &povm).unwrap().probs;
        let minus = born_probabilities(&evolve(&psi0, &gen, phi - h).unwrap(), &povm).unwrap().probs;
        for ((p, m), a) in plus.iter().zip(&minus).zip(dist.derivs.as_ref().unwrap()) {
            worst[1] = worst[1].max((a - (p - m) / (2.0 * h)).abs() / a.abs().max(1.0));
        }

        let mut sum = DMatrix::<C64>::zeros(d, d);
        for e in povm.effects() {
            if let Effect::Dense(m) = e {
                sum += m;
            }
        }
        let completeness = (sum - DMatrix::<C64>::identity(d, d)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let psi = evolve(&psi0, &gen, phi).unwrap();
        worst[2] = worst[2].max(completeness).max((psi.norm() - 1.0).abs());

        let phi2 = rng.random_range(-PI..PI);
        let two_step = evolve(&evolve(&psi0, &gen, phi).unwrap(), &gen, phi2).unwrap();
        let one_step = evolve(&psi0, &gen, phi + phi2).unwrap();
        let diff =
            two_step.amplitudes().iter().zip(one_step.amplitudes()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        worst[3] = worst[3].max(diff);
    }
    ensure(worst[0] <= 1e-6 && worst[1] <= 1e-6 && worst[2] <= 1e-10 && worst[3] <= 1e-10, || {
        format!(
            "F - QFI rel {:.2e}, derivative {:.2e}, completeness/normalization {:.2e}, composition {:.2e}",
            worst[0], worst[1], worst[2], worst[3]
        )
    })?;
    Ok(format!(
        "500 configs: max (F-QFI)/QFI {:.1e}, derivative err {:.1e}, completeness/norm {:.1e}, composition {:.1e}",
        worst[0], worst[1], worst[2], worst[3]
    ))
}

fn monte_carlo() -> Check {
    let s = Scenario::new(ScenarioKind::GhzRamsey, ScenarioParams { n: Some(4), ..Default::default() }).unwrap();
    let base = monte_carlo_mse(&s, PI / 16.0, 10_000, 200, 42).map_err(|e| e.to_string())?;
    let quad = monte_carlo_mse(&s, PI / 16.0, 40_000, 200, 42).map_err(|e| e.to_string())?;
    let eff = base.efficiency();
    let factor = base.mse / quad.mse;
    ensure((0.8..=1.25).contains(&eff), || format!("mse*T*F = {eff:.4}"))?;
    ensure((3.1..=5.0).contains(&factor), || format!("mse(T)/mse(4T) = {factor:.4} (mse*T*F = {eff:.4})"))?;
    Ok(format!("mse*T*F = {eff:.4}; quadrupling T divides mse by {factor:.3}"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("query counts", query_counts, Duration::from_secs(1)),
        ("attaining protocol", attaining_protocol, Duration::from_secs(1)),
        ("resource and ratio", resource_and_ratio, Duration::from_secs(1)),
        ("kerr-coherent scaling", kerr_scaling, Duration::from_secs(5)),
        ("Margolus-Levitin saturation", margolus_levitin, Duration::from_secs(5)),
        ("GHZ benchmarks", ghz_benchmarks, Duration::from_secs(5)),
        ("property suite", property_suite, Duration::from_secs(30)),
        ("Monte Carlo CRB attainment", monte_carlo, Duration::from_secs(60)),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if elapsed > budget => Err(format!("{msg}; runtime {elapsed:.2?} over budget {budget:?}")),
            other => other,
        };
        match outcome {
            Ok(msg) => println!("criterion {}: PASS [{name}] {msg} ({elapsed:.2?})", i + 1),
            Err(msg) => {
                failures += 1;
                println!("criterion {}: FAIL [{name}] {msg} ({elapsed:.2?})", i + 1);
            }
        }
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
