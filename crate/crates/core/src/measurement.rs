//! POVMs, Born-rule distributions and their phase derivatives, and seeded
//! outcome sampling.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{MetroError, Result};
use crate::hilbert::{evolve, expectation, variance, HermitianOperator, StateVector, DENSE_LIMIT};

const COMPLETENESS_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-10;
const PROB_CLAMP: f64 = 1e-12;

/// One positive effect of a POVM.
#[derive(Debug, Clone, PartialEq)]
pub enum Effect {
    Dense(DMatrix<C64>),
    Diagonal(Vec<f64>),
    /// `sum_k |v_k><v_k|`.
    Projector(Vec<Vec<C64>>),
    /// `I - sum_k |v_k><v_k|` for orthonormal `v_k`.
    Complement(Vec<Vec<C64>>),
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl Effect {
    fn dim(&self) -> Option<usize> {
        match self {
            Effect::Dense(m) => Some(m.nrows()),
            Effect::Diagonal(d) => Some(d.len()),
            Effect::Projector(v) | Effect::Complement(v) => v.first().map(Vec::len),
        }
    }

    /// `<a|E|b>`.
    pub fn sandwich(&self, a: &[C64], b: &[C64]) -> C64 {
        match self {
            Effect::Dense(m) => {
                let eb = m * DVector::from_column_slice(b);
                dot(a, eb.as_slice())
            }
            Effect::Diagonal(d) => a.iter().zip(b).zip(d).map(|((x, y), e)| x.conj() * y * e).sum(),
            Effect::Projector(vs) => vs.iter().map(|v| dot(a, v) * dot(v, b)).sum(),
            Effect::Complement(vs) => dot(a, b) - vs.iter().map(|v| dot(a, v) * dot(v, b)).sum::<C64>(),
        }
    }

    /// Column `i` of the effect matrix.
    fn column(&self, i: usize, dim: usize) -> Vec<C64> {
        match self {
            Effect::Dense(m) => m.column(i).iter().copied().collect(),
            Effect::Diagonal(d) => {
                let mut c = vec![C64::new(0.0, 0.0); dim];
                c[i] = C64::new(d[i], 0.0);
                c
            }
            Effect::Projector(vs) | Effect::Complement(vs) => {
                let mut c = vec![C64::new(0.0, 0.0); dim];
                for v in vs {
                    let w = v[i].conj();
                    for (cj, vj) in c.iter_mut().zip(v) {
                        *cj += vj * w;
                    }
                }
                if matches!(self, Effect::Complement(_)) {
                    for cj in c.iter_mut() {
                        *cj = -*cj;
                    }
                    c[i] += C64::new(1.0, 0.0);
                }
                c
            }
        }
    }

    fn min_eigenvalue(&self) -> f64 {
        match self {
            Effect::Dense(m) => m.clone().symmetric_eigen().eigenvalues.min(),
            Effect::Diagonal(d) => d.iter().copied().fold(f64::INFINITY, f64::min),
            Effect::Projector(_) => 0.0,
            Effect::Complement(vs) => {
                // I - V V^dag is PSD iff the Gram matrix V^dag V has norm <= 1.
                let k = vs.len();
                let gram = DMatrix::from_fn(k, k, |i, j| dot(&vs[i], &vs[j]));
                1.0 - gram.symmetric_eigen().eigenvalues.max()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    effects: Vec<Effect>,
    labels: Vec<String>,
}

impl Povm {
    /// Validates positivity (eigenvalues >= -1e-10) and completeness
    /// (`sum E_x = I` within 1e-10).
    pub fn new(dim: usize, effects: Vec<Effect>, labels: Vec<String>) -> Result<Self> {
        if effects.is_empty() || labels.len() != effects.len() {
            return Err(MetroError::Completeness(format!("{} effects with {} labels", effects.len(), labels.len())));
        }
        for (x, e) in effects.iter().enumerate() {
            if let Some(d) = e.dim() {
                if d != dim {
                    return Err(MetroError::Dimension(format!("effect {x} has dimension {d}, POVM {dim}")));
                }
            }
            if let Effect::Projector(vs) | Effect::Complement(vs) = e {
                if vs.iter().any(|v| v.len() != dim) {
                    return Err(MetroError::Dimension(format!("effect {x} has a vector of wrong length")));
                }
            }
            let min = e.min_eigenvalue();
            if min < -PSD_TOL {
                return Err(MetroError::Completeness(format!("effect {x} has eigenvalue {min:e}")));
            }
        }
        let povm = Povm { dim, effects, labels };
        povm.check_completeness()?;
        Ok(povm)
    }

    fn check_completeness(&self) -> Result<()> {
        if self.dim <= DENSE_LIMIT {
            for i in 0..self.dim {
                let mut col = vec![C64::new(0.0, 0.0); self.dim];
                for e in &self.effects {
                    for (c, x) in col.iter_mut().zip(e.column(i, self.dim)) {
                        *c += x;
                    }
                }
                col[i] -= C64::new(1.0, 0.0);
                let dev = col.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if dev > COMPLETENESS_TOL {
                    return Err(MetroError::Completeness(format!("column {i} deviates from identity by {dev:e}")));
                }
            }
            return Ok(());
        }
        // Large registers: the diagonal parts must sum to the identity minus
        // the complements' identities, and the signed rank-one parts must
        // cancel (checked in Frobenius norm, which dominates every entry).
        let mut diag = vec![0.0; self.dim];
        let mut signed: Vec<(f64, &Vec<C64>)> = Vec::new();
        for e in &self.effects {
            match e {
                Effect::Dense(_) => return Err(MetroError::Size(self.dim)),
                Effect::Diagonal(d) => diag.iter_mut().zip(d).for_each(|(a, b)| *a += b),
                Effect::Projector(vs) => signed.extend(vs.iter().map(|v| (1.0, v))),
                Effect::Complement(vs) => {
                    diag.iter_mut().for_each(|a| *a += 1.0);
                    signed.extend(vs.iter().map(|v| (-1.0, v)));
                }
            }
        }
        let diag_dev = diag.iter().map(|a| (a - 1.0).abs()).fold(0.0, f64::max);
        let mut frob2 = 0.0;
        for &(sa, a) in &signed {
            for &(sb, b) in &signed {
                frob2 += sa * sb * dot(a, b).norm_sqr();
            }
        }
        let dev = diag_dev + frob2.max(0.0).sqrt();
        if dev > COMPLETENESS_TOL {
            return Err(MetroError::Completeness(format!("effects deviate from identity by {dev:e}")));
        }
        Ok(())
    }

    /// Rank-one projectors onto orthonormal `vectors`, plus the complement of
    /// their span when they do not span the space.
    pub fn projective(dim: usize, vectors: Vec<Vec<C64>>, labels: Vec<String>) -> Result<Self> {
        let mut effects: Vec<Effect> = vectors.iter().map(|v| Effect::Projector(vec![v.clone()])).collect();
        let mut labels = labels;
        if vectors.len() < dim {
            effects.push(Effect::Complement(vectors));
            labels.push("rest".into());
        }
        Povm::new(dim, effects, labels)
    }

    /// Spectral measurement of `obs`: one effect per distinct eigenvalue, in
    /// descending order. Eigenvalues closer than 1e-9 are merged.
    pub fn eigenbasis(obs: &HermitianOperator) -> Result<Self> {
        let dim = obs.dim();
        if let Some(d) = obs.diagonal_fastpath() {
            let mut values: Vec<f64> = d.to_vec();
            values.sort_by(|a, b| b.total_cmp(a));
            values.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            let effects = values
                .iter()
                .map(|&v| Effect::Diagonal(d.iter().map(|&x| if (x - v).abs() < 1e-9 { 1.0 } else { 0.0 }).collect()))
                .collect();
            let labels = values.iter().map(|v| format!("{v}")).collect();
            return Povm::new(dim, effects, labels);
        }
        let spec = obs.spectral_support()?;
        let mut order: Vec<usize> = (0..spec.values.len()).collect();
        order.sort_by(|&a, &b| spec.values[b].total_cmp(&spec.values[a]));
        let embed = |k: usize| {
            let mut v = vec![C64::new(0.0, 0.0); dim];
            for (row, &i) in spec.support.iter().enumerate() {
                v[i] = spec.vectors[(row, k)];
            }
            v
        };
        // Group eigenvectors by eigenvalue; the zero group also owns
        // everything outside the support and is written as a complement.
        let mut groups: Vec<(f64, Vec<Vec<C64>>)> = Vec::new();
        let mut nonzero: Vec<Vec<C64>> = Vec::new();
        let has_kernel_outside = spec.support.len() < dim;
        let mut zero_seen = has_kernel_outside;
        for k in order {
            let lam = spec.values[k];
            if has_kernel_outside && lam.abs() < 1e-9 {
                zero_seen = true;
                continue;
            }
            let v = embed(k);
            nonzero.push(v.clone());
            match groups.last_mut() {
                Some((g, vs)) if (*g - lam).abs() < 1e-9 => vs.push(v),
                _ => groups.push((lam, vec![v])),
            }
        }
        let mut effects = Vec::new();
        let mut labels = Vec::new();
        let mut zero_inserted = false;
        for (lam, vs) in groups {
            if zero_seen && !zero_inserted && lam < 0.0 {
                effects.push(Effect::Complement(nonzero.clone()));
                labels.push("0".to_string());
                zero_inserted = true;
            }
            effects.push(Effect::Projector(vs));
            labels.push(format!("{lam}"));
        }
        if zero_seen && !zero_inserted {
            effects.push(Effect::Complement(nonzero));
            labels.push("0".to_string());
        }
        Povm::new(dim, effects, labels)
    }

    /// Two-outcome projective measurement built at `phi` that extracts the
    /// full quantum Fisher information there: projectors onto
    /// `(psi +- e)/sqrt2`, where `e` is the normalized component of
    /// `-iH psi` orthogonal to `psi`, plus the complement.
    pub fn phase_optimal(state0: &StateVector, gen: &HermitianOperator, phi: f64) -> Result<Self> {
        let psi = evolve(state0, gen, phi)?;
        let a = psi.amplitudes();
        let d: Vec<C64> = gen.apply(a)?.into_iter().map(|z| z * C64::new(0.0, -1.0)).collect();
        let along = dot(a, &d);
        let perp: Vec<C64> = d.iter().zip(a).map(|(di, ai)| di - ai * along).collect();
        let spread = perp.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(spread > 1e-15) {
            return Err(MetroError::SharpGenerator(spread));
        }
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = a.iter().zip(&perp).map(|(x, e)| (x + e / spread) * r).collect();
        let minus = a.iter().zip(&perp).map(|(x, e)| (x - e / spread) * r).collect();
        Povm::projective(psi.dim(), vec![plus, minus], vec!["+".into(), "-".into()])
    }

    /// Computational-basis measurement.
    pub fn computational(dim: usize) -> Result<Self> {
        if dim > DENSE_LIMIT {
            return Err(MetroError::Size(dim));
        }
        let effects =
            (0..dim).map(|i| Effect::Diagonal((0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())).collect();
        Povm::new(dim, effects, (0..dim).map(|i| i.to_string()).collect())
    }

    /// `k` outcomes with effects `I/k`, blind to the state.
    pub fn uniform(dim: usize, k: usize) -> Result<Self> {
        let effects = (0..k).map(|_| Effect::Diagonal(vec![1.0 / k as f64; dim])).collect();
        Povm::new(dim, effects, (0..k).map(|i| i.to_string()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Outcome probabilities and, when computed, their phase derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub probs: Vec<f64>,
    pub derivs: Option<Vec<f64>>,
}

fn check_dims(state: &StateVector, povm: &Povm) -> Result<()> {
    if state.dim() != povm.dim {
        return Err(MetroError::Dimension(format!(
            "state of dimension {} with POVM of dimension {}",
            state.dim(),
            povm.dim
        )));
    }
    Ok(())
}

fn probabilities(psi: &[C64], povm: &Povm) -> Result<Vec<f64>> {
    let mut probs: Vec<f64> = povm.effects.iter().map(|e| e.sandwich(psi, psi).re).collect();
    for p in probs.iter_mut() {
        if *p < 0.0 {
            if *p < -PROB_CLAMP {
                return Err(MetroError::Completeness(format!("negative probability {p:e}")));
            }
            *p = 0.0;
        }
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > COMPLETENESS_TOL {
        return Err(MetroError::Completeness(format!("probabilities sum to {total}")));
    }
    probs.iter_mut().for_each(|p| *p /= total);
    Ok(probs)
}

/// Born rule `p(x) = <psi|E_x|psi>`.
pub fn born_probabilities(state: &StateVector, povm: &Povm) -> Result<OutcomeDistribution> {
    check_dims(state, povm)?;
    Ok(OutcomeDistribution { probs: probabilities(state.amplitudes(), povm)?, derivs: None })
}

/// Distribution of `exp(-i phi H)|psi0>` together with the analytic
/// derivatives `dp(x)/dphi = 2 Im <psi|E_x H|psi>`.
pub fn born_derivative(
    state0: &StateVector,
    gen: &HermitianOperator,
    phi: f64,
    povm: &Povm,
) -> Result<OutcomeDistribution> {
    check_dims(state0, povm)?;
    let psi = evolve(state0, gen, phi)?;
    let h_psi = gen.apply(psi.amplitudes())?;
    let probs = probabilities(psi.amplitudes(), povm)?;
    let derivs = povm.effects.iter().map(|e| 2.0 * e.sandwich(psi.amplitudes(), &h_psi).im).collect();
    Ok(OutcomeDistribution { probs, derivs: Some(derivs) })
}

/// `(<X>, Delta X)`.
pub fn observable_moments(state: &StateVector, obs: &HermitianOperator) -> Result<(f64, f64)> {
    Ok((expectation(state, obs)?, variance(state, obs)?.sqrt()))
}

/// Random stream for `(seed, stream)`: ChaCha20 seeded with
/// `seed_from_u64(seed)` and switched to stream number `stream`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Multinomial draw of `shots` outcomes by sequential conditional binomials.
pub fn sample_with(dist: &OutcomeDistribution, shots: u64, rng: &mut ChaCha20Rng) -> Vec<u64> {
    let mut counts = vec![0u64; dist.probs.len()];
    let mut remaining = shots;
    let mut mass_left = 1.0;
    for (x, &p) in dist.probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if x + 1 == dist.probs.len() {
            counts[x] = remaining;
            break;
        }
        let q = if mass_left > 0.0 { (p / mass_left).clamp(0.0, 1.0) } else { 0.0 };
        let k = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q).expect("probability in (0,1)").sample(rng)
        };
        counts[x] = k;
        remaining -= k;
        mass_left -= p;
    }
    counts
}

/// Seeded multinomial sample; identical seeds give identical counts.
pub fn sample_outcomes(dist: &OutcomeDistribution, shots: u64, seed: u64) -> Result<Vec<u64>> {
    if shots == 0 {
        return Err(MetroError::Schema("shots must be >= 1".into()));
    }
    Ok(sample_with(dist, shots, &mut rng_stream(seed, 0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{ghz_state, zero_n_superposition, FockTruncation};
    use std::f64::consts::FRAC_1_SQRT_2;

    fn plus_minus(n: usize) -> Povm {
        let dim = n + 1;
        let mut plus = vec![C64::new(0.0, 0.0); dim];
        let mut minus = plus.clone();
        plus[0] = C64::new(FRAC_1_SQRT_2, 0.0);
        plus[n] = C64::new(FRAC_1_SQRT_2, 0.0);
        minus[0] = C64::new(FRAC_1_SQRT_2, 0.0);
        minus[n] = C64::new(-FRAC_1_SQRT_2, 0.0);
        Povm::projective(dim, vec![plus, minus], vec!["+".into(), "-".into()]).unwrap()
    }

    fn zero_n(n: usize) -> (StateVector, HermitianOperator) {
        let t = FockTruncation::new(n).unwrap();
        (zero_n_superposition(n, &t).unwrap(), HermitianOperator::number_power(n, 2).unwrap())
    }

    #[test]
    fn zero_n_interference() {
        for n in [1usize, 2, 3] {
            let (s, h) = zero_n(n);
            let povm = plus_minus(n);
            let n2 = (n * n) as f64;
            for phi in [0.0, 0.1, 0.7, 2.0] {
                let psi = evolve(&s, &h, phi).unwrap();
                let d = born_probabilities(&psi, &povm).unwrap();
                // Oracle: |<+|psi>|^2 = |1 + e^{-i N^2 phi}|^2 / 4.
                let amp = (C64::new(1.0, 0.0) + C64::from_polar(1.0, -n2 * phi)) * 0.5;
                assert!((d.probs[0] - amp.norm_sqr()).abs() < 1e-12);
                assert!((d.probs[0] - (1.0 + (n2 * phi).cos()) / 2.0).abs() < 1e-12);
                assert!((d.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
            let d0 = born_probabilities(&s, &povm).unwrap();
            assert!((d0.probs[0] - 1.0).abs() < 1e-15 && d0.probs[1].abs() < 1e-15);
        }
    }

    #[test]
    fn blind_povm() {
        let povm = Povm::uniform(3, 2).unwrap();
        let s = StateVector::normalized(vec![3], vec![C64::new(0.3, 0.1), C64::new(1.0, 0.0), C64::new(0.0, -2.0)])
            .unwrap();
        let d = born_probabilities(&s, &povm).unwrap();
        assert!((d.probs[0] - 0.5).abs() < 1e-15 && (d.probs[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for n in [1usize, 2, 3] {
            let (s, h) = zero_n(n);
            let povm = plus_minus(n);
            let n2 = (n * n) as f64;
            for phi in [0.05, 0.3, 1.1] {
                let d = born_derivative(&s, &h, phi, &povm).unwrap();
                let derivs = d.derivs.unwrap();
                assert!((derivs[0] + n2 / 2.0 * (n2 * phi).sin()).abs() < 1e-12);
                let step = 1e-6;
                let hi = born_derivative(&s, &h, phi + step, &povm).unwrap().probs[0];
                let lo = born_derivative(&s, &h, phi - step, &povm).unwrap().probs[0];
                let fd = (hi - lo) / (2.0 * step);
                assert!((derivs[0] - fd).abs() < 1e-6 * n2 * n2);
                assert!(derivs.iter().sum::<f64>().abs() < 1e-10);
            }
            let d = born_derivative(&s, &h, 0.0, &povm).unwrap().derivs.unwrap();
            assert!(d.iter().all(|x| x.abs() < 1e-15));
        }
    }

    #[test]
    fn commuting_measurement_sees_nothing() {
        let h = HermitianOperator::number(3).unwrap();
        let s = StateVector::basis(vec![4], 2).unwrap();
        let d = born_derivative(&s, &h, 0.4, &Povm::computational(4).unwrap()).unwrap();
        assert!(d.derivs.unwrap().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn zero_n_observable_moments() {
        for n in [1usize, 2, 4] {
            let (s, h) = zero_n(n);
            let x = HermitianOperator::coherence(n + 1, 0, n).unwrap();
            let n2 = (n * n) as f64;
            for phi in [0.03, 0.2, 0.9] {
                let psi = evolve(&s, &h, phi).unwrap();
                let (m, sd) = observable_moments(&psi, &x).unwrap();
                assert!((m - (n2 * phi).cos()).abs() < 1e-12);
                assert!((sd - (n2 * phi).sin().abs()).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn ghz_parity_moments() {
        for n in [1usize, 2, 3, 5] {
            let s = ghz_state(n).unwrap();
            let dim = 1usize << n;
            let h = HermitianOperator::diagonal((0..dim).map(|i| i.count_ones() as f64).collect()).unwrap();
            let parity = HermitianOperator::coherence(dim, 0, dim - 1).unwrap();
            let phi = 0.21;
            let psi = evolve(&s, &h, phi).unwrap();
            // Oracle: two amplitudes 1/sqrt2 and e^{-i N phi}/sqrt2.
            let a = psi.amplitudes();
            let mean_oracle = 2.0 * (a[0].conj() * a[dim - 1]).re;
            let (m, sd) = observable_moments(&psi, &parity).unwrap();
            assert!((m - mean_oracle).abs() < 1e-12);
            assert!((m - (n as f64 * phi).cos()).abs() < 1e-12);
            assert!((sd - (n as f64 * phi).sin().abs()).abs() < 1e-7);
        }
    }

    #[test]
    fn eigenstate_moments() {
        let x = HermitianOperator::coherence(2, 0, 1).unwrap();
        let plus = StateVector::new(vec![2], vec![C64::new(FRAC_1_SQRT_2, 0.0); 2]).unwrap();
        let (m, sd) = observable_moments(&plus, &x).unwrap();
        assert!((m - 1.0).abs() < 1e-15 && sd < 1e-7);
    }

    #[test]
    fn eigenbasis_of_sparse_observable() {
        let x = HermitianOperator::coherence(5, 0, 4).unwrap();
        let povm = Povm::eigenbasis(&x).unwrap();
        assert_eq!(povm.labels(), &["1", "0", "-1"]);
        let s = StateVector::basis(vec![5], 2).unwrap();
        let d = born_probabilities(&s, &povm).unwrap();
        assert_eq!(d.probs, vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn eigenbasis_on_large_register() {
        let dim = 1usize << 13;
        let parity = HermitianOperator::coherence(dim, 0, dim - 1).unwrap();
        let povm = Povm::eigenbasis(&parity).unwrap();
        assert_eq!(povm.len(), 3);
        let d = born_probabilities(&ghz_state(13).unwrap(), &povm).unwrap();
        assert!((d.probs[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eigenbasis_of_diagonal_and_dense() {
        let povm = Povm::eigenbasis(&HermitianOperator::diagonal(vec![1.0, 3.0, 1.0]).unwrap()).unwrap();
        assert_eq!(povm.len(), 2);
        let m = nalgebra::DMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(1.0, 0.0)],
        );
        let povm = Povm::eigenbasis(&HermitianOperator::from_dense(m).unwrap()).unwrap();
        assert_eq!(povm.len(), 2);
    }

    #[test]
    fn incomplete_povm_rejected() {
        let e = vec![Effect::Diagonal(vec![1.0, 0.0]), Effect::Diagonal(vec![0.0, 0.5])];
        assert!(matches!(Povm::new(2, e, vec!["a".into(), "b".into()]), Err(MetroError::Completeness(_))));
        let e = vec![Effect::Diagonal(vec![1.5, 1.0]), Effect::Diagonal(vec![-0.5, 0.0])];
        assert!(matches!(Povm::new(2, e, vec!["a".into(), "b".into()]), Err(MetroError::Completeness(_))));
    }

    #[test]
    fn phase_optimal_extracts_quantum_information() {
        let mut t = FockTruncation::new(30).unwrap();
        let s = crate::hilbert::coherent_state(C64::new(1.5, 0.4), &mut t).unwrap();
        let h = HermitianOperator::number_power(30, 2).unwrap();
        let phi = 0.013;
        let povm = Povm::phase_optimal(&s, &h, phi).unwrap();
        let d = born_derivative(&s, &h, phi, &povm).unwrap();
        assert!((d.probs[0] - 0.5).abs() < 1e-12 && (d.probs[1] - 0.5).abs() < 1e-12);
        let derivs = d.derivs.unwrap();
        let spread = variance(&s, &h).unwrap().sqrt();
        assert!((derivs[0] - spread).abs() < 1e-9 * spread);
        assert!((derivs[1] + spread).abs() < 1e-9 * spread);
        let eig = StateVector::basis(vec![31], 3).unwrap();
        assert!(matches!(Povm::phase_optimal(&eig, &h, 0.1), Err(MetroError::SharpGenerator(_))));
    }

    #[test]
    fn sampling_examples() {
        let sure = OutcomeDistribution { probs: vec![1.0, 0.0], derivs: None };
        assert_eq!(sample_outcomes(&sure, 100, 9).unwrap(), vec![100, 0]);
        let fair = OutcomeDistribution { probs: vec![0.5, 0.5], derivs: None };
        for seed in [0u64, 1, 42] {
            let c = sample_outcomes(&fair, 1_000_000, seed).unwrap();
            assert_eq!(c.iter().sum::<u64>(), 1_000_000);
            assert!((c[0] as f64 - 500_000.0).abs() < 5.0 * 500.0);
            assert_eq!(c, sample_outcomes(&fair, 1_000_000, seed).unwrap());
        }
        assert!(sample_outcomes(&fair, 0, 1).is_err());
    }

    #[test]
    fn sampling_converges_in_total_variation() {
        let probs = vec![0.1, 0.2, 0.3, 0.4];
        let dist = OutcomeDistribution { probs: probs.clone(), derivs: None };
        let shots = 1_000_000u64;
        let c = sample_outcomes(&dist, shots, 7).unwrap();
        let tv: f64 = c.iter().zip(&probs).map(|(&k, p)| (k as f64 / shots as f64 - p).abs()).sum::<f64>() / 2.0;
        assert!(tv < 0.01);
    }
}
