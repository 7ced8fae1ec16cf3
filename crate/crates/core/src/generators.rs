//! Black-box generator networks and resource counting.
//!
//! A network is a sum `H = sum_j A_j` of query terms, each acting on a subset
//! of `n` identical subsystems. Three families are built from one shared
//! atomic generator:
//!
//! * [`NetworkKind::Glm`]: one term per subsystem, `Q = N`.
//! * [`NetworkKind::Bfcg`]: one term `H_j (x) H_k` per unordered pair `j < k`, `Q = N(N-1)/2`.
//! * [`NetworkKind::Rb`]: one term per nonempty subset, `Q = 2^N - 1`.
//!
//! Atomic generators are ground-shifted before use so every term is positive
//! semidefinite with smallest eigenvalue zero.

use crate::error::{MetroError, Result};
use crate::hilbert::{expectation, HermitianOperator, StateVector, DENSE_LIMIT, MAX_DIM};

const PSD_TOL: f64 = 1e-10;

/// Largest register size accepted by [`build_rb`].
pub const RB_MAX_SYSTEMS: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct AtomicGenerator {
    matrix: HermitianOperator,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
}

impl AtomicGenerator {
    pub fn new(matrix: HermitianOperator) -> Result<Self> {
        if matrix.dim() < 2 {
            return Err(MetroError::Dimension("atomic generator acts on a subsystem of dimension >= 2".into()));
        }
        let ev = matrix.eigenvalues()?;
        Ok(AtomicGenerator { min_eigenvalue: ev[0], max_eigenvalue: ev[ev.len() - 1], matrix })
    }

    /// `diag(0, 1)`: a qubit with unit energy splitting.
    pub fn unit_qubit() -> Self {
        AtomicGenerator::new(HermitianOperator::diagonal(vec![0.0, 1.0]).expect("valid diagonal"))
            .expect("valid atomic generator")
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &HermitianOperator {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.min_eigenvalue
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.max_eigenvalue
    }

    /// `H - h_min I`, positive semidefinite with ground energy zero.
    pub fn shifted(&self) -> HermitianOperator {
        self.matrix.shifted(-self.min_eigenvalue)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum NetworkKind {
    Glm,
    Bfcg,
    Rb,
    Custom,
}

impl NetworkKind {
    pub fn name(self) -> &'static str {
        match self {
            NetworkKind::Glm => "GLM",
            NetworkKind::Bfcg => "BFCG",
            NetworkKind::Rb => "RB",
            NetworkKind::Custom => "CUSTOM",
        }
    }
}

/// Closed-form query count of a structured family.
pub fn expected_query_count(kind: NetworkKind, n: usize) -> Option<u64> {
    match kind {
        NetworkKind::Glm => Some(n as u64),
        NetworkKind::Bfcg => Some((n as u64) * (n as u64).saturating_sub(1) / 2),
        NetworkKind::Rb => 1u64.checked_shl(n as u32).map(|p| p - 1),
        NetworkKind::Custom => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TermOperator {
    /// Tensor power of the shared shifted atomic generator over the term's sites.
    AtomicPower,
    Explicit(HermitianOperator),
}

/// One query `A_j`: the subsystems it touches and its local operator.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTerm {
    pub sites: Vec<usize>,
    operator: TermOperator,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorNetwork {
    kind: NetworkKind,
    dims: Vec<usize>,
    atomic: Option<HermitianOperator>,
    terms: Vec<NetworkTerm>,
    total: HermitianOperator,
}

/// Generator with its ground energy moved to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedGenerator {
    pub operator: HermitianOperator,
    pub h_min: f64,
}

impl NormalizedGenerator {
    /// The generator before the ground shift, `operator + h_min I`.
    pub fn unnormalized(&self) -> HermitianOperator {
        self.operator.shifted(self.h_min)
    }
}

fn register_dims(atomic: &AtomicGenerator, n: usize) -> Result<Vec<usize>> {
    let d = atomic.dim();
    let mut total: usize = 1;
    for _ in 0..n {
        total = total.checked_mul(d).filter(|&t| t <= MAX_DIM).ok_or(MetroError::Size(total.saturating_mul(d)))?;
    }
    Ok(vec![d; n])
}

/// Per-subsystem digits of a flat index, subsystem 0 most significant.
fn digits(mut index: usize, d: usize, n: usize, out: &mut [usize]) {
    for k in (0..n).rev() {
        out[k] = index % d;
        index /= d;
    }
}

impl GeneratorNetwork {
    fn structured(kind: NetworkKind, atomic: &AtomicGenerator, n: usize, terms: Vec<Vec<usize>>) -> Result<Self> {
        let dims = register_dims(atomic, n)?;
        let shifted = atomic.shifted();
        let terms: Vec<NetworkTerm> =
            terms.into_iter().map(|sites| NetworkTerm { sites, operator: TermOperator::AtomicPower }).collect();
        let total = match shifted.diagonal_fastpath() {
            Some(d) => HermitianOperator::diagonal(diagonal_total(kind, d, n, &terms))?,
            None => {
                let dim: usize = dims.iter().product();
                if dim > DENSE_LIMIT {
                    return Err(MetroError::Size(dim));
                }
                let mut acc = HermitianOperator::diagonal(vec![0.0; dim])?;
                for t in &terms {
                    acc = acc.add(&power(&shifted, t.sites.len())?.embed(&dims, &t.sites)?)?;
                }
                acc
            }
        };
        Ok(GeneratorNetwork { kind, dims, atomic: Some(shifted), terms, total })
    }

    /// Network of arbitrary local terms on subsystems `dims`. Each term is
    /// ground-shifted before it is summed.
    pub fn custom(dims: Vec<usize>, terms: Vec<(Vec<usize>, HermitianOperator)>) -> Result<Self> {
        let dim = crate::hilbert::StateVector::basis(dims.clone(), 0)?.dim();
        if terms.is_empty() {
            return Err(MetroError::Arity("custom network needs at least one term".into()));
        }
        let mut total = HermitianOperator::diagonal(vec![0.0; dim])?;
        let mut out = Vec::with_capacity(terms.len());
        for (sites, op) in terms {
            let shifted = op.shifted(-op.min_eigenvalue()?);
            total = total.add(&shifted.embed(&dims, &sites)?)?;
            out.push(NetworkTerm { sites, operator: TermOperator::Explicit(shifted) });
        }
        Ok(GeneratorNetwork { kind: NetworkKind::Custom, dims, atomic: None, terms: out, total })
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    pub fn n_systems(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn terms(&self) -> &[NetworkTerm] {
        &self.terms
    }

    pub fn query_count(&self) -> usize {
        self.terms.len()
    }

    /// Sum of all embedded terms on the full register.
    pub fn total(&self) -> &HermitianOperator {
        &self.total
    }

    /// Local operator of term `j`, acting on `terms()[j].sites`.
    pub fn term_operator(&self, j: usize) -> Result<HermitianOperator> {
        let term = self.terms.get(j).ok_or_else(|| MetroError::Dimension(format!("no term {j}")))?;
        match &term.operator {
            TermOperator::Explicit(op) => Ok(op.clone()),
            TermOperator::AtomicPower => power(self.atomic.as_ref().expect("structured network"), term.sites.len()),
        }
    }

    /// Term `j` embedded on the full register.
    pub fn embedded_term(&self, j: usize) -> Result<HermitianOperator> {
        self.term_operator(j)?.embed(&self.dims, &self.terms[j].sites)
    }

    /// Largest eigenvalue over all single terms.
    pub fn max_term_eigenvalue(&self) -> Result<f64> {
        match &self.atomic {
            // Terms are tensor powers of one PSD operator, so the extremes are
            // the single-site and the largest power.
            Some(a) => {
                let top = a.max_eigenvalue()?;
                let k_max = self.terms.iter().map(|t| t.sites.len()).max().unwrap_or(1);
                Ok(top.max(top.powi(k_max as i32)))
            }
            None => (0..self.terms.len())
                .map(|j| self.term_operator(j)?.max_eigenvalue())
                .try_fold(f64::NEG_INFINITY, |acc, v| v.map(|v| acc.max(v))),
        }
    }
}

fn power(op: &HermitianOperator, k: usize) -> Result<HermitianOperator> {
    let mut acc = op.clone();
    for _ in 1..k {
        acc = acc.kron(op)?;
    }
    Ok(acc)
}

fn diagonal_total(kind: NetworkKind, d: &[f64], n: usize, terms: &[NetworkTerm]) -> Vec<f64> {
    let local = d.len();
    let dim = local.pow(n as u32);
    let mut digit = vec![0usize; n];
    (0..dim)
        .map(|g| {
            digits(g, local, n, &mut digit);
            match kind {
                // Sum over nonempty subsets of products factorizes.
                NetworkKind::Rb => digit.iter().map(|&b| 1.0 + d[b]).product::<f64>() - 1.0,
                _ => terms.iter().map(|t| t.sites.iter().map(|&s| d[digit[s]]).product::<f64>()).sum(),
            }
        })
        .collect()
}

/// One query per subsystem.
pub fn build_glm(atomic: &AtomicGenerator, n: usize) -> Result<GeneratorNetwork> {
    if n == 0 {
        return Err(MetroError::Arity("GLM network needs n >= 1".into()));
    }
    GeneratorNetwork::structured(NetworkKind::Glm, atomic, n, (0..n).map(|j| vec![j]).collect())
}

/// One query per unordered pair `j < k`.
pub fn build_bfcg(atomic: &AtomicGenerator, n: usize) -> Result<GeneratorNetwork> {
    if n < 2 {
        return Err(MetroError::Arity(format!("BFCG network needs n >= 2, got {n}")));
    }
    let pairs = (0..n).flat_map(|j| (j + 1..n).map(move |k| vec![j, k])).collect();
    GeneratorNetwork::structured(NetworkKind::Bfcg, atomic, n, pairs)
}

/// One query per nonempty subset of subsystems, ordered by subset size and
/// then lexicographically.
pub fn build_rb(atomic: &AtomicGenerator, n: usize) -> Result<GeneratorNetwork> {
    if n == 0 {
        return Err(MetroError::Arity("RB network needs n >= 1".into()));
    }
    if n > RB_MAX_SYSTEMS {
        return Err(MetroError::Size(atomic.dim().saturating_pow(n as u32)));
    }
    let mut subsets: Vec<Vec<usize>> =
        (1u32..(1u32 << n)).map(|mask| (0..n).filter(|&j| mask & (1 << j) != 0).collect()).collect();
    subsets.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    GeneratorNetwork::structured(NetworkKind::Rb, atomic, n, subsets)
}

pub fn query_count(net: &GeneratorNetwork) -> usize {
    net.query_count()
}

/// Subtracts the smallest eigenvalue so the ground state has zero energy.
pub fn normalize_ground_energy(op: &HermitianOperator) -> Result<NormalizedGenerator> {
    let h_min = op.min_eigenvalue()?;
    Ok(NormalizedGenerator { operator: op.shifted(-h_min), h_min })
}

/// `|<psi| H_norm |psi>|`.
pub fn resource_count(state: &StateVector, gen: &NormalizedGenerator) -> Result<f64> {
    Ok(expectation(state, &gen.operator)?.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceCheck {
    pub resource: f64,
    /// `Q` times the largest eigenvalue of any single term.
    pub bound: f64,
    pub ok: bool,
}

/// Compares `|<H>|` against the explicit `O(Q)` ceiling `Q * max_j ||A_j||`.
pub fn resource_vs_query_check(net: &GeneratorNetwork, state: &StateVector) -> Result<ResourceCheck> {
    let resource = expectation(state, net.total())?.abs();
    let bound = net.query_count() as f64 * net.max_term_eigenvalue()?;
    Ok(ResourceCheck { resource, bound, ok: resource <= bound + 1e-9 })
}

/// Checks every term is positive semidefinite within 1e-10.
pub fn terms_positive(net: &GeneratorNetwork) -> Result<bool> {
    if let Some(a) = &net.atomic {
        return Ok(a.min_eigenvalue()? >= -PSD_TOL);
    }
    for j in 0..net.terms.len() {
        if net.term_operator(j)?.min_eigenvalue()? < -PSD_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}
