use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::state::{product_dim, MAX_DIM};
use crate::error::{MetroError, Result};

/// Largest dimension for which a dense matrix is materialized.
pub const DENSE_LIMIT: usize = 4096;

const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    Diagonal(Vec<f64>),
    /// Every nonzero entry, sorted by (row, col), Hermitian-closed.
    Sparse(Vec<(usize, usize, C64)>),
    Dense(DMatrix<C64>),
}

/// Finite-dimensional Hermitian operator.
///
/// Operators diagonal in the computational (or Fock) basis keep only their
/// real diagonal, which makes `exp(-i phi H)` a per-amplitude phase. Sparse
/// storage covers few-entry observables on large registers; everything else is
/// a dense matrix of dimension at most [`DENSE_LIMIT`].
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    storage: Storage,
}

/// Eigen-decomposition of an operator restricted to the coordinates it touches.
/// Outside `support` the operator is identically zero.
#[derive(Debug, Clone)]
pub struct SupportSpectrum {
    pub support: Vec<usize>,
    pub values: Vec<f64>,
    /// Columns are eigenvectors over `support`, in the order of `values`.
    pub vectors: DMatrix<C64>,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(MetroError::Dimension("operator dimension must be positive".into()));
    }
    if dim > MAX_DIM {
        return Err(MetroError::Size(dim));
    }
    Ok(())
}

fn hermitian_scale(max_abs: f64) -> f64 {
    HERMITIAN_TOL * max_abs.max(1.0)
}

impl HermitianOperator {
    pub fn diagonal(values: Vec<f64>) -> Result<Self> {
        check_dim(values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MetroError::Dimension("non-finite diagonal entry".into()));
        }
        Ok(HermitianOperator { dim: values.len(), storage: Storage::Diagonal(values) })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        HermitianOperator::diagonal(vec![1.0; dim])
    }

    /// Photon number `n` on Fock levels `0..=cutoff`.
    pub fn number(cutoff: usize) -> Result<Self> {
        HermitianOperator::number_power(cutoff, 1)
    }

    /// `n^k` on Fock levels `0..=cutoff`.
    pub fn number_power(cutoff: usize, k: i32) -> Result<Self> {
        HermitianOperator::diagonal((0..=cutoff).map(|n| (n as f64).powi(k)).collect())
    }

    /// Symmetrizes `m` after checking it is Hermitian within 1e-12.
    pub fn from_dense(m: DMatrix<C64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(MetroError::Dimension(format!("{}x{} matrix is not square", m.nrows(), m.ncols())));
        }
        let dim = m.nrows();
        check_dim(dim)?;
        if dim > DENSE_LIMIT {
            return Err(MetroError::Size(dim));
        }
        let max_abs = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut dev: f64 = 0.0;
        for i in 0..dim {
            for j in 0..=i {
                dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        if !dev.is_finite() || dev > hermitian_scale(max_abs) {
            return Err(MetroError::NotHermitian(dev));
        }
        let sym = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let off_diagonal_zero = (0..dim).all(|i| (0..dim).all(|j| i == j || sym[(i, j)] == C64::new(0.0, 0.0)));
        if off_diagonal_zero {
            return HermitianOperator::diagonal((0..dim).map(|i| sym[(i, i)].re).collect());
        }
        Ok(HermitianOperator { dim, storage: Storage::Dense(sym) })
    }

    /// Builds from `(row, col, value)` entries; duplicates are summed and the
    /// result must be Hermitian within 1e-12.
    pub fn from_triplets(dim: usize, entries: &[(usize, usize, C64)]) -> Result<Self> {
        check_dim(dim)?;
        let mut map: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for &(r, c, v) in entries {
            if r >= dim || c >= dim {
                return Err(MetroError::Dimension(format!("entry ({r},{c}) outside dimension {dim}")));
            }
            *map.entry((r, c)).or_insert(C64::new(0.0, 0.0)) += v;
        }
        map.retain(|_, v| *v != C64::new(0.0, 0.0));
        let max_abs = map.values().map(|z| z.norm()).fold(0.0, f64::max);
        let tol = hermitian_scale(max_abs);
        let zero = C64::new(0.0, 0.0);
        let mut dev: f64 = 0.0;
        for (&(r, c), v) in &map {
            let mirror = map.get(&(c, r)).copied().unwrap_or(zero);
            dev = dev.max((v - mirror.conj()).norm());
        }
        if !dev.is_finite() || dev > tol {
            return Err(MetroError::NotHermitian(dev));
        }
        if map.keys().all(|(r, c)| r == c) {
            let mut diag = vec![0.0; dim];
            for ((r, _), v) in map {
                diag[r] = v.re;
            }
            return HermitianOperator::diagonal(diag);
        }
        // Symmetrize pairwise so the stored entries are exactly Hermitian.
        let mut sym = Vec::with_capacity(map.len());
        for (&(r, c), &v) in &map {
            let mirror = map.get(&(c, r)).copied().unwrap_or(zero);
            let value = if r == c { C64::new(v.re, 0.0) } else { (v + mirror.conj()) * 0.5 };
            sym.push((r, c, value));
        }
        for (&(r, c), &v) in &map {
            if r != c && !map.contains_key(&(c, r)) {
                sym.push((c, r, (v * 0.5).conj()));
            }
        }
        sym.sort_by_key(|&(r, c, _)| (r, c));
        Ok(HermitianOperator { dim, storage: Storage::Sparse(sym) })
    }

    /// `|a><b| + |b><a|` on a space of dimension `dim`.
    pub fn coherence(dim: usize, a: usize, b: usize) -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        HermitianOperator::from_triplets(dim, &[(a, b, one), (b, a, one)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Real diagonal when the operator is diagonal in the computational basis.
    pub fn diagonal_fastpath(&self) -> Option<&[f64]> {
        match &self.storage {
            Storage::Diagonal(d) => Some(d),
            _ => None,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self.storage, Storage::Diagonal(_))
    }

    /// Dense matrix of entries; only available up to [`DENSE_LIMIT`].
    pub fn entries(&self) -> Result<DMatrix<C64>> {
        if self.dim > DENSE_LIMIT {
            return Err(MetroError::Size(self.dim));
        }
        Ok(match &self.storage {
            Storage::Diagonal(d) => {
                DMatrix::from_diagonal(&DVector::from_iterator(self.dim, d.iter().map(|&x| C64::new(x, 0.0))))
            }
            Storage::Sparse(t) => {
                let mut m = DMatrix::zeros(self.dim, self.dim);
                for &(r, c, v) in t {
                    m[(r, c)] = v;
                }
                m
            }
            Storage::Dense(m) => m.clone(),
        })
    }

    fn triplets(&self) -> Vec<(usize, usize, C64)> {
        match &self.storage {
            Storage::Diagonal(d) => {
                d.iter().enumerate().filter(|(_, &x)| x != 0.0).map(|(i, &x)| (i, i, C64::new(x, 0.0))).collect()
            }
            Storage::Sparse(t) => t.clone(),
            Storage::Dense(m) => {
                let mut out = Vec::new();
                for r in 0..self.dim {
                    for c in 0..self.dim {
                        let v = m[(r, c)];
                        if v != C64::new(0.0, 0.0) {
                            out.push((r, c, v));
                        }
                    }
                }
                out
            }
        }
    }

    /// `H v`.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim {
            return Err(MetroError::Dimension(format!(
                "operator of dimension {} applied to vector of length {}",
                self.dim,
                v.len()
            )));
        }
        Ok(match &self.storage {
            Storage::Diagonal(d) => d.iter().zip(v).map(|(h, x)| x * h).collect(),
            Storage::Sparse(t) => {
                let mut out = vec![C64::new(0.0, 0.0); self.dim];
                for &(r, c, h) in t {
                    out[r] += h * v[c];
                }
                out
            }
            Storage::Dense(m) => {
                let x = DVector::from_column_slice(v);
                (m * x).as_slice().to_vec()
            }
        })
    }

    /// `H + c I`.
    pub fn shifted(&self, c: f64) -> HermitianOperator {
        let storage = match &self.storage {
            Storage::Diagonal(d) => Storage::Diagonal(d.iter().map(|x| x + c).collect()),
            Storage::Sparse(_) => {
                let mut t = self.triplets();
                t.extend((0..self.dim).map(|i| (i, i, C64::new(c, 0.0))));
                return HermitianOperator::from_triplets(self.dim, &t).expect("shift keeps Hermiticity");
            }
            Storage::Dense(m) => {
                let mut m = m.clone();
                for i in 0..self.dim {
                    m[(i, i)] += C64::new(c, 0.0);
                }
                Storage::Dense(m)
            }
        };
        HermitianOperator { dim: self.dim, storage }
    }

    pub fn scaled(&self, s: f64) -> HermitianOperator {
        let storage = match &self.storage {
            Storage::Diagonal(d) => Storage::Diagonal(d.iter().map(|x| x * s).collect()),
            Storage::Sparse(t) => Storage::Sparse(t.iter().map(|&(r, c, v)| (r, c, v * s)).collect()),
            Storage::Dense(m) => Storage::Dense(m * C64::new(s, 0.0)),
        };
        HermitianOperator { dim: self.dim, storage }
    }

    pub fn add(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        if self.dim != other.dim {
            return Err(MetroError::Dimension(format!("sum of dimensions {} and {}", self.dim, other.dim)));
        }
        match (&self.storage, &other.storage) {
            (Storage::Diagonal(a), Storage::Diagonal(b)) => {
                HermitianOperator::diagonal(a.iter().zip(b).map(|(x, y)| x + y).collect())
            }
            (Storage::Dense(_), _) | (_, Storage::Dense(_)) => {
                HermitianOperator::from_dense(self.entries()? + other.entries()?)
            }
            _ => {
                let mut t = self.triplets();
                t.extend(other.triplets());
                HermitianOperator::from_triplets(self.dim, &t)
            }
        }
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        let dim = self.dim.checked_mul(other.dim).ok_or(MetroError::Size(usize::MAX))?;
        check_dim(dim)?;
        if let (Some(a), Some(b)) = (self.diagonal_fastpath(), other.diagonal_fastpath()) {
            return HermitianOperator::diagonal(a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect());
        }
        let (ta, tb) = (self.triplets(), other.triplets());
        let t: Vec<_> = ta
            .iter()
            .flat_map(|&(ra, ca, va)| {
                tb.iter().map(move |&(rb, cb, vb)| (ra * other.dim + rb, ca * other.dim + cb, va * vb))
            })
            .collect();
        HermitianOperator::from_triplets(dim, &t)
    }

    /// Embeds a local operator acting on the subsystems `sites` (strictly
    /// increasing) of a register with subsystem dimensions `dims`.
    pub fn embed(&self, dims: &[usize], sites: &[usize]) -> Result<HermitianOperator> {
        let total = product_dim(dims)?;
        if sites.is_empty() || sites.windows(2).any(|w| w[0] >= w[1]) || sites[sites.len() - 1] >= dims.len() {
            return Err(MetroError::Dimension(format!("invalid site list {sites:?} for {} subsystems", dims.len())));
        }
        let local: usize = sites.iter().map(|&s| dims[s]).product();
        if local != self.dim {
            return Err(MetroError::Dimension(format!(
                "local operator of dimension {} on sites of dimension {local}",
                self.dim
            )));
        }
        // Place value (stride) of each subsystem in the flat index.
        let mut strides = vec![1usize; dims.len()];
        for k in (0..dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * dims[k + 1];
        }
        let local_index =
            |global: usize| sites.iter().fold(0usize, |acc, &s| acc * dims[s] + (global / strides[s]) % dims[s]);
        // Global offset contributed by a local index.
        let local_offset = |mut l: usize| {
            let mut off = 0usize;
            for &s in sites.iter().rev() {
                off += (l % dims[s]) * strides[s];
                l /= dims[s];
            }
            off
        };
        if let Some(d) = self.diagonal_fastpath() {
            return HermitianOperator::diagonal((0..total).map(|g| d[local_index(g)]).collect());
        }
        let local_t = self.triplets();
        let mut t = Vec::new();
        for g in 0..total {
            if local_index(g) != 0 {
                continue;
            }
            // `g` has every site digit zero; it labels one block of the environment.
            for &(r, c, v) in &local_t {
                t.push((g + local_offset(r), g + local_offset(c), v));
            }
        }
        HermitianOperator::from_triplets(total, &t)
    }

    /// Eigen-decomposition over the coordinates the operator touches.
    pub fn spectral_support(&self) -> Result<SupportSpectrum> {
        let support: Vec<usize> = match &self.storage {
            Storage::Diagonal(d) => (0..self.dim).filter(|&i| d[i] != 0.0).collect(),
            Storage::Sparse(t) => {
                let mut s: Vec<usize> = t.iter().flat_map(|&(r, c, _)| [r, c]).collect();
                s.sort_unstable();
                s.dedup();
                s
            }
            Storage::Dense(_) => (0..self.dim).collect(),
        };
        if support.len() > DENSE_LIMIT {
            return Err(MetroError::Size(support.len()));
        }
        let k = support.len();
        let block = match &self.storage {
            Storage::Dense(m) => m.clone(),
            _ => {
                let pos: BTreeMap<usize, usize> = support.iter().enumerate().map(|(i, &s)| (s, i)).collect();
                let mut b = DMatrix::zeros(k, k);
                for (r, c, v) in self.triplets() {
                    b[(pos[&r], pos[&c])] = v;
                }
                b
            }
        };
        if k == 0 {
            return Ok(SupportSpectrum { support, values: vec![], vectors: DMatrix::zeros(0, 0) });
        }
        let eig = block.symmetric_eigen();
        Ok(SupportSpectrum { support, values: eig.eigenvalues.as_slice().to_vec(), vectors: eig.eigenvectors })
    }

    /// All eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let mut values = match &self.storage {
            Storage::Diagonal(d) => d.clone(),
            _ => {
                let spec = self.spectral_support()?;
                let mut v = spec.values;
                v.extend(std::iter::repeat_n(0.0, self.dim - spec.support.len()));
                v
            }
        };
        values.sort_by(f64::total_cmp);
        Ok(values)
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.eigenvalues()?[0])
    }

    pub fn max_eigenvalue(&self) -> Result<f64> {
        Ok(*self.eigenvalues()?.last().expect("dimension is positive"))
    }

    /// Largest elementwise deviation from `other`.
    pub fn max_abs_diff(&self, other: &HermitianOperator) -> Result<f64> {
        if self.dim != other.dim {
            return Err(MetroError::Dimension(format!("compare dimensions {} and {}", self.dim, other.dim)));
        }
        let mut map: BTreeMap<(usize, usize), C64> = BTreeMap::new();
        for (r, c, v) in self.triplets() {
            *map.entry((r, c)).or_default() += v;
        }
        for (r, c, v) in other.triplets() {
            *map.entry((r, c)).or_default() -= v;
        }
        Ok(map.values().map(|z| z.norm()).fold(0.0, f64::max))
    }
}
