use num_complex::Complex64 as C64;

use crate::error::{MetroError, Result};

/// Largest supported product dimension.
pub const MAX_DIM: usize = 1 << 16;

const NORM_TOL: f64 = 1e-12;

/// Normalized pure state over a product of finite subsystems.
///
/// Subsystem 0 is the most significant digit of the flat amplitude index, so
/// `|q0 q1 ... q(n-1)>` on qubits sits at index `q0 * 2^(n-1) + ... + q(n-1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amplitudes: Vec<C64>,
}

pub(crate) fn product_dim(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(MetroError::Dimension("state needs at least one subsystem".into()));
    }
    let mut total: usize = 1;
    for &d in dims {
        if d < 2 {
            return Err(MetroError::Dimension(format!("subsystem dimension {d} < 2")));
        }
        total = total.checked_mul(d).ok_or(MetroError::Size(usize::MAX))?;
        if total > MAX_DIM {
            return Err(MetroError::Size(total));
        }
    }
    Ok(total)
}

pub(crate) fn norm_sqr(amps: &[C64]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

impl StateVector {
    /// Wraps amplitudes that must already have unit norm (within 1e-12).
    pub fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> Result<Self> {
        let total = product_dim(&dims)?;
        if amplitudes.len() != total {
            return Err(MetroError::Dimension(format!(
                "{} amplitudes for product dimension {total}",
                amplitudes.len()
            )));
        }
        let norm = norm_sqr(&amplitudes).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(MetroError::Normalization(norm));
        }
        Ok(StateVector { dims, amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(dims: Vec<usize>, mut amplitudes: Vec<C64>) -> Result<Self> {
        let norm = norm_sqr(&amplitudes).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(MetroError::Normalization(norm));
        }
        for a in amplitudes.iter_mut() {
            *a /= norm;
        }
        StateVector::new(dims, amplitudes)
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total = product_dim(&dims)?;
        if index >= total {
            return Err(MetroError::Dimension(format!("basis index {index} >= {total}")));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); total];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(StateVector { dims, amplitudes })
    }

    /// Qubit register in the computational basis state given by `bits`.
    pub fn qubits(bits: &[u8]) -> Result<Self> {
        let index = bits.iter().fold(0usize, |acc, &b| (acc << 1) | usize::from(b != 0));
        StateVector::basis(vec![2; bits.len()], index)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amplitudes).sqrt()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(MetroError::Dimension(format!(
                "inner product of dimensions {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// Multiplies every amplitude by `e^{i theta}`.
    pub fn with_global_phase(&self, theta: f64) -> StateVector {
        let phase = C64::from_polar(1.0, theta);
        StateVector { dims: self.dims.clone(), amplitudes: self.amplitudes.iter().map(|a| a * phase).collect() }
    }

    pub(crate) fn from_parts_unchecked(dims: Vec<usize>, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), amplitudes.len());
        StateVector { dims, amplitudes }
    }
}

/// Kronecker product of two states; subsystem lists are concatenated.
pub fn tensor_product(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    let mut dims = a.dims.clone();
    dims.extend_from_slice(&b.dims);
    product_dim(&dims)?;
    let amplitudes = a.amplitudes.iter().flat_map(|x| b.amplitudes.iter().map(move |y| x * y)).collect();
    Ok(StateVector { dims, amplitudes })
}

/// `(|0...0> + |1...1>)/sqrt(2)` on `n_qubits` qubits.
pub fn ghz_state(n_qubits: usize) -> Result<StateVector> {
    if n_qubits == 0 {
        return Err(MetroError::Arity("GHZ state needs at least one qubit".into()));
    }
    let dims = vec![2; n_qubits];
    let total = product_dim(&dims)?;
    let mut amplitudes = vec![C64::new(0.0, 0.0); total];
    let h = std::f64::consts::FRAC_1_SQRT_2;
    amplitudes[0] = C64::new(h, 0.0);
    amplitudes[total - 1] = C64::new(h, 0.0);
    Ok(StateVector { dims, amplitudes })
}
