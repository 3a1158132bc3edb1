//! Dense complex linear algebra over small tensor-product Hilbert spaces.
//!
//! Basis ordering is lexicographic with the first tensor factor most
//! significant: for dims `[2, 2]` the basis is `|00>, |01>, |10>, |11>`.
//! Every state, operator, and file format in the crate inherits this order.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex scalar used for amplitudes, weak values and modular values.
pub type ComplexValue = Complex64;

/// Numerical thresholds shared by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Structural checks: idempotence, unitarity, normalization of inputs.
    pub structural: f64,
    /// Algebraic identities between two exact routes.
    pub algebraic: f64,
    /// Largest total dimension accepted by the dense representation.
    pub max_dim: usize,
}

pub const TOLERANCES: Tolerances = Tolerances {
    structural: 1e-10,
    algebraic: 1e-12,
    max_dim: 4096,
};

impl Default for Tolerances {
    fn default() -> Self {
        TOLERANCES
    }
}

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn total_dim(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidDims(dims.to_vec()));
    }
    let mut total: usize = 1;
    for &d in dims {
        total = total
            .checked_mul(d)
            .filter(|&t| t <= TOLERANCES.max_dim)
            .ok_or(Error::TooLarge {
                dim: total.saturating_mul(d),
                max: TOLERANCES.max_dim,
            })?;
    }
    Ok(total)
}

fn concat_dims(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

/// A pure state vector with an explicit tensor-factor structure.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    dims: Vec<usize>,
    amps: DVector<Complex64>,
}

impl PureState {
    pub fn new(dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        let dim = total_dim(&dims)?;
        if amps.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: vec![amps.len()],
            });
        }
        Ok(Self {
            dims,
            amps: DVector::from_vec(amps),
        })
    }

    /// Builds a state from real amplitudes.
    pub fn from_real(dims: Vec<usize>, amps: &[f64]) -> Result<Self> {
        Self::new(dims, amps.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Computational basis vector `|index>`.
    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let dim = total_dim(&dims)?;
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, bound: dim });
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amps.as_slice()
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub(crate) fn vector(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm() - 1.0).abs() <= TOLERANCES.structural
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            dims: self.dims.clone(),
            amps: self.amps.unscale(norm),
        })
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let dims = concat_dims(&self.dims, &other.dims);
        total_dim(&dims)?;
        Ok(Self {
            dims,
            amps: self.amps.kronecker(&other.amps),
        })
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &PureState) -> Result<ComplexValue> {
        self.check_same_dims(&other.dims)?;
        Ok(self.amps.dotc(&other.amps))
    }

    /// Multiplies every amplitude by `factor`.
    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            dims: self.dims.clone(),
            amps: self.amps.scale_complex(factor),
        }
    }

    fn check_same_dims(&self, dims: &[usize]) -> Result<()> {
        if self.dims != dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.clone(),
                found: dims.to_vec(),
            });
        }
        Ok(())
    }
}

trait ScaleComplex {
    fn scale_complex(&self, factor: Complex64) -> Self;
}

impl ScaleComplex for DVector<Complex64> {
    fn scale_complex(&self, factor: Complex64) -> Self {
        self.map(|a| a * factor)
    }
}

/// A dense square operator acting on a declared factor structure.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearOperator {
    dims: Vec<usize>,
    mat: DMatrix<Complex64>,
}

impl LinearOperator {
    pub fn new(dims: Vec<usize>, mat: DMatrix<Complex64>) -> Result<Self> {
        let dim = total_dim(&dims)?;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: vec![mat.nrows(), mat.ncols()],
            });
        }
        Ok(Self { dims, mat })
    }

    /// Row-major construction.
    pub fn from_row_slice(dims: Vec<usize>, entries: &[Complex64]) -> Result<Self> {
        let dim = total_dim(&dims)?;
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: vec![entries.len()],
            });
        }
        Self::new(dims, DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn identity(dims: Vec<usize>) -> Result<Self> {
        let dim = total_dim(&dims)?;
        Ok(Self {
            dims,
            mat: DMatrix::identity(dim, dim),
        })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let dim = total_dim(&dims)?;
        Ok(Self {
            dims,
            mat: DMatrix::zeros(dim, dim),
        })
    }

    /// Rank-one projector `|index><index|`.
    pub fn projector(dims: Vec<usize>, index: usize) -> Result<Self> {
        Self::projector_onto(&PureState::basis(dims, index)?)
    }

    /// Rank-one projector `|v><v|`; `v` must be normalized.
    pub fn projector_onto(v: &PureState) -> Result<Self> {
        if !v.is_normalized() {
            return Err(Error::NotNormalized { norm: v.norm() });
        }
        Ok(Self {
            dims: v.dims.clone(),
            mat: &v.amps * v.amps.adjoint(),
        })
    }

    /// Lifts `local`, acting on factor `factor` of `dims`, to the full space
    /// by tensoring identities on every other factor.
    pub fn embed(dims: &[usize], factor: usize, local: &LinearOperator) -> Result<Self> {
        if factor >= dims.len() {
            return Err(Error::IndexOutOfRange {
                index: factor,
                bound: dims.len(),
            });
        }
        if local.dims != [dims[factor]] {
            return Err(Error::DimensionMismatch {
                expected: vec![dims[factor]],
                found: local.dims.clone(),
            });
        }
        total_dim(dims)?;
        let before: usize = dims[..factor].iter().product();
        let after: usize = dims[factor + 1..].iter().product();
        let mat = DMatrix::<Complex64>::identity(before, before)
            .kronecker(&local.mat)
            .kronecker(&DMatrix::identity(after, after));
        Ok(Self {
            dims: dims.to_vec(),
            mat,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    pub fn tensor(&self, other: &LinearOperator) -> Result<Self> {
        let dims = concat_dims(&self.dims, &other.dims);
        total_dim(&dims)?;
        Ok(Self {
            dims,
            mat: self.mat.kronecker(&other.mat),
        })
    }

    /// Operator product `self · other`.
    pub fn compose(&self, other: &LinearOperator) -> Result<Self> {
        self.check_same_dims(&other.dims)?;
        Ok(Self {
            dims: self.dims.clone(),
            mat: &self.mat * &other.mat,
        })
    }

    pub fn add(&self, other: &LinearOperator) -> Result<Self> {
        self.check_same_dims(&other.dims)?;
        Ok(Self {
            dims: self.dims.clone(),
            mat: &self.mat + &other.mat,
        })
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            dims: self.dims.clone(),
            mat: self.mat.map(|x| x * factor),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dims: self.dims.clone(),
            mat: self.mat.adjoint(),
        }
    }

    pub fn apply(&self, state: &PureState) -> Result<PureState> {
        self.check_same_dims(&state.dims)?;
        Ok(PureState {
            dims: self.dims.clone(),
            amps: &self.mat * &state.amps,
        })
    }

    /// `<bra| self |ket>`.
    pub fn matrix_element(&self, bra: &PureState, ket: &PureState) -> Result<ComplexValue> {
        bra.inner(&self.apply(ket)?)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &LinearOperator) -> Result<f64> {
        self.check_same_dims(&other.dims)?;
        Ok(self
            .mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn idempotence_residual(&self) -> f64 {
        let sq = &self.mat * &self.mat;
        (sq - &self.mat).iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (&self.mat - self.mat.adjoint())
            .iter()
            .all(|x| x.norm() <= tol)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        let n = self.dim();
        (self.mat.adjoint() * &self.mat - DMatrix::<Complex64>::identity(n, n))
            .iter()
            .all(|x| x.norm() <= tol)
    }

    /// `exp(-i g P)` for an idempotent `P`, via `I + (e^{-ig} - 1) P`.
    pub fn exp_projector_phase(&self, g: f64) -> Result<Self> {
        let residual = self.idempotence_residual();
        if residual > TOLERANCES.structural {
            return Err(Error::NotIdempotent { residual });
        }
        let s = Complex64::new(0.0, -g).exp() - ONE;
        let n = self.dim();
        Ok(Self {
            dims: self.dims.clone(),
            mat: DMatrix::identity(n, n) + self.mat.map(|x| x * s),
        })
    }

    /// `exp(-i g O)` by dense matrix exponential, for any operator.
    pub fn exp_phase(&self, g: f64) -> Self {
        let factor = Complex64::new(0.0, -g);
        Self {
            dims: self.dims.clone(),
            mat: self.mat.map(|x| x * factor).exp(),
        }
    }

    fn check_same_dims(&self, dims: &[usize]) -> Result<()> {
        if self.dims != dims {
            return Err(Error::DimensionMismatch {
                expected: self.dims.clone(),
                found: dims.to_vec(),
            });
        }
        Ok(())
    }
}
