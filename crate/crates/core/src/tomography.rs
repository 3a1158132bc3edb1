//! Two-qubit state tomography by linear inversion of Pauli expectations.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hilbert::{LinearOperator, PureState, ONE, TOLERANCES, ZERO};
use crate::shot_noise::sample_counts;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn operator(&self) -> LinearOperator {
        let i = Complex64::new(0.0, 1.0);
        let entries = match self {
            Pauli::I => [ONE, ZERO, ZERO, ONE],
            Pauli::X => [ZERO, ONE, ONE, ZERO],
            Pauli::Y => [ZERO, -i, i, ZERO],
            Pauli::Z => [ONE, ZERO, ZERO, -ONE],
        };
        LinearOperator::from_row_slice(vec![2], &entries).expect("2x2 Pauli")
    }

    pub fn symbol(&self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TomographySetting {
    pub first: Pauli,
    pub second: Pauli,
    pub operator: LinearOperator,
}

impl TomographySetting {
    pub fn label(&self) -> String {
        format!("{}{}", self.first.symbol(), self.second.symbol())
    }
}

/// The 16 products `σ_i ⊗ σ_j`, first factor major, in `I, X, Y, Z` order.
pub fn tomography_settings() -> Vec<TomographySetting> {
    Pauli::ALL
        .iter()
        .flat_map(|&first| Pauli::ALL.iter().map(move |&second| (first, second)))
        .map(|(first, second)| TomographySetting {
            first,
            second,
            operator: first
                .operator()
                .tensor(&second.operator())
                .expect("4x4 product"),
        })
        .collect()
}

fn require_two_qubits(dims: &[usize]) -> Result<()> {
    if dims != [2, 2] {
        return Err(Error::DimensionMismatch {
            expected: vec![2, 2],
            found: dims.to_vec(),
        });
    }
    Ok(())
}

/// `<ψ|σ_i ⊗ σ_j|ψ>` for every setting, in settings order.
pub fn pauli_expectations(psi: &PureState) -> Result<Vec<f64>> {
    require_two_qubits(psi.dims())?;
    tomography_settings()
        .iter()
        .map(|s| Ok(s.operator.matrix_element(psi, psi)?.re))
        .collect()
}

/// Estimates each non-identity expectation from `pairs` two-outcome trials.
///
/// A product-Pauli measurement yields ±1 with `P(+1) = (1 + <O>)/2`.
pub fn sample_expectations<R: Rng + ?Sized>(
    expectations: &[f64],
    pairs: u64,
    rng: &mut R,
) -> Vec<f64> {
    expectations
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            if k == 0 {
                1.0
            } else {
                let plus = sample_counts((1.0 + e) / 2.0, pairs, rng) as f64 / pairs as f64;
                2.0 * plus - 1.0
            }
        })
        .collect()
}

/// Linear-inversion estimate; positivity is reported, not enforced.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn from_pure(psi: &PureState) -> Result<Self> {
        require_two_qubits(psi.dims())?;
        let v = psi.vector();
        Ok(Self {
            mat: v * v.adjoint(),
        })
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn is_hermitian(&self) -> bool {
        (&self.mat - self.mat.adjoint())
            .iter()
            .all(|x| x.norm() <= TOLERANCES.structural)
    }

    /// Ascending eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let hermitian = (&self.mat + self.mat.adjoint()).map(|x| x * 0.5);
        let mut values: Vec<f64> = hermitian.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// False when linear inversion produced a negative eigenvalue.
    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue() >= -TOLERANCES.structural
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.mat - &other.mat)
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }
}

/// `ρ = (1/4) Σ <σ_i ⊗ σ_j> σ_i ⊗ σ_j`.
pub fn linear_inversion(expectations: &[f64]) -> Result<DensityMatrix> {
    let settings = tomography_settings();
    if expectations.len() != settings.len() {
        return Err(Error::ExpectationCount {
            expected: settings.len(),
            found: expectations.len(),
        });
    }
    if (expectations[0] - 1.0).abs() > 1e-6 {
        return Err(Error::IdentityExpectation(expectations[0]));
    }
    let mut mat = DMatrix::<Complex64>::zeros(4, 4);
    for (setting, &e) in settings.iter().zip(expectations) {
        mat += setting.operator.matrix().map(|x| x * (e / 4.0));
    }
    Ok(DensityMatrix { mat })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureFidelity {
    /// `Re <ψ|ρ|ψ>`.
    pub value: f64,
    /// Discarded imaginary part, nonzero only for non-Hermitian input.
    pub residual_imag: f64,
}

pub fn fidelity_pure(rho: &DensityMatrix, psi: &PureState) -> Result<PureFidelity> {
    require_two_qubits(psi.dims())?;
    let v = psi.vector();
    let f = v.dotc(&(&rho.mat * v));
    Ok(PureFidelity {
        value: f.re,
        residual_imag: f.im,
    })
}

/// `|<ψ|φ>|²`.
pub fn fidelity_states(psi: &PureState, phi: &PureState) -> Result<f64> {
    Ok(psi.inner(phi)?.norm_sqr())
}
