//! Named two-qubit states and postselections.
//!
//! Basis order is `HH, HV, VH, VV` with `H = 0` and `V = 1` on each side.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::hilbert::{PureState, ZERO};

fn two_qubit(amps: [Complex64; 4]) -> PureState {
    PureState::new(vec![2, 2], amps.to_vec()).expect("two-qubit preset")
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `(|HH> + e^{iθ}|VV>)/√2`.
pub fn phase_bell(theta: f64) -> PureState {
    let k = FRAC_1_SQRT_2;
    two_qubit([c(k, 0.0), ZERO, ZERO, c(0.0, theta).exp() * k])
}

/// `(|HH> + |VV>)/√2`.
pub fn bell() -> PureState {
    phase_bell(0.0)
}

/// `(|HH> + i|VV>)/√2`.
pub fn bell_i() -> PureState {
    let k = FRAC_1_SQRT_2;
    two_qubit([c(k, 0.0), ZERO, ZERO, c(0.0, k)])
}

/// `(|H> + |V>)(|H> - i|V>)/2`.
pub fn product_plus_minus_i() -> PureState {
    two_qubit([c(0.5, 0.0), c(0.0, -0.5), c(0.5, 0.0), c(0.0, -0.5)])
}

/// `[0.8|HH> - 0.6i|HV> - 0.8|VH> - 0.6i|VV>]/√2`.
pub fn asymmetric_entangled() -> PureState {
    let k = FRAC_1_SQRT_2;
    two_qubit([c(0.8 * k, 0.0), c(0.0, -0.6 * k), c(-0.8 * k, 0.0), c(0.0, -0.6 * k)])
}

/// Uniform superposition over an `m x n` basis; `|++>` for two qubits.
pub fn uniform_postselection(m: usize, n: usize) -> PureState {
    let a = 1.0 / ((m * n) as f64).sqrt();
    PureState::new(vec![m, n], vec![c(a, 0.0); m * n]).expect("uniform postselection")
}

/// `(|H> + |V>)(|H> - |V>)/2`, for states nearly orthogonal to `|++>`.
pub fn alternate_postselection() -> PureState {
    two_qubit([c(0.5, 0.0), c(-0.5, 0.0), c(0.5, 0.0), c(-0.5, 0.0)])
}
