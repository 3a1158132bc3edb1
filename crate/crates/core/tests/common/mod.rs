#![allow(dead_code)]

use directwf::{ComplexValue, PureState};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

/// Haar-ish random pure state from i.i.d. complex Gaussians.
pub fn random_state<R: Rng>(dims: &[usize], rng: &mut R) -> PureState {
    let dim: usize = dims.iter().product();
    let amps = (0..dim)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    PureState::new(dims.to_vec(), amps).unwrap().normalize().unwrap()
}

/// Meter probabilities for conditional state `N[|↑↓> + ε M |↓↑>]`, evaluated
/// directly from the projections onto `|1>` and `|2>`.
pub fn forward_probabilities(m: ComplexValue, eps: f64) -> (f64, f64) {
    let norm_sq = 1.0 + eps * eps * m.norm_sqr();
    let i = Complex64::new(0.0, 1.0);
    let one = Complex64::new(1.0, 0.0);
    let p1 = (one + m * eps).norm_sqr() / (2.0 * norm_sq);
    let p2 = (one - i * m * eps).norm_sqr() / (2.0 * norm_sq);
    (p1, p2)
}

pub fn close(a: ComplexValue, b: ComplexValue, tol: f64) -> bool {
    (a - b).norm() <= tol
}
