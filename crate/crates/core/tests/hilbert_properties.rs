mod common;

use std::f64::consts::PI;

use directwf::{LinearOperator, PureState};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::random_state;

/// Plain truncated Taylor series of `exp(A)` with no scaling or squaring.
fn taylor_exp(a: &DMatrix<Complex64>, terms: usize) -> DMatrix<Complex64> {
    let n = a.nrows();
    let mut sum = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..terms {
        term = &term * a / Complex64::new(k as f64, 0.0);
        sum += &term;
    }
    sum
}

fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|x| x.norm()).fold(0.0, f64::max)
}

#[test]
fn random_projector_is_idempotent_and_hermitian() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dim in [2, 3, 4, 8] {
        let v = random_state(&[dim], &mut rng);
        let p = LinearOperator::projector_onto(&v).unwrap();
        let sq = p.compose(&p).unwrap();
        assert!(sq.max_abs_diff(&p).unwrap() < 1e-12);
        assert!(p.is_hermitian(1e-12));
    }
}

#[test]
fn closed_form_phase_matches_taylor_series() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for dims in [vec![2], vec![2, 2], vec![3, 2]] {
        let v = random_state(&dims, &mut rng);
        let p = LinearOperator::projector_onto(&v).unwrap();
        let g = PI / 3.0;
        let closed = p.exp_projector_phase(g).unwrap();
        let generator = p.matrix().map(|x| x * Complex64::new(0.0, -g));
        let series = taylor_exp(&generator, 40);
        assert!(max_diff(closed.matrix(), &series) < 1e-10);
        // The dense exponential agrees as well.
        assert!(max_diff(p.exp_phase(g).matrix(), &series) < 1e-10);
        assert!(closed.is_unitary(1e-10));
    }
}

#[test]
fn dense_exponential_of_projector_sum_matches_taylor_series() {
    let a = LinearOperator::embed(&[2, 2], 0, &LinearOperator::projector(vec![2], 1).unwrap())
        .unwrap();
    let b = LinearOperator::embed(&[2, 2], 1, &LinearOperator::projector(vec![2], 1).unwrap())
        .unwrap();
    let sum = a.add(&b).unwrap();
    for g in [0.3, PI, 2.0 * PI / 3.0] {
        let series = taylor_exp(&sum.matrix().map(|x| x * Complex64::new(0.0, -g)), 60);
        assert!(max_diff(sum.exp_phase(g).matrix(), &series) < 1e-10);
    }
}

#[test]
fn commuting_projectors_on_disjoint_factors_factorize() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let pa = LinearOperator::projector_onto(&random_state(&[2], &mut rng)).unwrap();
        let pb = LinearOperator::projector_onto(&random_state(&[3], &mut rng)).unwrap();
        let a = LinearOperator::embed(&[2, 3], 0, &pa).unwrap();
        let b = LinearOperator::embed(&[2, 3], 1, &pb).unwrap();
        for g in [PI, 0.77] {
            let joint = a.add(&b).unwrap().exp_phase(g);
            let product = a
                .exp_projector_phase(g)
                .unwrap()
                .compose(&b.exp_projector_phase(g).unwrap())
                .unwrap();
            assert!(joint.max_abs_diff(&product).unwrap() < 1e-12);
        }
    }
}

fn arb_state(dim: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
        .prop_filter("nonzero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(move |v| {
            PureState::new(vec![dim], v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
                .unwrap()
                .normalize()
                .unwrap()
        })
}

proptest! {
    #[test]
    fn tensor_is_associative(a in arb_state(2), b in arb_state(3), c in arb_state(2)) {
        let left = a.tensor(&b).unwrap().tensor(&c).unwrap();
        let right = a.tensor(&b.tensor(&c).unwrap()).unwrap();
        prop_assert_eq!(left.dims(), right.dims());
        for (x, y) in left.amplitudes().iter().zip(right.amplitudes()) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn phase_and_inverse_phase_cancel(v in arb_state(4), g in -10.0f64..10.0) {
        let p = LinearOperator::projector_onto(&v).unwrap();
        let prod = p.exp_projector_phase(g).unwrap().compose(&p.exp_projector_phase(-g).unwrap()).unwrap();
        let id = LinearOperator::identity(vec![4]).unwrap();
        prop_assert!(prod.max_abs_diff(&id).unwrap() < 1e-12);
    }

    #[test]
    fn unitary_preserves_norm(v in arb_state(4), s in arb_state(4), g in -10.0f64..10.0) {
        let u = LinearOperator::projector_onto(&v).unwrap().exp_projector_phase(g).unwrap();
        let out = u.apply(&s).unwrap();
        prop_assert!((out.norm() - 1.0).abs() < 1e-12);
    }
}
