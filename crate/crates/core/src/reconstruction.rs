//! From detector probabilities to modular values, joint weak values, and
//! normalized amplitudes.
//!
//! A qubit meter coupled through `exp(-i g O)` to a pre- and postselected
//! system reads out the modular value `<phi|exp(-i g O)|psi> / <phi|psi>`.
//! For a projector this is `1 + s (P)_w` with `s = exp(-i g) - 1`, and for two
//! commuting local projectors the product weak value follows from three
//! modular values:
//!
//! ```text
//! (P_j^A P_l^B)_w = s^-2 [ (P_j^A + P_l^B)_m - (P_j^A)_m - (P_l^B)_m + 1 ]
//! ```
//!
//! Only local couplings are ever needed, which is what makes the scheme work
//! for spatially separated subsystems.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{ComplexValue, LinearOperator, PureState, ONE, TOLERANCES, ZERO};

/// Smallest `|<phi|psi>|` accepted before declaring the divergence regime.
pub const DEFAULT_ORTHO_TOL: f64 = 1e-6;

/// Relative size below which a reference amplitude counts as vanishing.
const ZERO_REFERENCE_REL: f64 = 1e-9;

/// `s = exp(-i g) - 1`.
pub fn s_parameter(g: f64) -> ComplexValue {
    Complex64::new(0.0, -g).exp() - ONE
}

/// A local projector, or a sum of one projector per side, on an `m x n` system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Observable {
    /// `P_j^A ⊗ I`
    SingleA(usize),
    /// `I ⊗ P_l^B`
    SingleB(usize),
    /// `P_j^A ⊗ I + I ⊗ P_l^B`
    Pair(usize, usize),
}

impl Observable {
    /// Dense operator on the `[m, n]` system.
    pub fn operator(&self, m: usize, n: usize) -> Result<LinearOperator> {
        let dims = [m, n];
        let side_a =
            |j| LinearOperator::embed(&dims, 0, &LinearOperator::projector(vec![m], j)?);
        let side_b =
            |l| LinearOperator::embed(&dims, 1, &LinearOperator::projector(vec![n], l)?);
        match *self {
            Observable::SingleA(j) => side_a(j),
            Observable::SingleB(l) => side_b(l),
            Observable::Pair(j, l) => side_a(j)?.add(&side_b(l)?),
        }
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::SingleA(j) => write!(f, "P_A[{j}]"),
            Observable::SingleB(l) => write!(f, "P_B[{l}]"),
            Observable::Pair(j, l) => write!(f, "P_A[{j}]+P_B[{l}]"),
        }
    }
}

/// The modular values needed to pin down an `m x n` pure state.
///
/// Index 0 on each side is the completed component: its projector is the
/// identity minus the others, so it never has to be measured.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementPlan {
    m: usize,
    n: usize,
    observables: Vec<Observable>,
}

impl MeasurementPlan {
    pub fn system_dims(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    pub fn observables(&self) -> &[Observable] {
        &self.observables
    }

    pub fn len(&self) -> usize {
        self.observables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observables.is_empty()
    }

    /// Real parameters delivered by the plan (real and imaginary part of
    /// each modular value).
    pub fn parameter_count(&self) -> usize {
        2 * self.observables.len()
    }
}

pub fn measurement_plan(m: usize, n: usize) -> Result<MeasurementPlan> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidConfig(format!(
            "measurement plan needs both sides of dimension >= 2, got {m}x{n}"
        )));
    }
    let mut observables = Vec::with_capacity((m - 1) + (n - 1) + (m - 1) * (n - 1));
    observables.extend((1..m).map(Observable::SingleA));
    observables.extend((1..n).map(Observable::SingleB));
    for j in 1..m {
        observables.extend((1..n).map(|l| Observable::Pair(j, l)));
    }
    Ok(MeasurementPlan { m, n, observables })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimationMethod {
    /// Linear readout, correct to first order in the meter asymmetry.
    FirstOrder,
    /// Closed-form inversion of the exact meter probabilities.
    ExactInversion,
    /// Computed from the states directly; no detector data involved.
    Definitional,
}

impl EstimationMethod {
    pub const ALL: [EstimationMethod; 3] = [
        EstimationMethod::Definitional,
        EstimationMethod::FirstOrder,
        EstimationMethod::ExactInversion,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EstimationMethod::FirstOrder => "first_order",
            EstimationMethod::ExactInversion => "exact_inversion",
            EstimationMethod::Definitional => "definitional",
        }
    }
}

impl fmt::Display for EstimationMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EstimationMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first_order" => Ok(EstimationMethod::FirstOrder),
            "exact_inversion" => Ok(EstimationMethod::ExactInversion),
            "definitional" => Ok(EstimationMethod::Definitional),
            other => Err(Error::InvalidConfig(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModularEstimate {
    pub value: ComplexValue,
    pub method: EstimationMethod,
    pub epsilon_used: f64,
}

fn postselection_overlap(psi: &PureState, phi: &PureState, tol: f64) -> Result<ComplexValue> {
    let overlap = phi.inner(psi)?;
    if overlap.norm() < tol {
        return Err(Error::OrthogonalPostselection {
            overlap: overlap.norm(),
        });
    }
    Ok(overlap)
}

/// `<phi|O|psi> / <phi|psi>`.
pub fn weak_definitional(
    observable: &LinearOperator,
    psi: &PureState,
    phi: &PureState,
) -> Result<ComplexValue> {
    let overlap = postselection_overlap(psi, phi, DEFAULT_ORTHO_TOL)?;
    Ok(observable.matrix_element(phi, psi)? / overlap)
}

/// `<phi|exp(-i g O)|psi> / <phi|psi>`, using a dense matrix exponential.
pub fn modular_definitional(
    observable: &LinearOperator,
    g: f64,
    psi: &PureState,
    phi: &PureState,
) -> Result<ComplexValue> {
    let overlap = postselection_overlap(psi, phi, DEFAULT_ORTHO_TOL)?;
    Ok(observable.exp_phase(g).matrix_element(phi, psi)? / overlap)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "meter asymmetry must be positive, got {epsilon}"
        )));
    }
    Ok(())
}

/// `M ≈ [(p1 - 1/2) + i (p2 - 1/2)] / ε`.
pub fn modular_first_order(p1: f64, p2: f64, epsilon: f64) -> Result<ModularEstimate> {
    check_epsilon(epsilon)?;
    Ok(ModularEstimate {
        value: Complex64::new((p1 - 0.5) / epsilon, (p2 - 0.5) / epsilon),
        method: EstimationMethod::FirstOrder,
        epsilon_used: epsilon,
    })
}

/// Which root of the inversion quadratic to report.
///
/// The meter probabilities are invariant under `M -> M D'/D` where `D, D'`
/// are the two roots, so they cannot tell `|εM| < 1` from `|εM| > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InversionBranch {
    /// Root continuous with `M = 0`; valid while `|εM| <= 1`.
    #[default]
    Near,
    /// Conjugate root; valid when `|εM| >= 1`.
    Far,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InversionOptions {
    pub branch: InversionBranch,
    /// Clamp a negative discriminant to zero instead of failing.
    pub clamp: bool,
}

pub fn modular_exact_inversion(p1: f64, p2: f64, epsilon: f64) -> Result<ModularEstimate> {
    modular_exact_inversion_with(p1, p2, epsilon, InversionOptions::default())
}

/// Inverts `p1 = |1 + εM|² / (2(1 + ε²|M|²))` and its `p2` analogue.
///
/// With `a = (2p1 - 1)/(2ε)`, `b = (2p2 - 1)/(2ε)` and `D = 1 + ε²|M|²`,
/// `M = (a + ib) D` where `ε²(a² + b²) D² - D + 1 = 0`.
pub fn modular_exact_inversion_with(
    p1: f64,
    p2: f64,
    epsilon: f64,
    options: InversionOptions,
) -> Result<ModularEstimate> {
    check_epsilon(epsilon)?;
    let a = (2.0 * p1 - 1.0) / (2.0 * epsilon);
    let b = (2.0 * p2 - 1.0) / (2.0 * epsilon);
    let q = epsilon * epsilon * (a * a + b * b);
    let mut discriminant = 1.0 - 4.0 * q;
    if discriminant < 0.0 {
        if !options.clamp {
            return Err(Error::NegativeDiscriminant { discriminant });
        }
        discriminant = 0.0;
    }
    let root = discriminant.sqrt();
    let d = match options.branch {
        // 2 / (1 + sqrt) avoids the 0/0 of the textbook form at q = 0.
        InversionBranch::Near => 2.0 / (1.0 + root),
        InversionBranch::Far if q > 0.0 => (1.0 + root) / (2.0 * q),
        InversionBranch::Far => return Err(Error::NegativeDiscriminant { discriminant }),
    };
    Ok(ModularEstimate {
        value: Complex64::new(a * d, b * d),
        method: EstimationMethod::ExactInversion,
        epsilon_used: epsilon,
    })
}

/// Joint weak value of `P_j^A P_l^B` from the three modular values.
pub fn weak_from_modulars(
    m_pair: ComplexValue,
    m_a: ComplexValue,
    m_b: ComplexValue,
    s: ComplexValue,
) -> ComplexValue {
    (m_pair - m_a - m_b + ONE) / (s * s)
}

/// Weak value of a single projector: `(P)_w = ((P)_m - 1) / s`.
pub fn weak_from_single_modular(m: ComplexValue, s: ComplexValue) -> ComplexValue {
    (m - ONE) / s
}

/// Modular value of `c I + O` given that of `O`.
///
/// The shift factor is `exp(-i g c) = (1 + s)^c`. Non-integer `c` uses the
/// principal branch.
pub fn shift_modular(m: ComplexValue, c: f64, s: ComplexValue) -> ComplexValue {
    let phase = ONE + s;
    if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 {
        m * phase.powi(c as i32)
    } else {
        m * phase.powf(c)
    }
}

/// Modular values keyed by the observable they belong to.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModularSet(BTreeMap<Observable, ComplexValue>);

impl ModularSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, observable: Observable, value: ComplexValue) {
        self.0.insert(observable, value);
    }

    pub fn get(&self, observable: &Observable) -> Option<ComplexValue> {
        self.0.get(observable).copied()
    }

    fn require(&self, observable: Observable) -> Result<ComplexValue> {
        self.get(&observable).ok_or(Error::IncompletePlan(observable))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Observable, &ComplexValue)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(Observable, ComplexValue)> for ModularSet {
    fn from_iter<I: IntoIterator<Item = (Observable, ComplexValue)>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Modular values of every observable in `plan`, straight from the states.
pub fn definitional_modulars(
    plan: &MeasurementPlan,
    g: f64,
    psi: &PureState,
    phi: &PureState,
) -> Result<ModularSet> {
    let (m, n) = plan.system_dims();
    plan.observables()
        .iter()
        .map(|obs| Ok((*obs, modular_definitional(&obs.operator(m, n)?, g, psi, phi)?)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReconstructOptions {
    /// Component whose amplitude is made real and positive.
    pub reference: (usize, usize),
    /// Fall back to the largest component when the reference vanishes.
    pub fallback: bool,
}

impl Default for ReconstructOptions {
    fn default() -> Self {
        Self {
            reference: (0, 0),
            fallback: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionResult {
    dims: (usize, usize),
    amplitudes: Vec<ComplexValue>,
    weak_values: Vec<ComplexValue>,
    pub modulars: ModularSet,
    pub normalizer: f64,
    pub reference: (usize, usize),
}

impl ReconstructionResult {
    pub fn system_dims(&self) -> (usize, usize) {
        self.dims
    }

    pub fn amplitude(&self, j: usize, l: usize) -> ComplexValue {
        self.amplitudes[j * self.dims.1 + l]
    }

    pub fn weak_value(&self, j: usize, l: usize) -> ComplexValue {
        self.weak_values[j * self.dims.1 + l]
    }

    /// Row-major `m x n` amplitudes.
    pub fn amplitudes(&self) -> &[ComplexValue] {
        &self.amplitudes
    }

    /// Row-major joint weak values `(P_j^A P_l^B)_w`.
    pub fn weak_values(&self) -> &[ComplexValue] {
        &self.weak_values
    }

    pub fn to_state(&self) -> PureState {
        PureState::new(vec![self.dims.0, self.dims.1], self.amplitudes.clone())
            .expect("dims validated at construction")
    }
}

/// Rebuilds the full `m x n` joint weak-value table from a complete plan.
///
/// Entries with an index 0 are completed through `P_0 = I - Σ_{k>0} P_k` on
/// that side, which is linear in the weak value.
fn weak_value_table(
    modulars: &ModularSet,
    plan: &MeasurementPlan,
    s: ComplexValue,
) -> Result<Vec<ComplexValue>> {
    let (m, n) = plan.system_dims();
    let mut single_a = vec![ZERO; m];
    let mut single_b = vec![ZERO; n];
    for (j, slot) in single_a.iter_mut().enumerate().skip(1) {
        *slot = weak_from_single_modular(modulars.require(Observable::SingleA(j))?, s);
    }
    for (l, slot) in single_b.iter_mut().enumerate().skip(1) {
        *slot = weak_from_single_modular(modulars.require(Observable::SingleB(l))?, s);
    }

    let mut table = vec![ZERO; m * n];
    for j in 1..m {
        let m_a = modulars.require(Observable::SingleA(j))?;
        for l in 1..n {
            let m_b = modulars.require(Observable::SingleB(l))?;
            let m_pair = modulars.require(Observable::Pair(j, l))?;
            table[j * n + l] = weak_from_modulars(m_pair, m_a, m_b, s);
        }
    }
    for j in 1..m {
        let row: ComplexValue = (1..n).map(|l| table[j * n + l]).sum();
        table[j * n] = single_a[j] - row;
    }
    for l in 1..n {
        let col: ComplexValue = (1..m).map(|j| table[j * n + l]).sum();
        table[l] = single_b[l] - col;
    }
    let inner: ComplexValue = (1..m)
        .flat_map(|j| (1..n).map(move |l| (j, l)))
        .map(|(j, l)| table[j * n + l])
        .sum();
    table[0] = ONE - single_a.iter().sum::<ComplexValue>() - single_b.iter().sum::<ComplexValue>()
        + inner;
    Ok(table)
}

/// Reconstructs the normalized amplitude matrix from a complete set of
/// modular values.
///
/// `Ψ_{j,l} ∝ (P_j^A P_l^B)_w / conj(φ_{j,l})`; for the uniform
/// postselection the divisor is a common constant. The reference amplitude
/// is real and positive and the result has unit norm.
pub fn reconstruct(
    modulars: &ModularSet,
    plan: &MeasurementPlan,
    s: ComplexValue,
    postselection: &PureState,
    options: ReconstructOptions,
) -> Result<ReconstructionResult> {
    let (m, n) = plan.system_dims();
    if postselection.dims() != [m, n] {
        return Err(Error::DimensionMismatch {
            expected: vec![m, n],
            found: postselection.dims().to_vec(),
        });
    }
    if s.norm() < TOLERANCES.structural {
        return Err(Error::InvalidConfig("s = exp(-ig) - 1 vanishes".into()));
    }
    let (rj, rl) = options.reference;
    if rj >= m || rl >= n {
        return Err(Error::IndexOutOfRange {
            index: rj.max(rl),
            bound: if rj >= m { m } else { n },
        });
    }

    let weak_values = weak_value_table(modulars, plan, s)?;
    let raw: Vec<ComplexValue> = weak_values
        .iter()
        .zip(postselection.amplitudes())
        .enumerate()
        .map(|(idx, (w, f))| {
            if f.norm() < TOLERANCES.structural {
                Err(Error::VanishingPostselectionComponent {
                    j: idx / n,
                    l: idx % n,
                })
            } else {
                Ok(w / f.conj())
            }
        })
        .collect::<Result<_>>()?;

    let largest = raw
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
        .map(|(i, a)| (i, a.norm()))
        .unwrap_or((0, 0.0));
    if !(largest.1 > 0.0 && largest.1.is_finite()) {
        return Err(Error::ZeroReferenceWeakValue);
    }
    let mut reference = options.reference;
    if raw[rj * n + rl].norm() <= ZERO_REFERENCE_REL * largest.1 {
        if !options.fallback {
            return Err(Error::ZeroReferenceWeakValue);
        }
        reference = (largest.0 / n, largest.0 % n);
    }

    let pivot = raw[reference.0 * n + reference.1];
    let ratios: Vec<ComplexValue> = raw.iter().map(|a| a / pivot).collect();
    let normalizer = ratios.iter().map(|r| r.norm_sqr()).sum::<f64>().sqrt();
    let amplitudes = ratios.iter().map(|r| r / normalizer).collect();

    Ok(ReconstructionResult {
        dims: (m, n),
        amplitudes,
        weak_values,
        modulars: modulars.clone(),
        normalizer,
        reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell() -> PureState {
        PureState::from_real(vec![2, 2], &[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]).unwrap()
    }

    fn plus_plus() -> PureState {
        PureState::from_real(vec![2, 2], &[0.5; 4]).unwrap()
    }

    #[test]
    fn plan_sizes() {
        let plan = measurement_plan(2, 2).unwrap();
        assert_eq!(
            plan.observables(),
            &[
                Observable::SingleA(1),
                Observable::SingleB(1),
                Observable::Pair(1, 1)
            ]
        );
        assert_eq!(plan.parameter_count(), 6);
        let plan = measurement_plan(3, 2).unwrap();
        assert_eq!((plan.len(), plan.parameter_count()), (5, 10));
        let plan = measurement_plan(4, 4).unwrap();
        assert_eq!((plan.len(), plan.parameter_count()), (15, 30));
        assert!(measurement_plan(1, 4).is_err());
    }

    #[test]
    fn definitional_modular_examples() {
        let pa = Observable::SingleA(1).operator(2, 2).unwrap();
        let m = modular_definitional(&pa, PI, &bell(), &plus_plus()).unwrap();
        assert!(m.norm() < 1e-12);

        let pair = Observable::Pair(1, 1).operator(2, 2).unwrap();
        let m = modular_definitional(&pair, PI, &bell(), &plus_plus()).unwrap();
        assert!((m - ONE).norm() < 1e-12);

        let zero = LinearOperator::zeros(vec![2, 2]).unwrap();
        let m = modular_definitional(&zero, 0.7, &bell(), &plus_plus()).unwrap();
        assert!((m - ONE).norm() < 1e-15);
    }

    #[test]
    fn definitional_rejects_orthogonal_postselection() {
        let psi = PureState::from_real(vec![2, 2], &[FRAC_1_SQRT_2, 0.0, 0.0, -FRAC_1_SQRT_2])
            .unwrap();
        let pa = Observable::SingleA(1).operator(2, 2).unwrap();
        assert!(matches!(
            modular_definitional(&pa, PI, &psi, &plus_plus()),
            Err(Error::OrthogonalPostselection { .. })
        ));
        assert!(matches!(
            weak_definitional(&pa, &psi, &plus_plus()),
            Err(Error::OrthogonalPostselection { .. })
        ));
    }

    #[test]
    fn joint_weak_value_of_phase_bell_state() {
        let pvv = LinearOperator::projector(vec![2, 2], 3).unwrap();
        for theta in [-2.5, -1.0, 0.0, 0.3, PI / 2.0, 2.9] {
            let e = c(0.0, theta).exp();
            let psi = PureState::new(
                vec![2, 2],
                vec![c(FRAC_1_SQRT_2, 0.0), ZERO, ZERO, e * FRAC_1_SQRT_2],
            )
            .unwrap();
            let w = weak_definitional(&pvv, &psi, &plus_plus()).unwrap();
            assert!((w - e / (ONE + e)).norm() < 1e-12, "theta={theta}");
        }
        let e = c(0.0, PI / 2.0).exp();
        let psi =
            PureState::new(vec![2, 2], vec![c(FRAC_1_SQRT_2, 0.0), ZERO, ZERO, e * FRAC_1_SQRT_2])
                .unwrap();
        let w = weak_definitional(&pvv, &psi, &plus_plus()).unwrap();
        assert!((w - c(0.5, 0.5)).norm() < 1e-12);
    }

    #[test]
    fn joint_weak_value_of_asymmetric_state() {
        let k = FRAC_1_SQRT_2;
        let psi = PureState::new(
            vec![2, 2],
            vec![c(0.8 * k, 0.0), c(0.0, -0.6 * k), c(-0.8 * k, 0.0), c(0.0, -0.6 * k)],
        )
        .unwrap();
        let pvv = LinearOperator::projector(vec![2, 2], 3).unwrap();
        let w = weak_definitional(&pvv, &psi, &plus_plus()).unwrap();
        assert!((w - c(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn first_order_examples() {
        assert_eq!(modular_first_order(0.5, 0.5, 0.3).unwrap().value, ZERO);
        let m = modular_first_order(9.0 / 13.0, 0.5, 0.2).unwrap().value;
        assert!((m - c(0.961_538_461_538_461_5, 0.0)).norm() < 1e-12);
        let m = modular_first_order(0.7, 0.5, 0.2).unwrap().value;
        assert!((m - ONE).norm() < 1e-12);
        assert!(modular_first_order(0.7, 0.5, 0.0).is_err());
    }

    #[test]
    fn exact_inversion_examples() {
        let m = modular_exact_inversion(9.0 / 13.0, 0.5, 0.2).unwrap();
        assert_eq!(m.method, EstimationMethod::ExactInversion);
        assert!((m.value - ONE).norm() < 1e-12);
        assert_eq!(modular_exact_inversion(0.5, 0.5, 0.2).unwrap().value, ZERO);
    }

    #[test]
    fn exact_inversion_negative_discriminant() {
        // p1 = 1 lies outside the reachable set for ε = 0.2.
        let err = modular_exact_inversion(1.0, 0.5, 0.2).unwrap_err();
        assert!(matches!(err, Error::NegativeDiscriminant { .. }));
        let clamped = modular_exact_inversion_with(
            1.0,
            0.5,
            0.2,
            InversionOptions {
                clamp: true,
                ..Default::default()
            },
        )
        .unwrap();
        // At the boundary D = 2 and |εM| = 1.
        assert!((clamped.value.norm() * 0.2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn far_branch_recovers_large_modular_values() {
        let eps = 0.2;
        let truth = c(0.0, -14.0);
        let d = 1.0 + eps * eps * truth.norm_sqr();
        let p1 = (ONE + truth * eps).norm_sqr() / (2.0 * d);
        let p2 = (ONE - c(0.0, 1.0) * truth * eps).norm_sqr() / (2.0 * d);
        let near = modular_exact_inversion(p1, p2, eps).unwrap().value;
        assert!((near - truth).norm() > 1.0);
        let far = modular_exact_inversion_with(
            p1,
            p2,
            eps,
            InversionOptions {
                branch: InversionBranch::Far,
                clamp: false,
            },
        )
        .unwrap()
        .value;
        assert!((far - truth).norm() < 1e-9);
    }

    #[test]
    fn weak_from_modulars_examples() {
        let w = weak_from_modulars(ONE, ZERO, ZERO, c(-2.0, 0.0));
        assert!((w - c(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(weak_from_modulars(ONE, ONE, ONE, c(-2.0, 0.0)), ZERO);
    }

    #[test]
    fn shift_modular_examples() {
        let m = c(0.3, -1.2);
        let s = s_parameter(PI);
        assert_eq!(shift_modular(m, 0.0, s), m);
        // exp(-iπ) = -1
        assert!((shift_modular(m, 1.0, s) + m).norm() < 1e-15);
        let s = s_parameter(0.4);
        let expected = m * c(0.0, -0.4 * 2.5).exp();
        assert!((shift_modular(m, 2.5, s) - expected).norm() < 1e-12);
    }

    #[test]
    fn s_parameter_at_pi() {
        assert!((s_parameter(PI) - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn reconstruct_phase_bell_from_definitional_modulars() {
        let plan = measurement_plan(2, 2).unwrap();
        for theta in [-2.0, 0.0, 1.0, 2.5] {
            let e = c(0.0, theta).exp();
            let psi = PureState::new(
                vec![2, 2],
                vec![c(FRAC_1_SQRT_2, 0.0), ZERO, ZERO, e * FRAC_1_SQRT_2],
            )
            .unwrap();
            let mods = definitional_modulars(&plan, PI, &psi, &plus_plus()).unwrap();
            let r = reconstruct(&mods, &plan, s_parameter(PI), &plus_plus(), Default::default())
                .unwrap();
            assert!((r.amplitude(1, 1) - e * FRAC_1_SQRT_2).norm() < 1e-10);
            assert!((r.amplitude(0, 0) - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-10);
            assert!(r.amplitude(0, 1).norm() < 1e-10);
            assert!(r.amplitude(1, 0).norm() < 1e-10);
            assert!((r.normalizer - 2f64.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn reconstruct_reports_incomplete_plan() {
        let plan = measurement_plan(2, 2).unwrap();
        let mut mods = ModularSet::new();
        mods.insert(Observable::SingleA(1), ONE);
        mods.insert(Observable::SingleB(1), ONE);
        let err = reconstruct(&mods, &plan, c(-2.0, 0.0), &plus_plus(), Default::default())
            .unwrap_err();
        assert_eq!(err, Error::IncompletePlan(Observable::Pair(1, 1)));
    }

    #[test]
    fn reconstruct_falls_back_when_reference_vanishes() {
        // |HV> + |VV>: the HH component is zero.
        let psi = PureState::from_real(vec![2, 2], &[0.0, FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2])
            .unwrap();
        let plan = measurement_plan(2, 2).unwrap();
        let mods = definitional_modulars(&plan, PI, &psi, &plus_plus()).unwrap();
        let strict = ReconstructOptions {
            fallback: false,
            ..Default::default()
        };
        assert_eq!(
            reconstruct(&mods, &plan, s_parameter(PI), &plus_plus(), strict).unwrap_err(),
            Error::ZeroReferenceWeakValue
        );
        let r = reconstruct(&mods, &plan, s_parameter(PI), &plus_plus(), Default::default())
            .unwrap();
        assert_ne!(r.reference, (0, 0));
        let f = r.to_state().inner(&psi).unwrap().norm_sqr();
        assert!((f - 1.0).abs() < 1e-10);
    }
}
