//! Preparation, interaction, postselection and meter readout.
//!
//! The joint space is ordered `(meter_A, meter_B, system_A, system_B)`. Each
//! meter part is a qubit with `|↑> = |0>` and `|↓> = |1>`, so `|↑↓>` is meter
//! index 1 and `|↓↑>` is meter index 2.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hilbert::{ComplexValue, LinearOperator, PureState, ONE, TOLERANCES, ZERO};
use crate::reconstruction::{MeasurementPlan, Observable, DEFAULT_ORTHO_TOL};

pub const UP: usize = 0;
pub const DOWN: usize = 1;

const METER_DIMS: [usize; 2] = [2, 2];

/// Which controlled phases are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Interaction {
    /// `exp(-ig (P_↓^A P_j^A + P_↑^B P_l^B))`
    Joint,
    /// `exp(-ig P_↓^A P_j^A)`
    SideA,
    /// `exp(-ig P_↑^B P_l^B)`
    SideB,
}

impl Interaction {
    /// Interaction and indices that read out `observable`.
    pub fn for_observable(observable: Observable) -> (Interaction, usize, usize) {
        match observable {
            Observable::SingleA(j) => (Interaction::SideA, j, 0),
            Observable::SingleB(l) => (Interaction::SideB, 0, l),
            Observable::Pair(j, l) => (Interaction::Joint, j, l),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeterMode {
    /// One entangled meter `(|↑↓> + ε|↓↑>)/√(1+ε²)` for every run.
    #[default]
    Entangled,
    /// Factorized meters for the single-projector runs, read out locally.
    Product,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolConfig {
    pub system_state: PureState,
    pub postselection: PureState,
    pub epsilon: f64,
    pub g: f64,
    pub meter_mode: MeterMode,
    pub ortho_tol: f64,
}

impl ProtocolConfig {
    /// Coupling `g = π` (so `s = -2`), entangled meter, default orthogonality
    /// threshold.
    pub fn new(system_state: PureState, postselection: PureState, epsilon: f64) -> Result<Self> {
        let cfg = Self {
            system_state,
            postselection,
            epsilon,
            g: PI,
            meter_mode: MeterMode::Entangled,
            ortho_tol: DEFAULT_ORTHO_TOL,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_g(mut self, g: f64) -> Self {
        self.g = g;
        self
    }

    pub fn with_meter_mode(mut self, mode: MeterMode) -> Self {
        self.meter_mode = mode;
        self
    }

    pub fn with_ortho_tol(mut self, tol: f64) -> Self {
        self.ortho_tol = tol;
        self
    }

    pub fn system_dims(&self) -> (usize, usize) {
        let d = self.system_state.dims();
        (d[0], d[1])
    }

    pub fn validate(&self) -> Result<()> {
        let dims = self.system_state.dims();
        if dims.len() != 2 {
            return Err(Error::InvalidConfig(format!(
                "system state must be bipartite, got factor dims {dims:?}"
            )));
        }
        if self.postselection.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims.to_vec(),
                found: self.postselection.dims().to_vec(),
            });
        }
        for state in [&self.system_state, &self.postselection] {
            if !state.is_normalized() {
                return Err(Error::NotNormalized { norm: state.norm() });
            }
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !self.g.is_finite() || self.ortho_tol.is_nan() || self.ortho_tol < 0.0 {
            return Err(Error::InvalidConfig("g and ortho_tol must be finite".into()));
        }
        Ok(())
    }
}

/// Meter readout after one interaction and postselection.
#[derive(Debug, Clone, PartialEq)]
pub struct MeterOutcome {
    pub conditional_meter_state: PureState,
    pub postselection_probability: f64,
    /// Probability on `|1> = (|↑↓> + |↓↑>)/√2`.
    pub p1: f64,
    /// Probability on `|2> = (|↑↓> + i|↓↑>)/√2`.
    pub p2: f64,
    /// Probability on `(|↑> + |↓>)(|↑> + |↓>)/2`.
    pub p1_tilde: f64,
    /// Probability on `(|↑> + i|↓>)(|↑> + |↓>)/2`.
    pub p2_tilde: f64,
}

/// `(|↑↓> + ε|↓↑>)/√(1+ε²)`.
pub fn prepare_meter(epsilon: f64) -> PureState {
    let norm = (1.0 + epsilon * epsilon).sqrt();
    let mut amps = vec![ZERO; 4];
    amps[1] = Complex64::new(1.0 / norm, 0.0);
    amps[2] = Complex64::new(epsilon / norm, 0.0);
    PureState::new(METER_DIMS.to_vec(), amps).expect("fixed meter dims")
}

fn local_qubit(up: Complex64, down: Complex64) -> PureState {
    PureState::new(vec![2], vec![up, down]).expect("qubit")
}

/// Factorized meter used by the single-projector runs in product mode.
fn product_meter(kind: Interaction, epsilon: f64) -> Result<PureState> {
    let norm = (1.0 + epsilon * epsilon).sqrt();
    let biased = |major: usize| {
        let mut amps = [ZERO; 2];
        amps[major] = Complex64::new(1.0 / norm, 0.0);
        amps[1 - major] = Complex64::new(epsilon / norm, 0.0);
        local_qubit(amps[0], amps[1])
    };
    let up = local_qubit(ONE, ZERO);
    let down = local_qubit(ZERO, ONE);
    match kind {
        Interaction::SideA => biased(UP).tensor(&down),
        Interaction::SideB => up.tensor(&biased(DOWN)),
        Interaction::Joint => Err(Error::InvalidConfig(
            "the joint interaction needs the entangled meter".into(),
        )),
    }
}

fn controlled_projector(
    meter_factor: usize,
    meter_level: usize,
    system_index: usize,
    system_dims: (usize, usize),
) -> Result<LinearOperator> {
    let (m, n) = system_dims;
    let dims = [2, 2, m, n];
    let meter = LinearOperator::embed(&dims, meter_factor, &LinearOperator::projector(vec![2], meter_level)?)?;
    let sys_factor = 2 + meter_factor;
    let sys_dim = dims[sys_factor];
    let system = LinearOperator::embed(
        &dims,
        sys_factor,
        &LinearOperator::projector(vec![sys_dim], system_index)?,
    )?;
    meter.compose(&system)
}

/// Interaction unitary on `(meter_A, meter_B, system_A, system_B)`.
///
/// The single-sided kinds use the closed-form projector exponential; the
/// joint kind exponentiates the sum of both controlled projectors densely.
pub fn build_interaction(
    kind: Interaction,
    j: usize,
    l: usize,
    g: f64,
    system_dims: (usize, usize),
) -> Result<LinearOperator> {
    let (m, n) = system_dims;
    if j >= m {
        return Err(Error::IndexOutOfRange { index: j, bound: m });
    }
    if l >= n {
        return Err(Error::IndexOutOfRange { index: l, bound: n });
    }
    let side_a = || controlled_projector(0, DOWN, j, system_dims);
    let side_b = || controlled_projector(1, UP, l, system_dims);
    match kind {
        Interaction::SideA => side_a()?.exp_projector_phase(g),
        Interaction::SideB => side_b()?.exp_projector_phase(g),
        Interaction::Joint => Ok(side_a()?.add(&side_b()?)?.exp_phase(g)),
    }
}

fn probability_on(detector: &PureState, state: &PureState) -> Result<f64> {
    Ok(detector.inner(state)?.norm_sqr())
}

fn meter_detectors(mode: MeterMode, kind: Interaction) -> Result<(PureState, PureState)> {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let ih = Complex64::new(0.0, FRAC_1_SQRT_2);
    let mut d1 = vec![ZERO; 4];
    let mut d2 = vec![ZERO; 4];
    // (reference slot, signal slot) within the meter basis
    let (reference, signal) = match (mode, kind) {
        (MeterMode::Entangled, _) => (1, 2),
        (MeterMode::Product, Interaction::SideA) => (1, 3),
        (MeterMode::Product, Interaction::SideB) => (1, 0),
        (MeterMode::Product, Interaction::Joint) => {
            return Err(Error::InvalidConfig(
                "the joint interaction needs the entangled meter".into(),
            ))
        }
    };
    d1[reference] = h;
    d1[signal] = h;
    d2[reference] = h;
    d2[signal] = ih;
    Ok((
        PureState::new(METER_DIMS.to_vec(), d1)?,
        PureState::new(METER_DIMS.to_vec(), d2)?,
    ))
}

fn product_detectors() -> (PureState, PureState) {
    let half = |x: Complex64| x * 0.5;
    let plus = [ONE, ONE];
    let plus_i = [ONE, Complex64::new(0.0, 1.0)];
    let build = |a: [Complex64; 2]| {
        let amps = vec![
            half(a[UP] * plus[UP]),
            half(a[UP] * plus[DOWN]),
            half(a[DOWN] * plus[UP]),
            half(a[DOWN] * plus[DOWN]),
        ];
        PureState::new(METER_DIMS.to_vec(), amps).expect("fixed meter dims")
    };
    (build(plus), build(plus_i))
}

/// Runs one interaction and postselection and reads out the meter.
pub fn run_protocol(
    cfg: &ProtocolConfig,
    kind: Interaction,
    j: usize,
    l: usize,
) -> Result<MeterOutcome> {
    cfg.validate()?;
    let overlap = cfg.postselection.inner(&cfg.system_state)?;
    if overlap.norm() < cfg.ortho_tol {
        return Err(Error::OrthogonalPostselection {
            overlap: overlap.norm(),
        });
    }

    let meter = match cfg.meter_mode {
        MeterMode::Entangled => prepare_meter(cfg.epsilon),
        MeterMode::Product => product_meter(kind, cfg.epsilon)?,
    };
    let dims = cfg.system_dims();
    let joint = meter.tensor(&cfg.system_state)?;
    let evolved = build_interaction(kind, j, l, cfg.g, dims)?.apply(&joint)?;

    // Project the system onto <phi|, leaving an unnormalized meter state.
    let sys_dim = dims.0 * dims.1;
    let phi = cfg.postselection.amplitudes();
    let amps = evolved.amplitudes();
    let meter_amps: Vec<ComplexValue> = (0..4)
        .map(|k| {
            amps[k * sys_dim..(k + 1) * sys_dim]
                .iter()
                .zip(phi)
                .map(|(a, f)| f.conj() * a)
                .sum()
        })
        .collect();
    let unnormalized = PureState::new(METER_DIMS.to_vec(), meter_amps)?;
    let postselection_probability = unnormalized.norm().powi(2);
    if postselection_probability < cfg.ortho_tol * cfg.ortho_tol
        || postselection_probability <= TOLERANCES.algebraic * TOLERANCES.algebraic
    {
        return Err(Error::OrthogonalPostselection {
            overlap: postselection_probability.sqrt(),
        });
    }
    let conditional = unnormalized.normalize()?;

    let (d1, d2) = meter_detectors(cfg.meter_mode, kind)?;
    let (t1, t2) = product_detectors();
    Ok(MeterOutcome {
        p1: probability_on(&d1, &conditional)?,
        p2: probability_on(&d2, &conditional)?,
        p1_tilde: probability_on(&t1, &conditional)?,
        p2_tilde: probability_on(&t2, &conditional)?,
        conditional_meter_state: conditional,
        postselection_probability,
    })
}

/// Detector probabilities for one setting of the measurement plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionRecord {
    pub observable: Observable,
    pub p1: f64,
    pub p2: f64,
    /// Pairs behind the estimate; `None` for exact probabilities.
    pub pairs: Option<u64>,
}

/// Exact detector probabilities for every setting in `plan`, in plan order.
pub fn detect_plan(cfg: &ProtocolConfig, plan: &MeasurementPlan) -> Result<Vec<DetectionRecord>> {
    if plan.system_dims() != cfg.system_dims() {
        return Err(Error::DimensionMismatch {
            expected: cfg.system_state.dims().to_vec(),
            found: vec![plan.system_dims().0, plan.system_dims().1],
        });
    }
    plan.observables()
        .iter()
        .map(|&observable| {
            let (kind, j, l) = Interaction::for_observable(observable);
            let outcome = run_protocol(cfg, kind, j, l)?;
            Ok(DetectionRecord {
                observable,
                p1: outcome.p1,
                p2: outcome.p2,
                pairs: None,
            })
        })
        .collect()
}
