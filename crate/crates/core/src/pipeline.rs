//! Protocol simulation through to reconstructed amplitudes.

use crate::error::{Error, Result};
use crate::protocol::{detect_plan, DetectionRecord, ProtocolConfig};
use crate::reconstruction::{
    definitional_modulars, measurement_plan, modular_exact_inversion_with, modular_first_order,
    reconstruct, s_parameter, EstimationMethod, InversionOptions, MeasurementPlan, ModularSet,
    ReconstructOptions, ReconstructionResult,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PipelineOptions {
    pub method: EstimationMethod,
    pub inversion: InversionOptions,
    pub reconstruct: ReconstructOptions,
}

impl PipelineOptions {
    pub fn new(method: EstimationMethod) -> Self {
        Self {
            method,
            inversion: InversionOptions::default(),
            reconstruct: ReconstructOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    /// Detector probabilities per setting; empty for the definitional method.
    pub records: Vec<DetectionRecord>,
    pub result: ReconstructionResult,
}

/// Turns detector probabilities into modular values.
pub fn modulars_from_records(
    records: &[DetectionRecord],
    epsilon: f64,
    method: EstimationMethod,
    inversion: InversionOptions,
) -> Result<ModularSet> {
    records
        .iter()
        .map(|r| {
            let estimate = match method {
                EstimationMethod::FirstOrder => modular_first_order(r.p1, r.p2, epsilon)?,
                EstimationMethod::ExactInversion => {
                    modular_exact_inversion_with(r.p1, r.p2, epsilon, inversion)?
                }
                EstimationMethod::Definitional => {
                    return Err(Error::InvalidConfig(
                        "the definitional method does not read detector data".into(),
                    ))
                }
            };
            Ok((r.observable, estimate.value))
        })
        .collect()
}

pub fn reconstruct_from_records(
    records: &[DetectionRecord],
    cfg: &ProtocolConfig,
    plan: &MeasurementPlan,
    options: PipelineOptions,
) -> Result<ReconstructionResult> {
    let modulars = modulars_from_records(records, cfg.epsilon, options.method, options.inversion)?;
    reconstruct(
        &modulars,
        plan,
        s_parameter(cfg.g),
        &cfg.postselection,
        options.reconstruct,
    )
}

pub fn plan_for(cfg: &ProtocolConfig) -> Result<MeasurementPlan> {
    let (m, n) = cfg.system_dims();
    measurement_plan(m, n)
}

/// Runs the noiseless pipeline with exact detector probabilities.
pub fn run_pipeline(cfg: &ProtocolConfig, options: PipelineOptions) -> Result<PipelineOutput> {
    cfg.validate()?;
    let plan = plan_for(cfg)?;
    match options.method {
        EstimationMethod::Definitional => {
            let modulars =
                definitional_modulars(&plan, cfg.g, &cfg.system_state, &cfg.postselection)?;
            let result = reconstruct(
                &modulars,
                &plan,
                s_parameter(cfg.g),
                &cfg.postselection,
                options.reconstruct,
            )?;
            Ok(PipelineOutput {
                records: Vec::new(),
                result,
            })
        }
        _ => {
            let records = detect_plan(cfg, &plan)?;
            let result = reconstruct_from_records(&records, cfg, &plan, options)?;
            Ok(PipelineOutput { records, result })
        }
    }
}
