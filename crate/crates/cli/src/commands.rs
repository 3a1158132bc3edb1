use directwf::pipeline::{run_pipeline, PipelineOptions};
use directwf::presets;
use directwf::protocol::ProtocolConfig;
use directwf::reconstruction::{EstimationMethod, Observable, ReconstructionResult};
use directwf::shot_noise::{monte_carlo, trial_rng, NoisyEstimate};
use directwf::tomography::{
    fidelity_pure, fidelity_states, linear_inversion, pauli_expectations, sample_expectations,
    DensityMatrix,
};
use directwf::{ComplexValue, Error, PureState};
use rayon::prelude::*;

use crate::config::{RunConfig, SweepSpec};
use crate::error::CliError;
use crate::output::{Cell, Meta, Table};

/// Offsets the tomography streams from the direct-measurement streams.
const TOMOGRAPHY_SEED_SALT: u64 = 0x9E37_79B9_7F4A_7C15;

/// A command's table together with warnings raised while configuring it.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub table: Table,
    pub warnings: Vec<String>,
}

fn component_label(j: usize, l: usize, dims: (usize, usize)) -> String {
    if dims == (2, 2) {
        let pol = |i| if i == 0 { 'H' } else { 'V' };
        format!("{}{}", pol(j), pol(l))
    } else {
        format!("{j},{l}")
    }
}

fn pipeline_options(cfg: &RunConfig) -> PipelineOptions {
    let mut options = PipelineOptions::new(cfg.estimation_method());
    options.reconstruct = cfg.reconstruct_options();
    options
}

fn exact_row(kind: &str, key: String, v: ComplexValue) -> Vec<Cell> {
    vec![kind.into(), key.into(), v.re.into(), v.im.into()]
}

fn noisy_row(kind: &str, key: String, v: &NoisyEstimate<ComplexValue>) -> Vec<Cell> {
    vec![
        kind.into(),
        key.into(),
        v.mean.re.into(),
        v.mean.im.into(),
        v.std.re.into(),
        v.std.im.into(),
    ]
}

/// Amplitudes, weak values, modular values and the normalizer, one row each.
pub fn cmd_reconstruct(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let loaded = cfg.protocol()?;
    let protocol = loaded.value;
    let dims = protocol.system_dims();
    let options = pipeline_options(cfg);
    let counting = cfg.counting()?;

    let columns: &[&str] = if counting.is_some() {
        &["kind", "key", "re", "im", "re_std", "im_std"]
    } else {
        &["kind", "key", "re", "im"]
    };
    let mut table = Table::new("reconstruct", columns);
    table.push_meta("method", Meta::Text(options.method.name().into()));
    table.push_meta("epsilon", Meta::Float(protocol.epsilon));
    table.push_meta("g", Meta::Float(protocol.g));

    match counting {
        None => {
            let result = run_pipeline(&protocol, options)?.result;
            table.push_meta(
                "reference",
                Meta::Text(component_label(result.reference.0, result.reference.1, dims)),
            );
            for j in 0..dims.0 {
                for l in 0..dims.1 {
                    let key = component_label(j, l, dims);
                    table.push_row(exact_row("amplitude", key, result.amplitude(j, l)));
                }
            }
            for j in 0..dims.0 {
                for l in 0..dims.1 {
                    let key = component_label(j, l, dims);
                    table.push_row(exact_row("weak_value", key, result.weak_value(j, l)));
                }
            }
            for (obs, m) in result.modulars.iter() {
                table.push_row(exact_row("modular", obs.label(), *m));
            }
            table.push_row(exact_row(
                "normalizer",
                "N".into(),
                ComplexValue::new(result.normalizer, 0.0),
            ));
        }
        Some((counting, policy)) => {
            let report = monte_carlo(&protocol, options, counting, policy)?;
            table.push_meta("pairs_per_setting", Meta::Int(cfg.noise.unwrap().pairs_per_setting as i64));
            table.push_meta("seed", Meta::Text(counting.seed.to_string()));
            table.push_meta("trials", Meta::Int(counting.trials as i64));
            table.push_meta("samples_kept", Meta::Int(report.samples_kept() as i64));
            table.push_meta("samples_rejected", Meta::Int(report.samples_rejected() as i64));
            for (idx, est) in report.amplitudes.iter().enumerate() {
                let key = component_label(idx / dims.1, idx % dims.1, dims);
                table.push_row(noisy_row("amplitude", key, est));
            }
            for (idx, est) in report.weak_values.iter().enumerate() {
                let key = component_label(idx / dims.1, idx % dims.1, dims);
                table.push_row(noisy_row("weak_value", key, est));
            }
            for (obs, est) in &report.modulars {
                table.push_row(noisy_row("modular", obs.label(), est));
            }
            let n = &report.normalizer;
            table.push_row(vec![
                "normalizer".into(),
                "N".into(),
                n.mean.into(),
                0.0.into(),
                n.std.into(),
                0.0.into(),
            ]);
        }
    }
    Ok(CommandOutput {
        table,
        warnings: loaded.warnings,
    })
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::OrthogonalPostselection { .. } => "orthogonal_postselection",
        Error::NegativeDiscriminant { .. } => "inversion_failure",
        Error::ZeroReferenceWeakValue => "zero_reference_weak_value",
        _ => "error",
    }
}

fn sweep_row(theta: f64, method: EstimationMethod, outcome: &Result<ReconstructionResult, Error>) -> Vec<Cell> {
    let mut row: Vec<Cell> = vec![theta.into(), method.name().into()];
    match outcome {
        Ok(r) => {
            row.push("ok".into());
            for obs in [Observable::SingleA(1), Observable::SingleB(1), Observable::Pair(1, 1)] {
                let m = r.modulars.get(&obs).expect("complete plan");
                row.push(m.re.into());
                row.push(m.im.into());
            }
            let vv = r.amplitude(1, 1);
            row.push(vv.re.into());
            row.push(vv.im.into());
        }
        Err(e) => {
            row.push(status_of(e).into());
            row.extend(std::iter::repeat_n(Cell::Empty, 8));
        }
    }
    row
}

/// Phase-Bell sweep: modular values and `Ψ_VV` per θ and method.
///
/// Rows are ordered by θ, then by method (`definitional`, `first_order`,
/// `exact_inversion`).
pub fn cmd_sweep_theta(cfg: &RunConfig, sweep: SweepSpec) -> Result<CommandOutput, CliError> {
    if sweep.steps < 2 {
        return Err(CliError::config(format!(
            "field `sweep.steps`: need at least 2 steps, got {}",
            sweep.steps
        )));
    }
    if !(sweep.theta_min.is_finite() && sweep.theta_max.is_finite()) {
        return Err(CliError::config("field `sweep`: theta bounds must be finite"));
    }
    // Validates epsilon, g and the postselection once up front.
    let base = cfg.protocol_for(presets::phase_bell(sweep.theta_min))?;
    let warnings = base.warnings;
    let template = base.value;

    let thetas: Vec<f64> = (0..sweep.steps)
        .map(|k| {
            sweep.theta_min
                + (sweep.theta_max - sweep.theta_min) * k as f64 / (sweep.steps - 1) as f64
        })
        .collect();
    let rows: Vec<Vec<Vec<Cell>>> = thetas
        .par_iter()
        .map(|&theta| {
            let protocol = ProtocolConfig {
                system_state: presets::phase_bell(theta),
                ..template.clone()
            };
            EstimationMethod::ALL
                .iter()
                .map(|&method| {
                    let mut options = PipelineOptions::new(method);
                    options.reconstruct = cfg.reconstruct_options();
                    let outcome = run_pipeline(&protocol, options).map(|o| o.result);
                    sweep_row(theta, method, &outcome)
                })
                .collect()
        })
        .collect();

    let mut table = Table::new(
        "sweep-theta",
        &[
            "theta", "method", "status", "m_a_re", "m_a_im", "m_b_re", "m_b_im", "m_pair_re",
            "m_pair_im", "psi_vv_re", "psi_vv_im",
        ],
    );
    table.push_meta("epsilon", Meta::Float(template.epsilon));
    table.push_meta("g", Meta::Float(template.g));
    table.push_meta("steps", Meta::Int(sweep.steps as i64));
    for row in rows.into_iter().flatten() {
        table.push_row(row);
    }
    Ok(CommandOutput { table, warnings })
}

fn require_two_qubits(state: &PureState) -> Result<(), CliError> {
    if state.dims() != [2, 2] {
        return Err(CliError::Core(Error::DimensionMismatch {
            expected: vec![2, 2],
            found: state.dims().to_vec(),
        }));
    }
    Ok(())
}

fn density_table(command: &str, rho: &DensityMatrix) -> Table {
    let mut table = Table::new(command, &["row", "col", "re", "im"]);
    let mut re = Vec::with_capacity(16);
    let mut im = Vec::with_capacity(16);
    for r in 0..4 {
        for c in 0..4 {
            let x = rho.entry(r, c);
            table.push_row(vec![r.into(), c.into(), x.re.into(), x.im.into()]);
            re.push(x.re);
            im.push(x.im);
        }
    }
    table.push_meta("density_re", Meta::Floats(re));
    table.push_meta("density_im", Meta::Floats(im));
    table.push_meta("positive", Meta::Bool(rho.is_positive()));
    table.push_meta("min_eigenvalue", Meta::Float(rho.min_eigenvalue()));
    table
}

/// Linear-inversion tomography of the configured two-qubit state.
///
/// With noise configured, one realization (trial 0 of the seed) is sampled.
pub fn cmd_tomography(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let loaded = cfg.system_state()?;
    let psi = loaded.value;
    require_two_qubits(&psi)?;
    let exact = pauli_expectations(&psi)?;
    let expectations = match cfg.counting()? {
        None => exact,
        Some((counting, _)) => {
            let pairs = cfg.noise.unwrap().pairs_per_setting;
            let mut rng = trial_rng(counting.seed.wrapping_add(TOMOGRAPHY_SEED_SALT), 0);
            sample_expectations(&exact, pairs, &mut rng)
        }
    };
    let rho = linear_inversion(&expectations)?;
    let mut table = density_table("tomography", &rho);
    table.push_meta("settings", Meta::Int(16));
    table.push_meta("fidelity_to_truth", Meta::Float(fidelity_pure(&rho, &psi)?.value));
    Ok(CommandOutput {
        table,
        warnings: loaded.warnings,
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Fidelities between direct reconstruction, tomography and the true state.
pub fn cmd_compare(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let loaded = cfg.protocol()?;
    let protocol = loaded.value;
    let psi = protocol.system_state.clone();
    require_two_qubits(&psi)?;
    let options = pipeline_options(cfg);
    let exact_expectations = pauli_expectations(&psi)?;

    let mut table = Table::new(
        "compare",
        &[
            "trial",
            "status",
            "direct_vs_truth",
            "tomography_vs_truth",
            "direct_vs_tomography",
        ],
    );
    table.push_meta("method", Meta::Text(options.method.name().into()));

    let fidelity_row = |trial: usize, direct: &PureState, rho: &DensityMatrix| -> Result<Vec<Cell>, CliError> {
        Ok(vec![
            trial.into(),
            "ok".into(),
            fidelity_states(direct, &psi)?.into(),
            fidelity_pure(rho, &psi)?.value.into(),
            fidelity_pure(rho, direct)?.value.into(),
        ])
    };

    match cfg.counting()? {
        None => {
            let direct = run_pipeline(&protocol, options)?.result.to_state();
            let rho = linear_inversion(&exact_expectations)?;
            table.push_row(fidelity_row(0, &direct, &rho)?);
        }
        Some((counting, policy)) => {
            let pairs = cfg.noise.unwrap().pairs_per_setting;
            let report = monte_carlo(&protocol, options, counting, policy)?;
            let mut accepted = report.samples.iter();
            let rejected: std::collections::BTreeMap<usize, &Error> =
                report.rejections.iter().map(|(t, e)| (*t, e)).collect();
            let tomography_seed = counting.seed.wrapping_add(TOMOGRAPHY_SEED_SALT);
            for trial in 0..counting.trials {
                if let Some(e) = rejected.get(&trial) {
                    let mut row: Vec<Cell> = vec![trial.into(), status_of(e).into()];
                    row.extend(std::iter::repeat_n(Cell::Empty, 3));
                    table.push_row(row);
                    continue;
                }
                let direct = accepted.next().expect("one sample per accepted trial").to_state();
                let mut rng = trial_rng(tomography_seed, trial as u64);
                let rho = linear_inversion(&sample_expectations(&exact_expectations, pairs, &mut rng))?;
                table.push_row(fidelity_row(trial, &direct, &rho)?);
            }
            table.push_meta("pairs_per_setting", Meta::Int(pairs as i64));
            table.push_meta("seed", Meta::Text(counting.seed.to_string()));
            table.push_meta("samples_rejected", Meta::Int(report.samples_rejected() as i64));
        }
    }

    for column in ["direct_vs_truth", "tomography_vs_truth", "direct_vs_tomography"] {
        let idx = table.column(column).expect("known column");
        let mut values: Vec<f64> = table.rows.iter().filter_map(|r| r[idx].as_f64()).collect();
        if !values.is_empty() {
            table.push_meta(&format!("median_{column}"), Meta::Float(median(&mut values)));
        }
    }
    Ok(CommandOutput {
        table,
        warnings: loaded.warnings,
    })
}
