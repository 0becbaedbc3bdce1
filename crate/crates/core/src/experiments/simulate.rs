use crate::config::ExperimentSpec;
use crate::error::Result;
use crate::evolution::evolve_recorded;
use crate::record::RunRecord;

use super::{coefficients, initial_state, log_schedule, spec_grid, stepper_config};

/// Plain run of the configured data; the record carries the time series.
pub fn run_simulate(spec: &ExperimentSpec) -> Result<RunRecord> {
    let grid = spec_grid(spec)?;
    let (coeffs, params) = coefficients(spec)?;
    let s0 = initial_state(spec, &grid, &coeffs)?;
    let (mut rec, out) = evolve_recorded(
        &s0,
        &coeffs,
        &stepper_config(spec),
        params,
        spec.experiment.s_list.clone(),
        spec.experiment.psi_s,
    )?;
    log_schedule(&mut rec, &s0, spec.experiment.schedule_eps);
    rec.set("max_phase_step", out.max_phase_step);
    rec.set("max_psi_imag", out.max_psi_imag);
    for i in 1..=4 {
        rec.set(&format!("drift_q{i}"), rec.relative_drift(i));
    }
    Ok(rec)
}
