use crate::config::ExperimentSpec;
use crate::error::{Result, ZrError};
use crate::evolution::evolve_recorded;
use crate::record::{RunRecord, Verdict};

use super::{coefficients, initial_state, log_schedule, spec_grid, stepper_config};

pub const Q1_TOL: f64 = 1e-10;
pub const Q4_TOL: f64 = 1e-6;
pub const RATIO_BAND: (f64, f64) = (3.5, 4.5);

/// Conserved-quantity audit. With `refine`, a companion run at `dt/2`
/// measures the order of the energy drift.
pub fn run_conserve(spec: &ExperimentSpec) -> Result<RunRecord> {
    let grid = spec_grid(spec)?;
    let (coeffs, params) = coefficients(spec)?;
    let s0 = initial_state(spec, &grid, &coeffs)?;
    let cfg = stepper_config(spec);
    let run = |dt: f64| {
        let mut c = cfg.clone();
        c.dt = dt;
        evolve_recorded(&s0, &coeffs, &c, params, vec![1.0], 0.0)
    };
    let (mut rec, out) = match run(cfg.dt) {
        Ok(r) => r,
        Err(ZrError::BlowUp { time }) => {
            let mut rec = RunRecord::new(vec![1.0], 0.0);
            rec.verdict = Verdict::Fail(format!("blow-up at t = {time}"));
            return Ok(rec);
        }
        Err(e) => return Err(e),
    };
    log_schedule(&mut rec, &s0, spec.experiment.schedule_eps);
    rec.set("max_psi_imag", out.max_psi_imag);
    let d1 = rec.relative_drift(1);
    rec.set("drift_q1", d1);
    let mut verdict = if d1 < Q1_TOL {
        Verdict::Pass
    } else {
        Verdict::Fail(format!("Q1 drift {d1:.3e} >= {Q1_TOL:e}"))
    };
    if params.is_none() {
        rec.note("normalized preset: Q2-Q4 are not defined, only Q1 is audited");
        rec.verdict = verdict;
        return Ok(rec);
    }
    for i in 2..=4 {
        rec.set(&format!("drift_q{i}"), rec.relative_drift(i));
    }
    let d4 = rec.relative_drift(4);
    if d4 >= Q4_TOL {
        verdict = verdict.and(Verdict::Fail(format!("Q4 drift {d4:.3e} >= {Q4_TOL:e}")));
    }
    if spec.experiment.refine {
        let (fine, _) = run(0.5 * cfg.dt)?;
        let d4f = fine.relative_drift(4);
        rec.set("drift_q4_half_dt", d4f);
        if d4f > 0.0 {
            let ratio = d4 / d4f;
            rec.set("drift_ratio_q4", ratio);
            if !(RATIO_BAND.0..=RATIO_BAND.1).contains(&ratio) {
                verdict = verdict.and(Verdict::Fail(format!(
                    "Q4 drift ratio {ratio:.3} outside [{}, {}]",
                    RATIO_BAND.0, RATIO_BAND.1
                )));
            }
        } else if d4 > 0.0 {
            verdict = verdict.and(Verdict::Inconclusive("refined Q4 drift vanished".into()));
        }
    }
    rec.verdict = verdict;
    Ok(rec)
}
