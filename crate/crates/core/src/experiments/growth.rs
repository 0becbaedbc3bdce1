use crate::config::ExperimentSpec;
use crate::error::Result;
use crate::evolution::evolve_recorded;
use crate::fit::{loglog_fit, FitResult};
use crate::grid::{forward_transform, sobolev_norm_coeffs};
use crate::record::{RunRecord, Verdict};

use super::{coefficients, initial_state, log_schedule, spec_grid, stepper_config};

/// Slack added to the exponent `(s − 1)₊` before a fit fails.
pub const EXPONENT_SLACK: f64 = 0.5;
/// Fits start here; earlier times are dominated by transients.
pub const FIT_START: f64 = 1.0;

/// Running maximum of a series.
pub fn running_max(v: &[f64]) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    v.iter()
        .map(|&x| {
            m = m.max(x);
            m
        })
        .collect()
}

/// Log-log fit of the running-max envelope over `t ≥ t_min`.
pub fn envelope_fit(times: &[f64], values: &[f64], t_min: f64) -> Result<FitResult> {
    let env = running_max(values);
    let (t, v): (Vec<f64>, Vec<f64>) = times
        .iter()
        .zip(&env)
        .filter(|(t, _)| **t >= t_min)
        .map(|(t, v)| (*t, *v))
        .unzip();
    loglog_fit(&t, &v)
}

/// Smallest `Ĉ ≥ 0` with `ψ(t) ≤ e^{Ĉ t m} base` on the given samples.
pub fn fit_exponential_rate(times: &[f64], psi: &[f64], mass: f64, base: f64) -> f64 {
    times
        .iter()
        .zip(psi)
        .filter(|(t, _)| **t > 0.0)
        .map(|(t, p)| (p / base).ln() / (t * mass))
        .fold(0.0, f64::max)
}

/// Long run tracking `‖B(t)‖_{H^s}` and `‖ψ±(t)‖_{H^{-1/2}}`.
pub fn run_growth(spec: &ExperimentSpec) -> Result<RunRecord> {
    let e = &spec.experiment;
    let grid = spec_grid(spec)?;
    let (coeffs, params) = coefficients(spec)?;
    let s0 = initial_state(spec, &grid, &coeffs)?;
    let mut s_list = e.s_list.clone();
    let has_h1 = s_list.iter().any(|s| *s == 1.0);
    if !has_h1 {
        s_list.push(1.0);
    }
    let (mut rec, out) = evolve_recorded(&s0, &coeffs, &stepper_config(spec), params, s_list.clone(), e.psi_s)?;
    log_schedule(&mut rec, &s0, e.schedule_eps);
    rec.set("max_phase_step", out.max_phase_step);
    let times = rec.times();
    let t_end = *times.last().unwrap_or(&0.0);
    let mut verdict = Verdict::Pass;

    for (idx, &s) in s_list.iter().enumerate() {
        if !has_h1 && s == 1.0 && idx == s_list.len() - 1 {
            continue;
        }
        let series = rec.hs_series(idx);
        let fit = envelope_fit(&times, &series, FIT_START.min(0.5 * t_end))?;
        let bound = (s - 1.0).max(0.0) + EXPONENT_SLACK;
        rec.set(&format!("s{s}_exponent"), fit.slope);
        rec.set(&format!("s{s}_exponent_bound"), bound);
        rec.set(&format!("s{s}_max_over_initial"), series.iter().cloned().fold(0.0, f64::max) / series[0]);
        if fit.slope > bound {
            verdict = verdict.and(Verdict::Fail(format!(
                "H^{s} envelope exponent {:.3} exceeds {bound}",
                fit.slope
            )));
        }
        rec.fits.insert(format!("HsB_{s}"), fit);
    }

    // a priori envelope X₀² + Q1(0)³ with implied constant 1
    let h1_idx = s_list.iter().position(|s| *s == 1.0).expect("H1 tracked");
    let b_h1 = rec.hs_series(h1_idx);
    let psi_l2 = |f: &crate::grid::RealField| f.l2_norm().powi(2);
    let x0_sq = b_h1[0].powi(2) + psi_l2(&s0.psi1) + psi_l2(&s0.psi2);
    let q1 = crate::model::mass(&s0.b);
    let lemma = x0_sq + q1.powi(3);
    let h1_max = b_h1.iter().cloned().fold(0.0, f64::max);
    rec.set("h1_sup", h1_max);
    rec.set("h1_envelope", lemma);
    rec.set("h1_sup_over_envelope", h1_max / lemma);
    if h1_max > lemma {
        verdict = verdict.and(Verdict::Fail(format!(
            "sup H^1 norm {h1_max:.4} exceeds the a priori envelope {lemma:.4}"
        )));
    }

    let psi: Vec<f64> = rec.rows.iter().map(|r| r.h_psi1.max(r.h_psi2)).collect();
    let psi_hat = |f: &crate::grid::RealField| sobolev_norm_coeffs(&forward_transform(&f.to_complex()), -0.5);
    let psi0 = psi_hat(&s0.psi1).max(psi_hat(&s0.psi2));
    let base = psi0.max(q1);
    let half: Vec<usize> = (0..times.len()).filter(|&i| times[i] <= 0.5 * t_end).collect();
    let c_hat = fit_exponential_rate(
        &half.iter().map(|&i| times[i]).collect::<Vec<_>>(),
        &half.iter().map(|&i| psi[i]).collect::<Vec<_>>(),
        q1,
        base,
    );
    rec.set("psi_envelope_C", c_hat);
    rec.set("psi_envelope_base", base);
    let worst = times
        .iter()
        .zip(&psi)
        .map(|(t, p)| p / (base * (c_hat * t * q1).exp()))
        .fold(0.0, f64::max);
    rec.set("psi_envelope_max_ratio", worst);
    if worst > 1.0 + 1e-12 {
        verdict = verdict.and(Verdict::Fail(format!(
            "psi exceeds the envelope fitted on [0, t_end/2] by a factor {worst:.4}"
        )));
    }
    rec.verdict = verdict;
    Ok(rec)
}
