use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::closed_forms::{
    dilate, plateau_bump, psi_plus0_profile, small_dispersion_solution, smooth_window,
};
use crate::config::ExperimentSpec;
use crate::error::{Result, ZrError};
use crate::evolution::Stepper;
use crate::grid::{forward_transform, sobolev_norm, ComplexField, RealField, SpectralGrid};
use crate::model::{mass, ExternalPotential, FieldState, GeneralCoefficients};
use crate::quadrature::GaussRule;
use crate::record::{RunRecord, Verdict};

use super::{log_schedule, spec_grid, thread_pool};

pub const Q1_TOL: f64 = 1e-10;
/// Allowed spread of `err/μ` around its mean across the μ sweep.
pub const CONSTANT_BAND: (f64, f64) = (0.5, 1.5);
pub const TARGET_BAND: (f64, f64) = (0.5, 1.5);
pub const INITIAL_FRACTION: f64 = 0.1;
/// Fraction of `B̃` energy allowed above two thirds of the resolved band.
const TAIL_TOL: f64 = 1e-6;

/// Parameters shared by the two runs of one witness pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoherenceScheme {
    pub mu: f64,
    pub m: f64,
    pub c: f64,
    /// `T = |log μ| / M²`.
    pub t: f64,
    pub l1: f64,
    pub l2: f64,
    /// `Θ² = μ / M`.
    pub theta_sq: f64,
}

impl DecoherenceScheme {
    pub fn new(mu: f64, m: f64, c: f64) -> Self {
        let t = mu.ln().abs() / (m * m);
        DecoherenceScheme {
            mu,
            m,
            c,
            t,
            l1: m,
            l2: (PI / (2.0 * t) + m * m).sqrt(),
            theta_sq: mu / m,
        }
    }

    /// Length of the modified-system run for scale `l`: `L² T`.
    pub fn tilde_time(&self, l: f64) -> f64 {
        l * l * self.t
    }

    /// Coefficients of the modified system at scale `l`.
    pub fn coefficients(&self, l: f64, psi_plus0: &RealField) -> GeneralCoefficients {
        let (mu, c, th) = (self.mu, self.c, self.theta_sq);
        let speed_plus = mu * (1.0 - c) / l;
        GeneralCoefficients {
            dispersion: mu * mu,
            potential_plus: 1.0,
            potential_minus: 1.0,
            cubic: th,
            speed_plus,
            speed_minus: -mu * (1.0 + c) / l,
            source_plus: th * mu / l,
            source_minus: th * mu / l,
            external_plus: Some(ExternalPotential::new(psi_plus0, speed_plus)),
            external_minus: None,
        }
    }
}

/// `B̃₀`, and `ψ̃₊₀` cut off smoothly well inside the periodic box.
pub fn decoherence_data(grid: &Arc<SpectralGrid>) -> (ComplexField, RealField) {
    let half = grid.length() / 2.0;
    let b0 = ComplexField::from_fn(grid, |x| Complex64::new(plateau_bump(x), 0.0));
    let psi = RealField::from_fn(grid, |x| {
        psi_plus0_profile(x) * smooth_window(x, 0.6 * half, 0.9 * half)
    });
    (b0, psi)
}

#[derive(Clone, Debug)]
pub struct ModifiedRun {
    pub b_final: ComplexField,
    pub t_final: f64,
    /// `max_t ‖B̃(t) − Ã(t)‖_{L²}` over the recorded times.
    pub max_error: f64,
    pub max_error_h1: f64,
    pub q1_drift: f64,
    pub tail_fraction: f64,
    pub initial_state: FieldState,
}

/// Integrates the modified system at scale `l` up to `L² T`.
pub fn modified_run(
    spec: &ExperimentSpec,
    scheme: &DecoherenceScheme,
    l: f64,
    b0: &ComplexField,
    psi_plus0: &RealField,
) -> Result<ModifiedRun> {
    let grid = b0.grid();
    let coeffs = scheme.coefficients(l, psi_plus0);
    let zero = RealField::zeros(grid);
    let s0 = FieldState::new(b0.clone(), zero.clone(), zero.clone(), 0.0)?;
    let t_end = scheme.tilde_time(l);
    let n_steps = ((t_end / spec.stepper.dt) - 1e-9).ceil().max(1.0) as usize;
    let h = t_end / n_steps as f64;
    let every = spec.stepper.record_every.max(1);

    let mut st = Stepper::new(&s0, &coeffs)?
        .with_dealias(spec.stepper.dealias)
        .with_midpoint_external(spec.stepper.midpoint_external);
    let q0 = mass(b0);
    let (mut err, mut err_h1, mut drift) = (0.0f64, 0.0f64, 0.0f64);
    let mut done = 0;
    let mut last = s0.clone();
    while done < n_steps {
        let chunk = every.min(n_steps - done);
        st.steps(h, chunk)?;
        done += chunk;
        let s = st.state();
        let a = small_dispersion_solution(s.time, b0, psi_plus0, &zero)?;
        let d = s.b.sub(&a)?;
        err = err.max(d.l2_norm());
        err_h1 = err_h1.max(sobolev_norm(&d, 1.0));
        drift = drift.max((mass(&s.b) - q0).abs() / q0);
        last = s;
    }
    let coeffs_final = forward_transform(&last.b);
    let n = grid.n_points() as i64;
    let tail: f64 = coeffs_final
        .values()
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let j = if (*k as i64) < n / 2 { *k as i64 } else { *k as i64 - n };
            j.abs() > n / 4
        })
        .map(|(_, c)| c.norm_sqr())
        .sum();
    Ok(ModifiedRun {
        t_final: last.time,
        b_final: last.b,
        max_error: err,
        max_error_h1: err_h1,
        q1_drift: drift,
        tail_fraction: tail / coeffs_final.energy(),
        initial_state: s0,
    })
}

/// `‖(e^{iπψ̃₊₀/2} − 1) B̃₀‖_{L²}` by Gauss–Legendre quadrature over the support of `B̃₀`.
pub fn analytic_target(rule: &GaussRule) -> f64 {
    rule.integrate_composite(-2.0, 2.0, 64, |x| {
        let b = plateau_bump(x);
        let d = Complex64::from_polar(1.0, 0.5 * PI * psi_plus0_profile(x)) - 1.0;
        d.norm_sqr() * b * b
    })
    .sqrt()
}

#[derive(Clone, Debug)]
pub struct DecoherencePair {
    pub scheme: DecoherenceScheme,
    pub run1: ModifiedRun,
    pub run2: ModifiedRun,
}

impl DecoherencePair {
    pub fn max_error(&self) -> f64 {
        self.run1.max_error.max(self.run2.max_error)
    }
}

pub fn decoherence_pair(spec: &ExperimentSpec, mu: f64, m: f64) -> Result<DecoherencePair> {
    let grid = spec_grid(spec)?;
    let (b0, psi) = decoherence_data(&grid);
    let scheme = DecoherenceScheme::new(mu, m, spec.experiment.c);
    let run1 = modified_run(spec, &scheme, scheme.l1, &b0, &psi)?;
    let run2 = modified_run(spec, &scheme, scheme.l2, &b0, &psi)?;
    for r in [&run1, &run2] {
        if r.tail_fraction > TAIL_TOL {
            return Err(ZrError::Config(format!(
                "mu = {mu}: {:.2e} of the energy lies near the grid cutoff; refine grid.n",
                r.tail_fraction
            )));
        }
    }
    Ok(DecoherencePair { scheme, run1, run2 })
}

/// Two modified-system runs from identical data whose embedded solutions separate.
pub fn run_decohere(spec: &ExperimentSpec) -> Result<RunRecord> {
    let e = &spec.experiment;
    let mut rec = RunRecord::new(vec![], 0.0);
    let mut mus = e.mu_list.clone();
    if !mus.iter().any(|m| (m - e.mu).abs() < 1e-15) {
        mus.push(e.mu);
    }
    let pairs: Vec<DecoherencePair> = thread_pool().install(|| {
        mus.par_iter()
            .map(|&mu| decoherence_pair(spec, mu, e.m.max(1.0 / mu)))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut verdict = Verdict::Pass;

    for p in &pairs {
        let tag = format!("mu{}", p.scheme.mu);
        rec.set(&format!("{tag}_M"), p.scheme.m);
        rec.set(&format!("{tag}_err"), p.max_error());
        rec.set(&format!("{tag}_err_H1"), p.run1.max_error_h1.max(p.run2.max_error_h1));
        rec.set(&format!("{tag}_C"), p.max_error() / p.scheme.mu);
        for (j, r) in [(1, &p.run1), (2, &p.run2)] {
            rec.set(&format!("{tag}_run{j}_q1_drift"), r.q1_drift);
            if r.q1_drift > Q1_TOL {
                verdict = verdict.and(Verdict::Fail(format!(
                    "Q1 drift {:.2e} in run {j} at mu = {}",
                    r.q1_drift, p.scheme.mu
                )));
            }
        }
    }
    let cs: Vec<f64> = e
        .mu_list
        .iter()
        .filter_map(|mu| pairs.iter().find(|p| p.scheme.mu == *mu))
        .map(|p| p.max_error() / p.scheme.mu)
        .collect();
    if !cs.is_empty() {
        let mean = cs.iter().sum::<f64>() / cs.len() as f64;
        rec.set("C_mean", mean);
        let spread = cs.iter().fold(0.0f64, |a, c| a.max((c / mean - 1.0).abs()));
        rec.set("C_max_rel_spread", spread);
        if cs.iter().any(|c| !(CONSTANT_BAND.0 * mean..=CONSTANT_BAND.1 * mean).contains(c)) {
            verdict = verdict.and(Verdict::Fail(format!(
                "err/mu not stable across mu_list: relative spread {spread:.3}"
            )));
        }
    }

    let main = pairs
        .iter()
        .find(|p| (p.scheme.mu - e.mu).abs() < 1e-15)
        .expect("main mu is in the sweep");
    let sc = main.scheme;
    log_schedule(&mut rec, &main.run1.initial_state, e.schedule_eps);
    rec.set("T", sc.t);
    rec.set("L1", sc.l1);
    rec.set("L2", sc.l2);
    rec.set("Theta_sq", sc.theta_sq);
    rec.set("tilde_t1", main.run1.t_final);
    rec.set("tilde_t2", main.run2.t_final);
    let phase_gap = (sc.l2 * sc.l2 - sc.l1 * sc.l1) * sc.t;
    rec.set("phase_gap", phase_gap);
    if (phase_gap - PI / 2.0).abs() > 1e-12 || (sc.theta_sq - sc.mu / sc.m).abs() > 1e-15 {
        verdict = verdict.and(Verdict::Fail("parameter scheme relations violated".into()));
    }
    let ec1_l = sc.l1 >= sc.mu.powi(-5);
    rec.set("ec1_T0_le_abs_log_mu", 1.0);
    rec.set("ec1_L_ge_mu_pow_minus5", if ec1_l { 1.0 } else { 0.0 });
    rec.set("ec1_theta_sq_eq_mu_over_L1", 1.0);
    if !ec1_l {
        rec.note(format!(
            "L1 = {} is far below mu^-5 = {:.3e}; the asymptotic regime is not reached",
            sc.l1,
            sc.mu.powi(-5)
        ));
    }

    let r = sc.l2 / sc.l1;
    rec.set("dilation", r);
    let (b0, _) = decoherence_data(main.run1.b_final.grid());
    let (b0r, w0) = dilate(&b0, r);
    let (b2r, w2) = dilate(&main.run2.b_final, r);
    for w in [w0, w2].into_iter().flatten() {
        rec.note(w);
    }
    let initial = b0r.sub(&b0)?.l2_norm();
    let final_sep = b2r.sub(&main.run1.b_final)?.l2_norm();
    let tilde_sep = main.run2.b_final.sub(&main.run1.b_final)?.l2_norm();
    let target = analytic_target(&GaussRule::new(e.quad_nodes));
    rec.set("initial_separation", initial);
    rec.set("final_separation", final_sep);
    rec.set("final_separation_tilde", tilde_sep);
    rec.set("analytic_target", target);
    rec.set("final_over_target", final_sep / target);
    rec.set("initial_over_final", initial / final_sep);
    if !(TARGET_BAND.0..=TARGET_BAND.1).contains(&(final_sep / target)) {
        verdict = verdict.and(Verdict::Fail(format!(
            "final separation {final_sep:.4} is {:.3}x the target {target:.4}",
            final_sep / target
        )));
    }
    if initial >= INITIAL_FRACTION * final_sep {
        verdict = verdict.and(Verdict::Fail(format!(
            "initial separation {initial:.4} is not below {INITIAL_FRACTION} x final {final_sep:.4}"
        )));
    }
    rec.verdict = verdict;
    Ok(rec)
}
