use rayon::prelude::*;

use crate::closed_forms::{
    build_fn, c2_psi10, hat_sobolev_norm, l_norm, l_norm_time_quadrature, HatVariant,
};
use crate::config::ExperimentSpec;
use crate::error::Result;
use crate::fit::loglog_fit;
use crate::quadrature::GaussRule;
use crate::record::{RunRecord, Verdict};

use super::{thread_pool, MIN_R_SQUARED};

pub const SLOPE_TOL: f64 = 0.1;
pub const ORACLE_TOL: f64 = 1e-6;
/// Allowed deviation of `‖L(2t)‖/‖L(t)‖` from 2.
pub const LINEARITY_TOL: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct C2Member {
    pub n: u32,
    pub norm: f64,
    pub oracle: f64,
    pub b0_norm: f64,
    pub psi10_norm: f64,
}

pub fn c2_member(n: u32, k: f64, l: f64, t: f64, rule: &GaussRule) -> Result<C2Member> {
    let b0 = build_fn(n, k, HatVariant::C2B0)?.remove(0);
    let psi = c2_psi10(n, l)?;
    Ok(C2Member {
        n,
        norm: l_norm(t, &b0, &psi, k, rule),
        oracle: l_norm_time_quadrature(t, &b0, &psi, k, rule),
        b0_norm: hat_sobolev_norm(std::slice::from_ref(&b0), k, rule),
        psi10_norm: hat_sobolev_norm(std::slice::from_ref(&psi), l, rule),
    })
}

/// Growth of the bilinear Duhamel term `‖L(·,t)‖_{H^k}` in `N`.
pub fn run_c2probe(spec: &ExperimentSpec) -> Result<RunRecord> {
    let e = &spec.experiment;
    let rule = GaussRule::new(e.quad_nodes);
    let mut rec = RunRecord::new(vec![], e.k);
    let members: Vec<C2Member> = thread_pool().install(|| {
        e.n_list
            .par_iter()
            .map(|&n| c2_member(n, e.k, e.l, e.t, &rule))
            .collect::<Result<Vec<_>>>()
    })?;
    let expected = -e.l - 0.5;
    rec.set("expected_slope", expected);
    let mut verdict = Verdict::Pass;
    let mut worst_rel: f64 = 0.0;
    for m in &members {
        let rel = (m.norm - m.oracle).abs() / m.oracle;
        worst_rel = worst_rel.max(rel);
        rec.set(&format!("N{}_norm", m.n), m.norm);
        rec.set(&format!("N{}_time_quadrature", m.n), m.oracle);
        rec.set(&format!("N{}_B0_norm", m.n), m.b0_norm);
        rec.set(&format!("N{}_psi10_norm", m.n), m.psi10_norm);
    }
    rec.set("oracle_max_rel_diff", worst_rel);
    if worst_rel > ORACLE_TOL {
        verdict = verdict.and(Verdict::Fail(format!(
            "kernel and time quadrature differ by {worst_rel:.2e} > {ORACLE_TOL:e}"
        )));
    }
    rec.note("data amplitudes are N^(1/2-k) and N^(1/2-l) as built; their norms are recorded per N");

    // linear-in-t regime at the middle N
    let mid = e.n_list[e.n_list.len() / 2];
    let b0 = build_fn(mid, e.k, HatVariant::C2B0)?.remove(0);
    let psi = c2_psi10(mid, e.l)?;
    let ts = [e.t, 2.0 * e.t, 4.0 * e.t];
    let vals: Vec<f64> = ts.iter().map(|&t| l_norm(t, &b0, &psi, e.k, &rule)).collect();
    for (i, w) in vals.windows(2).enumerate() {
        let r = w[1] / w[0];
        rec.set(&format!("time_doubling_ratio_{}", i + 1), r);
        if (r - 2.0).abs() > 2.0 * LINEARITY_TOL {
            verdict = verdict.and(Verdict::Fail(format!("norm not linear in t: doubling ratio {r:.4}")));
        }
    }

    let ns: Vec<f64> = members.iter().map(|m| m.n as f64).collect();
    let norms: Vec<f64> = members.iter().map(|m| m.norm).collect();
    let fit = loglog_fit(&ns, &norms)?;
    rec.set("slope", fit.slope);
    rec.set("r_squared", fit.r_squared);
    if (fit.slope - expected).abs() > SLOPE_TOL {
        verdict = verdict.and(Verdict::Fail(format!(
            "slope {:.4} differs from {expected:.4} by more than {SLOPE_TOL}",
            fit.slope
        )));
    }
    if expected > 0.0 && norms.windows(2).any(|w| w[1] <= w[0]) {
        verdict = verdict.and(Verdict::Fail("norms do not grow with N".into()));
    }
    if fit.r_squared < MIN_R_SQUARED {
        verdict = verdict.and(Verdict::Inconclusive(format!("r^2 = {:.4} < {MIN_R_SQUARED}", fit.r_squared)));
    }
    rec.fits.insert("norm".into(), fit);
    rec.verdict = verdict;
    Ok(rec)
}
