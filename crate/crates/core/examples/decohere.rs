//! Decoherence witness: two modified-system runs from the same data, at
//! scales L1 = M and L2, whose phases end a quarter turn apart.

use zrlab::config::{ExperimentKind, ExperimentSpec};
use zrlab::experiments::decohere::{run_decohere, DecoherenceScheme};

fn main() -> zrlab::Result<()> {
    let spec = ExperimentSpec::defaults(ExperimentKind::Decohere);
    let e = &spec.experiment;
    let sc = DecoherenceScheme::new(e.mu, e.m, e.c);
    println!(
        "mu = {}, M = {}, T = {:.6e}, L1 = {}, L2 = {:.6}, Theta^2 = {}",
        sc.mu, sc.m, sc.t, sc.l1, sc.l2, sc.theta_sq
    );
    println!("(L2^2 - L1^2) T = {:.15} (pi/2 = {:.15})", (sc.l2 * sc.l2 - sc.l1 * sc.l1) * sc.t, std::f64::consts::FRAC_PI_2);

    let rec = run_decohere(&spec)?;
    for key in [
        "mu0.1_C",
        "mu0.05_C",
        "mu0.025_C",
        "analytic_target",
        "final_separation",
        "final_separation_tilde",
        "initial_separation",
        "initial_over_final",
    ] {
        println!("{key:>24} = {:.6}", rec.scalars[key]);
    }
    for n in &rec.notes {
        println!("note: {n}");
    }
    println!("verdict: {:?}", rec.verdict);
    Ok(())
}
