//! Long-time Sobolev norms for moderate Gaussian data in the coercive regime.
//!
//! `cargo run --release --example growth -- [t_end]`

use zrlab::config::{ExperimentKind, ExperimentSpec};
use zrlab::experiments::run_growth;

fn main() -> zrlab::Result<()> {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::Growth);
    if let Some(t) = std::env::args().nth(1) {
        spec.stepper.t_end = t.parse().expect("t_end must be a number");
    }
    spec.validate()?;
    let rec = run_growth(&spec)?;
    for &s in &spec.experiment.s_list {
        let fit = &rec.fits[&format!("HsB_{s}")];
        println!(
            "H^{s}: envelope exponent {:.4} (allowed {}), max/initial {:.4}",
            fit.slope,
            rec.scalars[&format!("s{s}_exponent_bound")],
            rec.scalars[&format!("s{s}_max_over_initial")]
        );
    }
    println!("psi envelope: C = {:.4}, worst ratio {:.4}", rec.scalars["psi_envelope_C"], rec.scalars["psi_envelope_max_ratio"]);
    println!("verdict: {:?}", rec.verdict);
    Ok(())
}
