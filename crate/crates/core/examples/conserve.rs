//! Conservation audit: Q1..Q4 drifts at dt and dt/2 for Gaussian data.
//!
//! `cargo run --release --example conserve -- [t_end]`

use zrlab::config::{ExperimentKind, ExperimentSpec};
use zrlab::experiments::run_conserve;

fn main() -> zrlab::Result<()> {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::Conserve);
    if let Some(t) = std::env::args().nth(1) {
        spec.stepper.t_end = t.parse().expect("t_end must be a number");
    }
    spec.validate()?;
    let rec = run_conserve(&spec)?;
    for key in ["drift_q1", "drift_q2", "drift_q3", "drift_q4", "drift_q4_half_dt", "drift_ratio_q4"] {
        if let Some(v) = rec.scalars.get(key) {
            println!("{key:>18} = {v:.3e}");
        }
    }
    println!("verdict: {:?}", rec.verdict);
    Ok(())
}
