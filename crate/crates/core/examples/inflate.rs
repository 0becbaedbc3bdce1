//! Norm inflation: the transport field leaves the unit ball of H^l at a rate
//! N^(l - 2k + 1/2) for unit H^k data. Solver and first-order oracle side by side.
//!
//! `cargo run --release --example inflate -- [N,N,...]`

use zrlab::config::{ExperimentKind, ExperimentSpec};
use zrlab::experiments::inflate::{inflation_member, run_inflate};

fn main() -> zrlab::Result<()> {
    let mut spec = ExperimentSpec::defaults(ExperimentKind::Inflate);
    if let Some(list) = std::env::args().nth(1) {
        spec.experiment.n_list = list.split(',').map(|v| v.trim().parse().expect("integer N")).collect();
    }
    spec.validate()?;

    println!("{:>6} {:>10} {:>14} {:>14} {:>8}", "N", "points", "solver", "oracle", "ratio");
    for &n in &spec.experiment.n_list {
        let m = inflation_member(&spec, n, false)?;
        println!(
            "{:>6} {:>10} {:>14.8} {:>14.8} {:>8.5}",
            n,
            m.grid_points,
            m.solver,
            m.oracle,
            m.solver / m.oracle
        );
    }
    let rec = run_inflate(&spec)?;
    println!(
        "slope {:.4} (expected {:.4}), r^2 {:.6}",
        rec.scalars["slope"], rec.scalars["expected_slope"], rec.scalars["r_squared"]
    );
    println!("verdict: {:?}", rec.verdict);
    Ok(())
}
