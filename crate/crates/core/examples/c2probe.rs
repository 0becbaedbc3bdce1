//! The bilinear Duhamel term `L(x,t)` for hat data grows like N^(-l-1/2),
//! so the flow map cannot be C² at l < -1/2.

use zrlab::closed_forms::{build_fn, c2_psi10, l_norm, l_norm_time_quadrature, HatVariant};
use zrlab::config::{ExperimentKind, ExperimentSpec};
use zrlab::experiments::run_c2probe;
use zrlab::quadrature::GaussRule;

fn main() -> zrlab::Result<()> {
    let spec = ExperimentSpec::defaults(ExperimentKind::C2probe);
    let e = &spec.experiment;
    let rule = GaussRule::new(e.quad_nodes);
    println!("k = {}, l = {}, t = {}", e.k, e.l, e.t);
    for &n in &e.n_list {
        let b0 = build_fn(n, e.k, HatVariant::C2B0)?.remove(0);
        let psi = c2_psi10(n, e.l)?;
        let kernel = l_norm(e.t, &b0, &psi, e.k, &rule);
        let direct = l_norm_time_quadrature(e.t, &b0, &psi, e.k, &rule);
        println!("N = {n:>4}: |L| = {kernel:.10}  (time quadrature {direct:.10})");
    }
    let rec = run_c2probe(&spec)?;
    println!("slope {:.6} vs {}", rec.scalars["slope"], rec.scalars["expected_slope"]);
    println!("verdict: {:?}", rec.verdict);
    Ok(())
}
