//! The resonance kernel Phi(t, a) = (e^{-ita} - 1)/(-ia) and the transform of the
//! bilinear term it produces, checked against direct time integration.

use zrlab::closed_forms::{build_fn, c2_psi10, l_hat, resonance_phi, HatVariant};
use zrlab::quadrature::GaussRule;

fn main() -> zrlab::Result<()> {
    for a in [0.0, 1e-8, 0.5, 10.0, 200.0] {
        let p = resonance_phi(0.1, a);
        println!("Phi(0.1, {a:>6}) = {:+.12} {:+.12}i", p.re, p.im);
    }
    let rule = GaussRule::new(64);
    let b0 = build_fn(64, 0.0, HatVariant::C2B0)?.remove(0);
    let psi = c2_psi10(64, -1.0)?;
    for xi in [-2.0 / 64.0, -0.01, 0.0, 0.01, 2.0 / 64.0] {
        let v = l_hat(xi, 0.01, &b0, &psi, &rule);
        println!("L_hat({xi:+.5}) = {:+.6e} {:+.6e}i", v.re, v.im);
    }
    Ok(())
}
