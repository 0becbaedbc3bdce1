//! Grid basics: transform conventions, spectral derivatives, Sobolev norms, dealiasing.

use std::f64::consts::PI;

use num_complex::Complex64;
use zrlab::grid::{dealias, forward_transform, sobolev_norm, spectral_derivative, ComplexField, SpectralGrid};

fn main() -> zrlab::Result<()> {
    let grid = SpectralGrid::new(2.0 * PI, 32)?;
    let f = ComplexField::from_fn(&grid, |x| Complex64::new((3.0 * x).sin(), 0.0));
    let fx = spectral_derivative(&f, 1);
    let exact = ComplexField::from_fn(&grid, |x| Complex64::new(3.0 * (3.0 * x).cos(), 0.0));
    println!("derivative error = {:.3e}", fx.sub(&exact)?.l2_norm());

    let e = ComplexField::from_fn(&grid, |x| Complex64::from_polar(1.0, 5.0 * x));
    for s in [-0.5, 0.0, 1.0, 2.0] {
        println!("||e^(5ix)||_H^{s} = {:.10} (expected {:.10})", sobolev_norm(&e, s), (2.0 * PI).sqrt() * 6f64.powf(s));
    }

    let hat = forward_transform(&ComplexField::from_fn(&grid, |x| Complex64::from_polar(1.0, 12.0 * x)));
    println!("energy of e^(12ix) before dealias = {:.3}", hat.energy());
    let hat = dealias(&hat);
    println!("energy after keeping |j| <= n/3   = {:.3}", hat.energy());
    Ok(())
}
