//! A plane wave with constant transport fields is an exact solution; the
//! solver should reproduce its phase rotation to rounding error.

use std::f64::consts::PI;

use num_complex::Complex64;
use zrlab::evolution::{evolve, StepperConfig};
use zrlab::grid::{ComplexField, SpectralGrid};
use zrlab::model::{coefficients_from_params, plane_wave_residual, plane_wave_state, PhysicalParams};

fn main() -> zrlab::Result<()> {
    let grid = SpectralGrid::new(2.0 * PI, 64)?;
    let params = PhysicalParams::new(1.0, 1.0, 1.0, 2.0, 0.5)?;
    let coeffs = coefficients_from_params(&params)?;
    let (s0, omega) = plane_wave_state(&grid, 0.7, 3.0, 0.2, -0.1, &coeffs)?;
    println!("Omega = {omega:.12}");
    println!("static residual = {:.3e}", plane_wave_residual(&s0, omega, &coeffs));

    let cfg = StepperConfig::new(1e-3, 2.0);
    let out = evolve(&s0, &coeffs, &cfg, &mut [])?;
    let t = out.state.time;
    let exact = ComplexField::from_fn(&grid, |x| Complex64::from_polar(0.7, 3.0 * x - omega * t));
    let err = out.state.b.sub(&exact)?.l2_norm() / exact.l2_norm();
    println!("t = {t}, steps = {}, relative L2 error = {err:.3e}", out.steps);
    Ok(())
}
