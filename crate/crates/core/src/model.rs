//! Physical parameters, the general-coefficient form of the system, field
//! states and the conserved functionals.
//!
//! The evolved system is
//!
//! ```text
//! i ∂t B + a ∂x² B = (p₊ ψ₁ + p₋ ψ₂ + g |B|² + V_ext) B
//! ∂t ψ₁ + c₊ ∂x ψ₁ = s₊ ∂x(|B|²)
//! ∂t ψ₂ + c₋ ∂x ψ₂ = s₋ ∂x(|B|²)
//! ```
//!
//! with the coefficients held in [`GeneralCoefficients`].

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ZrError};
use crate::grid::{
    derivative_multiplier, forward_transform, spectral_derivative, ComplexField, RealField,
    SpectralCoefficients, SpectralGrid,
};

/// Coefficients `(θ, γ, ω, β, ν)` of the physical system; `q` is derived.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub theta: f64,
    pub gamma: f64,
    pub omega: f64,
    pub beta: f64,
    pub nu: f64,
}

impl PhysicalParams {
    pub fn new(theta: f64, gamma: f64, omega: f64, beta: f64, nu: f64) -> Result<Self> {
        let p = PhysicalParams {
            theta,
            gamma,
            omega,
            beta,
            nu,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.theta, self.gamma, self.omega, self.beta, self.nu];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ZrError::InvalidParams("non-finite coefficient".into()));
        }
        if self.theta == 0.0 {
            return Err(ZrError::InvalidParams("theta must be nonzero".into()));
        }
        if self.beta <= 0.0 {
            return Err(ZrError::InvalidParams("beta must be positive".into()));
        }
        if self.beta - self.nu * self.nu == 0.0 {
            return Err(ZrError::InvalidParams("beta - nu^2 must be nonzero".into()));
        }
        Ok(())
    }

    /// `q = γ + ν(γν − 1) / (2(β − ν²))`.
    pub fn q(&self) -> f64 {
        self.gamma + self.nu * (self.gamma * self.nu - 1.0) / (2.0 * (self.beta - self.nu * self.nu))
    }

    /// Hypotheses under which the energy controls `H¹ × L² × L²`.
    pub fn is_coercive(&self) -> bool {
        self.omega > 0.0 && self.beta - self.nu * self.nu > 0.0
    }
}

/// A real potential profile advected rigidly at `speed`.
#[derive(Clone, Debug)]
pub struct ExternalPotential {
    profile: SpectralCoefficients,
    pub speed: f64,
}

impl ExternalPotential {
    pub fn new(profile: &RealField, speed: f64) -> Self {
        ExternalPotential {
            profile: forward_transform(&profile.to_complex()),
            speed,
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        self.profile.grid()
    }

    /// Profile translated by `speed · t`, written into `out` (nodal values).
    pub fn sample_into(&self, t: f64, out: &mut [Complex64], scratch: &mut [Complex64]) {
        let grid = self.profile.grid();
        let shift = self.speed * t;
        for (k, (o, c)) in out.iter_mut().zip(self.profile.values()).enumerate() {
            // transport multiplier; the Nyquist slot is left unshifted
            let xi = if k == grid.n_points() / 2 {
                0.0
            } else {
                grid.wavenumbers()[k]
            };
            *o = c * Complex64::from_polar(1.0, -xi * shift);
        }
        grid.inverse_in_place(out, scratch);
    }

    pub fn sample(&self, t: f64) -> RealField {
        let grid = self.profile.grid();
        let mut buf = vec![Complex64::default(); grid.n_points()];
        let mut scratch = vec![Complex64::default(); grid.scratch_len()];
        self.sample_into(t, &mut buf, &mut scratch);
        RealField::new(grid, buf.iter().map(|v| v.re).collect()).expect("grid length")
    }
}

/// Coefficients of the general system (see module docs).
#[derive(Clone, Debug)]
pub struct GeneralCoefficients {
    pub dispersion: f64,
    pub potential_plus: f64,
    pub potential_minus: f64,
    pub cubic: f64,
    pub speed_plus: f64,
    pub speed_minus: f64,
    pub source_plus: f64,
    pub source_minus: f64,
    pub external_plus: Option<ExternalPotential>,
    pub external_minus: Option<ExternalPotential>,
}

impl GeneralCoefficients {
    /// `i∂tB + ∂x²B = (ψ₊ + ψ₋ + |B|²)B`, `∂tψ± ± ∂xψ± = ∂x(|B|²)`.
    pub fn normalized() -> Self {
        GeneralCoefficients {
            dispersion: 1.0,
            potential_plus: 1.0,
            potential_minus: 1.0,
            cubic: 1.0,
            speed_plus: 1.0,
            speed_minus: -1.0,
            source_plus: 1.0,
            source_minus: 1.0,
            external_plus: None,
            external_minus: None,
        }
    }

    /// Linear part only: Schrödinger and transport groups.
    pub fn free(&self) -> Self {
        GeneralCoefficients {
            potential_plus: 0.0,
            potential_minus: 0.0,
            cubic: 0.0,
            source_plus: 0.0,
            source_minus: 0.0,
            external_plus: None,
            external_minus: None,
            ..self.clone()
        }
    }

    pub fn has_external(&self) -> bool {
        self.external_plus.is_some() || self.external_minus.is_some()
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.dispersion,
            self.potential_plus,
            self.potential_minus,
            self.cubic,
            self.speed_plus,
            self.speed_minus,
            self.source_plus,
            self.source_minus,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(ZrError::InvalidParams("non-finite coefficient".into()));
        }
        Ok(())
    }
}

pub fn coefficients_from_params(p: &PhysicalParams) -> Result<GeneralCoefficients> {
    p.validate()?;
    let sb = p.beta.sqrt();
    let g = p.gamma;
    Ok(GeneralCoefficients {
        dispersion: p.omega,
        potential_plus: g * (sb - 0.5 * p.nu),
        potential_minus: -g * (sb + 0.5 * p.nu),
        cubic: g * p.q(),
        speed_plus: (sb - p.nu) / p.theta,
        speed_minus: -(sb + p.nu) / p.theta,
        source_plus: g / (2.0 * p.theta) * (-1.0 + p.nu / (2.0 * sb)),
        source_minus: g / (2.0 * p.theta) * (-1.0 - p.nu / (2.0 * sb)),
        external_plus: None,
        external_minus: None,
    })
}

/// The triple `(B, ψ₁, ψ₂)` at one time.
#[derive(Clone, Debug)]
pub struct FieldState {
    pub b: ComplexField,
    pub psi1: RealField,
    pub psi2: RealField,
    pub time: f64,
}

impl FieldState {
    pub fn new(b: ComplexField, psi1: RealField, psi2: RealField, time: f64) -> Result<Self> {
        let g = b.grid();
        for other in [psi1.grid(), psi2.grid()] {
            if !(Arc::ptr_eq(g, other) || **g == **other) {
                return Err(ZrError::GridMismatch("state fields on different grids".into()));
            }
        }
        Ok(FieldState {
            b,
            psi1,
            psi2,
            time,
        })
    }

    pub fn zeros(grid: &Arc<SpectralGrid>) -> Self {
        FieldState {
            b: ComplexField::zeros(grid),
            psi1: RealField::zeros(grid),
            psi2: RealField::zeros(grid),
            time: 0.0,
        }
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        self.b.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.b.is_finite() && self.psi1.is_finite() && self.psi2.is_finite()
    }
}

/// `ρ = ψ₁ + ψ₂`, `u = √β (ψ₁ − ψ₂)`.
pub fn to_physical_vars(s: &FieldState, p: &PhysicalParams) -> (RealField, RealField) {
    let sb = p.beta.sqrt();
    let grid = s.grid();
    let (a, b) = (s.psi1.values(), s.psi2.values());
    let rho = a.iter().zip(b).map(|(x, y)| x + y).collect();
    let u = a.iter().zip(b).map(|(x, y)| sb * (x - y)).collect();
    (
        RealField::new(grid, rho).expect("same grid"),
        RealField::new(grid, u).expect("same grid"),
    )
}

/// Inverse of [`to_physical_vars`].
pub fn from_physical_vars(
    rho: &RealField,
    u: &RealField,
    p: &PhysicalParams,
) -> Result<(RealField, RealField)> {
    if rho.len() != u.len() {
        return Err(ZrError::GridMismatch("rho and u differ in length".into()));
    }
    let sb = p.beta.sqrt();
    let grid = rho.grid();
    let (r, v) = (rho.values(), u.values());
    let psi1 = r.iter().zip(v).map(|(r, u)| 0.5 * (r + u / sb)).collect();
    let psi2 = r.iter().zip(v).map(|(r, u)| 0.5 * (r - u / sb)).collect();
    Ok((RealField::new(grid, psi1)?, RealField::new(grid, psi2)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservedReport {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    pub q4: f64,
    pub time: f64,
}

/// `∫|B|² dx` on the grid.
pub fn mass(b: &ComplexField) -> f64 {
    b.l2_norm_sq()
}

/// Mass, momentum-type and energy functionals of the state.
pub fn conserved_quantities(s: &FieldState, p: &PhysicalParams) -> Result<ConservedReport> {
    let dx = s.grid().dx();
    let b = s.b.values();
    let bx = spectral_derivative(&s.b, 1);
    let bx = bx.values();
    let (rho, u) = to_physical_vars(s, p);
    let (rho, u) = (rho.values(), u.values());

    // (i/2) ∫ (B B̄x − Bx B̄)
    let mut flux = Complex64::default();
    let mut grad_sq = 0.0;
    let mut m2 = 0.0;
    let mut m4 = 0.0;
    let mut coupling = 0.0;
    let mut rho_sq = 0.0;
    let mut u_sq = 0.0;
    let mut u_rho = 0.0;
    for i in 0..b.len() {
        flux += Complex64::new(0.0, 0.5) * (b[i] * bx[i].conj() - bx[i] * b[i].conj());
        let nb = b[i].norm_sqr();
        grad_sq += bx[i].norm_sqr();
        m2 += nb;
        m4 += nb * nb;
        coupling += (u[i] - 0.5 * p.nu * rho[i]) * nb;
        rho_sq += rho[i] * rho[i];
        u_sq += u[i] * u[i];
        u_rho += u[i] * rho[i];
    }
    flux *= dx;
    let scale = (m2 * dx).max(1.0) * (grad_sq * dx).sqrt().max(1.0);
    if flux.im.abs() > 1e-10 * scale {
        return Err(ZrError::NumericalHealth(format!(
            "momentum integrand has imaginary residue {}",
            flux.im
        )));
    }
    let momentum = flux.re;
    let q1 = m2 * dx;
    let q3 = u_rho * dx + momentum;
    let q4 = 0.5 * p.omega * grad_sq * dx
        + 0.25 * p.gamma * p.q() * m4 * dx
        + 0.5 * p.gamma * coupling * dx
        + 0.25 * p.beta * rho_sq * dx
        + 0.25 * u_sq * dx
        + p.nu / (2.0 * p.theta) * momentum;
    let q2 = q4 - p.nu / (2.0 * p.theta) * q3;
    Ok(ConservedReport {
        q1,
        q2,
        q3,
        q4,
        time: s.time,
    })
}

/// Exact travelling plane wave `B = A e^{i(κx − Ωt)}` with constant `ψ₁ = c1`, `ψ₂ = c2`.
///
/// Returns the initial state and the frequency `Ω`.
pub fn plane_wave_state(
    grid: &Arc<SpectralGrid>,
    amplitude: f64,
    kappa: f64,
    c1: f64,
    c2: f64,
    coeffs: &GeneralCoefficients,
) -> Result<(FieldState, f64)> {
    if grid.slot_of_wavenumber(kappa).is_none() {
        return Err(ZrError::NotOnGrid(kappa));
    }
    let omega = plane_wave_frequency(amplitude, kappa, c1, c2, coeffs);
    let b = ComplexField::from_fn(grid, |x| Complex64::from_polar(amplitude, kappa * x));
    let state = FieldState::new(
        b,
        RealField::from_fn(grid, |_| c1),
        RealField::from_fn(grid, |_| c2),
        0.0,
    )?;
    Ok((state, omega))
}

pub fn plane_wave_frequency(
    amplitude: f64,
    kappa: f64,
    c1: f64,
    c2: f64,
    coeffs: &GeneralCoefficients,
) -> f64 {
    coeffs.dispersion * kappa * kappa
        + coeffs.potential_plus * c1
        + coeffs.potential_minus * c2
        + coeffs.cubic * amplitude * amplitude
}

/// Step size and count of the global iteration scheme.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationSchedule {
    pub step: f64,
    pub count: u64,
}

impl IterationSchedule {
    /// Time advanced before the transport norms double, `m · ΔT`.
    pub fn span(&self) -> f64 {
        self.count as f64 * self.step
    }
}

pub const DEFAULT_SCHEDULE_EPS: f64 = 0.01;

/// `ΔT = min‖ψ‖^{-1/(1/2−3ε)}` clamped to `(0, 1]`,
/// `m = ⌈min‖ψ‖ / (ΔT^{1/2−3ε} ‖B₀‖²)⌉`.
pub fn iteration_schedule(
    norm_psi1: f64,
    norm_psi2: f64,
    norm_b0: f64,
    eps: f64,
) -> Result<IterationSchedule> {
    if !(0.0..1.0 / 6.0).contains(&eps) {
        return Err(ZrError::InvalidParams(format!("eps must lie in [0, 1/6), got {eps}")));
    }
    if norm_psi1 < 0.0 || norm_psi2 < 0.0 || !(norm_b0 > 0.0) {
        return Err(ZrError::InvalidParams(
            "norms must be nonnegative and the B norm positive".into(),
        ));
    }
    let lo = norm_psi1.min(norm_psi2);
    if lo == 0.0 {
        return Ok(IterationSchedule { step: 1.0, count: 1 });
    }
    let a = 0.5 - 3.0 * eps;
    let step = lo.powf(-1.0 / a).min(1.0);
    let count = (lo / (step.powf(a) * norm_b0 * norm_b0)).ceil().max(1.0) as u64;
    Ok(IterationSchedule { step, count })
}

/// Residual of the B equation for a field evolving as `B(t) = B e^{−iΩt}`.
pub fn plane_wave_residual(state: &FieldState, omega: f64, coeffs: &GeneralCoefficients) -> f64 {
    let grid = state.grid();
    let mut hat = forward_transform(&state.b);
    for (k, v) in hat.values_mut().iter_mut().enumerate() {
        *v *= derivative_multiplier(grid, k, 2);
    }
    let bxx = crate::grid::inverse_transform(&hat);
    let b = state.b.values();
    let mut worst: f64 = 0.0;
    for i in 0..b.len() {
        let psi = coeffs.potential_plus * state.psi1.values()[i]
            + coeffs.potential_minus * state.psi2.values()[i]
            + coeffs.cubic * b[i].norm_sqr();
        let dt_b = Complex64::new(0.0, -omega) * b[i];
        let r = Complex64::i() * dt_b + coeffs.dispersion * bxx.values()[i] - psi * b[i];
        worst = worst.max(r.norm());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn rejects_degenerate_params() {
        assert!(PhysicalParams::new(0.0, 1.0, 1.0, 1.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 1.0, 0.0, 0.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 1.0, 4.0, 2.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, 1.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn coefficients_without_nu() {
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(p.q(), 1.0);
        let c = coefficients_from_params(&p).unwrap();
        assert_eq!((c.potential_plus, c.potential_minus), (1.0, -1.0));
        assert_eq!((c.speed_plus, c.speed_minus), (1.0, -1.0));
        assert_eq!((c.source_plus, c.source_minus), (-0.5, -0.5));
        assert_eq!((c.dispersion, c.cubic), (1.0, 1.0));
    }

    #[test]
    fn coefficients_hand_checked() {
        // q = 0 + 1·(0 − 1)/(2·3)
        let p = PhysicalParams::new(1.0, 0.0, 1.0, 4.0, 1.0).unwrap();
        assert!(close(p.q(), -1.0 / 6.0, 1e-15));
        let c = coefficients_from_params(&p).unwrap();
        assert_eq!(c.potential_plus, 0.0);
        assert_eq!(c.speed_plus, 1.0);
        assert_eq!(c.speed_minus, -3.0);

        let p = PhysicalParams::new(2.0, 3.0, 0.5, 4.0, 1.0).unwrap();
        let c = coefficients_from_params(&p).unwrap();
        assert!(close(c.potential_plus, 3.0 * 1.5, 1e-15));
        assert!(close(c.potential_minus, -3.0 * 2.5, 1e-15));
        assert!(close(c.source_plus, 0.75 * (-1.0 + 0.25), 1e-15));
        assert!(close(c.source_minus, 0.75 * (-1.0 - 0.25), 1e-15));
        assert!(close(c.cubic, 3.0 * (3.0 + 1.0 * 2.0 / 6.0), 1e-15));
    }

    #[test]
    fn normalized_preset() {
        let c = GeneralCoefficients::normalized();
        assert_eq!(c.dispersion, 1.0);
        assert_eq!((c.potential_plus, c.potential_minus), (1.0, 1.0));
        assert_eq!(c.cubic, 1.0);
        assert_eq!((c.speed_plus, c.speed_minus), (1.0, -1.0));
        assert_eq!((c.source_plus, c.source_minus), (1.0, 1.0));
    }

    fn state_from(grid: &Arc<SpectralGrid>, b: ComplexField, p1: Vec<f64>, p2: Vec<f64>) -> FieldState {
        FieldState::new(
            b,
            RealField::new(grid, p1).unwrap(),
            RealField::new(grid, p2).unwrap(),
            0.0,
        )
        .unwrap()
    }

    #[test]
    fn change_of_variables() {
        let g = SpectralGrid::new(1.0, 16).unwrap();
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 4.0, 0.0).unwrap();
        let s = FieldState::zeros(&g);
        let (rho, u) = to_physical_vars(&s, &p);
        assert!(rho.values().iter().chain(u.values()).all(|&v| v == 0.0));

        let s = state_from(&g, ComplexField::zeros(&g), vec![1.0; 16], vec![-1.0; 16]);
        let (rho, u) = to_physical_vars(&s, &p);
        assert!(rho.values().iter().all(|&v| v == 0.0));
        assert!(u.values().iter().all(|&v| v == 4.0));
        let (a, b) = from_physical_vars(&rho, &u, &p).unwrap();
        assert!(a.values().iter().all(|&v| v == 1.0));
        assert!(b.values().iter().all(|&v| v == -1.0));
    }

    #[test]
    fn change_of_variables_round_trip() {
        let g = SpectralGrid::new(1.0, 64).unwrap();
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 2.0, 0.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut r = || (0..64).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<f64>>();
        let s = state_from(&g, ComplexField::zeros(&g), r(), r());
        let (rho, u) = to_physical_vars(&s, &p);
        let (a, b) = from_physical_vars(&rho, &u, &p).unwrap();
        for i in 0..64 {
            assert!((a.values()[i] - s.psi1.values()[i]).abs() < 1e-14 * 4.0);
            assert!((b.values()[i] - s.psi2.values()[i]).abs() < 1e-14 * 4.0);
        }
        let rho0 = RealField::new(&g, r()).unwrap();
        let u0 = RealField::new(&g, r()).unwrap();
        let (a, b) = from_physical_vars(&rho0, &u0, &p).unwrap();
        let (rho1, u1) = to_physical_vars(&state_from(&g, ComplexField::zeros(&g), a.into_values(), b.into_values()), &p);
        for i in 0..64 {
            assert!((rho1.values()[i] - rho0.values()[i]).abs() < 1e-14 * 4.0);
            assert!((u1.values()[i] - u0.values()[i]).abs() < 1e-14 * 4.0);
        }
    }

    #[test]
    fn conserved_of_zero_state() {
        let g = SpectralGrid::new(10.0, 32).unwrap();
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 2.0, 0.5).unwrap();
        let r = conserved_quantities(&FieldState::zeros(&g), &p).unwrap();
        assert_eq!((r.q1, r.q2, r.q3, r.q4), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn conserved_of_constant_field() {
        let g = SpectralGrid::new(2.0 * PI, 32).unwrap();
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        let a: f64 = 0.7;
        let s = state_from(
            &g,
            ComplexField::from_fn(&g, |_| Complex64::new(a, 0.0)),
            vec![0.0; 32],
            vec![0.0; 32],
        );
        let r = conserved_quantities(&s, &p).unwrap();
        assert!(close(r.q1, 2.0 * PI * a * a, 1e-14));
        assert!(close(r.q4, 0.25 * 2.0 * PI * a.powi(4), 1e-14));
        assert!(r.q3.abs() < 1e-14);
    }

    /// Momentum of a plane wave against a direct quadrature of Im(B̄ Bx).
    #[test]
    fn plane_wave_momentum() {
        let l = 8.0;
        let g = SpectralGrid::new(l, 64).unwrap();
        let p = PhysicalParams::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap();
        let kappa = 2.0 * PI * 3.0 / l;
        let amp = 1.3;
        let s = state_from(
            &g,
            ComplexField::from_fn(&g, |x| Complex64::from_polar(amp, kappa * x)),
            vec![0.0; 64],
            vec![0.0; 64],
        );
        let r = conserved_quantities(&s, &p).unwrap();
        let direct: f64 = g
            .nodes()
            .iter()
            .map(|&x| {
                let b = Complex64::from_polar(amp, kappa * x);
                let bx = Complex64::new(0.0, kappa) * b;
                (b.conj() * bx).im * g.dx()
            })
            .sum();
        assert!(close(r.q3, direct, 1e-12));
        assert!(close(r.q3, kappa * r.q1, 1e-12));
    }

    #[test]
    fn q2_relation_holds() {
        let g = SpectralGrid::new(20.0, 128).unwrap();
        let p = PhysicalParams::new(1.5, 0.8, 1.0, 2.0, 0.6).unwrap();
        let s = state_from(
            &g,
            ComplexField::from_fn(&g, |x| Complex64::from_polar((-x * x).exp(), 0.7 * x)),
            g.nodes().iter().map(|x| 0.3 * (-(x - 1.0).powi(2)).exp()).collect(),
            g.nodes().iter().map(|x| -0.2 * (-(x + 1.0).powi(2)).exp()).collect(),
        );
        let r = conserved_quantities(&s, &p).unwrap();
        assert!(close(r.q2, r.q4 - p.nu / (2.0 * p.theta) * r.q3, 1e-15));
    }

    #[test]
    fn plane_wave_frequencies() {
        let g = SpectralGrid::new(2.0 * PI, 32).unwrap();
        let c = GeneralCoefficients::normalized();
        let (s, om) = plane_wave_state(&g, 0.0, 0.0, 0.5, 0.25, &c).unwrap();
        assert_eq!(om, 0.5 + 0.25);
        assert!(s.b.values().iter().all(|v| v.norm() == 0.0));
        let (_, om) = plane_wave_state(&g, 1.0, 0.0, 0.0, 0.0, &c).unwrap();
        assert_eq!(om, 1.0);
        let (s, om) = plane_wave_state(&g, 1.0, 2.0, 1.0, 0.0, &c).unwrap();
        // i∂tB + ∂x²B = VB with B ∝ e^{i(κx−Ωt)} gives Ω = κ² + V
        assert_eq!(om, 6.0);
        assert!(plane_wave_residual(&s, om, &c) < 1e-10);
        assert!(plane_wave_residual(&s, -2.0, &c) > 1.0);
        assert!(matches!(
            plane_wave_state(&g, 1.0, 2.5, 0.0, 0.0, &c),
            Err(ZrError::NotOnGrid(_))
        ));
    }

    #[test]
    fn plane_wave_residual_general_coefficients() {
        let g = SpectralGrid::new(10.0, 64).unwrap();
        let p = PhysicalParams::new(0.7, 1.3, 0.9, 3.0, -0.4).unwrap();
        let c = coefficients_from_params(&p).unwrap();
        let kappa = 2.0 * PI * -4.0 / 10.0;
        let (s, om) = plane_wave_state(&g, 0.8, kappa, 0.3, -0.6, &c).unwrap();
        assert!(plane_wave_residual(&s, om, &c) < 1e-10);
    }

    #[test]
    fn schedule_examples() {
        let s = iteration_schedule(1.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!((s.step, s.count), (1.0, 1));
        let s = iteration_schedule(1.0, 1.0, 1.0, 1e-9).unwrap();
        assert_eq!(s.count, 1);
        assert!((s.step - 1.0).abs() < 1e-12);
        let s = iteration_schedule(16.0, 16.0, 1.0, 0.0).unwrap();
        assert_eq!(s.step, 1.0 / 256.0);
        assert_eq!(s.count, 256);
        assert_eq!(s.span(), 1.0);
        let s = iteration_schedule(0.0, 0.0, 1.0, 0.01).unwrap();
        assert_eq!((s.step, s.count), (1.0, 1));
        assert!(iteration_schedule(1.0, 1.0, 0.0, 0.01).is_err());
        assert!(iteration_schedule(1.0, 1.0, 1.0, 0.2).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;
        use rand::Rng;

        proptest! {
            #[test]
            fn schedule_span_scales_like_inverse_mass(
                lo in 1.0f64..1e3, extra in 0.0f64..10.0, nb in 0.1f64..10.0, eps in 0.0f64..0.05
            ) {
                let s = iteration_schedule(lo, lo + extra, nb, eps).unwrap();
                let a = 0.5 - 3.0 * eps;
                // m·ΔT·‖B₀‖² >= lo^{-6ε/a}; equals 1 (up to ceiling) at ε = 0
                let bound = lo.powf(-6.0 * eps / a);
                prop_assert!(s.span() * nb * nb >= bound * (1.0 - 1e-12));
                if eps == 0.0 {
                    prop_assert!(s.span() * nb * nb >= 1.0 - 1e-12);
                }
            }

            #[test]
            fn momentum_integrand_is_real(seed in 0u64..500) {
                let g = SpectralGrid::new(6.0, 64).unwrap();
                let p = PhysicalParams::new(1.0, 1.0, 1.0, 2.0, 0.5).unwrap();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let b = (0..64).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
                let s = FieldState::new(
                    ComplexField::new(&g, b).unwrap(),
                    RealField::zeros(&g),
                    RealField::zeros(&g),
                    0.0,
                ).unwrap();
                prop_assert!(conserved_quantities(&s, &p).is_ok());
            }
        }
    }
}
