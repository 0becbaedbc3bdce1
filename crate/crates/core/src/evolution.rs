//! Strang splitting with exact sub-flows.
//!
//! One step of size `h` is `L(h/2) ∘ N(h) ∘ L(h/2)`, where `L` is the
//! Fourier-diagonal linear group (Schrödinger for `B`, transport for `ψ±`)
//! and `N` the exact flow of
//!
//! ```text
//! i ∂t B = V B,     ∂t ψ± = s± ∂x(|B|²).
//! ```
//!
//! Under `N` the modulus `|B|` is frozen, so `ψ±` moves linearly in time and
//! `B` picks up the phase `exp(−i h V(ψ at the substep midpoint))`. Both
//! sub-flows are exactly reversible and `∫|B|²` is preserved to rounding.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Result, ZrError};
use crate::grid::{sobolev_norm_coeffs, ComplexField, RealField, SpectralCoefficients, SpectralGrid};
use crate::model::{conserved_quantities, FieldState, GeneralCoefficients, PhysicalParams};
use crate::record::{RecordRow, RunRecord};

#[derive(Clone, Debug, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub t_end: f64,
    pub dealias: bool,
    pub record_every: usize,
    pub midpoint_external: bool,
}

impl StepperConfig {
    pub fn new(dt: f64, t_end: f64) -> Self {
        StepperConfig {
            dt,
            t_end,
            dealias: true,
            record_every: 1,
            midpoint_external: true,
        }
    }

    pub fn record_every(mut self, every: usize) -> Self {
        self.record_every = every;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(ZrError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(ZrError::Config(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.dt > self.t_end * (1.0 + 1e-12) {
            return Err(ZrError::Config("dt exceeds t_end".into()));
        }
        if self.record_every == 0 {
            return Err(ZrError::Config("record_every must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps; the step is shrunk so that they land on `t_end`.
    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.dt) - 1e-9).ceil().max(1.0) as usize
    }

    pub fn effective_dt(&self) -> f64 {
        self.t_end / self.n_steps() as f64
    }
}

/// Cached Fourier multipliers of the linear group for one step size.
struct LinearPropagator {
    h: f64,
    b: Vec<Complex64>,
    plus: Vec<Complex64>,
    minus: Vec<Complex64>,
}

impl LinearPropagator {
    fn new(grid: &SpectralGrid, coeffs: &GeneralCoefficients, h: f64) -> Self {
        let n = grid.n_points();
        let xi = grid.wavenumbers();
        let transport = |speed: f64| -> Vec<Complex64> {
            (0..n)
                .map(|k| {
                    if k == n / 2 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::from_polar(1.0, -speed * xi[k] * h)
                    }
                })
                .collect()
        };
        LinearPropagator {
            h,
            b: xi
                .iter()
                .map(|&x| Complex64::from_polar(1.0, -coeffs.dispersion * x * x * h))
                .collect(),
            plus: transport(coeffs.speed_plus),
            minus: transport(coeffs.speed_minus),
        }
    }
}

/// Integrator state held in coefficient space.
pub struct Stepper<'a> {
    coeffs: &'a GeneralCoefficients,
    grid: Arc<SpectralGrid>,
    dealias: bool,
    midpoint_external: bool,
    b_hat: Vec<Complex64>,
    plus_hat: Vec<Complex64>,
    minus_hat: Vec<Complex64>,
    time: f64,
    work: Vec<Complex64>,
    work2: Vec<Complex64>,
    ext: Vec<Complex64>,
    scratch: Vec<Complex64>,
    props: Vec<LinearPropagator>,
    max_phase_step: f64,
}

impl<'a> Stepper<'a> {
    pub fn new(state: &FieldState, coeffs: &'a GeneralCoefficients) -> Result<Self> {
        coeffs.validate()?;
        let grid = Arc::clone(state.grid());
        for e in [&coeffs.external_plus, &coeffs.external_minus].into_iter().flatten() {
            if **e.grid() != *grid {
                return Err(ZrError::GridMismatch("external potential on another grid".into()));
            }
        }
        let n = grid.n_points();
        let mut scratch = vec![Complex64::default(); grid.scratch_len()];
        let mut to_hat = |values: Vec<Complex64>| {
            let mut v = values;
            grid.forward_in_place(&mut v, &mut scratch);
            v
        };
        let b_hat = to_hat(state.b.values().to_vec());
        let plus_hat = to_hat(state.psi1.to_complex().into_values());
        let minus_hat = to_hat(state.psi2.to_complex().into_values());
        Ok(Stepper {
            coeffs,
            dealias: true,
            midpoint_external: true,
            b_hat,
            plus_hat,
            minus_hat,
            time: state.time,
            work: vec![Complex64::default(); n],
            work2: vec![Complex64::default(); n],
            ext: Vec::new(),
            scratch,
            props: Vec::new(),
            max_phase_step: 0.0,
            grid,
        })
    }

    pub fn with_dealias(mut self, on: bool) -> Self {
        self.dealias = on;
        self
    }

    pub fn with_midpoint_external(mut self, on: bool) -> Self {
        self.midpoint_external = on;
        self
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn grid(&self) -> &Arc<SpectralGrid> {
        &self.grid
    }

    /// Largest `h · max|V|` seen in a nonlinear substep.
    pub fn max_phase_step(&self) -> f64 {
        self.max_phase_step
    }

    fn propagator(&mut self, h: f64) -> usize {
        if let Some(i) = self.props.iter().position(|p| p.h == h) {
            return i;
        }
        if self.props.len() >= 4 {
            self.props.remove(0);
        }
        self.props.push(LinearPropagator::new(&self.grid, self.coeffs, h));
        self.props.len() - 1
    }

    /// Exact linear flow over `h`.
    pub fn linear(&mut self, h: f64) {
        if h == 0.0 {
            return;
        }
        let i = self.propagator(h);
        let p = &self.props[i];
        for (v, m) in self.b_hat.iter_mut().zip(&p.b) {
            *v *= m;
        }
        for (v, m) in self.plus_hat.iter_mut().zip(&p.plus) {
            *v *= m;
        }
        for (v, m) in self.minus_hat.iter_mut().zip(&p.minus) {
            *v *= m;
        }
    }

    /// Exact nonlinear flow over `h`, starting at the current time.
    pub fn nonlinear(&mut self, h: f64) -> Result<()> {
        if h == 0.0 {
            return Ok(());
        }
        let c = self.coeffs;
        let grid = Arc::clone(&self.grid);
        let n = grid.n_points();
        let xi = grid.wavenumbers();
        let mask = grid.dealias_mask();

        // B in physical space
        self.work.copy_from_slice(&self.b_hat);
        grid.inverse_in_place(&mut self.work, &mut self.scratch);

        // ∂x(|B|²) in coefficient space, kept in work2
        for (w, b) in self.work2.iter_mut().zip(&self.work) {
            *w = Complex64::new(b.norm_sqr(), 0.0);
        }
        grid.forward_in_place(&mut self.work2, &mut self.scratch);
        for k in 0..n {
            let keep = k != n / 2 && (!self.dealias || mask[k]);
            self.work2[k] = if keep {
                Complex64::new(0.0, xi[k]) * self.work2[k]
            } else {
                Complex64::default()
            };
        }

        // ψ± after the substep, and the coupling potential at its midpoint:
        // p₊ψ₊ + p₋ψ₋ evaluated at h/2 equals the old value plus h/2 · slope.
        let (pp, pm) = (c.potential_plus, c.potential_minus);
        let (sp, sm) = (c.source_plus, c.source_minus);
        let slope = pp * sp + pm * sm;
        for k in 0..n {
            let nx = self.work2[k];
            let coupling = pp * self.plus_hat[k] + pm * self.minus_hat[k] + 0.5 * h * slope * nx;
            self.plus_hat[k] += h * sp * nx;
            self.minus_hat[k] += h * sm * nx;
            self.work2[k] = coupling;
        }
        grid.inverse_in_place(&mut self.work2, &mut self.scratch);

        let t_ext = if self.midpoint_external {
            self.time + 0.5 * h
        } else {
            self.time
        };
        if c.has_external() {
            self.ext.resize(n, Complex64::default());
            let mut tmp = vec![Complex64::default(); n];
            for e in [&c.external_plus, &c.external_minus].into_iter().flatten() {
                e.sample_into(t_ext, &mut tmp, &mut self.scratch);
                for (w, t) in self.work2.iter_mut().zip(&tmp) {
                    w.re += t.re;
                }
            }
        }

        let mut vmax: f64 = 0.0;
        let mut finite = true;
        for (b, v) in self.work.iter_mut().zip(&self.work2) {
            let pot = v.re + c.cubic * b.norm_sqr();
            if !pot.is_finite() {
                finite = false;
                break;
            }
            vmax = vmax.max(pot.abs());
            *b *= Complex64::from_polar(1.0, -h * pot);
        }
        if !finite {
            return Err(ZrError::BlowUp { time: self.time + h });
        }
        self.max_phase_step = self.max_phase_step.max(h.abs() * vmax);
        self.b_hat.copy_from_slice(&self.work);
        grid.forward_in_place(&mut self.b_hat, &mut self.scratch);
        Ok(())
    }

    /// One Strang step of size `h` (negative `h` runs backwards).
    pub fn step(&mut self, h: f64) -> Result<()> {
        self.linear(0.5 * h);
        self.nonlinear(h)?;
        self.linear(0.5 * h);
        self.time += h;
        Ok(())
    }

    /// `count` Strang steps with the inner half-steps fused.
    pub fn steps(&mut self, h: f64, count: usize) -> Result<()> {
        if count == 0 {
            return Ok(());
        }
        self.linear(0.5 * h);
        for i in 0..count {
            self.nonlinear(h)?;
            self.time += h;
            if i + 1 < count {
                self.linear(h);
            }
        }
        self.linear(0.5 * h);
        if !self.b_hat.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(ZrError::BlowUp { time: self.time });
        }
        Ok(())
    }

    pub fn b_coefficients(&self) -> SpectralCoefficients {
        SpectralCoefficients::new(&self.grid, self.b_hat.clone()).expect("grid length")
    }

    pub fn psi_coefficients(&self) -> (SpectralCoefficients, SpectralCoefficients) {
        (
            SpectralCoefficients::new(&self.grid, self.plus_hat.clone()).expect("grid length"),
            SpectralCoefficients::new(&self.grid, self.minus_hat.clone()).expect("grid length"),
        )
    }

    /// Nodal state, plus the largest imaginary part found in `ψ±`.
    pub fn state_with_residue(&mut self) -> (FieldState, f64) {
        let grid = Arc::clone(&self.grid);
        let mut to_nodes = |hat: &[Complex64]| {
            let mut v = hat.to_vec();
            grid.inverse_in_place(&mut v, &mut self.scratch);
            v
        };
        let b = to_nodes(&self.b_hat);
        let p = to_nodes(&self.plus_hat);
        let m = to_nodes(&self.minus_hat);
        let residue = p.iter().chain(&m).fold(0.0f64, |r, v| r.max(v.im.abs()));
        let state = FieldState {
            b: ComplexField::new(&grid, b).expect("grid length"),
            psi1: RealField::new(&grid, p.iter().map(|v| v.re).collect()).expect("grid length"),
            psi2: RealField::new(&grid, m.iter().map(|v| v.re).collect()).expect("grid length"),
            time: self.time,
        };
        (state, residue)
    }

    pub fn state(&mut self) -> FieldState {
        self.state_with_residue().0
    }
}

/// `L(h)` applied to a state.
pub fn linear_halfstep(s: &FieldState, coeffs: &GeneralCoefficients, h: f64) -> Result<FieldState> {
    let mut st = Stepper::new(s, coeffs)?;
    st.linear(h);
    let mut out = st.state();
    out.time = s.time;
    Ok(out)
}

/// `N(h)` applied to a state (time stamp unchanged).
pub fn nonlinear_step(s: &FieldState, coeffs: &GeneralCoefficients, h: f64) -> Result<FieldState> {
    let mut st = Stepper::new(s, coeffs)?;
    st.nonlinear(h)?;
    Ok(st.state())
}

/// Callback invoked on recorded states.
pub trait Observer {
    fn observe(&mut self, state: &FieldState) -> Result<()>;
}

impl<F: FnMut(&FieldState) -> Result<()>> Observer for F {
    fn observe(&mut self, state: &FieldState) -> Result<()> {
        self(state)
    }
}

/// Standard observer: conserved quantities and Sobolev norms.
pub struct Recorder {
    params: Option<PhysicalParams>,
    record: RunRecord,
}

impl Recorder {
    pub fn new(params: Option<PhysicalParams>, s_list: Vec<f64>, psi_s: f64) -> Self {
        Recorder {
            params,
            record: RunRecord::new(s_list, psi_s),
        }
    }

    pub fn record(&self) -> &RunRecord {
        &self.record
    }

    pub fn into_record(self) -> RunRecord {
        self.record
    }
}

impl Observer for Recorder {
    fn observe(&mut self, state: &FieldState) -> Result<()> {
        let q = match &self.params {
            Some(p) => {
                let r = conserved_quantities(state, p)?;
                [r.q1, r.q2, r.q3, r.q4]
            }
            None => [crate::model::mass(&state.b), f64::NAN, f64::NAN, f64::NAN],
        };
        let b_hat = crate::grid::forward_transform(&state.b);
        let hs_b = self
            .record
            .s_list
            .iter()
            .map(|&s| sobolev_norm_coeffs(&b_hat, s))
            .collect();
        let s = self.record.psi_s;
        let h1 = sobolev_norm_coeffs(&crate::grid::forward_transform(&state.psi1.to_complex()), s);
        let h2 = sobolev_norm_coeffs(&crate::grid::forward_transform(&state.psi2.to_complex()), s);
        self.record.rows.push(RecordRow {
            t: state.time,
            q,
            hs_b,
            h_psi1: h1,
            h_psi2: h2,
        });
        Ok(())
    }
}

/// Result of [`evolve`].
#[derive(Debug)]
pub struct EvolveOutput {
    pub state: FieldState,
    pub steps: usize,
    pub max_phase_step: f64,
    /// Largest imaginary part seen in the transport fields at recorded times.
    pub max_psi_imag: f64,
    pub warnings: Vec<String>,
}

/// Failure of [`evolve`] with the last state that passed every check.
#[derive(Debug, thiserror::Error)]
#[error("{error}")]
pub struct EvolveFailure {
    #[source]
    pub error: ZrError,
    pub last_healthy: Option<FieldState>,
}

impl From<EvolveFailure> for ZrError {
    fn from(f: EvolveFailure) -> Self {
        f.error
    }
}

/// Advances `s0` to `s0.time + t_end`, calling every observer at the start,
/// every `record_every` steps and at the end.
pub fn evolve(
    s0: &FieldState,
    coeffs: &GeneralCoefficients,
    cfg: &StepperConfig,
    observers: &mut [&mut dyn Observer],
) -> std::result::Result<EvolveOutput, EvolveFailure> {
    let fail = |error: ZrError, last: Option<FieldState>| EvolveFailure {
        error,
        last_healthy: last,
    };
    cfg.validate().map_err(|e| fail(e, None))?;
    if !s0.is_finite() {
        return Err(fail(ZrError::BlowUp { time: s0.time }, None));
    }
    let mut st = Stepper::new(s0, coeffs)
        .map_err(|e| fail(e, None))?
        .with_dealias(cfg.dealias)
        .with_midpoint_external(cfg.midpoint_external);
    let n_steps = cfg.n_steps();
    let h = cfg.effective_dt();
    let mut last = s0.clone();
    let mut max_imag: f64 = 0.0;
    for obs in observers.iter_mut() {
        obs.observe(&last).map_err(|e| fail(e, Some(last.clone())))?;
    }
    let mut done = 0;
    while done < n_steps {
        let chunk = cfg.record_every.min(n_steps - done);
        if let Err(e) = st.steps(h, chunk) {
            return Err(fail(e, Some(last)));
        }
        done += chunk;
        let (state, residue) = st.state_with_residue();
        if !state.is_finite() {
            return Err(fail(ZrError::BlowUp { time: state.time }, Some(last)));
        }
        max_imag = max_imag.max(residue);
        for obs in observers.iter_mut() {
            if let Err(e) = obs.observe(&state) {
                return Err(fail(e, Some(last)));
            }
        }
        last = state;
    }
    let mut warnings = Vec::new();
    if st.max_phase_step() >= std::f64::consts::PI {
        warnings.push(format!(
            "nonlinear phase per step reached {:.3} rad; reduce dt",
            st.max_phase_step()
        ));
    }
    Ok(EvolveOutput {
        state: last,
        steps: n_steps,
        max_phase_step: st.max_phase_step(),
        max_psi_imag: max_imag,
        warnings,
    })
}

/// Evolves with a [`Recorder`] and returns its record along with the output.
pub fn evolve_recorded(
    s0: &FieldState,
    coeffs: &GeneralCoefficients,
    cfg: &StepperConfig,
    params: Option<PhysicalParams>,
    s_list: Vec<f64>,
    psi_s: f64,
) -> Result<(RunRecord, EvolveOutput)> {
    let mut rec = Recorder::new(params, s_list, psi_s);
    let out = evolve(s0, coeffs, cfg, &mut [&mut rec])?;
    let mut record = rec.into_record();
    for w in &out.warnings {
        record.note(w.clone());
    }
    Ok((record, out))
}
