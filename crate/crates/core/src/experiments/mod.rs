//! Reproducible experiment pipelines. Each returns a [`RunRecord`] whose
//! verdict is judged against the experiment's acceptance band.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentKind, ExperimentSpec, InitialData, Preset};
use crate::error::Result;
use crate::evolution::StepperConfig;
use crate::grid::{forward_transform, sobolev_norm_coeffs, ComplexField, RealField, SpectralGrid};
use crate::model::{
    coefficients_from_params, iteration_schedule, plane_wave_state, FieldState,
    GeneralCoefficients, PhysicalParams,
};
use crate::record::RunRecord;

pub mod c2probe;
pub mod conserve;
pub mod decohere;
pub mod growth;
pub mod inflate;
pub mod simulate;

pub use c2probe::run_c2probe;
pub use conserve::run_conserve;
pub use decohere::run_decohere;
pub use growth::run_growth;
pub use inflate::run_inflate;
pub use simulate::run_simulate;

/// Required `r²` before a power-law fit may pass.
pub const MIN_R_SQUARED: f64 = 0.98;

/// Dispatches on `spec.experiment.kind`.
pub fn run(spec: &ExperimentSpec) -> Result<RunRecord> {
    spec.validate()?;
    match spec.experiment.kind {
        ExperimentKind::Simulate => run_simulate(spec),
        ExperimentKind::Conserve => run_conserve(spec),
        ExperimentKind::Inflate => run_inflate(spec),
        ExperimentKind::C2probe => run_c2probe(spec),
        ExperimentKind::Decohere => run_decohere(spec),
        ExperimentKind::Growth => run_growth(spec),
    }
}

/// Evolution coefficients and, for the physical preset, the parameters the
/// conserved functionals need.
pub fn coefficients(spec: &ExperimentSpec) -> Result<(GeneralCoefficients, Option<PhysicalParams>)> {
    match spec.params.preset {
        Preset::Normalized => Ok((GeneralCoefficients::normalized(), None)),
        Preset::Physical => {
            let p = spec.params.physical()?;
            Ok((coefficients_from_params(&p)?, Some(p)))
        }
    }
}

pub fn stepper_config(spec: &ExperimentSpec) -> StepperConfig {
    StepperConfig {
        dt: spec.stepper.dt,
        t_end: spec.stepper.t_end,
        dealias: spec.stepper.dealias,
        record_every: spec.stepper.record_every,
        midpoint_external: spec.stepper.midpoint_external,
    }
}

pub fn spec_grid(spec: &ExperimentSpec) -> Result<Arc<SpectralGrid>> {
    SpectralGrid::new(spec.grid.length, spec.grid.n)
}

/// Initial state described by the `[experiment]` data keys.
pub fn initial_state(
    spec: &ExperimentSpec,
    grid: &Arc<SpectralGrid>,
    coeffs: &GeneralCoefficients,
) -> Result<FieldState> {
    let e = &spec.experiment;
    let (a, w, kick) = (e.amplitude, e.width, e.kick);
    let gauss = |x: f64, c: f64| (-((x - c) / w).powi(2)).exp();
    match e.data {
        InitialData::Zero => Ok(FieldState::zeros(grid)),
        InitialData::PlaneWave => Ok(plane_wave_state(grid, a, e.kappa, 0.0, 0.0, coeffs)?.0),
        InitialData::Gaussian => FieldState::new(
            ComplexField::from_fn(grid, |x| Complex64::from_polar(a * gauss(x, 0.0), kick * x)),
            RealField::from_fn(grid, |x| e.psi_amplitude * gauss(x, 0.5 * w)),
            RealField::from_fn(grid, |x| e.psi_amplitude * gauss(x, -0.5 * w)),
            0.0,
        ),
        InitialData::Random => {
            // a few low modes with random phases under a Gaussian envelope
            let mut rng = ChaCha8Rng::seed_from_u64(e.seed);
            let modes: Vec<(f64, f64, f64)> = (0..6)
                .map(|_| {
                    (
                        rng.gen_range(-2.0..2.0),
                        rng.gen_range(0.0..2.0 * PI),
                        rng.gen_range(0.2..1.0),
                    )
                })
                .collect();
            let psi: Vec<(f64, f64)> = (0..2).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let b = ComplexField::from_fn(grid, |x| {
                let s: Complex64 = modes
                    .iter()
                    .map(|&(k, ph, m)| Complex64::from_polar(m, k * x + ph))
                    .sum();
                s * (a * gauss(x, 0.0) / modes.len() as f64)
            });
            FieldState::new(
                b,
                RealField::from_fn(grid, |x| e.psi_amplitude * psi[0].0 * gauss(x, psi[0].1 * w)),
                RealField::from_fn(grid, |x| e.psi_amplitude * psi[1].0 * gauss(x, psi[1].1 * w)),
                0.0,
            )
        }
    }
}

/// Logs the global iteration schedule predicted for the initial state.
pub fn log_schedule(record: &mut RunRecord, s0: &FieldState, eps: f64) {
    let n1 = sobolev_norm_coeffs(&forward_transform(&s0.psi1.to_complex()), -0.5);
    let n2 = sobolev_norm_coeffs(&forward_transform(&s0.psi2.to_complex()), -0.5);
    let nb = s0.b.l2_norm();
    match iteration_schedule(n1, n2, nb, eps) {
        Ok(s) => {
            record.set("schedule_step", s.step);
            record.set("schedule_count", s.count as f64);
            record.set("schedule_span", s.span());
        }
        Err(e) => record.note(format!("iteration schedule unavailable: {e}")),
    }
}

/// Rayon pool honouring `ZRLAB_THREADS` (0 or unset = automatic).
pub fn thread_pool() -> rayon::ThreadPool {
    let n = std::env::var("ZRLAB_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .expect("thread pool")
}
