//! Periodic spectral discretization.
//!
//! The domain is `[-L/2, L/2)` sampled at `n` equispaced nodes. Coefficients
//! follow the convention
//!
//! ```text
//! f̂_j = (1/n) Σ_m f(x_m) exp(-i ξ_j x_m),     ξ_j = 2π j / L,
//! ```
//!
//! and are stored in FFT order: slot `k` holds mode `j = k` for `k < n/2`
//! and `j = k - n` otherwise, so the Nyquist mode `j = -n/2` sits at slot
//! `n/2`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Result, ZrError};

/// Modes kept by the 2/3 rule on an `n`-point grid: `|j| <= n/3`.
///
/// Works for any even `n`; returned in FFT order.
pub fn dealias_mask(n: usize) -> Vec<bool> {
    let cutoff = n / 3;
    (0..n)
        .map(|k| mode_index(k, n).unsigned_abs() as usize <= cutoff)
        .collect()
}

/// Signed mode number stored at FFT slot `k`.
#[inline]
pub fn mode_index(k: usize, n: usize) -> i64 {
    if k < n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Periodic grid with its transform plans.
pub struct SpectralGrid {
    length: f64,
    n: usize,
    dx: f64,
    wavenumbers: Vec<f64>,
    mask: Vec<bool>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralGrid")
            .field("length", &self.length)
            .field("n", &self.n)
            .finish()
    }
}

impl PartialEq for SpectralGrid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl SpectralGrid {
    pub fn new(length: f64, n: usize) -> Result<Arc<Self>> {
        if !(length.is_finite() && length > 0.0) {
            return Err(ZrError::InvalidGrid(format!(
                "period length must be positive, got {length}"
            )));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(ZrError::InvalidGrid(format!(
                "n must be a power of two >= 4, got {n}"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let wavenumbers = (0..n)
            .map(|k| 2.0 * std::f64::consts::PI * mode_index(k, n) as f64 / length)
            .collect();
        Ok(Arc::new(SpectralGrid {
            length,
            n,
            dx: length / n as f64,
            wavenumbers,
            mask: dealias_mask(n),
            forward,
            inverse,
        }))
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_points(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Wavenumbers in FFT order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn dealias_mask(&self) -> &[bool] {
        &self.mask
    }

    /// Spacing between neighbouring wavenumbers, `2π/L`.
    pub fn dxi(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    /// Largest |ξ| kept by the dealiasing mask.
    pub fn resolved_band(&self) -> f64 {
        (self.n / 3) as f64 * self.dxi()
    }

    pub fn node(&self, m: usize) -> f64 {
        -0.5 * self.length + m as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.node(m)).collect()
    }

    /// FFT slot of the grid wavenumber `xi`, if it is one (to 1e-9 relative).
    pub fn slot_of_wavenumber(&self, xi: f64) -> Option<usize> {
        let j = xi / self.dxi();
        let jr = j.round();
        if (j - jr).abs() > 1e-9 * j.abs().max(1.0) {
            return None;
        }
        let j = jr as i64;
        let half = (self.n / 2) as i64;
        if j < -half || j >= half {
            return None;
        }
        Some(if j >= 0 { j as usize } else { (j + self.n as i64) as usize })
    }

    pub fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    /// In-place forward transform of nodal samples to coefficients.
    pub fn forward_in_place(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        self.forward.process_with_scratch(buf, scratch);
        let inv_n = 1.0 / self.n as f64;
        for (k, v) in buf.iter_mut().enumerate() {
            // (-1)^j recentres the transform on x_0 = -L/2
            *v *= if k % 2 == 0 { inv_n } else { -inv_n };
        }
    }

    /// In-place inverse transform of coefficients to nodal samples.
    pub fn inverse_in_place(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        for v in buf.iter_mut().skip(1).step_by(2) {
            *v = -*v;
        }
        self.inverse.process_with_scratch(buf, scratch);
    }

    fn forward_vec(&self, mut buf: Vec<Complex64>) -> Vec<Complex64> {
        let mut scratch = vec![Complex64::default(); self.scratch_len()];
        self.forward_in_place(&mut buf, &mut scratch);
        buf
    }

    fn inverse_vec(&self, mut buf: Vec<Complex64>) -> Vec<Complex64> {
        let mut scratch = vec![Complex64::default(); self.scratch_len()];
        self.inverse_in_place(&mut buf, &mut scratch);
        buf
    }
}

fn check_same(a: &Arc<SpectralGrid>, b: &Arc<SpectralGrid>) -> Result<()> {
    if Arc::ptr_eq(a, b) || **a == **b {
        Ok(())
    } else {
        Err(ZrError::GridMismatch(format!(
            "n={} L={} vs n={} L={}",
            a.n, a.length, b.n, b.length
        )))
    }
}

/// Complex samples at the grid nodes.
#[derive(Clone, Debug)]
pub struct ComplexField {
    grid: Arc<SpectralGrid>,
    values: Vec<Complex64>,
}

/// Real samples at the grid nodes.
#[derive(Clone, Debug)]
pub struct RealField {
    grid: Arc<SpectralGrid>,
    values: Vec<f64>,
}

/// Fourier coefficients in FFT order.
#[derive(Clone, Debug)]
pub struct SpectralCoefficients {
    grid: Arc<SpectralGrid>,
    values: Vec<Complex64>,
}

macro_rules! field_common {
    ($ty:ident, $elem:ty) => {
        impl $ty {
            pub fn new(grid: &Arc<SpectralGrid>, values: Vec<$elem>) -> Result<Self> {
                if values.len() != grid.n_points() {
                    return Err(ZrError::GridMismatch(format!(
                        "expected {} samples, got {}",
                        grid.n_points(),
                        values.len()
                    )));
                }
                Ok($ty {
                    grid: Arc::clone(grid),
                    values,
                })
            }

            pub fn zeros(grid: &Arc<SpectralGrid>) -> Self {
                $ty {
                    grid: Arc::clone(grid),
                    values: vec![<$elem>::default(); grid.n_points()],
                }
            }

            pub fn grid(&self) -> &Arc<SpectralGrid> {
                &self.grid
            }

            pub fn values(&self) -> &[$elem] {
                &self.values
            }

            pub fn values_mut(&mut self) -> &mut [$elem] {
                &mut self.values
            }

            pub fn into_values(self) -> Vec<$elem> {
                self.values
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }
        }
    };
}

field_common!(ComplexField, Complex64);
field_common!(RealField, f64);
field_common!(SpectralCoefficients, Complex64);

impl ComplexField {
    pub fn from_fn(grid: &Arc<SpectralGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n_points()).map(|m| f(grid.node(m))).collect();
        ComplexField {
            grid: Arc::clone(grid),
            values,
        }
    }

    /// Discrete `∫|f|² dx` (rectangle rule, exact for trigonometric polynomials).
    pub fn l2_norm_sq(&self) -> f64 {
        self.grid.dx() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        check_same(&self.grid, &other.grid)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(ComplexField {
            grid: Arc::clone(&self.grid),
            values,
        })
    }

    pub fn real_part(&self) -> RealField {
        RealField {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|v| v.re).collect(),
        }
    }

    pub fn max_abs_imag(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.im.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }
}

impl RealField {
    pub fn from_fn(grid: &Arc<SpectralGrid>, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n_points()).map(|m| f(grid.node(m))).collect();
        RealField {
            grid: Arc::clone(grid),
            values,
        }
    }

    pub fn to_complex(&self) -> ComplexField {
        ComplexField {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.dx() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

impl SpectralCoefficients {
    /// Coefficient of the signed mode `j`, `-n/2 <= j < n/2`.
    pub fn mode(&self, j: i64) -> Complex64 {
        let n = self.grid.n_points() as i64;
        let k = if j >= 0 { j } else { j + n };
        self.values[k as usize]
    }

    /// Squared-coefficient sum, `Σ_j |f̂_j|²`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }
}

pub fn forward_transform(f: &ComplexField) -> SpectralCoefficients {
    SpectralCoefficients {
        grid: Arc::clone(&f.grid),
        values: f.grid.forward_vec(f.values.clone()),
    }
}

pub fn inverse_transform(c: &SpectralCoefficients) -> ComplexField {
    ComplexField {
        grid: Arc::clone(&c.grid),
        values: c.grid.inverse_vec(c.values.clone()),
    }
}

/// Multiplier `(iξ)^order` for one slot; odd orders drop the Nyquist mode.
#[inline]
pub fn derivative_multiplier(grid: &SpectralGrid, k: usize, order: u32) -> Complex64 {
    let n = grid.n_points();
    if order == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if order % 2 == 1 && k == n / 2 {
        return Complex64::default();
    }
    Complex64::new(0.0, grid.wavenumbers()[k]).powu(order)
}

pub fn spectral_derivative(f: &ComplexField, order: u32) -> ComplexField {
    let mut coeffs = forward_transform(f);
    let grid = Arc::clone(&f.grid);
    for (k, v) in coeffs.values.iter_mut().enumerate() {
        *v *= derivative_multiplier(&grid, k, order);
    }
    inverse_transform(&coeffs)
}

/// `(1+|ξ|)^(2s)`, the squared bracket weight.
#[inline]
pub fn bracket_weight(xi: f64, s: f64) -> f64 {
    (1.0 + xi.abs()).powf(2.0 * s)
}

pub fn sobolev_norm_coeffs(c: &SpectralCoefficients, s: f64) -> f64 {
    let sum: f64 = c
        .values
        .iter()
        .zip(c.grid.wavenumbers())
        .map(|(v, &xi)| bracket_weight(xi, s) * v.norm_sqr())
        .sum();
    (c.grid.length() * sum).sqrt()
}

/// `(L Σ_j (1+|ξ_j|)^(2s) |f̂_j|²)^(1/2)`.
pub fn sobolev_norm(f: &ComplexField, s: f64) -> f64 {
    sobolev_norm_coeffs(&forward_transform(f), s)
}

#[must_use]
pub fn dealias(c: &SpectralCoefficients) -> SpectralCoefficients {
    let mut out = c.clone();
    for (v, &keep) in out.values.iter_mut().zip(c.grid.dealias_mask()) {
        if !keep {
            *v = Complex64::default();
        }
    }
    out
}
