//! Continuous-frequency oracles: hat data, the resonance kernel, the
//! first Duhamel iterate of the transport fields, the small-dispersion
//! solution and the scaling embedding.
//!
//! Fourier transforms here are unitary, `f̂(ξ) = (2π)^{-1/2} ∫ f(x) e^{-ixξ} dx`,
//! so that `‖f‖²_{H^s} = ∫ (1+|ξ|)^{2s} |f̂(ξ)|² dξ` agrees with the grid norm.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ZrError};
use crate::grid::{bracket_weight, ComplexField, RealField, SpectralCoefficients, SpectralGrid};
use crate::quadrature::GaussRule;

pub const DEFAULT_QUAD_NODES: usize = 64;

/// `amplitude · χ_[a,b]` in frequency.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HatDatum {
    pub amplitude: f64,
    pub a: f64,
    pub b: f64,
    pub tag: String,
}

impl HatDatum {
    pub fn new(amplitude: f64, a: f64, b: f64, tag: impl Into<String>) -> Result<Self> {
        if !(b > a) || !amplitude.is_finite() {
            return Err(ZrError::Constraint(format!("hat support [{a}, {b}] is empty")));
        }
        Ok(HatDatum {
            amplitude,
            a,
            b,
            tag: tag.into(),
        })
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn value(&self, xi: f64) -> f64 {
        if xi >= self.a && xi <= self.b {
            self.amplitude
        } else {
            0.0
        }
    }

    pub fn scaled(&self, factor: f64) -> HatDatum {
        HatDatum {
            amplitude: self.amplitude * factor,
            ..self.clone()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HatVariant {
    /// Bumps on `[-N-1/N, -N]` and `[N+1, N+1+1/N]`; resonant with `ψ₁`.
    InflationF,
    /// Bumps on `[-N-1/N, -N]` and `[N-1, N-1+1/N]`; resonant with `ψ₂`.
    InflationG,
    /// Single bump on `[0, 1/N]`.
    C2B0,
}

impl HatVariant {
    pub fn name(self) -> &'static str {
        match self {
            HatVariant::InflationF => "inflation_f",
            HatVariant::InflationG => "inflation_g",
            HatVariant::C2B0 => "c2_B0",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "inflation_f" | "f" => Some(HatVariant::InflationF),
            "inflation_g" | "g" => Some(HatVariant::InflationG),
            "c2_B0" | "c2_b0" => Some(HatVariant::C2B0),
            _ => None,
        }
    }
}

/// Hat data with amplitude `N^{1/2-k}`.
pub fn build_fn(n: u32, k: f64, variant: HatVariant) -> Result<Vec<HatDatum>> {
    if n < 2 {
        return Err(ZrError::Constraint(format!("N must be at least 2, got {n}")));
    }
    let nf = n as f64;
    let amp = nf.powf(0.5 - k);
    let w = 1.0 / nf;
    Ok(match variant {
        HatVariant::InflationF => vec![
            HatDatum::new(amp, -nf - w, -nf, "A")?,
            HatDatum::new(amp, nf + 1.0, nf + 1.0 + w, "B")?,
        ],
        HatVariant::InflationG => vec![
            HatDatum::new(amp, -nf - w, -nf, "A")?,
            HatDatum::new(amp, nf - 1.0, nf - 1.0 + w, "B")?,
        ],
        HatVariant::C2B0 => vec![HatDatum::new(amp, 0.0, w, "B0")?],
    })
}

/// Transport datum `N^{1/2-l} χ_[-1/N, 1/N]` paired with the `c2_B0` bump.
pub fn c2_psi10(n: u32, l: f64) -> Result<HatDatum> {
    if n < 2 {
        return Err(ZrError::Constraint(format!("N must be at least 2, got {n}")));
    }
    let nf = n as f64;
    HatDatum::new(nf.powf(0.5 - l), -1.0 / nf, 1.0 / nf, "psi10")
}

fn sorted_breakpoints(mut pts: Vec<f64>) -> Vec<f64> {
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-15 * a.abs().max(1.0));
    pts
}

/// `‖Σ hats‖_{H^s}` by quadrature between support endpoints.
pub fn hat_sobolev_norm(hats: &[HatDatum], s: f64, rule: &GaussRule) -> f64 {
    let pts = sorted_breakpoints(hats.iter().flat_map(|h| [h.a, h.b]).collect());
    let mut total = 0.0;
    for w in pts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let amp: f64 = hats.iter().map(|h| h.value(mid)).sum();
        if amp != 0.0 {
            let int: f64 = rule.integrate(w[0], w[1], |x| bracket_weight(x, s));
            total += amp * amp * int;
        }
    }
    total.sqrt()
}

/// Rescales the hats to unit `H^s` norm; returns the data and the former norm.
pub fn normalize_hats(hats: &[HatDatum], s: f64, rule: &GaussRule) -> (Vec<HatDatum>, f64) {
    let norm = hat_sobolev_norm(hats, s, rule);
    (hats.iter().map(|h| h.scaled(1.0 / norm)).collect(), norm)
}

/// `(e^{ita} − 1)/(ia)`, i.e. `∫₀ᵗ e^{ias} ds`.
pub fn resonance_phi(t: f64, a: f64) -> Complex64 {
    let z = t * a;
    if z.abs() < 1e-6 {
        let i = Complex64::i();
        t * (1.0 + i * z / 2.0 - z * z / 6.0)
    } else {
        let (s, c) = z.sin_cos();
        Complex64::new(s, 1.0 - c) / a
    }
}

/// `L̂(ξ,t) = e^{-itξ²} ∫ B̂₀(ξ₁) ψ̂₁₀(ξ−ξ₁) φ(t, (ξ−ξ₁)(ξ+ξ₁−1)) dξ₁`.
pub fn l_hat(xi: f64, t: f64, b0: &HatDatum, psi10: &HatDatum, rule: &GaussRule) -> Complex64 {
    let lo = b0.a.max(xi - psi10.b);
    let hi = b0.b.min(xi - psi10.a);
    if !(hi > lo) {
        return Complex64::default();
    }
    let amp = b0.amplitude * psi10.amplitude;
    let inner: Complex64 = rule.integrate(lo, hi, |x1| resonance_phi(t, (xi - x1) * (xi + x1 - 1.0)));
    Complex64::from_polar(amp, -t * xi * xi) * inner
}

/// `‖L(·,t)‖_{H^k}` by outer quadrature in `ξ`.
pub fn l_norm(t: f64, b0: &HatDatum, psi10: &HatDatum, k: f64, rule: &GaussRule) -> f64 {
    let pts = sorted_breakpoints(vec![
        b0.a + psi10.a,
        b0.a + psi10.b,
        b0.b + psi10.a,
        b0.b + psi10.b,
    ]);
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += rule.integrate(w[0], w[1], |xi| {
            bracket_weight(xi, k) * l_hat(xi, t, b0, psi10, rule).norm_sqr()
        });
    }
    total.sqrt()
}

/// Same norm with the time integral done by quadrature instead of `φ`.
pub fn l_norm_time_quadrature(
    t: f64,
    b0: &HatDatum,
    psi10: &HatDatum,
    k: f64,
    rule: &GaussRule,
) -> f64 {
    let (lo, hi) = (b0.a + psi10.a, b0.b + psi10.b);
    let panels = 6;
    let amp = b0.amplitude * psi10.amplitude;
    let integrand = |xi: f64| {
        let inner = |tp: f64| -> Complex64 {
            let a = b0.a.max(xi - psi10.b);
            let b = b0.b.min(xi - psi10.a);
            if !(b > a) {
                return Complex64::default();
            }
            let v: Complex64 = rule.integrate(a, b, |x1| {
                Complex64::from_polar(1.0, -tp * x1 * x1 - tp * (xi - x1))
            });
            Complex64::from_polar(amp, -(t - tp) * xi * xi) * v
        };
        let lhat: Complex64 = rule.integrate(0.0, t, inner);
        bracket_weight(xi, k) * lhat.norm_sqr()
    };
    let w = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = lo + p as f64 * w;
        // the integrand has kinks at the inner support switches
        let mut cuts = vec![a, a + w];
        for c in [b0.a + psi10.b, b0.b + psi10.a] {
            if c > a && c < a + w {
                cuts.push(c);
            }
        }
        let cuts = sorted_breakpoints(cuts);
        for s in cuts.windows(2) {
            total += rule.integrate(s[0], s[1], &integrand);
        }
    }
    total.sqrt()
}

/// Coefficients of one transport equation `∂tψ + speed ∂xψ = source ∂x|B|²`
/// driven by the free Schrödinger flow `i∂tB + dispersion ∂²xB = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransportChannel {
    pub dispersion: f64,
    pub speed: f64,
    pub source: f64,
}

impl TransportChannel {
    /// `ψ₊` of the normalized system.
    pub const PLUS: TransportChannel = TransportChannel {
        dispersion: 1.0,
        speed: 1.0,
        source: 1.0,
    };
    /// `ψ₋` of the normalized system.
    pub const MINUS: TransportChannel = TransportChannel {
        dispersion: 1.0,
        speed: -1.0,
        source: 1.0,
    };
}

/// First Duhamel iterate of the transport field at frequency `ξ`, time `t`,
/// for data `ψ(0) = 0`, `B(0) = Σ hats`.
pub fn first_order_transport_hat(
    xi: f64,
    t: f64,
    hats: &[HatDatum],
    ch: TransportChannel,
    rule: &GaussRule,
) -> Complex64 {
    let mut acc = Complex64::default();
    for p in hats {
        for q in hats {
            let lo = p.a.max(q.a + xi);
            let hi = p.b.min(q.b + xi);
            if !(hi > lo) {
                continue;
            }
            let v: Complex64 = rule.integrate(lo, hi, |xa| {
                resonance_phi(t, -xi * (ch.dispersion * (2.0 * xa - xi) - ch.speed))
            });
            acc += v * (p.amplitude * q.amplitude);
        }
    }
    let pre = Complex64::new(0.0, ch.source * xi) * Complex64::from_polar(1.0, -ch.speed * xi * t);
    pre * acc / (2.0 * PI).sqrt()
}

fn pair_breakpoints(hats: &[HatDatum]) -> Vec<f64> {
    let mut pts = Vec::new();
    for p in hats {
        for q in hats {
            pts.extend([p.a - q.a, p.a - q.b, p.b - q.a, p.b - q.b]);
        }
    }
    sorted_breakpoints(pts)
}

/// `H^l` norm of the first Duhamel iterate of one transport channel.
pub fn first_order_transport(
    t: f64,
    hats: &[HatDatum],
    ch: TransportChannel,
    l: f64,
    rule: &GaussRule,
) -> f64 {
    let pts = pair_breakpoints(hats);
    let mut total = 0.0;
    for w in pts.windows(2) {
        let panels = 2;
        total += rule.integrate_composite(w[0], w[1], panels, |xi| {
            bracket_weight(xi, l) * first_order_transport_hat(xi, t, hats, ch, rule).norm_sqr()
        });
    }
    total.sqrt()
}

/// [`first_order_transport`] for `ψ₁` of the normalized system.
pub fn first_order_psi1(t: f64, hats: &[HatDatum], l: f64) -> f64 {
    first_order_transport(t, hats, TransportChannel::PLUS, l, &GaussRule::new(DEFAULT_QUAD_NODES))
}

/// Brute-force version of [`first_order_transport`]: explicit time integral
/// of `e^{-i speed ξ (t−s)} · source · iξ · (|B(s)|²)^(ξ)`.
pub fn first_order_time_quadrature(
    t: f64,
    hats: &[HatDatum],
    ch: TransportChannel,
    l: f64,
    rule: &GaussRule,
) -> f64 {
    let density_hat = |xi: f64, s: f64| -> Complex64 {
        let mut acc = Complex64::default();
        for p in hats {
            for q in hats {
                let lo = p.a.max(q.a + xi);
                let hi = p.b.min(q.b + xi);
                if hi > lo {
                    let v: Complex64 = rule.integrate(lo, hi, |xa| {
                        let xb = xa - xi;
                        Complex64::from_polar(1.0, -ch.dispersion * s * (xa * xa - xb * xb))
                    });
                    acc += v * (p.amplitude * q.amplitude);
                }
            }
        }
        acc / (2.0 * PI).sqrt()
    };
    let psi_hat = |xi: f64| -> Complex64 {
        let v: Complex64 = rule.integrate_composite(0.0, t, 4, |s| {
            Complex64::from_polar(1.0, -ch.speed * xi * (t - s)) * density_hat(xi, s)
        });
        Complex64::new(0.0, ch.source * xi) * v
    };
    let pts = pair_breakpoints(hats);
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += rule.integrate_composite(w[0], w[1], 2, |xi| {
            bracket_weight(xi, l) * psi_hat(xi).norm_sqr()
        });
    }
    total.sqrt()
}

/// Projects hat data onto a grid: each coefficient receives the mean of the
/// continuous transform over its frequency cell.
pub fn hats_to_coefficients(grid: &Arc<SpectralGrid>, hats: &[HatDatum]) -> Result<SpectralCoefficients> {
    let n = grid.n_points();
    let dxi = grid.dxi();
    let band = grid.resolved_band();
    let scale = (2.0 * PI).sqrt() / grid.length();
    let mut c = vec![Complex64::default(); n];
    for h in hats {
        if h.a.abs().max(h.b.abs()) > band + 1e-9 {
            return Err(ZrError::InvalidGrid(format!(
                "hat [{}, {}] exceeds the resolved band {band}",
                h.a, h.b
            )));
        }
        let j_lo = (h.a / dxi - 0.5).floor() as i64;
        let j_hi = (h.b / dxi + 0.5).ceil() as i64;
        for j in j_lo..=j_hi {
            let cell_lo = (j as f64 - 0.5) * dxi;
            let overlap = h.b.min(cell_lo + dxi) - h.a.max(cell_lo);
            if overlap > 0.0 {
                let slot = j.rem_euclid(n as i64) as usize;
                c[slot] += scale * h.amplitude * overlap / dxi;
            }
        }
    }
    SpectralCoefficients::new(grid, c)
}

/// Moves every endpoint down to the nearest frequency-cell edge at or below
/// it, so that each hat covers whole cells and projects without edge loss.
pub fn snap_to_cells(grid: &SpectralGrid, hats: &[HatDatum]) -> Vec<HatDatum> {
    let dxi = grid.dxi();
    let snap = |v: f64| ((v / dxi - 0.5 + 1e-9).floor() + 0.5) * dxi;
    hats.iter()
        .map(|h| HatDatum {
            a: snap(h.a),
            b: snap(h.b),
            ..h.clone()
        })
        .collect()
}

/// Nodal field of projected hat data.
pub fn hats_to_field(grid: &Arc<SpectralGrid>, hats: &[HatDatum]) -> Result<ComplexField> {
    Ok(crate::grid::inverse_transform(&hats_to_coefficients(grid, hats)?))
}

/// `Ã(x,t) = e^{-it(ψ₊₀+ψ₋₀)} B̃₀`.
pub fn small_dispersion_solution(
    t: f64,
    b0: &ComplexField,
    psi_plus0: &RealField,
    psi_minus0: &RealField,
) -> Result<ComplexField> {
    for g in [psi_plus0.grid(), psi_minus0.grid()] {
        if **g != **b0.grid() {
            return Err(ZrError::GridMismatch("small-dispersion data on different grids".into()));
        }
    }
    let vals = b0
        .values()
        .iter()
        .zip(psi_plus0.values().iter().zip(psi_minus0.values()))
        .map(|(b, (p, m))| b * Complex64::from_polar(1.0, -t * (p + m)))
        .collect();
    ComplexField::new(b0.grid(), vals)
}

/// Trigonometric interpolant of a grid field at arbitrary `y` (periodic).
pub fn trig_interpolate(coeffs: &SpectralCoefficients, y: f64) -> Complex64 {
    let grid = coeffs.grid();
    let n = grid.n_points();
    let xi = grid.wavenumbers();
    let c = coeffs.values();
    let mut acc = Complex64::default();
    for k in 0..n {
        if k == n / 2 {
            // split the Nyquist mode symmetrically so real data stay real
            acc += c[k] * (xi[k] * y).cos();
        } else {
            acc += c[k] * Complex64::from_polar(1.0, xi[k] * y);
        }
    }
    acc
}

/// Parameters of `B(x,t) = LΘ e^{-ic²t} e^{icx} B̃(Lμ(x−ct), L²t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Embedding {
    pub l: f64,
    pub theta: f64,
    pub mu: f64,
    pub c: f64,
}

/// Evaluates the embedded field at `(x, t)`, given `B̃` at time `L²t`.
pub fn scaling_embed(b_tilde: &SpectralCoefficients, e: Embedding, x: f64, t: f64) -> Complex64 {
    let y = e.l * e.mu * (x - e.c * t);
    let phase = Complex64::from_polar(e.l * e.theta, e.c * x - e.c * e.c * t);
    phase * trig_interpolate(b_tilde, y)
}

/// `r · B̃(r x)` sampled on the grid of `b`, with a warning when the dilated
/// field carries energy beyond the band the grid resolves.
pub fn dilate(b: &ComplexField, r: f64) -> (ComplexField, Option<String>) {
    let coeffs = crate::grid::forward_transform(b);
    let grid = b.grid();
    let band = grid.resolved_band();
    let total = coeffs.energy();
    let lost: f64 = coeffs
        .values()
        .iter()
        .zip(grid.wavenumbers())
        .filter(|(_, x)| r * x.abs() > band)
        .map(|(c, _)| c.norm_sqr())
        .sum();
    let warning = (total > 0.0 && lost > 1e-10 * total)
        .then(|| format!("dilation by {r} moves {:.2e} of the energy past the resolved band", lost / total));
    let vals = grid
        .nodes()
        .iter()
        .map(|&x| r * trig_interpolate(&coeffs, r * x))
        .collect();
    (ComplexField::new(grid, vals).expect("grid length"), warning)
}

fn smooth_step(y: f64) -> f64 {
    // 0 for y ≤ 0, 1 for y ≥ 1, C∞ in between
    let f = |v: f64| if v > 0.0 { (-1.0 / v).exp() } else { 0.0 };
    let (a, b) = (f(y), f(1.0 - y));
    if a + b == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Smooth plateau: 1 on `|x| ≤ 1`, 0 on `|x| ≥ 2`.
pub fn plateau_bump(x: f64) -> f64 {
    smooth_window(x, 1.0, 2.0)
}

/// 1 on `|x| ≤ inner`, 0 on `|x| ≥ outer`, smooth in between.
pub fn smooth_window(x: f64, inner: f64, outer: f64) -> f64 {
    1.0 - smooth_step((x.abs() - inner) / (outer - inner))
}

/// `cos(3x) sin(x)/x`, equal to 1 at the origin.
pub fn psi_plus0_profile(x: f64) -> f64 {
    let sinc = if x.abs() < 1e-6 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    };
    (3.0 * x).cos() * sinc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::sobolev_norm_coeffs;

    fn rule() -> GaussRule {
        GaussRule::new(DEFAULT_QUAD_NODES)
    }

    #[test]
    fn c2_datum_example() {
        let h = build_fn(10, 0.0, HatVariant::C2B0).unwrap();
        assert_eq!(h.len(), 1);
        assert!((h[0].amplitude - 10f64.sqrt()).abs() < 1e-15);
        assert_eq!((h[0].a, h[0].b), (0.0, 0.1));
    }

    #[test]
    fn inflation_amplitude_one_at_half() {
        let h = build_fn(4, 0.5, HatVariant::InflationF).unwrap();
        assert!(h.iter().all(|d| d.amplitude == 1.0));
        assert_eq!((h[0].a, h[0].b), (-4.25, -4.0));
        assert_eq!((h[1].a, h[1].b), (5.0, 5.25));
        let g = build_fn(4, 0.5, HatVariant::InflationG).unwrap();
        assert_eq!((g[1].a, g[1].b), (3.0, 3.25));
        assert!(build_fn(1, 0.0, HatVariant::C2B0).is_err());
    }

    #[test]
    fn hat_norm_against_closed_form() {
        // N^{1-2k} ∫_N^{N+1/N} (1+ξ)^{2k} dξ for one bump, in closed form
        let (n, k) = (8u32, 0.25);
        let nf = n as f64;
        let exact_a =
            nf.powf(1.0 - 2.0 * k) * ((1.0 + nf + 1.0 / nf).powf(2.0 * k + 1.0) - (1.0 + nf).powf(2.0 * k + 1.0)) / (2.0 * k + 1.0);
        let h = build_fn(n, k, HatVariant::InflationF).unwrap();
        let got = hat_sobolev_norm(&h[..1], k, &rule());
        assert!((got * got - exact_a).abs() < 1e-12 * exact_a);
        let (normed, raw) = normalize_hats(&h, k, &rule());
        assert!(raw > 1.0 && raw < 1.5);
        assert!((hat_sobolev_norm(&normed, k, &rule()) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phi_examples() {
        assert_eq!(resonance_phi(0.7, 0.0), Complex64::new(0.7, 0.0));
        assert_eq!(resonance_phi(0.0, 3.0), Complex64::default());
        let v = resonance_phi(1.0, PI);
        assert!((v - Complex64::new(0.0, 2.0 / PI)).norm() < 1e-15);
    }

    #[test]
    fn phi_is_continuous_at_series_switch() {
        for t in [1e-3, 0.5, 3.0] {
            let a = 1e-6 / t;
            let below = resonance_phi(t, a * (1.0 - 1e-9));
            let above = resonance_phi(t, a * (1.0 + 1e-9));
            assert!((below - above).norm() / below.norm() < 1e-9);
        }
    }

    #[test]
    fn l_hat_vanishes_on_disjoint_supports() {
        let b0 = HatDatum::new(1.0, 0.0, 0.1, "").unwrap();
        let p = HatDatum::new(1.0, -0.1, 0.1, "").unwrap();
        assert_eq!(l_hat(5.0, 0.1, &b0, &p, &rule()), Complex64::default());
    }

    #[test]
    fn l_hat_small_time_regime() {
        let (n, k, l) = (64u32, 0.0, -1.0);
        let b0 = &build_fn(n, k, HatVariant::C2B0).unwrap()[0];
        let p = c2_psi10(n, l).unwrap();
        let t = 1e-3;
        let xi = 0.5 / n as f64;
        // at ξ in the middle of the common support the overlap is the whole B₀ cell
        let got = l_hat(xi, t, b0, &p, &rule()) * Complex64::from_polar(1.0, t * xi * xi);
        let nf = n as f64;
        let expected = t * nf.powf(-l - k);
        assert!((got.re - expected).abs() < 1e-3 * expected);
        assert!(got.im.abs() < 1e-2 * expected);
    }

    #[test]
    fn l_norm_matches_time_quadrature() {
        let (n, k, l, t) = (64u32, 0.0, -1.0, 0.01);
        let b0 = &build_fn(n, k, HatVariant::C2B0).unwrap()[0];
        let p = c2_psi10(n, l).unwrap();
        let a = l_norm(t, b0, &p, k, &rule());
        let b = l_norm_time_quadrature(t, b0, &p, k, &rule());
        assert!((a - b).abs() < 1e-6 * b, "{a} {b}");
    }

    #[test]
    fn first_order_vanishes_at_zero_and_is_linear_early() {
        let hats = normalize_hats(&build_fn(32, 0.25, HatVariant::InflationF).unwrap(), 0.25, &rule()).0;
        assert_eq!(first_order_psi1(0.0, &hats, 0.25), 0.0);
        let a = first_order_psi1(0.01, &hats, 0.25);
        let b = first_order_psi1(0.02, &hats, 0.25);
        assert!((b / a - 2.0).abs() < 0.1, "{}", b / a);
    }

    #[test]
    fn first_order_matches_time_quadrature() {
        let hats = normalize_hats(&build_fn(16, 0.25, HatVariant::InflationF).unwrap(), 0.25, &rule()).0;
        let r = GaussRule::new(24);
        let a = first_order_transport(0.1, &hats, TransportChannel::PLUS, 0.25, &r);
        let b = first_order_time_quadrature(0.1, &hats, TransportChannel::PLUS, 0.25, &r);
        assert!((a - b).abs() < 1e-4 * b, "{a} {b}");
    }

    #[test]
    fn projection_preserves_norm() {
        let n = 16u32;
        let hats = build_fn(n, 0.25, HatVariant::InflationF).unwrap();
        let k = 4.0;
        let grid = SpectralGrid::new(2.0 * PI * n as f64 * k, 1 << 13).unwrap();
        // endpoints on cell centres lose half a cell at each end
        let c = hats_to_coefficients(&grid, &hats).unwrap();
        let disc = sobolev_norm_coeffs(&c, 0.25);
        let cont = hat_sobolev_norm(&hats, 0.25, &rule());
        assert!((disc * disc / (cont * cont) - 3.5 / 4.0).abs() < 1e-3);
        let snapped = snap_to_cells(&grid, &hats);
        assert!((snapped[1].width() - hats[1].width()).abs() < 1e-12);
        let c = hats_to_coefficients(&grid, &snapped).unwrap();
        let disc = sobolev_norm_coeffs(&c, 0.25);
        let cont = hat_sobolev_norm(&snapped, 0.25, &rule());
        assert!((disc - cont).abs() < 1e-5 * cont, "{disc} {cont}");
        let small = SpectralGrid::new(2.0 * PI * 16.0, 64).unwrap();
        assert!(hats_to_coefficients(&small, &hats).is_err());
    }

    #[test]
    fn small_dispersion_examples() {
        let g = SpectralGrid::new(20.0, 64).unwrap();
        let b0 = ComplexField::from_fn(&g, |x| Complex64::new(plateau_bump(x), 0.1 * x));
        let zero = RealField::zeros(&g);
        let same = small_dispersion_solution(0.0, &b0, &zero, &zero).unwrap();
        assert_eq!(same.values(), b0.values());
        let half_pi = RealField::from_fn(&g, |_| PI / 2.0);
        let a = small_dispersion_solution(1.0, &b0, &half_pi, &zero).unwrap();
        for (x, y) in a.values().iter().zip(b0.values()) {
            assert!((x - y * Complex64::new(0.0, -1.0)).norm() < 1e-15);
        }
        let p = RealField::from_fn(&g, psi_plus0_profile);
        let a = small_dispersion_solution(3.7, &b0, &p, &zero).unwrap();
        assert!((a.l2_norm() - b0.l2_norm()).abs() < 1e-14 * b0.l2_norm());
    }

    #[test]
    fn profiles() {
        assert_eq!(psi_plus0_profile(0.0), 1.0);
        assert!((psi_plus0_profile(1.0) - 3f64.cos() * 1f64.sin()).abs() < 1e-15);
        assert_eq!(plateau_bump(0.9), 1.0);
        assert_eq!(plateau_bump(-1.0), 1.0);
        assert_eq!(plateau_bump(2.0), 0.0);
        let v = plateau_bump(1.5);
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identity_embedding() {
        let g = SpectralGrid::new(16.0, 64).unwrap();
        let b = ComplexField::from_fn(&g, |x| Complex64::new((-x * x).exp(), 0.3 * (-x * x).exp()));
        let c = crate::grid::forward_transform(&b);
        let e = Embedding { l: 1.0, theta: 1.0, mu: 1.0, c: 0.0 };
        for m in [0, 17, 40] {
            let x = g.node(m);
            assert!((scaling_embed(&c, e, x, 0.0) - b.values()[m]).norm() < 1e-13);
        }
        let e = Embedding { l: 1.0, theta: 1.0, mu: 1.0, c: 0.4 };
        let x = 0.3;
        let direct = Complex64::from_polar(1.0, 0.4 * x) * Complex64::new(1.0, 0.3) * (-x * x).exp();
        assert!((scaling_embed(&c, e, x, 0.0) - direct).norm() < 1e-12);
    }

    #[test]
    fn embedding_norm_identity() {
        let (l, theta, mu) = (8.0, 0.1, 0.25);
        let gt = SpectralGrid::new(40.0, 256).unwrap();
        let bt = ComplexField::from_fn(&gt, |x| Complex64::new((-x * x / 2.0).exp(), 0.5 * x * (-x * x / 2.0).exp()));
        let ct = crate::grid::forward_transform(&bt);
        let e = Embedding { l, theta, mu, c: 0.0 };
        // the embedded field lives on |x| ≤ 20/(Lμ) = 10
        let gx = SpectralGrid::new(20.0, 512).unwrap();
        let emb = ComplexField::from_fn(&gx, |x| scaling_embed(&ct, e, x, 0.0));
        let ratio = emb.l2_norm() / bt.l2_norm();
        let expected = l.sqrt() * theta / mu.sqrt();
        assert!((ratio - expected).abs() < 1e-3, "{ratio} {expected}");
    }

    #[test]
    fn dilation_by_one_is_identity() {
        let g = SpectralGrid::new(20.0, 128).unwrap();
        let b = ComplexField::from_fn(&g, |x| Complex64::new((-x * x).exp(), 0.0));
        let (d, w) = dilate(&b, 1.0);
        assert!(w.is_none());
        assert!(d.sub(&b).unwrap().l2_norm() < 1e-12);
    }
}
