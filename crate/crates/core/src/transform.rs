//! Self-difference of grid densities and moment generating functions.
//!
//! The law of `X - X'` for i.i.d. `X, X'` with grid density `g` is the
//! cross-correlation `c_k = h·Σ_j g_{j+k}·g_j` on the integer lags
//! `k·h`. Reading `g` as piecewise constant on its cells makes the exact
//! difference density piecewise linear between those lags, so its value at
//! the midpoint `(k + ½)h` of an output cell is `(c_k + c_{k+1})/2`. Output
//! grids therefore keep the step `h`, double the half-width and stay
//! origin-free.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use rayon::prelude::*;

use crate::dist::{integrate_piecewise, integrate_weighted, AnalyticDensity, GridDensity};
use crate::error::{Error, Result};
use crate::quad::Quadrature;

/// Inputs must have unit mass to this accuracy.
pub const NORMALIZATION_TOL: f64 = 1e-6;

/// Lags whose FFT round-off bound exceeds this fraction of the lag value
/// are recomputed by direct summation (all terms are non-negative there, so
/// the direct sum is accurate to a few ulps relative).
const TAIL_RELATIVE_ACCURACY: f64 = 1e-12;

/// Refuse MGF arguments this close (relative) to the edge of the strip.
pub const MGF_BOUNDARY_MARGIN: f64 = 1e-4;

fn check_normalized(g: &GridDensity) -> Result<()> {
    let mass = g.mass();
    if (mass - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { mass });
    }
    Ok(())
}

/// `out[m] = Σ_i a_i·b_{m-i}` for `m < a.len() + b.len() - 1`, via a
/// zero-padded FFT. Single threaded; identical output on every run.
fn convolve_fft(a: &[f64], b: &[f64]) -> Vec<f64> {
    let len = a.len() + b.len() - 1;
    let size = len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let pad = |v: &[f64]| {
        let mut buf = vec![Complex::new(0.0, 0.0); size];
        for (slot, &x) in buf.iter_mut().zip(v) {
            slot.re = x;
        }
        buf
    };
    let mut fa = pad(a);
    let mut fb = pad(b);
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= *y;
    }
    inverse.process(&mut fa);
    let scale = 1.0 / size as f64;
    fa.iter().take(len).map(|z| z.re * scale).collect()
}

// c_k = Σ_j v_{j+k}·v_j for k in -(n-1)..=(n-1), stored at index k + n - 1.
fn correlation_direct_at(v: &[f64], lag: isize) -> f64 {
    let n = v.len() as isize;
    let (lo, hi) = (0.max(-lag), n.min(n - lag));
    (lo..hi)
        .map(|j| v[(j + lag) as usize] * v[j as usize])
        .sum()
}

fn convolution_direct_at(v: &[f64], m: usize) -> f64 {
    let n = v.len();
    let lo = m.saturating_sub(n - 1);
    let hi = m.min(n - 1);
    (lo..=hi).map(|i| v[i] * v[m - i]).sum()
}

/// Maps the `2n - 1` lag values onto the `2n`-cell midpoint grid.
fn lags_to_grid(half_width: f64, h: f64, lags: &[f64]) -> Result<GridDensity> {
    let n2 = lags.len() + 1;
    let at = |i: isize| -> f64 {
        if i < 0 || i as usize >= lags.len() {
            0.0
        } else {
            lags[i as usize]
        }
    };
    let values = (0..n2)
        .map(|m| {
            let m = m as isize;
            // output cell m spans lags (m - 1, m) in storage indexing
            (h * 0.5 * (at(m - 1) + at(m))).max(0.0)
        })
        .collect();
    GridDensity::new(2.0 * half_width, values)?.normalized()
}

fn fft_roundoff_bound(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let energy: f64 = v.iter().map(|x| x * x).sum();
    8.0 * f64::EPSILON * (2.0 * n).log2().max(1.0) * energy
}

/// Density of `X - X'` for `X, X'` i.i.d. with density `g`.
///
/// The bulk is computed by FFT; lags small enough that FFT round-off would
/// dominate them are recomputed by direct summation, so the output has
/// small relative error even deep in the tails.
pub fn self_difference(g: &GridDensity) -> Result<GridDensity> {
    check_normalized(g)?;
    let v = g.values();
    let n = v.len();
    let reversed: Vec<f64> = v.iter().rev().copied().collect();
    // conv(v, rev v)_{k+n-1} = c_k
    let mut lags = convolve_fft(v, &reversed);
    let threshold = fft_roundoff_bound(v) / TAIL_RELATIVE_ACCURACY;
    for (i, c) in lags.iter_mut().enumerate() {
        if *c < threshold {
            *c = correlation_direct_at(v, i as isize - (n as isize - 1));
        }
    }
    lags_to_grid(g.half_width(), g.step(), &lags)
}

/// Plain FFT self-difference with no tail correction.
pub fn self_difference_fft_only(g: &GridDensity) -> Result<GridDensity> {
    check_normalized(g)?;
    let v = g.values();
    let reversed: Vec<f64> = v.iter().rev().copied().collect();
    let lags = convolve_fft(v, &reversed);
    lags_to_grid(g.half_width(), g.step(), &lags)
}

/// `O(n²)` reference for [`self_difference`].
pub fn self_difference_direct(g: &GridDensity) -> Result<GridDensity> {
    check_normalized(g)?;
    let v = g.values();
    let n = v.len() as isize;
    let lags: Vec<f64> = (-(n - 1)..n).map(|k| correlation_direct_at(v, k)).collect();
    lags_to_grid(g.half_width(), g.step(), &lags)
}

/// Density of `X - X'` for `X, X'` i.i.d. with analytic density `d`,
/// evaluated node by node as `∫ d(x)·d(x - y) dx` on the grid that
/// [`self_difference`] would return for `discretize(d, half_width, n_cells)`.
///
/// Unlike the grid version this has no discretization error near singular
/// points and no truncation at `±half_width`; each node carries relative
/// error about `tol`.
pub fn self_difference_quadrature(
    d: &AnalyticDensity,
    half_width: f64,
    n_cells: usize,
    tol: f64,
) -> Result<GridDensity> {
    check_tol(tol)?;
    if !(half_width.is_finite() && half_width > 0.0) || n_cells == 0 || !n_cells.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!(
            "need finite L > 0 and even n, got L = {half_width}, n = {n_cells}"
        )));
    }
    let h = 2.0 * half_width / n_cells as f64;
    let quad = Quadrature::new(0.0, tol).with_max_panels(20_000);
    // D is even, so only y > 0 is integrated.
    let positive: Vec<f64> = (0..n_cells)
        .into_par_iter()
        .map(|k| {
            let y = (k as f64 + 0.5) * h;
            let f = |x: f64| {
                let l = (d.log_eval)(x) + (d.log_eval)(x - y);
                if l == f64::NEG_INFINITY {
                    0.0
                } else {
                    l.exp()
                }
            };
            if d.symmetric {
                // The integrand is symmetric about y/2 when d is even.
                let breaks: Vec<f64> = d.singular_points.iter().map(|&s| s + y).collect();
                let (_, hi) = d.support;
                let half = integrate_piecewise(&f, (0.5 * y, hi), breaks, &quad)?;
                return Ok(2.0 * half.value);
            }
            let breaks: Vec<f64> = d
                .singular_points
                .iter()
                .flat_map(|&s| [s, s + y])
                .collect();
            let (lo, hi) = d.support;
            integrate_piecewise(&f, (lo + y, hi), breaks, &quad).map(|i| i.value)
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = positive.iter().rev().chain(positive.iter()).copied().collect();
    GridDensity::new(2.0 * half_width, values)?.normalized()
}

/// Density of `X + X'`, same grid conventions as [`self_difference`].
pub fn self_convolution(g: &GridDensity) -> Result<GridDensity> {
    check_normalized(g)?;
    let v = g.values();
    // x_i + x_j = (i + j + 1 - n)·h, i.e. lag index i + j.
    let mut lags = convolve_fft(v, v);
    let threshold = fft_roundoff_bound(v) / TAIL_RELATIVE_ACCURACY;
    for (m, c) in lags.iter_mut().enumerate() {
        if *c < threshold {
            *c = convolution_direct_at(v, m);
        }
    }
    lags_to_grid(g.half_width(), g.step(), &lags)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MgfMethod {
    DensityQuadrature,
    GaussianConditioning,
    ClosedForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MgfValue {
    pub t: f64,
    pub value: f64,
    pub abs_error_estimate: f64,
    pub method: MgfMethod,
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "tolerance must be positive",
            value: tol,
        })
    }
}

fn check_strip(t: f64, radius: f64) -> Result<()> {
    if t.is_nan() || t.abs() >= radius * (1.0 - MGF_BOUNDARY_MARGIN) {
        return Err(Error::Divergence { t, radius });
    }
    Ok(())
}

/// `E e^{tX} = ∫ e^{tx} f(x) dx` by adaptive quadrature of the density.
pub fn mgf_via_density(d: &AnalyticDensity, t: f64, tol: f64) -> Result<MgfValue> {
    check_tol(tol)?;
    check_strip(t, d.mgf_radius)?;
    let r = integrate_weighted(d, |x| t * x, tol)?;
    Ok(MgfValue {
        t,
        value: r.value,
        abs_error_estimate: r.abs_error,
        method: MgfMethod::DensityQuadrature,
    })
}

/// `E e^{tX₁X₂} = E[e^{t²X²/2}]` for standard normal `X`, obtained by
/// integrating out one factor first; never touches the Bessel code.
pub fn mgf_via_conditioning(t: f64, tol: f64) -> Result<MgfValue> {
    check_tol(tol)?;
    check_strip(t, 1.0)?;
    let a = 0.5 * (1.0 - t * t);
    let c = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let quad = Quadrature::new(0.5 * tol, 0.0).with_max_panels(10_000);
    let r = quad.integrate_to_infinity(|x| c * (-a * x * x).exp(), 0.0)?;
    Ok(MgfValue {
        t,
        value: 2.0 * r.value,
        abs_error_estimate: 2.0 * r.abs_error,
        method: MgfMethod::GaussianConditioning,
    })
}

/// `1/√(1 - t²)`, the normal-product MGF.
pub fn mgf_product_closed_form(t: f64) -> Result<MgfValue> {
    check_strip(t, 1.0)?;
    let value = 1.0 / (1.0 - t * t).sqrt();
    Ok(MgfValue {
        t,
        value,
        abs_error_estimate: 2.0 * f64::EPSILON * value,
        method: MgfMethod::ClosedForm,
    })
}

/// `1/(1 - t²)`, the MGF of `X₁X₂ - X₃X₄` and of Laplace(0, 1).
pub fn mgf_difference_closed_form(t: f64) -> Result<MgfValue> {
    if t.is_nan() || t.abs() >= 1.0 {
        return Err(Error::Domain {
            what: "difference MGF needs |t| < 1",
            value: t,
        });
    }
    let value = 1.0 / (1.0 - t * t);
    Ok(MgfValue {
        t,
        value,
        abs_error_estimate: 2.0 * f64::EPSILON * value,
        method: MgfMethod::ClosedForm,
    })
}

/// `M(t)·M(-t)` from two density quadratures: the MGF of `X - X'`.
pub fn mgf_self_difference(d: &AnalyticDensity, t: f64, tol: f64) -> Result<MgfValue> {
    let plus = mgf_via_density(d, t, tol)?;
    let minus = mgf_via_density(d, -t, tol)?;
    Ok(MgfValue {
        t,
        value: plus.value * minus.value,
        abs_error_estimate: plus.abs_error_estimate * minus.value
            + minus.abs_error_estimate * plus.value,
        method: MgfMethod::DensityQuadrature,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{discretize, laplace_density, Law};

    #[test]
    fn lags_map_onto_midpoints() {
        // two-cell histogram on [-1, 1]: X uniform on [-1, 1], X - X' is
        // the triangle on [-2, 2] with peak ½.
        let g = GridDensity::new(1.0, vec![0.5, 0.5]).unwrap();
        let d = self_difference_direct(&g).unwrap();
        assert_eq!(d.n_cells(), 4);
        assert!((d.half_width() - 2.0).abs() < 1e-15);
        for (x, v) in d.nodes().zip(d.values()) {
            let tri = (0.5 - x.abs() / 4.0).max(0.0);
            assert!((v - tri).abs() < 1e-15, "{x}: {v} vs {tri}");
        }
    }

    #[test]
    fn fft_equals_direct_on_asymmetric_input() {
        let values: Vec<f64> = (0..128).map(|k| ((k as f64) * 0.37).sin().abs() + 0.01 * k as f64).collect();
        let g = GridDensity::new(3.0, values).unwrap().normalized().unwrap();
        let a = self_difference_fft_only(&g).unwrap();
        let b = self_difference_direct(&g).unwrap();
        let c = self_difference(&g).unwrap();
        for ((x, y), z) in a.values().iter().zip(b.values()).zip(c.values()) {
            assert!((x - y).abs() < 1e-12);
            assert!((z - y).abs() < 1e-12);
        }
        // asymmetric input, but X - X' is always even
        let v = b.values();
        for k in 0..v.len() {
            assert!((v[k] - v[v.len() - 1 - k]).abs() < 1e-15);
        }
    }

    #[test]
    fn unnormalized_input_rejected() {
        let g = GridDensity::new(1.0, vec![1.0; 8]).unwrap();
        assert!(matches!(self_difference(&g), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn gaussian_and_laplace_peaks() {
        let g = discretize(&Law::Normal.density(), 12.0, 4096).unwrap();
        let d = self_difference(&g).unwrap();
        let k = d.nearest_index(0.0);
        let target = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
        assert!((d.values()[k] - target).abs() < 1e-4);

        let g = discretize(&Law::Laplace.density(), 12.0, 4096).unwrap();
        let d = self_difference(&g).unwrap();
        let k = d.nearest_index(0.0);
        assert!((d.values()[k] - 0.25).abs() < 1e-4);
    }

    #[test]
    fn product_self_difference_is_laplace() {
        let g = discretize(&Law::NormalProduct.density(), 12.0, 4096).unwrap();
        let d = self_difference(&g).unwrap();
        assert!(d.sup_distance_to(laplace_density) <= 1e-3);
        assert!((d.mass() - 1.0).abs() < 1e-12);
        assert!(d.mass_defect().abs() < 1e-4);
    }

    #[test]
    fn mgf_examples() {
        let p = Law::NormalProduct.density();
        assert!((mgf_via_density(&p, 0.0, 1e-10).unwrap().value - 1.0).abs() < 1e-10);
        assert!((mgf_via_density(&p, 0.6, 1e-10).unwrap().value - 1.25).abs() < 1e-10);
        assert!(matches!(
            mgf_via_density(&p, 0.999_999, 1e-10),
            Err(Error::Divergence { .. })
        ));
        assert!(mgf_via_density(&p, 1.0, 1e-10).is_err());
        assert!(mgf_via_density(&p, -1.5, 1e-10).is_err());

        let c = mgf_via_conditioning(0.5, 1e-12).unwrap();
        assert!((c.value - 1.154_700_538_379_251_5).abs() < 1e-12);
        assert_eq!(c.value, mgf_via_conditioning(-0.5, 1e-12).unwrap().value);
        let c = mgf_via_conditioning(0.9, 1e-12).unwrap();
        assert!((c.value - 1.0 / 0.19_f64.sqrt()).abs() < 1e-11);

        assert_eq!(mgf_difference_closed_form(0.0).unwrap().value, 1.0);
        assert!((mgf_difference_closed_form(0.5).unwrap().value - 4.0 / 3.0).abs() < 1e-15);
        assert!((mgf_difference_closed_form(0.9).unwrap().value - 1.0 / 0.19).abs() < 1e-13);
        assert!(mgf_difference_closed_form(1.0).is_err());
    }

    #[test]
    fn normal_mgf_has_no_strip_limit() {
        let n = Law::Normal.density();
        let m = mgf_via_density(&n, 2.0, 1e-10).unwrap();
        assert!((m.value - 2.0_f64.exp()).abs() < 1e-9);
    }
}
