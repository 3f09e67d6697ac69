//! Modified Bessel functions of the second kind, orders 0 and 1.
//!
//! Three evaluation branches:
//!
//! * `x ≤ 2`: ascending series with the `-(ln(x/2) + γ)·I₀(x)` term,
//! * `2 < x ≤ 30`: Steed's continued fraction (Temme/Thompson–Barnett form),
//! * `x > 30`: the Hankel asymptotic expansion `e^{-x}·√(π/2x)·Σ aₖ/xᵏ`.
//!
//! The two large-argument branches return the factor `e^{-x}√(π/2x)`
//! separately, so `log_bessel_k0` and `k_ratio` never underflow.
//!
//! [`bessel_k0_quadrature_oracle`] integrates `∫₀^∞ e^{-x cosh t} dt`
//! directly and shares no code with the branches above.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::Quadrature;

/// Euler–Mascheroni constant, 0.577215664901532860606512090082.
#[allow(clippy::excessive_precision)]
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

const SERIES_MAX: f64 = 2.0;
const ASYMPTOTIC_MIN: f64 = 30.0;
const MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Series,
    ContinuedFraction,
    Asymptotic,
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    pub abs_error_bound: f64,
    pub method: Method,
}

/// `K₀` and `K₁` written as `scaled · e^{-x}√(π/2x)` on the large-argument
/// branches, and with `log_prefactor = 0` on the series branch.
#[derive(Debug, Clone, Copy)]
struct Parts {
    k0: f64,
    k1: f64,
    // log of the factor multiplying both k0 and k1
    log_prefactor: f64,
    rel_error: f64,
    method: Method,
}

fn check_domain(x: f64) -> Result<()> {
    if x > 0.0 && !x.is_nan() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "Bessel K requires x > 0",
            value: x,
        })
    }
}

fn series(x: f64) -> Parts {
    let q = 0.25 * x * x;
    let log_term = (0.5 * x).ln() + EULER_GAMMA;

    // k = 0 terms
    let mut t0 = 1.0; // qᵏ/(k!)²
    let mut t1 = 1.0; // qᵏ/(k!(k+1)!)
    let mut harmonic = 0.0; // H_k
    let mut i0 = 1.0;
    let mut s0 = 0.0;
    let mut i1 = 1.0;
    let mut s1 = -2.0 * EULER_GAMMA + 1.0; // ψ(1) + ψ(2)
    let mut k = 0.0;
    loop {
        k += 1.0;
        t0 *= q / (k * k);
        t1 *= q / (k * (k + 1.0));
        harmonic += 1.0 / k;
        i0 += t0;
        s0 += t0 * harmonic;
        i1 += t1;
        s1 += t1 * (2.0 * harmonic + 1.0 / (k + 1.0) - 2.0 * EULER_GAMMA);
        if t0 * harmonic < 1e-18 * s0.abs().max(i0) && t1 < 1e-18 * i1 {
            break;
        }
    }
    let i1 = 0.5 * x * i1;
    let k0 = -log_term * i0 + s0;
    let k1 = 1.0 / x + (0.5 * x).ln() * i1 - 0.25 * x * s1;
    let magnitude = log_term.abs() * i0 + s0.abs();
    Parts {
        k0,
        k1,
        log_prefactor: 0.0,
        rel_error: 8.0 * f64::EPSILON * magnitude / k0,
        method: Method::Series,
    }
}

fn continued_fraction(x: f64) -> Parts {
    // Steed's CF2 for order 0, as in Numerical Recipes `bessik`.
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 0.5 * f64::EPSILON {
            break;
        }
    }
    h *= a1;
    let k0 = 1.0 / s;
    Parts {
        k0,
        k1: k0 * (x + 0.5 - h) / x,
        log_prefactor: -x + 0.5 * (std::f64::consts::PI / (2.0 * x)).ln(),
        rel_error: 16.0 * f64::EPSILON,
        method: Method::ContinuedFraction,
    }
}

fn asymptotic(x: f64) -> Parts {
    // aₖ(ν) = aₖ₋₁·(4ν² - (2k-1)²)/(8k)/x
    let mut s0 = 1.0;
    let mut s1 = 1.0;
    let mut t0 = 1.0;
    let mut t1 = 1.0;
    let mut last = 0.0_f64;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        let denom = 8.0 * k as f64 * x;
        let n0 = -odd * odd / denom;
        let n1 = (4.0 - odd * odd) / denom;
        if n0.abs() >= 1.0 {
            break;
        }
        t0 *= n0;
        t1 *= n1;
        s0 += t0;
        s1 += t1;
        last = t0.abs().max(t1.abs());
        if last < 1e-18 {
            break;
        }
    }
    Parts {
        k0: s0,
        k1: s1,
        log_prefactor: -x + 0.5 * (std::f64::consts::PI / (2.0 * x)).ln(),
        rel_error: 4.0 * f64::EPSILON + last,
        method: Method::Asymptotic,
    }
}

fn parts(x: f64) -> Parts {
    if x <= SERIES_MAX {
        series(x)
    } else if x <= ASYMPTOTIC_MIN {
        continued_fraction(x)
    } else {
        asymptotic(x)
    }
}

fn scale(p: &Parts, scaled: f64, x: f64) -> f64 {
    if p.method == Method::Series {
        scaled
    } else {
        // exp(-x) directly keeps full relative precision; exp(log_prefactor)
        // would amplify the rounding of a large exponent.
        scaled * (std::f64::consts::PI / (2.0 * x)).sqrt() * (-x).exp()
    }
}

/// `K₀(x)` for `x > 0`. Underflows gracefully to 0 past `x ≈ 745`.
pub fn bessel_k0(x: f64) -> Result<EvalResult> {
    check_domain(x)?;
    let p = parts(x);
    let value = scale(&p, p.k0, x);
    Ok(EvalResult {
        value,
        abs_error_bound: p.rel_error * value,
        method: p.method,
    })
}

/// `K₁(x)` for `x > 0`; used for the logarithmic derivative of `K₀`.
pub fn bessel_k1(x: f64) -> Result<EvalResult> {
    check_domain(x)?;
    let p = parts(x);
    let value = scale(&p, p.k1, x);
    Ok(EvalResult {
        value,
        abs_error_bound: p.rel_error * value,
        method: p.method,
    })
}

/// `ln K₀(x)`, computed without forming `K₀` on the large-argument branches.
pub fn log_bessel_k0(x: f64) -> Result<f64> {
    check_domain(x)?;
    let p = parts(x);
    Ok(p.k0.ln() + p.log_prefactor)
}

/// `K₀'(x)/K₀(x) = -K₁(x)/K₀(x)`.
pub fn k_ratio(x: f64) -> Result<f64> {
    check_domain(x)?;
    let p = parts(x);
    Ok(-p.k1 / p.k0)
}

// Upper limit for ∫₀^T e^{-x·cosh t}·w(t) dt: past T the integrand is below
// tol·e^{-x}·e^{-10} relative to its peak, and past acosh(745/x) it is
// below the smallest subnormal.
fn cosh_integral_limit(x: f64, tol: f64) -> Option<f64> {
    if x >= 745.0 {
        return None;
    }
    let relative = (1.0 + (10.0 - tol.ln()) / x).acosh();
    let underflow = (745.0 / x).acosh();
    Some(relative.min(underflow))
}

fn cosh_integral<W: Fn(f64) -> f64>(x: f64, tol: f64, weight: W) -> Result<EvalResult> {
    check_domain(x)?;
    if !(tol > 0.0) {
        return Err(Error::Domain {
            what: "quadrature tolerance must be positive",
            value: tol,
        });
    }
    let Some(upper) = cosh_integral_limit(x, tol) else {
        return Ok(EvalResult {
            value: 0.0,
            abs_error_bound: f64::from_bits(1),
            method: Method::Quadrature,
        });
    };
    let quad = Quadrature::new(0.0, tol).with_max_panels(20_000);
    let r = quad.integrate(|t| (-x * t.cosh()).exp() * weight(t), 0.0, upper)?;
    Ok(EvalResult {
        value: r.value,
        abs_error_bound: r.abs_error,
        method: Method::Quadrature,
    })
}

/// `K₀(x) = ∫₀^∞ e^{-x cosh t} dt` by adaptive Gauss–Kronrod quadrature,
/// truncated once the integrand is negligible. Independent of the
/// series/continued-fraction/asymptotic code paths; meant as an oracle.
pub fn bessel_k0_quadrature_oracle(x: f64, tol: f64) -> Result<EvalResult> {
    cosh_integral(x, tol, |_| 1.0)
}

/// `K₁(x) = ∫₀^∞ e^{-x cosh t}·cosh t dt`, same method as the `K₀` oracle.
pub fn bessel_k1_quadrature_oracle(x: f64, tol: f64) -> Result<EvalResult> {
    cosh_integral(x, tol, f64::cosh)
}
