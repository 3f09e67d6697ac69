//! Adaptive Gauss–Kronrod (7, 15) quadrature.
//!
//! Global adaptive bisection: the panel with the largest error estimate is
//! split until the summed estimate meets the tolerance or the panel budget
//! runs out. Semi-infinite ranges and integrable endpoint singularities are
//! handled by changes of variable on top of the same finite-interval rule.

use crate::error::{Error, Result};

// Kronrod abscissae on [-1, 1]; odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Result of a quadrature: value, error estimate and work done.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

impl Integral {
    /// Sum of independent pieces; errors add.
    pub fn combine(parts: &[Integral]) -> Integral {
        parts.iter().fold(
            Integral {
                value: 0.0,
                abs_error: 0.0,
                evaluations: 0,
            },
            |acc, p| Integral {
                value: acc.value + p.value,
                abs_error: acc.abs_error + p.abs_error,
                evaluations: acc.evaluations + p.evaluations,
            },
        )
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Tolerances and budget for the adaptive integrator.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-13,
            rel_tol: 1e-13,
            max_panels: 4000,
        }
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let mut error = ((kronrod - gauss) * half).abs();
    // Round-off floor for panels whose estimate underflows the arithmetic.
    error = error.max(4.0 * f64::EPSILON * value.abs());
    Panel { a, b, value, error }
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Quadrature {
            abs_tol,
            rel_tol,
            ..Default::default()
        }
    }

    pub fn with_max_panels(mut self, max_panels: usize) -> Self {
        self.max_panels = max_panels;
        self
    }

    fn target(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    /// Integrates `f` over the finite interval `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Integral> {
        if a == b {
            return Ok(Integral {
                value: 0.0,
                abs_error: 0.0,
                evaluations: 0,
            });
        }
        let mut panels = vec![gauss_kronrod(&f, a, b)];
        let mut evaluations = 15;
        loop {
            let (value, error) = panels
                .iter()
                .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
            if !value.is_finite() || !error.is_finite() {
                return Err(Error::NonConvergence {
                    achieved: f64::INFINITY,
                    requested: self.target(0.0),
                    intervals: panels.len(),
                });
            }
            if error <= self.target(value) {
                return Ok(Integral {
                    value,
                    abs_error: error,
                    evaluations,
                });
            }
            // Largest error first; ties resolved by position for determinism.
            let worst = panels
                .iter()
                .enumerate()
                .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
                .map(|(i, _)| i)
                .unwrap();
            let p = panels[worst];
            let mid = 0.5 * (p.a + p.b);
            if panels.len() >= self.max_panels || mid <= p.a || mid >= p.b {
                return Err(Error::NonConvergence {
                    achieved: error,
                    requested: self.target(value),
                    intervals: panels.len(),
                });
            }
            panels[worst] = gauss_kronrod(&f, p.a, mid);
            panels.push(gauss_kronrod(&f, mid, p.b));
            evaluations += 30;
        }
    }

    /// Integrates `f` over `[a, ∞)` through `x = a + (1 - s)/s`, `s ∈ (0, 1]`.
    ///
    /// `f` must return 0 (not NaN) where it underflows.
    pub fn integrate_to_infinity<F: Fn(f64) -> f64>(&self, f: F, a: f64) -> Result<Integral> {
        self.integrate(
            |s: f64| {
                let x = a + (1.0 - s) / s;
                if x.is_finite() {
                    let v = f(x) / (s * s);
                    if v.is_finite() {
                        v
                    } else {
                        0.0
                    }
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
        )
    }

    /// Integrates `f` over `(-∞, b]`.
    pub fn integrate_from_neg_infinity<F: Fn(f64) -> f64>(
        &self,
        f: F,
        b: f64,
    ) -> Result<Integral> {
        self.integrate_to_infinity(|y| f(-y), -b)
    }

    /// Integrates over `[a, b]` when `f` has an integrable (logarithmic or
    /// weaker) singularity at `a`, via `x = a + (b - a)·e^{-u}`.
    pub fn integrate_singular_left<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
    ) -> Result<Integral> {
        let width = b - a;
        self.integrate_to_infinity(
            |u| {
                let w = (-u).exp();
                if w == 0.0 {
                    return 0.0;
                }
                let x = a + width * w;
                if x == a {
                    return 0.0;
                }
                f(x) * width * w
            },
            0.0,
        )
    }

    /// Mirror image of [`Quadrature::integrate_singular_left`]: singularity at `b`.
    pub fn integrate_singular_right<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
    ) -> Result<Integral> {
        self.integrate_singular_left(|y| f(-y), -b, -a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let q = Quadrature::default();
        let r = q.integrate(|x| x.powi(6) - 3.0 * x * x + 1.0, -1.0, 2.0).unwrap();
        let exact = (128.0 + 1.0) / 7.0 - (8.0 + 1.0) + 3.0;
        assert!((r.value - exact).abs() < 1e-13);
        assert_eq!(r.evaluations, 15);
    }

    #[test]
    fn gaussian_on_half_line() {
        let q = Quadrature::new(1e-14, 1e-14);
        let r = q.integrate_to_infinity(|x| (-x * x).exp(), 0.0).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-13);
        let l = q.integrate_from_neg_infinity(|x| (-x * x).exp(), 0.0).unwrap();
        assert!((l.value - r.value).abs() < 1e-14);
    }

    #[test]
    fn log_singularity() {
        // ∫₀¹ -ln x dx = 1
        let q = Quadrature::new(1e-14, 1e-14);
        let r = q.integrate_singular_left(|x| -x.ln(), 0.0, 1.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-13, "{}", r.value);
        let r = q.integrate_singular_right(|x| -(1.0 - x).ln(), 0.0, 1.0).unwrap();
        assert!((r.value - 1.0).abs() < 1e-13, "{}", r.value);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let q = Quadrature::new(1e-15, 0.0).with_max_panels(3);
        let err = q.integrate(|x| (1.0 / x).sin(), 1e-3, 1.0).unwrap_err();
        assert!(matches!(err, Error::NonConvergence { .. }));
    }
}
