//! Numerical log-concavity and log-convexity checks with explicit witnesses.
//!
//! Both checks test the midpoint inequality for `ln f` on triples
//! `(x, (x+y)/2, y)` built with strides `1, 2, 4, …` over a probe set. A
//! failing check returns the triple with the largest violation; ties go to
//! the smallest `|m|`, then to the smallest `x`, so witness choice is
//! deterministic.

use serde::{Deserialize, Serialize};

use crate::dist::GridDensity;
use crate::error::{Error, Result};
use crate::specfun::k_ratio;
use crate::transform::self_difference;

/// Grid values below this fraction of the maximum are not tested.
pub const TAIL_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShapeProperty {
    LogConcave,
    LogConvexOnInterval,
    RatioIncreasing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Holds,
    Fails,
}

/// A triple at which the defining inequality fails.
///
/// For log-concavity `lhs = ln f(m)` and `rhs = (ln f(x) + ln f(y))/2`; for
/// log-convexity `lhs = (ln f(x) + ln f(y))/2` and `rhs = ln f(m)`. For the
/// ratio check `x < y` are consecutive probes, `lhs = r(y)`, `rhs = r(x)`.
/// In every case `violation = rhs - lhs`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: f64,
    pub y: f64,
    pub m: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub violation: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapeVerdict {
    pub property: ShapeProperty,
    pub outcome: Outcome,
    pub tolerance: f64,
    pub domain: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl ShapeVerdict {
    pub fn holds(&self) -> bool {
        self.outcome == Outcome::Holds
    }
}

// Keeps the worst violation under a fixed total order.
#[derive(Default)]
struct Worst(Option<Witness>);

impl Worst {
    fn offer(&mut self, w: Witness) {
        let better = match &self.0 {
            None => true,
            Some(cur) => match w.violation.total_cmp(&cur.violation) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => {
                    (w.m.abs(), w.x).partial_cmp(&(cur.m.abs(), cur.x))
                        == Some(std::cmp::Ordering::Less)
                }
            },
        };
        if better {
            self.0 = Some(w);
        }
    }
}

fn verdict(
    property: ShapeProperty,
    tolerance: f64,
    domain: (f64, f64),
    worst: Worst,
) -> ShapeVerdict {
    let witness = worst.0.filter(|w| w.violation > tolerance);
    ShapeVerdict {
        property,
        outcome: if witness.is_some() {
            Outcome::Fails
        } else {
            Outcome::Holds
        },
        tolerance,
        domain,
        witness,
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "shape tolerance must be positive",
            value: tol,
        })
    }
}

/// Midpoint concavity of `ln g` over node triples `(k - j, k, k + j)`,
/// `j = 1, 2, 4, …`, skipping triples that touch a value below
/// `TAIL_FLOOR · max(values)`.
pub fn check_log_concavity_grid(g: &GridDensity, tol: f64) -> Result<ShapeVerdict> {
    check_tol(tol)?;
    let v = g.values();
    let max = v.iter().copied().fold(0.0, f64::max);
    let floor = TAIL_FLOOR * max;
    let logs: Vec<Option<f64>> = v
        .iter()
        .map(|&x| (x >= floor && x > 0.0).then(|| x.ln()))
        .collect();
    let usable: Vec<usize> = (0..v.len()).filter(|&k| logs[k].is_some()).collect();
    if usable.len() < 3 {
        return Err(Error::TooFewNodes(usable.len()));
    }
    let domain = (g.node(usable[0]), g.node(*usable.last().unwrap()));

    let n = v.len();
    let mut worst = Worst::default();
    let mut stride = 1;
    while 2 * stride < n {
        for k in stride..n - stride {
            let (Some(a), Some(mid), Some(b)) = (logs[k - stride], logs[k], logs[k + stride])
            else {
                continue;
            };
            let rhs = 0.5 * (a + b);
            worst.offer(Witness {
                x: g.node(k - stride),
                y: g.node(k + stride),
                m: g.node(k),
                lhs: mid,
                rhs,
                violation: rhs - mid,
            });
        }
        stride *= 2;
    }
    Ok(verdict(ShapeProperty::LogConcave, tol, domain, worst))
}

fn geometric_ladder(a: f64, b: f64, n: usize) -> Vec<f64> {
    let ratio = (b / a).ln() / (n - 1) as f64;
    (0..n)
        .map(|i| {
            if i == n - 1 {
                b
            } else {
                a * (ratio * i as f64).exp()
            }
        })
        .collect()
}

fn check_interval(a: f64, b: f64, n_probes: usize) -> Result<()> {
    if !(a > 0.0 && a < b && b.is_finite()) {
        return Err(Error::Precondition(format!(
            "need 0 < a < b, got a = {a}, b = {b}"
        )));
    }
    if n_probes < 3 {
        return Err(Error::Precondition(format!(
            "need at least 3 probes, got {n_probes}"
        )));
    }
    Ok(())
}

/// Midpoint convexity of `ln f` on `[a, b]`: probe pairs `(p_i, p_{i+j})`
/// from a geometric ladder with strides `j = 1, 2, 4, …`, with `f`
/// evaluated afresh at each midpoint.
pub fn check_log_convexity_interval<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    n_probes: usize,
    tol: f64,
) -> Result<ShapeVerdict> {
    check_tol(tol)?;
    check_interval(a, b, n_probes)?;
    let probes = geometric_ladder(a, b, n_probes);
    let log_at = |x: f64| {
        let v = f(x);
        if v > 0.0 && v.is_finite() {
            Ok(v.ln())
        } else {
            Err(Error::NotPositive { x, value: v })
        }
    };
    let logs = probes.iter().map(|&x| log_at(x)).collect::<Result<Vec<_>>>()?;
    let mut worst = Worst::default();
    let mut stride = 1;
    while stride < n_probes {
        for i in 0..n_probes - stride {
            let (x, y) = (probes[i], probes[i + stride]);
            let m = 0.5 * (x + y);
            let lhs = 0.5 * (logs[i] + logs[i + stride]);
            let rhs = log_at(m)?;
            worst.offer(Witness {
                x,
                y,
                m,
                lhs,
                rhs,
                violation: rhs - lhs,
            });
        }
        stride *= 2;
    }
    Ok(verdict(ShapeProperty::LogConvexOnInterval, tol, (a, b), worst))
}

/// `K₀'/K₀ = -K₁/K₀` strictly increasing along a geometric ladder on
/// `[a, b]`; equivalent to strict log-convexity of `K₀` there.
pub fn check_ratio_monotonicity(a: f64, b: f64, n_probes: usize) -> Result<ShapeVerdict> {
    check_interval(a, b, n_probes.max(3))?;
    let probes = geometric_ladder(a, b, n_probes.max(2));
    let ratios = probes.iter().map(|&x| k_ratio(x)).collect::<Result<Vec<_>>>()?;
    let mut worst = Worst::default();
    for i in 0..probes.len() - 1 {
        let (x, y) = (probes[i], probes[i + 1]);
        worst.offer(Witness {
            x,
            y,
            m: 0.5 * (x + y),
            lhs: ratios[i + 1],
            rhs: ratios[i],
            violation: ratios[i] - ratios[i + 1],
        });
    }
    // Strict increase: any non-positive step fails, so the tolerance is 0.
    let witness = worst.0.filter(|w| w.violation >= 0.0);
    Ok(ShapeVerdict {
        property: ShapeProperty::RatioIncreasing,
        outcome: if witness.is_some() {
            Outcome::Fails
        } else {
            Outcome::Holds
        },
        tolerance: 0.0,
        domain: (a, b),
        witness,
    })
}

/// Forward direction of preservation: a log-concave `g` has a log-concave
/// self-difference (checked at `10·tol`).
pub fn check_preservation_under_difference(g: &GridDensity, tol: f64) -> Result<ShapeVerdict> {
    let input = check_log_concavity_grid(g, tol)?;
    if let Some(w) = input.witness {
        return Err(Error::Precondition(format!(
            "input is not log-concave: violation {:e} at m = {}",
            w.violation, w.m
        )));
    }
    check_log_concavity_grid(&self_difference(g)?, 10.0 * tol)
}

/// Re-evaluates a log-concavity witness against `log_f`; returns the
/// recomputed violation.
pub fn recheck_concavity_witness<F: Fn(f64) -> f64>(w: &Witness, log_f: F) -> f64 {
    0.5 * (log_f(w.x) + log_f(w.y)) - log_f(w.m)
}

/// Re-evaluates a log-convexity witness against `log_f`.
pub fn recheck_convexity_witness<F: Fn(f64) -> f64>(w: &Witness, log_f: F) -> f64 {
    log_f(w.m) - 0.5 * (log_f(w.x) + log_f(w.y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{discretize, Law};
    use crate::transform::self_difference_quadrature;
    use crate::specfun::bessel_k0;

    fn k0(x: f64) -> f64 {
        bessel_k0(x).unwrap().value
    }

    #[test]
    fn laplace_grid_is_log_concave() {
        let g = discretize(&Law::Laplace.density(), 12.0, 4096).unwrap();
        let v = check_log_concavity_grid(&g, 1e-9).unwrap();
        assert!(v.holds(), "{v:?}");
        assert!(v.witness.is_none());
    }

    #[test]
    fn product_grid_fails_near_origin() {
        let g = discretize(&Law::NormalProduct.density(), 12.0, 4096).unwrap();
        let v = check_log_concavity_grid(&g, 1e-9).unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
        let w = v.witness.unwrap();
        assert!(w.violation > 1e-9);
        assert!(w.x < w.m && w.m < w.y);
        // the worst triple straddles the log-singularity
        assert!(w.x < 0.0 && w.y > 0.0, "{w:?}");
    }

    #[test]
    fn convexity_triple() {
        // K₀(1)² ≤ K₀(0.5)·K₀(1.5)
        let lhs = k0(1.0).powi(2);
        let rhs = k0(0.5) * k0(1.5);
        assert!((lhs - 0.177_261_6).abs() < 1e-6);
        assert!((rhs - 0.197_646_7).abs() < 1e-6);
        assert!(lhs < rhs);
    }

    #[test]
    fn k0_is_log_convex() {
        let v = check_log_convexity_interval(k0, 0.01, 30.0, 2048, 1e-10).unwrap();
        assert!(v.holds(), "{v:?}");
        let r = check_ratio_monotonicity(0.01, 30.0, 2048).unwrap();
        assert_eq!(v.outcome, r.outcome);
    }

    #[test]
    fn gaussian_is_not_log_convex() {
        let v = check_log_convexity_interval(|x| (-x * x).exp(), 0.1, 5.0, 256, 1e-10).unwrap();
        assert_eq!(v.outcome, Outcome::Fails);
        let w = v.witness.unwrap();
        assert!(recheck_convexity_witness(&w, |x| -x * x) > 1e-10);
    }

    #[test]
    fn ratio_monotone() {
        assert!(check_ratio_monotonicity(0.1, 20.0, 512).unwrap().holds());
        assert!(k_ratio(1.0).unwrap() < k_ratio(2.0).unwrap());
        assert!(check_ratio_monotonicity(1.0, 1.0, 10).is_err());
    }

    #[test]
    fn positivity_required() {
        let e = check_log_convexity_interval(|x| x - 1.0, 0.5, 2.0, 16, 1e-10).unwrap_err();
        assert!(matches!(e, Error::NotPositive { .. }));
        assert!(check_log_convexity_interval(k0, 0.5, 2.0, 2, 1e-10).is_err());
    }

    #[test]
    fn too_few_nodes() {
        let g = GridDensity::new(1.0, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            check_log_concavity_grid(&g, 1e-9),
            Err(Error::TooFewNodes(1))
        ));
    }

    #[test]
    fn preservation() {
        let n = discretize(&Law::Normal.density(), 12.0, 4096).unwrap();
        assert!(check_preservation_under_difference(&n, 1e-9).unwrap().holds());
        let l = discretize(&Law::Laplace.density(), 12.0, 4096).unwrap();
        assert!(check_preservation_under_difference(&l, 1e-9).unwrap().holds());
        let p = discretize(&Law::NormalProduct.density(), 12.0, 4096).unwrap();
        assert!(matches!(
            check_preservation_under_difference(&p, 1e-9),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn self_difference_of_product_is_log_concave() {
        let d = self_difference_quadrature(&Law::NormalProduct.density(), 12.0, 1024, 1e-11).unwrap();
        for tol in [1e-6, 1e-9, 1e-11] {
            let v = check_log_concavity_grid(&d, tol).unwrap();
            assert!(v.holds(), "tol {tol}: {v:?}");
        }
    }

    #[test]
    fn grid_self_difference_of_product_has_first_order_wiggle() {
        // Cell-level error next to the singularity makes ln D slightly convex
        // a few cells from 0; the violation halves with h.
        let worst = |n: usize| {
            let p = discretize(&Law::NormalProduct.density(), 12.0, n).unwrap();
            let d = self_difference(&p).unwrap().window(12.0).unwrap();
            let v = check_log_concavity_grid(&d, 1e-12).unwrap();
            let w = v.witness.unwrap();
            assert!(w.m.abs() < 4.0 * p.step(), "{w:?}");
            w.violation
        };
        let (a, b) = (worst(2048), worst(4096));
        assert!(b < 0.6 * a && b > 0.4 * a, "{a:e} {b:e}");
    }
}
