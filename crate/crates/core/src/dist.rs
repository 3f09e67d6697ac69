//! The three laws in play (standard normal, normal product, Laplace(0, 1)),
//! and [`GridDensity`], the midpoint-grid representation every numeric
//! pipeline works on.

use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{Integral, Quadrature};
use crate::specfun::{bessel_k0, log_bessel_k0};

const LN_PI: f64 = 1.144_729_885_849_400_2;
const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// A density on the real line given by closed-form evaluators.
///
/// `singular_points` lists where the density is infinite or not smooth;
/// integrators split panels there. `mgf_radius` is the half-width of the
/// strip `|t| < r` on which `∫ e^{tx} f(x) dx` converges.
#[derive(Clone, Copy)]
pub struct AnalyticDensity {
    pub name: &'static str,
    pub eval: fn(f64) -> f64,
    pub log_eval: fn(f64) -> f64,
    pub support: (f64, f64),
    pub singular_points: &'static [f64],
    pub mgf_radius: f64,
    /// `f(-x) = f(x)`.
    pub symmetric: bool,
}

impl fmt::Debug for AnalyticDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticDensity")
            .field("name", &self.name)
            .field("support", &self.support)
            .field("singular_points", &self.singular_points)
            .finish()
    }
}

/// Built-in laws, addressable by name from the CLI and the C ABI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Law {
    Normal,
    NormalProduct,
    Laplace,
}

impl Law {
    pub const ALL: [Law; 3] = [Law::Normal, Law::NormalProduct, Law::Laplace];

    pub fn name(self) -> &'static str {
        match self {
            Law::Normal => "normal",
            Law::NormalProduct => "normal-product",
            Law::Laplace => "laplace",
        }
    }

    pub fn density(self) -> AnalyticDensity {
        match self {
            Law::Normal => AnalyticDensity {
                name: "normal",
                eval: normal_density,
                log_eval: normal_log_density,
                support: (f64::NEG_INFINITY, f64::INFINITY),
                singular_points: &[],
                mgf_radius: f64::INFINITY,
                symmetric: true,
            },
            Law::NormalProduct => AnalyticDensity {
                name: "normal-product",
                eval: |x| {
                    if x == 0.0 {
                        f64::INFINITY
                    } else {
                        bessel_k0(x.abs()).map_or(f64::NAN, |r| r.value) / std::f64::consts::PI
                    }
                },
                log_eval: |x| {
                    if x == 0.0 {
                        f64::INFINITY
                    } else {
                        log_bessel_k0(x.abs()).unwrap_or(f64::NAN) - LN_PI
                    }
                },
                support: (f64::NEG_INFINITY, f64::INFINITY),
                singular_points: &[0.0],
                mgf_radius: 1.0,
                symmetric: true,
            },
            Law::Laplace => AnalyticDensity {
                name: "laplace",
                eval: laplace_density,
                log_eval: |x| -x.abs() - std::f64::consts::LN_2,
                support: (f64::NEG_INFINITY, f64::INFINITY),
                singular_points: &[0.0],
                mgf_radius: 1.0,
                symmetric: true,
            },
        }
    }

    /// The CDF as a plain function pointer.
    pub fn cdf_fn(self) -> fn(f64) -> f64 {
        match self {
            Law::Normal => normal_cdf,
            Law::NormalProduct => |x| normal_product_cdf(x, 1e-13).unwrap_or(f64::NAN),
            Law::Laplace => laplace_cdf,
        }
    }

    /// Cumulative distribution function. The normal-product CDF is a
    /// quadrature at absolute tolerance 1e-13.
    pub fn cdf(self, x: f64) -> f64 {
        match self {
            Law::Normal => normal_cdf(x),
            Law::NormalProduct => normal_product_cdf(x, 1e-13).unwrap_or(f64::NAN),
            Law::Laplace => laplace_cdf(x),
        }
    }
}

impl fmt::Display for Law {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Law {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Law::Normal),
            "normal-product" | "product" => Ok(Law::NormalProduct),
            "laplace" => Ok(Law::Laplace),
            other => Err(Error::Parse(format!(
                "unknown law `{other}` (expected normal, normal-product or laplace)"
            ))),
        }
    }
}

pub fn normal_density(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

fn normal_log_density(x: f64) -> f64 {
    -0.5 * x * x - LN_SQRT_2PI
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal quantile, Wichura's AS 241 (PPND16), relative accuracy
/// about 1e-16. Returns ∓∞ at 0 and 1.
#[allow(clippy::excessive_precision)]
pub fn normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = ((((((2.509_080_928_730_122_672_7e3 * r + 3.343_057_558_358_812_810_5e4) * r
            + 6.726_577_092_700_870_085_3e4)
            * r
            + 4.592_195_393_154_987_145_7e4)
            * r
            + 1.373_169_376_550_946_112_5e4)
            * r
            + 1.971_590_950_306_551_442_7e3)
            * r
            + 1.331_416_678_917_843_774_5e2)
            * r
            + 3.387_132_872_796_366_608_0;
        let den = ((((((5.226_495_278_852_854_561_0e3 * r + 2.872_908_573_572_194_267_4e4) * r
            + 3.930_789_580_009_271_061_0e4)
            * r
            + 2.121_379_430_158_659_586_7e4)
            * r
            + 5.394_196_021_424_751_107_7e3)
            * r
            + 6.871_870_074_920_579_083_0e2)
            * r
            + 4.231_333_070_160_091_125_2e1)
            * r
            + 1.0;
        return q * num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = (-tail.ln()).sqrt();
    let value = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.745_450_142_783_414_076_4e-4 * r + 2.272_384_498_926_918_458_3e-2) * r
            + 2.417_807_251_774_506_117_7e-1)
            * r
            + 1.270_458_252_452_368_382_58)
            * r
            + 3.647_848_324_763_204_605_04)
            * r
            + 5.769_497_221_460_691_405_5)
            * r
            + 4.630_337_846_156_545_295_9)
            * r
            + 1.423_437_110_749_683_577_34;
        let den = ((((((1.050_750_071_644_416_843_24e-9 * r + 5.475_938_084_995_344_946e-4) * r
            + 1.519_866_656_361_645_719_66e-2)
            * r
            + 1.481_039_764_274_800_745_9e-1)
            * r
            + 6.897_673_349_851_000_045_5e-1)
            * r
            + 1.676_384_830_183_803_849_4)
            * r
            + 2.053_191_626_637_758_821_87)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.010_334_399_292_288_132_65e-7 * r + 2.711_555_568_743_487_578_15e-5)
            * r
            + 1.242_660_947_388_078_438_6e-3)
            * r
            + 2.653_218_952_657_612_309_3e-2)
            * r
            + 2.965_605_718_285_048_912_3e-1)
            * r
            + 1.784_826_539_917_291_335_8)
            * r
            + 5.463_784_911_164_114_369_9)
            * r
            + 6.657_904_643_501_103_777_2;
        let den = ((((((2.044_263_103_389_939_785_64e-15 * r + 1.421_511_758_316_445_888_7e-7)
            * r
            + 1.846_318_317_510_054_681_8e-5)
            * r
            + 7.868_691_311_456_132_591e-4)
            * r
            + 1.487_536_129_085_061_485_25e-2)
            * r
            + 1.369_298_809_227_358_053_1e-1)
            * r
            + 5.998_322_065_558_879_376_9e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -value
    } else {
        value
    }
}

pub fn laplace_quantile(p: f64) -> f64 {
    if p < 0.5 {
        (2.0 * p).ln()
    } else {
        -(2.0 * (1.0 - p)).ln()
    }
}

/// Density of `X₁X₂` for independent standard normals: `K₀(|x|)/π`.
pub fn normal_product_density(x: f64) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::Singularity(0.0));
    }
    Ok(bessel_k0(x.abs())?.value / std::f64::consts::PI)
}

pub fn laplace_density(x: f64) -> f64 {
    0.5 * (-x.abs()).exp()
}

pub fn laplace_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.5 * x.exp()
    } else {
        1.0 - 0.5 * (-x).exp()
    }
}

/// `∫₀^{|x|} K₀(t) dt`. The log-singular first panel `[0, min(|x|, 1)]` is
/// integrated in the variable `u = -ln t`.
fn k0_integral(x: f64, tol: f64) -> Result<Integral> {
    let k0 = |t: f64| bessel_k0(t).map_or(f64::NAN, |r| r.value);
    let quad = Quadrature::new(0.5 * tol, 0.0).with_max_panels(10_000);
    let ax = x.abs();
    let head = quad.integrate_singular_left(k0, 0.0, ax.min(1.0))?;
    if ax <= 1.0 {
        return Ok(head);
    }
    // K₀ is below the smallest subnormal past 750.
    let tail = quad.integrate(k0, 1.0, ax.min(750.0))?;
    Ok(Integral::combine(&[head, tail]))
}

/// `F(x) = ½ + sign(x)·(1/π)∫₀^{|x|} K₀(t) dt`, absolute error ≤ `tol`.
pub fn normal_product_cdf(x: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain {
            what: "tolerance must be positive",
            value: tol,
        });
    }
    if x == 0.0 {
        return Ok(0.5);
    }
    let r = k0_integral(x, tol * std::f64::consts::PI)?;
    let half = r.value / std::f64::consts::PI;
    Ok((0.5 + x.signum() * half).clamp(0.0, 1.0))
}

/// `∫ w(x)·f(x) dx` over the support of `d`, with `w = exp(log_weight)`.
///
/// Panels are split at every singular point, and the pieces adjacent to a
/// singular point are integrated in a logarithmic variable.
pub fn integrate_weighted<W: Fn(f64) -> f64>(
    d: &AnalyticDensity,
    log_weight: W,
    tol: f64,
) -> Result<Integral> {
    let f = |x: f64| {
        let l = log_weight(x) + (d.log_eval)(x);
        if l == f64::NEG_INFINITY {
            0.0
        } else {
            l.exp()
        }
    };
    let breaks: Vec<f64> = d.singular_points.to_vec();
    let pieces = 2 * breaks.len().max(1) + 2;
    let quad = Quadrature::new(tol / pieces as f64, 0.0).with_max_panels(10_000);
    integrate_piecewise(&f, d.support, breaks, &quad)
}

/// Integrates `f` over `support`, splitting at `breaks` (points where `f`
/// may be log-singular) and switching to singular substitutions next to them.
pub(crate) fn integrate_piecewise<F: Fn(f64) -> f64>(
    f: &F,
    support: (f64, f64),
    mut breaks: Vec<f64>,
    quad: &Quadrature,
) -> Result<Integral> {
    let (lo, hi) = support;
    breaks.retain(|&s| s > lo && s < hi);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let singular = !breaks.is_empty();
    if breaks.is_empty() {
        breaks.push(0.0_f64.clamp(lo, hi));
    }

    let near = |a: f64, b: f64, at_left: bool| -> Result<Integral> {
        if !singular {
            quad.integrate(f, a, b)
        } else if at_left {
            quad.integrate_singular_left(f, a, b)
        } else {
            quad.integrate_singular_right(f, a, b)
        }
    };

    let mut parts = Vec::with_capacity(2 * breaks.len() + 2);
    let first = breaks[0];
    if lo == f64::NEG_INFINITY {
        parts.push(quad.integrate_from_neg_infinity(f, first - 1.0)?);
        parts.push(near(first - 1.0, first, false)?);
    } else if lo < first {
        parts.push(near(lo, first, false)?);
    }
    for w in breaks.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        parts.push(near(w[0], mid, true)?);
        parts.push(near(mid, w[1], false)?);
    }
    let last = *breaks.last().unwrap();
    if hi == f64::INFINITY {
        parts.push(near(last, last + 1.0, true)?);
        parts.push(quad.integrate_to_infinity(f, last + 1.0)?);
    } else if hi > last {
        parts.push(near(last, hi, true)?);
    }
    Ok(Integral::combine(&parts))
}

/// Total mass of an analytic density.
pub fn total_mass(d: &AnalyticDensity, tol: f64) -> Result<Integral> {
    integrate_weighted(d, |_| 0.0, tol)
}

/// A density sampled on the midpoint grid `x_k = -L + (k + ½)h`,
/// `h = 2L/n`, `n` even, so no node sits on the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    half_width: f64,
    values: Vec<f64>,
    mass_defect: f64,
}

impl GridDensity {
    /// Wraps raw values. No normalization is applied.
    pub fn new(half_width: f64, values: Vec<f64>) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "half-width must be positive and finite, got {half_width}"
            )));
        }
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "cell count must be even and positive, got {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "values must be finite and non-negative, found {v}"
            )));
        }
        Ok(GridDensity {
            half_width,
            values,
            mass_defect: 0.0,
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_cells(&self) -> usize {
        self.values.len()
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / self.values.len() as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        -self.half_width + (k as f64 + 0.5) * self.step()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.values.len()).map(move |k| self.node(k))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        self.step() * self.values.iter().sum::<f64>()
    }

    /// `mass - 1` measured before the last normalization.
    pub fn mass_defect(&self) -> f64 {
        self.mass_defect
    }

    /// Rescales to unit mass, recording the defect.
    pub fn normalized(mut self) -> Result<Self> {
        let mass = self.mass();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::NotNormalized { mass });
        }
        self.values.iter_mut().for_each(|v| *v /= mass);
        self.mass_defect = mass - 1.0;
        Ok(self)
    }

    /// Multiplies every value by `c > 0` without renormalizing.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        GridDensity::new(self.half_width, self.values.iter().map(|v| v * c).collect())
    }

    /// Index of the node closest to `x` (ties go left).
    pub fn nearest_index(&self, x: f64) -> usize {
        let k = ((x + self.half_width) / self.step() - 0.5).round();
        k.clamp(0.0, (self.values.len() - 1) as f64) as usize
    }

    /// The central cells lying inside `[-half_width, half_width]`, as a grid
    /// of its own. Values are copied unchanged (no renormalization).
    pub fn window(&self, half_width: f64) -> Result<Self> {
        let h = self.step();
        let per_side = ((half_width / h) * (1.0 + 1e-12)).floor() as usize;
        let per_side = per_side.min(self.values.len() / 2);
        if per_side == 0 {
            return Err(Error::InvalidGrid(format!(
                "window half-width {half_width} is narrower than one cell"
            )));
        }
        let mid = self.values.len() / 2;
        GridDensity::new(
            per_side as f64 * h,
            self.values[mid - per_side..mid + per_side].to_vec(),
        )
    }

    /// `max_k |v_k - f(x_k)|`.
    pub fn sup_distance_to<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes()
            .zip(&self.values)
            .map(|(x, v)| (v - f(x)).abs())
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,density")?;
        for (x, v) in self.nodes().zip(&self.values) {
            writeln!(out, "{x:.16e},{v:.16e}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Reads the `x,density` format, checking that the nodes form a
    /// symmetric midpoint grid.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty density file".into()))??;
        if header.trim() != "x,density" {
            return Err(Error::Parse(format!(
                "expected header `x,density`, found `{}`",
                header.trim()
            )));
        }
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (x, v) = line
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("row {}: expected two columns", i + 2)))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: {e}", i + 2)))
            };
            xs.push(parse(x)?);
            values.push(parse(v)?);
        }
        if xs.len() < 2 {
            return Err(Error::Parse("density file needs at least two rows".into()));
        }
        let n = xs.len();
        let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
        let half_width = n as f64 * h / 2.0;
        let grid = GridDensity::new(half_width, values)?;
        for (k, &x) in xs.iter().enumerate() {
            if (x - grid.node(k)).abs() > 1e-9 * half_width {
                return Err(Error::Parse(format!(
                    "row {}: node {x} is not on the midpoint grid of half-width {half_width}",
                    k + 2
                )));
            }
        }
        Ok(grid)
    }
}

/// Samples `d` on the midpoint grid of half-width `half_width` with
/// `n_cells` cells and normalizes to unit mass.
///
/// Cells touching a point where the density is infinite store the cell
/// average `(1/h)∫_cell f` instead of the midpoint value.
pub fn discretize(d: &AnalyticDensity, half_width: f64, n_cells: usize) -> Result<GridDensity> {
    if n_cells < 64 || !n_cells.is_multiple_of(2) {
        return Err(Error::InvalidGrid(format!(
            "cell count must be even and at least 64, got {n_cells}"
        )));
    }
    let mut grid = GridDensity::new(half_width, vec![0.0; n_cells])?;
    let h = grid.step();
    let poles: Vec<f64> = d
        .singular_points
        .iter()
        .copied()
        .filter(|&s| !(d.eval)(s).is_finite())
        .collect();
    let quad = Quadrature::new(1e-15, 1e-14).with_max_panels(10_000);
    let mut values = Vec::with_capacity(n_cells);
    for k in 0..n_cells {
        let x = grid.node(k);
        let (a, b) = (x - 0.5 * h, x + 0.5 * h);
        let v = match poles.iter().find(|&&s| s >= a && s <= b) {
            Some(&s) => {
                let left = quad.integrate_singular_right(d.eval, a, s)?;
                let right = quad.integrate_singular_left(d.eval, s, b)?;
                (left.value + right.value) / h
            }
            None => (d.eval)(x),
        };
        values.push(v);
    }
    grid = GridDensity::new(half_width, values)?;
    grid.normalized()
}

/// `h·Σ x_k^p·v_k` for `p ≤ 8`.
pub fn moment(g: &GridDensity, p: u32) -> Result<f64> {
    if p > 8 {
        return Err(Error::Precondition(format!(
            "moment order must be at most 8, got {p}"
        )));
    }
    Ok(g.step()
        * g.nodes()
            .zip(g.values())
            .map(|(x, v)| x.powi(p as i32) * v)
            .sum::<f64>())
}
