//! The end-to-end verification pipeline.
//!
//! Steps run in proof order: the product density, its MGF, the MGF of the
//! difference, the Laplace identification, the shape verdicts and,
//! optionally, a Monte Carlo check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dist::{
    discretize, laplace_cdf, laplace_density, normal_product_density, total_mass, Law,
};
use crate::error::Result;
use crate::mc::{ks_statistic, sample, Generator, GOLDEN_SEEDS, GOLDEN_TABLE_ID};
use crate::shape::{
    check_log_concavity_grid, check_log_convexity_interval, check_ratio_monotonicity, Outcome,
    ShapeVerdict,
};
use crate::specfun::{bessel_k0, bessel_k0_quadrature_oracle};
use crate::transform::{
    mgf_difference_closed_form, mgf_product_closed_form, mgf_self_difference, mgf_via_conditioning,
    mgf_via_density, self_difference, self_difference_quadrature,
};

/// MGF arguments checked by steps 2 and 3.
pub const MGF_PROBES: [f64; 7] = [0.0, 0.25, -0.25, 0.5, -0.5, 0.9, -0.9];

/// Relative accuracy demanded of the Bessel density against its oracle.
pub const DENSITY_TOL: f64 = 1e-12;

/// Absolute accuracy demanded of the product density's total mass.
pub const MASS_TOL: f64 = 1e-8;

/// Sup-node distance allowed between the grid self-difference and Laplace.
pub const LAPLACE_SUP_TOL: f64 = 1e-3;

/// Per-node relative accuracy of the quadrature self-difference.
pub const SELF_DIFFERENCE_QUAD_TOL: f64 = 1e-11;

/// Significance level of the Monte Carlo step.
pub const MC_ALPHA: f64 = 0.001;

/// At least this many golden seeds must pass against the Laplace law.
pub const MC_MIN_PASSES: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

impl Status {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step_name: String,
    pub status: Status,
    pub metrics: BTreeMap<String, f64>,
    /// Set when the step could not be computed at all.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub n_cells: usize,
    pub tol_shape: f64,
    pub tol_mgf: f64,
    pub seed_table_id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub steps: Vec<StepReport>,
    pub overall: Status,
    pub parameters: Parameters,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.overall == Status::Pass
    }

    pub fn first_failure(&self) -> Option<&StepReport> {
        self.steps.iter().find(|s| s.status == Status::Fail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub half_width: f64,
    pub n_cells: usize,
    pub tol_shape: f64,
    pub tol_mgf: f64,
    pub with_mc: bool,
    pub mc_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            half_width: 12.0,
            n_cells: 4096,
            tol_shape: 1e-9,
            tol_mgf: 1e-8,
            with_mc: false,
            mc_samples: 1_000_000,
        }
    }
}

type Metrics = BTreeMap<String, f64>;

fn metrics<const N: usize>(pairs: [(&str, f64); N]) -> Metrics {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn step(name: &str, body: impl FnOnce() -> Result<(bool, Metrics)>) -> StepReport {
    match body() {
        Ok((ok, metrics)) => StepReport {
            step_name: name.to_string(),
            status: Status::from_bool(ok),
            metrics,
            error: None,
        },
        Err(e) => StepReport {
            step_name: name.to_string(),
            status: Status::Fail,
            metrics: Metrics::new(),
            error: Some(e.to_string()),
        },
    }
}

/// Log-spaced points in `[1e-6, 700]`, both signs.
fn density_probes() -> Vec<f64> {
    let n = 64;
    let (lo, hi) = (1e-6_f64.ln(), 700.0_f64.ln());
    (0..n)
        .map(|i| (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp())
        .flat_map(|x| [x, -x])
        .collect()
}

fn density_identity() -> Result<(bool, Metrics)> {
    let probes = density_probes();
    let mut worst: f64 = 0.0;
    for &x in &probes {
        let value = normal_product_density(x)?;
        let oracle = bessel_k0_quadrature_oracle(x.abs(), 1e-14)?.value / std::f64::consts::PI;
        let err = (value - oracle).abs() / oracle.abs().max(1e-300);
        worst = worst.max(err);
    }
    let mass = total_mass(&Law::NormalProduct.density(), 1e-11)?.value;
    let mass_error = (mass - 1.0).abs();
    Ok((
        worst <= DENSITY_TOL && mass_error <= MASS_TOL,
        metrics([
            ("n_probes", probes.len() as f64),
            ("max_rel_error", worst),
            ("rel_tolerance", DENSITY_TOL),
            ("mass", mass),
            ("mass_abs_error", mass_error),
            ("mass_tolerance", MASS_TOL),
        ]),
    ))
}

fn mgf_identity(tol: f64) -> Result<(bool, Metrics)> {
    let d = Law::NormalProduct.density();
    let (mut by_density, mut by_conditioning): (f64, f64) = (0.0, 0.0);
    for t in MGF_PROBES {
        let exact = mgf_product_closed_form(t)?.value;
        by_density = by_density.max((mgf_via_density(&d, t, 0.1 * tol)?.value - exact).abs());
        by_conditioning = by_conditioning.max((mgf_via_conditioning(t, 0.1 * tol)?.value - exact).abs());
    }
    Ok((
        by_density <= tol && by_conditioning <= tol,
        metrics([
            ("n_probes", MGF_PROBES.len() as f64),
            ("max_abs_error_density", by_density),
            ("max_abs_error_conditioning", by_conditioning),
            ("tolerance", tol),
        ]),
    ))
}

fn difference_mgf(tol: f64) -> Result<(bool, Metrics)> {
    let d = Law::NormalProduct.density();
    let tol = 10.0 * tol;
    let mut worst: f64 = 0.0;
    for t in MGF_PROBES {
        let exact = mgf_difference_closed_form(t)?.value;
        worst = worst.max((mgf_self_difference(&d, t, 0.01 * tol)?.value - exact).abs());
    }
    Ok((
        worst <= tol,
        metrics([
            ("n_probes", MGF_PROBES.len() as f64),
            ("max_abs_error", worst),
            ("tolerance", tol),
        ]),
    ))
}

fn laplace_identification(cfg: &VerifyConfig) -> Result<(bool, Metrics)> {
    let d = Law::NormalProduct.density();
    let sup_at = |n: usize| -> Result<f64> {
        let g = discretize(&d, cfg.half_width, n)?;
        Ok(self_difference(&g)?.sup_distance_to(laplace_density))
    };
    let sup = sup_at(cfg.n_cells)?;
    let refined = sup_at(2 * cfg.n_cells)?;
    Ok((
        sup <= LAPLACE_SUP_TOL && refined < sup,
        metrics([
            ("sup_distance", sup),
            ("sup_distance_doubled_cells", refined),
            ("tolerance", LAPLACE_SUP_TOL),
        ]),
    ))
}

fn verdict_metrics(m: &mut Metrics, prefix: &str, v: &ShapeVerdict) {
    m.insert(format!("{prefix}_holds"), f64::from(u8::from(v.holds())));
    if let Some(w) = v.witness {
        m.insert(format!("{prefix}_witness_x"), w.x);
        m.insert(format!("{prefix}_witness_m"), w.m);
        m.insert(format!("{prefix}_witness_y"), w.y);
        m.insert(format!("{prefix}_witness_violation"), w.violation);
    }
}

fn shape_verdicts(cfg: &VerifyConfig) -> Result<(bool, Metrics)> {
    let tol = cfg.tol_shape;
    let (l, n) = (cfg.half_width, cfg.n_cells);
    let product_law = Law::NormalProduct.density();
    let product_grid = discretize(&product_law, l, n)?;
    let product = check_log_concavity_grid(&product_grid, tol)?;
    let difference = check_log_concavity_grid(
        &self_difference_quadrature(&product_law, l, n, SELF_DIFFERENCE_QUAD_TOL)?,
        tol,
    )?;
    let laplace = check_log_concavity_grid(&discretize(&Law::Laplace.density(), l, n)?, tol)?;
    let k0 = |x: f64| bessel_k0(x).map_or(f64::NAN, |r| r.value);
    let convex = check_log_convexity_interval(k0, 0.01, 30.0, 2048, tol)?;
    let ratio = check_ratio_monotonicity(0.01, 30.0, 2048)?;

    // Diagnostic only: the FFT self-difference of the product grid carries
    // an O(h) artefact next to the origin.
    let fft_grid = self_difference(&product_grid)?.window(l)?;
    let fft_violation = check_log_concavity_grid(&fft_grid, f64::MIN_POSITIVE)?
        .witness
        .map_or(0.0, |w| w.violation);

    let mut m = metrics([
        ("tolerance", tol),
        ("difference_quadrature_rel_tol", SELF_DIFFERENCE_QUAD_TOL),
        ("k0_interval_lo", 0.01),
        ("k0_interval_hi", 30.0),
        ("difference_fft_grid_max_violation", fft_violation),
    ]);
    verdict_metrics(&mut m, "product", &product);
    verdict_metrics(&mut m, "difference", &difference);
    verdict_metrics(&mut m, "laplace", &laplace);
    verdict_metrics(&mut m, "k0_log_convex", &convex);
    verdict_metrics(&mut m, "k_ratio_increasing", &ratio);
    let ok = product.outcome == Outcome::Fails
        && difference.holds()
        && laplace.holds()
        && convex.holds()
        && ratio.holds();
    Ok((ok, m))
}

fn monte_carlo(n: usize) -> Result<(bool, Metrics)> {
    let mut m = metrics([
        ("n", n as f64),
        ("alpha", MC_ALPHA),
        ("seeds", GOLDEN_SEEDS.len() as f64),
        ("min_passes", MC_MIN_PASSES as f64),
    ]);
    let (mut passes, mut wrong_law_rejections) = (0, 0);
    for (i, &seed) in GOLDEN_SEEDS.iter().enumerate() {
        let right = ks_statistic(&sample(Generator::ProductSelfDifference, seed, n)?, laplace_cdf, MC_ALPHA)?;
        let wrong = ks_statistic(&sample(Generator::NormalProduct, seed, n)?, laplace_cdf, MC_ALPHA)?;
        passes += usize::from(right.pass);
        wrong_law_rejections += usize::from(!wrong.pass);
        m.insert(format!("difference_scaled_{i}"), right.scaled);
        m.insert(format!("product_scaled_{i}"), wrong.scaled);
    }
    m.insert("difference_passes".into(), passes as f64);
    m.insert("product_rejections".into(), wrong_law_rejections as f64);
    Ok((
        passes >= MC_MIN_PASSES && wrong_law_rejections == GOLDEN_SEEDS.len(),
        m,
    ))
}

/// Runs every step; a step that cannot be computed is reported as failed.
pub fn verify_theorem(cfg: &VerifyConfig) -> VerificationReport {
    let mut steps = vec![
        step("density_identity", density_identity),
        step("mgf_identity", || mgf_identity(cfg.tol_mgf)),
        step("difference_mgf", || difference_mgf(cfg.tol_mgf)),
        step("laplace_identification", || laplace_identification(cfg)),
        step("shape_verdicts", || shape_verdicts(cfg)),
    ];
    if cfg.with_mc {
        steps.push(step("monte_carlo", || monte_carlo(cfg.mc_samples)));
    }
    let overall = Status::from_bool(steps.iter().all(|s| s.status == Status::Pass));
    VerificationReport {
        steps,
        overall,
        parameters: Parameters {
            half_width: cfg.half_width,
            n_cells: cfg.n_cells,
            tol_shape: cfg.tol_shape,
            tol_mgf: cfg.tol_mgf,
            seed_table_id: GOLDEN_TABLE_ID.to_string(),
        },
    }
}
