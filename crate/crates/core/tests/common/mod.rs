//! Values pinned from a reference run over the golden seed table
//! (n = 10⁶ per seed, in `GOLDEN_SEEDS` order).

#![allow(dead_code)]

pub const MC_N: usize = 1_000_000;

/// √n·D of `X₁X₂ - X₃X₄` against the Laplace CDF.
pub const DIFFERENCE_SCALED: [f64; 10] = [
    9.52565065511334907e-1,
    1.24633026509790579e0,
    7.19100997166821632e-1,
    9.59370635467471367e-1,
    5.49116669710691951e-1,
    7.11219351729269755e-1,
    6.85967300704026783e-1,
    4.97684275965415424e-1,
    7.40230785183260132e-1,
    8.87792790675578924e-1,
];

/// √n·D of `X₁X₂` against the Laplace CDF.
pub const PRODUCT_SCALED: [f64; 10] = [
    9.85704190471901569e1,
    9.95611165939459539e1,
    9.96336642030688466e1,
    9.85577210979291465e1,
    9.90367200629254398e1,
    9.93978621511888747e1,
    9.91812586856026570e1,
    9.80510956125818467e1,
    9.87563392142917280e1,
    9.88172710483700172e1,
];

/// Pinned statistics are compared with this relative tolerance, which
/// leaves room for last-bit differences in `ln`/`exp` across platforms.
pub const SCALED_REL_TOL: f64 = 1e-9;

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
