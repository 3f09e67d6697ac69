//! Numerical verification that `X₁X₂ - X₃X₄` (independent standard
//! normals) has the log-concave Laplace(0, 1) density while `X₁X₂`, with
//! density `K₀(|x|)/π`, is not log-concave.

pub mod cli;
pub mod dist;
pub mod error;
pub mod json;
pub mod mc;
pub mod quad;
pub mod report;
pub mod shape;
pub mod specfun;
pub mod transform;

pub use error::{Error, Result};
