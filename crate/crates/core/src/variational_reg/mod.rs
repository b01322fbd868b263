//! Convex variational regularization `min_x 1/2 ||A x - y||^2 + lambda J(x)`:
//! soft-thresholding, lasso and total-variation denoising, with the Bregman losses
//! built from their subgradients.

mod lasso;
mod tv;

use nalgebra::DVector;

pub use lasso::{lasso_solve, lasso_solve_from, LassoMethod};
pub use tv::{bregman_tv, total_variation, tv_denoise, tv_denoise_from, TvMethod, TvSolution};

use crate::error::{check_dim, invalid, Result};
use crate::param_select::{Certificate, ParamGrid, Reconstruction, RegularizationMethod};

/// Stopping rule for the iterative solvers: stop when `||x_{t+1} - x_t||_2 < tolerance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl SolverConfig {
    pub fn new(tolerance: f64, max_iterations: usize) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(invalid(format!("tolerance must be > 0, got {tolerance}")));
        }
        if max_iterations == 0 {
            return Err(invalid("max_iterations must be >= 1"));
        }
        Ok(Self {
            tolerance,
            max_iterations,
        })
    }

    /// Lasso deblurring default: tolerance `1e-6`.
    pub fn lasso() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 200_000,
        }
    }

    /// TV denoising default: tolerance `1e-8`.
    pub fn tv() -> Self {
        Self {
            tolerance: 1e-8,
            max_iterations: 200_000,
        }
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Componentwise `y_i - lambda sign(y_i)` if `|y_i| > lambda`, else 0.
pub fn soft_threshold(y: &DVector<f64>, lambda: f64) -> Result<DVector<f64>> {
    if !(lambda >= 0.0) {
        return Err(invalid(format!("threshold must be >= 0, got {lambda}")));
    }
    Ok(y.map(|v| shrink(v, lambda)))
}

pub(crate) fn shrink(v: f64, lambda: f64) -> f64 {
    if v.abs() > lambda {
        v - lambda * sign(v)
    } else {
        0.0
    }
}

/// `sign(x)` with `sign(0) = 0`, an element of the subdifferential of `||.||_1` at `x`.
pub fn l1_subgradient(x: &DVector<f64>) -> DVector<f64> {
    x.map(sign)
}

/// `||x||_1 - <sign(x_ref), x>`, the l1 Bregman divergence with the sign rule at `x_ref`.
pub fn bregman_l1(x: &DVector<f64>, x_ref: &DVector<f64>) -> Result<f64> {
    check_dim(x.len(), x_ref.len())?;
    Ok(x.iter()
        .zip(x_ref.iter())
        .map(|(a, r)| a.abs() - sign(*r) * a)
        .sum())
}

/// `||x||_1 - ||x_ref||_1 - <s, x - x_ref>` for a given subgradient `s` at `x_ref`.
pub fn bregman_l1_with_subgradient(
    x: &DVector<f64>,
    x_ref: &DVector<f64>,
    s: &DVector<f64>,
) -> Result<f64> {
    check_dim(x.len(), x_ref.len())?;
    check_dim(x.len(), s.len())?;
    Ok(x.iter()
        .zip(x_ref.iter())
        .zip(s.iter())
        .map(|((a, r), g)| a.abs() - r.abs() - g * (a - r))
        .sum())
}

/// Closed-form l1 denoiser `x_lambda = S_lambda(y)`.
///
/// The certificate is `(y - S_lambda(y)) / lambda`, which equals `sign(y)` on the support
/// and `y / lambda` off it.
#[derive(Debug, Clone, Copy, Default)]
pub struct SoftThresholdMethod;

impl RegularizationMethod for SoftThresholdMethod {
    fn reconstruct(&self, y: &DVector<f64>, lambda: f64) -> Result<Reconstruction> {
        if !(lambda > 0.0) {
            return Err(invalid(format!("regularization parameter must be > 0, got {lambda}")));
        }
        let x = soft_threshold(y, lambda)?;
        let cert = (y - &x).map(|v| (v / lambda).clamp(-1.0, 1.0));
        Ok(Reconstruction {
            x,
            certificate: Some(Certificate::Subgradient(cert)),
        })
    }
}

/// Solutions of `method` for every grid value, in grid order.
pub fn regularization_path(
    method: &dyn RegularizationMethod,
    y: &DVector<f64>,
    grid: &ParamGrid,
) -> Result<Vec<Reconstruction>> {
    method.path(y, grid.values())
}
