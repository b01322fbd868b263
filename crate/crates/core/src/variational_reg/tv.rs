use nalgebra::DVector;

use super::SolverConfig;
use crate::error::{check_dim, invalid, Error, Result};
use crate::operators::{GradientOperator, LinearOperator};
use crate::param_select::{Certificate, Reconstruction, RegularizationMethod};

/// Anisotropic total variation `||D x||_1`.
pub fn total_variation(grad: &GradientOperator, x: &DVector<f64>) -> Result<f64> {
    Ok(grad.apply(x)?.lp_norm(1))
}

#[derive(Debug, Clone)]
pub struct TvSolution {
    pub image: DVector<f64>,
    /// Dual field `eta = p / lambda`, `|eta_j| <= 1`, with `D^T eta = (y - image) / lambda`.
    pub eta: DVector<f64>,
    pub iterations: usize,
}

/// Solves `min_x 1/2 ||x - y||^2 + lambda ||D x||_1` by FISTA on the dual
/// `min_{|p_j| <= lambda} 1/2 ||y - D^T p||^2`, recovering `x = y - D^T p`.
pub fn tv_denoise(
    grad: &GradientOperator,
    y: &DVector<f64>,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<TvSolution> {
    let p0 = DVector::zeros(grad.output_dim());
    tv_denoise_from(grad, y, lambda, cfg, &p0)
}

/// Warm-started dual FISTA; `p0` is projected onto the feasible box first.
pub fn tv_denoise_from(
    grad: &GradientOperator,
    y: &DVector<f64>,
    lambda: f64,
    cfg: &SolverConfig,
    p0: &DVector<f64>,
) -> Result<TvSolution> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("regularization parameter must be > 0, got {lambda}")));
    }
    check_dim(grad.input_dim(), y.len())?;
    check_dim(grad.output_dim(), p0.len())?;
    let step = 1.0 / GradientOperator::LIPSCHITZ_BOUND;
    let project = |v: f64| v.clamp(-lambda, lambda);

    let mut p_prev = p0.map(project);
    let mut q = p_prev.clone();
    let mut t = 1.0_f64;
    let mut last_change = f64::INFINITY;
    for it in 1..=cfg.max_iterations {
        let x = y - grad.adjoint_unchecked(&q);
        let p = (q + grad.apply_unchecked(&x) * step).map(project);
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let diff = &p - &p_prev;
        last_change = diff.norm();
        if last_change < cfg.tolerance {
            let image = y - grad.adjoint_unchecked(&p);
            let eta = p / lambda;
            return Ok(TvSolution {
                image,
                eta,
                iterations: it,
            });
        }
        q = &p + diff * ((t - 1.0) / t_next);
        p_prev = p;
        t = t_next;
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        last_change,
    })
}

/// `TV(x) - TV(x_ref) - <D^T eta, x - x_ref>` where `D^T eta` certifies a subgradient at `x_ref`.
pub fn bregman_tv(
    grad: &GradientOperator,
    x: &DVector<f64>,
    x_ref: &DVector<f64>,
    eta: &DVector<f64>,
) -> Result<f64> {
    check_dim(grad.input_dim(), x.len())?;
    check_dim(grad.input_dim(), x_ref.len())?;
    if eta.is_empty() && grad.output_dim() > 0 {
        return Err(Error::MissingCertificate);
    }
    check_dim(grad.output_dim(), eta.len())?;
    if eta.iter().any(|e| e.abs() > 1.0 + 1e-9) {
        return Err(invalid("dual certificate must satisfy |eta_j| <= 1"));
    }
    let dx = grad.apply_unchecked(x);
    let dref = grad.apply_unchecked(x_ref);
    let tv_x = dx.lp_norm(1);
    let tv_ref = dref.lp_norm(1);
    Ok(tv_x - tv_ref - eta.dot(&(dx - dref)))
}

/// TV denoising on `rows x cols` images, warm-started along the grid.
#[derive(Debug, Clone)]
pub struct TvMethod {
    grad: GradientOperator,
    cfg: SolverConfig,
}

impl TvMethod {
    pub fn new(rows: usize, cols: usize, cfg: SolverConfig) -> Self {
        Self {
            grad: GradientOperator::new(rows, cols),
            cfg,
        }
    }

    pub fn gradient(&self) -> &GradientOperator {
        &self.grad
    }

    fn wrap(sol: TvSolution) -> Reconstruction {
        Reconstruction {
            x: sol.image,
            certificate: Some(Certificate::TvDual(sol.eta)),
        }
    }
}

impl RegularizationMethod for TvMethod {
    fn reconstruct(&self, y: &DVector<f64>, lambda: f64) -> Result<Reconstruction> {
        tv_denoise(&self.grad, y, lambda, &self.cfg).map(Self::wrap)
    }

    /// Ascending `lambda`; the previous dual `lambda_prev * eta` is rescaled to stay feasible.
    fn path(&self, y: &DVector<f64>, lambdas: &[f64]) -> Result<Vec<Reconstruction>> {
        let mut order: Vec<usize> = (0..lambdas.len()).collect();
        order.sort_by(|&a, &b| lambdas[a].total_cmp(&lambdas[b]).then(a.cmp(&b)));
        let mut out: Vec<Option<Reconstruction>> = vec![None; lambdas.len()];
        let mut warm = DVector::zeros(self.grad.output_dim());
        for idx in order {
            let sol = tv_denoise_from(&self.grad, y, lambdas[idx], &self.cfg, &warm)?;
            warm = &sol.eta * lambdas[idx];
            out[idx] = Some(Self::wrap(sol));
        }
        Ok(out.into_iter().map(|r| r.expect("every index solved")).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanishing_lambda_returns_data() {
        let grad = GradientOperator::square(4);
        let y = DVector::from_fn(16, |i, _| ((i * 7) % 5) as f64 / 4.0);
        let sol = tv_denoise(&grad, &y, 1e-8, &SolverConfig::tv()).unwrap();
        assert!((sol.image - &y).amax() < 1e-4);
    }

    #[test]
    fn huge_lambda_returns_mean() {
        let grad = GradientOperator::square(4);
        let y = DVector::from_fn(16, |i, _| ((i * 7) % 5) as f64 / 4.0);
        let sol = tv_denoise(&grad, &y, 1e3, &SolverConfig::tv()).unwrap();
        let mean = y.mean();
        assert!(sol.image.iter().all(|v| (v - mean).abs() < 1e-3));
    }

    #[test]
    fn equal_points_have_zero_divergence() {
        let grad = GradientOperator::square(3);
        let x = DVector::from_fn(9, |i, _| i as f64);
        let eta = DVector::from_element(grad.output_dim(), 0.5);
        assert_eq!(bregman_tv(&grad, &x, &x, &eta).unwrap(), 0.0);
        assert!(matches!(
            bregman_tv(&grad, &x, &x, &DVector::zeros(0)),
            Err(Error::MissingCertificate)
        ));
    }
}
