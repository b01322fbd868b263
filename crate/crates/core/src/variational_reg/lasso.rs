use nalgebra::DVector;

use super::{shrink, SolverConfig};
use crate::error::{check_dim, invalid, Error, Result};
use crate::operators::LinearOperator;
use crate::param_select::{Certificate, Reconstruction, RegularizationMethod};

/// FISTA with constant stepsize `1 / ||A||^2` for `min 1/2 ||A x - y||^2 + lambda ||x||_1`.
pub fn lasso_solve<O: LinearOperator + ?Sized>(
    op: &O,
    y: &DVector<f64>,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<DVector<f64>> {
    let x0 = DVector::zeros(op.input_dim());
    lasso_solve_from(op, y, lambda, cfg, &x0).map(|(x, _)| x)
}

/// Warm-started FISTA; returns the solution and the number of iterations used.
pub fn lasso_solve_from<O: LinearOperator + ?Sized>(
    op: &O,
    y: &DVector<f64>,
    lambda: f64,
    cfg: &SolverConfig,
    x0: &DVector<f64>,
) -> Result<(DVector<f64>, usize)> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("regularization parameter must be > 0, got {lambda}")));
    }
    check_dim(op.output_dim(), y.len())?;
    check_dim(op.input_dim(), x0.len())?;
    let norm = op.operator_norm();
    if !(norm > 0.0) {
        return Err(Error::ZeroOperator);
    }
    let step = 1.0 / (norm * norm);
    let threshold = step * lambda;

    let mut x_prev = x0.clone();
    let mut z = x0.clone();
    let mut t = 1.0_f64;
    let mut last_change = f64::INFINITY;
    for it in 1..=cfg.max_iterations {
        let residual = op.apply_unchecked(&z) - y;
        let grad = op.adjoint_unchecked(&residual);
        let x = (z - grad * step).map(|v| shrink(v, threshold));
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let diff = &x - &x_prev;
        last_change = diff.norm();
        if last_change < cfg.tolerance {
            return Ok((x, it));
        }
        z = &x + diff * ((t - 1.0) / t_next);
        x_prev = x;
        t = t_next;
    }
    Err(Error::NotConverged {
        iterations: cfg.max_iterations,
        last_change,
    })
}

/// Lasso reconstruction with certificate `A^T (y - A x) / lambda` (clipped to `[-1, 1]`).
#[derive(Debug, Clone)]
pub struct LassoMethod<O> {
    op: O,
    cfg: SolverConfig,
}

impl<O: LinearOperator> LassoMethod<O> {
    pub fn new(op: O, cfg: SolverConfig) -> Self {
        Self { op, cfg }
    }

    pub fn operator(&self) -> &O {
        &self.op
    }

    fn finish(&self, y: &DVector<f64>, x: DVector<f64>, lambda: f64) -> Reconstruction {
        let residual = y - self.op.apply_unchecked(&x);
        let cert = self
            .op
            .adjoint_unchecked(&residual)
            .map(|v| (v / lambda).clamp(-1.0, 1.0));
        Reconstruction {
            x,
            certificate: Some(Certificate::Subgradient(cert)),
        }
    }
}

impl<O: LinearOperator> RegularizationMethod for LassoMethod<O> {
    fn reconstruct(&self, y: &DVector<f64>, lambda: f64) -> Result<Reconstruction> {
        let x = lasso_solve(&self.op, y, lambda, &self.cfg)?;
        Ok(self.finish(y, x, lambda))
    }

    /// Warm-starts from the largest `lambda` downwards.
    fn path(&self, y: &DVector<f64>, lambdas: &[f64]) -> Result<Vec<Reconstruction>> {
        let mut order: Vec<usize> = (0..lambdas.len()).collect();
        order.sort_by(|&a, &b| lambdas[b].total_cmp(&lambdas[a]).then(a.cmp(&b)));
        let mut out: Vec<Option<Reconstruction>> = vec![None; lambdas.len()];
        let mut warm = DVector::zeros(self.op.input_dim());
        for idx in order {
            let (x, _) = lasso_solve_from(&self.op, y, lambdas[idx], &self.cfg, &warm)?;
            warm.copy_from(&x);
            out[idx] = Some(self.finish(y, x, lambdas[idx]));
        }
        Ok(out.into_iter().map(|r| r.expect("every index solved")).collect())
    }
}
