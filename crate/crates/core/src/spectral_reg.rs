//! Spectral regularization `x_lambda = g_lambda(A^T A) A^T y`, the radial truncation
//! operator and the truncated squared loss.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{check_dim, invalid, Error, Result};
use crate::operators::{LinearOperator, SpectralDecomposition};
use crate::param_select::{LossKind, LossSpec, Reconstruction, RegularizationMethod};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterKind {
    /// `g(sigma) = 1 / (sigma + lambda)`.
    Tikhonov,
    /// `g(sigma) = (1 - (1 - gamma sigma)^k) / sigma` with `k = floor(1 / lambda)`.
    Landweber { gamma: f64 },
    /// `g(sigma) = 1 / sigma` if `sigma >= lambda`, else 0.
    SpectralCutoff,
}

impl FilterKind {
    /// Filter value at an eigenvalue `sigma` of `A^T A` (a squared singular value).
    pub fn value(&self, sigma: f64, lambda: f64) -> f64 {
        match *self {
            FilterKind::Tikhonov => 1.0 / (sigma + lambda),
            FilterKind::Landweber { gamma } => {
                landweber_filter(sigma, gamma, landweber_iters_from_lambda(lambda))
            }
            FilterKind::SpectralCutoff => {
                if sigma >= lambda && sigma > 0.0 {
                    1.0 / sigma
                } else {
                    0.0
                }
            }
        }
    }

    /// Checks the filter against an operator norm (`gamma ||A||^2 < 2` for Landweber).
    pub fn validate(&self, operator_norm: f64) -> Result<()> {
        if let FilterKind::Landweber { gamma } = *self {
            if !(gamma > 0.0) || !(gamma * operator_norm * operator_norm < 2.0) {
                return Err(Error::DivergentStepsize {
                    gamma,
                    norm: operator_norm,
                });
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            FilterKind::Tikhonov => "tikhonov",
            FilterKind::Landweber { .. } => "landweber",
            FilterKind::SpectralCutoff => "cutoff",
        }
    }
}

/// `(1 - (1 - gamma sigma)^k) / sigma`, continuously extended by `gamma k` at `sigma = 0`.
pub fn landweber_filter(sigma: f64, gamma: f64, k: u64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let t = gamma * sigma;
    let kf = k as f64;
    if sigma == 0.0 {
        gamma * kf
    } else if t > 0.0 && t < 1.0 {
        -(kf * (-t).ln_1p()).exp_m1() / sigma
    } else {
        (1.0 - (1.0 - t).powf(kf)) / sigma
    }
}

/// `floor(1 / lambda)`.
pub fn landweber_iters_from_lambda(lambda: f64) -> u64 {
    (1.0 / lambda).floor() as u64
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("regularization parameter must be > 0, got {lambda}")))
    }
}

/// Solves the normal equations `(A^T A + lambda I) x = A^T y` directly.
pub fn tikhonov_solve<O: LinearOperator + ?Sized>(
    op: &O,
    y: &DVector<f64>,
    lambda: f64,
) -> Result<DVector<f64>> {
    check_lambda(lambda)?;
    let rhs = op.adjoint_apply(y)?;
    let a = op.to_dense();
    let mut normal: DMatrix<f64> = a.tr_mul(&a);
    for i in 0..normal.nrows() {
        normal[(i, i)] += lambda;
    }
    normal
        .cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or_else(|| invalid("normal matrix is not positive definite"))
}

/// `k` Landweber steps `x <- x + gamma A^T (y - A x)` from `x = 0`.
pub fn landweber_solve<O: LinearOperator + ?Sized>(
    op: &O,
    y: &DVector<f64>,
    k: u64,
    gamma: f64,
) -> Result<DVector<f64>> {
    check_dim(op.output_dim(), y.len())?;
    FilterKind::Landweber { gamma }.validate(op.operator_norm())?;
    let mut x = DVector::zeros(op.input_dim());
    for _ in 0..k {
        let residual = y - op.apply_unchecked(&x);
        x.axpy(gamma, &op.adjoint_unchecked(&residual), 1.0);
    }
    Ok(x)
}

/// `sum_i g_lambda(sigma_i^2) sigma_i <u_i, y> v_i`.
pub fn spectral_filter_solve(
    decomp: &SpectralDecomposition,
    filter: FilterKind,
    y: &DVector<f64>,
    lambda: f64,
) -> Result<DVector<f64>> {
    check_lambda(lambda)?;
    let uy = decomp.data_coefficients(y)?;
    Ok(decomp.synthesize(&filter_coefficients(decomp, filter, &uy, lambda)))
}

fn filter_coefficients(
    decomp: &SpectralDecomposition,
    filter: FilterKind,
    uy: &DVector<f64>,
    lambda: f64,
) -> DVector<f64> {
    let sv = decomp.singular_values();
    DVector::from_fn(uy.len(), |i, _| {
        let s = sv[i];
        filter.value(s * s, lambda) * s * uy[i]
    })
}

/// Radius of the truncation operator `T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationRadius(f64);

impl TruncationRadius {
    pub fn new(radius: f64) -> Result<Self> {
        if radius > 0.0 && radius.is_finite() {
            Ok(Self(radius))
        } else {
            Err(invalid(format!("truncation radius must be > 0, got {radius}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }

    fn factor(self, norm: f64) -> f64 {
        if norm > self.0 {
            self.0 / norm
        } else {
            1.0
        }
    }
}

impl Default for TruncationRadius {
    fn default() -> Self {
        Self(1.0)
    }
}

/// Radial projection onto the ball of radius `r`.
pub fn truncate(x: &DVector<f64>, r: TruncationRadius) -> DVector<f64> {
    x * r.factor(x.norm())
}

/// `||T x - T x'||^2`.
pub fn truncated_sq_loss(x: &DVector<f64>, x_true: &DVector<f64>, r: TruncationRadius) -> f64 {
    (truncate(x, r) - truncate(x_true, r)).norm_squared()
}

/// A spectral filter method bound to the decomposition of a fixed forward operator.
///
/// Risks along a grid are evaluated in the singular basis: after projecting `y` and the
/// truth once, each grid point costs `O(rank)` instead of `O(d^2)`.
#[derive(Debug, Clone)]
pub struct SpectralMethod {
    decomp: SpectralDecomposition,
    filter: FilterKind,
}

/// Data and truth expressed in the singular basis of the operator.
#[derive(Debug, Clone)]
pub struct SpectralSample {
    data: DVector<f64>,
    truth: DVector<f64>,
    truth_norm: f64,
    truth_residual_sq: f64,
}

impl SpectralSample {
    /// `U_r^T y`.
    pub fn data(&self) -> &DVector<f64> {
        &self.data
    }
}

impl SpectralMethod {
    pub fn new<O: LinearOperator + ?Sized>(op: &O, filter: FilterKind) -> Result<Self> {
        let decomp = op.decomposition().clone();
        filter.validate(decomp.largest())?;
        Ok(Self { decomp, filter })
    }

    pub fn from_decomposition(decomp: SpectralDecomposition, filter: FilterKind) -> Result<Self> {
        filter.validate(decomp.largest())?;
        Ok(Self { decomp, filter })
    }

    pub fn filter(&self) -> FilterKind {
        self.filter
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomp
    }

    pub fn project(&self, y: &DVector<f64>, truth: &DVector<f64>) -> Result<SpectralSample> {
        let data = self.decomp.data_coefficients(y)?;
        let coeffs = self.decomp.signal_coefficients(truth)?;
        let truth_norm = truth.norm();
        let truth_residual_sq = (truth_norm * truth_norm - coeffs.norm_squared()).max(0.0);
        Ok(SpectralSample {
            data,
            truth: coeffs,
            truth_norm,
            truth_residual_sq,
        })
    }

    /// Singular-basis coefficients of `x_lambda`.
    pub fn coefficients(&self, data: &DVector<f64>, lambda: f64) -> DVector<f64> {
        filter_coefficients(&self.decomp, self.filter, data, lambda)
    }

    /// Singular-basis coefficients of the `k`-th Landweber iterate with stepsize `gamma`.
    pub fn landweber_coefficients(&self, data: &DVector<f64>, gamma: f64, k: u64) -> DVector<f64> {
        let sv = self.decomp.singular_values();
        DVector::from_fn(data.len(), |i, _| {
            let s = sv[i];
            landweber_filter(s * s, gamma, k) * s * data[i]
        })
    }

    /// Truncated squared loss of a reconstruction given by its coefficients.
    pub fn truncated_loss(
        &self,
        sample: &SpectralSample,
        coefficients: &DVector<f64>,
        radius: TruncationRadius,
    ) -> f64 {
        let a = radius.factor(coefficients.norm());
        let b = radius.factor(sample.truth_norm);
        let mut acc = 0.0;
        for (c, t) in coefficients.iter().zip(sample.truth.iter()) {
            let diff = a * c - b * t;
            acc += diff * diff;
        }
        acc + b * b * sample.truth_residual_sq
    }
}

impl SpectralMethod {
    /// `g_lambda(sigma_i^2) sigma_i` for every lambda.
    fn factor_table(&self, lambdas: &[f64]) -> Result<Vec<DVector<f64>>> {
        let sv = self.decomp.singular_values();
        lambdas
            .iter()
            .map(|&l| {
                check_lambda(l)?;
                Ok(sv.map(|s| self.filter.value(s * s, l) * s))
            })
            .collect()
    }

    /// [`truncated_loss`](Self::truncated_loss) of the reconstruction with the given filter factors.
    fn factor_loss(&self, sample: &SpectralSample, factors: &DVector<f64>, radius: TruncationRadius) -> f64 {
        let (f, d, t) = (factors.as_slice(), sample.data.as_slice(), sample.truth.as_slice());
        let norm_sq = sum4(f.len(), |i| (f[i] * d[i]).powi(2));
        let a = radius.factor(norm_sq.sqrt());
        let b = radius.factor(sample.truth_norm);
        sum4(f.len(), |i| (a * f[i] * d[i] - b * t[i]).powi(2)) + b * b * sample.truth_residual_sq
    }
}

/// `sum_i term(i)` with four interleaved accumulators.
fn sum4(len: usize, term: impl Fn(usize) -> f64) -> f64 {
    let mut acc = [0.0; 4];
    let body = len - len % 4;
    for i in (0..body).step_by(4) {
        for (k, a) in acc.iter_mut().enumerate() {
            *a += term(i + k);
        }
    }
    let tail: f64 = (body..len).map(&term).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

impl RegularizationMethod for SpectralMethod {
    fn reconstruct(&self, y: &DVector<f64>, lambda: f64) -> Result<Reconstruction> {
        spectral_filter_solve(&self.decomp, self.filter, y, lambda).map(Reconstruction::plain)
    }

    fn losses(
        &self,
        y: &DVector<f64>,
        truth: &DVector<f64>,
        lambdas: &[f64],
        loss: &LossSpec,
    ) -> Result<Vec<f64>> {
        let LossKind::TruncatedSquared(radius) = loss.kind() else {
            return self
                .path(y, lambdas)?
                .iter()
                .map(|r| loss.evaluate(r, truth))
                .collect();
        };
        let sample = self.project(y, truth)?;
        let factors = self.factor_table(lambdas)?;
        Ok(factors.iter().map(|f| self.factor_loss(&sample, f, *radius)).collect())
    }

    /// Tabulates the filter factors once and shares them across all pairs.
    fn loss_rows(
        &self,
        pairs: &[(DVector<f64>, DVector<f64>)],
        lambdas: &[f64],
        loss: &LossSpec,
    ) -> Result<Vec<Vec<f64>>> {
        let LossKind::TruncatedSquared(radius) = loss.kind() else {
            return pairs
                .par_iter()
                .map(|(y, x)| self.losses(y, x, lambdas, loss))
                .collect();
        };
        let factors = self.factor_table(lambdas)?;
        pairs
            .par_iter()
            .map(|(y, x)| {
                let sample = self.project(y, x)?;
                Ok(factors.iter().map(|f| self.factor_loss(&sample, f, *radius)).collect())
            })
            .collect()
    }
}
