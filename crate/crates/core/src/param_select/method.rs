use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{check_dim, invalid, Error, Result};
use crate::operators::GradientOperator;
use crate::spectral_reg::{truncated_sq_loss, TruncationRadius};
use crate::variational_reg::{bregman_l1_with_subgradient, bregman_tv, l1_subgradient};

/// Optimality certificate attached to a reconstruction `x_lambda`.
#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// A subgradient of the regularizer at `x_lambda`, e.g. `A^T (y - A x) / lambda`.
    Subgradient(DVector<f64>),
    /// A dual field `eta` with `|eta_j| <= 1` such that `D^T eta` is a subgradient of TV.
    TvDual(DVector<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub x: DVector<f64>,
    pub certificate: Option<Certificate>,
}

impl Reconstruction {
    pub fn plain(x: DVector<f64>) -> Self {
        Self { x, certificate: None }
    }
}

/// A regularization method `lambda -> f_lambda`, mapping data `y` to a reconstruction.
pub trait RegularizationMethod: Send + Sync {
    fn reconstruct(&self, y: &DVector<f64>, lambda: f64) -> Result<Reconstruction>;

    /// Reconstructions for every `lambda` in order. Solvers may warm-start along the path.
    fn path(&self, y: &DVector<f64>, lambdas: &[f64]) -> Result<Vec<Reconstruction>> {
        lambdas.iter().map(|&l| self.reconstruct(y, l)).collect()
    }

    /// `loss(f_lambda(y), truth)` for every `lambda` in order.
    fn losses(
        &self,
        y: &DVector<f64>,
        truth: &DVector<f64>,
        lambdas: &[f64],
        loss: &LossSpec,
    ) -> Result<Vec<f64>> {
        self.path(y, lambdas)?
            .iter()
            .map(|r| loss.evaluate(r, truth))
            .collect()
    }

    /// [`losses`](Self::losses) for every pair; methods may share work across pairs.
    fn loss_rows(
        &self,
        pairs: &[(DVector<f64>, DVector<f64>)],
        lambdas: &[f64],
        loss: &LossSpec,
    ) -> Result<Vec<Vec<f64>>> {
        pairs
            .par_iter()
            .map(|(y, x)| self.losses(y, x, lambdas, loss))
            .collect()
    }
}

/// How the subgradient at the reconstruction is chosen for the l1 Bregman loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubgradientRule {
    /// `sign(x_lambda)` with `sign(0) = 0`.
    ReferenceSign,
    /// The solver's own optimality certificate.
    Certificate,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LossKind {
    /// `||T x - T x'||^2` with radial truncation `T`.
    TruncatedSquared(TruncationRadius),
    /// `D_{||.||_1}(x_true, x_lambda)`.
    L1Bregman(SubgradientRule),
    /// `D_TV(x_true, x_lambda)` on a `rows x cols` image.
    TvBregman { rows: usize, cols: usize },
}

/// Loss together with its a priori bound `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    kind: LossKind,
    bound: f64,
}

impl LossSpec {
    /// Truncated squared loss, bounded by `M = 4 r^2`.
    pub fn truncated_squared(radius: TruncationRadius) -> Self {
        let r = radius.get();
        Self {
            kind: LossKind::TruncatedSquared(radius),
            bound: 4.0 * r * r,
        }
    }

    /// l1 Bregman loss on `R^d` for truths in the Euclidean ball of radius `truth_radius`.
    ///
    /// `D(x, x') <= 2 ||x||_1 <= 2 sqrt(d) ||x||_2`, so `M = 2 sqrt(d) * truth_radius`.
    pub fn l1_bregman(rule: SubgradientRule, dim: usize, truth_radius: f64) -> Self {
        Self {
            kind: LossKind::L1Bregman(rule),
            bound: 2.0 * (dim as f64).sqrt() * truth_radius,
        }
    }

    /// TV Bregman loss for images with pixels in `[0, 1]`: `D <= 2 TV(x) <= 2 * #edges`.
    pub fn tv_bregman(rows: usize, cols: usize) -> Self {
        let edges = rows.saturating_sub(1) * cols + rows * cols.saturating_sub(1);
        Self {
            kind: LossKind::TvBregman { rows, cols },
            bound: 2.0 * edges as f64,
        }
    }

    pub fn with_bound(mut self, bound: f64) -> Result<Self> {
        if !(bound > 0.0) {
            return Err(invalid(format!("loss bound must be > 0, got {bound}")));
        }
        self.bound = bound;
        Ok(self)
    }

    pub fn kind(&self) -> &LossKind {
        &self.kind
    }

    /// The constant `M` with `loss <= M`.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// `loss(reconstruction, truth)`; Bregman losses use the reconstruction as reference point.
    pub fn evaluate(&self, recon: &Reconstruction, truth: &DVector<f64>) -> Result<f64> {
        check_dim(truth.len(), recon.x.len())?;
        match &self.kind {
            LossKind::TruncatedSquared(r) => Ok(truncated_sq_loss(&recon.x, truth, *r)),
            LossKind::L1Bregman(SubgradientRule::ReferenceSign) => {
                let s = l1_subgradient(&recon.x);
                bregman_l1_with_subgradient(truth, &recon.x, &s)
            }
            LossKind::L1Bregman(SubgradientRule::Certificate) => match &recon.certificate {
                Some(Certificate::Subgradient(s)) => bregman_l1_with_subgradient(truth, &recon.x, s),
                _ => Err(Error::MissingCertificate),
            },
            LossKind::TvBregman { rows, cols } => match &recon.certificate {
                Some(Certificate::TvDual(eta)) => {
                    let grad = GradientOperator::new(*rows, *cols);
                    bregman_tv(&grad, truth, &recon.x, eta)
                }
                _ => Err(Error::MissingCertificate),
            },
        }
    }
}
