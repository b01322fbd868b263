use std::collections::BTreeMap;

use nalgebra::DVector;

use super::{argmin_first, ParamGrid};
use crate::error::{check_dim, invalid, Result};
use crate::operators::LinearOperator;
use crate::spectral_reg::{landweber_iters_from_lambda, FilterKind, SpectralMethod};

/// Quasi-optimal choice on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct QuasiOptimal {
    /// One-based index `j*` in `{1, ..., N - 1}`.
    pub index: usize,
    pub lambda: f64,
    /// `distances[j - 1]` is the criterion value at `j`.
    pub distances: Vec<f64>,
}

fn select(grid: &ParamGrid, distances: Vec<f64>) -> Result<QuasiOptimal> {
    let i = argmin_first(&distances).ok_or_else(|| invalid("quasi-optimality distances are all NaN"))?;
    Ok(QuasiOptimal {
        index: i + 1,
        lambda: grid.values()[i],
        distances,
    })
}

fn require_two(grid: &ParamGrid) -> Result<()> {
    if grid.len() < 2 {
        return Err(invalid("quasi-optimality needs at least two grid points"));
    }
    Ok(())
}

/// `j* = argmin_j ||x_{lambda_j} - x_{lambda_{j+1}}||` over a solution path aligned with `grid`.
pub fn quasi_optimality_tikhonov(path: &[DVector<f64>], grid: &ParamGrid) -> Result<QuasiOptimal> {
    require_two(grid)?;
    check_dim(grid.len(), path.len())?;
    let distances = path.windows(2).map(|w| (&w[0] - &w[1]).norm()).collect();
    select(grid, distances)
}

/// Iteration counts `k_j = floor(1 / lambda_{j+1})` for `j = 1, ..., N - 1`.
fn landweber_counts(grid: &ParamGrid) -> Vec<u64> {
    grid.values()[1..]
        .iter()
        .map(|&l| landweber_iters_from_lambda(l))
        .collect()
}

/// `j* = argmin_j ||x_{2 k_j} - x_{k_j}||` with `k_j = floor(1 / lambda_{j+1})` Landweber iterates.
pub fn quasi_optimality_landweber<O: LinearOperator + ?Sized>(
    op: &O,
    y: &DVector<f64>,
    grid: &ParamGrid,
    gamma: f64,
) -> Result<QuasiOptimal> {
    require_two(grid)?;
    check_dim(op.output_dim(), y.len())?;
    FilterKind::Landweber { gamma }.validate(op.operator_norm())?;
    let counts = landweber_counts(grid);
    let mut wanted: BTreeMap<u64, Option<DVector<f64>>> = BTreeMap::new();
    for &k in &counts {
        wanted.insert(k, None);
        wanted.insert(2 * k, None);
    }
    let last = *wanted.keys().next_back().expect("nonempty");
    let mut x = DVector::zeros(op.input_dim());
    for k in 0..=last {
        if let Some(slot) = wanted.get_mut(&k) {
            *slot = Some(x.clone());
        }
        if k < last {
            let residual = y - op.apply_unchecked(&x);
            x.axpy(gamma, &op.adjoint_unchecked(&residual), 1.0);
        }
    }
    let iterate = |k: u64| wanted[&k].as_ref().expect("stored iterate");
    let distances = counts
        .iter()
        .map(|&k| (iterate(2 * k) - iterate(k)).norm())
        .collect();
    select(grid, distances)
}

/// Same criterion evaluated through the singular basis of `method`'s operator.
pub fn quasi_optimality_landweber_spectral(
    method: &SpectralMethod,
    data: &DVector<f64>,
    grid: &ParamGrid,
    gamma: f64,
) -> Result<QuasiOptimal> {
    require_two(grid)?;
    check_dim(method.decomposition().rank(), data.len())?;
    let distances = landweber_counts(grid)
        .iter()
        .map(|&k| {
            let hi = method.landweber_coefficients(data, gamma, 2 * k);
            let lo = method.landweber_coefficients(data, gamma, k);
            (hi - lo).norm()
        })
        .collect();
    select(grid, distances)
}
