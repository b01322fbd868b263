use crate::error::{invalid, Result};
use crate::param_select::{draw_samples, loss_matrix, LossSpec, ParamGrid, RegularizationMethod, Sampler};
use crate::rng::{MasterSeed, Role};

/// Mean and 5th/95th percentiles of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub mean: f64,
    pub p05: f64,
    pub p95: f64,
}

/// Percentile with linear interpolation between order statistics, `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = q * (n - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let frac = pos - lo as f64;
    sorted[lo] + frac * (sorted[hi] - sorted[lo])
}

impl Summary {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("cannot summarize an empty sample"));
        }
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Ok(Self {
            mean,
            p05: percentile(&sorted, 0.05),
            p95: percentile(&sorted, 0.95),
        })
    }
}

/// Sample standard deviation (`n - 1` denominator); zero for a single value.
pub fn std_dev(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
}

/// Monte Carlo estimate of the expected risk at every grid value, from `n_mc` fresh samples.
pub fn expected_risk_curve<M, S>(
    method: &M,
    loss: &LossSpec,
    sampler: &S,
    lambdas: &[f64],
    n_mc: usize,
    seed: MasterSeed,
) -> Result<Vec<Summary>>
where
    M: RegularizationMethod + ?Sized,
    S: Sampler + ?Sized,
{
    if n_mc == 0 {
        return Err(invalid("n_mc must be >= 1"));
    }
    let sample = draw_samples(sampler, n_mc, seed, Role::MonteCarlo)?;
    let rows = loss_matrix(method, loss, &sample, lambdas)?;
    (0..lambdas.len())
        .map(|j| Summary::of(&rows.iter().map(|r| r[j]).collect::<Vec<_>>()))
        .collect()
}

/// Monte Carlo mean and percentiles of the loss at a single `lambda`.
pub fn estimate_expected_risk<M, S>(
    method: &M,
    loss: &LossSpec,
    sampler: &S,
    lambda: f64,
    n_mc: usize,
    seed: MasterSeed,
) -> Result<Summary>
where
    M: RegularizationMethod + ?Sized,
    S: Sampler + ?Sized,
{
    if !(lambda > 0.0) {
        return Err(invalid(format!("regularization parameter must be > 0, got {lambda}")));
    }
    Ok(expected_risk_curve(method, loss, sampler, &[lambda], n_mc, seed)?[0])
}

/// Expected-risk curve over a grid, with the grid minimizer of the mean.
#[derive(Debug, Clone)]
pub struct RiskProfile {
    pub lambdas: Vec<f64>,
    pub summaries: Vec<Summary>,
    pub best_index: usize,
}

impl RiskProfile {
    pub fn estimate<M, S>(
        method: &M,
        loss: &LossSpec,
        sampler: &S,
        grid: &ParamGrid,
        n_mc: usize,
        seed: MasterSeed,
    ) -> Result<Self>
    where
        M: RegularizationMethod + ?Sized,
        S: Sampler + ?Sized,
    {
        let summaries = expected_risk_curve(method, loss, sampler, grid.values(), n_mc, seed)?;
        let means: Vec<f64> = summaries.iter().map(|s| s.mean).collect();
        let best_index = crate::param_select::argmin_first(&means)
            .ok_or_else(|| invalid("expected risk has no finite value"))?;
        Ok(Self {
            lambdas: grid.values().to_vec(),
            summaries,
            best_index,
        })
    }

    pub fn best_lambda(&self) -> f64 {
        self.lambdas[self.best_index]
    }

    pub fn best_risk(&self) -> f64 {
        self.summaries[self.best_index].mean
    }

    pub fn mean_at(&self, index: usize) -> f64 {
        self.summaries[index].mean
    }
}
