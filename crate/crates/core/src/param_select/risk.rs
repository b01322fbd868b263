use nalgebra::DVector;
use rayon::prelude::*;

use super::{LossSpec, ParamGrid, RegularizationMethod};
use crate::error::{check_dim, invalid, Result};
use crate::rng::{MasterSeed, Role, SampleRng};

/// Observation / ground-truth pairs `(y_i, x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pairs: Vec<(DVector<f64>, DVector<f64>)>,
}

impl TrainingSet {
    pub fn new(pairs: Vec<(DVector<f64>, DVector<f64>)>) -> Result<Self> {
        let Some((y0, x0)) = pairs.first() else {
            return Err(invalid("training set needs at least one pair"));
        };
        let (ny, nx) = (y0.len(), x0.len());
        for (y, x) in &pairs {
            check_dim(ny, y.len())?;
            check_dim(nx, x.len())?;
        }
        Ok(Self { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[(DVector<f64>, DVector<f64>)] {
        &self.pairs
    }

    pub fn observation_dim(&self) -> usize {
        self.pairs[0].0.len()
    }

    pub fn signal_dim(&self) -> usize {
        self.pairs[0].1.len()
    }

    pub fn into_pairs(self) -> Vec<(DVector<f64>, DVector<f64>)> {
        self.pairs
    }
}

/// Draws one `(y, x)` pair from a data model.
pub trait Sampler: Send + Sync {
    fn draw(&self, rng: &mut SampleRng) -> Result<(DVector<f64>, DVector<f64>)>;
}

/// `n` pairs, pair `i` drawn from its own stream `(seed, role, i)`.
pub fn draw_samples<S: Sampler + ?Sized>(
    sampler: &S,
    n: usize,
    seed: MasterSeed,
    role: Role,
) -> Result<TrainingSet> {
    let pairs = (0..n)
        .into_par_iter()
        .map(|i| sampler.draw(&mut seed.stream(role, i as u64)))
        .collect::<Result<Vec<_>>>()?;
    TrainingSet::new(pairs)
}

/// Per-pair losses: row `i` holds `loss(f_lambda(y_i), x_i)` for every `lambda`.
pub fn loss_matrix<M: RegularizationMethod + ?Sized>(
    method: &M,
    loss: &LossSpec,
    data: &TrainingSet,
    lambdas: &[f64],
) -> Result<Vec<Vec<f64>>> {
    method.loss_rows(&data.pairs, lambdas, loss)
}

/// Column means of a loss matrix, summed in row order.
pub fn mean_curve(rows: &[Vec<f64>]) -> Vec<f64> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let mut acc = vec![0.0; first.len()];
    for row in rows {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += v;
        }
    }
    let n = rows.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

/// `(1/n) sum_i loss(f_lambda(y_i), x_i)`.
pub fn empirical_risk<M: RegularizationMethod + ?Sized>(
    method: &M,
    loss: &LossSpec,
    data: &TrainingSet,
    lambda: f64,
) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(invalid(format!("regularization parameter must be > 0, got {lambda}")));
    }
    Ok(mean_curve(&loss_matrix(method, loss, data, &[lambda])?)[0])
}

/// Empirical risk at every grid value.
pub fn risk_curve<M: RegularizationMethod + ?Sized>(
    method: &M,
    loss: &LossSpec,
    data: &TrainingSet,
    grid: &ParamGrid,
) -> Result<Vec<f64>> {
    Ok(mean_curve(&loss_matrix(method, loss, data, grid.values())?))
}

/// Index of the first minimum; NaN never wins.
pub fn argmin_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if v.is_nan() {
            continue;
        }
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Outcome of a grid selection rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub lambda: f64,
    /// Zero-based grid index.
    pub index: usize,
    pub risk_curve: Vec<f64>,
}

impl Selection {
    /// Picks the first minimizer of `risk_curve` over `grid`.
    pub fn from_curve(grid: &ParamGrid, risk_curve: Vec<f64>) -> Result<Self> {
        check_dim(grid.len(), risk_curve.len())?;
        let index = argmin_first(&risk_curve).ok_or_else(|| invalid("risk curve has no finite value"))?;
        Ok(Self {
            lambda: grid.values()[index],
            index,
            risk_curve,
        })
    }
}

/// `argmin_{lambda in grid}` of the empirical risk, ties to the smallest index.
pub fn erm_select<M: RegularizationMethod + ?Sized>(
    method: &M,
    loss: &LossSpec,
    data: &TrainingSet,
    grid: &ParamGrid,
) -> Result<Selection> {
    Selection::from_curve(grid, risk_curve(method, loss, data, grid)?)
}

/// Grid minimizer of a Monte Carlo estimate of the expected risk from `n_mc` fresh samples.
pub fn oracle_select<M, S>(
    method: &M,
    loss: &LossSpec,
    sampler: &S,
    grid: &ParamGrid,
    n_mc: usize,
    seed: MasterSeed,
) -> Result<Selection>
where
    M: RegularizationMethod + ?Sized,
    S: Sampler + ?Sized,
{
    if n_mc == 0 {
        return Err(invalid("n_mc must be >= 1"));
    }
    let sample = draw_samples(sampler, n_mc, seed, Role::MonteCarlo)?;
    erm_select(method, loss, &sample, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::param_select::{build_grid, Reconstruction};
    use crate::spectral_reg::TruncationRadius;

    /// Returns `lambda * y`.
    struct Scale;

    impl RegularizationMethod for Scale {
        fn reconstruct(&self, y: &DVector<f64>, lambda: f64) -> Result<Reconstruction> {
            Ok(Reconstruction::plain(y * lambda))
        }
    }

    fn unit(i: usize, d: usize) -> DVector<f64> {
        DVector::from_fn(d, |j, _| if i == j { 1.0 } else { 0.0 })
    }

    fn sq() -> LossSpec {
        LossSpec::truncated_squared(TruncationRadius::default())
    }

    #[test]
    fn exact_reconstruction_has_zero_risk() {
        let data = TrainingSet::new(vec![(unit(0, 2), unit(0, 2))]).unwrap();
        assert_eq!(empirical_risk(&Scale, &sq(), &data, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn antipodal_attains_bound() {
        let data = TrainingSet::new(vec![(unit(0, 2), -unit(0, 2))]).unwrap();
        assert_eq!(empirical_risk(&Scale, &sq(), &data, 1.0).unwrap(), 4.0);
    }

    #[test]
    fn arithmetic_mean() {
        // zero reconstructions, so each loss is ||x||^2
        let x1 = DVector::from_vec(vec![0.2_f64.sqrt(), 0.0]);
        let x2 = DVector::from_vec(vec![0.4_f64.sqrt(), 0.0]);
        let zero = DVector::zeros(2);
        let data = TrainingSet::new(vec![(zero.clone(), x1), (zero, x2)]).unwrap();
        let r = empirical_risk(&Scale, &sq(), &data, 1.0).unwrap();
        assert!((r - 0.3).abs() < 1e-12);
    }

    #[test]
    fn argmin_examples() {
        let grid = ParamGrid::from_values(vec![0.1, 1.0, 10.0]).unwrap();
        let s = Selection::from_curve(&grid, vec![3.0, 1.0, 2.0]).unwrap();
        assert_eq!((s.index, s.lambda), (1, 1.0));
        let s = Selection::from_curve(&grid, vec![2.0; 3]).unwrap();
        assert_eq!(s.index, 0);
        assert_eq!(argmin_first(&[f64::NAN, 2.0, 1.0, 1.0]), Some(2));
        assert_eq!(argmin_first(&[]), None);
    }

    #[test]
    fn rejects_inconsistent_pairs() {
        let bad = vec![(unit(0, 2), unit(0, 2)), (unit(0, 3), unit(0, 2))];
        assert!(TrainingSet::new(bad).is_err());
        assert!(TrainingSet::new(Vec::new()).is_err());
    }

    #[test]
    fn erm_matches_direct_loop() {
        let grid = build_grid(0.1, 2.0, 9).unwrap();
        let pairs = (0..4)
            .map(|i| {
                let y = DVector::from_fn(3, |j, _| ((i + j) as f64 * 0.37).sin());
                let x = DVector::from_fn(3, |j, _| ((i * j) as f64 * 0.11).cos() * 0.5);
                (y, x)
            })
            .collect();
        let data = TrainingSet::new(pairs).unwrap();
        let sel = erm_select(&Scale, &sq(), &data, &grid).unwrap();
        let direct: Vec<f64> = grid
            .values()
            .iter()
            .map(|&l| empirical_risk(&Scale, &sq(), &data, l).unwrap())
            .collect();
        assert_eq!(sel.risk_curve, direct);
    }
}
