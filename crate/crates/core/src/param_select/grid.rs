use crate::error::{invalid, Result};

/// Candidate regularization parameters `lambda_1 <= ... <= lambda_N`.
///
/// Grids built by [`build_grid`] are geometric, `lambda_j = lambda_1 Q^(j-1)` with
/// `Q = (lambda_N / lambda_1)^(1 / (N - 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamGrid {
    values: Vec<f64>,
    ratio: Option<f64>,
}

/// Geometric grid with `count` points from `lambda_min` to `lambda_max`.
pub fn build_grid(lambda_min: f64, lambda_max: f64, count: usize) -> Result<ParamGrid> {
    if !(lambda_min > 0.0) || !lambda_min.is_finite() {
        return Err(invalid(format!("lambda_min must be > 0, got {lambda_min}")));
    }
    if !(lambda_max >= lambda_min) || !lambda_max.is_finite() {
        return Err(invalid(format!(
            "lambda_max must be >= lambda_min, got [{lambda_min}, {lambda_max}]"
        )));
    }
    match count {
        0 => Err(invalid("grid needs at least one point")),
        1 if lambda_min == lambda_max => Ok(ParamGrid {
            values: vec![lambda_min],
            ratio: None,
        }),
        1 => Err(invalid("a one-point grid requires lambda_min == lambda_max")),
        _ => {
            let ratio = (lambda_max / lambda_min).powf(1.0 / (count - 1) as f64);
            let mut values: Vec<f64> = (0..count)
                .map(|j| lambda_min * ratio.powi(j as i32))
                .collect();
            values[count - 1] = lambda_max;
            Ok(ParamGrid {
                values,
                ratio: Some(ratio),
            })
        }
    }
}

impl ParamGrid {
    /// Arbitrary positive values, sorted ascending (duplicates allowed).
    pub fn from_values(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("grid needs at least one point"));
        }
        if values.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(invalid("grid values must be finite and > 0"));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self {
            values,
            ratio: None,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Geometric ratio `Q`, if the grid was built geometrically with `N >= 2`.
    pub fn ratio(&self) -> Option<f64> {
        self.ratio
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_grid() {
        let g = build_grid(0.5, 8.0, 2).unwrap();
        assert_eq!(g.ratio(), Some(16.0));
        assert_eq!(g.values(), &[0.5, 8.0]);
    }

    #[test]
    fn single_point() {
        let g = build_grid(0.3, 0.3, 1).unwrap();
        assert_eq!(g.values(), &[0.3]);
        assert!(build_grid(0.3, 0.4, 1).is_err());
    }

    #[test]
    fn invalid_bounds() {
        assert!(build_grid(0.0, 1.0, 5).is_err());
        assert!(build_grid(2.0, 1.0, 5).is_err());
        assert!(build_grid(1.0, 2.0, 0).is_err());
    }

    #[test]
    fn geometric_values() {
        let g = build_grid(1e-4, 100.0, 500).unwrap();
        let q = g.ratio().unwrap();
        for (j, v) in g.values().iter().enumerate() {
            let expected = 1e-4 * q.powi(j as i32);
            assert!(((v - expected) / expected).abs() < 1e-12);
        }
        assert!(g.values().windows(2).all(|w| w[0] <= w[1]));
        assert!(((g.last() - 100.0) / 100.0).abs() < 1e-10);
    }
}
