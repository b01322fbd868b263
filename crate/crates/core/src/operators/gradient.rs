use std::sync::OnceLock;

use nalgebra::DVector;

use super::{LinearOperator, SpectralDecomposition};

/// Forward-difference image gradient `D x = (D1 x, D2 x)` on a row-major `rows x cols`
/// image. `D1` holds the `(rows-1) x cols` vertical differences, `D2` the
/// `rows x (cols-1)` horizontal ones. The adjoint is the negative divergence.
#[derive(Debug, Clone)]
pub struct GradientOperator {
    rows: usize,
    cols: usize,
    decomp: OnceLock<SpectralDecomposition>,
}

impl GradientOperator {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            decomp: OnceLock::new(),
        }
    }

    pub fn square(side: usize) -> Self {
        Self::new(side, side)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn vertical_len(&self) -> usize {
        self.rows.saturating_sub(1) * self.cols
    }

    /// Upper bound on `||D||^2` used as the Lipschitz constant of the dual problem.
    pub const LIPSCHITZ_BOUND: f64 = 8.0;
}

impl LinearOperator for GradientOperator {
    fn input_dim(&self) -> usize {
        self.rows * self.cols
    }

    fn output_dim(&self) -> usize {
        self.vertical_len() + self.rows * self.cols.saturating_sub(1)
    }

    fn apply_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        let (r, c) = (self.rows, self.cols);
        let mut out = DVector::zeros(self.output_dim());
        let mut k = 0;
        for i in 0..r.saturating_sub(1) {
            for j in 0..c {
                out[k] = x[(i + 1) * c + j] - x[i * c + j];
                k += 1;
            }
        }
        for i in 0..r {
            for j in 0..c.saturating_sub(1) {
                out[k] = x[i * c + j + 1] - x[i * c + j];
                k += 1;
            }
        }
        out
    }

    fn adjoint_unchecked(&self, p: &DVector<f64>) -> DVector<f64> {
        let (r, c) = (self.rows, self.cols);
        let mut out = DVector::zeros(r * c);
        let mut k = 0;
        for i in 0..r.saturating_sub(1) {
            for j in 0..c {
                out[(i + 1) * c + j] += p[k];
                out[i * c + j] -= p[k];
                k += 1;
            }
        }
        for i in 0..r {
            for j in 0..c.saturating_sub(1) {
                out[i * c + j + 1] += p[k];
                out[i * c + j] -= p[k];
                k += 1;
            }
        }
        out
    }

    fn decomposition(&self) -> &SpectralDecomposition {
        self.decomp.get_or_init(|| SpectralDecomposition::of(&self.to_dense()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_dimension() {
        let d = 5;
        assert_eq!(GradientOperator::square(d).output_dim(), 2 * d * (d - 1));
    }

    #[test]
    fn constant_image_has_zero_gradient() {
        let op = GradientOperator::square(4);
        let out = op.apply(&DVector::from_element(16, 0.7)).unwrap();
        assert!(out.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn small_image_by_hand() {
        // [[1, 2], [4, 8]]
        let op = GradientOperator::square(2);
        let out = op.apply(&DVector::from_vec(vec![1.0, 2.0, 4.0, 8.0])).unwrap();
        assert_eq!(out.as_slice(), &[3.0, 6.0, 1.0, 4.0]);
    }

    #[test]
    fn norm_below_lipschitz_bound() {
        let op = GradientOperator::square(6);
        let n = op.operator_norm();
        assert!(n * n <= GradientOperator::LIPSCHITZ_BOUND);
    }
}
