use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use super::{LinearOperator, SpectralDecomposition};
use crate::error::{invalid, Error, Result};

/// Circular convolution `x -> h * x` on `R^d`.
///
/// `origin` is the kernel index treated as offset zero, so a kernel sampled on a grid
/// centered at index `c` convolves without shifting the signal when `origin = c`.
#[derive(Debug, Clone)]
pub struct ConvolutionOperator {
    kernel: DVector<f64>,
    origin: usize,
    matrix: OnceLock<DMatrix<f64>>,
    norm: OnceLock<f64>,
    decomp: OnceLock<SpectralDecomposition>,
}

impl ConvolutionOperator {
    pub fn new(kernel: DVector<f64>) -> Self {
        Self::with_origin(kernel, 0).expect("origin 0 is always valid")
    }

    pub fn with_origin(kernel: DVector<f64>, origin: usize) -> Result<Self> {
        if kernel.is_empty() {
            return Err(invalid("convolution kernel must be nonempty"));
        }
        if origin >= kernel.len() {
            return Err(invalid(format!(
                "kernel origin {origin} out of range for length {}",
                kernel.len()
            )));
        }
        Ok(Self {
            kernel,
            origin,
            matrix: OnceLock::new(),
            norm: OnceLock::new(),
            decomp: OnceLock::new(),
        })
    }

    pub fn kernel(&self) -> &DVector<f64> {
        &self.kernel
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    /// The circulant matrix, built on first use.
    fn matrix(&self) -> &DMatrix<f64> {
        self.matrix.get_or_init(|| {
            let d = self.kernel.len();
            DMatrix::from_fn(d, d, |i, k| self.kernel[(i + d + self.origin - k) % d])
        })
    }

    /// Magnitudes of the discrete Fourier transform of the kernel, i.e. the singular
    /// values of the circulant matrix (unsorted), computed by direct summation.
    pub fn frequency_response(&self) -> Vec<f64> {
        let d = self.kernel.len();
        (0..d)
            .map(|k| {
                let (mut re, mut im) = (0.0, 0.0);
                for (j, h) in self.kernel.iter().enumerate() {
                    let angle = -2.0 * PI * ((j * k) % d) as f64 / d as f64;
                    re += h * angle.cos();
                    im += h * angle.sin();
                }
                re.hypot(im)
            })
            .collect()
    }

    pub fn normalize(&self) -> Result<Self> {
        let norm = self.operator_norm();
        if !(norm > 0.0) {
            return Err(Error::ZeroOperator);
        }
        Self::with_origin(&self.kernel / norm, self.origin)
    }
}

impl LinearOperator for ConvolutionOperator {
    fn input_dim(&self) -> usize {
        self.kernel.len()
    }

    fn output_dim(&self) -> usize {
        self.kernel.len()
    }

    fn apply_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        self.matrix() * x
    }

    fn adjoint_unchecked(&self, y: &DVector<f64>) -> DVector<f64> {
        self.matrix().tr_mul(y)
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.matrix().clone()
    }

    fn decomposition(&self) -> &SpectralDecomposition {
        self.decomp.get_or_init(|| SpectralDecomposition::of(&self.to_dense()))
    }

    fn operator_norm(&self) -> f64 {
        *self
            .norm
            .get_or_init(|| self.frequency_response().into_iter().fold(0.0, f64::max))
    }
}

/// Mean-free second derivative of `phi(x) = exp(-x^2 / (2 pi^2))` sampled on the
/// integers `x = j - d/2`, `j = 0..d`. Index `d/2` is the kernel center.
pub fn gaussian_deriv2_kernel(d: usize) -> Result<DVector<f64>> {
    if d < 3 {
        return Err(invalid(format!("kernel length must be >= 3, got {d}")));
    }
    let c = (d / 2) as f64;
    let pi2 = PI * PI;
    let raw = DVector::from_fn(d, |j, _| {
        let x = j as f64 - c;
        let phi = (-x * x / (2.0 * pi2)).exp();
        phi * (x * x / (pi2 * pi2) - 1.0 / pi2)
    });
    let mean = raw.mean();
    Ok(raw.add_scalar(-mean))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn delta_kernel_is_identity() {
        let op = ConvolutionOperator::new(DVector::from_vec(vec![1.0, 0.0, 0.0]));
        let x = DVector::from_vec(vec![0.3, -2.0, 5.0]);
        assert_eq!(op.apply(&x).unwrap(), x);
    }

    #[test]
    fn centered_delta_is_identity() {
        let op = ConvolutionOperator::with_origin(DVector::from_vec(vec![0.0, 1.0, 0.0]), 1).unwrap();
        let x = DVector::from_vec(vec![0.3, -2.0, 5.0]);
        assert_eq!(op.apply(&x).unwrap(), x);
    }

    #[test]
    fn shift_kernel() {
        let op = ConvolutionOperator::new(DVector::from_vec(vec![0.0, 1.0, 0.0]));
        let x = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert_eq!(op.apply(&x).unwrap(), DVector::from_vec(vec![3.0, 1.0, 2.0]));
    }

    #[test]
    fn kernel_zero_sum_and_symmetric() {
        for d in [3usize, 4, 9, 64, 256] {
            let h = gaussian_deriv2_kernel(d).unwrap();
            assert!(h.sum().abs() < 1e-12, "d={d}");
            let c = d / 2;
            for j in 1..(d - c) {
                if c >= j {
                    assert_relative_eq!(h[c + j], h[c - j], epsilon = 1e-15);
                }
            }
        }
        assert!(gaussian_deriv2_kernel(2).is_err());
    }

    #[test]
    fn fourier_norm_matches_svd() {
        let h = gaussian_deriv2_kernel(32).unwrap();
        let op = ConvolutionOperator::with_origin(h, 16).unwrap();
        let svd_norm = SpectralDecomposition::of(&op.to_dense()).largest();
        assert_relative_eq!(op.operator_norm(), svd_norm, max_relative = 1e-10);
    }
}
