//! Finite-dimensional linear forward operators.
//!
//! Every operator exposes its action, its adjoint, a dense expansion and a cached
//! spectral decomposition. [`ForwardOperator`] is the closed set of operators the
//! experiments use as the forward map `A`.

mod convolution;
mod dense;
mod gradient;
mod spectral;

use nalgebra::{DMatrix, DVector};

pub use convolution::{gaussian_deriv2_kernel, ConvolutionOperator};
pub use dense::DenseOperator;
pub use gradient::GradientOperator;
pub use spectral::{SpectralDecomposition, RANK_CUTOFF};

use crate::error::{check_dim, Result};

pub trait LinearOperator: Send + Sync {
    fn input_dim(&self) -> usize;

    fn output_dim(&self) -> usize;

    /// `A x`. Implementations may assume the dimension was checked.
    fn apply_unchecked(&self, x: &DVector<f64>) -> DVector<f64>;

    /// `A^T y`. Implementations may assume the dimension was checked.
    fn adjoint_unchecked(&self, y: &DVector<f64>) -> DVector<f64>;

    fn decomposition(&self) -> &SpectralDecomposition;

    fn apply(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.input_dim(), x.len())?;
        Ok(self.apply_unchecked(x))
    }

    fn adjoint_apply(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.output_dim(), y.len())?;
        Ok(self.adjoint_unchecked(y))
    }

    /// Largest singular value.
    fn operator_norm(&self) -> f64 {
        self.decomposition().largest()
    }

    /// Dense matrix obtained by applying the operator to the canonical basis.
    fn to_dense(&self) -> DMatrix<f64> {
        let d = self.input_dim();
        let mut out = DMatrix::zeros(self.output_dim(), d);
        let mut e = DVector::zeros(d);
        for j in 0..d {
            e[j] = 1.0;
            out.set_column(j, &self.apply_unchecked(&e));
            e[j] = 0.0;
        }
        out
    }
}

/// Identity map on `R^d`.
#[derive(Debug, Clone)]
pub struct IdentityOperator {
    dim: usize,
    decomp: std::sync::OnceLock<SpectralDecomposition>,
}

impl IdentityOperator {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            decomp: std::sync::OnceLock::new(),
        }
    }
}

impl LinearOperator for IdentityOperator {
    fn input_dim(&self) -> usize {
        self.dim
    }

    fn output_dim(&self) -> usize {
        self.dim
    }

    fn apply_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        x.clone()
    }

    fn adjoint_unchecked(&self, y: &DVector<f64>) -> DVector<f64> {
        y.clone()
    }

    fn decomposition(&self) -> &SpectralDecomposition {
        self.decomp.get_or_init(|| {
            SpectralDecomposition::from_parts(
                DMatrix::identity(self.dim, self.dim),
                DVector::from_element(self.dim, 1.0),
                DMatrix::identity(self.dim, self.dim),
            )
            .expect("identity factors are valid")
        })
    }

    fn operator_norm(&self) -> f64 {
        if self.dim == 0 {
            0.0
        } else {
            1.0
        }
    }
}

/// Forward operators used by the data models.
#[derive(Debug, Clone)]
pub enum ForwardOperator {
    Identity(IdentityOperator),
    Dense(DenseOperator),
    Convolution(ConvolutionOperator),
}

impl ForwardOperator {
    pub fn identity(dim: usize) -> Self {
        Self::Identity(IdentityOperator::new(dim))
    }

    fn inner(&self) -> &dyn LinearOperator {
        match self {
            Self::Identity(op) => op,
            Self::Dense(op) => op,
            Self::Convolution(op) => op,
        }
    }
}

impl From<DenseOperator> for ForwardOperator {
    fn from(op: DenseOperator) -> Self {
        Self::Dense(op)
    }
}

impl From<ConvolutionOperator> for ForwardOperator {
    fn from(op: ConvolutionOperator) -> Self {
        Self::Convolution(op)
    }
}

impl LinearOperator for ForwardOperator {
    fn input_dim(&self) -> usize {
        self.inner().input_dim()
    }

    fn output_dim(&self) -> usize {
        self.inner().output_dim()
    }

    fn apply_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        self.inner().apply_unchecked(x)
    }

    fn adjoint_unchecked(&self, y: &DVector<f64>) -> DVector<f64> {
        self.inner().adjoint_unchecked(y)
    }

    fn decomposition(&self) -> &SpectralDecomposition {
        self.inner().decomposition()
    }

    fn operator_norm(&self) -> f64 {
        self.inner().operator_norm()
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.inner().to_dense()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_apply() {
        let op = ForwardOperator::identity(2);
        let x = DVector::from_vec(vec![3.0, -1.0]);
        assert_eq!(op.apply(&x).unwrap(), x);
        assert_eq!(op.operator_norm(), 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let op = ForwardOperator::identity(3);
        assert!(op.apply(&DVector::zeros(2)).is_err());
        assert!(op.adjoint_apply(&DVector::zeros(4)).is_err());
    }
}
