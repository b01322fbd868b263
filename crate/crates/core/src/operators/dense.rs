use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};

use super::{LinearOperator, SpectralDecomposition};
use crate::error::{Error, Result};

/// Explicit `m x d` matrix with a lazily computed SVD.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: DMatrix<f64>,
    decomp: OnceLock<SpectralDecomposition>,
}

impl DenseOperator {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self {
            matrix,
            decomp: OnceLock::new(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Rescales the operator to unit operator norm.
    ///
    /// An already computed decomposition is carried over with rescaled singular values.
    pub fn normalize(&self) -> Result<Self> {
        let norm = self.operator_norm();
        if !(norm > 0.0) {
            return Err(Error::ZeroOperator);
        }
        let decomp = OnceLock::new();
        if let Some(dec) = self.decomp.get() {
            let scaled = SpectralDecomposition::from_parts(
                dec.left_vectors().clone(),
                dec.singular_values() / norm,
                dec.right_vectors().clone(),
            )?;
            let _ = decomp.set(scaled);
        }
        Ok(Self {
            matrix: &self.matrix / norm,
            decomp,
        })
    }
}

impl LinearOperator for DenseOperator {
    fn input_dim(&self) -> usize {
        self.matrix.ncols()
    }

    fn output_dim(&self) -> usize {
        self.matrix.nrows()
    }

    fn apply_unchecked(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    fn adjoint_unchecked(&self, y: &DVector<f64>) -> DVector<f64> {
        self.matrix.tr_mul(y)
    }

    fn decomposition(&self) -> &SpectralDecomposition {
        self.decomp.get_or_init(|| SpectralDecomposition::of(&self.matrix))
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.clone()
    }
}
