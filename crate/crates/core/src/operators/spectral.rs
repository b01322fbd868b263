use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, invalid, Result};

/// Relative cutoff below which singular values count as zero.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Thin singular value decomposition `A = U diag(sigma) V^T`, sorted nonincreasing.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    u: DMatrix<f64>,
    singular_values: DVector<f64>,
    v: DMatrix<f64>,
    rank: usize,
}

impl SpectralDecomposition {
    pub fn of(matrix: &DMatrix<f64>) -> Self {
        let (m, d) = matrix.shape();
        let r = m.min(d);
        if r == 0 {
            return Self {
                u: DMatrix::zeros(m, 0),
                singular_values: DVector::zeros(0),
                v: DMatrix::zeros(d, 0),
                rank: 0,
            };
        }
        let svd = matrix.clone().svd(true, true);
        let u_raw = svd.u.expect("left singular vectors requested");
        let vt_raw = svd.v_t.expect("right singular vectors requested");
        let sv = svd.singular_values;

        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));

        let mut u = DMatrix::zeros(m, r);
        let mut v = DMatrix::zeros(d, r);
        let mut singular_values = DVector::zeros(r);
        for (dst, &src) in order.iter().enumerate() {
            singular_values[dst] = sv[src].max(0.0);
            u.set_column(dst, &u_raw.column(src));
            v.set_column(dst, &vt_raw.row(src).transpose());
        }
        let top = singular_values[0];
        let rank = singular_values
            .iter()
            .take_while(|&&s| s > RANK_CUTOFF * top && s > 0.0)
            .count();
        Self {
            u,
            singular_values,
            v,
            rank,
        }
    }

    /// Builds a decomposition from explicit factors. Singular values must be nonincreasing.
    pub fn from_parts(u: DMatrix<f64>, singular_values: DVector<f64>, v: DMatrix<f64>) -> Result<Self> {
        let r = singular_values.len();
        if u.ncols() != r || v.ncols() != r {
            return Err(invalid("factor column counts must match the number of singular values"));
        }
        if singular_values.iter().any(|&s| s < 0.0 || !s.is_finite()) {
            return Err(invalid("singular values must be finite and nonnegative"));
        }
        if singular_values.as_slice().windows(2).any(|w| w[0] < w[1]) {
            return Err(invalid("singular values must be sorted nonincreasing"));
        }
        let top = singular_values.get(0).copied().unwrap_or(0.0);
        let rank = singular_values
            .iter()
            .take_while(|&&s| s > RANK_CUTOFF * top && s > 0.0)
            .count();
        Ok(Self {
            u,
            singular_values,
            v,
            rank,
        })
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular_values
    }

    pub fn left_vectors(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn right_vectors(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// Number of singular values above the numerical rank cutoff.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn input_dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn output_dim(&self) -> usize {
        self.u.nrows()
    }

    pub fn largest(&self) -> f64 {
        self.singular_values.get(0).copied().unwrap_or(0.0)
    }

    /// `sum_i sigma_i u_i v_i^T`.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.u.clone();
        for (j, s) in self.singular_values.iter().enumerate() {
            scaled.column_mut(j).scale_mut(*s);
        }
        scaled * self.v.transpose()
    }

    /// Coefficients `<u_i, y>` for the numerically nonzero singular values.
    pub fn data_coefficients(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.output_dim(), y.len())?;
        Ok(self.u.columns(0, self.rank).tr_mul(y))
    }

    /// Coefficients `<v_i, x>` for the numerically nonzero singular values.
    pub fn signal_coefficients(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim(self.input_dim(), x.len())?;
        Ok(self.v.columns(0, self.rank).tr_mul(x))
    }

    /// `sum_i c_i v_i` over the first `c.len()` right singular vectors.
    pub fn synthesize(&self, coefficients: &DVector<f64>) -> DVector<f64> {
        self.v.columns(0, coefficients.len()) * coefficients
    }

    /// Applies `(A^T A)^s` to `z` by spectral calculus.
    ///
    /// The zeroth power is the orthogonal projection onto the range of `A^T A`; kernel
    /// components (singular values below the rank cutoff) are dropped for every `s`.
    pub fn fractional_power_apply(&self, s: f64, z: &DVector<f64>) -> Result<DVector<f64>> {
        if !(s >= 0.0) || !s.is_finite() {
            return Err(invalid(format!("fractional power exponent must be >= 0, got {s}")));
        }
        let mut coeffs = self.signal_coefficients(z)?;
        for (c, sigma) in coeffs.iter_mut().zip(self.singular_values.iter()) {
            *c *= (sigma * sigma).powf(s);
        }
        Ok(self.synthesize(&coeffs))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sorted_and_reconstructs() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 3.0, 1.0, 4.0, 0.0, 2.0]);
        let dec = SpectralDecomposition::of(&m);
        let sv = dec.singular_values();
        assert!(sv.as_slice().windows(2).all(|w| w[0] >= w[1]));
        assert_relative_eq!(dec.reconstruct(), m, epsilon = 1e-10);
        assert_eq!(dec.rank(), 3);
    }

    #[test]
    fn half_power_of_scalar() {
        let dec = SpectralDecomposition::of(&DMatrix::from_element(1, 1, 4.0));
        let out = dec.fractional_power_apply(0.5, &DVector::from_element(1, 1.0)).unwrap();
        assert_relative_eq!(out[0], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn zeroth_power_projects_out_kernel() {
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 0.0]));
        let dec = SpectralDecomposition::of(&m);
        assert_eq!(dec.rank(), 1);
        let out = dec.fractional_power_apply(0.0, &DVector::from_vec(vec![3.0, 5.0])).unwrap();
        assert_relative_eq!(out, DVector::from_vec(vec![3.0, 0.0]), epsilon = 1e-12);
    }

    #[test]
    fn negative_exponent_rejected() {
        let dec = SpectralDecomposition::of(&DMatrix::identity(2, 2));
        assert!(dec.fractional_power_apply(-0.1, &DVector::zeros(2)).is_err());
    }
}
