//! Closed-form a priori bounds, their optimal parameters, the grid factor `C(q)` and the
//! high-probability bounds for the ERM-selected parameter. All logarithms are natural.

use crate::error::{invalid, Result};
use crate::spectral_reg::FilterKind;

/// Constants entering the bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoryParams {
    /// Noise level, `E[||eps||^2 | X] <= tau^2`.
    pub tau: f64,
    /// Source-condition magnitude.
    pub beta: f64,
    /// Source exponent `s` in `X = (A^T A)^s Z`.
    pub s: f64,
    /// Effective rate exponent.
    pub alpha: f64,
    pub c1: f64,
    pub c2: f64,
    /// Lipschitz constant of the derivative of a nonlinear forward map.
    pub c0: f64,
    /// Loss bound `M`.
    pub loss_bound: f64,
    /// Confidence level.
    pub eta: f64,
    /// Training set size.
    pub n: usize,
    /// Grid size.
    pub grid_size: usize,
}

impl Default for TheoryParams {
    fn default() -> Self {
        Self {
            tau: 0.01,
            beta: 1.0,
            s: 0.5,
            alpha: 0.5,
            c1: 1.0,
            c2: 1.0,
            c0: 0.0,
            loss_bound: 4.0,
            eta: 0.05,
            n: 50,
            grid_size: 500,
        }
    }
}

impl TheoryParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("beta", self.beta),
            ("s", self.s),
            ("alpha", self.alpha),
            ("c1", self.c1),
            ("c2", self.c2),
            ("loss_bound", self.loss_bound),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.tau >= 0.0) {
            return Err(invalid(format!("tau must be >= 0, got {}", self.tau)));
        }
        if !(self.c0 >= 0.0) {
            return Err(invalid(format!("c0 must be >= 0, got {}", self.c0)));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(invalid(format!("eta must lie in (0, 1), got {}", self.eta)));
        }
        if self.n == 0 || self.grid_size == 0 {
            return Err(invalid("n and grid_size must be >= 1"));
        }
        Ok(())
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("lambda must be > 0, got {lambda}")))
    }
}

/// `U(lambda) = C1^2 tau^2 / lambda + C2^2 beta^2 lambda^(2 alpha)`.
pub fn spectral_bound(lambda: f64, p: &TheoryParams) -> Result<f64> {
    check_lambda(lambda)?;
    p.validate()?;
    Ok(p.c1.powi(2) * p.tau.powi(2) / lambda + p.c2.powi(2) * p.beta.powi(2) * lambda.powf(2.0 * p.alpha))
}

/// Minimizer of [`spectral_bound`] and the minimal value.
pub fn spectral_optimal(p: &TheoryParams) -> Result<(f64, f64)> {
    p.validate()?;
    if !(p.tau > 0.0) {
        return Err(invalid("the optimal parameter requires tau > 0"));
    }
    let a = p.alpha;
    let e = 1.0 / (2.0 * a + 1.0);
    let lambda = (p.c1.powi(2) / (2.0 * a * p.c2.powi(2))).powf(e) * (p.tau / p.beta).powf(2.0 * e);
    let value = (2.0 * a + 1.0)
        * ((p.c1.powi(2) / (2.0 * a)).powf(2.0 * a) * p.c2.powi(2)).powf(e)
        * (p.tau.powf(2.0 * a) * p.beta).powf(2.0 * e);
    Ok((lambda, value))
}

/// `U(lambda) = tau^2 / (2 lambda) + beta^2 lambda / 2`.
pub fn convex_bound(lambda: f64, p: &TheoryParams) -> Result<f64> {
    check_lambda(lambda)?;
    p.validate()?;
    Ok(p.tau.powi(2) / (2.0 * lambda) + p.beta.powi(2) * lambda / 2.0)
}

/// `(tau / beta, beta tau)`.
pub fn convex_optimal(p: &TheoryParams) -> Result<(f64, f64)> {
    p.validate()?;
    if !(p.tau > 0.0) {
        return Err(invalid("the optimal parameter requires tau > 0"));
    }
    Ok((p.tau / p.beta, p.beta * p.tau))
}

fn contraction(p: &TheoryParams) -> Result<f64> {
    let bc = p.beta * p.c0;
    if !(bc < 1.0) {
        return Err(invalid(format!("nonlinear bounds require beta * c0 < 1, got {bc}")));
    }
    Ok(1.0 - bc)
}

/// `U(lambda) = (tau + beta lambda)^2 / ((1 - beta C0) lambda)`.
pub fn nonlinear_bound(lambda: f64, p: &TheoryParams) -> Result<f64> {
    check_lambda(lambda)?;
    p.validate()?;
    let k = contraction(p)?;
    Ok((p.tau + p.beta * lambda).powi(2) / (k * lambda))
}

/// `(tau / beta, 4 tau beta / (1 - beta C0))`.
pub fn nonlinear_optimal(p: &TheoryParams) -> Result<(f64, f64)> {
    p.validate()?;
    let k = contraction(p)?;
    if !(p.tau > 0.0) {
        return Err(invalid("the optimal parameter requires tau > 0"));
    }
    Ok((p.tau / p.beta, 4.0 * p.tau * p.beta / k))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundFamily {
    Spectral,
    Convex,
    Nonlinear,
}

impl BoundFamily {
    pub fn bound(self, lambda: f64, p: &TheoryParams) -> Result<f64> {
        match self {
            BoundFamily::Spectral => spectral_bound(lambda, p),
            BoundFamily::Convex => convex_bound(lambda, p),
            BoundFamily::Nonlinear => nonlinear_bound(lambda, p),
        }
    }

    pub fn optimal(self, p: &TheoryParams) -> Result<(f64, f64)> {
        match self {
            BoundFamily::Spectral => spectral_optimal(p),
            BoundFamily::Convex => convex_optimal(p),
            BoundFamily::Nonlinear => nonlinear_optimal(p),
        }
    }
}

/// `C(q)` with `U(q lambda*) = C(q) U(lambda*)`.
pub fn cq_factor(kind: BoundFamily, q: f64, alpha: f64) -> Result<f64> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(invalid(format!("q must be >= 1, got {q}")));
    }
    Ok(match kind {
        BoundFamily::Spectral => {
            if !(alpha > 0.0) {
                return Err(invalid(format!("alpha must be > 0, got {alpha}")));
            }
            (2.0 * alpha + q.powf(2.0 * alpha + 1.0)) / (q * (2.0 * alpha + 1.0))
        }
        BoundFamily::Convex => (1.0 + q * q) / (2.0 * q),
        BoundFamily::Nonlinear => (1.0 + q).powi(2) / (4.0 * q),
    })
}

fn log_term(p: &TheoryParams) -> Result<f64> {
    p.validate()?;
    Ok((2.0 * p.grid_size as f64 / p.eta).ln())
}

/// `2 C(Q) U* + (13 M / (2 n)) ln(2 N / eta)`.
pub fn erm_bound(u_star: f64, cq: f64, p: &TheoryParams) -> Result<f64> {
    if !(u_star >= 0.0) || !(cq >= 0.0) {
        return Err(invalid("u_star and cq must be >= 0"));
    }
    let l = log_term(p)?;
    Ok(2.0 * cq * u_star + 13.0 * p.loss_bound / (2.0 * p.n as f64) * l)
}

/// `L(f_grid_opt) + 2 sqrt((M / n) ln(2 N / eta))`.
pub fn hoeffding_bound(grid_opt_risk: f64, p: &TheoryParams) -> Result<f64> {
    if !(grid_opt_risk >= 0.0) {
        return Err(invalid("grid-optimal risk must be >= 0"));
    }
    let l = log_term(p)?;
    Ok(grid_opt_risk + 2.0 * (p.loss_bound / p.n as f64 * l).sqrt())
}

/// `min(qualification, s)`: Tikhonov has qualification 1, Landweber and cut-off are unlimited.
pub fn effective_alpha(filter: FilterKind, s: f64) -> Result<f64> {
    if !(s > 0.0) {
        return Err(invalid(format!("s must be > 0, got {s}")));
    }
    Ok(match filter {
        FilterKind::Tikhonov => s.min(1.0),
        FilterKind::Landweber { .. } | FilterKind::SpectralCutoff => s,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_optimum_matches_bound_for_any_beta() {
        for beta in [0.3, 1.0, 2.5] {
            let p = TheoryParams { beta, tau: 0.05, alpha: 0.75, c1: 1.3, c2: 0.6, ..TheoryParams::default() };
            let (l, u) = spectral_optimal(&p).unwrap();
            assert!((spectral_bound(l, &p).unwrap() - u).abs() < 1e-12 * u);
        }
    }
    use approx::assert_relative_eq;

    fn params(tau: f64, alpha: f64) -> TheoryParams {
        TheoryParams {
            tau,
            alpha,
            ..TheoryParams::default()
        }
    }

    #[test]
    fn spectral_examples() {
        let p = params(0.01, 0.5);
        assert_relative_eq!(spectral_bound(0.01, &p).unwrap(), 0.02, max_relative = 1e-12);
        let (l, u) = spectral_optimal(&p).unwrap();
        assert_relative_eq!(l, 0.01, max_relative = 1e-12);
        assert_relative_eq!(u, 0.02, max_relative = 1e-12);
        assert!(spectral_optimal(&params(0.0, 0.5)).is_err());
        assert!(spectral_bound(0.0, &p).is_err());
    }

    #[test]
    fn noiseless_spectral_is_increasing() {
        let p = params(0.0, 0.75);
        let a = spectral_bound(0.1, &p).unwrap();
        let b = spectral_bound(0.2, &p).unwrap();
        assert!(b > a);
        assert_relative_eq!(a, 0.1_f64.powf(1.5), max_relative = 1e-12);
    }

    #[test]
    fn spectral_homogeneity() {
        let (l1, u1) = spectral_optimal(&params(0.01, 0.5)).unwrap();
        let (l4, u4) = spectral_optimal(&params(0.04, 0.5)).unwrap();
        assert_relative_eq!(l4 / l1, 4.0, max_relative = 1e-12);
        assert_relative_eq!(u4 / u1, 4.0, max_relative = 1e-12);
    }

    #[test]
    fn spectral_stationary() {
        for alpha in [0.25, 0.5, 1.0, 2.0] {
            let p = params(0.03, alpha);
            let (l, _) = spectral_optimal(&p).unwrap();
            let h = l * 1e-6;
            let d = (spectral_bound(l + h, &p).unwrap() - spectral_bound(l - h, &p).unwrap()) / (2.0 * h);
            let scale = spectral_bound(l, &p).unwrap() / l;
            assert!(d.abs() / scale < 1e-8, "alpha {alpha}: {d}");
        }
    }

    #[test]
    fn convex_examples() {
        let p = TheoryParams { tau: 0.25, ..TheoryParams::default() };
        assert_eq!(convex_optimal(&p).unwrap(), (0.25, 0.25));
        let p = TheoryParams { tau: 0.7, beta: 0.7, ..TheoryParams::default() };
        assert_relative_eq!(convex_optimal(&p).unwrap().0, 1.0);
        let (l, u) = convex_optimal(&p).unwrap();
        assert_relative_eq!(convex_bound(2.0 * l, &p).unwrap(), 1.25 * u, max_relative = 1e-12);
    }

    #[test]
    fn nonlinear_examples() {
        let p = TheoryParams { tau: 1.0, beta: 1.0, ..TheoryParams::default() };
        assert_relative_eq!(nonlinear_bound(2.0, &p).unwrap(), 4.5);
        assert_eq!(nonlinear_optimal(&p).unwrap(), (1.0, 4.0));
        let q = TheoryParams { c0: 0.5, ..p };
        assert_relative_eq!(nonlinear_optimal(&q).unwrap().1, 8.0);
        let bad = TheoryParams { c0: 1.0, ..p };
        assert!(nonlinear_bound(1.0, &bad).is_err());
    }

    #[test]
    fn cq_examples() {
        for kind in [BoundFamily::Spectral, BoundFamily::Convex, BoundFamily::Nonlinear] {
            assert_relative_eq!(cq_factor(kind, 1.0, 0.7).unwrap(), 1.0, max_relative = 1e-15);
        }
        assert_eq!(cq_factor(BoundFamily::Convex, 2.0, 0.5).unwrap(), 1.25);
        assert_relative_eq!(cq_factor(BoundFamily::Spectral, 2.0, 0.5).unwrap(), 1.25);
        assert!(cq_factor(BoundFamily::Convex, 0.5, 0.5).is_err());
    }

    #[test]
    fn erm_bound_example() {
        let p = TheoryParams::default();
        let v = erm_bound(0.0, 1.0, &p).unwrap();
        assert!((v - 0.52 * 20000f64.ln()).abs() < 1e-12);
        assert!((v - 5.1498).abs() < 1e-3);
        let big = TheoryParams { n: 1_000_000_000, ..p };
        assert!((erm_bound(0.3, 1.5, &big).unwrap() - 0.9).abs() < 1e-6);
        let doubled = TheoryParams { grid_size: 1000, ..p };
        let diff = erm_bound(0.0, 1.0, &doubled).unwrap() - v;
        assert!((diff - 0.52 * 2f64.ln()).abs() < 1e-12);
        assert!(erm_bound(0.0, 1.0, &TheoryParams { eta: 1.0, ..p }).is_err());
    }

    #[test]
    fn hoeffding_example() {
        let p = TheoryParams { n: 100, ..TheoryParams::default() };
        let v = hoeffding_bound(0.0, &p).unwrap();
        assert!((v - 1.2588).abs() < 1e-3);
        let q = TheoryParams { n: 400, ..p };
        assert_relative_eq!(hoeffding_bound(0.0, &q).unwrap(), v / 2.0, max_relative = 1e-12);
        let big = TheoryParams { n: 100_000, ..p };
        let erm_term = erm_bound(0.0, 1.0, &big).unwrap();
        assert!(hoeffding_bound(0.0, &big).unwrap() > erm_term);
    }

    #[test]
    fn alpha_from_qualification() {
        assert_eq!(effective_alpha(FilterKind::Tikhonov, 0.5).unwrap(), 0.5);
        assert_eq!(effective_alpha(FilterKind::Tikhonov, 2.0).unwrap(), 1.0);
        assert_eq!(effective_alpha(FilterKind::Landweber { gamma: 1.0 }, 2.0).unwrap(), 2.0);
        assert_eq!(effective_alpha(FilterKind::SpectralCutoff, 2.0).unwrap(), 2.0);
    }
}
