//! Market and initial-margin parameters.

use crate::error::{domain, Error, Result};
use crate::linalg::SquareMatrix;
use crate::normal::gaussian_cvar_constant;
use crate::scalar::Real;

/// Constant-coefficient Ito market with `d` risky assets:
/// `dS^i / S^i = mu^i dt + sum_j sigma^{ij} dW^j`, money account at rate `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketParams<T = f64> {
    r: T,
    mu: Vec<T>,
    sigma: SquareMatrix<T>,
    sigma_inv: SquareMatrix<T>,
    s0: Vec<T>,
}

impl<T: Real> MarketParams<T> {
    pub fn new(r: T, mu: Vec<T>, sigma: SquareMatrix<T>, s0: Vec<T>) -> Result<Self> {
        let d = sigma.dim();
        if d == 0 {
            return domain("market needs at least one asset");
        }
        if s0.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: s0.len(),
            });
        }
        if mu.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: mu.len(),
            });
        }
        if s0.iter().any(|&s| !(s > T::zero())) {
            return domain("initial prices must be strictly positive");
        }
        if !r.is_finite() || mu.iter().any(|m| !m.is_finite()) {
            return domain("rates and drifts must be finite");
        }
        let sigma_inv = sigma
            .inverse()
            .ok_or_else(|| Error::Domain("volatility matrix is not invertible".into()))?;
        Ok(Self {
            r,
            mu,
            sigma,
            sigma_inv,
            s0,
        })
    }

    /// One asset, drift equal to the short rate.
    pub fn single(s0: T, r: T, sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) {
            return domain("volatility must be positive");
        }
        Self::new(r, vec![r], SquareMatrix::from_fn(1, |_, _| sigma), vec![s0])
    }

    /// Multi-asset market with risk-neutral drift and volatility from a
    /// correlation spec.
    pub fn from_correlation(r: T, corr: &CorrelationSpec<T>, s0: Vec<T>) -> Result<Self> {
        let d = corr.dim();
        Self::new(r, vec![r; d], corr.volatility_matrix(), s0)
    }

    pub fn dim(&self) -> usize {
        self.s0.len()
    }
    pub fn r(&self) -> T {
        self.r
    }
    pub fn mu(&self) -> &[T] {
        &self.mu
    }
    pub fn sigma(&self) -> &SquareMatrix<T> {
        &self.sigma
    }
    pub fn s0(&self) -> &[T] {
        &self.s0
    }

    /// Scalar volatility of a one-asset market.
    pub fn vol(&self) -> T {
        self.sigma[(0, 0)]
    }

    /// `Sigma = sigma sigma^T`.
    pub fn covariance(&self) -> SquareMatrix<T> {
        self.sigma.matmul(&self.sigma.transpose())
    }

    /// Market price of risk `sigma^{-1} (r 1 - mu)`.
    pub fn risk_premium(&self) -> Vec<T> {
        let excess: Vec<T> = self.mu.iter().map(|&m| self.r - m).collect();
        self.sigma_inv.mul_vec(&excess)
    }

    /// `A0 = (diag(S0) sigma)^{-1}`: maps a hedge row vector `Z` to the
    /// gradient in spot, `Z A0 = grad_S V`.
    pub fn delta_normalizer(&self) -> SquareMatrix<T> {
        let scaled = SquareMatrix::from_fn(self.dim(), |i, j| self.s0[i] * self.sigma[(i, j)]);
        scaled
            .inverse()
            .expect("diag(S0) sigma is invertible when sigma is")
    }

    pub fn with_s0(&self, s0: Vec<T>) -> Result<Self> {
        Self::new(self.r, self.mu.clone(), self.sigma.clone(), s0)
    }
}

/// Equicorrelated volatility structure: `Sigma_ii = sigma0^2`,
/// `Sigma_ij = sigma0^2 rho`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationSpec<T = f64> {
    sigma0: T,
    rho: T,
    d: usize,
}

impl<T: Real> CorrelationSpec<T> {
    pub fn new(sigma0: T, rho: T, d: usize) -> Result<Self> {
        if d == 0 {
            return domain("dimension must be at least 1");
        }
        if !(sigma0 > T::zero()) {
            return domain("sigma0 must be positive");
        }
        let lower = if d > 1 {
            -T::one() / T::lit((d - 1) as f64)
        } else {
            -T::one()
        };
        if !(rho > lower && rho <= T::one()) {
            return domain(format!("correlation {rho} outside ({lower}, 1]"));
        }
        let spec = Self { sigma0, rho, d };
        if d > 1 && spec.correlation_matrix().cholesky().is_none() {
            return domain("correlation matrix is not positive definite");
        }
        Ok(spec)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn correlation_matrix(&self) -> SquareMatrix<T> {
        SquareMatrix::from_fn(self.d, |i, j| if i == j { T::one() } else { self.rho })
    }

    pub fn covariance(&self) -> SquareMatrix<T> {
        let v = self.sigma0 * self.sigma0;
        SquareMatrix::from_fn(self.d, |i, j| if i == j { v } else { v * self.rho })
    }

    /// `sigma = sigma0 * chol(correlation)`.
    pub fn volatility_matrix(&self) -> SquareMatrix<T> {
        let l = if self.d == 1 {
            SquareMatrix::identity(1)
        } else {
            self.correlation_matrix()
                .cholesky()
                .expect("validated at construction")
        };
        SquareMatrix::from_fn(self.d, |i, j| self.sigma0 * l[(i, j)])
    }
}

/// Initial-margin funding parameters. `c_alpha` is cached at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImParams<T = f64> {
    spread: T,
    alpha: T,
    horizon: T,
    c_alpha: T,
}

impl<T: Real> ImParams<T> {
    /// `spread` is the funding spread `R`, `alpha` the CVaR level and
    /// `horizon` the margin period of risk `Delta` (years).
    pub fn new(spread: T, alpha: T, horizon: T) -> Result<Self> {
        if !(spread >= T::zero()) {
            return domain("funding spread must be nonnegative");
        }
        if !(horizon > T::zero()) {
            return domain("margin horizon must be positive");
        }
        let c_alpha = gaussian_cvar_constant(alpha)?;
        Ok(Self {
            spread,
            alpha,
            horizon,
            c_alpha,
        })
    }

    pub fn spread(&self) -> T {
        self.spread
    }
    pub fn alpha(&self) -> T {
        self.alpha
    }
    pub fn horizon(&self) -> T {
        self.horizon
    }
    pub fn c_alpha(&self) -> T {
        self.c_alpha
    }

    pub fn with_spread(&self, spread: T) -> Result<Self> {
        Self::new(spread, self.alpha, self.horizon)
    }

    pub fn with_horizon(&self, horizon: T) -> Result<Self> {
        Self::new(self.spread, self.alpha, horizon)
    }

    /// `sqrt((t + Delta) ^ T - t)`, the square-root horizon remaining at `t`.
    #[inline]
    pub fn horizon_root(&self, t: T, maturity: T) -> T {
        ((t + self.horizon).min(maturity) - t).max(T::zero()).sqrt()
    }

    /// IM cost intensity `R C_alpha sqrt((t + Delta) ^ T - t)` per unit `|Z|`.
    #[inline]
    pub fn intensity(&self, t: T, maturity: T) -> T {
        self.spread * self.c_alpha * self.horizon_root(t, maturity)
    }

    /// Checks `0 < Delta <= maturity`.
    pub fn check_maturity(&self, maturity: T) -> Result<()> {
        if self.horizon > maturity {
            return domain(format!(
                "margin horizon {} exceeds maturity {maturity}",
                self.horizon
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::{normal_inv_cdf, normal_pdf};

    #[test]
    fn cholesky_reconstructs_covariance() {
        for d in 1..=10 {
            for &rho in &[-0.05, 0.0, 0.3, 0.75, 0.99] {
                if d > 1 && rho <= -1.0 / (d as f64 - 1.0) {
                    continue;
                }
                let spec = CorrelationSpec::new(0.25, rho, d).unwrap();
                let s = spec.volatility_matrix();
                let back = s.matmul(&s.transpose());
                assert!(back.max_abs_diff(&spec.covariance()) < 1e-12, "d={d} rho={rho}");
            }
        }
    }

    #[test]
    fn correlation_bounds() {
        assert!(CorrelationSpec::new(0.25, -0.5, 3).is_err());
        assert!(CorrelationSpec::new(0.25, 1.01, 2).is_err());
        assert!(CorrelationSpec::new(0.0, 0.5, 2).is_err());
    }

    #[test]
    fn market_validation() {
        let sig = SquareMatrix::from_rows(&[vec![0.2, 0.0], vec![0.4, 0.0]]).unwrap();
        assert!(MarketParams::new(0.02, vec![0.02; 2], sig, vec![1.0, 1.0]).is_err());
        assert!(matches!(
            MarketParams::new(0.02, vec![0.02], SquareMatrix::identity(1), vec![1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(MarketParams::single(-1.0, 0.02, 0.25).is_err());
    }

    #[test]
    fn delta_normalizer_inverts_scaled_sigma() {
        let spec = CorrelationSpec::new(0.25, 0.75, 3).unwrap();
        let m = MarketParams::from_correlation(0.02, &spec, vec![18.0, 20.0, 22.0]).unwrap();
        let a0 = m.delta_normalizer();
        let scaled = SquareMatrix::from_fn(3, |i, j| m.s0()[i] * m.sigma()[(i, j)]);
        assert!(scaled.matmul(&a0).max_abs_diff(&SquareMatrix::identity(3)) < 1e-12);
        assert!(m.risk_premium().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn im_params_cache_constant() {
        let im = ImParams::new(0.02, 0.99, 0.02).unwrap();
        let x: f64 = normal_inv_cdf(0.99).unwrap();
        assert!((im.c_alpha() - normal_pdf(x) / 0.01).abs() < 1e-12);
        assert!(ImParams::new(-0.01, 0.99, 0.02).is_err());
        assert!(ImParams::new(0.02, 1.0, 0.02).is_err());
        assert!(im.check_maturity(0.01).is_err());
        assert!((im.horizon_root(0.99, 1.0) - 0.1).abs() < 1e-12);
        assert!((im.horizon_root(0.5, 1.0) - 0.02f64.sqrt()).abs() < 1e-15);
    }
}
