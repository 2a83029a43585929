//! European payoffs and their closed-form Black-Scholes hedge components.

use crate::analytic::{bs_delta_tau, OptionKind};
use crate::error::{domain, Error, Result};
use crate::market::MarketParams;
use crate::scalar::Real;

/// Default butterfly wing width (currency units).
pub const BUTTERFLY_WING: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PayoffKind {
    Call,
    Put,
    Butterfly,
    BasketCall,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Payoff<T = f64> {
    kind: PayoffKind,
    strike: T,
    wing: T,
    weights: Vec<T>,
}

impl<T: Real> Payoff<T> {
    fn checked(kind: PayoffKind, strike: T, wing: T, weights: Vec<T>) -> Result<Self> {
        if !(strike > T::zero()) {
            return domain(format!("strike must be positive, got {strike}"));
        }
        if !(wing > T::zero()) {
            return domain("butterfly wing must be positive");
        }
        if weights.is_empty() || weights.iter().any(|w| !(*w >= T::zero())) {
            return domain("basket weights must be nonnegative and nonempty");
        }
        Ok(Self {
            kind,
            strike,
            wing,
            weights,
        })
    }

    pub fn call(strike: T) -> Result<Self> {
        Self::checked(PayoffKind::Call, strike, T::lit(BUTTERFLY_WING), vec![T::one()])
    }

    pub fn put(strike: T) -> Result<Self> {
        Self::checked(PayoffKind::Put, strike, T::lit(BUTTERFLY_WING), vec![T::one()])
    }

    /// `(S - (K - w))^+ - 2 (S - K)^+ + (S - (K + w))^+` with `w = 2`.
    pub fn butterfly(strike: T) -> Result<Self> {
        Self::butterfly_with_wing(strike, T::lit(BUTTERFLY_WING))
    }

    pub fn butterfly_with_wing(strike: T, wing: T) -> Result<Self> {
        Self::checked(PayoffKind::Butterfly, strike, wing, vec![T::one()])
    }

    /// `(sum_i p^i S^i - K)^+`.
    pub fn basket_call(strike: T, weights: Vec<T>) -> Result<Self> {
        Self::checked(PayoffKind::BasketCall, strike, T::lit(BUTTERFLY_WING), weights)
    }

    /// Equal-weight basket call on `d` assets.
    pub fn equal_basket(strike: T, d: usize) -> Result<Self> {
        Self::basket_call(strike, vec![T::one() / T::lit(d as f64); d])
    }

    pub fn kind(&self) -> PayoffKind {
        self.kind
    }
    pub fn strike(&self) -> T {
        self.strike
    }
    pub fn wing(&self) -> T {
        self.wing
    }
    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Payoff of a one-asset claim. Basket payoffs see `s` as every asset.
    #[inline]
    pub fn value_1d(&self, s: T) -> T {
        let k = self.strike;
        let pos = |x: T| x.max(T::zero());
        match self.kind {
            PayoffKind::Call => pos(s - k),
            PayoffKind::Put => pos(k - s),
            PayoffKind::Butterfly => {
                let w = self.wing;
                pos(s - (k - w)) - T::lit(2.0) * pos(s - k) + pos(s - (k + w))
            }
            PayoffKind::BasketCall => {
                let total = self.weights.iter().fold(T::zero(), |a, &w| a + w);
                pos(total * s - k)
            }
        }
    }

    /// Exact piecewise-linear payoff of the terminal state `s`.
    pub fn evaluate(&self, s: &[T]) -> Result<T> {
        if s.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: s.len(),
            });
        }
        Ok(match self.kind {
            PayoffKind::BasketCall => self.basket_value(s),
            _ => self.value_1d(s[0]),
        })
    }

    #[inline]
    pub(crate) fn basket_value(&self, s: &[T]) -> T {
        let b = self
            .weights
            .iter()
            .zip(s)
            .fold(T::zero(), |acc, (&w, &x)| acc + w * x);
        (b - self.strike).max(T::zero())
    }

    /// Lipschitz constant in the sup norm of the terminal state.
    pub fn lipschitz_constant(&self) -> T {
        let total = self.weights.iter().fold(T::zero(), |a, &w| a + w.abs());
        T::one().max(total)
    }

    /// Decomposition into vanilla calls/puts: `(kind, strike, weight)`.
    pub fn vanilla_legs(&self) -> Result<Vec<(OptionKind, T, T)>> {
        let k = self.strike;
        match self.kind {
            PayoffKind::Call => Ok(vec![(OptionKind::Call, k, T::one())]),
            PayoffKind::Put => Ok(vec![(OptionKind::Put, k, T::one())]),
            PayoffKind::Butterfly => {
                let w = self.wing;
                if !(k - w > T::zero()) {
                    return domain("butterfly lower wing must have a positive strike");
                }
                Ok(vec![
                    (OptionKind::Call, k - w, T::one()),
                    (OptionKind::Call, k, -T::lit(2.0)),
                    (OptionKind::Call, k + w, T::one()),
                ])
            }
            PayoffKind::BasketCall => Err(Error::UnsupportedPayoff(
                "basket has no one-dimensional closed form".into(),
            )),
        }
    }
}

/// Black-Scholes hedge `Z^BS(t, s) = sigma s dV^BS/ds` for one-asset payoffs,
/// as the weighted sum of the vanilla legs' deltas (butterfly: `+1, -2, +1`).
pub fn bs_delta_superposition<T: Real>(
    payoff: &Payoff<T>,
    s: T,
    t: T,
    maturity: T,
    market: &MarketParams<T>,
) -> Result<T> {
    if market.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: market.dim(),
        });
    }
    if !(t <= maturity) {
        return domain("time after maturity");
    }
    let sigma = market.vol();
    let tau = maturity - t;
    let delta = payoff
        .vanilla_legs()?
        .into_iter()
        .fold(T::zero(), |acc, (kind, k, w)| {
            acc + w * bs_delta_tau(s, k, market.r(), sigma, tau, kind)
        });
    Ok(sigma * s * delta)
}
