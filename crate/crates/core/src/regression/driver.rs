use crate::analytic::{dividend_integral, DividendCurve};
use crate::error::{domain, Error, Result};
use crate::market::{ImParams, MarketParams};
use crate::payoff::{bs_delta_superposition, Payoff};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriverKind {
    /// `-r v + z sigma^{-1}(r 1 - mu) + R C_alpha sqrt(.) |z|`.
    Nl,
    /// Difference `V^NL - V^BS`: `-r v + z theta + R C_alpha sqrt(.) |z + Z^BS|`,
    /// zero terminal value.
    Df,
    /// `-r v + z theta`.
    Bs,
}

/// Generator of a standard BSDE with constant-coefficient market.
#[derive(Debug, Clone)]
pub struct Driver {
    kind: DriverKind,
    market: MarketParams,
    im: ImParams,
    maturity: f64,
    exogenous: Option<Payoff>,
    premium: Vec<f64>,
}

impl Driver {
    fn build(
        kind: DriverKind,
        market: &MarketParams,
        im: ImParams,
        maturity: f64,
        exogenous: Option<Payoff>,
    ) -> Result<Self> {
        if !(maturity > 0.0) {
            return domain("maturity must be positive");
        }
        Ok(Self {
            kind,
            premium: market.risk_premium(),
            market: market.clone(),
            im,
            maturity,
            exogenous,
        })
    }

    pub fn nl(market: &MarketParams, im: &ImParams, maturity: f64) -> Result<Self> {
        Self::build(DriverKind::Nl, market, *im, maturity, None)
    }

    /// Reference driver without IM.
    pub fn bs(market: &MarketParams, maturity: f64) -> Result<Self> {
        let im = ImParams::new(0.0, 0.99, maturity)?;
        Self::build(DriverKind::Bs, market, im, maturity, None)
    }

    /// Difference driver; `payoff` supplies the closed-form hedge `Z^BS`.
    pub fn df(market: &MarketParams, im: &ImParams, maturity: f64, payoff: &Payoff) -> Result<Self> {
        if market.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: market.dim(),
            });
        }
        payoff.vanilla_legs()?;
        Self::build(DriverKind::Df, market, *im, maturity, Some(payoff.clone()))
    }

    pub fn kind(&self) -> DriverKind {
        self.kind
    }
    pub fn market(&self) -> &MarketParams {
        &self.market
    }
    pub fn im(&self) -> &ImParams {
        &self.im
    }
    pub fn maturity(&self) -> f64 {
        self.maturity
    }
    pub fn dim(&self) -> usize {
        self.market.dim()
    }

    /// `int_{t0}^{t1} R C_alpha sqrt((s + Delta) ^ T - s) ds`.
    pub fn im_weight(&self, t0: f64, t1: f64) -> Result<f64> {
        if self.kind == DriverKind::Bs || self.im.spread() == 0.0 {
            return Ok(0.0);
        }
        let curve = DividendCurve::new(1.0, self.im, 1.0, self.maturity)?;
        dividend_integral(&curve, t0, t1)
    }

    /// `int_{t0}^{t1} f ds` with `(v, z)` frozen; `im_weight` from [`Driver::im_weight`].
    #[inline]
    pub fn increment(&self, t: f64, dt: f64, im_weight: f64, s: &[f64], v: f64, z: &[f64]) -> f64 {
        let linear: f64 = z.iter().zip(&self.premium).map(|(a, b)| a * b).sum();
        let base = dt * (-self.market.r() * v + linear);
        let norm = match self.kind {
            DriverKind::Bs => return base,
            DriverKind::Nl => z.iter().map(|x| x * x).sum::<f64>().sqrt(),
            DriverKind::Df => {
                let payoff = self.exogenous.as_ref().expect("difference driver carries a payoff");
                let zbs = bs_delta_superposition(payoff, s[0], t, self.maturity, &self.market)
                    .unwrap_or(0.0);
                (z[0] + zbs).abs()
            }
        };
        base + im_weight * norm
    }

    /// Terminal condition: the payoff, or zero for the difference equation.
    #[inline]
    pub fn terminal(&self, payoff: &Payoff, s: &[f64]) -> f64 {
        match self.kind {
            DriverKind::Df => 0.0,
            _ => match payoff.kind() {
                crate::payoff::PayoffKind::BasketCall => payoff.basket_value(s),
                _ => payoff.value_1d(s[0]),
            },
        }
    }
}
