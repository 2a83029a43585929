//! Nested Monte Carlo for the linear IM equation in dimension one.
//!
//! The IM leg `int_0^T e^{-rs} R C_alpha sqrt((s + Delta) ^ T - s) |Z^BS_s| ds`
//! is randomised with a uniform time `U`, and `Z^BS_U` is estimated by an
//! inner likelihood-ratio sample with the payoff at `S_U` as control variate.

use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::market::{ImParams, MarketParams};
use crate::paths::PATH_BLOCK;
use crate::payoff::Payoff;
use crate::rng::{GaussianSource, RngStream};
use crate::stats::{combine_blocks, McEstimate, Moments};

/// Lower cut-off of the time randomisation, as a fraction of the maturity.
pub const U_FLOOR_FRACTION: f64 = 1e-4;

/// Where the discount of the IM leg is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ImDiscount {
    /// `e^{-rU}` outside, inner sample discounted by `e^{-r(T-U)}`.
    #[default]
    Integrand,
    /// `e^{-rT}` outside, undiscounted inner sample. Algebraically the same
    /// estimator.
    Displayed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedConfig {
    pub n_outer: usize,
    pub n_inner: usize,
    pub discount: ImDiscount,
    /// `U` is uniform on `[u_floor * T, T]`.
    pub u_floor: f64,
}

impl NestedConfig {
    pub fn new(n_outer: usize, n_inner: usize) -> Self {
        Self {
            n_outer,
            n_inner,
            discount: ImDiscount::Integrand,
            u_floor: U_FLOOR_FRACTION,
        }
    }

    /// `M = 100000` outer and `N = 100` inner samples.
    pub fn full() -> Self {
        Self::new(100_000, 100)
    }

    /// Ten times fewer outer samples than [`NestedConfig::full`].
    pub fn desk() -> Self {
        Self::new(10_000, 100)
    }

    pub fn with_discount(mut self, discount: ImDiscount) -> Self {
        self.discount = discount;
        self
    }
}

/// Joint estimate of `V_0^L` and `Z_0^L / (sigma S_0)` from one outer sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedEstimate {
    pub v0: McEstimate,
    pub z0: McEstimate,
}

struct OneDim<'a> {
    s0: f64,
    r: f64,
    sigma: f64,
    maturity: f64,
    payoff: &'a Payoff,
}

impl OneDim<'_> {
    fn new<'a>(market: &MarketParams, payoff: &'a Payoff, maturity: f64) -> Result<OneDim<'a>> {
        if market.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: market.dim(),
            });
        }
        if payoff.dim() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: payoff.dim(),
            });
        }
        if !(maturity > 0.0) {
            return domain("maturity must be positive");
        }
        Ok(OneDim {
            s0: market.s0()[0],
            r: market.r(),
            sigma: market.vol(),
            maturity,
            payoff,
        })
    }

    #[inline]
    fn terminal(&self, s: f64, tau: f64, y: f64) -> f64 {
        s * ((self.r - 0.5 * self.sigma * self.sigma) * tau + self.sigma * tau.sqrt() * y).exp()
    }

    /// Undiscounted inner sum `sum_n (Phi(S_T^n) - Phi(s)) Y^n / sqrt(tau)`.
    fn inner_moments(&self, s: f64, tau: f64, n: usize, gen: &mut GaussianSource) -> Moments {
        let base = self.payoff.value_1d(s);
        let inv_root = 1.0 / tau.sqrt();
        let mut m = Moments::default();
        for _ in 0..n {
            let y = gen.gaussian();
            let st = self.terminal(s, tau, y);
            m.push((self.payoff.value_1d(st) - base) * y * inv_root);
        }
        m
    }
}

fn inner_checked(
    s: f64,
    t: f64,
    maturity: f64,
    market: &MarketParams,
    payoff: &Payoff,
    rng: RngStream,
    n_inner: usize,
) -> Result<(Moments, f64)> {
    let model = OneDim::new(market, payoff, maturity)?;
    if !(t >= 0.0 && t < maturity) {
        return domain(format!("inner delta needs 0 <= t < T, got t = {t}"));
    }
    if !(s > 0.0) {
        return domain("spot must be positive");
    }
    if n_inner == 0 {
        return domain("inner sample must be nonempty");
    }
    let tau = maturity - t;
    let m = model.inner_moments(s, tau, n_inner, &mut rng.generator());
    Ok((m, (-market.r() * tau).exp()))
}

/// Likelihood-ratio estimate of `Z^BS_t(s) = sigma s dV^BS/ds`:
/// `E[e^{-r(T-t)} (Phi(S_T) - Phi(s)) (W_T - W_t)/(T - t) | S_t = s]`.
pub fn lr_delta_inner(
    s: f64,
    t: f64,
    maturity: f64,
    market: &MarketParams,
    payoff: &Payoff,
    rng: RngStream,
    n_inner: usize,
) -> Result<f64> {
    let (m, df) = inner_checked(s, t, maturity, market, payoff, rng, n_inner)?;
    Ok(df * m.mean())
}

/// [`lr_delta_inner`] with its sampling error.
pub fn lr_delta_inner_estimate(
    s: f64,
    t: f64,
    maturity: f64,
    market: &MarketParams,
    payoff: &Payoff,
    rng: RngStream,
    n_inner: usize,
) -> Result<McEstimate> {
    let (m, df) = inner_checked(s, t, maturity, market, payoff, rng, n_inner)?;
    Ok(McEstimate::new(
        df * m.mean(),
        df * m.std_error(),
        1,
        n_inner,
        rng.seed,
    ))
}

/// Nested estimator of `(V_0^L, Z_0^L / (sigma S_0))`.
///
/// Per outer draw `X` and `U ~ Uniform[eps, T]`, with `S_T`, `S_U` driven by
/// the same `X` (only their marginals enter the two expectations):
///
/// `V = e^{-rT} Phi(S_T) + (T - eps) e^{-rU} R C_alpha sqrt(.) |Z_hat|`,
/// `Z = e^{-rT} (Phi(S_T) - Phi(S_0)) W_T/T + (T - eps) e^{-rU} R C_alpha sqrt(.) |Z_hat| W_U/U`.
pub fn nested_estimate(
    market: &MarketParams,
    im: &ImParams,
    payoff: &Payoff,
    maturity: f64,
    config: &NestedConfig,
    rng: RngStream,
) -> Result<NestedEstimate> {
    let model = OneDim::new(market, payoff, maturity)?;
    if config.n_inner < 2 {
        return domain("nested Monte Carlo needs at least two inner samples");
    }
    if config.n_outer < 2 {
        return domain("nested Monte Carlo needs at least two outer samples");
    }
    if !(config.u_floor >= 0.0 && config.u_floor < 1.0) {
        return domain("time floor fraction must lie in [0, 1)");
    }
    let (r, t_mat) = (model.r, model.maturity);
    let eps = config.u_floor * t_mat;
    let span = t_mat - eps;
    let df_t = (-r * t_mat).exp();
    let base = payoff.value_1d(model.s0);
    let root_t = t_mat.sqrt();
    let n_blocks = config.n_outer.div_ceil(PATH_BLOCK);

    let blocks: Vec<(Moments, Moments)> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut gen = rng.substream(b as u64).generator();
            let count = PATH_BLOCK.min(config.n_outer - b * PATH_BLOCK);
            let (mut mv, mut mz) = (Moments::default(), Moments::default());
            for _ in 0..count {
                let x = gen.gaussian();
                let u = eps + span * gen.uniform();
                let s_t = model.terminal(model.s0, t_mat, x);
                let s_u = model.terminal(model.s0, u, x);
                let tau = t_mat - u;
                let inner = model.inner_moments(s_u, tau, config.n_inner, &mut gen).mean();
                let discounted_abs = match config.discount {
                    ImDiscount::Integrand => (-r * u).exp() * ((-r * tau).exp() * inner).abs(),
                    ImDiscount::Displayed => df_t * inner.abs(),
                };
                let im_leg = span * im.intensity(u, t_mat) * discounted_abs;
                let payoff_t = payoff.value_1d(s_t);
                mv.push(df_t * payoff_t + im_leg);
                mz.push(df_t * (payoff_t - base) * x / root_t + im_leg * x / u.sqrt());
            }
            (mv, mz)
        })
        .collect();

    let mv = combine_blocks(&blocks.iter().map(|b| b.0).collect::<Vec<_>>());
    let mz = combine_blocks(&blocks.iter().map(|b| b.1).collect::<Vec<_>>());
    let scale = 1.0 / (model.sigma * model.s0);
    let est = |m: &Moments, f: f64| {
        McEstimate::new(
            m.mean() * f,
            m.std_error() * f,
            config.n_outer,
            config.n_inner,
            rng.seed,
        )
    };
    Ok(NestedEstimate {
        v0: est(&mv, 1.0),
        z0: est(&mz, scale),
    })
}

pub fn nested_v0(
    market: &MarketParams,
    im: &ImParams,
    payoff: &Payoff,
    maturity: f64,
    n_outer: usize,
    n_inner: usize,
    rng: RngStream,
) -> Result<McEstimate> {
    let cfg = NestedConfig::new(n_outer, n_inner);
    Ok(nested_estimate(market, im, payoff, maturity, &cfg, rng)?.v0)
}

/// `Z_0^L / (sigma S_0)`.
pub fn nested_z0(
    market: &MarketParams,
    im: &ImParams,
    payoff: &Payoff,
    maturity: f64,
    n_outer: usize,
    n_inner: usize,
    rng: RngStream,
) -> Result<McEstimate> {
    let cfg = NestedConfig::new(n_outer, n_inner);
    Ok(nested_estimate(market, im, payoff, maturity, &cfg, rng)?.z0)
}
