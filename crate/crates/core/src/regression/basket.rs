use rayon::prelude::*;

use crate::error::{domain, Error, Result};
use crate::market::MarketParams;
use crate::paths::PATH_BLOCK;
use crate::payoff::{Payoff, PayoffKind};
use crate::rng::RngStream;
use crate::stats::{combine_blocks, McEstimate, Moments};

/// Crude risk-neutral Monte Carlo price of a basket call with pathwise deltas.
#[derive(Debug, Clone, PartialEq)]
pub struct BasketReference {
    pub price: McEstimate,
    /// `grad_S V`, which equals `Z_0 A_0`.
    pub delta: Vec<McEstimate>,
}

/// Samples `S_T` exactly under the risk-neutral measure (drift `r`, any `mu`
/// in `market` is ignored). Delta of asset `k` is
/// `e^{-rT} 1{B_T > K} p^k S_T^k / S_0^k`.
pub fn basket_reference_mc(
    market: &MarketParams,
    payoff: &Payoff,
    maturity: f64,
    n_paths: usize,
    rng: RngStream,
) -> Result<BasketReference> {
    if payoff.kind() != PayoffKind::BasketCall {
        return Err(Error::UnsupportedPayoff("reference Monte Carlo prices basket calls".into()));
    }
    let d = market.dim();
    if payoff.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: payoff.dim(),
        });
    }
    if n_paths < 2 {
        return domain("reference Monte Carlo needs at least two paths");
    }
    if !(maturity > 0.0) {
        return domain("maturity must be positive");
    }
    let r = market.r();
    let cov = market.covariance();
    let sigma = market.sigma();
    let s0 = market.s0();
    let root = maturity.sqrt();
    let log_fwd: Vec<f64> = (0..d)
        .map(|k| s0[k].ln() + (r - 0.5 * cov[(k, k)]) * maturity)
        .collect();
    let df = (-r * maturity).exp();
    let weights = payoff.weights();
    let strike = payoff.strike();

    let n_blocks = n_paths.div_ceil(PATH_BLOCK);
    let blocks: Vec<Vec<Moments>> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut gen = rng.substream(b as u64).generator();
            let count = PATH_BLOCK.min(n_paths - b * PATH_BLOCK);
            let mut m = vec![Moments::default(); d + 1];
            let (mut g, mut st) = (vec![0.0; d], vec![0.0; d]);
            for _ in 0..count {
                gen.fill_gaussian(&mut g);
                for k in 0..d {
                    let shock: f64 = sigma.row(k).iter().zip(&g).map(|(a, b)| a * b).sum();
                    st[k] = (log_fwd[k] + root * shock).exp();
                }
                let basket: f64 = weights.iter().zip(&st).map(|(w, s)| w * s).sum();
                let itm = basket > strike;
                m[0].push(df * (basket - strike).max(0.0));
                for k in 0..d {
                    m[k + 1].push(if itm { df * weights[k] * st[k] / s0[k] } else { 0.0 });
                }
            }
            m
        })
        .collect();

    let est = |k: usize| {
        let parts: Vec<Moments> = blocks.iter().map(|b| b[k]).collect();
        let m = combine_blocks(&parts);
        McEstimate::new(m.mean(), m.std_error(), n_paths, 1, rng.seed)
    };
    Ok(BasketReference {
        price: est(0),
        delta: (1..=d).map(est).collect(),
    })
}
