//! Pricing and hedging of European derivatives when the hedger funds a
//! CVaR-based initial margin at a spread over the risk-free rate.
//!
//! The deterministic numerics (closed forms, CVaR, finite differences) are
//! generic over [`Real`]; the Monte Carlo and regression engines run in `f64`.

pub mod analytic;
pub mod cvar;
pub mod error;
pub mod linalg;
pub mod market;
pub mod montecarlo;
pub mod normal;
pub mod paths;
pub mod payoff;
pub mod pde;
pub mod regression;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use analytic::{
    atmf_skew, atmf_skew_sign, bs_price_delta, bs_price_delta_with_im, im_smile, implied_vol,
    BsQuote, DividendCurve, OptionKind, SmilePoint,
};
pub use cvar::{cvar_lipschitz_gap, empirical_cvar, CvarResult};
pub use error::{Error, Result};
pub use market::{CorrelationSpec, ImParams, MarketParams};
pub use normal::{gaussian_cvar_constant, normal_cdf, normal_inv_cdf, normal_pdf};
pub use payoff::{Payoff, PayoffKind};
pub use rng::RngStream;
pub use scalar::Real;
pub use stats::McEstimate;

pub type Market = MarketParams<f64>;
pub type Market32 = MarketParams<f32>;
pub type Im = ImParams<f64>;
pub type Im32 = ImParams<f32>;
pub type Grid = pde::FdGrid<f64>;
pub type Grid32 = pde::FdGrid<f32>;
