//! Market, grid and sample-size settings shared by the commands.

use margin_bsde::montecarlo::NestedConfig;
use margin_bsde::pde::{FdGrid, Stencil};
use margin_bsde::regression::Stratification;
use margin_bsde::{ImParams, MarketParams};

use crate::config::Config;
use crate::error::{CliError, Result};

pub const MARKET_KEYS: &[&str] = &["s0", "r", "sigma", "maturity", "spread", "alpha", "horizon"];
pub const FD_KEYS: &[&str] = &["fd_m", "fd_n", "omega", "stencil"];
pub const SRMDP_KEYS: &[&str] = &["preset", "srmdp_cubes", "srmdp_sims", "srmdp_steps"];
pub const MC_KEYS: &[&str] = &["mc_outer", "mc_inner"];

#[derive(Debug, Clone)]
pub struct Setup {
    pub s0: f64,
    pub r: f64,
    pub sigma: f64,
    pub maturity: f64,
    pub im: ImParams,
}

impl Setup {
    pub fn from_config(c: &Config) -> Result<Self> {
        let maturity = c.f64("maturity", 1.0)?;
        let im = ImParams::new(
            c.f64("spread", 0.02)?,
            c.f64("alpha", 0.99)?,
            c.f64("horizon", 0.02)?,
        )?;
        let setup = Self {
            s0: c.f64("s0", 20.0)?,
            r: c.f64("r", 0.02)?,
            sigma: c.f64("sigma", 0.25)?,
            maturity,
            im,
        };
        setup.market()?;
        Ok(setup)
    }

    pub fn market(&self) -> Result<MarketParams> {
        Ok(MarketParams::single(self.s0, self.r, self.sigma)?)
    }

    pub fn im_free(&self) -> Result<ImParams> {
        Ok(self.im.with_spread(0.0)?)
    }
}

/// Grid anchored at `strike` with the configured size, scheme and stencil.
pub fn fd_grid(c: &Config, strike: f64, maturity: f64) -> Result<FdGrid> {
    let stencil = match c.string("stencil", "central").as_str() {
        "central" => Stencil::Central,
        "forward" => Stencil::Forward,
        other => return Err(CliError::config(format!("stencil must be central or forward, got `{other}`"))),
    };
    let omega = c.f64("omega", 0.5)?;
    if !(0.0..=1.0).contains(&omega) {
        return Err(CliError::config(format!("omega must lie in [0, 1], got {omega}")));
    }
    Ok(FdGrid::default_for_strike(strike, maturity)?
        .with_size(c.usize("fd_m", 4000)?, c.usize("fd_n", 1000)?)?
        .with_omega(omega)
        .with_stencil(stencil))
}

/// One-dimensional LP0 stratification: `preset` (`desk` or `full`) with
/// optional overrides.
pub fn stratification(c: &Config) -> Result<Stratification> {
    let base = match c.string("preset", "desk").as_str() {
        "desk" => Stratification::desk_lp0(),
        "full" => Stratification::full_lp0(),
        other => return Err(CliError::config(format!("preset must be desk or full, got `{other}`"))),
    };
    Ok(Stratification::new(
        1,
        c.usize("srmdp_cubes", base.n_cubes)?,
        base.basis,
        c.usize("srmdp_sims", base.n_sims_per_cube)?,
        c.usize("srmdp_steps", base.n_time_steps)?,
    )?)
}

pub fn nested(c: &Config) -> Result<NestedConfig> {
    let full = NestedConfig::full();
    Ok(NestedConfig::new(
        c.usize("mc_outer", full.n_outer)?,
        c.usize("mc_inner", full.n_inner)?,
    ))
}

pub fn keys(groups: &[&[&'static str]]) -> Vec<&'static str> {
    groups.iter().flat_map(|g| g.iter().copied()).collect()
}
