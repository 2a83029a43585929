//! Smile, convergence and CVaR commands.

use std::path::Path;

use margin_bsde::pde::convergence_study;
use margin_bsde::{empirical_cvar, im_smile, CvarResult, Payoff};

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::num;
use crate::params::{self, Setup, FD_KEYS, MARKET_KEYS};
use crate::table::Table;

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Implied vols and deltas of the closed-form IM prices over a strike range.
pub fn smile(c: &Config) -> Result<Table> {
    let mut allowed = params::keys(&[MARKET_KEYS]);
    allowed.extend(["k_min", "k_max", "k_step"]);
    c.check_keys(&allowed)?;
    let s = Setup::from_config(c)?;
    let (lo, hi, step) = (c.f64("k_min", 17.0)?, c.f64("k_max", 23.0)?, c.f64("k_step", 0.25)?);
    if !(lo > 0.0 && hi >= lo && step > 0.0) {
        return Err(CliError::config("need 0 < k_min <= k_max and k_step > 0"));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    let strikes: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
    let with_im = im_smile(s.s0, s.r, s.sigma, s.maturity, &s.im, &strikes)?;
    let plain = im_smile(s.s0, s.r, s.sigma, s.maturity, &s.im_free()?, &strikes)?;
    let rows = with_im
        .iter()
        .zip(&plain)
        .map(|(p, q)| {
            let flag = if p.call_vol.is_none() || p.put_vol.is_none() {
                "inversion_failed"
            } else {
                ""
            };
            vec![
                num(p.strike),
                opt(p.call_vol),
                opt(p.put_vol),
                num(p.call_delta),
                num(p.put_delta),
                num(q.call_delta),
                num(q.put_delta),
                flag.to_string(),
            ]
        })
        .collect();
    Ok(Table {
        header: vec![
            "strike",
            "call_vol",
            "put_vol",
            "call_delta",
            "put_delta",
            "bs_call_delta",
            "bs_put_delta",
            "flag",
        ],
        rows,
    })
}

/// Sup-norm gaps between the BS, linear and non-linear PDEs per margin horizon.
pub fn convergence(c: &Config) -> Result<Table> {
    let mut allowed = params::keys(&[MARKET_KEYS, FD_KEYS]);
    allowed.extend(["payoff", "strike", "horizons", "box_lo", "box_hi"]);
    c.check_keys(&allowed)?;
    let s = Setup::from_config(c)?;
    let strike = c.f64("strike", 20.0)?;
    let payoff = match c.string("payoff", "call").as_str() {
        "call" => Payoff::call(strike)?,
        "put" => Payoff::put(strike)?,
        "butterfly" => Payoff::butterfly(strike)?,
        other => return Err(CliError::config(format!("payoff must be call, put or butterfly, got `{other}`"))),
    };
    let horizons = c.f64_list("horizons", &[0.005, 0.01, 0.02, 0.04])?;
    let spot_box = (c.f64("box_lo", 15.0)?, c.f64("box_hi", 25.0)?);
    let grid = params::fd_grid(c, strike, s.maturity)?;
    let study = convergence_study(&s.market()?, &s.im, &payoff, &grid, &horizons, spot_box)?;
    let rows = study
        .rows
        .iter()
        .map(|r| {
            vec![
                num(r.horizon),
                num(r.linear_gap),
                num(r.nonlinear_gap),
                num(study.linear_slope),
                num(study.nonlinear_slope),
            ]
        })
        .collect();
    Ok(Table {
        header: vec!["horizon", "linear_gap", "nonlinear_gap", "linear_slope", "nonlinear_slope"],
        rows,
    })
}

/// Reads one real per line; blank lines and `#` comments are skipped.
pub fn read_sample(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let x: f64 = line.parse().map_err(|_| {
            CliError::config(format!("{} line {}: not a number: `{line}`", path.display(), i + 1))
        })?;
        out.push(x);
    }
    Ok(out)
}

pub fn cvar(sample: &[f64], alpha: f64) -> Result<(CvarResult, Table)> {
    let r = empirical_cvar(sample, alpha)?;
    let table = Table {
        header: vec!["alpha", "n", "cvar", "minimizer"],
        rows: vec![vec![num(alpha), sample.len().to_string(), num(r.cvar), num(r.minimizer_x)]],
    };
    Ok((r, table))
}
