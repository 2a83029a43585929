//! Price and delta tables.

use clap::ValueEnum;
use rayon::prelude::*;

use margin_bsde::montecarlo::nested_estimate;
use margin_bsde::pde::{solve_l_pde_bs, solve_nl_pde};
use margin_bsde::regression::{basket_reference_mc, srmdp_solve, Driver, Stratification};
use margin_bsde::{
    bs_price_delta, bs_price_delta_with_im, CorrelationSpec, McEstimate, MarketParams,
    OptionKind, Payoff, RngStream,
};

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::output::num;
use crate::params::{self, Setup, FD_KEYS, MARKET_KEYS, MC_KEYS, SRMDP_KEYS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableName {
    Call,
    Put,
    Butterfly,
    Diff,
    Linear,
    Basket,
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

const DEFAULT_STRIKES: [f64; 7] = [17.0, 18.0, 19.0, 20.0, 21.0, 22.0, 23.0];
const DEFAULT_FLY_STRIKES: [f64; 7] = [11.0, 14.0, 17.0, 20.0, 23.0, 26.0, 29.0];

fn ci(e: &McEstimate) -> [String; 3] {
    [num(e.value), num(e.ci_low), num(e.ci_high)]
}

fn vanilla(kind: OptionKind, strike: f64) -> Result<Payoff> {
    Ok(match kind {
        OptionKind::Call => Payoff::call(strike)?,
        OptionKind::Put => Payoff::put(strike)?,
    })
}

fn label(kind: &str, strike: f64) -> String {
    format!("{kind} K={strike}")
}

pub fn run(name: TableName, c: &Config, seed: u64) -> Result<Table> {
    let mut allowed = params::keys(&[MARKET_KEYS, FD_KEYS]);
    match name {
        TableName::Call | TableName::Put | TableName::Diff => {
            allowed.extend(SRMDP_KEYS);
            allowed.push("strikes");
        }
        TableName::Butterfly => {
            allowed.extend(SRMDP_KEYS);
            allowed.extend(["strikes", "wing"]);
        }
        TableName::Linear => {
            allowed.extend(MC_KEYS);
            allowed.extend(["strikes", "butterfly_strikes"]);
        }
        TableName::Basket => allowed.extend(["strike", "rho", "dims", "mc_paths"]),
    }
    c.check_keys(&allowed)?;
    let setup = Setup::from_config(c)?;
    match name {
        TableName::Call => vanilla_table(OptionKind::Call, c, &setup, seed),
        TableName::Put => vanilla_table(OptionKind::Put, c, &setup, seed),
        TableName::Butterfly => butterfly_table(c, &setup, seed),
        TableName::Diff => diff_table(c, &setup, seed),
        TableName::Linear => linear_table(c, &setup, seed),
        TableName::Basket => basket_table(c, &setup, seed),
    }
}

fn vanilla_table(kind: OptionKind, c: &Config, s: &Setup, seed: u64) -> Result<Table> {
    let strikes = c.f64_list("strikes", &DEFAULT_STRIKES)?;
    let strat = params::stratification(c)?;
    let market = s.market()?;
    let driver = Driver::nl(&market, &s.im, s.maturity)?;
    let rows = strikes
        .par_iter()
        .enumerate()
        .map(|(i, &k)| -> Result<Vec<String>> {
            let payoff = vanilla(kind, k)?;
            let plain = bs_price_delta(s.s0, k, s.r, s.sigma, s.maturity, kind)?;
            let with_im = bs_price_delta_with_im(s.s0, k, s.r, s.sigma, s.maturity, kind, &s.im)?;
            let fd = solve_nl_pde(&market, &s.im, &payoff, &params::fd_grid(c, k, s.maturity)?)?;
            let sol = srmdp_solve(&driver, &payoff, &strat, RngStream::new(seed, i as u64))?;
            let mut row = vec![
                num(k),
                num(plain.price),
                num(plain.delta),
                num(with_im.price),
                num(with_im.delta),
                num(fd.price_at(s.s0)?),
                num(fd.delta_at(s.s0)?),
            ];
            row.extend(ci(&sol.v0));
            row.extend(ci(&sol.z0[0]));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(Table {
        header: vec![
            "strike",
            "bs_price",
            "bs_delta",
            "bs_im_price",
            "bs_im_delta",
            "fd_price",
            "fd_delta",
            "srmdp_price",
            "srmdp_price_ci_low",
            "srmdp_price_ci_high",
            "srmdp_delta",
            "srmdp_delta_ci_low",
            "srmdp_delta_ci_high",
        ],
        rows,
    })
}

fn butterfly_table(c: &Config, s: &Setup, seed: u64) -> Result<Table> {
    let strikes = c.f64_list("strikes", &DEFAULT_FLY_STRIKES)?;
    let wing = c.f64("wing", 2.0)?;
    let strat = params::stratification(c)?;
    let market = s.market()?;
    let driver = Driver::nl(&market, &s.im, s.maturity)?;
    let rows = strikes
        .par_iter()
        .enumerate()
        .map(|(i, &k)| -> Result<Vec<String>> {
            let payoff = Payoff::butterfly_with_wing(k, wing)?;
            // the closed form of a butterfly is the signed sum of its call legs
            let (mut price, mut delta) = (0.0, 0.0);
            for (leg_kind, strike, weight) in payoff.vanilla_legs()? {
                let q = bs_price_delta(s.s0, strike, s.r, s.sigma, s.maturity, leg_kind)?;
                price += weight * q.price;
                delta += weight * q.delta;
            }
            let grid = params::fd_grid(c, k + wing, s.maturity)?;
            let fd = solve_nl_pde(&market, &s.im, &payoff, &grid)?;
            let sol = srmdp_solve(&driver, &payoff, &strat, RngStream::new(seed, i as u64))?;
            let mut row = vec![
                num(k),
                num(price),
                num(delta),
                num(fd.price_at(s.s0)?),
                num(fd.delta_at(s.s0)?),
            ];
            row.extend(ci(&sol.v0));
            row.extend(ci(&sol.z0[0]));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(Table {
        header: vec![
            "strike",
            "bs_price",
            "bs_delta",
            "fd_price",
            "fd_delta",
            "srmdp_price",
            "srmdp_price_ci_low",
            "srmdp_price_ci_high",
            "srmdp_delta",
            "srmdp_delta_ci_low",
            "srmdp_delta_ci_high",
        ],
        rows,
    })
}

fn diff_table(c: &Config, s: &Setup, seed: u64) -> Result<Table> {
    let strikes = c.f64_list("strikes", &[17.0, 20.0, 23.0])?;
    let strat = params::stratification(c)?;
    let market = s.market()?;
    let cases: Vec<(OptionKind, &str, f64)> = [(OptionKind::Call, "Call"), (OptionKind::Put, "Put")]
        .iter()
        .flat_map(|&(kind, name)| strikes.iter().map(move |&k| (kind, name, k)))
        .collect();
    let rows = cases
        .par_iter()
        .enumerate()
        .map(|(i, &(kind, name, k))| -> Result<Vec<String>> {
            let payoff = vanilla(kind, k)?;
            let plain = bs_price_delta(s.s0, k, s.r, s.sigma, s.maturity, kind)?;
            let with_im = bs_price_delta_with_im(s.s0, k, s.r, s.sigma, s.maturity, kind, &s.im)?;
            let driver = Driver::df(&market, &s.im, s.maturity, &payoff)?;
            let sol = srmdp_solve(&driver, &payoff, &strat, RngStream::new(seed, i as u64))?;
            let mut row = vec![
                label(name, k),
                num(with_im.price - plain.price),
                num(with_im.delta - plain.delta),
            ];
            row.extend(ci(&sol.v0));
            row.extend(ci(&sol.z0[0]));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(Table {
        header: vec![
            "option",
            "es_price",
            "es_delta",
            "srmdp_df_price",
            "srmdp_df_price_ci_low",
            "srmdp_df_price_ci_high",
            "srmdp_df_delta",
            "srmdp_df_delta_ci_low",
            "srmdp_df_delta_ci_high",
        ],
        rows,
    })
}

fn linear_table(c: &Config, s: &Setup, seed: u64) -> Result<Table> {
    let strikes = c.f64_list("strikes", &[17.0, 20.0, 23.0])?;
    let fly_strikes = c.f64_list("butterfly_strikes", &[11.0, 20.0, 29.0])?;
    let nested = params::nested(c)?;
    let market = s.market()?;
    let mut cases: Vec<(String, Payoff, f64)> = Vec::new();
    for (kind, name) in [(OptionKind::Call, "Call"), (OptionKind::Put, "Put")] {
        for &k in &strikes {
            cases.push((label(name, k), vanilla(kind, k)?, k));
        }
    }
    for &k in &fly_strikes {
        cases.push((label("Butterfly", k), Payoff::butterfly(k)?, k + 2.0));
    }
    let rows = cases
        .par_iter()
        .enumerate()
        .map(|(i, (name, payoff, anchor))| -> Result<Vec<String>> {
            let fd = solve_l_pde_bs(&market, &s.im, payoff, &params::fd_grid(c, *anchor, s.maturity)?)?;
            let est = nested_estimate(&market, &s.im, payoff, s.maturity, &nested, RngStream::new(seed, i as u64))?;
            let mut row = vec![name.clone(), num(fd.price_at(s.s0)?), num(fd.delta_at(s.s0)?)];
            row.extend(ci(&est.v0));
            row.extend(ci(&est.z0));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    Ok(Table {
        header: vec![
            "option",
            "fd_price",
            "fd_delta",
            "mc_price",
            "mc_price_ci_low",
            "mc_price_ci_high",
            "mc_delta",
            "mc_delta_ci_low",
            "mc_delta_ci_high",
        ],
        rows,
    })
}

/// Initial spots of the `d`-asset basket rows.
fn basket_spots(d: usize) -> Result<Vec<f64>> {
    match d {
        2 => Ok(vec![18.0, 20.0]),
        3 => Ok(vec![18.0, 20.0, 22.0]),
        4 => Ok(vec![16.0, 18.0, 20.0, 22.0]),
        5 => Ok(vec![16.0, 18.0, 20.0, 22.0, 24.0]),
        _ => Err(CliError::config(format!("basket dimensions must lie in 2..=5, got {d}"))),
    }
}

fn basket_table(c: &Config, s: &Setup, seed: u64) -> Result<Table> {
    let dims = c.usize_list("dims", &[2, 3, 4, 5])?;
    let strike = c.f64("strike", 20.0)?;
    let rho = c.f64("rho", 0.75)?;
    let n_paths = c.usize("mc_paths", 1_000_000)?;
    let mut rows = Vec::new();
    for (case, &d) in dims.iter().enumerate() {
        let spots = basket_spots(d)?;
        let corr = CorrelationSpec::new(s.sigma, rho, d)?;
        let market = MarketParams::from_correlation(s.r, &corr, spots.clone())?;
        let payoff = Payoff::equal_basket(strike, d)?;
        let reference = basket_reference_mc(
            &market,
            &payoff,
            s.maturity,
            n_paths,
            RngStream::new(seed, 2 * case as u64),
        )?;
        let driver = Driver::nl(&market, &s.im, s.maturity)?;
        let strat: Stratification = Stratification::basket_lp1(d)?;
        let sol = srmdp_solve(&driver, &payoff, &strat, RngStream::new(seed, 2 * case as u64 + 1))?;
        let spot_label = spots.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(";");
        for k in 0..d {
            let mut row = vec![spot_label.clone(), (k + 1).to_string()];
            row.extend(ci(&reference.price));
            row.extend(ci(&reference.delta[k]));
            row.extend(ci(&sol.v0));
            row.extend(ci(&sol.z0[k]));
            rows.push(row);
        }
    }
    Ok(Table {
        header: vec![
            "s0",
            "asset",
            "mc_price",
            "mc_price_ci_low",
            "mc_price_ci_high",
            "mc_delta",
            "mc_delta_ci_low",
            "mc_delta_ci_high",
            "srmdp_price",
            "srmdp_price_ci_low",
            "srmdp_price_ci_high",
            "srmdp_delta",
            "srmdp_delta_ci_low",
            "srmdp_delta_ci_high",
        ],
        rows,
    })
}
