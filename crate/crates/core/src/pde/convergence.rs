//! Small-horizon asymptotics of the IM corrections: `sup|V^L - V^BS|` should
//! scale like `Delta^{1/2}` and `sup|V^NL - V^L|` like `Delta`.

use crate::error::{domain, Result};
use crate::market::{ImParams, MarketParams};
use crate::payoff::Payoff;
use crate::pde::solver::{solve_l_pde_bs, solve_nl_pde, FdGrid};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow<T = f64> {
    pub horizon: T,
    /// `sup |V^L - V^BS|` over the box at `t = 0`.
    pub linear_gap: T,
    /// `sup |V^NL - V^L|` over the box at `t = 0`.
    pub nonlinear_gap: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy<T = f64> {
    pub rows: Vec<ConvergenceRow<T>>,
    pub linear_slope: T,
    pub nonlinear_slope: T,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() || x.len() < 2 {
        return domain("need at least two matching points");
    }
    if x.iter().chain(y).any(|v| !(*v > T::zero())) {
        return domain("log-log fit needs positive values");
    }
    let n = T::lit(x.len() as f64);
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = ly.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (a, b) in lx.iter().zip(&ly) {
        sxy = sxy + (*a - mx) * (*b - my);
        sxx = sxx + (*a - mx) * (*a - mx);
    }
    Ok(sxy / sxx)
}

/// Solves the BS (`R = 0`), linear and non-linear PDEs for every horizon and
/// measures the gaps over the nodes with `S` strictly inside `(s_lo, s_hi)`.
pub fn convergence_study<T: Real>(
    market: &MarketParams<T>,
    im: &ImParams<T>,
    payoff: &Payoff<T>,
    grid: &FdGrid<T>,
    horizons: &[T],
    box_spot: (T, T),
) -> Result<ConvergenceStudy<T>> {
    if horizons.len() < 3 {
        return domain("convergence study needs at least three horizons");
    }
    let (s_lo, s_hi) = box_spot;
    if !(s_lo < s_hi) {
        return domain("empty spot box");
    }
    let grid = grid.keeping_surface(false);
    let bs = solve_nl_pde(market, &im.with_spread(T::zero())?, payoff, &grid)?;
    let nodes: Vec<usize> = (0..=grid.m)
        .filter(|&i| {
            let s = grid.x(i).exp();
            s > s_lo && s < s_hi
        })
        .collect();
    if nodes.is_empty() {
        return domain("spot box contains no grid node");
    }
    let sup = |a: &[T], b: &[T]| {
        nodes
            .iter()
            .fold(T::zero(), |m, &i| m.max((a[i] - b[i]).abs()))
    };
    let mut rows = Vec::with_capacity(horizons.len());
    for &h in horizons {
        let im_h = im.with_horizon(h)?;
        let lin = solve_l_pde_bs(market, &im_h, payoff, &grid)?;
        let nl = solve_nl_pde(market, &im_h, payoff, &grid)?;
        rows.push(ConvergenceRow {
            horizon: h,
            linear_gap: sup(lin.initial(), bs.initial()),
            nonlinear_gap: sup(nl.initial(), lin.initial()),
        });
    }
    let hs: Vec<T> = rows.iter().map(|r| r.horizon).collect();
    let lg: Vec<T> = rows.iter().map(|r| r.linear_gap).collect();
    let ng: Vec<T> = rows.iter().map(|r| r.nonlinear_gap).collect();
    Ok(ConvergenceStudy {
        linear_slope: log_log_slope(&hs, &lg)?,
        nonlinear_slope: log_log_slope(&hs, &ng)?,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [0.1, 0.2, 0.4, 0.8];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.7)).collect();
        assert!((log_log_slope(&x, &y).unwrap() - 1.7).abs() < 1e-12);
        assert!(log_log_slope(&[1.0], &[1.0]).is_err());
        assert!(log_log_slope(&[1.0, 2.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn needs_three_horizons() {
        let m = MarketParams::single(20.0, 0.02, 0.25).unwrap();
        let im = ImParams::new(0.02, 0.99, 0.02).unwrap();
        let g = FdGrid::default_for_strike(20.0, 1.0).unwrap().with_size(50, 10).unwrap();
        let p = Payoff::call(20.0).unwrap();
        assert!(convergence_study(&m, &im, &p, &g, &[0.01, 0.02], (15.0, 25.0)).is_err());
    }
}
