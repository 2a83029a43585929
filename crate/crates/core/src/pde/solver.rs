//! Omega-scheme for the IM pricing PDE in log-price `x = ln S`:
//!
//! `v_t + sigma^2/2 v_xx + (r - sigma^2/2) v_x + C_alpha R sigma
//!  sqrt((t + Delta) ^ T - t) |v_x| - r v = 0`, `v(T, x) = Phi(e^x)`.
//!
//! The `|v_x|` term is taken explicitly from the later time slice, so every
//! backward step is one tridiagonal solve with a constant matrix.

use crate::analytic::{dividend_integral, DividendCurve, OptionKind};
use crate::error::{domain, Error, Result};
use crate::market::{ImParams, MarketParams};
use crate::payoff::{bs_delta_superposition, Payoff, PayoffKind};
use crate::pde::thomas::TridiagonalLu;
use crate::scalar::Real;

/// First-derivative stencil for the convection and `|v_x|` terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Stencil {
    /// Second-order central differences.
    #[default]
    Central,
    /// Forward differences `(v_{i+1} - v_i)/dx` exactly as in the published
    /// matrix; first order in `dx`.
    Forward,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdGrid<T = f64> {
    pub x_min: T,
    pub x_max: T,
    /// Spatial intervals.
    pub m: usize,
    /// Time intervals.
    pub n: usize,
    pub omega: T,
    pub maturity: T,
    pub stencil: Stencil,
    /// Keep every time slice (memory `(N+1)(M+1)`) or only `t = 0` and `t = T`.
    pub keep_surface: bool,
    /// Log-spot kept on a node by moving `x_min`.
    pub anchor: Option<T>,
}

impl<T: Real> FdGrid<T> {
    pub fn new(x_min: T, x_max: T, m: usize, n: usize, omega: T, maturity: T) -> Result<Self> {
        if !(x_min < x_max) {
            return domain("x_min must be below x_max");
        }
        if m < 4 || n < 2 {
            return Err(Error::GridTooCoarse(format!(
                "need M >= 4 and N >= 2, got M={m}, N={n}"
            )));
        }
        if !(omega >= T::zero() && omega <= T::one()) {
            return domain("omega must lie in [0, 1]");
        }
        if !(maturity > T::zero()) {
            return domain("maturity must be positive");
        }
        Ok(Self {
            x_min,
            x_max,
            m,
            n,
            omega,
            maturity,
            stencil: Stencil::Central,
            keep_surface: false,
            anchor: None,
        })
    }

    /// Domain about `[ln 1e-6, ln 4K]` with `ln K` on a node, Crank-Nicolson,
    /// `M = 4000`, `N = 1000`.
    pub fn default_for_strike(strike: T, maturity: T) -> Result<Self> {
        Self::new(
            T::lit(1e-6).ln(),
            (T::lit(4.0) * strike).ln(),
            4000,
            1000,
            T::lit(0.5),
            maturity,
        )?
        .aligned_to(strike.ln())
    }

    /// Moves `x_min` (by less than one cell per `(x_max - x) / dx` cells) so
    /// that `x` is a node. Kept through [`FdGrid::with_size`].
    pub fn aligned_to(mut self, x: T) -> Result<Self> {
        if !(x > self.x_min && x < self.x_max) {
            return domain("anchor must lie inside the grid");
        }
        self.anchor = Some(x);
        self.align();
        Ok(self)
    }

    fn align(&mut self) {
        if let Some(a) = self.anchor {
            let cells = ((self.x_max - a) / self.dx()).round().max(T::one());
            let dx = (self.x_max - a) / cells;
            self.x_min = self.x_max - T::lit(self.m as f64) * dx;
        }
    }

    pub fn with_size(mut self, m: usize, n: usize) -> Result<Self> {
        if m < 4 || n < 2 {
            return Err(Error::GridTooCoarse(format!(
                "need M >= 4 and N >= 2, got M={m}, N={n}"
            )));
        }
        self.m = m;
        self.n = n;
        self.align();
        Ok(self)
    }

    pub fn with_omega(mut self, omega: T) -> Self {
        self.omega = omega;
        self
    }

    pub fn with_stencil(mut self, stencil: Stencil) -> Self {
        self.stencil = stencil;
        self
    }

    pub fn keeping_surface(mut self, keep: bool) -> Self {
        self.keep_surface = keep;
        self
    }

    pub fn dt(&self) -> T {
        self.maturity / T::lit(self.n as f64)
    }

    pub fn dx(&self) -> T {
        (self.x_max - self.x_min) / T::lit(self.m as f64)
    }

    pub fn x(&self, i: usize) -> T {
        self.x_min + T::lit(i as f64) * self.dx()
    }

    pub fn t(&self, n: usize) -> T {
        T::lit(n as f64) * self.dt()
    }

    pub fn coeffs(&self, market: &MarketParams<T>, im: &ImParams<T>) -> FdCoeffs<T> {
        let sigma = market.vol();
        let (dt, dx) = (self.dt(), self.dx());
        let half = T::lit(0.5);
        FdCoeffs {
            theta: sigma * sigma * dt / (T::lit(2.0) * dx * dx),
            kappa: (market.r() - half * sigma * sigma) * dt / dx,
            rho: market.r() * dt,
            beta_scale: im.c_alpha() * im.spread() * sigma * dt / dx,
            horizon: im.horizon(),
            dt,
            maturity: self.maturity,
        }
    }
}

/// Scheme coefficients `theta = sigma^2 dt / (2 dx^2)`,
/// `kappa = (r - sigma^2/2) dt / dx`, `rho = r dt` and
/// `beta_n = C_alpha R sigma dt sqrt((t_n + Delta) ^ T - t_n) / dx`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdCoeffs<T = f64> {
    pub theta: T,
    pub kappa: T,
    pub rho: T,
    beta_scale: T,
    horizon: T,
    dt: T,
    maturity: T,
}

impl<T: Real> FdCoeffs<T> {
    pub fn beta(&self, n: usize) -> T {
        let t = T::lit(n as f64) * self.dt;
        let root = ((t + self.horizon).min(self.maturity) - t).max(T::zero()).sqrt();
        self.beta_scale * root
    }
}

/// Value surface on the mesh. Slices are indexed by time step.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution<T = f64> {
    grid: FdGrid<T>,
    slices: Vec<Option<Vec<T>>>,
}

impl<T: Real> FdSolution<T> {
    pub fn grid(&self) -> &FdGrid<T> {
        &self.grid
    }

    /// Values `v(t_n, x_i)`; `None` for slices that were not kept.
    pub fn slice(&self, n: usize) -> Option<&[T]> {
        self.slices.get(n).and_then(|s| s.as_deref())
    }

    pub fn initial(&self) -> &[T] {
        self.slice(0).expect("t = 0 slice is always kept")
    }

    pub fn terminal(&self) -> &[T] {
        self.slice(self.grid.n).expect("terminal slice is always kept")
    }

    /// Central-difference `dV/dS = v_x / S` at every node of slice `n`
    /// (one-sided at the boundaries).
    pub fn delta_slice(&self, n: usize) -> Option<Vec<T>> {
        let v = self.slice(n)?;
        let dx = self.grid.dx();
        let m = self.grid.m;
        Some(
            (0..=m)
                .map(|i| {
                    let g = if i == 0 {
                        (v[1] - v[0]) / dx
                    } else if i == m {
                        (v[m] - v[m - 1]) / dx
                    } else {
                        (v[i + 1] - v[i - 1]) / (T::lit(2.0) * dx)
                    };
                    g / self.grid.x(i).exp()
                })
                .collect(),
        )
    }

    fn locate(&self, s: T) -> Result<(usize, T)> {
        let x = s.ln();
        let g = &self.grid;
        if !(x >= g.x_min && x <= g.x_max) {
            return domain(format!("spot {s} outside the finite-difference domain"));
        }
        let pos = (x - g.x_min) / g.dx();
        let i = pos.floor().to_usize().unwrap_or(0).min(g.m - 1).max(1).min(g.m - 2);
        Ok((i, pos - T::lit(i as f64)))
    }

    /// `V(0, s)` by linear interpolation in `x`.
    pub fn price_at(&self, s: T) -> Result<T> {
        let v = self.initial();
        let (i, w) = self.locate(s)?;
        Ok(v[i] + w * (v[i + 1] - v[i]))
    }

    /// `dV/dS(0, s)`: central differences in `x` at the neighbouring nodes,
    /// linearly interpolated and divided by `s`.
    pub fn delta_at(&self, s: T) -> Result<T> {
        let v = self.initial();
        let (i, w) = self.locate(s)?;
        let two_dx = T::lit(2.0) * self.grid.dx();
        let g0 = (v[i + 1] - v[i - 1]) / two_dx;
        let g1 = (v[i + 2] - v[i]) / two_dx;
        Ok((g0 + w * (g1 - g0)) / s)
    }
}

/// IM term of the equation: endogenous `|v_x|` or an exogenous hedge.
enum ImTerm<'a, T> {
    Nonlinear,
    /// `Z^BS(t, s)`, evaluated at `t_{n+1}` like the explicit nonlinear term.
    Exogenous(&'a (dyn Fn(T, T) -> T + Sync)),
}

fn boundary_values<T: Real>(
    payoff: &Payoff<T>,
    market: &MarketParams<T>,
    im: &ImParams<T>,
    grid: &FdGrid<T>,
    t: T,
) -> Result<(T, T)> {
    let tau = grid.maturity - t;
    let df = (-market.r() * tau).exp();
    let s_lo = grid.x_min.exp();
    let s_hi = grid.x_max.exp();
    let sigma = market.vol();
    let carry = |kind| -> Result<T> {
        let curve = DividendCurve::for_option(kind, *im, sigma, grid.maturity)?;
        Ok((-dividend_integral(&curve, t, grid.maturity)?).exp())
    };
    let k = payoff.strike();
    Ok(match payoff.kind() {
        PayoffKind::Call => (
            payoff.value_1d(s_lo) * df,
            s_hi * carry(OptionKind::Call)? - k * df,
        ),
        PayoffKind::Put => (k * df - s_lo * carry(OptionKind::Put)?, T::zero()),
        PayoffKind::Butterfly => (T::zero(), T::zero()),
        PayoffKind::BasketCall => {
            return Err(Error::UnsupportedPayoff(
                "finite differences are one-dimensional".into(),
            ))
        }
    })
}

fn solve<T: Real>(
    market: &MarketParams<T>,
    im: &ImParams<T>,
    payoff: &Payoff<T>,
    grid: &FdGrid<T>,
    term: ImTerm<'_, T>,
) -> Result<FdSolution<T>> {
    if market.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: market.dim(),
        });
    }
    if payoff.kind() == PayoffKind::BasketCall {
        return Err(Error::UnsupportedPayoff(
            "finite differences are one-dimensional".into(),
        ));
    }
    if grid.m < 4 || grid.n < 2 {
        return Err(Error::GridTooCoarse(format!(
            "need M >= 4 and N >= 2, got M={}, N={}",
            grid.m, grid.n
        )));
    }
    let m = grid.m;
    let c = grid.coeffs(market, im);
    let (theta, kappa, rho, w) = (c.theta, c.kappa, c.rho, grid.omega);
    let one = T::one();
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let wl = one - w;

    // implicit-side stencil weights: a_{i,i-1}, a_{i,i}, a_{i,i+1}
    let (lo, di, up) = match grid.stencil {
        Stencil::Forward => (
            -theta * w,
            one + two * theta * w + kappa * w + rho * w,
            -theta * w - kappa * w,
        ),
        Stencil::Central => (
            -theta * w + half * kappa * w,
            one + two * theta * w + rho * w,
            -theta * w - half * kappa * w,
        ),
    };
    // explicit-side weights on v^{n+1}
    let (elo, edi, eup) = match grid.stencil {
        Stencil::Forward => (
            theta * wl,
            one - two * theta * wl - kappa * wl - rho * wl,
            theta * wl + kappa * wl,
        ),
        Stencil::Central => (
            (theta - half * kappa) * wl,
            one - two * theta * wl - rho * wl,
            (theta + half * kappa) * wl,
        ),
    };

    let mut lower = vec![lo; m + 1];
    let mut diag = vec![di; m + 1];
    let mut upper = vec![up; m + 1];
    lower[0] = T::zero();
    diag[0] = one;
    upper[0] = T::zero();
    lower[m] = T::zero();
    diag[m] = one;
    upper[m] = T::zero();
    let lu = TridiagonalLu::factor(&lower, &diag, &upper)?;

    let xs: Vec<T> = (0..=m).map(|i| grid.x(i)).collect();
    let spots: Vec<T> = xs.iter().map(|x| x.exp()).collect();
    let mut v: Vec<T> = spots.iter().map(|&s| payoff.value_1d(s)).collect();

    let mut slices: Vec<Option<Vec<T>>> = vec![None; grid.n + 1];
    slices[grid.n] = Some(v.clone());
    let mut b = vec![T::zero(); m + 1];
    let dt = grid.dt();
    for n in (0..grid.n).rev() {
        let t = grid.t(n);
        let beta = c.beta(n);
        match term {
            ImTerm::Nonlinear => {
                for i in 1..m {
                    let grad = match grid.stencil {
                        Stencil::Forward => (v[i + 1] - v[i]).abs(),
                        Stencil::Central => half * (v[i + 1] - v[i - 1]).abs(),
                    };
                    b[i] = elo * v[i - 1] + edi * v[i] + eup * v[i + 1] + beta * grad;
                }
            }
            ImTerm::Exogenous(z_bs) => {
                let t_next = grid.t(n + 1);
                let weight = dt * im.intensity(t, grid.maturity);
                for i in 1..m {
                    let src = weight * z_bs(t_next, spots[i]).abs();
                    b[i] = elo * v[i - 1] + edi * v[i] + eup * v[i + 1] + src;
                }
            }
        }
        let (b_lo, b_hi) = boundary_values(payoff, market, im, grid, t)?;
        b[0] = b_lo;
        b[m] = b_hi;
        lu.solve_in_place(&mut b);
        std::mem::swap(&mut v, &mut b);
        if grid.keep_surface || n == 0 {
            slices[n] = Some(v.clone());
        }
    }
    Ok(FdSolution {
        grid: *grid,
        slices,
    })
}

/// Non-linear IM PDE (endogenous delta).
pub fn solve_nl_pde<T: Real>(
    market: &MarketParams<T>,
    im: &ImParams<T>,
    payoff: &Payoff<T>,
    grid: &FdGrid<T>,
) -> Result<FdSolution<T>> {
    solve(market, im, payoff, grid, ImTerm::Nonlinear)
}

/// Linear IM PDE with the exogenous source `R C_alpha sqrt(.) |Z^BS(t, s)|`.
pub fn solve_l_pde<T: Real>(
    market: &MarketParams<T>,
    im: &ImParams<T>,
    payoff: &Payoff<T>,
    grid: &FdGrid<T>,
    source_delta: &(dyn Fn(T, T) -> T + Sync),
) -> Result<FdSolution<T>> {
    solve(market, im, payoff, grid, ImTerm::Exogenous(source_delta))
}

/// Linear IM PDE with the closed-form Black-Scholes hedge of `payoff` as source.
pub fn solve_l_pde_bs<T: Real>(
    market: &MarketParams<T>,
    im: &ImParams<T>,
    payoff: &Payoff<T>,
    grid: &FdGrid<T>,
) -> Result<FdSolution<T>> {
    payoff.vanilla_legs()?;
    let maturity = grid.maturity;
    let source = |t: T, s: T| {
        bs_delta_superposition(payoff, s, t, maturity, market).unwrap_or(T::zero())
    };
    solve_l_pde(market, im, payoff, grid, &source)
}
