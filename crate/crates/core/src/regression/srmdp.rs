//! Stratified regression multistep-forward dynamic programming.
//!
//! The state is the driving Brownian motion `W`, so that
//! `S_t = S_0 exp((mu - diag(Sigma)/2) t + sigma W_t)`. At step `i` every
//! hypercube of the box receives fresh starting points, uniform in the cube,
//! whose paths run forward to `T`. The regression target accumulates the
//! terminal value and the driver along the path with the already fitted
//! `y_j`, `z_j` for `j > i`:
//!
//! `tail = xi + sum_{j > i} f(t_j, y_{j+1}(X_{j+1}), z_j(X_j)) dt`.
//!
//! `z_i` regresses `(tail - E[tail | X_i]) dW_i / dt`; `y_i` regresses
//! `tail + f(t_i, y, z_i) dt`, first with `y = y_{i+1}(X_{i+1})` and then once
//! more with `y = y_i(X_i)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::SquareMatrix;
use crate::payoff::Payoff;
use crate::regression::driver::{Driver, DriverKind};
use crate::regression::strat::{Basis, CubeGrid, LocalFn, Stratification, ROOT_BATCHES};
use crate::rng::{GaussianSource, RngStream};
use crate::stats::{batch_mean_stats, McEstimate};

/// Time-zero value and hedge.
#[derive(Debug, Clone, PartialEq)]
pub struct BsdeSolution {
    pub v0: McEstimate,
    /// `Z_0 A_0`, the spot gradient; equals `Z_0 / (sigma S_0)` when `d = 1`.
    pub z0: Vec<McEstimate>,
}

struct Step {
    y: LocalFn,
    z: LocalFn,
}

struct Model<'a> {
    driver: &'a Driver,
    payoff: &'a Payoff,
    grid: CubeGrid,
    d: usize,
    dt: f64,
    n_steps: usize,
    log_s0: Vec<f64>,
    /// `mu^k - Sigma_kk / 2`.
    drift: Vec<f64>,
    /// `int_{t_j}^{t_{j+1}} R C_alpha sqrt((s + Delta) ^ T - s) ds`.
    im_weights: Vec<f64>,
    uses_spot: bool,
}

/// Scratch buffers of one worker.
struct Work {
    x: Vec<f64>,
    s: Vec<f64>,
    /// Spot at the left end of the current step.
    s_left: Vec<f64>,
    dw: Vec<f64>,
    z: Vec<f64>,
    phi: Vec<f64>,
    cube: usize,
    /// Normals of the current path, drawn in one batch.
    normals: Vec<f64>,
}

impl Work {
    fn new(d: usize) -> Self {
        Self {
            x: vec![0.0; d],
            s: vec![0.0; d],
            s_left: vec![0.0; d],
            dw: vec![0.0; d],
            z: vec![0.0; d],
            phi: vec![0.0; d + 1],
            cube: 0,
            normals: Vec::new(),
        }
    }
}

/// One simulated start point with its regression responses.
struct Sample {
    tail: f64,
    y_next: f64,
}

impl Model<'_> {
    fn t(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    fn spot(&self, j: usize, x: &[f64], out: &mut [f64]) {
        let sigma = self.driver.market().sigma();
        let t = self.t(j);
        for k in 0..self.d {
            let shock: f64 = sigma.row(k).iter().zip(x).map(|(a, b)| a * b).sum();
            out[k] = (self.log_s0[k] + self.drift[k] * t + shock).exp();
        }
    }

    /// `xi(X_N)` at `j = N`, else the fitted `y_j(x)`. Leaves the cube of
    /// `w.x` in `w.cube` and its basis values in `w.phi`.
    #[inline]
    fn value(&self, j: usize, steps: &[Option<Step>], basis: Basis, w: &mut Work) -> f64 {
        if j == self.n_steps {
            self.spot(j, &w.x, &mut w.s);
            self.driver.terminal(self.payoff, &w.s)
        } else {
            let step = steps[j].as_ref().expect("later steps are fitted");
            w.cube = self.grid.locate(&w.x);
            self.grid.basis(basis, w.cube, &w.x, &mut w.phi);
            step.y.eval1_at(w.cube, &w.phi)
        }
    }

    /// Moves `w.x` from `X_start` to `X_N`, leaving `dW_start` in `w.dw`.
    fn run_path(
        &self,
        start: usize,
        steps: &[Option<Step>],
        basis: Basis,
        gen: &mut GaussianSource,
        w: &mut Work,
    ) -> Sample {
        let root = self.dt.sqrt();
        let d = self.d;
        w.normals.resize((self.n_steps - start) * d, 0.0);
        gen.fill_gaussian(&mut w.normals);
        for k in 0..d {
            w.dw[k] = root * w.normals[k];
            w.x[k] += w.dw[k];
        }
        let y_next = self.value(start + 1, steps, basis, w);
        let mut tail = if start + 1 == self.n_steps { y_next } else { 0.0 };
        for j in start + 1..self.n_steps {
            let step = steps[j].as_ref().expect("later steps are fitted");
            step.z.eval_at(w.cube, &w.phi, &mut w.z);
            if self.uses_spot {
                self.spot(j, &w.x, &mut w.s_left);
            }
            let g = &w.normals[(j - start) * d..(j - start + 1) * d];
            for k in 0..d {
                w.x[k] += root * g[k];
            }
            let y1 = self.value(j + 1, steps, basis, w);
            tail += self
                .driver
                .increment(self.t(j), self.dt, self.im_weights[j], &w.s_left, y1, &w.z);
            if j + 1 == self.n_steps {
                tail += y1;
            }
        }
        Sample { tail, y_next }
    }

    /// Fits `y_i`, `z_i` on cube `c`; returns `(y coeffs, z coeffs)`.
    fn fit_cube(
        &self,
        i: usize,
        c: usize,
        n_sims: usize,
        basis: Basis,
        steps: &[Option<Step>],
        rng: RngStream,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = self.d;
        let p = basis.size(d);
        if n_sims < p {
            return Err(Error::SingularCube { cube: c, step: i });
        }
        let mut gen = rng.substream((i * self.grid.len() + c) as u64).generator();
        let mut w = Work::new(d);
        let mut corner = vec![0.0; d];
        self.grid.corner(c, &mut corner);

        let mut phis = Vec::with_capacity(n_sims * p);
        let mut dws = Vec::with_capacity(n_sims * d);
        let mut spots = Vec::with_capacity(if self.uses_spot { n_sims * d } else { 0 });
        let mut samples = Vec::with_capacity(n_sims);
        for _ in 0..n_sims {
            for k in 0..d {
                w.x[k] = corner[k] + self.grid.width(k) * gen.uniform();
            }
            self.grid.basis(basis, c, &w.x, &mut w.phi);
            phis.extend_from_slice(&w.phi[..p]);
            if self.uses_spot {
                self.spot(i, &w.x, &mut w.s);
                spots.extend_from_slice(&w.s);
            }
            samples.push(self.run_path(i, steps, basis, &mut gen, &mut w));
            dws.extend_from_slice(&w.dw);
        }
        let mut gram = vec![0.0; p * p];
        for row in phis.chunks(p) {
            for a in 0..p {
                for b in 0..p {
                    gram[a * p + b] += row[a] * row[b];
                }
            }
        }
        let inv = SquareMatrix::from_fn(p, |a, b| gram[a * p + b])
            .inverse()
            .ok_or(Error::SingularCube { cube: c, step: i })?;
        let project = |resp: &dyn Fn(usize) -> f64| -> Vec<f64> {
            let mut rhs = vec![0.0; p];
            for (n, row) in phis.chunks(p).enumerate() {
                let r = resp(n);
                for a in 0..p {
                    rhs[a] += row[a] * r;
                }
            }
            inv.mul_vec(&rhs)
        };
        let dot = |coef: &[f64], n: usize| -> f64 {
            coef.iter()
                .zip(&phis[n * p..(n + 1) * p])
                .map(|(a, b)| a * b)
                .sum()
        };

        let mean_tail = project(&|n| samples[n].tail);
        let mut z_coef = Vec::with_capacity(d * p);
        for k in 0..d {
            let ck = project(&|n| (samples[n].tail - dot(&mean_tail, n)) * dws[n * d + k] / self.dt);
            z_coef.extend(ck);
        }
        let z_vals: Vec<f64> = (0..n_sims)
            .flat_map(|n| (0..d).map(move |k| (n, k)))
            .map(|(n, k)| dot(&z_coef[k * p..(k + 1) * p], n))
            .collect();
        let z_at = |n: usize| &z_vals[n * d..(n + 1) * d];
        let s_at = |n: usize| -> &[f64] {
            if self.uses_spot {
                &spots[n * d..(n + 1) * d]
            } else {
                &[]
            }
        };
        let (t_i, imw) = (self.t(i), self.im_weights[i]);
        let y0 = project(&|n| {
            samples[n].tail
                + self
                    .driver
                    .increment(t_i, self.dt, imw, s_at(n), samples[n].y_next, z_at(n))
        });
        let y1 = project(&|n| {
            samples[n].tail
                + self
                    .driver
                    .increment(t_i, self.dt, imw, s_at(n), dot(&y0, n), z_at(n))
        });
        Ok((y1, z_coef))
    }

    /// Value and hedge at `(0, W = 0)` from one root batch.
    fn root_batch(
        &self,
        steps: &[Option<Step>],
        basis: Basis,
        n_sims: usize,
        rng: RngStream,
    ) -> (f64, Vec<f64>) {
        let d = self.d;
        let mut gen = rng.generator();
        let mut w = Work::new(d);
        let mut samples = Vec::with_capacity(n_sims);
        let mut dws = Vec::with_capacity(n_sims * d);
        for _ in 0..n_sims {
            w.x.iter_mut().for_each(|x| *x = 0.0);
            samples.push(self.run_path(0, steps, basis, &mut gen, &mut w));
            dws.extend_from_slice(&w.dw);
        }
        let n = n_sims as f64;
        let mean_tail = samples.iter().map(|s| s.tail).sum::<f64>() / n;
        let z: Vec<f64> = (0..d)
            .map(|k| {
                samples
                    .iter()
                    .enumerate()
                    .map(|(m, s)| (s.tail - mean_tail) * dws[m * d + k])
                    .sum::<f64>()
                    / (n * self.dt)
            })
            .collect();
        let mut s0 = vec![0.0; d];
        self.spot(0, &vec![0.0; d], &mut s0);
        let (imw, dt) = (self.im_weights[0], self.dt);
        let y0 = samples
            .iter()
            .map(|s| s.tail + self.driver.increment(0.0, dt, imw, &s0, s.y_next, &z))
            .sum::<f64>()
            / n;
        let y = mean_tail + self.driver.increment(0.0, dt, imw, &s0, y0, &z);
        (y, z)
    }
}

/// Solves the BSDE of `driver` with terminal value `payoff` at `(0, S_0)`.
///
/// Confidence intervals come from [`ROOT_BATCHES`] independent root samples of
/// `n_sims_per_cube` paths each, started at `S_0`.
pub fn srmdp_solve(
    driver: &Driver,
    payoff: &Payoff,
    strat: &Stratification,
    rng: RngStream,
) -> Result<BsdeSolution> {
    let d = driver.dim();
    if payoff.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: payoff.dim(),
        });
    }
    if strat.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: strat.dim(),
        });
    }
    let grid = strat.grid()?;
    let market = driver.market();
    let n_steps = strat.n_time_steps;
    let dt = driver.maturity() / n_steps as f64;
    let cov = market.covariance();
    let im_weights = (0..n_steps)
        .map(|j| driver.im_weight(j as f64 * dt, (j + 1) as f64 * dt))
        .collect::<Result<Vec<_>>>()?;
    let model = Model {
        driver,
        payoff,
        d,
        dt,
        n_steps,
        log_s0: market.s0().iter().map(|s| s.ln()).collect(),
        drift: (0..d).map(|k| market.mu()[k] - 0.5 * cov[(k, k)]).collect(),
        im_weights,
        uses_spot: driver.kind() == DriverKind::Df,
        grid,
    };

    let n_cubes = model.grid.len();
    let mut steps: Vec<Option<Step>> = (0..=n_steps).map(|_| None).collect();
    for i in (1..n_steps).rev() {
        let fitted: Vec<(Vec<f64>, Vec<f64>)> = (0..n_cubes)
            .into_par_iter()
            .map(|c| model.fit_cube(i, c, strat.n_sims_per_cube, strat.basis, &steps, rng))
            .collect::<Result<_>>()?;
        let (ys, zs): (Vec<_>, Vec<_>) = fitted.into_iter().unzip();
        steps[i] = Some(Step {
            y: LocalFn::new(strat.basis, d, 1, ys),
            z: LocalFn::new(strat.basis, d, d, zs),
        });
    }

    let root_base = (n_steps * n_cubes) as u64;
    let batches: Vec<(f64, Vec<f64>)> = (0..ROOT_BATCHES)
        .into_par_iter()
        .map(|b| model.root_batch(&steps, strat.basis, strat.n_sims_per_cube, rng.substream(root_base + b as u64)))
        .collect();

    let n_root = ROOT_BATCHES * strat.n_sims_per_cube;
    let summarize = |xs: &[f64]| {
        let (mean, se) = batch_mean_stats(xs);
        McEstimate::new(mean, se, n_root, 1, rng.seed)
    };
    let v0 = summarize(&batches.iter().map(|b| b.0).collect::<Vec<_>>());
    let a0 = market.delta_normalizer();
    let grads: Vec<Vec<f64>> = batches.iter().map(|b| a0.vec_mul(&b.1)).collect();
    let z0 = (0..d)
        .map(|k| summarize(&grads.iter().map(|g| g[k]).collect::<Vec<_>>()))
        .collect();
    Ok(BsdeSolution { v0, z0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{bs_price_delta, OptionKind};
    use crate::market::{ImParams, MarketParams};

    fn setup() -> (MarketParams, ImParams, Payoff) {
        (
            MarketParams::single(20.0, 0.02, 0.25).unwrap(),
            ImParams::new(0.02, 0.99, 0.02).unwrap(),
            Payoff::call(20.0).unwrap(),
        )
    }

    fn small() -> Stratification {
        Stratification::new(1, 40, Basis::Lp0, 200, 10).unwrap()
    }

    #[test]
    fn bs_driver_matches_closed_form() {
        let (m, _, call) = setup();
        let sol = srmdp_solve(&Driver::bs(&m, 1.0).unwrap(), &call, &small(), RngStream::new(3, 0)).unwrap();
        let q = bs_price_delta(20.0, 20.0, 0.02, 0.25, 1.0, OptionKind::Call).unwrap();
        assert!((sol.v0.value - q.price).abs() < 4.0 * sol.v0.std_error, "{:?} {}", sol.v0, q.price);
        assert!((sol.z0[0].value - q.delta).abs() < 4.0 * sol.z0[0].std_error + 0.03);
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let (m, im, call) = setup();
        let driver = Driver::nl(&m, &im, 1.0).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| srmdp_solve(&driver, &call, &small(), RngStream::new(9, 2)).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn difference_driver_tracks_nl_minus_bs() {
        let (m, im, call) = setup();
        let strat = Stratification::desk_lp0();
        let rng = RngStream::new(5, 0);
        let nl = srmdp_solve(&Driver::nl(&m, &im, 1.0).unwrap(), &call, &strat, rng).unwrap();
        let df = srmdp_solve(&Driver::df(&m, &im, 1.0, &call).unwrap(), &call, &strat, rng).unwrap();
        let bs = bs_price_delta(20.0, 20.0, 0.02, 0.25, 1.0, OptionKind::Call).unwrap();
        let se = nl.v0.std_error.hypot(df.v0.std_error);
        assert!((nl.v0.value - df.v0.value - bs.price).abs() < 3.0 * se, "{:?} {:?}", nl.v0, df.v0);
        assert!(df.v0.std_error.powi(2) * 10.0 < nl.v0.std_error.powi(2));
    }

    #[test]
    fn nl_dominates_bs_for_calls() {
        let (m, im, call) = setup();
        let strat = small();
        let rng = RngStream::new(8, 0);
        let nl = srmdp_solve(&Driver::nl(&m, &im, 1.0).unwrap(), &call, &strat, rng).unwrap();
        let bs = srmdp_solve(&Driver::bs(&m, 1.0).unwrap(), &call, &strat, rng).unwrap();
        assert!(nl.v0.value >= bs.v0.value - 3.0 * nl.v0.std_error);
    }

    #[test]
    fn linear_error_shrinks_at_mc_rate() {
        let (m, _, call) = setup();
        let bs = Driver::bs(&m, 1.0).unwrap();
        let se = |sims| {
            let strat = Stratification::new(1, 40, Basis::Lp0, sims, 10).unwrap();
            srmdp_solve(&bs, &call, &strat, RngStream::new(4, 0)).unwrap().v0.std_error
        };
        let ratio = se(200) / se(800);
        assert!((1.4..=2.6).contains(&ratio), "{ratio}");
    }

    #[test]
    fn underdetermined_cube_is_an_error() {
        let m = MarketParams::from_correlation(
            0.02,
            &crate::market::CorrelationSpec::new(0.25, 0.75, 2).unwrap(),
            vec![1.0, 1.0],
        )
        .unwrap();
        let basket = Payoff::equal_basket(1.0, 2).unwrap();
        let strat = Stratification::new(2, 4, Basis::Lp1, 2, 2).unwrap();
        let err = srmdp_solve(&Driver::bs(&m, 1.0).unwrap(), &basket, &strat, RngStream::new(0, 0));
        assert!(matches!(err, Err(Error::SingularCube { .. })));
    }

    #[test]
    fn dimension_checks() {
        let (m, im, _) = setup();
        let basket = Payoff::equal_basket(20.0, 2).unwrap();
        let driver = Driver::nl(&m, &im, 1.0).unwrap();
        assert!(srmdp_solve(&driver, &basket, &small(), RngStream::new(0, 0)).is_err());
        let strat = Stratification::basket_lp1(2).unwrap();
        let call = Payoff::call(20.0).unwrap();
        assert!(srmdp_solve(&driver, &call, &strat, RngStream::new(0, 0)).is_err());
    }
}
