//! Exact log-Euler simulation of correlated geometric Brownian motion.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::market::MarketParams;
use crate::rng::RngStream;

/// Paths per RNG block. Block `b` always draws from `rng.substream(b)`.
pub const PATH_BLOCK: usize = 256;

/// Simulated prices, laid out `[path][time][asset]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathArray {
    n_paths: usize,
    n_times: usize,
    dim: usize,
    data: Vec<f64>,
}

impl PathArray {
    pub fn n_paths(&self) -> usize {
        self.n_paths
    }
    pub fn n_times(&self) -> usize {
        self.n_times
    }
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, path: usize, time: usize, asset: usize) -> f64 {
        self.data[(path * self.n_times + time) * self.dim + asset]
    }

    /// Prices of one path at one time index.
    pub fn state(&self, path: usize, time: usize) -> &[f64] {
        let start = (path * self.n_times + time) * self.dim;
        &self.data[start..start + self.dim]
    }
}

/// Simulates `n_paths` paths of `dS^i/S^i = mu^i dt + sum_j sigma^{ij} dW^j`
/// on `times` (strictly increasing, starting at 0).
pub fn simulate_gbm_paths(
    market: &MarketParams,
    times: &[f64],
    rng: RngStream,
    n_paths: usize,
) -> Result<PathArray> {
    if times.is_empty() || times[0] != 0.0 {
        return domain("time grid must start at 0");
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return domain("time grid must be strictly increasing");
    }
    let d = market.dim();
    let n_times = times.len();
    let sigma = market.sigma();
    let cov = market.covariance();
    let drift: Vec<f64> = (0..d)
        .map(|i| market.mu()[i] - 0.5 * cov[(i, i)])
        .collect();
    let s0 = market.s0();
    let stride = n_times * d;

    let mut data = vec![0.0; n_paths * stride];
    data.par_chunks_mut(PATH_BLOCK * stride)
        .enumerate()
        .for_each(|(block, chunk)| {
            let mut gen = rng.substream(block as u64).generator();
            let mut z = vec![0.0; d];
            let mut log_s = vec![0.0; d];
            for path in chunk.chunks_mut(stride) {
                for i in 0..d {
                    log_s[i] = s0[i].ln();
                    path[i] = s0[i];
                }
                for k in 1..n_times {
                    let dt = times[k] - times[k - 1];
                    let sq = dt.sqrt();
                    gen.fill_gaussian(&mut z);
                    for i in 0..d {
                        let shock: f64 = sigma.row(i).iter().zip(&z).map(|(a, b)| a * b).sum();
                        log_s[i] += drift[i] * dt + shock * sq;
                        path[k * d + i] = log_s[i].exp();
                    }
                }
            }
        });
    Ok(PathArray {
        n_paths,
        n_times,
        dim: d,
        data,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SquareMatrix;

    #[test]
    fn deterministic_limit() {
        let m = MarketParams::new(
            0.03,
            vec![0.03],
            SquareMatrix::from_fn(1, |_, _| 1e-300),
            vec![20.0],
        )
        .unwrap();
        let times = [0.0, 0.25, 0.5, 1.0];
        let p = simulate_gbm_paths(&m, &times, RngStream::new(1, 0), 10).unwrap();
        for path in 0..10 {
            for (k, &t) in times.iter().enumerate() {
                let want = 20.0 * (0.03 * t).exp();
                assert!((p.get(path, k, 0) - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bad_grids_rejected() {
        let m = MarketParams::single(20.0, 0.02, 0.25).unwrap();
        assert!(simulate_gbm_paths(&m, &[0.1, 0.2], RngStream::new(1, 0), 4).is_err());
        assert!(simulate_gbm_paths(&m, &[0.0, 0.2, 0.2], RngStream::new(1, 0), 4).is_err());
    }

    #[test]
    fn thread_count_invariance() {
        let m = MarketParams::single(20.0, 0.02, 0.25).unwrap();
        let times = [0.0, 0.5, 1.0];
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_gbm_paths(&m, &times, RngStream::new(9, 2), 3000).unwrap())
        };
        assert_eq!(run(1), run(3));
    }
}
