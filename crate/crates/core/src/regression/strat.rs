use crate::error::{domain, Result};

/// Local regression basis on each hypercube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    /// Piecewise constant.
    Lp0,
    /// Piecewise affine in `(x - centre) / half_width`.
    Lp1,
}

impl Basis {
    pub fn size(self, d: usize) -> usize {
        match self {
            Basis::Lp0 => 1,
            Basis::Lp1 => d + 1,
        }
    }
}

/// Number of root batches used for the time-zero confidence interval.
pub const ROOT_BATCHES: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Stratification {
    /// Box for the driving Brownian motion, one interval per dimension.
    pub domain: Vec<(f64, f64)>,
    pub n_cubes: usize,
    pub basis: Basis,
    pub n_sims_per_cube: usize,
    pub n_time_steps: usize,
}

impl Stratification {
    pub fn new(
        d: usize,
        n_cubes: usize,
        basis: Basis,
        n_sims_per_cube: usize,
        n_time_steps: usize,
    ) -> Result<Self> {
        if d == 0 {
            return domain("dimension must be positive");
        }
        if n_cubes == 0 || n_time_steps == 0 || n_sims_per_cube == 0 {
            return domain("cube, step and simulation counts must be positive");
        }
        Ok(Self {
            domain: vec![(-5.0, 5.0); d],
            n_cubes,
            basis,
            n_sims_per_cube,
            n_time_steps,
        })
    }

    /// 2800 cubes, 50 steps, 2500 simulations per cube, LP0.
    pub fn full_lp0() -> Self {
        Self::new(1, 2800, Basis::Lp0, 2500, 50).expect("valid preset")
    }

    /// 280 cubes, 25 steps, 500 simulations per cube, LP0.
    pub fn desk_lp0() -> Self {
        Self::new(1, 280, Basis::Lp0, 500, 25).expect("valid preset")
    }

    /// LP1 basket settings with 5 time steps for `2 <= d <= 5`.
    pub fn basket_lp1(d: usize) -> Result<Self> {
        let (cubes, sims) = match d {
            2 => (500, 1000),
            3 => (200, 1500),
            4 => (50, 2000),
            5 => (20, 2500),
            _ => return domain(format!("basket preset defined for 2 <= d <= 5, got {d}")),
        };
        Self::new(d, cubes, Basis::Lp1, sims, 5)
    }

    pub fn dim(&self) -> usize {
        self.domain.len()
    }

    pub(crate) fn grid(&self) -> Result<CubeGrid> {
        if self
            .domain
            .iter()
            .any(|&(a, b)| !(a.is_finite() && b.is_finite() && a < b))
        {
            return domain("stratification domain must be a nonempty box");
        }
        Ok(CubeGrid::new(&self.domain, per_dim_counts(self.n_cubes, self.dim())))
    }
}

/// Balanced per-dimension counts whose product is the largest one not above
/// `n` among near-equal splits.
pub fn per_dim_counts(n: usize, d: usize) -> Vec<usize> {
    let mut base = (n as f64).powf(1.0 / d as f64).floor().max(1.0) as usize;
    while base.pow(d as u32) > n && base > 1 {
        base -= 1;
    }
    while (base + 1).pow(d as u32) <= n {
        base += 1;
    }
    let mut counts = vec![base; d];
    for k in 0..d {
        let product: usize = counts.iter().product();
        if product / counts[k] * (counts[k] + 1) <= n {
            counts[k] += 1;
        }
    }
    counts
}

/// Uniform product partition of a box.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CubeGrid {
    lo: Vec<f64>,
    hi: Vec<f64>,
    width: Vec<f64>,
    inv_width: Vec<f64>,
    counts: Vec<usize>,
}

impl CubeGrid {
    fn new(domain: &[(f64, f64)], counts: Vec<usize>) -> Self {
        let lo: Vec<f64> = domain.iter().map(|d| d.0).collect();
        let hi: Vec<f64> = domain.iter().map(|d| d.1).collect();
        let width: Vec<f64> = domain
            .iter()
            .zip(&counts)
            .map(|(&(a, b), &n)| (b - a) / n as f64)
            .collect();
        Self {
            lo,
            hi,
            inv_width: width.iter().map(|w| 1.0 / w).collect(),
            width,
            counts,
        }
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    /// Cube containing `x`, after clamping to the box.
    #[inline]
    pub fn locate(&self, x: &[f64]) -> usize {
        let mut idx = 0;
        for k in (0..self.dim()).rev() {
            let pos = (x[k] - self.lo[k]) * self.inv_width[k];
            // truncation is floor on the clamped, nonnegative range
            let i = if pos > 0.0 {
                (pos as usize).min(self.counts[k] - 1)
            } else {
                0
            };
            idx = idx * self.counts[k] + i;
        }
        idx
    }

    /// Lower corner of cube `c`.
    pub fn corner(&self, mut c: usize, out: &mut [f64]) {
        for k in 0..self.dim() {
            let i = c % self.counts[k];
            c /= self.counts[k];
            out[k] = self.lo[k] + i as f64 * self.width[k];
        }
    }

    pub fn width(&self, k: usize) -> f64 {
        self.width[k]
    }

    /// Basis functions of `x` relative to cube `c`.
    #[inline]
    pub fn basis(&self, basis: Basis, c: usize, x: &[f64], out: &mut [f64]) {
        out[0] = 1.0;
        if basis == Basis::Lp1 {
            let mut rest = c;
            for k in 0..self.dim() {
                let i = rest % self.counts[k];
                rest /= self.counts[k];
                let half = 0.5 * self.width[k];
                let centre = self.lo[k] + (i as f64 + 0.5) * self.width[k];
                let xk = x[k].clamp(self.lo[k], self.hi[k]);
                out[k + 1] = (xk - centre) / half;
            }
        }
    }
}

/// Piecewise polynomial: `n_out` outputs, `p` coefficients each, per cube.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LocalFn {
    basis: Basis,
    p: usize,
    n_out: usize,
    coeffs: Vec<f64>,
}

impl LocalFn {
    pub fn new(basis: Basis, d: usize, n_out: usize, per_cube: Vec<Vec<f64>>) -> Self {
        let p = basis.size(d);
        debug_assert!(per_cube.iter().all(|c| c.len() == p * n_out));
        Self {
            basis,
            p,
            n_out,
            coeffs: per_cube.concat(),
        }
    }

    /// Evaluates every output in cube `c` with basis values `phi`.
    #[inline]
    pub fn eval_at(&self, c: usize, phi: &[f64], out: &mut [f64]) {
        let width = self.p * self.n_out;
        let block = &self.coeffs[c * width..(c + 1) * width];
        if self.p == 1 {
            out.copy_from_slice(block);
            return;
        }
        for (o, coef) in out.iter_mut().zip(block.chunks_exact(self.p)) {
            *o = coef.iter().zip(phi).map(|(a, b)| a * b).sum();
        }
    }

    #[inline]
    pub fn eval1_at(&self, c: usize, phi: &[f64]) -> f64 {
        let width = self.p * self.n_out;
        let block = &self.coeffs[c * width..c * width + self.p];
        if self.p == 1 {
            return block[0];
        }
        block.iter().zip(phi).map(|(a, b)| a * b).sum()
    }
}
