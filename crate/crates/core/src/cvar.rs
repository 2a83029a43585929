//! Empirical CVaR through the Rockafellar-Uryasev representation
//! `CVaR_alpha(L) = min_x { x + E[(L - x)^+] / (1 - alpha) }`.

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvarResult<T = f64> {
    pub cvar: T,
    /// Smallest minimiser of the objective (an alpha-quantile of the sample).
    pub minimizer_x: T,
}

fn check_alpha<T: Real>(alpha: T) -> Result<()> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    Ok(())
}

/// The Rockafellar-Uryasev objective at `x`.
pub fn ru_objective<T: Real>(sample: &[T], alpha: T, x: T) -> T {
    let n = T::lit(sample.len() as f64);
    let excess = sample
        .iter()
        .fold(T::zero(), |acc, &l| acc + (l - x).max(T::zero()));
    x + excess / ((T::one() - alpha) * n)
}

/// Exact minimisation over the order statistics. The objective is convex and
/// piecewise linear with kinks at the sample points; its right slope at `x` is
/// `1 - #{L_i > x} / ((1 - alpha) n)`, so the smallest minimiser is the
/// smallest sample point with `#{L_i > x} <= (1 - alpha) n`.
pub fn empirical_cvar<T: Real>(sample: &[T], alpha: T) -> Result<CvarResult<T>> {
    if sample.is_empty() {
        return domain("empty sample");
    }
    check_alpha(alpha)?;
    if sample.iter().any(|x| !x.is_finite()) {
        return domain("sample contains non-finite values");
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let n = sorted.len();
    let tail_mass = (T::one() - alpha) * T::lit(n as f64);
    // (1 - alpha) n is often an integer up to rounding
    let tail_cut = tail_mass * (T::one() + T::lit(8.0) * T::epsilon());

    // suffix[j] = sum of sorted[j..]
    let mut suffix = vec![T::zero(); n + 1];
    for j in (0..n).rev() {
        suffix[j] = suffix[j + 1] + sorted[j];
    }

    let mut j = 0;
    let star = loop {
        let mut last = j;
        while last + 1 < n && sorted[last + 1] == sorted[j] {
            last += 1;
        }
        let above = n - last - 1;
        if T::lit(above as f64) <= tail_cut || last + 1 == n {
            break j;
        }
        j = last + 1;
    };
    let x = sorted[star];
    let mut first_above = star;
    while first_above < n && sorted[first_above] <= x {
        first_above += 1;
    }
    let above = T::lit((n - first_above) as f64);
    let excess = suffix[first_above] - above * x;
    Ok(CvarResult {
        cvar: x + excess / tail_mass,
        minimizer_x: x,
    })
}

/// `|CVaR(A) - CVaR(B)| - mean|A_i - B_i| / (1 - alpha)`; never positive,
/// since `(.)^+` is 1-Lipschitz.
pub fn cvar_lipschitz_gap<T: Real>(sample_a: &[T], sample_b: &[T], alpha: T) -> Result<T> {
    if sample_a.len() != sample_b.len() {
        return Err(Error::DimensionMismatch {
            expected: sample_a.len(),
            got: sample_b.len(),
        });
    }
    let a = empirical_cvar(sample_a, alpha)?;
    let b = empirical_cvar(sample_b, alpha)?;
    let n = T::lit(sample_a.len() as f64);
    let l1 = sample_a
        .iter()
        .zip(sample_b)
        .fold(T::zero(), |acc, (&x, &y)| acc + (x - y).abs())
        / n;
    Ok((a.cvar - b.cvar).abs() - l1 / (T::one() - alpha))
}
