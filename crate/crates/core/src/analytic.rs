//! Closed-form Black-Scholes prices and deltas, with and without the
//! initial-margin dividend yield, implied volatility and the ATMF skew.
//!
//! When the hedge has a constant sign (calls, puts), the IM cost term acts as
//! a continuous dividend yield `d(t) = -sign(dV/dS) C_alpha R sigma
//! sqrt((t + Delta) ^ T - t)`, so the price is a Black-Scholes price on the
//! adjusted forward `F = S0 exp(rT - int_0^T d)`.

use crate::error::{domain, Result};
use crate::market::ImParams;
use crate::normal::{normal_cdf, normal_pdf};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptionKind {
    Call,
    Put,
}

impl OptionKind {
    /// Sign of the Black-Scholes delta.
    pub fn delta_sign(self) -> i8 {
        match self {
            OptionKind::Call => 1,
            OptionKind::Put => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsQuote<T = f64> {
    pub price: T,
    /// `dprice / dS0`.
    pub delta: T,
}

/// Normalised call `E[(e^{vG - v^2/2} - X)^+]` for moneyness `X = K/F` and
/// total volatility `v = sigma sqrt(T)`.
pub fn normalized_call<T: Real>(moneyness: T, total_vol: T) -> T {
    if moneyness <= T::zero() {
        return T::one() - moneyness;
    }
    let half = T::lit(0.5);
    let d1 = (-moneyness.ln()) / total_vol + half * total_vol;
    let d2 = d1 - total_vol;
    normal_cdf(d1) - moneyness * normal_cdf(d2)
}

/// Normalised put `E[(X - e^{vG - v^2/2})^+]`.
pub fn normalized_put<T: Real>(moneyness: T, total_vol: T) -> T {
    if moneyness <= T::zero() {
        return T::zero();
    }
    let half = T::lit(0.5);
    let d1 = (-moneyness.ln()) / total_vol + half * total_vol;
    let d2 = d1 - total_vol;
    moneyness * normal_cdf(-d2) - normal_cdf(-d1)
}

fn check_inputs<T: Real>(s0: T, strike: T, sigma: T, maturity: T) -> Result<()> {
    if !(s0 > T::zero() && strike > T::zero() && sigma > T::zero() && maturity > T::zero()) {
        return domain(format!(
            "spot, strike, volatility and maturity must be positive \
             (s0={s0}, K={strike}, sigma={sigma}, T={maturity})"
        ));
    }
    Ok(())
}

/// Price and delta with respect to the forward `forward`, discount factor
/// `df` and `dforward/ds0 = fwd_sens`.
fn forward_quote<T: Real>(
    forward: T,
    fwd_sens: T,
    strike: T,
    df: T,
    sigma: T,
    maturity: T,
    kind: OptionKind,
) -> BsQuote<T> {
    let v = sigma * maturity.sqrt();
    let d1 = (forward / strike).ln() / v + T::lit(0.5) * v;
    let d2 = d1 - v;
    match kind {
        OptionKind::Call => BsQuote {
            price: df * (forward * normal_cdf(d1) - strike * normal_cdf(d2)),
            delta: df * fwd_sens * normal_cdf(d1),
        },
        OptionKind::Put => BsQuote {
            price: df * (strike * normal_cdf(-d2) - forward * normal_cdf(-d1)),
            delta: -df * fwd_sens * normal_cdf(-d1),
        },
    }
}

/// Standard Black-Scholes price and delta.
pub fn bs_price_delta<T: Real>(
    s0: T,
    strike: T,
    r: T,
    sigma: T,
    maturity: T,
    kind: OptionKind,
) -> Result<BsQuote<T>> {
    check_inputs(s0, strike, sigma, maturity)?;
    let growth = (r * maturity).exp();
    Ok(forward_quote(
        s0 * growth,
        growth,
        strike,
        growth.recip(),
        sigma,
        maturity,
        kind,
    ))
}

/// Black-Scholes delta for time to maturity `tau >= 0`; at `tau = 0` the
/// payoff slope (one half at the strike).
pub fn bs_delta_tau<T: Real>(s: T, strike: T, r: T, sigma: T, tau: T, kind: OptionKind) -> T {
    if tau <= T::zero() {
        let half = T::lit(0.5);
        let itm = if s > strike {
            T::one()
        } else if s < strike {
            T::zero()
        } else {
            half
        };
        return match kind {
            OptionKind::Call => itm,
            OptionKind::Put => itm - T::one(),
        };
    }
    let v = sigma * tau.sqrt();
    let d1 = ((s / strike).ln() + (r + T::lit(0.5) * sigma * sigma) * tau) / v;
    match kind {
        OptionKind::Call => normal_cdf(d1),
        OptionKind::Put => normal_cdf(d1) - T::one(),
    }
}

/// Time-dependent IM dividend yield
/// `d(t) = sign C_alpha R sigma sqrt((t + Delta) ^ T - t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DividendCurve<T = f64> {
    sign: T,
    im: ImParams<T>,
    sigma: T,
    maturity: T,
}

impl<T: Real> DividendCurve<T> {
    /// `sign` is `-1` for calls, `+1` for puts.
    pub fn new(sign: T, im: ImParams<T>, sigma: T, maturity: T) -> Result<Self> {
        if sign.abs() != T::one() {
            return domain("dividend sign must be +1 or -1");
        }
        if !(sigma > T::zero() && maturity > T::zero()) {
            return domain("volatility and maturity must be positive");
        }
        Ok(Self {
            sign,
            im,
            sigma,
            maturity,
        })
    }

    /// Curve for a claim whose delta has the sign of `kind`.
    pub fn for_option(kind: OptionKind, im: ImParams<T>, sigma: T, maturity: T) -> Result<Self> {
        let sign = match kind {
            OptionKind::Call => -T::one(),
            OptionKind::Put => T::one(),
        };
        Self::new(sign, im, sigma, maturity)
    }

    pub fn maturity(&self) -> T {
        self.maturity
    }

    fn scale(&self) -> T {
        self.sign * self.im.c_alpha() * self.im.spread() * self.sigma
    }

    pub fn rate(&self, t: T) -> T {
        self.scale() * self.im.horizon_root(t, self.maturity)
    }
}

/// `int_{t0}^{t1} d(t) dt` in closed form: `sqrt(Delta)` on `[0, T - Delta]`
/// and `sqrt(T - t)` on the last margin period.
pub fn dividend_integral<T: Real>(curve: &DividendCurve<T>, t0: T, t1: T) -> Result<T> {
    let mat = curve.maturity;
    if !(T::zero() <= t0 && t0 <= t1 && t1 <= mat) {
        return domain(format!("interval [{t0}, {t1}] not inside [0, {mat}]"));
    }
    let delta = curve.im.horizon();
    let switch = (mat - delta).max(T::zero());
    let flat = (t1.min(switch) - t0).max(T::zero()) * delta.sqrt();
    let a0 = t0.max(switch);
    let a1 = t1.max(switch);
    let three_halves = T::lit(1.5);
    let tail = T::lit(2.0 / 3.0) * ((mat - a0).powf(three_halves) - (mat - a1).powf(three_halves));
    Ok(curve.scale() * (flat + tail))
}

/// Black-Scholes price and delta with the IM dividend yield (sign `-1` for
/// calls, `+1` for puts).
pub fn bs_price_delta_with_im<T: Real>(
    s0: T,
    strike: T,
    r: T,
    sigma: T,
    maturity: T,
    kind: OptionKind,
    im: &ImParams<T>,
) -> Result<BsQuote<T>> {
    check_inputs(s0, strike, sigma, maturity)?;
    let curve = DividendCurve::for_option(kind, *im, sigma, maturity)?;
    let carry = dividend_integral(&curve, T::zero(), maturity)?;
    let sens = (r * maturity - carry).exp();
    Ok(forward_quote(
        s0 * sens,
        sens,
        strike,
        (-r * maturity).exp(),
        sigma,
        maturity,
        kind,
    ))
}

/// Forward `F^T(r, d) = S0 exp(rT - int_0^T d)` for the option's IM curve.
pub fn im_forward<T: Real>(
    s0: T,
    r: T,
    sigma: T,
    maturity: T,
    kind: OptionKind,
    im: &ImParams<T>,
) -> Result<T> {
    let curve = DividendCurve::for_option(kind, *im, sigma, maturity)?;
    Ok(s0 * (r * maturity - dividend_integral(&curve, T::zero(), maturity)?).exp())
}

/// Parity defect of IM prices beyond `e^{-rT}(F(d^Call) - K)`:
/// `e^{-rT}[F_c (P_BS(K/F_c) - P_BS(K/F_p)) + P_BS(K/F_p)(F_c - F_p)]`.
pub fn parity_correction<T: Real>(
    s0: T,
    strike: T,
    r: T,
    sigma: T,
    maturity: T,
    im: &ImParams<T>,
) -> Result<T> {
    let f_call = im_forward(s0, r, sigma, maturity, OptionKind::Call, im)?;
    let f_put = im_forward(s0, r, sigma, maturity, OptionKind::Put, im)?;
    let v = sigma * maturity.sqrt();
    let p_call = normalized_put(strike / f_call, v);
    let p_put = normalized_put(strike / f_put, v);
    Ok((-r * maturity).exp() * (f_call * (p_call - p_put) + p_put * (f_call - f_put)))
}

const IV_LOW: f64 = 1e-4;
const IV_HIGH: f64 = 5.0;
const IV_SEED: f64 = 0.25;

/// Black-Scholes implied volatility against the reference model (no IM).
/// Safeguarded Newton from 0.25 inside a bisection bracket `[1e-4, 5]`.
pub fn implied_vol<T: Real>(
    price: T,
    s0: T,
    strike: T,
    r: T,
    maturity: T,
    kind: OptionKind,
) -> Result<T> {
    let lo_v = T::lit(IV_LOW);
    let hi_v = T::lit(IV_HIGH);
    let model = |v: T| bs_price_delta(s0, strike, r, v, maturity, kind).map(|q| q.price);
    let p_lo = model(lo_v)?;
    let p_hi = model(hi_v)?;
    if !(price >= p_lo && price <= p_hi) {
        return domain(format!(
            "price {price} outside attainable range [{p_lo}, {p_hi}]"
        ));
    }
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(64.0)) * s0.max(T::one());
    let (mut lo, mut hi) = (lo_v, hi_v);
    let mut vol = T::lit(IV_SEED);
    let sqrt_t = maturity.sqrt();
    for _ in 0..200 {
        let p = model(vol)?;
        let diff = p - price;
        if diff.abs() <= tol {
            return Ok(vol);
        }
        if diff > T::zero() {
            hi = vol;
        } else {
            lo = vol;
        }
        let fwd = s0 * (r * maturity).exp();
        let d1 = (fwd / strike).ln() / (vol * sqrt_t) + T::lit(0.5) * vol * sqrt_t;
        let vega = s0 * normal_pdf(d1) * sqrt_t;
        let newton = vol - diff / vega;
        vol = if vega > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            T::lit(0.5) * (lo + hi)
        };
        if hi - lo <= T::epsilon() * hi {
            return Ok(vol);
        }
    }
    Err(crate::error::Error::NoConvergence(format!(
        "implied vol for price {price} did not converge"
    )))
}

/// One strike of the IM smile. A vol is `None` when the inversion fails.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmilePoint<T = f64> {
    pub strike: T,
    pub call_vol: Option<T>,
    pub put_vol: Option<T>,
    pub call_delta: T,
    pub put_delta: T,
}

/// Implied volatilities and deltas of the closed-form IM prices, one point per
/// strike.
pub fn im_smile<T: Real>(
    s0: T,
    r: T,
    sigma: T,
    maturity: T,
    im: &ImParams<T>,
    strikes: &[T],
) -> Result<Vec<SmilePoint<T>>> {
    strikes
        .iter()
        .map(|&k| {
            let call = bs_price_delta_with_im(s0, k, r, sigma, maturity, OptionKind::Call, im)?;
            let put = bs_price_delta_with_im(s0, k, r, sigma, maturity, OptionKind::Put, im)?;
            Ok(SmilePoint {
                strike: k,
                call_vol: implied_vol(call.price, s0, k, r, maturity, OptionKind::Call).ok(),
                put_vol: implied_vol(put.price, s0, k, r, maturity, OptionKind::Put).ok(),
                call_delta: call.delta,
                put_delta: put.delta,
            })
        })
        .collect()
}

/// Central finite-difference slope `d sigma_impl / dK` of the IM smile at the
/// ATM forward `K = S0 e^{rT}`, step `h = 1e-3 K`.
pub fn atmf_skew<T: Real>(
    s0: T,
    r: T,
    sigma: T,
    maturity: T,
    im: &ImParams<T>,
    kind: OptionKind,
) -> Result<T> {
    let k_atm = s0 * (r * maturity).exp();
    let h = T::lit(1e-3) * k_atm;
    let vol_at = |k: T| -> Result<T> {
        let p = bs_price_delta_with_im(s0, k, r, sigma, maturity, kind, im)?.price;
        implied_vol(p, s0, k, r, maturity, kind)
    };
    Ok((vol_at(k_atm + h)? - vol_at(k_atm - h)?) / (T::lit(2.0) * h))
}

/// Sign of the ATMF skew: `0` when `|slope| < 1e-8`.
pub fn atmf_skew_sign<T: Real>(
    s0: T,
    r: T,
    sigma: T,
    maturity: T,
    im: &ImParams<T>,
    kind: OptionKind,
) -> Result<i8> {
    let slope = atmf_skew(s0, r, sigma, maturity, im, kind)?;
    Ok(if slope.abs() < T::lit(1e-8) {
        0
    } else if slope > T::zero() {
        1
    } else {
        -1
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn im() -> ImParams {
        ImParams::new(0.02, 0.99, 0.02).unwrap()
    }

    #[test]
    fn table_anchor_k20() {
        let c = bs_price_delta(20.0, 20.0, 0.02, 0.25, 1.0, OptionKind::Call).unwrap();
        assert_eq!(format!("{:.4} {:.4}", c.price, c.delta), "2.1741 0.5812");
        let p = bs_price_delta(20.0, 20.0, 0.02, 0.25, 1.0, OptionKind::Put).unwrap();
        assert_eq!(format!("{:.4} {:.4}", p.price, p.delta), "1.7781 -0.4188");
        let c = bs_price_delta_with_im(20.0, 20.0, 0.02, 0.25, 1.0, OptionKind::Call, &im()).unwrap();
        assert_eq!(format!("{:.4} {:.4}", c.price, c.delta), "2.1959 0.5852");
        let p = bs_price_delta_with_im(20.0, 20.0, 0.02, 0.25, 1.0, OptionKind::Put, &im()).unwrap();
        assert_eq!(format!("{:.4} {:.4}", p.price, p.delta), "1.7938 -0.4209");
    }

    #[test]
    fn put_call_parity_and_limits() {
        for &k in &[15.0, 20.0, 26.0] {
            let c = bs_price_delta(20.0, k, 0.02, 0.25, 1.0, OptionKind::Call).unwrap();
            let p = bs_price_delta(20.0, k, 0.02, 0.25, 1.0, OptionKind::Put).unwrap();
            assert!((c.price - p.price - (20.0 - k * (-0.02f64).exp())).abs() < 1e-10);
        }
        let c = bs_price_delta(20.0, 18.0, 0.02, 1e-9, 1.0, OptionKind::Call).unwrap();
        assert!((c.price - (20.0 - 18.0 * (-0.02f64).exp())).abs() < 1e-12);
        assert!((c.delta - 1.0).abs() < 1e-12);
        assert!(bs_price_delta(20.0, 18.0, 0.02, 0.0, 1.0, OptionKind::Call).is_err());
        assert!(bs_price_delta(-1.0, 18.0, 0.02, 0.2, 1.0, OptionKind::Call).is_err());
    }

    #[test]
    fn zero_spread_is_plain_bs() {
        let im0 = im().with_spread(0.0).unwrap();
        for kind in [OptionKind::Call, OptionKind::Put] {
            let a = bs_price_delta(20.0, 21.0, 0.02, 0.25, 1.0, kind).unwrap();
            let b = bs_price_delta_with_im(20.0, 21.0, 0.02, 0.25, 1.0, kind, &im0).unwrap();
            assert!((a.price - b.price).abs() < 1e-14);
            assert!((a.delta - b.delta).abs() < 1e-14);
        }
    }

    /// Adaptive Simpson on sqrt((t + Delta) ^ T - t).
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 60)
    }

    #[test]
    fn dividend_integral_matches_quadrature() {
        let unit = ImParams::new(1.0 / (0.25 * gaussian_c99()), 0.99, 0.02).unwrap();
        let curve = DividendCurve::new(1.0, unit, 0.25, 1.0).unwrap();
        let full = dividend_integral(&curve, 0.0, 1.0).unwrap();
        let h = |t: f64| ((t + 0.02f64).min(1.0) - t).sqrt();
        let quad = adaptive_simpson(&h, 0.0, 0.98, 1e-13) + adaptive_simpson(&h, 0.98, 1.0, 1e-13);
        assert!((full - quad).abs() < 1e-10);
        assert!((full - 0.140_478_547).abs() < 1e-8);
        for &(a, b) in &[(0.0, 0.5), (0.3, 0.99), (0.985, 0.995), (0.97, 1.0)] {
            let got = dividend_integral(&curve, a, b).unwrap();
            let split = 0.98f64.clamp(a, b);
            let want = adaptive_simpson(&h, a, split, 1e-13) + adaptive_simpson(&h, split, b, 1e-13);
            assert!((got - want).abs() < 1e-10, "[{a},{b}]");
        }
        assert_eq!(dividend_integral(&curve, 0.4, 0.4).unwrap(), 0.0);
        assert!(dividend_integral(&curve, 0.5, 0.4).is_err());
        assert!(dividend_integral(&curve, 0.5, 1.2).is_err());

        let full = DividendCurve::new(1.0, im(), 0.25, 1.0).unwrap();
        let v = dividend_integral(&full, 0.0, 1.0).unwrap();
        assert!((v - 0.001_872_027_1).abs() < 1e-10);
    }

    fn gaussian_c99() -> f64 {
        crate::normal::gaussian_cvar_constant(0.99).unwrap()
    }

    #[test]
    fn horizon_beyond_maturity_uses_sqrt_time_to_maturity() {
        let wide = ImParams::new(0.02, 0.99, 2.0).unwrap();
        let curve = DividendCurve::new(1.0, wide, 0.25, 1.0).unwrap();
        let got = dividend_integral(&curve, 0.0, 1.0).unwrap();
        let scale = 0.02 * gaussian_c99() * 0.25;
        assert!((got - scale * 2.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn implied_vol_round_trip() {
        for &k in &[12.0f64, 17.0, 20.0, 23.0, 30.0] {
            for kind in [OptionKind::Call, OptionKind::Put] {
                let p = bs_price_delta(20.0, k, 0.02, 0.25, 1.0, kind).unwrap().price;
                let v = implied_vol(p, 20.0, k, 0.02, 1.0, kind).unwrap();
                assert!((v - 0.25).abs() < 1e-8, "K={k} {kind:?}: {v}");
            }
        }
        assert!(implied_vol(25.0, 20.0, 20.0, 0.02, 1.0, OptionKind::Call).is_err());
        assert!(implied_vol(0.0, 20.0, 20.0, 0.02, 1.0, OptionKind::Call).is_err());
    }

    #[test]
    fn im_raises_implied_vols() {
        let vc = implied_vol(2.1959f64, 20.0, 20.0, 0.02, 1.0, OptionKind::Call).unwrap();
        let vp = implied_vol(1.7938, 20.0, 20.0, 0.02, 1.0, OptionKind::Put).unwrap();
        assert!(vc > 0.25 && vp > 0.25);
        assert!((vc - vp).abs() > 1e-4);
    }

    #[test]
    fn smile_shape() {
        let strikes: Vec<f64> = (17..=23).map(f64::from).collect();
        let flat = im_smile(20.0, 0.02, 0.25, 1.0, &im().with_spread(0.0).unwrap(), &strikes).unwrap();
        for p in &flat {
            assert!((p.call_vol.unwrap() - 0.25).abs() < 1e-6);
            assert!((p.put_vol.unwrap() - 0.25).abs() < 1e-6);
        }
        let smile = im_smile(20.0, 0.02, 0.25, 1.0, &im(), &strikes).unwrap();
        for w in smile.windows(2) {
            assert!(w[1].call_vol.unwrap() < w[0].call_vol.unwrap());
            assert!(w[1].put_vol.unwrap() > w[0].put_vol.unwrap());
        }
        assert!(im_smile(20.0, 0.02, 0.25, 1.0, &im(), &[-1.0]).is_err());
    }

    #[test]
    fn skew_signs() {
        let im0 = im().with_spread(0.0).unwrap();
        assert_eq!(atmf_skew_sign(20.0, 0.02, 0.25, 1.0, &im0, OptionKind::Call).unwrap(), 0);
        assert_eq!(atmf_skew_sign(20.0, 0.02, 0.25, 1.0, &im(), OptionKind::Call).unwrap(), -1);
        assert_eq!(atmf_skew_sign(20.0, 0.02, 0.25, 1.0, &im(), OptionKind::Put).unwrap(), 1);
    }

    #[test]
    fn parity_decomposition() {
        for &k in &[16.0, 20.0, 24.0] {
            let c = bs_price_delta_with_im(20.0, k, 0.02, 0.25, 1.0, OptionKind::Call, &im()).unwrap();
            let p = bs_price_delta_with_im(20.0, k, 0.02, 0.25, 1.0, OptionKind::Put, &im()).unwrap();
            let fc = im_forward(20.0, 0.02, 0.25, 1.0, OptionKind::Call, &im()).unwrap();
            let lhs = c.price - p.price - (-0.02f64).exp() * (fc - k);
            let rhs = parity_correction(20.0, k, 0.02, 0.25, 1.0, &im()).unwrap();
            assert!((lhs - rhs).abs() < 1e-8);
            assert!(rhs.abs() > 1e-4);
        }
    }

    #[test]
    fn delta_matches_price_difference() {
        for kind in [OptionKind::Call, OptionKind::Put] {
            for &k in &[17.0, 20.0, 23.0] {
                let q = bs_price_delta(20.0f64, k, 0.02, 0.25, 1.0, kind).unwrap();
                let h = 1e-4;
                let up = bs_price_delta(20.0 + h, k, 0.02, 0.25, 1.0, kind).unwrap().price;
                let dn = bs_price_delta(20.0 - h, k, 0.02, 0.25, 1.0, kind).unwrap().price;
                let fd = (up - dn) / (2.0 * h);
                assert!((q.delta - fd).abs() <= 1e-6 * q.delta.abs());
            }
        }
    }

    #[test]
    fn f32_quote() {
        let q = bs_price_delta(20.0f32, 20.0, 0.02, 0.25, 1.0, OptionKind::Call).unwrap();
        assert!((q.price - 2.1741).abs() < 1e-3);
    }
}
