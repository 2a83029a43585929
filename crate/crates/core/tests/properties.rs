use margin_bsde::{cvar_lipschitz_gap, empirical_cvar, Payoff, RngStream};
use proptest::collection::vec;
use proptest::prelude::*;

fn alpha() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.9, 0.95, 0.99])
}

fn cvar(x: &[f64], a: f64) -> f64 {
    empirical_cvar(x, a).unwrap().cvar
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn translation(x in vec(-100.0..100.0f64, 1..200), c in -50.0..50.0f64, a in alpha()) {
        let shifted: Vec<f64> = x.iter().map(|v| v + c).collect();
        prop_assert!(close(cvar(&shifted, a), cvar(&x, a) + c, 150.0));
    }

    #[test]
    fn positive_homogeneity(x in vec(-100.0..100.0f64, 1..200), l in 0.0..10.0f64, a in alpha()) {
        let scaled: Vec<f64> = x.iter().map(|v| l * v).collect();
        prop_assert!(close(cvar(&scaled, a), l * cvar(&x, a), 1000.0));
    }

    #[test]
    fn subadditivity(pairs in vec((-100.0..100.0f64, -100.0..100.0f64), 1..200), a in alpha()) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        let sum: Vec<f64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
        prop_assert!(cvar(&sum, a) <= cvar(&x, a) + cvar(&y, a) + 1e-9 * 200.0);
    }

    #[test]
    fn monotone_in_alpha(x in vec(-100.0..100.0f64, 1..200)) {
        prop_assert!(cvar(&x, 0.9) <= cvar(&x, 0.95) + 1e-9);
        prop_assert!(cvar(&x, 0.95) <= cvar(&x, 0.99) + 1e-9);
    }

    #[test]
    fn lipschitz_gap_nonpositive(pairs in vec((-100.0..100.0f64, -100.0..100.0f64), 1..200), a in alpha()) {
        let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        prop_assert!(cvar_lipschitz_gap(&x, &y, a).unwrap() <= 1e-12);
    }

    #[test]
    fn cvar_dominates_mean_and_quantile(x in vec(-100.0..100.0f64, 1..200), a in alpha()) {
        let r = empirical_cvar(&x, a).unwrap();
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        prop_assert!(r.cvar >= mean - 1e-9);
        prop_assert!(r.cvar >= r.minimizer_x - 1e-9);
    }
}

#[test]
fn payoffs_respect_lipschitz_bound() {
    let payoffs = [
        Payoff::call(20.0).unwrap(),
        Payoff::put(20.0).unwrap(),
        Payoff::butterfly(20.0).unwrap(),
        Payoff::equal_basket(20.0, 3).unwrap(),
        Payoff::basket_call(10.0, vec![0.7, 0.4, 1.1]).unwrap(),
    ];
    let mut gen = RngStream::new(12, 0).generator();
    for payoff in &payoffs {
        let d = payoff.dim();
        let c = payoff.lipschitz_constant();
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..d).map(|_| 40.0 * gen.uniform()).collect();
            let y: Vec<f64> = (0..d).map(|_| 40.0 * gen.uniform()).collect();
            let dist = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            let gap = (payoff.evaluate(&x).unwrap() - payoff.evaluate(&y).unwrap()).abs();
            assert!(gap <= c * dist + 1e-12, "{payoff:?}");
        }
    }
}

#[test]
fn payoffs_are_nonnegative() {
    let mut gen = RngStream::new(13, 0).generator();
    let fly = Payoff::butterfly_with_wing(20.0, 3.0).unwrap();
    for _ in 0..10_000 {
        let s = 40.0 * gen.uniform();
        assert!(fly.evaluate(&[s]).unwrap() >= 0.0);
        assert!(Payoff::put(20.0).unwrap().evaluate(&[s]).unwrap() >= 0.0);
    }
}
