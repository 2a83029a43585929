use margin_bsde::montecarlo::{lr_delta_inner_estimate, nested_estimate, NestedConfig};
use margin_bsde::pde::{solve_l_pde_bs, FdGrid};
use margin_bsde::{bs_price_delta, ImParams, MarketParams, OptionKind, Payoff, RngStream};

fn market() -> MarketParams {
    MarketParams::single(20.0, 0.02, 0.25).unwrap()
}

fn im() -> ImParams {
    ImParams::new(0.02, 0.99, 0.02).unwrap()
}

#[test]
fn inner_delta_matches_closed_form() {
    let call = Payoff::call(20.0).unwrap();
    let est = lr_delta_inner_estimate(20.0, 0.5, 1.0, &market(), &call, RngStream::new(4, 4), 200_000)
        .unwrap();
    let q = bs_price_delta(20.0, 20.0, 0.02, 0.25, 0.5, OptionKind::Call).unwrap();
    let exact = 0.25 * 20.0 * q.delta;
    assert!((est.value - exact).abs() < 3.0 * est.std_error, "{est:?} vs {exact}");
}

#[test]
fn zero_spread_reduces_to_plain_pricing() {
    let none = im().with_spread(0.0).unwrap();
    for (payoff, kind) in [
        (Payoff::call(20.0).unwrap(), OptionKind::Call),
        (Payoff::put(23.0).unwrap(), OptionKind::Put),
    ] {
        let est = nested_estimate(&market(), &none, &payoff, 1.0, &NestedConfig::desk(), RngStream::new(1, 2))
            .unwrap();
        let q = bs_price_delta(20.0, payoff.strike(), 0.02, 0.25, 1.0, kind).unwrap();
        assert!((est.v0.value - q.price).abs() < 3.0 * est.v0.std_error);
        assert!((est.z0.value - q.delta).abs() < 3.0 * est.z0.std_error);
    }
}

#[test]
fn inner_bias_decreases_with_inner_sample() {
    let call = Payoff::call(20.0).unwrap();
    let run = |n_inner| {
        let config = NestedConfig::new(20_000, n_inner);
        nested_estimate(&market(), &im(), &call, 1.0, &config, RngStream::new(3, 0)).unwrap().v0
    };
    let (small, large) = (run(25), run(400));
    let se = small.std_error.hypot(large.std_error);
    assert!(large.value <= small.value + 3.0 * se);
}

#[test]
fn desk_coverage_over_hundred_runs() {
    let call = Payoff::call(20.0).unwrap();
    let grid = FdGrid::default_for_strike(20.0, 1.0).unwrap();
    let fd = solve_l_pde_bs(&market(), &im(), &call, &grid).unwrap();
    let (v, z) = (fd.price_at(20.0).unwrap(), fd.delta_at(20.0).unwrap());
    let (mut v_hits, mut z_hits) = (0, 0);
    for seed in 0..100 {
        let est = nested_estimate(&market(), &im(), &call, 1.0, &NestedConfig::desk(), RngStream::new(seed, 1))
            .unwrap();
        v_hits += est.v0.covers(v) as usize;
        z_hits += est.z0.covers(z) as usize;
    }
    assert!(v_hits >= 90 && z_hits >= 90, "{v_hits} {z_hits}");
}

#[test]
fn same_seed_same_estimate() {
    let fly = Payoff::butterfly(20.0).unwrap();
    let config = NestedConfig::new(2_000, 20);
    let a = nested_estimate(&market(), &im(), &fly, 1.0, &config, RngStream::new(8, 8)).unwrap();
    let b = nested_estimate(&market(), &im(), &fly, 1.0, &config, RngStream::new(8, 8)).unwrap();
    assert_eq!(a, b);
    let c = nested_estimate(&market(), &im(), &fly, 1.0, &config, RngStream::new(9, 8)).unwrap();
    assert_ne!(a, c);
}
