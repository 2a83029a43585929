use margin_bsde::pde::{solve_l_pde_bs, solve_nl_pde, FdGrid};
use margin_bsde::{bs_price_delta_with_im, ImParams, MarketParams, OptionKind, Payoff};

fn market() -> MarketParams {
    MarketParams::single(20.0, 0.02, 0.25).unwrap()
}

fn im() -> ImParams {
    ImParams::new(0.02, 0.99, 0.02).unwrap()
}

fn grid(m: usize, n: usize) -> FdGrid {
    FdGrid::default_for_strike(20.0, 1.0).unwrap().with_size(m, n).unwrap()
}

#[test]
fn im_cost_raises_prices_at_every_node() {
    for payoff in [Payoff::call(20.0).unwrap(), Payoff::put(20.0).unwrap()] {
        let g = grid(800, 200);
        let with = solve_nl_pde(&market(), &im(), &payoff, &g).unwrap();
        let without = solve_nl_pde(&market(), &im().with_spread(0.0).unwrap(), &payoff, &g).unwrap();
        for (a, b) in with.initial().iter().zip(without.initial()) {
            assert!(a >= b, "{a} < {b}");
        }
    }
}

#[test]
fn refinement_shrinks_error_by_three() {
    for kind in [OptionKind::Call, OptionKind::Put] {
        let payoff = match kind {
            OptionKind::Call => Payoff::call(20.0),
            OptionKind::Put => Payoff::put(20.0),
        }
        .unwrap();
        let exact = bs_price_delta_with_im(20.0, 20.0, 0.02, 0.25, 1.0, kind, &im()).unwrap();
        let err = |m, n| {
            let fd = solve_nl_pde(&market(), &im(), &payoff, &grid(m, n)).unwrap();
            (fd.price_at(20.0).unwrap() - exact.price).abs()
        };
        let (coarse, fine) = (err(500, 125), err(1000, 250));
        assert!(coarse / fine >= 3.0, "{kind:?}: {coarse:e} -> {fine:e}");
    }
}

#[test]
fn delta_sign_structure() {
    let g = grid(1000, 250).keeping_surface(true);
    let call = solve_nl_pde(&market(), &im(), &Payoff::call(20.0).unwrap(), &g).unwrap();
    let put = solve_nl_pde(&market(), &im(), &Payoff::put(20.0).unwrap(), &g).unwrap();
    for n in 0..=g.n {
        assert!(call.delta_slice(n).unwrap().iter().all(|&d| d >= -1e-6));
        assert!(put.delta_slice(n).unwrap().iter().all(|&d| d <= 1e-6));
    }
}

#[test]
fn implicit_and_crank_nicolson_agree_to_first_order() {
    let call = Payoff::call(20.0).unwrap();
    let gap = |n| {
        let g = grid(400, n);
        let cn = solve_nl_pde(&market(), &im(), &call, &g).unwrap();
        let bw = solve_nl_pde(&market(), &im(), &call, &g.with_omega(1.0)).unwrap();
        (cn.price_at(20.0).unwrap() - bw.price_at(20.0).unwrap()).abs()
    };
    let (a, b) = (gap(100), gap(200));
    assert!(a < 1e-2);
    let ratio = a / b;
    assert!((1.6..=2.5).contains(&ratio), "{ratio}");
}

#[test]
fn horizon_at_maturity_stays_bounded() {
    let call = Payoff::call(20.0).unwrap();
    let im_t = im().with_horizon(1.0).unwrap();
    let g = grid(800, 200);
    let nl = solve_nl_pde(&market(), &im_t, &call, &g).unwrap();
    let lin = solve_l_pde_bs(&market(), &im_t, &call, &g).unwrap();
    let gap = (nl.price_at(20.0).unwrap() - lin.price_at(20.0).unwrap()).abs();
    assert!(gap.is_finite() && gap < 0.1 && nl.price_at(20.0).unwrap() < 20.0);
}
