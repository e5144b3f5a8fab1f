use approx::assert_abs_diff_eq;

use super::*;
use crate::exact::overlap_law;

#[test]
fn xi_examples() {
    assert_abs_diff_eq!(xi(1.0 / 5f64.sqrt(), 0.7, 5), 0.0, epsilon = 1e-16);
    assert_eq!(xi(1.0, 1.0, 1), 0.0);
    assert_eq!(xi(0.5, 0.8, 4), 0.0);
    assert_abs_diff_eq!(xi(1.0, 1.0, 2), 0.25, epsilon = 1e-16);
}

#[test]
fn n_r2_agrees_with_overlap_law() {
    let setup = Setup::new(7, 0.9, 4, 3);
    for d in 0..4 {
        let s = setup.disorder(d).unwrap();
        let (a, b) = coupled_tables(&s, 0.9, CoupledParams::new(0.4, 1.0).unwrap()).unwrap();
        let law = overlap_law(&a, &b).unwrap();
        let v = n_r2(&Spectrum::of(&a), &Spectrum::of(&b));
        assert_abs_diff_eq!(v, 7.0 * law.moment(2), epsilon = 1e-12);
    }
}

#[test]
fn variance_representation_zero_beta() {
    let r = variance_representation(&Setup::new(6, 0.0, 100, 1), 16).unwrap();
    assert_eq!(r.lhs.estimate, 0.0);
    assert_eq!(r.rhs.estimate, 0.0);
    assert!(r.consistent);
}

#[test]
fn variance_representation_small() {
    let r = variance_representation(&Setup::new(6, 0.6, 1500, 9), 16).unwrap();
    assert!(r.consistent, "{:?} vs {:?}", r.lhs, r.rhs);
    assert!(r.lhs.estimate > 0.0);
    assert_eq!(r.node_means.len(), 16);
    assert!(variance_representation(&Setup::new(6, 0.6, 50, 9), 16).is_err());
}

#[test]
fn residual_zero_beta_is_exact() {
    for t in [0.0, 0.5, 1.0] {
        let r = prop1_residual(&Setup::new(6, 0.0, 20, 2), t).unwrap();
        assert_eq!(r.max_abs, 0.0);
        assert_eq!(r.mean_residual.estimate, 0.0);
    }
}

#[test]
fn residual_t_zero_is_centered() {
    let r = prop1_residual(&Setup::new(6, 0.9, 1500, 4), 0.0).unwrap();
    assert_abs_diff_eq!(r.target, 1.0);
    assert!(r.mean_residual.within_sigma(0.0, 3.0), "{:?}", r.mean_residual);
    assert!(r.abs2_residual.estimate > 0.0);
}

#[test]
fn stein_bound_values() {
    let zero = stein_bound(&Setup::new(6, 0.0, 10, 0), 16).unwrap();
    assert_eq!(zero.estimate.estimate, 0.0);
    let b = stein_bound(&Setup::new(6, 0.2, 200, 0), 16).unwrap();
    assert!(b.estimate.estimate > 0.0);
}

#[test]
fn taylor_exact_checks() {
    for (t, beta) in [(0.3, 0.7), (1.0, 1.2)] {
        let tb = taylor_terms(&Setup::new(6, beta, 50, 7), t, DEFAULT_FD_STEP).unwrap();
        assert!(tb.exact.pass(1e-12), "{:?}", tb.exact);
        assert!(!tb.degenerate);
        assert!(tb.exact.triple_min > 0.0);
    }
    let deg = taylor_terms(&Setup::new(2, 0.5, 10, 7), 0.5, DEFAULT_FD_STEP).unwrap();
    assert!(deg.degenerate);
    assert!(deg.exact.pass(1e-12));
}

#[test]
fn taylor_first_order_matches_difference_quotient() {
    let tb = taylor_terms(&Setup::new(6, 0.7, 1000, 11), 0.6, DEFAULT_FD_STEP).unwrap();
    assert!(tb.first_order_gap.within_sigma(0.0, 3.0), "{:?}", tb.first_order_gap);
    assert!(tb.identity_gap.within_sigma(0.0, 3.0), "{:?}", tb.identity_gap);
    assert!(tb.r_plus_gap.within_sigma(0.0, 3.0), "{:?}", tb.r_plus_gap);
    assert_abs_diff_eq!(tb.term_0.estimate, 0.0, epsilon = 1e-14);
}

#[test]
fn ibp_formula_for_f1_at_zero_is_first_order_term() {
    // both routes average the same per-sample quantity β²t⟨R⁻²⟩_{t,0}
    let setup = Setup::new(5, 0.8, 40, 5);
    let c = gibp_derivative_check(&setup, IbpObservable::F1, 0.5, 0.0, 1e-3).unwrap();
    let tb = taylor_terms(&setup, 0.5, 1e-3).unwrap();
    assert_abs_diff_eq!(c.formula.estimate, tb.term_1.estimate, epsilon = 1e-12);
    assert_abs_diff_eq!(c.fd.estimate, tb.fd_slope.estimate, epsilon = 1e-9);
    assert_eq!(c.stencil, Stencil::Forward);
}

#[test]
fn ibp_zero_beta() {
    let setup = Setup::new(5, 0.0, 10, 5);
    for obs in IbpObservable::ALL {
        for (t, s0) in [(0.5, 0.0), (0.5, 0.5), (1.0, 0.0)] {
            let c = gibp_derivative_check(&setup, obs, t, s0, 1e-3).unwrap();
            assert_eq!(c.formula.estimate, 0.0);
            assert_eq!(c.fd.estimate, 0.0);
        }
    }
}

#[test]
fn ibp_r_minus_sq_formula_vanishes_at_zero() {
    let c = gibp_derivative_check(&Setup::new(5, 0.9, 300, 8), IbpObservable::RMinusSq, 0.5, 0.0, 1e-3).unwrap();
    assert_abs_diff_eq!(c.formula.estimate, 0.0, epsilon = 1e-14);
    assert!(c.fd.within_sigma(0.0, 3.0), "{:?}", c.fd);
}

#[test]
fn ibp_gap_is_centered() {
    let setup = Setup::new(5, 0.9, 1500, 21);
    for obs in IbpObservable::ALL {
        let c = gibp_derivative_check(&setup, obs, 0.5, 0.5, 1e-3).unwrap();
        assert_eq!(c.stencil, Stencil::Central);
        assert!(c.gap.within_sigma(0.0, 3.0), "{obs:?}: {:?}", c.gap);
    }
}

#[test]
fn ibp_rejects_bad_input() {
    let setup = Setup::new(5, 0.5, 10, 0);
    assert!(gibp_derivative_check(&setup, IbpObservable::F1, 0.5, 0.5, 0.2).is_err());
    assert!(gibp_derivative_check(&setup, IbpObservable::F1, 0.5, 1.5, 1e-3).is_err());
    assert!("f3".parse::<IbpObservable>().is_err());
    assert_eq!("f2-factor".parse::<IbpObservable>().unwrap(), IbpObservable::F2Factor);
    let c = gibp_derivative_check(&setup, IbpObservable::F1, 0.5, 1.0, 1e-3).unwrap();
    assert_eq!(c.stencil, Stencil::Backward);
}

#[test]
fn moments_increase_along_interpolation() {
    let ts = [0.0, 0.25, 0.5, 0.75, 1.0];
    let p = moment_profile(&Setup::new(6, 0.9, 600, 3), &ts, &[1, 2]).unwrap();
    assert!(p.nondecreasing);
    assert_eq!(p.moments.len(), 2);
    assert_eq!(p.moments[0].len(), 5);
    assert!(p.moments[0][4].estimate > p.moments[0][0].estimate);
}

#[test]
fn prop_scan_zero_beta() {
    let scan = prop_scan(&[4, 6, 8], &BetaSchedule::Fixed { beta: 0.0 }, 0.5, 20, 1, 100).unwrap();
    assert!(scan.ok());
    assert_eq!(scan.l_fit, 0.0);
    assert!(scan.rows.iter().all(|r| r.residual.max_abs == 0.0));
}

#[test]
fn prop_shape_formula() {
    assert_abs_diff_eq!(prop_shape(4, 0.0, 0.3), 0.5, epsilon = 1e-15);
    let b2: f64 = 0.25;
    assert_abs_diff_eq!(
        prop_shape(9, 0.5, 1.0),
        1.0 / (3.0 * (1.0 - b2) * (1.0 - b2).powf(1.5)),
        epsilon = 1e-14
    );
}
