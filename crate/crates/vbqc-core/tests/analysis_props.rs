//! The rate algebra against its defining identities on dense grids.

use vbqc_core::analysis::{bound_set, delta_of, gap_at_qstar, RateParams};

#[test]
fn delta_formula_values() {
    assert!((delta_of(0.0).unwrap() - (2f64 / 3.0).sqrt()).abs() < 1e-10);
    let d = delta_of(1.0 / 3.0).unwrap();
    assert!((d - (2.0 * (2f64 / 3.0).sqrt() + 1.0)).abs() < 1e-10);
}

#[test]
fn gap_definitions_match_alpha_minus_beta_on_a_grid() {
    let eps = 0.004;
    let r = 9;
    for i in 0..=100 {
        let q = i as f64 / 100.0;
        let params = RateParams::amplified(eps, q, r).unwrap();
        let set = bound_set(&params).unwrap();
        let d1 = q * (params.a - 1.0) + eps * (1.0 - q) / 2.0;
        let d2 = q * (params.a - 1.0) + eps * (1.0 - q);
        let d3 = q * (params.a - params.b - set.delta);
        assert!((set.delta1 - d1).abs() < 1e-12);
        assert!((set.delta2 - d2).abs() < 1e-12);
        assert!((set.delta3 - d3).abs() < 1e-12);
        // case 3 never binds: Δ₂ dominates Δ₁ everywhere
        assert!(set.delta2 >= set.delta1 - 1e-15);
    }
}

#[test]
fn qstar_balances_the_two_binding_gaps() {
    for (eps, r) in [(1e-4, 8), (1e-3, 10), (2e-3, 12)] {
        let probe = RateParams::amplified(eps, 0.0, r).unwrap();
        let set = bound_set(&probe).unwrap();
        let q_star = set.q_star.expect("gap exists at these parameters");
        let at = RateParams::amplified(eps, q_star, r).unwrap();
        let at_set = bound_set(&at).unwrap();
        assert!(
            (at_set.delta1 - at_set.delta3).abs() < 1e-12,
            "Δ₁(q*) = {} vs Δ₃(q*) = {}",
            at_set.delta1,
            at_set.delta3
        );
        let gap = gap_at_qstar(&at).unwrap();
        assert!((gap.gap - at_set.delta3).abs() < 1e-12);
        assert!((gap.q_star - q_star).abs() < 1e-12);
    }
}

#[test]
fn qstar_denominator_flagged_when_delta_swamps_the_budget() {
    // ε = 0.3 puts b + δ above 1 + ε/2
    let params = RateParams::amplified(0.3, 0.2, 6).unwrap();
    let set = bound_set(&params).unwrap();
    assert!(set.q_star.is_none());
    assert!(gap_at_qstar(&params).is_err());
}

#[test]
fn gap_lower_bound_chain_on_the_parameter_grid() {
    // Wherever the inverse-polynomial chain value is positive, the closed
    // form dominates it; where it is not, no verifiable gap exists.
    let mut checked = 0;
    let mut verifiable = 0;
    for r in 4..=12u32 {
        for i in 0..=40 {
            let eps = 1e-4 * (1e2_f64).powf(i as f64 / 40.0); // 1e-4..1e-2 log grid
            let params = RateParams::amplified(eps, 0.5, r).unwrap();
            checked += 1;
            match gap_at_qstar(&params) {
                Ok(gap) => {
                    verifiable += 1;
                    assert!(
                        gap.gap >= gap.chain_rhs - 1e-15,
                        "chain fails at r={r}, ε={eps}: {} < {}",
                        gap.gap,
                        gap.chain_rhs
                    );
                    assert!(gap.gap > 0.0);
                }
                Err(_) => {
                    let chain_rhs = eps / 4.0
                        * (1.0
                            - 2f64.powi(-(r as i32) + 1)
                            - 2.0 * (2.0 * eps).sqrt()
                            - (2.0 / 3.0 + eps).sqrt());
                    assert!(
                        chain_rhs <= 0.0,
                        "flagged point must have a nonpositive chain value at r={r}, ε={eps}"
                    );
                }
            }
        }
    }
    assert!(checked == 9 * 41);
    assert!(verifiable > 0, "some grid points must verify");
}

#[test]
fn gap_grows_with_amplification_toward_its_limit() {
    let eps = 1e-4;
    let delta = delta_of(eps).unwrap();
    let limit = (eps / 2.0) * (1.0 - delta) / (1.0 + eps / 2.0 - delta);
    let mut prev = 0.0;
    for r in 4..=12u32 {
        let gap = gap_at_qstar(&RateParams::amplified(eps, 0.5, r).unwrap())
            .unwrap()
            .gap;
        assert!(gap > prev, "gap must increase with r");
        assert!(gap < limit + 1e-12, "gap {gap} beyond its r→∞ limit {limit}");
        prev = gap;
    }
    assert!(limit - prev < 1e-3, "r = 12 is close to the limit");
}

#[test]
fn parameter_validation() {
    assert!(RateParams::new(0.5, 0.5, 0.4, 0.6, 1).is_err()); // a ≤ b
    assert!(RateParams::new(1.5, 0.5, 0.9, 0.1, 1).is_err()); // ε out of range
    assert!(RateParams::new(0.1, 1.5, 0.9, 0.1, 1).is_err()); // q out of range
    let p = RateParams::amplified(0.01, 0.3, 7).unwrap();
    assert!((p.a - (1.0 - 2f64.powi(-7))).abs() < 1e-15);
    assert!((p.b - 2f64.powi(-7)).abs() < 1e-15);
}
