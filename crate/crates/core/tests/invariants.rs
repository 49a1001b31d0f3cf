//! Cross-module invariants on randomized chains: measure properties against
//! the power-iteration oracle, identity coverage over all state pairs, and
//! the half-well measure-ratio relation.

use bdwell::exact;
use bdwell::measure::invariant_measure;
use bdwell::verify::stationary_by_power_iteration;
use bdwell::zoo;
use proptest::prelude::*;

fn arb_interval() -> impl Strategy<Value = (i64, i64)> {
    // a - b in [2, 30]
    (1i64..=15, 1i64..=15).prop_map(|(a, mb)| (-mb, a.max(2 - mb)))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn measure_invariants_on_random_chains((b, a) in arb_interval(), seed in 0u64..1 << 48) {
        let mut rng = bdwell::mc::derive_rng(seed, 0xA11, 0);
        let spec = zoo::random_spec(&mut rng, b, a);
        let m = invariant_measure(&spec).unwrap();

        // normalization and detailed balance
        let total: f64 = (b..=a).map(|x| m.pi(x)).sum();
        prop_assert!((total - 1.0).abs() <= 1e-12);
        prop_assert!(m.detailed_balance_residual(&spec) <= 1e-12);

        // suffix/prefix bookkeeping
        for x in b..=a {
            prop_assert!((m.suffix(x) - (m.suffix(x + 1) + m.pi(x))).abs() <= 1e-14);
            prop_assert!((m.prefix(x) + m.suffix(x + 1) - 1.0).abs() <= 1e-12);
        }

        // fixed point of the transition operator, in total variation
        let power = stationary_by_power_iteration(&spec, 1e-15).unwrap();
        let tv: f64 = 0.5 * (b..=a).map(|x| (m.pi(x) - power[spec.ix(x)]).abs()).sum::<f64>();
        prop_assert!(tv <= 1e-9, "tv = {tv}");
    }

    #[test]
    fn commute_identity_all_pairs(seed in 0u64..1 << 48) {
        let mut rng = bdwell::mc::derive_rng(seed, 0xA12, 0);
        let spec = zoo::random_spec(&mut rng, -5, 7);
        let m = invariant_measure(&spec).unwrap();
        for j in spec.b()..spec.a() {
            for n in j + 1..=spec.a() {
                let rhs = exact::commute_identity(&spec, &m, j, n).unwrap();
                let sum = exact::mean_hit_up(&spec, &m, j, n).unwrap()
                    + exact::mean_hit_down(&spec, &m, n, j).unwrap();
                let rel = (rhs - sum).abs() / rhs;
                prop_assert!(rel <= 1e-10, "j={j} n={n}: {rel}");
            }
        }
    }

    #[test]
    fn moments_shape_invariants(seed in 0u64..1 << 48) {
        let mut rng = bdwell::mc::derive_rng(seed, 0xA13, 0);
        let spec = zoo::random_spec(&mut rng, -6, 6);
        let m = invariant_measure(&spec).unwrap();
        for j in spec.b()..=spec.a() {
            for n in spec.b()..=spec.a() {
                let q = exact::HittingQuery::one_sided(j, n);
                let mom = exact::hitting_moments(&spec, &m, &q).unwrap();
                prop_assert!(mom.mean >= (j - n).abs() as f64);
                let var = mom.variance().unwrap();
                prop_assert!(var >= -1e-9 * mom.second_moment.unwrap().max(1.0));
            }
        }
    }

    #[test]
    fn half_well_measure_ratios(seed in 0u64..1 << 48) {
        let mut rng = bdwell::mc::derive_rng(seed, 0xA14, 0);
        let spec = zoo::random_spec(&mut rng, -6, 6);
        let m = invariant_measure(&spec).unwrap();
        let (left, right) = spec.half_well_versions().unwrap();
        let mr = invariant_measure(&right).unwrap();
        let ml = invariant_measure(&left).unwrap();
        for x in 0..=spec.a() {
            let lhs = mr.log_pi(x) - mr.log_pi(0);
            let rhs = m.log_pi(x) - m.log_pi(0);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
        for x in spec.b()..=0 {
            let lhs = ml.log_pi(x) - ml.log_pi(0);
            let rhs = m.log_pi(x) - m.log_pi(0);
            prop_assert!((lhs - rhs).abs() <= 1e-12);
        }
    }
}

#[test]
fn zoo_models_detailed_balance_at_scale() {
    for spec in [
        zoo::ehrenfest(2000).unwrap(),
        zoo::simple_rw(0.2, 0.4, 0.4, 0.2, -1500, 2000).unwrap(),
        zoo::half_well(0.2, 0.4, 4096).unwrap(),
        zoo::varying_rw(0.2, 0.4, 0.4, 0.2, -9, 14, -300, 500).unwrap(),
        zoo::driftless(2048).unwrap(),
    ] {
        let m = invariant_measure(&spec).unwrap();
        assert!(m.detailed_balance_residual(&spec) <= 1e-12);
    }
}

#[test]
fn ehrenfest_half_well_ratio_identity() {
    let spec = zoo::ehrenfest(12).unwrap();
    let m = invariant_measure(&spec).unwrap();
    let (_, right) = spec.half_well_versions().unwrap();
    let mr = invariant_measure(&right).unwrap();
    for x in 0..=12 {
        for y in 0..=12 {
            let full = m.log_pi(x) - m.log_pi(y);
            let half = mr.log_pi(x) - mr.log_pi(y);
            assert!((full - half).abs() <= 1e-12);
        }
    }
}
