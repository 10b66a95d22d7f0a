use num_rational::Ratio;
use proptest::prelude::*;

use soliton_kit::asymptotics::sign_violations;
use soliton_kit::cli::config::parse_number;
use soliton_kit::cli::output::CsvTable;
use soliton_kit::integrator::{solve, IntegratorConfig};
use soliton_kit::model::{
    checkpoint_index_above, checkpoint_radius, ode_rhs, raw_residual, raw_residual_scale, SeederKind, SolitonParams,
};
use soliton_kit::series::{compute_coefficients, eval_series, DEFAULT_ORDER};

fn nonzero(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi).prop_filter("nonzero", |x: &f64| x.abs() > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn second_coefficient_closed_form(n in 2u32..12, lambda in -4.0f64..4.0, mu1 in -4.0f64..4.0) {
        let p = SolitonParams::new(n, lambda, mu1).unwrap();
        let c = compute_coefficients(&p, 6).unwrap().coeffs;
        let nf = n as f64;
        let expected = mu1 * (nf * mu1 - lambda) / (nf + 3.0);
        prop_assert!((c[2] - expected).abs() <= 1e-14 * expected.abs().max(1.0));
        prop_assert_eq!(c[0], 1.0);
        prop_assert_eq!(c[1], mu1);
    }

    #[test]
    fn rhs_zeroes_the_residual(n in 2u32..8, lambda in -2.0f64..2.0, r in 1e-3f64..1e3, h in 1e-3f64..1e3, hr in -10.0f64..10.0) {
        let p = SolitonParams::new(n, lambda, 0.5).unwrap();
        let hrr = ode_rhs(&p, r, h, hr).unwrap();
        let scale = raw_residual_scale(&p, r, h, hr, hrr);
        prop_assert!(raw_residual(&p, r, h, hr, hrr).abs() <= 1e-13 * scale);
    }

    #[test]
    fn series_satisfies_the_ode(n in 2u32..7, lambda in -2.0f64..2.0, mu1 in nonzero(-2.0, 2.0), frac in 0.05f64..0.5) {
        let p = SolitonParams::new(n, lambda, mu1).unwrap();
        let s = compute_coefficients(&p, DEFAULT_ORDER).unwrap();
        let r = frac * s.handoff_radius;
        let (h, hr) = eval_series(&s, r).unwrap();
        let hrr: f64 = s.coeffs.iter().enumerate().skip(2)
            .map(|(k, c)| c * (k * (k - 1)) as f64 * r.powi(k as i32 - 2)).sum();
        let scale = raw_residual_scale(&p, r, h, hr, hrr);
        prop_assert!(raw_residual(&p, r, h, hr, hrr).abs() <= 1e-10 * scale);
    }

    #[test]
    fn checkpoint_grid_is_consistent(k in -400i64..400) {
        let r = checkpoint_radius(k);
        prop_assert!(checkpoint_radius(k + 1) > r);
        prop_assert_eq!(checkpoint_index_above(r, false), k);
        prop_assert_eq!(checkpoint_index_above(r, true), k + 1);
    }

    #[test]
    fn csv_round_trip_is_bitwise(rows in prop::collection::vec(prop::array::uniform8(any::<f64>().prop_filter("finite", |x| x.is_finite())), 0..20)) {
        let table = CsvTable { metadata: vec![("n".into(), "3".into())], rows };
        let back = CsvTable::parse(&table.to_csv()).unwrap();
        for (a, b) in back.rows.iter().flatten().zip(table.rows.iter().flatten()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
        prop_assert_eq!(back.to_csv(), table.to_csv());
    }

    #[test]
    fn fractions_parse_exactly(p in -1000i64..1000, q in 1i64..1000) {
        let x = parse_number(&format!("{p}/{q}")).unwrap();
        prop_assert_eq!(x.exact, Some(Ratio::new(p, q)));
        prop_assert_eq!(x.value, p as f64 / q as f64);
    }
}

proptest! {
    // each case integrates a trajectory
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sign_dichotomy_holds(n in 2u32..5, lambda in 0.0f64..2.0, mu1 in nonzero(-2.0, 2.0)) {
        let p = SolitonParams::new(n, lambda, mu1).unwrap();
        let t = solve(&p, SeederKind::Series, &IntegratorConfig::with_r_max(100.0)).unwrap();
        prop_assert_eq!(sign_violations(&t), 0);
    }

    #[test]
    fn exact_solution_for_rational_parameters(n in 2u32..6, num in 1i64..6, den in 1i64..4) {
        let lambda = Ratio::new(num, den);
        let p = SolitonParams::from_rationals(n, lambda, lambda / n as i64).unwrap();
        let t = solve(&p, SeederKind::Series, &IntegratorConfig::with_r_max(50.0)).unwrap();
        let slope = p.lambda / n as f64;
        for s in &t.samples {
            prop_assert!((s.h - 1.0 - slope * s.r).abs() <= 1e-8 * (1.0 + slope * s.r));
        }
    }

    #[test]
    fn steady_scaling(mu in 0.2f64..5.0, mu1 in prop_oneof![Just(-1.0), Just(1.0)]) {
        let radii: Vec<f64> = (0..10).map(|i| 0.05 * 2f64.powi(i)).collect();
        let mut a_cfg = IntegratorConfig::with_r_max(mu * 30.0);
        a_cfg.extra_stops = radii.iter().map(|r| mu * r).collect();
        let mut b_cfg = IntegratorConfig::with_r_max(30.0);
        b_cfg.extra_stops = radii.clone();
        let a = solve(&SolitonParams::new(3, 0.0, mu1).unwrap(), SeederKind::Series, &a_cfg).unwrap();
        let b = solve(&SolitonParams::new(3, 0.0, mu * mu1).unwrap(), SeederKind::Series, &b_cfg).unwrap();
        for r in &radii {
            let ha = a.samples.iter().find(|s| s.r == mu * r).unwrap().h;
            let hb = b.samples.iter().find(|s| s.r == *r).unwrap().h;
            prop_assert!((ha - hb).abs() <= 1e-8 * ha.max(1.0), "r={}: {} vs {}", r, ha, hb);
        }
    }
}
