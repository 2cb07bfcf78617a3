use std::collections::BTreeMap;

use nesslab_cli::experiments::row_count;
use nesslab_cli::{format_float, parse_config, run, AxisSpec, Experiment, Status, SweepConfig};
use proptest::prelude::*;

fn axis() -> impl Strategy<Value = AxisSpec> {
    prop_oneof![
        (-10.0..10.0f64, -10.0..10.0f64, 1usize..50).prop_map(|(start, stop, count)| AxisSpec::Range { start, stop, count }),
        prop::collection::vec(-10.0..10.0f64, 1..6).prop_map(|values| AxisSpec::List { values }),
    ]
}

fn dicke_config() -> impl Strategy<Value = SweepConfig> {
    (0.1..3.0f64, 0.1..3.0f64, 0.0..2.0f64, axis(), axis(), prop::option::of(1usize..16)).prop_map(
        |(omega, big_omega, lambda2, gamma, lambda1, workers)| {
            let params = BTreeMap::from([("omega".into(), omega), ("big_omega".into(), big_omega), ("lambda2".into(), lambda2)]);
            let grid = BTreeMap::from([("gamma".into(), gamma), ("lambda1".into(), lambda1)]);
            SweepConfig {
                experiment: Experiment::DickeStability,
                output: None,
                workers,
                params,
                grid,
                truncation: BTreeMap::new(),
                tolerances: BTreeMap::new(),
                options: BTreeMap::new(),
            }
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn floats_round_trip(bits in any::<u64>()) {
        let x = f64::from_bits(bits);
        let s = format_float(x);
        if x.is_nan() {
            prop_assert_eq!(s, "NaN");
        } else {
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits(), "{} -> {}", x, s);
        }
    }

    #[test]
    fn configs_round_trip(cfg in dicke_config()) {
        let back = parse_config(&cfg.to_toml()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn axis_points_match_count(a in axis()) {
        let pts = a.points();
        prop_assert_eq!(pts.len(), a.count());
        if let AxisSpec::Range { start, stop, count } = a {
            prop_assert_eq!(pts[0], start);
            if count > 1 {
                prop_assert_eq!(pts[count - 1], stop);
            }
        }
    }

    #[test]
    fn rows_cover_the_grid_without_stray_nan(cfg in dicke_config()) {
        // negative draws make invalid parameters; those rows must be flagged, not dropped
        let r = run(&cfg, 1);
        prop_assert_eq!(r.rows.len(), row_count(&cfg));
        for row in &r.rows {
            if row.status == Status::Ok {
                prop_assert!(row.values.iter().all(|v| !v.is_nan()));
            }
        }
    }
}
