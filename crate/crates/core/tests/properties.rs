use proptest::prelude::*;

use qchart::chart::{build_chart, chart_forward, chart_inverse, ChartConfig};
use qchart::distortion::flow_jacobian;
use qchart::linalg::{dist, norm};
use qchart::seminorms::{estimate_lipschitz, estimate_q, estimate_zygmund};
use qchart::{load_catalog, FlowMap, SamplingConfig, VectorField};

// fields whose flows stay inside their domains from the unit-ish box below for |t| <= 1
const FLOW_FIELDS: &[&str] = &["identity", "rotation2d", "abskink", "constant:1", "constant:2,3"];

fn field(name: &str) -> VectorField {
    load_catalog(name).unwrap().field().unwrap()
}

fn small() -> SamplingConfig {
    SamplingConfig {
        base_points: 40,
        direction_pairs: 60,
        ..SamplingConfig::default()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn group_law_and_reversibility(
        which in 0..FLOW_FIELDS.len(),
        u in prop::collection::vec(-0.4f64..0.4, 3),
        s in -0.5f64..0.5,
        t in -0.5f64..0.5,
    ) {
        let f = field(FLOW_FIELDS[which]);
        let x = &u[..f.dim()];
        let fm = FlowMap::new(f);
        let tol = 5.0 * fm.settings().rel_tol * (1.0 + norm(x));
        let two = fm.flow(&fm.flow(x, t).unwrap(), s).unwrap();
        let one = fm.flow(x, s + t).unwrap();
        prop_assert!(dist(&two, &one) <= tol);
        let back = fm.flow(&fm.flow(x, t).unwrap(), -t).unwrap();
        prop_assert!(dist(&back, x) <= tol);
    }

    #[test]
    fn distortion_report_is_consistent(
        which in 0..FLOW_FIELDS.len(),
        u in prop::collection::vec(-0.4f64..0.4, 3),
        t in -1.0f64..1.0,
    ) {
        let f = field(FLOW_FIELDS[which]);
        let x = &u[..f.dim()];
        let r = flow_jacobian(&FlowMap::new(f), x, t, None).unwrap();
        prop_assert!(r.min_norm <= r.op_norm);
        prop_assert!(r.k_estimate >= 1.0);
    }

    #[test]
    fn seminorms_are_lower_bounds_reached_by_witnesses(seed in any::<u64>(), which in 0..4usize) {
        let name = ["xloga", "abskink", "rotation2d", "linear"][which];
        let f = field(name);
        let cfg = SamplingConfig { rng_seed: seed, ..small() };
        for est in [
            estimate_q(&f, &cfg).unwrap(),
            estimate_zygmund(&f, &cfg).unwrap(),
            estimate_lipschitz(&f, &cfg).unwrap(),
        ] {
            prop_assert!(est.value >= 0.0);
            prop_assert_eq!(est.recompute(&f).unwrap().to_bits(), est.value.to_bits());
        }
    }

    #[test]
    fn parabola_chart_round_trip(x in prop::collection::vec(-0.25f64..0.25, 3)) {
        let e = load_catalog("graph-parabola3d").unwrap().plane().unwrap();
        let c = build_chart(&e, &[0.0; 3], &ChartConfig::default()).unwrap();
        let x: Vec<f64> = x.iter().map(|v| v * c.eps() / 0.25).collect();
        let q = chart_forward(&c, &x).unwrap();
        // the slice through q is a translate of the graph
        prop_assert!((q[2] - x[2] - 0.5 * (q[0] * q[0] + q[1] * q[1])).abs() < 1e-6);
        prop_assert!(dist(&chart_inverse(&c, &q).unwrap(), &x) <= 1e-6 * (1.0 + norm(&x)));
    }
}

#[test]
fn more_effort_never_lowers_an_estimate() {
    for name in ["xloga", "abskink", "xloga1d"] {
        let f = field(name);
        let base = small();
        let a = estimate_q(&f, &base).unwrap().value;
        let b = estimate_q(&f, &base.scaled(2)).unwrap().value;
        assert!(b >= a, "{name}: {a} then {b}");
    }
}

#[test]
fn chain_inequality_on_every_example() {
    for name in qchart::catalog::FIELD_EXAMPLES {
        let f = field(name);
        let cfg = small();
        let q = estimate_q(&f, &cfg).unwrap().value;
        let z = estimate_zygmund(&f, &cfg).unwrap().value;
        let l = estimate_lipschitz(&f, &cfg).unwrap().value;
        assert!(z <= 4.0 * q * 1.05, "{name}: Z {z} Q {q}");
        assert!(4.0 * q <= 8.0 * l * 1.05, "{name}: Q {q} L {l}");
    }
}
