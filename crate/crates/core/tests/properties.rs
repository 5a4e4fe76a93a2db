use nalgebra::DVector;
use proptest::prelude::*;

use vharm::conformality::{phwc_commutator_residual_at, phwc_residual_at, HermitianTargetMap};
use vharm::flow::{flow_step, FlowConfig, GridMap};
use vharm::geometry::{
    christoffel_at, metric_compat_residual_at, ComplexStructureField, MetricField,
};
use vharm::jetcalc::{
    fd_map_jet, jet_discrepancy, map_jet, DomainBox, Hyper, MapExpr, Real, DEFAULT_FD_STEP,
};
use vharm::linalg::g_inner;
use vharm::maptension::{adjoint_differential_at, differential_at, tension_at};
use vharm::scenarios::{catalogue, run_scenario, sample_points, Registry, RunOptions};

fn test_map() -> MapExpr {
    MapExpr::new(
        "test-map",
        DomainBox::cube(3, -2.0, 2.0),
        2,
        |x: &[Hyper]| {
            vec![
                x[0] * x[1].sin() + x[2].exp() * 0.5,
                (x[0] * x[0] + x[2]).cos() * x[1] - x[2].powi(3),
            ]
        },
    )
}

fn point(dim: usize, r: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-r..r, dim)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jets_agree_with_finite_differences(p in point(3, 1.8)) {
        let m = test_map();
        let exact = map_jet(&m, &p).unwrap();
        let fd = fd_map_jet(&m, &p, DEFAULT_FD_STEP).unwrap();
        prop_assert!(jet_discrepancy(&exact, &fd) < 1e-6);
        for h in &exact.hess {
            prop_assert!((h - h.transpose()).amax() < 1e-12);
        }
    }

    #[test]
    fn adjoint_differential_is_adjoint(p in point(3, 1.0), x in point(3, 1.0), y in point(3, 1.0)) {
        let cat = catalogue();
        let phi = &cat.map("sphere-embedding").unwrap().riemannian;
        let q = vec![p[0] * 2.0, p[1] * 2.0];
        let x = DVector::from_vec(x[..2].to_vec());
        let y = DVector::from_vec(y);
        let g = phi.source().matrix_at(&q).unwrap();
        let h = phi.target().matrix_at(&phi.map().values(&q).unwrap()).unwrap();
        let lhs = g_inner(&g, &(adjoint_differential_at(phi, &q).unwrap() * &y), &x);
        let rhs = g_inner(&h, &y, &(differential_at(phi, &q).unwrap() * &x));
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
    }

    #[test]
    fn christoffel_symbols_are_symmetric_and_compatible(p in point(6, 1.4)) {
        let cat = catalogue();
        let g = cat.metric("s2xs2xh2").unwrap();
        let q = vec![p[0], p[1], p[2], p[3], p[4], 1.5 + 0.5 * p[5]];
        prop_assert!(christoffel_at(g, &q).unwrap().lower_asymmetry() < 1e-12);
        prop_assert!(metric_compat_residual_at(g, &q).unwrap() < 1e-9);
    }

    #[test]
    fn sphere_christoffel_matches_conformal_closed_form(p in point(2, 3.0)) {
        // g = e^{2f} δ with f = ln 2 − ln(1 + r²), so ∂_i f = −2 x_i / (1 + r²).
        let cat = catalogue();
        let gamma = christoffel_at(cat.metric("sphere-stereo").unwrap(), &p).unwrap();
        let r2 = p[0] * p[0] + p[1] * p[1];
        let df = [-2.0 * p[0] / (1.0 + r2), -2.0 * p[1] / (1.0 + r2)];
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let expect = d(i, k) * df[j] + d(j, k) * df[i] - d(i, j) * df[k];
                    prop_assert!((gamma.get(k, i, j) - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn hopf_coordinate_projection_tension_is_lee_drift(q in point(4, 0.95)) {
        // For a holomorphic map out of δ/|z|² on C², τ = dφ(B) with B = −2x.
        let p = vec![q[0], q[1], 1.0 + 0.5 * q[2], q[3]];
        let cat = catalogue();
        let phi = &cat.map("hopf-z1-flat").unwrap().riemannian;
        let tau = tension_at(phi, &p).unwrap();
        prop_assert!((tau[0] + 2.0 * p[0]).abs() < 1e-10);
        prop_assert!((tau[1] + 2.0 * p[1]).abs() < 1e-10);
    }

    #[test]
    fn phwc_residuals_vanish_together(
        a in (-1.0..1.0f64, -1.0..1.0f64),
        b in (-1.0..1.0f64, -1.0..1.0f64),
        eps in prop_oneof![Just(0.0), 0.2..1.0f64],
        p in point(4, 1.0),
    ) {
        prop_assume!(a.0.abs() + a.1.abs() + b.0.abs() + b.1.abs() > 0.3);
        // w = a z1 + b z2 + eps x1: complex linear exactly when eps = 0.
        let map = MapExpr::new("linear", DomainBox::cube(4, -2.0, 2.0), 2, move |x: &[Hyper]| {
            vec![
                x[0] * a.0 - x[1] * a.1 + x[2] * b.0 - x[3] * b.1 + x[0] * eps,
                x[0] * a.1 + x[1] * a.0 + x[2] * b.1 + x[3] * b.0,
            ]
        });
        let target = ComplexStructureField::standard(MetricField::flat(2, DomainBox::cube(2, -20.0, 20.0))).unwrap();
        let phi = HermitianTargetMap::new(MetricField::flat(4, DomainBox::cube(4, -2.0, 2.0)), target, map).unwrap();
        let r = phwc_residual_at(&phi, &p).unwrap();
        let c = phwc_commutator_residual_at(&phi, &p).unwrap();
        if eps == 0.0 {
            prop_assert!(r < 1e-12 && c < 1e-12);
        } else {
            prop_assert!(r > 1e-4 && c > 1e-4);
        }
    }

    #[test]
    fn flow_commutes_with_grid_translation(
        amp in 0.0..0.2f64,
        phase in 0.0..6.0f64,
        di in 0usize..8,
        dj in 0usize..8,
    ) {
        let cat = catalogue();
        let target = cat.metric("sphere-stereo").unwrap().clone();
        let gm = GridMap::from_fn(8, 8, target, |x, y| {
            vec![0.2 + amp * (6.3 * x + phase).sin(), -0.1 + amp * (6.3 * y).cos() * (6.3 * x).sin()]
        })
        .unwrap();
        let cfg = FlowConfig {
            step: FlowConfig::default_step(8, 8),
            max_iters: 0,
            tol: 1e-4,
            drift: None,
            record_every: 1,
        };
        let mut a = gm.clone();
        let mut b = gm.shifted(di, dj);
        for _ in 0..5 {
            a = flow_step(&a, &cfg).unwrap();
            b = flow_step(&b, &cfg).unwrap();
        }
        let a = a.shifted(di, dj);
        let diff = a.values().iter().zip(b.values()).fold(0.0f64, |w, (u, v)| w.max((u - v).abs()));
        prop_assert!(diff < 1e-12);
    }

    #[test]
    fn sampling_respects_domain_and_exclusions(seed in any::<u64>()) {
        let cat = catalogue();
        let d = cat.domain("hopf-c2-shell").unwrap();
        for p in sample_points(d, 50, seed).unwrap() {
            prop_assert!(d.accepts(&p));
            prop_assert!(p.iter().map(|x| x * x).sum::<f64>().sqrt() >= 0.25);
        }
    }
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let d = catalogue().domain("unit-cube-r3").unwrap();
    assert_eq!(
        sample_points(d, 20, 7).unwrap(),
        sample_points(d, 20, 7).unwrap()
    );
    assert_ne!(
        sample_points(d, 20, 7).unwrap(),
        sample_points(d, 20, 8).unwrap()
    );
}

#[test]
fn reports_are_deterministic() {
    let cat = catalogue();
    let reg = Registry::builtin();
    let spec = reg.find("S9").unwrap();
    let opts = RunOptions::default();
    let a = serde_json::to_string(&run_scenario(cat, spec, &opts).unwrap()).unwrap();
    let b = serde_json::to_string(&run_scenario(cat, spec, &opts).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn verdicts_are_stable_across_seeds() {
    let cat = catalogue();
    let reg = Registry::builtin();
    for name in ["S4", "S5", "S6", "S7", "S8"] {
        let spec = reg.find(name).unwrap();
        let verdicts: Vec<Vec<bool>> = (0..5)
            .map(|seed| {
                let opts = RunOptions {
                    points: Some(30),
                    seed: Some(1000 + seed),
                    tol: None,
                };
                run_scenario(cat, spec, &opts)
                    .unwrap()
                    .checks
                    .iter()
                    .map(|c| c.passed)
                    .collect()
            })
            .collect();
        assert!(
            verdicts.windows(2).all(|w| w[0] == w[1]),
            "{name}: {verdicts:?}"
        );
    }
}
