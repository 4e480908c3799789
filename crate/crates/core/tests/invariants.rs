use magtube::config::{GeometryRegistry, KeyValues, RunConfig};
use magtube::flow::{flow_complex, flow_real, ComplexTime, FlowOptions};
use magtube::geometry::{make_flat_magnetic, make_sphere_magnetic, ChartedGeometry, PhasePoint};
use magtube::intertwine::check_flow_reversal;
use magtube::linalg::C;
use magtube::oracles::{
    chart_to_embedding, flat_flow_oracle, sphere_flow_oracle, sphere_moment_map, FlatParams, SphereState,
};
use magtube::structure::{frame_at, transversality_check};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn planar(b: f64, m: f64) -> ChartedGeometry {
    make_flat_magnetic(2, DMatrix::from_row_slice(2, 2, &[0.0, b, -b, 0.0]), m).unwrap()
}

fn coord() -> impl Strategy<Value = f64> {
    -1.5..1.5f64
}

fn plane_point() -> impl Strategy<Value = PhasePoint> {
    (coord(), coord(), coord(), coord()).prop_map(|(x1, x2, p1, p2)| PhasePoint::real(&[x1, x2], &[p1, p2]))
}

/// Complex time inside the disk of radius `r`.
fn disk_time(r: f64) -> impl Strategy<Value = C> {
    (0.0..r, 0.0..std::f64::consts::TAU).prop_map(|(m, a)| C::from_polar(m, a))
}

fn opts() -> FlowOptions {
    FlowOptions::default().without_jacobian()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn flat_engine_equals_closed_form(b in -2.0..2.0f64, m in 0.5..1.5f64, z in plane_point(), s in disk_time(1.2)) {
        let geo = planar(b, m);
        let engine = flow_complex(&geo, &z, &ComplexTime::new(s), &opts()).unwrap();
        let oracle = flat_flow_oracle(FlatParams::new(b, m).unwrap(), &z, s).unwrap();
        prop_assert!(engine.z.distance(&oracle) < 1e-8);
    }

    #[test]
    fn flow_group_law(b in -2.0..2.0f64, z in plane_point(), s1 in disk_time(0.6), s2 in disk_time(0.6)) {
        let geo = planar(b, 1.0);
        let direct = flow_complex(&geo, &z, &ComplexTime::new(s1 + s2), &opts()).unwrap();
        let first = flow_complex(&geo, &z, &ComplexTime::new(s1), &opts()).unwrap();
        let second = flow_complex(&geo, &first.z, &ComplexTime::new(s2), &opts()).unwrap();
        prop_assert!(direct.z.distance(&second.z) < 1e-9);
    }

    #[test]
    fn fiber_inversion_reverses_the_flow(b in -2.0..2.0f64, z in plane_point(), sigma in -1.0..1.0f64) {
        let geo = planar(b, 1.0);
        prop_assert!(check_flow_reversal(&geo, &z, sigma, &opts()).unwrap() < 1e-9);
    }

    #[test]
    fn real_flow_conserves_sphere_moment_map(u1 in -1.0..1.0f64, u2 in -1.0..1.0f64, p1 in -1.0..1.0f64, p2 in -1.0..1.0f64, sigma in -0.4..0.4f64) {
        let (r, b) = (1.1, 0.6);
        let geo = make_sphere_magnetic(r, b).unwrap();
        let z = PhasePoint::real(&[u1, u2], &[p1, p2]);
        let Ok(end) = flow_real(&geo, &z, sigma, &FlowOptions::default()) else {
            return Ok(());
        };
        let j0 = sphere_moment_map(&chart_to_embedding(&z, r, b));
        let j1 = sphere_moment_map(&chart_to_embedding(&end.z, r, b));
        prop_assert!((j0 - j1).iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-9);
    }

    #[test]
    fn rotation_oracle_stays_on_the_complex_sphere(x in prop::array::uniform3(-1.0..1.0f64), q in prop::array::uniform3(-1.0..1.0f64), s in disk_time(1.2)) {
        let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        prop_assume!(norm > 1e-2);
        let r = 1.4;
        let x = x.map(|v| v * r / norm);
        let k = (q[0] * x[0] + q[1] * x[1] + q[2] * x[2]) / (r * r);
        let p: [f64; 3] = std::array::from_fn(|i| q[i] - k * x[i]);
        let start = SphereState::real(x, p, r, 0.8);
        let end = sphere_flow_oracle(&start, s);
        prop_assert!(end.constraint_residual() < 1e-12);
        let dj = sphere_moment_map(&end) - sphere_moment_map(&start);
        prop_assert!(dj.iter().map(|v| v.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn frame_at_i_is_lagrangian_and_transverse(b in -1.5..1.5f64, z in plane_point()) {
        let geo = planar(b, 1.0);
        let frame = frame_at(&geo, &z, &ComplexTime::new(C::new(0.0, 1.0)), &FlowOptions::default()).unwrap();
        prop_assert!(frame.lagrangian_residual() < 1e-8);
        prop_assert!(transversality_check(&frame) > 1e-6);
    }

    #[test]
    fn complex_time_literals_round_trip(a in -1.0..1.0f64, b in -1.0..1.0f64, w in -1.0..1.0f64) {
        let t = ComplexTime::via(&[C::new(w, 0.0)], C::new(a, b));
        prop_assert_eq!(t.to_string().parse::<ComplexTime>().unwrap(), t);
    }

    #[test]
    fn grid_has_the_product_of_axis_counts(n1 in 1usize..5, n2 in 1usize..5, n3 in 1usize..4) {
        let text = format!("kind = flat\nB = 0 1; -1 0\ngrid.x1 = -1 1 {n1}\ngrid.x2 = -1 1 {n2}\ngrid.p1 = 0 1 {n3}\ngrid.p2 = 0.5\n");
        let cfg = RunConfig::parse(&text, &GeometryRegistry::default()).unwrap();
        let points = cfg.grid_points();
        prop_assert_eq!(points.len(), n1 * n2 * n3);
        prop_assert!(points.iter().all(|p| p.len() == 4 && p[3] == 0.5));
    }

    #[test]
    fn later_keys_override_through_set(seed in any::<u64>()) {
        let mut kv = KeyValues::parse("kind = flat\nseed = 1\n").unwrap();
        kv.set("seed", seed.to_string());
        let cfg = RunConfig::from_keys(&kv, &GeometryRegistry::default()).unwrap();
        prop_assert_eq!(cfg.seed, seed);
    }
}
