//! Property tests over randomized inputs.

use hamilton_green::amplitude::{attenuations, jacobian_ode, reversed_density};
use hamilton_green::io::{field_from_bytes, field_to_bytes, series_from_bytes, series_to_bytes};
use hamilton_green::medium::{make_lens_medium, make_vessel_phantom, AnalyticLens};
use hamilton_green::operators::{adjoint_all, forward_all};
use hamilton_green::ray_kernel::{reverse_ray, shoot_cone, trace_cone_ray};
use hamilton_green::{
    CartesianGrid2D, HgConfig, MediumModel, PressureTimeSeries, ScalarField2D, SensorArray, Vec2,
};
use proptest::prelude::*;

fn small_grid() -> CartesianGrid2D {
    CartesianGrid2D::square(24, 32, 0.5e-3).unwrap()
}

fn small_config(grid: &CartesianGrid2D) -> HgConfig {
    let mut cfg = HgConfig::reference(grid);
    cfg.n_rays = 64;
    cfg.nt = 120;
    cfg
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nearest_snap_is_idempotent(fx in -0.2f64..1.2, fy in -0.2f64..1.2) {
        let g = small_grid();
        let e = g.extent();
        let x = g.origin + Vec2::new(fx * e.x, fy * e.y);
        if let Some((i, j)) = g.nearest_node(x) {
            prop_assert_eq!(g.nearest_node(g.node(i, j)), Some((i, j)));
            prop_assert!((g.node(i, j) - x).abs().x <= 0.5 * g.dx + 1e-15);
        } else {
            prop_assert!(!g.contains(x));
        }
    }

    #[test]
    fn gradient_is_exact_on_affine_fields(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -1.0f64..1.0) {
        let g = small_grid();
        let f = ScalarField2D::from_fn(g, |x| a * x.x + b * x.y + c);
        let (gx, gy) = f.gradient();
        for (u, v) in gx.values.iter().zip(&gy.values) {
            prop_assert!((u - a).abs() <= 1e-9 * (1.0 + a.abs()));
            prop_assert!((v - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn phantom_stays_in_bounds(nx in 8usize..40, ny in 8usize..60, h in 0.2e-3f64..1.0e-3) {
        let g = CartesianGrid2D::square(nx, ny, h).unwrap();
        let (m, u0) = make_vessel_phantom(g).unwrap();
        prop_assert!(m.c_min >= 1350.0 && m.c_max <= 1650.0);
        prop_assert!(u0.values.iter().all(|v| (0.0..=1.0).contains(v)));
        for (c, e) in m.sound_speed.values.iter().zip(&m.slowness.values) {
            prop_assert!((c * e - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn attenuation_times_reversed_is_one(theta in 0.0f64..std::f64::consts::TAU) {
        let g = CartesianGrid2D::square(101, 101, 0.2e-3).unwrap();
        let m = make_lens_medium(g, 0.1).unwrap();
        let ray = trace_cone_ray(&m, Vec2::new(10e-3, 10e-3), theta, 50e-9, 8e-6, 0.2e-3);
        let d = jacobian_ode(&m, &ray, 0.2e-3);
        let a = attenuations(&ray, &d, &m);
        for (x, y) in a.mu.iter().zip(&a.mu_r) {
            if x.is_finite() && y.is_finite() {
                prop_assert!((x * y - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn reversal_is_an_involution(theta in 0.0f64..std::f64::consts::TAU, t in 2e-6f64..10e-6) {
        let g = CartesianGrid2D::square(101, 101, 0.2e-3).unwrap();
        let lens = AnalyticLens::centered(g, 0.1);
        let ray = trace_cone_ray(&lens, Vec2::new(10e-3, 10e-3), theta, 50e-9, t, 0.2e-3);
        prop_assume!(ray.exited_at.is_none());
        let back = reverse_ray(&reverse_ray(&ray));
        prop_assert_eq!(&back.samples, &ray.samples);
        let d = jacobian_ode(&lens, &ray, 0.2e-3);
        let dr = reversed_density(&d).unwrap();
        let n = d.q.len() - 1;
        for j in 0..=n {
            let rhs = d.q[n - j];
            prop_assert!((dr.q[j] * d.q[n] - rhs).abs() <= 2.0 * f64::EPSILON * rhs.abs());
        }
    }

    #[test]
    fn field_bytes_round_trip(nx in 2usize..12, ny in 2usize..12, seed in any::<u64>()) {
        let g = CartesianGrid2D::new(nx, ny, 1e-4, 2e-4, Vec2::new(-1e-3, 3e-3)).unwrap();
        let mut s = seed;
        let f = ScalarField2D::from_fn(g, |_| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            f64::from_bits(s >> 2) - 1.0
        });
        prop_assert_eq!(field_from_bytes(&field_to_bytes(&f)).unwrap(), f);
    }

    #[test]
    fn series_bytes_round_trip(values in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 5), 1..6)) {
        let s: Vec<PressureTimeSeries> = values
            .into_iter()
            .enumerate()
            .map(|(m, v)| PressureTimeSeries { sensor_index: m, dt: 50e-9, values: v })
            .collect();
        prop_assert_eq!(series_from_bytes(&series_to_bytes(&s).unwrap()).unwrap(), s);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn operators_are_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, cx in 0.2f64..0.8, cy in 0.2f64..0.8) {
        let g = small_grid();
        let (m, u) = make_vessel_phantom(g).unwrap();
        let e = g.extent();
        let centre = Vec2::new(cx * e.x, cy * e.y);
        let v = ScalarField2D::from_fn(g, |x| (-(x - centre).norm_squared() / 4e-6).exp());
        let mix = ScalarField2D::new(g, u.values.iter().zip(&v.values).map(|(p, q)| a * p + b * q).collect()).unwrap();
        let sensors = SensorArray::boundary_subset(&g, 3);
        let cfg = small_config(&g);
        let table = cfg.build_table(&m).unwrap();
        let f = |x: &ScalarField2D| forward_all(&m, x, &sensors, &cfg, &table).unwrap();
        let (pu, pv, pm) = (f(&u), f(&v), f(&mix));
        let scale = pu.iter().chain(&pv).flat_map(|s| s.values.iter()).fold(0.0f64, |s, v| s.max(v.abs()));
        for ((x, y), z) in pu.iter().zip(&pv).zip(&pm) {
            for ((p, q), r) in x.values.iter().zip(&y.values).zip(&z.values) {
                prop_assert!((a * p + b * q - r).abs() <= 1e-12 * scale * (1.0 + a.abs() + b.abs()));
            }
        }
        let data: Vec<PressureTimeSeries> = pu
            .iter()
            .zip(&pv)
            .map(|(x, y)| PressureTimeSeries {
                sensor_index: x.sensor_index,
                dt: x.dt,
                values: x.values.iter().zip(&y.values).map(|(p, q)| a * p + b * q).collect(),
            })
            .collect();
        let adj = |d: &[PressureTimeSeries]| adjoint_all(&m, d, &sensors, &cfg, &table, false).unwrap();
        let (au, av, am) = (adj(&pu), adj(&pv), adj(&data));
        let scale = au.values.iter().chain(&av.values).fold(0.0f64, |s, v| s.max(v.abs()));
        for ((p, q), r) in au.values.iter().zip(&av.values).zip(&am.values) {
            prop_assert!((a * p + b * q - r).abs() <= 1e-12 * scale * (1.0 + a.abs() + b.abs()));
        }
    }
}

#[test]
fn homogeneous_cones_have_no_maslov_index() {
    let g = CartesianGrid2D::square(81, 81, 0.25e-3).unwrap();
    let m = MediumModel::homogeneous(g, 1500.0).unwrap();
    let cone = shoot_cone(&m, Vec2::new(10e-3, 10e-3), 90, 50e-9, 10e-6, 0.25e-3);
    for ray in &cone.rays {
        assert!(jacobian_ode(&m, ray, 0.25e-3).maslov.iter().all(|k| *k == 0));
    }
}
