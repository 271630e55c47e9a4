//! Physical checks of the finite-difference reference solver.

use hamilton_green::metrics::linf;
use hamilton_green::oracle::{fdtd_adjoint, fdtd_forward, fdtd_forward_monitored, FdtdConfig};
use hamilton_green::{CartesianGrid2D, MediumModel, PressureTimeSeries, ScalarField2D, SensorArray, TimeWindow, Vec2};

const C: f64 = 1500.0;

fn gaussian(grid: CartesianGrid2D, centre: Vec2, sigma: f64) -> ScalarField2D {
    ScalarField2D::from_fn(grid, |x| (-(x - centre).norm_squared() / (sigma * sigma)).exp())
}

#[test]
fn front_arrives_at_r_over_c() {
    let grid = CartesianGrid2D::square(161, 161, 0.1e-3).unwrap();
    let medium = MediumModel::homogeneous(grid, C).unwrap();
    let src = Vec2::new(4e-3, 8e-3);
    let u0 = gaussian(grid, src, 0.1e-3);
    let dt = 50e-9;
    let sensors = SensorArray::new(vec![Vec2::new(10e-3, 8e-3), Vec2::new(8e-3, 11e-3)]);
    let cfg = FdtdConfig::for_medium(&medium, dt, 1).unwrap();
    let out = fdtd_forward(&medium, &u0, &sensors, dt, 8e-6, &cfg).unwrap();
    for (s, &x) in out.iter().zip(&sensors.positions) {
        let peak = s.values.iter().enumerate().fold((0, 0.0f64), |b, (k, v)| if *v > b.1 { (k, *v) } else { b }).0;
        let expect = (x - src).norm() / C / dt;
        assert!((peak as f64 - expect).abs() <= 2.0, "peak at sample {peak}, expected {expect:.1}");
    }
}

#[test]
fn energy_is_conserved_then_absorbed() {
    let grid = CartesianGrid2D::square(81, 81, 0.2e-3).unwrap();
    let medium = MediumModel::homogeneous(grid, C).unwrap();
    let u0 = gaussian(grid, Vec2::new(8e-3, 8e-3), 0.4e-3);
    let dt = 50e-9;
    let cfg = FdtdConfig::for_medium(&medium, dt, 1).unwrap().with_sponge(40, 1e-3, C);
    let sensors = SensorArray::new(vec![Vec2::new(8e-3, 8e-3)]);
    let (_, trace) = fdtd_forward_monitored(&medium, &u0, &sensors, dt, 600, &cfg).unwrap();
    for w in trace.total.windows(2) {
        assert!(w[1] <= w[0] * 1.001, "total energy grew: {} -> {}", w[0], w[1]);
    }
    let peak = trace.interior.iter().cloned().fold(0.0, f64::max);
    let last = *trace.interior.last().unwrap();
    let db = 10.0 * (peak / last).log10();
    assert!(db >= 40.0, "interior energy decayed by only {db:.1} dB");
}

#[test]
fn adjoint_of_a_pulse_is_an_annulus() {
    let grid = CartesianGrid2D::square(161, 161, 0.1e-3).unwrap();
    let medium = MediumModel::homogeneous(grid, C).unwrap();
    let dt = 25e-9;
    let nt = 241;
    let sensor = Vec2::new(8e-3, 8e-3);
    let sensors = SensorArray::new(vec![sensor]);
    let t_pulse = 3.5e-6;
    // a few cells wide, so grid dispersion does not break up the ring
    let width = 8.0 * dt;
    let values = (0..nt).map(|k| (-((k as f64 * dt - t_pulse) / width).powi(2)).exp()).collect();
    let data = vec![PressureTimeSeries { sensor_index: 0, dt, values }];
    let window = TimeWindow::for_samples(nt, dt, 0.02);
    let cfg = FdtdConfig::for_medium(&medium, dt, 1).unwrap();
    let v = fdtd_adjoint(&medium, &data, &sensors, &window, dt, &cfg).unwrap();
    let (mut best, mut k_best) = (0.0, 0);
    for (k, x) in v.values.iter().enumerate() {
        if x.abs() > best {
            best = x.abs();
            k_best = k;
        }
    }
    let node = grid.node(k_best % grid.nx, k_best / grid.nx);
    let r = (node - sensor).norm();
    // injected at reversed time T - t_pulse, the pulse runs for t_pulse
    let expect = C * t_pulse;
    assert!((r - expect).abs() <= 2.0 * grid.dx, "ring at {r:.3e} m, expected {expect:.3e} m");
}

#[test]
fn zero_data_gives_zero_field() {
    let grid = CartesianGrid2D::square(31, 31, 0.2e-3).unwrap();
    let medium = MediumModel::homogeneous(grid, C).unwrap();
    let dt = 50e-9;
    let sensors = SensorArray::new(vec![Vec2::new(1e-3, 2e-3)]);
    let data = vec![PressureTimeSeries { sensor_index: 0, dt, values: vec![0.0; 50] }];
    let cfg = FdtdConfig::for_medium(&medium, dt, 1).unwrap();
    let v = fdtd_adjoint(&medium, &data, &sensors, &TimeWindow::for_samples(50, dt, 0.1), dt, &cfg).unwrap();
    assert_eq!(linf(&v.values), 0.0);
}

/// Series at a shared node on grids h, h/2, h/4 with dt tied to h.
#[test]
fn refinement_converges_at_second_order() {
    let len = 9.6e-3;
    let src = Vec2::new(3.2e-3, 4.8e-3);
    let sensor = Vec2::new(6.4e-3, 4.8e-3);
    let dt_rec = 100e-9;
    let t_end = 4e-6;
    let mut series = Vec::new();
    for f in [1usize, 2, 4] {
        let h = 0.2e-3 / f as f64;
        let n = (len / h).round() as usize + 1;
        let grid = CartesianGrid2D::square(n, n, h).unwrap();
        let medium = MediumModel::homogeneous(grid, C).unwrap();
        let u0 = gaussian(grid, src, 0.6e-3);
        let dt_o = 25e-9 / f as f64;
        let cfg = FdtdConfig::new(grid, dt_o, 20, 0.0, C).unwrap();
        let s = fdtd_forward(&medium, &u0, &SensorArray::new(vec![sensor]), dt_rec, t_end, &cfg).unwrap();
        series.push(s[0].values.clone());
    }
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let e1 = diff(&series[0], &series[1]);
    let e2 = diff(&series[1], &series[2]);
    let order = (e1 / e2).log2();
    assert!(order >= 2.0 - 0.1, "observed order {order:.2} (differences {e1:.3e}, {e2:.3e})");
}
