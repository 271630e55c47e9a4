//! Ray-based forward and adjoint PAT operators.
//!
//! Per sensor, a cone of rays parametrizes the domain by travel time `l` and
//! shooting angle `theta`. The forward operator integrates `u0` over each
//! isotime curve and convolves the result with the sensor-speed kernel; the
//! adjoint correlates the data with the same kernel once and spreads the
//! result back along the rays, then onto the grid by nearest ray sample.
//!
//! Weights. With `q` the geometric Jacobian `dx/d(l, theta)` (`q0 = delta_x
//! c0` at the initial point times the relative `q` of [`RayDensity`]) and
//! `mu = (eta0/eta) sqrt(q0/q)`, a ray sample carries
//! `eta^2 q mu = eta0 eta sqrt(q0 q)` in the forward sum, and the adjoint value
//! at a sample is `mu` times the data correlation. The two are transposes of
//! each other under `<u, v> = sum eta^2 u v dx dy` (the inner product in which
//! the wave-equation adjoint `v(T)` is the adjoint).

use rayon::prelude::*;

use crate::amplitude::{
    attenuations, jacobian_ode, jacobian_proximal_in_cone, JacobianMethod, RayDensity,
};
use crate::error::{Error, Result};
use crate::greens::{DeltaRep, GreensTable, KernelPair};
use crate::medium::{CartesianGrid2D, Medium, MediumModel, ScalarField2D, Vec2};
use crate::ray_kernel::{shoot_cone, RayCone};

/// Point detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorArray {
    pub positions: Vec<Vec2>,
}

impl SensorArray {
    pub fn new(positions: Vec<Vec2>) -> Self {
        Self { positions }
    }

    /// Every boundary node, counter-clockwise from the origin corner.
    pub fn boundary(grid: &CartesianGrid2D) -> Self {
        let (nx, ny) = (grid.nx, grid.ny);
        let mut p = Vec::with_capacity(2 * (nx + ny) - 4);
        p.extend((0..nx).map(|i| grid.node(i, 0)));
        p.extend((1..ny).map(|j| grid.node(nx - 1, j)));
        p.extend((0..nx - 1).rev().map(|i| grid.node(i, ny - 1)));
        p.extend((1..ny - 1).rev().map(|j| grid.node(0, j)));
        Self { positions: p }
    }

    /// `n` boundary nodes spread evenly along the perimeter.
    pub fn boundary_subset(grid: &CartesianGrid2D, n: usize) -> Self {
        let all = Self::boundary(grid).positions;
        let positions = (0..n).map(|k| all[k * all.len() / n.max(1)]).collect();
        Self { positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Positions must lie in the grid's node box (half-cell tolerance).
    pub fn validate(&self, grid: &CartesianGrid2D) -> Result<()> {
        match self.positions.iter().position(|p| !grid.contains(*p)) {
            Some(k) => Err(Error::Argument(format!("sensor {k} lies outside the domain"))),
            None => Ok(()),
        }
    }
}

/// Recorded pressure at one sensor, `values[k]` at `t = k dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureTimeSeries {
    pub sensor_index: usize,
    pub dt: f64,
    pub values: Vec<f64>,
}

/// Raised-cosine measurement window on `[0, t_end]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub t_end: f64,
    pub taper_fraction: f64,
}

impl TimeWindow {
    /// Window whose ends fall on the first and last of `nt` samples.
    pub fn for_samples(nt: usize, dt: f64, taper_fraction: f64) -> Self {
        Self { t_end: (nt.max(2) - 1) as f64 * dt, taper_fraction }
    }

    pub fn sampled(&self, nt: usize, dt: f64) -> Vec<f64> {
        (0..nt).map(|k| time_window(self, k as f64 * dt)).collect()
    }
}

/// Window value at `t`: 0 at both ends, 1 on the plateau, raised-cosine
/// tapers of width `taper_fraction * t_end`.
pub fn time_window(w: &TimeWindow, t: f64) -> f64 {
    if !(t > 0.0 && t < w.t_end) {
        return 0.0;
    }
    let tw = w.taper_fraction * w.t_end;
    let edge = t.min(w.t_end - t);
    if edge >= tw {
        1.0
    } else {
        0.5 * (1.0 - (std::f64::consts::PI * edge / tw).cos())
    }
}

/// Settings shared by the ray operators.
#[derive(Debug, Clone, PartialEq)]
pub struct HgConfig {
    /// Time step of rays, kernels and data, s.
    pub dt: f64,
    /// Samples per series.
    pub nt: usize,
    pub n_rays: usize,
    /// Ray start offset from the sensor, m.
    pub delta_x: f64,
    pub jacobian: JacobianMethod,
    pub taper_fraction: f64,
    /// Speed ladder increment for the kernel table, m/s.
    pub delta_c: f64,
    pub rep: DeltaRep,
}

impl HgConfig {
    /// Reference experiment: 50 ns, 800 samples (40 us), 2000 rays, one-cell offset.
    pub fn reference(grid: &CartesianGrid2D) -> Self {
        let dt = 50e-9;
        Self {
            dt,
            nt: 800,
            n_rays: 2000,
            delta_x: grid.dx,
            jacobian: JacobianMethod::Ode,
            taper_fraction: 0.1,
            delta_c: 10.0,
            rep: DeltaRep::gaussian(2.0 * dt),
        }
    }

    pub fn window(&self) -> TimeWindow {
        TimeWindow::for_samples(self.nt, self.dt, self.taper_fraction)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.dt > 0.0
            && self.nt >= 2
            && self.n_rays >= 3
            && self.delta_x > 0.0
            && self.delta_c > 0.0
            && self.rep.eps > 0.0
            && self.taper_fraction > 0.0
            && self.taper_fraction <= 0.5;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid ray operator settings: {self:?}")))
        }
    }

    /// Kernel table spanning the medium's speed bounds.
    pub fn build_table(&self, medium: &MediumModel) -> Result<GreensTable> {
        crate::greens::build_g0_table(
            medium.c_min,
            medium.c_max,
            self.delta_c,
            self.dt,
            self.nt,
            self.rep,
            self.delta_x,
        )
    }
}

/// A traced cone with its Jacobians and attenuation factors.
#[derive(Debug, Clone)]
pub struct ConeData {
    pub cone: RayCone,
    pub densities: Vec<RayDensity>,
    pub mu: Vec<Vec<f64>>,
}

/// Shoot the cone for `sensor` and compute per-ray densities.
pub fn prepare_cone<M: Medium + ?Sized>(medium: &M, sensor: Vec2, config: &HgConfig) -> ConeData {
    let t_end = config.nt as f64 * config.dt;
    let cone = shoot_cone(medium, sensor, config.n_rays, config.dt, t_end, config.delta_x);
    let densities: Vec<RayDensity> = (0..cone.rays.len())
        .into_par_iter()
        .map(|i| match config.jacobian {
            JacobianMethod::Ode => jacobian_ode(medium, &cone.rays[i], config.delta_x),
            JacobianMethod::Proximal => jacobian_proximal_in_cone(&cone, i),
        })
        .collect();
    let mu = cone
        .rays
        .par_iter()
        .zip(&densities)
        .map(|(ray, d)| {
            if ray.valid().is_empty() {
                Vec::new()
            } else {
                attenuations(ray, d, medium).mu
            }
        })
        .collect();
    ConeData { cone, densities, mu }
}

fn check_compat(cone: &RayCone, table: &GreensTable, dt: f64) -> Result<()> {
    if (cone.dt - table.dt).abs() > 1e-9 * table.dt || (dt - table.dt).abs() > 1e-9 * table.dt {
        return Err(Error::Config(format!(
            "time step mismatch: cone {} s, data {} s, table {} s",
            cone.dt, dt, table.dt
        )));
    }
    if (cone.delta_x - table.delta_x).abs() > 1e-9 * table.delta_x {
        return Err(Error::Config(format!(
            "ray offset mismatch: cone {} m, table {} m",
            cone.delta_x, table.delta_x
        )));
    }
    Ok(())
}

/// Sensor-speed kernel for a cone.
fn sensor_kernel<'t>(medium: &MediumModel, cone: &RayCone, table: &'t GreensTable) -> Result<KernelPair<'t>> {
    let c = medium
        .c_at(cone.sensor)
        .ok_or_else(|| Error::Argument("sensor lies outside the domain".into()))?;
    Ok(table.kernel(table.rung(c)))
}

const RAY_CHUNK: usize = 32;

/// Per-sample forward weights accumulated on the isotime grid, split by
/// Maslov quarter phase: `(w_inphase, w_quadrature)`.
fn isotime_integrals(medium: &MediumModel, u0: &ScalarField2D, data: &ConeData, len: usize) -> (Vec<f64>, Vec<f64>) {
    let cone = &data.cone;
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..cone.rays.len())
        .collect::<Vec<_>>()
        .par_chunks(RAY_CHUNK)
        .map(|chunk| {
            let mut wr = vec![0.0; len];
            let mut wq = vec![0.0; len];
            for &i in chunk {
                let ray = &cone.rays[i];
                let s = ray.valid();
                let d = &data.densities[i];
                let mu = &data.mu[i];
                if s.is_empty() {
                    continue;
                }
                let Some(eta0) = medium.eta(s[0].x) else { continue };
                let q0 = cone.delta_x / eta0;
                for j in 0..d.q.len().min(len) {
                    let q = d.q[j];
                    if q == 0.0 {
                        continue;
                    }
                    let x = s[j].x;
                    let (Some(eta), Ok(u)) = (medium.eta(x), u0.sample_nearest(x)) else { continue };
                    if u == 0.0 {
                        continue;
                    }
                    let w = cone.delta_theta * eta * eta * q0 * q.abs() * mu[j] * u;
                    match d.maslov[j] % 4 {
                        0 => wr[j] += w,
                        1 => wq[j] += w,
                        2 => wr[j] -= w,
                        _ => wq[j] -= w,
                    }
                }
            }
            (wr, wq)
        })
        .collect();
    let mut wr = vec![0.0; len];
    let mut wq = vec![0.0; len];
    for (a, b) in partial {
        for j in 0..len {
            wr[j] += a[j];
            wq[j] += b[j];
        }
    }
    (wr, wq)
}

/// Forward series for one sensor, without the measurement window.
pub fn forward_single_sensor(
    medium: &MediumModel,
    u0: &ScalarField2D,
    data: &ConeData,
    table: &GreensTable,
    sensor_index: usize,
) -> Result<PressureTimeSeries> {
    check_compat(&data.cone, table, data.cone.dt)?;
    let nt = table.nt;
    let kern = sensor_kernel(medium, &data.cone, table)?;
    let (wr, wq) = isotime_integrals(medium, u0, data, nt + 1);
    let dt = table.dt;
    let mut out = vec![0.0; nt];
    for (j, (a, b)) in wr.iter().zip(&wq).enumerate() {
        if *a == 0.0 && *b == 0.0 {
            continue;
        }
        for (n, o) in out.iter_mut().enumerate() {
            let m = n as isize - j as isize;
            *o += a * kern.k(m) + b * kern.h(m);
        }
    }
    for v in &mut out {
        *v *= dt;
    }
    Ok(PressureTimeSeries { sensor_index, dt, values: out })
}

/// Windowed forward operator over all sensors.
pub fn forward_all(
    medium: &MediumModel,
    u0: &ScalarField2D,
    sensors: &SensorArray,
    config: &HgConfig,
    table: &GreensTable,
) -> Result<Vec<PressureTimeSeries>> {
    config.validate()?;
    sensors.validate(&medium.grid())?;
    let w = config.window().sampled(config.nt, config.dt);
    sensors
        .positions
        .par_iter()
        .enumerate()
        .map(|(m, &x)| {
            let cone = prepare_cone(medium, x, config);
            let mut s = forward_single_sensor(medium, u0, &cone, table, m)?;
            for (v, wv) in s.values.iter_mut().zip(&w) {
                *v *= wv;
            }
            Ok(s)
        })
        .collect()
}

/// Adjoint values on the cone's samples (`[ray][sample]`).
pub fn adjoint_single_sensor(
    medium: &MediumModel,
    g: &PressureTimeSeries,
    window: &TimeWindow,
    data: &ConeData,
    table: &GreensTable,
) -> Result<Vec<Vec<f64>>> {
    check_compat(&data.cone, table, g.dt)?;
    let kern = sensor_kernel(medium, &data.cone, table)?;
    let dt = g.dt;
    let h: Vec<f64> =
        g.values.iter().enumerate().map(|(k, v)| v * time_window(window, k as f64 * dt)).collect();
    let len = table.nt + 1;
    let mut cr = vec![0.0; len];
    let mut cq = vec![0.0; len];
    if h.iter().any(|v| *v != 0.0) {
        for j in 0..len {
            let (mut a, mut b) = (0.0, 0.0);
            for (n, hv) in h.iter().enumerate() {
                let m = n as isize - j as isize;
                a += kern.k(m) * hv;
                b += kern.h(m) * hv;
            }
            cr[j] = a * dt;
            cq[j] = b * dt;
        }
    }
    let out = data
        .cone
        .rays
        .iter()
        .zip(&data.densities)
        .zip(&data.mu)
        .map(|((ray, d), mu)| {
            (0..ray.valid_len().min(d.q.len()))
                .map(|j| {
                    if d.q[j] == 0.0 || j >= len {
                        return 0.0;
                    }
                    let c = match d.maslov[j] % 4 {
                        0 => cr[j],
                        1 => cq[j],
                        2 => -cr[j],
                        _ => -cq[j],
                    };
                    mu[j] * c
                })
                .collect()
        })
        .collect();
    Ok(out)
}

/// Nearest-ray-sample interpolation onto `grid`. Nodes with no sample within
/// one cell diagonal stay 0. Returns the field and a covered-node mask.
pub fn rasterize_with_coverage(
    cone: &RayCone,
    values: &[Vec<f64>],
    grid: &CartesianGrid2D,
) -> (ScalarField2D, Vec<bool>) {
    let n = grid.len();
    let mut best = vec![f64::INFINITY; n];
    let mut field = vec![0.0; n];
    let reach = grid.diagonal();
    let r2 = reach * reach;
    let wi = (reach / grid.dx).ceil() as isize;
    let wj = (reach / grid.dy).ceil() as isize;
    for (ray, vals) in cone.rays.iter().zip(values) {
        for (s, &v) in ray.valid().iter().zip(vals) {
            let fx = (s.x.x - grid.origin.x) / grid.dx;
            let fy = (s.x.y - grid.origin.y) / grid.dy;
            let (ci, cj) = (fx.round() as isize, fy.round() as isize);
            for j in (cj - wj).max(0)..=(cj + wj).min(grid.ny as isize - 1) {
                for i in (ci - wi).max(0)..=(ci + wi).min(grid.nx as isize - 1) {
                    let node = grid.node(i as usize, j as usize);
                    let d2 = (node - s.x).norm_squared();
                    let k = grid.index(i as usize, j as usize);
                    if d2 <= r2 && d2 < best[k] {
                        best[k] = d2;
                        field[k] = v;
                    }
                }
            }
        }
    }
    let covered = best.iter().map(|b| b.is_finite()).collect();
    (ScalarField2D { grid: *grid, values: field }, covered)
}

/// Nearest-ray-sample interpolation onto `grid`.
pub fn rasterize_to_grid(cone: &RayCone, values: &[Vec<f64>], grid: &CartesianGrid2D) -> ScalarField2D {
    rasterize_with_coverage(cone, values, grid).0
}

/// Covered-node indicator (1 where some ray sample lies within one cell diagonal).
pub fn coverage_map(cone: &RayCone, grid: &CartesianGrid2D) -> ScalarField2D {
    let ones: Vec<Vec<f64>> = cone.rays.iter().map(|r| vec![1.0; r.valid_len()]).collect();
    rasterize_to_grid(cone, &ones, grid)
}

const SENSOR_CHUNK: usize = 8;

/// Sum per-sensor images in ascending sensor order, computing a chunk of
/// sensors concurrently at a time.
fn reduce_images(
    grid: &CartesianGrid2D,
    m: usize,
    per_sensor: impl Fn(usize) -> Result<ScalarField2D> + Sync,
) -> Result<ScalarField2D> {
    let mut acc = ScalarField2D::zeros(*grid);
    let idx: Vec<usize> = (0..m).collect();
    for chunk in idx.chunks(SENSOR_CHUNK) {
        let imgs: Vec<ScalarField2D> = chunk.par_iter().map(|&k| per_sensor(k)).collect::<Result<_>>()?;
        for img in imgs {
            for (a, b) in acc.values.iter_mut().zip(&img.values) {
                *a += b;
            }
        }
    }
    Ok(acc)
}

/// Adjoint over all sensors, optionally projected onto `v >= 0`.
pub fn adjoint_all(
    medium: &MediumModel,
    data: &[PressureTimeSeries],
    sensors: &SensorArray,
    config: &HgConfig,
    table: &GreensTable,
    nonneg: bool,
) -> Result<ScalarField2D> {
    config.validate()?;
    sensors.validate(&medium.grid())?;
    if data.len() != sensors.len() {
        return Err(Error::Argument(format!("{} series for {} sensors", data.len(), sensors.len())));
    }
    let grid = medium.grid();
    let window = config.window();
    let img = reduce_images(&grid, sensors.len(), |m| {
        let cone = prepare_cone(medium, sensors.positions[m], config);
        let vals = adjoint_single_sensor(medium, &data[m], &window, &cone, table)?;
        Ok(rasterize_to_grid(&cone.cone, &vals, &grid))
    })?;
    Ok(if nonneg { img.nonneg() } else { img })
}

/// `P*(P u0)` with one cone per sensor, plus the intermediate data.
pub fn round_trip(
    medium: &MediumModel,
    u0: &ScalarField2D,
    sensors: &SensorArray,
    config: &HgConfig,
    table: &GreensTable,
) -> Result<(Vec<PressureTimeSeries>, ScalarField2D)> {
    config.validate()?;
    sensors.validate(&medium.grid())?;
    let grid = medium.grid();
    let window = config.window();
    let w = window.sampled(config.nt, config.dt);
    let series = std::sync::Mutex::new(vec![None; sensors.len()]);
    let img = reduce_images(&grid, sensors.len(), |m| {
        let cone = prepare_cone(medium, sensors.positions[m], config);
        let mut s = forward_single_sensor(medium, u0, &cone, table, m)?;
        for (v, wv) in s.values.iter_mut().zip(&w) {
            *v *= wv;
        }
        let vals = adjoint_single_sensor(medium, &s, &window, &cone, table)?;
        series.lock().expect("no poisoned lock")[m] = Some(s);
        Ok(rasterize_to_grid(&cone.cone, &vals, &grid))
    })?;
    let series = series.into_inner().expect("no poisoned lock").into_iter().map(|s| s.unwrap()).collect();
    Ok((series, img))
}

/// `sum_m sum_k dt a_mk b_mk`.
pub fn data_inner(a: &[PressureTimeSeries], b: &[PressureTimeSeries]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.dt * x.values.iter().zip(&y.values).map(|(p, q)| p * q).sum::<f64>())
        .sum()
}

/// `sum eta^2 a b dx dy`.
pub fn image_inner(medium: &MediumModel, a: &ScalarField2D, b: &ScalarField2D) -> f64 {
    let g = a.grid;
    a.values
        .iter()
        .zip(&b.values)
        .zip(&medium.slowness.values)
        .map(|((x, y), e)| e * e * x * y)
        .sum::<f64>()
        * g.dx
        * g.dy
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn window_shape() {
        let w = TimeWindow { t_end: 40e-6, taper_fraction: 0.1 };
        assert_eq!(time_window(&w, 0.0), 0.0);
        assert_eq!(time_window(&w, 40e-6), 0.0);
        assert_eq!(time_window(&w, 20e-6), 1.0);
        for t in [1e-6, 2.5e-6, 3.9e-6, 17e-6] {
            assert!((time_window(&w, t) - time_window(&w, 40e-6 - t)).abs() < 1e-12);
        }
        let s = TimeWindow::for_samples(800, 50e-9, 0.1).sampled(800, 50e-9);
        assert_eq!(s[0], 0.0);
        assert_eq!(s[799], 0.0);
    }

    #[test]
    fn boundary_sensor_count() {
        let g = CartesianGrid2D::square(128, 256, 0.2e-3).unwrap();
        let s = SensorArray::boundary(&g);
        assert_eq!(s.len(), 764);
        let mut keys: Vec<(i64, i64)> =
            s.positions.iter().map(|p| ((p.x * 1e7).round() as i64, (p.y * 1e7).round() as i64)).collect();
        keys.sort();
        keys.dedup();
        assert_eq!(keys.len(), 764);
    }
}
