//! Finite-difference reference solver for `u_tt = c^2 Laplace(u)`.
//!
//! Leapfrog in time, fourth-order centred differences in space, and a
//! quadratic sponge layer around the domain:
//!
//! `(1 + s dt/2) u+ = 2u - (1 - s dt/2) u- + dt^2 (c^2 L u + f)`.
//!
//! The padded grid replicates the edge sound speed outward. The adjoint run
//! injects `c^2 d/dt[g(T - t) w(T - t)] / (dx dy)` at the sensor nodes and
//! returns `v(T)`, which is the adjoint of the forward map in the
//! `eta^2`-weighted inner product.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::medium::{CartesianGrid2D, MediumModel, ScalarField2D, Vec2};
use crate::operators::{data_inner, image_inner, time_window, PressureTimeSeries, SensorArray, TimeWindow};

pub const DEFAULT_SPONGE_DEPTH: usize = 20;
const CFL_LIMIT: f64 = 0.5;
const DEFAULT_REFLECTION: f64 = 1e-4;

/// Peak damping of a quadratic sponge: `R = exp(-2 s_max D h / (3 c))`.
/// The estimate ignores reflection off the profile itself, which dominates
/// once the sponge is thinner than a wavelength.
pub fn sponge_strength_for(c: f64, depth: usize, h: f64, reflection: f64) -> f64 {
    3.0 * c * (1.0 / reflection).ln() / (2.0 * depth.max(1) as f64 * h)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdtdConfig {
    /// Simulation grid (may be finer than the medium grid).
    pub grid: CartesianGrid2D,
    pub dt_oracle: f64,
    /// Sponge thickness, cells.
    pub sponge_depth: usize,
    /// Peak sponge damping rate, 1/s.
    pub sponge_strength: f64,
    /// `c_max dt sqrt(1/dx^2 + 1/dy^2)`.
    pub cfl: f64,
}

impl FdtdConfig {
    pub fn new(
        grid: CartesianGrid2D,
        dt_oracle: f64,
        sponge_depth: usize,
        sponge_strength: f64,
        c_max: f64,
    ) -> Result<Self> {
        let cfl = c_max * dt_oracle * (1.0 / (grid.dx * grid.dx) + 1.0 / (grid.dy * grid.dy)).sqrt();
        if !(cfl > 0.0 && cfl <= CFL_LIMIT) {
            return Err(Error::Config(format!("CFL number {cfl:.4} exceeds {CFL_LIMIT}")));
        }
        if !(sponge_strength >= 0.0) {
            return Err(Error::Config("sponge strength must be non-negative".into()));
        }
        Ok(Self { grid, dt_oracle, sponge_depth, sponge_strength, cfl })
    }

    /// Simulation on the medium grid refined `refine` times, with the
    /// largest `dt / k` that satisfies the CFL limit and the default
    /// 20-cell sponge.
    pub fn for_medium(medium: &MediumModel, dt: f64, refine: usize) -> Result<Self> {
        let g = medium.grid();
        let r = refine.max(1);
        let grid = CartesianGrid2D::new(
            (g.nx - 1) * r + 1,
            (g.ny - 1) * r + 1,
            g.dx / r as f64,
            g.dy / r as f64,
            g.origin,
        )?;
        let lim = CFL_LIMIT / (medium.c_max * (1.0 / (grid.dx * grid.dx) + 1.0 / (grid.dy * grid.dy)).sqrt());
        let k = (dt / lim).ceil().max(1.0);
        let depth = DEFAULT_SPONGE_DEPTH;
        let strength = sponge_strength_for(medium.c_max, depth, grid.dx.min(grid.dy), DEFAULT_REFLECTION);
        Self::new(grid, dt / k, depth, strength, medium.c_max)
    }

    /// Same run with a sponge of `depth` cells tuned for nominal
    /// normal-incidence reflection `reflection`.
    pub fn with_sponge(mut self, depth: usize, reflection: f64, c_max: f64) -> Self {
        self.sponge_depth = depth;
        self.sponge_strength = sponge_strength_for(c_max, depth, self.grid.dx.min(self.grid.dy), reflection);
        self
    }

    fn steps_per_sample(&self, dt: f64) -> Result<usize> {
        let ratio = dt / self.dt_oracle;
        let k = ratio.round();
        if k < 1.0 || (ratio - k).abs() > 1e-6 * ratio {
            return Err(Error::Config(format!(
                "record step {dt} s is not an integer multiple of the oracle step {} s",
                self.dt_oracle
            )));
        }
        Ok(k as usize)
    }
}

/// Nearest-node resampling (clamped to the source grid's edges).
pub fn resample_nearest(field: &ScalarField2D, grid: CartesianGrid2D) -> ScalarField2D {
    let src = field.grid;
    if src == grid {
        return field.clone();
    }
    ScalarField2D::from_fn(grid, |x| {
        let fx = ((x.x - src.origin.x) / src.dx).clamp(0.0, (src.nx - 1) as f64);
        let fy = ((x.y - src.origin.y) / src.dy).clamp(0.0, (src.ny - 1) as f64);
        field.sample_nearest(src.node(0, 0) + Vec2::new(fx * src.dx, fy * src.dy)).unwrap_or(0.0)
    })
}

const GHOST: usize = 2;

/// Padded simulation state; arrays carry a 2-cell zero ghost frame.
struct Sim {
    nx: usize,
    ny: usize,
    /// Offset of the simulation grid's node (0, 0) in the padded arrays.
    off: usize,
    dt: f64,
    dx: f64,
    dy: f64,
    c2: Vec<f64>,
    /// `(1 - s dt/2)` and `1 / (1 + s dt/2)` per cell.
    damp_minus: Vec<f64>,
    damp_inv: Vec<f64>,
    interior: (usize, usize, usize, usize),
}

impl Sim {
    fn new(medium: &MediumModel, cfg: &FdtdConfig) -> Result<Self> {
        let m = if medium.grid() == cfg.grid { medium.clone() } else { medium.resample(cfg.grid)? };
        let g = cfg.grid;
        let d = cfg.sponge_depth;
        let off = GHOST + d;
        let nx = g.nx + 2 * off;
        let ny = g.ny + 2 * off;
        let mut c2 = vec![0.0; nx * ny];
        let mut damp_minus = vec![1.0; nx * ny];
        let mut damp_inv = vec![1.0; nx * ny];
        for j in GHOST..ny - GHOST {
            for i in GHOST..nx - GHOST {
                let si = (i as isize - off as isize).clamp(0, g.nx as isize - 1) as usize;
                let sj = (j as isize - off as isize).clamp(0, g.ny as isize - 1) as usize;
                let c = m.sound_speed.at(si, sj);
                let k = j * nx + i;
                c2[k] = c * c;
                // depth into the sponge, in cells
                let di = (off as isize - i as isize).max(i as isize - (off + g.nx - 1) as isize).max(0);
                let dj = (off as isize - j as isize).max(j as isize - (off + g.ny - 1) as isize).max(0);
                let depth = (di.max(dj) as f64 / d.max(1) as f64).min(1.0);
                let s = cfg.sponge_strength * depth * depth;
                damp_minus[k] = 1.0 - 0.5 * s * cfg.dt_oracle;
                damp_inv[k] = 1.0 / (1.0 + 0.5 * s * cfg.dt_oracle);
            }
        }
        Ok(Self {
            nx,
            ny,
            off,
            dt: cfg.dt_oracle,
            dx: g.dx,
            dy: g.dy,
            c2,
            damp_minus,
            damp_inv,
            interior: (off, off + g.nx, off, off + g.ny),
        })
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        (j + self.off) * self.nx + i + self.off
    }

    /// Fourth-order Laplacian at flat index `k` (not on the ghost frame).
    #[inline]
    fn lap(&self, u: &[f64], k: usize) -> f64 {
        let nx = self.nx;
        let ax = 1.0 / (12.0 * self.dx * self.dx);
        let ay = 1.0 / (12.0 * self.dy * self.dy);
        ax * (-u[k - 2] + 16.0 * u[k - 1] - 30.0 * u[k] + 16.0 * u[k + 1] - u[k + 2])
            + ay * (-u[k - 2 * nx] + 16.0 * u[k - nx] - 30.0 * u[k] + 16.0 * u[k + nx] - u[k + 2 * nx])
    }

    /// `next = step(prev, cur)` plus point sources `(flat index, value)`.
    fn step(&self, prev: &[f64], cur: &[f64], next: &mut [f64], sources: &[(usize, f64)]) {
        let nx = self.nx;
        let dt2 = self.dt * self.dt;
        next.par_chunks_mut(nx).enumerate().for_each(|(j, row)| {
            if j < GHOST || j >= self.ny - GHOST {
                return;
            }
            for (i, out) in row.iter_mut().enumerate().take(nx - GHOST).skip(GHOST) {
                let k = j * nx + i;
                let rhs = 2.0 * cur[k] - self.damp_minus[k] * prev[k] + dt2 * self.c2[k] * self.lap(cur, k);
                *out = rhs * self.damp_inv[k];
            }
        });
        for &(k, f) in sources {
            next[k] += dt2 * f * self.damp_inv[k];
        }
    }

    fn embed(&self, field: &ScalarField2D) -> Vec<f64> {
        let mut u = vec![0.0; self.nx * self.ny];
        for j in 0..field.grid.ny {
            for i in 0..field.grid.nx {
                u[self.idx(i, j)] = field.at(i, j);
            }
        }
        u
    }

    fn sensor_nodes(&self, grid: &CartesianGrid2D, sensors: &SensorArray) -> Result<Vec<usize>> {
        sensors
            .positions
            .iter()
            .map(|&p| {
                grid.nearest_node(p)
                    .map(|(i, j)| self.idx(i, j))
                    .ok_or_else(|| Error::Argument("sensor lies outside the domain".into()))
            })
            .collect()
    }

    /// Conserved discrete energy `sum eta^2 ((u+ - u)/dt)^2 - u+ L u` over the
    /// whole padded grid (non-increasing with the sponge on).
    fn total_energy(&self, cur: &[f64], next: &[f64]) -> f64 {
        let mut e = 0.0;
        for j in GHOST..self.ny - GHOST {
            for i in GHOST..self.nx - GHOST {
                let k = j * self.nx + i;
                let v = (next[k] - cur[k]) / self.dt;
                e += v * v / self.c2[k] - next[k] * self.lap(cur, k);
            }
        }
        e * self.dx * self.dy
    }

    /// `sum (u_t^2 / c^2 + |grad u|^2) dx dy` over the unpadded domain.
    fn interior_energy(&self, prev: &[f64], next: &[f64], cur: &[f64]) -> f64 {
        let (i0, i1, j0, j1) = self.interior;
        let nx = self.nx;
        let mut e = 0.0;
        for j in j0..j1 {
            for i in i0..i1 {
                let k = j * nx + i;
                let ut = (next[k] - prev[k]) / (2.0 * self.dt);
                let ux = (cur[k + 1] - cur[k - 1]) / (2.0 * self.dx);
                let uy = (cur[k + nx] - cur[k - nx]) / (2.0 * self.dy);
                e += ut * ut / self.c2[k] + ux * ux + uy * uy;
            }
        }
        e * self.dx * self.dy
    }
}

/// Energy history of a forward run: per oracle step, the conserved total
/// energy and the interior (unpadded) energy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyTrace {
    pub total: Vec<f64>,
    pub interior: Vec<f64>,
}

fn check_grid(u0: &ScalarField2D, cfg: &FdtdConfig) -> ScalarField2D {
    resample_nearest(u0, cfg.grid)
}

fn forward_impl(
    medium: &MediumModel,
    u0: &ScalarField2D,
    sensors: &SensorArray,
    dt: f64,
    nt: usize,
    cfg: &FdtdConfig,
    monitor: bool,
) -> Result<(Vec<PressureTimeSeries>, EnergyTrace)> {
    let k = cfg.steps_per_sample(dt)?;
    let sim = Sim::new(medium, cfg)?;
    let nodes = sim.sensor_nodes(&cfg.grid, sensors)?;
    let u0 = check_grid(u0, cfg);
    let mut prev = sim.embed(&u0);
    let mut cur = prev.clone();
    // u^1 = u^0 + dt^2/2 c^2 L u^0
    let half = 0.5 * sim.dt * sim.dt;
    for j in GHOST..sim.ny - GHOST {
        for i in GHOST..sim.nx - GHOST {
            let kk = j * sim.nx + i;
            cur[kk] = prev[kk] + half * sim.c2[kk] * sim.lap(&prev, kk);
        }
    }
    let mut next = vec![0.0; prev.len()];
    let mut out: Vec<Vec<f64>> = vec![Vec::with_capacity(nt); nodes.len()];
    let mut energy = EnergyTrace::default();
    let steps = (nt.max(1) - 1) * k;
    for (s, n) in out.iter_mut().zip(&nodes) {
        s.push(prev[*n]);
    }
    for step in 1..=steps {
        // `cur` holds step `step`
        if step % k == 0 {
            for (s, n) in out.iter_mut().zip(&nodes) {
                s.push(cur[*n]);
            }
        }
        if step == steps {
            break;
        }
        sim.step(&prev, &cur, &mut next, &[]);
        if monitor {
            energy.total.push(sim.total_energy(&cur, &next));
            energy.interior.push(sim.interior_energy(&prev, &next, &cur));
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    let series = out
        .into_iter()
        .enumerate()
        .map(|(m, values)| PressureTimeSeries { sensor_index: m, dt, values })
        .collect();
    Ok((series, energy))
}

/// Record `u(t_k, x_m)`, `t_k = k dt`, `k < round(t_end/dt)`, at the nodes nearest the sensors.
pub fn fdtd_forward(
    medium: &MediumModel,
    u0: &ScalarField2D,
    sensors: &SensorArray,
    dt: f64,
    t_end: f64,
    cfg: &FdtdConfig,
) -> Result<Vec<PressureTimeSeries>> {
    let nt = (t_end / dt).round() as usize;
    Ok(forward_impl(medium, u0, sensors, dt, nt, cfg, false)?.0)
}

/// As [`fdtd_forward`] with `nt` samples, also returning the energy history.
pub fn fdtd_forward_monitored(
    medium: &MediumModel,
    u0: &ScalarField2D,
    sensors: &SensorArray,
    dt: f64,
    nt: usize,
    cfg: &FdtdConfig,
) -> Result<(Vec<PressureTimeSeries>, EnergyTrace)> {
    forward_impl(medium, u0, sensors, dt, nt, cfg, true)
}

/// Linear interpolation of uniformly sampled data, zero outside.
fn interp(h: &[f64], dt: f64, t: f64) -> f64 {
    if !(t >= 0.0) {
        return 0.0;
    }
    let f = t / dt;
    let k = f.floor() as usize;
    if k + 1 >= h.len() {
        return if k + 1 == h.len() && f == k as f64 { h[k] } else { 0.0 };
    }
    let a = f - k as f64;
    (1.0 - a) * h[k] + a * h[k + 1]
}

/// Adjoint wave run: returns `v(T)` on the medium grid, `T = window.t_end`.
pub fn fdtd_adjoint(
    medium: &MediumModel,
    data: &[PressureTimeSeries],
    sensors: &SensorArray,
    window: &TimeWindow,
    dt: f64,
    cfg: &FdtdConfig,
) -> Result<ScalarField2D> {
    if data.len() != sensors.len() {
        return Err(Error::Argument(format!("{} series for {} sensors", data.len(), sensors.len())));
    }
    if let Some(s) = data.iter().find(|s| (s.dt - dt).abs() > 1e-9 * dt) {
        return Err(Error::Config(format!("series dt {} differs from {dt}", s.dt)));
    }
    cfg.steps_per_sample(dt)?;
    let sim = Sim::new(medium, cfg)?;
    let nodes = sim.sensor_nodes(&cfg.grid, sensors)?;
    let t_end = window.t_end;
    let steps = (t_end / sim.dt).round() as usize;
    let h: Vec<Vec<f64>> = data
        .iter()
        .map(|s| s.values.iter().enumerate().map(|(k, v)| v * time_window(window, k as f64 * dt)).collect())
        .collect();
    let inv_area = 1.0 / (cfg.grid.dx * cfg.grid.dy);
    let source_at = |n: usize| -> Vec<(usize, f64)> {
        let t = n as f64 * sim.dt;
        nodes
            .iter()
            .zip(&h)
            .map(|(&node, hm)| {
                let a = interp(hm, dt, t_end - t - sim.dt);
                let b = interp(hm, dt, t_end - t + sim.dt);
                (node, sim.c2[node] * (a - b) / (2.0 * sim.dt) * inv_area)
            })
            .collect()
    };
    let len = sim.nx * sim.ny;
    let mut prev = vec![0.0; len];
    let mut cur = vec![0.0; len];
    let mut next = vec![0.0; len];
    for n in 0..steps {
        sim.step(&prev, &cur, &mut next, &source_at(n));
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
    }
    let g = medium.grid();
    let fine = cfg.grid;
    let v = ScalarField2D::from_fn(g, |x| {
        let (i, j) = fine.nearest_node(x).expect("medium grid inside simulation grid");
        cur[sim.idx(i, j)]
    });
    Ok(v)
}

/// Sum of Gaussian blobs, defined in physical coordinates so it can be
/// sampled on any grid covering the same box.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSmoothField {
    blobs: Vec<(Vec2, f64, f64)>,
}

impl RandomSmoothField {
    pub fn new(grid: &CartesianGrid2D, rng: &mut impl Rng) -> Self {
        let e = grid.extent();
        let blobs = (0..6)
            .map(|_| {
                let c = grid.origin + Vec2::new(rng.gen_range(0.2..0.8) * e.x, rng.gen_range(0.2..0.8) * e.y);
                let w = rng.gen_range(0.04..0.08) * e.x.min(e.y);
                (c, w, rng.gen_range(-1.0..1.0))
            })
            .collect();
        Self { blobs }
    }

    pub fn eval(&self, x: Vec2) -> f64 {
        self.blobs.iter().map(|(c, w, a)| a * (-(x - c).norm_squared() / (w * w)).exp()).sum()
    }

    pub fn sample(&self, grid: CartesianGrid2D) -> ScalarField2D {
        ScalarField2D::from_fn(grid, |x| self.eval(x))
    }
}

/// Sum of sinusoids with random frequencies (1 to 8 cycles per window) and phases.
#[derive(Debug, Clone, PartialEq)]
pub struct RandomSignal {
    terms: Vec<(f64, f64, f64)>,
}

impl RandomSignal {
    pub fn new(t_end: f64, rng: &mut impl Rng) -> Self {
        let terms = (0..5)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(1.0..8.0) / t_end, rng.gen_range(0.0..std::f64::consts::TAU)))
            .collect();
        Self { terms }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|(a, f, p)| a * (std::f64::consts::TAU * f * t + p).sin()).sum()
    }
}

/// Both sides of a dot test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DotProducts {
    /// `<P u0, g>`, with `P` including the measurement window.
    pub lhs: f64,
    /// `<u0, P* g>` in the `eta^2`-weighted space product.
    pub rhs: f64,
    pub norm_pu: f64,
    pub norm_g: f64,
}

impl DotProducts {
    pub fn gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / (self.norm_pu * self.norm_g)
    }
}

/// Evaluate both inner products for given `u0` and data.
pub fn dot_products(
    medium: &MediumModel,
    sensors: &SensorArray,
    u0: &ScalarField2D,
    g: &[PressureTimeSeries],
    window: &TimeWindow,
    dt: f64,
    cfg: &FdtdConfig,
) -> Result<DotProducts> {
    let nt = g.first().map_or(0, |s| s.values.len());
    let mut pu = forward_impl(medium, u0, sensors, dt, nt, cfg, false)?.0;
    for s in &mut pu {
        for (k, v) in s.values.iter_mut().enumerate() {
            *v *= time_window(window, k as f64 * dt);
        }
    }
    let v = fdtd_adjoint(medium, g, sensors, window, dt, cfg)?;
    Ok(DotProducts {
        lhs: data_inner(&pu, g),
        rhs: image_inner(medium, u0, &v),
        norm_pu: data_inner(&pu, &pu).sqrt(),
        norm_g: data_inner(g, g).sqrt(),
    })
}

/// Random smooth data for `sensors` sampled at `k dt`, `k < nt`.
pub fn random_data(sensors: usize, nt: usize, dt: f64, rng: &mut impl Rng) -> Vec<PressureTimeSeries> {
    let t_end = (nt - 1) as f64 * dt;
    (0..sensors)
        .map(|m| {
            let sig = RandomSignal::new(t_end, rng);
            PressureTimeSeries { sensor_index: m, dt, values: (0..nt).map(|k| sig.eval(k as f64 * dt)).collect() }
        })
        .collect()
}

/// Largest relative dot-test gap over `trials` random smooth `(u0, g)` pairs.
pub fn dot_test(
    medium: &MediumModel,
    sensors: &SensorArray,
    dt: f64,
    t_end: f64,
    cfg: &FdtdConfig,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Argument("dot test needs at least one trial".into()));
    }
    let nt = (t_end / dt).round() as usize + 1;
    let window = TimeWindow::for_samples(nt, dt, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u0 = RandomSmoothField::new(&medium.grid(), &mut rng).sample(medium.grid());
        let g = random_data(sensors.len(), nt, dt, &mut rng);
        worst = worst.max(dot_products(medium, sensors, &u0, &g, &window, dt, cfg)?.gap());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> (MediumModel, CartesianGrid2D) {
        let g = CartesianGrid2D::square(41, 41, 0.2e-3).unwrap();
        (MediumModel::homogeneous(g, 1500.0).unwrap(), g)
    }

    #[test]
    fn cfl_violation_is_config_error() {
        let (m, g) = small();
        let e = FdtdConfig::new(g, 1e-7, 20, 0.0, m.c_max).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        let cfg = FdtdConfig::for_medium(&m, 50e-9, 1).unwrap();
        assert!(cfg.cfl <= 0.5);
        assert!(cfg.steps_per_sample(50e-9).is_ok());
        assert!(cfg.steps_per_sample(51e-9).is_err());
    }

    #[test]
    fn zero_in_zero_out() {
        let (m, g) = small();
        let cfg = FdtdConfig::for_medium(&m, 50e-9, 1).unwrap();
        let s = SensorArray::new(vec![g.node(0, 20), g.node(40, 3)]);
        let out = fdtd_forward(&m, &ScalarField2D::zeros(g), &s, 50e-9, 2e-6, &cfg).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].values.len(), 40);
        assert!(out.iter().all(|o| o.values.iter().all(|v| *v == 0.0)));
        let w = TimeWindow::for_samples(40, 50e-9, 0.1);
        let zero: Vec<PressureTimeSeries> =
            (0..2).map(|m| PressureTimeSeries { sensor_index: m, dt: 50e-9, values: vec![0.0; 40] }).collect();
        let v = fdtd_adjoint(&m, &zero, &s, &w, 50e-9, &cfg).unwrap();
        assert!(v.values.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn interpolation() {
        let h = [0.0, 1.0, 3.0];
        assert_eq!(interp(&h, 1.0, 0.5), 0.5);
        assert_eq!(interp(&h, 1.0, 1.5), 2.0);
        assert_eq!(interp(&h, 1.0, 2.0), 3.0);
        assert_eq!(interp(&h, 1.0, 2.5), 0.0);
        assert_eq!(interp(&h, 1.0, -0.1), 0.0);
    }
}
