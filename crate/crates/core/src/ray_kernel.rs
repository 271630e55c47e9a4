//! Hamiltonian ray tracing for `H(x, p) = c(x) |p|`.
//!
//! In time parametrization the bicharacteristics are
//! `dx/dt = p / eta^2`, `dp/dt = grad(eta) / eta`; in the tau parametrization
//! (`dt = eta^2 dtau`) they are `dx/dtau = p`, `dp/dtau = eta grad(eta)`.
//! Both are integrated with the explicit midpoint rule, and `p` is projected
//! back onto `|p| = eta(x)` after every step.

use rayon::prelude::*;

use crate::medium::{Medium, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub x: Vec2,
    pub p: Vec2,
}

/// One stored ray sample. `t` is the ray parameter (time, or tau for
/// [`trace_ray_tau`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySample {
    pub t: f64,
    pub x: Vec2,
    pub p: Vec2,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayTrajectory {
    pub samples: Vec<RaySample>,
    pub dt: f64,
    /// Point the ray is shot from (the sensor).
    pub shooting_point: Vec2,
    /// First sample position, `shooting_point + delta_x * direction`.
    pub initial_point: Vec2,
    /// Shooting angle, rad.
    pub theta: f64,
    /// Index of the first stored sample outside the domain.
    pub exited_at: Option<usize>,
    /// Samples run from the far end back to the initial point.
    pub reversed: bool,
}

impl RayTrajectory {
    /// Number of in-domain samples.
    pub fn valid_len(&self) -> usize {
        self.exited_at.unwrap_or(self.samples.len())
    }

    pub fn valid(&self) -> &[RaySample] {
        &self.samples[..self.valid_len()]
    }

    /// Time of the last stored sample.
    pub fn duration(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayCone {
    pub sensor: Vec2,
    pub rays: Vec<RayTrajectory>,
    pub theta0: f64,
    pub delta_theta: f64,
    /// Shooting-point offset, m.
    pub delta_x: f64,
    pub dt: f64,
}

/// Eikonal projection: rescale `p` to length `eta`.
#[inline]
pub(crate) fn project(p: Vec2, eta: f64) -> Vec2 {
    let n = p.norm();
    if n > 0.0 {
        p * (eta / n)
    } else {
        p
    }
}

/// Result of one integrator step.
pub(crate) enum Step {
    /// New state with slowness and gradient at the new position.
    Inside(Vec2, Vec2, f64, Vec2),
    /// New position left the domain (state is unprojected).
    Exit(Vec2, Vec2),
}

/// One midpoint step of the t-system from `(x, p)` with `eta, grad` at `x`.
#[inline]
pub(crate) fn rk2_step<M: Medium + ?Sized>(
    m: &M,
    x: Vec2,
    p: Vec2,
    eta: f64,
    grad: Vec2,
    dt: f64,
) -> Step {
    let vx = p / (eta * eta);
    let vp = grad / eta;
    let xm = x + 0.5 * dt * vx;
    let pm = p + 0.5 * dt * vp;
    let Some((em, gm)) = m.slowness(xm) else {
        return Step::Exit(x + dt * vx, p + dt * vp);
    };
    let x1 = x + dt * pm / (em * em);
    let p1 = p + dt * gm / em;
    match m.slowness(x1) {
        Some((e1, g1)) => Step::Inside(x1, project(p1, e1), e1, g1),
        None => Step::Exit(x1, p1),
    }
}

/// One midpoint step of the tau-system.
#[inline]
fn rk2_step_tau<M: Medium + ?Sized>(
    m: &M,
    x: Vec2,
    p: Vec2,
    eta: f64,
    grad: Vec2,
    dtau: f64,
) -> Step {
    let xm = x + 0.5 * dtau * p;
    let pm = p + 0.5 * dtau * eta * grad;
    let Some((em, gm)) = m.slowness(xm) else {
        return Step::Exit(x + dtau * p, p + dtau * eta * grad);
    };
    let x1 = x + dtau * pm;
    let p1 = p + dtau * em * gm;
    match m.slowness(x1) {
        Some((e1, g1)) => Step::Inside(x1, project(p1, e1), e1, g1),
        None => Step::Exit(x1, p1),
    }
}

fn shooting_geometry(x0: Vec2, p0: Vec2) -> (Vec2, f64) {
    (x0, p0.y.atan2(p0.x))
}

fn trace_generic<M: Medium + ?Sized>(
    medium: &M,
    x0: Vec2,
    p0: Vec2,
    dt: f64,
    t_end: f64,
    tau: bool,
) -> (RayTrajectory, Vec<f64>) {
    assert!(dt > 0.0 && t_end >= dt, "need dt > 0 and T >= dt");
    let (shoot, theta) = shooting_geometry(x0, p0);
    let steps = (t_end / dt + 1e-9).floor() as usize;
    let mut samples = Vec::with_capacity(steps + 1);
    let mut times = Vec::with_capacity(steps + 1);
    let mut exited_at = None;
    samples.push(RaySample { t: 0.0, x: x0, p: p0 });
    times.push(0.0);
    if let Some((mut eta, mut grad)) = medium.slowness(x0) {
        let (mut x, mut p) = (x0, p0);
        let mut elapsed = 0.0;
        for j in 1..=steps {
            let step = if tau {
                rk2_step_tau(medium, x, p, eta, grad, dt)
            } else {
                rk2_step(medium, x, p, eta, grad, dt)
            };
            let t = j as f64 * dt;
            match step {
                Step::Inside(x1, p1, e1, g1) => {
                    if tau {
                        elapsed += 0.5 * dt * (eta * eta + e1 * e1);
                    }
                    samples.push(RaySample { t, x: x1, p: p1 });
                    times.push(if tau { elapsed } else { t });
                    (x, p, eta, grad) = (x1, p1, e1, g1);
                }
                Step::Exit(x1, p1) => {
                    samples.push(RaySample { t, x: x1, p: p1 });
                    times.push(if tau { elapsed + dt * eta * eta } else { t });
                    exited_at = Some(j);
                    break;
                }
            }
        }
    } else {
        exited_at = Some(0);
    }
    let traj = RayTrajectory {
        samples,
        dt,
        shooting_point: shoot,
        initial_point: x0,
        theta,
        exited_at,
        reversed: false,
    };
    (traj, times)
}

/// Trace a ray in time parametrization until `t_end` or domain exit.
///
/// `p0` should satisfy `|p0| = eta(x0)`. The returned trajectory treats `x0`
/// as both shooting and initial point; [`shoot_cone`] fills in the offset
/// geometry.
pub fn trace_ray<M: Medium + ?Sized>(
    medium: &M,
    x0: Vec2,
    p0: Vec2,
    dt: f64,
    t_end: f64,
) -> RayTrajectory {
    trace_generic(medium, x0, p0, dt, t_end, false).0
}

/// Trace a ray in tau parametrization. Sample `t` fields hold tau; the
/// second return value holds the travel time `t(tau_j)` (trapezoid rule on
/// `eta^2`).
pub fn trace_ray_tau<M: Medium + ?Sized>(
    medium: &M,
    x0: Vec2,
    p0: Vec2,
    dtau: f64,
    tau_end: f64,
) -> (RayTrajectory, Vec<f64>) {
    trace_generic(medium, x0, p0, dtau, tau_end, true)
}

/// Trace one ray of a cone: shot from `sensor` at angle `theta`, starting
/// `delta_x` away from it.
pub fn trace_cone_ray<M: Medium + ?Sized>(
    medium: &M,
    sensor: Vec2,
    theta: f64,
    dt: f64,
    t_end: f64,
    delta_x: f64,
) -> RayTrajectory {
    let dir = Vec2::new(theta.cos(), theta.sin());
    let x_init = sensor + delta_x * dir;
    let eta = medium.eta(x_init).or_else(|| medium.eta(sensor)).unwrap_or(1.0);
    let mut ray = trace_ray(medium, x_init, eta * dir, dt, t_end);
    ray.shooting_point = sensor;
    ray.theta = theta;
    ray
}

/// Full-circle cone of `n_rays` equiangular rays around `sensor`.
pub fn shoot_cone<M: Medium + ?Sized>(
    medium: &M,
    sensor: Vec2,
    n_rays: usize,
    dt: f64,
    t_end: f64,
    delta_x: f64,
) -> RayCone {
    let dtheta = std::f64::consts::TAU / n_rays as f64;
    shoot_cone_sector(medium, sensor, n_rays, 0.0, dtheta, dt, t_end, delta_x)
}

/// Cone over the sector `theta0 + i * delta_theta`, `i < n_rays`.
#[allow(clippy::too_many_arguments)]
pub fn shoot_cone_sector<M: Medium + ?Sized>(
    medium: &M,
    sensor: Vec2,
    n_rays: usize,
    theta0: f64,
    delta_theta: f64,
    dt: f64,
    t_end: f64,
    delta_x: f64,
) -> RayCone {
    assert!(n_rays >= 3, "a cone needs at least 3 rays");
    assert!(delta_x > 0.0, "delta_x must be positive");
    let rays = (0..n_rays)
        .into_par_iter()
        .map(|i| {
            let theta = theta0 + i as f64 * delta_theta;
            trace_cone_ray(medium, sensor, theta, dt, t_end, delta_x)
        })
        .collect();
    RayCone { sensor, rays, theta0, delta_theta, delta_x, dt }
}

/// Reverse the in-domain part of a ray: `x_R(t) = x(T - t)`, `p_R(t) = -p(T - t)`.
///
/// Shooting metadata is kept and `reversed` toggles, so reversing twice gives
/// back the original ray exactly (for rays that did not exit).
pub fn reverse_ray(ray: &RayTrajectory) -> RayTrajectory {
    let valid = ray.valid();
    assert!(valid.len() >= 2, "reversal needs at least two samples");
    let n = valid.len() - 1;
    let samples = (0..=n)
        .map(|j| {
            let s = &valid[n - j];
            RaySample { t: j as f64 * ray.dt, x: s.x, p: -s.p }
        })
        .collect();
    RayTrajectory {
        samples,
        exited_at: None,
        reversed: !ray.reversed,
        ..ray.clone()
    }
}

/// Phase along the ray, `phi_j = phi0 + t_j`; on a reversed ray
/// `phi_j = phi0 + T - t_j` (phase of the original wave at that point).
pub fn phase_along(ray: &RayTrajectory, phi0: f64) -> Vec<f64> {
    let t_end = ray.duration();
    ray.samples
        .iter()
        .map(|s| if ray.reversed { phi0 + (t_end - s.t) } else { phi0 + s.t })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{AnalyticLens, CartesianGrid2D, MediumModel};

    fn homogeneous() -> MediumModel {
        MediumModel::homogeneous(CartesianGrid2D::new(200, 50, 1e-3, 1e-3, Vec2::new(0.0, -25e-3)).unwrap(), 1500.0)
            .unwrap()
    }

    #[test]
    fn straight_ray_in_homogeneous_medium() {
        let m = homogeneous();
        let eta = 1.0 / 1500.0;
        let r = trace_ray(&m, Vec2::zeros(), Vec2::new(eta, 0.0), 50e-9, 40e-6);
        assert_eq!(r.exited_at, None);
        assert_eq!(r.samples.len(), 801);
        for s in &r.samples {
            assert!((s.x.x - 1500.0 * s.t).abs() <= 1e-12 * (1.0 + 1500.0 * s.t));
            assert_eq!(s.x.y, 0.0);
        }
    }

    #[test]
    fn out_of_bounds_start() {
        let m = homogeneous();
        let r = trace_ray(&m, Vec2::new(-1.0, 0.0), Vec2::new(1e-3, 0.0), 1e-7, 1e-6);
        assert_eq!(r.samples.len(), 1);
        assert_eq!(r.exited_at, Some(0));
    }

    #[test]
    fn exit_is_recorded() {
        let m = homogeneous();
        let eta = 1.0 / 1500.0;
        let r = trace_ray(&m, Vec2::new(0.19, 0.0), Vec2::new(eta, 0.0), 1e-6, 1e-4);
        let k = r.exited_at.unwrap();
        assert_eq!(k, r.samples.len() - 1);
        assert!(!m.grid().contains(r.samples[k].x));
        assert!(r.valid().iter().all(|s| m.grid().contains(s.x)));
    }

    #[test]
    fn tau_trace_homogeneous() {
        let m = homogeneous();
        let eta = 1.0 / 1500.0;
        let p0 = Vec2::new(eta * 0.6, eta * 0.8);
        let (r, t) = trace_ray_tau(&m, Vec2::zeros(), p0, 1e-3, 1.0);
        for (s, tt) in r.valid().iter().zip(&t) {
            assert!((s.x - p0 * s.t).norm() < 1e-14);
            assert!((tt - eta * eta * s.t).abs() < 1e-12 * eta * eta);
        }
    }

    #[test]
    fn lens_order_of_accuracy() {
        let g = CartesianGrid2D::square(201, 201, 1e-4).unwrap();
        let lens = AnalyticLens::centered(g, 0.2);
        let x0 = Vec2::new(1e-3, 9e-3);
        let p0 = Vec2::new(1.0, 0.0) * lens.local(x0).unwrap().eta;
        let t_end = 10e-6;
        let end = |dt: f64| *trace_ray(&lens, x0, p0, dt, t_end).samples.last().map(|s| &s.x).unwrap();
        let dt = 100e-9;
        let reference = end(dt / 16.0);
        let e1 = (end(dt) - reference).norm();
        let e2 = (end(dt / 2.0) - reference).norm();
        let ratio = e1 / e2;
        assert!((3.5..=4.5).contains(&ratio), "error ratio {ratio}");
    }

    #[test]
    fn phase_linear_and_reversed() {
        let m = homogeneous();
        let r = trace_ray(&m, Vec2::zeros(), Vec2::new(1.0 / 1500.0, 0.0), 1e-7, 1e-5);
        let phi = phase_along(&r, 0.0);
        for (p, s) in phi.iter().zip(&r.samples) {
            assert_eq!(*p, s.t);
        }
        let rr = reverse_ray(&r);
        let phr = phase_along(&rr, 2.0);
        assert_eq!(phr[0], r.duration() + 2.0);
        assert_eq!(reverse_ray(&rr), r);
        assert_eq!(rr.samples[0].x, r.samples.last().unwrap().x);
        assert_eq!(rr.samples.last().unwrap().x, r.samples[0].x);
    }

    #[test]
    fn cone_geometry() {
        let m = homogeneous();
        let cone = shoot_cone(&m, Vec2::new(0.1, 0.0), 2000, 50e-9, 5e-6, 1e-3);
        assert!((cone.delta_theta - 3.1416e-3).abs() < 1e-7);
        for ray in &cone.rays {
            let d = (ray.initial_point - cone.sensor).norm();
            assert!((d - 1e-3).abs() < 1e-15);
            for s in ray.valid() {
                let r = (s.x - cone.sensor).norm();
                assert!((r - (1500.0 * s.t + 1e-3)).abs() < 1e-12);
            }
        }
    }
}
