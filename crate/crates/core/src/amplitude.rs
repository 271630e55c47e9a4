//! Ray Jacobians, geometrical-optics amplitudes and their reversed forms.
//!
//! `q(t) = det(dx(t)/dx0)` is obtained either from the variational equations
//! of the Hamiltonian system (ODE method) or from the spacing of a
//! neighbouring ray (proximal method). Both are reported relative to their
//! value at the initial point, so `q_0 = 1`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::medium::{LocalMedium, Mat2, Medium, Vec2};
use crate::ray_kernel::{trace_cone_ray, RayCone, RayTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobianMethod {
    #[default]
    Ode,
    Proximal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayDensity {
    /// Relative Jacobian determinant per in-domain sample, `q[0] = 1`.
    pub q: Vec<f64>,
    /// Keller-Maslov count: sign changes of `q` up to each sample.
    pub maslov: Vec<u32>,
    pub method: JacobianMethod,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttenuationProfile {
    pub mu: Vec<f64>,
    pub mu_r: Vec<f64>,
}

/// Running count of sign changes. Exact zeros do not change the reference sign.
pub fn maslov_counts(q: &[f64]) -> Vec<u32> {
    let mut out = Vec::with_capacity(q.len());
    let mut m = 0u32;
    let mut last = 0.0f64;
    for &v in q {
        if v != 0.0 {
            if last != 0.0 && (v > 0.0) != (last > 0.0) {
                m += 1;
            }
            last = v;
        }
        out.push(m);
    }
    out
}

/// Right-hand side of the variational system for `H = c |p|`.
#[inline]
fn variational(l: &LocalMedium, p: Vec2, x_mat: &Mat2, p_mat: &Mat2) -> (Mat2, Mat2) {
    let np = p.norm();
    let d = p / np;
    let h_px = d * l.grad_c.transpose();
    let h_pp = (Mat2::identity() - d * d.transpose()) * (l.c / np);
    let h_xx = l.hess_c * np;
    let h_xp = h_px.transpose();
    (h_px * x_mat + h_pp * p_mat, -(h_xx * x_mat) - h_xp * p_mat)
}

/// Jacobian by the ODE method along an already traced ray.
///
/// The ray states at the sample points are taken from `ray` and the midpoint
/// states are rebuilt with the same arithmetic as the tracer, so the
/// variational system sees exactly the trajectory that was stored. Initial
/// data: `dx/dx0 = I`, `dp/dx0 = Hess(|x - x_S| / c)` at distance `delta_x`.
pub fn jacobian_ode<M: Medium + ?Sized>(medium: &M, ray: &RayTrajectory, delta_x: f64) -> RayDensity {
    let s = ray.valid();
    if s.is_empty() {
        return RayDensity { q: vec![], maslov: vec![], method: JacobianMethod::Ode };
    }
    let dt = ray.dt;
    let l0 = medium.local(s[0].x).expect("first valid sample is inside");
    let d = s[0].p / s[0].p.norm();
    let mut xm = Mat2::identity();
    let mut pm = (Mat2::identity() - d * d.transpose()) / (l0.c * delta_x);
    let mut q = Vec::with_capacity(s.len());
    q.push(xm.determinant());
    let mut l = l0;
    for j in 0..s.len() - 1 {
        let (x, p) = (s[j].x, s[j].p);
        let mid_x = x + 0.5 * dt * p / (l.eta * l.eta);
        let mid_p = p + 0.5 * dt * l.grad_eta / l.eta;
        let (dx1, dp1) = variational(&l, p, &xm, &pm);
        let Some(lm) = medium.local(mid_x) else { break };
        let (xh, ph) = (xm + dx1 * (0.5 * dt), pm + dp1 * (0.5 * dt));
        let (dx2, dp2) = variational(&lm, mid_p, &xh, &ph);
        xm += dx2 * dt;
        pm += dp2 * dt;
        q.push(xm.determinant());
        match medium.local(s[j + 1].x) {
            Some(next) => l = next,
            None => break,
        }
    }
    let q0 = q[0];
    let q: Vec<f64> = q.iter().map(|v| v / q0).collect();
    let maslov = maslov_counts(&q);
    RayDensity { q, maslov, method: JacobianMethod::Ode }
}

/// Signed proximal determinants from a main and an auxiliary sample track.
fn proximal_from_tracks(main: &[Vec2], aux: &[Vec2], dtheta: f64, dt: f64) -> RayDensity {
    let n = main.len().min(aux.len());
    let mut raw = Vec::with_capacity(n);
    for j in 0..n {
        let a = (aux[j] - main[j]) / dtheta;
        let v = if n == 1 {
            Vec2::zeros()
        } else if j + 1 < n {
            (main[j + 1] - main[j]) / dt
        } else {
            (main[j] - main[j - 1]) / dt
        };
        raw.push(a.x * v.y - a.y * v.x);
    }
    let maslov = maslov_counts(&raw);
    let q0 = raw.first().copied().unwrap_or(1.0);
    let q = if q0 != 0.0 { raw.iter().map(|v| v / q0).collect() } else { raw };
    RayDensity { q, maslov, method: JacobianMethod::Proximal }
}

/// Jacobian by the proximal-ray method: an auxiliary ray shot from the same
/// shooting point at `theta + delta_theta` spans, together with the ray's
/// own time step, a parallelogram whose signed area tracks `q`.
pub fn jacobian_proximal<M: Medium + ?Sized>(
    medium: &M,
    ray: &RayTrajectory,
    delta_theta: f64,
    delta_x: f64,
) -> RayDensity {
    let s = ray.valid();
    let t_end = (s.len().max(2) - 1) as f64 * ray.dt;
    let aux = trace_cone_ray(medium, ray.shooting_point, ray.theta + delta_theta, ray.dt, t_end, delta_x);
    let main: Vec<Vec2> = s.iter().map(|v| v.x).collect();
    let aux: Vec<Vec2> = aux.valid().iter().map(|v| v.x).collect();
    proximal_from_tracks(&main, &aux, delta_theta, ray.dt)
}

/// Proximal Jacobian of ray `i` using its neighbour in the cone as the
/// auxiliary ray (no extra tracing).
pub fn jacobian_proximal_in_cone(cone: &RayCone, i: usize) -> RayDensity {
    let n = cone.rays.len();
    let full = (n as f64 * cone.delta_theta - std::f64::consts::TAU).abs() < 1e-9;
    let (k, dtheta) = if i + 1 < n {
        (i + 1, cone.delta_theta)
    } else if full {
        (0, cone.delta_theta)
    } else {
        (i - 1, -cone.delta_theta)
    };
    let main: Vec<Vec2> = cone.rays[i].valid().iter().map(|v| v.x).collect();
    let aux: Vec<Vec2> = cone.rays[k].valid().iter().map(|v| v.x).collect();
    proximal_from_tracks(&main, &aux, dtheta, cone.dt)
}

/// `A_j = A0 (eta_0/eta_j) sqrt|q_0/q_j| exp(-i m_j pi/2)`; samples with
/// `q_j = 0` are NaN.
pub fn amplitude_along<M: Medium + ?Sized>(
    ray: &RayTrajectory,
    density: &RayDensity,
    medium: &M,
    a0: f64,
) -> Vec<Complex64> {
    let s = ray.valid();
    let eta0 = medium.eta(s[0].x).expect("first valid sample is inside");
    let q0 = density.q[0];
    density
        .q
        .iter()
        .zip(&density.maslov)
        .zip(s)
        .map(|((&q, &m), smp)| {
            if q == 0.0 {
                return Complex64::new(f64::NAN, f64::NAN);
            }
            let eta = medium.eta(smp.x).expect("valid sample is inside");
            let mag = a0 * (eta0 / eta) * (q0 / q).abs().sqrt();
            mag * maslov_phase(m)
        })
        .collect()
}

/// `exp(-i m pi/2)` without rounding noise.
pub fn maslov_phase(m: u32) -> Complex64 {
    match m % 4 {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

/// Density of the reversed ray, `q_R,j = q_{N-j} / q_N`.
pub fn reversed_density(density: &RayDensity) -> Result<RayDensity> {
    let Some(&qn) = density.q.last() else {
        return Err(Error::Argument("empty density".into()));
    };
    if qn == 0.0 {
        return Err(Error::DegenerateEndpoint);
    }
    let q: Vec<f64> = density.q.iter().rev().map(|v| v / qn).collect();
    let maslov = maslov_counts(&q);
    Ok(RayDensity { q, maslov, method: density.method })
}

/// Attenuation `mu_j = (eta_0/eta_j) sqrt|q_0/q_j|` and its reciprocal.
pub fn attenuations<M: Medium + ?Sized>(
    ray: &RayTrajectory,
    density: &RayDensity,
    medium: &M,
) -> AttenuationProfile {
    let s = ray.valid();
    let eta0 = medium.eta(s[0].x).expect("first valid sample is inside");
    let q0 = density.q[0];
    let mu: Vec<f64> = density
        .q
        .iter()
        .zip(s)
        .map(|(&q, smp)| {
            let eta = medium.eta(smp.x).expect("valid sample is inside");
            (eta0 / eta) * (q0 / q).abs().sqrt()
        })
        .collect();
    let mu_r = mu.iter().map(|m| 1.0 / m).collect();
    AttenuationProfile { mu, mu_r }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{CartesianGrid2D, MediumModel};
    use crate::ray_kernel::shoot_cone;

    fn homogeneous() -> MediumModel {
        let g = CartesianGrid2D::new(201, 201, 1e-4, 1e-4, Vec2::new(-10e-3, -10e-3)).unwrap();
        MediumModel::homogeneous(g, 1500.0).unwrap()
    }

    #[test]
    fn ode_homogeneous_spreading() {
        let m = homogeneous();
        let dx = 1e-4;
        let ray = trace_cone_ray(&m, Vec2::zeros(), 0.3, 50e-9, 5e-6, dx);
        let d = jacobian_ode(&m, &ray, dx);
        for (q, s) in d.q.iter().zip(ray.valid()) {
            let exact = (dx + 1500.0 * s.t) / dx;
            assert!((q - exact).abs() < 1e-10 * exact, "{q} vs {exact}");
        }
        assert!(d.maslov.iter().all(|&m| m == 0));
    }

    #[test]
    fn proximal_matches_ode_homogeneous() {
        let m = homogeneous();
        let dx = 1e-4;
        let ray = trace_cone_ray(&m, Vec2::zeros(), 1.1, 50e-9, 5e-6, dx);
        let a = jacobian_ode(&m, &ray, dx);
        let b = jacobian_proximal(&m, &ray, 1e-3, dx);
        let c = jacobian_proximal(&m, &ray, 5e-4, dx);
        for j in 0..a.q.len() {
            assert!((a.q[j] - b.q[j]).abs() < 1e-6 * a.q[j]);
            let ratio = b.q[j] / c.q[j];
            assert!((0.99..=1.01).contains(&ratio));
        }
    }

    #[test]
    fn amplitude_homogeneous() {
        let m = homogeneous();
        let dx = 1e-4;
        let ray = trace_cone_ray(&m, Vec2::zeros(), 2.0, 50e-9, 5e-6, dx);
        let d = jacobian_ode(&m, &ray, dx);
        let a = amplitude_along(&ray, &d, &m, 1.0);
        for (v, s) in a.iter().zip(ray.valid()) {
            let exact = (dx / (dx + 1500.0 * s.t)).sqrt();
            assert!((v.re - exact).abs() < 1e-10);
            assert_eq!(v.im, 0.0);
        }
        let att = attenuations(&ray, &d, &m);
        assert_eq!(att.mu[0], 1.0);
        for (mu, mr) in att.mu.iter().zip(&att.mu_r) {
            assert!((mu * mr - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn amplitude_identity_and_caustic_phase() {
        let m = homogeneous();
        let ray = trace_cone_ray(&m, Vec2::zeros(), 0.0, 50e-9, 1e-6, 1e-4);
        let n = ray.valid().len();
        let flat = RayDensity { q: vec![2.0; n], maslov: vec![0; n], method: JacobianMethod::Ode };
        assert!(amplitude_along(&ray, &flat, &m, 0.7).iter().all(|a| *a == Complex64::new(0.7, 0.0)));
        let mut q = vec![1.0; n];
        for v in q.iter_mut().skip(n / 2) {
            *v = -1.0;
        }
        q[n / 2 - 1] = 0.0;
        let d = RayDensity { maslov: maslov_counts(&q), q, method: JacobianMethod::Ode };
        let a = amplitude_along(&ray, &d, &m, 1.0);
        assert!(a[n / 2 - 1].re.is_nan());
        assert_eq!(a[n - 1], Complex64::new(0.0, -1.0));
    }

    #[test]
    fn reversed_density_identities() {
        let q = vec![1.0, 1.7, 0.4, -0.3, -2.5, 0.9];
        let d = RayDensity { maslov: maslov_counts(&q), q: q.clone(), method: JacobianMethod::Ode };
        let r = reversed_density(&d).unwrap();
        assert_eq!(r.q[0], 1.0);
        assert_eq!(*r.q.last().unwrap(), q[0] / q[5]);
        let rr = reversed_density(&r).unwrap();
        for (a, b) in rr.q.iter().zip(&q) {
            assert!((a - b / q[0]).abs() < 1e-15);
        }
        assert_eq!(r.maslov, vec![0, 1, 1, 2, 2, 2]);
        let z = RayDensity { q: vec![1.0, 0.0], maslov: vec![0, 0], method: JacobianMethod::Ode };
        assert!(matches!(reversed_density(&z), Err(Error::DegenerateEndpoint)));
    }

    #[test]
    fn cone_neighbour_proximal() {
        let m = homogeneous();
        let cone = shoot_cone(&m, Vec2::zeros(), 400, 50e-9, 4e-6, 1e-4);
        let a = jacobian_ode(&m, &cone.rays[17], 1e-4);
        let b = jacobian_proximal_in_cone(&cone, 17);
        let last = jacobian_proximal_in_cone(&cone, 399);
        for j in 0..a.q.len() {
            assert!((a.q[j] - b.q[j]).abs() < 1e-3 * a.q[j]);
            assert!((a.q[j] - last.q[j]).abs() < 1e-3 * a.q[j]);
        }
    }
}
