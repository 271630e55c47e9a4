//! Discrete interface method: rays stepped as straight segments, refracted
//! by Snell's law at every node where the slowness gradient is non-zero,
//! with amplitude loss split into spherical spreading and interface
//! transmission.

use crate::error::{Error, Result};
use crate::medium::{Medium, Vec2};
use crate::ray_kernel::{project, RaySample};

/// Below this slowness-gradient norm (s/m^2) a step is a pure translation.
pub const GRADIENT_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimStatus {
    Complete,
    /// Sample index that left the domain (not stored).
    Exited(usize),
    /// Step at which Snell's law had no real solution; the ray stops there.
    TotalInternalReflection(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimTrajectory {
    pub samples: Vec<RaySample>,
    /// Spherical-spreading attenuation, nepers.
    pub alpha_s: Vec<f64>,
    /// Cumulative interface attenuation, nepers.
    pub alpha_i: Vec<f64>,
    /// Arclength from the initial point, m.
    pub arclength: Vec<f64>,
    pub delta_x: f64,
    pub dt: f64,
    pub status: DimStatus,
}

/// Refract unit direction `d` from slowness `eta_a` into `eta_b` across a
/// plane with normal `n`. Returns the new direction and the interface loss
/// `ln((a cos_i + b cos_t) / (2 a cos_i))`, or `None` past the critical angle.
fn refract(d: Vec2, n: Vec2, eta_a: f64, eta_b: f64) -> Option<(Vec2, f64)> {
    if eta_a == eta_b {
        return Some((d, 0.0));
    }
    let dn = d.dot(&n);
    let n = if dn < 0.0 { -n } else { n };
    let cos_i = dn.abs().clamp(-1.0, 1.0);
    let tang = d - cos_i * n;
    let sin_i = tang.norm();
    let sin_t = eta_a / eta_b * sin_i;
    if sin_t > 1.0 {
        return None;
    }
    let cos_t = (1.0 - sin_t * sin_t).max(0.0).sqrt();
    if cos_i <= 1e-12 {
        // grazing: no transmission model, keep the direction
        return Some((d, 0.0));
    }
    let t_hat = if sin_i > 0.0 { tang / sin_i } else { Vec2::zeros() };
    let dir = cos_t * n + sin_t * t_hat;
    let loss = ((eta_a * cos_i + eta_b * cos_t) / (2.0 * eta_a * cos_i)).ln();
    Some((dir, loss))
}

/// Trace with the discrete interface method from `(x0, p0)` up to `t_end`.
pub fn dim_trace<M: Medium + ?Sized>(
    medium: &M,
    x0: Vec2,
    p0: Vec2,
    dt: f64,
    t_end: f64,
    delta_x: f64,
) -> DimTrajectory {
    assert!(dt > 0.0, "dt must be positive");
    let mut out = DimTrajectory {
        samples: vec![RaySample { t: 0.0, x: x0, p: p0 }],
        alpha_s: vec![0.0],
        alpha_i: vec![0.0],
        arclength: vec![0.0],
        delta_x,
        dt,
        status: DimStatus::Complete,
    };
    let Some(mut eta) = medium.eta(x0) else {
        out.status = DimStatus::Exited(0);
        return out;
    };
    let steps = (t_end / dt + 1e-9).floor() as usize;
    let (mut x, mut p) = (x0, p0);
    let (mut len, mut ai) = (0.0, 0.0);
    for j in 1..=steps {
        let x1 = x + p / (eta * eta) * dt;
        let Some((eta1, grad1)) = medium.slowness(x1) else {
            out.status = DimStatus::Exited(j);
            break;
        };
        let d = p / p.norm();
        let g = grad1.norm();
        let (dir, loss) = if g < GRADIENT_EPS {
            (d, 0.0)
        } else {
            match refract(d, grad1 / g, eta, eta1) {
                Some(v) => v,
                None => {
                    out.status = DimStatus::TotalInternalReflection(j);
                    break;
                }
            }
        };
        let p1 = project(dir, eta1);
        len += 0.5 * dt * (p.norm() / (eta * eta) + p1.norm() / (eta1 * eta1));
        ai += loss;
        out.samples.push(RaySample { t: j as f64 * dt, x: x1, p: p1 });
        out.arclength.push(len);
        out.alpha_s.push(spreading_loss(len, delta_x));
        out.alpha_i.push(ai);
        (x, p, eta) = (x1, p1, eta1);
    }
    out
}

/// `0.5 ln((L + delta_x) / delta_x)`.
pub fn spreading_loss(arclength: f64, delta_x: f64) -> f64 {
    0.5 * ((arclength + delta_x) / delta_x).ln()
}

/// `A_j = A0 exp(-(alpha_S + alpha_I))`.
pub fn dim_amplitude(traj: &DimTrajectory, a0: f64) -> Vec<f64> {
    traj.alpha_s.iter().zip(&traj.alpha_i).map(|(s, i)| a0 * (-(s + i)).exp()).collect()
}

/// Attenuation of the reversed ray at reversed sample `j`:
/// spreading from the far end plus `sum ln(2 - exp(d_alpha_I))` over the
/// interface increments crossed in reverse order.
pub fn dim_reversed_alpha(traj: &DimTrajectory) -> Result<Vec<f64>> {
    let n = traj.samples.len() - 1;
    let l_end = traj.arclength[n];
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(spreading_loss(l_end - traj.arclength[n], traj.delta_x));
    for k in 1..=n {
        let step = n - k + 1;
        let inc = traj.alpha_i[step] - traj.alpha_i[step - 1];
        let e = inc.exp();
        if e >= 2.0 {
            return Err(Error::ReverseTransmission(step));
        }
        acc += (2.0 - e).ln();
        out.push(spreading_loss(l_end - traj.arclength[n - k], traj.delta_x) + acc);
    }
    Ok(out)
}
