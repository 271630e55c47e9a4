//! Reversed rays, reversed Jacobians and reversed attenuation factors.

use hamilton_green::amplitude::{attenuations, jacobian_ode, reversed_density};
use hamilton_green::medium::AnalyticLens;
use hamilton_green::ray_kernel::{reverse_ray, trace_cone_ray, trace_ray};
use hamilton_green::{CartesianGrid2D, Vec2};

fn main() -> hamilton_green::Result<()> {
    let grid = CartesianGrid2D::square(128, 128, 0.2e-3)?;
    let lens = AnalyticLens::centered(grid, 0.1);
    let (dt, dx) = (50e-9, grid.dx);
    let ray = trace_cone_ray(&lens, Vec2::new(2e-3, 11e-3), 0.15, dt, 12e-6, dx);
    let rev = reverse_ray(&ray);
    let n = ray.valid_len() - 1;
    println!("forward ray: {} samples, ends at ({:.3}, {:.3}) mm", n + 1, ray.samples[n].x.x * 1e3, ray.samples[n].x.y * 1e3);

    let last = ray.samples[n];
    let back = trace_ray(&lens, last.x, -last.p, dt, ray.duration());
    let miss = (back.samples.last().unwrap().x - ray.samples[0].x).norm();
    println!("re-traced reversed ray misses the start by {:.2e} m (2 c_max dt = {:.2e} m)", miss, 2.0 * 1650.0 * dt);
    assert_eq!(reverse_ray(&rev).samples, ray.samples);

    let d = jacobian_ode(&lens, &ray, dx);
    let dr = reversed_density(&d)?;
    let worst = (0..=n).map(|j| (dr.q[j] * d.q[n] - d.q[n - j]).abs() / d.q[n - j].abs()).fold(0.0, f64::max);
    println!("q_R(t) q(T) vs q(T - t): max relative difference {worst:.1e}");
    let att = attenuations(&ray, &d, &lens);
    let worst = att.mu.iter().zip(&att.mu_r).map(|(a, b)| (a * b - 1.0).abs()).fold(0.0, f64::max);
    println!("mu mu_R - 1: max {worst:.1e}");
    Ok(())
}
