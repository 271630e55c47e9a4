//! ODE and proximal Jacobians on a smooth lens and on its gridded copy,
//! and the Keller-Maslov counts past the focus.

use hamilton_green::amplitude::{jacobian_ode, jacobian_proximal_in_cone};
use hamilton_green::medium::{AnalyticLens, Medium};
use hamilton_green::ray_kernel::{shoot_cone, RayCone};
use hamilton_green::{CartesianGrid2D, Vec2};

fn report<M: Medium>(name: &str, medium: &M, cone: &RayCone, dx: f64) {
    let mut devs = Vec::new();
    let mut focused = 0;
    for (i, ray) in cone.rays.iter().enumerate() {
        if ray.valid_len() < 3 {
            continue;
        }
        let ode = jacobian_ode(medium, ray, dx);
        if ode.maslov.last().copied().unwrap_or(0) > 0 {
            focused += 1;
            continue;
        }
        let prox = jacobian_proximal_in_cone(cone, i);
        let n = ode.q.len().min(prox.q.len()) - 1;
        devs.push((0..n).map(|j| (ode.q[j] - prox.q[j]).abs() / ode.q[j].abs()).fold(0.0, f64::max));
    }
    devs.sort_by(f64::total_cmp);
    let within = devs.iter().filter(|d| **d <= 0.02).count();
    println!(
        "{name}: {focused} rays pass a caustic; of {} caustic-free rays {within} agree within 2%, median deviation {:.2e}",
        devs.len(),
        devs[devs.len() / 2]
    );
}

fn main() -> hamilton_green::Result<()> {
    let grid = CartesianGrid2D::square(128, 128, 0.2e-3)?;
    let lens = AnalyticLens::centered(grid, 0.2);
    let sensor = Vec2::new(1e-3, 12.7e-3);
    let cone = shoot_cone(&lens, sensor, 1000, 50e-9, 20e-6, grid.dx);
    report("analytic lens", &lens, &cone, grid.dx);
    let gridded = lens.to_model()?;
    let cone = shoot_cone(&gridded, sensor, 1000, 50e-9, 20e-6, grid.dx);
    report("nearest-node lens", &gridded, &cone, grid.dx);
    Ok(())
}
