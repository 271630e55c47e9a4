//! Discrete interface method against the Hamiltonian ray: amplitude along
//! a homogeneous ray, and transmission losses across the vessel phantom.

use hamilton_green::amplitude::{amplitude_along, jacobian_ode};
use hamilton_green::dim::{dim_amplitude, dim_reversed_alpha, dim_trace, DimStatus};
use hamilton_green::medium::{make_vessel_phantom, reference_grid};
use hamilton_green::ray_kernel::trace_ray;
use hamilton_green::{CartesianGrid2D, MediumModel, Vec2};

fn main() -> hamilton_green::Result<()> {
    let c = 1500.0;
    let grid = CartesianGrid2D::new(201, 201, 1e-4, 1e-4, Vec2::new(-10e-3, -10e-3))?;
    let medium = MediumModel::homogeneous(grid, c)?;
    let (dt, dx) = (50e-9, 1e-4);
    let dir = Vec2::new(0.6, 0.8);
    let ray = trace_ray(&medium, dx * dir, dir / c, dt, 5e-6);
    let hg = amplitude_along(&ray, &jacobian_ode(&medium, &ray, dx), &medium, 1.0);
    let dim = dim_amplitude(&dim_trace(&medium, dx * dir, dir / c, dt, 5e-6, dx), 1.0);
    println!("   t (us)   exact      ray        interface");
    for j in (0..hg.len()).step_by(20) {
        let exact = (dx / (dx + c * j as f64 * dt)).sqrt();
        println!("{:8.2}  {exact:.6}  {:.6}  {:.6}", j as f64 * dt * 1e6, hg[j].norm(), dim[j]);
    }

    let grid = reference_grid();
    let (phantom, _) = make_vessel_phantom(grid)?;
    let x0 = Vec2::new(12.7e-3, 0.4e-3);
    let p0 = Vec2::new(0.0, 1.0 / 1500.0);
    let traj = dim_trace(&phantom, x0, p0, dt, 40e-6, grid.dx);
    let n = traj.samples.len() - 1;
    let status = match traj.status {
        DimStatus::Complete => "complete".to_string(),
        DimStatus::Exited(j) => format!("left the domain at step {j}"),
        DimStatus::TotalInternalReflection(j) => format!("total internal reflection at step {j}"),
    };
    println!("phantom ray: {status}, arclength {:.2} mm, interface loss {:.4} Np", traj.arclength[n] * 1e3, traj.alpha_i[n]);
    let back = dim_reversed_alpha(&traj)?;
    println!("reversed attenuation at the far end {:.4} Np, at the start {:.4} Np", back[0], back[n]);
    Ok(())
}
