//! Shoot a 2000-ray cone from each experiment sensor and check the
//! eikonal constraint along every sample.

use hamilton_green::medium::{make_vessel_phantom, reference_grid, Medium};
use hamilton_green::ray_kernel::shoot_cone;
use hamilton_green::Vec2;

fn main() -> hamilton_green::Result<()> {
    let grid = reference_grid();
    let (medium, _) = make_vessel_phantom(grid)?;
    for (name, s) in [("S1", Vec2::new(25.4e-3, 17.0e-3)), ("S2", Vec2::new(0.0, 34.0e-3)), ("S3", Vec2::new(12.8e-3, 50.8e-3))] {
        let t0 = std::time::Instant::now();
        let cone = shoot_cone(&medium, s, 2000, 50e-9, 40e-6, grid.dx);
        let secs = t0.elapsed().as_secs_f64();
        let exited = cone.rays.iter().filter(|r| r.exited_at.is_some()).count();
        let samples: usize = cone.rays.iter().map(|r| r.valid_len()).sum();
        let mut worst: f64 = 0.0;
        for r in &cone.rays {
            for smp in r.valid() {
                let eta = medium.eta(smp.x).expect("inside");
                worst = worst.max((smp.p.norm() - eta).abs() / eta);
            }
        }
        println!("{name}: {samples} samples, {exited} rays left the domain, max | |p| - eta | / eta = {worst:.1e} ({secs:.2} s)");
    }
    Ok(())
}
