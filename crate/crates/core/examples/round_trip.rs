//! Adjoint of forward data on a downscaled phantom with sensors on every
//! boundary node, ray operators against the finite-difference pair.

use std::time::Instant;

use hamilton_green::medium::make_vessel_phantom;
use hamilton_green::metrics::ncc;
use hamilton_green::operators::{round_trip, time_window};
use hamilton_green::oracle::{fdtd_adjoint, fdtd_forward, FdtdConfig};
use hamilton_green::{CartesianGrid2D, HgConfig, SensorArray};

fn main() -> hamilton_green::Result<()> {
    let grid = CartesianGrid2D::square(64, 128, 0.4e-3)?;
    let (medium, u0) = make_vessel_phantom(grid)?;
    let sensors = SensorArray::boundary(&grid);
    let mut cfg = HgConfig::reference(&grid);
    cfg.n_rays = 1000;
    println!("{} sensors", sensors.len());

    let t0 = Instant::now();
    let table = cfg.build_table(&medium)?;
    let (_, hg) = round_trip(&medium, &u0, &sensors, &cfg, &table)?;
    println!("ray round trip: {:.1} s", t0.elapsed().as_secs_f64());

    let t0 = Instant::now();
    let refine = 2;
    let fd_cfg = FdtdConfig::for_medium(&medium, cfg.dt, refine)?.with_sponge(60 * refine, 1e-2, medium.c_max);
    let w = cfg.window();
    let mut data = fdtd_forward(&medium, &u0, &sensors, cfg.dt, cfg.nt as f64 * cfg.dt, &fd_cfg)?;
    for s in &mut data {
        for (n, v) in s.values.iter_mut().enumerate() {
            *v *= time_window(&w, n as f64 * cfg.dt);
        }
    }
    let fd = fdtd_adjoint(&medium, &data, &sensors, &w, cfg.dt, &fd_cfg)?;
    println!("finite-difference round trip: {:.1} s", t0.elapsed().as_secs_f64());

    let (a, b) = (hg.clone().nonneg(), fd.clone().nonneg());
    println!("NCC raw {:.4}, after non-negativity {:.4}", ncc(&hg.values, &fd.values), ncc(&a.values, &b.values));
    println!("NCC of the non-negative images with u0: ray {:.4}, finite differences {:.4}", ncc(&a.values, &u0.values), ncc(&b.values, &u0.values));
    Ok(())
}
