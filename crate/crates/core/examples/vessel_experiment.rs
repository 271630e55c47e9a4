//! Full-size vessel phantom: ray operator against the finite-difference
//! solver at three sensors, plus the shadow left by the left-edge sensor.

use std::time::Instant;

use hamilton_green::greens::mollify_series;
use hamilton_green::medium::{make_vessel_phantom, reference_grid};
use hamilton_green::metrics::ncc;
use hamilton_green::operators::{coverage_map, forward_all, prepare_cone, time_window};
use hamilton_green::oracle::{fdtd_forward, FdtdConfig};
use hamilton_green::{HgConfig, SensorArray, Vec2};

fn main() -> hamilton_green::Result<()> {
    let grid = reference_grid();
    let (medium, u0) = make_vessel_phantom(grid)?;
    let names = ["S1", "S2", "S3"];
    let sensors = SensorArray::new(vec![
        Vec2::new(25.4e-3, 17.0e-3),
        Vec2::new(0.0, 34.0e-3),
        Vec2::new(12.8e-3, 50.8e-3),
    ]);
    let refine: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let cfg = HgConfig::reference(&grid);

    let t0 = Instant::now();
    let table = cfg.build_table(&medium)?;
    let hg = forward_all(&medium, &u0, &sensors, &cfg, &table)?;
    println!("ray operator, 3 sensors: {:.2} s", t0.elapsed().as_secs_f64());

    let t0 = Instant::now();
    // a deep sponge: the 2D tails are long and a thin one reflects them
    let fd_cfg = FdtdConfig::for_medium(&medium, cfg.dt, refine)?.with_sponge(120 * refine, 1e-2, medium.c_max);
    let fd = fdtd_forward(&medium, &u0, &sensors, cfg.dt, cfg.nt as f64 * cfg.dt, &fd_cfg)?;
    println!("finite differences (refine {refine}): {:.2} s", t0.elapsed().as_secs_f64());

    let w = cfg.window();
    for (m, name) in names.iter().enumerate() {
        let f: Vec<f64> = mollify_series(&fd[m].values, cfg.dt, cfg.rep)
            .iter()
            .enumerate()
            .map(|(n, v)| v * time_window(&w, n as f64 * cfg.dt))
            .collect();
        println!("{name}: NCC {:.4}", ncc(&hg[m].values, &f));
        if std::env::var("DUMP").is_ok() {
            for (n, (a, b)) in hg[m].values.iter().zip(&f).enumerate() {
                println!("D{m} {n} {a} {b}");
            }
        }
    }

    let cone = prepare_cone(&medium, sensors.positions[1], &cfg);
    let cov = coverage_map(&cone.cone, &grid);
    let covered = cov.values.iter().filter(|v| **v > 0.0).count();
    println!(
        "S2 coverage: {covered}/{} nodes; bottom-left corner {}, top-left corner {}",
        grid.len(),
        cov.at(0, 0),
        cov.at(0, grid.ny - 1)
    );
    Ok(())
}
