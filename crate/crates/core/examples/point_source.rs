//! Homogeneous medium, smoothed point source 10 mm from a sensor: the ray
//! operator against direct quadrature of the Green's formula and against
//! the finite-difference solver.

use std::time::Instant;

use hamilton_green::greens::{g0_2d_dt, mollify_series};
use hamilton_green::metrics::{ncc, peak_normalize, rel_l2};
use hamilton_green::operators::{forward_all, time_window};
use hamilton_green::oracle::{fdtd_forward, FdtdConfig};
use hamilton_green::{CartesianGrid2D, HgConfig, MediumModel, ScalarField2D, SensorArray, Vec2};

fn main() -> hamilton_green::Result<()> {
    let h = 0.05e-3;
    let grid = CartesianGrid2D::new(321, 241, h, h, Vec2::zeros())?;
    let c = 1500.0;
    let medium = MediumModel::homogeneous(grid, c)?;
    let sensor = Vec2::new(3.0123e-3, 4.0371e-3);
    let src = sensor + 10e-3 * Vec2::new(0.3f64.cos(), 0.3f64.sin());
    let sigma = 0.15e-3;
    let u0 = ScalarField2D::from_fn(grid, |x| (-(x - src).norm_squared() / (sigma * sigma)).exp());
    let sensors = SensorArray::new(vec![sensor]);

    let mut cfg = HgConfig::reference(&grid);
    cfg.nt = 200;
    cfg.n_rays = 4000;
    let t0 = Instant::now();
    let table = cfg.build_table(&medium)?;
    let hg = forward_all(&medium, &u0, &sensors, &cfg, &table)?.remove(0).values;
    println!("ray operator: {:.2} s", t0.elapsed().as_secs_f64());

    let w = cfg.window();
    let mut quad = vec![0.0; cfg.nt];
    for (n, q) in quad.iter_mut().enumerate() {
        let t = n as f64 * cfg.dt;
        let mut acc = 0.0;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let v = u0.at(i, j);
                if v > 1e-12 {
                    acc += v * g0_2d_dt(c, t, (grid.node(i, j) - sensor).norm(), cfg.rep)?;
                }
            }
        }
        *q = acc * h * h / (c * c) * time_window(&w, t);
    }
    println!("vs quadrature: rel L2 {:.4}", rel_l2(&hg, &quad));
    let mut front = vec![0.0; cfg.nt];
    for (n, q) in front.iter_mut().enumerate() {
        let t = n as f64 * cfg.dt;
        let mut acc = 0.0;
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                let v = u0.at(i, j);
                if v > 1e-12 {
                    acc += v * hamilton_green::greens::front_kernel(c, (grid.node(i, j) - sensor).norm(), t, cfg.rep);
                }
            }
        }
        *q = acc * h * h / (c * c) * time_window(&w, t);
    }
    println!("vs front-form quadrature: rel L2 {:.4}; front-form vs exact {:.4}", rel_l2(&hg, &front), rel_l2(&front, &quad));

    let t0 = Instant::now();
    let fd_cfg = FdtdConfig::for_medium(&medium, cfg.dt, 1)?;
    let fd = fdtd_forward(&medium, &u0, &sensors, cfg.dt, cfg.nt as f64 * cfg.dt, &fd_cfg)?.remove(0).values;
    let fd: Vec<f64> = mollify_series(&fd, cfg.dt, cfg.rep)
        .iter()
        .enumerate()
        .map(|(n, v)| v * time_window(&w, n as f64 * cfg.dt))
        .collect();
    println!("finite differences: {:.2} s", t0.elapsed().as_secs_f64());
    let (a, b) = (peak_normalize(&hg), peak_normalize(&fd));
    println!("vs finite differences (peak-normalized): rel L2 {:.4}, NCC {:.4}", rel_l2(&a, &b), ncc(&a, &b));
    let (qa, qb) = (peak_normalize(&quad), peak_normalize(&fd));
    println!("quadrature vs finite differences: rel L2 {:.4}", rel_l2(&qa, &qb));
    Ok(())
}
