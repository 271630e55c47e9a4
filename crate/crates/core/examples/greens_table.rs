//! Free-space Green's functions, the smoothed delta representations and
//! the tabulated front-form kernels used by the ray operators.

use hamilton_green::greens::{build_g0_table, delta_rep, g0_2d, g0_3d, DeltaRep};

fn main() -> hamilton_green::Result<()> {
    let dt = 50e-9;
    let eps = 2.0 * dt;
    for rep in [DeltaRep::gaussian(eps), DeltaRep::dirichlet(eps)] {
        let (v, dv) = delta_rep(rep, 0.3 * eps);
        println!("{:?}: delta(0.3 eps) = {v:.4e}, derivative {dv:.4e}, half width {:.2e} s", rep.kind, rep.half_width());
    }
    let rep = DeltaRep::gaussian(eps);
    let (c, r) = (1500.0, 3e-3);
    for k in [38, 40, 42, 60] {
        let t = k as f64 * dt;
        println!("t = {:5.2} us: G2 {:.4e}, G3 {:.4e}", t * 1e6, g0_2d(c, t, r, rep)?, g0_3d(c, t, r, rep)?);
    }
    let table = build_g0_table(1350.0, 1650.0, 10.0, dt, 800, rep, 0.2e-3)?;
    println!("table: {} speed rungs, {} samples per kernel", table.c_values.len(), table.series_len());
    for c in [1350.0, 1500.0, 1650.0] {
        let rung = table.rung(c);
        println!("c = {c}: rung {rung}, kernel peak at sample {}", table.peak_index(rung));
    }
    Ok(())
}
