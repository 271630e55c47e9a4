//! Energy history of the finite-difference solver: conservation while the
//! wave is inside, absorption once it reaches the sponge.

use hamilton_green::oracle::{fdtd_forward_monitored, FdtdConfig};
use hamilton_green::{CartesianGrid2D, MediumModel, ScalarField2D, SensorArray, Vec2};

fn main() -> hamilton_green::Result<()> {
    let grid = CartesianGrid2D::square(81, 81, 0.2e-3)?;
    let c = 1500.0;
    let medium = MediumModel::homogeneous(grid, c)?;
    let centre = Vec2::new(8e-3, 8e-3);
    let u0 = ScalarField2D::from_fn(grid, |x| (-(x - centre).norm_squared() / 0.16e-6).exp());
    let dt = 50e-9;
    for (depth, refl) in [(20, 1e-4), (40, 1e-3)] {
        let cfg = FdtdConfig::for_medium(&medium, dt, 1)?.with_sponge(depth, refl, c);
        let (_, e) = fdtd_forward_monitored(&medium, &u0, &SensorArray::new(vec![centre]), dt, 600, &cfg)?;
        let peak = e.interior.iter().cloned().fold(0.0, f64::max);
        let growth = e.total.windows(2).map(|w| w[1] / w[0] - 1.0).fold(f64::MIN, f64::max);
        println!(
            "sponge {depth} cells: interior energy decay {:.1} dB, largest per-step change of total energy {growth:.2e}",
            10.0 * (peak / e.interior.last().unwrap()).log10()
        );
    }
    Ok(())
}
