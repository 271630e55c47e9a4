//! Build the vessel phantom on the reference grid and write it to disk.

use hamilton_green::io::{write_field, write_sensors};
use hamilton_green::medium::{make_vessel_phantom, reference_grid};
use hamilton_green::SensorArray;

fn main() -> hamilton_green::Result<()> {
    let grid = reference_grid();
    let (medium, u0) = make_vessel_phantom(grid)?;
    let support = u0.values.iter().filter(|v| **v > 0.0).count();
    println!("grid {}x{}, dx {} m", grid.nx, grid.ny, grid.dx);
    println!("sound speed {:.1} .. {:.1} m/s", medium.c_min, medium.c_max);
    println!("initial pressure support: {support} of {} nodes", grid.len());

    let dir = std::env::temp_dir().join("hamilton_green_phantom");
    std::fs::create_dir_all(&dir).map_err(|e| hamilton_green::Error::Io { path: dir.clone(), source: e })?;
    write_field(&dir.join("medium.hgf"), &medium.sound_speed)?;
    write_field(&dir.join("u0.hgf"), &u0)?;
    write_sensors(&dir.join("sensors.txt"), &SensorArray::boundary(&grid))?;
    println!("wrote medium.hgf, u0.hgf and sensors.txt to {}", dir.display());
    Ok(())
}
