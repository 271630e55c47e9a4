//! Binary field and series files, sensor lists and CSV export.

use hamilton_green::io::{read_any, read_field, read_series, to_csv, write_field, write_series};
use hamilton_green::{CartesianGrid2D, PressureTimeSeries, ScalarField2D, Vec2};

fn main() -> hamilton_green::Result<()> {
    let dir = std::env::temp_dir().join("hamilton_green_io");
    std::fs::create_dir_all(&dir).map_err(|e| hamilton_green::Error::Io { path: dir.clone(), source: e })?;
    let grid = CartesianGrid2D::new(4, 3, 1e-4, 2e-4, Vec2::new(0.0, -1e-4))?;
    let f = ScalarField2D::from_fn(grid, |x| x.x * 1e4 + x.y * 1e3);
    write_field(&dir.join("f.hgf"), &f)?;
    assert_eq!(read_field(&dir.join("f.hgf"))?, f);
    let s: Vec<PressureTimeSeries> =
        (0..2).map(|m| PressureTimeSeries { sensor_index: m, dt: 50e-9, values: vec![m as f64, 0.5, -1.0] }).collect();
    write_series(&dir.join("s.hgs"), &s)?;
    assert_eq!(read_series(&dir.join("s.hgs"))?, s);
    print!("{}", to_csv(&read_any(&dir.join("f.hgf"))?));
    print!("{}", to_csv(&read_any(&dir.join("s.hgs"))?));
    Ok(())
}
