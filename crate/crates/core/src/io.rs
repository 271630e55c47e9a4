//! Binary field, series and table files, sensor lists and CSV export.
//!
//! All binary formats share one layout: an ASCII magic line, one ASCII
//! header line of whitespace-separated numbers, then little-endian binary64
//! values. Floats in headers are written with Rust's shortest round-trip
//! formatting so a read-back is bit-exact.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::greens::{DeltaKind, DeltaRep, GreensTable};
use crate::medium::{CartesianGrid2D, ScalarField2D, Vec2};
use crate::operators::{PressureTimeSeries, SensorArray};

pub const FIELD_MAGIC: &str = "HGF1";
pub const SERIES_MAGIC: &str = "HGS1";
pub const TABLE_MAGIC: &str = "HGT1";

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.to_path_buf(), source }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| io_err(path, e))
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| io_err(path, e))
}

/// Cursor over a file image that reports byte offsets in errors.
struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn fail(&self, offset: usize, msg: impl Into<String>) -> Error {
        Error::Format { offset: offset as u64, msg: msg.into() }
    }

    fn line(&mut self) -> Result<&'a str> {
        let start = self.pos;
        let rest = &self.bytes[start..];
        let Some(n) = rest.iter().position(|&b| b == b'\n') else {
            return Err(self.fail(start, "missing newline"));
        };
        self.pos = start + n + 1;
        std::str::from_utf8(&rest[..n]).map_err(|_| self.fail(start, "header is not ASCII"))
    }

    fn magic(&mut self, magic: &str) -> Result<()> {
        let ok = self.bytes.len() > magic.len()
            && &self.bytes[..magic.len()] == magic.as_bytes()
            && self.bytes[magic.len()] == b'\n';
        if !ok {
            return Err(self.fail(0, format!("expected magic {magic}")));
        }
        self.pos = magic.len() + 1;
        Ok(())
    }

    /// Header line split into exactly `n` fields.
    fn header(&mut self, n: usize) -> Result<(usize, Vec<&'a str>)> {
        let start = self.pos;
        let fields: Vec<&str> = self.line()?.split_whitespace().collect();
        if fields.len() != n {
            return Err(self.fail(start, format!("expected {n} header fields, found {}", fields.len())));
        }
        Ok((start, fields))
    }

    fn values(&mut self, count: usize) -> Result<Vec<f64>> {
        let start = self.pos;
        let avail = self.bytes.len() - start;
        if avail < count * 8 {
            return Err(Error::Truncated { offset: start as u64, expected: count, found: avail / 8 });
        }
        if avail > count * 8 {
            return Err(self.fail(start + count * 8, "trailing bytes after payload"));
        }
        self.pos = self.bytes.len();
        Ok(self.bytes[start..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect())
    }
}

fn parse<T: std::str::FromStr>(s: &str, offset: usize, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Format { offset: offset as u64, msg: format!("bad {what}: {s:?}") })
}

fn push_values(out: &mut Vec<u8>, values: &[f64]) {
    out.reserve(values.len() * 8);
    for v in values {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

/// Serialize a field to HGF1 bytes.
pub fn field_to_bytes(field: &ScalarField2D) -> Vec<u8> {
    let g = field.grid;
    let mut out = format!(
        "{FIELD_MAGIC}\n{} {} {:?} {:?} {:?} {:?}\n",
        g.nx, g.ny, g.dx, g.dy, g.origin.x, g.origin.y
    )
    .into_bytes();
    push_values(&mut out, &field.values);
    out
}

pub fn field_from_bytes(bytes: &[u8]) -> Result<ScalarField2D> {
    let mut r = Reader::new(bytes);
    r.magic(FIELD_MAGIC)?;
    let (at, h) = r.header(6)?;
    let nx: usize = parse(h[0], at, "nx")?;
    let ny: usize = parse(h[1], at, "ny")?;
    let f: Vec<f64> = h[2..].iter().map(|s| parse(s, at, "grid value")).collect::<Result<_>>()?;
    let grid = CartesianGrid2D::new(nx, ny, f[0], f[1], Vec2::new(f[2], f[3]))
        .map_err(|e| r.fail(at, e.to_string()))?;
    let values = r.values(nx * ny)?;
    Ok(ScalarField2D { grid, values })
}

pub fn write_field(path: &Path, field: &ScalarField2D) -> Result<()> {
    write_bytes(path, &field_to_bytes(field))
}

pub fn read_field(path: &Path) -> Result<ScalarField2D> {
    field_from_bytes(&read_bytes(path)?)
}

/// Serialize series (all with the same `dt` and length) to HGS1 bytes.
pub fn series_to_bytes(series: &[PressureTimeSeries]) -> Result<Vec<u8>> {
    let nt = series.first().map_or(0, |s| s.values.len());
    let dt = series.first().map_or(0.0, |s| s.dt);
    if series.iter().any(|s| s.values.len() != nt || s.dt != dt) {
        return Err(Error::Argument("series differ in length or time step".into()));
    }
    let mut out = format!("{SERIES_MAGIC}\n{} {nt} {dt:?}\n", series.len()).into_bytes();
    for s in series {
        push_values(&mut out, &s.values);
    }
    Ok(out)
}

pub fn series_from_bytes(bytes: &[u8]) -> Result<Vec<PressureTimeSeries>> {
    let mut r = Reader::new(bytes);
    r.magic(SERIES_MAGIC)?;
    let (at, h) = r.header(3)?;
    let m: usize = parse(h[0], at, "sensor count")?;
    let nt: usize = parse(h[1], at, "sample count")?;
    let dt: f64 = parse(h[2], at, "dt")?;
    let values = r.values(m * nt)?;
    if nt == 0 {
        return Ok((0..m).map(|k| PressureTimeSeries { sensor_index: k, dt, values: vec![] }).collect());
    }
    Ok(values
        .chunks(nt)
        .enumerate()
        .map(|(k, v)| PressureTimeSeries { sensor_index: k, dt, values: v.to_vec() })
        .collect())
}

pub fn write_series(path: &Path, series: &[PressureTimeSeries]) -> Result<()> {
    write_bytes(path, &series_to_bytes(series)?)
}

pub fn read_series(path: &Path) -> Result<Vec<PressureTimeSeries>> {
    series_from_bytes(&read_bytes(path)?)
}

/// HGT1 bytes. The header carries everything needed to rebuild the table:
/// `I dt nt epsKind eps cMin deltaC deltaX lead`; the payload is the
/// `I + 1` in-phase series followed by the `I + 1` quadrature series.
pub fn table_to_bytes(table: &GreensTable) -> Vec<u8> {
    let i = table.c_values.len() - 1;
    let dc = if i > 0 { table.c_values[1] - table.c_values[0] } else { 0.0 };
    let mut out = format!(
        "{TABLE_MAGIC}\n{i} {:?} {} {} {:?} {:?} {:?} {:?} {}\n",
        table.dt,
        table.nt,
        table.rep.kind.name(),
        table.rep.eps,
        table.c_values[0],
        dc,
        table.delta_x,
        table.lead
    )
    .into_bytes();
    for s in table.series.iter().chain(&table.quadrature) {
        push_values(&mut out, s);
    }
    out
}

pub fn table_from_bytes(bytes: &[u8]) -> Result<GreensTable> {
    let mut r = Reader::new(bytes);
    r.magic(TABLE_MAGIC)?;
    let (at, h) = r.header(9)?;
    let i: usize = parse(h[0], at, "rung count")?;
    let dt: f64 = parse(h[1], at, "dt")?;
    let nt: usize = parse(h[2], at, "nt")?;
    let kind = DeltaKind::parse(h[3]).ok_or_else(|| r.fail(at, format!("unknown delta kind {:?}", h[3])))?;
    let eps: f64 = parse(h[4], at, "eps")?;
    let c_min: f64 = parse(h[5], at, "cMin")?;
    let dc: f64 = parse(h[6], at, "deltaC")?;
    let delta_x: f64 = parse(h[7], at, "deltaX")?;
    let lead: usize = parse(h[8], at, "lead")?;
    let len = nt + lead + 1;
    let values = r.values(2 * (i + 1) * len)?;
    let mut chunks = values.chunks(len).map(<[f64]>::to_vec);
    let series: Vec<Vec<f64>> = chunks.by_ref().take(i + 1).collect();
    let quadrature: Vec<Vec<f64>> = chunks.collect();
    let c_values = (0..=i).map(|k| c_min + k as f64 * dc).collect();
    Ok(GreensTable::from_parts(c_values, dt, nt, lead, delta_x, DeltaRep { kind, eps }, series, quadrature))
}

pub fn write_table(path: &Path, table: &GreensTable) -> Result<()> {
    write_bytes(path, &table_to_bytes(table))
}

pub fn read_table(path: &Path) -> Result<GreensTable> {
    table_from_bytes(&read_bytes(path)?)
}

/// One `x y` pair (meters) per line; blank lines and `#` comments skipped.
pub fn parse_sensors(text: &str) -> Result<SensorArray> {
    let mut positions = Vec::new();
    let mut offset = 0usize;
    for line in text.split_inclusive('\n') {
        let body = line.split('#').next().unwrap_or("").trim();
        if !body.is_empty() {
            let f: Vec<&str> = body.split_whitespace().collect();
            if f.len() != 2 {
                return Err(Error::Format { offset: offset as u64, msg: "expected `x y`".into() });
            }
            let x: f64 = parse(f[0], offset, "x")?;
            let y: f64 = parse(f[1], offset, "y")?;
            positions.push(Vec2::new(x, y));
        }
        offset += line.len();
    }
    Ok(SensorArray::new(positions))
}

pub fn sensors_to_text(sensors: &SensorArray) -> String {
    sensors.positions.iter().map(|p| format!("{:?} {:?}\n", p.x, p.y)).collect()
}

pub fn read_sensors(path: &Path) -> Result<SensorArray> {
    let bytes = read_bytes(path)?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Format {
        offset: e.valid_up_to() as u64,
        msg: "sensor list is not UTF-8".into(),
    })?;
    parse_sensors(text)
}

pub fn write_sensors(path: &Path, sensors: &SensorArray) -> Result<()> {
    write_bytes(path, sensors_to_text(sensors).as_bytes())
}

/// C's `%.17g`.
pub fn fmt_g17(v: f64) -> String {
    const P: i32 = 17;
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, v);
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let x: i32 = exp.parse().expect("integer exponent");
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if !(-4..P).contains(&x) {
        let sign = if x < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mant), x.abs())
    } else {
        trim(&format!("{:.*}", (P - 1 - x) as usize, v))
    }
}

/// CSV for a field: `x,y,value` per node.
pub fn field_csv(field: &ScalarField2D) -> String {
    let g = field.grid;
    let mut s = String::from("x,y,value\n");
    for j in 0..g.ny {
        for i in 0..g.nx {
            let p = g.node(i, j);
            s += &format!("{},{},{}\n", fmt_g17(p.x), fmt_g17(p.y), fmt_g17(field.at(i, j)));
        }
    }
    s
}

/// CSV for series: `t,s0,s1,...` per time sample.
pub fn series_csv(series: &[PressureTimeSeries]) -> String {
    let mut s = String::from("t");
    for k in 0..series.len() {
        s += &format!(",s{k}");
    }
    s.push('\n');
    let nt = series.iter().map(|x| x.values.len()).max().unwrap_or(0);
    let dt = series.first().map_or(0.0, |x| x.dt);
    for n in 0..nt {
        s += &fmt_g17(n as f64 * dt);
        for x in series {
            s.push(',');
            s += &fmt_g17(x.values.get(n).copied().unwrap_or(0.0));
        }
        s.push('\n');
    }
    s
}

/// Contents of a binary file of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum DataFile {
    Field(ScalarField2D),
    Series(Vec<PressureTimeSeries>),
}

/// Read HGF1 or HGS1, dispatching on the magic.
pub fn read_any(path: &Path) -> Result<DataFile> {
    let bytes = read_bytes(path)?;
    if bytes.starts_with(FIELD_MAGIC.as_bytes()) {
        field_from_bytes(&bytes).map(DataFile::Field)
    } else if bytes.starts_with(SERIES_MAGIC.as_bytes()) {
        series_from_bytes(&bytes).map(DataFile::Series)
    } else {
        Err(Error::Format { offset: 0, msg: "expected magic HGF1 or HGS1".into() })
    }
}

pub fn to_csv(data: &DataFile) -> String {
    match data {
        DataFile::Field(f) => field_csv(f),
        DataFile::Series(s) => series_csv(s),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greens::build_g0_table;

    fn field() -> ScalarField2D {
        let g = CartesianGrid2D::new(5, 3, 0.2e-3, 0.1e-3, Vec2::new(-1e-3, 0.3e-3)).unwrap();
        ScalarField2D::from_fn(g, |x| (x.x * 1e4).sin() + 1.0 / 3.0 * x.y)
    }

    #[test]
    fn field_round_trip_is_bit_exact() {
        let f = field();
        let back = field_from_bytes(&field_to_bytes(&f)).unwrap();
        assert_eq!(back.grid, f.grid);
        assert!(back.values.iter().zip(&f.values).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn wrong_magic() {
        let mut b = field_to_bytes(&field());
        b[3] = b'2';
        assert!(matches!(field_from_bytes(&b), Err(Error::Format { offset: 0, .. })));
    }

    #[test]
    fn short_payload() {
        let mut b = field_to_bytes(&field());
        b.truncate(b.len() - 8);
        match field_from_bytes(&b) {
            Err(Error::Truncated { expected, found, .. }) => assert_eq!((expected, found), (15, 14)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_header_reports_offset() {
        let b = b"HGF1\n5 3 abc 1 0 0\n".to_vec();
        assert!(matches!(field_from_bytes(&b), Err(Error::Format { offset: 5, .. })));
    }

    #[test]
    fn series_round_trip() {
        let s: Vec<PressureTimeSeries> = (0..3)
            .map(|m| PressureTimeSeries { sensor_index: m, dt: 50e-9, values: (0..7).map(|k| (k * m) as f64 / 7.0).collect() })
            .collect();
        let back = series_from_bytes(&series_to_bytes(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn table_round_trip() {
        let t = build_g0_table(1450.0, 1550.0, 50.0, 50e-9, 40, DeltaRep::gaussian(100e-9), 0.2e-3).unwrap();
        let back = table_from_bytes(&table_to_bytes(&t)).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn sensor_text() {
        let s = parse_sensors("# list\n0.001 0.002\n\n2.5e-3 0\n").unwrap();
        assert_eq!(s.positions, vec![Vec2::new(0.001, 0.002), Vec2::new(2.5e-3, 0.0)]);
        assert_eq!(parse_sensors(&sensors_to_text(&s)).unwrap(), s);
        assert!(matches!(parse_sensors("0 0\n1 2 3\n"), Err(Error::Format { offset: 4, .. })));
    }

    #[test]
    fn g17_matches_printf() {
        assert_eq!(fmt_g17(0.1), "0.10000000000000001");
        assert_eq!(fmt_g17(1.0), "1");
        assert_eq!(fmt_g17(-2.5), "-2.5");
        assert_eq!(fmt_g17(1e-5), "1.0000000000000001e-05");
        assert_eq!(fmt_g17(1e20), "1e+20");
        assert_eq!(fmt_g17(123456.0), "123456");
        assert_eq!(fmt_g17(0.0001), "0.0001");
        for v in [0.1, 1.0 / 3.0, 6.02e23, -4.9e-324, 1500.0] {
            assert_eq!(fmt_g17(v).parse::<f64>().unwrap(), v);
        }
    }
}
