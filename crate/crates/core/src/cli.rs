//! Command-line front end (`hgsolve`).
//!
//! Settings resolve as flags, then `key = value` lines from `--config`,
//! then defaults. Exit codes: 0 success, 1 usage, 2 file or format, 3
//! numerical or configuration.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::amplitude::JacobianMethod;
use crate::error::{Error, Result};
use crate::greens::{DeltaKind, DeltaRep};
use crate::io;
use crate::medium::{make_lens_medium, make_vessel_phantom, CartesianGrid2D, MediumModel, ScalarField2D};
use crate::metrics;
use crate::operators::{adjoint_all, forward_all, time_window, HgConfig, SensorArray, TimeWindow};
use crate::oracle::{dot_test, fdtd_adjoint, fdtd_forward, FdtdConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Hg,
    Fdtd,
}

impl FromStr for Engine {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PhantomKind {
    Vessel,
    Lens,
    Homogeneous,
}

#[derive(Parser, Debug)]
#[command(name = "hgsolve", version, about = "Ray-based photoacoustic forward/adjoint solver")]
pub struct Cli {
    /// Export an HGF1 or HGS1 file as CSV.
    #[arg(long, value_name = "FILE", global = true)]
    pub csv: Option<PathBuf>,
    /// CSV destination (default: stdout).
    #[arg(long, value_name = "FILE", global = true, requires = "csv")]
    pub csv_out: Option<PathBuf>,
    /// Worker threads (falls back to HG_THREADS).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// `key = value` settings file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Write a sound-speed map and an initial pressure.
    Phantom(PhantomArgs),
    /// Initial pressure to sensor series.
    Forward(RunArgs),
    /// Sensor series to image.
    Adjoint(RunArgs),
    /// Build and cache a Green's kernel table.
    Table(RunArgs),
    /// L2, Linf and normalized cross-correlation between two files.
    Compare { a: PathBuf, b: PathBuf },
    /// Dot test of the finite-difference forward/adjoint pair.
    Dottest(DotArgs),
}

#[derive(Args, Debug)]
pub struct PhantomArgs {
    /// Grid size `NXxNY`.
    #[arg(long, default_value = "128x256")]
    pub grid: String,
    #[arg(long, default_value_t = 0.2e-3)]
    pub dx: f64,
    #[arg(long, value_enum, default_value_t = PhantomKind::Vessel)]
    pub kind: PhantomKind,
    /// Lens contrast (lens kind only).
    #[arg(long, default_value_t = 0.2)]
    pub contrast: f64,
    #[arg(long, default_value = "medium.hgf")]
    pub medium: PathBuf,
    #[arg(long, default_value = "u0.hgf")]
    pub u0: PathBuf,
    /// Also write the boundary sensor list here.
    #[arg(long)]
    pub sensors: Option<PathBuf>,
}

#[derive(Args, Debug, Default)]
pub struct RunArgs {
    #[arg(long, value_enum)]
    pub engine: Option<Engine>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Record length, s.
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    #[arg(long)]
    pub rays: Option<usize>,
    #[arg(long)]
    pub delta_x: Option<f64>,
    #[arg(long)]
    pub delta_c: Option<f64>,
    #[arg(long)]
    pub eps_kind: Option<String>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub taper: Option<f64>,
    /// ode or proximal.
    #[arg(long)]
    pub jacobian: Option<String>,
    /// Project the adjoint image onto non-negative values.
    #[arg(long)]
    pub nonneg: bool,
    /// Finite-difference grid refinement factor.
    #[arg(long)]
    pub refine: Option<usize>,
    #[arg(long)]
    pub medium: Option<PathBuf>,
    #[arg(long)]
    pub u0: Option<PathBuf>,
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub sensors: Option<PathBuf>,
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DotArgs {
    #[arg(long, default_value = "64x64")]
    pub grid: String,
    #[arg(long, default_value_t = 0.2e-3)]
    pub dx: f64,
    #[arg(long, default_value_t = 8)]
    pub sensors: usize,
    #[arg(long, default_value_t = 3)]
    pub trials: usize,
    #[arg(long, default_value_t = 50e-9)]
    pub dt: f64,
    #[arg(long = "T", default_value_t = 10e-6)]
    pub t_end: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = PhantomKind::Vessel)]
    pub kind: PhantomKind,
}

/// Fully resolved settings for forward, adjoint and table runs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub engine: Engine,
    pub dt: f64,
    pub t_end: f64,
    pub n_rays: usize,
    /// `None` means one grid cell.
    pub delta_x: Option<f64>,
    pub delta_c: f64,
    pub eps_kind: DeltaKind,
    /// `None` means `2 dt`.
    pub eps: Option<f64>,
    pub taper_fraction: f64,
    pub jacobian: JacobianMethod,
    pub nonneg: bool,
    pub refine: usize,
    pub medium: PathBuf,
    pub u0: PathBuf,
    pub data: PathBuf,
    pub sensors: Option<PathBuf>,
    pub table: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            engine: Engine::Hg,
            dt: 50e-9,
            t_end: 40e-6,
            n_rays: 2000,
            delta_x: None,
            delta_c: 10.0,
            eps_kind: DeltaKind::Gaussian,
            eps: None,
            taper_fraction: 0.1,
            jacobian: JacobianMethod::Ode,
            nonneg: false,
            refine: 1,
            medium: "medium.hgf".into(),
            u0: "u0.hgf".into(),
            data: "data.hgs".into(),
            sensors: None,
            table: None,
            output: None,
        }
    }
}

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let body = line.split('#').next().unwrap_or("").trim();
        if !body.is_empty() {
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| Error::Format { offset: offset as u64, msg: "expected `key = value`".into() })?;
            out.insert(k.trim().replace('-', "_"), v.trim().to_string());
        }
        offset += line.len();
    }
    Ok(out)
}

fn conf<T: FromStr>(map: &BTreeMap<String, String>, key: &str) -> Result<Option<T>> {
    map.get(key)
        .map(|v| v.parse::<T>().map_err(|_| Error::Config(format!("bad value for `{key}`: {v:?}"))))
        .transpose()
}

fn parse_jacobian(s: &str) -> Result<JacobianMethod> {
    match s {
        "ode" => Ok(JacobianMethod::Ode),
        "proximal" => Ok(JacobianMethod::Proximal),
        _ => Err(Error::Argument(format!("unknown jacobian method {s:?}"))),
    }
}

fn parse_kind(s: &str) -> Result<DeltaKind> {
    DeltaKind::parse(s).ok_or_else(|| Error::Argument(format!("unknown delta kind {s:?}")))
}

const CONFIG_KEYS: &[&str] = &[
    "engine", "dt", "t", "t_end", "rays", "delta_x", "delta_c", "eps_kind", "eps", "taper", "jacobian", "nonneg",
    "refine", "medium", "u0", "data", "sensors", "table", "out",
];

impl RunConfig {
    /// Layer flags over config-file keys over defaults.
    pub fn resolve(file: &BTreeMap<String, String>, a: &RunArgs) -> Result<Self> {
        if let Some(k) = file.keys().find(|k| !CONFIG_KEYS.contains(&k.to_lowercase().as_str())) {
            return Err(Error::Config(format!("unknown config key `{k}`")));
        }
        let d = Self::default();
        let t_file = match conf::<f64>(file, "T")? {
            Some(t) => Some(t),
            None => conf::<f64>(file, "t_end")?,
        };
        let kind = match a.eps_kind.clone().or_else(|| file.get("eps_kind").cloned()) {
            Some(s) => parse_kind(&s)?,
            None => d.eps_kind,
        };
        let jacobian = match a.jacobian.clone().or_else(|| file.get("jacobian").cloned()) {
            Some(s) => parse_jacobian(&s)?,
            None => d.jacobian,
        };
        let path = |flag: &Option<PathBuf>, key: &str| flag.clone().or_else(|| file.get(key).map(PathBuf::from));
        let cfg = Self {
            engine: a.engine.or(conf(file, "engine")?).unwrap_or(d.engine),
            dt: a.dt.or(conf(file, "dt")?).unwrap_or(d.dt),
            t_end: a.t_end.or(t_file).unwrap_or(d.t_end),
            n_rays: a.rays.or(conf(file, "rays")?).unwrap_or(d.n_rays),
            delta_x: a.delta_x.or(conf(file, "delta_x")?),
            delta_c: a.delta_c.or(conf(file, "delta_c")?).unwrap_or(d.delta_c),
            eps_kind: kind,
            eps: a.eps.or(conf(file, "eps")?),
            taper_fraction: a.taper.or(conf(file, "taper")?).unwrap_or(d.taper_fraction),
            jacobian,
            nonneg: a.nonneg || conf(file, "nonneg")?.unwrap_or(false),
            refine: a.refine.or(conf(file, "refine")?).unwrap_or(d.refine),
            medium: path(&a.medium, "medium").unwrap_or(d.medium),
            u0: path(&a.u0, "u0").unwrap_or(d.u0),
            data: path(&a.data, "data").unwrap_or(d.data),
            sensors: path(&a.sensors, "sensors"),
            table: path(&a.table, "table"),
            output: path(&a.out, "out"),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let ok = pos(self.dt)
            && pos(self.t_end)
            && self.n_rays > 0
            && self.delta_x.is_none_or(pos)
            && pos(self.delta_c)
            && self.eps.is_none_or(pos)
            && pos(self.taper_fraction)
            && self.taper_fraction <= 0.5
            && self.refine > 0;
        if !ok {
            return Err(Error::Config("numeric settings must be positive (taper at most 0.5)".into()));
        }
        if self.t_end / self.dt < 2.0 {
            return Err(Error::Config("record must span at least two samples".into()));
        }
        if self.engine == Engine::Hg && self.n_rays < 3 {
            return Err(Error::Config("the ray engine needs at least 3 rays".into()));
        }
        Ok(())
    }

    pub fn nt(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }

    pub fn hg(&self, grid: &CartesianGrid2D) -> HgConfig {
        HgConfig {
            dt: self.dt,
            nt: self.nt(),
            n_rays: self.n_rays,
            delta_x: self.delta_x.unwrap_or(grid.dx),
            jacobian: self.jacobian,
            taper_fraction: self.taper_fraction,
            delta_c: self.delta_c,
            rep: DeltaRep { kind: self.eps_kind, eps: self.eps.unwrap_or(2.0 * self.dt) },
        }
    }
}

fn parse_grid(s: &str, h: f64) -> Result<CartesianGrid2D> {
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(|| Error::Argument(format!("grid {s:?} is not NXxNY")))?;
    let nx: usize = a.trim().parse().map_err(|_| Error::Argument(format!("bad grid width {a:?}")))?;
    let ny: usize = b.trim().parse().map_err(|_| Error::Argument(format!("bad grid height {b:?}")))?;
    CartesianGrid2D::square(nx, ny, h)
}

fn make_phantom(kind: PhantomKind, grid: CartesianGrid2D, contrast: f64) -> Result<(MediumModel, ScalarField2D)> {
    let (_, u0) = make_vessel_phantom(grid)?;
    let m = match kind {
        PhantomKind::Vessel => return make_vessel_phantom(grid),
        PhantomKind::Lens => make_lens_medium(grid, contrast)?,
        PhantomKind::Homogeneous => MediumModel::homogeneous(grid, 1500.0)?,
    };
    Ok((m, u0))
}

fn load_sensors(path: &Option<PathBuf>, grid: &CartesianGrid2D) -> Result<SensorArray> {
    let s = match path {
        Some(p) => io::read_sensors(p)?,
        None => SensorArray::boundary(grid),
    };
    s.validate(grid)?;
    Ok(s)
}

fn load_medium(path: &Path) -> Result<MediumModel> {
    MediumModel::new(io::read_field(path)?)
}

fn out_path(cfg: &RunConfig, default: &str) -> PathBuf {
    cfg.output.clone().unwrap_or_else(|| default.into())
}

fn cmd_forward(cfg: &RunConfig, log: &mut dyn Write) -> Result<()> {
    let medium = load_medium(&cfg.medium)?;
    let u0 = io::read_field(&cfg.u0)?;
    if u0.grid != medium.grid() {
        return Err(Error::Config("u0 and medium grids differ".into()));
    }
    let sensors = load_sensors(&cfg.sensors, &medium.grid())?;
    let nt = cfg.nt();
    let series = match cfg.engine {
        Engine::Hg => {
            let hg = cfg.hg(&medium.grid());
            hg.validate()?;
            let table = hg_table(cfg, &hg, &medium)?;
            forward_all(&medium, &u0, &sensors, &hg, &table)?
        }
        Engine::Fdtd => {
            let fd = FdtdConfig::for_medium(&medium, cfg.dt, cfg.refine)?;
            let mut s = fdtd_forward(&medium, &u0, &sensors, cfg.dt, cfg.t_end, &fd)?;
            let w = TimeWindow::for_samples(nt, cfg.dt, cfg.taper_fraction);
            for x in &mut s {
                for (k, v) in x.values.iter_mut().enumerate() {
                    *v *= time_window(&w, k as f64 * cfg.dt);
                }
            }
            s
        }
    };
    let out = out_path(cfg, "data.hgs");
    io::write_series(&out, &series)?;
    let _ = writeln!(log, "wrote {} series x {} samples to {}", series.len(), nt, out.display());
    Ok(())
}

fn hg_table(cfg: &RunConfig, hg: &HgConfig, medium: &MediumModel) -> Result<crate::greens::GreensTable> {
    let Some(p) = &cfg.table else {
        return hg.build_table(medium);
    };
    let t = io::read_table(p)?;
    let c_hi = *t.c_values.last().expect("non-empty ladder");
    if t.nt != hg.nt || t.c_values[0] > medium.c_min || c_hi + 0.5 * hg.delta_c < medium.c_max {
        return Err(Error::Config(format!(
            "cached table (nt {}, {}..{} m/s) does not cover this run (nt {}, {}..{} m/s)",
            t.nt, t.c_values[0], c_hi, hg.nt, medium.c_min, medium.c_max
        )));
    }
    Ok(t)
}

fn cmd_adjoint(cfg: &RunConfig, log: &mut dyn Write) -> Result<()> {
    let medium = load_medium(&cfg.medium)?;
    let data = io::read_series(&cfg.data)?;
    let sensors = load_sensors(&cfg.sensors, &medium.grid())?;
    if data.len() != sensors.len() {
        return Err(Error::Config(format!("{} series for {} sensors", data.len(), sensors.len())));
    }
    let nt = data.first().map_or(0, |s| s.values.len());
    if let Some(s) = data.first() {
        if (s.dt - cfg.dt).abs() > 1e-9 * cfg.dt {
            return Err(Error::Config(format!("data dt {} differs from configured dt {}", s.dt, cfg.dt)));
        }
    }
    let img = match cfg.engine {
        Engine::Hg => {
            let mut hg = cfg.hg(&medium.grid());
            hg.nt = nt;
            hg.validate()?;
            let table = hg_table(cfg, &hg, &medium)?;
            adjoint_all(&medium, &data, &sensors, &hg, &table, cfg.nonneg)?
        }
        Engine::Fdtd => {
            let fd = FdtdConfig::for_medium(&medium, cfg.dt, cfg.refine)?;
            let w = TimeWindow::for_samples(nt, cfg.dt, cfg.taper_fraction);
            let v = fdtd_adjoint(&medium, &data, &sensors, &w, cfg.dt, &fd)?;
            if cfg.nonneg {
                v.nonneg()
            } else {
                v
            }
        }
    };
    let out = out_path(cfg, "image.hgf");
    io::write_field(&out, &img)?;
    let _ = writeln!(log, "wrote {}x{} image to {}", img.grid.nx, img.grid.ny, out.display());
    Ok(())
}

fn cmd_table(cfg: &RunConfig, log: &mut dyn Write) -> Result<()> {
    let medium = load_medium(&cfg.medium)?;
    let hg = cfg.hg(&medium.grid());
    hg.validate()?;
    let t = hg.build_table(&medium)?;
    let out = out_path(cfg, "table.hgt");
    io::write_table(&out, &t)?;
    let _ = writeln!(log, "wrote {} rungs x {} samples to {}", t.c_values.len(), t.series_len(), out.display());
    Ok(())
}

/// Metrics between two files of the same kind and shape.
pub fn compare_files(a: &Path, b: &Path) -> Result<(f64, f64, f64)> {
    let flat = |d: io::DataFile| -> (Vec<usize>, Vec<f64>) {
        match d {
            io::DataFile::Field(f) => (vec![f.grid.nx, f.grid.ny], f.values),
            io::DataFile::Series(s) => {
                (s.iter().map(|x| x.values.len()).collect(), s.into_iter().flat_map(|x| x.values).collect())
            }
        }
    };
    let da = io::read_any(a)?;
    let db = io::read_any(b)?;
    if std::mem::discriminant(&da) != std::mem::discriminant(&db) {
        return Err(Error::Argument("cannot compare a field with series".into()));
    }
    let (sa, va) = flat(da);
    let (sb, vb) = flat(db);
    if sa != sb {
        return Err(Error::Argument("files have different shapes".into()));
    }
    Ok((metrics::rel_l2(&va, &vb), metrics::rel_linf(&va, &vb), metrics::ncc(&va, &vb)))
}

fn cmd_dottest(a: &DotArgs, out: &mut dyn Write) -> Result<()> {
    let grid = parse_grid(&a.grid, a.dx)?;
    let (medium, _) = make_phantom(a.kind, grid, 0.2)?;
    let sensors = SensorArray::boundary_subset(&grid, a.sensors);
    let fd = FdtdConfig::for_medium(&medium, a.dt, 1)?;
    let gap = dot_test(&medium, &sensors, a.dt, a.t_end, &fd, a.trials, a.seed)?;
    let _ = writeln!(out, "dot test gap {}", io::fmt_g17(gap));
    if gap > 1e-2 {
        return Err(Error::Singular(format!("dot test gap {gap:.3e} exceeds 1e-2")));
    }
    Ok(())
}

fn dispatch(cli: Cli, out: &mut dyn Write, log: &mut dyn Write) -> Result<()> {
    let file = match &cli.config {
        Some(p) => {
            let bytes = std::fs::read(p).map_err(|e| Error::Io { path: p.clone(), source: e })?;
            parse_config(&String::from_utf8_lossy(&bytes))?
        }
        None => BTreeMap::new(),
    };
    if let Some(src) = &cli.csv {
        let csv = io::to_csv(&io::read_any(src)?);
        match &cli.csv_out {
            Some(p) => std::fs::write(p, csv).map_err(|e| Error::Io { path: p.clone(), source: e })?,
            None => {
                let _ = out.write_all(csv.as_bytes());
            }
        }
        if cli.command.is_none() {
            return Ok(());
        }
    }
    let start = Instant::now();
    match cli.command.expect("checked by caller") {
        Command::Phantom(p) => {
            let grid = parse_grid(&p.grid, p.dx)?;
            let (m, u0) = make_phantom(p.kind, grid, p.contrast)?;
            io::write_field(&p.medium, &m.sound_speed)?;
            io::write_field(&p.u0, &u0)?;
            if let Some(s) = &p.sensors {
                io::write_sensors(s, &SensorArray::boundary(&grid))?;
            }
            let _ = writeln!(log, "wrote {} and {}", p.medium.display(), p.u0.display());
        }
        Command::Forward(a) => cmd_forward(&RunConfig::resolve(&file, &a)?, log)?,
        Command::Adjoint(a) => cmd_adjoint(&RunConfig::resolve(&file, &a)?, log)?,
        Command::Table(a) => cmd_table(&RunConfig::resolve(&file, &a)?, log)?,
        Command::Compare { a, b } => {
            let (l2, linf, ncc) = compare_files(&a, &b)?;
            let _ = writeln!(out, "rel_l2 {}\nrel_linf {}\nncc {}", io::fmt_g17(l2), io::fmt_g17(linf), io::fmt_g17(ncc));
        }
        Command::Dottest(a) => cmd_dottest(&a, out)?,
    }
    let _ = writeln!(log, "done in {:.2} s", start.elapsed().as_secs_f64());
    Ok(())
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    if let Some(n) = flag {
        return Ok(Some(n));
    }
    match std::env::var("HG_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Error::Config(format!("bad HG_THREADS {v:?}"))),
        Err(_) => Ok(None),
    }
}

/// Run with explicit output streams; returns the process exit code.
pub fn run_with<I, S>(argv: I, out: &mut (dyn Write + Send), log: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { log.write_all(text.as_bytes()) };
            return code;
        }
    };
    if cli.command.is_none() && cli.csv.is_none() {
        let _ = writeln!(log, "error: a subcommand or --csv is required (see --help)");
        return 1;
    }
    let threads = match thread_count(cli.threads) {
        Ok(Some(0)) => {
            let _ = writeln!(log, "error: --threads must be at least 1");
            return 1;
        }
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            return e.exit_code();
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = match builder.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(log, "error: thread pool: {e}");
            return 3;
        }
    };
    match pool.install(|| dispatch(cli, out, log)) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(log, "error: {e}");
            e.exit_code()
        }
    }
}

/// Run against stdout/stderr.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut log = Vec::new();
        let code = run_with(std::iter::once("hgsolve").chain(args.iter().copied()), &mut out, &mut log);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(log).unwrap())
    }

    #[test]
    fn usage_codes() {
        assert_eq!(run_capture(&[]).0, 1);
        assert_eq!(run_capture(&["frobnicate"]).0, 1);
        assert_eq!(run_capture(&["--help"]).0, 0);
        assert_eq!(run_capture(&["forward", "--dt", "abc"]).0, 1);
    }

    #[test]
    fn precedence() {
        let file = parse_config("dt = 1e-7\nrays = 100 # comment\nT = 2e-5\n").unwrap();
        let a = RunArgs { rays: Some(50), ..Default::default() };
        let c = RunConfig::resolve(&file, &a).unwrap();
        assert_eq!(c.n_rays, 50);
        assert_eq!(c.dt, 1e-7);
        assert_eq!(c.t_end, 2e-5);
        assert_eq!(c.taper_fraction, 0.1);
        assert_eq!(c.nt(), 200);
        assert!(RunConfig::resolve(&parse_config("bogus = 1").unwrap(), &RunArgs::default()).is_err());
        let e = RunConfig::resolve(&BTreeMap::new(), &RunArgs { dt: Some(-1.0), ..Default::default() }).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn missing_file_is_code_2() {
        let (code, _, log) = run_capture(&["compare", "/nonexistent/a.hgs", "/nonexistent/b.hgs"]);
        assert_eq!(code, 2, "{log}");
    }

    #[test]
    fn grid_parse() {
        let g = parse_grid("128x256", 0.2e-3).unwrap();
        assert_eq!((g.nx, g.ny), (128, 256));
        assert!(parse_grid("128", 0.2e-3).is_err());
    }
}
