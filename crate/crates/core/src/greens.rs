//! Free-space Green's functions, delta representations and the table of
//! time-derivative kernels used by the ray operators.
//!
//! The 2D Green's function `c / (2 pi sqrt(c^2 t^2 - r^2))` is mollified in
//! time by convolution with a delta representation. With the substitution
//! `t' = (r/c) cosh(beta)` the convolution becomes
//! `(1/2pi) * integral of delta_eps(t - (r/c) cosh(beta)) d(beta)`, which has a
//! smooth integrand and is evaluated by composite Gauss-Legendre quadrature.
//!
//! The table kernels use the wavefront form of the same function at the ray
//! start distance `delta_x`, `(1/2pi) sqrt(c / (2 delta_x s))` for `s > 0`
//! (`s` = time after the front), mollified and differentiated analytically.
//! Its Hilbert transform is the time-reflected kernel, which is what a
//! quarter-period Maslov shift needs.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::OnceLock;

use gauss_quad::legendre::GaussLegendre;
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeltaKind {
    Dirichlet,
    Gaussian,
}

impl DeltaKind {
    pub fn name(self) -> &'static str {
        match self {
            DeltaKind::Dirichlet => "dirichlet",
            DeltaKind::Gaussian => "gaussian",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "sinc" => Some(DeltaKind::Dirichlet),
            "gaussian" | "gauss" => Some(DeltaKind::Gaussian),
            _ => None,
        }
    }
}

/// Regularized Dirac delta in time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaRep {
    pub kind: DeltaKind,
    /// Width, s.
    pub eps: f64,
}

impl DeltaRep {
    pub fn gaussian(eps: f64) -> Self {
        Self { kind: DeltaKind::Gaussian, eps }
    }

    pub fn dirichlet(eps: f64) -> Self {
        Self { kind: DeltaKind::Dirichlet, eps }
    }

    /// Half-width of the truncation window used in convolutions, s.
    pub fn half_width(&self) -> f64 {
        match self.kind {
            DeltaKind::Gaussian => 8.0 * self.eps,
            DeltaKind::Dirichlet => 200.0 * self.eps,
        }
    }

    /// Quadrature panels covering one truncation window.
    fn panels(&self) -> usize {
        match self.kind {
            DeltaKind::Gaussian => 48,
            DeltaKind::Dirichlet => 640,
        }
    }
}

/// Value and time derivative of the delta representation at `t`.
#[inline]
pub fn delta_rep(rep: DeltaRep, t: f64) -> (f64, f64) {
    let e = rep.eps;
    match rep.kind {
        DeltaKind::Gaussian => {
            let g = (-(t * t) / (e * e)).exp() / (e * PI.sqrt());
            (g, -2.0 * t / (e * e) * g)
        }
        DeltaKind::Dirichlet => {
            let u = t / e;
            if u.abs() < 1e-4 {
                // sin(u)/u and its derivative by series
                let u2 = u * u;
                let v = (1.0 - u2 / 6.0 + u2 * u2 / 120.0) / (PI * e);
                let d = (-u / 3.0 + u * u2 / 30.0) / (PI * e * e);
                (v, d)
            } else {
                let (s, c) = u.sin_cos();
                (s / (PI * t), (t * c - e * s) / (e * PI * t * t))
            }
        }
    }
}

fn gl16() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(NonZeroUsize::new(16).unwrap()))
}

/// Composite 16-point Gauss-Legendre over `panels` equal sub-intervals.
pub fn integrate(a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let h = (b - a) / panels as f64;
    let rule = gl16();
    (0..panels).map(|k| rule.integrate(a + k as f64 * h, a + (k + 1) as f64 * h, &mut f)).sum()
}

/// `beta` interval where `(r/c) cosh(beta)` lies within `[t - w, t + w]`.
fn beta_window(c: f64, t: f64, r: f64, w: f64) -> Option<(f64, f64)> {
    let a = r / c;
    let hi = (t + w) / a;
    if hi <= 1.0 {
        return None;
    }
    let lo = ((t - w) / a).max(1.0);
    Some((lo.acosh(), hi.acosh()))
}

fn g0_2d_generic(c: f64, t: f64, r: f64, rep: DeltaRep, deriv: bool) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Singular(format!("2D Green's function at r = {r}")));
    }
    let Some((lo, hi)) = beta_window(c, t, r, rep.half_width()) else {
        return Ok(0.0);
    };
    let a = r / c;
    let v = integrate(lo, hi, rep.panels(), |b| {
        let (v, d) = delta_rep(rep, t - a * b.cosh());
        if deriv {
            d
        } else {
            v
        }
    });
    Ok(v / (2.0 * PI))
}

/// Mollified 2D Green's function `G0(t, r)` for a source at `t = 0`.
///
/// Exactly zero for `t < r/c - half_width`.
pub fn g0_2d(c: f64, t: f64, r: f64, rep: DeltaRep) -> Result<f64> {
    g0_2d_generic(c, t, r, rep, false)
}

/// Time derivative of [`g0_2d`].
pub fn g0_2d_dt(c: f64, t: f64, r: f64, rep: DeltaRep) -> Result<f64> {
    g0_2d_generic(c, t, r, rep, true)
}

/// Mollified 3D Green's function `delta_eps(t - r/c) / (4 pi r c)`.
pub fn g0_3d(c: f64, t: f64, r: f64, rep: DeltaRep) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Singular(format!("3D Green's function at r = {r}")));
    }
    Ok(delta_rep(rep, t - r / c).0 / (4.0 * PI * r * c))
}

/// Mollified wavefront profile `2 * integral_0^inf delta_eps(s - w^2) dw`
/// (the mollification of `s_+^(-1/2)`), or its derivative in `s`.
pub fn front_profile(s: f64, rep: DeltaRep, deriv: bool) -> f64 {
    let w = rep.half_width();
    if s + w <= 0.0 {
        return 0.0;
    }
    let lo = (s - w).max(0.0).sqrt();
    let hi = (s + w).sqrt();
    2.0 * integrate(lo, hi, rep.panels(), |x| {
        let (v, d) = delta_rep(rep, s - x * x);
        if deriv {
            d
        } else {
            v
        }
    })
}

/// Time-derivative kernel of speed `c` at ray lag `s` (s after the ray's
/// initial point was passed): wavefront at `s = delta_x / c`.
pub fn front_kernel(c: f64, delta_x: f64, s: f64, rep: DeltaRep) -> f64 {
    let amp = (c / (2.0 * delta_x)).sqrt() / (2.0 * PI);
    amp * front_profile(s - delta_x / c, rep, true)
}

/// Quarter-period shifted [`front_kernel`]: the kernel reflected about its
/// wavefront, with the sign that one caustic crossing imposes
/// (`Re[exp(-i pi/2) (K + i H K)]` for the wave equation's time convention).
pub fn front_kernel_quadrature(c: f64, delta_x: f64, s: f64, rep: DeltaRep) -> f64 {
    let front = delta_x / c;
    -front_kernel(c, delta_x, 2.0 * front - s, rep)
}

/// Kernels of one speed rung on the lag grid.
#[derive(Debug, Clone, Copy)]
pub struct KernelPair<'a> {
    /// `inphase[k]` is the kernel at lag `(k - lead) dt`.
    pub inphase: &'a [f64],
    /// `quadrature[k]` is the Hilbert-transformed kernel at lag `(lead - k) dt`.
    pub quadrature: &'a [f64],
    pub lead: usize,
}

impl KernelPair<'_> {
    /// In-phase kernel at integer lag `m` (samples), zero off the table.
    #[inline]
    pub fn k(&self, m: isize) -> f64 {
        let idx = m + self.lead as isize;
        if idx < 0 {
            0.0
        } else {
            self.inphase.get(idx as usize).copied().unwrap_or(0.0)
        }
    }

    /// Quadrature kernel at integer lag `m`.
    #[inline]
    pub fn h(&self, m: isize) -> f64 {
        let idx = self.lead as isize - m;
        if idx < 0 {
            0.0
        } else {
            self.quadrature.get(idx as usize).copied().unwrap_or(0.0)
        }
    }
}

/// Kernel series for a ladder of sound speeds.
#[derive(Debug)]
pub struct GreensTable {
    pub c_values: Vec<f64>,
    pub dt: f64,
    pub nt: usize,
    /// Samples stored before lag zero (in-phase) / after it (quadrature).
    pub lead: usize,
    /// Ray start offset the kernels are built for, m.
    pub delta_x: f64,
    pub rep: DeltaRep,
    pub series: Vec<Vec<f64>>,
    pub quadrature: Vec<Vec<f64>>,
    clamped: AtomicUsize,
}

impl Clone for GreensTable {
    fn clone(&self) -> Self {
        Self {
            c_values: self.c_values.clone(),
            dt: self.dt,
            nt: self.nt,
            lead: self.lead,
            delta_x: self.delta_x,
            rep: self.rep,
            series: self.series.clone(),
            quadrature: self.quadrature.clone(),
            clamped: AtomicUsize::new(self.clamped.load(Ordering::Relaxed)),
        }
    }
}

impl PartialEq for GreensTable {
    fn eq(&self, o: &Self) -> bool {
        self.c_values == o.c_values
            && self.dt == o.dt
            && self.nt == o.nt
            && self.lead == o.lead
            && self.delta_x == o.delta_x
            && self.rep == o.rep
            && self.series == o.series
            && self.quadrature == o.quadrature
    }
}

impl GreensTable {
    /// Assemble from parts (used by the file reader).
    #[allow(clippy::too_many_arguments)]
    pub fn from_parts(
        c_values: Vec<f64>,
        dt: f64,
        nt: usize,
        lead: usize,
        delta_x: f64,
        rep: DeltaRep,
        series: Vec<Vec<f64>>,
        quadrature: Vec<Vec<f64>>,
    ) -> Self {
        Self { c_values, dt, nt, lead, delta_x, rep, series, quadrature, clamped: AtomicUsize::new(0) }
    }

    /// Values per stored series.
    pub fn series_len(&self) -> usize {
        self.nt + self.lead + 1
    }

    /// Index of the rung nearest to `c` (ties to the lower rung). Speeds
    /// outside the ladder are clamped and counted.
    pub fn rung(&self, c: f64) -> usize {
        let (c0, cn) = (self.c_values[0], *self.c_values.last().unwrap());
        if c < c0 || c > cn {
            self.clamped.fetch_add(1, Ordering::Relaxed);
        }
        let mut best = 0;
        let mut bd = f64::INFINITY;
        for (i, ci) in self.c_values.iter().enumerate() {
            let d = (c - ci).abs();
            if d < bd {
                bd = d;
                best = i;
            }
        }
        best
    }

    pub fn kernel(&self, rung: usize) -> KernelPair<'_> {
        KernelPair { inphase: &self.series[rung], quadrature: &self.quadrature[rung], lead: self.lead }
    }

    /// Number of lookups that fell outside the ladder.
    pub fn clamp_count(&self) -> usize {
        self.clamped.load(Ordering::Relaxed)
    }

    /// Index (into `series[rung]`) of the largest in-phase magnitude.
    pub fn peak_index(&self, rung: usize) -> usize {
        let s = &self.series[rung];
        (0..s.len()).fold(0, |b, k| if s[k].abs() > s[b].abs() { k } else { b })
    }
}

/// Build the kernel table for speeds `c_min + i * delta_c` covering `c_max`.
pub fn build_g0_table(
    c_min: f64,
    c_max: f64,
    delta_c: f64,
    dt: f64,
    nt: usize,
    rep: DeltaRep,
    delta_x: f64,
) -> Result<GreensTable> {
    if !(c_max >= c_min && c_min > 0.0) {
        return Err(Error::Argument(format!("need 0 < cMin <= cMax, got {c_min}, {c_max}")));
    }
    if !(delta_c > 0.0 && dt > 0.0 && delta_x > 0.0 && rep.eps > 0.0) || nt == 0 {
        return Err(Error::Argument("deltaC, dt, nt, deltaX and eps must be positive".into()));
    }
    let rungs = ((c_max - c_min) / delta_c - 1e-9).ceil().max(0.0) as usize + 1;
    let c_values: Vec<f64> = (0..rungs).map(|i| c_min + i as f64 * delta_c).collect();
    let lead = ((delta_x / c_min + rep.half_width()) / dt).ceil() as usize + 1;
    let len = nt + lead + 1;
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = c_values
        .par_iter()
        .map(|&c| {
            let k: Vec<f64> =
                (0..len).map(|i| front_kernel(c, delta_x, (i as f64 - lead as f64) * dt, rep)).collect();
            let h: Vec<f64> = (0..len)
                .map(|i| front_kernel_quadrature(c, delta_x, (lead as f64 - i as f64) * dt, rep))
                .collect();
            (k, h)
        })
        .collect();
    let (series, quadrature) = pairs.into_iter().unzip();
    Ok(GreensTable::from_parts(c_values, dt, nt, lead, delta_x, rep, series, quadrature))
}

/// Kernel pair of the rung nearest to `c`.
pub fn lookup_g0(table: &GreensTable, c: f64) -> KernelPair<'_> {
    table.kernel(table.rung(c))
}

/// Convolve a uniformly sampled series with the delta representation
/// (same-length output, zero padding).
pub fn mollify_series(values: &[f64], dt: f64, rep: DeltaRep) -> Vec<f64> {
    let half = (rep.half_width() / dt).ceil() as isize;
    let taps: Vec<f64> = (-half..=half).map(|m| delta_rep(rep, m as f64 * dt).0 * dt).collect();
    let n = values.len() as isize;
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for (t, m) in taps.iter().zip(-half..=half) {
                let k = i - m;
                if (0..n).contains(&k) {
                    acc += t * values[k as usize];
                }
            }
            acc
        })
        .collect()
}
