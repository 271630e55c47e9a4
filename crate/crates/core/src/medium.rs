//! Cartesian grids, sampled fields and sound-speed media.
//!
//! Everything a ray needs from the medium goes through [`Medium`]. The
//! production model is [`MediumModel`], which answers every query from the
//! grid node nearest to the query point; [`AnalyticLens`] gives the same
//! answers from closed-form expressions and is used where smooth
//! coefficients matter (integrator order checks).

use nalgebra::{Matrix2, Vector2};

use crate::error::{DomainExit, Error, Result};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

/// Uniform 2D grid. Node `(i, j)` sits at `origin + (i*dx, j*dy)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianGrid2D {
    pub nx: usize,
    pub ny: usize,
    /// Spacing in x, meters.
    pub dx: f64,
    /// Spacing in y, meters.
    pub dy: f64,
    pub origin: Vec2,
}

impl CartesianGrid2D {
    pub fn new(nx: usize, ny: usize, dx: f64, dy: f64, origin: Vec2) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Argument(format!("grid must be at least 2x2, got {nx}x{ny}")));
        }
        if !(dx > 0.0 && dy > 0.0 && dx.is_finite() && dy.is_finite()) {
            return Err(Error::Argument(format!("grid spacing must be positive, got {dx}, {dy}")));
        }
        if !(origin.x.is_finite() && origin.y.is_finite()) {
            return Err(Error::Argument("grid origin must be finite".into()));
        }
        Ok(Self { nx, ny, dx, dy, origin })
    }

    /// Square-cell grid anchored at the origin.
    pub fn square(nx: usize, ny: usize, h: f64) -> Result<Self> {
        Self::new(nx, ny, h, h, Vec2::zeros())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> Vec2 {
        Vec2::new(self.origin.x + i as f64 * self.dx, self.origin.y + j as f64 * self.dy)
    }

    /// Physical size of the node lattice, `((nx-1)dx, (ny-1)dy)`.
    pub fn extent(&self) -> Vec2 {
        Vec2::new((self.nx - 1) as f64 * self.dx, (self.ny - 1) as f64 * self.dy)
    }

    pub fn diagonal(&self) -> f64 {
        self.dx.hypot(self.dy)
    }

    /// Node nearest to `x`, or `None` outside the node box grown by half a cell.
    ///
    /// The grid is separable, so the Euclidean minimizer is the per-axis
    /// minimizer. Halfway ties round down on each axis, which is the smallest
    /// linear index among the tied nodes.
    #[inline]
    pub fn nearest_node(&self, x: Vec2) -> Option<(usize, usize)> {
        let fx = (x.x - self.origin.x) / self.dx;
        let fy = (x.y - self.origin.y) / self.dy;
        // NaN fails both comparisons and is rejected here too.
        if !(fx >= -0.5 && fx <= self.nx as f64 - 0.5 && fy >= -0.5 && fy <= self.ny as f64 - 0.5) {
            return None;
        }
        let i = ((fx - 0.5).ceil().max(0.0) as usize).min(self.nx - 1);
        let j = ((fy - 0.5).ceil().max(0.0) as usize).min(self.ny - 1);
        Some((i, j))
    }

    pub fn contains(&self, x: Vec2) -> bool {
        self.nearest_node(x).is_some()
    }
}

/// Samples of a scalar function on a grid, row-major with x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField2D {
    pub grid: CartesianGrid2D,
    pub values: Vec<f64>,
}

impl ScalarField2D {
    pub fn new(grid: CartesianGrid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Argument(format!(
                "field has {} values, grid needs {}",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Argument(format!("field value {k} is not finite")));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: CartesianGrid2D) -> Self {
        Self { grid, values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: CartesianGrid2D, v: f64) -> Self {
        Self { grid, values: vec![v; grid.len()] }
    }

    /// Evaluate `f` at every node position.
    pub fn from_fn(grid: CartesianGrid2D, mut f: impl FnMut(Vec2) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny {
            for i in 0..grid.nx {
                values.push(f(grid.node(i, j)));
            }
        }
        Self { grid, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    #[inline]
    pub fn sample_nearest(&self, x: Vec2) -> std::result::Result<f64, DomainExit> {
        match self.grid.nearest_node(x) {
            Some((i, j)) => Ok(self.at(i, j)),
            None => Err(DomainExit(x)),
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pointwise `max(v, 0)`.
    pub fn nonneg(mut self) -> Self {
        for v in &mut self.values {
            *v = v.max(0.0);
        }
        self
    }

    /// Central differences in the interior, one-sided at the edges.
    pub fn gradient(&self) -> (ScalarField2D, ScalarField2D) {
        let g = self.grid;
        let mut gx = vec![0.0; g.len()];
        let mut gy = vec![0.0; g.len()];
        for j in 0..g.ny {
            for i in 0..g.nx {
                let k = g.index(i, j);
                gx[k] = if i == 0 {
                    (self.at(1, j) - self.at(0, j)) / g.dx
                } else if i == g.nx - 1 {
                    (self.at(i, j) - self.at(i - 1, j)) / g.dx
                } else {
                    (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * g.dx)
                };
                gy[k] = if j == 0 {
                    (self.at(i, 1) - self.at(i, 0)) / g.dy
                } else if j == g.ny - 1 {
                    (self.at(i, j) - self.at(i, j - 1)) / g.dy
                } else {
                    (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * g.dy)
                };
            }
        }
        (ScalarField2D { grid: g, values: gx }, ScalarField2D { grid: g, values: gy })
    }
}

/// Field value at the node nearest to `x`.
pub fn sample_nearest(field: &ScalarField2D, x: Vec2) -> std::result::Result<f64, DomainExit> {
    field.sample_nearest(x)
}

/// Medium coefficients at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalMedium {
    pub eta: f64,
    pub grad_eta: Vec2,
    pub c: f64,
    pub grad_c: Vec2,
    pub hess_c: Mat2,
}

/// Pointwise access to slowness, speed and their derivatives.
///
/// `None` means the point is outside the domain.
pub trait Medium: Sync {
    /// Slowness and its gradient.
    fn slowness(&self, x: Vec2) -> Option<(f64, Vec2)>;
    /// Everything the variational (Jacobian) equations need.
    fn local(&self, x: Vec2) -> Option<LocalMedium>;
    /// Upper bound on the sound speed.
    fn c_max(&self) -> f64;

    fn eta(&self, x: Vec2) -> Option<f64> {
        self.slowness(x).map(|(e, _)| e)
    }
}

/// Gridded medium: sound speed, slowness and node-centred derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct MediumModel {
    pub sound_speed: ScalarField2D,
    pub slowness: ScalarField2D,
    pub c_min: f64,
    pub c_max: f64,
    // node-centred derivative caches, same stencils as `slowness_and_gradient`
    grad_eta: Vec<[f64; 2]>,
    grad_c: Vec<[f64; 2]>,
    hess_c: Vec<[f64; 3]>,
}

impl MediumModel {
    /// Build from a sound-speed field; `c_min`/`c_max` are the field extremes.
    pub fn new(sound_speed: ScalarField2D) -> Result<Self> {
        let (lo, hi) = (sound_speed.min(), sound_speed.max());
        Self::with_bounds(sound_speed, lo, hi)
    }

    pub fn with_bounds(sound_speed: ScalarField2D, c_min: f64, c_max: f64) -> Result<Self> {
        let (lo, hi) = (sound_speed.min(), sound_speed.max());
        if !(lo > 0.0) {
            return Err(Error::Argument(format!("sound speed must be positive, min is {lo}")));
        }
        if !(c_min > 0.0 && c_min <= lo && hi <= c_max) {
            return Err(Error::Argument(format!(
                "speed bounds [{c_min}, {c_max}] do not enclose field range [{lo}, {hi}]"
            )));
        }
        let grid = sound_speed.grid;
        let slowness = ScalarField2D {
            grid,
            values: sound_speed.values.iter().map(|c| 1.0 / c).collect(),
        };
        let (ex, ey) = slowness.gradient();
        let (cx, cy) = sound_speed.gradient();
        let (cxx, cxy) = cx.gradient();
        let (cyx, cyy) = cy.gradient();
        let n = grid.len();
        let grad_eta = (0..n).map(|k| [ex.values[k], ey.values[k]]).collect();
        let grad_c = (0..n).map(|k| [cx.values[k], cy.values[k]]).collect();
        let hess_c = (0..n)
            .map(|k| [cxx.values[k], 0.5 * (cxy.values[k] + cyx.values[k]), cyy.values[k]])
            .collect();
        Ok(Self { sound_speed, slowness, c_min, c_max, grad_eta, grad_c, hess_c })
    }

    pub fn homogeneous(grid: CartesianGrid2D, c: f64) -> Result<Self> {
        Self::new(ScalarField2D::constant(grid, c))
    }

    pub fn grid(&self) -> CartesianGrid2D {
        self.sound_speed.grid
    }

    /// Speed at the node nearest to `x`.
    pub fn c_at(&self, x: Vec2) -> Option<f64> {
        self.sound_speed.sample_nearest(x).ok()
    }

    /// Resample onto another grid by nearest-node lookup (clamped to the
    /// nearest edge node outside this grid).
    pub fn resample(&self, grid: CartesianGrid2D) -> Result<Self> {
        let src = self.grid();
        let field = ScalarField2D::from_fn(grid, |x| {
            let fx = ((x.x - src.origin.x) / src.dx).clamp(0.0, (src.nx - 1) as f64);
            let fy = ((x.y - src.origin.y) / src.dy).clamp(0.0, (src.ny - 1) as f64);
            let p = src.node(0, 0) + Vec2::new(fx * src.dx, fy * src.dy);
            self.sound_speed.sample_nearest(p).unwrap_or(self.sound_speed.values[0])
        });
        Self::with_bounds(field, self.c_min, self.c_max)
    }
}

/// Slowness and its node-centred gradient at the node nearest to `x`.
pub fn slowness_and_gradient(
    medium: &MediumModel,
    x: Vec2,
) -> std::result::Result<(f64, Vec2), DomainExit> {
    medium.slowness(x).ok_or(DomainExit(x))
}

impl Medium for MediumModel {
    #[inline]
    fn slowness(&self, x: Vec2) -> Option<(f64, Vec2)> {
        let (i, j) = self.grid().nearest_node(x)?;
        let k = self.grid().index(i, j);
        let g = self.grad_eta[k];
        Some((self.slowness.values[k], Vec2::new(g[0], g[1])))
    }

    #[inline]
    fn local(&self, x: Vec2) -> Option<LocalMedium> {
        let (i, j) = self.grid().nearest_node(x)?;
        let k = self.grid().index(i, j);
        let (ge, gc, h) = (self.grad_eta[k], self.grad_c[k], self.hess_c[k]);
        Some(LocalMedium {
            eta: self.slowness.values[k],
            grad_eta: Vec2::new(ge[0], ge[1]),
            c: self.sound_speed.values[k],
            grad_c: Vec2::new(gc[0], gc[1]),
            hess_c: Mat2::new(h[0], h[1], h[1], h[2]),
        })
    }

    fn c_max(&self) -> f64 {
        self.c_max
    }
}

/// Gaussian low-speed inclusion `c0 (1 - contrast exp(-|x - center|^2 / sigma^2))`
/// with exact derivatives, bounded to a grid's node box (plus half a cell).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticLens {
    pub c0: f64,
    pub contrast: f64,
    pub center: Vec2,
    pub sigma: f64,
    pub bounds: CartesianGrid2D,
}

impl AnalyticLens {
    /// Lens centred in the grid, width one sixth of the shorter side, c0 = 1500 m/s.
    pub fn centered(grid: CartesianGrid2D, contrast: f64) -> Self {
        let e = grid.extent();
        Self {
            c0: 1500.0,
            contrast,
            center: grid.origin + 0.5 * e,
            sigma: e.x.min(e.y) / 6.0,
            bounds: grid,
        }
    }

    pub fn speed(&self, x: Vec2) -> f64 {
        let d = x - self.center;
        self.c0 * (1.0 - self.contrast * (-d.norm_squared() / (self.sigma * self.sigma)).exp())
    }

    /// Sample onto the bounding grid.
    pub fn to_model(&self) -> Result<MediumModel> {
        MediumModel::new(ScalarField2D::from_fn(self.bounds, |x| self.speed(x)))
    }
}

impl Medium for AnalyticLens {
    fn slowness(&self, x: Vec2) -> Option<(f64, Vec2)> {
        let l = self.local(x)?;
        Some((l.eta, l.grad_eta))
    }

    fn local(&self, x: Vec2) -> Option<LocalMedium> {
        if !self.bounds.contains(x) {
            return None;
        }
        let s2 = self.sigma * self.sigma;
        let d = x - self.center;
        let g = (-d.norm_squared() / s2).exp();
        let a = self.c0 * self.contrast;
        let c = self.c0 - a * g;
        // grad g = -2 g d / s2 ; hess g = g (4 d d^T / s2^2 - 2 I / s2)
        let grad_c = 2.0 * a * g / s2 * d;
        let hess_c = -a * g * (4.0 / (s2 * s2) * d * d.transpose() - 2.0 / s2 * Mat2::identity());
        Some(LocalMedium {
            eta: 1.0 / c,
            grad_eta: -grad_c / (c * c),
            c,
            grad_c,
            hess_c,
        })
    }

    fn c_max(&self) -> f64 {
        self.c0
    }
}

/// Gridded lens medium: c0 = 1500 m/s inclusion centred in the grid.
pub fn make_lens_medium(grid: CartesianGrid2D, contrast: f64) -> Result<MediumModel> {
    if !(0.0..0.5).contains(&contrast) {
        return Err(Error::Argument(format!("lens contrast must lie in [0, 0.5), got {contrast}")));
    }
    AnalyticLens::centered(grid, contrast).to_model()
}

// ------------------------------------------------------------------------
// Procedural vessel phantom
// ------------------------------------------------------------------------

/// Reference extent (mm) the phantom geometry is authored in.
const REF_EXTENT_MM: [f64; 2] = [25.4, 51.0];
const PHANTOM_C_MIN: f64 = 1350.0;
const PHANTOM_C_MAX: f64 = 1650.0;
/// Vessel half-width, mm (reference frame).
const VESSEL_HALF_WIDTH: f64 = 0.7;

/// Raw speed profile in the reference frame (mm), before range normalisation.
fn phantom_raw_speed(x: f64, y: f64) -> f64 {
    let bump = |cx: f64, cy: f64, s: f64| (-((x - cx).powi(2) + (y - cy).powi(2)) / (s * s)).exp();
    1500.0
        // fast band along the left edge: bends S2's rays away from the corners
        + 160.0 * (-x / 2.5).exp()
        // slow inclusion between S3 and the bottom centre: focuses S3's rays
        - 260.0 * bump(12.7, 31.0, 5.0)
        + 70.0 * bump(21.0, 10.0, 6.0)
        - 40.0 * bump(6.0, 14.0, 5.0)
        + 25.0 * (y / REF_EXTENT_MM[1] - 0.5)
}

fn quad_bezier(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> impl Fn(f64) -> [f64; 2] {
    move |s| {
        let (u, v, w) = ((1.0 - s) * (1.0 - s), 2.0 * s * (1.0 - s), s * s);
        [u * a[0] + v * b[0] + w * c[0], u * a[1] + v * b[1] + w * c[1]]
    }
}

/// Vessel centre lines as polylines in the reference frame (mm).
fn vessel_polylines() -> Vec<Vec<[f64; 2]>> {
    let n = 600;
    let sample = |f: &dyn Fn(f64) -> [f64; 2]| -> Vec<[f64; 2]> {
        (0..=n).map(|k| f(k as f64 / n as f64)).collect()
    };
    let tau = std::f64::consts::TAU;
    vec![
        sample(&|s| [12.7 + 6.0 * (tau * 1.25 * s).sin(), 5.0 + 41.0 * s]),
        sample(&quad_bezier([4.0, 40.0], [10.0, 48.0], [21.0, 42.0])),
        sample(&|s| [8.0 + 3.0 * (tau * s).cos(), 17.0 + 3.0 * (tau * s).sin()]),
        sample(&quad_bezier([3.0, 28.0], [13.0, 22.0], [22.0, 26.0])),
        sample(&quad_bezier([16.0, 10.0], [19.0, 6.0], [22.0, 8.0])),
    ]
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (abx, aby) = (b[0] - a[0], b[1] - a[1]);
    let (apx, apy) = (p[0] - a[0], p[1] - a[1]);
    let l2 = abx * abx + aby * aby;
    let s = if l2 > 0.0 { ((apx * abx + apy * aby) / l2).clamp(0.0, 1.0) } else { 0.0 };
    (apx - s * abx).hypot(apy - s * aby)
}

/// Deterministic vessel phantom: smooth speed map spanning exactly
/// [1350, 1650] m/s and vessel strokes with a smooth cross-section in (0, 1].
///
/// Geometry is authored for a 25.4 x 51.0 mm box and stretched to the grid's
/// extent, so any grid size gives the same picture.
pub fn make_vessel_phantom(grid: CartesianGrid2D) -> Result<(MediumModel, ScalarField2D)> {
    let e = grid.extent();
    let to_ref = |x: Vec2| -> [f64; 2] {
        [
            (x.x - grid.origin.x) / e.x * REF_EXTENT_MM[0],
            (x.y - grid.origin.y) / e.y * REF_EXTENT_MM[1],
        ]
    };

    let raw = ScalarField2D::from_fn(grid, |x| {
        let r = to_ref(x);
        phantom_raw_speed(r[0], r[1])
    });
    let (lo, hi) = (raw.min(), raw.max());
    let span = PHANTOM_C_MAX - PHANTOM_C_MIN;
    let c = ScalarField2D {
        grid,
        values: raw.values.iter().map(|v| PHANTOM_C_MIN + span * ((v - lo) / (hi - lo))).collect(),
    };
    let medium = MediumModel::with_bounds(c, PHANTOM_C_MIN, PHANTOM_C_MAX)?;

    let lines = vessel_polylines();
    let w = VESSEL_HALF_WIDTH;
    let boxes: Vec<[f64; 4]> = lines
        .iter()
        .map(|l| {
            let mut b = [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY];
            for p in l {
                b = [b[0].min(p[0]), b[1].max(p[0]), b[2].min(p[1]), b[3].max(p[1])];
            }
            [b[0] - w, b[1] + w, b[2] - w, b[3] + w]
        })
        .collect();
    let u0 = ScalarField2D::from_fn(grid, |x| {
        let p = to_ref(x);
        let mut best = 0.0f64;
        for (line, b) in lines.iter().zip(&boxes) {
            if p[0] < b[0] || p[0] > b[1] || p[1] < b[2] || p[1] > b[3] {
                continue;
            }
            let d = line.windows(2).map(|s| segment_distance(p, s[0], s[1])).fold(f64::INFINITY, f64::min);
            if d < w {
                let v = (0.5 * std::f64::consts::PI * d / w).cos();
                best = best.max(v * v);
            }
        }
        best
    });
    Ok((medium, u0))
}

/// Reference phantom grid: 128 x 256 nodes, 0.2 mm spacing.
pub fn reference_grid() -> CartesianGrid2D {
    CartesianGrid2D::square(128, 256, 0.2e-3).expect("valid constant grid")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g44() -> CartesianGrid2D {
        CartesianGrid2D::square(4, 4, 1.0).unwrap()
    }

    #[test]
    fn nearest_on_constant_field() {
        let f = ScalarField2D::constant(g44(), 3.7);
        assert_eq!(f.sample_nearest(Vec2::new(2.2, 0.9)).unwrap(), 3.7);
    }

    #[test]
    fn nearest_on_node_is_identity() {
        let f = ScalarField2D::from_fn(g44(), |x| x.x * 10.0 + x.y);
        assert_eq!(f.sample_nearest(Vec2::new(2.0, 3.0)).unwrap(), f.values[3 * 4 + 2]);
    }

    #[test]
    fn nearest_column_matches_enumeration() {
        let g = g44();
        let f = ScalarField2D::from_fn(g, |x| x.x);
        let q = Vec2::new(1.4, 0.2);
        // brute force over all 16 nodes, first minimum wins
        let mut best = (f64::INFINITY, 0);
        for k in 0..16 {
            let d = (g.node(k % 4, k / 4) - q).norm();
            if d < best.0 {
                best = (d, k);
            }
        }
        assert_eq!(f.sample_nearest(q).unwrap(), f.values[best.1]);
        assert_eq!(f.sample_nearest(q).unwrap(), 1.0);
    }

    #[test]
    fn tie_goes_to_smallest_index() {
        let g = g44();
        assert_eq!(g.nearest_node(Vec2::new(1.5, 2.5)), Some((1, 2)));
        assert_eq!(g.nearest_node(Vec2::new(-0.5, -0.5)), Some((0, 0)));
        assert_eq!(g.nearest_node(Vec2::new(3.5, 3.5)), Some((3, 3)));
    }

    #[test]
    fn out_of_bounds_is_domain_exit() {
        let f = ScalarField2D::zeros(g44());
        assert!(f.sample_nearest(Vec2::new(-0.51, 1.0)).is_err());
        assert!(f.sample_nearest(Vec2::new(1.0, 3.5001)).is_err());
        assert!(f.sample_nearest(Vec2::new(f64::NAN, 1.0)).is_err());
    }

    #[test]
    fn homogeneous_slowness_and_gradient() {
        let m = MediumModel::homogeneous(g44(), 1500.0).unwrap();
        let (e, g) = slowness_and_gradient(&m, Vec2::new(1.2, 2.1)).unwrap();
        assert_eq!(e, 1.0 / 1500.0);
        assert_eq!(g, Vec2::zeros());
    }

    #[test]
    fn linear_slowness_gradient() {
        let g = CartesianGrid2D::square(50, 40, 1e-4).unwrap();
        let (a, b) = (1.0 / 1500.0, 0.05);
        let c = ScalarField2D::from_fn(g, |x| 1.0 / (a + b * x.x));
        let m = MediumModel::new(c).unwrap();
        for (i, j) in [(1, 1), (20, 17), (48, 38)] {
            let (_, grad) = slowness_and_gradient(&m, g.node(i, j)).unwrap();
            let cd = (m.slowness.at(i + 1, j) - m.slowness.at(i - 1, j)) / (2.0 * g.dx);
            assert_eq!(grad.x, cd);
            assert!((grad.x - b).abs() < 1e-6 * b);
            assert_eq!(grad.y, 0.0);
        }
        let (_, edge) = slowness_and_gradient(&m, g.node(0, 5)).unwrap();
        assert_eq!(edge.x, (m.slowness.at(1, 5) - m.slowness.at(0, 5)) / g.dx);
    }

    #[test]
    fn phantom_speed_range_and_values() {
        let (m, u0) = make_vessel_phantom(reference_grid()).unwrap();
        assert_eq!(m.sound_speed.min(), 1350.0);
        assert_eq!(m.sound_speed.max(), 1650.0);
        assert!(u0.values.iter().all(|&v| v == 0.0 || (v > 0.0 && v <= 1.0)));
        assert!(u0.values.iter().any(|&v| v > 0.99));
        let (m2, u2) = make_vessel_phantom(reference_grid()).unwrap();
        assert_eq!(m, m2);
        assert_eq!(u0, u2);
    }

    #[test]
    fn phantom_on_other_grid() {
        let g = CartesianGrid2D::square(64, 128, 0.4e-3).unwrap();
        let (m, u0) = make_vessel_phantom(g).unwrap();
        assert!(m.sound_speed.min() >= 1350.0 && m.sound_speed.max() <= 1650.0);
        assert!(u0.max() > 0.5);
    }

    #[test]
    fn lens_medium_basics() {
        let g = CartesianGrid2D::square(65, 65, 1e-4).unwrap();
        let flat = make_lens_medium(g, 0.0).unwrap();
        assert!(flat.sound_speed.values.iter().all(|&c| c == 1500.0));
        let lens = make_lens_medium(g, 0.1).unwrap();
        assert!((lens.sound_speed.min() - 1350.0).abs() < 1e-9);
        assert_eq!(lens.sound_speed.at(32, 32), lens.sound_speed.min());
        assert!(make_lens_medium(g, 0.5).is_err());
    }

    #[test]
    fn analytic_lens_derivatives_match_differences() {
        let g = CartesianGrid2D::square(101, 101, 1e-4).unwrap();
        let lens = AnalyticLens::centered(g, 0.2);
        let x = Vec2::new(4.1e-3, 6.3e-3);
        let h = 1e-7;
        let l = lens.local(x).unwrap();
        let fd = |dx: Vec2| (lens.speed(x + dx) - lens.speed(x - dx)) / (2.0 * h);
        let gx = fd(Vec2::new(h, 0.0));
        let gy = fd(Vec2::new(0.0, h));
        assert!((l.grad_c.x - gx).abs() < 1e-6 * l.grad_c.norm());
        assert!((l.grad_c.y - gy).abs() < 1e-6 * l.grad_c.norm());
        let gxp = lens.local(x + Vec2::new(h, 0.0)).unwrap().grad_c;
        let gxm = lens.local(x - Vec2::new(h, 0.0)).unwrap().grad_c;
        let hxx = (gxp.x - gxm.x) / (2.0 * h);
        let hxy = (gxp.y - gxm.y) / (2.0 * h);
        assert!((l.hess_c[(0, 0)] - hxx).abs() < 1e-5 * l.hess_c.norm());
        assert!((l.hess_c[(0, 1)] - hxy).abs() < 1e-5 * l.hess_c.norm());
    }
}
