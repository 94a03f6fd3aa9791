//! Point-process sampling, windows, and grid-accelerated spatial queries.
//!
//! All other modules build on the primitives here: axis-aligned cubic
//! windows with open or periodic boundary, homogeneous Poisson sampling,
//! and a uniform-grid index for radius queries.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Poisson};
use thiserror::Error;

/// Highest supported dimension. Percolation workloads are tuned for d = 2.
pub const MAX_DIM: usize = 4;

/// Expected point counts above this are refused outright.
pub const MAX_EXPECTED_COUNT: f64 = 1e8;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("intensity must be nonnegative, got {0}")]
    NegativeIntensity(f64),
    #[error("expected point count {0} exceeds capacity {MAX_EXPECTED_COUNT}")]
    ExpectedCountTooLarge(f64),
    #[error("window side must be positive, got {0}")]
    InvalidSide(f64),
    #[error("dimension must be in 1..={MAX_DIM}, got {0}")]
    InvalidDim(usize),
    #[error("query radius {radius} exceeds grid cell size {cell}")]
    RadiusExceedsCell { radius: f64, cell: f64 },
    #[error("point has dimension {got}, window has dimension {want}")]
    DimensionMismatch { got: usize, want: usize },
}

/// Boundary handling of the sampling window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// Hard window edges; distances are plain Euclidean.
    Open,
    /// Torus identification; distances use the minimum image.
    Periodic,
}

/// Axis-aligned cube `[0, side]^dim`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub dim: usize,
    pub side: f64,
    pub boundary: Boundary,
}

/// A position in d-dimensional space. Coordinates beyond `dim` are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    c: [f64; MAX_DIM],
    dim: usize,
}

/// A displacement vector; the active dimension comes from context.
pub type Vector = [f64; MAX_DIM];

impl Point {
    pub fn new(coords: &[f64]) -> Self {
        assert!(!coords.is_empty() && coords.len() <= MAX_DIM);
        let mut c = [0.0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Point { c, dim: coords.len() }.validate()
    }

    pub fn zero(dim: usize) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM);
        Point { c: [0.0; MAX_DIM], dim }
    }

    fn validate(self) -> Self {
        debug_assert!(self.coords().iter().all(|x| x.is_finite()));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.c[..self.dim]
    }

    pub fn coord(&self, axis: usize) -> f64 {
        self.c[axis]
    }

    /// Point shifted by `v`, without any boundary wrapping.
    pub fn translate(&self, v: &Vector) -> Point {
        let mut c = self.c;
        for (ci, vi) in c[..self.dim].iter_mut().zip(v) {
            *ci += vi;
        }
        Point { c, dim: self.dim }
    }
}

impl Window {
    pub fn new(dim: usize, side: f64, boundary: Boundary) -> Result<Self, GeometryError> {
        if dim == 0 || dim > MAX_DIM {
            return Err(GeometryError::InvalidDim(dim));
        }
        if !(side > 0.0) {
            return Err(GeometryError::InvalidSide(side));
        }
        Ok(Window { dim, side, boundary })
    }

    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }

    pub fn center(&self) -> Point {
        let mut c = [0.0; MAX_DIM];
        for ci in c[..self.dim].iter_mut() {
            *ci = self.side / 2.0;
        }
        Point { c, dim: self.dim }
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.coords().iter().all(|&x| (0.0..=self.side).contains(&x))
    }

    /// Per-axis separation respecting the boundary mode (minimum image on tori).
    fn axis_diff(&self, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        match self.boundary {
            Boundary::Open => d,
            Boundary::Periodic => d.min(self.side - d),
        }
    }

    pub fn distance(&self, a: &Point, b: &Point) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            let d = self.axis_diff(a.c[i], b.c[i]);
            s += d * d;
        }
        s.sqrt()
    }

    /// Sup-norm distance; the metric for the `Q_L` boxes of the percolation events.
    pub fn sup_distance(&self, a: &Point, b: &Point) -> f64 {
        (0..self.dim)
            .map(|i| self.axis_diff(a.c[i], b.c[i]))
            .fold(0.0, f64::max)
    }

    /// Maps a point back into the window under periodic boundary. Open windows
    /// leave coordinates untouched (walkers may drift past the edge).
    pub fn wrap(&self, p: &Point) -> Point {
        match self.boundary {
            Boundary::Open => *p,
            Boundary::Periodic => {
                let mut c = p.c;
                for ci in c[..self.dim].iter_mut() {
                    *ci = ci.rem_euclid(self.side);
                }
                Point { c, dim: self.dim }
            }
        }
    }
}

/// A finite point pattern together with the intensity it was sampled at.
#[derive(Debug, Clone)]
pub struct PointSet {
    points: Vec<Point>,
    pub intensity: f64,
    pub window: Window,
}

impl PointSet {
    pub fn new(points: Vec<Point>, intensity: f64, window: Window) -> Self {
        debug_assert!(points.iter().all(|p| p.dim() == window.dim));
        PointSet { points, intensity, window }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Samples a homogeneous Poisson point process on `window`.
///
/// Deterministic for a fixed `(intensity, window, seed)` triple.
pub fn sample_ppp(intensity: f64, window: Window, seed: u64) -> Result<PointSet, GeometryError> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    sample_ppp_with(intensity, window, &mut rng)
}

/// As [`sample_ppp`] but drawing from a caller-owned RNG stream.
pub fn sample_ppp_with<R: Rng>(
    intensity: f64,
    window: Window,
    rng: &mut R,
) -> Result<PointSet, GeometryError> {
    if intensity < 0.0 {
        return Err(GeometryError::NegativeIntensity(intensity));
    }
    let mean = intensity * window.volume();
    if mean > MAX_EXPECTED_COUNT {
        return Err(GeometryError::ExpectedCountTooLarge(mean));
    }
    let count = if mean == 0.0 {
        0
    } else {
        Poisson::new(mean).expect("positive mean").sample(rng) as usize
    };
    let mut points = Vec::with_capacity(count);
    for _ in 0..count {
        let mut c = [0.0; MAX_DIM];
        for ci in c[..window.dim].iter_mut() {
            *ci = rng.gen_range(0.0..window.side);
        }
        points.push(Point { c, dim: window.dim });
    }
    Ok(PointSet { points, intensity, window })
}

/// Uniform-grid spatial index over a point slice.
///
/// Cells are at least as wide as the radius the index was built for, so a
/// radius query only needs the 3^d neighborhood of the center cell.
#[derive(Debug, Clone)]
pub struct GridIndex {
    cells_per_side: usize,
    cell_edge: f64,
    dim: usize,
    // CSR layout: bucket b holds indices[offsets[b]..offsets[b+1]]
    offsets: Vec<u32>,
    indices: Vec<u32>,
    built_for: f64,
}

impl GridIndex {
    /// Builds an index with cells of width `>= cell_size` over `points`.
    pub fn build(points: &[Point], window: &Window, cell_size: f64) -> GridIndex {
        assert!(cell_size > 0.0);
        let cells_per_side = ((window.side / cell_size).floor() as usize).max(1);
        let cell_edge = window.side / cells_per_side as f64;
        let dim = window.dim;
        let n_cells = cells_per_side.pow(dim as u32);
        let mut counts = vec![0u32; n_cells + 1];
        let cell_of = |p: &Point| -> usize {
            let mut idx = 0usize;
            for i in 0..dim {
                let mut k = (p.c[i] / cell_edge) as isize;
                // clamp points sitting on (or drifted past) the boundary
                k = k.clamp(0, cells_per_side as isize - 1);
                idx = idx * cells_per_side + k as usize;
            }
            idx
        };
        for p in points {
            counts[cell_of(p) + 1] += 1;
        }
        for b in 1..counts.len() {
            counts[b] += counts[b - 1];
        }
        let offsets = counts;
        let mut cursor = offsets.clone();
        let mut indices = vec![0u32; points.len()];
        for (i, p) in points.iter().enumerate() {
            let b = cell_of(p);
            indices[cursor[b] as usize] = i as u32;
            cursor[b] += 1;
        }
        GridIndex {
            cells_per_side,
            cell_edge,
            dim,
            offsets,
            indices,
            built_for: cell_size,
        }
    }

    pub fn cell_size(&self) -> f64 {
        self.built_for
    }

    /// Fills `out` (cleared first) with the indices of all points within
    /// Euclidean distance `r` (closed ball) of `center`, respecting the
    /// window's boundary mode.
    pub fn neighbors_within(
        &self,
        points: &[Point],
        window: &Window,
        center: &Point,
        r: f64,
        out: &mut Vec<u32>,
    ) -> Result<(), GeometryError> {
        out.clear();
        if center.dim() != self.dim {
            return Err(GeometryError::DimensionMismatch { got: center.dim(), want: self.dim });
        }
        if self.cells_per_side < 3 {
            // too few cells for distinct 3^d neighborhoods; scan everything
            for (i, p) in points.iter().enumerate() {
                if window.distance(center, p) <= r {
                    out.push(i as u32);
                }
            }
            return Ok(());
        }
        if r > self.cell_edge + 1e-12 {
            return Err(GeometryError::RadiusExceedsCell { radius: r, cell: self.cell_edge });
        }
        let cps = self.cells_per_side as isize;
        let mut base = [0isize; MAX_DIM];
        for i in 0..self.dim {
            base[i] = ((center.c[i] / self.cell_edge) as isize).clamp(0, cps - 1);
        }
        // walk the 3^d neighborhood via a mixed-radix counter
        let n_offsets = 3usize.pow(self.dim as u32);
        for code in 0..n_offsets {
            let mut idx = 0usize;
            let mut rem = code;
            let mut skip = false;
            for i in 0..self.dim {
                let off = (rem % 3) as isize - 1;
                rem /= 3;
                let mut k = base[i] + off;
                match window.boundary {
                    Boundary::Periodic => k = k.rem_euclid(cps),
                    Boundary::Open => {
                        if k < 0 || k >= cps {
                            skip = true;
                            break;
                        }
                    }
                }
                idx = idx * self.cells_per_side + k as usize;
            }
            if skip {
                continue;
            }
            let lo = self.offsets[idx] as usize;
            let hi = self.offsets[idx + 1] as usize;
            for &pi in &self.indices[lo..hi] {
                if window.distance(center, &points[pi as usize]) <= r {
                    out.push(pi);
                }
            }
        }
        Ok(())
    }
}

/// Grid-backed radius query over a [`PointSet`].
pub fn radius_neighbors(
    ps: &PointSet,
    idx: &GridIndex,
    center: &Point,
    r: f64,
) -> Result<Vec<u32>, GeometryError> {
    let mut out = Vec::new();
    idx.neighbors_within(ps.points(), &ps.window, center, r, &mut out)?;
    Ok(out)
}

/// Number of points within the closed ball of radius `r` around `center`.
pub fn ball_count(ps: &PointSet, center: &Point, r: f64) -> usize {
    ps.points()
        .iter()
        .filter(|p| ps.window.distance(center, p) <= r)
        .count()
}

/// Volume of the unit ball in dimension `d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        1 => 2.0,
        2 => std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI / 3.0,
        4 => std::f64::consts::PI * std::f64::consts::PI / 2.0,
        _ => panic!("unsupported dimension {d}"),
    }
}
