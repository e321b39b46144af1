//! Marker sampling and the uniform grid used to look markers up by area.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Polygon, Rect, Vec2};
use crate::Scalar;

/// Capture radius agents use unless a scenario says otherwise (meters).
pub const DEFAULT_CAPTURE_RADIUS: f64 = 2.0;
/// Markers per square meter unless a scenario says otherwise.
pub const DEFAULT_MARKER_DENSITY: f64 = 6.0;

/// RNG stream reserved for marker placement; spawns use another stream of the same seed.
pub(crate) const MARKER_STREAM: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marker<T> {
    pub id: u32,
    pub position: Vec2<T>,
}

/// Bucket grid over the world rectangle. Each marker id sits in exactly one cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid<T> {
    origin: Vec2<T>,
    cell_size: T,
    cols: usize,
    rows: usize,
    cells: Vec<Vec<u32>>,
}

impl<T: Scalar> SpatialGrid<T> {
    pub fn new(bounds: &Rect<T>, cell_size: T) -> Self {
        let cols = (bounds.width() / cell_size).ceil().to_usize().unwrap_or(1).max(1);
        let rows = (bounds.height() / cell_size).ceil().to_usize().unwrap_or(1).max(1);
        SpatialGrid {
            origin: bounds.min,
            cell_size,
            cols,
            rows,
            cells: vec![Vec::new(); cols * rows],
        }
    }

    pub fn cell_size(&self) -> T {
        self.cell_size
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.cols, self.rows)
    }

    pub fn cells(&self) -> &[Vec<u32>] {
        &self.cells
    }

    fn axis_index(&self, coord: T, origin: T, len: usize) -> isize {
        let raw = ((coord - origin) / self.cell_size).floor();
        raw.to_isize().unwrap_or(0).clamp(0, len as isize - 1)
    }

    pub fn cell_of(&self, p: Vec2<T>) -> usize {
        let c = self.axis_index(p.x, self.origin.x, self.cols) as usize;
        let r = self.axis_index(p.y, self.origin.y, self.rows) as usize;
        r * self.cols + c
    }

    pub fn insert(&mut self, p: Vec2<T>, id: u32) {
        let cell = self.cell_of(p);
        self.cells[cell].push(id);
    }

    /// Visits every id stored in cells overlapping the square of half-width
    /// `radius` around `center`. With `radius <= cell_size` that is the 3×3
    /// neighborhood. Callers filter by exact distance.
    pub fn for_each_near(&self, center: Vec2<T>, radius: T, mut visit: impl FnMut(u32)) {
        let c0 = self.axis_index(center.x - radius, self.origin.x, self.cols) as usize;
        let c1 = self.axis_index(center.x + radius, self.origin.x, self.cols) as usize;
        let r0 = self.axis_index(center.y - radius, self.origin.y, self.rows) as usize;
        let r1 = self.axis_index(center.y + radius, self.origin.y, self.rows) as usize;
        for r in r0..=r1 {
            for c in c0..=c1 {
                for &id in &self.cells[r * self.cols + c] {
                    visit(id);
                }
            }
        }
    }
}

/// The contested resource: an immutable marker set plus its grid index.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkerField<T> {
    bounds: Rect<T>,
    markers: Vec<Marker<T>>,
    grid: SpatialGrid<T>,
    density: T,
    seed: u64,
}

impl<T: Scalar> MarkerField<T> {
    /// Builds a field from explicit marker positions. Ids follow the input order.
    pub fn from_positions(bounds: Rect<T>, positions: Vec<Vec2<T>>, cell_size: T) -> Self {
        let markers: Vec<Marker<T>> = positions
            .into_iter()
            .enumerate()
            .map(|(i, position)| Marker { id: i as u32, position })
            .collect();
        let density = if bounds.area() > T::zero() {
            T::from_usize(markers.len()).unwrap_or_else(T::zero) / bounds.area()
        } else {
            T::zero()
        };
        let grid = build_grid(&bounds, &markers, cell_size);
        MarkerField { bounds, markers, grid, density, seed: 0 }
    }

    /// Same markers indexed with a different cell size.
    pub fn reindexed(mut self, cell_size: T) -> Self {
        self.grid = build_grid(&self.bounds, &self.markers, cell_size);
        self
    }

    pub fn markers(&self) -> &[Marker<T>] {
        &self.markers
    }

    pub fn marker(&self, id: u32) -> &Marker<T> {
        &self.markers[id as usize]
    }

    pub fn len(&self) -> usize {
        self.markers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.markers.is_empty()
    }

    pub fn bounds(&self) -> &Rect<T> {
        &self.bounds
    }

    pub fn grid(&self) -> &SpatialGrid<T> {
        &self.grid
    }

    pub fn density(&self) -> T {
        self.density
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn build_grid<T: Scalar>(bounds: &Rect<T>, markers: &[Marker<T>], cell_size: T) -> SpatialGrid<T> {
    let mut grid = SpatialGrid::new(bounds, cell_size);
    for m in markers {
        grid.insert(m.position, m.id);
    }
    grid
}

/// Samples markers uniformly over `bounds` minus `obstacles`.
///
/// `round(density × area(bounds))` candidates are drawn and those falling
/// inside an obstacle are discarded, so the expected count is
/// `density × free area`. Sampling happens in `f64` from a ChaCha8 stream
/// so the same inputs give the same field on every platform and for every
/// scalar type.
pub fn generate_markers<T: Scalar>(
    bounds: Rect<T>,
    obstacles: &[Polygon<T>],
    density: f64,
    seed: u64,
) -> Result<MarkerField<T>> {
    generate_markers_indexed(bounds, obstacles, density, seed, T::lit(DEFAULT_CAPTURE_RADIUS))
}

pub fn generate_markers_indexed<T: Scalar>(
    bounds: Rect<T>,
    obstacles: &[Polygon<T>],
    density: f64,
    seed: u64,
    cell_size: T,
) -> Result<MarkerField<T>> {
    if !(density > 0.0 && density.is_finite()) {
        return Err(Error::InvalidDensity(density));
    }
    if bounds.is_degenerate() {
        return Err(Error::DegenerateBounds);
    }

    let (x0, y0) = (bounds.min.x.as_f64(), bounds.min.y.as_f64());
    let (w, h) = (bounds.width().as_f64(), bounds.height().as_f64());
    let candidates = (density * w * h).round() as u64;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(MARKER_STREAM);

    let mut markers = Vec::with_capacity(candidates as usize);
    for _ in 0..candidates {
        let x = x0 + rng.gen::<f64>() * w;
        let y = y0 + rng.gen::<f64>() * h;
        let p = Vec2::new(T::lit(x), T::lit(y));
        if obstacles.iter().any(|o| o.contains(p)) {
            continue;
        }
        markers.push(Marker { id: markers.len() as u32, position: p });
    }

    if markers.is_empty() {
        return Err(Error::EmptyField);
    }

    let grid = build_grid(&bounds, &markers, cell_size);
    Ok(MarkerField { bounds, markers, grid, density: T::lit(density), seed })
}
