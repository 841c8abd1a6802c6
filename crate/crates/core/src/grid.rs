//! Rectangular computational domain and ghost-padded field storage.
//!
//! The domain is `[-lx, lx] x [-ly, ly]`. The x direction is periodic with
//! `nx` sample columns and no duplicated seam column. In y the walls carry
//! sample rows, so a free-slip grid has `ny + 1` rows. Every field carries
//! two ghost layers on each side, which is the reach of the widest stencil.
//!
//! Storage is row-major with x fastest.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Depth of the ghost layer on every side.
pub const GHOST: usize = 2;

/// Smallest interior extent in either direction.
pub const MIN_POINTS: usize = 8;

/// How the y boundary is closed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum YBoundary {
    /// Walls at `y = +-ly` with `d/dy = 0`, realized by even reflection.
    FreeSlip,
    /// Doubly periodic torus; only used for discrete-invariant checks.
    Periodic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid2D<T> {
    pub nx: usize,
    pub ny: usize,
    pub lx: T,
    pub ly: T,
    pub hx: T,
    pub hy: T,
    pub y_boundary: YBoundary,
}

impl<T: Scalar> Grid2D<T> {
    /// Free-slip grid on `[-lx, lx] x [-ly, ly]`.
    pub fn new(nx: usize, ny: usize, lx: T, ly: T) -> Result<Self> {
        Self::with_boundary(nx, ny, lx, ly, YBoundary::FreeSlip)
    }

    /// Doubly periodic grid with `ny` rows and no wall rows.
    pub fn torus(nx: usize, ny: usize, lx: T, ly: T) -> Result<Self> {
        Self::with_boundary(nx, ny, lx, ly, YBoundary::Periodic)
    }

    pub fn with_boundary(nx: usize, ny: usize, lx: T, ly: T, y_boundary: YBoundary) -> Result<Self> {
        if nx < MIN_POINTS || ny < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "need at least {MIN_POINTS} points per direction, got {nx} x {ny}"
            )));
        }
        if !(lx > T::zero() && ly > T::zero()) || !lx.is_finite() || !ly.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half-extents must be positive and finite, got lx = {lx}, ly = {ly}"
            )));
        }
        let two = T::lit(2.0);
        Ok(Self {
            nx,
            ny,
            lx,
            ly,
            hx: two * lx / T::from_count(nx),
            hy: two * ly / T::from_count(ny),
            y_boundary,
        })
    }

    /// The 200 x 100 grid on `[-20, 20] x [-10, 10]` with `h = 0.2`.
    pub fn paper() -> Self {
        Self::new(200, 100, T::lit(20.0), T::lit(10.0)).expect("paper grid is valid")
    }

    /// Number of sample rows in y.
    #[inline]
    pub fn rows(&self) -> usize {
        match self.y_boundary {
            YBoundary::FreeSlip => self.ny + 1,
            YBoundary::Periodic => self.ny,
        }
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.nx
    }

    /// Padded row length.
    #[inline]
    pub fn stride(&self) -> usize {
        self.nx + 2 * GHOST
    }

    #[inline]
    pub fn padded_rows(&self) -> usize {
        self.rows() + 2 * GHOST
    }

    #[inline]
    pub fn padded_len(&self) -> usize {
        self.stride() * self.padded_rows()
    }

    /// Number of interior samples.
    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.rows()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// x coordinate of column `i`; ghost columns are negative or `>= nx`.
    #[inline]
    pub fn x(&self, i: isize) -> T {
        -self.lx + T::lit(i as f64) * self.hx
    }

    /// y coordinate of row `j`.
    #[inline]
    pub fn y(&self, j: isize) -> T {
        -self.ly + T::lit(j as f64) * self.hy
    }

    /// Offset of interior point `(i, j)` in the padded buffer.
    #[inline(always)]
    pub fn index(&self, i: isize, j: isize) -> usize {
        let g = GHOST as isize;
        ((j + g) as usize) * self.stride() + (i + g) as usize
    }

    /// Column nearest to `x`, wrapped into the periodic range.
    pub fn nearest_col(&self, x: T) -> usize {
        let k = ((x + self.lx) / self.hx).round().to_i64().unwrap_or(0);
        k.rem_euclid(self.nx as i64) as usize
    }

    /// Row nearest to `y`, clamped to the sample rows.
    pub fn nearest_row(&self, y: T) -> usize {
        let k = ((y + self.ly) / self.hy).round().to_i64().unwrap_or(0);
        k.clamp(0, self.rows() as i64 - 1) as usize
    }

    /// Quadrature weight of row `j` in y: trapezoid with half-weight walls on
    /// a free-slip grid, uniform on a torus.
    #[inline]
    pub fn row_weight(&self, j: usize) -> T {
        match self.y_boundary {
            YBoundary::FreeSlip if j == 0 || j == self.ny => self.hy * T::lit(0.5),
            _ => self.hy,
        }
    }

    /// Structural equality used to reject mixed-grid operations.
    pub fn same_as(&self, other: &Self) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && self.lx == other.lx
            && self.ly == other.ly
            && self.y_boundary == other.y_boundary
    }
}

/// Scalar samples on a [`Grid2D`], including the ghost layers.
#[derive(Clone, Debug, PartialEq)]
pub struct Field2D<T> {
    grid: Grid2D<T>,
    data: Vec<T>,
}

impl<T: Scalar> Field2D<T> {
    pub fn zeros(grid: Grid2D<T>) -> Self {
        Self {
            data: vec![T::zero(); grid.padded_len()],
            grid,
        }
    }

    pub fn constant(grid: Grid2D<T>, value: T) -> Self {
        Self {
            data: vec![value; grid.padded_len()],
            grid,
        }
    }

    /// Samples `f(x, y)` on the interior and fills ghosts from the boundary
    /// conditions.
    pub fn from_fn(grid: Grid2D<T>, f: impl Fn(T, T) -> T) -> Self {
        let mut field = Self::zeros(grid);
        for j in 0..grid.rows() {
            let y = grid.y(j as isize);
            for i in 0..grid.nx {
                let k = grid.index(i as isize, j as isize);
                field.data[k] = f(grid.x(i as isize), y);
            }
        }
        field.apply_boundary();
        field
    }

    /// Samples `f(x, y)` on every padded point, ghosts included, using the
    /// unwrapped ghost coordinates. No boundary condition is applied.
    pub fn from_fn_padded(grid: Grid2D<T>, f: impl Fn(T, T) -> T) -> Self {
        let mut field = Self::zeros(grid);
        let g = GHOST as isize;
        for j in -g..grid.rows() as isize + g {
            let y = grid.y(j);
            for i in -g..grid.nx as isize + g {
                let k = grid.index(i, j);
                field.data[k] = f(grid.x(i), y);
            }
        }
        field
    }

    /// Builds a field from interior values in row-major order (x fastest).
    pub fn from_interior(grid: Grid2D<T>, values: &[T]) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} interior values, got {}",
                grid.len(),
                values.len()
            )));
        }
        let mut field = Self::zeros(grid);
        for (j, row) in values.chunks_exact(grid.nx).enumerate() {
            let start = grid.index(0, j as isize);
            field.data[start..start + grid.nx].copy_from_slice(row);
        }
        field.apply_boundary();
        Ok(field)
    }

    #[inline]
    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    /// Padded storage, ghosts included.
    #[inline]
    pub fn data(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    #[inline(always)]
    pub fn get(&self, i: isize, j: isize) -> T {
        self.data[self.grid.index(i, j)]
    }

    #[inline(always)]
    pub fn set(&mut self, i: isize, j: isize, v: T) {
        let k = self.grid.index(i, j);
        self.data[k] = v;
    }

    /// Padded row `j` (length `nx + 4`); column `i` sits at offset `i + 2`.
    #[inline]
    pub fn row(&self, j: isize) -> &[T] {
        let start = self.grid.index(-(GHOST as isize), j);
        &self.data[start..start + self.grid.stride()]
    }

    /// Interior values of row `j`.
    #[inline]
    pub fn interior_row(&self, j: usize) -> &[T] {
        let start = self.grid.index(0, j as isize);
        &self.data[start..start + self.grid.nx]
    }

    #[inline]
    pub fn interior_row_mut(&mut self, j: usize) -> &mut [T] {
        let start = self.grid.index(0, j as isize);
        let nx = self.grid.nx;
        &mut self.data[start..start + nx]
    }

    /// Interior values in row-major order.
    pub fn interior(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.grid.len());
        for j in 0..self.grid.rows() {
            out.extend_from_slice(self.interior_row(j));
        }
        out
    }

    /// Iterates `(i, j, value)` over interior samples in scan order.
    pub fn iter_interior(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        (0..self.grid.rows())
            .flat_map(move |j| self.interior_row(j).iter().enumerate().map(move |(i, &v)| (i, j, v)))
    }

    /// Fills the ghost layers: periodic wrap in x, even reflection about the
    /// wall rows in y (or periodic wrap on a torus). Corners are consistent
    /// with both rules.
    pub fn apply_boundary(&mut self) {
        let grid = self.grid;
        let nx = grid.nx;
        let stride = grid.stride();
        let g = GHOST;

        // x wrap on interior rows
        for j in 0..grid.rows() {
            let base = (j + g) * stride;
            let row = &mut self.data[base..base + stride];
            row[0] = row[nx];
            row[1] = row[nx + 1];
            row[nx + 2] = row[2];
            row[nx + 3] = row[3];
        }

        // y ghosts copy whole padded rows, which fills corners too
        let rows = grid.rows();
        let copy_row = |data: &mut [T], dst: usize, src: usize| {
            data.copy_within(src * stride..(src + 1) * stride, dst * stride);
        };
        match grid.y_boundary {
            YBoundary::FreeSlip => {
                for k in 1..=g {
                    // row -k mirrors row k; row ny + k mirrors row ny - k
                    copy_row(&mut self.data, g - k, g + k);
                    copy_row(&mut self.data, g + grid.ny + k, g + grid.ny - k);
                }
            }
            YBoundary::Periodic => {
                for k in 1..=g {
                    copy_row(&mut self.data, g - k, g + rows - k);
                    copy_row(&mut self.data, g + rows - 1 + k, g + k - 1);
                }
            }
        }
    }

    /// Returns the field with its ghost layers refreshed.
    pub fn with_boundary(mut self) -> Self {
        self.apply_boundary();
        self
    }

    /// First interior sample that is NaN or infinite, in scan order.
    pub fn first_non_finite(&self) -> Option<(usize, usize)> {
        self.iter_interior()
            .find(|&(_, _, v)| !v.is_finite())
            .map(|(i, j, _)| (i, j))
    }

    pub fn is_finite(&self) -> bool {
        self.first_non_finite().is_none()
    }

    /// Largest absolute interior value.
    pub fn max_abs(&self) -> T {
        self.iter_interior()
            .fold(T::zero(), |m, (_, _, v)| m.max(v.abs()))
    }

    /// Root-mean-square of the interior samples.
    pub fn rms(&self) -> T {
        let sum: T = self.iter_interior().map(|(_, _, v)| v * v).sum();
        (sum / T::from_count(self.grid.len())).sqrt()
    }

    /// `self <- self * a`, ghosts included.
    pub fn scale(&mut self, a: T) {
        for v in &mut self.data {
            *v = *v * a;
        }
    }

    /// `self <- self + a * other`, ghosts included.
    pub fn axpy(&mut self, a: T, other: &Self) {
        debug_assert!(self.grid.same_as(&other.grid));
        for (v, &o) in self.data.iter_mut().zip(&other.data) {
            *v = *v + a * o;
        }
    }

    /// Elementwise combination over the padded buffer.
    pub fn zip_map(&self, other: &Self, f: impl Fn(T, T) -> T) -> Self {
        debug_assert!(self.grid.same_as(&other.grid));
        Self {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(|&a| f(a)).collect(),
        }
    }

    /// Copies interior and ghost values from `other` without reallocating.
    pub fn copy_from(&mut self, other: &Self) {
        debug_assert!(self.grid.same_as(&other.grid));
        self.data.copy_from_slice(&other.data);
    }

    /// Rolls interior columns by `k` (positive moves content toward +x) and
    /// refreshes the ghosts.
    pub fn shifted_x(&self, k: isize) -> Self {
        let nx = self.grid.nx as isize;
        let mut out = Self::zeros(self.grid);
        for j in 0..self.grid.rows() {
            let src = self.interior_row(j);
            let dst = out.interior_row_mut(j);
            for i in 0..nx {
                dst[(i + k).rem_euclid(nx) as usize] = src[i as usize];
            }
        }
        out.apply_boundary();
        out
    }

    /// Largest absolute interior difference between two fields.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.iter_interior()
            .zip(other.iter_interior())
            .fold(T::zero(), |m, ((_, _, a), (_, _, b))| m.max((a - b).abs()))
    }
}

/// Circular Gaussian `amplitude * exp(-(x - x0)^2 - (y - y0)^2)`.
pub fn sample_gaussian<T: Scalar>(grid: Grid2D<T>, amplitude: T, x0: T, y0: T) -> Field2D<T> {
    Field2D::from_fn(grid, |x, y| {
        let dx = x - x0;
        let dy = y - y0;
        amplitude * (-(dx * dx) - dy * dy).exp()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_grid_spacing() {
        let g = Grid2D::<f64>::new(200, 100, 20.0, 10.0).unwrap();
        assert!((g.hx - 0.2).abs() < 1e-15);
        assert!((g.hy - 0.2).abs() < 1e-15);
        assert_eq!(g.rows(), 101);
    }

    #[test]
    fn small_and_anisotropic_grids() {
        let g = Grid2D::<f64>::new(8, 8, 1.0, 1.0).unwrap();
        assert_eq!((g.hx, g.hy), (0.25, 0.25));
        let g = Grid2D::<f64>::new(200, 100, 20.0, 5.0).unwrap();
        assert!((g.hx - 0.2).abs() < 1e-15);
        assert!((g.hy - 0.1).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid2D::<f64>::new(7, 8, 1.0, 1.0).is_err());
        assert!(Grid2D::<f64>::new(8, 4, 1.0, 1.0).is_err());
        assert!(Grid2D::<f64>::new(8, 8, 0.0, 1.0).is_err());
        assert!(Grid2D::<f64>::new(8, 8, 1.0, -2.0).is_err());
        assert!(Grid2D::<f64>::new(8, 8, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn coordinates() {
        let g = Grid2D::<f64>::paper();
        assert_eq!(g.x(0), -20.0);
        assert!((g.y(100) - 10.0).abs() < 1e-12);
        assert_eq!(g.nearest_row(1.0), 55);
        assert_eq!(g.nearest_col(0.0), 100);
    }

    #[test]
    fn constant_ghosts() {
        let g = Grid2D::<f64>::new(12, 10, 1.0, 1.0).unwrap();
        let f = Field2D::from_fn(g, |_, _| 2.5);
        assert!(f.data().iter().all(|&v| v == 2.5));
    }

    #[test]
    fn periodic_x_ghosts_continue_cosine() {
        let g = Grid2D::<f64>::paper();
        let f = Field2D::from_fn(g, |x, _| (std::f64::consts::PI * x / 20.0).cos());
        for j in [-2, 0, 50, 102] {
            for i in [-2, -1, 200, 201] {
                let exact = (std::f64::consts::PI * g.x(i) / 20.0).cos();
                assert!((f.get(i, j) - exact).abs() < 1e-13, "i={i} j={j}");
            }
        }
    }

    #[test]
    fn wall_derivative_vanishes() {
        let g = Grid2D::<f64>::paper();
        let f = Field2D::from_fn(g, |_, y| y * y);
        let j = g.ny as isize;
        for i in 0..g.nx as isize {
            let d = (-f.get(i, j + 2) + 8.0 * f.get(i, j + 1) - 8.0 * f.get(i, j - 1) + f.get(i, j - 2))
                / (12.0 * g.hy);
            assert!(d.abs() < 1e-12);
            let d0 = (-f.get(i, 2) + 8.0 * f.get(i, 1) - 8.0 * f.get(i, -1) + f.get(i, -2)) / (12.0 * g.hy);
            assert!(d0.abs() < 1e-12);
        }
    }

    #[test]
    fn apply_boundary_idempotent() {
        let g = Grid2D::<f64>::new(16, 12, 2.0, 1.5).unwrap();
        let mut f = Field2D::from_fn(g, |x, y| (x * 1.3).sin() * (y + 0.2).exp());
        let once = f.clone();
        f.apply_boundary();
        assert_eq!(f, once);

        let t = Grid2D::<f64>::torus(16, 12, 2.0, 1.5).unwrap();
        let mut f = Field2D::from_fn(t, |x, y| x * y);
        let once = f.clone();
        f.apply_boundary();
        assert_eq!(f, once);
    }

    #[test]
    fn reflected_rows_bitwise_mirror() {
        let g = Grid2D::<f64>::new(16, 12, 2.0, 1.5).unwrap();
        let f = Field2D::from_fn(g, |x, y| (x - 0.3).cos() + y * y * 0.7);
        let ny = g.ny as isize;
        for k in 1..=2 {
            assert_eq!(f.row(-k), f.row(k));
            assert_eq!(f.row(ny + k), f.row(ny - k));
        }
    }

    #[test]
    fn torus_wraps_rows() {
        let g = Grid2D::<f64>::torus(8, 8, 1.0, 1.0).unwrap();
        let f = Field2D::from_fn(g, |x, y| x + 10.0 * y);
        assert_eq!(f.row(-1), f.row(7));
        assert_eq!(f.row(-2), f.row(6));
        assert_eq!(f.row(8), f.row(0));
        assert_eq!(f.row(9), f.row(1));
    }

    #[test]
    fn seam_windows_commute_with_shift() {
        let g = Grid2D::<f64>::new(20, 8, 1.0, 1.0).unwrap();
        let f = Field2D::from_fn(g, |x, _| (x * 2.0).sin() + 0.1 * x * x);
        for k in [1isize, 3, -2, 19] {
            let s = f.shifted_x(k);
            for i in 0..20isize {
                for off in -2..=2 {
                    let a = s.get(i + off, 3);
                    let b = f.get((i + off - k).rem_euclid(20), 3);
                    assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn gaussian_samples() {
        let g = Grid2D::<f64>::paper();
        let f = sample_gaussian(g, 3.0, 0.0, 1.0);
        let (i0, j0) = (g.nearest_col(0.0), g.nearest_row(1.0));
        assert!((f.get(i0 as isize, j0 as isize) - 3.0).abs() < 1e-12);
        assert_eq!(f.max_abs(), f.get(i0 as isize, j0 as isize));
        let i1 = g.nearest_col(1.0) as isize;
        assert!((f.get(i1, j0 as isize) - 3.0 * (-1.0f64).exp()).abs() < 1e-12);

        let z = sample_gaussian(g, 0.0, 0.0, 0.0);
        assert!(z.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn non_finite_detection() {
        let g = Grid2D::<f64>::new(8, 8, 1.0, 1.0).unwrap();
        let mut f = Field2D::zeros(g);
        assert!(f.is_finite());
        f.set(3, 4, f64::NAN);
        f.set(5, 6, f64::INFINITY);
        assert_eq!(f.first_non_finite(), Some((3, 4)));
    }
}
