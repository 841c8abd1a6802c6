//! Centered finite-difference operators on ghost-padded fields.
//!
//! All stencils read the two ghost layers, so the input must have current
//! ghosts. Every public operator returns a fresh field whose ghosts have
//! been refreshed with [`Field2D::apply_boundary`]. The `*_into` variants
//! write interior values only and are used by the right-hand-side kernels,
//! which reuse scratch buffers.
//!
//! The third-derivative stencil is the 4-point form
//! `(u[i+2] - 2u[i+1] + 2u[i-1] - u[i-2]) / (2h^3)`, which is second-order
//! accurate; the others are fourth order.

use crate::grid::{Field2D, Grid2D, GHOST};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DerivativeKind {
    First(Axis),
    Second(Axis),
    /// Third derivative in x (the only axis the evolution equation needs).
    Third,
    /// `d^3 / dx dy^2` as the fused tensor-product stencil.
    MixedXYY,
    Laplacian,
}

impl DerivativeKind {
    pub fn apply<T: Scalar>(self, u: &Field2D<T>) -> Field2D<T> {
        match self {
            DerivativeKind::First(Axis::X) => dx(u),
            DerivativeKind::First(Axis::Y) => dy(u),
            DerivativeKind::Second(Axis::X) => dxx(u),
            DerivativeKind::Second(Axis::Y) => dyy(u),
            DerivativeKind::Third => dxxx(u),
            DerivativeKind::MixedXYY => mixed_x_yy(u),
            DerivativeKind::Laplacian => laplacian(u),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DerivativeKind::First(Axis::X) => "dx",
            DerivativeKind::First(Axis::Y) => "dy",
            DerivativeKind::Second(Axis::X) => "dxx",
            DerivativeKind::Second(Axis::Y) => "dyy",
            DerivativeKind::Third => "dxxx",
            DerivativeKind::MixedXYY => "mixed_x_yy",
            DerivativeKind::Laplacian => "laplacian",
        }
    }
}

#[inline(always)]
fn c<T: Scalar>(v: f64) -> T {
    T::lit(v)
}

/// Applies a 5-point x stencil `w` (for offsets -2..=2) scaled by `s`.
#[inline(always)]
fn x_stencil_into<T: Scalar>(u: &Field2D<T>, out: &mut Field2D<T>, w: [T; 5], s: T) {
    let grid = *u.grid();
    let nx = grid.nx;
    for j in 0..grid.rows() {
        let src = u.row(j as isize);
        let dst = &mut out.interior_row_mut(j)[..nx];
        let (a, b, m, d, e) = (
            &src[0..nx],
            &src[1..nx + 1],
            &src[2..nx + 2],
            &src[3..nx + 3],
            &src[4..nx + 4],
        );
        for i in 0..nx {
            dst[i] = (w[0] * a[i] + w[1] * b[i] + w[2] * m[i] + w[3] * d[i] + w[4] * e[i]) * s;
        }
    }
}

/// Applies a 5-point y stencil `w` (for offsets -2..=2) scaled by `s`.
#[inline(always)]
fn y_stencil_into<T: Scalar>(u: &Field2D<T>, out: &mut Field2D<T>, w: [T; 5], s: T) {
    let grid = *u.grid();
    let nx = grid.nx;
    for j in 0..grid.rows() as isize {
        let (a, b, m, d, e) = (
            &u.row(j - 2)[GHOST..GHOST + nx],
            &u.row(j - 1)[GHOST..GHOST + nx],
            &u.row(j)[GHOST..GHOST + nx],
            &u.row(j + 1)[GHOST..GHOST + nx],
            &u.row(j + 2)[GHOST..GHOST + nx],
        );
        let dst = &mut out.interior_row_mut(j as usize)[..nx];
        for i in 0..nx {
            dst[i] = (w[0] * a[i] + w[1] * b[i] + w[2] * m[i] + w[3] * d[i] + w[4] * e[i]) * s;
        }
    }
}

fn first_weights<T: Scalar>() -> [T; 5] {
    [c(1.0), c(-8.0), c(0.0), c(8.0), c(-1.0)]
}

fn second_weights<T: Scalar>() -> [T; 5] {
    [c(-1.0), c(16.0), c(-30.0), c(16.0), c(-1.0)]
}

fn third_weights<T: Scalar>() -> [T; 5] {
    [c(-1.0), c(2.0), c(0.0), c(-2.0), c(1.0)]
}

/// First derivative in x with the 3-point (`order == 2`) or 5-point
/// (`order == 4`) centered stencil.
pub fn first_x_into<T: Scalar>(u: &Field2D<T>, out: &mut Field2D<T>, order: u8) {
    let h = u.grid().hx;
    if order == 2 {
        x_stencil_into(u, out, central_weights(), T::one() / (c::<T>(2.0) * h));
    } else {
        dx_into(u, out);
    }
}

/// First derivative in y, see [`first_x_into`].
pub fn first_y_into<T: Scalar>(u: &Field2D<T>, out: &mut Field2D<T>, order: u8) {
    let h = u.grid().hy;
    if order == 2 {
        y_stencil_into(u, out, central_weights(), T::one() / (c::<T>(2.0) * h));
    } else {
        dy_into(u, out);
    }
}

fn central_weights<T: Scalar>() -> [T; 5] {
    [c(0.0), c(-1.0), c(0.0), c(1.0), c(0.0)]
}

pub fn dx_into<T: Scalar>(u: &Field2D<T>, out: &mut Field2D<T>) {
    let h = u.grid().hx;
    x_stencil_into(u, out, first_weights(), T::one() / (c::<T>(12.0) * h));
}

pub fn dxx_into<T: Scalar>(u: &Field2D<T>, out: &mut Field2D<T>) {
    let h = u.grid().hx;
    x_stencil_into(u, out, second_weights(), T::one() / (c::<T>(12.0) * h * h));
}

pub fn dxxx_into<T: Scalar>(u: &Field2D<T>, out: &mut Field2D<T>) {
    let h = u.grid().hx;
    x_stencil_into(u, out, third_weights(), T::one() / (c::<T>(2.0) * h * h * h));
}

pub fn dy_into<T: Scalar>(u: &Field2D<T>, out: &mut Field2D<T>) {
    let h = u.grid().hy;
    y_stencil_into(u, out, first_weights(), T::one() / (c::<T>(12.0) * h));
}

pub fn dyy_into<T: Scalar>(u: &Field2D<T>, out: &mut Field2D<T>) {
    let h = u.grid().hy;
    y_stencil_into(u, out, second_weights(), T::one() / (c::<T>(12.0) * h * h));
}

/// Five-point Laplacian, `dxx + dyy`, interior only.
pub fn laplacian_into<T: Scalar>(u: &Field2D<T>, out: &mut Field2D<T>) {
    let grid = *u.grid();
    let nx = grid.nx;
    let sx = T::one() / (c::<T>(12.0) * grid.hx * grid.hx);
    let sy = T::one() / (c::<T>(12.0) * grid.hy * grid.hy);
    let (w1, w2, w0) = (c::<T>(-1.0), c::<T>(16.0), c::<T>(-30.0));
    for j in 0..grid.rows() as isize {
        let r = u.row(j);
        let (ym2, ym1, yp1, yp2) = (
            &u.row(j - 2)[GHOST..GHOST + nx],
            &u.row(j - 1)[GHOST..GHOST + nx],
            &u.row(j + 1)[GHOST..GHOST + nx],
            &u.row(j + 2)[GHOST..GHOST + nx],
        );
        let (xm2, xm1, m, xp1, xp2) = (
            &r[0..nx],
            &r[1..nx + 1],
            &r[2..nx + 2],
            &r[3..nx + 3],
            &r[4..nx + 4],
        );
        let dst = &mut out.interior_row_mut(j as usize)[..nx];
        for i in 0..nx {
            let ddx = (w1 * xm2[i] + w2 * xm1[i] + w0 * m[i] + w2 * xp1[i] + w1 * xp2[i]) * sx;
            let ddy = (w1 * ym2[i] + w2 * ym1[i] + w0 * m[i] + w2 * yp1[i] + w1 * yp2[i]) * sy;
            dst[i] = ddx + ddy;
        }
    }
}

/// Fused 20-point `d^3/dx dy^2` stencil over `144 hx hy^2`, interior only.
pub fn mixed_x_yy_into<T: Scalar>(u: &Field2D<T>, out: &mut Field2D<T>) {
    let grid = *u.grid();
    let s = T::one() / (c::<T>(144.0) * grid.hx * grid.hy * grid.hy);
    let wy = second_weights::<T>();
    let wx = first_weights::<T>();
    for j in 0..grid.rows() as isize {
        let rows = [u.row(j - 2), u.row(j - 1), u.row(j), u.row(j + 1), u.row(j + 2)];
        let dst = &mut out.interior_row_mut(j as usize);
        for (i, d) in dst.iter_mut().enumerate() {
            let mut acc = T::zero();
            for (a, &wxa) in wx.iter().enumerate() {
                if a == 2 {
                    continue;
                }
                let col = i + a;
                let col_sum = wy[0] * rows[0][col]
                    + wy[1] * rows[1][col]
                    + wy[2] * rows[2][col]
                    + wy[3] * rows[3][col]
                    + wy[4] * rows[4][col];
                acc = acc + wxa * col_sum;
            }
            *d = acc * s;
        }
    }
}

fn fresh<T: Scalar>(u: &Field2D<T>, f: impl Fn(&Field2D<T>, &mut Field2D<T>)) -> Field2D<T> {
    let mut out = Field2D::zeros(*u.grid());
    f(u, &mut out);
    out.apply_boundary();
    out
}

/// `(-u[i+2] + 8u[i+1] - 8u[i-1] + u[i-2]) / (12 hx)`
pub fn dx<T: Scalar>(u: &Field2D<T>) -> Field2D<T> {
    fresh(u, dx_into)
}

/// `(-u[i+2] + 16u[i+1] - 30u[i] + 16u[i-1] - u[i-2]) / (12 hx^2)`
pub fn dxx<T: Scalar>(u: &Field2D<T>) -> Field2D<T> {
    fresh(u, dxx_into)
}

/// `(u[i+2] - 2u[i+1] + 2u[i-1] - u[i-2]) / (2 hx^3)`
pub fn dxxx<T: Scalar>(u: &Field2D<T>) -> Field2D<T> {
    fresh(u, dxxx_into)
}

pub fn dy<T: Scalar>(u: &Field2D<T>) -> Field2D<T> {
    fresh(u, dy_into)
}

pub fn dyy<T: Scalar>(u: &Field2D<T>) -> Field2D<T> {
    fresh(u, dyy_into)
}

pub fn mixed_x_yy<T: Scalar>(u: &Field2D<T>) -> Field2D<T> {
    fresh(u, mixed_x_yy_into)
}

pub fn laplacian<T: Scalar>(u: &Field2D<T>) -> Field2D<T> {
    fresh(u, laplacian_into)
}

/// Outcome of a grid-refinement study for one operator.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub kind: DerivativeKind,
    pub spacings: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log(error)` against `log(h)`.
    pub order: f64,
}

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn fitted_order(spacings: &[f64], errors: &[f64]) -> f64 {
    let n = spacings.len() as f64;
    let xs: Vec<f64> = spacings.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

/// Measures the convergence order of `kind` on smooth periodic test fields
/// over the domain `[-20, 20] x [-10, 10]` with `nx` columns and `nx / 2`
/// rows per level.
///
/// x operators are tested on `sin(2 pi x / lx)`, y operators on
/// `cos(pi y / ly)` (even about both walls), and the Laplacian and mixed
/// operator on the product of the two.
pub fn convergence_study(kind: DerivativeKind, levels: &[usize]) -> ConvergenceReport {
    use std::f64::consts::PI;
    let (lx, ly) = (20.0f64, 10.0f64);
    let kx = 2.0 * PI / lx;
    let ky = PI / ly;

    let (field_fn, exact_fn): (fn(f64, f64, f64, f64) -> f64, fn(f64, f64, f64, f64) -> f64) = match kind {
        DerivativeKind::First(Axis::X) => (|x, _, kx, _| (kx * x).sin(), |x, _, kx, _| kx * (kx * x).cos()),
        DerivativeKind::Second(Axis::X) => {
            (|x, _, kx, _| (kx * x).sin(), |x, _, kx, _| -kx * kx * (kx * x).sin())
        }
        DerivativeKind::Third => (|x, _, kx, _| (kx * x).sin(), |x, _, kx, _| -kx.powi(3) * (kx * x).cos()),
        DerivativeKind::First(Axis::Y) => (|_, y, _, ky| (ky * y).cos(), |_, y, _, ky| -ky * (ky * y).sin()),
        DerivativeKind::Second(Axis::Y) => {
            (|_, y, _, ky| (ky * y).cos(), |_, y, _, ky| -ky * ky * (ky * y).cos())
        }
        DerivativeKind::Laplacian => (
            |x, y, kx, ky| (kx * x).sin() * (ky * y).cos(),
            |x, y, kx, ky| -(kx * kx + ky * ky) * (kx * x).sin() * (ky * y).cos(),
        ),
        DerivativeKind::MixedXYY => (
            |x, y, kx, ky| (kx * x).sin() * (ky * y).cos(),
            |x, y, kx, ky| -kx * ky * ky * (kx * x).cos() * (ky * y).cos(),
        ),
    };

    let mut spacings = Vec::new();
    let mut errors = Vec::new();
    for &nx in levels {
        let grid = Grid2D::<f64>::new(nx, nx / 2, lx, ly).expect("valid refinement grid");
        let u = Field2D::from_fn(grid, |x, y| field_fn(x, y, kx, ky));
        let d = kind.apply(&u);
        let err = d
            .iter_interior()
            .map(|(i, j, v)| (v - exact_fn(grid.x(i as isize), grid.y(j as isize), kx, ky)).abs())
            .fold(0.0f64, f64::max);
        spacings.push(grid.hx);
        errors.push(err);
    }
    let order = fitted_order(&spacings, &errors);
    ConvergenceReport {
        kind,
        spacings,
        errors,
        order,
    }
}
