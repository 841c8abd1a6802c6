//! Arakawa discretization of the Jacobian `J[zeta, xi] = zeta_x xi_y - zeta_y xi_x`.
//!
//! `J = (J_DD + J_DC + J_CD) / 3` where `J_DD` differences both arguments,
//! `J_DC` is the divergence form `d/dx(zeta xi_y) - d/dy(zeta xi_x)`, and
//! `J_CD(zeta, xi) = -J_DC(xi, zeta)`. The second-order scheme uses 3-point
//! centered differences; the fourth-order extension replaces every
//! difference by the 5-point stencil.
//!
//! Two routes are provided. [`jacobian`] evaluates the explicit per-point
//! stencils and serves as the reference. [`JacobianWorkspace`] computes the
//! same averaged form from derivative buffers in one fused pass and is what
//! the time stepper uses.

use crate::error::{Error, Result};
use crate::grid::Field2D;
use crate::scalar::Scalar;
use crate::stencil::{first_x_into, first_y_into};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum JacobianScheme {
    /// Classic second-order Arakawa scheme.
    Second,
    /// Fourth-order extension (production default).
    #[default]
    Fourth,
}

impl JacobianScheme {
    pub fn order(self) -> u8 {
        match self {
            JacobianScheme::Second => 2,
            JacobianScheme::Fourth => 4,
        }
    }

    pub fn from_order(order: u8) -> Option<Self> {
        match order {
            2 => Some(JacobianScheme::Second),
            4 => Some(JacobianScheme::Fourth),
            _ => None,
        }
    }
}

fn check_grids<T: Scalar>(a: &Field2D<T>, b: &Field2D<T>) -> Result<()> {
    if a.grid().same_as(b.grid()) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// Reference evaluation of the averaged Arakawa Jacobian from the explicit
/// stencils. Interior only; the output ghosts are refreshed.
pub fn jacobian<T: Scalar>(zeta: &Field2D<T>, xi: &Field2D<T>, scheme: JacobianScheme) -> Result<Field2D<T>> {
    check_grids(zeta, xi)?;
    let grid = *zeta.grid();
    let mut out = Field2D::zeros(grid);
    let third = T::one() / T::lit(3.0);
    for j in 0..grid.rows() as isize {
        for i in 0..grid.nx as isize {
            let v = match scheme {
                JacobianScheme::Second => {
                    point_dd2(zeta, xi, i, j) + point_dc2(zeta, xi, i, j) + point_cd2(zeta, xi, i, j)
                }
                JacobianScheme::Fourth => {
                    point_dd4(zeta, xi, i, j) + point_dc4(zeta, xi, i, j) - point_dc4(xi, zeta, i, j)
                }
            };
            out.set(i, j, v * third);
        }
    }
    out.apply_boundary();
    Ok(out)
}

fn scale2<T: Scalar>(f: &Field2D<T>) -> T {
    T::one() / (T::lit(4.0) * f.grid().hx * f.grid().hy)
}

fn scale4<T: Scalar>(f: &Field2D<T>) -> T {
    T::one() / (T::lit(144.0) * f.grid().hx * f.grid().hy)
}

fn point_dd2<T: Scalar>(z: &Field2D<T>, x: &Field2D<T>, i: isize, j: isize) -> T {
    ((z.get(i + 1, j) - z.get(i - 1, j)) * (x.get(i, j + 1) - x.get(i, j - 1))
        - (z.get(i, j + 1) - z.get(i, j - 1)) * (x.get(i + 1, j) - x.get(i - 1, j)))
        * scale2(z)
}

fn point_dc2<T: Scalar>(z: &Field2D<T>, x: &Field2D<T>, i: isize, j: isize) -> T {
    (z.get(i + 1, j) * (x.get(i + 1, j + 1) - x.get(i + 1, j - 1))
        - z.get(i - 1, j) * (x.get(i - 1, j + 1) - x.get(i - 1, j - 1))
        - z.get(i, j + 1) * (x.get(i + 1, j + 1) - x.get(i - 1, j + 1))
        + z.get(i, j - 1) * (x.get(i + 1, j - 1) - x.get(i - 1, j - 1)))
        * scale2(z)
}

fn point_cd2<T: Scalar>(z: &Field2D<T>, x: &Field2D<T>, i: isize, j: isize) -> T {
    (z.get(i + 1, j + 1) * (x.get(i, j + 1) - x.get(i + 1, j))
        - z.get(i - 1, j - 1) * (x.get(i - 1, j) - x.get(i, j - 1))
        - z.get(i - 1, j + 1) * (x.get(i, j + 1) - x.get(i - 1, j))
        + z.get(i + 1, j - 1) * (x.get(i + 1, j) - x.get(i, j - 1)))
        * scale2(z)
}

/// Unscaled 5-point first difference in x at `(i, j)`.
fn d4x<T: Scalar>(f: &Field2D<T>, i: isize, j: isize) -> T {
    -f.get(i + 2, j) + T::lit(8.0) * f.get(i + 1, j) - T::lit(8.0) * f.get(i - 1, j) + f.get(i - 2, j)
}

fn d4y<T: Scalar>(f: &Field2D<T>, i: isize, j: isize) -> T {
    -f.get(i, j + 2) + T::lit(8.0) * f.get(i, j + 1) - T::lit(8.0) * f.get(i, j - 1) + f.get(i, j - 2)
}

fn point_dd4<T: Scalar>(z: &Field2D<T>, x: &Field2D<T>, i: isize, j: isize) -> T {
    (d4x(z, i, j) * d4y(x, i, j) - d4y(z, i, j) * d4x(x, i, j)) * scale4(z)
}

fn point_dc4<T: Scalar>(z: &Field2D<T>, x: &Field2D<T>, i: isize, j: isize) -> T {
    let e = T::lit(8.0);
    let along_x = -z.get(i + 2, j) * d4y(x, i + 2, j) + e * z.get(i + 1, j) * d4y(x, i + 1, j)
        - e * z.get(i - 1, j) * d4y(x, i - 1, j)
        + z.get(i - 2, j) * d4y(x, i - 2, j);
    let along_y = z.get(i, j + 2) * d4x(x, i, j + 2) - e * z.get(i, j + 1) * d4x(x, i, j + 1)
        + e * z.get(i, j - 1) * d4x(x, i, j - 1)
        - z.get(i, j - 2) * d4x(x, i, j - 2);
    (along_x + along_y) * scale4(z)
}

/// Scratch buffers for the buffered Jacobian route.
#[derive(Clone, Debug)]
pub struct JacobianWorkspace<T> {
    zx: Field2D<T>,
    zy: Field2D<T>,
    xx: Field2D<T>,
    xy: Field2D<T>,
    h: Field2D<T>,
    v: Field2D<T>,
}

impl<T: Scalar> JacobianWorkspace<T> {
    pub fn new(grid: crate::grid::Grid2D<T>) -> Self {
        let z = Field2D::zeros(grid);
        Self {
            zx: z.clone(),
            zy: z.clone(),
            xx: z.clone(),
            xy: z.clone(),
            h: z.clone(),
            v: z,
        }
    }

    /// `x` derivative of `xi` from the last evaluation (valid on interior and
    /// ghost rows).
    pub fn xi_x(&self) -> &Field2D<T> {
        &self.xx
    }

    /// Writes the averaged Jacobian into the interior of `out`.
    ///
    /// With `D` the scheme's first difference,
    /// `J_DD = Dz_x Dxi_y - Dz_y Dxi_x`,
    /// `J_DC = D_x(z Dxi_y) - D_y(z Dxi_x)`,
    /// `J_CD = -(D_x(xi Dz_y) - D_y(xi Dz_x))`.
    pub fn jacobian_into(&mut self, zeta: &Field2D<T>, xi: &Field2D<T>, scheme: JacobianScheme, out: &mut Field2D<T>) {
        let order = scheme.order();
        first_x_into(zeta, &mut self.zx, order);
        first_y_into(zeta, &mut self.zy, order);
        first_x_into(xi, &mut self.xx, order);
        first_y_into(xi, &mut self.xy, order);
        // x-derivative buffers are read on ghost rows, y-derivative buffers on
        // ghost columns; both are produced correctly by the boundary rule.
        self.zx.apply_boundary();
        self.zy.apply_boundary();
        self.xx.apply_boundary();
        self.xy.apply_boundary();

        let third = T::one() / T::lit(3.0);
        let grid = *zeta.grid();
        let nx = grid.nx;
        let (w, sx, sy) = if order == 2 {
            let w = [T::zero(), -T::one(), T::zero(), T::one(), T::zero()];
            (w, T::one() / (T::lit(2.0) * grid.hx), T::one() / (T::lit(2.0) * grid.hy))
        } else {
            let w = [T::one(), T::lit(-8.0), T::zero(), T::lit(8.0), -T::one()];
            (w, T::one() / (T::lit(12.0) * grid.hx), T::one() / (T::lit(12.0) * grid.hy))
        };
        // J_DC + J_CD = D_x(h) + D_y(v) with h = z xi_y - xi z_y, v = xi z_x - z xi_x
        for ((((((h, v), &z), &x), &zx), &zy), (&xx, &xy)) in self
            .h
            .data_mut()
            .iter_mut()
            .zip(self.v.data_mut())
            .zip(zeta.data())
            .zip(xi.data())
            .zip(self.zx.data())
            .zip(self.zy.data())
            .zip(self.xx.data().iter().zip(self.xy.data()))
        {
            *h = z * xy - x * zy;
            *v = x * zx - z * xx;
        }
        let (zx, zy, xx, xy, h, v) = (&self.zx, &self.zy, &self.xx, &self.xy, &self.h, &self.v);
        for j in 0..grid.rows() as isize {
            let win = |f, dj, k| window(f, j + dj, k, nx);
            let (zxc, zyc, xxc, xyc) = (win(zx, 0, 2), win(zy, 0, 2), win(xx, 0, 2), win(xy, 0, 2));
            let (h0, h1, h3, h4) = (win(h, 0, 0), win(h, 0, 1), win(h, 0, 3), win(h, 0, 4));
            let (v0, v1, v3, v4) = (win(v, -2, 2), win(v, -1, 2), win(v, 1, 2), win(v, 2, 2));
            let dst = &mut out.interior_row_mut(j as usize)[..nx];
            for i in 0..nx {
                let dd = zxc[i] * xyc[i] - zyc[i] * xxc[i];
                let dh = (w[0] * h0[i] + w[1] * h1[i] + w[3] * h3[i] + w[4] * h4[i]) * sx;
                let dv = (w[0] * v0[i] + w[1] * v1[i] + w[3] * v3[i] + w[4] * v4[i]) * sy;
                dst[i] = (dd + dh + dv) * third;
            }
        }
    }

    /// Buffered Jacobian as a fresh field with refreshed ghosts.
    pub fn jacobian(&mut self, zeta: &Field2D<T>, xi: &Field2D<T>, scheme: JacobianScheme) -> Result<Field2D<T>> {
        check_grids(zeta, xi)?;
        let mut out = Field2D::zeros(*zeta.grid());
        self.jacobian_into(zeta, xi, scheme, &mut out);
        out.apply_boundary();
        Ok(out)
    }
}

/// `nx` values of padded row `j` starting at padded column `k`.
fn window<T: Scalar>(f: &Field2D<T>, j: isize, k: usize, nx: usize) -> &[T] {
    &f.row(j)[k..k + nx]
}

/// Grid sums of `J`, `xi J`, `zeta J` over the interior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantReport<T> {
    pub sum_j: T,
    pub sum_xi_j: T,
    pub sum_zeta_j: T,
}

impl<T: Scalar> InvariantReport<T> {
    pub fn max_abs(&self) -> T {
        self.sum_j.abs().max(self.sum_xi_j.abs()).max(self.sum_zeta_j.abs())
    }
}

/// Discrete conservation sums of the Jacobian, meant for doubly periodic
/// grids where the second-order scheme conserves all three.
pub fn jacobian_invariant_report<T: Scalar>(
    zeta: &Field2D<T>,
    xi: &Field2D<T>,
    scheme: JacobianScheme,
) -> Result<InvariantReport<T>> {
    let j = jacobian(zeta, xi, scheme)?;
    let mut report = InvariantReport {
        sum_j: T::zero(),
        sum_xi_j: T::zero(),
        sum_zeta_j: T::zero(),
    };
    for (((_, _, jv), (_, _, xv)), (_, _, zv)) in j.iter_interior().zip(xi.iter_interior()).zip(zeta.iter_interior()) {
        report.sum_j = report.sum_j + jv;
        report.sum_xi_j = report.sum_xi_j + xv * jv;
        report.sum_zeta_j = report.sum_zeta_j + zv * jv;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid2D;

    fn torus() -> Grid2D<f64> {
        Grid2D::torus(24, 20, 3.0, 2.5).unwrap()
    }

    fn smooth(grid: Grid2D<f64>, seed: f64) -> Field2D<f64> {
        use std::f64::consts::PI;
        let (kx, ky) = (PI / grid.lx, PI / grid.ly);
        Field2D::from_fn(grid, move |x, y| {
            (kx * x + seed).sin() * (ky * y).cos()
                + 0.5 * (2.0 * kx * x).cos() * (ky * y + 0.3 * seed).sin()
                + 0.25 * (kx * x + 2.0 * ky * y + seed).cos()
        })
    }

    #[test]
    fn self_jacobian_vanishes() {
        let u = smooth(torus(), 0.4);
        for s in [JacobianScheme::Second, JacobianScheme::Fourth] {
            assert!(jacobian(&u, &u, s).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn constant_argument_gives_zero() {
        let g = torus();
        let k = Field2D::constant(g, 2.0);
        let v = smooth(g, 1.0);
        for s in [JacobianScheme::Second, JacobianScheme::Fourth] {
            assert!(jacobian(&k, &v, s).unwrap().max_abs() < 1e-12);
            assert!(jacobian(&v, &k, s).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn linear_fields_give_unit_jacobian() {
        // x and y are not periodic, so fill every padded point exactly and
        // read only interior points.
        let g = torus();
        let zx = Field2D::from_fn_padded(g, |x, _| x);
        let xy = Field2D::from_fn_padded(g, |_, y| y);
        for s in [JacobianScheme::Second, JacobianScheme::Fourth] {
            let j = jacobian(&zx, &xy, s).unwrap();
            for (_, _, v) in j.iter_interior() {
                assert!((v - 1.0).abs() < 1e-12, "{s:?}: {v}");
            }
        }
    }

    #[test]
    fn antisymmetric() {
        let g = torus();
        let a = smooth(g, 0.2);
        let b = smooth(g, 1.7);
        for s in [JacobianScheme::Second, JacobianScheme::Fourth] {
            let ab = jacobian(&a, &b, s).unwrap();
            let ba = jacobian(&b, &a, s).unwrap();
            assert!(ab.zip_map(&ba, |p, q| p + q).max_abs() < 1e-12);
        }
    }

    #[test]
    fn cross_form_matches_swapped_divergence_form() {
        let g = torus();
        let a = smooth(g, 0.9);
        let b = smooth(g, 2.3);
        for j in 0..g.rows() as isize {
            for i in 0..g.nx as isize {
                let cd = point_cd2(&a, &b, i, j);
                let neg_dc = -point_dc2(&b, &a, i, j);
                assert!((cd - neg_dc).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn buffered_route_matches_reference() {
        for grid in [torus(), Grid2D::new(24, 16, 3.0, 2.0).unwrap()] {
            let a = smooth(grid, 0.5).map(|v| v * 1.5);
            let b = smooth(grid, 2.0);
            let mut ws = JacobianWorkspace::new(grid);
            for s in [JacobianScheme::Second, JacobianScheme::Fourth] {
                let reference = jacobian(&a, &b, s).unwrap();
                let fast = ws.jacobian(&a, &b, s).unwrap();
                let scale = reference.max_abs().max(1.0);
                assert!(reference.max_abs_diff(&fast) < 1e-12 * scale, "{s:?}");
            }
        }
    }

    #[test]
    fn second_order_conserves_on_torus() {
        let g = torus();
        let z = smooth(g, 0.3);
        let x = smooth(g, 1.1);
        let r = jacobian_invariant_report(&z, &x, JacobianScheme::Second).unwrap();
        assert!(r.max_abs() < 1e-10, "{r:?}");
        let same = jacobian_invariant_report(&z, &z, JacobianScheme::Second).unwrap();
        assert!(same.max_abs() < 1e-12);
    }

    #[test]
    fn rejects_grid_mismatch() {
        let a = Field2D::<f64>::zeros(torus());
        let b = Field2D::<f64>::zeros(Grid2D::new(24, 20, 3.0, 2.5).unwrap());
        assert!(matches!(jacobian(&a, &b, JacobianScheme::Fourth), Err(Error::GridMismatch)));
    }

    #[test]
    fn bilinear() {
        let g = torus();
        let (a, b, c) = (smooth(g, 0.1), smooth(g, 0.7), smooth(g, 1.9));
        let s = JacobianScheme::Fourth;
        let lhs = jacobian(&a.zip_map(&b, |p, q| 2.0 * p - q), &c, s).unwrap();
        let ja = jacobian(&a, &c, s).unwrap();
        let jb = jacobian(&b, &c, s).unwrap();
        assert!(lhs.max_abs_diff(&ja.zip_map(&jb, |p, q| 2.0 * p - q)) < 1e-10);
    }
}
