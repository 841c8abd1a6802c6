//! Right-hand side of the evolution equations.
//!
//! With a linear zonal current `u0(y) = f0 + f1 y` the evolved variable is
//! `xi = eta + f0 y + f1 y^2 / 2` and
//!
//! ```text
//! d xi/dT = 2 xi xi_x + P(y) d/dx(lap xi) - 2 Q(y) xi_x - 2 J[lap xi, xi]
//! P(y) = 1 + 2 u0(y)
//! Q(y) = y + u0''(y) + int_0^y u0 = y + f0 y + f1 y^2 / 2
//! ```
//!
//! The ZK limit evolves `phi` under `d phi/dt = -2 phi phi_x - d/dx(lap phi)`.
//! It coincides with the WYF right-hand side for `(f0, f1) = (-1, 0)`
//! without the Jacobian under the map `xi = -phi`.
//!
//! `d/dx(lap xi)` is assembled from the third-derivative stencil plus the
//! mixed `d^3/dx dy^2` stencil.

use crate::arakawa::{JacobianScheme, JacobianWorkspace};
use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D};
use crate::scalar::Scalar;
use crate::stencil;

/// Linear zonal current `u0(y) = f0 + f1 y`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShearFlow<T> {
    pub f0: T,
    pub f1: T,
}

impl<T: Scalar> ShearFlow<T> {
    pub fn new(f0: T, f1: T) -> Self {
        Self { f0, f1 }
    }

    /// `(0, 1)`: the unsheared-coefficient form of the original equation.
    pub fn original() -> Self {
        Self::new(T::zero(), T::one())
    }

    /// `(-1, 0)`: the coefficient pattern of the ZK equation.
    pub fn zk_pattern() -> Self {
        Self::new(-T::one(), T::zero())
    }

    #[inline]
    pub fn u0(&self, y: T) -> T {
        self.f0 + self.f1 * y
    }

    /// `int_0^y u0 = f0 y + f1 y^2 / 2`
    #[inline]
    pub fn ramp(&self, y: T) -> T {
        self.f0 * y + self.f1 * y * y * T::lit(0.5)
    }

    pub fn is_finite(&self) -> bool {
        self.f0.is_finite() && self.f1.is_finite()
    }
}

/// `P(y) = 1 + 2 u0(y)`
pub fn coeff_p<T: Scalar>(shear: &ShearFlow<T>, y: T) -> T {
    T::one() + T::lit(2.0) * shear.u0(y)
}

/// `Q(y) = y + u0''(y) + int_0^y u0`; `u0'' = 0` for the linear current.
pub fn coeff_q<T: Scalar>(shear: &ShearFlow<T>, y: T) -> T {
    y + shear.ramp(y)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    /// WYF equation with background shear; the Jacobian can be switched off.
    Wyf { include_jacobian: bool },
    /// ZK equation for `phi`; shear and Jacobian are ignored.
    ZkLimit,
}

impl Default for ModelKind {
    fn default() -> Self {
        ModelKind::Wyf { include_jacobian: true }
    }
}

/// Everything the right-hand side depends on besides the field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Model<T> {
    pub kind: ModelKind,
    pub shear: ShearFlow<T>,
    pub scheme: JacobianScheme,
}

impl<T: Scalar> Model<T> {
    pub fn wyf(shear: ShearFlow<T>) -> Self {
        Self {
            kind: ModelKind::default(),
            shear,
            scheme: JacobianScheme::Fourth,
        }
    }

    pub fn zk() -> Self {
        Self {
            kind: ModelKind::ZkLimit,
            shear: ShearFlow::zk_pattern(),
            scheme: JacobianScheme::Fourth,
        }
    }
}

/// Reusable evaluator of the right-hand side with per-row coefficient
/// vectors and scratch buffers.
#[derive(Clone, Debug)]
pub struct Rhs<T> {
    grid: Grid2D<T>,
    model: Model<T>,
    p_rows: Vec<T>,
    q_rows: Vec<T>,
    zeta: Field2D<T>,
    xi_x: Field2D<T>,
    yy: Field2D<T>,
    jac: Field2D<T>,
    jws: JacobianWorkspace<T>,
}

impl<T: Scalar> Rhs<T> {
    pub fn new(grid: Grid2D<T>, model: Model<T>) -> Self {
        let rows = grid.rows();
        let (p_rows, q_rows) = match model.kind {
            ModelKind::Wyf { .. } => (
                (0..rows).map(|j| coeff_p(&model.shear, grid.y(j as isize))).collect(),
                (0..rows).map(|j| coeff_q(&model.shear, grid.y(j as isize))).collect(),
            ),
            ModelKind::ZkLimit => (vec![T::zero(); rows], vec![T::zero(); rows]),
        };
        let z = Field2D::zeros(grid);
        Self {
            grid,
            model,
            p_rows,
            q_rows,
            zeta: z.clone(),
            xi_x: z.clone(),
            yy: z.clone(),
            jac: z,
            jws: JacobianWorkspace::new(grid),
        }
    }

    pub fn model(&self) -> &Model<T> {
        &self.model
    }

    pub fn grid(&self) -> &Grid2D<T> {
        &self.grid
    }

    /// Writes `d field / dT` into the interior of `out`. The input ghosts
    /// must be current; the ghosts of `out` are left untouched.
    pub fn eval_into(&mut self, field: &Field2D<T>, out: &mut Field2D<T>) {
        debug_assert!(field.grid().same_as(&self.grid));
        let grid = self.grid;
        let nx = grid.nx;
        let two = T::lit(2.0);

        let jacobian = matches!(self.model.kind, ModelKind::Wyf { include_jacobian: true });
        if jacobian {
            stencil::laplacian_into(field, &mut self.zeta);
            self.zeta.apply_boundary();
            self.jws
                .jacobian_into(&self.zeta, field, self.model.scheme, &mut self.jac);
        }
        // the 5-point Jacobian already computed the x derivative of the field
        let reuse_xi_x = jacobian && self.model.scheme == JacobianScheme::Fourth;
        if !reuse_xi_x {
            stencil::dx_into(field, &mut self.xi_x);
        }
        stencil::dyy_into(field, &mut self.yy);
        self.yy.apply_boundary();
        let xi_x = if reuse_xi_x { self.jws.xi_x() } else { &self.xi_x };

        let w3 = T::one() / (two * grid.hx * grid.hx * grid.hx);
        let w1 = T::one() / (T::lit(12.0) * grid.hx);
        let eight = T::lit(8.0);

        for j in 0..grid.rows() {
            let u = field.row(j as isize);
            let yy = self.yy.row(j as isize);
            let ux = xi_x.interior_row(j);
            let dst = &mut out.interior_row_mut(j)[..nx];
            let (u_m2, u_m1, u_c, u_p1, u_p2) = (&u[0..nx], &u[1..nx + 1], &u[2..nx + 2], &u[3..nx + 3], &u[4..nx + 4]);
            let (y_m2, y_m1, y_p1, y_p2) = (&yy[0..nx], &yy[1..nx + 1], &yy[3..nx + 3], &yy[4..nx + 4]);
            match self.model.kind {
                ModelKind::ZkLimit => {
                    for i in 0..nx {
                        let third = (u_p2[i] - two * u_p1[i] + two * u_m1[i] - u_m2[i]) * w3;
                        let mixed = (-y_p2[i] + eight * y_p1[i] - eight * y_m1[i] + y_m2[i]) * w1;
                        dst[i] = -two * u_c[i] * ux[i] - (third + mixed);
                    }
                }
                ModelKind::Wyf { .. } => {
                    let p = self.p_rows[j];
                    let q2 = two * self.q_rows[j];
                    for i in 0..nx {
                        let third = (u_p2[i] - two * u_p1[i] + two * u_m1[i] - u_m2[i]) * w3;
                        let mixed = (-y_p2[i] + eight * y_p1[i] - eight * y_m1[i] + y_m2[i]) * w1;
                        dst[i] = (two * u_c[i] - q2) * ux[i] + p * (third + mixed);
                    }
                    if jacobian {
                        let jr = self.jac.interior_row(j);
                        for i in 0..nx {
                            dst[i] = dst[i] - two * jr[i];
                        }
                    }
                }
            }
        }
    }

    /// Right-hand side as a fresh field with refreshed ghosts.
    pub fn eval(&mut self, field: &Field2D<T>) -> Field2D<T> {
        let mut out = Field2D::zeros(self.grid);
        self.eval_into(field, &mut out);
        out.apply_boundary();
        out
    }
}

/// One-shot right-hand side evaluation.
pub fn rhs<T: Scalar>(field: &Field2D<T>, model: &Model<T>) -> Field2D<T> {
    Rhs::new(*field.grid(), *model).eval(field)
}

/// Reference right-hand side assembled from the standalone operators
/// (`d/dx(lap)` as `dxxx + mixed_x_yy`, Jacobian from the explicit
/// stencils). Slow; used to cross-check [`Rhs`].
pub fn rhs_reference<T: Scalar>(field: &Field2D<T>, model: &Model<T>) -> Result<Field2D<T>> {
    let grid = *field.grid();
    let fx = stencil::dx(field);
    let dlap = stencil::dxxx(field).zip_map(&stencil::mixed_x_yy(field), |a, b| a + b);
    let two = T::lit(2.0);
    let mut out = Field2D::zeros(grid);
    match model.kind {
        ModelKind::ZkLimit => {
            for (i, j, u) in field.iter_interior() {
                let (i, j) = (i as isize, j as isize);
                out.set(i, j, -two * u * fx.get(i, j) - dlap.get(i, j));
            }
        }
        ModelKind::Wyf { include_jacobian } => {
            let jac = if include_jacobian {
                let zeta = stencil::laplacian(field);
                Some(crate::arakawa::jacobian(&zeta, field, model.scheme)?)
            } else {
                None
            };
            for (i, j, u) in field.iter_interior() {
                let y = grid.y(j as isize);
                let (i, j) = (i as isize, j as isize);
                let mut v = two * u * fx.get(i, j) + coeff_p(&model.shear, y) * dlap.get(i, j)
                    - two * coeff_q(&model.shear, y) * fx.get(i, j);
                if let Some(jac) = &jac {
                    v = v - two * jac.get(i, j);
                }
                out.set(i, j, v);
            }
        }
    }
    out.apply_boundary();
    Ok(out)
}

/// RK4 reaches this far along the imaginary axis.
pub const RK4_IMAGINARY_LIMIT: f64 = 2.0 * std::f64::consts::SQRT_2;

/// Largest modulus of the linear part of the discrete operator,
/// `P(y) d/dx(lap) - 2 Q(y) d/dx`, over all resolvable wavenumbers and rows.
/// The nonlinear terms are not included.
pub fn linear_spectral_radius<T: Scalar>(grid: &Grid2D<T>, model: &Model<T>) -> f64 {
    let (hx, hy) = (grid.hx.as_f64(), grid.hy.as_f64());
    // dyy symbol runs from 0 down to -64/(12 hy²)
    let yy_extremes = [0.0, -64.0 / (12.0 * hy * hy)];
    let samples = 2048;
    let mut worst = 0.0f64;
    for j in 0..grid.rows() {
        let y = grid.y(j as isize);
        let (p, q) = match model.kind {
            ModelKind::ZkLimit => (-1.0, 0.0),
            ModelKind::Wyf { .. } => (coeff_p(&model.shear, y).as_f64(), coeff_q(&model.shear, y).as_f64()),
        };
        for k in 0..=samples {
            let th = std::f64::consts::PI * k as f64 / samples as f64;
            let third = ((2.0 * th).sin() - 2.0 * th.sin()) / (hx * hx * hx);
            let first = (8.0 * th.sin() - (2.0 * th).sin()) / (6.0 * hx);
            for yy in yy_extremes {
                let lam = p * (third + first * yy) - 2.0 * q * first;
                worst = worst.max(lam.abs());
            }
        }
    }
    worst
}

/// Smallest integer `k` such that `dt / k` keeps the linear spectrum inside
/// `safety` times the RK4 stability limit.
pub fn rk4_substeps<T: Scalar>(grid: &Grid2D<T>, model: &Model<T>, dt: f64, safety: f64) -> u64 {
    let rho = linear_spectral_radius(grid, model);
    ((rho * dt) / (safety * RK4_IMAGINARY_LIMIT)).ceil().max(1.0) as u64
}

/// Amplitude and length scales of the unnormalized equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaleParams<T> {
    pub e: T,
    pub s: T,
}

/// Removes `E` and `S`: the amplitude is multiplied by `S^(-2/3) E / 2` and
/// lengths by `S^(-1/3)`. Returns the rescaled field on the rescaled grid.
pub fn normalize<T: Scalar>(eta_raw: &Field2D<T>, params: ScaleParams<T>) -> Result<Field2D<T>> {
    if !(params.e > T::zero()) || !params.e.is_finite() {
        return Err(Error::param("E", format!("must be positive, got {}", params.e)));
    }
    if !(params.s > T::zero()) || !params.s.is_finite() {
        return Err(Error::param("S", format!("must be positive, got {}", params.s)));
    }
    let amp = T::lit(0.5) * params.s.powf(T::lit(-2.0 / 3.0)) * params.e;
    let len = params.s.powf(T::lit(-1.0 / 3.0));
    let g = *eta_raw.grid();
    let grid = Grid2D::with_boundary(g.nx, g.ny, g.lx * len, g.ly * len, g.y_boundary)?;
    let values: Vec<T> = eta_raw.interior().into_iter().map(|v| v * amp).collect();
    Field2D::from_interior(grid, &values)
}
