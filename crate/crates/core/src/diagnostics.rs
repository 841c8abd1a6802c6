//! Scalar monitors of a field: peak tracking, the ZK integrals of motion and
//! the WYF non-conservation terms, velocity, stream-function reconstruction
//! and the conversion of slow time to physical time.
//!
//! Integrals use the midpoint rule in x and the trapezoid rule in y (half
//! weight on the wall rows).

use crate::entropy::{ce_of_state, CESpec};
use crate::error::{Error, Result};
use crate::grid::Field2D;
use crate::scalar::Scalar;
use crate::stencil;
use crate::timestep::SimulationState;
use crate::wyf::ShearFlow;

/// Global maximum of a field at grid resolution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    pub value: f64,
    pub x: f64,
    pub y: f64,
    pub i: usize,
    pub j: usize,
    /// Maximum along the row nearest `y = 1`.
    pub value_at_y1: f64,
}

/// Interior maximum; ties go to the first point in scan order (smallest
/// `j`, then smallest `i`).
pub fn peak<T: Scalar>(xi: &Field2D<T>) -> Peak {
    let grid = xi.grid();
    let (mut best, mut bi, mut bj) = (f64::NEG_INFINITY, 0, 0);
    for j in 0..grid.rows() {
        for (i, &v) in xi.interior_row(j).iter().enumerate() {
            let v = v.as_f64();
            if v > best {
                (best, bi, bj) = (v, i, j);
            }
        }
    }
    let row = grid.nearest_row(T::one());
    let at_y1 = xi
        .interior_row(row)
        .iter()
        .fold(f64::NEG_INFINITY, |m, v| m.max(v.as_f64()));
    Peak {
        value: best,
        x: grid.x(bi as isize).as_f64(),
        y: grid.y(bj as isize).as_f64(),
        i: bi,
        j: bj,
        value_at_y1: at_y1,
    }
}

/// `∫∫ f dx dy` of a per-sample integrand.
fn integrate<T: Scalar>(xi: &Field2D<T>, mut f: impl FnMut(usize, usize, f64) -> f64) -> f64 {
    let grid = xi.grid();
    let hx = grid.hx.as_f64();
    let mut total = 0.0;
    for j in 0..grid.rows() {
        let row: f64 = xi
            .interior_row(j)
            .iter()
            .enumerate()
            .map(|(i, v)| f(i, j, v.as_f64()))
            .sum();
        total += grid.row_weight(j).as_f64() * hx * row;
    }
    total
}

/// `M̃ = ∫∫ ξ`.
pub fn mass<T: Scalar>(xi: &Field2D<T>) -> f64 {
    integrate(xi, |_, _, v| v)
}

/// `P̃ = ∫∫ ξ²/2`.
pub fn p_tilde<T: Scalar>(xi: &Field2D<T>) -> f64 {
    integrate(xi, |_, _, v| 0.5 * v * v)
}

/// `H = ∫∫ (|∇ξ|²/2 − ξ³/6)`.
pub fn energy_zk<T: Scalar>(xi: &Field2D<T>) -> f64 {
    let (gx, gy) = (stencil::dx(xi), stencil::dy(xi));
    integrate(xi, |i, j, v| {
        let (a, b) = (gx.interior_row(j)[i].as_f64(), gy.interior_row(j)[i].as_f64());
        0.5 * (a * a + b * b) - v * v * v / 6.0
    })
}

/// `I = ∫∫ r ξ − T e_x P̃`.
pub fn momentum_i<T: Scalar>(xi: &Field2D<T>, time: f64) -> [f64; 2] {
    let grid = *xi.grid();
    let ix = integrate(xi, |i, _, v| grid.x(i as isize).as_f64() * v);
    let iy = integrate(xi, |_, j, v| grid.y(j as isize).as_f64() * v);
    [ix - time * p_tilde(xi), iy]
}

/// `∫ dx g(i)` along one row.
fn wall_line<T: Scalar>(xi: &Field2D<T>, g: impl Fn(usize) -> f64) -> f64 {
    let hx = xi.grid().hx.as_f64();
    hx * (0..xi.grid().nx).map(g).sum::<f64>()
}

fn top_minus_bottom<T: Scalar>(xi: &Field2D<T>, g: impl Fn(usize, usize) -> f64) -> f64 {
    let top = xi.grid().rows() - 1;
    wall_line(xi, |i| g(i, top)) - wall_line(xi, |i| g(i, 0))
}

/// Predicted `dM̃/dT`: `2 ∫ dx [∇²ξ ∂xξ]` between the walls, i.e.
/// `2 ∫ dx [(∂x²η + ∂y²η + f1) ∂xη]` with `η` the stream function.
pub fn boundary_flux_m<T: Scalar>(xi: &Field2D<T>) -> f64 {
    let (lap, gx) = (stencil::laplacian(xi), stencil::dx(xi));
    2.0 * top_minus_bottom(xi, |i, j| lap.interior_row(j)[i].as_f64() * gx.interior_row(j)[i].as_f64())
}

/// Volume contribution to `dP̃/dT`: `f1 ∫∫ (ξx ξy − ξ ξxy)`.
pub fn p_tilde_drift_term<T: Scalar>(xi: &Field2D<T>, shear: &ShearFlow<T>) -> f64 {
    let f1 = shear.f1.as_f64();
    if f1 == 0.0 {
        return 0.0;
    }
    let (gx, gy) = (stencil::dx(xi), stencil::dy(xi));
    let gxy = stencil::dx(&gy);
    f1 * integrate(xi, |i, j, v| {
        let (a, b, c) = (
            gx.interior_row(j)[i].as_f64(),
            gy.interior_row(j)[i].as_f64(),
            gxy.interior_row(j)[i].as_f64(),
        );
        a * b - v * c
    })
}

/// Wall contribution to `dP̃/dT` under free slip: `2 ∫ dx [ξ ∇²ξ ∂xξ]`
/// between the walls. The other wall terms carry `∂yξ` and vanish.
pub fn p_tilde_surface_term<T: Scalar>(xi: &Field2D<T>) -> f64 {
    let (lap, gx) = (stencil::laplacian(xi), stencil::dx(xi));
    2.0 * top_minus_bottom(xi, |i, j| {
        let v = xi.interior_row(j)[i].as_f64();
        v * lap.interior_row(j)[i].as_f64() * gx.interior_row(j)[i].as_f64()
    })
}

/// `vx = −∂yξ + u0(y) − u0(0)`, `vy = ∂xξ`.
pub fn velocity<T: Scalar>(xi: &Field2D<T>, shear: &ShearFlow<T>) -> (Field2D<T>, Field2D<T>) {
    let grid = *xi.grid();
    let mut vx = stencil::dy(xi);
    for j in 0..grid.rows() {
        let y = grid.y(j as isize);
        let offset = shear.u0(y) - shear.u0(T::zero());
        for v in vx.interior_row_mut(j) {
            *v = offset - *v;
        }
    }
    vx.apply_boundary();
    (vx, stencil::dx(xi))
}

/// `η = ξ − (f0 y + f1 y²/2)` on every sample, ghosts included.
pub fn reconstruct_eta<T: Scalar>(xi: &Field2D<T>, shear: &ShearFlow<T>) -> Field2D<T> {
    shift_by_ramp(xi, shear, -T::one())
}

/// Inverse of [`reconstruct_eta`].
pub fn add_ramp<T: Scalar>(eta: &Field2D<T>, shear: &ShearFlow<T>) -> Field2D<T> {
    shift_by_ramp(eta, shear, T::one())
}

fn shift_by_ramp<T: Scalar>(field: &Field2D<T>, shear: &ShearFlow<T>, sign: T) -> Field2D<T> {
    let grid = *field.grid();
    let mut out = field.clone();
    let stride = grid.stride();
    let g = crate::grid::GHOST as isize;
    for (r, row) in out.data_mut().chunks_mut(stride).enumerate() {
        let ramp = shear.ramp(grid.y(r as isize - g));
        for v in row {
            *v = *v + sign * ramp;
        }
    }
    out
}

/// Planetary parameters for converting slow time to physical time (SI).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanetParams {
    /// Rotation rate Ω [1/s].
    pub omega: f64,
    /// Planet radius R [m].
    pub radius: f64,
    /// Latitude φ [rad], in (0, π/2).
    pub latitude: f64,
    /// Vortex length scale L [m].
    pub length_scale_l: f64,
    /// Gravity g [m/s²].
    pub gravity_g: f64,
    /// Layer depth H [m].
    pub depth_h: f64,
}

impl PlanetParams {
    /// Jupiter at the Great Red Spot latitude (22.5°) with a 200 km
    /// equivalent depth. The depth is not printed in the source; it is the
    /// reconstruction that gives a conversion factor near 0.27 days.
    pub fn jupiter() -> Self {
        Self {
            omega: 1.7585e-4,
            radius: 6.9911e7,
            latitude: 22.5f64.to_radians(),
            length_scale_l: 1.0e7,
            gravity_g: 24.79,
            depth_h: 2.0e5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("omega", self.omega),
            ("radius", self.radius),
            ("length_scale_l", self.length_scale_l),
            ("gravity_g", self.gravity_g),
            ("depth_h", self.depth_h),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        if !(self.latitude > 0.0 && self.latitude < std::f64::consts::FRAC_PI_2) {
            return Err(Error::param("latitude", format!("must lie in (0, π/2), got {}", self.latitude)));
        }
        Ok(())
    }

    /// Coriolis parameter `f = 2Ω sin φ`.
    pub fn coriolis(&self) -> f64 {
        2.0 * self.omega * self.latitude.sin()
    }

    /// `β = (2Ω/R) cos φ`.
    pub fn beta(&self) -> f64 {
        2.0 * self.omega / self.radius * self.latitude.cos()
    }

    /// Rossby deformation radius `√(gH)/f`.
    pub fn deformation_radius(&self) -> f64 {
        (self.gravity_g * self.depth_h).sqrt() / self.coriolis()
    }

    /// `1 / (f ŝ β̂²)` in seconds per unit of `T`.
    pub fn time_factor(&self) -> f64 {
        let f = self.coriolis();
        let l = self.length_scale_l;
        let beta_hat = self.beta() * l / f;
        let s_hat = self.deformation_radius().powi(2) / (l * l);
        1.0 / (f * s_hat * beta_hat * beta_hat)
    }
}

/// Physical time in seconds for slow time `t`.
pub fn physical_time(t: f64, params: &PlanetParams) -> Result<f64> {
    params.validate()?;
    Ok(t * params.time_factor())
}

pub const SECONDS_PER_DAY: f64 = 86_400.0;

/// One row of the series output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub step: u64,
    pub time: f64,
    pub peak_value: f64,
    pub peak_x: f64,
    pub peak_y: f64,
    pub peak_value_at_y1: f64,
    pub mass: f64,
    pub p_tilde: f64,
    pub energy_zk: f64,
    pub momentum_i: [f64; 2],
    pub boundary_flux_m: f64,
    pub p_tilde_drift_term: f64,
    /// NaN when the selected slice has a degenerate spectrum.
    pub ce_periodic: f64,
}

impl DiagnosticsRecord {
    pub const COLUMNS: [&'static str; 14] = [
        "step",
        "time",
        "peak_value",
        "peak_x",
        "peak_y",
        "peak_value_at_y1",
        "mass",
        "p_tilde",
        "energy_zk",
        "momentum_ix",
        "momentum_iy",
        "boundary_flux_m",
        "p_tilde_drift_term",
        "ce_periodic",
    ];

    pub fn measure<T: Scalar>(state: &SimulationState<T>, shear: &ShearFlow<T>, ce: &CESpec) -> Self {
        let xi = &state.xi;
        let time = state.time.as_f64();
        let p = peak(xi);
        Self {
            step: state.step,
            time,
            peak_value: p.value,
            peak_x: p.x,
            peak_y: p.y,
            peak_value_at_y1: p.value_at_y1,
            mass: mass(xi),
            p_tilde: p_tilde(xi),
            energy_zk: energy_zk(xi),
            momentum_i: momentum_i(xi, time),
            boundary_flux_m: boundary_flux_m(xi),
            p_tilde_drift_term: p_tilde_drift_term(xi, shear),
            ce_periodic: ce_of_state(xi, ce).unwrap_or(f64::NAN),
        }
    }

    /// Values after `step`, in column order.
    pub fn values(&self) -> [f64; 13] {
        [
            self.time,
            self.peak_value,
            self.peak_x,
            self.peak_y,
            self.peak_value_at_y1,
            self.mass,
            self.p_tilde,
            self.energy_zk,
            self.momentum_i[0],
            self.momentum_i[1],
            self.boundary_flux_m,
            self.p_tilde_drift_term,
            self.ce_periodic,
        ]
    }

    pub fn from_values(step: u64, v: [f64; 13]) -> Self {
        Self {
            step,
            time: v[0],
            peak_value: v[1],
            peak_x: v[2],
            peak_y: v[3],
            peak_value_at_y1: v[4],
            mass: v[5],
            p_tilde: v[6],
            energy_zk: v[7],
            momentum_i: [v[8], v[9]],
            boundary_flux_m: v[10],
            p_tilde_drift_term: v[11],
            ce_periodic: v[12],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_gaussian, Grid2D};

    fn paper() -> Grid2D<f64> {
        Grid2D::paper()
    }

    #[test]
    fn gaussian_peak() {
        let f = sample_gaussian(paper(), 3.0, 0.0, 1.0);
        let p = peak(&f);
        assert_eq!(p.value, 3.0);
        assert!(p.x.abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12);
        assert_eq!(p.value_at_y1, 3.0);
        let scaled = peak(&f.map(|v| 2.5 * v));
        assert_eq!((scaled.i, scaled.j), (p.i, p.j));
    }

    #[test]
    fn peak_ties_take_scan_order() {
        let p = peak(&Field2D::constant(paper(), 0.7));
        assert_eq!((p.i, p.j), (0, 0));
        assert_eq!(p.value, 0.7);
    }

    #[test]
    fn two_bumps() {
        let g = paper();
        let f = sample_gaussian(g, 1.5, -5.0, 1.0).zip_map(&sample_gaussian(g, 1.0, 5.0, 1.0), |a, b| a + b);
        let p = peak(&f);
        assert!((p.value - 1.5).abs() < 1e-12);
        assert!((p.x + 5.0).abs() < 1e-12);
    }

    #[test]
    fn quadrature_constants() {
        let g = paper();
        let one = Field2D::constant(g, 1.0);
        assert!((mass(&one) - 800.0).abs() < 1e-9);
        assert!((energy_zk(&one) + 800.0 / 6.0).abs() < 1e-9);
        let zero = Field2D::zeros(g);
        assert_eq!(mass(&zero), 0.0);
        assert_eq!(p_tilde(&zero), 0.0);
        assert_eq!(energy_zk(&zero), 0.0);
        assert_eq!(momentum_i(&zero, 3.0), [0.0, 0.0]);
        assert_eq!(boundary_flux_m(&zero), 0.0);
    }

    #[test]
    fn drift_term_cases() {
        let g = paper();
        let f = sample_gaussian(g, 2.0, 0.0, 1.0);
        assert_eq!(p_tilde_drift_term(&f, &ShearFlow::new(0.0, 0.0)), 0.0);
        let sep = Field2D::from_fn(g, |x, y| (std::f64::consts::PI * x / 20.0).sin() * (-(y - 1.0) * (y - 1.0)).exp());
        let d = p_tilde_drift_term(&sep, &ShearFlow::new(0.0, 1.2));
        assert!(d.abs() < 1e-10, "{d}");
    }

    #[test]
    fn velocity_examples() {
        let g = paper();
        let zero = Field2D::zeros(g);
        let (vx, vy) = velocity(&zero, &ShearFlow::new(0.0, 1.0));
        for (i, j, v) in vx.iter_interior() {
            assert!((v - g.y(j as isize)).abs() < 1e-12);
            assert_eq!(vy.get(i as isize, j as isize), 0.0);
        }
        let (vx, _) = velocity(&zero, &ShearFlow::new(1.0, 0.0));
        assert!(vx.max_abs() == 0.0);

        let f = sample_gaussian(g, 2.0, 0.0, 1.0);
        let (_, vy) = velocity(&f, &ShearFlow::new(0.0, 1.2));
        let (ic, jc) = (100isize, 55isize);
        for k in 1..10 {
            assert!((vy.get(ic + k, jc) + vy.get(ic - k, jc)).abs() < 1e-12);
        }
    }

    #[test]
    fn eta_round_trip() {
        let g = paper();
        let shear = ShearFlow::new(0.3, 1.2);
        let ramp = Field2D::from_fn_padded(g, |_, y| shear.ramp(y));
        assert_eq!(reconstruct_eta(&ramp, &shear).max_abs(), 0.0);
        let f = sample_gaussian(g, 2.0, 0.0, 1.0);
        assert!(add_ramp(&reconstruct_eta(&f, &shear), &shear).max_abs_diff(&f) < 1e-12);
        assert_eq!(reconstruct_eta(&f, &ShearFlow::new(0.0, 0.0)), f);
    }

    #[test]
    fn jupiter_time_factor() {
        let p = PlanetParams::jupiter();
        let days = physical_time(1.0, &p).unwrap() / SECONDS_PER_DAY;
        assert!((0.2..=0.35).contains(&days), "{days}");
        // closed form f³ / (g H β²), independent of L
        let f = p.coriolis();
        let closed = f.powi(3) / (p.gravity_g * p.depth_h * p.beta().powi(2));
        assert!((p.time_factor() - closed).abs() < 1e-10 * closed);
        let wide = PlanetParams {
            length_scale_l: 2.0 * p.length_scale_l,
            ..p
        };
        assert!((wide.time_factor() - p.time_factor()).abs() < 1e-10 * closed);
        assert!(physical_time(1.0, &PlanetParams { latitude: 2.0, ..p }).is_err());
    }

    #[test]
    fn unit_factor_params() {
        // f = 1, β̂ = 1, ŝ = 1
        let p = PlanetParams {
            omega: 1.0,
            radius: 2.0 * (std::f64::consts::PI / 6.0).cos(),
            latitude: std::f64::consts::PI / 6.0,
            length_scale_l: 1.0,
            gravity_g: 1.0,
            depth_h: 1.0,
        };
        assert!((physical_time(7.0, &p).unwrap() - 7.0).abs() < 1e-12);
    }
}
