//! Zakharov-Kuznetsov solitary waves: the plane sech² wave, the radial
//! ground state `Φ'' + Φ'/r = cΦ − Φ²`, and deposition of radial profiles
//! onto a grid.

use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D};
use crate::scalar::Scalar;

pub const DEFAULT_DR: f64 = 1.0e-3;
pub const DEFAULT_TOL: f64 = 1.0e-12;
/// Profile is handed to the asymptotic tail once it falls below this
/// fraction of the central amplitude.
pub const TAIL_FRACTION: f64 = 1.0e-4;

/// Default truncation radius for speed `c`.
pub fn default_r_max(c: f64) -> f64 {
    30.0 / c.sqrt()
}

/// `√(π/2z)·e^{−z}` times the first terms of the large-argument series of K0.
pub fn bessel_k0_asymptotic(z: f64) -> f64 {
    let inv = 1.0 / z;
    let series = 1.0 - inv / 8.0 + 9.0 * inv * inv / 128.0 - 225.0 * inv.powi(3) / 3072.0
        + 11025.0 * inv.powi(4) / 98304.0;
    (std::f64::consts::PI / (2.0 * z)).sqrt() * (-z).exp() * series
}

/// Tabulated radial ground state `Φ_c(r)` with an analytic decay tail.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    pub c: f64,
    pub r_max: f64,
    pub dr: f64,
    /// `Φ(k·dr)` for `k = 0..=round(r_max/dr)`.
    pub values: Vec<f64>,
    /// First table index taken from the tail formula.
    pub tail_index: usize,
    slopes: Vec<f64>,
}

impl RadialProfile {
    pub fn amplitude(&self) -> f64 {
        self.values[0]
    }

    pub fn radius(&self, k: usize) -> f64 {
        k as f64 * self.dr
    }

    /// Radius where the grafted tail starts.
    pub fn tail_radius(&self) -> f64 {
        self.radius(self.tail_index)
    }

    /// `Φ(r)` by monotone cubic interpolation inside the table and the tail
    /// formula beyond it.
    pub fn eval(&self, r: f64) -> f64 {
        let r = r.abs();
        let n = self.values.len() - 1;
        if r >= self.radius(n) {
            return self.tail(r);
        }
        let s = r / self.dr;
        let k = (s.floor() as usize).min(n - 1);
        let t = s - k as f64;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * self.dr, self.slopes[k + 1] * self.dr);
        let t2 = t * t;
        let t3 = t2 * t;
        (2.0 * t3 - 3.0 * t2 + 1.0) * y0 + (t3 - 2.0 * t2 + t) * m0 + (-2.0 * t3 + 3.0 * t2) * y1 + (t3 - t2) * m1
    }

    fn tail(&self, r: f64) -> f64 {
        let rm = self.tail_radius();
        let sc = self.c.sqrt();
        self.values[self.tail_index] * bessel_k0_asymptotic(sc * r) / bessel_k0_asymptotic(sc * rm)
    }

    /// Residual of the radial ODE at table point `k` from five-point
    /// differences, reflecting evenly through the axis. Needs `k + 2` in the
    /// table.
    pub fn ode_residual(&self, k: usize) -> f64 {
        let v = |m: isize| self.values[m.unsigned_abs()];
        let h = self.dr;
        let k = k as isize;
        let (m2, m1, p1, p2) = (v(k - 2), v(k - 1), v(k + 1), v(k + 2));
        let phi = v(k);
        let d2 = (-p2 + 16.0 * p1 - 30.0 * phi + 16.0 * m1 - m2) / (12.0 * h * h);
        // Φ'/r → Φ''(0) on the axis
        let d1_over_r = if k == 0 {
            d2
        } else {
            (-p2 + 8.0 * p1 - 8.0 * m1 + m2) / (12.0 * h) / (k as f64 * h)
        };
        d2 + d1_over_r - (self.c * phi - phi * phi)
    }

    /// Rebuilds a profile from table values sampled at `k·dr`, e.g. read
    /// back from a profile CSV. The tail is matched where the table first
    /// drops below the tail fraction of the amplitude.
    pub fn from_table(c: f64, dr: f64, values: Vec<f64>) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::param("c", format!("must be positive, got {c}")));
        }
        if !(dr > 0.0) || !dr.is_finite() {
            return Err(Error::param("dr", format!("must be positive, got {dr}")));
        }
        if values.len() < 4 || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("values", "need at least 4 finite samples"));
        }
        if let Some(k) = (1..values.len()).find(|&k| values[k] >= values[k - 1]) {
            return Err(Error::NotMonotone { r: k as f64 * dr });
        }
        let threshold = TAIL_FRACTION * values[0];
        let tail_index = values.iter().position(|&v| v < threshold).unwrap_or(values.len() - 1);
        let r_max = (values.len() - 1) as f64 * dr;
        Ok(RadialProfile {
            c,
            r_max,
            dr,
            values,
            tail_index,
            slopes: Vec::new(),
        }
        .with_slopes())
    }

    fn with_slopes(mut self) -> Self {
        self.slopes = pchip_slopes(&self.values, self.dr);
        self
    }
}

/// Fritsch-Carlson slopes for uniformly spaced data.
fn pchip_slopes(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    let delta: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a * b > 0.0 {
            m[k] = 2.0 / (1.0 / a + 1.0 / b);
        }
    }
    // zero slope on the axis by symmetry; one-sided at the outer end
    m[0] = 0.0;
    m[n - 1] = delta[n - 2];
    m
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Shot {
    /// Turned back before reaching zero: amplitude too small.
    Under,
    /// Crossed zero: amplitude too large.
    Over,
}

#[derive(Clone, Copy)]
struct OdeState {
    phi: f64,
    dphi: f64,
}

fn ode(c: f64, r: f64, s: OdeState) -> OdeState {
    OdeState {
        phi: s.dphi,
        dphi: c * s.phi - s.phi * s.phi - s.dphi / r,
    }
}

fn rk4(c: f64, r: f64, h: f64, s: OdeState) -> OdeState {
    let add = |s: OdeState, k: OdeState, a: f64| OdeState {
        phi: s.phi + a * k.phi,
        dphi: s.dphi + a * k.dphi,
    };
    let k1 = ode(c, r, s);
    let k2 = ode(c, r + h / 2.0, add(s, k1, h / 2.0));
    let k3 = ode(c, r + h / 2.0, add(s, k2, h / 2.0));
    let k4 = ode(c, r + h, add(s, k3, h));
    OdeState {
        phi: s.phi + h / 6.0 * (k1.phi + 2.0 * (k2.phi + k3.phi) + k4.phi),
        dphi: s.dphi + h / 6.0 * (k1.dphi + 2.0 * (k2.dphi + k3.dphi) + k4.dphi),
    }
}

/// Integrates from the axis with amplitude `phi0`. Returns the
/// classification and, when `table` is given, fills it up to the event.
fn shoot(c: f64, phi0: f64, dr: f64, steps: usize, mut table: Option<&mut Vec<f64>>) -> Shot {
    // Φ0 + a r² + b r⁴ with a = (cΦ0 − Φ0²)/4, b = (c − 2Φ0) a / 16
    let a = (c * phi0 - phi0 * phi0) / 4.0;
    let b = (c - 2.0 * phi0) * a / 16.0;
    let r2 = dr * dr;
    let mut s = OdeState {
        phi: phi0 + a * r2 + b * r2 * r2,
        dphi: 2.0 * a * dr + 4.0 * b * r2 * dr,
    };
    if let Some(t) = table.as_deref_mut() {
        t.clear();
        t.push(phi0);
        t.push(s.phi);
    }
    for k in 1..steps {
        s = rk4(c, k as f64 * dr, dr, s);
        if s.phi < 0.0 {
            return Shot::Over;
        }
        if s.dphi > 0.0 || !s.phi.is_finite() || s.phi > 10.0 * phi0 {
            return Shot::Under;
        }
        if let Some(t) = table.as_deref_mut() {
            t.push(s.phi);
        }
    }
    Shot::Under
}

/// Finds the nodeless radial solitary wave of speed `c` by bisection
/// shooting on the central amplitude, searched in `[c, 10c]`.
pub fn solve_radial(c: f64, r_max: f64, dr: f64, tol: f64) -> Result<RadialProfile> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::param("c", format!("must be positive, got {c}")));
    }
    if !(dr > 0.0) || !(r_max > 10.0 * dr) {
        return Err(Error::param("dr", format!("need 0 < dr and r_max > 10 dr, got dr={dr}, r_max={r_max}")));
    }
    if !(tol > 0.0) {
        return Err(Error::param("tol", format!("must be positive, got {tol}")));
    }
    let steps = (r_max / dr).round() as usize;
    let (mut lo, mut hi) = (c, 10.0 * c);
    if shoot(c, lo, dr, steps, None) != Shot::Under || shoot(c, hi, dr, steps, None) != Shot::Over {
        return Err(Error::BracketNotFound { c, lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match shoot(c, mid, dr, steps, None) {
            Shot::Under => lo = mid,
            Shot::Over => hi = mid,
        }
    }

    let mut table = Vec::with_capacity(steps + 1);
    shoot(c, lo, dr, steps, Some(&mut table));
    let threshold = TAIL_FRACTION * lo;
    let tail_index = table
        .iter()
        .position(|&v| v < threshold)
        .ok_or(Error::NotMonotone { r: table.len() as f64 * dr })?;
    // the undershooting trajectory is only trusted up to the tail radius
    table.truncate(tail_index + 1);
    let mut profile = RadialProfile {
        c,
        r_max,
        dr,
        values: table,
        tail_index,
        slopes: Vec::new(),
    };
    for k in tail_index + 1..=steps {
        let v = profile.tail(profile.radius(k));
        profile.values.push(v);
    }
    if let Some(k) = (1..profile.values.len()).find(|&k| profile.values[k] >= profile.values[k - 1]) {
        return Err(Error::NotMonotone { r: profile.radius(k) });
    }
    Ok(profile.with_slopes())
}

/// [`solve_radial`] with the default resolution for speed `c`.
pub fn solve_radial_default(c: f64) -> Result<RadialProfile> {
    solve_radial(c, default_r_max(c), DEFAULT_DR, DEFAULT_TOL)
}

/// Oblique plane solitary wave `(3c/2)·sech²[(√c/2)((x − ct)cosθ + y sinθ)]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneSoliton {
    pub c: f64,
    pub theta: f64,
}

impl PlaneSoliton {
    pub fn new(c: f64, theta: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::param("c", format!("must be positive, got {c}")));
        }
        Ok(Self { c, theta })
    }

    pub fn value(&self, x: f64, y: f64, t: f64) -> f64 {
        let arg = 0.5 * self.c.sqrt() * ((x - self.c * t) * self.theta.cos() + y * self.theta.sin());
        1.5 * self.c / arg.cosh().powi(2)
    }
}

/// Samples the plane wave at time `t`. The crest is at `x = ct`; `x` is not
/// wrapped, so the wave should stay well inside the periodic window.
pub fn plane_soliton_field<T: Scalar>(grid: Grid2D<T>, soliton: PlaneSoliton, t: f64) -> Field2D<T> {
    Field2D::from_fn(grid, |x, y| T::lit(soliton.value(x.as_f64(), y.as_f64(), t)))
}

/// Samples `Φ(|r − r0|)` on the grid using plain (non-periodic) distances.
pub fn deposit_radial<T: Scalar>(grid: Grid2D<T>, profile: &RadialProfile, x0: f64, y0: f64) -> Field2D<T> {
    Field2D::from_fn(grid, |x, y| {
        let (dx, dy) = (x.as_f64() - x0, y.as_f64() - y0);
        T::lit(profile.eval(dx.hypot(dy)))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c1_profile_shape() {
        let p = solve_radial_default(1.0).unwrap();
        let a = p.amplitude();
        assert!(a > 2.0 && a < 3.0, "amplitude {a}");
        assert!(p.values.windows(2).all(|w| w[1] < w[0]));
        assert!(*p.values.last().unwrap() < 1e-8 * a);
        for k in 0..p.tail_index - 1 {
            assert!(p.ode_residual(k).abs() < 1e-6, "residual at {k}: {}", p.ode_residual(k));
        }
    }

    #[test]
    fn interpolation_hits_nodes_and_stays_monotone() {
        let p = solve_radial_default(1.0).unwrap();
        assert_eq!(p.eval(0.0), p.amplitude());
        assert_eq!(p.eval(p.radius(1234)), p.values[1234]);
        let mut last = f64::INFINITY;
        for k in 0..4000 {
            let v = p.eval(k as f64 * 0.00731);
            assert!(v < last || k == 0);
            last = v;
        }
        let edge = p.radius(p.values.len() - 1);
        assert!((p.eval(edge + 1e-9) - p.eval(edge - 1e-9)).abs() < 1e-14);
    }

    #[test]
    fn tail_is_continuous() {
        let p = solve_radial_default(1.0).unwrap();
        let k = p.tail_index;
        let smooth = p.values[k - 1] + p.values[k + 1] - 2.0 * p.values[k];
        assert!(smooth.abs() < 1e-3 * p.values[k] , "kink {smooth}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_radial(0.0, 30.0, 1e-3, 1e-12).is_err());
        assert!(solve_radial(1.0, 30.0, -1e-3, 1e-12).is_err());
        assert!(matches!(
            solve_radial(1.0, 0.5, 1e-3, 1e-12),
            Err(Error::BracketNotFound { .. })
        ));
    }

    #[test]
    fn plane_wave_values() {
        let s = PlaneSoliton::new(1.0, 0.0).unwrap();
        assert_eq!(s.value(0.0, 3.0, 0.0), 1.5);
        assert_eq!(s.value(2.0, 0.0, 2.0), 1.5);
        let g = Grid2D::<f64>::new(40, 20, 40.0, 20.0).unwrap();
        let f = plane_soliton_field(g, s, 0.0);
        for j in 0..g.rows() {
            assert_eq!(f.interior_row(j), f.interior_row(0));
        }
    }

    #[test]
    fn deposit_centre_and_symmetry() {
        let p = solve_radial_default(1.0).unwrap();
        let g = Grid2D::<f64>::new(64, 32, 16.0, 8.0).unwrap();
        let (x0, y0) = (g.x(32), g.y(16));
        let f = deposit_radial(g, &p, x0, y0);
        assert!((f.get(32, 16) - p.amplitude()).abs() < 1e-6);
        let ring = [f.get(35, 16), f.get(29, 16), f.get(32, 19), f.get(32, 13)];
        let (hx, hy) = (g.hx, g.hy);
        assert_eq!(hx, hy);
        assert!(ring.iter().all(|v| (v - ring[0]).abs() < 1e-12));
    }
}
