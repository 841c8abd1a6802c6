//! Explicit time integration and the driver loop.
//!
//! Classical RK4 is the default; leapfrog with a Robert-Asselin filter is
//! the alternative. Ghosts are refreshed after every stage. A step whose
//! result contains a non-finite value is rejected and the previous state is
//! kept, so a blown-up run still ends on a healthy field.

use std::mem;

use crate::error::{Error, Result};
use crate::grid::Field2D;
use crate::scalar::Scalar;
use crate::wyf::Rhs;

/// Robert-Asselin coefficient applied to the leapfrog middle level.
pub const ASSELIN_FILTER: f64 = 0.01;

/// Anything that can produce `d field / dT` into the interior of `out`.
pub trait TimeDerivative<T> {
    fn eval_into(&mut self, field: &Field2D<T>, out: &mut Field2D<T>);
}

impl<T: Scalar> TimeDerivative<T> for Rhs<T> {
    fn eval_into(&mut self, field: &Field2D<T>, out: &mut Field2D<T>) {
        Rhs::eval_into(self, field, out)
    }
}

impl<T, F> TimeDerivative<T> for F
where
    F: FnMut(&Field2D<T>, &mut Field2D<T>),
{
    fn eval_into(&mut self, field: &Field2D<T>, out: &mut Field2D<T>) {
        self(field, out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Rk4,
    Leapfrog,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig<T> {
    pub scheme: Scheme,
    /// Time step in slow time `T`.
    pub dt: T,
    pub t_end: T,
    /// Steps between snapshots.
    pub snapshot_every: u64,
    /// Steps between diagnostics records.
    pub series_every: u64,
}

impl<T: Scalar> Default for IntegratorConfig<T> {
    fn default() -> Self {
        Self {
            scheme: Scheme::Rk4,
            dt: T::lit(1.0e-4),
            t_end: T::lit(50.0),
            snapshot_every: 10_000,
            series_every: 100,
        }
    }
}

impl<T: Scalar> IntegratorConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::param("integrator.dt", format!("must be positive, got {}", self.dt)));
        }
        if !(self.t_end >= T::zero()) || !self.t_end.is_finite() {
            return Err(Error::param("integrator.t_end", format!("must be non-negative, got {}", self.t_end)));
        }
        if self.snapshot_every == 0 {
            return Err(Error::param("integrator.snapshot_every", "must be at least 1"));
        }
        if self.series_every == 0 {
            return Err(Error::param("integrator.series_every", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of steps needed to reach `t_end`.
    pub fn total_steps(&self) -> u64 {
        (self.t_end / self.dt).round().to_u64().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationState<T> {
    pub xi: Field2D<T>,
    pub step: u64,
    /// Slow time `T = step * dt`.
    pub time: T,
}

impl<T: Scalar> SimulationState<T> {
    pub fn new(xi: Field2D<T>) -> Self {
        Self {
            xi,
            step: 0,
            time: T::zero(),
        }
    }
}

/// Scratch space for one RK4 step.
#[derive(Clone, Debug)]
pub struct Rk4<T> {
    k: [Field2D<T>; 4],
    stage: Field2D<T>,
    next: Field2D<T>,
}

impl<T: Scalar> Rk4<T> {
    pub fn new(grid: crate::grid::Grid2D<T>) -> Self {
        let z = Field2D::zeros(grid);
        Self {
            k: [z.clone(), z.clone(), z.clone(), z.clone()],
            stage: z.clone(),
            next: z,
        }
    }

    /// Advances `state` by one step. On a non-finite result the state is left
    /// unchanged and [`Error::BlowUp`] names the first bad cell.
    pub fn step(&mut self, state: &mut SimulationState<T>, dt: T, f: &mut impl TimeDerivative<T>) -> Result<()> {
        let half = dt * T::lit(0.5);
        let xi = &state.xi;
        f.eval_into(xi, &mut self.k[0]);
        combine(&mut self.stage, xi, half, &self.k[0]);
        f.eval_into(&self.stage, &mut self.k[1]);
        combine(&mut self.stage, xi, half, &self.k[1]);
        f.eval_into(&self.stage, &mut self.k[2]);
        combine(&mut self.stage, xi, dt, &self.k[2]);
        f.eval_into(&self.stage, &mut self.k[3]);

        let sixth = dt / T::lit(6.0);
        let two = T::lit(2.0);
        let grid = *xi.grid();
        for j in 0..grid.rows() {
            let (a, b, c, d) = (
                self.k[0].interior_row(j),
                self.k[1].interior_row(j),
                self.k[2].interior_row(j),
                self.k[3].interior_row(j),
            );
            let src = xi.interior_row(j);
            let dst = self.next.interior_row_mut(j);
            for i in 0..grid.nx {
                dst[i] = src[i] + sixth * (a[i] + two * (b[i] + c[i]) + d[i]);
            }
        }
        self.next.apply_boundary();
        check_finite(&self.next, state.step + 1, dt)?;
        mem::swap(&mut state.xi, &mut self.next);
        advance(state, dt);
        Ok(())
    }
}

/// `out <- base + a * k` on the interior, then refresh ghosts.
fn combine<T: Scalar>(out: &mut Field2D<T>, base: &Field2D<T>, a: T, k: &Field2D<T>) {
    let grid = *base.grid();
    for j in 0..grid.rows() {
        let (src, kk) = (base.interior_row(j), k.interior_row(j));
        let dst = out.interior_row_mut(j);
        for i in 0..grid.nx {
            dst[i] = src[i] + a * kk[i];
        }
    }
    out.apply_boundary();
}

fn check_finite<T: Scalar>(field: &Field2D<T>, step: u64, dt: T) -> Result<()> {
    match field.first_non_finite() {
        None => Ok(()),
        Some((i, j)) => Err(Error::BlowUp {
            step,
            time: step as f64 * dt.as_f64(),
            i,
            j,
        }),
    }
}

fn advance<T: Scalar>(state: &mut SimulationState<T>, dt: T) {
    state.step += 1;
    state.time = T::lit(state.step as f64) * dt;
}

/// Leapfrog with a Robert-Asselin filter. The first step is taken with RK4.
#[derive(Clone, Debug)]
pub struct Leapfrog<T> {
    prev: Option<Field2D<T>>,
    k: Field2D<T>,
    next: Field2D<T>,
    bootstrap: Rk4<T>,
    filter: T,
}

impl<T: Scalar> Leapfrog<T> {
    pub fn new(grid: crate::grid::Grid2D<T>) -> Self {
        Self::with_filter(grid, T::lit(ASSELIN_FILTER))
    }

    pub fn with_filter(grid: crate::grid::Grid2D<T>, filter: T) -> Self {
        let z = Field2D::zeros(grid);
        Self {
            prev: None,
            k: z.clone(),
            next: z,
            bootstrap: Rk4::new(grid),
            filter,
        }
    }

    /// Previous (filtered) level, if one exists.
    pub fn previous(&self) -> Option<&Field2D<T>> {
        self.prev.as_ref()
    }

    /// Seeds the previous level explicitly instead of bootstrapping.
    pub fn set_previous(&mut self, prev: Field2D<T>) {
        self.prev = Some(prev);
    }

    pub fn step(&mut self, state: &mut SimulationState<T>, dt: T, f: &mut impl TimeDerivative<T>) -> Result<()> {
        let Some(prev) = self.prev.as_mut() else {
            let before = state.xi.clone();
            self.bootstrap.step(state, dt, f)?;
            self.prev = Some(before);
            return Ok(());
        };
        f.eval_into(&state.xi, &mut self.k);
        let two_dt = T::lit(2.0) * dt;
        let grid = *state.xi.grid();
        for j in 0..grid.rows() {
            let (p, k) = (prev.interior_row(j), self.k.interior_row(j));
            let dst = self.next.interior_row_mut(j);
            for i in 0..grid.nx {
                dst[i] = p[i] + two_dt * k[i];
            }
        }
        self.next.apply_boundary();
        check_finite(&self.next, state.step + 1, dt)?;

        // filtered middle level becomes the new previous level
        let nu = self.filter;
        let two = T::lit(2.0);
        for ((p, &c), &n) in prev.data_mut().iter_mut().zip(state.xi.data()).zip(self.next.data()) {
            *p = c + nu * (n - two * c + *p);
        }
        mem::swap(&mut state.xi, &mut self.next);
        advance(state, dt);
        Ok(())
    }
}

/// Either integrator behind one interface.
#[derive(Clone, Debug)]
pub enum Stepper<T> {
    Rk4(Rk4<T>),
    Leapfrog(Leapfrog<T>),
}

impl<T: Scalar> Stepper<T> {
    pub fn new(scheme: Scheme, grid: crate::grid::Grid2D<T>) -> Self {
        match scheme {
            Scheme::Rk4 => Stepper::Rk4(Rk4::new(grid)),
            Scheme::Leapfrog => Stepper::Leapfrog(Leapfrog::new(grid)),
        }
    }

    pub fn step(&mut self, state: &mut SimulationState<T>, dt: T, f: &mut impl TimeDerivative<T>) -> Result<()> {
        match self {
            Stepper::Rk4(s) => s.step(state, dt, f),
            Stepper::Leapfrog(s) => s.step(state, dt, f),
        }
    }
}

/// Single RK4 step on a fresh workspace.
pub fn rk4_step<T: Scalar>(state: &SimulationState<T>, dt: T, f: &mut impl TimeDerivative<T>) -> Result<SimulationState<T>> {
    let mut next = state.clone();
    Rk4::new(*state.xi.grid()).step(&mut next, dt, f)?;
    Ok(next)
}

/// Single leapfrog step `xi^{n+1} = xi^{n-1} + 2 dt f(xi^n)` on a fresh
/// workspace. Returns the new state and the filtered middle level.
pub fn leapfrog_step<T: Scalar>(
    state: &SimulationState<T>,
    prev: &Field2D<T>,
    dt: T,
    f: &mut impl TimeDerivative<T>,
) -> Result<(SimulationState<T>, Field2D<T>)> {
    let mut lf = Leapfrog::new(*state.xi.grid());
    lf.set_previous(prev.clone());
    let mut next = state.clone();
    lf.step(&mut next, dt, f)?;
    let filtered = lf.prev.take().expect("previous level is set");
    Ok((next, filtered))
}

/// Receives driver output. All methods default to doing nothing.
pub trait Sink<T> {
    fn series(&mut self, _state: &SimulationState<T>) -> Result<()> {
        Ok(())
    }

    fn snapshot(&mut self, _state: &SimulationState<T>) -> Result<()> {
        Ok(())
    }

    /// Called once with the last healthy state when the run blows up.
    fn blow_up(&mut self, _last_healthy: &SimulationState<T>, _error: &Error) -> Result<()> {
        Ok(())
    }
}

/// Sink that ignores everything.
pub struct NullSink;

impl<T> Sink<T> for NullSink {}

#[derive(Clone, Debug)]
pub struct RunOutcome<T> {
    /// Final state, or the last healthy state after a blow-up.
    pub state: SimulationState<T>,
    /// Blow-up report when the run stopped early.
    pub blow_up: Option<BlowUpReport>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlowUpReport {
    pub step: u64,
    pub time: f64,
    pub i: usize,
    pub j: usize,
}

impl<T> RunOutcome<T> {
    pub fn completed(&self) -> bool {
        self.blow_up.is_none()
    }
}

/// Advances `initial` to `config.t_end`, feeding the sink at the configured
/// cadences. The initial state is reported once before the first step;
/// nothing is reported when no step is taken.
pub fn run<T: Scalar>(
    initial: SimulationState<T>,
    config: &IntegratorConfig<T>,
    f: &mut impl TimeDerivative<T>,
    sink: &mut impl Sink<T>,
) -> Result<RunOutcome<T>> {
    config.validate()?;
    let total = config.total_steps();
    let mut state = initial;
    if total == 0 {
        return Ok(RunOutcome { state, blow_up: None });
    }
    let mut stepper = Stepper::new(config.scheme, *state.xi.grid());
    sink.series(&state)?;
    sink.snapshot(&state)?;
    let start = state.step;
    while state.step - start < total {
        if let Err(err) = stepper.step(&mut state, config.dt, f) {
            let Error::BlowUp { step, time, i, j } = err else {
                return Err(err);
            };
            sink.snapshot(&state)?;
            sink.blow_up(&state, &err)?;
            return Ok(RunOutcome {
                state,
                blow_up: Some(BlowUpReport { step, time, i, j }),
            });
        }
        let done = state.step - start;
        if done % config.series_every == 0 {
            sink.series(&state)?;
        }
        if done % config.snapshot_every == 0 {
            sink.snapshot(&state)?;
        }
    }
    Ok(RunOutcome { state, blow_up: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{sample_gaussian, Grid2D};

    fn grid() -> Grid2D<f64> {
        Grid2D::new(16, 12, 2.0, 1.5).unwrap()
    }

    fn linear(lambda: f64) -> impl FnMut(&Field2D<f64>, &mut Field2D<f64>) {
        move |u: &Field2D<f64>, out: &mut Field2D<f64>| {
            for j in 0..u.grid().rows() {
                let src = u.interior_row(j).to_vec();
                for (o, s) in out.interior_row_mut(j).iter_mut().zip(src) {
                    *o = lambda * s;
                }
            }
        }
    }

    #[test]
    fn rk4_reproduces_taylor_polynomial() {
        let lambda = -3.0;
        let dt = 0.1;
        let u = sample_gaussian(grid(), 1.0, 0.0, 0.0);
        let next = rk4_step(&SimulationState::new(u.clone()), dt, &mut linear(lambda)).unwrap();
        let z: f64 = lambda * dt;
        let factor = 1.0 + z + z * z / 2.0 + z.powi(3) / 6.0 + z.powi(4) / 24.0;
        assert!(next.xi.max_abs_diff(&u.map(|v| v * factor)) < 1e-15);
        assert_eq!(next.step, 1);
        assert!((next.time - dt).abs() < 1e-15);
    }

    #[test]
    fn zero_rhs_keeps_state() {
        let u = sample_gaussian(grid(), 2.0, 0.3, 0.1);
        let mut zero = |_: &Field2D<f64>, out: &mut Field2D<f64>| {
            for j in 0..out.grid().rows() {
                out.interior_row_mut(j).fill(0.0);
            }
        };
        let next = rk4_step(&SimulationState::new(u.clone()), 0.01, &mut zero).unwrap();
        assert_eq!(next.xi, u);

        let prev = u.map(|v| v * 0.5);
        let (after, _) = leapfrog_step(&SimulationState::new(u.clone()), &prev, 0.01, &mut zero).unwrap();
        assert_eq!(after.xi.interior(), prev.interior());
    }

    #[test]
    fn leapfrog_preserves_oscillation_amplitude() {
        // two-component oscillator stored in the first two cells of a row
        let g = grid();
        let mut osc = |u: &Field2D<f64>, out: &mut Field2D<f64>| {
            let (a, b) = (u.get(0, 0), u.get(1, 0));
            for j in 0..out.grid().rows() {
                out.interior_row_mut(j).fill(0.0);
            }
            out.set(0, 0, b);
            out.set(1, 0, -a);
        };
        let mut u = Field2D::zeros(g);
        u.set(0, 0, 1.0);
        let dt = 0.01;
        let mut state = SimulationState::new(u);
        let mut lf = Leapfrog::with_filter(g, 0.0);
        let steps = (2.0 * std::f64::consts::PI / dt).round() as usize;
        for _ in 0..steps {
            lf.step(&mut state, dt, &mut osc).unwrap();
        }
        let amp = (state.xi.get(0, 0).powi(2) + state.xi.get(1, 0).powi(2)).sqrt();
        assert!((amp - 1.0).abs() < 5.0 * dt * dt, "amplitude {amp}");
    }

    #[test]
    fn blow_up_keeps_last_healthy_state() {
        let u = sample_gaussian(grid(), 1.0, 0.0, 0.0);
        let mut bad = |_: &Field2D<f64>, out: &mut Field2D<f64>| {
            for j in 0..out.grid().rows() {
                out.interior_row_mut(j).fill(0.0);
            }
            out.set(5, 7, f64::NAN);
        };
        let mut state = SimulationState::new(u.clone());
        let err = Rk4::new(grid()).step(&mut state, 0.1, &mut bad).unwrap_err();
        assert!(matches!(err, Error::BlowUp { step: 1, i: 5, j: 7, .. }));
        assert_eq!(state.xi, u);
        assert_eq!(state.step, 0);
    }

    struct Counter {
        series: usize,
        snapshots: usize,
        blowups: usize,
    }

    impl Sink<f64> for Counter {
        fn series(&mut self, _: &SimulationState<f64>) -> Result<()> {
            self.series += 1;
            Ok(())
        }
        fn snapshot(&mut self, _: &SimulationState<f64>) -> Result<()> {
            self.snapshots += 1;
            Ok(())
        }
        fn blow_up(&mut self, _: &SimulationState<f64>, _: &Error) -> Result<()> {
            self.blowups += 1;
            Ok(())
        }
    }

    #[test]
    fn run_cadence() {
        let u = sample_gaussian(grid(), 1.0, 0.0, 0.0);
        let mut f = linear(-1.0);
        let mut sink = Counter { series: 0, snapshots: 0, blowups: 0 };
        let cfg = IntegratorConfig {
            dt: 0.01,
            t_end: 0.0,
            ..IntegratorConfig::default()
        };
        let out = run(SimulationState::new(u.clone()), &cfg, &mut f, &mut sink).unwrap();
        assert_eq!(out.state.step, 0);
        assert_eq!((sink.series, sink.snapshots), (0, 0));

        let cfg = IntegratorConfig {
            dt: 0.01,
            t_end: 0.1,
            series_every: 1,
            snapshot_every: 5,
            ..IntegratorConfig::default()
        };
        let out = run(SimulationState::new(u), &cfg, &mut f, &mut sink).unwrap();
        assert!(out.completed());
        assert_eq!(out.state.step, 10);
        assert_eq!(sink.series, 11);
        assert_eq!(sink.snapshots, 3);
    }

    #[test]
    fn run_reports_blow_up() {
        let u = sample_gaussian(grid(), 1.0, 0.0, 0.0);
        let mut calls = 0;
        let mut f = |u: &Field2D<f64>, out: &mut Field2D<f64>| {
            calls += 1;
            for j in 0..u.grid().rows() {
                out.interior_row_mut(j).fill(if calls > 12 { f64::INFINITY } else { 0.0 });
            }
        };
        let mut sink = Counter { series: 0, snapshots: 0, blowups: 0 };
        let cfg = IntegratorConfig {
            dt: 0.01,
            t_end: 1.0,
            series_every: 1,
            snapshot_every: 1000,
            ..IntegratorConfig::default()
        };
        let out = run(SimulationState::new(u), &cfg, &mut f, &mut sink).unwrap();
        let report = out.blow_up.unwrap();
        assert_eq!(report.step, 4);
        assert_eq!(out.state.step, 3);
        assert!(out.state.xi.is_finite());
        assert_eq!(sink.blowups, 1);
        assert_eq!(sink.snapshots, 2);
    }

    #[test]
    fn rejects_bad_config() {
        let mut cfg = IntegratorConfig::<f64>::default();
        cfg.dt = -1.0;
        assert!(cfg.validate().is_err());
        cfg.dt = 1e-4;
        cfg.series_every = 0;
        assert!(cfg.validate().is_err());
    }
}
