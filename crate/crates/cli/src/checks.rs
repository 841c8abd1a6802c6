//! Quick property checks behind `convergence` and `verify`.

use wyf_core::arakawa::{jacobian, jacobian_invariant_report};
use wyf_core::entropy::{ce_periodic, spectrum_1d};
use wyf_core::grid::{sample_gaussian, Field2D, Grid2D};
use wyf_core::io::snapshot::{decode_snapshot, encode_snapshot, FieldId, SnapshotHeader};
use wyf_core::stencil::{convergence_study, fitted_order, Axis, DerivativeKind};
use wyf_core::timestep::{IntegratorConfig, NullSink, SimulationState, run};
use wyf_core::wyf::{Model, Rhs};
use wyf_core::zk::solve_radial_default;
use wyf_core::JacobianScheme;

const LEVELS: [usize; 3] = [100, 200, 400];

fn stencil_kinds() -> [(&'static str, DerivativeKind); 7] {
    [
        ("dx", DerivativeKind::First(Axis::X)),
        ("dxx", DerivativeKind::Second(Axis::X)),
        ("dxxx", DerivativeKind::Third),
        ("dy", DerivativeKind::First(Axis::Y)),
        ("dyy", DerivativeKind::Second(Axis::Y)),
        ("laplacian", DerivativeKind::Laplacian),
        ("dx_laplacian_mixed", DerivativeKind::MixedXYY),
    ]
}

/// Temporal order of RK4 on the ZK equation over a short interval.
pub fn rk4_time_order() -> f64 {
    let grid = Grid2D::new(40, 20, 10.0, 5.0).expect("valid grid");
    let xi = sample_gaussian(grid, 1.0, 0.0, 0.0);
    let solve = |dt: f64| {
        let cfg = IntegratorConfig {
            dt,
            t_end: 0.04,
            ..IntegratorConfig::default()
        };
        let mut rhs = Rhs::new(grid, Model::zk());
        run(SimulationState::new(xi.clone()), &cfg, &mut rhs, &mut NullSink)
            .expect("valid run")
            .state
            .xi
    };
    let reference = solve(1.25e-4);
    let dts = [4e-3, 2e-3, 1e-3];
    let errors: Vec<f64> = dts.iter().map(|&dt| solve(dt).max_abs_diff(&reference)).collect();
    fitted_order(&dts, &errors)
}

pub fn print_convergence() {
    println!("operator             order   (nx = {LEVELS:?})");
    for (name, kind) in stencil_kinds() {
        let r = convergence_study(kind, &LEVELS);
        println!("{name:<20} {:6.3}", r.order);
    }
    println!("{:<20} {:6.3}", "rk4 (time)", rk4_time_order());
}

fn report(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

/// Fast checks of the numerical building blocks; prints one line each.
pub fn run_quick_checks() -> bool {
    let mut all = true;
    for (name, kind) in stencil_kinds().into_iter().take(3).chain([("laplacian", DerivativeKind::Laplacian)]) {
        let order = convergence_study(kind, &LEVELS).order;
        let ok = if name == "dxxx" { (order - 2.0).abs() <= 0.2 } else { order >= 3.9 };
        all &= report(&format!("stencil order {name}"), ok, format!("{order:.3}"));
    }

    let torus = Grid2D::torus(48, 40, 6.0, 5.0).expect("valid torus");
    let a = Field2D::from_fn(torus, |x: f64, y: f64| (0.5 * x).sin() * (0.6 * y + 0.2).cos() + 0.3 * (x + y).cos());
    let b = Field2D::from_fn(torus, |x: f64, y: f64| (1.5 * x - 0.4).cos() * (0.4 * y).sin() + 0.2 * (x - 2.0 * y).sin());
    let inv = jacobian_invariant_report(&a, &b, JacobianScheme::Second).expect("same grid");
    let scale = a.rms().max(b.rms()).powi(3) * torus.len() as f64;
    all &= report(
        "arakawa invariants",
        inv.max_abs() <= 1e-10 * scale,
        format!("max |sum| = {:.3e}", inv.max_abs()),
    );
    let mut anti = 0.0f64;
    for s in [JacobianScheme::Second, JacobianScheme::Fourth] {
        let mut j = jacobian(&a, &b, s).expect("same grid");
        j.axpy(1.0, &jacobian(&b, &a, s).expect("same grid"));
        anti = anti.max(j.max_abs());
    }
    all &= report("arakawa antisymmetry", anti <= 1e-12, format!("{anti:.3e}"));

    let (p1, p4) = (solve_radial_default(1.0), solve_radial_default(4.0));
    match (p1, p4) {
        (Ok(p1), Ok(p4)) => {
            let dev = (0..p4.values.len())
                .map(|k| (p4.values[k] - 4.0 * p1.eval(2.0 * p4.radius(k))).abs())
                .fold(0.0f64, f64::max);
            all &= report(
                "zk scaling c=4 vs c=1",
                dev <= 1e-4 * p4.amplitude(),
                format!("max dev {dev:.3e}, amplitude {:.9}", p4.amplitude()),
            );
        }
        (r1, r4) => {
            all &= report("zk scaling c=4 vs c=1", false, format!("{:?} {:?}", r1.err(), r4.err()));
        }
    }

    let cosine: Vec<f64> = (0..64).map(|i| (2.0 * std::f64::consts::PI * 3.0 * i as f64 / 64.0).cos()).collect();
    let ce = spectrum_1d(&cosine, true).map(|s| ce_periodic(&s));
    all &= report(
        "ce single mode",
        ce.as_ref().is_ok_and(|v| (v - 2f64.ln()).abs() <= 1e-10),
        format!("{ce:?}"),
    );

    let g = Grid2D::new(20, 10, 4.0, 2.0).expect("valid grid");
    let f = Field2D::from_fn(g, |x: f64, y: f64| (x * 0.7).sin() + y * y);
    let bytes = SnapshotHeader::for_field(&f, 1.5, FieldId::Xi).and_then(|h| encode_snapshot(&f, &h));
    let round = bytes.as_ref().ok().and_then(|b| decode_snapshot(b).ok());
    let exact = round.is_some_and(|(_, r)| {
        r.iter_interior()
            .zip(f.iter_interior())
            .all(|((_, _, a), (_, _, b))| a.to_bits() == b.to_bits())
    });
    all &= report("snapshot round trip", exact, "bit-exact".to_string());
    all
}
