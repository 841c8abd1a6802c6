use proptest::prelude::*;

use wyf_core::entropy::{ce_periodic, spectrum_1d};
use wyf_core::grid::{Field2D, Grid2D};
use wyf_core::io::snapshot::{decode_snapshot, encode_snapshot, FieldId, SnapshotHeader};
use wyf_core::wyf::{Model, Rhs, ShearFlow};
use wyf_core::Grid;

fn grid_strategy() -> impl Strategy<Value = Grid> {
    (8usize..40, 8usize..30, 1.0f64..30.0, 1.0f64..15.0).prop_map(|(nx, ny, lx, ly)| Grid::new(nx, ny, lx, ly).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boundary_is_idempotent(g in grid_strategy(), a in -3.0f64..3.0, b in -2.0f64..2.0) {
        let mut f = Field2D::from_fn(g, |x: f64, y: f64| (a * x).sin() + b * y * y + x * y);
        let once = f.data().to_vec();
        f.apply_boundary();
        prop_assert_eq!(once, f.data().to_vec());
    }

    #[test]
    fn snapshot_round_trip_is_bit_exact(g in grid_strategy(), seed in any::<u64>(), t in 0.0f64..1e4, eta in any::<bool>()) {
        let f = Field2D::from_fn(g, |x: f64, y: f64| ((seed as f64) * 1e-9 + x * 1.3 + y * 0.7).sin() * 1e3);
        let id = if eta { FieldId::Eta } else { FieldId::Xi };
        let h = SnapshotHeader::for_field(&f, t, id).unwrap();
        let bytes = encode_snapshot(&f, &h).unwrap();
        prop_assert_eq!(bytes.len(), h.file_len().unwrap());
        let (h2, f2) = decode_snapshot(&bytes).unwrap();
        prop_assert_eq!(h2, h);
        prop_assert_eq!(f2.data(), f.data());
    }

    #[test]
    fn ce_is_invariant_under_shift_and_scale(values in prop::collection::vec(-1.0f64..1.0, 16..80), k in 0usize..80, a in 1e-3f64..1e3) {
        let n = values.len();
        prop_assume!(values.iter().map(|v| v.abs()).fold(0.0, f64::max) > 0.1);
        let base = spectrum_1d(&values, true).map(|s| ce_periodic(&s));
        prop_assume!(base.is_ok());
        let base = base.unwrap();
        let moved: Vec<f64> = (0..n).map(|i| a * values[(i + k) % n]).collect();
        let other = ce_periodic(&spectrum_1d(&moved, true).unwrap());
        prop_assert!((other - base).abs() <= 1e-10, "{base} vs {other}");
        prop_assert!(base <= ((n - 1) as f64).ln() + 1e-12);
    }

    #[test]
    fn rhs_commutes_with_x_translation(shift in 1isize..20, f1 in 0.0f64..1.8) {
        let g = Grid2D::new(40, 20, 10.0, 5.0).unwrap();
        let f = Field2D::from_fn(g, |x: f64, y: f64| 2.0 * (-(x - 1.0) * (x - 1.0) - (y - 0.5) * (y - 0.5)).exp());
        let mut rhs = Rhs::new(g, Model::wyf(ShearFlow::new(0.0, f1)));
        let a = rhs.eval(&f).shifted_x(shift);
        let b = rhs.eval(&f.shifted_x(shift));
        prop_assert!(a.max_abs_diff(&b) <= 1e-12 * a.max_abs());
    }
}
