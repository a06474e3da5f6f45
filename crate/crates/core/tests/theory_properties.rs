//! Property tests for the closed-form constants.

use heavytail::metrics::w2_1d;
use heavytail::theory::{delta, first_order_step_bound, gamma_ratio_and_bound};
use proptest::prelude::*;

proptest! {
    /// The Gamma-ratio inequality admits no counterexample on its domain
    /// (1e-12 relative slack for the log-gamma rounding; d = 2 is an exact
    /// equality case).
    #[test]
    fn gamma_ratio_never_exceeds_bound(
        d in 1usize..=20,
        beta_frac in 0.05f64..1.0,
        r_frac in 0.001f64..0.999,
    ) {
        let half_d = d as f64 / 2.0;
        let beta = half_d + 0.5 + beta_frac * (2.0 * d as f64 - half_d - 0.5).max(0.5);
        let r = r_frac * (beta - half_d);
        let (ratio, bound) = gamma_ratio_and_bound(beta, d, r).unwrap();
        prop_assert!(ratio <= bound * (1.0 + 1e-12),
            "d={d}, beta={beta}, r={r}: ratio {ratio} > bound {bound}");
    }

    /// delta is strictly increasing in beta and the step bound stays positive
    /// and below the gradient-Lipschitz cap.
    #[test]
    fn delta_monotone_and_step_bound_valid(
        d in 1usize..=40,
        cv in 0.5f64..4.0,
        bump in 0.01f64..10.0,
    ) {
        let base = 1.0 + cv * d as f64 / 4.0;
        let d1 = delta(base + bump, d, cv).unwrap();
        let d2 = delta(base + 2.0 * bump, d, cv).unwrap();
        prop_assert!(d2 > d1);
        let h = first_order_step_bound(2.0, 2.0, base + bump, d1).unwrap();
        prop_assert!(h > 0.0);
        prop_assert!(h <= 1.0 / (4.0 * (base + bump - 1.0) * 2.0) + 1e-15);
    }

    /// Quantile-coupled W2 in one dimension: exact translation identity.
    #[test]
    fn w2_translation_identity(
        mut a in prop::collection::vec(-100.0f64..100.0, 2..64),
        c in -50.0f64..50.0,
    ) {
        a.sort_unstable_by(f64::total_cmp);
        let b: Vec<f64> = a.iter().map(|v| v + c).collect();
        let got = w2_1d(&a, &b).unwrap();
        prop_assert!((got - c.abs()).abs() < 1e-9);
    }
}
