use std::sync::Arc;

use proptest::prelude::*;
use schroflow::angular::constant_a_spectrum;
use schroflow::flow::{decay_fit, pseudoconformal, Pseudoconformal, SeparatedState};
use schroflow::oscillator::{alpha_beta, build_table, half_dim_shift, DecayClass};
use schroflow::quad::RadialGrid;
use schroflow::specfun::{bessel_j_series, bessel_j_steed, PolySpec};
use schroflow::Complex64;

proptest! {
    #[test]
    fn alpha_solves_the_indicial_equation(dim in 2usize..7, mu in -2.0f64..40.0) {
        let c = half_dim_shift(dim);
        prop_assume!(mu > -c * c + 1e-6);
        let (alpha, beta) = alpha_beta(dim, mu);
        prop_assert!((alpha * (alpha - (dim as f64 - 2.0)) - mu).abs() <= 1e-10 * mu.abs().max(1.0));
        prop_assert!((alpha + beta - c).abs() <= 1e-12 * c.abs().max(1.0));
        prop_assert!(beta > 0.0);
    }

    #[test]
    fn classification_follows_mu_1(a in -0.249f64..3.0) {
        let e = Arc::new(constant_a_spectrum(3, a, 1).unwrap());
        let t = build_table(&e, 3, 1).unwrap();
        let expect = if a < 0.0 { DecayClass::LossOfDecay } else { DecayClass::ClassicalCandidate };
        prop_assert_eq!(t.decay_class(), expect);
    }

    #[test]
    fn pseudoconformal_round_trip_is_exact(t in -5.0f64..5.0, k in 0.1f64..3.0) {
        let grid = RadialGrid::uniform(0.05, 6.0, 60).unwrap();
        let s = SeparatedState::from_fn(3, grid, 2, |r| Complex64::new((-k * r * r).exp(), r.sin()));
        let fwd = pseudoconformal(&s, t, Pseudoconformal::Forward).unwrap();
        let back = pseudoconformal(&fwd, t, Pseudoconformal::Backward).unwrap();
        for (&r0, &r1) in s.grid().radii().iter().zip(back.grid().radii()) {
            prop_assert!((r0 - r1).abs() <= 1e-14 * r0);
        }
        for (a, b) in s.profile(2).unwrap().iter().zip(back.profile(2).unwrap()) {
            prop_assert!((a - b).norm() <= 1e-13 * a.norm().max(1e-300) + 1e-300);
        }
    }

    #[test]
    fn exact_power_laws_fit_exactly(p in -4.0f64..1.0, scale in 0.01f64..100.0) {
        let s: Vec<(f64, f64)> = (0..8).map(|e| {
            let t = 2f64.powi(e);
            (t, scale * t.powf(p))
        }).collect();
        let rep = decay_fit(&s, 0.0).unwrap();
        prop_assert!((rep.fitted_slope - p).abs() < 1e-12);
        prop_assert!((rep.r_squared - 1.0).abs() < 1e-12 || p == 0.0);
    }

    #[test]
    fn bessel_branches_overlap(nu in 0.0f64..25.0, r in 10.0f64..14.0) {
        prop_assert!((bessel_j_series(nu, r) - bessel_j_steed(nu, r).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn polynomial_has_n_positive_roots(n in 1usize..9, b in 0.5f64..6.0) {
        // Laguerre-type polynomials have exactly n simple zeros on (0, ∞)
        let p = PolySpec::new(n, b).unwrap();
        let mut changes = 0;
        let mut prev = p.eval(0.0);
        for i in 1..=4000 {
            let v = p.eval(i as f64 * 0.025);
            if v * prev < 0.0 {
                changes += 1;
            }
            prev = v;
        }
        prop_assert_eq!(changes, n);
    }
}
