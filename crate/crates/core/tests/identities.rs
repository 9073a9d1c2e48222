use bogc_core::airy::{airy_ai, airy_kernel};
use bogc_core::operators::{bogc_kernel, fredholm_det, toeplitz_det};
use bogc_core::series::{series_log_split, LaurentSeries, Symbol};
use bogc_core::symfun::{bialternant, enumerate_partitions, schur_tilts, ssyt_skew_schur, Partition};
use bogc_core::tilt::{tilted_fredholm_rhs, tilted_minor_direct, TiltFamily};
use bogc_core::C64;
use proptest::prelude::*;

fn poly(c: &[f64]) -> LaurentSeries {
    LaurentSeries::from_real(0, c).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bogc_identity_on_two_time_symbols(t1 in -0.4f64..0.4, t2 in -0.1f64..0.1, n in 1usize..7) {
        let f = series_log_split(&Symbol::exponential(&[t1, t2]), 160).unwrap();
        let k = bogc_kernel(&f, 64).unwrap();
        let rhs = f.geometric_mean.powi(n as i32) * f.szego_z * fredholm_det(&k, n).value;
        let lhs = toeplitz_det(&f.phi, n).unwrap();
        prop_assert!((lhs - rhs).norm() <= 1e-9 * lhs.norm(), "{} {}", lhs, rhs);
    }

    #[test]
    fn tilted_identity_on_rational_symbols(
        x in 0.05f64..0.6,
        y in 0.05f64..0.6,
        a in prop::collection::vec(-1.0f64..1.0, 6),
    ) {
        let f = series_log_split(&Symbol::rational_real(&[x], &[y, 0.5 * y]), 160).unwrap();
        let xi = vec![poly(&[1.0, a[0]]), poly(&[a[1], 1.0, a[2]])];
        let theta = vec![poly(&[1.0, a[3]]).reflect(), poly(&[a[4], a[5]]).reflect()];
        let tilts = TiltFamily::new(xi, theta).unwrap();
        if let Ok(rhs) = tilted_fredholm_rhs(&f, &tilts, 2, 64) {
            let lhs = tilted_minor_direct(&f.phi, &tilts, 2).unwrap();
            prop_assert!((lhs - rhs.value.value()).norm() <= 1e-8 * lhs.norm().max(1e-12));
            prop_assert!(rhs.correction_rank.unwrap_or(0) <= tilts.d_xi + tilts.d_theta);
        }
    }

    #[test]
    fn schur_bialternant_matches_tableaux(ys in prop::collection::vec(-0.9f64..0.9, 3)) {
        prop_assume!((ys[0] - ys[1]).abs() > 0.05 && (ys[0] - ys[2]).abs() > 0.05 && (ys[1] - ys[2]).abs() > 0.05);
        let ys: Vec<C64> = ys.iter().map(|&v| C64::new(v, 0.0)).collect();
        for lam in enumerate_partitions(4, 3) {
            let s = bialternant(&schur_tilts(&lam, 3), &ys).unwrap();
            let o = ssyt_skew_schur(&lam, &Partition::empty(3), &ys);
            prop_assert!((s - o).norm() <= 1e-9 * (1.0 + o.norm()));
        }
    }

    #[test]
    fn airy_kernel_is_symmetric_and_positive_on_the_diagonal(x in -10.0f64..10.0, y in -10.0f64..10.0) {
        prop_assert_eq!(airy_kernel(x, y), airy_kernel(y, x));
        prop_assert!(airy_kernel(x, x) >= 0.0);
        // Cauchy-Schwarz for the Gram kernel.
        let k = airy_kernel(x, y);
        prop_assert!(k * k <= airy_kernel(x, x) * airy_kernel(y, y) * (1.0 + 1e-9) + 1e-300);
    }

    #[test]
    fn airy_kernel_diagonal_derivative(x in -12.0f64..6.0) {
        // d/dx K_Ai(x, x) = -Ai(x)^2.
        let h = 1e-4;
        let d = (airy_kernel(x + h, x + h) - airy_kernel(x - h, x - h)) / (2.0 * h);
        let a = airy_ai(x).unwrap().0;
        prop_assert!((d + a * a).abs() < 1e-7);
    }
}
