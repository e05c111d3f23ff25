//! Randomised invariants over seeds and shapes.

use proptest::prelude::*;
use siegel_jacobi::cayley::{partial_cayley, partial_cayley_inverse};
use siegel_jacobi::geodesics::{distance_squared_series, siegel_distance};
use siegel_jacobi::groups::{act_jacobi, act_siegel, jacobi_multiply, random_jacobi, random_symplectic};
use siegel_jacobi::linalg::{max_abs, scalar};
use siegel_jacobi::random::{rand_jacobi, rand_jacobi_disk, rand_siegel, rng};
use siegel_jacobi::reduction::{random_modular_word, siegel_reduce};
use siegel_jacobi::spaces::SiegelPoint;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_action_composes(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=2) {
        let mut r = rng(seed);
        let (g1, g2) = (random_jacobi(&mut r, n, m), random_jacobi(&mut r, n, m));
        let p = rand_jacobi(&mut r, n, m);
        let lhs = act_jacobi(&jacobi_multiply(&g1, &g2).unwrap(), &p).unwrap();
        let rhs = act_jacobi(&g1, &act_jacobi(&g2, &p).unwrap()).unwrap();
        let scale = 1.0 + max_abs(rhs.omega()).max(max_abs(rhs.z()));
        prop_assert!(max_abs(&(lhs.omega() - rhs.omega())) / scale < 1e-10);
        prop_assert!(max_abs(&(lhs.z() - rhs.z())) / scale < 1e-10);
    }

    #[test]
    fn action_stays_in_the_space(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=2) {
        let mut r = rng(seed);
        let g = random_jacobi(&mut r, n, m);
        let q = act_jacobi(&g, &rand_jacobi(&mut r, n, m)).unwrap();
        prop_assert!(q.y().symmetric_eigenvalues().min() > 0.0);
        prop_assert!(max_abs(&(q.omega() - q.omega().transpose())) < 1e-12 * (1.0 + max_abs(q.omega())));
    }

    #[test]
    fn partial_cayley_round_trip(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=2, radius in 0.05f64..0.9) {
        let d = rand_jacobi_disk(&mut rng(seed), n, m, radius);
        let back = partial_cayley_inverse(&partial_cayley(&d).unwrap()).unwrap();
        prop_assert!(max_abs(&(back.w() - d.w())) < 1e-12 / (1.0 - radius));
        prop_assert!(max_abs(&(back.eta() - d.eta())) < 1e-12 / (1.0 - radius) * (1.0 + max_abs(d.eta())));
    }

    #[test]
    fn distance_is_symmetric_and_invariant(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let (a, b) = (rand_siegel(&mut r, n), rand_siegel(&mut r, n));
        let g = random_symplectic(&mut r, n);
        let d = siegel_distance(&a, &b).unwrap();
        prop_assert!(close(siegel_distance(&b, &a).unwrap(), d, 1e-9));
        let moved = siegel_distance(&act_siegel(&g, &a).unwrap(), &act_siegel(&g, &b).unwrap()).unwrap();
        prop_assert!(close(moved, d, 1e-8));
        prop_assert!(close(distance_squared_series(&a, &b).unwrap(), d * d, 1e-10));
    }

    #[test]
    fn distance_triangle_inequality(seed in any::<u64>(), n in 1usize..=3) {
        let mut r = rng(seed);
        let (a, b, c) = (rand_siegel(&mut r, n), rand_siegel(&mut r, n), rand_siegel(&mut r, n));
        let ab = siegel_distance(&a, &b).unwrap();
        let bc = siegel_distance(&b, &c).unwrap();
        let ac = siegel_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9);
        prop_assert!(siegel_distance(&a, &a).unwrap() < 1e-6);
    }

    #[test]
    fn reduction_is_orbit_invariant(seed in any::<u64>(), len in 1usize..6) {
        let mut r = rng(seed);
        let p = rand_siegel(&mut r, 1);
        let moved = act_siegel(&random_modular_word(&mut r, 1, len), &p).unwrap();
        let a = siegel_reduce(&p).unwrap().0.omega()[(0, 0)];
        let b = siegel_reduce(&moved).unwrap().0.omega()[(0, 0)];
        let edge = (a.re.abs() - 0.5).abs() < 1e-9 || (a.norm() - 1.0).abs() < 1e-9;
        prop_assert!((a - b).norm() < 1e-8 || (edge && (a.im - b.im).abs() < 1e-8), "{a} vs {b}");
    }

    #[test]
    fn reduced_points_are_fixed(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (q, _) = siegel_reduce(&rand_siegel(&mut r, 2)).unwrap();
        let (q2, cert) = siegel_reduce(&SiegelPoint::new(q.omega().clone()).unwrap()).unwrap();
        prop_assert!(max_abs(&(q2.omega() - q.omega())) < 1e-9);
        prop_assert!(cert.all_checks_pass());
    }

    #[test]
    fn scalar_points_round_trip(x in -3.0f64..3.0, y in 0.05f64..5.0) {
        let p = SiegelPoint::new(scalar(num_complex::Complex64::new(x, y))).unwrap();
        prop_assert_eq!(p.x()[(0, 0)], x);
        prop_assert_eq!(p.y()[(0, 0)], y);
    }
}
