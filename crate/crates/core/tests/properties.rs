use fdpvar_core::estimate::{estimate_mu, p1_from_pi0};
use fdpvar_core::gauss::{bvn_cdf, bvn_rect_prob, norm_cdf, BvnParams};
use fdpvar_core::matrix::{cholesky, pfa_reduce, CorrelationMatrix, PfaPolicy};
use fdpvar_core::pi0::{estimate_pi0, PValueVector, Pi0Method};
use fdpvar_core::rng::{label, Stream};
use fdpvar_core::theory::{cov_tests_exact, fdp_limit, fdp_variance, thm2_sign, xi, SignPrediction, TestProblem};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn bvn_cdf_is_a_symmetric_probability(h in -8.0..8.0f64, k in -8.0..8.0f64, r in -1.0..=1.0f64) {
        let v = bvn_cdf(h, k, r).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        prop_assert!((v - bvn_cdf(k, h, r).unwrap()).abs() < 1e-15);
        prop_assert!(v <= norm_cdf(h.min(k)) + 1e-15);
        prop_assert!(bvn_cdf(h + 0.25, k, r).unwrap() >= v - 1e-15);
    }

    #[test]
    fn rectangle_probabilities_are_probabilities(
        a in -4.0..4.0f64, w1 in 0.0..4.0f64, b in -4.0..4.0f64, w2 in 0.0..4.0f64,
        mu1 in -3.0..3.0f64, mu2 in -3.0..3.0f64, rho in -0.99..0.99f64,
    ) {
        let v = bvn_rect_prob(a, a + w1, b, b + w2, &BvnParams { mu1, mu2, rho }).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
        let one = norm_cdf(a + w1 - mu1) - norm_cdf(a - mu1);
        prop_assert!(v <= one + 1e-14);
    }

    #[test]
    fn test_covariance_symmetry(mu_i in -6.0..6.0f64, mu_j in -6.0..6.0f64, s in -0.95..0.95f64, t in 0.001..0.3f64) {
        let a = cov_tests_exact(mu_i, mu_j, s, t).unwrap();
        prop_assert!((a - cov_tests_exact(mu_j, mu_i, s, t).unwrap()).abs() < 1e-15);
        prop_assert!((a - cov_tests_exact(-mu_i, -mu_j, s, t).unwrap()).abs() < 1e-14);
        prop_assert_eq!(cov_tests_exact(mu_i, mu_j, 0.0, t).unwrap(), 0.0);
        prop_assert!((xi(mu_i, t) - xi(-mu_i, t)).abs() < 1e-15);
        prop_assert!(xi(mu_i, t) >= t - 1e-15);
    }

    #[test]
    fn null_pairs_covary_positively(s in 0.01..0.95f64, t in 0.001..0.3f64) {
        prop_assert_eq!(thm2_sign(0.0, 0.0, s, t), SignPrediction::Positive);
        prop_assert!(cov_tests_exact(0.0, 0.0, s, t).unwrap() > 0.0);
        prop_assert!(cov_tests_exact(0.0, 0.0, -s, t).unwrap() > 0.0);
    }

    #[test]
    fn decomposition_is_consistent(seed in 0u64..1000, p in 3usize..25, rho in 0.0..0.6f64, t in 0.005..0.2f64) {
        let mut s = Stream::new(seed, label::TEST, 1);
        let mu: Vec<f64> = (0..p).map(|_| if s.uniform() < 0.4 { 1.0 + 4.0 * s.uniform() } else { 0.0 }).collect();
        let problem = TestProblem::from_means(mu, t).unwrap();
        let sigma = CorrelationMatrix::equicorrelation(p, rho).unwrap();
        let d = fdp_variance(&problem, &sigma, 0.0).unwrap();
        prop_assert!(d.v1 >= 0.0);
        prop_assert_eq!(d.total, d.v1 + d.v2);
        prop_assert!((0.0..=1.0).contains(&d.asym_mean));
        prop_assert_eq!(d.asym_mean, fdp_limit(&problem));
        let id = fdp_variance(&problem, &CorrelationMatrix::identity(p), 0.0).unwrap();
        prop_assert_eq!(id.v2, 0.0);
        prop_assert_eq!(id.v1, d.v1);
    }

    #[test]
    fn pi0_estimates_stay_in_range(seed in 0u64..500, n in 20usize..400, frac in 0.0..0.5f64) {
        let mut s = Stream::new(seed, label::TEST, 2);
        let v: Vec<f64> = (0..n).map(|i| if (i as f64) < frac * n as f64 { 1e-3 * s.uniform() } else { s.uniform() }).collect();
        let p = PValueVector::new(v).unwrap();
        for m in [Pi0Method::storey(), Pi0Method::smoothed(), Pi0Method::grenander()] {
            let e = estimate_pi0(&p, &m, seed).unwrap();
            prop_assert!(e.value >= 1.0 / n as f64 && e.value <= 1.0, "{:?} {}", m, e.value);
        }
    }

    #[test]
    fn top_statistics_selection(z in prop::collection::vec(-6.0..6.0f64, 1..60), pi0 in 0.0..=1.0f64) {
        let (mu, h1) = estimate_mu(&z, pi0);
        prop_assert_eq!(h1.len(), p1_from_pi0(z.len(), pi0));
        prop_assert!(h1.windows(2).all(|w| w[0] < w[1]));
        let min_sel = h1.iter().map(|&j| z[j].abs()).fold(f64::INFINITY, f64::min);
        for j in 0..z.len() {
            if h1.contains(&j) {
                prop_assert_eq!(mu[j], z[j]);
            } else {
                prop_assert_eq!(mu[j], 0.0);
                prop_assert!(z[j].abs() <= min_sel);
            }
        }
    }

    #[test]
    fn pfa_keeps_unit_diagonal(p in 3usize..30, rho in 0.05..0.9f64, k in 0usize..=1) {
        let sigma = CorrelationMatrix::equicorrelation(p, rho).unwrap();
        let r = pfa_reduce(&sigma, PfaPolicy::FixedK(k)).unwrap();
        for i in 0..p {
            prop_assert_eq!(r.sigma.get(i, i), 1.0);
        }
        let l = cholesky(&sigma).unwrap();
        prop_assert!(l.reconstruct().frobenius_distance(sigma.as_matrix()) < 1e-10);
    }

    #[test]
    fn streams_are_reproducible(seed in any::<u64>(), index in any::<u64>()) {
        let a: Vec<f64> = { let mut s = Stream::new(seed, label::MONTE_CARLO, index); (0..8).map(|_| s.normal()).collect() };
        let b: Vec<f64> = { let mut s = Stream::new(seed, label::MONTE_CARLO, index); (0..8).map(|_| s.normal()).collect() };
        prop_assert_eq!(&a, &b);
        let mut u = Stream::new(seed, label::BOOTSTRAP, index);
        for _ in 0..8 {
            let x = u.uniform();
            prop_assert!(x > 0.0 && x < 1.0);
        }
    }
}
