//! Property tests for the matrix primitives and the β-divergence.

use betacnmf_core::betadiv::{d_beta, divergence, Beta};
use betacnmf_core::nnmat::NonnegMatrix;
use betacnmf_core::DEFAULT_EPS;
use proptest::prelude::*;

fn small_matrix() -> impl Strategy<Value = NonnegMatrix> {
    (1usize..6, 1usize..8).prop_flat_map(|(r, c)| {
        proptest::collection::vec(0.0f64..10.0, r * c)
            .prop_map(move |data| NonnegMatrix::from_vec(r, c, data).unwrap())
    })
}

proptest! {
    #[test]
    fn shifts_preserve_shape_and_nonnegativity(x in small_matrix(), m in 0usize..10) {
        let r = x.right_shift(m);
        let l = x.left_shift(m);
        prop_assert_eq!(r.shape(), x.shape());
        prop_assert_eq!(l.shape(), x.shape());
        prop_assert!(r.as_slice().iter().all(|&v| v >= 0.0));
        prop_assert!(l.as_slice().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn shift_composition(x in small_matrix(), a in 0usize..5, b in 0usize..5) {
        prop_assert_eq!(x.right_shift(a + b), x.right_shift(a).right_shift(b));
        prop_assert_eq!(x.left_shift(a + b), x.left_shift(a).left_shift(b));
    }

    #[test]
    fn right_shift_column_sums(x in small_matrix(), m in 0usize..8) {
        // total of the shifted matrix equals the total of the surviving columns
        let kept = x.cols().saturating_sub(m);
        let mut expected = 0.0;
        for r in 0..x.rows() {
            for c in 0..kept {
                expected += x.get(r, c);
            }
        }
        let got = x.right_shift(m).sum();
        prop_assert!((got - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    #[test]
    fn left_then_right_shift_zeroes_only_tail(x in small_matrix(), m in 0usize..5) {
        let rt = x.right_shift(m).left_shift(m);
        for r in 0..x.rows() {
            for c in 0..x.cols() {
                let expected = if c + m < x.cols() { x.get(r, c) } else { 0.0 };
                prop_assert_eq!(rt.get(r, c), expected);
            }
        }
    }

    #[test]
    fn pow_one_is_identity_for_positive(x in small_matrix()) {
        let shifted = NonnegMatrix::from_fn(x.rows(), x.cols(), |r, c| x.get(r, c) + 0.1);
        prop_assert_eq!(shifted.entrywise_pow(1.0, DEFAULT_EPS), shifted);
    }

    #[test]
    fn hadamard_commutative(a in small_matrix(), seed in 0u64..1000) {
        let mut rng = betacnmf_core::rng::Rng::from_seed(seed);
        let b = NonnegMatrix::from_fn(a.rows(), a.cols(), |_, _| rng.uniform(0.0, 5.0));
        prop_assert_eq!(a.hadamard(&b).unwrap(), b.hadamard(&a).unwrap());
    }

    #[test]
    fn d_beta_nonnegative_with_equality_iff_equal(
        p in 0.01f64..10.0,
        q in 0.01f64..10.0,
        bi in 0usize..5,
    ) {
        let beta = Beta::new([0.0, 0.5, 1.0, 1.5, 2.0][bi]);
        let d = d_beta(p, q, beta, DEFAULT_EPS);
        prop_assert!(d >= -1e-14);
        if (p - q).abs() > 1e-6 {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn d_beta_continuous_across_kl_branch(p in 0.1f64..10.0, q in 0.1f64..10.0) {
        let d1 = d_beta(p, q, Beta::new(1.0), DEFAULT_EPS);
        let delta = 1e-6;
        for b in [1.0 - delta, 1.0 + delta] {
            let d = d_beta(p, q, Beta::new(b), DEFAULT_EPS);
            let rel = (d - d1).abs() / d1.abs().max(1e-4);
            prop_assert!(rel < 1e-4, "b={b} d={d} d1={d1}");
        }
    }

    #[test]
    fn d_beta_midpoint_convex_for_beta_in_one_two(
        p in 0.1f64..10.0,
        q1 in 0.1f64..10.0,
        q2 in 0.1f64..10.0,
        bnum in 0u8..3,
    ) {
        let beta = Beta::new([1.0, 1.5, 2.0][bnum as usize]);
        let mid = d_beta(p, 0.5 * (q1 + q2), beta, DEFAULT_EPS);
        let avg = 0.5 * (d_beta(p, q1, beta, DEFAULT_EPS) + d_beta(p, q2, beta, DEFAULT_EPS));
        prop_assert!(mid <= avg + 1e-12);
    }

    #[test]
    fn divergence_additive_over_row_blocks(seed in 0u64..10_000) {
        let mut rng = betacnmf_core::rng::Rng::from_seed(seed);
        let v = NonnegMatrix::from_fn(6, 4, |_, _| rng.uniform(0.1, 5.0));
        let u = NonnegMatrix::from_fn(6, 4, |_, _| rng.uniform(0.1, 5.0));
        let beta = Beta::new(1.5);
        let total = divergence(&v, &u, beta, DEFAULT_EPS).unwrap();
        let top = |m: &NonnegMatrix| NonnegMatrix::from_fn(3, 4, |r, c| m.get(r, c));
        let bottom = |m: &NonnegMatrix| NonnegMatrix::from_fn(3, 4, |r, c| m.get(r + 3, c));
        let split = divergence(&top(&v), &top(&u), beta, DEFAULT_EPS).unwrap()
            + divergence(&bottom(&v), &bottom(&u), beta, DEFAULT_EPS).unwrap();
        prop_assert!((total - split).abs() <= 1e-12 * total.max(1.0));
    }
}

/// Independent high-precision route for the general branch: the Bregman
/// integral d_β(p, q) = ∫_q^p (p − t) t^{β−2} dt by Simpson's rule.
fn bregman_quadrature(p: f64, q: f64, beta: f64) -> f64 {
    let steps = 200_000; // even
    let h = (p - q) / steps as f64;
    let integrand = |t: f64| (p - t) * t.powf(beta - 2.0);
    let mut acc = integrand(q) + integrand(p);
    for i in 1..steps {
        let t = q + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * integrand(t);
    }
    acc * h / 3.0
}

#[test]
fn general_branch_matches_quadrature_oracle() {
    let mut rng = betacnmf_core::rng::Rng::from_seed(314);
    for _ in 0..20 {
        let p = rng.uniform(0.1, 10.0);
        let q = rng.uniform(0.1, 10.0);
        let d = d_beta(p, q, Beta::new(0.5), DEFAULT_EPS);
        let oracle = bregman_quadrature(p, q, 0.5);
        assert!(
            (d - oracle).abs() < 1e-9 * oracle.abs().max(1.0),
            "p={p} q={q} d={d} oracle={oracle}"
        );
    }
}
