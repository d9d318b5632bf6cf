//! Property tests for the algebraic and geometric invariants.

use fliplab_core::cone::{dual_cone, is_face, Cone};
use fliplab_core::criteria::{flop_reduced_criterion, reduced_criterion_3d, smooth_reduced_criterion, spade_oracle};
use fliplab_core::flip::{is_flop, wall_relation, WallRelation};
use fliplab_core::lattice::{
    hermite_normal_form, kernel_basis, primitive, smith_normal_form, solve_rational, IntMat, IntVec,
};
use fliplab_core::semigroup::{check_semigroup_sum_equality, hilbert_basis, member};
use fliplab_core::torus::{lattice_fiber_product, torus_fp_decomposition};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize, lo: i64, hi: i64) -> impl Strategy<Value = IntMat> {
    proptest::collection::vec(lo..=hi, rows * cols)
        .prop_map(move |xs| IntMat::new(rows, cols, xs.into_iter().map(BigInt::from).collect()).unwrap())
}

fn any_matrix() -> impl Strategy<Value = IntMat> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| matrix(r, c, -9, 9))
}

fn vectors(rank: usize, count: std::ops::RangeInclusive<usize>, bound: i64) -> impl Strategy<Value = Vec<IntVec>> {
    proptest::collection::vec(proptest::collection::vec(-bound..=bound, rank), count)
        .prop_map(|vs| vs.iter().map(|v| IntVec::from_i64(v)).collect())
}

/// A unimodular matrix as a product of elementary moves.
fn unimodular(n: usize) -> impl Strategy<Value = IntMat> {
    proptest::collection::vec((0..n, 0..n, -2i64..=2, any::<bool>()), 0..8).prop_map(move |moves| {
        let mut m = IntMat::identity(n);
        for (i, j, k, swap) in moves {
            let mut e = IntMat::identity(n);
            let mut data: Vec<BigInt> = e.entries().to_vec();
            if swap && i != j {
                data[i * n + i] = BigInt::zero();
                data[j * n + j] = BigInt::zero();
                data[i * n + j] = BigInt::one();
                data[j * n + i] = BigInt::one();
            } else if i != j {
                data[i * n + j] = BigInt::from(k);
            }
            e = IntMat::new(n, n, data).unwrap();
            m = e.mul(&m);
        }
        m
    })
}

fn box_points(rank: usize, bound: i64) -> Vec<IntVec> {
    let mut out = Vec::new();
    let mut p = vec![-bound; rank];
    loop {
        out.push(IntVec::from_i64(&p));
        let mut k = 0;
        while k < rank && p[k] == bound {
            p[k] = -bound;
            k += 1;
        }
        if k == rank {
            return out;
        }
        p[k] += 1;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hermite_identity(a in any_matrix()) {
        let h = hermite_normal_form(&a);
        prop_assert_eq!(h.u.mul(&a), h.h.clone());
        prop_assert!(h.u.determinant().abs().is_one());
        prop_assert_eq!(h.rank, a.rank());
    }

    #[test]
    fn smith_identity(a in any_matrix()) {
        let s = smith_normal_form(&a);
        prop_assert_eq!(s.u.mul(&a).mul(&s.v), s.d.clone());
        prop_assert!(s.u.determinant().abs().is_one());
        prop_assert!(s.v.determinant().abs().is_one());
        for w in s.invariant_factors.windows(2) {
            prop_assert!(w[1].is_multiple_of(&w[0]));
        }
    }

    #[test]
    fn smith_invariant_under_unimodular_change(
        a in matrix(3, 3, -6, 6), u in unimodular(3), v in unimodular(3)
    ) {
        let before = smith_normal_form(&a).invariant_factors;
        let after = smith_normal_form(&u.mul(&a).mul(&v)).invariant_factors;
        prop_assert_eq!(before, after);
    }

    #[test]
    fn kernel_spans_small_kernel_vectors(a in (1usize..=3, 2usize..=4).prop_flat_map(|(r, c)| matrix(r, c, -3, 3))) {
        let basis = kernel_basis(&a);
        prop_assert_eq!(basis.len(), a.cols() - a.rank());
        for b in &basis {
            prop_assert!(a.mul_vec(b).is_zero());
        }
        if basis.is_empty() {
            return Ok(());
        }
        let basis_mat = IntMat::from_cols(a.cols(), &basis).unwrap();
        for x in box_points(a.cols(), 2) {
            if !a.mul_vec(&x).is_zero() {
                continue;
            }
            let coeffs = solve_rational(&basis_mat, &x);
            prop_assert!(coeffs.is_some());
            prop_assert!(coeffs.unwrap().iter().all(|c| c.is_integer()));
        }
    }

    #[test]
    fn primitive_is_idempotent(v in proptest::collection::vec(-50i64..=50, 1..=5)) {
        let v = IntVec::from_i64(&v);
        prop_assume!(!v.is_zero());
        let p = primitive(&v).unwrap();
        prop_assert_eq!(primitive(&p).unwrap(), p.clone());
        prop_assert!(p.content().is_one());
    }

    #[test]
    fn dual_of_dual(gens in (1usize..=4).prop_flat_map(|r| vectors(r, 1..=5, 3))) {
        let rank = gens[0].dim();
        let c = Cone::new(rank, gens).unwrap();
        prop_assert_eq!(dual_cone(&dual_cone(&c)), c);
    }

    #[test]
    fn faces_of_faces_are_faces(gens in vectors(3, 3..=5, 3)) {
        let c = Cone::new(3, gens).unwrap();
        prop_assume!(c.is_strongly_convex());
        for f in c.faces() {
            prop_assert!(is_face(&f, &c).unwrap());
            for g in f.faces() {
                prop_assert!(is_face(&g, &f).unwrap());
                prop_assert!(is_face(&g, &c).unwrap());
            }
        }
    }

    #[test]
    fn hilbert_basis_complete_and_minimal(gens in vectors(2, 1..=3, 4)) {
        let c = Cone::new(2, gens).unwrap();
        prop_assume!(c.is_full_dimensional() && c.is_strongly_convex());
        let s = hilbert_basis(&c).unwrap();
        let d = dual_cone(&c);
        let points: Vec<IntVec> = box_points(2, 5).into_iter().filter(|p| d.contains(p)).collect();
        for p in &points {
            prop_assert!(member(&s, p).unwrap().is_member());
        }
        for h in s.generators() {
            prop_assert!(d.contains(h));
            // No decomposition into two nonzero lattice points of the dual cone.
            let reducible = points.iter().any(|p| !p.is_zero() && p != h && d.contains(&(h - p)) && !(h - p).is_zero());
            prop_assert!(!reducible, "reducible element {}", h);
        }
    }

    #[test]
    fn sum_equality_is_symmetric(a in vectors(2, 1..=2, 3), b in vectors(2, 1..=2, 3)) {
        let (a, b) = (Cone::new(2, a).unwrap(), Cone::new(2, b).unwrap());
        prop_assume!(a.is_strongly_convex() && b.is_strongly_convex());
        let x = check_semigroup_sum_equality(&a, &b).unwrap().holds;
        let y = check_semigroup_sum_equality(&b, &a).unwrap().holds;
        prop_assert_eq!(x, y);
    }

    #[test]
    fn remainder_criterion_symmetric(b1 in -9i64..=-1, b2 in -9i64..=-1, b3 in 1i64..=15) {
        prop_assert_eq!(
            reduced_criterion_3d(b1, b2, b3).unwrap().reduced,
            reduced_criterion_3d(b2, b1, b3).unwrap().reduced
        );
    }

    #[test]
    fn flop_heredity(b1 in -9i64..=-1, b2 in -9i64..=-1) {
        if !flop_reduced_criterion(b1, b2).unwrap().reduced {
            prop_assert!(!flop_reduced_criterion(b1, b1 + b2).unwrap().reduced);
        }
    }

    #[test]
    fn divisibility_matches_decomposition_oracle(b1 in -4i64..=-1, b2 in -4i64..=-1, b3 in -4i64..=-1) {
        let w = WallRelation::from_i64(&[b1, b2, b3, 1, 1]).unwrap();
        prop_assert_eq!(smooth_reduced_criterion(&w).unwrap().reduced, spade_oracle(&w, 5).unwrap().holds);
    }

    #[test]
    fn wall_relation_normalization(c in vectors(3, 1..=1, 4), u in unimodular(3)) {
        // σ_a = cone(e1, e2, e3) and σ_b = cone(e1, e2, v) with v below the wall.
        let mut v = c[0].clone();
        prop_assume!(v[2] != BigInt::zero());
        if v[2].is_positive() {
            v = -&v;
        }
        prop_assume!(primitive(&v).unwrap() == v);
        // Otherwise every coefficient is positive and there is no flipping wall.
        prop_assume!(v[0].is_positive() || v[1].is_positive());
        let e = |i| IntVec::unit(3, i);
        let map = |x: &IntVec| u.mul_vec(x);
        let a = Cone::new(3, vec![map(&e(0)), map(&e(1)), map(&e(2))]).unwrap();
        let b = Cone::new(3, vec![map(&e(0)), map(&e(1)), map(&v)]).unwrap();
        let w = wall_relation(&a, &b).unwrap();
        let sum = w.rays().iter().zip(w.coefficients()).fold(IntVec::zeros(3), |acc, (r, k)| &acc + &r.scale(k));
        prop_assert!(sum.is_zero());
        let g = w.coefficients().iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        prop_assert!(g.is_one());
        prop_assert!(w.coefficients()[3].is_positive() && w.coefficients()[2].is_positive());
        let back = wall_relation(&b, &a).unwrap();
        prop_assert_eq!(back.coefficients(), w.coefficients());
        // Flop detection does not depend on the lattice basis.
        let plain = WallRelation::from_rays(vec![e(0), e(1), e(2), v.clone()]);
        if let Ok(plain) = plain {
            prop_assert_eq!(is_flop(&plain), is_flop(&w));
        }
    }

    #[test]
    fn torus_dimension_is_kernel_rank(
        phi1 in (0usize..=3, 0usize..=3).prop_flat_map(|(r, c)| (Just(r), matrix(r, c, -5, 5))),
        n2 in 0usize..=3,
        seed in proptest::collection::vec(-5i64..=5, 9)
    ) {
        let (rows, phi1) = phi1;
        let data: Vec<BigInt> = seed.iter().take(rows * n2).map(|&x| BigInt::from(x)).collect();
        prop_assume!(data.len() == rows * n2);
        let phi2 = IntMat::new(rows, n2, data).unwrap();
        let d = torus_fp_decomposition(&phi1, &phi2).unwrap();
        prop_assert_eq!(d.torus_dim, lattice_fiber_product(&phi1, &phi2).unwrap().len());
        for w in d.finite_part.windows(2) {
            prop_assert!(w[1].is_multiple_of(&w[0]));
        }
    }

    #[test]
    fn torus_invariant_under_basis_change(
        phi1 in matrix(2, 2, -5, 5), phi2 in matrix(2, 2, -5, 5),
        a in unimodular(2), b in unimodular(2), c in unimodular(2)
    ) {
        let before = torus_fp_decomposition(&phi1, &phi2).unwrap();
        let after = torus_fp_decomposition(&c.mul(&phi1).mul(&a), &c.mul(&phi2).mul(&b)).unwrap();
        prop_assert_eq!(before, after);
    }
}
