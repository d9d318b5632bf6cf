//! Double description: generators of `{x : <a_i, x> >= 0}` from the `a_i`.
//!
//! Rows are inserted one at a time. The current polyhedral cone is kept as a
//! lineality basis `L` (the kernel of the rows seen so far) plus extreme rays
//! modulo `L`, each tagged with the set of rows it annihilates. Two rays of
//! opposite sign on a new row are combined only when they span an edge, which
//! is decided by an exact rank computation on their common zero set.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::lattice::{primitive, rank_of_rows, saturated_span_basis, IntVec};

/// Generators of a polyhedral cone: it equals `span(lineality) + Cone(rays)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generators {
    /// Lattice basis of the lineality space, in canonical form.
    pub lineality: Vec<IntVec>,
    /// Primitive extreme rays modulo the lineality space, sorted.
    pub rays: Vec<IntVec>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn new() -> Self {
        BitSet(Vec::new())
    }

    fn with_first(n: usize) -> Self {
        let mut s = BitSet::new();
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    fn insert(&mut self, i: usize) {
        let (w, b) = (i / 64, i % 64);
        if self.0.len() <= w {
            self.0.resize(w + 1, 0);
        }
        self.0[w] |= 1 << b;
    }

    fn intersection(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &bits)| {
            (0..64).filter(move |b| bits & (1u64 << b) != 0).map(move |b| w * 64 + b)
        })
    }
}

fn normalize(v: IntVec) -> IntVec {
    primitive(&v).unwrap_or(v)
}

/// Combination `s·v − t·w`, reduced to a primitive vector.
fn eliminate(v: &IntVec, s: &BigInt, w: &IntVec, t: &BigInt) -> IntVec {
    normalize(&v.scale(s) - &w.scale(t))
}

/// Generators of the cone `{x ∈ Q^dim : <a, x> >= 0 for every a in rows}`.
pub fn solve_inequalities(dim: usize, rows: &[IntVec]) -> Generators {
    let mut lin: Vec<IntVec> = (0..dim).map(|i| IntVec::unit(dim, i)).collect();
    let mut rays: Vec<(IntVec, BitSet)> = Vec::new();
    let mut inserted: Vec<IntVec> = Vec::new();

    for a in rows {
        if a.is_zero() {
            continue;
        }
        let k = inserted.len();
        inserted.push(a.clone());

        if let Some(pos) = lin.iter().position(|l| !a.dot(l).is_zero()) {
            // The new row cuts the lineality space: one direction becomes a ray.
            let mut pivot = lin.remove(pos);
            let mut s = a.dot(&pivot);
            if s.is_negative() {
                pivot = -&pivot;
                s = -s;
            }
            for l in lin.iter_mut() {
                let t = a.dot(l);
                if !t.is_zero() {
                    *l = eliminate(l, &s, &pivot, &t);
                }
            }
            for (r, zeros) in rays.iter_mut() {
                let t = a.dot(r);
                if !t.is_zero() {
                    *r = eliminate(r, &s, &pivot, &t);
                }
                zeros.insert(k);
            }
            rays.push((pivot, BitSet::with_first(k)));
            continue;
        }

        let values: Vec<BigInt> = rays.iter().map(|(r, _)| a.dot(r)).collect();
        if values.iter().all(|v| !v.is_negative()) {
            for ((_, zeros), v) in rays.iter_mut().zip(&values) {
                if v.is_zero() {
                    zeros.insert(k);
                }
            }
            continue;
        }

        let current_rank = dim - lin.len();
        let mut next: Vec<(IntVec, BitSet)> = Vec::new();
        for (p, vp) in rays.iter().zip(&values) {
            if !vp.is_positive() {
                continue;
            }
            for (q, vq) in rays.iter().zip(&values) {
                if !vq.is_negative() {
                    continue;
                }
                let common = p.1.intersection(&q.1);
                if current_rank < 2 || common.len() < current_rank - 2 {
                    continue;
                }
                let face_rows: Vec<IntVec> = common.iter().map(|i| inserted[i].clone()).collect();
                if rank_of_rows(&face_rows, dim) != current_rank - 2 {
                    continue;
                }
                let mut zeros = common;
                zeros.insert(k);
                next.push((eliminate(&q.0, vp, &p.0, vq), zeros));
            }
        }
        for ((r, mut zeros), v) in rays.into_iter().zip(values) {
            if v.is_negative() {
                continue;
            }
            if v.is_zero() {
                zeros.insert(k);
            }
            next.push((r, zeros));
        }
        rays = next;
    }

    let lineality = if lin.is_empty() {
        Vec::new()
    } else {
        saturated_span_basis(&lin, dim)
    };
    let mut out: Vec<IntVec> = rays.into_iter().map(|(r, _)| r).collect();
    out.sort();
    out.dedup();
    Generators {
        lineality,
        rays: out,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> IntVec {
        IntVec::from_i64(xs)
    }

    #[test]
    fn orthant_is_self_dual() {
        let g = solve_inequalities(3, &[v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])]);
        assert!(g.lineality.is_empty());
        assert_eq!(g.rays, vec![v(&[0, 0, 1]), v(&[0, 1, 0]), v(&[1, 0, 0])]);
    }

    #[test]
    fn half_plane_keeps_a_line() {
        let g = solve_inequalities(2, &[v(&[1, 0])]);
        assert_eq!(g.lineality, vec![v(&[0, 1])]);
        assert_eq!(g.rays, vec![v(&[1, 0])]);
    }

    #[test]
    fn no_rows_gives_whole_space() {
        let g = solve_inequalities(2, &[]);
        assert_eq!(g.lineality.len(), 2);
        assert!(g.rays.is_empty());
    }

    #[test]
    fn square_pyramid_has_four_rays() {
        // Cone over a square: four facets x ± y >= 0 style.
        let rows = [v(&[1, 0, 1]), v(&[-1, 0, 1]), v(&[0, 1, 1]), v(&[0, -1, 1])];
        let g = solve_inequalities(3, &rows);
        assert!(g.lineality.is_empty());
        assert_eq!(
            g.rays,
            vec![v(&[-1, -1, 1]), v(&[-1, 1, 1]), v(&[1, -1, 1]), v(&[1, 1, 1])]
        );
    }

    #[test]
    fn opposite_rows_give_a_hyperplane() {
        let g = solve_inequalities(2, &[v(&[1, 1]), v(&[-1, -1])]);
        assert_eq!(g.lineality, vec![v(&[1, -1])]);
        assert!(g.rays.is_empty());
    }
}
