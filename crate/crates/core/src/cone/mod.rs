//! Rational polyhedral cones given by primitive ray generators.
//!
//! A [`Cone`] stores its generators as the source of truth and computes the
//! inequality description lazily, caching it for the lifetime of the value.

pub mod dd;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::{kernel_basis, primitive, rank_of_rows, smith_normal_form, IntMat, IntVec};

pub use dd::{solve_inequalities, Generators};

/// Inequality description of a cone `C`: the generators of `C∨`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DualDescription {
    /// Lattice basis of `C^⊥`, the lineality space of `C∨`.
    pub lineality: Vec<IntVec>,
    /// Primitive facet normals: extreme rays of `C∨` modulo `C^⊥`.
    pub facets: Vec<IntVec>,
}

impl DualDescription {
    /// All generators of `C∨` as a cone: facets plus both signs of the
    /// lineality basis.
    pub fn cone_generators(&self) -> Vec<IntVec> {
        let mut out = self.facets.clone();
        for l in &self.lineality {
            out.push(l.clone());
            out.push(-l);
        }
        out
    }
}

/// Canonical generators of the cone whose dual is generated by `dual_rows`.
fn canonical_generators(rank: usize, dual_rows: &[IntVec]) -> Vec<IntVec> {
    let lineality = if dual_rows.is_empty() {
        (0..rank).map(|i| IntVec::unit(rank, i)).collect()
    } else {
        kernel_basis(&IntMat::from_rows(rank, dual_rows).expect("rows share the rank"))
    };
    let mut cut = dual_rows.to_vec();
    for b in &lineality {
        cut.push(b.clone());
        cut.push(-b);
    }
    let mut out = solve_inequalities(rank, &cut).rays;
    for b in lineality {
        out.push(-&b);
        out.push(b);
    }
    out.sort();
    out.dedup();
    out
}

/// A rational polyhedral cone in `Q^rank`.
///
/// The rays are primitive, pairwise distinct and lexicographically sorted.
/// For strongly convex cones they are exactly the extreme rays.
pub struct Cone {
    rank: usize,
    rays: Vec<IntVec>,
    dual: OnceLock<DualDescription>,
}

impl Clone for Cone {
    fn clone(&self) -> Self {
        let dual = OnceLock::new();
        if let Some(d) = self.dual.get() {
            let _ = dual.set(d.clone());
        }
        Cone {
            rank: self.rank,
            rays: self.rays.clone(),
            dual,
        }
    }
}

impl PartialEq for Cone {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.rays == other.rays
    }
}

impl Eq for Cone {}

impl PartialOrd for Cone {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cone {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.rank, &self.rays).cmp(&(other.rank, &other.rays))
    }
}

impl std::hash::Hash for Cone {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.rank.hash(state);
        self.rays.hash(state);
    }
}

impl fmt::Debug for Cone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cone[rank {}](", self.rank)?;
        for (i, r) in self.rays.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}")?;
        }
        write!(f, ")")
    }
}

impl Cone {
    /// Cone generated by `generators`, reduced to a minimal generating set.
    ///
    /// Zero vectors are dropped and the rest made primitive. For strongly
    /// convex cones the result is the set of extreme rays; otherwise it is
    /// `±` the Hermite basis of the lineality space together with the extreme
    /// rays of the cone cut down to the orthogonal complement of that space,
    /// so equal cones always get equal generators.
    pub fn new(rank: usize, generators: Vec<IntVec>) -> Result<Cone> {
        let mut gens = BTreeSet::new();
        for g in generators {
            if g.dim() != rank {
                return Err(Error::DimensionMismatch {
                    expected: rank,
                    found: g.dim(),
                });
            }
            if !g.is_zero() {
                gens.insert(primitive(&g)?);
            }
        }
        let gens: Vec<IntVec> = gens.into_iter().collect();
        let dual = dual_description_of(rank, &gens);
        let dual_rows = dual.cone_generators();
        let pointed = rank_of_rows(&dual_rows, rank) == rank;
        let rays = if pointed {
            gens.into_iter()
                .filter(|g| {
                    let tight: Vec<IntVec> = dual_rows
                        .iter()
                        .filter(|m| m.dot(g).is_zero())
                        .cloned()
                        .collect();
                    rank_of_rows(&tight, rank) + 1 == rank
                })
                .collect()
        } else {
            canonical_generators(rank, &dual_rows)
        };
        let cone = Cone {
            rank,
            rays,
            dual: OnceLock::new(),
        };
        let _ = cone.dual.set(dual);
        Ok(cone)
    }

    /// Convenience constructor from machine-integer generators.
    pub fn from_i64(rank: usize, generators: &[&[i64]]) -> Result<Cone> {
        Cone::new(rank, generators.iter().map(|g| IntVec::from_i64(g)).collect())
    }

    /// The cone `{0}` in `Q^rank`.
    pub fn zero(rank: usize) -> Cone {
        Cone {
            rank,
            rays: Vec::new(),
            dual: OnceLock::new(),
        }
    }

    /// Builds a cone from rays already known to be primitive, distinct and
    /// extreme; the caller guarantees minimality.
    pub(crate) fn from_extreme_rays(rank: usize, mut rays: Vec<IntVec>) -> Cone {
        rays.sort();
        rays.dedup();
        Cone {
            rank,
            rays,
            dual: OnceLock::new(),
        }
    }

    /// Cone cut out by `{x : <a, x> >= 0}` for the given rows.
    pub fn from_inequalities(rank: usize, rows: &[IntVec]) -> Result<Cone> {
        let g = solve_inequalities(rank, rows);
        let mut gens = g.rays;
        for l in &g.lineality {
            gens.push(l.clone());
            gens.push(-l);
        }
        Cone::new(rank, gens)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[IntVec] {
        &self.rays
    }

    /// Dimension of the linear span.
    pub fn dim(&self) -> usize {
        rank_of_rows(&self.rays, self.rank)
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dim() == self.rank
    }

    /// Cached inequality description.
    pub fn dual_description(&self) -> &DualDescription {
        self.dual.get_or_init(|| dual_description_of(self.rank, &self.rays))
    }

    /// Primitive facet normals.
    pub fn facets(&self) -> &[IntVec] {
        &self.dual_description().facets
    }

    /// True iff `C ∩ −C = {0}`.
    pub fn is_strongly_convex(&self) -> bool {
        rank_of_rows(&self.dual_description().cone_generators(), self.rank) == self.rank
    }

    /// True iff the rays are linearly independent.
    pub fn is_simplicial(&self) -> bool {
        self.dim() == self.rays.len()
    }

    /// True iff the rays extend to a basis of the lattice.
    pub fn is_smooth(&self) -> bool {
        if !self.is_simplicial() {
            return false;
        }
        if self.rays.is_empty() {
            return true;
        }
        let m = IntMat::from_rows(self.rank, &self.rays).expect("rays share the ambient rank");
        smith_normal_form(&m)
            .invariant_factors
            .iter()
            .all(|d| d == &BigInt::from(1))
    }

    /// Membership of a rational point given by an integer representative.
    pub fn contains(&self, x: &IntVec) -> bool {
        let d = self.dual_description();
        d.lineality.iter().all(|l| l.dot(x).is_zero())
            && d.facets.iter().all(|f| !f.dot(x).is_negative())
    }

    /// Containment `other ⊆ self`.
    pub fn contains_cone(&self, other: &Cone) -> bool {
        other.rays.iter().all(|r| self.contains(r))
    }

    /// Sum of the rays; lies in the relative interior of a strongly convex cone.
    pub fn interior_point(&self) -> IntVec {
        self.rays
            .iter()
            .fold(IntVec::zeros(self.rank), |acc, r| &acc + r)
    }

    /// True iff `x` lies in the relative interior.
    pub fn relative_interior_contains(&self, x: &IntVec) -> bool {
        let d = self.dual_description();
        d.lineality.iter().all(|l| l.dot(x).is_zero())
            && d.facets.iter().all(|f| f.dot(x).is_positive())
    }

    /// Intersection with the half-space `<h, x> >= 0`.
    pub fn intersect_halfspace(&self, h: &IntVec) -> Cone {
        let mut rows = self.dual_description().cone_generators();
        rows.push(h.clone());
        Cone::from_inequalities(self.rank, &rows).expect("rows share the ambient rank")
    }

    /// Indices of rays annihilated by `m`.
    pub fn rays_on(&self, m: &IntVec) -> Vec<usize> {
        (0..self.rays.len())
            .filter(|&i| m.dot(&self.rays[i]).is_zero())
            .collect()
    }

    /// All faces of a strongly convex cone, including `{0}` and the cone
    /// itself, as ray-index sets sorted by size then lexicographically.
    pub fn face_index_sets(&self) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..self.rays.len()).collect();
        let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
        seen.insert(all.clone());
        let mut queue = vec![all];
        let facet_sets: Vec<BTreeSet<usize>> = self
            .facets()
            .iter()
            .map(|f| self.rays_on(f).into_iter().collect())
            .collect();
        while let Some(face) = queue.pop() {
            for fs in &facet_sets {
                let sub: Vec<usize> = face.iter().copied().filter(|i| fs.contains(i)).collect();
                if sub.len() < face.len() && seen.insert(sub.clone()) {
                    queue.push(sub);
                }
            }
        }
        let mut out: Vec<Vec<usize>> = seen.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// All faces of a strongly convex cone.
    pub fn faces(&self) -> Vec<Cone> {
        self.face_index_sets()
            .into_iter()
            .map(|idx| self.sub_cone(&idx))
            .collect()
    }

    /// The cone on a subset of the rays; the subset must index a face.
    pub(crate) fn sub_cone(&self, idx: &[usize]) -> Cone {
        Cone::from_extreme_rays(self.rank, idx.iter().map(|&i| self.rays[i].clone()).collect())
    }

    /// Image under a linear map with `phi.cols() == rank`.
    pub fn image(&self, phi: &IntMat) -> Result<Cone> {
        if phi.cols() != self.rank {
            return Err(Error::DimensionMismatch {
                expected: self.rank,
                found: phi.cols(),
            });
        }
        Cone::new(phi.rows(), self.rays.iter().map(|r| phi.mul_vec(r)).collect())
    }
}

fn dual_description_of(rank: usize, gens: &[IntVec]) -> DualDescription {
    let g = solve_inequalities(rank, gens);
    DualDescription {
        lineality: g.lineality,
        facets: g.rays,
    }
}

/// The dual cone `{m : <m, u> >= 0 for all u in C}`.
pub fn dual_cone(c: &Cone) -> Cone {
    Cone::new(c.rank, c.dual_description().cone_generators()).expect("dual generators share the rank")
}

fn check_rank(a: &Cone, b: &Cone) -> Result<()> {
    if a.rank != b.rank {
        return Err(Error::RankMismatch {
            left: a.rank,
            right: b.rank,
        });
    }
    Ok(())
}

/// Intersection of two cones in the same ambient space.
pub fn intersect(c1: &Cone, c2: &Cone) -> Result<Cone> {
    check_rank(c1, c2)?;
    let mut rows = c1.dual_description().cone_generators();
    rows.extend(c2.dual_description().cone_generators());
    Cone::from_inequalities(c1.rank, &rows)
}

/// True iff `f` is a face of `c`.
///
/// Takes the facets of `c` vanishing on all of `f`; their common zero locus
/// cut with `c` is the smallest face containing `f`, which must equal `f`.
pub fn is_face(f: &Cone, c: &Cone) -> Result<bool> {
    check_rank(f, c)?;
    if !c.contains_cone(f) {
        return Ok(false);
    }
    let tight: Vec<&IntVec> = c
        .facets()
        .iter()
        .filter(|m| f.rays.iter().all(|r| m.dot(r).is_zero()))
        .collect();
    let smallest: Vec<&IntVec> = c
        .rays
        .iter()
        .filter(|g| tight.iter().all(|m| m.dot(g).is_zero()))
        .collect();
    Ok(smallest.into_iter().all(|g| f.contains(g)))
}

/// Basis of the fiber-product lattice `{(x1, x2) : phi1 x1 = phi2 x2}`.
pub(crate) fn fiber_product_basis(phi1: &IntMat, phi2: &IntMat) -> Result<Vec<IntVec>> {
    if phi1.rows() != phi2.rows() {
        return Err(Error::TargetMismatch {
            left: phi1.rows(),
            right: phi2.rows(),
        });
    }
    let stacked = phi1.hstack(&phi2.negated())?;
    Ok(kernel_basis(&stacked))
}

/// Coordinates of `(m1, m2)` restricted to the fiber-product lattice basis.
fn restrict_to_basis(basis: &[IntVec], m: &IntVec) -> IntVec {
    IntVec::new(basis.iter().map(|b| b.dot(m)).collect())
}

/// Fiber product `C1 ×_{C0} C2 = {(x1, x2) : x_i ∈ C_i, phi1 x1 = phi2 x2}`.
///
/// The result lives in the coordinates of the canonical basis returned by
/// [`crate::torus::lattice_fiber_product`]. Its dual is generated by the
/// restrictions of `C1∨ × 0` and `0 × C2∨`.
pub fn cone_fiber_product(c1: &Cone, c2: &Cone, phi1: &IntMat, phi2: &IntMat) -> Result<Cone> {
    let basis = fiber_product_basis(phi1, phi2)?;
    cone_fiber_product_in(&basis, c1, c2, phi1, phi2)
}

pub(crate) fn cone_fiber_product_in(
    basis: &[IntVec],
    c1: &Cone,
    c2: &Cone,
    phi1: &IntMat,
    phi2: &IntMat,
) -> Result<Cone> {
    if phi1.cols() != c1.rank {
        return Err(Error::DimensionMismatch {
            expected: c1.rank,
            found: phi1.cols(),
        });
    }
    if phi2.cols() != c2.rank {
        return Err(Error::DimensionMismatch {
            expected: c2.rank,
            found: phi2.cols(),
        });
    }
    let zeros1 = IntVec::zeros(c1.rank);
    let zeros2 = IntVec::zeros(c2.rank);
    let mut rows = Vec::new();
    for m in c1.dual_description().cone_generators() {
        rows.push(restrict_to_basis(basis, &m.concat(&zeros2)));
    }
    for m in c2.dual_description().cone_generators() {
        rows.push(restrict_to_basis(basis, &zeros1.concat(&m)));
    }
    Cone::from_inequalities(basis.len(), &rows)
}
