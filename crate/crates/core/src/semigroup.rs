//! Affine semigroups `Z≥0·A` in a lattice `M`: Hilbert bases of dual cones,
//! membership with certificates, sums and saturation.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::cone::{dual_cone, intersect, solve_inequalities, Cone};
use crate::error::{Error, Result};
use crate::lattice::{
    hermite_normal_form, rank_of_rows, saturated_span_basis, scaled_inverse, smith_normal_form,
    solve_rational, unimodular_inverse, IntMat, IntVec,
};

/// Largest ambient rank accepted by the Hilbert basis routines.
pub const MAX_HILBERT_RANK: usize = 6;

/// The semigroup generated by a finite set of lattice points.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AffineSemigroup {
    rank: usize,
    generators: Vec<IntVec>,
}

impl AffineSemigroup {
    /// Deduplicates, drops the zero vector and sorts the generators.
    pub fn new(rank: usize, generators: Vec<IntVec>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for g in generators {
            if g.dim() != rank {
                return Err(Error::DimensionMismatch {
                    expected: rank,
                    found: g.dim(),
                });
            }
            if !g.is_zero() {
                set.insert(g);
            }
        }
        Ok(AffineSemigroup {
            rank,
            generators: set.into_iter().collect(),
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn generators(&self) -> &[IntVec] {
        &self.generators
    }

    pub fn contains(&self, m: &IntVec) -> Result<bool> {
        Ok(matches!(member(self, m)?, Membership::Member(_)))
    }
}

/// Outcome of a membership query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    /// Nonnegative coefficients, aligned with the semigroup's generators,
    /// whose combination is the queried point.
    Member(Vec<BigInt>),
    /// Not a member. `separating` is a functional nonnegative on every
    /// generator and negative on the point, when the obstruction is
    /// geometric rather than arithmetic.
    Absent { separating: Option<IntVec> },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member(_))
    }
}

fn check_hilbert_rank(rank: usize) -> Result<()> {
    if rank > MAX_HILBERT_RANK {
        return Err(Error::RankTooLarge {
            rank,
            max: MAX_HILBERT_RANK,
        });
    }
    Ok(())
}

/// Hilbert basis of `C∨ ∩ M` for a strongly convex cone `C`.
///
/// When `C` is not full-dimensional the dual semigroup contains the
/// lattice `C^⊥ ∩ M`; the result then lists both signs of a basis of that
/// lattice together with lifts of the Hilbert basis of the pointed quotient.
pub fn hilbert_basis(c: &Cone) -> Result<AffineSemigroup> {
    check_hilbert_rank(c.rank())?;
    if !c.is_strongly_convex() {
        return Err(Error::NotStronglyConvex);
    }
    let n = c.rank();
    let lineality = &c.dual_description().lineality;
    if lineality.is_empty() {
        return AffineSemigroup::new(n, cone_hilbert_basis(&dual_cone(c))?);
    }
    let complement = lattice_complement(lineality, n);
    let rows: Vec<IntVec> = c
        .rays()
        .iter()
        .map(|r| IntVec::new(complement.iter().map(|w| w.dot(r)).collect()))
        .collect();
    let quotient = Cone::from_inequalities(complement.len(), &rows)?;
    let mut gens = Vec::new();
    for h in cone_hilbert_basis(&quotient)? {
        let mut x = IntVec::zeros(n);
        for (coef, w) in h.entries().iter().zip(&complement) {
            x = &x + &w.scale(coef);
        }
        gens.push(x);
    }
    for l in lineality {
        gens.push(l.clone());
        gens.push(-l);
    }
    AffineSemigroup::new(n, gens)
}

/// Vectors completing a basis of a saturated sublattice to a basis of `Z^n`.
fn lattice_complement(sub: &[IntVec], n: usize) -> Vec<IntVec> {
    let b = IntMat::from_rows(n, sub).expect("sublattice rows have width n");
    let hnf = hermite_normal_form(&b.transpose());
    let q = unimodular_inverse(&hnf.u)
        .expect("hermite transform is unimodular")
        .transpose();
    (sub.len()..n).map(|i| q.row(i)).collect()
}

/// Hilbert basis of `K ∩ Z^n` for a strongly convex cone `K`.
///
/// Works in a lattice basis of `span(K) ∩ Z^n`, so `K` need not be
/// full-dimensional.
pub fn cone_hilbert_basis(k: &Cone) -> Result<Vec<IntVec>> {
    check_hilbert_rank(k.rank())?;
    if !k.is_strongly_convex() {
        return Err(Error::NotStronglyConvex);
    }
    if k.rays().is_empty() {
        return Ok(Vec::new());
    }
    let n = k.rank();
    let basis = saturated_span_basis(k.rays(), n);
    let d = basis.len();
    let to_ambient = IntMat::from_cols(n, &basis).expect("basis vectors have width n");
    let local_rays: Vec<IntVec> = k
        .rays()
        .iter()
        .map(|r| {
            let y = solve_rational(&to_ambient, r).expect("ray lies in its own span");
            IntVec::new(y.into_iter().map(|q| q.to_integer()).collect())
        })
        .collect();
    let local = Cone::new(d, local_rays)?;
    let mut out: Vec<IntVec> = full_dimensional_hilbert_basis(&local)
        .into_iter()
        .map(|y| to_ambient.mul_vec(&y))
        .collect();
    out.sort();
    Ok(out)
}

/// Hilbert basis of a full-dimensional strongly convex cone.
fn full_dimensional_hilbert_basis(k: &Cone) -> Vec<IntVec> {
    let d = k.rank();
    let facet_sets: Vec<BTreeSet<usize>> = k
        .facets()
        .iter()
        .map(|f| k.rays_on(f).into_iter().collect())
        .collect();
    let all: Vec<usize> = (0..k.rays().len()).collect();
    let simplices = pulling_triangulation(k.rays(), &facet_sets, &all, d);

    let mut candidates: BTreeSet<IntVec> = k.rays().iter().cloned().collect();
    for s in &simplices {
        let gens: Vec<IntVec> = s.iter().map(|&i| k.rays()[i].clone()).collect();
        for p in parallelepiped_points(&gens) {
            if !p.is_zero() {
                candidates.insert(p);
            }
        }
    }
    let candidates: Vec<IntVec> = candidates.into_iter().collect();
    candidates
        .iter()
        .filter(|x| {
            !candidates
                .iter()
                .any(|c| c != *x && k.contains(&(*x - c)))
        })
        .cloned()
        .collect()
}

/// Pulling triangulation of the face spanned by `face` (ray indices).
///
/// Cones from the first ray over the facets of the face not containing it,
/// recursively. Facets of faces are obtained by cutting with the facets of
/// the whole cone.
fn pulling_triangulation(
    rays: &[IntVec],
    facet_sets: &[BTreeSet<usize>],
    face: &[usize],
    face_dim: usize,
) -> Vec<Vec<usize>> {
    if face.len() == face_dim {
        return vec![face.to_vec()];
    }
    let apex = face[0];
    let mut subfaces: BTreeSet<Vec<usize>> = BTreeSet::new();
    for fs in facet_sets {
        if fs.contains(&apex) {
            continue;
        }
        let sub: Vec<usize> = face.iter().copied().filter(|i| fs.contains(i)).collect();
        if sub.len() + 1 < face_dim {
            continue;
        }
        let sub_rays: Vec<IntVec> = sub.iter().map(|&i| rays[i].clone()).collect();
        if rank_of_rows(&sub_rays, rays[0].dim()) == face_dim - 1 {
            subfaces.insert(sub);
        }
    }
    let mut out = Vec::new();
    for sub in subfaces {
        for mut simplex in pulling_triangulation(rays, facet_sets, &sub, face_dim - 1) {
            simplex.push(apex);
            simplex.sort_unstable();
            out.push(simplex);
        }
    }
    out
}

/// Lattice points of the half-open parallelepiped `{Σ t_i g_i : 0 ≤ t_i < 1}`
/// for linearly independent `g_1..g_d` spanning `Q^d`.
fn parallelepiped_points(gens: &[IntVec]) -> Vec<IntVec> {
    let d = gens.len();
    let v = IntMat::from_cols(d, gens).expect("generators have width d");
    let snf = smith_normal_form(&v);
    let u_inv = unimodular_inverse(&snf.u).expect("smith transform is unimodular");
    let (adj, det) = scaled_inverse(&v).expect("simplex generators are independent");
    let factors: Vec<BigInt> = snf.invariant_factors.clone();
    let mut out = Vec::new();
    let mut e = vec![BigInt::zero(); d];
    loop {
        let x = u_inv.mul_vec(&IntVec::new(e.clone()));
        let lambda = adj.mul_vec(&x);
        let floors = IntVec::new(lambda.entries().iter().map(|l| l.div_floor(&det)).collect());
        out.push(&x - &v.mul_vec(&floors));
        // Odometer over the coset representatives.
        let mut i = 0;
        loop {
            if i == d {
                return out;
            }
            e[i] += 1;
            if e[i] < factors[i] {
                break;
            }
            e[i] = BigInt::zero();
            i += 1;
        }
    }
}

/// Decides `m ∈ S` exactly.
///
/// Generators outside the lineality space of `Cone(S)` are handled by a
/// depth-first search bounded by a functional that is strictly positive on
/// them (the sum of the facet normals); generators inside the lineality
/// space generate a group, whose membership is an integer linear system.
pub fn member(s: &AffineSemigroup, m: &IntVec) -> Result<Membership> {
    if m.dim() != s.rank {
        return Err(Error::DimensionMismatch {
            expected: s.rank,
            found: m.dim(),
        });
    }
    let n = s.rank;
    let gens = &s.generators;
    if gens.is_empty() {
        return Ok(if m.is_zero() {
            Membership::Member(Vec::new())
        } else {
            Membership::Absent { separating: None }
        });
    }
    let cone = Cone::new(n, gens.clone())?;
    let dual = cone.dual_description();
    for l in &dual.lineality {
        let t = l.dot(m);
        if !t.is_zero() {
            let sep = if t.is_positive() { -l } else { l.clone() };
            return Ok(Membership::Absent {
                separating: Some(sep),
            });
        }
    }
    if let Some(f) = dual.facets.iter().find(|f| f.dot(m).is_negative()) {
        return Ok(Membership::Absent {
            separating: Some(f.clone()),
        });
    }

    let ell = dual
        .facets
        .iter()
        .fold(IntVec::zeros(n), |acc, f| &acc + f);
    let (group_idx, search_idx): (Vec<usize>, Vec<usize>) =
        (0..gens.len()).partition(|&i| ell.dot(&gens[i]).is_zero());
    let group = GroupPart::new(n, group_idx.iter().map(|&i| gens[i].clone()).collect());

    let mut search = Search {
        cone: &cone,
        ell: &ell,
        gens: search_idx.iter().map(|&i| gens[i].clone()).collect(),
        weights: search_idx.iter().map(|&i| ell.dot(&gens[i])).collect(),
        group: &group,
        failed: HashSet::new(),
        path: Vec::new(),
    };
    match search.run(m.clone(), 0) {
        Some(group_coeffs) => {
            let mut coeffs = vec![BigInt::zero(); gens.len()];
            for &j in &search.path {
                coeffs[search_idx[j]] += 1;
            }
            for (k, c) in group_coeffs.into_iter().enumerate() {
                coeffs[group_idx[k]] += c;
            }
            Ok(Membership::Member(coeffs))
        }
        None => Ok(Membership::Absent { separating: None }),
    }
}

struct Search<'a> {
    cone: &'a Cone,
    ell: &'a IntVec,
    gens: Vec<IntVec>,
    weights: Vec<BigInt>,
    group: &'a GroupPart,
    failed: HashSet<(IntVec, usize)>,
    path: Vec<usize>,
}

impl Search<'_> {
    /// Returns the group coefficients of the final remainder on success,
    /// leaving the chosen generator indices in `self.path`.
    fn run(&mut self, rem: IntVec, start: usize) -> Option<Vec<BigInt>> {
        if let Some(c) = self.group.solve(&rem) {
            return Some(c);
        }
        if self.failed.contains(&(rem.clone(), start)) {
            return None;
        }
        let level = self.ell.dot(&rem);
        for i in start..self.gens.len() {
            if self.weights[i] > level {
                continue;
            }
            let next = &rem - &self.gens[i];
            if !self.cone.contains(&next) {
                continue;
            }
            self.path.push(i);
            if let Some(c) = self.run(next, i) {
                return Some(c);
            }
            self.path.pop();
        }
        self.failed.insert((rem, start));
        None
    }
}

/// Generators lying in the lineality space of their cone. They generate a
/// group: membership reduces to an integer linear system, and a strictly
/// positive relation turns integer coefficients into nonnegative ones.
struct GroupPart {
    gens: Vec<IntVec>,
    hnf_rows: Vec<IntVec>,
    pivots: Vec<usize>,
    transform: IntMat,
    positive_relation: Vec<BigInt>,
}

impl GroupPart {
    fn new(n: usize, gens: Vec<IntVec>) -> Self {
        if gens.is_empty() {
            return GroupPart {
                gens,
                hnf_rows: Vec::new(),
                pivots: Vec::new(),
                transform: IntMat::zeros(0, 0),
                positive_relation: Vec::new(),
            };
        }
        let g = IntMat::from_rows(n, &gens).expect("generators have width n");
        let hnf = hermite_normal_form(&g);
        let hnf_rows = (0..hnf.rank).map(|i| hnf.h.row(i)).collect();
        let positive_relation = positive_relation(&gens, n);
        GroupPart {
            gens,
            hnf_rows,
            pivots: hnf.pivots,
            transform: hnf.u,
            positive_relation,
        }
    }

    /// Nonnegative coefficients expressing `x` in the generators, if any.
    fn solve(&self, x: &IntVec) -> Option<Vec<BigInt>> {
        if self.gens.is_empty() {
            return x.is_zero().then(Vec::new);
        }
        let mut rem = x.clone();
        let mut q = vec![BigInt::zero(); self.transform.rows()];
        for (i, (row, &p)) in self.hnf_rows.iter().zip(&self.pivots).enumerate() {
            let (k, r) = rem[p].div_rem(&row[p]);
            if !r.is_zero() {
                return None;
            }
            rem = &rem - &row.scale(&k);
            q[i] = k;
        }
        if !rem.is_zero() {
            return None;
        }
        // Integer coefficients a = q^T U.
        let mut a: Vec<BigInt> = (0..self.gens.len())
            .map(|j| {
                (0..q.len()).fold(BigInt::zero(), |acc, i| acc + &q[i] * &self.transform[(i, j)])
            })
            .collect();
        let shift = a
            .iter()
            .zip(&self.positive_relation)
            .filter(|(c, _)| c.is_negative())
            .map(|(c, r)| (-c).div_ceil(r))
            .max()
            .unwrap_or_else(BigInt::zero);
        for (c, r) in a.iter_mut().zip(&self.positive_relation) {
            *c += &shift * r;
        }
        Some(a)
    }
}

/// A relation `Σ r_g g = 0` with every `r_g >= 1`, for generators whose
/// cone is a linear space.
fn positive_relation(gens: &[IntVec], n: usize) -> Vec<BigInt> {
    let k = gens.len();
    let mut rows: Vec<IntVec> = (0..k).map(|i| IntVec::unit(k, i)).collect();
    for j in 0..n {
        let row = IntVec::new(gens.iter().map(|g| g[j].clone()).collect());
        rows.push(row.clone());
        rows.push(-&row);
    }
    let sol = solve_inequalities(k, &rows);
    let sum = sol.rays.iter().fold(IntVec::zeros(k), |acc, r| &acc + r);
    debug_assert!(sum.entries().iter().all(|x| x.is_positive()));
    sum.into_entries()
}

/// Semigroup generated by the union of both generator sets.
pub fn semigroup_sum(s1: &AffineSemigroup, s2: &AffineSemigroup) -> Result<AffineSemigroup> {
    if s1.rank != s2.rank {
        return Err(Error::RankMismatch {
            left: s1.rank,
            right: s2.rank,
        });
    }
    let mut gens = s1.generators.clone();
    gens.extend(s2.generators.iter().cloned());
    AffineSemigroup::new(s1.rank, gens)
}

/// Verdict with an optional witness lattice point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessVerdict {
    pub holds: bool,
    pub witness: Option<IntVec>,
}

impl WitnessVerdict {
    fn pass() -> Self {
        WitnessVerdict {
            holds: true,
            witness: None,
        }
    }

    fn fail(w: IntVec) -> Self {
        WitnessVerdict {
            holds: false,
            witness: Some(w),
        }
    }
}

/// Whether `S = Cone(S) ∩ M`; the witness is a Hilbert basis element of the
/// saturation missing from `S`.
pub fn is_saturated(s: &AffineSemigroup) -> Result<WitnessVerdict> {
    check_hilbert_rank(s.rank)?;
    let cone = Cone::new(s.rank, s.generators.clone())?;
    for h in cone_hilbert_basis(&cone)? {
        if !member(s, &h)?.is_member() {
            return Ok(WitnessVerdict::fail(h));
        }
    }
    Ok(WitnessVerdict::pass())
}

/// Tests `S_σ + S_σ' = S_{σ∩σ'}` through the Hilbert basis of the right side.
pub fn check_semigroup_sum_equality(sigma: &Cone, sigma_p: &Cone) -> Result<WitnessVerdict> {
    let meet = intersect(sigma, sigma_p)?;
    let target = hilbert_basis(&meet)?;
    let sum = semigroup_sum(&hilbert_basis(sigma)?, &hilbert_basis(sigma_p)?)?;
    for h in target.generators() {
        if !member(&sum, h)?.is_member() {
            return Ok(WitnessVerdict::fail(h.clone()));
        }
    }
    Ok(WitnessVerdict::pass())
}

/// Returns `m0 ∈ S_σ` with `m0 + m1` and `m0 + m2` in `S_σ`.
///
/// `m0 = l·m'` where `m'` is the sum of the facet normals of `σ`, interior to
/// `σ∨`, and `l` is the least nonnegative integer that works.
pub fn find_interior_shift(sigma: &Cone, m1: &IntVec, m2: &IntVec) -> Result<IntVec> {
    if !sigma.is_strongly_convex() {
        return Err(Error::NotStronglyConvex);
    }
    for m in [m1, m2] {
        if m.dim() != sigma.rank() {
            return Err(Error::DimensionMismatch {
                expected: sigma.rank(),
                found: m.dim(),
            });
        }
    }
    let interior = sigma
        .facets()
        .iter()
        .fold(IntVec::zeros(sigma.rank()), |acc, f| &acc + f);
    let mut scale = BigInt::zero();
    for u in sigma.rays() {
        let step = interior.dot(u);
        for m in [m1, m2] {
            let deficit = -m.dot(u);
            if deficit.is_positive() {
                scale = scale.max(deficit.div_ceil(&step));
            }
        }
    }
    Ok(interior.scale(&scale))
}

impl AffineSemigroup {
    /// Evaluates a coefficient vector against the generators.
    pub fn combine(&self, coeffs: &[BigInt]) -> IntVec {
        self.generators
            .iter()
            .zip(coeffs)
            .fold(IntVec::zeros(self.rank), |acc, (g, c)| &acc + &g.scale(c))
    }
}
