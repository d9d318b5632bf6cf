//! Fans given by their maximal cones, refinement checks, coarsest common
//! refinements, walls and fiber products of fans.

use std::collections::BTreeSet;

use num_traits::Signed;

use crate::cone::{cone_fiber_product_in, fiber_product_basis, intersect, is_face, Cone};
use crate::error::{Error, Result};
use crate::lattice::{primitive, IntMat, IntVec};

/// A fan stored by its maximal cones.
///
/// `max_cones` holds sorted index sets into the global `rays` list. Faces are
/// generated on demand.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fan {
    rank: usize,
    rays: Vec<IntVec>,
    max_cones: Vec<Vec<usize>>,
}

impl Fan {
    /// Builds a fan from explicit data, keeping the ray order as given.
    ///
    /// Rays must be nonzero and are made primitive; index sets are sorted and
    /// deduplicated. Fan axioms are not checked here, see [`validate_fan`].
    pub fn new(rank: usize, rays: Vec<IntVec>, max_cones: Vec<Vec<usize>>) -> Result<Fan> {
        let mut prim = Vec::with_capacity(rays.len());
        for r in rays {
            if r.dim() != rank {
                return Err(Error::DimensionMismatch {
                    expected: rank,
                    found: r.dim(),
                });
            }
            prim.push(primitive(&r)?);
        }
        let mut cones = Vec::with_capacity(max_cones.len());
        for mut c in max_cones {
            c.sort_unstable();
            c.dedup();
            if let Some(&bad) = c.iter().find(|&&i| i >= prim.len()) {
                return Err(Error::InvalidFan(format!("ray index {bad} out of range")));
            }
            cones.push(c);
        }
        Ok(Fan {
            rank,
            rays: prim,
            max_cones: cones,
        })
    }

    /// Canonical fan from a list of cones: cones contained in another are
    /// dropped, rays are the sorted union, cones sorted by index set.
    pub fn from_cones(rank: usize, cones: Vec<Cone>) -> Result<Fan> {
        for c in &cones {
            if c.rank() != rank {
                return Err(Error::RankMismatch {
                    left: rank,
                    right: c.rank(),
                });
            }
        }
        let unique: Vec<Cone> = cones.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
        let maximal: Vec<&Cone> = unique
            .iter()
            .enumerate()
            .filter(|&(i, c)| {
                !unique
                    .iter()
                    .enumerate()
                    .any(|(j, d)| j != i && d.contains_cone(c))
            })
            .map(|(_, c)| c)
            .collect();
        let rays: Vec<IntVec> = maximal
            .iter()
            .flat_map(|c| c.rays().iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let mut max_cones: Vec<Vec<usize>> = maximal
            .iter()
            .map(|c| {
                c.rays()
                    .iter()
                    .map(|r| rays.binary_search(r).expect("ray collected above"))
                    .collect()
            })
            .collect();
        max_cones.sort();
        Ok(Fan {
            rank,
            rays,
            max_cones,
        })
    }

    /// The fan whose only cone is `{0}`.
    pub fn trivial(rank: usize) -> Fan {
        Fan {
            rank,
            rays: Vec::new(),
            max_cones: vec![Vec::new()],
        }
    }

    /// A cone together with all its faces.
    pub fn from_cone(cone: &Cone) -> Fan {
        Fan::from_cones(cone.rank(), vec![cone.clone()]).expect("single cone has matching rank")
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn rays(&self) -> &[IntVec] {
        &self.rays
    }

    pub fn max_cones(&self) -> &[Vec<usize>] {
        &self.max_cones
    }

    /// The `i`-th maximal cone.
    pub fn cone(&self, i: usize) -> Cone {
        Cone::new(
            self.rank,
            self.max_cones[i].iter().map(|&k| self.rays[k].clone()).collect(),
        )
        .expect("fan rays share the ambient rank")
    }

    pub fn cones(&self) -> Vec<Cone> {
        (0..self.max_cones.len()).map(|i| self.cone(i)).collect()
    }

    /// Every cone of the fan, maximal or not, without repetition.
    pub fn all_cones(&self) -> Vec<Cone> {
        let mut set = BTreeSet::new();
        for c in self.cones() {
            set.extend(c.faces());
        }
        set.into_iter().collect()
    }

    /// Same fan in canonical form (see [`Fan::from_cones`]).
    pub fn canonical(&self) -> Result<Fan> {
        Fan::from_cones(self.rank, self.cones())
    }
}

/// First violation of the fan axioms found by [`validate_fan`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FanViolation {
    /// The cone contains a line.
    NotStronglyConvex { cone: usize },
    /// A listed ray is not an extreme ray of its cone.
    RedundantRay { cone: usize, ray: usize },
    /// The intersection of two cones is not a face of both.
    BadIntersection { first: usize, second: usize },
}

/// Verdict of [`validate_fan`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanValidation {
    pub valid: bool,
    pub violation: Option<FanViolation>,
}

/// Checks strong convexity of every maximal cone and that pairwise
/// intersections are faces of both cones.
pub fn validate_fan(f: &Fan) -> FanValidation {
    let fail = |v| FanValidation {
        valid: false,
        violation: Some(v),
    };
    let cones = f.cones();
    for (i, c) in cones.iter().enumerate() {
        if !c.is_strongly_convex() {
            return fail(FanViolation::NotStronglyConvex { cone: i });
        }
        if let Some(&k) = f.max_cones[i]
            .iter()
            .find(|&&k| c.rays().binary_search(&f.rays[k]).is_err())
        {
            return fail(FanViolation::RedundantRay { cone: i, ray: k });
        }
    }
    for i in 0..cones.len() {
        for j in i + 1..cones.len() {
            let meet = intersect(&cones[i], &cones[j]).expect("fan cones share the rank");
            let ok = is_face(&meet, &cones[i]).expect("same rank")
                && is_face(&meet, &cones[j]).expect("same rank");
            if !ok {
                return fail(FanViolation::BadIntersection {
                    first: i,
                    second: j,
                });
            }
        }
    }
    FanValidation {
        valid: true,
        violation: None,
    }
}

fn check_rank(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::RankMismatch { left: a, right: b });
    }
    Ok(())
}

/// Whether `f` refines `f0`: every cone of `f` lies in a cone of `f0` and
/// the supports agree.
///
/// Support equality is decided exactly. Each maximal cone of `f0` is split
/// recursively by the facet hyperplanes of the `f`-cones it contains; every
/// leaf cell then lies inside or outside each such cone, so one interior
/// point per leaf decides coverage.
pub fn is_refinement(f: &Fan, f0: &Fan) -> Result<bool> {
    check_rank(f.rank, f0.rank)?;
    let pieces = f.cones();
    let bases = f0.cones();
    if !pieces
        .iter()
        .all(|p| bases.iter().any(|b| b.contains_cone(p)))
    {
        return Ok(false);
    }
    for base in &bases {
        let inside: Vec<&Cone> = pieces.iter().filter(|p| base.contains_cone(p)).collect();
        let mut cuts: BTreeSet<IntVec> = BTreeSet::new();
        for p in &inside {
            for h in p.facets() {
                cuts.insert(h.sign_normalized());
            }
        }
        let cuts: Vec<IntVec> = cuts.into_iter().collect();
        if !cell_covered(base, &cuts, 0, &inside) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn cell_covered(cell: &Cone, cuts: &[IntVec], from: usize, pieces: &[&Cone]) -> bool {
    for (k, h) in cuts.iter().enumerate().skip(from) {
        let pos = cell.rays().iter().any(|r| h.dot(r).is_positive());
        let neg = cell.rays().iter().any(|r| h.dot(r).is_negative());
        if pos && neg {
            let upper = cell.intersect_halfspace(h);
            let lower = cell.intersect_halfspace(&-h);
            return cell_covered(&upper, cuts, k + 1, pieces)
                && cell_covered(&lower, cuts, k + 1, pieces);
        }
    }
    let sample = cell.interior_point();
    pieces.iter().any(|p| p.contains(&sample))
}

/// The fan `{σ ∩ σ' : σ ∈ f, σ' ∈ f_p, σ, σ' ⊆ σ0 for some σ0 ∈ f0}`.
pub fn coarsest_common_refinement(f: &Fan, f_p: &Fan, f0: &Fan) -> Result<Fan> {
    check_rank(f.rank, f_p.rank)?;
    check_rank(f.rank, f0.rank)?;
    if !is_refinement(f, f0)? || !is_refinement(f_p, f0)? {
        return Err(Error::NotARefinement);
    }
    let bases = f0.cones();
    let left = f.cones();
    let right = f_p.cones();
    let mut cones = Vec::new();
    for s in &left {
        for t in &right {
            if bases.iter().any(|b| b.contains_cone(s) && b.contains_cone(t)) {
                cones.push(intersect(s, t)?);
            }
        }
    }
    let out = Fan::from_cones(f.rank, cones)?;
    if !validate_fan(&out).valid {
        return Err(Error::InternalInvariant(
            "common refinement failed fan validation".into(),
        ));
    }
    Ok(out)
}

/// A codimension-one cone shared by two maximal cones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub cone: Cone,
    /// Indices into `max_cones` of the two adjacent cones.
    pub between: (usize, usize),
}

/// Walls of a pure full-dimensional simplicial fan.
pub fn walls(f: &Fan) -> Result<Vec<Wall>> {
    let cones = f.cones();
    for (i, c) in cones.iter().enumerate() {
        if c.rays().len() != f.rank || !c.is_simplicial() {
            return Err(Error::NotSimplicial(format!(
                "maximal cone {i} is not simplicial of dimension {}",
                f.rank
            )));
        }
    }
    let mut out = Vec::new();
    for i in 0..cones.len() {
        for j in i + 1..cones.len() {
            let common: Vec<usize> = f.max_cones[i]
                .iter()
                .copied()
                .filter(|k| f.max_cones[j].contains(k))
                .collect();
            if common.len() + 1 == f.rank {
                let rays = common.iter().map(|&k| f.rays[k].clone()).collect();
                out.push(Wall {
                    cone: Cone::from_extreme_rays(f.rank, rays),
                    between: (i, j),
                });
            }
        }
    }
    Ok(out)
}

/// Fiber product of fans together with the lattice it lives in.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanFiberProduct {
    pub fan: Fan,
    /// Basis of `N1 ×_{N0} N2 ⊆ N1 ⊕ N2`; fan coordinates refer to it.
    pub lattice_basis: Vec<IntVec>,
}

/// Fiber product `{σ1 ×_{σ0} σ2 : φ_i(σ_i) ⊆ σ0}` over all cones of the
/// three fans.
pub fn fan_fiber_product(
    f1: &Fan,
    f2: &Fan,
    f0: &Fan,
    phi1: &IntMat,
    phi2: &IntMat,
) -> Result<FanFiberProduct> {
    for (f, phi) in [(f1, phi1), (f2, phi2)] {
        if phi.cols() != f.rank {
            return Err(Error::DimensionMismatch {
                expected: f.rank,
                found: phi.cols(),
            });
        }
        if phi.rows() != f0.rank {
            return Err(Error::TargetMismatch {
                left: phi.rows(),
                right: f0.rank,
            });
        }
    }
    let basis = fiber_product_basis(phi1, phi2)?;
    let bases = f0.cones();
    let homes = |f: &Fan, phi: &IntMat| -> Result<Vec<(Cone, Vec<usize>)>> {
        let mut out = Vec::new();
        for c in f.all_cones() {
            let img = c.image(phi)?;
            let containing: Vec<usize> = (0..bases.len())
                .filter(|&i| bases[i].contains_cone(&img))
                .collect();
            if containing.is_empty() {
                return Err(Error::IncompatibleMap);
            }
            out.push((c, containing));
        }
        Ok(out)
    };
    let left = homes(f1, phi1)?;
    let right = homes(f2, phi2)?;
    let mut cones = Vec::new();
    for (c1, h1) in &left {
        for (c2, h2) in &right {
            if h1.iter().any(|i| h2.contains(i)) {
                cones.push(cone_fiber_product_in(&basis, c1, c2, phi1, phi2)?);
            }
        }
    }
    let fan = Fan::from_cones(basis.len(), cones)?;
    if !validate_fan(&fan).valid {
        return Err(Error::InternalInvariant(
            "fiber product failed fan validation".into(),
        ));
    }
    Ok(FanFiberProduct {
        fan,
        lattice_basis: basis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> IntVec {
        IntVec::from_i64(xs)
    }

    fn fan(rank: usize, rays: &[&[i64]], cones: &[&[usize]]) -> Fan {
        Fan::new(
            rank,
            rays.iter().map(|r| v(r)).collect(),
            cones.iter().map(|c| c.to_vec()).collect(),
        )
        .unwrap()
    }

    const DANILOV: [&[i64]; 4] = [&[1, 0, 0], &[0, 1, 0], &[0, 0, 1], &[1, 1, -1]];

    fn danilov_sigma() -> Fan {
        fan(3, &DANILOV, &[&[0, 1, 2], &[0, 1, 3]])
    }

    fn danilov_sigma_prime() -> Fan {
        fan(3, &DANILOV, &[&[0, 2, 3], &[1, 2, 3]])
    }

    fn danilov_base() -> Fan {
        fan(3, &DANILOV, &[&[0, 1, 2, 3]])
    }

    #[test]
    fn validation_examples() {
        assert!(validate_fan(&fan(2, &[&[1, 0], &[0, 1]], &[&[0, 1]])).valid);
        let overlap = fan(2, &[&[1, 0], &[0, 1], &[1, 1], &[1, -1]], &[&[0, 1], &[2, 3]]);
        let r = validate_fan(&overlap);
        assert_eq!(r.violation, Some(FanViolation::BadIntersection { first: 0, second: 1 }));
        assert!(validate_fan(&danilov_sigma()).valid);
        let line = fan(1, &[&[1], &[-1]], &[&[0, 1]]);
        assert_eq!(validate_fan(&line).violation, Some(FanViolation::NotStronglyConvex { cone: 0 }));
    }

    #[test]
    fn refinement_examples() {
        assert!(is_refinement(&danilov_sigma(), &danilov_base()).unwrap());
        assert!(is_refinement(&danilov_sigma_prime(), &danilov_base()).unwrap());
        assert!(is_refinement(&danilov_base(), &danilov_base()).unwrap());
        let partial = fan(3, &DANILOV, &[&[0, 1, 2]]);
        assert!(!is_refinement(&partial, &danilov_base()).unwrap());
        assert!(!is_refinement(&danilov_base(), &danilov_sigma()).unwrap());
    }

    #[test]
    fn danilov_common_refinement() {
        let t = coarsest_common_refinement(&danilov_sigma(), &danilov_sigma_prime(), &danilov_base())
            .unwrap();
        assert_eq!(t.max_cones().len(), 4);
        let u = v(&[1, 1, 0]);
        for c in t.cones() {
            assert!(c.is_simplicial());
            assert!(c.rays().contains(&u));
        }
        assert!(is_refinement(&t, &danilov_sigma()).unwrap());
        assert!(is_refinement(&t, &danilov_sigma_prime()).unwrap());
    }

    #[test]
    fn common_refinement_degenerate_cases() {
        let s = danilov_sigma();
        let canon = s.canonical().unwrap();
        assert_eq!(coarsest_common_refinement(&s, &s, &danilov_base()).unwrap(), canon);
        assert_eq!(coarsest_common_refinement(&s, &danilov_base(), &danilov_base()).unwrap(), canon);
        let partial = fan(3, &DANILOV, &[&[0, 1, 2]]);
        assert_eq!(
            coarsest_common_refinement(&partial, &s, &danilov_base()),
            Err(Error::NotARefinement)
        );
    }

    #[test]
    fn wall_examples() {
        let w = walls(&danilov_sigma()).unwrap();
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].cone.rays(), &[v(&[0, 1, 0]), v(&[1, 0, 0])]);
        assert_eq!(w[0].between, (0, 1));
        assert!(walls(&fan(2, &[&[1, 0], &[0, 1]], &[&[0, 1]])).unwrap().is_empty());
        let half = fan(2, &[&[1, 0], &[1, 1], &[-1, 1], &[-1, 0]], &[&[0, 1], &[1, 2], &[2, 3]]);
        assert_eq!(walls(&half).unwrap().len(), 2);
        assert!(matches!(walls(&danilov_base()), Err(Error::NotSimplicial(_))));
    }

    #[test]
    fn fiber_product_identity_is_diagonal() {
        let f = danilov_sigma();
        let id = IntMat::identity(3);
        let fp = fan_fiber_product(&f, &f, &f, &id, &id).unwrap();
        assert_eq!(fp.lattice_basis.len(), 3);
        assert_eq!(fp.fan.max_cones().len(), 2);
    }

    #[test]
    fn fiber_product_of_doubling_maps() {
        let f = fan(1, &[&[1]], &[&[0]]);
        let two = IntMat::from_i64_rows(1, &[vec![2]]).unwrap();
        let fp = fan_fiber_product(&f, &f, &f, &two, &two).unwrap();
        assert_eq!(fp.lattice_basis, vec![v(&[1, 1])]);
        assert_eq!(fp.fan.rays(), &[v(&[1])]);
    }

    #[test]
    fn fiber_product_generic_fiber() {
        // Upper half-plane fan over the line by projection to x.
        let f1 = fan(2, &[&[1, 0], &[0, 1], &[-1, 0]], &[&[0, 1], &[1, 2]]);
        let f0 = fan(1, &[&[1], &[-1]], &[&[0], &[1]]);
        let phi1 = IntMat::from_i64_rows(2, &[vec![1, 0]]).unwrap();
        let phi2 = IntMat::zeros(1, 0);
        let fp = fan_fiber_product(&f1, &Fan::trivial(0), &f0, &phi1, &phi2).unwrap();
        assert_eq!(fp.lattice_basis, vec![v(&[0, 1])]);
        assert_eq!(fp.fan.rays(), &[v(&[1])]);
        assert_eq!(fp.fan.max_cones(), &[vec![0]]);
    }

    #[test]
    fn fiber_product_rejects_incompatible_maps() {
        let f = fan(1, &[&[1]], &[&[0]]);
        let neg = IntMat::from_i64_rows(1, &[vec![-1]]).unwrap();
        let id = IntMat::identity(1);
        assert_eq!(fan_fiber_product(&f, &f, &f, &neg, &id), Err(Error::IncompatibleMap));
    }
}
