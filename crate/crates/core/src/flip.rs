//! Wall relations, local flip fans, flop detection and the terminal and
//! smooth classifications.
//!
//! Indices into a [`WallRelation`] are zero-based: ray `u_1` of the usual
//! notation is index 0.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::cone::Cone;
use crate::error::{Error, Result};
use crate::fan::Fan;
use crate::lattice::{kernel_basis, primitive, rank_of_rows, scaled_inverse, solve_rational, IntMat, IntVec};

/// The relation `Σ b_i u_i = 0` among `n + 1` primitive rays in `Z^n`.
///
/// Normalized so that the coefficients have gcd 1 and the last one is
/// positive; there is at least one negative and one positive coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WallRelation {
    rays: Vec<IntVec>,
    b: Vec<BigInt>,
    j_minus: Vec<usize>,
    j_zero: Vec<usize>,
    j_plus: Vec<usize>,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidWallRelation(msg.into())
}

impl WallRelation {
    /// Validates explicit rays and coefficients.
    pub fn new(rays: Vec<IntVec>, b: Vec<BigInt>) -> Result<Self> {
        if rays.len() < 2 || b.len() != rays.len() {
            return Err(invalid("need n + 1 rays and as many coefficients, n >= 1"));
        }
        let n = rays.len() - 1;
        for r in &rays {
            if r.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.dim(),
                });
            }
            if r.is_zero() || primitive(r)? != *r {
                return Err(invalid(format!("ray {r} is not primitive")));
            }
        }
        if rank_of_rows(&rays, n) != n {
            return Err(invalid("rays do not span the lattice"));
        }
        let sum = rays
            .iter()
            .zip(&b)
            .fold(IntVec::zeros(n), |acc, (r, c)| &acc + &r.scale(c));
        if !sum.is_zero() {
            return Err(invalid("coefficients do not annihilate the rays"));
        }
        let g = b.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
        if !g.is_one() {
            return Err(invalid("coefficients are not coprime"));
        }
        if !b[n].is_positive() {
            return Err(invalid("last coefficient must be positive"));
        }
        let j_minus: Vec<usize> = (0..=n).filter(|&i| b[i].is_negative()).collect();
        let j_zero: Vec<usize> = (0..=n).filter(|&i| b[i].is_zero()).collect();
        let j_plus: Vec<usize> = (0..=n).filter(|&i| b[i].is_positive()).collect();
        if j_minus.is_empty() {
            return Err(invalid("no negative coefficient: the rays span a line"));
        }
        Ok(WallRelation {
            rays,
            b,
            j_minus,
            j_zero,
            j_plus,
        })
    }

    /// Computes the relation of `n + 1` rays spanning `Z^n`.
    pub fn from_rays(rays: Vec<IntVec>) -> Result<Self> {
        if rays.len() < 2 {
            return Err(invalid("need at least two rays"));
        }
        let n = rays.len() - 1;
        let rays = rays
            .iter()
            .map(primitive)
            .collect::<Result<Vec<IntVec>>>()?;
        let m = IntMat::from_cols(n, &rays)?;
        let kernel = kernel_basis(&m);
        if kernel.len() != 1 {
            return Err(invalid("rays do not span the lattice"));
        }
        let mut b = kernel[0].clone();
        if b[n].is_negative() {
            b = -&b;
        }
        if b[n].is_zero() {
            return Err(invalid("last ray does not take part in the relation"));
        }
        WallRelation::new(rays, b.into_entries())
    }

    /// Relation with `u_i = e_i` for `i <= n` and `u_{n+1} = −Σ b_i e_i`,
    /// which requires `b_{n+1} = 1`.
    pub fn from_coefficients(b: &[BigInt]) -> Result<Self> {
        if b.len() < 2 {
            return Err(invalid("need at least two coefficients"));
        }
        let n = b.len() - 1;
        if !b[n].is_one() {
            return Err(invalid(
                "the standard-basis construction needs the last coefficient equal to 1",
            ));
        }
        let mut rays: Vec<IntVec> = (0..n).map(|i| IntVec::unit(n, i)).collect();
        rays.push(IntVec::new(b[..n].iter().map(|x| -x).collect()));
        if rays[n].is_zero() || primitive(&rays[n])? != rays[n] {
            return Err(invalid("the derived last ray is not primitive"));
        }
        WallRelation::new(rays, b.to_vec())
    }

    /// [`WallRelation::from_coefficients`] on machine integers.
    pub fn from_i64(b: &[i64]) -> Result<Self> {
        let big: Vec<BigInt> = b.iter().map(|&x| BigInt::from(x)).collect();
        WallRelation::from_coefficients(&big)
    }

    /// Lattice rank `n`.
    pub fn n(&self) -> usize {
        self.rays.len() - 1
    }

    pub fn rays(&self) -> &[IntVec] {
        &self.rays
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.b
    }

    /// Coefficients as machine integers, when they fit.
    pub fn coefficients_i64(&self) -> Option<Vec<i64>> {
        self.b.iter().map(ToPrimitive::to_i64).collect()
    }

    pub fn j_minus(&self) -> &[usize] {
        &self.j_minus
    }

    pub fn j_zero(&self) -> &[usize] {
        &self.j_zero
    }

    pub fn j_plus(&self) -> &[usize] {
        &self.j_plus
    }

    /// The cone on all rays except `u_j`.
    pub fn sigma(&self, j: usize) -> Cone {
        let rays = (0..self.rays.len())
            .filter(|&i| i != j)
            .map(|i| self.rays[i].clone())
            .collect();
        Cone::new(self.n(), rays).expect("rays share the lattice rank")
    }

    /// The cone on all `n + 1` rays.
    pub fn sigma0(&self) -> Cone {
        Cone::new(self.n(), self.rays.clone()).expect("rays share the lattice rank")
    }

    /// Primitive generator of `−Σ_{i ∈ J−} b_i u_i`, the ray every cone of the
    /// common refinement contains.
    pub fn exceptional_ray(&self) -> IntVec {
        let u = self
            .j_minus
            .iter()
            .fold(IntVec::zeros(self.n()), |acc, &i| &acc - &self.rays[i].scale(&self.b[i]));
        primitive(&u).expect("a nonempty negative part gives a nonzero vector")
    }
}

impl fmt::Display for WallRelation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", IntVec::new(self.b.clone()))
    }
}

fn ensure_simplicial_full(c: &Cone, n: usize, which: &str) -> Result<()> {
    if !c.is_simplicial() {
        return Err(Error::NotSimplicial(format!("{which} cone has dependent rays")));
    }
    if c.rays().len() != n {
        return Err(Error::NotAdjacent(format!("{which} cone is not full-dimensional")));
    }
    Ok(())
}

/// Relation of two full-dimensional simplicial cones sharing a facet.
///
/// Rays are ordered as the wall rays (sorted), then the two opposite rays
/// (sorted); the last two coefficients are both positive.
pub fn wall_relation(sigma_a: &Cone, sigma_b: &Cone) -> Result<WallRelation> {
    if sigma_a.rank() != sigma_b.rank() {
        return Err(Error::RankMismatch {
            left: sigma_a.rank(),
            right: sigma_b.rank(),
        });
    }
    let n = sigma_a.rank();
    ensure_simplicial_full(sigma_a, n, "first")?;
    ensure_simplicial_full(sigma_b, n, "second")?;
    let common: Vec<IntVec> = sigma_a
        .rays()
        .iter()
        .filter(|r| sigma_b.rays().contains(r))
        .cloned()
        .collect();
    if common.len() + 1 != n {
        return Err(Error::NotAdjacent(format!(
            "cones share {} rays, expected {}",
            common.len(),
            n - 1
        )));
    }
    let a = sigma_a.rays().iter().find(|r| !common.contains(r)).expect("one ray left");
    let b = sigma_b.rays().iter().find(|r| !common.contains(r)).expect("one ray left");
    let mut ends = [a.clone(), b.clone()];
    ends.sort();
    let mut rays = common;
    rays.extend(ends);
    let w = WallRelation::from_rays(rays)?;
    if !w.b[n - 1].is_positive() {
        return Err(Error::NotAdjacent(
            "cones lie on the same side of their common facet".into(),
        ));
    }
    Ok(w)
}

/// The two local fans of a flip and the cone they subdivide.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlipFans {
    /// Maximal cones `σ_j` for `j ∈ J+`.
    pub sigma: Fan,
    /// Maximal cones `σ_i` for `i ∈ J−`.
    pub sigma_prime: Fan,
    pub sigma0: Cone,
}

/// Builds `Σ = {σ_j : j ∈ J+}` and `Σ' = {σ_i : i ∈ J−}`.
pub fn flip_fans(w: &WallRelation) -> Result<FlipFans> {
    if w.j_minus.len() < 2 {
        return Err(Error::NotAFlippingWall);
    }
    let sigma0 = w.sigma0();
    if !sigma0.is_strongly_convex() {
        return Err(Error::NotStronglyConvex);
    }
    let n = w.n();
    let sigma = Fan::from_cones(n, w.j_plus.iter().map(|&j| w.sigma(j)).collect())?;
    let sigma_prime = Fan::from_cones(n, w.j_minus.iter().map(|&i| w.sigma(i)).collect())?;
    Ok(FlipFans {
        sigma,
        sigma_prime,
        sigma0,
    })
}

/// True iff all rays lie on an affine hyperplane `<m, ·> = 1`.
pub fn is_flop(w: &WallRelation) -> bool {
    let m = IntMat::from_rows(w.n(), &w.rays).expect("rays share the lattice rank");
    let ones = IntVec::new(vec![BigInt::one(); w.rays.len()]);
    solve_rational(&m, &ones).is_some()
}

/// Outcome of [`classify_terminal_3d`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TerminalClass {
    /// `(−a, −(r−a), r, 1)` up to swapping the first two coefficients.
    TypeA { a: i64, r: i64 },
    /// `(−a, −1, r, 1)` up to swapping the first two coefficients.
    TypeB { a: i64, r: i64 },
    /// `(−1, −1, 1, 1)`.
    Flop,
    Unclassified,
}

fn coprime_pair(a: i64, r: i64) -> bool {
    0 < a && a < r && a.gcd(&r) == 1
}

fn match_type_b(b1: i64, b2: i64, b3: i64) -> Option<TerminalClass> {
    (b2 == -1 && coprime_pair(-b1, b3)).then_some(TerminalClass::TypeB { a: -b1, r: b3 })
}

fn match_type_a(b1: i64, b2: i64, b3: i64) -> Option<TerminalClass> {
    (b1 + b2 + b3 == 0 && coprime_pair(-b1, b3)).then_some(TerminalClass::TypeA { a: -b1, r: b3 })
}

/// Pattern-matches a three-dimensional relation against the terminal
/// flip and flop forms.
///
/// Requires `n = 3`, `u_1, u_2, u_3` a lattice basis and `b_4 = 1`. The
/// coefficients do not depend on the lattice basis, so no change of basis is
/// needed. After the flop, forms are tried in the order type B, type A,
/// then both again with the first two coefficients swapped.
pub fn classify_terminal_3d(w: &WallRelation) -> Result<TerminalClass> {
    if w.n() != 3 {
        return Err(Error::PreconditionFailed(format!(
            "terminal classification needs n = 3, got {}",
            w.n()
        )));
    }
    let base = IntMat::from_rows(3, &w.rays[..3])?;
    if !base.determinant().abs().is_one() {
        return Err(Error::PreconditionFailed(
            "the first three rays are not a lattice basis".into(),
        ));
    }
    if !w.b[3].is_one() {
        return Err(Error::PreconditionFailed("b_4 must equal 1".into()));
    }
    let Some(b) = w.coefficients_i64() else {
        return Ok(TerminalClass::Unclassified);
    };
    let (b1, b2, b3) = (b[0], b[1], b[2]);
    if (b1, b2, b3) == (-1, -1, 1) {
        return Ok(TerminalClass::Flop);
    }
    Ok(match_type_b(b1, b2, b3)
        .or_else(|| match_type_a(b1, b2, b3))
        .or_else(|| match_type_b(b2, b1, b3))
        .or_else(|| match_type_a(b2, b1, b3))
        .unwrap_or(TerminalClass::Unclassified))
}

/// Nonzero lattice points of `Conv(0, rays)` with their barycentric weight
/// sum, scaled: `(point, Σλ_i · D, D)`.
fn simplex_points(c: &Cone) -> Result<Vec<(IntVec, BigInt, BigInt)>> {
    let n = c.rank();
    if !c.is_simplicial() || c.rays().len() != n {
        return Err(Error::NotSimplicial(
            "expected a simplicial cone of full rank".into(),
        ));
    }
    let m = IntMat::from_cols(n, c.rays())?;
    let (adj, det) = scaled_inverse(&m).expect("independent rays");
    let mut lo = vec![BigInt::zero(); n];
    let mut hi = vec![BigInt::zero(); n];
    for r in c.rays() {
        for k in 0..n {
            lo[k] = lo[k].clone().min(r[k].clone());
            hi[k] = hi[k].clone().max(r[k].clone());
        }
    }
    let mut out = Vec::new();
    let mut p = lo.clone();
    loop {
        let point = IntVec::new(p.clone());
        if !point.is_zero() {
            let lambda = adj.mul_vec(&point);
            if lambda.entries().iter().all(|x| !x.is_negative()) {
                let total = lambda.entries().iter().fold(BigInt::zero(), |a, x| a + x);
                if total <= det {
                    out.push((point, total, det.clone()));
                }
            }
        }
        let mut k = 0;
        loop {
            if k == n {
                return Ok(out);
            }
            if p[k] < hi[k] {
                p[k] += 1;
                break;
            }
            p[k] = lo[k].clone();
            k += 1;
        }
    }
}

/// True iff `Conv(0, rays)` has no lattice points besides 0 and the rays.
pub fn is_terminal_cone(c: &Cone) -> Result<bool> {
    Ok(simplex_points(c)?
        .iter()
        .all(|(p, _, _)| c.rays().contains(p)))
}

/// True iff every nonzero lattice point of `Conv(0, rays)` lies on the
/// facet `Conv(rays)`.
pub fn is_canonical_cone(c: &Cone) -> Result<bool> {
    Ok(simplex_points(c)?.iter().all(|(_, total, det)| total == det))
}

/// Outcome of [`classify_smooth_flop`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SmoothFlopClass {
    /// Ordinary flop; `rank` is `|J−| − 1`.
    Ordinary { rank: usize },
    NotSmoothFlop,
}

/// Recognizes smooth flops, which are exactly the ordinary ones.
///
/// Requires `σ_n`, `σ_{n+1}` smooth and the flop condition, then verifies
/// that every coefficient is ±1 with `|J−| = |J+|`.
pub fn classify_smooth_flop(w: &WallRelation) -> SmoothFlopClass {
    let n = w.n();
    if !w.sigma(n - 1).is_smooth() || !w.sigma(n).is_smooth() || !is_flop(w) {
        return SmoothFlopClass::NotSmoothFlop;
    }
    let minus_ok = w.j_minus.iter().all(|&i| w.b[i] == BigInt::from(-1));
    let plus_ok = w.j_plus.iter().all(|&j| w.b[j].is_one());
    if minus_ok && plus_ok && w.j_minus.len() == w.j_plus.len() && w.j_minus.len() >= 2 {
        SmoothFlopClass::Ordinary {
            rank: w.j_minus.len() - 1,
        }
    } else {
        SmoothFlopClass::NotSmoothFlop
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> IntVec {
        IntVec::from_i64(xs)
    }

    fn bigs(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn cone(rank: usize, gens: &[&[i64]]) -> Cone {
        Cone::from_i64(rank, gens).unwrap()
    }

    #[test]
    fn danilov_wall_relation() {
        let a = cone(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let b = cone(3, &[&[1, 0, 0], &[0, 1, 0], &[1, 1, -1]]);
        let w = wall_relation(&a, &b).unwrap();
        assert_eq!(w.rays(), &[v(&[0, 1, 0]), v(&[1, 0, 0]), v(&[0, 0, 1]), v(&[1, 1, -1])]);
        assert_eq!(w.coefficients(), bigs(&[-1, -1, 1, 1]).as_slice());
        assert_eq!(w.j_minus(), &[0, 1]);
        assert_eq!(w.j_plus(), &[2, 3]);
        let back = wall_relation(&b, &a).unwrap();
        assert_eq!(back.coefficients(), w.coefficients());
    }

    #[test]
    fn type_b_wall_relation() {
        let a = cone(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let b = cone(3, &[&[1, 0, 0], &[0, 1, 0], &[1, 1, -2]]);
        let w = wall_relation(&a, &b).unwrap();
        assert_eq!(w.coefficients(), bigs(&[-1, -1, 2, 1]).as_slice());
    }

    #[test]
    fn wall_relation_errors() {
        let a = cone(3, &[&[1, 0, 0], &[0, 1, 0]]);
        let b = cone(3, &[&[1, 0, 0], &[0, 0, 1]]);
        assert!(matches!(wall_relation(&a, &b), Err(Error::NotAdjacent(_))));
        let c = cone(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]);
        let same_side = cone(3, &[&[1, 0, 0], &[0, 1, 0], &[1, 1, 1]]);
        assert!(matches!(wall_relation(&c, &same_side), Err(Error::NotAdjacent(_))));
        let square = cone(3, &[&[1, 0, 1], &[0, 1, 1], &[-1, 0, 1], &[0, -1, 1]]);
        assert!(matches!(wall_relation(&square, &c), Err(Error::NotSimplicial(_))));
    }

    #[test]
    fn flip_fan_structure() {
        let w = WallRelation::from_i64(&[-1, -1, 1, 1]).unwrap();
        let f = flip_fans(&w).unwrap();
        let mut expected = vec![w.sigma(2), w.sigma(3)];
        expected.sort();
        let mut got = f.sigma.cones();
        got.sort();
        assert_eq!(got, expected);
        assert_eq!(f.sigma_prime.max_cones().len(), 2);
        assert_eq!(
            flip_fans(&WallRelation::from_i64(&[-1, 1, 1, 1]).unwrap()),
            Err(Error::NotAFlippingWall)
        );
    }

    #[test]
    fn flop_detection() {
        assert!(is_flop(&WallRelation::from_i64(&[-1, -1, 1, 1]).unwrap()));
        assert!(!is_flop(&WallRelation::from_i64(&[-1, -1, 2, 1]).unwrap()));
        assert!(is_flop(&WallRelation::from_i64(&[-3, -5, 7, 1]).unwrap()));
    }

    #[test]
    fn terminal_classification() {
        let classify = |b: &[i64]| classify_terminal_3d(&WallRelation::from_i64(b).unwrap()).unwrap();
        assert_eq!(classify(&[-1, -1, 1, 1]), TerminalClass::Flop);
        assert_eq!(classify(&[-1, -1, 2, 1]), TerminalClass::TypeB { a: 1, r: 2 });
        assert_eq!(classify(&[-2, -3, 3, 1]), TerminalClass::Unclassified);
        assert_eq!(classify(&[-1, -2, 3, 1]), TerminalClass::TypeA { a: 1, r: 3 });
        assert_eq!(classify(&[-1, -3, 5, 1]), TerminalClass::TypeB { a: 3, r: 5 });
        let w4 = WallRelation::from_i64(&[-1, -1, 1, 1, 0]);
        assert!(w4.is_err());
        let w4 = WallRelation::from_i64(&[-1, -1, 1, 0, 1]).unwrap();
        assert!(matches!(classify_terminal_3d(&w4), Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn terminal_and_canonical_cones() {
        assert!(is_terminal_cone(&cone(3, &[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])).unwrap());
        assert!(!is_terminal_cone(&cone(2, &[&[1, 0], &[1, 2]])).unwrap());
        assert!(is_canonical_cone(&cone(2, &[&[1, 0], &[1, 2]])).unwrap());
        // σ_3 for b = (−3, −5, 7, 1): rays u1, u2, u4 = 3u1 + 5u2 − 7u3.
        let w = WallRelation::from_i64(&[-3, -5, 7, 1]).unwrap();
        let s3 = w.sigma(2);
        assert!(is_canonical_cone(&s3).unwrap());
        assert!(!is_terminal_cone(&s3).unwrap());
        assert!(matches!(
            is_terminal_cone(&cone(3, &[&[1, 0, 0], &[0, 1, 0]])),
            Err(Error::NotSimplicial(_))
        ));
    }

    #[test]
    fn smooth_flop_classification() {
        let w = WallRelation::from_i64(&[-1, -1, 1, 1]).unwrap();
        assert_eq!(classify_smooth_flop(&w), SmoothFlopClass::Ordinary { rank: 1 });
        let w = WallRelation::from_i64(&[-1, -1, -1, 1, 1, 1]).unwrap();
        assert_eq!(classify_smooth_flop(&w), SmoothFlopClass::Ordinary { rank: 2 });
        let w = WallRelation::from_i64(&[-1, -1, 2, 1]).unwrap();
        assert_eq!(classify_smooth_flop(&w), SmoothFlopClass::NotSmoothFlop);
        let w = WallRelation::from_i64(&[-2, -1, 1, 1, 1]).unwrap();
        assert_eq!(classify_smooth_flop(&w), SmoothFlopClass::NotSmoothFlop);
    }

    #[test]
    fn exceptional_ray_of_danilov() {
        let w = WallRelation::from_i64(&[-1, -1, 1, 1]).unwrap();
        assert_eq!(w.exceptional_ray(), v(&[1, 1, 0]));
    }
}
