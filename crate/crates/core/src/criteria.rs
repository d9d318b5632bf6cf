//! Decision procedures for normality of the graph closure and reducedness of
//! the fiber product of a flip, each paired with a brute-force oracle, and the
//! combined diagnosis.
//!
//! Ray indices are zero-based throughout.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};

use crate::cone::{dual_cone, Cone};
use crate::error::{Error, Result};
use crate::flip::{flip_fans, WallRelation};
use crate::lattice::IntVec;
use crate::semigroup::{check_semigroup_sum_equality, hilbert_basis, member, AffineSemigroup, Membership};

/// Three-valued outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Yes,
    No,
    Undetermined,
}

/// Result of the normality check over pairs of maximal cones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalityVerdict {
    pub normal: bool,
    /// Hilbert basis element of `S_{σ∩σ'}` missing from `S_σ + S_σ'`.
    pub witness: Option<IntVec>,
    /// `(j, i)`: the failing pair `σ_j`, `σ_i` with `j ∈ J+`, `i ∈ J−`.
    pub failing_pair: Option<(usize, usize)>,
    pub pairs_checked: usize,
    /// Outcome on same-side pairs, only computed in all-pairs mode.
    pub same_side_pairs_hold: Option<bool>,
}

/// Checks `S_σ + S_σ' = S_{σ∩σ'}` for every cross pair `(σ_j, σ_i)`.
///
/// With `all_pairs`, same-side pairs are checked as well and reported in a
/// separate field; they do not affect `normal`.
pub fn check_graph_closure_normal(w: &WallRelation, all_pairs: bool) -> Result<NormalityVerdict> {
    flip_fans(w)?;
    let mut verdict = NormalityVerdict {
        normal: true,
        witness: None,
        failing_pair: None,
        pairs_checked: 0,
        same_side_pairs_hold: None,
    };
    for &j in w.j_plus() {
        for &i in w.j_minus() {
            verdict.pairs_checked += 1;
            let check = check_semigroup_sum_equality(&w.sigma(j), &w.sigma(i))?;
            if !check.holds {
                verdict.normal = false;
                verdict.witness = check.witness;
                verdict.failing_pair = Some((j, i));
                return Ok(verdict);
            }
        }
    }
    if all_pairs {
        let mut holds = true;
        'sides: for side in [w.j_plus(), w.j_minus()] {
            for (k, &a) in side.iter().enumerate() {
                for &b in &side[k + 1..] {
                    verdict.pairs_checked += 1;
                    if !check_semigroup_sum_equality(&w.sigma(a), &w.sigma(b))?.holds {
                        holds = false;
                        break 'sides;
                    }
                }
            }
        }
        verdict.same_side_pairs_hold = Some(holds);
    }
    Ok(verdict)
}

/// Outcome of the remainder criterion and its oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ReducedCheck {
    pub reduced: bool,
    /// First `λ` with no admissible `y`.
    pub failing_lambda: Option<i64>,
}

/// `(g, b1', b2')` with `b_i = −g·b_i'`.
fn split_negative_pair(b1: i64, b2: i64) -> Result<(i64, i64, i64)> {
    if b1 >= 0 || b2 >= 0 {
        return Err(Error::PreconditionFailed(
            "the first two coefficients must be negative".into(),
        ));
    }
    let (a1, a2) = (b1.checked_neg(), b2.checked_neg());
    let (Some(a1), Some(a2)) = (a1, a2) else {
        return Err(Error::PreconditionFailed("coefficient out of range".into()));
    };
    let g = a1.gcd(&a2);
    Ok((g, a1 / g, a2 / g))
}

fn check_3d_inputs(b1: i64, b2: i64, b3: i64) -> Result<(i64, i64, i64)> {
    let split = split_negative_pair(b1, b2)?;
    if b3 <= 0 {
        return Err(Error::PreconditionFailed(
            "the third coefficient must be positive".into(),
        ));
    }
    let (g, p1, p2) = split;
    if p1.checked_mul(p2).and_then(|x| x.checked_mul(g)).is_none() {
        return Err(Error::PreconditionFailed("coefficients too large".into()));
    }
    Ok(split)
}

/// Remainder criterion for `b = (b1, b2, b3, 1)` with `u_1, u_2, u_3` a basis.
///
/// Reduced iff for every `0 ≤ λ ≤ b1'·b2'` some `0 ≤ y ≤ λ/b1'` satisfies
/// `(gλ mod b3) ≥ g·((λ − b1'·y) mod b2')`.
pub fn reduced_criterion_3d(b1: i64, b2: i64, b3: i64) -> Result<ReducedCheck> {
    let (g, p1, p2) = check_3d_inputs(b1, b2, b3)?;
    for lambda in 0..=p1 * p2 {
        let lhs = (g * lambda).rem_euclid(b3);
        let ok = (0..=lambda / p1).any(|y| lhs >= g * (lambda - p1 * y).rem_euclid(p2));
        if !ok {
            return Ok(ReducedCheck {
                reduced: false,
                failing_lambda: Some(lambda),
            });
        }
    }
    Ok(ReducedCheck {
        reduced: true,
        failing_lambda: None,
    })
}

/// Outcome of [`reduced_oracle_3d`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OracleCheck {
    pub reduced: bool,
    /// `(p1, p2, p3)` of a point `(−p1, p2, p3)` with no decomposition.
    pub witness: Option<[i64; 3]>,
}

/// Direct check that every `m = (−p1, p2, p3)` of the cone between the two
/// dual cones splits as a point of `S_{σ0}` plus a point on the wall.
///
/// Enumerates `0 ≤ p1, p2 ≤ bound`; for each pair only the largest admissible
/// `p3 ≤ bound` is tested, since the decomposition constraints only tighten
/// as `p3` grows. The decomposition `(q1, q2)` is searched over every `q1`,
/// with the admissible `q2` forming an interval.
pub fn reduced_oracle_3d(b1: i64, b2: i64, b3: i64, bound: i64) -> Result<OracleCheck> {
    check_3d_inputs(b1, b2, b3)?;
    if bound < 0 {
        return Err(Error::PreconditionFailed("bound must be nonnegative".into()));
    }
    let (a1, a2) = (-b1, -b2);
    for p1 in 0..=bound {
        for p2 in 0..=bound {
            let slack = a2 * p2 - a1 * p1;
            if slack < 0 {
                continue;
            }
            let p3 = (slack / b3).min(bound);
            let k = slack - b3 * p3;
            let decomposes = (p1..)
                .take_while(|&q1| a1 * q1 <= a2 * p2)
                .any(|q1| {
                    let lo = Integer::div_ceil(&(a1 * q1), &a2);
                    let hi = p2.min((k + a1 * q1).div_euclid(a2));
                    lo <= hi
                });
            if !decomposes {
                return Ok(OracleCheck {
                    reduced: false,
                    witness: Some([p1, p2, p3]),
                });
            }
        }
    }
    Ok(OracleCheck {
        reduced: true,
        witness: None,
    })
}

/// Outcome of [`flop_reduced_criterion`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FlopCheck {
    pub b3: i64,
    pub reduced: bool,
    /// `(y1, y2)` with `b3 = b1'·y1 + b2'·y2`.
    pub certificate: Option<(i64, i64)>,
}

/// Flop case `b3 = −b1 − b2 − 1`: reduced iff `b3` lies in the numerical
/// semigroup generated by `b1'` and `b2'`.
pub fn flop_reduced_criterion(b1: i64, b2: i64) -> Result<FlopCheck> {
    let (_, p1, p2) = split_negative_pair(b1, b2)?;
    let b3 = -b1 - b2 - 1;
    if b3 <= 0 {
        return Err(Error::PreconditionFailed(
            "the flop coefficient b3 = −b1 − b2 − 1 must be positive".into(),
        ));
    }
    let certificate = (0..=b3 / p1)
        .find(|y1| (b3 - p1 * y1) % p2 == 0)
        .map(|y1| (y1, (b3 - p1 * y1) / p2));
    Ok(FlopCheck {
        b3,
        reduced: certificate.is_some(),
        certificate,
    })
}

/// Outcome of [`smooth_reduced_criterion`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisibilityCheck {
    pub reduced: bool,
    /// Ray indices `(i, j)` in `J−` with `|b_i|`, `|b_j|` mutually indivisible.
    pub failing_pair: Option<(usize, usize)>,
    pub failing_values: Option<(BigInt, BigInt)>,
}

fn ensure_smooth_side(w: &WallRelation) -> Result<()> {
    for &j in w.j_plus() {
        if !w.sigma(j).is_smooth() {
            return Err(Error::NotSmooth(format!(
                "cone omitting ray {j} on the contraction side"
            )));
        }
    }
    if let Some(&j) = w.j_plus().iter().find(|&&j| !w.coefficients()[j].is_one()) {
        return Err(Error::InternalInvariant(format!(
            "smooth side forces b = 1 at index {j}"
        )));
    }
    Ok(())
}

/// Divisibility criterion when every cone `σ_j`, `j ∈ J+`, is smooth:
/// reduced iff any two coefficients on `J−` divide one another.
pub fn smooth_reduced_criterion(w: &WallRelation) -> Result<DivisibilityCheck> {
    ensure_smooth_side(w)?;
    let b = w.coefficients();
    let minus = w.j_minus();
    for (k, &i) in minus.iter().enumerate() {
        for &j in &minus[k + 1..] {
            let (x, y) = (b[i].abs(), b[j].abs());
            if !(y.is_multiple_of(&x) || x.is_multiple_of(&y)) {
                return Ok(DivisibilityCheck {
                    reduced: false,
                    failing_pair: Some((i, j)),
                    failing_values: Some((x, y)),
                });
            }
        }
    }
    Ok(DivisibilityCheck {
        reduced: true,
        failing_pair: None,
        failing_values: None,
    })
}

/// Outcome of [`spade_oracle`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpadeCheck {
    pub holds: bool,
    /// `(i0, j0, z)`: the pair `σ_{j0}`, `σ_{i0}` and the point, given by its
    /// pairings with every ray except `u_{j0}`, in ray order.
    pub witness: Option<(usize, usize, Vec<i64>)>,
}

/// Enumerates the decomposition condition for every pair `i0 ∈ J−`,
/// `j0 ∈ J+` on points with coordinates bounded by `bound`.
///
/// Points are described by their pairings `z_k = <z, u_k>` for `k ≠ j0`,
/// which are coordinates since `σ_{j0}` is smooth. A point with `z_{i0} ≤ 0`,
/// `z_k ≥ 0` otherwise and `Σ b_k z_k ≤ 0` must dominate coordinatewise a
/// point `z'` of the same shape with `Σ b_k z'_k = 0`; when `|J+| ≠ 2`, `z'`
/// must also vanish on `J+`.
pub fn spade_oracle(w: &WallRelation, bound: i64) -> Result<SpadeCheck> {
    if w.j_minus().len() < 2 {
        return Err(Error::NotAFlippingWall);
    }
    ensure_smooth_side(w)?;
    let b = w
        .coefficients_i64()
        .ok_or_else(|| Error::PreconditionFailed("coefficients out of range".into()))?;
    let restrict_plus = w.j_plus().len() != 2;
    for &i0 in w.j_minus() {
        for &j0 in w.j_plus() {
            let coords: Vec<usize> = (0..b.len()).filter(|&k| k != j0).collect();
            let lows: Vec<i64> = coords.iter().map(|&k| if k == i0 { -bound } else { 0 }).collect();
            let highs: Vec<i64> = coords.iter().map(|&k| if k == i0 { 0 } else { bound }).collect();
            let mut z = lows.clone();
            loop {
                let total: i64 = coords.iter().zip(&z).map(|(&k, &zk)| b[k] * zk).sum();
                if total <= 0 && !spade_certificate(&b, &coords, &z, i0, w.j_plus(), restrict_plus) {
                    return Ok(SpadeCheck {
                        holds: false,
                        witness: Some((i0, j0, z)),
                    });
                }
                if !advance(&mut z, &lows, &highs) {
                    break;
                }
            }
        }
    }
    Ok(SpadeCheck {
        holds: true,
        witness: None,
    })
}

fn advance(x: &mut [i64], lows: &[i64], highs: &[i64]) -> bool {
    for k in 0..x.len() {
        if x[k] < highs[k] {
            x[k] += 1;
            return true;
        }
        x[k] = lows[k];
    }
    false
}

fn spade_certificate(b: &[i64], coords: &[usize], z: &[i64], i0: usize, plus: &[usize], restrict_plus: bool) -> bool {
    let pos_i0 = coords.iter().position(|&k| k == i0).expect("i0 is a coordinate");
    let highs: Vec<i64> = coords
        .iter()
        .zip(z)
        .map(|(&k, &zk)| {
            if k == i0 || (restrict_plus && plus.contains(&k)) {
                0
            } else {
                zk
            }
        })
        .collect();
    let lows = vec![0; coords.len()];
    let mut zp = lows.clone();
    let weight = -b[i0];
    loop {
        let rest: i64 = coords.iter().zip(&zp).map(|(&k, &v)| b[k] * v).sum();
        if rest % weight == 0 && rest / weight <= z[pos_i0] {
            return true;
        }
        if !advance(&mut zp, &lows, &highs) {
            return false;
        }
    }
}

/// A monomial of the split polynomial ring: exponents on the shared
/// generators, the first side's extra generators and the second side's.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentTriple {
    pub shared: Vec<u32>,
    pub first: Vec<u32>,
    pub second: Vec<u32>,
}

impl ExponentTriple {
    pub fn degree(&self) -> u64 {
        self.shared.iter().chain(&self.first).chain(&self.second).map(|&e| e as u64).sum()
    }
}

fn to_i64_gens(gens: &[IntVec]) -> Result<Vec<Vec<i64>>> {
    gens.iter()
        .map(|g| {
            g.to_i64_vec()
                .ok_or_else(|| Error::PreconditionFailed("generator entries out of range".into()))
        })
        .collect()
}

fn evaluate(gens: &[Vec<i64>], exps: &[u32], out: &mut [i64]) {
    for (g, &e) in gens.iter().zip(exps) {
        for (o, x) in out.iter_mut().zip(g) {
            *o += x * e as i64;
        }
    }
}

/// All exponent vectors on `gens` of degree at most `max_degree`; with
/// `weights` (one positive weight per generator) only those whose weighted
/// sum equals `target_weight`.
fn exponent_vectors(k: usize, max_degree: u32, weights: Option<(&[i64], i64)>) -> Vec<Vec<u32>> {
    fn rec(
        pos: usize,
        left: u32,
        weight_left: i64,
        weights: Option<&[i64]>,
        cur: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        if pos == cur.len() {
            if weights.is_none() || weight_left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let mut e = 0;
        loop {
            cur[pos] = e;
            rec(
                pos + 1,
                left - e,
                weight_left - weights.map_or(0, |w| w[pos] * e as i64),
                weights,
                cur,
                out,
            );
            if e == left {
                break;
            }
            e += 1;
            if let Some(w) = weights {
                if w[pos] * e as i64 > weight_left {
                    break;
                }
            }
        }
        cur[pos] = 0;
    }
    let mut out = Vec::new();
    let mut cur = vec![0; k];
    rec(0, max_degree, weights.map_or(0, |w| w.1), weights.map(|w| w.0), &mut cur, &mut out);
    out
}

/// A functional strictly positive on every generator, when one exists.
fn positive_functional(rank: usize, gens: &[IntVec]) -> Option<Vec<i64>> {
    if gens.is_empty() {
        return Some(vec![0; rank]);
    }
    let cone = Cone::new(rank, gens.to_vec()).ok()?;
    if !cone.is_strongly_convex() {
        return None;
    }
    let ell = dual_cone(&cone).interior_point();
    if gens.iter().any(|g| !ell.dot(g).is_positive()) {
        return None;
    }
    ell.to_i64_vec()
}

/// Decides, within total degree `degree_bound`, whether two monomials are
/// joined by moves that keep the first-side exponents and change the rest
/// within the relations of shared plus second-side generators, or
/// symmetrically.
///
/// `false` only means "not connected within the bound".
pub fn binomial_connectivity_oracle(
    shared: &[IntVec],
    first: &[IntVec],
    second: &[IntVec],
    start: &ExponentTriple,
    end: &ExponentTriple,
    degree_bound: u32,
) -> Result<bool> {
    for t in [start, end] {
        if t.shared.len() != shared.len() || t.first.len() != first.len() || t.second.len() != second.len() {
            return Err(Error::PreconditionFailed(
                "exponent vector lengths differ from the generator counts".into(),
            ));
        }
    }
    let rank = shared
        .iter()
        .chain(first)
        .chain(second)
        .map(IntVec::dim)
        .next()
        .unwrap_or(0);
    let (gs, gf, gt) = (to_i64_gens(shared)?, to_i64_gens(first)?, to_i64_gens(second)?);
    let point = |t: &ExponentTriple| {
        let mut out = vec![0i64; rank];
        evaluate(&gs, &t.shared, &mut out);
        evaluate(&gf, &t.first, &mut out);
        evaluate(&gt, &t.second, &mut out);
        out
    };
    let m = point(start);
    if m != point(end) {
        return Err(Error::LatticePointMismatch);
    }
    if start == end {
        return Ok(true);
    }
    if start.degree() > degree_bound as u64 || end.degree() > degree_bound as u64 {
        return Ok(false);
    }

    // Outer enumeration over one side's extra generators, inner over the
    // remaining ones, pruned by a positive functional when available.
    let mut rest_gens: Vec<IntVec> = shared.to_vec();
    rest_gens.extend(second.iter().cloned());
    let mut swapped = false;
    let mut ell = positive_functional(rank, &rest_gens);
    if ell.is_none() {
        let mut alt: Vec<IntVec> = shared.to_vec();
        alt.extend(first.iter().cloned());
        if let Some(e) = positive_functional(rank, &alt) {
            ell = Some(e);
            swapped = true;
        }
    }
    let (outer, inner_extra) = if swapped { (&gt, &gf) } else { (&gf, &gt) };
    let inner: Vec<Vec<i64>> = gs.iter().chain(inner_extra.iter()).cloned().collect();
    let mut triples: Vec<ExponentTriple> = Vec::new();
    for o in exponent_vectors(outer.len(), degree_bound, None) {
        let used: u32 = o.iter().sum();
        let mut target = m.clone();
        let mut contribution = vec![0i64; rank];
        evaluate(outer, &o, &mut contribution);
        for (t, c) in target.iter_mut().zip(&contribution) {
            *t -= c;
        }
        let candidates = match &ell {
            Some(e) => {
                let weights: Vec<i64> = inner.iter().map(|g| g.iter().zip(e).map(|(a, b)| a * b).sum()).collect();
                let tw: i64 = target.iter().zip(e).map(|(a, b)| a * b).sum();
                if tw < 0 {
                    continue;
                }
                exponent_vectors(inner.len(), degree_bound - used, Some((&weights, tw)))
            }
            None => exponent_vectors(inner.len(), degree_bound - used, None),
        };
        for c in candidates {
            let mut value = vec![0i64; rank];
            evaluate(&inner, &c, &mut value);
            if value != target {
                continue;
            }
            let (sh, extra) = c.split_at(gs.len());
            let (first_e, second_e) = if swapped {
                (extra.to_vec(), o.clone())
            } else {
                (o.clone(), extra.to_vec())
            };
            triples.push(ExponentTriple {
                shared: sh.to_vec(),
                first: first_e,
                second: second_e,
            });
        }
    }

    let index: HashMap<&ExponentTriple, usize> = triples.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let (Some(&s), Some(&e)) = (index.get(start), index.get(end)) else {
        return Err(Error::InternalInvariant("endpoint missing from enumeration".into()));
    };
    let mut parent: Vec<usize> = (0..triples.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut by_first: HashMap<&[u32], usize> = HashMap::new();
    let mut by_second: HashMap<&[u32], usize> = HashMap::new();
    for (i, t) in triples.iter().enumerate() {
        for rep in [
            *by_first.entry(&t.first).or_insert(i),
            *by_second.entry(&t.second).or_insert(i),
        ] {
            let (a, b) = (find(&mut parent, i), find(&mut parent, rep));
            parent[a] = b;
        }
    }
    Ok(find(&mut parent, s) == find(&mut parent, e))
}

/// A binomial that should lie in the sum of the two toric ideals but does
/// not when the remainder criterion fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinomialWitness {
    pub shared: Vec<IntVec>,
    pub first: Vec<IntVec>,
    pub second: Vec<IntVec>,
    pub start: ExponentTriple,
    pub end: ExponentTriple,
    /// The lattice point `m` of the proof; `start` maps to `m − e_3`.
    pub point: IntVec,
}

fn lift(shared: &[IntVec], second: &[IntVec], m: &IntVec) -> Result<(Vec<u32>, Vec<u32>)> {
    let mut all = shared.to_vec();
    all.extend(second.iter().cloned());
    let s = AffineSemigroup::new(m.dim(), all)?;
    let Membership::Member(coeffs) = member(&s, m)? else {
        return Err(Error::InternalInvariant("point outside its semigroup".into()));
    };
    let mut out_shared = vec![0u32; shared.len()];
    let mut out_second = vec![0u32; second.len()];
    for (g, c) in s.generators().iter().zip(&coeffs) {
        let c = c.to_u32().ok_or_else(|| Error::InternalInvariant("exponent too large".into()))?;
        if let Some(k) = shared.iter().position(|x| x == g) {
            out_shared[k] = c;
        } else if let Some(k) = second.iter().position(|x| x == g) {
            out_second[k] = c;
        }
    }
    Ok((out_shared, out_second))
}

/// Builds the binomial of the local chart `σ_3`, `σ_1` for the relation
/// `(b1, b2, b3, 1)` on the standard basis, from a point of the cone between
/// the dual cones that admits no decomposition and is minimal for the
/// descent through `S_{σ0} \ 0`. Returns `None` when the chart is reduced.
pub fn reducedness_binomial_witness(b1: i64, b2: i64, b3: i64) -> Result<Option<BinomialWitness>> {
    let (g, p1, p2) = check_3d_inputs(b1, b2, b3)?;
    let Some(lambda) = reduced_criterion_3d(b1, b2, b3)?.failing_lambda else {
        return Ok(None);
    };
    let w = WallRelation::from_i64(&[b1, b2, b3, 1])?;
    let (sigma0, sigma, sigma_p) = (w.sigma0(), w.sigma(2), w.sigma(0));
    let shared = hilbert_basis(&sigma0)?.generators().to_vec();
    let first: Vec<IntVec> = hilbert_basis(&sigma)?
        .generators()
        .iter()
        .filter(|h| !shared.contains(h))
        .cloned()
        .collect();
    let second: Vec<IntVec> = hilbert_basis(&sigma_p)?
        .generators()
        .iter()
        .filter(|h| !shared.contains(h))
        .cloned()
        .collect();

    // n2·b2' − n1·b1' = 1 with 0 ≤ n1 < b2'.
    let n1 = (0..p2.max(1))
        .find(|n1| (1 + p1 * n1) % p2 == 0)
        .ok_or_else(|| Error::InternalInvariant("b1', b2' not coprime".into()))?;
    let n2 = (1 + p1 * n1) / p2;
    let (q1, q2) = (lambda * n1, lambda * n2);
    let q3 = (g * lambda) / b3;
    let mut m = [-q1, q2, q3];

    // Descend while a smaller point of the region remains reachable.
    let in_region = |x: &[i64; 3]| {
        x[0] <= 0 && x[1] >= 0 && x[2] >= 0 && -(b1 * x[0] + b2 * x[1] + b3 * x[2]) >= 0
    };
    loop {
        let mut next = None;
        let lowest = -(b2 * m[1]).div_euclid(b1).abs() - 1;
        'search: for x0 in lowest..=m[0] {
            for x1 in 0..=m[1] {
                for x2 in 0..=m[2] {
                    let x = [x0, x1, x2];
                    if x == m || !in_region(&x) {
                        continue;
                    }
                    let diff = [m[0] - x0, m[1] - x1, m[2] - x2];
                    let at_u4 = -(b1 * diff[0] + b2 * diff[1] + b3 * diff[2]);
                    if at_u4 >= 0 {
                        next = Some(x);
                        break 'search;
                    }
                }
            }
        }
        match next {
            Some(x) => m = x,
            None => break,
        }
    }
    if m[2] == 0 {
        return Err(Error::InternalInvariant("descent reached the wall".into()));
    }
    let point = IntVec::from_i64(&m);
    let (start_shared, start_second) = lift(&shared, &second, &point)?;
    let below = IntVec::from_i64(&[m[0], m[1], m[2] - 1]);
    let (end_shared, end_second) = lift(&shared, &second, &below)?;
    let down = IntVec::from_i64(&[0, 0, -1]);
    let mut start_first = vec![0u32; first.len()];
    let k = first
        .iter()
        .position(|h| *h == down)
        .ok_or_else(|| Error::InternalInvariant("−e_3 missing from the Hilbert basis".into()))?;
    start_first[k] = 1;
    Ok(Some(BinomialWitness {
        start: ExponentTriple {
            shared: start_shared,
            first: start_first,
            second: start_second,
        },
        end: ExponentTriple {
            shared: end_shared,
            first: vec![0; first.len()],
            second: end_second,
        },
        shared,
        first,
        second,
        point,
    }))
}

/// Reducedness outcome of a diagnosis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reducedness {
    Yes,
    No(ReducedWitness),
    Undetermined(String),
}

impl Reducedness {
    pub fn verdict(&self) -> Verdict {
        match self {
            Reducedness::Yes => Verdict::Yes,
            Reducedness::No(_) => Verdict::No,
            Reducedness::Undetermined(_) => Verdict::Undetermined,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReducedWitness {
    FailingLambda(i64),
    IndivisiblePair { indices: (usize, usize), values: (BigInt, BigInt) },
}

/// Everything known about the fiber product of one flip.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiagnosisReport {
    pub wall: WallRelation,
    pub irreducible: Verdict,
    pub graph_closure_normal: NormalityVerdict,
    pub fiber_product_reduced: Reducedness,
    pub x_equals_x_tilde: Verdict,
    /// Which result each verdict rests on.
    pub notes: Vec<String>,
}

pub const NOTE_IRREDUCIBLE: &str = "irreducibility: fiber products of flip data are irreducible";
pub const NOTE_NORMAL: &str = "normality: semigroup sum equality over cross pairs of maximal cones";
pub const NOTE_REDUCED_3D: &str = "reducedness: three-dimensional remainder criterion on the chart of the smooth cone";
pub const NOTE_REDUCED_SMOOTH: &str = "reducedness: divisibility criterion for a smooth contraction side";
pub const NOTE_REDUCED_NONE: &str = "reducedness: no applicable criterion";
pub const NOTE_IDENTITY: &str =
    "identity: the fiber product is the refinement variety iff it is irreducible, reduced and has normal graph closure";

/// Reducedness verdict together with the criterion that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReducednessDecision {
    pub verdict: Reducedness,
    pub note: &'static str,
    /// `(b1, b2, b3)` fed to the remainder criterion, when it was used.
    pub remainder_input: Option<(i64, i64, i64)>,
}

/// Decides reducedness of the fiber product with whichever criterion applies.
pub fn fiber_product_reducedness(w: &WallRelation) -> Result<ReducednessDecision> {
    let (minus, plus) = (w.j_minus(), w.j_plus());
    let b = w.coefficients();
    if w.n() == 3 && minus.len() == 2 && plus.len() == 2 {
        let smooth = plus.iter().rev().copied().find(|&j| w.sigma(j).is_smooth());
        if let Some(j4) = smooth {
            let j3 = if plus[0] == j4 { plus[1] } else { plus[0] };
            let to_i64 = |x: &BigInt| {
                x.to_i64()
                    .ok_or_else(|| Error::PreconditionFailed("coefficients out of range".into()))
            };
            if !b[j4].is_one() {
                return Err(Error::InternalInvariant("smooth cone forces b = 1".into()));
            }
            let input = (to_i64(&b[minus[0]])?, to_i64(&b[minus[1]])?, to_i64(&b[j3])?);
            let check = reduced_criterion_3d(input.0, input.1, input.2)?;
            let verdict = match check.failing_lambda {
                None => Reducedness::Yes,
                Some(l) => Reducedness::No(ReducedWitness::FailingLambda(l)),
            };
            return Ok(ReducednessDecision {
                verdict,
                note: NOTE_REDUCED_3D,
                remainder_input: Some(input),
            });
        }
    }
    if plus.iter().all(|&j| w.sigma(j).is_smooth()) {
        let check = smooth_reduced_criterion(w)?;
        let verdict = match (check.failing_pair, check.failing_values) {
            (Some(indices), Some(values)) => Reducedness::No(ReducedWitness::IndivisiblePair { indices, values }),
            _ => Reducedness::Yes,
        };
        return Ok(ReducednessDecision {
            verdict,
            note: NOTE_REDUCED_SMOOTH,
            remainder_input: None,
        });
    }
    let verdict = Reducedness::Undetermined(
        "no criterion covers this relation: it is neither three-dimensional with a smooth cone on the contraction side nor smooth on that side"
            .into(),
    );
    Ok(ReducednessDecision {
        verdict,
        note: NOTE_REDUCED_NONE,
        remainder_input: None,
    })
}

/// Assembles the full report for one flip.
pub fn diagnose(w: &WallRelation, all_pairs: bool) -> Result<DiagnosisReport> {
    let mut notes = vec![NOTE_IRREDUCIBLE.to_string()];
    let normal = check_graph_closure_normal(w, all_pairs)?;
    notes.push(NOTE_NORMAL.into());
    let decision = fiber_product_reducedness(w)?;
    notes.push(decision.note.into());
    let reduced = decision.verdict;
    notes.push(NOTE_IDENTITY.into());
    let x_equals = match (normal.normal, reduced.verdict()) {
        (false, _) | (_, Verdict::No) => Verdict::No,
        (true, Verdict::Yes) => Verdict::Yes,
        _ => Verdict::Undetermined,
    };
    Ok(DiagnosisReport {
        wall: w.clone(),
        irreducible: Verdict::Yes,
        graph_closure_normal: normal,
        fiber_product_reduced: reduced,
        x_equals_x_tilde: x_equals,
        notes,
    })
}

/// Default degree bound of [`binomial_connectivity_oracle`]: three times the
/// larger endpoint degree.
pub fn default_degree_bound(start: &ExponentTriple, end: &ExponentTriple) -> u32 {
    let d = start.degree().max(end.degree());
    u32::try_from(3 * d).unwrap_or(u32::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wall(b: &[i64]) -> WallRelation {
        WallRelation::from_i64(b).unwrap()
    }

    #[test]
    fn remainder_criterion_examples() {
        assert!(reduced_criterion_3d(-1, -1, 1).unwrap().reduced);
        assert_eq!(reduced_criterion_3d(-3, -5, 7).unwrap().failing_lambda, Some(7));
        assert!(reduced_criterion_3d(-1, -4, 5).unwrap().reduced);
        assert!(matches!(reduced_criterion_3d(1, -1, 1), Err(Error::PreconditionFailed(_))));
        assert!(matches!(reduced_criterion_3d(-1, -1, 0), Err(Error::PreconditionFailed(_))));
    }

    #[test]
    fn oracle_examples() {
        assert!(reduced_oracle_3d(-1, -1, 1, 6).unwrap().reduced);
        assert!(!reduced_oracle_3d(-3, -5, 7, 20).unwrap().reduced);
        assert_eq!(
            reduced_oracle_3d(-2, -3, 4, 12).unwrap().reduced,
            reduced_criterion_3d(-2, -3, 4).unwrap().reduced
        );
    }

    #[test]
    fn oracle_agrees_on_small_grid() {
        for b1 in -4..=-1 {
            for b2 in -4..=-1 {
                for b3 in 1..=6 {
                    let (_, p1, p2) = split_negative_pair(b1, b2).unwrap();
                    let c = reduced_criterion_3d(b1, b2, b3).unwrap().reduced;
                    let o = reduced_oracle_3d(b1, b2, b3, p1 * p2 * 10).unwrap().reduced;
                    assert_eq!(c, o, "({b1}, {b2}, {b3})");
                }
            }
        }
    }

    #[test]
    fn flop_criterion_examples() {
        let c = flop_reduced_criterion(-3, -5).unwrap();
        assert_eq!((c.b3, c.reduced), (7, false));
        let c = flop_reduced_criterion(-2, -3).unwrap();
        assert_eq!(c.certificate, Some((2, 0)));
        assert!(flop_reduced_criterion(-1, 1).is_err());
    }

    #[test]
    fn divisibility_examples() {
        let c = smooth_reduced_criterion(&wall(&[-2, -4, 1, 1, 1])).unwrap();
        assert!(c.reduced);
        let c = smooth_reduced_criterion(&wall(&[-2, -3, 1, 1, 1])).unwrap();
        assert_eq!(c.failing_pair, Some((0, 1)));
        assert_eq!(c.failing_values, Some((BigInt::from(2), BigInt::from(3))));
        assert!(smooth_reduced_criterion(&wall(&[-1, -7, 1, 1, 1])).unwrap().reduced);
        assert!(matches!(smooth_reduced_criterion(&wall(&[-1, -1, 2, 1])), Err(Error::NotSmooth(_))));
    }

    #[test]
    fn spade_examples() {
        assert!(spade_oracle(&wall(&[-1, -1, 1, 1]), 6).unwrap().holds);
        assert!(!spade_oracle(&wall(&[-2, -3, 1, 1, 1]), 10).unwrap().holds);
        assert!(spade_oracle(&wall(&[-2, -4, 1, 1, 1]), 10).unwrap().holds);
    }

    #[test]
    fn normality_examples() {
        let v = check_graph_closure_normal(&wall(&[-1, -1, 1, 1]), true).unwrap();
        assert!(v.normal);
        assert_eq!(v.same_side_pairs_hold, Some(true));
        let v = check_graph_closure_normal(&wall(&[-3, -5, 7, 1]), false).unwrap();
        assert!(v.normal);
    }

    #[test]
    fn binomial_oracle_basics() {
        let shared = vec![IntVec::from_i64(&[1, 0])];
        let first = vec![IntVec::from_i64(&[0, 1])];
        let second = vec![IntVec::from_i64(&[1, 1])];
        let a = ExponentTriple {
            shared: vec![1],
            first: vec![1],
            second: vec![0],
        };
        let b = ExponentTriple {
            shared: vec![0],
            first: vec![0],
            second: vec![1],
        };
        assert!(binomial_connectivity_oracle(&shared, &first, &second, &a, &a, 0).unwrap());
        // Neither side alone relates x·y to the diagonal generator.
        assert!(!binomial_connectivity_oracle(&shared, &first, &second, &a, &b, 4).unwrap());
        let c = ExponentTriple {
            shared: vec![2],
            first: vec![0],
            second: vec![0],
        };
        assert!(matches!(
            binomial_connectivity_oracle(&shared, &first, &second, &a, &c, 4),
            Err(Error::LatticePointMismatch)
        ));
        let shared = vec![IntVec::from_i64(&[1, 0]), IntVec::from_i64(&[0, 1])];
        let first: Vec<IntVec> = vec![];
        let a = ExponentTriple {
            shared: vec![1, 1],
            first: vec![],
            second: vec![0],
        };
        let b = ExponentTriple {
            shared: vec![0, 0],
            first: vec![],
            second: vec![1],
        };
        assert!(binomial_connectivity_oracle(&shared, &first, &second, &a, &b, 2).unwrap());
    }

    #[test]
    fn binomial_witness_for_failing_flop() {
        assert!(reducedness_binomial_witness(-1, -1, 1).unwrap().is_none());
        let wit = reducedness_binomial_witness(-3, -5, 7).unwrap().unwrap();
        let bound = default_degree_bound(&wit.start, &wit.end);
        let connected = binomial_connectivity_oracle(&wit.shared, &wit.first, &wit.second, &wit.start, &wit.end, bound)
            .unwrap();
        assert!(!connected);
    }

    #[test]
    fn diagnosis_examples() {
        let r = diagnose(&wall(&[-1, -1, 1, 1]), false).unwrap();
        assert_eq!(r.x_equals_x_tilde, Verdict::Yes);
        let r = diagnose(&wall(&[-3, -5, 7, 1]), false).unwrap();
        assert!(r.graph_closure_normal.normal);
        assert_eq!(r.fiber_product_reduced, Reducedness::No(ReducedWitness::FailingLambda(7)));
        assert_eq!(r.x_equals_x_tilde, Verdict::No);
        let r = diagnose(&wall(&[-1, -2, 3, 1]), false).unwrap();
        assert_eq!(r.x_equals_x_tilde, Verdict::Yes);
    }
}
