//! Exact integer linear algebra over arbitrary-precision integers.
//!
//! Vectors and matrices here hold [`BigInt`] entries. The normal forms
//! follow fixed conventions so that results are canonical:
//!
//! * Hermite normal form is row style: `U·A = H` with `U` unimodular, the
//!   nonzero rows of `H` on top, each pivot positive and strictly to the right
//!   of the pivot above it, and every entry above a pivot reduced into
//!   `[0, pivot)`.
//! * Smith normal form returns `U·A·V = D` with the nonzero diagonal entries
//!   positive, leading, and forming a divisibility chain.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A lattice point with arbitrary-precision coordinates.
///
/// Ordering is lexicographic on the coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct IntVec(Vec<BigInt>);

impl IntVec {
    pub fn new(entries: Vec<BigInt>) -> Self {
        IntVec(entries)
    }

    /// Builds a vector from machine integers.
    pub fn from_i64(entries: &[i64]) -> Self {
        IntVec(entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        IntVec(vec![BigInt::zero(); dim])
    }

    /// The `i`-th standard basis vector of `Z^dim`.
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = BigInt::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    /// Standard pairing of two vectors of equal length.
    pub fn dot(&self, other: &IntVec) -> BigInt {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .fold(BigInt::zero(), |acc, (a, b)| acc + a * b)
    }

    pub fn scale(&self, k: &BigInt) -> IntVec {
        IntVec(self.0.iter().map(|x| x * k).collect())
    }

    /// Gcd of the absolute values of the entries (zero for the zero vector).
    pub fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, x| g.gcd(x))
    }

    /// Returns `Some` when every entry fits in an `i64`.
    pub fn to_i64_vec(&self) -> Option<Vec<i64>> {
        self.0.iter().map(ToPrimitive::to_i64).collect()
    }

    /// Sign-normalizes so that the first nonzero entry is positive.
    pub fn sign_normalized(&self) -> IntVec {
        match self.0.iter().find(|x| !x.is_zero()) {
            Some(x) if x.is_negative() => -self,
            _ => self.clone(),
        }
    }

    /// Concatenation `(self, other)`.
    pub fn concat(&self, other: &IntVec) -> IntVec {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        IntVec(v)
    }
}

impl From<Vec<BigInt>> for IntVec {
    fn from(v: Vec<BigInt>) -> Self {
        IntVec(v)
    }
}

impl Index<usize> for IntVec {
    type Output = BigInt;
    fn index(&self, i: usize) -> &BigInt {
        &self.0[i]
    }
}

impl IndexMut<usize> for IntVec {
    fn index_mut(&mut self, i: usize) -> &mut BigInt {
        &mut self.0[i]
    }
}

impl Add for &IntVec {
    type Output = IntVec;
    fn add(self, rhs: &IntVec) -> IntVec {
        debug_assert_eq!(self.dim(), rhs.dim());
        IntVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &IntVec {
    type Output = IntVec;
    fn sub(self, rhs: &IntVec) -> IntVec {
        debug_assert_eq!(self.dim(), rhs.dim());
        IntVec(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &IntVec {
    type Output = IntVec;
    fn neg(self) -> IntVec {
        IntVec(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for IntVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Divides `v` by the gcd of its entries.
pub fn primitive(v: &IntVec) -> Result<IntVec> {
    let g = v.content();
    if g.is_zero() {
        return Err(Error::ZeroVector);
    }
    Ok(IntVec(v.0.iter().map(|x| x / &g).collect()))
}

/// Dense row-major integer matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMat {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMat {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(IntMat { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMat {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from machine-integer rows; `cols` fixes the width so
    /// that matrices without rows still carry a column count.
    pub fn from_i64_rows(cols: usize, rows: &[Vec<i64>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.len(),
                });
            }
            data.extend(r.iter().map(|&x| BigInt::from(x)));
        }
        Ok(IntMat {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Matrix whose rows are the given vectors.
    pub fn from_rows(cols: usize, rows: &[IntVec]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.dim() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: r.dim(),
                });
            }
            data.extend(r.entries().iter().cloned());
        }
        Ok(IntMat {
            rows: rows.len(),
            cols,
            data,
        })
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(rows: usize, cols: &[IntVec]) -> Result<Self> {
        Ok(Self::from_rows(rows, cols)?.transpose())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row(&self, i: usize) -> IntVec {
        IntVec(self.data[i * self.cols..(i + 1) * self.cols].to_vec())
    }

    pub fn col(&self, j: usize) -> IntVec {
        IntVec((0..self.rows).map(|i| self[(i, j)].clone()).collect())
    }

    pub fn row_vecs(&self) -> Vec<IntVec> {
        (0..self.rows).map(|i| self.row(i)).collect()
    }

    pub fn col_vecs(&self) -> Vec<IntVec> {
        (0..self.cols).map(|j| self.col(j)).collect()
    }

    pub fn transpose(&self) -> IntMat {
        let mut t = IntMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Matrix product; panics on incompatible shapes.
    pub fn mul(&self, other: &IntMat) -> IntMat {
        assert_eq!(self.cols, other.rows, "incompatible matrix shapes");
        let mut out = IntMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let prod = a * &other[(k, j)];
                    out[(i, j)] += prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &IntVec) -> IntVec {
        assert_eq!(self.cols, v.dim(), "incompatible matrix-vector shapes");
        IntVec((0..self.rows).map(|i| self.row(i).dot(v)).collect())
    }

    /// `[self | other]`.
    pub fn hstack(&self, other: &IntMat) -> Result<IntMat> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch {
                expected: self.rows,
                found: other.rows,
            });
        }
        let mut out = IntMat::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                out[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        Ok(out)
    }

    /// `self` on top of `other`.
    pub fn vstack(&self, other: &IntMat) -> Result<IntMat> {
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                found: other.cols,
            });
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(IntMat {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn negated(&self) -> IntMat {
        IntMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn rank(&self) -> usize {
        rank_of_rows(&self.row_vecs(), self.cols)
    }

    /// Determinant of a square matrix by fraction-free elimination.
    pub fn determinant(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut m: Vec<Vec<BigInt>> = self.row_vecs().into_iter().map(|r| r.0).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&r| !m[r][k].is_zero()) else {
                return BigInt::zero();
            };
            if p != k {
                m.swap(p, k);
                sign = -sign;
            }
            for r in k + 1..n {
                for c in k + 1..n {
                    let v = (&m[k][k] * &m[r][c] - &m[r][k] * &m[k][c]) / &prev;
                    m[r][c] = v;
                }
                m[r][k] = BigInt::zero();
            }
            prev = m[k][k].clone();
        }
        if n == 0 {
            return BigInt::one();
        }
        sign * &m[n - 1][n - 1]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let x = &mut self.data[i * self.cols + j];
            *x = -std::mem::take(x);
        }
    }

    /// row[target] += k · row[source]
    fn add_row_multiple(&mut self, target: usize, source: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self.data[source * self.cols + j] * k;
            self.data[target * self.cols + j] += v;
        }
    }

    /// col[target] += k · col[source]
    fn add_col_multiple(&mut self, target: usize, source: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + source] * k;
            self.data[i * self.cols + target] += v;
        }
    }

    /// Replaces rows (a, b) by (x·a + y·b, z·a + w·b).
    fn combine_rows(&mut self, a: usize, b: usize, coeffs: [&BigInt; 4]) {
        let [x, y, z, w] = coeffs;
        for j in 0..self.cols {
            let ra = self.data[a * self.cols + j].clone();
            let rb = self.data[b * self.cols + j].clone();
            self.data[a * self.cols + j] = x * &ra + y * &rb;
            self.data[b * self.cols + j] = z * &ra + w * &rb;
        }
    }
}

impl Index<(usize, usize)> for IntMat {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for IntMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
        }
        write!(f, "]")
    }
}

/// Rank of the span of `rows` inside `Q^dim`.
pub fn rank_of_rows(rows: &[IntVec], dim: usize) -> usize {
    let mut m: Vec<Vec<BigInt>> = rows.iter().map(|r| r.0.clone()).collect();
    let mut rank = 0;
    let mut prev = BigInt::one();
    for col in 0..dim {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(p, rank);
        for r in rank + 1..m.len() {
            for c in col + 1..dim {
                let v = (&m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c]) / &prev;
                m[r][c] = v;
            }
            m[r][col] = BigInt::zero();
        }
        prev = m[rank][col].clone();
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Extended gcd: returns `(g, x, y)` with `g = x·a + y·b >= 0`.
pub fn extended_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = old_r.div_floor(&r);
        let nr = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, nr);
        let ns = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, ns);
        let nt = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, nt);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Result of [`hermite_normal_form`]: `u · input = h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HnfDecomposition {
    pub h: IntMat,
    pub u: IntMat,
    /// Number of nonzero rows of `h`, equal to the rank of the input.
    pub rank: usize,
    /// Column index of the pivot in each nonzero row.
    pub pivots: Vec<usize>,
}

/// Row-style Hermite normal form with unimodular transform.
pub fn hermite_normal_form(a: &IntMat) -> HnfDecomposition {
    let mut h = a.clone();
    let mut u = IntMat::identity(a.rows());
    let mut pivots = Vec::new();
    let mut pr = 0;
    for col in 0..a.cols() {
        if pr == a.rows() {
            break;
        }
        for r in pr + 1..a.rows() {
            if h[(r, col)].is_zero() {
                continue;
            }
            let p = h[(pr, col)].clone();
            let q = h[(r, col)].clone();
            let (g, x, y) = extended_gcd(&p, &q);
            let z = -(&q / &g);
            let w = &p / &g;
            h.combine_rows(pr, r, [&x, &y, &z, &w]);
            u.combine_rows(pr, r, [&x, &y, &z, &w]);
        }
        if h[(pr, col)].is_zero() {
            continue;
        }
        if h[(pr, col)].is_negative() {
            h.negate_row(pr);
            u.negate_row(pr);
        }
        let p = h[(pr, col)].clone();
        for r in 0..pr {
            let q = -h[(r, col)].div_floor(&p);
            h.add_row_multiple(r, pr, &q);
            u.add_row_multiple(r, pr, &q);
        }
        pivots.push(col);
        pr += 1;
    }
    HnfDecomposition {
        h,
        u,
        rank: pr,
        pivots,
    }
}

/// Result of [`smith_normal_form`]: `u · input · v = d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfDecomposition {
    pub u: IntMat,
    pub d: IntMat,
    pub v: IntMat,
    /// Nonzero diagonal entries of `d`, each dividing the next.
    pub invariant_factors: Vec<BigInt>,
}

impl SnfDecomposition {
    pub fn rank(&self) -> usize {
        self.invariant_factors.len()
    }
}

/// Smith normal form by gcd pivoting with elementary row and column moves.
pub fn smith_normal_form(a: &IntMat) -> SnfDecomposition {
    let (m, n) = (a.rows(), a.cols());
    let mut d = a.clone();
    let mut u = IntMat::identity(m);
    let mut v = IntMat::identity(n);
    let mut invariant_factors = Vec::new();
    for t in 0..m.min(n) {
        loop {
            // Smallest nonzero entry of the trailing block becomes the pivot.
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = &d[(i, j)];
                    if x.is_zero() {
                        continue;
                    }
                    if best.map_or(true, |(bi, bj)| x.abs() < d[(bi, bj)].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish_snf(u, d, v, invariant_factors);
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let p = d[(t, t)].clone();
            let mut clean = true;
            for i in t + 1..m {
                let q = -d[(i, t)].div_floor(&p);
                d.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                clean &= d[(i, t)].is_zero();
            }
            for j in t + 1..n {
                let q = -d[(t, j)].div_floor(&p);
                d.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                clean &= d[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }
            let offender = (t + 1..m)
                .flat_map(|i| (t + 1..n).map(move |j| (i, j)))
                .find(|&(i, j)| !d[(i, j)].is_multiple_of(&p));
            if let Some((i, _)) = offender {
                d.add_row_multiple(t, i, &BigInt::one());
                u.add_row_multiple(t, i, &BigInt::one());
                continue;
            }
            break;
        }
        if d[(t, t)].is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
        invariant_factors.push(d[(t, t)].clone());
    }
    finish_snf(u, d, v, invariant_factors)
}

fn finish_snf(u: IntMat, d: IntMat, v: IntMat, invariant_factors: Vec<BigInt>) -> SnfDecomposition {
    SnfDecomposition {
        u,
        d,
        v,
        invariant_factors,
    }
}

/// Canonical basis of the integer kernel `{x : A·x = 0}`.
///
/// The basis is the Hermite normal form of any kernel basis, so it is
/// unique for the kernel lattice; each vector is primitive with positive
/// leading entry.
pub fn kernel_basis(a: &IntMat) -> Vec<IntVec> {
    let hnf = hermite_normal_form(&a.transpose());
    let n = a.cols();
    let raw: Vec<IntVec> = (hnf.rank..n).map(|i| hnf.u.row(i)).collect();
    if raw.is_empty() {
        return raw;
    }
    let basis = IntMat::from_rows(n, &raw).expect("kernel rows have matching width");
    hermite_normal_form(&basis).h.row_vecs()
}

/// Canonical basis of the saturated lattice `span(vectors) ∩ Z^dim`.
pub fn saturated_span_basis(vectors: &[IntVec], dim: usize) -> Vec<IntVec> {
    let m = IntMat::from_rows(dim, vectors).expect("vectors have matching width");
    let orth = kernel_basis(&m);
    let w = IntMat::from_rows(dim, &orth).expect("kernel rows have matching width");
    kernel_basis(&w)
}

/// Some rational solution of `A·x = b`, if one exists.
pub fn solve_rational(a: &IntMat, b: &IntVec) -> Option<Vec<BigRational>> {
    let (m, n) = (a.rows(), a.cols());
    let mut aug: Vec<Vec<BigRational>> = (0..m)
        .map(|i| {
            let mut row: Vec<BigRational> = (0..n)
                .map(|j| BigRational::from_integer(a[(i, j)].clone()))
                .collect();
            row.push(BigRational::from_integer(b[i].clone()));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..n {
        let Some(p) = (r..m).find(|&i| !aug[i][c].is_zero()) else {
            continue;
        };
        aug.swap(p, r);
        let inv = aug[r][c].recip();
        for x in aug[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..m {
            if i != r && !aug[i][c].is_zero() {
                let f = aug[i][c].clone();
                for j in c..=n {
                    let v = &f * &aug[r][j];
                    aug[i][j] -= v;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if aug[r..].iter().any(|row| !row[n].is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (i, &c) in pivots.iter().enumerate() {
        x[c] = aug[i][n].clone();
    }
    Some(x)
}

/// For invertible square `A`, returns `(B, D)` with `D > 0` and
/// `A^{-1} = B / D`, where `D = |det A|`.
pub fn scaled_inverse(a: &IntMat) -> Option<(IntMat, BigInt)> {
    assert!(a.is_square(), "inverse of a non-square matrix");
    let n = a.rows();
    let det = a.determinant().abs();
    if det.is_zero() {
        return None;
    }
    let mut out = IntMat::zeros(n, n);
    for j in 0..n {
        let x = solve_rational(a, &IntVec::unit(n, j))?;
        for (i, xi) in x.iter().enumerate() {
            let scaled = xi * BigRational::from_integer(det.clone());
            debug_assert!(scaled.is_integer());
            out[(i, j)] = scaled.to_integer();
        }
    }
    Some((out, det))
}

/// Exact inverse of a unimodular matrix.
pub fn unimodular_inverse(a: &IntMat) -> Option<IntMat> {
    let (b, d) = scaled_inverse(a)?;
    d.is_one().then_some(b)
}
