//! Exact linear algebra over the rationals.
//!
//! Every vector space handled by the crate is the complexification of a
//! rational one, so kernels, images and dimensions are computed here with
//! arbitrary-precision fractions. Subspaces are stored by their reduced row
//! echelon basis, which makes equality of subspaces a structural comparison.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

pub type Rat = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinalgError {
    #[error("ambient dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("killed subspace is not contained in the ambient subspace")]
    NotContained,
    #[error("invalid rational literal `{0}`")]
    BadRational(String),
}

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_vec(v: &[i64]) -> Vec<Rat> {
    v.iter().map(|&x| rat(x)).collect()
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`; decimals and symbolic input are rejected.
pub fn parse_rat(s: &str) -> Result<Rat, LinalgError> {
    let bad = || LinalgError::BadRational(s.to_string());
    let t = s.trim();
    let (num, den) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (t, "1"),
    };
    let valid = |x: &str| {
        let digits = x.strip_prefix('-').or_else(|| x.strip_prefix('+')).unwrap_or(x);
        !digits.is_empty() && digits.bytes().all(|c| c.is_ascii_digit())
    };
    if !valid(num) || !valid(den) {
        return Err(bad());
    }
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Rat::new(n, d))
}

pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn dot(a: &[Rat], b: &[Rat]) -> Rat {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(Rat::zero(), |acc, (x, y)| acc + x * y)
}

pub fn unit_vec(n: usize, i: usize) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); n];
    v[i] = Rat::one();
    v
}

pub fn is_zero_vec(v: &[Rat]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn scale_vec(v: &[Rat], c: &Rat) -> Vec<Rat> {
    v.iter().map(|x| x * c).collect()
}

pub fn add_vec(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub_vec(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Dense rational matrix in row-major order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = self.row(i).iter().map(format_rat).collect();
            write!(f, "{}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        RatMatrix { rows, cols, data: vec![Rat::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    /// Builds a matrix from rows; all rows must have length `cols`.
    pub fn from_rows(cols: usize, rows: Vec<Vec<Rat>>) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend(r);
        }
        RatMatrix { rows: n, cols, data }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        Self::from_rows(cols, rows.iter().map(|r| rat_vec(r)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        RatMatrix { rows, cols, data }
    }

    /// Elementary matrix `E_{ij}` (one in row `i`, column `j`).
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n, n);
        m.set(i, j, Rat::one());
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Rat] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> Vec<Vec<Rat>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<Rat> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn entries(&self) -> &[Rat] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, c: &Rat) -> Self {
        RatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x * c).collect() }
    }

    /// `v · M` for a row vector `v`.
    pub fn left_mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![Rat::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for (o, x) in out.iter_mut().zip(self.row(i)) {
                if !x.is_zero() {
                    *o += vi * x;
                }
            }
        }
        out
    }

    /// `M · v` for a column vector `v`.
    pub fn mul_vec(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    pub fn kronecker(&self, other: &RatMatrix) -> Self {
        let (r, c) = (self.rows * other.rows, self.cols * other.cols);
        Self::from_fn(r, c, |i, j| {
            let a = self.get(i / other.rows, j / other.cols);
            if a.is_zero() {
                Rat::zero()
            } else {
                a * other.get(i % other.rows, j % other.cols)
            }
        })
    }

    pub fn vstack(&self, other: &RatMatrix) -> Self {
        assert_eq!(self.cols, other.cols);
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        RatMatrix { rows: self.rows + other.rows, cols: self.cols, data }
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self.get(i, cols[j]).clone())
    }

    pub fn commutator(&self, other: &RatMatrix) -> Self {
        &(self * other) - &(other * self)
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (RatMatrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.rref_in_place();
        (m, pivots)
    }

    fn rref_in_place(&mut self) -> Vec<usize> {
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !self.get(i, c).is_zero()) else {
                continue;
            };
            if p != r {
                for j in 0..cols {
                    self.data.swap(p * cols + j, r * cols + j);
                }
            }
            let inv = self.get(r, c).recip();
            for j in c..cols {
                let v = self.get(r, j) * &inv;
                self.set(r, j, v);
            }
            for i in 0..rows {
                if i == r || self.get(i, c).is_zero() {
                    continue;
                }
                let f = self.get(i, c).clone();
                for j in c..cols {
                    let rv = self.get(r, j);
                    if rv.is_zero() {
                        continue;
                    }
                    let v = self.get(i, j) - &f * rv;
                    self.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Right kernel `{x : M x = 0}` as a subspace of `Q^cols`.
    pub fn kernel(&self) -> Subspace {
        kernel(self)
    }

    pub fn inverse(&self) -> Option<RatMatrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        if n == 0 {
            return Some(Self::zeros(0, 0));
        }
        let mut aug = Self::zeros(n, 2 * n);
        for i in 0..n {
            for j in 0..n {
                aug.set(i, j, self.get(i, j).clone());
            }
            aug.set(i, n + i, Rat::one());
        }
        let pivots = aug.rref_in_place();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return None;
        }
        Some(Self::from_fn(n, n, |i, j| aug.get(i, n + j).clone()))
    }

    pub fn determinant(&self) -> Rat {
        assert!(self.is_square());
        let n = self.rows;
        let mut m = self.clone();
        let mut det = Rat::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !m.get(i, c).is_zero()) else {
                return Rat::zero();
            };
            if p != c {
                for j in 0..n {
                    m.data.swap(p * n + j, c * n + j);
                }
                det = -det;
            }
            let piv = m.get(c, c).clone();
            det *= &piv;
            for i in c + 1..n {
                if m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c) / &piv;
                for j in c..n {
                    let v = m.get(i, j) - &f * m.get(c, j);
                    m.set(i, j, v);
                }
            }
        }
        det
    }

    /// Largest absolute value among numerators and denominators, for size guards.
    pub fn max_height(&self) -> BigInt {
        self.data
            .iter()
            .flat_map(|x| [x.numer().abs(), x.denom().abs()])
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    /// Flattens the matrix row by row.
    pub fn to_vec(&self) -> Vec<Rat> {
        self.data.clone()
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Rat>) -> Self {
        assert_eq!(data.len(), rows * cols);
        RatMatrix { rows, cols, data }
    }
}

impl<'a> Mul<&'a RatMatrix> for &'a RatMatrix {
    type Output = RatMatrix;

    fn mul(self, rhs: &'a RatMatrix) -> RatMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix shape mismatch in product");
        let mut out = RatMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = rhs.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * rhs.cols + j;
                    out.data[idx] += a * b;
                }
            }
        }
        out
    }
}

impl<'a> Add<&'a RatMatrix> for &'a RatMatrix {
    type Output = RatMatrix;

    fn add(self, rhs: &'a RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a RatMatrix> for &'a RatMatrix {
    type Output = RatMatrix;

    fn sub(self, rhs: &'a RatMatrix) -> RatMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        RatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &RatMatrix {
    type Output = RatMatrix;

    fn neg(self) -> RatMatrix {
        RatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| -a).collect() }
    }
}

/// A linear subspace of `Q^n`, stored by its canonical RREF basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    ambient_dim: usize,
    basis: RatMatrix,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn span<I>(ambient_dim: usize, vectors: I) -> Self
    where
        I: IntoIterator<Item = Vec<Rat>>,
    {
        let rows: Vec<Vec<Rat>> = vectors.into_iter().collect();
        let m = RatMatrix::from_rows(ambient_dim, rows);
        Self::row_space(&m)
    }

    pub fn row_space(m: &RatMatrix) -> Self {
        let (r, pivots) = m.rref();
        let basis = RatMatrix::from_fn(pivots.len(), m.cols(), |i, j| r.get(i, j).clone());
        Subspace { ambient_dim: m.cols(), basis, pivots }
    }

    pub fn zero(n: usize) -> Self {
        Subspace { ambient_dim: n, basis: RatMatrix::zeros(0, n), pivots: vec![] }
    }

    pub fn full(n: usize) -> Self {
        Subspace { ambient_dim: n, basis: RatMatrix::identity(n), pivots: (0..n).collect() }
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn basis(&self) -> &RatMatrix {
        &self.basis
    }

    pub fn basis_vecs(&self) -> Vec<Vec<Rat>> {
        self.basis.row_vecs()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Coordinates of `v` in the RREF basis, or `None` if `v` is not in the subspace.
    pub fn coordinates(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        assert_eq!(v.len(), self.ambient_dim);
        let coords: Vec<Rat> = self.pivots.iter().map(|&p| v[p].clone()).collect();
        let back = self.basis.left_mul_vec(&coords);
        (back.as_slice() == v).then_some(coords)
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.coordinates(v).is_some()
    }

    pub fn is_subspace_of(&self, other: &Subspace) -> bool {
        self.ambient_dim == other.ambient_dim && (0..self.dim()).all(|i| other.contains(self.basis.row(i)))
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check_dim(other)?;
        Ok(Subspace::row_space(&self.basis.vstack(&other.basis)))
    }

    pub fn intersect(&self, other: &Subspace) -> Result<Subspace, LinalgError> {
        self.check_dim(other)?;
        let dual = self.annihilator().sum(&other.annihilator())?;
        Ok(dual.annihilator())
    }

    /// Functionals (under the standard pairing) vanishing on the subspace.
    pub fn annihilator(&self) -> Subspace {
        if self.dim() == 0 {
            return Subspace::full(self.ambient_dim);
        }
        kernel(&self.basis)
    }

    fn check_dim(&self, other: &Subspace) -> Result<(), LinalgError> {
        if self.ambient_dim != other.ambient_dim {
            return Err(LinalgError::DimensionMismatch(self.ambient_dim, other.ambient_dim));
        }
        Ok(())
    }
}

/// Canonical RREF basis of the right kernel of `m`.
pub fn kernel(m: &RatMatrix) -> Subspace {
    let n = m.cols();
    let (r, pivots) = m.rref();
    let mut vecs = Vec::new();
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    for free in (0..n).filter(|&c| !is_pivot[c]) {
        let mut v = vec![Rat::zero(); n];
        v[free] = Rat::one();
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = -r.get(i, free).clone();
        }
        vecs.push(v);
    }
    Subspace::span(n, vecs)
}

/// A quotient `ambient / killed` of two nested subspaces of `Q^n`, with a
/// chosen complement of `killed` inside `ambient` serving as basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientSpace {
    ambient: Subspace,
    killed: Subspace,
    section: RatMatrix,
    coord_map: RatMatrix,
}

impl QuotientSpace {
    pub fn new(ambient: Subspace, killed: Subspace) -> Result<Self, LinalgError> {
        if ambient.ambient_dim() != killed.ambient_dim() {
            return Err(LinalgError::DimensionMismatch(ambient.ambient_dim(), killed.ambient_dim()));
        }
        if !killed.is_subspace_of(&ambient) {
            return Err(LinalgError::NotContained);
        }
        let n = ambient.ambient_dim();
        // Greedy complement: RREF rows of the ambient space that are independent of
        // the killed space and of the rows already chosen.
        let mut chosen: Vec<Vec<Rat>> = Vec::new();
        let mut acc = killed.clone();
        for row in ambient.basis_vecs() {
            if !acc.contains(&row) {
                acc = acc.sum(&Subspace::span(n, [row.clone()]))?;
                chosen.push(row);
            }
        }
        let s = chosen.len();
        let section = RatMatrix::from_rows(n, chosen);
        let stacked = section.vstack(killed.basis());
        let (_, cols) = stacked.rref();
        let square = stacked.select_columns(&cols);
        let inv = square.inverse().expect("stacked basis restricted to pivot columns is invertible");
        let mut coord_map = RatMatrix::zeros(n, s);
        for (k, &c) in cols.iter().enumerate() {
            for j in 0..s {
                coord_map.set(c, j, inv.get(k, j).clone());
            }
        }
        Ok(QuotientSpace { ambient, killed, section, coord_map })
    }

    /// The full space `Q^n` modulo `killed`.
    pub fn modulo(killed: Subspace) -> Result<Self, LinalgError> {
        let n = killed.ambient_dim();
        Self::new(Subspace::full(n), killed)
    }

    pub fn dim(&self) -> usize {
        self.section.rows()
    }

    pub fn ambient(&self) -> &Subspace {
        &self.ambient
    }

    pub fn killed(&self) -> &Subspace {
        &self.killed
    }

    /// Representatives of the chosen basis of the quotient (one per row).
    pub fn section_basis(&self) -> &RatMatrix {
        &self.section
    }

    /// Coordinates of the class of `v`; `None` when `v` is outside the ambient space.
    pub fn coords(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        if !self.ambient.contains(v) {
            return None;
        }
        Some(self.coord_map.left_mul_vec(v))
    }

    /// Coordinates without the membership check; only meaningful on the ambient space.
    pub fn coords_unchecked(&self, v: &[Rat]) -> Vec<Rat> {
        self.coord_map.left_mul_vec(v)
    }

    pub fn lift(&self, coords: &[Rat]) -> Vec<Rat> {
        self.section.left_mul_vec(coords)
    }

    pub fn is_zero_class(&self, v: &[Rat]) -> bool {
        self.killed.contains(v)
    }
}

/// The span of a list of independent vectors, with coordinates taken in that list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasedSpan {
    rows: Vec<Vec<Rat>>,
    space: Subspace,
    to_rows: RatMatrix,
}

impl BasedSpan {
    /// Panics if the rows are dependent.
    pub fn new(ambient_dim: usize, rows: Vec<Vec<Rat>>) -> Self {
        let space = Subspace::span(ambient_dim, rows.iter().cloned());
        assert_eq!(space.dim(), rows.len(), "based span needs independent rows");
        let k = rows.len();
        let c = RatMatrix::from_rows(k, rows.iter().map(|r| space.coordinates(r).unwrap()).collect());
        let to_rows = c.inverse().expect("change of basis is invertible");
        BasedSpan { rows, space, to_rows }
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<Rat>] {
        &self.rows
    }

    pub fn space(&self) -> &Subspace {
        &self.space
    }

    pub fn coordinates(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        let c = self.space.coordinates(v)?;
        Some(self.to_rows.left_mul_vec(&c))
    }

    pub fn combine(&self, coords: &[Rat]) -> Vec<Rat> {
        RatMatrix::from_rows(self.space.ambient_dim(), self.rows.clone()).left_mul_vec(coords)
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All `p`-element subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(p);
    fn rec(start: usize, n: usize, p: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == p {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < p - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, p, cur, out);
            cur.pop();
        }
    }
    rec(0, n, p, &mut cur, &mut out);
    out
}

/// Lexicographic rank of a sorted subset among the `|s|`-subsets of `0..n`.
pub fn subset_rank(n: usize, s: &[usize]) -> usize {
    let p = s.len();
    let mut rank = 0;
    let mut prev = 0;
    for (k, &x) in s.iter().enumerate() {
        for y in prev..x {
            rank += binomial(n - y - 1, p - k - 1);
        }
        prev = x + 1;
    }
    rank
}

/// Sign of the permutation sorting the concatenation of two disjoint sorted lists.
pub fn merge_sign(a: &[usize], b: &[usize]) -> i32 {
    let mut inv = 0usize;
    for x in a {
        inv += b.iter().filter(|&&y| y < *x).count();
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Wedge product of `a ∈ ⋀^p Q^n` and `b ∈ ⋀^q Q^n` in the lexicographic subset basis.
pub fn exterior_product(n: usize, a: &[Rat], p: usize, b: &[Rat], q: usize) -> Vec<Rat> {
    let sa = subsets(n, p);
    let sb = subsets(n, q);
    assert_eq!(a.len(), sa.len());
    assert_eq!(b.len(), sb.len());
    let mut out = vec![Rat::zero(); binomial(n, p + q)];
    if p + q > n {
        return out;
    }
    for (i, s) in sa.iter().enumerate() {
        if a[i].is_zero() {
            continue;
        }
        for (j, t) in sb.iter().enumerate() {
            if b[j].is_zero() || s.iter().any(|x| t.contains(x)) {
                continue;
            }
            let mut u: Vec<usize> = s.iter().chain(t).copied().collect();
            u.sort_unstable();
            let term = &a[i] * &b[j];
            let idx = subset_rank(n, &u);
            if merge_sign(s, t) > 0 {
                out[idx] += term;
            } else {
                out[idx] -= term;
            }
        }
    }
    out
}

/// `v_1 ∧ … ∧ v_p` for vectors of `Q^n`: the vector of `p×p` minors.
pub fn wedge_vectors(n: usize, vs: &[Vec<Rat>]) -> Vec<Rat> {
    let p = vs.len();
    subsets(n, p)
        .into_iter()
        .map(|cols| {
            let m = RatMatrix::from_fn(p, p, |i, j| vs[i][cols[j]].clone());
            if p == 0 {
                Rat::one()
            } else {
                m.determinant()
            }
        })
        .collect()
}

/// Based presentation of `⋀^p` of a quotient space, with its basis of wedge monomials.
#[derive(Clone, Debug)]
pub struct WedgePower {
    base_dim: usize,
    degree: usize,
    monomials: Vec<Vec<usize>>,
    space: QuotientSpace,
}

impl WedgePower {
    pub fn dim(&self) -> usize {
        self.monomials.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    /// Basis monomial `i` as the sorted list of factor indices.
    pub fn monomial(&self, i: usize) -> &[usize] {
        &self.monomials[i]
    }

    /// The presentation of the wedge power itself (a full coordinate space).
    pub fn space(&self) -> &QuotientSpace {
        &self.space
    }

    /// Structure constant: `b_i ∧ b'_j = sign · b''_k`, or `None` when the product vanishes.
    pub fn multiply(&self, i: usize, other: &WedgePower, j: usize) -> Option<(i32, usize)> {
        assert_eq!(self.base_dim, other.base_dim);
        let (s, t) = (&self.monomials[i], &other.monomials[j]);
        if s.iter().any(|x| t.contains(x)) {
            return None;
        }
        let mut u: Vec<usize> = s.iter().chain(t.iter()).copied().collect();
        u.sort_unstable();
        Some((merge_sign(s, t), subset_rank(self.base_dim, &u)))
    }
}

pub fn wedge_power(q: &QuotientSpace, p: usize) -> WedgePower {
    let m = q.dim();
    let monomials = subsets(m, p);
    let dim = monomials.len();
    let space = QuotientSpace::modulo(Subspace::zero(dim)).expect("zero subspace is contained in the full space");
    WedgePower { base_dim: m, degree: p, monomials, space }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> RatMatrix {
        RatMatrix::from_i64(rows)
    }

    // Brute-force oracle: enumerate small integer vectors and test membership directly.
    fn brute_kernel_dim(a: &RatMatrix) -> usize {
        let n = a.cols();
        let mut found: Vec<Vec<Rat>> = Vec::new();
        let range: Vec<i64> = (-2..=2).collect();
        let mut idx = vec![0usize; n];
        loop {
            let v: Vec<Rat> = idx.iter().map(|&i| rat(range[i])).collect();
            if a.mul_vec(&v).iter().all(Zero::is_zero) {
                found.push(v);
            }
            let mut k = 0;
            loop {
                if k == n {
                    let m = RatMatrix::from_rows(n, found);
                    return m.rank();
                }
                idx[k] += 1;
                if idx[k] < range.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel(&RatMatrix::identity(3)).dim(), 0);
        assert_eq!(kernel(&RatMatrix::zeros(2, 3)), Subspace::full(3));
        let k = kernel(&m(&[&[1, 1, 1]]));
        assert_eq!(k.dim(), 2);
        assert_eq!(k.dim(), brute_kernel_dim(&m(&[&[1, 1, 1]])));
        for v in k.basis_vecs() {
            assert!(m(&[&[1, 1, 1]]).mul_vec(&v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn intersect_examples() {
        let e = |i: usize, n: usize| {
            let mut v = vec![Rat::zero(); n];
            v[i] = Rat::one();
            v
        };
        let a = Subspace::span(2, [e(0, 2)]);
        let b = Subspace::span(2, [e(1, 2)]);
        assert_eq!(a.intersect(&a).unwrap(), a);
        assert_eq!(a.intersect(&b).unwrap().dim(), 0);
        let a = Subspace::span(3, [e(0, 3), e(1, 3)]);
        let b = Subspace::span(3, [e(1, 3), e(2, 3)]);
        // Brute force: the only small vectors in both spans are multiples of e2.
        let both: Vec<Vec<Rat>> = (-2..=2)
            .flat_map(|x| (-2..=2).flat_map(move |y| (-2..=2).map(move |z| rat_vec(&[x, y, z]))))
            .filter(|v| a.contains(v) && b.contains(v))
            .collect();
        let oracle = Subspace::span(3, both);
        assert_eq!(a.intersect(&b).unwrap(), oracle);
        assert_eq!(oracle, Subspace::span(3, [e(1, 3)]));
        assert!(a.intersect(&Subspace::zero(2)).is_err());
    }

    #[test]
    fn annihilator_examples() {
        assert_eq!(Subspace::zero(3).annihilator(), Subspace::full(3));
        assert_eq!(Subspace::full(3).annihilator().dim(), 0);
        let s = Subspace::span(2, [rat_vec(&[1, 0])]);
        assert_eq!(s.annihilator(), Subspace::span(2, [rat_vec(&[0, 1])]));
    }

    #[test]
    fn wedge_power_dims() {
        let q = QuotientSpace::modulo(Subspace::zero(3)).unwrap();
        assert_eq!(wedge_power(&q, 0).dim(), 1);
        assert_eq!(wedge_power(&q, 2).dim(), 3);
        let q2 = QuotientSpace::modulo(Subspace::zero(2)).unwrap();
        assert_eq!(wedge_power(&q2, 3).dim(), 0);
        let w1 = wedge_power(&q, 1);
        // e1 ∧ e0 = -(e0 ∧ e1)
        assert_eq!(w1.multiply(1, &w1, 0), Some((-1, 0)));
        assert_eq!(w1.multiply(1, &w1, 1), None);
    }

    #[test]
    fn quotient_coordinates() {
        let ambient = Subspace::span(3, [rat_vec(&[0, 1, 0]), rat_vec(&[0, 0, 1])]);
        let killed = Subspace::span(3, [rat_vec(&[0, 0, 1])]);
        let q = QuotientSpace::new(ambient, killed).unwrap();
        assert_eq!(q.dim(), 1);
        assert_eq!(q.section_basis().row(0), rat_vec(&[0, 1, 0]).as_slice());
        assert_eq!(q.coords(&rat_vec(&[0, 3, 7])).unwrap(), rat_vec(&[3]));
        assert!(q.coords(&rat_vec(&[1, 0, 0])).is_none());
        let bad = QuotientSpace::new(Subspace::zero(3), Subspace::full(3));
        assert_eq!(bad.unwrap_err(), LinalgError::NotContained);
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rat("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rat("-4").unwrap(), rat(-4));
        assert!(parse_rat("1.5").is_err());
        assert!(parse_rat("1/0").is_err());
        assert_eq!(format_rat(&ratio(-2, 4)), "-1/2");
        assert_eq!(format_rat(&rat(7)), "7");
    }

    #[test]
    fn exterior_product_matches_minors() {
        let u = rat_vec(&[1, 2, 0]);
        let v = rat_vec(&[0, 1, 3]);
        let w = rat_vec(&[2, 0, 1]);
        let uv = wedge_vectors(3, &[u.clone(), v.clone()]);
        let via_product = exterior_product(3, &u, 1, &v, 1);
        assert_eq!(uv, via_product);
        let uvw = exterior_product(3, &uv, 2, &w, 1);
        let det = RatMatrix::from_rows(3, vec![u, v, w]).determinant();
        assert_eq!(uvw, vec![det]);
    }

    fn small_matrix(rows: usize, cols: usize) -> impl Strategy<Value = RatMatrix> {
        proptest::collection::vec(-3i64..=3, rows * cols)
            .prop_map(move |v| RatMatrix::from_vec(rows, cols, v.into_iter().map(rat).collect()))
    }

    proptest! {
        #[test]
        fn rank_nullity(a in small_matrix(3, 5)) {
            prop_assert_eq!(a.kernel().dim() + a.rank(), 5);
        }

        #[test]
        fn rref_is_canonical(a in small_matrix(3, 4), g in small_matrix(3, 3)) {
            // Changing the spanning set by an invertible matrix leaves the subspace untouched.
            prop_assume!(!g.determinant().is_zero());
            let s = Subspace::row_space(&a);
            let t = Subspace::row_space(&(&g * &a));
            prop_assert_eq!(s, t);
        }

        #[test]
        fn grassmann_identity(a in small_matrix(2, 4), b in small_matrix(3, 4)) {
            let (sa, sb) = (Subspace::row_space(&a), Subspace::row_space(&b));
            let sum = sa.sum(&sb).unwrap();
            let int = sa.intersect(&sb).unwrap();
            prop_assert_eq!(sum.dim() + int.dim(), sa.dim() + sb.dim());
            prop_assert!(int.is_subspace_of(&sa) && int.is_subspace_of(&sb));
        }

        #[test]
        fn double_annihilator(a in small_matrix(2, 4)) {
            let s = Subspace::row_space(&a);
            let ann = s.annihilator();
            prop_assert_eq!(ann.dim(), 4 - s.dim());
            prop_assert_eq!(ann.annihilator(), s);
        }

        #[test]
        fn inverse_roundtrip(a in small_matrix(3, 3)) {
            match a.inverse() {
                Some(inv) => prop_assert_eq!(&a * &inv, RatMatrix::identity(3)),
                None => prop_assert!(a.determinant().is_zero()),
            }
        }
    }
}
