//! Matroids given by their lattice of flats, Bergman fans, the balancing
//! condition and smoothness certificates.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{int_matrix_to_rat, maximal_minor_gcd, primitive_vector, quotient_projection, to_rat_vec, IntMatrix};
use crate::linalg::{format_rat, subsets, sub_vec, Rat, RatMatrix};
use crate::polyhedra::{covers, PolyComplex, PolyError, Polyhedron};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatroidError {
    #[error("matroid has a loop (the empty set is not closed)")]
    NotLoopless,
    #[error("flats are not closed under intersection: {0:?} ∩ {1:?}")]
    NotIntersectionClosed(Vec<usize>, Vec<usize>),
    #[error("flats covering {0:?} do not partition its complement")]
    CoverPartition(Vec<usize>),
    #[error("bases violate the exchange axiom")]
    BadBases,
    #[error("element {0} is outside the ground set")]
    ElementOutOfRange(usize),
    #[error("ground set of size {0} is too large")]
    TooLarge(usize),
    #[error("complex is not pure")]
    NotPure,
    #[error("top-dimensional face {0} has no weight")]
    MissingWeights(usize),
    #[error("certificate basis is not unimodular or does not kill the face directions")]
    BadBasis,
    #[error("certificate shape mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

type Mask = u64;

fn mask_of(set: &[usize]) -> Mask {
    set.iter().fold(0, |m, &i| m | (1 << i))
}

fn elems(m: Mask) -> Vec<usize> {
    (0..64).filter(|i| m & (1 << i) != 0).collect()
}

/// A loopless matroid on `{0, …, ground-1}` presented by its flats.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matroid {
    ground: usize,
    /// Sorted by rank, then by mask.
    flats: Vec<Mask>,
    ranks: Vec<usize>,
}

impl Matroid {
    /// Builds a matroid from flats. The empty set and the ground set may be omitted.
    pub fn from_flats(ground: usize, flats: &[Vec<usize>]) -> Result<Self, MatroidError> {
        if ground > 63 {
            return Err(MatroidError::TooLarge(ground));
        }
        let full: Mask = if ground == 0 { 0 } else { (1 << ground) - 1 };
        let mut set: BTreeSet<Mask> = BTreeSet::new();
        for f in flats {
            if let Some(&e) = f.iter().find(|&&e| e >= ground) {
                return Err(MatroidError::ElementOutOfRange(e));
            }
            set.insert(mask_of(f));
        }
        set.insert(full);
        let bottom = set.iter().fold(full, |acc, &f| acc & f);
        if bottom != 0 {
            return Err(MatroidError::NotLoopless);
        }
        set.insert(0);
        let list: Vec<Mask> = set.iter().copied().collect();
        for (i, &a) in list.iter().enumerate() {
            for &b in &list[i + 1..] {
                if !set.contains(&(a & b)) {
                    return Err(MatroidError::NotIntersectionClosed(elems(a), elems(b)));
                }
            }
        }
        // Covering flats of each flat must partition the complement.
        for &f in &list {
            if f == full {
                continue;
            }
            let above: Vec<Mask> = list.iter().copied().filter(|&g| g != f && g & f == f).collect();
            let covers: Vec<Mask> =
                above.iter().copied().filter(|&g| !above.iter().any(|&h| h != g && h & g == h)).collect();
            let mut seen: Mask = 0;
            for &g in &covers {
                let part = g & !f;
                if seen & part != 0 {
                    return Err(MatroidError::CoverPartition(elems(f)));
                }
                seen |= part;
            }
            if seen != full & !f {
                return Err(MatroidError::CoverPartition(elems(f)));
            }
        }
        let mut ranks = vec![0usize; list.len()];
        for (i, &f) in list.iter().enumerate() {
            // Masks are increasing, so every proper subflat has a smaller index.
            ranks[i] = (0..i)
                .filter(|&j| list[j] & f == list[j] && list[j] != f)
                .map(|j| ranks[j] + 1)
                .max()
                .unwrap_or(0);
        }
        let mut order: Vec<usize> = (0..list.len()).collect();
        order.sort_by_key(|&i| (ranks[i], list[i]));
        Ok(Matroid {
            ground,
            flats: order.iter().map(|&i| list[i]).collect(),
            ranks: order.iter().map(|&i| ranks[i]).collect(),
        })
    }

    /// Builds a matroid from its bases, checking the exchange axiom.
    pub fn from_bases(ground: usize, bases: &[Vec<usize>]) -> Result<Self, MatroidError> {
        if ground > 20 {
            return Err(MatroidError::TooLarge(ground));
        }
        if bases.is_empty() {
            return Err(MatroidError::BadBases);
        }
        let bs: BTreeSet<Mask> = bases
            .iter()
            .map(|b| match b.iter().find(|&&e| e >= ground) {
                Some(&e) => Err(MatroidError::ElementOutOfRange(e)),
                None => Ok(mask_of(b)),
            })
            .collect::<Result<_, _>>()?;
        let r = bs.iter().next().unwrap().count_ones();
        if bs.iter().any(|b| b.count_ones() != r) {
            return Err(MatroidError::BadBases);
        }
        for &a in &bs {
            for &b in &bs {
                for x in elems(a & !b) {
                    let ok = elems(b & !a).iter().any(|&y| bs.contains(&((a & !(1 << x)) | (1 << y))));
                    if !ok {
                        return Err(MatroidError::BadBases);
                    }
                }
            }
        }
        let rank = |s: Mask| bs.iter().map(|b| (b & s).count_ones()).max().unwrap_or(0);
        let mut flats = Vec::new();
        for s in 0..(1u64 << ground) {
            let rs = rank(s);
            let closed = (0..ground).filter(|&e| s & (1 << e) == 0).all(|e| rank(s | (1 << e)) > rs);
            if closed {
                flats.push(elems(s));
            }
        }
        Self::from_flats(ground, &flats)
    }

    /// Uniform matroid `U_{r,n}`.
    pub fn uniform(r: usize, n: usize) -> Result<Self, MatroidError> {
        let mut flats: Vec<Vec<usize>> = Vec::new();
        for k in 0..r.min(n) {
            flats.extend(subsets(n, k));
        }
        Self::from_flats(n, &flats)
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn rank(&self) -> usize {
        *self.ranks.last().unwrap_or(&0)
    }

    pub fn flats(&self) -> Vec<Vec<usize>> {
        self.flats.iter().map(|&f| elems(f)).collect()
    }

    pub fn flats_of_rank(&self, k: usize) -> Vec<Vec<usize>> {
        self.flats.iter().zip(&self.ranks).filter(|(_, &r)| r == k).map(|(&f, _)| elems(f)).collect()
    }

    fn full(&self) -> Mask {
        if self.ground == 0 {
            0
        } else {
            (1 << self.ground) - 1
        }
    }

    fn proper_flats(&self) -> Vec<Mask> {
        let full = self.full();
        self.flats.iter().copied().filter(|&f| f != 0 && f != full).collect()
    }

    /// All chains `F₁ ⊊ … ⊊ F_k` of proper nonempty flats (including the empty chain).
    pub fn flag_chains(&self) -> Vec<Vec<Vec<usize>>> {
        let proper = self.proper_flats();
        let mut out = vec![vec![]];
        let mut frontier: Vec<Vec<Mask>> = vec![vec![]];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for chain in &frontier {
                for &f in &proper {
                    let ok = chain.last().map_or(true, |&l| l & f == l && l != f);
                    if ok {
                        let mut c = chain.clone();
                        c.push(f);
                        out.push(c.iter().map(|&m| elems(m)).collect());
                        next.push(c);
                    }
                }
            }
            frontier = next;
        }
        out
    }

    fn maximal_chains(&self) -> Vec<Vec<Mask>> {
        let proper = self.proper_flats();
        let mut done = Vec::new();
        let mut frontier: Vec<Vec<Mask>> = vec![vec![]];
        while let Some(chain) = frontier.pop() {
            let ext: Vec<Mask> = proper
                .iter()
                .copied()
                .filter(|&f| chain.last().map_or(true, |&l| l & f == l && l != f))
                .collect();
            if ext.is_empty() {
                done.push(chain);
                continue;
            }
            for f in ext {
                let mut c = chain.clone();
                c.push(f);
                frontier.push(c);
            }
        }
        done.sort();
        done
    }

    /// Contraction by a flat: flats `G ∖ F` for `G ⊇ F`, relabelled to `0..`.
    pub fn contract(&self, flat: &[usize]) -> Result<Matroid, MatroidError> {
        let f = mask_of(flat);
        let rest: Vec<usize> = (0..self.ground).filter(|&e| f & (1 << e) == 0).collect();
        let relabel = |g: Mask| -> Vec<usize> {
            rest.iter().enumerate().filter(|(_, &e)| g & (1 << e) != 0).map(|(i, _)| i).collect()
        };
        let flats: Vec<Vec<usize>> = self.flats.iter().filter(|&&g| g & f == f).map(|&g| relabel(g & !f)).collect();
        Matroid::from_flats(rest.len(), &flats)
    }

    /// Restriction to a flat: flats `G ∩ S`, relabelled to `0..`.
    pub fn restrict(&self, set: &[usize]) -> Result<Matroid, MatroidError> {
        let s = mask_of(set);
        let keep: Vec<usize> = (0..self.ground).filter(|&e| s & (1 << e) != 0).collect();
        let flats: BTreeSet<Vec<usize>> = self
            .flats
            .iter()
            .map(|&g| keep.iter().enumerate().filter(|(_, &e)| g & (1 << e) != 0).map(|(i, _)| i).collect())
            .collect();
        Matroid::from_flats(keep.len(), &flats.into_iter().collect::<Vec<_>>())
    }
}

/// `Z^g → Z^g/Z𝟏 ≅ Z^{g-1}`: `e₀ ↦ -(1,…,1)`, `e_i ↦` the `i`th standard vector.
pub fn bergman_coordinates(g: usize, set: &[usize]) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); g.saturating_sub(1)];
    for &i in set {
        if i == 0 {
            for x in v.iter_mut() {
                *x -= Rat::one();
            }
        } else {
            v[i - 1] += Rat::one();
        }
    }
    v
}

/// Bergman fan of a loopless matroid in `Z^g/Z𝟏`, with all top cones of weight 1.
pub fn bergman_fan(m: &Matroid) -> Result<PolyComplex, MatroidError> {
    let g = m.ground();
    let n = g.saturating_sub(1);
    let cones = m
        .maximal_chains()
        .into_iter()
        .map(|chain| {
            let rays = chain.iter().map(|&f| bergman_coordinates(g, &elems(f))).collect();
            Polyhedron::cone(n, rays).map(|c| (c, Some(1)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PolyComplex::from_maximal_unchecked(n, cones, vec![])?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceViolation {
    pub face: usize,
    pub residual: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceReport {
    pub balanced: bool,
    pub checked: usize,
    pub violations: Vec<BalanceViolation>,
}

/// Checks `Σ_{σ ⊃ τ} w(σ) u_{σ/τ} ∈ N_τ` at every codimension-one face `τ`.
pub fn check_balanced(c: &PolyComplex) -> Result<BalanceReport, MatroidError> {
    if !c.is_pure() {
        return Err(MatroidError::NotPure);
    }
    let d = c.dim();
    for &m in c.maximal_faces() {
        if c.weight(m).is_none() {
            return Err(MatroidError::MissingWeights(m));
        }
    }
    if d == 0 {
        return Ok(BalanceReport { balanced: true, checked: 0, violations: vec![] });
    }
    let mut violations = Vec::new();
    let ridges = c.faces_of_dim(d - 1);
    for &tau in &ridges {
        let tf = c.face(tau);
        let proj = quotient_projection(c.rank(), &tf.linear_span().basis_vecs());
        let x = tf.relint_point();
        let mut sum = vec![Rat::zero(); proj.target_rank()];
        for &s in c.cofaces(tau) {
            if c.face(s).dim() != d {
                continue;
            }
            let dir = proj.apply(&sub_vec(&c.face(s).relint_point(), &x));
            let u = to_rat_vec(&primitive_vector(&dir));
            let w = Rat::from_integer(BigInt::from(c.weight(s).unwrap_or(0)));
            for (acc, ui) in sum.iter_mut().zip(&u) {
                *acc += &w * ui;
            }
        }
        if sum.iter().any(|x| !x.is_zero()) {
            violations.push(BalanceViolation { face: tau, residual: sum.iter().map(format_rat).collect() });
        }
    }
    Ok(BalanceReport { balanced: violations.is_empty(), checked: ridges.len(), violations })
}

/// A claimed identification of the star-quotient at a face with a Bergman fan.
///
/// `basis` is an integer `(g-1) × n` matrix on `N` whose kernel is the span of the
/// face; it induces `N/N_P ≅ Z^g/Z𝟏` when it is unimodular.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmoothnessCertificate {
    pub face: usize,
    pub matroid: Matroid,
    pub basis: IntMatrix,
}

/// Images of the star cones at `face` under the certificate matrix.
fn certified_cones(c: &PolyComplex, face: usize, basis: &RatMatrix) -> Result<Vec<Polyhedron>, PolyError> {
    let x = c.face(face).relint_point();
    c.cofaces(face)
        .iter()
        .copied()
        .filter(|&q| c.cofaces(q).len() == 1)
        .map(|q| {
            let qf = c.face(q);
            let mut gens: Vec<Vec<Rat>> = qf.vertices().iter().map(|v| basis.mul_vec(&sub_vec(v, &x))).collect();
            gens.extend(qf.recession_generators().iter().map(|r| basis.mul_vec(r)));
            Polyhedron::cone(basis.rows(), gens)
        })
        .collect()
}

/// Whether two collections of cones of a common dimension have the same support.
pub fn same_support(a: &[Polyhedron], b: &[Polyhedron]) -> bool {
    let one_way = |xs: &[Polyhedron], ys: &[Polyhedron]| {
        xs.iter().all(|s| {
            let pieces: Vec<Polyhedron> = ys
                .iter()
                .filter_map(|t| s.intersection(t))
                .filter(|p| p.dim() == s.dim())
                .collect::<BTreeSet<_>>()
                .into_iter()
                .collect();
            covers(s, &pieces)
        })
    };
    one_way(a, b) && one_way(b, a)
}

pub fn check_smooth_certificate(c: &PolyComplex, cert: &SmoothnessCertificate) -> Result<bool, MatroidError> {
    if !c.is_pure() {
        return Err(MatroidError::NotPure);
    }
    if cert.face >= c.len() {
        return Err(PolyError::FaceNotInComplex.into());
    }
    let g = cert.matroid.ground();
    let n = c.rank();
    let rows = cert.basis.len();
    let expected_rows = g.saturating_sub(1);
    if rows != expected_rows || cert.basis.iter().any(|r| r.len() != n) {
        let found_cols = cert.basis.first().map_or(0, |r| r.len());
        return Err(MatroidError::DimensionMismatch {
            expected: format!("{expected_rows}x{n}"),
            found: format!("{rows}x{found_cols}"),
        });
    }
    if c.maximal_faces().iter().any(|&m| c.weight(m).is_some_and(|w| w != 1)) {
        return Ok(false);
    }
    let face = c.face(cert.face);
    let quotient_rank = n - face.dim();
    let star_dim = c.dim() - face.dim();
    let bergman_dim = cert.matroid.rank().saturating_sub(1);
    if quotient_rank != expected_rows || star_dim != bergman_dim {
        return Ok(false);
    }
    let basis = int_matrix_to_rat(&cert.basis, n);
    let span = face.linear_span();
    if span.basis_vecs().iter().any(|v| basis.mul_vec(v).iter().any(|x| !x.is_zero())) {
        return Err(MatroidError::BadBasis);
    }
    if rows > 0 && maximal_minor_gcd(&cert.basis, n).map_or(true, |d| !d.is_one()) {
        return Err(MatroidError::BadBasis);
    }
    let ours = certified_cones(c, cert.face, &basis)?;
    let bergman = bergman_fan(&cert.matroid)?;
    let theirs: Vec<Polyhedron> = bergman.maximal_faces().iter().map(|&i| bergman.face(i).clone()).collect();
    Ok(same_support(&ours, &theirs))
}

/// All loopless matroids on `g` elements of rank `r`, up to the listed bases (not up to isomorphism).
fn matroids_of(g: usize, r: usize) -> Vec<Matroid> {
    let cands = subsets(g, r);
    let k = cands.len();
    if k > 16 {
        return vec![];
    }
    let mut out = Vec::new();
    for mask in 1u32..(1 << k) {
        let bases: Vec<Vec<usize>> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| cands[i].clone()).collect();
        if let Ok(m) = Matroid::from_bases(g, &bases) {
            if !out.contains(&m) {
                out.push(m);
            }
        }
    }
    out
}

/// Exhaustive search for a certificate at `face` over matroids on at most five elements.
///
/// Rays of the star-quotient are matched to rays of the Bergman fan, so a `None`
/// result is not a proof that no certificate exists.
pub fn search_certificate(c: &PolyComplex, face: usize) -> Result<Option<SmoothnessCertificate>, MatroidError> {
    if face >= c.len() {
        return Err(PolyError::FaceNotInComplex.into());
    }
    let fdim = c.face(face).dim();
    let q = c.rank() - fdim;
    let g = q + 1;
    let r = c.dim() - fdim + 1;
    if g > 5 || r > g {
        return Ok(None);
    }
    let proj = quotient_projection(c.rank(), &c.face(face).linear_span().basis_vecs());
    let (qfan, _) = c.star_quotient_linear(face)?;
    let qrays: Vec<Vec<Rat>> = qfan
        .faces_of_dim(1)
        .iter()
        .map(|&i| qfan.face(i).rays_rat()[0].clone())
        .collect();
    let Some(src) = subsets(qrays.len(), q)
        .into_iter()
        .find(|s| RatMatrix::from_rows(q, s.iter().map(|&i| qrays[i].clone()).collect()).determinant().abs() == Rat::one())
    else {
        return Ok(None);
    };
    let a = RatMatrix::from_rows(q, src.iter().map(|&i| qrays[i].clone()).collect()).transpose();
    let a_inv = a.inverse().expect("unimodular");
    let pm = proj.matrix_rat();
    for m in matroids_of(g, r) {
        let fan = bergman_fan(&m)?;
        let brays: Vec<Vec<Rat>> = fan.faces_of_dim(1).iter().map(|&i| fan.face(i).rays_rat()[0].clone()).collect();
        let mut attempts = 0usize;
        for choice in ordered_choices(brays.len(), q) {
            attempts += 1;
            if attempts > 50_000 {
                break;
            }
            let b = RatMatrix::from_rows(q, choice.iter().map(|&i| brays[i].clone()).collect()).transpose();
            if b.determinant().abs() != Rat::one() {
                continue;
            }
            let cmat = &(&b * &a_inv) * &pm;
            let basis: IntMatrix = cmat.row_vecs().iter().map(|row| row.iter().map(|x| x.to_integer()).collect()).collect();
            let cert = SmoothnessCertificate { face, matroid: m.clone(), basis };
            if check_smooth_certificate(c, &cert)? {
                return Ok(Some(cert));
            }
        }
    }
    Ok(None)
}

fn ordered_choices(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !cur.contains(&i) {
                cur.push(i);
                rec(n, k, cur, out);
                cur.pop();
            }
        }
    }
    rec(n, k, &mut cur, &mut out);
    out
}
