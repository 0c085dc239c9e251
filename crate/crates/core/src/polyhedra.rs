//! Rational polyhedra, polyhedral complexes with a partial compactification,
//! enriched fans, open stars, star-quotients and refinements.
//!
//! Polyhedra are given by generators. The inequality description is derived
//! with the double description method on the homogenized cone, and both
//! descriptions are put in canonical form so that equal sets compare equal.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::hash::{Hash, Hasher};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::lattice::{
    is_primitive, is_unimodular_set, maximal_minor_gcd, primitive_vector, quotient_projection, to_rat_vec,
    LatticeProjection,
};
use crate::linalg::{dot, format_rat, kernel, scale_vec, sub_vec, Rat, RatMatrix, Subspace};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("face {0} has a face that is not listed")]
    NotFaceClosed(usize),
    #[error("faces {0} and {1} intersect in a set that is not a face of both")]
    BadIntersection(usize, usize),
    #[error("non-rational input: {0}")]
    NonRationalInput(String),
    #[error("ray {0} is not a nonzero primitive integer vector")]
    NonPrimitiveRay(String),
    #[error("a polyhedron needs at least one vertex")]
    Empty,
    #[error("expected ambient rank {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("cones do not form a fan: {0}")]
    FanViolation(String),
    #[error("face is not in the complex")]
    FaceNotInComplex,
    #[error("set of faces is not upward closed")]
    NotOpen,
    #[error("point is not in the relative interior of the face")]
    NotInRelativeInterior,
    #[error("projection is not a surjection with saturated dual image")]
    BadProjection,
}

fn fmt_vec(v: &[Rat]) -> String {
    let parts: Vec<String> = v.iter().map(format_rat).collect();
    format!("[{}]", parts.join(", "))
}

fn primitive_rat(v: &[Rat]) -> Vec<Rat> {
    to_rat_vec(&primitive_vector(v))
}

/// Cone in `Q^d` as lineality basis plus extreme rays modulo the lineality.
struct DdCone {
    lineality: Vec<Vec<Rat>>,
    rays: Vec<Vec<Rat>>,
}

type Bits = Vec<u64>;

fn bit_set(b: &mut Bits, k: usize) {
    b[k / 64] |= 1 << (k % 64);
}

fn bits_and(a: &Bits, b: &Bits) -> Bits {
    a.iter().zip(b).map(|(x, y)| x & y).collect()
}

fn bits_subset(a: &Bits, b: &Bits) -> bool {
    a.iter().zip(b).all(|(x, y)| x & !y == 0)
}

fn bits_count(a: &Bits) -> usize {
    a.iter().map(|x| x.count_ones() as usize).sum()
}

/// Double description for `{y : E y = 0, A y ≥ 0}` with the combinatorial adjacency test.
fn double_description(d: usize, equations: &[Vec<Rat>], inequalities: &[Vec<Rat>]) -> DdCone {
    let mut lin: Vec<Vec<Rat>> = if equations.is_empty() {
        Subspace::full(d).basis_vecs()
    } else {
        kernel(&RatMatrix::from_rows(d, equations.to_vec())).basis_vecs()
    };
    let ambient = lin.len();
    let words = inequalities.len().div_ceil(64).max(1);
    let mut rays: Vec<Vec<Rat>> = Vec::new();
    let mut zeros: Vec<Bits> = Vec::new();
    for (k, a) in inequalities.iter().enumerate() {
        if let Some(idx) = lin.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l0 = lin.swap_remove(idx);
            let mut s0 = dot(a, &l0);
            if s0.is_negative() {
                l0 = l0.iter().map(|x| -x).collect();
                s0 = -s0;
            }
            for l in lin.iter_mut() {
                let s = dot(a, l);
                if !s.is_zero() {
                    *l = sub_vec(l, &scale_vec(&l0, &(s / &s0)));
                }
            }
            for (r, z) in rays.iter_mut().zip(zeros.iter_mut()) {
                let s = dot(a, r);
                if !s.is_zero() {
                    *r = primitive_rat(&sub_vec(r, &scale_vec(&l0, &(s / &s0))));
                }
                bit_set(z, k);
            }
            let mut z = vec![0u64; words];
            for j in 0..k {
                bit_set(&mut z, j);
            }
            rays.push(primitive_rat(&l0));
            zeros.push(z);
            continue;
        }
        let vals: Vec<Rat> = rays.iter().map(|r| dot(a, r)).collect();
        let eff = ambient - lin.len();
        let need = eff.saturating_sub(2);
        let mut new_rays = Vec::new();
        let mut new_zeros = Vec::new();
        for (i, v) in vals.iter().enumerate() {
            if v.is_positive() {
                new_rays.push(rays[i].clone());
                new_zeros.push(zeros[i].clone());
            } else if v.is_zero() {
                let mut z = zeros[i].clone();
                bit_set(&mut z, k);
                new_rays.push(rays[i].clone());
                new_zeros.push(z);
            }
        }
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        for &p in &pos {
            for &q in &neg {
                let z = bits_and(&zeros[p], &zeros[q]);
                if bits_count(&z) < need {
                    continue;
                }
                let adjacent = (0..rays.len()).all(|o| o == p || o == q || !bits_subset(&z, &zeros[o]));
                if !adjacent {
                    continue;
                }
                let comb: Vec<Rat> =
                    rays[q].iter().zip(&rays[p]).map(|(y, x)| &vals[p] * y - &vals[q] * x).collect();
                let mut zz = z;
                bit_set(&mut zz, k);
                new_rays.push(primitive_rat(&comb));
                new_zeros.push(zz);
            }
        }
        rays = new_rays;
        zeros = new_zeros;
    }
    DdCone { lineality: lin, rays }
}

/// A nonempty rational polyhedron `conv(V) + cone(R) + L`.
///
/// Both descriptions are canonical: vertices and rays are taken modulo the
/// lineality space `L` (orthogonally projected), rays are primitive, equations
/// are in reduced echelon form and facet normals are primitive integer
/// covectors reduced modulo the equations.
#[derive(Clone, Debug)]
pub struct Polyhedron {
    rank: usize,
    vertices: Vec<Vec<Rat>>,
    rays: Vec<Vec<BigInt>>,
    lineality: Subspace,
    /// `⟨x, m⟩ = a`
    equations: Vec<(Vec<Rat>, Rat)>,
    /// `⟨x, m⟩ ≥ a`
    facets: Vec<(Vec<BigInt>, Rat)>,
}

impl PartialEq for Polyhedron {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank
            && self.vertices == other.vertices
            && self.rays == other.rays
            && self.lineality == other.lineality
    }
}

impl Eq for Polyhedron {}

impl Hash for Polyhedron {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank.hash(state);
        self.vertices.hash(state);
        self.rays.hash(state);
        self.lineality.hash(state);
    }
}

impl Ord for Polyhedron {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.rank, self.dim(), &self.vertices, &self.rays)
            .cmp(&(other.rank, other.dim(), &other.vertices, &other.rays))
            .then_with(|| self.lineality.basis_vecs().cmp(&other.lineality.basis_vecs()))
    }
}

impl PartialOrd for Polyhedron {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn homogenize(v: &[Rat], t: Rat) -> Vec<Rat> {
    let mut out = v.to_vec();
    out.push(t);
    out
}

impl Polyhedron {
    /// Builds `conv(vertices) + cone(rays)`; a line is given by a ray and its negative.
    pub fn new(rank: usize, vertices: Vec<Vec<Rat>>, rays: Vec<Vec<Rat>>) -> Result<Self, PolyError> {
        if vertices.is_empty() {
            return Err(PolyError::Empty);
        }
        for v in vertices.iter().chain(&rays) {
            if v.len() != rank {
                return Err(PolyError::DimensionMismatch { expected: rank, found: v.len() });
            }
        }
        let gens: Vec<Vec<Rat>> = vertices
            .iter()
            .map(|v| homogenize(v, Rat::one()))
            .chain(rays.iter().filter(|r| r.iter().any(|x| !x.is_zero())).map(|r| homogenize(r, Rat::zero())))
            .collect();
        let dual = double_description(rank + 1, &[], &gens);
        Ok(Self::from_dual(rank, dual))
    }

    /// Cone generated by integer rays.
    pub fn cone(rank: usize, rays: Vec<Vec<Rat>>) -> Result<Self, PolyError> {
        Self::new(rank, vec![vec![Rat::zero(); rank]], rays)
    }

    pub fn point(p: Vec<Rat>) -> Self {
        let rank = p.len();
        Self::new(rank, vec![p], vec![]).expect("a point is a polyhedron")
    }

    /// The whole space `Q^rank`.
    pub fn whole_space(rank: usize) -> Self {
        let mut rays = Vec::new();
        for i in 0..rank {
            let mut e = vec![Rat::zero(); rank];
            e[i] = Rat::one();
            rays.push(e.clone());
            e[i] = -Rat::one();
            rays.push(e);
        }
        Self::cone(rank, rays).expect("space is a cone")
    }

    /// Solution set of `⟨x,m⟩ = a` (equations) and `⟨x,m⟩ ≥ a` (inequalities), or `None` if empty.
    pub fn from_h(rank: usize, equations: &[(Vec<Rat>, Rat)], inequalities: &[(Vec<Rat>, Rat)]) -> Option<Self> {
        let eqs: Vec<Vec<Rat>> = equations.iter().map(|(m, a)| homogenize(m, -a.clone())).collect();
        let mut ineqs: Vec<Vec<Rat>> = inequalities.iter().map(|(m, a)| homogenize(m, -a.clone())).collect();
        let mut et = vec![Rat::zero(); rank + 1];
        et[rank] = Rat::one();
        ineqs.push(et);
        let cone = double_description(rank + 1, &eqs, &ineqs);
        let mut vertices = Vec::new();
        let mut rays = Vec::new();
        for z in cone.rays {
            let t = z[rank].clone();
            if t.is_positive() {
                vertices.push(z[..rank].iter().map(|x| x / &t).collect());
            } else {
                rays.push(z[..rank].to_vec());
            }
        }
        if vertices.is_empty() {
            return None;
        }
        for l in cone.lineality {
            let l: Vec<Rat> = l[..rank].to_vec();
            rays.push(l.iter().map(|x| -x).collect());
            rays.push(l);
        }
        Self::new(rank, vertices, rays).ok()
    }

    fn from_dual(rank: usize, dual: DdCone) -> Self {
        let d = rank + 1;
        let eq_space = Subspace::span(d, dual.lineality);
        let eq_rows = eq_space.basis_vecs();
        let pivots = eq_space.pivots().to_vec();
        let mut facet_set: BTreeSet<(Vec<BigInt>, Rat)> = BTreeSet::new();
        for mut y in dual.rays {
            for (row, &p) in eq_rows.iter().zip(&pivots) {
                if !y[p].is_zero() {
                    let c = y[p].clone();
                    y = sub_vec(&y, &scale_vec(row, &c));
                }
            }
            if y[..rank].iter().all(Zero::is_zero) {
                continue;
            }
            let prim = primitive_vector(&y[..rank]);
            let idx = (0..rank).find(|&i| !y[i].is_zero()).unwrap();
            let scale = Rat::from_integer(prim[idx].clone()) / &y[idx];
            let a = -(&y[rank] * &scale);
            facet_set.insert((prim, a));
        }
        let facets: Vec<(Vec<BigInt>, Rat)> = facet_set.into_iter().collect();
        let equations: Vec<(Vec<Rat>, Rat)> =
            eq_rows.iter().map(|row| (row[..rank].to_vec(), -row[rank].clone())).collect();

        // Recompute generators from the canonical inequality description.
        let hom_eqs: Vec<Vec<Rat>> = eq_rows.clone();
        let mut hom_ineqs: Vec<Vec<Rat>> =
            facets.iter().map(|(m, a)| homogenize(&to_rat_vec(m), -a.clone())).collect();
        let mut et = vec![Rat::zero(); d];
        et[rank] = Rat::one();
        hom_ineqs.push(et);
        let cone = double_description(d, &hom_eqs, &hom_ineqs);
        let lin_vecs: Vec<Vec<Rat>> = cone.lineality.iter().map(|l| l[..rank].to_vec()).collect();
        let lineality = Subspace::span(rank, lin_vecs);
        let projector = OrthoProjector::new(&lineality);
        let mut vertices = BTreeSet::new();
        let mut rays = BTreeSet::new();
        for z in cone.rays {
            let t = z[rank].clone();
            if t.is_positive() {
                let v: Vec<Rat> = z[..rank].iter().map(|x| x / &t).collect();
                vertices.insert(projector.project(&v));
            } else {
                let r = projector.project(&z[..rank]);
                rays.insert(primitive_vector(&r));
            }
        }
        Polyhedron {
            rank,
            vertices: vertices.into_iter().collect(),
            rays: rays.into_iter().collect(),
            lineality,
            equations,
            facets,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.rank - self.equations.len()
    }

    pub fn vertices(&self) -> &[Vec<Rat>] {
        &self.vertices
    }

    pub fn rays(&self) -> &[Vec<BigInt>] {
        &self.rays
    }

    pub fn rays_rat(&self) -> Vec<Vec<Rat>> {
        self.rays.iter().map(|r| to_rat_vec(r)).collect()
    }

    pub fn lineality(&self) -> &Subspace {
        &self.lineality
    }

    pub fn equations(&self) -> &[(Vec<Rat>, Rat)] {
        &self.equations
    }

    pub fn facets(&self) -> &[(Vec<BigInt>, Rat)] {
        &self.facets
    }

    pub fn is_bounded(&self) -> bool {
        self.rays.is_empty() && self.lineality.dim() == 0
    }

    pub fn contains_line(&self) -> bool {
        self.lineality.dim() > 0
    }

    pub fn is_cone(&self) -> bool {
        self.vertices.len() == 1 && self.vertices[0].iter().all(Zero::is_zero)
    }

    /// Rays together with both signs of a lineality basis: a full generating set of the recession cone.
    pub fn recession_generators(&self) -> Vec<Vec<Rat>> {
        let mut out = self.rays_rat();
        for l in self.lineality.basis_vecs() {
            out.push(l.iter().map(|x| -x).collect());
            out.push(l);
        }
        out
    }

    fn facet_value(&self, i: usize, x: &[Rat]) -> Rat {
        let (m, a) = &self.facets[i];
        dot(&to_rat_vec(m), x) - a
    }

    pub fn contains(&self, x: &[Rat]) -> bool {
        self.equations.iter().all(|(m, a)| dot(m, x) == *a)
            && (0..self.facets.len()).all(|i| !self.facet_value(i, x).is_negative())
    }

    pub fn relint_contains(&self, x: &[Rat]) -> bool {
        self.equations.iter().all(|(m, a)| dot(m, x) == *a)
            && (0..self.facets.len()).all(|i| self.facet_value(i, x).is_positive())
    }

    /// Whether `r` lies in the recession cone.
    pub fn recession_contains(&self, r: &[Rat]) -> bool {
        self.equations.iter().all(|(m, _)| dot(m, r).is_zero())
            && self.facets.iter().all(|(m, _)| !dot(&to_rat_vec(m), r).is_negative())
    }

    /// A point in the relative interior: barycenter of the vertices plus the sum of the rays.
    pub fn relint_point(&self) -> Vec<Rat> {
        let k = Rat::from_integer(BigInt::from(self.vertices.len()));
        let mut p = vec![Rat::zero(); self.rank];
        for v in &self.vertices {
            for (x, y) in p.iter_mut().zip(v) {
                *x += y / &k;
            }
        }
        for r in &self.rays {
            for (x, y) in p.iter_mut().zip(r) {
                *x += Rat::from_integer(y.clone());
            }
        }
        p
    }

    pub fn recession_cone(&self) -> Polyhedron {
        Polyhedron::cone(self.rank, self.recession_generators()).expect("recession cone is nonempty")
    }

    /// Linear span of `P - P`.
    pub fn linear_span(&self) -> Subspace {
        let v0 = &self.vertices[0];
        let mut gens: Vec<Vec<Rat>> = self.vertices[1..].iter().map(|v| sub_vec(v, v0)).collect();
        gens.extend(self.recession_generators());
        Subspace::span(self.rank, gens)
    }

    /// Linear span of the cone over `P` in `Q^{rank+1}`.
    pub fn homogenized_span(&self) -> Subspace {
        let mut gens: Vec<Vec<Rat>> = self.vertices.iter().map(|v| homogenize(v, Rat::one())).collect();
        gens.extend(self.recession_generators().iter().map(|r| homogenize(r, Rat::zero())));
        Subspace::span(self.rank + 1, gens)
    }

    /// Generators of the cone over `P` (vertices at height 1, rays and lines at height 0).
    pub fn homogenized_generators(&self) -> Vec<Vec<Rat>> {
        let mut gens: Vec<Vec<Rat>> = self.vertices.iter().map(|v| homogenize(v, Rat::one())).collect();
        gens.extend(self.recession_generators().iter().map(|r| homogenize(r, Rat::zero())));
        gens
    }

    /// The cone over `P` in `Q^{rank+1}`.
    pub fn cone_over(&self) -> Polyhedron {
        Polyhedron::cone(self.rank + 1, self.homogenized_generators()).expect("cone over is nonempty")
    }

    fn tight_vertices(&self, i: usize) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.facet_value(i, &self.vertices[v]).is_zero()).collect()
    }

    fn tight_rays(&self, i: usize) -> Vec<usize> {
        let m = to_rat_vec(&self.facets[i].0);
        (0..self.rays.len()).filter(|&r| dot(&m, &to_rat_vec(&self.rays[r])).is_zero()).collect()
    }

    fn face_from_sets(&self, vs: &[usize], rs: &[usize]) -> Polyhedron {
        let vertices = vs.iter().map(|&i| self.vertices[i].clone()).collect();
        let mut rays: Vec<Vec<Rat>> = rs.iter().map(|&i| to_rat_vec(&self.rays[i])).collect();
        for l in self.lineality.basis_vecs() {
            rays.push(l.iter().map(|x| -x).collect());
            rays.push(l);
        }
        Polyhedron::new(self.rank, vertices, rays).expect("faces are nonempty")
    }

    /// Generator index sets `(vertices, rays)` of all nonempty faces, the polyhedron itself first.
    pub fn face_generator_sets(&self) -> Vec<(Vec<usize>, Vec<usize>)> {
        let tight: Vec<(BTreeSet<usize>, BTreeSet<usize>)> = (0..self.facets.len())
            .map(|i| (self.tight_vertices(i).into_iter().collect(), self.tight_rays(i).into_iter().collect()))
            .collect();
        let all = ((0..self.vertices.len()).collect::<BTreeSet<_>>(), (0..self.rays.len()).collect::<BTreeSet<_>>());
        let mut seen: BTreeSet<(Vec<usize>, Vec<usize>)> = BTreeSet::new();
        let mut order = Vec::new();
        let mut stack = vec![all];
        while let Some((vs, rs)) = stack.pop() {
            let key = (vs.iter().copied().collect::<Vec<_>>(), rs.iter().copied().collect::<Vec<_>>());
            if !seen.insert(key.clone()) {
                continue;
            }
            order.push(key);
            for (tv, tr) in &tight {
                let nv: BTreeSet<usize> = vs.intersection(tv).copied().collect();
                if nv.is_empty() {
                    continue;
                }
                let nr: BTreeSet<usize> = rs.intersection(tr).copied().collect();
                if nv.len() == vs.len() && nr.len() == rs.len() {
                    continue;
                }
                stack.push((nv, nr));
            }
        }
        order
    }

    /// All nonempty faces (including the polyhedron itself).
    pub fn faces(&self) -> Vec<Polyhedron> {
        self.face_generator_sets().iter().map(|(v, r)| self.face_from_sets(v, r)).collect()
    }

    /// The facets as polyhedra, in the order of the inequality description.
    pub fn facet_polyhedra(&self) -> Vec<Polyhedron> {
        (0..self.facets.len()).map(|i| self.face_from_sets(&self.tight_vertices(i), &self.tight_rays(i))).collect()
    }

    pub fn is_subset_of(&self, other: &Polyhedron) -> bool {
        self.rank == other.rank
            && self.vertices.iter().all(|v| other.contains(v))
            && self.recession_generators().iter().all(|r| other.recession_contains(r))
    }

    /// Whether `self` is a (nonempty) face of `other`.
    pub fn is_face_of(&self, other: &Polyhedron) -> bool {
        if !self.is_subset_of(other) {
            return false;
        }
        // The smallest face of `other` containing `self` is cut out by the facets tight on `self`.
        let x = self.relint_point();
        let mut vs: Vec<usize> = (0..other.vertices.len()).collect();
        let mut rs: Vec<usize> = (0..other.rays.len()).collect();
        for i in 0..other.facets.len() {
            if other.facet_value(i, &x).is_zero() {
                let tv = other.tight_vertices(i);
                let tr = other.tight_rays(i);
                vs.retain(|v| tv.contains(v));
                rs.retain(|r| tr.contains(r));
            }
        }
        let face = other.face_from_sets(&vs, &rs);
        face == *self
    }

    pub fn intersection(&self, other: &Polyhedron) -> Option<Polyhedron> {
        assert_eq!(self.rank, other.rank);
        let eqs: Vec<(Vec<Rat>, Rat)> = self.equations.iter().chain(&other.equations).cloned().collect();
        let ineqs: Vec<(Vec<Rat>, Rat)> = self
            .facets
            .iter()
            .chain(&other.facets)
            .map(|(m, a)| (to_rat_vec(m), a.clone()))
            .collect();
        Polyhedron::from_h(self.rank, &eqs, &ineqs)
    }

    /// Image under a linear map given by a matrix acting on column vectors.
    pub fn image(&self, map: &RatMatrix) -> Polyhedron {
        let vertices = self.vertices.iter().map(|v| map.mul_vec(v)).collect();
        let rays = self.recession_generators().iter().map(|r| map.mul_vec(r)).collect();
        Polyhedron::new(map.rows(), vertices, rays).expect("image is nonempty")
    }

    /// Pointed, simplicial, with rays extending to a lattice basis. Only meaningful for cones.
    pub fn is_unimodular_cone(&self) -> bool {
        self.is_cone() && !self.contains_line() && self.rays.len() == self.dim() && is_unimodular_set(self.rank, &self.rays)
    }

    pub fn describe(&self) -> String {
        let vs: Vec<String> = self.vertices.iter().map(|v| fmt_vec(v)).collect();
        let rs: Vec<String> = self.rays.iter().map(|r| fmt_vec(&to_rat_vec(r))).collect();
        format!("conv{{{}}} + cone{{{}}} + lin(dim {})", vs.join(", "), rs.join(", "), self.lineality.dim())
    }
}

/// Orthogonal projection onto the complement of a subspace.
struct OrthoProjector {
    basis: RatMatrix,
    gram_inv: Option<RatMatrix>,
}

impl OrthoProjector {
    fn new(s: &Subspace) -> Self {
        let basis = s.basis().clone();
        let gram_inv = (s.dim() > 0).then(|| (&basis * &basis.transpose()).inverse().expect("Gram matrix of a basis"));
        OrthoProjector { basis, gram_inv }
    }

    fn project(&self, x: &[Rat]) -> Vec<Rat> {
        match &self.gram_inv {
            None => x.to_vec(),
            Some(g) => {
                let bx = self.basis.mul_vec(x);
                let c = g.mul_vec(&bx);
                sub_vec(x, &self.basis.left_mul_vec(&c))
            }
        }
    }
}

/// A poset-open (upward closed) set of faces of a complex, as sorted face indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OpenSet {
    members: Vec<usize>,
}

impl OpenSet {
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn contains(&self, face: usize) -> bool {
        self.members.binary_search(&face).is_ok()
    }

    pub fn is_subset_of(&self, other: &OpenSet) -> bool {
        self.members.iter().all(|m| other.contains(*m))
    }
}

/// The open star of a face: the union of relative interiors of faces containing it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpenStar {
    pub face: usize,
    pub open: OpenSet,
}

impl OpenStar {
    pub fn members(&self) -> &[usize] {
        self.open.members()
    }
}

/// Rational polyhedral complex with a partial compactification `R`.
///
/// Faces are stored sorted by dimension and then by canonical generators; all
/// face indices used by the crate refer to this order.
#[derive(Clone, Debug)]
pub struct PolyComplex {
    rank: usize,
    faces: Vec<Polyhedron>,
    below: Vec<Vec<usize>>,
    above: Vec<Vec<usize>>,
    maximal: Vec<usize>,
    rays_r: Vec<Vec<BigInt>>,
    weights: Vec<Option<i64>>,
    index: HashMap<Polyhedron, usize>,
}

impl PolyComplex {
    /// Closes the given polyhedra under faces and checks that maximal faces meet in common faces.
    pub fn from_maximal(
        rank: usize,
        polys: Vec<(Polyhedron, Option<i64>)>,
        rays_r: Vec<Vec<BigInt>>,
    ) -> Result<Self, PolyError> {
        let c = Self::build(rank, polys, rays_r)?;
        c.validate()?;
        Ok(c)
    }

    /// Like [`PolyComplex::from_maximal`] without the pairwise intersection check, for inputs
    /// that are complexes by construction.
    pub fn from_maximal_unchecked(
        rank: usize,
        polys: Vec<(Polyhedron, Option<i64>)>,
        rays_r: Vec<Vec<BigInt>>,
    ) -> Result<Self, PolyError> {
        Self::build(rank, polys, rays_r)
    }

    /// Accepts a list that must already be closed under faces.
    pub fn from_closed_list(
        rank: usize,
        polys: Vec<(Polyhedron, Option<i64>)>,
        rays_r: Vec<Vec<BigInt>>,
    ) -> Result<Self, PolyError> {
        let listed: BTreeSet<&Polyhedron> = polys.iter().map(|(p, _)| p).collect();
        for (i, (p, _)) in polys.iter().enumerate() {
            if p.faces().iter().any(|f| !listed.contains(f)) {
                return Err(PolyError::NotFaceClosed(i));
            }
        }
        Self::from_maximal(rank, polys, rays_r)
    }

    fn build(rank: usize, polys: Vec<(Polyhedron, Option<i64>)>, rays_r: Vec<Vec<BigInt>>) -> Result<Self, PolyError> {
        for r in &rays_r {
            if r.len() != rank {
                return Err(PolyError::DimensionMismatch { expected: rank, found: r.len() });
            }
            if !is_primitive(r) {
                return Err(PolyError::NonPrimitiveRay(fmt_vec(&to_rat_vec(r))));
            }
        }
        let mut ids: HashMap<Polyhedron, usize> = HashMap::new();
        let mut list: Vec<Polyhedron> = Vec::new();
        let mut pairs: BTreeSet<(usize, usize)> = BTreeSet::new();
        let mut input_weights: Vec<(usize, Option<i64>)> = Vec::new();
        for (p, w) in polys {
            if p.rank() != rank {
                return Err(PolyError::DimensionMismatch { expected: rank, found: p.rank() });
            }
            let sets = p.face_generator_sets();
            let mut local = Vec::with_capacity(sets.len());
            for (vs, rs) in &sets {
                let f = p.face_from_sets(vs, rs);
                let id = *ids.entry(f.clone()).or_insert_with(|| {
                    list.push(f);
                    list.len() - 1
                });
                local.push(id);
            }
            for (a, (va, ra)) in sets.iter().enumerate() {
                for (b, (vb, rb)) in sets.iter().enumerate() {
                    if va.iter().all(|x| vb.contains(x)) && ra.iter().all(|x| rb.contains(x)) {
                        pairs.insert((local[a], local[b]));
                    }
                }
            }
            input_weights.push((local[0], w));
        }
        let mut order: Vec<usize> = (0..list.len()).collect();
        order.sort_by(|&a, &b| list[a].cmp(&list[b]));
        let mut remap = vec![0; list.len()];
        for (new, &old) in order.iter().enumerate() {
            remap[old] = new;
        }
        let mut slots: Vec<Option<Polyhedron>> = list.into_iter().map(Some).collect();
        let faces: Vec<Polyhedron> = order.iter().map(|&o| slots[o].take().unwrap()).collect();
        let n = faces.len();
        let mut below = vec![Vec::new(); n];
        let mut above = vec![Vec::new(); n];
        for (a, b) in pairs {
            let (a, b) = (remap[a], remap[b]);
            below[b].push(a);
            above[a].push(b);
        }
        for v in below.iter_mut().chain(above.iter_mut()) {
            v.sort_unstable();
            v.dedup();
        }
        let maximal: Vec<usize> = (0..n).filter(|&i| above[i].len() == 1).collect();
        let mut weights = vec![None; n];
        for (id, w) in input_weights {
            if w.is_some() {
                weights[remap[id]] = w;
            }
        }
        let index = faces.iter().enumerate().map(|(i, f)| (f.clone(), i)).collect();
        Ok(PolyComplex { rank, faces, below, above, maximal, rays_r, weights, index })
    }

    /// Checks that every two maximal faces meet in a common face.
    pub fn validate(&self) -> Result<(), PolyError> {
        for (k, &i) in self.maximal.iter().enumerate() {
            for &j in &self.maximal[k + 1..] {
                let (p, q) = (&self.faces[i], &self.faces[j]);
                if let Some(x) = p.intersection(q) {
                    if !x.is_face_of(p) || !x.is_face_of(q) {
                        return Err(PolyError::BadIntersection(i, j));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn faces(&self) -> &[Polyhedron] {
        &self.faces
    }

    pub fn face(&self, i: usize) -> &Polyhedron {
        &self.faces[i]
    }

    /// All faces of face `i`, including `i`.
    pub fn faces_of(&self, i: usize) -> &[usize] {
        &self.below[i]
    }

    /// All faces having face `i` as a face, including `i`.
    pub fn cofaces(&self, i: usize) -> &[usize] {
        &self.above[i]
    }

    pub fn maximal_faces(&self) -> &[usize] {
        &self.maximal
    }

    pub fn compactification(&self) -> &[Vec<BigInt>] {
        &self.rays_r
    }

    pub fn weight(&self, i: usize) -> Option<i64> {
        self.weights[i]
    }

    pub fn index_of(&self, p: &Polyhedron) -> Option<usize> {
        self.index.get(p).copied()
    }

    pub fn dim(&self) -> usize {
        self.faces.iter().map(Polyhedron::dim).max().unwrap_or(0)
    }

    pub fn is_pure(&self) -> bool {
        let d = self.dim();
        self.maximal.iter().all(|&i| self.faces[i].dim() == d)
    }

    pub fn faces_of_dim(&self, d: usize) -> Vec<usize> {
        (0..self.faces.len()).filter(|&i| self.faces[i].dim() == d).collect()
    }

    pub fn is_fan(&self) -> bool {
        self.faces.iter().all(Polyhedron::is_cone)
    }

    /// Returns a copy with a different partial compactification.
    pub fn with_compactification(&self, rays_r: Vec<Vec<BigInt>>) -> Result<Self, PolyError> {
        for r in &rays_r {
            if r.len() != self.rank || !is_primitive(r) {
                return Err(PolyError::NonPrimitiveRay(fmt_vec(&to_rat_vec(r))));
            }
        }
        let mut c = self.clone();
        c.rays_r = rays_r;
        Ok(c)
    }

    /// Returns a copy with weights set on the given face indices.
    pub fn with_weights(&self, weights: &[(usize, i64)]) -> Self {
        let mut c = self.clone();
        for &(i, w) in weights {
            c.weights[i] = Some(w);
        }
        c
    }

    pub fn maximal_with_weights(&self) -> Vec<(Polyhedron, Option<i64>)> {
        self.maximal.iter().map(|&i| (self.faces[i].clone(), self.weights[i])).collect()
    }

    pub fn open_set<I: IntoIterator<Item = usize>>(&self, members: I) -> Result<OpenSet, PolyError> {
        let set: BTreeSet<usize> = members.into_iter().collect();
        if set.iter().any(|&m| m >= self.faces.len()) {
            return Err(PolyError::FaceNotInComplex);
        }
        for &m in &set {
            if self.above[m].iter().any(|a| !set.contains(a)) {
                return Err(PolyError::NotOpen);
            }
        }
        Ok(OpenSet { members: set.into_iter().collect() })
    }

    pub fn whole(&self) -> OpenSet {
        OpenSet { members: (0..self.faces.len()).collect() }
    }

    pub fn open_star(&self, face: usize) -> Result<OpenStar, PolyError> {
        if face >= self.faces.len() {
            return Err(PolyError::FaceNotInComplex);
        }
        Ok(OpenStar { face, open: OpenSet { members: self.above[face].clone() } })
    }

    /// Members of `u` having no proper face in `u`.
    pub fn minimal_members(&self, u: &OpenSet) -> Vec<usize> {
        u.members().iter().copied().filter(|&m| self.below[m].iter().all(|&b| b == m || !u.contains(b))).collect()
    }

    /// Members of `u` that are maximal faces of the complex.
    pub fn maximal_members(&self, u: &OpenSet) -> Vec<usize> {
        u.members().iter().copied().filter(|&m| self.above[m].len() == 1).collect()
    }

    /// Index of the face whose relative interior contains `x`.
    pub fn carrier(&self, x: &[Rat]) -> Option<usize> {
        (0..self.faces.len()).find(|&i| self.faces[i].relint_contains(x))
    }

    pub fn support_contains(&self, x: &[Rat]) -> bool {
        self.maximal.iter().any(|&i| self.faces[i].contains(x))
    }

    pub fn recession_fan(&self) -> Result<PolyComplex, PolyError> {
        let mut cones: Vec<Polyhedron> = self.maximal.iter().map(|&i| self.faces[i].recession_cone()).collect();
        cones.sort();
        cones.dedup();
        PolyComplex::from_maximal(self.rank, cones.into_iter().map(|c| (c, None)).collect(), vec![])
            .map_err(|e| PolyError::FanViolation(e.to_string()))
    }

    /// Whether the support is all of `Q^rank`.
    pub fn is_complete(&self) -> bool {
        let pieces: Vec<Polyhedron> = self
            .maximal
            .iter()
            .map(|&i| self.faces[i].clone())
            .filter(|p| p.dim() == self.rank)
            .collect();
        covers(&Polyhedron::whole_space(self.rank), &pieces)
    }

    pub fn cone_over(&self) -> Result<ConeOver, PolyError> {
        let polys = self.maximal.iter().map(|&i| (self.faces[i].cone_over(), self.weights[i])).collect();
        let r: Vec<Vec<BigInt>> = self
            .rays_r
            .iter()
            .map(|r| {
                let mut v = r.clone();
                v.push(BigInt::zero());
                v
            })
            .collect();
        let fan = PolyComplex::from_maximal(self.rank + 1, polys, r.clone())
            .map_err(|e| PolyError::FanViolation(e.to_string()))?;
        let mut tilde = Vec::with_capacity(self.faces.len());
        let mut zero = Vec::with_capacity(self.faces.len());
        for f in &self.faces {
            tilde.push(fan.index_of(&f.cone_over()).ok_or_else(|| PolyError::FanViolation("missing cone".into()))?);
            let rec = f.recession_cone();
            let lifted = Polyhedron::cone(
                self.rank + 1,
                rec.recession_generators().iter().map(|g| homogenize(g, Rat::zero())).collect(),
            )?;
            zero.push(fan.index_of(&lifted).ok_or_else(|| PolyError::FanViolation("missing height-0 cone".into()))?);
        }
        let base = vec![unit_covector(self.rank + 1, self.rank)];
        let enriched = EnrichedFan { projection: RatMatrix::identity(self.rank + 1), fan, r, base };
        Ok(ConeOver { fan: enriched, tilde, zero })
    }

    /// Star-quotient of `P` through the cone over the complex, with its morphism to the base `Δ_{S†}`.
    pub fn star_quotient(&self, p: usize) -> Result<EnrichedFan, PolyError> {
        if p >= self.faces.len() {
            return Err(PolyError::FaceNotInComplex);
        }
        let n1 = self.rank + 1;
        let span = self.faces[p].homogenized_span();
        let proj = quotient_projection(n1, &span.basis_vecs());
        let pm = proj.matrix_rat();
        let star_max: Vec<usize> = self.above[p].iter().copied().filter(|&q| self.above[q].len() == 1).collect();
        let cones = star_max
            .iter()
            .map(|&q| {
                let gens: Vec<Vec<Rat>> =
                    self.faces[q].homogenized_generators().iter().map(|g| pm.mul_vec(g)).collect();
                Polyhedron::cone(proj.target_rank(), gens).map(|c| (c, self.weights[q]))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let fan = PolyComplex::from_maximal(proj.target_rank(), cones, vec![])
            .map_err(|e| PolyError::FanViolation(e.to_string()))?;
        let r = self
            .rays_r
            .iter()
            .filter(|rho| {
                let rr = to_rat_vec(rho);
                self.above[p].iter().any(|&q| self.faces[q].recession_contains(&rr))
            })
            .map(|rho| {
                let mut v = rho.clone();
                v.push(BigInt::zero());
                v
            })
            .collect();
        let base = vec![unit_covector(n1, self.rank)];
        Ok(EnrichedFan { fan, projection: pm, r, base })
    }

    /// Star-quotient `Σ_P` in `N/N_P` (over the point base), built from tangent cones at `P`.
    pub fn star_quotient_linear(&self, p: usize) -> Result<(PolyComplex, LatticeProjection), PolyError> {
        if p >= self.faces.len() {
            return Err(PolyError::FaceNotInComplex);
        }
        let face = &self.faces[p];
        let proj = quotient_projection(self.rank, &face.linear_span().basis_vecs());
        let pm = proj.matrix_rat();
        let x = face.relint_point();
        let star_max: Vec<usize> = self.above[p].iter().copied().filter(|&q| self.above[q].len() == 1).collect();
        let cones = star_max
            .iter()
            .map(|&q| {
                let qf = &self.faces[q];
                let mut gens: Vec<Vec<Rat>> = qf.vertices().iter().map(|v| pm.mul_vec(&sub_vec(v, &x))).collect();
                gens.extend(qf.recession_generators().iter().map(|r| pm.mul_vec(r)));
                Polyhedron::cone(proj.target_rank(), gens).map(|c| (c, self.weights[q]))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let fan = PolyComplex::from_maximal(proj.target_rank(), cones, vec![])
            .map_err(|e| PolyError::FanViolation(e.to_string()))?;
        Ok((fan, proj))
    }

    /// Stellar subdivision of the star of face `p` at a point `x` of its relative interior.
    pub fn stellar_subdivide(&self, p: usize, x: &[Rat]) -> Result<PolyComplex, PolyError> {
        if p >= self.faces.len() {
            return Err(PolyError::FaceNotInComplex);
        }
        if !self.faces[p].relint_contains(x) {
            return Err(PolyError::NotInRelativeInterior);
        }
        let mut out: Vec<(Polyhedron, Option<i64>)> = Vec::new();
        for &q in &self.maximal {
            let w = self.weights[q];
            let qf = &self.faces[q];
            if !self.below[q].contains(&p) {
                out.push((qf.clone(), w));
                continue;
            }
            let lin: Vec<Vec<Rat>> = qf
                .lineality()
                .basis_vecs()
                .into_iter()
                .flat_map(|l| [l.iter().map(|c| -c).collect(), l])
                .collect();
            for i in 0..qf.facets().len() {
                if qf.facet_value(i, x).is_zero() {
                    continue;
                }
                let mut vs = vec![x.to_vec()];
                vs.extend(qf.tight_vertices(i).iter().map(|&v| qf.vertices()[v].clone()));
                let mut rs: Vec<Vec<Rat>> = qf.tight_rays(i).iter().map(|&r| to_rat_vec(&qf.rays()[r])).collect();
                rs.extend(lin.iter().cloned());
                out.push((Polyhedron::new(self.rank, vs, rs)?, w));
            }
            if qf.recession_cone().dim() == qf.dim() {
                out.push((Polyhedron::new(self.rank, vec![x.to_vec()], qf.recession_generators())?, w));
            }
        }
        PolyComplex::from_maximal_unchecked(self.rank, out, self.rays_r.clone())
    }

    /// For each face of `fine`, the face of `self` whose relative interior contains it.
    pub fn parent_map(&self, fine: &PolyComplex) -> Option<Vec<usize>> {
        fine.faces.iter().map(|f| self.carrier(&f.relint_point())).collect()
    }

    /// Whether `fine` refines `self`: same lattice and `R`, faces inside faces, same support.
    pub fn is_refined_by(&self, fine: &PolyComplex) -> bool {
        if fine.rank != self.rank {
            return false;
        }
        let r1: BTreeSet<&Vec<BigInt>> = self.rays_r.iter().collect();
        let r2: BTreeSet<&Vec<BigInt>> = fine.rays_r.iter().collect();
        if r1 != r2 {
            return false;
        }
        let inside = fine
            .maximal
            .iter()
            .all(|&i| self.maximal.iter().any(|&j| fine.faces[i].is_subset_of(&self.faces[j])));
        if !inside {
            return false;
        }
        self.maximal.iter().all(|&j| {
            let target = &self.faces[j];
            let pieces: Vec<Polyhedron> = fine
                .faces
                .iter()
                .filter(|f| f.dim() == target.dim() && f.is_subset_of(target))
                .cloned()
                .collect();
            covers(target, &pieces)
        })
    }

    /// The cone over the complex is unimodular and all vertices are lattice points.
    pub fn is_unimodular(&self) -> bool {
        self.maximal.iter().all(|&i| {
            let f = &self.faces[i];
            f.vertices().iter().all(|v| v.iter().all(|x| x.is_integer())) && f.cone_over().is_unimodular_cone()
        })
    }

    pub fn has_lineality(&self) -> bool {
        self.faces.iter().any(Polyhedron::contains_line)
    }
}

/// Whether `pieces` (full-dimensional subsets of `target` forming a complex) cover `target`.
///
/// Every facet of a piece whose relative interior lies in the relative interior of the
/// target must be shared by exactly two pieces.
pub fn covers(target: &Polyhedron, pieces: &[Polyhedron]) -> bool {
    if pieces.is_empty() {
        return false;
    }
    let d = target.dim();
    if pieces.iter().any(|p| p.dim() != d || !p.is_subset_of(target)) {
        return false;
    }
    let mut count: HashMap<Polyhedron, usize> = HashMap::new();
    for p in pieces {
        for f in p.facet_polyhedra() {
            *count.entry(f).or_insert(0) += 1;
        }
    }
    count.iter().all(|(f, &c)| c == 2 || !target.relint_contains(&f.relint_point()))
}

pub fn unit_covector(n: usize, i: usize) -> Vec<Rat> {
    let mut v = vec![Rat::zero(); n];
    v[i] = Rat::one();
    v
}

/// Which type-(2) cones enter the cone over a poset-open set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ConeOverReading {
    /// Height-0 cones `P₀` only for members `P` of the open set.
    #[default]
    MembersOnly,
    /// Height-0 cones `P₀` for every face of the complex.
    Verbatim,
}

/// The cone over a complex in `N × Z`, with the indices of `P̃` and `P₀` for every face `P`.
#[derive(Clone, Debug)]
pub struct ConeOver {
    pub fan: EnrichedFan,
    pub tilde: Vec<usize>,
    pub zero: Vec<usize>,
}

impl ConeOver {
    /// Cones of the cone over `U` (as cone indices), under the chosen reading.
    pub fn open_cones(&self, u: &OpenSet, reading: ConeOverReading) -> Vec<usize> {
        let mut out: BTreeSet<usize> = BTreeSet::new();
        for &p in u.members() {
            out.insert(self.tilde[p]);
            out.insert(self.zero[p]);
        }
        if reading == ConeOverReading::Verbatim {
            out.extend(self.zero.iter().copied());
        }
        out.into_iter().collect()
    }
}

/// A fan in `N'` with a lattice surjection `π: N → N'`, a partial compactification in `N`
/// and the pulled-back covectors of the base it maps to.
#[derive(Clone, Debug)]
pub struct EnrichedFan {
    fan: PolyComplex,
    projection: RatMatrix,
    r: Vec<Vec<BigInt>>,
    base: Vec<Vec<Rat>>,
}

impl EnrichedFan {
    pub fn new(
        fan: PolyComplex,
        projection: RatMatrix,
        r: Vec<Vec<BigInt>>,
        base: Vec<Vec<Rat>>,
    ) -> Result<Self, PolyError> {
        if projection.rows() != fan.rank() {
            return Err(PolyError::DimensionMismatch { expected: fan.rank(), found: projection.rows() });
        }
        if !fan.is_fan() {
            return Err(PolyError::FanViolation("a member is not a cone".into()));
        }
        let n = projection.cols();
        let ints: Option<Vec<Vec<BigInt>>> = projection
            .row_vecs()
            .iter()
            .map(|row| crate::lattice::as_integer_vec(row))
            .collect();
        let ints = ints.ok_or(PolyError::BadProjection)?;
        if projection.rows() > 0 && maximal_minor_gcd(&ints, n).map_or(true, |g| !g.is_one()) {
            return Err(PolyError::BadProjection);
        }
        for rho in &r {
            if rho.len() != n || !is_primitive(rho) {
                return Err(PolyError::NonPrimitiveRay(fmt_vec(&to_rat_vec(rho))));
            }
        }
        Ok(EnrichedFan { fan, projection, r, base })
    }

    /// Trivial enrichment, with the compactification taken from the fan.
    pub fn trivial(fan: PolyComplex) -> Result<Self, PolyError> {
        let n = fan.rank();
        let r = fan.compactification().to_vec();
        Self::new(fan, RatMatrix::identity(n), r, vec![])
    }

    /// `Δ_S`: the point fan over the zero lattice.
    pub fn delta_s() -> Self {
        let fan = PolyComplex::from_maximal(0, vec![(Polyhedron::point(vec![]), None)], vec![]).expect("point fan");
        EnrichedFan { fan, projection: RatMatrix::zeros(0, 0), r: vec![], base: vec![] }
    }

    /// `Δ_{S†}`: the point fan with the enrichment `Z → 0`.
    pub fn delta_s_dagger() -> Self {
        let fan = PolyComplex::from_maximal(0, vec![(Polyhedron::point(vec![]), None)], vec![]).expect("point fan");
        EnrichedFan { fan, projection: RatMatrix::zeros(0, 1), r: vec![], base: vec![] }
    }

    pub fn fan(&self) -> &PolyComplex {
        &self.fan
    }

    pub fn projection(&self) -> &RatMatrix {
        &self.projection
    }

    pub fn compactification(&self) -> &[Vec<BigInt>] {
        &self.r
    }

    pub fn base(&self) -> &[Vec<Rat>] {
        &self.base
    }

    /// Rank of `N`.
    pub fn source_rank(&self) -> usize {
        self.projection.cols()
    }

    pub fn is_trivially_enriched(&self) -> bool {
        self.projection.is_square() && self.projection == RatMatrix::identity(self.projection.rows())
    }

    pub fn project(&self, x: &[Rat]) -> Vec<Rat> {
        self.projection.mul_vec(x)
    }

    /// `π⁻¹(span σ)` for the cone with index `i`.
    pub fn preimage_span(&self, i: usize) -> Subspace {
        let span = self.fan.face(i).linear_span();
        let ann = span.annihilator();
        let pulled: Vec<Vec<Rat>> = ann.basis_vecs().iter().map(|a| self.projection.left_mul_vec(a)).collect();
        Subspace::span(self.source_rank(), pulled).annihilator()
    }

    /// Star-quotient of a trivially enriched fan at a cone `τ`, with the induced enrichment `N → N/N_τ`.
    pub fn star_quotient(&self, tau: usize) -> Result<EnrichedFan, PolyError> {
        if !self.is_trivially_enriched() {
            return Err(PolyError::BadProjection);
        }
        let (fan, proj) = self.fan.star_quotient_linear(tau)?;
        let r = self
            .r
            .iter()
            .filter(|rho| {
                let rr = to_rat_vec(rho);
                self.fan.cofaces(tau).iter().any(|&s| self.fan.face(s).contains(&rr))
            })
            .cloned()
            .collect();
        Ok(EnrichedFan { fan, projection: proj.matrix_rat(), r, base: vec![] })
    }
}
