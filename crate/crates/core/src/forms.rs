//! Sheaves of tropical differential forms on poset-open subsets of complexes and enriched fans.
//!
//! A form of degree `p` on an open set `U` is stored through its restrictions to the
//! maximal faces `σ` of `U`: a vector in `⊕_σ ⋀^p T_σ`, where `T_σ` is the space of
//! covectors modulo the base pullbacks and the annihilator of the span of `σ`.
//! On open stars the space is the image of `⋀^p Ω¹` computed from an explicit
//! presentation of `Ω¹`; on other opens sections are glued from the stars of the
//! minimal members.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::lattice::to_rat_vec;
use crate::linalg::{
    binomial, exterior_product, kernel, subsets, unit_vec, wedge_vectors, BasedSpan, QuotientSpace, Rat, RatMatrix,
    Subspace,
};
use crate::polyhedra::{
    unit_covector, ConeOverReading, EnrichedFan, OpenSet, PolyComplex, PolyError,
};

#[derive(Debug, Error)]
pub enum FormsError {
    #[error("the face set is not upward closed")]
    NotOpen,
    #[error("the second open set is not contained in the first")]
    NotNested,
    #[error("face {0} is not in the complex")]
    FaceNotInComplex(usize),
    #[error("form spaces over different open sets cannot be multiplied")]
    OpenMismatch,
    #[error(transparent)]
    Poly(PolyError),
}

impl From<PolyError> for FormsError {
    fn from(e: PolyError) -> Self {
        match e {
            PolyError::NotOpen => FormsError::NotOpen,
            other => FormsError::Poly(other),
        }
    }
}

/// When a compactification ray counts as active on a face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ActiveRayRule {
    /// The ray lies in the relative interior of the recession cone (of the cone, for fans).
    #[default]
    RelativeInterior,
    /// The ray lies anywhere in the recession cone.
    RecessionCone,
}

#[derive(Clone, Debug)]
struct FaceData {
    span: Subspace,
    active: Vec<usize>,
}

/// Forms of one degree on one open set.
#[derive(Clone, Debug)]
pub struct FormSpace {
    open: Vec<usize>,
    star_of: Option<usize>,
    degree: usize,
    maximal: Vec<usize>,
    tangent: Vec<usize>,
    offsets: Vec<usize>,
    span: BasedSpan,
    presentation: Option<QuotientSpace>,
    monomials: Vec<Vec<usize>>,
}

impl FormSpace {
    pub fn dim(&self) -> usize {
        self.span.dim()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn open(&self) -> &[usize] {
        &self.open
    }

    /// The face whose open star this is, if any.
    pub fn star_of(&self) -> Option<usize> {
        self.star_of
    }

    /// `"star:<face>"` for open stars, otherwise `"open:<face>;<face>;…"`.
    pub fn descriptor(&self) -> String {
        match self.star_of {
            Some(f) => format!("star:{f}"),
            None => {
                let faces: Vec<String> = self.open.iter().map(|f| f.to_string()).collect();
                format!("open:{}", faces.join(";"))
            }
        }
    }

    pub fn maximal_faces(&self) -> &[usize] {
        &self.maximal
    }

    /// `dim T_σ` for each maximal face, in the order of [`FormSpace::maximal_faces`].
    pub fn tangent_dims(&self) -> &[usize] {
        &self.tangent
    }

    /// Length of the vectors in [`FormSpace::basis`].
    pub fn total_dim(&self) -> usize {
        self.offsets.last().copied().unwrap_or(0)
    }

    /// Basis forms, as restrictions to the maximal faces.
    pub fn basis(&self) -> &[Vec<Rat>] {
        self.span.rows()
    }

    pub fn component<'a>(&self, v: &'a [Rat], k: usize) -> &'a [Rat] {
        &v[self.offsets[k]..self.offsets[k + 1]]
    }

    /// Coordinates in the basis of a vector of restrictions.
    pub fn coordinates(&self, v: &[Rat]) -> Option<Vec<Rat>> {
        self.span.coordinates(v)
    }

    pub fn combine(&self, coords: &[Rat]) -> Vec<Rat> {
        self.span.combine(coords)
    }

    /// `Ω¹` on an open star as a quotient of covectors.
    pub fn presentation(&self) -> Option<&QuotientSpace> {
        self.presentation.as_ref()
    }

    /// Representative covectors of the basis (degree 1 on open stars only).
    pub fn representatives(&self) -> Option<Vec<Vec<Rat>>> {
        self.presentation.as_ref().map(|q| q.section_basis().row_vecs())
    }

    /// On open stars, basis element `i` is the wedge of these `Ω¹` basis elements.
    pub fn monomials(&self) -> &[Vec<usize>] {
        &self.monomials
    }
}

/// Structure constants of `∧: Ω¹ ⊗ Ω¹ → Ω²` in chosen bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WedgeTable {
    m: usize,
    target_dim: usize,
    table: Vec<Vec<Vec<Rat>>>,
}

impl WedgeTable {
    /// Panics unless the table is `m × m` of vectors of length `target_dim`, antisymmetric.
    pub fn new(m: usize, target_dim: usize, table: Vec<Vec<Vec<Rat>>>) -> Self {
        assert_eq!(table.len(), m);
        for i in 0..m {
            assert_eq!(table[i].len(), m);
            for j in 0..m {
                assert_eq!(table[i][j].len(), target_dim);
                let neg: Vec<Rat> = table[j][i].iter().map(|x| -x).collect();
                assert_eq!(table[i][j], neg, "wedge table must be antisymmetric");
            }
        }
        WedgeTable { m, target_dim, table }
    }

    /// `Ω² = 0` on an `m`-dimensional `Ω¹`.
    pub fn free(m: usize) -> Self {
        WedgeTable { m, target_dim: 0, table: vec![vec![vec![]; m]; m] }
    }

    /// Exterior algebra of an `m`-dimensional space: `η_i ∧ η_j` are independent for `i < j`.
    pub fn exterior(m: usize) -> Self {
        let n2 = binomial(m, 2);
        let mut table = vec![vec![vec![Rat::zero(); n2]; m]; m];
        for (k, s) in subsets(m, 2).iter().enumerate() {
            table[s[0]][s[1]][k] = Rat::one();
            table[s[1]][s[0]][k] = -Rat::one();
        }
        WedgeTable { m, target_dim: n2, table }
    }

    pub fn one_forms_dim(&self) -> usize {
        self.m
    }

    pub fn two_forms_dim(&self) -> usize {
        self.target_dim
    }

    pub fn wedge(&self, i: usize, j: usize) -> &[Rat] {
        &self.table[i][j]
    }

    /// The `m² × dim Ω²` matrix of `∧`, row `i·m + j` holding `η_i ∧ η_j`.
    pub fn matrix(&self) -> RatMatrix {
        let mut rows = Vec::with_capacity(self.m * self.m);
        for i in 0..self.m {
            for j in 0..self.m {
                rows.push(self.table[i][j].clone());
            }
        }
        RatMatrix::from_rows(self.target_dim, rows)
    }
}

/// Forms of degrees `0..=top` on one open set with their products.
#[derive(Clone, Debug)]
pub struct FormAlgebra {
    spaces: Vec<Arc<FormSpace>>,
}

impl FormAlgebra {
    pub fn space(&self, p: usize) -> &FormSpace {
        &self.spaces[p]
    }

    pub fn top_degree(&self) -> usize {
        self.spaces.len() - 1
    }

    pub fn dims(&self) -> Vec<usize> {
        self.spaces.iter().map(|s| s.dim()).collect()
    }

    /// Product of coordinate vectors in degrees `p` and `q`, as coordinates in degree `p + q`.
    pub fn multiply(&self, p: usize, x: &[Rat], q: usize, y: &[Rat]) -> Vec<Rat> {
        let a = &self.spaces[p];
        let b = &self.spaces[q];
        let c = &self.spaces[p + q];
        let v = wedge_restrictions(a, &a.combine(x), b, &b.combine(y));
        c.coordinates(&v).expect("products of sections are sections")
    }

    pub fn wedge_table(&self) -> WedgeTable {
        let m = self.spaces[1].dim();
        let d2 = self.spaces[2].dim();
        let mut table = vec![vec![vec![Rat::zero(); d2]; m]; m];
        for i in 0..m {
            for j in 0..m {
                table[i][j] = self.multiply(1, &unit_vec(m, i), 1, &unit_vec(m, j));
            }
        }
        WedgeTable::new(m, d2, table)
    }
}

fn wedge_restrictions(a: &FormSpace, x: &[Rat], b: &FormSpace, y: &[Rat]) -> Vec<Rat> {
    let mut out = Vec::new();
    for k in 0..a.maximal.len() {
        let t = a.tangent[k];
        out.extend(exterior_product(t, a.component(x, k), a.degree, b.component(y, k), b.degree));
    }
    out
}

type CacheKey = (Vec<usize>, usize);

/// The sheaf `Ω^•` on a complex (through the cone over it) or on an enriched fan.
#[derive(Debug)]
pub struct FormSheaf {
    poset: PolyComplex,
    ambient: usize,
    base: Subspace,
    rays: Vec<Vec<Rat>>,
    data: Vec<FaceData>,
    tangent: Vec<Option<QuotientSpace>>,
    cache: Mutex<HashMap<CacheKey, Arc<FormSpace>>>,
}

impl FormSheaf {
    /// Forms on a complex with the default active-ray rule.
    pub fn for_complex(c: &PolyComplex) -> Self {
        Self::for_complex_with(c, ActiveRayRule::default())
    }

    /// Forms on a complex, computed in `N × Z` through the cone over each face with base `e_t^*`.
    pub fn for_complex_with(c: &PolyComplex, rule: ActiveRayRule) -> Self {
        let n = c.rank();
        let d = n + 1;
        let base = Subspace::span(d, [unit_covector(d, n)]);
        let r_small: Vec<Vec<Rat>> = c.compactification().iter().map(|r| to_rat_vec(r)).collect();
        let rays = r_small
            .iter()
            .map(|r| {
                let mut v = r.clone();
                v.push(Rat::zero());
                v
            })
            .collect();
        let data = c
            .faces()
            .iter()
            .map(|p| {
                let rec = p.recession_cone();
                let active = (0..r_small.len())
                    .filter(|&i| match rule {
                        ActiveRayRule::RelativeInterior => rec.relint_contains(&r_small[i]),
                        ActiveRayRule::RecessionCone => p.recession_contains(&r_small[i]),
                    })
                    .collect();
                FaceData { span: p.homogenized_span(), active }
            })
            .collect();
        Self::assemble(c.clone(), d, base, rays, data)
    }

    pub fn for_fan(f: &EnrichedFan) -> Self {
        Self::for_fan_with(f, ActiveRayRule::default())
    }

    /// Forms on an enriched fan: covectors on the source lattice `N`.
    pub fn for_fan_with(f: &EnrichedFan, rule: ActiveRayRule) -> Self {
        let d = f.source_rank();
        let base = Subspace::span(d, f.base().iter().cloned());
        let rays: Vec<Vec<Rat>> = f.compactification().iter().map(|r| to_rat_vec(r)).collect();
        let images: Vec<Vec<Rat>> = rays.iter().map(|r| f.project(r)).collect();
        let fan = f.fan();
        let data = (0..fan.len())
            .map(|i| {
                let cone = fan.face(i);
                let active = (0..rays.len())
                    .filter(|&k| match rule {
                        ActiveRayRule::RelativeInterior => cone.relint_contains(&images[k]),
                        ActiveRayRule::RecessionCone => cone.contains(&images[k]),
                    })
                    .collect();
                FaceData { span: f.preimage_span(i), active }
            })
            .collect();
        Self::assemble(fan.clone(), d, base, rays, data)
    }

    fn assemble(poset: PolyComplex, ambient: usize, base: Subspace, rays: Vec<Vec<Rat>>, data: Vec<FaceData>) -> Self {
        let tangent = (0..poset.len())
            .map(|i| {
                (poset.cofaces(i).len() == 1).then(|| {
                    let killed = base.sum(&data[i].span.annihilator()).expect("same ambient");
                    QuotientSpace::modulo(killed).expect("full ambient")
                })
            })
            .collect();
        FormSheaf { poset, ambient, base, rays, data, tangent, cache: Mutex::new(HashMap::new()) }
    }

    /// The face poset forms are defined on.
    pub fn poset(&self) -> &PolyComplex {
        &self.poset
    }

    /// Dimension of the covector space representatives live in.
    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn open_set<I: IntoIterator<Item = usize>>(&self, members: I) -> Result<OpenSet, FormsError> {
        Ok(self.poset.open_set(members)?)
    }

    pub fn star(&self, face: usize) -> Result<OpenSet, FormsError> {
        if face >= self.poset.len() {
            return Err(FormsError::FaceNotInComplex(face));
        }
        Ok(self.poset.open_star(face)?.open)
    }

    pub fn whole(&self) -> OpenSet {
        self.poset.whole()
    }

    /// Rays active on at least one of the given faces.
    pub fn active_rays(&self, faces: &[usize]) -> Vec<Vec<Rat>> {
        let mut idx: Vec<usize> = faces.iter().flat_map(|&f| self.data[f].active.iter().copied()).collect();
        idx.sort_unstable();
        idx.dedup();
        idx.into_iter().map(|i| self.rays[i].clone()).collect()
    }

    /// `Ω¹` of an arbitrary set of faces computed from the defining quotient: covectors
    /// killing the active rays, modulo the base and the annihilator of the total span.
    pub fn presheaf_one_forms(&self, faces: &[usize]) -> QuotientSpace {
        let d = self.ambient;
        let w = faces
            .iter()
            .fold(Subspace::zero(d), |acc, &f| acc.sum(&self.data[f].span).expect("same ambient"));
        let k = w.annihilator();
        let a = Subspace::span(d, self.active_rays(faces)).annihilator();
        let killed = self.base.sum(&k).expect("same ambient");
        let num = a.sum(&killed).expect("same ambient");
        QuotientSpace::new(num, killed).expect("killed part is contained")
    }

    /// `Ω^p(U)`.
    pub fn forms(&self, u: &OpenSet, p: usize) -> Arc<FormSpace> {
        let key = (u.members().to_vec(), p);
        if let Some(s) = self.cache.lock().expect("cache lock").get(&key) {
            return s.clone();
        }
        let minimal = self.poset.minimal_members(u);
        let space = if minimal.len() == 1 && self.poset.cofaces(minimal[0]) == u.members() {
            self.star_space(minimal[0], p)
        } else {
            self.limit_space(u, &minimal, p)
        };
        let space = Arc::new(space);
        self.cache.lock().expect("cache lock").insert(key, space.clone());
        space
    }

    pub fn one_forms(&self, u: &OpenSet) -> Arc<FormSpace> {
        self.forms(u, 1)
    }

    pub fn star_forms(&self, face: usize, p: usize) -> Result<Arc<FormSpace>, FormsError> {
        let u = self.star(face)?;
        Ok(self.forms(&u, p))
    }

    pub fn algebra(&self, u: &OpenSet, top: usize) -> FormAlgebra {
        FormAlgebra { spaces: (0..=top.max(2)).map(|p| self.forms(u, p)).collect() }
    }

    pub fn wedge_table(&self, u: &OpenSet) -> WedgeTable {
        self.algebra(u, 2).wedge_table()
    }

    fn layout(&self, maximal: &[usize], p: usize) -> (Vec<usize>, Vec<usize>) {
        let tangent: Vec<usize> = maximal.iter().map(|&s| self.tangent_of(s).dim()).collect();
        let mut offsets = vec![0];
        for &t in &tangent {
            offsets.push(offsets.last().unwrap() + binomial(t, p));
        }
        (tangent, offsets)
    }

    fn tangent_of(&self, face: usize) -> &QuotientSpace {
        self.tangent[face].as_ref().expect("maximal face")
    }

    fn star_space(&self, face: usize, p: usize) -> FormSpace {
        let open = self.poset.cofaces(face).to_vec();
        let maximal: Vec<usize> = open.iter().copied().filter(|&f| self.poset.cofaces(f).len() == 1).collect();
        let (tangent, offsets) = self.layout(&maximal, p);
        let q = self.presheaf_one_forms(&open);
        let reps = q.section_basis().row_vecs();
        // comps[k][i]: restriction of representative i to the k-th maximal face.
        let comps: Vec<Vec<Vec<Rat>>> =
            maximal.iter().map(|&s| reps.iter().map(|r| self.tangent_of(s).coords_unchecked(r)).collect()).collect();
        let total = *offsets.last().unwrap();
        let mut rows: Vec<Vec<Rat>> = Vec::new();
        let mut monomials = Vec::new();
        let mut acc = Subspace::zero(total);
        for s in subsets(reps.len(), p) {
            let mut v = Vec::with_capacity(total);
            for (k, &t) in tangent.iter().enumerate() {
                let factors: Vec<Vec<Rat>> = s.iter().map(|&i| comps[k][i].clone()).collect();
                v.extend(wedge_vectors(t, &factors));
            }
            if !acc.contains(&v) {
                acc = acc.sum(&Subspace::span(total, [v.clone()])).expect("same ambient");
                rows.push(v);
                monomials.push(s);
            }
        }
        FormSpace {
            open,
            star_of: Some(face),
            degree: p,
            maximal,
            tangent,
            offsets,
            span: BasedSpan::new(total, rows),
            presentation: (p == 1).then_some(q),
            monomials,
        }
    }

    fn limit_space(&self, u: &OpenSet, minimal: &[usize], p: usize) -> FormSpace {
        let maximal = self.poset.maximal_members(u);
        let (tangent, offsets) = self.layout(&maximal, p);
        let total = *offsets.last().unwrap();
        let position: HashMap<usize, usize> = maximal.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        let mut constraints: Vec<Vec<Rat>> = Vec::new();
        for &m in minimal {
            let local = self.star_space(m, p);
            let ann = Subspace::span(local.total_dim(), local.basis().iter().cloned()).annihilator();
            for a in ann.basis_vecs() {
                let mut row = vec![Rat::zero(); total];
                for (j, &s) in local.maximal.iter().enumerate() {
                    let k = position[&s];
                    let src = &a[local.offsets[j]..local.offsets[j + 1]];
                    row[offsets[k]..offsets[k + 1]].clone_from_slice(src);
                }
                constraints.push(row);
            }
        }
        let sections = kernel(&RatMatrix::from_rows(total, constraints));
        FormSpace {
            open: u.members().to_vec(),
            star_of: None,
            degree: p,
            maximal,
            tangent,
            offsets,
            span: BasedSpan::new(total, sections.basis_vecs()),
            presentation: None,
            monomials: Vec::new(),
        }
    }

    /// Matrix of the restriction `Ω^p(U₁) → Ω^p(U₂)`: row `i` holds the coordinates of the
    /// restriction of basis element `i`.
    pub fn restrict(&self, u1: &OpenSet, u2: &OpenSet, p: usize) -> Result<RatMatrix, FormsError> {
        if !u2.is_subset_of(u1) {
            return Err(FormsError::NotNested);
        }
        let a = self.forms(u1, p);
        let b = self.forms(u2, p);
        let position: HashMap<usize, usize> = a.maximal.iter().enumerate().map(|(k, &s)| (s, k)).collect();
        let rows = a
            .basis()
            .iter()
            .map(|v| {
                let mut w = Vec::with_capacity(b.total_dim());
                for &s in &b.maximal {
                    w.extend_from_slice(a.component(v, position[&s]));
                }
                b.coordinates(&w).expect("restrictions of sections are sections")
            })
            .collect();
        Ok(RatMatrix::from_rows(b.dim(), rows))
    }

    /// Wedge product of two forms on the same open set, given by coordinates.
    pub fn wedge(&self, a: &FormSpace, x: &[Rat], b: &FormSpace, y: &[Rat]) -> Result<Vec<Rat>, FormsError> {
        if a.open != b.open {
            return Err(FormsError::OpenMismatch);
        }
        let u = self.open_set(a.open.iter().copied())?;
        let c = self.forms(&u, a.degree + b.degree);
        let v = wedge_restrictions(a, &a.combine(x), b, &b.combine(y));
        Ok(c.coordinates(&v).expect("products of sections are sections"))
    }

    /// `Ω¹` of a general face set of the cone over a complex, under a chosen reading of
    /// which height-0 cones belong to it.
    pub fn cone_over_one_forms(
        c: &PolyComplex,
        u: &OpenSet,
        reading: ConeOverReading,
        rule: ActiveRayRule,
    ) -> Result<QuotientSpace, FormsError> {
        let co = c.cone_over()?;
        let sheaf = FormSheaf::for_fan_with(&co.fan, rule);
        Ok(sheaf.presheaf_one_forms(&co.open_cones(u, reading)))
    }
}

/// The comparison map from `Ω¹` on the open star of a face to `Ω¹` of its star-quotient.
#[derive(Clone, Debug)]
pub struct StarQuotientIso {
    /// Row `i` holds the image of basis element `i`.
    pub matrix: RatMatrix,
    pub source_dim: usize,
    pub target_dim: usize,
    pub well_defined: bool,
    pub is_isomorphism: bool,
}

pub fn star_quotient_forms_iso(
    c: &PolyComplex,
    face: usize,
    rule: ActiveRayRule,
) -> Result<StarQuotientIso, FormsError> {
    if face >= c.len() {
        return Err(FormsError::FaceNotInComplex(face));
    }
    let left = FormSheaf::for_complex_with(c, rule);
    let src = left.star_forms(face, 1)?;
    let src_q = src.presentation().expect("open star").clone();
    let sq = c.star_quotient(face)?;
    let right = FormSheaf::for_fan_with(&sq, rule);
    let all: Vec<usize> = (0..right.poset().len()).collect();
    let dst = right.presheaf_one_forms(&all);
    let well_defined = src_q.killed().is_subspace_of(dst.killed()) && src_q.ambient().is_subspace_of(dst.ambient());
    let rows: Vec<Vec<Rat>> = if well_defined {
        src_q.section_basis().row_vecs().iter().map(|r| dst.coords_unchecked(r)).collect()
    } else {
        vec![vec![Rat::zero(); dst.dim()]; src_q.dim()]
    };
    let matrix = RatMatrix::from_rows(dst.dim(), rows);
    let is_isomorphism = well_defined && matrix.is_square() && matrix.rank() == matrix.rows();
    Ok(StarQuotientIso { matrix, source_dim: src_q.dim(), target_dim: dst.dim(), well_defined, is_isomorphism })
}

/// The faces of a refinement lying over the open star of `face` in the coarse complex.
pub fn refined_star(coarse: &PolyComplex, fine: &PolyComplex, face: usize) -> Result<OpenSet, FormsError> {
    if face >= coarse.len() {
        return Err(FormsError::FaceNotInComplex(face));
    }
    let parent = coarse.parent_map(fine).ok_or(FormsError::Poly(PolyError::FaceNotInComplex))?;
    let members = (0..fine.len()).filter(|&q| coarse.faces_of(parent[q]).contains(&face));
    Ok(fine.open_set(members)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::linalg::{rat, rat_vec};
    use crate::polyhedra::Polyhedron;

    fn dims(sheaf: &FormSheaf, u: &OpenSet, top: usize) -> Vec<usize> {
        (0..=top).map(|p| sheaf.forms(u, p).dim()).collect()
    }

    #[test]
    fn compactified_plane_star_of_v() {
        let c = corpus::compactified_plane();
        let v = corpus::compactified_plane_vertex(&c);
        let sheaf = FormSheaf::for_complex(&c);
        let u = sheaf.star(v).unwrap();
        assert_eq!(dims(&sheaf, &u, 3), vec![1, 1, 0, 0]);
        let reps = sheaf.forms(&u, 1).representatives().unwrap();
        assert_eq!(reps, vec![rat_vec(&[0, 1, 0])]);
    }

    #[test]
    fn line_forms() {
        let c = corpus::tropical_line();
        let sheaf = FormSheaf::for_complex(&c);
        let w = sheaf.whole();
        assert_eq!(dims(&sheaf, &w, 2), vec![1, 2, 0]);
        let q = sheaf.forms(&w, 1).presentation().unwrap().clone();
        assert!(!q.is_zero_class(&rat_vec(&[1, 0, 0])));
        assert!(!q.is_zero_class(&rat_vec(&[0, 1, 0])));
        let pair = Subspace::span(3, [rat_vec(&[1, 0, 0]), rat_vec(&[0, 1, 0])]);
        assert_eq!(pair.sum(q.killed()).unwrap(), *q.ambient());
    }

    #[test]
    fn elliptic_one_forms() {
        let c = corpus::elliptic_curve();
        let sheaf = FormSheaf::for_complex(&c);
        assert_eq!(sheaf.forms(&sheaf.whole(), 1).dim(), 1);
        assert_eq!(sheaf.forms(&sheaf.whole(), 2).dim(), 0);
        for i in 0..5 {
            let v = corpus::elliptic_vertex(&c, i);
            assert_eq!(sheaf.star_forms(v, 1).unwrap().dim(), 1);
        }
    }

    // Oracle: pair α∧β against u∧v for the two generators of each 2-cone, without tangent spaces.
    fn brute_two_forms_on_fan(c: &PolyComplex) -> usize {
        let n = c.rank();
        let pairs = subsets(n, 2);
        let cones: Vec<&Polyhedron> = c.faces().iter().filter(|f| f.dim() == 2).collect();
        let mut rows = Vec::new();
        for s in &pairs {
            let row: Vec<Rat> = cones
                .iter()
                .map(|cone| {
                    let g = cone.rays_rat();
                    let (u, v) = (&g[0], &g[1]);
                    &u[s[0]] * &v[s[1]] - &u[s[1]] * &v[s[0]]
                })
                .collect();
            rows.push(row);
        }
        RatMatrix::from_rows(cones.len(), rows).rank()
    }

    #[test]
    fn u34_two_forms_match_oracle() {
        let c = corpus::bergman_uniform(3, 4);
        assert_eq!(c.faces_of_dim(2).len(), 12);
        let sheaf = FormSheaf::for_complex(&c);
        let w = sheaf.whole();
        assert_eq!(sheaf.forms(&w, 1).dim(), 3);
        assert_eq!(sheaf.forms(&w, 2).dim(), brute_two_forms_on_fan(&c));
        assert_eq!(sheaf.forms(&w, 2).dim(), 3);
        assert_eq!(sheaf.forms(&w, 3).dim(), 0);
    }

    #[test]
    fn complex_and_fan_routes_agree() {
        for c in [corpus::tropical_line(), corpus::bergman_uniform(3, 4), corpus::bergman_uniform(2, 4)] {
            let a = FormSheaf::for_complex(&c);
            let b = FormSheaf::for_fan(&EnrichedFan::trivial(c.clone()).unwrap());
            for f in 0..c.len() {
                let u = a.star(f).unwrap();
                assert_eq!(dims(&a, &u, 3), dims(&b, &u, 3), "face {f}");
            }
        }
    }

    #[test]
    fn active_ray_rules_diverge_on_boundary_rays() {
        let c = corpus::compactified_plane().with_compactification(vec![crate::lattice::int_vec(&[-1, -1])]).unwrap();
        let v = corpus::compactified_plane_vertex(&c);
        let relint = FormSheaf::for_complex_with(&c, ActiveRayRule::RelativeInterior);
        let recc = FormSheaf::for_complex_with(&c, ActiveRayRule::RecessionCone);
        assert_eq!(relint.star_forms(v, 1).unwrap().dim(), 2);
        assert_eq!(recc.star_forms(v, 1).unwrap().dim(), 1);
        // Subdividing the lower cell creates a piece through v whose recession cone is the ray.
        let lower = (0..c.len())
            .find(|&i| c.face(i).dim() == 2 && c.face(i).recession_contains(&rat_vec(&[1, -1])) && c.face(i).recession_contains(&rat_vec(&[-1, -1])))
            .unwrap();
        let fine = c.stellar_subdivide(lower, &[rat(0), rat(-1)]).unwrap();
        let u = refined_star(&c, &fine, v).unwrap();
        let fine_relint = FormSheaf::for_complex_with(&fine, ActiveRayRule::RelativeInterior);
        let fine_recc = FormSheaf::for_complex_with(&fine, ActiveRayRule::RecessionCone);
        assert_eq!(fine_recc.forms(&u, 1).dim(), 1);
        assert_eq!(fine_relint.forms(&u, 1).dim(), 1);
    }

    #[test]
    fn verbatim_cone_over_kills_elliptic_forms() {
        let c = corpus::elliptic_curve();
        let v = corpus::elliptic_vertex(&c, 0);
        let u = c.open_star(v).unwrap().open;
        let members =
            FormSheaf::cone_over_one_forms(&c, &u, ConeOverReading::MembersOnly, ActiveRayRule::default()).unwrap();
        let verbatim =
            FormSheaf::cone_over_one_forms(&c, &u, ConeOverReading::Verbatim, ActiveRayRule::default()).unwrap();
        assert_eq!(members.dim(), 1);
        assert_eq!(verbatim.dim(), 0);
    }

    #[test]
    fn restrictions() {
        let c = corpus::tropical_line();
        let sheaf = FormSheaf::for_complex(&c);
        let w = sheaf.whole();
        let id = sheaf.restrict(&w, &w, 1).unwrap();
        assert_eq!(id, RatMatrix::identity(2));
        let ray = (0..c.len()).find(|&i| c.face(i).dim() == 1 && c.face(i).contains(&rat_vec(&[0, 1]))).unwrap();
        let u = sheaf.star(ray).unwrap();
        assert_eq!(sheaf.forms(&u, 1).dim(), 1);
        assert_eq!(sheaf.restrict(&w, &u, 1).unwrap().rank(), 1);
        assert!(matches!(sheaf.restrict(&u, &w, 1), Err(FormsError::NotNested)));

        let f = corpus::compactified_plane();
        let sheaf = FormSheaf::for_complex(&f);
        let left = f.index_of(&Polyhedron::point(rat_vec(&[-2, 0]))).unwrap();
        let seg = (0..f.len()).find(|&i| f.face(i).dim() == 1 && f.face(i).is_bounded()).unwrap();
        let (u1, u2) = (sheaf.star(left).unwrap(), sheaf.star(seg).unwrap());
        let r = sheaf.restrict(&u1, &u2, 1).unwrap();
        assert_eq!(r.rank(), sheaf.forms(&u2, 1).dim());
        // Functoriality through an intermediate open set.
        let top = (0..f.len()).find(|&i| f.cofaces(i).len() == 1 && f.faces_of(i).contains(&seg) && f.face(i).recession_contains(&rat_vec(&[0, 1]))).unwrap();
        let u3 = sheaf.star(top).unwrap();
        for p in 0..3 {
            let a = sheaf.restrict(&u1, &u2, p).unwrap();
            let b = sheaf.restrict(&u2, &u3, p).unwrap();
            assert_eq!(&a * &b, sheaf.restrict(&u1, &u3, p).unwrap());
        }
    }

    #[test]
    fn not_open_rejected() {
        let c = corpus::tropical_line();
        let sheaf = FormSheaf::for_complex(&c);
        assert!(matches!(sheaf.open_set([0]), Err(FormsError::NotOpen)));
    }

    #[test]
    fn star_quotient_isomorphisms() {
        let f = corpus::compactified_plane();
        let iso = star_quotient_forms_iso(&f, corpus::compactified_plane_vertex(&f), ActiveRayRule::default()).unwrap();
        assert!(iso.is_isomorphism);
        assert_eq!(iso.source_dim, 1);
        let e = corpus::elliptic_curve();
        for i in 0..5 {
            let iso = star_quotient_forms_iso(&e, corpus::elliptic_vertex(&e, i), ActiveRayRule::default()).unwrap();
            assert!(iso.is_isomorphism && iso.source_dim == 1);
        }
        let line = corpus::tropical_line();
        let iso = star_quotient_forms_iso(&line, 0, ActiveRayRule::default()).unwrap();
        assert_eq!(iso.matrix, RatMatrix::identity(2));
        for c in [f, e, line, corpus::bergman_uniform(3, 4)] {
            for p in 0..c.len() {
                assert!(star_quotient_forms_iso(&c, p, ActiveRayRule::default()).unwrap().is_isomorphism, "face {p}");
            }
        }
    }

    #[test]
    fn wedge_table_of_u34() {
        let c = corpus::bergman_uniform(3, 4);
        let sheaf = FormSheaf::for_complex(&c);
        let t = sheaf.wedge_table(&sheaf.whole());
        assert_eq!(t.one_forms_dim(), 3);
        assert_eq!(t.matrix().rank(), 3);
        let line = corpus::tropical_line();
        let s = FormSheaf::for_complex(&line);
        assert_eq!(s.wedge_table(&s.whole()), WedgeTable::free(2));
    }

    #[test]
    fn representative_changes_do_not_move_classes() {
        let c = corpus::compactified_plane();
        let sheaf = FormSheaf::for_complex(&c);
        for f in 0..c.len() {
            let s = sheaf.star_forms(f, 1).unwrap();
            let q = s.presentation().unwrap();
            for (i, r) in q.section_basis().row_vecs().iter().enumerate() {
                for k in q.killed().basis_vecs() {
                    let shifted = crate::linalg::add_vec(r, &k);
                    let mut v = Vec::new();
                    for &m in s.maximal_faces() {
                        v.extend(sheaf.tangent_of(m).coords_unchecked(&shifted));
                    }
                    assert_eq!(s.coordinates(&v).unwrap(), unit_vec(s.dim(), i));
                }
            }
        }
    }
}
