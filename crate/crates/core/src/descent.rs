//! Descent data over the bounded 2-skeleton `Γ` of a complex.
//!
//! An object assigns a connection on the open star of each vertex and a gluing matrix to
//! each edge of `Γ`. Fibers of the trivial bundles on stars are identified, so the gluing
//! matrices carry all transition data. Base points and transports use the breadth-first
//! spanning tree of `Γ` rooted at vertex position 0 (the lexicographically smallest vertex).

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::connections::{intertwiner_space, ConnectionError, TropConnection};
use crate::forms::{ActiveRayRule, FormSheaf, FormSpace, FormsError, WedgeTable};
use crate::linalg::{kernel, Rat, RatMatrix, Subspace};
use crate::polyhedra::PolyComplex;

#[derive(Debug, Error)]
pub enum DescentError {
    #[error("bounded face {0} is not a simplex")]
    NotSimplicial(usize),
    #[error("face {0} contains a line")]
    ContainsLine(usize),
    #[error("the edge graph of the bounded skeleton is disconnected")]
    Disconnected,
    #[error("objects are over different skeleta or have inconsistent data: {0}")]
    SkeletonMismatch(String),
    #[error("the skeleton is not a single cycle")]
    NotCycle,
    #[error("the extracted matrices do not commute")]
    NotCommuting,
    #[error("expected one-dimensional forms: {0}")]
    NotOneDimensional(String),
    #[error("matrix is not invertible on edge {0}-{1}")]
    NotInvertible(usize, usize),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Edge {
    pub face: usize,
    /// Vertex positions, smaller first.
    pub ends: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Triangle {
    pub face: usize,
    pub vertices: [usize; 3],
}

/// The 2-skeleton of the bounded part of a complex, with the form data on stars.
#[derive(Debug)]
pub struct SkeletonGamma {
    complex: PolyComplex,
    sheaf: FormSheaf,
    vertices: Vec<usize>,
    edges: Vec<Edge>,
    triangles: Vec<Triangle>,
    vertex_forms: Vec<Arc<FormSpace>>,
    vertex_bases: Vec<Arc<WedgeTable>>,
    edge_forms: Vec<Arc<FormSpace>>,
    // For edge i: restriction matrices from the stars of its two ends.
    restrictions: Vec<[RatMatrix; 2]>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl SkeletonGamma {
    pub fn build(c: &PolyComplex) -> Result<Self, DescentError> {
        Self::build_with(c, ActiveRayRule::default())
    }

    pub fn build_with(c: &PolyComplex, rule: ActiveRayRule) -> Result<Self, DescentError> {
        if let Some(f) = (0..c.len()).find(|&i| c.face(i).contains_line()) {
            return Err(DescentError::ContainsLine(f));
        }
        let vertices: Vec<usize> = c.faces_of_dim(0);
        let pos: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let verts_of = |f: usize| -> Vec<usize> {
            c.faces_of(f).iter().filter(|&&g| c.face(g).dim() == 0).map(|g| pos[g]).collect()
        };
        let mut edges = Vec::new();
        let mut triangles = Vec::new();
        for f in 0..c.len() {
            let p = c.face(f);
            if !p.is_bounded() {
                continue;
            }
            match p.dim() {
                1 => {
                    let v = verts_of(f);
                    edges.push(Edge { face: f, ends: (v[0].min(v[1]), v[0].max(v[1])) });
                }
                2 => {
                    let v = verts_of(f);
                    if v.len() != 3 {
                        return Err(DescentError::NotSimplicial(f));
                    }
                    let mut t = [v[0], v[1], v[2]];
                    t.sort_unstable();
                    triangles.push(Triangle { face: f, vertices: t });
                }
                _ => {}
            }
        }
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.ends.0].push((e.ends.1, i));
            adjacency[e.ends.1].push((e.ends.0, i));
        }
        let sheaf = FormSheaf::for_complex_with(c, rule);
        let vertex_forms: Vec<Arc<FormSpace>> =
            vertices.iter().map(|&v| sheaf.star_forms(v, 1)).collect::<Result<_, _>>()?;
        let vertex_bases =
            vertices.iter().map(|&v| Ok(Arc::new(sheaf.wedge_table(&sheaf.star(v)?)))).collect::<Result<_, FormsError>>()?;
        let edge_forms: Vec<Arc<FormSpace>> =
            edges.iter().map(|e| sheaf.star_forms(e.face, 1)).collect::<Result<_, _>>()?;
        let restrictions = edges
            .iter()
            .map(|e| {
                let se = sheaf.star(e.face)?;
                let a = sheaf.restrict(&sheaf.star(vertices[e.ends.0])?, &se, 1)?;
                let b = sheaf.restrict(&sheaf.star(vertices[e.ends.1])?, &se, 1)?;
                Ok([a, b])
            })
            .collect::<Result<_, FormsError>>()?;
        let g = SkeletonGamma {
            complex: c.clone(),
            sheaf,
            vertices,
            edges,
            triangles,
            vertex_forms,
            vertex_bases,
            edge_forms,
            restrictions,
            adjacency,
        };
        if g.vertices.len() > 1 && g.spanning_tree(0).iter().any(|p| p.is_none()) {
            return Err(DescentError::Disconnected);
        }
        Ok(g)
    }

    pub fn complex(&self) -> &PolyComplex {
        &self.complex
    }

    pub fn sheaf(&self) -> &FormSheaf {
        &self.sheaf
    }

    /// Face indices of the vertices, by position.
    pub fn vertices(&self) -> &[usize] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn vertex_forms(&self, v: usize) -> &Arc<FormSpace> {
        &self.vertex_forms[v]
    }

    pub fn vertex_base(&self, v: usize) -> &Arc<WedgeTable> {
        &self.vertex_bases[v]
    }

    pub fn edge_forms(&self, e: usize) -> &Arc<FormSpace> {
        &self.edge_forms[e]
    }

    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency.get(a)?.iter().find(|(n, _)| *n == b).map(|&(_, e)| e)
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    /// Position of the vertex with the given face index.
    pub fn vertex_position(&self, face: usize) -> Option<usize> {
        self.vertices.iter().position(|&v| v == face)
    }

    /// Breadth-first tree: for each vertex, its parent and the connecting edge (`Some((v, usize::MAX))` at the root).
    pub fn spanning_tree(&self, root: usize) -> Vec<Option<(usize, usize)>> {
        let mut parent = vec![None; self.vertices.len()];
        if self.vertices.is_empty() {
            return parent;
        }
        parent[root] = Some((root, usize::MAX));
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            let mut ns = self.adjacency[v].clone();
            ns.sort_unstable();
            for (w, e) in ns {
                if parent[w].is_none() {
                    parent[w] = Some((v, e));
                    queue.push_back(w);
                }
            }
        }
        parent
    }

    /// Restriction of the connection at vertex `v` to the star of edge `e`.
    pub fn restricted_theta(&self, c: &TropConnection, v: usize, e: usize) -> Vec<RatMatrix> {
        let edge = &self.edges[e];
        let r = if edge.ends.0 == v { &self.restrictions[e][0] } else { &self.restrictions[e][1] };
        let rank = c.rank();
        (0..r.cols())
            .map(|j| {
                (0..r.rows()).fold(RatMatrix::zeros(rank, rank), |acc, k| &acc + &c.theta()[k].scale(r.get(k, j)))
            })
            .collect()
    }

    /// Is this a single cycle?
    pub fn is_cycle(&self) -> bool {
        !self.vertices.is_empty()
            && self.triangles.is_empty()
            && self.edges.len() == self.vertices.len()
            && self.adjacency.iter().all(|a| a.len() == 2)
    }
}

/// Per-vertex connections and per-edge gluing matrices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentObject {
    pub rank: usize,
    pub connections: Vec<TropConnection>,
    /// `(a, b) ↦ φ`, the map from the fiber at `a` to the fiber at `b`.
    pub gluing: BTreeMap<(usize, usize), RatMatrix>,
}

impl DescentObject {
    /// Rank `r` with `θ = 0` and identity gluings.
    pub fn trivial(g: &SkeletonGamma, r: usize) -> Self {
        let connections = (0..g.vertices.len()).map(|v| TropConnection::trivial(g.vertex_bases[v].clone(), r)).collect();
        let gluing = g.edges.iter().map(|e| (e.ends, RatMatrix::identity(r))).collect();
        DescentObject { rank: r, connections, gluing }
    }

    pub fn unit(g: &SkeletonGamma) -> Self {
        Self::trivial(g, 1)
    }

    /// `φ_{a→b}`, inverting the stored opposite direction when needed.
    pub fn phi(&self, a: usize, b: usize) -> Option<RatMatrix> {
        if let Some(m) = self.gluing.get(&(a, b)) {
            return Some(m.clone());
        }
        self.gluing.get(&(b, a)).and_then(|m| m.inverse())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    Rank { vertex: usize },
    BaseMismatch { vertex: usize },
    NotIntegrable { vertex: usize },
    MissingEdge { from: usize, to: usize },
    NotInvertible { from: usize, to: usize },
    InverseMismatch { from: usize, to: usize },
    Intertwining { from: usize, to: usize, form: usize },
    Cocycle { vertices: [usize; 3] },
    UnknownEdge { from: usize, to: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

pub fn validate_object(g: &SkeletonGamma, obj: &DescentObject) -> ValidationReport {
    let mut violations = Vec::new();
    if obj.connections.len() != g.vertices.len() {
        violations.push(Violation::Rank { vertex: obj.connections.len().min(g.vertices.len()) });
        return ValidationReport { valid: false, violations };
    }
    for (v, c) in obj.connections.iter().enumerate() {
        if c.rank() != obj.rank {
            violations.push(Violation::Rank { vertex: v });
        } else if **c.base() != *g.vertex_bases[v] {
            violations.push(Violation::BaseMismatch { vertex: v });
        } else if !c.is_integrable().integrable {
            violations.push(Violation::NotIntegrable { vertex: v });
        }
    }
    if !violations.is_empty() {
        return ValidationReport { valid: false, violations };
    }
    for &(a, b) in obj.gluing.keys() {
        if g.edge_index(a, b).is_none() {
            violations.push(Violation::UnknownEdge { from: a, to: b });
        }
    }
    for (i, e) in g.edges.iter().enumerate() {
        let (a, b) = e.ends;
        let fwd = obj.gluing.get(&(a, b));
        let bwd = obj.gluing.get(&(b, a));
        if fwd.is_none() && bwd.is_none() {
            violations.push(Violation::MissingEdge { from: a, to: b });
            continue;
        }
        let shape_ok = |m: &RatMatrix| m.rows() == obj.rank && m.cols() == obj.rank;
        if fwd.map_or(false, |m| !shape_ok(m)) || bwd.map_or(false, |m| !shape_ok(m)) {
            violations.push(Violation::NotInvertible { from: a, to: b });
            continue;
        }
        let phi = match obj.phi(a, b) {
            Some(p) if p.inverse().is_some() => p,
            _ => {
                violations.push(Violation::NotInvertible { from: a, to: b });
                continue;
            }
        };
        if let (Some(f), Some(bm)) = (fwd, bwd) {
            if &(f * bm) != &RatMatrix::identity(obj.rank) {
                violations.push(Violation::InverseMismatch { from: a, to: b });
            }
        }
        let ta = g.restricted_theta(&obj.connections[a], a, i);
        let tb = g.restricted_theta(&obj.connections[b], b, i);
        for (j, (x, y)) in ta.iter().zip(&tb).enumerate() {
            if &phi * x != y * &phi {
                violations.push(Violation::Intertwining { from: a, to: b, form: j });
            }
        }
    }
    for t in &g.triangles {
        let [u, v, w] = t.vertices;
        if let (Some(uv), Some(vw), Some(uw)) = (obj.phi(u, v), obj.phi(v, w), obj.phi(u, w)) {
            if &vw * &uv != uw {
                violations.push(Violation::Cocycle { vertices: t.vertices });
            }
        }
    }
    ValidationReport { valid: violations.is_empty(), violations }
}

fn check_same(g: &SkeletonGamma, o: &DescentObject) -> Result<(), DescentError> {
    let report = validate_object(g, o);
    if !report.valid {
        return Err(DescentError::SkeletonMismatch(format!("{:?}", report.violations)));
    }
    Ok(())
}

/// Morphisms as per-vertex matrices `ψ_v` (`r₂ × r₁`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentHom {
    pub dim: usize,
    pub basis: Vec<Vec<RatMatrix>>,
    /// The solution space in the concatenated row-major coordinates.
    pub space: Subspace,
}

/// All `ψ` with `ψ_v` horizontal at each vertex and `ψ_b φ_e = φ'_e ψ_a` on each edge.
pub fn descent_hom(g: &SkeletonGamma, o1: &DescentObject, o2: &DescentObject) -> Result<DescentHom, DescentError> {
    check_same(g, o1)?;
    check_same(g, o2)?;
    let (r1, r2) = (o1.rank, o2.rank);
    let block = r1 * r2;
    let nv = g.vertices.len();
    let n = nv * block;
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for v in 0..nv {
        let local = intertwiner_space(o1.connections[v].theta(), o2.connections[v].theta(), r1, r2);
        for a in local.annihilator().basis_vecs() {
            let mut row = vec![Rat::zero(); n];
            row[v * block..(v + 1) * block].clone_from_slice(&a);
            rows.push(row);
        }
    }
    for e in &g.edges {
        let (a, b) = e.ends;
        let p1 = o1.phi(a, b).expect("validated");
        let p2 = o2.phi(a, b).expect("validated");
        // Entry (i, j) of ψ_b p1 − p2 ψ_a.
        for i in 0..r2 {
            for j in 0..r1 {
                let mut row = vec![Rat::zero(); n];
                for k in 0..r1 {
                    row[b * block + i * r1 + k] += p1.get(k, j);
                }
                for k in 0..r2 {
                    row[a * block + k * r1 + j] -= p2.get(i, k);
                }
                rows.push(row);
            }
        }
    }
    let space = kernel(&RatMatrix::from_rows(n, rows));
    let basis = space
        .basis_vecs()
        .iter()
        .map(|x| (0..nv).map(|v| RatMatrix::from_vec(r2, r1, x[v * block..(v + 1) * block].to_vec())).collect())
        .collect();
    Ok(DescentHom { dim: space.dim(), basis, space })
}

/// Transport matrices `fiber(root) → fiber(v)` along the spanning tree.
pub fn tree_transport(g: &SkeletonGamma, obj: &DescentObject, root: usize) -> Vec<RatMatrix> {
    let parent = g.spanning_tree(root);
    let mut out: Vec<Option<RatMatrix>> = vec![None; g.vertices.len()];
    out[root] = Some(RatMatrix::identity(obj.rank));
    let mut order: Vec<usize> = (0..g.vertices.len()).collect();
    order.sort_by_key(|&v| depth(&parent, v));
    for v in order {
        if v == root {
            continue;
        }
        let (p, _) = parent[v].expect("connected");
        let step = obj.phi(p, v).expect("validated");
        out[v] = Some(&step * out[p].as_ref().expect("parent first"));
    }
    out.into_iter().map(|m| m.expect("connected")).collect()
}

fn depth(parent: &[Option<(usize, usize)>], mut v: usize) -> usize {
    let mut d = 0;
    while let Some((p, _)) = parent[v] {
        if p == v {
            break;
        }
        v = p;
        d += 1;
    }
    d
}

/// Morphisms determined by their value at `anchor`, propagated along the spanning tree.
pub fn descent_hom_anchored(
    g: &SkeletonGamma,
    o1: &DescentObject,
    o2: &DescentObject,
    anchor: usize,
) -> Result<Subspace, DescentError> {
    check_same(g, o1)?;
    check_same(g, o2)?;
    let (r1, r2) = (o1.rank, o2.rank);
    let t1 = tree_transport(g, o1, anchor);
    let t2 = tree_transport(g, o2, anchor);
    let inv1: Vec<RatMatrix> = t1.iter().map(|m| m.inverse().expect("gluings are invertible")).collect();
    // ψ_v = T2_v ψ T1_v^{-1}; each constraint is linear in ψ, so evaluate on matrix units.
    let units: Vec<RatMatrix> = (0..r1 * r2)
        .map(|k| {
            let mut m = RatMatrix::zeros(r2, r1);
            m.set(k / r1, k % r1, Rat::one());
            m
        })
        .collect();
    let psi = |v: usize, x: &RatMatrix| &(&t2[v] * x) * &inv1[v];
    let mut columns: Vec<Vec<Rat>> = Vec::new();
    for u in &units {
        let mut col = Vec::new();
        for v in 0..g.vertices.len() {
            let p = psi(v, u);
            for (a, b) in o1.connections[v].theta().iter().zip(o2.connections[v].theta()) {
                col.extend((&(b * &p) - &(&p * a)).to_vec());
            }
        }
        for e in &g.edges {
            let (a, b) = e.ends;
            let lhs = &psi(b, u) * &o1.phi(a, b).expect("validated");
            let rhs = &o2.phi(a, b).expect("validated") * &psi(a, u);
            col.extend((&lhs - &rhs).to_vec());
        }
        columns.push(col);
    }
    let rows = columns.first().map_or(0, |c| c.len());
    let m = RatMatrix::from_fn(rows, r1 * r2, |i, j| columns[j][i].clone());
    Ok(kernel(&m))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectUnipotence {
    pub unipotent: bool,
    /// Subspaces of the fiber at vertex position 0.
    pub filtration: Vec<Subspace>,
}

/// Peels off global horizontal sections until the whole fiber is exhausted or no progress is made.
pub fn is_unipotent_object(g: &SkeletonGamma, obj: &DescentObject) -> Result<ObjectUnipotence, DescentError> {
    check_same(g, obj)?;
    let r = obj.rank;
    if g.vertices.is_empty() {
        return Ok(ObjectUnipotence { unipotent: true, filtration: vec![Subspace::full(r)] });
    }
    let t = tree_transport(g, obj, 0);
    let mut filtration = vec![Subspace::zero(r)];
    loop {
        let last = filtration.last().unwrap().clone();
        if last.dim() == r {
            return Ok(ObjectUnipotence { unipotent: true, filtration });
        }
        let at: Vec<Subspace> = t
            .iter()
            .map(|m| Subspace::span(r, last.basis_vecs().iter().map(|x| m.mul_vec(x))))
            .collect();
        let mut rows: Vec<Vec<Rat>> = Vec::new();
        for v in 0..g.vertices.len() {
            let ann = at[v].annihilator().basis_vecs();
            for a in obj.connections[v].theta() {
                let m = a * &t[v];
                rows.extend(ann.iter().map(|alpha| m.left_mul_vec(alpha)));
            }
        }
        for e in &g.edges {
            let (a, b) = e.ends;
            let m = &(&obj.phi(a, b).expect("validated") * &t[a]) - &t[b];
            rows.extend(at[b].annihilator().basis_vecs().iter().map(|alpha| m.left_mul_vec(alpha)));
        }
        let next = kernel(&RatMatrix::from_rows(r, rows));
        if next.dim() == last.dim() {
            return Ok(ObjectUnipotence { unipotent: false, filtration });
        }
        filtration.push(next);
    }
}

/// Vertex positions around the cycle starting at position 0 towards its smaller neighbor.
pub fn cycle_order(g: &SkeletonGamma) -> Result<Vec<usize>, DescentError> {
    if !g.is_cycle() {
        return Err(DescentError::NotCycle);
    }
    let n = g.vertices.len();
    let mut order = vec![0];
    let mut prev = usize::MAX;
    let mut cur = 0;
    while order.len() < n {
        let mut ns: Vec<usize> = g.adjacency[cur].iter().map(|&(w, _)| w).filter(|&w| w != prev).collect();
        ns.sort_unstable();
        let next = ns[0];
        prev = cur;
        cur = next;
        order.push(cur);
    }
    if g.edge_index(cur, 0).is_none() {
        return Err(DescentError::NotCycle);
    }
    Ok(order)
}

/// Coefficients of the global 1-form on each vertex star.
fn global_form_on_stars(g: &SkeletonGamma) -> Result<Vec<Vec<Rat>>, DescentError> {
    let sheaf = &g.sheaf;
    let whole = sheaf.whole();
    let global = sheaf.forms(&whole, 1);
    if global.dim() != 1 {
        return Err(DescentError::NotOneDimensional(format!("global forms have dimension {}", global.dim())));
    }
    g.vertices
        .iter()
        .map(|&v| {
            let r = sheaf.restrict(&whole, &sheaf.star(v)?, 1)?;
            Ok(r.row(0).to_vec())
        })
        .collect()
}

/// `(S, T)`: `θ = ω ⊗ S` at the base vertex for the global form `ω`, and `T` the monodromy around the cycle.
pub fn elliptic_extract(g: &SkeletonGamma, obj: &DescentObject) -> Result<(RatMatrix, RatMatrix), DescentError> {
    check_same(g, obj)?;
    let order = cycle_order(g)?;
    let coeffs = global_form_on_stars(g)?;
    let c0 = &coeffs[0];
    if c0.len() != 1 || c0[0].is_zero() {
        return Err(DescentError::NotOneDimensional("forms on the base vertex star".into()));
    }
    let s = obj.connections[0].theta()[0].scale(&(Rat::one() / &c0[0]));
    let n = order.len();
    let mut t = RatMatrix::identity(obj.rank);
    for i in 0..n {
        let (a, b) = (order[i], order[(i + 1) % n]);
        t = &obj.phi(a, b).expect("validated") * &t;
    }
    if &s * &t != &t * &s {
        return Err(DescentError::NotCommuting);
    }
    Ok((s, t))
}

/// The object with `θ = ω ⊗ S` everywhere and gluing `T` on the edge closing the cycle.
pub fn elliptic_build(g: &SkeletonGamma, s: &RatMatrix, t: &RatMatrix) -> Result<DescentObject, DescentError> {
    let order = cycle_order(g)?;
    let coeffs = global_form_on_stars(g)?;
    let r = s.rows();
    let connections = (0..g.vertices.len())
        .map(|v| TropConnection::new(g.vertex_bases[v].clone(), coeffs[v].iter().map(|c| s.scale(c)).collect()))
        .collect::<Result<_, _>>()?;
    let n = order.len();
    let mut gluing = BTreeMap::new();
    for i in 0..n {
        let (a, b) = (order[i], order[(i + 1) % n]);
        let m = if i + 1 == n { t.clone() } else { RatMatrix::identity(r) };
        gluing.insert((a, b), m);
    }
    Ok(DescentObject { rank: r, connections, gluing })
}

/// Pull an object back along a refinement `fine` of `g.complex()`.
///
/// A fine vertex is attached to the smallest coarse vertex of its carrier; its connection is the
/// coarse one restricted to the star of the carrier, re-expressed through representative covectors.
pub fn pull_back(g: &SkeletonGamma, fine: &SkeletonGamma, obj: &DescentObject) -> Result<DescentObject, DescentError> {
    check_same(g, obj)?;
    let coarse = &g.complex;
    let parent = coarse
        .parent_map(&fine.complex)
        .ok_or_else(|| DescentError::SkeletonMismatch("not a refinement".into()))?;
    let mut anchor = Vec::new();
    let mut connections = Vec::new();
    for (fv, &face) in fine.vertices.iter().enumerate() {
        let carrier = parent[face];
        let a = coarse
            .faces_of(carrier)
            .iter()
            .filter_map(|&f| g.vertex_position(f))
            .min()
            .ok_or_else(|| DescentError::SkeletonMismatch("carrier without vertices".into()))?;
        anchor.push(a);
        let src = g.sheaf.star_forms(carrier, 1)?;
        let to_carrier = g.sheaf.restrict(&g.sheaf.star(g.vertices[a])?, &g.sheaf.star(carrier)?, 1)?;
        let theta_a = obj.connections[a].theta();
        let r = obj.rank;
        // Coefficients on the carrier star basis.
        let b: Vec<RatMatrix> = (0..to_carrier.cols())
            .map(|j| (0..to_carrier.rows()).fold(RatMatrix::zeros(r, r), |acc, k| &acc + &theta_a[k].scale(to_carrier.get(k, j))))
            .collect();
        let dst = fine.vertex_forms[fv].clone();
        let dq = dst.presentation().expect("open star");
        let reps = src.representatives().expect("open star");
        let mut theta = vec![RatMatrix::zeros(r, r); dst.dim()];
        for (j, rep) in reps.iter().enumerate() {
            let c = dq.coords(rep).ok_or_else(|| DescentError::SkeletonMismatch("forms do not pull back".into()))?;
            for (i, x) in c.iter().enumerate() {
                theta[i] = &theta[i] + &b[j].scale(x);
            }
        }
        connections.push(TropConnection::new(fine.vertex_bases[fv].clone(), theta)?);
    }
    let mut gluing = BTreeMap::new();
    for e in &fine.edges {
        let (a, b) = e.ends;
        gluing.insert((a, b), coarse_transport(g, obj, anchor[a], anchor[b])?);
    }
    Ok(DescentObject { rank: obj.rank, connections, gluing })
}

fn coarse_transport(g: &SkeletonGamma, obj: &DescentObject, from: usize, to: usize) -> Result<RatMatrix, DescentError> {
    let parent = g.spanning_tree(from);
    let mut path = vec![to];
    let mut v = to;
    while v != from {
        let (p, _) = parent[v].ok_or(DescentError::Disconnected)?;
        path.push(p);
        v = p;
    }
    path.reverse();
    let mut m = RatMatrix::identity(obj.rank);
    for w in path.windows(2) {
        m = &obj.phi(w[0], w[1]).ok_or(DescentError::NotInvertible(w[0], w[1]))? * &m;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connections::elementary;
    use crate::corpus;
    use crate::linalg::{rat, rat_vec};
    use crate::polyhedra::Polyhedron;

    fn s_t() -> (RatMatrix, RatMatrix) {
        let s = elementary(2, 0, 1);
        let t = &RatMatrix::identity(2) + &elementary(2, 0, 1);
        (s, t)
    }

    #[test]
    fn segment_skeleton() {
        let seg = Polyhedron::new(1, vec![rat_vec(&[0]), rat_vec(&[1])], vec![]).unwrap();
        let c = PolyComplex::from_maximal(1, vec![(seg, None)], vec![]).unwrap();
        let g = SkeletonGamma::build(&c).unwrap();
        assert_eq!(g.vertices().len(), 2);
        assert_eq!(g.edges().len(), 1);
    }

    #[test]
    fn elliptic_skeleton_is_a_pentagon() {
        let g = SkeletonGamma::build(&corpus::elliptic_curve()).unwrap();
        assert_eq!(g.vertices().len(), 5);
        assert_eq!(g.edges().len(), 5);
        assert!(g.triangles().is_empty());
        assert!(g.is_cycle());
    }

    #[test]
    fn skeleton_errors() {
        let strip = Polyhedron::new(2, vec![rat_vec(&[0, 0]), rat_vec(&[1, 0])], vec![rat_vec(&[0, 1]), rat_vec(&[0, -1])]).unwrap();
        let c = PolyComplex::from_maximal(2, vec![(strip, None)], vec![]).unwrap();
        assert!(matches!(SkeletonGamma::build(&c), Err(DescentError::ContainsLine(_))));
        let sq = Polyhedron::new(2, vec![rat_vec(&[0, 0]), rat_vec(&[1, 0]), rat_vec(&[0, 1]), rat_vec(&[1, 1])], vec![]).unwrap();
        let c = PolyComplex::from_maximal(2, vec![(sq, None)], vec![]).unwrap();
        assert!(matches!(SkeletonGamma::build(&c), Err(DescentError::NotSimplicial(_))));
        let a = Polyhedron::new(1, vec![rat_vec(&[0]), rat_vec(&[1])], vec![]).unwrap();
        let b = Polyhedron::new(1, vec![rat_vec(&[2]), rat_vec(&[3])], vec![]).unwrap();
        let c = PolyComplex::from_maximal(1, vec![(a, None), (b, None)], vec![]).unwrap();
        assert!(matches!(SkeletonGamma::build(&c), Err(DescentError::Disconnected)));
    }

    #[test]
    fn trivial_objects() {
        let g = SkeletonGamma::build(&corpus::elliptic_curve()).unwrap();
        let unit = DescentObject::unit(&g);
        assert!(validate_object(&g, &unit).valid);
        assert_eq!(descent_hom(&g, &unit, &unit).unwrap().dim, 1);
        let u = is_unipotent_object(&g, &DescentObject::trivial(&g, 3)).unwrap();
        assert!(u.unipotent);
        assert_eq!(u.filtration.len(), 2);
        let (s, t) = elliptic_extract(&g, &DescentObject::trivial(&g, 2)).unwrap();
        assert!(s.is_zero());
        assert_eq!(t, RatMatrix::identity(2));
    }

    #[test]
    fn elliptic_object_round_trip() {
        let g = SkeletonGamma::build(&corpus::elliptic_curve()).unwrap();
        let (s, t) = s_t();
        let obj = elliptic_build(&g, &s, &t).unwrap();
        assert!(validate_object(&g, &obj).valid);
        assert!(is_unipotent_object(&g, &obj).unwrap().unipotent);
        let (s2, t2) = elliptic_extract(&g, &obj).unwrap();
        assert_eq!((s2.clone(), t2.clone()), (s, t));
        assert_eq!(elliptic_build(&g, &s2, &t2).unwrap(), obj);
        assert_eq!(descent_hom(&g, &obj, &obj).unwrap().dim, 2);
    }

    #[test]
    fn noncommuting_pair_fails_on_the_closing_edge() {
        let g = SkeletonGamma::build(&corpus::elliptic_curve()).unwrap();
        let s = elementary(2, 0, 1);
        let t = &RatMatrix::identity(2) + &elementary(2, 1, 0);
        let obj = elliptic_build(&g, &s, &t).unwrap();
        let report = validate_object(&g, &obj);
        assert!(!report.valid);
        let order = cycle_order(&g).unwrap();
        let closing = (order[order.len() - 1], order[0]);
        let (lo, hi) = (closing.0.min(closing.1), closing.0.max(closing.1));
        assert!(report
            .violations
            .iter()
            .all(|v| matches!(v, Violation::Intertwining { from, to, .. } if (*from, *to) == (lo, hi))));
    }

    #[test]
    fn monodromy_obstruction() {
        let g = SkeletonGamma::build(&corpus::elliptic_curve()).unwrap();
        let unit = DescentObject::unit(&g);
        let mut obj = DescentObject::unit(&g);
        let first = g.edges()[0].ends;
        obj.gluing.insert(first, RatMatrix::from_i64(&[&[2]]));
        assert!(validate_object(&g, &obj).valid);
        assert_eq!(descent_hom(&g, &unit, &obj).unwrap().dim, 0);
        assert!(!is_unipotent_object(&g, &obj).unwrap().unipotent);
    }

    #[test]
    fn anchoring_does_not_matter() {
        let g = SkeletonGamma::build(&corpus::elliptic_curve()).unwrap();
        let (s, t) = s_t();
        let a = elliptic_build(&g, &s, &t).unwrap();
        let b = elliptic_build(&g, &RatMatrix::zeros(2, 2), &t).unwrap();
        for (x, y) in [(&a, &a), (&a, &b), (&b, &a)] {
            let d = descent_hom(&g, x, y).unwrap().dim;
            for v in 0..5 {
                assert_eq!(descent_hom_anchored(&g, x, y, v).unwrap().dim(), d);
            }
        }
    }

    #[test]
    fn triangles_check_cocycles() {
        let c = corpus::two_triangles();
        let g = SkeletonGamma::build(&c).unwrap();
        assert_eq!(g.triangles().len(), 2);
        // Gluings from a potential satisfy the cocycle condition.
        let pot: Vec<RatMatrix> = (0..4).map(|i| RatMatrix::from_i64(&[&[1, i], &[0, 1]])).collect();
        let mut obj = DescentObject::trivial(&g, 2);
        for e in g.edges() {
            let (a, b) = e.ends;
            obj.gluing.insert((a, b), &pot[b] * &pot[a].inverse().unwrap());
        }
        assert!(validate_object(&g, &obj).valid);
        let e = g.edges()[0].ends;
        obj.gluing.insert(e, RatMatrix::from_i64(&[&[1, 7], &[0, 1]]));
        let report = validate_object(&g, &obj);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::Cocycle { .. })));
    }

    #[test]
    fn fan_reduces_to_connections() {
        let c = corpus::tropical_line();
        let g = SkeletonGamma::build(&c).unwrap();
        assert_eq!(g.vertices().len(), 1);
        let base = g.vertex_base(0).clone();
        let e = elementary(2, 0, 1);
        let conn = TropConnection::new(base, vec![e.clone(), e]).unwrap();
        let obj = DescentObject { rank: 2, connections: vec![conn.clone()], gluing: BTreeMap::new() };
        let d = descent_hom(&g, &obj, &obj).unwrap();
        assert_eq!(d.space, crate::connections::hom_space(&conn, &conn).unwrap());
    }

    #[test]
    fn refinement_preserves_homs() {
        let c = corpus::elliptic_curve();
        let g = SkeletonGamma::build(&c).unwrap();
        let edge = g.edges()[0].face;
        let mid: Vec<Rat> = {
            let vs = c.face(edge).vertices();
            vs[0].iter().zip(&vs[1]).map(|(a, b)| (a + b) / rat(2)).collect()
        };
        let fine = c.stellar_subdivide(edge, &mid).unwrap();
        let gf = SkeletonGamma::build(&fine).unwrap();
        assert_eq!(gf.vertices().len(), 6);
        let (s, t) = s_t();
        let objs = [
            elliptic_build(&g, &s, &t).unwrap(),
            elliptic_build(&g, &RatMatrix::zeros(2, 2), &t).unwrap(),
            DescentObject::unit(&g),
        ];
        let pulled: Vec<DescentObject> = objs.iter().map(|o| pull_back(&g, &gf, o).unwrap()).collect();
        for p in &pulled {
            assert!(validate_object(&gf, p).valid, "{:?}", validate_object(&gf, p));
        }
        for i in 0..objs.len() {
            for j in 0..objs.len() {
                if objs[i].rank != objs[j].rank && (i == 2) == (j == 2) {
                    continue;
                }
                assert_eq!(
                    descent_hom(&g, &objs[i], &objs[j]).unwrap().dim,
                    descent_hom(&gf, &pulled[i], &pulled[j]).unwrap().dim
                );
            }
        }
    }
}
