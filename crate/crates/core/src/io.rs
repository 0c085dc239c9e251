//! JSON schemas for complexes, matroids, certificates, connections and descent objects.
//!
//! Rationals are written as `"p/q"` strings; integers are accepted wherever a rational is.
//! Faces are referenced by their index in the validated complex or by `"@x1,x2,…"`, the
//! face whose relative interior contains the given point.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::connections::{ConnectionError, TropConnection};
use crate::corpus;
use crate::descent::{DescentError, DescentObject, SkeletonGamma};
use crate::forms::{FormSheaf, FormsError};
use crate::lattice::int_vec;
use crate::linalg::{format_rat, parse_rat, LinalgError, Rat, RatMatrix};
use crate::matroids::{Matroid, MatroidError, SmoothnessCertificate};
use crate::polyhedra::{OpenSet, PolyComplex, PolyError, Polyhedron};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot read {path}: {message}")]
    Read { path: String, message: String },
    #[error(transparent)]
    Rational(#[from] LinalgError),
    #[error("unknown bundled example `{0}`")]
    UnknownExample(String),
    #[error("bad face reference `{0}`")]
    FaceRef(String),
    #[error("bad open set `{0}`")]
    OpenRef(String),
    #[error("bad edge key `{0}`")]
    EdgeKey(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("integer {0} does not fit in 64 bits")]
    Overflow(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Matroid(#[from] MatroidError),
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Connection(#[from] ConnectionError),
    #[error(transparent)]
    Descent(#[from] DescentError),
}

impl IoError {
    /// Whether the input failed to parse, as opposed to failing a mathematical check.
    pub fn is_malformed(&self) -> bool {
        matches!(
            self,
            IoError::Json(_)
                | IoError::Read { .. }
                | IoError::Rational(_)
                | IoError::UnknownExample(_)
                | IoError::FaceRef(_)
                | IoError::OpenRef(_)
                | IoError::EdgeKey(_)
                | IoError::Shape(_)
                | IoError::Overflow(_)
        )
    }
}

/// A rational in JSON: a `"p/q"` string or a plain integer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RatJson {
    Int(i64),
    Text(String),
}

impl RatJson {
    pub fn value(&self) -> Result<Rat, IoError> {
        match self {
            RatJson::Int(n) => Ok(crate::linalg::rat(*n)),
            RatJson::Text(s) => Ok(parse_rat(s)?),
        }
    }
}

impl From<&Rat> for RatJson {
    fn from(r: &Rat) -> Self {
        RatJson::Text(format_rat(r))
    }
}

pub fn rats(v: &[RatJson]) -> Result<Vec<Rat>, IoError> {
    v.iter().map(RatJson::value).collect()
}

pub fn rat_strings(v: &[Rat]) -> Vec<String> {
    v.iter().map(format_rat).collect()
}

pub fn matrix_from_json(rows: &[Vec<RatJson>], n: usize) -> Result<RatMatrix, IoError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(IoError::Shape(format!("expected a {n}x{n} matrix")));
    }
    let rows = rows.iter().map(|r| rats(r)).collect::<Result<Vec<_>, _>>()?;
    Ok(RatMatrix::from_rows(n, rows))
}

pub fn matrix_to_json(m: &RatMatrix) -> Vec<Vec<String>> {
    m.row_vecs().iter().map(|r| rat_strings(r)).collect()
}

fn ints_to_i64(v: &[num_bigint::BigInt]) -> Result<Vec<i64>, IoError> {
    v.iter().map(|x| x.to_i64().ok_or_else(|| IoError::Overflow(x.to_string()))).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceJson {
    pub vertices: Vec<Vec<RatJson>>,
    #[serde(default)]
    pub rays: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight: Option<i64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub rank: usize,
    #[serde(rename = "rays_R", default)]
    pub rays_r: Vec<Vec<i64>>,
    pub faces: Vec<FaceJson>,
}

impl ComplexJson {
    pub fn build(&self) -> Result<PolyComplex, IoError> {
        let n = self.rank;
        let check = |len: usize| {
            if len == n {
                Ok(())
            } else {
                Err(IoError::Shape(format!("vector of length {len} in rank {n}")))
            }
        };
        let mut polys = Vec::new();
        for f in &self.faces {
            let vertices = f.vertices.iter().map(|v| check(v.len()).and_then(|_| rats(v))).collect::<Result<Vec<_>, _>>()?;
            let rays = f
                .rays
                .iter()
                .map(|r| check(r.len()).map(|_| r.iter().map(|&x| crate::linalg::rat(x)).collect()))
                .collect::<Result<Vec<_>, _>>()?;
            polys.push((Polyhedron::new(n, vertices, rays)?, f.weight));
        }
        for r in &self.rays_r {
            check(r.len())?;
        }
        let rays_r = self.rays_r.iter().map(|r| int_vec(r)).collect();
        Ok(PolyComplex::from_maximal(n, polys, rays_r)?)
    }

    pub fn from_complex(c: &PolyComplex) -> Result<Self, IoError> {
        let faces = c
            .maximal_with_weights()
            .into_iter()
            .map(|(p, weight)| {
                Ok(FaceJson {
                    vertices: p.vertices().iter().map(|v| v.iter().map(RatJson::from).collect()).collect(),
                    rays: p.rays().iter().map(|r| ints_to_i64(r)).collect::<Result<_, IoError>>()?,
                    weight,
                })
            })
            .collect::<Result<_, IoError>>()?;
        let rays_r = c.compactification().iter().map(|r| ints_to_i64(r)).collect::<Result<_, _>>()?;
        Ok(ComplexJson { rank: c.rank(), rays_r, faces })
    }
}

/// A complex given inline, by a path relative to the referring file, or as `"example:<name>"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexRef {
    Path(String),
    Inline(ComplexJson),
}

pub fn read_file(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|e| IoError::Read { path: path.display().to_string(), message: e.to_string() })
}

pub fn load_complex(path: &Path) -> Result<PolyComplex, IoError> {
    let text = read_file(path)?;
    let json: ComplexJson = serde_json::from_str(&text)?;
    json.build()
}

impl ComplexRef {
    pub fn resolve(&self, base_dir: &Path) -> Result<PolyComplex, IoError> {
        match self {
            ComplexRef::Inline(j) => j.build(),
            ComplexRef::Path(p) => match p.strip_prefix("example:") {
                Some(name) => corpus::named_complexes()
                    .into_iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, c)| c)
                    .ok_or_else(|| IoError::UnknownExample(name.to_string())),
                None => load_complex(&base_dir.join(p)),
            },
        }
    }
}

fn parent_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Index of a face given as `"<index>"` or `"@x1,x2,…"`.
pub fn parse_face(c: &PolyComplex, s: &str) -> Result<usize, IoError> {
    let s = s.trim();
    if let Some(point) = s.strip_prefix('@') {
        let x = point.split(',').map(parse_rat).collect::<Result<Vec<_>, _>>().map_err(|_| IoError::FaceRef(s.into()))?;
        if x.len() != c.rank() {
            return Err(IoError::FaceRef(s.into()));
        }
        return c.carrier(&x).ok_or(IoError::Poly(PolyError::FaceNotInComplex));
    }
    let i: usize = s.parse().map_err(|_| IoError::FaceRef(s.into()))?;
    if i >= c.len() {
        return Err(IoError::Poly(PolyError::FaceNotInComplex));
    }
    Ok(i)
}

/// `"whole"`, `"star:<face>"` or `"open:<face>;<face>;…"`.
pub fn parse_open(c: &PolyComplex, s: &str) -> Result<OpenSet, IoError> {
    let s = s.trim();
    if s == "whole" {
        return Ok(c.whole());
    }
    if let Some(f) = s.strip_prefix("star:") {
        return Ok(c.open_star(parse_face(c, f)?)?.open);
    }
    if let Some(list) = s.strip_prefix("open:") {
        let faces = list.split(';').map(|f| parse_face(c, f)).collect::<Result<Vec<_>, _>>()?;
        return Ok(c.open_set(faces)?);
    }
    Err(IoError::OpenRef(s.into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatroidJson {
    pub ground: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flats: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bases: Option<Vec<Vec<usize>>>,
}

impl MatroidJson {
    pub fn build(&self) -> Result<Matroid, IoError> {
        match (&self.flats, &self.bases) {
            (Some(f), None) => Ok(Matroid::from_flats(self.ground, f)?),
            (None, Some(b)) => Ok(Matroid::from_bases(self.ground, b)?),
            _ => Err(IoError::Shape("a matroid needs exactly one of `flats` and `bases`".into())),
        }
    }

    pub fn from_matroid(m: &Matroid) -> Self {
        MatroidJson { ground: m.ground(), flats: Some(m.flats()), bases: None }
    }
}

/// Face reference as an index or a string.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FaceRefJson {
    Index(usize),
    Text(String),
}

impl FaceRefJson {
    pub fn resolve(&self, c: &PolyComplex) -> Result<usize, IoError> {
        match self {
            FaceRefJson::Index(i) => parse_face(c, &i.to_string()),
            FaceRefJson::Text(s) => parse_face(c, s),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub face: FaceRefJson,
    pub matroid: MatroidJson,
    pub basis: Vec<Vec<i64>>,
}

impl CertificateJson {
    pub fn build(&self, c: &PolyComplex) -> Result<SmoothnessCertificate, IoError> {
        Ok(SmoothnessCertificate {
            face: self.face.resolve(c)?,
            matroid: self.matroid.build()?,
            basis: self.basis.iter().map(|r| int_vec(r)).collect(),
        })
    }
}

/// One summand `form ⊗ matrix` of a connection form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThetaTerm {
    pub form: Vec<RatJson>,
    pub matrix: Vec<Vec<RatJson>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaseJson {
    pub complex: ComplexRef,
    #[serde(default = "whole")]
    pub open: String,
}

fn whole() -> String {
    "whole".into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionJson {
    pub base: BaseJson,
    pub rank: usize,
    #[serde(default)]
    pub theta: Vec<ThetaTerm>,
}

/// Sums `Σ form ⊗ matrix` into one matrix per basis form.
pub fn theta_matrices(terms: &[ThetaTerm], m: usize, rank: usize) -> Result<Vec<RatMatrix>, IoError> {
    let mut out = vec![RatMatrix::zeros(rank, rank); m];
    for t in terms {
        if t.form.len() != m {
            return Err(IoError::Shape(format!("form with {} coordinates, expected {m}", t.form.len())));
        }
        let mat = matrix_from_json(&t.matrix, rank)?;
        for (k, c) in rats(&t.form)?.iter().enumerate() {
            out[k] = &out[k] + &mat.scale(c);
        }
    }
    Ok(out)
}

pub fn theta_to_json(theta: &[RatMatrix]) -> Vec<ThetaTerm> {
    let m = theta.len();
    theta
        .iter()
        .enumerate()
        .map(|(k, a)| ThetaTerm {
            form: (0..m).map(|j| RatJson::Int(i64::from(j == k))).collect(),
            matrix: a.row_vecs().iter().map(|r| r.iter().map(RatJson::from).collect()).collect(),
        })
        .collect()
}

/// A connection together with the complex and open set it lives on.
#[derive(Debug)]
pub struct LoadedConnection {
    pub complex: PolyComplex,
    pub sheaf: FormSheaf,
    pub open: OpenSet,
    pub connection: TropConnection,
}

impl ConnectionJson {
    pub fn load(&self, base_dir: &Path) -> Result<LoadedConnection, IoError> {
        let complex = self.base.complex.resolve(base_dir)?;
        let open = parse_open(&complex, &self.base.open)?;
        let sheaf = FormSheaf::for_complex(&complex);
        let table = Arc::new(sheaf.wedge_table(&open));
        let m = table.one_forms_dim();
        let connection = if m == 0 {
            if !self.theta.is_empty() {
                return Err(IoError::Shape("no 1-forms on this open set".into()));
            }
            TropConnection::trivial(table, self.rank)
        } else {
            TropConnection::new(table, theta_matrices(&self.theta, m, self.rank)?)?
        };
        Ok(LoadedConnection { complex, sheaf, open, connection })
    }
}

pub fn load_connection(path: &Path) -> Result<LoadedConnection, IoError> {
    let json: ConnectionJson = serde_json::from_str(&read_file(path)?)?;
    json.load(&parent_dir(path))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    #[serde(default)]
    pub theta: Vec<ThetaTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescentJson {
    pub complex: ComplexRef,
    pub rank: usize,
    /// Keyed by face reference; missing vertices get `θ = 0`.
    #[serde(default)]
    pub vertices: BTreeMap<String, VertexJson>,
    /// `"v-w"` (face indices) or `"<ref>-><ref>"`: the gluing from the fiber at `v` to the fiber at `w`.
    #[serde(default)]
    pub edges: BTreeMap<String, Vec<Vec<RatJson>>>,
}

pub fn parse_edge_key(c: &PolyComplex, key: &str) -> Result<(usize, usize), IoError> {
    let (a, b) = key
        .split_once("->")
        .or_else(|| key.split_once('-'))
        .ok_or_else(|| IoError::EdgeKey(key.into()))?;
    Ok((parse_face(c, a)?, parse_face(c, b)?))
}

impl DescentJson {
    pub fn load(&self, base_dir: &Path) -> Result<(SkeletonGamma, DescentObject), IoError> {
        let complex = self.complex.resolve(base_dir)?;
        let g = SkeletonGamma::build(&complex)?;
        let position = |face: usize, key: &str| g.vertex_position(face).ok_or_else(|| IoError::FaceRef(key.into()));
        let mut obj = DescentObject::trivial(&g, self.rank);
        obj.gluing.clear();
        for (key, v) in &self.vertices {
            let p = position(parse_face(&complex, key)?, key)?;
            let base = g.vertex_base(p).clone();
            let m = base.one_forms_dim();
            if m > 0 {
                obj.connections[p] = TropConnection::new(base, theta_matrices(&v.theta, m, self.rank)?)?;
            } else if !v.theta.is_empty() {
                return Err(IoError::Shape(format!("no 1-forms on the star of {key}")));
            }
        }
        for (key, m) in &self.edges {
            let (a, b) = parse_edge_key(&complex, key)?;
            let (pa, pb) = (position(a, key)?, position(b, key)?);
            obj.gluing.insert((pa, pb), matrix_from_json(m, self.rank)?);
        }
        Ok((g, obj))
    }

    pub fn from_object(complex: ComplexRef, g: &SkeletonGamma, obj: &DescentObject) -> Self {
        let vertices = g
            .vertices()
            .iter()
            .zip(&obj.connections)
            .map(|(f, c)| (f.to_string(), VertexJson { theta: theta_to_json(c.theta()) }))
            .collect();
        let edges = obj
            .gluing
            .iter()
            .map(|(&(a, b), m)| {
                let rows = m.row_vecs().iter().map(|r| r.iter().map(RatJson::from).collect()).collect();
                (format!("{}-{}", g.vertices()[a], g.vertices()[b]), rows)
            })
            .collect();
        DescentJson { complex, rank: obj.rank, vertices, edges }
    }
}

pub fn load_descent(path: &Path) -> Result<(SkeletonGamma, DescentObject), IoError> {
    let json: DescentJson = serde_json::from_str(&read_file(path)?)?;
    json.load(&parent_dir(path))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormsOutput {
    pub open: String,
    pub p: usize,
    pub dim: usize,
    /// `covectors` for representatives in the homogenized dual, `restrictions` for coordinates on maximal faces.
    pub representation: &'static str,
    pub basis: Vec<Vec<String>>,
}

pub fn forms_output(sheaf: &FormSheaf, u: &OpenSet, p: usize) -> FormsOutput {
    let space = sheaf.forms(u, p);
    let (representation, basis) = match space.representatives() {
        Some(reps) => ("covectors", reps),
        None => ("restrictions", space.basis().to_vec()),
    };
    FormsOutput {
        open: space.descriptor(),
        p,
        dim: space.dim(),
        representation,
        basis: basis.iter().map(|v| rat_strings(v)).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complexes_round_trip() {
        for (name, c) in corpus::named_complexes() {
            let j = ComplexJson::from_complex(&c).unwrap();
            let text = serde_json::to_string(&j).unwrap();
            let back: ComplexJson = serde_json::from_str(&text).unwrap();
            let d = back.build().unwrap();
            assert_eq!(d.faces(), c.faces(), "{name}");
            assert_eq!(d.compactification(), c.compactification(), "{name}");
        }
    }

    #[test]
    fn malformed_inputs() {
        assert!(serde_json::from_str::<ComplexJson>("{\"rank\": 2}").is_err());
        let j: ComplexJson = serde_json::from_str(r#"{"rank": 1, "faces": [{"vertices": [["1/0"]]}]}"#).unwrap();
        assert!(j.build().unwrap_err().is_malformed());
        let j: ComplexJson = serde_json::from_str(r#"{"rank": 2, "faces": [{"vertices": [["1"]]}]}"#).unwrap();
        assert!(j.build().unwrap_err().is_malformed());
        let j: ComplexJson = serde_json::from_str(r#"{"rank": 1, "faces": [{"vertices": [[0], [2]]}, {"vertices": [[1], [3]]}]}"#).unwrap();
        assert!(!j.build().unwrap_err().is_malformed());
    }

    #[test]
    fn face_and_open_references() {
        let c = corpus::compactified_plane();
        let v = corpus::compactified_plane_vertex(&c);
        assert_eq!(parse_face(&c, "@2,0").unwrap(), v);
        assert_eq!(parse_face(&c, &v.to_string()).unwrap(), v);
        assert!(parse_face(&c, "@1").is_err());
        assert_eq!(parse_open(&c, "star:@2,0").unwrap().members().len(), 7);
        assert!(parse_open(&c, "nonsense").is_err());
        let u = parse_open(&c, &format!("open:{v}")).unwrap_err();
        assert!(!u.is_malformed());
    }

    #[test]
    fn compactified_plane_forms_output() {
        let c = corpus::compactified_plane();
        let sheaf = FormSheaf::for_complex(&c);
        let out = forms_output(&sheaf, &parse_open(&c, "star:@2,0").unwrap(), 1);
        assert_eq!(out.dim, 1);
        assert_eq!(out.basis, vec![vec!["0", "1", "0"]]);
    }

    #[test]
    fn descent_round_trip() {
        let c = corpus::elliptic_curve();
        let g = SkeletonGamma::build(&c).unwrap();
        let s = crate::connections::elementary(2, 0, 1);
        let t = &RatMatrix::identity(2) + &s;
        let obj = crate::descent::elliptic_build(&g, &s, &t).unwrap();
        let j = DescentJson::from_object(ComplexRef::Path("example:elliptic".into()), &g, &obj);
        let text = serde_json::to_string(&j).unwrap();
        let back: DescentJson = serde_json::from_str(&text).unwrap();
        let (_, obj2) = back.load(Path::new(".")).unwrap();
        assert_eq!(obj2, obj);
    }

    #[test]
    fn connection_terms_sum() {
        let j: ConnectionJson = serde_json::from_str(
            r#"{"base": {"complex": "example:line"}, "rank": 2,
                "theta": [{"form": [1, 0], "matrix": [[0, 1], [0, 0]]},
                          {"form": ["1/2", 1], "matrix": [[0, 2], [0, 0]]}]}"#,
        )
        .unwrap();
        let l = j.load(Path::new(".")).unwrap();
        assert_eq!(l.connection.theta()[0], RatMatrix::from_i64(&[&[0, 2], &[0, 0]]));
        assert_eq!(l.connection.theta()[1], RatMatrix::from_i64(&[&[0, 2], &[0, 0]]));
    }
}
