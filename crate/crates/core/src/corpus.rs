//! Bundled example complexes and the matroid test corpus.

use num_bigint::BigInt;

use crate::lattice::int_vec;
use crate::linalg::{rat_vec, RatMatrix};
use crate::matroids::{bergman_fan, Matroid};
use crate::polyhedra::{PolyComplex, Polyhedron};

fn poly(vertices: &[&[i64]], rays: &[&[i64]]) -> Polyhedron {
    let n = vertices.first().or(rays.first()).map_or(0, |v| v.len());
    Polyhedron::new(n, vertices.iter().map(|v| rat_vec(v)).collect(), rays.iter().map(|r| rat_vec(r)).collect())
        .expect("bundled polyhedron")
}

fn build(rank: usize, polys: Vec<Polyhedron>, r: &[&[i64]]) -> PolyComplex {
    let r: Vec<Vec<BigInt>> = r.iter().map(|v| int_vec(v)).collect();
    PolyComplex::from_maximal(rank, polys.into_iter().map(|p| (p, Some(1))).collect(), r).expect("bundled complex")
}

/// The tropical line in the plane: rays `e1`, `e2`, `-e1-e2` from the origin, no compactification.
pub fn tropical_line() -> PolyComplex {
    let o: &[i64] = &[0, 0];
    build(2, vec![poly(&[o], &[&[1, 0]]), poly(&[o], &[&[0, 1]]), poly(&[o], &[&[-1, -1]])], &[])
}

/// Index of the vertex `(2, 0)` in [`compactified_plane`].
pub fn compactified_plane_vertex(c: &PolyComplex) -> usize {
    c.index_of(&Polyhedron::point(rat_vec(&[2, 0]))).expect("vertex present")
}

/// A complete complex in the plane with vertices `(-2,0)`, `(2,0)` and four unbounded
/// 2-cells, compactified along `e1`.
pub fn compactified_plane() -> PolyComplex {
    let w: &[i64] = &[-2, 0];
    let v: &[i64] = &[2, 0];
    build(
        2,
        vec![
            poly(&[w, v], &[&[0, 1]]),
            poly(&[v], &[&[0, 1], &[1, -1]]),
            poly(&[w], &[&[0, 1], &[-1, -1]]),
            poly(&[w, v], &[&[1, -1], &[-1, -1]]),
        ],
        &[&[1, 0]],
    )
}

/// Vertices of the cycle of [`elliptic_curve`], in cyclic order.
pub const ELLIPTIC_CYCLE: [[i64; 2]; 5] = [[-1, 1], [1, 1], [1, -1], [0, -1], [-1, 0]];

/// A plane tropical curve of genus one: a pentagon with one ray at each vertex,
/// compactified along all ray directions.
pub fn elliptic_curve() -> PolyComplex {
    let dirs: [[i64; 2]; 5] = [[-1, 1], [1, 1], [1, -1], [0, -1], [-1, 0]];
    let mut polys = Vec::new();
    for i in 0..5 {
        let a: &[i64] = &ELLIPTIC_CYCLE[i];
        let b: &[i64] = &ELLIPTIC_CYCLE[(i + 1) % 5];
        polys.push(poly(&[a, b], &[]));
        polys.push(poly(&[a], &[&dirs[i]]));
    }
    let r: Vec<&[i64]> = dirs.iter().map(|d| d.as_slice()).collect();
    build(2, polys, &r)
}

/// Index of the cycle vertex `ELLIPTIC_CYCLE[i]` in [`elliptic_curve`].
pub fn elliptic_vertex(c: &PolyComplex, i: usize) -> usize {
    c.index_of(&Polyhedron::point(rat_vec(&ELLIPTIC_CYCLE[i]))).expect("vertex present")
}

/// Two triangles glued along an edge, each with vertex set a lattice simplex.
pub fn two_triangles() -> PolyComplex {
    build(
        2,
        vec![poly(&[&[0, 0], &[1, 0], &[0, 1]], &[]), poly(&[&[1, 0], &[0, 1], &[1, 1]], &[])],
        &[],
    )
}

/// The complete fan in `R^n` with rays `e_1, …, e_n, -(e_1 + … + e_n)`.
pub fn complete_simplex_fan(n: usize) -> PolyComplex {
    let mut rays: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    rays.push(vec![-1; n]);
    let origin = vec![0i64; n];
    let cones = (0..=n)
        .map(|skip| {
            let gens: Vec<&[i64]> = (0..=n).filter(|&k| k != skip).map(|k| rays[k].as_slice()).collect();
            poly(&[&origin], &gens)
        })
        .collect();
    build(n, cones, &[])
}

pub fn bergman_uniform(r: usize, n: usize) -> PolyComplex {
    bergman_fan(&Matroid::uniform(r, n).expect("uniform matroid")).expect("bergman fan")
}

/// Vector matroid of the columns of an integer matrix.
pub fn vector_matroid(rows: &[&[i64]]) -> Matroid {
    let m = RatMatrix::from_i64(rows);
    let n = m.cols();
    let r = m.rank();
    let mut bases = Vec::new();
    for s in crate::linalg::subsets(n, r) {
        if m.select_columns(&s).rank() == r {
            bases.push(s);
        }
    }
    Matroid::from_bases(n, &bases).expect("vector matroid")
}

/// Loopless matroids on at most six elements used by the balancing checks.
pub fn matroid_corpus() -> Vec<(String, Matroid)> {
    let mut out = Vec::new();
    for n in 1..=6 {
        for r in 1..=n.min(4) {
            out.push((format!("U({r},{n})"), Matroid::uniform(r, n).expect("uniform")));
        }
    }
    // Graphic matroid of K4.
    out.push((
        "M(K4)".into(),
        vector_matroid(&[&[1, 1, 1, 0, 0, 0], &[-1, 0, 0, 1, 1, 0], &[0, -1, 0, -1, 0, 1]]),
    ));
    // Rank 2 with a parallel pair.
    out.push(("U(2,3) with a parallel pair".into(), vector_matroid(&[&[1, 1, 0, 1], &[0, 0, 1, 1]])));
    // U(1,2) ⊕ U(1,2).
    out.push(("U(1,2)+U(1,2)".into(), vector_matroid(&[&[1, 1, 0, 0], &[0, 0, 1, 1]])));
    // Rank 3 on 5 elements with a three-point line.
    out.push((
        "three-point line plus two".into(),
        vector_matroid(&[&[1, 0, 1, 0, 0], &[0, 1, 1, 0, 1], &[0, 0, 0, 1, 1]]),
    ));
    // Rank 3 on 6 elements: two three-point lines meeting in a point.
    out.push((
        "two lines".into(),
        vector_matroid(&[&[1, 0, 1, 0, 1, 1], &[0, 1, 1, 0, 0, 1], &[0, 0, 0, 1, 1, 2]]),
    ));
    out
}

/// Names of the complexes emitted by the command line `examples` command.
pub fn named_complexes() -> Vec<(&'static str, PolyComplex)> {
    vec![
        ("line", tropical_line()),
        ("plane", compactified_plane()),
        ("elliptic", elliptic_curve()),
        ("u23-bergman", bergman_uniform(2, 3)),
        ("u24-bergman", bergman_uniform(2, 4)),
        ("u34-bergman", bergman_uniform(3, 4)),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_builds() {
        assert_eq!(tropical_line().len(), 4);
        let f = compactified_plane();
        // 2 vertices, 1 segment, 4 rays, 4 regions.
        assert_eq!(f.len(), 11);
        assert!(f.is_complete());
        let e = elliptic_curve();
        assert_eq!(e.len(), 5 + 10);
        assert_eq!(two_triangles().len(), 4 + 5 + 2);
        for (name, m) in matroid_corpus() {
            assert!(m.rank() >= 1, "{name}");
        }
    }
}
