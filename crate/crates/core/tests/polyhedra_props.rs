use std::collections::BTreeSet;

use proptest::prelude::*;
use tropun::corpus;
use tropun::linalg::{rat, rat_vec, unit_vec, Rat};
use tropun::polyhedra::{PolyComplex, Polyhedron};

fn complexes() -> Vec<(&'static str, PolyComplex)> {
    let mut v = corpus::named_complexes();
    v.push(("two triangles", corpus::two_triangles()));
    v.push(("simplex fan", corpus::complete_simplex_fan(3)));
    v
}

#[test]
fn faces_meet_in_faces() {
    for (name, c) in complexes() {
        for i in 0..c.len() {
            for j in i..c.len() {
                if let Some(p) = c.face(i).intersection(c.face(j)) {
                    let k = c.index_of(&p).unwrap_or_else(|| panic!("{name}: {i} ∩ {j}"));
                    assert!(c.faces_of(i).contains(&k) && c.faces_of(j).contains(&k), "{name}");
                }
            }
        }
    }
}

fn lift(v: &[Rat], t: i64) -> Vec<Rat> {
    let mut w = v.to_vec();
    w.push(rat(t));
    w
}

#[test]
fn cone_over_slices() {
    for (name, c) in complexes() {
        let co = c.cone_over().unwrap();
        let fan = co.fan.fan();
        let n = c.rank();
        let slab = Polyhedron::from_h(n + 1, &[(unit_vec(n + 1, n), rat(1))], &[]).unwrap();
        for f in 0..c.len() {
            let p = c.face(f);
            let cut = fan.face(co.tilde[f]).intersection(&slab).unwrap();
            let expected = Polyhedron::new(
                n + 1,
                p.vertices().iter().map(|v| lift(v, 1)).collect(),
                p.rays_rat().iter().map(|r| lift(r, 0)).collect(),
            )
            .unwrap();
            assert_eq!(cut, expected, "{name}: face {f}");
        }
        let rec = c.recession_fan().unwrap();
        let zero: BTreeSet<&Polyhedron> = co.zero.iter().map(|&z| fan.face(z)).collect();
        let lifted: Vec<Polyhedron> = rec
            .faces()
            .iter()
            .map(|q| Polyhedron::cone(n + 1, q.recession_generators().iter().map(|r| lift(r, 0)).collect()).unwrap())
            .collect();
        assert_eq!(zero, lifted.iter().collect(), "{name}");
    }
}

#[test]
fn star_quotient_at_the_apex_is_the_fan() {
    for (name, c) in complexes() {
        if !c.is_fan() {
            continue;
        }
        let origin = c.faces_of_dim(0)[0];
        let (q, proj) = c.star_quotient_linear(origin).unwrap();
        let m = proj.matrix_rat();
        let image: BTreeSet<Polyhedron> = c.faces().iter().map(|f| f.image(&m)).collect();
        let got: BTreeSet<Polyhedron> = q.faces().iter().cloned().collect();
        assert_eq!(image, got, "{name}");
    }
}

fn arb_polyhedron() -> impl Strategy<Value = Polyhedron> {
    (
        proptest::collection::vec(proptest::collection::vec(-3i64..=3, 3), 1..5),
        proptest::collection::vec(proptest::collection::vec(-2i64..=2, 3), 0..3),
    )
        .prop_filter_map("nonzero rays", |(vs, rs)| {
            let rays: Vec<Vec<Rat>> = rs.iter().filter(|r| r.iter().any(|&x| x != 0)).map(|r| rat_vec(r)).collect();
            Polyhedron::new(3, vs.iter().map(|v| rat_vec(v)).collect(), rays).ok()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn recession_of_a_face_is_a_face(p in arb_polyhedron()) {
        let rc = p.recession_cone();
        for f in p.faces() {
            prop_assert!(f.recession_cone().is_face_of(&rc));
        }
    }
}
