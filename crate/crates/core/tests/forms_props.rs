mod common;

use rand::Rng;
use tropun::corpus;
use tropun::forms::{refined_star, FormSheaf};
use tropun::linalg::{add_vec, scale_vec, Rat};
use tropun::polyhedra::{PolyComplex, Polyhedron};

fn complexes() -> Vec<(&'static str, PolyComplex)> {
    let mut v = corpus::named_complexes();
    v.push(("two triangles", corpus::two_triangles()));
    v.push(("simplex fan", corpus::complete_simplex_fan(2)));
    v
}

fn random_relint_point(rng: &mut rand_chacha::ChaCha8Rng, p: &Polyhedron) -> Vec<Rat> {
    let weights: Vec<Rat> = p.vertices().iter().map(|_| Rat::from_integer(rng.gen_range(1..=4).into())).collect();
    let total: Rat = weights.iter().sum();
    let mut x = vec![Rat::from_integer(0.into()); p.rank()];
    for (v, w) in p.vertices().iter().zip(&weights) {
        x = add_vec(&x, &scale_vec(v, &(w / &total)));
    }
    for r in p.rays_rat() {
        x = add_vec(&x, &scale_vec(&r, &Rat::from_integer(rng.gen_range(1..=3).into())));
    }
    x
}

#[test]
fn refinement_preserves_forms_on_stars() {
    let mut rng = common::rng(7);
    for (name, c) in complexes() {
        let coarse = FormSheaf::for_complex(&c);
        for trial in 0..6 {
            let positive: Vec<usize> = (0..c.len()).filter(|&i| c.face(i).dim() > 0).collect();
            let p = positive[rng.gen_range(0..positive.len())];
            let x = random_relint_point(&mut rng, c.face(p));
            let fine = c.stellar_subdivide(p, &x).unwrap();
            assert!(c.is_refined_by(&fine));
            let fs = FormSheaf::for_complex(&fine);
            for f in 0..c.len() {
                let u = refined_star(&c, &fine, f).unwrap();
                for i in 0..=3 {
                    let a = coarse.star_forms(f, i).unwrap().dim();
                    let b = fs.forms(&u, i).dim();
                    assert_eq!(a, b, "{name} trial {trial}: face {f}, degree {i}");
                }
            }
        }
    }
}

#[test]
fn restriction_is_functorial_on_star_chains() {
    for (name, c) in complexes() {
        let sheaf = FormSheaf::for_complex(&c);
        for f in 0..c.len() {
            for &g in c.cofaces(f) {
                for &h in c.cofaces(g) {
                    let (u1, u2, u3) = (sheaf.star(f).unwrap(), sheaf.star(g).unwrap(), sheaf.star(h).unwrap());
                    for p in 0..=2 {
                        let r12 = sheaf.restrict(&u1, &u2, p).unwrap();
                        let r23 = sheaf.restrict(&u2, &u3, p).unwrap();
                        let r13 = sheaf.restrict(&u1, &u3, p).unwrap();
                        assert_eq!(&r12 * &r23, r13, "{name}: {f} {g} {h} degree {p}");
                    }
                }
            }
        }
    }
}

#[test]
fn whole_restricts_onto_stars_compatibly() {
    for (name, c) in complexes() {
        let sheaf = FormSheaf::for_complex(&c);
        let whole = c.whole();
        for f in 0..c.len() {
            let u = sheaf.star(f).unwrap();
            for &g in c.cofaces(f) {
                let w = sheaf.star(g).unwrap();
                let direct = sheaf.restrict(&whole, &w, 1).unwrap();
                let via = &sheaf.restrict(&whole, &u, 1).unwrap() * &sheaf.restrict(&u, &w, 1).unwrap();
                assert_eq!(direct, via, "{name}");
            }
        }
    }
}

#[test]
fn wedge_respects_representative_changes() {
    let mut rng = common::rng(11);
    let c = corpus::bergman_uniform(3, 4);
    let sheaf = FormSheaf::for_complex(&c);
    let origin = c.faces_of_dim(0)[0];
    let one = sheaf.star_forms(origin, 1).unwrap();
    let q = one.presentation().unwrap().clone();
    let reps = one.representatives().unwrap();
    let killed = q.killed().basis_vecs();
    for _ in 0..20 {
        let i = rng.gen_range(0..reps.len());
        let j = rng.gen_range(0..reps.len());
        let mut a = reps[i].clone();
        for k in &killed {
            a = add_vec(&a, &scale_vec(k, &common::small(&mut rng, 3)));
        }
        assert_eq!(q.coords(&a).unwrap(), q.coords(&reps[i]).unwrap());
        let x = q.coords(&a).unwrap();
        let y = q.coords(&reps[j]).unwrap();
        let w1 = sheaf.wedge(&one, &x, &one, &y).unwrap();
        let w2 = sheaf.wedge(&one, &q.coords(&reps[i]).unwrap(), &one, &y).unwrap();
        assert_eq!(w1, w2);
    }
}
