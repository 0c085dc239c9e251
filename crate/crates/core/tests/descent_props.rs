mod common;

use num_traits::Zero;
use rand::Rng;
use tropun::corpus;
use tropun::descent::{
    descent_hom, descent_hom_anchored, elliptic_build, elliptic_extract, is_unipotent_object, pull_back, validate_object,
    DescentObject, SkeletonGamma,
};
use tropun::linalg::{kernel, rat, Rat, RatMatrix, Subspace};

fn nilpotents() -> Vec<RatMatrix> {
    let mut out = Vec::new();
    for a in -1i64..=1 {
        for b in -1i64..=1 {
            for c in -1i64..=1 {
                if a * a + b * c == 0 {
                    out.push(RatMatrix::from_i64(&[&[a, b], &[c, -a]]));
                }
            }
        }
    }
    out
}

/// Relations `x S + y N = 0`: a complete invariant of commuting nilpotent 2×2 pairs up to conjugacy.
fn oracle(s: &RatMatrix, n: &RatMatrix) -> Subspace {
    let m = RatMatrix::from_fn(4, 2, |i, j| if j == 0 { s.entries()[i].clone() } else { n.entries()[i].clone() });
    kernel(&m)
}

fn has_invertible(basis: &[Vec<RatMatrix>]) -> bool {
    let k = basis.len();
    if k == 0 {
        return false;
    }
    // det is a polynomial of degree at most 2 in each coefficient, so a grid {0,1,2}^k detects it.
    let mut idx = vec![0usize; k];
    loop {
        let psi = (0..k).fold(RatMatrix::zeros(2, 2), |acc, i| &acc + &basis[i][0].scale(&rat(idx[i] as i64)));
        if !psi.determinant().is_zero() {
            return true;
        }
        let mut pos = 0;
        while pos < k && idx[pos] == 2 {
            idx[pos] = 0;
            pos += 1;
        }
        if pos == k {
            return false;
        }
        idx[pos] += 1;
    }
}

#[test]
fn elliptic_classification_rank_two() {
    let g = SkeletonGamma::build(&corpus::elliptic_curve()).unwrap();
    let id = RatMatrix::identity(2);
    let mut pairs = Vec::new();
    for s in nilpotents() {
        for n in nilpotents() {
            if &s * &n == &n * &s {
                pairs.push((s.clone(), n));
            }
        }
    }
    let objects: Vec<DescentObject> = pairs
        .iter()
        .map(|(s, n)| {
            let obj = elliptic_build(&g, s, &(&id + n)).unwrap();
            assert!(validate_object(&g, &obj).valid);
            assert!(is_unipotent_object(&g, &obj).unwrap().unipotent);
            let (s2, t2) = elliptic_extract(&g, &obj).unwrap();
            assert_eq!((&s2, &(&t2 - &id)), (s, n));
            obj
        })
        .collect();
    for i in 0..pairs.len() {
        for j in 0..pairs.len() {
            let iso = has_invertible(&descent_hom(&g, &objects[i], &objects[j]).unwrap().basis);
            let same = oracle(&pairs[i].0, &pairs[i].1) == oracle(&pairs[j].0, &pairs[j].1);
            assert_eq!(iso, same, "{:?} vs {:?}", pairs[i], pairs[j]);
        }
    }
}

#[test]
fn elliptic_classification_rank_one() {
    let g = SkeletonGamma::build(&corpus::elliptic_curve()).unwrap();
    let obj = elliptic_build(&g, &RatMatrix::zeros(1, 1), &RatMatrix::identity(1)).unwrap();
    let unit = DescentObject::unit(&g);
    let h = descent_hom(&g, &obj, &unit).unwrap();
    assert_eq!(h.dim, 1);
    assert!(!h.basis[0][0].determinant().is_zero());
}

fn random_pair(rng: &mut rand_chacha::ChaCha8Rng, r: usize) -> (RatMatrix, RatMatrix) {
    let n = common::strictly_upper(rng, r, 2);
    let p = common::random_invertible(rng, r);
    let s = (1..r).fold(RatMatrix::zeros(r, r), |acc, k| {
        let mut pw = n.clone();
        for _ in 1..k {
            pw = &pw * &n;
        }
        &acc + &pw.scale(&common::small(rng, 2))
    });
    let t = &RatMatrix::identity(r) + &(&n.scale(&common::small(rng, 2)) + &(&n * &n).scale(&common::small(rng, 1)));
    (common::conjugate(&p, &s), common::conjugate(&p, &t))
}

#[test]
fn anchors_and_refinements_agree() {
    let c = corpus::elliptic_curve();
    let g = SkeletonGamma::build(&c).unwrap();
    let mut rng = common::rng(5);
    let objs: Vec<DescentObject> = (0..8)
        .map(|k| {
            let r = 1 + k % 3;
            let (s, t) = random_pair(&mut rng, r);
            elliptic_build(&g, &s, &t).unwrap()
        })
        .collect();
    let e = rng.gen_range(0..g.edges().len());
    let edge = g.edges()[e].face;
    let vs = c.face(edge).vertices().to_vec();
    let mid: Vec<Rat> = vs[0].iter().zip(&vs[1]).map(|(a, b)| (a + b) / rat(2)).collect();
    let fine = c.stellar_subdivide(edge, &mid).unwrap();
    let gf = SkeletonGamma::build(&fine).unwrap();
    let pulled: Vec<DescentObject> = objs.iter().map(|o| pull_back(&g, &gf, o).unwrap()).collect();
    for (a, b) in objs.iter().zip(&pulled) {
        assert!(validate_object(&gf, b).valid);
        assert_eq!(elliptic_extract(&g, a).unwrap().1.rows(), b.rank);
    }
    for i in 0..objs.len() {
        for j in 0..objs.len() {
            let d = descent_hom(&g, &objs[i], &objs[j]).unwrap().dim;
            for v in 0..g.vertices().len() {
                assert_eq!(descent_hom_anchored(&g, &objs[i], &objs[j], v).unwrap().dim(), d);
            }
            assert_eq!(descent_hom(&gf, &pulled[i], &pulled[j]).unwrap().dim, d);
        }
    }
}

#[test]
fn fan_objects_are_connections() {
    let c = corpus::bergman_uniform(3, 4);
    let g = SkeletonGamma::build(&c).unwrap();
    let mut rng = common::rng(9);
    for _ in 0..10 {
        let a = common::commuting_unipotent(&mut rng, g.vertex_base(0).clone(), 2);
        let b = common::commuting_unipotent(&mut rng, g.vertex_base(0).clone(), 3);
        let oa = DescentObject { rank: 2, connections: vec![a.clone()], gluing: Default::default() };
        let ob = DescentObject { rank: 3, connections: vec![b.clone()], gluing: Default::default() };
        assert_eq!(descent_hom(&g, &oa, &ob).unwrap().space, tropun::connections::hom_space(&a, &b).unwrap());
        assert_eq!(
            is_unipotent_object(&g, &oa).unwrap().filtration.len(),
            a.is_unipotent().filtration.len()
        );
    }
}
