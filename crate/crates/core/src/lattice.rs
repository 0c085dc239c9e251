//! Integer lattices: Smith normal form, saturated quotient projections and
//! primitive vectors.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::linalg::{Rat, RatMatrix};

pub type IntMatrix = Vec<Vec<BigInt>>;

pub fn int_identity(n: usize) -> IntMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn int_vec(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

pub fn to_rat_vec(v: &[BigInt]) -> Vec<Rat> {
    v.iter().map(|x| Rat::from_integer(x.clone())).collect()
}

pub fn int_matrix_to_rat(m: &IntMatrix, cols: usize) -> RatMatrix {
    RatMatrix::from_rows(cols, m.iter().map(|r| to_rat_vec(r)).collect())
}

/// Returns the vector as integers if every entry is integral.
pub fn as_integer_vec(v: &[Rat]) -> Option<Vec<BigInt>> {
    v.iter().map(|x| x.is_integer().then(|| x.numer().clone())).collect()
}

/// Smallest positive integer multiple of `v` with coprime entries; the zero vector stays zero.
pub fn primitive_vector(v: &[Rat]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * Rat::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

pub fn is_primitive(v: &[BigInt]) -> bool {
    v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x)).is_one()
}

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal with `d_1 | d_2 | …`.
#[derive(Clone, Debug)]
pub struct Smith {
    pub u: IntMatrix,
    pub v: IntMatrix,
    /// Nonzero diagonal entries of `D`, all positive.
    pub diagonal: Vec<BigInt>,
    pub rows: usize,
    pub cols: usize,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.diagonal.len()
    }
}

fn swap_rows(m: &mut IntMatrix, a: usize, b: usize) {
    m.swap(a, b);
}

fn swap_cols(m: &mut IntMatrix, a: usize, b: usize) {
    for row in m.iter_mut() {
        row.swap(a, b);
    }
}

/// row_a -= q * row_b
fn row_axpy(m: &mut IntMatrix, a: usize, b: usize, q: &BigInt) {
    let rb = m[b].clone();
    for (x, y) in m[a].iter_mut().zip(rb) {
        *x -= q * y;
    }
}

/// col_a -= q * col_b
fn col_axpy(m: &mut IntMatrix, a: usize, b: usize, q: &BigInt) {
    for row in m.iter_mut() {
        let y = row[b].clone();
        row[a] -= q * y;
    }
}

pub fn smith_normal_form(a: &IntMatrix, rows: usize, cols: usize) -> Smith {
    let mut d: IntMatrix = a.clone();
    assert!(d.len() == rows && d.iter().all(|r| r.len() == cols));
    let mut u = int_identity(rows);
    let mut v = int_identity(cols);
    let mut diagonal = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Smallest nonzero entry in the trailing block becomes the pivot.
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !d[i][j].is_zero() && best.map_or(true, |(bi, bj)| d[i][j].abs() < d[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        swap_rows(&mut d, t, pi);
        swap_rows(&mut u, t, pi);
        swap_cols(&mut d, t, pj);
        swap_cols(&mut v, t, pj);
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if d[i][t].is_zero() {
                    continue;
                }
                let q = d[i][t].div_floor(&d[t][t]);
                row_axpy(&mut d, i, t, &q);
                row_axpy(&mut u, i, t, &q);
                if !d[i][t].is_zero() {
                    swap_rows(&mut d, t, i);
                    swap_rows(&mut u, t, i);
                    dirty = true;
                }
            }
            for j in t + 1..cols {
                if d[t][j].is_zero() {
                    continue;
                }
                let q = d[t][j].div_floor(&d[t][t]);
                col_axpy(&mut d, j, t, &q);
                col_axpy(&mut v, j, t, &q);
                if !d[t][j].is_zero() {
                    swap_cols(&mut d, t, j);
                    swap_cols(&mut v, t, j);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Enforce divisibility of the trailing block by the pivot.
            let mut fix = None;
            'outer: for i in t + 1..rows {
                for j in t + 1..cols {
                    if !(&d[i][j] % &d[t][t]).is_zero() {
                        fix = Some(i);
                        break 'outer;
                    }
                }
            }
            match fix {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_axpy(&mut d, t, i, &minus_one);
                    row_axpy(&mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
        if d[t][t].is_negative() {
            for x in d[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        diagonal.push(d[t][t].clone());
        t += 1;
    }
    Smith { u, v, diagonal, rows, cols }
}

/// A surjection `Z^n → Z^{n-k}` whose kernel is the saturation of a sublattice of rank `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeProjection {
    ambient: usize,
    sub_rank: usize,
    /// `(n-k) × n` integer matrix acting on column vectors.
    matrix: IntMatrix,
    /// `(n-k) × n`: row `i` is a lattice vector mapping to the `i`th basis vector.
    lift: IntMatrix,
}

impl LatticeProjection {
    pub fn identity(n: usize) -> Self {
        LatticeProjection { ambient: n, sub_rank: 0, matrix: int_identity(n), lift: int_identity(n) }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient
    }

    pub fn target_rank(&self) -> usize {
        self.ambient - self.sub_rank
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn matrix_rat(&self) -> RatMatrix {
        int_matrix_to_rat(&self.matrix, self.ambient)
    }

    pub fn apply(&self, x: &[Rat]) -> Vec<Rat> {
        self.matrix
            .iter()
            .map(|row| row.iter().zip(x).fold(Rat::zero(), |acc, (a, b)| acc + Rat::from_integer(a.clone()) * b))
            .collect()
    }

    pub fn lift(&self, y: &[Rat]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.ambient];
        for (c, row) in y.iter().zip(&self.lift) {
            for (o, a) in out.iter_mut().zip(row) {
                *o += c * Rat::from_integer(a.clone());
            }
        }
        out
    }
}

/// Saturated quotient `Z^n → Z^n / (span_Q(generators) ∩ Z^n)`, chosen via Smith normal form.
pub fn quotient_projection(n: usize, generators: &[Vec<Rat>]) -> LatticeProjection {
    let gens: IntMatrix = generators
        .iter()
        .map(|g| {
            assert_eq!(g.len(), n);
            primitive_vector(g)
        })
        .filter(|g| g.iter().any(|x| !x.is_zero()))
        .collect();
    if gens.is_empty() {
        return LatticeProjection::identity(n);
    }
    let s = smith_normal_form(&gens, gens.len(), n);
    let k = s.rank();
    // G V = U^{-1} D, so the last n-k columns of V are killed by every generator.
    let matrix: IntMatrix = (k..n).map(|j| (0..n).map(|i| s.v[i][j].clone()).collect()).collect();
    let v_rat = int_matrix_to_rat(&s.v, n);
    let v_inv = v_rat.inverse().expect("unimodular transform is invertible");
    let lift: IntMatrix = (k..n)
        .map(|i| (0..n).map(|j| v_inv.get(i, j).to_integer()).collect())
        .collect();
    LatticeProjection { ambient: n, sub_rank: k, matrix, lift }
}

/// True when the vectors extend to a basis of `Z^n` (independent with trivial invariant factors).
pub fn is_unimodular_set(n: usize, vectors: &[Vec<BigInt>]) -> bool {
    if vectors.is_empty() {
        return true;
    }
    let s = smith_normal_form(&vectors.to_vec(), vectors.len(), n);
    s.rank() == vectors.len() && s.diagonal.iter().all(One::is_one)
}

/// gcd of the maximal minors of a full-row-rank integer matrix (product of invariant factors).
pub fn maximal_minor_gcd(rows: &IntMatrix, cols: usize) -> Option<BigInt> {
    let s = smith_normal_form(rows, rows.len(), cols);
    (s.rank() == rows.len()).then(|| s.diagonal.iter().fold(BigInt::one(), |acc, d| acc * d))
}
