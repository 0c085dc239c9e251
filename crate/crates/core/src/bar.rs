//! Degree-zero bar words on tropical 1-forms: the kernel `H⁰(B)`, shuffles and deconcatenation.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::forms::{FormAlgebra, WedgeTable};
use crate::linalg::{kernel, Rat, RatMatrix, Subspace};

/// Largest word space `m^s` materialized by [`BarSetup`].
pub const WORD_LIMIT: usize = 1 << 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BarError {
    #[error("length {length} needs {words} words, above the limit {limit}")]
    LengthCapExceeded { length: usize, words: usize, limit: usize },
    #[error("letter {0} is out of range")]
    LetterOutOfRange(usize),
}

/// `Ω¹` with its wedge table and a length cap.
#[derive(Clone, Debug)]
pub struct BarSetup {
    wedge: WedgeTable,
    max_length: usize,
}

/// Dimensions and bases of `H⁰(B)` by word length.
#[derive(Clone, Debug, Serialize)]
pub struct H0Report {
    pub lengths: Vec<usize>,
    pub dims: Vec<usize>,
    #[serde(skip)]
    pub kernels: Vec<Subspace>,
    pub free_rank_if_free: Option<usize>,
}

impl BarSetup {
    pub fn new(wedge: WedgeTable, max_length: usize) -> Result<Self, BarError> {
        let m = wedge.one_forms_dim();
        let words = checked_pow(m, max_length);
        if words > WORD_LIMIT {
            return Err(BarError::LengthCapExceeded { length: max_length, words, limit: WORD_LIMIT });
        }
        Ok(BarSetup { wedge, max_length })
    }

    pub fn with_default_length(wedge: WedgeTable) -> Result<Self, BarError> {
        Self::new(wedge, 4)
    }

    pub fn m(&self) -> usize {
        self.wedge.one_forms_dim()
    }

    pub fn max_length(&self) -> usize {
        self.max_length
    }

    pub fn wedge(&self) -> &WedgeTable {
        &self.wedge
    }

    pub fn word_count(&self, s: usize) -> usize {
        self.m().pow(s as u32)
    }

    /// The map `(Ω¹)^{⊗s} → ⊕_i (Ω¹)^{⊗(i-1)} ⊗ Ω² ⊗ (Ω¹)^{⊗(s-i-1)}`, one row per word.
    pub fn wedge_constraints(&self, s: usize) -> RatMatrix {
        let m = self.m();
        let d2 = self.wedge.two_forms_dim();
        if s < 2 {
            return RatMatrix::zeros(self.word_count(s), 0);
        }
        let block = m.pow((s - 2) as u32) * d2;
        let cols = (s - 1) * block;
        let mut rows = Vec::with_capacity(self.word_count(s));
        for w in 0..self.word_count(s) {
            let letters = decode(w, m, s);
            let mut row = vec![Rat::zero(); cols];
            for i in 0..s - 1 {
                let rest: Vec<usize> =
                    letters[..i].iter().chain(letters[i + 2..].iter()).copied().collect();
                let outer = encode(&rest, m);
                let prod = self.wedge.wedge(letters[i], letters[i + 1]);
                // Position: summand i, then outer word index, then Ω² coordinate.
                let base = i * block + outer * d2;
                for (c, x) in prod.iter().enumerate() {
                    row[base + c] += x;
                }
            }
            rows.push(row);
        }
        RatMatrix::from_rows(cols, rows)
    }

    /// `H⁰(B)` at length `s` as a subspace of `Q^{m^s}`.
    pub fn h0(&self, s: usize) -> Result<Subspace, BarError> {
        let words = checked_pow(self.m(), s);
        if words > WORD_LIMIT {
            return Err(BarError::LengthCapExceeded { length: s, words, limit: WORD_LIMIT });
        }
        let c = self.wedge_constraints(s);
        if c.cols() == 0 {
            return Ok(Subspace::full(words));
        }
        Ok(kernel(&c.transpose()))
    }

    pub fn h0_dims(&self) -> Result<H0Report, BarError> {
        let kernels: Vec<Subspace> = (0..=self.max_length).map(|s| self.h0(s)).collect::<Result<_, _>>()?;
        let dims: Vec<usize> = kernels.iter().map(|k| k.dim()).collect();
        let m = self.m();
        let free = dims.iter().enumerate().all(|(s, &d)| d == m.pow(s as u32));
        Ok(H0Report {
            lengths: (0..=self.max_length).collect(),
            dims,
            kernels,
            free_rank_if_free: free.then_some(m),
        })
    }

    pub fn in_h0(&self, e: &BarElement) -> Result<bool, BarError> {
        let mut ok = true;
        for s in e.lengths() {
            let k = self.h0(s)?;
            ok &= k.contains(&e.homogeneous_vector(s, self.m())?);
        }
        Ok(ok)
    }
}

fn checked_pow(m: usize, s: usize) -> usize {
    (0..s).try_fold(1usize, |acc, _| acc.checked_mul(m)).unwrap_or(usize::MAX)
}

/// Letters of word number `w` of length `s` over an alphabet of size `m`.
pub fn decode(mut w: usize, m: usize, s: usize) -> Vec<usize> {
    let mut out = vec![0; s];
    for i in (0..s).rev() {
        out[i] = w % m;
        w /= m;
    }
    out
}

pub fn encode(letters: &[usize], m: usize) -> usize {
    letters.iter().fold(0, |acc, &l| acc * m + l)
}

/// A finite combination of degree-zero bar words `[η_{i₁}|…|η_{i_s}]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BarElement {
    terms: BTreeMap<Vec<usize>, Rat>,
}

impl BarElement {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The empty word `[]`.
    pub fn unit() -> Self {
        Self::word(&[])
    }

    pub fn word(letters: &[usize]) -> Self {
        let mut e = Self::zero();
        e.add_term(letters.to_vec(), Rat::one());
        e
    }

    pub fn add_term(&mut self, word: Vec<usize>, c: Rat) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(word.clone()).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&word);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Vec<usize>, Rat> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &BarElement) -> BarElement {
        let mut out = self.clone();
        for (w, c) in &other.terms {
            out.add_term(w.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> BarElement {
        let mut out = Self::zero();
        for (w, x) in &self.terms {
            out.add_term(w.clone(), x * c);
        }
        out
    }

    pub fn lengths(&self) -> Vec<usize> {
        let mut l: Vec<usize> = self.terms.keys().map(|w| w.len()).collect();
        l.sort_unstable();
        l.dedup();
        l
    }

    /// Coefficients of the length-`s` part in the lexicographic word basis.
    pub fn homogeneous_vector(&self, s: usize, m: usize) -> Result<Vec<Rat>, BarError> {
        let mut v = vec![Rat::zero(); m.pow(s as u32)];
        for (w, c) in self.terms.iter().filter(|(w, _)| w.len() == s) {
            if let Some(&bad) = w.iter().find(|&&l| l >= m) {
                return Err(BarError::LetterOutOfRange(bad));
            }
            v[encode(w, m)] = c.clone();
        }
        Ok(v)
    }

    pub fn from_vector(v: &[Rat], m: usize, s: usize) -> BarElement {
        let mut e = Self::zero();
        for (i, c) in v.iter().enumerate() {
            e.add_term(decode(i, m, s), c.clone());
        }
        e
    }
}

fn shuffle_words(a: &[usize], b: &[usize], prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if a.is_empty() || b.is_empty() {
        let mut w = prefix.clone();
        w.extend_from_slice(a);
        w.extend_from_slice(b);
        out.push(w);
        return;
    }
    prefix.push(a[0]);
    shuffle_words(&a[1..], b, prefix, out);
    prefix.pop();
    prefix.push(b[0]);
    shuffle_words(a, &b[1..], prefix, out);
    prefix.pop();
}

/// Shuffle product; all letters have degree one, so every shuffle enters with sign `+1`.
pub fn shuffle(x: &BarElement, y: &BarElement) -> BarElement {
    let mut out = BarElement::zero();
    for (a, ca) in &x.terms {
        for (b, cb) in &y.terms {
            let mut words = Vec::new();
            shuffle_words(a, b, &mut Vec::new(), &mut words);
            let c = ca * cb;
            for w in words {
                out.add_term(w, c.clone());
            }
        }
    }
    out
}

/// An element of `B ⊗ B`, as coefficients on pairs of words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BarTensor {
    terms: BTreeMap<(Vec<usize>, Vec<usize>), Rat>,
}

impl BarTensor {
    pub fn add_term(&mut self, left: Vec<usize>, right: Vec<usize>, c: Rat) {
        if c.is_zero() {
            return;
        }
        let key = (left, right);
        let entry = self.terms.entry(key.clone()).or_insert_with(Rat::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> &BTreeMap<(Vec<usize>, Vec<usize>), Rat> {
        &self.terms
    }

    /// The part in (length `i`) ⊗ (length `j`) as an `m^i × m^j` matrix.
    pub fn block(&self, i: usize, j: usize, m: usize) -> RatMatrix {
        let mut out = RatMatrix::zeros(m.pow(i as u32), m.pow(j as u32));
        for ((l, r), c) in &self.terms {
            if l.len() == i && r.len() == j {
                out.set(encode(l, m), encode(r, m), c.clone());
            }
        }
        out
    }

    /// Apply a bilinear map factorwise on pairs of tensors: `(a⊗b)·(c⊗d) = f(a,c) ⊗ g(b,d)`.
    pub fn shuffle_product(&self, other: &BarTensor) -> BarTensor {
        let mut out = BarTensor::default();
        for ((a, b), x) in &self.terms {
            for ((c, d), y) in &other.terms {
                let left = shuffle(&BarElement::word(a), &BarElement::word(c));
                let right = shuffle(&BarElement::word(b), &BarElement::word(d));
                let k = x * y;
                for (l, cl) in &left.terms {
                    for (r, cr) in &right.terms {
                        out.add_term(l.clone(), r.clone(), &k * cl * cr);
                    }
                }
            }
        }
        out
    }
}

/// Deconcatenation `[a₁|…|a_s] ↦ Σ_i [a₁|…|a_i] ⊗ [a_{i+1}|…|a_s]`.
pub fn coproduct(x: &BarElement) -> BarTensor {
    let mut out = BarTensor::default();
    for (w, c) in &x.terms {
        for i in 0..=w.len() {
            out.add_term(w[..i].to_vec(), w[i..].to_vec(), c.clone());
        }
    }
    out
}

/// `(Δ ⊗ id)∘Δ` and `(id ⊗ Δ)∘Δ` as coefficients on word triples.
pub fn coassociativity_sides(x: &BarElement) -> (BTreeMap<[Vec<usize>; 3], Rat>, BTreeMap<[Vec<usize>; 3], Rat>) {
    let mut left: BTreeMap<[Vec<usize>; 3], Rat> = BTreeMap::new();
    let mut right: BTreeMap<[Vec<usize>; 3], Rat> = BTreeMap::new();
    for ((a, b), c) in coproduct(x).terms() {
        for ((a1, a2), c2) in coproduct(&BarElement::word(a)).terms() {
            *left.entry([a1.clone(), a2.clone(), b.clone()]).or_insert_with(Rat::zero) += c * c2;
        }
        for ((b1, b2), c2) in coproduct(&BarElement::word(b)).terms() {
            *right.entry([a.clone(), b1.clone(), b2.clone()]).or_insert_with(Rat::zero) += c * c2;
        }
    }
    left.retain(|_, v| !v.is_zero());
    right.retain(|_, v| !v.is_zero());
    (left, right)
}

/// Whether a tensor in `V_i ⊗ V_j` (given as a matrix) lies in `K_i ⊗ K_j`.
pub fn in_tensor_of(block: &RatMatrix, left: &Subspace, right: &Subspace) -> bool {
    let la = left.annihilator();
    let ra = right.annihilator();
    la.basis_vecs().iter().all(|a| block.left_mul_vec(a).iter().all(|x| x.is_zero()))
        && ra.basis_vecs().iter().all(|b| block.mul_vec(b).iter().all(|x| x.is_zero()))
}

/// Sign conventions for the bar differential on words of mixed degree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BarSign {
    /// `Σ (-1)^{i+1} [Jη₁|…|Jη_{i-1}|Jη_i∧η_{i+1}|…]` with `Jη = (-1)^{deg η} η`.
    Involution,
    /// `Σ (-1)^{ε_i} [η₁|…|η_i∧η_{i+1}|…]` with `ε_i = Σ_{j≤i} (deg η_j − 1)`.
    Suspension,
}

/// The bar complex of a graded form algebra with zero differential, on words of bounded length.
#[derive(Clone, Debug)]
pub struct GradedBar {
    dims: Vec<usize>,
    // mult[p][q][x][y]: coordinates of the product of basis elements x ∈ Ω^p, y ∈ Ω^q.
    mult: Vec<Vec<Vec<Vec<Vec<Rat>>>>>,
    sign: BarSign,
}

impl GradedBar {
    pub fn from_algebra(alg: &FormAlgebra, sign: BarSign) -> Self {
        let top = alg.top_degree();
        let dims: Vec<usize> = alg.dims();
        let mut mult = vec![vec![Vec::new(); top + 1]; top + 1];
        for p in 1..top {
            for q in 1..=top - p {
                let mut t = vec![vec![Vec::new(); dims[q]]; dims[p]];
                for x in 0..dims[p] {
                    for y in 0..dims[q] {
                        t[x][y] = alg.multiply(p, &crate::linalg::unit_vec(dims[p], x), q, &crate::linalg::unit_vec(dims[q], y));
                    }
                }
                mult[p][q] = t;
            }
        }
        GradedBar { dims, mult, sign }
    }

    pub fn top_degree(&self) -> usize {
        self.dims.len() - 1
    }

    /// Degree patterns of words of length `s` in bar degree `t`.
    pub fn patterns(&self, s: usize, t: usize) -> Vec<Vec<usize>> {
        let top = self.top_degree();
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(s: usize, t: usize, top: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == s {
                if t == 0 {
                    out.push(cur.clone());
                }
                return;
            }
            for d in 1..=top {
                if d - 1 <= t {
                    cur.push(d);
                    rec(s, t - (d - 1), top, cur, out);
                    cur.pop();
                }
            }
        }
        rec(s, t, top, &mut cur, &mut out);
        out
    }

    fn layout(&self, s: usize, t: usize) -> (Vec<Vec<usize>>, Vec<usize>) {
        let pats = self.patterns(s, t);
        let mut offsets = vec![0];
        for p in &pats {
            let n: usize = p.iter().map(|&d| self.dims[d]).product();
            offsets.push(offsets.last().unwrap() + n);
        }
        (pats, offsets)
    }

    fn sign(&self, degs: &[usize], i: usize) -> bool {
        // true means negative; `i` is 0-based position of the left factor.
        match self.sign {
            BarSign::Involution => {
                let mut neg = i % 2 == 1;
                for d in &degs[..=i] {
                    neg ^= d % 2 == 1;
                }
                neg
            }
            BarSign::Suspension => degs[..=i].iter().map(|d| d - 1).sum::<usize>() % 2 == 1,
        }
    }

    /// Matrix of `d: B^t_s → B^{t+1}_{s-1}`, one row per source basis word.
    pub fn differential(&self, s: usize, t: usize) -> RatMatrix {
        let (src, _) = self.layout(s, t);
        let (dst, dst_off) = if s == 0 { (vec![], vec![0]) } else { self.layout(s - 1, t + 1) };
        let cols = *dst_off.last().unwrap();
        let index: BTreeMap<&Vec<usize>, usize> = dst.iter().enumerate().map(|(k, p)| (p, k)).collect();
        let mut rows = Vec::new();
        for pat in &src {
            let sizes: Vec<usize> = pat.iter().map(|&d| self.dims[d]).collect();
            let count: usize = sizes.iter().product();
            for flat in 0..count {
                let letters = decode_mixed(flat, &sizes);
                let mut row = vec![Rat::zero(); cols];
                for i in 0..s.saturating_sub(1) {
                    let (p, q) = (pat[i], pat[i + 1]);
                    if p + q > self.top_degree() {
                        continue;
                    }
                    let mut np = pat.clone();
                    np.splice(i..i + 2, [p + q]);
                    let k = index[&np];
                    let nsizes: Vec<usize> = np.iter().map(|&d| self.dims[d]).collect();
                    let neg = self.sign(pat, i);
                    for (z, c) in self.mult[p][q][letters[i]][letters[i + 1]].iter().enumerate() {
                        if c.is_zero() {
                            continue;
                        }
                        let mut nl = letters.clone();
                        nl.splice(i..i + 2, [z]);
                        let pos = dst_off[k] + encode_mixed(&nl, &nsizes);
                        if neg {
                            row[pos] -= c;
                        } else {
                            row[pos] += c;
                        }
                    }
                }
                rows.push(row);
            }
        }
        RatMatrix::from_rows(cols, rows)
    }
}

fn decode_mixed(mut w: usize, sizes: &[usize]) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for i in (0..sizes.len()).rev() {
        out[i] = w % sizes[i];
        w /= sizes[i];
    }
    out
}

fn encode_mixed(letters: &[usize], sizes: &[usize]) -> usize {
    letters.iter().zip(sizes).fold(0, |acc, (&l, &n)| acc * n + l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::forms::FormSheaf;
    use crate::linalg::rat;

    fn el(terms: &[(&[usize], i64)]) -> BarElement {
        let mut e = BarElement::zero();
        for (w, c) in terms {
            e.add_term(w.to_vec(), rat(*c));
        }
        e
    }

    #[test]
    fn line_is_free() {
        let setup = BarSetup::with_default_length(WedgeTable::free(2)).unwrap();
        let r = setup.h0_dims().unwrap();
        assert_eq!(r.dims, vec![1, 2, 4, 8, 16]);
        assert_eq!(r.free_rank_if_free, Some(2));
    }

    #[test]
    fn low_lengths_unconstrained() {
        let setup = BarSetup::new(WedgeTable::exterior(3), 3).unwrap();
        let r = setup.h0_dims().unwrap();
        assert_eq!(&r.dims[..2], &[1, 3]);
        // Symmetric tensors in two letters.
        assert_eq!(r.dims[2], 6);
        assert_eq!(r.free_rank_if_free, None);
    }

    #[test]
    fn u34_length_two_is_nullity_of_wedge() {
        let c = corpus::bergman_uniform(3, 4);
        let sheaf = FormSheaf::for_complex(&c);
        let t = sheaf.wedge_table(&sheaf.whole());
        let nullity = 9 - t.matrix().rank();
        let setup = BarSetup::new(t, 2).unwrap();
        assert_eq!(setup.h0(2).unwrap().dim(), nullity);
        assert_eq!(nullity, 6);
    }

    #[test]
    fn cap_is_enforced() {
        assert!(matches!(BarSetup::new(WedgeTable::free(3), 40), Err(BarError::LengthCapExceeded { .. })));
    }

    #[test]
    fn shuffle_examples() {
        let x = el(&[(&[0], 1)]);
        let y = el(&[(&[1], 1)]);
        assert_eq!(shuffle(&BarElement::unit(), &x), x);
        assert_eq!(shuffle(&x, &y), el(&[(&[0, 1], 1), (&[1, 0], 1)]));
        let xy = el(&[(&[0, 1], 1)]);
        let z = el(&[(&[2], 1)]);
        assert_eq!(shuffle(&xy, &z), el(&[(&[0, 1, 2], 1), (&[0, 2, 1], 1), (&[2, 0, 1], 1)]));
    }

    #[test]
    fn coproduct_examples() {
        assert_eq!(coproduct(&BarElement::unit()).terms().len(), 1);
        let c = coproduct(&el(&[(&[0, 1], 1)]));
        let keys: Vec<_> = c.terms().keys().cloned().collect();
        assert_eq!(keys.len(), 3);
        assert!(keys.contains(&(vec![], vec![0, 1])));
        assert!(keys.contains(&(vec![0], vec![1])));
        assert!(keys.contains(&(vec![0, 1], vec![])));
    }

    #[test]
    fn differential_squares_to_zero() {
        for c in [corpus::bergman_uniform(3, 4), corpus::tropical_line(), corpus::compactified_plane(), corpus::complete_simplex_fan(3)] {
            let sheaf = FormSheaf::for_complex(&c);
            let alg = sheaf.algebra(&sheaf.whole(), 3);
            for sign in [BarSign::Involution, BarSign::Suspension] {
                let bar = GradedBar::from_algebra(&alg, sign);
                for s in 2..=4 {
                    let d0 = bar.differential(s, 0);
                    let d1 = bar.differential(s - 1, 1);
                    assert!((&d0 * &d1).is_zero(), "{sign:?} length {s}");
                }
            }
        }
    }

    #[test]
    fn degree_zero_kernel_matches_graded_differential() {
        let c = corpus::bergman_uniform(3, 4);
        let sheaf = FormSheaf::for_complex(&c);
        let alg = sheaf.algebra(&sheaf.whole(), 3);
        let bar = GradedBar::from_algebra(&alg, BarSign::Involution);
        let setup = BarSetup::new(alg.wedge_table(), 3).unwrap();
        for s in 0..=3 {
            let d = bar.differential(s, 0);
            let k = if d.cols() == 0 { Subspace::full(d.rows()) } else { kernel(&d.transpose()) };
            assert_eq!(k, setup.h0(s).unwrap());
        }
    }
}
