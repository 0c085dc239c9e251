//! Trivial bundles with a tropical connection `θ = Σ η_k ⊗ A_k` on a fan or an open star.

use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::bar::{BarError, BarSetup};
use crate::forms::WedgeTable;
use crate::linalg::{kernel, Rat, RatMatrix, Subspace};

#[derive(Debug, Error)]
pub enum ConnectionError {
    #[error("expected {expected}, found {found}")]
    DimMismatch { expected: String, found: String },
    #[error("the connection is not integrable")]
    NotIntegrable,
    #[error("connections live over different bases")]
    BaseMismatch,
    #[error("a word of length {0} does not vanish")]
    NotUnipotent(usize),
    #[error("the length {0} component is not in the bar kernel")]
    NotComodule(usize),
    #[error(transparent)]
    Bar(#[from] BarError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropConnection {
    base: Arc<WedgeTable>,
    rank: usize,
    theta: Vec<RatMatrix>,
}

/// Outcome of the integrability check; the witness is a nonzero coefficient of `θ∧θ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Integrability {
    pub integrable: bool,
    /// `(i, M)`: the coefficient of the `i`-th basis element of `Ω²` is `M ≠ 0`.
    pub witness: Option<(usize, RatMatrix)>,
}

/// `0 = F_0 ⊂ F_1 ⊂ …` with `A_k F_{i+1} ⊆ F_i`; it ends at the whole space iff unipotent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Unipotence {
    pub unipotent: bool,
    pub filtration: Vec<Subspace>,
}

impl TropConnection {
    pub fn new(base: Arc<WedgeTable>, theta: Vec<RatMatrix>) -> Result<Self, ConnectionError> {
        let m = base.one_forms_dim();
        if theta.len() != m {
            return Err(ConnectionError::DimMismatch {
                expected: format!("{m} matrices"),
                found: format!("{} matrices", theta.len()),
            });
        }
        let rank = theta.first().map_or(0, |a| a.rows());
        for a in &theta {
            if a.rows() != rank || a.cols() != rank {
                return Err(ConnectionError::DimMismatch {
                    expected: format!("{rank}x{rank}"),
                    found: format!("{}x{}", a.rows(), a.cols()),
                });
            }
        }
        Ok(TropConnection { base, rank, theta })
    }

    /// `θ = 0` on a bundle of the given rank.
    pub fn trivial(base: Arc<WedgeTable>, rank: usize) -> Self {
        let m = base.one_forms_dim();
        TropConnection { base, rank, theta: vec![RatMatrix::zeros(rank, rank); m] }
    }

    /// The unit object: rank one with `θ = 0`.
    pub fn unit(base: Arc<WedgeTable>) -> Self {
        Self::trivial(base, 1)
    }

    pub fn base(&self) -> &Arc<WedgeTable> {
        &self.base
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn theta(&self) -> &[RatMatrix] {
        &self.theta
    }

    /// Coefficients of `θ∧θ = Σ_{k<l} (η_k∧η_l) ⊗ [A_k, A_l]` on the basis of `Ω²`.
    pub fn curvature(&self) -> Vec<RatMatrix> {
        let d2 = self.base.two_forms_dim();
        let mut out = vec![RatMatrix::zeros(self.rank, self.rank); d2];
        let m = self.theta.len();
        for k in 0..m {
            for l in k + 1..m {
                let w = self.base.wedge(k, l);
                if w.iter().all(|x| x.is_zero()) {
                    continue;
                }
                let comm = self.theta[k].commutator(&self.theta[l]);
                for (c, x) in w.iter().enumerate() {
                    if !x.is_zero() {
                        out[c] = &out[c] + &comm.scale(x);
                    }
                }
            }
        }
        out
    }

    pub fn is_integrable(&self) -> Integrability {
        let witness = self.curvature().into_iter().enumerate().find(|(_, m)| !m.is_zero());
        Integrability { integrable: witness.is_none(), witness }
    }

    /// Sections `s` with `A_k s = 0` for all `k`.
    pub fn horizontal_sections(&self) -> Result<Subspace, ConnectionError> {
        if !self.is_integrable().integrable {
            return Err(ConnectionError::NotIntegrable);
        }
        Ok(joint_kernel(self.rank, &self.theta))
    }

    pub fn dual(&self) -> TropConnection {
        let theta = self.theta.iter().map(|a| -&a.transpose()).collect();
        TropConnection { base: self.base.clone(), rank: self.rank, theta }
    }

    /// `θ₁ ⊗ 1 + 1 ⊗ θ₂` on `E₁ ⊗ E₂`, with basis `e_i ⊗ f_j` at index `i·r₂ + j`.
    pub fn tensor(&self, other: &TropConnection) -> Result<TropConnection, ConnectionError> {
        if self.base != other.base {
            return Err(ConnectionError::BaseMismatch);
        }
        let i1 = RatMatrix::identity(self.rank);
        let i2 = RatMatrix::identity(other.rank);
        let theta = self.theta.iter().zip(&other.theta).map(|(a, b)| &a.kronecker(&i2) + &i1.kronecker(b)).collect();
        Ok(TropConnection { base: self.base.clone(), rank: self.rank * other.rank, theta })
    }

    pub fn is_unipotent(&self) -> Unipotence {
        unipotence(self.rank, &self.theta)
    }
}

/// `⋂_k ker A_k`.
pub fn joint_kernel(rank: usize, mats: &[RatMatrix]) -> Subspace {
    let mut stacked = RatMatrix::zeros(0, rank);
    for a in mats {
        stacked = stacked.vstack(a);
    }
    kernel(&stacked)
}

/// Iterated peeling of joint kernels for a family of square matrices.
pub fn unipotence(rank: usize, mats: &[RatMatrix]) -> Unipotence {
    let mut filtration = vec![Subspace::zero(rank)];
    loop {
        let last = filtration.last().unwrap();
        if last.dim() == rank {
            return Unipotence { unipotent: true, filtration };
        }
        // F_{i+1} = { v : A_k v ∈ F_i for all k }.
        let ann = last.annihilator();
        let mut rows = Vec::new();
        for a in mats {
            for alpha in ann.basis_vecs() {
                rows.push(a.left_mul_vec(&alpha));
            }
        }
        let next = kernel(&RatMatrix::from_rows(rank, rows));
        if next.dim() == last.dim() {
            return Unipotence { unipotent: false, filtration };
        }
        filtration.push(next);
    }
}

/// Matrices `T` (`r₂ × r₁`, row-major) with `B_k T = T A_k` for all `k`.
pub fn intertwiner_space(source: &[RatMatrix], target: &[RatMatrix], r1: usize, r2: usize) -> Subspace {
    let n = r1 * r2;
    let mut rows: Vec<Vec<Rat>> = Vec::new();
    for (a, b) in source.iter().zip(target) {
        // Entry (i, j) of B T − T A as a linear form in the entries of T.
        for i in 0..r2 {
            for j in 0..r1 {
                let mut row = vec![Rat::zero(); n];
                for k in 0..r2 {
                    row[k * r1 + j] += b.get(i, k);
                }
                for k in 0..r1 {
                    row[i * r1 + k] -= a.get(k, j);
                }
                rows.push(row);
            }
        }
    }
    kernel(&RatMatrix::from_rows(n, rows))
}

/// Horizontal morphisms `E₁ → E₂`, as row-major `r₂ × r₁` matrices.
pub fn hom_space(c1: &TropConnection, c2: &TropConnection) -> Result<Subspace, ConnectionError> {
    if c1.base != c2.base {
        return Err(ConnectionError::BaseMismatch);
    }
    Ok(intertwiner_space(&c1.theta, &c2.theta, c1.rank, c2.rank))
}

/// The same space computed as horizontal sections of `E₁^∨ ⊗ E₂`, re-indexed to row-major matrices.
pub fn hom_space_via_tensor(c1: &TropConnection, c2: &TropConnection) -> Result<Subspace, ConnectionError> {
    let t = c1.dual().tensor(c2)?;
    let sections = if t.is_integrable().integrable {
        t.horizontal_sections()?
    } else {
        joint_kernel(t.rank, &t.theta)
    };
    let (r1, r2) = (c1.rank, c2.rank);
    // e_i^∨ ⊗ f_j sits at i·r₂ + j and is the matrix unit with entry (j, i).
    let permuted = sections.basis_vecs().into_iter().map(|v| {
        let mut w = vec![Rat::zero(); r1 * r2];
        for i in 0..r1 {
            for j in 0..r2 {
                w[j * r1 + i] = v[i * r2 + j].clone();
            }
        }
        w
    });
    Ok(Subspace::span(r1 * r2, permuted))
}

/// `Δ_θ(v) = v ⊗ Σ_w A_w [w]` recorded word by word: `words[k][w]` is the product
/// `A_{w₁} ⋯ A_{w_k}` for the `k`-letter word with index `w`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComoduleData {
    pub rank: usize,
    pub m: usize,
    pub words: Vec<Vec<RatMatrix>>,
}

impl ComoduleData {
    /// Largest length with a nonzero component.
    pub fn top_length(&self) -> usize {
        (0..self.words.len()).rev().find(|&k| self.words[k].iter().any(|a| !a.is_zero())).unwrap_or(0)
    }

    /// The length-`k` component at matrix entry `(a, b)`, as a vector over words.
    pub fn entry_vector(&self, k: usize, a: usize, b: usize) -> Vec<Rat> {
        self.words[k].iter().map(|m| m.get(a, b).clone()).collect()
    }
}

/// Words of `θ` up to the first length at which all of them vanish.
pub fn connection_to_comodule(c: &TropConnection, setup: &BarSetup) -> Result<ComoduleData, ConnectionError> {
    let m = c.theta.len();
    let r = c.rank;
    let mut words = vec![vec![RatMatrix::identity(r)]];
    loop {
        let k = words.len();
        let prev = words.last().unwrap();
        if prev.iter().all(|a| a.is_zero()) {
            words.pop();
            break;
        }
        if k > r.max(1) {
            return Err(ConnectionError::NotUnipotent(k - 1));
        }
        let mut next = Vec::with_capacity(prev.len() * m);
        for p in prev {
            for a in &c.theta {
                next.push(p * a);
            }
        }
        words.push(next);
    }
    let data = ComoduleData { rank: r, m, words };
    check_comodule(&data, setup)?;
    Ok(data)
}

fn check_comodule(d: &ComoduleData, setup: &BarSetup) -> Result<(), ConnectionError> {
    for k in 2..d.words.len() {
        let kern = setup.h0(k)?;
        for a in 0..d.rank {
            for b in 0..d.rank {
                if !kern.contains(&d.entry_vector(k, a, b)) {
                    return Err(ConnectionError::NotComodule(k));
                }
            }
        }
    }
    Ok(())
}

/// Reads `θ` off the length-one component after checking that the data is multiplicative.
pub fn comodule_to_connection(d: &ComoduleData, base: Arc<WedgeTable>) -> Result<TropConnection, ConnectionError> {
    let r = d.rank;
    if d.m != base.one_forms_dim() {
        return Err(ConnectionError::DimMismatch {
            expected: format!("{} letters", base.one_forms_dim()),
            found: format!("{} letters", d.m),
        });
    }
    if d.words.first() != Some(&vec![RatMatrix::identity(r)]) {
        return Err(ConnectionError::NotComodule(0));
    }
    let theta = d.words.get(1).cloned().unwrap_or_else(|| vec![RatMatrix::zeros(r, r); d.m]);
    let c = TropConnection::new(base, theta)?;
    for k in 2..d.words.len() {
        for (w, mat) in d.words[k].iter().enumerate() {
            let expect = &d.words[k - 1][w / d.m] * &c.theta[w % d.m];
            if &expect != mat {
                return Err(ConnectionError::NotComodule(k));
            }
        }
    }
    // Beyond the recorded lengths every word must vanish.
    if let Some(last) = d.words.last() {
        if d.words.len() > 1 && last.iter().any(|p| c.theta.iter().any(|a| !(p * a).is_zero())) {
            return Err(ConnectionError::NotComodule(d.words.len()));
        }
    }
    Ok(c)
}

pub fn elementary(r: usize, i: usize, j: usize) -> RatMatrix {
    let mut m = RatMatrix::zeros(r, r);
    m.set(i, j, Rat::one());
    m
}
