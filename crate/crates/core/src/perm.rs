//! Permutations, their sums and block permutations, and the signed
//! action of symmetric groups on tensor powers.
//!
//! A permutation `σ` of `{0..n}` is stored by its images, and
//! `σ.compose(τ) = σ ∘ τ` applies `τ` first. The left action on tensors sends the factor at position `i` to
//! position `σ(i)`; the right action is its inverse, so that
//! `x·(στ) = (x·σ)·τ`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complexes::{tensor_power, ChainMap, Complex};
use crate::error::{Error, Result};
use crate::linalg::{sign, GradedMap, SparseVec};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &i in &images {
            if i >= images.len() || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Schema(format!("{images:?} is not a bijection")));
            }
        }
        Ok(Permutation { images })
    }

    /// From one-based images, as written by hand.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(Error::Schema("one-based images must be positive".into()));
        }
        Permutation::new(images.iter().map(|&i| i - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            images: (0..n).collect(),
        }
    }

    /// The adjacent transposition swapping `i` and `i + 1`.
    pub fn transposition(n: usize, i: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(i, i + 1);
        Permutation { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn inverse(&self) -> Self {
        let mut images = vec![0; self.len()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Permutation { images }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Permutation) -> Self {
        assert_eq!(self.len(), other.len(), "composing permutations of different sizes");
        Permutation {
            images: other.images.iter().map(|&j| self.images[j]).collect(),
        }
    }

    pub fn inversions(&self) -> usize {
        let n = self.len();
        let mut c = 0;
        for i in 0..n {
            for j in i + 1..n {
                if self.images[i] > self.images[j] {
                    c += 1;
                }
            }
        }
        c
    }

    pub fn is_odd(&self) -> bool {
        self.inversions() % 2 == 1
    }

    /// Indices `a_1, …, a_k` with `σ = s_{a_1} ∘ … ∘ s_{a_k}`, where `s_a`
    /// swaps `a` and `a + 1`.
    pub fn adjacent_word(&self) -> Vec<usize> {
        let mut cur = self.images.clone();
        let mut steps = Vec::new();
        loop {
            match (0..cur.len().saturating_sub(1)).find(|&i| cur[i] > cur[i + 1]) {
                Some(i) => {
                    cur.swap(i, i + 1);
                    steps.push(i);
                }
                None => break,
            }
        }
        steps.reverse();
        steps
    }

    /// All permutations of `{0..n}` in lexicographic order of images.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Permutation {
                images: cur.clone(),
            });
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
        out
    }

    /// Sign of moving factors of the given degrees by the left action:
    /// the factor at position `i` lands at position `σ(i)`.
    pub fn koszul_odd(&self, degrees: &[i32]) -> bool {
        let n = self.len();
        let mut odd = false;
        for i in 0..n {
            if degrees[i] % 2 == 0 {
                continue;
            }
            for j in i + 1..n {
                if degrees[j] % 2 != 0 && self.images[i] > self.images[j] {
                    odd = !odd;
                }
            }
        }
        odd
    }

    /// Left action on a sequence: position `σ(i)` of the result holds `xs[i]`.
    pub fn permute<T: Clone>(&self, xs: &[T]) -> Vec<T> {
        let mut out: Vec<Option<T>> = vec![None; xs.len()];
        for (i, x) in xs.iter().enumerate() {
            out[self.images[i]] = Some(x.clone());
        }
        out.into_iter().map(|x| x.expect("bijection")).collect()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, i) in self.images.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", i + 1)?;
        }
        write!(f, "]")
    }
}

/// `τ_1 ⊕ … ⊕ τ_n`: acts on consecutive blocks, each by its own permutation.
pub fn sum(taus: &[Permutation]) -> Permutation {
    let mut images = Vec::new();
    let mut off = 0;
    for t in taus {
        images.extend(t.images.iter().map(|&i| i + off));
        off += t.len();
    }
    Permutation { images }
}

/// The permutation of `{0..Σm}` moving block `i` (of size `m_i`) to the
/// slot `σ(i)` while preserving the order inside each block.
pub fn block_permutation(sigma: &Permutation, blocks: &[usize]) -> Result<Permutation> {
    if sigma.len() != blocks.len() {
        return Err(Error::Dimension(format!(
            "{} blocks for a permutation of {}",
            blocks.len(),
            sigma.len()
        )));
    }
    let n = blocks.len();
    let mut images = Vec::with_capacity(blocks.iter().sum());
    for j in 0..n {
        let base: usize = (0..n)
            .filter(|&i| sigma.apply(i) < sigma.apply(j))
            .map(|i| blocks[i])
            .sum();
        images.extend((0..blocks[j]).map(|k| base + k));
    }
    Ok(Permutation { images })
}

/// The right action of `σ` on `X_1 ⊗ … ⊗ X_n`, landing in
/// `X_{σ(1)} ⊗ … ⊗ X_{σ(n)}`: position `j` of the output holds the factor
/// from position `σ(j)`, with the Koszul sign.
pub fn act_on_tensor_power(sigma: &Permutation, factors: &[&Complex]) -> Result<ChainMap> {
    if sigma.len() != factors.len() {
        return Err(Error::Dimension("one factor per permuted position".into()));
    }
    let src = tensor_power(factors);
    let permuted: Vec<&Complex> = (0..factors.len()).map(|j| factors[sigma.apply(j)]).collect();
    let tgt = tensor_power(&permuted);
    let dims: Vec<usize> = factors.iter().map(|f| f.dim()).collect();
    let tdims: Vec<usize> = permuted.iter().map(|f| f.dim()).collect();
    let inv = sigma.inverse();
    let mut cols = Vec::with_capacity(src.dim());
    for flat in 0..src.dim() {
        let idx = unflatten(flat, &dims);
        let degrees: Vec<i32> = idx
            .iter()
            .zip(factors)
            .map(|(&i, f)| f.space().degree(i))
            .collect();
        // the factor at position i moves to position σ^{-1}(i)
        let moved = inv.permute(&idx);
        let odd = inv.koszul_odd(&degrees);
        cols.push(SparseVec::from_pairs([(flatten(&moved, &tdims), sign(odd))]));
    }
    let map = GradedMap::new(src.space().clone(), tgt.space().clone(), 0, cols)?;
    ChainMap::new(src, tgt, map)
}

/// Mixed-radix decomposition of a flat tensor index, first factor slowest.
pub fn unflatten(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for k in (0..dims.len()).rev() {
        out[k] = flat % dims[k];
        flat /= dims[k];
    }
    out
}

pub fn flatten(idx: &[usize], dims: &[usize]) -> usize {
    idx.iter().zip(dims).fold(0, |acc, (&i, &d)| acc * d + i)
}
