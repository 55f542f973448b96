//! Exact and high-precision analysis of the extractor's cost.
//!
//! `γ_k` is the probability that one pass through `T_k` emits H (equally T).
//! It expands into a sum of monomials `p^i q^j`, one per T-labelled leaf;
//! the exponent pairs `(i, j)` are generated level by level without
//! materializing the codewords. From the pairs we get the distribution of
//! the number of source bits `Y_k` consumed per pass and its (sub-probability)
//! expectation `E(Y_k)`, the expected height of the tree.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use crate::codebook::{check_order, DEFAULT_MAX_ORDER};
use crate::error::{Error, Result};
use crate::number::Number;

/// Exponents of one monomial `p^i q^j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentPair {
    pub i: u32,
    pub j: u32,
}

impl ExponentPair {
    pub fn new(i: u32, j: u32) -> Self {
        ExponentPair { i, j }
    }

    /// Depth of the leaf this monomial stands for.
    pub fn degree(&self) -> u32 {
        self.i + self.j
    }
}

/// Nested pair lists `L_1 ⊆ L_2 ⊆ ... ⊆ L_k`.
///
/// Each level appends the pairs it spawns, so `L_t` is the prefix of length
/// `3^(t-1)` of one flat vector.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairLists {
    k: u32,
    pairs: Vec<ExponentPair>,
}

impl PairLists {
    fn seed() -> Self {
        PairLists { k: 1, pairs: vec![ExponentPair::new(1, 1)] }
    }

    /// Appends level `k + 1`.
    fn grow(&mut self) {
        let t = self.k + 1;
        let half = 1u32 << (t - 1);
        let pruned = ExponentPair::new(half - 1, half + 1);
        let previous = self.pairs.len();
        self.pairs.reserve(2 * previous);
        for s in 0..previous {
            let ExponentPair { i, j } = self.pairs[s];
            let mut left = ExponentPair::new(i + half, j);
            if left == pruned {
                left.j -= 1;
            }
            let mut right = ExponentPair::new(i, j + half);
            if right == pruned {
                right.j -= 1;
            }
            self.pairs.push(left);
            self.pairs.push(right);
        }
        self.k = t;
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// `L_t` for `1 <= t <= k`.
    pub fn list(&self, t: u32) -> &[ExponentPair] {
        assert!(t >= 1 && t <= self.k, "level {t} outside 1..={}", self.k);
        &self.pairs[..3usize.pow(t - 1)]
    }

    /// `L_k`.
    pub fn last(&self) -> &[ExponentPair] {
        &self.pairs
    }

    /// `L_t \ L_(t-1)` (all of `L_1` for `t = 1`).
    pub fn added_at(&self, t: u32) -> &[ExponentPair] {
        let end = 3usize.pow(t - 1);
        let start = if t == 1 { 0 } else { 3usize.pow(t - 2) };
        assert!(t <= self.k);
        &self.pairs[start..end]
    }

    /// Multiset of `L_t` as `(i, j) -> multiplicity`.
    pub fn coefficients(&self, t: u32) -> BTreeMap<ExponentPair, u64> {
        let mut out = BTreeMap::new();
        for &pair in self.list(t) {
            *out.entry(pair).or_insert(0) += 1;
        }
        out
    }
}

/// Builds `L_1, ..., L_k` with the default cap on `k`.
pub fn pair_lists(k: u32) -> Result<PairLists> {
    check_order(k, DEFAULT_MAX_ORDER)?;
    let mut lists = PairLists::seed();
    while lists.k < k {
        lists.grow();
    }
    Ok(lists)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecisionMode {
    ExactRational,
    BigFloat,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PrecisionConfig {
    pub mode: PrecisionMode,
    /// Mantissa bits in float mode.
    pub float_precision_bits: usize,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig { mode: PrecisionMode::BigFloat, float_precision_bits: 256 }
    }
}

impl PrecisionConfig {
    pub fn exact() -> Self {
        PrecisionConfig { mode: PrecisionMode::ExactRational, ..Default::default() }
    }

    pub fn float(bits: usize) -> Self {
        PrecisionConfig { mode: PrecisionMode::BigFloat, float_precision_bits: bits }
    }
}

pub(crate) fn check_probability<N: Number>(p: &N) -> Result<()> {
    if p.compare(&p.zero_like()) != Ordering::Greater || p.compare(&p.one_like()) != Ordering::Less {
        return Err(Error::ProbabilityOutOfRange(p.to_decimal(20)));
    }
    Ok(())
}

/// `γ_k` from the recurrence
/// `γ_1 = pq`, `γ_k = (1 + p^h + q^h) γ_(k-1) + p^h q^h` with `h = 2^(k-1)`.
pub fn gamma_rec<N: Number>(p: &N, k: u32) -> Result<N> {
    check_probability(p)?;
    check_order(k, DEFAULT_MAX_ORDER)?;
    let q = p.complement();
    let one = p.one_like();
    let mut gamma = p.mul(&q);
    let mut p_pow = p.clone();
    let mut q_pow = q;
    for _ in 2..=k {
        // p_pow = p^h, h = 2^(t-1)
        p_pow = p_pow.mul(&p_pow);
        q_pow = q_pow.mul(&q_pow);
        gamma = one.add(&p_pow).add(&q_pow).mul(&gamma).add(&p_pow.mul(&q_pow));
    }
    Ok(gamma)
}

fn as_terms(list: &[ExponentPair]) -> Vec<(u32, u32)> {
    list.iter().map(|e| (e.i, e.j)).collect()
}

/// `Σ p^i q^j` over the list.
pub fn gamma_from_pairs<N: Number>(list: &[ExponentPair], p: &N) -> N {
    N::sum_monomials(p, &as_terms(list), false, &|_| 1)
}

/// `P{Y_k = y} = Σ_(i+j=y) (p^i q^j + q^i p^j)`.
pub fn depth_distribution<N: Number>(list: &[ExponentPair], p: &N) -> BTreeMap<u32, N> {
    let mut by_degree: BTreeMap<u32, Vec<(u32, u32)>> = BTreeMap::new();
    for e in list {
        by_degree.entry(e.degree()).or_default().push((e.i, e.j));
    }
    by_degree.into_iter().map(|(y, terms)| (y, N::sum_monomials(p, &terms, true, &|_| 1))).collect()
}

/// `Σ (i+j)(p^i q^j + q^i p^j)` over the list.
pub fn expected_height_from_pairs<N: Number>(list: &[ExponentPair], p: &N) -> N {
    N::sum_monomials(p, &as_terms(list), true, &|y| y as u64)
}

/// `E(Y_k)`. Restart paths contribute nothing, so this is the expectation
/// of a sub-probability distribution.
pub fn expected_height<N: Number>(p: &N, k: u32) -> Result<N> {
    check_probability(p)?;
    let lists = pair_lists(k)?;
    Ok(expected_height_from_pairs(lists.last(), p))
}

/// One row of the expected-height table.
#[derive(Clone, Debug)]
pub struct HeightRow<N> {
    pub k: u32,
    pub value: N,
    /// `E(Y_k) - E(Y_(k-1))`, summed directly over the pairs added at level
    /// `k` so it carries full relative precision. `None` for `k = 1`.
    pub delta: Option<N>,
}

/// `E(Y_1), ..., E(Y_kmax)` with their increments.
pub fn height_table<N: Number>(p: &N, kmax: u32) -> Result<Vec<HeightRow<N>>> {
    check_probability(p)?;
    check_order(kmax, DEFAULT_MAX_ORDER)?;
    let mut lists = PairLists::seed();
    let mut rows = Vec::with_capacity(kmax as usize);
    let mut value = expected_height_from_pairs(lists.last(), p);
    rows.push(HeightRow { k: 1, value: value.clone(), delta: None });
    for k in 2..=kmax {
        lists.grow();
        let delta = expected_height_from_pairs(lists.added_at(k), p);
        value = value.add(&delta);
        rows.push(HeightRow { k, value: value.clone(), delta: Some(delta) });
    }
    Ok(rows)
}

/// Result of [`expected_height_limit`].
#[derive(Clone, Debug)]
pub struct Limit<N> {
    pub value: N,
    /// Level at which the increment first fell below the tolerance.
    pub k_used: u32,
    pub last_delta: N,
}

/// `E(Y) = lim E(Y_k)`, iterating until `E(Y_k) - E(Y_(k-1)) < tol`.
pub fn expected_height_limit<N: Number>(p: &N, tol: &N) -> Result<Limit<N>> {
    expected_height_limit_capped(p, tol, DEFAULT_MAX_ORDER)
}

pub fn expected_height_limit_capped<N: Number>(p: &N, tol: &N, cap: u32) -> Result<Limit<N>> {
    check_probability(p)?;
    if tol.compare(&tol.zero_like()) != Ordering::Greater {
        return Err(Error::BadTolerance(tol.to_decimal(10)));
    }
    check_order(cap, DEFAULT_MAX_ORDER)?;
    let mut lists = PairLists::seed();
    let mut value = expected_height_from_pairs(lists.last(), p);
    let mut last_delta = value.clone();
    for k in 2..=cap {
        lists.grow();
        let delta = expected_height_from_pairs(lists.added_at(k), p);
        value = value.add(&delta);
        let done = delta.compare(tol) == Ordering::Less;
        last_delta = delta;
        if done {
            return Ok(Limit { value, k_used: k, last_delta });
        }
    }
    Err(Error::NotConverged { k_reached: cap, best: value.to_decimal(20), last_delta: last_delta.to_decimal(6) })
}

/// Expected source bits per output bit when a prefix code with maximal word
/// length `m`, per-label success probability `gamma` and mean codeword
/// length `mean_len` is restarted from scratch after every failure:
/// `m (1 - 2γ) / (2γ) + mean_len`.
pub fn geometric_expectation<N: Number>(m: u64, gamma: &N, mean_len: &N) -> Result<N> {
    let two_gamma = gamma.add(gamma);
    if gamma.compare(&gamma.zero_like()) != Ordering::Greater || two_gamma.compare(&gamma.one_like()) == Ordering::Greater {
        return Err(Error::GammaOutOfRange(gamma.to_decimal(20)));
    }
    let fail = gamma.one_like().sub(&two_gamma);
    Ok(gamma.u64_like(m).mul(&fail).div(&two_gamma).add(mean_len))
}
