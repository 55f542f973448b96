//! Codebook of the pruned tree `T_k`.
//!
//! `T_k` has height `2^k`. Its leaves are binary words labelled H or T;
//! the two remaining paths `0^(2^k)` and `1^(2^k)` are restart words. The
//! tree is grown from `T_1 = {01 -> H, 10 -> T}` by hanging a copy of the
//! current tree below each of its restart paths, then merging each middle
//! restart leaf with its sibling into one shorter leaf.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use crate::bits::BitString;
use crate::error::{Error, Result};
use crate::number::Number;

/// Default upper bound on `k`.
pub const DEFAULT_MAX_ORDER: u32 = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    H,
    T,
}

impl Label {
    pub fn flip(self) -> Label {
        match self {
            Label::H => Label::T,
            Label::T => Label::H,
        }
    }

    /// Output bit: H is 1, T is 0.
    pub fn as_bit(self) -> bool {
        self == Label::H
    }

    pub fn from_bit(bit: bool) -> Label {
        if bit {
            Label::H
        } else {
            Label::T
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Label::H => 'H',
            Label::T => 'T',
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

impl FromStr for Label {
    type Err = ();

    fn from_str(s: &str) -> std::result::Result<Self, ()> {
        match s {
            "H" => Ok(Label::H),
            "T" => Ok(Label::T),
            _ => Err(()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Codeword {
    pub bits: BitString,
    pub label: Label,
}

impl Codeword {
    pub fn new(bits: BitString, label: Label) -> Self {
        Codeword { bits, label }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    /// `(ones, zeros)`: the exponents of `p` and `q` in the word's probability.
    pub fn exponents(&self) -> (u32, u32) {
        let ones = self.bits.count_ones();
        (ones as u32, (self.bits.len() - ones) as u32)
    }

    /// The symmetric partner: every bit flipped, label flipped.
    pub fn mirror(&self) -> Codeword {
        Codeword { bits: self.bits.complement(), label: self.label.flip() }
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.bits, self.label)
    }
}

/// The leaves of `T_k`. The restart words are implicit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Codebook {
    k: u32,
    entries: Vec<Codeword>,
}

pub fn check_order(k: u32, cap: u32) -> Result<()> {
    if k == 0 {
        return Err(Error::ZeroOrder);
    }
    if k > cap {
        return Err(Error::OrderTooLarge { k, cap });
    }
    Ok(())
}

/// Builds the codebook of `T_k` with the default cap on `k`.
pub fn build_codebook(k: u32) -> Result<Codebook> {
    build_codebook_capped(k, DEFAULT_MAX_ORDER)
}

pub fn build_codebook_capped(k: u32, cap: u32) -> Result<Codebook> {
    check_order(k, cap)?;
    let total = 2 * 3usize.pow(k - 1);
    let mut entries = Vec::with_capacity(total);
    entries.push(Codeword::new("01".parse().unwrap(), Label::H));
    entries.push(Codeword::new("10".parse().unwrap(), Label::T));

    for i in 1..k {
        let run = 1usize << i;
        let previous = entries.len();
        for idx in 0..previous {
            let (word, label) = (&entries[idx].bits, entries[idx].label);
            let mut zeros = BitString::with_capacity(run + word.len());
            zeros.push_run(false, run);
            zeros.extend_from(word);
            let mut ones = BitString::with_capacity(run + word.len());
            ones.push_run(true, run);
            ones.extend_from(word);
            // The full-height words of the previous tree sit next to the
            // middle restart leaves; merge those by dropping the last bit.
            if word.len() == run {
                if word.get(0) {
                    zeros.pop();
                } else {
                    ones.pop();
                }
            }
            entries.push(Codeword::new(zeros, label));
            entries.push(Codeword::new(ones, label));
        }
    }
    debug_assert_eq!(entries.len(), total);
    Ok(Codebook { k, entries })
}

impl Codebook {
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Tree height `2^k`, also the length of the restart words.
    pub fn height(&self) -> usize {
        1usize << self.k
    }

    pub fn entries(&self) -> &[Codeword] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn into_entries(self) -> Vec<Codeword> {
        self.entries
    }

    pub fn restart_words(&self) -> [BitString; 2] {
        restart_words(self.k)
    }

    /// Entries sorted lexicographically by bits.
    pub fn sorted_entries(&self) -> Vec<&Codeword> {
        let mut sorted: Vec<&Codeword> = self.entries.iter().collect();
        sorted.sort_by(|a, b| a.bits.cmp(&b.bits));
        sorted
    }

    /// Writes the text file form: a `k=.. entries=..` header, then one
    /// `<bits> <H|T>` line per entry in lexicographic order.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "k={} entries={}", self.k, self.entries.len())?;
        for cw in self.sorted_entries() {
            writeln!(out, "{cw}")?;
        }
        out.flush()
    }

    pub fn to_file_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("codebook text is ASCII")
    }

    /// Parses the text file form. Structural properties (symmetry,
    /// alternation, completeness) are not checked here; see [`Codebook::audit`].
    pub fn read_from<R: BufRead>(input: R) -> Result<Codebook> {
        let mut lines = input.lines().enumerate();
        let bad = |line: usize, msg: &str| Error::CodebookFormat { line, msg: msg.to_string() };
        let header = match lines.next() {
            Some((_, Ok(h))) => h,
            Some((_, Err(e))) => return Err(bad(1, &e.to_string())),
            None => return Err(bad(1, "missing header")),
        };
        let (k, count) = parse_header(&header).ok_or_else(|| bad(1, "expected `k=<k> entries=<n>`"))?;
        check_order(k, DEFAULT_MAX_ORDER).map_err(|e| bad(1, &e.to_string()))?;
        let height = 1usize << k;

        let mut entries = Vec::with_capacity(count);
        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line.map_err(|e| bad(lineno, &e.to_string()))?;
            let (bits, label) = line.split_once(' ').ok_or_else(|| bad(lineno, "expected `<bits> <H|T>`"))?;
            let bits: BitString = bits.parse().map_err(|e: crate::bits::ParseBitStringError| bad(lineno, &e.to_string()))?;
            let label: Label = label.parse().map_err(|_| bad(lineno, "label must be H or T"))?;
            if bits.len() < 2 || bits.len() > height {
                return Err(bad(lineno, &format!("codeword length {} outside [2, {height}]", bits.len())));
            }
            entries.push(Codeword::new(bits, label));
        }
        if entries.len() != count {
            return Err(bad(1, &format!("header announces {count} entries, found {}", entries.len())));
        }
        Ok(Codebook { k, entries })
    }

    /// Checks every structural invariant of a valid codebook and returns
    /// the violations found (empty for a valid codebook).
    pub fn audit(&self) -> Vec<Violation> {
        let mut found = Vec::new();
        let per_label = 3usize.pow(self.k - 1);
        let heads = self.entries.iter().filter(|c| c.label == Label::H).count();
        let tails = self.entries.len() - heads;
        if heads != per_label || tails != per_label {
            found.push(Violation::LeafCount { heads, tails, expected: per_label });
        }

        if let Some(cw) = self.entries.iter().find(|c| c.len() % 4 == 1) {
            found.push(Violation::LengthOneMod4(cw.bits.to_string()));
        }

        let set: HashMap<&BitString, Label> = self.entries.iter().map(|c| (&c.bits, c.label)).collect();
        if set.len() != self.entries.len() {
            found.push(Violation::Duplicate);
        }
        if let Some(cw) = self
            .entries
            .iter()
            .find(|c| set.get(&c.bits.complement()) != Some(&c.label.flip()))
        {
            found.push(Violation::Symmetry(cw.bits.to_string()));
        }

        let sorted = self.sorted_entries();
        if let Some(pair) = sorted.windows(2).find(|w| w[0].label == w[1].label) {
            found.push(Violation::Alternation(pair[0].bits.to_string(), pair[1].bits.to_string()));
        }

        let mut all: Vec<BitString> = self.entries.iter().map(|c| c.bits.clone()).collect();
        all.extend(self.restart_words());
        all.sort();
        // In lexicographic order every extension of a word follows it
        // immediately, so checking neighbours suffices.
        if let Some(w) = all.windows(2).find(|w| w[1].starts_with(&w[0])) {
            found.push(Violation::NotPrefixFree(w[0].to_string(), w[1].to_string()));
        }

        let height = self.height();
        let full = self.entries.iter().filter(|c| c.len() == height).count();
        let shortest = self.entries.iter().filter(|c| c.len() == 2).count();
        if full != 2 || shortest != 2 {
            found.push(Violation::BoundaryLengths { full_height: full, length_two: shortest });
        }
        found
    }

    /// `Σ P(w)` over entries with the given label.
    pub fn label_mass<N: Number>(&self, label: Label, p: &N) -> N {
        let terms: Vec<(u32, u32)> =
            self.entries.iter().filter(|c| c.label == label).map(Codeword::exponents).collect();
        N::sum_monomials(p, &terms, false, &|_| 1)
    }

    /// `Σ P(w)` over entries plus both restart words; exactly 1 for a
    /// complete codebook.
    pub fn total_mass<N: Number>(&self, p: &N) -> N {
        let q = p.complement();
        let h = self.height() as u64;
        self.label_mass(Label::H, p)
            .add(&self.label_mass(Label::T, p))
            .add(&p.powu(h))
            .add(&q.powu(h))
    }
}

fn parse_header(line: &str) -> Option<(u32, usize)> {
    let mut parts = line.split(' ');
    let k = parts.next()?.strip_prefix("k=")?.parse().ok()?;
    let n = parts.next()?.strip_prefix("entries=")?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((k, n))
}

/// `0^(2^k)` and `1^(2^k)`.
pub fn restart_words(k: u32) -> [BitString; 2] {
    let h = 1usize << k;
    [BitString::repeat(false, h), BitString::repeat(true, h)]
}

/// A failed codebook invariant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    LeafCount { heads: usize, tails: usize, expected: usize },
    LengthOneMod4(String),
    Duplicate,
    Symmetry(String),
    Alternation(String, String),
    NotPrefixFree(String, String),
    BoundaryLengths { full_height: usize, length_two: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LeafCount { heads, tails, expected } => {
                write!(f, "leaf count: {heads} H and {tails} T, expected {expected} each")
            }
            Violation::LengthOneMod4(w) => write!(f, "codeword {w} has length = 1 mod 4"),
            Violation::Duplicate => write!(f, "duplicate codewords"),
            Violation::Symmetry(w) => write!(f, "symmetry: complement of {w} missing or same label"),
            Violation::Alternation(a, b) => write!(f, "alternation: {a} and {b} are adjacent with equal labels"),
            Violation::NotPrefixFree(a, b) => write!(f, "prefix-free: {a} is a prefix of {b}"),
            Violation::BoundaryLengths { full_height, length_two } => {
                write!(f, "{full_height} full-height and {length_two} length-2 codewords, expected 2 and 2")
            }
        }
    }
}

/// `p^ω(w) · (1-p)^(|w|-ω(w))`.
pub fn codeword_probability<N: Number>(w: &BitString, p: &N) -> Result<N> {
    let zero = p.zero_like();
    let one = p.one_like();
    if p.compare(&zero).is_le() || p.compare(&one).is_ge() {
        return Err(Error::ProbabilityOutOfRange(p.to_decimal(20)));
    }
    let ones = w.count_ones() as u64;
    let zeros = w.len() as u64 - ones;
    Ok(p.powu(ones).mul(&p.complement().powu(zeros)))
}

pub fn complement(w: &BitString) -> BitString {
    w.complement()
}

/// Codewords bucketed by length for streaming membership tests.
#[derive(Clone, Debug)]
pub struct LengthIndex {
    k: u32,
    count: usize,
    buckets: BTreeMap<usize, HashMap<Box<[u64]>, Label>>,
}

/// Moves the codebook's entries into per-length hash sets.
pub fn build_length_index(cb: Codebook) -> LengthIndex {
    let k = cb.k;
    let count = cb.entries.len();
    let mut buckets: BTreeMap<usize, HashMap<Box<[u64]>, Label>> = BTreeMap::new();
    for cw in cb.entries {
        let len = cw.bits.len();
        let words: Box<[u64]> = cw.bits.words().into();
        buckets.entry(len).or_default().insert(words, cw.label);
    }
    LengthIndex { k, count, buckets }
}

impl LengthIndex {
    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn height(&self) -> usize {
        1usize << self.k
    }

    /// Number of codewords across all buckets.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn lengths(&self) -> impl Iterator<Item = usize> + '_ {
        self.buckets.keys().copied()
    }

    pub fn bucket_len(&self, len: usize) -> usize {
        self.buckets.get(&len).map_or(0, HashMap::len)
    }

    #[inline]
    pub fn has_length(&self, len: usize) -> bool {
        self.buckets.contains_key(&len)
    }

    /// Label of `w` if it is a codeword.
    #[inline]
    pub fn lookup(&self, w: &BitString) -> Option<Label> {
        self.buckets.get(&w.len())?.get(w.words()).copied()
    }

    /// Iterates the indexed codewords (bucket order, then arbitrary).
    pub fn codewords(&self) -> impl Iterator<Item = Codeword> + '_ {
        self.buckets.iter().flat_map(|(&len, bucket)| {
            bucket.iter().map(move |(words, &label)| Codeword::new(BitString::from_words(len, words), label))
        })
    }

    /// Rebuilds the codebook (entries in bucket order).
    pub fn to_codebook(&self) -> Codebook {
        Codebook { k: self.k, entries: self.codewords().collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use std::collections::HashSet;

    fn set(cb: &Codebook) -> HashSet<(String, Label)> {
        cb.entries().iter().map(|c| (c.bits.to_string(), c.label)).collect()
    }

    fn expected(words: &[(&str, Label)]) -> HashSet<(String, Label)> {
        words.iter().map(|(w, l)| (w.to_string(), *l)).collect()
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn order_one_is_von_neumann() {
        let cb = build_codebook(1).unwrap();
        assert_eq!(set(&cb), expected(&[("01", Label::H), ("10", Label::T)]));
    }

    #[test]
    fn order_two() {
        use Label::*;
        let cb = build_codebook(2).unwrap();
        assert_eq!(
            set(&cb),
            expected(&[("01", H), ("10", T), ("0001", H), ("110", H), ("001", T), ("1110", T)])
        );
        // H mass is pq + p^2 q + p q^3.
        let p = rat(1, 3);
        let q = rat(2, 3);
        let tau2 = &p * &q + &p * &p * &q + &p * &q * &q * &q;
        assert_eq!(cb.label_mass(Label::H, &p), tau2);
        assert_eq!(cb.label_mass(Label::T, &p), tau2);
    }

    #[test]
    fn order_three_lengths() {
        let cb = build_codebook(3).unwrap();
        let mut lengths: Vec<usize> = cb.entries().iter().map(Codeword::len).collect();
        lengths.sort_unstable();
        assert_eq!(lengths, vec![2, 2, 3, 3, 4, 4, 6, 6, 6, 6, 7, 7, 7, 7, 7, 7, 8, 8]);
    }

    #[test]
    fn order_cap() {
        assert!(matches!(build_codebook(0), Err(Error::ZeroOrder)));
        assert!(matches!(build_codebook(15), Err(Error::OrderTooLarge { k: 15, cap: 14 })));
        assert!(matches!(build_codebook_capped(5, 4), Err(Error::OrderTooLarge { .. })));
    }

    #[test]
    fn probabilities() {
        let p = rat(2, 5);
        let w: BitString = "01".parse().unwrap();
        assert_eq!(codeword_probability(&w, &p).unwrap(), rat(6, 25));
        let w: BitString = "110".parse().unwrap();
        assert_eq!(codeword_probability(&w, &rat(1, 2)).unwrap(), rat(1, 8));
        let w: BitString = "1110".parse().unwrap();
        assert_eq!(codeword_probability(&w, &p).unwrap(), rat(8, 125) * rat(3, 5));
        assert!(codeword_probability(&w, &rat(0, 1)).is_err());
        assert!(codeword_probability(&w, &rat(1, 1)).is_err());
        assert!(codeword_probability(&w, &rat(5, 4)).is_err());
    }

    #[test]
    fn complements() {
        let c = |s: &str| complement(&s.parse().unwrap()).to_string();
        assert_eq!(c("01"), "10");
        assert_eq!(c("0001"), "1110");
        assert_eq!(c(""), "");
    }

    #[test]
    fn length_index_buckets() {
        let idx = build_length_index(build_codebook(2).unwrap());
        assert_eq!(idx.lengths().collect::<Vec<_>>(), vec![2, 3, 4]);
        let label = |s: &str| idx.lookup(&s.parse().unwrap());
        assert_eq!(label("01"), Some(Label::H));
        assert_eq!(label("10"), Some(Label::T));
        assert_eq!(label("110"), Some(Label::H));
        assert_eq!(label("001"), Some(Label::T));
        assert_eq!(label("0001"), Some(Label::H));
        assert_eq!(label("1110"), Some(Label::T));
        assert_eq!(label("0000"), None);
        assert_eq!(label("000"), None);

        let one = build_length_index(build_codebook(1).unwrap());
        assert_eq!(one.lengths().collect::<Vec<_>>(), vec![2]);
        assert_eq!(one.bucket_len(2), 2);
    }

    #[test]
    fn length_index_partitions_entries() {
        for k in 1..=7 {
            let cb = build_codebook(k).unwrap();
            let before = set(&cb);
            let idx = build_length_index(cb);
            assert!(idx.lengths().all(|l| l % 4 != 1));
            assert_eq!(idx.len(), before.len());
            let after: HashSet<_> = idx.codewords().map(|c| (c.bits.to_string(), c.label)).collect();
            assert_eq!(before, after);
        }
    }

    #[test]
    fn file_format() {
        let text = build_codebook(2).unwrap().to_file_string();
        assert_eq!(
            text,
            "k=2 entries=6\n0001 H\n001 T\n01 H\n10 T\n110 H\n1110 T\n"
        );
        let back = Codebook::read_from(text.as_bytes()).unwrap();
        assert_eq!(back.to_file_string(), text);
        assert!(back.audit().is_empty());
    }

    #[test]
    fn file_format_errors() {
        assert!(Codebook::read_from("".as_bytes()).is_err());
        assert!(Codebook::read_from("k=2\n".as_bytes()).is_err());
        assert!(Codebook::read_from("k=1 entries=2\n01 H\n".as_bytes()).is_err());
        assert!(Codebook::read_from("k=1 entries=2\n01 H\n1x T\n".as_bytes()).is_err());
        assert!(Codebook::read_from("k=1 entries=2\n01 H\n10 X\n".as_bytes()).is_err());
        assert!(Codebook::read_from("k=1 entries=2\n01 H\n100 T\n".as_bytes()).is_err());
        assert!(Codebook::read_from("k=0 entries=0\n".as_bytes()).is_err());
    }

    #[test]
    fn audit_flags_flipped_label() {
        let text = build_codebook(3).unwrap().to_file_string().replacen("001 T", "001 H", 1);
        let corrupted = Codebook::read_from(text.as_bytes()).unwrap();
        let found = corrupted.audit();
        assert!(found.iter().any(|v| matches!(v, Violation::Alternation(..))), "{found:?}");
        assert!(found.iter().any(|v| matches!(v, Violation::LeafCount { .. })));
    }

    #[test]
    fn audit_flags_missing_word() {
        let mut cb = build_codebook(3).unwrap();
        cb.entries.retain(|c| c.bits.to_string() != "0000110");
        cb.entries.push(Codeword::new("00001101".parse().unwrap(), Label::H));
        let found = cb.audit();
        assert!(found.iter().any(|v| matches!(v, Violation::Symmetry(_))), "{found:?}");
        assert!(found.iter().any(|v| matches!(v, Violation::NotPrefixFree(..)) || matches!(v, Violation::BoundaryLengths { .. })));
    }

    #[test]
    fn valid_codebooks_pass_audit() {
        for k in 1..=8 {
            let cb = build_codebook(k).unwrap();
            assert_eq!(cb.audit(), Vec::<Violation>::new(), "k={k}");
        }
    }

    #[test]
    fn total_mass_is_one() {
        for k in 1..=6 {
            let cb = build_codebook(k).unwrap();
            for p in [rat(1, 3), rat(1, 2), rat(51, 100), rat(9, 10)] {
                assert_eq!(cb.total_mass(&p), rat(1, 1), "k={k} p={p}");
                assert_eq!(cb.label_mass(Label::H, &p), cb.label_mass(Label::T, &p));
            }
        }
    }
}
