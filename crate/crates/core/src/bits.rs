//! Packed, growable bit strings.
//!
//! Bits are stored MSB-first in `u64` words: bit `t` lives in word `t / 64`
//! at position `63 - t % 64`. Unused trailing bits of the last word are
//! always zero, so two strings of equal length compare equal exactly when
//! their word slices do.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

const WORD: usize = 64;

#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(bits: usize) -> Self {
        BitString { len: 0, words: Vec::with_capacity(bits.div_ceil(WORD)) }
    }

    /// `len` copies of `bit`.
    pub fn repeat(bit: bool, len: usize) -> Self {
        let mut s = Self::with_capacity(len);
        s.push_run(bit, len);
        s
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut s = Self::new();
        for b in bits {
            s.push(b);
        }
        s
    }

    /// Rebuilds a string from its raw parts. Trailing bits past `len` are cleared.
    pub fn from_words(len: usize, words: &[u64]) -> Self {
        let n = len.div_ceil(WORD);
        let mut words = words[..n].to_vec();
        let tail = len % WORD;
        if tail != 0 {
            words[n - 1] &= !0u64 << (WORD - tail);
        }
        BitString { len, words }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range for length {}", self.len);
        self.words[index / WORD] >> (WORD - 1 - index % WORD) & 1 == 1
    }

    #[inline]
    pub fn push(&mut self, bit: bool) {
        let offset = self.len % WORD;
        if offset == 0 {
            self.words.push(0);
        }
        if bit {
            let last = self.words.len() - 1;
            self.words[last] |= 1u64 << (WORD - 1 - offset);
        }
        self.len += 1;
    }

    pub fn push_run(&mut self, bit: bool, mut count: usize) {
        // Fill the partial word bit by bit, then whole words at a time.
        while count > 0 && !self.len.is_multiple_of(WORD) {
            self.push(bit);
            count -= 1;
        }
        let fill = if bit { !0u64 } else { 0 };
        while count >= WORD {
            self.words.push(fill);
            self.len += WORD;
            count -= WORD;
        }
        for _ in 0..count {
            self.push(bit);
        }
    }

    pub fn extend_from(&mut self, other: &BitString) {
        let shift = self.len % WORD;
        if shift == 0 {
            self.words.extend_from_slice(&other.words);
            self.len += other.len;
            return;
        }
        for &w in &other.words {
            let last = self.words.len() - 1;
            self.words[last] |= w >> shift;
            self.words.push(w << (WORD - shift));
        }
        self.len += other.len;
        self.words.truncate(self.len.div_ceil(WORD));
    }

    /// Removes the last bit, if any.
    pub fn pop(&mut self) -> Option<bool> {
        if self.len == 0 {
            return None;
        }
        let bit = self.get(self.len - 1);
        self.len -= 1;
        let tail = self.len % WORD;
        if tail == 0 {
            self.words.pop();
        } else {
            let last = self.words.len() - 1;
            self.words[last] &= !0u64 << (WORD - tail);
        }
        Some(bit)
    }

    pub fn clear(&mut self) {
        self.len = 0;
        self.words.clear();
    }

    /// Hamming weight.
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn complement(&self) -> BitString {
        let words = self.words.iter().map(|w| !w).collect::<Vec<_>>();
        BitString::from_words(self.len, &words)
    }

    /// True when every bit equals `bit` (vacuously true when empty).
    pub fn is_run_of(&self, bit: bool) -> bool {
        if bit {
            self.count_ones() == self.len
        } else {
            self.words.iter().all(|&w| w == 0)
        }
    }

    pub fn starts_with(&self, prefix: &BitString) -> bool {
        if prefix.len > self.len {
            return false;
        }
        let full = prefix.len / WORD;
        if self.words[..full] != prefix.words[..full] {
            return false;
        }
        let tail = prefix.len % WORD;
        if tail == 0 {
            return true;
        }
        let mask = !0u64 << (WORD - tail);
        self.words[full] & mask == prefix.words[full]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }
}

/// Lexicographic order on bit strings; a proper prefix sorts first.
impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        let common = self.len.min(other.len);
        let full = common / WORD;
        for (a, b) in self.words[..full].iter().zip(&other.words[..full]) {
            match a.cmp(b) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        let tail = common % WORD;
        if tail != 0 {
            let mask = !0u64 << (WORD - tail);
            match (self.words[full] & mask).cmp(&(other.words[full] & mask)) {
                Ordering::Equal => {}
                ord => return ord,
            }
        }
        self.len.cmp(&other.len)
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::with_capacity(self.len);
        s.extend(self.iter().map(|b| if b { '1' } else { '0' }));
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString(\"{self}\")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid character {0:?} in bit string")]
pub struct ParseBitStringError(pub char);

impl FromStr for BitString {
    type Err = ParseBitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = BitString::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => out.push(false),
                '1' => out.push(true),
                other => return Err(ParseBitStringError(other)),
            }
        }
        Ok(out)
    }
}
