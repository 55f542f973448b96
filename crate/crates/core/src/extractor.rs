//! Streaming decoder turning biased source bits into unbiased output bits.
//!
//! Source bits are appended one at a time to a buffer. Whenever the buffer
//! is a codeword its label is emitted and the buffer cleared. No codeword
//! has length `1 mod 4`, so those lengths are never looked up. A buffer that
//! reaches the tree height without matching is a restart word and is
//! discarded.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::bits::BitString;
use crate::codebook::{Label, LengthIndex};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExtractedBit {
    pub label: Label,
    /// Source bits consumed to produce this output bit.
    pub depth: u32,
}

impl ExtractedBit {
    pub fn bit(&self) -> bool {
        self.label.as_bit()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecodeEvent {
    Consumed,
    Emitted(ExtractedBit),
    Restarted,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExtractionReport {
    pub bits_consumed: u64,
    pub bits_emitted: u64,
    pub restarts: u64,
    pub leftover_len: u64,
    pub depth_histogram: BTreeMap<u32, u64>,
}

impl ExtractionReport {
    /// Source bits attributed to emitted bits.
    pub fn depth_sum(&self) -> u64 {
        self.depth_histogram.iter().map(|(&d, &c)| d as u64 * c).sum()
    }

    /// Checks the accounting identities for a tree of the given height.
    pub fn is_consistent(&self, height: usize) -> bool {
        let emitted: u64 = self.depth_histogram.values().sum();
        emitted == self.bits_emitted
            && self.bits_consumed == self.depth_sum() + self.restarts * height as u64 + self.leftover_len
    }

    /// Flat `key=value` block, one pair per line. Histogram entries are
    /// written as `depth.<d>=<count>` in increasing depth order.
    pub fn to_key_values(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "bits_consumed={}", self.bits_consumed);
        let _ = writeln!(out, "bits_emitted={}", self.bits_emitted);
        let _ = writeln!(out, "restarts={}", self.restarts);
        let _ = writeln!(out, "leftover_len={}", self.leftover_len);
        match mean_depth_f64(self) {
            Ok(m) => {
                let _ = writeln!(out, "mean_depth={m:.6}");
            }
            Err(_) => out.push_str("mean_depth=undefined\n"),
        }
        for (d, c) in &self.depth_histogram {
            let _ = writeln!(out, "depth.{d}={c}");
        }
        out
    }
}

impl fmt::Display for ExtractionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_key_values())
    }
}

impl AsRef<LengthIndex> for LengthIndex {
    fn as_ref(&self) -> &LengthIndex {
        self
    }
}

/// Decoder state for one stream. `I` is anything that dereferences to the
/// shared index (`&LengthIndex`, `Arc<LengthIndex>`, ...).
#[derive(Clone, Debug)]
pub struct Extractor<I: AsRef<LengthIndex>> {
    index: I,
    height: usize,
    /// `checked[len]`: some codeword has length `len`.
    checked: Vec<bool>,
    buffer: BitString,
    report: ExtractionReport,
}

impl<I: AsRef<LengthIndex>> Extractor<I> {
    pub fn new(index: I) -> Self {
        let idx = index.as_ref();
        let height = idx.height();
        let mut checked = vec![false; height + 1];
        for len in idx.lengths() {
            checked[len] = len % 4 != 1;
        }
        Extractor { index, height, checked, buffer: BitString::with_capacity(height), report: ExtractionReport::default() }
    }

    pub fn index(&self) -> &LengthIndex {
        self.index.as_ref()
    }

    /// Undecoded suffix of the input.
    pub fn buffer(&self) -> &BitString {
        &self.buffer
    }

    pub fn report(&self) -> &ExtractionReport {
        &self.report
    }

    /// Feeds one source bit.
    pub fn decode_next(&mut self, bit: bool) -> Result<DecodeEvent> {
        self.buffer.push(bit);
        self.report.bits_consumed += 1;
        let len = self.buffer.len();

        if self.checked[len] {
            if let Some(label) = self.index.as_ref().lookup(&self.buffer) {
                let depth = len as u32;
                self.buffer.clear();
                self.report.bits_emitted += 1;
                *self.report.depth_histogram.entry(depth).or_insert(0) += 1;
                return Ok(DecodeEvent::Emitted(ExtractedBit { label, depth }));
            }
        }
        if len == self.height {
            if !(self.buffer.is_run_of(false) || self.buffer.is_run_of(true)) {
                return Err(Error::CorruptCodebook { len });
            }
            self.buffer.clear();
            self.report.restarts += 1;
            return Ok(DecodeEvent::Restarted);
        }
        Ok(DecodeEvent::Consumed)
    }

    /// Feeds a run of bits, appending emitted bits to `out`.
    pub fn feed<B: IntoIterator<Item = bool>>(&mut self, bits: B, out: &mut Vec<ExtractedBit>) -> Result<()> {
        for bit in bits {
            if let DecodeEvent::Emitted(e) = self.decode_next(bit)? {
                out.push(e);
            }
        }
        Ok(())
    }

    /// Ends the stream. A partial buffer is discarded and counted as leftover.
    pub fn finish(mut self) -> ExtractionReport {
        self.report.leftover_len = self.buffer.len() as u64;
        self.report
    }

    /// Discards any partial buffer and resets the counters.
    pub fn reset(&mut self) {
        self.buffer.clear();
        self.report = ExtractionReport::default();
    }
}

/// Decodes a whole finite stream.
pub fn extract_stream<B, I>(bits: B, index: I) -> Result<(Vec<ExtractedBit>, ExtractionReport)>
where
    B: IntoIterator<Item = bool>,
    I: AsRef<LengthIndex>,
{
    let mut ex = Extractor::new(index);
    let mut out = Vec::new();
    ex.feed(bits, &mut out)?;
    Ok((out, ex.finish()))
}

/// Source bits per emitted bit, restarts and leftover excluded.
pub fn mean_depth(report: &ExtractionReport) -> Result<BigRational> {
    if report.bits_emitted == 0 {
        return Err(Error::NoOutput);
    }
    Ok(BigRational::new(BigInt::from(report.depth_sum()), BigInt::from(report.bits_emitted)))
}

pub fn mean_depth_f64(report: &ExtractionReport) -> Result<f64> {
    mean_depth(report).map(|m| m.to_f64().unwrap_or(f64::NAN))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebook::{build_codebook, build_length_index, Codeword};
    use proptest::prelude::*;

    fn index(k: u32) -> LengthIndex {
        build_length_index(build_codebook(k).unwrap())
    }

    fn bits(s: &str) -> Vec<bool> {
        s.bytes().map(|b| b == b'1').collect()
    }

    #[test]
    fn von_neumann_pair() {
        let idx = index(1);
        let mut ex = Extractor::new(&idx);
        assert_eq!(ex.decode_next(false).unwrap(), DecodeEvent::Consumed);
        assert_eq!(
            ex.decode_next(true).unwrap(),
            DecodeEvent::Emitted(ExtractedBit { label: Label::H, depth: 2 })
        );
    }

    #[test]
    fn order_two_events() {
        let idx = index(2);
        let mut ex = Extractor::new(&idx);
        let events: Vec<_> = bits("001").into_iter().map(|b| ex.decode_next(b).unwrap()).collect();
        assert_eq!(
            events,
            vec![
                DecodeEvent::Consumed,
                DecodeEvent::Consumed,
                DecodeEvent::Emitted(ExtractedBit { label: Label::T, depth: 3 })
            ]
        );

        let mut ex = Extractor::new(&idx);
        let events: Vec<_> = bits("1111").into_iter().map(|b| ex.decode_next(b).unwrap()).collect();
        assert_eq!(events[..3], [DecodeEvent::Consumed; 3]);
        assert_eq!(events[3], DecodeEvent::Restarted);
        assert!(ex.buffer().is_empty());
    }

    #[test]
    fn stream_examples() {
        let (out, rep) = extract_stream(bits("0110"), index(1)).unwrap();
        assert_eq!(
            out,
            vec![ExtractedBit { label: Label::H, depth: 2 }, ExtractedBit { label: Label::T, depth: 2 }]
        );
        assert_eq!((rep.bits_consumed, rep.bits_emitted, rep.restarts, rep.leftover_len), (4, 2, 0, 0));

        let (out, rep) = extract_stream(bits("0011"), index(2)).unwrap();
        assert_eq!(out, vec![ExtractedBit { label: Label::T, depth: 3 }]);
        assert_eq!(rep.leftover_len, 1);

        let (out, rep) = extract_stream(bits("000001"), index(2)).unwrap();
        assert_eq!(out, vec![ExtractedBit { label: Label::H, depth: 2 }]);
        assert_eq!(rep.restarts, 1);
        assert!(rep.is_consistent(4));
    }

    #[test]
    fn empty_stream() {
        let (out, rep) = extract_stream(Vec::new(), index(3)).unwrap();
        assert!(out.is_empty());
        assert_eq!(rep, ExtractionReport::default());
        assert!(matches!(mean_depth(&rep), Err(Error::NoOutput)));
        assert!(rep.to_key_values().contains("mean_depth=undefined"));
    }

    #[test]
    fn mean_depth_arithmetic() {
        let mut rep = ExtractionReport::default();
        rep.depth_histogram.insert(2, 2);
        rep.depth_histogram.insert(3, 1);
        rep.bits_emitted = 3;
        assert_eq!(mean_depth(&rep).unwrap(), BigRational::new(7.into(), 3.into()));

        let mut rep = ExtractionReport::default();
        rep.depth_histogram.insert(2, 1);
        rep.bits_emitted = 1;
        assert_eq!(mean_depth_f64(&rep).unwrap(), 2.0);
    }

    #[test]
    fn corrupt_index_fails_loudly() {
        // Drop 0001 from the k=2 codebook: "0001" then reaches the height
        // without matching and is not a restart word.
        let mut cb: Vec<Codeword> = build_codebook(2).unwrap().into_entries();
        cb.retain(|c| c.bits.to_string() != "0001");
        let text = format!(
            "k=2 entries={}\n{}",
            cb.len(),
            cb.iter().map(|c| format!("{c}\n")).collect::<String>()
        );
        let broken = crate::codebook::Codebook::read_from(text.as_bytes()).unwrap();
        let idx = build_length_index(broken);
        let err = extract_stream(bits("0001"), &idx).unwrap_err();
        assert!(matches!(err, Error::CorruptCodebook { len: 4 }));
    }

    #[test]
    fn report_key_values() {
        let (_, rep) = extract_stream(bits("0110001"), index(2)).unwrap();
        assert_eq!(
            rep.to_key_values(),
            "bits_consumed=7\nbits_emitted=3\nrestarts=0\nleftover_len=0\nmean_depth=2.333333\ndepth.2=2\ndepth.3=1\n"
        );
    }

    fn codeword_sequence() -> impl Strategy<Value = (u32, Vec<usize>, Vec<Option<bool>>)> {
        (1u32..=5).prop_flat_map(|k| {
            let n = 2 * 3usize.pow(k - 1);
            (
                Just(k),
                proptest::collection::vec(0..n, 0..40),
                proptest::collection::vec(proptest::option::weighted(0.2, any::<bool>()), 40),
            )
        })
    }

    proptest! {
        #[test]
        fn round_trip_and_restart_transparency((k, picks, restarts) in codeword_sequence()) {
            let entries = build_codebook(k).unwrap().into_entries();
            let idx = build_length_index(build_codebook(k).unwrap());
            let height = 1usize << k;

            let mut plain = Vec::new();
            let mut padded = Vec::new();
            let mut inserted = 0;
            for (n, &i) in picks.iter().enumerate() {
                if let Some(b) = restarts[n] {
                    padded.extend(std::iter::repeat_n(b, height));
                    inserted += 1;
                }
                plain.extend(entries[i].bits.iter());
                padded.extend(entries[i].bits.iter());
            }

            let (out, rep) = extract_stream(plain.iter().copied(), &idx).unwrap();
            let want: Vec<ExtractedBit> = picks
                .iter()
                .map(|&i| ExtractedBit { label: entries[i].label, depth: entries[i].len() as u32 })
                .collect();
            prop_assert_eq!(&out, &want);
            prop_assert_eq!(rep.restarts, 0);
            prop_assert_eq!(rep.leftover_len, 0);

            let (out2, rep2) = extract_stream(padded.iter().copied(), &idx).unwrap();
            prop_assert_eq!(&out2, &want);
            prop_assert_eq!(rep2.restarts, inserted);
            prop_assert!(rep2.is_consistent(height));
        }

        #[test]
        fn depth_support_and_accounting(k in 1u32..=6, input in proptest::collection::vec(any::<bool>(), 0..2000)) {
            let idx = build_length_index(build_codebook(k).unwrap());
            let height = 1usize << k;
            let (out, rep) = extract_stream(input.iter().copied(), &idx).unwrap();
            for e in &out {
                prop_assert!(e.depth % 4 != 1);
                prop_assert!(e.depth >= 2 && e.depth as usize <= height);
            }
            prop_assert_eq!(rep.bits_consumed, input.len() as u64);
            prop_assert_eq!(rep.bits_emitted, out.len() as u64);
            prop_assert!(rep.is_consistent(height));
            prop_assert!((rep.leftover_len as usize) < height);
        }
    }
}
