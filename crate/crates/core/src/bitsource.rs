//! Biased bit sources: a reproducible Bernoulli simulator and bit files.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::prob::Probability;

/// The splitmix64 generator.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceSpec {
    pub p: Probability,
    pub n: usize,
    pub seed: u64,
}

/// Infinite i.i.d. Bernoulli bits: bit is 1 iff the next generator output
/// is below `floor(p * 2^64)`.
#[derive(Clone, Debug)]
pub struct BernoulliBits {
    rng: SplitMix64,
    threshold: u64,
}

impl BernoulliBits {
    pub fn new(p: &Probability, seed: u64) -> Self {
        BernoulliBits { rng: SplitMix64::new(seed), threshold: p.threshold_u64() }
    }
}

impl Iterator for BernoulliBits {
    type Item = bool;

    #[inline]
    fn next(&mut self) -> Option<bool> {
        Some(self.rng.next_u64() < self.threshold)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BitFormat {
    /// One ASCII `0`/`1` byte per bit.
    Ascii01,
    /// Eight bits per byte, most significant bit first, zero padded.
    Packed,
}

impl FromStr for BitFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "ascii01" => Ok(BitFormat::Ascii01),
            "packed" => Ok(BitFormat::Packed),
            other => Err(format!("unknown bit format {other:?} (expected ascii01 or packed)")),
        }
    }
}

impl fmt::Display for BitFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BitFormat::Ascii01 => "ascii01",
            BitFormat::Packed => "packed",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Simulated(SourceSpec),
    File { path: PathBuf, format: BitFormat },
    Memory,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitStream {
    pub bits: Vec<bool>,
    pub origin: Origin,
}

impl BitStream {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitStream { bits, origin: Origin::Memory }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }
}

pub fn bernoulli_stream(spec: &SourceSpec) -> BitStream {
    let bits = BernoulliBits::new(&spec.p, spec.seed).take(spec.n).collect();
    BitStream { bits, origin: Origin::Simulated(spec.clone()) }
}

/// Decodes bytes in the given format. `n_bits` truncates the result and
/// must not exceed what the bytes hold.
pub fn decode_bits(bytes: &[u8], format: BitFormat, n_bits: Option<usize>) -> Result<Vec<bool>> {
    let available = match format {
        BitFormat::Ascii01 => bytes.len(),
        BitFormat::Packed => bytes.len() * 8,
    };
    let n = n_bits.unwrap_or(available);
    if n > available {
        return Err(Error::NotEnoughBits { requested: n, available });
    }
    match format {
        BitFormat::Ascii01 => bytes[..n]
            .iter()
            .enumerate()
            .map(|(offset, &byte)| match byte {
                b'0' => Ok(false),
                b'1' => Ok(true),
                _ => Err(Error::BadAsciiBit { byte, offset }),
            })
            .collect(),
        BitFormat::Packed => Ok((0..n).map(|i| bytes[i / 8] >> (7 - i % 8) & 1 == 1).collect()),
    }
}

pub fn encode_bits(bits: &[bool], format: BitFormat) -> Vec<u8> {
    match format {
        BitFormat::Ascii01 => bits.iter().map(|&b| if b { b'1' } else { b'0' }).collect(),
        BitFormat::Packed => bits
            .chunks(8)
            .map(|chunk| chunk.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (u8::from(b) << (7 - i))))
            .collect(),
    }
}

pub fn read_bits(path: &Path, format: BitFormat, n_bits: Option<usize>) -> Result<BitStream> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let bits = decode_bits(&bytes, format, n_bits)?;
    Ok(BitStream { bits, origin: Origin::File { path: path.to_path_buf(), format } })
}

/// Writes the stream. Packed output is zero padded to a whole byte; the
/// true bit count has to travel separately (`--nbits`).
pub fn write_bits(stream: &BitStream, path: &Path, format: BitFormat) -> Result<()> {
    fs::write(path, encode_bits(&stream.bits, format)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.bytes().map(|b| b == b'1').collect()
    }

    #[test]
    fn splitmix_reference_outputs() {
        assert_eq!(SplitMix64::new(0).next_u64(), 0xe220a8397b1dcdaf);
        let mut g = SplitMix64::new(1);
        assert_eq!(g.next_u64(), 0x910a2dec89025cc1);
        assert_eq!(g.next_u64(), 0xbeeb8da1658eec67);
        assert_eq!(g.next_u64(), 0xf893a2eefb32555e);
    }

    #[test]
    fn fair_stream_pattern() {
        let spec = SourceSpec { p: Probability::rational(1, 2).unwrap(), n: 64, seed: 1 };
        let s = bernoulli_stream(&spec);
        assert_eq!(s.bits, bits("0001100010101011000011111100100011100000001000110011101101000100"));
        assert_eq!(s.count_ones(), 27);
        assert_eq!(bernoulli_stream(&spec), s);
    }

    #[test]
    fn biased_stream_pattern() {
        let spec = SourceSpec { p: Probability::rational(51, 100).unwrap(), n: 64, seed: 7 };
        let s = bernoulli_stream(&spec);
        assert_eq!(s.bits, bits("1100111111100000010001110011010111001011001111000001110111001101"));
    }

    #[test]
    fn fair_frequency_over_seeds() {
        let n = 1usize << 20;
        for seed in 1..=5 {
            let spec = SourceSpec { p: Probability::rational(1, 2).unwrap(), n, seed };
            let ones = bernoulli_stream(&spec).count_ones() as f64;
            let frac = ones / n as f64;
            assert!((frac - 0.5).abs() <= 5.0 / 2048.0, "seed {seed}: {frac}");
        }
    }

    #[test]
    fn decode_examples() {
        assert_eq!(decode_bits(b"0110", BitFormat::Ascii01, None).unwrap(), bits("0110"));
        assert_eq!(decode_bits(&[0xB4], BitFormat::Packed, None).unwrap(), bits("10110100"));
        assert_eq!(decode_bits(&[0xB4], BitFormat::Packed, Some(5)).unwrap(), bits("10110"));
    }

    #[test]
    fn decode_errors() {
        assert!(matches!(
            decode_bits(b"01x1", BitFormat::Ascii01, None),
            Err(Error::BadAsciiBit { byte: b'x', offset: 2 })
        ));
        assert!(matches!(
            decode_bits(b"011\n", BitFormat::Ascii01, None),
            Err(Error::BadAsciiBit { byte: b'\n', offset: 3 })
        ));
        assert!(matches!(
            decode_bits(&[0xFF], BitFormat::Packed, Some(9)),
            Err(Error::NotEnoughBits { requested: 9, available: 8 })
        ));
    }

    #[test]
    fn format_round_trip_all_small_lengths() {
        let mut rng = SplitMix64::new(42);
        for len in 0..=64 {
            let v: Vec<bool> = (0..len).map(|_| rng.next_u64() & 1 == 1).collect();
            for fmt in [BitFormat::Ascii01, BitFormat::Packed] {
                let bytes = encode_bits(&v, fmt);
                assert_eq!(decode_bits(&bytes, fmt, Some(len)).unwrap(), v, "len {len} {fmt}");
            }
            if len % 8 == 0 {
                assert_eq!(decode_bits(&encode_bits(&v, BitFormat::Packed), BitFormat::Packed, None).unwrap(), v);
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let stream = BitStream::from_bits(bits("10110100110"));
        for fmt in [BitFormat::Ascii01, BitFormat::Packed] {
            let path = dir.path().join(format!("bits.{fmt}"));
            write_bits(&stream, &path, fmt).unwrap();
            let back = read_bits(&path, fmt, Some(stream.len())).unwrap();
            assert_eq!(back.bits, stream.bits);
            assert_eq!(back.origin, Origin::File { path: path.clone(), format: fmt });
        }
        assert!(matches!(read_bits(&dir.path().join("missing"), BitFormat::Packed, None), Err(Error::Io { .. })));
    }

    #[test]
    fn format_names() {
        assert_eq!("ascii01".parse::<BitFormat>().unwrap(), BitFormat::Ascii01);
        assert_eq!("packed".parse::<BitFormat>().unwrap(), BitFormat::Packed);
        assert!("hex".parse::<BitFormat>().is_err());
    }
}
