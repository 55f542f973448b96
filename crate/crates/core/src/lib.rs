//! Iterated, pruned Von Neumann extraction.
//!
//! Turns an i.i.d. biased bit stream into i.i.d. unbiased bits by decoding
//! it against the prefix-free codebook of a pruned tree `T_k`, and computes
//! the exact expected number of source bits spent per output bit.
//!
//! ```
//! use vntree::{build_codebook, build_length_index, extract_stream};
//!
//! let index = build_length_index(build_codebook(2)?);
//! let (bits, report) = extract_stream([false, false, true, true, false], &index)?;
//! assert_eq!(bits.len(), 2);
//! assert_eq!(report.leftover_len, 0);
//! # Ok::<(), vntree::Error>(())
//! ```

pub mod analyzer;
pub mod bits;
pub mod bitsource;
pub mod cli;
pub mod codebook;
pub mod error;
pub mod extractor;
pub mod number;
pub mod prob;
pub mod stats;

pub use analyzer::{
    depth_distribution, expected_height, expected_height_limit, gamma_from_pairs, gamma_rec,
    geometric_expectation, pair_lists, ExponentPair, PairLists, PrecisionConfig, PrecisionMode,
};
pub use bits::BitString;
pub use bitsource::{bernoulli_stream, read_bits, write_bits, BitFormat, BitStream, SourceSpec, SplitMix64};
pub use codebook::{
    build_codebook, build_length_index, codeword_probability, complement, Codebook, Codeword, Label,
    LengthIndex,
};
pub use error::{Error, Result};
pub use extractor::{extract_stream, mean_depth, DecodeEvent, ExtractedBit, ExtractionReport, Extractor};
pub use number::{Float, Number};
pub use prob::Probability;
pub use stats::{bias_z_test, serial_chi_square, TestResult};
