//! Sanity tests for extractor output: a monobit z-test and a serial
//! chi-square test on non-overlapping bit pairs.

use std::fmt;

use crate::error::{Error, Result};

pub const Z_THRESHOLD: f64 = 4.5;
pub const CHI_SQUARE_THRESHOLD: f64 = 20.0;
pub const Z_MIN_BITS: usize = 100;
pub const SERIAL_MIN_BITS: usize = 400;

#[derive(Clone, Debug, PartialEq)]
pub struct TestResult {
    pub name: &'static str,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub n: usize,
}

impl fmt::Display for TestResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "test={} stat={:.6} pass={}", self.name, self.statistic, self.pass)
    }
}

/// `(ones - n/2) / sqrt(n/4)`, without the sample-size check.
pub fn z_statistic(bits: &[bool]) -> f64 {
    let n = bits.len() as f64;
    let ones = bits.iter().filter(|&&b| b).count() as f64;
    (ones - n / 2.0) / (n / 4.0).sqrt()
}

pub fn bias_z_test(bits: &[bool], threshold: f64) -> Result<TestResult> {
    if bits.len() < Z_MIN_BITS {
        return Err(Error::SampleTooSmall { test: "bias_z", min: Z_MIN_BITS, got: bits.len() });
    }
    let statistic = z_statistic(bits);
    Ok(TestResult { name: "bias_z", statistic, threshold, pass: statistic.abs() <= threshold, n: bits.len() })
}

/// Pearson statistic over the four cells `00, 01, 10, 11` of
/// non-overlapping pairs, without the sample-size check.
pub fn serial_statistic(bits: &[bool]) -> f64 {
    let mut cells = [0u64; 4];
    for pair in bits.chunks_exact(2) {
        cells[(usize::from(pair[0]) << 1) | usize::from(pair[1])] += 1;
    }
    let expected = (bits.len() / 2) as f64 / 4.0;
    cells.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum()
}

pub fn serial_chi_square(bits: &[bool], threshold: f64) -> Result<TestResult> {
    if bits.len() < SERIAL_MIN_BITS {
        return Err(Error::SampleTooSmall { test: "serial_chi2", min: SERIAL_MIN_BITS, got: bits.len() });
    }
    let statistic = serial_statistic(bits);
    Ok(TestResult { name: "serial_chi2", statistic, threshold, pass: statistic <= threshold, n: bits.len() })
}

/// Runs both tests with their default thresholds.
pub fn run_suite(bits: &[bool]) -> Result<[TestResult; 2]> {
    Ok([bias_z_test(bits, Z_THRESHOLD)?, serial_chi_square(bits, CHI_SQUARE_THRESHOLD)?])
}
