//! Command-line front end.
//!
//! Every command writes its primary output to a caller-supplied writer so
//! the binary and the tests drive the same code.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;

use crate::analyzer::{self, height_table, pair_lists, HeightRow};
use crate::bitsource::{encode_bits, read_bits, BernoulliBits, BitFormat, SourceSpec};
use crate::codebook::{build_codebook, build_length_index, Codebook, Label, LengthIndex};
use crate::extractor::{mean_depth_f64, ExtractedBit, Extractor};
use crate::number::{Number, MIN_PRECISION};
use crate::prob::Probability;
use crate::stats;

#[derive(Debug, Parser)]
#[command(name = "vntree", version, about = "Pruned-tree Von Neumann extractor and its cost analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the codebook of T_k
    Build(BuildArgs),
    /// Extract unbiased bits from a file or a simulated source
    Extract(ExtractArgs),
    /// Tabulate the expected height E(Y_k)
    Analyze(AnalyzeArgs),
    /// Measure output length and mean depth over a (p, seed) grid
    Bench(BenchArgs),
    /// Check codebook invariants and output statistics
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub k: u32,
    /// Output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long, conflicts_with = "codebook", required_unless_present = "codebook")]
    pub k: Option<u32>,
    /// Codebook file produced by `build`
    #[arg(long)]
    pub codebook: Option<PathBuf>,
    /// Input bit file
    #[arg(long = "in", conflicts_with = "simulate", required_unless_present = "simulate")]
    pub input: Option<PathBuf>,
    /// Simulated source as `p,n,seed`
    #[arg(long)]
    pub simulate: Option<String>,
    /// Bit format of the input file and of the output
    #[arg(long, default_value = "ascii01")]
    pub format: BitFormat,
    /// Number of valid bits in a packed input file
    #[arg(long)]
    pub nbits: Option<usize>,
    /// Output bit file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report file (stderr when omitted)
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Rational,
    Float,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Bias: decimal, `a/b`, `1/sqrt2` or `1-1/e`
    #[arg(long)]
    pub p: Probability,
    #[arg(long, default_value_t = 10)]
    pub kmax: u32,
    /// Mantissa bits in float mode
    #[arg(long, default_value_t = 256)]
    pub precision: usize,
    #[arg(long, value_enum, default_value_t = Mode::Float)]
    pub mode: Mode,
    /// Significant digits for E(Y_k)
    #[arg(long, default_value_t = 8)]
    pub digits: usize,
    /// Significant digits for the delta column
    #[arg(long, default_value_t = 6)]
    pub delta_digits: usize,
    /// Also write the distribution of Y_kmax as CSV
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated list of biases
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<Probability>,
    /// Input bits per run (integer or `2^e`)
    #[arg(long, value_parser = parse_count)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub k: u32,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub seeds: Vec<u64>,
    /// CSV output file (stdout when omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Largest tree order to check
    #[arg(long, default_value_t = 8)]
    pub kmax: u32,
    /// Audit this codebook file instead of freshly built ones
    #[arg(long)]
    pub codebook: Option<PathBuf>,
}

/// Accepts `1048576` or `2^20`.
pub fn parse_count(s: &str) -> Result<usize, String> {
    if let Some((base, exp)) = s.split_once('^') {
        let base: usize = base.trim().parse().map_err(|_| format!("bad count {s:?}"))?;
        let exp: u32 = exp.trim().parse().map_err(|_| format!("bad count {s:?}"))?;
        return base.checked_pow(exp).ok_or_else(|| format!("count {s:?} overflows"));
    }
    s.trim().parse().map_err(|_| format!("bad count {s:?}"))
}

/// Parses `p,n,seed`.
pub fn parse_simulation(s: &str) -> anyhow::Result<SourceSpec> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        bail!("--simulate expects p,n,seed, got {s:?}");
    }
    let p = Probability::from_str(parts[0])?;
    let n = parse_count(parts[1]).map_err(anyhow::Error::msg)?;
    let seed = parts[2].trim().parse().with_context(|| format!("bad seed {:?}", parts[2]))?;
    Ok(SourceSpec { p, n, seed })
}

/// Runs a parsed command. Returns `false` when a check failed.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<bool> {
    match cli.command {
        Command::Build(a) => cmd_build(&a, out).map(|_| true),
        Command::Extract(a) => cmd_extract(&a, out, err).map(|_| true),
        Command::Analyze(a) => cmd_analyze(&a, out, err).map(|_| true),
        Command::Bench(a) => cmd_bench(&a, out).map(|_| true),
        Command::Selftest(a) => cmd_selftest(&a, out),
    }
}

fn open_out(path: &Option<PathBuf>) -> anyhow::Result<Option<BufWriter<File>>> {
    path.as_ref()
        .map(|p| File::create(p).map(BufWriter::new).with_context(|| format!("creating {}", p.display())))
        .transpose()
}

pub fn cmd_build(args: &BuildArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let cb = build_codebook(args.k)?;
    match open_out(&args.out)? {
        Some(mut file) => cb.write_to(&mut file)?,
        None => cb.write_to(&mut *out)?,
    }
    Ok(())
}

fn load_codebook(path: &PathBuf) -> anyhow::Result<Codebook> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(Codebook::read_from(BufReader::new(file))?)
}

pub fn cmd_extract(args: &ExtractArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    let codebook = match (&args.codebook, args.k) {
        (Some(path), _) => load_codebook(path)?,
        (None, Some(k)) => build_codebook(k)?,
        (None, None) => bail!("one of --k or --codebook is required"),
    };
    let index = build_length_index(codebook);
    let mut extractor = Extractor::new(&index);
    let mut emitted: Vec<ExtractedBit> = Vec::new();
    match (&args.input, &args.simulate) {
        (Some(path), _) => {
            let stream = read_bits(path, args.format, args.nbits)?;
            extractor.feed(stream.bits, &mut emitted)?;
        }
        (None, Some(sim)) => {
            let spec = parse_simulation(sim)?;
            extractor.feed(BernoulliBits::new(&spec.p, spec.seed).take(spec.n), &mut emitted)?;
        }
        (None, None) => bail!("one of --in or --simulate is required"),
    }
    let report = extractor.finish();
    let bits: Vec<bool> = emitted.iter().map(ExtractedBit::bit).collect();
    let encoded = encode_bits(&bits, args.format);
    match open_out(&args.out)? {
        Some(mut file) => {
            file.write_all(&encoded)?;
            file.flush()?;
        }
        None => out.write_all(&encoded)?,
    }
    let text = report.to_key_values();
    match open_out(&args.report)? {
        Some(mut file) => {
            file.write_all(text.as_bytes())?;
            file.flush()?;
        }
        None => err.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Bits of mantissa needed to print `digits` significant digits of a value
/// below `magnitude`, plus guard bits.
fn bits_needed(digits: usize, magnitude: f64) -> usize {
    let int_bits = magnitude.abs().max(1.0).log2().ceil() as usize;
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + int_bits.min(64) + 16
}

fn write_rows<N: Number>(
    rows: &[HeightRow<N>],
    args: &AnalyzeArgs,
    precision: Option<usize>,
    out: &mut dyn Write,
) -> anyhow::Result<()> {
    writeln!(out, "k\tE(Y_k)\tdelta")?;
    for row in rows {
        let value = row.value.to_decimal(args.digits);
        let delta = row.delta.as_ref().map_or_else(|| "-".to_string(), |d| d.to_decimal(args.delta_digits));
        let short = precision.is_some_and(|bits| bits_needed(args.digits, row.value.to_f64()) > bits);
        if short {
            writeln!(out, "{}\t{value}\t{delta}\twarning=insufficient-precision", row.k)?;
        } else {
            writeln!(out, "{}\t{value}\t{delta}", row.k)?;
        }
    }
    Ok(())
}

fn write_distribution<N: Number>(p: &N, kmax: u32, path: &PathBuf, digits: usize) -> anyhow::Result<()> {
    let lists = pair_lists(kmax)?;
    let dist = analyzer::depth_distribution(lists.last(), p);
    let mut file = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    writeln!(file, "depth,probability")?;
    for (y, prob) in dist {
        writeln!(file, "{y},{}", prob.to_decimal(digits))?;
    }
    file.flush()?;
    Ok(())
}

pub fn cmd_analyze(args: &AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<()> {
    if args.precision < 32 {
        bail!("--precision must be at least 32 bits");
    }
    match args.mode {
        Mode::Rational => {
            let p = args
                .p
                .as_rational()
                .ok_or_else(|| crate::Error::IrrationalInExactMode(args.p.to_string()))?
                .clone();
            let rows = height_table(&p, args.kmax)?;
            write_rows(&rows, args, None, out)?;
            if let Some(path) = &args.csv {
                write_distribution(&p, args.kmax, path, args.digits)?;
            }
        }
        Mode::Float => {
            let p = args.p.to_float(args.precision);
            let rows = height_table(&p, args.kmax)?;
            write_rows(&rows, args, Some(args.precision.max(MIN_PRECISION)), out)?;
            if rows.iter().any(|r| bits_needed(args.digits, r.value.to_f64()) > args.precision.max(MIN_PRECISION)) {
                writeln!(err, "warning: {} bits cannot carry {} significant digits", args.precision, args.digits)?;
            }
            if let Some(path) = &args.csv {
                write_distribution(&p, args.kmax, path, args.digits)?;
            }
        }
    }
    Ok(())
}

/// One grid point of a benchmark run.
#[derive(Clone, Debug)]
pub struct BenchRecord {
    pub p: Probability,
    pub seed: u64,
    pub input_len: u64,
    pub output_len: u64,
    pub elapsed_ms: f64,
    pub mean_depth: f64,
}

impl BenchRecord {
    pub const CSV_HEADER: &'static str = "p,seed,input_len,output_len,elapsed_ms,mean_depth";

    pub fn to_csv(&self) -> String {
        let depth = if self.output_len == 0 { "nan".to_string() } else { format!("{:.6}", self.mean_depth) };
        format!("{},{},{},{},{:.3},{depth}", self.p, self.seed, self.input_len, self.output_len, self.elapsed_ms)
    }
}

/// Extracts from `n` simulated bits and returns the record plus the emitted bits.
pub fn bench_point(p: &Probability, n: usize, seed: u64, index: &LengthIndex) -> anyhow::Result<(BenchRecord, Vec<bool>)> {
    let source: Vec<bool> = BernoulliBits::new(p, seed).take(n).collect();
    let mut extractor = Extractor::new(index);
    let mut emitted = Vec::with_capacity(n / 2);
    let start = Instant::now();
    extractor.feed(source, &mut emitted)?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let report = extractor.finish();
    let record = BenchRecord {
        p: p.clone(),
        seed,
        input_len: report.bits_consumed,
        output_len: report.bits_emitted,
        elapsed_ms,
        mean_depth: mean_depth_f64(&report).unwrap_or(f64::NAN),
    };
    Ok((record, emitted.iter().map(ExtractedBit::bit).collect()))
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> anyhow::Result<()> {
    let index = build_length_index(build_codebook(args.k)?);
    let mut file = open_out(&args.out)?;
    let sink: &mut dyn Write = match file.as_mut() {
        Some(f) => f,
        None => out,
    };
    writeln!(sink, "{}", BenchRecord::CSV_HEADER)?;
    for p in &args.p {
        for &seed in &args.seeds {
            let (record, _) = bench_point(p, args.n, seed, &index)?;
            writeln!(sink, "{}", record.to_csv())?;
        }
    }
    sink.flush()?;
    Ok(())
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Rational biases at which exact identities are checked.
pub fn identity_biases() -> [BigRational; 4] {
    [rat(1, 3), rat(1, 2), rat(51, 100), rat(9, 10)]
}

fn report_check(out: &mut dyn Write, name: &str, k: u32, pass: bool, detail: &str) -> anyhow::Result<bool> {
    if detail.is_empty() {
        writeln!(out, "check={name} k={k} pass={pass}")?;
    } else {
        writeln!(out, "check={name} k={k} pass={pass} detail={detail}")?;
    }
    Ok(pass)
}

/// Runs the structural checks on one codebook. Returns `true` when all pass.
pub fn check_codebook(cb: &Codebook, out: &mut dyn Write) -> anyhow::Result<bool> {
    let k = cb.k();
    let violations = cb.audit();
    let mut ok = report_check(
        out,
        "structure",
        k,
        violations.is_empty(),
        &violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "),
    )?;
    let one = rat(1, 1);
    let complete = identity_biases().iter().all(|p| cb.total_mass(p) == one);
    ok &= report_check(out, "completeness", k, complete, "")?;
    let balanced = identity_biases().iter().all(|p| cb.label_mass(Label::H, p) == cb.label_mass(Label::T, p));
    ok &= report_check(out, "balance", k, balanced, "")?;
    Ok(ok)
}

/// T-side `(ones, zeros)` multiset of the codebook equals `L_k`.
pub fn pairs_match_codebook(cb: &Codebook) -> anyhow::Result<bool> {
    let lists = pair_lists(cb.k())?;
    let mut from_codebook: HashMap<(u32, u32), i64> = HashMap::new();
    for cw in cb.entries().iter().filter(|c| c.label == Label::T) {
        *from_codebook.entry(cw.exponents()).or_insert(0) += 1;
    }
    for pair in lists.last() {
        *from_codebook.entry((pair.i, pair.j)).or_insert(0) -= 1;
    }
    Ok(from_codebook.values().all(|&c| c == 0))
}

pub fn cmd_selftest(args: &SelftestArgs, out: &mut dyn Write) -> anyhow::Result<bool> {
    if let Some(path) = &args.codebook {
        let cb = load_codebook(path)?;
        let mut ok = check_codebook(&cb, out)?;
        ok &= report_check(out, "pairs", cb.k(), pairs_match_codebook(&cb)?, "")?;
        writeln!(out, "selftest pass={ok}")?;
        return Ok(ok);
    }

    let mut ok = true;
    for k in 1..=args.kmax {
        let cb = build_codebook(k)?;
        ok &= check_codebook(&cb, out)?;
        ok &= report_check(out, "pairs", k, pairs_match_codebook(&cb)?, "")?;

        let lists = pair_lists(k)?;
        let mut identity = true;
        let mut cross = true;
        for p in identity_biases() {
            let q = rat(1, 1) - &p;
            let h = 1u64 << k;
            let gamma = analyzer::gamma_rec(&p, k)?;
            identity &= &gamma + &gamma + p.powu(h) + q.powu(h) == rat(1, 1);
            cross &= analyzer::gamma_from_pairs(lists.last(), &p) == gamma;
        }
        ok &= report_check(out, "gamma_identity", k, identity, "")?;
        ok &= report_check(out, "gamma_cross", k, cross, "")?;
    }

    let k = args.kmax.clamp(1, 10);
    let index = build_length_index(build_codebook(k)?);
    let p = Probability::rational(21, 40)?;
    let (_, emitted) = bench_point(&p, 1 << 18, 1, &index)?;
    for result in stats::run_suite(&emitted)? {
        writeln!(out, "{result}")?;
        ok &= result.pass;
    }
    // Negative control: the raw biased source must be rejected.
    let raw: Vec<bool> = BernoulliBits::new(&p, 1).take(1 << 18).collect();
    let control = stats::bias_z_test(&raw, stats::Z_THRESHOLD)?;
    let rejected = !control.pass;
    writeln!(out, "test=control_raw_bias stat={:.6} pass={rejected}", control.statistic)?;
    ok &= rejected;

    writeln!(out, "selftest pass={ok}")?;
    Ok(ok)
}
