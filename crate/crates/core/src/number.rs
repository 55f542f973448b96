//! Numeric backends for probability computations.
//!
//! Two implementations of [`Number`] exist: exact rationals ([`BigRational`])
//! and fixed-precision binary floats ([`Float`]). Analysis routines are
//! generic over the trait so the same code yields exact identities for
//! rational `p` and high-precision approximations for irrational `p`.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

const RM: RoundingMode = RoundingMode::ToEven;

/// Arithmetic needed by the analyzer.
///
/// Constructors take `&self` so a float backend can propagate its working
/// precision to the values it creates.
pub trait Number: Clone + fmt::Debug + Send + Sync {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn u64_like(&self, v: u64) -> Self;

    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn div(&self, rhs: &Self) -> Self;
    fn compare(&self, rhs: &Self) -> Ordering;

    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;
    /// Decimal rendering rounded to `digits` significant digits.
    fn to_decimal(&self, digits: usize) -> String;

    fn powu(&self, mut exp: u64) -> Self {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    fn complement(&self) -> Self {
        self.one_like().sub(self)
    }

    /// `Σ weight(i+j) · (p^i q^j [+ p^j q^i])` over `(i, j)` in `terms`,
    /// with `q = 1 - p`. The bracketed term is added when `mirrored`.
    fn sum_monomials(
        p: &Self,
        terms: &[(u32, u32)],
        mirrored: bool,
        weight: &dyn Fn(u32) -> u64,
    ) -> Self {
        let q = p.complement();
        let max = terms.iter().map(|&(i, j)| i.max(j)).max().unwrap_or(0) as usize;
        let p_pow = power_table(p, max);
        let q_pow = power_table(&q, max);
        let mut acc = p.zero_like();
        for &(i, j) in terms {
            let (i, j) = (i as usize, j as usize);
            let mut term = p_pow[i].mul(&q_pow[j]);
            if mirrored {
                term = term.add(&p_pow[j].mul(&q_pow[i]));
            }
            let w = weight((i + j) as u32);
            if w != 1 {
                term = term.mul(&p.u64_like(w));
            }
            acc = acc.add(&term);
        }
        acc
    }
}

/// `[x^0, x^1, ..., x^max]`.
pub fn power_table<N: Number>(x: &N, max: usize) -> Vec<N> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(x.one_like());
    for n in 1..=max {
        let next = out[n - 1].mul(x);
        out.push(next);
    }
    out
}

impl Number for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }

    fn one_like(&self) -> Self {
        BigRational::one()
    }

    fn u64_like(&self, v: u64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn div(&self, rhs: &Self) -> Self {
        self / rhs
    }

    fn compare(&self, rhs: &Self) -> Ordering {
        self.cmp(rhs)
    }

    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn to_decimal(&self, digits: usize) -> String {
        let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as usize + 64;
        Float::from_rational(self, bits).to_decimal(digits)
    }

    /// Every monomial `p^i q^j` shares the denominator `d^(i+j)` where
    /// `p = a/d`, `q = b/d`. Terms are grouped by degree and folded with
    /// Horner's rule in `d`, so the whole sum costs one normalization.
    fn sum_monomials(
        p: &Self,
        terms: &[(u32, u32)],
        mirrored: bool,
        weight: &dyn Fn(u32) -> u64,
    ) -> Self {
        if terms.is_empty() {
            return BigRational::zero();
        }
        let d = p.denom().clone();
        let a = p.numer().clone();
        let b = &d - &a;
        let max = terms.iter().map(|&(i, j)| i.max(j)).max().unwrap_or(0) as usize;
        let a_pow = int_power_table(&a, max);
        let b_pow = int_power_table(&b, max);

        let mut by_degree: BTreeMap<u32, BigInt> = BTreeMap::new();
        for &(i, j) in terms {
            let (iu, ju) = (i as usize, j as usize);
            let mut term = &a_pow[iu] * &b_pow[ju];
            if mirrored {
                term += &a_pow[ju] * &b_pow[iu];
            }
            let w = weight(i + j);
            if w != 1 {
                term *= BigInt::from(w);
            }
            *by_degree.entry(i + j).or_insert_with(BigInt::zero) += term;
        }

        // Σ sum_y / d^y = (Σ sum_y · d^(top-y)) / d^top, folded from the
        // lowest degree upwards.
        let mut acc = BigInt::zero();
        let mut cursor = *by_degree.keys().next().unwrap();
        for (&deg, sum) in &by_degree {
            if deg > cursor {
                acc *= num_traits::pow(d.clone(), (deg - cursor) as usize);
            }
            acc += sum;
            cursor = deg;
        }
        BigRational::new(acc, num_traits::pow(d, cursor as usize))
    }
}

fn int_power_table(x: &BigInt, max: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(max + 1);
    out.push(BigInt::one());
    for n in 1..=max {
        let next = &out[n - 1] * x;
        out.push(next);
    }
    out
}

static CONSTS: Mutex<Option<Consts>> = Mutex::new(None);

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    let mut guard = CONSTS.lock().unwrap_or_else(|e| e.into_inner());
    let cc = guard.get_or_insert_with(|| Consts::new().expect("astro-float constant cache"));
    f(cc)
}

/// Mantissa bits below one machine word are raised to this.
pub const MIN_PRECISION: usize = 64;

/// Binary floating point with a fixed mantissa precision in bits.
#[derive(Clone)]
pub struct Float {
    value: BigFloat,
    precision: usize,
}

impl Float {
    pub fn from_u64(v: u64, precision: usize) -> Self {
        let precision = precision.max(MIN_PRECISION);
        Float { value: BigFloat::from_u64(v, precision), precision }
    }

    pub fn from_ratio(num: u64, den: u64, precision: usize) -> Self {
        Float::from_u64(num, precision).div(&Float::from_u64(den, precision))
    }

    pub fn from_bigint(v: &BigInt, precision: usize) -> Self {
        let precision = precision.max(MIN_PRECISION);
        let value = with_consts(|cc| BigFloat::parse(&v.to_string(), Radix::Dec, precision, RM, cc));
        Float { value, precision }
    }

    pub fn from_rational(v: &BigRational, precision: usize) -> Self {
        Float::from_bigint(v.numer(), precision).div(&Float::from_bigint(v.denom(), precision))
    }

    /// Parses a decimal literal such as `3.1022` or `1e-9`.
    pub fn parse_decimal(s: &str, precision: usize) -> Option<Self> {
        let precision = precision.max(MIN_PRECISION);
        let value = with_consts(|cc| BigFloat::parse(s, Radix::Dec, precision, RM, cc));
        if value.is_nan() {
            None
        } else {
            Some(Float { value, precision })
        }
    }

    pub fn sqrt(&self) -> Self {
        Float { value: self.value.sqrt(self.precision, RM), precision: self.precision }
    }

    pub fn exp(&self) -> Self {
        let value = with_consts(|cc| self.value.exp(self.precision, RM, cc));
        Float { value, precision: self.precision }
    }

    pub fn abs(&self) -> Self {
        Float { value: self.value.abs(), precision: self.precision }
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn is_nan(&self) -> bool {
        self.value.is_nan()
    }

    /// Largest integer not above a non-negative value.
    pub fn floor_to_bigint(&self) -> BigInt {
        let (neg, digits, exp) = self.decimal_digits();
        assert!(!neg, "floor_to_bigint on a negative value");
        if exp <= 0 {
            return BigInt::zero();
        }
        let exp = exp as usize;
        let mut text: String = digits.iter().take(exp).map(|d| char::from(b'0' + d)).collect();
        while text.len() < exp {
            text.push('0');
        }
        text.parse().expect("decimal digits")
    }

    /// Decimal mantissa digits and exponent: value = 0.d1d2d3... * 10^exp.
    fn decimal_digits(&self) -> (bool, Vec<u8>, i64) {
        let text = with_consts(|cc| self.value.format(Radix::Dec, RM, cc))
            .unwrap_or_else(|_| "0".to_string());
        parse_scientific(&text)
    }
}

/// Splits astro-float's scientific output (`-3.14e+2`) into
/// `(negative, digits, exponent)` with value `0.digits * 10^exponent`.
fn parse_scientific(text: &str) -> (bool, Vec<u8>, i64) {
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(pos) => (&body[..pos], body[pos + 1..].parse::<i64>().unwrap_or(0)),
        None => (body, 0),
    };
    let int_len = mant.find('.').unwrap_or(mant.len()) as i64;
    let mut digits: Vec<u8> = mant.bytes().filter(u8::is_ascii_digit).map(|b| b - b'0').collect();
    let lead = digits.iter().take_while(|&&d| d == 0).count();
    if lead == digits.len() {
        return (false, vec![0], 0);
    }
    digits.drain(..lead);
    (neg, digits, exp + int_len - lead as i64)
}

/// Rounds `0.digits * 10^exp` to `sig` significant digits and renders it in
/// fixed notation for moderate exponents, scientific otherwise.
fn render_decimal(neg: bool, mut digits: Vec<u8>, mut exp: i64, sig: usize) -> String {
    let sig = sig.max(1);
    if digits == [0] {
        return "0".to_string();
    }
    if digits.len() > sig {
        let round_up = digits[sig] >= 5;
        digits.truncate(sig);
        if round_up {
            let mut i = sig;
            loop {
                if i == 0 {
                    digits.insert(0, 1);
                    digits.truncate(sig);
                    exp += 1;
                    break;
                }
                i -= 1;
                if digits[i] == 9 {
                    digits[i] = 0;
                } else {
                    digits[i] += 1;
                    break;
                }
            }
        }
    }
    while digits.len() > 1 && digits.last() == Some(&0) {
        digits.pop();
    }
    let text: String = digits.iter().map(|d| char::from(b'0' + d)).collect();
    let sign = if neg { "-" } else { "" };
    if (-4..=15).contains(&exp) {
        if exp <= 0 {
            format!("{sign}0.{}{text}", "0".repeat((-exp) as usize))
        } else if exp as usize >= text.len() {
            format!("{sign}{text}{}", "0".repeat(exp as usize - text.len()))
        } else {
            let (int, frac) = text.split_at(exp as usize);
            format!("{sign}{int}.{frac}")
        }
    } else {
        let (head, tail) = text.split_at(1);
        let dot = if tail.is_empty() { String::new() } else { format!(".{tail}") };
        format!("{sign}{head}{dot}e{}", exp - 1)
    }
}

impl Number for Float {
    fn zero_like(&self) -> Self {
        Float::from_u64(0, self.precision)
    }

    fn one_like(&self) -> Self {
        Float::from_u64(1, self.precision)
    }

    fn u64_like(&self, v: u64) -> Self {
        Float::from_u64(v, self.precision)
    }

    fn add(&self, rhs: &Self) -> Self {
        Float { value: self.value.add(&rhs.value, self.precision, RM), precision: self.precision }
    }

    fn sub(&self, rhs: &Self) -> Self {
        Float { value: self.value.sub(&rhs.value, self.precision, RM), precision: self.precision }
    }

    fn mul(&self, rhs: &Self) -> Self {
        Float { value: self.value.mul(&rhs.value, self.precision, RM), precision: self.precision }
    }

    fn div(&self, rhs: &Self) -> Self {
        Float { value: self.value.div(&rhs.value, self.precision, RM), precision: self.precision }
    }

    fn compare(&self, rhs: &Self) -> Ordering {
        match self.value.cmp(&rhs.value) {
            Some(c) if c < 0 => Ordering::Less,
            Some(0) => Ordering::Equal,
            Some(_) => Ordering::Greater,
            None => Ordering::Equal,
        }
    }

    fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    fn to_f64(&self) -> f64 {
        let (neg, digits, exp) = self.decimal_digits();
        let text = render_decimal(neg, digits, exp, 20);
        text.parse().unwrap_or(f64::NAN)
    }

    fn to_decimal(&self, digits: usize) -> String {
        let (neg, d, exp) = self.decimal_digits();
        render_decimal(neg, d, exp, digits)
    }

    fn powu(&self, exp: u64) -> Self {
        Float { value: self.value.powi(exp as usize, self.precision, RM), precision: self.precision }
    }
}

impl fmt::Debug for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Float({}, {} bits)", self.to_decimal(30), self.precision)
    }
}

impl fmt::Display for Float {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(((self.precision as f64) / std::f64::consts::LOG2_10) as usize);
        f.write_str(&self.to_decimal(digits))
    }
}

/// `|a - b| <= tol` for floats.
pub fn close(a: &Float, b: &Float, tol: &Float) -> bool {
    a.sub(b).abs().compare(tol) != Ordering::Greater
}
