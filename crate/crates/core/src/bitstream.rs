//! Random bits, lazily expanded uniform variates, and cost accounting.
//!
//! A uniform `x ∈ [0,1]` is never materialised: its binary digits are drawn
//! one at a time and only as long as a comparison against a threshold needs
//! them. Thresholds are dyadic rationals ([`DyadicBound`]) or exact
//! rationals.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rug::float::Round;
use rug::{Float, Integer, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deterministic source of unbiased bits.
#[derive(Clone, Debug)]
pub struct BitSource {
    seed: u64,
    rng: ChaCha8Rng,
    buf: u64,
    left: u32,
    bits_emitted: u64,
    digit_queries: u64,
}

impl BitSource {
    pub fn new(seed: u64) -> BitSource {
        BitSource {
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            buf: 0,
            left: 0,
            bits_emitted: 0,
            digit_queries: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Total bits handed out so far.
    pub fn bits_emitted(&self) -> u64 {
        self.bits_emitted
    }

    /// Threshold digits examined by lazy comparisons drawing from this source.
    pub fn digit_queries(&self) -> u64 {
        self.digit_queries
    }

    pub(crate) fn note_digit_query(&mut self) {
        self.digit_queries += 1;
    }

    #[inline]
    pub fn next_bit(&mut self) -> u8 {
        if self.left == 0 {
            self.buf = self.rng.next_u64();
            self.left = 64;
        }
        let b = (self.buf >> 63) as u8;
        self.buf <<= 1;
        self.left -= 1;
        self.bits_emitted += 1;
        b
    }

    /// `count <= 64` bits, most significant first.
    pub fn next_bits(&mut self, count: u32) -> u64 {
        assert!(count <= 64);
        let mut v = 0u64;
        for _ in 0..count {
            v = (v << 1) | self.next_bit() as u64;
        }
        v
    }
}

/// Known binary prefix of a uniform variate in `[0,1]`.
///
/// With `depth` digits known, `x` lies in `[value·2^-depth, (value+1)·2^-depth)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LazyUniform {
    value: Integer,
    depth: u32,
}

impl LazyUniform {
    pub fn new() -> LazyUniform {
        LazyUniform::default()
    }

    /// Prefix built from explicit digits (first digit = weight 1/2).
    pub fn from_bits(bits: &[u8]) -> LazyUniform {
        let mut x = LazyUniform::new();
        for &b in bits {
            x.push(b);
        }
        x
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn push(&mut self, bit: u8) {
        self.value <<= 1;
        if bit != 0 {
            self.value += 1;
        }
        self.depth += 1;
    }

    /// Digit `i` (0-based, weight `2^-(i+1)`).
    pub fn bit(&self, i: u32) -> u8 {
        assert!(i < self.depth);
        self.value.get_bit(self.depth - 1 - i) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.depth).map(|i| self.bit(i)).collect()
    }

    /// Left end of the prefix interval.
    pub fn lower_rational(&self) -> Rational {
        Rational::from((self.value.clone(), Integer::from(1) << self.depth))
    }

    /// Right end of the prefix interval.
    pub fn upper_rational(&self) -> Rational {
        Rational::from((
            Integer::from(&self.value + 1u32),
            Integer::from(1) << self.depth,
        ))
    }

    /// Draw one more digit.
    pub fn extend(&mut self, src: &mut BitSource) {
        let b = src.next_bit();
        self.push(b);
    }
}

/// Rounding direction carried by a dyadic threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Down,
    Up,
}

/// Dyadic rational `mantissa · 2^exponent`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DyadicBound {
    mantissa: Integer,
    exponent: i32,
    direction: Direction,
}

impl DyadicBound {
    pub fn new(mantissa: Integer, exponent: i32, direction: Direction) -> DyadicBound {
        DyadicBound {
            mantissa,
            exponent,
            direction,
        }
    }

    pub fn zero(direction: Direction) -> DyadicBound {
        DyadicBound::new(Integer::new(), 0, direction)
    }

    pub fn one(direction: Direction) -> DyadicBound {
        DyadicBound::new(Integer::from(1), 0, direction)
    }

    /// Parse a binary fraction such as `"0.0111"`.
    pub fn from_binary_str(s: &str, direction: Direction) -> Result<DyadicBound> {
        let (int, frac) = s
            .split_once('.')
            .ok_or_else(|| Error::InvalidArgument(format!("not a binary fraction: {s}")))?;
        let mut m = Integer::new();
        for c in int.chars().chain(frac.chars()) {
            m <<= 1;
            match c {
                '0' => {}
                '1' => m += 1,
                _ => return Err(Error::InvalidArgument(format!("bad binary digit in {s}"))),
            }
        }
        Ok(DyadicBound::new(m, -(frac.len() as i32), direction))
    }

    /// Round `x` to at most `sig_bits` significant bits in `direction`.
    pub fn from_float(x: &Float, sig_bits: u32, direction: Direction) -> DyadicBound {
        assert!(x.is_finite());
        let round = match direction {
            Direction::Down => Round::Down,
            Direction::Up => Round::Up,
        };
        let (r, _) = Float::with_val_round(sig_bits.max(2), x, round);
        match r.to_integer_exp() {
            Some((m, e)) => DyadicBound::new(m, e, direction),
            None => DyadicBound::zero(direction),
        }
    }

    pub fn mantissa(&self) -> &Integer {
        &self.mantissa
    }

    pub fn exponent(&self) -> i32 {
        self.exponent
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Number of significant bits of the mantissa.
    pub fn significant_bits(&self) -> u32 {
        let m = Integer::from(self.mantissa.abs_ref());
        if m == 0 {
            return 0;
        }
        m.significant_bits() - m.find_one(0).unwrap_or(0)
    }

    pub fn to_rational(&self) -> Rational {
        if self.exponent >= 0 {
            Rational::from(Integer::from(&self.mantissa << self.exponent as u32))
        } else {
            Rational::from((
                self.mantissa.clone(),
                Integer::from(1) << (-self.exponent) as u32,
            ))
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_rational().to_f64()
    }

    /// `self` clamped to `[0, 1]`.
    pub fn clamp_unit(self) -> DyadicBound {
        let q = self.to_rational();
        if q < 0 {
            DyadicBound::zero(self.direction)
        } else if q > 1 {
            DyadicBound::one(self.direction)
        } else {
            self
        }
    }

    /// Order of `value·2^-depth` relative to this bound.
    fn cmp_scaled(&self, value: &Integer, depth: u32) -> Ordering {
        // value / 2^depth  vs  m · 2^e
        let e = self.exponent as i64;
        let d = depth as i64;
        let shift = d + e;
        if shift >= 0 {
            let rhs = Integer::from(&self.mantissa << shift as u32);
            value.cmp(&rhs)
        } else {
            let lhs = Integer::from(value << (-shift) as u32);
            lhs.cmp(&self.mantissa)
        }
    }
}

impl PartialOrd for DyadicBound {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.to_rational().cmp(&other.to_rational()))
    }
}

/// Outcome of comparing a lazy uniform against a pair of thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    /// `x < lower` for certain.
    Below,
    /// Unresolved at this level: the prefix interval sits inside
    /// `[lower, upper]`, or the digit budget ran out.
    Inside,
    /// `x > upper` for certain.
    Above,
}

/// Default digit budget of [`compare_lazy`].
pub const DEFAULT_MAX_EXTRA_BITS: u32 = 64;

/// Compare `x` against `[lower, upper]`, drawing digits of `x` only as needed.
pub fn compare_lazy(
    x: &mut LazyUniform,
    lower: &DyadicBound,
    upper: &DyadicBound,
    src: &mut BitSource,
    max_extra_bits: u32,
) -> Result<Comparison> {
    if lower.to_rational() > upper.to_rational() {
        return Err(Error::InvertedBounds);
    }
    let mut extra = 0u32;
    loop {
        src.note_digit_query();
        let hi = Integer::from(&x.value + 1u32);
        // prefix interval [v, v + 2^-d)
        if lower.cmp_scaled(&hi, x.depth) != Ordering::Greater {
            return Ok(Comparison::Below);
        }
        if upper.cmp_scaled(&x.value, x.depth) == Ordering::Greater {
            return Ok(Comparison::Above);
        }
        if lower.cmp_scaled(&x.value, x.depth) != Ordering::Less
            && upper.cmp_scaled(&hi, x.depth) != Ordering::Greater
        {
            return Ok(Comparison::Inside);
        }
        if extra >= max_extra_bits {
            return Ok(Comparison::Inside);
        }
        x.extend(src);
        extra += 1;
    }
}

/// Decide `x < threshold` (true) or `x > threshold` (false) for an exact
/// rational threshold. Terminates with probability one.
pub fn compare_rational(x: &mut LazyUniform, threshold: &Rational, src: &mut BitSource) -> bool {
    let num = threshold.numer();
    let den = threshold.denom();
    loop {
        src.note_digit_query();
        // v/2^d < t  <=>  v·den < num·2^d
        let scaled_num = Integer::from(num << x.depth);
        let lo = Integer::from(&x.value * den);
        let hi = Integer::from(&lo + den);
        if hi <= scaled_num {
            return true;
        }
        if lo > scaled_num {
            return false;
        }
        if lo == scaled_num {
            // x >= threshold; equality has probability zero
            return false;
        }
        x.extend(src);
    }
}

/// Uniform integer in `{1, ..., n}` by the fast dice roller: exact, with at
/// most `log2(n) + 2` bits consumed on average.
pub fn uniform_int(n: u64, src: &mut BitSource) -> Result<u64> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "uniform_int over an empty range".into(),
        ));
    }
    if n == 1 {
        return Ok(1);
    }
    let mut v: u128 = 1;
    let mut c: u128 = 0;
    let n = n as u128;
    loop {
        v <<= 1;
        c = (c << 1) | src.next_bit() as u128;
        if v >= n {
            if c < n {
                return Ok(c as u64 + 1);
            }
            v -= n;
            c -= n;
        }
    }
}

/// Bernoulli trial with success probability `q / 2^128`, exact.
pub fn bernoulli_fixed(q: u128, src: &mut BitSource) -> bool {
    for i in (0..128).rev() {
        let qb = ((q >> i) & 1) as u8;
        let xb = src.next_bit();
        if xb != qb {
            return xb < qb;
        }
    }
    false
}

/// Work counters for one sampling run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostCounters {
    pub random_bits: u64,
    pub digit_queries: u64,
    pub escalations_by_level: BTreeMap<u32, u64>,
    pub exact_fallbacks: u64,
    pub newton_steps: u64,
    pub bigfloat_ops: u64,
    pub oracle_builds: u64,
}

impl CostCounters {
    pub fn note_escalation(&mut self, level: u32) {
        *self.escalations_by_level.entry(level).or_insert(0) += 1;
    }

    /// Escalations to level `>= level`.
    pub fn escalations_at_least(&self, level: u32) -> u64 {
        self.escalations_by_level
            .range(level..)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn absorb_source(&mut self, src: &BitSource, bits_before: u64, queries_before: u64) {
        self.random_bits += src.bits_emitted() - bits_before;
        self.digit_queries += src.digit_queries() - queries_before;
    }

    pub fn merge(&mut self, other: &CostCounters) {
        self.random_bits += other.random_bits;
        self.digit_queries += other.digit_queries;
        for (l, c) in &other.escalations_by_level {
            *self.escalations_by_level.entry(*l).or_insert(0) += c;
        }
        self.exact_fallbacks += other.exact_fallbacks;
        self.newton_steps += other.newton_steps;
        self.bigfloat_ops += other.bigfloat_ops;
        self.oracle_builds += other.oracle_builds;
    }

    /// Flat key → integer record.
    pub fn to_record(&self) -> BTreeMap<String, u64> {
        let mut m = BTreeMap::new();
        m.insert("random_bits".to_string(), self.random_bits);
        m.insert("digit_queries".to_string(), self.digit_queries);
        m.insert("exact_fallbacks".to_string(), self.exact_fallbacks);
        m.insert("newton_steps".to_string(), self.newton_steps);
        m.insert("bigfloat_ops".to_string(), self.bigfloat_ops);
        m.insert("oracle_builds".to_string(), self.oracle_builds);
        for (l, c) in &self.escalations_by_level {
            m.insert(format!("escalations_level_{l}"), *c);
        }
        m
    }
}
