//! Enclosure arithmetic shared by the oracle: one trait, two backends.
//!
//! [`Ball`] carries arbitrary precision; [`Interval`] is a pair of doubles
//! with outward rounding, used whenever the required accuracy fits in 53
//! bits. Basic operations on doubles are correctly rounded, so stepping one
//! ulp outward keeps them rigorous; transcendental functions go through
//! MPFR with directed rounding.

use std::fmt;

use rug::float::Round;
use rug::{Float, Rational};

use crate::ball::{tick, Ball};

/// Real enclosure type.
pub trait Real: Clone + fmt::Debug {
    fn zero(prec: u32) -> Self;
    fn one(prec: u32) -> Self;
    /// Exact enclosure of a double.
    fn from_f64(prec: u32, x: f64) -> Self;
    fn from_i64(prec: u32, x: i64) -> Self;
    fn from_rational(prec: u32, x: &Rational) -> Self;
    fn from_float(prec: u32, x: &Float) -> Self;
    /// Enclosure of `[lo, hi]`.
    fn hull_f64(prec: u32, lo: f64, hi: f64) -> Self;
    fn pi(prec: u32) -> Self;

    fn prec(&self) -> u32;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul_i64(&self, k: i64) -> Self;
    fn div_i64(&self, k: i64) -> Self;
    /// `None` when the divisor may vanish.
    fn div(&self, o: &Self) -> Option<Self>;
    fn exp(&self) -> Self;
    fn exp_m1(&self) -> Self;
    fn ln(&self) -> Option<Self>;
    fn ln_1p(&self) -> Option<Self>;
    fn sqrt(&self) -> Option<Self>;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;

    /// Rigorous lower and upper endpoints, rounded outward to doubles.
    fn lower_f64(&self) -> f64;
    fn upper_f64(&self) -> f64;
    fn lower_float(&self) -> Float;
    fn upper_float(&self) -> Float;
    fn mid_f64(&self) -> f64;
    fn mid_float(&self) -> Float;
    /// Widen by `e >= 0` on both sides.
    fn inflate_f64(&self, e: f64) -> Self;
    /// Smallest enclosure of both.
    fn hull(&self, o: &Self) -> Self;
    /// The upper endpoint as an exact point.
    fn upper_point(&self) -> Self {
        Self::from_float(self.prec(), &self.upper_float())
    }

    fn sqr(&self) -> Self {
        self.mul(self)
    }

    fn powi(&self, n: u32) -> Self {
        let mut acc = Self::one(self.prec());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.sqr();
            }
        }
        acc
    }

    /// Point enclosure of an upper bound of `|x|`.
    fn mag(&self) -> Self {
        let u = self.upper_float();
        let l = self.lower_float();
        let m =
            if Float::with_val(u.prec(), &*u.as_abs()) >= Float::with_val(l.prec(), &*l.as_abs()) {
                Float::with_val(u.prec(), &*u.as_abs())
            } else {
                Float::with_val(l.prec(), &*l.as_abs())
            };
        Self::from_float(self.prec(), &m)
    }

    fn is_positive(&self) -> bool {
        self.lower_f64() > 0.0 || self.lower_float() > 0
    }

    fn contains_zero(&self) -> bool {
        self.lower_float() <= 0 && self.upper_float() >= 0
    }

    fn width_f64(&self) -> f64 {
        let w = Float::with_val_round(64, self.upper_float() - self.lower_float(), Round::Up).0;
        Float::with_val_round(53, &w, Round::Up).0.to_f64()
    }
}

impl Real for Ball {
    fn zero(prec: u32) -> Self {
        Ball::zero(prec)
    }
    fn one(prec: u32) -> Self {
        Ball::one(prec)
    }
    fn from_f64(prec: u32, x: f64) -> Self {
        Ball::from_f64(prec, x)
    }
    fn from_i64(prec: u32, x: i64) -> Self {
        Ball::from_i64(prec, x)
    }
    fn from_rational(prec: u32, x: &Rational) -> Self {
        Ball::from_rational(prec, x)
    }
    fn from_float(prec: u32, x: &Float) -> Self {
        Ball::from_float(x.clone()).with_prec(prec)
    }
    fn hull_f64(prec: u32, lo: f64, hi: f64) -> Self {
        Ball::from_interval(prec, &Float::with_val(53, lo), &Float::with_val(53, hi))
    }
    fn pi(prec: u32) -> Self {
        Ball::pi(prec)
    }
    fn prec(&self) -> u32 {
        Ball::prec(self)
    }
    fn add(&self, o: &Self) -> Self {
        Ball::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Ball::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Ball::mul(self, o)
    }
    fn neg(&self) -> Self {
        Ball::neg(self)
    }
    fn mul_i64(&self, k: i64) -> Self {
        Ball::mul_i64(self, k)
    }
    fn div_i64(&self, k: i64) -> Self {
        Ball::div_i64(self, k)
    }
    fn div(&self, o: &Self) -> Option<Self> {
        Ball::div(self, o)
    }
    fn exp(&self) -> Self {
        Ball::exp(self)
    }
    fn exp_m1(&self) -> Self {
        Ball::exp_m1(self)
    }
    fn ln(&self) -> Option<Self> {
        Ball::ln(self)
    }
    fn ln_1p(&self) -> Option<Self> {
        Ball::ln_1p(self)
    }
    fn sqrt(&self) -> Option<Self> {
        Ball::sqrt(self)
    }
    fn sin(&self) -> Self {
        Ball::sin(self)
    }
    fn cos(&self) -> Self {
        Ball::cos(self)
    }
    fn lower_f64(&self) -> f64 {
        Float::with_val_round(53, self.lower(), Round::Down)
            .0
            .to_f64()
    }
    fn upper_f64(&self) -> f64 {
        Float::with_val_round(53, self.upper(), Round::Up)
            .0
            .to_f64()
    }
    fn lower_float(&self) -> Float {
        self.lower()
    }
    fn upper_float(&self) -> Float {
        self.upper()
    }
    fn mid_f64(&self) -> f64 {
        self.to_f64()
    }
    fn mid_float(&self) -> Float {
        self.mid().clone()
    }
    fn inflate_f64(&self, e: f64) -> Self {
        Ball::inflate_f64(self, e)
    }
    fn hull(&self, o: &Self) -> Self {
        self.union(o)
    }
    fn powi(&self, n: u32) -> Self {
        Ball::powi(self, n)
    }
}

/// Closed interval of doubles, `lo <= hi`.
#[derive(Clone, Copy, PartialEq)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}

#[inline]
fn dn(x: f64) -> f64 {
    if x == 0.0 {
        -f64::from_bits(1)
    } else {
        x.next_down()
    }
}

#[inline]
fn up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else {
        x.next_up()
    }
}

/// Platform libm result widened by two ulps; the libm functions used are
/// accurate to within one ulp.
fn libm_dir(x: f64, f: fn(f64) -> f64, round: Round) -> f64 {
    let v = f(x);
    match round {
        Round::Down => dn(dn(v)),
        _ => up(up(v)),
    }
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Interval {
        assert!(lo <= hi, "inverted interval");
        Interval { lo, hi }
    }

    pub fn point(x: f64) -> Interval {
        Interval { lo: x, hi: x }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    fn checked(lo: f64, hi: f64) -> Interval {
        debug_assert!(!lo.is_nan() && !hi.is_nan());
        Interval { lo, hi }
    }

    fn directed(x: f64, f: fn(f64) -> f64, round: Round) -> f64 {
        libm_dir(x, f, round)
    }
}

fn exp_r(x: f64) -> f64 {
    x.exp()
}
fn expm1_r(x: f64) -> f64 {
    x.exp_m1()
}
fn ln_r(x: f64) -> f64 {
    x.ln()
}
fn ln1p_r(x: f64) -> f64 {
    x.ln_1p()
}
fn sin_r(x: f64) -> f64 {
    x.sin()
}
fn cos_r(x: f64) -> f64 {
    x.cos()
}

impl Real for Interval {
    fn zero(_: u32) -> Self {
        Interval::point(0.0)
    }
    fn one(_: u32) -> Self {
        Interval::point(1.0)
    }
    fn from_f64(_: u32, x: f64) -> Self {
        assert!(x.is_finite());
        Interval::point(x)
    }
    fn from_i64(_: u32, x: i64) -> Self {
        let f = x as f64;
        if f as i64 == x && f.abs() < 9.0e15 {
            Interval::point(f)
        } else {
            Interval::checked(dn(f), up(f))
        }
    }
    fn from_rational(_: u32, x: &Rational) -> Self {
        const EXACT: i64 = 1 << 53;
        if let (Some(a), Some(b)) = (x.numer().to_i64(), x.denom().to_i64()) {
            if a.abs() < EXACT && b < EXACT {
                let (a, b) = (a as f64, b as f64);
                let q = a / b;
                if q.mul_add(b, -a) == 0.0 {
                    return Interval::new(q, q);
                }
                return Interval::checked(dn(q), up(q));
            }
        }
        let lo = Float::with_val_round(53, x, Round::Down).0.to_f64();
        let hi = Float::with_val_round(53, x, Round::Up).0.to_f64();
        Interval::checked(lo, hi)
    }
    fn from_float(_: u32, x: &Float) -> Self {
        let lo = Float::with_val_round(53, x, Round::Down).0.to_f64();
        let hi = Float::with_val_round(53, x, Round::Up).0.to_f64();
        Interval::checked(lo, hi)
    }
    fn hull_f64(_: u32, lo: f64, hi: f64) -> Self {
        Interval::new(lo, hi)
    }
    fn pi(_: u32) -> Self {
        Interval::checked(std::f64::consts::PI, up(std::f64::consts::PI))
    }
    fn prec(&self) -> u32 {
        53
    }
    fn add(&self, o: &Self) -> Self {
        tick();
        Interval::checked(dn(self.lo + o.lo), up(self.hi + o.hi))
    }
    fn sub(&self, o: &Self) -> Self {
        tick();
        Interval::checked(dn(self.lo - o.hi), up(self.hi - o.lo))
    }
    fn mul(&self, o: &Self) -> Self {
        tick();
        let c = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        let mut lo = c[0];
        let mut hi = c[0];
        for v in &c[1..] {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        Interval::checked(dn(lo), up(hi))
    }
    fn sqr(&self) -> Self {
        tick();
        let a = self.lo * self.lo;
        let b = self.hi * self.hi;
        if self.lo >= 0.0 {
            Interval::checked(dn(a), up(b))
        } else if self.hi <= 0.0 {
            Interval::checked(dn(b), up(a))
        } else {
            Interval::checked(0.0, up(a.max(b)))
        }
    }
    fn neg(&self) -> Self {
        Interval::checked(-self.hi, -self.lo)
    }
    fn mul_i64(&self, k: i64) -> Self {
        self.mul(&Interval::from_i64(53, k))
    }
    fn div_i64(&self, k: i64) -> Self {
        assert!(k != 0);
        self.div(&Interval::from_i64(53, k))
            .expect("non-zero integer divisor")
    }
    fn div(&self, o: &Self) -> Option<Self> {
        tick();
        if o.lo <= 0.0 && o.hi >= 0.0 {
            return None;
        }
        let c = [
            self.lo / o.lo,
            self.lo / o.hi,
            self.hi / o.lo,
            self.hi / o.hi,
        ];
        let mut lo = c[0];
        let mut hi = c[0];
        for v in &c[1..] {
            lo = lo.min(*v);
            hi = hi.max(*v);
        }
        Some(Interval::checked(dn(lo), up(hi)))
    }
    fn exp(&self) -> Self {
        tick();
        Interval::checked(
            Interval::directed(self.lo, exp_r, Round::Down).max(0.0),
            Interval::directed(self.hi, exp_r, Round::Up),
        )
    }
    fn exp_m1(&self) -> Self {
        tick();
        Interval::checked(
            Interval::directed(self.lo, expm1_r, Round::Down),
            Interval::directed(self.hi, expm1_r, Round::Up),
        )
    }
    fn ln(&self) -> Option<Self> {
        tick();
        if self.lo <= 0.0 {
            return None;
        }
        Some(Interval::checked(
            Interval::directed(self.lo, ln_r, Round::Down),
            Interval::directed(self.hi, ln_r, Round::Up),
        ))
    }
    fn ln_1p(&self) -> Option<Self> {
        tick();
        if self.lo <= -1.0 {
            return None;
        }
        Some(Interval::checked(
            Interval::directed(self.lo, ln1p_r, Round::Down),
            Interval::directed(self.hi, ln1p_r, Round::Up),
        ))
    }
    fn sqrt(&self) -> Option<Self> {
        tick();
        if self.lo < 0.0 {
            return None;
        }
        Some(Interval::checked(
            dn(self.lo.sqrt()).max(0.0),
            up(self.hi.sqrt()),
        ))
    }
    fn sin(&self) -> Self {
        tick();
        let m = 0.5 * self.lo + 0.5 * self.hi;
        let r = up((self.hi - m).max(m - self.lo));
        let lo = Interval::directed(m, sin_r, Round::Down);
        let hi = Interval::directed(m, sin_r, Round::Up);
        Interval::checked(dn(lo - r).max(-1.0), up(hi + r).min(1.0))
    }
    fn cos(&self) -> Self {
        tick();
        let m = 0.5 * self.lo + 0.5 * self.hi;
        let r = up((self.hi - m).max(m - self.lo));
        let lo = Interval::directed(m, cos_r, Round::Down);
        let hi = Interval::directed(m, cos_r, Round::Up);
        Interval::checked(dn(lo - r).max(-1.0), up(hi + r).min(1.0))
    }
    fn lower_f64(&self) -> f64 {
        self.lo
    }
    fn upper_f64(&self) -> f64 {
        self.hi
    }
    fn lower_float(&self) -> Float {
        Float::with_val(53, self.lo)
    }
    fn upper_float(&self) -> Float {
        Float::with_val(53, self.hi)
    }
    fn mid_f64(&self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }
    fn mid_float(&self) -> Float {
        Float::with_val(53, self.mid_f64())
    }
    fn upper_point(&self) -> Self {
        Interval::new(self.hi, self.hi)
    }
    fn inflate_f64(&self, e: f64) -> Self {
        let e = e.abs();
        Interval::checked(dn(self.lo - e), up(self.hi + e))
    }
    fn hull(&self, o: &Self) -> Self {
        Interval::checked(self.lo.min(o.lo), self.hi.max(o.hi))
    }
    fn mag(&self) -> Self {
        Interval::point(self.lo.abs().max(self.hi.abs()))
    }
    fn is_positive(&self) -> bool {
        self.lo > 0.0
    }
    fn contains_zero(&self) -> bool {
        self.lo <= 0.0 && self.hi >= 0.0
    }
    fn width_f64(&self) -> f64 {
        up(self.hi - self.lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hp(x: f64) -> Float {
        Float::with_val(256, x)
    }

    fn encloses(i: &Interval, x: &Float) -> bool {
        *x >= i.lo && *x <= i.hi
    }

    #[test]
    fn interval_ops_enclose_exact_results() {
        let a = Interval::point(0.1);
        let b = Interval::point(3.7);
        assert!(encloses(&a.add(&b), &(hp(0.1) + hp(3.7))));
        assert!(encloses(&a.mul(&b), &(hp(0.1) * hp(3.7))));
        assert!(encloses(&b.div(&a).unwrap(), &(hp(3.7) / hp(0.1))));
        assert!(encloses(&b.sub(&a), &(hp(3.7) - hp(0.1))));
        assert!(encloses(&b.exp(), &Float::with_val(256, hp(3.7).exp_ref())));
        assert!(encloses(
            &b.ln().unwrap(),
            &Float::with_val(256, hp(3.7).ln_ref())
        ));
        assert!(encloses(
            &b.sqrt().unwrap(),
            &Float::with_val(256, hp(3.7).sqrt_ref())
        ));
        assert!(encloses(&b.sin(), &Float::with_val(256, hp(3.7).sin_ref())));
        assert!(encloses(&b.cos(), &Float::with_val(256, hp(3.7).cos_ref())));
        assert!(Interval::new(-1.0, 1.0).div(&a).is_some());
        assert!(a.div(&Interval::new(-1.0, 1.0)).is_none());
    }

    #[test]
    fn interval_and_ball_agree() {
        let x = 1.3;
        let i = Interval::point(x).exp().ln_1p().unwrap();
        let b = <Ball as Real>::from_f64(128, x).exp().ln_1p().unwrap();
        assert!(i.lower_f64() <= b.upper_f64() && b.lower_f64() <= i.upper_f64());
        assert!(i.width_f64() < 1e-14);
    }

    #[test]
    fn sqr_of_straddling_interval_is_nonnegative() {
        let s = Interval::new(-2.0, 1.0).sqr();
        assert_eq!(s.lower_f64(), 0.0);
        assert!(s.upper_f64() >= 4.0);
    }

    #[test]
    fn mag_bounds_absolute_value() {
        let m = Interval::new(-3.0, 1.0).mag();
        assert_eq!(m.lower_f64(), 3.0);
        let b = <Ball as Real>::hull_f64(64, -3.0, 1.0).mag();
        assert!(b.lower_f64() >= 3.0);
    }
}
