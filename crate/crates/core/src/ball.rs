//! Real ball arithmetic on top of MPFR.
//!
//! A [`Ball`] is a midpoint `mid` with precision `p` and a radius `rad`
//! kept at [`RAD_PREC`] bits and always rounded up. Every operation returns
//! a ball containing the exact image of its inputs: the midpoint is computed
//! with round-to-nearest (MPFR results are correctly rounded, so the error is
//! at most `|mid|·2^{-p}`) and that error is folded into the radius.

use std::cell::Cell;
use std::cmp::Ordering;
use std::fmt;

use rug::float::{Constant, Round};
use rug::{Float, Integer, Rational};

/// Precision of radii.
pub const RAD_PREC: u32 = 64;
/// Smallest midpoint precision accepted; keeps `f64` inputs exact.
pub const MIN_PREC: u32 = 64;

thread_local! {
    static OPS: Cell<u64> = const { Cell::new(0) };
}

/// Number of ball operations performed on this thread so far.
pub fn op_count() -> u64 {
    OPS.with(|c| c.get())
}

#[inline]
pub(crate) fn tick() {
    OPS.with(|c| c.set(c.get() + 1));
}

#[inline]
fn rzero() -> Float {
    Float::new(RAD_PREC)
}

/// Upper bound of `|x|` at radius precision.
#[inline]
fn abs_up(x: &Float) -> Float {
    Float::with_val_round(RAD_PREC, &*x.as_abs(), Round::Up).0
}

/// Lower bound of `|x|` at radius precision.
#[inline]
fn abs_down(x: &Float) -> Float {
    Float::with_val_round(RAD_PREC, &*x.as_abs(), Round::Down).0
}

#[inline]
fn add_up(a: &Float, b: &Float) -> Float {
    Float::with_val_round(RAD_PREC, a + b, Round::Up).0
}

#[inline]
fn mul_up(a: &Float, b: &Float) -> Float {
    Float::with_val_round(RAD_PREC, a * b, Round::Up).0
}

#[inline]
fn div_up(a: &Float, b: &Float) -> Float {
    Float::with_val_round(RAD_PREC, a / b, Round::Up).0
}

/// `|x|·2^{-p}` rounded up: the round-to-nearest error bound at precision `p`.
#[inline]
fn rounding_err(x: &Float, p: u32) -> Float {
    if x.is_zero() {
        return rzero();
    }
    let mut e = abs_up(x);
    e >>= p;
    e
}

/// Enclosure `[mid - rad, mid + rad]` of a real number.
#[derive(Clone, PartialEq)]
pub struct Ball {
    mid: Float,
    rad: Float,
}

impl fmt::Debug for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:.20e} +/- {:.3e}",
            self.mid.to_f64(),
            self.rad.to_f64()
        )
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Ball {
    fn from_parts(mid: Float, rad: Float) -> Ball {
        debug_assert!(!rad.is_sign_negative() || rad.is_zero());
        Ball { mid, rad }
    }

    /// Ball from an already-rounded midpoint, folding the nearest-rounding
    /// error into `extra`.
    fn rounded(mid: Float, extra: Float) -> Ball {
        let p = mid.prec();
        let r = add_up(&extra, &rounding_err(&mid, p));
        Ball::from_parts(mid, r)
    }

    pub fn zero(prec: u32) -> Ball {
        Ball::from_parts(Float::new(prec.max(MIN_PREC)), rzero())
    }

    pub fn one(prec: u32) -> Ball {
        Ball::from_f64(prec, 1.0)
    }

    /// Exact ball from a double (exact for `prec >= 53`).
    pub fn from_f64(prec: u32, x: f64) -> Ball {
        assert!(x.is_finite(), "non-finite ball midpoint");
        Ball::from_parts(Float::with_val(prec.max(MIN_PREC), x), rzero())
    }

    pub fn from_i64(prec: u32, x: i64) -> Ball {
        let p = prec.max(MIN_PREC);
        let (mid, ord) = Float::with_val_round(p, x, Round::Nearest);
        if ord == Ordering::Equal {
            Ball::from_parts(mid, rzero())
        } else {
            Ball::rounded(mid, rzero())
        }
    }

    pub fn from_integer(prec: u32, x: &Integer) -> Ball {
        let p = prec.max(MIN_PREC);
        let (mid, ord) = Float::with_val_round(p, x, Round::Nearest);
        if ord == Ordering::Equal {
            Ball::from_parts(mid, rzero())
        } else {
            Ball::rounded(mid, rzero())
        }
    }

    pub fn from_rational(prec: u32, x: &Rational) -> Ball {
        let p = prec.max(MIN_PREC);
        let (mid, ord) = Float::with_val_round(p, x, Round::Nearest);
        if ord == Ordering::Equal {
            Ball::from_parts(mid, rzero())
        } else {
            Ball::rounded(mid, rzero())
        }
    }

    /// Exact ball around a given float, at that float's precision.
    pub fn from_float(x: Float) -> Ball {
        if x.prec() < MIN_PREC {
            let mut y = x;
            y.set_prec(MIN_PREC);
            return Ball::from_parts(y, rzero());
        }
        Ball::from_parts(x, rzero())
    }

    /// Ball with an explicit radius (rounded up to radius precision).
    pub fn with_radius(mid: Float, rad: &Float) -> Ball {
        let r = Float::with_val_round(RAD_PREC, &*rad.as_abs(), Round::Up).0;
        let mut b = Ball::from_float(mid);
        b.rad = r;
        b
    }

    /// Ball `[lo, hi]` given as two floats.
    pub fn from_interval(prec: u32, lo: &Float, hi: &Float) -> Ball {
        let p = prec.max(MIN_PREC);
        let mid = Float::with_val(p, lo + hi) / 2u32;
        let a = Float::with_val_round(RAD_PREC, hi - &mid, Round::Up).0;
        let b = Float::with_val_round(RAD_PREC, &mid - lo, Round::Up).0;
        let r = if a > b { a } else { b };
        Ball::rounded(mid, r)
    }

    pub fn pi(prec: u32) -> Ball {
        let p = prec.max(MIN_PREC);
        Ball::rounded(Float::with_val(p, Constant::Pi), rzero())
    }

    pub fn mid(&self) -> &Float {
        &self.mid
    }

    pub fn rad(&self) -> &Float {
        &self.rad
    }

    pub fn prec(&self) -> u32 {
        self.mid.prec()
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn rad_f64(&self) -> f64 {
        // radius rounded up so it stays an upper bound in f64
        Float::with_val_round(53, &self.rad, Round::Up).0.to_f64()
    }

    /// Widen the radius by a non-negative amount.
    pub fn inflate(&self, extra: &Float) -> Ball {
        let r = add_up(&self.rad, &abs_up(extra));
        Ball::from_parts(self.mid.clone(), r)
    }

    pub fn inflate_f64(&self, extra: f64) -> Ball {
        self.inflate(&Float::with_val(RAD_PREC, extra.abs()))
    }

    /// Change midpoint precision, folding the rounding error if any.
    pub fn with_prec(&self, prec: u32) -> Ball {
        let p = prec.max(MIN_PREC);
        let (mid, ord) = Float::with_val_round(p, &self.mid, Round::Nearest);
        if ord == Ordering::Equal {
            Ball::from_parts(mid, self.rad.clone())
        } else {
            Ball::rounded(mid, self.rad.clone())
        }
    }

    /// Lower endpoint, rounded down.
    pub fn lower(&self) -> Float {
        let p = self.prec();
        Float::with_val_round(p, &self.mid - &self.rad, Round::Down).0
    }

    /// Upper endpoint, rounded up.
    pub fn upper(&self) -> Float {
        let p = self.prec();
        Float::with_val_round(p, &self.mid + &self.rad, Round::Up).0
    }

    /// Upper bound of `|x|` over the ball.
    pub fn abs_upper(&self) -> Float {
        add_up(&abs_up(&self.mid), &self.rad)
    }

    /// Lower bound of `|x|` over the ball (zero if the ball straddles 0).
    pub fn abs_lower(&self) -> Float {
        let m = abs_down(&self.mid);
        let d = Float::with_val_round(RAD_PREC, &m - &self.rad, Round::Down).0;
        if d.is_sign_negative() {
            rzero()
        } else {
            d
        }
    }

    pub fn contains_zero(&self) -> bool {
        abs_down(&self.mid) <= self.rad
    }

    pub fn is_positive(&self) -> bool {
        self.lower() > 0
    }

    pub fn is_negative(&self) -> bool {
        self.upper() < 0
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }

    pub fn contains_float(&self, x: &Float) -> bool {
        self.lower() <= *x && *x <= self.upper()
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        let l = self.lower();
        let u = self.upper();
        let lq = l.to_rational().expect("finite lower endpoint");
        let uq = u.to_rational().expect("finite upper endpoint");
        lq <= *x && *x <= uq
    }

    /// Is every point of `self` strictly below every point of `other`?
    pub fn certainly_lt(&self, other: &Ball) -> bool {
        self.upper() < other.lower()
    }

    pub fn neg(&self) -> Ball {
        Ball::from_parts(Float::with_val(self.prec(), -&self.mid), self.rad.clone())
    }

    pub fn add(&self, other: &Ball) -> Ball {
        tick();
        let p = self.prec().max(other.prec());
        let mid = Float::with_val(p, &self.mid + &other.mid);
        Ball::rounded(mid, add_up(&self.rad, &other.rad))
    }

    pub fn sub(&self, other: &Ball) -> Ball {
        tick();
        let p = self.prec().max(other.prec());
        let mid = Float::with_val(p, &self.mid - &other.mid);
        Ball::rounded(mid, add_up(&self.rad, &other.rad))
    }

    pub fn mul(&self, other: &Ball) -> Ball {
        tick();
        let p = self.prec().max(other.prec());
        let mid = Float::with_val(p, &self.mid * &other.mid);
        let mut r = mul_up(&abs_up(&self.mid), &other.rad);
        r = add_up(&r, &mul_up(&abs_up(&other.mid), &self.rad));
        r = add_up(&r, &mul_up(&self.rad, &other.rad));
        Ball::rounded(mid, r)
    }

    pub fn sqr(&self) -> Ball {
        self.mul(self)
    }

    pub fn mul_i64(&self, k: i64) -> Ball {
        tick();
        let p = self.prec();
        let mid = Float::with_val(p, &self.mid * k);
        let kk = Float::with_val(RAD_PREC, k.unsigned_abs());
        Ball::rounded(mid, mul_up(&self.rad, &kk))
    }

    pub fn div_i64(&self, k: i64) -> Ball {
        assert!(k != 0, "division by zero");
        tick();
        let p = self.prec();
        let mid = Float::with_val(p, &self.mid / k);
        let kk = Float::with_val_round(RAD_PREC, k.unsigned_abs(), Round::Down).0;
        Ball::rounded(mid, div_up(&self.rad, &kk))
    }

    /// Multiplication by `2^e` (exact).
    pub fn mul_2exp(&self, e: i32) -> Ball {
        let mut mid = self.mid.clone();
        let mut rad = self.rad.clone();
        if e >= 0 {
            mid <<= e as u32;
            rad <<= e as u32;
        } else {
            mid >>= (-e) as u32;
            rad >>= (-e) as u32;
        }
        Ball::from_parts(mid, rad)
    }

    /// Division; the divisor must exclude zero.
    pub fn div(&self, other: &Ball) -> Option<Ball> {
        tick();
        let bm = abs_down(&other.mid);
        let gap = Float::with_val_round(RAD_PREC, &bm - &other.rad, Round::Down).0;
        if gap <= 0 {
            return None;
        }
        let p = self.prec().max(other.prec());
        let mid = Float::with_val(p, &self.mid / &other.mid);
        let num = add_up(
            &mul_up(&abs_up(&self.mid), &other.rad),
            &mul_up(&self.rad, &abs_up(&other.mid)),
        );
        let den = Float::with_val_round(RAD_PREC, &bm * &gap, Round::Down).0;
        Some(Ball::rounded(mid, div_up(&num, &den)))
    }

    pub fn recip(&self) -> Option<Ball> {
        Ball::one(self.prec()).div(self)
    }

    pub fn exp(&self) -> Ball {
        tick();
        let p = self.prec();
        let mid = Float::with_val(p, self.mid.exp_ref());
        if self.rad.is_zero() {
            return Ball::rounded(mid, rzero());
        }
        // |e^x - e^m| <= e^m (e^r - 1), e^m <= |mid| (1 + 2^{1-p})
        let mut em = abs_up(&mid);
        let mut bump = em.clone();
        bump >>= p - 1;
        em = add_up(&em, &bump);
        let g = Float::with_val_round(RAD_PREC, self.rad.exp_m1_ref(), Round::Up).0;
        Ball::rounded(mid, mul_up(&em, &g))
    }

    /// `e^x - 1`, accurate near zero.
    pub fn exp_m1(&self) -> Ball {
        tick();
        let p = self.prec();
        let mid = Float::with_val(p, self.mid.exp_m1_ref());
        if self.rad.is_zero() {
            return Ball::rounded(mid, rzero());
        }
        // derivative e^x bounded by e^{m + r}
        let hi = Float::with_val_round(RAD_PREC, &self.mid + &self.rad, Round::Up).0;
        let d = Float::with_val_round(RAD_PREC, hi.exp_ref(), Round::Up).0;
        Ball::rounded(mid, mul_up(&d, &self.rad))
    }

    /// Natural logarithm; the ball must be strictly positive.
    pub fn ln(&self) -> Option<Ball> {
        tick();
        let lo = Float::with_val_round(RAD_PREC, &self.mid - &self.rad, Round::Down).0;
        if lo <= 0 {
            return None;
        }
        let p = self.prec();
        let mid = Float::with_val(p, self.mid.ln_ref());
        Some(Ball::rounded(mid, div_up(&self.rad, &lo)))
    }

    /// `ln(1 + x)`, accurate near zero; requires `x > -1` on the ball.
    pub fn ln_1p(&self) -> Option<Ball> {
        tick();
        let lo = Float::with_val_round(RAD_PREC, &self.mid - &self.rad, Round::Down).0;
        let lo1 = Float::with_val_round(RAD_PREC, &lo + 1u32, Round::Down).0;
        if lo1 <= 0 {
            return None;
        }
        let p = self.prec();
        let mid = Float::with_val(p, self.mid.ln_1p_ref());
        Some(Ball::rounded(mid, div_up(&self.rad, &lo1)))
    }

    /// Square root; the ball must be non-negative.
    pub fn sqrt(&self) -> Option<Ball> {
        tick();
        let lo = Float::with_val_round(RAD_PREC, &self.mid - &self.rad, Round::Down).0;
        if lo.is_sign_negative() && !lo.is_zero() {
            return None;
        }
        let p = self.prec();
        let mid = Float::with_val(p, self.mid.sqrt_ref());
        if self.rad.is_zero() {
            return Some(Ball::rounded(mid, rzero()));
        }
        if self.mid.is_zero() {
            let r = Float::with_val_round(RAD_PREC, self.rad.sqrt_ref(), Round::Up).0;
            return Some(Ball::from_parts(mid, r));
        }
        let sm = Float::with_val_round(RAD_PREC, self.mid.sqrt_ref(), Round::Down).0;
        Some(Ball::rounded(mid, div_up(&self.rad, &sm)))
    }

    pub fn sin(&self) -> Ball {
        tick();
        let p = self.prec();
        let mid = Float::with_val(p, self.mid.sin_ref());
        Ball::rounded(mid, self.rad.clone())
    }

    pub fn cos(&self) -> Ball {
        tick();
        let p = self.prec();
        let mid = Float::with_val(p, self.mid.cos_ref());
        Ball::rounded(mid, self.rad.clone())
    }

    /// Arctangent, from the endpoints (the function is increasing).
    pub fn atan(&self) -> Ball {
        tick();
        let p = self.prec();
        let lo = Float::with_val_round(p, self.lower().atan_ref(), Round::Down).0;
        let hi = Float::with_val_round(p, self.upper().atan_ref(), Round::Up).0;
        Ball::from_interval(p, &lo, &hi)
    }

    pub fn powi(&self, n: u32) -> Ball {
        let mut acc = Ball::one(self.prec());
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

    /// Absolute value as a ball.
    pub fn abs(&self) -> Ball {
        if self.mid.is_sign_negative() {
            self.neg()
        } else {
            self.clone()
        }
    }

    /// Smallest ball containing both inputs.
    pub fn union(&self, other: &Ball) -> Ball {
        let lo = if self.lower() < other.lower() {
            self.lower()
        } else {
            other.lower()
        };
        let hi = if self.upper() > other.upper() {
            self.upper()
        } else {
            other.upper()
        };
        Ball::from_interval(self.prec().max(other.prec()), &lo, &hi)
    }

    /// Intersection, or `None` when the balls are disjoint.
    pub fn intersect(&self, other: &Ball) -> Option<Ball> {
        let lo = if self.lower() > other.lower() {
            self.lower()
        } else {
            other.lower()
        };
        let hi = if self.upper() < other.upper() {
            self.upper()
        } else {
            other.upper()
        };
        if lo > hi {
            return None;
        }
        Some(Ball::from_interval(self.prec().max(other.prec()), &lo, &hi))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    fn hp(x: f64) -> Float {
        Float::with_val(512, x)
    }

    #[test]
    fn arithmetic_contains_exact_values() {
        let a = Ball::from_f64(64, 0.1).inflate_f64(1e-10);
        let b = Ball::from_f64(64, 3.7);
        let s = a.add(&b);
        assert!(s.contains_float(&(hp(0.1) + hp(3.7))));
        let p = a.mul(&b);
        assert!(p.contains_float(&(hp(0.1) * hp(3.7))));
        let q = b.div(&a).unwrap();
        assert!(q.contains_float(&(hp(3.7) / hp(0.1))));
        let q2 = b.div(&Ball::from_f64(64, 0.0));
        assert!(q2.is_none());
    }

    #[test]
    fn transcendental_enclosures() {
        let x = Ball::from_f64(80, 1.25).inflate_f64(1e-6);
        for t in [1.25 - 1e-6, 1.25, 1.25 + 1e-6] {
            let v = hp(t);
            assert!(x.exp().contains_float(&Float::with_val(512, v.exp_ref())));
            assert!(x
                .ln()
                .unwrap()
                .contains_float(&Float::with_val(512, v.ln_ref())));
            assert!(x
                .sqrt()
                .unwrap()
                .contains_float(&Float::with_val(512, v.sqrt_ref())));
            assert!(x.sin().contains_float(&Float::with_val(512, v.sin_ref())));
            assert!(x
                .exp_m1()
                .contains_float(&Float::with_val(512, v.exp_m1_ref())));
        }
        assert!(Ball::from_f64(64, -1.0).ln().is_none());
    }

    #[test]
    fn pi_and_rationals() {
        let pi = Ball::pi(128);
        assert!(pi.contains_float(&Float::with_val(512, Constant::Pi)));
        let third = Ball::from_rational(64, &Rational::from((1, 3)));
        assert!(third.contains_rational(&Rational::from((1, 3))));
        assert!(!third.rad().is_zero());
    }

    #[test]
    fn powi_matches_repeated_product() {
        let x = Ball::from_f64(64, 1.1);
        let y = x.powi(7);
        assert!(y.contains_float(&Float::with_val(512, hp(1.1).pow(7u32))));
    }

    #[test]
    fn op_counter_advances() {
        let before = op_count();
        let x = Ball::from_f64(64, 2.0);
        let _ = x.mul(&x).add(&x);
        assert!(op_count() >= before + 2);
    }
}
