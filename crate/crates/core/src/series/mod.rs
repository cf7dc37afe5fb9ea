//! Truncated power series and the analytic tools built on them.

mod euler_maclaurin;
mod multipoly;
mod sign;
mod solve;
mod tables;

use rug::Rational;

use crate::real::Real;

pub use euler_maclaurin::{euler_maclaurin_log_sum, ExpLinear, LogSumFamily, OneMinusLinear};
pub use multipoly::MultiPoly;
pub use sign::{
    observed_cone, remainder_bound, Component, Cone, FnComponent, PolyComponent, SignDecomposition,
};
pub use solve::{
    format_a_table, format_b_table, solve_a_from_b, solve_b_from_a, symbolic_a, symbolic_b,
};
pub use tables::{
    bernoulli, eulerian, eulerian_polynomial, CombinatoricsTables, DEFAULT_TABLE_SIZE,
};

/// Coefficient ring for [`TruncatedSeries`].
pub trait Coeff: Clone {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn mul_int(&self, k: i64) -> Self;
    fn div_int(&self, k: i64) -> Self;
    /// True only for an exact zero (used to skip work, never for decisions).
    fn is_zero_exact(&self) -> bool {
        false
    }
}

impl Coeff for Rational {
    fn zero_like(&self) -> Self {
        Rational::new()
    }
    fn one_like(&self) -> Self {
        Rational::from(1)
    }
    fn add(&self, o: &Self) -> Self {
        Rational::from(self + o)
    }
    fn sub(&self, o: &Self) -> Self {
        Rational::from(self - o)
    }
    fn mul(&self, o: &Self) -> Self {
        Rational::from(self * o)
    }
    fn neg(&self) -> Self {
        Rational::from(-self)
    }
    fn mul_int(&self, k: i64) -> Self {
        Rational::from(self * k)
    }
    fn div_int(&self, k: i64) -> Self {
        Rational::from(self / k)
    }
    fn is_zero_exact(&self) -> bool {
        *self == 0
    }
}

impl<R: Real> Coeff for R {
    fn zero_like(&self) -> Self {
        R::zero(self.prec())
    }
    fn one_like(&self) -> Self {
        R::one(self.prec())
    }
    fn add(&self, o: &Self) -> Self {
        Real::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        Real::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        Real::mul(self, o)
    }
    fn neg(&self) -> Self {
        Real::neg(self)
    }
    fn mul_int(&self, k: i64) -> Self {
        Real::mul_i64(self, k)
    }
    fn div_int(&self, k: i64) -> Self {
        Real::div_i64(self, k)
    }
}

/// Power series `c₀ + c₁y + … + c_L y^L`, arithmetic exact modulo `y^{L+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSeries<C> {
    coeffs: Vec<C>,
}

impl<C: Coeff> TruncatedSeries<C> {
    /// Series of order `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<C>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a series needs at least one coefficient"
        );
        TruncatedSeries { coeffs }
    }

    /// `0 + 0·y + …` of the given order, built from a template coefficient.
    pub fn zero(order: usize, like: &C) -> Self {
        TruncatedSeries {
            coeffs: vec![like.zero_like(); order + 1],
        }
    }

    /// The series `y` of the given order.
    pub fn variable(order: usize, like: &C) -> Self {
        let mut s = Self::zero(order, like);
        if order >= 1 {
            s.coeffs[1] = like.one_like();
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn coeff(&self, j: usize) -> &C {
        &self.coeffs[j]
    }

    pub fn set_coeff(&mut self, j: usize, c: C) {
        self.coeffs[j] = c;
    }

    pub fn into_coeffs(self) -> Vec<C> {
        self.coeffs
    }

    /// Same series with order changed (truncated or zero-padded).
    pub fn with_order(&self, order: usize) -> Self {
        let z = self.coeffs[0].zero_like();
        let mut c: Vec<C> = self.coeffs.iter().take(order + 1).cloned().collect();
        c.resize(order + 1, z);
        TruncatedSeries { coeffs: c }
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!(self.order(), o.order());
        TruncatedSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!(self.order(), o.order());
        TruncatedSeries {
            coeffs: self
                .coeffs
                .iter()
                .zip(&o.coeffs)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn scale(&self, c: &C) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|a| a.mul(c)).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.order(), o.order());
        let l = self.order();
        let mut out = vec![self.coeffs[0].zero_like(); l + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero_exact() {
                continue;
            }
            for (j, b) in o.coeffs.iter().take(l + 1 - i).enumerate() {
                if b.is_zero_exact() {
                    continue;
                }
                out[i + j] = out[i + j].add(&a.mul(b));
            }
        }
        TruncatedSeries { coeffs: out }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::zero(self.order(), &self.coeffs[0]);
        acc.coeffs[0] = self.coeffs[0].one_like();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// `self(inner(y))`; `inner` must have zero constant term.
    pub fn compose(&self, inner: &Self) -> Self {
        let l = inner.order();
        let outer = self.with_order(l);
        let mut acc = Self::zero(l, &inner.coeffs[0]);
        acc.coeffs[0] = outer.coeffs[l].clone();
        for j in (0..l).rev() {
            acc = acc.mul(inner);
            acc.coeffs[0] = acc.coeffs[0].add(&outer.coeffs[j]);
        }
        acc
    }

    /// Formal derivative, keeping the order (top coefficient becomes zero).
    pub fn derivative(&self) -> Self {
        let l = self.order();
        let z = self.coeffs[0].zero_like();
        let mut c: Vec<C> = (1..=l).map(|j| self.coeffs[j].mul_int(j as i64)).collect();
        c.push(z);
        TruncatedSeries { coeffs: c }
    }
}

impl<R: Real> TruncatedSeries<R> {
    /// Horner evaluation at an enclosure.
    pub fn eval(&self, x: &R) -> R {
        let mut acc = self.coeffs[self.order()].clone();
        for c in self.coeffs[..self.order()].iter().rev() {
            acc = acc.mul(x).add(c);
        }
        acc
    }
}
