//! Euler–Maclaurin summation of `Σ_{y=1..n} ln f(z, y/n)` with an explicit
//! remainder.

use rug::{Complete, Float, Integer, Rational};

use super::tables::bernoulli;
use crate::ball::{Ball, RAD_PREC};
use crate::disk::{CBall, Complex, Disk};
use crate::error::{Error, Result};

/// Cells used to bound `∫₀¹ |g^{(m)}|`.
const INTEGRAL_CELLS: usize = 64;

/// Working precision of the summation.
const PREC: u32 = 128;

/// A family `f(z, y)` with the data needed by the expansion. Here
/// `g = ∂_y ln f`. Each method returns `None` when `f` may vanish (or leave
/// the principal branch) on its inputs.
pub trait LogSumFamily {
    fn log_f(&self, z: &CBall, y: &CBall) -> Option<CBall>;

    /// `∫₀¹ ln f(z, y) dy`.
    fn integral_log(&self, z: &CBall) -> Option<CBall>;

    /// `g^{(j)}(y)`.
    fn g_derivative(&self, j: usize, z: &CBall, y: &CBall) -> Option<CBall>;
}

/// `f(z, y) = e^{zy}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ExpLinear;

impl LogSumFamily for ExpLinear {
    fn log_f(&self, z: &CBall, y: &CBall) -> Option<CBall> {
        Some(z.mul(y))
    }

    fn integral_log(&self, z: &CBall) -> Option<CBall> {
        let half = Ball::one(z.prec()).div_i64(2);
        Some(z.scale(&half))
    }

    fn g_derivative(&self, j: usize, z: &CBall, _y: &CBall) -> Option<CBall> {
        if j == 0 {
            Some(z.clone())
        } else {
            Some(CBall::real(Ball::zero(z.prec())))
        }
    }
}

/// `f(z, y) = 1 − zy`, for `Re z < 1`.
#[derive(Clone, Copy, Debug, Default)]
pub struct OneMinusLinear;

impl OneMinusLinear {
    fn base(z: &CBall, y: &CBall) -> CBall {
        CBall::real(Ball::one(z.prec())).sub(&z.mul(y))
    }
}

impl LogSumFamily for OneMinusLinear {
    fn log_f(&self, z: &CBall, y: &CBall) -> Option<CBall> {
        Self::base(z, y).ln()
    }

    fn integral_log(&self, z: &CBall) -> Option<CBall> {
        let p = z.prec();
        let za = Ball::from_float(z.abs_upper());
        if za.upper() <= 0.5 {
            // −Σ_{m>=1} z^m/(m(m+1)), tail <= |z|^{M+1}/((M+1)(M+2)(1−|z|))
            let terms = p as usize + 2;
            let mut acc = CBall::real(Ball::zero(p));
            let mut pow = z.clone();
            for m in 1..=terms as i64 {
                let t = pow.scale(&Ball::one(p).div_i64(m * (m + 1)));
                acc = acc.sub(&t);
                pow = pow.mul(z);
            }
            let m = terms as i64 + 1;
            let tail = za
                .powi(m as u32)
                .div_i64(m * (m + 1))
                .div(&Ball::one(p).sub(&za))?
                .upper();
            return Some(CBall::new(acc.re.inflate(&tail), acc.im.inflate(&tail)));
        }
        // −1 − (1−z) ln(1−z)/z
        let w = CBall::real(Ball::one(p)).sub(z);
        let v = w.mul(&w.ln()?).div(z)?;
        Some(CBall::real(Ball::one(p)).add(&v).neg())
    }

    fn g_derivative(&self, j: usize, z: &CBall, y: &CBall) -> Option<CBall> {
        let p = z.prec();
        let fact = Ball::from_integer(p, &Integer::factorial(j as u32).complete());
        let w = Self::base(z, y);
        if w.re.contains_zero() && w.im.contains_zero() {
            return None;
        }
        let num = z.powi(j as u32 + 1).scale(&fact);
        Some(num.div(&w.powi(j as u32 + 1))?.neg())
    }
}

fn analyticity_error() -> Error {
    Error::OutsideAnalyticity("f vanishes or leaves the principal branch on [0, 1]".into())
}

/// Disk enclosing `Σ_{y=1..n} ln f(z, y/n)`.
///
/// The center keeps the correction terms of index `1 <= k < k_max`; the
/// radius bounds the remainder by
/// `|B_{2k_max}|/(2k_max)! · ∫₀¹|g^{(2k_max−1)}| · max(n^{2−2k_max}, 2n^{1−2k_max})`.
pub fn euler_maclaurin_log_sum(
    f: &dyn LogSumFamily,
    n: u64,
    z: &Complex,
    k_max: usize,
) -> Result<Disk> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if k_max == 0 {
        return Err(Error::InvalidArgument("k_max must be positive".into()));
    }
    let p = PREC.max(z.re.prec()).max(z.im.prec());
    let zb = CBall::from_complex(z, p);
    let nb = Ball::from_integer(p, &Integer::from(n));
    let y0 = CBall::real(Ball::zero(p));
    let y1 = CBall::real(Ball::one(p));

    let integral = f.integral_log(&zb).ok_or_else(analyticity_error)?;
    let h0 = f.log_f(&zb, &y0).ok_or_else(analyticity_error)?;
    let h1 = f.log_f(&zb, &y1).ok_or_else(analyticity_error)?;
    let half = Ball::one(p).div_i64(2);
    let mut center = integral.scale(&nb).add(&h1.sub(&h0).scale(&half));

    for k in 1..k_max {
        let b = bernoulli(2 * k)?;
        let coef = b / Rational::from(Integer::factorial(2 * k as u32).complete());
        let coef = Ball::from_rational(p, &coef);
        let npow = nb.powi(2 * k as u32 - 1);
        let d1 = f
            .g_derivative(2 * k - 2, &zb, &y1)
            .ok_or_else(analyticity_error)?;
        let d0 = f
            .g_derivative(2 * k - 2, &zb, &y0)
            .ok_or_else(analyticity_error)?;
        let factor = coef.div(&npow).expect("n > 0");
        center = center.add(&d1.sub(&d0).scale(&factor));
    }

    // ∫₀¹ |g^{(2k_max−1)}| over a grid of cells
    let m = 2 * k_max - 1;
    let mut integral_abs = Ball::zero(RAD_PREC);
    for i in 0..INTEGRAL_CELLS {
        let lo = Float::with_val(p, i) / INTEGRAL_CELLS as u32;
        let hi = Float::with_val(p, i + 1) / INTEGRAL_CELLS as u32;
        let cell = CBall::real(Ball::from_interval(p, &lo, &hi));
        let d = f
            .g_derivative(m, &zb, &cell)
            .ok_or_else(analyticity_error)?;
        integral_abs = integral_abs.add(&Ball::from_float(d.abs_upper()));
    }
    let integral_abs = integral_abs.div_i64(INTEGRAL_CELLS as i64);

    let b = bernoulli(2 * k_max)?;
    let c = Rational::from(b.abs_ref())
        / Rational::from(Integer::factorial(2 * k_max as u32).complete());
    let c = Ball::from_rational(p, &c);
    let e = 2 * k_max as u32 - 1;
    let n_small = nb.powi(e).recip().expect("n > 0");
    let scale_a = nb.mul(&n_small);
    let scale_b = n_small.mul_i64(2);
    let scale = if scale_a.upper() >= scale_b.upper() {
        scale_a
    } else {
        scale_b
    };
    let remainder = c.mul(&integral_abs).mul(&scale).upper();

    Ok(center.to_disk().inflate(&remainder))
}
