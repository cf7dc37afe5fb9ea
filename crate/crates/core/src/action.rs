//! Saddle-point data for Stirling numbers of the second kind.
//!
//! With `y = e^{-ζ}` the rescaled action around a point `ζ` is
//! `S_ζ(x) = (1 − y) ln(e^{ζ+x} − 1) − ζ ln(ζ + x)`, whose Taylor
//! coefficients are elementary in `ζ` and `y` through the Eulerian
//! polynomials.

use rug::float::Round;
use rug::{Float, Integer, Rational};

use crate::ball::Ball;
use crate::error::{Error, Result};
use crate::real::{Interval, Real};
use crate::series::{eulerian_polynomial, solve_a_from_b, Cone, FnComponent, SignDecomposition};

/// Working precision of saddle computations.
pub const SADDLE_PREC: u32 = 192;

/// A Stirling instance: `n_elements` items into `k_blocks` non-empty blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ProblemSize {
    n_elements: u64,
    k_blocks: u64,
}

impl ProblemSize {
    pub fn new(n_elements: u64, k_blocks: u64) -> Result<ProblemSize> {
        if k_blocks == 0 || k_blocks > n_elements {
            return Err(Error::InvalidArgument(format!(
                "need 1 <= k <= n, got n = {n_elements}, k = {k_blocks}"
            )));
        }
        Ok(ProblemSize {
            n_elements,
            k_blocks,
        })
    }

    pub fn n_elements(&self) -> u64 {
        self.n_elements
    }

    pub fn k_blocks(&self) -> u64 {
        self.k_blocks
    }

    /// Number of non-minimal elements, `n − k`.
    pub fn m(&self) -> u64 {
        self.n_elements - self.k_blocks
    }

    /// Exactly one partition exists.
    pub fn is_degenerate(&self) -> bool {
        self.k_blocks == self.n_elements || self.k_blocks == 1
    }
}

/// Which saddle equation a state tracks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SaddleTarget {
    /// `ζ/(1 − e^{−ζ}) = n/k`, the counting saddle.
    Counting,
    /// `ζ/(1 − e^{−ζ}) = (n+1)/k`, the saddle of the coefficient integral
    /// used by the bounds.
    Integral,
}

impl SaddleTarget {
    pub fn ratio(self, size: ProblemSize) -> Rational {
        let num = match self {
            SaddleTarget::Counting => size.n_elements,
            SaddleTarget::Integral => size.n_elements + 1,
        };
        Rational::from((Integer::from(num), Integer::from(size.k_blocks)))
    }
}

/// Saddle location with a certified error radius.
#[derive(Clone, Debug)]
pub struct SaddleState {
    size: ProblemSize,
    target: SaddleTarget,
    zeta: Float,
    error_radius: Float,
    degenerate: bool,
    bisection_fallback: bool,
}

impl SaddleState {
    pub fn size(&self) -> ProblemSize {
        self.size
    }

    pub fn target(&self) -> SaddleTarget {
        self.target
    }

    pub fn ratio(&self) -> Rational {
        self.target.ratio(self.size)
    }

    /// Midpoint of the certified bracket.
    pub fn zeta(&self) -> &Float {
        &self.zeta
    }

    pub fn error_radius(&self) -> &Float {
        &self.error_radius
    }

    pub fn error_radius_f64(&self) -> f64 {
        Float::with_val_round(53, &self.error_radius, Round::Up)
            .0
            .to_f64()
    }

    /// `[ζ − r, ζ + r]` as a ball.
    pub fn zeta_ball(&self) -> Ball {
        Ball::with_radius(self.zeta.clone(), &self.error_radius)
    }

    /// The ratio is 1 and the saddle sits at the `ζ → 0` limit.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// The last update had to restart from a bisection.
    pub fn used_bisection_fallback(&self) -> bool {
        self.bisection_fallback
    }

    /// Boltzmann parameter `x* = (1 − e^{−ζ})/k`.
    pub fn x_star(&self) -> Ball {
        let z = self.zeta_ball();
        z.neg().exp_m1().neg().div_i64(self.size.k_blocks as i64)
    }

    fn degenerate_state(size: ProblemSize, target: SaddleTarget) -> SaddleState {
        SaddleState {
            size,
            target,
            zeta: Float::new(SADDLE_PREC),
            error_radius: Float::new(SADDLE_PREC),
            degenerate: true,
            bisection_fallback: false,
        }
    }
}

/// `z/(1 − e^{−z})`; `None` if the enclosure of `z` reaches zero.
pub fn saddle_function<R: Real>(z: &R) -> Option<R> {
    let d = z.neg().exp_m1().neg();
    z.div(&d)
}

/// `z/(1 − e^{−z}) − n/k`, the counting saddle residual.
pub fn saddle_residual(zeta: &Ball, size: ProblemSize) -> Result<Ball> {
    residual(zeta, &SaddleTarget::Counting.ratio(size))
}

fn residual(zeta: &Ball, ratio: &Rational) -> Result<Ball> {
    if !zeta.is_positive() {
        return Err(Error::InvalidArgument("zeta must be positive".into()));
    }
    let h = saddle_function(zeta).ok_or(Error::InvalidArgument("zeta must be positive".into()))?;
    Ok(h.sub(&Ball::from_rational(zeta.prec(), ratio)))
}

/// Derivative of `z/(1 − e^{−z})`.
fn saddle_derivative(z: &Ball) -> Option<Ball> {
    let e = z.neg().exp();
    let d = Ball::one(z.prec()).sub(&e);
    d.sub(&z.mul(&e)).div(&d.sqr())
}

fn sign_of(zeta: &Float, ratio: &Rational) -> Option<std::cmp::Ordering> {
    let b = Ball::from_float(zeta.clone()).with_prec(SADDLE_PREC);
    let r = residual(&b, ratio).ok()?;
    if r.is_positive() {
        Some(std::cmp::Ordering::Greater)
    } else if r.is_negative() {
        Some(std::cmp::Ordering::Less)
    } else {
        None
    }
}

fn bisect(size: ProblemSize, target: SaddleTarget, target_error: f64) -> SaddleState {
    let ratio = target.ratio(size);
    // z < z/(1 − e^{−z}) < z + 1 brackets the root in (r − 1, r)
    let r = Float::with_val(SADDLE_PREC, &ratio);
    let mut lo = Float::with_val(SADDLE_PREC, &r - 1u32);
    if lo < 0 {
        lo = Float::new(SADDLE_PREC);
    }
    let mut hi = r;
    let tol = Float::with_val(SADDLE_PREC, target_error.max(1e-50));
    loop {
        let width = Float::with_val(SADDLE_PREC, &hi - &lo);
        if width <= Float::with_val(SADDLE_PREC, &tol * 2u32) {
            break;
        }
        let mid = Float::with_val(SADDLE_PREC, &lo + &hi) / 2u32;
        if mid <= lo || mid >= hi {
            break;
        }
        match sign_of(&mid, &ratio) {
            Some(std::cmp::Ordering::Greater) => hi = mid,
            Some(_) => lo = mid,
            None => {
                // residual indistinguishable from zero: shrink around mid
                let half = Float::with_val(SADDLE_PREC, &tol / 2u32);
                let a = Float::with_val(SADDLE_PREC, &mid - &half);
                let b = Float::with_val(SADDLE_PREC, &mid + &half);
                if sign_of(&a, &ratio) == Some(std::cmp::Ordering::Less)
                    && sign_of(&b, &ratio) == Some(std::cmp::Ordering::Greater)
                {
                    lo = a;
                    hi = b;
                }
                break;
            }
        }
    }
    let zeta = Float::with_val(SADDLE_PREC, &lo + &hi) / 2u32;
    let rad = Float::with_val_round(SADDLE_PREC, &hi - &zeta, Round::Up).0;
    let rad2 = Float::with_val_round(SADDLE_PREC, &zeta - &lo, Round::Up).0;
    SaddleState {
        size,
        target,
        zeta,
        error_radius: if rad > rad2 { rad } else { rad2 },
        degenerate: false,
        bisection_fallback: false,
    }
}

/// Certified saddle by bisection, with radius at most `target_error`
/// (default `N^{−2}`).
pub fn solve_saddle_initial(size: ProblemSize, target_error: Option<f64>) -> SaddleState {
    solve_saddle(size, SaddleTarget::Counting, target_error)
}

/// As [`solve_saddle_initial`] for either saddle equation.
pub fn solve_saddle(
    size: ProblemSize,
    target: SaddleTarget,
    target_error: Option<f64>,
) -> SaddleState {
    if target == SaddleTarget::Counting && size.k_blocks == size.n_elements {
        return SaddleState::degenerate_state(size, target);
    }
    let n = size.n_elements as f64;
    bisect(size, target, target_error.unwrap_or(1.0 / (n * n)))
}

/// One Newton step towards the saddle of `new_size`, starting at `state`.
///
/// The new radius is `2|F(ζ₁)|/F'(ζ₁)` (floored near the working
/// precision) and is accepted only if `F` changes sign across it; otherwise
/// the state is recomputed by bisection.
pub fn newton_step(state: &SaddleState, new_size: ProblemSize) -> SaddleState {
    let target = state.target;
    let coarse = new_size != state.size
        || state.error_radius_f64() >= state.zeta.to_f64().abs() * 2f64.powi(-40);
    if coarse
        && !state.degenerate
        && !(target == SaddleTarget::Counting && new_size.is_degenerate())
    {
        if let Some((z, r)) = newton_step_f64(state.zeta.to_f64(), &target.ratio(new_size)) {
            return SaddleState {
                size: new_size,
                target,
                zeta: Float::with_val(SADDLE_PREC, z),
                error_radius: Float::with_val(SADDLE_PREC, r),
                degenerate: false,
                bisection_fallback: false,
            };
        }
    }
    newton_step_ball(state, new_size)
}

/// One double-precision step, certified by interval sign checks.
fn newton_step_f64(z0: f64, ratio: &Rational) -> Option<(f64, f64)> {
    if !(z0 > 0.0) || !z0.is_finite() {
        return None;
    }
    let rf = ratio.to_f64();
    let em = -(-z0).exp_m1();
    let e = (-z0).exp();
    let f = z0 / em - rf;
    let d = (em - z0 * e) / (em * em);
    let z1 = z0 - f / d;
    if !(z1 > 0.0) || !(d > 0.0) {
        return None;
    }
    let r_iv = Interval::from_rational(53, ratio);
    let h = |z: f64| -> Option<Interval> {
        let zi = Interval::new(z, z);
        let den = zi.neg().exp_m1().neg();
        zi.div(&den).map(|q| q.sub(&r_iv))
    };
    let f1 = h(z1)?;
    let mut r =
        (2.0 * f1.lower_f64().abs().max(f1.upper_f64().abs()) / d).max(4.0 * f64::EPSILON * z1);
    for _ in 0..4 {
        let lo = z1 - r;
        if lo > 0.0 && h(lo)?.upper_f64() < 0.0 && h(z1 + r)?.lower_f64() > 0.0 {
            // lo and z1 + r are exact doubles bracketing the root
            let rad = (z1 - lo).max((z1 + r) - z1);
            return Some((z1, rad * (1.0 + 4.0 * f64::EPSILON)));
        }
        r *= 4.0;
    }
    None
}

fn newton_step_ball(state: &SaddleState, new_size: ProblemSize) -> SaddleState {
    let target = state.target;
    if target == SaddleTarget::Counting && new_size.k_blocks == new_size.n_elements {
        return SaddleState::degenerate_state(new_size, target);
    }
    let ratio = target.ratio(new_size);
    let n = new_size.n_elements as f64;
    let fallback = || {
        let mut s = bisect(new_size, target, 1.0 / (n * n));
        s.bisection_fallback = true;
        s
    };
    if state.degenerate || state.zeta <= 0 {
        return fallback();
    }
    let z0 = Ball::from_float(state.zeta.clone()).with_prec(SADDLE_PREC);
    let (Ok(f0), Some(d0)) = (residual(&z0, &ratio), saddle_derivative(&z0)) else {
        return fallback();
    };
    let step = match f0.div(&d0) {
        Some(s) => s,
        None => return fallback(),
    };
    let z1 = Float::with_val(SADDLE_PREC, z0.mid() - step.mid());
    if z1 <= 0 {
        return fallback();
    }
    match certify(&z1, &ratio) {
        Some(rad) => SaddleState {
            size: new_size,
            target,
            zeta: z1,
            error_radius: rad,
            degenerate: false,
            bisection_fallback: false,
        },
        None => fallback(),
    }
}

/// Radius `r` with `F(ζ − r) < 0 < F(ζ + r)`, if one of the form
/// `2|F|/F'` (or its floor) can be certified.
fn certify(z: &Float, ratio: &Rational) -> Option<Float> {
    let zb = Ball::from_float(z.clone()).with_prec(SADDLE_PREC);
    let f = residual(&zb, ratio).ok()?;
    let d = saddle_derivative(&zb)?;
    let est = Ball::from_float(f.abs_upper()).mul_i64(2).div(&d)?.upper();
    let mut floor = Float::with_val(SADDLE_PREC, &*z.as_abs());
    if floor < 1 {
        floor = Float::with_val(SADDLE_PREC, 1);
    }
    floor >>= SADDLE_PREC - 24;
    let mut r = if est > floor { est } else { floor };
    for _ in 0..4 {
        let lo = Float::with_val_round(SADDLE_PREC, z - &r, Round::Down).0;
        let hi = Float::with_val_round(SADDLE_PREC, z + &r, Round::Up).0;
        if lo > 0
            && sign_of(&lo, ratio) == Some(std::cmp::Ordering::Less)
            && sign_of(&hi, ratio) == Some(std::cmp::Ordering::Greater)
        {
            return Some(r);
        }
        r <<= 8;
    }
    None
}

/// Newton steps at a fixed size until the radius is at most `tol`.
/// Returns the refined state and the number of steps taken.
pub fn refine(state: &SaddleState, tol: f64, max_steps: u32) -> (SaddleState, u32) {
    let mut s = state.clone();
    let mut steps = 0;
    while !s.degenerate && s.error_radius_f64() > tol && steps < max_steps {
        s = newton_step_ball(&s, s.size);
        steps += 1;
    }
    (s, steps)
}

/// Taylor coefficients `c₀..c_order` of `w ↦ ln(e^{ζ+w} − 1) − ln(e^ζ − 1)`:
/// `c₁ = 1/(1−y)` and `c_n = (−1)^{n−1} y E_{n−2}(y)/(n!(1−y)^n)` with
/// `y = e^{−ζ}`.
pub fn log_expm1_taylor<R: Real>(zeta: &R, order: usize) -> Result<Vec<R>> {
    let p = zeta.prec();
    let y = zeta.neg().exp();
    let one_minus_y = zeta.neg().exp_m1().neg();
    let inv = R::one(p)
        .div(&one_minus_y)
        .ok_or(Error::DenominatorTouchesZero)?;
    let mut out = vec![R::zero(p)];
    if order == 0 {
        return Ok(out);
    }
    out.push(inv.clone());
    let mut inv_pow = inv.clone();
    let mut fact = Integer::from(1);
    for n in 2..=order {
        inv_pow = inv_pow.mul(&inv);
        fact *= n as u32;
        let e = eulerian_polynomial(n - 2)?;
        let mut poly = R::zero(p);
        for c in e.iter().rev() {
            let c = match c.to_i64() {
                Some(v) => R::from_i64(p, v),
                None => R::from_rational(p, &Rational::from(c)),
            };
            poly = poly.mul(&y).add(&c);
        }
        let mut t = y
            .mul(&poly)
            .mul(&inv_pow)
            .div(&match fact.to_i64() {
                Some(v) => R::from_i64(p, v),
                None => R::from_rational(p, &Rational::from(&fact)),
            })
            .ok_or(Error::DenominatorTouchesZero)?;
        if n % 2 == 0 {
            t = t.neg();
        }
        out.push(t);
    }
    Ok(out)
}

/// `ln(e^z − 1)`, written as `z + ln(1 − e^{−z})` for positive `z`.
pub fn ln_expm1<R: Real>(z: &R) -> Option<R> {
    if z.is_positive() {
        Some(z.add(&z.neg().exp().neg().ln_1p()?))
    } else {
        z.exp_m1().ln()
    }
}

/// Taylor coefficients of `w ↦ ln(ζ + w) − ln ζ`: `c_n = (−1)^{n−1}/(n ζ^n)`.
pub fn log_taylor<R: Real>(zeta: &R, order: usize) -> Result<Vec<R>> {
    let p = zeta.prec();
    let inv = R::one(p).div(zeta).ok_or(Error::DenominatorTouchesZero)?;
    let mut out = vec![R::zero(p)];
    let mut pow = R::one(p);
    for n in 1..=order {
        pow = pow.mul(&inv);
        let t = pow.div_i64(n as i64);
        out.push(if n % 2 == 0 { t.neg() } else { t });
    }
    Ok(out)
}

/// Taylor coefficients of `w ↦ w₁[ln(e^{ζ+w}−1) − ln(e^ζ−1)] − w₂[ln(ζ+w) − ln ζ]`.
pub fn weighted_action_taylor<R: Real>(zeta: &R, w1: &R, w2: &R, order: usize) -> Result<Vec<R>> {
    let a = log_expm1_taylor(zeta, order)?;
    let b = log_taylor(zeta, order)?;
    Ok(a.iter()
        .zip(&b)
        .map(|(x, y)| w1.mul(x).sub(&w2.mul(y)))
        .collect())
}

/// Sign-decomposition (threshold 1) of
/// `w ↦ w₁[ln(e^{ζ+w}−1) − ln(e^ζ−1)] − w₂[ln(ζ+w) − ln ζ]`, `w₁, w₂ >= 0`.
///
/// The first summand has coefficients positive at odd and negative at even
/// orders (cone `(−,+)`); the second the reverse (cone `(+,−)`).
pub fn weighted_action_decomposition<R>(zeta: &R, w1: &R, w2: &R) -> SignDecomposition<R>
where
    R: Real + Send + Sync + 'static,
{
    let radius = zeta.lower_f64();
    let (z1, z2, z3, z4) = (zeta.clone(), zeta.clone(), zeta.clone(), zeta.clone());
    let (a1, a2, b1, b2) = (w1.clone(), w1.clone(), w2.clone(), w2.clone());
    let first = FnComponent::new(
        radius,
        move |x: &R| {
            let v = ln_expm1(&z1.add(x))?.sub(&ln_expm1(&z1)?);
            Some(a1.mul(&v))
        },
        move |order, _| {
            log_expm1_taylor(&z2, order)
                .map(|c| c.iter().map(|t| a2.mul(t)).collect())
                .unwrap_or_default()
        },
    );
    let second = FnComponent::new(
        radius,
        move |x: &R| {
            let v = z3.add(x).ln()?.sub(&z3.ln()?);
            Some(b1.mul(&v).neg())
        },
        move |order, _| {
            log_taylor(&z4, order)
                .map(|c| c.iter().map(|t| b2.mul(t).neg()).collect())
                .unwrap_or_default()
        },
    );
    SignDecomposition::new(1)
        .with(Cone::MinusPlus, first)
        .with(Cone::PlusMinus, second)
}

/// Sign-decomposition of `x ↦ S_ζ(x) − S_ζ(0)` at the state's saddle.
pub fn action_sign_decomposition(state: &SaddleState) -> Result<SignDecomposition<Ball>> {
    if state.degenerate {
        return Err(Error::Degenerate {
            n: state.size.n_elements,
            k: state.size.k_blocks,
        });
    }
    let z = Ball::from_float(state.zeta.clone()).with_prec(SADDLE_PREC);
    let w1 = z.neg().exp_m1().neg();
    Ok(weighted_action_decomposition(&z, &w1, &z))
}

/// Taylor data of the action at the saddle.
#[derive(Clone, Debug)]
pub struct ActionData {
    /// `S'(0), …, S^{(s+1)}(0)`.
    pub derivatives: Vec<Ball>,
    /// `c = (S''(0)/2)^{−1/2}`, mapping `x = c·u`.
    pub scale: Ball,
    /// `b₁, …, b_{s+1}` of the rescaled action `S(cu)/…`; `b₁ = 0`, `b₂ = 1`.
    pub b: Vec<Ball>,
    /// `a₂, …, a_s`.
    pub a: Vec<Ball>,
}

/// Derivatives, rescaling and inverse-series coefficients of `S_ζ` at
/// `x = 0` for the state's `ζ`, to order `s`.
pub fn action_data(state: &SaddleState, s: usize) -> Result<ActionData> {
    if state.degenerate {
        return Err(Error::Degenerate {
            n: state.size.n_elements,
            k: state.size.k_blocks,
        });
    }
    let s = s.max(2);
    let p = SADDLE_PREC;
    let z = Ball::from_float(state.zeta.clone()).with_prec(p);
    let w1 = z.neg().exp_m1().neg();
    let coeffs = weighted_action_taylor(&z, &w1, &z, s + 1)?;
    let mut derivatives = Vec::with_capacity(s + 1);
    let mut fact = Integer::from(1);
    for (j, c) in coeffs.iter().enumerate().skip(1) {
        fact *= j as u32;
        derivatives.push(c.mul(&Ball::from_integer(p, &fact)));
    }
    let scale = Real::sqrt(&coeffs[2])
        .and_then(|r| Ball::one(p).div(&r))
        .ok_or(Error::DenominatorTouchesZero)?;
    let mut b = vec![Ball::zero(p), Ball::one(p)];
    let mut cpow = scale.sqr();
    for c in coeffs.iter().skip(3) {
        cpow = cpow.mul(&scale);
        b.push(c.mul(&cpow));
    }
    let a = solve_a_from_b(&b[2..]);
    Ok(ActionData {
        derivatives,
        scale,
        b,
        a,
    })
}

/// Boltzmann parameter: the root `x ∈ (0, 1/k)` of
/// `n/k = −ln(1 − kx)/(kx)`, as a certified ball.
pub fn solve_boltzmann_x(size: ProblemSize) -> Result<Ball> {
    if size.k_blocks == size.n_elements {
        return Err(Error::Degenerate {
            n: size.n_elements,
            k: size.k_blocks,
        });
    }
    let p = SADDLE_PREC;
    let ratio = Ball::from_rational(p, &SaddleTarget::Counting.ratio(size));
    // g(u) = −ln(1−u)/u increases from 1 to ∞ on (0, 1)
    let g = |u: &Float| -> Option<Ball> {
        let ub = Ball::from_float(u.clone()).with_prec(p);
        Some(ub.neg().ln_1p()?.neg().div(&ub)?.sub(&ratio))
    };
    let mut lo = Float::new(p);
    let mut hi = Float::with_val(p, 1);
    for _ in 0..(p - 8) {
        let mid = Float::with_val(p, &lo + &hi) / 2u32;
        if mid <= lo || mid >= hi {
            break;
        }
        match g(&mid) {
            Some(v) if v.is_positive() => hi = mid,
            Some(v) if v.is_negative() => lo = mid,
            _ => break,
        }
    }
    let u = Ball::from_interval(p, &lo, &hi);
    Ok(u.div_i64(size.k_blocks as i64))
}
