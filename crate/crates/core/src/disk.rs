//! Complex disks `a ∼+ b` (center `a`, radius `b`) with outward rounding.
//!
//! Centers are computed through real balls at the caller's precision; the
//! balls' radii are folded into the disk radius, so each operation returns a
//! disk containing the exact image of its input disks.

use std::fmt;

use rug::float::Round;
use rug::{Float, Rational};

use crate::ball::{Ball, RAD_PREC};
use crate::error::{Error, Result};

/// Complex number with big-float parts.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Complex {
        Complex { re, im }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Complex {
        Complex::new(Float::with_val(prec, re), Float::with_val(prec, im))
    }

    pub fn real(x: Float) -> Complex {
        let p = x.prec();
        Complex::new(x, Float::new(p))
    }

    fn balls(&self, prec: u32) -> (Ball, Ball) {
        (
            Ball::from_float(self.re.clone()).with_prec(prec),
            Ball::from_float(self.im.clone()).with_prec(prec),
        )
    }

    /// Upper bound of the modulus.
    pub fn abs_upper(&self) -> Float {
        let (re, im) = self.balls(self.re.prec().max(self.im.prec()));
        re.sqr()
            .add(&im.sqr())
            .sqrt()
            .expect("non-negative")
            .upper()
    }
}

/// Closed disk in the complex plane.
#[derive(Clone, PartialEq)]
pub struct Disk {
    center: Complex,
    radius: Float,
}

impl fmt::Debug for Disk {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({:.17e} + {:.17e}i) ∼+ {:.3e}",
            self.center.re.to_f64(),
            self.center.im.to_f64(),
            self.radius.to_f64()
        )
    }
}

fn up(x: Float) -> Float {
    Float::with_val_round(RAD_PREC, &x, Round::Up).0
}

impl Disk {
    /// Disk with the given center and radius; the radius is rounded up.
    pub fn new(center: Complex, radius: &Float) -> Result<Disk> {
        if radius.is_nan() || radius.is_sign_negative() && !radius.is_zero() {
            return Err(Error::InvalidArgument("negative disk radius".into()));
        }
        Ok(Disk {
            center,
            radius: up(radius.clone()),
        })
    }

    pub fn point(center: Complex) -> Disk {
        Disk {
            center,
            radius: Float::new(RAD_PREC),
        }
    }

    pub fn real(center: Float, radius: &Float) -> Result<Disk> {
        Disk::new(Complex::real(center), radius)
    }

    pub fn zero(prec: u32) -> Disk {
        Disk::point(Complex::real(Float::new(prec)))
    }

    /// Disk enclosing a real ball.
    pub fn from_ball(b: &Ball) -> Disk {
        Disk {
            center: Complex::real(b.mid().clone()),
            radius: b.rad().clone(),
        }
    }

    /// Disk from separate enclosures of the real and imaginary parts.
    fn from_parts(re: &Ball, im: &Ball, extra: &Float) -> Disk {
        let r = up(Float::with_val(RAD_PREC, re.rad() + im.rad()));
        let r = up(Float::with_val(RAD_PREC, &r + extra));
        Disk {
            center: Complex::new(re.mid().clone(), im.mid().clone()),
            radius: r,
        }
    }

    pub fn center(&self) -> &Complex {
        &self.center
    }

    pub fn radius(&self) -> &Float {
        &self.radius
    }

    fn prec(&self) -> u32 {
        self.center.re.prec().max(self.center.im.prec())
    }

    /// Real segment `[re - r, re + r]` of a disk with real center, as a ball.
    pub fn real_ball(&self) -> Ball {
        Ball::with_radius(self.center.re.clone(), &self.radius)
    }

    /// Exact containment test for a point.
    pub fn contains(&self, z: &Complex) -> bool {
        let q = |x: &Float| x.to_rational().expect("finite");
        let dr = q(&z.re) - q(&self.center.re);
        let di = q(&z.im) - q(&self.center.im);
        let d2 = Rational::from(&dr * &dr) + Rational::from(&di * &di);
        let r = q(&self.radius);
        d2 <= Rational::from(&r * &r)
    }

    /// Same center, radius widened by a non-negative amount.
    pub fn inflate(&self, extra: &Float) -> Disk {
        let r = up(Float::with_val(RAD_PREC, &self.radius + &*extra.as_abs()));
        Disk {
            center: self.center.clone(),
            radius: r,
        }
    }

    pub fn contains_disk(&self, other: &Disk) -> bool {
        // |c1 - c2| + r2 <= r1
        let (dr, di) = (
            Ball::from_float(self.center.re.clone())
                .sub(&Ball::from_float(other.center.re.clone())),
            Ball::from_float(self.center.im.clone())
                .sub(&Ball::from_float(other.center.im.clone())),
        );
        let d = dr
            .sqr()
            .add(&di.sqr())
            .sqrt()
            .expect("non-negative")
            .upper();
        let need = Float::with_val_round(RAD_PREC, &d + &other.radius, Round::Up).0;
        need <= self.radius
    }
}

/// `Σ cᵢ·Dᵢ`: center `Σ cᵢaᵢ`, radius `Σ |cᵢ| bᵢ`, outward rounded.
pub fn affine(terms: &[(Complex, Disk)]) -> Disk {
    let prec = terms
        .iter()
        .map(|(c, d)| c.re.prec().max(c.im.prec()).max(d.prec()))
        .max()
        .unwrap_or(crate::ball::MIN_PREC);
    let mut re = Ball::zero(prec);
    let mut im = Ball::zero(prec);
    let mut rad = Float::new(RAD_PREC);
    for (c, d) in terms {
        let (cr, ci) = c.balls(prec);
        let (ar, ai) = d.center.balls(prec);
        re = re.add(&cr.mul(&ar).sub(&ci.mul(&ai)));
        im = im.add(&cr.mul(&ai).add(&ci.mul(&ar)));
        let cabs = c.abs_upper();
        rad = up(Float::with_val(
            RAD_PREC,
            &rad + up(Float::with_val(RAD_PREC, &cabs * &d.radius)),
        ));
    }
    Disk::from_parts(&re, &im, &rad)
}

/// `exp(0 ∼+ b) ⊆ 1 ∼+ (e^b − 1)`.
pub fn exp_unit(b: &Float) -> Result<Disk> {
    if !b.is_finite() || b.is_sign_negative() && !b.is_zero() {
        return Err(Error::InvalidArgument(
            "exp_unit needs a finite non-negative radius".into(),
        ));
    }
    let r = Float::with_val_round(RAD_PREC, b.exp_m1_ref(), Round::Up).0;
    Disk::real(Float::with_val(b.prec().max(crate::ball::MIN_PREC), 1), &r)
}

/// Quotient of two real segments `(a ∼+ b)/(c ∼+ d)` with `a > b >= 0`,
/// `c > d >= 0`, as `((ac + bd) ∼+ (ad + bc))/(c² − d²)`.
///
/// The result is the exact range of `x/y` for real `x ∈ [a−b, a+b]`,
/// `y ∈ [c−d, c+d]`. For complex points of the disks use
/// [`ratio_complex`].
pub fn ratio(num: &Disk, den: &Disk) -> Result<Disk> {
    let (a, b, c, d) = ratio_inputs(num, den)?;
    let c2d2 = c.sqr().sub(&d.sqr());
    let center = a
        .mul(&c)
        .add(&b.mul(&d))
        .div(&c2d2)
        .ok_or(Error::DenominatorTouchesZero)?;
    let rad = a
        .mul(&d)
        .add(&b.mul(&c))
        .div(&c2d2)
        .ok_or(Error::DenominatorTouchesZero)?;
    let extra = Float::with_val_round(RAD_PREC, rad.upper(), Round::Up).0;
    Ok(Disk::from_parts(
        &center,
        &Ball::zero(center.prec()),
        &extra,
    ))
}

/// Disk enclosing `x/y` for all complex `x ∈ num`, `y ∈ den`, both centers
/// real positive: `((ac + bd) ∼+ (ad + bc + 2bd))/(c² − d²)`.
pub fn ratio_complex(num: &Disk, den: &Disk) -> Result<Disk> {
    let (a, b, c, d) = ratio_inputs(num, den)?;
    let c2d2 = c.sqr().sub(&d.sqr());
    let center = a
        .mul(&c)
        .add(&b.mul(&d))
        .div(&c2d2)
        .ok_or(Error::DenominatorTouchesZero)?;
    let bd = b.mul(&d);
    let rad = a
        .mul(&d)
        .add(&b.mul(&c))
        .add(&bd.add(&bd))
        .div(&c2d2)
        .ok_or(Error::DenominatorTouchesZero)?;
    let extra = Float::with_val_round(RAD_PREC, rad.upper(), Round::Up).0;
    Ok(Disk::from_parts(
        &center,
        &Ball::zero(center.prec()),
        &extra,
    ))
}

fn ratio_inputs(num: &Disk, den: &Disk) -> Result<(Ball, Ball, Ball, Ball)> {
    if !num.center.im.is_zero() || !den.center.im.is_zero() {
        return Err(Error::InvalidArgument("ratio needs real centers".into()));
    }
    let prec = num.prec().max(den.prec());
    let a = Ball::from_float(num.center.re.clone()).with_prec(prec);
    let b = Ball::from_float(num.radius.clone());
    let c = Ball::from_float(den.center.re.clone()).with_prec(prec);
    let d = Ball::from_float(den.radius.clone());
    if !(den.center.re > den.radius) {
        return Err(Error::DenominatorTouchesZero);
    }
    if !(num.center.re > num.radius) {
        return Err(Error::InvalidArgument(
            "numerator disk must exclude zero".into(),
        ));
    }
    Ok((a, b, c, d))
}

/// Enclosure factory for `e^{P(z)}`, `P(z) = p₁z + … + p_d z^d`, on `|z| <= η`.
#[derive(Clone, Debug)]
pub struct ExpPoly {
    p1: Complex,
    eta: Float,
    /// `(e^{|p₂|η² + … + |p_d|η^d} − 1)/η²`, rounded up.
    factor: Float,
    prec: u32,
}

/// Build the enclosure `e^{P(z)} ∈ e^{p₁z}(1 ∼+ |z|²(e^{Σ|pⱼ|ηʲ} − 1)/η²)`.
///
/// `coeffs[j]` is the coefficient of `z^(j+1)`.
pub fn exp_poly(coeffs: &[Complex], eta: &Float) -> Result<ExpPoly> {
    if !(*eta > 0) || !eta.is_finite() {
        return Err(Error::InvalidArgument("exp_poly needs eta > 0".into()));
    }
    let prec = coeffs
        .iter()
        .map(|c| c.re.prec().max(c.im.prec()))
        .max()
        .unwrap_or(crate::ball::MIN_PREC)
        .max(crate::ball::MIN_PREC);
    let e = Ball::from_float(eta.clone());
    let mut s = Ball::zero(RAD_PREC);
    let mut pow = e.sqr();
    for c in coeffs.iter().skip(1) {
        s = s.add(&Ball::from_float(c.abs_upper()).mul(&pow));
        pow = pow.mul(&e);
    }
    let factor = Ball::from_float(s.upper())
        .exp_m1()
        .div(&e.sqr())
        .expect("eta > 0")
        .upper();
    let p1 = coeffs
        .first()
        .cloned()
        .unwrap_or_else(|| Complex::from_f64(prec, 0.0, 0.0));
    Ok(ExpPoly {
        p1,
        eta: eta.clone(),
        factor: up(factor),
        prec,
    })
}

impl ExpPoly {
    /// Disk enclosing `e^{P(z)}`; `z` must satisfy `|z| <= η`.
    pub fn at(&self, z: &Complex) -> Result<Disk> {
        let zabs = z.abs_upper();
        if zabs > self.eta {
            return Err(Error::OutsideAnalyticity(format!(
                "|z| = {} exceeds eta = {}",
                zabs.to_f64(),
                self.eta.to_f64()
            )));
        }
        let (pr, pi) = self.p1.balls(self.prec);
        let (zr, zi) = z.balls(self.prec);
        let wr = pr.mul(&zr).sub(&pi.mul(&zi));
        let wi = pr.mul(&zi).add(&pi.mul(&zr));
        let m = wr.exp();
        let re = m.mul(&wi.cos());
        let im = m.mul(&wi.sin());
        // |e^{p1 z}| · |z|² · factor
        let z2 = Ball::from_float(zabs).sqr();
        let extra = m.abs_upper();
        let extra = Ball::from_float(extra)
            .mul(&z2)
            .mul(&Ball::from_float(self.factor.clone()))
            .upper();
        Ok(Disk::from_parts(&re, &im, &extra))
    }

    pub fn eta(&self) -> &Float {
        &self.eta
    }
}

/// Rectangular complex enclosure: independent real balls for both parts.
#[derive(Clone, Debug)]
pub struct CBall {
    pub re: Ball,
    pub im: Ball,
}

impl CBall {
    pub fn new(re: Ball, im: Ball) -> CBall {
        CBall { re, im }
    }

    pub fn real(re: Ball) -> CBall {
        let p = re.prec();
        CBall {
            re,
            im: Ball::zero(p),
        }
    }

    pub fn from_complex(z: &Complex, prec: u32) -> CBall {
        let (re, im) = z.balls(prec);
        CBall { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn add(&self, o: &CBall) -> CBall {
        CBall::new(self.re.add(&o.re), self.im.add(&o.im))
    }

    pub fn sub(&self, o: &CBall) -> CBall {
        CBall::new(self.re.sub(&o.re), self.im.sub(&o.im))
    }

    pub fn neg(&self) -> CBall {
        CBall::new(self.re.neg(), self.im.neg())
    }

    pub fn mul(&self, o: &CBall) -> CBall {
        CBall::new(
            self.re.mul(&o.re).sub(&self.im.mul(&o.im)),
            self.re.mul(&o.im).add(&self.im.mul(&o.re)),
        )
    }

    pub fn scale(&self, k: &Ball) -> CBall {
        CBall::new(self.re.mul(k), self.im.mul(k))
    }

    pub fn powi(&self, n: u32) -> CBall {
        let mut acc = CBall::real(Ball::one(self.prec()));
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// `None` if the divisor may vanish.
    pub fn div(&self, o: &CBall) -> Option<CBall> {
        let n2 = o.re.sqr().add(&o.im.sqr());
        let re = self.re.mul(&o.re).add(&self.im.mul(&o.im));
        let im = self.im.mul(&o.re).sub(&self.re.mul(&o.im));
        Some(CBall::new(re.div(&n2)?, im.div(&n2)?))
    }

    /// Upper bound of the modulus over the rectangle.
    pub fn abs_upper(&self) -> Float {
        let a = Ball::from_float(self.re.abs_upper());
        let b = Ball::from_float(self.im.abs_upper());
        a.sqr().add(&b.sqr()).sqrt().expect("non-negative").upper()
    }

    /// Principal logarithm; requires a strictly positive real part.
    pub fn ln(&self) -> Option<CBall> {
        if !self.re.is_positive() {
            return None;
        }
        let m = self.re.sqr().add(&self.im.sqr()).ln()?.div_i64(2);
        let arg = self.im.div(&self.re)?.atan();
        Some(CBall::new(m, arg))
    }

    pub fn to_disk(&self) -> Disk {
        Disk::from_parts(&self.re, &self.im, &Float::new(RAD_PREC))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::{RngCore, SeedableRng};

    fn f(x: f64) -> Float {
        Float::with_val(64, x)
    }

    fn close(x: &Float, v: f64) -> bool {
        (x.to_f64() - v).abs() <= 1e-15 * v.abs().max(1.0)
    }

    fn unit(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform point of the disk of radius `r` around `(cx, cy)`, kept off
    /// the boundary so double rounding cannot push it outside.
    fn point_in(rng: &mut ChaCha8Rng, cx: f64, cy: f64, r: f64) -> (f64, f64) {
        let rho = r * (1.0 - 1e-9) * unit(rng).sqrt();
        let th = 2.0 * std::f64::consts::PI * unit(rng);
        (cx + rho * th.cos(), cy + rho * th.sin())
    }

    #[test]
    fn affine_identities() {
        let d1 = Disk::new(Complex::from_f64(64, 1.0, 2.0), &f(0.5)).unwrap();
        let d2 = Disk::new(Complex::from_f64(64, -3.0, 0.25), &f(0.25)).unwrap();
        let one = Complex::from_f64(64, 1.0, 0.0);
        let s = affine(&[(one.clone(), d1.clone()), (one, d2)]);
        assert!(close(&s.center().re, -2.0));
        assert!(close(&s.center().im, 2.25));
        assert!(close(s.radius(), 0.75) && *s.radius() >= 0.75);
        let c = Complex::from_f64(64, 0.0, 2.0);
        let scaled = affine(&[(c, d1)]);
        assert!(close(&scaled.center().re, -4.0));
        assert!(close(&scaled.center().im, 2.0));
        assert!(close(scaled.radius(), 1.0) && *scaled.radius() >= 1.0);
        let empty = affine(&[]);
        assert!(empty.center().re.is_zero() && empty.radius().is_zero());
    }

    #[test]
    fn exp_unit_values() {
        let d = exp_unit(&f(0.0)).unwrap();
        assert_eq!(d.center().re, 1.0);
        assert!(d.radius().is_zero());
        let d = exp_unit(&f(1.0)).unwrap();
        let e1 = std::f64::consts::E - 1.0;
        assert!((d.radius().to_f64() - e1).abs() < 1e-15);
        assert!(*d.radius() >= Float::with_val(200, 1).exp() - 1u32);
    }

    #[test]
    fn ratio_values() {
        let one = Disk::real(f(1.0), &f(0.0)).unwrap();
        let two = Disk::real(f(2.0), &f(0.0)).unwrap();
        let q = ratio(&one, &two).unwrap();
        assert!(close(&q.center().re, 0.5));
        assert!(q.radius().to_f64() < 1e-18);
        let q = ratio(
            &Disk::real(f(2.0), &f(1.0)).unwrap(),
            &Disk::real(f(3.0), &f(1.0)).unwrap(),
        )
        .unwrap();
        assert!(close(&q.center().re, 7.0 / 8.0));
        assert!(close(q.radius(), 5.0 / 8.0) && *q.radius() >= 5.0 / 8.0);
        let bad = ratio(&one, &Disk::real(f(1.0), &f(1.0)).unwrap());
        assert_eq!(bad, Err(Error::DenominatorTouchesZero));
    }

    #[test]
    fn segment_ratio_is_real_only() {
        // x = 2 + i and y = 2.4 - 0.8i lie in 2 ∼+ 1 and 3 ∼+ 1
        let num = Disk::real(f(2.0), &f(1.0)).unwrap();
        let den = Disk::real(f(3.0), &f(1.0)).unwrap();
        let q = Complex::from_f64(64, 0.625, 0.625);
        assert!(!ratio(&num, &den).unwrap().contains(&q));
        assert!(ratio_complex(&num, &den).unwrap().contains(&q));
    }

    #[test]
    fn ratio_monte_carlo() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let num = Disk::real(f(2.0), &f(1.0)).unwrap();
        let den = Disk::real(f(3.0), &f(1.5)).unwrap();
        let q = ratio(&num, &den).unwrap();
        let qc = ratio_complex(&num, &den).unwrap();
        for _ in 0..20_000 {
            let x = 1.0 + 2.0 * unit(&mut rng);
            let y = 1.5 + 3.0 * unit(&mut rng);
            assert!(q.contains(&Complex::from_f64(64, x / y, 0.0)));
            let (xr, xi) = point_in(&mut rng, 2.0, 0.0, 1.0);
            let (yr, yi) = point_in(&mut rng, 3.0, 0.0, 1.5);
            let (xr, xi, yr, yi) = (f(xr), f(xi), f(yr), f(yi));
            let d = Float::with_val(256, &yr * &yr) + Float::with_val(256, &yi * &yi);
            let qr = (Float::with_val(256, &xr * &yr) + Float::with_val(256, &xi * &yi)) / &d;
            let qi = (Float::with_val(256, &xi * &yr) - Float::with_val(256, &xr * &yi)) / &d;
            assert!(qc.contains(&Complex::new(qr, qi)));
        }
    }

    #[test]
    fn exp_poly_values() {
        let p = [Complex::from_f64(64, 0.5, -0.25)];
        let e = exp_poly(&p, &f(1.0)).unwrap();
        let d = e.at(&Complex::from_f64(64, 0.3, 0.1)).unwrap();
        assert!(d.radius().to_f64() < 1e-15);
        let p = [
            Complex::from_f64(64, 0.0, 0.0),
            Complex::from_f64(64, 1.0, 0.0),
        ];
        let e = exp_poly(&p, &f(1.0)).unwrap();
        let d = e.at(&Complex::from_f64(64, 0.5, 0.0)).unwrap();
        assert_eq!(d.center().re, 1.0);
        let want = 0.25 * (std::f64::consts::E - 1.0);
        assert!((d.radius().to_f64() - want).abs() < 1e-15);
        assert!(e.at(&Complex::from_f64(64, 1.5, 0.0)).is_err());
    }
}
