//! Sign-decompositions and the remainder bounds they make computable.

use crate::error::{Error, Result};
use crate::real::Real;

/// Sign pattern of the Taylor coefficients of index at least the
/// threshold: `σ` for even indices, `τ` for odd ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Cone {
    PlusPlus,
    PlusMinus,
    MinusPlus,
    MinusMinus,
}

impl Cone {
    pub const ALL: [Cone; 4] = [
        Cone::PlusPlus,
        Cone::PlusMinus,
        Cone::MinusPlus,
        Cone::MinusMinus,
    ];

    /// Sign (`+1` or `-1`) required for coefficient index `j`.
    pub fn sign(self, j: usize) -> i32 {
        let (even, odd) = match self {
            Cone::PlusPlus => (1, 1),
            Cone::PlusMinus => (1, -1),
            Cone::MinusPlus => (-1, 1),
            Cone::MinusMinus => (-1, -1),
        };
        if j % 2 == 0 {
            even
        } else {
            odd
        }
    }

    /// Evaluation point (`+1` or `-1` times `η`) at which every tail
    /// monomial has the same sign.
    pub fn probe_sign(self) -> i64 {
        match self {
            Cone::PlusPlus | Cone::MinusMinus => 1,
            Cone::PlusMinus | Cone::MinusPlus => -1,
        }
    }

    fn index(self) -> usize {
        match self {
            Cone::PlusPlus => 0,
            Cone::PlusMinus => 1,
            Cone::MinusPlus => 2,
            Cone::MinusMinus => 3,
        }
    }
}

/// Analytic function near the origin, evaluable at real points.
pub trait Component<R: Real>: Send + Sync {
    /// Radius of the disk of analyticity around the origin.
    fn radius(&self) -> f64;

    /// Enclosure of the value at a real point; `None` if evaluation fails.
    fn eval(&self, x: &R) -> Option<R>;

    /// Taylor coefficients `c₀..c_order` at the origin.
    fn taylor(&self, order: usize, prec: u32) -> Vec<R>;
}

/// Polynomial component.
#[derive(Clone, Debug)]
pub struct PolyComponent<R> {
    coeffs: Vec<R>,
}

impl<R: Real> PolyComponent<R> {
    pub fn new(coeffs: Vec<R>) -> Self {
        PolyComponent { coeffs }
    }
}

impl<R: Real + Send + Sync> Component<R> for PolyComponent<R> {
    fn radius(&self) -> f64 {
        f64::INFINITY
    }

    fn eval(&self, x: &R) -> Option<R> {
        let mut acc = R::zero(x.prec());
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x).add(c);
        }
        Some(acc)
    }

    fn taylor(&self, order: usize, prec: u32) -> Vec<R> {
        (0..=order)
            .map(|j| self.coeffs.get(j).cloned().unwrap_or_else(|| R::zero(prec)))
            .collect()
    }
}

type EvalFn<R> = Box<dyn Fn(&R) -> Option<R> + Send + Sync>;
type TaylorFn<R> = Box<dyn Fn(usize, u32) -> Vec<R> + Send + Sync>;

/// Component defined by closures.
pub struct FnComponent<R> {
    radius: f64,
    eval: EvalFn<R>,
    taylor: TaylorFn<R>,
}

impl<R> FnComponent<R> {
    pub fn new(
        radius: f64,
        eval: impl Fn(&R) -> Option<R> + Send + Sync + 'static,
        taylor: impl Fn(usize, u32) -> Vec<R> + Send + Sync + 'static,
    ) -> Self {
        FnComponent {
            radius,
            eval: Box::new(eval),
            taylor: Box::new(taylor),
        }
    }
}

impl<R: Real> Component<R> for FnComponent<R> {
    fn radius(&self) -> f64 {
        self.radius
    }
    fn eval(&self, x: &R) -> Option<R> {
        (self.eval)(x)
    }
    fn taylor(&self, order: usize, prec: u32) -> Vec<R> {
        (self.taylor)(order, prec)
    }
}

type BoxedComponent<R> = Box<dyn Component<R>>;

/// `f = Σ f_{στ}` with `f_{στ}` in the cone `(σ, τ)` from index `threshold`.
pub struct SignDecomposition<R> {
    parts: [Option<BoxedComponent<R>>; 4],
    threshold: usize,
}

impl<R: Real + 'static> SignDecomposition<R> {
    pub fn new(threshold: usize) -> Self {
        SignDecomposition {
            parts: [None, None, None, None],
            threshold,
        }
    }

    /// Add a component to a cone (summed with any component already there).
    pub fn with(mut self, cone: Cone, part: impl Component<R> + 'static) -> Self {
        let i = cone.index();
        self.parts[i] = Some(match self.parts[i].take() {
            None => Box::new(part),
            Some(prev) => Box::new(Sum(prev, Box::new(part))),
        });
        self
    }

    pub fn threshold(&self) -> usize {
        self.threshold
    }

    pub fn component(&self, cone: Cone) -> Option<&dyn Component<R>> {
        self.parts[cone.index()].as_deref()
    }

    fn iter(&self) -> impl Iterator<Item = (Cone, &dyn Component<R>)> {
        Cone::ALL
            .into_iter()
            .filter_map(|c| self.parts[c.index()].as_deref().map(|p| (c, p)))
    }

    /// Smallest analyticity radius over the components.
    pub fn radius(&self) -> f64 {
        self.iter()
            .map(|(_, p)| p.radius())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn eval(&self, x: &R) -> Option<R> {
        let mut acc = R::zero(x.prec());
        for (_, p) in self.iter() {
            acc = acc.add(&p.eval(x)?);
        }
        Some(acc)
    }

    pub fn taylor(&self, order: usize, prec: u32) -> Vec<R> {
        let mut acc = vec![R::zero(prec); order + 1];
        for (_, p) in self.iter() {
            for (a, c) in acc.iter_mut().zip(p.taylor(order, prec)) {
                *a = a.add(&c);
            }
        }
        acc
    }

    /// Check the sign pattern of every component on indices
    /// `threshold..=order`; returns the first offending `(cone, index)`.
    pub fn verify(&self, order: usize, prec: u32) -> std::result::Result<(), (Cone, usize)> {
        for (cone, p) in self.iter() {
            let t = p.taylor(order, prec);
            for (j, c) in t.iter().enumerate().skip(self.threshold) {
                let ok = if cone.sign(j) > 0 {
                    c.upper_f64() >= 0.0
                } else {
                    c.lower_f64() <= 0.0
                };
                if !ok {
                    return Err((cone, j));
                }
            }
        }
        Ok(())
    }
}

struct Sum<R>(BoxedComponent<R>, BoxedComponent<R>);

impl<R: Real> Component<R> for Sum<R> {
    fn radius(&self) -> f64 {
        self.0.radius().min(self.1.radius())
    }
    fn eval(&self, x: &R) -> Option<R> {
        Some(self.0.eval(x)?.add(&self.1.eval(x)?))
    }
    fn taylor(&self, order: usize, prec: u32) -> Vec<R> {
        self.0
            .taylor(order, prec)
            .iter()
            .zip(self.1.taylor(order, prec))
            .map(|(a, b)| a.add(&b))
            .collect()
    }
}

/// `r` with `|f(z) − f^{[k]}(z)| <= r·|z|^k` for `|z| <= η`, where
/// `f^{[k]}` is the Taylor polynomial of degree `k − 1`.
///
/// Each component is probed at `+η` or `−η` according to its cone, where
/// all tail monomials share a sign. Requires `k` at least the threshold.
pub fn remainder_bound<R: Real + 'static>(
    f: &SignDecomposition<R>,
    k: usize,
    eta: &R,
) -> Result<R> {
    if k < f.threshold {
        return Err(Error::InvalidArgument(format!(
            "order {k} below the decomposition threshold {}",
            f.threshold
        )));
    }
    if !eta.is_positive() {
        return Err(Error::InvalidArgument("eta must be positive".into()));
    }
    let radius = f.radius();
    if eta.upper_f64() >= radius {
        return Err(Error::OutsideAnalyticity(format!(
            "eta {} not inside radius {radius}",
            eta.upper_f64()
        )));
    }
    let prec = eta.prec();
    let eta_k = eta.powi(k as u32);
    let mut r = R::zero(prec);
    for (cone, p) in f.iter() {
        let x = eta.mul_i64(cone.probe_sign());
        let value = p.eval(&x).ok_or_else(|| {
            Error::OutsideAnalyticity(format!("component diverges at {}", x.mid_f64()))
        })?;
        let coeffs = p.taylor(k.saturating_sub(1), prec);
        let mut head = R::zero(prec);
        for c in coeffs.iter().take(k).rev() {
            head = head.mul(&x).add(c);
        }
        let tail = value.sub(&head).mag();
        r = r.add(&tail.div(&eta_k).ok_or(Error::DenominatorTouchesZero)?);
    }
    if !r.upper_f64().is_finite() {
        return Err(Error::OutsideAnalyticity("remainder is not finite".into()));
    }
    Ok(r.mag())
}

/// A cone compatible with the signs of `coeffs[threshold..]`, if any.
/// Coefficients whose enclosure straddles zero are compatible with both
/// signs.
pub fn observed_cone<R: Real>(coeffs: &[R], threshold: usize) -> Option<Cone> {
    Cone::ALL.into_iter().find(|cone| {
        coeffs.iter().enumerate().skip(threshold).all(|(j, c)| {
            if cone.sign(j) > 0 {
                c.upper_f64() >= 0.0
            } else {
                c.lower_f64() <= 0.0
            }
        })
    })
}
