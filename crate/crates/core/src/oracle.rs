//! Rigorous enclosures of the branching probability `p = S(n−1,k−1)/S(n,k)`.
//!
//! With `λ = (n+1)/k` and `Φ(z) = ln(e^z − 1) − λ ln z`,
//! `1 − p = I_A/I_B` where `I_B = ∮ e^{kΦ(z)} dz/2πi` and
//! `I_A = (k/n)∮ z e^{kΦ(z)} dz/2πi`. Both integrals are taken on the path
//! `z = ζ̂ + c·U(it)`, `|t| <= η`, closed by an arc of the circle through its
//! endpoints. `ζ̂` is an exact point near the saddle, `c` the rescaling and
//! `U` the truncated inverse series of the rescaled action, so that the
//! integrand is `e^{−kt²}` times a perturbation bounded coefficientwise.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;

use rug::float::Round;
use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::action::{
    ln_expm1, refine, weighted_action_decomposition, weighted_action_taylor, ProblemSize,
    SaddleState,
};
use crate::ball::Ball;
use crate::bitstream::{Direction, DyadicBound};
use crate::disk::{ratio, Disk};
use crate::error::{Error, Result};
use crate::real::{Interval, Real};
use crate::series::{remainder_bound, solve_a_from_b};

/// Default number of levels before the exact fallback.
pub const DEFAULT_S_MAX: u32 = 3;

/// Largest precision (bits) served by the double-interval backend.
const INTERVAL_BITS: u32 = 64;

/// `I^ε_j(n) = ((1 + ε^j)/2)·Γ((j+1)/2)·n^{−(j+1)/2}`, the moment
/// `∫ t^j e^{−n t²} dt` over the line (`ε = 1`: `∫ |t|^j …`).
pub fn gaussian_moment<R: Real>(j: u32, epsilon: i32, n: &R) -> R {
    let p = n.prec();
    if epsilon < 0 && j % 2 == 1 {
        return R::zero(p);
    }
    let gamma: R = gamma_half(j, p);
    let root = Real::sqrt(n).expect("n > 0");
    let pow = root.powi(j + 1);
    gamma.div(&pow).expect("n > 0")
}

/// `Γ((j+1)/2)`.
fn gamma_half<R: Real>(j: u32, p: u32) -> R {
    if j % 2 == 1 {
        let h = (j - 1) / 2;
        R::from_rational(p, &Rational::from(Integer::from(Integer::factorial(h))))
    } else {
        // Γ(h + 1/2) = (2h)!/(4^h h!)·√π
        let h = j / 2;
        let num = Integer::from(Integer::factorial(2 * h));
        let den = (Integer::from(1) << (2 * h)) * Integer::from(Integer::factorial(h));
        let q = R::from_rational(p, &Rational::from((num, den)));
        q.mul(&Real::sqrt(&R::pi(p)).expect("pi > 0"))
    }
}

/// Upper bound on `∫_a^∞ x^j e^{−x²/2} dx` for `a > 0`:
/// `a^{j−1} e^{−a²/2} R` with `R = Σ_h Π_{i<=h}(j+1−2i)/a^{2h}`, the sum
/// running while the factors stay positive. Integration by parts makes this
/// exact for odd `j`; for even `j` the last step uses the Mills bound.
pub fn gaussian_tail<R: Real>(a: &R, j: u32) -> Result<R> {
    if !a.is_positive() {
        return Err(Error::InvalidArgument("gaussian_tail needs a > 0".into()));
    }
    let p = a.prec();
    let inv_a2 = R::one(p)
        .div(&a.sqr())
        .ok_or(Error::DenominatorTouchesZero)?;
    let mut r = R::one(p);
    let mut term = R::one(p);
    let mut i = 1i64;
    while (j as i64) + 1 - 2 * i > 0 {
        term = term.mul_i64(j as i64 + 1 - 2 * i).mul(&inv_a2);
        r = r.add(&term);
        i += 1;
    }
    let e = a.sqr().div_i64(2).neg().exp();
    let pow = if j == 0 {
        R::one(p).div(a).ok_or(Error::DenominatorTouchesZero)?
    } else {
        a.powi(j - 1)
    };
    Ok(pow.mul(&e).mul(&r).mag())
}

/// Grid search over `points` log-spaced values in `[lo, hi]`, returning the
/// argmax of `f` among finite values.
fn grid_argmax(lo: f64, hi: f64, points: usize, f: impl Fn(f64) -> f64) -> Option<(f64, f64)> {
    let points = points.max(2);
    let (a, b) = (lo.ln(), hi.ln());
    let mut best: Option<(f64, f64)> = None;
    for i in 0..points {
        let eta = match i {
            0 => lo,
            _ if i + 1 == points => hi,
            _ => (a + (b - a) * i as f64 / (points - 1) as f64).exp(),
        };
        let v = f(eta);
        if v.is_nan() || v == f64::NEG_INFINITY {
            continue;
        }
        if best.is_none_or(|(_, bv)| v > bv) {
            best = Some((eta, v));
        }
    }
    best
}

/// Maximise `η² − r_s(η)·η^{s+1}` on a log grid in `(0, eta_hi]`.
///
/// The grid's lower end starts at `eta_hi·10⁻³` and is pushed down three
/// times if no positive value is found; after that the caller must
/// escalate.
pub fn eta_optimize(r_s: &dyn Fn(f64) -> f64, s: u32, eta_hi: f64, points: usize) -> Result<f64> {
    if !(eta_hi > 0.0) || !eta_hi.is_finite() {
        return Err(Error::InvalidArgument("eta_hi must be positive".into()));
    }
    let objective = |eta: f64| {
        let r = r_s(eta);
        if !r.is_finite() {
            return f64::NEG_INFINITY;
        }
        eta * eta - r * eta.powi(s as i32 + 1)
    };
    let mut lo = eta_hi * 1e-3;
    for _ in 0..4 {
        if let Some((eta, v)) = grid_argmax(lo, eta_hi, points, objective) {
            if v > 0.0 {
                return Ok(eta);
            }
        }
        lo *= 1e-3;
    }
    Err(Error::Escalate("no eta with positive objective".into()))
}

/// Oracle settings.
#[derive(Clone, Debug, Serialize)]
pub struct OracleConfig {
    pub s_max: u32,
    /// Points of the η grid.
    pub eta_grid: usize,
    /// Cells examined when bounding the arc.
    pub arc_budget: usize,
    /// Extra half-width added to level-1 bounds (stress testing).
    pub stress_width: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            s_max: DEFAULT_S_MAX,
            eta_grid: 64,
            arc_budget: 256,
            stress_width: 0.0,
        }
    }
}

/// A request for level-`level` bounds at `size`, around `saddle`.
#[derive(Clone, Copy, Debug)]
pub struct BoundRequest<'a> {
    pub size: ProblemSize,
    pub level: u32,
    pub saddle: &'a SaddleState,
}

/// Magnitudes of the terms entering a bound pair.
#[derive(Clone, Debug, Default, Serialize)]
pub struct BoundDiagnostics {
    pub backend: &'static str,
    pub precision: u32,
    pub eta: f64,
    pub mu: f64,
    pub remainder: f64,
    pub main_a: f64,
    pub main_b: f64,
    pub local_a: f64,
    pub local_b: f64,
    pub gauss_tail_a: f64,
    pub gauss_tail_b: f64,
    pub arc_a: f64,
    pub arc_b: f64,
    pub arc_cells: usize,
    pub ratio_lower: f64,
    pub ratio_upper: f64,
}

impl BoundDiagnostics {
    pub fn to_record(&self) -> BTreeMap<String, f64> {
        let mut m = BTreeMap::new();
        for (k, v) in [
            ("precision", self.precision as f64),
            ("eta", self.eta),
            ("mu", self.mu),
            ("remainder", self.remainder),
            ("main_a", self.main_a),
            ("main_b", self.main_b),
            ("local_a", self.local_a),
            ("local_b", self.local_b),
            ("gauss_tail_a", self.gauss_tail_a),
            ("gauss_tail_b", self.gauss_tail_b),
            ("arc_a", self.arc_a),
            ("arc_b", self.arc_b),
            ("arc_cells", self.arc_cells as f64),
            ("ratio_lower", self.ratio_lower),
            ("ratio_upper", self.ratio_upper),
        ] {
            m.insert(k.to_string(), v);
        }
        m
    }
}

/// Dyadic enclosure `[lower, upper]` of `p`.
#[derive(Clone, Debug)]
pub struct BoundPair {
    pub lower: DyadicBound,
    pub upper: DyadicBound,
    pub level: u32,
    pub diagnostics: BoundDiagnostics,
}

impl BoundPair {
    pub fn width(&self) -> Rational {
        self.upper.to_rational() - self.lower.to_rational()
    }

    pub fn width_f64(&self) -> f64 {
        self.width().to_f64()
    }

    pub fn contains(&self, p: &Rational) -> bool {
        self.lower.to_rational() <= *p && *p <= self.upper.to_rational()
    }
}

/// Significant bits of the dyadics emitted at `level`.
pub fn dyadic_bits(size: ProblemSize, level: u32) -> u32 {
    let lg = (size.n_elements() as f64).log2();
    (level as f64 * lg).ceil() as u32 + 8
}

/// Sizes up to this many elements have their bounds memoized per level.
const MEMO_LIMIT: u64 = 256;

/// Bound builder with an η cache.
#[derive(Clone, Debug, Default)]
pub struct Oracle {
    config: OracleConfig,
    eta_cache: HashMap<u32, (f64, f64)>,
    memo: HashMap<(u64, u64, u32), Option<BoundPair>>,
    builds: u64,
}

impl Oracle {
    pub fn new(config: OracleConfig) -> Oracle {
        Oracle {
            config,
            eta_cache: HashMap::new(),
            memo: HashMap::new(),
            builds: 0,
        }
    }

    pub fn config(&self) -> &OracleConfig {
        &self.config
    }

    pub fn builds(&self) -> u64 {
        self.builds
    }

    /// A build for this size and level would be answered from the memo.
    pub fn is_memoized(&self, size: ProblemSize, level: u32) -> bool {
        self.memo
            .contains_key(&(size.n_elements(), size.k_blocks(), level))
    }

    /// Level-`req.level` bounds. Any failure to produce a usable enclosure is
    /// reported as [`Error::Escalate`].
    pub fn build(&mut self, req: &BoundRequest) -> Result<BoundPair> {
        let size = req.size;
        if size.is_degenerate() {
            return Err(Error::Degenerate {
                n: size.n_elements(),
                k: size.k_blocks(),
            });
        }
        if req.level == 0 {
            return Err(Error::InvalidArgument("level must be at least 1".into()));
        }
        if req.saddle.size() != size || req.saddle.is_degenerate() {
            return Err(Error::InvalidArgument(
                "saddle state does not match the size".into(),
            ));
        }
        let key = (size.n_elements(), size.k_blocks(), req.level);
        if let Some(hit) = self.memo.get(&key) {
            return match hit {
                Some(pair) => Ok(self.finish(pair.clone(), size)),
                None => Err(Error::Escalate("memoized failure".into())),
            };
        }
        let result = self.build_uncached(req);
        if size.n_elements() <= MEMO_LIMIT {
            self.memo.insert(key, result.as_ref().ok().cloned());
        }
        result.map(|pair| self.finish(pair, size))
    }

    fn finish(&self, pair: BoundPair, size: ProblemSize) -> BoundPair {
        if pair.level == 1 && self.config.stress_width > 0.0 {
            widen(pair, self.config.stress_width, size)
        } else {
            pair
        }
    }

    fn build_uncached(&mut self, req: &BoundRequest) -> Result<BoundPair> {
        let size = req.size;
        self.builds += 1;
        let tol = (size.k_blocks() as f64).powi(-(req.level as i32 + 1));
        let zeta = if req.level >= 2 && req.saddle.error_radius_f64() > tol {
            refine(req.saddle, tol, 8).0.zeta().clone()
        } else {
            req.saddle.zeta().clone()
        };
        let zf = zeta.to_f64();
        let threshold = (size.n_elements() as f64).powf(-0.5);
        let cached = self
            .eta_cache
            .get(&req.level)
            .filter(|(z, _)| (z - zf).abs() <= threshold)
            .map(|&(_, eta)| eta);
        let result = match build_dispatch(size, &zeta, req.level, cached, &self.config) {
            Err(Error::Escalate(_)) if cached.is_some() => {
                build_dispatch(size, &zeta, req.level, None, &self.config)
            }
            r => r,
        };
        let (pair, eta) = result?;
        self.eta_cache.insert(req.level, (zf, eta));
        Ok(pair)
    }
}

fn widen(pair: BoundPair, w: f64, size: ProblemSize) -> BoundPair {
    let bits = dyadic_bits(size, pair.level);
    let lo = Float::with_val(128, pair.lower.to_rational()) - w;
    let hi = Float::with_val(128, pair.upper.to_rational()) + w;
    BoundPair {
        lower: DyadicBound::from_float(&lo, bits, Direction::Down).clamp_unit(),
        upper: DyadicBound::from_float(&hi, bits, Direction::Up).clamp_unit(),
        ..pair
    }
}

/// Level-`req.level` bounds with default settings and no cache.
pub fn build_bounds(req: &BoundRequest) -> Result<BoundPair> {
    Oracle::new(OracleConfig::default()).build(req)
}

fn build_dispatch(
    size: ProblemSize,
    zeta: &Float,
    level: u32,
    eta_hint: Option<f64>,
    cfg: &OracleConfig,
) -> Result<(BoundPair, f64)> {
    let bits = (level as f64 * (size.n_elements() as f64).log2()).ceil() as u32 + 24;
    let built = if bits <= INTERVAL_BITS {
        build_level::<Interval>(size, zeta, level, 53, eta_hint, cfg)
    } else {
        build_level::<Ball>(size, zeta, level, bits + 40, eta_hint, cfg)
    };
    let mut raw = built.map_err(|e| match e {
        Error::Escalate(_) => e,
        other => Error::Escalate(other.to_string()),
    })?;
    let sig = dyadic_bits(size, level);
    let p = raw.ratio.prec() + 8;
    let one = Float::with_val(p, 1);
    let lo = Float::with_val_round(p, &one - raw.ratio.upper(), Round::Down).0;
    let hi = Float::with_val_round(p, &one - raw.ratio.lower(), Round::Up).0;
    let lower = DyadicBound::from_float(&lo, sig, Direction::Down).clamp_unit();
    let upper = DyadicBound::from_float(&hi, sig, Direction::Up).clamp_unit();
    raw.diag.ratio_lower = raw.ratio.lower().to_f64();
    raw.diag.ratio_upper = raw.ratio.upper().to_f64();
    Ok((
        BoundPair {
            lower,
            upper,
            level,
            diagnostics: raw.diag,
        },
        raw.eta,
    ))
}

struct RawBounds {
    ratio: Ball,
    diag: BoundDiagnostics,
    eta: f64,
}

fn poly_mul<R: Real>(a: &[R], b: &[R]) -> Vec<R> {
    let p = a[0].prec();
    let mut out = vec![R::zero(p); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    out
}

fn poly_eval_f64(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, v| acc * x + v)
}

/// Everything about the path that does not depend on `η`.
struct Path<R> {
    k: R,
    kf: f64,
    lambda: R,
    zeta: R,
    c: R,
    /// `U(s) = s + α₂s² + …`, point coefficients.
    u: Vec<R>,
    /// Integrand prefactors as polynomials in `s = it`: `B` then `A`.
    prefactors: [Vec<R>; 2],
    /// `|q_j|` of `Q(s) = Σ_{j<kt} b_j U(s)^j − s²`.
    q_abs: Vec<R>,
    /// Coefficients of `(Σ|α_j| s^j)^{kt}`.
    u_abs_pow: Vec<R>,
    /// `Φ(ζ̂)`.
    phi0: R,
    /// Truncation order `kt = 2·level + 2`.
    kt: usize,
}

fn build_path<R: Real>(size: ProblemSize, zeta: &Float, level: u32, p: u32) -> Result<Path<R>> {
    let kk = size.k_blocks();
    let nn = size.n_elements();
    let kt = 2 * level as usize + 2;
    let order = kt - 1;
    let k = R::from_i64(p, kk as i64);
    let lambda = R::from_rational(
        p,
        &Rational::from((Integer::from(nn + 1), Integer::from(kk))),
    );
    let pe = R::zero(p).prec().max(53);
    let zf = Float::with_val(pe, zeta);
    if zf <= 0 {
        return Err(Error::Escalate("non-positive saddle".into()));
    }
    let zeta_r = R::from_float(p, &zf);
    let one = R::one(p);
    let phi = weighted_action_taylor(&zeta_r, &one, &lambda, order)?;
    let phi0 = ln_expm1(&zeta_r)
        .zip(zeta_r.ln())
        .map(|(a, b)| a.sub(&lambda.mul(&b)))
        .ok_or_else(|| Error::Escalate("action undefined at the saddle".into()))?;
    let phi2 = phi[2].mid_float();
    if phi2 <= 0 {
        return Err(Error::Escalate("second derivative not positive".into()));
    }
    let cf = Float::with_val(pe, phi2.sqrt_ref()).recip();
    let c = R::from_float(p, &cf);
    let mut b = vec![R::zero(p)];
    let mut cpow = R::one(p);
    for ph in &phi[1..=order] {
        cpow = cpow.mul(&c);
        b.push(ph.mul(&cpow));
    }
    let a = if order >= 3 {
        solve_a_from_b(&b[3..=order])
    } else {
        Vec::new()
    };
    let mut u = vec![R::zero(p), R::one(p)];
    for aj in &a {
        u.push(R::from_float(p, &Float::with_val(pe, aj.mid_float())));
    }

    // D(s) = U'(s); A(s) = (k/n)(ζ̂ + c·U(s))
    let d: Vec<R> = (1..u.len()).map(|i| u[i].mul_i64(i as i64)).collect();
    let kn = R::from_rational(p, &Rational::from((Integer::from(kk), Integer::from(nn))));
    let mut za: Vec<R> = u.iter().map(|x| x.mul(&c)).collect();
    za[0] = zeta_r.clone();
    let za: Vec<R> = za.iter().map(|x| x.mul(&kn)).collect();
    let pa = poly_mul(&d, &za);

    let mut q = vec![b[order].clone()];
    for j in (1..order).rev() {
        q = poly_mul(&q, &u);
        q[0] = q[0].add(&b[j]);
    }
    q = poly_mul(&q, &u);
    q[2] = q[2].sub(&R::one(p));
    let q_abs: Vec<R> = q.iter().map(|x| x.mag()).collect();

    let u_abs: Vec<R> = u.iter().map(|x| x.mag()).collect();
    let mut u_abs_pow = vec![R::one(p)];
    for _ in 0..kt {
        u_abs_pow = poly_mul(&u_abs_pow, &u_abs);
    }
    Ok(Path {
        kf: kk as f64,
        k,
        lambda,
        zeta: zeta_r,
        c,
        u,
        prefactors: [d, pa],
        q_abs,
        u_abs_pow,
        phi0,
        kt,
    })
}

impl<R: Real> Path<R> {
    fn prec(&self) -> u32 {
        self.k.prec()
    }
}

impl<R: Real + Send + Sync + 'static> Path<R> {
    fn u_abs_at(&self, eta: &R) -> R {
        let mut acc = R::zero(self.prec());
        for x in self.u.iter().rev() {
            acc = acc.mul(eta).add(&x.mag());
        }
        acc
    }

    /// `|U|`-radius in `u` at `η` is `η_u`; `w = c·η_u`.
    fn w_max_f64(&self, eta: f64) -> f64 {
        let ua: Vec<f64> = self.u.iter().map(|x| x.mid_f64().abs()).collect();
        self.c.mid_f64() * poly_eval_f64(&ua, eta)
    }

    /// Largest `η` with `c·η_u <= 0.9·ζ̂`, capped at 4.
    fn eta_ceiling(&self) -> f64 {
        let z = self.zeta.mid_f64();
        let (mut lo, mut hi) = (0.0, 4.0);
        if self.w_max_f64(hi) <= 0.9 * z {
            return hi;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.w_max_f64(mid) <= 0.9 * z {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Approximate `M(η)` and `μ(η)` from midpoints and the heuristic
    /// remainder `c^k (λ+1)/(k ζ^k (1 − w/ζ))`.
    fn approx_m(&self, eta: f64) -> Option<(Vec<f64>, f64)> {
        let z = self.zeta.mid_f64();
        let w = self.w_max_f64(eta);
        if !(w < 0.9 * z) {
            return None;
        }
        let kt = self.kt as i32;
        let c = self.c.mid_f64();
        let lam = self.lambda.mid_f64();
        let rs = c.powi(kt) * (lam + 1.0) / (kt as f64 * z.powi(kt) * (1.0 - w / z));
        let len = self.q_abs.len().max(self.u_abs_pow.len());
        let m: Vec<f64> = (0..len)
            .map(|j| {
                self.q_abs.get(j).map_or(0.0, |x| x.upper_f64())
                    + rs * self.u_abs_pow.get(j).map_or(0.0, |x| x.mid_f64())
            })
            .collect();
        let mu: f64 = m
            .iter()
            .enumerate()
            .skip(2)
            .map(|(j, v)| v * eta.powi(j as i32 - 2))
            .sum();
        Some((m, mu))
    }

    /// Approximate log of the total relative error at `η`.
    fn approx_log_error(&self, eta: f64) -> f64 {
        let Some((m, mu)) = self.approx_m(eta) else {
            return f64::INFINITY;
        };
        let k = self.kf;
        if mu > 0.5 || eta * (2.0 * k).sqrt() < 1.0 {
            return f64::INFINITY;
        }
        let lg = |j: usize, n: f64| ln_gamma_half(j) - (j as f64 + 1.0) / 2.0 * n.ln();
        let main = lg(0, k);
        let pb: Vec<f64> = self.prefactors[0]
            .iter()
            .map(|x| x.mid_f64().abs())
            .collect();
        let kp = k * (1.0 - mu);
        let mut terms: Vec<f64> = Vec::new();
        let drift = k * (m[0] + m.get(1).copied().unwrap_or(0.0) * eta);
        for (i, pi) in pb.iter().enumerate() {
            for (j, mj) in m.iter().enumerate() {
                if *pi > 0.0 && *mj > 0.0 {
                    terms.push(drift + k.ln() + pi.ln() + mj.ln() + lg(i + j, kp));
                }
            }
        }
        let a = eta * (2.0 * k).sqrt();
        for (j, pi) in pb.iter().enumerate() {
            if *pi > 0.0 {
                let tail =
                    (j as f64 - 1.0) * a.ln() - a * a / 2.0 + (1.0 + j as f64 / (a * a)).ln();
                terms.push(2f64.ln() + pi.ln() - (j as f64 + 1.0) / 2.0 * (2.0 * k).ln() + tail);
            }
        }
        let mval: f64 = poly_eval_f64(&m, eta);
        let gap = eta * eta - mval;
        let c = self.c.mid_f64();
        let spread = PI.min(1.0 / (k * c * eta));
        terms.push((2.0 * spread / c).ln() + self.zeta.mid_f64().ln() - k * gap.max(0.0));
        let mx = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = terms.iter().map(|t| (t - mx).exp()).sum();
        mx + s.ln() - main
    }

    fn choose_eta(&self, points: usize) -> Result<f64> {
        let hi = self.eta_ceiling();
        let lo = (0.5 / self.kf.sqrt()).min(hi * 0.5);
        if let Some((eta, v)) = grid_argmax(lo, hi, points, |e| -self.approx_log_error(e)) {
            if v.is_finite() {
                return Ok(eta);
            }
        }
        self.eta_from_remainder(points)
    }

    /// [`eta_optimize`] on the objective `η² − M(η)`.
    fn eta_from_remainder(&self, points: usize) -> Result<f64> {
        let kt = self.kt as i32;
        let r = |eta: f64| match self.approx_m(eta) {
            Some((m, mu)) if mu <= 0.5 => poly_eval_f64(&m, eta) / eta.powi(kt),
            _ => f64::INFINITY,
        };
        eta_optimize(&r, self.kt as u32 - 1, self.eta_ceiling(), points)
    }
}

fn ln_gamma_half(j: usize) -> f64 {
    // ln Γ((j+1)/2) by recurrence from Γ(1/2), Γ(1)
    let mut v = if j % 2 == 0 { 0.5 * PI.ln() } else { 0.0 };
    let mut x = if j % 2 == 0 { 0.5 } else { 1.0 };
    while x < (j as f64 + 1.0) / 2.0 - 1e-9 {
        v += x.ln();
        x += 1.0;
    }
    v
}

/// Certified pieces at a given `η`.
struct Certified<R> {
    m: Vec<R>,
    mu: R,
    remainder: R,
}

fn certify_at<R: Real + Send + Sync + 'static>(path: &Path<R>, eta: &R) -> Result<Certified<R>> {
    let p = path.prec();
    let eta_u = path.u_abs_at(eta);
    let w = path.c.mul(&eta_u);
    let wf = w.upper_float();
    if !(wf < path.zeta.lower_float()) {
        return Err(Error::Escalate(
            "path leaves the disk of analyticity".into(),
        ));
    }
    let w_point = R::from_float(p, &wf);
    let one = R::one(p);
    let dec = weighted_action_decomposition(&path.zeta, &one, &path.lambda);
    let r_w =
        remainder_bound(&dec, path.kt, &w_point).map_err(|e| Error::Escalate(e.to_string()))?;
    let r_s = r_w.mul(&path.c.powi(path.kt as u32)).mag();
    let len = path.q_abs.len().max(path.u_abs_pow.len());
    let zero = R::zero(p);
    let m: Vec<R> = (0..len)
        .map(|j| {
            let q = path.q_abs.get(j).unwrap_or(&zero);
            let u = path.u_abs_pow.get(j).unwrap_or(&zero);
            q.add(&r_s.mul(u))
        })
        .collect();
    let mut mu = R::zero(p);
    for mj in m.iter().skip(2).rev() {
        mu = mu.mul(eta).add(mj);
    }
    Ok(Certified {
        m,
        mu,
        remainder: r_s,
    })
}

/// Cover of the arc `|z| = ρ`, `arg z ∈ [θ_lo, π]` by cells with a certified
/// upper bound `L` of `ln|e^z − 1|` on each.
struct ArcCover<R> {
    /// `L` at the arc's starting point.
    l_ref: R,
    /// `Σ Δθ·e^{k(L_cell − l_ref)}` over the cells.
    sum: R,
    cells: usize,
}

/// `ln|e^z − 1|` upper bound for `z = ρe^{iθ}`, `θ` ranging over `th`.
fn log_abs_expm1<R: Real>(rho: &R, th: &R) -> R {
    let p = rho.prec();
    let x = rho.mul(&th.cos());
    let y = rho.mul(&th.sin());
    let (shift, v) = if x.is_positive() {
        // |e^z − 1| = e^x·|1 − e^{−z}|
        let e = x.neg().exp();
        let a = R::one(p).sub(&e.mul(&y.cos()));
        (x.clone(), a.sqr().add(&e.mul(&y.sin()).sqr()))
    } else {
        let a = x.exp().sub(&y.cos());
        (R::zero(p), a.sqr().add(&y.sin().sqr()))
    };
    if v.upper_f64() <= 0.0 {
        return R::from_f64(p, -1e300);
    }
    let l = v
        .upper_point()
        .ln()
        .expect("positive")
        .div_i64(2)
        .add(&shift);
    l.upper_point()
}

/// Cells on which the angular derivative of `|e^z − 1|²`, of the sign of
/// `y(cos y − e^x) + x sin y`, is certified non-positive are bounded by
/// their left endpoint; other cells by evaluation over the whole cell.
/// The cell carrying the largest share of the sum is split until
/// `sum·e^{scale + k·l_ref}` drops below `tol` or the budget runs out.
fn arc_cover<R: Real>(
    rho: &R,
    theta_lo: f64,
    k: &R,
    budget: usize,
    scale: f64,
    tol: f64,
) -> ArcCover<R> {
    let p = rho.prec();
    let kf = k.mid_f64();
    let l_ref = log_abs_expm1(rho, &R::from_f64(p, theta_lo));
    let lr = l_ref.upper_f64();
    let cell_bound = |a: f64, b: f64| -> (R, f64) {
        let cell = R::hull_f64(p, a, b);
        let x = rho.mul(&cell.cos());
        let y = rho.mul(&cell.sin());
        let g = if x.is_positive() {
            let e = x.neg().exp();
            y.mul(&y.cos().mul(&e).sub(&R::one(p)))
                .add(&x.mul(&y.sin()).mul(&e))
        } else {
            y.mul(&y.cos().sub(&x.exp())).add(&x.mul(&y.sin()))
        };
        let l = if g.upper_f64() <= 0.0 {
            log_abs_expm1(rho, &R::from_f64(p, a))
        } else {
            log_abs_expm1(rho, &cell)
        };
        let weight = (b - a).ln() + kf * (l.upper_f64() - lr);
        (l, weight)
    };
    let pi_hi = PI.next_up();
    let initial = 4usize;
    let step = (pi_hi - theta_lo) / initial as f64;
    let mut leaves: Vec<(f64, f64, R, f64)> = (0..initial)
        .map(|i| {
            let a = theta_lo + step * i as f64;
            let b = if i + 1 == initial {
                pi_hi
            } else {
                theta_lo + step * (i + 1) as f64
            };
            let (l, w) = cell_bound(a, b);
            (a, b, l, w)
        })
        .collect();
    while leaves.len() < budget {
        let (idx, top) = leaves.iter().enumerate().map(|(i, c)| (i, c.3)).fold(
            (0, f64::NEG_INFINITY),
            |acc, x| if x.1 > acc.1 { x } else { acc },
        );
        let total: f64 = leaves.iter().map(|c| (c.3 - top).exp()).sum();
        let (a, b, _, _) = leaves[idx].clone();
        if top + total.ln() + scale + kf * lr <= tol.ln() || 1.0 / total < 0.05 || b - a < 1e-12 {
            break;
        }
        let m = 0.5 * (a + b);
        let (l1, w1) = cell_bound(a, m);
        let (l2, w2) = cell_bound(m, b);
        leaves[idx] = (a, m, l1, w1);
        leaves.push((m, b, l2, w2));
    }
    let mut sum = R::zero(p);
    for (a, b, l, _) in &leaves {
        let d = R::from_f64(p, *b).sub(&R::from_f64(p, *a));
        let e = l.sub(&l_ref).mul(k);
        sum = sum.add(&d.mul(&e.upper_point().exp()));
    }
    ArcCover {
        l_ref,
        sum: sum.upper_point(),
        cells: leaves.len(),
    }
}

/// Endpoint geometry of the path at `η`: `(ρ, θ_lo)` with `ρ = |z₊|` and
/// `θ_lo <= arg z₊`.
fn endpoint<R: Real>(path: &Path<R>, eta: &R) -> Result<(R, f64)> {
    let p = path.prec();
    // U(iη): real part from even powers, imaginary from odd
    let mut re = R::zero(p);
    let mut im = R::zero(p);
    let mut pow = R::one(p);
    for (j, a) in path.u.iter().enumerate() {
        let t = a.mul(&pow);
        match j % 4 {
            0 => re = re.add(&t),
            1 => im = im.add(&t),
            2 => re = re.sub(&t),
            _ => im = im.sub(&t),
        }
        pow = pow.mul(eta);
    }
    let x = path.zeta.add(&path.c.mul(&re));
    let y = path.c.mul(&im);
    if !x.is_positive() || !y.is_positive() {
        return Err(Error::Escalate(
            "path endpoint outside the right half plane".into(),
        ));
    }
    let rho = Real::sqrt(&x.sqr().add(&y.sqr())).expect("non-negative");
    let t = Float::with_val_round(53, y.lower_float() / x.upper_float(), Round::Down).0;
    let theta = Float::with_val_round(53, t.atan_ref(), Round::Down)
        .0
        .to_f64();
    Ok((rho, theta.max(0.0)))
}

/// `2ρ·Σ_cells Δθ·exp(k(L − λ ln ρ − Φ(ζ̂)))`: the arc integral of
/// `|e^{k(Φ(z) − Φ(ζ̂))}| |dz|` over both halves of the arc.
fn arc_factor<R: Real>(path: &Path<R>, rho: &R, cover: &ArcCover<R>) -> R {
    let e = cover
        .l_ref
        .sub(&path.lambda.mul(&rho.ln().expect("rho > 0")))
        .sub(&path.phi0)
        .mul(&path.k);
    let e = e.upper_point();
    rho.mul(&e.exp()).mul(&cover.sum).mul_i64(2)
}

fn build_level<R: Real + Send + Sync + 'static>(
    size: ProblemSize,
    zeta: &Float,
    level: u32,
    p: u32,
    eta_hint: Option<f64>,
    cfg: &OracleConfig,
) -> Result<RawBounds> {
    let path: Path<R> = build_path(size, zeta, level, p)?;
    let mut eta_f = match eta_hint {
        Some(e) => e,
        None => path.choose_eta(cfg.eta_grid)?,
    };
    let half = R::one(p).div_i64(2);
    let mut cert = None;
    for _ in 0..8 {
        let eta = R::from_f64(p, eta_f);
        if let Ok(c) = certify_at(&path, &eta) {
            if c.mu.upper_f64() <= half.lower_f64() {
                cert = Some(c);
                break;
            }
        }
        eta_f *= 0.8;
    }
    let cert = cert.ok_or_else(|| Error::Escalate("no admissible eta".into()))?;
    let eta = R::from_f64(p, eta_f);
    let k = &path.k;
    let kp = k.mul(&R::one(p).sub(&cert.mu));

    let deg_p = path.prefactors.iter().map(Vec::len).max().unwrap_or(1);
    let top = deg_p + cert.m.len();
    // I⁺_j(k') and I⁺_j(k) by I_{j+2} = I_j (j+1)/(2n)
    let moments = |n: &R| -> Vec<R> {
        let mut v = vec![gaussian_moment(0, 1, n), gaussian_moment(1, 1, n)];
        for j in 2..top {
            let t = v[j - 2]
                .mul_i64(j as i64 - 1)
                .div(&n.mul_i64(2))
                .expect("n > 0");
            v.push(t);
        }
        v
    };
    let ip = moments(&kp);
    let ik = moments(k);

    let m1 = cert.m.get(1).cloned().unwrap_or_else(|| R::zero(p));
    let drift = cert.m[0].add(&m1.mul(&eta)).mul(k).exp();
    let a = eta.mul(&Real::sqrt(&k.mul_i64(2)).expect("k > 0"));
    let two_k = k.mul_i64(2);
    let tails: Vec<R> = (0..deg_p as u32)
        .map(|j| {
            let g = gaussian_tail(&a, j)?;
            let s = Real::sqrt(&two_k).expect("k > 0").powi(j + 1);
            Ok(g.div(&s).expect("k > 0"))
        })
        .collect::<Result<_>>()?;

    let (rho, theta_lo) = endpoint(&path, &eta)?;
    let scale = {
        let (r, c, kf) = (rho.mid_f64(), path.c.mid_f64(), path.kf);
        (2.0 * r / c).ln()
            - kf * (path.lambda.mid_f64() * r.ln() + path.phi0.mid_f64())
            - 0.5 * (PI / kf).ln()
    };
    let tol = 0.25 * path.approx_log_error(eta_f).exp().min(1.0);
    let cover = arc_cover(&rho, theta_lo, k, cfg.arc_budget, scale, tol);
    let cells = cover.cells;
    let arc_unit = arc_factor(&path, &rho, &cover).div(&path.c).expect("c > 0");

    let mut mains = Vec::with_capacity(2);
    let mut errs = Vec::with_capacity(2);
    let mut diag = BoundDiagnostics {
        backend: if R::zero(p).prec() == 53 {
            "interval"
        } else {
            "ball"
        },
        precision: R::zero(p).prec(),
        eta: eta_f,
        mu: cert.mu.upper_f64(),
        remainder: cert.remainder.upper_f64(),
        arc_cells: cells,
        ..Default::default()
    };
    for (idx, pf) in path.prefactors.iter().enumerate() {
        let mut main = R::zero(p);
        for (j, pj) in pf.iter().enumerate().step_by(2) {
            let t = pj.mul(&ik[j]);
            main = if (j / 2) % 2 == 0 {
                main.add(&t)
            } else {
                main.sub(&t)
            };
        }
        let mut local = R::zero(p);
        for (i, pi) in pf.iter().enumerate() {
            let pa = pi.mag();
            let mut inner = R::zero(p);
            for (j, mj) in cert.m.iter().enumerate() {
                inner = inner.add(&mj.mul(&ip[i + j]));
            }
            local = local.add(&pa.mul(&inner));
        }
        let local = local.mul(k).mul(&drift).mag();
        let mut tail = R::zero(p);
        for (j, pj) in pf.iter().enumerate() {
            tail = tail.add(&pj.mag().mul(&tails[j]));
        }
        let tail = tail.mul_i64(2).mag();
        let amax = if idx == 0 {
            R::one(p)
        } else {
            let kn = R::from_rational(
                p,
                &Rational::from((
                    Integer::from(size.k_blocks()),
                    Integer::from(size.n_elements()),
                )),
            );
            kn.mul(&rho)
        };
        let arc = amax.mul(&arc_unit).mag();
        let err = local.add(&tail).add(&arc);
        if !err.upper_f64().is_finite() || !main.lower_f64().is_finite() {
            return Err(Error::Escalate("non-finite bound".into()));
        }
        if idx == 0 {
            diag.main_b = main.mid_f64();
            diag.local_b = local.upper_f64();
            diag.gauss_tail_b = tail.upper_f64();
            diag.arc_b = arc.upper_f64();
        } else {
            diag.main_a = main.mid_f64();
            diag.local_a = local.upper_f64();
            diag.gauss_tail_a = tail.upper_f64();
            diag.arc_a = arc.upper_f64();
        }
        mains.push(main);
        errs.push(err);
    }
    let bp = p.max(64);
    let to_disk = |main: &R, err: &R| -> Disk {
        let e = err.upper_float();
        let lo = Float::with_val_round(bp, main.lower_float() - &e, Round::Down).0;
        let hi = Float::with_val_round(bp, main.upper_float() + &e, Round::Up).0;
        Disk::from_ball(&Ball::from_interval(bp, &lo, &hi))
    };
    let den = to_disk(&mains[0], &errs[0]);
    let num = to_disk(&mains[1], &errs[1]);
    let q = ratio(&num, &den).map_err(|e| Error::Escalate(e.to_string()))?;
    Ok(RawBounds {
        ratio: q.real_ball(),
        diag,
        eta: eta_f,
    })
}

/// Bound on the arc part of a monomial integral, with the central term it
/// is compared against.
#[derive(Clone, Debug, Serialize)]
pub struct TailBound {
    /// Upper bound of `|∫_arc z^j e^{kΦ(z)} dz/2πi| / e^{kΦ(ζ̂)}`.
    pub bound: f64,
    /// `c·ζ̂^j·√(π/k)/2π`, the leading Gaussian term on the same scale.
    pub central: f64,
    pub rho: f64,
    pub cells: usize,
}

/// `η` maximizing `η² − M(η)` for the level-`level` path, where `M` bounds
/// the action remainder along the path.
pub fn remainder_eta(size: ProblemSize, saddle: &SaddleState, level: u32) -> Result<f64> {
    if level == 0 {
        return Err(Error::InvalidArgument("level must be at least 1".into()));
    }
    let path: Path<Ball> = build_path(size, saddle.zeta(), level, 128)?;
    path.eta_from_remainder(OracleConfig::default().eta_grid)
}

/// Arc bound for the level-1 path at a given `η`.
pub fn contour_tail(
    size: ProblemSize,
    saddle: &SaddleState,
    eta: f64,
    j: u32,
) -> Result<TailBound> {
    let p = 128;
    let path: Path<Ball> = build_path(size, saddle.zeta(), 1, p)?;
    let eta_r = Ball::from_f64(p, eta);
    let (rho, theta_lo) = endpoint(&path, &eta_r)?;
    let cover = arc_cover(&rho, theta_lo, &path.k, 256, 0.0, 0.0);
    let cells = cover.cells;
    let unit = arc_factor(&path, &rho, &cover)
        .div(&Ball::pi(p).mul_i64(2))
        .expect("pi > 0");
    let bound = unit.mul(&rho.powi(j)).upper_f64();
    let central = path
        .c
        .mul(&path.zeta.powi(j))
        .mul(&gaussian_moment(0, 1, &path.k))
        .div(&Ball::pi(p).mul_i64(2))
        .expect("pi > 0")
        .mid_f64();
    Ok(TailBound {
        bound,
        central,
        rho: rho.mid_f64(),
        cells,
    })
}
