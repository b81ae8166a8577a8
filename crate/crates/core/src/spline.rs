//! Frequency-side profiles built from indicator bumps, exact B-splines,
//! the dissipative semigroup and the Duhamel time integral.

use crate::error::{arg, Result};
use crate::gamma::big_to_f64;
use crate::quad::{gl, Neumaier};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// Exponents beyond this are flushed to zero.
pub const UNDERFLOW_EXPONENT: f64 = 700.0;

/// Polynomial in monomial form, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    pub fn eval(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }
}

/// χ_{c_1} ∗ ⋯ ∗ χ_{c_n}, χ the indicator of [-1, 1].
///
/// Stored as the centered cardinal spline: `pieces[i]` is the polynomial in
/// y = ξ - Σc on [-n + 2i, -n + 2i + 2].
#[derive(Debug, Clone, PartialEq)]
pub struct BSpline {
    pub centers: Vec<f64>,
    pub sum: f64,
    pub pieces: Vec<Poly>,
    /// ∫ b, from exact rational pieces
    pub mass: f64,
}

/// Polynomial with exact rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
struct QPoly(Vec<BigRational>);

impl QPoly {
    fn eval(&self, x: &BigRational) -> BigRational {
        self.0.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    fn antiderivative(&self) -> QPoly {
        let mut c = vec![BigRational::zero(); self.0.len() + 1];
        for (i, a) in self.0.iter().enumerate() {
            c[i + 1] = a / BigRational::from_integer(BigInt::from(i + 1));
        }
        QPoly(c)
    }

    /// p(x + s)
    fn shifted(&self, s: i64) -> QPoly {
        let s = BigRational::from_integer(BigInt::from(s));
        let mut out = vec![BigRational::zero(); self.0.len()];
        for (i, a) in self.0.iter().enumerate() {
            let mut binom = BigInt::from(1);
            for j in 0..=i {
                out[j] += a * BigRational::from_integer(binom.clone()) * num_traits::pow(s.clone(), i - j);
                binom = binom * BigInt::from(i - j) / BigInt::from(j + 1);
            }
        }
        QPoly(out)
    }

    fn sub(&self, o: &QPoly) -> QPoly {
        let n = self.0.len().max(o.0.len());
        let z = BigRational::zero();
        QPoly((0..n).map(|i| self.0.get(i).unwrap_or(&z) - o.0.get(i).unwrap_or(&z)).collect())
    }

    fn to_f64(&self) -> Poly {
        Poly(self.0.iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect())
    }
}

fn q(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Centred cardinal spline of order n: exact rational pieces and their f64 images.
fn cardinal(n: usize) -> (Vec<Poly>, f64) {
    static CACHE: OnceLock<Mutex<Vec<(Vec<QPoly>, Vec<Poly>, f64)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        let one = vec![QPoly(vec![q(1)])];
        let f = one.iter().map(QPoly::to_f64).collect();
        Mutex::new(vec![(one, f, 2.0)])
    });
    let mut c = cache.lock().unwrap();
    while c.len() < n {
        let prev = c.last().unwrap().0.clone();
        let m = prev.len() as i64; // order of prev
        // continuous antiderivative F of prev, piecewise on knots -m + 2j
        let mut anti = Vec::with_capacity(prev.len());
        let mut left_val = BigRational::zero();
        for (j, p) in prev.iter().enumerate() {
            let mut a = p.antiderivative();
            let x0 = q(-m + 2 * j as i64);
            a.0[0] = &left_val - a.eval(&x0);
            left_val = a.eval(&(x0 + q(2)));
            anti.push(a);
        }
        let total = left_val;
        // B(y) = F(y+1) - F(y-1); piece i uses F-piece i at y+1 and F-piece i-1 at y-1
        let mut next = Vec::with_capacity(prev.len() + 1);
        for i in 0..=prev.len() {
            let up = if i < prev.len() { anti[i].shifted(1) } else { QPoly(vec![total.clone()]) };
            let down = if i >= 1 { anti[i - 1].shifted(-1) } else { QPoly(vec![BigRational::zero()]) };
            next.push(up.sub(&down));
        }
        // mass of the new spline: F(m+1) - F(-m-1) over its own pieces
        let mut mass = BigRational::zero();
        for (i, p) in next.iter().enumerate() {
            let a = p.antiderivative();
            let x0 = q(-(m + 1) + 2 * i as i64);
            mass += a.eval(&(x0.clone() + q(2))) - a.eval(&x0);
        }
        let f = next.iter().map(QPoly::to_f64).collect();
        c.push((next, f, mass.to_f64().unwrap_or(f64::NAN)));
    }
    let (_, f, mass) = &c[n - 1];
    (f.clone(), *mass)
}

/// Exact piecewise-polynomial convolution of unit indicators centred at `centers`.
pub fn convolve_indicators(centers: &[f64]) -> Result<BSpline> {
    if centers.is_empty() {
        return arg("need at least one center");
    }
    let (pieces, mass) = cardinal(centers.len());
    Ok(BSpline { centers: centers.to_vec(), sum: centers.iter().sum(), pieces, mass })
}

impl BSpline {
    pub fn order(&self) -> usize {
        self.pieces.len()
    }

    pub fn support(&self) -> (f64, f64) {
        let n = self.order() as f64;
        (self.sum - n, self.sum + n)
    }

    /// Value at offset y = ξ - Σc.
    pub fn eval_local(&self, y: f64) -> f64 {
        let n = self.order() as f64;
        if !(y >= -n && y <= n) {
            return 0.0;
        }
        let i = (((y + n) / 2.0).floor() as usize).min(self.order() - 1);
        self.pieces[i].eval(y).max(0.0)
    }

    pub fn eval(&self, xi: f64) -> f64 {
        self.eval_local(xi - self.sum)
    }

    /// Breakpoints of the centred spline.
    pub fn local_knots(&self) -> Vec<f64> {
        let n = self.order();
        (0..=n).map(|i| -(n as f64) + 2.0 * i as f64).collect()
    }

    /// Exact integral from the rational piecewise antiderivatives.
    pub fn integral(&self) -> f64 {
        self.mass
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsOutcome {
    pub pass: bool,
    /// Largest violation over the grid; negative means every bound had slack.
    pub residual: f64,
    pub points: usize,
}

/// χ(ξ - Σc) ≤ b(ξ) ≤ 2^n χ((ξ - Σc)/n) on a grid over the support.
pub fn bspline_bounds_check(b: &BSpline) -> BoundsOutcome {
    let n = b.order() as f64;
    let points = 2001;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..points {
        // grid slightly wider than the support
        let y = -(n + 0.5) + (2.0 * n + 1.0) * i as f64 / (points - 1) as f64;
        let v = b.eval_local(y);
        let lower = if y.abs() <= 1.0 { 1.0 } else { 0.0 };
        let upper = if (y / n).abs() <= 1.0 { 2f64.powf(n) } else { 0.0 };
        worst = worst.max(lower - v - 1e-12).max(v - upper - 1e-12);
    }
    BoundsOutcome { pass: worst <= 0.0, residual: worst, points }
}

/// Local shape of a profile piece, as a function of the offset from its anchor.
#[derive(Clone)]
pub enum Shape {
    /// Constant `weight` on the piece's interval.
    Constant(f64),
    /// `weight` times a centred B-spline.
    Spline { spline: BSpline, weight: f64 },
    /// Arbitrary local evaluator.
    Func(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Constant(w) => write!(f, "Constant({w})"),
            Shape::Spline { spline, weight } => write!(f, "Spline(n={}, {weight})", spline.order()),
            Shape::Func(_) => write!(f, "Func"),
        }
    }
}

/// One compactly supported piece: ξ = anchor + x with x ∈ [lo, hi].
#[derive(Debug, Clone)]
pub struct Piece {
    pub anchor: BigInt,
    pub lo: f64,
    pub hi: f64,
    pub shape: Shape,
    /// Accumulated semigroup time; the piece carries the factor e^{-2π time |ξ|}.
    pub time: f64,
    /// Set when the attenuation underflows; the piece is then exactly zero.
    pub underflow: bool,
    /// Interior points where the shape is not smooth (local coordinates).
    pub breaks: Vec<f64>,
}

impl Piece {
    pub fn indicator(center: BigInt, weight: f64) -> Piece {
        Piece {
            anchor: center,
            lo: -1.0,
            hi: 1.0,
            shape: Shape::Constant(weight),
            time: 0.0,
            underflow: false,
            breaks: Vec::new(),
        }
    }

    pub fn func(
        anchor: BigInt,
        lo: f64,
        hi: f64,
        breaks: Vec<f64>,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Piece {
        Piece { anchor, lo, hi, shape: Shape::Func(f), time: 0.0, underflow: false, breaks }
    }

    pub fn anchor_f64(&self) -> f64 {
        big_to_f64(&self.anchor)
    }

    /// Smallest |ξ| on the support.
    pub fn min_abs(&self) -> f64 {
        let a = self.anchor_f64();
        if a + self.lo <= 0.0 && a + self.hi >= 0.0 {
            0.0
        } else {
            (a + self.lo).abs().min((a + self.hi).abs())
        }
    }

    /// Value at local offset x (zero outside the support).
    pub fn value_local(&self, x: f64) -> f64 {
        if self.underflow || !(x >= self.lo && x <= self.hi) {
            return 0.0;
        }
        let base = match &self.shape {
            Shape::Constant(w) => *w,
            Shape::Spline { spline, weight } => weight * spline.eval_local(x),
            Shape::Func(f) => f(x),
        };
        if self.time == 0.0 || base == 0.0 {
            return base;
        }
        let e = 2.0 * PI * self.time * (self.anchor_f64() + x).abs();
        if e > UNDERFLOW_EXPONENT {
            0.0
        } else {
            base * (-e).exp()
        }
    }

    /// Mirror ξ ↦ -ξ.
    pub fn reflected(&self) -> Piece {
        let shape = match &self.shape {
            Shape::Constant(w) => Shape::Constant(*w),
            Shape::Spline { spline, weight } => Shape::Spline {
                // the centred cardinal spline is even
                spline: BSpline {
                    centers: spline.centers.iter().map(|c| -c).collect(),
                    sum: -spline.sum,
                    pieces: spline.pieces.clone(),
                    mass: spline.mass,
                },
                weight: *weight,
            },
            Shape::Func(f) => {
                let f = f.clone();
                Shape::Func(Arc::new(move |x| f(-x)))
            }
        };
        Piece {
            anchor: -self.anchor.clone(),
            lo: -self.hi,
            hi: -self.lo,
            shape,
            time: self.time,
            underflow: self.underflow,
            breaks: self.breaks.iter().map(|b| -b).collect(),
        }
    }
}

/// f̂ as a finite sum of compactly supported pieces. Constructed data are real
/// and even in ξ, so values are real.
#[derive(Debug, Clone, Default)]
pub struct SpectralProfile {
    pub pieces: Vec<Piece>,
}

impl SpectralProfile {
    pub fn new(pieces: Vec<Piece>) -> Self {
        SpectralProfile { pieces }
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.iter().all(|p| p.underflow)
    }

    /// Sum of all pieces at ξ = anchor + x.
    pub fn eval_at(&self, anchor: &BigInt, x: f64) -> f64 {
        let mut s = Neumaier::default();
        for p in &self.pieces {
            let off = if &p.anchor == anchor {
                0.0
            } else {
                let d = anchor - &p.anchor;
                let d = big_to_f64(&d);
                if d.abs() > 1e6 {
                    continue;
                }
                d
            };
            s.add(p.value_local(off + x));
        }
        s.sum()
    }

    pub fn eval(&self, xi: f64) -> f64 {
        let mut s = Neumaier::default();
        for p in &self.pieces {
            let a = p.anchor_f64();
            s.add(p.value_local(xi - a));
        }
        s.sum()
    }

    pub fn scaled(&self, c: f64) -> SpectralProfile {
        let pieces = self
            .pieces
            .iter()
            .map(|p| {
                let shape = match &p.shape {
                    Shape::Constant(w) => Shape::Constant(c * w),
                    Shape::Spline { spline, weight } => {
                        Shape::Spline { spline: spline.clone(), weight: c * weight }
                    }
                    Shape::Func(f) => {
                        let f = f.clone();
                        Shape::Func(Arc::new(move |x| c * f(x)))
                    }
                };
                Piece { shape, ..p.clone() }
            })
            .collect();
        SpectralProfile { pieces }
    }

    pub fn concat(mut self, other: SpectralProfile) -> SpectralProfile {
        self.pieces.extend(other.pieces);
        self
    }

    /// Structural Hermitian symmetry for real even spectra: every piece has a
    /// mirrored partner with the same weight.
    pub fn is_structurally_even(&self) -> bool {
        let key = |p: &Piece| -> Option<(BigInt, i64, i64, u64, u64)> {
            match p.shape {
                Shape::Constant(w) => Some((
                    p.anchor.clone(),
                    (p.lo * 1e9).round() as i64,
                    (p.hi * 1e9).round() as i64,
                    w.to_bits(),
                    p.time.to_bits(),
                )),
                _ => None,
            }
        };
        let mut keys = Vec::new();
        for p in &self.pieces {
            match key(p) {
                Some(k) => keys.push(k),
                None => return false,
            }
        }
        let mut mirrored: Vec<_> = self.pieces.iter().map(|p| key(&p.reflected()).unwrap()).collect();
        keys.sort();
        mirrored.sort();
        keys == mirrored
    }
}

/// e^{-tΛ}: multiply every piece by e^{-2πt|ξ|}.
pub fn semigroup_apply(profile: &SpectralProfile, t: f64) -> Result<SpectralProfile> {
    if !(t >= 0.0) {
        return arg("time must be non-negative");
    }
    if t == 0.0 {
        return Ok(profile.clone());
    }
    let pieces = profile
        .pieces
        .iter()
        .map(|p| {
            let mut q = p.clone();
            q.time += t;
            if 2.0 * PI * q.time * q.min_abs() > UNDERFLOW_EXPONENT {
                q.underflow = true;
            }
            q
        })
        .collect();
    Ok(SpectralProfile { pieces })
}

/// Frequency-side Duhamel operator ∫_0^t e^{-2π(t-τ)|ξ|} g(ξ, τ) dτ by
/// Gauss-Legendre in τ.
pub fn duhamel_e<G>(forcing: G, t: f64, time_nodes: usize) -> Result<impl Fn(f64) -> f64>
where
    G: Fn(f64, f64) -> f64,
{
    if !(t >= 0.0) {
        return arg("time must be non-negative");
    }
    if time_nodes == 0 {
        return arg("time_nodes must be positive");
    }
    let rule = gl(time_nodes);
    Ok(move |xi: f64| {
        if t == 0.0 {
            return 0.0;
        }
        let mut s = Neumaier::default();
        for (tau, w) in rule.mapped(0.0, t) {
            s.add(w * (-2.0 * PI * (t - tau) * xi.abs()).exp() * forcing(xi, tau));
        }
        s.sum()
    })
}

/// ∫_{t0}^{t1} e^{-2π(t1-τ)p} e^{-2πτb} dτ for p, b ≥ 0, computed without
/// cancellation.
pub fn exp_time_integral(p: f64, b: f64, t0: f64, t1: f64) -> f64 {
    // = e^{-2π t1 p} ∫ e^{-2πτ(b-p)} dτ; factor out the slower decay
    let d = b - p;
    let len = t1 - t0;
    if len <= 0.0 {
        return 0.0;
    }
    // at τ = t1 the exponent is -2π t1 b, at τ = t0 it is -2π(t1 p + t0 d)
    let e_end = -2.0 * PI * t1 * b;
    let e_start = -2.0 * PI * (t1 * p + t0 * d);
    let (e_max, x) = if e_end >= e_start { (e_end, 2.0 * PI * len * d) } else { (e_start, -2.0 * PI * len * d) };
    if -e_max > UNDERFLOW_EXPONENT {
        return 0.0;
    }
    // ∫ = e^{e_max} * len * (1 - e^{-|x|})/|x|
    let ax = x.abs();
    let frac = if ax < 1e-8 { 1.0 - 0.5 * ax } else { -(-ax).exp_m1() / ax };
    e_max.exp() * len * frac
}

/// Closed form of `duhamel_e` for forcing a·e^{-2πτb}.
pub fn duhamel_exponential(a: f64, b: f64, xi: f64, t: f64) -> f64 {
    a * exp_time_integral(xi.abs(), b, 0.0, t)
}

/// Profile φ̂ = Σ w (χ_c + χ_{-c}) over `(center, weight)` pairs.
pub fn symmetric_bumps(bumps: &[(BigInt, f64)]) -> SpectralProfile {
    let mut pieces = Vec::with_capacity(2 * bumps.len());
    for (c, w) in bumps {
        pieces.push(Piece::indicator(c.clone(), *w));
        pieces.push(Piece::indicator(-c.clone(), *w));
    }
    SpectralProfile { pieces }
}

impl Default for Piece {
    fn default() -> Self {
        Piece::indicator(BigInt::zero(), 0.0)
    }
}
