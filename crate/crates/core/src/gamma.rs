//! The kernel Γ_{2k+1}: closed form, quadrature of the defining integral, and
//! checkable versions of its structural properties.

use crate::error::{arg, Error, Result};
use crate::quad::{gl, Neumaier};
use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Settings for α-integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Truncation radius for the α-integral; the tail beyond it is summed asymptotically.
    pub cutoff: f64,
    pub nodes_per_unit: usize,
    /// Width of the inner region near α = 0 that gets its own panel.
    pub pv_exclusion: f64,
    /// Requested error, relative to the natural scale of the integral.
    pub tolerance: f64,
    /// Hard cap on integrand evaluations.
    pub max_nodes: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            cutoff: 8.0,
            nodes_per_unit: 16,
            pv_exclusion: 0.0,
            tolerance: 1e-9,
            max_nodes: 4_000_000,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.cutoff > 0.0) {
            return arg("cutoff must be positive");
        }
        if self.nodes_per_unit < 2 {
            return arg("nodes_per_unit must be at least 2");
        }
        if !(self.pv_exclusion >= 0.0) {
            return arg("pv_exclusion must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaKernel {
    pub k: usize,
    pub quadrature: QuadratureSpec,
}

impl GammaKernel {
    pub fn new(k: usize) -> Result<Self> {
        if k == 0 {
            return arg("kernel order k must be at least 1");
        }
        Ok(GammaKernel { k, quadrature: QuadratureSpec::default() })
    }

    pub fn with_quadrature(mut self, q: QuadratureSpec) -> Self {
        self.quadrature = q;
        self
    }

    /// Number of arguments, 2k+1.
    pub fn arity(&self) -> usize {
        2 * self.k + 1
    }

    fn check_len(&self, a: &[f64]) -> Result<()> {
        if self.k == 0 {
            return arg("kernel order k must be at least 1");
        }
        if a.len() != self.arity() {
            return arg(format!("expected {} arguments, got {}", self.arity(), a.len()));
        }
        if a.iter().any(|x| !x.is_finite()) {
            return arg("arguments must be finite");
        }
        Ok(())
    }
}

/// (-1)^k (2π)^{2k} π / (2k)!
pub fn closed_form_constant(k: usize) -> f64 {
    let mut fact = 1.0;
    for i in 1..=(2 * k) {
        fact *= i as f64;
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    sign * (2.0 * PI).powi(2 * k as i32) * PI / fact
}

/// x^{2k-1}|x|
#[inline]
pub fn signed_power(x: f64, k: usize) -> f64 {
    let p = x.powi(2 * k as i32);
    if x < 0.0 {
        -p
    } else {
        p
    }
}

/// Γ_{2k+1}(A) from the alternating subset-sum formula.
pub fn gamma_closed_form(kernel: &GammaKernel, a: &[f64]) -> Result<f64> {
    kernel.check_len(a)?;
    // the alternating sum cancels to rounding noise when all signs agree
    if a.iter().all(|x| *x > 0.0) || a.iter().all(|x| *x < 0.0) {
        return Ok(0.0);
    }
    Ok(closed_form_unchecked(kernel.k, a))
}

pub(crate) fn closed_form_unchecked(k: usize, a: &[f64]) -> f64 {
    // canonical order makes the result bitwise permutation invariant
    let mut v = a.to_vec();
    v.sort_by(|x, y| x.total_cmp(y));
    let n = v.len();
    let mut acc = Neumaier::default();
    for mask in 1u32..(1u32 << n) {
        let mut s = Neumaier::default();
        for (i, x) in v.iter().enumerate() {
            if mask & (1 << i) != 0 {
                s.add(*x);
            }
        }
        let term = signed_power(s.sum(), k);
        if mask.count_ones() % 2 == 1 {
            acc.add(-term);
        } else {
            acc.add(term);
        }
    }
    closed_form_constant(k) * acc.sum()
}

/// Exact closed form for integer arguments: the alternating sum is formed in
/// big-integer arithmetic and rounded once.
pub fn gamma_closed_form_int(k: usize, a: &[BigInt]) -> Result<f64> {
    if k == 0 || a.len() != 2 * k + 1 {
        return arg("expected 2k+1 integer arguments with k >= 1");
    }
    let n = a.len();
    let mut acc = BigInt::zero();
    for mask in 1u32..(1u32 << n) {
        let mut s = BigInt::zero();
        for (i, x) in a.iter().enumerate() {
            if mask & (1 << i) != 0 {
                s += x;
            }
        }
        let mut term = s.pow(2 * k as u32);
        if s.is_negative() {
            term = -term;
        }
        if mask.count_ones() % 2 == 1 {
            acc -= term;
        } else {
            acc += term;
        }
    }
    Ok(closed_form_constant(k) * big_to_f64(&acc))
}

pub fn big_to_f64(x: &BigInt) -> f64 {
    x.to_f64().unwrap_or(if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// (2π)^{2k+1} |A_1⋯A_{2k+1}|^{2k/(2k+1)}, the natural size of Γ at A.
pub fn gamma_scale(k: usize, a: &[f64]) -> f64 {
    let n = a.len() as f64;
    let logp: f64 = a.iter().map(|x| x.abs().ln()).sum();
    (2.0 * PI).powf(n) * ((2 * k) as f64 / n * logp).exp()
}

#[inline]
fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// ∫_z^∞ sin(y) / y^n dy for z > 0.
fn sine_tail(n: usize, z: f64) -> f64 {
    const Z: f64 = 60.0;
    if z >= Z {
        return asymptotic_tail(n, z).0;
    }
    // y = e^s on [z, Z]; the integrand is smooth in s
    let (s0, s1) = (z.ln(), Z.ln());
    let panels = ((s1 - s0) / 0.125).ceil().max(1.0) as usize;
    let h = (s1 - s0) / panels as f64;
    let r = gl(16);
    let mut acc = Neumaier::default();
    for p in 0..panels {
        let a = s0 + h * p as f64;
        acc.add(r.integrate(a, a + h, |s| {
            let y = s.exp();
            y.sin() * (s * (1.0 - n as f64)).exp()
        }));
    }
    acc.add(asymptotic_tail(n, Z).0);
    acc.sum()
}

/// (∫_z^∞ sin y / y^n, ∫_z^∞ cos y / y^n) by repeated integration by parts.
fn asymptotic_tail(n: usize, z: f64) -> (f64, f64) {
    const DEPTH: usize = 14;
    let (sz, cz) = z.sin_cos();
    let (mut s, mut c) = (0.0, 0.0);
    for m in (n..n + DEPTH).rev() {
        let zm = z.powi(m as i32);
        let (s_next, c_next) = (s, c);
        s = cz / zm - m as f64 * c_next;
        c = -sz / zm + m as f64 * s_next;
    }
    (s, c)
}

/// ∫_L^∞ sin(bα)/α^n dα.
fn tail_integral(n: usize, b: f64, l: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    let sign = b.signum();
    let b = b.abs();
    sign * b.powi(n as i32 - 1) * sine_tail(n, b * l)
}

/// Quadrature of the defining integral in its sine-product form.
///
/// The α-integral is truncated at `cutoff` and the remainder is added from the
/// exact expansion of the oscillatory tail into pure sines.
pub fn gamma_oracle(kernel: &GammaKernel, a: &[f64]) -> Result<f64> {
    kernel.check_len(a)?;
    let q = kernel.quadrature;
    q.validate()?;
    let k = kernel.k;
    let n = a.len();
    if a.contains(&0.0) {
        // m_α(0) = 0
        return Ok(0.0);
    }
    let sigma: f64 = a.iter().sum();
    let abs_sum: f64 = a.iter().map(|x| x.abs()).sum();
    let scale = gamma_scale(k, a);
    let target = q.tolerance * scale;
    let l = q.cutoff;

    let integrand = |alpha: f64| {
        let mut p = (PI * alpha * sigma).cos();
        for x in a {
            p *= PI * x * sinc(PI * alpha * x);
        }
        p
    };

    let pref = if k % 2 == 0 { -1.0 } else { 1.0 } * 2f64.powi(n as i32 + 1);

    // tail: -2 Σ_ε (Π ε) ∫_L^∞ sin(π ω_ε α)/α^n
    let mut tail = Neumaier::default();
    for mask in 0u32..(1u32 << n) {
        let mut omega = Neumaier::default();
        omega.add(sigma);
        let mut sgn = 1.0;
        for (i, x) in a.iter().enumerate() {
            if mask & (1 << i) != 0 {
                omega.add(*x);
            } else {
                omega.add(-*x);
                sgn = -sgn;
            }
        }
        tail.add(-2.0 * sgn * tail_integral(n, PI * omega.sum(), l));
    }
    let tail = tail.sum();

    // one oscillation of the fastest mode per panel, at least nodes_per_unit per unit
    let period = 2.0 / (sigma.abs() + abs_sum);
    let inner = q.pv_exclusion.min(l);
    let mut density = (16.0 / period).max(q.nodes_per_unit as f64);
    let mut last = f64::NAN;
    let mut bound = f64::INFINITY;
    loop {
        let panels = ((l - inner) * density / 16.0).ceil().max(1.0) as usize;
        if panels * 26 > q.max_nodes {
            return Err(Error::Tolerance { estimate: last, bound, requested: target });
        }
        let h = (l - inner) / panels as f64;
        let (r16, r10) = (gl(16), gl(10));
        let mut fine = Neumaier::default();
        let mut coarse = Neumaier::default();
        if inner > 0.0 {
            fine.add(r16.integrate(0.0, inner, integrand));
            coarse.add(r10.integrate(0.0, inner, integrand));
        }
        for p in 0..panels {
            let lo = inner + h * p as f64;
            fine.add(r16.integrate(lo, lo + h, integrand));
            coarse.add(r10.integrate(lo, lo + h, integrand));
        }
        let value = pref * fine.sum() + tail;
        bound = (pref * (fine.sum() - coarse.sum())).abs();
        last = value;
        if bound <= target {
            return Ok(value);
        }
        density *= 2.0;
    }
}

/// Structural properties of Γ that can be checked at a tuple.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Property {
    /// Γ(cA) = c^{2k} sgn(c) Γ(A).
    Scaling(f64),
    /// Vanishing when all arguments share a sign.
    SameSign,
    /// Permutation invariance; exhaustive for k = 1, sampled otherwise.
    Permutation { samples: usize, seed: u64 },
    /// |Γ| ≤ (2π)^{2k+1}|A_1⋯A_{2k}|.
    ProductBound,
    /// Both geometric-mean and leave-one-out product bounds.
    RootBound,
    /// Perturbation inside the unit box; the residual is the measured constant.
    Perturbation { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropertyOutcome {
    pub pass: bool,
    pub residual: f64,
    /// Property-specific reference value (bound, or Σ|A_i|^{2k-1} for the perturbation check).
    pub reference: f64,
}

const REL: f64 = 1e-12;

pub fn gamma_property_check(
    kernel: &GammaKernel,
    a: &[f64],
    which: Property,
) -> Result<PropertyOutcome> {
    kernel.check_len(a)?;
    let k = kernel.k;
    let g = closed_form_unchecked(k, a);
    let two_pi_n = (2.0 * PI).powi(a.len() as i32);
    let terms_scale = {
        let s: f64 = a.iter().map(|x| x.abs()).sum();
        s.powi(2 * k as i32) * closed_form_constant(k).abs()
    };
    Ok(match which {
        Property::Scaling(c) => {
            let ca: Vec<f64> = a.iter().map(|x| c * x).collect();
            let lhs = closed_form_unchecked(k, &ca);
            let rhs = c.powi(2 * k as i32) * c.signum() * g;
            if c == 0.0 {
                PropertyOutcome { pass: lhs == 0.0, residual: lhs.abs(), reference: 0.0 }
            } else {
                let res = (lhs - rhs).abs();
                let tol = REL * c.abs().powi(2 * k as i32) * terms_scale.max(g.abs());
                PropertyOutcome { pass: res <= tol, residual: res, reference: rhs }
            }
        }
        Property::SameSign => {
            let same = a.iter().all(|x| *x > 0.0) || a.iter().all(|x| *x < 0.0);
            if !same {
                return arg("arguments do not share a sign");
            }
            let maxa = a.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let tol = 1e-8 * two_pi_n * maxa.powi(2 * k as i32);
            PropertyOutcome { pass: g.abs() <= tol, residual: g.abs(), reference: tol }
        }
        Property::Permutation { samples, seed } => {
            let mut worst = 0.0f64;
            let mut check = |p: &[f64]| {
                let v = closed_form_unchecked(k, p);
                worst = worst.max((v - g).abs());
            };
            if k == 1 {
                for perm in permutations(a) {
                    check(&perm);
                }
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut p = a.to_vec();
                for _ in 0..samples {
                    p.shuffle(&mut rng);
                    check(&p);
                }
            }
            let tol = REL * terms_scale.max(g.abs());
            PropertyOutcome { pass: worst <= tol, residual: worst, reference: g }
        }
        Property::ProductBound => {
            let b = two_pi_n * a[..a.len() - 1].iter().map(|x| x.abs()).product::<f64>();
            let slack = REL * terms_scale;
            PropertyOutcome { pass: g.abs() <= b + slack, residual: g.abs() - b, reference: b }
        }
        Property::RootBound => {
            let b1 = gamma_scale(k, a);
            let b2 = (0..a.len())
                .map(|j| {
                    a.iter()
                        .enumerate()
                        .filter(|(i, _)| *i != j)
                        .map(|(_, x)| x.abs())
                        .product::<f64>()
                })
                .fold(f64::INFINITY, f64::min)
                * two_pi_n;
            let b = b1.min(b2);
            let slack = REL * terms_scale;
            PropertyOutcome { pass: g.abs() <= b + slack, residual: g.abs() - b, reference: b }
        }
        Property::Perturbation { samples, seed } => {
            if a.iter().any(|x| x.abs() <= 2.0) {
                return arg("perturbation property needs |A_i| > 2");
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let denom: f64 = a.iter().map(|x| x.abs().powi(2 * k as i32 - 1)).sum();
            let mut worst = 0.0f64;
            let mut x = a.to_vec();
            for _ in 0..samples.max(1) {
                for (xi, ai) in x.iter_mut().zip(a) {
                    *xi = ai + rng.gen_range(-1.0..=1.0);
                }
                let d = (closed_form_unchecked(k, &x) - g).abs();
                worst = worst.max(d / denom);
            }
            PropertyOutcome { pass: worst.is_finite(), residual: worst, reference: denom }
        }
    })
}

fn permutations(a: &[f64]) -> Vec<Vec<f64>> {
    if a.len() <= 1 {
        return vec![a.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..a.len() {
        let mut rest = a.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

/// Leading-order residual of Γ_{2ℓ+1}(-k,…,-k, 2ℓk+M) against
/// (-1)^{ℓ+1}(2π)^{2ℓ+1}k^{2ℓ}, divided by k^{2ℓ-1}.
pub fn gamma_special_value_check(ell: usize, k_val: f64, m: f64) -> Result<f64> {
    if ell == 0 {
        return arg("ell must be positive");
    }
    if !(k_val > m && m > 0.0) {
        return arg("need k_val > M > 0");
    }
    let (g, lead) = special_value_parts(ell, k_val, m)?;
    Ok((g - lead).abs() / k_val.powi(2 * ell as i32 - 1))
}

/// (Γ, leading term) at the special tuple.
pub fn special_value_parts(ell: usize, k_val: f64, m: f64) -> Result<(f64, f64)> {
    let n = 2 * ell + 1;
    let mut a = vec![-k_val; n];
    a[n - 1] = 2.0 * ell as f64 * k_val + m;
    let g = if k_val.fract() == 0.0 && m.fract() == 0.0 && k_val < 9e15 {
        let ints: Vec<BigInt> = a.iter().map(|x| BigInt::from(*x as i64)).collect();
        gamma_closed_form_int(ell, &ints)?
    } else {
        closed_form_unchecked(ell, &a)
    };
    let sign = if ell % 2 == 1 { 1.0 } else { -1.0 };
    let lead = sign * (2.0 * PI).powi(n as i32) * k_val.powi(2 * ell as i32);
    Ok((g, lead))
}
