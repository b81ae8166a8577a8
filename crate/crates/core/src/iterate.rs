//! The second Picard iterate f_k = pref_k E(T_k(e^{tΔ}φ)), assembled tuple by
//! tuple on the frequency side.
//!
//! For a tuple c of bump centres the R-term is
//!   R(ξ, τ) = 2πξ ∫ Γ(c + x) e^{-2πτ Σ|c_i + x_i|} dx   (x ∈ [-1,1]^n, Σx = ξ - Σc)
//! and its Duhamel integral over [t0, t1] has the time integral in closed form.

use crate::besov::{besov_norm, NormParams};
use crate::error::{arg, Error, Result};
use crate::gamma::{big_to_f64, closed_form_constant, QuadratureSpec};
use crate::quad::{cells, gl, Neumaier};
use crate::sequences::{for_each_multiset, SequenceFamily};
use crate::spline::{semigroup_apply, Piece, SpectralProfile, UNDERFLOW_EXPONENT};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

/// Highest tuple order the tensor quadrature supports.
pub const MAX_ORDER: usize = 2;

/// One bump of the (semigroup-free) initial data: weight·χ_{[c-1,c+1]}.
#[derive(Debug, Clone, PartialEq)]
pub struct DataAtom {
    pub index: usize,
    pub center: BigInt,
    pub weight: f64,
}

/// Atoms of φ^(N): Λ(k_j) with weight γ_j.
pub fn family_atoms(f: &SequenceFamily) -> Vec<DataAtom> {
    let mut v = Vec::new();
    for j in f.indices() {
        for c in f.lambda(j) {
            v.push(DataAtom { index: j, center: c, weight: f.gamma(j) });
        }
    }
    v
}

/// Atoms of Σ w(χ_c + χ_{-c}), all on a single index.
pub fn bump_atoms(bumps: &[(BigInt, f64)]) -> Vec<DataAtom> {
    let mut v = Vec::new();
    for (c, w) in bumps {
        v.push(DataAtom { index: 0, center: c.clone(), weight: *w });
        v.push(DataAtom { index: 0, center: -c.clone(), weight: *w });
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TimeRule {
    /// Exact integral of the exponential time profile.
    Exact,
    /// Gauss-Legendre in τ with this many nodes.
    GaussLegendre(usize),
}

/// Normalisation of the nonlinear term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prefactor {
    /// (-1)^k / (π(2k+1)), from the Taylor expansion of the contour integral.
    Series,
    /// (-1)^k / (2k+1).
    NoPi,
}

impl Prefactor {
    pub fn value(self, k: usize) -> f64 {
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        match self {
            Prefactor::Series => s / (PI * (2 * k + 1) as f64),
            Prefactor::NoPi => s / (2 * k + 1) as f64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterateConfig {
    /// Gauss-Legendre nodes per cell for the inner x-integrals.
    pub inner_nodes: usize,
    pub time_rule: TimeRule,
    pub prefactor: Prefactor,
}

impl Default for IterateConfig {
    fn default() -> Self {
        IterateConfig { inner_nodes: 8, time_rule: TimeRule::Exact, prefactor: Prefactor::Series }
    }
}

impl IterateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.inner_nodes == 0 || self.inner_nodes > 64 {
            return arg("inner_nodes must be in 1..=64");
        }
        if let TimeRule::GaussLegendre(n) = self.time_rule {
            if n == 0 || n > 256 {
                return arg("time nodes must be in 1..=256");
            }
        }
        Ok(())
    }
}

/// Affine constraint Σ_{i∈mask} x_i = k0 + k1·X over the free variables
/// x_0..x_{n-2}; x_{n-1} = X - Σ x_i is eliminated.
#[derive(Debug, Clone, Copy)]
struct Plane {
    mask: u32,
    k0: f64,
    k1: f64,
}

/// Γ(c + x) = K (P(x) + Σ_small (-1)^{|S|} g(σ_S(c) + σ_S(x))), with P the
/// exact expansion over subsets whose sum cannot vanish on the box.
#[derive(Debug, Clone)]
struct GammaPoly {
    k: usize,
    /// exponent vectors and f64 coefficients
    monomials: Vec<(Vec<u8>, f64)>,
    /// (subset mask, σ_S(c), (-1)^{|S|})
    small: Vec<(u32, f64, f64)>,
    constant: f64,
}

fn binom(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

fn exponent_vectors(n: usize, deg: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; n];
    fn rec(i: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if i + 1 == cur.len() {
            cur[i] = left as u8;
            out.push(cur.clone());
            return;
        }
        for e in 0..=left {
            cur[i] = e as u8;
            rec(i + 1, left - e, cur, out);
        }
    }
    for m in 0..=deg {
        rec(0, m, &mut cur, &mut out);
    }
    out
}

impl GammaPoly {
    fn new(k: usize, c: &[BigInt]) -> GammaPoly {
        let n = c.len();
        let deg = 2 * k;
        let exps = exponent_vectors(n, deg);
        let mut coef: Vec<BigInt> = vec![BigInt::zero(); exps.len()];
        let mut small = Vec::new();
        let fact = |m: u64| -> u64 { (1..=m).product() };
        for mask in 1u32..(1 << n) {
            let size = mask.count_ones() as usize;
            let sigma: BigInt = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| &c[i]).sum();
            let parity = if size % 2 == 0 { 1.0 } else { -1.0 };
            if sigma.abs() <= BigInt::from(size) {
                small.push((mask, big_to_f64(&sigma), parity));
                continue;
            }
            // (-1)^{|S|} sgn(σ) (σ + y)^{2k}, y = Σ_{i∈S} x_i
            let sign = parity * if sigma.is_negative() { -1.0 } else { 1.0 };
            let mut pw = vec![BigInt::one(); deg + 1];
            for m in 1..=deg {
                pw[m] = &pw[m - 1] * &sigma;
            }
            for (idx, e) in exps.iter().enumerate() {
                if (0..n).any(|i| e[i] > 0 && mask >> i & 1 == 0) {
                    continue;
                }
                let m: u64 = e.iter().map(|v| *v as u64).sum();
                let multi = fact(m) / e.iter().map(|v| fact(*v as u64)).product::<u64>();
                let v = &pw[deg - m as usize] * BigInt::from(binom(deg as u64, m) * multi);
                if sign > 0.0 {
                    coef[idx] += v;
                } else {
                    coef[idx] -= v;
                }
            }
        }
        let monomials = exps
            .into_iter()
            .zip(coef)
            .filter(|(_, c)| !c.is_zero())
            .map(|(e, c)| (e, big_to_f64(&c)))
            .collect();
        GammaPoly { k, monomials, small, constant: closed_form_constant(k) }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let deg = 2 * self.k;
        let mut pw = [[1.0f64; 5]; 5];
        for i in 0..n {
            for m in 1..=deg {
                pw[i][m] = pw[i][m - 1] * x[i];
            }
        }
        let mut s = Neumaier::default();
        for (e, c) in &self.monomials {
            let mut v = *c;
            for i in 0..n {
                v *= pw[i][e[i] as usize];
            }
            s.add(v);
        }
        for (mask, sig, parity) in &self.small {
            let mut y = *sig;
            for (i, xi) in x.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    y += xi;
                }
            }
            s.add(parity * y.abs() * y.powi(deg as i32 - 1));
        }
        self.constant * s.sum()
    }
}

/// R-term of one tuple of bump centres.
#[derive(Debug, Clone)]
pub struct RTerm {
    pub centers: Vec<BigInt>,
    pub sum: BigInt,
    k: usize,
    poly: GammaPoly,
    signs: Vec<f64>,
    sum_f64: f64,
    /// Σ|c_i| - |Σc|, exact then rounded
    excess: f64,
    /// |Σc| large enough that sgn ξ is fixed on the support
    sign_fixed: bool,
    planes: Vec<(u32, f64, bool)>,
    nodes: usize,
}

pub fn assemble_r_term(centers: &[BigInt], nodes: usize) -> Result<RTerm> {
    let n = centers.len();
    if n < 3 || n % 2 == 0 {
        return arg("tuple length must be odd and at least 3");
    }
    let k = (n - 1) / 2;
    if k > MAX_ORDER {
        return Err(Error::Capacity(format!("tuple order {k} exceeds the quadrature budget (max {MAX_ORDER})")));
    }
    if centers.iter().any(|c| c.abs() <= BigInt::one()) {
        return arg("bump centres must satisfy |c| > 1");
    }
    if nodes == 0 {
        return arg("need at least one node per cell");
    }
    let poly = GammaPoly::new(k, centers);
    let sum: BigInt = centers.iter().sum();
    let abs_sum: BigInt = centers.iter().map(|c| c.abs()).sum();
    let excess = big_to_f64(&(abs_sum - sum.abs()));
    let planes = poly
        .small
        .iter()
        .map(|(mask, sig, _)| (*mask, *sig, mask >> (n - 1) & 1 == 1))
        .collect();
    Ok(RTerm {
        signs: centers.iter().map(|c| if c.is_negative() { -1.0 } else { 1.0 }).collect(),
        sum_f64: big_to_f64(&sum),
        sign_fixed: sum.abs() > BigInt::from(n),
        centers: centers.to_vec(),
        sum,
        k,
        poly,
        excess,
        planes,
        nodes,
    })
}

impl RTerm {
    pub fn order(&self) -> usize {
        self.k
    }

    fn arity(&self) -> usize {
        2 * self.k + 1
    }

    /// Kink hyperplanes in the free variables for a given offset X.
    fn planes(&self) -> Vec<Plane> {
        let n = self.arity();
        let full = (1u32 << (n - 1)) - 1;
        let mut v = Vec::with_capacity(self.planes.len() + 2);
        for (mask, sig, has_last) in &self.planes {
            if *has_last {
                // Σ_{S\last} x + X - Σ_free x = -σ  =>  Σ_{free\S} x = σ + X
                v.push(Plane { mask: full & !mask, k0: *sig, k1: 1.0 });
            } else {
                v.push(Plane { mask: *mask, k0: -sig, k1: 0.0 });
            }
        }
        v
    }

    /// Δ(x) = Σ|c_i + x_i| - |ξ| ≥ 0.
    fn excess_at(&self, x: &[f64], big_x: f64) -> f64 {
        let mut s = self.excess;
        let mut small = 0.0;
        for (sg, xi) in self.signs.iter().zip(x) {
            small += sg * xi;
        }
        if self.sign_fixed {
            small -= self.sum_f64.signum() * big_x;
        } else {
            small += self.sum_f64.abs() - (self.sum_f64 + big_x).abs();
        }
        s += small;
        s.max(0.0)
    }

    /// ∫ Γ(c + x) K(Δ(x)) over the slice Σx = X.
    fn slice_integral(&self, big_x: f64, kernel: &dyn Fn(f64) -> f64) -> f64 {
        let n = self.arity();
        let d = n - 1;
        if big_x.abs() >= n as f64 {
            return 0.0;
        }
        let planes = self.planes();
        let mut pt = vec![0.0; n];
        let mut eval = |pt: &mut [f64]| -> f64 {
            let s: f64 = pt[..d].iter().sum();
            pt[d] = big_x - s;
            self.poly.eval(pt) * kernel(self.excess_at(pt, big_x))
        };
        nested(0, d, big_x, &planes, self.nodes, &mut pt, &mut eval)
    }

    /// R(ξ, τ) at ξ = Σc + X.
    pub fn eval(&self, big_x: f64, tau: f64) -> f64 {
        let xi = self.sum_f64 + big_x;
        let e = 2.0 * PI * tau * xi.abs();
        if e > UNDERFLOW_EXPONENT {
            return 0.0;
        }
        let inner = self.slice_integral(big_x, &|delta| (-2.0 * PI * tau * delta).exp());
        2.0 * PI * xi * (-e).exp() * inner
    }

    /// ∫_{t0}^{t1} e^{-2π(t1-τ)|ξ|} R(ξ, τ) dτ at ξ = Σc + X.
    pub fn duhamel(&self, big_x: f64, t0: f64, t1: f64, rule: TimeRule) -> f64 {
        let xi = self.sum_f64 + big_x;
        let e = 2.0 * PI * t1 * xi.abs();
        if e > UNDERFLOW_EXPONENT || t1 <= t0 {
            return 0.0;
        }
        let inner = match rule {
            TimeRule::Exact => self.slice_integral(big_x, &|delta| window_integral(delta, t0, t1)),
            TimeRule::GaussLegendre(m) => {
                let nodes: Vec<(f64, f64)> = gl(m).mapped(t0, t1).collect();
                self.slice_integral(big_x, &move |delta| {
                    nodes.iter().map(|(tau, w)| w * (-2.0 * PI * tau * delta).exp()).sum()
                })
            }
        };
        2.0 * PI * xi * (-e).exp() * inner
    }

    /// Points in the local ξ-offset where the slice integral is not smooth.
    pub fn offset_breaks(&self) -> Vec<f64> {
        let n = self.arity();
        let mut out: Vec<f64> = (-(n as i64) + 1..n as i64).map(|i| i as f64).collect();
        // planes that do not involve any free variable pin X directly
        for p in self.planes() {
            if p.mask == 0 && p.k1 != 0.0 {
                out.push(-p.k0 / p.k1);
            }
        }
        if n == 3 {
            out.extend(concurrences(&self.planes()));
        }
        if !self.sign_fixed {
            out.push(-self.sum_f64);
        }
        out.retain(|x| x.abs() < n as f64);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// ∫_{t0}^{t1} e^{-2πτΔ} dτ for Δ ≥ 0.
fn window_integral(delta: f64, t0: f64, t1: f64) -> f64 {
    let len = t1 - t0;
    let a = 2.0 * PI * delta;
    let x = a * len;
    let frac = if x < 1e-8 { 1.0 - 0.5 * x } else { -(-x).exp_m1() / x };
    let head = -a * t0;
    if head < -UNDERFLOW_EXPONENT {
        0.0
    } else {
        head.exp() * len * frac
    }
}

/// Offsets X where three boundary lines of the planar slice meet (arity 3).
fn concurrences(planes: &[Plane]) -> Vec<f64> {
    // lines α·y = β0 + β1 X in (y0, y1)
    let mut lines: Vec<([f64; 2], f64, f64)> = vec![
        ([1.0, 0.0], -1.0, 0.0),
        ([1.0, 0.0], 1.0, 0.0),
        ([0.0, 1.0], -1.0, 0.0),
        ([0.0, 1.0], 1.0, 0.0),
        ([1.0, 1.0], -1.0, 1.0),
        ([1.0, 1.0], 1.0, 1.0),
    ];
    for p in planes {
        if p.mask != 0 {
            lines.push(([(p.mask & 1) as f64, (p.mask >> 1 & 1) as f64], p.k0, p.k1));
        }
    }
    let mut out = Vec::new();
    for i in 0..lines.len() {
        for j in i + 1..lines.len() {
            let (a, b0, b1) = lines[i];
            let (c, d0, d1) = lines[j];
            let det = a[0] * c[1] - a[1] * c[0];
            if det == 0.0 {
                // parallel: coincide where β agree
                if b1 != d1 {
                    out.push((d0 - b0) / (b1 - d1));
                }
                continue;
            }
            // y = u + v X
            let u = [(b0 * c[1] - a[1] * d0) / det, (a[0] * d0 - b0 * c[0]) / det];
            let v = [(b1 * c[1] - a[1] * d1) / det, (a[0] * d1 - b1 * c[0]) / det];
            for (e, f0, f1) in &lines {
                let coef = e[0] * v[0] + e[1] * v[1] - f1;
                if coef.abs() > 1e-12 {
                    out.push((f0 - e[0] * u[0] - e[1] * u[1]) / coef);
                }
            }
        }
    }
    out
}

/// Nested Gauss-Legendre over x_level..x_{d-1} ∈ [-1,1] with Σx ∈ [X-1, X+1].
fn nested(
    level: usize,
    d: usize,
    big_x: f64,
    planes: &[Plane],
    nodes: usize,
    pt: &mut [f64],
    f: &mut dyn FnMut(&mut [f64]) -> f64,
) -> f64 {
    let prefix: f64 = pt[..level].iter().sum();
    let rest = (d - 1 - level) as f64;
    let lo = (-1.0f64).max(big_x - 1.0 - prefix - rest);
    let hi = 1.0f64.min(big_x + 1.0 - prefix + rest);
    if hi <= lo {
        return 0.0;
    }
    let mut breaks = Vec::new();
    let partial = |mask: u32, upto: usize, pt: &[f64]| -> f64 {
        (0..upto).filter(|j| mask >> j & 1 == 1).map(|j| pt[j]).sum()
    };
    for p in planes {
        if p.mask == 0 {
            continue;
        }
        let top = 31 - p.mask.leading_zeros() as usize;
        if top == level {
            breaks.push(p.k0 + p.k1 * big_x - partial(p.mask, level, pt));
        }
    }
    if level + 1 < d {
        // where the next level's window changes shape
        let r = rest - 1.0;
        for e in [big_x - 1.0 - prefix - r, big_x + 1.0 - prefix + r] {
            breaks.push(e - 1.0);
            breaks.push(e + 1.0);
        }
    }
    if level + 2 == d {
        // lift the innermost kink lines z = a + b·y to crossings in y
        let z = level + 1;
        let mut lines: Vec<(f64, f64)> = vec![
            (-1.0, 0.0),
            (1.0, 0.0),
            (big_x - 1.0 - prefix, -1.0),
            (big_x + 1.0 - prefix, -1.0),
        ];
        for p in planes {
            if p.mask == 0 || 31 - p.mask.leading_zeros() as usize != z {
                continue;
            }
            let a = p.k0 + p.k1 * big_x - partial(p.mask, level, pt);
            let b = if p.mask >> level & 1 == 1 { -1.0 } else { 0.0 };
            lines.push((a, b));
        }
        for (i, (a0, b0)) in lines.iter().enumerate() {
            for (a1, b1) in &lines[i + 1..] {
                if b0 != b1 {
                    breaks.push((a1 - a0) / (b0 - b1));
                }
            }
        }
    }
    let m = (hi - lo).ceil().max(1.0) as usize;
    for i in 1..m {
        breaks.push(lo + (hi - lo) * i as f64 / m as f64);
    }
    let rule = gl(nodes);
    let mut s = Neumaier::default();
    for w in cells(lo, hi, &breaks).windows(2) {
        if w[1] - w[0] <= 1e-14 {
            continue;
        }
        for (x, wt) in rule.mapped(w[0], w[1]) {
            pt[level] = x;
            let v = if level + 1 == d { f(pt) } else { nested(level + 1, d, big_x, planes, nodes, pt, f) };
            s.add(wt * v);
        }
    }
    s.sum()
}

/// Which part of the decomposition a tuple belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Bucket {
    /// diagonal (for k = ℓ only the exceptional sums Σc = ±M)
    J,
    /// diagonal with Σc ≠ ±M, top order only
    Hf1,
    /// off-diagonal
    Hf,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct TupleCounts {
    pub multisets: u64,
    pub same_sign: u64,
    pub underflow: u64,
    pub kept: u64,
}

/// One component f_k over the window [t0, t1].
#[derive(Debug, Clone)]
pub struct IterateComponent {
    pub k: usize,
    pub t0: f64,
    pub t1: f64,
    pub prefactor: f64,
    pub j: SpectralProfile,
    pub hf1: SpectralProfile,
    pub hf: SpectralProfile,
    pub counts: TupleCounts,
}

impl IterateComponent {
    pub fn total(&self) -> SpectralProfile {
        self.j.clone().concat(self.hf1.clone()).concat(self.hf.clone())
    }

    /// HF_1 + HF_2 at top order, HF otherwise.
    pub fn high(&self) -> SpectralProfile {
        self.hf1.clone().concat(self.hf.clone())
    }
}

#[derive(Debug, Clone, Copy)]
enum Kind {
    /// E over [t0, t1], evaluated at t1
    Window(f64, f64),
    /// the forcing R itself at time τ
    At(f64),
}

/// Assemble f_k at time t1 from the forcing restricted to τ ∈ [t0, t1].
/// `exceptional` is M when the diagonal must be split at Σc = ±M.
pub fn assemble_component(
    atoms: &[DataAtom],
    k: usize,
    exceptional: Option<i64>,
    t0: f64,
    t1: f64,
    cfg: &IterateConfig,
) -> Result<IterateComponent> {
    if !(t0 >= 0.0 && t1 >= t0 && t1.is_finite()) {
        return arg("need 0 <= t0 <= t1 < inf");
    }
    build(atoms, k, exceptional, Kind::Window(t0, t1), cfg)
}

/// Frequency side of pref_k T_k(e^{-τΛ}φ), without the Duhamel integral.
pub fn assemble_forcing(atoms: &[DataAtom], k: usize, tau: f64, cfg: &IterateConfig) -> Result<SpectralProfile> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return arg("need 0 <= tau < inf");
    }
    Ok(build(atoms, k, None, Kind::At(tau), cfg)?.total())
}

fn build(
    atoms: &[DataAtom],
    k: usize,
    exceptional: Option<i64>,
    kind: Kind,
    cfg: &IterateConfig,
) -> Result<IterateComponent> {
    cfg.validate()?;
    if k == 0 {
        return arg("order must be at least 1");
    }
    if k > MAX_ORDER {
        return Err(Error::Capacity(format!("order {k} exceeds the quadrature budget (max {MAX_ORDER})")));
    }
    let (t0, t1) = match kind {
        Kind::Window(a, b) => (a, b),
        Kind::At(tau) => (tau, tau),
    };
    let n = 2 * k + 1;
    let pref = cfg.prefactor.value(k);
    let mut counts = TupleCounts::default();
    // (bucket, Σc) -> members
    let mut groups: BTreeMap<(Bucket, BigInt), Vec<(Arc<RTerm>, f64)>> = BTreeMap::new();
    let cutoff = if t1 > 0.0 { UNDERFLOW_EXPONENT / (2.0 * PI * t1) + n as f64 } else { f64::INFINITY };
    let mut err = None;
    for_each_multiset(atoms.len(), n, |idx, mult| {
        if err.is_some() {
            return;
        }
        counts.multisets += 1;
        let t: Vec<&DataAtom> = idx.iter().map(|i| &atoms[*i]).collect();
        let pos = t.iter().all(|a| a.center.is_positive());
        let neg = t.iter().all(|a| a.center.is_negative());
        if pos || neg {
            counts.same_sign += 1;
            return;
        }
        let sum: BigInt = t.iter().map(|a| &a.center).sum();
        if big_to_f64(&sum).abs() > cutoff {
            counts.underflow += 1;
            return;
        }
        // one orientation per ± pair; the mirror is added by reflection.
        // Zero-sum tuples meet their mirror at the same anchor and are kept as is.
        if sum.is_negative() {
            return;
        }
        counts.kept += if sum.is_zero() { 1 } else { 2 };
        let diagonal = t.iter().all(|a| a.index == t[0].index);
        let bucket = match (diagonal, exceptional) {
            (false, _) => Bucket::Hf,
            (true, Some(m)) if sum.abs() != BigInt::from(m) => Bucket::Hf1,
            (true, _) => Bucket::J,
        };
        let centers: Vec<BigInt> = t.iter().map(|a| a.center.clone()).collect();
        match assemble_r_term(&centers, cfg.inner_nodes) {
            Ok(r) => {
                let w = pref * mult as f64 * t.iter().map(|a| a.weight).product::<f64>();
                groups.entry((bucket, sum)).or_default().push((Arc::new(r), w));
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    let mut parts: BTreeMap<Bucket, Vec<Piece>> = BTreeMap::new();
    let rule = cfg.time_rule;
    for ((bucket, sum), members) in groups {
        let mut breaks: Vec<f64> = members.iter().flat_map(|(r, _)| r.offset_breaks()).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let zero_sum = sum.is_zero();
        let m2 = Arc::new(members);
        let f = Arc::new(move |x: f64| {
            let mut s = Neumaier::default();
            for (r, w) in m2.iter() {
                let v = match kind {
                    Kind::Window(t0, t1) => r.duhamel(x, t0, t1, rule),
                    Kind::At(tau) => r.eval(x, tau),
                };
                s.add(w * v);
            }
            s.sum()
        });
        let piece = Piece::func(sum, -(n as f64), n as f64, breaks, f);
        let list = parts.entry(bucket).or_default();
        if !zero_sum {
            list.push(piece.reflected());
        }
        list.push(piece);
    }
    let take = |b: Bucket, parts: &mut BTreeMap<Bucket, Vec<Piece>>| SpectralProfile::new(parts.remove(&b).unwrap_or_default());
    Ok(IterateComponent {
        k,
        t0,
        t1,
        prefactor: pref,
        j: take(Bucket::J, &mut parts),
        hf1: take(Bucket::Hf1, &mut parts),
        hf: take(Bucket::Hf, &mut parts),
        counts,
    })
}

/// Component f_k of the family's second iterate at time t.
pub fn family_component(f: &SequenceFamily, k: usize, t: f64, cfg: &IterateConfig) -> Result<IterateComponent> {
    if k > f.ell {
        return arg("order must not exceed ell");
    }
    let m = if k == f.ell { Some(f.m) } else { None };
    assemble_component(&family_atoms(f), k, m, 0.0, t, cfg)
}

/// Whether t sits in the window t·M ≤ 1 < t·k_N.
pub fn time_window_ok(f: &SequenceFamily, t: f64) -> bool {
    let kn = big_to_f64(f.k(f.n));
    t * f.m as f64 <= 1.0 && t * kn > 1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentNorms {
    pub k: usize,
    pub j_norm: f64,
    pub hf_norm: f64,
    pub hf1_norm: Option<f64>,
    pub hf2_norm: Option<f64>,
    pub total_norm: f64,
    /// Σ γ_j^{2ℓ+1} k_j^{2ℓ-1}
    pub main_sum: f64,
    /// Σ γ_j k_j^{(2k-1)/(2k+1)}
    pub l_sum: f64,
    /// (Σ γ_j^{(2k+1)q} k_j^{(2k-2+m)q})^{1/q}
    pub j_sum_root: f64,
}

/// Comparison sums of the family used alongside the measured norms.
pub fn comparison_sums(f: &SequenceFamily, k: usize) -> (f64, f64, f64) {
    let m = f.m_index();
    let ell = f.ell as f64;
    let kk = k as f64;
    let mut main = Neumaier::default();
    let mut l = Neumaier::default();
    let mut jr: Vec<f64> = Vec::new();
    for j in f.indices() {
        let g = f.gamma(j).ln();
        let kj = crate::sequences::ln_big(f.k(j));
        main.add((g * (2.0 * ell + 1.0) + kj * (2.0 * ell - 1.0)).exp());
        l.add((g + kj * (2.0 * kk - 1.0) / (2.0 * kk + 1.0)).exp());
        jr.push(f.q * (g * (2.0 * kk + 1.0) + kj * (2.0 * kk - 2.0 + m)));
    }
    // log-sum-exp for the q-th power sum
    let top = jr.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = jr.iter().map(|v| (v - top).exp()).sum();
    let j_root = ((top + s.ln()) / f.q).exp();
    (main.sum(), l.sum(), j_root)
}

pub fn measure_component_norms(
    f: &SequenceFamily,
    comp: &IterateComponent,
    params: &NormParams,
    quad: &QuadratureSpec,
) -> Result<ComponentNorms> {
    let norm = |p: &SpectralProfile| -> Result<f64> {
        if p.pieces.is_empty() {
            Ok(0.0)
        } else {
            besov_norm(p, params, quad)
        }
    };
    let j_norm = norm(&comp.j)?;
    let top = comp.k == f.ell;
    let (hf_norm, hf1, hf2) = if top {
        let a = norm(&comp.hf1)?;
        let b = norm(&comp.hf)?;
        (norm(&comp.high())?, Some(a), Some(b))
    } else {
        (norm(&comp.hf)?, None, None)
    };
    let total_norm = norm(&comp.total())?;
    let (main_sum, l_sum, j_sum_root) = comparison_sums(f, comp.k);
    Ok(ComponentNorms { k: comp.k, j_norm, hf_norm, hf1_norm: hf1, hf2_norm: hf2, total_norm, main_sum, l_sum, j_sum_root })
}

/// Max relative gap between f(t) and e^{(t/2)Δ} f(t/2) + E_{[t/2,t]} at the
/// given offsets of every piece anchor.
pub fn duhamel_consistency(
    atoms: &[DataAtom],
    k: usize,
    t: f64,
    cfg: &IterateConfig,
    offsets: &[f64],
) -> Result<f64> {
    let full = assemble_component(atoms, k, None, 0.0, t, cfg)?.total();
    let half = assemble_component(atoms, k, None, 0.0, 0.5 * t, cfg)?.total();
    let rest = assemble_component(atoms, k, None, 0.5 * t, t, cfg)?.total();
    let two = semigroup_apply(&half, 0.5 * t)?.concat(rest);
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    let anchors: Vec<BigInt> = full.pieces.iter().map(|p| p.anchor.clone()).collect();
    for a in &anchors {
        for x in offsets {
            let u = full.eval_at(a, *x);
            let v = two.eval_at(a, *x);
            worst = worst.max((u - v).abs());
            scale = scale.max(u.abs());
        }
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// Max |f(ξ) - f(-ξ)| relative to max |f| at the given offsets; zero for
/// real even data.
pub fn symmetry_defect(p: &SpectralProfile, offsets: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    let mut scale = 0.0f64;
    for piece in &p.pieces {
        let neg = -piece.anchor.clone();
        for x in offsets {
            let u = p.eval_at(&piece.anchor, *x);
            let v = p.eval_at(&neg, -x);
            worst = worst.max((u - v).abs());
            scale = scale.max(u.abs());
        }
    }
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}

/// Convert an exact anchor to i64 when it fits (for reporting).
pub fn anchor_i64(a: &BigInt) -> Option<i64> {
    a.to_i64()
}
