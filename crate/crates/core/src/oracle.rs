//! Physical-space reference computations: inverse transforms of profiles,
//! T_k by direct α-quadrature, and the Duhamel integral on a sampling grid.
//!
//! Profiles with bounded support give band-limited fields. The α-integrand of
//! T_k is then entire of exponential type (2k+1)B, so the trapezoid rule on a
//! half-shifted grid with step below 1/((2k+1)B) is exact up to truncation.

use crate::error::{arg, Error, Result};
use crate::quad::{cells, gl, Neumaier};
use crate::iterate::{assemble_component, bump_atoms, IterateConfig};
use crate::spline::{semigroup_apply, symmetric_bumps, Shape, SpectralProfile};
use num_bigint::BigInt;
use serde::Serialize;
use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Real field x ↦ ∫ f̂(ξ) e^{2πixξ} dξ of a bounded-support profile.
#[derive(Debug, Clone)]
pub struct PhysicalField {
    profile: SpectralProfile,
    /// max |ξ| on the support
    pub band: f64,
    pub provenance: String,
}

/// ∫_{-1}^{1} e^{zy} dy and ∫_{-1}^{1} y e^{zy} dy.
fn box_moments(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 1e-3 {
        let z2 = z * z;
        let e0 = 2.0 * (1.0 + z2 / 6.0 + z2 * z2 / 120.0);
        let e1 = 2.0 * z * (1.0 / 3.0 + z2 / 30.0 + z2 * z2 / 840.0);
        (e0, e1)
    } else {
        let e0 = 2.0 * z.sinh() / z;
        let e1 = (2.0 * z.cosh() - e0) / z;
        (e0, e1)
    }
}

pub fn field_from_profile(profile: &SpectralProfile, t: f64) -> Result<PhysicalField> {
    let p = semigroup_apply(profile, t)?;
    let mut band: f64 = 0.0;
    let mut closed = true;
    for piece in &p.pieces {
        if !piece.lo.is_finite() || !piece.hi.is_finite() {
            return arg("profile support must be bounded");
        }
        let a = piece.anchor_f64();
        band = band.max((a + piece.lo).abs()).max((a + piece.hi).abs());
        closed &= matches!(piece.shape, Shape::Constant(_)) && piece.lo == -1.0 && piece.hi == 1.0 && a.abs() > 1.0;
    }
    let provenance = if closed {
        "closed form: indicator times exponential per piece".to_string()
    } else {
        "Gauss-Legendre per piece".to_string()
    };
    Ok(PhysicalField { profile: p, band, provenance })
}

impl PhysicalField {
    /// (f(x), f'(x)) as complex numbers; imaginary parts vanish for Hermitian profiles.
    pub fn eval_complex(&self, x: f64) -> (Complex64, Complex64) {
        let mut v = Complex64::new(0.0, 0.0);
        let mut d = Complex64::new(0.0, 0.0);
        for piece in &self.profile.pieces {
            if piece.underflow {
                continue;
            }
            let a = piece.anchor_f64();
            match piece.shape {
                Shape::Constant(w) if piece.lo == -1.0 && piece.hi == 1.0 && a.abs() > 1.0 => {
                    // ∫ w e^{-2πT|ξ|} e^{2πixξ} over [a-1, a+1], sgn ξ = sgn a
                    let z = Complex64::new(-2.0 * PI * piece.time * a.signum(), 2.0 * PI * x);
                    let (e0, e1) = box_moments(z);
                    let base = (z * a).exp() * w;
                    v += base * e0;
                    d += base * (e1 + a * e0) * Complex64::new(0.0, 2.0 * PI);
                }
                _ => {
                    let width = piece.hi - piece.lo;
                    let m = width.ceil().max(1.0) as usize;
                    let mut breaks = piece.breaks.clone();
                    for i in 1..m {
                        breaks.push(piece.lo + width * i as f64 / m as f64);
                    }
                    let nodes = 16 + (4.0 * x.abs()).ceil() as usize;
                    let rule = gl(nodes.min(64));
                    for w in cells(piece.lo, piece.hi, &breaks).windows(2) {
                        for (y, wt) in rule.mapped(w[0], w[1]) {
                            let xi = a + y;
                            let f = piece.value_local(y);
                            let e = Complex64::from_polar(1.0, 2.0 * PI * x * xi);
                            v += e * (wt * f);
                            d += e * Complex64::new(0.0, 2.0 * PI * xi * wt * f);
                        }
                    }
                }
            }
        }
        (v, d)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_complex(x).0.re
    }

    pub fn deriv(&self, x: f64) -> f64 {
        self.eval_complex(x).1.re
    }
}

/// α-quadrature for T_k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaSpec {
    /// symmetric truncation |α| ≤ cutoff
    pub cutoff: f64,
    /// step as a fraction of the Nyquist spacing 1/((2k+1)B)
    pub step_fraction: f64,
    /// relative tolerance on the truncation estimate
    pub tolerance: f64,
}

impl Default for AlphaSpec {
    fn default() -> Self {
        AlphaSpec { cutoff: 64.0, step_fraction: 0.9, tolerance: 1e-4 }
    }
}

/// T_k f(x) = (-1)^k/π pv∫ (∂_x δ_α f(x)/α) (δ_α f(x)/α)^{2k} dα.
pub fn tk_apply(field: &PhysicalField, k: usize, x: f64, spec: &AlphaSpec) -> Result<f64> {
    let (val, est, scale) = tk_estimate(field, k, x, spec)?;
    let bound = spec.tolerance * val.abs().max(scale);
    if est > bound {
        return Err(Error::Tolerance { estimate: est, bound, requested: spec.tolerance });
    }
    Ok(val)
}

/// Value, truncation estimate (cutoff vs half cutoff) and the largest
/// quadrature term, for callers that judge the error on a wider scale.
pub fn tk_estimate(field: &PhysicalField, k: usize, x: f64, spec: &AlphaSpec) -> Result<(f64, f64, f64)> {
    if k == 0 {
        return arg("order must be at least 1");
    }
    if !(spec.cutoff > 0.0 && spec.step_fraction > 0.0 && spec.step_fraction < 1.0) {
        return arg("alpha spec needs cutoff > 0 and 0 < step_fraction < 1");
    }
    if field.band == 0.0 {
        return Ok((0.0, 0.0, 0.0));
    }
    let h = spec.step_fraction / ((2 * k + 1) as f64 * field.band);
    let (f0, d0) = field.eval_complex(x);
    let (f0, d0) = (f0.re, d0.re);
    let m = (spec.cutoff / h).ceil() as usize;
    let term = |alpha: f64| -> f64 {
        let (f, d) = field.eval_complex(x - alpha);
        let q = (f0 - f.re) / alpha;
        let dq = (d0 - d.re) / alpha;
        dq * q.powi(2 * k as i32)
    };
    // pairs ±α_i accumulated from the outside in
    let mut half = Neumaier::default();
    let mut full = Neumaier::default();
    let mut scale = 0.0f64;
    for i in (0..m).rev() {
        let a = (i as f64 + 0.5) * h;
        let v = term(a) + term(-a);
        scale = scale.max(v.abs());
        full.add(v);
        if a <= 0.5 * spec.cutoff {
            half.add(v);
        }
    }
    let c = (if k % 2 == 0 { 1.0 } else { -1.0 }) / PI * h;
    let val = c * full.sum();
    Ok((val, (c * half.sum() - val).abs(), c.abs() * scale))
}

/// Budgets for the Duhamel oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSpec {
    pub alpha: AlphaSpec,
    /// sampling grid covers |y| ≤ half_width
    pub half_width: f64,
    /// extra band above (2k+1)B used for the sampling step
    pub band_margin: f64,
    pub time_nodes: usize,
}

impl Default for OracleSpec {
    fn default() -> Self {
        OracleSpec { alpha: AlphaSpec::default(), half_width: 40.0, band_margin: 2.0, time_nodes: 16 }
    }
}

/// Band-limited Poisson kernel: ∫_{-B}^{B} e^{-2πs|ξ|} e^{2πiyξ} dξ.
fn poisson_band(s: f64, b: f64, y: f64) -> f64 {
    let z = Complex64::new(-2.0 * PI * s, 2.0 * PI * y);
    if z.norm() * b < 1e-8 {
        return 2.0 * b;
    }
    2.0 * (((z * b).exp() - 1.0) / z).re
}

/// f_k(x, t) = ∫_0^t e^{-(t-τ)Λ} T_k(e^{-τΛ}φ)(x) dτ at each x.
pub fn duhamel_oracle(
    initial: &SpectralProfile,
    k: usize,
    t: f64,
    xs: &[f64],
    spec: &OracleSpec,
) -> Result<Vec<f64>> {
    if !(t >= 0.0 && t.is_finite()) {
        return arg("need 0 <= t < inf");
    }
    if t == 0.0 {
        return Ok(vec![0.0; xs.len()]);
    }
    if spec.time_nodes == 0 || !(spec.half_width > 0.0) || !(spec.band_margin > 0.0) {
        return arg("oracle spec needs time_nodes > 0, half_width > 0, band_margin > 0");
    }
    let band = field_from_profile(initial, 0.0)?.band;
    let grid_band = (2 * k + 1) as f64 * band + spec.band_margin;
    let hy = 0.5 / grid_band;
    let ny = (spec.half_width / hy).ceil() as i64;
    let ys: Vec<f64> = (-ny..=ny).map(|i| i as f64 * hy).collect();
    let mut acc = vec![Neumaier::default(); xs.len()];
    for (tau, wt) in gl(spec.time_nodes).mapped(0.0, t) {
        let u = field_from_profile(initial, tau)?;
        let rows: Vec<(f64, f64, f64)> = ys
            .par_iter()
            .map(|y| tk_estimate(&u, k, *y, &spec.alpha))
            .collect::<Result<Vec<_>>>()?;
        // truncation judged against the largest value on the grid
        let top = rows.iter().fold(0.0f64, |m, r| m.max(r.0.abs()).max(r.2));
        let est = rows.iter().fold(0.0f64, |m, r| m.max(r.1));
        let bound = spec.alpha.tolerance * top;
        if est > bound {
            return Err(Error::Tolerance { estimate: est, bound, requested: spec.alpha.tolerance });
        }
        let g: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let s = t - tau;
        for (xi, x) in xs.iter().enumerate() {
            let mut sum = Neumaier::default();
            for (y, gv) in ys.iter().zip(&g) {
                sum.add(gv * poisson_band(s, grid_band, x - y));
            }
            acc[xi].add(wt * hy * sum.sum());
        }
    }
    Ok(acc.iter().map(|a| a.sum()).collect())
}

/// Frequency-side f_k against the Duhamel oracle at sample points.
#[derive(Debug, Clone, Serialize)]
pub struct OracleComparison {
    pub k: usize,
    pub t: f64,
    pub xs: Vec<f64>,
    pub frequency: Vec<f64>,
    pub physical: Vec<f64>,
    /// max |a - b| / max |b|
    pub rel_diff: f64,
}

/// Compare f_k of the data Σ γ P_c at time t on the given samples.
pub fn compare_with_oracle(
    bumps: &[(BigInt, f64)],
    k: usize,
    t: f64,
    xs: &[f64],
    cfg: &IterateConfig,
    spec: &OracleSpec,
) -> Result<OracleComparison> {
    let comp = assemble_component(&bump_atoms(bumps), k, None, 0.0, t, cfg)?;
    let field = field_from_profile(&comp.total(), 0.0)?;
    let frequency: Vec<f64> = xs.iter().map(|x| field.eval(*x)).collect();
    let physical = duhamel_oracle(&symmetric_bumps(bumps), k, t, xs, spec)?;
    let diff = frequency.iter().zip(&physical).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let top = physical.iter().fold(0.0f64, |m, b| m.max(b.abs()));
    let rel_diff = if top == 0.0 { diff } else { diff / top };
    Ok(OracleComparison { k, t, xs: xs.to_vec(), frequency, physical, rel_diff })
}

/// n evenly spaced samples centred on 0 with spacing h.
pub fn sample_points(n: usize, h: f64) -> Vec<f64> {
    (0..n).map(|s| (s as f64 - (n as f64 - 1.0) / 2.0) * h).collect()
}
