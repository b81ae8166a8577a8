//! Homogeneous dyadic-block norms ‖f‖_{Ḟ^{s,p}_q} of frequency profiles.

use crate::error::{arg, Result};
use crate::gamma::{big_to_f64, QuadratureSpec};
use crate::quad::{cells, gl, Neumaier};
use crate::spline::{Piece, SpectralProfile};
use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub s: f64,
    pub p: f64,
    /// `f64::INFINITY` selects the sup over blocks.
    pub q: f64,
}

impl NormParams {
    pub fn new(s: f64, p: f64, q: f64) -> Result<Self> {
        let n = NormParams { s, p, q };
        n.validate()?;
        Ok(n)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) || !self.p.is_finite() {
            return arg("p must be a finite number >= 1");
        }
        if !(self.q >= 1.0) {
            return arg("q must be >= 1");
        }
        if !self.s.is_finite() {
            return arg("s must be finite");
        }
        Ok(())
    }
}

/// Per-block integrals ∫_{C_b} |ξ|^{sp}|f̂|^p, keyed by block index b.
pub type BlockMasses = BTreeMap<i64, f64>;

/// ℓ^q aggregation of block masses, descending order, compensated.
pub fn aggregate(masses: &BlockMasses, params: &NormParams) -> f64 {
    let mut vals: Vec<f64> = masses
        .values()
        .filter(|m| **m > 0.0)
        .map(|m| m.powf(1.0 / params.p))
        .collect();
    if vals.is_empty() {
        return 0.0;
    }
    vals.sort_by(|a, b| b.total_cmp(a));
    let top = vals[0];
    if params.q.is_infinite() {
        return top;
    }
    let mut s = Neumaier::default();
    for v in &vals {
        s.add((v / top).powf(params.q));
    }
    top * s.sum().powf(1.0 / params.q)
}

/// floor(log2 |x|) for x ≠ 0.
fn ilog2(x: &BigInt) -> i64 {
    x.bits() as i64 - 1
}

/// Cluster of overlapping pieces sharing the local frame of `anchor`.
struct Cluster<'a> {
    anchor: BigInt,
    members: Vec<(&'a Piece, f64)>,
    lo: f64,
    hi: f64,
}

fn clusters(profile: &SpectralProfile) -> Vec<Cluster<'_>> {
    let mut live: Vec<&Piece> = profile.pieces.iter().filter(|p| !p.underflow && p.hi > p.lo).collect();
    live.sort_by(|a, b| a.anchor.cmp(&b.anchor).then(a.lo.total_cmp(&b.lo)));
    let mut out: Vec<Cluster> = Vec::new();
    for p in live {
        if let Some(c) = out.last_mut() {
            let d = big_to_f64(&(&p.anchor - &c.anchor));
            if d.abs() < 1e9 && d + p.lo <= c.hi {
                c.hi = c.hi.max(d + p.hi);
                c.members.push((p, d));
                continue;
            }
        }
        out.push(Cluster { anchor: p.anchor.clone(), members: vec![(p, 0.0)], lo: p.lo, hi: p.hi });
    }
    out
}

/// Block masses of a profile by Gauss-Legendre on cells cut at every piece
/// breakpoint and dyadic boundary.
pub fn block_masses(
    profile: &SpectralProfile,
    params: &NormParams,
    quad: &QuadratureSpec,
) -> Result<BlockMasses> {
    params.validate()?;
    let mut acc: BTreeMap<i64, Neumaier> = BTreeMap::new();
    let n = quad.nodes_per_unit.max(2);
    let rule = gl(n);
    for c in clusters(profile) {
        for (p, _) in &c.members {
            if !p.lo.is_finite() || !p.hi.is_finite() {
                return arg("profile support must be bounded");
            }
        }
        let a0 = big_to_f64(&c.anchor);
        // exact test for ξ = 0 inside the cluster
        let lo_int = &c.anchor + BigInt::from(c.lo.floor() as i64);
        let hi_int = &c.anchor + BigInt::from(c.hi.ceil() as i64);
        if lo_int.sign() != Sign::Plus && hi_int.sign() != Sign::Minus {
            let neg = -&c.anchor;
            let z = big_to_f64(&neg);
            if z >= c.lo && z <= c.hi {
                return arg("profile support must be bounded away from 0");
            }
        }
        let positive = c.anchor.sign() == Sign::Plus;
        // dyadic boundaries inside the cluster: ±2^b - anchor
        let end_a = if positive { &c.anchor + BigInt::from(c.lo.floor() as i64 - 1) } else { -&c.anchor - BigInt::from(c.hi.ceil() as i64 + 1) };
        let end_b = if positive { &c.anchor + BigInt::from(c.hi.ceil() as i64 + 1) } else { -&c.anchor - BigInt::from(c.lo.floor() as i64 - 1) };
        let b_lo = ilog2(&end_a.abs().max(BigInt::one())) - 1;
        let b_hi = ilog2(&end_b.abs().max(BigInt::one())) + 1;
        let mut breaks = Vec::new();
        let mut boundary_list = Vec::new();
        for b in b_lo.max(0)..=b_hi {
            let pw = BigInt::one() << (b as usize);
            let x = if positive { &pw - &c.anchor } else { -&pw - &c.anchor };
            let xf = big_to_f64(&x);
            if xf > c.lo && xf < c.hi {
                breaks.push(xf);
                boundary_list.push((xf, b));
            }
        }
        for (p, d) in &c.members {
            breaks.push(d + p.lo);
            breaks.push(d + p.hi);
            for b in &p.breaks {
                breaks.push(d + b);
            }
        }
        // unit-width cells at most
        let width = c.hi - c.lo;
        let m = width.ceil() as usize;
        for i in 1..m {
            breaks.push(c.lo + width * i as f64 / m as f64);
        }
        let edges = cells(c.lo, c.hi, &breaks);
        // block of the left end; incremented as boundaries are crossed
        let block_of = |mid: f64| -> i64 {
            let xi = a0 + mid;
            let mut b = xi.abs().log2().floor() as i64;
            // correct with the exact boundaries
            for (xb, bb) in &boundary_list {
                if positive {
                    if mid >= *xb {
                        b = b.max(*bb);
                    } else {
                        b = b.min(bb - 1);
                    }
                } else if mid <= *xb {
                    b = b.max(*bb);
                } else {
                    b = b.min(bb - 1);
                }
            }
            b
        };
        for w in edges.windows(2) {
            let (x0, x1) = (w[0], w[1]);
            if x1 <= x0 {
                continue;
            }
            let b = block_of(0.5 * (x0 + x1));
            let mut cell = Neumaier::default();
            for (x, wt) in rule.mapped(x0, x1) {
                let mut f = Neumaier::default();
                for (p, d) in &c.members {
                    f.add(p.value_local(x - d));
                }
                let f = f.sum().abs();
                if f == 0.0 {
                    continue;
                }
                let xi = (a0 + x).abs();
                let v = (params.p * (params.s * xi.ln() + f.ln())).exp();
                cell.add(wt * v);
            }
            acc.entry(b).or_default().add(cell.sum());
        }
    }
    Ok(acc.into_iter().map(|(b, s)| (b, s.sum())).collect())
}

/// ‖f‖_{Ḟ^{s,p}_q}; empty profiles give 0.
pub fn besov_norm(profile: &SpectralProfile, params: &NormParams, quad: &QuadratureSpec) -> Result<f64> {
    let m = block_masses(profile, params, quad)?;
    Ok(aggregate(&m, params))
}

/// ∫ x^{sp} dx over [c + l, c + h], c > 0 possibly huge and l, h small.
fn power_integral(c: f64, l: f64, h: f64, sp: f64) -> f64 {
    let e = sp + 1.0;
    let mid = c + 0.5 * (l + h);
    let r = 0.5 * (h - l) / mid;
    if e == 0.0 {
        return ((1.0 + r) / (1.0 - r)).ln();
    }
    // mid^e ((1+r)^e - (1-r)^e)/e
    let up = (e * r.ln_1p()).exp_m1();
    let dn = (e * (-r).ln_1p()).exp_m1();
    (e * mid.ln()).exp() * (up - dn) / e
}

/// Norm of Σ w (χ_c + χ_{-c}) in closed form, valid when no dyadic block
/// meets two different bump pairs (checked first; returns an error otherwise).
pub fn symmetric_bump_norm(bumps: &[(BigInt, f64)], params: &NormParams) -> Result<f64> {
    params.validate()?;
    let mut owner: BTreeMap<i64, usize> = BTreeMap::new();
    let mut masses: BTreeMap<i64, Neumaier> = BTreeMap::new();
    for (id, (c, w)) in bumps.iter().enumerate() {
        let c = c.abs();
        if c <= BigInt::one() {
            return arg("bumps must stay away from 0");
        }
        let lo = &c - 1u32;
        let hi = &c + 1u32;
        let b0 = ilog2(&lo);
        let b1 = ilog2(&c);
        let _ = hi;
        for b in b0..=b1 {
            // overlap of [c-1, c+1] with [2^b, 2^{b+1}) in the local frame of c
            let pw = BigInt::one() << (b as usize);
            let l = big_to_f64(&(&pw - &c)).max(-1.0);
            let h = big_to_f64(&((&pw << 1usize) - &c)).min(1.0);
            if h <= l {
                continue;
            }
            if let Some(prev) = owner.insert(b, id) {
                if prev != id {
                    return arg(format!("block {b} meets two bump pairs"));
                }
            }
            let cf = big_to_f64(&c);
            let m = power_integral(cf, l, h, params.s * params.p) * w.abs().powf(params.p);
            // both signs land in the same block
            masses.entry(b).or_default().add(2.0 * m);
        }
    }
    let m: BlockMasses = masses.into_iter().map(|(b, s)| (b, s.sum())).collect();
    Ok(aggregate(&m, params))
}
