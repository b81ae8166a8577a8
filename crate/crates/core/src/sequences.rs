//! The oscillating sequence family (k_j, γ_j), the initial data built from it,
//! interaction tuples, and the combinatorial sum lemmas as decision procedures.

use crate::besov::{besov_norm, symmetric_bump_norm, NormParams};
use crate::error::{arg, Error, Result};
use crate::gamma::{big_to_f64, QuadratureSpec};
use crate::quad::neumaier_sum;
use crate::spline::{symmetric_bumps, SpectralProfile};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

/// Largest admissible frequency, 2^200.
pub const MAGNITUDE_CAP_BITS: u64 = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceFamily {
    pub ell: usize,
    pub p: f64,
    pub q: f64,
    pub epsilon: f64,
    pub delta: f64,
    #[serde(rename = "M")]
    pub m: i64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(with = "big_str")]
    pub k0: BigInt,
    /// k_j for j = N..=last_index().
    #[serde(with = "big_vec_str")]
    pub k_seq: Vec<BigInt>,
    pub gamma_seq: Vec<f64>,
}

mod big_str {
    use num_bigint::BigInt;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};
    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

mod big_vec_str {
    use num_bigint::BigInt;
    use serde::{de::Error, ser::SerializeSeq, Deserialize, Deserializer, Serializer};
    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            seq.serialize_element(&x.to_string())?;
        }
        seq.end()
    }
    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|s| s.parse().map_err(D::Error::custom)).collect()
    }
}

/// ⌊(1+δ)N⌋
pub fn last_index(n: usize, delta: f64) -> usize {
    ((1.0 + delta) * n as f64 + 1e-9).floor() as usize
}

/// m = (2ℓ-1)/(2ℓ+1)
pub fn critical_index(ell: usize) -> f64 {
    (2 * ell - 1) as f64 / (2 * ell + 1) as f64
}

pub fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        big_to_f64(x).ln()
    } else {
        let shift = bits - 60;
        big_to_f64(&(x >> shift)).ln() + shift as f64 * std::f64::consts::LN_2
    }
}

/// Smallest power of two strictly greater than x (x ≥ 0).
fn next_pow2_above(x: &BigInt) -> BigInt {
    BigInt::one() << (x.bits() as usize)
}

impl SequenceFamily {
    pub fn last_index(&self) -> usize {
        last_index(self.n, self.delta)
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<usize> {
        self.n..=self.last_index()
    }

    pub fn k(&self, j: usize) -> &BigInt {
        &self.k_seq[j - self.n]
    }

    pub fn gamma(&self, j: usize) -> f64 {
        self.gamma_seq[j - self.n]
    }

    pub fn m_index(&self) -> f64 {
        critical_index(self.ell)
    }

    /// 2ℓk_j + M
    pub fn partner(&self, j: usize) -> BigInt {
        self.k(j) * BigInt::from(2 * self.ell) + BigInt::from(self.m)
    }

    pub fn norm_params(&self) -> NormParams {
        NormParams { s: self.m_index(), p: self.p, q: self.q }
    }

    /// Λ(k_j) in the fixed order +k, -k, +(2ℓk+M), -(2ℓk+M).
    pub fn lambda(&self, j: usize) -> [BigInt; 4] {
        let k = self.k(j).clone();
        let b = self.partner(j);
        [k.clone(), -k, b.clone(), -b]
    }
}

fn check_parameters(ell: usize, p: f64, q: f64, epsilon: f64, delta: f64, m: i64, n: usize) -> Result<()> {
    if ell == 0 {
        return arg("ell must be positive");
    }
    if !(p >= 1.0) {
        return arg("p must be >= 1");
    }
    let top = q / (2 * ell + 1) as f64 - 1.0;
    if !(epsilon > 0.0 && epsilon < top) {
        return arg(format!("epsilon must lie in (0, {top}) (q/(2l+1) - 1)"));
    }
    if m <= (2 * ell + 2) as i64 {
        return arg(format!("M must exceed 2l+2 = {}", 2 * ell + 2));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return arg("delta must be non-negative");
    }
    if n == 0 {
        return arg("N must be positive");
    }
    Ok(())
}

/// Left and right sides of growth condition (b).
pub fn condition_b_sides(ell: usize, q: f64, epsilon: f64, n: usize, delta: f64, k_n: &BigInt) -> (f64, f64) {
    let e = critical_index(ell) * (1.0 + epsilon) / q;
    let lhs = neumaier_sum((n..=last_index(n, delta)).map(|j| (j as f64).powf(-e)));
    let rhs = (ln_big(k_n) / (2 * ell + 1) as f64).exp() / n as f64;
    (lhs, rhs)
}

fn k_sequence(ell: usize, m: i64, k0: &BigInt, upto: usize) -> Vec<BigInt> {
    let mut ks = Vec::with_capacity(upto + 1);
    ks.push(k0.clone());
    let mult = BigInt::from(ell * ell + 1);
    for _ in 0..upto {
        let prev = ks.last().unwrap();
        let x = prev * &mult + BigInt::from(m);
        ks.push(next_pow2_above(&x));
    }
    ks
}

/// γ_j = j^{-(1+ε)/q} k_j^{-(2ℓ-1)/(2ℓ+1)}
pub fn gamma_value(ell: usize, q: f64, epsilon: f64, j: usize, k: &BigInt) -> f64 {
    (-(1.0 + epsilon) / q * (j as f64).ln() - critical_index(ell) * ln_big(k)).exp()
}

/// Deterministic construction of a family satisfying (a)–(d).
pub fn generate_family(
    ell: usize,
    p: f64,
    q: f64,
    epsilon: f64,
    delta: f64,
    m: i64,
    n: usize,
) -> Result<SequenceFamily> {
    check_parameters(ell, p, q, epsilon, delta, m, n)?;
    let last = last_index(n, delta);
    let floor = BigInt::from((2 * (2 * ell + 1)) as i64 * m).max(BigInt::from(64));
    let mut k0 = next_pow2_above(&floor);
    loop {
        let ks = k_sequence(ell, m, &k0, last);
        if ks[last].bits() > MAGNITUDE_CAP_BITS {
            return Err(Error::Capacity(format!(
                "k_{last} exceeds 2^{MAGNITUDE_CAP_BITS}; use a smaller N or delta"
            )));
        }
        let (lhs, rhs) = condition_b_sides(ell, q, epsilon, n, delta, &ks[n]);
        if lhs < rhs {
            let k_seq: Vec<BigInt> = ks[n..=last].to_vec();
            let gamma_seq = (n..=last).map(|j| gamma_value(ell, q, epsilon, j, &ks[j])).collect();
            let fam = SequenceFamily { ell, p, q, epsilon, delta, m, n, k0, k_seq, gamma_seq };
            let v = validate_family(&fam);
            if !v.all() {
                return Err(Error::Argument(format!("generated family failed validation: {v:?}")));
            }
            return Ok(fam);
        }
        k0 <<= 1usize;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub parameters: bool,
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub d: bool,
    /// rhs - lhs of condition (b).
    pub b_margin: f64,
}

impl Validation {
    pub fn all(&self) -> bool {
        self.parameters && self.a && self.b && self.c && self.d
    }
}

/// Standalone check of the parameter constraints and conditions (a)–(d).
pub fn validate_family(f: &SequenceFamily) -> Validation {
    let parameters = check_parameters(f.ell, f.p, f.q, f.epsilon, f.delta, f.m, f.n).is_ok()
        && f.k_seq.len() == f.last_index() + 1 - f.n
        && f.gamma_seq.len() == f.k_seq.len();
    if !parameters {
        return Validation { parameters, a: false, b: false, c: false, d: false, b_margin: f64::NAN };
    }
    let mult = if f.ell == 1 { BigInt::from(2) } else { BigInt::from(f.ell * f.ell) };
    let mm = BigInt::from(f.m);
    let a = f.k_seq.windows(2).all(|w| w[1] > &w[0] * &mult + &mm)
        && f.k_seq.iter().all(|k| k.is_positive());
    let (lhs, rhs) = condition_b_sides(f.ell, f.q, f.epsilon, f.n, f.delta, &f.k_seq[0]);
    let c = BigInt::from(2 * (2 * f.ell + 1) as i64 * f.m) < f.k0;
    let d = f.indices().all(|j| {
        let want = gamma_value(f.ell, f.q, f.epsilon, j, f.k(j));
        (f.gamma(j) - want).abs() <= 1e-12 * want
    });
    Validation { parameters, a, b: lhs < rhs, c, d, b_margin: rhs - lhs }
}

/// (center, weight) pairs of φ^(N): one per P-term.
pub fn initial_bumps(f: &SequenceFamily) -> Vec<(BigInt, f64)> {
    let mut v = Vec::new();
    for j in f.indices() {
        v.push((f.k(j).clone(), f.gamma(j)));
        v.push((f.partner(j), f.gamma(j)));
    }
    v
}

/// φ̂^(N) = Σ_j γ_j (P_{k_j} + P_{2ℓk_j+M}).
pub fn build_initial_data(f: &SequenceFamily) -> SpectralProfile {
    symmetric_bumps(&initial_bumps(f))
}

/// ‖φ^(N)‖_{Ḟ^{m,p}_q}: block-disjoint closed form when every dyadic block
/// meets at most one P-term, general block engine otherwise.
pub fn initial_data_norm(f: &SequenceFamily) -> Result<f64> {
    match symmetric_bump_norm(&initial_bumps(f), &f.norm_params()) {
        Ok(v) => Ok(v),
        Err(Error::Argument(_)) => besov_norm(&build_initial_data(f), &f.norm_params(), &QuadratureSpec::default()),
        Err(e) => Err(e),
    }
}

/// Whether every dyadic block meets at most one P-term.
pub fn blocks_disjoint(f: &SequenceFamily) -> bool {
    symmetric_bump_norm(&initial_bumps(f), &f.norm_params()).is_ok()
}

/// (Σ_j γ_j^q k_j^{mq})^{1/q} and the identity partner Σ j^{-(1+ε)}.
pub fn size_sums(f: &SequenceFamily) -> (f64, f64) {
    let m = f.m_index();
    let lhs = neumaier_sum(f.indices().map(|j| {
        (f.q * (f.gamma(j).ln() + m * ln_big(f.k(j)))).exp()
    }));
    let rhs = neumaier_sum(f.indices().map(|j| (j as f64).powf(-(1.0 + f.epsilon))));
    (lhs, rhs)
}

/// ‖φ^(N)‖ / (Σ γ_j^q k_j^{mq})^{1/q}.
pub fn norm_upper_bound_check(f: &SequenceFamily) -> Result<f64> {
    let norm = initial_data_norm(f)?;
    let (s, _) = size_sums(f);
    Ok(norm / s.powf(1.0 / f.q))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TupleMode {
    Diagonal,
    OffDiagonal,
    All,
}

/// One element of Λ(k_j): `kind` 0..4 in the order of `SequenceFamily::lambda`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub index: usize,
    pub kind: u8,
    pub value: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTuple {
    pub entries: Vec<BigInt>,
    pub indices: Vec<usize>,
    pub kinds: Vec<u8>,
    pub diagonal: bool,
    pub same_sign: bool,
    pub sum: BigInt,
}

impl FrequencyTuple {
    pub fn from_atoms(atoms: &[&Atom]) -> FrequencyTuple {
        let entries: Vec<BigInt> = atoms.iter().map(|a| a.value.clone()).collect();
        let indices: Vec<usize> = atoms.iter().map(|a| a.index).collect();
        let kinds = atoms.iter().map(|a| a.kind).collect();
        let diagonal = indices.iter().all(|i| *i == indices[0]);
        let same_sign = entries.iter().all(|c| c.is_positive()) || entries.iter().all(|c| c.is_negative());
        let sum = entries.iter().fold(BigInt::zero(), |s, c| s + c);
        FrequencyTuple { entries, indices, kinds, diagonal, same_sign, sum }
    }

    pub fn order(&self) -> usize {
        (self.entries.len() - 1) / 2
    }

    pub fn abs_sum(&self) -> BigInt {
        self.entries.iter().fold(BigInt::zero(), |s, c| s + c.abs())
    }
}

pub fn atoms(f: &SequenceFamily) -> Vec<Atom> {
    let mut v = Vec::new();
    for j in f.indices() {
        for (kind, value) in f.lambda(j).into_iter().enumerate() {
            v.push(Atom { index: j, kind: kind as u8, value });
        }
    }
    v
}

/// Lexicographic stream of ordered tuples of length 2k+1.
pub fn enumerate_tuples(
    f: &SequenceFamily,
    k: usize,
    mode: TupleMode,
) -> Result<impl Iterator<Item = FrequencyTuple>> {
    if k == 0 || k > f.ell {
        return arg("tuple order must satisfy 1 <= k <= ell");
    }
    let all = atoms(f);
    let n = 2 * k + 1;
    let groups: Vec<Vec<Atom>> = match mode {
        TupleMode::Diagonal => all.chunks(4).map(|c| c.to_vec()).collect(),
        _ => vec![all],
    };
    Ok(groups.into_iter().flat_map(move |g| {
        let len = g.len();
        let mut idx = vec![0usize; n];
        let mut done = len == 0;
        std::iter::from_fn(move || loop {
            if done {
                return None;
            }
            let t: Vec<&Atom> = idx.iter().map(|i| &g[*i]).collect();
            let tuple = FrequencyTuple::from_atoms(&t);
            // odometer, last position fastest
            let mut pos = n;
            loop {
                if pos == 0 {
                    done = true;
                    break;
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < len {
                    break;
                }
                idx[pos] = 0;
            }
            if mode == TupleMode::OffDiagonal && tuple.diagonal {
                continue;
            }
            return Some(tuple);
        })
    }))
}

/// Unordered tuples (nondecreasing atom positions) with their number of orderings.
pub fn enumerate_multisets(
    f: &SequenceFamily,
    k: usize,
    mode: TupleMode,
) -> Result<Vec<(FrequencyTuple, u64)>> {
    if k == 0 || k > f.ell {
        return arg("tuple order must satisfy 1 <= k <= ell");
    }
    let all = atoms(f);
    let n = 2 * k + 1;
    let groups: Vec<&[Atom]> = match mode {
        TupleMode::Diagonal => all.chunks(4).collect(),
        _ => vec![&all[..]],
    };
    let mut out = Vec::new();
    for g in groups {
        for_each_multiset(g.len(), n, |idx, mult| {
            let t: Vec<&Atom> = idx.iter().map(|i| &g[*i]).collect();
            let tuple = FrequencyTuple::from_atoms(&t);
            if !(mode == TupleMode::OffDiagonal && tuple.diagonal) {
                out.push((tuple, mult));
            }
        });
    }
    Ok(out)
}

/// Visit every nondecreasing index sequence of length `n` over `0..len`
/// together with its number of distinct orderings.
pub fn for_each_multiset(len: usize, n: usize, mut f: impl FnMut(&[usize], u64)) {
    if len == 0 || n == 0 {
        return;
    }
    let fact = |m: usize| -> u64 { (1..=m as u64).product() };
    let mut idx = vec![0usize; n];
    loop {
        let mut mult = fact(n);
        let mut run = 1;
        for w in 1..=n {
            if w < n && idx[w] == idx[w - 1] {
                run += 1;
            } else {
                mult /= fact(run);
                run = 1;
            }
        }
        f(&idx, mult);
        let mut pos = n;
        loop {
            if pos == 0 {
                return;
            }
            pos -= 1;
            if idx[pos] + 1 < len {
                let v = idx[pos] + 1;
                for p in idx.iter_mut().skip(pos) {
                    *p = v;
                }
                break;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl Verdict {
    fn from(applies: bool, holds: bool) -> Verdict {
        match (applies, holds) {
            (false, _) => Verdict::NotApplicable,
            (true, true) => Verdict::Pass,
            (true, false) => Verdict::Fail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumLemmaRecord {
    /// Σc = ±M.
    pub exceptional: bool,
    /// One entry ±(2ℓk_j+M), the rest ∓k_j, single index, k = ℓ.
    pub exceptional_shape: bool,
    /// Single index: Σc = ±M exactly for the exceptional shape.
    pub classification: Verdict,
    /// Single index, mixed signs, Σc ≠ ±M: |Σc| ≥ k_j/2.
    pub single_lower: Verdict,
    /// Single index, mixed signs: Σ|c| - |Σc| ≥ 2k_j.
    pub single_gap: Verdict,
    /// Several indices, Σc ≠ ±M: |Σc| ≥ k_i/4 for some index i in range.
    pub mixed_lower: Verdict,
    /// Several indices, mixed signs: Σ|c| - |Σc| ≥ 2k_i for some i in range.
    pub mixed_gap: Verdict,
    /// max{|Σc|, Σ|c| - |Σc|} ≥ max|c|/2.
    pub max_bound: Verdict,
    /// Mixed signs: |Σc| ≤ Σ|c| - 2|c_i| for some i.
    pub triangle: Verdict,
}

impl SumLemmaRecord {
    pub fn verdicts(&self) -> [(&'static str, Verdict); 7] {
        [
            ("classification", self.classification),
            ("single_lower", self.single_lower),
            ("single_gap", self.single_gap),
            ("mixed_lower", self.mixed_lower),
            ("mixed_gap", self.mixed_gap),
            ("max_bound", self.max_bound),
            ("triangle", self.triangle),
        ]
    }

    pub fn all_hold(&self) -> bool {
        self.verdicts().iter().all(|(_, v)| *v != Verdict::Fail)
    }
}

pub fn sum_lemma_check(f: &SequenceFamily, t: &FrequencyTuple) -> SumLemmaRecord {
    let mm = BigInt::from(f.m);
    let sum_abs = t.sum.abs();
    let abs_sum = t.abs_sum();
    let gap = &abs_sum - &sum_abs;
    let exceptional = sum_abs == mm;
    let k = t.order();
    let mixed_signs = !t.same_sign;

    let exceptional_shape = t.diagonal && k == f.ell && {
        let j = t.indices[0];
        let kj = f.k(j);
        let b = f.partner(j);
        let big: Vec<&BigInt> = t.entries.iter().filter(|c| c.abs() == b).collect();
        big.len() == 1 && t.entries.iter().filter(|c| c.abs() != b).all(|c| {
            // opposite sign to the big entry
            c.abs() == *kj && c.is_positive() != big[0].is_positive()
        })
    };

    let (classification, single_lower, single_gap) = if t.diagonal {
        let kj = f.k(t.indices[0]);
        (
            Verdict::from(true, exceptional == exceptional_shape),
            Verdict::from(mixed_signs && !exceptional, BigInt::from(2) * &sum_abs >= *kj),
            Verdict::from(mixed_signs, gap >= BigInt::from(2) * kj),
        )
    } else {
        (Verdict::NotApplicable, Verdict::NotApplicable, Verdict::NotApplicable)
    };

    // the smallest k in range is the most favourable witness
    let k_min = f.k(f.n);
    let (mixed_lower, mixed_gap) = if t.diagonal {
        (Verdict::NotApplicable, Verdict::NotApplicable)
    } else {
        (
            Verdict::from(!exceptional, BigInt::from(4) * &sum_abs >= *k_min),
            Verdict::from(mixed_signs, gap >= BigInt::from(2) * k_min),
        )
    };

    let max_c = t.entries.iter().map(|c| c.abs()).max().unwrap_or_default();
    let max_bound = Verdict::from(true, BigInt::from(2) * sum_abs.clone().max(gap.clone()) >= max_c);

    let min_c = t.entries.iter().map(|c| c.abs()).min().unwrap_or_default();
    let triangle = Verdict::from(mixed_signs, sum_abs <= &abs_sum - BigInt::from(2) * min_c);

    SumLemmaRecord {
        exceptional,
        exceptional_shape,
        classification,
        single_lower,
        single_gap,
        mixed_lower,
        mixed_gap,
        max_bound,
        triangle,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(n: usize) -> SequenceFamily {
        generate_family(1, 1.0, 4.0, 0.1, 1.0, 5, n).unwrap()
    }

    #[test]
    fn default_family_valid() {
        let f = fam(4);
        assert!(f.k0 >= BigInt::from(64));
        assert!(validate_family(&f).all());
        assert_eq!(f.k_seq.len(), 5);
    }

    #[test]
    fn boundary_rejections() {
        let top = 4.0 / 3.0 - 1.0;
        assert!(matches!(generate_family(1, 1.0, 4.0, top, 1.0, 5, 4), Err(Error::Argument(_))));
        assert!(matches!(generate_family(1, 1.0, 4.0, 0.1, 1.0, 4, 4), Err(Error::Argument(_))));
    }

    #[test]
    fn json_round_trip() {
        let f = fam(4);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"M\":5") && s.contains("\"k_seq\""));
        let g: SequenceFamily = serde_json::from_str(&s).unwrap();
        assert_eq!(f, g);
    }

    #[test]
    fn single_index_profile() {
        let f = generate_family(1, 1.0, 4.0, 0.1, 0.0, 5, 4).unwrap();
        let p = build_initial_data(&f);
        assert_eq!(p.pieces.len(), 4);
        assert!(p.is_structurally_even());
    }

    #[test]
    fn size_identity() {
        let f = fam(8);
        let (a, b) = size_sums(&f);
        assert!((a / b - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_counts() {
        let f = generate_family(1, 1.0, 4.0, 0.1, 0.0, 5, 4).unwrap();
        let all: Vec<_> = enumerate_tuples(&f, 1, TupleMode::Diagonal).unwrap().collect();
        assert_eq!(all.len(), 64);
        assert_eq!(all.iter().filter(|t| !t.same_sign).count(), 48);
        let mm = BigInt::from(5);
        assert_eq!(all.iter().filter(|t| t.sum.abs() == mm).count(), 6);
    }

    #[test]
    fn multisets_cover_tuples() {
        let f = generate_family(1, 1.0, 4.0, 0.1, 0.5, 5, 2).unwrap();
        for mode in [TupleMode::Diagonal, TupleMode::OffDiagonal, TupleMode::All] {
            let t = enumerate_tuples(&f, 1, mode).unwrap().count() as u64;
            let m: u64 = enumerate_multisets(&f, 1, mode).unwrap().iter().map(|x| x.1).sum();
            assert_eq!(t, m, "{mode:?}");
        }
    }

    #[test]
    fn lemma_examples() {
        let f = fam(4);
        let j = 4;
        let kj = f.k(j).clone();
        let atoms = atoms(&f);
        let find = |v: &BigInt| atoms.iter().find(|a| &a.value == v).unwrap();
        let t = FrequencyTuple::from_atoms(&[find(&-kj.clone()), find(&-kj.clone()), find(&f.partner(j))]);
        assert_eq!(t.sum, BigInt::from(5));
        let r = sum_lemma_check(&f, &t);
        assert!(r.exceptional && r.exceptional_shape && r.all_hold());
        let t = FrequencyTuple::from_atoms(&[find(&kj), find(&kj), find(&-kj.clone())]);
        let r = sum_lemma_check(&f, &t);
        assert_eq!(t.sum, kj);
        assert_eq!(r.single_lower, Verdict::Pass);
        assert_eq!(r.single_gap, Verdict::Pass);
    }
}
