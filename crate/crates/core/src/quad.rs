//! Gauss-Legendre rules and compensated summation.

use gauss_quad::GaussLegendre;
use std::sync::{Mutex, OnceLock};

/// Nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    /// Integrate `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(m + h * x);
        }
        s * h
    }

    /// Mapped (node, weight) pairs for `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (m + h * x, w * h))
    }
}

static CACHE: OnceLock<Mutex<Vec<Option<&'static Rule>>>> = OnceLock::new();

/// Cached `n`-point rule (n >= 1).
pub fn gl(n: usize) -> &'static Rule {
    assert!(n >= 1, "rule needs at least one node");
    let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
    let mut c = cache.lock().unwrap();
    if c.len() <= n {
        c.resize(n + 1, None);
    }
    if let Some(r) = c[n] {
        return r;
    }
    let rule = if n == 1 {
        Rule { nodes: vec![0.0], weights: vec![2.0] }
    } else {
        let g = GaussLegendre::new(n).expect("degree >= 2");
        let mut pairs: Vec<(f64, f64)> = g.as_node_weight_pairs().to_vec();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        Rule {
            nodes: pairs.iter().map(|p| p.0).collect(),
            weights: pairs.iter().map(|p| p.1).collect(),
        }
    };
    let leaked: &'static Rule = Box::leak(Box::new(rule));
    c[n] = Some(leaked);
    leaked
}

/// Integrate over `[a, b]` split at every breakpoint that falls strictly inside.
pub fn integrate_split(
    a: f64,
    b: f64,
    breaks: &[f64],
    n: usize,
    mut f: impl FnMut(f64) -> f64,
) -> f64 {
    let cuts = cells(a, b, breaks);
    let r = gl(n);
    let mut s = Neumaier::default();
    for w in cuts.windows(2) {
        s.add(r.integrate(w[0], w[1], &mut f));
    }
    s.sum()
}

/// Sorted cell boundaries of `[a, b]` refined by `breaks`; near-duplicates merged.
pub fn cells(a: f64, b: f64, breaks: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(breaks.len() + 2);
    v.push(a);
    let tol = 1e-12 * (1.0 + (b - a).abs());
    for &x in breaks {
        if x > a + tol && x < b - tol {
            v.push(x);
        }
    }
    v.push(b);
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v.dedup_by(|x, y| (*x - *y).abs() <= tol);
    if v.len() == 1 {
        v.push(b);
    }
    v
}

/// Neumaier compensated sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct Neumaier {
    s: f64,
    c: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.s + x;
        if self.s.abs() >= x.abs() {
            self.c += (self.s - t) + x;
        } else {
            self.c += (x - t) + self.s;
        }
        self.s = t;
    }
    pub fn sum(&self) -> f64 {
        self.s + self.c
    }
}

pub fn neumaier_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut n = Neumaier::default();
    for x in xs {
        n.add(x);
    }
    n.sum()
}
