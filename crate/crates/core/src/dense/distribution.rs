use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A finite probability distribution over outcome bitstrings.
///
/// Keys are `'0'`/`'1'` strings, one character per output record in the
/// order the outputs are declared (`+1 ↦ 0`, `-1 ↦ 1`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Distribution {
    probs: BTreeMap<String, f64>,
    /// Total probability of the postselection event before renormalization
    /// (1 when nothing is postselected).
    pub weight: f64,
    /// Probability mass dropped by branch pruning.
    pub pruned: f64,
}

impl Distribution {
    pub fn new() -> Self {
        Distribution { probs: BTreeMap::new(), weight: 1.0, pruned: 0.0 }
    }

    pub fn from_map(probs: BTreeMap<String, f64>) -> Self {
        Distribution { probs, weight: 1.0, pruned: 0.0 }
    }

    pub fn point(key: impl Into<String>) -> Self {
        let mut d = Distribution::new();
        d.add(key, 1.0);
        d
    }

    pub fn add(&mut self, key: impl Into<String>, p: f64) {
        *self.probs.entry(key.into()).or_insert(0.0) += p;
    }

    pub fn get(&self, key: &str) -> f64 {
        self.probs.get(key).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.probs.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.probs.values().sum()
    }

    /// Divides by the total mass, recording it as the weight.
    pub fn normalized(mut self) -> Result<Self> {
        let total = self.total();
        if total <= 1e-12 {
            return Err(Error::ProbabilityZero { record: "(all branches)".into() });
        }
        self.probs.values_mut().for_each(|p| *p /= total);
        self.weight *= total;
        Ok(self)
    }

    /// Keeps the characters at `positions` of every key.
    pub fn marginal(&self, positions: &[usize]) -> Distribution {
        let mut out = Distribution { probs: BTreeMap::new(), weight: self.weight, pruned: self.pruned };
        for (k, p) in self.iter() {
            let bytes = k.as_bytes();
            let key: String = positions.iter().map(|&i| bytes[i] as char).collect();
            out.add(key, p);
        }
        out
    }

    /// Removes entries with probability at most `eps`.
    pub fn prune(&mut self, eps: f64) {
        self.probs.retain(|_, p| *p > eps);
    }

    /// One line per outcome, `bits probability`, 15 significant digits.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (k, p) in self.iter() {
            let _ = writeln!(out, "{} {:.14e}", if k.is_empty() { "-" } else { k }, p);
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<Distribution> {
        let mut d = Distribution::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let bad = || Error::Syntax { line: i + 1, msg: format!("expected `bits probability`, found {line:?}") };
            let (k, p) = line.split_once(' ').ok_or_else(bad)?;
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let k = if k == "-" { "" } else { k };
            if !k.chars().all(|c| c == '0' || c == '1') {
                return Err(bad());
            }
            d.add(k, p);
        }
        Ok(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// `Σ_x |p(x) − q(x)|`.
    Additive,
    /// `max_x |p(x) − q(x)| / p(x)`.
    Multiplicative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceReport {
    pub metric: Metric,
    pub value: f64,
    /// Half the additive distance.
    pub tvd: f64,
    /// Multiplicative only: some `x` has `p(x) = 0 < q(x)`.
    pub unbounded: bool,
}

pub fn additive_distance(p: &Distribution, q: &Distribution) -> f64 {
    let keys: std::collections::BTreeSet<&str> = p.probs.keys().chain(q.probs.keys()).map(|s| s.as_str()).collect();
    keys.into_iter().map(|k| (p.get(k) - q.get(k)).abs()).sum()
}

pub fn tvd(p: &Distribution, q: &Distribution) -> f64 {
    additive_distance(p, q) / 2.0
}

/// Smallest `ε` with `|p(x) − q(x)| ≤ ε·p(x)` for all `x`; infinite when
/// `q` puts mass where `p` has none.
pub fn multiplicative_error(p: &Distribution, q: &Distribution) -> f64 {
    let keys: std::collections::BTreeSet<&str> = p.probs.keys().chain(q.probs.keys()).map(|s| s.as_str()).collect();
    let mut worst: f64 = 0.0;
    for k in keys {
        let (a, b) = (p.get(k), q.get(k));
        if a == 0.0 {
            if b > 0.0 {
                return f64::INFINITY;
            }
            continue;
        }
        worst = worst.max((a - b).abs() / a);
    }
    worst
}

pub fn distance(p: &Distribution, q: &Distribution, metric: Metric) -> DistanceReport {
    let t = tvd(p, q);
    match metric {
        Metric::Additive => DistanceReport { metric, value: 2.0 * t, tvd: t, unbounded: false },
        Metric::Multiplicative => {
            let v = multiplicative_error(p, q);
            DistanceReport { metric, value: v, tvd: t, unbounded: v.is_infinite() }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dist(pairs: &[(&str, f64)]) -> Distribution {
        let mut d = Distribution::new();
        for (k, p) in pairs {
            d.add(*k, *p);
        }
        d
    }

    #[test]
    fn distance_examples() {
        let p = dist(&[("0", 0.5), ("1", 0.5)]);
        assert_eq!(distance(&p, &p, Metric::Additive).value, 0.0);
        assert_eq!(distance(&p, &p, Metric::Multiplicative).value, 0.0);
        let q = dist(&[("0", 1.0)]);
        assert!((distance(&p, &q, Metric::Additive).value - 1.0).abs() < 1e-15);
        assert!(distance(&q, &p, Metric::Multiplicative).unbounded);
    }

    #[test]
    fn multiplicative_bounds_additive() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..500 {
            let k = rng.random_range(1..6);
            let raw: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
            let s: f64 = raw.iter().sum();
            let p: Vec<f64> = raw.iter().map(|x| x / s).collect();
            let raw_q: Vec<f64> = p.iter().map(|x| x * (1.0 + 0.2 * (rng.random::<f64>() - 0.5))).collect();
            let sq: f64 = raw_q.iter().sum();
            let mut dp = Distribution::new();
            let mut dq = Distribution::new();
            for i in 0..k {
                dp.add(format!("{i:03b}"), p[i]);
                dq.add(format!("{i:03b}"), raw_q[i] / sq);
            }
            let eps = multiplicative_error(&dp, &dq);
            assert!(additive_distance(&dp, &dq) <= eps + 1e-15);
        }
    }

    #[test]
    fn dump_round_trip() {
        let d = dist(&[("01", 0.25), ("10", 0.75)]);
        let text = d.dump();
        assert_eq!(text, "01 2.50000000000000e-1\n10 7.50000000000000e-1\n");
        assert_eq!(Distribution::parse_dump(&text).unwrap().probs, d.probs);
        let e = Distribution::point("");
        assert_eq!(Distribution::parse_dump(&e.dump()).unwrap().probs, e.probs);
    }

    #[test]
    fn marginals() {
        let d = dist(&[("01", 0.25), ("11", 0.25), ("10", 0.5)]);
        let m = d.marginal(&[1]);
        assert_eq!(m.get("1"), 0.5);
        assert_eq!(m.get("0"), 0.5);
    }
}
