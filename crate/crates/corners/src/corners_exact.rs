//! Exact finite-size model: state space, weights, partition function,
//! marginals, exact expectations, and the finite-size Nekrasov degree-1
//! identity. This is the brute-force oracle everything else is checked
//! against, so it favors clarity over speed.

use crate::error::{Error, Result};
use crate::jack::{ascending_weight, Partition};
use crate::numerics::{degree_at_most, log_gamma, ComplexScalar};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Parameters (theta, K, N) of the measure.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ModelParams {
    pub theta: f64,
    /// Box width K: parts lie in [0, K].
    pub k_cap: u32,
    /// Number of levels N; level j carries j particles.
    pub n_levels: u32,
}

impl ModelParams {
    pub fn new(theta: f64, k_cap: u32, n_levels: u32) -> Result<Self> {
        if !(theta > 0.0 && theta.is_finite()) {
            return Err(Error::Invalid(format!("theta = {theta}")));
        }
        if n_levels == 0 {
            return Err(Error::Invalid("n_levels = 0".into()));
        }
        Ok(ModelParams { theta, k_cap, n_levels })
    }
}

/// One level: weakly decreasing parts in [0, K]. Particle positions are the
/// shifted values l_i = lambda_i - i*theta (1-based i).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LevelConfig {
    pub lambda: Vec<u32>,
}

impl LevelConfig {
    pub fn new(lambda: Vec<u32>, k_cap: u32) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::Invalid("empty level".into()));
        }
        if lambda.windows(2).any(|w| w[0] < w[1]) || lambda[0] > k_cap {
            return Err(Error::Invalid(format!("level not in state space: {lambda:?}")));
        }
        Ok(LevelConfig { lambda })
    }

    pub fn n(&self) -> usize {
        self.lambda.len()
    }

    /// Shifted positions l_i = lambda_i - i*theta.
    pub fn positions(&self, theta: f64) -> Vec<f64> {
        self.lambda
            .iter()
            .enumerate()
            .map(|(i, &v)| v as f64 - (i as f64 + 1.0) * theta)
            .collect()
    }
}

/// A point of the full state space: level j has j particles and consecutive
/// levels interlace.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CornersConfig {
    pub levels: Vec<Vec<u32>>,
}

/// lambda^{upper} >= lambda^{lower} >= shifted lambda^{upper}, where upper
/// has exactly one more entry.
pub fn interlaces(upper: &[u32], lower: &[u32]) -> bool {
    upper.len() == lower.len() + 1
        && (0..lower.len()).all(|i| upper[i] >= lower[i] && lower[i] >= upper[i + 1])
}

impl CornersConfig {
    pub fn new(levels: Vec<Vec<u32>>, k_cap: u32) -> Result<Self> {
        for (j, lv) in levels.iter().enumerate() {
            if lv.len() != j + 1 {
                return Err(Error::Invalid(format!("level {} has {} entries", j + 1, lv.len())));
            }
            if lv.windows(2).any(|w| w[0] < w[1]) || lv[0] > k_cap {
                return Err(Error::Invalid(format!("level {} not in state space", j + 1)));
            }
            if j > 0 && !interlaces(lv, &levels[j - 1]) {
                return Err(Error::Invalid(format!("levels {} and {} do not interlace", j, j + 1)));
            }
        }
        Ok(CornersConfig { levels })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> Result<&[u32]> {
        self.levels
            .get(n.wrapping_sub(1))
            .map(|v| v.as_slice())
            .ok_or(Error::LevelOutOfRange { level: n, max: self.levels.len() })
    }

    pub fn is_valid(&self, k_cap: u32) -> bool {
        CornersConfig::new(self.levels.clone(), k_cap).is_ok()
    }

    /// The level sequence as partitions (trailing zeros trimmed).
    pub fn partitions(&self) -> Vec<Partition> {
        self.levels
            .iter()
            .map(|lv| Partition::new(lv.clone()).expect("levels are weakly decreasing"))
            .collect()
    }
}

/// Guard on enumeration sizes.
pub const DEFAULT_ENUM_GUARD: usize = 1_000_000;

fn binomial(n: u64, k: u64) -> Option<u64> {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// All levels of n weakly decreasing parts in [0, K], lexicographically.
pub fn enumerate_levels(k_cap: u32, n: usize, guard: usize) -> Result<Vec<LevelConfig>> {
    let count = binomial((k_cap as u64) + n as u64, n as u64)
        .filter(|&c| c <= guard as u64)
        .ok_or_else(|| {
            Error::Budget(format!("|Lambda^{k_cap}_{n}| exceeds enumeration guard {guard}"))
        })?;
    let mut out = Vec::with_capacity(count as usize);
    let mut cur = vec![0u32; n];
    fn rec(i: usize, hi: u32, cur: &mut Vec<u32>, out: &mut Vec<LevelConfig>) {
        if i == cur.len() {
            out.push(LevelConfig { lambda: cur.clone() });
            return;
        }
        // descending to get lexicographic order on the vector as written
        let mut v = hi;
        loop {
            cur[i] = v;
            rec(i + 1, v, cur, out);
            if v == 0 {
                break;
            }
            v -= 1;
        }
    }
    rec(0, k_cap, &mut cur, &mut out);
    out.sort_by(|a, b| a.lambda.cmp(&b.lambda));
    debug_assert_eq!(out.len(), count as usize);
    Ok(out)
}

/// All interlacing arrays with N levels, depth-first over levels.
pub fn enumerate_corners(k_cap: u32, n_levels: usize, guard: usize) -> Result<Vec<CornersConfig>> {
    let mut out: Vec<Vec<Vec<u32>>> = vec![Vec::new()];
    for level in 1..=n_levels {
        let mut next = Vec::new();
        for stack in &out {
            let prev = stack.last();
            let mut cur = vec![0u32; level];
            extend_level(0, k_cap, prev.map(|v| v.as_slice()), &mut cur, &mut |lv| {
                let mut s = stack.clone();
                s.push(lv.to_vec());
                next.push(s);
            });
        }
        if next.len() > guard {
            return Err(Error::Budget(format!(
                "corners enumeration exceeds guard {guard} at level {level}"
            )));
        }
        out = next;
    }
    Ok(out.into_iter().map(|levels| CornersConfig { levels }).collect())
}

/// Enumerates all upper levels interlacing `prev` (entry i in
/// [max(prev_i, upper_{i+1}), min(prev_{i-1}, K)]), invoking the callback.
fn extend_level(i: usize, k_cap: u32, prev: Option<&[u32]>, cur: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
    if i == cur.len() {
        f(cur);
        return;
    }
    let hi = match (i, prev) {
        (0, _) => k_cap,
        (_, Some(p)) => p[i - 1].min(cur[i - 1]),
        (_, None) => cur[i - 1],
    };
    let lo = match prev {
        Some(p) if i < p.len() => p[i],
        _ => 0,
    };
    let mut v = hi;
    while v >= lo {
        cur[i] = v;
        extend_level(i + 1, k_cap, prev, cur, f);
        if v == 0 {
            break;
        }
        v -= 1;
    }
}

/// Log of the interlacing kernel I(l^{j+1}, l^j): four Gamma-ratio products
/// over particle pairs; equals the single-variable skew Jack function of the
/// pair. Every Gamma argument is strictly positive on interlacing input.
#[allow(clippy::needless_range_loop)] // index loops mirror the pair products
pub fn log_weight_i(upper: &LevelConfig, lower: &LevelConfig, theta: f64) -> f64 {
    assert_eq!(upper.n(), lower.n() + 1, "levels must be consecutive");
    assert!(interlaces(&upper.lambda, &lower.lambda), "interlacing required");
    let lu = upper.positions(theta);
    let ll = lower.positions(theta);
    let (ju, jl) = (lu.len(), ll.len());
    let lg = |x: f64| {
        assert!(x > 0.0, "Gamma argument {x} <= 0 on state space");
        log_gamma(x)
    };
    let mut acc = 0.0;
    for p in 0..ju {
        for q in (p + 1)..ju {
            let d = lu[p] - lu[q];
            acc += lg(d + 1.0 - theta) - lg(d);
        }
    }
    for p in 0..jl {
        for q in p..jl {
            let d = ll[p] - ll[q];
            acc += lg(d + 1.0) - lg(d + theta);
        }
    }
    for p in 0..jl {
        for q in (p + 1)..ju {
            let d = ll[p] - lu[q];
            acc += lg(d) - lg(d + 1.0 - theta);
        }
    }
    for p in 0..jl {
        for q in p..jl {
            let d = lu[p] - ll[q];
            acc += lg(d + theta) - lg(d + 1.0);
        }
    }
    acc
}

/// Log of the one-body weight w^{theta,K}_n(x) = 1/(Gamma(x+n theta+1) Gamma(K-x+1-theta)).
fn log_w(x: f64, n: usize, theta: f64, k_cap: u32) -> f64 {
    let a = x + n as f64 * theta + 1.0;
    let b = k_cap as f64 - x + 1.0 - theta;
    assert!(a > 0.0 && b > 0.0, "weight Gamma argument <= 0 on state space");
    -log_gamma(a) - log_gamma(b)
}

/// Log of the top-level factor H^t_N: the level constant prod_i Gamma(i theta)/Gamma(theta),
/// the pairwise Gamma(d+1)/Gamma(d+1-theta) product, and the one-body weights.
pub fn log_weight_ht(top: &LevelConfig, theta: f64, k_cap: u32) -> f64 {
    let l = top.positions(theta);
    let n = l.len();
    let mut acc: f64 = (1..=n)
        .map(|i| log_gamma(i as f64 * theta) - log_gamma(theta))
        .sum();
    for p in 0..n {
        for q in (p + 1)..n {
            let d = l[p] - l[q];
            assert!(d > 0.0 && d + 1.0 - theta > 0.0);
            acc += log_gamma(d + 1.0) - log_gamma(d + 1.0 - theta);
        }
    }
    for &x in &l {
        acc += log_w(x, n, theta, k_cap);
    }
    acc
}

/// Log of the bottom-level factor H^b_n = prod_{i<j} Gamma(d+theta)/Gamma(d).
pub fn log_weight_hb(level: &LevelConfig, theta: f64) -> f64 {
    let l = level.positions(theta);
    let n = l.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = l[i] - l[j];
            assert!(d > 0.0);
            acc += log_gamma(d + theta) - log_gamma(d);
        }
    }
    acc
}

/// Log of the unnormalized measure weight of a full interlacing array.
pub fn log_weight_corners(c: &CornersConfig, theta: f64, k_cap: u32) -> f64 {
    assert!(c.is_valid(k_cap), "config violates state-space invariants");
    let top = LevelConfig { lambda: c.levels.last().unwrap().clone() };
    let mut acc = log_weight_ht(&top, theta, k_cap);
    for j in 0..c.levels.len() - 1 {
        acc += log_weight_i(
            &LevelConfig { lambda: c.levels[j + 1].clone() },
            &LevelConfig { lambda: c.levels[j].clone() },
            theta,
        );
    }
    acc
}

/// Closed form of log Z(theta, K, N).
pub fn log_partition_function(theta: f64, k_cap: u32, n_levels: u32) -> f64 {
    let (k, n) = (k_cap as f64, n_levels as f64);
    let mut acc = n * k * 2.0f64.ln();
    for i in 1..=n_levels {
        acc += log_gamma(i as f64 * theta) - log_gamma(theta)
            - log_gamma(k + theta * (i as f64 - 1.0) + 1.0);
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZMode {
    Brute,
    Closed,
}

/// Partition function, by brute-force summation or by the closed form.
pub fn partition_function(theta: f64, k_cap: u32, n_levels: u32, mode: ZMode) -> Result<f64> {
    match mode {
        ZMode::Closed => Ok(log_partition_function(theta, k_cap, n_levels).exp()),
        ZMode::Brute => {
            let configs = enumerate_corners(k_cap, n_levels as usize, DEFAULT_ENUM_GUARD)?;
            let lws: Vec<f64> = configs
                .iter()
                .map(|c| log_weight_corners(c, theta, k_cap))
                .collect();
            let m = lws.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            Ok((m + lws.iter().map(|w| (w - m).exp()).sum::<f64>().ln()).exp())
        }
    }
}

/// Single-level marginal, computed two ways: (a) by projecting the full
/// measure, (b) by the closed single-level law normalized by Z(theta, K, n).
/// `direct_gap` is the largest absolute disagreement between the two.
#[derive(Debug, Clone)]
pub struct LevelMarginal {
    pub probs: BTreeMap<Vec<u32>, f64>,
    pub direct_gap: f64,
}

/// Log of the unnormalized single-level law (discrete beta-ensemble form).
pub fn log_marginal_direct(level: &LevelConfig, theta: f64, k_cap: u32) -> f64 {
    let l = level.positions(theta);
    let n = l.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let d = l[i] - l[j];
            acc += log_gamma(d + 1.0) + log_gamma(d + theta)
                - log_gamma(d + 1.0 - theta)
                - log_gamma(d);
        }
    }
    for &x in &l {
        acc += log_w(x, n, theta, k_cap);
    }
    acc
}

/// Marginal law of level `n` under the N-level measure.
pub fn marginal_level(theta: f64, k_cap: u32, n_levels: u32, n: usize) -> Result<LevelMarginal> {
    if n == 0 || n > n_levels as usize {
        return Err(Error::LevelOutOfRange { level: n, max: n_levels as usize });
    }
    let log_zn = log_partition_function(theta, k_cap, n_levels);
    let mut probs: BTreeMap<Vec<u32>, f64> = BTreeMap::new();
    for c in enumerate_corners(k_cap, n_levels as usize, DEFAULT_ENUM_GUARD)? {
        let p = (log_weight_corners(&c, theta, k_cap) - log_zn).exp();
        *probs.entry(c.levels[n - 1].clone()).or_insert(0.0) += p;
    }
    let log_z_level = log_partition_function(theta, k_cap, n as u32);
    let mut direct_gap = 0.0f64;
    for (lambda, &p) in &probs {
        let lv = LevelConfig { lambda: lambda.clone() };
        let pd = (log_marginal_direct(&lv, theta, k_cap) - log_z_level).exp();
        direct_gap = direct_gap.max((p - pd).abs());
    }
    Ok(LevelMarginal { probs, direct_gap })
}

/// Exact expectation of an observable over the enumerated support.
pub fn exact_expectation<F: Fn(&CornersConfig) -> ComplexScalar>(
    g: F,
    theta: f64,
    k_cap: u32,
    n_levels: u32,
) -> Result<ComplexScalar> {
    let log_z = log_partition_function(theta, k_cap, n_levels);
    let mut acc = Complex64::new(0.0, 0.0);
    for c in enumerate_corners(k_cap, n_levels as usize, DEFAULT_ENUM_GUARD)? {
        acc += g(&c) * (log_weight_corners(&c, theta, k_cap) - log_z).exp();
    }
    Ok(acc)
}

/// Finite-size Nekrasov check: evaluates
/// R(z) = Phi^-(zn) E[prod (zn - l_i - theta)/(zn - l_i)]
///      + Phi^+(zn) E[prod (zn - l_i + theta - 1)/(zn - l_i - 1)]
/// with Phi^-(u) = u + n theta, Phi^+(u) = K + 1 - theta - u, at four
/// equispaced points, and returns the maximal second finite difference
/// (zero for a degree-1 polynomial).
pub fn nekrasov_check(theta: f64, k_cap: u32, n: usize, z_points: [f64; 4]) -> Result<f64> {
    let h = z_points[1] - z_points[0];
    if h <= 0.0
        || (z_points[2] - z_points[1] - h).abs() > 1e-12
        || (z_points[3] - z_points[2] - h).abs() > 1e-12
    {
        return Err(Error::Invalid("z points must be equispaced increasing".into()));
    }
    let levels = enumerate_levels(k_cap, n, DEFAULT_ENUM_GUARD)?;
    let log_z = log_partition_function(theta, k_cap, n as u32);
    let weighted: Vec<(Vec<f64>, f64)> = levels
        .iter()
        .map(|lv| {
            (lv.positions(theta), (log_marginal_direct(lv, theta, k_cap) - log_z).exp())
        })
        .collect();
    let mut vals = Vec::with_capacity(4);
    for &z in &z_points {
        let u = z * n as f64;
        let (mut e1, mut e2) = (0.0, 0.0);
        for (pos, p) in &weighted {
            let (mut f1, mut f2) = (1.0, 1.0);
            for &li in pos {
                if (u - li).abs() < 1e-9 || (u - li - 1.0).abs() < 1e-9 {
                    return Err(Error::Pole(format!("z*n = {u} hits the particle lattice")));
                }
                f1 *= (u - li - theta) / (u - li);
                f2 *= (u - li + theta - 1.0) / (u - li - 1.0);
            }
            e1 += p * f1;
            e2 += p * f2;
        }
        let r = (u + n as f64 * theta) * e1 + (k_cap as f64 + 1.0 - theta - u) * e2;
        vals.push(Complex64::new(r, 0.0));
    }
    Ok(degree_at_most(&vals, 1, f64::INFINITY)?.residual)
}

/// Largest relative gap between the ascending-Jack weight and the normalized
/// corners weight over the whole support.
pub fn jack_crosscheck(theta: f64, k_cap: u32, n_levels: u32) -> Result<f64> {
    let log_z = log_partition_function(theta, k_cap, n_levels);
    let mut worst = 0.0f64;
    for c in enumerate_corners(k_cap, n_levels as usize, DEFAULT_ENUM_GUARD)? {
        let p_corners = (log_weight_corners(&c, theta, k_cap) - log_z).exp();
        let p_jack = ascending_weight(&c.partitions(), k_cap as usize, theta);
        let rel = (p_corners - p_jack).abs() / p_corners.max(p_jack);
        worst = worst.max(rel);
    }
    Ok(worst)
}
