//! Partitions and the Jack symmetric-function specialization formulas used as
//! an independent oracle for the corners measure.
//!
//! Everything is evaluated in log space with a separate sign accumulator;
//! Gamma ratios overflow quickly otherwise even at moderate box widths.

use crate::error::{Error, Result};
use crate::numerics::log_pochhammer;

/// An integer partition: weakly decreasing parts, trailing zeros trimmed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    /// Builds a partition, validating monotonicity and trimming zeros.
    pub fn new(parts: impl Into<Vec<u32>>) -> Result<Self> {
        let mut parts = parts.into();
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::Invalid(format!("parts not weakly decreasing: {parts:?}")));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Partition { parts })
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Number of nonzero parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn weight(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    /// 1-based part access; zero beyond the length.
    pub fn part(&self, i: usize) -> u32 {
        if i >= 1 && i <= self.parts.len() {
            self.parts[i - 1]
        } else {
            0
        }
    }

    /// The conjugate (transposed Young diagram): lambda'_i = #{j : lambda_j >= i}.
    pub fn conjugate(&self) -> Partition {
        let cols = self.part(1) as usize;
        let parts = (1..=cols)
            .map(|i| self.parts.iter().filter(|&&p| p as usize >= i).count() as u32)
            .collect();
        Partition { parts }
    }

    /// Horizontal-strip interlacing: self_1 >= mu_1 >= self_2 >= mu_2 >= ...
    pub fn interlaces(&self, mu: &Partition) -> bool {
        if mu.len() > self.len() {
            return false;
        }
        (1..=self.len()).all(|i| self.part(i) >= mu.part(i) && mu.part(i) >= self.part(i + 1))
    }
}

/// Jack symmetric function at the pure-alpha specialization, J_lambda(1^N).
///
/// Zero when the partition has more than N rows.
pub fn jack_pure_alpha(lambda: &Partition, n_vars: usize, theta: f64) -> f64 {
    if lambda.len() > n_vars {
        return 0.0;
    }
    let conj = lambda.conjugate();
    let mut acc = 0.0;
    for i in 1..=lambda.len() {
        for j in 1..=lambda.part(i) as usize {
            let num = n_vars as f64 * theta + (j as f64 - 1.0) - (i as f64 - 1.0) * theta;
            let den =
                (lambda.part(i) as usize - j) as f64 + theta * (conj.part(j) as f64 - i as f64) + theta;
            acc += num.ln() - den.ln();
        }
    }
    acc.exp()
}

/// Dual Jack symmetric function at the pure-beta specialization of length K.
///
/// Zero when the first part exceeds K. Equals jack_pure_alpha of the
/// conjugate partition at 1/theta.
pub fn jack_dual_pure_beta(lambda: &Partition, k_cap: usize, theta: f64) -> f64 {
    if lambda.part(1) as usize > k_cap {
        return 0.0;
    }
    let conj = lambda.conjugate();
    let mut acc = 0.0;
    for i in 1..=lambda.len() {
        for j in 1..=lambda.part(i) as usize {
            let num = k_cap as f64 + theta * (i as f64 - 1.0) - (j as f64 - 1.0);
            let den =
                (lambda.part(i) as usize - j) as f64 + theta * (conj.part(j) as f64 - i as f64) + 1.0;
            acc += num.ln() - den.ln();
        }
    }
    acc.exp()
}

/// Single-variable skew Jack function J_{lambda/mu}(1).
///
/// Zero unless mu interlaces lambda (horizontal strip). The Pochhammer
/// product runs over 1 <= i <= j <= rows with exponents mu_j - lambda_{j+1};
/// any rows >= len(lambda) gives the same value (tested), we use len(lambda).
pub fn jack_skew_one(lambda: &Partition, mu: &Partition, theta: f64) -> f64 {
    jack_skew_one_with_rows(lambda, mu, theta, lambda.len())
}

/// As [`jack_skew_one`] with an explicit row count for the product, exposed
/// so the row-count independence can be tested.
pub fn jack_skew_one_with_rows(lambda: &Partition, mu: &Partition, theta: f64, rows: usize) -> f64 {
    if !lambda.interlaces(mu) {
        return 0.0;
    }
    assert!(rows >= lambda.len());
    let mut sign = 1.0;
    let mut acc = 0.0;
    for i in 1..=rows {
        for j in i..=rows {
            let e = (mu.part(j) - lambda.part(j + 1)) as usize;
            if e == 0 {
                continue;
            }
            let mi = mu.part(i) as f64;
            let mj = mu.part(j) as f64;
            let li = lambda.part(i) as f64;
            let gap = theta * (j - i) as f64;
            // all four bases are >= min(theta, 1) > 0 on interlacing input
            for (base, s) in [
                (mi - mj + gap + theta, 1.0),
                (mi - mj + gap + 1.0, -1.0),
                (li - mj + gap + 1.0, 1.0),
                (li - mj + gap + theta, -1.0),
            ] {
                let (ps, pl) = log_pochhammer(base, e)
                    .expect("pochhammer pole on interlacing input");
                sign *= ps;
                acc += s * pl;
            }
        }
    }
    sign * acc.exp()
}

/// Weight of a level sequence under the ascending Jack process:
/// 2^{-NK} * prod_j J_{lambda^j / lambda^{j-1}}(1) * Jdual_{lambda^N}(1^K_beta).
///
/// Returns 0 off the support (broken interlacing or first part above K).
pub fn ascending_weight(seq: &[Partition], k_cap: usize, theta: f64) -> f64 {
    assert!(!seq.is_empty());
    let n = seq.len();
    let mut w = (-(n as f64) * k_cap as f64 * 2.0f64.ln()).exp();
    let mut prev = Partition::empty();
    for lam in seq {
        w *= jack_skew_one(lam, &prev, theta);
        prev = lam.clone();
    }
    w * jack_dual_pure_beta(&seq[n - 1], k_cap, theta)
}

/// Branching sum over one added row of variables:
/// lhs = sum over kappa >= nu (kappa_1 <= K) of J_{kappa/nu}(1) Jdual_kappa,
/// together with the ratio lhs / Jdual_nu. The measured ratio is 2^K.
pub fn branching_sum_check(nu: &Partition, k_cap: usize, theta: f64) -> (f64, f64) {
    assert!(nu.part(1) as usize <= k_cap);
    let rows = nu.len() + 1;
    let mut lhs = 0.0;
    // kappa_i ranges in [nu_i, nu_{i-1}] with nu_0 = K
    let mut kappa = vec![0u32; rows];
    fn rec(
        i: usize,
        rows: usize,
        k_cap: usize,
        nu: &Partition,
        kappa: &mut Vec<u32>,
        theta: f64,
        lhs: &mut f64,
    ) {
        if i == rows {
            let kap = Partition::new(kappa.clone()).unwrap();
            *lhs += jack_skew_one(&kap, nu, theta) * jack_dual_pure_beta(&kap, k_cap, theta);
            return;
        }
        let lo = nu.part(i + 1);
        let hi = if i == 0 { k_cap as u32 } else { nu.part(i) };
        for v in lo..=hi {
            kappa[i] = v;
            rec(i + 1, rows, k_cap, nu, kappa, theta, lhs);
        }
    }
    rec(0, rows, k_cap, nu, &mut kappa, theta, &mut lhs);
    let ratio = lhs / jack_dual_pure_beta(nu, k_cap, theta);
    (lhs, ratio)
}
