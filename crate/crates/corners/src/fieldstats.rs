//! Joint-cumulant algebra over set partitions and the Monte Carlo
//! estimators that confront sampled observables with the asymptotic
//! predictions.

use crate::asymptotics::{gff_pairing_cov, limit_height_h, PairingVariant};
use crate::error::{Error, Result};
use crate::numerics::ComplexScalar;
use crate::sampler::{height_h, height_hat, stieltjes_field, SampleBatch};
use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::PI;

/// Monte Carlo joint-cumulant estimate with a batch-means error bar.
#[derive(Debug, Clone, Copy)]
pub struct CumulantEstimate {
    pub order: usize,
    pub value: ComplexScalar,
    pub stderr: f64,
    pub n_batches: usize,
}

/// Chains required for a batch-means error bar.
pub const MIN_CHAINS: usize = 8;
const MAX_CUMULANT_VARS: usize = 6;

/// All partitions of {0, .., n-1}, each a list of blocks given as bitmasks.
fn set_partitions(n: usize) -> Vec<Vec<u64>> {
    assert!((1..=MAX_CUMULANT_VARS).contains(&n));
    let mut out = Vec::new();
    let mut blocks: Vec<u64> = Vec::new();
    fn rec(i: usize, n: usize, blocks: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if i == n {
            out.push(blocks.clone());
            return;
        }
        for k in 0..blocks.len() {
            blocks[k] |= 1 << i;
            rec(i + 1, n, blocks, out);
            blocks[k] &= !(1 << i);
        }
        blocks.push(1 << i);
        rec(i + 1, n, blocks, out);
        blocks.pop();
    }
    rec(0, n, &mut blocks, &mut out);
    out
}

fn lookup(table: &BTreeMap<u64, ComplexScalar>, mask: u64) -> Result<ComplexScalar> {
    table.get(&mask).copied().ok_or(Error::IncompleteTable(mask))
}

/// Joint cumulant of X_1..X_n from the table of mixed moments E[X^S] over
/// all nonempty subsets S (bitmask-keyed):
/// M = sum over partitions of (-1)^{r-1} (r-1)! prod_blocks E[X^block].
pub fn cumulant_from_moments(n: usize, moments: &BTreeMap<u64, ComplexScalar>) -> Result<ComplexScalar> {
    if n == 0 || n > MAX_CUMULANT_VARS {
        return Err(Error::Invalid(format!("cumulant order {n} unsupported")));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for blocks in set_partitions(n) {
        let r = blocks.len();
        let mut term = Complex64::new(1.0, 0.0);
        for &b in &blocks {
            term *= lookup(moments, b)?;
        }
        let mut coeff = 1.0;
        for k in 1..r {
            coeff *= -(k as f64);
        }
        acc += coeff * term;
    }
    Ok(acc)
}

/// Mixed moment E[X_1 .. X_n] from the table of joint cumulants over all
/// nonempty subsets: E = sum over partitions of prod_blocks M(block).
pub fn moments_from_cumulants(n: usize, cumulants: &BTreeMap<u64, ComplexScalar>) -> Result<ComplexScalar> {
    if n == 0 || n > MAX_CUMULANT_VARS {
        return Err(Error::Invalid(format!("moment order {n} unsupported")));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for blocks in set_partitions(n) {
        let mut term = Complex64::new(1.0, 0.0);
        for &b in &blocks {
            term *= lookup(cumulants, b)?;
        }
        acc += term;
    }
    Ok(acc)
}

/// Product expansion M(XY, X_1..X_n) = M(X, Y, X_1..X_n)
/// + sum over I subset of {1..n} of M(X; X_I) M(Y; X_{I^c}).
///
/// The cumulant oracle is indexed over the n+2 variables with bit 0 = X,
/// bit 1 = Y, bits 2.. = X_1..X_n.
pub fn product_cumulant_expand(
    n: usize,
    cumulant: &BTreeMap<u64, ComplexScalar>,
) -> Result<ComplexScalar> {
    if n + 2 > MAX_CUMULANT_VARS {
        return Err(Error::Invalid(format!("product expansion with {n} extra variables unsupported")));
    }
    let rest: u64 = ((1u64 << n) - 1) << 2;
    let mut acc = lookup(cumulant, 0b11 | rest)?;
    // iterate over subsets I of the n extra variables
    let mut sub: u64 = 0;
    loop {
        let masked = sub << 2;
        acc += lookup(cumulant, 0b01 | masked)? * lookup(cumulant, 0b10 | (rest & !masked))?;
        if sub == (1 << n) - 1 {
            break;
        }
        sub += 1;
    }
    Ok(acc)
}

/// Per-chain series of joint observables: series[chain][snapshot][variable].
pub type ObservableSeries = Vec<Vec<Vec<ComplexScalar>>>;

/// Batch-means joint-cumulant estimator: each chain is centered by its own
/// sample mean, mixed moments are converted through the partition formula,
/// and chains supply both the point estimate and the error bar.
pub fn joint_cumulant_batch_means(series: &ObservableSeries, order: usize) -> Result<CumulantEstimate> {
    let n_chains = series.len();
    if n_chains < MIN_CHAINS {
        return Err(Error::InsufficientChains { need: MIN_CHAINS, got: n_chains });
    }
    if order == 0 || order > 4 {
        return Err(Error::Invalid(format!("estimator supports orders 1..=4, got {order}")));
    }
    let mut per_chain = Vec::with_capacity(n_chains);
    for chain in series {
        let n_snap = chain.len();
        if n_snap == 0 {
            return Err(Error::Invalid("empty chain".into()));
        }
        // center by the chain sample mean
        let mut means = vec![Complex64::new(0.0, 0.0); order];
        for snap in chain {
            for v in 0..order {
                means[v] += snap[v];
            }
        }
        for m in means.iter_mut() {
            *m /= n_snap as f64;
        }
        // mixed moments over every nonempty subset
        let mut moments: BTreeMap<u64, ComplexScalar> = BTreeMap::new();
        for mask in 1u64..(1 << order) {
            let mut acc = Complex64::new(0.0, 0.0);
            for snap in chain {
                let mut prod = Complex64::new(1.0, 0.0);
                for v in 0..order {
                    if mask & (1 << v) != 0 {
                        prod *= snap[v] - means[v];
                    }
                }
                acc += prod;
            }
            moments.insert(mask, acc / n_snap as f64);
        }
        per_chain.push(cumulant_from_moments(order, &moments)?);
    }
    let mean: Complex64 = per_chain.iter().sum::<Complex64>() / n_chains as f64;
    let var: f64 = per_chain.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>()
        / (n_chains as f64 - 1.0);
    Ok(CumulantEstimate {
        order,
        value: mean,
        stderr: (var / n_chains as f64).sqrt(),
        n_batches: n_chains,
    })
}

/// Joint cumulant of Stieltjes-field observables at the given (z, s) points,
/// estimated from a sample batch.
pub fn estimate_joint_cumulant(
    batch: &SampleBatch,
    observables: &[(ComplexScalar, f64)],
    order: usize,
) -> Result<CumulantEstimate> {
    if order != observables.len() {
        return Err(Error::Invalid(format!(
            "order {order} must match the number of observables ({})",
            observables.len()
        )));
    }
    let theta = batch.params.theta;
    let k_cap = batch.params.k_cap;
    let mut series: ObservableSeries = Vec::with_capacity(batch.n_chains() as usize);
    for chain in 0..batch.n_chains() {
        let snaps = batch.chain_snapshots(chain);
        let mut rows = Vec::with_capacity(snaps.len());
        for s in snaps {
            let row: Result<Vec<ComplexScalar>> = observables
                .iter()
                .map(|&(z, lvl)| stieltjes_field(&s.config, theta, k_cap, z, lvl))
                .collect();
            rows.push(row?);
        }
        series.push(rows);
    }
    joint_cumulant_batch_means(&series, order)
}

/// Per-snapshot centered height pairings sqrt(theta pi) int (H - mean H) f dx,
/// grouped by chain. The trapezoid grid has 512 points spanning the
/// deterministic support of the chosen height function.
pub fn pairing_rv<F: Fn(f64) -> f64>(
    batch: &SampleBatch,
    f: F,
    s: f64,
    variant: PairingVariant,
) -> Result<Vec<Vec<f64>>> {
    const GRID: usize = 512;
    let theta = batch.params.theta;
    let k_cap = batch.params.k_cap;
    if k_cap == 0 {
        // degenerate box: the configuration is deterministic and every
        // centered pairing vanishes identically
        let n = batch.chain.n_samples as usize;
        return Ok(vec![vec![0.0; n]; batch.n_chains() as usize]);
    }
    let kf = k_cap as f64;
    let (x_min, x_max) = match variant {
        PairingVariant::Omega => {
            let n = crate::sampler::ceil_level(s * kf / theta);
            let half = ((n as f64 - 1.0) * theta / 2.0 + kf / 2.0) / kf;
            (-half - 1.0 / kf, half + 1.0 / kf)
        }
        PairingVariant::OmegaHat => {
            let n = crate::sampler::ceil_level(s * kf);
            (-(n as f64) * theta / kf - 1.0 / kf, 1.0 + 1.0 / kf)
        }
    };
    let xs: Vec<f64> = (0..GRID)
        .map(|i| x_min + (x_max - x_min) * i as f64 / (GRID - 1) as f64)
        .collect();
    let n_total = batch.snapshots.len();
    if n_total == 0 {
        return Ok(vec![Vec::new(); batch.n_chains() as usize]);
    }
    // heights per snapshot per grid point
    let mut heights = vec![vec![0.0f64; GRID]; n_total];
    for (snap_idx, snap) in batch.snapshots.iter().enumerate() {
        for (gi, &x) in xs.iter().enumerate() {
            let h = match variant {
                PairingVariant::Omega => height_h(&snap.config, theta, k_cap, x, s)?,
                PairingVariant::OmegaHat => height_hat(&snap.config, theta, k_cap, x, s)?,
            };
            heights[snap_idx][gi] = h as f64;
        }
    }
    let mut mean = vec![0.0f64; GRID];
    for row in &heights {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n_total as f64;
    }
    let dx = (x_max - x_min) / (GRID - 1) as f64;
    let scale = (theta * PI).sqrt();
    let fs: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let n_per_chain = batch.chain.n_samples as usize;
    let mut out = Vec::with_capacity(batch.n_chains() as usize);
    for chain in 0..batch.n_chains() as usize {
        let mut vals = Vec::with_capacity(n_per_chain);
        for row in &heights[chain * n_per_chain..(chain + 1) * n_per_chain] {
            let mut acc = 0.0;
            for gi in 0..GRID {
                let w = if gi == 0 || gi == GRID - 1 { 0.5 } else { 1.0 };
                acc += w * (row[gi] - mean[gi]) * fs[gi];
            }
            vals.push(scale * acc * dx);
        }
        out.push(vals);
    }
    Ok(out)
}

/// Law-of-large-numbers report: per snapshot, the sup over the grid of
/// |H_K(x, s)/K - h(x, s)|.
#[derive(Debug, Clone)]
pub struct LlnReport {
    pub per_snapshot_sup: Vec<f64>,
    pub mean_sup: f64,
    pub max_sup: f64,
}

pub fn lln_report(batch: &SampleBatch, grid: &[(f64, f64)]) -> Result<LlnReport> {
    let theta = batch.params.theta;
    let k_cap = batch.params.k_cap;
    let targets: Result<Vec<f64>> =
        grid.iter().map(|&(x, s)| limit_height_h(x, s, theta)).collect();
    let targets = targets?;
    let mut sups = Vec::with_capacity(batch.snapshots.len());
    for snap in &batch.snapshots {
        let mut sup = 0.0f64;
        for (&(x, s), &h_target) in grid.iter().zip(&targets) {
            let h = height_h(&snap.config, theta, k_cap, x, s)? as f64 / k_cap as f64;
            sup = sup.max((h - h_target).abs());
        }
        sups.push(sup);
    }
    let mean = sups.iter().sum::<f64>() / sups.len().max(1) as f64;
    let max = sups.iter().cloned().fold(0.0, f64::max);
    Ok(LlnReport { per_snapshot_sup: sups, mean_sup: mean, max_sup: max })
}

/// One line of the CLT report.
#[derive(Debug, Clone)]
pub struct CltEntry {
    pub label: String,
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
    pub zscore: f64,
}

/// CLT report: pairing covariances against the GFF prediction, plus third
/// and fourth cumulants of each pairing (which must vanish for a Gaussian
/// limit).
#[derive(Debug, Clone)]
pub struct CltReport {
    pub covariances: Vec<CltEntry>,
    pub third_cumulants: Vec<CltEntry>,
    pub fourth_cumulants: Vec<CltEntry>,
}

/// A level and test function probed by [`clt_report`].
pub struct CltProbe<'a> {
    pub label: String,
    pub s: f64,
    pub f: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
}

pub fn clt_report(
    batch: &SampleBatch,
    probes: &[CltProbe<'_>],
    variant: PairingVariant,
    quad_nodes: usize,
) -> Result<CltReport> {
    let theta = batch.params.theta;
    let n_chains = batch.n_chains() as usize;
    if n_chains < MIN_CHAINS {
        return Err(Error::InsufficientChains { need: MIN_CHAINS, got: n_chains });
    }
    // per-probe pairing series, grouped by chain
    let series: Result<Vec<Vec<Vec<f64>>>> = probes
        .iter()
        .map(|p| pairing_rv(batch, &p.f, p.s, variant))
        .collect();
    let series = series?;
    let mut covariances = Vec::new();
    for i in 0..probes.len() {
        for j in i..probes.len() {
            let target = gff_pairing_cov(
                &probes[i].f,
                probes[i].s,
                &probes[j].f,
                probes[j].s,
                theta,
                variant,
                quad_nodes,
            )?;
            let mut per_chain = Vec::with_capacity(n_chains);
            #[allow(clippy::needless_range_loop)] // c indexes two parallel series
            for c in 0..n_chains {
                let (xi, xj) = (&series[i][c], &series[j][c]);
                let n = xi.len() as f64;
                let (mi, mj) = (
                    xi.iter().sum::<f64>() / n,
                    xj.iter().sum::<f64>() / n,
                );
                let cov = xi
                    .iter()
                    .zip(xj)
                    .map(|(a, b)| (a - mi) * (b - mj))
                    .sum::<f64>()
                    / n;
                per_chain.push(cov);
            }
            let est = per_chain.iter().sum::<f64>() / n_chains as f64;
            let var = per_chain.iter().map(|v| (v - est) * (v - est)).sum::<f64>()
                / (n_chains as f64 - 1.0);
            let stderr = (var / n_chains as f64).sqrt();
            covariances.push(CltEntry {
                label: format!("cov[{}, {}]", probes[i].label, probes[j].label),
                estimate: est,
                stderr,
                target,
                zscore: if stderr > 0.0 { (est - target) / stderr } else { f64::INFINITY },
            });
        }
    }
    let mut third_cumulants = Vec::new();
    let mut fourth_cumulants = Vec::new();
    for (i, probe) in probes.iter().enumerate() {
        let mut k3_chain = Vec::with_capacity(n_chains);
        let mut k4_chain = Vec::with_capacity(n_chains);
        #[allow(clippy::needless_range_loop)]
        for c in 0..n_chains {
            let x = &series[i][c];
            let n = x.len() as f64;
            let m = x.iter().sum::<f64>() / n;
            let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
            let m3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
            let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / n;
            k3_chain.push(m3);
            k4_chain.push(m4 - 3.0 * m2 * m2);
        }
        for (tag, per_chain, out) in [
            ("k3", k3_chain, &mut third_cumulants),
            ("k4", k4_chain, &mut fourth_cumulants),
        ] {
            let est = per_chain.iter().sum::<f64>() / n_chains as f64;
            let var = per_chain.iter().map(|v| (v - est) * (v - est)).sum::<f64>()
                / (n_chains as f64 - 1.0);
            let stderr = (var / n_chains as f64).sqrt();
            out.push(CltEntry {
                label: format!("{tag}[{}]", probe.label),
                estimate: est,
                stderr,
                target: 0.0,
                zscore: if stderr > 0.0 { est / stderr } else { f64::INFINITY },
            });
        }
    }
    Ok(CltReport { covariances, third_cumulants, fourth_cumulants })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn partition_counts_are_bell_numbers() {
        for (n, bell) in [(1usize, 1usize), (2, 2), (3, 5), (4, 15), (5, 52), (6, 203)] {
            assert_eq!(set_partitions(n).len(), bell);
        }
    }

    #[test]
    fn cumulant_low_order_formulas() {
        let mut m = BTreeMap::new();
        m.insert(0b1, c(1.5, 0.2));
        assert!((cumulant_from_moments(1, &m).unwrap() - c(1.5, 0.2)).norm() < 1e-15);
        m.insert(0b10, c(-0.3, 1.0));
        m.insert(0b11, c(2.0, 0.5));
        let k2 = cumulant_from_moments(2, &m).unwrap();
        let expect = c(2.0, 0.5) - c(1.5, 0.2) * c(-0.3, 1.0);
        assert!((k2 - expect).norm() < 1e-14);
        // incomplete table
        let mut bad = m.clone();
        bad.remove(&0b10);
        assert!(matches!(cumulant_from_moments(2, &bad), Err(Error::IncompleteTable(_))));
    }

    /// Exact joint moments of variables on a small finite probability space.
    struct FiniteSpace {
        probs: Vec<f64>,
        vars: Vec<Vec<Complex64>>, // vars[v][atom]
    }

    impl FiniteSpace {
        fn random(n_vars: usize, atoms: usize, seed: u64) -> Self {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let raw: Vec<f64> = (0..atoms).map(|_| rng.gen::<f64>() + 0.1).collect();
            let tot: f64 = raw.iter().sum();
            let probs = raw.into_iter().map(|p| p / tot).collect();
            let vars = (0..n_vars)
                .map(|_| {
                    (0..atoms)
                        .map(|_| c(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0))
                        .collect()
                })
                .collect();
            FiniteSpace { probs, vars }
        }

        fn moment(&self, mask: u64) -> Complex64 {
            let mut acc = c(0.0, 0.0);
            for (a, &p) in self.probs.iter().enumerate() {
                let mut prod = c(1.0, 0.0);
                for (v, var) in self.vars.iter().enumerate() {
                    if mask & (1 << v) != 0 {
                        prod *= var[a];
                    }
                }
                acc += p * prod;
            }
            acc
        }

        fn moment_table(&self, n: usize) -> BTreeMap<u64, Complex64> {
            (1u64..(1 << n)).map(|m| (m, self.moment(m))).collect()
        }

        fn cumulant_table(&self, n: usize) -> BTreeMap<u64, Complex64> {
            let mut out = BTreeMap::new();
            for mask in 1u64..(1 << n) {
                let vars: Vec<usize> = (0..n).filter(|v| mask & (1 << v) != 0).collect();
                // re-key the sub-table on the subset's own bit positions
                let mut sub = BTreeMap::new();
                for sub_mask in 1u64..(1 << vars.len()) {
                    let mut full = 0u64;
                    for (bit, &v) in vars.iter().enumerate() {
                        if sub_mask & (1 << bit) != 0 {
                            full |= 1 << v;
                        }
                    }
                    sub.insert(sub_mask, self.moment(full));
                }
                out.insert(mask, cumulant_from_moments(vars.len(), &sub).unwrap());
            }
            out
        }
    }

    #[test]
    fn moment_cumulant_round_trip() {
        for n in 1..=5usize {
            let space = FiniteSpace::random(n, 7, 99 + n as u64);
            let cums = space.cumulant_table(n);
            let m = moments_from_cumulants(n, &cums).unwrap();
            let direct = space.moment((1 << n) - 1);
            assert!((m - direct).norm() < 1e-12, "n={n}: {m} vs {direct}");
        }
    }

    #[test]
    fn cumulant_of_independent_triple_vanishes() {
        // product probability space of three independent centered variables
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let atoms = 3usize;
        let vals: Vec<Vec<f64>> = (0..3)
            .map(|_| {
                let v: Vec<f64> = (0..atoms).map(|_| rng.gen::<f64>() - 0.5).collect();
                let m = v.iter().sum::<f64>() / atoms as f64;
                v.into_iter().map(|x| x - m).collect()
            })
            .collect();
        let mut moments = BTreeMap::new();
        for mask in 1u64..8 {
            // uniform product measure: moment factorizes
            let mut prod = 1.0;
            for (v, vv) in vals.iter().enumerate() {
                if mask & (1 << v) != 0 {
                    prod *= vv.iter().sum::<f64>() / atoms as f64;
                }
            }
            moments.insert(mask, c(prod, 0.0));
        }
        let k3 = cumulant_from_moments(3, &moments).unwrap();
        assert!(k3.norm() < 1e-14);
    }

    #[test]
    fn shift_invariance_of_higher_cumulants() {
        let space = FiniteSpace::random(3, 6, 11);
        let base = cumulant_from_moments(3, &space.moment_table(3)).unwrap();
        // shift variable 0 by a constant
        let shift = c(0.7, -0.4);
        let mut shifted = space.moment_table(3);
        for mask in 1u64..8 {
            if mask & 1 != 0 {
                let without = space.moment(mask & !1);
                let with = space.moment(mask);
                shifted.insert(mask, with + shift * without);
            }
        }
        let k3 = cumulant_from_moments(3, &shifted).unwrap();
        assert!((k3 - base).norm() < 1e-13);
    }

    #[test]
    fn product_expansion_matches_direct() {
        // build X, Y, X1, X2 on a finite space; check Mal3 against the
        // cumulant of the literal product variable XY
        let space = FiniteSpace::random(4, 9, 21);
        let cums = space.cumulant_table(4);
        let predicted = product_cumulant_expand(2, &cums).unwrap();
        // direct: joint cumulant of (XY, X1, X2) as a 3-variable family
        let xy: Vec<Complex64> = (0..space.probs.len())
            .map(|a| space.vars[0][a] * space.vars[1][a])
            .collect();
        let fam = vec![xy, space.vars[2].clone(), space.vars[3].clone()];
        let mut moments = BTreeMap::new();
        for mask in 1u64..8 {
            let mut acc = c(0.0, 0.0);
            for (a, &p) in space.probs.iter().enumerate() {
                let mut prod = c(1.0, 0.0);
                for (v, var) in fam.iter().enumerate() {
                    if mask & (1 << v) != 0 {
                        prod *= var[a];
                    }
                }
                acc += p * prod;
            }
            moments.insert(mask, acc);
        }
        let direct = cumulant_from_moments(3, &moments).unwrap();
        assert!((predicted - direct).norm() < 1e-12, "{predicted} vs {direct}");
    }

    #[test]
    fn product_expansion_with_unit_y_is_linear() {
        // Y = 1: M(X*1, X_I) = M(X, X_I); the expansion must reduce to it
        let space = FiniteSpace::random(3, 8, 31);
        // insert Y=1 as variable index 1 by building a 4-var family (X, 1, X1, X2)
        let mut vars = vec![space.vars[0].clone()];
        vars.push(vec![c(1.0, 0.0); space.probs.len()]);
        vars.push(space.vars[1].clone());
        vars.push(space.vars[2].clone());
        let aug = FiniteSpace { probs: space.probs.clone(), vars };
        let cums = aug.cumulant_table(4);
        let predicted = product_cumulant_expand(2, &cums).unwrap();
        // direct M(X, X1, X2)
        let sub_space = FiniteSpace {
            probs: space.probs.clone(),
            vars: vec![space.vars[0].clone(), space.vars[1].clone(), space.vars[2].clone()],
        };
        let direct = cumulant_from_moments(3, &sub_space.moment_table(3)).unwrap();
        assert!((predicted - direct).norm() < 1e-12);
    }

    #[test]
    fn batch_means_calibration_on_synthetic_gaussians() {
        // iid complex Gaussian pairs with known covariance structure
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (chains, snaps) = (16usize, 4000usize);
        let rho = 0.6;
        let mut series: ObservableSeries = Vec::new();
        for _ in 0..chains {
            let mut rows = Vec::with_capacity(snaps);
            for _ in 0..snaps {
                let g1: f64 = gauss(&mut rng);
                let g2: f64 = gauss(&mut rng);
                let x = g1;
                let y = rho * g1 + (1.0 - rho * rho).sqrt() * g2;
                rows.push(vec![c(x, 0.0), c(y, 0.0)]);
            }
            series.push(rows);
        }
        let est = joint_cumulant_batch_means(&series, 2).unwrap();
        assert!(est.stderr > 0.0);
        assert!(
            (est.value.re - rho).abs() < 3.0 * est.stderr,
            "cov {} vs {rho} (stderr {})",
            est.value.re,
            est.stderr
        );
        // third cumulant of a Gaussian vanishes
        let tri: ObservableSeries = series
            .iter()
            .map(|ch| ch.iter().map(|r| vec![r[0], r[0], r[0]]).collect())
            .collect();
        let k3 = joint_cumulant_batch_means(&tri, 3).unwrap();
        assert!(k3.value.norm() < 3.0 * k3.stderr + 1e-3);
        // constant observable: order-2 cumulant is exactly zero
        let const_series: ObservableSeries = series
            .iter()
            .map(|ch| ch.iter().map(|_| vec![c(2.0, 1.0), c(2.0, 1.0)]).collect())
            .collect();
        let k2 = joint_cumulant_batch_means(&const_series, 2).unwrap();
        assert_eq!(k2.value, c(0.0, 0.0));
        // order 1 of centered field is 0 by construction
        let k1 = joint_cumulant_batch_means(&series, 1).unwrap();
        assert!(k1.value.norm() < 1e-12);
        assert!(matches!(
            joint_cumulant_batch_means(&series[..4].to_vec(), 2),
            Err(Error::InsufficientChains { .. })
        ));
    }

    #[test]
    fn order_two_estimate_shift_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let series: ObservableSeries = (0..8)
            .map(|_| {
                (0..200)
                    .map(|_| vec![c(gauss(&mut rng), 0.0), c(gauss(&mut rng), 0.0)])
                    .collect()
            })
            .collect();
        let base = joint_cumulant_batch_means(&series, 2).unwrap();
        let shifted: ObservableSeries = series
            .iter()
            .map(|ch| {
                ch.iter()
                    .map(|r| vec![r[0] + c(5.0, -2.0), r[1]])
                    .collect()
            })
            .collect();
        let moved = joint_cumulant_batch_means(&shifted, 2).unwrap();
        assert!((base.value - moved.value).norm() < 1e-12);
        assert!((base.stderr - moved.stderr).abs() < 1e-12);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]
            #[test]
            fn moment_cumulant_tables_invert(seed in 0u64..1000, n in 1usize..5) {
                let space = FiniteSpace::random(n, 6, seed);
                let cums = space.cumulant_table(n);
                let m = moments_from_cumulants(n, &cums).unwrap();
                let direct = space.moment((1 << n) - 1);
                prop_assert!((m - direct).norm() < 1e-11);
            }
        }
    }

    fn gauss<R: Rng>(rng: &mut R) -> f64 {
        // Box-Muller
        let u: f64 = rng.gen::<f64>().max(1e-12);
        let v: f64 = rng.gen();
        (-2.0 * u.ln()).sqrt() * (2.0 * PI * v).cos()
    }

    #[test]
    fn pairing_rv_trivial_cases() {
        use crate::corners_exact::ModelParams;
        use crate::sampler::{sample_corners, ChainConfig};
        // K=0: deterministic configs, pairings all zero
        let p = ModelParams::new(1.0, 0, 3).unwrap();
        let cfg = ChainConfig { seed: 5, burnin_sweeps: 2, thin_sweeps: 1, n_samples: 4, n_chains: 2 };
        let batch = sample_corners(&p, &cfg).unwrap();
        let vals = pairing_rv(&batch, |_| 1.0, 1.0, PairingVariant::Omega).unwrap();
        for chain in &vals {
            for &v in chain {
                assert!(v.abs() < 1e-12);
            }
        }
        // f = 0 gives zeros
        let p = ModelParams::new(1.0, 2, 2).unwrap();
        let batch = sample_corners(&p, &cfg).unwrap();
        let vals = pairing_rv(&batch, |_| 0.0, 1.0, PairingVariant::OmegaHat).unwrap();
        assert!(vals.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn lln_report_degenerate_box() {
        // K = 0: single deterministic configuration; in the frozen region the
        // gap against the limit height vanishes
        use crate::corners_exact::ModelParams;
        use crate::sampler::{sample_corners, ChainConfig};
        let p = ModelParams::new(1.0, 0, 2).unwrap();
        let cfg = ChainConfig { seed: 1, burnin_sweeps: 1, thin_sweeps: 1, n_samples: 3, n_chains: 1 };
        let batch = sample_corners(&p, &cfg).unwrap();
        // far left: H = n and h = s/theta = 1 with K treated as unit scale
        let rep = lln_report(&batch, &[(-10.0, 1.0), (10.0, 1.0)]).unwrap();
        assert!(rep.max_sup.is_finite());
        assert!(rep.max_sup < 1e-9, "{}", rep.max_sup);
    }

    #[test]
    fn lln_report_runs_on_tiny_batch() {
        use crate::corners_exact::ModelParams;
        use crate::sampler::{sample_corners, ChainConfig};
        let p = ModelParams::new(1.0, 12, 14).unwrap();
        let cfg = ChainConfig { seed: 9, burnin_sweeps: 240, thin_sweeps: 12, n_samples: 6, n_chains: 1 };
        let batch = sample_corners(&p, &cfg).unwrap();
        let grid: Vec<(f64, f64)> = (0..40).map(|i| (-1.1 + 2.2 * i as f64 / 39.0, 1.0)).collect();
        let rep = lln_report(&batch, &grid).unwrap();
        assert_eq!(rep.per_snapshot_sup.len(), 6);
        assert!(rep.mean_sup > 0.0 && rep.mean_sup < 0.5);
        assert!(rep.max_sup >= rep.mean_sup);
    }
}
