//! Orchestration: resolved run configuration, report generation, and
//! CSV/JSON emission with reproducible outputs.
//!
//! Every float in a CSV is printed with 17 significant digits so values
//! round-trip exactly; the only non-deterministic field (a timestamp) is
//! confined to the manifest.

use crate::asymptotics::{
    covariance_c, covariance_characteristics, covariance_equal_level_contour, exp_theta_g,
    hb1_consistency, identity_residuals, limit_height_h, mu_density, nu_density,
    omega, omega_hat, omega_hat_inv, omega_inv, transport_f, EdgeData, PairingVariant,
};
use crate::corners_exact::{
    enumerate_corners, jack_crosscheck, log_partition_function, log_weight_corners,
    marginal_level, nekrasov_check, partition_function, ModelParams, ZMode, DEFAULT_ENUM_GUARD,
};
use crate::error::{Error, Result};
use crate::fieldstats::{clt_report, estimate_joint_cumulant, lln_report, CltProbe};
use crate::numerics::adaptive_integral_1d;
use crate::sampler::{sample_corners, ChainConfig};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Enumerate,
    Sample,
    VerifyExact,
    VerifyAnalytic,
    VerifyLln,
    VerifyClt,
    Kernel,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Enumerate => "enumerate",
            CommandKind::Sample => "sample",
            CommandKind::VerifyExact => "verify-exact",
            CommandKind::VerifyAnalytic => "verify-analytic",
            CommandKind::VerifyLln => "verify-lln",
            CommandKind::VerifyClt => "verify-clt",
            CommandKind::Kernel => "kernel",
        }
    }
}

/// Fully resolved run configuration (defaults, then config file, then flags).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub theta: f64,
    #[serde(rename = "K")]
    pub k: u32,
    #[serde(rename = "N")]
    pub n: u32,
    pub seed: u64,
    pub samples: u32,
    pub burnin: Option<u32>,
    pub thin: Option<u32>,
    pub chains: u32,
    /// Levels to record in `sample` output (empty: all).
    pub levels: Vec<u32>,
    /// Grid resolution for kernel tables and LLN grids.
    pub grid: u32,
    /// Tolerance override for verification commands.
    pub tol: Option<f64>,
    pub out: PathBuf,
}

/// Optional fields as they appear on the command line or in a JSON config
/// file; unset fields fall back to the file, then to defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PartialConfig {
    pub theta: Option<f64>,
    #[serde(rename = "K")]
    pub k: Option<u32>,
    #[serde(rename = "N")]
    pub n: Option<u32>,
    pub seed: Option<u64>,
    pub samples: Option<u32>,
    pub burnin: Option<u32>,
    pub thin: Option<u32>,
    pub chains: Option<u32>,
    pub levels: Option<Vec<u32>>,
    pub grid: Option<u32>,
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
}

impl PartialConfig {
    /// Merge with `self` taking precedence.
    fn over(self, base: PartialConfig) -> PartialConfig {
        PartialConfig {
            theta: self.theta.or(base.theta),
            k: self.k.or(base.k),
            n: self.n.or(base.n),
            seed: self.seed.or(base.seed),
            samples: self.samples.or(base.samples),
            burnin: self.burnin.or(base.burnin),
            thin: self.thin.or(base.thin),
            chains: self.chains.or(base.chains),
            levels: self.levels.or(base.levels),
            grid: self.grid.or(base.grid),
            tol: self.tol.or(base.tol),
            out: self.out.or(base.out),
        }
    }
}

/// Resolve flags + optional config file into a full `RunConfig`.
pub fn resolve_config(
    command: CommandKind,
    flags: PartialConfig,
    config_file: Option<&PathBuf>,
) -> Result<RunConfig> {
    let from_file = match config_file {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<PartialConfig>(&text)
                .map_err(|e| Error::Config(format!("bad config {}: {e}", path.display())))?
        }
        None => PartialConfig::default(),
    };
    let merged = flags.over(from_file);
    // per-command defaults match the scales the verification targets are
    // calibrated at
    let (def_k, def_samples) = match command {
        CommandKind::VerifyClt => (80, 500),
        CommandKind::VerifyLln => (120, 20),
        CommandKind::Sample => (10, 100),
        _ => (3, 500),
    };
    let config = RunConfig {
        command,
        theta: merged.theta.unwrap_or(1.0),
        k: merged.k.unwrap_or(def_k),
        n: merged.n.unwrap_or(3),
        seed: merged.seed.unwrap_or(1),
        samples: merged.samples.unwrap_or(def_samples),
        burnin: merged.burnin,
        thin: merged.thin,
        chains: merged.chains.unwrap_or(8),
        levels: merged.levels.unwrap_or_default(),
        grid: merged.grid.unwrap_or(200),
        tol: merged.tol,
        out: merged.out.unwrap_or_else(|| PathBuf::from("out")),
    };
    if !(config.theta > 0.0 && config.theta.is_finite()) {
        return Err(Error::Config(format!("theta must be positive, got {}", config.theta)));
    }
    if config.n == 0 {
        return Err(Error::Config("N must be at least 1".into()));
    }
    Ok(config)
}

fn chain_config(cfg: &RunConfig) -> ChainConfig {
    let defaults = ChainConfig::defaults_for(cfg.k, cfg.seed, cfg.samples, cfg.chains);
    ChainConfig {
        burnin_sweeps: cfg.burnin.unwrap_or(defaults.burnin_sweeps),
        thin_sweeps: cfg.thin.unwrap_or(defaults.thin_sweeps),
        ..defaults
    }
}

/// 17 significant digits: round-trip exact for f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One verification line of a report table.
#[derive(Debug, Clone, Serialize)]
pub struct CheckLine {
    pub quantity: String,
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
    pub zscore: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckLine {
    fn residual(quantity: impl Into<String>, value: f64, tolerance: f64) -> Self {
        CheckLine {
            quantity: quantity.into(),
            estimate: value,
            stderr: 0.0,
            target: 0.0,
            zscore: 0.0,
            tolerance,
            pass: value.abs() < tolerance,
        }
    }
}

fn write_checks_csv(path: &PathBuf, lines: &[CheckLine]) -> Result<()> {
    let mut text = String::from("quantity,estimate,stderr,target,zscore,tolerance,pass\n");
    for l in lines {
        let _ = writeln!(
            text,
            "{},{},{},{},{},{},{}",
            l.quantity,
            fmt_f64(l.estimate),
            fmt_f64(l.stderr),
            fmt_f64(l.target),
            fmt_f64(l.zscore),
            fmt_f64(l.tolerance),
            l.pass
        );
    }
    fs::write(path, text)?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config: &'a RunConfig,
    package_version: &'a str,
    timestamp_unix_secs: u64,
}

/// Outcome of a run: process exit code plus failing check names.
#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub failures: Vec<String>,
}

/// Executes a resolved configuration: writes the manifest and the command's
/// outputs under `out`, returns exit 0 iff every check passed.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    fs::create_dir_all(&cfg.out)?;
    let manifest = Manifest {
        command: cfg.command.name(),
        config: cfg,
        package_version: env!("CARGO_PKG_VERSION"),
        timestamp_unix_secs: std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
    };
    fs::write(cfg.out.join("manifest.json"), serde_json::to_string_pretty(&manifest)?)?;

    let lines = match cfg.command {
        CommandKind::Enumerate => return cmd_enumerate(cfg),
        CommandKind::Sample => return cmd_sample(cfg),
        CommandKind::Kernel => return cmd_kernel(cfg),
        CommandKind::VerifyExact => cmd_verify_exact(cfg)?,
        CommandKind::VerifyAnalytic => cmd_verify_analytic(cfg)?,
        CommandKind::VerifyLln => cmd_verify_lln(cfg)?,
        CommandKind::VerifyClt => cmd_verify_clt(cfg)?,
    };
    let csv_name = format!("{}.csv", cfg.command.name().replace('-', "_"));
    write_checks_csv(&cfg.out.join(csv_name), &lines)?;
    let failures: Vec<String> =
        lines.iter().filter(|l| !l.pass).map(|l| l.quantity.clone()).collect();
    for l in &lines {
        println!(
            "[{}] {} = {:.6e} (target {:.6e}, tol {:.1e})",
            if l.pass { "PASS" } else { "FAIL" },
            l.quantity,
            l.estimate,
            l.target,
            l.tolerance
        );
    }
    if failures.is_empty() {
        Ok(RunOutcome { exit_code: 0, failures })
    } else {
        let report = serde_json::json!({ "command": cfg.command.name(), "failed": failures });
        fs::write(cfg.out.join("failures.json"), serde_json::to_string_pretty(&report)?)?;
        Ok(RunOutcome { exit_code: 1, failures })
    }
}

fn cmd_enumerate(cfg: &RunConfig) -> Result<RunOutcome> {
    let log_z = log_partition_function(cfg.theta, cfg.k, cfg.n);
    let configs = enumerate_corners(cfg.k, cfg.n as usize, DEFAULT_ENUM_GUARD)?;
    let mut text = String::from("config_id,level,i,lambda,log_weight,probability\n");
    for (id, c) in configs.iter().enumerate() {
        let lw = log_weight_corners(c, cfg.theta, cfg.k);
        let p = (lw - log_z).exp();
        for (j, level) in c.levels.iter().enumerate() {
            for (i, &lam) in level.iter().enumerate() {
                let _ = writeln!(
                    text,
                    "{id},{},{},{lam},{},{}",
                    j + 1,
                    i + 1,
                    fmt_f64(lw),
                    fmt_f64(p)
                );
            }
        }
    }
    fs::write(cfg.out.join("enumerate.csv"), text)?;
    Ok(RunOutcome { exit_code: 0, failures: vec![] })
}

fn cmd_sample(cfg: &RunConfig) -> Result<RunOutcome> {
    let params = ModelParams::new(cfg.theta, cfg.k, cfg.n)?;
    let batch = sample_corners(&params, &chain_config(cfg))?;
    let mut text = String::new();
    for snap in &batch.snapshots {
        let mut levels: BTreeMap<String, &Vec<u32>> = BTreeMap::new();
        for (j, lv) in snap.config.levels.iter().enumerate() {
            let n = (j + 1) as u32;
            if cfg.levels.is_empty() || cfg.levels.contains(&n) {
                levels.insert(n.to_string(), lv);
            }
        }
        let record = serde_json::json!({
            "chain": snap.chain,
            "sweep": snap.sweep,
            "levels": levels,
        });
        let _ = writeln!(text, "{record}");
    }
    fs::write(cfg.out.join("samples.jsonl"), text)?;
    Ok(RunOutcome { exit_code: 0, failures: vec![] })
}

fn cmd_kernel(cfg: &RunConfig) -> Result<RunOutcome> {
    let theta = cfg.theta;
    let s_values: Vec<f64> = if cfg.levels.is_empty() {
        vec![0.5, 1.0, 2.0]
    } else {
        cfg.levels.iter().map(|&n| n as f64 / cfg.k.max(1) as f64).collect()
    };
    let mut text = String::from("x,s,mu,nu,h\n");
    for &s in &s_values {
        let half = 0.5 * (s + 1.0) + 0.2;
        for i in 0..cfg.grid {
            let x = -half + 2.0 * half * i as f64 / (cfg.grid - 1).max(1) as f64;
            let _ = writeln!(
                text,
                "{},{},{},{},{}",
                fmt_f64(x),
                fmt_f64(s),
                fmt_f64(mu_density(x, s, theta)),
                fmt_f64(nu_density(x, s, theta)),
                fmt_f64(limit_height_h(x, s, theta)?)
            );
        }
    }
    fs::write(cfg.out.join("kernel_density.csv"), text)?;

    let mut text = String::from("re_z1,im_z1,s1,re_z2,im_z2,s2,re_c,im_c\n");
    let pts = [
        (Complex64::new(2.0, 1.0), Complex64::new(-3.0, 0.0)),
        (Complex64::new(2.5, 0.5), Complex64::new(3.0, -1.0)),
        (Complex64::new(-2.0, 2.0), Complex64::new(4.0, 0.0)),
    ];
    for &s1 in &s_values {
        for &s2 in &s_values {
            for (z1, z2) in pts {
                let c = covariance_c(z1, s1, z2, s2, theta);
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{},{},{}",
                    fmt_f64(z1.re),
                    fmt_f64(z1.im),
                    fmt_f64(s1),
                    fmt_f64(z2.re),
                    fmt_f64(z2.im),
                    fmt_f64(s2),
                    fmt_f64(c.re),
                    fmt_f64(c.im)
                );
            }
        }
    }
    fs::write(cfg.out.join("kernel_covariance.csv"), text)?;
    Ok(RunOutcome { exit_code: 0, failures: vec![] })
}

fn cmd_verify_exact(cfg: &RunConfig) -> Result<Vec<CheckLine>> {
    let tol_z = cfg.tol.unwrap_or(1e-10);
    let mut lines = Vec::new();
    for theta in [0.5, 1.0, 2.0] {
        for k in 0..=3u32 {
            for n in 1..=3u32 {
                let zb = partition_function(theta, k, n, ZMode::Brute)?;
                let zc = partition_function(theta, k, n, ZMode::Closed)?;
                lines.push(CheckLine::residual(
                    format!("Z_rel[theta={theta},K={k},N={n}]"),
                    (zb - zc).abs() / zc,
                    tol_z,
                ));
            }
        }
    }
    for theta in [0.5, 1.0, 2.0] {
        for k in 1..=2u32 {
            for n in 1..=3u32 {
                for lvl in 1..=n as usize {
                    let m = marginal_level(theta, k, n, lvl)?;
                    lines.push(CheckLine::residual(
                        format!("marginal[theta={theta},K={k},N={n},n={lvl}]"),
                        m.direct_gap,
                        tol_z,
                    ));
                }
                lines.push(CheckLine::residual(
                    format!("jack[theta={theta},K={k},N={n}]"),
                    jack_crosscheck(theta, k, n)?,
                    cfg.tol.unwrap_or(1e-9),
                ));
            }
        }
    }
    for (theta, k, n) in [(1.0, 2u32, 2usize), (0.5, 3, 2), (2.0, 2, 2)] {
        lines.push(CheckLine::residual(
            format!("nekrasov[theta={theta},K={k},n={n}]"),
            nekrasov_check(theta, k, n, [3.0, 3.5, 4.0, 4.5])?,
            cfg.tol.unwrap_or(1e-8),
        ));
    }
    Ok(lines)
}

fn cmd_verify_analytic(cfg: &RunConfig) -> Result<Vec<CheckLine>> {
    let tol = cfg.tol.unwrap_or(1e-12);
    let mut lines = Vec::new();
    let zs = [
        Complex64::new(2.5, 0.0),
        Complex64::new(-3.0, 0.5),
        Complex64::new(0.3, 2.0),
        Complex64::new(5.0, -1.0),
        Complex64::new(-4.0, -0.2),
    ];
    let ss = [0.5, 0.8, 1.0, 1.6, 3.0];
    for theta in [0.5, 1.0, 2.0] {
        let mut worst = [0.0f64; 4];
        for &s in &ss {
            for &z in &zs {
                if z.im == 0.0 && z.re > -theta - 0.2 && z.re < 1.0 / s + 0.2 {
                    continue;
                }
                let r = identity_residuals(z, s, theta);
                worst = [
                    worst[0].max(r.r_linear),
                    worst[1].max(r.q_sqrt),
                    worst[2].max(r.const_two_theta),
                    worst[3].max(r.pde),
                ];
            }
        }
        lines.push(CheckLine::residual(format!("R_linear[theta={theta}]"), worst[0], tol));
        lines.push(CheckLine::residual(format!("Q_sqrt[theta={theta}]"), worst[1], tol));
        lines.push(CheckLine::residual(format!("const_2theta[theta={theta}]"), worst[2], tol));
        lines.push(CheckLine::residual(format!("pde[theta={theta}]"), worst[3], 1e-6));

        let mass = adaptive_integral_1d(|x| mu_density(x, 1.0, theta), -theta, 1.0, 1e-10)?;
        lines.push(CheckLine::residual(format!("mu_mass[theta={theta}]"), mass - 1.0, 1e-8));

        // exp(theta G) closed form vs quadrature of the Stieltjes integral
        let mut worst_g = 0.0f64;
        for (z, s) in [(Complex64::new(2.5, 0.0), 1.0), (Complex64::new(-3.0, 1.0), 0.7)] {
            let re = adaptive_integral_1d(
                |x| mu_density(x, s, theta) * ((z - x) / (z - x).norm_sqr()).re,
                -theta,
                1.0 / s,
                1e-11,
            )?;
            let im = adaptive_integral_1d(
                |x| mu_density(x, s, theta) * ((z - x) / (z - x).norm_sqr()).im,
                -theta,
                1.0 / s,
                1e-11,
            )?;
            let quad = (theta * Complex64::new(re, -im)).exp();
            worst_g = worst_g.max((quad - exp_theta_g(z, s, theta)).norm());
        }
        lines.push(CheckLine::residual(format!("expg_quad[theta={theta}]"), worst_g, 1e-8));

        // transport endpoint formulas
        let mut worst_f = 0.0f64;
        for (s, t) in [(2.0, 1.0), (1.2, 0.8), (1.0, 1.0)] {
            let (es, et) = (EdgeData::new(s, theta), EdgeData::new(t, theta));
            let shift = 0.5 * (theta / t).sqrt() * (s.sqrt() - t.sqrt()).powi(2);
            let d = transport_f(Complex64::new(et.b, 0.0), s, t, theta);
            let c = transport_f(Complex64::new(et.a, 0.0), s, t, theta);
            worst_f = worst_f.max((d - (es.b + shift)).norm()).max((c - (es.a - shift)).norm());
        }
        lines.push(CheckLine::residual(format!("transport_edges[theta={theta}]"), worst_f, tol));

        // map round-trips
        let mut worst_o = 0.0f64;
        for s in [0.5f64, 1.0, 2.0] {
            for i in 1..20 {
                let x = -s.sqrt() + 2.0 * s.sqrt() * i as f64 / 20.0;
                let (xx, ss) = omega_inv(omega(x, s)?)?;
                worst_o = worst_o.max((xx - x).abs()).max((ss - s).abs());
                let e = EdgeData::new(s, theta);
                let y = e.a + (e.b - e.a) * i as f64 / 20.0;
                let (yy, ts) = omega_hat_inv(omega_hat(y, s, theta)?, theta)?;
                worst_o = worst_o.max((yy - y).abs()).max((ts - s).abs());
            }
        }
        lines.push(CheckLine::residual(format!("map_roundtrip[theta={theta}]"), worst_o, tol));

        // covariance triple agreement
        let cases = [
            (Complex64::new(2.0, 1.0), 1.0, Complex64::new(-3.0, 0.0), 1.0),
            (Complex64::new(2.0, 1.0), 1.2, Complex64::new(3.0, 0.0), 0.8),
            (Complex64::new(2.5, 0.5), 1.5, Complex64::new(-2.0, -1.0), 0.9),
        ];
        let mut worst_char = 0.0f64;
        let mut worst_contour = 0.0f64;
        for (z1, s1, z2, s2) in cases {
            let c_lim = covariance_c(z1, s1, z2, s2, theta);
            let c_char = covariance_characteristics(z1, s1, z2, s2, theta);
            worst_char = worst_char.max((c_lim - c_char).norm());
            if s1 == s2 {
                let c_or = covariance_equal_level_contour(z1, z2, s1, theta, 4096)?;
                worst_contour = worst_contour.max((c_lim - c_or).norm());
            }
        }
        lines.push(CheckLine::residual(format!("cov_char[theta={theta}]"), worst_char, 1e-10));
        lines.push(CheckLine::residual(
            format!("cov_contour[theta={theta}]"),
            worst_contour,
            1e-8,
        ));
    }
    // HB1 equality at theta = 1
    for (s1, s2) in [(1.2, 0.8), (1.0, 1.0)] {
        let rep = hb1_consistency(
            s1,
            s2,
            1.0,
            |_| 1.0,
            |z| z * z / 2.0,
            |v| v,
            400,
            400,
        )?;
        lines.push(CheckLine::residual(format!("hb1[s1={s1},s2={s2}]"), rep.rel_gap, 1e-3));
    }
    Ok(lines)
}

fn cmd_verify_lln(cfg: &RunConfig) -> Result<Vec<CheckLine>> {
    let mut lines = Vec::new();
    let mut means = Vec::new();
    let ks = [(cfg.k / 3).max(2), cfg.k.max(3)];
    for &k in &ks {
        let n_level = (k as f64 / cfg.theta).ceil() as u32 + 1;
        let params = ModelParams::new(cfg.theta, k, n_level)?;
        let chain = ChainConfig {
            seed: cfg.seed,
            burnin_sweeps: cfg.burnin.unwrap_or(20 * k),
            thin_sweeps: cfg.thin.unwrap_or(k),
            n_samples: cfg.samples,
            n_chains: 1,
        };
        let batch = sample_corners(&params, &chain)?;
        let grid: Vec<(f64, f64)> = (0..cfg.grid)
            .map(|i| (-1.1 + 2.2 * i as f64 / (cfg.grid - 1).max(1) as f64, 1.0))
            .collect();
        let rep = lln_report(&batch, &grid)?;
        means.push(rep.mean_sup);
        lines.push(CheckLine {
            quantity: format!("lln_mean_sup[K={k}]"),
            estimate: rep.mean_sup,
            stderr: 0.0,
            target: 0.0,
            zscore: 0.0,
            tolerance: 0.05,
            pass: k < cfg.k || rep.mean_sup < 0.05,
        });
    }
    lines.push(CheckLine {
        quantity: "lln_monotone_improvement".into(),
        estimate: means[0] - means[means.len() - 1],
        stderr: 0.0,
        target: 0.0,
        zscore: 0.0,
        tolerance: f64::INFINITY,
        pass: means[0] > means[means.len() - 1],
    });
    Ok(lines)
}

fn cmd_verify_clt(cfg: &RunConfig) -> Result<Vec<CheckLine>> {
    let k = cfg.k;
    let n_level = ((1.25 * k as f64 / cfg.theta).ceil() as u32).max((1.25 * k as f64).ceil() as u32);
    let params = ModelParams::new(cfg.theta, k, n_level)?;
    // decorrelation sized to the ~0.8 K^2 sweep relaxation of the slowest mode
    let chain = ChainConfig {
        seed: cfg.seed,
        burnin_sweeps: cfg.burnin.unwrap_or(4 * k * k),
        thin_sweeps: cfg.thin.unwrap_or(8 * k),
        n_samples: cfg.samples,
        n_chains: cfg.chains,
    };
    let batch = sample_corners(&params, &chain)?;
    let probes = vec![
        CltProbe { label: "s=0.75,f=1".into(), s: 0.75, f: Box::new(|_| 1.0) },
        CltProbe { label: "s=0.75,f=x".into(), s: 0.75, f: Box::new(|x| x) },
        CltProbe { label: "s=1.25,f=1".into(), s: 1.25, f: Box::new(|_| 1.0) },
        CltProbe { label: "s=1.25,f=x".into(), s: 1.25, f: Box::new(|x| x) },
    ];
    let rep = clt_report(&batch, &probes, PairingVariant::Omega, 300)?;
    let mut lines = Vec::new();
    for e in rep
        .covariances
        .iter()
        .chain(&rep.third_cumulants)
        .chain(&rep.fourth_cumulants)
    {
        lines.push(CheckLine {
            quantity: e.label.clone(),
            estimate: e.estimate,
            stderr: e.stderr,
            target: e.target,
            zscore: e.zscore,
            tolerance: 3.0,
            pass: e.zscore.abs() < 3.0,
        });
    }
    // Stieltjes-field covariance against the closed form
    let z = Complex64::new(2.0, 1.0);
    let est = estimate_joint_cumulant(&batch, &[(z, 1.0), (z.conj(), 1.0)], 2)?;
    let target = covariance_c(z, 1.0, z.conj(), 1.0, cfg.theta);
    let zscore = (est.value - target).norm() / est.stderr;
    lines.push(CheckLine {
        quantity: "stieltjes_cov[z=2+i,s=1]".into(),
        estimate: est.value.re,
        stderr: est.stderr,
        target: target.re,
        zscore,
        tolerance: 3.0,
        pass: zscore < 3.0,
    });
    Ok(lines)
}
