//! Special functions, branch-cut complex algebra, and quadrature shared by
//! every other module.
//!
//! All functions here are pure and thread-safe.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Complex evaluation points; finite components are assumed throughout.
pub type ComplexScalar = Complex64;

// Lanczos g = 7, 9 coefficients (GSL set).
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the Gamma function for x > 0.
///
/// Lanczos approximation; arguments below 0.5 are shifted up through
/// Gamma(x+1) = x Gamma(x). Panics on x <= 0 (domain error).
pub fn log_gamma(x: f64) -> f64 {
    assert!(x > 0.0 && x.is_finite(), "log_gamma domain: x = {x}");
    if x < 0.5 {
        return log_gamma(x + 1.0) - x.ln();
    }
    let y = x - 1.0;
    let mut a = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (y + i as f64);
    }
    let t = y + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (y + 0.5) * t.ln() - t + a.ln()
}

/// Log of a Pochhammer symbol (b)_n = b(b+1)...(b+n-1), with sign channel.
///
/// Returns (sign, ln|(b)_n|); (b)_0 = 1. Errors if any factor vanishes.
pub fn log_pochhammer(b: f64, n: usize) -> Result<(f64, f64)> {
    let mut sign = 1.0;
    let mut acc = 0.0;
    for k in 0..n {
        let f = b + k as f64;
        if f == 0.0 {
            return Err(Error::Pole(format!("pochhammer factor ({b})+{k} = 0")));
        }
        if f < 0.0 {
            sign = -sign;
        }
        acc += f.abs().ln();
    }
    Ok((sign, acc))
}

/// The square root sqrt((z-a)(z-b)) cut along [a, b], per the principal-branch
/// convention: sqrt(z-a)*sqrt(z-b) off (-inf, b], and -sqrt(a-z)*sqrt(b-z) on
/// the real axis left of a. On the cut itself the value is the limit from the
/// upper half-plane, i*sqrt(x-a)*sqrt(b-x).
pub fn branch_sqrt(z: ComplexScalar, a: f64, b: f64) -> ComplexScalar {
    debug_assert!(a < b);
    if z.im == 0.0 {
        let x = z.re;
        if x < a {
            return Complex64::new(-((a - x).sqrt() * (b - x).sqrt()), 0.0);
        }
        if x <= b {
            return Complex64::new(0.0, (x - a).sqrt() * (b - x).sqrt());
        }
        return Complex64::new((x - a).sqrt() * (x - b).sqrt(), 0.0);
    }
    (z - a).sqrt() * (z - b).sqrt()
}

/// A positively oriented circular contour.
#[derive(Debug, Clone, Copy)]
pub struct Contour {
    pub center: ComplexScalar,
    pub radius: f64,
    pub nodes: usize,
}

/// Default node count; trapezoid error decays geometrically for integrands
/// analytic in an annulus, so this is far more than enough in practice.
pub const DEFAULT_CONTOUR_NODES: usize = 2048;

impl Contour {
    pub fn circle(center: ComplexScalar, radius: f64, nodes: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Invalid(format!("contour radius {radius}")));
        }
        if nodes < 16 {
            return Err(Error::Invalid(format!("contour nodes {nodes} < 16")));
        }
        Ok(Contour { center, radius, nodes })
    }
}

/// Trapezoid rule for a contour integral over a circle.
pub fn circle_integral<F: Fn(ComplexScalar) -> ComplexScalar>(f: F, c: &Contour) -> ComplexScalar {
    let n = c.nodes;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let phi = 2.0 * PI * k as f64 / n as f64;
        let e = Complex64::from_polar(1.0, phi);
        acc += f(c.center + c.radius * e) * e;
    }
    acc * Complex64::new(0.0, 2.0 * PI * c.radius / n as f64)
}

/// Default subdivision budget for [`adaptive_integral_1d`].
pub const DEFAULT_QUAD_BUDGET: usize = 2_000_000;
const MAX_DEPTH: u32 = 64;

/// Adaptive Simpson integration of f over [a, b] to absolute tolerance `tol`.
///
/// Non-finite integrand values (integrable endpoint singularities) are
/// treated as zero; the bisection then isolates the singular point. Errors
/// once the number of subdivisions exceeds `DEFAULT_QUAD_BUDGET`.
pub fn adaptive_integral_1d<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    adaptive_integral_1d_budget(f, a, b, tol, DEFAULT_QUAD_BUDGET)
}

/// As [`adaptive_integral_1d`] with an explicit subdivision budget.
pub fn adaptive_integral_1d_budget<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    max_subdivisions: usize,
) -> Result<f64> {
    assert!(a.is_finite() && b.is_finite() && tol > 0.0);
    if a == b {
        return Ok(0.0);
    }
    let eval = |x: f64| {
        let v = f(x);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let mut used = 0usize;
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (eval(a), eval(m), eval(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&eval, a, b, fa, fm, fb, whole, tol, 0, &mut used, max_subdivisions)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    used: &mut usize,
    budget: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    *used += 1;
    if *used > budget {
        return Err(Error::Budget(format!(
            "adaptive quadrature exceeded {budget} subdivisions"
        )));
    }
    let half = 0.5 * tol;
    Ok(simpson_rec(f, a, m, fa, flm, fm, left, half, depth + 1, used, budget)?
        + simpson_rec(f, m, b, fm, frm, fb, right, half, depth + 1, used, budget)?)
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * z * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            pp = n as f64 * (z * p0 - p1) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p0 / pp;
            if (z - z1).abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Tensor-product Gauss-Legendre integration of f over [a1,b1] x [a2,b2].
///
/// Uses `nodes` points on the first axis and `nodes+3` on the second. The
/// order offset keeps log-type diagonal singularities (x = y on identical
/// intervals) off the grid — the parity flip excludes the shared midpoint
/// node — and avoids the systematic near-diagonal sampling bias that
/// consecutive-order interlacing produces for such kernels.
pub fn tensor_integral_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
    nodes: usize,
) -> f64 {
    let (x1, w1) = gauss_legendre(nodes);
    let (x2, w2) = gauss_legendre(nodes + 3);
    let (c1, h1) = (0.5 * (a1 + b1), 0.5 * (b1 - a1));
    let (c2, h2) = (0.5 * (a2 + b2), 0.5 * (b2 - a2));
    let mut acc = 0.0;
    for (xi, wi) in x1.iter().zip(&w1) {
        let u = c1 + h1 * xi;
        let mut row = 0.0;
        for (yj, wj) in x2.iter().zip(&w2) {
            row += wj * f(u, c2 + h2 * yj);
        }
        acc += wi * row;
    }
    acc * h1 * h2
}

/// Outcome of a polynomial-degree test via finite differences.
#[derive(Debug, Clone, Copy)]
pub struct DegreeCheck {
    pub within: bool,
    /// Maximum absolute (d+1)-th finite difference of the input sequence.
    pub residual: f64,
}

/// Tests whether complex values sampled at equispaced points come from a
/// polynomial of degree at most `d`, by inspecting (d+1)-th differences.
pub fn degree_at_most(values: &[ComplexScalar], d: usize, tol: f64) -> Result<DegreeCheck> {
    if values.len() < d + 2 {
        return Err(Error::TooFewPoints { need: d + 2, got: values.len() });
    }
    let mut v = values.to_vec();
    for _ in 0..=d {
        for i in 0..v.len() - 1 {
            v[i] = v[i + 1] - v[i];
        }
        v.pop();
    }
    let residual = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(DegreeCheck { within: residual < tol, residual })
}
