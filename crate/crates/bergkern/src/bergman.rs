//! Weighted Bergman kernels for model weights.
//!
//! Monomials are orthogonal in A²(ℂ², φ_Γ) because φ_Γ depends only on the
//! moduli, so the kernel is the diagonal expansion
//! B(p,q) = Σ_{a,b} (z_p z̄_q)^a (w_p w̄_q)^b / c_ab with squared norms
//! c_ab = π² ∫∫_{ℝ₊²} x^a y^b e^{−2 p_Γ(x,y)} dx dy.  Truncation tails are
//! certified against a closed-form product minorant of the moments.

use crate::newton::{derive_profile, HomogeneousProfile};
use crate::quad::{self, QuadError};
use crate::radius::{MetricGraph, RadiusField};
use crate::weights::{eval_weight, powi_conv, ComplexPoint2};
use crate::MonomialSet;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BergmanError {
    #[error("moment quadrature failed for ({a},{b}): {source}")]
    QuadratureNonConvergent {
        a: u32,
        b: u32,
        source: QuadError,
    },
    #[error("truncation tail {tail:.3e} not certifiable below {target:.3e} at the given points; raise the cutoff")]
    TailNotCertified { tail: f64, target: f64 },
    #[error("no ε ≥ 0 exhibits decay on the sample (worst pair {worst_pair})")]
    InsufficientDecay { worst_pair: usize },
    #[error("exponent set is not homogeneous: {0}")]
    BadWeight(#[from] crate::newton::NewtonError),
}

/// Squared monomial norms ‖z^a w^b‖²_φ on the index square a, b ≤ cutoff.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MomentTable {
    pub gamma: MonomialSet,
    pub cutoff: u32,
    pub quad_tolerance: f64,
    moments: HashMap<(u32, u32), f64>,
    /// Corner degrees of the source set (original coordinates).
    mdeg: u32,
    ndeg: u32,
    /// AM-GM majorant weights: p_Γ ≤ wx·x^m + wy·y^n with wx = Σ α/m etc.
    wx: f64,
    wy: f64,
}

impl MomentTable {
    pub fn moment(&self, a: u32, b: u32) -> Option<f64> {
        self.moments.get(&(a, b)).copied()
    }

    pub fn entries(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        let mut keys: Vec<_> = self.moments.keys().copied().collect();
        keys.sort();
        keys.into_iter().map(|k| (k, self.moments[&k]))
    }
}

/// Truncated kernel value with its certified tail bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct KernelValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub terms_used: usize,
}

/// Upper truncation for ∫ x^a e^{−2x^m}: the point beyond the peak where the
/// integrand has dropped by e⁻⁴⁰.
fn trunc_bound(a: u32, m: u32) -> f64 {
    let af = f64::from(a);
    let mf = f64::from(m);
    let g = |x: f64| {
        if x <= 0.0 {
            f64::NEG_INFINITY
        } else {
            af * x.ln() - 2.0 * x.powf(mf)
        }
    };
    let peak = if a == 0 {
        1.0
    } else {
        (af / (2.0 * mf)).powf(1.0 / mf).max(1e-6)
    };
    let target = g(peak) - 40.0;
    let mut hi = peak.max(1.0);
    while g(hi) > target {
        hi *= 2.0;
    }
    let mut lo = peak;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Builds the moment table on the index square a, b ≤ cutoff by adaptive
/// quadrature at relative tolerance 1e-10.
pub fn compute_moments(gamma: &MonomialSet, cutoff: u32) -> Result<MomentTable, BergmanError> {
    derive_profile(gamma)?;
    let mdeg = gamma.points().find(|&(_, b)| b == 0).unwrap().0;
    let ndeg = gamma.points().find(|&(a, _)| a == 0).unwrap().1;
    let rel_tol = 1e-10;
    let pairs: Vec<(u32, u32)> = (0..=cutoff)
        .flat_map(|a| (0..=cutoff).map(move |b| (a, b)))
        .collect();
    let pts: Vec<(u32, u32)> = gamma.points().collect();
    let results: Vec<Result<((u32, u32), f64), BergmanError>> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let xm = trunc_bound(a, mdeg);
            let ym = trunc_bound(b, ndeg);
            let f = |x: f64, y: f64| {
                let p: f64 = pts
                    .iter()
                    .map(|&(al, be)| powi_conv(x, al) * powi_conv(y, be))
                    .sum();
                powi_conv(x, a) * powi_conv(y, b) * (-2.0 * p).exp()
            };
            quad::integrate2_adaptive(f, 0.0, xm, 0.0, ym, rel_tol, 1e-300)
                .map(|v| ((a, b), PI * PI * v))
                .map_err(|source| BergmanError::QuadratureNonConvergent { a, b, source })
        })
        .collect();
    let mut moments = HashMap::new();
    for r in results {
        let ((a, b), v) = r?;
        moments.insert((a, b), v);
    }
    let (mut wx, mut wy) = (0.0, 0.0);
    for (a, b) in gamma.points() {
        wx += f64::from(a) / f64::from(mdeg);
        wy += f64::from(b) / f64::from(ndeg);
    }
    Ok(MomentTable {
        gamma: gamma.clone(),
        cutoff,
        quad_tolerance: rel_tol,
        moments,
        mdeg,
        ndeg,
        wx,
        wy,
    })
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 7.
    const COEF: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        let pi = PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

impl MomentTable {
    /// Certified bound on the off-square tail Σ_{a > N or b > N} s1^a s2^b / c_ab,
    /// or None when the majorant's term ratios have not dropped below 1/2 at
    /// the cutoff.
    ///
    /// By weighted AM-GM (α/m + β/n = weight 1 splits each monomial),
    /// p_Γ ≤ wx·x^m + wy·y^n, so c_ab ≥ π² G_x(a) G_y(b) with
    /// G_x(a) = ∫ x^a e^{−2wx x^m} dx = Γ((a+1)/m) / (m (2wx)^{(a+1)/m}).
    /// The majorant terms Ax(a)·Ay(b) = s1^a s2^b/(π² G_x G_y) dominate the
    /// true terms; their index ratios decrease (log-convexity of ln Γ), so a
    /// ratio ≤ 1/2 at the cutoff certifies geometric decay beyond it.
    fn tail_bound(&self, s1: f64, s2: f64) -> Option<f64> {
        let n = f64::from(self.cutoff);
        let lng = |k: f64, deg: f64, w: f64| {
            ln_gamma((k + 1.0) / deg) - deg.ln() - (k + 1.0) / deg * (2.0 * w).ln()
        };
        let s1 = s1.max(1e-150);
        let s2 = s2.max(1e-150);
        let lax = |a: f64| a * s1.ln() - lng(a, f64::from(self.mdeg), self.wx) - PI.ln();
        let lay = |b: f64| b * s2.ln() - lng(b, f64::from(self.ndeg), self.wy) - PI.ln();
        let rx = (lax(n + 1.0) - lax(n)).exp();
        let ry = (lay(n + 1.0) - lay(n)).exp();
        if !(rx <= 0.5 && ry <= 0.5) {
            return None;
        }
        let sum_full = |f: &dyn Fn(f64) -> f64| {
            let mut s = 0.0;
            let mut k = 0.0;
            while k <= n {
                s += f(k).exp();
                k += 1.0;
            }
            s + 2.0 * f(n + 1.0).exp()
        };
        let sx = sum_full(&lax);
        let sy = sum_full(&lay);
        let tail_x = 2.0 * lax(n + 1.0).exp();
        let tail_y = 2.0 * lay(n + 1.0).exp();
        Some(tail_x * sy + tail_y * sx)
    }
}

/// Evaluates the truncated kernel at (p, q) with a certified tail below
/// `tol`; errors with `TailNotCertified` when the cutoff cannot support the
/// requested points.
pub fn kernel_eval(
    table: &MomentTable,
    p: &ComplexPoint2,
    q: &ComplexPoint2,
    tol: f64,
) -> Result<KernelValue, BergmanError> {
    let s1 = p.z.norm() * q.z.norm();
    let s2 = p.w.norm() * q.w.norm();
    let tail = table
        .tail_bound(s1, s2)
        .filter(|&t| t <= tol)
        .ok_or_else(|| BergmanError::TailNotCertified {
            tail: table.tail_bound(s1, s2).unwrap_or(f64::INFINITY),
            target: tol,
        })?;
    let zz = p.z * q.z.conj();
    let ww = p.w * q.w.conj();
    let mut value = Complex64::new(0.0, 0.0);
    let mut terms = 0usize;
    for a in 0..=table.cutoff {
        for b in 0..=table.cutoff {
            let c = table.moment(a, b).expect("table is complete");
            let term = cpow(zz, a) * cpow(ww, b) / c;
            value += term;
            terms += 1;
        }
    }
    Ok(KernelValue {
        value,
        tail_bound: tail,
        terms_used: terms,
    })
}

fn cpow(z: Complex64, k: u32) -> Complex64 {
    if k == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        z.powu(k)
    }
}

/// Reproducing-property discrepancy for the monomial h = z^a w^b at p.
///
/// Analytic route: orthogonality collapses (h, k_p)_φ to h(p).  Numerical
/// route: recompute the radial moment with a fixed tensor Gauss-Legendre
/// rule (independent of the adaptive table) and form h(p)·I_gl·π²/c_ab.
pub fn reproducing_check(table: &MomentTable, monomial: (u32, u32), p: &ComplexPoint2) -> f64 {
    let (a, b) = monomial;
    assert!(a + b <= table.cutoff, "monomial degree must sit below the cutoff");
    let exact = cpow(p.z, a) * cpow(p.w, b);
    let xm = trunc_bound(a, table.mdeg);
    let ym = trunc_bound(b, table.ndeg);
    let (xs, wx) = quad::gl_panels(0.0, xm, 40, 8);
    let (ys, wy) = quad::gl_panels(0.0, ym, 40, 8);
    let pts: Vec<(u32, u32)> = table.gamma.points().collect();
    let mut integral = 0.0;
    for (&x, &wxi) in xs.iter().zip(&wx) {
        let mut inner = 0.0;
        for (&y, &wyi) in ys.iter().zip(&wy) {
            let pv: f64 = pts
                .iter()
                .map(|&(al, be)| powi_conv(x, al) * powi_conv(y, be))
                .sum();
            inner += wyi * powi_conv(x, a) * powi_conv(y, b) * (-2.0 * pv).exp();
        }
        integral += wxi * inner;
    }
    let c_ab = table.moment(a, b).expect("below cutoff");
    let via_quad = exact * (PI * PI * integral / c_ab);
    (via_quad - exact).norm() / (1.0 + exact.norm())
}

/// Decay-bound fit report: the bound
/// log|B| − φ(p) − φ(q) + 2 log ρ(p) + 2 log ρ(q) − log(κ(p)/ρ(p)) ≤ logC − ε d_κ(p,q)
/// holds on every sample pair with the fitted (ε, logC).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundFitReport {
    pub epsilon: f64,
    pub log_c: f64,
    pub worst_pair: usize,
    pub pairs: usize,
    /// Per-pair (d_κ, L) values entering the fit.
    pub samples: Vec<(f64, f64)>,
}

/// Fits the best (logC, ε ≥ 0) by golden-section on the Chebyshev spread of
/// L + εd.  Pairs must be phase-aligned (nonnegative real coordinates) so the
/// 2D moduli metric graph computes d_κ.
pub fn bound_fit(
    table: &MomentTable,
    profile: &HomogeneousProfile,
    rho_field: &RadiusField,
    kappa_field: &RadiusField,
    graph: &MetricGraph,
    pairs: &[(ComplexPoint2, ComplexPoint2)],
    kernel_tol: f64,
) -> Result<BoundFitReport, BergmanError> {
    let _ = profile;
    assert!(!pairs.is_empty());
    for (p, q) in pairs {
        for c in [p.z, p.w, q.z, q.w] {
            assert!(c.im == 0.0 && c.re >= 0.0, "pairs must be phase-aligned");
        }
    }
    // Distances from each distinct source node.
    let grid = &rho_field.grid;
    let mut dist_cache: HashMap<usize, Vec<f64>> = HashMap::new();
    let mut samples = Vec::with_capacity(pairs.len());
    for (p, q) in pairs {
        let b = kernel_eval(table, p, q, kernel_tol)?;
        let node_p = grid.nearest(&[p.z.re, p.w.re]);
        let node_q = grid.nearest(&[q.z.re, q.w.re]);
        let d = {
            let dists = dist_cache
                .entry(node_p)
                .or_insert_with(|| graph.distances(node_p));
            dists[node_q]
        };
        let rho_p = rho_field.values[node_p];
        let rho_q = rho_field.values[node_q];
        let kap_p = kappa_field.values[node_p];
        let l = b.value.norm().max(1e-300).ln() - eval_weight(&table.gamma, p)
            - eval_weight(&table.gamma, q)
            + 2.0 * rho_p.ln()
            + 2.0 * rho_q.ln()
            - (kap_p / rho_p).ln();
        samples.push((d, l));
    }
    let spread = |eps: f64| {
        let vals = samples.iter().map(|&(d, l)| l + eps * d);
        let mut mn = f64::INFINITY;
        let mut mx = f64::NEG_INFINITY;
        for v in vals {
            mn = mn.min(v);
            mx = mx.max(v);
        }
        mx - mn
    };
    // Golden-section minimization of the (convex) spread over ε ∈ [0, hi].
    let d_span = samples
        .iter()
        .map(|s| s.0)
        .fold(f64::NEG_INFINITY, f64::max)
        - samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let l_span = spread(0.0);
    let mut lo = 0.0f64;
    let mut hi = if d_span > 1e-12 {
        2.0 * l_span / d_span + 1.0
    } else {
        1.0
    };
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if spread(x1) <= spread(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    let epsilon = 0.5 * (lo + hi);
    let log_c = samples
        .iter()
        .map(|&(d, l)| l + epsilon * d)
        .fold(f64::NEG_INFINITY, f64::max);
    let worst_pair = samples
        .iter()
        .enumerate()
        .max_by(|a, b| {
            let va = a.1 .1 + epsilon * a.1 .0;
            let vb = b.1 .1 + epsilon * b.1 .0;
            va.partial_cmp(&vb).unwrap()
        })
        .map(|(i, _)| i)
        .unwrap();
    if epsilon <= 1e-9 {
        return Err(BergmanError::InsufficientDecay { worst_pair });
    }
    // The bound holds pointwise by construction of logC; assert it anyway.
    for &(d, l) in &samples {
        assert!(l <= log_c - epsilon * d + 1e-9);
    }
    Ok(BoundFitReport {
        epsilon,
        log_c,
        worst_pair,
        pairs: pairs.len(),
        samples,
    })
}
