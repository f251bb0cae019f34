//! Closed-form evaluation of model weights and their complex Hessians.
//!
//! For φ_Γ = Σ |z^α w^β|² everything is explicit in x = |z|², y = |w|²:
//! the weight itself, the four Hessian entries, determinant, trace, the
//! eigenvalue pair and the real Laplacian Δφ = 4 tr H_φ.

use crate::newton::{classify_point, HomogeneousProfile, MonomialSet, RegionTag};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("comparability ratio {ratio} for {kind} out of [1/K, K] with K={bound} at point ({z}, {w})")]
    RatioOutOfRange {
        kind: &'static str,
        ratio: f64,
        bound: f64,
        z: f64,
        w: f64,
    },
}

/// A point of ℂ², with squared-modulus accessors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexPoint2 {
    pub z: Complex64,
    pub w: Complex64,
}

impl ComplexPoint2 {
    pub fn new(z: Complex64, w: Complex64) -> Self {
        assert!(z.is_finite() && w.is_finite());
        Self { z, w }
    }

    pub fn from_re(z: f64, w: f64) -> Self {
        Self::new(Complex64::new(z, 0.0), Complex64::new(w, 0.0))
    }

    pub fn x(&self) -> f64 {
        self.z.norm_sqr()
    }

    pub fn y(&self) -> f64 {
        self.w.norm_sqr()
    }
}

/// Value of the complex Hessian at a point with its eigen-data.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HermitianMatrixSample {
    /// Row-major [[h11, h12], [h21, h22]] with h21 = conj(h12).
    pub entries: [[Complex64; 2]; 2],
    pub det_val: f64,
    pub tr_val: f64,
    pub lambda_min: f64,
    pub mu_max: f64,
    /// Δφ = 4·tr(H_φ).
    pub laplacian: f64,
}

/// x^k with 0⁰ := 1.
pub fn powi_conv(x: f64, k: u32) -> f64 {
    if k == 0 {
        1.0
    } else {
        x.powi(k as i32)
    }
}

/// φ_Γ(z,w) = Σ_{(α,β)∈Γ} |z|^{2α} |w|^{2β}.
pub fn eval_weight(gamma: &MonomialSet, p: &ComplexPoint2) -> f64 {
    let (x, y) = (p.x(), p.y());
    gamma
        .points()
        .map(|(a, b)| powi_conv(x, a) * powi_conv(y, b))
        .sum()
}

/// ∂φ/∂z̄ and ∂φ/∂w̄ (the conjugate Wirtinger gradient of φ_Γ).
pub fn weight_dbar(gamma: &MonomialSet, p: &ComplexPoint2) -> (Complex64, Complex64) {
    // ∂|z|^{2α}/∂z̄ = α z |z|^{2(α−1)}.
    let (x, y) = (p.x(), p.y());
    let mut dz = Complex64::new(0.0, 0.0);
    let mut dw = Complex64::new(0.0, 0.0);
    for (a, b) in gamma.points() {
        if a > 0 {
            dz += p.z * (f64::from(a) * powi_conv(x, a - 1) * powi_conv(y, b));
        }
        if b > 0 {
            dw += p.w * (f64::from(b) * powi_conv(x, a) * powi_conv(y, b - 1));
        }
    }
    (dz, dw)
}

/// Complex Hessian of φ_Γ at a point, with eigen-data from the stable 2×2
/// closed form (tr² − 4 det clamped at zero to absorb roundoff).
pub fn hessian(gamma: &MonomialSet, p: &ComplexPoint2) -> HermitianMatrixSample {
    let (x, y) = (p.x(), p.y());
    let mut h11 = 0.0;
    let mut h22 = 0.0;
    let mut mixed = 0.0;
    for (a, b) in gamma.points() {
        let (af, bf) = (f64::from(a), f64::from(b));
        if a > 0 {
            h11 += af * af * powi_conv(x, a - 1) * powi_conv(y, b);
        }
        if b > 0 {
            h22 += bf * bf * powi_conv(x, a) * powi_conv(y, b - 1);
        }
        if a > 0 && b > 0 {
            mixed += af * bf * powi_conv(x, a - 1) * powi_conv(y, b - 1);
        }
    }
    let h12 = p.z.conj() * p.w * mixed;
    let tr = h11 + h22;
    let det = h11 * h22 - h12.norm_sqr();
    // Stable closed form: μ from the non-cancelling branch, λ = det/μ, so
    // λ·μ = det holds to roundoff even when λ ≪ μ.
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let mu = 0.5 * (tr + disc);
    let lambda = if mu > 0.0 { det / mu } else { 0.0 };
    HermitianMatrixSample {
        entries: [[h11.into(), h12], [h12.conj(), h22.into()]],
        det_val: det,
        tr_val: tr,
        lambda_min: lambda,
        mu_max: mu,
        laplacian: 4.0 * tr,
    }
}

/// Δφ_Γ as a function of the moduli (|z|, |w|); monotone in both arguments.
pub fn laplacian_at_moduli(gamma: &MonomialSet, z_abs: f64, w_abs: f64) -> f64 {
    let (x, y) = (z_abs * z_abs, w_abs * w_abs);
    let mut tr = 0.0;
    for (a, b) in gamma.points() {
        let (af, bf) = (f64::from(a), f64::from(b));
        if a > 0 {
            tr += af * af * powi_conv(x, a - 1) * powi_conv(y, b);
        }
        if b > 0 {
            tr += bf * bf * powi_conv(x, a) * powi_conv(y, b - 1);
        }
    }
    4.0 * tr
}

/// Min/max of an observed ratio over a point sample.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct RatioRange {
    pub min: f64,
    pub max: f64,
}

impl RatioRange {
    fn observe(&mut self, v: f64) {
        self.min = self.min.min(v);
        self.max = self.max.max(v);
    }

    fn new() -> Self {
        RatioRange {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

/// Comparability report for det(H)/φ_{Γ⁽¹⁾}, tr(H)/φ_{Γ⁽²⁾} and the
/// region-wise eigenvalue monomials.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub det_ratio: RatioRange,
    pub tr_ratio: RatioRange,
    pub lambda_ratio: RatioRange,
    /// Enumerated coefficient bound: max((αδ−βγ)²/2, α²+β²) · |Γ|².
    pub k_bound: f64,
    pub samples: usize,
}

/// Coefficient bound K from the explicit det/tr expansions.
pub fn coefficient_bound(gamma: &MonomialSet) -> f64 {
    let pts: Vec<_> = gamma.points().collect();
    let mut worst: f64 = 1.0;
    for &(a, b) in &pts {
        worst = worst.max(f64::from(a * a + b * b));
        for &(c, d) in &pts {
            let cross = f64::from(a) * f64::from(d) - f64::from(b) * f64::from(c);
            worst = worst.max(cross * cross / 2.0);
        }
    }
    worst * (pts.len() * pts.len()) as f64
}

/// Checks the approximate identities det H ≈ φ_{Γ⁽¹⁾}, tr H ≈ φ_{Γ⁽²⁾} and
/// the region-specific eigenvalue monomial at every sample point, requiring
/// all ratios to land in [1/K, K].
pub fn hessian_consistency_check(
    profile: &HomogeneousProfile,
    samples: &[ComplexPoint2],
) -> Result<ConsistencyReport, WeightError> {
    let gamma = &profile.gamma;
    let k = coefficient_bound(gamma);
    let mut det_ratio = RatioRange::new();
    let mut tr_ratio = RatioRange::new();
    let mut lambda_ratio = RatioRange::new();
    let (a1, b1) = profile.corner1;
    let (a2, b2) = profile.corner2;
    for p in samples {
        let h = hessian(gamma, p);
        let phi1 = eval_weight(&profile.gamma_1, p);
        let phi2 = eval_weight(&profile.gamma_2, p);
        let checks: [(&'static str, f64, &mut RatioRange); 2] = [
            ("det/phi_gamma1", h.det_val / phi1, &mut det_ratio),
            ("tr/phi_gamma2", h.tr_val / phi2, &mut tr_ratio),
        ];
        for (kind, ratio, range) in checks {
            if !(ratio >= 1.0 / k && ratio <= k) {
                return Err(WeightError::RatioOutOfRange {
                    kind,
                    ratio,
                    bound: k,
                    z: p.z.norm(),
                    w: p.w.norm(),
                });
            }
            range.observe(ratio);
        }
        if !profile.decoupled {
            let (za, wa) = (p.z.norm(), p.w.norm());
            let monomial = match classify_point(profile, za, wa) {
                RegionTag::E1 => Some(za.powi(2 * a1 as i32) * wa.powi(2 * (b1 as i32 - 1))),
                RegionTag::E2 => Some(wa.powi(2 * (profile.ndeg as i32 - 1))),
                RegionTag::E3 => Some(za.powi(2 * (a2 as i32 - 1)) * wa.powi(2 * b2 as i32)),
                _ => None,
            };
            if let Some(mref) = monomial {
                let ratio = h.lambda_min / mref;
                if !(ratio >= 1.0 / k && ratio <= k) {
                    return Err(WeightError::RatioOutOfRange {
                        kind: "lambda/monomial",
                        ratio,
                        bound: k,
                        z: za,
                        w: wa,
                    });
                }
                lambda_ratio.observe(ratio);
            }
        }
    }
    Ok(ConsistencyReport {
        det_ratio,
        tr_ratio,
        lambda_ratio,
        k_bound: k,
        samples: samples.len(),
    })
}

/// Exact multiplicity-weighted references for det and tr: the polynomials
/// ½Σ(αδ−βγ)² x^{α+γ−1} y^{β+δ−1} and Σ α²x^{α−1}y^β + β²x^αy^{β−1}.
/// The Hessian entries must reproduce these identically.
pub fn det_reference(gamma: &MonomialSet, p: &ComplexPoint2) -> f64 {
    let pts: Vec<_> = gamma.points().collect();
    let (x, y) = (p.x(), p.y());
    let mut acc = 0.0;
    for &(a, b) in &pts {
        for &(c, d) in &pts {
            let cross = f64::from(a) * f64::from(d) - f64::from(b) * f64::from(c);
            if cross != 0.0 {
                acc += 0.5 * cross * cross * powi_conv(x, a + c - 1) * powi_conv(y, b + d - 1);
            }
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::derive_profile;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn quad_set() -> MonomialSet {
        MonomialSet::new([(2, 0), (0, 2)]).unwrap()
    }

    fn figure_set() -> MonomialSet {
        MonomialSet::new([(16, 0), (12, 3), (8, 6), (4, 9), (0, 12)]).unwrap()
    }

    #[test]
    fn weight_values() {
        let g = MonomialSet::new([(1, 0), (0, 1)]).unwrap();
        assert_eq!(eval_weight(&g, &ComplexPoint2::from_re(1.0, 1.0)), 2.0);
        let g = MonomialSet::new([(1, 1)]).unwrap();
        let p = ComplexPoint2::new(Complex64::new(2.0, 0.0), Complex64::new(0.0, 3.0));
        assert_eq!(eval_weight(&g, &p), 36.0);
        assert_eq!(eval_weight(&figure_set(), &ComplexPoint2::from_re(1.0, 1.0)), 5.0);
    }

    #[test]
    fn hessian_constant_and_rank_one() {
        let g = MonomialSet::new([(1, 0), (0, 1)]).unwrap();
        let h = hessian(&g, &ComplexPoint2::from_re(0.7, -0.3));
        assert_eq!(h.entries[0][0], Complex64::new(1.0, 0.0));
        assert_eq!(h.entries[1][1], Complex64::new(1.0, 0.0));
        assert_eq!(h.det_val, 1.0);
        assert_eq!(h.tr_val, 2.0);
        assert_eq!(h.laplacian, 8.0);

        let g = MonomialSet::new([(1, 1)]).unwrap();
        let p = ComplexPoint2::new(Complex64::new(0.3, 0.8), Complex64::new(-1.2, 0.4));
        let h = hessian(&g, &p);
        assert!(h.det_val.abs() < 1e-14);
        assert_eq!(h.entries[0][0].re, p.y());
        assert_eq!(h.entries[1][1].re, p.x());
        let expected = p.w * p.z.conj();
        assert!((h.entries[0][1] - expected).norm() < 1e-14);
    }

    #[test]
    fn hessian_diagonal_quadratic() {
        let h = hessian(&quad_set(), &ComplexPoint2::from_re(1.0, 1.0));
        assert_eq!(h.entries[0][0].re, 4.0);
        assert_eq!(h.entries[1][1].re, 4.0);
        assert_eq!(h.det_val, 16.0);
        // The ordered-pair expansion matches: ½(16+16)·xy = 16 at (1,1).
        let dref = det_reference(&quad_set(), &ComplexPoint2::from_re(1.0, 1.0));
        assert_eq!(dref, 16.0);
    }

    fn finite_diff_hessian(gamma: &MonomialSet, p: &ComplexPoint2) -> [[Complex64; 2]; 2] {
        // H_{jk} = ∂²φ/∂ζ_j ∂ζ̄_k via Richardson-extrapolated real second
        // differences: ∂_z∂_z̄ = ¼(∂_x² + ∂_y²),
        // ∂_z∂_w̄ = ¼[(∂_{x1x2}+∂_{y1y2}) + i(∂_{x1y2}−∂_{y1x2})].
        let f = |v: [f64; 4]| {
            eval_weight(
                gamma,
                &ComplexPoint2::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])),
            )
        };
        let base = [p.z.re, p.z.im, p.w.re, p.w.im];
        let scale = 1.0 + base.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let second_at = |i: usize, j: usize, h: f64| {
            if i == j {
                let mut vp = base;
                let mut vm = base;
                vp[i] += h;
                vm[i] -= h;
                (f(vp) - 2.0 * f(base) + f(vm)) / (h * h)
            } else {
                let mut vpp = base;
                let mut vpm = base;
                let mut vmp = base;
                let mut vmm = base;
                vpp[i] += h;
                vpp[j] += h;
                vpm[i] += h;
                vpm[j] -= h;
                vmp[i] -= h;
                vmp[j] += h;
                vmm[i] -= h;
                vmm[j] -= h;
                (f(vpp) - f(vpm) - f(vmp) + f(vmm)) / (4.0 * h * h)
            }
        };
        let second = |i: usize, j: usize| {
            let h = 1e-3 * scale;
            (4.0 * second_at(i, j, h / 2.0) - second_at(i, j, h)) / 3.0
        };
        let h11 = 0.25 * (second(0, 0) + second(1, 1));
        let h22 = 0.25 * (second(2, 2) + second(3, 3));
        let re12 = 0.25 * (second(0, 2) + second(1, 3));
        let im12 = 0.25 * (second(0, 3) - second(1, 2));
        let h12 = Complex64::new(re12, im12);
        [
            [Complex64::new(h11, 0.0), h12],
            [h12.conj(), Complex64::new(h22, 0.0)],
        ]
    }

    #[test]
    fn hessian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for gamma in [
            quad_set(),
            MonomialSet::new([(2, 0), (1, 1), (0, 2)]).unwrap(),
            figure_set(),
        ] {
            for _ in 0..25 {
                let coord = |rng: &mut ChaCha8Rng| {
                    let r = rng.gen_range(0.1..1.5f64);
                    let th = rng.gen_range(0.0..std::f64::consts::TAU);
                    Complex64::from_polar(r, th)
                };
                let p = ComplexPoint2::new(coord(&mut rng), coord(&mut rng));
                let exact = hessian(&gamma, &p).entries;
                let fd = finite_diff_hessian(&gamma, &p);
                for j in 0..2 {
                    for k in 0..2 {
                        let scale = 1.0 + exact[j][k].norm();
                        assert!(
                            (exact[j][k] - fd[j][k]).norm() / scale < 1e-6,
                            "entry ({j},{k}) mismatch for Γ={gamma:?} at {p:?}: {} vs {}",
                            exact[j][k],
                            fd[j][k]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn eigen_data_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let gamma = figure_set();
        for _ in 0..50 {
            let coord = |rng: &mut ChaCha8Rng| {
                Complex64::from_polar(
                    rng.gen_range(0.1..3.0f64),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                )
            };
            let p = ComplexPoint2::new(coord(&mut rng), coord(&mut rng));
            let h = hessian(&gamma, &p);
            assert!(h.det_val >= 0.0);
            assert!(h.tr_val >= 0.0);
            assert!(h.lambda_min <= h.mu_max);
            assert!(h.lambda_min >= -1e-12 * h.tr_val.max(1.0));
            let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1.0);
            assert!(rel(h.lambda_min * h.mu_max, h.det_val) < 1e-12);
            assert!(rel(h.lambda_min + h.mu_max, h.tr_val) < 1e-12);
        }
    }

    #[test]
    fn anisotropic_homogeneity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for gamma in [quad_set(), figure_set()] {
            let profile = derive_profile(&gamma).unwrap();
            let (m, n) = (f64::from(profile.mdeg), f64::from(profile.ndeg));
            for t in [0.25f64, 1.0, 9.0] {
                for _ in 0..10 {
                    let coord = |rng: &mut ChaCha8Rng| {
                        Complex64::from_polar(
                            rng.gen_range(0.2..1.2f64),
                            rng.gen_range(0.0..std::f64::consts::TAU),
                        )
                    };
                    let p = ComplexPoint2::new(coord(&mut rng), coord(&mut rng));
                    let scaled = ComplexPoint2::new(
                        p.z * t.powf(1.0 / m),
                        p.w * t.powf(1.0 / n),
                    );
                    let lhs = eval_weight(&gamma, &scaled);
                    let rhs = t * t * eval_weight(&gamma, &p);
                    assert!((lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn consistency_check_runs() {
        let profile = derive_profile(&quad_set()).unwrap();
        let pts: Vec<_> = (1..20)
            .map(|i| ComplexPoint2::from_re(0.2 * i as f64, 0.15 * i as f64 + 0.1))
            .collect();
        let report = hessian_consistency_check(&profile, &pts).unwrap();
        // det/φ_{Γ⁽¹⁾} = 16xy/xy is exactly 16 everywhere for this set.
        assert!((report.det_ratio.min - 16.0).abs() < 1e-12);
        assert!((report.det_ratio.max - 16.0).abs() < 1e-12);
    }
}
