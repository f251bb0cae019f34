//! Energy forms on (0,1)-forms with smooth compactly supported test
//! coefficients, evaluated by tensor quadrature.
//!
//! Test coefficients are products of a radial C∞ bump with a monomial in
//! (z, z̄); value, Wirtinger derivatives, real gradient and Laplacian are all
//! analytic, so the Morrey-Kohn-Hörmander form, the magnetic Schrödinger
//! energy and the cutoff identity can be quadratured without differencing.

use super::SchrodingerError;
use crate::newton::{rat_f64, HomogeneousProfile};
use crate::weights::{eval_weight, hessian, weight_dbar, ComplexPoint2};
use crate::{quad, MonomialSet};
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

/// Radial C∞ bump times a monomial Π z_k^{h_k} z̄_k^{a_k}.
#[derive(Debug, Clone)]
pub struct BumpMonomial {
    /// Real coordinates of the bump center (length 2n).
    pub center: Vec<f64>,
    pub radius: f64,
    /// Holomorphic exponents per complex coordinate (length n).
    pub hol: Vec<u32>,
    /// Anti-holomorphic exponents per complex coordinate (length n).
    pub anti: Vec<u32>,
    pub coef: Complex64,
}

fn cpow(z: Complex64, k: u32) -> Complex64 {
    if k == 0 {
        Complex64::new(1.0, 0.0)
    } else {
        z.powu(k)
    }
}

impl BumpMonomial {
    pub fn n(&self) -> usize {
        self.hol.len()
    }

    fn zk(&self, x: &[f64], k: usize) -> Complex64 {
        Complex64::new(x[2 * k], x[2 * k + 1])
    }

    /// (g, g', g'') of the profile g(t) = e^{1 − 1/(1−t)} at t = |x−c|²/R².
    fn bump_profile(&self, x: &[f64]) -> (f64, f64, f64, f64) {
        let t: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c).powi(2))
            .sum::<f64>()
            / (self.radius * self.radius);
        if t >= 1.0 {
            return (0.0, 0.0, 0.0, t);
        }
        let s = 1.0 / (1.0 - t);
        let g = (1.0 - s).exp();
        let gp = -g * s * s;
        let gpp = g * (s * s * s * s - 2.0 * s * s * s);
        (g, gp, gpp, t)
    }

    fn monomial(&self, x: &[f64]) -> Complex64 {
        let mut p = self.coef;
        for k in 0..self.n() {
            let z = self.zk(x, k);
            p *= cpow(z, self.hol[k]) * cpow(z.conj(), self.anti[k]);
        }
        p
    }

    /// ∂(monomial)/∂z_k and ∂(monomial)/∂z̄_k.
    fn monomial_wirtinger(&self, x: &[f64], k: usize) -> (Complex64, Complex64) {
        let mut rest = self.coef;
        for j in 0..self.n() {
            if j != k {
                let z = self.zk(x, j);
                rest *= cpow(z, self.hol[j]) * cpow(z.conj(), self.anti[j]);
            }
        }
        let z = self.zk(x, k);
        let dz = if self.hol[k] == 0 {
            Complex64::default()
        } else {
            rest * f64::from(self.hol[k]) * cpow(z, self.hol[k] - 1) * cpow(z.conj(), self.anti[k])
        };
        let dzb = if self.anti[k] == 0 {
            Complex64::default()
        } else {
            rest * f64::from(self.anti[k]) * cpow(z, self.hol[k]) * cpow(z.conj(), self.anti[k] - 1)
        };
        (dz, dzb)
    }

    pub fn value(&self, x: &[f64]) -> Complex64 {
        let (g, ..) = self.bump_profile(x);
        if g == 0.0 {
            return Complex64::default();
        }
        self.monomial(x) * g
    }

    /// ∂/∂z̄_k of the product.
    pub fn dbar(&self, x: &[f64], k: usize) -> Complex64 {
        let (g, gp, _, _) = self.bump_profile(x);
        if g == 0.0 {
            return Complex64::default();
        }
        let p = self.monomial(x);
        let (_, p_dzb) = self.monomial_wirtinger(x, k);
        let r2 = self.radius * self.radius;
        let zc = self.zk(x, k) - Complex64::new(self.center[2 * k], self.center[2 * k + 1]);
        // ∂b/∂z̄_k = g'(t)·(z_k − c_k)/R².
        p_dzb * g + p * gp * zc / r2
    }

    /// Real gradient (length 2n) of the product.
    pub fn grad(&self, x: &[f64]) -> Vec<Complex64> {
        let (g, gp, _, _) = self.bump_profile(x);
        let d = x.len();
        if g == 0.0 {
            return vec![Complex64::default(); d];
        }
        let p = self.monomial(x);
        let r2 = self.radius * self.radius;
        let mut out = vec![Complex64::default(); d];
        for k in 0..self.n() {
            let (dz, dzb) = self.monomial_wirtinger(x, k);
            // ∂/∂x = ∂_z + ∂_z̄, ∂/∂y = i(∂_z − ∂_z̄).
            out[2 * k] = dz + dzb;
            out[2 * k + 1] = Complex64::i() * (dz - dzb);
        }
        for i in 0..d {
            out[i] = out[i] * g + p * (gp * 2.0 * (x[i] - self.center[i]) / r2);
        }
        out
    }

    /// Real Laplacian of the product.
    pub fn laplacian(&self, x: &[f64]) -> Complex64 {
        let (g, gp, gpp, t) = self.bump_profile(x);
        if g == 0.0 {
            return Complex64::default();
        }
        let d = x.len() as f64;
        let r2 = self.radius * self.radius;
        let p = self.monomial(x);
        // ΔP = 4 Σ_k ∂_k ∂̄_k P.
        let mut lap_p = Complex64::default();
        for k in 0..self.n() {
            if self.hol[k] >= 1 && self.anti[k] >= 1 {
                let mut rest = self.coef;
                for j in 0..self.n() {
                    if j != k {
                        let z = self.zk(x, j);
                        rest *= cpow(z, self.hol[j]) * cpow(z.conj(), self.anti[j]);
                    }
                }
                let z = self.zk(x, k);
                lap_p += rest
                    * (4.0 * f64::from(self.hol[k]) * f64::from(self.anti[k]))
                    * cpow(z, self.hol[k] - 1)
                    * cpow(z.conj(), self.anti[k] - 1);
            }
        }
        let grad_b: Vec<f64> = x
            .iter()
            .zip(&self.center)
            .map(|(a, c)| gp * 2.0 * (a - c) / r2)
            .collect();
        let lap_b = gpp * 4.0 * t / r2 + gp * 2.0 * d / r2;
        let mut cross = Complex64::default();
        for k in 0..self.n() {
            let (dz, dzb) = self.monomial_wirtinger(x, k);
            let px = dz + dzb;
            let py = Complex64::i() * (dz - dzb);
            cross += px * grad_b[2 * k] + py * grad_b[2 * k + 1];
        }
        lap_p * g + 2.0 * cross + p * lap_b
    }

    fn support_inside(&self, lo: &[f64], hi: &[f64]) -> bool {
        self.center
            .iter()
            .zip(lo.iter().zip(hi))
            .all(|(c, (l, h))| c - self.radius >= *l && c + self.radius <= *h)
    }
}

/// A (0,1)-form with one bump-monomial coefficient per d z̄_j.
#[derive(Debug, Clone)]
pub struct TestForm {
    pub coefs: Vec<BumpMonomial>,
}

impl TestForm {
    pub fn n(&self) -> usize {
        self.coefs.len()
    }
}

/// Weight of the ambient space.
#[derive(Debug, Clone)]
pub enum Weight {
    Zero,
    Model(MonomialSet),
}

/// Tensor Gauss-Legendre product rule over a box in ℝ^d.
pub struct QuadBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    nodes: Vec<Vec<f64>>,
    weights: Vec<Vec<f64>>,
}

impl QuadBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>, order: usize, panels: usize) -> Self {
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (l, h) in lo.iter().zip(&hi) {
            let (n, w) = quad::gl_panels(*l, *h, order, panels);
            nodes.push(n);
            weights.push(w);
        }
        QuadBox {
            lo,
            hi,
            nodes,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// ∫ f over the box; deterministic reduction order.
    pub fn integrate<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F) -> f64 {
        let sizes: Vec<usize> = self.nodes.iter().map(|n| n.len()).collect();
        let total: usize = sizes.iter().product();
        let vals: Vec<f64> = (0..total)
            .into_par_iter()
            .map(|flat| {
                let mut rem = flat;
                let mut x = Vec::with_capacity(sizes.len());
                let mut w = 1.0;
                for (k, &s) in sizes.iter().enumerate() {
                    let i = rem % s;
                    rem /= s;
                    x.push(self.nodes[k][i]);
                    w *= self.weights[k][i];
                }
                w * f(&x)
            })
            .collect();
        vals.iter().sum()
    }
}

fn check_support(form: &TestForm, boxq: &QuadBox) -> Result<(), SchrodingerError> {
    for c in &form.coefs {
        if !c.support_inside(&boxq.lo, &boxq.hi) {
            return Err(SchrodingerError::SupportEscapesBox);
        }
    }
    Ok(())
}

fn hessian_quadform(gamma: &MonomialSet, x: &[f64], u: &[Complex64]) -> f64 {
    let p = ComplexPoint2::new(Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
    let h = hessian(gamma, &p);
    let mut acc = Complex64::default();
    for j in 0..2 {
        for k in 0..2 {
            acc += h.entries[j][k] * u[k] * u[j].conj();
        }
    }
    acc.re
}

/// Morrey-Kohn-Hörmander energy
/// 𝓔_φ(u) = Σ_{j,k} ∫ |∂u_j/∂z̄_k|² e^{−2φ} + 2 ∫ (H_φ u, u) e^{−2φ}.
pub fn energy_form(
    weight: &Weight,
    form: &TestForm,
    boxq: &QuadBox,
) -> Result<f64, SchrodingerError> {
    check_support(form, boxq)?;
    let n = form.n();
    assert_eq!(boxq.dim(), 2 * n);
    let val = boxq.integrate(|x| {
        let mut dbar_sq = 0.0;
        for uj in &form.coefs {
            for k in 0..n {
                dbar_sq += uj.dbar(x, k).norm_sqr();
            }
        }
        match weight {
            Weight::Zero => dbar_sq,
            Weight::Model(gamma) => {
                assert_eq!(n, 2, "model weights live on ℂ²");
                let u: Vec<Complex64> = form.coefs.iter().map(|c| c.value(x)).collect();
                let p =
                    ComplexPoint2::new(Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
                let phi = eval_weight(gamma, &p);
                (dbar_sq + 2.0 * hessian_quadform(gamma, x, &u)) * (-2.0 * phi).exp()
            }
        }
    });
    Ok(val)
}

/// ∫ w(x) |u|² e^{−2φ} for a scalar weight function.
pub fn weighted_mass(
    weight: &Weight,
    form: &TestForm,
    boxq: &QuadBox,
    scale: &(dyn Fn(&[f64]) -> f64 + Sync),
) -> Result<f64, SchrodingerError> {
    check_support(form, boxq)?;
    let val = boxq.integrate(|x| {
        let mass: f64 = form.coefs.iter().map(|c| c.value(x).norm_sqr()).sum();
        let phi = match weight {
            Weight::Zero => 0.0,
            Weight::Model(gamma) => {
                let p =
                    ComplexPoint2::new(Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
                eval_weight(gamma, &p)
            }
        };
        scale(x) * mass * (-2.0 * phi).exp()
    });
    Ok(val)
}

/// Both routes of the Kohn/Schrödinger identity for a model weight on ℂ²:
/// 𝓔_φ(U_φ u) via the MKH form versus ¼(∫|∇_A u|² + ∫(Vu,u)) with
/// V = 8H_φ − 4 tr(H_φ) I₂ and A = ∇⊥φ.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EquivalenceReport {
    pub mkh_side: f64,
    pub schrodinger_side: f64,
    pub rel_discrepancy: f64,
}

pub fn equivalence_check(
    gamma: &MonomialSet,
    form: &TestForm,
    boxq: &QuadBox,
) -> Result<EquivalenceReport, SchrodingerError> {
    check_support(form, boxq)?;
    assert_eq!(form.n(), 2);
    let mkh = boxq.integrate(|x| {
        let p = ComplexPoint2::new(Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
        let (dphi_z, dphi_w) = weight_dbar(gamma, &p);
        let dphi = [dphi_z, dphi_w];
        let u: Vec<Complex64> = form.coefs.iter().map(|c| c.value(x)).collect();
        let mut acc = 0.0;
        for (j, uj) in form.coefs.iter().enumerate() {
            for k in 0..2 {
                // ∂̄_k(e^φ u_j) e^{−φ} = u_j ∂̄_k φ + ∂̄_k u_j.
                acc += (u[j] * dphi[k] + uj.dbar(x, k)).norm_sqr();
            }
        }
        acc + 2.0 * hessian_quadform(gamma, x, &u)
    });
    let mag = super::operator::SymplecticGradient {
        gamma: gamma.clone(),
        n: 2,
    };
    let schrod = boxq.integrate(|x| {
        use super::operator::Magnetic;
        let mut a = [0.0; 4];
        mag.eval(x, &mut a);
        let u: Vec<Complex64> = form.coefs.iter().map(|c| c.value(x)).collect();
        let mut kinetic = 0.0;
        for uj in &form.coefs {
            let grad = uj.grad(x);
            let val = uj.value(x);
            for i in 0..4 {
                kinetic += (grad[i] - Complex64::i() * a[i] * val).norm_sqr();
            }
        }
        let p = ComplexPoint2::new(Complex64::new(x[0], x[1]), Complex64::new(x[2], x[3]));
        let h = hessian(gamma, &p);
        let mut vq = Complex64::default();
        for j in 0..2 {
            for k in 0..2 {
                let mut vjk = 8.0 * h.entries[j][k];
                if j == k {
                    vjk -= Complex64::new(4.0 * h.tr_val, 0.0);
                }
                vq += vjk * u[k] * u[j].conj();
            }
        }
        0.25 * (kinetic + vq.re)
    });
    let rel = (mkh - schrod).abs() / mkh.abs().max(schrod.abs()).max(1e-30);
    Ok(EquivalenceReport {
        mkh_side: mkh,
        schrodinger_side: schrod,
        rel_discrepancy: rel,
    })
}

/// Scalar (n = 1) variant for φ = |z|²: V = Δφ = 4, A = (−2y, 2x).
pub fn equivalence_check_n1(
    u: &BumpMonomial,
    boxq: &QuadBox,
) -> Result<EquivalenceReport, SchrodingerError> {
    if !u.support_inside(&boxq.lo, &boxq.hi) {
        return Err(SchrodingerError::SupportEscapesBox);
    }
    let mkh = boxq.integrate(|x| {
        let z = Complex64::new(x[0], x[1]);
        let val = u.value(x);
        (val * z + u.dbar(x, 0)).norm_sqr() + 2.0 * val.norm_sqr()
    });
    let schrod = boxq.integrate(|x| {
        let a = [-2.0 * x[1], 2.0 * x[0]];
        let val = u.value(x);
        let grad = u.grad(x);
        let mut kinetic = 0.0;
        for i in 0..2 {
            kinetic += (grad[i] - Complex64::i() * a[i] * val).norm_sqr();
        }
        0.25 * (kinetic + 4.0 * val.norm_sqr())
    });
    let rel = (mkh - schrod).abs() / mkh.abs().max(schrod.abs()).max(1e-30);
    Ok(EquivalenceReport {
        mkh_side: mkh,
        schrodinger_side: schrod,
        rel_discrepancy: rel,
    })
}

/// Coercivity scan: min over a seeded test-form family of
/// 𝓔_φ(u) / ∫ μ̂² |u|² e^{−2φ} with μ̂ = 1 + |z|^σ + |w|^τ.
#[derive(Debug, Clone, Serialize)]
pub struct CoercivityScan {
    pub min_ratio: f64,
    pub ratios: Vec<f64>,
}

pub fn make_test_family(seed: u64, size: usize, spread: f64, radius: f64) -> Vec<TestForm> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..size)
        .map(|_| {
            let coefs = (0..2)
                .map(|_| {
                    let center: Vec<f64> = (0..4).map(|_| rng.gen_range(-spread..spread)).collect();
                    let hol: Vec<u32> = (0..2).map(|_| rng.gen_range(0..=2u32)).collect();
                    let anti: Vec<u32> = (0..2).map(|_| rng.gen_range(0..=1u32)).collect();
                    BumpMonomial {
                        center,
                        radius: rng.gen_range(0.6 * radius..radius),
                        hol,
                        anti,
                        coef: Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    }
                })
                .collect();
            TestForm { coefs }
        })
        .collect()
}

pub fn coercivity_scan(
    profile: &HomogeneousProfile,
    family: &[TestForm],
    boxq: &QuadBox,
) -> Result<CoercivityScan, SchrodingerError> {
    let gamma = &profile.gamma;
    let weight = Weight::Model(gamma.clone());
    let sigma = rat_f64(profile.sigma);
    let tau = rat_f64(profile.tau);
    let pw = |x: f64, e: f64| if e == 0.0 { 1.0 } else { x.powf(e) };
    let mut ratios = Vec::with_capacity(family.len());
    for form in family {
        let energy = energy_form(&weight, form, boxq)?;
        let mass = weighted_mass(&weight, form, boxq, &|x: &[f64]| {
            let za = (x[0] * x[0] + x[1] * x[1]).sqrt();
            let wa = (x[2] * x[2] + x[3] * x[3]).sqrt();
            let mu = 1.0 + pw(za, sigma) + pw(wa, tau);
            mu * mu
        })?;
        ratios.push(energy / mass);
    }
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_ratio > 0.0) {
        return Err(SchrodingerError::NonPositiveRatio(min_ratio));
    }
    Ok(CoercivityScan { min_ratio, ratios })
}

/// Flat-weight cutoff identity: for u ∈ D(□₀) and a Lipschitz η,
/// 𝓔₀(ηu) = ¼∫|∇η|²|u|² + Re(η □₀u, ηu) with □₀u = −Δu/4.
/// Returns the relative discrepancy of the two sides.
pub fn caccioppoli_discrepancy(
    form: &TestForm,
    eta: &BumpMonomial,
    boxq: &QuadBox,
) -> Result<f64, SchrodingerError> {
    check_support(form, boxq)?;
    assert!(eta.hol.iter().all(|&k| k == 0) && eta.anti.iter().all(|&k| k == 0));
    assert_eq!(eta.coef.im, 0.0, "cutoff must be real");
    let n = form.n();
    let lhs = boxq.integrate(|x| {
        let ev = eta.value(x);
        let egrad = eta.grad(x);
        let mut acc = 0.0;
        for uj in &form.coefs {
            let uv = uj.value(x);
            for k in 0..n {
                // ∂̄_k(η u_j) = u_j ∂̄_k η + η ∂̄_k u_j with
                // ∂̄_k η = ½(∂_x η + i ∂_y η).
                let deta = 0.5 * (egrad[2 * k] + Complex64::i() * egrad[2 * k + 1]);
                acc += (uv * deta + ev * uj.dbar(x, k)).norm_sqr();
            }
        }
        acc
    });
    let rhs = boxq.integrate(|x| {
        let ev = eta.value(x).re;
        let egrad = eta.grad(x);
        let grad_sq: f64 = egrad.iter().map(|g| g.norm_sqr()).sum();
        let mut mass = 0.0;
        let mut box_term = Complex64::default();
        for uj in &form.coefs {
            let uv = uj.value(x);
            mass += uv.norm_sqr();
            let box_u = -uj.laplacian(x) / 4.0;
            box_term += ev * box_u * (ev * uv).conj();
        }
        0.25 * grad_sq * mass + box_term.re
    });
    Ok((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-30))
}

/// Pointwise diamagnetic comparison |∇_A f| ≥ |∇|f||: returns the maximal
/// violation max(|∇|f|| − |∇_A f|) over the samples (f ≠ 0 there).
pub fn diamagnetic_check(
    a_field: &dyn Fn(&[f64]) -> Vec<f64>,
    f: &BumpMonomial,
    samples: &[Vec<f64>],
) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for x in samples {
        let val = f.value(x);
        if val.norm() < 1e-9 {
            continue;
        }
        let grad = f.grad(x);
        let a = a_field(x);
        let mag_sq: f64 = grad
            .iter()
            .zip(&a)
            .map(|(g, &ai)| (g - Complex64::i() * ai * val).norm_sqr())
            .sum();
        // ∇|f| = Re(conj(f)·∇f)/|f|.
        let modgrad_sq: f64 = grad
            .iter()
            .map(|g| ((val.conj() * g).re / val.norm()).powi(2))
            .sum();
        worst = worst.max(modgrad_sq.sqrt() - mag_sq.sqrt());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::derive_profile;

    fn scalar_bump(center: [f64; 2], radius: f64) -> BumpMonomial {
        BumpMonomial {
            center: center.to_vec(),
            radius,
            hol: vec![0],
            anti: vec![0],
            coef: Complex64::new(1.0, 0.0),
        }
    }

    #[test]
    fn bump_derivatives_match_differences() {
        let b = BumpMonomial {
            center: vec![0.1, -0.2, 0.3, 0.0],
            radius: 1.5,
            hol: vec![1, 2],
            anti: vec![1, 0],
            coef: Complex64::new(0.7, -0.4),
        };
        let x = vec![0.3, 0.1, -0.2, 0.4];
        let h = 1e-5;
        let grad = b.grad(&x);
        for i in 0..4 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            let fd = (b.value(&xp) - b.value(&xm)) / (2.0 * h);
            assert!((grad[i] - fd).norm() < 1e-8, "grad[{i}]");
        }
        // dbar against gradient combination.
        for k in 0..2 {
            let expect = 0.5 * (grad[2 * k] + Complex64::i() * grad[2 * k + 1]);
            assert!((b.dbar(&x, k) - expect).norm() < 1e-12);
        }
        // Laplacian against second differences.
        let mut lap = Complex64::default();
        for i in 0..4 {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            lap += (b.value(&xp) - 2.0 * b.value(&x) + b.value(&xm)) / (h * h);
        }
        assert!((b.laplacian(&x) - lap).norm() < 1e-4 * (1.0 + lap.norm()));
    }

    #[test]
    fn flat_energy_is_quarter_gradient() {
        // φ ≡ 0, u = (f, 0): 𝓔 = ¼ ∫ |∇f|².
        let f = BumpMonomial {
            center: vec![0.0; 4],
            radius: 1.2,
            hol: vec![0, 0],
            anti: vec![0, 0],
            coef: Complex64::new(1.0, 0.0),
        };
        let zero2 = BumpMonomial {
            coef: Complex64::default(),
            ..f.clone()
        };
        let form = TestForm {
            coefs: vec![f.clone(), zero2],
        };
        let boxq = QuadBox::new(vec![-1.3; 4], vec![1.3; 4], 16, 1);
        let e = energy_form(&Weight::Zero, &form, &boxq).unwrap();
        let grad_int = boxq.integrate(|x| f.grad(x).iter().map(|g| g.norm_sqr()).sum::<f64>());
        assert!(
            (e - 0.25 * grad_int).abs() < 1e-8 * grad_int,
            "{e} vs {}",
            0.25 * grad_int
        );
    }

    #[test]
    fn quadratic_scaling() {
        let form = TestForm {
            coefs: vec![
                BumpMonomial {
                    center: vec![0.2, 0.0, -0.1, 0.0],
                    radius: 1.0,
                    hol: vec![1, 0],
                    anti: vec![0, 0],
                    coef: Complex64::new(0.5, 0.1),
                },
                BumpMonomial {
                    center: vec![0.0, 0.1, 0.0, -0.2],
                    radius: 1.0,
                    hol: vec![0, 1],
                    anti: vec![0, 0],
                    coef: Complex64::new(-0.3, 0.2),
                },
            ],
        };
        let doubled = TestForm {
            coefs: form
                .coefs
                .iter()
                .map(|c| BumpMonomial {
                    coef: 2.0 * c.coef,
                    ..c.clone()
                })
                .collect(),
        };
        let gamma = MonomialSet::new([(2, 0), (1, 1), (0, 2)]).unwrap();
        let boxq = QuadBox::new(vec![-1.5; 4], vec![1.5; 4], 14, 1);
        let w = Weight::Model(gamma);
        let e1 = energy_form(&w, &form, &boxq).unwrap();
        let e2 = energy_form(&w, &doubled, &boxq).unwrap();
        assert!((e2 - 4.0 * e1).abs() < 1e-12 * e2.abs().max(1.0));
    }

    #[test]
    fn support_escape_detected() {
        let form = TestForm {
            coefs: vec![
                BumpMonomial {
                    center: vec![0.0; 4],
                    radius: 3.0,
                    hol: vec![0, 0],
                    anti: vec![0, 0],
                    coef: Complex64::new(1.0, 0.0),
                };
                2
            ],
        };
        let boxq = QuadBox::new(vec![-1.0; 4], vec![1.0; 4], 8, 1);
        assert!(matches!(
            energy_form(&Weight::Zero, &form, &boxq),
            Err(SchrodingerError::SupportEscapesBox)
        ));
    }

    #[test]
    fn equivalence_flat_scalar() {
        // φ = |z|², scalar bump: discrepancy well below 1e−4.
        let u = scalar_bump([0.3, -0.2], 1.4);
        let boxq = QuadBox::new(vec![-2.0; 2], vec![2.0; 2], 32, 2);
        let rep = equivalence_check_n1(&u, &boxq).unwrap();
        assert!(
            rep.rel_discrepancy < 1e-6,
            "n=1 discrepancy {}",
            rep.rel_discrepancy
        );
    }

    #[test]
    fn equivalence_model_weight() {
        let gamma = MonomialSet::new([(2, 0), (0, 2)]).unwrap();
        let form = TestForm {
            coefs: vec![
                BumpMonomial {
                    center: vec![0.25, 0.0, -0.15, 0.1],
                    radius: 1.1,
                    hol: vec![1, 0],
                    anti: vec![0, 1],
                    coef: Complex64::new(0.8, -0.1),
                },
                BumpMonomial {
                    center: vec![-0.1, 0.2, 0.05, 0.0],
                    radius: 1.0,
                    hol: vec![0, 0],
                    anti: vec![1, 0],
                    coef: Complex64::new(0.4, 0.6),
                },
            ],
        };
        let boxq = QuadBox::new(vec![-1.6; 4], vec![1.6; 4], 20, 1);
        let rep = equivalence_check(&gamma, &form, &boxq).unwrap();
        assert!(
            rep.rel_discrepancy < 1e-4,
            "model discrepancy {}",
            rep.rel_discrepancy
        );
    }

    #[test]
    fn coercivity_decoupled_lower_bound() {
        // Γ = {(1,0),(0,1)}: H = I so 𝓔 ≥ 2‖u‖²_φ and μ̂ ≡ 3, so every ratio
        // is at least 2/9.
        let profile = derive_profile(&MonomialSet::new([(1, 0), (0, 1)]).unwrap()).unwrap();
        let family = make_test_family(99, 8, 0.5, 1.0);
        let boxq = QuadBox::new(vec![-1.8; 4], vec![1.8; 4], 14, 1);
        let scan = coercivity_scan(&profile, &family, &boxq).unwrap();
        assert!(
            scan.min_ratio >= 2.0 / 9.0 * (1.0 - 1e-6),
            "min ratio {}",
            scan.min_ratio
        );
    }

    #[test]
    fn caccioppoli_identity_flat() {
        let form = TestForm {
            coefs: vec![
                BumpMonomial {
                    center: vec![0.1, 0.0, 0.0, 0.0],
                    radius: 1.0,
                    hol: vec![1, 1],
                    anti: vec![0, 0],
                    coef: Complex64::new(1.0, 0.3),
                },
                BumpMonomial {
                    center: vec![0.0, 0.0, 0.1, 0.0],
                    radius: 0.9,
                    hol: vec![0, 0],
                    anti: vec![1, 1],
                    coef: Complex64::new(-0.5, 0.2),
                },
            ],
        };
        let eta = BumpMonomial {
            center: vec![0.0; 4],
            radius: 1.6,
            hol: vec![0, 0],
            anti: vec![0, 0],
            coef: Complex64::new(1.0, 0.0),
        };
        let boxq = QuadBox::new(vec![-1.7; 4], vec![1.7; 4], 18, 1);
        let disc = caccioppoli_discrepancy(&form, &eta, &boxq).unwrap();
        assert!(disc < 1e-6, "cutoff identity discrepancy {disc}");
    }

    #[test]
    fn diamagnetic_cases() {
        // A = 0 with a real f: equality.
        let f = scalar_bump([0.0, 0.0], 1.5);
        let samples: Vec<Vec<f64>> = (0..50)
            .map(|i| {
                let t = i as f64 / 50.0 * std::f64::consts::TAU;
                vec![0.6 * t.cos(), 0.6 * t.sin()]
            })
            .collect();
        let w = diamagnetic_check(&|_x| vec![0.0, 0.0], &f, &samples);
        assert!(w.abs() < 1e-10);
        // Gauge-aligned phase: f = z·b has θ = arg z, A = ∇θ gives equality.
        let fz = BumpMonomial {
            center: vec![0.0, 0.0],
            radius: 1.5,
            hol: vec![1],
            anti: vec![0],
            coef: Complex64::new(1.0, 0.0),
        };
        let a_gauge = |x: &[f64]| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            vec![-x[1] / r2, x[0] / r2]
        };
        let w = diamagnetic_check(&a_gauge, &fz, &samples);
        assert!(w.abs() < 1e-9, "gauge-aligned violation {w}");
        // Random A: no violation beyond roundoff.
        let a_rand = |x: &[f64]| vec![1.3 * x[1] - 0.2, -0.7 * x[0] + 0.4 * x[1]];
        let w = diamagnetic_check(&a_rand, &fz, &samples);
        assert!(w <= 1e-8, "violation {w}");
    }
}
