//! Discretized magnetic matrix Schrödinger operators and the energy forms
//! tying them to weighted Kohn Laplacians.
//!
//! `operator` assembles sparse Hermitian lattice operators with link phases,
//! `eigen` computes extremal eigenvalues, `forms` evaluates the
//! Morrey-Kohn-Hörmander energy and the coercivity/equivalence experiments.

mod eigen;
mod forms;
mod operator;

pub use eigen::{extremal_eigenvalues, SpectralReport};
pub use forms::{
    caccioppoli_discrepancy, coercivity_scan, diamagnetic_check, energy_form, equivalence_check,
    equivalence_check_n1, make_test_family, weighted_mass, BumpMonomial, CoercivityScan,
    EquivalenceReport, QuadBox, TestForm, Weight,
};
pub use operator::{
    assemble_operator, mu_mass_diagonal, ConstPotential, CsrHermitian, GridOperator,
    HermitianPotential, KohnPotential, Magnetic, PolyPotential, SymplecticGradient, ZeroMagnetic,
};

use crate::poly::Poly;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SchrodingerError {
    #[error("grid of {dofs} degrees of freedom exceeds the memory budget {budget}")]
    BudgetExceeded { dofs: usize, budget: usize },
    #[error("eigensolver failed to converge within {0} iterations")]
    NoConvergence(usize),
    #[error("test data support escapes the quadrature box")]
    SupportEscapesBox,
    #[error("coercivity ratio {0} is non-positive")]
    NonPositiveRatio(f64),
}

/// The rank-degenerate 1D example potential [[x⁴, x⁵], [x⁵, x⁶]].
pub fn v0_potential() -> PolyPotential {
    let x4 = Poly::monomial(1, 0, 4, 1);
    let x5 = Poly::monomial(1, 0, 5, 1);
    let x6 = Poly::monomial(1, 0, 6, 1);
    PolyPotential::new(1, 2, vec![x4, x5.clone(), x5, x6])
}

/// One row of a discreteness profile: the exact cube integral of the
/// potential around a center and its minimal eigenvalue.
#[derive(Debug, Clone, Serialize)]
pub struct DiscretenessRow {
    pub center: Vec<f64>,
    /// Row-major entries of ∫_Q V as f64.
    pub integral: Vec<f64>,
    pub lambda: f64,
    /// Exact rational λ when the integral matrix is diagonal.
    pub lambda_exact: Option<(i128, i128)>,
}

/// Minimal eigenvalue of ∫_{Q(x,ℓ)} V for each requested center, with the
/// integrals of the polynomial entries evaluated exactly.
pub fn discreteness_profile(
    potential: &PolyPotential,
    side: (i64, i64),
    centers: &[Vec<(i64, i64)>],
) -> Vec<DiscretenessRow> {
    let m = potential.size();
    let side_rat = BigRational::new(side.0.into(), side.1.into());
    centers
        .iter()
        .map(|c| {
            let center_rat: Vec<BigRational> = c
                .iter()
                .map(|&(n, d)| BigRational::new(n.into(), d.into()))
                .collect();
            let ints: Vec<BigRational> = potential
                .entries()
                .iter()
                .map(|p| p.integrate_cube(&center_rat, &side_rat))
                .collect();
            let integral: Vec<f64> = ints.iter().map(|r| r.to_f64().unwrap()).collect();
            let diagonal = (0..m).all(|i| {
                (0..m).all(|j| i == j || ints[i * m + j].is_zero())
            });
            let lambda_exact = if diagonal {
                let min = (0..m)
                    .map(|i| ints[i * m + i].clone())
                    .min()
                    .expect("m ≥ 1");
                to_i128_pair(&min)
            } else {
                None
            };
            let lambda = min_eigenvalue_sym(&integral, m);
            DiscretenessRow {
                center: c
                    .iter()
                    .map(|&(n, d)| n as f64 / d as f64)
                    .collect(),
                integral,
                lambda,
                lambda_exact,
            }
        })
        .collect()
}

fn to_i128_pair(r: &BigRational) -> Option<(i128, i128)> {
    let n: BigInt = r.numer().clone();
    let d: BigInt = r.denom().clone();
    Some((n.to_i128()?, d.to_i128()?))
}

/// Minimal eigenvalue of a small real symmetric matrix (row-major).
fn min_eigenvalue_sym(entries: &[f64], m: usize) -> f64 {
    if m == 1 {
        return entries[0];
    }
    if m == 2 {
        let (a, b, d) = (entries[0], entries[1], entries[3]);
        let tr = a + d;
        let det = a * d - b * b;
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        return 0.5 * (tr - disc);
    }
    let mat = nalgebra::DMatrix::from_row_slice(m, m, entries);
    mat.symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &v| acc.min(v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn v0_cube_integral_at_origin() {
        let rows = discreteness_profile(&v0_potential(), (1, 1), &[vec![(0, 1)]]);
        let r = &rows[0];
        assert_eq!(r.lambda_exact, Some((1, 448)));
        assert!((r.integral[0] - 1.0 / 80.0).abs() < 1e-16);
        assert!((r.integral[3] - 1.0 / 448.0).abs() < 1e-16);
        assert_eq!(r.integral[1], 0.0);
    }

    #[test]
    fn v0_far_field_ratio() {
        let rows = discreteness_profile(&v0_potential(), (1, 1), &[vec![(100, 1)]]);
        let lam = rows[0].lambda;
        let ratio = lam / 100.0f64.powi(2);
        assert!(
            (ratio - 1.0 / 12.0).abs() < 0.02 / 12.0,
            "λ/x² = {ratio} vs 1/12"
        );
        assert!(ratio >= 1.0 / 12.0 * 0.98);
    }

    #[test]
    fn scalar_square_exact() {
        // V = x² I₂: λ(∫_{Q(x,1)}) = x² + 1/12.
        let x2 = Poly::monomial(1, 0, 2, 1);
        let zero = Poly::zero(1);
        let pot = PolyPotential::new(1, 2, vec![x2.clone(), zero.clone(), zero, x2]);
        let rows = discreteness_profile(&pot, (1, 1), &[vec![(3, 1)], vec![(0, 1)]]);
        assert!((rows[0].lambda - (9.0 + 1.0 / 12.0)).abs() < 1e-12);
        assert!((rows[1].lambda - 1.0 / 12.0).abs() < 1e-16);
    }
}
