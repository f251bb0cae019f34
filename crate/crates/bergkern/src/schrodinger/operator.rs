//! Lattice discretization of −Δ_A + V on a rectangular box with Dirichlet
//! boundary, as a sparse Hermitian matrix.
//!
//! The magnetic coupling uses link phases: the forward difference along e_k
//! is (ψ(x+h e_k) e^{−i h A_k(x + h e_k/2)} − ψ(x))/h, so the kinetic
//! quadratic form is the sum of |link difference|² over edges (edges to the
//! boundary see ψ = 0).

use super::SchrodingerError;
use crate::newton::rat_f64;
use crate::poly::Poly;
use crate::radius::Grid;
use crate::weights::powi_conv;
use crate::MonomialSet;
use num_complex::Complex64;
use rayon::prelude::*;

/// Hermitian matrix-valued potential evaluator.
pub trait HermitianPotential: Sync {
    /// Spatial dimension d.
    fn dim(&self) -> usize;
    /// Number of components m.
    fn size(&self) -> usize;
    /// Writes the m×m Hermitian value at x, row-major.
    fn eval(&self, x: &[f64], out: &mut [Complex64]);
}

/// Magnetic potential evaluator A: ℝ^d → ℝ^d.
pub trait Magnetic: Sync {
    fn eval(&self, x: &[f64], out: &mut [f64]);
}

pub struct ZeroMagnetic;

impl Magnetic for ZeroMagnetic {
    fn eval(&self, _x: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
}

/// A = ∇⊥φ for a model weight on ℂ^n (n = 1 or 2), in the real coordinates
/// (x₁, y₁, …, xₙ, yₙ).
pub struct SymplecticGradient {
    pub gamma: MonomialSet,
    pub n: usize,
}

impl Magnetic for SymplecticGradient {
    fn eval(&self, x: &[f64], out: &mut [f64]) {
        // φ = p_Γ(|z|², |w|²): ∂φ/∂x₁ = 2x₁ ∂p/∂x etc., and for n = 1 the
        // set is read as a polynomial in |z|² alone.
        match self.n {
            1 => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                let mut px = 0.0;
                for (a, _) in self.gamma.points() {
                    if a > 0 {
                        px += f64::from(a) * powi_conv(r2, a - 1);
                    }
                }
                out[0] = -2.0 * x[1] * px;
                out[1] = 2.0 * x[0] * px;
            }
            2 => {
                let xz = x[0] * x[0] + x[1] * x[1];
                let yw = x[2] * x[2] + x[3] * x[3];
                let mut px = 0.0;
                let mut py = 0.0;
                for (a, b) in self.gamma.points() {
                    if a > 0 {
                        px += f64::from(a) * powi_conv(xz, a - 1) * powi_conv(yw, b);
                    }
                    if b > 0 {
                        py += f64::from(b) * powi_conv(xz, a) * powi_conv(yw, b - 1);
                    }
                }
                out[0] = -2.0 * x[1] * px;
                out[1] = 2.0 * x[0] * px;
                out[2] = -2.0 * x[3] * py;
                out[3] = 2.0 * x[2] * py;
            }
            n => panic!("unsupported complex dimension {n}"),
        }
    }
}

/// m×m potential with polynomial entries (real coefficients, symmetric
/// layout).  Verifies Hermitian symmetry of the entry grid on construction.
pub struct PolyPotential {
    dim: usize,
    m: usize,
    entries: Vec<Poly>,
}

impl PolyPotential {
    pub fn new(dim: usize, m: usize, entries: Vec<Poly>) -> Self {
        assert_eq!(entries.len(), m * m);
        for p in &entries {
            assert_eq!(p.dim, dim);
        }
        for i in 0..m {
            for j in (i + 1)..m {
                assert_eq!(
                    entries[i * m + j],
                    entries[j * m + i],
                    "potential entries must be symmetric"
                );
            }
        }
        PolyPotential { dim, m, entries }
    }

    pub fn entries(&self) -> &[Poly] {
        &self.entries
    }

    /// λ(V(x)) ≥ −tol spot check over sample points.
    pub fn verify_nonnegative(&self, samples: &[Vec<f64>], tol: f64) -> bool {
        let mut buf = vec![Complex64::new(0.0, 0.0); self.m * self.m];
        samples.iter().all(|x| {
            self.eval(x, &mut buf);
            let re: Vec<f64> = buf.iter().map(|c| c.re).collect();
            super::min_eigenvalue_sym(&re, self.m) >= -tol
        })
    }
}

impl HermitianPotential for PolyPotential {
    fn dim(&self) -> usize {
        self.dim
    }

    fn size(&self) -> usize {
        self.m
    }

    fn eval(&self, x: &[f64], out: &mut [Complex64]) {
        for (o, p) in out.iter_mut().zip(&self.entries) {
            *o = Complex64::new(p.eval(x), 0.0);
        }
    }
}

/// Scalar constant potential (m = 1).
pub struct ConstPotential {
    pub dim: usize,
    pub value: f64,
}

impl HermitianPotential for ConstPotential {
    fn dim(&self) -> usize {
        self.dim
    }
    fn size(&self) -> usize {
        1
    }
    fn eval(&self, _x: &[f64], out: &mut [Complex64]) {
        out[0] = Complex64::new(self.value, 0.0);
    }
}

/// V = 8 H_φ − 4 tr(H_φ) I for a model weight on ℂ² (d = 4, m = 2), or
/// V = Δφ for n = 1 (d = 2, m = 1).
pub struct KohnPotential {
    pub gamma: MonomialSet,
    pub n: usize,
}

impl HermitianPotential for KohnPotential {
    fn dim(&self) -> usize {
        2 * self.n
    }

    fn size(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64], out: &mut [Complex64]) {
        match self.n {
            1 => {
                let r2 = x[0] * x[0] + x[1] * x[1];
                let mut tr = 0.0;
                for (a, _) in self.gamma.points() {
                    if a > 0 {
                        tr += f64::from(a * a) * powi_conv(r2, a - 1);
                    }
                }
                out[0] = Complex64::new(4.0 * tr, 0.0);
            }
            2 => {
                let z = Complex64::new(x[0], x[1]);
                let w = Complex64::new(x[2], x[3]);
                let h = crate::weights::hessian(
                    &self.gamma,
                    &crate::weights::ComplexPoint2::new(z, w),
                );
                let tr = h.tr_val;
                out[0] = 8.0 * h.entries[0][0] - Complex64::new(4.0 * tr, 0.0);
                out[1] = 8.0 * h.entries[0][1];
                out[2] = 8.0 * h.entries[1][0];
                out[3] = 8.0 * h.entries[1][1] - Complex64::new(4.0 * tr, 0.0);
            }
            n => panic!("unsupported complex dimension {n}"),
        }
    }
}

/// Compressed sparse row Hermitian matrix over ℂ.
pub struct CsrHermitian {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<Complex64>,
}

impl CsrHermitian {
    pub fn matvec(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.par_iter_mut().enumerate().for_each(|(r, out)| {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            *out = acc;
        });
    }

    /// Maximal |H[r,c] − conj(H[c,r])| over stored entries.
    pub fn hermiticity_defect(&self) -> f64 {
        use std::collections::HashMap;
        let mut map: HashMap<(usize, usize), Complex64> = HashMap::new();
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                map.insert((r, self.col_idx[k]), self.vals[k]);
            }
        }
        let mut defect = 0.0f64;
        for (&(r, c), &v) in &map {
            let vt = map.get(&(c, r)).copied().unwrap_or_default();
            defect = defect.max((v - vt.conj()).norm());
        }
        defect
    }

    pub fn quadratic_form(&self, x: &[Complex64]) -> f64 {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        self.matvec(x, &mut y);
        x.iter()
            .zip(&y)
            .map(|(a, b)| (a.conj() * b).re)
            .sum()
    }
}

/// Assembled lattice operator factor·(−Δ_A + V) on `grid` with `components`
/// vector components.
pub struct GridOperator {
    pub grid: Grid,
    pub components: usize,
    pub factor: f64,
    pub matrix: CsrHermitian,
}

const DOF_BUDGET: usize = 3_000_000;

/// Assembles factor·(−Δ_A + V) with Dirichlet boundary on the grid box.
/// Link phases use the midpoint rule for ∫ A·dl along each edge.
pub fn assemble_operator(
    potential: &dyn HermitianPotential,
    magnetic: &dyn Magnetic,
    grid: &Grid,
    factor: f64,
) -> Result<GridOperator, SchrodingerError> {
    let d = grid.ndim();
    assert_eq!(potential.dim(), d);
    let m = potential.size();
    let nodes = grid.len();
    let dofs = nodes * m;
    if dofs > DOF_BUDGET {
        return Err(SchrodingerError::BudgetExceeded {
            dofs,
            budget: DOF_BUDGET,
        });
    }
    let h = grid.h;
    let inv_h2 = 1.0 / (h * h);
    let rows: Vec<Vec<(usize, Complex64)>> = (0..dofs)
        .into_par_iter()
        .map(|dof| {
            let node = dof / m;
            let comp = dof % m;
            let multi = grid.multi(node);
            let x = grid.coords(node);
            let mut entries: Vec<(usize, Complex64)> = Vec::with_capacity(2 * d + m);
            // Kinetic part: every incident edge (including edges into the
            // Dirichlet boundary) contributes 1/h² on the diagonal; edges to
            // interior neighbors carry the link phase.
            let mut diag = Complex64::new(2.0 * d as f64 * inv_h2 * factor, 0.0);
            let mut a_buf = vec![0.0; d];
            for k in 0..d {
                for dir in [-1i64, 1i64] {
                    let nk = multi[k] as i64 + dir;
                    if nk < 0 || nk >= grid.dims[k] as i64 {
                        continue; // boundary edge: diagonal term only
                    }
                    let mut mj = multi.clone();
                    mj[k] = nk as usize;
                    let nb = grid.index(&mj);
                    let mut mid = x.clone();
                    mid[k] += 0.5 * h * dir as f64;
                    magnetic.eval(&mid, &mut a_buf);
                    // Hopping x → x+he_k carries e^{−iθ}; the reverse edge
                    // conjugates, which is dir-dependent here.
                    let theta = h * a_buf[k] * dir as f64;
                    let phase = Complex64::from_polar(1.0, -theta);
                    entries.push((nb * m + comp, -phase * inv_h2 * factor));
                }
            }
            // Potential block row.
            let mut v = vec![Complex64::new(0.0, 0.0); m * m];
            potential.eval(&x, &mut v);
            for c2 in 0..m {
                let val = v[comp * m + c2] * factor;
                if c2 == comp {
                    diag += val;
                } else if val.norm() > 0.0 {
                    entries.push((node * m + c2, val));
                }
            }
            entries.push((dof, diag));
            entries.sort_by_key(|e| e.0);
            entries
        })
        .collect();
    let mut row_ptr = Vec::with_capacity(dofs + 1);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    row_ptr.push(0);
    for row in rows {
        for (c, v) in row {
            col_idx.push(c);
            vals.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    Ok(GridOperator {
        grid: grid.clone(),
        components: m,
        factor,
        matrix: CsrHermitian {
            n: dofs,
            row_ptr,
            col_idx,
            vals,
        },
    })
}

/// μ̂(x)² = (1 + |z|^σ + |w|^τ)² mass diagonal over a ℂ² grid (d = 4),
/// replicated across components.
pub fn mu_mass_diagonal(
    profile: &crate::newton::HomogeneousProfile,
    grid: &Grid,
    components: usize,
) -> Vec<f64> {
    assert_eq!(grid.ndim(), 4);
    let sigma = rat_f64(profile.sigma);
    let tau = rat_f64(profile.tau);
    let pw = |x: f64, e: f64| if e == 0.0 { 1.0 } else { x.powf(e) };
    let mut out = Vec::with_capacity(grid.len() * components);
    for i in 0..grid.len() {
        let x = grid.coords(i);
        let za = (x[0] * x[0] + x[1] * x[1]).sqrt();
        let wa = (x[2] * x[2] + x[3] * x[3]).sqrt();
        let mu = 1.0 + pw(za, sigma) + pw(wa, tau);
        for _ in 0..components {
            out.push(mu * mu);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dirichlet_laplacian_1d_spectrum() {
        // Eigenvalues 2(1 − cos(kπ/(N+1)))/h² on [0,1] with N interior nodes.
        let n = 31usize;
        let h = 1.0 / (n as f64 + 1.0);
        let grid = Grid {
            origin: vec![h],
            dims: vec![n],
            h,
        };
        let pot = ConstPotential { dim: 1, value: 0.0 };
        let op = assemble_operator(&pot, &ZeroMagnetic, &grid, 1.0).unwrap();
        assert!(op.matrix.hermiticity_defect() < 1e-12);
        let report =
            super::super::extremal_eigenvalues(&op, 4, None, 42, 1e-10, 200_000).unwrap();
        for (k, ev) in report.eigenvalues.iter().enumerate() {
            let exact =
                2.0 * (1.0 - ((k + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
                    / (h * h);
            assert!(
                (ev - exact).abs() < 1e-8 * exact.max(1.0),
                "λ_{k} = {ev} vs {exact}"
            );
        }
    }

    #[test]
    fn quadratic_form_nonnegative() {
        let grid = Grid::rect([-2.0, -2.0], [2.0, 2.0], 0.25);
        let x2 = Poly::monomial(2, 0, 2, 1).add(&Poly::monomial(2, 1, 2, 1));
        let zero = Poly::zero(2);
        let pot = PolyPotential::new(2, 2, vec![x2.clone(), zero.clone(), zero, x2]);
        let op = assemble_operator(&pot, &ZeroMagnetic, &grid, 1.0).unwrap();
        assert!(op.matrix.hermiticity_defect() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..5 {
            let v: Vec<Complex64> = (0..op.matrix.n)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            assert!(op.matrix.quadratic_form(&v) >= -1e-10);
        }
    }

    #[test]
    fn magnetic_operator_hermitian() {
        let grid = Grid::rect([-3.0, -3.0], [3.0, 3.0], 0.5);
        let pot = ConstPotential { dim: 2, value: 4.0 };
        let mag = SymplecticGradient {
            gamma: MonomialSet::new([(1, 0)]).unwrap(),
            n: 1,
        };
        let op = assemble_operator(&pot, &mag, &grid, 0.25).unwrap();
        assert!(op.matrix.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn budget_guard() {
        let grid = Grid {
            origin: vec![0.0; 4],
            dims: vec![60; 4],
            h: 0.1,
        };
        let pot = ConstPotential { dim: 4, value: 0.0 };
        assert!(matches!(
            assemble_operator(&pot, &ZeroMagnetic, &grid, 1.0),
            Err(SchrodingerError::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn harmonic_oscillator_ground_state() {
        // −ψ'' + x²ψ on [−8,8], h = 0.02: ground eigenvalue 1.000 ± 0.003,
        // cross-checked against a Sturm-sequence bisection oracle.
        let h = 0.02;
        let grid = Grid {
            origin: vec![-8.0 + h],
            dims: vec![799],
            h,
        };
        let x2 = Poly::monomial(1, 0, 2, 1);
        let pot = PolyPotential::new(1, 1, vec![x2]);
        let op = assemble_operator(&pot, &ZeroMagnetic, &grid, 1.0).unwrap();
        let report =
            super::super::extremal_eigenvalues(&op, 2, None, 7, 1e-10, 400_000).unwrap();
        assert!((report.eigenvalues[0] - 1.0).abs() < 0.003);
        assert!((report.eigenvalues[1] - 3.0).abs() < 0.01);

        // Sturm oracle on the same tridiagonal matrix.
        let diag: Vec<f64> = (0..grid.len())
            .map(|i| {
                let x = grid.coords(i)[0];
                2.0 / (h * h) + x * x
            })
            .collect();
        let off = -1.0 / (h * h);
        let count_below = |lambda: f64| {
            // Sturm sequence sign count for T − λI.
            let mut count = 0usize;
            let mut d = diag[0] - lambda;
            if d < 0.0 {
                count += 1;
            }
            for i in 1..diag.len() {
                d = (diag[i] - lambda) - off * off / d;
                if d < 0.0 {
                    count += 1;
                }
            }
            count
        };
        let mut lo = 0.0;
        let mut hi = 2.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if count_below(mid) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        assert!((report.eigenvalues[0] - 0.5 * (lo + hi)).abs() < 1e-7);
    }
}
