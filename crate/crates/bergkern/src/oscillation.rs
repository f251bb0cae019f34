//! Oscillation of subspace-valued mappings, oscillating potentials,
//! Muckenhoupt-class diagnostics and the good/bad cube dichotomy.
//!
//! For a piecewise-constant mapping with pieces (w_j, S_j) the oscillation on
//! a cube reduces to ω² = 1 − (sup_{|u|=1} Σ_j w_j |P_j u|)²: the optimal
//! unit section points each piece's value at the projection of a common
//! direction u.  The solver iterates that fixed point; a hierarchical grid
//! search over the phase-reduced sphere serves as the independent oracle.

use crate::poly::Poly;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OscError {
    #[error("oracle supports m ≤ 3, got {0}")]
    DimensionTooLarge(usize),
    #[error("potential is singular on a sampled set; A₂ requires a.e. invertibility")]
    SingularInverse,
    #[error("no subcube of constant sign found within depth {0}")]
    NoCleanSubcube(usize),
}

/// Subspace of ℂ^m given by an orthonormal basis (columns).
#[derive(Debug, Clone)]
pub struct Subspace {
    pub m: usize,
    pub basis: Vec<Vec<Complex64>>,
}

fn cdot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

impl Subspace {
    pub fn new(m: usize, basis: Vec<Vec<Complex64>>) -> Self {
        assert!(!basis.is_empty() && basis.len() <= m);
        for (i, b) in basis.iter().enumerate() {
            assert_eq!(b.len(), m);
            for (j, c) in basis.iter().enumerate() {
                let d = cdot(b, c);
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (d - Complex64::new(expect, 0.0)).norm() < 1e-12,
                    "basis not orthonormal"
                );
            }
        }
        Subspace { m, basis }
    }

    pub fn span_axis(m: usize, axis: usize) -> Self {
        let mut v = vec![Complex64::default(); m];
        v[axis] = Complex64::new(1.0, 0.0);
        Subspace::new(m, vec![v])
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Orthogonal projection of u onto the subspace.
    pub fn project(&self, u: &[Complex64]) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); self.m];
        for b in &self.basis {
            let c = cdot(b, u);
            for (o, &bi) in out.iter_mut().zip(b) {
                *o += c * bi;
            }
        }
        out
    }

    /// Largest cosine of a principal angle with another subspace.
    pub fn max_cos_angle(&self, other: &Subspace) -> f64 {
        // σ_max of the matrix B_self^H B_other.
        let rows = self.dim();
        let cols = other.dim();
        let mut g = DMatrix::<Complex64>::zeros(rows, cols);
        for (i, a) in self.basis.iter().enumerate() {
            for (j, b) in other.basis.iter().enumerate() {
                g[(i, j)] = cdot(a, b);
            }
        }
        let gram = &g * g.adjoint();
        gram.symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.max(0.0)))
            .sqrt()
            .min(1.0)
    }
}

/// Measure-weighted list of subspaces on a cube.
#[derive(Debug, Clone)]
pub struct SubspacePartition {
    pub pieces: Vec<(f64, Subspace)>,
}

impl SubspacePartition {
    pub fn new(pieces: Vec<(f64, Subspace)>) -> Self {
        assert!(!pieces.is_empty());
        let total: f64 = pieces.iter().map(|p| p.0).sum();
        assert!((total - 1.0).abs() < 1e-9, "fractions must sum to 1");
        assert!(pieces.iter().all(|p| p.0 > 0.0));
        let m = pieces[0].1.m;
        assert!(pieces.iter().all(|p| p.1.m == m));
        SubspacePartition { pieces }
    }

    pub fn m(&self) -> usize {
        self.pieces[0].1.m
    }

    fn objective(&self, u: &[Complex64]) -> f64 {
        self.pieces
            .iter()
            .map(|(w, s)| {
                let p = s.project(u);
                w * p.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
            })
            .sum()
    }

    /// True when all pieces share a nonzero vector: λ_min(Σ (I − P_j)) ≈ 0.
    pub fn has_common_vector(&self) -> bool {
        let m = self.m();
        let mut sum = DMatrix::<Complex64>::zeros(m, m);
        for (_, s) in &self.pieces {
            let mut p = DMatrix::<Complex64>::zeros(m, m);
            for b in &s.basis {
                for i in 0..m {
                    for j in 0..m {
                        p[(i, j)] += b[i] * b[j].conj();
                    }
                }
            }
            sum += DMatrix::identity(m, m) - p;
        }
        let lam_min = sum
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &v| a.min(v));
        lam_min < 1e-8
    }

    /// Lower bound √(δη) with δ from pairwise principal angles.
    pub fn angle_lower_bound(&self) -> f64 {
        let n = self.pieces.len();
        if n == 1 {
            return 0.0;
        }
        let eta = self.pieces.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        let mut delta = f64::INFINITY;
        for j in 0..n {
            let mut best = 0.0f64;
            for k in 0..n {
                if k != j {
                    best =
                        best.max(1.0 - self.pieces[j].1.max_cos_angle(&self.pieces[k].1));
                }
            }
            delta = delta.min(best);
        }
        (delta.max(0.0) * eta).sqrt()
    }
}

/// Oscillation value with the maximizing direction.
#[derive(Debug, Clone, Serialize)]
pub struct OscillationResult {
    pub omega: f64,
    #[serde(skip)]
    pub maximizer: Vec<Complex64>,
    pub iterations: usize,
    /// |solver − oracle| when the oracle ran (m ≤ 3), else None.
    pub oracle_gap: Option<f64>,
}

/// Fixed-point solver for ω: u ← normalize(Σ w_j P_j u / |P_j u|), with 16
/// deterministic multistarts.
pub fn oscillation(partition: &SubspacePartition) -> OscillationResult {
    let m = partition.m();
    let mut rng = ChaCha8Rng::seed_from_u64(0x05C1_11A7);
    let mut best_f = -1.0;
    let mut best_u = vec![Complex64::default(); m];
    let mut total_iters = 0usize;
    for start in 0..16 {
        let mut u: Vec<Complex64> = if start == 0 {
            // Mean of the first basis vectors as a deterministic warm start.
            let mut v = vec![Complex64::default(); m];
            for (_, s) in &partition.pieces {
                for (vi, &bi) in v.iter_mut().zip(&s.basis[0]) {
                    *vi += bi;
                }
            }
            v
        } else {
            (0..m)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect()
        };
        let nrm = u.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if nrm < 1e-14 {
            continue;
        }
        for c in u.iter_mut() {
            *c /= nrm;
        }
        let mut f_prev = partition.objective(&u);
        for it in 0..500 {
            total_iters = total_iters.max(it + 1);
            let mut next = vec![Complex64::default(); m];
            for (w, s) in &partition.pieces {
                let p = s.project(&u);
                let pn = p.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                let scale = w / pn.max(1e-14);
                for (n, &pi) in next.iter_mut().zip(&p) {
                    *n += scale * pi;
                }
            }
            let nrm = next.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if nrm < 1e-14 {
                break;
            }
            for c in next.iter_mut() {
                *c /= nrm;
            }
            u = next;
            let f = partition.objective(&u);
            if (f - f_prev).abs() < 1e-12 {
                break;
            }
            f_prev = f;
        }
        let f = partition.objective(&u);
        if f > best_f {
            best_f = f;
            best_u = u;
        }
    }
    let omega = (1.0 - best_f * best_f).max(0.0).sqrt();
    let oracle_gap = oscillation_oracle(partition).ok().map(|o| (omega - o).abs());
    OscillationResult {
        omega,
        maximizer: best_u,
        iterations: total_iters,
        oracle_gap,
    }
}

/// Brute-force oracle over the phase-reduced unit sphere (m ≤ 3): coarse
/// sweep at ≤0.02/0.1 rad, then local grid refinement of the best basins to
/// resolutions far below 0.02 rad.
pub fn oscillation_oracle(partition: &SubspacePartition) -> Result<f64, OscError> {
    let m = partition.m();
    if m > 3 {
        return Err(OscError::DimensionTooLarge(m));
    }
    // Parameters: magnitudes via angles in [0, π/2], relative phases in
    // [0, 2π).  m = 1 has a single point; m = 2 two params; m = 3 four.
    let build = |params: &[f64]| -> Vec<Complex64> {
        match m {
            1 => vec![Complex64::new(1.0, 0.0)],
            2 => {
                let (a, p) = (params[0], params[1]);
                vec![
                    Complex64::new(a.cos(), 0.0),
                    Complex64::from_polar(a.sin(), p),
                ]
            }
            _ => {
                let (a, b, p1, p2) = (params[0], params[1], params[2], params[3]);
                vec![
                    Complex64::new(a.cos(), 0.0),
                    Complex64::from_polar(a.sin() * b.cos(), p1),
                    Complex64::from_polar(a.sin() * b.sin(), p2),
                ]
            }
        }
    };
    let nparams = match m {
        1 => 0,
        2 => 2,
        _ => 4,
    };
    if nparams == 0 {
        let f = partition.objective(&build(&[]));
        return Ok((1.0 - f * f).max(0.0).sqrt());
    }
    let half = std::f64::consts::FRAC_PI_2;
    let tau = std::f64::consts::TAU;
    let ranges: Vec<(f64, f64)> = (0..nparams)
        .map(|i| if i < nparams / 2 { (0.0, half) } else { (0.0, tau) })
        .collect();
    let res = if m == 2 { 0.02 } else { 0.1 };
    let steps: Vec<usize> = ranges
        .iter()
        .map(|(lo, hi)| ((hi - lo) / res).ceil() as usize + 1)
        .collect();
    let total: usize = steps.iter().product();
    let mut scored: Vec<(f64, Vec<f64>)> = Vec::new();
    for flat in 0..total {
        let mut rem = flat;
        let mut params = Vec::with_capacity(nparams);
        for (k, &s) in steps.iter().enumerate() {
            let i = rem % s;
            rem /= s;
            let (lo, hi) = ranges[k];
            params.push(lo + (hi - lo) * i as f64 / (s - 1).max(1) as f64);
        }
        let f = partition.objective(&build(&params));
        scored.push((f, params));
    }
    scored.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    scored.truncate(32);
    // Local 3^k refinement of each retained basin.
    let mut best = scored[0].0;
    for (_, start) in scored {
        let mut center = start.clone();
        let mut width = res;
        for _ in 0..24 {
            let mut improved = center.clone();
            let mut best_local = partition.objective(&build(&center));
            let offsets = [-1.0f64, 0.0, 1.0];
            let combos = 3usize.pow(nparams as u32);
            for c in 0..combos {
                let mut rem = c;
                let mut p = center.clone();
                for item in p.iter_mut().take(nparams) {
                    let o = offsets[rem % 3];
                    rem /= 3;
                    *item += o * width;
                }
                let f = partition.objective(&build(&p));
                if f > best_local {
                    best_local = f;
                    improved = p;
                }
            }
            center = improved;
            width *= 0.5;
        }
        best = best.max(partition.objective(&build(&center)));
    }
    Ok((1.0 - best * best).max(0.0).sqrt())
}

/// Piecewise-constant pattern on the unit interval, refined dyadically on
/// dyadic shells so that the induced mapping oscillates at every scale far
/// enough out.
#[derive(Debug, Clone)]
pub struct TilePattern {
    /// Subspace index per pattern cell (the unit cell splits evenly).
    pub cells: Vec<usize>,
    pub subspaces: Vec<Subspace>,
}

impl TilePattern {
    pub fn m(&self) -> usize {
        self.subspaces[0].m
    }

    /// Partition of the unit cell by measure fractions.
    pub fn to_partition(&self) -> SubspacePartition {
        let k = self.cells.len() as f64;
        let mut fractions = vec![0.0; self.subspaces.len()];
        for &c in &self.cells {
            fractions[c] += 1.0 / k;
        }
        SubspacePartition::new(
            fractions
                .into_iter()
                .zip(self.subspaces.iter().cloned())
                .filter(|(w, _)| *w > 0.0)
                .collect(),
        )
    }

    /// Refinement level at position x: cells shrink by half on each dyadic
    /// shell outward, so lattice cubes of scale 2^{−j} far out are unions of
    /// pattern cells.
    fn level(x: f64) -> i32 {
        let a = x.abs();
        if a < 1.0 {
            0
        } else {
            a.log2().floor() as i32 + 1
        }
    }

    /// Subspace index at a point of ℝ.
    pub fn subspace_index_at(&self, x: f64) -> usize {
        let s = 2.0f64.powi(-Self::level(x));
        let cell_width = s / self.cells.len() as f64;
        let t = (x / cell_width).floor();
        let idx = (t.rem_euclid(self.cells.len() as f64)) as usize;
        self.cells[idx.min(self.cells.len() - 1)]
    }

    /// Exact measure fractions of each subspace within [lo, hi].
    pub fn fractions_on(&self, lo: f64, hi: f64) -> Vec<f64> {
        assert!(hi > lo);
        let mut fractions = vec![0.0; self.subspaces.len()];
        let mut x = lo;
        let guard = 1e-12 * (hi - lo);
        while x < hi - guard {
            let s = 2.0f64.powi(-Self::level(x + guard));
            let cell_width = s / self.cells.len() as f64;
            let cell_end = ((x / cell_width).floor() + 1.0) * cell_width;
            // Dyadic shell boundaries also cut cells.
            let a = (x + guard).abs();
            let shell_end = if a < 1.0 {
                1.0
            } else {
                2.0f64.powi(a.log2().floor() as i32 + 1)
            };
            let shell_end = if x + guard >= 0.0 { shell_end } else { -0.0 };
            let mut end = cell_end.min(hi);
            if x + guard >= 0.0 {
                end = end.min(shell_end);
            }
            let idx = self.subspace_index_at(0.5 * (x + end));
            fractions[idx] += (end - x) / (hi - lo);
            x = end;
        }
        fractions
    }

    /// Partition induced on the interval [lo, hi].
    pub fn partition_on(&self, lo: f64, hi: f64) -> SubspacePartition {
        let fr = self.fractions_on(lo, hi);
        SubspacePartition::new(
            fr.into_iter()
                .zip(self.subspaces.iter().cloned())
                .filter(|(w, _)| *w > 1e-12)
                .collect(),
        )
    }
}

/// Oscillating matrix potential V(x) = ν(x)·P_{T(x)^⊥}.
pub struct OscPotential<'a> {
    pub pattern: &'a TilePattern,
    pub nu: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
}

impl<'a> OscPotential<'a> {
    /// Hermitian m×m value at x (row-major).
    pub fn eval(&self, x: f64) -> Vec<Complex64> {
        let m = self.pattern.m();
        let s = &self.pattern.subspaces[self.pattern.subspace_index_at(x)];
        let nu = (self.nu)(x);
        let mut out = vec![Complex64::default(); m * m];
        for i in 0..m {
            out[i * m + i] = Complex64::new(nu, 0.0);
        }
        for b in &s.basis {
            for i in 0..m {
                for j in 0..m {
                    out[i * m + j] -= nu * b[i] * b[j].conj();
                }
            }
        }
        out
    }

    pub fn rank_at(&self, x: f64) -> usize {
        let m = self.pattern.m();
        m - self.pattern.subspaces[self.pattern.subspace_index_at(x)].dim()
    }
}

/// Asymptotic oscillation estimate: per shell, the minimum of ω over lattice
/// cubes Q(xℓ, ℓ) meeting the shell.
pub fn asymptotic_oscillation(
    pattern: &TilePattern,
    ell: f64,
    shells: &[(f64, f64)],
) -> Vec<f64> {
    shells
        .iter()
        .map(|&(a, b)| {
            let mut min_omega = f64::INFINITY;
            let lo = (a / ell).floor() as i64;
            let hi = (b / ell).ceil() as i64;
            for i in lo..hi {
                let x0 = i as f64 * ell;
                if x0 + ell < a || x0 > b {
                    continue;
                }
                let part = pattern.partition_on(x0, x0 + ell);
                min_omega = min_omega.min(oscillation(&part).omega);
            }
            min_omega
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Muckenhoupt-type diagnostics for matrix potentials with polynomial entries.
// ---------------------------------------------------------------------------

/// Per-cube outcome of the class checks.
#[derive(Debug, Clone, Serialize)]
pub struct MuckenhouptReport {
    pub cube_center: f64,
    pub cube_side: f64,
    /// Fraction of sampled points with V(x) ≥ (δ/|Q|)∫_Q V.
    pub def1_fraction: f64,
    pub def1_pass: bool,
    /// Worst β over sampled subsets of measure ≥ α|Q| (matrix order).
    pub def2_worst_beta: f64,
    pub def2_pass: bool,
    pub a2_norm: Option<f64>,
}

/// Matrix order A ≥ B up to the numerically robust slack
/// λ_min(A − B) ≥ −1e−10‖A‖.
fn matrix_geq(a: &DMatrix<f64>, b: &DMatrix<f64>) -> bool {
    let diff = a - b;
    let scale = a.iter().fold(0.0f64, |acc, &v| acc.max(v.abs())).max(1e-300);
    let lam = diff
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &v| acc.min(v));
    lam >= -1e-10 * scale
}

/// Generalized β: largest β with ∫_A V ≥ β ∫_Q V, i.e. the smallest
/// eigenvalue of (∫_Q V)^{−1/2} (∫_A V) (∫_Q V)^{−1/2} (0 when ∫_Q V is
/// singular in some direction present in ∫_A V).
fn beta_of(int_a: &DMatrix<f64>, int_q: &DMatrix<f64>) -> f64 {
    let eig = int_q.clone().symmetric_eigen();
    let m = int_q.nrows();
    let mut isqrt = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        let lam: f64 = eig.eigenvalues[k].max(1e-300);
        let v = eig.eigenvectors.column(k);
        for i in 0..m {
            for j in 0..m {
                isqrt[(i, j)] += v[i] * v[j] / lam.sqrt();
            }
        }
    }
    let t = &isqrt * int_a * &isqrt;
    t.symmetric_eigen()
        .eigenvalues
        .iter()
        .fold(f64::INFINITY, |acc, &v| acc.min(v))
        .max(0.0)
}

/// Integral of the (polynomial, real symmetric) potential over [lo, hi],
/// exactly, as a dense matrix.
fn integral_matrix(entries: &[Poly], m: usize, lo: f64, hi: f64) -> DMatrix<f64> {
    // Rational endpoints are not required here; a fine Gauss rule is exact
    // for polynomials of the occurring degrees.
    let deg = entries.iter().map(|p| p.degree()).max().unwrap_or(0) as usize;
    let order = (deg / 2 + 2).max(4);
    let (xs, ws) = crate::quad::gl_panels(lo, hi, order, 1);
    let mut out = DMatrix::<f64>::zeros(m, m);
    for (&x, &w) in xs.iter().zip(&ws) {
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] += w * entries[i * m + j].eval(&[x]);
            }
        }
    }
    out
}

/// Runs the density (Def. 1), subset (Def. 2) and A₂ checks on each cube.
#[allow(clippy::too_many_arguments)]
pub fn muckenhoupt_diagnostics(
    entries: &[Poly],
    m: usize,
    cubes: &[(f64, f64)],
    delta: f64,
    c_frac: f64,
    alpha: f64,
    beta: f64,
    seed: u64,
) -> Result<Vec<MuckenhouptReport>, OscError> {
    assert_eq!(entries.len(), m * m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = 64usize;
    let samples = 256usize;
    let mut reports = Vec::with_capacity(cubes.len());
    for &(center, side) in cubes {
        let lo = center - side / 2.0;
        let hi = center + side / 2.0;
        let int_q = integral_matrix(entries, m, lo, hi);
        let threshold = int_q.clone() * (delta / side);
        // Def. 1: sampled measure of {V(x) ≥ (δ/|Q|)∫_Q V}.
        let mut hits = 0usize;
        for i in 0..samples {
            let x = lo + side * (i as f64 + 0.5) / samples as f64;
            let mut v = DMatrix::<f64>::zeros(m, m);
            for r in 0..m {
                for cc in 0..m {
                    v[(r, cc)] = entries[r * m + cc].eval(&[x]);
                }
            }
            if matrix_geq(&v, &threshold) {
                hits += 1;
            }
        }
        let def1_fraction = hits as f64 / samples as f64;
        let def1_pass = def1_fraction >= c_frac;
        // Def. 2: random unions of grid cells of total measure ≥ α|Q|.
        let cell_ints: Vec<DMatrix<f64>> = (0..cells)
            .map(|i| {
                let a = lo + side * i as f64 / cells as f64;
                let b = lo + side * (i + 1) as f64 / cells as f64;
                integral_matrix(entries, m, a, b)
            })
            .collect();
        let need = (alpha * cells as f64).ceil() as usize;
        let mut worst_beta = f64::INFINITY;
        for _ in 0..40 {
            let mut idx: Vec<usize> = (0..cells).collect();
            idx.shuffle(&mut rng);
            idx.truncate(need);
            let mut int_a = DMatrix::<f64>::zeros(m, m);
            for &i in &idx {
                int_a += &cell_ints[i];
            }
            worst_beta = worst_beta.min(beta_of(&int_a, &int_q));
        }
        let def2_pass = worst_beta >= beta;
        // Treil-Volberg A₂ norm of this cube (None when V is singular).
        let a2_norm = {
            let mut inv_avg = DMatrix::<f64>::zeros(m, m);
            let mut singular = false;
            for i in 0..samples {
                let x = lo + side * (i as f64 + 0.5) / samples as f64;
                let mut v = DMatrix::<f64>::zeros(m, m);
                for r in 0..m {
                    for cc in 0..m {
                        v[(r, cc)] = entries[r * m + cc].eval(&[x]);
                    }
                }
                match v.clone().try_inverse() {
                    Some(inv) if v.determinant().abs() > 1e-12 => {
                        inv_avg += inv / samples as f64;
                    }
                    _ => {
                        singular = true;
                        break;
                    }
                }
            }
            if singular {
                None
            } else {
                let avg = int_q.clone() / side;
                let s1 = sqrt_psd(&avg);
                let s2 = sqrt_psd(&inv_avg);
                let prod = &s1 * &s2;
                let sv = (&prod * prod.transpose())
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .fold(0.0f64, |a, &v| a.max(v));
                Some(sv.sqrt())
            }
        };
        reports.push(MuckenhouptReport {
            cube_center: center,
            cube_side: side,
            def1_fraction,
            def1_pass,
            def2_worst_beta: worst_beta,
            def2_pass,
            a2_norm,
        });
    }
    Ok(reports)
}

fn sqrt_psd(a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let m = a.nrows();
    let mut out = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        let lam: f64 = eig.eigenvalues[k].max(0.0);
        let v = eig.eigenvectors.column(k);
        for i in 0..m {
            for j in 0..m {
                out[(i, j)] += v[i] * v[j] * lam.sqrt();
            }
        }
    }
    out
}

/// Exact doubling constant bound for nested cubes: smallest D with
/// ∫_Q V ≤ D ∫_{Q'} V, as the largest generalized eigenvalue.
pub fn doubling_constant(entries: &[Poly], m: usize, outer: (f64, f64), inner: (f64, f64)) -> f64 {
    let int_q = integral_matrix(entries, m, outer.0 - outer.1 / 2.0, outer.0 + outer.1 / 2.0);
    let int_i = integral_matrix(entries, m, inner.0 - inner.1 / 2.0, inner.0 + inner.1 / 2.0);
    let b = beta_of(&int_q, &int_i);
    if b <= 0.0 {
        f64::INFINITY
    } else {
        // β_of gives the largest β with ∫_Q ≥ β∫_{Q'}… we need the reverse
        // direction: smallest D with ∫_Q ≤ D ∫_{Q'}.
        let eig_low = beta_of(&int_i, &int_q);
        if eig_low <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / eig_low
        }
    }
}

// ---------------------------------------------------------------------------
// Good/bad cube dichotomy for 2×2 real polynomial potentials.
// ---------------------------------------------------------------------------

/// Classification with witness subcube (center, side).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CubeClass {
    /// tr²/8 < det throughout the witness: eigenvalues comparable (μ ≤ 8λ).
    Good { witness: (f64, f64) },
    /// det < tr²/8 throughout, with sup μ ≤ 4 inf μ on the witness.
    Bad { witness: (f64, f64) },
    /// tr²/8 − det ≡ 0 as a polynomial identity: the sign search cannot
    /// decide, and the eigenvalue ratio is pinned at (√2+1)/(√2−1).
    Isotropic,
}

/// Classifies a cube by the sign of tr²/8 − det on a dyadic subcube clear of
/// its zero set.  On good witnesses μ ≤ 8λ; bad witnesses additionally carry
/// 4-comparability of μ.
pub fn classify_cube(
    entries: &[Poly],
    cube: (f64, f64),
    max_depth: usize,
) -> Result<CubeClass, OscError> {
    assert_eq!(entries.len(), 4);
    let tr = entries[0].add(&entries[3]);
    let det = entries[0].mul(&entries[3]).sub(&entries[1].mul(&entries[2]));
    // Degenerate branch: the deciding factor vanishes identically.
    if tr
        .mul(&tr)
        .sub(&det.scale(&crate::poly::big_rat(8, 1)))
        .is_zero()
    {
        return Ok(CubeClass::Isotropic);
    }
    let f1 = |x: f64| {
        let t = tr.eval(&[x]);
        t * t / 8.0 - det.eval(&[x])
    };
    let nsamp = 65usize;
    let sign_constant = |c: f64, s: f64| -> Option<i8> {
        let mut sign = 0i8;
        for i in 0..nsamp {
            let x = c - s / 2.0 + s * i as f64 / (nsamp - 1) as f64;
            let v = f1(x);
            let s_here = if v > 0.0 {
                1
            } else if v < 0.0 {
                -1
            } else {
                return None;
            };
            if sign == 0 {
                sign = s_here;
            } else if sign != s_here {
                return None;
            }
        }
        Some(sign)
    };
    let mu = |x: f64| {
        let t = tr.eval(&[x]);
        let d = det.eval(&[x]);
        0.5 * (t + (t * t - 4.0 * d).max(0.0).sqrt())
    };
    // Breadth-first dyadic descent.
    let mut queue = vec![cube];
    for _depth in 0..=max_depth {
        let mut next = Vec::new();
        for (c, s) in queue {
            match sign_constant(c, s) {
                Some(-1) => return Ok(CubeClass::Good { witness: (c, s) }),
                Some(1) => {
                    // Bad: refine until μ is 4-comparable on the witness.
                    let mut wc = (c, s);
                    for _ in 0..max_depth {
                        let (cc, ss) = wc;
                        let mut sup: f64 = 0.0;
                        let mut inf = f64::INFINITY;
                        for i in 0..nsamp {
                            let x = cc - ss / 2.0 + ss * i as f64 / (nsamp - 1) as f64;
                            let m = mu(x);
                            sup = sup.max(m);
                            inf = inf.min(m);
                        }
                        if sup <= 4.0 * inf {
                            return Ok(CubeClass::Bad { witness: wc });
                        }
                        // μ varies too much: keep the half where tr is larger
                        // (μ ≈ tr on bad cubes), which tightens the ratio.
                        let left = (cc - ss / 4.0, ss / 2.0);
                        let right = (cc + ss / 4.0, ss / 2.0);
                        let tl = mu(left.0).abs();
                        let trr = mu(right.0).abs();
                        wc = if tl > trr { left } else { right };
                    }
                    return Err(OscError::NoCleanSubcube(max_depth));
                }
                _ => {
                    next.push((c - s / 4.0, s / 2.0));
                    next.push((c + s / 4.0, s / 2.0));
                }
            }
        }
        queue = next;
    }
    Err(OscError::NoCleanSubcube(max_depth))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn half_half_lines() -> SubspacePartition {
        SubspacePartition::new(vec![
            (0.5, Subspace::span_axis(2, 0)),
            (0.5, Subspace::span_axis(2, 1)),
        ])
    }

    #[test]
    fn single_piece_no_oscillation() {
        let p = SubspacePartition::new(vec![(1.0, Subspace::span_axis(3, 1))]);
        let r = oscillation(&p);
        assert!(r.omega < 1e-8);
    }

    #[test]
    fn orthogonal_half_half() {
        let r = oscillation(&half_half_lines());
        let expect = 1.0 / 2.0f64.sqrt();
        assert!((r.omega - expect).abs() < 1e-9, "ω = {}", r.omega);
        assert!(r.oracle_gap.unwrap() < 1e-3);
        // Lower bound √(δη) is attained here: δ = 1, η = ½.
        assert!(r.omega + 1e-9 >= half_half_lines().angle_lower_bound());
    }

    #[test]
    fn weighted_two_thirds() {
        let p = SubspacePartition::new(vec![
            (2.0 / 3.0, Subspace::span_axis(2, 0)),
            (1.0 / 3.0, Subspace::span_axis(2, 1)),
        ]);
        let r = oscillation(&p);
        assert!((r.omega - 2.0 / 3.0).abs() < 1e-9, "ω = {}", r.omega);
    }

    #[test]
    fn nested_subspaces_share_vector() {
        // span(e1) and span(e1,e2) share e1: ω = 0.
        let s1 = Subspace::span_axis(3, 0);
        let e1 = vec![
            Complex64::new(1.0, 0.0),
            Complex64::default(),
            Complex64::default(),
        ];
        let e2 = vec![
            Complex64::default(),
            Complex64::new(1.0, 0.0),
            Complex64::default(),
        ];
        let s12 = Subspace::new(3, vec![e1, e2]);
        let p = SubspacePartition::new(vec![(0.4, s1), (0.6, s12)]);
        assert!(p.has_common_vector());
        let r = oscillation(&p);
        assert!(r.omega < 1e-6);
        assert!(oscillation_oracle(&p).unwrap() < 1e-3);
    }

    #[test]
    fn zero_iff_common_vector_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for trial in 0..60 {
            let m = rng.gen_range(2..=3usize);
            let npieces = rng.gen_range(2..=3usize);
            let plant_common = trial % 2 == 0;
            let pieces: Vec<(f64, Subspace)> = {
                let mut ws: Vec<f64> = (0..npieces).map(|_| rng.gen_range(0.2..1.0)).collect();
                let total: f64 = ws.iter().sum();
                for w in ws.iter_mut() {
                    *w /= total;
                }
                ws.into_iter()
                    .map(|w| {
                        let dim = if plant_common {
                            rng.gen_range(1..=m - 1)
                        } else {
                            1
                        };
                        let mut basis: Vec<Vec<Complex64>> = Vec::new();
                        if plant_common {
                            let mut v = vec![Complex64::default(); m];
                            v[0] = Complex64::new(1.0, 0.0);
                            basis.push(v);
                        }
                        while basis.len() < dim.max(1) {
                            let mut v: Vec<Complex64> = (0..m)
                                .map(|_| {
                                    Complex64::new(
                                        rng.gen_range(-1.0..1.0),
                                        rng.gen_range(-1.0..1.0),
                                    )
                                })
                                .collect();
                            for b in &basis {
                                let c = cdot(b, &v);
                                for (vi, &bi) in v.iter_mut().zip(b) {
                                    *vi -= c * bi;
                                }
                            }
                            let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
                            if n > 1e-6 {
                                for vi in v.iter_mut() {
                                    *vi /= n;
                                }
                                basis.push(v);
                            }
                        }
                        (w, Subspace::new(m, basis))
                    })
                    .collect()
            };
            let p = SubspacePartition::new(pieces);
            let r = oscillation(&p);
            if plant_common {
                assert!(r.omega < 1e-6, "planted common vector but ω = {}", r.omega);
            } else if !p.has_common_vector() {
                assert!(r.omega > 1e-6, "no common vector but ω = {}", r.omega);
            }
            // Bound and oracle agreement in all cases.
            assert!(r.omega + 1e-6 >= p.angle_lower_bound());
            if let Some(gap) = r.oracle_gap {
                assert!(gap < 1e-3, "oracle gap {gap}");
            }
        }
    }

    #[test]
    fn rearrangement_invariance() {
        // Permuting pieces and splitting a piece in two leaves ω unchanged.
        let base = half_half_lines();
        let split = SubspacePartition::new(vec![
            (0.25, Subspace::span_axis(2, 0)),
            (0.5, Subspace::span_axis(2, 1)),
            (0.25, Subspace::span_axis(2, 0)),
        ]);
        let a = oscillation(&base).omega;
        let b = oscillation(&split).omega;
        assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn pattern_potential_values() {
        // ν ≡ 1, T = span e₁ everywhere: V = diag(0, 1).
        let pattern = TilePattern {
            cells: vec![0],
            subspaces: vec![Subspace::span_axis(2, 0)],
        };
        let pot = OscPotential {
            pattern: &pattern,
            nu: Box::new(|_| 1.0),
        };
        let v = pot.eval(0.3);
        assert!((v[0].norm()) < 1e-14);
        assert!((v[3] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(pot.rank_at(0.3), 1);
    }

    #[test]
    fn two_subspace_tiling_oscillates() {
        let pattern = TilePattern {
            cells: vec![0, 1],
            subspaces: vec![Subspace::span_axis(2, 0), Subspace::span_axis(2, 1)],
        };
        // λ(V) ≡ 0 and rank ≡ 1 for ν > 0.
        let pot = OscPotential {
            pattern: &pattern,
            nu: Box::new(|x: f64| 1.0 + x * x),
        };
        for &x in &[0.1, 0.7, 3.3, 9.9, -2.4] {
            assert_eq!(pot.rank_at(x), 1);
            let v = pot.eval(x);
            // Rank-1 projector times ν: λ_min = 0.
            let m = DMatrix::<f64>::from_row_slice(
                2,
                2,
                &[v[0].re, v[1].re, v[2].re, v[3].re],
            );
            let lam = m
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .fold(f64::INFINITY, |a, &v| a.min(v));
            assert!(lam.abs() < 1e-10);
        }
        // Unit-scale shells all see the base oscillation 1/√2.
        let shells = [(2.0, 6.0), (8.0, 16.0), (32.0, 64.0)];
        let vals = asymptotic_oscillation(&pattern, 1.0, &shells);
        for v in &vals {
            assert!((v - 1.0 / 2.0f64.sqrt()).abs() < 1e-7, "shell ω = {v}");
        }
        // Halving the scale keeps the value on the refining grid (far out).
        let vals_half = asymptotic_oscillation(&pattern, 0.5, &[(8.0, 16.0), (32.0, 64.0)]);
        for v in &vals_half {
            assert!((v - 1.0 / 2.0f64.sqrt()).abs() < 1e-7, "half-scale ω = {v}");
        }
        // Constant mapping: zero per shell.
        let const_pattern = TilePattern {
            cells: vec![0],
            subspaces: vec![Subspace::span_axis(2, 0)],
        };
        for v in asymptotic_oscillation(&const_pattern, 1.0, &shells) {
            assert!(v < 1e-8);
        }
    }

    #[test]
    fn identity_weight_classes() {
        // W = I₂: A∞ density holds with δ = c = 1, and [W]_{A₂} = 1.
        let one = Poly::constant(1, 1);
        let zero = Poly::zero(1);
        let entries = vec![one.clone(), zero.clone(), zero, one];
        let reports =
            muckenhoupt_diagnostics(&entries, 2, &[(0.5, 1.0)], 1.0, 1.0, 0.5, 0.49, 3).unwrap();
        let r = &reports[0];
        assert!(r.def1_pass && (r.def1_fraction - 1.0).abs() < 1e-12);
        assert!(r.def2_pass);
        assert!((r.a2_norm.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn w0_dichotomy() {
        // W₀ = [[1, x], [x, x²]]: fails the density definition for every δ,
        // passes the subset definition at (α, β) = (0.9, 0.02), and has no
        // A₂ constant (det ≡ 0).
        let entries = vec![
            Poly::constant(1, 1),
            Poly::monomial(1, 0, 1, 1),
            Poly::monomial(1, 0, 1, 1),
            Poly::monomial(1, 0, 2, 1),
        ];
        for delta in [1.0, 0.1, 1e-3] {
            let reports =
                muckenhoupt_diagnostics(&entries, 2, &[(0.5, 1.0)], delta, 0.01, 0.9, 0.02, 5)
                    .unwrap();
            let r = &reports[0];
            assert!(!r.def1_pass, "δ = {delta} should fail");
            assert_eq!(r.def1_fraction, 0.0);
            assert!(r.def2_pass, "subset check at β=0.02 (worst {})", r.def2_worst_beta);
            assert!(r.a2_norm.is_none());
        }
        // Exact moment matrix eigenvalue: λ(∫_{[0,1]}W₀) = (4 − √13)/6.
        let int_q = integral_matrix(&entries, 2, 0.0, 1.0);
        assert!((int_q[(0, 0)] - 1.0).abs() < 1e-14);
        assert!((int_q[(0, 1)] - 0.5).abs() < 1e-14);
        assert!((int_q[(1, 1)] - 1.0 / 3.0).abs() < 1e-14);
        let lam = int_q
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(f64::INFINITY, |a, &v| a.min(v));
        let expect = (4.0 - 13.0f64.sqrt()) / 6.0;
        assert!((lam - expect).abs() < 1e-12);
    }

    #[test]
    fn def1_implies_def2_with_derived_parameters() {
        // A potential passing Def. 1 with (c, δ) passes Def. 2 with
        // (1 − c/2, cδ/2): scalar-type example W = (1 + x²) I₂.
        let p = Poly::constant(1, 1).add(&Poly::monomial(1, 0, 2, 1));
        let zero = Poly::zero(1);
        let entries = vec![p.clone(), zero.clone(), zero, p];
        let (delta, c_frac) = (0.5, 0.5);
        for cube in [(0.0, 1.0), (2.0, 1.0), (-1.5, 0.5)] {
            let r1 = muckenhoupt_diagnostics(&entries, 2, &[cube], delta, c_frac, 0.9, 0.0, 7)
                .unwrap();
            assert!(r1[0].def1_pass);
            let r2 = muckenhoupt_diagnostics(
                &entries,
                2,
                &[cube],
                delta,
                c_frac,
                1.0 - c_frac / 2.0,
                c_frac * delta / 2.0,
                7,
            )
            .unwrap();
            assert!(r2[0].def2_pass, "Def.2 at derived parameters: {:?}", r2[0]);
        }
    }

    #[test]
    fn doubling_for_scalar_example() {
        let p = Poly::constant(1, 1).add(&Poly::monomial(1, 0, 2, 1));
        let zero = Poly::zero(1);
        let entries = vec![p.clone(), zero.clone(), zero, p];
        for center in [0.0, 1.0, 3.0] {
            let d = doubling_constant(&entries, 2, (center, 1.0), (center + 0.25, 0.5));
            assert!(d.is_finite() && d >= 1.0 && d < 100.0, "D = {d}");
        }
    }

    #[test]
    fn cube_classification_examples() {
        // V = x² I: good (tr²/8 = x⁴/2 < x⁴ = det away from 0).
        let x2 = Poly::monomial(1, 0, 2, 1);
        let zero = Poly::zero(1);
        let entries = vec![x2.clone(), zero.clone(), zero.clone(), x2];
        assert!(matches!(
            classify_cube(&entries, (0.0, 2.0), 12).unwrap(),
            CubeClass::Good { .. }
        ));
        // V₀: det ≡ 0 < tr²/8 off the origin: bad.
        let x4 = Poly::monomial(1, 0, 4, 1);
        let x5 = Poly::monomial(1, 0, 5, 1);
        let x6 = Poly::monomial(1, 0, 6, 1);
        let entries = vec![x4, x5.clone(), x5, x6];
        assert!(matches!(
            classify_cube(&entries, (0.5, 1.0), 16).unwrap(),
            CubeClass::Bad { .. }
        ));
        // V = diag(1,2): det = 2 > 9/8 = tr²/8: good everywhere.
        let entries = vec![
            Poly::constant(1, 1),
            Poly::zero(1),
            Poly::zero(1),
            Poly::constant(1, 2),
        ];
        assert!(matches!(
            classify_cube(&entries, (0.0, 4.0), 4).unwrap(),
            CubeClass::Good { .. }
        ));
        // Degenerate branch: tr²/8 − det ≡ 0 (e.g. the zero potential).
        let entries = vec![Poly::zero(1); 4];
        assert_eq!(
            classify_cube(&entries, (0.0, 1.0), 4).unwrap(),
            CubeClass::Isotropic
        );
    }
}
