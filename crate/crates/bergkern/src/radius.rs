//! Radius functions from doubling potentials and the metric they induce.
//!
//! A radius function ρ assigns to each point the largest scale at which the
//! potential is invisible: f(x,r) = r²·sup_{B(x,r)} V ≤ 1.  The field is
//! sampled on a uniform grid; the associated distance d_ρ comes from shortest
//! paths on the grid graph with edge weight (euclidean length)/ρ(midpoint).

use crate::newton::{rat_f64, HomogeneousProfile};
use crate::weights::laplacian_at_moduli;
use crate::MonomialSet;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RadiusError {
    #[error("potential vanishes identically on the domain")]
    ZeroPotential,
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("target node {0} unreachable from source")]
    UnreachableTarget(usize),
}

/// Uniform rectangular grid in 1 or 2 dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub origin: Vec<f64>,
    pub dims: Vec<usize>,
    pub h: f64,
}

impl Grid {
    pub fn line(a: f64, b: f64, h: f64) -> Self {
        let n = ((b - a) / h).round() as usize + 1;
        Grid {
            origin: vec![a],
            dims: vec![n],
            h,
        }
    }

    pub fn rect(a: [f64; 2], b: [f64; 2], h: f64) -> Self {
        let nx = ((b[0] - a[0]) / h).round() as usize + 1;
        let ny = ((b[1] - a[1]) / h).round() as usize + 1;
        Grid {
            origin: a.to_vec(),
            dims: vec![nx, ny],
            h,
        }
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn ndim(&self) -> usize {
        self.dims.len()
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        let mut rem = idx;
        let mut out = Vec::with_capacity(self.ndim());
        for (k, &d) in self.dims.iter().enumerate() {
            out.push(self.origin[k] + self.h * (rem % d) as f64);
            rem /= d;
        }
        out
    }

    pub fn multi(&self, idx: usize) -> Vec<usize> {
        let mut rem = idx;
        self.dims
            .iter()
            .map(|&d| {
                let i = rem % d;
                rem /= d;
                i
            })
            .collect()
    }

    pub fn index(&self, multi: &[usize]) -> usize {
        let mut idx = 0;
        let mut stride = 1;
        for (i, &d) in multi.iter().zip(&self.dims) {
            idx += i * stride;
            stride *= d;
        }
        idx
    }

    /// Nearest grid node to a point.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let multi: Vec<usize> = x
            .iter()
            .zip(self.origin.iter().zip(&self.dims))
            .map(|(&xi, (&oi, &d))| {
                (((xi - oi) / self.h).round().max(0.0) as usize).min(d - 1)
            })
            .collect();
        self.index(&multi)
    }

    pub fn diameter(&self) -> f64 {
        self.dims
            .iter()
            .map(|&d| ((d - 1) as f64 * self.h).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Provenance tag of a radius field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FieldSource {
    FromPotential,
    FromMu,
    Max,
    Explicit,
}

/// Grid-sampled radius function with its empirical comparability constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadiusField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub comparability: f64,
    pub source: FieldSource,
    /// Nodes where f(diam) ≤ 1 and the bisection bracket saturated.
    pub unsaturated: usize,
}

/// Pointwise evaluator with a ball-supremum bound.
pub trait BallSup: Sync {
    fn value(&self, x: &[f64]) -> f64;
    fn ball_sup(&self, x: &[f64], r: f64) -> f64;
}

/// Δφ_Γ over the (|z|,|w|) quadrant.  tr H_φ is monotone in both moduli, so
/// the ball sup over B((z,w),r) ⊂ ℂ² equals the max of the polynomial at
/// moduli (|z| + r cosθ, |w| + r sinθ) over θ ∈ [0, π/2]; a θ-scan captures
/// it to high accuracy.
pub struct ModelLaplacianSup {
    pub gamma: MonomialSet,
}

impl BallSup for ModelLaplacianSup {
    fn value(&self, x: &[f64]) -> f64 {
        laplacian_at_moduli(&self.gamma, x[0], x[1])
    }

    fn ball_sup(&self, x: &[f64], r: f64) -> f64 {
        const THETAS: usize = 65;
        let mut best = 0.0f64;
        for k in 0..THETAS {
            let th = std::f64::consts::FRAC_PI_2 * k as f64 / (THETAS - 1) as f64;
            let v = laplacian_at_moduli(&self.gamma, x[0] + r * th.cos(), x[1] + r * th.sin());
            best = best.max(v);
        }
        best
    }
}

/// Generic scalar potential: the ball sup is the max over grid samples in
/// the ball with a one-cell dilation.
pub struct SampledSup<F: Fn(&[f64]) -> f64 + Sync> {
    pub f: F,
    pub grid: Grid,
}

impl<F: Fn(&[f64]) -> f64 + Sync> BallSup for SampledSup<F> {
    fn value(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn ball_sup(&self, x: &[f64], r: f64) -> f64 {
        let reach = r + self.grid.h;
        let steps = (reach / self.grid.h).ceil() as i64;
        let center: Vec<i64> = x
            .iter()
            .zip(&self.grid.origin)
            .map(|(&xi, &oi)| ((xi - oi) / self.grid.h).round() as i64)
            .collect();
        let mut best = (self.f)(x);
        let mut visit = |multi: &[i64]| {
            let mut pt = Vec::with_capacity(multi.len());
            let mut dist2 = 0.0;
            for (k, &mi) in multi.iter().enumerate() {
                let d = self.grid.dims[k] as i64;
                let ci = mi.clamp(0, d - 1);
                let coord = self.grid.origin[k] + self.grid.h * ci as f64;
                pt.push(coord);
                dist2 += (coord - x[k]).powi(2);
            }
            if dist2 <= reach * reach {
                best = best.max((self.f)(&pt));
            }
        };
        match self.grid.ndim() {
            1 => {
                for i in -steps..=steps {
                    visit(&[center[0] + i]);
                }
            }
            2 => {
                for i in -steps..=steps {
                    for j in -steps..=steps {
                        visit(&[center[0] + i, center[1] + j]);
                    }
                }
            }
            d => panic!("unsupported grid dimension {d}"),
        }
        best
    }
}

/// Builds ρ_V on the grid by bisecting f(x,r) = r²·sup_{B(x,r)} V in r.
///
/// Bracket [h/4, diam]; nodes where even f(diam) ≤ 1 get the diameter value
/// and are counted as unsaturated.
pub fn rho_from_potential(pot: &dyn BallSup, grid: &Grid) -> Result<RadiusField, RadiusError> {
    let diam = grid.diameter().max(grid.h);
    let center = {
        let mid: Vec<usize> = grid.dims.iter().map(|&d| d / 2).collect();
        grid.coords(grid.index(&mid))
    };
    if pot.ball_sup(&center, diam) == 0.0 {
        return Err(RadiusError::ZeroPotential);
    }
    let f = |x: &[f64], r: f64| r * r * pot.ball_sup(x, r);
    let values: Vec<(f64, bool)> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let x = grid.coords(i);
            let mut lo = grid.h / 4.0;
            let mut hi = diam;
            if f(&x, hi) <= 1.0 {
                return (hi, true);
            }
            if f(&x, lo) > 1.0 {
                // ρ below the nominal bracket; extend downward.
                hi = lo;
                lo = 1e-12 * diam;
            }
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if f(&x, mid) <= 1.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if (hi - lo) <= 1e-6 * lo {
                    break;
                }
            }
            (0.5 * (lo + hi), false)
        })
        .collect();
    let unsaturated = values.iter().filter(|v| v.1).count();
    let mut field = RadiusField {
        grid: grid.clone(),
        values: values.into_iter().map(|v| v.0).collect(),
        comparability: 1.0,
        source: FieldSource::FromPotential,
        unsaturated,
    };
    field.comparability = estimate_comparability(&field);
    Ok(field)
}

/// κ = c⁻¹ (1 + |z|^σ + |w|^τ)⁻¹ sampled over the moduli quadrant grid.
pub fn rho_from_mu(profile: &HomogeneousProfile, c: f64, grid: &Grid) -> RadiusField {
    assert!(c > 0.0);
    assert_eq!(grid.ndim(), 2);
    let sigma = rat_f64(profile.sigma);
    let tau = rat_f64(profile.tau);
    let pw = |x: f64, e: f64| if e == 0.0 { 1.0 } else { x.powf(e) };
    let values: Vec<f64> = (0..grid.len())
        .map(|i| {
            let p = grid.coords(i);
            1.0 / (c * (1.0 + pw(p[0], sigma) + pw(p[1], tau)))
        })
        .collect();
    let mut field = RadiusField {
        grid: grid.clone(),
        values,
        comparability: 1.0,
        source: FieldSource::FromMu,
        unsaturated: 0,
    };
    field.comparability = estimate_comparability(&field);
    field
}

/// Pointwise maximum of two fields on the same grid.
pub fn radius_max(a: &RadiusField, b: &RadiusField) -> Result<RadiusField, RadiusError> {
    if a.grid != b.grid {
        return Err(RadiusError::GridMismatch);
    }
    let values: Vec<f64> = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| x.max(y))
        .collect();
    let mut field = RadiusField {
        grid: a.grid.clone(),
        values,
        comparability: a.comparability * b.comparability,
        source: FieldSource::Max,
        unsaturated: 0,
    };
    // Product of constants is the proof-level bound; the empirical value on
    // the grid can only be smaller.
    field.comparability = field.comparability.min(estimate_comparability(&field));
    Ok(field)
}

/// Empirical comparability constant: max of ρ(x)/ρ(y) over grid pairs with
/// |x−y| ≤ ρ(x), subsampled when the ball holds many nodes.
pub fn estimate_comparability(field: &RadiusField) -> f64 {
    let grid = &field.grid;
    let mut c = 1.0f64;
    for i in 0..grid.len() {
        let xi = grid.coords(i);
        let r = field.values[i];
        let steps = (r / grid.h).ceil() as i64;
        let stride = (steps / 8).max(1);
        let mi = grid.multi(i);
        let mut check = |multi: &[i64]| {
            for (k, &m) in multi.iter().enumerate() {
                if m < 0 || m >= grid.dims[k] as i64 {
                    return;
                }
            }
            let j = grid.index(&multi.iter().map(|&m| m as usize).collect::<Vec<_>>());
            let xj = grid.coords(j);
            let d2: f64 = xi.iter().zip(&xj).map(|(a, b)| (a - b).powi(2)).sum();
            if d2 <= r * r {
                let ratio = field.values[i] / field.values[j];
                c = c.max(ratio.max(1.0 / ratio));
            }
        };
        match grid.ndim() {
            1 => {
                let mut s = -steps;
                while s <= steps {
                    check(&[mi[0] as i64 + s]);
                    s += stride;
                }
            }
            2 => {
                let mut s = -steps;
                while s <= steps {
                    let mut t = -steps;
                    while t <= steps {
                        check(&[mi[0] as i64 + s, mi[1] as i64 + t]);
                        t += stride;
                    }
                    s += stride;
                }
            }
            d => panic!("unsupported grid dimension {d}"),
        }
    }
    c
}

/// Greedy covering report: selected centers and the empirical multiplicity
/// bound of the inflated balls.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringReport {
    pub centers: Vec<usize>,
    pub multiplicity: usize,
}

/// Maximal disjoint subfamily of the shrunken balls B(x, ρ(x)/(1+C²)),
/// greedily over grid nodes; asserts the inflated balls cover every node.
pub fn greedy_covering(field: &RadiusField) -> CoveringReport {
    let grid = &field.grid;
    let shrink = 1.0 + field.comparability * field.comparability;
    let mut centers: Vec<usize> = Vec::new();
    for i in 0..grid.len() {
        let xi = grid.coords(i);
        let ri = field.values[i] / shrink;
        let disjoint = centers.iter().all(|&j| {
            let xj = grid.coords(j);
            let rj = field.values[j] / shrink;
            let d2: f64 = xi.iter().zip(&xj).map(|(a, b)| (a - b).powi(2)).sum();
            d2.sqrt() >= ri + rj
        });
        if disjoint {
            centers.push(i);
        }
    }
    let mut multiplicity = 0usize;
    for i in 0..grid.len() {
        let xi = grid.coords(i);
        let count = centers
            .iter()
            .filter(|&&j| {
                let xj = grid.coords(j);
                let d2: f64 = xi.iter().zip(&xj).map(|(a, b)| (a - b).powi(2)).sum();
                d2.sqrt() <= field.values[j]
            })
            .count();
        assert!(count > 0, "inflated balls fail to cover node {i}");
        multiplicity = multiplicity.max(count);
    }
    CoveringReport {
        centers,
        multiplicity,
    }
}

/// Neighbor stencil for the metric graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stencil {
    /// Axis + diagonal neighbors (8 in 2D, 2 in 1D).
    AxisDiagonal,
    /// Adds knight moves; cuts the 2D metrication error to ~2.8%.
    Sixteen,
}

/// Weighted grid graph carrying the metric ρ⁻² dx².
pub struct MetricGraph {
    pub grid: Grid,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl MetricGraph {
    /// Builds the graph; `mask` (when given) removes nodes.
    pub fn new(field: &RadiusField, stencil: Stencil, mask: Option<&[bool]>) -> Self {
        let grid = &field.grid;
        let offsets: Vec<Vec<i64>> = match (grid.ndim(), stencil) {
            (1, _) => vec![vec![1]],
            (2, Stencil::AxisDiagonal) => {
                vec![vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -1]]
            }
            (2, Stencil::Sixteen) => vec![
                vec![1, 0],
                vec![0, 1],
                vec![1, 1],
                vec![1, -1],
                vec![2, 1],
                vec![2, -1],
                vec![1, 2],
                vec![1, -2],
            ],
            (d, _) => panic!("unsupported grid dimension {d}"),
        };
        let mut adjacency = vec![Vec::new(); grid.len()];
        let active = |i: usize| mask.map_or(true, |m| m[i]);
        for i in 0..grid.len() {
            if !active(i) {
                continue;
            }
            let mi = grid.multi(i);
            for off in &offsets {
                let mut mj = Vec::with_capacity(mi.len());
                let mut ok = true;
                for (k, &o) in off.iter().enumerate() {
                    let v = mi[k] as i64 + o;
                    if v < 0 || v >= grid.dims[k] as i64 {
                        ok = false;
                        break;
                    }
                    mj.push(v as usize);
                }
                if !ok {
                    continue;
                }
                let j = grid.index(&mj);
                if !active(j) {
                    continue;
                }
                let len = grid.h
                    * off
                        .iter()
                        .map(|&o| (o * o) as f64)
                        .sum::<f64>()
                        .sqrt();
                // ρ at the edge midpoint, taken as the endpoint average.
                let rho_mid = 0.5 * (field.values[i] + field.values[j]);
                let w = len / rho_mid;
                adjacency[i].push((j, w));
                adjacency[j].push((i, w));
            }
        }
        MetricGraph {
            grid: grid.clone(),
            adjacency,
        }
    }

    /// Single-source shortest-path distances (f64::INFINITY = unreachable).
    pub fn distances(&self, source: usize) -> Vec<f64> {
        #[derive(PartialEq)]
        struct State {
            cost: f64,
            node: usize,
        }
        impl Eq for State {}
        impl Ord for State {
            fn cmp(&self, other: &Self) -> Ordering {
                other
                    .cost
                    .partial_cmp(&self.cost)
                    .unwrap_or(Ordering::Equal)
            }
        }
        impl PartialOrd for State {
            fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
                Some(self.cmp(other))
            }
        }
        let mut dist = vec![f64::INFINITY; self.adjacency.len()];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(State {
            cost: 0.0,
            node: source,
        });
        while let Some(State { cost, node }) = heap.pop() {
            if cost > dist[node] {
                continue;
            }
            for &(next, w) in &self.adjacency[node] {
                let nc = cost + w;
                if nc < dist[next] {
                    dist[next] = nc;
                    heap.push(State {
                        cost: nc,
                        node: next,
                    });
                }
            }
        }
        dist
    }
}

/// d̂_ρ from a source node to each target node.
pub fn agmon_distance(
    graph: &MetricGraph,
    source: usize,
    targets: &[usize],
) -> Result<Vec<f64>, RadiusError> {
    let dist = graph.distances(source);
    targets
        .iter()
        .map(|&t| {
            if dist[t].is_finite() {
                Ok(dist[t])
            } else {
                Err(RadiusError::UnreachableTarget(t))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::derive_profile;

    fn explicit_field(grid: Grid, values: Vec<f64>) -> RadiusField {
        let mut f = RadiusField {
            grid,
            values,
            comparability: 1.0,
            source: FieldSource::Explicit,
            unsaturated: 0,
        };
        f.comparability = estimate_comparability(&f);
        f
    }

    #[test]
    fn constant_potential() {
        let grid = Grid::line(0.0, 2.0, 0.05);
        let pot = SampledSup {
            f: |_: &[f64]| 4.0,
            grid: grid.clone(),
        };
        let field = rho_from_potential(&pot, &grid).unwrap();
        for &v in &field.values {
            assert!((v - 0.5).abs() < 1e-5, "rho {v}");
        }
    }

    #[test]
    fn constant_hessian_laplacian() {
        // Γ = {(1,0),(0,1)} has Δφ ≡ 8, so ρ ≡ 1/(2√2).
        let grid = Grid::rect([0.0, 0.0], [1.0, 1.0], 0.1);
        let pot = ModelLaplacianSup {
            gamma: MonomialSet::new([(1, 0), (0, 1)]).unwrap(),
        };
        let field = rho_from_potential(&pot, &grid).unwrap();
        let expect = 1.0 / (2.0 * 2.0f64.sqrt());
        for &v in &field.values {
            assert!((v - expect).abs() < 1e-5);
        }
    }

    #[test]
    fn quadratic_laplacian_origin() {
        // Γ = {(2,0),(0,2)}: sup over B(0,r) of Δφ = 16r², so ρ(0) = 1/2.
        let grid = Grid::rect([0.0, 0.0], [3.0, 3.0], 0.25);
        let pot = ModelLaplacianSup {
            gamma: MonomialSet::new([(2, 0), (0, 2)]).unwrap(),
        };
        let field = rho_from_potential(&pot, &grid).unwrap();
        assert!((field.values[0] - 0.5).abs() < 1e-4, "rho(0) = {}", field.values[0]);
    }

    #[test]
    fn zero_potential_rejected() {
        let grid = Grid::line(0.0, 1.0, 0.1);
        let pot = SampledSup {
            f: |_: &[f64]| 0.0,
            grid: grid.clone(),
        };
        assert!(matches!(
            rho_from_potential(&pot, &grid),
            Err(RadiusError::ZeroPotential)
        ));
    }

    #[test]
    fn kappa_values() {
        let dec = derive_profile(&MonomialSet::new([(2, 0), (0, 2)]).unwrap()).unwrap();
        let grid = Grid::rect([0.0, 0.0], [2.0, 2.0], 0.5);
        let f = rho_from_mu(&dec, 1.0, &grid);
        for &v in &f.values {
            assert!((v - 1.0 / 3.0).abs() < 1e-14);
        }
        let quad = derive_profile(&MonomialSet::new([(2, 0), (1, 1), (0, 2)]).unwrap()).unwrap();
        let f = rho_from_mu(&quad, 1.0, &grid);
        let idx = grid.nearest(&[1.0, 1.0]);
        assert!((f.values[idx] - 1.0 / 3.0).abs() < 1e-14);
        let fig = derive_profile(
            &MonomialSet::new([(16, 0), (12, 3), (8, 6), (4, 9), (0, 12)]).unwrap(),
        )
        .unwrap();
        let f = rho_from_mu(&fig, 1.0, &grid);
        let idx = grid.nearest(&[2.0, 0.0]);
        assert!((f.values[idx] - 1.0 / 17.0).abs() < 1e-14);
    }

    #[test]
    fn max_is_idempotent_and_pointwise() {
        let grid = Grid::line(0.0, 1.0, 0.25);
        let a = explicit_field(grid.clone(), vec![1.0, 2.0, 3.0, 2.0, 1.0]);
        let same = radius_max(&a, &a).unwrap();
        assert_eq!(same.values, a.values);
        let b = explicit_field(grid.clone(), vec![2.0, 1.0, 1.0, 4.0, 1.0]);
        let m = radius_max(&a, &b).unwrap();
        assert_eq!(m.values, vec![2.0, 2.0, 3.0, 4.0, 1.0]);
        let other = explicit_field(Grid::line(0.0, 2.0, 0.5), vec![1.0; 5]);
        assert!(matches!(
            radius_max(&a, &other),
            Err(RadiusError::GridMismatch)
        ));
    }

    #[test]
    fn covering_1d() {
        let grid = Grid::line(0.0, 10.0, 0.1);
        let field = explicit_field(grid.clone(), vec![1.0; grid.len()]);
        let report = greedy_covering(&field);
        assert!(report.centers.len() > 1);
        assert!(report.multiplicity <= 3);
        // Single node grid → one center.
        let tiny = explicit_field(Grid::line(0.0, 0.0, 1.0), vec![1.0]);
        assert_eq!(greedy_covering(&tiny).centers, vec![0]);
    }

    #[test]
    fn agmon_1d_log() {
        // ρ(x) = max(1,x): d(0,X) = 1 + ln X; X = e³ gives 4.
        let x_max = std::f64::consts::E.powi(3);
        let grid = Grid::line(0.0, x_max, 0.01);
        let values: Vec<f64> = (0..grid.len())
            .map(|i| grid.coords(i)[0].max(1.0))
            .collect();
        let field = explicit_field(grid.clone(), values);
        let graph = MetricGraph::new(&field, Stencil::AxisDiagonal, None);
        let target = grid.nearest(&[x_max]);
        let d = agmon_distance(&graph, 0, &[target]).unwrap()[0];
        assert!((d - 4.0).abs() / 4.0 < 0.02, "d = {d}");
    }

    #[test]
    fn euclidean_recovery() {
        let grid = Grid::rect([0.0, 0.0], [2.0, 2.0], 0.05);
        let field = explicit_field(grid.clone(), vec![1.0; grid.len()]);
        let graph = MetricGraph::new(&field, Stencil::AxisDiagonal, None);
        let src = grid.nearest(&[0.0, 0.0]);
        let dist = graph.distances(src);
        for target in [[2.0, 0.0], [2.0, 2.0], [2.0, 1.0], [1.0, 2.0], [2.0, 0.8]] {
            let t = grid.nearest(&target);
            let true_d = (target[0].powi(2) + target[1].powi(2)).sqrt();
            let err = (dist[t] - true_d) / true_d;
            assert!((-1e-9..0.083).contains(&err), "target {target:?}: err {err}");
        }
        // Knight-move stencil tightens the worst direction below 3%.
        let graph16 = MetricGraph::new(&field, Stencil::Sixteen, None);
        let dist16 = graph16.distances(src);
        for target in [[2.0, 0.8], [2.0, 1.0]] {
            let t = grid.nearest(&target);
            let true_d = (target[0].powi(2) + target[1].powi(2)).sqrt();
            let err = (dist16[t] - true_d) / true_d;
            assert!((-1e-9..0.03).contains(&err), "16-stencil err {err}");
        }
    }

    #[test]
    fn triangle_inequality() {
        let grid = Grid::rect([0.0, 0.0], [1.0, 1.0], 0.1);
        let values: Vec<f64> = (0..grid.len())
            .map(|i| {
                let p = grid.coords(i);
                0.3 + p[0] + 0.5 * p[1]
            })
            .collect();
        let field = explicit_field(grid.clone(), values);
        let graph = MetricGraph::new(&field, Stencil::AxisDiagonal, None);
        let nodes = [0usize, 37, 60, 99, 110];
        let all: Vec<Vec<f64>> = nodes.iter().map(|&n| graph.distances(n)).collect();
        for (i, &a) in nodes.iter().enumerate() {
            let _ = a;
            for (j, &b) in nodes.iter().enumerate() {
                for &c in &nodes {
                    assert!(all[i][c] <= all[i][nodes[j]] + all[j][c] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn unreachable_with_mask() {
        let grid = Grid::line(0.0, 1.0, 0.25);
        let field = explicit_field(grid.clone(), vec![1.0; 5]);
        let mask = vec![true, true, false, true, true];
        let graph = MetricGraph::new(&field, Stencil::AxisDiagonal, Some(&mask));
        assert!(matches!(
            agmon_distance(&graph, 0, &[4]),
            Err(RadiusError::UnreachableTarget(4))
        ));
    }

    #[test]
    fn potential_monotonicity() {
        // Larger V gives pointwise smaller ρ.
        let grid = Grid::line(-2.0, 2.0, 0.05);
        let small = SampledSup {
            f: |x: &[f64]| 1.0 + x[0] * x[0],
            grid: grid.clone(),
        };
        let large = SampledSup {
            f: |x: &[f64]| 4.0 + 3.0 * x[0] * x[0],
            grid: grid.clone(),
        };
        let fs = rho_from_potential(&small, &grid).unwrap();
        let fl = rho_from_potential(&large, &grid).unwrap();
        for (a, b) in fs.values.iter().zip(&fl.values) {
            assert!(b <= a);
        }
    }

    #[test]
    fn rsquared_sandwich() {
        // ρ⁻²/(4D) ≤ sup_{B(x,ρ(x))} V ≤ ρ⁻² with D the doubling constant of
        // the ball sups measured at the radii the field actually uses.
        let grid = Grid::line(-4.0, 4.0, 0.05);
        let pot = SampledSup {
            f: |x: &[f64]| x[0] * x[0] + 0.5,
            grid: grid.clone(),
        };
        let field = rho_from_potential(&pot, &grid).unwrap();
        let mut dconst = 1.0f64;
        for i in 0..grid.len() {
            let x = grid.coords(i);
            let r = field.values[i];
            let ratio = pot.ball_sup(&x, 2.0 * r) / pot.ball_sup(&x, r);
            dconst = dconst.max(ratio);
        }
        assert!(dconst <= 16.0, "doubling constant {dconst}");
        for i in 0..grid.len() {
            let x = grid.coords(i);
            let rho = field.values[i];
            let sup = pot.ball_sup(&x, rho);
            let inv2 = rho.powi(-2);
            assert!(sup <= inv2 * (1.0 + 1e-4), "upper: {sup} vs {inv2}");
            assert!(
                sup >= inv2 / (4.0 * dconst) * (1.0 - 1e-4),
                "lower: {sup} vs {}",
                inv2 / (4.0 * dconst)
            );
        }
    }

    #[test]
    fn ball_inclusions() {
        // B_ρ(x, C⁻¹r) ⊆ B(x, rρ(x)) ⊆ B_ρ(x, Cr(1+slack)) for r ≤ 1.
        let grid = Grid::rect([0.0, 0.0], [2.0, 2.0], 0.05);
        let values: Vec<f64> = (0..grid.len())
            .map(|i| {
                let p = grid.coords(i);
                0.4 + 0.3 * p[0] + 0.2 * p[1]
            })
            .collect();
        let field = explicit_field(grid.clone(), values);
        let c = field.comparability;
        let graph = MetricGraph::new(&field, Stencil::AxisDiagonal, None);
        let slack = 1.09;
        for &src_pt in &[[0.5, 0.5], [1.5, 1.0]] {
            let src = grid.nearest(&src_pt);
            let rho_x = field.values[src];
            let xs = grid.coords(src);
            let dist = graph.distances(src);
            for r in [0.3, 0.6, 1.0] {
                for j in 0..grid.len() {
                    let xj = grid.coords(j);
                    let euclid: f64 = xs
                        .iter()
                        .zip(&xj)
                        .map(|(a, b)| (a - b).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    if dist[j] < r / c {
                        assert!(euclid <= r * rho_x + grid.h + 1e-12);
                    }
                    if euclid <= r * rho_x {
                        assert!(dist[j] <= c * r * slack + grid.h / field.values[j]);
                    }
                }
            }
        }
    }
}
