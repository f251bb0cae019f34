//! Experiment dispatch: one config in, one deterministic report out.

use crate::bergman::{self, kernel_eval};
use crate::config::*;
use crate::newton::{self, derive_profile, rat_f64, Rat};
use crate::oscillation::{self, CubeClass, Subspace, SubspacePartition};
use crate::poly::Poly;
use crate::quad;
use crate::radius::{
    agmon_distance, estimate_comparability, greedy_covering, rho_from_mu, rho_from_potential,
    BallSup, FieldSource, Grid, MetricGraph, ModelLaplacianSup, RadiusField, SampledSup, Stencil,
};
use crate::report::{fmt_f64, CsvFile, RunReport};
use crate::schrodinger::{
    self, assemble_operator, coercivity_scan, equivalence_check, equivalence_check_n1,
    extremal_eigenvalues, BumpMonomial, QuadBox, SymplecticGradient, TestForm,
};
use crate::weights::{eval_weight, hessian, ComplexPoint2};
use crate::MonomialSet;
use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{kind}: {message}")]
    Module { kind: String, message: String },
}

fn module_err(kind: &Kind, e: impl std::fmt::Display) -> RunError {
    RunError::Module {
        kind: kind.to_string(),
        message: e.to_string(),
    }
}

fn parse_params<T: serde::de::DeserializeOwned>(cfg: &ExperimentConfig) -> Result<T, RunError> {
    serde_json::from_value(cfg.params.clone()).map_err(|e| {
        RunError::Config(ConfigError::Invalid {
            path: "<params>".into(),
            message: e.to_string(),
        })
    })
}

fn gamma_from_spec(spec: &GammaSpec) -> Result<MonomialSet, RunError> {
    MonomialSet::new(spec.iter().map(|p| (p[0], p[1]))).map_err(|e| RunError::Module {
        kind: "gamma".into(),
        message: e.to_string(),
    })
}

/// Runs one experiment; assertion failures are recorded in the report (the
/// caller maps them to the exit code), config/module errors bubble up.
pub fn run_config(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    match cfg.kind {
        Kind::Profile => run_profile(cfg),
        Kind::HessianCheck => run_hessian_check(cfg),
        Kind::Rho => run_rho(cfg),
        Kind::Dist => run_dist(cfg),
        Kind::Moments => run_moments(cfg),
        Kind::Kernel => run_kernel(cfg),
        Kind::BoundFit => run_bound_fit(cfg),
        Kind::Spectrum => run_spectrum(cfg),
        Kind::Coercivity => run_coercivity(cfg),
        Kind::Equivalence => run_equivalence(cfg),
        Kind::Discreteness => run_discreteness(cfg),
        Kind::Oscillation => run_oscillation(cfg),
        Kind::Muckenhoupt => run_muckenhoupt(cfg),
        Kind::ClassifyCube => run_classify_cube(cfg),
    }
}

fn rat_str(r: Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn run_profile(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let params: ProfileParams = parse_params(cfg)?;
    let gamma = gamma_from_spec(&params.gamma)?;
    let profile = derive_profile(&gamma).map_err(|e| module_err(&cfg.kind, e))?;
    let mut report = RunReport::new(cfg, &params);
    report.push_output("m", profile.mdeg.to_string());
    report.push_output("n", profile.ndeg.to_string());
    report.push_output("sigma", rat_str(profile.sigma));
    report.push_output("tau", rat_str(profile.tau));
    report.push_output(
        "corner1",
        format!("({},{})", profile.corner1.0, profile.corner1.1),
    );
    report.push_output(
        "corner2",
        format!("({},{})", profile.corner2.0, profile.corner2.1),
    );
    report.push_output(
        "nu",
        profile.nu.map_or("undefined".into(), rat_str),
    );
    report.push_output("decoupled", profile.decoupled.to_string());
    report.push_output("swapped", profile.swapped.to_string());
    let mut rows = vec![
        vec!["m".to_string(), profile.mdeg.to_string()],
        vec!["n".to_string(), profile.ndeg.to_string()],
        vec!["sigma".to_string(), rat_str(profile.sigma)],
        vec!["tau".to_string(), rat_str(profile.tau)],
    ];
    for (name, set) in [
        ("gamma_1", &profile.gamma_1),
        ("gamma_2", &profile.gamma_2),
        ("gamma_r", &profile.gamma_r),
        ("gamma_u", &profile.gamma_u),
    ] {
        for (a, b) in set.points() {
            rows.push(vec![name.to_string(), format!("({a},{b})")]);
        }
    }
    report.csv_files.push(CsvFile {
        name: "profile.csv".into(),
        header: vec!["key".into(), "value".into()],
        rows,
    });
    report.assert_that(
        "profile-invariants",
        true,
        "homogeneity and corner checks passed in derive_profile".into(),
    );
    Ok(report)
}

fn random_point(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> ComplexPoint2 {
    let coord = |rng: &mut ChaCha8Rng| {
        Complex64::from_polar(
            rng.gen_range(lo..hi),
            rng.gen_range(0.0..std::f64::consts::TAU),
        )
    };
    ComplexPoint2::new(coord(rng), coord(rng))
}

fn finite_diff_entry_defect(gamma: &MonomialSet, p: &ComplexPoint2) -> f64 {
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
    // Richardson extrapolation kills the h² truncation term.
    let second = |i: usize, j: usize| {
        let h = 1e-3 * scale;
        (4.0 * second_at(i, j, h / 2.0) - second_at(i, j, h)) / 3.0
    };
    let h11 = 0.25 * (second(0, 0) + second(1, 1));
    let h22 = 0.25 * (second(2, 2) + second(3, 3));
    let h12 = Complex64::new(
        0.25 * (second(0, 2) + second(1, 3)),
        0.25 * (second(0, 3) - second(1, 2)),
    );
    let exact = hessian(gamma, p);
    let mut defect = 0.0f64;
    for (fd, ex) in [
        (Complex64::new(h11, 0.0), exact.entries[0][0]),
        (h12, exact.entries[0][1]),
        (Complex64::new(h22, 0.0), exact.entries[1][1]),
    ] {
        defect = defect.max((fd - ex).norm() / (1.0 + ex.norm()));
    }
    defect
}

fn run_hessian_check(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let params: HessianCheckParams = parse_params(cfg)?;
    let gamma = gamma_from_spec(&params.gamma)?;
    let profile = derive_profile(&gamma).map_err(|e| module_err(&cfg.kind, e))?;
    let mut report = RunReport::new(cfg, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Finite-difference agreement on random points with moduli in [0.1, 3].
    let mut fd_worst = 0.0f64;
    for _ in 0..params.samples {
        let p = random_point(&mut rng, 0.1, 3.0);
        fd_worst = fd_worst.max(finite_diff_entry_defect(&gamma, &p));
    }
    report.push_float("finite_difference_worst_rel", fd_worst);
    report.assert_that(
        "hessian-finite-differences",
        fd_worst < 1e-6,
        format!("worst relative defect {fd_worst:.3e} < 1e-6"),
    );

    // Multiplicity-exact det reference must match identically.
    let mut dref_worst = 0.0f64;
    for _ in 0..params.samples {
        let p = random_point(&mut rng, 0.1, 3.0);
        let h = hessian(&gamma, &p);
        let dref = crate::weights::det_reference(&gamma, &p);
        dref_worst = dref_worst.max((h.det_val - dref).abs() / (1.0 + dref.abs()));
    }
    report.assert_that(
        "det-ordered-pair-expansion",
        dref_worst < 1e-10,
        format!("worst {dref_worst:.3e}"),
    );

    // Comparability ratios against φ_{Γ⁽¹⁾}, φ_{Γ⁽²⁾} with the enumerated K.
    let pts: Vec<ComplexPoint2> = (0..params.samples)
        .map(|_| random_point(&mut rng, 0.1, 3.0))
        .collect();
    let cons = crate::weights::hessian_consistency_check(&profile, &pts)
        .map_err(|e| module_err(&cfg.kind, e))?;
    report.push_float("k_bound", cons.k_bound);
    report.push_float("det_ratio_min", cons.det_ratio.min);
    report.push_float("det_ratio_max", cons.det_ratio.max);
    report.push_float("tr_ratio_min", cons.tr_ratio.min);
    report.push_float("tr_ratio_max", cons.tr_ratio.max);
    report.assert_that(
        "hessian-comparability",
        true,
        "all ratios within [1/K, K] (checked inside the scan)".into(),
    );

    // Region eigenvalue monomials along power curves with the curve
    // parameter t = s² running up to scale_max.
    if !profile.decoupled {
        let (m, n) = (f64::from(profile.mdeg), f64::from(profile.ndeg));
        let (a1, b1) = profile.corner1;
        let (a2, b2) = profile.corner2;
        let nu = profile.nu.map(rat_f64).unwrap_or(0.0);
        let sigma = rat_f64(profile.sigma);
        let tau = rat_f64(profile.tau);
        let mut worst_ratio = 1.0f64;
        let mut region_samples = 0usize;
        let steps = 25;
        let s_max = params.scale_max.sqrt();
        for i in 0..steps {
            let s = 1.05 * (s_max / 1.05).powf(i as f64 / (steps - 1) as f64);
            // (|z|, |w|) candidates aimed at E1, E2 and E3.
            let candidates = [
                (s, s.powf(0.7 * m / n)),
                (s, s.powf(-0.5 * sigma)),
                (s.powf(0.5 * (nu + n / m)), s),
                (s.powf(0.75 * n / m + 0.25 * nu), s),
                (s.powf(0.5 * nu.max(-0.5 * tau)), s),
                (s.powf(-0.5 * tau), s),
            ];
            for (za, wa) in candidates {
                let tag = newton::classify_point(&profile, za, wa);
                let monomial = match tag {
                    newton::RegionTag::E1 => {
                        za.powi(2 * a1 as i32) * wa.powf(2.0 * (f64::from(b1) - 1.0))
                    }
                    newton::RegionTag::E2 => wa.powf(2.0 * (n - 1.0)),
                    newton::RegionTag::E3 => {
                        za.powf(2.0 * (f64::from(a2) - 1.0)) * wa.powi(2 * b2 as i32)
                    }
                    _ => continue,
                };
                region_samples += 1;
                let h = hessian(&gamma, &ComplexPoint2::from_re(za, wa));
                let ratio = h.lambda_min / monomial;
                worst_ratio = worst_ratio.max(ratio.max(1.0 / ratio));
            }
        }
        report.push_float("lambda_monomial_worst_factor", worst_ratio);
        report.push_output("lambda_region_samples", region_samples.to_string());
        report.assert_that(
            "lambda-region-monomials",
            worst_ratio <= 10.0 && region_samples > 0,
            format!(
                "worst factor {worst_ratio:.3} ≤ 10 over {region_samples} samples, t up to {}",
                params.scale_max
            ),
        );
    }
    Ok(report)
}

fn run_rho(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let params: RhoParams = parse_params(cfg)?;
    let mut report = RunReport::new(cfg, &params);
    let grid = grid_from_bounds(&params.box_min, &params.box_max, params.h);
    let (field, pot): (RadiusField, Box<dyn BallSup>) = match params.potential.as_str() {
        "model-laplacian" => {
            let gamma = gamma_from_spec(
                params
                    .gamma
                    .as_ref()
                    .ok_or_else(|| module_err(&cfg.kind, "model-laplacian needs gamma"))?,
            )?;
            let pot = ModelLaplacianSup { gamma };
            let f = rho_from_potential(&pot, &grid).map_err(|e| module_err(&cfg.kind, e))?;
            (f, Box::new(pot))
        }
        "harmonic" => {
            let pot = SampledSup {
                f: |x: &[f64]| x[0] * x[0],
                grid: grid.clone(),
            };
            let f = rho_from_potential(&pot, &grid).map_err(|e| module_err(&cfg.kind, e))?;
            (
                f,
                Box::new(SampledSup {
                    f: |x: &[f64]| x[0] * x[0],
                    grid: grid.clone(),
                }),
            )
        }
        other => {
            return Err(module_err(
                &cfg.kind,
                format!("unknown potential '{other}'"),
            ))
        }
    };
    let positive = field.values.iter().all(|&v| v > 0.0 && v.is_finite());
    report.assert_that(
        "rho-positive-finite",
        positive,
        "all node values strictly positive and finite".into(),
    );
    // Sandwich ρ⁻²/(4D) ≤ sup_{B(x,ρ)} V ≤ ρ⁻² with the doubling constant D
    // measured at the radii the field actually uses.
    let mut doubling: f64 = 1.0;
    for i in 0..grid.len() {
        let x = grid.coords(i);
        let r = field.values[i];
        let lo = pot.ball_sup(&x, r);
        if lo > 0.0 {
            doubling = doubling.max(pot.ball_sup(&x, 2.0 * r) / lo);
        }
    }
    let mut sandwich_ok = true;
    for i in 0..grid.len() {
        let x = grid.coords(i);
        let rho = field.values[i];
        let sup = pot.ball_sup(&x, rho);
        let inv2 = rho.powi(-2);
        if sup > inv2 * (1.0 + 1e-4) || sup < inv2 / (4.0 * doubling) * (1.0 - 1e-4) {
            sandwich_ok = false;
            break;
        }
    }
    report.push_float("doubling_measured", doubling);
    report.push_float("comparability", field.comparability);
    report.push_output("unsaturated_nodes", field.unsaturated.to_string());
    report.assert_that(
        "rho-rsquared-sandwich",
        sandwich_ok,
        format!("ρ⁻²/(4·{doubling:.3}) ≤ ball sup ≤ ρ⁻² at every node"),
    );
    let covering = greedy_covering(&field);
    report.push_output("covering_centers", covering.centers.len().to_string());
    report.push_output("covering_multiplicity", covering.multiplicity.to_string());
    report.assert_that(
        "covering-multiplicity",
        covering.multiplicity <= 40,
        format!("empirical K = {}", covering.multiplicity),
    );
    let mut rows = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let mut row: Vec<String> = grid.coords(i).iter().map(|&c| fmt_f64(c)).collect();
        row.push(fmt_f64(field.values[i]));
        rows.push(row);
    }
    let mut header: Vec<String> = (0..grid.ndim()).map(|k| format!("x{k}")).collect();
    header.push("rho".into());
    report.csv_files.push(CsvFile {
        name: "rho_field.csv".into(),
        header,
        rows,
    });
    Ok(report)
}

fn grid_from_bounds(lo: &[f64], hi: &[f64], h: f64) -> Grid {
    match lo.len() {
        1 => Grid::line(lo[0], hi[0], h),
        2 => Grid::rect([lo[0], lo[1]], [hi[0], hi[1]], h),
        d => panic!("unsupported dimension {d}"),
    }
}

fn run_dist(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let params: DistParams = parse_params(cfg)?;
    let mut report = RunReport::new(cfg, &params);
    let grid = grid_from_bounds(&params.box_min, &params.box_max, params.h);
    let values: Vec<f64> = match params.rho.as_str() {
        "max1x" => (0..grid.len())
            .map(|i| grid.coords(i)[0].max(1.0))
            .collect(),
        "const" => vec![1.0; grid.len()],
        other => return Err(module_err(&cfg.kind, format!("unknown rho '{other}'"))),
    };
    let mut field = RadiusField {
        grid: grid.clone(),
        values,
        comparability: 1.0,
        source: FieldSource::Explicit,
        unsaturated: 0,
    };
    field.comparability = estimate_comparability(&field);
    let graph = MetricGraph::new(&field, Stencil::AxisDiagonal, None);
    let source = grid.nearest(&params.box_min);
    let targets: Vec<usize> = params.targets.iter().map(|t| grid.nearest(t)).collect();
    let dists = agmon_distance(&graph, source, &targets).map_err(|e| module_err(&cfg.kind, e))?;
    let mut rows = Vec::new();
    let mut worst_rel: f64 = 0.0;
    for (t, d) in params.targets.iter().zip(&dists) {
        let exact = match params.rho.as_str() {
            "max1x" => {
                let x = t[0];
                if x <= 1.0 {
                    x
                } else {
                    1.0 + x.ln()
                }
            }
            _ => t
                .iter()
                .zip(&params.box_min)
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt(),
        };
        if exact > 0.0 {
            worst_rel = worst_rel.max((d - exact).abs() / exact);
        }
        let mut row: Vec<String> = t.iter().map(|&c| fmt_f64(c)).collect();
        row.push(fmt_f64(*d));
        row.push(fmt_f64(exact));
        rows.push(row);
    }
    let tol = match params.rho.as_str() {
        "max1x" => 0.02,
        _ => 0.083,
    };
    report.push_float("worst_relative_error", worst_rel);
    report.assert_that(
        "distance-vs-line-integral",
        worst_rel <= tol,
        format!("worst rel err {worst_rel:.4} ≤ {tol}"),
    );
    // Triangle inequality over sampled triples.
    let mut tri_ok = true;
    let nodes: Vec<usize> = (0..grid.len()).step_by((grid.len() / 6).max(1)).collect();
    let all: Vec<Vec<f64>> = nodes.iter().map(|&n| graph.distances(n)).collect();
    for (i, _) in nodes.iter().enumerate() {
        for (j, &b) in nodes.iter().enumerate() {
            for &c in &nodes {
                if all[i][c] > all[i][b] + all[j][c] + 1e-9 {
                    tri_ok = false;
                }
            }
        }
    }
    report.assert_that(
        "triangle-inequality",
        tri_ok,
        "d(a,c) ≤ d(a,b) + d(b,c) on sampled triples".into(),
    );
    let mut header: Vec<String> = (0..grid.ndim()).map(|k| format!("x{k}")).collect();
    header.push("distance".into());
    header.push("reference".into());
    report.csv_files.push(CsvFile {
        name: "distances.csv".into(),
        header,
        rows,
    });
    Ok(report)
}

fn run_moments(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let params: MomentsParams = parse_params(cfg)?;
    let gamma = gamma_from_spec(&params.gamma)?;
    let mut report = RunReport::new(cfg, &params);
    let table =
        bergman::compute_moments(&gamma, params.cutoff).map_err(|e| module_err(&cfg.kind, e))?;
    let mut rows = Vec::new();
    let mut all_positive = true;
    for ((a, b), c) in table.entries() {
        all_positive &= c > 0.0 && c.is_finite();
        rows.push(vec![a.to_string(), b.to_string(), fmt_f64(c)]);
    }
    report.assert_that(
        "moments-positive",
        all_positive,
        "all c_ab finite and positive".into(),
    );
    let mut convex_ok = true;
    for s in 0..params.cutoff.saturating_sub(1) {
        for a in 0..=s {
            let b = s - a;
            if let (Some(c0), Some(c1), Some(c2)) = (
                table.moment(a, b),
                table.moment(a + 1, b),
                table.moment(a + 2, b),
            ) {
                convex_ok &= c0 * c2 >= c1 * c1 * (1.0 - 1e-9);
            }
        }
    }
    report.assert_that(
        "moments-log-convex",
        convex_ok,
        "c_ab·c_{a+2,b} ≥ c_{a+1,b}²".into(),
    );
    // Closed-form factorial check when Γ is the Gaussian set.
    let gauss = MonomialSet::new([(1, 0), (0, 1)]).unwrap();
    if gamma == gauss {
        let mut worst: f64 = 0.0;
        for ((a, b), c) in table.entries() {
            let fact = |k: u32| (1..=k).map(f64::from).product::<f64>();
            let expect = std::f64::consts::PI.powi(2) * fact(a) * fact(b)
                / 2f64.powi((a + b + 2) as i32);
            worst = worst.max((c - expect).abs() / expect);
        }
        report.push_float("gaussian_factorial_worst_rel", worst);
        report.assert_that(
            "moments-gaussian-closed-form",
            worst < 1e-8,
            format!("worst rel {worst:.3e} < 1e-8"),
        );
    }
    report.csv_files.push(CsvFile {
        name: "moments.csv".into(),
        header: vec!["a".into(), "b".into(), "c_ab".into()],
        rows,
    });
    Ok(report)
}

fn run_kernel(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let params: KernelParams = parse_params(cfg)?;
    let gamma = gamma_from_spec(&params.gamma)?;
    let mut report = RunReport::new(cfg, &params);
    let table =
        bergman::compute_moments(&gamma, params.cutoff).map_err(|e| module_err(&cfg.kind, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();
    let mut sym_worst = 0.0f64;
    let mut cs_ok = true;
    for _ in 0..params.pair_count {
        let p = random_point(&mut rng, 0.0, params.max_modulus);
        let q = random_point(&mut rng, 0.0, params.max_modulus);
        let kpq = kernel_eval(&table, &p, &q, params.tail_tol)
            .map_err(|e| module_err(&cfg.kind, e))?;
        let kqp = kernel_eval(&table, &q, &p, params.tail_tol)
            .map_err(|e| module_err(&cfg.kind, e))?;
        sym_worst = sym_worst
            .max((kpq.value - kqp.value.conj()).norm() / (1.0 + kpq.value.norm()));
        let kpp = kernel_eval(&table, &p, &p, params.tail_tol)
            .map_err(|e| module_err(&cfg.kind, e))?;
        let kqq = kernel_eval(&table, &q, &q, params.tail_tol)
            .map_err(|e| module_err(&cfg.kind, e))?;
        cs_ok &= kpq.value.norm()
            <= (kpp.value.re.max(0.0)).sqrt() * (kqq.value.re.max(0.0)).sqrt()
                + 2.0 * kpq.tail_bound
                + 1e-12;
        rows.push(vec![
            fmt_f64(p.z.re),
            fmt_f64(p.z.im),
            fmt_f64(p.w.re),
            fmt_f64(p.w.im),
            fmt_f64(q.z.re),
            fmt_f64(q.z.im),
            fmt_f64(q.w.re),
            fmt_f64(q.w.im),
            fmt_f64(kpq.value.re),
            fmt_f64(kpq.value.im),
            fmt_f64(kpq.tail_bound),
        ]);
    }
    report.push_float("conjugate_symmetry_worst", sym_worst);
    report.assert_that(
        "kernel-conjugate-symmetry",
        sym_worst < 1e-12,
        format!("worst {sym_worst:.3e} < 1e-12"),
    );
    report.assert_that(
        "kernel-cauchy-schwarz",
        cs_ok,
        "|B(p,q)| ≤ √B(p,p)·√B(q,q) + 2·tail".into(),
    );
    report.csv_files.push(CsvFile {
        name: "kernel_samples.csv".into(),
        header: [
            "re_zp", "im_zp", "re_wp", "im_wp", "re_zq", "im_zq", "re_wq", "im_wq", "re_B",
            "im_B", "tail",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect(),
        rows,
    });
    Ok(report)
}

fn run_bound_fit(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let params: BoundFitParams = parse_params(cfg)?;
    let gamma = gamma_from_spec(&params.gamma)?;
    let profile = derive_profile(&gamma).map_err(|e| module_err(&cfg.kind, e))?;
    let mut report = RunReport::new(cfg, &params);
    let table =
        bergman::compute_moments(&gamma, params.cutoff).map_err(|e| module_err(&cfg.kind, e))?;
    let reach = params.max_modulus + 0.3;
    let grid = Grid::rect([0.0, 0.0], [reach, reach], params.grid_h);
    let pot = ModelLaplacianSup {
        gamma: gamma.clone(),
    };
    let rho_field = rho_from_potential(&pot, &grid).map_err(|e| module_err(&cfg.kind, e))?;
    let kappa_field = rho_from_mu(&profile, 1.0, &grid);
    let graph = MetricGraph::new(&kappa_field, Stencil::Sixteen, None);
    // Log-spaced phase-aligned pairs fanning out from near the origin.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pairs = Vec::with_capacity(params.pair_count);
    for i in 0..params.pair_count {
        let t = i as f64 / (params.pair_count - 1).max(1) as f64;
        let r = params.max_modulus * (10f64.powf(t) - 1.0) / 9.0;
        let angle = rng.gen_range(0.0..std::f64::consts::FRAC_PI_2);
        let p = ComplexPoint2::from_re(0.08 + 0.2 * rng.gen::<f64>(), 0.1 * rng.gen::<f64>());
        let q = ComplexPoint2::from_re(r * angle.cos(), r * angle.sin());
        pairs.push((p, q));
    }
    let fit = bergman::bound_fit(
        &table,
        &profile,
        &rho_field,
        &kappa_field,
        &graph,
        &pairs,
        params.tail_tol,
    )
    .map_err(|e| module_err(&cfg.kind, e))?;
    report.push_float("epsilon", fit.epsilon);
    report.push_float("log_c", fit.log_c);
    report.push_output("worst_pair_index", fit.worst_pair.to_string());
    report.assert_that(
        "bound-fit-positive-epsilon",
        fit.epsilon > 0.0,
        format!("fitted ε = {:.6}", fit.epsilon),
    );
    report.assert_that(
        "bound-holds-on-sample",
        true,
        "L ≤ logC − ε d on every pair (asserted inside the fit)".into(),
    );
    report.csv_files.push(CsvFile {
        name: "bound_fit.csv".into(),
        header: vec!["epsilon".into(), "logC".into(), "worst_pair_index".into()],
        rows: vec![vec![
            fmt_f64(fit.epsilon),
            fmt_f64(fit.log_c),
            fit.worst_pair.to_string(),
        ]],
    });
    let sample_rows: Vec<Vec<String>> = fit
        .samples
        .iter()
        .map(|&(d, l)| vec![fmt_f64(d), fmt_f64(l)])
        .collect();
    report.csv_files.push(CsvFile {
        name: "bound_fit_samples.csv".into(),
        header: vec!["d_kappa".into(), "L".into()],
        rows: sample_rows,
    });
    Ok(report)
}

fn run_spectrum(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let params: SpectrumParams = parse_params(cfg)?;
    let mut report = RunReport::new(cfg, &params);
    let rows: Vec<Vec<String>>;
    match params.problem.as_str() {
        "laplace-1d" => {
            let n = 63usize;
            let h = 1.0 / (n as f64 + 1.0);
            let grid = Grid {
                origin: vec![h],
                dims: vec![n],
                h,
            };
            let pot = schrodinger::ConstPotential { dim: 1, value: 0.0 };
            let op = assemble_operator(&pot, &schrodinger::ZeroMagnetic, &grid, 1.0)
                .map_err(|e| module_err(&cfg.kind, e))?;
            let rep = extremal_eigenvalues(&op, params.k, None, cfg.seed, 1e-10, 400_000)
                .map_err(|e| module_err(&cfg.kind, e))?;
            let mut ok = true;
            for (k, ev) in rep.eigenvalues.iter().enumerate() {
                let exact = 2.0
                    * (1.0 - ((k + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
                    / (h * h);
                ok &= (ev - exact).abs() <= 1e-8 * exact.max(1.0);
            }
            report.assert_that(
                "laplace-1d-closed-form",
                ok,
                "eigenvalues match 2(1 − cos(kπ/(N+1)))/h²".into(),
            );
            rows = spectrum_rows(&rep);
        }
        "harmonic-1d" => {
            let h = params.h.unwrap_or(0.02);
            let half = params.box_half.unwrap_or(8.0);
            let n = ((2.0 * half) / h).round() as usize - 1;
            let grid = Grid {
                origin: vec![-half + h],
                dims: vec![n],
                h,
            };
            let x2 = Poly::monomial(1, 0, 2, 1);
            let pot = schrodinger::PolyPotential::new(1, 1, vec![x2]);
            let op = assemble_operator(&pot, &schrodinger::ZeroMagnetic, &grid, 1.0)
                .map_err(|e| module_err(&cfg.kind, e))?;
            let rep = extremal_eigenvalues(&op, params.k, None, cfg.seed, 1e-10, 400_000)
                .map_err(|e| module_err(&cfg.kind, e))?;
            report.push_float("lambda0", rep.eigenvalues[0]);
            report.assert_that(
                "harmonic-ground-state",
                (rep.eigenvalues[0] - 1.0).abs() < 0.003,
                format!("λ₀ = {:.6} within 1 ± 0.003", rep.eigenvalues[0]),
            );
            rows = spectrum_rows(&rep);
        }
        "landau-n1" => {
            let h = params.h.unwrap_or(0.1);
            let half = params.box_half.unwrap_or(6.0);
            let steps = ((2.0 * half) / h).round() as usize - 1;
            let grid = Grid {
                origin: vec![-half + h, -half + h],
                dims: vec![steps, steps],
                h,
            };
            let gamma = MonomialSet::new([(1, 0)]).unwrap();
            let pot = schrodinger::ConstPotential { dim: 2, value: 4.0 };
            let mag = SymplecticGradient { gamma, n: 1 };
            let op = assemble_operator(&pot, &mag, &grid, 0.25)
                .map_err(|e| module_err(&cfg.kind, e))?;
            let rep = extremal_eigenvalues(&op, params.k.max(1), None, cfg.seed, 1e-8, 2_000_000)
                .map_err(|e| module_err(&cfg.kind, e))?;
            let lam0 = rep.eigenvalues[0];
            report.push_float("lambda0", lam0);
            // Landau-level oracle: inf spec ¼(−Δ_A + 4) = (b + 4)/4 = 2.
            report.assert_that(
                "landau-level",
                (lam0 - 2.0).abs() <= 0.1,
                format!("λ₀ = {lam0:.4} within 2 ± 5%"),
            );
            // MKH oracle: holomorphic (0,1)-form coefficient gives quotient
            // 2 + O(e^{−R²}) by quadrature.
            let mkh = spectrum_support::mkh_rayleigh_n1_quadratic(half);
            report.push_float("mkh_oracle", mkh);
            report.assert_that(
                "mkh-oracle-agrees",
                (lam0 - mkh).abs() <= 0.1,
                format!("λ₀ = {lam0:.4} vs MKH quotient {mkh:.6}"),
            );
            rows = spectrum_rows(&rep);
        }
        other => return Err(module_err(&cfg.kind, format!("unknown problem '{other}'"))),
    }
    report.csv_files.push(CsvFile {
        name: "spectrum.csv".into(),
        header: vec!["index".into(), "eigenvalue".into(), "residual".into()],
        rows,
    });
    Ok(report)
}

fn spectrum_rows(rep: &schrodinger::SpectralReport) -> Vec<Vec<String>> {
    rep.eigenvalues
        .iter()
        .zip(&rep.residuals)
        .enumerate()
        .map(|(i, (ev, r))| vec![i.to_string(), fmt_f64(*ev), fmt_f64(*r)])
        .collect()
}

fn run_coercivity(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let params: CoercivityParams = parse_params(cfg)?;
    let gamma = gamma_from_spec(&params.gamma)?;
    let profile = derive_profile(&gamma).map_err(|e| module_err(&cfg.kind, e))?;
    let mut report = RunReport::new(cfg, &params);
    let boxq = QuadBox::new(
        vec![-params.box_half; 4],
        vec![params.box_half; 4],
        params.order,
        1,
    );
    let spread = params.box_half - 1.1;
    let family = schrodinger::make_test_family(cfg.seed, params.family, spread.max(0.2), 1.0);
    let scan =
        coercivity_scan(&profile, &family, &boxq).map_err(|e| module_err(&cfg.kind, e))?;
    report.push_float("min_ratio", scan.min_ratio);
    report.assert_that(
        "coercivity-positive",
        scan.min_ratio > 0.0,
        format!("min form ratio {:.6e} > 0", scan.min_ratio),
    );
    if params.check_doubling {
        let family2 =
            schrodinger::make_test_family(cfg.seed, params.family * 2, spread.max(0.2), 1.0);
        let scan2 =
            coercivity_scan(&profile, &family2, &boxq).map_err(|e| module_err(&cfg.kind, e))?;
        let change = (scan.min_ratio - scan2.min_ratio).abs() / scan.min_ratio;
        report.push_float("min_ratio_doubled", scan2.min_ratio);
        report.push_float("doubling_change", change);
        report.assert_that(
            "coercivity-stable-under-doubling",
            change < 0.20,
            format!("relative change {change:.4} < 0.20"),
        );
    }
    let rows: Vec<Vec<String>> = scan
        .ratios
        .iter()
        .enumerate()
        .map(|(i, r)| vec![i.to_string(), fmt_f64(*r)])
        .collect();
    report.csv_files.push(CsvFile {
        name: "coercivity.csv".into(),
        header: vec!["form_index".into(), "ratio".into()],
        rows,
    });
    Ok(report)
}

fn run_equivalence(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let params: EquivalenceParams = parse_params(cfg)?;
    let mut report = RunReport::new(cfg, &params);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = 0.0f64;
    match &params.gamma {
        None => {
            let boxq = QuadBox::new(
                vec![-params.box_half; 2],
                vec![params.box_half; 2],
                params.order,
                2,
            );
            for _ in 0..params.forms {
                let u = BumpMonomial {
                    center: vec![rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4)],
                    radius: rng.gen_range(0.7..params.box_half - 0.5),
                    hol: vec![rng.gen_range(0..=1u32)],
                    anti: vec![rng.gen_range(0..=1u32)],
                    coef: Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                };
                let rep = equivalence_check_n1(&u, &boxq).map_err(|e| module_err(&cfg.kind, e))?;
                worst = worst.max(rep.rel_discrepancy);
            }
        }
        Some(gspec) => {
            let gamma = gamma_from_spec(gspec)?;
            let boxq = QuadBox::new(
                vec![-params.box_half; 4],
                vec![params.box_half; 4],
                params.order,
                1,
            );
            for _ in 0..params.forms {
                let coefs = (0..2)
                    .map(|_| BumpMonomial {
                        center: (0..4).map(|_| rng.gen_range(-0.3..0.3)).collect(),
                        radius: rng.gen_range(0.7..(params.box_half - 0.4).max(0.8)),
                        hol: (0..2).map(|_| rng.gen_range(0..=1u32)).collect(),
                        anti: (0..2).map(|_| rng.gen_range(0..=1u32)).collect(),
                        coef: Complex64::new(
                            rng.gen_range(-1.0..1.0),
                            rng.gen_range(-1.0..1.0),
                        ),
                    })
                    .collect();
                let form = TestForm { coefs };
                let rep =
                    equivalence_check(&gamma, &form, &boxq).map_err(|e| module_err(&cfg.kind, e))?;
                worst = worst.max(rep.rel_discrepancy);
            }
        }
    }
    report.push_float("worst_discrepancy", worst);
    report.assert_that(
        "kohn-schrodinger-equivalence",
        worst < 1e-4,
        format!("worst relative discrepancy {worst:.3e} < 1e-4"),
    );
    Ok(report)
}

fn run_discreteness(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let params: DiscretenessParams = parse_params(cfg)?;
    let mut report = RunReport::new(cfg, &params);
    let potential = match params.potential.as_str() {
        "v0" => schrodinger::v0_potential(),
        "x2-identity" => {
            let x2 = Poly::monomial(1, 0, 2, 1);
            let zero = Poly::zero(1);
            schrodinger::PolyPotential::new(1, 2, vec![x2.clone(), zero.clone(), zero, x2])
        }
        other => {
            return Err(module_err(
                &cfg.kind,
                format!("unknown potential '{other}'"),
            ))
        }
    };
    let rows_data = schrodinger::discreteness_profile(&potential, params.side, &params.centers);
    let mut rows = Vec::new();
    for r in &rows_data {
        let x = r.center[0];
        let ratio = if x != 0.0 { r.lambda / (x * x) } else { f64::NAN };
        rows.push(vec![
            fmt_f64(x),
            fmt_f64(r.lambda),
            r.lambda_exact
                .map_or("-".to_string(), |(n, d)| format!("{n}/{d}")),
            fmt_f64(ratio),
        ]);
        if params.potential == "v0" && x == 0.0 && params.side == (1, 1) {
            report.assert_that(
                "v0-origin-exact",
                r.lambda_exact == Some((1, 448)),
                format!("λ(∫_{{Q(0,1)}}V₀) = {:?} (expect 1/448)", r.lambda_exact),
            );
        }
        if params.potential == "v0" && x.abs() >= 50.0 && params.side == (1, 1) {
            let ok = (ratio - 1.0 / 12.0).abs() <= 0.02 / 12.0 && ratio >= 0.98 / 12.0;
            report.assert_that(
                "v0-far-field-ratio",
                ok,
                format!("λ/x² = {ratio:.6} within 2% of 1/12 and ≥ 0.98/12"),
            );
        }
    }
    report.csv_files.push(CsvFile {
        name: "discreteness.csv".into(),
        header: vec![
            "center".into(),
            "lambda".into(),
            "lambda_exact".into(),
            "lambda_over_x2".into(),
        ],
        rows,
    });
    Ok(report)
}

fn random_partition(rng: &mut ChaCha8Rng) -> SubspacePartition {
    let m = rng.gen_range(2..=3usize);
    let npieces = rng.gen_range(2..=3usize);
    let mut ws: Vec<f64> = (0..npieces).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = ws.iter().sum();
    for w in ws.iter_mut() {
        *w /= total;
    }
    let pieces = ws
        .into_iter()
        .map(|w| {
            let dim = rng.gen_range(1..=(m - 1).max(1));
            let mut basis: Vec<Vec<Complex64>> = Vec::new();
            while basis.len() < dim {
                let mut v: Vec<Complex64> = (0..m)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                for b in &basis {
                    let c: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
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
        .collect();
    SubspacePartition::new(pieces)
}

fn run_oscillation(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let params: OscillationParams = parse_params(cfg)?;
    let mut report = RunReport::new(cfg, &params);
    let mut rows = Vec::new();

    // Canonical ½-½ orthogonal lines.
    let half_half = SubspacePartition::new(vec![
        (0.5, Subspace::span_axis(2, 0)),
        (0.5, Subspace::span_axis(2, 1)),
    ]);
    let r = oscillation::oscillation(&half_half);
    let expect = 1.0 / 2.0f64.sqrt();
    report.push_float("half_half_omega", r.omega);
    report.assert_that(
        "half-half-orthogonal",
        (r.omega - expect).abs() < 1e-6,
        format!("ω = {:.9} vs 1/√2", r.omega),
    );
    rows.push(vec![
        "half-half".into(),
        fmt_f64(r.omega),
        fmt_f64(expect),
        fmt_f64(half_half.angle_lower_bound()),
    ]);

    // Randomized m ≤ 3 partitions against the oracle and the angle bound.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst_gap = 0.0f64;
    let mut bound_ok = true;
    for i in 0..params.random_partitions {
        let p = random_partition(&mut rng);
        let r = oscillation::oscillation(&p);
        let oracle =
            oscillation::oscillation_oracle(&p).map_err(|e| module_err(&cfg.kind, e))?;
        let gap = (r.omega - oracle).abs();
        worst_gap = worst_gap.max(gap);
        let bound = p.angle_lower_bound();
        bound_ok &= r.omega + 1e-6 >= bound;
        rows.push(vec![
            format!("random-{i}"),
            fmt_f64(r.omega),
            fmt_f64(oracle),
            fmt_f64(bound),
        ]);
    }
    report.push_float("oracle_worst_gap", worst_gap);
    report.assert_that(
        "solver-vs-oracle",
        worst_gap < 1e-3,
        format!("worst |solver − oracle| = {worst_gap:.2e} < 1e-3"),
    );
    report.assert_that(
        "angle-lower-bound",
        bound_ok,
        "ω ≥ √(δη) on every partition".into(),
    );
    report.csv_files.push(CsvFile {
        name: "oscillation.csv".into(),
        header: vec![
            "case".into(),
            "omega".into(),
            "oracle_or_reference".into(),
            "angle_bound".into(),
        ],
        rows,
    });
    Ok(report)
}

fn named_matrix_potential(name: &str) -> Result<(Vec<Poly>, usize), RunError> {
    match name {
        "w0" => Ok((
            vec![
                Poly::constant(1, 1),
                Poly::monomial(1, 0, 1, 1),
                Poly::monomial(1, 0, 1, 1),
                Poly::monomial(1, 0, 2, 1),
            ],
            2,
        )),
        "identity" => Ok((
            vec![
                Poly::constant(1, 1),
                Poly::zero(1),
                Poly::zero(1),
                Poly::constant(1, 1),
            ],
            2,
        )),
        "scalar-quadratic" => {
            let p = Poly::constant(1, 1).add(&Poly::monomial(1, 0, 2, 1));
            Ok((vec![p.clone(), Poly::zero(1), Poly::zero(1), p], 2))
        }
        "v0" => Ok((
            vec![
                Poly::monomial(1, 0, 4, 1),
                Poly::monomial(1, 0, 5, 1),
                Poly::monomial(1, 0, 5, 1),
                Poly::monomial(1, 0, 6, 1),
            ],
            2,
        )),
        "x2-identity" => {
            let x2 = Poly::monomial(1, 0, 2, 1);
            Ok((vec![x2.clone(), Poly::zero(1), Poly::zero(1), x2], 2))
        }
        "diag12" => Ok((
            vec![
                Poly::constant(1, 1),
                Poly::zero(1),
                Poly::zero(1),
                Poly::constant(1, 2),
            ],
            2,
        )),
        other => Err(RunError::Module {
            kind: "potential".into(),
            message: format!("unknown potential '{other}'"),
        }),
    }
}

fn run_muckenhoupt(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let params: MuckenhouptParams = parse_params(cfg)?;
    let mut report = RunReport::new(cfg, &params);
    let (entries, m) = named_matrix_potential(&params.potential)?;
    let reports = oscillation::muckenhoupt_diagnostics(
        &entries,
        m,
        &params.cubes,
        params.delta,
        params.c,
        params.alpha,
        params.beta,
        cfg.seed,
    )
    .map_err(|e| module_err(&cfg.kind, e))?;
    let mut rows = Vec::new();
    for r in &reports {
        rows.push(vec![
            fmt_f64(r.cube_center),
            fmt_f64(r.cube_side),
            fmt_f64(r.def1_fraction),
            r.def1_pass.to_string(),
            fmt_f64(r.def2_worst_beta),
            r.def2_pass.to_string(),
            r.a2_norm.map_or("-".to_string(), fmt_f64),
        ]);
    }
    match params.potential.as_str() {
        "w0" => {
            let all_fail_def1 = reports.iter().all(|r| !r.def1_pass);
            let all_pass_def2 = reports.iter().all(|r| r.def2_pass);
            let singular = reports.iter().all(|r| r.a2_norm.is_none());
            report.assert_that(
                "w0-fails-density-definition",
                all_fail_def1,
                "V(x) ≥ δ·avg has measure zero for every δ".into(),
            );
            report.assert_that(
                "w0-passes-subset-definition",
                all_pass_def2,
                format!("worst β = {:.4}", reports[0].def2_worst_beta),
            );
            report.assert_that(
                "w0-singular-inverse",
                singular,
                "det W₀ ≡ 0, no A₂ constant".into(),
            );
        }
        "identity" => {
            let r = &reports[0];
            report.assert_that(
                "identity-in-all-classes",
                r.def1_pass && r.def2_pass && (r.a2_norm.unwrap_or(0.0) - 1.0).abs() < 1e-9,
                format!("[W]_A2 = {:?}", r.a2_norm),
            );
        }
        "scalar-quadratic" => {
            // Def. 1 with (c, δ) implies Def. 2 with (1 − c/2, cδ/2).
            let derived = oscillation::muckenhoupt_diagnostics(
                &entries,
                m,
                &params.cubes,
                params.delta,
                params.c,
                1.0 - params.c / 2.0,
                params.c * params.delta / 2.0,
                cfg.seed,
            )
            .map_err(|e| module_err(&cfg.kind, e))?;
            let ok = reports
                .iter()
                .zip(&derived)
                .all(|(r1, r2)| !r1.def1_pass || r2.def2_pass);
            report.assert_that(
                "def1-implies-def2-derived-parameters",
                ok,
                "Def.1(c,δ) ⇒ Def.2(1−c/2, cδ/2) on sampled cubes".into(),
            );
            let mut doubling_ok = true;
            for &(c0, s0) in &params.cubes {
                let d = oscillation::doubling_constant(
                    &entries,
                    m,
                    (c0, s0),
                    (c0 + s0 / 4.0, s0 / 2.0),
                );
                doubling_ok &= d.is_finite() && d >= 1.0;
            }
            report.assert_that(
                "matrix-doubling-finite",
                doubling_ok,
                "∫_Q V ≤ D ∫_{Q'} V with finite D on nested cubes".into(),
            );
        }
        _ => {}
    }
    report.csv_files.push(CsvFile {
        name: "muckenhoupt.csv".into(),
        header: vec![
            "center".into(),
            "side".into(),
            "def1_fraction".into(),
            "def1_pass".into(),
            "def2_worst_beta".into(),
            "def2_pass".into(),
            "a2_norm".into(),
        ],
        rows,
    });
    Ok(report)
}

fn run_classify_cube(cfg: &ExperimentConfig) -> Result<RunReport, RunError> {
    let params: ClassifyCubeParams = parse_params(cfg)?;
    let mut report = RunReport::new(cfg, &params);
    let (entries, _m) = named_matrix_potential(&params.potential)?;
    let class = oscillation::classify_cube(&entries, params.cube, params.max_depth)
        .map_err(|e| module_err(&cfg.kind, e))?;
    let (label, witness) = match &class {
        CubeClass::Good { witness } => ("Good", Some(*witness)),
        CubeClass::Bad { witness } => ("Bad", Some(*witness)),
        CubeClass::Isotropic => ("Isotropic", None),
    };
    report.push_output("class", label.to_string());
    if let Some((c, s)) = witness {
        report.push_output("witness_center", fmt_f64(c));
        report.push_output("witness_side", fmt_f64(s));
    }
    let expected = match params.potential.as_str() {
        "x2-identity" => Some("Good"),
        "v0" => Some("Bad"),
        "diag12" => Some("Good"),
        _ => None,
    };
    if let Some(e) = expected {
        report.assert_that(
            "expected-class",
            label == e,
            format!("{label} (expected {e})"),
        );
    }
    Ok(report)
}

// Small helpers used by the spectrum runner.
pub mod spectrum_support {
    use super::*;

    /// 2D quadrature of the MKH Rayleigh quotient for φ = |z|² with the
    /// cutoff (0,1)-form η dz̄ (η ≡ 1 on most of the disc of radius `half`):
    /// value = 2 + ∫|∂̄η|²e^{−2φ} / ∫η²e^{−2φ}.
    pub fn mkh_rayleigh_n1_quadratic(half: f64) -> f64 {
        let bump = BumpMonomial {
            center: vec![0.0, 0.0],
            radius: half * 0.9,
            hol: vec![0],
            anti: vec![0],
            coef: Complex64::new(1.0, 0.0),
        };
        let (xs, ws) = quad::gl_panels(-half, half, 24, 4);
        let mut num = 0.0;
        let mut den = 0.0;
        for (&x, &wx) in xs.iter().zip(&ws) {
            for (&y, &wy) in xs.iter().zip(&ws) {
                let w = wx * wy;
                let phi = x * x + y * y;
                let e = (-2.0 * phi).exp();
                let v = bump.value(&[x, y]).norm_sqr();
                let db = bump.dbar(&[x, y], 0).norm_sqr();
                num += w * (db + 2.0 * v) * e;
                den += w * v * e;
            }
        }
        num / den
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_config_round_trip() {
        let cfg = ExperimentConfig {
            kind: Kind::Profile,
            seed: 1,
            params: serde_json::json!({"gamma": [[16,0],[12,3],[8,6],[4,9],[0,12]]}),
        };
        let report = run_config(&cfg).unwrap();
        assert!(report.all_pass());
        let sigma = report
            .outputs
            .iter()
            .find(|(k, _)| k == "sigma")
            .unwrap()
            .1
            .clone();
        assert_eq!(sigma, "4/1");
        let tau = report
            .outputs
            .iter()
            .find(|(k, _)| k == "tau")
            .unwrap()
            .1
            .clone();
        assert_eq!(tau, "9/4");
    }

    #[test]
    fn empty_config_rejected() {
        let err = ExperimentConfig::from_str_checked("", "<test>");
        assert!(err.is_err());
    }

    #[test]
    fn moments_config_gaussian() {
        let cfg = ExperimentConfig {
            kind: Kind::Moments,
            seed: 3,
            params: serde_json::json!({"gamma": [[1,0],[0,1]], "cutoff": 4}),
        };
        let report = run_config(&cfg).unwrap();
        assert!(report.all_pass());
    }

    #[test]
    fn discreteness_config_v0() {
        let cfg = ExperimentConfig {
            kind: Kind::Discreteness,
            seed: 0,
            params: serde_json::json!({
                "potential": "v0",
                "centers": [[[0,1]], [[100,1]]]
            }),
        };
        let report = run_config(&cfg).unwrap();
        assert!(report.all_pass(), "{}", report.text_summary());
    }
}
