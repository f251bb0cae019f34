//! Quadrature: adaptive Gauss-Kronrod in 1D (nested for rectangles) and
//! fixed-order Gauss-Legendre tensor rules.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("adaptive quadrature did not reach tolerance {tol} (best error {err} with {panels} panels)")]
    NonConvergent { tol: f64, err: f64, panels: usize },
}

// 15-point Kronrod nodes/weights with embedded 7-point Gauss rule, on [-1,1].
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

/// One Gauss-Kronrod 7/15 pass over [a,b]: (kronrod value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(c);
    let mut res_k = WGK[7] * fc;
    let mut res_g = WG[3] * fc;
    let mut res_abs = WGK[7] * fc.abs();
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(c - x);
        let f2 = f(c + x);
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let value = res_k * half;
    let err = ((res_k - res_g) * half).abs();
    // Guard against spurious zero estimates on rough integrands.
    let scaled = if res_abs > 0.0 {
        let r = (200.0 * err / (res_abs * half.abs())).powf(1.5);
        if r < 1.0 {
            err.max(res_abs * half.abs() * r * f64::EPSILON.sqrt() * 0.0) + err
        } else {
            err
        }
    } else {
        err
    };
    (value, scaled)
}

/// Adaptive 1D integration of `f` over [a,b] to relative tolerance
/// `rel_tol` (with absolute floor `abs_floor` for near-zero integrals).
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<f64, QuadError> {
    if a == b {
        return Ok(0.0);
    }
    #[derive(Debug)]
    struct Panel {
        a: f64,
        b: f64,
        value: f64,
        err: f64,
    }
    let (value, err) = gk15(&f, a, b);
    let mut panels = vec![Panel { a, b, value, err }];
    const MAX_PANELS: usize = 4096;
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        let target = (rel_tol * total.abs()).max(abs_floor);
        if total_err <= target {
            return Ok(total);
        }
        if panels.len() >= MAX_PANELS {
            return Err(QuadError::NonConvergent {
                tol: rel_tol,
                err: total_err,
                panels: panels.len(),
            });
        }
        // Split the worst panel.
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.err.partial_cmp(&b.1.err).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let Panel { a, b, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (a + b);
        let (v1, e1) = gk15(&f, a, mid);
        let (v2, e2) = gk15(&f, mid, b);
        panels.push(Panel {
            a,
            b: mid,
            value: v1,
            err: e1,
        });
        panels.push(Panel {
            a: mid,
            b,
            value: v2,
            err: e2,
        });
    }
}

/// Nested adaptive integration over the rectangle [ax,bx] × [ay,by].
pub fn integrate2_adaptive<F: Fn(f64, f64) -> f64>(
    f: F,
    ax: f64,
    bx: f64,
    ay: f64,
    by: f64,
    rel_tol: f64,
    abs_floor: f64,
) -> Result<f64, QuadError> {
    let inner_tol = rel_tol / 4.0;
    integrate_adaptive(
        |x| {
            integrate_adaptive(|y| f(x, y), ay, by, inner_tol, abs_floor * 1e-3)
                .unwrap_or(f64::NAN)
        },
        ax,
        bx,
        rel_tol,
        abs_floor,
    )
    .and_then(|v| {
        if v.is_nan() {
            Err(QuadError::NonConvergent {
                tol: rel_tol,
                err: f64::NAN,
                panels: 0,
            })
        } else {
            Ok(v)
        }
    })
}

/// Gauss-Legendre nodes and weights on [-1,1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Gauss-Legendre rule scaled to [a,b], composited over `panels` panels.
pub fn gl_panels(a: f64, b: f64, order: usize, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let (xs, ws) = gauss_legendre(order);
    let mut nodes = Vec::with_capacity(order * panels);
    let mut weights = Vec::with_capacity(order * panels);
    let step = (b - a) / panels as f64;
    for p in 0..panels {
        let lo = a + step * p as f64;
        let c = lo + 0.5 * step;
        let half = 0.5 * step;
        for (x, w) in xs.iter().zip(&ws) {
            nodes.push(c + half * x);
            weights.push(half * w);
        }
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let v = integrate_adaptive(|x| 3.0 * x * x, 0.0, 2.0, 1e-12, 1e-300).unwrap();
        assert!((v - 8.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_moment() {
        // ∫_0^∞ x^3 e^{-2x} dx = 3!/2^4 = 0.375, truncated at 40.
        let v = integrate_adaptive(|x| x.powi(3) * (-2.0 * x).exp(), 0.0, 40.0, 1e-12, 1e-300)
            .unwrap();
        assert!((v - 0.375).abs() < 1e-12);
    }

    #[test]
    fn rectangle() {
        let v =
            integrate2_adaptive(|x, y| x * y, 0.0, 1.0, 0.0, 2.0, 1e-11, 1e-300).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn legendre_rule() {
        let (xs, ws) = gauss_legendre(12);
        let s: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(10)).sum();
        assert!((s - 2.0 / 11.0).abs() < 1e-14);
        let total: f64 = ws.iter().sum();
        assert!((total - 2.0).abs() < 1e-13);
    }

    #[test]
    fn oscillatory() {
        let v = integrate_adaptive(|x| (10.0 * x).sin(), 0.0, 1.0, 1e-12, 1e-300).unwrap();
        let exact = (1.0 - (10.0f64).cos()) / 10.0;
        assert!((v - exact).abs() < 1e-11);
    }
}
