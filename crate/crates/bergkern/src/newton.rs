//! Exact combinatorics of exponent sets Γ ⊆ ℕ².
//!
//! A finite exponent set Γ determines the model weight
//! φ_Γ(z,w) = Σ_{(α,β)∈Γ} |z^α w^β|².  Everything in this module is exact
//! rational arithmetic: derived sets Γ_r, Γ_u, Γ⁽¹⁾, Γ⁽²⁾, the extremal slope
//! ratios σ and τ, support functions m_{u,v}, the λ-exponents on power curves,
//! and the region decomposition of the modulus quadrant.

use num_rational::Rational64;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

pub type Rat = Rational64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NewtonError {
    #[error("exponent set is empty")]
    EmptySet,
    #[error("corner ({0},0) or (0,{1}) missing from the exponent set")]
    MissingCorner(String, String),
    #[error("point ({0},{1}) is off the segment from (m,0) to (0,n)")]
    NotHomogeneous(u32, u32),
    #[error("operation requires a non-decoupled profile")]
    DecoupledProfile,
    #[error("support direction (u,v) must be non-negative and not both zero")]
    InvalidDirection,
}

/// Finite set of exponent pairs (α, β) ∈ ℕ², without duplicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialSet {
    points: BTreeSet<(u32, u32)>,
}

impl MonomialSet {
    pub fn new<I: IntoIterator<Item = (u32, u32)>>(points: I) -> Result<Self, NewtonError> {
        let points: BTreeSet<_> = points.into_iter().collect();
        if points.is_empty() {
            return Err(NewtonError::EmptySet);
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.points.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: (u32, u32)) -> bool {
        self.points.contains(&p)
    }

    /// Points with α ≠ 0 ("right" part).
    pub fn right_part(&self) -> Option<MonomialSet> {
        Self::new(self.points().filter(|&(a, _)| a != 0)).ok()
    }

    /// Points with β ≠ 0 ("upper" part).
    pub fn upper_part(&self) -> Option<MonomialSet> {
        Self::new(self.points().filter(|&(_, b)| b != 0)).ok()
    }

    /// Pairwise sums of linearly independent points, shifted by −(1,1).
    ///
    /// If (α,β) and (γ,δ) are linearly independent then α+γ ≥ 1 and
    /// β+δ ≥ 1, so the shift never leaves ℕ².
    pub fn det_shift(&self) -> Option<MonomialSet> {
        let pts: Vec<_> = self.points().collect();
        let mut out = BTreeSet::new();
        for &(a, b) in &pts {
            for &(c, d) in &pts {
                let cross = i64::from(a) * i64::from(d) - i64::from(b) * i64::from(c);
                if cross != 0 {
                    out.insert((a + c - 1, b + d - 1));
                }
            }
        }
        Self::new(out).ok()
    }

    /// (Γ_r − (1,0)) ∪ (Γ_u − (0,1)).
    pub fn trace_shift(&self) -> Option<MonomialSet> {
        let mut out = BTreeSet::new();
        for (a, b) in self.points() {
            if a != 0 {
                out.insert((a - 1, b));
            }
            if b != 0 {
                out.insert((a, b - 1));
            }
        }
        Self::new(out).ok()
    }

    /// Coordinate swap (α,β) ↦ (β,α).
    pub fn swap(&self) -> MonomialSet {
        MonomialSet {
            points: self.points().map(|(a, b)| (b, a)).collect(),
        }
    }
}

/// Tags of the regions covering the modulus quadrant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegionTag {
    E1,
    E2,
    E3,
    U0,
    Ur,
    Uu,
}

impl std::fmt::Display for RegionTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegionTag::E1 => "E1",
            RegionTag::E2 => "E2",
            RegionTag::E3 => "E3",
            RegionTag::U0 => "U0",
            RegionTag::Ur => "Ur",
            RegionTag::Uu => "Uu",
        };
        f.write_str(s)
    }
}

/// Which closed-form case produced a λ-exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LambdaCase {
    /// v ≤ (m/n)u: exponent u·α₁ + v·β₁ − v.
    I,
    /// u ≤ ν·v: exponent u·α₂ + v·β₂ − u.
    IIa,
    /// ν·v ≤ u ≤ (n/m)v: exponent v·(n−1).
    IIb,
}

/// Newton-diagram data derived from a homogeneous exponent set.
///
/// All fields refer to post-swap coordinates: when the source set had m < n
/// the coordinates are exchanged so that `mdeg ≥ ndeg`, and `swapped` records
/// that this happened.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HomogeneousProfile {
    pub gamma: MonomialSet,
    pub mdeg: u32,
    pub ndeg: u32,
    pub sigma: Rat,
    pub tau: Rat,
    pub corner1: (u32, u32),
    pub corner2: (u32, u32),
    /// Slope ν of the boundary between E₂ and E₃; `None` for decoupled sets.
    pub nu: Option<Rat>,
    pub gamma_r: MonomialSet,
    pub gamma_u: MonomialSet,
    pub gamma_1: MonomialSet,
    pub gamma_2: MonomialSet,
    pub decoupled: bool,
    pub swapped: bool,
}

/// Derives the full profile of a homogeneous exponent set.
///
/// Rejects sets missing a corner (m,0)/(0,n) and sets with a point off the
/// segment nα + mβ = nm.  σ, τ and ν come out as exact rationals.
pub fn derive_profile(gamma: &MonomialSet) -> Result<HomogeneousProfile, NewtonError> {
    let m0 = gamma
        .points()
        .find(|&(_, b)| b == 0)
        .ok_or_else(|| NewtonError::MissingCorner("m".into(), "n".into()))?;
    let n0 = gamma
        .points()
        .find(|&(a, _)| a == 0)
        .ok_or_else(|| NewtonError::MissingCorner("m".into(), "n".into()))?;
    let (m, n) = (m0.0, n0.1);
    if m == 0 || n == 0 {
        // Either (0,0) doubles as both corners or a degree vanishes; the
        // segment degenerates and no positive (m,n) exists.
        return Err(NewtonError::MissingCorner(m.to_string(), n.to_string()));
    }
    for (a, b) in gamma.points() {
        let lhs = u64::from(n) * u64::from(a) + u64::from(m) * u64::from(b);
        if lhs != u64::from(n) * u64::from(m) {
            return Err(NewtonError::NotHomogeneous(a, b));
        }
    }

    let swapped = m < n;
    let gamma_post = if swapped { gamma.swap() } else { gamma.clone() };
    let (m, n) = if swapped { (n, m) } else { (m, n) };

    let mixed: Vec<(u32, u32)> = gamma_post
        .points()
        .filter(|&(a, b)| a != 0 && b != 0)
        .collect();
    let decoupled = mixed.is_empty();

    let (sigma, tau, corner1, corner2, nu) = if decoupled {
        (Rat::zero(), Rat::zero(), (m, 0), (0, n), None)
    } else {
        // σ is the smallest value with 1/σ ≤ β/α for all mixed points, i.e.
        // the maximum of α/β; τ likewise the maximum of β/α.
        let mut sigma = Rat::zero();
        let mut tau = Rat::zero();
        let mut c1 = mixed[0];
        let mut c2 = mixed[0];
        for &(a, b) in &mixed {
            let ab = Rat::new(i64::from(a), i64::from(b));
            let ba = Rat::new(i64::from(b), i64::from(a));
            if ab > sigma {
                sigma = ab;
                c1 = (a, b);
            }
            if ba > tau {
                tau = ba;
                c2 = (a, b);
            }
        }
        // α₂ = 1 forces β₂ = n−1 (homogeneity with m ≥ n), and then the two
        // Case II formulas agree for every direction, so ν := 0 is harmless.
        let nu = if c2.0 == 1 {
            Rat::zero()
        } else {
            Rat::new(
                i64::from(n) - 1 - i64::from(c2.1),
                i64::from(c2.0) - 1,
            )
        };
        (sigma, tau, c1, c2, Some(nu))
    };

    let profile = HomogeneousProfile {
        gamma_r: gamma_post.right_part().expect("(m,0) has α≠0"),
        gamma_u: gamma_post.upper_part().expect("(0,n) has β≠0"),
        gamma_1: gamma_post
            .det_shift()
            .expect("corners are linearly independent"),
        gamma_2: gamma_post.trace_shift().expect("corners shift"),
        gamma: gamma_post,
        mdeg: m,
        ndeg: n,
        sigma,
        tau,
        corner1,
        corner2,
        nu,
        decoupled,
        swapped,
    };
    profile.assert_slope_bounds();
    Ok(profile)
}

impl HomogeneousProfile {
    /// Cross-multiplied slope inequalities from the case analysis:
    /// n(m−1−α₁) ≥ m(β₁−1) and m(n−1−β₂) ≤ n(α₂−1).
    fn assert_slope_bounds(&self) {
        if self.decoupled {
            return;
        }
        let (m, n) = (i64::from(self.mdeg), i64::from(self.ndeg));
        let (a1, b1) = (i64::from(self.corner1.0), i64::from(self.corner1.1));
        let (a2, b2) = (i64::from(self.corner2.0), i64::from(self.corner2.1));
        debug_assert!(n * (m - 1 - a1) >= m * (b1 - 1));
        debug_assert!(m * (n - 1 - b2) <= n * (a2 - 1));
    }
}

/// Maximum of the linear functional (ξ,η) ↦ uξ + vη over the set.
pub fn support_max(set: &MonomialSet, u: Rat, v: Rat) -> Rat {
    set.points()
        .map(|(a, b)| u * Rat::from(i64::from(a)) + v * Rat::from(i64::from(b)))
        .max()
        .expect("MonomialSet is non-empty")
}

/// λ-exponent on the power curve t ↦ (t^u, t^v): the exact difference of
/// support values m_{u,v}(Γ⁽¹⁾) − m_{u,v}(Γ⁽²⁾), together with the closed-form
/// case that applies.  The two routes are asserted equal.
pub fn lambda_exponent(
    profile: &HomogeneousProfile,
    u: Rat,
    v: Rat,
) -> Result<(Rat, LambdaCase), NewtonError> {
    if u < Rat::zero() || v < Rat::zero() || (u.is_zero() && v.is_zero()) {
        return Err(NewtonError::InvalidDirection);
    }
    if profile.decoupled {
        return Err(NewtonError::DecoupledProfile);
    }
    let m = Rat::from(i64::from(profile.mdeg));
    let n = Rat::from(i64::from(profile.ndeg));
    let (a1, b1) = profile.corner1;
    let (a2, b2) = profile.corner2;
    let nu = profile.nu.expect("non-decoupled profile has ν");

    let (case, closed) = if v * n <= u * m {
        let val = u * Rat::from(i64::from(a1)) + v * Rat::from(i64::from(b1)) - v;
        (LambdaCase::I, val)
    } else if u <= nu * v {
        let val = u * Rat::from(i64::from(a2)) + v * Rat::from(i64::from(b2)) - u;
        (LambdaCase::IIa, val)
    } else {
        (LambdaCase::IIb, v * (n - Rat::from(1)))
    };

    let general = support_max(&profile.gamma_1, u, v) - support_max(&profile.gamma_2, u, v);
    assert_eq!(
        closed, general,
        "closed-form λ-exponent disagrees with support-function difference at (u,v)=({u},{v})"
    );
    Ok((general, case))
}

/// Tags the region of the modulus quadrant containing (|z|, |w|).
///
/// Boundary ties resolve by the fixed priority U0 > Ur > Uu > E1 > E3 > E2
/// with closed inequalities.  Inputs are in the original (pre-swap)
/// coordinates; the swap is applied internally.  For decoupled profiles the
/// E-regions degenerate and everything outside U0 ∪ Ur ∪ Uu is tagged E2.
pub fn classify_point(profile: &HomogeneousProfile, z_abs: f64, w_abs: f64) -> RegionTag {
    assert!(z_abs >= 0.0 && w_abs >= 0.0 && z_abs.is_finite() && w_abs.is_finite());
    let (x, y) = if profile.swapped {
        (w_abs, z_abs)
    } else {
        (z_abs, w_abs)
    };
    let sigma = rat_f64(profile.sigma);
    let tau = rat_f64(profile.tau);
    if x <= 2.0 && y <= 2.0 {
        return RegionTag::U0;
    }
    if x > 1.0 && y <= x.powf(-sigma) {
        return RegionTag::Ur;
    }
    if y > 1.0 && x <= y.powf(-tau) {
        return RegionTag::Uu;
    }
    if profile.decoupled {
        return RegionTag::E2;
    }
    let mn = f64::from(profile.mdeg) / f64::from(profile.ndeg);
    let nu = rat_f64(profile.nu.expect("non-decoupled"));
    if x >= 1.0 && y <= x.powf(mn) {
        return RegionTag::E1;
    }
    if y >= 1.0 && x <= y.powf(nu) {
        return RegionTag::E3;
    }
    RegionTag::E2
}

/// μ(z,w) = c(1 + |z|^σ + |w|^τ) with the 0⁰ = 1 convention, so decoupled
/// profiles give the constant 3c.
pub fn mu_weight(profile: &HomogeneousProfile, z_abs: f64, w_abs: f64, c: f64) -> f64 {
    assert!(c > 0.0 && z_abs >= 0.0 && w_abs >= 0.0);
    let (x, y) = if profile.swapped {
        (w_abs, z_abs)
    } else {
        (z_abs, w_abs)
    };
    c * (1.0 + pow_conv(x, rat_f64(profile.sigma)) + pow_conv(y, rat_f64(profile.tau)))
}

pub fn rat_f64(r: Rat) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// x^e with 0^0 := 1.
fn pow_conv(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        x.powf(e)
    }
}
