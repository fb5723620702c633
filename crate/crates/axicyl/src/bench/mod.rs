//! Numerical verification of the functional inequalities that underpin the
//! solver's a-priori estimates: a one-dimensional weighted bound for
//! primitives, interpolation inequalities in the meridian plane, weighted
//! and unweighted second/third-derivative bounds for the reduced stream
//! function, and run-based monitors for the energy and order-reduction
//! estimates.
//!
//! Each check produces an [`InequalityReport`] carrying both sides of the
//! bound, their ratio, and a term-by-term decomposition. Ensembles of
//! randomized admissible inputs evaluate the same analytic sample on a
//! coarse and a fine grid: a correctly transcribed inequality has a
//! resolution-stable worst ratio, while a wrong exponent or a missing term
//! drifts under refinement.

pub mod recipes;

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{InitialPreset, SimConfig};
use crate::diagnostics::{DiagnosticsSeries, VNormTarget};
use crate::elliptic::{solve_psi1, SolveSettings};
use crate::error::{Error, Result};
use crate::evolution;
use crate::field::{Direction, Parity, ScalarField};
use crate::geometry::{CylinderGrid, Edge};

/// Default square resolutions (coarse, fine) for the field ensembles.
pub const DEFAULT_FIELD_GRIDS: (usize, usize) = (64, 128);
/// Default radial resolutions (coarse, fine) for the run-based monitors;
/// the axial count is always twice the radial one (the cylinder is twice as
/// tall as it is wide).
pub const DEFAULT_RUN_GRIDS: (usize, usize) = (32, 64);
/// One-dimensional cells per grid unit for the line-profile checks.
pub const HARDY_CELLS_PER_UNIT: usize = 32;
/// Default time horizon for the run-based monitors.
pub const DEFAULT_MONITOR_HORIZON: f64 = 0.1;
/// Offsets closer to the critical exponent than this are rejected: the
/// bound's constant degenerates there and the check loses its meaning.
pub const HARDY_CRITICAL_GAP: f64 = 1e-9;

/// One verified inequality instance.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityReport {
    /// What the inequality bounds, e.g. `psi1_second_order`.
    pub name: String,
    /// Resolution descriptor, e.g. `64x64` or `line:2048`.
    pub grid: String,
    /// Ensemble sample id (0 for one-off checks).
    pub sample: u64,
    /// Exponents and other scalar inputs of this instance.
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    /// lhs/rhs when the right side is positive and finite; NaN otherwise
    /// (with `degenerate` set), so a vanishing bound is never reported as
    /// a spurious success.
    pub ratio: f64,
    /// True when the instance does not actually assert the bound: zero or
    /// non-finite right side, or a failed hypothesis.
    pub degenerate: bool,
    /// Term-by-term decomposition of the two sides.
    pub terms: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

impl InequalityReport {
    fn new(name: impl Into<String>, grid: impl Into<String>, sample: u64) -> Self {
        Self {
            name: name.into(),
            grid: grid.into(),
            sample,
            params: BTreeMap::new(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            ratio: f64::NAN,
            degenerate: false,
            terms: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    fn param(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.to_string(), v);
        self
    }

    fn term(mut self, key: &str, v: f64) -> Self {
        self.terms.insert(key.to_string(), v);
        self
    }

    fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    fn finish(mut self, lhs: f64, rhs: f64) -> Self {
        self.lhs = lhs;
        self.rhs = rhs;
        if !lhs.is_finite() || !rhs.is_finite() {
            self.degenerate = true;
            self.notes.push("non-finite side; ratio withheld".into());
        } else if rhs <= 0.0 {
            self.degenerate = true;
            self.notes
                .push("vanishing right-hand side: the input is degenerate for this bound".into());
        } else {
            self.ratio = lhs / rhs;
        }
        self
    }

    /// Mark the instance as not asserting the bound (failed hypothesis).
    fn withdraw(mut self, why: impl Into<String>) -> Self {
        self.degenerate = true;
        self.ratio = f64::NAN;
        self.notes.push(why.into());
        self
    }
}

/// Refinement behaviour of one inequality over an ensemble.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleSummary {
    pub name: String,
    /// Total reports contributing (all grids).
    pub count: usize,
    pub degenerate_count: usize,
    pub coarse_grid: String,
    pub fine_grid: String,
    pub coarse_max: f64,
    pub fine_max: f64,
    /// Worst ratio over both resolutions.
    pub max_ratio: f64,
    /// Median ratio on the fine grid.
    pub median_fine: f64,
    /// |fine_max − coarse_max| / coarse_max; small values mean the implied
    /// constant is resolution-stable.
    pub drift: f64,
}

fn median(sorted: &mut [f64]) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite ratios"));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Group reports by inequality name and compare the worst ratios across the
/// two resolutions.
pub fn summarize(
    reports: &[InequalityReport],
    coarse_grid: &str,
    fine_grid: &str,
) -> Vec<EnsembleSummary> {
    let mut by_name: BTreeMap<&str, Vec<&InequalityReport>> = BTreeMap::new();
    for r in reports {
        by_name.entry(r.name.as_str()).or_default().push(r);
    }
    by_name
        .into_iter()
        .map(|(name, rs)| {
            let ratios_on = |label: &str| -> Vec<f64> {
                rs.iter()
                    .filter(|r| r.grid == label && r.ratio.is_finite())
                    .map(|r| r.ratio)
                    .collect()
            };
            let max_of = |v: &[f64]| -> f64 {
                if v.is_empty() {
                    f64::NAN
                } else {
                    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                }
            };
            let coarse = ratios_on(coarse_grid);
            let mut fine = ratios_on(fine_grid);
            let coarse_max = max_of(&coarse);
            let fine_max = max_of(&fine);
            let max_ratio = match (coarse_max.is_finite(), fine_max.is_finite()) {
                (true, true) => coarse_max.max(fine_max),
                (true, false) => coarse_max,
                (false, true) => fine_max,
                (false, false) => f64::NAN,
            };
            let drift = if coarse_max.is_finite() && fine_max.is_finite() && coarse_max > 0.0 {
                (fine_max - coarse_max).abs() / coarse_max
            } else {
                f64::NAN
            };
            EnsembleSummary {
                name: name.to_string(),
                count: rs.len(),
                degenerate_count: rs.iter().filter(|r| r.degenerate).count(),
                coarse_grid: coarse_grid.to_string(),
                fine_grid: fine_grid.to_string(),
                coarse_max,
                fine_max,
                max_ratio,
                median_fine: median(&mut fine),
                drift,
            }
        })
        .collect()
}

/// ∬ g(i,j) · radial[i] · axial[j], with the radial masses carrying an
/// arbitrary weight exponent.
fn weighted_integral(
    grid: &CylinderGrid,
    label: &str,
    radial: &[f64],
    g: impl Fn(usize, usize) -> f64,
) -> Result<f64> {
    let axial = grid.axial_mass();
    let mut acc = 0.0;
    for (i, &rm) in radial.iter().enumerate() {
        for (j, &am) in axial.iter().enumerate() {
            let v = g(i, j);
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    label: label.to_string(),
                    i,
                    j,
                    value: v,
                });
            }
            acc += rm * am * v;
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// One-dimensional weighted bound for primitives.
// ---------------------------------------------------------------------------

/// Check the weighted bound for primitives on the half-line:
///
/// |x^{−β} F|_p ≤ |β − 1/p|⁻¹ |x^{1−β} f|_p,
///
/// where F integrates f from the origin when β > 1/p and from infinity when
/// β < 1/p. The profile must be supported inside (0, `support`); the norm
/// piece beyond the support is added in closed form (the primitive is
/// constant there).
pub fn verify_hardy(
    p: f64,
    beta: f64,
    f: &dyn Fn(f64) -> f64,
    support: f64,
    cells: usize,
    sample: u64,
) -> Result<InequalityReport> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::Parameter(format!(
            "line bound requires finite p >= 1, got {p}"
        )));
    }
    if !beta.is_finite() {
        return Err(Error::Parameter(format!("weight exponent beta = {beta}")));
    }
    if !(support > 0.0) || !support.is_finite() {
        return Err(Error::Parameter(format!(
            "profile support must be positive and finite, got {support}"
        )));
    }
    if cells < 16 {
        return Err(Error::Parameter(format!(
            "need at least 16 quadrature cells, got {cells}"
        )));
    }
    let gap = beta - 1.0 / p;
    if gap.abs() < HARDY_CRITICAL_GAP {
        return Err(Error::Parameter(format!(
            "beta = 1/p = {beta} is the critical exponent; the bound's constant diverges"
        )));
    }

    let h = support / cells as f64;
    let xs: Vec<f64> = (0..cells).map(|k| (k as f64 + 0.5) * h).collect();
    let mut fv = Vec::with_capacity(cells);
    for (k, &x) in xs.iter().enumerate() {
        let v = f(x);
        if !v.is_finite() {
            return Err(Error::NonFinite {
                label: "line profile".to_string(),
                i: k,
                j: 0,
                value: v,
            });
        }
        fv.push(v);
    }

    // Primitive at the midpoints: half of the local cell plus every cell on
    // the integration side. Exact whenever f is constant.
    let mut primitive = vec![0.0; cells];
    if gap > 0.0 {
        let mut acc = 0.0;
        for k in 0..cells {
            primitive[k] = acc + 0.5 * h * fv[k];
            acc += h * fv[k];
        }
    } else {
        let mut acc = 0.0;
        for k in (0..cells).rev() {
            primitive[k] = acc + 0.5 * h * fv[k];
            acc += h * fv[k];
        }
    }

    let body: f64 = xs
        .iter()
        .zip(&primitive)
        .map(|(&x, &cf)| h * (x.powf(-beta) * cf.abs()).powf(p))
        .sum();
    // Beyond the support the primitive is the total mass (origin branch) or
    // zero (infinity branch); the weight integrates in closed form.
    let mut tail = 0.0;
    let total: f64 = fv.iter().map(|&v| h * v).sum();
    if gap > 0.0 {
        tail = total.abs().powf(p) * support.powf(1.0 - beta * p) / (beta * p - 1.0);
    }
    let lhs = (body + tail).powf(1.0 / p);
    let rhs_body: f64 = xs
        .iter()
        .zip(&fv)
        .map(|(&x, &v)| h * (x.powf(1.0 - beta) * v.abs()).powf(p))
        .sum();
    let rhs = rhs_body.powf(1.0 / p) / gap.abs();

    Ok(InequalityReport::new("hardy_line", format!("line:{cells}"), sample)
        .param("p", p)
        .param("beta", beta)
        .param("support", support)
        .term("lhs_body", body.powf(1.0 / p))
        .term("lhs_tail", tail.powf(1.0 / p))
        .term("profile_mass", total)
        .finish(lhs, rhs))
}

// ---------------------------------------------------------------------------
// Interpolation inequalities in the meridian plane.
// ---------------------------------------------------------------------------

/// Check the derivative interpolation bound
///
/// |D^order f|_p ≤ c |f|_{p1}^{1−θ} ‖f‖_{W^smoothness,p2}^θ,
/// θ = (3/p1 − 3/p + order)/(3/p1 − 3/p2 + smoothness),
///
/// admissible when θ ∈ [order/smoothness, 1]. The axisymmetric
/// second-order group includes the quotient |f_r / r|, so it controls the
/// full three-dimensional Hessian of the revolved function; this is why the
/// field must be even across the axis.
pub fn verify_sobolev_interp(
    f: &ScalarField,
    order: u32,
    smoothness: u32,
    p: f64,
    p1: f64,
    p2: f64,
    sample: u64,
) -> Result<InequalityReport> {
    if !(1..=2).contains(&smoothness) || order >= smoothness {
        return Err(Error::Parameter(format!(
            "supported derivative orders: order < smoothness <= 2, got {order} and {smoothness}"
        )));
    }
    for (name, q) in [("p", p), ("p1", p1), ("p2", p2)] {
        if !(q >= 1.0) {
            return Err(Error::Parameter(format!(
                "exponent {name} must satisfy {name} >= 1, got {q}"
            )));
        }
    }
    if f.parity() != Parity::Even {
        return Err(Error::Contract(
            "interpolation check expects an even-parity field (the second-order group divides the radial slope by r)"
                .into(),
        ));
    }
    let inv = |q: f64| if q.is_infinite() { 0.0 } else { 3.0 / q };
    let denom = inv(p1) - inv(p2) + smoothness as f64;
    if denom <= 0.0 {
        return Err(Error::Parameter(format!(
            "interpolation exponents degenerate (denominator {denom})"
        )));
    }
    let theta = (inv(p1) - inv(p) + order as f64) / denom;
    let floor = order as f64 / smoothness as f64;
    if !(theta >= floor - 1e-12 && theta <= 1.0 + 1e-12) {
        return Err(Error::Parameter(format!(
            "interpolation weight theta = {theta} outside the admissible window [{floor}, 1]"
        )));
    }

    let f_r = f.derivative(Direction::R);
    let f_z = f.derivative(Direction::Z);
    let lhs = match order {
        0 => f.lp_norm(p)?,
        _ => f_r.lp_norm(p)? + f_z.lp_norm(p)?,
    };
    let base = f.lp_norm(p1)?;
    let mut smooth_norm = f.lp_norm(p2)? + f_r.lp_norm(p2)? + f_z.lp_norm(p2)?;
    if smoothness == 2 {
        let f_rr = f_r.derivative(Direction::R);
        let f_rz = f_r.derivative(Direction::Z);
        let f_zz = f_z.derivative(Direction::Z);
        let quot = f_r.quotient_by_r()?;
        smooth_norm += f_rr.lp_norm(p2)?
            + f_rz.lp_norm(p2)?
            + f_zz.lp_norm(p2)?
            + quot.lp_norm(p2)?;
    }
    let rhs = base.powf(1.0 - theta) * smooth_norm.powf(theta);
    let grid = f.grid();

    Ok(InequalityReport::new(
        "gradient_interpolation",
        format!("{}x{}", grid.nr, grid.nz),
        sample,
    )
    .param("order", order as f64)
    .param("smoothness", smoothness as f64)
    .param("p", p)
    .param("p1", p1)
    .param("p2", p2)
    .param("theta", theta)
    .term("base_norm", base)
    .term("smooth_norm", smooth_norm)
    .note("the smooth-norm group includes the axis quotient |f_r/r|")
    .finish(lhs, rhs))
}

/// Check the singular-weight interpolation bound
///
/// (∫ |f|^q r^{−s})^{1/q} ≤ c |f|_p^{e1} |∇f|_p^{e2},
/// e1 = (3−s)/q − 3/p + 1, e2 = 3/p − (3−s)/q,
///
/// valid for 1 < p < 3, 0 ≤ s ≤ p, s < 2, q ∈ [p, p(3−s)/(3−p)] and fields
/// with compact radial support. All integrals use the cylindrical volume
/// element r dr dz with the angular factor dropped.
pub fn verify_hardy_interp(
    f: &ScalarField,
    p: f64,
    s: f64,
    q: f64,
    sample: u64,
) -> Result<InequalityReport> {
    if !(p > 1.0 && p < 3.0) {
        return Err(Error::Parameter(format!(
            "integrability exponent must satisfy 1 < p < 3, got {p}"
        )));
    }
    if !(s >= 0.0 && s <= p && s < 2.0) {
        return Err(Error::Parameter(format!(
            "weight exponent must satisfy 0 <= s <= p and s < 2, got {s}"
        )));
    }
    let q_max = p * (3.0 - s) / (3.0 - p);
    if !(q >= p - 1e-12 && q <= q_max + 1e-12) {
        return Err(Error::Parameter(format!(
            "target exponent q = {q} outside [{p}, {q_max}]"
        )));
    }
    let grid = f.grid().clone();
    let wall_max = (0..=grid.nz)
        .map(|j| f.at(grid.nr, j).abs())
        .fold(0.0_f64, f64::max);

    let e2 = 3.0 / p - (3.0 - s) / q;
    let e1 = 1.0 - e2;
    let singular_mass = grid.radial_mass_with_exponent(1.0 - s)?;
    let lhs_pow = weighted_integral(&grid, "singular-weight integrand", &singular_mass, |i, j| {
        f.at(i, j).abs().powf(q)
    })?;
    let lhs = lhs_pow.powf(1.0 / q);

    let f_r = f.derivative(Direction::R);
    let f_z = f.derivative(Direction::Z);
    let grad = grid.lp_norm_samples("gradient magnitude", p, |i, j| {
        f_r.at(i, j).hypot(f_z.at(i, j))
    })?;
    let base = f.lp_norm(p)?;
    let rhs = base.powf(e1) * grad.powf(e2);

    let report = InequalityReport::new(
        "singular_weight_interpolation",
        format!("{}x{}", grid.nr, grid.nz),
        sample,
    )
    .param("p", p)
    .param("s", s)
    .param("q", q)
    .param("e1", e1)
    .param("e2", e2)
    .term("base_norm", base)
    .term("gradient_norm", grad)
    .note("volume element r dr dz with the angular factor dropped")
    .finish(lhs, rhs);
    if wall_max > 0.0 {
        return Ok(report.withdraw(format!(
            "hypothesis failed: the field reaches the lateral wall (|f(R,·)| up to {wall_max:.3e}) instead of having compact radial support"
        )));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Stream-function elliptic bounds.
// ---------------------------------------------------------------------------

struct StreamDerivatives {
    psi1_r: ScalarField,
    psi1_z: ScalarField,
    residual: f64,
}

fn solve_stream(gamma: &ScalarField, settings: &SolveSettings) -> Result<StreamDerivatives> {
    let sol = solve_psi1(gamma, settings, None)?;
    Ok(StreamDerivatives {
        psi1_r: sol.field.derivative(Direction::R),
        psi1_z: sol.field.derivative(Direction::Z),
        residual: sol.relative_residual,
    })
}

/// Solve the stream-function problem for the given source and check the
/// weighted third-derivative identity
///
/// ∫ (ψ₁,zzz² + ψ₁,rzz²) r^{2μ} + 2μ(1−μ) ∫ ψ₁,zz² r^{2μ−2} ≤ c ∫ Γ_z² r^{2μ},
///
/// for μ ∈ (0,1). The weights multiply the volume element r dr dz, so the
/// radial quadrature masses carry the exponents 2μ+1 and 2μ−1.
pub fn verify_weighted_psi1(
    gamma: &ScalarField,
    mu: f64,
    settings: &SolveSettings,
    sample: u64,
) -> Result<InequalityReport> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::Parameter(format!(
            "convexity weight mu must lie in (0,1), got {mu}"
        )));
    }
    let grid = gamma.grid().clone();
    let sd = solve_stream(gamma, settings)?;
    let psi1_zz = sd.psi1_z.derivative(Direction::Z);
    let psi1_zzz = psi1_zz.derivative(Direction::Z);
    let psi1_rzz = psi1_zz.derivative(Direction::R);

    let outer_mass = grid.radial_mass_with_exponent(2.0 * mu + 1.0)?;
    let inner_mass = grid.radial_mass_with_exponent(2.0 * mu - 1.0)?;
    let third = weighted_integral(&grid, "weighted third derivatives", &outer_mass, |i, j| {
        psi1_zzz.at(i, j).powi(2) + psi1_rzz.at(i, j).powi(2)
    })?;
    let singular_raw = weighted_integral(&grid, "weighted zz term", &inner_mass, |i, j| {
        psi1_zz.at(i, j).powi(2)
    })?;
    let coefficient = 2.0 * mu * (1.0 - mu);
    let lhs = third + coefficient * singular_raw;

    let gamma_z = gamma.derivative(Direction::Z);
    let rhs = weighted_integral(&grid, "weighted source slope", &outer_mass, |i, j| {
        gamma_z.at(i, j).powi(2)
    })?;

    Ok(InequalityReport::new(
        format!("psi1_weighted_mu{mu}"),
        format!("{}x{}", grid.nr, grid.nz),
        sample,
    )
    .param("mu", mu)
    .param("coefficient", coefficient)
    .term("third_group", third)
    .term("singular_zz", coefficient * singular_raw)
    .term("singular_zz_raw", singular_raw)
    .term("elliptic_residual", sd.residual)
    .note("both weights multiply the volume element r dr dz (radial exponents 2mu+1 and 2mu-1)")
    .finish(lhs, rhs))
}

/// Solve the stream-function problem and check the second-order bound
///
/// ∫ (ψ₁,rr² + ψ₁,rz² + ψ₁,zz² + (ψ₁,r/r)²) + ∮ (ψ₁,z²|axis + ψ₁,r²|wall) dz
///   ≤ c |Γ|₂².
pub fn verify_h2(
    gamma: &ScalarField,
    settings: &SolveSettings,
    sample: u64,
) -> Result<InequalityReport> {
    let grid = gamma.grid().clone();
    let sd = solve_stream(gamma, settings)?;
    let psi1_rr = sd.psi1_r.derivative(Direction::R);
    let psi1_rz = sd.psi1_r.derivative(Direction::Z);
    let psi1_zz = sd.psi1_z.derivative(Direction::Z);
    let quot = sd.psi1_r.quotient_by_r()?;

    let volume = grid.integrate_samples("second-order group", |i, j| {
        psi1_rr.at(i, j).powi(2)
            + psi1_rz.at(i, j).powi(2)
            + psi1_zz.at(i, j).powi(2)
            + quot.at(i, j).powi(2)
    })?;
    let axis_trace =
        grid.boundary_trace_integral("axis trace of psi1_z", Edge::Axis, 2, |i, j| {
            sd.psi1_z.at(i, j)
        })?;
    let wall_trace =
        grid.boundary_trace_integral("wall trace of psi1_r", Edge::Lateral, 2, |i, j| {
            sd.psi1_r.at(i, j)
        })?;
    let lhs = volume + axis_trace + wall_trace;
    let rhs = gamma.l2_norm_sq()?;

    Ok(InequalityReport::new(
        "psi1_second_order",
        format!("{}x{}", grid.nr, grid.nz),
        sample,
    )
    .term("volume", volume)
    .term("axis_trace", axis_trace)
    .term("wall_trace", wall_trace)
    .term("elliptic_residual", sd.residual)
    .note("boundary traces use the plain dz line measure")
    .finish(lhs, rhs))
}

/// Solve the stream-function problem and check the three third-order bounds:
/// the zz-group with its axis trace, the full mixed group with both traces,
/// and the singular quotient |ψ₁,rz / r|₂ ≤ c |Γ_z|₂ (un-squared).
pub fn verify_h3(
    gamma: &ScalarField,
    settings: &SolveSettings,
    sample: u64,
) -> Result<Vec<InequalityReport>> {
    let grid = gamma.grid().clone();
    let sd = solve_stream(gamma, settings)?;
    let psi1_rz = sd.psi1_r.derivative(Direction::Z);
    let psi1_zz = sd.psi1_z.derivative(Direction::Z);
    let psi1_zzz = psi1_zz.derivative(Direction::Z);
    // The mixed third derivative is differenced once (z twice, then r) and
    // shared between the two volume groups below.
    let mixed_zz_r = psi1_zz.derivative(Direction::R);
    let psi1_rrz = psi1_rz.derivative(Direction::R);
    let quot = psi1_rz.quotient_by_r()?;

    let gamma_z = gamma.derivative(Direction::Z);
    let gz_sq = gamma_z.l2_norm_sq()?;
    let grid_label = format!("{}x{}", grid.nr, grid.nz);

    let zz_volume = grid.integrate_samples("third-order zz group", |i, j| {
        mixed_zz_r.at(i, j).powi(2) + psi1_zzz.at(i, j).powi(2)
    })?;
    let axis_trace =
        grid.boundary_trace_integral("axis trace of psi1_zz", Edge::Axis, 2, |i, j| {
            psi1_zz.at(i, j)
        })?;
    let zz_report = InequalityReport::new("psi1_third_zz", grid_label.clone(), sample)
        .term("volume", zz_volume)
        .term("axis_trace", axis_trace)
        .term("mixed_zz_r_sq", mixed_zz_r.l2_norm_sq()?)
        .term("elliptic_residual", sd.residual)
        .note("the mixed derivative is shared with the full third-order group")
        .finish(zz_volume + axis_trace, gz_sq);

    let mixed_volume = grid.integrate_samples("third-order mixed group", |i, j| {
        psi1_rrz.at(i, j).powi(2) + mixed_zz_r.at(i, j).powi(2) + psi1_zzz.at(i, j).powi(2)
    })?;
    let wall_trace =
        grid.boundary_trace_integral("wall trace of psi1_rz", Edge::Lateral, 2, |i, j| {
            psi1_rz.at(i, j)
        })?;
    let mixed_report = InequalityReport::new("psi1_third_mixed", grid_label.clone(), sample)
        .term("volume", mixed_volume)
        .term("axis_trace", axis_trace)
        .term("wall_trace", wall_trace)
        .term("mixed_zz_r_sq", mixed_zz_r.l2_norm_sq()?)
        .term("elliptic_residual", sd.residual)
        .note("the mixed derivative is shared with the zz group")
        .finish(mixed_volume + axis_trace + wall_trace, gz_sq);

    let quot_report = InequalityReport::new("psi1_mixed_quotient", grid_label, sample)
        .term("elliptic_residual", sd.residual)
        .note("both sides enter un-squared")
        .finish(quot.l2_norm_sq()?.sqrt(), gz_sq.sqrt());

    Ok(vec![zz_report, mixed_report, quot_report])
}

// ---------------------------------------------------------------------------
// Run-based monitors.
// ---------------------------------------------------------------------------

/// Stock scenarios exercised by the run-based monitors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    /// Unforced swirl bubble relaxing under viscosity.
    DecayingBubble,
    /// Sheared-jet initial data driven by a steady smooth force.
    ForcedJet,
}

impl Scenario {
    pub fn label(self) -> &'static str {
        match self {
            Scenario::DecayingBubble => "decaying-bubble",
            Scenario::ForcedJet => "forced-jet",
        }
    }

    pub const ALL: [Scenario; 2] = [Scenario::DecayingBubble, Scenario::ForcedJet];
}

/// Configuration for one monitor run; `nz = 2·nr` keeps the cells square.
pub fn scenario_config(scenario: Scenario, nr: usize, t_end: f64) -> SimConfig {
    let mut cfg = SimConfig {
        nr,
        nz: 2 * nr,
        t_end,
        ..SimConfig::default()
    };
    match scenario {
        Scenario::DecayingBubble => {}
        Scenario::ForcedJet => {
            cfg.initial = InitialPreset::ShearedJet;
            cfg.forcing_preset = "swirl-jet".to_string();
            cfg.forcing_amp_r = 0.3;
            cfg.forcing_amp_phi = 0.5;
            cfg.forcing_amp_z = 0.2;
        }
    }
    cfg
}

/// Families of run-based inequality monitors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MonitorKind {
    /// Energy bounds for the swirl curvature and azimuthal vorticity, the
    /// interaction splitting, and the stream-function energy identities.
    Energy,
    /// Gradient energy bounds for the swirl.
    Swirl,
    /// Order-reduction bounds tying pointwise and integrability norms to X.
    OrderReduction,
}

impl MonitorKind {
    pub const ALL: [MonitorKind; 3] = [
        MonitorKind::Energy,
        MonitorKind::Swirl,
        MonitorKind::OrderReduction,
    ];
}

/// Evaluate one family of monitors on a finished diagnostics series.
pub fn verify_run_monitors(
    kind: MonitorKind,
    series: &DiagnosticsSeries,
    cfg: &SimConfig,
    grid_label: &str,
    sample: u64,
) -> Result<Vec<InequalityReport>> {
    match kind {
        MonitorKind::Energy => verify_energy_estimate(series, cfg, grid_label, sample),
        MonitorKind::Swirl => verify_swirl_bounds(series, cfg, grid_label, sample),
        MonitorKind::OrderReduction => verify_order_reduction(series, cfg, grid_label, sample),
    }
}

/// Energy-type bounds along a run: the combined curvature/vorticity energy
/// estimate, the interaction splitting, and the stream-function energies.
pub fn verify_energy_estimate(
    series: &DiagnosticsSeries,
    cfg: &SimConfig,
    grid_label: &str,
    sample: u64,
) -> Result<Vec<InequalityReport>> {
    let snap = series.snapshot();
    let dc = series.d_constants()?;
    let delta = cfg.delta;
    let radius = cfg.radius;
    let d1 = dc.d(1);
    let d2 = dc.d(2);
    let d3 = dc.d(3);
    let gamma_v = series.v_norm(VNormTarget::Gamma);
    let phi_v = series.v_norm(VNormTarget::Phi);
    let i_abs = series.interaction_abs();

    let mut out = Vec::with_capacity(4);

    // D2²‖Γ‖_V² + ‖Φ‖_V² against the amplified interaction + data bound.
    {
        let lhs = d2 * d2 * gamma_v * gamma_v + phi_v * phi_v;
        let (amplifier, rhs) = if d2 > 0.0 {
            let amp =
                1.0 + snap.vphi_inf_sup.powf(delta) * radius.powf(delta) / (delta * d2.powf(delta));
            (amp, d2 * d2 * amp * (i_abs + d3 * d3))
        } else {
            (f64::NAN, 0.0)
        };
        let mut rep = InequalityReport::new("energy_gamma_phi", grid_label, sample)
            .param("delta", delta)
            .param("d2", d2)
            .term("gamma_v_weighted_sq", d2 * d2 * gamma_v * gamma_v)
            .term("phi_v_sq", phi_v * phi_v)
            .term("amplifier", amplifier)
            .term("interaction_abs", i_abs)
            .term("d3_sq", d3 * d3)
            .finish(lhs, rhs);
        if d2 == 0.0 {
            rep = rep.withdraw("no swirl data: the amplifier is undefined");
        }
        out.push(rep);
    }

    // Interaction splitting: |I| against the interpolation product.
    {
        let theta = cfg.theta();
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Parameter(format!(
                "splitting exponent theta = {theta} must lie in (0,1)"
            )));
        }
        let eps = cfg.eps1 + cfg.eps2;
        let vphi_d = series.vphi_lp_sup(cfg.d)?;
        let phi_spacetime = snap.phi_sq_cum.sqrt();
        let rhs = d2.powf(1.0 - eps)
            * vphi_d.powf(eps)
            * (radius.powf(cfg.eps2) / cfg.eps2)
            * phi_spacetime.powf(theta)
            * phi_v.powf(1.0 - theta)
            * gamma_v;
        out.push(
            InequalityReport::new("interaction_bound", grid_label, sample)
                .param("theta", theta)
                .param("eps1", cfg.eps1)
                .param("eps2", cfg.eps2)
                .param("d", cfg.d)
                .term("vphi_d_sup", vphi_d)
                .term("phi_spacetime", phi_spacetime)
                .term("phi_v", phi_v)
                .term("gamma_v", gamma_v)
                .finish(i_abs, rhs),
        );
    }

    // Stream-function energy: instantaneous group and accumulated z-slope
    // group, both controlled by the data constant D1².
    out.push(
        InequalityReport::new("stream_energy_sup", grid_label, sample)
            .term("group_sup", snap.psi_group_sup)
            .finish(snap.psi_group_sup, d1 * d1),
    );
    out.push(
        InequalityReport::new("stream_z_energy_cum", grid_label, sample)
            .term("z_h1_cum", snap.psi_z_h1_sq_cum)
            .term("psi1_z_cum", snap.psi1_z_sq_cum)
            .finish(snap.psi_z_h1_sq_cum + snap.psi1_z_sq_cum, d1 * d1),
    );

    Ok(out)
}

/// Gradient energy bounds for the swirl: the z-slope and r-slope groups
/// against their data constants.
pub fn verify_swirl_bounds(
    series: &DiagnosticsSeries,
    cfg: &SimConfig,
    grid_label: &str,
    sample: u64,
) -> Result<Vec<InequalityReport>> {
    let snap = series.snapshot();
    let dc = series.d_constants()?;
    let nu = cfg.nu;
    let d4 = dc.d(4);
    let d5 = dc.d(5);
    Ok(vec![
        InequalityReport::new("swirl_z_gradient", grid_label, sample)
            .param("nu", nu)
            .term("sup_sq", snap.u_z_l2_sq_sup)
            .term("dissipation", nu * snap.grad_uz_sq_cum)
            .finish(snap.u_z_l2_sq_sup + nu * snap.grad_uz_sq_cum, d4 * d4),
        InequalityReport::new("swirl_r_gradient", grid_label, sample)
            .param("nu", nu)
            .term("sup_sq", snap.u_r_l2_sq_sup)
            .term("dissipation", nu * snap.u_rr_rz_sq_cum)
            .finish(snap.u_r_l2_sq_sup + nu * snap.u_rr_rz_sq_cum, d5 * d5),
    ])
}

/// Order-reduction bounds: space-time curvature norm, pointwise swirl bound,
/// integrability-norm bound under the measured criterion constant, and the
/// meridian vorticity energy.
pub fn verify_order_reduction(
    series: &DiagnosticsSeries,
    cfg: &SimConfig,
    grid_label: &str,
    sample: u64,
) -> Result<Vec<InequalityReport>> {
    let snap = series.snapshot();
    let dc = series.d_constants()?;
    let delta = cfg.delta;
    let radius = cfg.radius;
    let x = series.x_value();
    let mut out = Vec::with_capacity(4);

    // Space-time L2 of the swirl curvature against X^{1/2}.
    {
        let lhs = snap.phi_sq_cum.sqrt();
        let rhs = (1.0 + snap.vphi_inf_sup.powf(delta)) * x.sqrt() + 1.0;
        out.push(
            InequalityReport::new("phi_spacetime_l2", grid_label, sample)
                .param("delta", delta)
                .term("x", x)
                .term("vphi_inf_sup", snap.vphi_inf_sup)
                .finish(lhs, rhs),
        );
    }

    // Pointwise swirl bound against X^{3/4}.
    {
        let d1 = dc.d(1);
        let d10 = dc.d(10);
        let rhs = d1.powf(0.25) / cfg.nu.sqrt() * x.powf(0.75) + d10;
        out.push(
            InequalityReport::new("swirl_sup_bound", grid_label, sample)
                .param("nu", cfg.nu)
                .term("x", x)
                .term("d1", d1)
                .term("d10", d10)
                .finish(snap.vphi_inf_sup, rhs),
        );
    }

    // Integrability-norm bound, valid only while the measured ratio of the
    // integrability norm to the sup norm stays above the configured floor.
    {
        let s = cfg.s;
        let lhs = series.vphi_lp_sup(s)?;
        let d11 = dc.d(11);
        let d12 = dc.d(12);
        let rhs = d11 * x.powf(1.0 / (4.0 - 2.0 * delta)) + d12;
        let measured = series.criterion_ratio_at(s)?;
        let mut rep = InequalityReport::new("swirl_lp_bound", grid_label, sample)
            .param("s", s)
            .param("delta", delta)
            .param("c0_floor", cfg.c0_floor)
            .term("x", x)
            .term("d11", d11)
            .term("d12", d12);
        for note in &dc.flags {
            rep = rep.note(note.clone());
        }
        rep = match measured {
            None => rep
                .finish(lhs, rhs)
                .withdraw("assumption unmet: quiescent swirl gives no criterion ratio"),
            Some(c0) if c0 < cfg.c0_floor => rep
                .param("c0_measured", c0)
                .finish(lhs, rhs)
                .withdraw(format!(
                    "assumption unmet: measured criterion constant {c0:.6} below the floor {}",
                    cfg.c0_floor
                )),
            Some(c0) => rep.param("c0_measured", c0).finish(lhs, rhs),
        };
        out.push(rep);
    }

    // Meridian vorticity energy. The radial-vorticity quotient equals the
    // swirl curvature, so its space-time norm reuses the curvature
    // accumulator.
    {
        let v_r = snap.omega_r_l2_sq_sup.sqrt() + snap.grad_omega_r_sq_cum.sqrt();
        let v_z = snap.omega_z_l2_sq_sup.sqrt() + snap.grad_omega_z_sq_cum.sqrt();
        let lhs = v_r * v_r + v_z * v_z + snap.phi_sq_cum;
        let bracket = radius.powf(2.0 * delta) / (delta * delta)
            * snap.vphi_inf_sup.powf(2.0 * delta)
            + radius.powf(delta) / delta
            + 1.0;
        let gamma_grad = snap.gamma_z_sq_cum.sqrt() + snap.gamma_r_sq_cum.sqrt();
        let d8 = dc.d(8);
        let rhs = bracket * gamma_grad + d8 * d8;
        out.push(
            InequalityReport::new("vorticity_energy", grid_label, sample)
                .param("delta", delta)
                .term("omega_r_v", v_r)
                .term("omega_z_v", v_z)
                .term("phi_quotient_sq", snap.phi_sq_cum)
                .term("bracket", bracket)
                .term("gamma_grad", gamma_grad)
                .term("d8_sq", d8 * d8)
                .note("the un-squared slope norms of the vorticity source enter the right side")
                .finish(lhs, rhs),
        );
    }

    Ok(out)
}

// ---------------------------------------------------------------------------
// Ensembles.
// ---------------------------------------------------------------------------

/// Families of randomized field/profile ensembles.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnsembleKind {
    Hardy,
    SobolevInterp,
    HardyInterp,
    Weighted,
    H2,
    H3,
}

fn prefix_sample(e: Error, k: u64) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("sample {k}: {m}")),
        Error::Parameter(m) => Error::Parameter(format!("sample {k}: {m}")),
        Error::Contract(m) => Error::Contract(format!("sample {k}: {m}")),
        Error::Solver(m) => Error::Solver(format!("sample {k}: {m}")),
        other => other,
    }
}

fn square_grids(
    coarse: usize,
    fine: usize,
    op: impl Fn(Arc<CylinderGrid>) -> Result<Vec<InequalityReport>>,
) -> Result<Vec<InequalityReport>> {
    let mut out = Vec::with_capacity(2);
    for n in [coarse, fine] {
        let grid = CylinderGrid::build(1.0, 1.0, n, n)?;
        out.extend(op(grid)?);
    }
    Ok(out)
}

/// Evaluate one randomized sample of the given family on both grids.
fn ensemble_sample(
    kind: EnsembleKind,
    seed: u64,
    k: u64,
    coarse: usize,
    fine: usize,
) -> Result<Vec<InequalityReport>> {
    let mut rng = recipes::sample_rng(seed, k);
    match kind {
        EnsembleKind::Hardy => {
            let p = [1.5, 2.0, 3.0][(k % 3) as usize];
            let offset = rng.gen_range(0.2..1.0);
            let above = rng.gen_bool(0.5);
            let beta = 1.0 / p + if above { offset } else { -offset };
            let f = recipes::bump_profile(&mut rng);
            let mut out = Vec::with_capacity(2);
            for cells in [HARDY_CELLS_PER_UNIT * coarse, HARDY_CELLS_PER_UNIT * fine] {
                out.push(verify_hardy(p, beta, f.as_ref(), 1.0, cells, k)?);
            }
            Ok(out)
        }
        EnsembleKind::SobolevInterp => {
            let p = [2.0, 2.5, 3.0][(k % 3) as usize];
            let profile = recipes::smooth_profile(&mut rng, 1.0, 1.0);
            square_grids(coarse, fine, |grid| {
                let f = ScalarField::from_fn(grid, Parity::Even, "interpolation sample", |r, z| {
                    profile(r, z)
                });
                Ok(vec![verify_sobolev_interp(&f, 1, 2, p, 2.0, 2.0, k)?])
            })
        }
        EnsembleKind::HardyInterp => {
            let p = 2.0;
            let s = [0.5, 1.0, 1.5][(k % 3) as usize];
            let q = rng.gen_range(p..=p * (3.0 - s) / (3.0 - p));
            let profile = recipes::compact_profile(&mut rng, 1.0, 1.0);
            square_grids(coarse, fine, |grid| {
                let f = ScalarField::from_fn(grid, Parity::Even, "compact sample", |r, z| {
                    profile(r, z)
                });
                Ok(vec![verify_hardy_interp(&f, p, s, q, k)?])
            })
        }
        EnsembleKind::Weighted => {
            let mu = [0.1, 0.5, 0.9][(k % 3) as usize];
            let profile = recipes::gamma_profile(&mut rng, 1.0, 1.0);
            square_grids(coarse, fine, |grid| {
                let settings = SolveSettings::default_for(&grid);
                let g = ScalarField::from_fn(grid, Parity::Even, "stream source", |r, z| {
                    profile(r, z)
                });
                Ok(vec![verify_weighted_psi1(&g, mu, &settings, k)?])
            })
        }
        EnsembleKind::H2 => {
            let profile = recipes::gamma_profile(&mut rng, 1.0, 1.0);
            square_grids(coarse, fine, |grid| {
                let settings = SolveSettings::default_for(&grid);
                let g = ScalarField::from_fn(grid, Parity::Even, "stream source", |r, z| {
                    profile(r, z)
                });
                Ok(vec![verify_h2(&g, &settings, k)?])
            })
        }
        EnsembleKind::H3 => {
            let profile = recipes::gamma_profile(&mut rng, 1.0, 1.0);
            square_grids(coarse, fine, |grid| {
                let settings = SolveSettings::default_for(&grid);
                let g = ScalarField::from_fn(grid, Parity::Even, "stream source", |r, z| {
                    profile(r, z)
                });
                verify_h3(&g, &settings, k)
            })
        }
    }
}

/// Run `count` randomized samples of a family on the (coarse, fine) grid
/// pair. Samples run concurrently; reports are merged in sample order, so
/// the output is independent of thread scheduling.
pub fn run_ensemble(
    kind: EnsembleKind,
    count: usize,
    seed: u64,
    grids: (usize, usize),
) -> Result<(Vec<EnsembleSummary>, Vec<InequalityReport>)> {
    if count == 0 {
        return Err(Error::Parameter("ensemble needs at least one sample".into()));
    }
    let (coarse, fine) = grids;
    if coarse >= fine {
        return Err(Error::Parameter(format!(
            "grid pair must refine: got coarse {coarse} >= fine {fine}"
        )));
    }
    let per_sample: Vec<Vec<InequalityReport>> = (0..count as u64)
        .into_par_iter()
        .map(|k| ensemble_sample(kind, seed, k, coarse, fine).map_err(|e| prefix_sample(e, k)))
        .collect::<Result<Vec<_>>>()?;
    let reports: Vec<InequalityReport> = per_sample.into_iter().flatten().collect();
    let (coarse_label, fine_label) = match kind {
        EnsembleKind::Hardy => (
            format!("line:{}", HARDY_CELLS_PER_UNIT * coarse),
            format!("line:{}", HARDY_CELLS_PER_UNIT * fine),
        ),
        _ => (format!("{coarse}x{coarse}"), format!("{fine}x{fine}")),
    };
    let summaries = summarize(&reports, &coarse_label, &fine_label);
    Ok((summaries, reports))
}

// ---------------------------------------------------------------------------
// Suite orchestration.
// ---------------------------------------------------------------------------

/// Named benchmark suites exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Hardy,
    Interp,
    HardyInterp,
    Weighted,
    H2,
    H3,
    Energy,
    Swirl,
    OrderReduction,
    All,
}

pub const SUITE_NAMES: [&str; 10] = [
    "hardy",
    "interp",
    "hardy-interp",
    "weighted",
    "h2",
    "h3",
    "energy",
    "swirl",
    "order-reduction",
    "all",
];

impl Suite {
    pub fn parse(name: &str) -> Result<Suite> {
        Ok(match name {
            "hardy" => Suite::Hardy,
            "interp" => Suite::Interp,
            "hardy-interp" => Suite::HardyInterp,
            "weighted" => Suite::Weighted,
            "h2" => Suite::H2,
            "h3" => Suite::H3,
            "energy" => Suite::Energy,
            "swirl" => Suite::Swirl,
            "order-reduction" => Suite::OrderReduction,
            "all" => Suite::All,
            other => {
                return Err(Error::Parameter(format!(
                    "unknown bench suite '{other}' (expected one of: {})",
                    SUITE_NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Hardy => "hardy",
            Suite::Interp => "interp",
            Suite::HardyInterp => "hardy-interp",
            Suite::Weighted => "weighted",
            Suite::H2 => "h2",
            Suite::H3 => "h3",
            Suite::Energy => "energy",
            Suite::Swirl => "swirl",
            Suite::OrderReduction => "order-reduction",
            Suite::All => "all",
        }
    }

    fn ensemble_kinds(self) -> Vec<EnsembleKind> {
        match self {
            Suite::Hardy => vec![EnsembleKind::Hardy],
            Suite::Interp => vec![EnsembleKind::SobolevInterp],
            Suite::HardyInterp => vec![EnsembleKind::HardyInterp],
            Suite::Weighted => vec![EnsembleKind::Weighted],
            Suite::H2 => vec![EnsembleKind::H2],
            Suite::H3 => vec![EnsembleKind::H3],
            Suite::All => vec![
                EnsembleKind::Hardy,
                EnsembleKind::SobolevInterp,
                EnsembleKind::HardyInterp,
                EnsembleKind::Weighted,
                EnsembleKind::H2,
                EnsembleKind::H3,
            ],
            _ => Vec::new(),
        }
    }

    fn monitor_kinds(self) -> Vec<MonitorKind> {
        match self {
            Suite::Energy => vec![MonitorKind::Energy],
            Suite::Swirl => vec![MonitorKind::Swirl],
            Suite::OrderReduction => vec![MonitorKind::OrderReduction],
            Suite::All => MonitorKind::ALL.to_vec(),
            _ => Vec::new(),
        }
    }
}

/// Knobs shared by every suite.
#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Randomized samples per field ensemble.
    pub samples: usize,
    /// Resolution pair override. Field ensembles read it as square sizes;
    /// run-based monitors read it as radial counts (the axial count is
    /// twice the radial one).
    pub grids: Option<(usize, usize)>,
    /// Time horizon for the run-based monitors.
    pub t_end: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            samples: 50,
            grids: None,
            t_end: DEFAULT_MONITOR_HORIZON,
        }
    }
}

/// Everything one suite produced, ready for serialization.
#[derive(Debug, Serialize)]
pub struct SuiteOutput {
    pub suite: String,
    pub seed: u64,
    pub samples: usize,
    pub summaries: Vec<EnsembleSummary>,
    pub reports: Vec<InequalityReport>,
}

/// Run both scenarios at both resolutions and evaluate the requested monitor
/// families on every finished series.
fn monitor_outputs(
    kinds: &[MonitorKind],
    opts: &SuiteOptions,
) -> Result<(Vec<EnsembleSummary>, Vec<InequalityReport>)> {
    let (coarse, fine) = opts.grids.unwrap_or(DEFAULT_RUN_GRIDS);
    if coarse >= fine {
        return Err(Error::Parameter(format!(
            "grid pair must refine: got coarse {coarse} >= fine {fine}"
        )));
    }
    let jobs: Vec<(Scenario, usize)> = Scenario::ALL
        .iter()
        .flat_map(|&s| [coarse, fine].map(|n| (s, n)))
        .collect();
    let runs: Vec<(Scenario, String, SimConfig, DiagnosticsSeries)> = jobs
        .into_par_iter()
        .map(|(scenario, nr)| {
            let cfg = scenario_config(scenario, nr, opts.t_end);
            let (_, series) = evolution::run(&cfg, &mut |_| Ok(()))?;
            Ok((scenario, format!("{}x{}", cfg.nr, cfg.nz), cfg, series))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut reports = Vec::new();
    for (scenario, label, cfg, series) in &runs {
        let sample = Scenario::ALL
            .iter()
            .position(|s| s == scenario)
            .expect("scenario listed") as u64;
        for &kind in kinds {
            for rep in verify_run_monitors(kind, series, cfg, label, sample)? {
                reports.push(rep.note(format!("scenario: {}", scenario.label())));
            }
        }
    }
    let coarse_label = format!("{coarse}x{}", 2 * coarse);
    let fine_label = format!("{fine}x{}", 2 * fine);
    let summaries = summarize(&reports, &coarse_label, &fine_label);
    Ok((summaries, reports))
}

/// Run one named suite end to end.
pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<SuiteOutput> {
    let mut summaries = Vec::new();
    let mut reports = Vec::new();
    for kind in suite.ensemble_kinds() {
        let grids = opts.grids.unwrap_or(DEFAULT_FIELD_GRIDS);
        let (s, r) = run_ensemble(kind, opts.samples, opts.seed, grids)?;
        summaries.extend(s);
        reports.extend(r);
    }
    let monitors = suite.monitor_kinds();
    if !monitors.is_empty() {
        let (s, r) = monitor_outputs(&monitors, opts)?;
        summaries.extend(s);
        reports.extend(r);
    }
    Ok(SuiteOutput {
        suite: suite.name().to_string(),
        seed: opts.seed,
        samples: opts.samples,
        summaries,
        reports,
    })
}
