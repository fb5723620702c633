//! Meridian-rectangle grid for a finite cylinder and the weighted quadrature
//! that stands in for volume integrals.
//!
//! The cylinder {x₁²+x₂² < R², |x₃| < a} is reduced to the rectangle
//! (0,R)×(−a,a) in (r,z). All "volume" integrals carry the cylindrical
//! measure r dr dz; the constant angular factor 2π is omitted everywhere,
//! consistently on both sides of every inequality this crate checks (the
//! convention is echoed in emitted reports). Under that convention the
//! measure of the whole domain is a·R².

use std::sync::Arc;

use crate::error::{Error, Result};

/// Boundary segments of the meridian rectangle.
///
/// `Axis` is r=0 (a symmetry line, not a physical wall), `Lateral` is the
/// cylinder mantle r=R, `Bottom`/`Top` are the end plates z=∓a.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Edge {
    Axis,
    Lateral,
    Bottom,
    Top,
}

/// Uniform collocated grid on [0,R]×[−a,a] with (nr+1)×(nz+1) nodes.
#[derive(Debug)]
pub struct CylinderGrid {
    pub radius: f64,
    pub half_height: f64,
    pub nr: usize,
    pub nz: usize,
    pub hr: f64,
    pub hz: f64,
    r: Vec<f64>,
    z: Vec<f64>,
    /// Radial quadrature masses ρ_i with Σρ_i = R²/2 (see `build`).
    radial_mass: Vec<f64>,
    /// Axial trapezoid masses ζ_j with Σζ_j = 2a.
    axial_mass: Vec<f64>,
}

impl CylinderGrid {
    /// Build a grid. The radial quadrature integrates the piecewise-linear
    /// interpolant of the samples exactly against the weight r, so it
    /// reproduces ∬ q(r,z) r dr dz exactly for bilinear q. In particular the
    /// axis node carries the positive mass h_r²/6 (same h² scale as the exact
    /// half-cell moment): even-parity fields contribute to norms at r=0.
    pub fn build(radius: f64, half_height: f64, nr: usize, nz: usize) -> Result<Arc<Self>> {
        if !(radius > 0.0) || !(half_height > 0.0) {
            return Err(Error::Config(format!(
                "cylinder dimensions must be positive (radius={radius}, half_height={half_height})"
            )));
        }
        if nr < 8 || nz < 8 {
            return Err(Error::Config(format!(
                "grid counts must be at least 8 (nr={nr}, nz={nz})"
            )));
        }
        let hr = radius / nr as f64;
        let hz = 2.0 * half_height / nz as f64;
        let r: Vec<f64> = (0..=nr).map(|i| i as f64 * hr).collect();
        let z: Vec<f64> = (0..=nz).map(|j| -half_height + j as f64 * hz).collect();

        // ∫ f̂(r) r dr with f̂ the piecewise-linear interpolant:
        // node 0 gets h²/6, interior node i gets r_i·h, node nr gets Rh/2 − h²/6.
        let mut radial_mass = vec![0.0; nr + 1];
        radial_mass[0] = hr * hr / 6.0;
        for (i, m) in radial_mass.iter_mut().enumerate().take(nr).skip(1) {
            *m = r[i] * hr;
        }
        radial_mass[nr] = radius * hr / 2.0 - hr * hr / 6.0;

        let mut axial_mass = vec![hz; nz + 1];
        axial_mass[0] = hz / 2.0;
        axial_mass[nz] = hz / 2.0;

        Ok(Arc::new(Self {
            radius,
            half_height,
            nr,
            nz,
            hr,
            hz,
            r,
            z,
            radial_mass,
            axial_mass,
        }))
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.nz + 1) + j
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        self.r[i]
    }

    #[inline]
    pub fn z(&self, j: usize) -> f64 {
        self.z[j]
    }

    pub fn node_count(&self) -> usize {
        (self.nr + 1) * (self.nz + 1)
    }

    /// Quadrature weight of node (i,j) under the r dr dz measure.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.radial_mass[i] * self.axial_mass[j]
    }

    pub fn radial_mass(&self) -> &[f64] {
        &self.radial_mass
    }

    pub fn axial_mass(&self) -> &[f64] {
        &self.axial_mass
    }

    /// Measure of the meridian domain under r dr dz (equals a·R²).
    pub fn domain_measure(&self) -> f64 {
        self.half_height * self.radius * self.radius
    }

    /// Same node layout?
    pub fn same_layout(&self, other: &CylinderGrid) -> bool {
        self.nr == other.nr
            && self.nz == other.nz
            && self.radius == other.radius
            && self.half_height == other.half_height
    }

    /// ∬ g r dr dz for nodal samples supplied by `g(i,j)`. Every sample is
    /// checked for finiteness; the first offending node is reported.
    pub fn integrate_samples(&self, label: &str, g: impl Fn(usize, usize) -> f64) -> Result<f64> {
        let mut acc = 0.0;
        for i in 0..=self.nr {
            let rm = self.radial_mass[i];
            for j in 0..=self.nz {
                let v = g(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        label: label.to_string(),
                        i,
                        j,
                        value: v,
                    });
                }
                acc += rm * self.axial_mass[j] * v;
            }
        }
        Ok(acc)
    }

    /// Radial cell masses for the singular weight r^q (q > −1): node i owns
    /// [max(r_i−h/2,0), min(r_i+h/2,R)] and receives ∫ r^q dr over that cell,
    /// evaluated in closed form. Used by the weighted inequalities, where the
    /// axis cell must carry its exact (finite) mass rather than a collocation
    /// value at r=0.
    pub fn radial_mass_with_exponent(&self, q: f64) -> Result<Vec<f64>> {
        if q <= -1.0 {
            return Err(Error::Parameter(format!(
                "radial weight exponent must exceed -1 for integrability (got {q})"
            )));
        }
        let p = q + 1.0;
        let cell = |lo: f64, hi: f64| (hi.powf(p) - lo.powf(p)) / p;
        let mut mass = vec![0.0; self.nr + 1];
        for (i, m) in mass.iter_mut().enumerate() {
            let lo = (self.r[i] - 0.5 * self.hr).max(0.0);
            let hi = (self.r[i] + 0.5 * self.hr).min(self.radius);
            *m = cell(lo, hi);
        }
        Ok(mass)
    }

    /// L_p norm of nodal samples under r dr dz; `p = f64::INFINITY` gives the
    /// max over all nodes (axis nodes included — they carry positive mass).
    /// Finite p is computed in normalized form, so very large p (used by the
    /// criterion-ratio limit checks) neither overflows nor underflows.
    pub fn lp_norm_samples(
        &self,
        label: &str,
        p: f64,
        g: impl Fn(usize, usize) -> f64,
    ) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::Parameter(format!(
                "lp_norm requires p >= 1 (got {p})"
            )));
        }
        let mut max_abs: f64 = 0.0;
        for i in 0..=self.nr {
            for j in 0..=self.nz {
                let v = g(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        label: label.to_string(),
                        i,
                        j,
                        value: v,
                    });
                }
                max_abs = max_abs.max(v.abs());
            }
        }
        if p.is_infinite() || max_abs == 0.0 {
            return Ok(max_abs);
        }
        let mut acc = 0.0;
        for i in 0..=self.nr {
            let rm = self.radial_mass[i];
            for j in 0..=self.nz {
                acc += rm * self.axial_mass[j] * (g(i, j).abs() / max_abs).powf(p);
            }
        }
        Ok(max_abs * acc.powf(1.0 / p))
    }

    /// 1-D trapezoid integral of f^power along a boundary edge. Edges at
    /// r=0 and r=R use the plain dz line measure; the end plates z=±a keep
    /// the radial r dr weight (they are genuine surface integrals of the
    /// cylinder, with the angular factor dropped as everywhere else).
    pub fn boundary_trace_integral(
        &self,
        label: &str,
        edge: Edge,
        power: u32,
        g: impl Fn(usize, usize) -> f64,
    ) -> Result<f64> {
        if power == 0 {
            return Err(Error::Parameter(
                "boundary_trace_integral requires a positive integer power".into(),
            ));
        }
        let pow = |v: f64| v.powi(power as i32);
        let mut acc = 0.0;
        match edge {
            Edge::Axis | Edge::Lateral => {
                let i = if edge == Edge::Axis { 0 } else { self.nr };
                for j in 0..=self.nz {
                    let v = g(i, j);
                    if !v.is_finite() {
                        return Err(Error::NonFinite {
                            label: label.to_string(),
                            i,
                            j,
                            value: v,
                        });
                    }
                    let w = if j == 0 || j == self.nz {
                        0.5 * self.hz
                    } else {
                        self.hz
                    };
                    acc += w * pow(v);
                }
            }
            Edge::Bottom | Edge::Top => {
                let j = if edge == Edge::Bottom { 0 } else { self.nz };
                for i in 0..=self.nr {
                    let v = g(i, j);
                    if !v.is_finite() {
                        return Err(Error::NonFinite {
                            label: label.to_string(),
                            i,
                            j,
                            value: v,
                        });
                    }
                    acc += self.radial_mass[i] * pow(v);
                }
            }
        }
        Ok(acc)
    }
}
