//! Parity-aware scalar fields on the meridian grid and the shared discrete
//! calculus: derivatives, the axisymmetric curl, the reduced vorticity
//! quantities, and the continuity residual.
//!
//! Regular axisymmetric fields extend across the axis with a definite parity
//! in r. The parity tag selects the ghost value used by radial derivative
//! stencils at r=0 and encodes which fields must vanish there:
//!
//! * odd  — v_r, v_φ, ω_φ, ψ (zero at the axis);
//! * even — v_z, ψ₁, Φ, Γ, ω_z (generally nonzero at the axis).
//!
//! The swirl u = r·v_φ behaves like b₁(z)·r² near the axis; it is stored with
//! the odd tag so that its axis values are pinned to zero, and axis-limit
//! quantities built from it (v_φ/r, Φ, ω_z) are recovered through a local
//! r²/r³ fit rather than through one-sided division.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::CylinderGrid;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn flipped(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    R,
    Z,
}

/// Nodal samples of a scalar field with an axis-parity tag.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<CylinderGrid>,
    values: Vec<f64>,
    parity: Parity,
    label: String,
}

impl ScalarField {
    pub fn zeros(grid: Arc<CylinderGrid>, parity: Parity, label: impl Into<String>) -> Self {
        let n = grid.node_count();
        Self {
            grid,
            values: vec![0.0; n],
            parity,
            label: label.into(),
        }
    }

    /// Sample an analytic profile. Odd fields get their axis column set to
    /// exactly zero regardless of what the closure returns there.
    pub fn from_fn(
        grid: Arc<CylinderGrid>,
        parity: Parity,
        label: impl Into<String>,
        f: impl Fn(f64, f64) -> f64,
    ) -> Self {
        let mut out = Self::zeros(grid, parity, label);
        for i in 0..=out.grid.nr {
            let r = out.grid.r(i);
            for j in 0..=out.grid.nz {
                let idx = out.grid.idx(i, j);
                out.values[idx] = f(r, out.grid.z(j));
            }
        }
        out.pin_axis_if_odd();
        out
    }

    pub fn from_values(
        grid: Arc<CylinderGrid>,
        parity: Parity,
        label: impl Into<String>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::Contract(format!(
                "value buffer has {} entries for a {}-node grid",
                values.len(),
                grid.node_count()
            )));
        }
        let mut out = Self {
            grid,
            values,
            parity,
            label: label.into(),
        };
        out.pin_axis_if_odd();
        Ok(out)
    }

    fn pin_axis_if_odd(&mut self) {
        if self.parity == Parity::Odd {
            for j in 0..=self.grid.nz {
                let idx = self.grid.idx(0, j);
                self.values[idx] = 0.0;
            }
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.grid.idx(i, j);
        self.values[idx] = v;
    }

    pub fn grid(&self) -> &Arc<CylinderGrid> {
        &self.grid
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn check_finite(&self) -> Result<()> {
        for i in 0..=self.grid.nr {
            for j in 0..=self.grid.nz {
                let v = self.at(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        label: self.label.clone(),
                        i,
                        j,
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn same_grid(&self, other: &ScalarField) -> Result<()> {
        if self.grid.same_layout(&other.grid) {
            Ok(())
        } else {
            Err(Error::Contract(format!(
                "fields '{}' and '{}' live on different grids",
                self.label, other.label
            )))
        }
    }

    pub fn map(&self, label: impl Into<String>, parity: Parity, f: impl Fn(f64) -> f64) -> Self {
        let mut out = Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
            parity,
            label: label.into(),
        };
        out.pin_axis_if_odd();
        out
    }

    /// c1·self + c2·other, keeping self's parity (the caller guarantees the
    /// operands agree; combining different parities is a programming error).
    pub fn linear_comb(&self, c1: f64, other: &ScalarField, c2: f64) -> Self {
        debug_assert!(self.grid.same_layout(&other.grid));
        debug_assert_eq!(self.parity, other.parity);
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| c1 * a + c2 * b)
            .collect();
        Self {
            grid: self.grid.clone(),
            values,
            parity: self.parity,
            label: self.label.clone(),
        }
    }

    pub fn scale_in_place(&mut self, c: f64) {
        for v in &mut self.values {
            *v *= c;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn integrate(&self) -> Result<f64> {
        self.grid
            .integrate_samples(&self.label, |i, j| self.at(i, j))
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        self.grid
            .lp_norm_samples(&self.label, p, |i, j| self.at(i, j))
    }

    pub fn l2_norm_sq(&self) -> Result<f64> {
        self.grid
            .integrate_samples(&self.label, |i, j| self.at(i, j) * self.at(i, j))
    }

    /// Second-order first derivative with the shared stencils: centered in the
    /// interior, parity ghost across the axis, one-sided three-point at r=R
    /// and z=±a. The r-derivative flips parity, the z-derivative keeps it.
    pub fn derivative(&self, dir: Direction) -> ScalarField {
        let g = &self.grid;
        let mut out = ScalarField::zeros(
            g.clone(),
            match dir {
                Direction::R => self.parity.flipped(),
                Direction::Z => self.parity,
            },
            match dir {
                Direction::R => format!("d({})/dr", self.label),
                Direction::Z => format!("d({})/dz", self.label),
            },
        );
        match dir {
            Direction::R => {
                let h2 = 2.0 * g.hr;
                for j in 0..=g.nz {
                    // Axis: ghost value f(−h) = ±f(h) by parity.
                    let axis = match self.parity {
                        Parity::Even => 0.0,
                        Parity::Odd => self.at(1, j) / g.hr,
                    };
                    out.set(0, j, axis);
                    for i in 1..g.nr {
                        out.set(i, j, (self.at(i + 1, j) - self.at(i - 1, j)) / h2);
                    }
                    let n = g.nr;
                    out.set(
                        n,
                        j,
                        (3.0 * self.at(n, j) - 4.0 * self.at(n - 1, j) + self.at(n - 2, j)) / h2,
                    );
                }
            }
            Direction::Z => {
                let h2 = 2.0 * g.hz;
                for i in 0..=g.nr {
                    out.set(
                        i,
                        0,
                        (-3.0 * self.at(i, 0) + 4.0 * self.at(i, 1) - self.at(i, 2)) / h2,
                    );
                    for j in 1..g.nz {
                        out.set(i, j, (self.at(i, j + 1) - self.at(i, j - 1)) / h2);
                    }
                    let n = g.nz;
                    out.set(
                        i,
                        n,
                        (3.0 * self.at(i, n) - 4.0 * self.at(i, n - 1) + self.at(i, n - 2)) / h2,
                    );
                }
            }
        }
        out.pin_axis_if_odd();
        out
    }

    /// f/r for odd f, with the axis column set to the L'Hôpital limit
    /// f_r(0,z) = f(h,z)/h. The quotient of an odd field is even.
    pub fn quotient_by_r(&self) -> Result<ScalarField> {
        if self.parity != Parity::Odd {
            return Err(Error::Contract(format!(
                "quotient_by_r needs an odd-parity field, '{}' is even",
                self.label
            )));
        }
        let g = &self.grid;
        let mut out = ScalarField::zeros(g.clone(), Parity::Even, format!("({})/r", self.label));
        for j in 0..=g.nz {
            out.set(0, j, self.at(1, j) / g.hr);
            for i in 1..=g.nr {
                out.set(i, j, self.at(i, j) / g.r(i));
            }
        }
        Ok(out)
    }
}

/// Axis coefficient b₁(z) of a swirl-like field u ≈ b₁ r² + O(r³): a two-node
/// fit over span{r², r³} at r = h, 2h, exact through cubic radial behavior
/// and O(h²) accurate for smooth u.
pub fn swirl_axis_coefficient(u: &ScalarField) -> Vec<f64> {
    let g = u.grid();
    let h2 = g.hr * g.hr;
    (0..=g.nz)
        .map(|j| (8.0 * u.at(1, j) - u.at(2, j)) / (4.0 * h2))
        .collect()
}

/// Centered/one-sided derivative of a 1-D profile sampled on the z-line.
fn dz_line(b: &[f64], hz: f64) -> Vec<f64> {
    let n = b.len() - 1;
    let h2 = 2.0 * hz;
    let mut out = vec![0.0; n + 1];
    out[0] = (-3.0 * b[0] + 4.0 * b[1] - b[2]) / h2;
    for j in 1..n {
        out[j] = (b[j + 1] - b[j - 1]) / h2;
    }
    out[n] = (3.0 * b[n] - 4.0 * b[n - 1] + b[n - 2]) / h2;
    out
}

/// Axisymmetric curl of a velocity field given by its cylindrical components:
/// ω_r = −v_φ,z, ω_φ = v_r,z − v_z,r, ω_z = v_φ,r + v_φ/r, with the axis value
/// of v_φ/r taken as v_φ,r(0,z) (valid by odd parity).
pub fn curl_axisym(
    v_r: &ScalarField,
    v_phi: &ScalarField,
    v_z: &ScalarField,
) -> Result<(ScalarField, ScalarField, ScalarField)> {
    v_r.same_grid(v_phi)?;
    v_r.same_grid(v_z)?;
    if v_r.parity() != Parity::Odd || v_phi.parity() != Parity::Odd || v_z.parity() != Parity::Even
    {
        return Err(Error::Contract(
            "curl_axisym expects (odd, odd, even) parities for (v_r, v_phi, v_z)".into(),
        ));
    }
    let mut omega_r = v_phi.derivative(Direction::Z);
    omega_r.scale_in_place(-1.0);
    let omega_r = ScalarField::from_values(
        v_r.grid().clone(),
        Parity::Odd,
        "omega_r",
        omega_r.values().to_vec(),
    )?;

    let dz_vr = v_r.derivative(Direction::Z);
    let dr_vz = v_z.derivative(Direction::R);
    let mut omega_phi = dz_vr.linear_comb(1.0, &dr_vz, -1.0);
    omega_phi = ScalarField::from_values(
        v_r.grid().clone(),
        Parity::Odd,
        "omega_phi",
        omega_phi.values().to_vec(),
    )?;

    let dr_vphi = v_phi.derivative(Direction::R);
    let vphi_over_r = v_phi.quotient_by_r()?;
    let omega_z = ScalarField::from_values(
        v_r.grid().clone(),
        Parity::Even,
        "omega_z",
        dr_vphi
            .values()
            .iter()
            .zip(vphi_over_r.values())
            .map(|(&a, &b)| a + b)
            .collect(),
    )?;
    Ok((omega_r, omega_phi, omega_z))
}

/// Φ = ω_r/r = −u_z/r² from the swirl. Off the axis this is a nodewise
/// division; on the axis Φ(0,z) = −∂_z b₁(z) with b₁ the r² coefficient of u.
pub fn phi_from_swirl(u: &ScalarField) -> Result<ScalarField> {
    if u.parity() != Parity::Odd {
        return Err(Error::Contract(
            "phi_from_swirl expects the swirl with the odd parity tag".into(),
        ));
    }
    let g = u.grid().clone();
    let tol = 1e-12 * u.max_abs().max(1.0);
    for j in 0..=g.nz {
        if u.at(0, j).abs() > tol {
            return Err(Error::Contract(format!(
                "swirl must vanish on the axis; |u(0,z_{j})| = {}",
                u.at(0, j).abs()
            )));
        }
    }
    let uz = u.derivative(Direction::Z);
    let b1 = swirl_axis_coefficient(u);
    let db1 = dz_line(&b1, g.hz);
    let mut out = ScalarField::zeros(g.clone(), Parity::Even, "phi");
    for (j, &db1_j) in db1.iter().enumerate() {
        out.set(0, j, -db1_j);
        for i in 1..=g.nr {
            let r = g.r(i);
            out.set(i, j, -uz.at(i, j) / (r * r));
        }
    }
    Ok(out)
}

/// Γ = ω_φ/r, with the axis value ω_φ,r(0,z) by L'Hôpital (ω_φ is odd).
pub fn gamma_from_omega(omega_phi: &ScalarField) -> Result<ScalarField> {
    let mut out = omega_phi.quotient_by_r()?;
    out = ScalarField::from_values(
        omega_phi.grid().clone(),
        Parity::Even,
        "gamma",
        out.values().to_vec(),
    )?;
    Ok(out)
}

/// Max over interior nodes of |(r v_r)_r + (r v_z)_z| / r, assembled with the
/// shared derivative stencils. This is the residual of the continuity
/// equation; velocities recovered from the stream function satisfy it to
/// rounding by construction.
pub fn divergence_residual(v_r: &ScalarField, v_z: &ScalarField) -> Result<f64> {
    v_r.same_grid(v_z)?;
    if v_r.parity() != Parity::Odd || v_z.parity() != Parity::Even {
        return Err(Error::Contract(
            "divergence_residual expects odd v_r and even v_z".into(),
        ));
    }
    let g = v_r.grid().clone();
    let r_vr = ScalarField::from_fn(g.clone(), Parity::Even, "r*v_r", |_, _| 0.0);
    let mut r_vr = r_vr;
    let mut r_vz = ScalarField::zeros(g.clone(), Parity::Odd, "r*v_z");
    for i in 0..=g.nr {
        let r = g.r(i);
        for j in 0..=g.nz {
            r_vr.set(i, j, r * v_r.at(i, j));
            r_vz.set(i, j, r * v_z.at(i, j));
        }
    }
    let da = r_vr.derivative(Direction::R);
    let db = r_vz.derivative(Direction::Z);
    let mut worst = 0.0_f64;
    for i in 1..g.nr {
        let r = g.r(i);
        for j in 1..g.nz {
            worst = worst.max((da.at(i, j) + db.at(i, j)).abs() / r);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::CylinderGrid;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid64() -> Arc<CylinderGrid> {
        CylinderGrid::build(1.0, 1.0, 64, 64).unwrap()
    }

    #[test]
    fn z_derivative_matches_analytic_profile() {
        let g = grid64();
        let f = ScalarField::from_fn(g.clone(), Parity::Even, "f", |r, z| {
            (1.0 - r * r) * (PI / 2.0 * z).sin()
        });
        let fz = f.derivative(Direction::Z);
        // At (0.5, 0): ∂z = (π/2)·0.75.
        let (i, j) = (32, 32);
        let expect = PI / 2.0 * 0.75;
        assert!((fz.at(i, j) - expect).abs() <= 1e-3, "{}", fz.at(i, j));
        assert_eq!(fz.parity(), Parity::Even);
    }

    #[test]
    fn r_derivative_of_even_field_vanishes_on_axis() {
        let g = grid64();
        let f = ScalarField::from_fn(g, Parity::Even, "f", |r, z| (1.0 - r * r) * (1.0 + z));
        let fr = f.derivative(Direction::R);
        assert_eq!(fr.parity(), Parity::Odd);
        for j in 0..=64 {
            assert_eq!(fr.at(0, j), 0.0);
        }
        // Interior check: ∂r = −2r.
        assert!((fr.at(32, 32) + 1.0).abs() <= 1e-10);
    }

    #[test]
    fn curl_of_rigid_rotation_is_twice_omega() {
        let g = grid64();
        let zero = ScalarField::zeros(g.clone(), Parity::Odd, "v_r");
        let vphi = ScalarField::from_fn(g.clone(), Parity::Odd, "v_phi", |r, _| r);
        let vz = ScalarField::zeros(g.clone(), Parity::Even, "v_z");
        let (wr, wphi, wz) = curl_axisym(&zero, &vphi, &vz).unwrap();
        assert!(wr.max_abs() <= 1e-12);
        assert!(wphi.max_abs() <= 1e-12);
        for i in 0..=64 {
            for j in 0..=64 {
                assert!((wz.at(i, j) - 2.0).abs() <= 1e-10, "at ({i},{j})");
            }
        }
    }

    #[test]
    fn curl_axis_value_uses_odd_parity_limit() {
        let g = grid64();
        let zero = ScalarField::zeros(g.clone(), Parity::Odd, "v_r");
        let vphi = ScalarField::from_fn(g.clone(), Parity::Odd, "v_phi", |r, z| {
            r * (1.0 - r * r) * (PI / 2.0 * z).cos()
        });
        let vz = ScalarField::zeros(g.clone(), Parity::Even, "v_z");
        let (_, _, wz) = curl_axisym(&zero, &vphi, &vz).unwrap();
        // ω_z(0,0) = 2·∂r v_φ(0,0) = 2.
        assert!((wz.at(0, 32) - 2.0).abs() <= 1e-3, "{}", wz.at(0, 32));
    }

    #[test]
    fn curl_rejects_wrong_parities() {
        let g = grid64();
        let a = ScalarField::zeros(g.clone(), Parity::Even, "a");
        let b = ScalarField::zeros(g.clone(), Parity::Odd, "b");
        let c = ScalarField::zeros(g.clone(), Parity::Even, "c");
        assert!(curl_axisym(&a, &b, &c).is_err());
    }

    #[test]
    fn phi_from_polynomial_swirl_is_exact() {
        let g = grid64();
        let u = ScalarField::from_fn(g.clone(), Parity::Odd, "u", |r, z| r * r * z);
        let phi = phi_from_swirl(&u).unwrap();
        for i in 0..=64 {
            for j in 0..=64 {
                assert!((phi.at(i, j) + 1.0).abs() <= 1e-11, "at ({i},{j})");
            }
        }
    }

    #[test]
    fn phi_axis_column_tracks_r2_coefficient() {
        let g = grid64();
        let u = ScalarField::from_fn(g.clone(), Parity::Odd, "u", |r, z| {
            r * r * (1.0 - r) * (PI / 2.0 * z).sin()
        });
        let phi = phi_from_swirl(&u).unwrap();
        // Φ(0,z) = −∂z b₁ = −(π/2)cos(πz/2); check at z=0 (j=32).
        let expect = -PI / 2.0;
        assert!((phi.at(0, 32) - expect).abs() <= 3e-3, "{}", phi.at(0, 32));
    }

    #[test]
    fn phi_rejects_swirl_with_axis_mass() {
        let g = grid64();
        let mut u = ScalarField::from_fn(g.clone(), Parity::Odd, "u", |r, z| r * r * z);
        // Forging an even-tagged field with axis mass must be rejected.
        let mut vals = u.values().to_vec();
        for j in 0..=64 {
            vals[g.idx(0, j)] = 0.5;
        }
        u = ScalarField::from_values(g, Parity::Even, "u", vals).unwrap();
        assert!(phi_from_swirl(&u).is_err());
    }

    #[test]
    fn gamma_from_omega_divides_off_axis() {
        let g = grid64();
        let w = ScalarField::from_fn(g.clone(), Parity::Odd, "omega_phi", |r, _| r * r * r);
        let gamma = gamma_from_omega(&w).unwrap();
        let i = 32; // r = 0.5
        assert!((gamma.at(i, 10) - 0.25).abs() <= 1e-12);
        assert_eq!(gamma.parity(), Parity::Even);
    }

    #[test]
    fn divergence_of_polynomial_solenoidal_pair_vanishes() {
        let g = grid64();
        // v_r = −r g'(z)/2, v_z = g(z) is exactly solenoidal; degree ≤ 2 in z
        // makes every stencil exact.
        let gq = |z: f64| 1.0 + z + 0.5 * z * z;
        let dgq = |z: f64| 1.0 + z;
        let vr = ScalarField::from_fn(g.clone(), Parity::Odd, "v_r", |r, z| -0.5 * r * dgq(z));
        let vz = ScalarField::from_fn(g.clone(), Parity::Even, "v_z", |_, z| gq(z));
        let res = divergence_residual(&vr, &vz).unwrap();
        assert!(res <= 1e-10, "residual {res}");
    }

    #[test]
    fn divergence_detects_compressible_field() {
        let g = grid64();
        let vr = ScalarField::from_fn(g.clone(), Parity::Odd, "v_r", |r, _| r);
        let vz = ScalarField::zeros(g.clone(), Parity::Even, "v_z");
        let res = divergence_residual(&vr, &vz).unwrap();
        assert!((res - 2.0).abs() <= 1e-10, "residual {res}");
    }

    proptest! {
        // Parity algebra of the derivative: d/dr flips, d/dz preserves, and
        // odd outputs are exactly zero on the axis.
        #[test]
        fn derivative_parity_rules(seed in 0u64..200) {
            let g = CylinderGrid::build(1.0, 1.0, 16, 16).unwrap();
            let k = (seed % 5) as f64 + 1.0;
            let f = ScalarField::from_fn(g, Parity::Even, "f", move |r, z| {
                (k * r * r).cos() * (z * k).sin()
            });
            let fr = f.derivative(Direction::R);
            let fz = f.derivative(Direction::Z);
            prop_assert_eq!(fr.parity(), Parity::Odd);
            prop_assert_eq!(fz.parity(), Parity::Even);
            for j in 0..=16 {
                prop_assert_eq!(fr.at(0, j), 0.0);
            }
        }

        // Summation-by-parts defect: for fields vanishing on the whole
        // boundary, ∫ f g_z + ∫ g f_z is O(h²)-small (no boundary flux).
        #[test]
        fn discrete_integration_by_parts_defect_is_small(seed in 0u64..50) {
            let c = 0.5 + (seed % 4) as f64 * 0.25;
            let defect_at = |n: usize| -> f64 {
                let g = CylinderGrid::build(1.0, 1.0, n, n).unwrap();
                let f = ScalarField::from_fn(g.clone(), Parity::Even, "f", |r, z| {
                    (1.0 - r * r) * (1.0 - z * z) * (c * (1.0 + z)).sin()
                });
                let w = ScalarField::from_fn(g.clone(), Parity::Even, "w", |r, z| {
                    (1.0 - r * r) * (1.0 - z * z)
                });
                let fz = f.derivative(Direction::Z);
                let wz = w.derivative(Direction::Z);
                g.integrate_samples("ibp", |i, j| {
                    f.at(i, j) * wz.at(i, j) + w.at(i, j) * fz.at(i, j)
                })
                .unwrap()
            };
            let coarse = defect_at(16).abs();
            let fine = defect_at(32).abs();
            prop_assert!(coarse <= 1e-2);
            // Second-order decay, with generous slack for cancellation.
            prop_assert!(fine <= 0.5 * coarse + 1e-12, "coarse {coarse} fine {fine}");
        }
    }
}
