//! Body forces and the derived source terms the reduced system consumes.
//!
//! A force f = (f_r, f_φ, f_z) enters the evolution through two scalars:
//! f₀ = r·f_φ drives the swirl equation, and the azimuthal component of the
//! reduced curl, F̄_φ = (∂_z f_r − ∂_r f_z)/r, drives Γ. The verification
//! functionals additionally consume the curl components F_r = −∂_z f_φ,
//! F_z = ∂_r f_φ + f_φ/r, their reduced forms F̄ = F/r, and f_φ/r itself.
//!
//! All of these are supplied as analytic samplers rather than differenced
//! numerically, so forcing terms carry no extra truncation error. Presets
//! hand-code their derivatives; tests may install custom closures.

use std::sync::Arc;

use crate::field::{Parity, ScalarField};
use crate::geometry::CylinderGrid;

/// Analytic sampler (r, z, t) → value.
pub type Sampler = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

fn zero_sampler() -> Sampler {
    Arc::new(|_, _, _| 0.0)
}

/// Closed-form samplers for a force and every derived source the solver and
/// the diagnostics need. Fields near the axis must respect the regularity
/// parities: f_r, f_φ odd in r; f_z even.
#[derive(Clone)]
pub struct ForcingTerms {
    /// Time-independent forces are sampled once per grid and cached.
    pub steady: bool,
    pub f_r: Sampler,
    pub f_phi: Sampler,
    pub f_z: Sampler,
    /// f₀ = r·f_φ (swirl source).
    pub f0: Sampler,
    /// f_φ/r with its analytic axis limit.
    pub f_phi_over_r: Sampler,
    /// F̄_r = −(∂_z f_φ)/r.
    pub fbar_r: Sampler,
    /// F̄_φ = (∂_z f_r − ∂_r f_z)/r (Γ source).
    pub fbar_phi: Sampler,
    /// F_r = −∂_z f_φ.
    pub cap_f_r: Sampler,
    /// F_z = ∂_r f_φ + f_φ/r.
    pub cap_f_z: Sampler,
}

impl ForcingTerms {
    pub fn zero() -> Self {
        Self {
            steady: true,
            f_r: zero_sampler(),
            f_phi: zero_sampler(),
            f_z: zero_sampler(),
            f0: zero_sampler(),
            f_phi_over_r: zero_sampler(),
            fbar_r: zero_sampler(),
            fbar_phi: zero_sampler(),
            cap_f_r: zero_sampler(),
            cap_f_z: zero_sampler(),
        }
    }

    fn field(
        &self,
        grid: &Arc<CylinderGrid>,
        t: f64,
        parity: Parity,
        label: &str,
        s: &Sampler,
    ) -> ScalarField {
        ScalarField::from_fn(grid.clone(), parity, label, |r, z| s(r, z, t))
    }

    /// Swirl source r·f_φ (~r² near the axis; pinned to zero there).
    pub fn f0_field(&self, grid: &Arc<CylinderGrid>, t: f64) -> ScalarField {
        self.field(grid, t, Parity::Odd, "f0", &self.f0)
    }

    /// Γ source (∂_z f_r − ∂_r f_z)/r.
    pub fn fbar_phi_field(&self, grid: &Arc<CylinderGrid>, t: f64) -> ScalarField {
        self.field(grid, t, Parity::Even, "fbar_phi", &self.fbar_phi)
    }

    /// Everything the verification functionals integrate.
    pub fn sample(&self, grid: &Arc<CylinderGrid>, t: f64) -> ForcingSample {
        ForcingSample {
            f_r: self.field(grid, t, Parity::Odd, "f_r", &self.f_r),
            f_phi: self.field(grid, t, Parity::Odd, "f_phi", &self.f_phi),
            f_z: self.field(grid, t, Parity::Even, "f_z", &self.f_z),
            f0: self.f0_field(grid, t),
            f_phi_over_r: self.field(grid, t, Parity::Even, "f_phi/r", &self.f_phi_over_r),
            fbar_r: self.field(grid, t, Parity::Even, "fbar_r", &self.fbar_r),
            fbar_phi: self.fbar_phi_field(grid, t),
            cap_f_r: self.field(grid, t, Parity::Odd, "F_r", &self.cap_f_r),
            cap_f_z: self.field(grid, t, Parity::Even, "F_z", &self.cap_f_z),
        }
    }
}

/// One force, fully expanded on a grid at a fixed time.
pub struct ForcingSample {
    pub f_r: ScalarField,
    pub f_phi: ScalarField,
    pub f_z: ScalarField,
    pub f0: ScalarField,
    pub f_phi_over_r: ScalarField,
    pub fbar_r: ScalarField,
    pub fbar_phi: ScalarField,
    pub cap_f_r: ScalarField,
    pub cap_f_z: ScalarField,
}

/// Forcing selection, geometry-free; `terms` binds the cylinder dimensions.
#[derive(Clone)]
pub enum Forcing {
    Quiescent,
    /// Steady smooth force driving both the swirl and the meridian flow:
    ///   f_r = A_r·r(1−(r/R)²)·sin(πz/a)
    ///   f_φ = A_φ·r(1−(r/R)²)·cos(πz/(2a))
    ///   f_z = A_z·(1−(r/R)²)·cos(πz/(2a))
    /// All components vanish on the lateral wall.
    SwirlJet { amp_r: f64, amp_phi: f64, amp_z: f64 },
    Custom(ForcingTerms),
}

impl Forcing {
    pub fn is_quiescent(&self) -> bool {
        matches!(self, Forcing::Quiescent)
    }

    pub fn terms(&self, radius: f64, half_height: f64) -> ForcingTerms {
        match self {
            Forcing::Quiescent => ForcingTerms::zero(),
            Forcing::Custom(t) => t.clone(),
            &Forcing::SwirlJet {
                amp_r,
                amp_phi,
                amp_z,
            } => {
                use std::f64::consts::PI;
                let r2 = radius * radius;
                let a = half_height;
                let shape = move |r: f64| 1.0 - r * r / r2;
                let kz_full = PI / a; // sin(πz/a) wavenumber
                let kz_half = PI / (2.0 * a); // cos(πz/2a) wavenumber

                let f_r: Sampler =
                    Arc::new(move |r, z, _| amp_r * r * shape(r) * (kz_full * z).sin());
                let f_phi: Sampler =
                    Arc::new(move |r, z, _| amp_phi * r * shape(r) * (kz_half * z).cos());
                let f_z: Sampler = Arc::new(move |r, z, _| amp_z * shape(r) * (kz_half * z).cos());
                let f0: Sampler =
                    Arc::new(move |r, z, _| amp_phi * r * r * shape(r) * (kz_half * z).cos());
                let f_phi_over_r: Sampler =
                    Arc::new(move |r, z, _| amp_phi * shape(r) * (kz_half * z).cos());
                // ∂_z f_φ = −A_φ k_h · r·shape · sin; F_r = −∂_z f_φ.
                let cap_f_r: Sampler = Arc::new(move |r, z, _| {
                    amp_phi * kz_half * r * shape(r) * (kz_half * z).sin()
                });
                let fbar_r: Sampler = Arc::new(move |r, z, _| {
                    amp_phi * kz_half * shape(r) * (kz_half * z).sin()
                });
                // ∂_z f_r = A_r k_f · r·shape · cos(k_f z);
                // ∂_r f_z = −2A_z r/R² · cos(k_h z).
                let fbar_phi: Sampler = Arc::new(move |r, z, _| {
                    amp_r * kz_full * shape(r) * (kz_full * z).cos()
                        + 2.0 * amp_z / r2 * (kz_half * z).cos()
                });
                // F_z = ∂_r f_φ + f_φ/r = A_φ(2 − 4r²/R²)·cos(k_h z).
                let cap_f_z: Sampler = Arc::new(move |r, z, _| {
                    amp_phi * (2.0 - 4.0 * r * r / r2) * (kz_half * z).cos()
                });
                ForcingTerms {
                    steady: true,
                    f_r,
                    f_phi,
                    f_z,
                    f0,
                    f_phi_over_r,
                    fbar_r,
                    fbar_phi,
                    cap_f_r,
                    cap_f_z,
                }
            }
        }
    }
}
