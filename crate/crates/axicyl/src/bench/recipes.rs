//! Random admissible inputs for the inequality checks: boundary- and
//! parity-respecting polynomial envelopes modulated by a handful of seeded
//! trigonometric modes, plus compact one-dimensional bump profiles. Every
//! recipe is a closure over analytic data, so the same sample can be
//! evaluated on any grid of a refinement pair.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Analytic meridian-plane profile, shareable across grids and threads.
pub type PlaneProfile = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Analytic half-line profile for the one-dimensional weighted inequality.
pub type LineProfile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Largest number of random trigonometric modes per sample.
pub const MAX_MODES: usize = 8;

/// Deterministic per-sample generator: one stream per (seed, sample id).
pub fn sample_rng(seed: u64, id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ id.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

struct Mode {
    amp: f64,
    k_r: f64,
    k_z: f64,
    phase_r: f64,
    phase_z: f64,
}

fn draw_modes(rng: &mut ChaCha8Rng) -> Vec<Mode> {
    let count = rng.gen_range(2..=MAX_MODES);
    (0..count)
        .map(|_| Mode {
            amp: rng.gen_range(-1.0..1.0),
            k_r: rng.gen_range(0..=3) as f64,
            k_z: rng.gen_range(1..=4) as f64,
            phase_r: rng.gen_range(0.0..(2.0 * PI)),
            phase_z: rng.gen_range(0.0..(2.0 * PI)),
        })
        .collect()
}

fn modal_sum(modes: &[Mode], rho_sq: f64, zeta: f64) -> f64 {
    modes
        .iter()
        .map(|m| {
            m.amp
                * (m.k_r * PI * rho_sq + m.phase_r).cos()
                * (m.k_z * PI * zeta / 2.0 + m.phase_z).cos()
        })
        .sum()
}

/// Even-in-r profile vanishing on the lateral wall and the end plates —
/// admissible data for the stream-function source. Smooth because it only
/// depends on r through (r/R)².
pub fn gamma_profile(rng: &mut ChaCha8Rng, radius: f64, half_height: f64) -> PlaneProfile {
    let modes = draw_modes(rng);
    Arc::new(move |r: f64, z: f64| {
        let rho_sq = (r / radius) * (r / radius);
        let zeta = z / half_height;
        (1.0 - rho_sq) * (1.0 - zeta * zeta) * modal_sum(&modes, rho_sq, zeta)
    })
}

/// Smooth even-in-r profile without boundary constraints, for the
/// interpolation inequality (valid for arbitrary Sobolev functions).
pub fn smooth_profile(rng: &mut ChaCha8Rng, radius: f64, half_height: f64) -> PlaneProfile {
    let modes = draw_modes(rng);
    Arc::new(move |r: f64, z: f64| {
        let rho_sq = (r / radius) * (r / radius);
        let zeta = z / half_height;
        modal_sum(&modes, rho_sq, zeta)
    })
}

/// Even-in-r profile with compact radial support (zero for r ≥ 0.85·R), as
/// required by the singular-weight interpolation inequality. The cubic
/// cutoff keeps two continuous derivatives at the support edge.
pub fn compact_profile(rng: &mut ChaCha8Rng, radius: f64, half_height: f64) -> PlaneProfile {
    let modes = draw_modes(rng);
    let edge = 0.85 * radius;
    Arc::new(move |r: f64, z: f64| {
        let t = 1.0 - (r / edge) * (r / edge);
        if t <= 0.0 {
            return 0.0;
        }
        let rho_sq = (r / radius) * (r / radius);
        let zeta = z / half_height;
        t * t * t * modal_sum(&modes, rho_sq, zeta)
    })
}

/// Compact quartic bump on a random sub-interval of (0, 1), normalized to a
/// unit peak. Vanishes to second order at both ends, so the cumulative
/// primitive in the one-dimensional inequality is smooth.
pub fn bump_profile(rng: &mut ChaCha8Rng) -> LineProfile {
    let a = rng.gen_range(0.05..0.55);
    let b = rng.gen_range(a + 0.2..0.95);
    let amp = rng.gen_range(0.25..2.0);
    let half: f64 = 0.5 * (b - a);
    let peak = half.powi(4);
    Arc::new(move |x: f64| {
        if x <= a || x >= b {
            0.0
        } else {
            amp * (x - a).powi(2) * (b - x).powi(2) / peak
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recipes_are_deterministic_per_seed_and_id() {
        let f1 = gamma_profile(&mut sample_rng(7, 3), 1.0, 1.0);
        let f2 = gamma_profile(&mut sample_rng(7, 3), 1.0, 1.0);
        let g = gamma_profile(&mut sample_rng(7, 4), 1.0, 1.0);
        let mut saw_difference = false;
        for &(r, z) in &[(0.3, -0.4), (0.7, 0.2), (0.05, 0.9)] {
            assert_eq!(f1(r, z), f2(r, z));
            saw_difference |= (f1(r, z) - g(r, z)).abs() > 1e-12;
        }
        assert!(saw_difference, "different ids must give different fields");
    }

    #[test]
    fn gamma_profile_vanishes_on_the_boundary() {
        let f = gamma_profile(&mut sample_rng(11, 0), 2.0, 1.5);
        for k in 0..=10 {
            let z = -1.5 + 3.0 * k as f64 / 10.0;
            assert_eq!(f(2.0, z), 0.0);
            let r = 2.0 * k as f64 / 10.0;
            assert_eq!(f(r, 1.5), 0.0);
            assert_eq!(f(r, -1.5), 0.0);
        }
    }

    #[test]
    fn compact_profile_vanishes_near_the_wall() {
        let f = compact_profile(&mut sample_rng(5, 2), 1.0, 1.0);
        for k in 0..=10 {
            let z = -1.0 + 2.0 * k as f64 / 10.0;
            assert_eq!(f(0.86, z), 0.0);
            assert_eq!(f(1.0, z), 0.0);
        }
    }

    #[test]
    fn bump_profile_is_compact_and_bounded() {
        for id in 0..20 {
            let f = bump_profile(&mut sample_rng(3, id));
            assert_eq!(f(0.0), 0.0);
            assert_eq!(f(1.0), 0.0);
            let mut peak: f64 = 0.0;
            for k in 0..=200 {
                peak = peak.max(f(k as f64 / 200.0).abs());
            }
            assert!(peak > 0.01 && peak <= 2.0, "peak {peak} out of range");
        }
    }
}
