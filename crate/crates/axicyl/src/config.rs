//! Run configuration: a strict flat `key = value` file format, defaults,
//! cross-parameter validation, and a deterministic echo for provenance.
//!
//! Unknown or duplicated keys are rejected rather than ignored, so a typo
//! cannot silently fall back to a default. `schema_version` is the only
//! mandatory key; everything else has a documented default.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::elliptic::{Preconditioner, SolveSettings};
use crate::error::{Error, Result};
use crate::forcing::Forcing;
use crate::geometry::CylinderGrid;

pub const SCHEMA_VERSION: u32 = 1;

/// Initial-data presets. Both satisfy the wall and axis conditions exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialPreset {
    /// u₀ = A·r²(1−(r/R)²)²cos²(πz/(2a)), Γ₀ = 0.
    SwirlBubble,
    /// Swirl bubble plus Γ₀ = B·(1−(r/R)²)·sin(πz/a)·(1−(z/a)²).
    ShearedJet,
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub schema_version: u32,
    pub nu: f64,
    pub radius: f64,
    pub half_height: f64,
    pub nr: usize,
    pub nz: usize,
    pub cfl_advective: f64,
    pub cfl_diffusive: f64,
    pub t_end: f64,
    /// Emit a CSV row every this many accepted steps (the final step is
    /// always emitted).
    pub output_every: usize,
    /// Override the adaptive step with a constant one (reference runs).
    pub fixed_dt: Option<f64>,
    pub initial: InitialPreset,
    pub initial_swirl_amp: f64,
    pub initial_gamma_amp: f64,
    pub forcing_preset: String,
    pub forcing_amp_r: f64,
    pub forcing_amp_phi: f64,
    pub forcing_amp_z: f64,
    /// Weighted-criterion exponent δ ∈ (0,1).
    pub delta: f64,
    /// Integrability exponent d > 3 used by the borderline criterion checks.
    pub d: f64,
    /// Secondary criterion exponent s > 1.
    pub s: f64,
    /// Interpolation splitting parameters for the energy-type estimate.
    pub eps1: f64,
    pub eps2: f64,
    /// Convexity weight for the weighted stream-function identity.
    pub mu: f64,
    /// Smallest admissible measured criterion constant; gates the borderline
    /// bounds that are vacuous when the ratio degenerates.
    pub c0_floor: f64,
    pub seed: u64,
    pub elliptic_tolerance: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            nu: 0.05,
            radius: 1.0,
            half_height: 1.0,
            nr: 64,
            nz: 128,
            cfl_advective: 0.4,
            cfl_diffusive: 0.2,
            t_end: 0.2,
            output_every: 10,
            fixed_dt: None,
            initial: InitialPreset::SwirlBubble,
            initial_swirl_amp: 1.0,
            initial_gamma_amp: 0.5,
            forcing_preset: "quiescent".to_string(),
            forcing_amp_r: 0.0,
            forcing_amp_phi: 0.0,
            forcing_amp_z: 0.0,
            delta: 0.1,
            d: 8.0,
            s: 8.0,
            eps1: 0.3,
            eps2: 0.05,
            mu: 0.5,
            c0_floor: 0.05,
            seed: 42,
            elliptic_tolerance: 1e-10,
        }
    }
}

fn parse_num<T: std::str::FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse::<T>()
        .map_err(|_| Error::Config(format!("key '{key}' has unparsable value '{raw}'")))
}

impl SimConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Parse the flat format: one `key = value` per line, `#` comments,
    /// blank lines ignored. Unknown and duplicate keys are errors;
    /// `schema_version` is mandatory.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen: BTreeMap<String, ()> = BTreeMap::new();
        let mut have_version = false;
        for (ln, raw_line) in text.lines().enumerate() {
            let line = match raw_line.find('#') {
                Some(pos) => &raw_line[..pos],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value'", ln + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            if seen.insert(key.to_string(), ()).is_some() {
                return Err(Error::Config(format!("duplicate key '{key}'")));
            }
            match key {
                "schema_version" => {
                    cfg.schema_version = parse_num(key, value)?;
                    have_version = true;
                }
                "nu" => cfg.nu = parse_num(key, value)?,
                "radius" => cfg.radius = parse_num(key, value)?,
                "half_height" => cfg.half_height = parse_num(key, value)?,
                "nr" => cfg.nr = parse_num(key, value)?,
                "nz" => cfg.nz = parse_num(key, value)?,
                "cfl_advective" => cfg.cfl_advective = parse_num(key, value)?,
                "cfl_diffusive" => cfg.cfl_diffusive = parse_num(key, value)?,
                "t_end" => cfg.t_end = parse_num(key, value)?,
                "output_every" => cfg.output_every = parse_num(key, value)?,
                "fixed_dt" => cfg.fixed_dt = Some(parse_num(key, value)?),
                "initial" => {
                    cfg.initial = match value {
                        "swirl-bubble" => InitialPreset::SwirlBubble,
                        "sheared-jet" => InitialPreset::ShearedJet,
                        other => {
                            return Err(Error::Config(format!(
                                "unknown initial preset '{other}' (expected swirl-bubble or sheared-jet)"
                            )))
                        }
                    }
                }
                "initial_swirl_amp" => cfg.initial_swirl_amp = parse_num(key, value)?,
                "initial_gamma_amp" => cfg.initial_gamma_amp = parse_num(key, value)?,
                "forcing" => cfg.forcing_preset = value.to_string(),
                "forcing_amp_r" => cfg.forcing_amp_r = parse_num(key, value)?,
                "forcing_amp_phi" => cfg.forcing_amp_phi = parse_num(key, value)?,
                "forcing_amp_z" => cfg.forcing_amp_z = parse_num(key, value)?,
                "delta" => cfg.delta = parse_num(key, value)?,
                "d" => cfg.d = parse_num(key, value)?,
                "s" => cfg.s = parse_num(key, value)?,
                "eps1" => cfg.eps1 = parse_num(key, value)?,
                "eps2" => cfg.eps2 = parse_num(key, value)?,
                "mu" => cfg.mu = parse_num(key, value)?,
                "c0_floor" => cfg.c0_floor = parse_num(key, value)?,
                "seed" => cfg.seed = parse_num(key, value)?,
                "elliptic_tolerance" => cfg.elliptic_tolerance = parse_num(key, value)?,
                other => {
                    return Err(Error::Config(format!("unknown key '{other}'")));
                }
            }
        }
        if !have_version {
            return Err(Error::Config("missing mandatory key 'schema_version'".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (this build reads {})",
                self.schema_version, SCHEMA_VERSION
            )));
        }
        if !(self.nu > 0.0) {
            return Err(Error::Config(format!("nu must be positive, got {}", self.nu)));
        }
        if !(self.radius > 0.0 && self.half_height > 0.0) {
            return Err(Error::Config("cylinder dimensions must be positive".into()));
        }
        if self.nr < 8 || self.nz < 8 {
            return Err(Error::Config(format!(
                "grid must be at least 8x8, got {}x{}",
                self.nr, self.nz
            )));
        }
        for (name, c) in [
            ("cfl_advective", self.cfl_advective),
            ("cfl_diffusive", self.cfl_diffusive),
        ] {
            if !(c > 0.0 && c <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0,1], got {c}")));
            }
        }
        if !(self.t_end >= 0.0) {
            return Err(Error::Config(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if self.output_every == 0 {
            return Err(Error::Config("output_every must be at least 1".into()));
        }
        if let Some(dt) = self.fixed_dt {
            if !(dt > 0.0) {
                return Err(Error::Config(format!("fixed_dt must be positive, got {dt}")));
            }
        }
        match self.forcing_preset.as_str() {
            "quiescent" | "swirl-jet" => {}
            other => {
                return Err(Error::Config(format!(
                    "unknown forcing preset '{other}' (expected quiescent or swirl-jet)"
                )))
            }
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!(
                "delta must lie in (0,1), got {}",
                self.delta
            )));
        }
        if !(self.d > 3.0) {
            return Err(Error::Config(format!(
                "criterion exponent d must exceed 3, got {}",
                self.d
            )));
        }
        if !(self.s > 1.0) {
            return Err(Error::Config(format!(
                "criterion exponent s must exceed 1, got {}",
                self.s
            )));
        }
        if !(self.eps1 > 0.0) || !(self.eps2 >= 0.0) {
            return Err(Error::Config(format!(
                "splitting parameters need eps1 > 0 and eps2 >= 0, got {} and {}",
                self.eps1, self.eps2
            )));
        }
        let theta = self.theta();
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::Config(format!(
                "splitting exponent theta = (1-3/d)eps1 - (3/d)eps2 = {theta} must lie in (0,1)"
            )));
        }
        if 1.0 + self.eps2 / self.eps1 > self.d / 3.0 {
            return Err(Error::Config(format!(
                "splitting requires 1 + eps2/eps1 <= d/3, got {} > {}",
                1.0 + self.eps2 / self.eps1,
                self.d / 3.0
            )));
        }
        // The two stated forms of the strict-convexity condition must agree:
        // theta > (eps1+eps2)/2  <=>  eps2 < eps1 (d-6)/(d+6).
        let lhs = theta > 0.5 * (self.eps1 + self.eps2);
        let rhs = self.eps2 < self.eps1 * (self.d - 6.0) / (self.d + 6.0);
        if lhs != rhs {
            return Err(Error::Config(
                "splitting parameters sit on the degenerate boundary of the convexity condition"
                    .into(),
            ));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::Config(format!("mu must lie in (0,1), got {}", self.mu)));
        }
        if !(self.c0_floor > 0.0) {
            return Err(Error::Config(format!(
                "c0_floor must be positive, got {}",
                self.c0_floor
            )));
        }
        if !(self.elliptic_tolerance > 0.0 && self.elliptic_tolerance < 1e-4) {
            return Err(Error::Config(format!(
                "elliptic_tolerance must lie in (0, 1e-4), got {}",
                self.elliptic_tolerance
            )));
        }
        Ok(())
    }

    /// θ = (1−3/d)ε₁ − (3/d)ε₂.
    pub fn theta(&self) -> f64 {
        (1.0 - 3.0 / self.d) * self.eps1 - (3.0 / self.d) * self.eps2
    }

    pub fn build_grid(&self) -> Result<Arc<CylinderGrid>> {
        CylinderGrid::build(self.radius, self.half_height, self.nr, self.nz)
    }

    pub fn forcing(&self) -> Forcing {
        match self.forcing_preset.as_str() {
            "swirl-jet" => Forcing::SwirlJet {
                amp_r: self.forcing_amp_r,
                amp_phi: self.forcing_amp_phi,
                amp_z: self.forcing_amp_z,
            },
            _ => Forcing::Quiescent,
        }
    }

    pub fn elliptic_settings(&self, grid: &CylinderGrid) -> SolveSettings {
        SolveSettings {
            tolerance: self.elliptic_tolerance,
            max_iterations: 20 * (grid.nr + grid.nz),
            preconditioner: Preconditioner::Diagonal,
        }
    }

    /// Deterministic echo of every effective value, sorted by key. Floats use
    /// Rust's shortest round-trip formatting, so echo → parse is lossless.
    pub fn echo(&self) -> String {
        let mut pairs: Vec<(String, String)> = vec![
            ("schema_version".into(), self.schema_version.to_string()),
            ("nu".into(), self.nu.to_string()),
            ("radius".into(), self.radius.to_string()),
            ("half_height".into(), self.half_height.to_string()),
            ("nr".into(), self.nr.to_string()),
            ("nz".into(), self.nz.to_string()),
            ("cfl_advective".into(), self.cfl_advective.to_string()),
            ("cfl_diffusive".into(), self.cfl_diffusive.to_string()),
            ("t_end".into(), self.t_end.to_string()),
            ("output_every".into(), self.output_every.to_string()),
            (
                "initial".into(),
                match self.initial {
                    InitialPreset::SwirlBubble => "swirl-bubble".into(),
                    InitialPreset::ShearedJet => "sheared-jet".into(),
                },
            ),
            ("initial_swirl_amp".into(), self.initial_swirl_amp.to_string()),
            ("initial_gamma_amp".into(), self.initial_gamma_amp.to_string()),
            ("forcing".into(), self.forcing_preset.clone()),
            ("forcing_amp_r".into(), self.forcing_amp_r.to_string()),
            ("forcing_amp_phi".into(), self.forcing_amp_phi.to_string()),
            ("forcing_amp_z".into(), self.forcing_amp_z.to_string()),
            ("delta".into(), self.delta.to_string()),
            ("d".into(), self.d.to_string()),
            ("s".into(), self.s.to_string()),
            ("eps1".into(), self.eps1.to_string()),
            ("eps2".into(), self.eps2.to_string()),
            ("mu".into(), self.mu.to_string()),
            ("c0_floor".into(), self.c0_floor.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("elliptic_tolerance".into(), self.elliptic_tolerance.to_string()),
        ];
        if let Some(dt) = self.fixed_dt {
            pairs.push(("fixed_dt".into(), dt.to_string()));
        }
        pairs.sort();
        let mut out = String::new();
        for (k, v) in pairs {
            out.push_str(&k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn parses_minimal_file() {
        let cfg = SimConfig::parse("schema_version = 1\n").unwrap();
        assert_eq!(cfg.nu, 0.05);
        assert_eq!(cfg.nr, 64);
        assert_eq!(cfg.initial, InitialPreset::SwirlBubble);
    }

    #[test]
    fn parses_overrides_and_comments() {
        let text = "\
# a comment
schema_version = 1
nu = 0.02   # inline comment
nr = 48
nz = 96
initial = sheared-jet
forcing = swirl-jet
forcing_amp_phi = 0.8
fixed_dt = 0.001
";
        let cfg = SimConfig::parse(text).unwrap();
        assert_eq!(cfg.nu, 0.02);
        assert_eq!(cfg.nr, 48);
        assert_eq!(cfg.initial, InitialPreset::ShearedJet);
        assert_eq!(cfg.fixed_dt, Some(0.001));
        match cfg.forcing() {
            Forcing::SwirlJet { amp_phi, .. } => assert_eq!(amp_phi, 0.8),
            _ => panic!("expected swirl-jet"),
        }
    }

    #[test]
    fn rejects_unknown_and_duplicate_keys() {
        assert!(matches!(
            SimConfig::parse("schema_version = 1\nviscosity = 0.1\n"),
            Err(Error::Config(msg)) if msg.contains("viscosity")
        ));
        assert!(SimConfig::parse("schema_version = 1\nnu = 0.1\nnu = 0.2\n").is_err());
    }

    #[test]
    fn requires_schema_version() {
        assert!(SimConfig::parse("nu = 0.1\n").is_err());
        assert!(SimConfig::parse("schema_version = 2\n").is_err());
    }

    #[test]
    fn default_splitting_exponent_matches_hand_value() {
        // (1 - 3/8)·0.3 − (3/8)·0.05 = 0.16875.
        let cfg = SimConfig::default();
        assert!((cfg.theta() - 0.16875).abs() <= 1e-15);
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        let rejects = |mutate: fn(&mut SimConfig)| {
            let mut cfg = SimConfig::default();
            mutate(&mut cfg);
            assert!(cfg.validate().is_err());
        };
        rejects(|c| c.nu = 0.0);
        rejects(|c| c.d = 3.0);
        rejects(|c| c.eps1 = 1e-9); // theta collapses to ~0
        rejects(|c| {
            c.eps2 = 0.2;
            c.d = 4.0; // 1 + eps2/eps1 now exceeds d/3
        });
        rejects(|c| c.cfl_advective = 1.5);
        rejects(|c| c.mu = 1.0);
        rejects(|c| c.elliptic_tolerance = 1e-3);
        rejects(|c| c.fixed_dt = Some(-0.1));
    }

    #[test]
    fn echo_round_trips() {
        let cfg = SimConfig {
            nu: 0.0123456789012345,
            fixed_dt: Some(1.5e-3),
            forcing_preset: "swirl-jet".into(),
            forcing_amp_phi: 0.7,
            ..SimConfig::default()
        };
        let echoed = cfg.echo();
        let back = SimConfig::parse(&echoed).unwrap();
        assert_eq!(back.nu, cfg.nu);
        assert_eq!(back.fixed_dt, cfg.fixed_dt);
        assert_eq!(back.forcing_preset, cfg.forcing_preset);
        assert_eq!(back.echo(), echoed);
    }
}
