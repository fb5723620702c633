//! Time integration of the reduced axisymmetric system.
//!
//! State variables are the swirl u = r·v_φ and Γ = ω_φ/r:
//!
//!   ∂t u + v·∇u = ν(∂rr − (1/r)∂r + ∂zz)u + f₀
//!   ∂t Γ + v·∇Γ = ν(∂rr + (3/r)∂r + ∂zz)Γ − 2(v_φ/r)Φ + F̄_φ
//!
//! closed by the stream-function solve −Δψ₁ − (2/r)∂r ψ₁ = Γ and the
//! velocity recovery. Φ = −∂z u / r² couples the two equations.
//!
//! Boundary conditions: u = 0 on the axis and the lateral wall, ∂z u = 0 on
//! the end plates (imposed through a reflected ghost in the z-diffusion);
//! Γ = 0 on the lateral wall and the plates, with a second-order even
//! extrapolation onto the axis. These make the walls impermeable and
//! stress-free, so the kinetic-energy identity holds without boundary work.
//!
//! Radial diffusion is discretized in flux form (exact for the r² and 1−r²
//! profiles the operators are built around); advection is centered. Time
//! stepping is three-stage strong-stability-preserving Runge–Kutta with
//! boundary conditions, elliptic re-solve and velocity rebuild after every
//! stage.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::config::{InitialPreset, SimConfig};
use crate::diagnostics::DiagnosticsSeries;
use crate::elliptic::{solve_psi1, velocity_from_psi1, SolveSettings};
use crate::error::{Error, Result};
use crate::field::{phi_from_swirl, swirl_axis_coefficient, Direction, Parity, ScalarField};
use crate::forcing::ForcingTerms;
use crate::geometry::CylinderGrid;

/// Floor for the measured speed in the advective step restriction.
const SPEED_FLOOR: f64 = 1e-12;

/// Fully assembled instantaneous state: prognostic fields plus everything
/// derived from them through the elliptic solve and the axis-aware algebra.
#[derive(Debug, Clone)]
pub struct FlowState {
    pub t: f64,
    pub u: ScalarField,
    pub gamma: ScalarField,
    pub psi1: ScalarField,
    pub v_r: ScalarField,
    pub v_z: ScalarField,
    pub v_phi: ScalarField,
    /// v_φ/r with its axis limit from the r² fit of u.
    pub vphi_over_r: ScalarField,
    /// Φ = −∂z u / r², axis column −∂z b₁.
    pub phi: ScalarField,
    pub elliptic_residual: f64,
    pub elliptic_iterations: usize,
}

impl FlowState {
    /// Kinetic energy (1/2)∫|v|² r dr dz.
    pub fn energy(&self) -> Result<f64> {
        self.u.grid().integrate_samples("kinetic energy", |i, j| {
            0.5 * (self.v_r.at(i, j).powi(2)
                + self.v_phi.at(i, j).powi(2)
                + self.v_z.at(i, j).powi(2))
        })
    }

    /// Largest meridian speed |v_r| + |v_z| over the grid.
    pub fn max_speed(&self) -> f64 {
        let g = self.u.grid();
        let mut m = 0.0_f64;
        for i in 0..=g.nr {
            for j in 0..=g.nz {
                m = m.max(self.v_r.at(i, j).abs() + self.v_z.at(i, j).abs());
            }
        }
        m
    }

    /// ω_r = r·Φ (identical to −∂z v_φ nodewise).
    pub fn omega_r(&self) -> ScalarField {
        let g = self.u.grid().clone();
        let mut out = ScalarField::zeros(g.clone(), Parity::Odd, "omega_r");
        for i in 0..=g.nr {
            let r = g.r(i);
            for j in 0..=g.nz {
                out.set(i, j, r * self.phi.at(i, j));
            }
        }
        out
    }

    /// ω_z = (1/r)∂r u, axis value 2b₁ from the r² fit.
    pub fn omega_z(&self) -> ScalarField {
        let g = self.u.grid().clone();
        let ur = self.u.derivative(Direction::R);
        let b1 = swirl_axis_coefficient(&self.u);
        let mut out = ScalarField::zeros(g.clone(), Parity::Even, "omega_z");
        for (j, &b) in b1.iter().enumerate() {
            out.set(0, j, 2.0 * b);
        }
        for i in 1..=g.nr {
            let r = g.r(i);
            for j in 0..=g.nz {
                out.set(i, j, ur.at(i, j) / r);
            }
        }
        out
    }

    /// ω_φ = r·Γ.
    pub fn omega_phi(&self) -> ScalarField {
        let g = self.u.grid().clone();
        let mut out = ScalarField::zeros(g.clone(), Parity::Odd, "omega_phi");
        for i in 0..=g.nr {
            let r = g.r(i);
            for j in 0..=g.nz {
                out.set(i, j, r * self.gamma.at(i, j));
            }
        }
        out
    }
}

/// Enforce the prognostic boundary conditions in place: u vanishes on the
/// axis and the lateral wall; Γ vanishes on the lateral wall and the plates
/// and is extrapolated onto the axis with a second-order even stencil.
pub fn apply_boundary_conditions(u: &mut ScalarField, gamma: &mut ScalarField) {
    let g = u.grid().clone();
    for j in 0..=g.nz {
        u.set(0, j, 0.0);
        u.set(g.nr, j, 0.0);
        gamma.set(g.nr, j, 0.0);
    }
    for i in 0..=g.nr {
        gamma.set(i, 0, 0.0);
        gamma.set(i, g.nz, 0.0);
    }
    // Even extrapolation Γ(0) = (4Γ(h) − Γ(2h))/3 enforces ∂r Γ(0) = 0.
    for j in 1..g.nz {
        let v = (4.0 * gamma.at(1, j) - gamma.at(2, j)) / 3.0;
        gamma.set(0, j, v);
    }
}

/// Solve the elliptic closure and build the full state from (t, u, Γ).
pub fn assemble(
    t: f64,
    u: ScalarField,
    gamma: ScalarField,
    warm_start: Option<&ScalarField>,
    settings: &SolveSettings,
) -> Result<FlowState> {
    u.check_finite()?;
    gamma.check_finite()?;
    let sol = solve_psi1(&gamma, settings, warm_start)?;
    let (v_r, v_z) = velocity_from_psi1(&sol.field)?;
    let g = u.grid().clone();
    let mut v_phi = ScalarField::zeros(g.clone(), Parity::Odd, "v_phi");
    let mut vphi_over_r = ScalarField::zeros(g.clone(), Parity::Even, "v_phi/r");
    let b1 = swirl_axis_coefficient(&u);
    for (j, &b) in b1.iter().enumerate() {
        vphi_over_r.set(0, j, b);
    }
    for i in 1..=g.nr {
        let r = g.r(i);
        for j in 0..=g.nz {
            v_phi.set(i, j, u.at(i, j) / r);
            vphi_over_r.set(i, j, u.at(i, j) / (r * r));
        }
    }
    let phi = phi_from_swirl(&u)?;
    Ok(FlowState {
        t,
        u,
        gamma,
        psi1: sol.field,
        v_r,
        v_z,
        v_phi,
        vphi_over_r,
        phi,
        elliptic_residual: sol.relative_residual,
        elliptic_iterations: sol.iterations,
    })
}

/// Stable step: min of the advective bound cfl_a·h/|v| and the diffusive
/// bound cfl_d·h²/(4ν), unless the configuration pins a fixed step.
pub fn stable_dt(state: &FlowState, cfg: &SimConfig) -> f64 {
    if let Some(dt) = cfg.fixed_dt {
        return dt;
    }
    let g = state.u.grid();
    let h = g.hr.min(g.hz);
    let speed = state.max_speed().max(SPEED_FLOOR);
    let adv = cfg.cfl_advective * h / speed;
    let diff = cfg.cfl_diffusive * h * h / (4.0 * cfg.nu);
    adv.min(diff)
}

/// Driver for one configuration: owns the forcing samplers (cached when the
/// force is steady) and the elliptic settings.
pub struct Stepper {
    grid: Arc<CylinderGrid>,
    nu: f64,
    settings: SolveSettings,
    terms: ForcingTerms,
    cached_sources: Option<(ScalarField, ScalarField)>,
}

impl Stepper {
    pub fn new(cfg: &SimConfig, grid: Arc<CylinderGrid>) -> Result<Self> {
        let settings = cfg.elliptic_settings(&grid);
        settings.validate()?;
        Ok(Self {
            grid,
            nu: cfg.nu,
            settings,
            terms: cfg.forcing().terms(cfg.radius, cfg.half_height),
            cached_sources: None,
        })
    }

    /// Install explicit forcing terms (manufactured-solution runs).
    pub fn with_terms(mut self, terms: ForcingTerms) -> Self {
        self.terms = terms;
        self.cached_sources = None;
        self
    }

    pub fn terms(&self) -> &ForcingTerms {
        &self.terms
    }

    pub fn settings(&self) -> &SolveSettings {
        &self.settings
    }

    /// (f₀, F̄_φ) at time t.
    fn sources(&mut self, t: f64) -> (ScalarField, ScalarField) {
        if self.terms.steady {
            if self.cached_sources.is_none() {
                self.cached_sources = Some((
                    self.terms.f0_field(&self.grid, 0.0),
                    self.terms.fbar_phi_field(&self.grid, 0.0),
                ));
            }
            let (a, b) = self.cached_sources.as_ref().unwrap();
            (a.clone(), b.clone())
        } else {
            (
                self.terms.f0_field(&self.grid, t),
                self.terms.fbar_phi_field(&self.grid, t),
            )
        }
    }

    /// Right-hand side of the swirl equation on the evolved nodes
    /// (1 ≤ i ≤ nr−1, all j; the plate rows use the reflected ghost).
    fn rhs_swirl(&self, st: &FlowState, f0: &ScalarField) -> ScalarField {
        let g = &self.grid;
        let nu = self.nu;
        let (hr, hz) = (g.hr, g.hz);
        let hr2 = hr * hr;
        let hz2 = hz * hz;
        let u = &st.u;
        let mut out = ScalarField::zeros(g.clone(), Parity::Odd, "du/dt");
        for i in 1..g.nr {
            let r = g.r(i);
            // Half-node weights of the flux form r·∂r(u_r/r).
            let sm = 1.0 / (r - 0.5 * hr);
            let sp = 1.0 / (r + 0.5 * hr);
            for j in 0..=g.nz {
                let gp = (u.at(i + 1, j) - u.at(i, j)) * sp;
                let gm = (u.at(i, j) - u.at(i - 1, j)) * sm;
                let diff_r = nu * r * (gp - gm) / hr2;
                let diff_z = if j == 0 {
                    2.0 * nu * (u.at(i, 1) - u.at(i, 0)) / hz2
                } else if j == g.nz {
                    2.0 * nu * (u.at(i, g.nz - 1) - u.at(i, g.nz)) / hz2
                } else {
                    nu * (u.at(i, j + 1) - 2.0 * u.at(i, j) + u.at(i, j - 1)) / hz2
                };
                let ur = (u.at(i + 1, j) - u.at(i - 1, j)) / (2.0 * hr);
                // ∂z u = 0 on the plates, and v_z vanishes there exactly.
                let uz = if j == 0 || j == g.nz {
                    0.0
                } else {
                    (u.at(i, j + 1) - u.at(i, j - 1)) / (2.0 * hz)
                };
                let adv = st.v_r.at(i, j) * ur + st.v_z.at(i, j) * uz;
                out.set(i, j, -adv + diff_r + diff_z + f0.at(i, j));
            }
        }
        out
    }

    /// Right-hand side of the Γ equation on the interior nodes
    /// (1 ≤ i ≤ nr−1, 1 ≤ j ≤ nz−1).
    fn rhs_gamma(&self, st: &FlowState, fbar_phi: &ScalarField) -> ScalarField {
        let g = &self.grid;
        let nu = self.nu;
        let (hr, hz) = (g.hr, g.hz);
        let hr2 = hr * hr;
        let hz2 = hz * hz;
        let ga = &st.gamma;
        let mut out = ScalarField::zeros(g.clone(), Parity::Even, "dGamma/dt");
        for i in 1..g.nr {
            let r = g.r(i);
            let r3 = r * r * r;
            let rm3 = (r - 0.5 * hr).powi(3);
            let rp3 = (r + 0.5 * hr).powi(3);
            for j in 1..g.nz {
                let diff_r = nu
                    * (rp3 * (ga.at(i + 1, j) - ga.at(i, j))
                        - rm3 * (ga.at(i, j) - ga.at(i - 1, j)))
                    / (r3 * hr2);
                let diff_z =
                    nu * (ga.at(i, j + 1) - 2.0 * ga.at(i, j) + ga.at(i, j - 1)) / hz2;
                let gr = (ga.at(i + 1, j) - ga.at(i - 1, j)) / (2.0 * hr);
                let gz = (ga.at(i, j + 1) - ga.at(i, j - 1)) / (2.0 * hz);
                let adv = st.v_r.at(i, j) * gr + st.v_z.at(i, j) * gz;
                let stretch = -2.0 * st.vphi_over_r.at(i, j) * st.phi.at(i, j);
                out.set(i, j, -adv + diff_r + diff_z + stretch + fbar_phi.at(i, j));
            }
        }
        out
    }

    fn euler_stage(
        &mut self,
        st: &FlowState,
        source_time: f64,
        dt: f64,
    ) -> (ScalarField, ScalarField) {
        let (f0, fbar) = self.sources(source_time);
        let du = self.rhs_swirl(st, &f0);
        let dg = self.rhs_gamma(st, &fbar);
        (
            st.u.linear_comb(1.0, &du, dt),
            st.gamma.linear_comb(1.0, &dg, dt),
        )
    }

    /// One strong-stability-preserving RK3 step. Boundary conditions, the
    /// stream-function solve and the velocity rebuild run after every stage;
    /// non-finite values abort the step.
    ///
    /// The first and last stages solve the stream function from scratch, so
    /// the whole step is a pure function of (u, Γ, t, dt) and the returned
    /// state is bitwise identical to a cold assembly of its own (u, Γ) — a
    /// restart from persisted (u, Γ) then reproduces the original trajectory
    /// bitwise, including the adaptive step sizes derived from the cached
    /// velocities. Stage two warm-starts from its in-step predecessor.
    pub fn step(&mut self, st: &FlowState, dt: f64) -> Result<FlowState> {
        let t = st.t;

        let (mut u1, mut g1) = self.euler_stage(st, t, dt);
        apply_boundary_conditions(&mut u1, &mut g1);
        let s1 = assemble(t + dt, u1, g1, None, &self.settings)?;

        let (eu, eg) = self.euler_stage(&s1, t + dt, dt);
        let mut u2 = st.u.linear_comb(0.75, &eu, 0.25);
        let mut g2 = st.gamma.linear_comb(0.75, &eg, 0.25);
        apply_boundary_conditions(&mut u2, &mut g2);
        let s2 = assemble(t + 0.5 * dt, u2, g2, Some(&s1.psi1), &self.settings)?;

        let (eu, eg) = self.euler_stage(&s2, t + 0.5 * dt, dt);
        let mut u3 = st.u.linear_comb(1.0 / 3.0, &eu, 2.0 / 3.0);
        let mut g3 = st.gamma.linear_comb(1.0 / 3.0, &eg, 2.0 / 3.0);
        apply_boundary_conditions(&mut u3, &mut g3);
        assemble(t + dt, u3, g3, None, &self.settings)
    }
}

/// Build the initial state from the configured preset.
pub fn initial_state(cfg: &SimConfig, grid: &Arc<CylinderGrid>) -> Result<FlowState> {
    let rr = cfg.radius;
    let a = cfg.half_height;
    let amp = cfg.initial_swirl_amp;
    let mut u = ScalarField::from_fn(grid.clone(), Parity::Odd, "u", |r, z| {
        let s = 1.0 - (r / rr) * (r / rr);
        let c = (PI * z / (2.0 * a)).cos();
        amp * r * r * s * s * c * c
    });
    let mut gamma = match cfg.initial {
        InitialPreset::SwirlBubble => ScalarField::zeros(grid.clone(), Parity::Even, "gamma"),
        InitialPreset::ShearedJet => {
            let b = cfg.initial_gamma_amp;
            ScalarField::from_fn(grid.clone(), Parity::Even, "gamma", |r, z| {
                let zr = z / a;
                b * (1.0 - (r / rr) * (r / rr)) * (PI * zr).sin() * (1.0 - zr * zr)
            })
        }
    };
    apply_boundary_conditions(&mut u, &mut gamma);
    assemble(0.0, u, gamma, None, &cfg.elliptic_settings(grid))
}

/// One recorded step of a run, handed to the record callback.
pub struct RunRecord<'a> {
    pub step: u64,
    /// Step just taken (0 for the initial record).
    pub dt: f64,
    pub state: &'a FlowState,
    pub series: &'a DiagnosticsSeries,
    /// True on reporting steps: step 0, every `output_every`-th step, and
    /// the final step.
    pub emit: bool,
}

/// Integrates the configured problem from its preset initial state.
pub fn run(
    cfg: &SimConfig,
    on_record: &mut dyn FnMut(&RunRecord) -> Result<()>,
) -> Result<(FlowState, DiagnosticsSeries)> {
    cfg.validate()?;
    let grid = cfg.build_grid()?;
    let state = initial_state(cfg, &grid)?;
    run_from(state, cfg, on_record)
}

/// Integrates from an existing state (fresh or restored from a checkpoint)
/// until `t_end`, recording diagnostics every accepted step and invoking the
/// callback with the reporting cadence marked. A start already at or beyond
/// `t_end` records the initial state and takes no steps.
pub fn run_from(
    start: FlowState,
    cfg: &SimConfig,
    on_record: &mut dyn FnMut(&RunRecord) -> Result<()>,
) -> Result<(FlowState, DiagnosticsSeries)> {
    cfg.validate()?;
    let grid = start.u.grid().clone();
    if grid.nr != cfg.nr || grid.nz != cfg.nz {
        return Err(Error::Config(format!(
            "state grid {}x{} does not match the configured {}x{}",
            grid.nr, grid.nz, cfg.nr, cfg.nz
        )));
    }
    let mut stepper = Stepper::new(cfg, grid)?;
    let mut series = DiagnosticsSeries::new(cfg, &start, stepper.terms())?;
    let mut state = start;
    let mut step: u64 = 0;
    on_record(&RunRecord {
        step,
        dt: 0.0,
        state: &state,
        series: &series,
        emit: true,
    })?;
    // Absolute slack below which the remaining interval is considered spent;
    // guards against a size-underflow final step from rounding.
    let closing = 1e-12 * cfg.t_end.max(1.0);
    while state.t < cfg.t_end - closing {
        let mut dt = stable_dt(&state, cfg);
        if state.t + dt > cfg.t_end {
            dt = cfg.t_end - state.t;
        }
        state = stepper.step(&state, dt)?;
        series.update(&state, stepper.terms())?;
        step += 1;
        let done = state.t >= cfg.t_end - closing;
        let emit = done || step.is_multiple_of(cfg.output_every as u64);
        on_record(&RunRecord {
            step,
            dt,
            state: &state,
            series: &series,
            emit,
        })?;
        if done {
            break;
        }
    }
    Ok((state, series))
}
