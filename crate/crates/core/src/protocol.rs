//! The interferometric protocol as a state machine over hyperfine ⊗ motion
//! states.
//!
//! Motional amplitudes live in the stiff-trap (ω₁) mode basis throughout.
//! Step 1 (cooling) and step 10 (recapture) are ideal; trap softening and
//! the release from radiation pressure are one sudden quench.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::Guard;
use crate::error::{Error, Result};
use crate::feasibility;
use crate::gaussian::{self, CoherentBranch};
use crate::params::{self, PhysicalScenario};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HyperfineLevel {
    Down,
    Up,
}

impl HyperfineLevel {
    pub fn other(self) -> Self {
        match self {
            HyperfineLevel::Down => HyperfineLevel::Up,
            HyperfineLevel::Up => HyperfineLevel::Down,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub level: HyperfineLevel,
    pub motion: CoherentBranch,
}

/// Superposition of (level, coherent state) components. Components on the
/// same level with equal amplitudes are always merged, so a factorizable
/// state has at most one component per level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HybridState {
    pub components: Vec<Component>,
}

/// Amplitudes closer than this (relative to their size) are one state.
const MERGE_TOLERANCE: f64 = 1e-12;

/// Weights below this are rounding residue from pulse trigonometry.
const NEGLIGIBLE_WEIGHT: f64 = 1e-14;

fn same_amplitude(a: C64, b: C64) -> bool {
    (a - b).norm() <= MERGE_TOLERANCE * a.norm().max(1.0)
}

impl HybridState {
    pub fn product(level: HyperfineLevel, alpha: C64) -> Self {
        HybridState { components: vec![Component { level, motion: CoherentBranch::new(alpha) }] }
    }

    pub fn on_level(&self, level: HyperfineLevel) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(move |c| c.level == level)
    }

    /// ‖P_level ψ‖², including cross terms between components.
    pub fn level_population(&self, level: HyperfineLevel) -> f64 {
        let comps: Vec<_> = self.on_level(level).collect();
        let mut sum = 0.0;
        for a in &comps {
            for b in &comps {
                sum += a.motion.overlap(&b.motion).re;
            }
        }
        sum
    }

    pub fn norm_sqr(&self) -> f64 {
        self.level_population(HyperfineLevel::Down) + self.level_population(HyperfineLevel::Up)
    }

    /// Collapses components that share a level and an amplitude.
    pub fn merged(self) -> Self {
        let mut out: Vec<Component> = Vec::with_capacity(self.components.len());
        for c in self.components {
            match out.iter_mut().find(|o| o.level == c.level && same_amplitude(o.motion.alpha, c.motion.alpha)) {
                Some(o) => {
                    let proj = gaussian::coherent_overlap(o.motion.alpha, c.motion.alpha);
                    o.motion.weight += c.motion.weight * proj;
                }
                None => out.push(c),
            }
        }
        out.retain(|c| c.motion.weight.norm() > NEGLIGIBLE_WEIGHT);
        HybridState { components: out }
    }

    /// Largest distance between any two motional amplitudes.
    pub fn residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for a in &self.components {
            for b in &self.components {
                r = r.max((a.motion.alpha - b.motion.alpha).norm());
            }
        }
        r
    }

    /// Smallest |⟨α_i|α_j⟩| between motional amplitudes; 1 when factorizable.
    pub fn visibility(&self) -> f64 {
        let mut v: f64 = 1.0;
        for a in &self.components {
            for b in &self.components {
                v = v.min(gaussian::coherent_overlap(a.motion.alpha, b.motion.alpha).norm());
            }
        }
        v
    }
}

/// Carrier rotation by area θ with laser phase φ_L:
/// |↓⟩ → cos(θ/2)|↓⟩ + e^{iφ_L}sin(θ/2)|↑⟩,
/// |↑⟩ → cos(θ/2)|↑⟩ − e^{−iφ_L}sin(θ/2)|↓⟩. Motion is untouched.
pub fn rotation_pulse(s: &HybridState, area: f64, laser_phase: f64) -> HybridState {
    let (sn, cs) = (area / 2.0).sin_cos();
    let mut comps = Vec::with_capacity(2 * s.components.len());
    for c in &s.components {
        let (stay, flip) = match c.level {
            HyperfineLevel::Down => (cs.into(), C64::from_polar(sn, laser_phase)),
            HyperfineLevel::Up => (C64::from(cs), -C64::from_polar(sn, -laser_phase)),
        };
        comps.push(Component { level: c.level, motion: c.motion.scale(stay) });
        comps.push(Component { level: c.level.other(), motion: c.motion.scale(flip) });
    }
    HybridState { components: comps }.merged()
}

/// Beam splitter |↓⟩ → (|↓⟩ + |↑⟩)/√2, |↑⟩ → (|↑⟩ − |↓⟩)/√2.
pub fn pi_half_pulse(s: &HybridState) -> HybridState {
    rotation_pulse(s, FRAC_PI_2, 0.0)
}

/// Exchange |↓⟩ → |↑⟩, |↑⟩ → −|↓⟩.
pub fn pi_pulse(s: &HybridState) -> HybridState {
    rotation_pulse(s, PI, 0.0)
}

/// Displaces the motion of every component on `target` by β, with the
/// composition phase.
pub fn displacement_beam(s: &HybridState, beta: C64, target: HyperfineLevel) -> HybridState {
    let components = s
        .components
        .iter()
        .map(|c| if c.level == target { Component { level: c.level, motion: c.motion.displace(beta) } } else { *c })
        .collect();
    HybridState { components }.merged()
}

/// Displaces the single `target` component onto amplitude `to`. The
/// displacement is to − α and the new amplitude is set to `to` exactly.
pub fn displacement_onto(s: &HybridState, to: C64, target: HyperfineLevel) -> Result<HybridState> {
    let mut hits = 0;
    let components = s
        .components
        .iter()
        .map(|c| {
            if c.level != target {
                return *c;
            }
            hits += 1;
            let beta = to - c.motion.alpha;
            let (_, phase) = gaussian::displace_compose(beta, c.motion.alpha);
            let motion = CoherentBranch::with_weight(to, c.motion.weight * C64::from_polar(1.0, phase));
            Component { level: c.level, motion }
        })
        .collect();
    if hits != 1 {
        return Err(Error::State(format!("expected one {target:?} component, found {hits}")));
    }
    Ok(HybridState { components }.merged())
}

/// One piecewise-constant stage of the Paul-trap schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapSegment {
    /// Protocol step at which the segment starts.
    pub step: u32,
    /// rad/s
    pub omega: f64,
    /// Radiation-pressure force, N.
    pub force: f64,
    /// s
    pub duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapSchedule {
    pub segments: Vec<TrapSegment>,
}

impl TrapSchedule {
    /// Stiff hold (if any) with gravity cancelled, then the softened free
    /// fall from step 5 to the inverse beam at step 7.
    pub fn from_scenario(s: &PhysicalScenario) -> Result<Self> {
        let weight = s.nanoparticle.mass * s.constants.g_e;
        let mut segments = Vec::new();
        if s.timing.hold > 0.0 {
            segments.push(TrapSegment { step: 4, omega: s.trap.stiff_freq, force: weight, duration: s.timing.hold });
        }
        segments.push(TrapSegment { step: 5, omega: s.trap.soft_freq, force: s.trap.radiation_force, duration: s.timing.free_fall });
        let schedule = TrapSchedule { segments };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn validate(&self) -> Result<()> {
        for (i, seg) in self.segments.iter().enumerate() {
            if !(seg.duration > 0.0) {
                return Err(Error::State(format!("schedule.segments[{i}].duration must be > 0")));
            }
        }
        Ok(())
    }
}

/// Everything the free-fall stage needs, in rad/s and ω₁ units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeFall {
    pub omega1: f64,
    pub omega2: f64,
    /// Gravitational coupling of the ω₂ mode.
    pub g2: f64,
    pub duration: f64,
    pub force: f64,
    /// Nanoparticle weight m_n g_E, N.
    pub weight: f64,
    pub guard: Guard,
}

impl FreeFall {
    /// Coupling of the ω₁ mode, g₁ = sqrt(ω₂/ω₁) g₂.
    pub fn g1(&self) -> f64 {
        (self.omega2 / self.omega1).sqrt() * self.g2
    }
}

/// Steps 5-6: every component evolves through the quench.
pub fn free_fall_segment(s: &HybridState, ff: &FreeFall) -> Result<HybridState> {
    if ff.force >= 0.1 * ff.weight {
        return Err(Error::NotFreeFall { force: ff.force, limit: 0.1 * ff.weight });
    }
    let components = s
        .components
        .iter()
        .map(|c| {
            let e = gaussian::evolve_quench(c.motion, ff.omega1, ff.omega2, ff.g2, ff.duration, ff.guard)?;
            Ok(Component { level: c.level, motion: e.branch })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HybridState { components }.merged())
}

/// Stiff-trap dwell: free rotation at ω₁ with gravity cancelled.
pub fn stiff_hold(s: &HybridState, omega1: f64, duration: f64) -> HybridState {
    let rot = C64::from_polar(1.0, -omega1 * duration);
    let components = s
        .components
        .iter()
        .map(|c| Component { level: c.level, motion: CoherentBranch { alpha: c.motion.alpha * rot, ..c.motion } })
        .collect();
    HybridState { components }.merged()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Readout {
    pub p_down: f64,
    pub visibility: f64,
    pub residual: f64,
    /// Motional amplitudes differ by more than 1e-6.
    pub reduced_visibility: bool,
}

/// Probability of finding the atom in |↓⟩.
pub fn readout(s: &HybridState) -> Readout {
    let residual = s.residual();
    Readout {
        p_down: s.level_population(HyperfineLevel::Down) / s.norm_sqr(),
        visibility: s.visibility(),
        residual,
        reduced_visibility: residual > 1e-6,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum InitialState {
    Coherent(C64),
    /// Thermal state sampled from its P-function.
    Thermal { mean_occupation: f64, seed: u64, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOptions {
    pub initial: InitialState,
    pub seed: u64,
    /// Undo the displacement with the actual branch separation rather than −β.
    pub exact_phase: bool,
    pub cubic_correction: bool,
    /// Run even when a feasibility constraint fails.
    pub force: bool,
    /// Beam displacement amplitude in ω₁ units, replacing the scenario value.
    pub beta_override: Option<f64>,
    pub target: HyperfineLevel,
    pub guard: Guard,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        ProtocolOptions {
            initial: InitialState::Coherent(C64::new(0.0, 0.0)),
            seed: 42,
            exact_phase: true,
            cubic_correction: false,
            force: false,
            beta_override: None,
            target: HyperfineLevel::Down,
            guard: Guard::default(),
        }
    }
}

/// Scenario quantities the state machine uses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSetup {
    pub free_fall: FreeFall,
    pub hold: f64,
    /// Beam displacement amplitude in ω₁ units, β = Δx/(2δ₁).
    pub beta: f64,
    /// Superposition size, m.
    pub delta_x: f64,
    /// Extra phase on every pulse, rad.
    pub laser_phase: f64,
}

impl ProtocolSetup {
    pub fn from_scenario(s: &PhysicalScenario, beta_override: Option<f64>, guard: Guard) -> Result<Self> {
        s.validate()?;
        let schedule = TrapSchedule::from_scenario(s)?;
        let fall = schedule.segments.last().copied().expect("schedule has a free-fall segment");
        let (w1, w2) = (s.trap.stiff_freq, s.trap.soft_freq);
        let d2 = params::derive(s, w2)?;
        let hbar = s.constants.hbar;
        let delta1 = params::zero_point_position(hbar, d2.total_mass, w1);
        let (beta, delta_x) = match beta_override {
            Some(b) => (b, 2.0 * delta1 * b),
            None => {
                let dx = match s.superposition_size {
                    Some(dx) => dx,
                    None => feasibility::superposition_size(s, w2, s.beam.pulse_duration)?,
                };
                (dx / (2.0 * delta1), dx)
            }
        };
        Ok(ProtocolSetup {
            free_fall: FreeFall {
                omega1: w1,
                omega2: w2,
                g2: d2.grav_coupling,
                duration: fall.duration,
                force: fall.force,
                weight: s.nanoparticle.mass * s.constants.g_e,
                guard,
            },
            hold: s.timing.hold,
            beta,
            delta_x,
            laser_phase: s.beam.laser_phase,
        })
    }

    /// (φ_grav, φ⁽³⁾) predicted for the quadrature separation 2β.
    pub fn predicted_phases(&self) -> (f64, f64) {
        let ff = &self.free_fall;
        gaussian::branch_phase_difference(2.0 * self.beta, ff.g1(), ff.duration, ff.omega2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: u32,
    pub label: String,
    pub state: HybridState,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolResult {
    pub initial_alpha: C64,
    pub final_state: HybridState,
    /// Relative phase of the target branch, read from the state before the
    /// recombining pulse.
    pub phi_grav: f64,
    /// gtβ from the closed form.
    pub phi_grav_predicted: f64,
    pub phi3: f64,
    pub p_down: f64,
    pub visibility: f64,
    /// Branch amplitude mismatch after the inverse beam.
    pub residual: f64,
    /// |β||1 − carried displacement|, the squeezing-aware bound on the
    /// mismatch when the inverse beam is −β.
    pub residual_bound: f64,
    /// Largest norm deviation seen across the steps.
    pub norm_drift: f64,
    /// Neglected dynamical squeezing |z|.
    pub squeeze_modulus: f64,
    pub steps: Vec<StepRecord>,
}

/// Runs steps 2-9 for one coherent input.
pub fn run_coherent(setup: &ProtocolSetup, alpha: C64, opts: &ProtocolOptions) -> Result<ProtocolResult> {
    let target = opts.target;
    let ff = setup.free_fall;
    let mut steps = Vec::new();
    let mut drift: f64 = 0.0;
    let mut log = |step: u32, label: &str, s: &HybridState| {
        drift = drift.max((s.norm_sqr() - 1.0).abs());
        steps.push(StepRecord { step, label: label.into(), state: s.clone() });
    };

    let s = HybridState::product(HyperfineLevel::Down, alpha);
    log(1, "prepare", &s);
    let s = rotation_pulse(&s, FRAC_PI_2, setup.laser_phase);
    log(2, "pi/2 pulse", &s);
    let s = if setup.hold > 0.0 {
        let s = stiff_hold(&s, ff.omega1, setup.hold);
        log(3, "stiff hold", &s);
        s
    } else {
        s
    };
    let s = displacement_beam(&s, C64::new(setup.beta, 0.0), target);
    log(4, "displacement beam", &s);
    let mut s = free_fall_segment(&s, &ff)?;
    let (lead, cubic) = setup.predicted_phases();
    if opts.cubic_correction {
        s = HybridState {
            components: s
                .components
                .into_iter()
                .map(|c| if c.level == target { Component { motion: c.motion.rotate_weight(-cubic), ..c } } else { c })
                .collect(),
        };
    }
    log(6, "free fall", &s);

    let amp = |s: &HybridState, level| s.on_level(level).next().map(|c| c.motion.alpha);
    let (a_t, a_o) = match (amp(&s, target), amp(&s, target.other())) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::State("free fall left an empty level".into())),
    };
    let s = if opts.exact_phase {
        displacement_onto(&s, a_o, target)?
    } else {
        displacement_beam(&s, C64::new(-setup.beta, 0.0), target)
    };
    log(7, "inverse beam", &s);
    let residual = s.residual();
    let phi_grav = {
        let t: Vec<_> = s.on_level(target).collect();
        let o: Vec<_> = s.on_level(target.other()).collect();
        let rel: C64 = t.iter().flat_map(|a| o.iter().map(move |b| b.motion.overlap(&a.motion))).sum();
        -rel.arg()
    };
    let _ = a_t;

    let s = rotation_pulse(&s, FRAC_PI_2, PI + setup.laser_phase);
    log(8, "pi/2 pulse (recombine)", &s);
    let r = readout(&s);

    let quench = gaussian::quench_params(ff.omega1, ff.omega2, 0.0, ff.duration)?;
    Ok(ProtocolResult {
        initial_alpha: alpha,
        final_state: s,
        phi_grav,
        phi_grav_predicted: lead,
        phi3: cubic,
        p_down: r.p_down,
        visibility: r.visibility,
        residual,
        residual_bound: setup.beta * (C64::new(1.0, 0.0) - quench.carried_displacement()).norm(),
        norm_drift: drift,
        squeeze_modulus: quench.z.norm(),
        steps,
    })
}

/// Draws amplitudes from the thermal P-function (1/πn̄)e^{−|α|²/n̄}. Sample
/// k uses its own ChaCha stream, so results do not depend on scheduling.
pub fn sample_p_function(mean_occupation: f64, seed: u64, count: usize) -> Result<Vec<C64>> {
    if !(mean_occupation >= 0.0 && mean_occupation.is_finite()) {
        return Err(Error::domain("mean_occupation", "must be finite and >= 0"));
    }
    let normal = Normal::new(0.0, (mean_occupation / 2.0).sqrt()).map_err(|e| Error::domain("mean_occupation", e.to_string()))?;
    Ok((0..count)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            C64::new(normal.sample(&mut rng), normal.sample(&mut rng))
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolReport {
    pub setup: ProtocolSetup,
    /// One run per input amplitude, in sample order.
    pub runs: Vec<ProtocolResult>,
    pub p_down_mean: f64,
    pub p_down_std: f64,
    /// max − min of the extracted phase over runs.
    pub phi_spread: f64,
    pub feasibility: feasibility::FeasibilityReport,
}

impl ProtocolReport {
    /// The internal-state result does not depend on the motional input.
    pub fn sample_independent(&self) -> bool {
        self.p_down_std < 1e-9
    }
}

/// Runs the protocol for a scenario. Thermal inputs fan out over the rayon
/// pool; results stay in sample order.
pub fn run_protocol(scenario: &PhysicalScenario, opts: &ProtocolOptions) -> Result<ProtocolReport> {
    let report = feasibility::constraint_check(scenario)?;
    let failures = report.failures();
    if !failures.is_empty() {
        if opts.force {
            log::warn!("running despite failed constraints: {}", failures.join("; "));
        } else {
            return Err(Error::Constraints(failures));
        }
    }
    let setup = ProtocolSetup::from_scenario(scenario, opts.beta_override, opts.guard)?;
    let inputs = match opts.initial {
        InitialState::Coherent(a) => vec![a],
        InitialState::Thermal { mean_occupation, seed, count } => sample_p_function(mean_occupation, seed, count)?,
    };
    let runs = inputs.par_iter().map(|a| run_coherent(&setup, *a, opts)).collect::<Result<Vec<_>>>()?;
    let n = runs.len() as f64;
    let mean = runs.iter().map(|r| r.p_down).sum::<f64>() / n;
    let var = runs.iter().map(|r| (r.p_down - mean).powi(2)).sum::<f64>() / n;
    let (lo, hi) = runs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.phi_grav), hi.max(r.phi_grav)));
    Ok(ProtocolReport { setup, runs, p_down_mean: mean, p_down_std: var.sqrt(), phi_spread: hi - lo, feasibility: report })
}
