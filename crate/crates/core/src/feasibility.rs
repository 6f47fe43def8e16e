//! Experimental design formulas and the inequality budget.

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};
use crate::params::{self, AtomSpec, PhysicalConstants, PhysicalScenario, TrapConfig, MASS_RATIO_MIN};

/// Margin at or above which a "much less than" holds outright.
pub const PASS_MARGIN: f64 = 100.0;
/// Margin below which a "much less than" fails.
pub const WARN_MARGIN: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomTrap {
    /// ω_a, rad/s
    pub omega: f64,
    /// Trap width w the frequency was evaluated with, m.
    pub width: f64,
}

/// Dipole-trap frequency ω_a = sqrt(6πc²/(m_a w² ω_e³) · IΓ/Δ).
pub fn atom_trap_frequency(k: &PhysicalConstants, atom: &AtomSpec, trap: &TrapConfig) -> Result<AtomTrap> {
    if !(trap.detuning > 0.0) {
        return Err(Error::domain("trap.detuning", "blue-detuned or resonant"));
    }
    require_positive("trap.intensity", trap.intensity)?;
    let w = trap.trap_width();
    require_positive("trap.width", w)?;
    let we = atom.transition_freq;
    // grouped to keep intermediates near unity
    let geom = 6.0 * PI * (k.c / we) * (k.c / we) / (atom.mass * w * w * we);
    let drive = trap.intensity * (atom.linewidth / trap.detuning);
    Ok(AtomTrap { omega: (geom * drive).sqrt(), width: w })
}

/// Dipole-trap lifetime τ = (m_a c²/(ħω_l²))(Δ/Γ), with ω_l = 2πc/λ_l.
pub fn trap_lifetime(k: &PhysicalConstants, atom: &AtomSpec, trap: &TrapConfig) -> Result<f64> {
    if !(trap.detuning > 0.0) {
        return Err(Error::domain("trap.detuning", "blue-detuned or resonant"));
    }
    let omega_l = TAU * k.c / trap.wavelength;
    Ok(atom.mass * (k.c / omega_l) * (k.c / omega_l) / k.hbar * (trap.detuning / atom.linewidth))
}

/// Two-photon Raman coupling Ω_gg = g²/Δ_3 with g = E d/ħ and
/// E = sqrt(2I/(ε₀c)); both legs are taken equal.
pub fn raman_coupling(k: &PhysicalConstants, atom: &AtomSpec, beam_intensity: f64, raman_detuning: f64) -> Result<f64> {
    require_positive("trap.raman_detuning", raman_detuning)?;
    if !(beam_intensity >= 0.0) {
        return Err(Error::domain("beam.intensity", "must be >= 0"));
    }
    let field = (2.0 * beam_intensity / (k.eps0 * k.c)).sqrt();
    let g = field * (atom.dipole_moment / k.hbar);
    Ok(g * (g / raman_detuning))
}

/// Δx = ħkΩ_gg δt/(2Mω_n) produced by the displacement beam in a trap at ω_n.
pub fn superposition_size(scenario: &PhysicalScenario, omega_n: f64, pulse: f64) -> Result<f64> {
    require_positive("omega_n", omega_n)?;
    let k = &scenario.constants;
    let omega_gg = raman_coupling(k, &scenario.atom, scenario.beam.intensity, scenario.trap.raman_detuning)?;
    let mass = scenario.nanoparticle.mass + scenario.atom.mass;
    Ok(k.hbar * scenario.trap.raman_wavevector * omega_gg * pulse / (2.0 * mass * omega_n))
}

/// Leading gravitational phase m g_E Δx Δt/ħ.
pub fn gravitational_phase(k: &PhysicalConstants, mass: f64, delta_x: f64, t: f64) -> f64 {
    mass * k.g_e * delta_x * t / k.hbar
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Grade {
    Pass,
    Warn,
    Fail,
    /// Reported for reference only; never affects the exit code.
    Info,
}

impl fmt::Display for Grade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Grade::Pass => "pass",
            Grade::Warn => "warn",
            Grade::Fail => "fail",
            Grade::Info => "info",
        })
    }
}

/// Kind of inequality a verdict checks. `MuchLess` is `lhs ≪ rhs`;
/// `AtLeast` is `lhs ≳ rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    MuchLess,
    AtLeast,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::MuchLess => "<<",
            Relation::AtLeast => ">~",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub relation: Relation,
    pub lhs: f64,
    pub rhs: f64,
    /// Ratio by which the inequality is satisfied: rhs/lhs for `MuchLess`,
    /// lhs/rhs for `AtLeast`.
    pub margin: f64,
    pub grade: Grade,
}

/// Grades a margin against the pass/warn thresholds.
pub fn grade_much_less(margin: f64) -> Grade {
    if margin >= PASS_MARGIN {
        Grade::Pass
    } else if margin >= WARN_MARGIN {
        Grade::Warn
    } else {
        Grade::Fail
    }
}

impl Verdict {
    pub fn much_less(name: &str, lhs: f64, rhs: f64) -> Self {
        let margin = rhs / lhs;
        Verdict { name: name.into(), relation: Relation::MuchLess, lhs, rhs, margin, grade: grade_much_less(margin) }
    }

    pub fn at_least(name: &str, lhs: f64, rhs: f64) -> Self {
        let margin = lhs / rhs;
        let grade = if margin >= 1.0 { Grade::Pass } else { Grade::Fail };
        Verdict { name: name.into(), relation: Relation::AtLeast, lhs, rhs, margin, grade }
    }

    fn info(mut self) -> Self {
        self.grade = Grade::Info;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    /// rad/s
    pub omega_a: f64,
    pub trap_width: f64,
    /// s
    pub tau_trap: f64,
    /// Hold + free fall + both pulses, s.
    pub tau_exp: f64,
    /// Lamb-Dicke parameter in the softened trap.
    pub eta: f64,
    /// rad/s
    pub omega_gg: f64,
    /// Superposition size produced by the beam in the softened trap, m.
    pub delta_x_beam: f64,
    /// Superposition size the phases are evaluated at (configured or beam), m.
    pub delta_x: f64,
    pub phi_grav: f64,
    pub phi3: f64,
    /// Upper bound (m_a/m_n)ω_a on ω_n, rad/s.
    pub omega_upper: f64,
    /// Lower bound ħk²/(8π²M) = ħ/(2Mλ²) on ω_n, rad/s.
    pub omega_lower: f64,
    pub verdicts: Vec<Verdict>,
    pub notes: Vec<String>,
}

impl FeasibilityReport {
    /// Worst graded verdict, ignoring `Info` rows.
    pub fn worst(&self) -> Grade {
        let graded = self.verdicts.iter().map(|v| v.grade).filter(|g| *g != Grade::Info);
        graded.fold(Grade::Pass, |acc, g| match (acc, g) {
            (Grade::Fail, _) | (_, Grade::Fail) => Grade::Fail,
            (Grade::Warn, _) | (_, Grade::Warn) => Grade::Warn,
            _ => Grade::Pass,
        })
    }

    /// 0 when every constraint passes, 1 on any warning, 2 on any failure.
    pub fn exit_code(&self) -> i32 {
        match self.worst() {
            Grade::Pass | Grade::Info => 0,
            Grade::Warn => 1,
            Grade::Fail => 2,
        }
    }

    pub fn failures(&self) -> Vec<String> {
        self.verdicts
            .iter()
            .filter(|v| v.grade == Grade::Fail)
            .map(|v| format!("{}: {:e} {} {:e} (margin {:.3e})", v.name, v.lhs, v.relation.symbol(), v.rhs, v.margin))
            .collect()
    }
}

/// Rounded atomic trap frequency shown in a reference row.
const QUOTED_OMEGA_A: f64 = 5e6;
/// Nitrogen at room temperature, for the decoherence wavelength note.
const GAS_MASS: f64 = 28.0 * 1.660_539_066_60e-27;
const GAS_TEMPERATURE: f64 = 300.0;

/// Evaluates every design inequality of the scenario.
pub fn constraint_check(scenario: &PhysicalScenario) -> Result<FeasibilityReport> {
    scenario.validate()?;
    let k = &scenario.constants;
    let trap = &scenario.trap;
    let m_n = scenario.nanoparticle.mass;
    let m_a = scenario.atom.mass;
    let total = m_n + m_a;
    let w2 = trap.soft_freq;
    let dt = scenario.timing.free_fall;

    let at = atom_trap_frequency(k, &scenario.atom, trap)?;
    let tau_trap = trap_lifetime(k, &scenario.atom, trap)?;
    let tau_exp = scenario.timing.experiment_time(&scenario.beam);
    let derived = params::derive(scenario, w2)?;
    let omega_gg = raman_coupling(k, &scenario.atom, scenario.beam.intensity, trap.raman_detuning)?;
    let delta_x_beam = superposition_size(scenario, w2, scenario.beam.pulse_duration)?;
    let delta_x = scenario.superposition_size.unwrap_or(delta_x_beam);
    let phi_grav = gravitational_phase(k, total, delta_x, dt);
    let phi3 = -phi_grav * (w2 * dt) * (w2 * dt) / 6.0;

    let omega_upper = m_a / m_n * at.omega;
    let lambda = TAU / trap.raman_wavevector;
    let omega_lower = k.hbar / (2.0 * total * lambda * lambda);

    let mut verdicts = vec![
        Verdict::much_less("coupling: omega_2 << (m_a/m_n) omega_a", w2, omega_upper),
        Verdict::much_less("lamb-dicke: hbar/(2 m lambda^2) << omega_2", omega_lower, w2),
        Verdict::at_least("lifetime: tau_trap >~ tau_exp", tau_trap, tau_exp),
        Verdict::much_less("cubic: omega_2 dt << 1", w2 * dt, 1.0),
        Verdict::much_less("quench: omega_1 dt << 1", trap.stiff_freq * dt, 1.0),
        Verdict::much_less("free fall: F << m_n g_E", trap.radiation_force, m_n * k.g_e),
        Verdict::at_least("mass ratio: m_n/m_a >~ 1e6", m_n / m_a, MASS_RATIO_MIN),
        Verdict::much_less("coupling, omega_a read as Hz", w2, omega_upper * TAU).info(),
        Verdict::much_less("coupling, quoted omega_a = 5e6", w2, m_a / m_n * QUOTED_OMEGA_A).info(),
    ];
    if derived.lamb_dicke_marginal {
        verdicts.push(Verdict::much_less("lamb-dicke: eta << 1", derived.lamb_dicke, 1.0).info());
    }

    let gas_wavelength = TAU * k.hbar / (TAU * GAS_MASS * k.k_b * GAS_TEMPERATURE).sqrt();
    let mut notes = vec![format!(
        "thermal N2 wavelength at {GAS_TEMPERATURE} K is {gas_wavelength:.3e} m, {:.1e} times the superposition size",
        gas_wavelength / delta_x
    )];
    if derived.lamb_dicke_marginal {
        notes.push(format!("eta = {:.3} in the softened trap exceeds the marginal value 0.3", derived.lamb_dicke));
    }
    if derived.mass_ratio_low {
        notes.push("mass ratio below 1e6: O(m_a/m_n) terms are not negligible".into());
    }

    Ok(FeasibilityReport {
        omega_a: at.omega,
        trap_width: at.width,
        tau_trap,
        tau_exp,
        eta: derived.lamb_dicke,
        omega_gg,
        delta_x_beam,
        delta_x,
        phi_grav,
        phi3,
        omega_upper,
        omega_lower,
        verdicts,
        notes,
    })
}
