//! Physical constants, experiment parameter records and derived quantities.
//!
//! Every frequency is stored in rad/s. Conversion from Hz happens once, in
//! [`config`], when a scenario is read from JSON.

pub mod config;

use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Error, Result};

/// Mass ratio m_n/m_a below which the heavy-nanoparticle approximation is
/// flagged.
pub const MASS_RATIO_MIN: f64 = 1e6;

/// Lamb-Dicke parameters above this are flagged as marginal.
pub const LAMB_DICKE_MARGINAL: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Speed of light, m/s.
    pub c: f64,
    /// Gravitational acceleration, m/s².
    pub g_e: f64,
    /// Vacuum permittivity, F/m.
    pub eps0: f64,
    /// Elementary charge, C.
    pub q_e: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
}

impl PhysicalConstants {
    /// CODATA 2018 exact/recommended values with standard gravity.
    pub const SI: PhysicalConstants = PhysicalConstants {
        hbar: 1.054_571_817e-34,
        c: 299_792_458.0,
        g_e: 9.806_65,
        eps0: 8.854_187_812_8e-12,
        q_e: 1.602_176_634e-19,
        k_b: 1.380_649e-23,
    };

    /// Same constants with a different local gravitational acceleration.
    pub fn with_gravity(self, g_e: f64) -> Self {
        PhysicalConstants { g_e, ..self }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::SI
    }
}

/// Trapped atom and the optical transition used for trapping and Raman
/// coupling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    /// kg
    pub mass: f64,
    /// Electronic transition angular frequency ω_e, rad/s.
    pub transition_freq: f64,
    /// Excited-state decay rate Γ, rad/s.
    pub linewidth: f64,
    /// Transition dipole matrix element q·D, C·m.
    pub dipole_moment: f64,
}

impl AtomSpec {
    /// Caesium D2 line (852.35 nm) with the rounded values quoted for the
    /// tabletop estimate.
    pub fn cesium_d2() -> Self {
        const AMU: f64 = 1.660_539_066_60e-27;
        AtomSpec {
            mass: 132.905_451_961 * AMU,
            transition_freq: 2.0 * std::f64::consts::PI * PhysicalConstants::SI.c / 852.347e-9,
            linewidth: 3e7,
            dipole_moment: 4e-29,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("atom.mass", self.mass)?;
        require_positive("atom.linewidth", self.linewidth)?;
        require_positive("atom.transition_freq", self.transition_freq)?;
        require_positive("atom.dipole_moment", self.dipole_moment)?;
        if self.transition_freq <= self.linewidth {
            return Err(Error::domain(
                "atom.transition_freq",
                "transition frequency must exceed the linewidth",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NanoparticleSpec {
    /// m
    pub radius: f64,
    /// kg
    pub mass: f64,
}

impl NanoparticleSpec {
    pub fn validate(&self) -> Result<()> {
        require_positive("nanoparticle.radius", self.radius)?;
        require_positive("nanoparticle.mass", self.mass)
    }
}

/// Paul trap, dipole trap and Raman beam geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapConfig {
    /// Stiff Paul-trap frequency ω_1, rad/s.
    pub stiff_freq: f64,
    /// Softened Paul-trap frequency ω_2, rad/s.
    pub soft_freq: f64,
    /// Dipole-trap laser wavelength λ_l, m.
    pub wavelength: f64,
    /// Backscattered intensity at the atom, W/m².
    pub intensity: f64,
    /// Dipole-trap detuning Δ, rad/s (positive means red-detuned).
    pub detuning: f64,
    /// Dipole-trap width w, m. `None` means λ_l/2.
    pub width: Option<f64>,
    /// Raman detuning from the auxiliary level Δ_3, rad/s.
    pub raman_detuning: f64,
    /// Effective Raman wavevector δk along the vertical, rad/m.
    pub raman_wavevector: f64,
    /// Nanoparticle-atom separation d, m.
    pub separation: f64,
    /// Radiation-pressure force during the free-fall window, N.
    pub radiation_force: f64,
}

impl TrapConfig {
    pub fn trap_width(&self) -> f64 {
        self.width.unwrap_or(self.wavelength / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("trap.stiff_freq", self.stiff_freq)?;
        require_positive("trap.soft_freq", self.soft_freq)?;
        require_positive("trap.wavelength", self.wavelength)?;
        require_positive("trap.intensity", self.intensity)?;
        require_positive("trap.raman_detuning", self.raman_detuning)?;
        require_positive("trap.raman_wavevector", self.raman_wavevector)?;
        if let Some(w) = self.width {
            require_positive("trap.width", w)?;
        }
        if !self.detuning.is_finite() {
            return Err(Error::domain("trap.detuning", "must be finite"));
        }
        if !(self.radiation_force.is_finite() && self.radiation_force >= 0.0) {
            return Err(Error::domain("trap.radiation_force", "must be finite and >= 0"));
        }
        if self.soft_freq >= self.stiff_freq {
            return Err(Error::domain(
                "trap.soft_freq",
                "softened frequency must be below the stiff frequency",
            ));
        }
        Ok(())
    }
}

/// Raman displacement beam.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamConfig {
    /// W/m²
    pub intensity: f64,
    /// Pulse duration δt, s.
    pub pulse_duration: f64,
    /// Constant optical phase carried by pulses, rad (includes d/λ).
    pub laser_phase: f64,
}

impl BeamConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.intensity.is_finite() && self.intensity >= 0.0) {
            return Err(Error::domain("beam.intensity", "must be finite and >= 0"));
        }
        if !(self.pulse_duration.is_finite() && self.pulse_duration >= 0.0) {
            return Err(Error::domain("beam.pulse_duration", "must be finite and >= 0"));
        }
        if !self.laser_phase.is_finite() {
            return Err(Error::domain("beam.laser_phase", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    /// Free-fall duration Δt, s.
    pub free_fall: f64,
    /// Stiff-trap dwell before release, s.
    pub hold: f64,
}

impl Timing {
    pub fn validate(&self) -> Result<()> {
        require_positive("timing.free_fall", self.free_fall)?;
        if !(self.hold.is_finite() && self.hold >= 0.0) {
            return Err(Error::domain("timing.hold", "must be finite and >= 0"));
        }
        Ok(())
    }

    /// Total time the atom must stay trapped.
    pub fn experiment_time(&self, beam: &BeamConfig) -> f64 {
        self.hold + self.free_fall + 2.0 * beam.pulse_duration
    }
}

/// Complete parameter record of one experimental configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalScenario {
    pub constants: PhysicalConstants,
    pub atom: AtomSpec,
    pub nanoparticle: NanoparticleSpec,
    pub trap: TrapConfig,
    pub beam: BeamConfig,
    pub timing: Timing,
    /// Branch separation to use instead of the beam-derived value, m.
    pub superposition_size: Option<f64>,
}

impl PhysicalScenario {
    pub fn validate(&self) -> Result<()> {
        let k = &self.constants;
        for (name, v) in [("constants.hbar", k.hbar), ("constants.c", k.c), ("constants.eps0", k.eps0), ("constants.q_e", k.q_e), ("constants.k_b", k.k_b)] {
            require_positive(name, v)?;
        }
        if !(k.g_e.is_finite() && k.g_e >= 0.0) {
            return Err(Error::domain("constants.g_e", "must be finite and >= 0"));
        }
        self.atom.validate()?;
        self.nanoparticle.validate()?;
        self.trap.validate()?;
        self.beam.validate()?;
        self.timing.validate()?;
        if let Some(dx) = self.superposition_size {
            if !(dx.is_finite() && dx >= 0.0) {
                return Err(Error::domain("superposition_size", "must be finite and >= 0"));
            }
        }
        Ok(())
    }

    /// Nanoparticle-to-atom mass ratio.
    pub fn mass_ratio(&self) -> f64 {
        self.nanoparticle.mass / self.atom.mass
    }
}

/// Quantities that follow from a scenario at a chosen Paul-trap frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedQuantities {
    /// Trap frequency the record was evaluated at, rad/s.
    pub trap_freq: f64,
    /// Centre-of-mass zero-point motion δ_R, m.
    pub zpm_com: f64,
    /// Relative-motion zero-point motion δ_r, m.
    pub zpm_rel: f64,
    /// Total mass M, kg.
    pub total_mass: f64,
    /// Reduced mass μ, kg.
    pub reduced_mass: f64,
    /// Atomic trap frequency used for δ_r, rad/s.
    pub atom_trap_freq: f64,
    /// η = k δ_R.
    pub lamb_dicke: f64,
    /// Gravitational coupling g of the centre-of-mass mode, rad/s.
    pub grav_coupling: f64,
    /// Raman wavevector k, rad/m.
    pub wavevector: f64,
    /// m_n/m_a is below [`MASS_RATIO_MIN`].
    pub mass_ratio_low: bool,
    /// η exceeds [`LAMB_DICKE_MARGINAL`].
    pub lamb_dicke_marginal: bool,
}

/// Position zero-point motion sqrt(ħ/(2mω)).
pub fn zero_point_position(hbar: f64, mass: f64, omega: f64) -> f64 {
    (hbar / mass / omega / 2.0).sqrt()
}

/// Momentum zero-point spread sqrt(ħmω/2).
pub fn zero_point_momentum(hbar: f64, mass: f64, omega: f64) -> f64 {
    (hbar * mass * omega / 2.0).sqrt()
}

/// g = g_E sqrt(m/(2ħω)): gravity in units of the mode's quantum, rad/s.
pub fn gravitational_coupling(hbar: f64, mass: f64, omega: f64, g_e: f64) -> f64 {
    g_e * ((mass / omega) / (2.0 * hbar)).sqrt()
}

/// Evaluates [`DerivedQuantities`] for `scenario` with the Paul trap at
/// `omega_n`.
pub fn derive(scenario: &PhysicalScenario, omega_n: f64) -> Result<DerivedQuantities> {
    require_positive("omega_n", omega_n)?;
    require_positive("nanoparticle.mass", scenario.nanoparticle.mass)?;
    require_positive("atom.mass", scenario.atom.mass)?;
    let hbar = scenario.constants.hbar;
    let m_n = scenario.nanoparticle.mass;
    let m_a = scenario.atom.mass;
    let total_mass = m_n + m_a;
    let reduced_mass = m_a * (m_n / total_mass);
    let atom_trap_freq = crate::feasibility::atom_trap_frequency(&scenario.constants, &scenario.atom, &scenario.trap)?.omega;
    let zpm_com = zero_point_position(hbar, total_mass, omega_n);
    let zpm_rel = zero_point_position(hbar, reduced_mass, atom_trap_freq);
    let wavevector = scenario.trap.raman_wavevector;
    let lamb_dicke = wavevector * zpm_com;
    Ok(DerivedQuantities {
        trap_freq: omega_n,
        zpm_com,
        zpm_rel,
        total_mass,
        reduced_mass,
        atom_trap_freq,
        lamb_dicke,
        grav_coupling: gravitational_coupling(hbar, total_mass, omega_n, scenario.constants.g_e),
        wavevector,
        mass_ratio_low: m_n / m_a < MASS_RATIO_MIN,
        lamb_dicke_marginal: lamb_dicke > LAMB_DICKE_MARGINAL,
    })
}
