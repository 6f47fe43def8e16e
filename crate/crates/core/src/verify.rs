//! Closed forms checked against the Fock-space and ODE oracles.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::classical::{self, Frame, PhaseSpacePoint, TrapSpec};
use crate::error::Result;
use crate::fock::{self, FockVector, Gate};
use crate::gaussian::{self, CoherentBranch};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Fewer sample times and no doubled-dimension rerun.
    pub quick: bool,
    /// Fock dimension for the small-amplitude checks.
    pub dim: usize,
    /// Test fixture: evaluate the expansion with the boost phase negated.
    pub flip_boost_sign: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { quick: false, dim: 60, flip_boost_sign: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub seconds: f64,
}

impl Check {
    fn new(name: &str, measured: f64, tolerance: f64, started: Instant) -> Self {
        Check { name: name.into(), measured, tolerance, passed: measured < tolerance, seconds: started.elapsed().as_secs_f64() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn branch_to_fock(b: &CoherentBranch, dim: usize) -> Result<FockVector> {
    Ok(fock::coherent_to_fock(b.alpha, dim)?.scale(b.weight))
}

/// Infidelity and phase of ⟨closed|oracle⟩ for the displaced oscillator.
pub fn displaced_oscillator_agreement(alpha: C64, omega: f64, g: f64, t: f64, dim: usize) -> Result<(f64, f64)> {
    let closed = gaussian::evolve_displaced_oscillator(CoherentBranch::new(alpha), omega, g, t)?;
    let h = fock::displaced_oscillator_hamiltonian(dim, omega, g);
    let oracle = fock::evolve_schrodinger(&fock::coherent_to_fock(alpha, dim)?, &h, t, 1)?;
    let ov = branch_to_fock(&closed, dim)?.overlap(&oracle);
    Ok((1.0 - ov.norm_sqr(), ov.arg()))
}

/// Propagator e^{−iHt} of the quench Hamiltonian as S(z)D(ε)R(φ), up to a
/// global phase. `g1` is the coupling of the ω₁ mode.
pub fn quench_decomposition(alpha: C64, omega1: f64, omega2: f64, g1: f64, t: f64, dim: usize) -> Result<FockVector> {
    let delta = (omega1 / omega2).sqrt() * g1 / omega2;
    let q = gaussian::quench_params(omega1, omega2, delta, t)?;
    let psi = fock::coherent_to_fock(alpha, dim)?;
    let psi = fock::apply_gate(&psi, Gate::Rotate(q.phi))?;
    let psi = fock::apply_gate(&psi, Gate::Displace(q.eps))?;
    fock::apply_gate(&psi, Gate::Squeeze(q.z))
}

pub fn quench_oracle(alpha: C64, omega1: f64, omega2: f64, g1: f64, t: f64, dim: usize) -> Result<FockVector> {
    let h = fock::quench_hamiltonian(dim, omega1, omega2, g1);
    fock::evolve_schrodinger(&fock::coherent_to_fock(alpha, dim)?, &h, t, 1)
}

/// ‖S(z)D(ξ)|0⟩ − D(γ)S(z)|0⟩‖.
pub fn commutation_residual(z: C64, xi: C64, dim: usize) -> Result<f64> {
    let vac = FockVector::vacuum(dim);
    let lhs = fock::apply_gate(&fock::apply_gate(&vac, Gate::Displace(xi))?, Gate::Squeeze(z))?;
    let gamma = gaussian::commute_squeeze_displacement(z, xi);
    let rhs = fock::apply_gate(&fock::apply_gate(&vac, Gate::Squeeze(z))?, Gate::Displace(gamma))?;
    Ok((lhs.amps - rhs.amps).norm())
}

/// Error of the second-order phases (boost + translation) against the
/// state phase read off the Fock evolution.
fn boost_phase_error(opts: &VerifyOptions) -> Result<f64> {
    let (alpha, omega, g, t) = (C64::new(1.0, 0.5), 1.0, 0.1, 1e-3);
    let dim = opts.dim;
    let e = gaussian::quadratic_branch_expansion(CoherentBranch::new(alpha), omega, g, t, classical::Guard::default());
    let boost = if opts.flip_boost_sign { -e.boost_phase } else { e.boost_phase };
    let h = fock::displaced_oscillator_hamiltonian(dim, omega, g);
    let oracle = fock::evolve_schrodinger(&fock::coherent_to_fock(alpha, dim)?, &h, t, 1)?;
    let exact_alpha = classical::evolve_mode_exact(alpha, omega, g, t);
    let (_, global) = gaussian::displaced_oscillator_phases(alpha, omega, g, t);
    let state_phase = fock::coherent_to_fock(exact_alpha, dim)?.overlap(&oracle).arg() - global;
    Ok((state_phase - (boost + e.translation_phase)).abs())
}

fn classical_error() -> Result<f64> {
    let (m, w, g_e) = (1.0, 2.0, 9.81);
    let s0 = PhaseSpacePoint { x: 0.3, p: -0.2, frame: Frame::Frame1 };
    let t = classical::period(w);
    let exact = classical::evolve_harmonic_gravity(s0, m, w, g_e, t)?;
    let num = classical::ode_oracle(s0, TrapSpec::HarmonicGravity { mass: m, omega: w, g_e }, t, t / 20_000.0)?;
    let scale = exact.x.abs().max(exact.p.abs() / (m * w));
    Ok(((num.x - exact.x).abs()).max((num.p - exact.p).abs() / (m * w)) / scale)
}

fn free_fall_error() -> Result<f64> {
    let (m, g_e, t) = (2.0, 9.81, 1.7);
    let s0 = PhaseSpacePoint { x: 0.1, p: 0.4, frame: Frame::Frame1 };
    let exact = classical::evolve_free_fall(s0, m, g_e, t);
    let num = classical::ode_oracle(s0, TrapSpec::FreeFall { mass: m, g_e }, t, t / 100.0)?;
    Ok((num.x - exact.x).abs().max((num.p - exact.p).abs()))
}

/// Runs the suite. Checks never short-circuit; an oracle error is reported
/// as a failed check with an infinite measurement.
pub fn run_verify(opts: &VerifyOptions) -> VerifyReport {
    let mut checks = Vec::new();
    let mut record = |name: &str, tol: f64, f: &mut dyn FnMut() -> Result<f64>| {
        let start = Instant::now();
        let measured = f().unwrap_or_else(|e| {
            log::error!("{name}: {e}");
            f64::INFINITY
        });
        checks.push(Check::new(name, measured, tol, start));
    };
    let times: &[f64] = if opts.quick { &[0.3] } else { &[0.1, 0.2, 0.3, 0.4, 0.5] };
    let (alpha, omega, g) = (C64::new(1.0, 0.0), 1.0, 0.1);
    let dim = opts.dim;

    record("displaced oscillator infidelity", 1e-8, &mut || {
        times.iter().try_fold(0.0f64, |m, &t| Ok(m.max(displaced_oscillator_agreement(alpha, omega, g, t, dim)?.0)))
    });
    record("displaced oscillator global phase", 1e-6, &mut || {
        times.iter().try_fold(0.0f64, |m, &t| Ok(m.max(displaced_oscillator_agreement(alpha, omega, g, t, dim)?.1.abs())))
    });
    if !opts.quick {
        record("displaced oscillator N -> 2N", 1e-9, &mut || {
            times.iter().try_fold(0.0f64, |m, &t| {
                let a = displaced_oscillator_agreement(alpha, omega, g, t, dim)?.0;
                let b = displaced_oscillator_agreement(alpha, omega, g, t, 2 * dim)?.0;
                Ok(m.max((a - b).abs()))
            })
        });
    }
    record("boost and translation phase", 1e-8, &mut || boost_phase_error(opts));
    record("classical RK4 one period", 1e-9, &mut classical_error);
    record("free-fall limit", 1e-12, &mut free_fall_error);

    let quench_times: &[f64] = if opts.quick { &[0.05] } else { &[0.01, 0.03, 0.05] };
    let (w1, w2, g1) = (1.0, 0.25, 0.3);
    let qa = C64::new(0.5, -0.3);
    let qdim = 2 * dim;
    record("quench decomposition infidelity", 1e-6, &mut || {
        quench_times.iter().try_fold(0.0f64, |m, &t| {
            let d = quench_decomposition(qa, w1, w2, g1, t, qdim)?;
            let o = quench_oracle(qa, w1, w2, g1, t, qdim)?;
            Ok(m.max(1.0 - d.fidelity(&o)))
        })
    });
    record("squeeze-displacement commutation", 1e-7, &mut || commutation_residual(C64::new(0.0, 0.2), C64::new(1.0, 0.0), 80));
    record("quench expansion mean", 1e-5, &mut || {
        let t = 0.01;
        let o = quench_oracle(qa, w1, w2, g1, t, qdim)?;
        let mean = o.expectation(&fock::annihilation(qdim));
        let g2 = (w1 / w2).sqrt() * g1;
        let e = gaussian::evolve_quench(CoherentBranch::new(qa), w1, w2, g2, t, classical::Guard::default())?;
        Ok((mean - e.branch.alpha).norm())
    });
    VerifyReport { checks }
}
