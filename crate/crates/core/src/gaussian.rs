//! Coherent-state algebra and closed-form evolutions of a single mode.
//!
//! Amplitudes are dimensionless mode amplitudes; every global phase is kept
//! in the branch `weight`.

use serde::{Deserialize, Serialize};

use crate::classical::{evolve_mode_exact, expi_minus_one, one_minus_sinc, Guard, GuardReport};
use crate::error::{require_positive, Result};
use crate::C64;

/// A coherent state |α⟩ carrying a complex prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "BranchRecord", into = "BranchRecord")]
pub struct CoherentBranch {
    pub alpha: C64,
    pub weight: C64,
}

#[derive(Serialize, Deserialize)]
struct BranchRecord {
    re_alpha: f64,
    im_alpha: f64,
    re_weight: f64,
    im_weight: f64,
}

impl From<BranchRecord> for CoherentBranch {
    fn from(r: BranchRecord) -> Self {
        CoherentBranch { alpha: C64::new(r.re_alpha, r.im_alpha), weight: C64::new(r.re_weight, r.im_weight) }
    }
}

impl From<CoherentBranch> for BranchRecord {
    fn from(b: CoherentBranch) -> Self {
        BranchRecord { re_alpha: b.alpha.re, im_alpha: b.alpha.im, re_weight: b.weight.re, im_weight: b.weight.im }
    }
}

impl CoherentBranch {
    pub fn new(alpha: C64) -> Self {
        CoherentBranch { alpha, weight: C64::new(1.0, 0.0) }
    }

    pub fn with_weight(alpha: C64, weight: C64) -> Self {
        CoherentBranch { alpha, weight }
    }

    /// Multiplies the weight by e^{iθ}.
    pub fn rotate_weight(self, theta: f64) -> Self {
        CoherentBranch { weight: self.weight * C64::from_polar(1.0, theta), ..self }
    }

    pub fn scale(self, c: C64) -> Self {
        CoherentBranch { weight: self.weight * c, ..self }
    }

    /// Applies D(β), including the composition phase.
    pub fn displace(self, beta: C64) -> Self {
        let (alpha, phase) = displace_compose(beta, self.alpha);
        CoherentBranch { alpha, weight: self.weight * C64::from_polar(1.0, phase) }
    }

    /// ⟨self|other⟩ including both weights.
    pub fn overlap(&self, other: &CoherentBranch) -> C64 {
        self.weight.conj() * other.weight * coherent_overlap(self.alpha, other.alpha)
    }
}

/// ⟨α|β⟩ = exp(−|α−β|²/2 + i Im(α*β)).
pub fn coherent_overlap(alpha: C64, beta: C64) -> C64 {
    let d = alpha - beta;
    C64::from_polar((-d.norm_sqr() / 2.0).exp(), (alpha.conj() * beta).im)
}

/// D(α)D(β) = e^{i·phase} D(α+β), phase = Im(αβ*).
pub fn displace_compose(alpha: C64, beta: C64) -> (C64, f64) {
    (alpha + beta, (alpha * beta.conj()).im)
}

/// Phases picked up by |α⟩ under ħωa†a + ħg(a + a†): the α-dependent part
/// δ·Im(α*(1 − e^{iωt})) and the α-independent part δ²(ωt − sin ωt), δ = g/ω.
pub fn displaced_oscillator_phases(alpha: C64, omega: f64, g: f64, t: f64) -> (f64, f64) {
    let u = omega * t;
    let delta = g / omega;
    let state = delta * (alpha.conj() * -expi_minus_one(u)).im;
    let global = delta * delta * u * one_minus_sinc(u);
    (state, global)
}

/// Exact evolution under ħωa†a + ħg(a + a†).
pub fn evolve_displaced_oscillator(branch: CoherentBranch, omega: f64, g: f64, t: f64) -> Result<CoherentBranch> {
    require_positive("omega", omega)?;
    let (state, global) = displaced_oscillator_phases(branch.alpha, omega, g, t);
    Ok(CoherentBranch {
        alpha: evolve_mode_exact(branch.alpha, omega, g, t),
        weight: branch.weight * C64::from_polar(1.0, state + global),
    })
}

/// Second-order evolved branch with its two phase factors kept apart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchExpansion {
    pub branch: CoherentBranch,
    /// −gt·Re α, the boost.
    pub boost_phase: f64,
    /// −ωgt²·Im α/2, the translation.
    pub translation_phase: f64,
    pub guard: GuardReport,
    /// Dynamical squeezing |z| neglected by the expansion (quench only).
    pub squeeze_modulus: f64,
}

/// Boost phase in physical units, −x m g_E t/(2ħ).
pub fn boost_phase_physical(x: f64, mass: f64, g_e: f64, t: f64, hbar: f64) -> f64 {
    -x * mass * g_e * t / (2.0 * hbar)
}

/// Translation phase in physical units, −p g_E t²/(4ħ).
pub fn translation_phase_physical(p: f64, g_e: f64, t: f64, hbar: f64) -> f64 {
    -p * g_e * t * t / (4.0 * hbar)
}

fn expansion_phases(alpha: C64, omega: f64, g: f64, t: f64) -> (f64, f64) {
    (-g * t * alpha.re, -omega * g * t * t * alpha.im / 2.0)
}

/// Second-order expansion of [`evolve_displaced_oscillator`] in ωt and gt.
pub fn quadratic_branch_expansion(branch: CoherentBranch, omega: f64, g: f64, t: f64, guard: Guard) -> BranchExpansion {
    let a = branch.alpha;
    let u = omega * t;
    let (boost, translation) = expansion_phases(a, omega, g, t);
    let alpha = a * C64::new(1.0 - u * u / 2.0, -u) + C64::new(-omega * g * t * t / 2.0, -g * t);
    BranchExpansion {
        branch: CoherentBranch { alpha, weight: branch.weight * C64::from_polar(1.0, boost + translation) },
        boost_phase: boost,
        translation_phase: translation,
        guard: guard.check(omega, g, t),
        squeeze_modulus: 0.0,
    }
}

/// Parameters of the exact quench propagator S(z)D(ε)R(φ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuenchParams {
    pub z: C64,
    pub eps: C64,
    pub phi: f64,
    /// ½ ln(ω₂/ω₁)
    pub r: f64,
}

impl QuenchParams {
    /// Image of a unit real displacement carried through the propagator,
    /// e^{iφ}cosh|z| + e^{−iφ}e^{iθ}sinh|z|.
    pub fn carried_displacement(&self) -> C64 {
        let m = self.z.norm();
        let theta = if m == 0.0 { 0.0 } else { self.z.arg() };
        C64::from_polar(m.cosh(), self.phi) + C64::from_polar(m.sinh(), theta - self.phi)
    }
}

/// Squeeze, displacement and rotation reproducing a sudden quench from ω₁
/// to ω₂ with equilibrium shift δ (in ω₂ units), after time t.
pub fn quench_params(omega1: f64, omega2: f64, delta: f64, t: f64) -> Result<QuenchParams> {
    require_positive("omega1", omega1)?;
    require_positive("omega2", omega2)?;
    let sum = omega1 + omega2;
    let tanh_r = (omega2 - omega1) / sum;
    let tau2 = tanh_r * tanh_r;
    let one_minus_tau2 = 4.0 * omega1 * omega2 / (sum * sum);
    let root = (omega1 * omega2).sqrt();
    let (cosh_r, sinh_r) = (sum / (2.0 * root), (omega2 - omega1) / (2.0 * root));
    let th = omega2 * t;

    let rhs = expi_minus_one(-2.0 * th) * tanh_r / (one_minus_tau2 - tau2 * expi_minus_one(-2.0 * th));
    let modulus = rhs.norm();
    let z = if modulus == 0.0 { C64::new(0.0, 0.0) } else { C64::from_polar(modulus.atanh(), rhs.arg()) };

    let q = one_minus_tau2 - tau2 * expi_minus_one(2.0 * th);
    let phi = q.arg() - th;
    let eps = C64::from_polar(delta, phi)
        * -expi_minus_one(th)
        * (cosh_r + C64::from_polar(sinh_r, -th));
    Ok(QuenchParams { z, eps, phi, r: 0.5 * (omega2 / omega1).ln() })
}

/// γ with S(z)D(ξ) = D(γ)S(z): γ = ξcosh|z| + ξ*e^{iθ}sinh|z|.
pub fn commute_squeeze_displacement(z: C64, xi: C64) -> C64 {
    let m = z.norm();
    if m == 0.0 {
        return xi;
    }
    xi * m.cosh() + xi.conj() * C64::from_polar(m.sinh(), z.arg())
}

/// Harmonic part α_h of the second-order quench evolution.
pub fn quench_harmonic_amplitude(alpha: C64, omega1: f64, omega2: f64, t: f64) -> C64 {
    let (w1, w2) = (omega1, omega2);
    let diag = C64::new(1.0 - w2 * w2 * t * t / 2.0, -t * (w1 * w1 + w2 * w2) / (2.0 * w1));
    let cross = C64::new(0.0, t * (w1 - w2) * (w1 + w2) / (2.0 * w1));
    alpha * diag + alpha.conj() * cross
}

/// Second-order evolution through the quench, squeezing neglected.
/// Amplitudes are in the ω₁ mode basis; `g2` is the gravitational coupling
/// of the ω₂ mode.
pub fn evolve_quench(branch: CoherentBranch, omega1: f64, omega2: f64, g2: f64, t: f64, guard: Guard) -> Result<BranchExpansion> {
    require_positive("omega1", omega1)?;
    require_positive("omega2", omega2)?;
    let g1 = (omega2 / omega1).sqrt() * g2;
    let a = branch.alpha;
    let (boost, translation) = expansion_phases(a, omega1, g1, t);
    let alpha = quench_harmonic_amplitude(a, omega1, omega2, t) + C64::new(-omega1 * g1 * t * t / 2.0, -g1 * t);
    let report = guard.check(omega1, g1, t);
    let squeeze_modulus = quench_params(omega1, omega2, 0.0, t)?.z.norm();
    if !report.within {
        log::warn!("quench expansion outside its guard; neglected squeezing |z| = {squeeze_modulus:.3e}");
    }
    Ok(BranchExpansion {
        branch: CoherentBranch { alpha, weight: branch.weight * C64::from_polar(1.0, boost + translation) },
        boost_phase: boost,
        translation_phase: translation,
        guard: report,
        squeeze_modulus,
    })
}

/// Leading gravitational phase gtβ and its cubic correction −gω₂²t³β/6,
/// for a quadrature separation β.
pub fn branch_phase_difference(beta: f64, g: f64, t: f64, omega2: f64) -> (f64, f64) {
    let lead = g * t * beta;
    (lead, -lead * (omega2 * t) * (omega2 * t) / 6.0)
}
