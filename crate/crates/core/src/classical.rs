//! Classical trajectories in a trap with gravity, their limits, an RK4
//! oracle and semiclassical action phases.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::config::TransientConfig;
use crate::C64;

/// Reference frame of a phase-space point. Frame 2 is shifted by g_E/ω²
/// so that gravity disappears from the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Frame {
    Frame1,
    Frame2,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpacePoint {
    /// m
    pub x: f64,
    /// kg·m/s
    pub p: f64,
    pub frame: Frame,
}

impl PhaseSpacePoint {
    pub fn frame1(x: f64, p: f64) -> Self {
        PhaseSpacePoint { x, p, frame: Frame::Frame1 }
    }

    pub fn frame2(x: f64, p: f64) -> Self {
        PhaseSpacePoint { x, p, frame: Frame::Frame2 }
    }

    /// Re-expresses the point in `frame` for a trap of frequency `omega`.
    pub fn to_frame(self, frame: Frame, g_e: f64, omega: f64) -> Self {
        let shift = g_e / (omega * omega);
        match (self.frame, frame) {
            (Frame::Frame1, Frame::Frame2) => PhaseSpacePoint::frame2(self.x + shift, self.p),
            (Frame::Frame2, Frame::Frame1) => PhaseSpacePoint::frame1(self.x - shift, self.p),
            _ => self,
        }
    }

    pub fn adimensional(self, hbar: f64, mass: f64, omega: f64) -> AdimensionalPoint {
        AdimensionalPoint {
            x: self.x / crate::params::zero_point_position(hbar, mass, omega),
            p: self.p / crate::params::zero_point_momentum(hbar, mass, omega),
        }
    }
}

/// X = x/δ_x, P = p/δ_p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdimensionalPoint {
    pub x: f64,
    pub p: f64,
}

impl AdimensionalPoint {
    /// Mode amplitude a = (X + iP)/2.
    pub fn mode(self) -> C64 {
        C64::new(self.x, self.p) / 2.0
    }
}

/// 1 − cos(u), without cancellation for small u.
pub fn one_minus_cos(u: f64) -> f64 {
    let s = (u / 2.0).sin();
    2.0 * s * s
}

/// 1 − sin(u)/u, without cancellation for small u.
pub fn one_minus_sinc(u: f64) -> f64 {
    if u.abs() < 1e-2 {
        let u2 = u * u;
        u2 / 6.0 * (1.0 - u2 / 20.0 * (1.0 - u2 / 42.0 * (1.0 - u2 / 72.0)))
    } else {
        1.0 - u.sin() / u
    }
}

/// e^{iu} − 1, without cancellation for small u.
pub fn expi_minus_one(u: f64) -> C64 {
    C64::new(-one_minus_cos(u), u.sin())
}

/// Harmonic motion about the origin of the frame the point is in.
pub fn evolve_harmonic(s0: PhaseSpacePoint, mass: f64, omega: f64, t: f64) -> PhaseSpacePoint {
    let (s, c) = (omega * t).sin_cos();
    PhaseSpacePoint {
        x: s0.x * c + s0.p / (mass * omega) * s,
        p: -mass * omega * s0.x * s + s0.p * c,
        frame: s0.frame,
    }
}

/// Exact motion in a harmonic trap with gravity, Frame 1.
pub fn evolve_harmonic_gravity(s0: PhaseSpacePoint, mass: f64, omega: f64, g_e: f64, t: f64) -> Result<PhaseSpacePoint> {
    if !(omega > 0.0) {
        return Err(Error::domain("omega", "must be > 0; use evolve_free_fall for omega = 0"));
    }
    if s0.frame != Frame::Frame1 {
        return Err(Error::domain("s0.frame", "expected Frame1"));
    }
    let h = evolve_harmonic(s0, mass, omega, t);
    let u = omega * t;
    Ok(PhaseSpacePoint::frame1(
        h.x - g_e / (omega * omega) * one_minus_cos(u),
        h.p - mass * g_e / omega * u.sin(),
    ))
}

pub fn evolve_free_fall(s0: PhaseSpacePoint, mass: f64, g_e: f64, t: f64) -> PhaseSpacePoint {
    PhaseSpacePoint {
        x: s0.x + s0.p / mass * t - g_e * t * t / 2.0,
        p: s0.p - mass * g_e * t,
        frame: s0.frame,
    }
}

/// Small-parameter guard for second-order expansions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Guard {
    pub max_omega_t: f64,
}

impl Default for Guard {
    fn default() -> Self {
        Guard { max_omega_t: 0.1 }
    }
}

/// Expansion parameters seen by a guarded call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuardReport {
    pub omega_t: f64,
    pub g_t: f64,
    pub within: bool,
}

impl Guard {
    pub fn check(&self, omega: f64, g: f64, t: f64) -> GuardReport {
        let omega_t = (omega * t).abs();
        let within = omega_t < self.max_omega_t;
        if !within {
            log::warn!("expansion guard exceeded: |omega t| = {omega_t:.3e} >= {}", self.max_omega_t);
        }
        GuardReport { omega_t, g_t: (g * t).abs(), within }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeExpansion {
    /// Second-order amplitude.
    pub value: C64,
    /// Closed form a(0)e^{−iωt} + (g/ω)(e^{−iωt} − 1).
    pub exact: C64,
    pub guard: GuardReport,
}

/// Exact adimensional mode amplitude under harmonic motion with gravity.
pub fn evolve_mode_exact(a0: C64, omega: f64, g: f64, t: f64) -> C64 {
    let u = omega * t;
    let rot = C64::from_polar(1.0, -u);
    // (g/ω)(e^{−iu} − 1) with both parts kept accurate at small u
    let shift = C64::new(-g / omega * one_minus_cos(u), -g / omega * u.sin());
    a0 * rot + shift
}

/// Quadratic-order amplitude a0(1 − iωt − ω²t²/2) − igt − ωgt²/2.
pub fn evolve_mode_quadratic(a0: C64, omega: f64, g: f64, t: f64, guard: Guard) -> ModeExpansion {
    let u = omega * t;
    let value = a0 * C64::new(1.0 - u * u / 2.0, -u) + C64::new(-omega * g * t * t / 2.0, -g * t);
    ModeExpansion { value, exact: evolve_mode_exact(a0, omega, g, t), guard: guard.check(omega, g, t) }
}

/// Hamiltonians the RK4 oracle can integrate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TrapSpec {
    HarmonicGravity { mass: f64, omega: f64, g_e: f64 },
    FreeFall { mass: f64, g_e: f64 },
    /// ω_1 without gravity for t ≤ 0; ω_2 with gravity for t > 0.
    Quench { mass: f64, omega1: f64, omega2: f64, g_e: f64 },
}

impl TrapSpec {
    fn max_omega(&self) -> f64 {
        match *self {
            TrapSpec::HarmonicGravity { omega, .. } => omega,
            TrapSpec::FreeFall { .. } => 0.0,
            TrapSpec::Quench { omega1, omega2, .. } => omega1.max(omega2),
        }
    }

    /// (mass, ω, g_E) in force during a segment; `after` selects t > 0 for
    /// the quench.
    fn regime(&self, after: bool) -> (f64, f64, f64) {
        match *self {
            TrapSpec::HarmonicGravity { mass, omega, g_e } => (mass, omega, g_e),
            TrapSpec::FreeFall { mass, g_e } => (mass, 0.0, g_e),
            TrapSpec::Quench { mass, omega1, omega2, g_e } => {
                if after {
                    (mass, omega2, g_e)
                } else {
                    (mass, omega1, 0.0)
                }
            }
        }
    }
}

fn rk4_segment(x: f64, p: f64, (m, w, g): (f64, f64, f64), duration: f64, dt: f64) -> (f64, f64) {
    if duration == 0.0 {
        return (x, p);
    }
    let n = (duration.abs() / dt).ceil().max(1.0) as u64;
    let h = duration / n as f64;
    let f = |x: f64, p: f64| (p / m, -m * w * w * x - m * g);
    let (mut x, mut p) = (x, p);
    for _ in 0..n {
        let (k1x, k1p) = f(x, p);
        let (k2x, k2p) = f(x + h / 2.0 * k1x, p + h / 2.0 * k1p);
        let (k3x, k3p) = f(x + h / 2.0 * k2x, p + h / 2.0 * k2p);
        let (k4x, k4p) = f(x + h * k3x, p + h * k3p);
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    (x, p)
}

/// Fixed-step RK4 integration of Hamilton's equations from `t_start` to
/// `t_end`. Steps never straddle the quench switch at t = 0.
pub fn ode_integrate(s0: PhaseSpacePoint, spec: TrapSpec, t_start: f64, t_end: f64, dt: f64) -> Result<PhaseSpacePoint> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::StepSize { dt, max: f64::INFINITY });
    }
    let w = spec.max_omega();
    if w > 0.0 {
        let max = TAU / (50.0 * w);
        if dt >= max {
            return Err(Error::StepSize { dt, max });
        }
    }
    let (x, p) = match spec {
        TrapSpec::Quench { .. } if t_start < 0.0 && t_end > 0.0 => {
            let (x, p) = rk4_segment(s0.x, s0.p, spec.regime(false), -t_start, dt);
            rk4_segment(x, p, spec.regime(true), t_end, dt)
        }
        TrapSpec::Quench { .. } if t_start > 0.0 && t_end < 0.0 => {
            let (x, p) = rk4_segment(s0.x, s0.p, spec.regime(true), -t_start, dt);
            rk4_segment(x, p, spec.regime(false), t_end, dt)
        }
        _ => {
            let after = t_start.max(t_end) > 0.0;
            rk4_segment(s0.x, s0.p, spec.regime(after), t_end - t_start, dt)
        }
    };
    Ok(PhaseSpacePoint { x, p, frame: s0.frame })
}

/// RK4 evolution from t = 0 to `t`.
pub fn ode_oracle(s0: PhaseSpacePoint, spec: TrapSpec, t: f64, dt: f64) -> Result<PhaseSpacePoint> {
    ode_integrate(s0, spec, 0.0, t, dt)
}

/// Classical action ∫(T − V)dt/ħ along the Frame-2 harmonic trajectory.
pub fn action_phase(s0: PhaseSpacePoint, mass: f64, omega: f64, t: f64, hbar: f64) -> Result<f64> {
    if s0.frame != Frame::Frame2 {
        return Err(Error::domain("s0.frame", "expected Frame2"));
    }
    let (x, p) = (s0.x, s0.p);
    let mw = mass * omega;
    let s = (omega * t).sin();
    Ok((2.0 * omega * t).sin() * (p - mw * x) * (p + mw * x) / (4.0 * mw * hbar) - p * x / hbar * s * s)
}

/// Phase difference between branches at heights x20 + Δx and x20 after
/// harmonic evolution for `t`.
pub fn phase_difference_harmonic(x20: f64, p20: f64, dx: f64, mass: f64, omega: f64, t: f64, hbar: f64) -> f64 {
    let s = (omega * t).sin();
    dx * mass * omega * (dx + 2.0 * x20) / (4.0 * hbar) * (2.0 * omega * t).sin() + dx * p20 / hbar * s * s
}

/// Leading free-fall phase difference m g_E Δx t/ħ.
pub fn phase_difference_freefall(dx: f64, mass: f64, g_e: f64, t: f64, hbar: f64) -> f64 {
    mass * g_e * dx * t / hbar
}

/// (Δφ_grav − Δφ_harmonic)/Δφ_grav with Δφ_grav = Δx x20 mω²t/ħ, evaluated
/// without cancellation. Zero at t = 0.
pub fn transient_relative_error(x20: f64, p20: f64, dx: f64, mass: f64, omega: f64, t: f64, hbar: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let u = 2.0 * omega * t;
    let sinc = 1.0 - one_minus_sinc(u);
    let grav = dx * x20 * mass * omega * omega * t / hbar;
    let s = (omega * t).sin();
    one_minus_sinc(u) - dx / (2.0 * x20) * sinc - dx * p20 / hbar * s * s / grav
}

/// Number of strict interior local maxima of a sampled curve.
pub fn count_oscillations(values: &[f64]) -> usize {
    values.windows(3).filter(|w| w[1] > w[0] && w[1] >= w[2]).count()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransientSample {
    pub t: f64,
    /// Frame-2 harmonic trajectory of the lower branch.
    pub x_harmonic: f64,
    pub p_harmonic: f64,
    /// Free-fall trajectory from the same initial point, Frame 2.
    pub x_freefall: f64,
    pub p_freefall: f64,
    pub dphi_harmonic: f64,
    pub dphi_grav: f64,
    pub rel_error: f64,
}

/// Oscillation period t_f = 2π/ω.
pub fn period(omega: f64) -> f64 {
    TAU / omega
}

/// Samples both phase-difference curves over one trap period.
pub fn transient_curve(cfg: &TransientConfig, hbar: f64) -> Result<Vec<TransientSample>> {
    if cfg.x2_initial == 0.0 {
        return Err(Error::domain("transient.x2_initial_m", "must be nonzero"));
    }
    if cfg.points < 2 {
        return Err(Error::domain("transient.points", "need at least 2"));
    }
    let (m, w, dx) = (cfg.mass, cfg.omega, cfg.superposition_size);
    let tf = period(w);
    let s0 = PhaseSpacePoint::frame2(cfg.x2_initial, cfg.p2_initial);
    // free fall runs in Frame 1 with gravity g_eff = x20 ω², matching Δφ_grav
    let g_eff = cfg.x2_initial * w * w;
    let s0_f1 = s0.to_frame(Frame::Frame1, g_eff, w);
    let n = cfg.points;
    Ok((0..n)
        .map(|i| {
            let t = tf * i as f64 / (n - 1) as f64;
            let h = evolve_harmonic(s0, m, w, t);
            let f = evolve_free_fall(s0_f1, m, g_eff, t).to_frame(Frame::Frame2, g_eff, w);
            TransientSample {
                t,
                x_harmonic: h.x,
                p_harmonic: h.p,
                x_freefall: f.x,
                p_freefall: f.p,
                dphi_harmonic: phase_difference_harmonic(cfg.x2_initial, cfg.p2_initial, dx, m, w, t, hbar),
                dphi_grav: phase_difference_freefall(dx, m, g_eff, t, hbar),
                rel_error: transient_relative_error(cfg.x2_initial, cfg.p2_initial, dx, m, w, t, hbar),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const HBAR: f64 = 1.054_571_817e-34;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn full_period_from_rest_closes() {
        let w = 5e-6;
        let s = evolve_harmonic_gravity(PhaseSpacePoint::frame1(0.0, 0.0), 1e-15, w, 9.81, TAU / w).unwrap();
        // one_minus_cos(2π) is exactly representable as a tiny number
        assert!(s.x.abs() < 1e-20 * 9.81 / (w * w));
        assert!(s.p.abs() < 1e-12 * 1e-15 * 9.81 / w);
    }

    #[test]
    fn short_time_drop_is_five_picometres() {
        let s = evolve_harmonic_gravity(PhaseSpacePoint::frame1(0.0, 0.0), 1e-15, 5e-6, 9.81, 1e-6).unwrap();
        assert!(close(s.x, -4.905e-12, 1e-9), "x = {:e}", s.x);
        let f = evolve_free_fall(PhaseSpacePoint::frame1(0.0, 0.0), 1e-15, 9.81, 1e-6);
        assert!(close(f.x, -4.905e-12, 1e-14));
    }

    #[test]
    fn free_fall_momentum_zero_crossing() {
        let (m, g, t) = (2.0, 9.81, 0.7);
        let s = evolve_free_fall(PhaseSpacePoint::frame1(0.3, m * g * t), m, g, t);
        assert!(s.p.abs() < 1e-14);
        let s0 = PhaseSpacePoint::frame1(0.3, 0.2);
        assert_eq!(evolve_free_fall(s0, m, g, 0.0), s0);
    }

    #[test]
    fn zero_frequency_is_rejected() {
        let e = evolve_harmonic_gravity(PhaseSpacePoint::frame1(0.0, 0.0), 1.0, 0.0, 9.81, 1.0).unwrap_err();
        assert!(e.to_string().contains("evolve_free_fall"));
    }

    #[test]
    fn mode_expansion_matches_exact_at_small_omega_t() {
        let g = crate::params::gravitational_coupling(HBAR, 1e-15, 5e-6, 9.81);
        for a0 in [C64::new(0.0, 0.0), C64::new(1.0, -2.0)] {
            let r = evolve_mode_quadratic(a0, 5e-6, g, 1e-6, Guard::default());
            assert!(r.guard.within);
            assert!(close(r.value.re, r.exact.re, 1e-15), "{} {}", r.value.re, r.exact.re);
            assert!(close(r.value.im, r.exact.im, 1e-15));
        }
    }

    #[test]
    fn mode_expansion_source_term() {
        let r = evolve_mode_quadratic(C64::new(0.0, 0.0), 0.2, 0.3, 0.1, Guard::default());
        assert!((r.value - C64::new(-0.2 * 0.3 * 0.01 / 2.0, -0.03)).norm() < 1e-16);
        let r = evolve_mode_quadratic(C64::new(1.0, 1.0), 0.2, 0.3, 0.0, Guard::default());
        assert_eq!(r.value, C64::new(1.0, 1.0));
        let r = evolve_mode_quadratic(C64::new(1.0, 1.0), 2.0, 0.3, 0.1, Guard::default());
        assert!(!r.guard.within);
    }

    #[test]
    fn mode_matches_adimensional_classical_solution() {
        let (m, w, g_e) = (1e-15, 3e-3, 9.81);
        let s0 = PhaseSpacePoint::frame1(2e-9, 4e-24);
        let t = 123.0;
        let s = evolve_harmonic_gravity(s0, m, w, g_e, t).unwrap();
        let g = crate::params::gravitational_coupling(HBAR, m, w, g_e);
        let a = evolve_mode_exact(s0.adimensional(HBAR, m, w).mode(), w, g, t);
        let want = s.adimensional(HBAR, m, w).mode();
        assert!((a - want).norm() < 1e-11 * want.norm(), "{a} vs {want}");
    }

    #[test]
    fn rk4_agrees_with_closed_form_over_a_period() {
        let (m, w, g) = (1.3, 2.0, 9.81);
        let s0 = PhaseSpacePoint::frame1(0.4, -0.7);
        let tf = TAU / w;
        let spec = TrapSpec::HarmonicGravity { mass: m, omega: w, g_e: g };
        let num = ode_oracle(s0, spec, tf, tf / 4000.0).unwrap();
        let ex = evolve_harmonic_gravity(s0, m, w, g, tf).unwrap();
        let scale = (s0.x * m * w).hypot(s0.p) + m * g / w;
        let err = ((num.x - ex.x) * m * w).hypot(num.p - ex.p) / scale;
        assert!(err < 1e-9, "err = {err:e}");
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        let (m, w, g) = (1.0, 1.0, 9.81);
        let s0 = PhaseSpacePoint::frame1(1.0, 0.0);
        let spec = TrapSpec::HarmonicGravity { mass: m, omega: w, g_e: g };
        let ex = evolve_harmonic_gravity(s0, m, w, g, 3.0).unwrap();
        let e1 = (ode_oracle(s0, spec, 3.0, 0.02).unwrap().x - ex.x).abs();
        let e2 = (ode_oracle(s0, spec, 3.0, 0.01).unwrap().x - ex.x).abs();
        let ratio = e1 / e2;
        assert!((ratio - 16.0).abs() < 1.5, "ratio {ratio}");
    }

    #[test]
    fn rk4_free_fall_is_exact() {
        let s0 = PhaseSpacePoint::frame1(0.25, 0.5);
        let spec = TrapSpec::FreeFall { mass: 2.0, g_e: 9.81 };
        let num = ode_oracle(s0, spec, 1.0, 1.0 / 64.0).unwrap();
        let ex = evolve_free_fall(s0, 2.0, 9.81, 1.0);
        assert!((num.x - ex.x).abs() < 1e-14 && (num.p - ex.p).abs() < 1e-13);
    }

    #[test]
    fn rk4_step_guard() {
        let spec = TrapSpec::HarmonicGravity { mass: 1.0, omega: 1.0, g_e: 0.0 };
        let err = ode_oracle(PhaseSpacePoint::frame1(1.0, 0.0), spec, 1.0, 0.2).unwrap_err();
        assert!(matches!(err, Error::StepSize { .. }));
    }

    #[test]
    fn quench_trajectory_is_continuous_at_switch() {
        let spec = TrapSpec::Quench { mass: 1.0, omega1: 2.0, omega2: 0.5, g_e: 9.81 };
        let s0 = PhaseSpacePoint::frame1(0.3, 0.1);
        let dt = 1e-3;
        let eps = 1e-9;
        let left = ode_integrate(s0, spec, -1.0, -eps, dt).unwrap();
        let right = ode_integrate(s0, spec, -1.0, eps, dt).unwrap();
        assert!((left.x - right.x).abs() < 1e-8 && (left.p - right.p).abs() < 1e-7);
        // before the switch the motion is pure harmonic at ω1
        let at0 = ode_integrate(s0, spec, -1.0, 0.0, dt).unwrap();
        let ex = evolve_harmonic(s0, 1.0, 2.0, 1.0);
        assert!((at0.x - ex.x).abs() < 1e-11);
    }

    #[test]
    fn action_phase_vanishes_at_full_period() {
        let s0 = PhaseSpacePoint::frame2(1e-9, 3e-24);
        let w = 5e-6;
        let phi = action_phase(s0, 1e-15, w, TAU / w, HBAR).unwrap();
        let mw = 1e-15 * w;
        let scale = (s0.p * s0.p + (mw * s0.x).powi(2)) / (4.0 * mw * HBAR) + (s0.p * s0.x).abs() / HBAR;
        assert!(phi.abs() < 1e-12 * scale, "{phi:e} vs {scale:e}");
    }

    #[test]
    fn action_phase_symmetric_point() {
        let (m, w) = (1.0, 1.0);
        let s0 = PhaseSpacePoint::frame2(2.0, m * w * 2.0);
        for t in [0.1, 0.7, 2.3] {
            let phi = action_phase(s0, m, w, t, 1.0).unwrap();
            let s = (w * t).sin();
            assert!((phi + 4.0 * s * s).abs() < 1e-14);
        }
    }

    #[test]
    fn action_phase_matches_simpson_quadrature() {
        let (m, w, hbar) = (1.0, 1.0, HBAR);
        let s0 = PhaseSpacePoint::frame2(1.0, 0.0);
        let t = 2.0;
        let lagr = |s: f64| {
            let q = evolve_harmonic(s0, m, w, s);
            (q.p * q.p / (2.0 * m) - m * w * w * q.x * q.x / 2.0) / hbar
        };
        let n = 10_000;
        let h = t / n as f64;
        let mut sum = lagr(0.0) + lagr(t);
        for i in 1..n {
            sum += lagr(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        let quad = sum * h / 3.0;
        let phi = action_phase(s0, m, w, t, hbar).unwrap();
        assert!(close(phi, quad, 1e-8), "{phi} vs {quad}");
        assert!(action_phase(PhaseSpacePoint::frame1(1.0, 0.0), m, w, t, hbar).is_err());
    }

    #[test]
    fn harmonic_difference_small_time_limit() {
        let (m, w, dx) = (1e-15, 5e-6, 1e-14);
        let x20 = 9.81 / (w * w);
        let t = 0.063 / w; // 2ωt = 0.126
        let harm = phase_difference_harmonic(x20, 0.0, dx, m, w, t, HBAR);
        let ff = phase_difference_freefall(dx, m, 9.81, t, HBAR);
        assert!(((ff - harm) / ff).abs() < 3e-3);
        let u = 2.0 * w * t;
        let rel = transient_relative_error(x20, 0.0, dx, m, w, t, HBAR);
        assert!((rel - (1.0 - u.sin() / u)).abs() < 1e-12);
        assert_eq!(phase_difference_harmonic(x20, 1e-20, 0.0, m, w, t, HBAR), 0.0);
    }

    #[test]
    fn one_minus_sinc_branches_meet() {
        for u in [1e-2 - 1e-12, 1e-2 + 1e-12] {
            let a = one_minus_sinc(u);
            let b = 1.0 - u.sin() / u;
            assert!(close(a, b, 1e-10), "{a} {b}");
        }
        assert!(close(one_minus_sinc(1e-11), 1e-22 / 6.0, 1e-15));
    }

    #[test]
    fn count_two_oscillations_of_double_frequency() {
        let v: Vec<f64> = (0..=1000).map(|i| (4.0 * std::f64::consts::PI * i as f64 / 1000.0).sin()).collect();
        assert_eq!(count_oscillations(&v), 2);
    }

    proptest! {
        #[test]
        fn frame_consistency(x in -1e-6..1e-6f64, p in -1e-21..1e-21f64, t in 0.0..1e6f64) {
            let (m, w, g) = (1e-15, 5e-6, 9.81);
            let s1 = PhaseSpacePoint::frame1(x, p);
            let via1 = evolve_harmonic_gravity(s1, m, w, g, t).unwrap();
            let via2 = evolve_harmonic(s1.to_frame(Frame::Frame2, g, w), m, w, t).to_frame(Frame::Frame1, g, w);
            let shift = g / (w * w);
            prop_assert!((via1.x - via2.x).abs() <= 1e-14 * shift);
            prop_assert!((via1.p - via2.p).abs() <= 1e-14 * m * g / w);
        }

        #[test]
        fn zero_gravity_is_pure_harmonic(x in -1.0..1.0f64, p in -1.0..1.0f64, t in 0.0..100.0f64) {
            let s0 = PhaseSpacePoint::frame1(x, p);
            let a = evolve_harmonic_gravity(s0, 1.5, 0.7, 0.0, t).unwrap();
            let b = evolve_harmonic(s0, 1.5, 0.7, t);
            prop_assert_eq!(a, b);
        }

        #[test]
        fn energy_is_conserved(x in -2.0..2.0f64, p in -2.0..2.0f64, frac in 0.0..1.0f64) {
            let (m, w, g) = (1.0, 1.0, 9.81);
            let energy = |s: PhaseSpacePoint| s.p * s.p / (2.0 * m) + m * w * w * s.x * s.x / 2.0 + m * g * s.x;
            // measured relative to the trap-bottom energy so the scale never vanishes
            let floor = -m * g * g / (2.0 * w * w);
            let s0 = PhaseSpacePoint::frame1(x, p);
            let s = evolve_harmonic_gravity(s0, m, w, g, 10.0 * TAU * frac).unwrap();
            let e0 = energy(s0) - floor;
            prop_assert!(((energy(s) - floor) - e0).abs() <= 1e-12 * e0.max(1.0));
        }

        #[test]
        fn relative_error_monotone_before_quarter_period(a in 0.001..0.999f64, b in 0.001..0.999f64) {
            let (m, w, dx) = (1e-15, 5e-6, 1e-14);
            let x20 = 9.81 / (w * w);
            let tq = period(w) / 4.0;
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            let e_lo = transient_relative_error(x20, 0.0, dx, m, w, lo * tq, HBAR);
            let e_hi = transient_relative_error(x20, 0.0, dx, m, w, hi * tq, HBAR);
            prop_assert!(e_hi > e_lo);
        }
    }
}
