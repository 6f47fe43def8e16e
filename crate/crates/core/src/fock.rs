//! Truncated number-basis oracle. Dense matrices, ħ = 1, frequencies in
//! rad/s.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

/// Largest supported truncation.
pub const MAX_DIM: usize = 256;
/// Allowed norm drift after a unitary step.
pub const NORM_TOLERANCE: f64 = 1e-8;
/// Allowed population of the last retained level.
pub const TAIL_LIMIT: f64 = 1e-10;

/// Smallest dimension the truncation rule accepts for amplitude α.
pub fn required_dim(alpha: C64) -> usize {
    (4.0 * alpha.norm_sqr() + 25.0).floor() as usize + 1
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    pub amps: DVector<C64>,
}

impl FockVector {
    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn vacuum(dim: usize) -> Self {
        let mut amps = DVector::zeros(dim);
        amps[0] = C64::new(1.0, 0.0);
        FockVector { amps }
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// |amps[N−1]|²
    pub fn tail_mass(&self) -> f64 {
        self.amps[self.dim() - 1].norm_sqr()
    }

    /// ⟨self|other⟩
    pub fn overlap(&self, other: &FockVector) -> C64 {
        self.amps.dotc(&other.amps)
    }

    /// |⟨a|b⟩|²/(‖a‖²‖b‖²)
    pub fn fidelity(&self, other: &FockVector) -> f64 {
        self.overlap(other).norm_sqr() / (self.amps.norm_squared() * other.amps.norm_squared())
    }

    pub fn expectation(&self, op: &DMatrix<C64>) -> C64 {
        self.amps.dotc(&(op * &self.amps))
    }

    pub fn scale(mut self, c: C64) -> Self {
        self.amps *= c;
        self
    }

    /// Fails when the last level carries more than [`TAIL_LIMIT`].
    pub fn check_health(&self) -> Result<()> {
        let tail = self.tail_mass();
        if tail > TAIL_LIMIT {
            return Err(Error::TruncationHealth { tail, limit: TAIL_LIMIT });
        }
        Ok(())
    }
}

/// Truncated a, with ⟨n|a|n+1⟩ = sqrt(n+1).
pub fn annihilation(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |i, j| if j == i + 1 { C64::new((j as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) })
}

pub fn creation(dim: usize) -> DMatrix<C64> {
    annihilation(dim).adjoint()
}

pub fn number(dim: usize) -> DMatrix<C64> {
    DMatrix::from_fn(dim, dim, |i, j| if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) })
}

fn check_dim(dim: usize) -> Result<()> {
    if !(2..=MAX_DIM).contains(&dim) {
        return Err(Error::domain("dim", format!("must be in 2..={MAX_DIM}")));
    }
    Ok(())
}

/// Number-basis amplitudes e^{−|α|²/2}αⁿ/sqrt(n!).
pub fn coherent_to_fock(alpha: C64, dim: usize) -> Result<FockVector> {
    check_dim(dim)?;
    let required = required_dim(alpha);
    if dim < required {
        return Err(Error::Truncation { dim, required });
    }
    let mut amps = DVector::zeros(dim);
    amps[0] = C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 1..dim {
        amps[n] = amps[n - 1] * alpha / (n as f64).sqrt();
    }
    Ok(FockVector { amps })
}

/// e^A by scaling and squaring with a truncated Taylor series.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    let norm1 = (0..n).map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as u32 } else { 0 };
    let b = a / C64::new(2f64.powi(squarings as i32), 0.0);
    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    // ‖B‖ ≤ 1/2, so 24 terms put the remainder far below 1e-16
    for k in 1..=24 {
        term = &term * &b / C64::new(k as f64, 0.0);
        result += &term;
        let size = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if size < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    result
}

/// ω a†a + g(a + a†)
pub fn displaced_oscillator_hamiltonian(dim: usize, omega: f64, g: f64) -> DMatrix<C64> {
    let a = annihilation(dim);
    let x = &a + a.adjoint();
    number(dim) * C64::new(omega, 0.0) + x * C64::new(g, 0.0)
}

/// Quench Hamiltonian after the switch, written in the ω₁ mode basis:
/// (ω₁/4)P² + (ω₂²/(4ω₁))X² + g₁X, with X = a + a†, P = i(a† − a).
pub fn quench_hamiltonian(dim: usize, omega1: f64, omega2: f64, g1: f64) -> DMatrix<C64> {
    let a = annihilation(dim);
    let ad = a.adjoint();
    let x = &a + &ad;
    let p = (&ad - &a) * C64::new(0.0, 1.0);
    let h = &p * &p * C64::new(omega1 / 4.0, 0.0) + &x * &x * C64::new(omega2 * omega2 / (4.0 * omega1), 0.0) + x * C64::new(g1, 0.0);
    // remove rounding asymmetry so the matrix is exactly Hermitian
    (&h + h.adjoint()) * C64::new(0.5, 0.0)
}

pub fn is_hermitian(h: &DMatrix<C64>) -> bool {
    *h == h.adjoint()
}

/// e^{−iHt}
pub fn propagator(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    expm(&(h * C64::new(0.0, -t)))
}

fn check_norm(before: f64, after: &FockVector) -> Result<()> {
    let drift = (after.norm() - before).abs();
    if drift > NORM_TOLERANCE {
        return Err(Error::NormDrift { drift, limit: NORM_TOLERANCE });
    }
    after.check_health()
}

/// Propagates ψ under a constant Hamiltonian for time t in `steps` equal
/// slices.
pub fn evolve_schrodinger(psi: &FockVector, h: &DMatrix<C64>, t: f64, steps: usize) -> Result<FockVector> {
    evolve_segments(psi, &[(h.clone(), t)], steps)
}

/// Piecewise-constant propagation, one (H, duration) pair per regime.
pub fn evolve_segments(psi: &FockVector, segments: &[(DMatrix<C64>, f64)], steps: usize) -> Result<FockVector> {
    let steps = steps.max(1);
    let before = psi.norm();
    let mut amps = psi.amps.clone();
    for (h, t) in segments {
        if h.nrows() != psi.dim() || h.ncols() != psi.dim() {
            return Err(Error::domain("hamiltonian", "dimension does not match the state"));
        }
        let u = propagator(h, t / steps as f64);
        for _ in 0..steps {
            amps = &u * amps;
        }
    }
    let out = FockVector { amps };
    check_norm(before, &out)?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    /// exp(αa† − α*a)
    Displace(C64),
    /// exp(½(z a†² − z* a²))
    Squeeze(C64),
    /// exp(iφ a†a)
    Rotate(f64),
}

impl Gate {
    pub fn matrix(&self, dim: usize) -> DMatrix<C64> {
        match *self {
            Gate::Displace(alpha) => {
                let a = annihilation(dim);
                expm(&(a.adjoint() * alpha - a * alpha.conj()))
            }
            Gate::Squeeze(z) => {
                let a = annihilation(dim);
                let a2 = &a * &a;
                expm(&((a2.adjoint() * z - a2 * z.conj()) * C64::new(0.5, 0.0)))
            }
            Gate::Rotate(phi) => DMatrix::from_fn(dim, dim, |i, j| {
                if i == j {
                    C64::from_polar(1.0, phi * i as f64)
                } else {
                    C64::new(0.0, 0.0)
                }
            }),
        }
    }
}

pub fn apply_gate(psi: &FockVector, gate: Gate) -> Result<FockVector> {
    let out = FockVector { amps: gate.matrix(psi.dim()) * &psi.amps };
    check_norm(psi.norm(), &out)?;
    Ok(out)
}
