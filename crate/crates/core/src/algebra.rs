//! Tripod algebra: angle parameterization of the three Rabi frequencies, the
//! two dark states, the dark-state mixing rotation and the lower-state
//! amplitudes of an atom that follows the dark subspace adiabatically.
//!
//! Level |0⟩ is the excited state; |1⟩, |2⟩, |3⟩ are the lower states driven
//! by fields 1, 2 and 3.

pub use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Phases χ₁, χ₂, χ₃ of the three fields.
pub type Phases = [f64; 3];

pub const ZERO_PHASES: Phases = [0.0; 3];

/// The field-parameterization angles θ, φ and the dark-state mixing angle ν.
///
/// Angles are continuous reals; they are never reduced mod 2π.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AngleTriple {
    pub theta: f64,
    pub phi: f64,
    pub nu: f64,
}

impl AngleTriple {
    pub fn new(theta: f64, phi: f64, nu: f64) -> Self {
        Self { theta, phi, nu }
    }
}

/// Complex Rabi frequencies of the three fields.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RabiTriple {
    pub omega: [C64; 3],
}

impl RabiTriple {
    pub fn new(omega1: C64, omega2: C64, omega3: C64) -> Self {
        Self { omega: [omega1, omega2, omega3] }
    }

    pub fn real(omega1: f64, omega2: f64, omega3: f64) -> Self {
        Self::new(omega1.into(), omega2.into(), omega3.into())
    }

    /// Generalized Rabi frequency Ω = (Σ|Ωⱼ|²)^½.
    pub fn generalized(&self) -> f64 {
        self.intensity().sqrt()
    }

    /// Σ|Ωⱼ|².
    pub fn intensity(&self) -> f64 {
        self.omega.iter().map(|o| o.norm_sqr()).sum()
    }
}

/// Probability amplitudes (a₀, a₁, a₂, a₃).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AtomState {
    pub amps: [C64; 4],
}

impl AtomState {
    pub fn new(a0: C64, a1: C64, a2: C64, a3: C64) -> Self {
        Self { amps: [a0, a1, a2, a3] }
    }

    /// All population in one basis level.
    pub fn basis(level: usize) -> Self {
        let mut amps = [C64::new(0.0, 0.0); 4];
        amps[level] = C64::new(1.0, 0.0);
        Self { amps }
    }

    /// Lower-state amplitudes (a₁, a₂, a₃) with a₀ = 0.
    pub fn lower(lower: [C64; 3]) -> Self {
        Self::new(C64::new(0.0, 0.0), lower[0], lower[1], lower[2])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Excited-state population |a₀|².
    pub fn excited_population(&self) -> f64 {
        self.amps[0].norm_sqr()
    }

    pub fn scale(&self, k: C64) -> Self {
        Self { amps: self.amps.map(|a| a * k) }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut amps = self.amps;
        for (a, b) in amps.iter_mut().zip(other.amps.iter()) {
            *a += b;
        }
        Self { amps }
    }
}

/// The two orthonormal dark states over the lower levels |1⟩, |2⟩, |3⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarkBasis {
    pub phi1: [C64; 3],
    pub phi2: [C64; 3],
}

impl DarkBasis {
    /// Embeds dark state `s` (1 or 2) as a full atomic state with a₀ = 0.
    pub fn state(&self, s: usize) -> AtomState {
        match s {
            1 => AtomState::lower(self.phi1),
            2 => AtomState::lower(self.phi2),
            _ => panic!("dark state index must be 1 or 2, got {s}"),
        }
    }
}

/// Initial superposition parameter β and the instantaneous mixing angle μ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingState {
    pub beta: f64,
    pub mu: f64,
}

impl MixingState {
    /// Mixing state after the dark subspace has rotated by ν.
    pub fn from_nu(beta: f64, nu: f64) -> Self {
        Self { beta, mu: mixing_angle(beta, nu) }
    }
}

/// Instantaneous superposition angle μ for initial parameter β and accumulated
/// dark-state rotation ν.
///
/// With amplitudes a = sin μ Φ⁽¹⁾ + cos μ Φ⁽²⁾, parallel transport inside the
/// dark subspace gives dμ = −dν where dν = sin φ dθ, hence μ = β − ν.
pub fn mixing_angle(beta: f64, nu: f64) -> f64 {
    beta - nu
}

/// Ωⱼ from the generalized Rabi frequency, the angles and the phases.
pub fn angles_to_rabi(omega: f64, a: &AngleTriple, chi: &Phases) -> RabiTriple {
    let (st, ct) = a.theta.sin_cos();
    let (sp, cp) = a.phi.sin_cos();
    let amp = [st * cp, ct * cp, sp];
    let mut out = [C64::new(0.0, 0.0); 3];
    for j in 0..3 {
        out[j] = C64::from_polar(amp[j] * omega, chi[j]);
    }
    RabiTriple { omega: out }
}

/// Result of inverting the angle parameterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleDecomposition {
    pub omega: f64,
    pub angles: AngleTriple,
    pub phases: Phases,
    /// Set when the angles are not determined by the field (Ω = 0, or
    /// cos φ = 0 which leaves θ free).
    pub degenerate: bool,
}

/// Principal-branch inverse of [`angles_to_rabi`]: θ, φ ∈ [0, π/2] from the
/// magnitudes, χⱼ = arg Ωⱼ. The returned ν is always 0.
///
/// For Ω = 0 everything is zero and the result is flagged degenerate; for
/// cos φ = 0 the convention θ = 0 is used and the result is flagged.
pub fn rabi_to_angles(r: &RabiTriple) -> AngleDecomposition {
    let omega = r.generalized();
    let mags = r.omega.map(|o| o.norm());
    let phases = r.omega.map(|o| if o.norm() > 0.0 { o.arg() } else { 0.0 });
    if omega == 0.0 {
        return AngleDecomposition {
            omega,
            angles: AngleTriple::default(),
            phases: ZERO_PHASES,
            degenerate: true,
        };
    }
    let transverse = mags[0].hypot(mags[1]);
    let phi = mags[2].atan2(transverse);
    let degenerate = transverse <= omega * 1e-15;
    let theta = if degenerate { 0.0 } else { mags[0].atan2(mags[1]) };
    AngleDecomposition { omega, angles: AngleTriple::new(theta, phi, 0.0), phases, degenerate }
}

/// Signed angles of a field whose phases are 0 or π (real up to a common
/// phase-free convention): θ = atan2(Re Ω₁, Re Ω₂) ∈ (−π, π],
/// φ = asin(Re Ω₃ / Ω) ∈ [−π/2, π/2]. Returns (Ω, θ, φ).
///
/// This is the branch used by the solvers, which keep cos φ > 0 and allow
/// negative angles.
pub fn rabi_to_signed_angles(r: &RabiTriple) -> (f64, f64, f64) {
    let omega = r.generalized();
    if omega == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let s = r.omega.map(|o| o.re);
    let theta = s[0].atan2(s[1]);
    let phi = (s[2] / omega).clamp(-1.0, 1.0).asin();
    (omega, theta, phi)
}

/// The dark states Φ⁽¹⁾, Φ⁽²⁾ for the given angles and phases.
pub fn dark_states(a: &AngleTriple, chi: &Phases) -> DarkBasis {
    let (st, ct) = a.theta.sin_cos();
    let (sp, cp) = a.phi.sin_cos();
    let e = chi.map(|c| C64::from_polar(1.0, -c));
    DarkBasis {
        phi1: [e[0] * ct, -e[1] * st, C64::new(0.0, 0.0)],
        phi2: [e[0] * (st * sp), e[1] * (ct * sp), -e[2] * cp],
    }
}

/// Applies the coupling operator h with Ĥ = −ħh: component 0 of the result is
/// Σⱼ Ωⱼaⱼ and component j is Ωⱼ* a₀. The Schrödinger equation then reads
/// ȧ = i·h·a.
pub fn hamiltonian_apply(r: &RabiTriple, s: &AtomState) -> AtomState {
    let [a0, a1, a2, a3] = s.amps;
    let [o1, o2, o3] = r.omega;
    AtomState::new(o1 * a1 + o2 * a2 + o3 * a3, o1.conj() * a0, o2.conj() * a0, o3.conj() * a0)
}

/// Rotation between the dark states after an accumulated angle ν.
pub fn mixing_matrix(nu: f64) -> [[f64; 2]; 2] {
    let (s, c) = nu.sin_cos();
    [[c, s], [-s, c]]
}

/// Lower-state amplitudes aⱼ = sin μ ⟨j|Φ⁽¹⁾⟩ + cos μ ⟨j|Φ⁽²⁾⟩, with a₀ = 0.
pub fn state_from_mixing(a: &AngleTriple, mu: f64, chi: &Phases) -> AtomState {
    let basis = dark_states(a, chi);
    let (sm, cm) = mu.sin_cos();
    let mut lower = [C64::new(0.0, 0.0); 3];
    for j in 0..3 {
        lower[j] = basis.phi1[j] * sm + basis.phi2[j] * cm;
    }
    AtomState::lower(lower)
}
