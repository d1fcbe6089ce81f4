//! State representations for the open two-level chiral system and the
//! conversions between them.
//!
//! Three equivalent pictures are used throughout the crate:
//!
//! * amplitudes `(a_L, a_R)` of a normalized pure state in the chiral basis,
//! * the Bloch vector `(X, Y, Z)` with `X = 2 Re ρ_LR`, `Y = 2 Im ρ_LR`,
//!   `Z = ρ_RR − ρ_LL`,
//! * the 2×2 density matrix `(ρ_LL, ρ_RR, ρ_LR)`.
//!
//! Pure states live on the unit sphere `X² + Y² + Z² = 1`; mixtures fill the
//! ball. Purity is `Tr ρ² = (1 + X² + Y² + Z²)/2 ∈ [1/2, 1]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Accepted deviation of |a_L|² + |a_R|² from 1 for user-supplied states.
pub const NORM_TOL: f64 = 1e-6;
/// Accepted violation of trace/positivity/containment for propagated states.
pub const MATRIX_TOL: f64 = 1e-9;

/// Amplitudes of a pure state in the chiral basis: `ψ = a_L|L⟩ + a_R|R⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateAmplitudes {
    pub a_l: Complex64,
    pub a_r: Complex64,
}

impl StateAmplitudes {
    /// Builds a state, rejecting amplitude pairs whose norm deviates from 1
    /// by more than [`NORM_TOL`].
    pub fn new(a_l: Complex64, a_r: Complex64) -> Result<Self> {
        let s = Self { a_l, a_r };
        let n = s.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized {
                norm_sqr: n,
                tol: NORM_TOL,
            });
        }
        Ok(s)
    }

    /// `|L⟩` with both amplitudes real.
    pub fn localized_l() -> Self {
        Self {
            a_l: Complex64::new(1.0, 0.0),
            a_r: Complex64::new(0.0, 0.0),
        }
    }

    /// `|R⟩` with both amplitudes real.
    pub fn localized_r() -> Self {
        Self {
            a_l: Complex64::new(0.0, 0.0),
            a_r: Complex64::new(1.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a_l.norm_sqr() + self.a_r.norm_sqr()
    }

    /// Rescales onto the unit sphere. Call sites guarantee a nonzero norm.
    pub fn renormalized(&self) -> Self {
        let n = self.norm_sqr().sqrt();
        Self {
            a_l: self.a_l / n,
            a_r: self.a_r / n,
        }
    }

    /// Coherence `ρ_LR = a_L a_R*` of the corresponding projector.
    pub fn coherence(&self) -> Complex64 {
        self.a_l * self.a_r.conj()
    }
}

/// Bloch vector of a (possibly mixed) state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    /// Builds a Bloch vector, rejecting points outside the unit ball by more
    /// than [`MATRIX_TOL`].
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let n = x * x + y * y + z * z;
        if !n.is_finite() || n > 1.0 + MATRIX_TOL {
            return Err(Error::BlochOutsideBall { norm_sqr: n });
        }
        Ok(Self { x, y, z })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// Purity `(1 + |b|²)/2`.
    pub fn purity(&self) -> f64 {
        0.5 * (1.0 + self.norm_sqr())
    }
}

/// Two-level density matrix in the chiral basis. `ρ_RL` is implicit as the
/// conjugate of `ρ_LR`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix2 {
    pub rho_ll: f64,
    pub rho_rr: f64,
    pub rho_lr: Complex64,
}

impl DensityMatrix2 {
    /// Builds a density matrix, enforcing unit trace and positivity
    /// (`|ρ_LR|² ≤ ρ_LL ρ_RR`) within [`MATRIX_TOL`].
    pub fn new(rho_ll: f64, rho_rr: f64, rho_lr: Complex64) -> Result<Self> {
        let trace = rho_ll + rho_rr;
        if !trace.is_finite() || (trace - 1.0).abs() > MATRIX_TOL {
            return Err(Error::BadTrace {
                trace,
                tol: MATRIX_TOL,
            });
        }
        let coh2 = rho_lr.norm_sqr();
        let prod = rho_ll * rho_rr;
        if rho_ll < -MATRIX_TOL || rho_rr < -MATRIX_TOL || coh2 > prod + MATRIX_TOL {
            return Err(Error::NotPositive {
                coherence_sqr: coh2,
                population_product: prod,
            });
        }
        Ok(Self {
            rho_ll,
            rho_rr,
            rho_lr,
        })
    }

    /// Purity `Tr ρ² = ρ_LL² + ρ_RR² + 2|ρ_LR|²`.
    pub fn purity(&self) -> f64 {
        purity(self)
    }
}

/// Bloch vector of a pure state; rejects amplitude pairs that are not
/// normalized within [`NORM_TOL`].
pub fn bloch_from_amplitudes(s: &StateAmplitudes) -> Result<BlochVector> {
    let n = s.norm_sqr();
    if !n.is_finite() || (n - 1.0).abs() > NORM_TOL {
        return Err(Error::NotNormalized {
            norm_sqr: n,
            tol: NORM_TOL,
        });
    }
    let c = s.coherence();
    Ok(BlochVector {
        x: 2.0 * c.re,
        y: 2.0 * c.im,
        z: s.a_r.norm_sqr() - s.a_l.norm_sqr(),
    })
}

/// Density matrix of a Bloch vector:
/// `ρ_LL = (1−Z)/2`, `ρ_RR = (1+Z)/2`, `ρ_LR = (X + iY)/2`.
pub fn rho_from_bloch(b: &BlochVector) -> Result<DensityMatrix2> {
    DensityMatrix2::new(
        0.5 * (1.0 - b.z),
        0.5 * (1.0 + b.z),
        Complex64::new(0.5 * b.x, 0.5 * b.y),
    )
}

/// Inverse of [`rho_from_bloch`].
pub fn bloch_from_rho(rho: &DensityMatrix2) -> Result<BlochVector> {
    BlochVector::new(2.0 * rho.rho_lr.re, 2.0 * rho.rho_lr.im, rho.rho_rr - rho.rho_ll)
}

/// Purity `Tr ρ² = ρ_LL² + ρ_RR² + 2|ρ_LR|²`.
pub fn purity(rho: &DensityMatrix2) -> f64 {
    rho.rho_ll * rho.rho_ll + rho.rho_rr * rho.rho_rr + 2.0 * rho.rho_lr.norm_sqr()
}

/// Bare system parameters: tunneling frequency, dephasing rate, and mean
/// two-level energy, all in the same (unscaled) units with ħ = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawParams {
    /// Tunneling (L↔R oscillation) angular frequency ω = δ/ħ.
    pub omega: f64,
    /// Dephasing rate γ of the continuous σ_z measurement.
    pub gamma: f64,
    /// Mean energy of the doublet; shifts only the global phase.
    #[serde(default)]
    pub e_m: f64,
}

impl RawParams {
    pub fn new(omega: f64, gamma: f64) -> Result<Self> {
        Self { omega, gamma, e_m: 0.0 }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega must be > 0 (got {})",
                self.omega
            )));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must be ≥ 0 (got {})",
                self.gamma
            )));
        }
        if !self.e_m.is_finite() {
            return Err(Error::InvalidParameter("E_m must be finite".into()));
        }
        Ok(self)
    }

    /// Dimensionless parameters of the interacting model, with explicit
    /// mean-field energies: Ω = (E_m + V_hom)/δ and v = (V_het − V_hom)/δ,
    /// where δ = ħω is half the tunneling doublet splitting.
    pub fn rescaled(&self, v_hom: f64, v_het: f64) -> ModelParams {
        let delta = self.omega; // ħ = 1
        ModelParams {
            offset: (self.e_m + v_hom) / delta,
            v: (v_het - v_hom) / delta,
            gamma: self.gamma / self.omega,
        }
    }

    /// Time measured in tunneling periods: τ = ω t.
    pub fn rescaled_time(&self, t: f64) -> f64 {
        self.omega * t
    }
}

/// Dimensionless parameters of the rescaled equations of motion (time in
/// units of 1/ω).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Common-mode level shift Ω = (E_m + V_hom)/δ; contributes only a
    /// global phase and no observable depends on it.
    pub offset: f64,
    /// Chiral discrimination energy v = (V_het − V_hom)/δ. Positive v favors
    /// homochiral mean-field attraction; the sign matters only for initial
    /// states that start with nonzero coherence.
    pub v: f64,
    /// Dephasing rate Γ = γ/ω in rescaled time.
    pub gamma: f64,
}

impl ModelParams {
    pub fn new(offset: f64, v: f64, gamma: f64) -> Result<Self> {
        Self { offset, v, gamma }.validated()
    }

    /// Non-interacting rescaled parameters of a bare doublet.
    pub fn from_raw(raw: &RawParams) -> Self {
        raw.rescaled(0.0, 0.0)
    }

    pub fn validated(self) -> Result<Self> {
        if !self.offset.is_finite() {
            return Err(Error::InvalidParameter("Omega must be finite".into()));
        }
        if !self.v.is_finite() {
            return Err(Error::InvalidParameter("v must be finite".into()));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "Gamma must be ≥ 0 (got {})",
                self.gamma
            )));
        }
        Ok(self)
    }
}

/// Initial condition of a run. The three named pure states are the standard
/// preparations studied throughout; `Mixed` is the incoherent population
/// mixture `p_L|L⟩⟨L| + p_R|R⟩⟨R|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialState {
    /// LS — fully localized `|R⟩`.
    Localized,
    /// WDS — weakly delocalized `√0.05|L⟩ + √0.95|R⟩` (coherence ≈ 0.218).
    WeaklyDelocalized,
    /// SDS — strongly delocalized `√0.49|L⟩ + √0.51|R⟩` (coherence ≈ 0.500).
    StronglyDelocalized,
    /// Arbitrary pure state.
    Custom { a_l: Complex64, a_r: Complex64 },
    /// Incoherent mixture of the two localized states.
    Mixed { p_l: f64, p_r: f64 },
}

impl InitialState {
    /// Validates weights/normalization of the variant payload.
    pub fn validated(self) -> Result<Self> {
        match self {
            Self::Custom { a_l, a_r } => {
                StateAmplitudes::new(a_l, a_r)?;
            }
            Self::Mixed { p_l, p_r } => {
                if !(p_l.is_finite() && p_r.is_finite())
                    || p_l < 0.0
                    || p_r < 0.0
                    || (p_l + p_r - 1.0).abs() > NORM_TOL
                {
                    return Err(Error::BadWeights { p_l, p_r });
                }
            }
            _ => {}
        }
        Ok(self)
    }

    /// Amplitudes of the pure variants; `None` for `Mixed`.
    pub fn amplitudes(&self) -> Option<StateAmplitudes> {
        match *self {
            Self::Localized => Some(StateAmplitudes::localized_r()),
            Self::WeaklyDelocalized => Some(StateAmplitudes {
                a_l: Complex64::new(0.05_f64.sqrt(), 0.0),
                a_r: Complex64::new(0.95_f64.sqrt(), 0.0),
            }),
            Self::StronglyDelocalized => Some(StateAmplitudes {
                a_l: Complex64::new(0.49_f64.sqrt(), 0.0),
                a_r: Complex64::new(0.51_f64.sqrt(), 0.0),
            }),
            Self::Custom { a_l, a_r } => Some(StateAmplitudes { a_l, a_r }),
            Self::Mixed { .. } => None,
        }
    }

    /// Localized-basis weights `(p_L, p_R)`: the populations for any variant.
    pub fn weights(&self) -> (f64, f64) {
        match *self {
            Self::Mixed { p_l, p_r } => (p_l, p_r),
            _ => {
                let a = self.amplitudes().expect("pure variants have amplitudes");
                (a.a_l.norm_sqr(), a.a_r.norm_sqr())
            }
        }
    }

    /// The incoherent mixture with this state's populations — the reference
    /// state used in distinguishability comparisons.
    pub fn dephased(&self) -> InitialState {
        let (p_l, p_r) = self.weights();
        InitialState::Mixed { p_l, p_r }
    }

    /// Density matrix of the initial condition.
    pub fn density(&self) -> Result<DensityMatrix2> {
        match self.amplitudes() {
            Some(a) => rho_from_bloch(&bloch_from_amplitudes(&a)?),
            None => {
                let (p_l, p_r) = self.weights();
                DensityMatrix2::new(p_l, p_r, Complex64::new(0.0, 0.0))
            }
        }
    }

    pub fn is_pure(&self) -> bool {
        !matches!(self, Self::Mixed { .. })
    }
}

impl std::fmt::Display for InitialState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Localized => write!(f, "LS"),
            Self::WeaklyDelocalized => write!(f, "WDS"),
            Self::StronglyDelocalized => write!(f, "SDS"),
            Self::Custom { a_l, a_r } => write!(f, "custom({a_l}, {a_r})"),
            Self::Mixed { p_l, p_r } => write!(f, "mixed({p_l}, {p_r})"),
        }
    }
}

/// Damping regime of the dephasing-only Bloch dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// ω > γ: damped oscillations at frequency s = 2√(ω² − γ²).
    TunnelingDominant,
    /// ω < γ: bi-exponential relaxation split by s̃ = 2√(γ² − ω²).
    DephasingDominant,
    /// ω = γ: degenerate (polynomial × exponential) decay.
    Critical,
}

/// Regime classification plus the associated frequency/relaxation splitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticRegime {
    pub regime: Regime,
    /// s = 2√(ω² − γ²) when tunneling-dominant, s̃ = 2√(γ² − ω²) when
    /// dephasing-dominant, 0 at criticality.
    pub s: f64,
}

impl AnalyticRegime {
    pub fn classify(p: &RawParams) -> Self {
        let d = p.omega * p.omega - p.gamma * p.gamma;
        if d > 0.0 {
            Self {
                regime: Regime::TunnelingDominant,
                s: 2.0 * d.sqrt(),
            }
        } else if d < 0.0 {
            Self {
                regime: Regime::DephasingDominant,
                s: 2.0 * (-d).sqrt(),
            }
        } else {
            Self {
                regime: Regime::Critical,
                s: 0.0,
            }
        }
    }
}
