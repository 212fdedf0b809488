//! Two-path Mach-Zehnder interferometer.
//!
//! States live in the `{ψ₁, ψ₂}` path basis. The detector ports are
//! `ψ₃ = (ψ₁ + ψ₂)/√2` (D1) and `ψ₄ = (ψ₁ − ψ₂)/√2` (D2).
//!
//! Unitary convention, applied right to left to the input `α|ψ₁⟩ + β|ψ₂⟩`:
//!
//! ```text
//! U_total = R · U_BS · PS(φ) · S
//!   S     = diag(1, i)                 path-ψ₂ phase of the first splitter
//!   PS(φ) = diag(1, e^{iφ})            phase shifter on path ψ₂
//!   U_BS  = (1/√2) [[1, i], [i, 1]]    symmetric 50:50 splitter
//!   R     = [ψ₄ | ψ₃]                  lab port 1 → D2, lab port 2 → D1
//! ```
//!
//! At φ = 0 this gives `U_total = i|ψ₃⟩⟨ψ₃| + |ψ₄⟩⟨ψ₄|`, so the port
//! amplitudes differ from `[(α+β)|ψ₃⟩ + i(α−β)|ψ₄⟩]/√2` only by phases and
//! every detection probability agrees with the closed form.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{
    self, ComplexScalar, DichotomicObservable, Normalization, Operator, StateVector, INPUT_TOL, ONE,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PropagationMode {
    /// Port amplitudes written down directly.
    #[default]
    ClosedForm,
    /// Composition of the element unitaries.
    Unitary,
}

/// Input amplitudes and phase setting of the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MZConfig {
    alpha: f64,
    beta: f64,
    phi: f64,
    mode: PropagationMode,
}

impl MZConfig {
    /// Real amplitudes with `α² + β² = 1` to within [`INPUT_TOL`]; accepted
    /// inputs are rescaled onto the unit circle.
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::NonFinite("interferometer amplitudes"));
        }
        let norm_sq = alpha * alpha + beta * beta;
        if (norm_sq - 1.0).abs() > INPUT_TOL {
            return Err(Error::OutOfRange {
                name: "alpha^2 + beta^2",
                value: norm_sq,
                constraint: "must equal 1",
            });
        }
        let (alpha, beta) = if norm_sq == 1.0 {
            (alpha, beta)
        } else {
            let s = norm_sq.sqrt();
            (alpha / s, beta / s)
        };
        Ok(Self {
            alpha,
            beta,
            phi: 0.0,
            mode: PropagationMode::ClosedForm,
        })
    }

    /// `α = +√(1 − β²)`.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::NonFinite("beta"));
        }
        if beta.abs() > 1.0 {
            return Err(Error::OutOfRange {
                name: "beta",
                value: beta,
                constraint: "|beta| <= 1",
            });
        }
        Self::new((1.0 - beta * beta).sqrt(), beta)
    }

    pub fn with_phi(mut self, phi: f64) -> Result<Self> {
        if !phi.is_finite() {
            return Err(Error::NonFinite("phi"));
        }
        self.phi = phi;
        Ok(self)
    }

    pub fn with_mode(mut self, mode: PropagationMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn mode(&self) -> PropagationMode {
        self.mode
    }

    fn phase(&self) -> ComplexScalar {
        if self.phi == 0.0 {
            ONE
        } else {
            Complex64::from_polar(1.0, self.phi)
        }
    }
}

/// Path basis `{ψ₁, ψ₂}` and port basis `{ψ₃, ψ₄}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MZBasis {
    pub psi1: StateVector,
    pub psi2: StateVector,
    pub psi3: StateVector,
    pub psi4: StateVector,
}

impl MZBasis {
    pub fn new() -> Self {
        let psi1 = StateVector::basis(2, 0);
        let psi2 = StateVector::basis(2, 1);
        let psi3 = StateVector::superpose(&psi1, &psi2, 1.0).expect("orthonormal pair");
        let psi4 = StateVector::superpose(&psi1, &psi2, -1.0).expect("orthonormal pair");
        Self {
            psi1,
            psi2,
            psi3,
            psi4,
        }
    }
}

impl Default for MZBasis {
    fn default() -> Self {
        Self::new()
    }
}

/// Pre-selected state `α|ψ₁⟩ + β|ψ₂⟩`.
pub fn input_state(cfg: &MZConfig) -> Result<StateVector> {
    StateVector::from_real(&[cfg.alpha, cfg.beta])
}

/// `(1/√2) [[1, i], [i, 1]]` in the path basis.
pub fn bs_unitary() -> Operator {
    let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let t = Complex64::new(0.0, FRAC_1_SQRT_2);
    Operator::unitary(2, vec![r, t, t, r]).expect("symmetric splitter is unitary")
}

/// `e^{iφ}` on path ψ₂.
pub fn phase_unitary(phi: f64) -> Operator {
    let p = if phi == 0.0 {
        ONE
    } else {
        Complex64::from_polar(1.0, phi)
    };
    Operator::diagonal(&[ONE, p])
}

/// Phase `i` on path ψ₂ carried by the first splitter.
pub fn preparation_phase() -> Operator {
    Operator::diagonal(&[ONE, Complex64::new(0.0, 1.0)])
}

/// Maps lab port 1 to D2 (`ψ₄`) and lab port 2 to D1 (`ψ₃`).
pub fn output_relabeling() -> Operator {
    let h = FRAC_1_SQRT_2;
    let entries = [h, h, -h, h]
        .into_iter()
        .map(|x| Complex64::new(x, 0.0))
        .collect();
    Operator::unitary(2, entries).expect("orthonormal columns")
}

/// `R · U_BS · PS(φ) · S`.
pub fn total_unitary(phi: f64) -> Operator {
    output_relabeling()
        .matmul(&bs_unitary())
        .and_then(|m| m.matmul(&phase_unitary(phi)))
        .and_then(|m| m.matmul(&preparation_phase()))
        .expect("all factors are 2x2")
}

/// State after the second splitter, in the path basis.
pub fn propagate(cfg: &MZConfig) -> Result<StateVector> {
    let input = input_state(cfg)?;
    match cfg.mode {
        PropagationMode::ClosedForm => {
            let basis = MZBasis::new();
            let e = cfg.phase();
            let a3 = (cfg.alpha + e * cfg.beta) * FRAC_1_SQRT_2;
            let a4 = Complex64::new(0.0, 1.0) * (cfg.alpha - e * cfg.beta) * FRAC_1_SQRT_2;
            let amps = (0..2)
                .map(|k| a3 * basis.psi3.amp(k) + a4 * basis.psi4.amp(k))
                .collect();
            StateVector::with_policy(amps, Normalization::Reject)
        }
        PropagationMode::Unitary => qcore::apply(&total_unitary(cfg.phi), &input),
    }
}

/// `(p(ψ₃), p(ψ₄)) = (|α + βe^{iφ}|²/2, |α − βe^{iφ}|²/2)`.
pub fn detection_probabilities(cfg: &MZConfig) -> (f64, f64) {
    let e = cfg.phase();
    let p3 = (cfg.alpha + e * cfg.beta).norm_sqr() / 2.0;
    let p4 = (cfg.alpha - e * cfg.beta).norm_sqr() / 2.0;
    (p3, p4)
}

/// `M₂ = |ψ₁⟩⟨ψ₁| − |ψ₂⟩⟨ψ₂|`.
pub fn path_observable() -> DichotomicObservable {
    let b = MZBasis::new();
    DichotomicObservable::from_basis(&b.psi1, &b.psi2).expect("path basis is orthonormal")
}

/// `M₃ = |ψ₄⟩⟨ψ₄| − |ψ₃⟩⟨ψ₃|`; the `+1` outcome is a click at D2.
pub fn output_observable() -> DichotomicObservable {
    let b = MZBasis::new();
    DichotomicObservable::from_basis(&b.psi4, &b.psi3).expect("port basis is orthonormal")
}

/// Output observable pulled back to the input plane, `U† M₃ U`. Identical to
/// [`output_observable`] at φ = 0.
pub fn effective_output_observable(cfg: &MZConfig) -> Result<DichotomicObservable> {
    if cfg.phi == 0.0 {
        return Ok(output_observable());
    }
    output_observable().conjugated(&total_unitary(cfg.phi))
}

/// States `U†|ψ₃⟩`, `U†|ψ₄⟩` whose overlap with the input is the amplitude at
/// D1 and D2 respectively. Equal to `ψ₃`, `ψ₄` at φ = 0.
pub fn post_selection_states(cfg: &MZConfig) -> Result<(StateVector, StateVector)> {
    let b = MZBasis::new();
    if cfg.phi == 0.0 {
        return Ok((b.psi3, b.psi4));
    }
    let ud = total_unitary(cfg.phi).adjoint();
    let f3 = StateVector::with_policy(ud.act(b.psi3.amps()), Normalization::Reject)?;
    let f4 = StateVector::with_policy(ud.act(b.psi4.amps()), Normalization::Reject)?;
    Ok((f3, f4))
}
