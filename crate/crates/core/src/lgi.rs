//! Leggett-Garg expressions.
//!
//! Two-time quantities are written in the `≥ 0` convention:
//!
//! ```text
//! K(m₂, m₃) = 1 + m₂⟨M₂⟩ + m₃⟨M₃⟩ + m₂m₃⟨M₂M₃⟩ ≥ 0
//! ```
//!
//! labelled K31, K32, K33, K34 for `(m₂, m₃)` = `(−,+)`, `(+,+)`, `(−,−)`,
//! `(+,−)`. Correlators `⟨MᵢMⱼ⟩` are sequential: project on `Mᵢ`, then on
//! `Mⱼ` (Lüders rule).

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::{self, MZConfig};
use crate::qcore::{
    check_dims, expectation, DichotomicObservable, Operator, Outcome, StateVector, STRUCTURE_TOL,
};
use crate::weakval::{self, weak_value};

/// Which of the four two-time inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LgIndex {
    K31,
    K32,
    K33,
    K34,
}

impl LgIndex {
    pub const ALL: [LgIndex; 4] = [LgIndex::K31, LgIndex::K32, LgIndex::K33, LgIndex::K34];

    /// `(m₂, m₃)` sign pattern.
    pub fn signs(self) -> (Outcome, Outcome) {
        use Outcome::{Minus, Plus};
        match self {
            LgIndex::K31 => (Minus, Plus),
            LgIndex::K32 => (Plus, Plus),
            LgIndex::K33 => (Minus, Minus),
            LgIndex::K34 => (Plus, Minus),
        }
    }

    pub fn from_signs(m2: Outcome, m3: Outcome) -> Self {
        use Outcome::{Minus, Plus};
        match (m2, m3) {
            (Minus, Plus) => LgIndex::K31,
            (Plus, Plus) => LgIndex::K32,
            (Minus, Minus) => LgIndex::K33,
            (Plus, Minus) => LgIndex::K34,
        }
    }

    pub fn label(self) -> u8 {
        match self {
            LgIndex::K31 => 31,
            LgIndex::K32 => 32,
            LgIndex::K33 => 33,
            LgIndex::K34 => 34,
        }
    }

    pub fn position(self) -> usize {
        self.label() as usize - 31
    }
}

impl fmt::Display for LgIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// The four two-time quantities and the violation verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTimeLGReport {
    pub k31: f64,
    pub k32: f64,
    pub k33: f64,
    pub k34: f64,
    /// Set iff the smallest K is below `−1e-12`.
    pub violated_index: Option<LgIndex>,
    /// `|min K|` when violated, else 0.
    pub margin: f64,
}

impl TwoTimeLGReport {
    pub fn from_values(k: [f64; 4]) -> Self {
        let (pos, min) = k
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("four values");
        let violated_index = (min < -STRUCTURE_TOL).then(|| LgIndex::ALL[pos]);
        Self {
            k31: k[0],
            k32: k[1],
            k33: k[2],
            k34: k[3],
            violated_index,
            margin: if violated_index.is_some() { -min } else { 0.0 },
        }
    }

    pub fn values(&self) -> [f64; 4] {
        [self.k31, self.k32, self.k33, self.k34]
    }

    pub fn get(&self, index: LgIndex) -> f64 {
        self.values()[index.position()]
    }

    pub fn min(&self) -> f64 {
        self.values().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn negative_count(&self) -> usize {
        self.values().iter().filter(|&&k| k < -STRUCTURE_TOL).count()
    }
}

/// `K(m₂, m₃)` for all four sign patterns from the first and second moments.
pub fn lg_values_from_moments(e2: f64, e3: f64, e23: f64) -> [f64; 4] {
    LgIndex::ALL.map(|idx| {
        let (m2, m3) = idx.signs();
        let (s2, s3) = (m2.sign(), m3.sign());
        1.0 + s2 * e2 + s3 * e3 + s2 * s3 * e23
    })
}

/// Two-step projective joint distribution, `p[mᵢ][mⱼ] = ‖P_{mⱼ} P_{mᵢ}|s⟩‖²`
/// indexed by [`Outcome::index`].
pub fn sequential_joint(
    state: &StateVector,
    mi: &DichotomicObservable,
    mj: &DichotomicObservable,
) -> Result<[[f64; 2]; 2]> {
    check_dims(state.dim(), mi.dim())?;
    check_dims(state.dim(), mj.dim())?;
    let mut p = [[0.0; 2]; 2];
    for a in Outcome::BOTH {
        let after_first = mi.projector(a).act(state.amps());
        for b in Outcome::BOTH {
            let after_second = mj.projector(b).act(&after_first);
            p[a.index()][b.index()] = after_second.iter().map(|z| z.norm_sqr()).sum();
        }
    }
    Ok(p)
}

/// `⟨MᵢMⱼ⟩ = Σ mᵢmⱼ p(mᵢ, mⱼ)` with the two-step projective joint.
pub fn sequential_correlation(
    state: &StateVector,
    mi: &DichotomicObservable,
    mj: &DichotomicObservable,
) -> Result<f64> {
    let p = sequential_joint(state, mi, mj)?;
    Ok(Outcome::BOTH
        .iter()
        .flat_map(|&a| Outcome::BOTH.map(|b| (a, b)))
        .map(|(a, b)| a.sign() * b.sign() * p[a.index()][b.index()])
        .sum())
}

/// Observables at three times (Heisenberg picture) and the sign choice.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeTimeSpec {
    pub state: StateVector,
    pub m1: DichotomicObservable,
    pub m2: DichotomicObservable,
    pub m3: DichotomicObservable,
    pub signs: [Outcome; 3],
}

impl ThreeTimeSpec {
    /// Qubit prepared in the `+1` eigenstate of `σ_z`, precessing about the
    /// y axis by `theta` between measurements of `σ_z`:
    /// `M_k = cos((k−1)θ) σ_z + sin((k−1)θ) σ_x`.
    pub fn precession(theta: f64) -> Self {
        let at = |angle: f64| {
            let (s, c) = angle.sin_cos();
            let entries = [c, s, s, -c]
                .into_iter()
                .map(|x| num_complex::Complex64::new(x, 0.0))
                .collect();
            let m = Operator::hermitian(2, entries).expect("real symmetric");
            DichotomicObservable::from_operator(&m).expect("unit Bloch vector")
        };
        Self {
            state: StateVector::basis(2, 0),
            m1: at(0.0),
            m2: at(theta),
            m3: at(2.0 * theta),
            signs: [Outcome::Plus; 3],
        }
    }
}

/// `K₃ = m₁m₂⟨M₁M₂⟩ + m₂m₃⟨M₂M₃⟩ − m₁m₃⟨M₁M₃⟩ − 1`; macrorealism demands
/// `K₃ ≤ 0`.
pub fn k3(spec: &ThreeTimeSpec) -> Result<f64> {
    let [s1, s2, s3] = spec.signs.map(Outcome::sign);
    let c12 = sequential_correlation(&spec.state, &spec.m1, &spec.m2)?;
    let c23 = sequential_correlation(&spec.state, &spec.m2, &spec.m3)?;
    let c13 = sequential_correlation(&spec.state, &spec.m1, &spec.m3)?;
    Ok(s1 * s2 * c12 + s2 * s3 * c23 - s1 * s3 * c13 - 1.0)
}

/// Two-time quantities for a system prepared in `pre` (the `+1` eigenstate
/// of the implicit first observable).
///
/// Each K is computed twice, from the moments and from the weak-value form
/// `2p(m₃)[1 + m₂ Re (M₂)_w^{m₃}]`; a disagreement beyond `1e-12` is reported
/// as [`Error::Internal`]. Dark or higher-rank post-selections use
/// `2 Re⟨pre|P(m₃)(I + m₂M₂)|pre⟩` instead.
pub fn two_time_lg(
    pre: &StateVector,
    m2: &DichotomicObservable,
    m3: &DichotomicObservable,
) -> Result<TwoTimeLGReport> {
    let m2_op = m2.operator();
    let e2 = expectation(&m2_op, pre)?;
    let e3 = expectation(&m3.operator(), pre)?;
    let e23 = sequential_correlation(pre, m2, m3)?;
    let direct = lg_values_from_moments(e2, e3, e23);

    for idx in LgIndex::ALL {
        let (s2, s3) = idx.signs();
        let via_weak = weak_value_form(pre, &m2_op, m3.projector(s3), s2.sign())?;
        let want = direct[idx.position()];
        if (via_weak - want).abs() > STRUCTURE_TOL * 1f64.max(want.abs()) {
            return Err(Error::Internal(format!(
                "K{idx}: moment form {want} disagrees with weak-value form {via_weak}"
            )));
        }
    }
    Ok(TwoTimeLGReport::from_values(direct))
}

fn weak_value_form(pre: &StateVector, m2: &Operator, post_proj: &Operator, s2: f64) -> Result<f64> {
    let product_form = || -> Result<f64> {
        let p = post_proj.sandwich(pre, pre)?.re;
        let cross = post_proj.matmul(m2)?.sandwich(pre, pre)?.re;
        Ok(2.0 * (p + s2 * cross))
    };
    let Ok(f) = post_proj.rank_one_vector() else {
        return product_form();
    };
    match weak_value(m2, pre, &f) {
        Ok(w) => Ok(2.0 * w.postselect_prob * (1.0 + s2 * w.value.re)),
        Err(Error::OrthogonalPostSelection { .. }) => product_form(),
        Err(e) => Err(e),
    }
}

/// Matrix route for the interferometer, identifying `|+m₁⟩ = ψᵢ`,
/// `|+m₃⟩ = ψ₄`, `|−m₃⟩ = ψ₃`.
pub fn mz_two_time_lg(cfg: &MZConfig) -> Result<TwoTimeLGReport> {
    let pre = interferometer::input_state(cfg)?;
    let m3 = interferometer::effective_output_observable(cfg)?;
    two_time_lg(&pre, &interferometer::path_observable(), &m3)
}

/// `(2β(β−α), 2α(α−β), 2β(α+β), 2α(α+β))`, valid at φ = 0.
pub fn mz_lg_closed_form(cfg: &MZConfig) -> Result<TwoTimeLGReport> {
    if cfg.phi() != 0.0 {
        return Err(Error::Unsupported("closed-form LG values assume phi = 0"));
    }
    let (a, b) = (cfg.alpha(), cfg.beta());
    Ok(TwoTimeLGReport::from_values([
        2.0 * b * (b - a),
        2.0 * a * (a - b),
        2.0 * b * (a + b),
        2.0 * a * (a + b),
    ]))
}

/// β values at which every K is non-negative with one saturating at 0.
pub const EXCEPTIONAL_BETAS: [f64; 5] = [
    -1.0,
    -std::f64::consts::FRAC_1_SQRT_2,
    0.0,
    std::f64::consts::FRAC_1_SQRT_2,
    1.0,
];

pub fn is_exceptional_beta(beta: f64) -> bool {
    EXCEPTIONAL_BETAS
        .iter()
        .any(|&x| (beta - x).abs() <= STRUCTURE_TOL)
}

/// `n` evenly spaced points from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..n)
            .map(|k| {
                if k == n - 1 {
                    max
                } else {
                    min + (max - min) * k as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// One row of the β sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub beta: f64,
    pub alpha: f64,
    pub k: [f64; 4],
    /// `None` when the port is dark.
    pub w3: Option<f64>,
    pub w4: Option<f64>,
    pub p3: f64,
    pub p4: f64,
    pub violated: Option<LgIndex>,
}

/// Closed-form K, weak values and port probabilities over a β grid, in grid
/// order.
pub fn sweep_beta(grid: &[f64]) -> Result<Vec<SweepRow>> {
    grid.par_iter()
        .map(|&beta| {
            let cfg = MZConfig::from_beta(beta)?;
            let report = mz_lg_closed_form(&cfg)?;
            let (w3, w4) = weakval::mz_weak_values_closed_form(&cfg)?;
            let (p3, p4) = interferometer::detection_probabilities(&cfg);
            let violated = if is_exceptional_beta(beta) {
                None
            } else {
                report.violated_index
            };
            Ok(SweepRow {
                beta: cfg.beta(),
                alpha: cfg.alpha(),
                k: report.values(),
                w3,
                w4,
                p3,
                p4,
                violated,
            })
        })
        .collect()
}
