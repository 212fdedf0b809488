//! Symmetrized two-time quasiprobabilities
//! `q(mᵢ, mⱼ) = ½ Tr[{P(mⱼ)P(mᵢ) + P(mᵢ)P(mⱼ)} ρ]`.
//!
//! Their marginals are the undisturbed Born probabilities of either
//! observable (no-signaling in time holds by construction), their correlation
//! equals the sequential projective one, and `4q` reproduces the two-time
//! Leggett-Garg quantities. Entries can be negative.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::{self, MZConfig};
use crate::lgi::{self, LgIndex, TwoTimeLGReport};
use crate::qcore::{
    check_dims, trace_with, DichotomicObservable, Operator, Outcome, StateVector, STRUCTURE_TOL,
};

/// Joint table over `(mᵢ, mⱼ) ∈ {±1}²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiprobTable {
    q: [[f64; 2]; 2],
    /// Total negative mass, `Σ |q|` over negative entries.
    pub negativity: f64,
    /// Largest marginal deviation from the undisturbed Born probabilities;
    /// zero for tables built from moments alone.
    pub nsit_residual: f64,
}

impl QuasiprobTable {
    /// Table from entries indexed by [`Outcome::index`].
    pub fn from_entries(q: [[f64; 2]; 2], nsit_residual: f64) -> Self {
        let negativity = q.iter().flatten().filter(|&&x| x < 0.0).map(|x| -x).sum();
        Self {
            q,
            negativity,
            nsit_residual,
        }
    }

    pub fn get(&self, mi: Outcome, mj: Outcome) -> f64 {
        self.q[mi.index()][mj.index()]
    }

    pub fn raw(&self) -> [[f64; 2]; 2] {
        self.q
    }

    /// `(mᵢ, mⱼ, q)` in the order `(+,+)`, `(+,−)`, `(−,+)`, `(−,−)`.
    pub fn entries(&self) -> [(Outcome, Outcome, f64); 4] {
        use Outcome::{Minus, Plus};
        [(Plus, Plus), (Plus, Minus), (Minus, Plus), (Minus, Minus)].map(|(a, b)| (a, b, self.get(a, b)))
    }

    pub fn sum(&self) -> f64 {
        self.q.iter().flatten().sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.q.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.min_entry() >= -STRUCTURE_TOL
    }

    /// `Σ_{mⱼ} q(mᵢ, mⱼ)`.
    pub fn marginal_first(&self, mi: Outcome) -> f64 {
        Outcome::BOTH.iter().map(|&b| self.get(mi, b)).sum()
    }

    /// `Σ_{mᵢ} q(mᵢ, mⱼ)`.
    pub fn marginal_second(&self, mj: Outcome) -> f64 {
        Outcome::BOTH.iter().map(|&a| self.get(a, mj)).sum()
    }

    /// `(⟨Mᵢ⟩, ⟨Mⱼ⟩, ⟨MᵢMⱼ⟩)` implied by the table.
    pub fn moments(&self) -> (f64, f64, f64) {
        let mut m = (0.0, 0.0, 0.0);
        for (a, b, q) in self.entries() {
            m.0 += a.sign() * q;
            m.1 += b.sign() * q;
            m.2 += a.sign() * b.sign() * q;
        }
        m
    }

    pub fn correlation(&self) -> f64 {
        self.moments().2
    }
}

/// Quasiprobabilities for a density matrix.
pub fn quasi_rho(
    rho: &Operator,
    mi: &DichotomicObservable,
    mj: &DichotomicObservable,
) -> Result<QuasiprobTable> {
    check_dims(rho.dim(), mi.dim())?;
    check_dims(rho.dim(), mj.dim())?;
    let mut q = [[0.0; 2]; 2];
    for a in Outcome::BOTH {
        for b in Outcome::BOTH {
            let (pa, pb) = (mi.projector(a), mj.projector(b));
            let sym = pb.matmul(pa)?.add_scaled(&pa.matmul(pb)?, 1.0)?;
            q[a.index()][b.index()] = 0.5 * trace_with(&sym, rho)?.re;
        }
    }
    let (ri, rj) = residuals(&q, rho, mi, mj)?;
    Ok(QuasiprobTable::from_entries(q, ri.max(rj)))
}

/// Quasiprobabilities for the pure state `|s⟩⟨s|`.
pub fn quasi(
    state: &StateVector,
    mi: &DichotomicObservable,
    mj: &DichotomicObservable,
) -> Result<QuasiprobTable> {
    quasi_rho(&state.density(), mi, mj)
}

fn residuals(
    q: &[[f64; 2]; 2],
    rho: &Operator,
    mi: &DichotomicObservable,
    mj: &DichotomicObservable,
) -> Result<(f64, f64)> {
    let mut ri = 0.0f64;
    let mut rj = 0.0f64;
    for m in Outcome::BOTH {
        let born_i = trace_with(mi.projector(m), rho)?.re;
        let born_j = trace_with(mj.projector(m), rho)?.re;
        let marg_i: f64 = q[m.index()].iter().sum();
        let marg_j: f64 = q.iter().map(|row| row[m.index()]).sum();
        ri = ri.max((marg_i - born_i).abs());
        rj = rj.max((marg_j - born_j).abs());
    }
    Ok((ri, rj))
}

/// `(residual_i, residual_j)`: how far each marginal of `q` is from
/// `Tr[P(m)ρ]` of the corresponding observable measured alone.
pub fn nsit_check(
    state: &StateVector,
    mi: &DichotomicObservable,
    mj: &DichotomicObservable,
) -> Result<(f64, f64)> {
    let rho = state.density();
    let table = quasi_rho(&rho, mi, mj)?;
    residuals(&table.q, &rho, mi, mj)
}

/// `(Σ mᵢmⱼ q, sequential projective correlation)`.
pub fn correlation_equivalence(
    state: &StateVector,
    mi: &DichotomicObservable,
    mj: &DichotomicObservable,
) -> Result<(f64, f64)> {
    let table = quasi(state, mi, mj)?;
    let seq = lgi::sequential_correlation(state, mi, mj)?;
    Ok((table.correlation(), seq))
}

/// `q(mᵢ, mⱼ) = ¼(1 + mᵢ⟨Mᵢ⟩ + mⱼ⟨Mⱼ⟩ + mᵢmⱼ⟨MᵢMⱼ⟩)`.
pub fn mr_reading(e_i: f64, e_j: f64, e_ij: f64) -> Result<QuasiprobTable> {
    for (name, v) in [("e_i", e_i), ("e_j", e_j), ("e_ij", e_ij)] {
        if !v.is_finite() || v.abs() > 1.0 + STRUCTURE_TOL {
            return Err(Error::OutOfRange {
                name,
                value: v,
                constraint: "moments must lie in [-1, 1]",
            });
        }
    }
    let mut q = [[0.0; 2]; 2];
    for a in Outcome::BOTH {
        for b in Outcome::BOTH {
            let (sa, sb) = (a.sign(), b.sign());
            q[a.index()][b.index()] = 0.25 * (1.0 + sa * e_i + sb * e_j + sa * sb * e_ij);
        }
    }
    Ok(QuasiprobTable::from_entries(q, 0.0))
}

/// `K(m₂, m₃) = 4 q(m₂, m₃)` for a table over `(M₂, M₃)`.
pub fn lg_from_quasi(table: &QuasiprobTable) -> TwoTimeLGReport {
    TwoTimeLGReport::from_values(LgIndex::ALL.map(|idx| {
        let (m2, m3) = idx.signs();
        4.0 * table.get(m2, m3)
    }))
}

/// Quasiprobabilities of `(M₂, M₃)` for the interferometer input state.
pub fn mz_quasi(cfg: &MZConfig) -> Result<QuasiprobTable> {
    let pre = interferometer::input_state(cfg)?;
    let m3 = interferometer::effective_output_observable(cfg)?;
    quasi(&pre, &interferometer::path_observable(), &m3)
}

/// `|p_seq(ψ₃) − p(ψ₃)|` where `p_seq` follows an intervening projective
/// path measurement. Equals `|αβ|` at φ = 0.
pub fn signaling_gap_projective(cfg: &MZConfig) -> Result<f64> {
    let pre = interferometer::input_state(cfg)?;
    let m2 = interferometer::path_observable();
    let m3 = interferometer::effective_output_observable(cfg)?;
    let joint = lgi::sequential_joint(&pre, &m2, &m3)?;
    // ψ₃ is the −1 outcome of M₃.
    let d1 = Outcome::Minus.index();
    let p_seq = joint[0][d1] + joint[1][d1];
    let p = crate::qcore::born_probability(m3.projector(Outcome::Minus), &pre)?;
    Ok((p_seq - p).abs())
}

/// Pairwise quasiprobabilities for three observables.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeTimeSuite {
    /// Pairs `(1,2)`, `(1,3)`, `(2,3)`.
    pub pairs: [QuasiprobTable; 3],
}

impl ThreeTimeSuite {
    /// Twelve entries, pair-major, each pair in [`QuasiprobTable::entries`] order.
    pub fn entries(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for (p, table) in self.pairs.iter().enumerate() {
            for (k, (_, _, q)) in table.entries().into_iter().enumerate() {
                out[4 * p + k] = q;
            }
        }
        out
    }

    /// All twelve entries non-negative (to `−1e-12`).
    pub fn passes(&self) -> bool {
        self.pairs.iter().all(QuasiprobTable::is_nonnegative)
    }

    pub fn negativity(&self) -> f64 {
        self.pairs.iter().map(|t| t.negativity).sum()
    }
}

pub fn three_time_suite_rho(
    rho: &Operator,
    m1: &DichotomicObservable,
    m2: &DichotomicObservable,
    m3: &DichotomicObservable,
) -> Result<ThreeTimeSuite> {
    Ok(ThreeTimeSuite {
        pairs: [
            quasi_rho(rho, m1, m2)?,
            quasi_rho(rho, m1, m3)?,
            quasi_rho(rho, m2, m3)?,
        ],
    })
}

pub fn three_time_suite(
    state: &StateVector,
    m1: &DichotomicObservable,
    m2: &DichotomicObservable,
    m3: &DichotomicObservable,
) -> Result<ThreeTimeSuite> {
    three_time_suite_rho(&state.density(), m1, m2, m3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::{detection_probabilities, output_observable, path_observable};
    use crate::lgi::{mz_lg_closed_form, ThreeTimeSpec};
    use crate::qcore::{sample, ComplexScalar};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2 as H, PI};

    use Outcome::{Minus, Plus};

    fn mz(beta: f64) -> MZConfig {
        MZConfig::from_beta(beta).unwrap()
    }

    #[test]
    fn identical_observables_give_diagonal_table() {
        let m = path_observable();
        let s = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let t = quasi(&s, &m, &m).unwrap();
        assert!((t.get(Plus, Plus) - 0.36).abs() < 1e-15);
        assert!((t.get(Minus, Minus) - 0.64).abs() < 1e-15);
        assert_eq!((t.get(Plus, Minus), t.get(Minus, Plus)), (0.0, 0.0));
        assert_eq!(t.negativity, 0.0);
    }

    #[test]
    fn mz_entries() {
        let t = mz_quasi(&mz(0.5)).unwrap();
        let a = 3f64.sqrt() / 2.0;
        // Oracle: symbolic q(m₂, m₃) = β(β−α)/2 for (−, +).
        assert!((t.get(Minus, Plus) - 0.5 * (0.5 - a) / 2.0).abs() < 1e-15);
        assert!((t.get(Minus, Plus) - (1.0 - 3f64.sqrt()) / 8.0).abs() < 1e-15);
        assert!((t.negativity - (3f64.sqrt() - 1.0) / 8.0).abs() < 1e-15);
        assert!((t.sum() - 1.0).abs() < 1e-12);

        let t = mz_quasi(&MZConfig::new(H, H).unwrap()).unwrap();
        assert!(t.get(Plus, Plus).abs() < 1e-15);
    }

    #[test]
    fn nsit_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let s = sample::state(2, &mut rng);
            let (ri, rj) = nsit_check(&s, &sample::dichotomic(2, &mut rng), &sample::dichotomic(2, &mut rng)).unwrap();
            assert!(ri < 1e-12 && rj < 1e-12);
        }

        let t = mz_quasi(&mz(0.5)).unwrap();
        let (_, p4) = detection_probabilities(&mz(0.5));
        assert!((t.marginal_second(Plus) - p4).abs() < 1e-12);
        assert!((p4 - (2.0 - 3f64.sqrt()) / 4.0).abs() < 1e-15);

        let t = mz_quasi(&mz(0.0)).unwrap();
        assert!((t.marginal_second(Plus) - 0.5).abs() < 1e-12);
        assert!((t.marginal_second(Minus) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn correlation_equivalence_examples() {
        for beta in [-0.9, -0.3, 0.0, 0.5, 0.99] {
            let s = interferometer::input_state(&mz(beta)).unwrap();
            let (cq, cs) = correlation_equivalence(&s, &path_observable(), &output_observable()).unwrap();
            assert!(cq.abs() < 1e-12 && cs.abs() < 1e-12);
        }
        let m = path_observable();
        let (cq, cs) = correlation_equivalence(&StateVector::basis(2, 1), &m, &m).unwrap();
        assert!((cq - 1.0).abs() < 1e-15 && (cs - 1.0).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let s = sample::state(2, &mut rng);
            let (mi, mj) = (sample::dichotomic(2, &mut rng), sample::dichotomic(2, &mut rng));
            let (cq, cs) = correlation_equivalence(&s, &mi, &mj).unwrap();
            assert!((cq - cs).abs() < 1e-12);
        }
    }

    #[test]
    fn correlation_equivalence_holds_in_higher_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..200 {
            let s = sample::state(4, &mut rng);
            let (mi, mj) = (sample::dichotomic(4, &mut rng), sample::dichotomic(4, &mut rng));
            let (cq, cs) = correlation_equivalence(&s, &mi, &mj).unwrap();
            assert!((cq - cs).abs() < 1e-12);
        }
    }

    #[test]
    fn mr_reading_examples() {
        let t = mr_reading(0.0, 0.0, 0.0).unwrap();
        assert!(t.entries().iter().all(|e| e.2 == 0.25));
        let t = mr_reading(0.5, -3f64.sqrt() / 2.0, 0.0).unwrap();
        assert!((t.get(Minus, Plus) - (1.0 - 3f64.sqrt()) / 8.0).abs() < 1e-15);
        let t = mr_reading(1.0, 1.0, 1.0).unwrap();
        assert_eq!(t.raw(), [[1.0, 0.0], [0.0, 0.0]]);
        assert!(mr_reading(1.5, 0.0, 0.0).is_err());
        assert!(mr_reading(0.0, f64::NAN, 0.0).is_err());
    }

    #[test]
    fn mr_reading_reproduces_quantum_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..500 {
            let s = sample::state(2, &mut rng);
            let (mi, mj) = (sample::dichotomic(2, &mut rng), sample::dichotomic(2, &mut rng));
            let t = quasi(&s, &mi, &mj).unwrap();
            let (a, b, c) = t.moments();
            let r = mr_reading(a, b, c).unwrap();
            for ((_, _, x), (_, _, y)) in t.entries().iter().zip(r.entries()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lg_from_quasi_examples() {
        let r = lg_from_quasi(&mz_quasi(&mz(0.5)).unwrap());
        assert!((r.k31 - (1.0 - 3f64.sqrt()) / 2.0).abs() < 1e-12);
        assert_eq!(r.violated_index, Some(LgIndex::K31));
        let r = lg_from_quasi(&mr_reading(0.0, 0.0, 0.0).unwrap());
        assert_eq!(r.values(), [1.0; 4]);
        let r = lg_from_quasi(&mz_quasi(&mz(0.0)).unwrap());
        for (x, y) in r.values().iter().zip([0.0, 2.0, 0.0, 2.0]) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn negativity_matches_violation_on_grid() {
        for beta in lgi::linspace(-1.0, 1.0, 1001) {
            let cfg = mz(beta);
            let t = mz_quasi(&cfg).unwrap();
            let from_q = lg_from_quasi(&t);
            let closed = mz_lg_closed_form(&cfg).unwrap();
            for (x, y) in from_q.values().iter().zip(closed.values()) {
                assert!((x - y).abs() < 1e-12);
            }
            if !lgi::is_exceptional_beta(beta) {
                assert_eq!(!t.is_nonnegative(), from_q.violated_index.is_some());
                assert!(from_q.violated_index.is_some());
            }
        }
    }

    #[test]
    fn signaling_gap_examples() {
        assert!((signaling_gap_projective(&MZConfig::new(H, H).unwrap()).unwrap() - 0.5).abs() < 1e-12);
        assert!(signaling_gap_projective(&mz(0.0)).unwrap().abs() < 1e-15);
        let g = signaling_gap_projective(&mz(0.5)).unwrap();
        assert!((g - 3f64.sqrt() / 4.0).abs() < 1e-12);
        for beta in lgi::linspace(-1.0, 1.0, 201) {
            let cfg = mz(beta);
            let g = signaling_gap_projective(&cfg).unwrap();
            assert!((g - (cfg.alpha() * cfg.beta()).abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn three_time_suite_examples() {
        let m = path_observable();
        let s = StateVector::basis(2, 0);
        let suite = three_time_suite(&s, &m, &m, &m).unwrap();
        assert!(suite.passes());
        assert!(suite.entries().iter().all(|&q| q >= 0.0));

        let spec = ThreeTimeSpec::precession(PI / 3.0);
        let suite = three_time_suite(&spec.state, &spec.m1, &spec.m2, &spec.m3).unwrap();
        assert!(!suite.passes());
        // Oracle: moments (½, −½, ½) on the (2,3) pair give q(−,+) = −1/8.
        assert!((suite.pairs[2].get(Minus, Plus) + 0.125).abs() < 1e-12);

        // Maximally mixed qubit with σx, σy, σz: every pair is uncorrelated.
        let c = |re: f64, im: f64| ComplexScalar::new(re, im);
        let sx = Operator::hermitian(2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap();
        let sy = Operator::hermitian(2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap();
        let sz = Operator::diagonal(&[c(1., 0.), c(-1., 0.)]);
        let obs: Vec<_> = [sx, sy, sz]
            .iter()
            .map(|m| DichotomicObservable::from_operator(m).unwrap())
            .collect();
        let rho = Operator::identity(2).scale(c(0.5, 0.0));
        let suite = three_time_suite_rho(&rho, &obs[0], &obs[1], &obs[2]).unwrap();
        assert!(suite.entries().iter().all(|&q| (q - 0.25).abs() < 1e-15));
        assert!(suite.passes());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tables_sum_to_one_and_satisfy_nsit(seed in any::<u64>(), dim in 2usize..5) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s = sample::state(dim, &mut rng);
                let (mi, mj) = (sample::dichotomic(dim, &mut rng), sample::dichotomic(dim, &mut rng));
                let t = quasi(&s, &mi, &mj).unwrap();
                prop_assert!((t.sum() - 1.0).abs() < 1e-12);
                prop_assert!(t.nsit_residual < 1e-12);
            }
        }
    }
}
