//! Weak values with post-selection and the decomposition of an expectation
//! value into post-selected sub-ensembles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::{self, MZConfig};
use crate::qcore::{
    check_dims, inner_product, ComplexScalar, DichotomicObservable, Operator, Outcome, StateVector,
    STRUCTURE_TOL,
};

/// Post-selection probabilities at or below this are treated as exact
/// orthogonality; anything larger yields a (possibly huge) finite value.
pub const ZERO_OVERLAP_TOL: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakValueResult {
    pub value: ComplexScalar,
    pub postselect_prob: f64,
    /// Real part outside the eigenvalue range of the observable.
    pub anomalous_real: bool,
    pub nonzero_imag: bool,
}

impl WeakValueResult {
    pub fn real(&self) -> f64 {
        self.value.re
    }
}

/// `(A)_w = ⟨pre|A|post⟩ / ⟨pre|post⟩`, classified against the `±1` range of
/// a dichotomic observable.
pub fn weak_value(a: &Operator, pre: &StateVector, post: &StateVector) -> Result<WeakValueResult> {
    weak_value_in_range(a, pre, post, (-1.0, 1.0))
}

/// Weak value of a dichotomic observable; the anomaly range comes from its
/// outcome labels.
pub fn weak_value_of(
    obs: &DichotomicObservable,
    pre: &StateVector,
    post: &StateVector,
) -> Result<WeakValueResult> {
    weak_value_in_range(&obs.operator(), pre, post, obs.label_range())
}

pub fn weak_value_in_range(
    a: &Operator,
    pre: &StateVector,
    post: &StateVector,
    (lo, hi): (f64, f64),
) -> Result<WeakValueResult> {
    check_dims(a.dim(), pre.dim())?;
    check_dims(a.dim(), post.dim())?;
    if !a.is_hermitian() {
        return Err(Error::NotHermitian {
            deviation: a.hermiticity_deviation(),
        });
    }
    let overlap = inner_product(pre, post)?;
    let overlap_sq = overlap.norm_sqr();
    if overlap_sq <= ZERO_OVERLAP_TOL {
        return Err(Error::OrthogonalPostSelection { overlap_sq });
    }
    let value = a.sandwich(pre, post)? / overlap;
    Ok(WeakValueResult {
        value,
        postselect_prob: overlap_sq,
        anomalous_real: value.re < lo - STRUCTURE_TOL || value.re > hi + STRUCTURE_TOL,
        nonzero_imag: value.im.abs() > STRUCTURE_TOL,
    })
}

/// `⟨A⟩ = p(f)(A)_w^f + p(f′)(A)_w^{f′}` term by term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    pub term_f: ComplexScalar,
    pub term_fperp: ComplexScalar,
    pub total: f64,
}

/// Splits `⟨pre|A|pre⟩` over the `+1` (`f`) and `−1` (`f′`) eigenvectors of a
/// rank-one dichotomic `basis`. A term whose post-selection has zero
/// probability is evaluated as `⟨pre|A|f⟩⟨f|pre⟩`, which stays finite.
pub fn expectation_decomposition(
    a: &Operator,
    pre: &StateVector,
    basis: &DichotomicObservable,
) -> Result<Decomposition> {
    check_dims(a.dim(), pre.dim())?;
    check_dims(a.dim(), basis.dim())?;
    let term = |outcome: Outcome| -> Result<ComplexScalar> {
        let f = basis.projector(outcome).rank_one_vector()?;
        match weak_value(a, pre, &f) {
            Ok(w) => Ok(w.value * w.postselect_prob),
            Err(Error::OrthogonalPostSelection { .. }) => {
                Ok(a.sandwich(pre, &f)? * inner_product(&f, pre)?)
            }
            Err(e) => Err(e),
        }
    };
    let term_f = term(Outcome::Plus)?;
    let term_fperp = term(Outcome::Minus)?;
    let sum = term_f + term_fperp;
    if sum.im.abs() > STRUCTURE_TOL {
        return Err(Error::Internal(format!(
            "decomposed expectation has imaginary part {:e}",
            sum.im
        )));
    }
    Ok(Decomposition {
        term_f,
        term_fperp,
        total: sum.re,
    })
}

/// Weak values of the path observable post-selected on each detector port.
#[derive(Debug, Clone, PartialEq)]
pub struct MzWeakValues {
    /// Post-selection on `ψ₃` (D1).
    pub w3: Result<WeakValueResult>,
    /// Post-selection on `ψ₄` (D2).
    pub w4: Result<WeakValueResult>,
}

impl MzWeakValues {
    pub fn exactly_one_anomalous(&self) -> bool {
        let flag = |w: &Result<WeakValueResult>| w.as_ref().map(|w| w.anomalous_real).unwrap_or(false);
        flag(&self.w3) ^ flag(&self.w4)
    }
}

/// Matrix evaluation of `(M₂)_w` for post-selection on each port.
pub fn mz_weak_values(cfg: &MZConfig) -> Result<MzWeakValues> {
    let pre = interferometer::input_state(cfg)?;
    let m2 = interferometer::path_observable();
    let (f3, f4) = interferometer::post_selection_states(cfg)?;
    Ok(MzWeakValues {
        w3: weak_value_of(&m2, &pre, &f3),
        w4: weak_value_of(&m2, &pre, &f4),
    })
}

/// `((α−β)/(α+β), (α+β)/(α−β))`, `None` where the port is dark. Only valid at
/// φ = 0.
pub fn mz_weak_values_closed_form(cfg: &MZConfig) -> Result<(Option<f64>, Option<f64>)> {
    if cfg.phi() != 0.0 {
        return Err(Error::Unsupported("closed-form weak values assume phi = 0"));
    }
    let (a, b) = (cfg.alpha(), cfg.beta());
    let (p3, p4) = interferometer::detection_probabilities(cfg);
    let w3 = (p3 > ZERO_OVERLAP_TOL).then(|| (a - b) / (a + b));
    let w4 = (p4 > ZERO_OVERLAP_TOL).then(|| (a + b) / (a - b));
    Ok((w3, w4))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interferometer::{output_observable, path_observable, MZBasis};
    use crate::qcore::{expectation, sample};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2 as H;

    fn rel_close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
    }

    fn beta_grid(n: usize) -> impl Iterator<Item = f64> {
        (0..n).map(move |k| -1.0 + 2.0 * k as f64 / (n - 1) as f64)
    }

    #[test]
    fn identity_weak_value_is_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let pre = sample::state(2, &mut rng);
            let post = sample::state(2, &mut rng);
            let w = weak_value(&Operator::identity(2), &pre, &post).unwrap();
            assert!((w.value - 1.0).norm() < 1e-12);
            assert!(!w.anomalous_real && !w.nonzero_imag);
        }
    }

    #[test]
    fn path_weak_value_on_dark_port() {
        let b = MZBasis::new();
        let m2 = path_observable().operator();
        let pre = StateVector::from_real(&[3f64.sqrt() / 2.0, 0.5]).unwrap();
        let w = weak_value(&m2, &pre, &b.psi4).unwrap();
        // Oracle: numerator and denominator by hand.
        let (a, bt) = (3f64.sqrt() / 2.0, 0.5);
        let by_hand = ((a + bt) * H) / ((a - bt) * H);
        assert!(rel_close(w.value.re, by_hand, 1e-14));
        assert!(rel_close(w.value.re, 2.0 + 3f64.sqrt(), 1e-14));
        assert!(w.anomalous_real && !w.nonzero_imag);
        assert!((w.postselect_prob - (2.0 - 3f64.sqrt()) / 4.0).abs() < 1e-15);

        let pre = StateVector::from_real(&[H, H]).unwrap();
        assert!(matches!(
            weak_value(&m2, &pre, &b.psi4),
            Err(Error::OrthogonalPostSelection { .. })
        ));
    }

    #[test]
    fn complex_weak_value_is_flagged_separately() {
        // σ_y-like observable between real states gives an imaginary weak value.
        let i = ComplexScalar::new(0.0, 1.0);
        let z = ComplexScalar::new(0.0, 0.0);
        let sy = Operator::hermitian(2, vec![z, -i, i, z]).unwrap();
        let pre = StateVector::from_real(&[1.0, 0.0]).unwrap();
        let post = StateVector::from_real(&[0.6, 0.8]).unwrap();
        let w = weak_value(&sy, &pre, &post).unwrap();
        assert!(w.nonzero_imag);
        assert!(!w.anomalous_real);
        assert!((w.value - ComplexScalar::new(0.0, -0.8 / 0.6)).norm() < 1e-12);
    }

    #[test]
    fn near_orthogonal_post_selection_is_large_but_finite() {
        let m2 = path_observable().operator();
        let eps = 1e-7;
        let cfg = MZConfig::new(H + eps, H - eps).unwrap();
        let pre = interferometer::input_state(&cfg).unwrap();
        let w = weak_value(&m2, &pre, &MZBasis::new().psi4).unwrap();
        assert!(w.value.re > 1e6 && w.value.re.is_finite());
    }

    #[test]
    fn decomposition_examples() {
        let m2 = path_observable().operator();
        let m3 = output_observable();
        let pre = StateVector::from_real(&[3f64.sqrt() / 2.0, 0.5]).unwrap();
        let d = expectation_decomposition(&m2, &pre, &m3).unwrap();
        assert!((d.total - 0.5).abs() < 1e-12);

        let d = expectation_decomposition(&Operator::identity(2), &pre, &m3).unwrap();
        let (p3, p4) = interferometer::detection_probabilities(&MZConfig::from_beta(0.5).unwrap());
        assert!((d.term_f.re - p4).abs() < 1e-12 && (d.term_fperp.re - p3).abs() < 1e-12);
        assert!((d.total - 1.0).abs() < 1e-12);

        let d = expectation_decomposition(&m2, &MZBasis::new().psi3, &m3).unwrap();
        assert!(d.total.abs() < 1e-12);
    }

    #[test]
    fn decomposition_uses_product_form_on_dark_port() {
        let m2 = path_observable().operator();
        let pre = StateVector::from_real(&[H, H]).unwrap();
        let d = expectation_decomposition(&m2, &pre, &output_observable()).unwrap();
        assert!(d.term_f.norm() < 1e-15);
        assert!(d.total.abs() < 1e-12);
    }

    #[test]
    fn decomposition_identity_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..1000 {
            let a = sample::hermitian(2, &mut rng);
            let pre = sample::state(2, &mut rng);
            let basis = sample::dichotomic(2, &mut rng);
            let d = expectation_decomposition(&a, &pre, &basis).unwrap();
            let e = expectation(&a, &pre).unwrap();
            assert!((d.total - e).abs() < 1e-12, "{} vs {}", d.total, e);
        }
    }

    #[test]
    fn mz_weak_value_examples() {
        let cfg = MZConfig::new(1.0, 0.0).unwrap();
        let w = mz_weak_values(&cfg).unwrap();
        let (w3, w4) = (w.w3.clone().unwrap(), w.w4.clone().unwrap());
        assert_eq!((w3.value.re, w4.value.re), (1.0, 1.0));
        // (1/√2)² is one ulp above 1/2 in binary floating point.
        assert!((w3.postselect_prob - 0.5).abs() < 1e-15 && (w4.postselect_prob - 0.5).abs() < 1e-15);
        assert_eq!(interferometer::detection_probabilities(&cfg), (0.5, 0.5));
        assert!(!w3.anomalous_real && !w4.anomalous_real);

        let w = mz_weak_values(&MZConfig::new(H, H).unwrap()).unwrap();
        assert!(w.w3.clone().unwrap().value.norm() < 1e-15);
        assert!(matches!(w.w4, Err(Error::OrthogonalPostSelection { .. })));

        let w = mz_weak_values(&MZConfig::from_beta(0.5).unwrap()).unwrap();
        assert!(rel_close(w.w3.clone().unwrap().value.re, 2.0 - 3f64.sqrt(), 1e-13));
        assert!(rel_close(w.w4.clone().unwrap().value.re, 2.0 + 3f64.sqrt(), 1e-13));
        assert!((w.w3.clone().unwrap().value.re - 0.2679).abs() < 1e-4);
        assert!((w.w4.clone().unwrap().value.re - 3.7321).abs() < 1e-4);
    }

    #[test]
    fn matrix_weak_values_match_closed_forms() {
        for beta in beta_grid(1001) {
            let cfg = MZConfig::from_beta(beta).unwrap();
            let m = mz_weak_values(&cfg).unwrap();
            let (c3, c4) = mz_weak_values_closed_form(&cfg).unwrap();
            let (p3, p4) = interferometer::detection_probabilities(&cfg);
            for (got, want, p) in [(&m.w3, c3, p3), (&m.w4, c4, p4)] {
                match (got, want) {
                    (Ok(w), Some(c)) => {
                        assert!(rel_close(w.value.re, c, 1e-12), "beta {beta}: {} vs {c}", w.value.re);
                        assert!((w.postselect_prob - p).abs() < 1e-12);
                    }
                    (Err(Error::OrthogonalPostSelection { .. }), None) => {}
                    other => panic!("beta {beta}: mismatch {other:?}"),
                }
            }
        }
    }

    #[test]
    fn reciprocal_and_exclusive_anomaly() {
        for beta in beta_grid(10_001) {
            let cfg = MZConfig::from_beta(beta).unwrap();
            let (c3, c4) = mz_weak_values_closed_form(&cfg).unwrap();
            if let (Some(w3), Some(w4)) = (c3, c4) {
                assert!((w3 * w4 - 1.0).abs() < 1e-12);
                assert!(!(w3.abs() > 1.0 && w4.abs() > 1.0));
            }
        }
    }

    #[test]
    fn anomaly_iff_asymmetric_input() {
        for k in 1..1000 {
            let beta = k as f64 / 1000.0;
            let cfg = MZConfig::from_beta(beta).unwrap();
            if (cfg.alpha() - cfg.beta()).abs() < 1e-9 {
                continue;
            }
            let w = mz_weak_values(&cfg).unwrap();
            assert!(w.exactly_one_anomalous(), "beta {beta}");
        }
    }

    #[test]
    fn closed_form_requires_zero_phase() {
        let cfg = MZConfig::from_beta(0.2).unwrap().with_phi(0.1).unwrap();
        assert!(mz_weak_values_closed_form(&cfg).is_err());
        // The matrix route still works and matches the port probabilities.
        let w = mz_weak_values(&cfg).unwrap();
        let (p3, p4) = interferometer::detection_probabilities(&cfg);
        assert!((w.w3.clone().unwrap().postselect_prob - p3).abs() < 1e-12);
        assert!((w.w4.clone().unwrap().postselect_prob - p4).abs() < 1e-12);
    }
}
