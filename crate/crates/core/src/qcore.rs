//! Small-dimension complex linear algebra: pure states, operators,
//! projectors, dichotomic observables and Born probabilities.
//!
//! Everything here is dense and row-major. The dimensions of interest are 2
//! (a two-path interferometer) and occasionally 4, so no attempt is made at
//! blocking or SIMD.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complex amplitude stored as a Cartesian `re`/`im` pair.
pub type ComplexScalar = Complex64;

/// Tolerance for structural checks (hermiticity, unitarity, projector algebra).
pub const STRUCTURE_TOL: f64 = 1e-12;

/// Tolerance applied to user-supplied data such as input normalization.
pub const INPUT_TOL: f64 = 1e-9;

pub(crate) const ZERO: ComplexScalar = Complex64::new(0.0, 0.0);
pub(crate) const ONE: ComplexScalar = Complex64::new(1.0, 0.0);

/// What to do with a state whose squared norm is not 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Normalization {
    /// Accept only inputs within [`INPUT_TOL`] of unit norm, then rescale.
    #[default]
    Reject,
    /// Rescale any nonzero input.
    Renormalize,
}

/// Normalized pure state on a `dim`-dimensional Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Vec<ComplexScalar>,
}

impl StateVector {
    /// Builds a state, rejecting inputs whose squared norm is off by more than
    /// [`INPUT_TOL`].
    pub fn new(amps: Vec<ComplexScalar>) -> Result<Self> {
        Self::with_policy(amps, Normalization::Reject)
    }

    pub fn with_policy(amps: Vec<ComplexScalar>, policy: Normalization) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::Shape { dim: 0, len: 0 });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("state amplitudes"));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if norm_sq == 0.0 {
            return Err(Error::ZeroVector);
        }
        if policy == Normalization::Reject && (norm_sq - 1.0).abs() > INPUT_TOL {
            return Err(Error::NotNormalized { norm_sq });
        }
        let scale = norm_sq.sqrt().recip();
        Ok(Self {
            amps: amps.into_iter().map(|a| a * scale).collect(),
        })
    }

    /// Real amplitudes, e.g. `α|ψ₁⟩ + β|ψ₂⟩` with real α, β.
    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Computational basis vector `|k⟩`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(k < dim, "basis index {k} out of range for dimension {dim}");
        let mut amps = vec![ZERO; dim];
        amps[k] = ONE;
        Self { amps }
    }

    /// Equal-weight combination `(a ± b)/√2` of two orthonormal states.
    pub fn superpose(a: &StateVector, b: &StateVector, sign: f64) -> Result<Self> {
        check_dims(a.dim(), b.dim())?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self::with_policy(
            a.amps
                .iter()
                .zip(&b.amps)
                .map(|(x, y)| (x + y * sign) * s)
                .collect(),
            Normalization::Renormalize,
        )
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[ComplexScalar] {
        &self.amps
    }

    pub fn amp(&self, k: usize) -> ComplexScalar {
        self.amps[k]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Pure-state density matrix `|s⟩⟨s|`.
    pub fn density(&self) -> Operator {
        Operator::outer(self, self).with_kind(OperatorKind::Hermitian)
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, a) in self.amps.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    Hermitian,
    Unitary,
    General,
}

/// Dense `dim × dim` complex matrix with a kind tag recording which property
/// was verified at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    dim: usize,
    entries: Vec<ComplexScalar>,
    kind: OperatorKind,
}

impl Operator {
    /// Unchecked general matrix from row-major entries.
    pub fn general(dim: usize, entries: Vec<ComplexScalar>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Shape {
                dim,
                len: entries.len(),
            });
        }
        if entries.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("operator entries"));
        }
        Ok(Self {
            dim,
            entries,
            kind: OperatorKind::General,
        })
    }

    pub fn hermitian(dim: usize, entries: Vec<ComplexScalar>) -> Result<Self> {
        let op = Self::general(dim, entries)?;
        let deviation = op.hermiticity_deviation();
        if deviation > STRUCTURE_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(op.with_kind(OperatorKind::Hermitian))
    }

    pub fn unitary(dim: usize, entries: Vec<ComplexScalar>) -> Result<Self> {
        let op = Self::general(dim, entries)?;
        let deviation = op.unitarity_deviation();
        if deviation > STRUCTURE_TOL {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(op.with_kind(OperatorKind::Unitary))
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![ZERO; dim * dim];
        for k in 0..dim {
            entries[k * dim + k] = ONE;
        }
        Self {
            dim,
            entries,
            kind: OperatorKind::Hermitian,
        }
    }

    /// Diagonal matrix; Hermitian when all entries are real, unitary when all
    /// have unit modulus, general otherwise.
    pub fn diagonal(diag: &[ComplexScalar]) -> Self {
        let dim = diag.len();
        let mut entries = vec![ZERO; dim * dim];
        for (k, d) in diag.iter().enumerate() {
            entries[k * dim + k] = *d;
        }
        let kind = if diag.iter().all(|d| d.im == 0.0) {
            OperatorKind::Hermitian
        } else if diag.iter().all(|d| (d.norm() - 1.0).abs() <= STRUCTURE_TOL) {
            OperatorKind::Unitary
        } else {
            OperatorKind::General
        };
        Self { dim, entries, kind }
    }

    /// Outer product `|a⟩⟨b|`.
    pub fn outer(a: &StateVector, b: &StateVector) -> Self {
        assert_eq!(a.dim(), b.dim(), "outer product of mismatched dimensions");
        let dim = a.dim();
        let mut entries = Vec::with_capacity(dim * dim);
        for r in 0..dim {
            for c in 0..dim {
                entries.push(a.amps[r] * b.amps[c].conj());
            }
        }
        Self {
            dim,
            entries,
            kind: OperatorKind::General,
        }
    }

    /// Rank-one projector `|s⟩⟨s|`.
    pub fn projector(s: &StateVector) -> Self {
        Self::outer(s, s).with_kind(OperatorKind::Hermitian)
    }

    pub(crate) fn with_kind(mut self, kind: OperatorKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn entries(&self) -> &[ComplexScalar] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> ComplexScalar {
        self.entries[row * self.dim + col]
    }

    pub fn adjoint(&self) -> Self {
        let d = self.dim;
        let mut entries = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                entries.push(self.get(c, r).conj());
            }
        }
        let kind = self.kind;
        Self {
            dim: d,
            entries,
            kind,
        }
    }

    pub fn matmul(&self, rhs: &Operator) -> Result<Self> {
        check_dims(self.dim, rhs.dim)?;
        let d = self.dim;
        let mut entries = vec![ZERO; d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.get(r, k);
                if a == ZERO {
                    continue;
                }
                for c in 0..d {
                    entries[r * d + c] += a * rhs.get(k, c);
                }
            }
        }
        let kind = if self.kind == OperatorKind::Unitary && rhs.kind == OperatorKind::Unitary {
            OperatorKind::Unitary
        } else {
            OperatorKind::General
        };
        Ok(Self {
            dim: d,
            entries,
            kind,
        })
    }

    /// `self + factor · rhs`, tagged Hermitian when both inputs are and the
    /// factor is real.
    pub fn add_scaled(&self, rhs: &Operator, factor: f64) -> Result<Self> {
        check_dims(self.dim, rhs.dim)?;
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a + b * factor)
            .collect();
        let kind = if self.kind == OperatorKind::Hermitian && rhs.kind == OperatorKind::Hermitian {
            OperatorKind::Hermitian
        } else {
            OperatorKind::General
        };
        Ok(Self {
            dim: self.dim,
            entries,
            kind,
        })
    }

    pub fn scale(&self, factor: ComplexScalar) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|a| a * factor).collect(),
            kind: if factor.im == 0.0 && self.kind == OperatorKind::Hermitian {
                OperatorKind::Hermitian
            } else {
                OperatorKind::General
            },
        }
    }

    pub fn trace(&self) -> ComplexScalar {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    /// Matrix-vector product on raw amplitudes, no normalization.
    pub fn act(&self, v: &[ComplexScalar]) -> Vec<ComplexScalar> {
        assert_eq!(v.len(), self.dim, "operator/vector dimension mismatch");
        let d = self.dim;
        (0..d)
            .map(|r| (0..d).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    /// `⟨a|self|b⟩`.
    pub fn sandwich(&self, a: &StateVector, b: &StateVector) -> Result<ComplexScalar> {
        check_dims(self.dim, a.dim())?;
        check_dims(self.dim, b.dim())?;
        Ok(dot(a.amps(), &self.act(b.amps())))
    }

    /// Largest entrywise deviation from `self = self†`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    /// Largest entrywise deviation from `self† self = I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for r in 0..d {
            for c in 0..d {
                let g: ComplexScalar = (0..d).map(|k| self.get(k, r).conj() * self.get(k, c)).sum();
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((g - target).norm());
            }
        }
        worst
    }

    /// Largest entrywise deviation from `P² = P = P†`.
    pub fn projector_deviation(&self) -> f64 {
        let sq = self.matmul(self).expect("square of itself");
        let idem = sq
            .entries
            .iter()
            .zip(&self.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        idem.max(self.hermiticity_deviation())
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_deviation() <= STRUCTURE_TOL
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_deviation() <= STRUCTURE_TOL
    }

    pub fn is_projector(&self) -> bool {
        self.projector_deviation() <= STRUCTURE_TOL
    }

    /// Largest entrywise distance to another operator.
    pub fn max_distance(&self, other: &Operator) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// For a rank-one projector `|f⟩⟨f|`, recovers `|f⟩` up to a global phase.
    pub fn rank_one_vector(&self) -> Result<StateVector> {
        let trace = self.trace().re;
        if (trace - 1.0).abs() > 1e-9 {
            return Err(Error::NotRankOne { trace });
        }
        let d = self.dim;
        let col = (0..d)
            .max_by(|&a, &b| self.get(a, a).re.total_cmp(&self.get(b, b).re))
            .expect("dim > 0");
        let amps: Vec<_> = (0..d).map(|r| self.get(r, col)).collect();
        StateVector::with_policy(amps, Normalization::Renormalize)
    }
}

pub(crate) fn check_dims(left: usize, right: usize) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { left, right })
    }
}

pub(crate) fn dot(a: &[ComplexScalar], b: &[ComplexScalar]) -> ComplexScalar {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// One of the two outcomes of a dichotomic measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn sign(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }

    pub fn from_sign(sign: f64) -> Self {
        if sign >= 0.0 {
            Outcome::Plus
        } else {
            Outcome::Minus
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Plus => "+1",
            Outcome::Minus => "-1",
        })
    }
}

/// Hermitian observable with spectrum `{+1, −1}`, held as its two spectral
/// projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct DichotomicObservable {
    plus: Operator,
    minus: Operator,
}

impl DichotomicObservable {
    /// Checks `P₊² = P₊`, `P₋² = P₋`, `P₊P₋ = 0` and `P₊ + P₋ = I`.
    pub fn new(plus: Operator, minus: Operator) -> Result<Self> {
        check_dims(plus.dim(), minus.dim())?;
        if !plus.is_projector() || !minus.is_projector() {
            return Err(Error::InvalidObservable("spectral parts must be projectors"));
        }
        let d = plus.dim();
        let cross = plus.matmul(&minus)?;
        if cross.max_distance(&Operator::diagonal(&vec![ZERO; d])) > STRUCTURE_TOL {
            return Err(Error::InvalidObservable("projectors are not orthogonal"));
        }
        let sum = plus.add_scaled(&minus, 1.0)?;
        if sum.max_distance(&Operator::identity(d)) > STRUCTURE_TOL {
            return Err(Error::InvalidObservable("projectors do not resolve the identity"));
        }
        Ok(Self {
            plus: plus.with_kind(OperatorKind::Hermitian),
            minus: minus.with_kind(OperatorKind::Hermitian),
        })
    }

    /// `P₊` given, `P₋ = I − P₊`.
    pub fn from_plus_projector(plus: Operator) -> Result<Self> {
        let minus = Operator::identity(plus.dim()).add_scaled(&plus, -1.0)?;
        Self::new(plus, minus)
    }

    /// Two-outcome observable `|plus⟩⟨plus| − |minus⟩⟨minus|` from an
    /// orthonormal pair spanning a qubit.
    pub fn from_basis(plus: &StateVector, minus: &StateVector) -> Result<Self> {
        Self::new(Operator::projector(plus), Operator::projector(minus))
    }

    /// From `M` with `M² = I`, via `P(m) = (I + mM)/2`.
    pub fn from_operator(m: &Operator) -> Result<Self> {
        if !m.is_hermitian() {
            return Err(Error::NotHermitian {
                deviation: m.hermiticity_deviation(),
            });
        }
        let id = Operator::identity(m.dim());
        let plus = id.add_scaled(m, 1.0)?.scale(Complex64::new(0.5, 0.0));
        let minus = id.add_scaled(m, -1.0)?.scale(Complex64::new(0.5, 0.0));
        Self::new(plus, minus)
    }

    pub fn dim(&self) -> usize {
        self.plus.dim()
    }

    pub fn projector(&self, outcome: Outcome) -> &Operator {
        match outcome {
            Outcome::Plus => &self.plus,
            Outcome::Minus => &self.minus,
        }
    }

    /// `M = P₊ − P₋`.
    pub fn operator(&self) -> Operator {
        self.plus
            .add_scaled(&self.minus, -1.0)
            .expect("projectors share a dimension")
    }

    /// The eigenvalue interval `[−1, +1]` spanned by the outcome labels.
    pub fn label_range(&self) -> (f64, f64) {
        (Outcome::Minus.sign(), Outcome::Plus.sign())
    }

    /// Conjugates both projectors, `P → U† P U` (Heisenberg picture).
    pub fn conjugated(&self, u: &Operator) -> Result<Self> {
        let ud = u.adjoint();
        let plus = ud.matmul(&self.plus)?.matmul(u)?;
        let minus = ud.matmul(&self.minus)?.matmul(u)?;
        Self::new(
            plus.with_kind(OperatorKind::Hermitian),
            minus.with_kind(OperatorKind::Hermitian),
        )
    }
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &StateVector, b: &StateVector) -> Result<ComplexScalar> {
    check_dims(a.dim(), b.dim())?;
    Ok(dot(a.amps(), b.amps()))
}

/// `⟨s|M|s⟩` for Hermitian `M`.
pub fn expectation(m: &Operator, s: &StateVector) -> Result<f64> {
    check_dims(m.dim(), s.dim())?;
    let deviation = m.hermiticity_deviation();
    if deviation > STRUCTURE_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let value = m.sandwich(s, s)?;
    if value.im.abs() > STRUCTURE_TOL {
        return Err(Error::Internal(format!(
            "expectation of Hermitian operator has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}

/// `⟨s|P|s⟩` for a projector `P`.
pub fn born_probability(p: &Operator, s: &StateVector) -> Result<f64> {
    check_dims(p.dim(), s.dim())?;
    let deviation = p.projector_deviation();
    if deviation > STRUCTURE_TOL {
        return Err(Error::NotProjector { deviation });
    }
    let pv = p.act(s.amps());
    Ok(pv.iter().map(|a| a.norm_sqr()).sum())
}

/// `U|s⟩` for unitary `U`.
pub fn apply(u: &Operator, s: &StateVector) -> Result<StateVector> {
    check_dims(u.dim(), s.dim())?;
    let deviation = u.unitarity_deviation();
    if deviation > STRUCTURE_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(StateVector { amps: u.act(s.amps()) })
}

/// `Tr[Aρ]` for a general operator and density matrix.
pub fn trace_with(a: &Operator, rho: &Operator) -> Result<ComplexScalar> {
    Ok(a.matmul(rho)?.trace())
}

/// Random states, unitaries and observables for property tests and
/// cross-validation runs.
pub mod sample {
    use rand::Rng;
    use rand_distr::StandardNormal;

    use super::*;

    fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> ComplexScalar {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    }

    /// Haar-distributed pure state.
    pub fn state<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> StateVector {
        let amps = (0..dim).map(|_| gaussian_complex(rng)).collect();
        StateVector::with_policy(amps, Normalization::Renormalize).expect("nonzero gaussian vector")
    }

    /// Haar-distributed unitary (Gram-Schmidt on a Ginibre matrix).
    pub fn unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
        let mut cols: Vec<Vec<ComplexScalar>> = Vec::with_capacity(dim);
        while cols.len() < dim {
            let mut v: Vec<ComplexScalar> = (0..dim).map(|_| gaussian_complex(rng)).collect();
            for q in &cols {
                let proj = dot(q, &v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= proj * y;
                }
            }
            let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if n < 1e-8 {
                continue;
            }
            v.iter_mut().for_each(|x| *x /= n);
            cols.push(v);
        }
        let mut entries = vec![ZERO; dim * dim];
        for (c, col) in cols.iter().enumerate() {
            for (r, a) in col.iter().enumerate() {
                entries[r * dim + c] = *a;
            }
        }
        Operator::unitary(dim, entries).expect("orthonormal columns")
    }

    /// Random Hermitian matrix with Gaussian entries.
    pub fn hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Operator {
        let mut entries = vec![ZERO; dim * dim];
        for r in 0..dim {
            entries[r * dim + r] = Complex64::new(rng.sample(StandardNormal), 0.0);
            for c in r + 1..dim {
                let z = gaussian_complex(rng);
                entries[r * dim + c] = z;
                entries[c * dim + r] = z.conj();
            }
        }
        Operator::hermitian(dim, entries).expect("symmetric construction")
    }

    /// Dichotomic observable whose `+1` eigenspace is spanned by the first
    /// `rank` columns of a random unitary.
    pub fn dichotomic_with_rank<R: Rng + ?Sized>(
        dim: usize,
        rank: usize,
        rng: &mut R,
    ) -> DichotomicObservable {
        let u = unitary(dim, rng);
        let diag: Vec<_> = (0..dim).map(|k| if k < rank { ONE } else { ZERO }).collect();
        let plus = u
            .matmul(&Operator::diagonal(&diag))
            .and_then(|m| m.matmul(&u.adjoint()))
            .expect("same dimension");
        let plus = symmetrize(&plus);
        DichotomicObservable::from_plus_projector(plus).expect("projector from unitary")
    }

    /// Random rank-one-split observable on a qubit, or a random split in
    /// higher dimension.
    pub fn dichotomic<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DichotomicObservable {
        let rank = if dim == 2 { 1 } else { rng.random_range(1..dim) };
        dichotomic_with_rank(dim, rank, rng)
    }

    fn symmetrize(m: &Operator) -> Operator {
        let half = Complex64::new(0.5, 0.0);
        m.add_scaled(&m.adjoint(), 1.0)
            .expect("same dimension")
            .scale(half)
            .with_kind(OperatorKind::Hermitian)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> ComplexScalar {
        Complex64::new(re, im)
    }

    fn psi(alpha: f64, beta: f64) -> StateVector {
        StateVector::from_real(&[alpha, beta]).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        let p1 = StateVector::basis(2, 0);
        let p2 = StateVector::basis(2, 1);
        assert_eq!(inner_product(&p1, &p1).unwrap(), ONE);
        assert_eq!(inner_product(&p1, &p2).unwrap(), ZERO);

        let s = psi(3f64.sqrt() / 2.0, 0.5);
        let p3 = StateVector::superpose(&p1, &p2, 1.0).unwrap();
        // Oracle: explicit sum over components.
        let oracle = (3f64.sqrt() / 2.0) * std::f64::consts::FRAC_1_SQRT_2
            + 0.5 * std::f64::consts::FRAC_1_SQRT_2;
        let got = inner_product(&s, &p3).unwrap();
        assert!((got.re - oracle).abs() < 1e-15 && got.im == 0.0);
        assert!((oracle - (3f64.sqrt() + 1.0) / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((got.re - 0.9659).abs() < 1e-4);
    }

    #[test]
    fn inner_product_is_conjugate_linear_in_first_argument() {
        let a = StateVector::new(vec![c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let b = StateVector::new(vec![c(0.0, 1.0), ZERO]).unwrap();
        assert_eq!(inner_product(&a, &b).unwrap(), c(0.0, 0.6));
        assert_eq!(inner_product(&b, &a).unwrap(), c(0.0, -0.6));
    }

    #[test]
    fn inner_product_rejects_dimension_mismatch() {
        let err = inner_product(&StateVector::basis(2, 0), &StateVector::basis(3, 0)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { left: 2, right: 3 });
    }

    #[test]
    fn expectation_examples() {
        let s = psi(3f64.sqrt() / 2.0, 0.5);
        assert!((expectation(&Operator::identity(2), &s).unwrap() - 1.0).abs() < 1e-15);
        let m2 = Operator::diagonal(&[ONE, -ONE]);
        assert!((expectation(&m2, &s).unwrap() - 0.5).abs() < 1e-15);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(expectation(&m2, &psi(h, h)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let m = Operator::general(2, vec![ZERO, ONE, ZERO, ZERO]).unwrap();
        assert!(matches!(
            expectation(&m, &StateVector::basis(2, 0)),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn born_probability_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let p1 = StateVector::basis(2, 0);
        let p2 = StateVector::basis(2, 1);
        let p3 = StateVector::superpose(&p1, &p2, 1.0).unwrap();
        let p4 = StateVector::superpose(&p1, &p2, -1.0).unwrap();
        assert!((born_probability(&Operator::projector(&p3), &p3).unwrap() - 1.0).abs() < 1e-15);
        assert!(born_probability(&Operator::projector(&p4), &psi(h, h)).unwrap() < 1e-30);
        let s = psi(3f64.sqrt() / 2.0, 0.5);
        let oracle = inner_product(&p4, &s).unwrap().norm_sqr();
        let got = born_probability(&Operator::projector(&p4), &s).unwrap();
        assert!((got - oracle).abs() < 1e-15);
        assert!((got - (2.0 - 3f64.sqrt()) / 4.0).abs() < 1e-15);
    }

    #[test]
    fn born_probability_rejects_non_projector() {
        let m = Operator::diagonal(&[ONE, -ONE]);
        assert!(matches!(
            born_probability(&m, &StateVector::basis(2, 0)),
            Err(Error::NotProjector { .. })
        ));
    }

    #[test]
    fn apply_examples() {
        let s = psi(0.6, 0.8);
        assert_eq!(apply(&Operator::identity(2), &s).unwrap(), s);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bs = Operator::unitary(2, vec![c(h, 0.0), c(0.0, h), c(0.0, h), c(h, 0.0)]).unwrap();
        let out = apply(&bs, &StateVector::basis(2, 0)).unwrap();
        assert!((out.amp(0) - c(h, 0.0)).norm() < 1e-15);
        assert!((out.amp(1) - c(0.0, h)).norm() < 1e-15);

        let udu = bs.adjoint().matmul(&bs).unwrap();
        let twice = apply(&udu, &apply(&udu, &s).unwrap()).unwrap();
        for (a, b) in twice.amps().iter().zip(s.amps()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn apply_rejects_non_unitary() {
        let m = Operator::diagonal(&[ONE, c(0.5, 0.0)]);
        assert!(matches!(
            apply(&m, &StateVector::basis(2, 0)),
            Err(Error::NotUnitary { .. })
        ));
    }

    #[test]
    fn normalization_policy() {
        assert!(matches!(
            StateVector::from_real(&[1.0, 1.0]),
            Err(Error::NotNormalized { .. })
        ));
        let s = StateVector::with_policy(vec![ONE, ONE], Normalization::Renormalize).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        // Within the input tolerance: accepted and tightened.
        let s = StateVector::from_real(&[1.0 + 1e-10, 0.0]).unwrap();
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
        assert_eq!(
            StateVector::with_policy(vec![ZERO, ZERO], Normalization::Renormalize),
            Err(Error::ZeroVector)
        );
        assert!(matches!(
            StateVector::from_real(&[f64::NAN, 1.0]),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn dichotomic_validation() {
        let p = Operator::projector(&StateVector::basis(2, 0));
        assert!(DichotomicObservable::new(p.clone(), p.clone()).is_err());
        let obs = DichotomicObservable::from_plus_projector(p).unwrap();
        let m = obs.operator();
        let m2 = m.matmul(&m).unwrap();
        assert!(m2.max_distance(&Operator::identity(2)) < 1e-12);
        let back = DichotomicObservable::from_operator(&m).unwrap();
        assert!(back.projector(Outcome::Minus).max_distance(obs.projector(Outcome::Minus)) < 1e-15);
    }

    #[test]
    fn rank_one_vector_recovers_state_up_to_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let s = sample::state(3, &mut rng);
            let f = Operator::projector(&s).rank_one_vector().unwrap();
            assert!((inner_product(&s, &f).unwrap().norm() - 1.0).abs() < 1e-12);
        }
        let id = Operator::identity(2);
        assert!(matches!(id.rank_one_vector(), Err(Error::NotRankOne { .. })));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn unitaries_preserve_norm(seed in any::<u64>(), dim in 2usize..5) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let u = sample::unitary(dim, &mut rng);
                let s = sample::state(dim, &mut rng);
                let out = apply(&u, &s).unwrap();
                prop_assert!((out.norm_sqr().sqrt() - 1.0).abs() < 1e-12);
            }

            #[test]
            fn dichotomic_projectors_are_complete(seed in any::<u64>(), dim in 2usize..5) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let obs = sample::dichotomic(dim, &mut rng);
                let s = sample::state(dim, &mut rng);
                let total = born_probability(obs.projector(Outcome::Plus), &s).unwrap()
                    + born_probability(obs.projector(Outcome::Minus), &s).unwrap();
                prop_assert!((total - 1.0).abs() < 1e-12);
            }

            #[test]
            fn hermitian_expectations_are_real(seed in any::<u64>(), dim in 2usize..5) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let m = sample::hermitian(dim, &mut rng);
                let s = sample::state(dim, &mut rng);
                let v = m.sandwich(&s, &s).unwrap();
                prop_assert!(v.im.abs() < 1e-12);
                prop_assert!(expectation(&m, &s).is_ok());
            }
        }
    }
}
