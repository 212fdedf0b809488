//! Macrorealist feasibility of dichotomic moment data.
//!
//! Two-time data `(⟨M₂⟩, ⟨M₃⟩, ⟨M₂M₃⟩)` admit a classical joint model iff the
//! moment-matching table is non-negative, iff all four two-time LG
//! quantities are non-negative. [`feasibility_oracle`] reaches the same
//! verdict from the deterministic vertices `{±1}²`, and
//! [`vertex_feasibility`] handles any number of dichotomic variables.

use good_lp::{constraint, microlp, variable, Expression, ProblemVariables, ResolutionError, Solution, SolverModel};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interferometer::{self, MZConfig};
use crate::qcore::{Outcome, STRUCTURE_TOL};
use crate::quasiprob::{self, QuasiprobTable, ThreeTimeSuite};
use crate::lgi;

/// Two-time moments `(⟨M₂⟩, ⟨M₃⟩, ⟨M₂M₃⟩)`, each in `[−1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTriple {
    e2: f64,
    e3: f64,
    e23: f64,
}

impl CorrelationTriple {
    /// Values up to `1e-12` outside the range are clamped.
    pub fn new(e2: f64, e3: f64, e23: f64) -> Result<Self> {
        let check = |name, v: f64| {
            if !v.is_finite() || v.abs() > 1.0 + STRUCTURE_TOL {
                Err(Error::OutOfRange {
                    name,
                    value: v,
                    constraint: "moments must lie in [-1, 1]",
                })
            } else {
                Ok(v.clamp(-1.0, 1.0))
            }
        };
        Ok(Self {
            e2: check("e2", e2)?,
            e3: check("e3", e3)?,
            e23: check("e23", e23)?,
        })
    }

    pub fn e2(&self) -> f64 {
        self.e2
    }

    pub fn e3(&self) -> f64 {
        self.e3
    }

    pub fn e23(&self) -> f64 {
        self.e23
    }

    /// The four LG quantities in `K31..K34` order.
    pub fn lg_values(&self) -> [f64; 4] {
        lgi::lg_values_from_moments(self.e2, self.e3, self.e23)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    /// The moment-matching joint; present only when it is a probability table.
    pub witness: Option<QuasiprobTable>,
    /// Smallest entry of the candidate joint.
    pub margin: f64,
}

impl FeasibilityVerdict {
    fn from_table(table: QuasiprobTable) -> Self {
        let margin = table.min_entry();
        let feasible = margin >= -STRUCTURE_TOL;
        Self {
            feasible,
            witness: feasible.then_some(table),
            margin,
        }
    }
}

/// Verdict from the moment expansion.
pub fn macrorealist_feasible(t: &CorrelationTriple) -> FeasibilityVerdict {
    let table = quasiprob::mr_reading(t.e2, t.e3, t.e23)
        .expect("triple components are range-checked at construction");
    FeasibilityVerdict::from_table(table)
}

/// One linear constraint `Σ_v w_v Π_{k ∈ vars} s_k(v) = target`.
/// An empty `vars` is the normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentConstraint {
    pub vars: Vec<usize>,
    pub target: f64,
}

impl MomentConstraint {
    pub fn new(vars: &[usize], target: f64) -> Self {
        Self {
            vars: vars.to_vec(),
            target,
        }
    }
}

/// Weights over the `2ⁿ` vertices. Vertex `v` assigns variable `k` the
/// outcome with [`Outcome::index`] equal to bit `k` of `v`.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSolution {
    pub weights: Vec<f64>,
    pub margin: f64,
    pub feasible: bool,
}

/// Sign of variable `k` at vertex `v`.
pub fn vertex_sign(v: usize, k: usize) -> f64 {
    if (v >> k) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn coefficient(v: usize, vars: &[usize]) -> f64 {
    vars.iter().map(|&k| vertex_sign(v, k)).product()
}

/// Searches for vertex weights meeting every constraint. The margin is the
/// largest achievable minimum weight; square nonsingular systems are solved
/// directly, all others through a linear program.
pub fn vertex_feasibility(n_vars: usize, constraints: &[MomentConstraint]) -> Result<VertexSolution> {
    if n_vars == 0 || n_vars > 16 {
        return Err(Error::OutOfRange {
            name: "n_vars",
            value: n_vars as f64,
            constraint: "between 1 and 16 variables",
        });
    }
    if let Some(c) = constraints.iter().find(|c| c.vars.iter().any(|&k| k >= n_vars)) {
        return Err(Error::OutOfRange {
            name: "constraint variable",
            value: c.vars.iter().copied().max().unwrap_or(0) as f64,
            constraint: "variable index below n_vars",
        });
    }
    let n_vertices = 1usize << n_vars;
    if constraints.len() == n_vertices {
        if let Some(weights) = solve_square(n_vertices, constraints) {
            let margin = weights.iter().copied().fold(f64::INFINITY, f64::min);
            return Ok(VertexSolution {
                feasible: margin >= -STRUCTURE_TOL,
                weights,
                margin,
            });
        }
    }
    solve_lp(n_vertices, constraints)
}

fn solve_square(n: usize, constraints: &[MomentConstraint]) -> Option<Vec<f64>> {
    let mut a: Vec<Vec<f64>> = constraints
        .iter()
        .map(|c| {
            let mut row: Vec<f64> = (0..n).map(|v| coefficient(v, &c.vars)).collect();
            row.push(c.target);
            row
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < STRUCTURE_TOL {
            return None;
        }
        a.swap(col, pivot);
        let (top, rest) = a.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in rest.iter_mut() {
            let f = row[col] / pivot_row[col];
            if f != 0.0 {
                row[col..].iter_mut().zip(&pivot_row[col..]).for_each(|(x, p)| *x -= f * p);
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    Some(x)
}

fn solve_lp(n: usize, constraints: &[MomentConstraint]) -> Result<VertexSolution> {
    let mut vars = ProblemVariables::new();
    let w: Vec<_> = (0..n).map(|_| vars.add(variable())).collect();
    let t = vars.add(variable().max(1.0));
    let mut model = vars.maximise(t).using(microlp);
    for c in constraints {
        let mut lhs = Expression::from(0.0);
        for (v, &wv) in w.iter().enumerate() {
            lhs.add_mul(coefficient(v, &c.vars), wv);
        }
        model = model.with(constraint!(lhs == c.target));
    }
    for &wv in &w {
        model = model.with(constraint!(wv - t >= 0.0));
    }
    match model.solve() {
        Ok(sol) => {
            let weights: Vec<f64> = w.iter().map(|&wv| sol.value(wv)).collect();
            let margin = sol.value(t);
            Ok(VertexSolution {
                feasible: margin >= -STRUCTURE_TOL,
                weights,
                margin,
            })
        }
        Err(ResolutionError::Infeasible) => Ok(VertexSolution {
            weights: vec![f64::NAN; n],
            margin: f64::NEG_INFINITY,
            feasible: false,
        }),
        Err(e) => Err(Error::Solver(e.to_string())),
    }
}

/// Verdict from the deterministic vertices `(m₂, m₃) ∈ {±1}²`.
pub fn feasibility_oracle(t: &CorrelationTriple) -> FeasibilityVerdict {
    let constraints = [
        MomentConstraint::new(&[], 1.0),
        MomentConstraint::new(&[0], t.e2),
        MomentConstraint::new(&[1], t.e3),
        MomentConstraint::new(&[0, 1], t.e23),
    ];
    let sol = vertex_feasibility(2, &constraints).expect("two-variable system is well formed");
    let mut q = [[0.0; 2]; 2];
    for (v, w) in sol.weights.iter().enumerate() {
        q[v & 1][v >> 1] = *w;
    }
    FeasibilityVerdict::from_table(QuasiprobTable::from_entries(q, 0.0))
}

/// The interferometer triple `(α²−β², p₄−p₃, ⟨M₂M₃⟩)` and its verdict.
pub fn mz_triple(cfg: &MZConfig) -> Result<CorrelationTriple> {
    let (p3, p4) = interferometer::detection_probabilities(cfg);
    let e2 = cfg.alpha() * cfg.alpha() - cfg.beta() * cfg.beta();
    let e23 = if cfg.phi() == 0.0 {
        0.0
    } else {
        let pre = interferometer::input_state(cfg)?;
        let m3 = interferometer::effective_output_observable(cfg)?;
        lgi::sequential_correlation(&pre, &interferometer::path_observable(), &m3)?
    };
    CorrelationTriple::new(e2, p4 - p3, e23)
}

pub fn mz_verdict(cfg: &MZConfig) -> Result<FeasibilityVerdict> {
    Ok(macrorealist_feasible(&mz_triple(cfg)?))
}

/// Moments of three dichotomic variables:
/// `[⟨M₁⟩, ⟨M₂⟩, ⟨M₃⟩, ⟨M₁M₂⟩, ⟨M₁M₃⟩, ⟨M₂M₃⟩]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeTimeMoments(pub [f64; 6]);

impl ThreeTimeMoments {
    /// Moments implied by the pairwise quasiprobability tables.
    pub fn from_suite(suite: &ThreeTimeSuite) -> Self {
        let (e1, e2, e12) = suite.pairs[0].moments();
        let (_, e3, e13) = suite.pairs[1].moments();
        let e23 = suite.pairs[2].correlation();
        Self([e1, e2, e3, e12, e13, e23])
    }
}

/// Whether a joint distribution over `{±1}³` matches all six moments.
pub fn three_time_feasible(m: &ThreeTimeMoments) -> Result<VertexSolution> {
    let [e1, e2, e3, e12, e13, e23] = m.0;
    vertex_feasibility(
        3,
        &[
            MomentConstraint::new(&[], 1.0),
            MomentConstraint::new(&[0], e1),
            MomentConstraint::new(&[1], e2),
            MomentConstraint::new(&[2], e3),
            MomentConstraint::new(&[0, 1], e12),
            MomentConstraint::new(&[0, 2], e13),
            MomentConstraint::new(&[1, 2], e23),
        ],
    )
}

/// Vertex index for an outcome assignment, one outcome per variable.
pub fn vertex_index(outcomes: &[Outcome]) -> usize {
    outcomes.iter().enumerate().map(|(k, o)| o.index() << k).sum()
}
