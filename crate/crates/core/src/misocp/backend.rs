//! Continuous second-order-cone subproblems and the solver backends that
//! handle them.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use serde::{Deserialize, Serialize};

/// Sparse linear form `Σ coeff · w[col]`.
pub type SparseRow = Vec<(usize, f64)>;

pub fn dot(row: &[(usize, f64)], w: &[f64]) -> f64 {
    row.iter().map(|&(c, v)| v * w[c]).sum()
}

/// `coeffs · w (= | ≤) rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearRow {
    pub coeffs: SparseRow,
    pub rhs: f64,
}

impl LinearRow {
    pub fn new(coeffs: SparseRow, rhs: f64) -> Self {
        Self { coeffs, rhs }
    }
}

/// `‖(lhs_k · w + lhs_const_k)_k‖₂ ≤ rhs · w + rhs_const`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeRow {
    pub lhs: Vec<SparseRow>,
    pub lhs_const: Vec<f64>,
    pub rhs: SparseRow,
    pub rhs_const: f64,
}

impl ConeRow {
    /// `rhs − ‖lhs‖`, nonnegative iff the row holds.
    pub fn slack(&self, w: &[f64]) -> f64 {
        let norm = self
            .lhs
            .iter()
            .zip(&self.lhs_const)
            .map(|(r, c)| {
                let v = dot(r, w) + c;
                v * v
            })
            .sum::<f64>()
            .sqrt();
        dot(&self.rhs, w) + self.rhs_const - norm
    }
}

/// `min cᵀw` subject to linear equalities, inequalities and cones.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ConicProblem {
    pub columns: usize,
    pub objective: Vec<f64>,
    pub equalities: Vec<LinearRow>,
    pub inequalities: Vec<LinearRow>,
    pub cones: Vec<ConeRow>,
}

impl ConicProblem {
    /// Largest violation of any row at `w` (0 when feasible).
    pub fn max_violation(&self, w: &[f64]) -> f64 {
        let eq = self.equalities.iter().map(|r| (dot(&r.coeffs, w) - r.rhs).abs());
        let ineq = self.inequalities.iter().map(|r| (dot(&r.coeffs, w) - r.rhs).max(0.0));
        let cone = self.cones.iter().map(|r| (-r.slack(w)).max(0.0));
        eq.chain(ineq).chain(cone).fold(0.0, f64::max)
    }

    pub fn objective_value(&self, w: &[f64]) -> f64 {
        self.objective.iter().zip(w).map(|(c, x)| c * x).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BackendSolution {
    pub status: BackendStatus,
    pub primal: Vec<f64>,
    pub objective: f64,
}

/// Solves continuous conic problems. `Err` is reserved for numerical
/// failure; infeasibility is a status.
pub trait ConicBackend {
    fn solve(&self, problem: &ConicProblem) -> Result<BackendSolution, String>;
}

/// Interior-point backend built on Clarabel.
///
/// Subproblems whose feasible set has no interior (typical when branching
/// pins a face row against a state bound) can stall the interior-point
/// method. Those are retried elastically: first `min t` with every
/// inequality and cone relaxed by `t ≥ 0`; a node with `t* > feasibility`
/// is infeasible, otherwise it is re-solved with rows relaxed by
/// `t* + tolerance · 10`, which restores an interior. Reported optima whose
/// rows are violated by more than `feasibility` take the same route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClarabelBackend {
    pub tolerance: f64,
    pub max_iter: u32,
    pub feasibility: f64,
}

impl Default for ClarabelBackend {
    fn default() -> Self {
        Self {
            tolerance: 1e-8,
            max_iter: 200,
            feasibility: 1e-6,
        }
    }
}

enum Raw {
    Done(BackendStatus, Vec<f64>),
    Stalled(SolverStatus),
}

impl ClarabelBackend {
    fn solve_raw(&self, problem: &ConicProblem) -> Result<Raw, String> {
        let n = problem.columns;
        let (mut rows, mut cols, mut vals) = (Vec::new(), Vec::new(), Vec::new());
        let mut b = Vec::new();
        let mut cones = Vec::new();
        let mut push = |coeffs: &[(usize, f64)], scale: f64, rhs: f64, b: &mut Vec<f64>| {
            let r = b.len();
            for &(c, v) in coeffs {
                rows.push(r);
                cols.push(c);
                vals.push(scale * v);
            }
            b.push(rhs);
        };
        for r in &problem.equalities {
            push(&r.coeffs, 1.0, r.rhs, &mut b);
        }
        if !problem.equalities.is_empty() {
            cones.push(SupportedConeT::ZeroConeT(problem.equalities.len()));
        }
        for r in &problem.inequalities {
            push(&r.coeffs, 1.0, r.rhs, &mut b);
        }
        if !problem.inequalities.is_empty() {
            cones.push(SupportedConeT::NonnegativeConeT(problem.inequalities.len()));
        }
        for cone in &problem.cones {
            // s = b − A w = [rhs·w + rhs_const; lhs·w + lhs_const]
            push(&cone.rhs, -1.0, cone.rhs_const, &mut b);
            for (r, c) in cone.lhs.iter().zip(&cone.lhs_const) {
                push(r, -1.0, *c, &mut b);
            }
            cones.push(SupportedConeT::SecondOrderConeT(cone.lhs.len() + 1));
        }
        let a = CscMatrix::new_from_triplets(b.len(), n, rows, cols, vals);
        let p = CscMatrix::zeros((n, n));
        let settings = DefaultSettings {
            verbose: false,
            max_iter: self.max_iter,
            tol_feas: self.tolerance,
            tol_gap_abs: self.tolerance,
            tol_gap_rel: self.tolerance,
            ..DefaultSettings::default()
        };
        let mut solver = DefaultSolver::new(&p, &problem.objective, &a, &b, &cones, settings)
            .map_err(|e| format!("setup failed: {e}"))?;
        solver.solve();
        let sol = &solver.solution;
        Ok(match sol.status {
            SolverStatus::Solved | SolverStatus::AlmostSolved => Raw::Done(BackendStatus::Optimal, sol.x.clone()),
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
                Raw::Done(BackendStatus::Infeasible, sol.x.clone())
            }
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => {
                Raw::Done(BackendStatus::Unbounded, sol.x.clone())
            }
            other => Raw::Stalled(other),
        })
    }

    fn elastic(&self, problem: &ConicProblem, stalled: SolverStatus) -> Result<BackendSolution, String> {
        let t = problem.columns;
        let mut phase1 = relaxed(problem, 0.0);
        phase1.columns += 1;
        phase1.objective = vec![0.0; t + 1];
        phase1.objective[t] = 1.0;
        for r in &mut phase1.inequalities {
            r.coeffs.push((t, -1.0));
        }
        for c in &mut phase1.cones {
            c.rhs.push((t, 1.0));
        }
        phase1.inequalities.push(LinearRow::new(vec![(t, -1.0)], 0.0));
        let gap = match self.solve_raw(&phase1)? {
            Raw::Done(BackendStatus::Optimal, x) => x[t].max(0.0),
            Raw::Done(status, _) => return Err(format!("elastic phase ended {status:?} after {stalled:?}")),
            Raw::Stalled(s) => return Err(format!("solver stopped with status {stalled:?}, elastic phase {s:?}")),
        };
        if gap > self.feasibility {
            return Ok(BackendSolution {
                status: BackendStatus::Infeasible,
                primal: vec![0.0; t],
                objective: f64::INFINITY,
            });
        }
        let widened = relaxed(problem, gap + 10.0 * self.tolerance);
        match self.solve_raw(&widened)? {
            Raw::Done(status, x) => Ok(BackendSolution {
                status,
                objective: problem.objective_value(&x),
                primal: x,
            }),
            Raw::Stalled(s) => Err(format!("solver stopped with status {stalled:?}, widened problem {s:?}")),
        }
    }
}

/// Every inequality and cone loosened by `delta`.
fn relaxed(problem: &ConicProblem, delta: f64) -> ConicProblem {
    let mut out = problem.clone();
    for r in &mut out.inequalities {
        r.rhs += delta;
    }
    for c in &mut out.cones {
        c.rhs_const += delta;
    }
    out
}

impl ConicBackend for ClarabelBackend {
    fn solve(&self, problem: &ConicProblem) -> Result<BackendSolution, String> {
        match self.solve_raw(problem)? {
            Raw::Done(BackendStatus::Optimal, x) if problem.max_violation(&x) > self.feasibility => {
                self.elastic(problem, SolverStatus::AlmostSolved)
            }
            Raw::Done(status, x) => Ok(BackendSolution {
                status,
                objective: problem.objective_value(&x),
                primal: x,
            }),
            Raw::Stalled(s) => self.elastic(problem, s),
        }
    }
}
