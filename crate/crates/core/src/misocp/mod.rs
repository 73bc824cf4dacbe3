//! The mixed-integer second-order-cone program: assembly from a planning
//! problem, continuous relaxations, and branch-and-bound.

pub mod backend;
pub mod bnb;
pub mod dynamics;

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub use backend::{
    BackendSolution, BackendStatus, ClarabelBackend, ConeRow, ConicBackend, ConicProblem, LinearRow, SparseRow,
};
pub use bnb::{solve, solve_with, PlanResult, PlanStatus, SolverSettings};
pub use dynamics::{discretize_double_integrator, velocity_polytope, LinearCost, PlanningProblem, Polytope};

/// Column order: states `x_1..x_N` (by time, then component), inputs
/// `u_0..u_{N−1}`, binaries in `(t, j, i)` order, auxiliaries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub horizon: usize,
    pub state_dim: usize,
    pub input_dim: usize,
    pub binaries: usize,
    pub auxiliaries: usize,
}

impl ColumnMap {
    /// Column of component `k` of `x_t`, `t ∈ 1..=N`.
    pub fn state(&self, t: usize, k: usize) -> usize {
        (t - 1) * self.state_dim + k
    }

    /// Column of component `k` of `u_t`, `t ∈ 0..N`.
    pub fn input(&self, t: usize, k: usize) -> usize {
        self.horizon * self.state_dim + t * self.input_dim + k
    }

    pub fn binary(&self, b: usize) -> usize {
        self.continuous() + b
    }

    pub fn auxiliary(&self, a: usize) -> usize {
        self.continuous() + self.binaries + a
    }

    /// State and input columns.
    pub fn continuous(&self) -> usize {
        self.horizon * (self.state_dim + self.input_dim)
    }

    pub fn total(&self) -> usize {
        self.continuous() + self.binaries + self.auxiliaries
    }
}

/// Itemized row counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowCounts {
    pub dynamics: usize,
    pub input: usize,
    pub state: usize,
    pub cardinality: usize,
    pub chance_cones: usize,
    pub robust_chance_cones: usize,
    pub norm_cones: usize,
}

impl RowCounts {
    pub fn total(&self) -> usize {
        self.dynamics + self.input + self.state + self.cardinality + self.chance_cones + self.norm_cones
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Misocp {
    pub columns: ColumnMap,
    pub initial_state: Vec<f64>,
    pub objective: Vec<f64>,
    pub dynamics: Vec<LinearRow>,
    pub input_rows: Vec<LinearRow>,
    pub state_rows: Vec<LinearRow>,
    /// Integer rows `Σ z ≤ F_j − 1`.
    pub cardinality: Vec<LinearRow>,
    pub chance_cones: Vec<ConeRow>,
    /// `‖x̃‖ ≤ s` for rows with a mean-radius margin.
    pub norm_cones: Vec<ConeRow>,
    /// Chance-cone positions whose row carries a mean-radius margin.
    pub robust_rows: Vec<usize>,
}

fn sparse(values: impl IntoIterator<Item = (usize, f64)>) -> SparseRow {
    values.into_iter().filter(|&(_, v)| v != 0.0).collect()
}

impl Misocp {
    pub fn row_counts(&self) -> RowCounts {
        RowCounts {
            dynamics: self.dynamics.len(),
            input: self.input_rows.len(),
            state: self.state_rows.len(),
            cardinality: self.cardinality.len(),
            chance_cones: self.chance_cones.len(),
            robust_chance_cones: self.robust_rows.len(),
            norm_cones: self.norm_cones.len(),
        }
    }

    pub fn binary_columns(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.columns.binaries).map(|b| self.columns.binary(b))
    }

    /// Continuous problem with each binary confined to `bounds[b]`.
    pub fn relaxation(&self, bounds: &[(f64, f64)]) -> ConicProblem {
        let mut equalities = self.dynamics.clone();
        let mut inequalities: Vec<LinearRow> = self
            .input_rows
            .iter()
            .chain(&self.state_rows)
            .chain(&self.cardinality)
            .cloned()
            .collect();
        for (b, &(lo, hi)) in bounds.iter().enumerate() {
            let col = self.columns.binary(b);
            if lo == hi {
                equalities.push(LinearRow::new(vec![(col, 1.0)], lo));
            } else {
                inequalities.push(LinearRow::new(vec![(col, 1.0)], hi));
                inequalities.push(LinearRow::new(vec![(col, -1.0)], -lo));
            }
        }
        ConicProblem {
            columns: self.columns.total(),
            objective: self.objective.clone(),
            equalities,
            inequalities,
            cones: self.chance_cones.iter().chain(&self.norm_cones).cloned().collect(),
        }
    }

    /// Largest violation of any row at `w`, counting distance of binaries
    /// from `{0, 1}`.
    pub fn replay(&self, w: &[f64]) -> f64 {
        let eq = self.dynamics.iter().map(|r| (backend::dot(&r.coeffs, w) - r.rhs).abs());
        let ineq = self
            .input_rows
            .iter()
            .chain(&self.state_rows)
            .chain(&self.cardinality)
            .map(|r| (backend::dot(&r.coeffs, w) - r.rhs).max(0.0));
        let cones = self.chance_cones.iter().chain(&self.norm_cones).map(|r| (-r.slack(w)).max(0.0));
        let integrality = self.binary_columns().map(|c| w[c].abs().min((w[c] - 1.0).abs()));
        eq.chain(ineq).chain(cones).chain(integrality).fold(0.0, f64::max)
    }

    pub fn objective_value(&self, w: &[f64]) -> f64 {
        self.objective.iter().zip(w).map(|(c, x)| c * x).sum()
    }
}

/// Builds the MISOCP with states kept as variables linked by dynamics rows.
pub fn assemble(problem: &PlanningProblem) -> Result<Misocp> {
    problem.validate()?;
    let (n, nx, nu) = (problem.horizon, problem.state_dim(), problem.input_dim());
    let robust_rows: Vec<usize> = problem
        .chance
        .as_ref()
        .map(|c| {
            c.rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r.norm_margin > 0.0)
                .map(|(k, _)| k)
                .collect()
        })
        .unwrap_or_default();
    let columns = ColumnMap {
        horizon: n,
        state_dim: nx,
        input_dim: nu,
        binaries: problem.chance.as_ref().map_or(0, |c| c.layout.count()),
        auxiliaries: robust_rows.len(),
    };

    let mut objective = vec![0.0; columns.total()];
    for t in 0..n {
        for k in 0..nx {
            objective[columns.state(t + 1, k)] = problem.cost.state[t][k];
        }
        for k in 0..nu {
            objective[columns.input(t, k)] = problem.cost.input[t][k];
        }
    }

    // x_{t+1} − A_t x_t − B_t u_t = 0, with x_0 moved to the right-hand side
    let mut dynamics = Vec::with_capacity(n * nx);
    for (t, (a, b)) in problem.dynamics.iter().enumerate() {
        for r in 0..nx {
            let mut coeffs = vec![(columns.state(t + 1, r), 1.0)];
            let mut rhs = 0.0;
            for c in 0..nx {
                if t == 0 {
                    rhs += a[(r, c)] * problem.initial_state[c];
                } else {
                    coeffs.push((columns.state(t, c), -a[(r, c)]));
                }
            }
            coeffs.extend((0..nu).map(|c| (columns.input(t, c), -b[(r, c)])));
            dynamics.push(LinearRow::new(sparse(coeffs), rhs));
        }
    }

    let polytope_rows = |poly: &Polytope, col: &dyn Fn(usize, usize) -> usize, steps: std::ops::Range<usize>| {
        steps
            .flat_map(|t| {
                (0..poly.len()).map(move |r| {
                    let coeffs = sparse((0..poly.dimension()).map(|k| (col(t, k), poly.rows[(r, k)])));
                    LinearRow::new(coeffs, poly.rhs[r])
                })
            })
            .collect::<Vec<_>>()
    };
    let input_rows = polytope_rows(&problem.inputs, &|t, k| columns.input(t, k), 0..n);
    let state_rows = polytope_rows(&problem.states, &|t, k| columns.state(t, k), 1..n + 1);

    let mut cardinality = Vec::new();
    let mut chance_cones = Vec::new();
    let mut norm_cones = Vec::new();
    if let Some(chance) = &problem.chance {
        cardinality = chance
            .cardinality
            .iter()
            .map(|row| {
                LinearRow::new(
                    row.members.iter().map(|&b| (columns.binary(b), 1.0)).collect(),
                    row.rhs as f64,
                )
            })
            .collect();
        let sel = &chance.selector;
        let p = sel.nrows();
        let lift = |t: usize, weights: &dyn Fn(usize) -> f64| -> SparseRow {
            sparse((0..nx).map(|c| (columns.state(t, c), (0..p).map(|r| weights(r) * sel[(r, c)]).sum())))
        };
        let mut aux = 0;
        for row in &chance.rows {
            let b = chance.layout.index(row.t, row.obstacle, row.face);
            let lhs = (0..row.cone.nrows())
                .map(|k| lift(row.t, &|r| row.cone[(k, r)]))
                .collect();
            let lhs_const = (0..row.cone.nrows()).map(|k| row.cone[(k, p)]).collect();
            let mut rhs = lift(row.t, &|r| row.mean[r]);
            rhs.push((columns.binary(b), row.big_m));
            if row.norm_margin > 0.0 {
                let s = columns.auxiliary(aux);
                aux += 1;
                rhs.push((s, -row.norm_margin));
                let mut norm_lhs: Vec<SparseRow> = (0..p).map(|r| lift(row.t, &|q| if q == r { 1.0 } else { 0.0 })).collect();
                norm_lhs.push(vec![]);
                let mut norm_const = vec![0.0; p];
                norm_const.push(1.0);
                norm_cones.push(ConeRow {
                    lhs: norm_lhs,
                    lhs_const: norm_const,
                    rhs: vec![(s, 1.0)],
                    rhs_const: 0.0,
                });
            }
            chance_cones.push(ConeRow {
                lhs,
                lhs_const,
                rhs,
                rhs_const: row.mean[p],
            });
        }
    }

    let m = Misocp {
        columns,
        initial_state: problem.initial_state.iter().copied().collect(),
        objective,
        dynamics,
        input_rows,
        state_rows,
        cardinality,
        chance_cones,
        norm_cones,
        robust_rows,
    };
    let counts = m.row_counts();
    log::info!(
        "assembled MISOCP: {} continuous, {} binary, {} auxiliary columns; rows: {} dynamics, {} input, {} state, \
         {} cardinality, {} chance cones ({} robust), {} norm cones, {} total",
        m.columns.continuous(),
        m.columns.binaries,
        m.columns.auxiliaries,
        counts.dynamics,
        counts.input,
        counts.state,
        counts.cardinality,
        counts.chance_cones,
        counts.robust_chance_cones,
        counts.norm_cones,
        counts.total()
    );
    Ok(m)
}
