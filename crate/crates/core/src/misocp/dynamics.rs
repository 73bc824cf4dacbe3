//! Ego dynamics, input and state polytopes, and the planning problem.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reformulate::ChanceRows;

/// Zero-order-hold discretization of the planar double integrator with state
/// `(p1, p2, v1, v2)` and input `(a1, a2)`.
pub fn discretize_double_integrator(sample_time: f64) -> (DMatrix<f64>, DMatrix<f64>) {
    let t = sample_time;
    #[rustfmt::skip]
    let a = DMatrix::from_row_slice(4, 4, &[
        1.0, 0.0, t, 0.0,
        0.0, 1.0, 0.0, t,
        0.0, 0.0, 1.0, 0.0,
        0.0, 0.0, 0.0, 1.0,
    ]);
    let h = 0.5 * t * t;
    #[rustfmt::skip]
    let b = DMatrix::from_row_slice(4, 2, &[
        h, 0.0,
        0.0, h,
        t, 0.0,
        0.0, t,
    ]);
    (a, b)
}

/// `rows · v ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub rows: DMatrix<f64>,
    pub rhs: DVector<f64>,
}

impl Polytope {
    pub fn new(rows: DMatrix<f64>, rhs: DVector<f64>) -> Result<Self> {
        if rows.nrows() != rhs.len() {
            return Err(Error::Dimension(format!(
                "polytope has {} rows and {} right-hand sides",
                rows.nrows(),
                rhs.len()
            )));
        }
        Ok(Self { rows, rhs })
    }

    pub fn empty(dim: usize) -> Self {
        Self {
            rows: DMatrix::zeros(0, dim),
            rhs: DVector::zeros(0),
        }
    }

    pub fn dimension(&self) -> usize {
        self.rows.ncols()
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }

    /// `lo ≤ v ≤ hi` per coordinate.
    pub fn boxed(lo: &[f64], hi: &[f64]) -> Self {
        let n = lo.len();
        let mut rows = DMatrix::zeros(2 * n, n);
        let mut rhs = DVector::zeros(2 * n);
        for k in 0..n {
            rows[(2 * k, k)] = 1.0;
            rhs[2 * k] = hi[k];
            rows[(2 * k + 1, k)] = -1.0;
            rhs[2 * k + 1] = -lo[k];
        }
        Self { rows, rhs }
    }

    /// Stacks two polytopes over the same space.
    pub fn stack(&self, other: &Polytope) -> Result<Self> {
        if self.dimension() != other.dimension() {
            return Err(Error::Dimension("stacked polytopes differ in dimension".into()));
        }
        let n = self.dimension();
        let m = self.len() + other.len();
        let mut rows = DMatrix::zeros(m, n);
        rows.rows_mut(0, self.len()).copy_from(&self.rows);
        rows.rows_mut(self.len(), other.len()).copy_from(&other.rows);
        let rhs = DVector::from_iterator(m, self.rhs.iter().chain(other.rhs.iter()).copied());
        Ok(Self { rows, rhs })
    }

    /// Per-coordinate bounds implied by single-coordinate rows.
    pub fn axis_bounds(&self) -> Vec<(f64, f64)> {
        let n = self.dimension();
        let mut out = vec![(f64::NEG_INFINITY, f64::INFINITY); n];
        for r in 0..self.len() {
            let nz: Vec<usize> = (0..n).filter(|&k| self.rows[(r, k)] != 0.0).collect();
            if let [k] = nz[..] {
                let a = self.rows[(r, k)];
                let bound = self.rhs[r] / a;
                if a > 0.0 {
                    out[k].1 = out[k].1.min(bound);
                } else {
                    out[k].0 = out[k].0.max(bound);
                }
            }
        }
        out
    }

    pub fn slack(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.rhs - &self.rows * v
    }
}

/// The velocity diamond `|v1/c1 − 1| + |v2/c2 − 1| ≤ 1` on a 4-state,
/// expressed as four facets `s1 v1/c1 + s2 v2/c2 ≤ 1 + s1 + s2`.
pub fn velocity_polytope(center1_mps: f64, center2_mps: f64) -> Polytope {
    let mut rows = DMatrix::zeros(4, 4);
    let mut rhs = DVector::zeros(4);
    for (r, (s1, s2)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)].into_iter().enumerate() {
        rows[(r, 2)] = s1 / center1_mps;
        rows[(r, 3)] = s2 / center2_mps;
        rhs[r] = 1.0 + s1 + s2;
    }
    Polytope { rows, rhs }
}

/// Linear cost `Σ_t state_cost[t−1]ᵀ x_t + Σ_t input_cost[t]ᵀ u_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearCost {
    pub state: Vec<DVector<f64>>,
    pub input: Vec<DVector<f64>>,
}

impl LinearCost {
    /// `c ᵀ x_N` only.
    pub fn terminal(horizon: usize, state_dim: usize, input_dim: usize, c: DVector<f64>) -> Self {
        let mut state = vec![DVector::zeros(state_dim); horizon];
        state[horizon - 1] = c;
        Self {
            state,
            input: vec![DVector::zeros(input_dim); horizon],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningProblem {
    pub horizon: usize,
    /// `(A_t, B_t)` for `t = 0..N−1`, `x_{t+1} = A_t x_t + B_t u_t`.
    pub dynamics: Vec<(DMatrix<f64>, DMatrix<f64>)>,
    pub initial_state: DVector<f64>,
    pub inputs: Polytope,
    /// Imposed on `x_1..x_N`.
    pub states: Polytope,
    pub cost: LinearCost,
    pub chance: Option<ChanceRows>,
}

impl PlanningProblem {
    pub fn state_dim(&self) -> usize {
        self.initial_state.len()
    }

    pub fn input_dim(&self) -> usize {
        self.dynamics.first().map_or(0, |(_, b)| b.ncols())
    }

    pub fn validate(&self) -> Result<()> {
        let (nx, nu, n) = (self.state_dim(), self.input_dim(), self.horizon);
        if n == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        if self.dynamics.len() != n {
            return Err(Error::Dimension(format!("{} dynamics steps for horizon {n}", self.dynamics.len())));
        }
        for (t, (a, b)) in self.dynamics.iter().enumerate() {
            if a.shape() != (nx, nx) || b.shape() != (nx, nu) {
                return Err(Error::Dimension(format!(
                    "step {t}: A is {:?}, B is {:?}, expected ({nx}, {nx}) and ({nx}, {nu})",
                    a.shape(),
                    b.shape()
                )));
            }
        }
        if self.inputs.dimension() != nu || self.states.dimension() != nx {
            return Err(Error::Dimension("polytope dimension does not match the system".into()));
        }
        if self.input_box().iter().any(|(lo, hi)| !lo.is_finite() || !hi.is_finite()) {
            return Err(Error::InvalidParameter("input set must bound every input coordinate".into()));
        }
        if self.cost.state.len() != n
            || self.cost.input.len() != n
            || self.cost.state.iter().any(|c| c.len() != nx)
            || self.cost.input.iter().any(|c| c.len() != nu)
        {
            return Err(Error::Dimension("cost does not match horizon and dimensions".into()));
        }
        if let Some(ch) = &self.chance {
            if ch.layout.horizon != n {
                return Err(Error::Dimension("chance rows horizon differs from the problem".into()));
            }
            if ch.selector.ncols() != nx {
                return Err(Error::Dimension("selector does not act on the state".into()));
            }
            if ch.rows.iter().any(|r| r.dimension() != ch.selector.nrows() + 1) {
                return Err(Error::Dimension("row dimension does not match the selector".into()));
            }
        }
        Ok(())
    }

    pub fn input_box(&self) -> Vec<(f64, f64)> {
        self.inputs.axis_bounds()
    }

    /// Interval enclosure of `x_1..x_N` over all admissible input sequences
    /// (state constraints ignored, so this is a superset).
    pub fn reachable_state_boxes(&self) -> Vec<Vec<(f64, f64)>> {
        let ubox = self.input_box();
        let mut cur: Vec<(f64, f64)> = self.initial_state.iter().map(|&v| (v, v)).collect();
        let mut out = Vec::with_capacity(self.horizon);
        for (a, b) in &self.dynamics {
            let next = (0..cur.len())
                .map(|r| {
                    let mut lo = 0.0;
                    let mut hi = 0.0;
                    let (arow, brow) = (a.row(r), b.row(r));
                    let terms = arow.iter().zip(&cur).chain(brow.iter().zip(&ubox));
                    for (&c, &(l, h)) in terms {
                        let (x, y) = (c * l, c * h);
                        lo += x.min(y);
                        hi += x.max(y);
                    }
                    (lo, hi)
                })
                .collect::<Vec<_>>();
            out.push(next.clone());
            cur = next;
        }
        out
    }

    /// Box containing `selector · x_t` for every `t`.
    pub fn reachable_position_box(&self, selector: &DMatrix<f64>) -> Vec<(f64, f64)> {
        let mut hull = vec![(f64::INFINITY, f64::NEG_INFINITY); selector.nrows()];
        for state_box in self.reachable_state_boxes() {
            for (r, h) in hull.iter_mut().enumerate() {
                let (mut lo, mut hi) = (0.0, 0.0);
                for (c, &(l, u)) in selector.row(r).iter().zip(&state_box) {
                    lo += (c * l).min(c * u);
                    hi += (c * l).max(c * u);
                }
                h.0 = h.0.min(lo);
                h.1 = h.1.max(hi);
            }
        }
        hull
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_study_matrices() {
        let (a, b) = discretize_double_integrator(0.4);
        assert_eq!(a[(0, 2)], 0.4);
        assert_eq!(a[(1, 3)], 0.4);
        assert!((b[(0, 0)] - 0.08).abs() < 1e-16);
        assert!((b[(1, 1)] - 0.08).abs() < 1e-16);
        assert_eq!(b[(2, 0)], 0.4);
    }

    #[test]
    fn vanishing_sample_time() {
        let (a, b) = discretize_double_integrator(1e-12);
        assert!((a - DMatrix::identity(4, 4)).abs().max() < 1e-11);
        assert!(b.abs().max() < 1e-11);
    }

    #[test]
    fn two_half_steps_equal_one_step() {
        let (a1, b1) = discretize_double_integrator(0.2);
        let (a2, b2) = discretize_double_integrator(0.4);
        let x = DVector::from_vec(vec![1.0, -2.0, 3.0, 0.5]);
        let u = DVector::from_vec(vec![0.7, -1.3]);
        let half = &a1 * (&a1 * &x + &b1 * &u) + &b1 * &u;
        let full = &a2 * &x + &b2 * &u;
        assert!((half - full).abs().max() < 1e-14);
    }

    #[test]
    fn diamond_facets() {
        let (c1, c2) = (40.0 / 3.6, 20.0 / 3.6);
        let p = velocity_polytope(c1, c2);
        let at = |v1: f64, v2: f64| p.slack(&DVector::from_vec(vec![0.0, 0.0, v1, v2]));
        assert!(at(c1, c2).iter().all(|s| (s - 1.0).abs() < 1e-12));
        assert!(at(2.0 * c1, c2).min().abs() < 1e-12);
        assert!(at(0.0, c2).min().abs() < 1e-12);
        assert!(at(0.0, 0.0).min() < 0.0);
    }

    #[test]
    fn axis_bounds_from_box() {
        let p = Polytope::boxed(&[-3.0, -5.0], &[10.0, 5.0]);
        assert_eq!(p.axis_bounds(), vec![(-3.0, 10.0), (-5.0, 5.0)]);
    }

    #[test]
    fn reachable_boxes_contain_trajectories() {
        let (a, b) = discretize_double_integrator(0.4);
        let n = 6;
        let problem = PlanningProblem {
            horizon: n,
            dynamics: vec![(a.clone(), b.clone()); n],
            initial_state: DVector::from_vec(vec![0.0, 1.75, 13.9, 0.0]),
            inputs: Polytope::boxed(&[-3.0, -5.0], &[10.0, 5.0]),
            states: Polytope::empty(4),
            cost: LinearCost::terminal(n, 4, 2, DVector::zeros(4)),
            chance: None,
        };
        let boxes = problem.reachable_state_boxes();
        let mut x = problem.initial_state.clone();
        for (t, bx) in boxes.iter().enumerate() {
            let u = DVector::from_vec(vec![if t % 2 == 0 { 10.0 } else { -3.0 }, 5.0 - t as f64]);
            x = &a * &x + &b * &u;
            for (k, &(lo, hi)) in bx.iter().enumerate() {
                assert!(lo - 1e-12 <= x[k] && x[k] <= hi + 1e-12);
            }
        }
    }
}
