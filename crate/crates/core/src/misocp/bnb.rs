//! Best-first branch-and-bound over continuous conic relaxations.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::backend::{BackendStatus, ClarabelBackend, ConicBackend};
use super::Misocp;
use crate::error::{Error, Result};
use crate::reformulate::ConfidenceReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    /// Absolute optimality gap for pruning.
    pub gap_tolerance: f64,
    pub integrality_tolerance: f64,
    pub node_budget: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            gap_tolerance: 1e-6,
            integrality_tolerance: 1e-6,
            node_budget: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanStatus {
    Optimal,
    Infeasible,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    pub status: PlanStatus,
    /// `u_0..u_{N−1}`; empty without an incumbent.
    pub inputs: Vec<Vec<f64>>,
    /// `x_1..x_N`, regenerated from `x_0` and the inputs.
    pub states: Vec<Vec<f64>>,
    pub binaries: Vec<u8>,
    pub objective: Option<f64>,
    /// Objective of the root relaxation.
    pub root_bound: Option<f64>,
    pub node_count: usize,
    pub wall_time_s: f64,
    /// Largest row violation of the returned point.
    pub max_violation: Option<f64>,
    /// Full column vector of the returned point.
    pub solution: Vec<f64>,
    pub confidence: Option<ConfidenceReport>,
}

struct Node {
    id: usize,
    depth: usize,
    bound: f64,
    bounds: Vec<(f64, f64)>,
}

/// Heap order: smallest bound first, bounds compared on the gap-tolerance
/// grid; deeper nodes first among equal bounds, then lower id.
struct Queued {
    key: f64,
    node: Node,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then(self.node.depth.cmp(&other.node.depth))
            .then(other.node.id.cmp(&self.node.id))
    }
}

pub fn solve(m: &Misocp, settings: &SolverSettings) -> Result<PlanResult> {
    solve_with(m, settings, &ClarabelBackend::default())
}

pub fn solve_with<B: ConicBackend>(m: &Misocp, settings: &SolverSettings, backend: &B) -> Result<PlanResult> {
    let start = Instant::now();
    let nb = m.columns.binaries;
    let grid = |v: f64| (v / settings.gap_tolerance).floor();
    let solve_node = |bounds: &[(f64, f64)], node: usize| {
        backend
            .solve(&m.relaxation(bounds))
            .map_err(|reason| Error::Backend { node, reason })
    };

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut heap = BinaryHeap::new();
    let mut next_id = 0;
    let mut processed = 0;
    let mut root_bound = None;
    heap.push(Queued {
        key: f64::NEG_INFINITY,
        node: Node {
            id: next_id,
            depth: 0,
            bound: f64::NEG_INFINITY,
            bounds: vec![(0.0, 1.0); nb],
        },
    });
    next_id += 1;

    let mut exhausted = false;
    while let Some(Queued { node, .. }) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound >= best - settings.gap_tolerance {
                continue;
            }
        }
        if processed >= settings.node_budget {
            exhausted = true;
            break;
        }
        processed += 1;
        let sol = solve_node(&node.bounds, node.id)?;
        match sol.status {
            BackendStatus::Infeasible => continue,
            BackendStatus::Unbounded => {
                return Err(Error::Backend {
                    node: node.id,
                    reason: "relaxation is unbounded".into(),
                })
            }
            BackendStatus::Optimal => {}
        }
        if node.id == 0 {
            root_bound = Some(sol.objective);
        }
        if let Some((best, _)) = &incumbent {
            if sol.objective >= best - settings.gap_tolerance {
                continue;
            }
        }

        let free: Vec<usize> = (0..nb).filter(|&b| node.bounds[b].0 != node.bounds[b].1).collect();
        let frac = |b: usize| {
            let v = sol.primal[m.columns.binary(b)];
            (v - v.floor()).min(v.ceil() - v)
        };
        // most fractional, lowest index on ties
        let pick = |threshold: f64| {
            free.iter()
                .copied()
                .filter(|&b| frac(b) > threshold)
                .fold(None, |acc: Option<usize>, b| match acc {
                    Some(a) if frac(a) >= frac(b) => Some(a),
                    _ => Some(b),
                })
        };

        let mut branch = pick(settings.integrality_tolerance);
        if branch.is_none() {
            // integral within tolerance: fix the rounded binaries and re-solve
            let fixed: Vec<(f64, f64)> = (0..nb)
                .map(|b| {
                    let v = sol.primal[m.columns.binary(b)].round().clamp(0.0, 1.0);
                    (v, v)
                })
                .collect();
            let polished = if free.is_empty() { sol.clone() } else { solve_node(&fixed, node.id)? };
            if polished.status == BackendStatus::Optimal {
                let better = incumbent.as_ref().map_or(true, |(best, _)| polished.objective < *best);
                if better {
                    incumbent = Some((polished.objective, polished.primal));
                }
                continue;
            }
            // rounding broke feasibility; keep splitting on whatever is not exactly integral
            branch = pick(0.0).or_else(|| free.first().copied());
            if branch.is_none() {
                continue;
            }
        }
        let b = branch.expect("branch variable chosen");
        for value in [0.0, 1.0] {
            let mut bounds = node.bounds.clone();
            bounds[b] = (value, value);
            heap.push(Queued {
                key: grid(sol.objective),
                node: Node {
                    id: next_id,
                    depth: node.depth + 1,
                    bound: sol.objective,
                    bounds,
                },
            });
            next_id += 1;
        }
    }

    let status = match (&incumbent, exhausted) {
        (_, true) => PlanStatus::BudgetExhausted,
        (Some(_), false) => PlanStatus::Optimal,
        (None, false) => PlanStatus::Infeasible,
    };
    let mut result = PlanResult {
        status,
        inputs: vec![],
        states: vec![],
        binaries: vec![],
        objective: None,
        root_bound,
        node_count: processed,
        wall_time_s: 0.0,
        max_violation: None,
        solution: vec![],
        confidence: None,
    };
    if let Some((_, w)) = incumbent {
        fill_trajectory(m, w, &mut result);
    }
    result.wall_time_s = start.elapsed().as_secs_f64();
    Ok(result)
}

/// Rounds binaries, regenerates states from the inputs, and records the
/// trajectory and its row violation.
fn fill_trajectory(m: &Misocp, mut w: Vec<f64>, result: &mut PlanResult) {
    let c = &m.columns;
    for b in 0..c.binaries {
        w[c.binary(b)] = w[c.binary(b)].round();
    }
    let inputs: Vec<Vec<f64>> = (0..c.horizon)
        .map(|t| (0..c.input_dim).map(|k| w[c.input(t, k)]).collect())
        .collect();
    // the dynamics rows are x_{t+1} = A x_t + B u_t; replaying them in order
    // gives the states exactly
    for row in &m.dynamics {
        let (target, coeff) = row.coeffs[0];
        let rest: f64 = row.coeffs[1..].iter().map(|&(k, v)| v * w[k]).sum();
        w[target] = (row.rhs - rest) / coeff;
    }
    result.states = (1..=c.horizon)
        .map(|t| (0..c.state_dim).map(|k| w[c.state(t, k)]).collect())
        .collect();
    result.inputs = inputs;
    result.binaries = (0..c.binaries).map(|b| w[c.binary(b)] as u8).collect();
    result.objective = Some(m.objective_value(&w));
    let violation = m.replay(&w);
    if violation > 1e-6 {
        log::warn!("returned plan violates a row by {violation:e}");
    }
    result.max_violation = Some(violation);
    result.solution = w;
}

#[cfg(test)]
mod tests {
    use nalgebra::DVector;

    use super::*;
    use crate::misocp::{assemble, discretize_double_integrator, LinearCost, PlanningProblem, Polytope};

    #[test]
    fn lp_without_binaries_solves_at_root() {
        let (a, b) = discretize_double_integrator(0.4);
        let p = PlanningProblem {
            horizon: 3,
            dynamics: vec![(a, b); 3],
            initial_state: DVector::from_vec(vec![0.0, 0.0, 10.0, 0.0]),
            inputs: Polytope::boxed(&[-3.0, -5.0], &[10.0, 5.0]),
            states: Polytope::empty(4),
            cost: LinearCost::terminal(3, 4, 2, DVector::from_vec(vec![-1.0, 0.0, 0.0, 0.0])),
            chance: None,
        };
        let m = assemble(&p).unwrap();
        let r = solve(&m, &SolverSettings::default()).unwrap();
        assert_eq!(r.status, PlanStatus::Optimal);
        assert_eq!(r.node_count, 1);
        // constant full throttle: x1 = v0·3T + a·(3T)²/2
        let expected = 10.0 * 1.2 + 10.0 * 1.2 * 1.2 / 2.0;
        assert!((r.states[2][0] - expected).abs() < 1e-6, "{}", r.states[2][0]);
        assert!(r.max_violation.unwrap() < 1e-6);
    }
}
