//! End-to-end orchestration of the driving case study:
//! sample → estimate → reformulate → solve → validate.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::config::{MomentMode, RunConfig, SeedPlan, KMH_TO_MPS};
use crate::error::Result;
use crate::misocp::{self, LinearCost, PlanResult, PlanningProblem, Polytope, RowCounts};
use crate::reformulate::{self, ConfidenceReport};
use crate::scenario::{self, FaceSamples, ObstacleFaceSet};
use crate::validate::{self, ViolationReport};

/// The planning problem without obstacle rows.
pub fn base_problem(cfg: &RunConfig) -> Result<PlanningProblem> {
    let p = &cfg.planner;
    let (a, b) = misocp::discretize_double_integrator(p.sample_time_s);
    let lane = Polytope::new(
        DMatrix::from_row_slice(2, 4, &[0.0, 1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0]),
        DVector::from_vec(vec![p.lane_max_m, -p.lane_min_m]),
    )?;
    let velocity = misocp::velocity_polytope(p.velocity_center1_kmh * KMH_TO_MPS, p.velocity_center2_kmh * KMH_TO_MPS);
    let problem = PlanningProblem {
        horizon: p.horizon,
        dynamics: vec![(a, b); p.horizon],
        initial_state: DVector::from_row_slice(&cfg.ego_initial_state()),
        inputs: Polytope::boxed(
            &[p.accel1_min_mps2, -p.accel2_max_abs_mps2],
            &[p.accel1_max_mps2, p.accel2_max_abs_mps2],
        ),
        states: velocity.stack(&lane)?,
        cost: LinearCost::terminal(p.horizon, 4, 2, DVector::from_vec(vec![-1.0, 0.0, 0.0, 0.0])),
        chance: None,
    };
    problem.validate()?;
    Ok(problem)
}

/// Samples adversary trajectories and estimates every face.
pub fn sample_faces(cfg: &RunConfig, seeds: &SeedPlan) -> Result<(FaceSamples, ObstacleFaceSet)> {
    let adversary = cfg.adversary()?;
    let samples = scenario::build_face_samples(
        &adversary,
        cfg.planner.samples,
        seeds.sampling,
        cfg.ego(),
        cfg.planner.inflation,
    )?;
    let faces = scenario::estimate_faces(
        &samples,
        scenario::planar_selector(4),
        cfg.beta(),
        cfg.planner.covariance,
        cfg.planner.covariance_ridge,
    )?;
    Ok((samples, faces))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanOutcome {
    pub config_hash: String,
    pub seeds: SeedPlan,
    pub mode: MomentMode,
    pub big_m: f64,
    pub continuous_columns: usize,
    pub binary_columns: usize,
    pub auxiliary_columns: usize,
    pub rows: RowCounts,
    pub confidence: ConfidenceReport,
    pub result: PlanResult,
}

/// Builds the MISOCP for a set of face estimates (radii dropped in known
/// mode).
pub fn build_misocp(cfg: &RunConfig, faces: &ObstacleFaceSet) -> Result<(misocp::Misocp, f64)> {
    let mut problem = base_problem(cfg)?;
    let faces = match cfg.planner.mode {
        MomentMode::Known => faces.as_exact(),
        MomentMode::Robust => faces.clone(),
    };
    let allocation = reformulate::allocate_uniform(cfg.epsilon(), faces.horizon, &faces.face_counts())?;
    let position_box = problem.reachable_position_box(&faces.selector);
    let big_m = reformulate::choose_big_m(&faces, &allocation, &position_box, cfg.planner.big_m)?;
    problem.chance = Some(reformulate::reformulate(&faces, &allocation, big_m)?);
    Ok((misocp::assemble(&problem)?, big_m))
}

pub fn plan_with_faces(cfg: &RunConfig, faces: &ObstacleFaceSet) -> Result<PlanOutcome> {
    let (m, big_m) = build_misocp(cfg, faces)?;
    let confidence = reformulate::joint_confidence(cfg.beta(), faces.horizon, &faces.face_counts())?;
    let mut result = misocp::solve(&m, &cfg.planner.solver)?;
    result.confidence = Some(confidence);
    Ok(PlanOutcome {
        config_hash: cfg.hash(),
        seeds: cfg.seeds(),
        mode: cfg.planner.mode,
        big_m,
        continuous_columns: m.columns.continuous(),
        binary_columns: m.columns.binaries,
        auxiliary_columns: m.columns.auxiliaries,
        rows: m.row_counts(),
        confidence,
        result,
    })
}

pub fn plan(cfg: &RunConfig) -> Result<PlanOutcome> {
    let (_, faces) = sample_faces(cfg, &cfg.seeds())?;
    plan_with_faces(cfg, &faces)
}

/// Ego positions `(x1, x2)` at `t = 1..N`.
pub fn positions(result: &PlanResult) -> Vec<(f64, f64)> {
    result.states.iter().map(|x| (x[0], x[1])).collect()
}

pub fn validate_plan(cfg: &RunConfig, result: &PlanResult, realizations: usize) -> Result<ViolationReport> {
    validate::empirical_violation(
        &positions(result),
        &cfg.adversary()?,
        cfg.ego(),
        cfg.planner.inflation,
        realizations,
        cfg.seeds().validation,
    )
}
