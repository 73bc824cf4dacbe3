use std::path::Path;

use mrplan::config::{content_hash, RunConfig, SeedPlan};
use mrplan::misocp::PlanStatus;
use mrplan::pipeline;
use mrplan::statkit;
use mrplan::validate::{self, Example1Mode, Example1Report, ViolationReport};
use mrplan::Probability;
use serde::Serialize;

use crate::output::{self, PlanFile, TRAJECTORY_HEADER};
use crate::{out_dir, Failure};

pub fn plan(cfg: &RunConfig) -> Result<(), Failure> {
    let outcome = pipeline::plan(cfg)?;
    let dir = out_dir(cfg);
    output::create_dir(dir)?;
    let r = &outcome.result;
    if !r.states.is_empty() {
        let faces = outcome.binary_columns / cfg.planner.horizon;
        output::write_csv(
            &dir.join("trajectory.csv"),
            &TRAJECTORY_HEADER,
            output::trajectory_rows(&cfg.ego_initial_state(), r, faces),
        )?;
    }
    output::write_json(&dir.join("confidence.json"), &outcome.confidence)?;
    let status = r.status;
    log::info!(
        "{:?}: objective {:?}, {} nodes, {:.3} s",
        status,
        r.objective,
        r.node_count,
        r.wall_time_s
    );
    output::write_json(
        &dir.join("plan.json"),
        &PlanFile {
            config: cfg.clone(),
            outcome,
        },
    )?;
    match status {
        PlanStatus::Optimal => Ok(()),
        s => Err(Failure::Outcome(format!("plan status: {s:?}"))),
    }
}

#[derive(Serialize)]
struct ValidationFile<'a> {
    config_hash: String,
    plan_config_hash: &'a str,
    seed: u64,
    epsilon: f64,
    exceeds_epsilon: bool,
    report: ViolationReport,
}

pub fn validate(cfg: &RunConfig, plan: &PlanFile, realizations: usize) -> Result<(), Failure> {
    let result = &plan.outcome.result;
    if result.states.is_empty() {
        return Err(Failure::Usage(format!("plan has no trajectory (status {:?})", result.status)));
    }
    let report = pipeline::validate_plan(cfg, result, realizations)?;
    let exceeds = report.probability > cfg.planner.epsilon;
    let dir = out_dir(cfg);
    output::create_dir(dir)?;
    output::write_json(
        &dir.join("violation.json"),
        &ValidationFile {
            config_hash: cfg.hash(),
            plan_config_hash: &plan.outcome.config_hash,
            seed: cfg.seed,
            epsilon: cfg.planner.epsilon,
            exceeds_epsilon: exceeds,
            report: report.clone(),
        },
    )?;
    if exceeds {
        return Err(Failure::Outcome(format!(
            "empirical violation {} exceeds epsilon {}",
            report.probability, cfg.planner.epsilon
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct Example1Params {
    sample_count: usize,
    trials: usize,
    beta: f64,
    master_seed: u64,
}

#[derive(Serialize)]
struct ModeSummary {
    violation_fraction: f64,
    mean_x_star: f64,
}

impl From<&Example1Report> for ModeSummary {
    fn from(r: &Example1Report) -> Self {
        Self {
            violation_fraction: r.violation_fraction,
            mean_x_star: r.mean_x_star,
        }
    }
}

#[derive(Serialize)]
struct Example1File {
    params_hash: String,
    seeds: SeedPlan,
    params: Example1Params,
    optimal_x: f64,
    naive: ModeSummary,
    robust: ModeSummary,
}

pub fn example1(dir: &Path, seeds: SeedPlan, samples: usize, trials: usize, beta: Probability) -> Result<(), Failure> {
    let naive = validate::example1(samples, trials, beta, Example1Mode::Naive, seeds.example1)?;
    let robust = validate::example1(samples, trials, beta, Example1Mode::Robust, seeds.example1)?;
    let params = Example1Params {
        sample_count: samples,
        trials,
        beta: beta.value(),
        master_seed: seeds.master,
    };
    output::create_dir(dir)?;
    output::write_json(
        &dir.join("example1.json"),
        &Example1File {
            params_hash: content_hash(&params),
            seeds,
            params,
            optimal_x: statkit::normal_inv_cdf(Probability::new(validate::EXAMPLE1_CONFIDENCE)?),
            naive: (&naive).into(),
            robust: (&robust).into(),
        },
    )?;
    output::write_csv(
        &dir.join("example1.csv"),
        &[
            "trial",
            "mean",
            "variance",
            "r1",
            "r2",
            "naive_x",
            "robust_x",
            "naive_violated",
            "robust_violated",
        ],
        naive.trials.iter().zip(&robust.trials).enumerate().map(|(k, (n, r))| {
            vec![
                k.to_string(),
                n.mean.to_string(),
                n.variance.to_string(),
                r.r1.to_string(),
                r.r2.to_string(),
                n.x_star.to_string(),
                r.x_star.to_string(),
                (n.violated as u8).to_string(),
                (r.violated as u8).to_string(),
            ]
        }),
    )?;
    println!(
        "naive violation {:.4}, robust violation {:.4}, robust mean x* {:.4}",
        naive.violation_fraction, robust.violation_fraction, robust.mean_x_star
    );
    Ok(())
}

#[derive(Serialize)]
struct FaceCell<'a> {
    t: usize,
    face: usize,
    estimate: &'a mrplan::moments::GaussianEstimate,
}

#[derive(Serialize)]
struct FacesFile<'a> {
    config_hash: String,
    seeds: SeedPlan,
    faces: Vec<FaceCell<'a>>,
}

pub fn sample(cfg: &RunConfig) -> Result<(), Failure> {
    let seeds = cfg.seeds();
    let (samples, faces) = pipeline::sample_faces(cfg, &seeds)?;
    let dir = out_dir(cfg);
    output::create_dir(dir)?;
    output::write_csv(
        &dir.join("samples.csv"),
        &["trajectory", "t", "y1_m", "y2_m", "theta_rad"],
        samples.trajectories.iter().enumerate().flat_map(|(k, traj)| {
            traj.iter().enumerate().map(move |(t, s)| {
                vec![
                    k.to_string(),
                    (t + 1).to_string(),
                    s.y1.to_string(),
                    s.y2.to_string(),
                    s.theta.to_string(),
                ]
            })
        }),
    )?;
    output::write_json(
        &dir.join("faces.json"),
        &FacesFile {
            config_hash: cfg.hash(),
            seeds,
            faces: faces
                .faces()
                .map(|f| FaceCell {
                    t: f.t,
                    face: f.face,
                    estimate: f.estimate,
                })
                .collect(),
        },
    )?;
    Ok(())
}
