//! Plans built on Gaussian faces keep their true violation probability
//! below ε when checked by sampling the faces themselves.

mod common;

use common::instances::{box_faces, estimate, random_instance};
use mrplan::misocp::{self, PlanStatus, PlanningProblem, SolverSettings};
use mrplan::moments::{self, CovarianceMode, GaussianEstimate, SampleSet};
use mrplan::reformulate::{self, BigMPolicy};
use mrplan::scenario::{planar_selector, ObstacleFaceSet, ObstacleFaces};
use mrplan::Probability;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

const EPS: f64 = 0.1;
const HORIZON: usize = 3;

fn truth() -> Vec<Vec<([f64; 3], DMatrix<f64>)>> {
    let cov = DMatrix::from_row_slice(3, 3, &[1e-3, 0.0, 2e-4, 0.0, 1e-3, 0.0, 2e-4, 0.0, 5e-3]);
    (0..HORIZON)
        .map(|t| {
            box_faces((6.0 + t as f64, 0.0), (1.0, 0.5))
                .into_iter()
                .map(|d| (d, cov.clone()))
                .collect()
        })
        .collect()
}

fn plan(base: &PlanningProblem, cells: Vec<Vec<GaussianEstimate>>) -> misocp::PlanResult {
    let faces = ObstacleFaceSet::new(HORIZON, planar_selector(4), vec![ObstacleFaces { cells }]).unwrap();
    let mut problem = base.clone();
    let alloc = reformulate::allocate_uniform(Probability::new(EPS).unwrap(), HORIZON, &faces.face_counts()).unwrap();
    let pbox = problem.reachable_position_box(&faces.selector);
    let big_m = reformulate::choose_big_m(&faces, &alloc, &pbox, BigMPolicy::default()).unwrap();
    problem.chance = Some(reformulate::reformulate(&faces, &alloc, big_m).unwrap());
    let m = misocp::assemble(&problem).unwrap();
    let r = misocp::solve(&m, &SolverSettings::default()).unwrap();
    assert_eq!(r.status, PlanStatus::Optimal);
    r
}

fn draw(mean: &[f64; 3], chol: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let z = DVector::from_fn(3, |_, _| StandardNormal.sample(rng));
    DVector::from_column_slice(mean) + chol * z
}

/// Fraction of joint face draws under which some step has every face
/// nonpositive at the planned position.
fn violation(result: &misocp::PlanResult, realizations: usize, seed: u64) -> f64 {
    let truth = truth();
    let chols: Vec<Vec<DMatrix<f64>>> = truth
        .iter()
        .map(|row| row.iter().map(|(_, c)| c.clone().cholesky().unwrap().l()).collect())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0;
    for _ in 0..realizations {
        let hit = (0..HORIZON).any(|t| {
            let x = &result.states[t];
            let xt = DVector::from_vec(vec![x[0], x[1], 1.0]);
            truth[t]
                .iter()
                .zip(&chols[t])
                .all(|((mean, _), l)| draw(mean, l, &mut rng).dot(&xt) <= 0.0)
        });
        hits += hit as usize;
    }
    hits as f64 / realizations as f64
}

fn bound(realizations: usize) -> f64 {
    EPS + 3.0 * (EPS * (1.0 - EPS) / realizations as f64).sqrt()
}

fn base() -> PlanningProblem {
    let mut p = random_instance(0, HORIZON, 4).problem;
    p.initial_state = DVector::from_vec(vec![0.0, 0.0, 6.0, 0.0]);
    p.cost = misocp::LinearCost::terminal(HORIZON, 4, 2, DVector::from_vec(vec![-1.0, 0.0, 0.0, 0.0]));
    p.chance = None;
    p
}

#[test]
fn exact_moments_respect_epsilon() {
    let cells = truth()
        .into_iter()
        .map(|row| row.into_iter().map(|(d, c)| estimate(&d, c, 0.0, 0.0)).collect())
        .collect();
    let r = plan(&base(), cells);
    let n = 20_000;
    let v = violation(&r, n, 1);
    assert!(v <= bound(n), "violation {v}");
}

#[test]
fn estimated_moments_with_radii_respect_epsilon() {
    let beta = Probability::new(1e-3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let cells = truth()
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(d, c)| {
                    let l = c.cholesky().unwrap().l();
                    let samples: Vec<DVector<f64>> = (0..2000).map(|_| draw(&d, &l, &mut rng)).collect();
                    moments::build_estimate(&SampleSet::new(samples).unwrap(), beta, CovarianceMode::Full).unwrap()
                })
                .collect()
        })
        .collect();
    let robust = plan(&base(), cells);
    let n = 20_000;
    let v = violation(&robust, n, 2);
    assert!(v <= bound(n), "violation {v}");

    let exact_cells = truth()
        .into_iter()
        .map(|row| row.into_iter().map(|(d, c)| estimate(&d, c, 0.0, 0.0)).collect())
        .collect();
    let exact = plan(&base(), exact_cells);
    // robustness costs progress along x1
    assert!(robust.objective.unwrap() >= exact.objective.unwrap() - 1e-6);
}
