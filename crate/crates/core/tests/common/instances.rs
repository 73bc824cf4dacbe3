//! Random small planning instances and a brute-force binary enumeration
//! oracle for them.

use mrplan::misocp::{
    self, discretize_double_integrator, ClarabelBackend, ConicBackend, BackendStatus, LinearCost, Misocp,
    PlanningProblem, Polytope,
};
use mrplan::moments::{CovarianceMode, GaussianEstimate};
use mrplan::reformulate::{self, BigMPolicy};
use mrplan::scenario::{planar_selector, ObstacleFaceSet, ObstacleFaces};
use mrplan::Probability;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub struct Instance {
    pub problem: PlanningProblem,
    pub faces: ObstacleFaceSet,
    pub misocp: Misocp,
}

/// Face `dᵀ[p; 1] > 0` vectors of the axis-aligned box centered at `c` with
/// half-sizes `h`: right, left, top, bottom.
pub fn box_faces(c: (f64, f64), h: (f64, f64)) -> Vec<[f64; 3]> {
    vec![
        [1.0, 0.0, -(c.0 + h.0)],
        [-1.0, 0.0, c.0 - h.0],
        [0.0, 1.0, -(c.1 + h.1)],
        [0.0, -1.0, c.1 - h.1],
    ]
}

fn random_spd<R: Rng>(rng: &mut R, scale: f64) -> DMatrix<f64> {
    let a = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0));
    (&a * a.transpose() + DMatrix::identity(3, 3) * 0.1) * scale
}

pub fn estimate(mean: &[f64; 3], covariance: DMatrix<f64>, r1: f64, r2: f64) -> GaussianEstimate {
    GaussianEstimate {
        mean: DVector::from_column_slice(mean),
        covariance,
        sample_count: 1000,
        r1,
        r2,
        beta: Probability::new(1e-3).unwrap(),
        mode: CovarianceMode::Full,
    }
}

/// Planar double integrator heading along `x1` past one box obstacle with
/// `faces` uncertain faces (3 or 4) over `horizon` steps.
pub fn random_instance(seed: u64, horizon: usize, faces: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = discretize_double_integrator(0.4);
    let v0 = rng.gen_range(4.0..8.0);
    let x0 = DVector::from_vec(vec![0.0, rng.gen_range(-0.5..0.5), v0, 0.0]);
    let center = (rng.gen_range(0.3..0.9) * v0 * 0.4 * horizon as f64, rng.gen_range(-0.5..0.5));
    let half = (rng.gen_range(0.3..1.0), rng.gen_range(0.3..1.0));
    let robust = rng.gen_bool(0.5);
    let shapes = box_faces(center, half);
    let cells = (0..horizon)
        .map(|_| {
            shapes[..faces]
                .iter()
                .map(|d| {
                    let scale = rng.gen_range(1e-4..1e-2);
                    let cov = random_spd(&mut rng, scale);
                    let (r1, r2) = if robust {
                        (rng.gen_range(0.0..0.05), rng.gen_range(0.0..0.02))
                    } else {
                        (0.0, 0.0)
                    };
                    estimate(d, cov, r1, r2)
                })
                .collect()
        })
        .collect();
    let face_set = ObstacleFaceSet::new(horizon, planar_selector(4), vec![ObstacleFaces { cells }]).unwrap();

    let cost = DVector::from_vec(vec![rng.gen_range(-1.0..0.2), rng.gen_range(-0.5..0.5), 0.0, 0.0]);
    let mut problem = PlanningProblem {
        horizon,
        dynamics: vec![(a, b); horizon],
        initial_state: x0,
        inputs: Polytope::boxed(&[-3.0, -3.0], &[3.0, 3.0]),
        states: Polytope::boxed(&[-1e3, -3.0, -20.0, -20.0], &[1e3, 3.0, 20.0, 20.0]),
        cost: LinearCost::terminal(horizon, 4, 2, cost),
        chance: None,
    };
    let eps = Probability::new(0.1).unwrap();
    let allocation = reformulate::allocate_uniform(eps, horizon, &face_set.face_counts()).unwrap();
    let pbox = problem.reachable_position_box(&face_set.selector);
    let big_m = reformulate::choose_big_m(&face_set, &allocation, &pbox, BigMPolicy::default()).unwrap();
    problem.chance = Some(reformulate::reformulate(&face_set, &allocation, big_m).unwrap());
    let misocp = misocp::assemble(&problem).unwrap();
    Instance {
        problem,
        faces: face_set,
        misocp,
    }
}

/// Minimum over every binary assignment that satisfies the cardinality rows
/// of the continuous problem with those binaries fixed.
pub fn enumerate(m: &Misocp) -> Option<f64> {
    let nb = m.columns.binaries;
    let backend = ClarabelBackend::default();
    (0u64..(1 << nb))
        .into_par_iter()
        .filter_map(|mask| {
            let bit = |b: usize| ((mask >> b) & 1) as f64;
            let mut w = vec![0.0; m.columns.total()];
            for b in 0..nb {
                w[m.columns.binary(b)] = bit(b);
            }
            let admissible = m
                .cardinality
                .iter()
                .all(|row| row.coeffs.iter().map(|&(k, v)| v * w[k]).sum::<f64>() <= row.rhs + 1e-9);
            if !admissible {
                return None;
            }
            let bounds: Vec<(f64, f64)> = (0..nb).map(|b| (bit(b), bit(b))).collect();
            let sol = backend.solve(&m.relaxation(&bounds)).unwrap();
            (sol.status == BackendStatus::Optimal).then_some(sol.objective)
        })
        .min_by(f64::total_cmp)
}

/// `(horizon, faces)` for oracle instance `seed`: 6 to 12 binaries, with the
/// 12-binary shape one time in ten.
pub fn oracle_shape(seed: u64) -> (usize, usize) {
    match seed % 10 {
        0..=3 => (2, 4),
        4..=6 => (3, 3),
        7 | 8 => (2, 3),
        _ => (3, 4),
    }
}
