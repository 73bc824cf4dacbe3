//! Branch-and-bound against exhaustive binary enumeration.

mod common;

use common::instances::{enumerate, estimate, oracle_shape, random_instance};
use mrplan::misocp::{self, PlanStatus, SolverSettings};
use mrplan::reformulate::{self, BigMPolicy};
use mrplan::scenario::{planar_selector, ObstacleFaceSet, ObstacleFaces};
use mrplan::Probability;
use nalgebra::DMatrix;

fn shapes() -> impl Iterator<Item = (u64, usize, usize)> {
    (0..50u64).map(|s| {
        let (n, f) = oracle_shape(s);
        (s, n, f)
    })
}

#[test]
fn matches_enumeration_on_random_instances() {
    let mut constrained = 0;
    for (seed, n, f) in shapes() {
        let inst = random_instance(seed, n, f);
        let r = misocp::solve(&inst.misocp, &SolverSettings::default()).unwrap();
        let brute = enumerate(&inst.misocp);
        match brute {
            None => assert_eq!(r.status, PlanStatus::Infeasible, "seed {seed}"),
            Some(best) => {
                assert_eq!(r.status, PlanStatus::Optimal, "seed {seed}");
                let obj = r.objective.unwrap();
                assert!((obj - best).abs() <= 1e-6, "seed {seed}: bnb {obj} vs enumeration {best}");
                assert!(r.root_bound.unwrap() <= obj + 1e-6);
                assert!(r.max_violation.unwrap() <= 1e-6, "seed {seed}");
                if r.node_count > 1 {
                    constrained += 1;
                }
            }
        }
    }
    // the generator must exercise branching, not just root-integral solves
    assert!(constrained >= 10, "only {constrained} instances branched");
}

#[test]
fn solves_are_deterministic() {
    for seed in [3u64, 17, 42] {
        let inst = random_instance(seed, 3, 4);
        let a = misocp::solve(&inst.misocp, &SolverSettings::default()).unwrap();
        let b = misocp::solve(&inst.misocp, &SolverSettings::default()).unwrap();
        assert_eq!(a.binaries, b.binaries);
        assert_eq!(a.solution, b.solution);
        assert_eq!(a.node_count, b.node_count);
    }
}

#[test]
fn single_face_obstacle_needs_no_branching() {
    // one half-plane: the cardinality row forces its binary to zero
    let inst = random_instance(5, 3, 4);
    let (a, b) = mrplan::misocp::discretize_double_integrator(0.4);
    let cells = (0..3)
        .map(|_| vec![estimate(&[-1.0, 0.0, 8.0], DMatrix::identity(3, 3) * 1e-3, 0.01, 0.01)])
        .collect();
    let faces = ObstacleFaceSet::new(3, planar_selector(4), vec![ObstacleFaces { cells }]).unwrap();
    let mut problem = inst.problem.clone();
    problem.dynamics = vec![(a, b); 3];
    let eps = Probability::new(0.05).unwrap();
    let alloc = reformulate::allocate_uniform(eps, 3, &faces.face_counts()).unwrap();
    let pbox = problem.reachable_position_box(&faces.selector);
    let m_value = reformulate::choose_big_m(&faces, &alloc, &pbox, BigMPolicy::default()).unwrap();
    problem.chance = Some(reformulate::reformulate(&faces, &alloc, m_value).unwrap());
    let m = misocp::assemble(&problem).unwrap();
    let r = misocp::solve(&m, &SolverSettings::default()).unwrap();
    assert_eq!(r.status, PlanStatus::Optimal);
    assert_eq!(r.node_count, 1);
    assert!(r.binaries.iter().all(|&z| z == 0));
    assert!((r.objective.unwrap() - enumerate(&m).unwrap()).abs() <= 1e-6);
}

#[test]
fn budget_exhaustion_is_reported() {
    let inst = (0..60)
        .map(|s| random_instance(s, 3, 4))
        .find(|i| misocp::solve(&i.misocp, &SolverSettings::default()).unwrap().node_count > 2)
        .expect("some instance branches");
    let tight = SolverSettings {
        node_budget: 1,
        ..SolverSettings::default()
    };
    let r = misocp::solve(&inst.misocp, &tight).unwrap();
    assert_eq!(r.status, PlanStatus::BudgetExhausted);
    assert_eq!(r.node_count, 1);
}
