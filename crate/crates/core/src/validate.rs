//! Monte Carlo certification of plans, and the scalar known-vs-estimated
//! moments study.

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{self, RadiusFactors, SampleSet};
use crate::scenario::{face_coefficients, faces, inflate_for_ego, sample_trajectory, AdversaryScenario, EgoFootprint, InflationRule};
use crate::seed;
use crate::statkit::{self, Probability};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub realizations: usize,
    pub violations: usize,
    pub probability: f64,
    /// Realizations in collision at step `t`, index `t − 1`.
    pub per_step: Vec<usize>,
    pub seed: u64,
}

/// Fraction of fresh adversary trajectories (trajectory `k` from
/// `seed::substream(seed, k)`) that overlap the ego position at some step.
pub fn empirical_violation(
    ego_positions: &[(f64, f64)],
    scenario: &AdversaryScenario,
    ego: EgoFootprint,
    rule: InflationRule,
    realizations: usize,
    seed: u64,
) -> Result<ViolationReport> {
    let n = scenario.horizon;
    if ego_positions.len() != n {
        return Err(Error::Dimension(format!(
            "trajectory has {} positions, horizon is {n}",
            ego_positions.len()
        )));
    }
    let (violations, per_step) = (0..realizations as u64)
        .into_par_iter()
        .map(|k| {
            let traj = sample_trajectory(scenario, &mut seed::substream(seed, k));
            let hits: Vec<bool> = traj
                .iter()
                .zip(ego_positions)
                .map(|(state, &p)| {
                    let f = inflate_for_ego(&face_coefficients(state, scenario.length_m, scenario.width_m), ego, rule);
                    faces::is_inside(&f, p)
                })
                .collect();
            (hits.iter().any(|&h| h) as usize, hits)
        })
        .fold(
            || (0usize, vec![0usize; n]),
            |(v, mut steps), (hit, hits)| {
                for (s, h) in steps.iter_mut().zip(hits) {
                    *s += h as usize;
                }
                (v + hit, steps)
            },
        )
        .reduce(
            || (0usize, vec![0usize; n]),
            |(a, sa), (b, sb)| (a + b, sa.iter().zip(&sb).map(|(x, y)| x + y).collect()),
        );
    Ok(ViolationReport {
        realizations,
        violations,
        probability: if realizations == 0 { 0.0 } else { violations as f64 / realizations as f64 },
        per_step,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Example1Mode {
    /// Estimated moments taken as exact.
    Naive,
    /// Estimated moments with concentration radii.
    Robust,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Example1Trial {
    pub mean: f64,
    pub variance: f64,
    pub r1: f64,
    pub r2: f64,
    pub x_star: f64,
    /// `Pr(δ ≤ x*)` under the true `N(0, 1)`.
    pub true_probability: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Example1Report {
    pub mode: Example1Mode,
    pub sample_count: usize,
    pub beta: Probability,
    pub seed: u64,
    pub violation_fraction: f64,
    pub mean_x_star: f64,
    pub trials: Vec<Example1Trial>,
}

pub const EXAMPLE1_CONFIDENCE: f64 = 0.95;

/// `min x  s.t.  Pr(x ≥ δ) ≥ 0.95`, `δ ~ N(0, 1)`, solved from `sample_count`
/// draws per trial. Trial `k` draws from `seed::substream(seed, k)`, so both
/// modes see the same samples for the same seed.
pub fn example1(
    sample_count: usize,
    trials: usize,
    beta: Probability,
    mode: Example1Mode,
    seed: u64,
) -> Result<Example1Report> {
    if sample_count < 2 {
        return Err(Error::TooFewSamples(sample_count));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("at least one trial is required".into()));
    }
    let factors = RadiusFactors::new(1, sample_count, beta)?;
    let psi = statkit::normal_inv_cdf(Probability::new(EXAMPLE1_CONFIDENCE)?);
    let results: Vec<Example1Trial> = (0..trials as u64)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed::substream(seed, k);
            let draws: Vec<Vec<f64>> = (0..sample_count).map(|_| vec![StandardNormal.sample(&mut rng)]).collect();
            let set = SampleSet::from_rows(&draws)?;
            let (mean, cov) = moments::sample_moments(&set);
            let (mean, variance) = (mean[0], cov[(0, 0)]);
            let (r1, r2) = match mode {
                Example1Mode::Naive => (0.0, 0.0),
                Example1Mode::Robust => (factors.mean_radius(&cov), factors.diagonal_radii(&cov)[0]),
            };
            let x_star = robust_certificate(mean, variance, r1, r2, psi);
            let true_probability = statkit::normal_cdf(x_star);
            Ok(Example1Trial {
                mean,
                variance,
                r1,
                r2,
                x_star,
                true_probability,
                violated: true_probability < EXAMPLE1_CONFIDENCE,
            })
        })
        .collect::<Result<_>>()?;
    let violations = results.iter().filter(|t| t.violated).count();
    Ok(Example1Report {
        mode,
        sample_count,
        beta,
        seed,
        violation_fraction: violations as f64 / trials as f64,
        mean_x_star: results.iter().map(|t| t.x_star).sum::<f64>() / trials as f64,
        trials: results,
    })
}

/// Smallest `x` with `μ̂ + r1 + Ψ⁻¹ sqrt(σ̂² + r2) ≤ x`.
pub fn robust_certificate(mean: f64, variance: f64, r1: f64, r2: f64, psi: f64) -> f64 {
    mean + r1 + psi * (variance + r2).sqrt()
}
