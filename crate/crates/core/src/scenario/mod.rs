//! The uncertain environment: obstacles with Gaussian faces, the turning
//! adversary of the driving case study, and per-face sample collection.

pub mod adversary;
pub mod faces;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::{self, CovarianceMode, GaussianEstimate, RadiusFactors, SampleSet};
use crate::seed;
use crate::statkit::Probability;

pub use adversary::{
    propagate_adversary, sample_trajectory, sample_turn_rates, AdversaryScenario, AdversaryState, TurnRateModel,
};
pub use faces::{face_coefficients, inflate_for_ego, EgoFootprint, FaceVector, InflationRule, FACE_COUNT};

/// Faces of one obstacle over the horizon; `cells[t − 1][i]` holds face `i`
/// at step `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleFaces {
    pub cells: Vec<Vec<GaussianEstimate>>,
}

impl ObstacleFaces {
    pub fn face_count(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }
}

/// One `(t, j, i)` cell. `t` is the 1-based step of the state it constrains;
/// `obstacle` and `face` are 0-based.
#[derive(Debug, Clone, Copy)]
pub struct UncertainFace<'a> {
    pub t: usize,
    pub obstacle: usize,
    pub face: usize,
    pub estimate: &'a GaussianEstimate,
}

/// All uncertain faces of all obstacles, with the selector that extracts the
/// constrained position from the full state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleFaceSet {
    pub horizon: usize,
    pub selector: DMatrix<f64>,
    pub obstacles: Vec<ObstacleFaces>,
}

impl ObstacleFaceSet {
    pub fn new(horizon: usize, selector: DMatrix<f64>, obstacles: Vec<ObstacleFaces>) -> Result<Self> {
        let dim = selector.nrows() + 1;
        for (j, ob) in obstacles.iter().enumerate() {
            if ob.cells.len() != horizon {
                return Err(Error::Dimension(format!(
                    "obstacle {j} has {} steps, horizon is {horizon}",
                    ob.cells.len()
                )));
            }
            let faces = ob.face_count();
            if faces == 0 {
                return Err(Error::Dimension(format!("obstacle {j} has no faces")));
            }
            for (t, row) in ob.cells.iter().enumerate() {
                if row.len() != faces {
                    return Err(Error::Dimension(format!("obstacle {j} step {} face count varies", t + 1)));
                }
                if let Some(bad) = row.iter().find(|e| e.dimension() != dim) {
                    return Err(Error::Dimension(format!(
                        "face estimate has dimension {}, expected {dim}",
                        bad.dimension()
                    )));
                }
            }
        }
        Ok(Self {
            horizon,
            selector,
            obstacles,
        })
    }

    pub fn face_counts(&self) -> Vec<usize> {
        self.obstacles.iter().map(ObstacleFaces::face_count).collect()
    }

    /// Cells in `(t, j, i)` lexicographic order.
    pub fn faces(&self) -> impl Iterator<Item = UncertainFace<'_>> {
        (1..=self.horizon).flat_map(move |t| {
            self.obstacles.iter().enumerate().flat_map(move |(j, ob)| {
                ob.cells[t - 1].iter().enumerate().map(move |(i, estimate)| UncertainFace {
                    t,
                    obstacle: j,
                    face: i,
                    estimate,
                })
            })
        })
    }

    /// The same faces with all radii set to zero.
    pub fn as_exact(&self) -> Self {
        let mut out = self.clone();
        for cell in out.obstacles.iter_mut().flat_map(|o| o.cells.iter_mut().flatten()) {
            *cell = cell.as_exact();
        }
        out
    }
}

/// Sampled adversary trajectories and the per-`(t, face)` coefficient samples
/// they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceSamples {
    pub trajectories: Vec<Vec<AdversaryState>>,
    /// `grid[t − 1][i]`.
    pub grid: Vec<Vec<SampleSet>>,
}

/// Samples `sample_count` trajectories (trajectory `k` from
/// `seed::substream(base_seed, k)`) and collects inflated face coefficients.
pub fn build_face_samples(
    scenario: &AdversaryScenario,
    sample_count: usize,
    base_seed: u64,
    ego: EgoFootprint,
    rule: InflationRule,
) -> Result<FaceSamples> {
    if sample_count < 2 {
        return Err(Error::TooFewSamples(sample_count));
    }
    let trajectories: Vec<Vec<AdversaryState>> = (0..sample_count as u64)
        .into_par_iter()
        .map(|k| sample_trajectory(scenario, &mut seed::substream(base_seed, k)))
        .collect();

    let grid = (0..scenario.horizon)
        .map(|t| {
            let mut per_face: Vec<Vec<DVector<f64>>> = vec![Vec::with_capacity(sample_count); FACE_COUNT];
            for traj in &trajectories {
                let faces = inflate_for_ego(
                    &face_coefficients(&traj[t], scenario.length_m, scenario.width_m),
                    ego,
                    rule,
                );
                for (bucket, d) in per_face.iter_mut().zip(faces.iter()) {
                    bucket.push(DVector::from_column_slice(d.as_slice()));
                }
            }
            per_face.into_iter().map(SampleSet::new).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FaceSamples { trajectories, grid })
}

/// Relative ridge applied to singular face covariances (see
/// [`moments::build_estimate_ridged`]).
pub const DEFAULT_COVARIANCE_RIDGE: f64 = 1e-9;

/// Estimates every cell of a sample grid as faces of a single obstacle.
pub fn estimate_faces(
    samples: &FaceSamples,
    selector: DMatrix<f64>,
    beta: Probability,
    mode: CovarianceMode,
    ridge: f64,
) -> Result<ObstacleFaceSet> {
    let first = samples
        .grid
        .first()
        .and_then(|row| row.first())
        .ok_or_else(|| Error::Dimension("empty sample grid".into()))?;
    let factors = RadiusFactors::new(first.dimension(), first.len(), beta)?;
    let cells = samples
        .grid
        .par_iter()
        .map(|row| {
            row.iter()
                .map(|set| moments::build_estimate_ridged(set, &factors, beta, mode, ridge))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    ObstacleFaceSet::new(samples.grid.len(), selector, vec![ObstacleFaces { cells }])
}

/// Selector matrix picking the first two state components.
pub fn planar_selector(state_dim: usize) -> DMatrix<f64> {
    let mut sel = DMatrix::zeros(2, state_dim);
    sel[(0, 0)] = 1.0;
    sel[(1, 1)] = 1.0;
    sel
}
