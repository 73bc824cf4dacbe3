//! Deterministic mixed-integer conic rows for the joint chance constraint.
//!
//! Each face `(t, j, i)` becomes one second-order-cone row in the lifted
//! position `x̃ = [S x_t; 1]`:
//!
//! ```text
//! ‖G x̃‖₂ + r1 ‖x̃‖₂ ≤ μ̂ᵀ x̃ + M z
//! ```
//!
//! with `G = Ψ⁻¹(1 − ε^t_{ij}) (Σ̂ + r2 I)^{1/2}`, and each `(t, j)` gets a
//! cardinality row `Σ_i z ≤ F_j − 1` that keeps at least one face active.

pub mod risk;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::moments::GaussianEstimate;
use crate::scenario::ObstacleFaceSet;
use crate::statkit::{self, Probability};

pub use risk::{allocate_uniform, joint_confidence, ConfidenceReport, RiskAllocation, RiskAllocator, Uniform};

/// Column layout of the binaries `z^t_{ij}`, `(t, j, i)` lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryLayout {
    pub horizon: usize,
    pub face_counts: Vec<usize>,
}

impl BinaryLayout {
    pub fn count(&self) -> usize {
        self.horizon * self.per_step()
    }

    fn per_step(&self) -> usize {
        self.face_counts.iter().sum()
    }

    /// 0-based position among the binaries; `t` is 1-based.
    pub fn index(&self, t: usize, obstacle: usize, face: usize) -> usize {
        let before: usize = self.face_counts[..obstacle].iter().sum();
        (t - 1) * self.per_step() + before + face
    }
}

/// `Σ_{i} z^t_{ij} ≤ rhs` over the listed binary positions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CardinalityRow {
    pub t: usize,
    pub obstacle: usize,
    pub members: Vec<usize>,
    pub rhs: usize,
}

pub fn big_m_rows(face_counts: &[usize], horizon: usize) -> (BinaryLayout, Vec<CardinalityRow>) {
    let layout = BinaryLayout {
        horizon,
        face_counts: face_counts.to_vec(),
    };
    let rows = (1..=horizon)
        .flat_map(|t| {
            let layout = &layout;
            face_counts.iter().enumerate().map(move |(j, &f)| CardinalityRow {
                t,
                obstacle: j,
                members: (0..f).map(|i| layout.index(t, j, i)).collect(),
                rhs: f.saturating_sub(1),
            })
        })
        .collect();
    (layout, rows)
}

/// One face constraint in the lifted position `x̃`:
/// `‖cone · x̃‖ + norm_margin · ‖x̃‖ ≤ meanᵀ x̃ + big_m · z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SocRow {
    pub t: usize,
    pub obstacle: usize,
    pub face: usize,
    pub cone: DMatrix<f64>,
    pub mean: DVector<f64>,
    pub norm_margin: f64,
    pub big_m: f64,
}

impl SocRow {
    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    /// `meanᵀx̃ + Mz − ‖cone·x̃‖ − r1‖x̃‖`; nonnegative iff the row holds.
    pub fn slack(&self, x_tilde: &DVector<f64>, z: f64) -> f64 {
        self.mean.dot(x_tilde) + self.big_m * z - (&self.cone * x_tilde).norm() - self.norm_margin * x_tilde.norm()
    }

    pub fn holds(&self, x_tilde: &DVector<f64>, z: f64) -> bool {
        self.slack(x_tilde, z) >= 0.0
    }
}

fn quantile_coefficient(eps_cell: f64) -> Result<f64> {
    if !(eps_cell > 0.0 && eps_cell < 0.5) {
        return Err(Error::InvalidRisk(eps_cell));
    }
    Ok(statkit::normal_inv_cdf(Probability::new(1.0 - eps_cell)?))
}

fn check_covariance(mean: &DVector<f64>, cov: &DMatrix<f64>) -> Result<()> {
    let n = mean.len();
    if cov.nrows() != n || cov.ncols() != n {
        return Err(Error::Dimension(format!(
            "covariance is {}×{}, mean has length {n}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite moment".into()));
    }
    let (lo, hi) = linalg::eigen_extremes(cov);
    if lo < -1e-12 * hi.abs().max(1.0) {
        return Err(Error::InvalidParameter(format!("covariance has eigenvalue {lo:e} < 0")));
    }
    Ok(())
}

/// Row for known moments `(μ, Σ)`.
pub fn soc_row_known(
    mean: &DVector<f64>,
    cov: &DMatrix<f64>,
    eps_cell: f64,
    big_m: f64,
    cell: (usize, usize, usize),
) -> Result<SocRow> {
    check_covariance(mean, cov)?;
    let psi = quantile_coefficient(eps_cell)?;
    Ok(SocRow {
        t: cell.0,
        obstacle: cell.1,
        face: cell.2,
        cone: linalg::symmetric_sqrt(cov) * psi,
        mean: mean.clone(),
        norm_margin: 0.0,
        big_m,
    })
}

/// Row robust to moment estimation error: `Σ̂` is inflated by `r2 I` and the
/// mean is backed off by `r1 ‖x̃‖`.
pub fn soc_row_robust(
    est: &GaussianEstimate,
    eps_cell: f64,
    big_m: f64,
    cell: (usize, usize, usize),
) -> Result<SocRow> {
    if !(est.r1 >= 0.0 && est.r2 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "radii must be nonnegative, got r1 = {}, r2 = {}",
            est.r1, est.r2
        )));
    }
    let n = est.dimension();
    let inflated = &est.covariance + DMatrix::identity(n, n) * est.r2;
    let mut row = soc_row_known(&est.mean, &inflated, eps_cell, big_m, cell)?;
    row.norm_margin = est.r1;
    Ok(row)
}

/// How the Big-M constant is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BigMPolicy {
    /// Bound every row over the reachable position box, scale by `inflation`,
    /// and never go below `floor`.
    Auto { inflation: f64, floor: f64 },
    Fixed { value: f64 },
}

impl Default for BigMPolicy {
    fn default() -> Self {
        BigMPolicy::Auto {
            inflation: 2.0,
            floor: 1e4,
        }
    }
}

/// Upper bound of `|μᵀx̃| + ‖G x̃‖ + r1 ‖x̃‖` over `x̃ = [p; 1]` with `p` in
/// the box, where `‖G‖_F = Ψ⁻¹ sqrt(tr(Σ̂ + r2 I))`.
pub fn row_magnitude_bound(est: &GaussianEstimate, eps_cell: f64, position_box: &[(f64, f64)]) -> Result<f64> {
    let n = est.dimension();
    if position_box.len() + 1 != n {
        return Err(Error::Dimension(format!(
            "position box has {} axes, faces have dimension {n}",
            position_box.len()
        )));
    }
    let psi = quantile_coefficient(eps_cell)?;
    let reach: Vec<f64> = position_box.iter().map(|&(lo, hi)| lo.abs().max(hi.abs())).collect();
    let linear = reach
        .iter()
        .zip(est.mean.iter())
        .map(|(r, m)| r * m.abs())
        .sum::<f64>()
        + est.mean[n - 1].abs();
    let norm = (reach.iter().map(|r| r * r).sum::<f64>() + 1.0).sqrt();
    let cone = psi * (est.covariance.trace() + n as f64 * est.r2).max(0.0).sqrt();
    Ok(linear + (cone + est.r1) * norm)
}

pub fn choose_big_m(
    faces: &ObstacleFaceSet,
    allocation: &RiskAllocation,
    position_box: &[(f64, f64)],
    policy: BigMPolicy,
) -> Result<f64> {
    match policy {
        BigMPolicy::Fixed { value } if value > 0.0 => Ok(value),
        BigMPolicy::Fixed { value } => Err(Error::InvalidParameter(format!("Big-M must be positive, got {value}"))),
        BigMPolicy::Auto { inflation, floor } => {
            let mut worst: f64 = 0.0;
            for f in faces.faces() {
                let eps = allocation.get(f.t, f.obstacle, f.face);
                worst = worst.max(row_magnitude_bound(f.estimate, eps, position_box)?);
            }
            let m = (inflation * worst).max(floor);
            log::info!("Big-M = {m:.6e} (row bound {worst:.6e} over the reachable box)");
            Ok(m)
        }
    }
}

/// The full chance-constraint block handed to the assembler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChanceRows {
    /// Maps the state to the constrained position; `x̃ = [selector · x_t; 1]`.
    pub selector: DMatrix<f64>,
    pub layout: BinaryLayout,
    pub cardinality: Vec<CardinalityRow>,
    /// One row per binary, same order.
    pub rows: Vec<SocRow>,
    pub allocation: RiskAllocation,
    pub big_m: f64,
}

impl ChanceRows {
    pub fn robust_row_count(&self) -> usize {
        self.rows.iter().filter(|r| r.norm_margin > 0.0).count()
    }
}

/// Builds every row from the face estimates (radii as stored; pass
/// [`ObstacleFaceSet::as_exact`] for known moments).
pub fn reformulate(faces: &ObstacleFaceSet, allocation: &RiskAllocation, big_m: f64) -> Result<ChanceRows> {
    let counts = faces.face_counts();
    if allocation.horizon != faces.horizon || allocation.face_counts != counts {
        return Err(Error::Dimension("risk allocation does not match the face set".into()));
    }
    let (layout, cardinality) = big_m_rows(&counts, faces.horizon);
    let cells: Vec<_> = faces.faces().collect();
    let rows = cells
        .par_iter()
        .map(|f| {
            let eps = allocation.get(f.t, f.obstacle, f.face);
            soc_row_robust(f.estimate, eps, big_m, (f.t, f.obstacle, f.face))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ChanceRows {
        selector: faces.selector.clone(),
        layout,
        cardinality,
        rows,
        allocation: allocation.clone(),
        big_m,
    })
}
