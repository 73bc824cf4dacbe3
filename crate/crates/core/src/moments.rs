//! Gaussian moment estimation with concentration radii.
//!
//! From `N_s` i.i.d. samples of a Gaussian vector `d ∈ Rⁿ` we form the sample
//! mean and the unbiased sample covariance, and bound the estimation errors:
//!
//! * `‖μ − μ̂‖₂ ≤ r1 = sqrt(λ_max(Σ̂) · T²_{n,N_s−1}(1−β) / N_s)`
//! * `‖Σ − Σ̂‖_F ≤ r2`, built from per-diagonal χ² intervals
//!   `r2_i = Σ̂_ii · max{|1 − (N_s−1)/χ²_{N_s−1,1−β/(2n)}|, |1 − (N_s−1)/χ²_{N_s−1,β/(2n)}|}`.
//!
//! Each bound holds with probability at least `1 − β`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::statkit::{self, Probability};

/// Relative eigenvalue floor for accepting a covariance estimate.
pub const PD_THRESHOLD: f64 = 1e-12;

/// `N_s` samples of equal dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dimension: usize,
    samples: Vec<DVector<f64>>,
}

impl SampleSet {
    pub fn new(samples: Vec<DVector<f64>>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::TooFewSamples(samples.len()));
        }
        let dimension = samples[0].len();
        if dimension == 0 {
            return Err(Error::Dimension("samples must have positive length".into()));
        }
        if let Some((index, s)) = samples.iter().enumerate().find(|(_, s)| s.len() != dimension) {
            return Err(Error::RaggedSamples {
                index,
                expected: dimension,
                found: s.len(),
            });
        }
        Ok(Self { dimension, samples })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows.iter().map(|r| DVector::from_column_slice(r)).collect())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[DVector<f64>] {
        &self.samples
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceMode {
    /// General covariance; `r2` includes the off-diagonal terms.
    #[default]
    Full,
    /// Off-diagonals of `Σ̂` are zeroed and `r2 = sqrt(Σ r2_i²)`.
    Diagonal,
}

/// Sample mean (divisor `N_s`) and covariance (divisor `N_s − 1`).
pub fn estimate(samples: &SampleSet) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let (mean, cov) = sample_moments(samples);
    check_positive_definite(&cov)?;
    Ok((mean, cov))
}

/// [`estimate`] without the positive-definiteness gate.
pub fn sample_moments(samples: &SampleSet) -> (DVector<f64>, DMatrix<f64>) {
    let n = samples.dimension();
    let count = samples.len() as f64;
    let mean = samples
        .samples()
        .iter()
        .fold(DVector::zeros(n), |acc, s| acc + s)
        / count;
    let mut cov = DMatrix::zeros(n, n);
    for s in samples.samples() {
        let dev = s - &mean;
        cov.syger(1.0, &dev, &dev, 1.0);
    }
    cov /= count - 1.0;
    cov.fill_upper_triangle_with_lower_triangle();
    (mean, cov)
}

fn check_positive_definite(cov: &DMatrix<f64>) -> Result<()> {
    let (lo, hi) = linalg::eigen_extremes(cov);
    let ratio = if hi > 0.0 { lo / hi } else { 0.0 };
    if ratio > PD_THRESHOLD {
        Ok(())
    } else {
        Err(Error::DegenerateCovariance { ratio })
    }
}

/// Quantile-dependent factors of `r1` and `r2` for fixed `(n, N_s, β)`.
///
/// Precomputing these lets Monte Carlo studies evaluate radii for many
/// sample sets without re-inverting the χ² and F distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusFactors {
    pub dimension: usize,
    pub sample_count: usize,
    /// `T²_{n,N_s−1}(1−β)`.
    pub hotelling: f64,
    /// `max{|1 − (N_s−1)/χ²_hi|, |1 − (N_s−1)/χ²_lo|}`.
    pub variance_factor: f64,
}

impl RadiusFactors {
    pub fn new(dimension: usize, sample_count: usize, beta: Probability) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::Dimension("dimension must be positive".into()));
        }
        if sample_count < 2 {
            return Err(Error::TooFewSamples(sample_count));
        }
        let dof = (sample_count - 1) as u32;
        let hotelling = statkit::hotelling_t2_quantile(dimension as u32, dof, beta.complement())?;
        let tail = Probability::new(beta.value() / (2.0 * dimension as f64))?;
        let chi_hi = statkit::chi2_quantile(dof, tail.complement())?;
        let chi_lo = statkit::chi2_quantile(dof, tail)?;
        let k = dof as f64;
        let variance_factor = (1.0 - k / chi_hi).abs().max((1.0 - k / chi_lo).abs());
        Ok(Self {
            dimension,
            sample_count,
            hotelling,
            variance_factor,
        })
    }

    pub fn mean_radius(&self, cov: &DMatrix<f64>) -> f64 {
        let (_, lambda_max) = linalg::eigen_extremes(cov);
        (lambda_max * self.hotelling / self.sample_count as f64).sqrt()
    }

    /// Per-diagonal radii `r2_i`.
    pub fn diagonal_radii(&self, cov: &DMatrix<f64>) -> DVector<f64> {
        cov.diagonal() * self.variance_factor
    }

    pub fn cov_radius(&self, cov: &DMatrix<f64>, mode: CovarianceMode) -> f64 {
        let r = self.diagonal_radii(cov);
        let mut total = r.norm_squared();
        if mode == CovarianceMode::Full {
            let n = cov.nrows();
            for i in 0..n {
                for j in (0..n).filter(|&j| j != i) {
                    let bound = ((cov[(i, i)] + r[i]) * (cov[(j, j)] + r[j])).sqrt()
                        + cov[(i, j)].abs();
                    total += bound * bound;
                }
            }
        }
        total.sqrt()
    }
}

/// `r1` for a covariance estimate from `sample_count` samples of dimension `n`.
pub fn mean_radius(cov: &DMatrix<f64>, n: usize, sample_count: usize, beta: Probability) -> Result<f64> {
    Ok(RadiusFactors::new(n, sample_count, beta)?.mean_radius(cov))
}

/// `r2` for a covariance estimate; see [`CovarianceMode`].
pub fn cov_radius(
    cov: &DMatrix<f64>,
    n: usize,
    sample_count: usize,
    beta: Probability,
    mode: CovarianceMode,
) -> Result<f64> {
    Ok(RadiusFactors::new(n, sample_count, beta)?.cov_radius(cov, mode))
}

/// The diagonal-case bound written without the outer square root,
/// `Σ r2_i²`. It is not a valid Frobenius bound; exposed only so tests can
/// document how it compares with [`cov_radius`] in diagonal mode.
pub fn diagonal_radius_unrooted(cov: &DMatrix<f64>, factors: &RadiusFactors) -> f64 {
    factors.diagonal_radii(cov).norm_squared()
}

/// Estimated moments of one uncertain coefficient vector with their
/// concentration radii.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianEstimate {
    pub mean: DVector<f64>,
    pub covariance: DMatrix<f64>,
    pub sample_count: usize,
    pub r1: f64,
    pub r2: f64,
    pub beta: Probability,
    pub mode: CovarianceMode,
}

impl GaussianEstimate {
    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    /// Copy with `r1 = r2 = 0`, i.e. treating the estimate as exact.
    pub fn as_exact(&self) -> Self {
        Self {
            r1: 0.0,
            r2: 0.0,
            ..self.clone()
        }
    }
}

/// Estimate moments and radii in one go. In diagonal mode the covariance's
/// off-diagonal entries are zeroed before the radii are computed, and the
/// stored covariance is the zeroed one.
pub fn build_estimate(samples: &SampleSet, beta: Probability, mode: CovarianceMode) -> Result<GaussianEstimate> {
    let factors = RadiusFactors::new(samples.dimension(), samples.len(), beta)?;
    build_estimate_with(samples, &factors, beta, mode)
}

/// [`build_estimate`] with precomputed quantile factors.
pub fn build_estimate_with(
    samples: &SampleSet,
    factors: &RadiusFactors,
    beta: Probability,
    mode: CovarianceMode,
) -> Result<GaussianEstimate> {
    if factors.dimension != samples.dimension() || factors.sample_count != samples.len() {
        return Err(Error::Dimension(format!(
            "radius factors for (n={}, N_s={}) used with (n={}, N_s={})",
            factors.dimension,
            factors.sample_count,
            samples.dimension(),
            samples.len()
        )));
    }
    let (mean, covariance) = sample_moments(samples);
    finish_estimate(mean, covariance, samples.len(), factors, beta, mode)
}

/// Like [`build_estimate_with`], but a covariance that fails the
/// positive-definiteness gate is retried with `ridge · λ_max(Σ̂) · I` added.
///
/// Face coefficients whose offset is an exact linear function of the
/// normal (a deterministic obstacle position) produce singular sample
/// covariances; the ridge only ever enlarges `Σ̂`.
pub fn build_estimate_ridged(
    samples: &SampleSet,
    factors: &RadiusFactors,
    beta: Probability,
    mode: CovarianceMode,
    ridge: f64,
) -> Result<GaussianEstimate> {
    match build_estimate_with(samples, factors, beta, mode) {
        Err(Error::DegenerateCovariance { ratio }) if ridge > 0.0 => {
            let (mean, covariance) = sample_moments(samples);
            let (_, lambda_max) = linalg::eigen_extremes(&covariance);
            let shift = ridge * lambda_max.max(f64::MIN_POSITIVE);
            log::debug!("covariance ratio {ratio:e} below threshold; adding ridge {shift:e}");
            let n = covariance.nrows();
            let covariance = covariance + DMatrix::identity(n, n) * shift;
            finish_estimate(mean, covariance, samples.len(), factors, beta, mode)
        }
        other => other,
    }
}

fn finish_estimate(
    mean: DVector<f64>,
    mut covariance: DMatrix<f64>,
    sample_count: usize,
    factors: &RadiusFactors,
    beta: Probability,
    mode: CovarianceMode,
) -> Result<GaussianEstimate> {
    if mode == CovarianceMode::Diagonal {
        covariance = DMatrix::from_diagonal(&covariance.diagonal());
    }
    check_positive_definite(&covariance)?;
    let r1 = factors.mean_radius(&covariance);
    let r2 = factors.cov_radius(&covariance, mode);
    Ok(GaussianEstimate {
        mean,
        covariance,
        sample_count,
        r1,
        r2,
        beta,
        mode,
    })
}
