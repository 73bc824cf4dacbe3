//! Risk allocation across single chance constraints and joint-confidence
//! accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statkit::Probability;

/// Per-cell risks `ε^t_{ij}` stored in `(t, j, i)` lexicographic order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskAllocation {
    pub total: Probability,
    pub horizon: usize,
    pub face_counts: Vec<usize>,
    pub cells: Vec<f64>,
}

impl RiskAllocation {
    /// Validates budget and per-cell bounds.
    pub fn new(total: Probability, horizon: usize, face_counts: Vec<usize>, cells: Vec<f64>) -> Result<Self> {
        check_total(total)?;
        let expected = horizon * face_counts.iter().sum::<usize>();
        if cells.len() != expected {
            return Err(Error::Dimension(format!("{} risk cells, expected {expected}", cells.len())));
        }
        if let Some(&bad) = cells.iter().find(|&&e| !(e > 0.0 && e < 0.5)) {
            return Err(Error::InvalidRisk(bad));
        }
        let sum: f64 = cells.iter().sum();
        if sum > total.value() * (1.0 + 1e-15) + 1e-15 {
            return Err(Error::InvalidParameter(format!(
                "risk cells sum to {sum}, exceeding the budget {}",
                total.value()
            )));
        }
        Ok(Self {
            total,
            horizon,
            face_counts,
            cells,
        })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.cells.iter().sum()
    }

    /// Position of cell `(t, j, i)`, `t` 1-based.
    pub fn index(&self, t: usize, obstacle: usize, face: usize) -> usize {
        let per_step: usize = self.face_counts.iter().sum();
        let before: usize = self.face_counts[..obstacle].iter().sum();
        (t - 1) * per_step + before + face
    }

    pub fn get(&self, t: usize, obstacle: usize, face: usize) -> f64 {
        self.cells[self.index(t, obstacle, face)]
    }
}

fn check_total(total: Probability) -> Result<()> {
    if total.value() >= 0.5 {
        return Err(Error::InvalidRisk(total.value()));
    }
    Ok(())
}

/// A rule for splitting the joint budget over single constraints.
pub trait RiskAllocator {
    fn allocate(&self, total: Probability, horizon: usize, face_counts: &[usize]) -> Result<RiskAllocation>;
}

/// `ε^t_{ij} = ε / (N Σ_j F_j)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Uniform;

impl RiskAllocator for Uniform {
    fn allocate(&self, total: Probability, horizon: usize, face_counts: &[usize]) -> Result<RiskAllocation> {
        check_total(total)?;
        let count = horizon * face_counts.iter().sum::<usize>();
        if count == 0 {
            return Err(Error::InvalidParameter("no chance constraints to allocate".into()));
        }
        let cell = total.value() / count as f64;
        RiskAllocation::new(total, horizon, face_counts.to_vec(), vec![cell; count])
    }
}

pub fn allocate_uniform(total: Probability, horizon: usize, face_counts: &[usize]) -> Result<RiskAllocation> {
    Uniform.allocate(total, horizon, face_counts)
}

/// Probability that every robustified row implies its chance constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceReport {
    pub beta: Probability,
    pub constraint_count: usize,
    /// `max(0, 1 − 2βk)`.
    pub confidence: f64,
    /// True when `2βk ≥ 1` and the guarantee is empty.
    pub vacuous: bool,
}

pub fn joint_confidence(beta: Probability, horizon: usize, face_counts: &[usize]) -> Result<ConfidenceReport> {
    if beta.value() >= 0.5 {
        return Err(Error::InvalidParameter(format!("β = {} must be below 0.5", beta.value())));
    }
    let constraint_count = horizon * face_counts.iter().sum::<usize>();
    if constraint_count == 0 {
        return Err(Error::InvalidParameter("no chance constraints to account for".into()));
    }
    let raw = 1.0 - 2.0 * beta.value() * constraint_count as f64;
    let vacuous = raw <= 0.0;
    if vacuous {
        log::warn!(
            "joint confidence bound is vacuous: 2βk = {} ≥ 1",
            2.0 * beta.value() * constraint_count as f64
        );
    }
    Ok(ConfidenceReport {
        beta,
        constraint_count,
        confidence: raw.max(0.0),
        vacuous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: f64) -> Probability {
        Probability::new(v).unwrap()
    }

    #[test]
    fn case_study_cells() {
        let a = allocate_uniform(p(0.05), 10, &[4]).unwrap();
        assert_eq!(a.len(), 40);
        assert!(a.cells.iter().all(|&e| e == 0.00125));
        assert!((a.sum() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn single_cell() {
        let a = allocate_uniform(p(0.4), 1, &[1]).unwrap();
        assert_eq!(a.cells, vec![0.4]);
    }

    #[test]
    fn sum_matches_budget_for_awkward_counts() {
        for (n, faces) in [(7, vec![3, 5]), (13, vec![4, 4, 6]), (1, vec![11])] {
            let a = allocate_uniform(p(0.05), n, &faces).unwrap();
            assert!((a.sum() - 0.05).abs() <= 1e-15);
        }
    }

    #[test]
    fn rejects_large_budget() {
        assert!(matches!(allocate_uniform(p(0.5), 10, &[4]), Err(Error::InvalidRisk(_))));
        assert!(allocate_uniform(p(0.7), 10, &[4]).is_err());
    }

    #[test]
    fn index_layout() {
        let a = allocate_uniform(p(0.05), 3, &[2, 3]).unwrap();
        assert_eq!(a.index(1, 0, 0), 0);
        assert_eq!(a.index(1, 1, 2), 4);
        assert_eq!(a.index(3, 1, 0), 12);
    }

    #[test]
    fn rejects_overspent_custom_allocation() {
        assert!(RiskAllocation::new(p(0.05), 1, vec![2], vec![0.03, 0.03]).is_err());
        assert!(RiskAllocation::new(p(0.05), 1, vec![2], vec![0.02, 0.03]).is_ok());
    }

    #[test]
    fn confidence_examples() {
        let r = joint_confidence(p(1e-3), 10, &[4]).unwrap();
        assert_eq!(r.constraint_count, 40);
        assert!((r.confidence - 0.92).abs() < 1e-15);
        assert!(!r.vacuous);

        let r = joint_confidence(p(0.4), 10, &[4]).unwrap();
        assert_eq!(r.confidence, 0.0);
        assert!(r.vacuous);

        let r = joint_confidence(p(1e-3), 1, &[1]).unwrap();
        assert!((r.confidence - 0.998).abs() < 1e-15);
    }
}
