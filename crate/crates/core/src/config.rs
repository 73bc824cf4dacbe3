//! Run configuration. Files are JSON with unit-suffixed keys; speeds may be
//! given in km/h and are converted to m/s on load. Every field has a default
//! matching the driving case study, and unknown keys are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::misocp::SolverSettings;
use crate::moments::CovarianceMode;
use crate::reformulate::BigMPolicy;
use crate::scenario::{AdversaryScenario, AdversaryState, EgoFootprint, InflationRule, TurnRateModel};
use crate::seed;
use crate::statkit::Probability;

pub const KMH_TO_MPS: f64 = 1.0 / 3.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MomentMode {
    /// Estimated moments treated as exact.
    Known,
    /// Estimated moments with concentration radii.
    #[default]
    Robust,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub initial_y1_m: f64,
    pub initial_y2_m: f64,
    pub initial_heading_deg: f64,
    pub speed_kmh: f64,
    pub length_m: f64,
    pub width_m: f64,
    pub turn_spread_rad: f64,
    pub total_turn_deg: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            initial_y1_m: 49.0,
            initial_y2_m: 1.75,
            initial_heading_deg: 0.0,
            speed_kmh: 22.0,
            length_m: 4.5,
            width_m: 2.0,
            turn_spread_rad: 0.66,
            total_turn_deg: 90.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerConfig {
    pub epsilon: f64,
    pub beta: f64,
    pub horizon: usize,
    pub sample_time_s: f64,
    pub samples: usize,
    pub mode: MomentMode,
    pub covariance: CovarianceMode,
    pub covariance_ridge: f64,
    pub big_m: BigMPolicy,
    pub ego_x1_m: f64,
    pub ego_x2_m: f64,
    pub ego_v1_kmh: f64,
    pub ego_v2_kmh: f64,
    pub ego_length_m: f64,
    pub ego_width_m: f64,
    pub inflation: InflationRule,
    pub lane_min_m: f64,
    pub lane_max_m: f64,
    pub accel1_min_mps2: f64,
    pub accel1_max_mps2: f64,
    pub accel2_max_abs_mps2: f64,
    pub velocity_center1_kmh: f64,
    pub velocity_center2_kmh: f64,
    pub solver: SolverSettings,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.05,
            beta: 1e-3,
            horizon: 10,
            sample_time_s: 0.4,
            samples: 5000,
            mode: MomentMode::Robust,
            covariance: CovarianceMode::Full,
            covariance_ridge: 1e-9,
            big_m: BigMPolicy::default(),
            ego_x1_m: 0.0,
            ego_x2_m: 1.75,
            ego_v1_kmh: 50.0,
            ego_v2_kmh: 0.0,
            ego_length_m: 4.5,
            ego_width_m: 2.0,
            inflation: InflationRule::AxisAligned,
            lane_min_m: 0.0,
            lane_max_m: 3.5,
            accel1_min_mps2: -3.0,
            accel1_max_mps2: 10.0,
            accel2_max_abs_mps2: 5.0,
            velocity_center1_kmh: 40.0,
            velocity_center2_kmh: 20.0,
            solver: SolverSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidationConfig {
    pub realizations: usize,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self { realizations: 100_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: "out".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub planner: PlannerConfig,
    pub validation: ValidationConfig,
    pub output: OutputConfig,
}

/// Hex SHA-256 of the compact JSON form of `value`.
pub fn content_hash<T: Serialize>(value: &T) -> String {
    hex::encode(Sha256::digest(serde_json::to_vec(value).expect("value serializes")))
}

/// Named random streams fanned out from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedPlan {
    pub master: u64,
    pub sampling: u64,
    pub validation: u64,
    pub example1: u64,
}

impl SeedPlan {
    pub fn new(master: u64) -> Self {
        Self {
            master,
            sampling: seed::derive(master, "sampling"),
            validation: seed::derive(master, "validation"),
            example1: seed::derive(master, "example1"),
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::InvalidParameter(format!("config field `{}`: {}", e.path(), e.inner())))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidParameter(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        content_hash(self)
    }

    pub fn seeds(&self) -> SeedPlan {
        SeedPlan::new(self.seed)
    }

    /// Field-level checks beyond the schema.
    pub fn check(&self) -> Result<()> {
        let p = &self.planner;
        let bad = |field: &str, why: &str| Err(Error::InvalidParameter(format!("config field `{field}`: {why}")));
        if !(p.epsilon > 0.0 && p.epsilon < 0.5) {
            return bad("planner.epsilon", "must lie in (0, 0.5)");
        }
        if !(p.beta > 0.0 && p.beta < 0.5) {
            return bad("planner.beta", "must lie in (0, 0.5)");
        }
        if p.horizon == 0 {
            return bad("planner.horizon", "must be at least 1");
        }
        if !(p.sample_time_s > 0.0) {
            return bad("planner.sample_time_s", "must be positive");
        }
        if p.samples < 4 {
            return bad("planner.samples", "must be at least 4 (face dimension 3)");
        }
        if !(p.lane_min_m < p.lane_max_m) {
            return bad("planner.lane_min_m", "must be below lane_max_m");
        }
        if !(p.accel1_min_mps2 < p.accel1_max_mps2) || !(p.accel2_max_abs_mps2 > 0.0) {
            return bad("planner.accel*", "input bounds must describe a nonempty box");
        }
        if !(p.velocity_center1_kmh > 0.0 && p.velocity_center2_kmh > 0.0) {
            return bad("planner.velocity_center*", "must be positive");
        }
        if !(p.covariance_ridge >= 0.0) {
            return bad("planner.covariance_ridge", "must be nonnegative");
        }
        if p.ego_length_m < 0.0 || p.ego_width_m < 0.0 {
            return bad("planner.ego_*", "dimensions must be nonnegative");
        }
        let s = &self.scenario;
        if !(s.speed_kmh > 0.0 && s.length_m > 0.0 && s.width_m > 0.0) {
            return bad("scenario", "speed and dimensions must be positive");
        }
        if !(s.total_turn_deg >= 0.0) || !(s.turn_spread_rad >= 0.0) {
            return bad("scenario.total_turn_deg", "turn parameters must be nonnegative");
        }
        Ok(())
    }

    pub fn epsilon(&self) -> Probability {
        Probability::new(self.planner.epsilon).expect("checked")
    }

    pub fn beta(&self) -> Probability {
        Probability::new(self.planner.beta).expect("checked")
    }

    pub fn adversary(&self) -> Result<AdversaryScenario> {
        let s = &self.scenario;
        AdversaryScenario::new(
            AdversaryState::new(s.initial_y1_m, s.initial_y2_m, s.initial_heading_deg.to_radians()),
            s.speed_kmh * KMH_TO_MPS,
            self.planner.horizon,
            self.planner.sample_time_s,
            s.length_m,
            s.width_m,
            TurnRateModel {
                spread_rad: s.turn_spread_rad,
                total_turn_cap_rad: s.total_turn_deg.to_radians(),
            },
        )
    }

    pub fn ego(&self) -> EgoFootprint {
        EgoFootprint {
            length_m: self.planner.ego_length_m,
            width_m: self.planner.ego_width_m,
        }
    }

    /// `(x1, x2, v1, v2)` in SI units.
    pub fn ego_initial_state(&self) -> [f64; 4] {
        let p = &self.planner;
        [p.ego_x1_m, p.ego_x2_m, p.ego_v1_kmh * KMH_TO_MPS, p.ego_v2_kmh * KMH_TO_MPS]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_case_study_defaults() {
        let cfg = RunConfig::from_json("{}").unwrap();
        assert_eq!(cfg, RunConfig::default());
        let adv = cfg.adversary().unwrap();
        assert!((adv.speed_mps - 22.0 / 3.6).abs() < 1e-15);
        assert!((adv.turn.total_turn_cap_rad - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((cfg.ego_initial_state()[2] - 13.888_888_888_888_89).abs() < 1e-12);
    }

    #[test]
    fn unknown_key_is_reported_with_path() {
        let err = RunConfig::from_json(r#"{"planner": {"epsilom": 0.1}}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("planner"), "{msg}");
        assert!(msg.contains("epsilom"), "{msg}");
    }

    #[test]
    fn range_violations_are_rejected() {
        assert!(RunConfig::from_json(r#"{"planner": {"epsilon": 0.6}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"planner": {"samples": 2}}"#).is_err());
        assert!(RunConfig::from_json(r#"{"scenario": {"speed_kmh": 0}}"#).is_err());
    }

    #[test]
    fn round_trip_and_hash() {
        let mut cfg = RunConfig::default();
        cfg.planner.mode = MomentMode::Known;
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        assert_ne!(RunConfig::default().hash(), cfg.hash());
    }

    #[test]
    fn streams_are_distinct() {
        let s = SeedPlan::new(7);
        assert_ne!(s.sampling, s.validation);
        assert_ne!(s.validation, s.example1);
        assert_eq!(s, SeedPlan::new(7));
    }
}
