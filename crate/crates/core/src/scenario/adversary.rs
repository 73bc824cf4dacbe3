use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pose of the adversary vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdversaryState {
    pub y1: f64,
    pub y2: f64,
    /// Heading in `(−π, π]`.
    pub theta: f64,
}

impl AdversaryState {
    pub fn new(y1: f64, y2: f64, theta: f64) -> Self {
        Self {
            y1,
            y2,
            theta: wrap_angle(theta),
        }
    }
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Per-step turn increments `ω_t ~ U(lower, min(upper, cap − Σ_{τ<t} ω_τ))`
/// with `lower/upper = (π ∓ spread) / (2(N+1))`, in radians per step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TurnRateModel {
    pub spread_rad: f64,
    pub total_turn_cap_rad: f64,
}

impl Default for TurnRateModel {
    fn default() -> Self {
        Self {
            spread_rad: 0.66,
            total_turn_cap_rad: FRAC_PI_2,
        }
    }
}

impl TurnRateModel {
    pub fn bounds(&self, horizon: usize) -> (f64, f64) {
        let denom = 2.0 * (horizon as f64 + 1.0);
        ((PI - self.spread_rad) / denom, (PI + self.spread_rad) / denom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdversaryScenario {
    pub initial: AdversaryState,
    pub speed_mps: f64,
    pub horizon: usize,
    pub sample_time_s: f64,
    pub length_m: f64,
    pub width_m: f64,
    pub turn: TurnRateModel,
}

impl AdversaryScenario {
    pub fn new(
        initial: AdversaryState,
        speed_mps: f64,
        horizon: usize,
        sample_time_s: f64,
        length_m: f64,
        width_m: f64,
        turn: TurnRateModel,
    ) -> Result<Self> {
        let positive = [
            ("speed", speed_mps),
            ("sample time", sample_time_s),
            ("length", length_m),
            ("width", width_m),
        ];
        if let Some((name, v)) = positive.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::InvalidParameter(format!("adversary {name} must be positive, got {v}")));
        }
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        Ok(Self {
            initial,
            speed_mps,
            horizon,
            sample_time_s,
            length_m,
            width_m,
            turn,
        })
    }

    /// The turning adversary of the driving case study: 22 km/h, starting at
    /// (49 m, 1.75 m) with heading 0, 4.5 m × 2 m, `T_s = 0.4 s`.
    pub fn case_study(horizon: usize) -> Self {
        Self {
            initial: AdversaryState::new(49.0, 1.75, 0.0),
            speed_mps: 22.0 / 3.6,
            horizon,
            sample_time_s: 0.4,
            length_m: 4.5,
            width_m: 2.0,
            turn: TurnRateModel::default(),
        }
    }
}

/// Draws `ω_0 … ω_{N−1}` sequentially. When the remaining turn budget falls
/// below the lower endpoint, the draw collapses to the remaining budget.
pub fn sample_turn_rates<R: Rng + ?Sized>(scenario: &AdversaryScenario, rng: &mut R) -> Vec<f64> {
    let (lower, upper) = scenario.turn.bounds(scenario.horizon);
    let cap = scenario.turn.total_turn_cap_rad;
    let mut total = 0.0;
    (0..scenario.horizon)
        .map(|_| {
            let hi = upper.min(cap - total);
            let omega = if hi <= lower {
                hi.max(0.0)
            } else {
                lower + (hi - lower) * rng.gen::<f64>()
            };
            total += omega;
            omega
        })
        .collect()
}

/// Forward-Euler unicycle rollout; returns the states at `t = 1..=N`.
pub fn propagate_adversary(scenario: &AdversaryScenario, turn_rates: &[f64]) -> Result<Vec<AdversaryState>> {
    if turn_rates.len() != scenario.horizon {
        return Err(Error::Dimension(format!(
            "expected {} turn rates, got {}",
            scenario.horizon,
            turn_rates.len()
        )));
    }
    let step = scenario.sample_time_s * scenario.speed_mps;
    let mut state = scenario.initial;
    // heading accumulated unwrapped so that the total turn telescopes exactly
    let mut heading = state.theta;
    Ok(turn_rates
        .iter()
        .map(|&omega| {
            state = AdversaryState {
                y1: state.y1 + step * heading.cos(),
                y2: state.y2 + step * heading.sin(),
                theta: 0.0,
            };
            heading += omega;
            state.theta = wrap_angle(heading);
            state
        })
        .collect())
}

/// One sampled adversary trajectory.
pub fn sample_trajectory<R: Rng + ?Sized>(scenario: &AdversaryScenario, rng: &mut R) -> Vec<AdversaryState> {
    let rates = sample_turn_rates(scenario, rng);
    propagate_adversary(scenario, &rates).expect("sampled rates match the horizon")
}
