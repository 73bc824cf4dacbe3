//! Face coefficients of the adversary's rectangular footprint.
//!
//! Each face is a vector `d = [a1, a2, b]` and a position `p` lies on the
//! safe side of the face when `dᵀ[p; 1] > 0`. The four faces are
//!
//! ```text
//! d1 = [ cosθ, −sinθ, −cosθ·y1 + sinθ·y2 − L/2]
//! d2 = [ sinθ,  cosθ, −sinθ·y1 − cosθ·y2 − W/2]
//! d3 = [−cosθ,  sinθ,  cosθ·y1 − sinθ·y2 − L/2]
//! d4 = [−sinθ, −cosθ,  sinθ·y1 + cosθ·y2 − W/2]
//! ```
//!
//! so that with `Δ = p − y` the body-frame coordinates are
//! `(cosθ·Δ1 − sinθ·Δ2, sinθ·Δ1 + cosθ·Δ2) = R(θ)Δ`.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::adversary::AdversaryState;

pub type FaceVector = Vector3<f64>;

pub const FACE_COUNT: usize = 4;

pub fn face_coefficients(state: &AdversaryState, length: f64, width: f64) -> [FaceVector; FACE_COUNT] {
    let (s, c) = state.theta.sin_cos();
    let (y1, y2) = (state.y1, state.y2);
    [
        Vector3::new(c, -s, -c * y1 + s * y2 - length / 2.0),
        Vector3::new(s, c, -s * y1 - c * y2 - width / 2.0),
        Vector3::new(-c, s, c * y1 - s * y2 - length / 2.0),
        Vector3::new(-s, -c, s * y1 + c * y2 - width / 2.0),
    ]
}

/// Footprint of the controlled vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EgoFootprint {
    pub length_m: f64,
    pub width_m: f64,
}

impl EgoFootprint {
    pub const POINT: Self = Self {
        length_m: 0.0,
        width_m: 0.0,
    };
}

/// How the ego footprint enlarges the adversary rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InflationRule {
    /// Half-length on the front and rear faces, half-width on the sides,
    /// measured in the adversary's body frame.
    #[default]
    AxisAligned,
    /// Half-diagonal of the ego footprint on every face.
    HalfDiagonal,
}

pub fn inflate_for_ego(
    faces: &[FaceVector; FACE_COUNT],
    ego: EgoFootprint,
    rule: InflationRule,
) -> [FaceVector; FACE_COUNT] {
    let (long, lat) = match rule {
        InflationRule::AxisAligned => (ego.length_m / 2.0, ego.width_m / 2.0),
        InflationRule::HalfDiagonal => {
            let r = 0.5 * ego.length_m.hypot(ego.width_m);
            (r, r)
        }
    };
    let mut out = *faces;
    out[0][2] -= long;
    out[2][2] -= long;
    out[1][2] -= lat;
    out[3][2] -= lat;
    out
}

/// Values `dᵢᵀ[p; 1]` for the four faces.
pub fn face_values(faces: &[FaceVector; FACE_COUNT], p: (f64, f64)) -> [f64; FACE_COUNT] {
    faces.map(|d| d[0] * p.0 + d[1] * p.1 + d[2])
}

/// True when no face separates `p` from the footprint.
pub fn is_inside(faces: &[FaceVector; FACE_COUNT], p: (f64, f64)) -> bool {
    face_values(faces, p).iter().all(|&v| v <= 0.0)
}
