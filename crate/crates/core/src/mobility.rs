//! FBS trajectory control: gradient descent on the mean UE distance,
//! subject to a speed cap and a rectangular flight zone.
//!
//! Each move computes the gradient velocity, clamps its magnitude to
//! `v_max`, integrates over one tick and finally clamps the position into
//! the bounds.

use crate::geometry::{Bounds, Position};
use crate::radio::distance;
use crate::scenario::FbsState;

/// Per-UE weights summing to one; `None` means uniform `1/M`.
fn weight(weights: Option<&[f64]>, i: usize, m: usize) -> f64 {
    weights.map_or(1.0 / m as f64, |w| w[i])
}

/// Mean distance from the FBS to the UEs.
pub fn coverage_objective(ues: &[Position], fbs: Position, altitude: f64, weights: Option<&[f64]>) -> f64 {
    let m = ues.len();
    ues.iter()
        .enumerate()
        .map(|(i, &u)| weight(weights, i, m) * distance(u, fbs, altitude))
        .sum()
}

/// Analytic gradient of [`coverage_objective`] with respect to the FBS
/// ground position.
pub fn objective_gradient(ues: &[Position], fbs: Position, altitude: f64, weights: Option<&[f64]>) -> (f64, f64) {
    let m = ues.len();
    ues.iter().enumerate().fold((0.0, 0.0), |(gx, gy), (i, &u)| {
        let w = weight(weights, i, m) / distance(u, fbs, altitude);
        (gx + w * (fbs.x - u.x), gy + w * (fbs.y - u.y))
    })
}

/// Demand-proportional weights, or uniform when every demand is zero.
pub fn demand_weights(demands: &[f64]) -> Vec<f64> {
    let total: f64 = demands.iter().sum();
    if total > 0.0 {
        demands.iter().map(|d| d / total).collect()
    } else {
        vec![1.0 / demands.len() as f64; demands.len()]
    }
}

/// Gradient-descent velocity `-eta * grad J`, rescaled to `v_max` if faster.
pub fn velocity_from_gradient(
    ues: &[Position],
    fbs: &FbsState,
    eta: f64,
    v_max: f64,
    weights: Option<&[f64]>,
) -> (f64, f64) {
    let (gx, gy) = objective_gradient(ues, fbs.pos, fbs.altitude, weights);
    clamp_speed((-eta * gx, -eta * gy), v_max)
}

pub fn clamp_speed(v: (f64, f64), v_max: f64) -> (f64, f64) {
    let speed = v.0.hypot(v.1);
    if speed > v_max {
        let s = v_max / speed;
        (v.0 * s, v.1 * s)
    } else {
        v
    }
}

/// Integrates one tick and clamps into `bounds`. The stored velocity is the
/// commanded one, before the position clamp.
pub fn step_position(fbs: &FbsState, v: (f64, f64), dt: f64, bounds: &Bounds) -> FbsState {
    let moved = Position::new(fbs.pos.x + v.0 * dt, fbs.pos.y + v.1 * dt);
    FbsState {
        pos: bounds.clamp(moved),
        altitude: fbs.altitude,
        velocity: v,
    }
}
