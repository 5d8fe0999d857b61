//! Under-powered car in a valley, classic-control constants.
//!
//! State `[position, velocity]`; actions 0/1/2 = push left / none / right.
//!
//! ```text
//! v' = clip(v + (a − 1)·0.001 − 0.0025·cos(3p), −0.07, 0.07)
//! p' = clip(p + v', −1.2, 0.6);  v' = 0 if p' hit −1.2 while moving left
//! ```
//!
//! Terminates when `p' ≥ 0.5` and `v' ≥ 0`. Reward −1 per step.

use crate::scalar::Scalar;

pub const FORCE: f64 = 0.001;
pub const GRAVITY: f64 = 0.0025;
pub const MIN_POSITION: f64 = -1.2;
pub const MAX_POSITION: f64 = 0.6;
pub const MAX_SPEED: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.5;
pub const START_LOW: f64 = -0.6;
pub const START_HIGH: f64 = -0.4;
pub const MAX_EPISODE_STEPS: usize = 200;

pub(crate) fn advance<T: Scalar>(state: &mut [T], action: usize) -> bool {
    let (mut p, mut v) = (state[0], state[1]);
    let push = T::c(action as f64 - 1.0);
    v += push * T::c(FORCE) - T::c(GRAVITY) * (T::c(3.0) * p).cos();
    v = v.max(T::c(-MAX_SPEED)).min(T::c(MAX_SPEED));
    p += v;
    p = p.max(T::c(MIN_POSITION)).min(T::c(MAX_POSITION));
    if p == T::c(MIN_POSITION) && v < T::zero() {
        v = T::zero();
    }
    state[0] = p;
    state[1] = v;
    p >= T::c(GOAL_POSITION) && v >= T::zero()
}
