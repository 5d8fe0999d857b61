//! Cart-pole balancing with the classic-control constants.
//!
//! State `[x, x_dot, theta, theta_dot]`. Action 0 pushes left, 1 pushes right
//! with a force of 10 N. One explicit Euler step of 0.02 s per action:
//!
//! ```text
//! temp      = (F + m_p l θ'^2 sin θ) / (m_c + m_p)
//! θ''       = (g sin θ − cos θ · temp) / (l (4/3 − m_p cos^2 θ / (m_c + m_p)))
//! x''       = temp − m_p l θ'' cos θ / (m_c + m_p)
//! x  += τ x',  x'  += τ x'',  θ += τ θ',  θ' += τ θ''
//! ```
//!
//! with g = 9.8, m_c = 1.0, m_p = 0.1, l = 0.5 (half pole length). The episode
//! terminates when |x| > 2.4 or |θ| > 12°. Every step yields reward 1.

use crate::scalar::Scalar;

pub const GRAVITY: f64 = 9.8;
pub const MASS_CART: f64 = 1.0;
pub const MASS_POLE: f64 = 0.1;
pub const HALF_LENGTH: f64 = 0.5;
pub const FORCE_MAG: f64 = 10.0;
pub const TAU: f64 = 0.02;
pub const X_THRESHOLD: f64 = 2.4;
pub const THETA_THRESHOLD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;
pub const START_BOX: f64 = 0.05;
pub const MAX_EPISODE_STEPS: usize = 200;

/// Advances `state` by one Euler step; returns whether the pole fell or the
/// cart left the track.
pub(crate) fn advance<T: Scalar>(state: &mut [T], action: usize) -> bool {
    let (x, x_dot, theta, theta_dot) = (state[0], state[1], state[2], state[3]);
    let total_mass = T::c(MASS_CART + MASS_POLE);
    let pole_ml = T::c(MASS_POLE * HALF_LENGTH);
    let force = if action == 1 { T::c(FORCE_MAG) } else { T::c(-FORCE_MAG) };
    let (sin, cos) = (theta.sin(), theta.cos());

    let temp = (force + pole_ml * theta_dot * theta_dot * sin) / total_mass;
    let theta_acc = (T::c(GRAVITY) * sin - cos * temp)
        / (T::c(HALF_LENGTH) * (T::c(4.0 / 3.0) - T::c(MASS_POLE) * cos * cos / total_mass));
    let x_acc = temp - pole_ml * theta_acc * cos / total_mass;

    let tau = T::c(TAU);
    state[0] = x + tau * x_dot;
    state[1] = x_dot + tau * x_acc;
    state[2] = theta + tau * theta_dot;
    state[3] = theta_dot + tau * theta_acc;

    let xt = T::c(X_THRESHOLD);
    let tt = T::c(THETA_THRESHOLD);
    state[0] < -xt || state[0] > xt || state[2] < -tt || state[2] > tt
}
