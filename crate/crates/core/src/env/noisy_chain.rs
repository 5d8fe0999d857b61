//! Five-state chain with slippery actions.
//!
//! Cells `0..=4`, start in cell 0, observation `[cell / 4]`. Action 1 moves
//! right, action 0 moves left; with probability 0.2 the opposite move is
//! executed instead. Moving left from cell 0 stays in cell 0. Entering cell 4
//! pays reward 1 and ends the episode; every other step pays 0.
//!
//! Transition matrix for a non-terminal cell `s`:
//!
//! | action | `s + 1` | `max(s − 1, 0)` |
//! |--------|---------|-----------------|
//! | right  | 0.8     | 0.2             |
//! | left   | 0.2     | 0.8             |

pub const CELLS: usize = 5;
pub const GOAL: usize = CELLS - 1;
pub const SLIP: f64 = 0.2;
pub const GOAL_REWARD: f64 = 1.0;
pub const MAX_EPISODE_STEPS: usize = 12;

/// Exact `P(next | cell, action)` for a non-terminal cell.
pub fn transition_probs(cell: usize, action: usize) -> [f64; CELLS] {
    assert!(cell < GOAL && action < 2);
    let mut p = [0.0; CELLS];
    let (right, left) = if action == 1 { (1.0 - SLIP, SLIP) } else { (SLIP, 1.0 - SLIP) };
    p[cell + 1] += right;
    p[cell.saturating_sub(1)] += left;
    p
}

/// Next cell given the action and a uniform draw in `[0, 1)`.
pub(crate) fn advance(cell: usize, action: usize, u: f64) -> usize {
    let slipped = u < SLIP;
    let right = (action == 1) != slipped;
    if right {
        cell + 1
    } else {
        cell.saturating_sub(1)
    }
}

pub(crate) fn observe(cell: usize) -> f64 {
    cell as f64 / GOAL as f64
}
