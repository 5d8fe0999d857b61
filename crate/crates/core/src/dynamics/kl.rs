use crate::scalar::Scalar;

/// `KL(N(mu_p, sd_p²) ‖ N(mu_q, sd_q²))` in closed form.
///
/// Written as `½(r² − 1 − 2 ln r) + (mu_p − mu_q)² / (2 sd_q²)` with
/// `r = sd_p / sd_q`; both terms are nonnegative, so the result is clamped
/// at zero against rounding.
pub fn gaussian_kl<T: Scalar>(mu_p: T, sd_p: T, mu_q: T, sd_q: T) -> T {
    let half = T::c(0.5);
    let r = sd_p / sd_q;
    let spread = half * (r * r - T::one() - T::c(2.0) * r.ln());
    let d = mu_p - mu_q;
    let shift = d * d / (T::c(2.0) * sd_q * sd_q);
    spread.max(T::zero()) + shift
}
