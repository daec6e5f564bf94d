//! Closed-form count rates.

/// Expected pair coincidences per second, `η_s η_as χ R N`.
pub fn pair_rate(eta_s: f64, eta_as: f64, chi: f64, retrieval: f64, trials_per_second: u64) -> f64 {
    eta_s * eta_as * chi * retrieval * trials_per_second as f64
}

/// Probability that a heralded swap also yields both anti-Stokes clicks,
/// `½ η₃ η₄ R₃ R₄`.
pub fn swap_success_probability(eta3: f64, eta4: f64, r3: f64, r4: f64) -> f64 {
    0.5 * eta3 * eta4 * r3 * r4
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn swap_success_at_defaults() {
        let p = swap_success_probability(0.3, 0.3, 0.2, 0.2);
        assert!((p - 0.0018).abs() < 1e-15);
    }

    #[test]
    fn pair_rate_scales_linearly() {
        let r = pair_rate(0.3, 0.3, 0.014, 0.2, 300_000);
        assert!((r - 75.6).abs() < 1e-9);
        assert_eq!(pair_rate(0.3, 0.3, 0.014, 0.2, 0), 0.0);
    }
}
