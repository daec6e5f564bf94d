//! Clebsch-Gordan coefficients by the Racah closed form.
//!
//! Angular momenta are passed doubled (`two_j = 2j`) so half-integer values
//! are representable.

fn factorial(n: i32) -> f64 {
    debug_assert!(n >= 0);
    (1..=n).map(f64::from).product()
}

/// `⟨j1 m1; j2 m2 | j m⟩` with all arguments doubled.
///
/// Returns 0 for any selection-rule violation.
pub fn clebsch_gordan(two_j1: i32, two_m1: i32, two_j2: i32, two_m2: i32, two_j: i32, two_m: i32) -> f64 {
    if two_m1 + two_m2 != two_m {
        return 0.0;
    }
    if two_j1 < 0 || two_j2 < 0 || two_j < 0 {
        return 0.0;
    }
    if two_m1.abs() > two_j1 || two_m2.abs() > two_j2 || two_m.abs() > two_j {
        return 0.0;
    }
    if (two_j1 + two_m1) % 2 != 0 || (two_j2 + two_m2) % 2 != 0 || (two_j + two_m) % 2 != 0 {
        return 0.0;
    }
    if two_j > two_j1 + two_j2 || two_j < (two_j1 - two_j2).abs() || (two_j1 + two_j2 + two_j) % 2 != 0 {
        return 0.0;
    }

    // undoubled integer combinations
    let a = (two_j1 + two_j2 - two_j) / 2;
    let b = (two_j1 - two_j2 + two_j) / 2;
    let c = (-two_j1 + two_j2 + two_j) / 2;
    let d = (two_j1 + two_j2 + two_j) / 2 + 1;

    let pre = (f64::from(two_j + 1) * factorial(a) * factorial(b) * factorial(c) / factorial(d)).sqrt();
    let norm = (factorial((two_j + two_m) / 2)
        * factorial((two_j - two_m) / 2)
        * factorial((two_j1 - two_m1) / 2)
        * factorial((two_j1 + two_m1) / 2)
        * factorial((two_j2 - two_m2) / 2)
        * factorial((two_j2 + two_m2) / 2))
        .sqrt();

    let j1_m1 = (two_j1 - two_m1) / 2;
    let j2_p_m2 = (two_j2 + two_m2) / 2;
    let t4 = (two_j - two_j2 + two_m1) / 2;
    let t5 = (two_j - two_j1 - two_m2) / 2;

    let kmin = 0.max(-t4).max(-t5);
    let kmax = a.min(j1_m1).min(j2_p_m2);
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let denom = factorial(k)
            * factorial(a - k)
            * factorial(j1_m1 - k)
            * factorial(j2_p_m2 - k)
            * factorial(t4 + k)
            * factorial(t5 + k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign / denom;
    }
    pre * norm * sum
}

/// Integer-spin convenience wrapper.
pub fn cg_int(j1: i32, m1: i32, j2: i32, m2: i32, j: i32, m: i32) -> f64 {
    clebsch_gordan(2 * j1, 2 * m1, 2 * j2, 2 * m2, 2 * j, 2 * m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_half_pair() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((clebsch_gordan(1, 1, 1, -1, 0, 0) - r).abs() < 1e-15);
        assert!((clebsch_gordan(1, -1, 1, 1, 0, 0) + r).abs() < 1e-15);
        assert!((clebsch_gordan(1, 1, 1, 1, 2, 2) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn known_integer_values() {
        // ⟨1 0; 1 0 | 2 0⟩ = √(2/3), ⟨1 0; 1 0 | 1 0⟩ = 0
        assert!((cg_int(1, 0, 1, 0, 2, 0) - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(cg_int(1, 0, 1, 0, 1, 0), 0.0);
        // ⟨2 −1; 1 1 | 2 0⟩ = −√(1/2)
        assert!((cg_int(2, -1, 1, 1, 2, 0) + 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn selection_rules() {
        assert_eq!(cg_int(1, 1, 1, 1, 2, 0), 0.0);
        assert_eq!(cg_int(1, 0, 1, 0, 3, 0), 0.0);
    }
}
