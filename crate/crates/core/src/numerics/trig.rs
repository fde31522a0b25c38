use std::f64::consts::TAU;

/// `sin(2πx)`, reduced to the nearest quarter turn first so that half-integer `x`
/// gives an exact zero and odd quarter-integer `x` an exact ±1.
pub fn sin_turns(x: f64) -> f64 {
    let quarter = (4.0 * x).round();
    let (s, c) = (TAU * (x - 0.25 * quarter)).sin_cos();
    match (quarter as i64).rem_euclid(4) {
        0 => s,
        1 => c,
        2 => -s,
        _ => -c,
    }
}

/// `cos(2πx)` with the same quarter-turn reduction as [`sin_turns`].
pub fn cos_turns(x: f64) -> f64 {
    let quarter = (4.0 * x).round();
    let (s, c) = (TAU * (x - 0.25 * quarter)).sin_cos();
    match (quarter as i64).rem_euclid(4) {
        0 => c,
        1 => -s,
        2 => -c,
        _ => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_values_at_quarter_turns() {
        for k in -40..40 {
            let x = k as f64 * 0.5;
            assert_eq!(sin_turns(x), 0.0);
            assert_eq!(cos_turns(x).abs(), 1.0);
            assert_eq!(sin_turns(x + 0.25).abs(), 1.0);
            assert_eq!(cos_turns(x + 0.25), 0.0);
        }
        assert_eq!(sin_turns(1.75), -1.0);
        assert_eq!(sin_turns(0.75), -1.0);
    }

    proptest! {
        #[test]
        fn agrees_with_libm(x in -500.0f64..500.0) {
            let arg = TAU * x;
            prop_assert!((sin_turns(x) - arg.sin()).abs() < 1e-12);
            prop_assert!((cos_turns(x) - arg.cos()).abs() < 1e-12);
        }
    }
}
