//! Small cancellation-free elementary functions.

/// `sin(x)/x - 1`, accurate for small `|x|`.
pub fn sinc_m1(x: f64) -> f64 {
    let x2 = x * x;
    if x2 < 1e-2 {
        // -x²/6 + x⁴/120 - x⁶/5040 + x⁸/362880
        x2 * (-1.0 / 6.0 + x2 * (1.0 / 120.0 + x2 * (-1.0 / 5040.0 + x2 / 362_880.0)))
    } else {
        x.sin() / x - 1.0
    }
}

/// `x/tan(x) - 1`, accurate for small `|x|`.
pub fn xcot_m1(x: f64) -> f64 {
    let x2 = x * x;
    if x2 < 1e-2 {
        // -x²/3 - x⁴/45 - 2x⁶/945 - x⁸/4725 - 2x¹⁰/93555
        -x2 * (1.0 / 3.0 + x2 * (1.0 / 45.0 + x2 * (2.0 / 945.0 + x2 * (1.0 / 4725.0 + x2 * 2.0 / 93_555.0))))
    } else {
        x / x.tan() - 1.0
    }
}

/// `1 - cos(x)` without cancellation.
#[inline]
pub fn one_minus_cos(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    2.0 * s * s
}

/// `2 sin(x) - 2x`, accurate for small `|x|`.
pub fn two_sin_minus_two_x(x: f64) -> f64 {
    let x2 = x * x;
    if x2 < 1e-2 {
        // 2(-x³/6 + x⁵/120 - x⁷/5040 + x⁹/362880)
        2.0 * x * x2 * (-1.0 / 6.0 + x2 * (1.0 / 120.0 + x2 * (-1.0 / 5040.0 + x2 / 362_880.0)))
    } else {
        2.0 * (x.sin() - x)
    }
}

/// Format a float as the shortest decimal that round-trips, switching to
/// exponent notation outside `[1e-4, 1e15)`.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}
