//! Number formatting for CSV and terminal output.

/// 17 significant digits, enough to round-trip any `f64`.
pub fn csv_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_opt(x: Option<f64>) -> String {
    x.map(csv_float).unwrap_or_default()
}

/// Plain decimal with `digits` significant digits; scientific outside `[1e-6, 1e15)`.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let exponent = x.abs().log10().floor() as i32;
    if !(-6..15).contains(&exponent) {
        return format!("{x:.*e}", digits - 1);
    }
    let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
    format!("{x:.decimals$}")
}
