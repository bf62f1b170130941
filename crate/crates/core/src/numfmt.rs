//! Deterministic number formatting for files and reports.
//!
//! All floating-point output uses 17 significant digits, which round-trips
//! every finite f64 exactly and never depends on locale.

/// Formats a finite f64 with 17 significant digits in scientific notation,
/// e.g. `1.5000000000000000e0`. The result is a valid JSON number literal.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Formats a complex value as a `[re, im]` JSON pair.
pub fn fmt_complex_pair(re: f64, im: f64) -> String {
    format!("[{}, {}]", fmt_f64(re), fmt_f64(im))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digit_output_round_trips() {
        for &x in &[
            0.0,
            1.0,
            -1.5,
            std::f64::consts::PI,
            1.0403474925929665,
            f64::MIN_POSITIVE,
            1.7976931348623157e308,
            -2.2250738585072014e-308,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn output_is_json_compatible() {
        let v: serde_json::Value = serde_json::from_str(&fmt_f64(0.1)).unwrap();
        assert_eq!(v.as_f64().unwrap(), 0.1);
    }
}
