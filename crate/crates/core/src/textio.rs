//! Shared text formatting for the CSV interfaces.
//!
//! Scales and diagram coordinates are written with 17 significant digits,
//! which is enough to reproduce any f64 bit-exactly on parse.

/// Formats a float with 17 significant digits; infinities become `inf` /
/// `-inf`.
pub fn format_f64(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".to_string()
    } else if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// Parses the output of [`format_f64`] (and ordinary decimal literals).
pub fn parse_f64(field: &str) -> Option<f64> {
    match field.trim() {
        "inf" | "+inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        other => other.parse::<f64>().ok(),
    }
}
