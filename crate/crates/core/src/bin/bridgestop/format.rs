//! Number formatting shared by the text, CSV and JSON outputs: twelve
//! significant digits, `.` as decimal separator.

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

/// 12-significant-digit text: positional for moderate magnitudes,
/// scientific otherwise.
pub fn fmt12(x: f64) -> String {
    let r = round12(x);
    if r == 0.0 {
        return "0".to_owned();
    }
    let m = r.abs();
    if (1e-5..1e15).contains(&m) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// Renders CSV with a header row and `\n` line endings.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.into_iter().map(fmt12).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
