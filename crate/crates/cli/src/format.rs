/// Fixed CSV number format: six significant digits in scientific notation.
pub fn sig6(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.5e}")
    }
}

/// `NA(reason)` with separators stripped so the cell stays one CSV field.
pub fn na(reason: &str) -> String {
    let clean: String = reason
        .chars()
        .map(|c| match c {
            ',' | '\n' | '\r' | '"' => ' ',
            '(' => '[',
            ')' => ']',
            c => c,
        })
        .collect();
    format!(
        "NA({})",
        clean.split_whitespace().collect::<Vec<_>>().join(" ")
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting() {
        assert_eq!(sig6(0.70381234), "7.03812e-1");
        assert_eq!(sig6(141.73), "1.41730e2");
        assert_eq!(sig6(0.0), "0.00000e0");
        assert_eq!(sig6(f64::INFINITY), "inf");
        assert_eq!(
            na("solver failed, residual (1e-3)"),
            "NA(solver failed residual [1e-3])"
        );
    }
}
