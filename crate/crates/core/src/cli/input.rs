use std::path::Path;

/// Minimum number of observations accepted by `estimate`.
pub const MIN_OBSERVATIONS: usize = 50;

/// Parses one value per line. Blank lines and `#` comments (whole-line or
/// trailing) are skipped. Errors carry the 1-based line number.
pub fn parse_values(text: &str) -> Result<Vec<f64>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| format!("line {}: cannot parse {line:?} as a number", i + 1))?;
        if !v.is_finite() {
            return Err(format!("line {}: value {line:?} is not finite", i + 1));
        }
        out.push(v);
    }
    if out.len() < MIN_OBSERVATIONS {
        return Err(format!("need at least {MIN_OBSERVATIONS} values, found {}", out.len()));
    }
    Ok(out)
}

pub fn read_values(path: &Path) -> Result<Vec<f64>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_values(&text).map_err(|e| format!("{}: {e}", path.display()))
}
