//! `start:stop:step` parameter ranges with exact decimal stepping.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RangeError(pub String);

impl fmt::Display for RangeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for RangeError {}

/// A decimal literal as `mantissa * 10^-scale`.
fn decimal(text: &str) -> Result<(i64, u32), RangeError> {
    let t = text.trim();
    let bad = || RangeError(format!("`{t}` is not a plain decimal number"));
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if (int.is_empty() && frac.is_empty()) || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let mantissa: i64 = digits.parse().map_err(|_| bad())?;
    Ok((if neg { -mantissa } else { mantissa }, frac.len() as u32))
}

fn rescale((m, s): (i64, u32), scale: u32) -> i64 {
    m * 10i64.pow(scale - s)
}

/// Inclusive range. A single number is a one-element range; the step sign
/// must point from start towards stop.
pub fn parse_range(text: &str) -> Result<Vec<f64>, RangeError> {
    let parts: Vec<&str> = text.split(':').collect();
    let (start, stop, step) = match parts.as_slice() {
        [one] => {
            let d = decimal(one)?;
            return Ok(vec![d.0 as f64 / 10f64.powi(d.1 as i32)]);
        }
        [a, b, c] => (decimal(a)?, decimal(b)?, decimal(c)?),
        _ => return Err(RangeError(format!("expected start:stop:step, got `{text}`"))),
    };
    let scale = start.1.max(stop.1).max(step.1);
    if scale > 12 {
        return Err(RangeError(format!("too many decimals in `{text}`")));
    }
    let (a, b, mut h) = (rescale(start, scale), rescale(stop, scale), rescale(step, scale));
    if h == 0 {
        return Err(RangeError("step must be nonzero".into()));
    }
    if a == b {
        h = h.abs();
    } else if (b - a).signum() != h.signum() {
        return Err(RangeError(format!(
            "step {} does not lead from {} to {}",
            parts[2], parts[0], parts[1]
        )));
    }
    let count = (b - a) / h + 1;
    if count > 1_000_000 {
        return Err(RangeError("range has more than a million points".into()));
    }
    let denom = 10f64.powi(scale as i32);
    Ok((0..count).map(|k| (a + k * h) as f64 / denom).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascending_and_descending() {
        assert_eq!(parse_range("0:0.5:0.1").unwrap(), vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5]);
        assert_eq!(
            parse_range("-0.5:-0.1:0.1").unwrap(),
            vec![-0.5, -0.4, -0.3, -0.2, -0.1]
        );
        assert_eq!(
            parse_range("-0.1:-0.5:-0.1").unwrap(),
            vec![-0.1, -0.2, -0.3, -0.4, -0.5]
        );
    }

    #[test]
    fn no_drift_over_long_sweeps() {
        let xs = parse_range("0:1:0.01").unwrap();
        assert_eq!(xs.len(), 101);
        assert_eq!(xs[37], 0.37);
        assert_eq!(*xs.last().unwrap(), 1.0);
    }

    #[test]
    fn stop_need_not_be_on_the_lattice() {
        assert_eq!(parse_range("0:0.25:0.1").unwrap(), vec![0.0, 0.1, 0.2]);
    }

    #[test]
    fn single_values() {
        assert_eq!(parse_range("0.3").unwrap(), vec![0.3]);
        assert_eq!(parse_range("1:1:0.1").unwrap(), vec![1.0]);
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "a:b:c", "0:1", "0:1:0", "0:1:-0.1", "1e-3", "0:1:0.1:2", "."] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }
}
