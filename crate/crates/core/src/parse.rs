//! Parsers for command-line style argument strings.

use crate::error::{Error, Result};

fn number(s: &str, what: &str) -> Result<f64> {
    let t = s.trim();
    match t.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::Usage(format!("{what}: '{t}' is not a finite number"))),
    }
}

/// Most points a grid may request.
pub const MAX_GRID_POINTS: usize = 10_000_000;

/// Parses "start:stop:count" into `count` evenly spaced points, endpoints
/// included.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(Error::Usage(format!("grid '{text}' must have the form start:stop:count")));
    };
    let start = number(start, "grid start")?;
    let stop = number(stop, "grid stop")?;
    let count: usize = count
        .trim()
        .parse()
        .map_err(|_| Error::Usage(format!("grid count '{}' is not a non-negative integer", count.trim())))?;
    if count < 2 {
        return Err(Error::Usage(format!("grid needs at least 2 points, got {count}")));
    }
    if count > MAX_GRID_POINTS {
        return Err(Error::Usage(format!("grid of {count} points exceeds the limit of {MAX_GRID_POINTS}")));
    }
    if !(stop > start) {
        return Err(Error::Usage(format!("grid stop {stop} must exceed start {start}")));
    }
    let step = (stop - start) / (count - 1) as f64;
    Ok((0..count).map(|i| if i == count - 1 { stop } else { start + step * i as f64 }).collect())
}

/// Parses a comma-separated list of finite reals, e.g. "0.131,0.179,0.539".
pub fn parse_params(text: &str) -> Result<Vec<f64>> {
    if text.trim().is_empty() {
        return Err(Error::Usage("parameter list is empty".into()));
    }
    text.split(',').map(|s| number(s, "parameter")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_examples() {
        assert_eq!(parse_grid("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_grid(" 1 : 2 : 2 ").unwrap(), vec![1.0, 2.0]);
        let g = parse_grid("0.1:30:1000").unwrap();
        assert_eq!(g.len(), 1000);
        assert_eq!(*g.last().unwrap(), 30.0);
    }

    #[test]
    fn grid_errors() {
        for bad in ["", "1:2", "1:2:3:4", "a:2:3", "0:1:1", "1:0:5", "0:inf:3", "0:1:-2", "0:1:1e3"] {
            assert!(matches!(parse_grid(bad), Err(Error::Usage(_))), "{bad}");
        }
    }

    #[test]
    fn params_examples() {
        assert_eq!(parse_params("0.131, 0.179,0.539").unwrap(), vec![0.131, 0.179, 0.539]);
        assert!(parse_params("").is_err());
        assert!(parse_params("1,,2").is_err());
        assert!(parse_params("1,NaN").is_err());
    }
}
