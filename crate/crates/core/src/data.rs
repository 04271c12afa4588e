//! Datasets: the embedded Wheaton River flood exceedances and CSV input.

use std::io::{Read, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Wheaton River (Yukon) excess flood peaks in m³/s, 1958-1984, row-major.
const WHEATON: [f64; 72] = [
    1.7, 2.2, 14.4, 1.1, 0.4, 20.6, 5.3, 0.7, 1.9, 13.0, 12.0, 9.3, //
    1.4, 18.7, 8.5, 25.5, 11.6, 14.1, 22.1, 1.1, 2.5, 14.4, 1.7, 37.6, //
    0.6, 2.2, 39.0, 0.3, 15.0, 11.0, 7.3, 22.9, 1.7, 0.1, 1.1, 0.6, //
    9.0, 1.7, 7.0, 20.1, 0.4, 2.8, 14.1, 9.9, 10.4, 10.7, 30.0, 3.6, //
    5.6, 30.8, 13.3, 4.2, 25.5, 3.4, 11.9, 21.5, 27.6, 36.4, 2.7, 64.0, //
    1.5, 2.5, 27.4, 1.0, 27.1, 20.2, 16.8, 5.3, 9.7, 27.5, 2.5, 27.0,
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Dataset {
    pub name: String,
    pub values: Vec<f64>,
}

impl Dataset {
    pub fn new(name: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyData);
        }
        Ok(Self { name: name.into(), values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }
}

/// The 72 Wheaton River exceedances.
pub fn wheaton() -> Dataset {
    Dataset { name: "wheaton".to_string(), values: WHEATON.to_vec() }
}

fn parse_cell(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok()
}

/// Reads reals from CSV text.
///
/// Blank lines are skipped and the first non-blank row is taken as a header
/// when any of its cells fails to parse as a number. With `column` the
/// values come from that column, selected by header name or by 0-based
/// index; without it every cell is read in row-major order.
pub fn parse_csv<R: Read>(reader: R, name: &str, column: Option<&str>) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut rows: Vec<(u64, Vec<String>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Io(e.to_string()))?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        let cells: Vec<String> = rec.iter().map(str::to_string).collect();
        if cells.iter().all(|c| c.is_empty()) {
            continue;
        }
        rows.push((line, cells));
    }
    let header = match rows.first() {
        Some((_, cells)) if cells.iter().any(|c| !c.is_empty() && parse_cell(c).is_none()) => Some(rows.remove(0).1),
        _ => None,
    };
    let selected = match column {
        None => None,
        Some(col) => {
            let by_name = header.as_ref().and_then(|h| h.iter().position(|c| c == col));
            match by_name.or_else(|| col.parse::<usize>().ok()) {
                Some(i) => Some(i),
                None => return Err(Error::Usage(format!("column '{col}' not found in the header"))),
            }
        }
    };
    let mut values = Vec::new();
    for (line, cells) in &rows {
        match selected {
            Some(i) => {
                let cell = cells.get(i).map(String::as_str).unwrap_or("");
                if cell.is_empty() {
                    continue;
                }
                values.push(parse_cell(cell).ok_or_else(|| Error::Parse {
                    row: *line,
                    column: i + 1,
                    cell: cell.to_string(),
                })?);
            }
            None => {
                for (i, cell) in cells.iter().enumerate() {
                    if cell.is_empty() {
                        continue;
                    }
                    values.push(parse_cell(cell).ok_or_else(|| Error::Parse {
                        row: *line,
                        column: i + 1,
                        cell: cell.clone(),
                    })?);
                }
            }
        }
    }
    let name = column.unwrap_or(name);
    Dataset::new(name, values)
}

/// Loads a dataset from a CSV file; see [`parse_csv`].
pub fn load_csv(path: impl AsRef<Path>, column: Option<&str>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "data".into());
    parse_csv(std::io::BufReader::new(file), &name, column)
}

/// Writes a one-column CSV with the dataset name as header; values use the
/// shortest representation that reads back exactly.
pub fn write_csv<W: Write>(d: &Dataset, mut out: W) -> Result<()> {
    let header = if d.name.is_empty() || parse_cell(&d.name).is_some() { "value" } else { d.name.as_str() };
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record([header]).map_err(|e| Error::Io(e.to_string()))?;
    for v in &d.values {
        w.write_record([format!("{v:?}")]).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub n: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Unbiased sample variance; `None` when n = 1.
    pub variance: Option<f64>,
    pub median: f64,
}

/// Median with the midpoint convention for even n; NaN for empty input.
pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn summary(d: &Dataset) -> Summary {
    let v = &d.values;
    let n = v.len();
    let mean = v.iter().sum::<f64>() / n as f64;
    let variance = (n > 1).then(|| v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0));
    Summary {
        n,
        min: v.iter().copied().fold(f64::INFINITY, f64::min),
        max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        mean,
        variance,
        median: median(v),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wheaton_shape() {
        let d = wheaton();
        assert_eq!(d.n(), 72);
        assert_eq!(summary(&d).max, 64.0);
        assert_eq!(summary(&d).min, 0.1);
        assert_eq!(d, wheaton());
    }

    #[test]
    fn small_summaries() {
        let s = summary(&Dataset::new("a", vec![2.0]).unwrap());
        assert_eq!((s.n, s.min, s.max, s.mean, s.variance, s.median), (1, 2.0, 2.0, 2.0, None, 2.0));
        let s = summary(&Dataset::new("a", vec![3.0, 1.0, 2.0]).unwrap());
        assert_eq!((s.mean, s.variance, s.median), (2.0, Some(1.0), 2.0));
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
    }

    #[test]
    fn one_value_per_line() {
        let d = parse_csv("1.0\n2.0\n\n3.0\n".as_bytes(), "x", None).unwrap();
        assert_eq!(d.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn comma_separated_row() {
        let d = parse_csv("1.5, 2.5,3.5\n".as_bytes(), "x", None).unwrap();
        assert_eq!(d.values, vec![1.5, 2.5, 3.5]);
    }

    #[test]
    fn header_selected_by_name_and_index() {
        let text = "year,flow\n1958,1.7\n1959,2.2\n";
        let d = parse_csv(text.as_bytes(), "x", Some("flow")).unwrap();
        assert_eq!(d.values, vec![1.7, 2.2]);
        assert_eq!(d.name, "flow");
        let d = parse_csv(text.as_bytes(), "x", Some("0")).unwrap();
        assert_eq!(d.values, vec![1958.0, 1959.0]);
        assert!(matches!(parse_csv(text.as_bytes(), "x", Some("depth")), Err(Error::Usage(_))));
    }

    #[test]
    fn parse_error_names_row() {
        let text = "flow\n1\n2\n3\nabc\n";
        match parse_csv(text.as_bytes(), "x", None) {
            Err(Error::Parse { row, column, cell }) => {
                assert_eq!((row, column, cell.as_str()), (5, 1, "abc"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_input() {
        assert!(matches!(parse_csv("".as_bytes(), "x", None), Err(Error::EmptyData)));
        assert!(matches!(parse_csv("flow\n\n".as_bytes(), "x", None), Err(Error::EmptyData)));
    }

    #[test]
    fn write_then_read_round_trip() {
        let d = Dataset::new("flow", vec![0.1, 1e-300, 12.204166666666667, 64.0]).unwrap();
        let mut buf = Vec::new();
        write_csv(&d, &mut buf).unwrap();
        let back = parse_csv(buf.as_slice(), "ignored", None).unwrap();
        assert_eq!(back.values, d.values);
        assert_eq!(parse_csv(buf.as_slice(), "x", Some("flow")).unwrap(), d);
    }

    #[test]
    fn load_from_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("peaks.csv");
        std::fs::write(&p, "1\n2\n").unwrap();
        let d = load_csv(&p, None).unwrap();
        assert_eq!(d.name, "peaks");
        assert!(load_csv(dir.path().join("missing.csv"), None).unwrap_err().is_data_error());
    }
}
