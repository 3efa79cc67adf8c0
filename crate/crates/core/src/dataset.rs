//! Labeled samples and the CSV dataset format.
//!
//! Dialect: comma separated, header row, feature columns `x0..x{n-1}`, label
//! column `y` with values `-1`/`1`, optional confidence column `v` in (0, 1].

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Label {
    Negative,
    Positive,
}

impl Label {
    #[inline]
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
        }
    }

    /// `sgn` with the `sgn(0) = +1` convention.
    #[inline]
    pub fn from_value(v: f64) -> Label {
        if v >= 0.0 {
            Label::Positive
        } else {
            Label::Negative
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

impl TryFrom<i8> for Label {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Label::Positive),
            -1 => Ok(Label::Negative),
            other => Err(format!("label must be -1 or 1, got {other}")),
        }
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        match l {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }
}

impl TryFrom<f64> for Label {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        if v == 1.0 {
            Ok(Label::Positive)
        } else if v == -1.0 {
            Ok(Label::Negative)
        } else {
            Err(Error::input(format!("label must be -1 or 1, got {v}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidences: Option<Vec<f64>>,
}

impl Dataset {
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<Label>) -> Result<Self> {
        let d = Dataset {
            features,
            labels,
            confidences: None,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn with_confidences(mut self, confidences: Vec<f64>) -> Result<Self> {
        self.confidences = Some(confidences);
        self.validate()?;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature dimension, or 0 for an empty dataset.
    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.len() != self.labels.len() {
            return Err(Error::input(format!(
                "{} feature rows but {} labels",
                self.features.len(),
                self.labels.len()
            )));
        }
        let n = self.dim();
        for (i, row) in self.features.iter().enumerate() {
            if row.len() != n || n == 0 {
                return Err(Error::input(format!(
                    "row {i} has dimension {}, expected {n} >= 1",
                    row.len()
                )));
            }
            ensure_finite(row, &format!("row {i}"))?;
        }
        if let Some(c) = &self.confidences {
            if c.len() != self.len() {
                return Err(Error::input("confidence count does not match sample count"));
            }
            if let Some(i) = c.iter().position(|v| !(*v > 0.0 && *v <= 1.0)) {
                return Err(Error::input(format!(
                    "confidence {} at row {i} is outside (0, 1]",
                    c[i]
                )));
            }
        }
        Ok(())
    }

    pub fn positive_fraction(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.labels.iter().filter(|l| l.is_positive()).count() as f64 / self.len() as f64
    }
}

/// Parses a dataset from CSV text. Errors carry 1-based file line numbers.
pub fn parse_dataset<R: Read>(reader: R) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();

    let y_col = headers
        .iter()
        .position(|h| h == "y")
        .ok_or_else(|| Error::Parse {
            line: 1,
            message: "missing label column `y`".into(),
        })?;
    let v_col = headers.iter().position(|h| h == "v");
    let mut x_cols = Vec::new();
    for k in 0.. {
        match headers.iter().position(|h| h == format!("x{k}")) {
            Some(c) => x_cols.push(c),
            None => break,
        }
    }
    if x_cols.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no feature columns (expected x0, x1, ...)".into(),
        });
    }
    let known = x_cols.len() + 1 + usize::from(v_col.is_some());
    if headers.len() != known {
        return Err(Error::Parse {
            line: 1,
            message: format!("unexpected columns in header {:?}", headers.iter().collect::<Vec<_>>()),
        });
    }

    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut confidences = v_col.map(|_| Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let perr = |message: String| Error::Parse { line, message };
        if rec.len() != headers.len() {
            return Err(perr(format!(
                "ragged row: {} fields, header has {}",
                rec.len(),
                headers.len()
            )));
        }
        let num = |col: usize| -> Result<f64> {
            let cell = &rec[col];
            let v: f64 = cell
                .parse()
                .map_err(|_| perr(format!("non-numeric cell `{cell}` in column {}", &headers[col])))?;
            if !v.is_finite() {
                return Err(perr(format!("non-finite cell `{cell}`")));
            }
            Ok(v)
        };
        let row = x_cols.iter().map(|&c| num(c)).collect::<Result<Vec<_>>>()?;
        let label = match &rec[y_col] {
            "1" | "+1" | "1.0" => Label::Positive,
            "-1" | "-1.0" => Label::Negative,
            other => return Err(perr(format!("label `{other}` is not -1 or 1"))),
        };
        if let (Some(col), Some(cs)) = (v_col, confidences.as_mut()) {
            let v = num(col)?;
            if !(v > 0.0 && v <= 1.0) {
                return Err(perr(format!("confidence {v} outside (0, 1]")));
            }
            cs.push(v);
        }
        features.push(row);
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::input("dataset has no samples"));
    }
    let d = Dataset {
        features,
        labels,
        confidences,
    };
    d.validate()?;
    Ok(d)
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_dataset(std::io::BufReader::new(f))
}

/// Writes CSV text. Numbers use the shortest round-trip decimal form.
pub fn write_dataset<W: Write>(dataset: &Dataset, mut out: W) -> std::io::Result<()> {
    let n = dataset.dim();
    let mut header: Vec<String> = (0..n).map(|k| format!("x{k}")).collect();
    header.push("y".into());
    if dataset.confidences.is_some() {
        header.push("v".into());
    }
    writeln!(out, "{}", header.join(","))?;
    for (i, (row, y)) in dataset.features.iter().zip(&dataset.labels).enumerate() {
        let mut cells: Vec<String> = row.iter().map(|v| format!("{v:?}")).collect();
        cells.push(i8::from(*y).to_string());
        if let Some(c) = &dataset.confidences {
            cells.push(format!("{:?}", c[i]));
        }
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

pub fn save_dataset(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(f);
    write_dataset(dataset, &mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_samples() {
        let d = parse_dataset("x0,x1,y\n0.1,0.2,1\n0.3,0.4,-1\n".as_bytes()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.dim(), 2);
        assert_eq!(d.labels, vec![Label::Positive, Label::Negative]);
        assert_eq!(d.features[1], vec![0.3, 0.4]);
    }

    #[test]
    fn zero_label_names_line_two() {
        let err = parse_dataset("x0,y\n0.5,0\n".as_bytes()).unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_only_is_empty_error() {
        assert!(matches!(
            parse_dataset("x0,x1,y\n".as_bytes()),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn other_parse_errors() {
        assert!(matches!(
            parse_dataset("x0,x1\n1,2\n".as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_dataset("x0,y\n1,1\nabc,1\n".as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse_dataset("x0,x1,y\n1,2,1\n1,1\n".as_bytes()),
            Err(Error::Parse { line: 3, .. })
        ));
    }

    #[test]
    fn confidence_column() {
        let d = parse_dataset("x0,y,v\n1,1,0.5\n2,-1,1\n".as_bytes()).unwrap();
        assert_eq!(d.confidences, Some(vec![0.5, 1.0]));
        assert!(parse_dataset("x0,y,v\n1,1,0\n".as_bytes()).is_err());
    }

    #[test]
    fn write_then_parse_is_identity() {
        let d = Dataset::new(
            vec![vec![0.1, 1.0 / 3.0], vec![-2.5e-300, 7.0]],
            vec![Label::Positive, Label::Negative],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_dataset(&d, &mut buf).unwrap();
        assert_eq!(parse_dataset(buf.as_slice()).unwrap(), d);
    }

    #[test]
    fn label_serde_is_integer() {
        assert_eq!(serde_json::to_string(&Label::Negative).unwrap(), "-1");
        assert!(serde_json::from_str::<Label>("0").is_err());
    }
}
