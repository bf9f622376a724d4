//! Point-cloud file formats.
//!
//! CSV: header `x1,...,xm,weight`, one row per point. The intrinsic dimension
//! is not part of the CSV format and must be supplied by the caller.
//! JSON: `{ "m": int, "n": int, "points": [[...]], "weights": [...] }`.
//! Both readers reject dimension pairs violating `n < m`.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{MengerError, Result};
use crate::measure::DiscreteMeasure;

#[derive(Debug, Serialize, Deserialize)]
struct MeasureJson {
    m: usize,
    n: usize,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

pub fn read_json<R: Read>(reader: R) -> Result<DiscreteMeasure> {
    let doc: MeasureJson = serde_json::from_reader(reader)?;
    let mut coords = Vec::with_capacity(doc.points.len() * doc.m);
    for (i, p) in doc.points.iter().enumerate() {
        if p.len() != doc.m {
            return Err(MengerError::Parse {
                line: i as u64,
                msg: format!(
                    "point {i} has {} coordinates, expected m = {}",
                    p.len(),
                    doc.m
                ),
            });
        }
        coords.extend_from_slice(p);
    }
    DiscreteMeasure::new(doc.m, doc.n, coords, doc.weights)
}

pub fn read_json_path(path: &Path) -> Result<DiscreteMeasure> {
    read_json(std::fs::File::open(path)?)
}

pub fn write_json<W: Write>(writer: W, mu: &DiscreteMeasure) -> Result<()> {
    let doc = MeasureJson {
        m: mu.ambient_dim(),
        n: mu.intrinsic_dim(),
        points: (0..mu.len()).map(|i| mu.point(i).to_vec()).collect(),
        weights: mu.weights().to_vec(),
    };
    serde_json::to_writer(writer, &doc)?;
    Ok(())
}

/// Read the CSV form. `intrinsic_dim` comes from the run configuration; the
/// ambient dimension is inferred from the header.
pub fn read_csv<R: Read>(reader: R, intrinsic_dim: usize) -> Result<DiscreteMeasure> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let cols = headers.len();
    if cols < 2 || headers.get(cols - 1) != Some("weight") {
        return Err(MengerError::Parse {
            line: 1,
            msg: "expected header x1,...,xm,weight".into(),
        });
    }
    let m = cols - 1;
    for (i, name) in headers.iter().take(m).enumerate() {
        if name != format!("x{}", i + 1) {
            return Err(MengerError::Parse {
                line: 1,
                msg: format!(
                    "column {} is named {:?}, expected \"x{}\"",
                    i + 1,
                    name,
                    i + 1
                ),
            });
        }
    }
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_err)?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(weights.len() as u64 + 2);
        if record.len() != cols {
            return Err(MengerError::Parse {
                line,
                msg: format!("row has {} fields, expected {cols}", record.len()),
            });
        }
        for (k, field) in record.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| MengerError::Parse {
                line,
                msg: format!("cannot parse {field:?} as a number"),
            })?;
            if k < m {
                coords.push(value);
            } else {
                weights.push(value);
            }
        }
    }
    DiscreteMeasure::new(m, intrinsic_dim, coords, weights)
}

pub fn read_csv_path(path: &Path, intrinsic_dim: usize) -> Result<DiscreteMeasure> {
    read_csv(std::fs::File::open(path)?, intrinsic_dim)
}

pub fn write_csv<W: Write>(writer: W, mu: &DiscreteMeasure) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    let m = mu.ambient_dim();
    let mut header: Vec<String> = (1..=m).map(|i| format!("x{i}")).collect();
    header.push("weight".into());
    wtr.write_record(&header).map_err(csv_err)?;
    for (p, w) in mu.iter() {
        let mut row: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
        row.push(format!("{w}"));
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> MengerError {
    let line = match e.position() {
        Some(pos) => pos.line(),
        None => 0,
    };
    MengerError::Parse {
        line,
        msg: e.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let mu = DiscreteMeasure::new(2, 1, vec![0.5, -1.25, 3.0, 4.0], vec![0.125, 2.0]).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &mu).unwrap();
        let back = read_csv(buf.as_slice(), 1).unwrap();
        assert_eq!(mu, back);
    }

    #[test]
    fn json_round_trip() {
        let mu = DiscreteMeasure::new(3, 2, vec![1.0, 2.0, 3.0], vec![0.5]).unwrap();
        let mut buf = Vec::new();
        write_json(&mut buf, &mu).unwrap();
        let back = read_json(buf.as_slice()).unwrap();
        assert_eq!(mu, back);
    }

    #[test]
    fn csv_rejects_bad_rows_with_line_numbers() {
        let data = "x1,x2,weight\n1.0,2.0,0.5\n1.0,oops,0.5\n";
        let err = read_csv(data.as_bytes(), 1).unwrap_err();
        match err {
            MengerError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn readers_reject_bad_dimensions() {
        let data = "x1,x2,weight\n1.0,2.0,0.5\n";
        assert!(read_csv(data.as_bytes(), 2).is_err());
        let json = r#"{"m": 2, "n": 2, "points": [[0.0, 0.0]], "weights": [1.0]}"#;
        assert!(read_json(json.as_bytes()).is_err());
    }
}
