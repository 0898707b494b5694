use std::collections::BTreeMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use super::{DataError, Dataset, FeatureKind, FeatureSchema, Matrix, Result};
use crate::scalar::Scalar;

const LABEL: &str = "label";

/// How column kinds are determined when reading a CSV.
#[derive(Debug, Clone)]
pub enum SchemaSource {
    /// `{0,1}`-only columns are binary, integer-valued columns counts, the rest continuous.
    Infer,
    /// Names must equal the header (minus `label`) in order.
    Schema(FeatureSchema),
    /// Sidecar mapping name -> kind; must cover every header column.
    Sidecar(BTreeMap<String, FeatureKind>),
}

fn io_err(path: &Path, source: std::io::Error) -> DataError {
    DataError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn load_csv<T: Scalar>(path: impl AsRef<Path>, schema: SchemaSource) -> Result<Dataset<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_csv(file, schema)
}

/// Reads a JSON object mapping feature name to kind.
pub fn load_schema_sidecar(path: impl AsRef<Path>) -> Result<BTreeMap<String, FeatureKind>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| DataError::Schema(format!("sidecar: {e}")))
}

pub fn read_csv<T: Scalar, R: Read>(reader: R, schema: SchemaSource) -> Result<Dataset<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| DataError::Csv(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    match header.last() {
        Some(last) if last == LABEL => {}
        other => return Err(DataError::MissingLabel(other.cloned().unwrap_or_default())),
    }
    let names = header[..header.len() - 1].to_vec();
    // Duplicate check before parsing any rows.
    FeatureSchema::new(names.clone(), vec![FeatureKind::Continuous; names.len()])?;
    let d = names.len();

    let mut data = Vec::new();
    let mut labels = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let row = r + 1;
        let record = record.map_err(|e| DataError::Csv(e.to_string()))?;
        if record.len() != d + 1 {
            return Err(DataError::Csv(format!(
                "row {row} has {} fields, expected {}",
                record.len(),
                d + 1
            )));
        }
        for (j, cell) in record.iter().take(d).enumerate() {
            let v: T = cell.parse().map_err(|_| DataError::NonNumeric {
                row,
                column: names[j].clone(),
                value: cell.to_owned(),
            })?;
            data.push(v);
        }
        let label = &record[d];
        labels.push(match label {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(DataError::BadLabel {
                    row,
                    value: other.to_owned(),
                })
            }
        });
    }
    let features = Matrix::from_row_major(data, labels.len(), d);

    let schema = match schema {
        SchemaSource::Schema(s) => {
            if s.names() != names.as_slice() {
                return Err(DataError::Schema(format!(
                    "header {names:?} does not match schema {:?}",
                    s.names()
                )));
            }
            s
        }
        SchemaSource::Sidecar(map) => {
            let kinds = names
                .iter()
                .map(|n| {
                    map.get(n)
                        .copied()
                        .ok_or_else(|| DataError::Schema(format!("sidecar lacks column {n:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            FeatureSchema::new(names, kinds)?
        }
        SchemaSource::Infer => {
            let kinds = (0..d).map(|j| infer_kind(&features.column(j))).collect();
            FeatureSchema::new(names, kinds)?
        }
    };
    Dataset::new(schema, features, labels)
}

fn infer_kind<T: Scalar>(col: &[T]) -> FeatureKind {
    if col.iter().all(|&v| v == T::zero() || v == T::one()) {
        FeatureKind::Binary
    } else if col.iter().all(|&v| v.is_finite() && v.fract() == T::zero()) {
        FeatureKind::Count
    } else {
        FeatureKind::Continuous
    }
}

pub fn write_csv<T: Scalar>(ds: &Dataset<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_csv_to(ds, &mut w).map_err(|e| io_err(path, e))?;
    w.flush().map_err(|e| io_err(path, e))
}

/// Values are written with their shortest round-trip representation.
pub fn write_csv_to<T: Scalar, W: Write>(ds: &Dataset<T>, w: &mut W) -> std::io::Result<()> {
    let mut line = String::new();
    for name in ds.schema().names() {
        line.push_str(name);
        line.push(',');
    }
    line.push_str(LABEL);
    writeln!(w, "{line}")?;
    for i in 0..ds.n_rows() {
        line.clear();
        for v in ds.row(i) {
            use std::fmt::Write as _;
            let _ = write!(line, "{v},");
        }
        line.push(if ds.labels()[i] == 1 { '1' } else { '0' });
        writeln!(w, "{line}")?;
    }
    Ok(())
}
