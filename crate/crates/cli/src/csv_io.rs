//! Dataset CSV format.
//!
//! One row per observed `(point, time)` pair: `point_id, t, f1..fF[, label]`
//! with `t` counted from 1. Pairs without a row are inactive. An empty
//! feature cell is a missing value (imputed by the core), an empty label
//! cell an unlabelled observation.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use eap_core::dataseries::Observation;
use eap_core::DatasetSeries;

use crate::error::{CliError, Result};

/// Which CSV columns hold the point id, the time step, the label and the
/// features.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMapping {
    pub id: String,
    pub time: String,
    /// Used when present in the header; a dataset without it is unlabelled.
    pub label: Option<String>,
    /// Feature columns in order; `None` takes every other column.
    pub features: Option<Vec<String>>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        Self {
            id: "point_id".into(),
            time: "t".into(),
            label: Some("label".into()),
            features: None,
        }
    }
}

struct Layout {
    id: usize,
    time: usize,
    label: Option<usize>,
    features: Vec<usize>,
}

impl ColumnMapping {
    fn resolve(&self, header: &csv::StringRecord, path: &Path) -> Result<Layout> {
        let find = |name: &str| header.iter().position(|h| h.trim() == name);
        let required = |name: &str| {
            find(name).ok_or_else(|| CliError::CsvField {
                path: path.into(),
                line: 1,
                msg: format!("missing column `{name}`"),
            })
        };
        let id = required(&self.id)?;
        let time = required(&self.time)?;
        let label = self.label.as_deref().and_then(find);
        let features = match &self.features {
            Some(names) => names.iter().map(|n| required(n)).collect::<Result<Vec<_>>>()?,
            None => (0..header.len()).filter(|&c| c != id && c != time && Some(c) != label).collect(),
        };
        if features.is_empty() {
            return Err(CliError::CsvField { path: path.into(), line: 1, msg: "no feature columns".into() });
        }
        if features.iter().any(|&c| c == id || c == time || Some(c) == label) {
            return Err(CliError::CsvField {
                path: path.into(),
                line: 1,
                msg: "feature columns overlap the id, time or label column".into(),
            });
        }
        Ok(Layout { id, time, label, features })
    }
}

pub fn load_csv(path: &Path, mapping: &ColumnMapping) -> Result<DatasetSeries> {
    let file = File::open(path).map_err(CliError::io(path))?;
    read_csv(file, path, mapping)
}

/// Parses dataset rows from `reader`; `path` only labels errors.
pub fn read_csv<R: Read>(reader: R, path: &Path, mapping: &ColumnMapping) -> Result<DatasetSeries> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
    let header = rdr.headers().map_err(CliError::csv(path))?.clone();
    let layout = mapping.resolve(&header, path)?;
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(CliError::csv(path))?;
        let line = record.position().map_or(0, |p| p.line());
        let bad = |msg: String| CliError::CsvField { path: path.into(), line, msg };
        if record.len() != header.len() {
            return Err(bad(format!("row has {} fields, the header has {}", record.len(), header.len())));
        }
        let cell = |c: usize| record.get(c).unwrap_or("");
        let t: i64 = cell(layout.time).parse().map_err(|_| bad(format!("time `{}` is not an integer", cell(layout.time))))?;
        if t < 1 {
            return Err(bad(format!("time {t} is before the first step 1")));
        }
        let features = layout
            .features
            .iter()
            .map(|&c| match cell(c) {
                "" => Ok(None),
                v => v.parse::<f64>().map(Some).map_err(|_| bad(format!("feature `{v}` is not a number"))),
            })
            .collect::<Result<Vec<_>>>()?;
        let label = match layout.label.map(cell) {
            None | Some("") => None,
            Some(v) => Some(v.parse::<i64>().map_err(|_| bad(format!("label `{v}` is not an integer")))?),
        };
        rows.push(Observation { point_id: cell(layout.id).to_string(), t: (t - 1) as usize, features, label });
    }
    Ok(DatasetSeries::from_observations(rows)?)
}

pub fn save_csv(ds: &DatasetSeries, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(CliError::io(path))?;
    write_csv(ds, file, path)
}

/// Writes `ds` in the default column layout; features are `f1..fF` and the
/// label column is present iff the dataset carries labels.
pub fn write_csv<W: Write>(ds: &DatasetSeries, writer: W, path: &Path) -> Result<()> {
    let labelled = ds.has_labels();
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["point_id".to_string(), "t".to_string()];
    header.extend((1..=ds.dim()).map(|d| format!("f{d}")));
    if labelled {
        header.push("label".into());
    }
    w.write_record(&header).map_err(CliError::csv(path))?;
    for obs in ds.to_observations() {
        let mut row = vec![obs.point_id, (obs.t + 1).to_string()];
        row.extend(obs.features.iter().map(|v| v.map_or(String::new(), |v| v.to_string())));
        if labelled {
            row.push(obs.label.map_or(String::new(), |l| l.to_string()));
        }
        w.write_record(&row).map_err(CliError::csv(path))?;
    }
    w.flush().map_err(CliError::io(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<DatasetSeries> {
        read_csv(text.as_bytes(), Path::new("mem.csv"), &ColumnMapping::default())
    }

    #[test]
    fn two_points_one_step() {
        let ds = parse("point_id,t,x\na,1,0.5\nb,1,1.5\n").unwrap();
        assert_eq!((ds.n_points(), ds.n_steps(), ds.dim()), (2, 1, 1));
        assert!(ds.fully_active());
        assert!(!ds.has_labels());
    }

    #[test]
    fn missing_rows_are_inactive() {
        let ds = parse("point_id,t,x\na,1,0\na,2,0\nb,2,1\n").unwrap();
        assert!(!ds.is_active(0, 1));
        assert!(ds.is_active(1, 1));
    }

    #[test]
    fn ragged_rows_are_schema_errors() {
        let err = parse("point_id,t,x,y,z\na,1,1,2,3\nb,1,1,2\n").unwrap_err();
        assert!(matches!(err, CliError::CsvField { line: 3, .. }), "{err}");
    }

    #[test]
    fn bad_time_names_the_line() {
        let err = parse("point_id,t,x\na,1,0\nb,0,1\n").unwrap_err();
        assert!(matches!(err, CliError::CsvField { line: 3, .. }), "{err}");
    }

    #[test]
    fn custom_mapping() {
        let mapping = ColumnMapping {
            id: "name".into(),
            time: "day".into(),
            label: Some("truth".into()),
            features: Some(vec!["b".into()]),
        };
        let text = "day,name,a,b,truth\n1,p,9,1.0,3\n1,q,9,2.0,\n";
        let ds = read_csv(text.as_bytes(), Path::new("mem.csv"), &mapping).unwrap();
        assert_eq!(ds.features(0, 1), Some(&[2.0][..]));
        assert_eq!(ds.label(0, 0), Some(3));
        assert_eq!(ds.label(0, 1), None);
    }

    #[test]
    fn empty_file() {
        let err = parse("point_id,t,x\n").unwrap_err();
        assert!(matches!(err, CliError::Core(eap_core::Error::EmptyDataset)));
    }
}
