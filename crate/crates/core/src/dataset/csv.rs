use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError, Observation, Series};

pub const DEFAULT_SERIES_ID: &str = "series";

/// Which CSV columns hold the series id, the time and the variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnMapping {
    /// `None` puts every row in one series called `"series"`.
    #[serde(default)]
    pub series_column: Option<String>,
    pub time_column: String,
    pub variable_columns: Vec<String>,
}

impl ColumnMapping {
    /// `series_id,time,<vars...>`, the standard layout.
    pub fn standard(vars: &[&str]) -> Self {
        ColumnMapping {
            series_column: Some("series_id".into()),
            time_column: "time".into(),
            variable_columns: vars.iter().map(|v| v.to_string()).collect(),
        }
    }
}

/// Reads a CSV table into a [`Dataset`]. Empty cells become missing values.
/// Reported row numbers are file line numbers (the header is line 1).
pub fn load_dataset(path: impl AsRef<Path>, schema: &ColumnMapping) -> Result<Dataset, DatasetError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io { path: path.display().to_string(), source })?;
    read_dataset(file, schema)
}

pub(crate) fn read_dataset<R: std::io::Read>(reader: R, schema: &ColumnMapping) -> Result<Dataset, DatasetError> {
    if schema.variable_columns.is_empty() {
        return Err(DatasetError::NoVariables);
    }
    let mut rdr = ::csv::ReaderBuilder::new().trim(::csv::Trim::All).from_reader(reader);
    let header = rdr.headers()?.clone();
    let find = |name: &str| header.iter().position(|h| h == name).ok_or_else(|| DatasetError::MissingColumn(name.to_string()));
    let id_col = schema.series_column.as_deref().map(find).transpose()?;
    let time_col = find(&schema.time_column)?;
    let var_cols = schema.variable_columns.iter().map(|v| find(v)).collect::<Result<Vec<_>, _>>()?;

    let mut order: Vec<String> = Vec::new();
    let mut by_id: BTreeMap<String, Vec<Observation>> = BTreeMap::new();
    for record in rdr.records() {
        let record = record?;
        let row = record.position().map_or(0, |p| p.line());
        let id = match id_col {
            Some(c) => record.get(c).unwrap_or("").to_string(),
            None => DEFAULT_SERIES_ID.to_string(),
        };
        if id.is_empty() {
            return Err(DatasetError::EmptySeriesId { row });
        }
        let raw_time = record.get(time_col).unwrap_or("");
        let time: f64 = match raw_time.parse() {
            Ok(t) if f64::is_finite(t) => t,
            _ => return Err(DatasetError::InvalidTime { row, value: raw_time.to_string() }),
        };
        let mut values = Vec::with_capacity(var_cols.len());
        for (&c, name) in var_cols.iter().zip(&schema.variable_columns) {
            let cell = record.get(c).unwrap_or("");
            if cell.is_empty() || cell.eq_ignore_ascii_case("na") {
                values.push(None);
            } else {
                match cell.parse::<f64>() {
                    Ok(v) if v.is_finite() => values.push(Some(v)),
                    _ => return Err(DatasetError::InvalidValue { row, column: name.clone(), value: cell.to_string() }),
                }
            }
        }
        if !by_id.contains_key(&id) {
            order.push(id.clone());
        }
        by_id.entry(id).or_default().push(Observation { time, values });
    }
    let series = order
        .into_iter()
        .map(|id| {
            let observations = by_id.remove(&id).unwrap_or_default();
            Series { id, observations }
        })
        .collect();
    Dataset::new(schema.variable_columns.clone(), series)
}

/// Writes the standard `series_id,time,<vars...>` layout.
pub fn write_dataset<W: Write>(dataset: &Dataset, out: W) -> Result<(), DatasetError> {
    let mut w = ::csv::Writer::from_writer(out);
    let mut header = vec!["series_id".to_string(), "time".to_string()];
    header.extend(dataset.variable_names.iter().cloned());
    w.write_record(&header)?;
    for s in &dataset.series {
        for o in &s.observations {
            let mut rec = vec![s.id.clone(), fmt_num(o.time)];
            rec.extend(o.values.iter().map(|v| v.map(fmt_num).unwrap_or_default()));
            w.write_record(&rec)?;
        }
    }
    w.flush().map_err(|source| DatasetError::Io { path: "<output>".into(), source })?;
    Ok(())
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> ColumnMapping {
        ColumnMapping { series_column: None, time_column: "t".into(), variable_columns: vec!["v".into()] }
    }

    #[test]
    fn three_rows_one_series() {
        let d = read_dataset("t,v\n1,10\n2,20\n3,30\n".as_bytes(), &schema()).unwrap();
        assert_eq!(d.series.len(), 1);
        assert_eq!(d.series[0].observations.len(), 3);
        assert_eq!(d.series[0].observations[2].values, vec![Some(30.0)]);
    }

    #[test]
    fn empty_cell_is_missing() {
        let s = ColumnMapping { variable_columns: vec!["v".into(), "w".into()], ..schema() };
        let d = read_dataset("t,v,w\n1,10,1\n2,,2\n".as_bytes(), &s).unwrap();
        assert_eq!(d.series[0].observations[1].values, vec![None, Some(2.0)]);
    }

    #[test]
    fn duplicate_timestamp() {
        let s = ColumnMapping::standard(&["v"]);
        let err = read_dataset("series_id,time,v\nA,100,1\nA,100,2\n".as_bytes(), &s).unwrap_err();
        assert!(matches!(err, DatasetError::DuplicateTimestamp { ref series, time } if series == "A" && time == 100.0));
    }

    #[test]
    fn bad_time_reports_row() {
        let err = read_dataset("t,v\n1,1\nx,2\n".as_bytes(), &schema()).unwrap_err();
        assert!(matches!(err, DatasetError::InvalidTime { row: 3, .. }), "{err:?}");
    }

    #[test]
    fn round_trip() {
        let s = ColumnMapping::standard(&["a", "b"]);
        let text = "series_id,time,a,b\nx,-500,1.5,\nx,-400,2,3\ny,0,4,5\n";
        let d = read_dataset(text.as_bytes(), &s).unwrap();
        let mut buf = Vec::new();
        write_dataset(&d, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), text);
    }
}
