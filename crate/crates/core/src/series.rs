//! Extracted data series and their table forms.
//!
//! Two table encodings are supported. The structured form is a JSON array of
//! `{name, kind, records}` objects. The delimited form is comma-separated text
//! with a single header row; its columns are `name` followed by the record
//! fields (`x,y`, `category,value` or `min,q1,median,q3,max`), so every series
//! in one delimited table must share a record kind.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Five-number summary with `min <= q1 <= median <= q3 <= max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiveNumber {
    min: f64,
    q1: f64,
    median: f64,
    q3: f64,
    max: f64,
}

impl FiveNumber {
    pub fn new(min: f64, q1: f64, median: f64, q3: f64, max: f64) -> Result<Self> {
        let v = [min, q1, median, q3, max];
        if !v.iter().all(|x| x.is_finite()) {
            return Err(Error::invalid("boxplot", "non-finite value"));
        }
        if !v.windows(2).all(|w| w[0] <= w[1]) {
            return Err(Error::invalid(
                "boxplot",
                format!("five-number summary out of order: {v:?}"),
            ));
        }
        Ok(Self {
            min,
            q1,
            median,
            q3,
            max,
        })
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.min, self.q1, self.median, self.q3, self.max]
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn q1(&self) -> f64 {
        self.q1
    }

    pub fn median(&self) -> f64 {
        self.median
    }

    pub fn q3(&self) -> f64 {
        self.q3
    }

    pub fn max(&self) -> f64 {
        self.max
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RecordKind {
    Numeric,
    Categorical,
    Boxplot,
}

impl RecordKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            RecordKind::Numeric => "numeric",
            RecordKind::Categorical => "categorical",
            RecordKind::Boxplot => "boxplot",
        }
    }

    fn columns(&self) -> &'static [&'static str] {
        match self {
            RecordKind::Numeric => &["x", "y"],
            RecordKind::Categorical => &["category", "value"],
            RecordKind::Boxplot => &["min", "q1", "median", "q3", "max"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    Numeric { x: f64, y: f64 },
    Categorical { category: String, value: f64 },
    Boxplot(FiveNumber),
}

impl Record {
    pub fn kind(&self) -> RecordKind {
        match self {
            Record::Numeric { .. } => RecordKind::Numeric,
            Record::Categorical { .. } => RecordKind::Categorical,
            Record::Boxplot(_) => RecordKind::Boxplot,
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Record::Numeric { x, y } => x.is_finite() && y.is_finite(),
            Record::Categorical { value, .. } => value.is_finite(),
            Record::Boxplot(_) => true,
        }
    }
}

/// A named sequence of records that all share one kind.
#[derive(Debug, Clone, PartialEq)]
pub struct DataSeries {
    name: String,
    records: Vec<Record>,
}

impl DataSeries {
    pub fn new(name: impl Into<String>, records: Vec<Record>) -> Result<Self> {
        let name = name.into();
        if let Some(first) = records.first() {
            if records.iter().any(|r| r.kind() != first.kind()) {
                return Err(Error::invalid(
                    format!("series {name:?}"),
                    "mixed record kinds in one series",
                ));
            }
        }
        if !records.iter().all(Record::is_finite) {
            return Err(Error::invalid(
                format!("series {name:?}"),
                "non-finite value",
            ));
        }
        Ok(Self { name, records })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    /// Record kind, or `None` for an empty series.
    pub fn kind(&self) -> Option<RecordKind> {
        self.records.first().map(Record::kind)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesDoc {
    name: String,
    kind: String,
    records: Vec<RecordDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
enum RecordDoc {
    Numeric {
        x: f64,
        y: f64,
    },
    Categorical {
        category: String,
        value: f64,
    },
    Boxplot {
        min: f64,
        q1: f64,
        median: f64,
        q3: f64,
        max: f64,
    },
}

fn record_doc(r: &Record) -> RecordDoc {
    match r {
        Record::Numeric { x, y } => RecordDoc::Numeric { x: *x, y: *y },
        Record::Categorical { category, value } => RecordDoc::Categorical {
            category: category.clone(),
            value: *value,
        },
        Record::Boxplot(f) => RecordDoc::Boxplot {
            min: f.min,
            q1: f.q1,
            median: f.median,
            q3: f.q3,
            max: f.max,
        },
    }
}

fn kind_from_str(s: &str) -> Result<RecordKind> {
    match s {
        "numeric" => Ok(RecordKind::Numeric),
        "categorical" => Ok(RecordKind::Categorical),
        "boxplot" => Ok(RecordKind::Boxplot),
        _ => Err(Error::invalid("kind", format!("unknown record kind {s:?}"))),
    }
}

/// Structured (JSON) table form.
pub fn serialize_series_json(series: &[DataSeries]) -> Result<Vec<u8>> {
    let docs: Vec<SeriesDoc> = series
        .iter()
        .map(|s| SeriesDoc {
            name: s.name.clone(),
            kind: s.kind().unwrap_or(RecordKind::Numeric).as_str().to_string(),
            records: s.records.iter().map(record_doc).collect(),
        })
        .collect();
    let mut out =
        serde_json::to_vec_pretty(&docs).map_err(|e| Error::parse("series", e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

pub fn parse_series_json(bytes: &[u8]) -> Result<Vec<DataSeries>> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let docs: Vec<SeriesDoc> = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::parse(e.path().to_string(), e.inner().to_string()))?;
    docs.into_iter()
        .enumerate()
        .map(|(i, doc)| {
            let kind = kind_from_str(&doc.kind)?;
            let records = doc
                .records
                .into_iter()
                .enumerate()
                .map(|(j, r)| {
                    let rec = match r {
                        RecordDoc::Numeric { x, y } => Record::Numeric { x, y },
                        RecordDoc::Categorical { category, value } => {
                            Record::Categorical { category, value }
                        }
                        RecordDoc::Boxplot {
                            min,
                            q1,
                            median,
                            q3,
                            max,
                        } => Record::Boxplot(FiveNumber::new(min, q1, median, q3, max)?),
                    };
                    if rec.kind() != kind {
                        return Err(Error::parse(
                            format!("[{i}].records[{j}]"),
                            format!("record does not match series kind {:?}", kind.as_str()),
                        ));
                    }
                    Ok(rec)
                })
                .collect::<Result<Vec<_>>>()?;
            DataSeries::new(doc.name, records)
        })
        .collect()
}

// Shortest round-trip decimal. `{:?}` switches to exponent form for very large
// or small magnitudes and appends `.0` to integral values, which is dropped.
fn fmt_num(v: f64) -> String {
    let mut buf = format!("{v:?}");
    if buf.ends_with(".0") {
        buf.truncate(buf.len() - 2);
    }
    buf
}

/// Delimited (CSV) table form. All series must share one record kind.
pub fn serialize_series_csv(series: &[DataSeries]) -> Result<Vec<u8>> {
    let kinds: Vec<RecordKind> = series.iter().filter_map(DataSeries::kind).collect();
    let kind = kinds.first().copied().unwrap_or(RecordKind::Numeric);
    if kinds.iter().any(|k| *k != kind) {
        return Err(Error::invalid(
            "series",
            "mixed record kinds in one delimited table",
        ));
    }
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["name"];
    header.extend_from_slice(kind.columns());
    w.write_record(&header).map_err(csv_err)?;
    for s in series {
        for r in &s.records {
            let mut row = vec![s.name.clone()];
            match r {
                Record::Numeric { x, y } => row.extend([fmt_num(*x), fmt_num(*y)]),
                Record::Categorical { category, value } => {
                    row.extend([category.clone(), fmt_num(*value)])
                }
                Record::Boxplot(f) => row.extend(f.as_array().map(fmt_num)),
            }
            w.write_record(&row).map_err(csv_err)?;
        }
    }
    w.into_inner()
        .map_err(|e| Error::invalid("series", e.to_string()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::parse("csv", e.to_string())
}

/// Reads a delimited table. Series appear in order of first occurrence; a
/// series with no rows cannot be represented and so never appears.
pub fn parse_series_csv(bytes: &[u8]) -> Result<Vec<DataSeries>> {
    let mut r = csv::ReaderBuilder::new().from_reader(bytes);
    let header: Vec<String> = r
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(String::from)
        .collect();
    let kind = [
        RecordKind::Numeric,
        RecordKind::Categorical,
        RecordKind::Boxplot,
    ]
    .into_iter()
    .find(|k| {
        header.len() == k.columns().len() + 1
            && header[0] == "name"
            && header[1..].iter().zip(k.columns()).all(|(a, b)| a == b)
    })
    .ok_or_else(|| Error::parse("header", format!("unrecognized header {header:?}")))?;
    let mut out: Vec<(String, Vec<Record>)> = Vec::new();
    for (line, row) in r.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let num = |i: usize| -> Result<f64> {
            row[i]
                .parse::<f64>()
                .map_err(|e| Error::parse(format!("row {}.{}", line + 1, header[i]), e.to_string()))
        };
        let rec = match kind {
            RecordKind::Numeric => Record::Numeric {
                x: num(1)?,
                y: num(2)?,
            },
            RecordKind::Categorical => Record::Categorical {
                category: row[1].to_string(),
                value: num(2)?,
            },
            RecordKind::Boxplot => Record::Boxplot(FiveNumber::new(
                num(1)?,
                num(2)?,
                num(3)?,
                num(4)?,
                num(5)?,
            )?),
        };
        match out.iter_mut().find(|(n, _)| n == &row[0]) {
            Some((_, recs)) => recs.push(rec),
            None => out.push((row[0].to_string(), vec![rec])),
        }
    }
    out.into_iter()
        .map(|(n, recs)| DataSeries::new(n, recs))
        .collect()
}
