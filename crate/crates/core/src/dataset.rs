//! Tabular dataset loading and per-attribute type profiling.
//!
//! An attribute is *quantitative* when at least 95% of its non-missing values
//! parse as finite numbers, *temporal* when at least 95% parse as dates
//! (ISO-8601 date or date-time, or `%d-%b-%y` such as `01-Jan-20`),
//! *ordinal* when every value belongs to one configured ordered vocabulary,
//! and *nominal* otherwise. A value is missing when it is empty after
//! trimming. Quantitative attributes with at most 12 distinct values are also
//! usable as categorical ("discrete") data.

use std::collections::{BTreeSet, HashSet};

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::fitter::{scale_kind, AttributeBinding};
use crate::templates::{SlotSpec, TemplateLibrary};
use crate::vocab::VizType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributeType {
    Quantitative,
    Temporal,
    Nominal,
    Ordinal,
}

impl AttributeType {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributeType::Quantitative => "quantitative",
            AttributeType::Temporal => "temporal",
            AttributeType::Nominal => "nominal",
            AttributeType::Ordinal => "ordinal",
        }
    }
}

/// Textual date layouts recognised by the profiler.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DateFormat {
    /// `2020-01-31`, `2020-01-31T08:00:00`, RFC 3339.
    Iso,
    /// `31-Jan-20`.
    DayMonthYear,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub inferred_type: AttributeType,
    pub distinct_count: usize,
    pub null_count: usize,
    /// Quantitative with few distinct values.
    pub discrete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub date_format: Option<DateFormat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub attributes: Vec<Attribute>,
    /// Row-major raw values, positionally aligned with `attributes`.
    pub rows: Vec<Vec<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatasetError {
    #[error("malformed row {row}: {message}")]
    ParseError { row: usize, message: String },
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("every value is missing")]
    AllValuesMissing,
    #[error("attribute `{0}` appears more than once")]
    DuplicateAttribute(String),
    #[error("no compatible attribute for slot {slot} (requires {required})")]
    NoCompatibleAttribute { slot: String, required: String },
}

impl DatasetError {
    pub fn code(&self) -> &'static str {
        match self {
            DatasetError::ParseError { .. } => "ParseError",
            DatasetError::EmptyDataset => "EmptyDataset",
            DatasetError::AllValuesMissing => "AllValuesMissing",
            DatasetError::DuplicateAttribute(_) => "DuplicateAttribute",
            DatasetError::NoCompatibleAttribute { .. } => "NoCompatibleAttribute",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfilerConfig {
    pub parse_threshold: f64,
    pub discrete_max_distinct: usize,
    /// Ordered vocabularies, compared case-insensitively.
    pub ordinal_vocabularies: Vec<Vec<String>>,
}

impl Default for ProfilerConfig {
    fn default() -> Self {
        let vocab = |words: &[&str]| words.iter().map(|w| w.to_string()).collect();
        ProfilerConfig {
            parse_threshold: 0.95,
            discrete_max_distinct: 12,
            ordinal_vocabularies: vec![
                vocab(&["low", "medium", "high"]),
                vocab(&["very low", "low", "medium", "high", "very high"]),
                vocab(&["small", "medium", "large"]),
                vocab(&["xs", "s", "m", "l", "xl"]),
                vocab(&["poor", "fair", "good", "very good", "excellent"]),
                vocab(&[
                    "strongly disagree",
                    "disagree",
                    "neutral",
                    "agree",
                    "strongly agree",
                ]),
            ],
        }
    }
}

pub fn is_missing(value: &str) -> bool {
    value.trim().is_empty()
}

pub fn parse_number(value: &str) -> Option<f64> {
    value.trim().parse::<f64>().ok().filter(|v| v.is_finite())
}

pub fn parse_date(value: &str) -> Option<DateFormat> {
    let v = value.trim();
    let iso = NaiveDate::parse_from_str(v, "%Y-%m-%d").is_ok()
        || NaiveDateTime::parse_from_str(v, "%Y-%m-%dT%H:%M:%S%.f").is_ok()
        || NaiveDateTime::parse_from_str(v, "%Y-%m-%d %H:%M:%S%.f").is_ok()
        || NaiveDateTime::parse_from_str(v, "%Y-%m-%dT%H:%M").is_ok()
        || DateTime::parse_from_rfc3339(v).is_ok();
    if iso {
        return Some(DateFormat::Iso);
    }
    // chrono wants a full date for `%y`; check the three fields by hand.
    let mut parts = v.split('-');
    let (d, m, y) = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some() || y.len() != 2 || !y.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    NaiveDate::parse_from_str(&format!("{d}-{m}-20{y}"), "%d-%b-%Y")
        .ok()
        .map(|_| DateFormat::DayMonthYear)
}

/// Infer a type with the default configuration.
pub fn infer_attribute_type<S: AsRef<str>>(values: &[S]) -> Result<AttributeType, DatasetError> {
    infer_attribute_type_with(values, &ProfilerConfig::default())
}

pub fn infer_attribute_type_with<S: AsRef<str>>(
    values: &[S],
    config: &ProfilerConfig,
) -> Result<AttributeType, DatasetError> {
    let present: Vec<&str> = values
        .iter()
        .map(|v| v.as_ref())
        .filter(|v| !is_missing(v))
        .collect();
    if present.is_empty() {
        return Err(DatasetError::AllValuesMissing);
    }
    let need = config.parse_threshold * present.len() as f64;
    let numeric = present.iter().filter(|v| parse_number(v).is_some()).count();
    if numeric as f64 >= need {
        return Ok(AttributeType::Quantitative);
    }
    let dates = present.iter().filter(|v| parse_date(v).is_some()).count();
    if dates as f64 >= need {
        return Ok(AttributeType::Temporal);
    }
    let ordinal = config.ordinal_vocabularies.iter().any(|vocab| {
        present
            .iter()
            .all(|v| vocab.iter().any(|w| w.eq_ignore_ascii_case(v.trim())))
    });
    if ordinal {
        return Ok(AttributeType::Ordinal);
    }
    Ok(AttributeType::Nominal)
}

fn profile(name: &str, column: &[&str], config: &ProfilerConfig) -> Attribute {
    let null_count = column.iter().filter(|v| is_missing(v)).count();
    let distinct: HashSet<&str> = column
        .iter()
        .filter(|v| !is_missing(v))
        .map(|v| v.trim())
        .collect();
    // An all-missing column carries no type signal; it is kept as nominal so
    // that the rest of the dataset still loads.
    let inferred_type = infer_attribute_type_with(column, config).unwrap_or(AttributeType::Nominal);
    let date_format = (inferred_type == AttributeType::Temporal).then(|| {
        let iso = column
            .iter()
            .filter(|v| parse_date(v) == Some(DateFormat::Iso))
            .count();
        let dmy = column
            .iter()
            .filter(|v| parse_date(v) == Some(DateFormat::DayMonthYear))
            .count();
        if dmy > iso {
            DateFormat::DayMonthYear
        } else {
            DateFormat::Iso
        }
    });
    Attribute {
        name: name.to_string(),
        inferred_type,
        distinct_count: distinct.len(),
        null_count,
        discrete: inferred_type == AttributeType::Quantitative
            && distinct.len() <= config.discrete_max_distinct,
        date_format,
    }
}

pub fn load_dataset(name: &str, bytes: &[u8], format: DataFormat) -> Result<Dataset, DatasetError> {
    load_dataset_with(name, bytes, format, &ProfilerConfig::default())
}

pub fn load_dataset_with(
    name: &str,
    bytes: &[u8],
    format: DataFormat,
    config: &ProfilerConfig,
) -> Result<Dataset, DatasetError> {
    let bytes = bytes.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(bytes);
    if bytes.iter().all(|b| b.is_ascii_whitespace()) {
        return Err(DatasetError::EmptyDataset);
    }
    let (names, rows) = match format {
        DataFormat::Csv => read_csv(bytes)?,
        DataFormat::Json => read_json(bytes)?,
    };
    Dataset::from_rows(name, names, rows, config)
}

impl Dataset {
    /// Build and profile a dataset from already split rows.
    pub fn from_rows(
        name: &str,
        names: Vec<String>,
        rows: Vec<Vec<String>>,
        config: &ProfilerConfig,
    ) -> Result<Dataset, DatasetError> {
        let mut seen = HashSet::new();
        for n in &names {
            if n.trim().is_empty() {
                return Err(DatasetError::ParseError {
                    row: 0,
                    message: "empty attribute name".into(),
                });
            }
            if !seen.insert(n.as_str()) {
                return Err(DatasetError::DuplicateAttribute(n.clone()));
            }
        }
        if rows.is_empty() || names.is_empty() {
            return Err(DatasetError::EmptyDataset);
        }
        if let Some(k) = rows.iter().position(|r| r.len() != names.len()) {
            return Err(DatasetError::ParseError {
                row: k + 1,
                message: format!("expected {} fields, found {}", names.len(), rows[k].len()),
            });
        }
        let attributes = names
            .iter()
            .enumerate()
            .map(|(j, n)| {
                let column: Vec<&str> = rows.iter().map(|r| r[j].as_str()).collect();
                profile(n, &column, config)
            })
            .collect();
        Ok(Dataset {
            name: name.to_string(),
            attributes,
            rows,
        })
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn index_of(&self, attribute: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == attribute)
    }

    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn column(&self, attribute: &str) -> Option<Vec<&str>> {
        let j = self.index_of(attribute)?;
        Some(self.rows.iter().map(|r| r[j].as_str()).collect())
    }

    /// Serialize back to RFC-4180 CSV with a header row.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(self.attributes.iter().map(|a| a.name.as_str()))
            .expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("input was utf-8")
    }
}

fn read_csv(bytes: &[u8]) -> Result<(Vec<String>, Vec<Vec<String>>), DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(bytes);
    let csv_err = |e: csv::Error| {
        let row = match e.kind() {
            csv::ErrorKind::UnequalLengths { pos: Some(p), .. } => p.record() as usize,
            _ => e.position().map(|p| p.record() as usize).unwrap_or(0),
        };
        DatasetError::ParseError {
            row,
            message: e.to_string(),
        }
    };
    let names: Vec<String> = reader
        .headers()
        .map_err(csv_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        rows.push(record.iter().map(str::to_string).collect());
    }
    Ok((names, rows))
}

fn read_json(bytes: &[u8]) -> Result<(Vec<String>, Vec<Vec<String>>), DatasetError> {
    let value: serde_json::Value =
        serde_json::from_slice(bytes).map_err(|e| DatasetError::ParseError {
            row: 0,
            message: e.to_string(),
        })?;
    let serde_json::Value::Array(items) = value else {
        return Err(DatasetError::ParseError {
            row: 0,
            message: "expected an array of objects".into(),
        });
    };
    let mut names: Vec<String> = Vec::new();
    let mut objects = Vec::with_capacity(items.len());
    for (k, item) in items.into_iter().enumerate() {
        let serde_json::Value::Object(map) = item else {
            return Err(DatasetError::ParseError {
                row: k + 1,
                message: "expected an object".into(),
            });
        };
        for key in map.keys() {
            if !names.contains(key) {
                names.push(key.clone());
            }
        }
        objects.push(map);
    }
    let mut rows = Vec::with_capacity(objects.len());
    for (k, map) in objects.iter().enumerate() {
        let mut row = Vec::with_capacity(names.len());
        for n in &names {
            let text = match map.get(n) {
                None | Some(serde_json::Value::Null) => String::new(),
                Some(serde_json::Value::String(s)) => s.clone(),
                Some(serde_json::Value::Number(x)) => x.to_string(),
                Some(serde_json::Value::Bool(b)) => b.to_string(),
                Some(_) => {
                    return Err(DatasetError::ParseError {
                        row: k + 1,
                        message: format!("attribute `{n}` is not a flat value"),
                    })
                }
            };
            row.push(text);
        }
        rows.push(row);
    }
    Ok((names, rows))
}

/// Bind each slot of `viz`'s template to the first compatible attribute.
pub fn select_attributes(
    dataset: &Dataset,
    viz: VizType,
    already_used: &BTreeSet<String>,
) -> Result<AttributeBinding, DatasetError> {
    let template = TemplateLibrary::builtin().viz_template(viz);
    select_attributes_for(dataset, &template.slot_signature, already_used)
}

/// First-match selection over an explicit slot signature. Slots are filled
/// left to right; an attribute bound to an earlier slot is not reused unless
/// that slot is marked reusable.
pub fn select_attributes_for(
    dataset: &Dataset,
    slots: &[SlotSpec],
    already_used: &BTreeSet<String>,
) -> Result<AttributeBinding, DatasetError> {
    let mut binding = AttributeBinding::default();
    let mut taken: Vec<&str> = Vec::new();
    for slot in slots {
        let found = dataset.attributes.iter().find(|a| {
            !already_used.contains(&a.name)
                && (slot.reusable || !taken.contains(&a.name.as_str()))
                && slot.accepts_attribute(a)
        });
        let Some(attr) = found else {
            return Err(DatasetError::NoCompatibleAttribute {
                slot: slot.name.clone(),
                required: slot.required(),
            });
        };
        taken.push(&attr.name);
        binding.insert(&slot.name, &attr.name, scale_kind(slot, attr));
    }
    Ok(binding)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inference_examples() {
        assert_eq!(
            infer_attribute_type(&["1.2", "3", "4.5"]).unwrap(),
            AttributeType::Quantitative
        );
        assert_eq!(
            infer_attribute_type(&["2020-01-01", "2020-02-01"]).unwrap(),
            AttributeType::Temporal
        );
        assert_eq!(
            infer_attribute_type(&["setosa", "virginica"]).unwrap(),
            AttributeType::Nominal
        );
        assert_eq!(
            infer_attribute_type(&["Low", "high", "medium"]).unwrap(),
            AttributeType::Ordinal
        );
        assert_eq!(
            infer_attribute_type(&["", "  "]),
            Err(DatasetError::AllValuesMissing)
        );
    }

    #[test]
    fn threshold_tolerates_sentinels() {
        let mut values: Vec<String> = (0..19).map(|i| i.to_string()).collect();
        values.push("n/a".into());
        assert_eq!(
            infer_attribute_type(&values).unwrap(),
            AttributeType::Quantitative
        );
        values.push("?".into());
        assert_eq!(
            infer_attribute_type(&values).unwrap(),
            AttributeType::Nominal
        );
    }

    #[test]
    fn date_layouts() {
        assert_eq!(parse_date("2021-03-04T10:00:00Z"), Some(DateFormat::Iso));
        assert_eq!(parse_date("1970-01-01"), Some(DateFormat::Iso));
        assert_eq!(parse_date("24-Apr-07"), Some(DateFormat::DayMonthYear));
        assert_eq!(parse_date("2020"), None);
        assert_eq!(parse_date("31-Feb-07"), None);
    }

    #[test]
    fn non_finite_numbers_rejected() {
        assert_eq!(parse_number(" 5 "), Some(5.0));
        assert_eq!(parse_number("inf"), None);
        assert_eq!(parse_number("NaN"), None);
    }

    #[test]
    fn one_row_csv() {
        let d = load_dataset("t", b"a\n1", DataFormat::Csv).unwrap();
        assert_eq!(d.attributes.len(), 1);
        assert_eq!(d.attributes[0].inferred_type, AttributeType::Quantitative);
        assert!(d.attributes[0].discrete);
    }

    #[test]
    fn ragged_row_reports_index() {
        let err = load_dataset("t", b"a,b\n1,2\n3,4\n5\n", DataFormat::Csv).unwrap_err();
        assert!(
            matches!(err, DatasetError::ParseError { row: 3, .. }),
            "{err:?}"
        );
    }

    #[test]
    fn empty_inputs() {
        assert_eq!(
            load_dataset("t", b"", DataFormat::Csv),
            Err(DatasetError::EmptyDataset)
        );
        assert_eq!(
            load_dataset("t", b"a,b\n", DataFormat::Csv),
            Err(DatasetError::EmptyDataset)
        );
        assert_eq!(
            load_dataset("t", b"[]", DataFormat::Json),
            Err(DatasetError::EmptyDataset)
        );
    }

    #[test]
    fn json_rows_keep_key_order() {
        let d = load_dataset(
            "t",
            br#"[{"b": 1, "a": "x"}, {"a": "y", "c": null, "b": 2.5}]"#,
            DataFormat::Json,
        )
        .unwrap();
        let names: Vec<_> = d.attributes.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["b", "a", "c"]);
        assert_eq!(d.rows[1], ["2.5", "y", ""]);
        assert_eq!(d.attributes[2].null_count, 2);
        let err = load_dataset("t", br#"[{"a": [1]}]"#, DataFormat::Json).unwrap_err();
        assert!(matches!(err, DatasetError::ParseError { row: 1, .. }));
    }

    #[test]
    fn duplicate_header_rejected() {
        let err = load_dataset("t", b"a,a\n1,2\n", DataFormat::Csv).unwrap_err();
        assert_eq!(err, DatasetError::DuplicateAttribute("a".into()));
    }

    #[test]
    fn csv_round_trip() {
        let src = "name,v\n\"a, b\",1\nc,\n";
        let d = load_dataset("t", src.as_bytes(), DataFormat::Csv).unwrap();
        assert_eq!(d.to_csv(), src);
    }
}
