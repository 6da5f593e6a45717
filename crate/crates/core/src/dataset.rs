//! Labeled categorical feature tables.
//!
//! Cells are codes in {-1, 0, 1} (phishing, suspicious, legitimate) and labels
//! are in {-1, 1}. Tables load from CSV (header row, label in the last column)
//! or from a minimal ARFF subset: `@relation`, `@attribute name {..}`, `@data`
//! and `%` comments. Missing cells are rejected, never imputed.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Label code for phishing rows.
pub const PHISHING: i8 = -1;
/// Label code for legitimate rows.
pub const LEGITIMATE: i8 = 1;

const DEFAULT_LABEL_NAME: &str = "Result";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Arff,
    Auto,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "arff" => Ok(Format::Arff),
            "auto" => Ok(Format::Auto),
            other => Err(Error::InvalidArgument(format!("unknown format {other:?}"))),
        }
    }
}

/// Which rows of the dataset a network is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionSelector {
    All,
    Legitimate,
    Phishing,
}

impl PartitionSelector {
    pub const ALL: [PartitionSelector; 3] = [
        PartitionSelector::All,
        PartitionSelector::Legitimate,
        PartitionSelector::Phishing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PartitionSelector::All => "all",
            PartitionSelector::Legitimate => "legitimate",
            PartitionSelector::Phishing => "phishing",
        }
    }

    fn keeps(self, label: i8) -> bool {
        match self {
            PartitionSelector::All => true,
            PartitionSelector::Legitimate => label == LEGITIMATE,
            PartitionSelector::Phishing => label == PHISHING,
        }
    }
}

impl fmt::Display for PartitionSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PartitionSelector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "all" => Ok(PartitionSelector::All),
            "legitimate" | "legit" => Ok(PartitionSelector::Legitimate),
            "phishing" | "phish" => Ok(PartitionSelector::Phishing),
            other => Err(Error::InvalidArgument(format!("unknown partition {other:?}"))),
        }
    }
}

/// Instances x categorical features, plus one label per instance.
///
/// Cells are stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    feature_names: Vec<String>,
    label_name: String,
    cells: Vec<i8>,
    labels: Vec<i8>,
    source: String,
}

impl FeatureTable {
    /// Builds a validated table from row vectors.
    pub fn from_rows(
        feature_names: Vec<String>,
        rows: Vec<Vec<i8>>,
        labels: Vec<i8>,
        source: impl Into<String>,
    ) -> Result<Self> {
        validate_names(&feature_names)?;
        if rows.len() != labels.len() {
            return Err(Error::Schema(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let k = feature_names.len();
        let mut cells = Vec::with_capacity(rows.len() * k);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::Schema(format!(
                    "row {r} has {} cells, expected {k}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                check_cell(v as i64, r, c, &feature_names[c])?;
            }
            cells.extend_from_slice(row);
        }
        for (r, &l) in labels.iter().enumerate() {
            check_label(l as i64, r, k, DEFAULT_LABEL_NAME)?;
        }
        Ok(FeatureTable {
            feature_names,
            label_name: DEFAULT_LABEL_NAME.to_string(),
            cells,
            labels,
            source: source.into(),
        })
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn label_name(&self) -> &str {
        &self.label_name
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }

    pub fn row(&self, r: usize) -> &[i8] {
        let k = self.n_features();
        &self.cells[r * k..(r + 1) * k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i8]> + '_ {
        self.cells.chunks_exact(self.n_features().max(1))
    }

    pub fn column(&self, c: usize) -> Vec<i8> {
        self.rows().map(|row| row[c]).collect()
    }

    pub fn get(&self, r: usize, c: usize) -> i8 {
        self.cells[r * self.n_features() + c]
    }

    /// Finds a feature by exact name, falling back to a loose match that
    /// ignores case, spaces, underscores and dashes ("Shortening Service"
    /// matches "Shortening_Service").
    pub fn feature_index(&self, name: &str) -> Option<usize> {
        if let Some(i) = self.feature_names.iter().position(|n| n == name) {
            return Some(i);
        }
        let key = normalize_name(name);
        self.feature_names
            .iter()
            .position(|n| normalize_name(n) == key)
    }

    /// New table with the given rows, in the given order.
    pub fn select_rows(&self, indices: &[usize], source: impl Into<String>) -> FeatureTable {
        let k = self.n_features();
        let mut cells = Vec::with_capacity(indices.len() * k);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            cells.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        FeatureTable {
            feature_names: self.feature_names.clone(),
            label_name: self.label_name.clone(),
            cells,
            labels,
            source: source.into(),
        }
    }

    /// Writes the table as CSV with the label as the last column.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let to_err = |e: csv::Error| Error::Parse {
            line: 0,
            message: e.to_string(),
        };
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(&self.label_name);
        w.write_record(&header).map_err(to_err)?;
        for (row, label) in self.rows().zip(&self.labels) {
            let rec: Vec<String> = row
                .iter()
                .chain(std::iter::once(label))
                .map(|v| v.to_string())
                .collect();
            w.write_record(&rec).map_err(to_err)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

pub(crate) fn normalize_name(name: &str) -> String {
    name.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(char::to_lowercase)
        .collect()
}

fn validate_names(names: &[String]) -> Result<()> {
    let mut seen = HashSet::new();
    for name in names {
        if name.trim().is_empty() {
            return Err(Error::Schema("empty feature name".into()));
        }
        if !seen.insert(name.as_str()) {
            return Err(Error::Schema(format!("duplicate feature name {name:?}")));
        }
    }
    Ok(())
}

fn check_cell(v: i64, row: usize, column: usize, name: &str) -> Result<i8> {
    if (-1..=1).contains(&v) {
        Ok(v as i8)
    } else {
        Err(Error::Domain {
            row,
            column,
            name: name.to_string(),
            value: v.to_string(),
        })
    }
}

fn check_label(v: i64, row: usize, column: usize, name: &str) -> Result<i8> {
    if v == -1 || v == 1 {
        Ok(v as i8)
    } else {
        Err(Error::Domain {
            row,
            column,
            name: name.to_string(),
            value: v.to_string(),
        })
    }
}

fn parse_int(raw: &str, line: usize, column: usize) -> Result<i64> {
    let s = raw.trim();
    if s.is_empty() || s == "?" {
        return Err(Error::Parse {
            line,
            message: format!("missing value in column {column}"),
        });
    }
    s.parse::<i64>().map_err(|_| Error::Parse {
        line,
        message: format!("non-integer cell {s:?} in column {column}"),
    })
}

/// Loads a labeled table. The last column is the label.
pub fn load_dataset(path: impl AsRef<Path>, format: Format) -> Result<FeatureTable> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let format = match format {
        Format::Auto => detect_format(path, &text),
        f => f,
    };
    let source = path.display().to_string();
    match format {
        Format::Arff => parse_arff(&text, source),
        _ => parse_csv(&text, source),
    }
}

fn detect_format(path: &Path, text: &str) -> Format {
    if path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("arff"))
    {
        return Format::Arff;
    }
    let first = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('%'));
    match first {
        Some(l) if l.starts_with('@') => Format::Arff,
        _ => Format::Csv,
    }
}

/// Parses CSV text: header row, integer cells, label last.
pub fn parse_csv(text: &str, source: impl Into<String>) -> Result<FeatureTable> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    let mut names: Vec<String> = header.iter().map(str::to_string).collect();
    if names.len() < 2 {
        return Err(Error::Schema(
            "need at least one feature column and a label column".into(),
        ));
    }
    let label_name = names.pop().unwrap_or_default();
    validate_names(&names)?;
    let k = names.len();

    let mut cells = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record.get(0).is_some_and(str::is_empty) {
            continue;
        }
        if record.len() != k + 1 {
            return Err(Error::Parse {
                line,
                message: format!("expected {} fields, found {}", k + 1, record.len()),
            });
        }
        let row = labels.len();
        for (c, field) in record.iter().take(k).enumerate() {
            cells.push(check_cell(parse_int(field, line, c)?, row, c, &names[c])?);
        }
        labels.push(check_label(
            parse_int(&record[k], line, k)?,
            row,
            k,
            &label_name,
        )?);
    }

    Ok(FeatureTable {
        feature_names: names,
        label_name,
        cells,
        labels,
        source: source.into(),
    })
}

struct ArffAttribute {
    name: String,
    nominal: Option<Vec<i64>>,
}

fn parse_attribute(rest: &str, line: usize) -> Result<ArffAttribute> {
    let rest = rest.trim();
    let (name, tail) = if let Some(quoted) = rest.strip_prefix('\'') {
        let end = quoted.find('\'').ok_or_else(|| Error::Parse {
            line,
            message: "unterminated quoted attribute name".into(),
        })?;
        (quoted[..end].to_string(), &quoted[end + 1..])
    } else if let Some(quoted) = rest.strip_prefix('"') {
        let end = quoted.find('"').ok_or_else(|| Error::Parse {
            line,
            message: "unterminated quoted attribute name".into(),
        })?;
        (quoted[..end].to_string(), &quoted[end + 1..])
    } else {
        let end = rest
            .find(|c: char| c.is_whitespace() || c == '{')
            .unwrap_or(rest.len());
        (rest[..end].to_string(), &rest[end..])
    };
    let tail = tail.trim();
    let nominal = if let Some(body) = tail.strip_prefix('{') {
        let body = body.strip_suffix('}').ok_or_else(|| Error::Parse {
            line,
            message: "unterminated nominal value set".into(),
        })?;
        let values = body
            .split(',')
            .map(|v| parse_int(v.trim().trim_matches('\'').trim_matches('"'), line, 0))
            .collect::<Result<Vec<_>>>()?;
        Some(values)
    } else {
        match tail.to_ascii_lowercase().as_str() {
            "numeric" | "integer" | "real" => None,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unsupported attribute type {other:?}"),
                })
            }
        }
    };
    Ok(ArffAttribute { name, nominal })
}

/// Parses the supported ARFF subset. The last attribute is the label.
pub fn parse_arff(text: &str, source: impl Into<String>) -> Result<FeatureTable> {
    let mut attributes: Vec<ArffAttribute> = Vec::new();
    let mut in_data = false;
    let mut cells = Vec::new();
    let mut labels = Vec::new();
    let mut names: Vec<String> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        if !in_data {
            let lower = line.to_ascii_lowercase();
            if lower.starts_with("@relation") {
                continue;
            } else if lower.starts_with("@attribute") {
                attributes.push(parse_attribute(&line["@attribute".len()..], line_no)?);
            } else if lower.starts_with("@data") {
                if attributes.len() < 2 {
                    return Err(Error::Schema(
                        "need at least one feature attribute and a class attribute".into(),
                    ));
                }
                names = attributes[..attributes.len() - 1]
                    .iter()
                    .map(|a| a.name.clone())
                    .collect();
                validate_names(&names)?;
                in_data = true;
            } else {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unexpected header line {line:?}"),
                });
            }
            continue;
        }

        if line.starts_with('{') {
            return Err(Error::Parse {
                line: line_no,
                message: "sparse ARFF rows are not supported".into(),
            });
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != attributes.len() {
            return Err(Error::Parse {
                line: line_no,
                message: format!(
                    "expected {} fields, found {}",
                    attributes.len(),
                    fields.len()
                ),
            });
        }
        let row = labels.len();
        let k = names.len();
        for (c, field) in fields.iter().enumerate() {
            let v = parse_int(field.trim_matches('\'').trim_matches('"'), line_no, c)?;
            let attr = &attributes[c];
            let in_set = attr.nominal.as_ref().is_none_or(|set| set.contains(&v));
            let domain_err = || Error::Domain {
                row,
                column: c,
                name: attr.name.clone(),
                value: v.to_string(),
            };
            if !in_set {
                return Err(domain_err());
            }
            if c < k {
                cells.push(check_cell(v, row, c, &attr.name)?);
            } else {
                labels.push(check_label(v, row, c, &attr.name)?);
            }
        }
    }

    if !in_data {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: "missing @data section".into(),
        });
    }
    let label_name = attributes
        .last()
        .map(|a| a.name.clone())
        .unwrap_or_else(|| DEFAULT_LABEL_NAME.to_string());
    Ok(FeatureTable {
        feature_names: names,
        label_name,
        cells,
        labels,
        source: source.into(),
    })
}

/// Rows of one class, or all rows. Features are unchanged.
pub fn partition(table: &FeatureTable, sel: PartitionSelector) -> Result<FeatureTable> {
    let source = format!("{}#{}", table.source, sel.name());
    if sel == PartitionSelector::All {
        if table.n_rows() == 0 {
            return Err(Error::EmptyPartition(sel.name().into()));
        }
        let mut t = table.clone();
        t.source = source;
        return Ok(t);
    }
    let keep: Vec<usize> = (0..table.n_rows())
        .filter(|&r| sel.keeps(table.labels[r]))
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyPartition(sel.name().into()));
    }
    Ok(table.select_rows(&keep, source))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassCount {
    pub count: usize,
    pub fraction: f64,
}

/// Per-label counts and fractions.
pub fn class_proportions(table: &FeatureTable) -> Result<BTreeMap<i8, ClassCount>> {
    let n = table.n_rows();
    if n == 0 {
        return Err(Error::EmptyPartition(table.source.clone()));
    }
    let mut counts: BTreeMap<i8, usize> = BTreeMap::new();
    for &l in &table.labels {
        *counts.entry(l).or_default() += 1;
    }
    Ok(counts
        .into_iter()
        .map(|(label, count)| {
            (
                label,
                ClassCount {
                    count,
                    fraction: count as f64 / n as f64,
                },
            )
        })
        .collect())
}
