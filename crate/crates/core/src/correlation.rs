//! Spearman correlation, distance and similarity matrices over features.
//!
//! Distance is `sqrt(2 (1 - rho))` and similarity is `exp(-distance)`, so
//! similarity lies in `[e^-2, 1]` and grows with the correlation.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::FeatureTable;
use crate::error::{Error, Result};

/// How rank differences are turned into a correlation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationMode {
    /// Pearson correlation of tie-averaged ranks.
    #[default]
    TieAware,
    /// `1 - 6 sum(d^2) / (n (n^2 - 1))`, exact only without ties.
    LiteralFormula,
}

impl FromStr for CorrelationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tie_aware" | "tie-aware" => Ok(CorrelationMode::TieAware),
            "literal_formula" | "literal-formula" | "literal" => Ok(CorrelationMode::LiteralFormula),
            other => Err(Error::InvalidArgument(format!(
                "unknown correlation mode {other:?}"
            ))),
        }
    }
}

impl fmt::Display for CorrelationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrelationMode::TieAware => "tie_aware",
            CorrelationMode::LiteralFormula => "literal_formula",
        })
    }
}

/// Square matrix indexed by feature names, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledMatrix {
    names: Vec<String>,
    data: Vec<f64>,
}

impl LabeledMatrix {
    pub fn from_fn(names: Vec<String>, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let k = names.len();
        let mut data = Vec::with_capacity(k * k);
        for i in 0..k {
            for j in 0..k {
                data.push(f(i, j));
            }
        }
        LabeledMatrix { names, data }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn size(&self) -> usize {
        self.names.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.size() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let k = self.size();
        &self.data[i * k..(i + 1) * k]
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> LabeledMatrix {
        LabeledMatrix {
            names: self.names.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// CSV with feature names as row and column headers. Values use the
    /// shortest representation that round-trips exactly.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = String::from("feature");
        for n in &self.names {
            header.push(',');
            header.push_str(&csv_field(n));
        }
        writeln!(out, "{header}")?;
        for (i, name) in self.names.iter().enumerate() {
            let mut line = csv_field(name);
            for v in self.row(i) {
                line.push(',');
                line.push_str(&format!("{v:?}"));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegenerateFeature {
    pub feature: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    pub matrix: LabeledMatrix,
    pub mode: CorrelationMode,
    pub n_instances: usize,
    pub warnings: Vec<DegenerateFeature>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn names(&self) -> &[String] {
        self.matrix.names()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix(pub LabeledMatrix);

impl DistanceMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn names(&self) -> &[String] {
        self.0.names()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix(pub LabeledMatrix);

impl SimilarityMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn names(&self) -> &[String] {
        self.0.names()
    }

    pub fn size(&self) -> usize {
        self.0.size()
    }
}

/// Fractional ranks starting at 1; tied values share the mean of the
/// positions they occupy.
pub fn rank_transform<T: Copy + PartialOrd>(values: &[T]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .partial_cmp(&values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut ranks = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = rank;
        }
        start = end;
    }
    ranks
}

struct RankedColumn {
    ranks: Vec<f64>,
    centered: Vec<f64>,
    sum_sq: f64,
}

impl RankedColumn {
    fn new<T: Copy + PartialOrd>(column: &[T]) -> Self {
        let ranks = rank_transform(column);
        let n = ranks.len() as f64;
        let mean = ranks.iter().sum::<f64>() / n;
        let centered: Vec<f64> = ranks.iter().map(|r| r - mean).collect();
        let sum_sq = centered.iter().map(|c| c * c).sum();
        RankedColumn {
            ranks,
            centered,
            sum_sq,
        }
    }

    fn is_constant(&self) -> bool {
        self.sum_sq == 0.0
    }
}

fn pearson_centered(a: &RankedColumn, b: &RankedColumn) -> f64 {
    let cov: f64 = a.centered.iter().zip(&b.centered).map(|(x, y)| x * y).sum();
    cov / (a.sum_sq * b.sum_sq).sqrt()
}

fn literal_spearman(a: &RankedColumn, b: &RankedColumn) -> f64 {
    let n = a.ranks.len() as f64;
    let d2: f64 = a
        .ranks
        .iter()
        .zip(&b.ranks)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    1.0 - 6.0 * d2 / (n * (n * n - 1.0))
}

/// Feature-by-feature Spearman correlation over all rows of `table`.
///
/// Pairs involving a zero-variance column get correlation 0 and the column
/// is listed in `warnings`. The diagonal is always 1.
pub fn spearman_matrix(table: &FeatureTable, mode: CorrelationMode) -> Result<CorrelationMatrix> {
    let columns: Vec<Vec<i8>> = (0..table.n_features()).map(|c| table.column(c)).collect();
    spearman_columns(table.feature_names().to_vec(), &columns, mode)
}

/// [`spearman_matrix`] over arbitrary ordered columns of equal length.
pub fn spearman_columns<T: Copy + PartialOrd>(
    names: Vec<String>,
    columns: &[Vec<T>],
    mode: CorrelationMode,
) -> Result<CorrelationMatrix> {
    let k = columns.len();
    if k < 2 {
        return Err(Error::TooFewFeatures(k));
    }
    if names.len() != k {
        return Err(Error::Schema(format!("{} names for {k} columns", names.len())));
    }
    let n = columns[0].len();
    if columns.iter().any(|c| c.len() != n) {
        return Err(Error::Schema("columns differ in length".into()));
    }
    if n < 2 {
        return Err(Error::TooFewRows(n));
    }
    let columns: Vec<RankedColumn> = columns.iter().map(|c| RankedColumn::new(c)).collect();

    let warnings = columns
        .iter()
        .zip(&names)
        .filter(|(c, _)| c.is_constant())
        .map(|(_, name)| DegenerateFeature {
            feature: name.clone(),
            reason: "zero variance; correlations set to 0".into(),
        })
        .collect();

    let mut upper = vec![0.0; k * k];
    for i in 0..k {
        for j in (i + 1)..k {
            let (a, b) = (&columns[i], &columns[j]);
            let rho = if a.is_constant() || b.is_constant() {
                0.0
            } else {
                match mode {
                    CorrelationMode::TieAware => pearson_centered(a, b),
                    CorrelationMode::LiteralFormula => literal_spearman(a, b),
                }
            };
            upper[i * k + j] = rho.clamp(-1.0, 1.0);
        }
    }
    let matrix = LabeledMatrix::from_fn(names, |i, j| {
        use std::cmp::Ordering::*;
        match i.cmp(&j) {
            Equal => 1.0,
            Less => upper[i * k + j],
            Greater => upper[j * k + i],
        }
    });
    Ok(CorrelationMatrix {
        matrix,
        mode,
        n_instances: n,
        warnings,
    })
}

/// Elementwise `sqrt(2 (1 - rho))`, clamping a negative radicand to 0.
pub fn to_distance(corr: &CorrelationMatrix) -> DistanceMatrix {
    DistanceMatrix(corr.matrix.map(correlation_distance))
}

pub fn correlation_distance(rho: f64) -> f64 {
    (2.0 * (1.0 - rho)).max(0.0).sqrt()
}

/// Elementwise `exp(-d)`.
pub fn to_similarity(dist: &DistanceMatrix) -> SimilarityMatrix {
    SimilarityMatrix(dist.0.map(|d| (-d).exp()))
}
