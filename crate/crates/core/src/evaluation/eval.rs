use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::gbt::{train_gbt, GbtParams};
use super::pca::{fit_pca, table_matrix};
use crate::dataset::FeatureTable;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum FeatureSubset {
    NamedFeatures { names: Vec<String> },
    PcaComponents { k: usize },
}

impl FeatureSubset {
    pub fn named<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        FeatureSubset::NamedFeatures {
            names: names.into_iter().map(Into::into).collect(),
        }
    }

    pub fn pca(k: usize) -> Self {
        FeatureSubset::PcaComponents { k }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            train_fraction,
            seed,
            stratified: true,
        }
    }
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec::new(0.8, 42)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub subset: FeatureSubset,
    pub split: SplitSpec,
    pub params: GbtParams,
    pub n_train: usize,
    pub n_test: usize,
    pub accuracy: f64,
    /// Recall per true label, keyed by label code.
    pub per_class_accuracy: BTreeMap<String, f64>,
    /// `[actual][predicted]`, both ordered (-1, 1).
    pub confusion_matrix: [[usize; 2]; 2],
}

/// Seeded shuffle-and-cut. Returns sorted (train, test) row indices; with
/// stratification each label keeps its share in both parts.
pub fn stratified_split(labels: &[i8], spec: &SplitSpec) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction {} must lie strictly between 0 and 1",
            spec.train_fraction
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let groups: Vec<Vec<usize>> = if spec.stratified {
        let mut by_label: BTreeMap<i8, Vec<usize>> = BTreeMap::new();
        for (i, &l) in labels.iter().enumerate() {
            by_label.entry(l).or_default().push(i);
        }
        by_label.into_values().collect()
    } else {
        vec![(0..labels.len()).collect()]
    };

    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut group in groups {
        group.shuffle(&mut rng);
        let n = group.len();
        let mut cut = (spec.train_fraction * n as f64).round() as usize;
        if n >= 2 {
            cut = cut.clamp(1, n - 1);
        }
        train.extend_from_slice(&group[..cut]);
        test.extend_from_slice(&group[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

fn resolve_columns(table: &FeatureTable, names: &[String]) -> Result<Vec<usize>> {
    if names.is_empty() {
        return Err(Error::InvalidArgument("empty feature subset".into()));
    }
    names
        .iter()
        .map(|n| {
            table
                .feature_index(n)
                .ok_or_else(|| Error::UnknownFeature(n.clone()))
        })
        .collect()
}

/// Trains on the training rows only and scores the held-out rows. For a PCA
/// subset the projection is fitted on the training rows as well.
pub fn evaluate(
    table: &FeatureTable,
    subset: &FeatureSubset,
    split: &SplitSpec,
    params: &GbtParams,
) -> Result<EvalReport> {
    let (train_idx, test_idx) = stratified_split(table.labels(), split)?;
    if test_idx.is_empty() {
        return Err(Error::InvalidArgument("split leaves no test rows".into()));
    }
    let train = table.select_rows(&train_idx, "train");
    let test = table.select_rows(&test_idx, "test");

    let (x_train, x_test) = match subset {
        FeatureSubset::NamedFeatures { names } => {
            let cols = resolve_columns(table, names)?;
            (table_matrix(&train, &cols), table_matrix(&test, &cols))
        }
        FeatureSubset::PcaComponents { k } => {
            let all: Vec<usize> = (0..table.n_features()).collect();
            let raw_train = table_matrix(&train, &all);
            let model = fit_pca(&raw_train, *k, split.seed)?;
            (
                model.transform(&raw_train),
                model.transform(&table_matrix(&test, &all)),
            )
        }
    };

    let model = train_gbt(&x_train, train.labels(), params)?;
    let mut confusion = [[0usize; 2]; 2];
    let slot = |l: i8| usize::from(l > 0);
    for (row, &label) in x_test.rows().zip(test.labels()) {
        confusion[slot(label)][slot(model.predict(row))] += 1;
    }
    let correct = confusion[0][0] + confusion[1][1];
    let mut per_class = BTreeMap::new();
    for (code, s) in [(-1i8, 0usize), (1, 1)] {
        let total = confusion[s][0] + confusion[s][1];
        if total > 0 {
            per_class.insert(code.to_string(), confusion[s][s] as f64 / total as f64);
        }
    }
    Ok(EvalReport {
        subset: subset.clone(),
        split: *split,
        params: *params,
        n_train: train_idx.len(),
        n_test: test_idx.len(),
        accuracy: correct as f64 / test_idx.len() as f64,
        per_class_accuracy: per_class,
        confusion_matrix: confusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_is_disjoint_and_stratified() {
        let labels: Vec<i8> = (0..103).map(|i| if i % 3 == 0 { -1 } else { 1 }).collect();
        let (train, test) = stratified_split(&labels, &SplitSpec::new(0.8, 9)).unwrap();
        assert_eq!(train.len() + test.len(), labels.len());
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), labels.len());
        let neg_train = train.iter().filter(|&&i| labels[i] == -1).count();
        assert_eq!(neg_train, (0.8f64 * 35.0).round() as usize);
    }

    #[test]
    fn split_depends_on_seed_only() {
        let labels: Vec<i8> = (0..50).map(|i| if i % 2 == 0 { -1 } else { 1 }).collect();
        let a = stratified_split(&labels, &SplitSpec::new(0.7, 1)).unwrap();
        let b = stratified_split(&labels, &SplitSpec::new(0.7, 1)).unwrap();
        let c = stratified_split(&labels, &SplitSpec::new(0.7, 2)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn bad_fraction() {
        assert!(stratified_split(&[1, -1], &SplitSpec::new(1.0, 0)).is_err());
        assert!(stratified_split(&[1, -1], &SplitSpec::new(0.0, 0)).is_err());
    }

    #[test]
    fn report_json_shape() {
        let names: Vec<String> = vec!["a".into(), "b".into()];
        let rows: Vec<Vec<i8>> = (0..40).map(|i| vec![(i % 3) as i8 - 1, ((i / 3) % 3) as i8 - 1]).collect();
        let labels: Vec<i8> = rows.iter().map(|r| if r[0] >= 0 { 1 } else { -1 }).collect();
        let t = FeatureTable::from_rows(names, rows, labels, "toy").unwrap();
        let params = GbtParams {
            n_rounds: 10,
            ..GbtParams::default()
        };
        let r = evaluate(&t, &FeatureSubset::named(["a"]), &SplitSpec::default(), &params).unwrap();
        assert_eq!(r.accuracy, 1.0);
        let v = serde_json::to_value(&r).unwrap();
        for key in ["subset", "split", "params", "accuracy", "per_class_accuracy", "confusion_matrix"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["subset"]["mode"], "named_features");
        assert!(matches!(
            evaluate(&t, &FeatureSubset::named(["zzz"]), &SplitSpec::default(), &params),
            Err(Error::UnknownFeature(_))
        ));
    }
}
