//! End-to-end runs over the dataset partitions: network analysis, classifier
//! evaluation, subsample stability and matrix export.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::community::{louvain, CommunityPartition, DEFAULT_MIN_GAIN};
use crate::correlation::{
    spearman_matrix, to_distance, to_similarity, CorrelationMatrix, CorrelationMode,
    DistanceMatrix, SimilarityMatrix,
};
use crate::dataset::{load_dataset, partition, FeatureTable, Format, PartitionSelector};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate, EvalReport, FeatureSubset, GbtParams, SplitSpec};
use crate::graph::{
    build_graph, degree_distribution, degree_distribution_csv, estimate_gamma, find_hubs,
    maximum_spanning_tree, to_dot, to_graphml, DegreeDistribution, GammaEstimate, GammaMethod,
    HubReport, SimilarityGraph, SpanningTree, DEFAULT_HUB_THRESHOLD,
};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Features used for the hub-feature classifier when none are given.
pub const REFERENCE_HUB_FEATURES: [&str; 5] = [
    "SSLfinal_State",
    "Shortening_Service",
    "URL_Length",
    "URL_of_Anchor",
    "double_slash_redirecting",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSettings {
    pub train_fraction: f64,
    pub seeds: Vec<u64>,
    pub params: GbtParams,
    pub pca_components: usize,
    /// Explicit hub features; derived from the all-rows tree when absent.
    pub hub_features: Option<Vec<String>>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        EvalSettings {
            train_fraction: 0.8,
            seeds: vec![42],
            params: GbtParams::default(),
            pca_components: 5,
            hub_features: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub format: Format,
    pub partitions: Vec<PartitionSelector>,
    pub correlation_mode: CorrelationMode,
    pub gamma_method: GammaMethod,
    pub hub_threshold: usize,
    pub min_gain: f64,
    pub eval: EvalSettings,
    pub out_dir: Option<PathBuf>,
}

impl PipelineConfig {
    pub fn new(input: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            input: input.into(),
            format: Format::Auto,
            partitions: PartitionSelector::ALL.to_vec(),
            correlation_mode: CorrelationMode::TieAware,
            gamma_method: GammaMethod::LoglogOls,
            hub_threshold: DEFAULT_HUB_THRESHOLD,
            min_gain: DEFAULT_MIN_GAIN,
            eval: EvalSettings::default(),
            out_dir: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.partitions.is_empty() {
            return Err(Error::InvalidArgument("no partition selected".into()));
        }
        let unique: BTreeSet<_> = self.partitions.iter().collect();
        if unique.len() != self.partitions.len() {
            return Err(Error::InvalidArgument("partition listed twice".into()));
        }
        Ok(())
    }
}

/// Every intermediate product of the network analysis of one partition.
#[derive(Debug, Clone)]
pub struct PartitionAnalysis {
    pub partition: PartitionSelector,
    pub n_rows: usize,
    pub correlation: CorrelationMatrix,
    pub distance: DistanceMatrix,
    pub similarity: SimilarityMatrix,
    pub graph: SimilarityGraph,
    pub communities: CommunityPartition,
    pub tree: SpanningTree,
    pub hubs: HubReport,
    pub degrees: DegreeDistribution,
    pub gamma: Vec<std::result::Result<GammaEstimate, String>>,
}

/// Correlation -> distance -> similarity -> graph -> Louvain -> tree -> hubs
/// -> gamma, on an already partitioned table.
pub fn analyze_table(
    table: &FeatureTable,
    sel: PartitionSelector,
    cfg: &PipelineConfig,
) -> Result<PartitionAnalysis> {
    let correlation = spearman_matrix(table, cfg.correlation_mode)?;
    let distance = to_distance(&correlation);
    let similarity = to_similarity(&distance);
    let graph = build_graph(&similarity)?;
    let communities = louvain(&graph, cfg.min_gain)?;
    let tree = maximum_spanning_tree(&graph)?;
    let hubs = find_hubs(&tree, &communities, cfg.hub_threshold)?;
    let degrees = degree_distribution(&tree);
    let mut methods = vec![cfg.gamma_method];
    methods.extend(GammaMethod::BOTH.iter().filter(|&&m| m != cfg.gamma_method));
    let gamma = methods
        .into_iter()
        .map(|m| estimate_gamma(&degrees, m).map_err(|e| format!("{m}: {e}")))
        .collect();
    Ok(PartitionAnalysis {
        partition: sel,
        n_rows: table.n_rows(),
        correlation,
        distance,
        similarity,
        graph,
        communities,
        tree,
        hubs,
        degrees,
        gamma,
    })
}

/// Top-degree hubs plus every hub adjacent to one of them in the tree.
pub fn core_hub_features(tree: &SpanningTree, hubs: &HubReport) -> Vec<String> {
    let index = |name: &str| tree.nodes().iter().position(|n| n == name);
    select_core_hubs(hubs, |a, b| match (index(a), index(b)) {
        (Some(i), Some(j)) => tree.neighbors(i).contains(&j),
        _ => false,
    })
}

fn select_core_hubs(hubs: &HubReport, adjacent: impl Fn(&str, &str) -> bool) -> Vec<String> {
    let Some(top) = hubs.entries.first().map(|e| e.degree) else {
        return Vec::new();
    };
    let top_hubs: Vec<&str> = hubs
        .entries
        .iter()
        .filter(|e| e.degree == top)
        .map(|e| e.feature.as_str())
        .collect();
    hubs.entries
        .iter()
        .filter(|e| e.degree == top || top_hubs.iter().any(|t| adjacent(&e.feature, t)))
        .map(|e| e.feature.clone())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeEdge {
    pub a: String,
    pub b: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeStats {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub total_weight: f64,
    pub degree_sum: usize,
    pub max_degree: usize,
    pub unique: bool,
    pub edges: Vec<TreeEdge>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunitySummary {
    pub n_communities: usize,
    pub modularity: f64,
    pub levels: usize,
    pub members: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionEntry {
    pub partition: PartitionSelector,
    pub error: Option<String>,
    pub n_rows: usize,
    pub hubs: Option<HubReport>,
    pub communities: Option<CommunitySummary>,
    pub gamma: Vec<GammaEstimate>,
    pub gamma_errors: Vec<String>,
    pub tree: Option<TreeStats>,
    pub warnings: Vec<String>,
}

impl PartitionEntry {
    fn failed(partition: PartitionSelector, err: &Error) -> Self {
        PartitionEntry {
            partition,
            error: Some(err.to_string()),
            n_rows: 0,
            hubs: None,
            communities: None,
            gamma: Vec::new(),
            gamma_errors: Vec::new(),
            tree: None,
            warnings: Vec::new(),
        }
    }

    fn from_analysis(a: &PartitionAnalysis) -> Self {
        let t = &a.tree;
        let degree_sum = (0..t.nodes().len()).map(|i| t.degree(i)).sum();
        let max_degree = (0..t.nodes().len()).map(|i| t.degree(i)).max().unwrap_or(0);
        let mut edges: Vec<TreeEdge> = t
            .edges()
            .iter()
            .map(|e| TreeEdge {
                a: t.nodes()[e.a].clone(),
                b: t.nodes()[e.b].clone(),
                weight: e.weight,
            })
            .collect();
        edges.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
        let mut warnings: Vec<String> = a
            .correlation
            .warnings
            .iter()
            .map(|w| format!("{}: {}", w.feature, w.reason))
            .collect();
        if !t.is_unique() {
            warnings.push("maximum spanning tree is not unique; ties broken by name".into());
        }
        PartitionEntry {
            partition: a.partition,
            error: None,
            n_rows: a.n_rows,
            hubs: Some(a.hubs.clone()),
            communities: Some(CommunitySummary {
                n_communities: a.communities.n_communities(),
                modularity: a.communities.modularity,
                levels: a.communities.levels,
                members: a.communities.members(),
            }),
            gamma: a.gamma.iter().filter_map(|g| g.as_ref().ok().cloned()).collect(),
            gamma_errors: a.gamma.iter().filter_map(|g| g.as_ref().err().cloned()).collect(),
            tree: Some(TreeStats {
                n_nodes: t.nodes().len(),
                n_edges: t.edges().len(),
                total_weight: t.total_weight(),
                degree_sum,
                max_degree,
                unique: t.is_unique(),
                edges,
            }),
            warnings,
        }
    }

    /// Estimate from the given method, if it succeeded.
    /// Same selection as [`core_hub_features`], from the recorded tree.
    pub fn core_hub_features(&self) -> Vec<String> {
        let (Some(hubs), Some(tree)) = (&self.hubs, &self.tree) else {
            return Vec::new();
        };
        select_core_hubs(hubs, |a, b| {
            tree.edges
                .iter()
                .any(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
        })
    }

    pub fn gamma_for(&self, method: GammaMethod) -> Option<f64> {
        self.gamma.iter().find(|g| g.method == method).map(|g| g.gamma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema_version: u32,
    pub tool_version: String,
    pub config: PipelineConfig,
    pub entries: Vec<PartitionEntry>,
}

impl RunManifest {
    pub fn entry(&self, sel: PartitionSelector) -> Option<&PartitionEntry> {
        self.entries.iter().find(|e| e.partition == sel)
    }

    pub fn failed(&self) -> usize {
        self.entries.iter().filter(|e| e.error.is_some()).count()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn communities_csv(p: &CommunityPartition) -> String {
    let mut out = String::from("feature,community\n");
    for (name, c) in p.nodes.iter().zip(&p.assignment) {
        out.push_str(&format!("{},{c}\n", crate::correlation::csv_field(name)));
    }
    out
}

/// Writes `hubs.csv`, `communities.csv`, `mst.dot`, `mst.graphml` and
/// `degree_dist.csv` into `dir`.
pub fn write_partition_outputs(dir: &Path, a: &PartitionAnalysis) -> Result<()> {
    create_dir(dir)?;
    let name = a.partition.name();
    write_file(&dir.join("hubs.csv"), &a.hubs.to_csv())?;
    write_file(&dir.join("communities.csv"), &communities_csv(&a.communities))?;
    write_file(&dir.join("mst.dot"), &to_dot(name, &a.tree, &a.communities, &a.hubs))?;
    write_file(
        &dir.join("mst.graphml"),
        &to_graphml(name, &a.tree, &a.communities, &a.hubs),
    )?;
    write_file(&dir.join("degree_dist.csv"), &degree_distribution_csv(&a.degrees))?;
    Ok(())
}

/// Analyzes the requested partitions of an in-memory table, concurrently.
pub fn analyze_partitions(
    table: &FeatureTable,
    cfg: &PipelineConfig,
) -> Vec<(PartitionSelector, Result<PartitionAnalysis>)> {
    std::thread::scope(|scope| {
        let handles: Vec<_> = cfg
            .partitions
            .iter()
            .map(|&sel| {
                (
                    sel,
                    scope.spawn(move || {
                        partition(table, sel).and_then(|t| analyze_table(&t, sel, cfg))
                    }),
                )
            })
            .collect();
        handles
            .into_iter()
            .map(|(sel, h)| {
                let r = h
                    .join()
                    .unwrap_or_else(|_| Err(Error::InvalidArgument("analysis thread panicked".into())));
                (sel, r)
            })
            .collect()
    })
}

/// Loads the input, analyzes every requested partition and, when an output
/// directory is configured, writes the per-partition files and
/// `manifest.json`. A failing partition is recorded in the manifest without
/// stopping the others.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let table = load_dataset(&cfg.input, cfg.format)?;
    run_pipeline_on(&table, cfg)
}

pub fn run_pipeline_on(table: &FeatureTable, cfg: &PipelineConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let results = analyze_partitions(table, cfg);
    let mut entries = Vec::with_capacity(results.len());
    for (sel, result) in &results {
        let entry = match result {
            Ok(a) => {
                if let Some(out) = &cfg.out_dir {
                    write_partition_outputs(&out.join(sel.name()), a)?;
                }
                PartitionEntry::from_analysis(a)
            }
            Err(e) => PartitionEntry::failed(*sel, e),
        };
        entries.push(entry);
    }
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        tool_version: TOOL_VERSION.to_string(),
        config: cfg.clone(),
        entries,
    };
    if let Some(out) = &cfg.out_dir {
        create_dir(out)?;
        write_file(&out.join("manifest.json"), &manifest.to_json()?)?;
    }
    Ok(manifest)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std_dev: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        if values.is_empty() {
            return Summary {
                mean: f64::NAN,
                std_dev: f64::NAN,
            };
        }
        let mean = values.iter().sum::<f64>() / n;
        let std_dev = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Summary { mean, std_dev }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalComparison {
    pub hub_features: Vec<String>,
    pub hub_runs: Vec<EvalReport>,
    pub baseline_runs: Vec<EvalReport>,
    pub hub_accuracy: Summary,
    pub baseline_accuracy: Summary,
    /// Mean hub accuracy minus mean baseline accuracy.
    pub delta: f64,
}

/// Trains on `hub_subset` and on `baseline` for every seed and compares the
/// held-out accuracies.
pub fn compare_subsets(
    table: &FeatureTable,
    hub_subset: &FeatureSubset,
    baseline: &FeatureSubset,
    settings: &EvalSettings,
) -> Result<EvalComparison> {
    if settings.seeds.is_empty() {
        return Err(Error::InvalidArgument("no evaluation seeds".into()));
    }
    let run = |subset: &FeatureSubset| -> Result<Vec<EvalReport>> {
        settings
            .seeds
            .iter()
            .map(|&seed| {
                evaluate(
                    table,
                    subset,
                    &SplitSpec::new(settings.train_fraction, seed),
                    &settings.params,
                )
            })
            .collect()
    };
    let (hub_runs, baseline_runs) = std::thread::scope(|s| {
        let h = s.spawn(|| run(hub_subset));
        let b = run(baseline);
        (h.join().unwrap_or_else(|_| Err(Error::InvalidArgument("evaluation thread panicked".into()))), b)
    });
    let (hub_runs, baseline_runs) = (hub_runs?, baseline_runs?);
    let acc = |runs: &[EvalReport]| runs.iter().map(|r| r.accuracy).collect::<Vec<_>>();
    let hub_accuracy = Summary::of(&acc(&hub_runs));
    let baseline_accuracy = Summary::of(&acc(&baseline_runs));
    let hub_features = match hub_subset {
        FeatureSubset::NamedFeatures { names } => names.clone(),
        FeatureSubset::PcaComponents { k } => vec![format!("pca:{k}")],
    };
    Ok(EvalComparison {
        hub_features,
        hub_runs,
        baseline_runs,
        hub_accuracy,
        baseline_accuracy,
        delta: hub_accuracy.mean - baseline_accuracy.mean,
    })
}

/// Hub features from the configuration, or else the top hubs of the
/// all-rows tree and their hub neighbours.
pub fn resolve_hub_features(table: &FeatureTable, cfg: &PipelineConfig) -> Result<Vec<String>> {
    if let Some(names) = &cfg.eval.hub_features {
        return Ok(names.clone());
    }
    let a = analyze_table(table, PartitionSelector::All, cfg)?;
    let features = core_hub_features(&a.tree, &a.hubs);
    if features.is_empty() {
        return Err(Error::InvalidArgument(
            "the all-rows tree has no hubs; pass hub features explicitly".into(),
        ));
    }
    Ok(features)
}

/// Hub-feature classifier against the PCA baseline on the full table.
pub fn run_eval(cfg: &PipelineConfig) -> Result<EvalComparison> {
    let table = load_dataset(&cfg.input, cfg.format)?;
    run_eval_on(&table, cfg)
}

pub fn run_eval_on(table: &FeatureTable, cfg: &PipelineConfig) -> Result<EvalComparison> {
    let features = resolve_hub_features(table, cfg)?;
    compare_subsets(
        table,
        &FeatureSubset::named(features),
        &FeatureSubset::pca(cfg.eval.pca_components),
        &cfg.eval,
    )
}

pub fn jaccard<S: AsRef<str>>(a: &[S], b: &[S]) -> f64 {
    let a: BTreeSet<&str> = a.iter().map(AsRef::as_ref).collect();
    let b: BTreeSet<&str> = b.iter().map(AsRef::as_ref).collect();
    let union = a.union(&b).count();
    if union == 0 {
        1.0
    } else {
        a.intersection(&b).count() as f64 / union as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionStability {
    pub partition: PartitionSelector,
    pub full_hubs: Vec<String>,
    pub subsample_hubs: Vec<Vec<String>>,
    pub jaccard_vs_full: Vec<f64>,
    pub mean_jaccard_vs_full: f64,
    /// Mean over all pairs of subsamples.
    pub mean_pairwise_jaccard: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub n_subsamples: usize,
    pub fraction: f64,
    pub seed: u64,
    pub partitions: Vec<PartitionStability>,
}

/// Reruns the analysis on `n_subsamples` random row subsets of the table
/// (each `fraction` of the rows, drawn without replacement) and compares the
/// hub sets.
pub fn stability_check(
    cfg: &PipelineConfig,
    n_subsamples: usize,
    fraction: f64,
    seed: u64,
) -> Result<StabilityReport> {
    let table = load_dataset(&cfg.input, cfg.format)?;
    stability_check_on(&table, cfg, n_subsamples, fraction, seed)
}

pub fn stability_check_on(
    table: &FeatureTable,
    cfg: &PipelineConfig,
    n_subsamples: usize,
    fraction: f64,
    seed: u64,
) -> Result<StabilityReport> {
    cfg.validate()?;
    if n_subsamples < 2 {
        return Err(Error::InvalidArgument("need at least 2 subsamples".into()));
    }
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "subsample fraction {fraction} must lie in (0, 1]"
        )));
    }
    let n = table.n_rows();
    let size = ((fraction * n as f64).round() as usize).clamp(1, n.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let subsamples: Vec<FeatureTable> = (0..n_subsamples)
        .map(|i| {
            let mut idx = sample(&mut rng, n, size).into_vec();
            idx.sort_unstable();
            table.select_rows(&idx, format!("{}#subsample{i}", table.source()))
        })
        .collect();

    let hub_names = |a: &PartitionAnalysis| -> Vec<String> {
        a.hubs.entries.iter().map(|e| e.feature.clone()).collect()
    };
    let mut partitions = Vec::new();
    for (sel, full) in analyze_partitions(table, cfg) {
        let full_hubs = hub_names(&full?);
        let mut sub_cfg = cfg.clone();
        sub_cfg.partitions = vec![sel];
        let subsample_hubs = std::thread::scope(|s| {
            let handles: Vec<_> = subsamples
                .iter()
                .map(|sub| {
                    let sub_cfg = &sub_cfg;
                    s.spawn(move || {
                        partition(sub, sel)
                            .and_then(|t| analyze_table(&t, sel, sub_cfg))
                            .map(|a| hub_names(&a))
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join().unwrap_or_else(|_| {
                        Err(Error::InvalidArgument("stability thread panicked".into()))
                    })
                })
                .collect::<Result<Vec<_>>>()
        })?;
        let jaccard_vs_full: Vec<f64> =
            subsample_hubs.iter().map(|h| jaccard(h, &full_hubs)).collect();
        let mut pairwise = Vec::new();
        for i in 0..subsample_hubs.len() {
            for j in (i + 1)..subsample_hubs.len() {
                pairwise.push(jaccard(&subsample_hubs[i], &subsample_hubs[j]));
            }
        }
        partitions.push(PartitionStability {
            partition: sel,
            full_hubs,
            mean_jaccard_vs_full: Summary::of(&jaccard_vs_full).mean,
            mean_pairwise_jaccard: Summary::of(&pairwise).mean,
            subsample_hubs,
            jaccard_vs_full,
        });
    }
    Ok(StabilityReport {
        n_subsamples,
        fraction,
        seed,
        partitions,
    })
}

/// Writes `correlation.csv`, `distance.csv` and `similarity.csv` for every
/// requested partition under `out_dir/<partition>/`.
pub fn export_matrices(table: &FeatureTable, cfg: &PipelineConfig, out_dir: &Path) -> Result<()> {
    cfg.validate()?;
    for &sel in &cfg.partitions {
        let part = partition(table, sel)?;
        let corr = spearman_matrix(&part, cfg.correlation_mode)?;
        let dist = to_distance(&corr);
        let sim = to_similarity(&dist);
        let dir = out_dir.join(sel.name());
        create_dir(&dir)?;
        for (file, m) in [
            ("correlation.csv", &corr.matrix),
            ("distance.csv", &dist.0),
            ("similarity.csv", &sim.0),
        ] {
            let mut buf = Vec::new();
            m.write_csv(&mut buf).map_err(|e| Error::io(dir.join(file), e))?;
            fs::write(dir.join(file), buf).map_err(|e| Error::io(dir.join(file), e))?;
        }
    }
    Ok(())
}
