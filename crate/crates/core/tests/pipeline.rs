mod common;

use std::fs;
use std::path::Path;

use common::synthetic_table;
use featnet::community::CommunityPartition;
use featnet::dataset::{FeatureTable, PartitionSelector};
use featnet::evaluation::{FeatureSubset, GbtParams};
use featnet::graph::GammaMethod;
use featnet::pipeline::*;
use featnet::Error;

fn small_config(out: Option<&Path>) -> PipelineConfig {
    let mut cfg = PipelineConfig::new("unused.csv");
    cfg.out_dir = out.map(Path::to_path_buf);
    cfg.eval.params = GbtParams {
        n_rounds: 30,
        ..GbtParams::default()
    };
    cfg
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().to_string_lossy().into_owned();
                files.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}

#[test]
fn end_to_end_writes_every_output() {
    let table = synthetic_table(600, 3);
    let dir = tempfile::tempdir().unwrap();
    let m = run_pipeline_on(&table, &small_config(Some(dir.path()))).unwrap();
    assert_eq!(m.entries.len(), 3);
    assert_eq!(m.failed(), 0);
    assert_eq!(m.schema_version, SCHEMA_VERSION);
    for sel in PartitionSelector::ALL {
        let sub = dir.path().join(sel.name());
        for f in ["hubs.csv", "communities.csv", "mst.dot", "mst.graphml", "degree_dist.csv"] {
            assert!(sub.join(f).is_file(), "{}/{f}", sel.name());
        }
        let e = m.entry(sel).unwrap();
        let tree = e.tree.as_ref().unwrap();
        assert_eq!(tree.n_edges, tree.n_nodes - 1);
        assert_eq!(tree.degree_sum, 2 * tree.n_edges);
        assert!(e.gamma_for(GammaMethod::LoglogOls).is_some());
    }
    assert!(dir.path().join("manifest.json").is_file());
}

#[test]
fn hub_rows_respect_threshold_and_match_communities() {
    let table = synthetic_table(500, 8);
    let dir = tempfile::tempdir().unwrap();
    run_pipeline_on(&table, &small_config(Some(dir.path()))).unwrap();
    for sel in PartitionSelector::ALL {
        let sub = dir.path().join(sel.name());
        let communities: Vec<(String, String)> = fs::read_to_string(sub.join("communities.csv"))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let (a, b) = l.split_once(',').unwrap();
                (a.to_string(), b.to_string())
            })
            .collect();
        for line in fs::read_to_string(sub.join("hubs.csv")).unwrap().lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            assert!(cols[1].parse::<usize>().unwrap() > 2, "{line}");
            let expected = communities.iter().find(|(f, _)| f == cols[0]).unwrap();
            assert_eq!(expected.1, cols[2]);
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let table = synthetic_table(400, 21);
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(Some(dir.path()));
    run_pipeline_on(&table, &cfg).unwrap();
    let fa = read_tree(dir.path());
    fs::remove_dir_all(dir.path()).unwrap();
    run_pipeline_on(&table, &cfg).unwrap();
    let fb = read_tree(dir.path());
    assert_eq!(fa.len(), 16);
    assert_eq!(fa, fb);
}

#[test]
fn manifest_round_trips() {
    let table = synthetic_table(300, 5);
    let m = run_pipeline_on(&table, &small_config(None)).unwrap();
    let json = m.to_json().unwrap();
    let back = RunManifest::from_json(&json).unwrap();
    assert_eq!(back, m);
    assert_eq!(back.to_json().unwrap(), json);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn single_partition_gives_single_entry() {
    let table = synthetic_table(300, 6);
    let mut cfg = small_config(None);
    cfg.partitions = vec![PartitionSelector::Legitimate];
    let m = run_pipeline_on(&table, &cfg).unwrap();
    assert_eq!(m.entries.len(), 1);
    assert_eq!(m.entries[0].partition, PartitionSelector::Legitimate);
}

#[test]
fn two_feature_dataset() {
    let rows: Vec<Vec<i8>> = (0..20).map(|i| vec![(i % 3) as i8 - 1, (i % 2) as i8 * 2 - 1]).collect();
    let labels: Vec<i8> = (0..20).map(|i| if i < 10 { 1 } else { -1 }).collect();
    let t = FeatureTable::from_rows(vec!["a".into(), "b".into()], rows, labels, "two").unwrap();
    let mut cfg = small_config(None);
    cfg.partitions = vec![PartitionSelector::All];
    let m = run_pipeline_on(&t, &cfg).unwrap();
    let e = &m.entries[0];
    assert!(e.error.is_none());
    assert_eq!(e.tree.as_ref().unwrap().n_edges, 1);
    assert!(e.hubs.as_ref().unwrap().entries.is_empty());
    assert!(e.gamma.is_empty());
    assert_eq!(e.gamma_errors.len(), GammaMethod::BOTH.len());
    assert!(e.gamma_errors.iter().all(|s| s.contains("distinct")), "{:?}", e.gamma_errors);
}

#[test]
fn missing_class_fails_only_that_partition() {
    let rows: Vec<Vec<i8>> = (0..30).map(|i| vec![(i % 3) as i8 - 1, ((i / 3) % 2) as i8, (i % 2) as i8]).collect();
    let t = FeatureTable::from_rows(
        vec!["a".into(), "b".into(), "c".into()],
        rows,
        vec![1; 30],
        "one-class",
    )
    .unwrap();
    let m = run_pipeline_on(&t, &small_config(None)).unwrap();
    assert_eq!(m.failed(), 1);
    assert!(m.entry(PartitionSelector::Phishing).unwrap().error.is_some());
    assert!(m.entry(PartitionSelector::Legitimate).unwrap().error.is_none());
}

#[test]
fn duplicate_partition_rejected() {
    let mut cfg = small_config(None);
    cfg.partitions = vec![PartitionSelector::All, PartitionSelector::All];
    assert!(matches!(
        run_pipeline_on(&synthetic_table(50, 1), &cfg),
        Err(Error::InvalidArgument(_))
    ));
}

#[test]
fn stability_full_fraction_is_perfect() {
    let table = synthetic_table(300, 4);
    let r = stability_check_on(&table, &small_config(None), 3, 1.0, 9).unwrap();
    assert_eq!(r.partitions.len(), 3);
    for p in &r.partitions {
        assert!(p.jaccard_vs_full.iter().all(|&j| j == 1.0));
        assert_eq!(p.mean_pairwise_jaccard, 1.0);
    }
}

#[test]
fn stability_smoke_on_tiny_data() {
    let table = synthetic_table(40, 2);
    let r = stability_check_on(&table, &small_config(None), 2, 0.8, 1).unwrap();
    assert_eq!(r.n_subsamples, 2);
    for p in &r.partitions {
        assert_eq!(p.subsample_hubs.len(), 2);
        assert!(p.jaccard_vs_full.iter().all(|j| (0.0..=1.0).contains(j)));
    }
    assert!(stability_check_on(&table, &small_config(None), 1, 0.8, 1).is_err());
    assert!(stability_check_on(&table, &small_config(None), 2, 0.0, 1).is_err());
}

#[test]
fn identical_subsets_give_zero_delta() {
    let table = synthetic_table(300, 12);
    let mut settings = small_config(None).eval;
    settings.seeds = vec![1, 2, 3];
    let s = FeatureSubset::named(["SSLfinal_State", "URL_Length", "Prefix_Suffix"]);
    let c = compare_subsets(&table, &s, &s, &settings).unwrap();
    assert_eq!(c.delta, 0.0);
    assert_eq!(c.hub_accuracy, c.baseline_accuracy);
    assert_eq!(c.hub_runs.len(), 3);
    assert!(c.hub_accuracy.std_dev >= 0.0);
}

#[test]
fn eval_derives_hub_features_when_not_given() {
    let table = synthetic_table(400, 13);
    let cfg = small_config(None);
    let c = run_eval_on(&table, &cfg).unwrap();
    assert!(!c.hub_features.is_empty());
    assert!(c.hub_features.iter().all(|f| table.feature_index(f).is_some()));
    assert!((0.0..=1.0).contains(&c.hub_accuracy.mean));
    assert!((0.0..=1.0).contains(&c.baseline_accuracy.mean));
}

#[test]
fn export_writes_matrices() {
    let table = synthetic_table(200, 14);
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(None);
    cfg.partitions = vec![PartitionSelector::All];
    export_matrices(&table, &cfg, dir.path()).unwrap();
    let corr = fs::read_to_string(dir.path().join("all/correlation.csv")).unwrap();
    assert_eq!(corr.lines().count(), 31);
    assert!(dir.path().join("all/similarity.csv").is_file());
}

#[test]
fn core_hubs_are_hubs() {
    let table = synthetic_table(500, 15);
    let a = analyze_table(&table, PartitionSelector::All, &small_config(None)).unwrap();
    let core = core_hub_features(&a.tree, &a.hubs);
    assert!(core.iter().all(|f| a.hubs.is_hub(f)));
    let _: &CommunityPartition = &a.communities;
}

#[test]
fn manifest_hub_selection_matches_tree() {
    let table = synthetic_table(700, 16);
    let cfg = small_config(None);
    let a = analyze_table(&table, PartitionSelector::All, &cfg).unwrap();
    let m = run_pipeline_on(&table, &cfg).unwrap();
    let from_manifest = m.entry(PartitionSelector::All).unwrap().core_hub_features();
    assert_eq!(from_manifest, core_hub_features(&a.tree, &a.hubs));
    assert!(!from_manifest.is_empty());
}
