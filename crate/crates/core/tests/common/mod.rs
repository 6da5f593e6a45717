#![allow(dead_code)]

use std::path::PathBuf;
use std::time::Duration;

use featnet::dataset::{load_dataset, FeatureTable, Format};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Column names of the UCI phishing websites file, label excluded.
pub const UCI_FEATURES: [&str; 30] = [
    "having_IP_Address",
    "URL_Length",
    "Shortening_Service",
    "having_At_Symbol",
    "double_slash_redirecting",
    "Prefix_Suffix",
    "having_Sub_Domain",
    "SSLfinal_State",
    "Domain_registeration_length",
    "Favicon",
    "port",
    "HTTPS_token",
    "Request_URL",
    "URL_of_Anchor",
    "Links_in_tags",
    "SFH",
    "Submitting_to_email",
    "Abnormal_URL",
    "Redirect",
    "on_mouseover",
    "RightClick",
    "popUpWidnow",
    "Iframe",
    "age_of_domain",
    "DNSRecord",
    "web_traffic",
    "Page_Rank",
    "Google_Index",
    "Links_pointing_to_page",
    "Statistical_report",
];

/// Synthetic stand-in with the reference file's shape: 30 categorical
/// features driven by a handful of shared latent factors plus the label.
pub fn synthetic_table(n_rows: usize, seed: u64) -> FeatureTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = UCI_FEATURES.len();
    // factor, loading, label effect, ternary
    let spec: Vec<(usize, f64, f64, bool)> = (0..k)
        .map(|j| {
            let factor = j % 5;
            let loading = 0.4 + 0.6 * rng.gen::<f64>();
            let label_effect = if j % 4 == 1 { 1.2 * rng.gen::<f64>() } else { 0.2 * rng.gen::<f64>() };
            (factor, loading, label_effect, j % 3 == 0)
        })
        .collect();
    let mut rows = Vec::with_capacity(n_rows);
    let mut labels = Vec::with_capacity(n_rows);
    for _ in 0..n_rows {
        let label: i8 = if rng.gen::<f64>() < 0.557 { 1 } else { -1 };
        let factors: Vec<f64> = (0..5).map(|_| gauss(&mut rng)).collect();
        let row = spec
            .iter()
            .map(|&(f, loading, effect, ternary)| {
                let z = loading * factors[f] + effect * label as f64 + gauss(&mut rng);
                if ternary {
                    if z > 0.5 {
                        1
                    } else if z < -0.5 {
                        -1
                    } else {
                        0
                    }
                } else if z > 0.0 {
                    1
                } else {
                    -1
                }
            })
            .collect();
        rows.push(row);
        labels.push(label);
    }
    FeatureTable::from_rows(
        UCI_FEATURES.iter().map(|s| s.to_string()).collect(),
        rows,
        labels,
        format!("synthetic:{seed}"),
    )
    .unwrap()
}

fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Location of the reference phishing dataset, if one is available:
/// `FEATNET_PHISHING_DATA`, else `data/phishing.{arff,csv}` at the workspace
/// root.
pub fn reference_dataset_path() -> Option<PathBuf> {
    if let Ok(p) = std::env::var("FEATNET_PHISHING_DATA") {
        let p = PathBuf::from(p);
        return p.exists().then_some(p);
    }
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..");
    ["data/phishing.arff", "data/phishing.csv", "data/Training Dataset.arff"]
        .iter()
        .map(|f| root.join(f))
        .find(|p| p.exists())
}

pub fn reference_table() -> Option<FeatureTable> {
    reference_dataset_path().map(|p| load_dataset(&p, Format::Auto).expect("reference dataset loads"))
}

pub fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let start = std::time::Instant::now();
    let out = f();
    (out, start.elapsed())
}

pub mod oracles;
