use std::io::Write;

use egolink::harness::{read_results_csv, run_experiment, summarize, write_results_csv, ExperimentSpec};
use egolink::Error;

const SYNTH: &str = r#"
base_seed = 3
replications = 2
methods = ["se", "cur", "usvt", "mc", "ns"]
workers = 2

[model]
family = "distance"
n_nodes = 80
degrees = [15.0]

[sampling]
rho = [0.25]

[se]
rank = "auto"
cv_rank_grid = [1, 2, 3, 4]
"#;

fn csv_bytes(spec: &ExperimentSpec) -> Vec<u8> {
    let mut out = Vec::new();
    write_results_csv(&run_experiment(spec).unwrap(), &mut out).unwrap();
    out
}

#[test]
fn toml_spec_runs_end_to_end() {
    let spec = ExperimentSpec::from_toml(SYNTH, None).unwrap();
    let bytes = csv_bytes(&spec);
    let rows = read_results_csv(bytes.as_slice()).unwrap();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| r.auc.is_some() && r.kendall_tau.is_some()));
    assert!(rows.iter().filter(|r| r.method == "se").all(|r| (1..=4).contains(&r.selected_rank.unwrap())));

    let summary = summarize(&rows);
    assert_eq!(summary.len(), 5);
    assert!(summary.iter().all(|s| s.auc_count == 2 && s.auc_se.is_some()));
}

#[test]
fn identical_specs_give_identical_bytes() {
    let spec = ExperimentSpec::from_toml(SYNTH, None).unwrap();
    let mut serial = spec.clone();
    serial.workers = Some(1);
    let first = csv_bytes(&spec);
    assert_eq!(first, csv_bytes(&spec));
    assert_eq!(first, csv_bytes(&serial));
}

#[test]
fn dataset_spec_reports_auc_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut f = std::fs::File::create(dir.path().join("ring.txt")).unwrap();
    writeln!(f, "% ring with chords").unwrap();
    for i in 0..40 {
        writeln!(f, "n{i} n{}", (i + 1) % 40).unwrap();
        writeln!(f, "n{i} n{}", (i + 7) % 40).unwrap();
    }
    drop(f);
    let text = r#"
methods = ["se", "cur"]
replications = 2
[dataset]
path = "ring.txt"
name = "ring"
[sampling]
rho = [0.3]
[se]
rank = 3
"#;
    let spec = ExperimentSpec::from_toml(text, Some(dir.path())).unwrap();
    let rows = run_experiment(&spec).unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| r.model == "ring" && r.degree.is_none()));
    assert!(rows.iter().all(|r| r.auc.is_some() && r.kendall_tau.is_none()));
}

#[test]
fn malformed_dataset_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.txt"), "a b\nb c\nlonely\n").unwrap();
    let text = "methods = [\"se\"]\n[dataset]\npath = \"bad.txt\"\n[sampling]\nrho = [0.5]\n";
    let spec = ExperimentSpec::from_toml(text, Some(dir.path())).unwrap();
    match run_experiment(&spec) {
        Err(Error::Ingestion { line, .. }) => assert_eq!(line, 3),
        other => panic!("expected an ingestion error, got {other:?}"),
    }
}

#[test]
fn iid_regime_rejects_egocentric_only_methods() {
    let text = SYNTH.replace("[sampling]\n", "[sampling]\nregime = \"iid\"\n");
    assert!(matches!(ExperimentSpec::from_toml(&text, None), Err(Error::Spec(_))));
}
