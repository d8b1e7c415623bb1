//! End-to-end CLI checks through the real binary.

use std::fs;
use std::path::Path;
use std::process::Command;

fn linkloop() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linkloop"))
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Ring-with-chords graph where every node has five successors, so every
/// sampled user sees at least three distance-2 candidates.
fn write_dense_fixture(dir: &Path, n: u32) -> (std::path::PathBuf, std::path::PathBuf) {
    let mut edges = String::new();
    let mut labels = String::new();
    for u in 0..n {
        for j in 1..=5 {
            edges.push_str(&format!("{u}\t{}\n", (u + j) % n));
        }
        labels.push_str(
            &format!("{u}\t{}\n", u % 3 == 0)
                .replace("true", "1")
                .replace("false", "0"),
        );
    }
    let edges_path = dir.join("dense.edges");
    let labels_path = dir.join("dense.labels");
    fs::write(&edges_path, edges).unwrap();
    fs::write(&labels_path, labels).unwrap();
    (edges_path, labels_path)
}

#[test]
fn generate_writes_deterministic_files_with_achieved_stats() {
    let base = tempfile::tempdir().unwrap();
    let dirs = [base.path().join("a"), base.path().join("b")];
    for dir in &dirs {
        let status = linkloop()
            .args([
                "generate", "--preset", "G1", "--n", "2000", "--seed", "7", "--out",
            ])
            .arg(dir)
            .status()
            .unwrap();
        assert!(status.success());
    }
    for file in ["g1_seed7.edges", "g1_seed7.labels", "g1_seed7.json"] {
        let a = fs::read(dirs[0].join(file)).unwrap();
        let b = fs::read(dirs[1].join(file)).unwrap();
        assert_eq!(a, b, "{file} not deterministic");
    }
    let sidecar: serde_json::Value =
        serde_json::from_str(&read(&dirs[0].join("g1_seed7.json"))).unwrap();
    let h_m = sidecar["achieved"]["h_m"].as_f64().unwrap();
    assert!((0.38..=0.42).contains(&h_m), "G1 h_m = {h_m}");
    assert_eq!(sidecar["achieved"]["s_m"].as_f64().unwrap(), 0.1);
}

#[test]
fn generate_g3_hits_heterophilic_target() {
    let dir = tempfile::tempdir().unwrap();
    let status = linkloop()
        .args([
            "generate", "--preset", "G3", "--n", "2000", "--seed", "2", "--out",
        ])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let sidecar: serde_json::Value =
        serde_json::from_str(&read(&dir.path().join("g3_seed2.json"))).unwrap();
    let h_m = sidecar["achieved"]["h_m"].as_f64().unwrap();
    assert!((-0.27..=-0.23).contains(&h_m), "G3 h_m = {h_m}");
}

#[test]
fn simulate_full_sample_issues_three_slots_per_user() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, labels) = write_dense_fixture(dir.path(), 40);
    let out = dir.path().join("run");
    let status = linkloop()
        .args([
            "simulate",
            "--T",
            "1",
            "--alpha",
            "1.0",
            "--k",
            "3",
            "--recommender",
            "ada",
            "--seed",
            "5",
            "--edges",
        ])
        .arg(&edges)
        .arg("--labels")
        .arg(&labels)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let table = linkloop::io::read_csv_table(&out.join("metrics_seed5.csv")).unwrap();
    assert_eq!(table.rows.len(), 1);
    assert_eq!(table.column("recs_issued").unwrap()[0], Some(120.0));
}

#[test]
fn simulate_rec_log_reconciles_with_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, labels) = write_dense_fixture(dir.path(), 60);
    let out = dir.path().join("run");
    let status = linkloop()
        .args([
            "simulate",
            "--T",
            "3",
            "--seed",
            "9",
            "--emit-recs",
            "--edges",
        ])
        .arg(&edges)
        .arg("--labels")
        .arg(&labels)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let entries = linkloop::io::read_rec_log(&out.join("recs_seed9.jsonl")).unwrap();
    let table = linkloop::io::read_csv_table(&out.join("metrics_seed9.csv")).unwrap();
    let recs = table.column("recs_issued").unwrap();
    for (row, expected) in recs.iter().enumerate() {
        let t = row + 1;
        let slots: usize = entries
            .iter()
            .filter(|e| e.t == t)
            .map(|e| e.targets.len())
            .sum();
        assert_eq!(slots as f64, expected.unwrap(), "iteration {t}");
    }
}

#[test]
fn simulate_snapshots_written_at_requested_iterations() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, labels) = write_dense_fixture(dir.path(), 40);
    let out = dir.path().join("run");
    let status = linkloop()
        .args([
            "simulate",
            "--T",
            "4",
            "--seed",
            "2",
            "--snapshot-at",
            "2,4",
            "--edges",
        ])
        .arg(&edges)
        .arg("--labels")
        .arg(&labels)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    for t in [2, 4] {
        let snap = out.join(format!("snapshot_seed2_t{t}.edges"));
        let loaded =
            linkloop::io::load_graph(&snap, &out.join(format!("snapshot_seed2_t{t}.labels")))
                .unwrap();
        assert!(loaded.graph.edge_count() >= 200);
    }
}

#[test]
fn config_file_applies_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, labels) = write_dense_fixture(dir.path(), 40);
    let conf = dir.path().join("exp.conf");
    fs::write(
        &conf,
        format!(
            "T=2\nalpha=0.5\nseed=4\nedges={}\nlabels={}\n",
            edges.display(),
            labels.display()
        ),
    )
    .unwrap();
    let out = dir.path().join("run");
    let status = linkloop()
        .args(["simulate", "--config"])
        .arg(&conf)
        .args(["--T", "3", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let table = linkloop::io::read_csv_table(&out.join("metrics_seed4.csv")).unwrap();
    assert_eq!(table.rows.len(), 3, "--T must override the config file");
}

#[test]
fn sweep_writes_cells_and_summary_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid");
    let status = linkloop()
        .args([
            "sweep",
            "--emm",
            "0.3,0.6",
            "--sm",
            "0.3",
            "--recommenders",
            "rnd",
            "--behaviors",
            "lzy",
            "--n",
            "150",
            "--T",
            "2",
            "--seeds",
            "1,2",
            "--out",
        ])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary = read(&out.join("summary.csv"));
    assert_eq!(summary.lines().count(), 2 + 2, "schema + header + 2 cells");
    for cell in [
        "emm0.3_sm0.3_rnd_lzy_a0.2_k3",
        "emm0.6_sm0.3_rnd_lzy_a0.2_k3",
    ] {
        assert!(out.join("cells").join(cell).join("combined.csv").exists());
        assert!(out
            .join("cells")
            .join(cell)
            .join("metrics_seed1.csv")
            .exists());
    }
}

#[test]
fn report_derives_ratio_gini_and_percentile_tables() {
    let dir = tempfile::tempdir().unwrap();
    let (edges, labels) = write_dense_fixture(dir.path(), 60);
    let out = dir.path().join("run");
    let status = linkloop()
        .args(["simulate", "--T", "5", "--seeds", "1,2", "--edges"])
        .arg(&edges)
        .arg("--labels")
        .arg(&labels)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());

    let tables = dir.path().join("tables");
    let status = linkloop()
        .arg("report")
        .arg(out.join("metrics_seed1.csv"))
        .arg(out.join("metrics_seed2.csv"))
        .arg("--out")
        .arg(&tables)
        .status()
        .unwrap();
    assert!(status.success());

    let ratio = linkloop::io::read_csv_table(&tables.join("ratio.csv")).unwrap();
    assert_eq!(ratio.rows.len(), 4, "T-1 ratio rows");
    let means = ratio.column("ratio_mean").unwrap();
    let lows = ratio.column("ratio_min").unwrap();
    let highs = ratio.column("ratio_max").unwrap();
    for i in 0..4 {
        assert!(lows[i].unwrap() <= means[i].unwrap());
        assert!(means[i].unwrap() <= highs[i].unwrap());
    }
    let gini = linkloop::io::read_csv_table(&tables.join("gini.csv")).unwrap();
    assert_eq!(gini.rows.len(), 5);
    assert!(tables.join("percentile.csv").exists());
}

#[test]
fn report_constant_exposure_gives_unit_ratios() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("flat.csv");
    let mut text = String::from("# schema=linkloop-metrics-v1\n");
    text.push_str(
        "t,recs_issued,e_min,e_maj,edges_added,growth_pct,gini_min,gini_maj,h_m,h_M,e_mm\n",
    );
    for t in 1..=4 {
        text.push_str(&format!("{t},100,0.25,0.75,10,1,0.5,0.5,0.2,0,0.5\n"));
    }
    fs::write(&csv, text).unwrap();
    let tables = dir.path().join("tables");
    let status = linkloop()
        .arg("report")
        .arg(&csv)
        .arg("--out")
        .arg(&tables)
        .status()
        .unwrap();
    assert!(status.success());
    let ratio = linkloop::io::read_csv_table(&tables.join("ratio.csv")).unwrap();
    for row in &ratio.rows {
        assert_eq!(row[1], Some(1.0));
    }
}

#[test]
fn exit_codes_for_usage_and_runtime_errors() {
    // unknown recommender value: usage error, code 1
    let out = linkloop()
        .args(["simulate", "--preset", "G1", "--recommender", "bogus"])
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // missing input file: runtime error, code 2
    let dir = tempfile::tempdir().unwrap();
    let out = linkloop()
        .args([
            "simulate",
            "--edges",
            "/nonexistent.edges",
            "--labels",
            "/nonexistent.labels",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    // no subcommand: usage error
    let out = linkloop().output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    // --help succeeds
    let out = linkloop().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("generate"));
}
