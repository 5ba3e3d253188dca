//! Binary-level tests: exit codes, emitted files, report determinism.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn impactnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_impactnorm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn synth_into(dir: &Path, seed: &str) {
    let out = impactnorm(&["synth", "--seed", seed, "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "synth failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn ingest_into(data: &Path, out_dir: &Path) {
    let out = impactnorm(&[
        "ingest",
        data.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "ingest failed: {}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_same_seed_same_files() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    synth_into(&a, "7");
    synth_into(&b, "7");
    for name in [
        "publications.csv",
        "links.csv",
        "mentions.csv",
        "units.csv",
        "config.txt",
        "ground_truth.json",
    ] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs between identical seeds"
        );
    }
}

#[test]
fn ingest_writes_archive_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let out = dir.path().join("ingested");
    synth_into(&data, "11");
    ingest_into(&data, &out);
    assert!(out.join("dataset.json").exists());
    assert!(out.join("ingest_report.json").exists());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn ingest_missing_file_exits_2_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = impactnorm(&[
        "ingest",
        dir.path().to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("config.txt"), "stderr: {stderr}");
}

#[test]
fn ingest_dangling_reference_exits_2_with_id() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    synth_into(&data, "13");
    let links = data.join("links.csv");
    let mut body = fs::read_to_string(&links).unwrap();
    body.push_str("ghost-paper,U0000,output\n");
    fs::write(&links, body).unwrap();
    let out = impactnorm(&[
        "ingest",
        data.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("ghost-paper"), "stderr: {stderr}");
}

#[test]
fn mhq_three_group_report_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let ingested = dir.path().join("ingested");
    synth_into(&data, "17");
    ingest_into(&data, &ingested);
    let archive = ingested.join("dataset.json");

    let run = |out_dir: &Path| {
        let out = impactnorm(&[
            "mhq",
            "--archive",
            archive.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ]);
        let rc = code(&out);
        assert!(rc == 0 || rc == 1, "unexpected exit {rc}");
    };
    let first = dir.path().join("mhq1");
    let second = dir.path().join("mhq2");
    run(&first);
    run(&second);

    let tsv = fs::read_to_string(first.join("mhq_report.tsv")).unwrap();
    let lines: Vec<&str> = tsv.lines().collect();
    // header + 3 groups × 7 metrics
    assert_eq!(lines.len(), 1 + 21, "unexpected row count:\n{tsv}");
    assert_eq!(
        lines[0],
        "group\tmetric\tmhq\tci_low\tci_high\tn_group\tstrata_used\tstrata_skipped\tstatus"
    );
    // reports are re-derivable byte for byte; only the manifest timestamp
    // may differ, and it lives in its own file
    assert_eq!(
        fs::read(first.join("mhq_report.tsv")).unwrap(),
        fs::read(second.join("mhq_report.tsv")).unwrap()
    );
    assert_eq!(
        fs::read(first.join("mhq_report.json")).unwrap(),
        fs::read(second.join("mhq_report.json")).unwrap()
    );
}

#[test]
fn mhq_metric_subset_and_per_unit_mode() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let ingested = dir.path().join("ingested");
    synth_into(&data, "19");
    ingest_into(&data, &ingested);
    let archive = ingested.join("dataset.json");

    let out_dir = dir.path().join("subset");
    let out = impactnorm(&[
        "mhq",
        "--archive",
        archive.to_str().unwrap(),
        "--metrics",
        "citations,policy",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(code(&out) <= 1);
    let tsv = fs::read_to_string(out_dir.join("mhq_report.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 1 + 6); // 2 metrics × 3 groups

    let per_unit = dir.path().join("per_unit");
    let out = impactnorm(&[
        "mhq",
        "--archive",
        archive.to_str().unwrap(),
        "--mode",
        "per-unit",
        "--role",
        "output",
        "--metrics",
        "citations",
        "--out",
        per_unit.to_str().unwrap(),
    ]);
    assert!(code(&out) <= 1);
    let tsv = fs::read_to_string(per_unit.join("mhq_report.tsv")).unwrap();
    // default synth config has 20 units, every unit has output papers
    assert_eq!(tsv.lines().count(), 1 + 20);
}

#[test]
fn mhq_degenerate_rows_flip_exit_to_partial() {
    // A metric nobody mentions makes its rows degenerate: exit 1, empty
    // numeric cells, explaining status.
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    fs::create_dir_all(&data).unwrap();
    fs::write(
        data.join("publications.csv"),
        "paper_id,doi,pub_year,subject_codes\n\
         p1,10.1/a,2010,1100\np2,10.1/b,2010,1100\n\
         p3,10.1/c,2010,1100\np4,10.1/d,2010,1100\n",
    )
    .unwrap();
    fs::write(
        data.join("links.csv"),
        "paper_id,unit_id,role\np1,u1,case_ref\np2,u1,output\np3,u1,output\np4,u1,output\n",
    )
    .unwrap();
    fs::write(
        data.join("mentions.csv"),
        "paper_id,source,count\np1,citations,2\np3,citations,1\n",
    )
    .unwrap();
    fs::write(
        data.join("units.csv"),
        "unit_id,dimension,pct4,pct3,pct2,pct1,pct0\nu1,output,100,0,0,0,0\n",
    )
    .unwrap();
    fs::write(data.join("config.txt"), "year_min = 2008\nyear_max = 2014\n").unwrap();

    let ingested = dir.path().join("ingested");
    ingest_into(&data, &ingested);
    let out_dir = dir.path().join("mhq");
    let out = impactnorm(&[
        "mhq",
        "--archive",
        ingested.join("dataset.json").to_str().unwrap(),
        "--metrics",
        "citations,twitter",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let tsv = fs::read_to_string(out_dir.join("mhq_report.tsv")).unwrap();
    let degenerate: Vec<&str> = tsv
        .lines()
        .filter(|l| l.contains("degenerate-denominator"))
        .collect();
    assert!(!degenerate.is_empty(), "no degenerate rows:\n{tsv}");
    for line in degenerate {
        let cells: Vec<&str> = line.split('\t').collect();
        assert_eq!(cells[2], "", "mhq cell not empty: {line}");
        assert_eq!(cells[3], "", "ci_low cell not empty: {line}");
        assert_eq!(cells[4], "", "ci_high cell not empty: {line}");
    }
}

#[test]
fn correlate_emits_full_grid() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let ingested = dir.path().join("ingested");
    synth_into(&data, "23");
    ingest_into(&data, &ingested);
    let out_dir = dir.path().join("corr");
    let out = impactnorm(&[
        "correlate",
        "--archive",
        ingested.join("dataset.json").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(code(&out) <= 1);
    let tsv = fs::read_to_string(out_dir.join("corr_report.tsv")).unwrap();
    assert_eq!(tsv.lines().count(), 1 + 14, "grid:\n{tsv}"); // 7 metrics × 2 dimensions
    assert_eq!(
        tsv.lines().next().unwrap(),
        "metric\tdimension\tn_units\tr_s\tci_low\tci_high\tstatus"
    );
}

#[test]
fn meta_identities_at_the_cli_surface() {
    let dir = tempfile::tempdir().unwrap();
    let single = dir.path().join("single.csv");
    fs::write(&single, "study_id,r,n\ns1,0.5,30\n").unwrap();
    let out_dir = dir.path().join("meta1");
    let out = impactnorm(&[
        "meta",
        single.to_str().unwrap(),
        "--mode",
        "direct",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let tsv = fs::read_to_string(out_dir.join("meta_report.tsv")).unwrap();
    let row: Vec<&str> = tsv.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(row[0], "direct");
    assert_eq!(row[1], "1");
    assert_eq!(row[2], "0.500000");

    // duplicated row: same pooled value, narrower interval
    let double = dir.path().join("double.csv");
    fs::write(&double, "study_id,r,n\ns1,0.5,30\ns2,0.5,30\n").unwrap();
    let out_dir2 = dir.path().join("meta2");
    let out = impactnorm(&[
        "meta",
        double.to_str().unwrap(),
        "--mode",
        "direct",
        "--out",
        out_dir2.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let tsv2 = fs::read_to_string(out_dir2.join("meta_report.tsv")).unwrap();
    let row2: Vec<&str> = tsv2.lines().nth(1).unwrap().split('\t').collect();
    assert_eq!(row2[2], "0.500000");
    let width = |r: &[&str]| r[4].parse::<f64>().unwrap() - r[3].parse::<f64>().unwrap();
    assert!(width(&row2) < width(&row));
}

#[test]
fn meta_empty_input_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "study_id,r,n\n").unwrap();
    let out = impactnorm(&[
        "meta",
        empty.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
}

#[test]
fn three_group_blocks_are_sorted_by_group_difference() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let ingested = dir.path().join("ingested");
    synth_into(&data, "31");
    ingest_into(&data, &ingested);
    let out_dir = dir.path().join("mhq");
    let out = impactnorm(&[
        "mhq",
        "--archive",
        ingested.join("dataset.json").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(code(&out) <= 1);

    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("mhq_report.json")).unwrap())
            .unwrap();
    let rows = sidecar["rows"].as_array().unwrap();
    // Walk metric blocks in file order and recover each block's
    // case-study minus output difference.
    let mut diffs: Vec<(String, Option<f64>)> = Vec::new();
    for row in rows {
        let metric = row["metric"].as_str().unwrap().to_string();
        if diffs.last().map(|(m, _)| m.as_str()) != Some(metric.as_str()) {
            diffs.push((metric.clone(), None));
        }
        let value = row["mhq"].as_f64();
        let slot = &mut diffs.last_mut().unwrap().1;
        match row["group"].as_str().unwrap() {
            "PCS" => *slot = value,
            "PRO" => {
                *slot = match (*slot, value) {
                    (Some(pcs), Some(pro)) => Some(pcs - pro),
                    _ => None,
                }
            }
            _ => {}
        }
    }
    assert_eq!(diffs.len(), 7);
    // defined differences first, descending; undefined blocks at the end
    let defined: Vec<f64> = diffs.iter().filter_map(|(_, d)| *d).collect();
    for pair in defined.windows(2) {
        assert!(pair[0] >= pair[1], "blocks out of order: {diffs:?}");
    }
    let first_undefined = diffs.iter().position(|(_, d)| d.is_none());
    if let Some(at) = first_undefined {
        assert!(
            diffs[at..].iter().all(|(_, d)| d.is_none()),
            "undefined blocks interleaved: {diffs:?}"
        );
    }
}

#[test]
fn thread_cap_env_var_is_honored_and_validated() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let ingested = dir.path().join("ingested");
    synth_into(&data, "37");
    ingest_into(&data, &ingested);
    let archive = ingested.join("dataset.json");

    let run_with = |threads: &str, out_dir: &Path| {
        Command::new(env!("CARGO_BIN_EXE_impactnorm"))
            .env("IMPACTNORM_THREADS", threads)
            .args([
                "mhq",
                "--archive",
                archive.to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
            ])
            .output()
            .expect("binary runs")
    };

    let serial = dir.path().join("serial");
    let auto = dir.path().join("auto");
    assert!(code(&run_with("1", &serial)) <= 1);
    assert!(code(&run_with("0", &auto)) <= 1);
    // worker count must not affect the report bytes
    assert_eq!(
        fs::read(serial.join("mhq_report.tsv")).unwrap(),
        fs::read(auto.join("mhq_report.tsv")).unwrap()
    );

    let bad = run_with("many", &dir.path().join("bad"));
    assert_eq!(code(&bad), 2);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("IMPACTNORM_THREADS"));
}

#[test]
fn analysis_config_flag_overrides_archive_settings() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let ingested = dir.path().join("ingested");
    synth_into(&data, "41");
    ingest_into(&data, &ingested);
    let archive = ingested.join("dataset.json");

    let override_path = dir.path().join("override.txt");
    fs::write(&override_path, "mention_threshold = 3\nci_level = 0.9\n").unwrap();

    let base_out = dir.path().join("base");
    let override_out = dir.path().join("override");
    let run = |out_dir: &Path, config: Option<&Path>| {
        let mut args = vec![
            "mhq".to_string(),
            "--archive".into(),
            archive.to_str().unwrap().into(),
            "--metrics".into(),
            "citations".into(),
            "--out".into(),
            out_dir.to_str().unwrap().into(),
        ];
        if let Some(config) = config {
            args.push("--config".into());
            args.push(config.to_str().unwrap().into());
        }
        let out = Command::new(env!("CARGO_BIN_EXE_impactnorm"))
            .args(&args)
            .output()
            .unwrap();
        assert!(code(&out) <= 1);
    };
    run(&base_out, None);
    run(&override_out, Some(&override_path));
    assert_ne!(
        fs::read(base_out.join("mhq_report.tsv")).unwrap(),
        fs::read(override_out.join("mhq_report.tsv")).unwrap(),
        "raising the mention threshold must change the report"
    );
}

#[test]
fn meta_heterogeneous_studies_report_positive_tau_sq() {
    let dir = tempfile::tempdir().unwrap();
    let coeffs = dir.path().join("nine.csv");
    let mut body = String::from("study_id,r,n\n");
    // nine studies with a wide planted spread of effects
    for (i, r) in [0.05, 0.15, 0.3, 0.45, 0.55, 0.65, 0.75, 0.82, 0.9]
        .iter()
        .enumerate()
    {
        body.push_str(&format!("s{i},{r},{}\n", 40 + 10 * i));
    }
    fs::write(&coeffs, body).unwrap();
    let out_dir = dir.path().join("meta");
    let out = impactnorm(&[
        "meta",
        coeffs.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let tsv = fs::read_to_string(out_dir.join("meta_report.tsv")).unwrap();
    for line in tsv.lines().skip(1) {
        let tau_sq: f64 = line.split('\t').next_back().unwrap().parse().unwrap();
        assert!(tau_sq > 0.0, "expected heterogeneity in: {line}");
    }
    // both modes present by default
    assert_eq!(tsv.lines().count(), 1 + 2);
}

#[test]
fn synth_accepts_partial_json_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("synth.json");
    fs::write(&config, r#"{"n_units": 5, "papers_per_unit": 8}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = impactnorm(&[
        "synth",
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "99",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let pubs = fs::read_to_string(out_dir.join("publications.csv")).unwrap();
    assert_eq!(pubs.lines().count(), 1 + 5 * 8);
    let truth: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("ground_truth.json")).unwrap())
            .unwrap();
    assert_eq!(truth["config"]["seed"].as_u64(), Some(99));
    assert_eq!(truth["generator"].as_str(), Some("splitmix64"));
}

#[test]
fn tsv_values_round_trip_against_json_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let ingested = dir.path().join("ingested");
    synth_into(&data, "29");
    ingest_into(&data, &ingested);
    let out_dir = dir.path().join("mhq");
    let out = impactnorm(&[
        "mhq",
        "--archive",
        ingested.join("dataset.json").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(code(&out) <= 1);

    let tsv = fs::read_to_string(out_dir.join("mhq_report.tsv")).unwrap();
    let sidecar: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("mhq_report.json")).unwrap())
            .unwrap();
    let rows = sidecar["rows"].as_array().unwrap();
    for (line, row) in tsv.lines().skip(1).zip(rows) {
        let cells: Vec<&str> = line.split('\t').collect();
        assert_eq!(cells[0], row["group"].as_str().unwrap());
        assert_eq!(cells[8], row["status"].as_str().unwrap());
        if let Some(full) = row["mhq"].as_f64() {
            let printed: f64 = cells[2].parse().unwrap();
            let rel = ((printed - full) / full).abs();
            assert!(rel < 1e-5, "TSV {printed} vs JSON {full}");
        } else {
            assert_eq!(cells[2], "");
        }
    }
}
