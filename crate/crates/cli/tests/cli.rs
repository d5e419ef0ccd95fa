use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use netshift::io::{parse_edge_list, parse_matrix_market, write_edge_list, write_matrix_market};
use netshift_core::graph::{block_factors, sample_graph, sbm_reference_blocks, Graph, LatentModel};
use proptest::prelude::*;
use serde_json::Value;
use tempfile::TempDir;

fn netshift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netshift"))
        .args(args)
        .env_remove("NETSHIFT_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) {
    let out = netshift(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

fn indices(v: &Value) -> Vec<usize> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_u64().unwrap() as usize)
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn simulate(dir: &Path, model: &str, n: usize, seed: u64, extra: &[&str]) -> PathBuf {
    let out = dir.join(format!("{model}-{n}-{seed}"));
    let (n, seed) = (n.to_string(), seed.to_string());
    let mut args = vec![
        "simulate",
        "--model",
        model,
        "--n",
        &n,
        "--rng-seed",
        &seed,
        "--out",
        s(&out),
    ];
    args.extend_from_slice(extra);
    ok(&args);
    out
}

fn random_graph(n: usize, bits: &[bool]) -> Graph {
    let mut edges = Vec::new();
    let mut i = 0;
    for u in 0..n {
        for v in (u + 1)..n {
            if bits[i] {
                edges.push((u, v));
            }
            i += 1;
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn graph_formats_round_trip(n in 1usize..25, bits in prop::collection::vec(any::<bool>(), 300)) {
        let g = random_graph(n, &bits);
        let mtx = parse_matrix_market(&write_matrix_market(&g), None).unwrap();
        prop_assert_eq!(&mtx, &g);
        let tsv = parse_edge_list(&write_edge_list(&g), Some(n)).unwrap();
        prop_assert_eq!(&tsv, &g);
    }
}

#[test]
fn matrix_market_variants() {
    let general = "%%MatrixMarket matrix coordinate real general\n% comment\n3 3 4\n1 2 1.0\n2 1 1.0\n3 1 0\n2 3 2.5\n";
    let g = parse_matrix_market(general, None).unwrap();
    assert_eq!(g.edges(), vec![(0, 1), (1, 2)]);
    assert!(parse_matrix_market("%%MatrixMarket matrix array real general\n2 2\n", None).is_err());
    assert!(parse_matrix_market(
        "%%MatrixMarket matrix coordinate pattern symmetric\n3 3 2\n1 2\n",
        None
    )
    .is_err());
    assert!(parse_matrix_market(
        "%%MatrixMarket matrix coordinate pattern symmetric\n3 3 1\n1 4\n",
        None
    )
    .is_err());
    assert!(parse_matrix_market(
        "%%MatrixMarket matrix coordinate pattern symmetric\n3 3 1\n2 2\n",
        None
    )
    .is_err());
    let tsv = parse_edge_list("# edges\n0\t1\n1\t0\n3\t1\n", None).unwrap();
    assert_eq!(tsv.n(), 4);
    assert_eq!(tsv.edges(), vec![(0, 1), (1, 3)]);
    assert!(parse_edge_list("0\t1\t2\n", None).is_err());
    assert!(parse_edge_list("0\t5\n", Some(3)).is_err());
    assert!(parse_edge_list("", None).is_err());
    assert_eq!(parse_edge_list("", Some(4)).unwrap().n(), 4);
}

#[test]
fn simulate_writes_graphs_and_truth() {
    let dir = TempDir::new().unwrap();
    let sbm = simulate(dir.path(), "sbm", 200, 7, &[]);
    let truth = json(&sbm.join("truth.json"));
    assert_eq!(truth["schema"], 1);
    assert_eq!(indices(&truth["unshifted"]).len(), 100);
    assert_eq!(truth["manifest"]["rng_seed"], 7);
    let g =
        parse_matrix_market(&fs::read_to_string(sbm.join("graph1.mtx")).unwrap(), None).unwrap();
    assert_eq!(g.n(), 200);

    let flat = simulate(
        dir.path(),
        "rdpg",
        60,
        1,
        &["--shift-frac", "0", "--format", "tsv"],
    );
    let truth = json(&flat.join("truth.json"));
    let y = truth["y_true"].as_array().unwrap();
    assert!(y
        .iter()
        .flat_map(|r| r.as_array().unwrap())
        .all(|v| v.as_f64() == Some(0.0)));
    assert!(flat.join("graph1.tsv").exists());

    let grdpg = simulate(dir.path(), "grdpg", 90, 2, &[]);
    let truth = json(&grdpg.join("truth.json"));
    assert_eq!(truth["signature1"]["d_plus"], 2);
    assert_eq!(truth["signature1"]["d_minus"], 1);

    let mix = simulate(dir.path(), "rankmix", 90, 2, &[]);
    let truth = json(&mix.join("truth.json"));
    assert_eq!(truth["signature1"]["d_plus"], 2);
    assert_eq!(truth["signature2"]["d_plus"], 3);

    let bad = netshift(&[
        "simulate",
        "--model",
        "sbm",
        "--n",
        "10",
        "--shift-frac",
        "2",
        "--out",
        s(&dir.path().join("x")),
    ]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(!dir.path().join("x").exists());
}

#[test]
fn identical_inputs_with_seeds_keep_every_vertex() {
    let dir = TempDir::new().unwrap();
    let sim = simulate(dir.path(), "sbm", 150, 3, &[]);
    let g = sim.join("graph1.mtx");
    let out = dir.path().join("cmp");
    ok(&[
        "compare",
        "--a1",
        s(&g),
        "--a2",
        s(&g),
        "--dim",
        "3",
        "--seeds",
        "0,1,2",
        "--alpha",
        "0.05",
        "--csv",
        "--out",
        s(&out),
    ]);
    let r = json(&out.join("report.json"));
    assert_eq!(indices(&r["unshifted"]), (0..150).collect::<Vec<_>>());
    assert!(r["seed_free"].is_null());
    let csv = fs::read_to_string(out.join("shifts.csv")).unwrap();
    assert_eq!(csv.lines().count(), 151);
    assert!(csv.starts_with("vertex,t,p,shifted,y1,y2,y3"));
}

#[test]
fn seed_free_compare_detects_sbm_shifts() {
    let dir = TempDir::new().unwrap();
    let mut acc = Vec::new();
    for seed in 0..5u64 {
        let sim = simulate(dir.path(), "sbm", 200, 100 + seed, &[]);
        let out = sim.join("cmp");
        ok(&[
            "compare",
            "--a1",
            s(&sim.join("graph1.mtx")),
            "--a2",
            s(&sim.join("graph2.mtx")),
            "--dim",
            "3",
            "--candidates",
            "1000",
            "--seed-size",
            "3",
            "--alpha",
            "0.05",
            "--filter-alpha",
            "0.3",
            "--rng-seed",
            "42",
            "--out",
            s(&out),
        ]);
        let truth: Vec<usize> = indices(&json(&sim.join("truth.json"))["unshifted"]);
        let est: Vec<usize> = indices(&json(&out.join("report.json"))["unshifted"]);
        let hits = (0..200)
            .filter(|k| truth.contains(k) == est.contains(k))
            .count();
        acc.push(hits as f64 / 200.0);
    }
    let mean = acc.iter().sum::<f64>() / acc.len() as f64;
    assert!(mean >= 0.9, "{acc:?}");
}

#[test]
fn outputs_are_reproducible_and_thread_independent() {
    let dir = TempDir::new().unwrap();
    let sim = simulate(dir.path(), "sbm", 150, 9, &[]);
    let (a1, a2) = (sim.join("graph1.mtx"), sim.join("graph2.mtx"));
    let run = |name: &str, threads: Option<&str>| -> Vec<u8> {
        let out = dir.path().join(name);
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_netshift"));
        cmd.args([
            "compare",
            "--a1",
            s(&a1),
            "--a2",
            s(&a2),
            "--dim",
            "3",
            "--candidates",
            "300",
            "--rng-seed",
            "5",
            "--out",
            s(&out),
        ]);
        cmd.env_remove("NETSHIFT_THREADS");
        if let Some(t) = threads {
            cmd.env("NETSHIFT_THREADS", t);
        }
        assert!(cmd.status().unwrap().success());
        fs::read(out.join("report.json")).unwrap()
    };
    let first = run("a", None);
    assert_eq!(first, run("b", None));
    assert_eq!(first, run("c", Some("1")));

    let again = simulate(dir.path(), "sbm", 150, 9, &[]);
    assert_eq!(
        fs::read(sim.join("truth.json")).unwrap(),
        fs::read(again.join("truth.json")).unwrap()
    );
    let bad = netshift(&[
        "--threads",
        "0",
        "simulate",
        "--model",
        "sbm",
        "--n",
        "30",
        "--out",
        s(&dir.path().join("t0")),
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn malformed_input_exits_2_without_outputs() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "0\t1\n1\tx\n").unwrap();
    let good = dir.path().join("good.tsv");
    fs::write(&good, "0\t1\n1\t2\n2\t3\n").unwrap();
    let out = dir.path().join("out");
    let r = netshift(&[
        "compare",
        "--a1",
        s(&good),
        "--a2",
        s(&bad),
        "--dim",
        "1",
        "--seeds",
        "0",
        "--out",
        s(&out),
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stderr).contains("bad.tsv"));
    assert!(!out.exists());

    let missing = netshift(&[
        "embed",
        s(&dir.path().join("nope.mtx")),
        "--dim",
        "2",
        "--out",
        s(&out),
    ]);
    assert_eq!(missing.status.code(), Some(2));
    let alpha = netshift(&[
        "compare",
        "--a1",
        s(&good),
        "--a2",
        s(&good),
        "--dim",
        "1",
        "--alpha",
        "1.5",
        "--out",
        s(&out),
    ]);
    assert_eq!(alpha.status.code(), Some(2));
    let small = dir.path().join("small.tsv");
    fs::write(&small, "0\t1\n").unwrap();
    let mismatch = netshift(&[
        "mirror",
        s(&good),
        s(&small),
        "--dim",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(mismatch.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn embed_writes_requested_shape() {
    let dir = TempDir::new().unwrap();
    let sim = simulate(dir.path(), "sbm", 120, 4, &[]);
    let out = dir.path().join("emb");
    ok(&[
        "embed",
        s(&sim.join("graph1.mtx")),
        "--dim",
        "2",
        "--out",
        s(&out),
    ]);
    let csv = fs::read_to_string(out.join("embedding.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 121);
    assert!(lines.iter().all(|l| l.split(',').count() == 2));
    let r = json(&out.join("embed.json"));
    assert!(r["selected_dim"].is_null());
    assert_eq!(r["eigenvalues"].as_array().unwrap().len(), 2);
    let bad = netshift(&[
        "embed",
        s(&sim.join("graph1.mtx")),
        "--dim",
        "zero",
        "--out",
        s(&out),
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn auto_dimension_finds_three_blocks() {
    let dir = TempDir::new().unwrap();
    let mut hits = 0;
    for seed in 0..10u64 {
        let sim = simulate(dir.path(), "sbm", 400, 200 + seed, &[]);
        let out = sim.join("emb");
        ok(&[
            "embed",
            s(&sim.join("graph1.mtx")),
            "--dim",
            "auto",
            "--out",
            s(&out),
        ]);
        if json(&out.join("embed.json"))["selected_dim"] == 3 {
            hits += 1;
        }
    }
    assert!(hits >= 9, "{hits}/10");
}

#[test]
fn mirror_of_identical_snapshots_is_zero() {
    let dir = TempDir::new().unwrap();
    let sim = simulate(dir.path(), "sbm", 120, 5, &[]);
    let g = sim.join("graph1.mtx");
    let out = dir.path().join("mir");
    ok(&[
        "mirror",
        s(&g),
        s(&g),
        "--dim",
        "3",
        "--candidates",
        "100",
        "--out",
        s(&out),
    ]);
    let r = json(&out.join("mirror.json"));
    assert_eq!(r["d"], serde_json::json!([[0.0, 0.0], [0.0, 0.0]]));
    assert_eq!(r["mode"], "network");

    let vout = dir.path().join("vmir");
    ok(&[
        "mirror",
        s(&g),
        s(&sim.join("graph2.mtx")),
        "--dim",
        "3",
        "--candidates",
        "100",
        "--vertex",
        "5",
        "--out",
        s(&vout),
    ]);
    let r = json(&vout.join("mirror.json"));
    assert_eq!(r["mode"], "vertex");
    assert_eq!(r["vertex"], 5);
}

#[test]
fn mirror_shows_regime_changes() {
    let dir = TempDir::new().unwrap();
    let (l, sig) = block_factors(&sbm_reference_blocks()).unwrap();
    let n = 150;
    let mut z: Vec<usize> = (0..n).map(|s| (s * 7 + s / 5) % 3).collect();
    let mut files = Vec::new();
    for t in 0..13usize {
        if t == 4 || t == 9 {
            for s in 0..n {
                if (s * 31 + t) % 10 < 3 {
                    z[s] = (z[s] + 1) % 3;
                }
            }
        }
        let x = netshift_core::Matrix::from_fn(n, 3, |s, c| l[(z[s], c)]);
        let g = sample_graph(&LatentModel::new(x, sig).unwrap(), 1000 + t as u64).unwrap();
        let path = dir.path().join(format!("snap{t:02}.mtx"));
        fs::write(&path, write_matrix_market(&g)).unwrap();
        files.push(path);
    }
    let out = dir.path().join("mir");
    let mut args: Vec<&str> = vec!["mirror"];
    args.extend(files.iter().map(|p| s(p)));
    args.extend([
        "--dim",
        "3",
        "--candidates",
        "300",
        "--rng-seed",
        "1",
        "--out",
        s(&out),
    ]);
    ok(&args);
    let r = json(&out.join("mirror.json"));
    let iso: Vec<f64> = r["iso"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let mut inc: Vec<(f64, usize)> = iso
        .windows(2)
        .enumerate()
        .map(|(i, w)| (w[1] - w[0], i))
        .collect();
    inc.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut top = [inc[0].1, inc[1].1];
    top.sort();
    assert_eq!(top, [3, 8], "{iso:?}");
    assert_eq!(r["labels"][0], "snap00");
}
