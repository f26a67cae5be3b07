use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use permball_cli::schema::{read_csv, Fig1Row, Fig2Row, Fig3Row, GapCurvePoint, RateRecord, SweepRow, UNAVAILABLE};

fn permball(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_permball"))
        .args(args)
        .env_remove("PERMBALL_CACHE")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn exact_counts() {
    let o = permball(&["exact", "--n", "4", "--r", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "14");
    assert!(stderr(&o).contains("backend: "));
    let o = permball(&["exact", "--n", "6", "--r", "5"]);
    assert_eq!(stdout(&o).trim(), "720");
    let o = permball(&["exact", "--n", "11", "--rho", "0.2", "--verify"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn exact_errors() {
    let o = permball(&["exact", "--n", "6", "--rho", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("rho*(n-1)=2.5 not integral"), "{}", stderr(&o));
    let o = permball(&["exact", "--n", "5", "--r", "5"]);
    assert_eq!(o.status.code(), Some(1));
    let o = permball(&["exact", "--n", "100", "--r", "40"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--expert"));
    let o = permball(&["exact", "--n", "4"]);
    assert_eq!(o.status.code(), Some(1));
    let o = permball(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn sweep_sandwich() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = permball(&["sweep", "--n", "4-8", "--families", "all", "--out", path_arg(&out), "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("n,r,family,direction,bits,valid,exact_count,log2_exact,backend,note\n"));
    let rows: Vec<SweepRow> = read_csv(text.as_bytes()).unwrap();
    assert_eq!(rows.len(), (4 + 5 + 6 + 7 + 8) * 7);
    for row in &rows {
        let exact = row.log2_exact.expect("exact count for n <= 8");
        let count: u64 = row.exact_count.as_ref().unwrap().parse().unwrap();
        assert!(((count as f64).log2() - exact).abs() < 1e-9);
        let Some(bits) = row.bits else { continue };
        if row.direction == "lower" {
            assert!(bits <= exact + 1e-9, "{row:?}");
        } else {
            assert!(exact <= bits + 1e-9, "{row:?}");
        }
    }
    assert!(dir.path().join("sweep.csv.meta.json").exists());
}

#[test]
fn sweep_rho_list_emits_integral_cells() {
    let o = permball(&["sweep", "--n", "101", "--rho", "0.25,0.5,0.75", "--families", "phi1,Phi1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rows: Vec<SweepRow> = read_csv(o.stdout.as_slice()).unwrap();
    let cells: Vec<(usize, usize)> = rows.iter().map(|r| (r.n, r.r)).collect();
    assert_eq!(cells, vec![(101, 25), (101, 25), (101, 50), (101, 50), (101, 75), (101, 75)]);
    let o = permball(&["sweep", "--n", "6,11", "--rho", "0.5", "--families", "phi2"]);
    let rows: Vec<SweepRow> = read_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.iter().map(|r| (r.n, r.r)).collect::<Vec<_>>(), vec![(11, 5)]);
    assert!(stderr(&o).contains("skipped n=6"));
}

#[test]
fn sweep_with_no_usable_row_exits_3() {
    let o = permball(&["sweep", "--n", "70", "--r", "40", "--families", "phi1_prime,vdw_generic"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn sweep_is_deterministic_and_reuses_cache() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let run = |out: &Path, jobs: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_permball"))
            .args(["sweep", "--n", "5-9", "--families", "phi2,phi3,Phi1", "--format", "json", "--jobs", jobs])
            .args(["--out", path_arg(out)])
            .env("PERMBALL_CACHE", &cache)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        serde_json::from_str::<serde_json::Value>(&fs::read_to_string(out).unwrap()).unwrap()
    };
    let first = run(&a, "1");
    let records = fs::read_dir(&cache).unwrap().count();
    assert_eq!(records, 5 + 6 + 7 + 8 + 9);
    let second = run(&b, "3");
    assert_eq!(first["rows"], second["rows"]);
    assert_eq!(first["meta"]["cache_hits"], 0);
    assert_eq!(second["meta"]["cache_hits"], records);
}

#[test]
fn tampered_cache_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let c = path_arg(&cache);
    let o = permball(&["exact", "--n", "9", "--r", "3", "--cache-dir", c]);
    assert_eq!(stdout(&o).trim(), "6404");
    let o = permball(&["exact", "--n", "9", "--r", "3", "--cache-dir", c]);
    assert!(stderr(&o).contains("(cached)"));
    let o = permball(&["verify", "--level", "quick", "--cache-dir", c]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let record = cache.join("n9_r3.txt");
    let text = fs::read_to_string(&record).unwrap().replace("exact_count=6404", "exact_count=6405");
    fs::write(&record, text).unwrap();
    let o = permball(&["verify", "--level", "quick", "--cache-dir", c]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("stored 6405 but recomputed 6404"), "{}", stderr(&o));
}

#[test]
fn verify_quick_is_fast() {
    let start = Instant::now();
    let o = permball(&["verify", "--level", "quick"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(start.elapsed() < Duration::from_secs(10));
    assert!(stdout(&o).lines().filter(|l| l.starts_with("[PASS]")).count() >= 4);
}

#[test]
fn figure_tables() {
    let o = permball(&["figures", "fig1", "--grid-step", "0.01"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("rho,phi1,phi1_prime,phi2,phi3\n"));
    let rows: Vec<Fig1Row> = read_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 99);
    assert!(rows.iter().filter(|r| r.rho <= 0.5).all(|r| (r.phi3 - 0.02854).abs() < 1e-4));

    let o = permball(&["figures", "fig2"]);
    let rows: Vec<Fig2Row> = read_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 99);
    assert!(rows.iter().all(|r| r.code_anticode == UNAVAILABLE && r.ecc_new <= r.ecc_old));

    let o = permball(&["figures", "fig3"]);
    let rows: Vec<Fig3Row> = read_csv(o.stdout.as_slice()).unwrap();
    let best = rows.iter().max_by(|a, b| a.improvement.partial_cmp(&b.improvement).unwrap()).unwrap();
    assert_eq!(best.rho, 0.5);

    let o = permball(&["figures", "fig4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn long_tables_round_trip() {
    let o = permball(&["gaps", "--families", "phi2,phi3", "--grid-step", "0.1"]);
    assert!(stdout(&o).starts_with("pair,rho,gap_bits\n"));
    let rows: Vec<GapCurvePoint> = read_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 18);

    let o = permball(&["rates", "--families", "cover_old,cover_new", "--grid-step", "0.1", "--n", "11"]);
    assert!(stdout(&o).starts_with("kind,x,rate_bits,mode,n\n"));
    let rows: Vec<RateRecord> = read_csv(o.stdout.as_slice()).unwrap();
    assert_eq!(rows.len(), 18);
    assert!(rows.iter().all(|r| r.mode == "finite" && r.n == Some(11)));
}

#[test]
fn qmatrix_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q.csv");
    let o = permball(&["qmatrix", "--n", "5", "--r", "1", "--format", "triplets", "--out", path_arg(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("i,j,value\n1,1,2/3\n"));
    assert_eq!(text.lines().count(), 1 + 13);

    let o = permball(&["qmatrix", "--n", "20", "--r", "14", "--family", "second"]);
    let grid: Vec<Vec<f64>> =
        stdout(&o).lines().map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(grid.len(), 20);
    for (i, row) in grid.iter().enumerate() {
        assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        for (j, v) in row.iter().enumerate() {
            assert_eq!(*v > 0.0, i.abs_diff(j) <= 14);
        }
    }
    let o = permball(&["qmatrix", "--n", "5", "--r", "4", "--family", "second"]);
    assert_eq!(o.status.code(), Some(1));
}
