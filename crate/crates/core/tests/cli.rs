mod common;

use std::fs;
use std::path::Path;

use common::*;
use tempfile::TempDir;

fn synth(items: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let o = run(
        &["synth", "-o", ".", "--items", items, "--orgs", "2"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    dir
}

fn code(args: &[&str], cwd: &Path) -> i32 {
    run(args, cwd).status.code().unwrap()
}

fn stderr(args: &[&str], cwd: &Path) -> String {
    String::from_utf8_lossy(&run(args, cwd).stderr).into_owned()
}

#[test]
fn backtest_then_report_writes_artifacts() {
    let d = synth("6");
    let p = d.path();
    assert_eq!(code(&["validate", "-c", "arena.conf"], p), 0);
    assert_eq!(code(&["backtest", "-c", "arena.conf"], p), 0);
    assert_eq!(code(&["report", "-c", "arena.conf"], p), 0);
    let results = fs::read_to_string(p.join("out/results.csv")).unwrap();
    assert!(results.starts_with(
        "item,org,model,wape1mo,wape3mo,n_monthly,n_quarterly,importance_rank,history_class,activity\n"
    ));
    for f in [
        "per_origin.csv",
        "manifest.json",
        "report/cdf_summary.csv",
        "report/cdf_seasonal_naive_wape_1mo_top10.csv",
        "report/cdf_seasonal_naive_wape_1mo_top10.svg",
        "report/best_of_all_wape_3mo.csv",
    ] {
        assert!(p.join("out").join(f).exists(), "{f} missing");
    }

    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(p.join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(manifest["seeds"]["global_ar_q"], 0);
    assert!(manifest["inputs"]["target"].is_string());

    // a rerun over the same inputs writes the same results
    assert_eq!(code(&["backtest", "-c", "arena.conf", "-o", "again"], p), 0);
    assert_eq!(
        fs::read(p.join("out/results.csv")).unwrap(),
        fs::read(p.join("again/results.csv")).unwrap()
    );
    assert_eq!(
        manifest_without_timings(&fs::read(p.join("out/manifest.json")).unwrap()),
        manifest_without_timings(&fs::read(p.join("again/manifest.json")).unwrap())
    );
}

#[test]
fn config_comes_from_the_environment_and_flags_win() {
    let d = synth("4");
    let p = d.path();
    let o = bin()
        .args(["backtest", "--top-n", "2", "-o", "from_env"])
        .current_dir(p)
        .env("FORECAST_ARENA_CONFIG", p.join("arena.conf"))
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let results = fs::read_to_string(p.join("from_env/results.csv")).unwrap();
    assert!(results.lines().skip(1).all(|l| {
        let rank: usize = l.split(',').nth(7).unwrap().parse().unwrap();
        rank <= 2
    }));
}

#[test]
fn relative_paths_resolve_against_the_config_file() {
    let d = synth("3");
    let elsewhere = tempfile::tempdir().unwrap();
    let cfg = d.path().join("arena.conf");
    assert_eq!(
        code(&["validate", "-c", cfg.to_str().unwrap()], elsewhere.path()),
        0
    );
}

#[test]
fn usage_errors_exit_1() {
    let d = synth("3");
    let p = d.path();
    assert_eq!(
        code(&["report", "-c", "arena.conf", "--metrics", "mape"], p),
        1
    );
    assert_eq!(
        code(&["backtest", "-c", "arena.conf", "--parallel", "0"], p),
        1
    );
    assert_eq!(
        code(&["backtest", "-c", "arena.conf", "--formats", "pdf"], p),
        1
    );
    assert_eq!(code(&["frobnicate"], p), 1);
    assert_eq!(code(&["backtest", "-c", "missing.conf"], p), 1);
    assert_eq!(code(&["validate"], p), 1);

    let no_windows = "[data]\ntarget = target_ts.csv\nrelated = related_ts.csv\n";
    fs::write(p.join("plain.conf"), no_windows).unwrap();
    assert_eq!(code(&["compare-windows", "-c", "plain.conf"], p), 1);
    assert_eq!(
        code(
            &[
                "compare-windows",
                "-c",
                "plain.conf",
                "--window-a",
                "2020-01..2020-12"
            ],
            p
        ),
        1
    );
}

#[test]
fn data_errors_exit_2() {
    let d = synth("3");
    let p = d.path();
    fs::remove_file(p.join("related_ts.csv")).unwrap();
    assert_eq!(code(&["validate", "-c", "arena.conf"], p), 2);

    let d = synth("3");
    let p = d.path();
    let mut t = fs::read_to_string(p.join("target_ts.csv")).unwrap();
    t.push_str("3900000,1617000,2021-13-01,5\n");
    fs::write(p.join("target_ts.csv"), t).unwrap();
    assert_eq!(code(&["backtest", "-c", "arena.conf"], p), 2);
    let msg = stderr(&["backtest", "-c", "arena.conf"], p);
    assert!(msg.contains("row"), "{msg}");

    assert_eq!(
        code(&["report", "-c", "arena.conf", "--results", "nope.csv"], p),
        2
    );
}

#[test]
fn short_histories_exit_3() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let mut target = String::from("item,org,date,quantity\n");
    let mut related = String::from("item,org,date,unit_price\n");
    for m in 1..=12 {
        for y in [2020, 2021] {
            if y == 2021 && m > 8 {
                continue;
            }
            target.push_str(&format!("1,1,{y}-{m:02}-01,{}\n", 10 + m));
            related.push_str(&format!("1,1,{y}-{m:02}-01,2.5\n"));
        }
    }
    fs::write(p.join("target_ts.csv"), target).unwrap();
    fs::write(p.join("related_ts.csv"), related).unwrap();
    let args = ["--target", "target_ts.csv", "--related", "related_ts.csv"];
    assert_eq!(code(&[&["validate"][..], &args].concat(), p), 3);
    assert_eq!(code(&[&["backtest"][..], &args].concat(), p), 3);
}

#[test]
fn identical_windows_compare_to_zero() {
    let d = synth("4");
    let p = d.path();
    let o = run(
        &[
            "compare-windows",
            "-c",
            "arena.conf",
            "--window-a",
            "2020-04..2021-03",
            "--window-b",
            "2020-04..2021-03",
        ],
        p,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(p.join("out/window_compare.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next(),
        Some("model,wape_window_a,wape_window_b,delta")
    );
    for l in lines {
        assert_eq!(l.rsplit(',').next(), Some("0"), "{l}");
    }
    assert_eq!(code(&["compare-windows", "-c", "arena.conf"], p), 0);
}

#[test]
fn model_dump_prints_parameters() {
    let d = synth("3");
    let p = d.path();
    let out = |model: &str| {
        let o = run(
            &[
                "model",
                "dump",
                "-c",
                "arena.conf",
                "--item",
                "3900000",
                "--org",
                "1617000",
                "--model",
                model,
            ],
            p,
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap()
    };
    let prophet = out("prophet_lite");
    assert!(prophet["k"].is_number());
    assert_eq!(prophet["fourier_a"].as_array().unwrap().len(), 3);
    let global = out("global_ar_q");
    assert_eq!(global["quantile"], 0.5);
    assert_eq!(global["weights"].as_array().unwrap().len(), 26);
    assert_eq!(
        code(
            &[
                "model",
                "dump",
                "-c",
                "arena.conf",
                "--item",
                "1",
                "--org",
                "1",
                "--model",
                "global_ar"
            ],
            p
        ),
        1
    );
}
