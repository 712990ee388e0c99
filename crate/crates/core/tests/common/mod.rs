#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use forecast_arena::dataset_io::{DatasetBundle, HolidayCalendar, MonthlySeries, SeriesKey};
use forecast_arena::Month;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn start() -> Month {
    Month::new(2017, 1).unwrap()
}

/// Positive noisy seasonal series with a drifting price.
pub fn random_series(rng: &mut ChaCha8Rng, item: u64, org: u64, len: usize) -> MonthlySeries {
    let level: f64 = rng.random_range(5.0..500.0);
    let amp: f64 = rng.random_range(0.0..0.4);
    let mut price: f64 = rng.random_range(1.0..10.0);
    let mut quantities = Vec::with_capacity(len);
    let mut prices = Vec::with_capacity(len);
    for t in 0..len {
        let season = 1.0 + amp * (std::f64::consts::TAU * t as f64 / 12.0).sin();
        let noise: f64 = rng.random_range(0.8..1.2);
        quantities.push((level * season * noise).round());
        price *= rng.random_range(0.97..1.04);
        prices.push(price);
    }
    MonthlySeries {
        key: SeriesKey::new(item, org),
        start_month: start(),
        quantities,
        prices,
    }
}

pub fn bundle(series: Vec<MonthlySeries>) -> DatasetBundle {
    DatasetBundle {
        series: series
            .into_iter()
            .map(|s| (s.key, s))
            .collect::<BTreeMap<_, _>>(),
        holidays: HolidayCalendar::default(),
    }
}

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_forecast-arena"))
}

pub fn run(args: &[&str], cwd: &Path) -> Output {
    bin()
        .args(args)
        .current_dir(cwd)
        .env_remove("FORECAST_ARENA_CONFIG")
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs")
}

/// Every file under `dir`, relative path → bytes.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Manifest with the wall-clock timings removed.
pub fn manifest_without_timings(bytes: &[u8]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
    v.as_object_mut().unwrap().remove("timings_ms");
    v
}

/// Compares two output trees byte for byte; the manifest is compared with
/// its timings stripped. Returns the mismatching paths.
pub fn diff_outputs(a: &Path, b: &Path) -> Vec<PathBuf> {
    let (sa, sb) = (snapshot(a), snapshot(b));
    let mut bad: Vec<PathBuf> = sa
        .keys()
        .chain(sb.keys())
        .filter(|k| !(sa.contains_key(*k) && sb.contains_key(*k)))
        .cloned()
        .collect();
    for (k, va) in &sa {
        let Some(vb) = sb.get(k) else { continue };
        let same = if k.file_name().is_some_and(|n| n == "manifest.json") {
            manifest_without_timings(va) == manifest_without_timings(vb)
        } else {
            va == vb
        };
        if !same {
            bad.push(k.clone());
        }
    }
    bad.sort();
    bad.dedup();
    bad
}
