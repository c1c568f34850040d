//! Synthetic datasets and helpers for driving the `fdakit` binary.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fdakit::raster::RasterImage;
use fdakit::seed::rng_from_seed;
use rand::Rng;

pub fn fdakit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdakit"))
        .args(args)
        .env_remove("FDAKIT_CONFIG")
        .output()
        .expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Random street-ish image: a gradient sky plus a few bright blobs.
pub fn write_image(path: &Path, h: usize, w: usize, seed: u64) {
    let mut rng = rng_from_seed(seed);
    let tint: [f64; 3] = [rng.random(), rng.random(), rng.random()];
    let noise: Vec<f64> = (0..h * w).map(|_| rng.random::<f64>() * 0.2).collect();
    let img = RasterImage::<f64>::from_fn(h, w, |c, r, x| {
        0.6 * tint[c] * (1.0 - r as f64 / h as f64) + noise[r * w + x]
    })
    .unwrap();
    std::fs::create_dir_all(path.parent().unwrap()).unwrap();
    img.save(path).unwrap();
}

/// Source dataset with raw class names drawn from `names`; about one image
/// in `yellow_every` gets the yellow name (the last entry of `names`' colors).
pub fn write_source(root: &Path, n: usize, names: &[&str], yellow_name: &str, yellow_every: usize, seed: u64) {
    let mut rng = rng_from_seed(seed);
    for i in 0..n {
        let stem = format!("frame{i:04}");
        write_image(&root.join("images").join(format!("{stem}.png")), 30, 40, seed * 1000 + i as u64);
        let mut lines = String::new();
        for _ in 0..rng.random_range(1..=3) {
            let name = names[rng.random_range(0..names.len())];
            let (w, h) = (rng.random_range(0.03..0.15), rng.random_range(0.08..0.3));
            let (cx, cy) = (rng.random_range(0.1..0.9), rng.random_range(0.1..0.9));
            lines.push_str(&format!("{name} {cx:.6} {cy:.6} {w:.6} {h:.6}\n"));
        }
        if i % yellow_every == 0 {
            lines.push_str(&format!("{yellow_name} 0.500000 0.400000 0.050000 0.150000\n"));
        }
        std::fs::create_dir_all(root.join("labels")).unwrap();
        std::fs::write(root.join("labels").join(format!("{stem}.txt")), lines).unwrap();
    }
}

/// Two sources (LISA-style and S2TLD-style names) plus a weather target folder.
pub struct Fixture {
    pub lisa: PathBuf,
    pub s2tld: PathBuf,
    pub targets: PathBuf,
}

pub fn build_fixture(root: &Path) -> Fixture {
    let lisa = root.join("lisa");
    let s2tld = root.join("s2tld");
    let targets = root.join("weather");
    write_source(&lisa, 14, &["go", "stop", "goLeft", "stopLeft"], "warning", 9, 1);
    write_source(&s2tld, 10, &["red", "green", "off", "wait on"], "yellow", 7, 2);
    for i in 0..4 {
        write_image(&targets.join(format!("fog_{i}.png")), 22 + i, 27 + 2 * i, 500 + i as u64);
    }
    Fixture { lisa, s2tld, targets }
}

/// Every regular file under `dir`, keyed by path relative to `dir`.
pub fn tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(path.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    out
}

/// merge, rebalance, split, fda, fog and rain under `out`, with `jobs` workers.
pub fn run_pipeline(fx: &Fixture, out: &Path, seed: u64, jobs: usize) {
    let seed = seed.to_string();
    let jobs = jobs.to_string();
    let common = ["--seed", &seed, "--jobs", &jobs];
    let merged = out.join("merged");
    let steps: Vec<Vec<String>> = vec![
        vec![
            "merge".into(),
            "--source".into(),
            format!("lisa={}", p(&fx.lisa)),
            "--source".into(),
            format!("s2tld={}", p(&fx.s2tld)),
            "--out".into(),
            p(&merged).into(),
        ],
        vec![
            "rebalance".into(),
            "--manifest".into(),
            p(&merged.join("manifest.tsv")).into(),
            "--out".into(),
            p(&out.join("balanced")).into(),
            "--target".into(),
            "0.3".into(),
        ],
        vec![
            "split".into(),
            "--manifest".into(),
            p(&out.join("balanced/manifest.tsv")).into(),
            "--out".into(),
            p(&out.join("split")).into(),
            "--width".into(),
            "48".into(),
            "--height".into(),
            "36".into(),
        ],
        vec![
            "fda".into(),
            "--manifest".into(),
            p(&out.join("split/manifest.tsv")).into(),
            "--targets".into(),
            p(&fx.targets).into(),
            "--out".into(),
            p(&out.join("fda")).into(),
        ],
        vec![
            "fog".into(),
            "--manifest".into(),
            p(&out.join("split/manifest.tsv")).into(),
            "--out".into(),
            p(&out.join("fog")).into(),
        ],
        vec![
            "rain".into(),
            "--manifest".into(),
            p(&out.join("split/manifest.tsv")).into(),
            "--out".into(),
            p(&out.join("rain")).into(),
            "--noise".into(),
            "12".into(),
            "--set".into(),
            "rain.length_min=6".into(),
            "--set".into(),
            "rain.length_max=10".into(),
        ],
    ];
    for step in steps {
        let mut args: Vec<&str> = step.iter().map(String::as_str).collect();
        args.extend(common);
        let o = fdakit(&args);
        assert!(o.status.success(), "{:?} failed: {}", step[0], stderr(&o));
    }
}
