//! Acceptance: repeated runs with identical configuration, under different
//! thread counts, produce byte-identical CSV/JSON outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn run_with_threads(threads: &str, args: &[&str]) {
    let status = Command::new(env!("CARGO_BIN_EXE_ulam2d"))
        .env("RAYON_NUM_THREADS", threads)
        .args(args)
        .status()
        .expect("binary runs");
    assert!(status.success(), "command failed: {args:?}");
}

fn collect_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| {
            let e = e.unwrap();
            if e.path().is_dir() {
                return None;
            }
            Some((
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            ))
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[test]
fn acceptance_10_byte_determinism_across_thread_counts() {
    let root = tempfile::tempdir().unwrap();
    let mut runs: Vec<PathBuf> = Vec::new();

    for (k, threads) in ["1", "2", "4"].iter().enumerate() {
        let dir = root.path().join(format!("run{k}"));
        fs::create_dir_all(&dir).unwrap();

        run_with_threads(
            threads,
            &[
                "density",
                "--t",
                "0.95",
                "--grid",
                "64",
                "--out",
                dir.join("density.csv").to_str().unwrap(),
                "--svg",
                dir.join("density.svg").to_str().unwrap(),
            ],
        );
        run_with_threads(
            threads,
            &[
                "sweep",
                "--steps",
                "5",
                "--grid",
                "32",
                "--out",
                dir.join("sweep").to_str().unwrap(),
            ],
        );
        run_with_threads(
            threads,
            &[
                "holder",
                "--pairs",
                dir.join("sweep/pairs.csv").to_str().unwrap(),
                "--min-distance",
                "1e-3",
                "--out",
                dir.join("fit.json").to_str().unwrap(),
            ],
        );
        run_with_threads(
            threads,
            &[
                "verify-bounds",
                "--steps",
                "4",
                "--random-pairs",
                "10",
                "--out",
                dir.join("bounds.json").to_str().unwrap(),
            ],
        );
        run_with_threads(
            threads,
            &[
                "check-ly",
                "--steps",
                "2",
                "--grid",
                "32",
                "--out",
                dir.join("ly.json").to_str().unwrap(),
            ],
        );
        runs.push(dir);
    }

    let reference_top = collect_files(&runs[0]);
    let reference_sweep = collect_files(&runs[0].join("sweep"));
    assert!(reference_top.iter().any(|(name, _)| name == "density.csv"));
    assert_eq!(reference_sweep.len(), 2 + 5);

    let mut compared = 0;
    for other in &runs[1..] {
        for ((name_a, bytes_a), (name_b, bytes_b)) in reference_top.iter().zip(collect_files(other))
        {
            assert_eq!(*name_a, name_b);
            assert_eq!(*bytes_a, bytes_b, "{name_b} differs between thread counts");
            compared += 1;
        }
        for ((name_a, bytes_a), (name_b, bytes_b)) in reference_sweep
            .iter()
            .zip(collect_files(&other.join("sweep")))
        {
            assert_eq!(*name_a, name_b);
            assert_eq!(
                *bytes_a, bytes_b,
                "sweep/{name_b} differs between thread counts"
            );
            compared += 1;
        }
    }
    println!(
        "criterion 10 PASS: {compared} output files byte-identical across RAYON_NUM_THREADS in {{1,2,4}}"
    );
    assert!(compared >= 20);
}
