#![allow(dead_code)]

use psyscale::stimuli::io::{save_gray, save_mask};
use psyscale::stimuli::{GrayImage, ObjectMask};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn psyscale(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psyscale"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

pub fn ok(args: &[&str]) -> Output {
    let out = psyscale(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

pub fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Three classes with two instances each; objects are bright squares at
/// class- and instance-specific offsets on a 112 px canvas.
pub fn corpus(root: &Path) -> (PathBuf, PathBuf) {
    let images = root.join("images");
    let masks = root.join("masks");
    for (c, class) in ["bird", "boat", "car"].iter().enumerate() {
        for i in 0..2 {
            for base in [&images, &masks] {
                std::fs::create_dir_all(base.join(class).join("x_pos")).unwrap();
            }
            let (x0, y0) = (20 + 8 * c + 5 * i, 30 + 6 * i);
            let side = 40 + 6 * c;
            let inside = move |x: usize, y: usize| (x0..x0 + side).contains(&x) && (y0..y0 + side).contains(&y);
            let img = GrayImage::from_fn(112, 112, |x, y| {
                if inside(x, y) {
                    0.5 + 0.4 * (((x + c * y) as f64) / (3.0 + c as f64)).sin()
                } else {
                    0.1
                }
            })
            .unwrap();
            let mask = ObjectMask::from_fn(112, 112, inside).unwrap();
            let name = format!("{class}{i}.png");
            save_gray(&img, &images.join(class).join("x_pos").join(&name)).unwrap();
            save_mask(&mask, &masks.join(class).join("x_pos").join(&name)).unwrap();
        }
    }
    (images, masks)
}

/// Runs stimgen, plan, two observers, fit and score into `root`.
pub fn pipeline(root: &Path, images: &Path, masks: &Path) {
    let seqs = root.join("seqs");
    ok(&["stimgen", "--images", s(images), "--masks", s(masks), "--pairs-per-instance", "2", "--seed", "3", "--out", s(&seqs)]);
    let plan = root.join("plan.json");
    ok(&["trials", "plan", "--sequences", s(&seqs), "--repetitions", "3", "--seed", "11", "--out", s(&plan)]);
    for (name, observer) in [("human", "synthetic:2:0.1:1"), ("gabor", "gabor")] {
        let responses = root.join(format!("{name}.jsonl"));
        ok(&["trials", "run", "--plan", s(&plan), "--observer", observer, "--sequences", s(&seqs), "--out", s(&responses)]);
        ok(&[
            "fit", "--responses", s(&responses), "--out", s(&root.join(format!("{name}_fit.json"))),
            "--skew-out", s(&root.join(format!("{name}_skew.json"))),
        ]);
    }
    ok(&[
        "score", "--human", s(&root.join("human_skew.json")), "--model", s(&root.join("gabor_fit.json")),
        "--out", s(&root.join("score.json")),
    ]);
}

pub fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}
