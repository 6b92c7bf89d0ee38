use std::fs;
use std::path::Path;

use posepaste::cli::{run_with, EXIT_DATA, EXIT_OK, EXIT_USAGE};
use posepaste::metrics::EvalSet;
use posepaste::pipeline::MANIFEST_FILE;
use posepaste::synthetic;

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("posepaste").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn fixture(root: &Path) -> (String, String) {
    let persons = root.join("P");
    let donors = root.join("R");
    synthetic::write_persons(&persons, &synthetic::persons(5, 3, 48, 96, 1).unwrap()).unwrap();
    synthetic::write_donors(&donors, &synthetic::donors(2, 64, 1).unwrap()).unwrap();
    (persons.display().to_string(), donors.display().to_string())
}

#[test]
fn synthesize_twice_gives_identical_manifests() {
    let root = tempfile::tempdir().unwrap();
    let (p, r) = fixture(root.path());
    let mut digests = Vec::new();
    for (name, jobs) in [("O1", "1"), ("O2", "3")] {
        let out = root.path().join(name);
        let (code, stdout, stderr) = run(&[
            "synthesize",
            "--persons",
            &p,
            "--donors",
            &r,
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
            "--jobs",
            jobs,
        ]);
        assert_eq!(code, EXIT_OK, "{stderr}");
        assert!(stdout.contains("composites 5"), "{stdout}");
        digests.push(fs::read(out.join(MANIFEST_FILE)).unwrap());
        assert_eq!(fs::read_dir(out.join("images")).unwrap().count(), 10);
    }
    assert_eq!(digests[0], digests[1]);
}

#[test]
fn zero_bin_is_a_usage_error() {
    let root = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&[
        "synthesize",
        "--persons",
        "P",
        "--donors",
        "R",
        "--seed",
        "1",
        "--out",
        root.path().to_str().unwrap(),
        "--bin",
        "0",
    ]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("bin must be positive"), "{err}");
    assert_eq!(fs::read_dir(root.path()).unwrap().count(), 0);
}

#[test]
fn seed_is_mandatory_and_unknown_flags_rejected() {
    let (code, _, err) = run(&["synthesize", "--persons", "P", "--donors", "R", "--out", "O"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--seed"), "{err}");
    let (code, _, err) = run(&["eval", "--dist", "d.tsv", "--frobnicate"]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("--frobnicate"));
    let (code, _, _) = run(&[]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn help_shows_defaults() {
    let (code, out, _) = run(&["synthesize", "--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("[default: 15]"), "{out}");
    assert!(out.contains("scale correction is on by default"));
    assert!(out.contains("originals are included by default"));
    for flag in [
        "--persons",
        "--donors",
        "--keypoints",
        "--masks",
        "--out",
        "--seed",
        "--bin",
        "--no-scale-correct",
        "--no-originals",
        "--strict",
        "--jobs",
    ] {
        assert!(out.contains(flag), "missing {flag}");
    }
    let (_, out, _) = run(&["eval", "--help"]);
    for flag in ["--dist", "--embeddings", "--protocol"] {
        assert!(out.contains(flag), "missing {flag}");
    }
    let (_, out, _) = run(&["preview", "--help"]);
    assert!(out.contains("--contact-sheet"));
}

#[test]
fn eval_perfect_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let set = EvalSet::new(
        vec![0.0, 1.0, 1.0, 1.0, 0.0, 1.0],
        vec![1, 2],
        vec![1, 1],
        vec![1, 2, 3],
        vec![2, 2, 2],
    )
    .unwrap();
    let path = dir.path().join("d.tsv");
    fs::write(&path, set.to_distance_text()).unwrap();
    let (code, out, err) = run(&["eval", "--dist", path.to_str().unwrap(), "--protocol", "market"]);
    assert_eq!(code, EXIT_OK, "{err}");
    assert!(out.contains("Rank-1\t1.0000"), "{out}");
    assert!(out.contains("mAP\t1.0000"), "{out}");

    let emb = dir.path().join("e.tsv");
    fs::write(&emb, "q 1 1 0 0\ng 2 2 0 1\ng 1 2 0 3\n").unwrap();
    let (code, out, _) = run(&["eval", "--embeddings", emb.to_str().unwrap(), "--ranks", "1,2"]);
    assert_eq!(code, EXIT_OK);
    assert!(
        out.contains("Rank-1\t0.0000") && out.contains("Rank-2\t1.0000") && out.contains("mAP\t0.5000"),
        "{out}"
    );
}

#[test]
fn eval_errors() {
    let (code, _, _) = run(&["eval", "--dist", "/nonexistent/d.tsv"]);
    assert_eq!(code, EXIT_DATA);
    let (code, _, _) = run(&["eval", "--dist", "x", "--protocol", "cuhk03"]);
    assert_eq!(code, EXIT_USAGE);
    let (code, _, _) = run(&["eval"]);
    assert_eq!(code, EXIT_USAGE);
}

#[test]
fn stats_and_preview_stay_inside_out() {
    let root = tempfile::tempdir().unwrap();
    let (p, r) = fixture(root.path());
    let out = root.path().join("O");
    let out_s = out.to_str().unwrap();
    assert_eq!(
        run(&["synthesize", "--persons", &p, "--donors", &r, "--seed", "3", "--out", out_s]).0,
        EXIT_OK
    );
    let before: Vec<_> = fs::read_dir(root.path()).unwrap().map(|e| e.unwrap().file_name()).collect();

    let (code, text, _) = run(&["stats", "--out", out_s]);
    assert_eq!(code, EXIT_OK);
    assert!(text.starts_with("composites\t5\n"), "{text}");
    let (code, json, _) = run(&["stats", "--out", out_s, "--json"]);
    assert_eq!(code, EXIT_OK);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["composites"], 5);

    let (code, printed, err) = run(&["preview", "--out", out_s, "--contact-sheet", "3x2"]);
    assert_eq!(code, EXIT_OK, "{err}");
    let sheet = image::open(printed.trim()).unwrap();
    assert!(printed.trim().starts_with(out_s));
    assert!(sheet.width() > sheet.height());

    let after: Vec<_> = fs::read_dir(root.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(before, after);
}

#[test]
fn missing_inputs_are_data_errors() {
    let root = tempfile::tempdir().unwrap();
    let out = root.path().join("O");
    let (code, _, err) = run(&[
        "synthesize",
        "--persons",
        "/nonexistent",
        "--donors",
        "/nonexistent",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_DATA, "{err}");
    assert!(!out.exists());
    let (code, _, _) = run(&["stats", "--out", out.to_str().unwrap()]);
    assert_eq!(code, EXIT_DATA);
}
