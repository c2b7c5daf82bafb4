use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_whitehead-pr"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn generate(dir: &TempDir, kind: &str, seed: &str, name: &str) -> String {
    let out = p(dir, name);
    let o = run(&["generate", "--kind", kind, "--max-len", "60", "--per-len", "6", "--seed", seed, "-o", &out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn train_and_evaluate_round_trip() {
    let dir = TempDir::new().unwrap();
    let train = generate(&dir, "D", "1", "d.tsv");
    let test = generate(&dir, "Se", "2", "se.tsv");
    let model = p(&dir, "m.json");
    let o = run(&["train", "--features", "f6", "--model", "regression", "--quantizer", "equal", "--bins", "20", "--train", &train, "-o", &model]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(Path::new(&model).exists());

    let hist = p(&dir, "h.csv");
    let o = run(&["evaluate", "--model", &model, "--test", &test, "--strata", "0,4,100", "--hist-bins", "10", "--histogram", &hist]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "stratum,n,accuracy");
    assert!(lines[1].starts_with(">0,360,"));
    let acc: f64 = lines[1].rsplit(',').next().unwrap().parse().unwrap();
    assert!(acc > 0.7, "accuracy {acc}");
    // no test word is longer than 100
    assert_eq!(lines[3], ">100,0,");
    let h = std::fs::read_to_string(&hist).unwrap();
    assert_eq!(h.lines().next(), Some("bin_center,count_class1,count_class2"));
    assert_eq!(h.lines().count(), 11);
}

#[test]
fn generation_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let a = generate(&dir, "S10", "9", "a.tsv");
    let b = generate(&dir, "S10", "9", "b.tsv");
    let c = generate(&dir, "S10", "10", "c.tsv");
    let read = |f: &str| std::fs::read(f).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn thread_count_does_not_change_output() {
    let dir = TempDir::new().unwrap();
    let one = p(&dir, "one.tsv");
    let many = p(&dir, "many.tsv");
    for (threads, out) in [("1", &one), ("4", &many)] {
        let o = run(&["--threads", threads, "generate", "--kind", "SP", "--size", "200", "--max-len", "40", "--seed", "3", "-o", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&one).unwrap(), std::fs::read(&many).unwrap());
}

#[test]
fn scale_shrinks_lengths() {
    let o = run(&["generate", "--kind", "D", "--max-len", "100", "--per-len", "2", "--scale", "0.2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().filter(|l| !l.starts_with('#')).count(), 40);
    assert_eq!(run(&["generate", "--kind", "D", "--scale", "0"]).status.code(), Some(1));
}

#[test]
fn minimize_prints_the_chain() {
    let o = run(&["minimize", "--word", "abab"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("minimal\t"));
    assert!(last.ends_with("\t2"), "{last}");
    assert!(text.contains("step\t"));

    let o = run(&["minimize", "--word", "abAB"]);
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("step")).count(), 0);
}

#[test]
fn cluster_and_predict_reducer() {
    let dir = TempDir::new().unwrap();
    let data = p(&dir, "nonmin.tsv");
    let o = run(&["generate", "--kind", "D", "--max-len", "150", "--per-len", "6", "--seed", "4"]);
    let text = stdout(&o);
    let kept: Vec<&str> = text.lines().filter(|l| l.starts_with('#') || l.contains("\tnonmin\t")).collect();
    std::fs::write(&data, kept.join("\n") + "\n").unwrap();

    let centers = p(&dir, "c.json");
    let o = run(&["cluster", "--k", "4", "--features", "f2", "--init", "estimated", "--seed", "1", "--data", &data, "-o", &centers]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = stdout(&o);
    assert!(report.starts_with("cluster,size,"));
    assert_eq!(report.lines().count(), 5);

    let o = run(&["predict-reducer", "--word", "aabAbb", "--centers", &centers]);
    assert_eq!(o.status.code(), Some(0));
    let mv = stdout(&o);
    assert!(["a->ab", "a->Ba", "b->ba", "b->Ab"].contains(&mv.trim()), "{mv}");
}

#[test]
fn select_features_reports_steps() {
    let dir = TempDir::new().unwrap();
    let train = generate(&dir, "D", "5", "t.tsv");
    let val = generate(&dir, "Se", "6", "v.tsv");
    let o = run(&["select-features", "--pool", "1-1", "--train", &train, "--val", &val, "--max-features", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("step,pattern,accuracy"));
    assert!(text.lines().last().unwrap().starts_with("# custom:"));
}

#[test]
fn feature_export_has_named_columns() {
    let dir = TempDir::new().unwrap();
    let data = generate(&dir, "SR", "7", "sr.tsv");
    let o = run(&["features", "--features", "fstar", "--data", &data]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().next(), Some("word,Ab,Ba"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["generate", "--kind", "X"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));

    let missing = p(&dir, "missing.tsv");
    assert_eq!(run(&["train", "--train", &missing, "-o", &p(&dir, "m")]).status.code(), Some(2));
    let junk = p(&dir, "junk.tsv");
    std::fs::write(&junk, "ab1\tmin\t3\n").unwrap();
    assert_eq!(run(&["train", "--train", &junk, "-o", &p(&dir, "m")]).status.code(), Some(2));
    assert_eq!(run(&["minimize", "--word", "ab7"]).status.code(), Some(2));

    let data = generate(&dir, "D", "8", "d.tsv");
    let bad_model = p(&dir, "bad.json");
    std::fs::write(&bad_model, "{\"schema_version\": 99}").unwrap();
    assert_eq!(run(&["evaluate", "--model", &bad_model, "--test", &data]).status.code(), Some(3));
    let only_min = p(&dir, "min.tsv");
    let text = std::fs::read_to_string(&data).unwrap();
    let kept: Vec<&str> = text.lines().filter(|l| !l.contains("\tnonmin\t")).collect();
    std::fs::write(&only_min, kept.join("\n") + "\n").unwrap();
    assert_eq!(run(&["train", "--train", &only_min, "-o", &p(&dir, "m")]).status.code(), Some(3));
    assert_eq!(run(&["train", "--features", "f99", "--train", &data, "-o", &p(&dir, "m")]).status.code(), Some(1));
}
