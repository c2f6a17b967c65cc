use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/mini").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corpus-lens"))
        .args(args)
        .env_remove("CORPUS_LENS_OUT")
        .output()
        .expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn run_twice_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = cli(&["--quiet", "run", "--config", p(&fixture("run.toml")), "--out-dir", p(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let manifest = fs::read(a.join("manifest.json")).unwrap();
    assert_eq!(manifest, fs::read(b.join("manifest.json")).unwrap());
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 17);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&[
        "-q",
        "run",
        "--config",
        p(&fixture("run.toml")),
        "--out-dir",
        p(dir.path()),
        "--format",
        "graphml",
        "--k",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("graph.graphml").exists());
    assert!(!dir.path().join("graph.dot").exists());
    let keywords = fs::read_to_string(dir.path().join("keywords.csv")).unwrap();
    assert_eq!(keywords.lines().count(), 1 + 3 * 2);
}

#[test]
fn output_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    let text = fs::read_to_string(fixture("run.toml")).unwrap();
    let fixture_root = fixture("");
    let text = text
        .replace("output_dir = \"out\"\n", "")
        .replace("\"corpus\"", &format!("{:?}", fixture_root.join("corpus")))
        .replace("\"segmentation.tsv\"", &format!("{:?}", fixture_root.join("segmentation.tsv")))
        .replace("\"polarity.dic\"", &format!("{:?}", fixture_root.join("polarity.dic")));
    fs::write(&config, text).unwrap();
    let out = dir.path().join("env-out");
    let o = Command::new(env!("CARGO_BIN_EXE_corpus-lens"))
        .args(["-q", "run", "--config", p(&config)])
        .env("CORPUS_LENS_OUT", &out)
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("manifest.json").exists());
}

#[test]
fn subcommands_chain() {
    let dir = tempfile::tempdir().unwrap();
    let d = |n: &str| dir.path().join(n);
    let steps: Vec<Vec<String>> = vec![
        vec!["ingest".into(), "--root".into(), p(&fixture("corpus")).into(), "--out".into(), p(&d("corpus.json")).into()],
        vec![
            "tokenize".into(),
            "--corpus".into(),
            p(&d("corpus.json")).into(),
            "--lexicon".into(),
            p(&fixture("segmentation.tsv")).into(),
            "--out".into(),
            p(&d("tokens.json")).into(),
        ],
        vec!["freq".into(), "--tokens".into(), p(&d("tokens.json")).into(), "--pos".into(), "名詞".into(), "--top".into(), "3".into(), "--out".into(), p(&d("freq.csv")).into()],
        vec!["tfidf".into(), "--tokens".into(), p(&d("tokens.json")).into(), "--k".into(), "2".into(), "--out".into(), p(&d("keywords.csv")).into()],
        vec![
            "sentiment".into(),
            "--tokens".into(),
            p(&d("tokens.json")).into(),
            "--lexicon".into(),
            p(&fixture("polarity.dic")).into(),
            "--out-hist".into(),
            p(&d("hist.csv")).into(),
            "--out-series".into(),
            p(&d("series.csv")).into(),
            "--out-summary".into(),
            p(&d("summary.json")).into(),
        ],
        vec!["network".into(), "--tokens".into(), p(&d("tokens.json")).into(), "--min-node-freq".into(), "2".into(), "--format".into(), "dot".into(), "--out".into(), p(&d("graph.dot")).into()],
        vec!["mds".into(), "--tokens".into(), p(&d("tokens.json")).into(), "--metric".into(), "euclidean".into(), "--out".into(), p(&d("coords.csv")).into()],
    ];
    for step in &steps {
        let args: Vec<&str> = std::iter::once("-q").chain(step.iter().map(String::as_str)).collect();
        let o = cli(&args);
        assert!(o.status.success(), "{:?}: {}", step[0], String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(
        fs::read_to_string(d("freq.csv")).unwrap(),
        "rank,lemma,value\n1,源氏,16\n2,姫君,7\n3,夜,4\n"
    );
    assert_eq!(fs::read_to_string(d("hist.csv")).unwrap().lines().count(), 81);
    assert!(fs::read_to_string(d("graph.dot")).unwrap().starts_with("graph G {"));
    assert_eq!(fs::read_to_string(d("coords.csv")).unwrap().lines().count(), 4);
    let diagnostics = fs::read_to_string(d("diagnostics.json")).unwrap();
    assert!(diagnostics.contains("\"eigenvalues\"") && diagnostics.contains("\"stress\""));
    let corpus = fs::read_to_string(d("corpus.json")).unwrap();
    assert!(corpus.contains("\"title\": \"桐壺\""));
}

#[test]
fn exit_codes() {
    assert_eq!(cli(&["--version"]).status.code(), Some(0));
    assert_eq!(cli(&["--help"]).status.code(), Some(0));
    assert_eq!(cli(&["bogus"]).status.code(), Some(1));
    assert_eq!(cli(&["freq", "--top", "0", "--tokens", "x"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(cli(&["freq", "--tokens", p(&missing)]).status.code(), Some(1));
    assert_eq!(cli(&["run", "--config", p(&missing)]).status.code(), Some(1));
    let o = cli(&[
        "run",
        "--config",
        p(&fixture("run.toml")),
        "--polarity-lexicon",
        p(&missing),
        "--out-dir",
        p(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sentiment.lexicon"));

    let broken = dir.path().join("broken.json");
    fs::write(&broken, "{ not json").unwrap();
    assert_eq!(cli(&["freq", "--tokens", p(&broken)]).status.code(), Some(2));
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let o = cli(&["run", "--config", p(&fixture("run.toml")), "--root", p(&empty), "--out-dir", p(dir.path())]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ingest"));
}
