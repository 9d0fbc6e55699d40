mod common;

use common::*;
use litqa_cli::{AnswerRecord, RetrieveRecord};
use litqa_core::corpus::{chunk_document, parse_document, ChunkPolicy};

fn code(o: &std::process::Output) -> i32 {
    o.status.code().unwrap()
}

fn p(path: &std::path::Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn ingest_three_documents() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    let policy = ChunkPolicy::new(24, 6).unwrap();
    let mut expected = 0;
    for id in ["a1f0c2", "b7d913", "c3e5aa"] {
        let raw = std::fs::read_to_string(core_fixture(&format!("corpus/{id}.json"))).unwrap();
        expected += chunk_document(&parse_document(&raw).unwrap(), &policy).len();
        std::fs::write(corpus.join(format!("{id}.json")), raw).unwrap();
    }
    let index = dir.path().join("index.jsonl");
    let o = litqa(&["ingest", p(&corpus), "--out", p(&index), "--max-tokens", "24", "--overlap-tokens", "6"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), format!("3 documents, {expected} chunks, 0 skipped"));
    assert!(expected > 3);
    assert_eq!(std::fs::read_to_string(&index).unwrap().lines().count(), expected);

    std::fs::write(corpus.join("broken.json"), "{\"metadata\": {}}").unwrap();
    let o = litqa(&["ingest", p(&corpus), "--out", p(&index), "--max-tokens", "24", "--overlap-tokens", "6"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).ends_with("1 skipped\n"), "{}", stdout(&o));
    assert!(stderr(&o).contains("broken.json"));
}

#[test]
fn ingest_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("i.jsonl");
    assert_eq!(code(&litqa(&["ingest", p(dir.path()), "--out", p(&out)])), 2);
    assert_eq!(code(&litqa(&["ingest", "/no/such/dir", "--out", p(&out)])), 2);
    let o = litqa(&["ingest", p(dir.path()), "--out", p(&out), "--max-tokens", "4", "--overlap-tokens", "4"]);
    assert_eq!(code(&o), 2);
}

fn planted_index() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    planted_corpus(&corpus);
    let o = litqa(&["ingest", p(&corpus), "--out", p(&dir.path().join("index.jsonl"))]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    dir
}

fn records(o: &std::process::Output) -> Vec<RetrieveRecord> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn retrieve_planted_document() {
    let dir = planted_index();
    let index = dir.path().join("index.jsonl");
    let o = litqa(&["retrieve", PLANTED_QUERY, "--index", p(&index)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = records(&o);
    assert_eq!(r.len(), 3);
    assert_eq!((r[0].rank, r[0].doc_id.as_str()), (1, PLANTED_DOC));
    assert!(r[0].excerpt.starts_with("The incubation period"));
    assert!(r.windows(2).all(|w| w[0].score >= w[1].score));

    let all = records(&litqa(&["retrieve", PLANTED_QUERY, "--index", p(&index), "-k", "50"]));
    assert_eq!(all.len(), 20);

    // a directory works as an index too
    let from_dir = records(&litqa(&["retrieve", PLANTED_QUERY, "--index", p(&dir.path().join("corpus"))]));
    assert_eq!(from_dir, r);

    let zero = litqa(&["retrieve", "zzzz qqqq", "--index", p(&index)]);
    assert_eq!(code(&zero), 0);
    assert!(records(&zero).iter().all(|r| r.score == 0.0 && r.excerpt.is_empty()));

    let pretty = stdout(&litqa(&["retrieve", PLANTED_QUERY, "--index", p(&index), "--pretty"]));
    assert!(pretty.starts_with("rank"));
    assert!(pretty.lines().nth(1).unwrap().contains(PLANTED_DOC));
}

#[test]
fn answer_records() {
    let dir = planted_index();
    let index = dir.path().join("index.jsonl");
    let q = "The incubation period of the novel coronavirus in patients was five days.";
    let o = litqa(&["answer", q, "--index", p(&index)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let a: AnswerRecord = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!((a.doc_id.as_str(), a.answer.as_str(), a.score), (PLANTED_DOC, q, 1.0));

    let none: AnswerRecord = serde_json::from_str(stdout(&litqa(&["answer", "zzzz", "--index", p(&index)])).trim()).unwrap();
    assert_eq!((none.doc_id.as_str(), none.chunk_index, none.answer.as_str(), none.score), ("doc00", 0, "", 0.0));
    assert!(stdout(&litqa(&["answer", q, "--index", p(&index), "--pretty"])).starts_with("answer:"));
}

#[test]
fn config_file_and_errors() {
    let dir = planted_index();
    let cfg = dir.path().join("litqa.toml");
    std::fs::write(&cfg, "index = \"index.jsonl\"\ntop_k = 5\n").unwrap();
    let o = litqa(&["retrieve", PLANTED_QUERY, "--config", p(&cfg)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(records(&o).len(), 5);

    std::fs::write(&cfg, "index = \"index.jsonl\"\npn_weight = 2.0\n").unwrap();
    let o = litqa(&["retrieve", "x", "--config", p(&cfg)]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("pn_weight"));

    assert_eq!(code(&litqa(&["retrieve", "x"])), 2, "no index");
    assert_eq!(code(&litqa(&["retrieve", "x", "--index", "/no/such/index.jsonl"])), 2);
    assert_eq!(code(&litqa(&["retrieve", "x", "--index", p(&dir.path().join("index.jsonl")), "-k", "0"])), 2);
}

#[test]
fn remote_scorer_down_exits_3() {
    let dir = planted_index();
    let index = dir.path().join("index.jsonl");
    let dead = "http://127.0.0.1:1";
    let o = litqa(&["retrieve", "q", "--index", p(&index), "--scorer", "remote", "--endpoint", dead]);
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert!(stderr(&o).contains("transport"));
    assert_eq!(code(&litqa(&["answer", "q", "--index", p(&index), "--scorer", "remote", "--endpoint", dead])), 3);

    // endpoint from the environment
    assert_eq!(code(&litqa(&["retrieve", "q", "--index", p(&index), "--scorer", "remote"])), 2);
    let o = litqa_env(&["retrieve", "q", "--index", p(&index), "--scorer", "remote"], &[("COV19IR_ENDPOINT", dead)]);
    assert_eq!(code(&o), 3);
}

#[test]
fn trainfiles() {
    let dir = tempfile::tempdir().unwrap();
    let path = |n: &str| dir.path().join(n).to_str().unwrap().to_string();
    let fx = |n: &str| core_fixture(n).to_str().unwrap().to_string();
    let squad_args = |out: &str| {
        vec![
            "build-squad".to_string(),
            "--index".into(),
            fx("corpus"),
            "--lexicon".into(),
            fx("lexicon.json"),
            "--queries".into(),
            fx("queries.txt"),
            "--out".into(),
            out.to_string(),
        ]
    };
    let run = |args: Vec<String>| litqa(&args.iter().map(String::as_str).collect::<Vec<_>>());

    let a = run(squad_args(&path("a.json")));
    assert_eq!(code(&a), 0, "{}", stderr(&a));
    assert!(stdout(&a).contains("100.0% sound"), "{}", stdout(&a));
    let b = run(squad_args(&path("b.json")));
    assert_eq!(stdout(&a), stdout(&b));
    assert_eq!(std::fs::read(path("a.json")).unwrap(), std::fs::read(path("b.json")).unwrap());

    std::fs::write(path("empty.txt"), "\n").unwrap();
    let mut empty = squad_args(&path("c.json"));
    empty[6] = path("empty.txt");
    let o = run(empty);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("no triplets"));
    assert!(!dir.path().join("c.json").exists());

    let mrpc = |out: &str, seed: &str| {
        run(["build-mrpc", "--squad", &path("a.json"), "--out", out, "--seed", seed, "--neg-ratio", "1"]
            .map(String::from)
            .to_vec())
    };
    let m1 = mrpc(&path("m1.tsv"), "7");
    assert_eq!(code(&m1), 0, "{}", stderr(&m1));
    let m2 = mrpc(&path("m2.tsv"), "7");
    assert_eq!(stdout(&m1), stdout(&m2));
    assert_eq!(std::fs::read(path("m1.tsv")).unwrap(), std::fs::read(path("m2.tsv")).unwrap());
    assert!(std::fs::read_to_string(path("m1.tsv")).unwrap().starts_with("Quality\t#1 ID"));
}
