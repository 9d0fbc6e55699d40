#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Output;

use serde_json::json;

pub const PLANTED_QUERY: &str = "incubation period of the novel coronavirus in hospital patients";
pub const PLANTED_DOC: &str = "doc13";

pub fn core_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

fn record(id: &str, title: &str, paragraphs: &[String]) -> String {
    let body: Vec<_> = paragraphs.iter().map(|p| json!({ "text": p, "section": "Body" })).collect();
    serde_json::to_string_pretty(&json!({
        "paper_id": id,
        "metadata": { "title": title },
        "abstract": [],
        "body_text": body,
    }))
    .unwrap()
}

/// Twenty article records; only `PLANTED_DOC` contains a sentence sharing most
/// of `PLANTED_QUERY`'s tokens.
pub fn planted_corpus(dir: &Path) {
    let filler = [
        "Samples were stored at low temperature before sequencing.",
        "The cohort included adults from three regions.",
        "Viral load was measured with quantitative assays.",
        "Statistical analysis used standard regression models.",
        "Further work is needed to confirm these findings.",
        "Masks reduced transmission in crowded settings.",
    ];
    for d in 0..20 {
        let mut paras: Vec<String> = (0..3)
            .map(|p| (0..4).map(|s| filler[(d + p * 2 + s) % filler.len()]).collect::<Vec<_>>().join(" "))
            .collect();
        if format!("doc{d:02}") == PLANTED_DOC {
            paras[1].push_str(" The incubation period of the novel coronavirus in patients was five days.");
        }
        let id = format!("doc{d:02}");
        std::fs::write(dir.join(format!("{id}.json")), record(&id, &format!("Study {d}"), &paras)).unwrap();
    }
}

pub fn litqa(args: &[&str]) -> Output {
    litqa_env(args, &[])
}

pub fn litqa_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = std::process::Command::new(env!("CARGO_BIN_EXE_litqa"));
    cmd.args(args).env_remove("COV19IR_ENDPOINT").env_remove("LITQA_CONFIG");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}
