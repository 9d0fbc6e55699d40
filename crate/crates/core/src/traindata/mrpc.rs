use std::collections::{HashMap, HashSet};
use std::path::Path;

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{content_hash, SentenceSplitter, SquadFile, TrainDataError};

pub const MRPC_HEADER: &str = "Quality\t#1 ID\t#2 ID\t#1 String\t#2 String";

/// One sentence pair. `id_a` is the id of the SQuAD triplet the pair was
/// drawn from; `id_b` is a content hash of `sentence_b`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MrpcPair {
    pub label: u8,
    pub id_a: String,
    pub id_b: String,
    pub sentence_a: String,
    pub sentence_b: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MrpcFile {
    pub pairs: Vec<MrpcPair>,
}

/// Tabs and line breaks cannot appear inside a TSV field.
fn tsv_field(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

impl MrpcFile {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from(MRPC_HEADER);
        out.push('\n');
        for p in &self.pairs {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\t{}\n",
                p.label,
                tsv_field(&p.id_a),
                tsv_field(&p.id_b),
                tsv_field(&p.sentence_a),
                tsv_field(&p.sentence_b)
            ));
        }
        out
    }

    pub fn from_tsv(s: &str) -> Result<Self, TrainDataError> {
        let mut lines = s.lines();
        if lines.next() != Some(MRPC_HEADER) {
            return Err(TrainDataError::MalformedMrpc("missing header".into()));
        }
        let mut pairs = Vec::new();
        for (i, line) in lines.enumerate() {
            let f: Vec<&str> = line.split('\t').collect();
            let bad = || TrainDataError::MalformedMrpc(format!("line {}", i + 2));
            if f.len() != 5 {
                return Err(bad());
            }
            let label = match f[0] {
                "0" => 0,
                "1" => 1,
                _ => return Err(bad()),
            };
            pairs.push(MrpcPair {
                label,
                id_a: f[1].into(),
                id_b: f[2].into(),
                sentence_a: f[3].into(),
                sentence_b: f[4].into(),
            });
        }
        Ok(Self { pairs })
    }

    pub fn load(path: &Path) -> Result<Self, TrainDataError> {
        Self::from_tsv(&std::fs::read_to_string(path)?)
    }

    pub fn positives(&self) -> usize {
        self.pairs.iter().filter(|p| p.label == 1).count()
    }

    pub fn negatives(&self) -> usize {
        self.pairs.iter().filter(|p| p.label == 0).count()
    }
}

fn short_hash(s: &str) -> String {
    content_hash(&[s])[..16].to_string()
}

fn negative_budget(positives: usize, neg_ratio: f64) -> usize {
    (neg_ratio * positives as f64 + 1e-9).floor() as usize
}

fn dedup(v: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut seen = HashSet::new();
    v.into_iter().filter(|s| seen.insert(s.clone())).collect()
}

/// Salvages a SQuAD file into sentence pairs: answer sentences are positives;
/// context sentences absent from every answer of the question are negative
/// candidates, sampled down to `neg_ratio` times the triplet's positives.
/// The result is shuffled with a generator seeded from `seed`.
pub fn build_mrpc(
    squad: &SquadFile,
    seed: u64,
    neg_ratio: f64,
    splitter: &SentenceSplitter,
) -> Result<MrpcFile, TrainDataError> {
    if squad.triplets.is_empty() {
        return Err(TrainDataError::EmptySquad);
    }
    let mut answers_of: HashMap<&str, Vec<&str>> = HashMap::new();
    for t in &squad.triplets {
        answers_of.entry(&t.question).or_default().extend(t.answers.iter().map(|a| a.text.as_str()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for t in &squad.triplets {
        let positives = dedup(t.answers.iter().flat_map(|a| splitter.split(&a.text)).map(|s| s.text));
        let answers = &answers_of[t.question.as_str()];
        let eligible = dedup(
            splitter
                .split(&t.context)
                .into_iter()
                .map(|s| s.text)
                .filter(|s| !answers.iter().any(|a| a.contains(s.as_str()))),
        );
        let n_neg = negative_budget(positives.len(), neg_ratio).min(eligible.len());
        let mut picked = index::sample(&mut rng, eligible.len(), n_neg).into_vec();
        picked.sort_unstable();

        let pair = |label, s: &str| MrpcPair {
            label,
            id_a: t.id.clone(),
            id_b: short_hash(s),
            sentence_a: t.question.clone(),
            sentence_b: s.to_string(),
        };
        pairs.extend(positives.iter().map(|s| pair(1, s)));
        pairs.extend(picked.into_iter().map(|i| pair(0, &eligible[i])));
    }
    pairs.shuffle(&mut rng);
    Ok(MrpcFile { pairs })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MrpcReport {
    pub positives: usize,
    pub negatives: usize,
    pub problems: Vec<String>,
}

impl MrpcReport {
    pub fn is_sound(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Brute-force check of a pair file against the SQuAD file it came from:
/// label-1 sentences lie inside an answer of their question, label-0
/// sentences lie in the triplet's context and in no answer of the question,
/// and per triplet the negative count is within one pair of `neg_ratio`
/// times the positives (or exhausts the candidates).
pub fn validate_mrpc(
    mrpc: &MrpcFile,
    squad: &SquadFile,
    neg_ratio: f64,
    splitter: &SentenceSplitter,
) -> MrpcReport {
    let mut r = MrpcReport::default();
    let by_id: HashMap<&str, _> = squad.triplets.iter().map(|t| (t.id.as_str(), t)).collect();
    let mut answers_of: HashMap<&str, Vec<String>> = HashMap::new();
    for t in &squad.triplets {
        answers_of.entry(&t.question).or_default().extend(t.answers.iter().map(|a| tsv_field(&a.text)));
    }
    let mut counts: HashMap<&str, (usize, usize)> = HashMap::new();

    for p in &mrpc.pairs {
        let Some(t) = by_id.get(p.id_a.as_str()) else {
            r.problems.push(format!("pair references unknown triplet {}", p.id_a));
            continue;
        };
        let b = tsv_field(&p.sentence_b);
        if tsv_field(&t.question) != tsv_field(&p.sentence_a) {
            r.problems.push(format!("pair for {} carries the wrong question", p.id_a));
        }
        let answers = &answers_of[t.question.as_str()];
        let in_answer = answers.iter().any(|a| a.contains(&b));
        let c = counts.entry(&t.id).or_default();
        if p.label == 1 {
            r.positives += 1;
            c.0 += 1;
            if !in_answer {
                r.problems.push(format!("positive {b:?} is not inside any answer"));
            }
        } else {
            r.negatives += 1;
            c.1 += 1;
            if in_answer || !tsv_field(&t.context).contains(&b) {
                r.problems.push(format!("negative {b:?} overlaps an answer or is missing from the context"));
            }
        }
    }

    for t in &squad.triplets {
        let (pos, neg) = counts.get(t.id.as_str()).copied().unwrap_or_default();
        let answers = &answers_of[t.question.as_str()];
        let eligible: HashSet<String> = splitter
            .split(&t.context)
            .into_iter()
            .map(|s| tsv_field(&s.text))
            .filter(|s| !answers.iter().any(|a| a.contains(s.as_str())))
            .collect();
        let target = neg_ratio * pos as f64;
        let near = (neg as f64 - target).abs() <= 1.0 + 1e-9;
        let exhausted = neg == eligible.len() && (neg as f64) < target;
        if !(near || exhausted) {
            r.problems.push(format!("triplet {}: {neg} negatives for {pos} positives", t.id));
        }
    }
    r
}
