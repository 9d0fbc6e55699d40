use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{content_hash, ContextAnalysis, EntityRecognizer, SentenceSplitter, TrainDataError};
use crate::corpus::Chunk;
use crate::lexicon::{extract_keywords, KeywordLexicon};
use crate::text::slice_chars;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquadAnswer {
    pub text: String,
    /// Char offset of `text` in the context.
    pub answer_start: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquadTriplet {
    pub id: String,
    pub doc_id: String,
    pub question: String,
    pub context: String,
    pub answers: Vec<SquadAnswer>,
}

/// Triplets in emission order (query order, then chunk order).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SquadFile {
    pub triplets: Vec<SquadTriplet>,
}

#[derive(Serialize, Deserialize)]
struct SquadJson {
    version: String,
    data: Vec<SquadArticle>,
}

#[derive(Serialize, Deserialize)]
struct SquadArticle {
    title: String,
    paragraphs: Vec<SquadParagraph>,
}

#[derive(Serialize, Deserialize)]
struct SquadParagraph {
    context: String,
    qas: Vec<SquadQa>,
}

#[derive(Serialize, Deserialize)]
struct SquadQa {
    id: String,
    question: String,
    answers: Vec<SquadAnswer>,
}

impl SquadFile {
    /// SQuAD v1.1 layout: articles by doc id, paragraphs by context, both in
    /// order of first appearance.
    pub fn to_json(&self) -> String {
        let mut articles: Vec<SquadArticle> = Vec::new();
        let mut article_pos: HashMap<&str, usize> = HashMap::new();
        let mut para_pos: HashMap<(&str, &str), usize> = HashMap::new();
        for t in &self.triplets {
            let ai = *article_pos.entry(&t.doc_id).or_insert_with(|| {
                articles.push(SquadArticle { title: t.doc_id.clone(), paragraphs: Vec::new() });
                articles.len() - 1
            });
            let paras = &mut articles[ai].paragraphs;
            let pi = *para_pos.entry((&t.doc_id, &t.context)).or_insert_with(|| {
                paras.push(SquadParagraph { context: t.context.clone(), qas: Vec::new() });
                paras.len() - 1
            });
            paras[pi].qas.push(SquadQa { id: t.id.clone(), question: t.question.clone(), answers: t.answers.clone() });
        }
        let json = SquadJson { version: "1.1".into(), data: articles };
        let mut s = serde_json::to_string_pretty(&json).expect("SQuAD serializes");
        s.push('\n');
        s
    }

    pub fn from_json(s: &str) -> Result<Self, TrainDataError> {
        let json: SquadJson = serde_json::from_str(s).map_err(|e| TrainDataError::MalformedSquad(e.to_string()))?;
        let mut triplets = Vec::new();
        for art in json.data {
            for para in art.paragraphs {
                for qa in para.qas {
                    triplets.push(SquadTriplet {
                        id: qa.id,
                        doc_id: art.title.clone(),
                        question: qa.question,
                        context: para.context.clone(),
                        answers: qa.answers,
                    });
                }
            }
        }
        Ok(Self { triplets })
    }

    pub fn load(path: &Path) -> Result<Self, TrainDataError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn num_answers(&self) -> usize {
        self.triplets.iter().map(|t| t.answers.len()).sum()
    }
}

/// Builds keyword-centric SQuAD triplets for every (query, chunk) pair: the
/// answers to a query are the lines of the chunk selected for each keyword
/// the query mentions.
pub fn build_squad<'a>(
    chunks: impl IntoIterator<Item = &'a Chunk>,
    queries: &[String],
    lex: &KeywordLexicon,
    recognizer: &dyn EntityRecognizer,
    splitter: &SentenceSplitter,
) -> Result<SquadFile, TrainDataError> {
    let chunks: Vec<&Chunk> = chunks.into_iter().collect();
    let analyses: Vec<ContextAnalysis> = chunks
        .par_iter()
        .map(|c| ContextAnalysis::new(&c.text, recognizer, splitter))
        .collect::<Result<_, _>>()?;

    let mut triplets = Vec::new();
    let mut seen_ids = HashSet::new();
    for query in queries {
        let keywords = extract_keywords(query, lex);
        if keywords.is_empty() {
            continue;
        }
        for (chunk, analysis) in chunks.iter().zip(&analyses) {
            let selected: BTreeSet<usize> = keywords.iter().flat_map(|k| analysis.select(k, lex)).collect();
            if selected.is_empty() {
                continue;
            }
            let id = content_hash(&[query, &chunk.text])[..24].to_string();
            if !seen_ids.insert(id.clone()) {
                continue;
            }
            let answers = selected
                .into_iter()
                .map(|i| {
                    let s = &analysis.sentences[i];
                    SquadAnswer { text: s.text.clone(), answer_start: s.start_char }
                })
                .collect();
            triplets.push(SquadTriplet {
                id,
                doc_id: chunk.doc_id.clone(),
                question: query.clone(),
                context: chunk.text.clone(),
                answers,
            });
        }
    }
    if triplets.is_empty() {
        return Err(TrainDataError::NoTriplets);
    }
    Ok(SquadFile { triplets })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SquadReport {
    pub triplets: usize,
    pub answers: usize,
    pub sound_answers: usize,
    pub problems: Vec<String>,
}

impl SquadReport {
    pub fn is_sound(&self) -> bool {
        self.problems.is_empty()
    }

    pub fn soundness(&self) -> f64 {
        if self.answers == 0 {
            1.0
        } else {
            self.sound_answers as f64 / self.answers as f64
        }
    }
}

/// Checks that every answer is reproduced by its offset and that no triplet
/// is answerless.
pub fn validate_squad(file: &SquadFile) -> SquadReport {
    let mut r = SquadReport { triplets: file.triplets.len(), ..Default::default() };
    for t in &file.triplets {
        if t.answers.is_empty() {
            r.problems.push(format!("{}: no answers", t.id));
        }
        for a in &t.answers {
            r.answers += 1;
            let end = a.answer_start + a.text.chars().count();
            if !a.text.is_empty() && slice_chars(&t.context, a.answer_start, end) == Some(a.text.as_str()) {
                r.sound_answers += 1;
            } else {
                r.problems.push(format!("{}: answer {:?} not found at {}", t.id, a.text, a.answer_start));
            }
        }
    }
    r
}
