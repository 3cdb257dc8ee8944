//! Retrieval task loading, construction, and serialization.
//!
//! A task on disk is three JSONL files in the MTEB layout:
//! `queries.jsonl` with `{"_id", "text"}` rows, `corpus.jsonl` with
//! `{"_id", "title", "text"}` rows, and `qrels/test.jsonl` with
//! `{"query-id", "corpus-id", "score"}` rows.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result, Warning};

/// One corpus passage: a title (possibly empty) and its text.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct CorpusEntry {
    pub title: String,
    pub text: String,
}

/// An MTEB-style retrieval task: queries, corpus, and graded relevance
/// judgments. All maps are ordered so iteration is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RetrievalTask {
    pub queries: BTreeMap<String, String>,
    pub corpus: BTreeMap<String, CorpusEntry>,
    /// qid -> cid -> grade. Every referenced qid and cid exists.
    pub qrels: BTreeMap<String, BTreeMap<String, u32>>,
}

impl RetrievalTask {
    /// (query count, corpus count, qrel pair count).
    pub fn counts(&self) -> (usize, usize, usize) {
        let pairs = self.qrels.values().map(BTreeMap::len).sum();
        (self.queries.len(), self.corpus.len(), pairs)
    }

    /// Number of positive (grade >= 1) judgments for a query.
    pub fn positive_count(&self, qid: &str) -> usize {
        self.qrels
            .get(qid)
            .map(|m| m.values().filter(|&&g| g >= 1).count())
            .unwrap_or(0)
    }
}

#[derive(serde::Deserialize)]
struct QueryRow {
    #[serde(rename = "_id")]
    id: String,
    text: String,
}

#[derive(serde::Deserialize)]
struct CorpusRow {
    #[serde(rename = "_id")]
    id: String,
    #[serde(default)]
    title: String,
    text: String,
}

#[derive(serde::Deserialize)]
struct QrelRow {
    #[serde(rename = "query-id")]
    query_id: String,
    #[serde(rename = "corpus-id")]
    corpus_id: String,
    score: serde_json::Value,
}

/// Accept integer grades however the producer spelled them: JSON integer,
/// integral float, or numeric string.
fn parse_grade(value: &serde_json::Value) -> Option<u32> {
    match value {
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_u64() {
                u32::try_from(i).ok()
            } else {
                let f = n.as_f64()?;
                (f >= 0.0 && f.fract() == 0.0 && f <= u32::MAX as f64).then_some(f as u32)
            }
        }
        serde_json::Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn for_each_line<T, F>(path: &Path, mut visit: F) -> Result<()>
where
    T: serde::de::DeserializeOwned,
    F: FnMut(usize, T) -> Result<()>,
{
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: T = serde_json::from_str(line).map_err(|e| {
            Error::data(format!("{}:{}: bad record: {e}", path.display(), idx + 1))
        })?;
        visit(idx + 1, row)?;
    }
    Ok(())
}

/// Load a task directory. Malformed lines fail with their line number;
/// qrels referencing unknown query or corpus ids fail with the dangling
/// ids listed. Queries without a positive judgment stay in the task (and
/// its counts) but are reported as warnings so evaluation can skip them.
pub fn load_task(dir: &Path) -> Result<(RetrievalTask, Vec<Warning>)> {
    let mut task = RetrievalTask::default();

    let queries_path = dir.join("queries.jsonl");
    for_each_line(&queries_path, |lineno, row: QueryRow| {
        if task.queries.insert(row.id.clone(), row.text).is_some() {
            return Err(Error::data(format!(
                "{}:{lineno}: duplicate query id {:?}",
                queries_path.display(),
                row.id
            )));
        }
        Ok(())
    })?;

    let corpus_path = dir.join("corpus.jsonl");
    for_each_line(&corpus_path, |lineno, row: CorpusRow| {
        let entry = CorpusEntry {
            title: row.title,
            text: row.text,
        };
        if task.corpus.insert(row.id.clone(), entry).is_some() {
            return Err(Error::data(format!(
                "{}:{lineno}: duplicate corpus id {:?}",
                corpus_path.display(),
                row.id
            )));
        }
        Ok(())
    })?;

    let qrels_path = dir.join("qrels").join("test.jsonl");
    let mut dangling: Vec<String> = Vec::new();
    for_each_line(&qrels_path, |lineno, row: QrelRow| {
        let grade = parse_grade(&row.score).ok_or_else(|| {
            Error::data(format!(
                "{}:{lineno}: score {} is not a non-negative integer",
                qrels_path.display(),
                row.score
            ))
        })?;
        if !task.queries.contains_key(&row.query_id) {
            dangling.push(format!("query-id {:?}", row.query_id));
        }
        if !task.corpus.contains_key(&row.corpus_id) {
            dangling.push(format!("corpus-id {:?}", row.corpus_id));
        }
        let per_query = task.qrels.entry(row.query_id.clone()).or_default();
        if per_query.insert(row.corpus_id.clone(), grade).is_some() {
            return Err(Error::data(format!(
                "{}:{lineno}: duplicate qrel ({:?}, {:?})",
                qrels_path.display(),
                row.query_id,
                row.corpus_id
            )));
        }
        Ok(())
    })?;
    if !dangling.is_empty() {
        dangling.sort();
        dangling.dedup();
        return Err(Error::data(format!(
            "{}: qrels reference unknown ids: {}",
            qrels_path.display(),
            dangling.join(", ")
        )));
    }
    if task.qrels.is_empty() {
        return Err(Error::data(format!(
            "{}: no relevance judgments",
            qrels_path.display()
        )));
    }

    let mut warnings = Vec::new();
    for qid in task.queries.keys() {
        if task.positive_count(qid) == 0 {
            warnings.push(Warning::new(
                "query_without_positives",
                format!("query {qid:?} has no positive judgment and will not be scored"),
            ));
        }
    }
    Ok((task, warnings))
}

/// Write a task as the three JSONL files [`load_task`] reads, rows in id
/// order. Serialization then loading reproduces the same task.
pub fn save_task(task: &RetrievalTask, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir.join("qrels")).map_err(|e| Error::io(dir, e))?;
    let dump = |path: &Path, body: String| -> Result<()> {
        fs::write(path, body).map_err(|e| Error::io(path, e))
    };

    let mut queries = String::new();
    for (id, text) in &task.queries {
        let row = serde_json::json!({ "_id": id, "text": text });
        writeln!(queries, "{row}").expect("string write");
    }
    dump(&dir.join("queries.jsonl"), queries)?;

    let mut corpus = String::new();
    for (id, entry) in &task.corpus {
        let row = serde_json::json!({ "_id": id, "text": entry.text, "title": entry.title });
        writeln!(corpus, "{row}").expect("string write");
    }
    dump(&dir.join("corpus.jsonl"), corpus)?;

    let mut qrels = String::new();
    for (qid, per_query) in &task.qrels {
        for (cid, grade) in per_query {
            let row =
                serde_json::json!({ "corpus-id": cid, "query-id": qid, "score": grade });
            writeln!(qrels, "{row}").expect("string write");
        }
    }
    dump(&dir.join("qrels").join("test.jsonl"), qrels)
}

/// A question-answer record referencing the paragraphs that support it.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct QaRecord {
    /// Stable query id; positional ids are assigned when absent.
    #[serde(default)]
    pub id: Option<String>,
    pub question: String,
    pub sources: Vec<ParagraphRef>,
}

/// A reference to one paragraph: its document and position within it.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct ParagraphRef {
    pub doc_id: String,
    pub ordinal: usize,
}

/// One source paragraph. Ordinals count per document in input order.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ParagraphRecord {
    pub doc_id: String,
    #[serde(default)]
    pub title: String,
    pub text: String,
}

/// Corpus id of a paragraph: document id plus zero-padded ordinal, the
/// same scheme for every rebuild of the same inputs.
pub fn paragraph_id(doc_id: &str, ordinal: usize) -> String {
    format!("{doc_id}::{ordinal:05}")
}

/// Turn QA pairs and their source paragraphs into a retrieval task.
/// Every resolvable source becomes a grade-1 judgment. A record none of
/// whose sources resolve is dropped with a warning; an individually
/// dangling source on an otherwise resolvable record is warned and
/// skipped.
pub fn build_task(
    qa_records: &[QaRecord],
    paragraphs: &[ParagraphRecord],
) -> Result<(RetrievalTask, Vec<Warning>)> {
    let mut task = RetrievalTask::default();
    let mut per_doc_ordinal: BTreeMap<&str, usize> = BTreeMap::new();
    for paragraph in paragraphs {
        let ordinal = per_doc_ordinal.entry(paragraph.doc_id.as_str()).or_insert(0);
        let cid = paragraph_id(&paragraph.doc_id, *ordinal);
        *ordinal += 1;
        task.corpus.insert(
            cid,
            CorpusEntry {
                title: paragraph.title.clone(),
                text: paragraph.text.clone(),
            },
        );
    }

    let mut warnings = Vec::new();
    for (i, record) in qa_records.iter().enumerate() {
        let qid = record
            .id
            .clone()
            .unwrap_or_else(|| format!("q{:05}", i + 1));
        if task.queries.contains_key(&qid) {
            return Err(Error::data(format!("duplicate query id {qid:?}")));
        }
        let mut judged: BTreeMap<String, u32> = BTreeMap::new();
        for source in &record.sources {
            let cid = paragraph_id(&source.doc_id, source.ordinal);
            if task.corpus.contains_key(&cid) {
                judged.insert(cid, 1);
            } else {
                warnings.push(Warning::new(
                    "dangling_source",
                    format!("query {qid:?}: no paragraph {cid:?}"),
                ));
            }
        }
        if judged.is_empty() {
            warnings.push(Warning::new(
                "dropped_question",
                format!("query {qid:?}: no resolvable source paragraph"),
            ));
            continue;
        }
        task.queries.insert(qid.clone(), record.question.clone());
        task.qrels.insert(qid, judged);
    }
    Ok((task, warnings))
}
