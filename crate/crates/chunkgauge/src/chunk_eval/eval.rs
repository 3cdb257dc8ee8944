//! Retrieval-based evaluation of one chunker configuration.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::chunk::{chunk_document, ChunkContext, ChunkerConfig};
use crate::error::{Error, Result, Warning};
use crate::sig::ser_sig;
use crate::stats;
use crate::tokenize::CharSpan;
use crate::vectorstore::VectorIndex;

use super::{
    gold_token_set_from_offsets, metrics_from_counts, precision_omega, CorpusSet, QuestionRecord,
    SpanMetrics,
};

/// Mean and population standard deviation of one metric over questions.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricAggregate {
    #[serde(serialize_with = "ser_sig")]
    pub mean: f64,
    #[serde(serialize_with = "ser_sig")]
    pub std: f64,
}

/// Aggregates for all six reported metrics.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct AggregateSet {
    pub iou: MetricAggregate,
    pub precision: MetricAggregate,
    pub recall: MetricAggregate,
    pub f1: MetricAggregate,
    pub f2: MetricAggregate,
    pub precision_omega: MetricAggregate,
}

/// Scores for one question, kept in the report so every aggregate can be
/// recomputed from the serialized rows.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PerQuestionRow {
    pub question_id: String,
    pub corpus: String,
    pub doc_id: String,
    pub metrics: SpanMetrics,
    #[serde(serialize_with = "ser_sig")]
    pub precision_omega: f64,
}

/// What produced a report: tokenizer and embedding provider identifiers.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Provenance {
    pub tokenizer: String,
    pub embedder: String,
}

/// Evaluation result for one chunker configuration.
///
/// The global aggregates average over per-question rows, not over corpus
/// means, so corpora with more questions weigh proportionally more.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChunkEvalReport {
    pub short_name: String,
    pub config: ChunkerConfig,
    pub k: usize,
    pub provenance: Provenance,
    pub question_count: usize,
    pub global: AggregateSet,
    pub per_corpus: BTreeMap<String, AggregateSet>,
    pub per_question: Vec<PerQuestionRow>,
    pub warnings: Vec<Warning>,
}

/// Tokenization-derived facts about one document under evaluation.
struct DocInfo {
    char_len: usize,
    offsets: Vec<CharSpan>,
    /// Token index set of each chunk, in chunk order.
    chunk_token_sets: Vec<BTreeSet<usize>>,
}

/// Where a retrieved chunk came from and how many tokens it carries.
struct ChunkMeta {
    doc_id: String,
    token_range: (usize, usize),
    token_count: usize,
}

/// The contiguous run of tokens whose offsets intersect `span`.
fn token_range(offsets: &[CharSpan], span: &CharSpan) -> (usize, usize) {
    let lo = offsets.partition_point(|t| t.end <= span.start);
    let hi = offsets.partition_point(|t| t.start < span.end);
    (lo, hi.max(lo))
}

/// Chunk every document with `config`, index the chunk embeddings per
/// corpus, retrieve the top-k chunks per question, and score retrieved
/// token sets against gold token sets. Questions are evaluated in parallel
/// and rows are sorted by question id, so the report is deterministic for
/// deterministic providers.
pub fn evaluate_chunking(
    corpus_set: &CorpusSet,
    questions: &[QuestionRecord],
    config: &ChunkerConfig,
    ctx: &ChunkContext,
    k: usize,
) -> Result<ChunkEvalReport> {
    if k == 0 {
        return Err(Error::config("retrieval depth k must be >= 1"));
    }
    let embedder = ctx
        .embedder
        .ok_or_else(|| Error::config("chunk evaluation requires an embedding provider"))?;
    for q in questions {
        if corpus_set.corpus_of(&q.doc_id).is_none() {
            return Err(Error::data(format!(
                "question {}: unknown doc_id {:?}",
                q.id, q.doc_id
            )));
        }
    }

    let mut warnings: Vec<Warning> = Vec::new();
    let mut docs: HashMap<&str, DocInfo> = HashMap::new();
    let mut indexes: BTreeMap<&str, (VectorIndex, HashMap<String, ChunkMeta>)> = BTreeMap::new();

    for (corpus, documents) in corpus_set.corpora() {
        let mut metas: HashMap<String, ChunkMeta> = HashMap::new();
        let mut texts: Vec<String> = Vec::new();
        let mut ids: Vec<String> = Vec::new();
        for (doc_id, text) in documents {
            let output = chunk_document(doc_id, text, config, ctx)?;
            warnings.extend(output.warnings);
            let offsets = ctx.tokenizer.encode(text).offsets;
            let mut chunk_token_sets = Vec::with_capacity(output.chunks.len());
            for chunk in output.chunks {
                let range = token_range(&offsets, &chunk.span);
                chunk_token_sets.push((range.0..range.1).collect());
                metas.insert(
                    chunk.chunk_id.clone(),
                    ChunkMeta {
                        doc_id: doc_id.clone(),
                        token_range: range,
                        token_count: chunk.token_count,
                    },
                );
                ids.push(chunk.chunk_id);
                texts.push(chunk.text);
            }
            docs.insert(
                doc_id.as_str(),
                DocInfo {
                    char_len: text.chars().count(),
                    offsets,
                    chunk_token_sets,
                },
            );
        }
        let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
        let vectors = embedder.embed_batch(&refs)?;
        let mut index = VectorIndex::new(embedder.dims())?;
        for (chunk_id, vector) in ids.into_iter().zip(vectors) {
            index.insert(chunk_id, vector)?;
        }
        index.freeze();
        indexes.insert(corpus, (index, metas));
    }

    let question_texts: Vec<&str> = questions.iter().map(|q| q.question.as_str()).collect();
    let question_vectors = embedder.embed_batch(&question_texts)?;

    let mut rows: Vec<(PerQuestionRow, Vec<Warning>)> = questions
        .par_iter()
        .zip(question_vectors.par_iter())
        .map(|(q, q_vector)| {
            let corpus = corpus_set.corpus_of(&q.doc_id).expect("resolved above");
            let info = &docs[q.doc_id.as_str()];
            let (gold, q_warnings) =
                gold_token_set_from_offsets(&info.offsets, info.char_len, &q.excerpts, &q.id)?;

            let (index, metas) = &indexes[corpus];
            let mut own_tokens: BTreeSet<usize> = BTreeSet::new();
            let mut foreign_tokens = 0usize;
            for (chunk_id, _score) in index.search(q_vector, k)? {
                let meta = &metas[&chunk_id];
                if meta.doc_id == q.doc_id {
                    own_tokens.extend(meta.token_range.0..meta.token_range.1);
                } else {
                    foreign_tokens += meta.token_count;
                }
            }
            let intersection = gold.intersection(&own_tokens).count();
            let union = gold.union(&own_tokens).count() + foreign_tokens;
            let metrics = metrics_from_counts(
                gold.len(),
                own_tokens.len() + foreign_tokens,
                intersection,
                union,
            );
            let row = PerQuestionRow {
                question_id: q.id.clone(),
                corpus: corpus.to_string(),
                doc_id: q.doc_id.clone(),
                metrics,
                precision_omega: precision_omega(&gold, &info.chunk_token_sets),
            };
            Ok((row, q_warnings))
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.0.question_id.cmp(&b.0.question_id));

    let mut per_question = Vec::with_capacity(rows.len());
    for (row, q_warnings) in rows {
        per_question.push(row);
        warnings.extend(q_warnings);
    }

    let mut by_corpus: BTreeMap<String, Vec<&PerQuestionRow>> = BTreeMap::new();
    for row in &per_question {
        by_corpus.entry(row.corpus.clone()).or_default().push(row);
    }
    let per_corpus = by_corpus
        .into_iter()
        .map(|(corpus, rows)| (corpus, aggregate(&rows)))
        .collect();

    Ok(ChunkEvalReport {
        short_name: config.short_name(),
        config: config.clone(),
        k,
        provenance: Provenance {
            tokenizer: ctx.tokenizer.identifier().to_string(),
            embedder: embedder.identifier(),
        },
        question_count: per_question.len(),
        global: aggregate(&per_question.iter().collect::<Vec<_>>()),
        per_corpus,
        per_question,
        warnings,
    })
}

fn aggregate(rows: &[&PerQuestionRow]) -> AggregateSet {
    let summarize = |extract: fn(&PerQuestionRow) -> f64| {
        let values: Vec<f64> = rows.iter().map(|r| extract(r)).collect();
        MetricAggregate {
            mean: stats::mean(&values),
            std: stats::population_std(&values),
        }
    };
    AggregateSet {
        iou: summarize(|r| r.metrics.iou),
        precision: summarize(|r| r.metrics.precision),
        recall: summarize(|r| r.metrics.recall),
        f1: summarize(|r| r.metrics.f1),
        f2: summarize(|r| r.metrics.f2),
        precision_omega: summarize(|r| r.precision_omega),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chunk::ChunkContext;
    use crate::embed::{DeterministicProvider, Embedder};
    use crate::tokenize::WhitespaceTokenizer;
    use std::sync::Arc;

    fn question(id: &str, text: &str, doc_id: &str, start: usize, end: usize) -> QuestionRecord {
        QuestionRecord {
            id: id.to_string(),
            question: text.to_string(),
            doc_id: doc_id.to_string(),
            excerpts: vec![CharSpan::new(start, end)],
        }
    }

    fn embedder() -> Embedder {
        Embedder::new(Arc::new(DeterministicProvider::new(8)))
    }

    /// Two one-chunk documents; each question is its document's full text,
    /// so the matching chunk scores cosine 1 and ranks first.
    fn tiny_fixture() -> (CorpusSet, Vec<QuestionRecord>) {
        let mut corpus = CorpusSet::new();
        corpus.add_document("demo", "d1", "alpha beta gamma").unwrap();
        corpus.add_document("demo", "d2", "delta epsilon zeta").unwrap();
        let questions = vec![
            question("q1", "alpha beta gamma", "d1", 0, 10),
            question("q2", "delta epsilon zeta", "d2", 0, 18),
        ];
        (corpus, questions)
    }

    #[test]
    fn matching_questions_retrieve_their_own_chunk() {
        let (corpus, questions) = tiny_fixture();
        let tok = WhitespaceTokenizer::new();
        let emb = embedder();
        let ctx = ChunkContext::new(&tok).with_embedder(&emb);
        let config = ChunkerConfig::fixed(100, 0).unwrap();

        let report = evaluate_chunking(&corpus, &questions, &config, &ctx, 1).unwrap();
        assert_eq!(report.question_count, 2);
        assert_eq!(report.global.recall.mean, 1.0);
        assert_eq!(report.global.recall.std, 0.0);
        // q2's excerpt spans the whole document, so its retrieval is exact.
        let q2 = &report.per_question[1];
        assert_eq!(q2.question_id, "q2");
        assert_eq!(q2.metrics.iou, 1.0);
        assert_eq!(q2.precision_omega, 1.0);
        assert_eq!(report.provenance.tokenizer, "whitespace");
        assert_eq!(report.short_name, "FX100-0");
    }

    #[test]
    fn cross_document_hits_charge_their_full_token_count() {
        let (corpus, mut questions) = tiny_fixture();
        questions.truncate(1);
        // Gold covers all of d1 so only the foreign chunk dilutes.
        questions[0].excerpts = vec![CharSpan::new(0, 16)];
        let tok = WhitespaceTokenizer::new();
        let emb = embedder();
        let ctx = ChunkContext::new(&tok).with_embedder(&emb);
        let config = ChunkerConfig::fixed(100, 0).unwrap();

        // k=2 over a two-chunk corpus drags the foreign document's chunk
        // into every retrieval: 3 own tokens + 3 foreign tokens.
        let report = evaluate_chunking(&corpus, &questions, &config, &ctx, 2).unwrap();
        let m = &report.per_question[0].metrics;
        assert_eq!(m.recall, 1.0);
        assert_eq!(m.precision, 0.5);
        assert_eq!(m.iou, 0.5);
    }

    #[test]
    fn global_mean_averages_questions_not_corpora() {
        let mut corpus = CorpusSet::new();
        corpus.add_document("one", "d1", "alpha beta").unwrap();
        corpus.add_document("two", "d2", "gamma delta").unwrap();
        // Three questions on corpus two, one on corpus one. The d1
        // question covers half its document, the d2 questions all of it.
        let questions = vec![
            question("q1", "alpha beta", "d1", 0, 5),
            question("q2", "gamma delta", "d2", 0, 11),
            question("q3", "gamma delta", "d2", 0, 11),
            question("q4", "gamma delta", "d2", 0, 11),
        ];
        let tok = WhitespaceTokenizer::new();
        let emb = embedder();
        let ctx = ChunkContext::new(&tok).with_embedder(&emb);
        let config = ChunkerConfig::fixed(100, 0).unwrap();

        let report = evaluate_chunking(&corpus, &questions, &config, &ctx, 1).unwrap();
        // Question-weighted mean IoU is (0.5 + 1 + 1 + 1) / 4, not the
        // corpus-mean average (0.5 + 1) / 2.
        assert_eq!(report.global.iou.mean, 0.875);
        assert_eq!(report.per_corpus["one"].iou.mean, 0.5);
        assert_eq!(report.per_corpus["two"].iou.mean, 1.0);
    }

    #[test]
    fn rows_sort_by_question_id_regardless_of_input_order() {
        let (corpus, mut questions) = tiny_fixture();
        questions.reverse();
        let tok = WhitespaceTokenizer::new();
        let emb = embedder();
        let ctx = ChunkContext::new(&tok).with_embedder(&emb);
        let config = ChunkerConfig::fixed(100, 0).unwrap();

        let report = evaluate_chunking(&corpus, &questions, &config, &ctx, 1).unwrap();
        let ids: Vec<&str> = report
            .per_question
            .iter()
            .map(|r| r.question_id.as_str())
            .collect();
        assert_eq!(ids, vec!["q1", "q2"]);
    }

    #[test]
    fn zero_questions_make_an_empty_report() {
        let (corpus, _) = tiny_fixture();
        let tok = WhitespaceTokenizer::new();
        let emb = embedder();
        let ctx = ChunkContext::new(&tok).with_embedder(&emb);
        let config = ChunkerConfig::fixed(100, 0).unwrap();

        let report = evaluate_chunking(&corpus, &[], &config, &ctx, 10).unwrap();
        assert_eq!(report.question_count, 0);
        assert!(report.per_question.is_empty());
        assert!(report.per_corpus.is_empty());
        assert_eq!(report.global.iou.mean, 0.0);
    }

    #[test]
    fn unknown_doc_id_is_a_data_error() {
        let (corpus, mut questions) = tiny_fixture();
        questions[0].doc_id = "ghost".to_string();
        let tok = WhitespaceTokenizer::new();
        let emb = embedder();
        let ctx = ChunkContext::new(&tok).with_embedder(&emb);
        let config = ChunkerConfig::fixed(100, 0).unwrap();

        let err = evaluate_chunking(&corpus, &questions, &config, &ctx, 1).unwrap_err();
        assert!(matches!(&err, Error::Data(m) if m.contains("ghost")));
    }

    #[test]
    fn missing_embedder_and_zero_k_are_config_errors() {
        let (corpus, questions) = tiny_fixture();
        let tok = WhitespaceTokenizer::new();
        let config = ChunkerConfig::fixed(100, 0).unwrap();

        let ctx = ChunkContext::new(&tok);
        let err = evaluate_chunking(&corpus, &questions, &config, &ctx, 1).unwrap_err();
        assert!(matches!(err, Error::Config(_)));

        let emb = embedder();
        let ctx = ChunkContext::new(&tok).with_embedder(&emb);
        let err = evaluate_chunking(&corpus, &questions, &config, &ctx, 0).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn serialized_global_mean_recomputes_from_rows() {
        let (corpus, questions) = tiny_fixture();
        let tok = WhitespaceTokenizer::new();
        let emb = embedder();
        let ctx = ChunkContext::new(&tok).with_embedder(&emb);
        let config = ChunkerConfig::fixed(4, 1).unwrap();

        let report = evaluate_chunking(&corpus, &questions, &config, &ctx, 2).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
        let rows = json["per_question"].as_array().unwrap();
        let mean_of = |metric: &str| {
            let sum: f64 = rows
                .iter()
                .map(|r| r["metrics"][metric].as_f64().unwrap())
                .sum();
            sum / rows.len() as f64
        };
        for metric in ["iou", "precision", "recall", "f1", "f2"] {
            let reported = json["global"][metric]["mean"].as_f64().unwrap();
            assert!(
                (mean_of(metric) - reported).abs() < 1e-6,
                "{metric}: rows give {}, report says {reported}",
                mean_of(metric)
            );
        }
    }
}
