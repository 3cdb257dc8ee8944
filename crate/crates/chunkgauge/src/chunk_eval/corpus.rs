//! Corpora of plain-text documents and the annotated question sets that
//! reference them.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::QuestionRecord;

/// A named collection of corpora, each a map of document id to text.
/// Document ids are unique across the whole set so a question's `doc_id`
/// resolves without naming its corpus.
#[derive(Debug, Default)]
pub struct CorpusSet {
    corpora: BTreeMap<String, BTreeMap<String, String>>,
    doc_corpus: HashMap<String, String>,
}

impl CorpusSet {
    pub fn new() -> Self {
        CorpusSet::default()
    }

    /// Add one document. A `doc_id` already present anywhere in the set is
    /// a data error.
    pub fn add_document(
        &mut self,
        corpus: &str,
        doc_id: &str,
        text: impl Into<String>,
    ) -> Result<()> {
        if let Some(existing) = self.doc_corpus.get(doc_id) {
            return Err(Error::data(format!(
                "duplicate doc_id {doc_id:?}: already present in corpus {existing:?}"
            )));
        }
        self.doc_corpus.insert(doc_id.to_string(), corpus.to_string());
        self.corpora
            .entry(corpus.to_string())
            .or_default()
            .insert(doc_id.to_string(), text.into());
        Ok(())
    }

    /// Load every plain file in `dir` into the named corpus, doc_id = file
    /// stem. Entries load in name order; dotfiles and subdirectories are
    /// skipped. Returns the number of documents added.
    pub fn load_dir(&mut self, corpus: &str, dir: &Path) -> Result<usize> {
        let mut paths: Vec<_> = fs::read_dir(dir)
            .map_err(|e| Error::io(dir, e))?
            .collect::<std::io::Result<Vec<_>>>()
            .map_err(|e| Error::io(dir, e))?
            .into_iter()
            .map(|entry| entry.path())
            .collect();
        paths.sort();
        let mut added = 0;
        for path in paths {
            let hidden = match path.file_name().and_then(|n| n.to_str()) {
                Some(name) => name.starts_with('.'),
                None => true,
            };
            if hidden || !path.is_file() {
                continue;
            }
            let stem = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .expect("file with a name has a stem");
            let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            self.add_document(corpus, &stem, text)?;
            added += 1;
        }
        Ok(added)
    }

    /// The corpus a document lives in, if any.
    pub fn corpus_of(&self, doc_id: &str) -> Option<&str> {
        self.doc_corpus.get(doc_id).map(String::as_str)
    }

    pub fn document(&self, doc_id: &str) -> Option<&str> {
        let corpus = self.doc_corpus.get(doc_id)?;
        self.corpora[corpus].get(doc_id).map(String::as_str)
    }

    /// Corpora in name order, each with documents in id order.
    pub fn corpora(&self) -> impl Iterator<Item = (&str, &BTreeMap<String, String>)> {
        self.corpora.iter().map(|(name, docs)| (name.as_str(), docs))
    }

    /// Total number of documents across all corpora.
    pub fn len(&self) -> usize {
        self.doc_corpus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.doc_corpus.is_empty()
    }
}

/// Load a question set from a JSONL file, one record per line:
/// `{"id", "question", "doc_id", "excerpts": [{"start", "end"}]}`.
/// Blank lines are skipped; any malformed or degenerate record is a data
/// error naming the offending line.
pub fn load_questions(path: &Path) -> Result<Vec<QuestionRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut questions = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fail = |what: String| {
            Error::data(format!("{}:{}: {what}", path.display(), idx + 1))
        };
        let record: QuestionRecord = serde_json::from_str(line)
            .map_err(|e| fail(format!("bad question record: {e}")))?;
        if record.question.trim().is_empty() {
            return Err(fail(format!("question {:?} has empty text", record.id)));
        }
        if record.excerpts.is_empty() {
            return Err(fail(format!("question {:?} has no excerpts", record.id)));
        }
        questions.push(record);
    }
    Ok(questions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn documents_resolve_across_corpora() {
        let mut set = CorpusSet::new();
        set.add_document("chem", "acids", "acid text").unwrap();
        set.add_document("bio", "cells", "cell text").unwrap();
        assert_eq!(set.corpus_of("acids"), Some("chem"));
        assert_eq!(set.document("cells"), Some("cell text"));
        assert_eq!(set.corpus_of("missing"), None);
        assert_eq!(set.len(), 2);
        let names: Vec<&str> = set.corpora().map(|(n, _)| n).collect();
        assert_eq!(names, vec!["bio", "chem"]);
    }

    #[test]
    fn duplicate_doc_ids_are_rejected_across_corpora() {
        let mut set = CorpusSet::new();
        set.add_document("a", "doc", "one").unwrap();
        let err = set.add_document("b", "doc", "two").unwrap_err();
        assert!(matches!(&err, Error::Data(m) if m.contains("doc")));
    }

    #[test]
    fn load_dir_uses_file_stems_in_name_order() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("beta.txt"), "beta body").unwrap();
        fs::write(dir.path().join("alpha.txt"), "alpha body").unwrap();
        fs::write(dir.path().join(".hidden"), "skip me").unwrap();
        fs::create_dir(dir.path().join("nested")).unwrap();

        let mut set = CorpusSet::new();
        let added = set.load_dir("demo", dir.path()).unwrap();
        assert_eq!(added, 2);
        assert_eq!(set.document("alpha"), Some("alpha body"));
        assert_eq!(set.document("beta"), Some("beta body"));
    }

    #[test]
    fn missing_directory_is_an_io_error() {
        let mut set = CorpusSet::new();
        let err = set.load_dir("demo", Path::new("/no/such/dir")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn questions_load_from_jsonl() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            file,
            r#"{{"id":"q1","question":"what is it","doc_id":"d1","excerpts":[{{"start":0,"end":5}}]}}"#
        )
        .unwrap();
        writeln!(file).unwrap();
        writeln!(
            file,
            r#"{{"id":"q2","question":"and this","doc_id":"d2","excerpts":[{{"start":3,"end":9}},{{"start":1,"end":4}}]}}"#
        )
        .unwrap();

        let questions = load_questions(file.path()).unwrap();
        assert_eq!(questions.len(), 2);
        assert_eq!(questions[0].id, "q1");
        assert_eq!(questions[1].excerpts.len(), 2);
    }

    #[test]
    fn malformed_lines_name_their_line_number() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            file,
            r#"{{"id":"q1","question":"ok","doc_id":"d","excerpts":[{{"start":0,"end":1}}]}}"#
        )
        .unwrap();
        writeln!(file, "not json").unwrap();
        let err = load_questions(file.path()).unwrap_err();
        assert!(matches!(&err, Error::Data(m) if m.contains(":2:")));
    }

    #[test]
    fn degenerate_records_are_data_errors() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            file,
            r#"{{"id":"q1","question":"ok","doc_id":"d","excerpts":[]}}"#
        )
        .unwrap();
        let err = load_questions(file.path()).unwrap_err();
        assert!(matches!(&err, Error::Data(m) if m.contains("no excerpts")));

        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(
            file,
            r#"{{"id":"q1","question":"  ","doc_id":"d","excerpts":[{{"start":0,"end":1}}]}}"#
        )
        .unwrap();
        let err = load_questions(file.path()).unwrap_err();
        assert!(matches!(&err, Error::Data(m) if m.contains("empty text")));
    }
}
