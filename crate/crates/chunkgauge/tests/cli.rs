//! End-to-end tests of the installed binary: exit codes, the JSON-lines
//! stderr contract, config resolution, and grid checkpoint reuse.

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chunkgauge"))
        .args(args)
        .current_dir(dir)
        .env_remove("CHUNKGAUGE_CONFIG")
        .output()
        .expect("binary runs")
}

fn stdout_lines(output: &Output) -> Vec<String> {
    String::from_utf8(output.stdout.clone())
        .expect("utf-8 stdout")
        .lines()
        .map(str::to_string)
        .collect()
}

fn stderr_json_lines(output: &Output) -> Vec<serde_json::Value> {
    String::from_utf8(output.stderr.clone())
        .expect("utf-8 stderr")
        .lines()
        .map(|line| serde_json::from_str(line).unwrap_or_else(|e| panic!("bad stderr line {line:?}: {e}")))
        .collect()
}

#[test]
fn chunk_writes_one_json_row_per_chunk() {
    let dir = TempDir::new().expect("tempdir");
    let doc = "alpha beta gamma delta epsilon zeta eta theta iota kappa";
    std::fs::write(dir.path().join("doc.txt"), doc).expect("write doc");

    let output = run(dir.path(), &["chunk", "doc.txt", "FX4-0"]);
    assert_eq!(output.status.code(), Some(0), "stderr: {:?}", output.stderr);
    assert!(output.stderr.is_empty());

    let rows: Vec<serde_json::Value> = stdout_lines(&output)
        .iter()
        .map(|line| serde_json::from_str(line).expect("json row"))
        .collect();
    assert_eq!(rows.len(), 3, "10 tokens at FX4-0 split 4/4/2");
    let mut rebuilt = String::new();
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row["doc_id"], "doc");
        assert_eq!(row["chunk_id"], format!("doc::{i:05}"));
        assert!(row["token_count"].as_u64().expect("count") <= 4);
        assert!(row["start"].is_u64() && row["end"].is_u64());
        rebuilt.push_str(row["text"].as_str().expect("text"));
    }
    assert_eq!(rebuilt, doc, "overlap-0 rows must concatenate to the document");
}

#[test]
fn chunk_of_an_empty_document_writes_nothing() {
    let dir = TempDir::new().expect("tempdir");
    std::fs::write(dir.path().join("empty.txt"), "").expect("write doc");
    let output = run(dir.path(), &["chunk", "empty.txt", "FX8-0"]);
    assert_eq!(output.status.code(), Some(0));
    assert!(output.stdout.is_empty());
    assert!(output.stderr.is_empty());
}

#[test]
fn bad_short_name_exits_with_the_config_code() {
    let dir = TempDir::new().expect("tempdir");
    std::fs::write(dir.path().join("doc.txt"), "a b c").expect("write doc");
    let output = run(dir.path(), &["chunk", "doc.txt", "XX9"]);
    assert_eq!(output.status.code(), Some(2));

    let lines = stderr_json_lines(&output);
    let last = lines.last().expect("an error line");
    assert_eq!(last["kind"], "error");
    assert!(
        last["message"].as_str().expect("message").contains("short name"),
        "unexpected message: {last}"
    );
}

#[test]
fn missing_document_exits_with_the_data_code() {
    let dir = TempDir::new().expect("tempdir");
    let output = run(dir.path(), &["chunk", "nope.txt", "FX8-0"]);
    assert_eq!(output.status.code(), Some(3));
    let lines = stderr_json_lines(&output);
    assert_eq!(lines.last().expect("error line")["kind"], "error");
}

#[test]
fn unreachable_provider_exits_with_the_provider_code() {
    let dir = TempDir::new().expect("tempdir");
    // Enough sentences that K8 cannot take the trivial single-piece path
    // and must embed, which is the call that hits the dead endpoint.
    let doc: String = (0..12)
        .map(|i| format!("word{i} item{i} unit{i} part{i}. "))
        .collect();
    std::fs::write(dir.path().join("doc.txt"), doc.trim_end()).expect("write doc");
    std::fs::write(
        dir.path().join("offline.toml"),
        "[provider.bad]\n\
         kind = \"remote\"\n\
         endpoint = \"http://127.0.0.1:9/embed\"\n\
         model = \"none\"\n\
         dims = 8\n\
         timeout_secs = 1\n",
    )
    .expect("write config");

    // K8 needs embeddings, which forces a call to the unreachable endpoint.
    let output = run(
        dir.path(),
        &["--config", "offline.toml", "chunk", "doc.txt", "K8", "--provider", "bad"],
    );
    assert_eq!(output.status.code(), Some(4), "stderr: {:?}", output.stderr);
    let lines = stderr_json_lines(&output);
    assert_eq!(lines.last().expect("error line")["kind"], "error");
}

fn write_grid_workspace(dir: &Path) {
    std::fs::create_dir(dir.join("corpora")).expect("mkdir");
    std::fs::write(
        dir.join("corpora/notes.txt"),
        "Distillation separates liquids by boiling point. The more volatile \
         component enriches the vapor phase and condenses first.",
    )
    .expect("write doc");
    let question = serde_json::json!({
        "id": "q1",
        "question": "Which component condenses first?",
        "doc_id": "notes",
        "excerpts": [{"start": 49, "end": 121}],
    });
    std::fs::write(dir.join("questions.jsonl"), format!("{question}\n")).expect("write questions");
    std::fs::write(
        dir.join("grid.toml"),
        "[paths]\n\
         corpora = \"corpora\"\n\
         questions = \"questions.jsonl\"\n\
         \n\
         [run]\n\
         provider = \"det16\"\n\
         k = 1\n\
         \n\
         [grid]\n\
         fixed = [[8, 0]]\n\
         recursive = []\n\
         kamradt = []\n\
         cluster = false\n\
         llm = false\n",
    )
    .expect("write config");
}

#[test]
fn config_env_var_selects_the_config() {
    let dir = TempDir::new().expect("tempdir");
    write_grid_workspace(dir.path());

    let output = Command::new(env!("CARGO_BIN_EXE_chunkgauge"))
        .args(["grid", "--out", "reports"])
        .current_dir(dir.path())
        .env("CHUNKGAUGE_CONFIG", dir.path().join("grid.toml"))
        .output()
        .expect("binary runs");
    assert_eq!(output.status.code(), Some(0), "stderr: {:?}", output.stderr);
    assert!(
        stdout_lines(&output)
            .last()
            .expect("status line")
            .starts_with("grid: 1 configurations evaluated, 0 failed"),
        "stdout: {:?}",
        output.stdout
    );
    assert!(dir.path().join("reports/FX8-0.json").is_file());
    assert!(dir.path().join("reports/summary.csv").is_file());
}

#[test]
fn grid_rerun_reuses_finished_reports() {
    let dir = TempDir::new().expect("tempdir");
    write_grid_workspace(dir.path());

    let first = run(dir.path(), &["--config", "grid.toml", "grid", "--out", "reports"]);
    assert_eq!(first.status.code(), Some(0), "stderr: {:?}", first.stderr);
    let report_path = dir.path().join("reports/FX8-0.json");
    let bytes = std::fs::read(&report_path).expect("report exists");
    let stamp = std::fs::metadata(&report_path).expect("metadata").modified().expect("mtime");

    let second = run(dir.path(), &["--config", "grid.toml", "grid", "--out", "reports"]);
    assert_eq!(second.status.code(), Some(0), "stderr: {:?}", second.stderr);
    assert_eq!(std::fs::read(&report_path).expect("report exists"), bytes);
    assert_eq!(
        std::fs::metadata(&report_path).expect("metadata").modified().expect("mtime"),
        stamp,
        "a finished report must be reused, not rewritten"
    );
}

#[test]
fn build_task_reports_dangling_sources_as_json_warnings() {
    let dir = TempDir::new().expect("tempdir");
    let paragraphs = [
        serde_json::json!({"doc_id": "thermo", "title": "Heat", "text": "Entropy rises."}),
        serde_json::json!({"doc_id": "thermo", "title": "Heat", "text": "Enthalpy balances."}),
    ];
    let qa = serde_json::json!({
        "id": "qa1",
        "question": "What rises?",
        "sources": [
            {"doc_id": "thermo", "ordinal": 0},
            {"doc_id": "ghost", "ordinal": 7},
        ],
    });
    let jsonl = |values: &[serde_json::Value]| {
        values.iter().map(|v| format!("{v}\n")).collect::<String>()
    };
    std::fs::write(dir.path().join("paragraphs.jsonl"), jsonl(&paragraphs)).expect("write");
    std::fs::write(dir.path().join("qa.jsonl"), jsonl(&[qa])).expect("write");

    let output = run(
        dir.path(),
        &["build-task", "qa.jsonl", "paragraphs.jsonl", "--out", "task"],
    );
    assert_eq!(output.status.code(), Some(0), "stderr: {:?}", output.stderr);

    let warnings = stderr_json_lines(&output);
    assert!(
        warnings.iter().any(|w| w["kind"] == "dangling_source"),
        "expected a dangling_source warning, got: {warnings:?}"
    );
    for path in ["task/queries.jsonl", "task/corpus.jsonl", "task/qrels/test.jsonl"] {
        assert!(dir.path().join(path).is_file(), "{path} missing");
    }
}
