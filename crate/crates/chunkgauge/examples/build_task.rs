//! Assemble a retrieval task from QA records and source paragraphs, write
//! its three JSONL files, and load them back.
//!
//!     cargo run --example build_task

use chunkgauge::bench::{build_task, load_task, save_task, ParagraphRecord, ParagraphRef, QaRecord};

fn paragraph(doc_id: &str, title: &str, text: &str) -> ParagraphRecord {
    ParagraphRecord {
        doc_id: doc_id.to_string(),
        title: title.to_string(),
        text: text.to_string(),
    }
}

fn main() -> chunkgauge::Result<()> {
    let paragraphs = vec![
        paragraph("thermo", "Enthalpy", "enthalpy change equals heat at constant pressure"),
        paragraph("thermo", "Entropy", "entropy measures dispersal of energy"),
        paragraph("kinetics", "Rates", "rate laws relate concentration to reaction speed"),
    ];
    let qa_records = vec![
        QaRecord {
            id: None,
            question: "what equals heat at constant pressure".to_string(),
            sources: vec![ParagraphRef { doc_id: "thermo".into(), ordinal: 0 }],
        },
        QaRecord {
            id: None,
            question: "what do rate laws relate".to_string(),
            sources: vec![ParagraphRef { doc_id: "kinetics".into(), ordinal: 0 }],
        },
        QaRecord {
            id: None,
            question: "this one references a missing paragraph".to_string(),
            sources: vec![ParagraphRef { doc_id: "thermo".into(), ordinal: 9 }],
        },
    ];

    let (task, warnings) = build_task(&qa_records, &paragraphs)?;
    let (queries, corpus, qrels) = task.counts();
    println!("built task: {queries} queries, {corpus} passages, {qrels} qrels");
    for warning in &warnings {
        println!("  warning {}: {}", warning.kind, warning.message);
    }

    // Paragraph ids are deterministic, so rebuilding reproduces them.
    assert!(task.corpus.contains_key("thermo::00001"));

    let dir = std::env::temp_dir().join("chunkgauge_build_task_example");
    std::fs::remove_dir_all(&dir).ok();
    save_task(&task, &dir)?;
    let (reloaded, load_warnings) = load_task(&dir)?;
    assert_eq!(reloaded, task);
    assert!(load_warnings.is_empty());
    println!("round trip through {} ok", dir.display());
    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
