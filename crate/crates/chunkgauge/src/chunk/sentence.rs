//! Sentence segmentation for the semantic chunkers.
//!
//! A boundary falls after `.`, `?` or `!` when the next character is
//! whitespace, and after every newline. Whitespace-only segments are folded
//! into the preceding sentence (or the following one at the start of the
//! document), so the returned byte ranges tile the document exactly.

/// Byte ranges of the sentences of `text`, in order. A document containing
/// no non-whitespace characters has no sentences.
pub(crate) fn split_sentences(text: &str) -> Vec<(usize, usize)> {
    let mut bounds = Vec::new();
    let mut iter = text.char_indices().peekable();
    while let Some((i, ch)) = iter.next() {
        let end = i + ch.len_utf8();
        if end >= text.len() {
            break;
        }
        match ch {
            '.' | '?' | '!' => {
                // Punctuation runs like "?!" stay in one sentence; only the
                // run's last mark, the one before whitespace, ends it.
                if iter.peek().is_some_and(|&(_, c)| c.is_whitespace()) {
                    bounds.push(end);
                }
            }
            '\n' => bounds.push(end),
            _ => {}
        }
    }

    let mut raw = Vec::with_capacity(bounds.len() + 1);
    let mut start = 0usize;
    for b in bounds {
        raw.push((start, b));
        start = b;
    }
    if start < text.len() {
        raw.push((start, text.len()));
    }

    let mut merged: Vec<(usize, usize)> = Vec::new();
    let mut leading: Option<usize> = None;
    for (s, e) in raw {
        if text[s..e].chars().all(char::is_whitespace) {
            match merged.last_mut() {
                Some(last) => last.1 = e,
                None => leading = Some(leading.unwrap_or(s)),
            }
        } else {
            merged.push((leading.take().unwrap_or(s), e));
        }
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn texts(doc: &str) -> Vec<&str> {
        split_sentences(doc)
            .into_iter()
            .map(|(s, e)| &doc[s..e])
            .collect()
    }

    #[test]
    fn splits_after_terminal_punctuation() {
        assert_eq!(
            texts("Hello there. General Kenobi."),
            vec!["Hello there.", " General Kenobi."]
        );
    }

    #[test]
    fn punctuation_runs_stay_together() {
        assert_eq!(texts("Really?! Yes."), vec!["Really?!", " Yes."]);
    }

    #[test]
    fn interior_periods_do_not_split() {
        assert_eq!(texts("Pi is 3.14 here."), vec!["Pi is 3.14 here."]);
        assert_eq!(texts("see e.g.the code"), vec!["see e.g.the code"]);
    }

    #[test]
    fn newlines_split_and_blank_lines_merge_back() {
        assert_eq!(
            texts("alpha\nbeta\n\ngamma"),
            vec!["alpha\n", "beta\n\n", "gamma"]
        );
    }

    #[test]
    fn leading_whitespace_folds_forward() {
        assert_eq!(texts("\nHello. There."), vec!["\nHello.", " There."]);
    }

    #[test]
    fn whitespace_only_documents_have_no_sentences() {
        assert!(split_sentences("").is_empty());
        assert!(split_sentences(" \n\t\n ").is_empty());
    }

    #[test]
    fn trailing_whitespace_folds_backward() {
        assert_eq!(texts("Done.  \n"), vec!["Done.  \n"]);
    }

    proptest! {
        #[test]
        fn sentence_ranges_tile_the_document(doc in "\\PC{0,200}") {
            let ranges = split_sentences(&doc);
            let mut pos = 0usize;
            if doc.chars().any(|c| !c.is_whitespace()) {
                prop_assert!(!ranges.is_empty());
                for &(s, e) in &ranges {
                    prop_assert_eq!(s, pos);
                    prop_assert!(e > s);
                    pos = e;
                }
                prop_assert_eq!(pos, doc.len());
            } else {
                prop_assert!(ranges.is_empty());
            }
        }

        #[test]
        fn boundaries_only_after_punct_or_newline(doc in "[a-z .?!\\n]{0,120}") {
            for &(s, _) in split_sentences(&doc).iter().skip(1) {
                let before = doc[..s].chars().next_back().unwrap();
                prop_assert!(matches!(before, '.' | '?' | '!' | '\n') || before.is_whitespace());
            }
        }
    }
}
