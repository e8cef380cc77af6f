//! The M2 annotation format: `S` lines carrying a tokenized source sentence,
//! each followed by `A start end|||type|||correction|||required|||comment|||annotator` lines.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ParallelInstance, Sentence};
use crate::align::{align, EditOp};
use crate::error::{Error, Result};

const SEP: &str = "|||";
const NONE: &str = "-NONE-";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct M2Annotation {
    pub start: usize,
    pub end: usize,
    pub error_type: String,
    pub correction: Vec<String>,
    pub annotator: u32,
}

impl M2Annotation {
    pub fn is_insertion(&self) -> bool {
        self.start == self.end
    }

    pub fn is_deletion(&self) -> bool {
        self.end > self.start && self.correction.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct M2Entry {
    pub source: Sentence,
    pub annotations: Vec<M2Annotation>,
}

impl M2Entry {
    pub fn by_annotator(&self) -> BTreeMap<u32, Vec<&M2Annotation>> {
        let mut groups: BTreeMap<u32, Vec<&M2Annotation>> = BTreeMap::new();
        for a in &self.annotations {
            groups.entry(a.annotator).or_default().push(a);
        }
        groups
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct M2Document {
    pub entries: Vec<M2Entry>,
}

pub fn parse_m2(path: impl AsRef<Path>) -> Result<M2Document> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8(bytes).map_err(|e| {
        let valid = &e.as_bytes()[..e.utf8_error().valid_up_to()];
        Error::InvalidUtf8 {
            path: path.to_path_buf(),
            line: valid.iter().filter(|&&b| b == b'\n').count() + 1,
        }
    })?;
    parse_m2_str(&text)
}

pub fn parse_m2_str(text: &str) -> Result<M2Document> {
    let mut entries: Vec<M2Entry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(rest) = strip_tag(line, 'S') {
            entries.push(M2Entry {
                source: Sentence::parse(rest),
                annotations: Vec::new(),
            });
        } else if let Some(rest) = strip_tag(line, 'A') {
            let entry = entries.last_mut().ok_or_else(|| Error::M2Syntax {
                line: line_no,
                message: "annotation before any S line".into(),
            })?;
            if let Some(annotation) = parse_annotation(rest, entry.source.len(), line_no)? {
                entry.annotations.push(annotation);
            }
        } else {
            return Err(Error::M2Syntax {
                line: line_no,
                message: format!("expected an S or A line, found {line:?}"),
            });
        }
    }
    Ok(M2Document { entries })
}

fn strip_tag(line: &str, tag: char) -> Option<&str> {
    let rest = line.strip_prefix(tag)?;
    if rest.is_empty() {
        Some(rest)
    } else {
        rest.strip_prefix(' ')
    }
}

/// Returns `None` for `noop` annotations.
fn parse_annotation(rest: &str, sentence_len: usize, line: usize) -> Result<Option<M2Annotation>> {
    let syntax = |message: String| Error::M2Syntax { line, message };
    let fields: Vec<&str> = rest.split(SEP).collect();
    if fields.len() != 6 {
        return Err(syntax(format!("expected 6 fields, found {}", fields.len())));
    }
    let mut span = fields[0].split_whitespace();
    let (start, end) = match (span.next(), span.next(), span.next()) {
        (Some(s), Some(e), None) => (s, e),
        _ => return Err(syntax(format!("malformed span {:?}", fields[0]))),
    };
    let error_type = fields[1].trim().to_owned();
    if error_type.eq_ignore_ascii_case("noop") {
        return Ok(None);
    }
    let start: usize = start
        .parse()
        .map_err(|_| syntax(format!("non-integer start offset {start:?}")))?;
    let end: usize = end
        .parse()
        .map_err(|_| syntax(format!("non-integer end offset {end:?}")))?;
    if end < start || end > sentence_len {
        return Err(syntax(format!(
            "span [{start}, {end}) out of bounds for a {sentence_len}-token sentence"
        )));
    }
    let correction = match fields[2].trim() {
        NONE | "" => Vec::new(),
        c => c.split_whitespace().map(str::to_owned).collect(),
    };
    let annotator = fields[5]
        .trim()
        .parse()
        .map_err(|_| syntax(format!("non-integer annotator id {:?}", fields[5])))?;
    Ok(Some(M2Annotation {
        start,
        end,
        error_type,
        correction,
        annotator,
    }))
}

pub fn render_m2(doc: &M2Document) -> String {
    let mut out = String::new();
    for (i, entry) in doc.entries.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "S {}", entry.source).unwrap();
        for a in &entry.annotations {
            let correction = if a.correction.is_empty() {
                NONE.to_owned()
            } else {
                a.correction.join(" ")
            };
            writeln!(
                out,
                "A {} {}{SEP}{}{SEP}{}{SEP}REQUIRED{SEP}{NONE}{SEP}{}",
                a.start, a.end, a.error_type, correction, a.annotator
            )
            .unwrap();
        }
    }
    out
}

/// Builds the corrected side of every entry from one annotator's edits.
///
/// Edits are applied right to left so earlier offsets stay valid. Entries
/// without annotations from `annotator` keep their source as reference.
pub fn m2_to_parallel(doc: &M2Document, annotator: u32) -> Result<Vec<ParallelInstance>> {
    doc.entries
        .iter()
        .enumerate()
        .map(|(id, entry)| {
            let mut chosen: Vec<&M2Annotation> = entry
                .annotations
                .iter()
                .filter(|a| a.annotator == annotator)
                .collect();
            chosen.sort_by_key(|a| std::cmp::Reverse((a.start, a.end)));
            for pair in chosen.windows(2) {
                let (right, left) = (pair[0], pair[1]);
                let overlapping = left.end > right.start
                    || (left.start == right.start && left.is_insertion() && right.is_insertion());
                if overlapping {
                    return Err(Error::OverlappingAnnotations {
                        entry: id,
                        annotator,
                    });
                }
            }
            let mut tokens = entry.source.tokens().to_vec();
            for a in chosen {
                tokens.splice(a.start..a.end, a.correction.iter().cloned());
            }
            Ok(ParallelInstance::new(
                id,
                entry.source.clone(),
                Sentence::from_tokens_unchecked(tokens),
            ))
        })
        .collect()
}

/// Derives M2 annotations for a sentence pair from its minimal edit script.
pub fn annotate(source: &Sentence, reference: &Sentence, annotator: u32) -> M2Entry {
    let script = align(source, reference);
    let annotations = script
        .error_units()
        .map(|op| {
            let (start, end, error_type) = match op {
                EditOp::Replace { pos, .. } => (*pos, *pos + 1, "R"),
                EditOp::Delete { pos, .. } => (*pos, *pos + 1, "U"),
                EditOp::InsertRun { after, .. } => {
                    let at = after.map_or(0, |p| p + 1);
                    (at, at, "M")
                }
                EditOp::Equal { .. } => unreachable!("error_units skips Equal"),
            };
            M2Annotation {
                start,
                end,
                error_type: error_type.to_owned(),
                correction: op.new_tokens().to_vec(),
                annotator,
            }
        })
        .collect();
    M2Entry {
        source: source.clone(),
        annotations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sva_example() {
        let doc = parse_m2_str("S This are a sentence\nA 1 2|||SVA|||is|||REQUIRED|||-NONE-|||0\n")
            .unwrap();
        assert_eq!(doc.entries.len(), 1);
        let a = &doc.entries[0].annotations[0];
        assert_eq!(
            (a.start, a.end, a.correction.clone()),
            (1, 2, vec!["is".to_string()])
        );
        let pairs = m2_to_parallel(&doc, 0).unwrap();
        assert_eq!(pairs[0].source.to_string(), "This are a sentence");
        assert_eq!(pairs[0].reference.to_string(), "This is a sentence");
    }

    #[test]
    fn no_annotations() {
        let doc = parse_m2_str("S Hello .\n").unwrap();
        assert!(doc.entries[0].annotations.is_empty());
        let pairs = m2_to_parallel(&doc, 0).unwrap();
        assert_eq!(pairs[0].source, pairs[0].reference);
    }

    #[test]
    fn out_of_bounds_span() {
        let err = parse_m2_str("S a b c d\nA 5 6|||R|||x|||REQUIRED|||-NONE-|||0\n").unwrap_err();
        assert!(matches!(err, Error::M2Syntax { line: 2, .. }), "{err}");
    }

    #[test]
    fn malformed_lines() {
        for bad in [
            "S a b\nA 0 1|||R|||x|||REQUIRED|||0\n",
            "S a b\nA x 1|||R|||x|||REQUIRED|||-NONE-|||0\n",
            "S a b\nA 1 0|||R|||x|||REQUIRED|||-NONE-|||0\n",
        ] {
            assert!(
                matches!(parse_m2_str(bad), Err(Error::M2Syntax { line: 2, .. })),
                "{bad}"
            );
        }
        assert!(matches!(
            parse_m2_str("A 0 1|||R|||x|||REQUIRED|||-NONE-|||0\n"),
            Err(Error::M2Syntax { line: 1, .. })
        ));
    }

    #[test]
    fn noop_and_deletion() {
        let doc = parse_m2_str(
            "S a b c\nA -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||0\n\nS x y\nA 0 1|||U|||-NONE-|||REQUIRED|||-NONE-|||0\n",
        )
        .unwrap();
        assert!(doc.entries[0].annotations.is_empty());
        assert!(doc.entries[1].annotations[0].is_deletion());
        let pairs = m2_to_parallel(&doc, 0).unwrap();
        assert_eq!(pairs[0].reference, pairs[0].source);
        assert_eq!(pairs[1].reference.to_string(), "y");
    }

    #[test]
    fn insertion_applies() {
        let doc =
            parse_m2_str("S It is cold .\nA 2 2|||M|||very|||REQUIRED|||-NONE-|||0\n").unwrap();
        assert!(doc.entries[0].annotations[0].is_insertion());
        let pairs = m2_to_parallel(&doc, 0).unwrap();
        assert_eq!(pairs[0].reference.to_string(), "It is very cold .");
    }

    #[test]
    fn annotator_selection() {
        let doc = parse_m2_str(
            "S a b\nA 0 1|||R|||x|||REQUIRED|||-NONE-|||0\nA 1 2|||R|||y|||REQUIRED|||-NONE-|||1\n",
        )
        .unwrap();
        assert_eq!(doc.entries[0].by_annotator().len(), 2);
        assert_eq!(
            m2_to_parallel(&doc, 0).unwrap()[0].reference.to_string(),
            "x b"
        );
        assert_eq!(
            m2_to_parallel(&doc, 1).unwrap()[0].reference.to_string(),
            "a y"
        );
        assert_eq!(
            m2_to_parallel(&doc, 7).unwrap()[0].reference.to_string(),
            "a b"
        );
    }

    #[test]
    fn overlap_is_fatal() {
        let doc = parse_m2_str(
            "S ok\n\nS a b c\nA 0 2|||R|||x|||REQUIRED|||-NONE-|||0\nA 1 3|||R|||y|||REQUIRED|||-NONE-|||0\n",
        )
        .unwrap();
        assert!(matches!(
            m2_to_parallel(&doc, 0),
            Err(Error::OverlappingAnnotations { entry: 1, .. })
        ));
    }

    #[test]
    fn insertion_next_to_replacement() {
        let doc = parse_m2_str(
            "S a b\nA 1 1|||M|||x|||REQUIRED|||-NONE-|||0\nA 1 2|||R|||y|||REQUIRED|||-NONE-|||0\n",
        )
        .unwrap();
        assert_eq!(
            m2_to_parallel(&doc, 0).unwrap()[0].reference.to_string(),
            "a x y"
        );
    }

    fn sentence(max: usize) -> impl Strategy<Value = Sentence> {
        prop::collection::vec(0u8..5, 0..=max)
            .prop_map(|ids| Sentence::new(ids.into_iter().map(|i| format!("w{i}"))).unwrap())
    }

    proptest! {
        #[test]
        fn render_parse_identity(pairs in prop::collection::vec((sentence(8), sentence(8)), 0..6)) {
            let doc = M2Document {
                entries: pairs.iter().map(|(s, r)| annotate(s, r, 0)).collect(),
            };
            prop_assert_eq!(parse_m2_str(&render_m2(&doc)).unwrap(), doc);
        }

        #[test]
        fn annotations_recover_reference(src in sentence(10), reference in sentence(10)) {
            let doc = M2Document { entries: vec![annotate(&src, &reference, 0)] };
            let pairs = m2_to_parallel(&doc, 0).unwrap();
            prop_assert_eq!(&pairs[0].reference, &reference);
        }
    }
}
