use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Sentence;
use crate::error::{Error, Result};

/// A source/reference sentence pair; `id` is the 0-based line index in the input files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParallelInstance {
    pub id: usize,
    pub source: Sentence,
    pub reference: Sentence,
}

impl ParallelInstance {
    pub fn new(id: usize, source: Sentence, reference: Sentence) -> Self {
        Self {
            id,
            source,
            reference,
        }
    }
}

/// Reads one whitespace-tokenized sentence per line. A trailing newline does not start a new line.
pub fn read_lines(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut chunks: Vec<&[u8]> = bytes.split(|&b| b == b'\n').collect();
    if chunks.last().is_some_and(|c| c.is_empty()) {
        chunks.pop();
    }
    chunks
        .into_iter()
        .enumerate()
        .map(|(i, raw)| {
            std::str::from_utf8(raw)
                .map(Sentence::parse)
                .map_err(|_| Error::InvalidUtf8 {
                    path: path.to_path_buf(),
                    line: i + 1,
                })
        })
        .collect()
}

pub fn read_parallel(
    source_path: impl AsRef<Path>,
    reference_path: impl AsRef<Path>,
) -> Result<Vec<ParallelInstance>> {
    let sources = read_lines(source_path)?;
    let references = read_lines(reference_path)?;
    if sources.len() != references.len() {
        return Err(Error::LineCountMismatch {
            source_lines: sources.len(),
            reference_lines: references.len(),
        });
    }
    Ok(sources
        .into_iter()
        .zip(references)
        .enumerate()
        .map(|(id, (source, reference))| ParallelInstance::new(id, source, reference))
        .collect())
}

/// Writes sentences one per line, tokens joined by single spaces, LF terminated.
pub fn write_sentences<'a, I>(sentences: I, path: impl AsRef<Path>) -> Result<()>
where
    I: IntoIterator<Item = &'a Sentence>,
{
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for s in sentences {
        writeln!(out, "{s}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
