use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Sentence;
use crate::construct::TurnInstance;
use crate::error::{Error, Result};
use crate::labels::{EditLabel, LabelSequence};

/// One JSONL line. Field order is the serialized key order.
///
/// When `sentinel` is present, `labels[0]` and `mask[0]` belong to the slot
/// before the first source token, so both arrays are one longer than `src`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TurnRecord {
    pub origin_id: usize,
    pub turn: usize,
    pub strategy: String,
    pub src: Sentence,
    pub tgt: Sentence,
    pub labels: Vec<EditLabel>,
    pub mask: Vec<u8>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub sentinel: bool,
}

impl TurnRecord {
    /// The sentinel slot is written when its label is not `$KEEP` or its
    /// mask bit is 0, unless `with_sentinel` is false.
    pub fn from_instance(inst: &TurnInstance, with_sentinel: bool) -> Self {
        let sentinel = with_sentinel && (inst.labels.has_sentinel() || !inst.sentinel_mask);
        let mut labels = Vec::with_capacity(inst.labels.len() + usize::from(sentinel));
        let mut mask = Vec::with_capacity(labels.capacity());
        if sentinel {
            labels.push(inst.labels.sentinel.clone());
            mask.push(u8::from(inst.sentinel_mask));
        }
        labels.extend(inst.labels.labels.iter().cloned());
        mask.extend(inst.mask.iter().map(|&b| u8::from(b)));
        Self {
            origin_id: inst.origin_id,
            turn: inst.turn,
            strategy: inst.strategy.clone(),
            src: inst.source.clone(),
            tgt: inst.target.clone(),
            labels,
            mask,
            sentinel,
        }
    }

    /// Splits `labels` back into sentinel and per-token parts.
    pub fn label_sequence(&self) -> Result<LabelSequence> {
        let expected = self.src.len() + usize::from(self.sentinel);
        if self.labels.len() != expected || self.mask.len() != expected {
            return Err(Error::LabelLengthMismatch {
                expected,
                found: self.labels.len().max(self.mask.len()),
            });
        }
        if self.sentinel {
            LabelSequence::new(self.labels[0].clone(), self.labels[1..].to_vec())
        } else {
            LabelSequence::new(EditLabel::Keep, self.labels.clone())
        }
    }
}

pub fn write_jsonl_to<'a, W, I>(out: W, instances: I, with_sentinel: bool) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = &'a TurnInstance>,
{
    let mut out = BufWriter::new(out);
    for inst in instances {
        serde_json::to_writer(&mut out, &TurnRecord::from_instance(inst, with_sentinel))?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_jsonl(instances: &[TurnInstance], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_jsonl_to(file, instances, true).map_err(|e| Error::io(path, e))
}

pub fn read_jsonl(path: impl AsRef<Path>) -> Result<Vec<TurnRecord>> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| Error::Json {
            line: i + 1,
            source,
        })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labels::derive_labels;

    fn instance(src: &str, tgt: &str) -> TurnInstance {
        let source = Sentence::parse(src);
        let target = Sentence::parse(tgt);
        let labels = derive_labels(&source, &target);
        TurnInstance {
            origin_id: 3,
            turn: 0,
            strategy: "original".into(),
            mask: vec![true; source.len()],
            sentinel_mask: true,
            source,
            target,
            labels,
        }
    }

    #[test]
    fn exact_schema() {
        let inst = instance("How oldest are you !", "How old are you ?");
        let mut buf = Vec::new();
        write_jsonl_to(&mut buf, [&inst], true).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            concat!(
                r#"{"origin_id":3,"turn":0,"strategy":"original","#,
                r#""src":["How","oldest","are","you","!"],"tgt":["How","old","are","you","?"],"#,
                r#""labels":["$KEEP","$REPLACE_old","$KEEP","$KEEP","$REPLACE_?"],"mask":[1,1,1,1,1]}"#,
                "\n"
            )
        );
    }

    #[test]
    fn sentinel_slot() {
        let inst = instance("go", "we go");
        let rec = TurnRecord::from_instance(&inst, true);
        assert!(rec.sentinel);
        assert_eq!(rec.labels.len(), 2);
        assert_eq!(rec.labels[0].to_string(), "$APPEND_we");
        assert_eq!(rec.label_sequence().unwrap(), inst.labels);
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.ends_with(r#""mask":[1,1],"sentinel":true}"#), "{json}");

        let without = TurnRecord::from_instance(&inst, false);
        assert!(!without.sentinel);
        assert_eq!(without.labels.len(), 1);
    }

    #[test]
    fn file_round_trip_and_determinism() {
        let dir = tempfile::tempdir().unwrap();
        let a = dir.path().join("a.jsonl");
        let b = dir.path().join("b.jsonl");
        let insts = vec![instance("a b", "a c"), instance("x", "y x")];
        write_jsonl(&insts, &a).unwrap();
        write_jsonl(&insts, &b).unwrap();
        assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
        let back = read_jsonl(&a).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].label_sequence().unwrap(), insts[1].labels);

        write_jsonl(&[], &a).unwrap();
        assert!(fs::read(&a).unwrap().is_empty());
    }

    #[test]
    fn unwritable_path() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("missing").join("out.jsonl");
        assert!(matches!(write_jsonl(&[], &p), Err(Error::Io { .. })));
    }
}
