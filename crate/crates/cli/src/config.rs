use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::args::{Cli, Command};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flags {
    pub include_original: bool,
    pub invert_typefirst: bool,
    pub kind_only: bool,
    pub sentinel: bool,
}

/// Everything that determines a run's output, echoed into JSON reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub subcommand: String,
    pub inputs: BTreeMap<String, String>,
    pub strategy: Option<String>,
    pub seed: u64,
    pub beta: Option<f64>,
    pub annotator: u32,
    pub workers: u64,
    pub flags: Flags,
}

fn path(p: &Path) -> String {
    p.display().to_string()
}

impl RunConfig {
    pub fn from_cli(cli: &Cli, strategy: Option<String>) -> Self {
        let mut inputs = BTreeMap::new();
        let mut put = |key: &str, p: &Path| {
            inputs.insert(key.to_owned(), path(p));
        };
        let mut flags = Flags::default();
        let mut beta = None;
        let mut annotator = 0;
        match &cli.command {
            Command::Derive {
                src,
                reference,
                sentinel,
                ..
            } => {
                put("src", src);
                put("ref", reference);
                flags.sentinel = *sentinel;
            }
            Command::Apply { input, .. }
            | Command::Stats { input, .. }
            | Command::Loss { input, .. } => {
                put("input", input);
            }
            Command::Construct {
                src,
                reference,
                include_original,
                invert_typefirst,
                sentinel,
                ..
            } => {
                put("src", src);
                put("ref", reference);
                flags.include_original = *include_original;
                flags.invert_typefirst = *invert_typefirst;
                flags.sentinel = *sentinel;
            }
            Command::Eval {
                src,
                hyp,
                reference,
                beta: b,
                kind_only,
                ..
            } => {
                put("src", src);
                put("hyp", hyp);
                put("ref", reference);
                beta = Some(*b);
                flags.kind_only = *kind_only;
            }
            Command::Quantexp {
                src,
                reference,
                prepare,
                pred_raw,
                pred_checked,
                beta: b,
                kind_only,
                ..
            } => {
                put("src", src);
                put("ref", reference);
                if let Some(p) = prepare {
                    put("prepare", p);
                }
                if let Some(p) = pred_raw {
                    put("pred_raw", p);
                }
                if let Some(p) = pred_checked {
                    put("pred_checked", p);
                }
                beta = Some(*b);
                flags.kind_only = *kind_only;
            }
            Command::M2 {
                convert,
                annotator: a,
                ..
            } => {
                put("m2", convert);
                annotator = *a;
            }
        }
        Self {
            subcommand: cli.command.name().to_owned(),
            inputs,
            strategy,
            seed: cli.global.seed,
            beta,
            annotator,
            workers: cli.global.workers,
            flags,
        }
    }
}
