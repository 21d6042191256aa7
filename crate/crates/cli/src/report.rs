//! Verification reports: one record per named check, sorted by name.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Unknown,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Unknown => "UNKNOWN",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub check: String,
    pub status: Status,
    pub details: Map<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

impl Check {
    pub fn new(name: impl Into<String>, status: Status) -> Self {
        Check {
            check: name.into(),
            status,
            details: Map::new(),
            witness: None,
        }
    }

    pub fn detail(mut self, key: &str, v: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), v.into());
        self
    }

    /// Attaches a witness, kept only on FAIL.
    pub fn witness(mut self, w: Value) -> Self {
        if self.status == Status::Fail {
            self.witness = Some(w);
        }
        self
    }

    /// Attaches a witness whatever the status.
    pub fn evidence(mut self, w: Value) -> Self {
        self.witness = Some(w);
        self
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Inputs {
    pub digest: String,
    pub files: Vec<InputFile>,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub unknown: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub inputs: Inputs,
    pub seed: u64,
    pub results: Vec<Check>,
    pub summary: Summary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<Value>,
    /// Wall-clock seconds; only with `--timing`, so reports stay reproducible.
    pub elapsed: Option<f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

/// Digest over the command, its normalized arguments and the input files.
pub fn digest(command: &str, args: &[String], files: &[(String, Vec<u8>)]) -> Inputs {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    for a in args {
        h.update([0u8]);
        h.update(a.as_bytes());
    }
    for (_, bytes) in files {
        h.update([1u8]);
        h.update((bytes.len() as u64).to_le_bytes());
        h.update(bytes);
    }
    Inputs {
        digest: format!("sha256:{:x}", h.finalize()),
        files: files
            .iter()
            .map(|(p, b)| InputFile {
                path: p.clone(),
                sha256: sha256_hex(b),
            })
            .collect(),
    }
}

impl Report {
    pub fn new(command: &str, inputs: Inputs, seed: u64, mut results: Vec<Check>, output: Option<Value>) -> Self {
        results.sort_by(|a, b| a.check.cmp(&b.check));
        let count = |s: Status| results.iter().filter(|c| c.status == s).count();
        let summary = Summary {
            pass: count(Status::Pass),
            fail: count(Status::Fail),
            unknown: count(Status::Unknown),
        };
        Report {
            command: command.to_string(),
            inputs,
            seed,
            results,
            summary,
            output,
            elapsed: None,
        }
    }

    /// 0 all PASS, 1 any FAIL, 3 when undecided checks remain.
    pub fn exit_code(&self) -> i32 {
        if self.summary.fail > 0 {
            1
        } else if self.summary.unknown > 0 {
            3
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "conelab {}  seed={}  inputs={}", self.command, self.seed, self.inputs.digest);
        for c in &self.results {
            let _ = write!(s, "{:<8} {}", c.status.label(), c.check);
            for (k, v) in &c.details {
                let _ = write!(s, "  {k}={}", compact(v));
            }
            s.push('\n');
            if let Some(w) = &c.witness {
                let _ = writeln!(s, "         witness: {}", compact(w));
            }
        }
        let _ = writeln!(
            s,
            "summary: {} pass, {} fail, {} unknown",
            self.summary.pass, self.summary.fail, self.summary.unknown
        );
        if let Some(t) = self.elapsed {
            let _ = writeln!(s, "elapsed: {t:.3}s");
        }
        if let Some(o) = &self.output {
            let _ = writeln!(s, "output: {}", compact(o));
        }
        s
    }
}

fn compact(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn results_are_sorted_and_counted() {
        let r = Report::new(
            "x",
            Inputs::default(),
            0,
            vec![
                Check::new("b", Status::Unknown),
                Check::new("a", Status::Pass),
            ],
            None,
        );
        assert_eq!(r.results[0].check, "a");
        assert_eq!(r.exit_code(), 3);
    }

    #[test]
    fn fail_dominates() {
        let r = Report::new(
            "x",
            Inputs::default(),
            0,
            vec![Check::new("a", Status::Fail), Check::new("b", Status::Unknown)],
            None,
        );
        assert_eq!(r.exit_code(), 1);
    }

    #[test]
    fn digest_depends_on_arguments_and_files() {
        let a = digest("dual", &["-i".into()], &[("f".into(), b"{}".to_vec())]);
        let b = digest("dual", &["-i".into()], &[("f".into(), b"{ }".to_vec())]);
        assert_ne!(a.digest, b.digest);
        assert_eq!(a.files[0].sha256, sha256_hex(b"{}"));
    }

    #[test]
    fn witness_kept_only_on_failure() {
        let ok = Check::new("a", Status::Pass).witness(Value::from(1));
        assert!(ok.witness.is_none());
        let bad = Check::new("a", Status::Fail).witness(Value::from(1));
        assert!(bad.witness.is_some());
    }
}
