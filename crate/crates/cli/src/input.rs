//! Reading JSON inputs with located errors, and the dimension guard.

use std::fmt;

use serde::de::DeserializeOwned;

pub const MAX_DIM_VAR: &str = "CONELAB_MAX_DIM";
const DEFAULT_MAX_DIM: usize = 16;

/// Errors that end a run before any report: usage, unreadable or malformed
/// input, or an input the engines reject.
#[derive(Debug)]
pub struct CliError(pub String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<conelab::Error> for CliError {
    fn from(e: conelab::Error) -> Self {
        CliError(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Input files read so far, in order, for the report digest.
#[derive(Default)]
pub struct Inputs {
    pub files: Vec<(String, Vec<u8>)>,
    pub max_dim: usize,
}

impl Inputs {
    pub fn new() -> CliResult<Self> {
        Ok(Inputs {
            files: Vec::new(),
            max_dim: max_dim()?,
        })
    }

    pub fn load<T: DeserializeOwned>(&mut self, path: &str) -> CliResult<T> {
        let bytes = std::fs::read(path).map_err(|e| CliError(format!("{path}: {e}")))?;
        let v = parse(path, &bytes)?;
        self.files.push((path.to_string(), bytes));
        Ok(v)
    }

    pub fn guard(&self, dim: usize, what: &str) -> CliResult<()> {
        if dim > self.max_dim {
            return Err(CliError(format!(
                "{what} has dimension {dim}, above {MAX_DIM_VAR}={}",
                self.max_dim
            )));
        }
        Ok(())
    }
}

/// Parses `bytes` as JSON, reporting the path inside the document and the
/// line and column of the failure.
pub fn parse<T: DeserializeOwned>(name: &str, bytes: &[u8]) -> CliResult<T> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let v: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        CliError(format!(
            "{name}: malformed JSON at {path} (line {}, column {}): {inner}",
            inner.line(),
            inner.column()
        ))
    })?;
    de.end().map_err(|e| {
        CliError(format!(
            "{name}: malformed JSON (line {}, column {}): {e}",
            e.line(),
            e.column()
        ))
    })?;
    Ok(v)
}

fn max_dim() -> CliResult<usize> {
    match std::env::var(MAX_DIM_VAR) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| CliError(format!("{MAX_DIM_VAR} must be a positive integer, got {s:?}"))),
        Err(_) => Ok(DEFAULT_MAX_DIM),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use conelab::PolyCone;

    #[test]
    fn syntax_errors_have_a_location() {
        let e = parse::<PolyCone>("c.json", b"{\"dim\": 2,\n \"generators\": [[1, 0],]}").unwrap_err();
        assert!(e.0.contains("line 2"), "{e}");
    }

    #[test]
    fn semantic_errors_name_the_field() {
        let e = parse::<PolyCone>("c.json", br#"{"dim": 2, "generators": [[1, "x"]]}"#).unwrap_err();
        assert!(e.0.contains("generators"), "{e}");
    }

    #[test]
    fn trailing_garbage_rejected() {
        assert!(parse::<PolyCone>("c.json", br#"{"dim": 1, "generators": [[1]]} x"#).is_err());
    }
}
