//! Execution events, per-test traces and the `.trace` wire format.

mod validate;
pub mod value;
mod wire;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use validate::{validate_trace, ValidationReport, Violation, ViolationKind};
pub use value::{Number, StringFlags, ValueDescriptor, ValueKind};
pub use wire::{parse_trace, serialize_trace};

/// A 1-based line in a source file, path relative to the subject root.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceLocation {
    pub file: String,
    pub line: u32,
}

impl SourceLocation {
    pub fn new(file: impl Into<String>, line: u32) -> Self {
        SourceLocation {
            file: file.into(),
            line,
        }
    }
}

impl fmt::Display for SourceLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.file, self.line)
    }
}

impl FromStr for SourceLocation {
    type Err = Error;

    /// Parses `file:line`; the file part may itself contain colons.
    fn from_str(s: &str) -> Result<Self> {
        let (file, line) = s
            .rsplit_once(':')
            .ok_or_else(|| Error::format(format!("expected file:line, got {s:?}")))?;
        let line: u32 = line
            .trim()
            .parse()
            .map_err(|_| Error::format(format!("bad line number in {s:?}")))?;
        if file.is_empty() || line == 0 {
            return Err(Error::format(format!("invalid source location {s:?}")));
        }
        Ok(SourceLocation::new(file, line))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "PASS")]
    Pass,
    #[serde(rename = "FAIL")]
    Fail,
}

impl Verdict {
    pub fn flipped(self) -> Self {
        match self {
            Verdict::Pass => Verdict::Fail,
            Verdict::Fail => Verdict::Pass,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "PASS" => Ok(Verdict::Pass),
            "FAIL" => Ok(Verdict::Fail),
            _ => Err(Error::format(format!("unknown verdict {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExitOutcome {
    Normal,
    Exceptional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopMark {
    Begin,
    Hit,
    End,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    LineHit,
    BranchTaken {
        branch_id: u32,
    },
    /// `end_line` is the last line of the function body; the entry location
    /// is the first.
    FunctionEnter {
        function_id: String,
        end_line: Option<u32>,
    },
    FunctionExit {
        function_id: String,
        outcome: ExitOutcome,
        return_value: Option<ValueDescriptor>,
    },
    VarDef {
        var: String,
        value: ValueDescriptor,
    },
    VarUse {
        var: String,
        def_loc: SourceLocation,
    },
    LoopIter {
        loop_id: u32,
        mark: LoopMark,
    },
    ConditionEval {
        condition: String,
        outcome: bool,
    },
}

/// One observed runtime occurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub loc: SourceLocation,
    /// Reserved for multi-threaded subjects; the engine ignores it.
    pub thread: Option<u64>,
    pub kind: EventKind,
}

impl Event {
    pub fn new(loc: SourceLocation, kind: EventKind) -> Self {
        Event {
            loc,
            thread: None,
            kind,
        }
    }
}

/// The ordered events of one test execution and its verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct TestTrace {
    pub test_id: String,
    pub verdict: Verdict,
    pub events: Vec<Event>,
}

impl TestTrace {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        parse_trace(&bytes[..]).map_err(|e| match e {
            Error::Parse { line, message } => Error::Parse {
                line,
                message: format!("{}: {message}", path.display()),
            },
            Error::Format(m) => Error::Format(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

/// Loads every `.trace` file in `dir`, sorted by file name.
pub fn load_trace_dir(dir: impl AsRef<Path>) -> Result<Vec<TestTrace>> {
    let dir = dir.as_ref();
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "trace") {
            paths.push(path);
        }
    }
    paths.sort();
    paths.iter().map(TestTrace::from_path).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn location_parsing() {
        let loc: SourceLocation = "pkg/mod.py:12".parse().unwrap();
        assert_eq!(loc, SourceLocation::new("pkg/mod.py", 12));
        let odd: SourceLocation = "c:\\x.py:3".parse().unwrap();
        assert_eq!(odd.file, "c:\\x.py");
        assert!("x.py:0".parse::<SourceLocation>().is_err());
        assert!(":4".parse::<SourceLocation>().is_err());
        assert!("x.py".parse::<SourceLocation>().is_err());
    }
}
