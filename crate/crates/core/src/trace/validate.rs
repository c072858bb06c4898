use std::collections::{HashMap, HashSet};
use std::fmt;

use super::{EventKind, LoopMark, SourceLocation, TestTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    EmptyTrace,
    InvalidLocation,
    InvalidValue,
    DanglingUse,
    UnbracketedLoopIteration,
    UnclosedLoop,
    UnmatchedFunctionExit,
}

impl ViolationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationKind::EmptyTrace => "empty trace",
            ViolationKind::InvalidLocation => "invalid location",
            ViolationKind::InvalidValue => "invalid value",
            ViolationKind::DanglingUse => "dangling use",
            ViolationKind::UnbracketedLoopIteration => "unbracketed loop iteration",
            ViolationKind::UnclosedLoop => "unclosed loop",
            ViolationKind::UnmatchedFunctionExit => "unmatched function exit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// 0-based index into the event list, when the violation is local.
    pub event: Option<usize>,
    pub kind: ViolationKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.event {
            Some(i) => write!(
                f,
                "event {}: {}: {}",
                i + 1,
                self.kind.as_str(),
                self.detail
            ),
            None => write!(f, "{}: {}", self.kind.as_str(), self.detail),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, event: Option<usize>, kind: ViolationKind, detail: String) {
        self.violations.push(Violation {
            event,
            kind,
            detail,
        });
    }
}

/// Checks the tracer contract on a trace. Never fails; problems are entries
/// in the returned report.
pub fn validate_trace(trace: &TestTrace) -> ValidationReport {
    let mut report = ValidationReport::default();
    if trace.events.is_empty() {
        report.push(
            None,
            ViolationKind::EmptyTrace,
            "trace has no events".into(),
        );
    }

    let mut defs: HashSet<(&str, &SourceLocation)> = HashSet::new();
    let mut open_loops: HashMap<(u32, &SourceLocation), usize> = HashMap::new();
    let mut calls: Vec<&str> = Vec::new();

    for (i, e) in trace.events.iter().enumerate() {
        if e.loc.file.is_empty() || e.loc.line == 0 {
            report.push(
                Some(i),
                ViolationKind::InvalidLocation,
                format!("{:?}", e.loc),
            );
        }
        match &e.kind {
            EventKind::VarDef { var, value } => {
                for v in value.violations() {
                    report.push(Some(i), ViolationKind::InvalidValue, format!("{var}: {v}"));
                }
                defs.insert((var.as_str(), &e.loc));
            }
            EventKind::VarUse { var, def_loc } => {
                if !defs.contains(&(var.as_str(), def_loc)) {
                    report.push(
                        Some(i),
                        ViolationKind::DanglingUse,
                        format!(
                            "use of `{var}` at {} has no earlier definition at {def_loc}",
                            e.loc
                        ),
                    );
                }
            }
            EventKind::LoopIter { loop_id, mark } => {
                let key = (*loop_id, &e.loc);
                let depth = open_loops.entry(key).or_insert(0);
                match mark {
                    LoopMark::Begin => *depth += 1,
                    LoopMark::Hit if *depth == 0 => report.push(
                        Some(i),
                        ViolationKind::UnbracketedLoopIteration,
                        format!("loop {loop_id} at {} iterates without a begin", e.loc),
                    ),
                    LoopMark::Hit => {}
                    LoopMark::End if *depth == 0 => report.push(
                        Some(i),
                        ViolationKind::UnbracketedLoopIteration,
                        format!("loop {loop_id} at {} ends without a begin", e.loc),
                    ),
                    LoopMark::End => *depth -= 1,
                }
            }
            EventKind::FunctionEnter { function_id, .. } => calls.push(function_id),
            EventKind::FunctionExit {
                function_id,
                return_value,
                ..
            } => {
                if let Some(v) = return_value {
                    for msg in v.violations() {
                        report.push(
                            Some(i),
                            ViolationKind::InvalidValue,
                            format!("return value of {function_id}: {msg}"),
                        );
                    }
                }
                match calls.last() {
                    Some(top) if top == function_id => {
                        calls.pop();
                    }
                    _ => report.push(
                        Some(i),
                        ViolationKind::UnmatchedFunctionExit,
                        format!("exit from `{function_id}` without a matching entry"),
                    ),
                }
            }
            EventKind::LineHit
            | EventKind::BranchTaken { .. }
            | EventKind::ConditionEval { .. } => {}
        }
    }

    let mut unclosed: Vec<_> = open_loops.into_iter().filter(|(_, d)| *d > 0).collect();
    unclosed.sort();
    for ((loop_id, loc), _) in unclosed {
        report.push(
            None,
            ViolationKind::UnclosedLoop,
            format!("loop {loop_id} at {loc} has a begin without an end"),
        );
    }
    report
}
