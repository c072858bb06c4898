//! Newline-delimited JSON records: one `meta` header, then one event per line.

use std::io::{BufRead, BufReader, Read};

use serde::{Deserialize, Serialize};

use super::value::{Number, StringFlags, ValueDescriptor, ValueKind};
use super::{Event, EventKind, ExitOutcome, LoopMark, SourceLocation, TestTrace, Verdict};
use crate::error::{Error, Result};

const EVENT_KINDS: [&str; 8] = [
    "line",
    "branch",
    "function_enter",
    "function_exit",
    "def",
    "use",
    "loop",
    "condition",
];

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValueRecord {
    kind: ValueKind,
    type_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    numeric: Option<Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    is_ascii: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    is_digits: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    has_special: Option<bool>,
}

impl From<&ValueDescriptor> for ValueRecord {
    fn from(v: &ValueDescriptor) -> Self {
        ValueRecord {
            kind: v.kind,
            type_name: v.type_name.clone(),
            numeric: v.numeric,
            text: v.text.clone(),
            length: v.length,
            is_ascii: v.flags.map(|f| f.is_ascii),
            is_digits: v.flags.map(|f| f.is_digits),
            has_special: v.flags.map(|f| f.has_special),
        }
    }
}

impl TryFrom<ValueRecord> for ValueDescriptor {
    type Error = String;

    fn try_from(r: ValueRecord) -> std::result::Result<Self, String> {
        let flags = match (r.is_ascii, r.is_digits, r.has_special) {
            (None, None, None) => None,
            (Some(is_ascii), Some(is_digits), Some(has_special)) => Some(StringFlags {
                is_ascii,
                is_digits,
                has_special,
            }),
            _ => return Err("string flags must be given together".into()),
        };
        let numeric = match (r.kind, r.numeric) {
            (ValueKind::Float, Some(Number::Int(i))) => Some(Number::Float(i as f64)),
            (ValueKind::Integer | ValueKind::Boolean, Some(Number::Float(f))) => {
                return Err(format!("integral value expected, got {f}"))
            }
            (_, n) => n,
        };
        let v = ValueDescriptor {
            kind: r.kind,
            type_name: r.type_name,
            numeric,
            text: r.text,
            length: r.length,
            flags,
        };
        match v.violations().first() {
            Some(msg) => Err(msg.clone()),
            None => Ok(v),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum Record {
    Meta {
        test_id: String,
        verdict: Verdict,
    },
    Line {
        file: String,
        line: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thread: Option<u64>,
    },
    Branch {
        file: String,
        line: u32,
        branch_id: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thread: Option<u64>,
    },
    FunctionEnter {
        file: String,
        line: u32,
        function_id: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        end_line: Option<u32>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thread: Option<u64>,
    },
    FunctionExit {
        file: String,
        line: u32,
        function_id: String,
        outcome: ExitOutcome,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        return_value: Option<ValueRecord>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thread: Option<u64>,
    },
    Def {
        file: String,
        line: u32,
        var: String,
        value: ValueRecord,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thread: Option<u64>,
    },
    Use {
        file: String,
        line: u32,
        var: String,
        def_file: String,
        def_line: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thread: Option<u64>,
    },
    Loop {
        file: String,
        line: u32,
        loop_id: u32,
        iteration: LoopMark,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thread: Option<u64>,
    },
    Condition {
        file: String,
        line: u32,
        condition: String,
        outcome: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        thread: Option<u64>,
    },
}

fn location(file: String, line: u32) -> std::result::Result<SourceLocation, String> {
    if file.is_empty() {
        return Err("empty file name".into());
    }
    if line == 0 {
        return Err("line numbers are 1-based".into());
    }
    Ok(SourceLocation { file, line })
}

impl Record {
    fn from_event(e: &Event) -> Record {
        let file = e.loc.file.clone();
        let line = e.loc.line;
        let thread = e.thread;
        match &e.kind {
            EventKind::LineHit => Record::Line { file, line, thread },
            EventKind::BranchTaken { branch_id } => Record::Branch {
                file,
                line,
                branch_id: *branch_id,
                thread,
            },
            EventKind::FunctionEnter {
                function_id,
                end_line,
            } => Record::FunctionEnter {
                file,
                line,
                function_id: function_id.clone(),
                end_line: *end_line,
                thread,
            },
            EventKind::FunctionExit {
                function_id,
                outcome,
                return_value,
            } => Record::FunctionExit {
                file,
                line,
                function_id: function_id.clone(),
                outcome: *outcome,
                return_value: return_value.as_ref().map(ValueRecord::from),
                thread,
            },
            EventKind::VarDef { var, value } => Record::Def {
                file,
                line,
                var: var.clone(),
                value: value.into(),
                thread,
            },
            EventKind::VarUse { var, def_loc } => Record::Use {
                file,
                line,
                var: var.clone(),
                def_file: def_loc.file.clone(),
                def_line: def_loc.line,
                thread,
            },
            EventKind::LoopIter { loop_id, mark } => Record::Loop {
                file,
                line,
                loop_id: *loop_id,
                iteration: *mark,
                thread,
            },
            EventKind::ConditionEval { condition, outcome } => Record::Condition {
                file,
                line,
                condition: condition.clone(),
                outcome: *outcome,
                thread,
            },
        }
    }

    fn into_event(self) -> std::result::Result<Event, String> {
        let (file, line, thread, kind) = match self {
            Record::Meta { .. } => return Err("duplicate meta header".into()),
            Record::Line { file, line, thread } => (file, line, thread, EventKind::LineHit),
            Record::Branch {
                file,
                line,
                branch_id,
                thread,
            } => (file, line, thread, EventKind::BranchTaken { branch_id }),
            Record::FunctionEnter {
                file,
                line,
                function_id,
                end_line,
                thread,
            } => {
                if end_line.is_some_and(|end| end < line) {
                    return Err("function end_line precedes its entry line".into());
                }
                (
                    file,
                    line,
                    thread,
                    EventKind::FunctionEnter {
                        function_id,
                        end_line,
                    },
                )
            }
            Record::FunctionExit {
                file,
                line,
                function_id,
                outcome,
                return_value,
                thread,
            } => {
                let return_value = return_value.map(ValueDescriptor::try_from).transpose()?;
                (
                    file,
                    line,
                    thread,
                    EventKind::FunctionExit {
                        function_id,
                        outcome,
                        return_value,
                    },
                )
            }
            Record::Def {
                file,
                line,
                var,
                value,
                thread,
            } => {
                let value = ValueDescriptor::try_from(value)?;
                (file, line, thread, EventKind::VarDef { var, value })
            }
            Record::Use {
                file,
                line,
                var,
                def_file,
                def_line,
                thread,
            } => {
                let def_loc = location(def_file, def_line)?;
                (file, line, thread, EventKind::VarUse { var, def_loc })
            }
            Record::Loop {
                file,
                line,
                loop_id,
                iteration,
                thread,
            } => (
                file,
                line,
                thread,
                EventKind::LoopIter {
                    loop_id,
                    mark: iteration,
                },
            ),
            Record::Condition {
                file,
                line,
                condition,
                outcome,
                thread,
            } => (
                file,
                line,
                thread,
                EventKind::ConditionEval { condition, outcome },
            ),
        };
        Ok(Event {
            loc: location(file, line)?,
            thread,
            kind,
        })
    }
}

/// Reads one trace. Blank lines are ignored.
pub fn parse_trace<R: Read>(stream: R) -> Result<TestTrace> {
    let reader = BufReader::new(stream);
    let mut header: Option<(String, Verdict)> = None;
    let mut events = Vec::new();

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let raw: serde_json::Value =
            serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        let kind = raw
            .get("kind")
            .and_then(|k| k.as_str())
            .ok_or_else(|| parse_err("record has no string `kind` field".into()))?
            .to_string();

        if header.is_none() {
            if kind != "meta" {
                return Err(Error::format(format!(
                    "missing header: first record has kind {kind:?}, expected \"meta\""
                )));
            }
            match serde_json::from_value(raw).map_err(|e| parse_err(e.to_string()))? {
                Record::Meta { test_id, verdict } => header = Some((test_id, verdict)),
                _ => unreachable!("kind checked above"),
            }
            continue;
        }

        if kind == "meta" {
            return Err(Error::format(format!(
                "line {lineno}: duplicate meta header"
            )));
        }
        if !EVENT_KINDS.contains(&kind.as_str()) {
            return Err(Error::format(format!(
                "line {lineno}: unknown event kind {kind:?}"
            )));
        }
        let record: Record = serde_json::from_value(raw).map_err(|e| parse_err(e.to_string()))?;
        events.push(record.into_event().map_err(parse_err)?);
    }

    let (test_id, verdict) = header.ok_or_else(|| Error::format("missing header"))?;
    if events.is_empty() {
        return Err(Error::format("empty event stream"));
    }
    Ok(TestTrace {
        test_id,
        verdict,
        events,
    })
}

/// Canonical encoding: fixed key order, one record per line, trailing newline.
pub fn serialize_trace(trace: &TestTrace) -> Vec<u8> {
    let mut out = Vec::new();
    let header = Record::Meta {
        test_id: trace.test_id.clone(),
        verdict: trace.verdict,
    };
    write_record(&mut out, &header);
    for e in &trace.events {
        write_record(&mut out, &Record::from_event(e));
    }
    out
}

fn write_record(out: &mut Vec<u8>, r: &Record) {
    serde_json::to_writer(&mut *out, r).expect("in-memory serialization cannot fail");
    out.push(b'\n');
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<TestTrace> {
        parse_trace(s.as_bytes())
    }

    const HEADER: &str = r#"{"kind":"meta","test_id":"t","verdict":"PASS"}"#;

    #[test]
    fn header_only_is_an_empty_stream() {
        let err = parse(HEADER).unwrap_err();
        assert!(
            matches!(err, Error::Format(ref m) if m == "empty event stream"),
            "{err}"
        );
    }

    #[test]
    fn missing_header_is_a_format_error() {
        let err = parse(r#"{"kind":"line","file":"a.py","line":1}"#).unwrap_err();
        assert!(matches!(err, Error::Format(ref m) if m.contains("missing header")));
        assert!(matches!(parse("").unwrap_err(), Error::Format(_)));
    }

    #[test]
    fn unknown_kind_is_named() {
        let s = format!(
            "{HEADER}\n{}",
            r#"{"kind":"teleport","file":"a.py","line":1}"#
        );
        let err = parse(&s).unwrap_err();
        assert!(
            matches!(err, Error::Format(ref m) if m.contains("teleport")),
            "{err}"
        );
    }

    #[test]
    fn malformed_record_reports_line_number() {
        let s = format!(
            "{HEADER}\n{}\n{{\"kind\":\"line\",",
            r#"{"kind":"line","file":"a.py","line":1}"#
        );
        match parse(&s).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("unexpected {e}"),
        }
        let bad_field = format!(
            "{HEADER}\n{}",
            r#"{"kind":"line","file":"a.py","line":1,"extra":2}"#
        );
        assert!(matches!(
            parse(&bad_field).unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
        let zero = format!("{HEADER}\n{}", r#"{"kind":"line","file":"a.py","line":0}"#);
        assert!(matches!(
            parse(&zero).unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
    }

    #[test]
    fn value_invariants_enforced_on_parse() {
        let s = format!(
            "{HEADER}\n{}",
            r#"{"kind":"def","file":"a.py","line":1,"var":"x","value":{"kind":"integer","type_name":"int"}}"#
        );
        assert!(matches!(
            parse(&s).unwrap_err(),
            Error::Parse { line: 2, .. }
        ));
    }

    #[test]
    fn canonical_output_normalizes_spacing_and_key_order() {
        let s = format!(
            "{HEADER}\n\n{}\n",
            r#"{ "line": 3, "kind": "condition", "outcome": true, "condition": "x < y", "file": "a.py" }"#
        );
        let t = parse(&s).unwrap();
        let out = String::from_utf8(serialize_trace(&t)).unwrap();
        assert_eq!(
            out,
            format!(
                "{HEADER}\n{}\n",
                r#"{"kind":"condition","file":"a.py","line":3,"condition":"x < y","outcome":true}"#
            )
        );
    }

    #[test]
    fn floats_round_trip_bit_exact() {
        let values = [0.1, -0.0, 1e300, 5e-324, f64::INFINITY, f64::NAN, 2.0];
        let events = values
            .iter()
            .map(|&f| {
                Event::new(
                    SourceLocation::new("a.py", 1),
                    EventKind::VarDef {
                        var: "f".into(),
                        value: ValueDescriptor::float(f),
                    },
                )
            })
            .collect();
        let t = TestTrace {
            test_id: "floats".into(),
            verdict: Verdict::Pass,
            events,
        };
        let bytes = serialize_trace(&t);
        assert_eq!(parse_trace(&bytes[..]).unwrap(), t);
    }
}
