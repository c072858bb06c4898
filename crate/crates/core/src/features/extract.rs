use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{
    Comparison, Feature, FeatureMatrix, FeatureValue, LengthArm, LineSpan, LoopArm,
    ReturnPredicate, Run, SignPredicate,
};
use crate::error::{Error, Result};
use crate::trace::{
    EventKind, ExitOutcome, LoopMark, SourceLocation, TestTrace, ValueDescriptor, ValueKind,
};

/// Features derivable from one run. The flag records whether the feature
/// held at least once; tertiary features absent from the map are unobserved.
pub type Observations = BTreeMap<Feature, bool>;

struct Frame {
    function_id: Option<String>,
    span: Option<LineSpan>,
    live: BTreeMap<String, ValueDescriptor>,
}

impl Frame {
    fn root() -> Self {
        Frame {
            function_id: None,
            span: None,
            live: BTreeMap::new(),
        }
    }
}

#[derive(Default)]
struct Collector {
    seen: Observations,
}

impl Collector {
    fn record(&mut self, f: Feature, holds: bool) {
        *self.seen.entry(f).or_insert(false) |= holds;
    }
}

fn comparable(a: &ValueDescriptor, b: &ValueDescriptor) -> Option<Ordering> {
    match (a.kind, b.kind) {
        (ka, kb) if ka.is_numeric() && kb.is_numeric() => a.numeric?.compare(b.numeric?),
        (ValueKind::String, ValueKind::String) => {
            if a.text_is_complete() && b.text_is_complete() {
                Some(a.text.as_deref()?.cmp(b.text.as_deref()?))
            } else {
                None
            }
        }
        _ => None,
    }
}

fn value_features(c: &mut Collector, var: &str, loc: &SourceLocation, v: &ValueDescriptor) {
    let var = var.to_string();
    let loc = loc.clone();
    c.record(
        Feature::NullValue {
            var: var.clone(),
            loc: loc.clone(),
        },
        v.kind == ValueKind::Null,
    );
    if v.kind.is_numeric() {
        let sign = v.numeric.and_then(|n| n.signum());
        for predicate in SignPredicate::ALL {
            c.record(
                Feature::VariableValue {
                    var: var.clone(),
                    predicate,
                    loc: loc.clone(),
                },
                predicate.holds(sign),
            );
        }
    }
    if let (true, Some(len)) = (v.kind.has_length(), v.length) {
        let actual = LengthArm::of(len);
        for arm in LengthArm::ALL {
            c.record(
                Feature::Length {
                    var: var.clone(),
                    arm,
                    loc: loc.clone(),
                },
                arm == actual,
            );
        }
    }
    match v.kind {
        ValueKind::String => {
            let empty = v.length == Some(0);
            c.record(
                Feature::EmptyString {
                    var: var.clone(),
                    loc: loc.clone(),
                },
                empty,
            );
            if let Some(flags) = v.string_flags() {
                c.record(
                    Feature::AsciiString {
                        var: var.clone(),
                        loc: loc.clone(),
                    },
                    flags.is_ascii,
                );
                c.record(
                    Feature::DigitString {
                        var: var.clone(),
                        loc: loc.clone(),
                    },
                    flags.is_digits,
                );
                c.record(Feature::SpecialString { var, loc }, flags.has_special);
            }
        }
        ValueKind::Bytes => c.record(Feature::EmptyBytes { var, loc }, v.length == Some(0)),
        _ => {}
    }
}

fn return_features(
    c: &mut Collector,
    function_id: &str,
    loc: &SourceLocation,
    v: &ValueDescriptor,
) {
    c.record(
        Feature::ReturnValue {
            function_id: function_id.to_string(),
            predicate: ReturnPredicate::IsNull,
            loc: loc.clone(),
        },
        v.kind == ValueKind::Null,
    );
    if v.kind.is_numeric() {
        let sign = v.numeric.and_then(|n| n.signum());
        for p in SignPredicate::ALL {
            c.record(
                Feature::ReturnValue {
                    function_id: function_id.to_string(),
                    predicate: ReturnPredicate::Sign(p),
                    loc: loc.clone(),
                },
                p.holds(sign),
            );
        }
    }
}

/// Derives every feature observable in `trace`.
pub fn observe(trace: &TestTrace) -> Observations {
    let mut c = Collector::default();
    let mut frames = vec![Frame::root()];
    let mut loop_stacks: BTreeMap<(u32, SourceLocation), Vec<u64>> = BTreeMap::new();
    let mut loop_max: BTreeMap<(u32, SourceLocation), u64> = BTreeMap::new();

    for e in &trace.events {
        let loc = &e.loc;
        match &e.kind {
            EventKind::LineHit => c.record(Feature::Line { loc: loc.clone() }, true),
            EventKind::BranchTaken { branch_id } => c.record(
                Feature::Branch {
                    branch_id: *branch_id,
                    loc: loc.clone(),
                },
                true,
            ),
            EventKind::FunctionEnter {
                function_id,
                end_line,
            } => {
                let span = LineSpan {
                    file: loc.file.clone(),
                    start: loc.line,
                    end: end_line.unwrap_or(loc.line).max(loc.line),
                };
                c.record(
                    Feature::Function {
                        function_id: function_id.clone(),
                        span: span.clone(),
                    },
                    true,
                );
                frames.push(Frame {
                    function_id: Some(function_id.clone()),
                    span: Some(span),
                    live: BTreeMap::new(),
                });
            }
            EventKind::FunctionExit {
                function_id,
                outcome,
                return_value,
            } => {
                // Pop back to the matching activation; an unmatched exit
                // leaves the stack alone and spans only its own line.
                let pos = frames
                    .iter()
                    .rposition(|f| f.function_id.as_deref() == Some(function_id.as_str()));
                let span = match pos {
                    Some(p) if p > 0 => {
                        let span = frames[p].span.clone();
                        frames.truncate(p);
                        span
                    }
                    _ => None,
                }
                .unwrap_or_else(|| LineSpan {
                    file: loc.file.clone(),
                    start: loc.line,
                    end: loc.line,
                });
                c.record(
                    Feature::FunctionError {
                        function_id: function_id.clone(),
                        span,
                    },
                    *outcome == ExitOutcome::Exceptional,
                );
                if let Some(v) = return_value {
                    return_features(&mut c, function_id, loc, v);
                }
            }
            EventKind::VarDef { var, value } => {
                let frame = frames.last_mut().expect("root frame is never popped");
                for (other, other_value) in &frame.live {
                    if other == var {
                        continue;
                    }
                    if let Some(ord) = comparable(value, other_value) {
                        for op in Comparison::ALL {
                            c.record(
                                Feature::ScalarPair {
                                    left: var.clone(),
                                    right: other.clone(),
                                    op,
                                    loc: loc.clone(),
                                },
                                op.holds(ord),
                            );
                        }
                    }
                }
                value_features(&mut c, var, loc, value);
                frame.live.insert(var.clone(), value.clone());
            }
            EventKind::VarUse { var, def_loc } => c.record(
                Feature::DefUse {
                    var: var.clone(),
                    def_loc: def_loc.clone(),
                    use_loc: loc.clone(),
                },
                true,
            ),
            EventKind::LoopIter { loop_id, mark } => {
                let key = (*loop_id, loc.clone());
                let stack = loop_stacks.entry(key.clone()).or_default();
                match mark {
                    LoopMark::Begin => stack.push(0),
                    LoopMark::Hit => match stack.last_mut() {
                        Some(n) => *n += 1,
                        None => stack.push(1),
                    },
                    LoopMark::End => {
                        let n = stack.pop().unwrap_or(0);
                        let m = loop_max.entry(key).or_insert(0);
                        *m = (*m).max(n);
                    }
                }
            }
            EventKind::ConditionEval { condition, outcome } => c.record(
                Feature::Condition {
                    condition: condition.clone(),
                    loc: loc.clone(),
                },
                *outcome,
            ),
        }
    }

    for (key, stack) in loop_stacks {
        let m = loop_max.entry(key).or_insert(0);
        if let Some(top) = stack.into_iter().max() {
            *m = (*m).max(top);
        }
    }
    for ((loop_id, loc), iterations) in loop_max {
        let actual = LoopArm::of(iterations);
        for arm in LoopArm::ALL {
            c.record(
                Feature::Loop {
                    loop_id,
                    loc: loc.clone(),
                    arm,
                },
                arm == actual,
            );
        }
    }
    c.seen
}

/// Union of all features derivable from any trace, in canonical order.
pub fn feature_universe<'a>(traces: impl IntoIterator<Item = &'a TestTrace>) -> Vec<Feature> {
    let mut all = BTreeSet::new();
    for t in traces {
        all.extend(observe(t).into_keys());
    }
    all.into_iter().collect()
}

fn encode_observations(
    obs: &Observations,
    universe: &[Feature],
    strict: bool,
    test_id: &str,
) -> Result<Vec<FeatureValue>> {
    let index: HashMap<&Feature, usize> =
        universe.iter().enumerate().map(|(i, f)| (f, i)).collect();
    let mut values: Vec<FeatureValue> = universe
        .iter()
        .map(|f| {
            if f.is_binary() {
                FeatureValue::NotHolds
            } else {
                FeatureValue::Unobserved
            }
        })
        .collect();
    for (f, holds) in obs {
        match index.get(f) {
            Some(&i) => {
                values[i] = if *holds {
                    FeatureValue::Holds
                } else {
                    FeatureValue::NotHolds
                }
            }
            None if strict => {
                return Err(Error::Consistency(format!(
                    "feature {} observed in run {test_id:?} is not in the universe",
                    f.id()
                )))
            }
            None => {}
        }
    }
    Ok(values)
}

/// Encodes one run over `universe`; fails if the run shows a feature the
/// universe lacks.
pub fn encode_run(trace: &TestTrace, universe: &[Feature]) -> Result<Vec<FeatureValue>> {
    encode_observations(&observe(trace), universe, true, &trace.test_id)
}

/// Like [`encode_run`], but silently drops features outside `universe`.
/// Used to classify unseen runs against a trained model.
pub fn encode_projected(trace: &TestTrace, universe: &[Feature]) -> Vec<FeatureValue> {
    encode_observations(&observe(trace), universe, false, &trace.test_id)
        .expect("projection never fails")
}

pub fn extract_features(traces: &[TestTrace]) -> Result<FeatureMatrix> {
    if traces.is_empty() {
        return Err(Error::InvalidArgument(
            "no traces to extract features from".into(),
        ));
    }
    let mut ids = BTreeSet::new();
    for t in traces {
        if !ids.insert(t.test_id.as_str()) {
            return Err(Error::Consistency(format!(
                "duplicate test id {:?}",
                t.test_id
            )));
        }
    }
    let observed: Vec<Observations> = traces.iter().map(observe).collect();
    let universe: Vec<Feature> = observed
        .iter()
        .flat_map(|o| o.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let runs = traces
        .iter()
        .zip(&observed)
        .map(|(t, o)| {
            Ok(Run {
                test_id: t.test_id.clone(),
                verdict: t.verdict,
                values: encode_observations(o, &universe, true, &t.test_id)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureMatrix::new(universe, runs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::FeatureClass;
    use crate::trace::{Event, Verdict};

    fn at(line: u32, kind: EventKind) -> Event {
        Event::new(SourceLocation::new("f.py", line), kind)
    }

    fn trace(id: &str, verdict: Verdict, events: Vec<Event>) -> TestTrace {
        TestTrace {
            test_id: id.into(),
            verdict,
            events,
        }
    }

    fn def(line: u32, var: &str, value: ValueDescriptor) -> Event {
        at(
            line,
            EventKind::VarDef {
                var: var.into(),
                value,
            },
        )
    }

    fn lp(mark: LoopMark) -> Event {
        at(4, EventKind::LoopIter { loop_id: 0, mark })
    }

    fn loop_values(obs: &Observations) -> Vec<(LoopArm, bool)> {
        obs.iter()
            .filter_map(|(f, v)| match f {
                Feature::Loop { arm, .. } => Some((*arm, *v)),
                _ => None,
            })
            .collect()
    }

    #[test]
    fn loop_run_three_times_is_multiple() {
        let t = trace(
            "t",
            Verdict::Pass,
            vec![
                lp(LoopMark::Begin),
                lp(LoopMark::Hit),
                lp(LoopMark::Hit),
                lp(LoopMark::Hit),
                lp(LoopMark::End),
            ],
        );
        assert_eq!(
            loop_values(&observe(&t)),
            vec![
                (LoopArm::Zero, false),
                (LoopArm::Once, false),
                (LoopArm::Multiple, true)
            ]
        );
    }

    #[test]
    fn skipped_loop_is_zero_and_unbalanced_loop_still_counts() {
        let skipped = trace(
            "t",
            Verdict::Pass,
            vec![lp(LoopMark::Begin), lp(LoopMark::End)],
        );
        assert_eq!(loop_values(&observe(&skipped))[0], (LoopArm::Zero, true));
        let open = trace(
            "t",
            Verdict::Pass,
            vec![lp(LoopMark::Begin), lp(LoopMark::Hit)],
        );
        assert_eq!(loop_values(&observe(&open))[1], (LoopArm::Once, true));
    }

    #[test]
    fn unobserved_condition_encodes_minus_one() {
        let cond = |line, outcome| {
            at(
                line,
                EventKind::ConditionEval {
                    condition: format!("c{line}"),
                    outcome,
                },
            )
        };
        let a = trace("a", Verdict::Pass, vec![cond(2, true), cond(3, false)]);
        let b = trace("b", Verdict::Fail, vec![cond(2, false)]);
        let m = extract_features(&[a, b]).unwrap();
        assert_eq!(m.universe().len(), 2);
        let row_b: Vec<i8> = m.runs()[1].values.iter().map(|v| v.as_i8()).collect();
        assert_eq!(row_b, vec![0, -1]);
        let row_a: Vec<i8> = m.runs()[0].values.iter().map(|v| v.as_i8()).collect();
        assert_eq!(row_a, vec![1, 0]);
    }

    #[test]
    fn strict_encoding_rejects_foreign_features() {
        let t = trace("t", Verdict::Pass, vec![at(5, EventKind::LineHit)]);
        let err = encode_run(&t, &[]).unwrap_err();
        assert!(matches!(err, Error::Consistency(_)));
        assert!(encode_projected(&t, &[]).is_empty());
    }

    #[test]
    fn scalar_pairs_only_between_compatible_live_values() {
        let t = trace(
            "t",
            Verdict::Pass,
            vec![
                def(1, "a", ValueDescriptor::integer(2)),
                def(1, "s", ValueDescriptor::string("x")),
                def(1, "flag", ValueDescriptor::boolean(true)),
                def(2, "b", ValueDescriptor::float(2.0)),
                def(3, "t", ValueDescriptor::string("y")),
                def(4, "n", ValueDescriptor::float(f64::NAN)),
                def(5, "raw", ValueDescriptor::bytes(0)),
                def(6, "raw2", ValueDescriptor::bytes(0)),
            ],
        );
        let obs = observe(&t);
        let pairs: BTreeSet<(String, String)> = obs
            .keys()
            .filter_map(|f| match f {
                Feature::ScalarPair { left, right, .. } => Some((left.clone(), right.clone())),
                _ => None,
            })
            .collect();
        let expect: BTreeSet<(String, String)> =
            [("flag", "a"), ("b", "a"), ("b", "flag"), ("t", "s")]
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect();
        assert_eq!(pairs, expect);
        let eq = Feature::ScalarPair {
            left: "b".into(),
            right: "a".into(),
            op: Comparison::Eq,
            loc: SourceLocation::new("f.py", 2),
        };
        assert_eq!(obs.get(&eq), Some(&true));
        assert_eq!(
            obs.get(&Feature::EmptyBytes {
                var: "raw".into(),
                loc: SourceLocation::new("f.py", 5)
            }),
            Some(&true)
        );
    }

    #[test]
    fn scalar_pair_scope_is_the_activation() {
        let enter = at(
            10,
            EventKind::FunctionEnter {
                function_id: "g".into(),
                end_line: Some(12),
            },
        );
        let exit = at(
            12,
            EventKind::FunctionExit {
                function_id: "g".into(),
                outcome: ExitOutcome::Exceptional,
                return_value: None,
            },
        );
        let t = trace(
            "t",
            Verdict::Fail,
            vec![
                def(1, "a", ValueDescriptor::integer(1)),
                enter,
                def(10, "b", ValueDescriptor::integer(1)),
                exit,
                def(2, "c", ValueDescriptor::integer(1)),
            ],
        );
        let obs = observe(&t);
        let lefts: BTreeSet<&str> = obs
            .keys()
            .filter_map(|f| match f {
                Feature::ScalarPair { left, right, .. } => {
                    assert_eq!((left.as_str(), right.as_str()), ("c", "a"));
                    Some(left.as_str())
                }
                _ => None,
            })
            .collect();
        assert_eq!(lefts.len(), 1);
        let err = obs
            .iter()
            .find(|(f, _)| f.class() == FeatureClass::FunctionError)
            .unwrap();
        assert!(*err.1);
        assert_eq!(err.0.locations().len(), 3);
    }

    #[test]
    fn string_and_length_features() {
        let t = trace(
            "t",
            Verdict::Pass,
            vec![
                def(1, "s", ValueDescriptor::string("")),
                def(2, "d", ValueDescriptor::string("123")),
                def(3, "xs", ValueDescriptor::collection("list", 5)),
                def(4, "none", ValueDescriptor::null()),
            ],
        );
        let obs = observe(&t);
        let held: BTreeSet<String> = obs
            .iter()
            .filter(|(_, v)| **v)
            .map(|(f, _)| f.id())
            .collect();
        for id in [
            "empty_string:s:f.py:1",
            "ascii_string:s:f.py:1",
            "length:s:zero:f.py:1",
            "digit_string:d:f.py:2",
            "length:d:many:f.py:2",
            "length:xs:many:f.py:3",
            "null_value:none:f.py:4",
        ] {
            assert!(held.contains(id), "{id} missing from {held:?}");
        }
        assert!(!held.contains("digit_string:s:f.py:1"));
        assert!(!held.contains("special_string:d:f.py:2"));
    }

    #[test]
    fn return_value_predicates() {
        let t = trace(
            "t",
            Verdict::Pass,
            vec![
                at(
                    1,
                    EventKind::FunctionEnter {
                        function_id: "f".into(),
                        end_line: None,
                    },
                ),
                at(
                    3,
                    EventKind::FunctionExit {
                        function_id: "f".into(),
                        outcome: ExitOutcome::Normal,
                        return_value: Some(ValueDescriptor::integer(-4)),
                    },
                ),
            ],
        );
        let held: Vec<String> = observe(&t)
            .iter()
            .filter(|(f, v)| **v && f.class() == FeatureClass::ReturnValue)
            .map(|(f, _)| f.id())
            .collect();
        assert_eq!(held, vec!["return_value:f:lt_zero:f.py:3"]);
    }

    #[test]
    fn empty_and_duplicate_inputs() {
        assert!(extract_features(&[]).is_err());
        let t = trace("same", Verdict::Pass, vec![at(1, EventKind::LineHit)]);
        assert!(matches!(
            extract_features(&[t.clone(), t]).unwrap_err(),
            Error::Consistency(_)
        ));
        assert!(feature_universe(&[]).is_empty());
    }
}
