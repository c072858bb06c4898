//! Decision-tree failure classification and diagnosis extraction.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::features::{
    encode_projected, Feature, FeatureMatrix, FeatureValue, LengthArm, LoopArm, ReturnPredicate,
    SignPredicate,
};
use crate::trace::{SourceLocation, TestTrace, Verdict};

const TREE_FORMAT: &str = "efdd-tree";
const TREE_VERSION: u32 = 1;

/// Split points. Rows with a value at or below the threshold go left.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Threshold {
    /// -0.5: separates unobserved from observed.
    Presence,
    /// 0.5: separates holding from not holding.
    Truth,
}

impl Threshold {
    pub fn value(self) -> f64 {
        match self {
            Threshold::Presence => -0.5,
            Threshold::Truth => 0.5,
        }
    }

    fn from_value(v: f64) -> Option<Self> {
        if v == -0.5 {
            Some(Threshold::Presence)
        } else if v == 0.5 {
            Some(Threshold::Truth)
        } else {
            None
        }
    }

    pub fn goes_left(self, v: FeatureValue) -> bool {
        v.as_i8() as f64 <= self.value()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: Threshold,
        left: Box<Node>,
        right: Box<Node>,
    },
    Leaf {
        verdict: Verdict,
        passed: usize,
        failed: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            max_depth: None,
            min_samples_split: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    pub universe: Vec<Feature>,
    pub hyperparams: Hyperparams,
    pub root: Node,
}

/// SHA-256 over the newline-joined canonical feature ids.
pub fn universe_digest(universe: &[Feature]) -> String {
    let ids: Vec<String> = universe.iter().map(Feature::id).collect();
    let hash = Sha256::digest(ids.join("\n").as_bytes());
    hash.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Weighted child impurity scaled by the node size, as an exact fraction.
#[derive(Clone, Copy)]
struct Cost {
    num: u128,
    den: u128,
}

impl Cost {
    fn cmp(self, other: Cost) -> Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

fn counts(matrix: &FeatureMatrix, rows: &[usize]) -> (usize, usize) {
    let failed = rows
        .iter()
        .filter(|&&r| matrix.runs()[r].verdict == Verdict::Fail)
        .count();
    (rows.len() - failed, failed)
}

fn leaf(passed: usize, failed: usize) -> Node {
    Node::Leaf {
        verdict: if passed > failed {
            Verdict::Pass
        } else {
            Verdict::Fail
        },
        passed,
        failed,
    }
}

fn best_split(matrix: &FeatureMatrix, rows: &[usize]) -> Option<(usize, Threshold)> {
    let (p, f) = counts(matrix, rows);
    let n = rows.len() as u128;
    // Parent impurity times n is (n^2 - p^2 - f^2) / n = 2pf / n.
    let parent = Cost {
        num: 2 * p as u128 * f as u128,
        den: n,
    };
    let mut best: Option<(Cost, usize, Threshold)> = None;
    for (j, feature) in matrix.universe().iter().enumerate() {
        let thresholds: &[Threshold] = if feature.is_binary() {
            &[Threshold::Truth]
        } else {
            &[Threshold::Presence, Threshold::Truth]
        };
        for &t in thresholds {
            let (mut lp, mut lf, mut rp, mut rf) = (0u128, 0u128, 0u128, 0u128);
            for &r in rows {
                let run = &matrix.runs()[r];
                let fail = run.verdict == Verdict::Fail;
                match (t.goes_left(run.values[j]), fail) {
                    (true, false) => lp += 1,
                    (true, true) => lf += 1,
                    (false, false) => rp += 1,
                    (false, true) => rf += 1,
                }
            }
            let (l, rr) = (lp + lf, rp + rf);
            if l == 0 || rr == 0 {
                continue;
            }
            // (L^2 - a^2 - b^2)/L + (R^2 - c^2 - d^2)/R with L^2 - a^2 - b^2 = 2ab.
            let cost = Cost {
                num: 2 * lp * lf * rr + 2 * rp * rf * l,
                den: l * rr,
            };
            if cost.cmp(parent) == Ordering::Greater {
                continue;
            }
            if best.is_none_or(|(b, _, _)| cost.cmp(b) == Ordering::Less) {
                best = Some((cost, j, t));
            }
        }
    }
    best.map(|(_, j, t)| (j, t))
}

fn grow(matrix: &FeatureMatrix, rows: Vec<usize>, depth: usize, hp: &Hyperparams) -> Node {
    let (p, f) = counts(matrix, &rows);
    let stop = p == 0
        || f == 0
        || rows.len() < hp.min_samples_split
        || hp.max_depth.is_some_and(|d| depth >= d);
    if stop {
        return leaf(p, f);
    }
    match best_split(matrix, &rows) {
        None => leaf(p, f),
        Some((j, t)) => {
            let (left, right): (Vec<usize>, Vec<usize>) = rows
                .into_iter()
                .partition(|&r| t.goes_left(matrix.runs()[r].values[j]));
            Node::Split {
                feature: j,
                threshold: t,
                left: Box::new(grow(matrix, left, depth + 1, hp)),
                right: Box::new(grow(matrix, right, depth + 1, hp)),
            }
        }
    }
}

/// Greedy Gini induction. Among equally good splits the lowest feature index
/// wins, then the lower threshold. When no split lowers the impurity, the
/// first split that separates the rows is taken, so label-consistent rows
/// always end in pure leaves. A node whose classes are tied becomes a FAIL
/// leaf.
pub fn train_tree(matrix: &FeatureMatrix, hyperparams: Hyperparams) -> Result<DecisionTree> {
    if matrix.runs().is_empty() {
        return Err(Error::InvalidArgument(
            "cannot train on an empty matrix".into(),
        ));
    }
    if hyperparams.min_samples_split < 2 {
        return Err(Error::InvalidArgument(
            "min_samples_split must be at least 2".into(),
        ));
    }
    let rows = (0..matrix.runs().len()).collect();
    Ok(DecisionTree {
        universe: matrix.universe().to_vec(),
        hyperparams,
        root: grow(matrix, rows, 0, &hyperparams),
    })
}

impl DecisionTree {
    pub fn digest(&self) -> String {
        universe_digest(&self.universe)
    }

    pub fn predict(&self, values: &[FeatureValue]) -> Result<Verdict> {
        if values.len() != self.universe.len() {
            return Err(Error::LengthMismatch {
                expected: self.universe.len(),
                found: values.len(),
            });
        }
        let mut node = &self.root;
        loop {
            match node {
                Node::Leaf { verdict, .. } => return Ok(*verdict),
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    node = if threshold.goes_left(values[*feature]) {
                        left
                    } else {
                        right
                    }
                }
            }
        }
    }

    /// Predicts every run of a matrix built over the same universe.
    pub fn predict_matrix(&self, matrix: &FeatureMatrix) -> Result<Vec<Verdict>> {
        let found = universe_digest(matrix.universe());
        if found != self.digest() {
            return Err(Error::UniverseMismatch {
                expected: self.digest(),
                found,
            });
        }
        matrix
            .runs()
            .iter()
            .map(|r| self.predict(&r.values))
            .collect()
    }

    /// Predicts a new run; features the tree has never seen are ignored.
    pub fn predict_trace(&self, trace: &TestTrace) -> Verdict {
        self.predict(&encode_projected(trace, &self.universe))
            .expect("projection matches the universe")
    }

    pub fn to_json(&self) -> String {
        let doc = TreeFile {
            format: TREE_FORMAT.into(),
            version: TREE_VERSION,
            universe_digest: self.digest(),
            universe: self.universe.iter().map(Feature::id).collect(),
            hyperparams: self.hyperparams,
            root: NodeRecord::from(&self.root),
        };
        let mut s = serde_json::to_string_pretty(&doc).expect("tree serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TreeFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: e.to_string(),
        })?;
        if doc.format != TREE_FORMAT || doc.version != TREE_VERSION {
            return Err(Error::format(format!(
                "unsupported tree file {} version {}",
                doc.format, doc.version
            )));
        }
        let universe = doc
            .universe
            .iter()
            .map(|id| Feature::from_id(id))
            .collect::<Result<Vec<_>>>()?;
        let digest = universe_digest(&universe);
        if digest != doc.universe_digest {
            return Err(Error::UniverseMismatch {
                expected: doc.universe_digest,
                found: digest,
            });
        }
        let root = doc.root.into_node(&universe)?;
        Ok(DecisionTree {
            universe,
            hyperparams: doc.hyperparams,
            root,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DecisionTree::from_json(&text)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeFile {
    format: String,
    version: u32,
    universe_digest: String,
    universe: Vec<String>,
    hyperparams: Hyperparams,
    root: NodeRecord,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum NodeRecord {
    Split {
        feature: usize,
        threshold: f64,
        left: Box<NodeRecord>,
        right: Box<NodeRecord>,
    },
    Leaf {
        verdict: Verdict,
        passed: usize,
        failed: usize,
    },
}

impl From<&Node> for NodeRecord {
    fn from(n: &Node) -> Self {
        match n {
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => NodeRecord::Split {
                feature: *feature,
                threshold: threshold.value(),
                left: Box::new(NodeRecord::from(&**left)),
                right: Box::new(NodeRecord::from(&**right)),
            },
            Node::Leaf {
                verdict,
                passed,
                failed,
            } => NodeRecord::Leaf {
                verdict: *verdict,
                passed: *passed,
                failed: *failed,
            },
        }
    }
}

impl NodeRecord {
    fn into_node(self, universe: &[Feature]) -> Result<Node> {
        match self {
            NodeRecord::Leaf {
                verdict,
                passed,
                failed,
            } => Ok(Node::Leaf {
                verdict,
                passed,
                failed,
            }),
            NodeRecord::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let f = universe.get(feature).ok_or_else(|| {
                    Error::format(format!("split on feature {feature} outside the universe"))
                })?;
                let t = Threshold::from_value(threshold)
                    .filter(|t| !(f.is_binary() && *t == Threshold::Presence))
                    .ok_or_else(|| {
                        Error::format(format!("invalid threshold {threshold} for {}", f.id()))
                    })?;
                Ok(Node::Split {
                    feature,
                    threshold: t,
                    left: Box::new(left.into_node(universe)?),
                    right: Box::new(right.into_node(universe)?),
                })
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Holds,
    HoldsNot,
    Observed,
    Unobserved,
}

impl Polarity {
    fn of(threshold: Threshold, right: bool) -> Self {
        match (threshold, right) {
            (Threshold::Truth, true) => Polarity::Holds,
            (Threshold::Truth, false) => Polarity::HoldsNot,
            (Threshold::Presence, true) => Polarity::Observed,
            (Threshold::Presence, false) => Polarity::Unobserved,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Polarity::Holds => "holds",
            Polarity::HoldsNot => "holds-not",
            Polarity::Observed => "observed",
            Polarity::Unobserved => "unobserved",
        }
    }

    pub fn accepts(self, v: FeatureValue) -> bool {
        match self {
            Polarity::Holds => v == FeatureValue::Holds,
            Polarity::HoldsNot => v != FeatureValue::Holds,
            Polarity::Observed => v != FeatureValue::Unobserved,
            Polarity::Unobserved => v == FeatureValue::Unobserved,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub index: usize,
    pub feature: Feature,
    pub polarity: Polarity,
}

/// The conditions leading from the root to one FAIL leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct FailPath {
    pub predicates: Vec<Predicate>,
    pub passed: usize,
    pub failed: usize,
}

impl FailPath {
    pub fn matches(&self, values: &[FeatureValue]) -> bool {
        self.predicates
            .iter()
            .all(|p| p.polarity.accepts(values[p.index]))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnosis {
    pub paths: Vec<FailPath>,
}

fn collect_paths(
    tree: &DecisionTree,
    node: &Node,
    prefix: &mut Vec<Predicate>,
    out: &mut Vec<FailPath>,
) {
    match node {
        Node::Leaf {
            verdict: Verdict::Fail,
            passed,
            failed,
        } => out.push(FailPath {
            predicates: prefix.clone(),
            passed: *passed,
            failed: *failed,
        }),
        Node::Leaf { .. } => {}
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            for (child, is_right) in [(left, false), (right, true)] {
                prefix.push(Predicate {
                    index: *feature,
                    feature: tree.universe[*feature].clone(),
                    polarity: Polarity::of(*threshold, is_right),
                });
                collect_paths(tree, child, prefix, out);
                prefix.pop();
            }
        }
    }
}

/// One path per FAIL leaf, predicates ordered root to leaf.
pub fn extract_diagnosis(tree: &DecisionTree) -> Diagnosis {
    let mut paths = Vec::new();
    collect_paths(tree, &tree.root, &mut Vec::new(), &mut paths);
    Diagnosis { paths }
}

/// Reads source lines for diagnosis text.
pub trait SourceLookup {
    fn line(&self, loc: &SourceLocation) -> Option<String>;
}

impl<F: Fn(&SourceLocation) -> Option<String>> SourceLookup for F {
    fn line(&self, loc: &SourceLocation) -> Option<String> {
        self(loc)
    }
}

/// Looks lines up in files below a root directory.
pub struct SourceRoot(pub std::path::PathBuf);

impl SourceLookup for SourceRoot {
    fn line(&self, loc: &SourceLocation) -> Option<String> {
        let text = std::fs::read_to_string(self.0.join(&loc.file)).ok()?;
        let line = text.lines().nth(loc.line as usize - 1)?.trim();
        (!line.is_empty()).then(|| line.to_string())
    }
}

fn sign_text(p: SignPredicate) -> &'static str {
    match p {
        SignPredicate::IsZero => "== 0",
        SignPredicate::LtZero => "< 0",
        SignPredicate::GtZero => "> 0",
    }
}

fn loop_text(arm: LoopArm) -> &'static str {
    match arm {
        LoopArm::Zero => "zero times",
        LoopArm::Once => "once",
        LoopArm::Multiple => "more than once",
    }
}

fn length_text(arm: LengthArm) -> &'static str {
    match arm {
        LengthArm::Zero => "0",
        LengthArm::One => "1",
        LengthArm::Many => "greater than 1",
    }
}

/// Describes the fact a feature asserts, without the verb.
fn subject(f: &Feature, src: Option<&dyn SourceLookup>) -> String {
    let code = |loc: &SourceLocation| src.and_then(|s| s.line(loc));
    match f {
        Feature::Line { loc } => match code(loc) {
            Some(c) => format!("{c} at {loc}"),
            None => format!("line {loc}"),
        },
        Feature::Branch { branch_id, loc } => match code(loc) {
            Some(c) => format!("branch {branch_id} into {c} at {loc}"),
            None => format!("branch {branch_id} at {loc}"),
        },
        Feature::Function { function_id, span } | Feature::FunctionError { function_id, span } => {
            format!(
                "function {function_id} ({}:{}-{})",
                span.file, span.start, span.end
            )
        }
        Feature::DefUse {
            var,
            def_loc,
            use_loc,
        } => format!("definition of {var} at {def_loc} reaching its use at {use_loc}"),
        Feature::Loop { loop_id, loc, arm } => {
            format!("loop {loop_id} at {loc} running {}", loop_text(*arm))
        }
        Feature::Condition { condition, loc } => format!("{condition} at {loc}"),
        Feature::ScalarPair {
            left,
            right,
            op,
            loc,
        } => format!("{left} {} {right} at {loc}", op.symbol()),
        Feature::VariableValue {
            var,
            predicate,
            loc,
        } => format!("{var} {} at {loc}", sign_text(*predicate)),
        Feature::ReturnValue {
            function_id,
            predicate,
            loc,
        } => match predicate {
            ReturnPredicate::Sign(s) => {
                format!("return value of {function_id} {} at {loc}", sign_text(*s))
            }
            ReturnPredicate::IsNull => format!("return value of {function_id} is null at {loc}"),
        },
        Feature::NullValue { var, loc } => format!("{var} is null at {loc}"),
        Feature::Length { var, arm, loc } => {
            format!("length of {var} is {} at {loc}", length_text(*arm))
        }
        Feature::EmptyString { var, loc } => format!("{var} is an empty string at {loc}"),
        Feature::AsciiString { var, loc } => format!("{var} is an ASCII string at {loc}"),
        Feature::DigitString { var, loc } => format!("{var} is a digit string at {loc}"),
        Feature::SpecialString { var, loc } => {
            format!("{var} contains special characters at {loc}")
        }
        Feature::EmptyBytes { var, loc } => format!("{var} is empty bytes at {loc}"),
    }
}

/// One human-readable sentence for a predicate.
pub fn describe(p: &Predicate, src: Option<&dyn SourceLookup>) -> String {
    let s = subject(&p.feature, src);
    let executed = matches!(
        p.feature,
        Feature::Line { .. } | Feature::Branch { .. } | Feature::Loop { .. }
    );
    match (&p.feature, p.polarity) {
        (Feature::Function { .. }, Polarity::Holds) => format!("{s} called"),
        (Feature::Function { .. }, _) => format!("{s} not called"),
        (Feature::FunctionError { .. }, Polarity::Holds) => format!("{s} raised an exception"),
        (Feature::FunctionError { .. }, Polarity::HoldsNot) => {
            format!("{s} did not raise an exception")
        }
        (Feature::FunctionError { .. }, Polarity::Observed) => format!("{s} returned"),
        (Feature::FunctionError { .. }, Polarity::Unobserved) => format!("{s} never returned"),
        (Feature::DefUse { .. }, Polarity::Holds) => format!("{s} observed"),
        (Feature::DefUse { .. }, _) => format!("{s} not observed"),
        (Feature::Branch { .. }, Polarity::Holds) => format!("{s} taken"),
        (Feature::Branch { .. }, _) => format!("{s} not taken"),
        (_, Polarity::Holds) if executed => format!("{s} executed"),
        (_, _) if executed => format!("{s} not executed"),
        (_, Polarity::Holds) => format!("{s} holds"),
        (_, Polarity::HoldsNot) => format!("{s} does not hold"),
        (_, Polarity::Observed) => format!("{s} is evaluated"),
        (_, Polarity::Unobserved) => format!("{s} is never evaluated"),
    }
}

pub const EMPTY_DIAGNOSIS: &str = "no failing behavior learned";

pub fn render_text(d: &Diagnosis, src: Option<&dyn SourceLookup>) -> String {
    if d.paths.is_empty() {
        return format!("{EMPTY_DIAGNOSIS}\n");
    }
    let mut out = String::new();
    for (i, p) in d.paths.iter().enumerate() {
        let _ = writeln!(
            out,
            "failure path {} ({} failing, {} passing training runs):",
            i + 1,
            p.failed,
            p.passed
        );
        if p.predicates.is_empty() {
            let _ = writeln!(out, "  every run");
        }
        for pred in &p.predicates {
            let _ = writeln!(out, "  {}", describe(pred, src));
        }
    }
    out
}

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\n', "\\n")
}

fn dot_node(tree: &DecisionTree, node: &Node, next: &mut usize, out: &mut String) -> usize {
    let id = *next;
    *next += 1;
    match node {
        Node::Leaf {
            verdict,
            passed,
            failed,
        } => {
            let style = if *verdict == Verdict::Fail {
                ", style=filled, fillcolor=\"#f4cccc\", peripheries=2"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "  n{id} [shape=ellipse, label=\"{}\\npass {passed}, fail {failed}\"{style}];",
                verdict.as_str()
            );
        }
        Node::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            let f = &tree.universe[*feature];
            let question = match threshold {
                Threshold::Truth => format!("{f}?"),
                Threshold::Presence => format!("{f} observed?"),
            };
            let _ = writeln!(
                out,
                "  n{id} [shape=box, label=\"{}\"];",
                dot_escape(&question)
            );
            for (child, is_right) in [(left, false), (right, true)] {
                let c = dot_node(tree, child, next, out);
                let _ = writeln!(
                    out,
                    "  n{id} -> n{c} [label=\"{}\"];",
                    Polarity::of(*threshold, is_right).as_str()
                );
            }
        }
    }
    id
}

/// Graphviz rendering of the whole tree; FAIL leaves are filled and doubled.
pub fn render_dot(tree: &DecisionTree) -> String {
    let mut out = String::from("digraph tree {\n");
    dot_node(tree, &tree.root, &mut 0, &mut out);
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{Comparison, FeatureClass, Run};
    use proptest::prelude::*;

    fn loc(line: u32) -> SourceLocation {
        SourceLocation::new("m.py", line)
    }

    fn line(l: u32) -> Feature {
        Feature::Line { loc: loc(l) }
    }

    fn cond(l: u32) -> Feature {
        Feature::Condition {
            condition: format!("c{l}"),
            loc: loc(l),
        }
    }

    fn matrix(universe: Vec<Feature>, rows: &[(&[i8], Verdict)]) -> FeatureMatrix {
        let runs = rows
            .iter()
            .enumerate()
            .map(|(i, (vals, v))| Run {
                test_id: format!("t{i}"),
                verdict: *v,
                values: vals
                    .iter()
                    .map(|x| FeatureValue::from_i8(*x).unwrap())
                    .collect(),
            })
            .collect();
        FeatureMatrix::new(universe, runs).unwrap()
    }

    use Verdict::{Fail, Pass};

    #[test]
    fn conjunction_with_negation_needs_two_levels() {
        // failure = f1 and not f2 over all four rows
        let m = matrix(
            vec![line(1), line(2)],
            &[
                (&[0, 0], Pass),
                (&[0, 1], Pass),
                (&[1, 0], Fail),
                (&[1, 1], Pass),
            ],
        );
        let t = train_tree(&m, Hyperparams::default()).unwrap();
        assert_eq!(t.predict_matrix(&m).unwrap(), m.verdicts());
        let Node::Split { left, right, .. } = &t.root else {
            panic!("root must split")
        };
        let depth = |n: &Node| matches!(n, Node::Split { .. }) as usize;
        assert_eq!(1 + depth(left).max(depth(right)), 2);
        let d = extract_diagnosis(&t);
        assert_eq!(d.paths.len(), 1);
        let pol: Vec<(usize, Polarity)> = d.paths[0]
            .predicates
            .iter()
            .map(|p| (p.index, p.polarity))
            .collect();
        assert_eq!(pol, vec![(0, Polarity::Holds), (1, Polarity::HoldsNot)]);
    }

    #[test]
    fn single_class_gives_single_leaf() {
        let m = matrix(vec![line(1)], &[(&[1], Pass), (&[0], Pass)]);
        let t = train_tree(&m, Hyperparams::default()).unwrap();
        assert!(matches!(
            t.root,
            Node::Leaf {
                verdict: Pass,
                passed: 2,
                failed: 0
            }
        ));
        assert!(extract_diagnosis(&t).paths.is_empty());
        assert_eq!(
            render_text(&extract_diagnosis(&t), None),
            "no failing behavior learned\n"
        );
        let empty = FeatureMatrix::new(vec![line(1)], vec![]).unwrap();
        assert!(train_tree(&empty, Hyperparams::default()).is_err());
    }

    #[test]
    fn ties_prefer_lower_index_and_tied_leaves_fail() {
        let m = matrix(vec![line(1), line(2)], &[(&[1, 1], Fail), (&[0, 0], Pass)]);
        let t = train_tree(&m, Hyperparams::default()).unwrap();
        assert!(matches!(t.root, Node::Split { feature: 0, .. }));
        let conflict = matrix(vec![line(1)], &[(&[1], Fail), (&[1], Pass)]);
        let t = train_tree(&conflict, Hyperparams::default()).unwrap();
        assert!(matches!(
            t.root,
            Node::Leaf {
                verdict: Fail,
                passed: 1,
                failed: 1
            }
        ));
    }

    #[test]
    fn tertiary_presence_split_decodes_as_observed() {
        // Failure iff the condition was never evaluated.
        let m = matrix(vec![cond(3)], &[(&[-1], Fail), (&[0], Pass), (&[1], Pass)]);
        let t = train_tree(&m, Hyperparams::default()).unwrap();
        assert!(matches!(
            t.root,
            Node::Split {
                threshold: Threshold::Presence,
                ..
            }
        ));
        let d = extract_diagnosis(&t);
        assert_eq!(d.paths[0].predicates[0].polarity, Polarity::Unobserved);
        assert!(render_text(&d, None).contains("c3 at m.py:3 is never evaluated"));
    }

    #[test]
    fn exclusive_or_still_fits() {
        let m = matrix(
            vec![line(1), line(2)],
            &[
                (&[0, 0], Pass),
                (&[1, 1], Pass),
                (&[0, 1], Fail),
                (&[1, 0], Fail),
            ],
        );
        let t = train_tree(&m, Hyperparams::default()).unwrap();
        assert_eq!(t.predict_matrix(&m).unwrap(), m.verdicts());
        assert!(matches!(t.root, Node::Split { feature: 0, .. }));
    }

    #[test]
    fn depth_cap() {
        let m = matrix(
            vec![line(1), line(2)],
            &[
                (&[0, 0], Pass),
                (&[0, 1], Pass),
                (&[1, 0], Fail),
                (&[1, 1], Pass),
            ],
        );
        let hp = Hyperparams {
            max_depth: Some(1),
            min_samples_split: 2,
        };
        let t = train_tree(&m, hp).unwrap();
        let Node::Split { left, right, .. } = &t.root else {
            panic!()
        };
        assert!(matches!(**left, Node::Leaf { .. }) && matches!(**right, Node::Leaf { .. }));
    }

    #[test]
    fn tree_file_round_trip_and_checks() {
        let m = matrix(
            vec![line(1), cond(2)],
            &[(&[1, -1], Fail), (&[0, 1], Pass), (&[1, 0], Pass)],
        );
        let t = train_tree(&m, Hyperparams::default()).unwrap();
        let json = t.to_json();
        assert!(json.contains("\"universe_digest\""));
        assert_eq!(DecisionTree::from_json(&json).unwrap(), t);
        let tampered = json.replace("line:m.py:1", "line:m.py:9");
        assert!(matches!(
            DecisionTree::from_json(&tampered).unwrap_err(),
            Error::UniverseMismatch { .. }
        ));
        let other = m.select_classes(&[FeatureClass::Line].into());
        assert!(matches!(
            t.predict_matrix(&other).unwrap_err(),
            Error::UniverseMismatch { .. }
        ));
        assert!(matches!(
            t.predict(&[]).unwrap_err(),
            Error::LengthMismatch { .. }
        ));
        assert!(DecisionTree::from_json("{").is_err());
    }

    #[test]
    fn text_with_source_lines() {
        let m = matrix(
            vec![
                line(6),
                Feature::ScalarPair {
                    left: "y".into(),
                    right: "x".into(),
                    op: Comparison::Ge,
                    loc: loc(1),
                },
            ],
            &[(&[1, 1], Pass), (&[0, 0], Pass), (&[1, 0], Fail)],
        );
        let t = train_tree(&m, Hyperparams::default()).unwrap();
        let src = |l: &SourceLocation| (l.line == 6).then(|| "return y".to_string());
        let text = render_text(&extract_diagnosis(&t), Some(&src));
        assert!(text.contains("  return y at m.py:6 executed\n"), "{text}");
        assert!(
            text.contains("  y >= x at m.py:1 does not hold\n"),
            "{text}"
        );
    }

    /// Checks the statement grammar used by the renderer:
    /// `digraph ID { (ID [attrs]; | ID -> ID [attrs];)* }`.
    fn valid_dot(s: &str) -> bool {
        let body = match s
            .strip_prefix("digraph tree {\n")
            .and_then(|b| b.strip_suffix("}\n"))
        {
            Some(b) => b,
            None => return false,
        };
        let attrs_ok = |a: &str| {
            let Some(inner) = a.strip_prefix('[').and_then(|a| a.strip_suffix("];")) else {
                return false;
            };
            let mut in_str = false;
            let mut escaped = false;
            for c in inner.chars() {
                match (in_str, escaped, c) {
                    (true, true, _) => escaped = false,
                    (true, false, '\\') => escaped = true,
                    (_, false, '"') => in_str = !in_str,
                    _ => {}
                }
            }
            !in_str
        };
        let id_ok = |t: &str| {
            t.starts_with('n') && t[1..].chars().all(|c| c.is_ascii_digit()) && t.len() > 1
        };
        body.lines().all(|l| {
            let l = l.trim();
            let (head, attrs) = match l.find(" [") {
                Some(i) => (&l[..i], &l[i + 1..]),
                None => return false,
            };
            let ids_ok = match head.split_once(" -> ") {
                Some((a, b)) => id_ok(a) && id_ok(b),
                None => id_ok(head),
            };
            ids_ok && attrs_ok(attrs)
        })
    }

    #[test]
    fn dot_output() {
        let m = matrix(
            vec![Feature::Condition {
                condition: "s == \"a\"".into(),
                loc: loc(2),
            }],
            &[(&[1], Fail), (&[0], Pass)],
        );
        let t = train_tree(&m, Hyperparams::default()).unwrap();
        let dot = render_dot(&t);
        assert!(valid_dot(&dot), "{dot}");
        assert!(dot.contains("peripheries=2"));
        assert!(dot.contains("\\\"a\\\""));
        assert!(!valid_dot("digraph tree {\n  n0 -> [label=\"x\"];\n}\n"));
    }

    fn consistent_matrix() -> impl Strategy<Value = FeatureMatrix> {
        (1usize..5, 2usize..9).prop_flat_map(|(nf, nr)| {
            let row = prop::collection::vec(-1i8..=1, nf);
            (Just(nf), prop::collection::vec((row, any::<bool>()), nr)).prop_map(|(nf, rows)| {
                // Even features are binary lines, odd ones tertiary conditions.
                let universe: Vec<Feature> = (0..nf)
                    .map(|j| {
                        if j % 2 == 0 {
                            line(j as u32 + 1)
                        } else {
                            cond(j as u32 + 1)
                        }
                    })
                    .collect();
                let mut seen = std::collections::BTreeMap::new();
                let runs = rows
                    .into_iter()
                    .enumerate()
                    .map(|(i, (vals, fail))| {
                        let values: Vec<FeatureValue> = vals
                            .iter()
                            .enumerate()
                            .map(|(j, v)| {
                                let v = if j % 2 == 0 { (*v).max(0) } else { *v };
                                FeatureValue::from_i8(v).unwrap()
                            })
                            .collect();
                        // Identical vectors share the first label seen.
                        let fail = *seen.entry(values.clone()).or_insert(fail);
                        Run {
                            test_id: format!("t{i}"),
                            verdict: if fail { Fail } else { Pass },
                            values,
                        }
                    })
                    .collect();
                FeatureMatrix::new(universe, runs).unwrap()
            })
        })
    }

    fn flipped(n: &Node) -> Node {
        match n {
            Node::Leaf {
                verdict,
                passed,
                failed,
            } => Node::Leaf {
                verdict: verdict.flipped(),
                passed: *failed,
                failed: *passed,
            },
            Node::Split {
                feature,
                threshold,
                left,
                right,
            } => Node::Split {
                feature: *feature,
                threshold: *threshold,
                left: Box::new(flipped(left)),
                right: Box::new(flipped(right)),
            },
        }
    }

    fn gini(m: &FeatureMatrix, rs: &[usize]) -> f64 {
        let (p, f) = counts(m, rs);
        let n = rs.len() as f64;
        1.0 - (p as f64 / n).powi(2) - (f as f64 / n).powi(2)
    }

    fn gain(m: &FeatureMatrix, rows: &[usize], j: usize, t: Threshold) -> Option<f64> {
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| t.goes_left(m.runs()[i].values[j]));
        if l.is_empty() || r.is_empty() {
            return None;
        }
        let n = rows.len() as f64;
        Some(gini(m, rows) - l.len() as f64 / n * gini(m, &l) - r.len() as f64 / n * gini(m, &r))
    }

    /// Every split is the first candidate with maximal gain; the gain is
    /// positive whenever some candidate has positive gain.
    fn splits_are_greedy(m: &FeatureMatrix, node: &Node, rows: Vec<usize>) -> bool {
        let Node::Split {
            feature,
            threshold,
            left,
            right,
        } = node
        else {
            return true;
        };
        let mut candidates = Vec::new();
        for (j, f) in m.universe().iter().enumerate() {
            let ts: &[Threshold] = if f.is_binary() {
                &[Threshold::Truth]
            } else {
                &[Threshold::Presence, Threshold::Truth]
            };
            for &t in ts {
                if let Some(g) = gain(m, &rows, j, t) {
                    candidates.push((g, j, t));
                }
            }
        }
        let best = candidates.iter().map(|c| c.0).fold(f64::MIN, f64::max);
        let first = candidates.iter().find(|c| c.0 > best - 1e-12).unwrap();
        let chosen = gain(m, &rows, *feature, *threshold).unwrap();
        let (l, r): (Vec<usize>, Vec<usize>) = rows
            .iter()
            .partition(|&&i| threshold.goes_left(m.runs()[i].values[*feature]));
        (first.1, first.2) == (*feature, *threshold)
            && chosen > -1e-12
            && (best <= 1e-12 || chosen > 0.0)
            && splits_are_greedy(m, left, l)
            && splits_are_greedy(m, right, r)
    }

    proptest! {
        #[test]
        fn pure_leaves_fit_consistent_data(m in consistent_matrix()) {
            let t = train_tree(&m, Hyperparams::default()).unwrap();
            prop_assert_eq!(t.predict_matrix(&m).unwrap(), m.verdicts());
            prop_assert!(splits_are_greedy(&m, &t.root, (0..m.runs().len()).collect()));
        }

        #[test]
        fn each_fail_prediction_has_exactly_one_path(m in consistent_matrix(), depth in 1usize..4) {
            let hp = Hyperparams { max_depth: Some(depth), min_samples_split: 2 };
            let t = train_tree(&m, hp).unwrap();
            let d = extract_diagnosis(&t);
            for run in m.runs() {
                let matching = d.paths.iter().filter(|p| p.matches(&run.values)).count();
                let expect = (t.predict(&run.values).unwrap() == Fail) as usize;
                prop_assert_eq!(matching, expect);
            }
        }

        #[test]
        fn relabeling_flips_leaves_only(m in consistent_matrix()) {
            let t = train_tree(&m, Hyperparams::default()).unwrap();
            let u = train_tree(&m.with_flipped_labels(), Hyperparams::default()).unwrap();
            prop_assert_eq!(u.root, flipped(&t.root));
        }

        #[test]
        fn serialization_is_stable(m in consistent_matrix()) {
            let a = train_tree(&m, Hyperparams::default()).unwrap().to_json();
            let b = train_tree(&m, Hyperparams::default()).unwrap().to_json();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(DecisionTree::from_json(&a).unwrap().to_json(), a);
        }
    }
}
