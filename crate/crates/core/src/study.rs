//! Evaluation machinery: class aggregates, debugging scenarios, EXAM,
//! wasted effort, top-k and classifier metrics, plus their report tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::{FeatureClass, FeatureMatrix};
use crate::localize::{localize, Aggregator, Ranking};
use crate::sbfl::{correlate_all, score_all, spearman, Metric};
use crate::trace::{SourceLocation, Verdict};

pub const DEFAULT_TOP_K: [u32; 4] = [1, 5, 10, 200];

/// Order-independent sum; compensated when every term is finite.
fn stable_sum(xs: &[f64]) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.iter().any(|x| !x.is_finite()) {
        return sorted.iter().sum();
    }
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in sorted {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn mean(xs: &[f64]) -> f64 {
    stable_sum(xs) / xs.len() as f64
}

/// Highest, mean, median and lowest of a set of values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub best: f64,
    pub mean: f64,
    pub median: f64,
    pub worst: f64,
}

impl Stats {
    pub fn of(values: &[f64]) -> Option<Stats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let n = v.len();
        let median = if n % 2 == 1 {
            v[n / 2]
        } else {
            (v[n / 2 - 1] + v[n / 2]) / 2.0
        };
        Some(Stats {
            best: v[n - 1],
            mean: mean(&v),
            median,
            worst: v[0],
        })
    }

    /// Component-wise mean over subjects.
    pub fn average(all: &[Stats]) -> Option<Stats> {
        if all.is_empty() {
            return None;
        }
        let pick = |f: fn(&Stats) -> f64| mean(&all.iter().map(f).collect::<Vec<_>>());
        Some(Stats {
            best: pick(|s| s.best),
            mean: pick(|s| s.mean),
            median: pick(|s| s.median),
            worst: pick(|s| s.worst),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassAggregate {
    pub class: FeatureClass,
    pub stats: Stats,
}

/// Per subject, summarizes each class's scores; then averages each statistic
/// over the subjects in which the class occurs.
pub fn class_aggregates(
    subjects: &[BTreeMap<FeatureClass, Vec<f64>>],
) -> BTreeMap<FeatureClass, ClassAggregate> {
    let mut per_class: BTreeMap<FeatureClass, Vec<Stats>> = BTreeMap::new();
    for subject in subjects {
        for (class, scores) in subject {
            if let Some(s) = Stats::of(scores) {
                per_class.entry(*class).or_default().push(s);
            }
        }
    }
    per_class
        .into_iter()
        .filter_map(|(class, stats)| {
            Stats::average(&stats).map(|stats| (class, ClassAggregate { class, stats }))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scenario {
    BestCase,
    AverageCase,
    WorstCase,
}

impl Scenario {
    pub const ALL: [Scenario; 3] = [
        Scenario::BestCase,
        Scenario::AverageCase,
        Scenario::WorstCase,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::BestCase => "best",
            Scenario::AverageCase => "average",
            Scenario::WorstCase => "worst",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Scenario::BestCase => "Best",
            Scenario::AverageCase => "Average",
            Scenario::WorstCase => "Worst",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase().replace('-', "_");
        let s = s.strip_suffix("_case").unwrap_or(&s);
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario {s:?}")))
    }
}

/// The faulty line a scenario stops at.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Line {
        loc: SourceLocation,
        rank: f64,
    },
    /// Too few faulty lines appear in the ranking.
    NotLocalizable {
        missing: Vec<SourceLocation>,
    },
}

/// Best case stops at the first faulty line, average case after half of
/// them (the ceil(n/2)-th smallest rank) and worst case after all of them.
pub fn scenario_target(
    ranking: &Ranking,
    faulty: &BTreeSet<SourceLocation>,
    scenario: Scenario,
) -> Result<Target> {
    if faulty.is_empty() {
        return Err(Error::InvalidArgument("no faulty lines given".into()));
    }
    let mut ranked: Vec<(f64, &SourceLocation)> = Vec::new();
    let mut missing = Vec::new();
    for loc in faulty {
        match ranking.rank_of(loc) {
            Some(r) => ranked.push((r, loc)),
            None => missing.push(loc.clone()),
        }
    }
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    let needed = match scenario {
        Scenario::BestCase => 1,
        Scenario::AverageCase => faulty.len().div_ceil(2),
        Scenario::WorstCase => faulty.len(),
    };
    Ok(match ranked.get(needed - 1) {
        Some((rank, loc)) => Target::Line {
            loc: (*loc).clone(),
            rank: *rank,
        },
        None => Target::NotLocalizable { missing },
    })
}

/// Target rank over total statement count.
pub fn exam_score(rank: f64, total_statements: u64) -> Result<f64> {
    if total_statements == 0 {
        return Err(Error::InvalidArgument(
            "total statement count must be positive".into(),
        ));
    }
    if !(rank >= 1.0 && rank <= total_statements as f64) {
        return Err(Error::InvalidArgument(format!(
            "rank {rank} outside 1..={total_statements}"
        )));
    }
    Ok(rank / total_statements as f64)
}

/// Lines inspected top-down until `target`'s whole tie group is examined.
pub fn wasted_effort(ranking: &Ranking, target: &SourceLocation) -> Option<usize> {
    ranking.position(target).map(|(above, tied)| above + tied)
}

pub fn top_k(rank: f64, k: u32) -> bool {
    rank <= k as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Localized {
    pub target: SourceLocation,
    pub rank: f64,
    pub exam: f64,
    pub effort: usize,
    pub hits: Vec<(u32, bool)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub scenario: Scenario,
    /// `None` when the scenario's target is not in the ranking.
    pub result: Option<Localized>,
    pub missing: Vec<SourceLocation>,
}

pub fn evaluate(
    ranking: &Ranking,
    faulty: &BTreeSet<SourceLocation>,
    total_statements: u64,
    scenario: Scenario,
    ks: &[u32],
) -> Result<EvalReport> {
    if ks.contains(&0) {
        return Err(Error::InvalidArgument(
            "top-k cut-offs must be at least 1".into(),
        ));
    }
    match scenario_target(ranking, faulty, scenario)? {
        Target::NotLocalizable { missing } => Ok(EvalReport {
            scenario,
            result: None,
            missing,
        }),
        Target::Line { loc, rank } => {
            let effort = wasted_effort(ranking, &loc).expect("target comes from the ranking");
            Ok(EvalReport {
                scenario,
                result: Some(Localized {
                    exam: exam_score(rank, total_statements)?,
                    effort,
                    hits: ks.iter().map(|&k| (k, top_k(rank, k))).collect(),
                    target: loc,
                    rank,
                }),
                missing: Vec::new(),
            })
        }
    }
}

impl EvalReport {
    /// Key/value text report.
    pub fn write_text<W: Write>(&self, mut out: W) -> Result<()> {
        let io = |e: std::io::Error| Error::format(e.to_string());
        writeln!(out, "scenario: {}", self.scenario).map_err(io)?;
        match &self.result {
            None => {
                writeln!(out, "status: not localizable").map_err(io)?;
                for m in &self.missing {
                    writeln!(out, "unranked faulty line: {m}").map_err(io)?;
                }
            }
            Some(r) => {
                writeln!(out, "target: {}", r.target).map_err(io)?;
                writeln!(out, "rank: {}", r.rank).map_err(io)?;
                for (k, hit) in &r.hits {
                    writeln!(out, "top-{k}: {}", if *hit { "hit" } else { "miss" }).map_err(io)?;
                }
                writeln!(out, "exam: {}", r.exam).map_err(io)?;
                writeln!(out, "effort: {}", r.effort).map_err(io)?;
            }
        }
        Ok(())
    }
}

/// Precision, recall and F1 of one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Pooled confusion counts with failing runs as the positive class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierReport {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
    pub bug: ClassMetrics,
    pub no_bug: ClassMetrics,
    pub accuracy: f64,
    pub macro_avg: ClassMetrics,
}

/// `num/den`; an empty denominator scores 1 when the class never occurs in
/// either predictions or labels, else 0.
fn ratio(num: usize, den: usize, class_absent: bool) -> f64 {
    if den == 0 {
        if class_absent {
            1.0
        } else {
            0.0
        }
    } else {
        num as f64 / den as f64
    }
}

fn class_metrics(tp: usize, fp: usize, fn_: usize) -> ClassMetrics {
    let absent = tp + fp + fn_ == 0;
    let precision = ratio(tp, tp + fp, absent);
    let recall = ratio(tp, tp + fn_, absent);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    ClassMetrics {
        precision,
        recall,
        f1,
    }
}

pub fn classifier_report(predicted: &[Verdict], actual: &[Verdict]) -> Result<ClassifierReport> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch {
            expected: actual.len(),
            found: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::InvalidArgument("no predictions to evaluate".into()));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (p, a) in predicted.iter().zip(actual) {
        match (p, a) {
            (Verdict::Fail, Verdict::Fail) => tp += 1,
            (Verdict::Fail, Verdict::Pass) => fp += 1,
            (Verdict::Pass, Verdict::Fail) => fn_ += 1,
            (Verdict::Pass, Verdict::Pass) => tn += 1,
        }
    }
    let bug = class_metrics(tp, fp, fn_);
    let no_bug = class_metrics(tn, fn_, fp);
    Ok(ClassifierReport {
        tp,
        fp,
        fn_,
        tn,
        bug,
        no_bug,
        accuracy: (tp + tn) as f64 / actual.len() as f64,
        macro_avg: ClassMetrics {
            precision: (bug.precision + no_bug.precision) / 2.0,
            recall: (bug.recall + no_bug.recall) / 2.0,
            f1: (bug.f1 + no_bug.f1) / 2.0,
        },
    })
}

fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.4}")
    } else {
        x.to_string()
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

fn csv_err(e: csv::Error) -> Error {
    Error::format(e.to_string())
}

impl ClassifierReport {
    /// Metric/value table in the layout of a per-class classification report.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv_writer(out);
        w.write_record(["Metric", "Bug", "No Bug", "Macro"])
            .map_err(csv_err)?;
        let rows = [
            (
                "Precision",
                self.bug.precision,
                self.no_bug.precision,
                self.macro_avg.precision,
            ),
            (
                "Recall",
                self.bug.recall,
                self.no_bug.recall,
                self.macro_avg.recall,
            ),
            ("F1 Score", self.bug.f1, self.no_bug.f1, self.macro_avg.f1),
        ];
        for (name, b, n, m) in rows {
            w.write_record([name.to_string(), fmt_num(b), fmt_num(n), fmt_num(m)])
                .map_err(csv_err)?;
        }
        w.write_record([
            "Accuracy".to_string(),
            String::new(),
            String::new(),
            fmt_num(self.accuracy),
        ])
        .map_err(csv_err)?;
        w.write_record([
            "Support".to_string(),
            (self.tp + self.fn_).to_string(),
            (self.tn + self.fp).to_string(),
            (self.tp + self.fp + self.fn_ + self.tn).to_string(),
        ])
        .map_err(csv_err)?;
        w.flush().map_err(|e| Error::format(e.to_string()))
    }
}

/// Reads a program-extent file: `file<TAB>statement_count` per line. Blank
/// lines and `#` comments are skipped.
pub fn parse_extent<R: BufRead>(input: R) -> Result<BTreeMap<String, u64>> {
    let mut out = BTreeMap::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::format(e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |message: String| Error::Parse {
            line: i + 1,
            message,
        };
        let (file, count) = line
            .rsplit_once('\t')
            .ok_or_else(|| bad(format!("expected file<TAB>count, got {line:?}")))?;
        let count: u64 = count
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad statement count {count:?}")))?;
        if file.is_empty() {
            return Err(bad("empty file name".into()));
        }
        if out.insert(file.to_string(), count).is_some() {
            return Err(bad(format!("file {file:?} listed twice")));
        }
    }
    Ok(out)
}

pub fn load_extent(path: impl AsRef<Path>) -> Result<BTreeMap<String, u64>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_extent(std::io::BufReader::new(file))
}

/// Sum of statement counts across files.
pub fn total_statements(extent: &BTreeMap<String, u64>) -> u64 {
    extent.values().sum()
}

/// Reads one `file:line` per line. Blank lines and `#` comments are skipped.
pub fn parse_faulty<R: BufRead>(input: R) -> Result<BTreeSet<SourceLocation>> {
    let mut out = BTreeSet::new();
    for (i, line) in input.lines().enumerate() {
        let line = line.map_err(|e| Error::format(e.to_string()))?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let loc: SourceLocation = line.parse().map_err(|e: Error| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.insert(loc);
    }
    if out.is_empty() {
        return Err(Error::format("faulty-lines file lists no lines"));
    }
    Ok(out)
}

pub fn load_faulty(path: impl AsRef<Path>) -> Result<BTreeSet<SourceLocation>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_faulty(std::io::BufReader::new(file))
}

/// A feature class, or every class combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Selection {
    Class(FeatureClass),
    All,
}

impl Selection {
    pub fn classes(self) -> BTreeSet<FeatureClass> {
        match self {
            Selection::Class(c) => [c].into(),
            Selection::All => FeatureClass::ALL.into(),
        }
    }
}

impl fmt::Display for Selection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selection::Class(c) => f.write_str(c.name()),
            Selection::All => f.write_str("all"),
        }
    }
}

/// One row of the suspiciousness/correlation table.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRow {
    pub class: FeatureClass,
    pub metric: Metric,
    pub suspiciousness: Stats,
    /// Spearman over the pooled per-run (satisfied, failed) pairs of every
    /// feature of the class in every subject.
    pub overall: Option<f64>,
    pub correlation: Option<Stats>,
}

/// Per-class suspiciousness and correlation aggregates over subjects.
pub fn correlation_table(
    subjects: &[FeatureMatrix],
    metrics: &[Metric],
) -> Result<Vec<CorrelationRow>> {
    let mut rho_by_class: Vec<BTreeMap<FeatureClass, Vec<f64>>> = Vec::new();
    let mut pooled: BTreeMap<FeatureClass, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for m in subjects {
        let mut rho: BTreeMap<FeatureClass, Vec<f64>> = BTreeMap::new();
        for (j, r) in correlate_all(m).into_iter().enumerate() {
            let class = m.universe()[j].class();
            if let Some(r) = r {
                rho.entry(class).or_default().push(r);
            }
            let (sat, fail) = pooled.entry(class).or_default();
            for run in m.runs() {
                sat.push(run.values[j].is_satisfied() as u8 as f64);
                fail.push((run.verdict == Verdict::Fail) as u8 as f64);
            }
        }
        rho_by_class.push(rho);
    }
    let correlation = class_aggregates(&rho_by_class);

    let mut rows = Vec::new();
    for &metric in metrics {
        let mut per_subject = Vec::new();
        for m in subjects {
            let scores = score_all(m, metric)?;
            let mut by_class: BTreeMap<FeatureClass, Vec<f64>> = BTreeMap::new();
            for (f, s) in m.universe().iter().zip(scores) {
                by_class.entry(f.class()).or_default().push(s);
            }
            per_subject.push(by_class);
        }
        for (class, agg) in class_aggregates(&per_subject) {
            let overall = pooled
                .get(&class)
                .and_then(|(s, f)| spearman(s, f).expect("pooled vectors have equal length"));
            rows.push(CorrelationRow {
                class,
                metric,
                suspiciousness: agg.stats,
                overall,
                correlation: correlation.get(&class).map(|c| c.stats),
            });
        }
    }
    Ok(rows)
}

pub fn write_correlation_csv<W: Write>(rows: &[CorrelationRow], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record([
        "Feature",
        "Metric",
        "Suspiciousness Best",
        "Suspiciousness Mean",
        "Suspiciousness Median",
        "Suspiciousness Worst",
        "Correlation Overall",
        "Correlation Best",
        "Correlation Mean",
        "Correlation Median",
        "Correlation Worst",
    ])
    .map_err(csv_err)?;
    for r in rows {
        let s = r.suspiciousness;
        let c = r.correlation;
        w.write_record([
            r.class.name().to_string(),
            r.metric.to_string(),
            fmt_num(s.best),
            fmt_num(s.mean),
            fmt_num(s.median),
            fmt_num(s.worst),
            fmt_opt(r.overall),
            fmt_opt(c.map(|c| c.best)),
            fmt_opt(c.map(|c| c.mean)),
            fmt_opt(c.map(|c| c.median)),
            fmt_opt(c.map(|c| c.worst)),
        ])
        .map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::format(e.to_string()))
}

/// Inputs for evaluating localization on one buggy program.
#[derive(Debug, Clone)]
pub struct Subject {
    pub name: String,
    pub matrix: FeatureMatrix,
    pub faulty: BTreeSet<SourceLocation>,
    pub total_statements: u64,
}

/// Scenario results pooled over subjects.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSummary {
    pub scenario: Scenario,
    /// Percentage of subjects whose target lies within each cut-off.
    pub top_k: Vec<(u32, f64)>,
    /// Means over localizable subjects only.
    pub exam: Option<f64>,
    pub effort: Option<f64>,
    pub localized: usize,
    pub subjects: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationRow {
    pub selection: Selection,
    pub metric: Metric,
    pub scenarios: Vec<ScenarioSummary>,
}

fn summarize(scenario: Scenario, reports: &[Option<Localized>], ks: &[u32]) -> ScenarioSummary {
    let done: Vec<&Localized> = reports.iter().flatten().collect();
    let n = reports.len();
    let top_k = ks
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let hits = done.iter().filter(|r| r.hits[i].1).count();
            (k, 100.0 * hits as f64 / n as f64)
        })
        .collect();
    let exams: Vec<f64> = done.iter().map(|r| r.exam).collect();
    let efforts: Vec<f64> = done.iter().map(|r| r.effort as f64).collect();
    ScenarioSummary {
        scenario,
        top_k,
        exam: (!exams.is_empty()).then(|| mean(&exams)),
        effort: (!efforts.is_empty()).then(|| mean(&efforts)),
        localized: done.len(),
        subjects: n,
    }
}

/// Localizes every subject with every selection and metric and pools the
/// three debugging scenarios. A subject whose ranking is empty counts as not
/// localizable.
pub fn localization_table(
    subjects: &[Subject],
    selections: &[Selection],
    metrics: &[Metric],
    aggregator: Aggregator,
    ks: &[u32],
) -> Result<Vec<LocalizationRow>> {
    if subjects.is_empty() {
        return Err(Error::InvalidArgument("no subjects to evaluate".into()));
    }
    let mut rows = Vec::new();
    for &selection in selections {
        for &metric in metrics {
            let mut per_scenario: BTreeMap<Scenario, Vec<Option<Localized>>> = BTreeMap::new();
            for s in subjects {
                let ranking = match localize(&s.matrix, metric, &selection.classes(), aggregator) {
                    Ok(r) => r,
                    Err(Error::EmptyRanking(_)) => Ranking::default(),
                    Err(e) => return Err(e),
                };
                for scenario in Scenario::ALL {
                    let rep = evaluate(&ranking, &s.faulty, s.total_statements, scenario, ks)?;
                    per_scenario.entry(scenario).or_default().push(rep.result);
                }
            }
            rows.push(LocalizationRow {
                selection,
                metric,
                scenarios: per_scenario
                    .into_iter()
                    .map(|(sc, reps)| summarize(sc, &reps, ks))
                    .collect(),
            });
        }
    }
    Ok(rows)
}

pub fn write_localization_csv<W: Write>(
    rows: &[LocalizationRow],
    ks: &[u32],
    out: W,
) -> Result<()> {
    let mut w = csv_writer(out);
    let mut header = vec!["Feature".to_string(), "Metric".to_string()];
    for sc in Scenario::ALL {
        for k in ks {
            header.push(format!("{} Top-{k}", sc.title()));
        }
        header.push(format!("{} EXAM", sc.title()));
        header.push(format!("{} Effort", sc.title()));
    }
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let mut rec = vec![r.selection.to_string(), r.metric.to_string()];
        for s in &r.scenarios {
            rec.extend(s.top_k.iter().map(|(_, pct)| format!("{pct:.2}")));
            rec.push(fmt_opt(s.exam));
            rec.push(s.effort.map(|e| format!("{e:.2}")).unwrap_or_default());
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::format(e.to_string()))
}
