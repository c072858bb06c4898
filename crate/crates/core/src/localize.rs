//! Per-line aggregation of feature scores and tie-aware line ranking.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde_json::json;

use crate::error::{Error, Result};
use crate::features::{Feature, FeatureClass, FeatureMatrix};
use crate::sbfl::{score_all, Metric};
use crate::trace::SourceLocation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregator {
    #[default]
    Max,
    Mean,
    Median,
    Min,
}

impl Aggregator {
    pub const ALL: [Aggregator; 4] = [
        Aggregator::Max,
        Aggregator::Mean,
        Aggregator::Median,
        Aggregator::Min,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Aggregator::Max => "max",
            Aggregator::Mean => "mean",
            Aggregator::Median => "median",
            Aggregator::Min => "min",
        }
    }

    pub fn apply(self, scores: &[f64]) -> Result<f64> {
        if scores.is_empty() {
            return Err(Error::InvalidArgument(
                "cannot aggregate an empty score list".into(),
            ));
        }
        let mut sorted = scores.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        Ok(match self {
            Aggregator::Max => sorted[n - 1],
            Aggregator::Min => sorted[0],
            Aggregator::Mean => sorted.iter().sum::<f64>() / n as f64,
            Aggregator::Median if n % 2 == 1 => sorted[n / 2],
            Aggregator::Median => (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0,
        })
    }
}

impl fmt::Display for Aggregator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Aggregator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.to_ascii_lowercase();
        let s = if s == "average" { "mean" } else { s.as_str() };
        Aggregator::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown aggregator {s:?}")))
    }
}

/// The features pointing at one line and their combined score.
#[derive(Debug, Clone, PartialEq)]
pub struct LineScore {
    pub loc: SourceLocation,
    pub contributing: Vec<(Feature, f64)>,
    pub aggregate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedLine {
    pub loc: SourceLocation,
    pub score: f64,
    pub average_rank: f64,
    pub contributing: Vec<Feature>,
}

/// Lines by descending score. A line with a unique score at 1-based
/// position `k` has rank `k`. Equal scores form a tie group sharing the
/// rank `n/2 + (k-1)` for a group of `n` lines starting at position `k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ranking {
    pub entries: Vec<RankedLine>,
}

impl Ranking {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, loc: &SourceLocation) -> Option<&RankedLine> {
        self.entries.iter().find(|e| &e.loc == loc)
    }

    pub fn rank_of(&self, loc: &SourceLocation) -> Option<f64> {
        self.get(loc).map(|e| e.average_rank)
    }

    /// Lines scoring strictly higher than `loc`, and the size of its tie group.
    pub fn position(&self, loc: &SourceLocation) -> Option<(usize, usize)> {
        let score = self.get(loc)?.score;
        let above = self.entries.iter().filter(|e| e.score > score).count();
        let tied = self.entries.iter().filter(|e| e.score == score).count();
        Some((above, tied))
    }

    /// CSV with columns `loc,score,average_rank,features`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let err = |e: csv::Error| Error::format(e.to_string());
        w.write_record(["loc", "score", "average_rank", "features"])
            .map_err(err)?;
        for e in &self.entries {
            let ids: Vec<String> = e.contributing.iter().map(Feature::id).collect();
            w.write_record([
                e.loc.to_string(),
                e.score.to_string(),
                e.average_rank.to_string(),
                ids.join(";"),
            ])
            .map_err(err)?;
        }
        w.flush().map_err(|e| Error::format(e.to_string()))
    }

    /// One JSON object per line; infinite scores are written as `"inf"`.
    pub fn write_json_lines<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.entries {
            let score = if e.score.is_finite() {
                json!(e.score)
            } else {
                json!(e.score.to_string())
            };
            let ids: Vec<String> = e.contributing.iter().map(Feature::id).collect();
            let rec = json!({
                "loc": e.loc.to_string(),
                "score": score,
                "average_rank": e.average_rank,
                "features": ids,
            });
            writeln!(out, "{rec}").map_err(|e| Error::format(e.to_string()))?;
        }
        Ok(())
    }

    /// Reads the format produced by [`Ranking::write_csv`].
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().from_reader(input);
        let header = r.headers().map_err(|e| Error::format(e.to_string()))?;
        if header.iter().collect::<Vec<_>>() != ["loc", "score", "average_rank", "features"] {
            return Err(Error::format(
                "ranking header must be loc,score,average_rank,features",
            ));
        }
        let mut entries = Vec::new();
        let mut seen = BTreeSet::new();
        for (i, rec) in r.records().enumerate() {
            let line = i + 2;
            let bad = |message: String| Error::Parse { line, message };
            let rec = rec.map_err(|e| bad(e.to_string()))?;
            let loc: SourceLocation = rec[0].parse().map_err(|e: Error| bad(e.to_string()))?;
            let number = |s: &str| {
                s.parse::<f64>()
                    .ok()
                    .filter(|v| !v.is_nan())
                    .ok_or_else(|| bad(format!("invalid number {s:?}")))
            };
            let score = number(&rec[1])?;
            let average_rank = number(&rec[2])?;
            let contributing = rec[3]
                .split(';')
                .filter(|s| !s.is_empty())
                .map(Feature::from_id)
                .collect::<Result<Vec<_>>>()
                .map_err(|e| bad(e.to_string()))?;
            if !seen.insert(loc.clone()) {
                return Err(bad(format!("line {loc} listed twice")));
            }
            entries.push(RankedLine {
                loc,
                score,
                average_rank,
                contributing,
            });
        }
        Ok(Ranking { entries })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Ranking::read_csv(std::io::BufReader::new(file))
    }
}

/// Fans feature scores out to the lines each feature points at.
pub fn line_scores(
    features: &[Feature],
    scores: &[f64],
    aggregator: Aggregator,
) -> Result<Vec<LineScore>> {
    if features.len() != scores.len() {
        return Err(Error::LengthMismatch {
            expected: features.len(),
            found: scores.len(),
        });
    }
    let mut by_line: BTreeMap<SourceLocation, Vec<(Feature, f64)>> = BTreeMap::new();
    for (f, s) in features.iter().zip(scores) {
        for loc in f.locations() {
            by_line.entry(loc).or_default().push((f.clone(), *s));
        }
    }
    by_line
        .into_iter()
        .map(|(loc, mut contributing)| {
            contributing.sort_by(|a, b| a.0.cmp(&b.0));
            let values: Vec<f64> = contributing.iter().map(|c| c.1).collect();
            Ok(LineScore {
                aggregate: aggregator.apply(&values)?,
                loc,
                contributing,
            })
        })
        .collect()
}

fn evidence(l: &LineScore) -> usize {
    l.contributing.iter().filter(|c| c.1 >= l.aggregate).count()
}

/// Sorts lines by descending aggregate and assigns tie-group ranks. Inside a
/// tie group, lines with more features scoring at least the aggregate come
/// first, then lines by location.
pub fn rank_lines(lines: Vec<LineScore>) -> Ranking {
    let mut lines: Vec<(usize, LineScore)> = lines.into_iter().map(|l| (evidence(&l), l)).collect();
    lines.sort_by(|(ea, a), (eb, b)| {
        b.aggregate
            .total_cmp(&a.aggregate)
            .then_with(|| eb.cmp(ea))
            .then_with(|| a.loc.cmp(&b.loc))
    });
    let lines: Vec<LineScore> = lines.into_iter().map(|(_, l)| l).collect();
    let mut entries = Vec::with_capacity(lines.len());
    let mut i = 0;
    while i < lines.len() {
        let mut j = i;
        while j < lines.len() && lines[j].aggregate == lines[i].aggregate {
            j += 1;
        }
        let n = (j - i) as f64;
        let k = (i + 1) as f64;
        let rank = if j - i == 1 { k } else { n / 2.0 + (k - 1.0) };
        for l in &lines[i..j] {
            entries.push(RankedLine {
                loc: l.loc.clone(),
                score: l.aggregate,
                average_rank: rank,
                contributing: l.contributing.iter().map(|c| c.0.clone()).collect(),
            });
        }
        i = j;
    }
    Ranking { entries }
}

/// Ranks plain per-line scores.
pub fn rank_scores(scores: &BTreeMap<SourceLocation, f64>) -> Ranking {
    rank_lines(
        scores
            .iter()
            .map(|(loc, s)| LineScore {
                loc: loc.clone(),
                contributing: Vec::new(),
                aggregate: *s,
            })
            .collect(),
    )
}

/// Scores the chosen feature classes and ranks the lines they point at.
pub fn localize(
    matrix: &FeatureMatrix,
    metric: Metric,
    classes: &BTreeSet<FeatureClass>,
    aggregator: Aggregator,
) -> Result<Ranking> {
    if classes.is_empty() {
        return Err(Error::InvalidArgument("no feature classes selected".into()));
    }
    let selected = matrix.select_classes(classes);
    let scores = score_all(&selected, metric)?;
    if selected.universe().is_empty() {
        return Err(Error::EmptyRanking(
            "none of the selected feature classes occur in the matrix".into(),
        ));
    }
    Ok(rank_lines(line_scores(
        selected.universe(),
        &scores,
        aggregator,
    )?))
}
