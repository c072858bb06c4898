//! Spectrum tallies, suspiciousness coefficients and rank correlation.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureValue};
use crate::trace::Verdict;

/// Per-feature spectrum: satisfying failing/passing runs, plus run totals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpectrumCounts {
    pub ef: u64,
    pub ep: u64,
    pub failed: u64,
    pub passed: u64,
}

impl SpectrumCounts {
    pub fn new(ef: u64, ep: u64, failed: u64, passed: u64) -> Result<Self> {
        let c = SpectrumCounts {
            ef,
            ep,
            failed,
            passed,
        };
        c.check()?;
        if ef > failed || ep > passed {
            return Err(Error::InvalidArgument(format!(
                "counts exceed totals: ef={ef} F={failed} ep={ep} P={passed}"
            )));
        }
        Ok(c)
    }

    fn check(&self) -> Result<()> {
        if self.failed == 0 || self.passed == 0 {
            return Err(Error::InsufficientLabels {
                passed: self.passed as usize,
                failed: self.failed as usize,
            });
        }
        Ok(())
    }

    /// Fraction of satisfying runs that fail; `None` if nothing satisfies.
    pub fn failure_ratio(&self) -> Option<f64> {
        let n = self.ef + self.ep;
        (n > 0).then(|| self.ef as f64 / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Tarantula,
    Ochiai,
    DStar { exponent: u32 },
    Naish2,
    Gp13,
}

impl Metric {
    pub const DEFAULT_DSTAR_EXPONENT: u32 = 2;

    /// All five coefficients, D* with the default exponent.
    pub const ALL: [Metric; 5] = [
        Metric::Tarantula,
        Metric::Ochiai,
        Metric::DStar {
            exponent: Metric::DEFAULT_DSTAR_EXPONENT,
        },
        Metric::Naish2,
        Metric::Gp13,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Tarantula => "tarantula",
            Metric::Ochiai => "ochiai",
            Metric::DStar { .. } => "dstar",
            Metric::Naish2 => "naish2",
            Metric::Gp13 => "gp13",
        }
    }

    /// Parses a metric name; `dstar_exponent` applies only to D*.
    pub fn parse(name: &str, dstar_exponent: u32) -> Result<Self> {
        if dstar_exponent == 0 {
            return Err(Error::InvalidArgument(
                "D* exponent must be at least 1".into(),
            ));
        }
        match name
            .to_ascii_lowercase()
            .replace(['-', '_', '*'], "")
            .as_str()
        {
            "tarantula" => Ok(Metric::Tarantula),
            "ochiai" => Ok(Metric::Ochiai),
            "dstar" | "d" => Ok(Metric::DStar {
                exponent: dstar_exponent,
            }),
            "naish2" => Ok(Metric::Naish2),
            "gp13" => Ok(Metric::Gp13),
            _ => Err(Error::InvalidArgument(format!("unknown metric {name:?}"))),
        }
    }

    pub fn score(self, c: &SpectrumCounts) -> Result<f64> {
        c.check()?;
        Ok(match self {
            Metric::Tarantula => tarantula(c),
            Metric::Ochiai => ochiai(c),
            Metric::DStar { exponent } => dstar(c, exponent),
            Metric::Naish2 => naish2(c),
            Metric::Gp13 => gp13(c),
        })
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::DStar { exponent } if *exponent != Metric::DEFAULT_DSTAR_EXPONENT => {
                write!(f, "dstar{exponent}")
            }
            m => f.write_str(m.name()),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::parse(s, Metric::DEFAULT_DSTAR_EXPONENT)
    }
}

fn tarantula(c: &SpectrumCounts) -> f64 {
    if c.ef == 0 {
        return 0.0;
    }
    let fail = c.ef as f64 / c.failed as f64;
    let pass = c.ep as f64 / c.passed as f64;
    fail / (fail + pass)
}

fn ochiai(c: &SpectrumCounts) -> f64 {
    if c.ef == 0 {
        return 0.0;
    }
    c.ef as f64 / ((c.failed * (c.ef + c.ep)) as f64).sqrt()
}

fn dstar(c: &SpectrumCounts, exponent: u32) -> f64 {
    if c.ef == 0 {
        return 0.0;
    }
    let denom = c.ep + (c.failed - c.ef);
    if denom == 0 {
        return f64::INFINITY;
    }
    (c.ef as f64).powi(exponent as i32) / denom as f64
}

fn naish2(c: &SpectrumCounts) -> f64 {
    c.ef as f64 - c.ep as f64 / (c.passed as f64 + 1.0)
}

fn gp13(c: &SpectrumCounts) -> f64 {
    if c.ef == 0 {
        return 0.0;
    }
    c.ef as f64 * (1.0 + 1.0 / (2 * c.ep + c.ef) as f64)
}

/// Counts runs satisfying each feature column. Unobserved and not-holding
/// values both count as unsatisfied.
pub fn tally_all(matrix: &FeatureMatrix) -> Result<Vec<SpectrumCounts>> {
    let (passed, failed) = matrix.label_counts();
    if passed == 0 || failed == 0 {
        return Err(Error::InsufficientLabels { passed, failed });
    }
    let mut counts = vec![
        SpectrumCounts {
            ef: 0,
            ep: 0,
            failed: failed as u64,
            passed: passed as u64,
        };
        matrix.universe().len()
    ];
    for run in matrix.runs() {
        for (c, v) in counts.iter_mut().zip(&run.values) {
            if *v == FeatureValue::Holds {
                match run.verdict {
                    Verdict::Fail => c.ef += 1,
                    Verdict::Pass => c.ep += 1,
                }
            }
        }
    }
    Ok(counts)
}

pub fn tally(matrix: &FeatureMatrix, feature: usize) -> Result<SpectrumCounts> {
    if feature >= matrix.universe().len() {
        return Err(Error::InvalidArgument(format!(
            "feature index {feature} out of range"
        )));
    }
    Ok(tally_all(matrix)?[feature])
}

/// Scores every feature of the universe, in universe order.
pub fn score_all(matrix: &FeatureMatrix, metric: Metric) -> Result<Vec<f64>> {
    tally_all(matrix)?.iter().map(|c| metric.score(c)).collect()
}

fn mid_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation with mid-rank ties. `None` when either input
/// is constant, which also covers inputs shorter than two.
pub fn spearman(a: &[f64], b: &[f64]) -> Result<Option<f64>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let (ra, rb) = (mid_ranks(a), mid_ranks(b));
    let n = a.len() as f64;
    let mean = (n + 1.0) / 2.0;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean) * (y - mean);
        va += (x - mean) * (x - mean);
        vb += (y - mean) * (y - mean);
    }
    if va == 0.0 || vb == 0.0 {
        return Ok(None);
    }
    Ok(Some((cov / (va * vb).sqrt()).clamp(-1.0, 1.0)))
}

/// Spearman correlation between satisfaction of each feature and failure.
pub fn correlate_all(matrix: &FeatureMatrix) -> Vec<Option<f64>> {
    let failure: Vec<f64> = matrix
        .runs()
        .iter()
        .map(|r| (r.verdict == Verdict::Fail) as u8 as f64)
        .collect();
    (0..matrix.universe().len())
        .map(|j| {
            let sat: Vec<f64> = matrix
                .runs()
                .iter()
                .map(|r| r.values[j].is_satisfied() as u8 as f64)
                .collect();
            spearman(&sat, &failure).expect("columns have one value per run")
        })
        .collect()
}
