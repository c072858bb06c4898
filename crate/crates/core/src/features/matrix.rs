use std::collections::{BTreeSet, HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use super::{Feature, FeatureClass, FeatureValue};
use crate::error::{Error, Result};
use crate::trace::Verdict;

/// One labelled row of a feature matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub test_id: String,
    pub verdict: Verdict,
    pub values: Vec<FeatureValue>,
}

/// Runs encoded over a shared, ordered feature universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureMatrix {
    universe: Vec<Feature>,
    runs: Vec<Run>,
}

impl FeatureMatrix {
    pub fn new(universe: Vec<Feature>, runs: Vec<Run>) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &universe {
            if !seen.insert(f) {
                return Err(Error::Consistency(format!(
                    "feature {} listed twice",
                    f.id()
                )));
            }
        }
        let mut ids = HashSet::new();
        for r in &runs {
            if r.values.len() != universe.len() {
                return Err(Error::LengthMismatch {
                    expected: universe.len(),
                    found: r.values.len(),
                });
            }
            if !ids.insert(r.test_id.as_str()) {
                return Err(Error::Consistency(format!(
                    "duplicate test id {:?}",
                    r.test_id
                )));
            }
            for (f, v) in universe.iter().zip(&r.values) {
                if f.is_binary() && *v == FeatureValue::Unobserved {
                    return Err(Error::Consistency(format!(
                        "binary feature {} is unobserved in run {:?}",
                        f.id(),
                        r.test_id
                    )));
                }
            }
        }
        Ok(FeatureMatrix { universe, runs })
    }

    pub fn universe(&self) -> &[Feature] {
        &self.universe
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn verdicts(&self) -> Vec<Verdict> {
        self.runs.iter().map(|r| r.verdict).collect()
    }

    /// Number of (passing, failing) runs.
    pub fn label_counts(&self) -> (usize, usize) {
        let failed = self
            .runs
            .iter()
            .filter(|r| r.verdict == Verdict::Fail)
            .count();
        (self.runs.len() - failed, failed)
    }

    pub fn column(&self, j: usize) -> Vec<FeatureValue> {
        self.runs.iter().map(|r| r.values[j]).collect()
    }

    /// Restricts the matrix to the given feature classes, keeping order.
    pub fn select_classes(&self, classes: &BTreeSet<FeatureClass>) -> FeatureMatrix {
        let keep: Vec<usize> = (0..self.universe.len())
            .filter(|&j| classes.contains(&self.universe[j].class()))
            .collect();
        FeatureMatrix {
            universe: keep.iter().map(|&j| self.universe[j].clone()).collect(),
            runs: self
                .runs
                .iter()
                .map(|r| Run {
                    test_id: r.test_id.clone(),
                    verdict: r.verdict,
                    values: keep.iter().map(|&j| r.values[j]).collect(),
                })
                .collect(),
        }
    }

    /// Re-encodes the runs over another universe. Features this matrix does
    /// not know take their default value.
    pub fn project(&self, universe: &[Feature]) -> FeatureMatrix {
        let index: HashMap<&Feature, usize> = self
            .universe
            .iter()
            .enumerate()
            .map(|(j, f)| (f, j))
            .collect();
        let runs = self
            .runs
            .iter()
            .map(|r| Run {
                test_id: r.test_id.clone(),
                verdict: r.verdict,
                values: universe
                    .iter()
                    .map(|f| match index.get(f) {
                        Some(&j) => r.values[j],
                        None if f.is_binary() => FeatureValue::NotHolds,
                        None => FeatureValue::Unobserved,
                    })
                    .collect(),
            })
            .collect();
        FeatureMatrix {
            universe: universe.to_vec(),
            runs,
        }
    }

    /// Same runs with every verdict flipped.
    pub fn with_flipped_labels(&self) -> FeatureMatrix {
        let mut m = self.clone();
        for r in &mut m.runs {
            r.verdict = r.verdict.flipped();
        }
        m
    }

    /// Writes `test_id,verdict,<feature ids...>` followed by one row per run.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let csv_err = |e: csv::Error| Error::format(e.to_string());
        let mut header = vec!["test_id".to_string(), "verdict".to_string()];
        header.extend(self.universe.iter().map(Feature::id));
        w.write_record(&header).map_err(csv_err)?;
        for r in &self.runs {
            let mut row = vec![r.test_id.clone(), r.verdict.as_str().to_string()];
            row.extend(r.values.iter().map(|v| v.as_i8().to_string()));
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::format(e.to_string()))
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)
            .expect("writing to memory cannot fail");
        buf
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_reader(input);
        let mut records = r.records();
        let parse_err = |e: csv::Error| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::Parse {
                line,
                message: e.to_string(),
            }
        };
        let header = records
            .next()
            .ok_or_else(|| Error::format("empty feature matrix"))?
            .map_err(parse_err)?;
        if header.get(0) != Some("test_id") || header.get(1) != Some("verdict") {
            return Err(Error::format(
                "matrix header must start with test_id,verdict",
            ));
        }
        let universe = header
            .iter()
            .skip(2)
            .map(Feature::from_id)
            .collect::<Result<Vec<_>>>()?;
        let mut runs = Vec::new();
        for (i, rec) in records.enumerate() {
            let rec = rec.map_err(parse_err)?;
            let line = i + 2;
            let bad = |message: String| Error::Parse { line, message };
            let test_id = rec.get(0).unwrap_or_default().to_string();
            let verdict: Verdict = rec
                .get(1)
                .unwrap_or_default()
                .parse()
                .map_err(|e: Error| bad(e.to_string()))?;
            let values = rec
                .iter()
                .skip(2)
                .map(|cell| {
                    cell.trim()
                        .parse::<i8>()
                        .ok()
                        .and_then(FeatureValue::from_i8)
                        .ok_or_else(|| bad(format!("invalid feature value {cell:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            runs.push(Run {
                test_id,
                verdict,
                values,
            });
        }
        FeatureMatrix::new(universe, runs)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        FeatureMatrix::read_csv(std::io::BufReader::new(file))
    }

    pub fn to_path(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_bytes()).map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::SourceLocation;

    fn sample() -> FeatureMatrix {
        let universe = vec![
            Feature::Line {
                loc: SourceLocation::new("a,b.py", 3),
            },
            Feature::Condition {
                condition: "x < y".into(),
                loc: SourceLocation::new("a,b.py", 3),
            },
        ];
        let runs = vec![
            Run {
                test_id: "t1".into(),
                verdict: Verdict::Pass,
                values: vec![FeatureValue::Holds, FeatureValue::Unobserved],
            },
            Run {
                test_id: "t2".into(),
                verdict: Verdict::Fail,
                values: vec![FeatureValue::NotHolds, FeatureValue::NotHolds],
            },
        ];
        FeatureMatrix::new(universe, runs).unwrap()
    }

    #[test]
    fn csv_round_trip() {
        let m = sample();
        let bytes = m.to_csv_bytes();
        let text = String::from_utf8(bytes.clone()).unwrap();
        assert!(text.starts_with("test_id,verdict,\"line:a,b.py:3\""));
        assert!(text.contains("\nt1,PASS,1,-1\n"));
        assert_eq!(FeatureMatrix::read_csv(&bytes[..]).unwrap(), m);
    }

    #[test]
    fn rejects_inconsistent_rows() {
        let m = sample();
        let mut runs = m.runs().to_vec();
        runs[0].values.pop();
        assert!(matches!(
            FeatureMatrix::new(m.universe().to_vec(), runs).unwrap_err(),
            Error::LengthMismatch { .. }
        ));
        let mut runs = m.runs().to_vec();
        runs[0].values[0] = FeatureValue::Unobserved;
        assert!(FeatureMatrix::new(m.universe().to_vec(), runs).is_err());
        assert!(FeatureMatrix::read_csv(&b"test_id,verdict,line:a.py:1\nt,PASS,2\n"[..]).is_err());
        assert!(FeatureMatrix::read_csv(&b"id,verdict\n"[..]).is_err());
    }

    #[test]
    fn class_selection_and_flip() {
        let m = sample();
        let only = m.select_classes(&[FeatureClass::Condition].into());
        assert_eq!(only.universe().len(), 1);
        assert_eq!(only.runs()[0].values, vec![FeatureValue::Unobserved]);
        assert_eq!(m.label_counts(), (1, 1));
        assert_eq!(m.with_flipped_labels().runs()[0].verdict, Verdict::Fail);
    }

    #[test]
    fn projection_fills_defaults() {
        let m = sample();
        let extra = Feature::Line {
            loc: SourceLocation::new("c.py", 1),
        };
        let universe = vec![extra, m.universe()[1].clone()];
        let p = m.project(&universe);
        assert_eq!(
            p.runs()[1].values,
            vec![FeatureValue::NotHolds, FeatureValue::NotHolds]
        );
        assert_eq!(
            p.runs()[0].values,
            vec![FeatureValue::NotHolds, FeatureValue::Unobserved]
        );
        assert_eq!(m.project(m.universe()), m);
    }
}
