//! Command-line front end.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::diagnosis::{
    extract_diagnosis, render_dot, render_text, train_tree, DecisionTree, Hyperparams,
    SourceLookup, SourceRoot,
};
use crate::error::{Error, Result};
use crate::features::{extract_features, FeatureClass, FeatureMatrix};
use crate::localize::{localize, Ranking};
use crate::sbfl::Metric;
use crate::study::{
    classifier_report, correlation_table, evaluate, load_extent, load_faulty, localization_table,
    total_statements, write_correlation_csv, write_localization_csv, Scenario, Selection, Subject,
    DEFAULT_TOP_K,
};
use crate::trace::{load_trace_dir, parse_trace, validate_trace, TestTrace};

#[derive(Debug, Parser)]
#[command(
    name = "efdd",
    version,
    about = "Fault localization and failure diagnosis from execution features"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    JsonLines,
    Text,
    Dot,
}

#[derive(Debug, Args)]
pub struct Output {
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct Scoring {
    /// Suspiciousness metric(s): tarantula, ochiai, dstar, naish2, gp13.
    #[arg(long, value_delimiter = ',')]
    pub metric: Vec<String>,
    #[arg(long = "dstar-exp", default_value_t = Metric::DEFAULT_DSTAR_EXPONENT)]
    pub dstar_exp: u32,
    /// Comma-separated feature classes, or `all`.
    #[arg(long, default_value = "all")]
    pub classes: String,
    #[arg(long, default_value = "max")]
    pub agg: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check trace files for well-formedness.
    Validate {
        /// Trace files or directories holding them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Extract a feature matrix from traces.
    Features {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = "all")]
        classes: String,
        #[command(flatten)]
        output: Output,
    },
    /// Rank source lines by suspiciousness.
    Localize {
        /// A matrix CSV, or trace files and directories.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        scoring: Scoring,
        #[command(flatten)]
        output: Output,
    },
    /// Per-class suspiciousness and correlation table over several subjects.
    Correlate {
        /// One matrix CSV or trace directory per subject.
        #[arg(required = true)]
        subjects: Vec<PathBuf>,
        #[command(flatten)]
        scoring: Scoring,
        #[command(flatten)]
        output: Output,
    },
    /// Score a ranking against known faulty lines, or tabulate a study.
    Evaluate {
        #[arg(long, required_unless_present = "subject", conflicts_with = "subject")]
        ranking: Option<PathBuf>,
        #[arg(long, requires = "ranking")]
        faulty: Option<PathBuf>,
        #[arg(long, requires = "ranking")]
        extent: Option<PathBuf>,
        /// best, average or worst. All three when omitted.
        #[arg(long)]
        scenario: Option<String>,
        /// Top-k cut-offs.
        #[arg(long, value_delimiter = ',')]
        k: Vec<u32>,
        /// Subject directory with traces, faulty.txt and extent.tsv.
        #[arg(long)]
        subject: Vec<PathBuf>,
        #[command(flatten)]
        scoring: Scoring,
        #[command(flatten)]
        output: Output,
    },
    /// Train a decision tree and print the failure diagnosis.
    Diagnose {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Where to save the trained tree.
        #[arg(long)]
        tree: Option<PathBuf>,
        /// Directory that source file names in the traces are relative to.
        #[arg(long)]
        source_root: Option<PathBuf>,
        #[arg(long)]
        max_depth: Option<usize>,
        #[arg(long, default_value_t = 2)]
        min_samples_split: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Classify runs with a saved tree and report accuracy.
    Predict {
        #[arg(long, required = true)]
        tree: PathBuf,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Also write per-run predictions as CSV.
        #[arg(long)]
        predictions: Option<PathBuf>,
        #[command(flatten)]
        output: Output,
    },
}

fn format_of(output: &Output, allowed: &[Format]) -> Result<Format> {
    let f = output.format.unwrap_or(allowed[0]);
    if allowed.contains(&f) {
        Ok(f)
    } else {
        let name = f
            .to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default();
        Err(Error::InvalidArgument(format!(
            "format {name} is not available here"
        )))
    }
}

fn emit(output: &Output, bytes: &[u8], stdout: &mut dyn Write) -> Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, bytes).map_err(|e| Error::io(path, e)),
        None => stdout
            .write_all(bytes)
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn trace_files(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let mut found = Vec::new();
            for entry in std::fs::read_dir(p).map_err(|e| Error::io(p, e))? {
                let path = entry.map_err(|e| Error::io(p, e))?.path();
                if path.extension().is_some_and(|e| e == "trace") {
                    found.push(path);
                }
            }
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn load_traces(inputs: &[PathBuf]) -> Result<Vec<TestTrace>> {
    trace_files(inputs)?
        .iter()
        .map(TestTrace::from_path)
        .collect()
}

/// A single `.csv` input is read as a matrix; anything else as traces.
pub fn load_matrix(inputs: &[PathBuf]) -> Result<FeatureMatrix> {
    if let [one] = inputs {
        if one.is_file() && one.extension().is_some_and(|e| e == "csv") {
            return FeatureMatrix::from_path(one);
        }
    }
    extract_features(&load_traces(inputs)?)
}

fn metrics(scoring: &Scoring) -> Result<Vec<Metric>> {
    if scoring.metric.is_empty() {
        return Ok(vec![Metric::Tarantula]);
    }
    scoring
        .metric
        .iter()
        .map(|m| Metric::parse(m, scoring.dstar_exp))
        .collect()
}

fn all_metrics(scoring: &Scoring) -> Result<Vec<Metric>> {
    if scoring.metric.is_empty() {
        return Ok(Metric::ALL
            .into_iter()
            .map(|m| match m {
                Metric::DStar { .. } => Metric::DStar {
                    exponent: scoring.dstar_exp,
                },
                m => m,
            })
            .collect());
    }
    metrics(scoring)
}

fn validate(inputs: &[PathBuf], stdout: &mut dyn Write) -> Result<()> {
    let mut unreadable = 0;
    let mut invalid = 0;
    let files = trace_files(inputs)?;
    let mut text = String::new();
    for path in &files {
        let shown = path.display();
        let parsed = std::fs::read(path)
            .map_err(|e| Error::io(path, e))
            .and_then(|bytes| parse_trace(&bytes[..]));
        match parsed {
            Err(e) => {
                unreadable += 1;
                text.push_str(&format!("{shown}: {e}\n"));
            }
            Ok(trace) => {
                let report = validate_trace(&trace);
                if report.is_empty() {
                    text.push_str(&format!("{shown}: ok\n"));
                } else {
                    invalid += 1;
                    for v in &report.violations {
                        text.push_str(&format!("{shown}: {v}\n"));
                    }
                }
            }
        }
    }
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))?;
    if unreadable > 0 {
        return Err(Error::Format(format!(
            "{unreadable} of {} trace files could not be read",
            files.len()
        )));
    }
    if invalid > 0 {
        return Err(Error::Consistency(format!(
            "{invalid} of {} traces violate the trace format",
            files.len()
        )));
    }
    Ok(())
}

fn subject(dir: &Path) -> Result<Subject> {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    Ok(Subject {
        name,
        matrix: extract_features(&load_trace_dir(dir)?)?,
        faulty: load_faulty(dir.join("faulty.txt"))?,
        total_statements: total_statements(&load_extent(dir.join("extent.tsv"))?),
    })
}

/// Executes one command, writing its primary output to `stdout` unless
/// `--out` redirects it.
pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Validate { inputs } => validate(&inputs, stdout),
        Command::Features {
            inputs,
            classes,
            output,
        } => {
            format_of(&output, &[Format::Csv])?;
            let m = extract_features(&load_traces(&inputs)?)?;
            let m = m.select_classes(&FeatureClass::parse_list(&classes)?);
            emit(&output, &m.to_csv_bytes(), stdout)
        }
        Command::Localize {
            inputs,
            scoring,
            output,
        } => {
            let format = format_of(&output, &[Format::Csv, Format::JsonLines])?;
            let metric = match metrics(&scoring)?.as_slice() {
                [one] => *one,
                _ => {
                    return Err(Error::InvalidArgument(
                        "localize takes exactly one metric".into(),
                    ))
                }
            };
            let m = load_matrix(&inputs)?;
            let classes = FeatureClass::parse_list(&scoring.classes)?;
            let r = localize(&m, metric, &classes, scoring.agg.parse()?)?;
            let mut buf = Vec::new();
            match format {
                Format::JsonLines => r.write_json_lines(&mut buf)?,
                _ => r.write_csv(&mut buf)?,
            }
            emit(&output, &buf, stdout)
        }
        Command::Correlate {
            subjects,
            scoring,
            output,
        } => {
            format_of(&output, &[Format::Csv])?;
            let classes = FeatureClass::parse_list(&scoring.classes)?;
            let matrices = subjects
                .iter()
                .map(|s| load_matrix(std::slice::from_ref(s)).map(|m| m.select_classes(&classes)))
                .collect::<Result<Vec<_>>>()?;
            let rows = correlation_table(&matrices, &all_metrics(&scoring)?)?;
            let mut buf = Vec::new();
            write_correlation_csv(&rows, &mut buf)?;
            emit(&output, &buf, stdout)
        }
        Command::Evaluate {
            ranking,
            faulty,
            extent,
            scenario,
            k,
            subject: subjects,
            scoring,
            output,
        } => {
            let ks = if k.is_empty() {
                DEFAULT_TOP_K.to_vec()
            } else {
                k
            };
            let mut buf = Vec::new();
            if let Some(ranking) = ranking {
                format_of(&output, &[Format::Text])?;
                let (Some(faulty), Some(extent)) = (faulty, extent) else {
                    return Err(Error::InvalidArgument(
                        "--faulty and --extent are required with --ranking".into(),
                    ));
                };
                let r = Ranking::from_path(ranking)?;
                let faulty = load_faulty(faulty)?;
                let total = total_statements(&load_extent(extent)?);
                let scenarios = match scenario {
                    Some(s) => vec![s.parse::<Scenario>()?],
                    None => Scenario::ALL.to_vec(),
                };
                for (i, sc) in scenarios.into_iter().enumerate() {
                    if i > 0 {
                        buf.push(b'\n');
                    }
                    evaluate(&r, &faulty, total, sc, &ks)?.write_text(&mut buf)?;
                }
            } else {
                format_of(&output, &[Format::Csv])?;
                if scenario.is_some() {
                    return Err(Error::InvalidArgument(
                        "--scenario applies to a single ranking; study tables list every scenario"
                            .into(),
                    ));
                }
                let subjects = subjects
                    .iter()
                    .map(|d| subject(d))
                    .collect::<Result<Vec<_>>>()?;
                let classes: BTreeSet<FeatureClass> = FeatureClass::parse_list(&scoring.classes)?;
                let mut selections: Vec<Selection> =
                    classes.into_iter().map(Selection::Class).collect();
                selections.push(Selection::All);
                let rows = localization_table(
                    &subjects,
                    &selections,
                    &all_metrics(&scoring)?,
                    scoring.agg.parse()?,
                    &ks,
                )?;
                write_localization_csv(&rows, &ks, &mut buf)?;
            }
            emit(&output, &buf, stdout)
        }
        Command::Diagnose {
            inputs,
            tree: tree_path,
            source_root,
            max_depth,
            min_samples_split,
            output,
        } => {
            let format = format_of(&output, &[Format::Text, Format::Dot])?;
            let m = load_matrix(&inputs)?;
            let tree = train_tree(
                &m,
                Hyperparams {
                    max_depth,
                    min_samples_split,
                },
            )?;
            if let Some(p) = tree_path {
                tree.save(p)?;
            }
            let text = match format {
                Format::Dot => render_dot(&tree),
                _ => {
                    let root = source_root.map(SourceRoot);
                    render_text(
                        &extract_diagnosis(&tree),
                        root.as_ref().map(|r| r as &dyn SourceLookup),
                    )
                }
            };
            emit(&output, text.as_bytes(), stdout)
        }
        Command::Predict {
            tree,
            inputs,
            predictions,
            output,
        } => {
            format_of(&output, &[Format::Csv])?;
            let tree = DecisionTree::load(tree)?;
            let m = load_matrix(&inputs)?.project(&tree.universe);
            let predicted = tree.predict_matrix(&m)?;
            let actual = m.verdicts();
            if let Some(path) = predictions {
                let mut text = String::from("test_id,verdict,predicted\n");
                for (run, p) in m.runs().iter().zip(&predicted) {
                    text.push_str(&format!(
                        "{},{},{}\n",
                        csv_field(&run.test_id),
                        run.verdict.as_str(),
                        p.as_str()
                    ));
                }
                std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
            }
            let mut buf = Vec::new();
            classifier_report(&predicted, &actual)?.write_csv(&mut buf)?;
            emit(&output, &buf, stdout)
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
