//! Survey statistics: Likert summaries, box-plot summaries, multiple-choice tallies,
//! and loading of respondent tables.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats;

pub const DEFAULT_TRIM: f64 = 0.10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SurveyError {
    #[error("sample is empty")]
    EmptySample,
    #[error("trim fraction {0} outside [0, 0.5)")]
    InvalidTrim(f64),
    #[error("question `{question}`: Likert answer {value} outside 1..=5")]
    OutOfScale { question: String, value: i64 },
    #[error("question `{question}`: unknown option `{label}`")]
    UnknownOption { question: String, label: String },
    #[error("survey table row {row}, column `{column}`: {reason}")]
    Cell {
        row: usize,
        column: String,
        reason: String,
    },
    #[error("survey table: {0}")]
    Table(String),
    #[error("survey config: {0}")]
    Config(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LikertSample {
    pub question_id: String,
    values: Vec<u8>,
}

impl LikertSample {
    pub fn new(question_id: impl Into<String>, values: Vec<u8>) -> Result<Self, SurveyError> {
        let question_id = question_id.into();
        if let Some(bad) = values.iter().find(|v| !(1..=5).contains(*v)) {
            return Err(SurveyError::OutOfScale {
                question: question_id,
                value: i64::from(*bad),
            });
        }
        Ok(Self { question_id, values })
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LikertSummary {
    pub n: usize,
    pub mean: f64,
    pub stdev: f64,
    pub trimmed_mean_10: f64,
    pub median: f64,
    pub range: f64,
}

pub fn likert_summary(s: &LikertSample, trim_fraction: f64) -> Result<LikertSummary, SurveyError> {
    if !(0.0..0.5).contains(&trim_fraction) {
        return Err(SurveyError::InvalidTrim(trim_fraction));
    }
    let xs: Vec<f64> = s.values.iter().map(|v| f64::from(*v)).collect();
    let mean = stats::mean(&xs).ok_or(SurveyError::EmptySample)?;
    let sorted = stats::sorted(&xs);
    Ok(LikertSummary {
        n: xs.len(),
        mean,
        stdev: stats::sample_stdev(&xs).unwrap_or(0.0),
        trimmed_mean_10: stats::trimmed_mean(&xs, trim_fraction).unwrap_or(mean),
        median: stats::quantile_sorted(&sorted, 0.5).unwrap_or(mean),
        range: sorted[sorted.len() - 1] - sorted[0],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotStats {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
    pub mean: f64,
}

impl BoxplotStats {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }

    pub fn fences(&self) -> (f64, f64) {
        (self.q1 - 1.5 * self.iqr(), self.q3 + 1.5 * self.iqr())
    }
}

/// Quartiles with whiskers snapped to the most extreme points within 1.5 IQR.
pub fn boxplot_stats(values: &[f64]) -> Result<BoxplotStats, SurveyError> {
    if values.is_empty() {
        return Err(SurveyError::EmptySample);
    }
    let sorted = stats::sorted(values);
    let q = |p| stats::quantile_sorted(&sorted, p).expect("non-empty");
    let (q1, median, q3) = (q(0.25), q(0.5), q(0.75));
    let iqr = q3 - q1;
    let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
    let inside = || sorted.iter().copied().filter(|x| *x >= lo && *x <= hi);
    // q1 and q3 lie within [min, max], so some point is always inside the fences
    let whisker_low = inside().next().unwrap_or(q1);
    let whisker_high = inside().next_back().unwrap_or(q3);
    Ok(BoxplotStats {
        q1,
        median,
        q3,
        whisker_low,
        whisker_high,
        outliers: sorted.iter().copied().filter(|x| *x < lo || *x > hi).collect(),
        mean: stats::mean(values).expect("non-empty"),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceTally {
    pub question_id: String,
    /// Counts in option order.
    pub counts: Vec<(String, u64)>,
    pub respondents: u64,
}

impl ChoiceTally {
    pub fn count(&self, option: &str) -> Option<u64> {
        self.counts.iter().find(|(o, _)| o == option).map(|(_, c)| *c)
    }
}

pub fn choice_tally(
    question_id: &str,
    responses: &[BTreeSet<String>],
    options: &[String],
) -> Result<ChoiceTally, SurveyError> {
    let mut counts: Vec<(String, u64)> = options.iter().map(|o| (o.clone(), 0)).collect();
    for selected in responses {
        for label in selected {
            let slot = counts
                .iter_mut()
                .find(|(o, _)| o == label)
                .ok_or_else(|| SurveyError::UnknownOption {
                    question: question_id.to_owned(),
                    label: label.clone(),
                })?;
            slot.1 += 1;
        }
    }
    Ok(ChoiceTally {
        question_id: question_id.to_owned(),
        counts,
        respondents: responses.len() as u64,
    })
}

/// Column-to-question mapping for a respondent table.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyConfig {
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
    #[serde(default = "default_trim")]
    pub trim_fraction: f64,
    #[serde(default)]
    pub likert: Vec<LikertQuestion>,
    #[serde(default)]
    pub choice: Vec<ChoiceQuestion>,
    #[serde(default)]
    pub free_text: Vec<FreeTextQuestion>,
}

fn default_delimiter() -> char {
    ','
}

fn default_trim() -> f64 {
    DEFAULT_TRIM
}

fn default_separator() -> char {
    ';'
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LikertQuestion {
    pub id: String,
    pub column: String,
    #[serde(default)]
    pub topic: String,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChoiceQuestion {
    pub id: String,
    pub column: String,
    #[serde(default)]
    pub topic: String,
    pub options: Vec<String>,
    /// Separator between selected options inside one cell.
    #[serde(default = "default_separator")]
    pub separator: char,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeTextQuestion {
    pub id: String,
    pub column: String,
}

impl SurveyConfig {
    pub fn parse(text: &str) -> Result<Self, SurveyError> {
        let cfg: SurveyConfig = toml::from_str(text).map_err(|e| SurveyError::Config(e.to_string()))?;
        if !cfg.delimiter.is_ascii() {
            return Err(SurveyError::Config("delimiter must be an ASCII character".into()));
        }
        if !(0.0..0.5).contains(&cfg.trim_fraction) {
            return Err(SurveyError::InvalidTrim(cfg.trim_fraction));
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LikertResult {
    pub question: LikertQuestion,
    pub sample: LikertSample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurveyData {
    pub likert: Vec<LikertResult>,
    pub choices: Vec<(ChoiceQuestion, ChoiceTally)>,
    pub free_text: Vec<(FreeTextQuestion, Vec<String>)>,
}

/// Reads a delimiter-separated respondent table. Blank cells are missing answers.
pub fn load_survey(table: &[u8], cfg: &SurveyConfig) -> Result<SurveyData, SurveyError> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(cfg.delimiter as u8)
        .from_reader(table);
    let headers = reader
        .headers()
        .map_err(|e| SurveyError::Table(e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| SurveyError::Config(format!("column `{name}` not found in survey table")))
    };
    let likert_cols = cfg.likert.iter().map(|q| col(&q.column)).collect::<Result<Vec<_>, _>>()?;
    let choice_cols = cfg.choice.iter().map(|q| col(&q.column)).collect::<Result<Vec<_>, _>>()?;
    let text_cols = cfg.free_text.iter().map(|q| col(&q.column)).collect::<Result<Vec<_>, _>>()?;

    let mut likert_values: Vec<Vec<u8>> = vec![Vec::new(); cfg.likert.len()];
    let mut choice_responses: Vec<Vec<BTreeSet<String>>> = vec![Vec::new(); cfg.choice.len()];
    let mut texts: Vec<Vec<String>> = vec![Vec::new(); cfg.free_text.len()];

    for (idx, record) in reader.records().enumerate() {
        // header is row 1
        let row = idx + 2;
        let record = record.map_err(|e| SurveyError::Table(e.to_string()))?;
        let cell = |i: usize| record.get(i).unwrap_or("").trim();

        for (k, q) in cfg.likert.iter().enumerate() {
            let raw = cell(likert_cols[k]);
            if raw.is_empty() {
                continue;
            }
            let value = raw
                .parse::<i64>()
                .ok()
                .filter(|v| (1..=5).contains(v))
                .ok_or_else(|| SurveyError::Cell {
                    row,
                    column: q.column.clone(),
                    reason: format!("`{raw}` is not a Likert answer 1..=5"),
                })?;
            likert_values[k].push(value as u8);
        }
        for (k, q) in cfg.choice.iter().enumerate() {
            let raw = cell(choice_cols[k]);
            let selected: BTreeSet<String> = raw
                .split(q.separator)
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect();
            if let Some(bad) = selected.iter().find(|s| !q.options.contains(s)) {
                return Err(SurveyError::Cell {
                    row,
                    column: q.column.clone(),
                    reason: format!("unknown option `{bad}`"),
                });
            }
            choice_responses[k].push(selected);
        }
        for (k, _) in cfg.free_text.iter().enumerate() {
            let raw = cell(text_cols[k]);
            if !raw.is_empty() {
                texts[k].push(raw.to_owned());
            }
        }
    }

    let likert = cfg
        .likert
        .iter()
        .zip(likert_values)
        .map(|(q, values)| {
            Ok(LikertResult {
                question: q.clone(),
                sample: LikertSample::new(q.id.clone(), values)?,
            })
        })
        .collect::<Result<Vec<_>, SurveyError>>()?;
    let choices = cfg
        .choice
        .iter()
        .zip(choice_responses)
        .map(|(q, responses)| Ok((q.clone(), choice_tally(&q.id, &responses, &q.options)?)))
        .collect::<Result<Vec<_>, SurveyError>>()?;
    let free_text = cfg.free_text.iter().cloned().zip(texts).collect();
    Ok(SurveyData {
        likert,
        choices,
        free_text,
    })
}

/// Box-plot summaries for each Likert question, keyed by question id.
pub fn likert_boxplots(data: &SurveyData) -> BTreeMap<String, Result<BoxplotStats, SurveyError>> {
    data.likert
        .iter()
        .map(|r| {
            let xs: Vec<f64> = r.sample.values().iter().map(|v| f64::from(*v)).collect();
            (r.question.id.clone(), boxplot_stats(&xs))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(v: &[u8]) -> LikertSample {
        LikertSample::new("q", v.to_vec()).unwrap()
    }

    #[test]
    fn constant_sample() {
        let s = likert_summary(&sample(&[3, 3, 3, 3]), DEFAULT_TRIM).unwrap();
        assert_eq!((s.mean, s.stdev, s.trimmed_mean_10, s.median, s.range), (3.0, 0.0, 3.0, 3.0, 0.0));
    }

    #[test]
    fn one_to_five() {
        let s = likert_summary(&sample(&[1, 2, 3, 4, 5]), DEFAULT_TRIM).unwrap();
        assert_eq!(s.mean, 3.0);
        assert!((s.stdev - 2.5f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.trimmed_mean_10, 3.0);
        assert_eq!(s.median, 3.0);
        assert_eq!(s.range, 4.0);
        assert_eq!(s.n, 5);
    }

    #[test]
    fn summary_errors() {
        assert_eq!(likert_summary(&sample(&[]), DEFAULT_TRIM), Err(SurveyError::EmptySample));
        assert!(matches!(likert_summary(&sample(&[1]), 0.5), Err(SurveyError::InvalidTrim(_))));
        assert!(LikertSample::new("q", vec![0]).is_err());
        assert!(LikertSample::new("q", vec![6]).is_err());
    }

    #[test]
    fn box_singleton() {
        let b = boxplot_stats(&[5.0]).unwrap();
        assert_eq!((b.q1, b.median, b.q3, b.whisker_low, b.whisker_high), (5.0, 5.0, 5.0, 5.0, 5.0));
        assert!(b.outliers.is_empty());
    }

    #[test]
    fn box_with_outlier() {
        let b = boxplot_stats(&[1.0, 2.0, 3.0, 4.0, 10.0]).unwrap();
        assert_eq!((b.q1, b.median, b.q3), (2.0, 3.0, 4.0));
        assert_eq!(b.fences(), (-1.0, 7.0));
        assert_eq!((b.whisker_low, b.whisker_high), (1.0, 4.0));
        assert_eq!(b.outliers, vec![10.0]);
        assert_eq!(b.mean, 4.0);
        assert_eq!(boxplot_stats(&[]), Err(SurveyError::EmptySample));
    }

    #[test]
    fn tallies() {
        let opts = vec!["a".to_string(), "b".to_string()];
        let set = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<BTreeSet<_>>();
        let t = choice_tally("q4", &[set(&["a"]), set(&["a", "b"]), set(&[])], &opts).unwrap();
        assert_eq!(t.count("a"), Some(2));
        assert_eq!(t.count("b"), Some(1));
        assert_eq!(t.respondents, 3);

        let empty = choice_tally("q4", &[], &opts).unwrap();
        assert_eq!(empty.counts, vec![("a".into(), 0), ("b".into(), 0)]);
        assert_eq!(empty.respondents, 0);

        assert!(matches!(
            choice_tally("q4", &[set(&["c"])], &opts),
            Err(SurveyError::UnknownOption { label, .. }) if label == "c"
        ));
    }

    #[test]
    fn story_length_tally() {
        let opts = vec!["Shorter".to_string(), "Longer".to_string()];
        let mut responses = vec![BTreeSet::from(["Shorter".to_string()]); 11];
        responses.push(BTreeSet::new());
        let t = choice_tally("4", &responses, &opts).unwrap();
        assert_eq!(t.count("Shorter"), Some(11));
        assert_eq!(t.count("Longer"), Some(0));
        assert_eq!(t.respondents, 12);
    }

    const CONFIG: &str = r#"
[[likert]]
id = "1"
column = "q1"
topic = "Preferred?"

[[choice]]
id = "4"
column = "q4"
options = ["Shorter", "Longer"]

[[free_text]]
id = "3"
column = "q3"
"#;

    #[test]
    fn loads_table_with_missing_answers() {
        let cfg = SurveyConfig::parse(CONFIG).unwrap();
        let table = "q1,q3,q4\n5,fast,Shorter\n,,\n4,\"slow, but ok\",Shorter;Longer\n";
        let data = load_survey(table.as_bytes(), &cfg).unwrap();
        assert_eq!(data.likert[0].sample.values(), &[5, 4]);
        assert_eq!(data.choices[0].1.count("Shorter"), Some(2));
        assert_eq!(data.choices[0].1.respondents, 3);
        assert_eq!(data.free_text[0].1, vec!["fast", "slow, but ok"]);
    }

    #[test]
    fn table_errors_name_row_and_column() {
        let cfg = SurveyConfig::parse(CONFIG).unwrap();
        let err = load_survey(b"q1,q3,q4\n5,,\n7,,\n", &cfg).unwrap_err();
        assert!(matches!(err, SurveyError::Cell { row: 3, ref column, .. } if column == "q1"), "{err}");
        let err = load_survey(b"q1,q3,q4\n5,,Medium\n", &cfg).unwrap_err();
        assert!(matches!(err, SurveyError::Cell { row: 2, .. }));
        assert!(matches!(load_survey(b"qx,q3,q4\n", &cfg), Err(SurveyError::Config(_))));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn zero_trim_equals_mean(v in proptest::collection::vec(1u8..=5, 1..40)) {
                let s = likert_summary(&sample(&v), 0.0).unwrap();
                prop_assert!((s.trimmed_mean_10 - s.mean).abs() < 1e-12);
            }

            #[test]
            fn trimmed_mean_bounded_and_permutation_invariant(mut v in proptest::collection::vec(1u8..=5, 1..40), f in 0.0f64..0.49) {
                let s = likert_summary(&sample(&v), f).unwrap();
                let (lo, hi) = (*v.iter().min().unwrap() as f64, *v.iter().max().unwrap() as f64);
                prop_assert!(s.trimmed_mean_10 >= lo - 1e-12 && s.trimmed_mean_10 <= hi + 1e-12);
                v.reverse();
                let r = likert_summary(&sample(&v), f).unwrap();
                prop_assert_eq!(s.trimmed_mean_10, r.trimmed_mean_10);
                prop_assert!(r.mean >= 1.0 && r.mean <= 5.0 && r.range <= 4.0 && r.stdev >= 0.0);
            }

            #[test]
            fn range_zero_iff_constant(v in proptest::collection::vec(1u8..=5, 1..20)) {
                let s = likert_summary(&sample(&v), DEFAULT_TRIM).unwrap();
                let constant = v.iter().all(|x| *x == v[0]);
                prop_assert_eq!(s.range == 0.0, constant);
            }

            #[test]
            fn mirrored_sample_median_is_center(v in proptest::collection::vec(-100.0f64..100.0, 0..20), c in -50.0f64..50.0) {
                let mut xs: Vec<f64> = v.iter().map(|x| c + x).collect();
                xs.extend(v.iter().map(|x| c - x));
                xs.push(c);
                let m = stats::median(&xs).unwrap();
                prop_assert!((m - c).abs() < 1e-9);
            }

            #[test]
            fn boxplot_partitions_points(v in proptest::collection::vec(-1e3f64..1e3, 1..60)) {
                let b = boxplot_stats(&v).unwrap();
                prop_assert!(b.q1 <= b.median && b.median <= b.q3);
                for x in &v {
                    let inside = *x >= b.whisker_low && *x <= b.whisker_high;
                    let listed = b.outliers.iter().filter(|o| *o == x).count();
                    let copies = v.iter().filter(|y| *y == x).count();
                    prop_assert!(inside != (listed > 0));
                    if listed > 0 { prop_assert_eq!(listed, copies); }
                }
                prop_assert!(v.contains(&b.whisker_low) && v.contains(&b.whisker_high));
            }
        }
    }
}
