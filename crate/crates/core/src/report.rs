//! Comparison tables rendered as Markdown, CSV, or a tab-separated machine format.
//!
//! Numbers are rounded half-up on their shortest decimal representation, and only
//! at render time. The machine format keeps full precision and doubles as a
//! gnuplot data file (`#` comments, one data block per table, blocks separated by
//! two blank lines so `index N` selects a table).

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::metrics::CohortMetrics;
use crate::survey::{BoxplotStats, ChoiceTally, LikertSummary};

/// Placeholder for cells without a defined value.
pub const MISSING: &str = "–";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReportError {
    #[error("row `{label}` has {got} cells, table has {want} columns")]
    RowWidth { label: String, got: usize, want: usize },
    #[error("unknown format `{0}` (expected markdown, csv or machine)")]
    UnknownFormat(String),
    #[error("machine table line {line}: {reason}")]
    Machine { line: usize, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Markdown,
    Csv,
    Machine,
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "machine" => Ok(Format::Machine),
            other => Err(ReportError::UnknownFormat(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub header: String,
    pub decimals: u8,
}

impl Column {
    pub fn new(header: &str, decimals: u8) -> Self {
        Self {
            header: header.to_owned(),
            decimals,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub label: String,
    pub kanban: bool,
    pub cells: Vec<Option<f64>>,
}

impl Row {
    pub fn display_label(&self) -> String {
        if self.kanban {
            format!("{}*", self.label)
        } else {
            self.label.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub label_header: String,
    pub columns: Vec<Column>,
    rows: Vec<Row>,
    pub footnotes: Vec<String>,
}

impl Table {
    pub fn new(title: &str, label_header: &str, columns: Vec<Column>) -> Self {
        Self {
            title: title.to_owned(),
            label_header: label_header.to_owned(),
            columns,
            rows: Vec::new(),
            footnotes: Vec::new(),
        }
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn push_row(&mut self, label: &str, kanban: bool, cells: Vec<Option<f64>>) -> Result<(), ReportError> {
        if cells.len() != self.columns.len() {
            return Err(ReportError::RowWidth {
                label: label.to_owned(),
                got: cells.len(),
                want: self.columns.len(),
            });
        }
        self.rows.push(Row {
            label: label.to_owned(),
            kanban,
            cells,
        });
        Ok(())
    }

    fn push(&mut self, label: &str, kanban: bool, cells: Vec<Option<f64>>) {
        self.push_row(label, kanban, cells)
            .expect("table builders emit one cell per column");
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Markdown => self.to_markdown(),
            Format::Csv => self.to_csv(),
            Format::Machine => self.to_machine(),
        }
    }

    fn formatted_cells(&self, row: &Row) -> Vec<String> {
        row.cells
            .iter()
            .zip(&self.columns)
            .map(|(cell, col)| match cell {
                Some(v) => round_half_up(*v, col.decimals),
                None => MISSING.to_owned(),
            })
            .collect()
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "### {}\n", self.title);
        let headers: Vec<&str> = std::iter::once(self.label_header.as_str())
            .chain(self.columns.iter().map(|c| c.header.as_str()))
            .collect();
        let _ = writeln!(out, "| {} |", headers.join(" | "));
        let align: Vec<&str> = std::iter::once("---")
            .chain(self.columns.iter().map(|_| "---:"))
            .collect();
        let _ = writeln!(out, "|{}|", align.join("|"));
        for row in &self.rows {
            let mut cells = vec![row.display_label()];
            cells.extend(self.formatted_cells(row));
            let _ = writeln!(out, "| {} |", cells.join(" | "));
        }
        if !self.footnotes.is_empty() {
            out.push('\n');
            for note in &self.footnotes {
                let _ = writeln!(out, "{note}");
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        let header: Vec<&str> = std::iter::once(self.label_header.as_str())
            .chain(self.columns.iter().map(|c| c.header.as_str()))
            .collect();
        w.write_record(&header).expect("in-memory CSV write");
        for row in &self.rows {
            let mut rec = vec![row.display_label()];
            rec.extend(self.formatted_cells(row));
            w.write_record(&rec).expect("in-memory CSV write");
        }
        let bytes = w.into_inner().expect("in-memory CSV flush");
        String::from_utf8(bytes).expect("CSV of UTF-8 strings is UTF-8")
    }

    pub fn to_machine(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# table\t{}", self.title);
        let mut cols = vec![self.label_header.clone(), "kanban".to_owned()];
        cols.extend(self.columns.iter().map(|c| c.header.clone()));
        let _ = writeln!(out, "# columns\t{}", cols.join("\t"));
        for note in &self.footnotes {
            let _ = writeln!(out, "# note\t{note}");
        }
        for row in &self.rows {
            let _ = write!(out, "{}\t{}", quote(&row.label), u8::from(row.kanban));
            for cell in &row.cells {
                match cell {
                    Some(v) => {
                        let _ = write!(out, "\t{v:?}");
                    }
                    None => out.push_str("\tNaN"),
                }
            }
            out.push('\n');
        }
        out
    }
}

fn quote(label: &str) -> String {
    let escaped = label
        .replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\t', "\\t")
        .replace('\n', "\\n");
    format!("\"{escaped}\"")
}

fn unquote(s: &str) -> Option<String> {
    let inner = s.strip_prefix('"')?.strip_suffix('"')?;
    let mut out = String::new();
    let mut chars = inner.chars();
    while let Some(c) = chars.next() {
        if c == '\\' {
            match chars.next()? {
                't' => out.push('\t'),
                'n' => out.push('\n'),
                other => out.push(other),
            }
        } else {
            out.push(c);
        }
    }
    Some(out)
}

/// A table read back from the machine format.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineTable {
    pub title: String,
    /// Label header followed by the numeric column headers.
    pub headers: Vec<String>,
    pub rows: Vec<Row>,
}

pub fn parse_machine(text: &str) -> Result<Vec<MachineTable>, ReportError> {
    let mut tables: Vec<MachineTable> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let fail = |reason: &str| ReportError::Machine {
            line: lineno,
            reason: reason.to_owned(),
        };
        if line.trim().is_empty() {
            continue;
        }
        if let Some(title) = line.strip_prefix("# table\t") {
            tables.push(MachineTable {
                title: title.to_owned(),
                headers: Vec::new(),
                rows: Vec::new(),
            });
            continue;
        }
        let table = tables.last_mut().ok_or_else(|| fail("data before `# table` line"))?;
        if let Some(cols) = line.strip_prefix("# columns\t") {
            let mut cols: Vec<String> = cols.split('\t').map(str::to_owned).collect();
            if cols.len() < 2 || cols[1] != "kanban" {
                return Err(fail("columns line must start with the label and `kanban`"));
            }
            cols.remove(1);
            table.headers = cols;
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let mut fields = line.split('\t');
        let label = fields
            .next()
            .and_then(unquote)
            .ok_or_else(|| fail("row label must be a quoted string"))?;
        let kanban = match fields.next() {
            Some("0") => false,
            Some("1") => true,
            _ => return Err(fail("kanban flag must be 0 or 1")),
        };
        let cells = fields
            .map(|f| match f {
                "NaN" => Ok(None),
                v => v.parse::<f64>().map(Some).map_err(|_| fail("cell is not a number")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if cells.len() + 1 != table.headers.len() {
            return Err(fail("row width does not match the columns line"));
        }
        table.rows.push(Row { label, kanban, cells });
    }
    Ok(tables)
}

/// Rounds half-up (away from zero) at `decimals` places, working on the shortest
/// decimal representation of `x` so that e.g. 2.675 becomes "2.68".
pub fn round_half_up(x: f64, decimals: u8) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let decimals = usize::from(decimals);
    let repr = format!("{}", x.abs());
    let (int_part, frac_part) = repr.split_once('.').unwrap_or((&repr, ""));
    let mut digits: Vec<u8> = int_part.bytes().chain(frac_part.bytes().chain(std::iter::repeat(b'0')).take(decimals)).collect();
    let round_up = frac_part.as_bytes().get(decimals).is_some_and(|d| *d >= b'5');
    if round_up {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, b'1');
                break;
            }
            i -= 1;
            if digits[i] == b'9' {
                digits[i] = b'0';
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - decimals;
    let mut out = String::from_utf8(digits[..split].to_vec()).expect("ASCII digits");
    if decimals > 0 {
        out.push('.');
        out.push_str(std::str::from_utf8(&digits[split..]).expect("ASCII digits"));
    }
    if x < 0.0 && out.bytes().any(|b| matches!(b, b'1'..=b'9')) {
        out.insert(0, '-');
    }
    out
}

const NORMALIZATION_NOTE: &str =
    "* Kanban cohort. Values are means per active contributor; line changes are per commit.";
const KANBAN_NOTE: &str = "* Kanban cohort.";
const EMPTY_SELECTION_NOTE: &str = "– no issues were closed in the study window.";

pub fn commit_table(rows: &[CohortMetrics]) -> Table {
    let mut t = Table::new(
        "Commit attributes, last week of project",
        "Course year",
        vec![
            Column::new("Commit amount", 1),
            Column::new("Touched files", 1),
            Column::new("Last-minute commits", 1),
            Column::new("Line changes per commit", 1),
            Column::new("Unique issues referenced", 1),
        ],
    );
    for m in rows {
        let c = &m.commit;
        t.push(
            &m.cohort_label,
            m.kanban_flag,
            vec![
                Some(c.commit_amount),
                Some(c.touched_files),
                Some(c.last_minute_commits),
                Some(c.line_changes_per_commit),
                Some(c.unique_issues_referenced),
            ],
        );
    }
    t.footnotes.push(NORMALIZATION_NOTE.to_owned());
    t
}

pub fn issue_table(rows: &[CohortMetrics]) -> Table {
    let mut t = Table::new(
        "Issues and their attributes, last week of project",
        "Course year",
        vec![
            Column::new("Issue amount", 1),
            Column::new("Issue events", 1),
            Column::new("Issue comments", 1),
            Column::new("% issues opened & closed by same person", 0),
        ],
    );
    let mut any_empty = false;
    for m in rows {
        let i = &m.issue;
        let empty = m.provenance.empty_issue_selection;
        any_empty |= empty;
        t.push(
            &m.cohort_label,
            m.kanban_flag,
            vec![
                Some(i.issue_amount),
                Some(i.issue_events),
                Some(i.issue_comments),
                (!empty).then_some(i.pct_same_open_close),
            ],
        );
    }
    t.footnotes
        .push("* Kanban cohort. Amounts, events and comments are means per active contributor.".to_owned());
    if any_empty {
        t.footnotes.push(EMPTY_SELECTION_NOTE.to_owned());
    }
    t
}

pub fn text_table(rows: &[CohortMetrics]) -> Table {
    let mut t = Table::new(
        "Issue body and title length (characters)",
        "Course year",
        vec![
            Column::new("Body mean", 1),
            Column::new("Body stdev", 1),
            Column::new("Body median", 1),
            Column::new("Title mean", 1),
            Column::new("Title stdev", 1),
            Column::new("Title median", 1),
        ],
    );
    let mut any_empty = false;
    for m in rows {
        let cells = match &m.text {
            Some(s) => vec![
                Some(s.body.mean),
                Some(s.body.stdev),
                Some(s.body.median),
                Some(s.title.mean),
                Some(s.title.stdev),
                Some(s.title.median),
            ],
            None => {
                any_empty = true;
                vec![None; 6]
            }
        };
        t.push(&m.cohort_label, m.kanban_flag, cells);
    }
    t.footnotes.push(KANBAN_NOTE.to_owned());
    if any_empty {
        t.footnotes.push(EMPTY_SELECTION_NOTE.to_owned());
    }
    t
}

pub fn render_commit_table(rows: &[CohortMetrics], format: Format) -> String {
    commit_table(rows).render(format)
}

pub fn render_issue_table(rows: &[CohortMetrics], format: Format) -> String {
    issue_table(rows).render(format)
}

pub fn render_text_table(rows: &[CohortMetrics], format: Format) -> String {
    text_table(rows).render(format)
}

/// One Likert question: its row label and summary.
#[derive(Debug, Clone, PartialEq)]
pub struct LikertRow {
    pub label: String,
    pub summary: LikertSummary,
}

pub fn likert_table(rows: &[LikertRow], trim_fraction: f64) -> Table {
    let trim_header = format!("{}% Trim. Mean", round_half_up(trim_fraction * 100.0, 0));
    let mut t = Table::new(
        "5-point Likert scale answers",
        "Question",
        vec![
            Column::new("Mean", 2),
            Column::new("Std. Dev.", 2),
            Column::new(&trim_header, 2),
            Column::new("Median", 2),
            Column::new("Range", 2),
            Column::new("N", 0),
        ],
    );
    for r in rows {
        let s = &r.summary;
        t.push(
            &r.label,
            false,
            vec![
                Some(s.mean),
                Some(s.stdev),
                Some(s.trimmed_mean_10),
                Some(s.median),
                Some(s.range),
                Some(s.n as f64),
            ],
        );
    }
    t.footnotes
        .push("Answers: 1 (strong no), 2 (no), 3 (neutral), 4 (yes), 5 (strong yes).".to_owned());
    t
}

pub fn render_likert_table(rows: &[LikertRow], trim_fraction: f64, format: Format) -> String {
    likert_table(rows, trim_fraction).render(format)
}

pub fn boxplot_table(rows: &[(String, BoxplotStats)]) -> Table {
    let mut t = Table::new(
        "Box-plot summary (whiskers at 1.5 IQR)",
        "Question",
        vec![
            Column::new("Q1", 2),
            Column::new("Median", 2),
            Column::new("Q3", 2),
            Column::new("Whisker low", 2),
            Column::new("Whisker high", 2),
            Column::new("Mean", 2),
            Column::new("Outliers", 0),
        ],
    );
    for (label, b) in rows {
        t.push(
            label,
            false,
            vec![
                Some(b.q1),
                Some(b.median),
                Some(b.q3),
                Some(b.whisker_low),
                Some(b.whisker_high),
                Some(b.mean),
                Some(b.outliers.len() as f64),
            ],
        );
        if !b.outliers.is_empty() {
            let values: Vec<String> = b.outliers.iter().map(|v| format!("{v}")).collect();
            t.footnotes.push(format!("Outliers of {label}: {}", values.join(", ")));
        }
    }
    t
}

pub fn choice_table(rows: &[(String, ChoiceTally)]) -> Table {
    let mut t = Table::new(
        "Multiple-choice answers",
        "Question: option",
        vec![Column::new("Count", 0)],
    );
    for (label, tally) in rows {
        for (option, count) in &tally.counts {
            t.push(&format!("{label}: {option}"), false, vec![Some(*count as f64)]);
        }
        t.footnotes
            .push(format!("{label}: {} respondents, several options could be chosen.", tally.respondents));
    }
    t
}
