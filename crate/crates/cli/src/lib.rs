//! Command-line orchestration: config → snapshots and dumps → metrics → tables.

mod http;

use std::fmt;
use std::fs;
use std::io::{self, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::thread;

use clap::{Parser, Subcommand};

use cohort_miner::config::{CohortConfig, ConfigError, RunConfig};
use cohort_miner::git::{self, DumpError};
use cohort_miner::identity::AliasMap;
use cohort_miner::metrics::{self, CohortMetrics, MetricsError, ProjectData};
use cohort_miner::report::{self, Format, LikertRow};
use cohort_miner::survey::{self, SurveyConfig, SurveyError};
use cohort_miner::tracker::{self, FetchError, FetchOptions, SystemClock, Transport};

pub use http::UreqTransport;

/// Environment variable holding the tracker API token.
pub const TOKEN_VAR: &str = "COHORT_MINER_TOKEN";

#[derive(Parser, Debug)]
#[command(name = "cohort-miner", version, about = "Mine cohort repositories and compare process metrics")]
struct Cli {
    /// Cohort configuration file.
    #[arg(long, global = true, default_value = "./cohorts.conf")]
    config: PathBuf,
    /// Output format: markdown, csv or machine.
    #[arg(long, global = true, default_value = "markdown", value_parser = parse_format)]
    format: Format,
    /// Write output to a file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Download tracker snapshots for every configured project.
    Fetch {
        /// Restrict to one cohort.
        #[arg(long)]
        cohort: Option<String>,
    },
    /// Compute and render the metrics of one cohort.
    Analyze { cohort: String },
    /// Compute and render all cohorts side by side.
    Compare,
    /// Summarize a survey respondent table.
    Survey {
        file: PathBuf,
        /// Column-to-question mapping (TOML).
        #[arg(long)]
        survey_config: PathBuf,
    },
    /// Print the git invocation that produces a commit dump.
    DumpCmd {
        /// Local clone to read.
        #[arg(default_value = ".")]
        repo: String,
    },
    /// Convert raw `git log` output (see dump-cmd) into the commit dump format.
    ConvertLog {
        /// Raw log file; standard input when omitted.
        input: Option<PathBuf>,
    },
}

fn parse_format(s: &str) -> Result<Format, String> {
    s.parse().map_err(|e: report::ReportError| e.to_string())
}

/// Failure of a command, classified by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad input or configuration: exit 1.
    Validation(String),
    /// Unreadable files, unwritable outputs, network failures: exit 2.
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

impl From<MetricsError> for CliError {
    fn from(e: MetricsError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SurveyError> for CliError {
    fn from(e: SurveyError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<FetchError> for CliError {
    fn from(e: FetchError) -> Self {
        match e {
            FetchError::InvalidRepo(_) => CliError::Validation(e.to_string()),
            _ => CliError::Io(e.to_string()),
        }
    }
}

/// Runs the tool with `args` (program name first) and returns the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let token = std::env::var(TOKEN_VAR).ok();
    run_with(args, token.as_deref(), &UreqTransport::new(), stdout, stderr)
}

/// Like [`run`] with an explicit token and transport.
pub fn run_with<I, S>(
    args: I,
    token: Option<&str>,
    http: &dyn Transport,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    match dispatch(&cli, token, http, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "cohort-miner: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, token: Option<&str>, http: &dyn Transport, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = match &cli.command {
        Command::Fetch { cohort } => {
            let cfg = load_config(&cli.config)?;
            fetch(&cfg, cohort.as_deref(), token, http)?
        }
        Command::Analyze { cohort } => {
            let cfg = load_config(&cli.config)?;
            let c = cfg.cohort(cohort).ok_or_else(|| {
                CliError::Validation(
                    ConfigError::UnknownCohort {
                        path: cli.config.display().to_string(),
                        label: cohort.clone(),
                    }
                    .to_string(),
                )
            })?;
            let aliases = load_aliases(&cfg)?;
            let m = analyze_cohort(c, &aliases, &cfg)?;
            render_cohorts(&[m], cli.format)
        }
        Command::Compare => {
            let cfg = load_config(&cli.config)?;
            let aliases = load_aliases(&cfg)?;
            let rows = compare(&cfg, &aliases)?;
            render_cohorts(&rows, cli.format)
        }
        Command::Survey { file, survey_config } => survey_report(file, survey_config, cli.format)?,
        Command::DumpCmd { repo } => dump_cmd(repo),
        Command::ConvertLog { input } => {
            let raw = match input {
                Some(p) => fs::read(p).map_err(|e| io_err(p, e))?,
                None => {
                    let mut buf = Vec::new();
                    io::stdin()
                        .read_to_end(&mut buf)
                        .map_err(|e| CliError::Io(format!("standard input: {e}")))?;
                    buf
                }
            };
            let mut out = Vec::new();
            let n = git::convert_raw_log(&raw, &mut out).map_err(|e| dump_error(Path::new("<raw log>"), e))?;
            log::info!("converted {n} commits");
            return emit(&out, cli.out.as_deref(), stdout);
        }
    };
    emit(text.as_bytes(), cli.out.as_deref(), stdout)
}

fn emit(bytes: &[u8], out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, bytes).map_err(|e| io_err(p, e)),
        None => stdout
            .write_all(bytes)
            .map_err(|e| CliError::Io(format!("standard output: {e}"))),
    }
}

fn load_config(path: &Path) -> Result<RunConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    RunConfig::parse(&text, base, &path.display().to_string()).map_err(|e| CliError::Validation(e.to_string()))
}

fn load_aliases(cfg: &RunConfig) -> Result<AliasMap, CliError> {
    let Some(path) = &cfg.alias_map_path else {
        return Ok(AliasMap::default());
    };
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    AliasMap::parse(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn dump_error(path: &Path, e: DumpError) -> CliError {
    match e {
        DumpError::Io(_) => CliError::Io(format!("{}: {e}", path.display())),
        _ => CliError::Validation(format!("{}: {e}", path.display())),
    }
}

fn load_project(c: &CohortConfig, idx: usize) -> Result<ProjectData, CliError> {
    let spec = &c.spec.projects[idx];
    let src = &c.sources[idx];
    let file = fs::File::open(&src.dump).map_err(|e| io_err(&src.dump, e))?;
    let commits = git::parse_commit_log(BufReader::new(file)).map_err(|e| dump_error(&src.dump, e))?;
    let bytes = fs::read(&src.snapshot).map_err(|e| io_err(&src.snapshot, e))?;
    let snapshot = tracker::load_snapshot(&bytes)
        .map_err(|e| CliError::Validation(format!("{}: {e}", src.snapshot.display())))?;
    if snapshot.repo_id != spec.repo_source {
        return Err(CliError::Validation(format!(
            "{}: snapshot is for `{}`, project `{}` expects `{}`",
            src.snapshot.display(),
            snapshot.repo_id,
            spec.name,
            spec.repo_source
        )));
    }
    log::debug!(
        "{}: {} commits, {} issues loaded",
        spec.name,
        commits.len(),
        snapshot.issues.len()
    );
    Ok(ProjectData {
        spec: spec.clone(),
        commits,
        snapshot,
    })
}

fn load_projects(c: &CohortConfig) -> Result<Vec<ProjectData>, CliError> {
    thread::scope(|s| {
        let handles: Vec<_> = (0..c.spec.projects.len())
            .map(|i| s.spawn(move || load_project(c, i)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("project loader panicked"))
            .collect()
    })
}

fn analyze_cohort(c: &CohortConfig, aliases: &AliasMap, cfg: &RunConfig) -> Result<CohortMetrics, CliError> {
    let projects = load_projects(c)?;
    Ok(metrics::assemble(&c.spec, &projects, aliases, &cfg.options)?)
}

/// Metrics for every configured cohort, in config order.
pub fn compare(cfg: &RunConfig, aliases: &AliasMap) -> Result<Vec<CohortMetrics>, CliError> {
    cfg.cohorts.iter().map(|c| analyze_cohort(c, aliases, cfg)).collect()
}

fn join_tables(tables: &[String], format: Format) -> String {
    let sep = match format {
        // two blank lines so gnuplot's `index` addresses each table
        Format::Machine => "\n\n",
        _ => "\n",
    };
    tables.join(sep)
}

fn render_cohorts(rows: &[CohortMetrics], format: Format) -> String {
    join_tables(
        &[
            report::render_text_table(rows, format),
            report::render_commit_table(rows, format),
            report::render_issue_table(rows, format),
        ],
        format,
    )
}

fn survey_report(file: &Path, cfg_path: &Path, format: Format) -> Result<String, CliError> {
    let cfg_text = fs::read_to_string(cfg_path).map_err(|e| io_err(cfg_path, e))?;
    let cfg = SurveyConfig::parse(&cfg_text).map_err(|e| CliError::Validation(format!("{}: {e}", cfg_path.display())))?;
    let table = fs::read(file).map_err(|e| io_err(file, e))?;
    let data = survey::load_survey(&table, &cfg).map_err(|e| CliError::Validation(format!("{}: {e}", file.display())))?;

    let mut likert_rows = Vec::new();
    let mut box_rows = Vec::new();
    for r in &data.likert {
        if r.sample.is_empty() {
            log::warn!("question {} has no answers; skipped", r.question.id);
            continue;
        }
        likert_rows.push(LikertRow {
            label: r.question.id.clone(),
            summary: survey::likert_summary(&r.sample, cfg.trim_fraction)?,
        });
        let values: Vec<f64> = r.sample.values().iter().map(|&v| f64::from(v)).collect();
        box_rows.push((r.question.id.clone(), survey::boxplot_stats(&values)?));
    }
    let choices: Vec<_> = data
        .choices
        .iter()
        .map(|(q, t)| (q.id.clone(), t.clone()))
        .collect();
    Ok(join_tables(
        &[
            report::render_likert_table(&likert_rows, cfg.trim_fraction, format),
            report::boxplot_table(&box_rows).render(format),
            report::choice_table(&choices).render(format),
        ],
        format,
    ))
}

fn shell_quote(s: &str) -> String {
    if !s.is_empty() && s.bytes().all(|b| b.is_ascii_alphanumeric() || b"-_./=:".contains(&b)) {
        s.to_owned()
    } else {
        format!("'{}'", s.replace('\'', r"'\''"))
    }
}

fn dump_cmd(repo: &str) -> String {
    let args: Vec<String> = git::git_log_args(repo).iter().map(|a| shell_quote(a)).collect();
    format!("git {} | cohort-miner convert-log\n", args.join(" "))
}

fn fetch(cfg: &RunConfig, only: Option<&str>, token: Option<&str>, http: &dyn Transport) -> Result<String, CliError> {
    let token = token
        .filter(|t| !t.is_empty())
        .ok_or_else(|| CliError::Validation(format!("{TOKEN_VAR} is not set")))?;
    if let Some(label) = only {
        if cfg.cohort(label).is_none() {
            return Err(CliError::Validation(format!("no cohort labelled `{label}`")));
        }
    }
    let opts = FetchOptions {
        base_url: cfg.api_base_url.clone(),
        ..FetchOptions::default()
    };
    let mut report = String::new();
    let mut done: Vec<(&str, &Path)> = Vec::new();
    for c in cfg.cohorts.iter().filter(|c| only.is_none_or(|l| l == c.spec.label)) {
        for (spec, src) in c.spec.projects.iter().zip(&c.sources) {
            let key = (spec.repo_source.as_str(), src.snapshot.as_path());
            if done.contains(&key) {
                continue;
            }
            done.push(key);
            log::info!("fetching {}", spec.repo_source);
            let snap = tracker::fetch_snapshot(&spec.repo_source, token, http, &SystemClock, &opts)?;
            if let Some(dir) = src.snapshot.parent() {
                fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            }
            fs::write(&src.snapshot, tracker::save_snapshot(&snap)).map_err(|e| io_err(&src.snapshot, e))?;
            report.push_str(&format!(
                "{}\t{} issues\t{}\n",
                spec.repo_source,
                snap.issues.len(),
                src.snapshot.display()
            ));
        }
    }
    Ok(report)
}
