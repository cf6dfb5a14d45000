//! `osd` — validate, evaluate, render, and compare Open Syndrome
//! Definition documents from the command line.
//!
//! stdout carries data (machine-parseable in `--format json`); stderr
//! carries diagnostics and progress. Exit codes: 0 success, 1 validation
//! or evaluation findings, 2 usage error, 3 I/O error.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, IsTerminal, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use osd_core::compare::{AliasTable, CompareError};
use osd_core::corpus::CorpusError;
use osd_core::evaluate::read_records;
use osd_core::{
    check_presence_only, classify_stream, compute_stats, export_graph, load_corpus,
    parse_definition, record_compare, render, rule_registry, truth_table_compare, validate,
    Definition, Diagnostic, RenderOptions, Severity, StreamEntry,
};

#[derive(Parser)]
#[command(
    name = "osd",
    about = "Open Syndrome Definition toolkit",
    version,
    max_term_width = 100
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Validate definition documents and print diagnostics.
    Validate {
        /// Definition files to validate.
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Classify NDJSON records against a definition.
    Evaluate {
        /// Definition file.
        #[arg(long)]
        definition: PathBuf,
        /// NDJSON records file, or `-` for stdin.
        #[arg(long, default_value = "-")]
        records: PathBuf,
        /// Include the explanation trace in each verdict.
        #[arg(long)]
        trace: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Render a definition as human-readable text.
    Render {
        path: PathBuf,
        /// Omit the metadata header.
        #[arg(long)]
        no_metadata: bool,
        /// Write to a file instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compute statistics over a definitions dataset directory.
    Stats {
        /// Dataset root (contains machine-readable/*.json).
        corpus_dir: PathBuf,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// Export a definitions dataset as a node/link graph document.
    ExportGraph {
        /// Dataset root (contains machine-readable/*.json).
        corpus_dir: PathBuf,
        /// Write to a file instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare two definitions.
    Compare {
        definition_a: PathBuf,
        definition_b: PathBuf,
        #[arg(long, value_enum, default_value = "truth-table")]
        mode: CompareMode,
        /// NDJSON records file for --mode records.
        #[arg(long)]
        records: Option<PathBuf>,
        /// JSON alias file: normalized finding name -> canonical name.
        #[arg(long)]
        aliases: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
    /// List the validation rule registry.
    Rules {
        #[arg(long, value_enum, default_value = "text")]
        format: Format,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CompareMode {
    TruthTable,
    Records,
}

/// Exit statuses, stable across releases.
#[derive(Clone, Copy)]
enum Exit {
    Success = 0,
    Findings = 1,
    Usage = 2,
    Io = 3,
}

struct Failure {
    exit: Exit,
    message: String,
}

impl Failure {
    fn io(context: impl std::fmt::Display, err: impl std::fmt::Display) -> Failure {
        Failure {
            exit: Exit::Io,
            message: format!("{context}: {err}"),
        }
    }

    /// A failed data write. A broken pipe (the reader went away, e.g.
    /// `osd ... | head`) ends the run quietly with success.
    fn output_io(err: impl PipeAware + std::fmt::Display) -> Failure {
        if err.is_broken_pipe() {
            return Failure {
                exit: Exit::Success,
                message: String::new(),
            };
        }
        Failure::io("output", err)
    }

    fn findings(message: impl Into<String>) -> Failure {
        Failure {
            exit: Exit::Findings,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            exit: Exit::Usage,
            message: message.into(),
        }
    }
}

trait PipeAware {
    fn is_broken_pipe(&self) -> bool;
}

impl PipeAware for io::Error {
    fn is_broken_pipe(&self) -> bool {
        self.kind() == io::ErrorKind::BrokenPipe
    }
}

impl PipeAware for serde_json::Error {
    fn is_broken_pipe(&self) -> bool {
        self.io_error_kind() == Some(io::ErrorKind::BrokenPipe)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(exit) => ExitCode::from(exit as u8),
        Err(failure) => {
            if !failure.message.is_empty() {
                eprintln!("osd: {}", failure.message);
            }
            ExitCode::from(failure.exit as u8)
        }
    }
}

fn run(command: Command) -> Result<Exit, Failure> {
    match command {
        Command::Validate { paths, format } => cmd_validate(&paths, format),
        Command::Evaluate {
            definition,
            records,
            trace,
            format,
        } => cmd_evaluate(&definition, &records, trace, format),
        Command::Render {
            path,
            no_metadata,
            output,
        } => cmd_render(&path, no_metadata, output.as_deref()),
        Command::Stats { corpus_dir, format } => cmd_stats(&corpus_dir, format),
        Command::ExportGraph { corpus_dir, output } => {
            cmd_export_graph(&corpus_dir, output.as_deref())
        }
        Command::Compare {
            definition_a,
            definition_b,
            mode,
            records,
            aliases,
            format,
        } => cmd_compare(
            &definition_a,
            &definition_b,
            mode,
            records.as_deref(),
            aliases.as_deref(),
            format,
        ),
        Command::Rules { format } => cmd_rules(format),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|err| Failure::io(path.display(), err))
}

/// Load a definition that must be usable downstream: parse and validation
/// errors go to stderr and exit 1.
fn load_definition(path: &Path) -> Result<Definition, Failure> {
    let bytes = read_file(path)?;
    parse_definition(&bytes).map_err(|diagnostics| {
        for diagnostic in &diagnostics {
            eprintln!("{}: {}", path.display(), styled(diagnostic));
        }
        Failure::findings(format!(
            "{}: definition has {} finding(s)",
            path.display(),
            diagnostics.len()
        ))
    })
}

/// ANSI severity styling, disabled by OSD_NO_COLOR or a non-terminal stderr.
fn styled(diagnostic: &Diagnostic) -> String {
    let colorize = std::env::var_os("OSD_NO_COLOR").is_none() && io::stderr().is_terminal();
    if !colorize {
        return diagnostic.to_string();
    }
    let color = match diagnostic.severity {
        Severity::Error => "\x1b[31m",
        Severity::Warning => "\x1b[33m",
    };
    format!("{color}{diagnostic}\x1b[0m")
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).map_err(|err| Failure::io(path.display(), err))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn cmd_validate(paths: &[PathBuf], format: Format) -> Result<Exit, Failure> {
    let mut stdout = BufWriter::new(io::stdout().lock());
    let mut errors = 0usize;

    for path in paths {
        let bytes = read_file(path)?;
        let diagnostics = match parse_definition(&bytes) {
            Ok(definition) => validate(&definition),
            Err(diagnostics) => diagnostics,
        };
        errors += diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
            .count();
        for diagnostic in &diagnostics {
            match format {
                Format::Json => {
                    let mut line = serde_json::to_value(diagnostic).unwrap();
                    line["file"] = serde_json::json!(path.display().to_string());
                    writeln!(stdout, "{line}").map_err(|e| Failure::output_io(e))?;
                }
                Format::Text => {
                    eprintln!("{}: {}", path.display(), styled(diagnostic));
                }
            }
        }
    }

    stdout.flush().map_err(|e| Failure::output_io(e))?;
    Ok(if errors == 0 { Exit::Success } else { Exit::Findings })
}

fn cmd_evaluate(
    definition_path: &Path,
    records_path: &Path,
    trace: bool,
    format: Format,
) -> Result<Exit, Failure> {
    let definition = load_definition(definition_path)?;

    let reader: Box<dyn BufRead> = if records_path == Path::new("-") {
        Box::new(BufReader::new(io::stdin().lock()))
    } else {
        Box::new(BufReader::new(
            File::open(records_path).map_err(|err| Failure::io(records_path.display(), err))?,
        ))
    };

    let mut stdout = BufWriter::new(io::stdout().lock());
    let mut record_errors = 0usize;
    for entry in classify_stream(&definition, read_records(reader)) {
        match entry {
            StreamEntry::Verdict(verdict) => {
                let verdict = if trace { verdict } else { verdict.without_trace() };
                match format {
                    Format::Json => {
                        serde_json::to_writer(&mut stdout, &verdict)
                            .map_err(|e| Failure::output_io(e))?;
                        writeln!(stdout).map_err(|e| Failure::output_io(e))?;
                    }
                    Format::Text => {
                        writeln!(stdout, "{}\t{}", verdict.id, verdict.outcome.as_str())
                            .map_err(|e| Failure::output_io(e))?;
                    }
                }
            }
            StreamEntry::Error(err) => {
                record_errors += 1;
                match format {
                    Format::Json => {
                        let line = serde_json::json!({
                            "error": err.message,
                            "context": err.context,
                        });
                        writeln!(stdout, "{line}").map_err(|e| Failure::output_io(e))?;
                    }
                    Format::Text => eprintln!("osd: {err}"),
                }
            }
        }
    }
    stdout.flush().map_err(|e| Failure::output_io(e))?;

    Ok(if record_errors == 0 { Exit::Success } else { Exit::Findings })
}

fn cmd_render(path: &Path, no_metadata: bool, output: Option<&Path>) -> Result<Exit, Failure> {
    let definition = load_definition(path)?;
    let options = if no_metadata {
        RenderOptions::without_metadata()
    } else {
        RenderOptions::default()
    };
    let text = render(&definition, &options);
    let mut out = open_output(output)?;
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure::output_io(e))?;
    Ok(Exit::Success)
}

/// Load a dataset directory, reporting per-file findings on stderr.
/// Returns the successfully parsed definitions.
fn load_dataset(corpus_dir: &Path) -> Result<Vec<Definition>, Failure> {
    let entries = load_corpus(corpus_dir).map_err(|err| match err {
        CorpusError::RootUnreadable { .. } => Failure::io(corpus_dir.display(), err),
    })?;
    let mut definitions = Vec::new();
    for entry in entries {
        for diagnostic in &entry.diagnostics {
            eprintln!("{}: {}", entry.path.display(), styled(diagnostic));
        }
        if let Some(definition) = entry.definition {
            definitions.push(definition);
        }
    }
    Ok(definitions)
}

fn cmd_stats(corpus_dir: &Path, format: Format) -> Result<Exit, Failure> {
    let definitions = load_dataset(corpus_dir)?;
    let stats = compute_stats(&definitions);
    let mut stdout = BufWriter::new(io::stdout().lock());

    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut stdout, &stats)
                .map_err(|e| Failure::output_io(e))?;
            writeln!(stdout).map_err(|e| Failure::output_io(e))?;
        }
        Format::Text => {
            let mut write = |label: &str, value: String| -> Result<(), Failure> {
                writeln!(stdout, "{label:<28}{value}").map_err(|e| Failure::output_io(e))
            };
            write("definitions", stats.definition_count.to_string())?;
            write(
                "symptom-primary fraction",
                format!("{:.3}", stats.symptom_primary_fraction),
            )?;
            write("depth histogram", join_counts(stats.depth_histogram.iter()))?;
            write("diseases", join_counts(stats.per_disease_counts.iter()))?;
            write("languages", join_counts(stats.language_distribution.iter()))?;
            write("locations", join_counts(stats.location_distribution.iter()))?;
            write("threat categories", join_counts(stats.category_distribution.iter()))?;
            write("leaf types", join_counts(stats.leaf_type_distribution.iter()))?;
        }
    }
    stdout.flush().map_err(|e| Failure::output_io(e))?;
    Ok(Exit::Success)
}

fn join_counts<'a, K: std::fmt::Display>(counts: impl Iterator<Item = (K, &'a usize)>) -> String {
    let parts: Vec<String> = counts.map(|(key, count)| format!("{key} {count}")).collect();
    if parts.is_empty() {
        "none".to_string()
    } else {
        parts.join(", ")
    }
}

fn cmd_export_graph(corpus_dir: &Path, output: Option<&Path>) -> Result<Exit, Failure> {
    let definitions = load_dataset(corpus_dir)?;
    let graph = export_graph(&definitions);
    let mut out = open_output(output)?;
    serde_json::to_writer_pretty(&mut out, &graph).map_err(|e| Failure::output_io(e))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| Failure::output_io(e))?;
    Ok(Exit::Success)
}

fn cmd_compare(
    path_a: &Path,
    path_b: &Path,
    mode: CompareMode,
    records: Option<&Path>,
    aliases: Option<&Path>,
    format: Format,
) -> Result<Exit, Failure> {
    let a = load_definition(path_a)?;
    let b = load_definition(path_b)?;

    let alias_table = match aliases {
        Some(path) => {
            let mut text = String::new();
            File::open(path)
                .and_then(|mut f| f.read_to_string(&mut text))
                .map_err(|err| Failure::io(path.display(), err))?;
            Some(AliasTable::from_json(&text).map_err(|err| {
                Failure::findings(format!("{}: invalid alias file: {err}", path.display()))
            })?)
        }
        None => None,
    };

    let mut stdout = BufWriter::new(io::stdout().lock());
    match mode {
        CompareMode::TruthTable => {
            let report = truth_table_compare(&a, &b, alias_table.as_ref()).map_err(|err| {
                if let CompareError::NonPresenceLeaves { which, .. } = &err {
                    let definition = if *which == 'a' { &a } else { &b };
                    for diagnostic in check_presence_only(definition) {
                        eprintln!("definition {}: {}", which, styled(&diagnostic));
                    }
                }
                Failure::findings(err.to_string())
            })?;
            match format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut stdout, &report)
                        .map_err(|e| Failure::output_io(e))?;
                    writeln!(stdout).map_err(|e| Failure::output_io(e))?;
                }
                Format::Text => {
                    let mut write = |label: &str, value: String| -> Result<(), Failure> {
                        writeln!(stdout, "{label:<20}{value}")
                            .map_err(|e| Failure::output_io(e))
                    };
                    write(
                        "universe",
                        format!("({}) {}", report.universe.len(), report.universe.join(", ")),
                    )?;
                    write("assignments", report.assignments_total.to_string())?;
                    write("match both", report.match_both.to_string())?;
                    write("match a only", report.match_a_only.to_string())?;
                    write("match b only", report.match_b_only.to_string())?;
                    write("match neither", report.match_neither.to_string())?;
                    write("jaccard", format!("{:.4}", report.jaccard))?;
                    if !report.judgment_findings.is_empty() {
                        write("judgment findings", report.judgment_findings.join(", "))?;
                    }
                }
            }
        }
        CompareMode::Records => {
            let records_path = records
                .ok_or_else(|| Failure::usage("--mode records requires --records <path>"))?;
            let reader = BufReader::new(
                File::open(records_path)
                    .map_err(|err| Failure::io(records_path.display(), err))?,
            );
            let comparison = record_compare(&a, &b, read_records(reader));
            for error in &comparison.errors {
                eprintln!("osd: {error}");
            }
            match format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut stdout, &comparison)
                        .map_err(|e| Failure::output_io(e))?;
                    writeln!(stdout).map_err(|e| Failure::output_io(e))?;
                }
                Format::Text => {
                    writeln!(stdout, "records             {}", comparison.records_total)
                        .map_err(|e| Failure::output_io(e))?;
                    match comparison.agreement {
                        Some(agreement) => writeln!(stdout, "agreement           {agreement:.4}"),
                        None => writeln!(stdout, "agreement           n/a"),
                    }
                    .map_err(|e| Failure::output_io(e))?;
                    let matrix = serde_json::to_string(&comparison.matrix).unwrap();
                    writeln!(stdout, "outcome matrix      {matrix}")
                        .map_err(|e| Failure::output_io(e))?;
                }
            }
            if !comparison.errors.is_empty() {
                stdout.flush().map_err(|e| Failure::output_io(e))?;
                return Ok(Exit::Findings);
            }
        }
    }
    stdout.flush().map_err(|e| Failure::output_io(e))?;
    Ok(Exit::Success)
}

fn cmd_rules(format: Format) -> Result<Exit, Failure> {
    let mut stdout = BufWriter::new(io::stdout().lock());
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut stdout, rule_registry())
                .map_err(|e| Failure::output_io(e))?;
            writeln!(stdout).map_err(|e| Failure::output_io(e))?;
        }
        Format::Text => {
            for rule in rule_registry() {
                writeln!(stdout, "{:<34}{:<9}{}", rule.id, rule.severity, rule.description)
                    .map_err(|e| Failure::output_io(e))?;
            }
        }
    }
    stdout.flush().map_err(|e| Failure::output_io(e))?;
    Ok(Exit::Success)
}
