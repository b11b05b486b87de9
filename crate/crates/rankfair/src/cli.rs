//! The `rankfair` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use rankfair_core::dataset::TemplatePair;
use rankfair_core::fixtures::{generate, FixtureShape};
use rankfair_core::metrics::{rbo_exponential, rbo_uniform, Ranking};
use rankfair_core::report::{render_inspection, render_map_table, render_rbo_table, ReportDocument};
use rankfair_core::{inspect_top_k, prepare_view, summarize, EvalError, EvalOptions, Embedder, TestSet, ViewKind};

use crate::builder::{build_test_set, load_source, BuildOptions, HttpBackend, MockBackend, TranslationBackend};
use crate::error::{exit, Error};
use crate::matrix::{evaluate_matrix_parallel, into_runs_file};
use crate::provider::{ProviderOptions, ProviderSpec};
use crate::render::{render, summary_table, Format, RunsFile};
use crate::strip::StripRules;
use crate::testset_io::{digest, load_test_set, save_test_set};

#[derive(Debug, Parser)]
#[command(name = "rankfair", version, about = "Measure gender bias in job-title rankers")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Translate a source dataset into a gendered test set.
    BuildDataset(BuildArgs),
    /// Run the evaluation matrix and write runs.json.
    Evaluate(EvaluateArgs),
    /// Render runs.json as an RBO or MAP table.
    Report(ReportArgs),
    /// Show the top-k results of both forms of one query side by side.
    Inspect(InspectArgs),
    /// Full-depth RBO of two ranked lists, one id per line.
    Rbo(RboArgs),
    /// Count paired, neutral and total titles of test sets.
    Summarize(SummarizeArgs),
    /// Write a synthetic test set for the synthetic provider.
    GenerateFixture(FixtureArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ViewArg {
    M,
    F,
    Both,
}

impl ViewArg {
    fn views(self) -> Vec<ViewKind> {
        match self {
            ViewArg::M => vec![ViewKind::MasculineCorpus],
            ViewArg::F => vec![ViewKind::FeminineCorpus],
            ViewArg::Both => ViewKind::BOTH.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SingleView {
    M,
    F,
}

impl SingleView {
    fn kind(self) -> ViewKind {
        match self {
            SingleView::M => ViewKind::MasculineCorpus,
            SingleView::F => ViewKind::FeminineCorpus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Rbo,
    Map,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    /// Source JSONL of {"id","title","relevant","set"}.
    #[arg(long)]
    pub source: PathBuf,
    #[arg(long = "lang")]
    pub language: String,
    /// `mock:<table.jsonl>` or `http:<url>`.
    #[arg(long)]
    pub backend: String,
    /// JSON {"masculine_template","feminine_template"}; "He is:"/"She is:" by default.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// JSON strip rules keyed by language; built-in rules by default.
    #[arg(long)]
    pub strip_rules: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the build report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 30)]
    pub timeout_secs: u64,
    #[arg(long, default_value_t = 3)]
    pub retries: u32,
    #[arg(long, default_value_t = 4)]
    pub max_in_flight: usize,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long = "testset", required = true, num_args = 1..)]
    pub testsets: Vec<PathBuf>,
    /// `file:<path>`, `synthetic:<seed>,<weight>[,<dim>]` or `http:<url>`.
    #[arg(long = "provider", required = true, num_args = 1..)]
    pub providers: Vec<String>,
    #[arg(long, value_enum, default_value_t = ViewArg::Both)]
    pub view: ViewArg,
    /// Count neutral queries (always RBO 1) in the RBO mean.
    #[arg(long)]
    pub include_neutral_in_rbo: bool,
    #[arg(long)]
    pub out: PathBuf,
    /// Cache provider vectors here.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Worker threads; all cores by default.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long, default_value_t = 120)]
    pub timeout_secs: u64,
    /// Texts per sidecar request.
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub runs: PathBuf,
    #[arg(long, value_enum)]
    pub metric: MetricArg,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
    #[arg(long, value_enum, default_value_t = SingleView::M)]
    pub view: SingleView,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub testset: PathBuf,
    #[arg(long)]
    pub provider: String,
    #[arg(long)]
    pub query_id: String,
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = SingleView::M)]
    pub view: SingleView,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RboArgs {
    #[arg(long)]
    pub left: PathBuf,
    #[arg(long)]
    pub right: PathBuf,
    /// Use the exponentially weighted variant with this persistence.
    #[arg(long, num_args = 0..=1, default_missing_value = "0.98")]
    pub persistence: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    #[arg(long = "testset", required = true, num_args = 1..)]
    pub testsets: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Md)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    /// de, es, fr or pt for reference-sized sets, `standard` for the small set.
    #[arg(long, conflicts_with_all = ["queries", "corpus"])]
    pub shape: Option<String>,
    /// `<paired>,<neutral>` query counts.
    #[arg(long, requires = "corpus", value_parser = parse_counts)]
    pub queries: Option<(usize, usize)>,
    /// `<paired>,<neutral>` corpus counts.
    #[arg(long, requires = "queries", value_parser = parse_counts)]
    pub corpus: Option<(usize, usize)>,
    #[arg(long = "lang", default_value = "xx")]
    pub language: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_counts(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected <paired>,<neutral>")?;
    let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok((parse(a)?, parse(b)?))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { exit::SUCCESS };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<i32, Error> {
    match command {
        Command::BuildDataset(args) => build_dataset(args),
        Command::Evaluate(args) => evaluate(args),
        Command::Report(args) => report(args),
        Command::Inspect(args) => inspect(args),
        Command::Rbo(args) => rbo(args),
        Command::Summarize(args) => summarize_cmd(args),
        Command::GenerateFixture(args) => generate_fixture(args),
    }
}

fn read_to_string(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn build_dataset(args: BuildArgs) -> Result<i32, Error> {
    let source = load_source(&args.source)?;
    let mut options = BuildOptions::new_with_rules(
        &args.language,
        match &args.strip_rules {
            Some(path) => StripRules::from_json(&read_to_string(path)?, &args.language),
            None => StripRules::builtin(&args.language),
        }
        .map_err(crate::builder::BuildError::from)?,
    );
    if let Some(path) = &args.templates {
        options.templates = serde_json::from_str::<TemplatePair>(&read_to_string(path)?)
            .map_err(|source| Error::Json {
                path: path.clone(),
                source,
            })?;
    }
    options.max_in_flight = args.max_in_flight;
    let mut partial = args.out.clone().into_os_string();
    partial.push(".partial.jsonl");
    options.partial_path = Some(partial.into());

    let backend: Box<dyn TranslationBackend> = match args.backend.split_once(':') {
        Some(("mock", path)) if !path.is_empty() => Box::new(MockBackend::load(path)?),
        Some(("http", url)) if !url.is_empty() => Box::new(HttpBackend::new(
            url,
            Duration::from_secs(args.timeout_secs),
            args.retries,
        )),
        _ => {
            return Err(Error::Usage(format!(
                "--backend must be mock:<path> or http:<url>, got {:?}",
                args.backend
            )))
        }
    };
    let (set, report) = build_test_set(&source, backend.as_ref(), &options)?;
    save_test_set(&args.out, &set)?;
    if let Some(path) = &args.report {
        let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
        fs::write(path, json).map_err(|e| Error::io(path, e))?;
    }
    eprintln!(
        "{}: queries {} paired + {} neutral (T={}), corpus {} paired + {} neutral (T={}); {} duplicates removed, {} records flagged",
        set.language(),
        report.queries.counts.paired,
        report.queries.counts.neutral,
        report.queries.counts.total,
        report.corpus.counts.paired,
        report.corpus.counts.neutral,
        report.corpus.counts.total,
        report.queries.merge.duplicates_removed + report.corpus.merge.duplicates_removed,
        report.queries.flagged + report.corpus.flagged,
    );
    Ok(exit::SUCCESS)
}

fn tool_metadata() -> BTreeMap<String, String> {
    let mut meta = BTreeMap::new();
    meta.insert("tool_version".into(), env!("CARGO_PKG_VERSION").into());
    meta
}

fn evaluate(args: EvaluateArgs) -> Result<i32, Error> {
    let sets: Vec<TestSet> = args
        .testsets
        .iter()
        .map(load_test_set)
        .collect::<Result<_, _>>()?;
    let options = ProviderOptions {
        cache_dir: args.cache_dir.clone(),
        timeout: Duration::from_secs(args.timeout_secs),
        batch_size: args.batch_size,
        use_env: true,
    };
    let specs: Vec<ProviderSpec> = args
        .providers
        .iter()
        .map(|s| s.parse())
        .collect::<Result<_, _>>()?;
    let providers: Vec<Box<dyn Embedder>> = specs
        .iter()
        .map(|s| s.open(&options))
        .collect::<Result<_, _>>()?;
    let refs: Vec<&dyn Embedder> = providers.iter().map(|p| p.as_ref()).collect();

    let eval_options = EvalOptions {
        include_neutral_in_rbo: args.include_neutral_in_rbo,
    };
    let views = args.view.views();
    let entries = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Usage(e.to_string()))?
            .install(|| evaluate_matrix_parallel(&sets, &refs, &views, eval_options)),
        None => evaluate_matrix_parallel(&sets, &refs, &views, eval_options),
    };
    let provider_failure = entries
        .iter()
        .any(|e| matches!(e.outcome, Err(EvalError::Embed { .. })));

    let mut file = into_runs_file(entries);
    file.metadata = tool_metadata();
    for (i, (spec, provider)) in specs.iter().zip(&providers).enumerate() {
        file.metadata
            .insert(format!("provider.{i}"), format!("{spec} -> {}", provider.model_name()));
    }
    for (path, set) in args.testsets.iter().zip(&sets) {
        file.metadata.insert(
            format!("testset.{}", set.language()),
            format!("{} sha256:{}", path.display(), digest(set)),
        );
    }
    let generated = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    file.metadata.insert("generated_unix".into(), generated.to_string());
    file.save(&args.out)?;

    for run in &file.runs {
        eprintln!(
            "{} {} {}: mean RBO {:.4}, MAP F {:.4}, MAP M {:.4}",
            run.language,
            run.model_name,
            run.corpus_view.as_str(),
            run.mean_rbo.value,
            run.map_feminine.value,
            run.map_masculine.value
        );
    }
    for failure in &file.failures {
        eprintln!(
            "FAILED {} {} {}: {}",
            failure.language,
            failure.model_name,
            failure.corpus_view.as_str(),
            failure.error
        );
    }
    Ok(match (file.failures.is_empty(), provider_failure) {
        (true, _) => exit::SUCCESS,
        (false, true) => exit::PROVIDER,
        (false, false) => exit::DATA,
    })
}

fn with_metadata(mut doc: ReportDocument, file: &RunsFile) -> ReportDocument {
    doc.metadata = file.metadata.clone();
    doc.metadata
        .insert("report_tool_version".into(), env!("CARGO_PKG_VERSION").into());
    if !file.failures.is_empty() {
        doc.footnotes
            .push(format!("{} matrix cells failed; see runs file.", file.failures.len()));
    }
    doc
}

fn report(args: ReportArgs) -> Result<i32, Error> {
    let file = RunsFile::load(&args.runs)?;
    let view = args.view.kind();
    let doc = match args.metric {
        MetricArg::Rbo => render_rbo_table(&file.runs, view)?,
        MetricArg::Map => render_map_table(&file.runs, view)?,
    };
    let doc = with_metadata(doc, &file);
    emit(&render(&doc, args.format)?, args.out.as_deref())?;
    Ok(exit::SUCCESS)
}

fn inspect(args: InspectArgs) -> Result<i32, Error> {
    let set = load_test_set(&args.testset)?;
    let pair = set
        .query(&args.query_id)
        .ok_or_else(|| Error::Usage(format!("no query {:?} in {}", args.query_id, args.testset.display())))?;
    let spec: ProviderSpec = args.provider.parse()?;
    let provider = spec.open(&ProviderOptions::default())?;
    let prepared = prepare_view(&set, args.view.kind(), provider.as_ref())?;
    let inspection = inspect_top_k(pair, &prepared, provider.as_ref(), args.k)?;
    let mut doc = render_inspection(&inspection);
    doc.metadata.insert("provider".into(), format!("{spec} -> {}", provider.model_name()));
    emit(&render(&doc, args.format)?, None)?;
    Ok(exit::SUCCESS)
}

fn read_list(path: &Path) -> Result<Ranking<String>, Error> {
    let items: Vec<String> = read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    Ok(Ranking::new(items)?)
}

fn rbo(args: RboArgs) -> Result<i32, Error> {
    let left = read_list(&args.left)?;
    let right = read_list(&args.right)?;
    let score = match args.persistence {
        Some(p) => rbo_exponential(&left, &right, p)?,
        None => rbo_uniform(&left, &right)?,
    };
    println!("{}", score.value);
    Ok(exit::SUCCESS)
}

fn summarize_cmd(args: SummarizeArgs) -> Result<i32, Error> {
    let summaries = args
        .testsets
        .iter()
        .map(|p| load_test_set(p).map(|s| summarize(&s)))
        .collect::<Result<Vec<_>, _>>()?;
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&summaries).expect("summary serializes") + "\n",
        other => render(&summary_table(&summaries), other)?,
    };
    emit(&text, None)?;
    Ok(exit::SUCCESS)
}

fn generate_fixture(args: FixtureArgs) -> Result<i32, Error> {
    let mut shape = match (&args.shape, args.queries, args.corpus) {
        (Some(name), _, _) if name == "standard" => FixtureShape::standard(),
        (Some(name), _, _) => FixtureShape::language_shape(name)
            .ok_or_else(|| Error::Usage(format!("unknown shape {name:?}")))?,
        (None, Some(q), Some(c)) => {
            if c.0 < q.0 || c.1 < q.1 {
                return Err(Error::Usage("corpus counts must cover the query counts".into()));
            }
            FixtureShape::new(args.language.clone(), q, c)
        }
        _ => return Err(Error::Usage("give --shape or both --queries and --corpus".into())),
    };
    if let Some(seed) = args.seed {
        shape = shape.with_seed(seed);
    }
    let set = generate(&shape);
    save_test_set(&args.out, &set)?;
    Ok(exit::SUCCESS)
}
