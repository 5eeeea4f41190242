//! Command-line interface: `recommend`, `ingest`, and `explain`.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::pipeline::{self, PipelineConfig, RunReport};
use crate::rank::RankWeights;
use crate::search::{self, Backend, Cache, TargetIssue, DEFAULT_CACHE_TTL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_RESULTS: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "patchfinder",
    about = "Recommends closed issues with reusable patches for an open crash report"
)]
pub struct CliArgs {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rank closed issues against an open bug report.
    Recommend(RecommendArgs),
    /// Fetch issues into the offline corpus.
    Ingest(IngestArgs),
    /// Break down the signals behind one candidate of the last run.
    Explain(ExplainArgs),
}

#[derive(Args, Debug)]
struct BackendArgs {
    /// `live`, `corpus:<path>`, or `replay:<path>`
    #[arg(long, default_value = "live")]
    backend: String,
    /// Treat the target as an Android project
    #[arg(long)]
    android: bool,
    /// Cache directory for responses and run state
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Disable the response cache
    #[arg(long)]
    no_cache: bool,
}

#[derive(Args, Debug)]
struct RecommendArgs {
    /// Open issue: a local markdown/text file or an issue URL
    #[arg(long)]
    issue: String,
    /// Checkout of the target project
    #[arg(long)]
    project: Option<PathBuf>,
    /// Maximum candidates fetched from the backend
    #[arg(long, default_value_t = 10)]
    limit: usize,
    /// Minimum tile length in tokens
    #[arg(long, default_value_t = crate::codesim::DEFAULT_MIN_MATCH)]
    min_match: usize,
    /// Fusion weights as `code,dep,ui,quality`
    #[arg(long, value_parser = RankWeights::parse)]
    weights: Option<RankWeights>,
    /// `table` or `structured`
    #[arg(long, default_value = "table")]
    format: String,
    /// Print only the first N recommendations
    #[arg(long)]
    top_k: Option<usize>,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Args, Debug)]
struct IngestArgs {
    /// File listing one issue URL or record path per line
    #[arg(long)]
    urls: PathBuf,
    /// Corpus file to append to
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    backend: BackendArgs,
}

#[derive(Args, Debug)]
struct ExplainArgs {
    /// URL of a candidate from the last `recommend` run
    candidate_url: String,
    #[command(flatten)]
    backend: BackendArgs,
}

fn default_cache_dir() -> PathBuf {
    std::env::temp_dir().join("patchfinder-cache")
}

fn last_run_path(cache_dir: &std::path::Path) -> PathBuf {
    cache_dir.join("last_run.json")
}

/// Parse arguments and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match CliArgs::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/usage text
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match cli.command {
        Command::Recommend(args) => cmd_recommend(args),
        Command::Ingest(args) => cmd_ingest(args),
        Command::Explain(args) => cmd_explain(args),
    }
}

fn fail(code: &str, message: impl std::fmt::Display) -> i32 {
    eprintln!("error[{}]: {}", code, message);
    EXIT_ERROR
}

fn load_issue(args: &RecommendArgs) -> Result<TargetIssue, i32> {
    let path = std::path::Path::new(&args.issue);
    let mut issue = if path.exists() {
        TargetIssue::from_file(path).map_err(|e| fail("issue-read", e))?
    } else if args.issue.starts_with("http") {
        return Err(fail(
            "issue-url",
            "fetching the target issue by URL requires `--backend live`; pass a local file instead",
        ));
    } else {
        return Err(fail("issue-missing", format!("issue file not found: {}", args.issue)));
    };
    if let Some(project) = &args.project {
        if !project.is_dir() {
            return Err(fail(
                "project-missing",
                format!("project root is not a directory: {}", project.display()),
            ));
        }
        issue.project_root = Some(project.clone());
    }
    issue.is_android = args.backend.android;
    Ok(issue)
}

fn cmd_recommend(args: RecommendArgs) -> i32 {
    let issue = match load_issue(&args) {
        Ok(issue) => issue,
        Err(code) => return code,
    };
    let backend = match Backend::parse(&args.backend.backend, args.backend.android) {
        Ok(b) => b,
        Err(e) => return fail("backend", e),
    };
    let mut cfg = PipelineConfig::new(backend);
    cfg.limit = args.limit.max(1);
    cfg.min_match = args.min_match.max(1);
    if let Some(w) = args.weights {
        cfg.weights = w;
    }
    let report = match pipeline::run_recommend(&issue, &cfg) {
        Ok(r) => r,
        Err(e) => return fail("pipeline", e),
    };
    for (url, err) in &report.fetch_failures {
        eprintln!("warning: patch fetch failed for {}: {}", url, err);
    }

    let cache_dir = args.backend.cache_dir.unwrap_or_else(default_cache_dir);
    if fs::create_dir_all(&cache_dir).is_ok() {
        if let Ok(json) = serde_json::to_string_pretty(&report) {
            let _ = fs::write(last_run_path(&cache_dir), json);
        }
    }
    if !args.backend.no_cache {
        if let Backend::Live(_) = &cfg.backend {
            let cache = Cache::new(cache_dir.clone(), DEFAULT_CACHE_TTL);
            if let Ok(json) = serde_json::to_string(&report.recommendations) {
                let _ = cache.store(&report.query, &report.backend, json.as_bytes());
            }
        }
    }

    let top_k = args.top_k.unwrap_or(usize::MAX);
    match args.format.as_str() {
        "structured" => {
            let mut trimmed = report.clone();
            trimmed.recommendations.truncate(top_k);
            match serde_json::to_string_pretty(&trimmed) {
                Ok(json) => println!("{}", json),
                Err(e) => return fail("serialize", e),
            }
        }
        "table" => print_table(&report, top_k),
        other => return fail("format", format!("unknown output format `{}`", other)),
    }
    if report.recommendations.is_empty() {
        EXIT_NO_RESULTS
    } else {
        EXIT_OK
    }
}

fn fmt_signal(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{:.3}", v),
        None => "n/a".to_string(),
    }
}

fn print_table(report: &RunReport, top_k: usize) {
    println!("query: {}", report.query);
    println!("backend: {}", report.backend);
    if report.recommendations.is_empty() {
        println!("0 recommendations");
        return;
    }
    println!(
        "{:<4} {:>6} {:>6} {:>6} {:>6} {:>7}  {}",
        "rank", "score", "code", "dep", "ui", "quality", "url"
    );
    for r in report.recommendations.iter().take(top_k) {
        println!(
            "{:<4} {:>6.3} {:>6} {:>6} {:>6} {:>7.3}  {}",
            r.rank,
            r.final_score,
            fmt_signal(r.code_sim),
            fmt_signal(r.dep_sim),
            fmt_signal(r.ui_sim),
            r.quality,
            r.candidate.url
        );
    }
}

fn cmd_ingest(args: IngestArgs) -> i32 {
    let backend = match Backend::parse(&args.backend.backend, args.backend.android) {
        Ok(b) => b,
        Err(e) => return fail("backend", e),
    };
    let listing = match fs::read_to_string(&args.urls) {
        Ok(text) => text,
        Err(e) => return fail("urls-read", e),
    };
    let sources: Vec<String> = listing
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect();
    match search::ingest(&sources, &backend, &args.corpus) {
        Ok(report) => {
            println!("{} written, {} failed", report.written, report.failures.len());
            for (source, err) in &report.failures {
                eprintln!("warning: {}: {}", source, err);
            }
            if !sources.is_empty() && report.failures.len() == sources.len() {
                EXIT_ERROR
            } else {
                EXIT_OK
            }
        }
        Err(e) => fail("ingest", e),
    }
}

fn cmd_explain(args: ExplainArgs) -> i32 {
    let cache_dir = args.backend.cache_dir.unwrap_or_else(default_cache_dir);
    let path = last_run_path(&cache_dir);
    let report: RunReport = match fs::read_to_string(&path)
        .ok()
        .and_then(|data| serde_json::from_str(&data).ok())
    {
        Some(r) => r,
        None => return fail("not-found", "no recorded run; execute `recommend` first"),
    };
    let Some(rec) = report
        .recommendations
        .iter()
        .find(|r| r.candidate.url == args.candidate_url)
    else {
        return fail(
            "not-found",
            format!("candidate not in last run: {}", args.candidate_url),
        );
    };
    let Some(detail) = report.details.get(&args.candidate_url) else {
        return fail("not-found", "no detail recorded for candidate");
    };

    println!("candidate: {}", rec.candidate.url);
    println!("rank: {}  final_score: {:.4}", rec.rank, rec.final_score);
    println!("code_sim: {}", fmt_signal(rec.code_sim));
    if let Some(code) = &detail.code {
        for f in &code.per_file {
            println!(
                "  {} ~ {}  sim {:.3} ({} tokens)",
                f.patch_file, f.best_project_file, f.similarity, f.token_count
            );
            for t in &f.tiles {
                println!(
                    "    tile: project[{}..{}] = patch[{}..{}] (len {})",
                    t.start_a,
                    t.start_a + t.length,
                    t.start_b,
                    t.start_b + t.length,
                    t.length
                );
            }
        }
    }
    println!("dep_sim: {}", fmt_signal(rec.dep_sim));
    println!(
        "  target deps: {}, candidate deps: {}, shared: {:?}",
        detail.target_dependency_count,
        detail.candidate_dependency_count,
        detail.dependency_intersection
    );
    println!("ui_sim: {}", fmt_signal(rec.ui_sim));
    println!("  shared widgets: {:?}", detail.widget_intersection);
    println!(
        "quality: {:.4} (has_patch: {}, words: {})",
        rec.quality, detail.quality.has_patch, detail.quality.word_count
    );
    println!(
        "weights: applicable sum {:.3}; final = sum(w_i * s_i) / {:.3}",
        detail.applicable_weight_sum, detail.applicable_weight_sum
    );
    EXIT_OK
}
