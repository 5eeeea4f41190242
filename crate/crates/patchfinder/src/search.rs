//! Candidate retrieval: execute queries against a backend (live hosted
//! search, a recorded-response replay file, or a local line-delimited
//! corpus), fetch candidate patches, and cache responses.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::querygen::Query;

/// Default byte cap for fetched diffs.
pub const DEFAULT_DIFF_CAP: usize = 1024 * 1024;

/// Default cache entry lifetime.
pub const DEFAULT_CACHE_TTL: Duration = Duration::from_secs(24 * 60 * 60);

/// Env var holding the hosted-search API token.
pub const TOKEN_ENV: &str = "GITHUB_TOKEN";

/// The open, unresolved bug report being diagnosed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TargetIssue {
    pub url: String,
    pub title: String,
    pub body: String,
    pub comments: Vec<String>,
    /// Checkout of the target project; required for code/dependency/UI
    /// similarity.
    pub project_root: Option<PathBuf>,
    pub is_android: bool,
}

impl TargetIssue {
    /// Load a target issue from a local markdown/text file. The first
    /// `# `-heading becomes the title; the rest is the body.
    pub fn from_file(path: &Path) -> Result<TargetIssue, SearchError> {
        let text = fs::read_to_string(path)?;
        let mut title = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        for line in text.lines() {
            if let Some(h) = line.strip_prefix("# ") {
                title = h.trim().to_string();
                break;
            }
        }
        Ok(TargetIssue {
            url: format!("file:{}", path.display()),
            title,
            body: text,
            comments: Vec::new(),
            project_root: None,
            is_android: false,
        })
    }
}

/// Unified-diff content plus the post-image source files extracted from it.
/// Only `.java` and `.xml` post-images participate in similarity.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Patch {
    pub diff_text: String,
    pub modified_files: Vec<PatchFile>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PatchFile {
    pub path: String,
    pub content: String,
}

impl Patch {
    /// Paths named by `+++` headers of a unified diff, `b/` prefix stripped.
    pub fn modified_paths(diff_text: &str) -> Vec<String> {
        let mut paths = Vec::new();
        for line in diff_text.lines() {
            if let Some(rest) = line.strip_prefix("+++ ") {
                let path = rest.split('\t').next().unwrap_or(rest).trim();
                if path == "/dev/null" {
                    continue;
                }
                let path = path.strip_prefix("b/").unwrap_or(path);
                paths.push(path.to_string());
            }
        }
        paths
    }

    /// Assemble a patch, keeping only post-images that are named in the diff
    /// headers and carry a similarity-relevant extension.
    pub fn from_parts(diff_text: String, files: Vec<PatchFile>) -> Patch {
        let header_paths: HashSet<String> = Self::modified_paths(&diff_text).into_iter().collect();
        let modified_files = files
            .into_iter()
            .filter(|f| header_paths.contains(&f.path))
            .filter(|f| f.path.ends_with(".java") || f.path.ends_with(".xml"))
            .collect();
        Patch {
            diff_text,
            modified_files,
        }
    }

    pub fn java_files(&self) -> impl Iterator<Item = &PatchFile> {
        self.modified_files
            .iter()
            .filter(|f| f.path.ends_with(".java"))
    }

    pub fn xml_files(&self) -> impl Iterator<Item = &PatchFile> {
        self.modified_files
            .iter()
            .filter(|f| f.path.ends_with(".xml"))
    }
}

/// One line of the offline corpus: a serialized candidate issue.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub url: String,
    pub title: String,
    #[serde(default)]
    pub body: String,
    #[serde(default)]
    pub comments: Vec<String>,
    pub state: String,
    #[serde(default)]
    pub is_pull_request: bool,
    pub repo_slug: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diff: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub files: Option<Vec<PatchFile>>,
}

/// A closed issue/PR returned by search. A pull request is an issue with a
/// patch.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CandidateIssue {
    pub url: String,
    pub title: String,
    pub body: String,
    pub comments: Vec<String>,
    pub state: String,
    pub is_pull_request: bool,
    /// 1-based position in the backend's result order.
    pub search_rank: usize,
    pub repo_slug: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub patch: Option<Patch>,
    /// Corpus-embedded diff/files, consumed by `fetch_patch`.
    #[serde(skip)]
    embedded_diff: Option<String>,
    #[serde(skip)]
    embedded_files: Option<Vec<PatchFile>>,
}

impl CandidateIssue {
    fn from_record(rec: CorpusRecord, search_rank: usize) -> CandidateIssue {
        CandidateIssue {
            url: rec.url,
            title: rec.title,
            body: rec.body,
            comments: rec.comments,
            state: rec.state,
            is_pull_request: rec.is_pull_request,
            search_rank,
            repo_slug: rec.repo_slug,
            patch: None,
            embedded_diff: rec.diff,
            embedded_files: rec.files,
        }
    }
}

/// Backend selection for search and patch fetching.
#[derive(Clone, Debug)]
pub enum Backend {
    /// Hosted issue-search HTTP API over HTTPS.
    Live(LiveConfig),
    /// Local line-delimited corpus file.
    Corpus(PathBuf),
    /// Recorded live responses replayed from a local JSON file.
    Replay(PathBuf),
}

#[derive(Clone, Debug)]
pub struct LiveConfig {
    pub api_base: String,
    pub token: Option<String>,
    /// Language qualifier appended to queries; Android corpora configure
    /// their own.
    pub language_qualifier: String,
    pub diff_cap: usize,
}

impl Default for LiveConfig {
    fn default() -> Self {
        LiveConfig {
            api_base: "https://api.github.com".to_string(),
            token: std::env::var(TOKEN_ENV).ok(),
            language_qualifier: "language:Java".to_string(),
            diff_cap: DEFAULT_DIFF_CAP,
        }
    }
}

impl Backend {
    /// Parse a CLI backend selector: `live`, `corpus:<path>`, or
    /// `replay:<path>`.
    pub fn parse(spec: &str, android: bool) -> Result<Backend, SearchError> {
        if spec == "live" {
            let mut cfg = LiveConfig::default();
            if android {
                cfg.language_qualifier = "language:Kotlin".to_string();
            }
            return Ok(Backend::Live(cfg));
        }
        if let Some(path) = spec.strip_prefix("corpus:") {
            return Ok(Backend::Corpus(PathBuf::from(path)));
        }
        if let Some(path) = spec.strip_prefix("replay:") {
            return Ok(Backend::Replay(PathBuf::from(path)));
        }
        Err(SearchError::BadBackend(spec.to_string()))
    }

    /// Stable identity used for cache keys.
    pub fn identity(&self) -> String {
        match self {
            Backend::Live(cfg) => format!("live:{}", cfg.api_base),
            Backend::Corpus(p) => format!("corpus:{}", p.display()),
            Backend::Replay(p) => format!("replay:{}", p.display()),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("rate limited; resets at unix time {0}")]
    RateLimited(u64),
    #[error("network error: {0}")]
    Network(String),
    #[error("authentication rejected by backend")]
    Auth,
    #[error("diff exceeds {0}-byte cap")]
    DiffTooLarge(usize),
    #[error("unrecognized backend selector `{0}`")]
    BadBackend(String),
    #[error("malformed backend response: {0}")]
    BadResponse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Shape of the hosted search API's JSON response; also the replay fixture's
/// `search_response` payload.
#[derive(Debug, Deserialize)]
struct ApiSearchResponse {
    items: Vec<ApiIssue>,
}

#[derive(Debug, Deserialize)]
struct ApiIssue {
    html_url: String,
    title: String,
    #[serde(default)]
    body: Option<String>,
    state: String,
    #[serde(default)]
    pull_request: Option<serde_json::Value>,
    #[serde(default)]
    repository_url: String,
}

impl ApiIssue {
    fn repo_slug(&self) -> String {
        // .../repos/<owner>/<name>
        let mut parts = self.repository_url.rsplit('/');
        let name = parts.next().unwrap_or_default();
        let owner = parts.next().unwrap_or_default();
        if owner.is_empty() || name.is_empty() {
            String::new()
        } else {
            format!("{}/{}", owner, name)
        }
    }
}

/// Replay fixture: a recorded search response plus recorded patch fetches
/// keyed by issue URL.
#[derive(Debug, Deserialize)]
struct ReplayFixture {
    search_response: ApiSearchResponse,
    #[serde(default)]
    patch_responses: std::collections::HashMap<String, ReplayPatch>,
}

#[derive(Debug, Deserialize)]
struct ReplayPatch {
    diff: String,
    #[serde(default)]
    files: Vec<PatchFile>,
}

fn candidates_from_api(resp: ApiSearchResponse, limit: usize) -> Vec<CandidateIssue> {
    resp.items
        .into_iter()
        .filter(|i| i.state == "closed")
        .take(limit)
        .enumerate()
        .map(|(idx, item)| CandidateIssue {
            repo_slug: item.repo_slug(),
            url: item.html_url,
            title: item.title,
            body: item.body.unwrap_or_default(),
            comments: Vec::new(),
            state: item.state,
            is_pull_request: item.pull_request.is_some(),
            search_rank: idx + 1,
            patch: None,
            embedded_diff: None,
            embedded_files: None,
        })
        .collect()
}

/// Execute a query against the backend, returning at most `limit` closed
/// candidates in backend relevance order with contiguous 1-based ranks.
pub fn search(query: &Query, backend: &Backend, limit: usize) -> Result<Vec<CandidateIssue>, SearchError> {
    assert!(limit >= 1, "limit must be >= 1");
    match backend {
        Backend::Corpus(path) => search_corpus(query, path, limit),
        Backend::Replay(path) => {
            let data = fs::read_to_string(path)?;
            let fixture: ReplayFixture = serde_json::from_str(&data)
                .map_err(|e| SearchError::BadResponse(e.to_string()))?;
            Ok(candidates_from_api(fixture.search_response, limit))
        }
        Backend::Live(cfg) => search_live(query, cfg, limit),
    }
}

fn search_corpus(query: &Query, path: &Path, limit: usize) -> Result<Vec<CandidateIssue>, SearchError> {
    let file = fs::File::open(path)?;
    let reader = BufReader::new(file);
    let terms: Vec<String> = query.terms.iter().map(|t| t.to_lowercase()).collect();
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        // malformed lines are skippable
        let Ok(rec) = serde_json::from_str::<CorpusRecord>(&line) else {
            continue;
        };
        if rec.state != "closed" {
            continue;
        }
        let haystack = {
            let mut h = rec.body.to_lowercase();
            for c in &rec.comments {
                h.push('\n');
                h.push_str(&c.to_lowercase());
            }
            h
        };
        if terms.iter().all(|t| haystack.contains(t.as_str())) {
            let rank = out.len() + 1;
            out.push(CandidateIssue::from_record(rec, rank));
            if out.len() == limit {
                break;
            }
        }
    }
    Ok(out)
}

fn search_live(query: &Query, cfg: &LiveConfig, limit: usize) -> Result<Vec<CandidateIssue>, SearchError> {
    let q = format!("{} is:closed {}", query.rendered(), cfg.language_qualifier);
    let url = format!("{}/search/issues", cfg.api_base);
    let mut attempt = 0;
    loop {
        attempt += 1;
        match live_get_json(cfg, &url, &[("q", q.as_str()), ("per_page", &limit.to_string())]) {
            Ok(body) => {
                let resp: ApiSearchResponse = serde_json::from_str(&body)
                    .map_err(|e| SearchError::BadResponse(e.to_string()))?;
                return Ok(candidates_from_api(resp, limit));
            }
            Err(SearchError::RateLimited(reset)) if attempt == 1 => {
                let now = SystemTime::now()
                    .duration_since(UNIX_EPOCH)
                    .unwrap_or_default()
                    .as_secs();
                let wait = reset.saturating_sub(now);
                if wait <= 60 {
                    std::thread::sleep(Duration::from_secs(wait + 1));
                    continue;
                }
                return Err(SearchError::RateLimited(reset));
            }
            Err(e) => return Err(e),
        }
    }
}

fn live_get(cfg: &LiveConfig, url: &str, params: &[(&str, &str)], accept: &str) -> Result<String, SearchError> {
    let client = reqwest::blocking::Client::builder()
        .user_agent("patchfinder")
        .build()
        .map_err(|e| SearchError::Network(e.to_string()))?;
    let mut req = client
        .get(url)
        .query(params)
        .header("Accept", accept)
        .header("X-GitHub-Api-Version", "2022-11-28");
    if let Some(token) = &cfg.token {
        req = req.header("Authorization", format!("Bearer {}", token));
    }
    let resp = req.send().map_err(|e| SearchError::Network(e.to_string()))?;
    let status = resp.status();
    if status == reqwest::StatusCode::UNAUTHORIZED {
        return Err(SearchError::Auth);
    }
    let remaining = resp
        .headers()
        .get("x-ratelimit-remaining")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.parse::<u64>().ok());
    if (status == reqwest::StatusCode::FORBIDDEN || status.as_u16() == 429)
        && remaining == Some(0)
    {
        let reset = resp
            .headers()
            .get("x-ratelimit-reset")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.parse::<u64>().ok())
            .unwrap_or(0);
        return Err(SearchError::RateLimited(reset));
    }
    if !status.is_success() {
        return Err(SearchError::Network(format!("HTTP {} from {}", status, url)));
    }
    resp.text().map_err(|e| SearchError::Network(e.to_string()))
}

fn live_get_json(cfg: &LiveConfig, url: &str, params: &[(&str, &str)]) -> Result<String, SearchError> {
    live_get(cfg, url, params, "application/vnd.github+json")
}

/// Fetch the candidate's patch: unified diff plus post-image contents.
/// `None` for fix-less issues.
pub fn fetch_patch(candidate: &CandidateIssue, backend: &Backend) -> Result<Option<Patch>, SearchError> {
    match backend {
        Backend::Corpus(_) => Ok(candidate.embedded_diff.clone().map(|diff| {
            Patch::from_parts(diff, candidate.embedded_files.clone().unwrap_or_default())
        })),
        Backend::Replay(path) => {
            let data = fs::read_to_string(path)?;
            let fixture: ReplayFixture = serde_json::from_str(&data)
                .map_err(|e| SearchError::BadResponse(e.to_string()))?;
            Ok(fixture
                .patch_responses
                .get(&candidate.url)
                .map(|p| Patch::from_parts(p.diff.clone(), p.files.clone())))
        }
        Backend::Live(cfg) => fetch_patch_live(candidate, cfg),
    }
}

fn fetch_patch_live(candidate: &CandidateIssue, cfg: &LiveConfig) -> Result<Option<Patch>, SearchError> {
    if !candidate.is_pull_request {
        return Ok(None);
    }
    // html_url .../repos/<slug>/pull/<n> maps onto the pulls API
    let number = candidate
        .url
        .rsplit('/')
        .next()
        .and_then(|n| n.parse::<u64>().ok())
        .ok_or_else(|| SearchError::BadResponse(format!("unparseable PR url {}", candidate.url)))?;
    let pull_url = format!("{}/repos/{}/pulls/{}", cfg.api_base, candidate.repo_slug, number);
    let diff = live_get(cfg, &pull_url, &[], "application/vnd.github.diff")?;
    if diff.len() > cfg.diff_cap {
        return Err(SearchError::DiffTooLarge(cfg.diff_cap));
    }
    let head_sha = {
        let meta = live_get_json(cfg, &pull_url, &[])?;
        let v: serde_json::Value = serde_json::from_str(&meta)
            .map_err(|e| SearchError::BadResponse(e.to_string()))?;
        v["head"]["sha"].as_str().unwrap_or("HEAD").to_string()
    };
    let mut files = Vec::new();
    for path in Patch::modified_paths(&diff) {
        if !(path.ends_with(".java") || path.ends_with(".xml")) {
            continue;
        }
        let raw_url = format!(
            "https://raw.githubusercontent.com/{}/{}/{}",
            candidate.repo_slug, head_sha, path
        );
        match live_get(cfg, &raw_url, &[], "*/*") {
            Ok(content) => files.push(PatchFile { path, content }),
            Err(_) => continue, // deleted file or fetch hiccup; skip
        }
    }
    Ok(Some(Patch::from_parts(diff, files)))
}

/// Fetch patches for a candidate list with a bounded worker pool, storing
/// each result on its candidate. Failures are reported per candidate and do
/// not abort the batch.
pub fn fetch_patches(
    candidates: &mut [CandidateIssue],
    backend: &Backend,
    workers: usize,
) -> Vec<(String, SearchError)> {
    let workers = workers.max(1);
    if candidates.is_empty() {
        return Vec::new();
    }
    let chunk_size = candidates.len().div_ceil(workers);
    let mut failures = Vec::new();
    let results: Vec<(usize, Result<Option<Patch>, SearchError>)> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for (chunk_idx, chunk) in candidates.chunks(chunk_size).enumerate() {
            let base = chunk_idx * chunk_size;
            let backend = backend.clone();
            handles.push(scope.spawn(move || {
                chunk
                    .iter()
                    .enumerate()
                    .map(|(i, c)| (base + i, fetch_patch(c, &backend)))
                    .collect::<Vec<_>>()
            }));
        }
        let mut all = Vec::new();
        for h in handles {
            all.extend(h.join().expect("fetch worker"));
        }
        all
    });
    for (idx, result) in results {
        match result {
            Ok(patch) => candidates[idx].patch = patch,
            Err(e) => failures.push((candidates[idx].url.clone(), e)),
        }
    }
    failures
}

// ---------------------------------------------------------------------------
// Cache: content-addressed by sha256(query || backend identity).

pub struct Cache {
    root: PathBuf,
    ttl: Duration,
}

impl Cache {
    pub fn new(root: PathBuf, ttl: Duration) -> Cache {
        Cache { root, ttl }
    }

    fn entry_path(&self, query: &str, backend_id: &str) -> PathBuf {
        let mut hasher = Sha256::new();
        hasher.update(query.as_bytes());
        hasher.update(backend_id.as_bytes());
        let digest = hasher.finalize();
        let hex: String = digest.iter().map(|b| format!("{:02x}", b)).collect();
        self.root.join(format!("{}.resp", hex))
    }

    /// Returns the cached bytes, or `None` on miss or expiry. IO trouble is
    /// treated as a miss.
    pub fn lookup(&self, query: &str, backend_id: &str) -> Option<Vec<u8>> {
        let path = self.entry_path(query, backend_id);
        let meta = fs::metadata(&path).ok()?;
        let age = meta.modified().ok()?.elapsed().ok()?;
        if age > self.ttl {
            return None;
        }
        fs::read(&path).ok()
    }

    pub fn store(&self, query: &str, backend_id: &str, response: &[u8]) -> Result<(), SearchError> {
        fs::create_dir_all(&self.root)?;
        fs::write(self.entry_path(query, backend_id), response)?;
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Ingest: build the offline corpus.

/// Outcome of one ingest run.
#[derive(Debug, Default)]
pub struct IngestReport {
    pub written: usize,
    pub skipped_duplicates: usize,
    pub failures: Vec<(String, String)>,
}

fn existing_urls(corpus_path: &Path) -> Result<HashSet<String>, SearchError> {
    let mut urls = HashSet::new();
    if corpus_path.exists() {
        let file = fs::File::open(corpus_path)?;
        for line in BufReader::new(file).lines() {
            let line = line?;
            if let Ok(rec) = serde_json::from_str::<CorpusRecord>(&line) {
                urls.insert(rec.url);
            }
        }
    }
    Ok(urls)
}

/// Fetch each source and append one corpus record per candidate; duplicate
/// URLs (already present, or repeated in the input) are skipped, making
/// ingest idempotent. A source may be a local path to a record JSON file or
/// a live issue URL.
pub fn ingest(sources: &[String], backend: &Backend, corpus_path: &Path) -> Result<IngestReport, SearchError> {
    let mut seen = existing_urls(corpus_path)?;
    let mut report = IngestReport::default();
    let mut out = fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(corpus_path)?;
    for source in sources {
        match fetch_record(source, backend) {
            Ok(rec) => {
                if seen.contains(&rec.url) {
                    report.skipped_duplicates += 1;
                    continue;
                }
                let line = serde_json::to_string(&rec)
                    .map_err(|e| SearchError::BadResponse(e.to_string()))?;
                writeln!(out, "{}", line)?;
                seen.insert(rec.url.clone());
                report.written += 1;
            }
            Err(e) => report.failures.push((source.clone(), e.to_string())),
        }
    }
    Ok(report)
}

fn fetch_record(source: &str, backend: &Backend) -> Result<CorpusRecord, SearchError> {
    let as_path = Path::new(source);
    if as_path.exists() {
        let data = fs::read_to_string(as_path)?;
        return serde_json::from_str(&data).map_err(|e| SearchError::BadResponse(e.to_string()));
    }
    match backend {
        Backend::Live(cfg) => fetch_record_live(source, cfg),
        _ => Err(SearchError::Network(format!("source not found: {}", source))),
    }
}

fn fetch_record_live(url: &str, cfg: &LiveConfig) -> Result<CorpusRecord, SearchError> {
    // https://github.com/<owner>/<name>/(issues|pull)/<n>
    let parts: Vec<&str> = url.trim_end_matches('/').rsplit('/').take(4).collect();
    let (number, kind, name, owner) = match parts.as_slice() {
        [n, k, name, owner] => (*n, *k, *name, *owner),
        _ => return Err(SearchError::BadResponse(format!("unparseable issue url {}", url))),
    };
    let slug = format!("{}/{}", owner, name);
    let issue_url = format!("{}/repos/{}/issues/{}", cfg.api_base, slug, number);
    let body = live_get_json(cfg, &issue_url, &[])?;
    let v: serde_json::Value =
        serde_json::from_str(&body).map_err(|e| SearchError::BadResponse(e.to_string()))?;
    let comments_body = live_get_json(cfg, &format!("{}/comments", issue_url), &[])?;
    let comments: Vec<String> = serde_json::from_str::<Vec<serde_json::Value>>(&comments_body)
        .map_err(|e| SearchError::BadResponse(e.to_string()))?
        .into_iter()
        .filter_map(|c| c["body"].as_str().map(str::to_string))
        .collect();
    let is_pull_request = kind == "pull" || v.get("pull_request").is_some();
    let mut rec = CorpusRecord {
        url: v["html_url"].as_str().unwrap_or(url).to_string(),
        title: v["title"].as_str().unwrap_or_default().to_string(),
        body: v["body"].as_str().unwrap_or_default().to_string(),
        comments,
        state: v["state"].as_str().unwrap_or("closed").to_string(),
        is_pull_request,
        repo_slug: slug,
        diff: None,
        files: None,
    };
    if is_pull_request {
        let candidate = CandidateIssue {
            url: rec.url.clone(),
            title: rec.title.clone(),
            body: rec.body.clone(),
            comments: rec.comments.clone(),
            state: rec.state.clone(),
            is_pull_request: true,
            search_rank: 1,
            repo_slug: rec.repo_slug.clone(),
            patch: None,
            embedded_diff: None,
            embedded_files: None,
        };
        if let Ok(Some(patch)) = fetch_patch_live(&candidate, cfg) {
            rec.diff = Some(patch.diff_text);
            rec.files = Some(patch.modified_files);
        }
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::querygen::Query;

    fn query(terms: &[&str]) -> Query {
        Query {
            terms: terms.iter().map(|s| s.to_string()).collect(),
            qualifiers: vec!["in:body,comments".to_string()],
        }
    }

    fn record(url: &str, body: &str, state: &str) -> String {
        serde_json::to_string(&CorpusRecord {
            url: url.to_string(),
            title: "t".to_string(),
            body: body.to_string(),
            comments: vec![],
            state: state.to_string(),
            is_pull_request: false,
            repo_slug: "o/r".to_string(),
            diff: None,
            files: None,
        })
        .unwrap()
    }

    #[test]
    fn corpus_search_requires_all_terms() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let lines = vec![
            record("u1", "encoded string too long in here", "closed"),
            record("u2", "only encoded appears", "closed"),
            record("u3", "string too long but open", "open"),
        ];
        fs::write(&path, lines.join("\n")).unwrap();
        let hits = search(&query(&["encoded", "string"]), &Backend::Corpus(path), 10).unwrap();
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].url, "u1");
        assert_eq!(hits[0].search_rank, 1);
    }

    #[test]
    fn corpus_search_no_match_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        fs::write(&path, record("u1", "nothing relevant", "closed")).unwrap();
        let hits = search(&query(&["zzzz"]), &Backend::Corpus(path), 10).unwrap();
        assert!(hits.is_empty());
    }

    #[test]
    fn corpus_search_is_case_insensitive_and_order_invariant() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        fs::write(&path, record("u1", "Encoded STRING too long", "closed")).unwrap();
        let backend = Backend::Corpus(path);
        let a = search(&query(&["encoded", "string"]), &backend, 10).unwrap();
        let b = search(&query(&["string", "encoded"]), &backend, 10).unwrap();
        assert_eq!(a.len(), 1);
        assert_eq!(a.len(), b.len());
        assert_eq!(a[0].url, b[0].url);
    }

    #[test]
    fn malformed_corpus_lines_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let content = format!("{{not json}}\n{}\n", record("u1", "hit me", "closed"));
        fs::write(&path, content).unwrap();
        let hits = search(&query(&["hit"]), &Backend::Corpus(path), 10).unwrap();
        assert_eq!(hits.len(), 1);
    }

    #[test]
    fn results_are_closed_with_contiguous_ranks() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let lines: Vec<String> = (0..5)
            .map(|i| record(&format!("u{}", i), "shared needle text", "closed"))
            .collect();
        fs::write(&path, lines.join("\n")).unwrap();
        let hits = search(&query(&["needle"]), &Backend::Corpus(path), 3).unwrap();
        assert_eq!(hits.len(), 3);
        for (i, h) in hits.iter().enumerate() {
            assert_eq!(h.state, "closed");
            assert_eq!(h.search_rank, i + 1);
        }
    }

    #[test]
    fn modified_paths_from_diff_headers() {
        let diff = "\
diff --git a/src/A.java b/src/A.java
--- a/src/A.java
+++ b/src/A.java
@@ -1 +1 @@
-x
+y
diff --git a/doc/readme.md b/doc/readme.md
--- a/doc/readme.md
+++ b/doc/readme.md
@@ -1 +1 @@
-a
+b
";
        assert_eq!(
            Patch::modified_paths(diff),
            vec!["src/A.java".to_string(), "doc/readme.md".to_string()]
        );
    }

    #[test]
    fn patch_keeps_only_headered_source_files() {
        let diff = "+++ b/src/A.java\n+++ b/res/layout/main.xml\n+++ b/notes.txt\n";
        let files = vec![
            PatchFile { path: "src/A.java".into(), content: "class A {}".into() },
            PatchFile { path: "res/layout/main.xml".into(), content: "<LinearLayout/>".into() },
            PatchFile { path: "notes.txt".into(), content: "n".into() },
            PatchFile { path: "src/Other.java".into(), content: "not in diff".into() },
        ];
        let patch = Patch::from_parts(diff.to_string(), files);
        assert_eq!(patch.modified_files.len(), 2);
        assert_eq!(patch.java_files().count(), 1);
        assert_eq!(patch.xml_files().count(), 1);
    }

    #[test]
    fn corpus_fetch_patch_uses_embedded_diff() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let rec = CorpusRecord {
            url: "u1".into(),
            title: "fix".into(),
            body: "needle".into(),
            comments: vec![],
            state: "closed".into(),
            is_pull_request: true,
            repo_slug: "o/r".into(),
            diff: Some("+++ b/src/A.java\n@@ -1 +1 @@\n-x\n+y\n".into()),
            files: Some(vec![PatchFile { path: "src/A.java".into(), content: "class A {}".into() }]),
        };
        fs::write(&path, serde_json::to_string(&rec).unwrap()).unwrap();
        let backend = Backend::Corpus(path);
        let hits = search(&query(&["needle"]), &backend, 10).unwrap();
        let patch = fetch_patch(&hits[0], &backend).unwrap().unwrap();
        assert_eq!(patch.modified_files.len(), 1);

        // fix-less issue has no patch
        let dir2 = tempfile::tempdir().unwrap();
        let path2 = dir2.path().join("corpus.jsonl");
        fs::write(&path2, record("u2", "needle", "closed")).unwrap();
        let backend2 = Backend::Corpus(path2);
        let hits2 = search(&query(&["needle"]), &backend2, 10).unwrap();
        assert!(fetch_patch(&hits2[0], &backend2).unwrap().is_none());
    }

    #[test]
    fn cache_store_then_lookup_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().to_path_buf(), DEFAULT_CACHE_TTL);
        cache.store("q1", "b1", b"payload").unwrap();
        assert_eq!(cache.lookup("q1", "b1").as_deref(), Some(&b"payload"[..]));
        assert_eq!(cache.lookup("q2", "b1"), None);
        assert_eq!(cache.lookup("q1", "b2"), None);
    }

    #[test]
    fn cache_expires_after_ttl() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path().to_path_buf(), Duration::from_secs(0));
        cache.store("q1", "b1", b"payload").unwrap();
        std::thread::sleep(Duration::from_millis(20));
        assert_eq!(cache.lookup("q1", "b1"), None);
    }

    fn record_file(dir: &Path, name: &str, url: &str) -> String {
        let path = dir.join(name);
        fs::write(&path, record(url, "body text", "closed")).unwrap();
        path.display().to_string()
    }

    #[test]
    fn ingest_is_idempotent() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus.jsonl");
        let backend = Backend::Corpus(corpus.clone());
        let sources: Vec<String> = (0..5)
            .map(|i| record_file(dir.path(), &format!("r{}.json", i), &format!("u{}", i)))
            .collect();
        let first = ingest(&sources, &backend, &corpus).unwrap();
        assert_eq!(first.written, 5);
        let bytes_after_first = fs::read(&corpus).unwrap();
        let second = ingest(&sources, &backend, &corpus).unwrap();
        assert_eq!(second.written, 0);
        assert_eq!(second.skipped_duplicates, 5);
        assert_eq!(fs::read(&corpus).unwrap(), bytes_after_first);
    }

    #[test]
    fn ingest_reports_partial_failures() {
        let dir = tempfile::tempdir().unwrap();
        let corpus = dir.path().join("corpus.jsonl");
        let backend = Backend::Corpus(corpus.clone());
        let mut sources: Vec<String> = (0..4)
            .map(|i| record_file(dir.path(), &format!("r{}.json", i), &format!("u{}", i)))
            .collect();
        sources.push("/nonexistent/never.json".to_string());
        let report = ingest(&sources, &backend, &corpus).unwrap();
        assert_eq!(report.written, 4);
        assert_eq!(report.failures.len(), 1);
    }

    #[test]
    fn replay_backend_parses_recorded_response() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("replay.json");
        let fixture = serde_json::json!({
            "search_response": {
                "items": [
                    {
                        "html_url": "https://example.invalid/o/r/pull/1",
                        "title": "fix",
                        "body": "b",
                        "state": "closed",
                        "pull_request": {},
                        "repository_url": "https://api.example.invalid/repos/o/r"
                    },
                    {
                        "html_url": "https://example.invalid/o/r/issues/2",
                        "title": "plain",
                        "body": "b2",
                        "state": "closed",
                        "repository_url": "https://api.example.invalid/repos/o/r"
                    }
                ]
            },
            "patch_responses": {
                "https://example.invalid/o/r/pull/1": {
                    "diff": "+++ b/A.java\n",
                    "files": [{"path": "A.java", "content": "class A {}"}]
                }
            }
        });
        fs::write(&path, fixture.to_string()).unwrap();
        let backend = Backend::Replay(path);
        let hits = search(&query(&["anything"]), &backend, 10).unwrap();
        assert_eq!(hits.len(), 2);
        assert!(hits[0].is_pull_request);
        assert_eq!(hits[0].repo_slug, "o/r");
        assert!(!hits[1].is_pull_request);
        let patch = fetch_patch(&hits[0], &backend).unwrap().unwrap();
        assert_eq!(patch.modified_files.len(), 1);
        assert!(fetch_patch(&hits[1], &backend).unwrap().is_none());
    }

    #[test]
    fn backend_parse_selectors() {
        assert!(matches!(Backend::parse("live", false), Ok(Backend::Live(_))));
        assert!(matches!(Backend::parse("corpus:/tmp/c.jsonl", false), Ok(Backend::Corpus(_))));
        assert!(matches!(Backend::parse("replay:/tmp/r.json", false), Ok(Backend::Replay(_))));
        assert!(Backend::parse("ftp:whatever", false).is_err());
    }
}
