//! Token-based code similarity between the target project's Java sources
//! and a candidate patch's modified files, via greedy string tiling.
//!
//! Sources are abstracted to token-class streams (all identifiers collapse
//! to one class, literals to per-kind classes) so renaming does not defeat
//! similarity. Tiling repeatedly marks the longest unmarked common token
//! substring of length >= `min_match`; similarity is coverage-based:
//! `2 * coverage / (|a| + |b|)`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::search::Patch;

/// Default minimum match length in tokens.
pub const DEFAULT_MIN_MATCH: usize = 9;

/// Abstract lexical token class. Concrete lexemes are dropped: every
/// identifier is `Ident`, every numeric literal is `LitNum`, and so on.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TokenClass {
    /// One code per keyword, indexed into [`JAVA_KEYWORDS`].
    Keyword(u8),
    Ident,
    LitNum,
    LitString,
    LitChar,
    /// One code per punctuation/operator symbol.
    Sym(char),
}

/// Java keywords plus the literal words `true`/`false`/`null`.
pub const JAVA_KEYWORDS: &[&str] = &[
    "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char", "class", "const",
    "continue", "default", "do", "double", "else", "enum", "extends", "final", "finally", "float",
    "for", "goto", "if", "implements", "import", "instanceof", "int", "interface", "long",
    "native", "new", "package", "private", "protected", "public", "record", "return", "short",
    "static", "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
    "transient", "try", "var", "void", "volatile", "while", "true", "false", "null", "yield",
    "sealed", "permits",
];

/// Token-class stream of one source file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenStream {
    pub file_path: String,
    pub tokens: Vec<TokenClass>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Lex Java source bytes into a token-class stream. Non-UTF-8 bytes are
/// replaced for lexing; lexically odd regions are skipped, never fatal.
pub fn tokenize_java(file_path: &str, source: &[u8]) -> TokenStream {
    let text = String::from_utf8_lossy(source);
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        // line comment
        if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        // block comment
        if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            while i < chars.len() {
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    i += 2;
                    break;
                }
                i += 1;
            }
            continue;
        }
        if c == '"' {
            // text block or string literal
            if chars.get(i + 1) == Some(&'"') && chars.get(i + 2) == Some(&'"') {
                i += 3;
                while i < chars.len() {
                    if chars[i] == '"'
                        && chars.get(i + 1) == Some(&'"')
                        && chars.get(i + 2) == Some(&'"')
                    {
                        i += 3;
                        break;
                    }
                    i += 1;
                }
            } else {
                i += 1;
                while i < chars.len() && chars[i] != '"' {
                    if chars[i] == '\\' {
                        i += 1;
                    }
                    i += 1;
                }
                i += 1;
            }
            tokens.push(TokenClass::LitString);
            continue;
        }
        if c == '\'' {
            i += 1;
            while i < chars.len() && chars[i] != '\'' {
                if chars[i] == '\\' {
                    i += 1;
                }
                i += 1;
            }
            i += 1;
            tokens.push(TokenClass::LitChar);
            continue;
        }
        if c.is_ascii_digit() {
            while i < chars.len()
                && (chars[i].is_ascii_alphanumeric() || chars[i] == '.' || chars[i] == '_')
            {
                // `1.foo()` style member access on a literal is not worth
                // special-casing; a trailing dot folds into the literal
                i += 1;
            }
            tokens.push(TokenClass::LitNum);
            continue;
        }
        if c.is_alphabetic() || c == '_' || c == '$' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '$')
            {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            match JAVA_KEYWORDS.iter().position(|k| *k == word) {
                Some(idx) => tokens.push(TokenClass::Keyword(idx as u8)),
                None => tokens.push(TokenClass::Ident),
            }
            continue;
        }
        if c.is_ascii_punctuation() {
            tokens.push(TokenClass::Sym(c));
            i += 1;
            continue;
        }
        // anything else (stray non-ASCII) is skipped
        i += 1;
    }
    TokenStream {
        file_path: file_path.to_string(),
        tokens,
    }
}

/// One matched token substring pair.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tile {
    pub start_a: usize,
    pub start_b: usize,
    pub length: usize,
}

/// Result of one tiling run.
#[derive(Clone, Debug)]
pub struct GstResult {
    /// `2 * coverage / (|a| + |b|)`; empty-vs-empty is 1.0.
    pub similarity: f64,
    pub coverage: usize,
    pub tiles: Vec<Tile>,
    /// True when some iteration saw more than one maximal match of the
    /// chosen length; tie-breaks are deterministic but greedy optimality is
    /// only guaranteed for tie-free runs.
    pub had_ties: bool,
}

fn similarity_from_coverage(coverage: usize, len_a: usize, len_b: usize) -> f64 {
    if len_a + len_b == 0 {
        return 1.0;
    }
    2.0 * coverage as f64 / (len_a + len_b) as f64
}

/// Longest unmarked common substring by direct scan. Returns the match with
/// maximal length, ties broken by smallest `start_a` then smallest
/// `start_b`, together with the number of maximal candidates seen.
fn longest_match_naive(
    a: &[TokenClass],
    b: &[TokenClass],
    marked_a: &[bool],
    marked_b: &[bool],
    min_match: usize,
) -> (Option<Tile>, usize) {
    let mut best: Option<Tile> = None;
    let mut candidates_at_best = 0;
    for i in 0..a.len() {
        if marked_a[i] {
            continue;
        }
        for j in 0..b.len() {
            if marked_b[j] {
                continue;
            }
            let mut len = 0;
            while i + len < a.len()
                && j + len < b.len()
                && !marked_a[i + len]
                && !marked_b[j + len]
                && a[i + len] == b[j + len]
            {
                len += 1;
            }
            if len < min_match {
                continue;
            }
            match best {
                Some(t) if len < t.length => {}
                Some(t) if len == t.length => candidates_at_best += 1,
                _ => {
                    best = Some(Tile { start_a: i, start_b: j, length: len });
                    candidates_at_best = 1;
                }
            }
        }
    }
    (best, candidates_at_best)
}

const HASH_BASE: u64 = 1_000_003;

/// Longest unmarked common substring via Karp-Rabin rolling hashes with a
/// binary search over the length. Same contract as the naive scan; hash
/// hits are verified by direct comparison.
fn longest_match_kr(
    a: &[TokenClass],
    b: &[TokenClass],
    marked_a: &[bool],
    marked_b: &[bool],
    min_match: usize,
) -> (Option<Tile>, usize) {
    fn token_code(t: TokenClass) -> u64 {
        match t {
            TokenClass::Keyword(k) => 1 + k as u64,
            TokenClass::Ident => 300,
            TokenClass::LitNum => 301,
            TokenClass::LitString => 302,
            TokenClass::LitChar => 303,
            TokenClass::Sym(c) => 400 + c as u64,
        }
    }

    // unmarked windows of a given length, as (hash, start)
    fn windows(stream: &[TokenClass], marked: &[bool], len: usize) -> Vec<(u64, usize)> {
        let mut out = Vec::new();
        if len == 0 || stream.len() < len {
            return out;
        }
        let mut pow = 1u64;
        for _ in 1..len {
            pow = pow.wrapping_mul(HASH_BASE);
        }
        let mut hash = 0u64;
        let mut valid_from = 0; // window start must be >= last marked index + 1
        for idx in 0..stream.len() {
            hash = hash
                .wrapping_mul(HASH_BASE)
                .wrapping_add(token_code(stream[idx]));
            if marked[idx] {
                valid_from = idx + 1;
            }
            if idx + 1 >= len {
                let start = idx + 1 - len;
                if start >= valid_from {
                    out.push((hash, start));
                }
                hash = hash.wrapping_sub(pow.wrapping_mul(token_code(stream[start])));
            }
        }
        out
    }

    fn match_at(
        a: &[TokenClass],
        b: &[TokenClass],
        marked_a: &[bool],
        marked_b: &[bool],
        len: usize,
    ) -> (Option<Tile>, usize) {
        let a_windows = windows(a, marked_a, len);
        if a_windows.is_empty() {
            return (None, 0);
        }
        let mut by_hash: HashMap<u64, Vec<usize>> = HashMap::new();
        for (h, start) in &a_windows {
            by_hash.entry(*h).or_default().push(*start);
        }
        let mut best: Option<Tile> = None;
        let mut count = 0;
        for (h, j) in windows(b, marked_b, len) {
            let Some(starts) = by_hash.get(&h) else {
                continue;
            };
            for &i in starts {
                // collision check: hashes are advisory only
                if a[i..i + len] != b[j..j + len] {
                    continue;
                }
                count += 1;
                let tile = Tile { start_a: i, start_b: j, length: len };
                match best {
                    Some(t) if (t.start_a, t.start_b) <= (i, j) => {}
                    _ => best = Some(tile),
                }
            }
        }
        (best, count)
    }

    let max_len = a.len().min(b.len());
    if max_len < min_match {
        return (None, 0);
    }
    // largest length with any match; existence is monotone in length
    let (mut lo, mut hi) = (min_match, max_len);
    if match_at(a, b, marked_a, marked_b, lo).0.is_none() {
        return (None, 0);
    }
    while lo < hi {
        let mid = lo + (hi - lo + 1) / 2;
        if match_at(a, b, marked_a, marked_b, mid).0.is_some() {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    match_at(a, b, marked_a, marked_b, lo)
}

fn gst_with(
    a: &TokenStream,
    b: &TokenStream,
    min_match: usize,
    finder: impl Fn(&[TokenClass], &[TokenClass], &[bool], &[bool], usize) -> (Option<Tile>, usize),
) -> GstResult {
    assert!(min_match >= 1, "min_match must be >= 1");
    let mut marked_a = vec![false; a.len()];
    let mut marked_b = vec![false; b.len()];
    let mut tiles = Vec::new();
    let mut coverage = 0;
    let mut had_ties = false;
    loop {
        let (best, candidates) = finder(&a.tokens, &b.tokens, &marked_a, &marked_b, min_match);
        let Some(tile) = best else { break };
        if candidates > 1 {
            had_ties = true;
        }
        for k in 0..tile.length {
            marked_a[tile.start_a + k] = true;
            marked_b[tile.start_b + k] = true;
        }
        coverage += tile.length;
        tiles.push(tile);
    }
    GstResult {
        similarity: similarity_from_coverage(coverage, a.len(), b.len()),
        coverage,
        tiles,
        had_ties,
    }
}

/// Greedy string tiling similarity, Karp-Rabin accelerated.
pub fn gst_similarity(a: &TokenStream, b: &TokenStream, min_match: usize) -> GstResult {
    gst_with(a, b, min_match, longest_match_kr)
}

/// Reference tiling using the direct O(n^3) scan; must agree bit-exactly
/// with [`gst_similarity`] on all inputs.
pub fn gst_similarity_naive(a: &TokenStream, b: &TokenStream, min_match: usize) -> GstResult {
    gst_with(a, b, min_match, longest_match_naive)
}

/// Per-patch-file similarity entry of a project/patch comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FileSimilarity {
    pub patch_file: String,
    /// Project file achieving the best similarity; empty when the project
    /// has no Java files.
    pub best_project_file: String,
    pub similarity: f64,
    pub token_count: usize,
    pub tiles: Vec<Tile>,
}

/// Project-vs-patch comparison result.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectSimilarity {
    /// Token-count-weighted mean of per-file best similarities.
    pub overall: f64,
    pub per_file: Vec<FileSimilarity>,
    /// Set when the project contained no Java files; overall is 0.0.
    pub empty_project: bool,
}

fn project_java_streams(project_root: &Path) -> Vec<TokenStream> {
    let mut paths: Vec<PathBuf> = WalkDir::new(project_root)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .filter(|e| e.path().extension().is_some_and(|x| x == "java"))
        .map(|e| e.into_path())
        .collect();
    paths.sort();
    paths
        .iter()
        .filter_map(|p| {
            let bytes = std::fs::read(p).ok()?;
            Some(tokenize_java(&p.display().to_string(), &bytes))
        })
        .collect()
}

/// Compare each Java post-image of `patch` against every Java file under
/// `project_root`, keeping the best match per patch file. The overall score
/// weights per-file bests by patch-file token counts. A project without
/// Java files yields 0.0 with `empty_project` set, not an error.
pub fn project_patch_similarity(
    project_root: &Path,
    patch: &Patch,
    min_match: usize,
) -> ProjectSimilarity {
    let project_streams = project_java_streams(project_root);
    let patch_streams: Vec<TokenStream> = patch
        .java_files()
        .map(|f| tokenize_java(&f.path, f.content.as_bytes()))
        .collect();

    if project_streams.is_empty() {
        return ProjectSimilarity {
            overall: 0.0,
            per_file: patch_streams
                .iter()
                .map(|p| FileSimilarity {
                    patch_file: p.file_path.clone(),
                    best_project_file: String::new(),
                    similarity: 0.0,
                    token_count: p.len(),
                    tiles: Vec::new(),
                })
                .collect(),
            empty_project: true,
        };
    }

    // patch files fan out to a bounded pool; stable patch order keeps the
    // reduction deterministic
    let workers = 4usize;
    let chunk_size = patch_streams.len().div_ceil(workers).max(1);
    let per_file: Vec<FileSimilarity> = std::thread::scope(|scope| {
        let project = &project_streams;
        let mut handles = Vec::new();
        for chunk in patch_streams.chunks(chunk_size) {
            handles.push(scope.spawn(move || {
                chunk
                    .iter()
                    .map(|p| best_match(p, project, min_match))
                    .collect::<Vec<_>>()
            }));
        }
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("similarity worker"))
            .collect()
    });

    let total_tokens: usize = per_file.iter().map(|f| f.token_count).sum();
    let overall = if total_tokens == 0 {
        0.0
    } else {
        per_file
            .iter()
            .map(|f| f.token_count as f64 * f.similarity)
            .sum::<f64>()
            / total_tokens as f64
    };
    ProjectSimilarity {
        overall,
        per_file,
        empty_project: false,
    }
}

fn best_match(patch_stream: &TokenStream, project: &[TokenStream], min_match: usize) -> FileSimilarity {
    let mut best_sim = -1.0f64;
    let mut best_file = String::new();
    let mut best_tiles = Vec::new();
    for f in project {
        let result = gst_similarity(f, patch_stream, min_match);
        if result.similarity > best_sim {
            best_sim = result.similarity;
            best_file = f.file_path.clone();
            best_tiles = result.tiles;
        }
    }
    FileSimilarity {
        patch_file: patch_stream.file_path.clone(),
        best_project_file: best_file,
        similarity: best_sim.max(0.0),
        token_count: patch_stream.len(),
        tiles: best_tiles,
    }
}
