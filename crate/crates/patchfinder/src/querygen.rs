//! Query generation from a target issue's crash trace.
//!
//! The exception's simple name plus the sanitized head of its message become
//! the search terms; a scope qualifier restricts matching to issue bodies and
//! comments, where stack traces live.

use crate::search::TargetIssue;
use crate::stacktrace::{self, ExceptionInfo};

/// Scope qualifier appended to every generated query.
pub const SCOPE_QUALIFIER: &str = "in:body,comments";

/// Maximum number of terms kept in one query.
pub const MAX_TERMS: usize = 12;

/// A generated search query: word terms plus backend qualifiers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Query {
    pub terms: Vec<String>,
    pub qualifiers: Vec<String>,
}

impl Query {
    /// Rendered form: terms joined by single spaces, qualifiers last.
    pub fn rendered(&self) -> String {
        let mut parts: Vec<&str> = self.terms.iter().map(String::as_str).collect();
        parts.extend(self.qualifiers.iter().map(String::as_str));
        parts.join(" ")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum QueryError {
    #[error("no stack trace found and no fallback terms exist")]
    NoTraceFound,
}

/// Split a message into query word tokens: whitespace/punctuation separated
/// (intra-word hyphens kept), no digits, no path separators, length ≥ 2,
/// order preserved, capped at [`MAX_TERMS`].
pub fn sanitize_message(message: &str) -> Vec<String> {
    message
        .split_whitespace()
        // digit/path filters apply to the whole word, so `/tmp/x` and
        // `0xFF` drop entirely instead of leaking fragments
        .filter(|word| {
            !word.chars().any(|c| c.is_ascii_digit())
                && !word.contains('/')
                && !word.contains('\\')
        })
        .flat_map(|word| word.split(|c: char| c.is_ascii_punctuation() && c != '-'))
        .map(|tok| tok.trim_matches('-'))
        .filter(|tok| tok.chars().count() >= 2)
        .take(MAX_TERMS)
        .map(str::to_string)
        .collect()
}

/// Message words used for querying. The message clause before its first
/// colon is what the trace header itself asserted; anything after is
/// payload detail (sizes, offsets) that only narrows the search.
fn message_terms(info: &ExceptionInfo) -> Vec<String> {
    let clause = match info.message.split_once(':') {
        Some((head, _)) => head,
        None => info.message.as_str(),
    };
    sanitize_message(clause)
}

fn query_from_exception(info: &ExceptionInfo) -> Query {
    let mut terms = vec![info.simple_name.clone()];
    terms.extend(message_terms(info));
    terms.truncate(MAX_TERMS);
    Query {
        terms,
        qualifiers: vec![SCOPE_QUALIFIER.to_string()],
    }
}

/// Build the search query for a target issue from its primary exception.
pub fn build_query(issue: &TargetIssue) -> Result<Query, QueryError> {
    let mut text = issue.body.clone();
    for comment in &issue.comments {
        text.push('\n');
        text.push_str(comment);
    }
    let traces = stacktrace::extract_traces(&text);
    let primary = stacktrace::primary_exception(&traces).map_err(|_| QueryError::NoTraceFound)?;
    Ok(query_from_exception(primary))
}
