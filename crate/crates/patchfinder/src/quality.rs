//! Intrinsic candidate quality, independent of any similarity signal:
//! does the issue carry a fix, and does it have a reasonable amount of
//! content.

use serde::{Deserialize, Serialize};

use crate::search::CandidateIssue;

/// Word count at which the content factor saturates.
pub const DEFAULT_SATURATION_WORDS: usize = 200;

/// Weight of fix presence vs content length. A fix-bearing issue always
/// outranks a fix-less one on quality alone.
pub const PATCH_WEIGHT: f64 = 0.6;
pub const CONTENT_WEIGHT: f64 = 0.4;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QualitySignal {
    pub has_patch: bool,
    pub word_count: usize,
    /// `0.6 * [has_patch] + 0.4 * min(1, word_count / saturation)`
    pub score: f64,
}

/// Word count of body plus all comments, excluding fenced code blocks so
/// pasted logs do not inflate quality.
pub fn countable_words(body: &str, comments: &[String]) -> usize {
    let mut count = words_outside_fences(body);
    for c in comments {
        count += words_outside_fences(c);
    }
    count
}

fn words_outside_fences(text: &str) -> usize {
    let mut in_fence = false;
    let mut count = 0;
    for line in text.lines() {
        if line.trim_start().starts_with("```") {
            in_fence = !in_fence;
            continue;
        }
        if !in_fence {
            count += line.split_whitespace().count();
        }
    }
    count
}

/// Score a fully fetched candidate (patch presence must be known).
pub fn quality_score(candidate: &CandidateIssue) -> QualitySignal {
    quality_score_with(candidate, DEFAULT_SATURATION_WORDS)
}

pub fn quality_score_with(candidate: &CandidateIssue, saturation_words: usize) -> QualitySignal {
    let has_patch = candidate.patch.is_some();
    let word_count = countable_words(&candidate.body, &candidate.comments);
    let content = (word_count as f64 / saturation_words.max(1) as f64).min(1.0);
    let score = PATCH_WEIGHT * if has_patch { 1.0 } else { 0.0 } + CONTENT_WEIGHT * content;
    QualitySignal {
        has_patch,
        word_count,
        score,
    }
}
