//! Fuse per-candidate signals into the final sorted recommendation list.
//!
//! Signals that do not apply to a candidate (no patch, no target
//! dependencies, non-Android) are excluded and the remaining weights are
//! renormalized per candidate, so a score is always a convex combination of
//! the signals that actually exist.

use serde::{Deserialize, Serialize};

use crate::search::CandidateIssue;

/// Non-negative fusion weights for code, dependency, UI, and quality
/// signals.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankWeights {
    pub code: f64,
    pub dependency: f64,
    pub ui: f64,
    pub quality: f64,
}

impl Default for RankWeights {
    fn default() -> Self {
        RankWeights {
            code: 0.55,
            dependency: 0.15,
            ui: 0.10,
            quality: 0.20,
        }
    }
}

impl RankWeights {
    /// Parse a `c,d,u,q` CLI value.
    pub fn parse(spec: &str) -> Result<RankWeights, String> {
        let parts: Vec<f64> = spec
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
            .collect::<Result<_, _>>()?;
        let [code, dependency, ui, quality] = parts.as_slice() else {
            return Err(format!("expected 4 comma-separated weights, got {}", parts.len()));
        };
        let w = RankWeights {
            code: *code,
            dependency: *dependency,
            ui: *ui,
            quality: *quality,
        };
        if [w.code, w.dependency, w.ui, w.quality]
            .iter()
            .any(|v| *v < 0.0 || !v.is_finite())
        {
            return Err("weights must be non-negative and finite".to_string());
        }
        Ok(w)
    }
}

/// A candidate with its computed signals, before fusion.
#[derive(Clone, Debug)]
pub struct ScoredCandidate {
    pub candidate: CandidateIssue,
    pub code_sim: Option<f64>,
    pub dep_sim: Option<f64>,
    pub ui_sim: Option<f64>,
    pub quality: f64,
}

/// One entry of the final sorted list.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Recommendation {
    pub rank: usize,
    pub final_score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code_sim: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dep_sim: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ui_sim: Option<f64>,
    pub quality: f64,
    pub candidate: CandidateIssue,
}

fn fuse(scored: &ScoredCandidate, weights: &RankWeights) -> f64 {
    let mut num = weights.quality * scored.quality;
    let mut den = weights.quality;
    for (w, s) in [
        (weights.code, scored.code_sim),
        (weights.dependency, scored.dep_sim),
        (weights.ui, scored.ui_sim),
    ] {
        if let Some(s) = s {
            num += w * s;
            den += w;
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Fuse and sort. Output is ordered by final score descending, ties broken
/// by ascending search rank, then lexicographic URL; ranks are contiguous
/// from 1. Empty input yields an empty list.
pub fn rerank(candidates: Vec<ScoredCandidate>, weights: &RankWeights) -> Vec<Recommendation> {
    let mut entries: Vec<Recommendation> = candidates
        .into_iter()
        .map(|s| {
            let final_score = fuse(&s, weights);
            Recommendation {
                rank: 0,
                final_score,
                code_sim: s.code_sim,
                dep_sim: s.dep_sim,
                ui_sim: s.ui_sim,
                quality: s.quality,
                candidate: s.candidate,
            }
        })
        .collect();
    entries.sort_by(|a, b| {
        b.final_score
            .partial_cmp(&a.final_score)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.candidate.search_rank.cmp(&b.candidate.search_rank))
            .then(a.candidate.url.cmp(&b.candidate.url))
    });
    for (idx, entry) in entries.iter_mut().enumerate() {
        entry.rank = idx + 1;
    }
    entries
}

#[cfg(test)]
mod tests {
    use super::*;

    fn candidate(url: &str, search_rank: usize) -> CandidateIssue {
        serde_json::from_value(serde_json::json!({
            "url": url, "title": "t", "body": "", "comments": [],
            "state": "closed", "is_pull_request": false,
            "search_rank": search_rank, "repo_slug": "o/r"
        }))
        .unwrap()
    }

    fn scored(
        url: &str,
        search_rank: usize,
        code: Option<f64>,
        dep: Option<f64>,
        ui: Option<f64>,
        quality: f64,
    ) -> ScoredCandidate {
        ScoredCandidate {
            candidate: candidate(url, search_rank),
            code_sim: code,
            dep_sim: dep,
            ui_sim: ui,
            quality,
        }
    }

    #[test]
    fn patch_bearing_similar_candidate_wins() {
        // mirrors the fourth-ranked true fix rising to rank 1
        let a = scored("a", 4, Some(0.594), None, None, 1.0);
        let b = scored("b", 1, None, None, None, 0.2);
        let out = rerank(vec![b, a], &RankWeights::default());
        assert_eq!(out[0].candidate.url, "a");
        let expected = (0.55 * 0.594 + 0.20 * 1.0) / 0.75;
        assert!((out[0].final_score - expected).abs() < 1e-12);
        assert!((expected - 0.702).abs() < 5e-4);
        assert!((out[1].final_score - 0.2).abs() < 1e-12);
        assert_eq!(out[0].rank, 1);
        assert_eq!(out[1].rank, 2);
    }

    #[test]
    fn ties_break_by_search_rank_then_url() {
        let out = rerank(
            vec![
                scored("z", 3, None, None, None, 0.5),
                scored("a", 1, None, None, None, 0.5),
                scored("b", 3, None, None, None, 0.5),
            ],
            &RankWeights::default(),
        );
        let urls: Vec<&str> = out.iter().map(|r| r.candidate.url.as_str()).collect();
        assert_eq!(urls, vec!["a", "b", "z"]);
    }

    #[test]
    fn empty_input_empty_output() {
        assert!(rerank(vec![], &RankWeights::default()).is_empty());
    }

    #[test]
    fn all_signals_na_ranks_by_quality() {
        let out = rerank(
            vec![
                scored("low", 1, None, None, None, 0.3),
                scored("high", 2, None, None, None, 0.9),
            ],
            &RankWeights::default(),
        );
        assert_eq!(out[0].candidate.url, "high");
        assert_eq!(out[0].final_score, 0.9);
    }

    #[test]
    fn weight_scaling_leaves_scores_unchanged() {
        let set = vec![
            scored("a", 1, Some(0.4), Some(0.2), None, 0.7),
            scored("b", 2, Some(0.9), None, None, 0.1),
            scored("c", 3, None, None, Some(0.5), 0.5),
        ];
        let base = rerank(set.clone(), &RankWeights::default());
        let w = RankWeights::default();
        let tripled = RankWeights {
            code: w.code * 3.0,
            dependency: w.dependency * 3.0,
            ui: w.ui * 3.0,
            quality: w.quality * 3.0,
        };
        let scaled = rerank(set, &tripled);
        for (a, b) in base.iter().zip(&scaled) {
            assert_eq!(a.candidate.url, b.candidate.url);
            assert!((a.final_score - b.final_score).abs() < 1e-12);
        }
    }

    #[test]
    fn scores_are_bounded() {
        let out = rerank(
            vec![
                scored("a", 1, Some(1.0), Some(1.0), Some(1.0), 1.0),
                scored("b", 2, Some(0.0), None, None, 0.0),
            ],
            &RankWeights::default(),
        );
        for r in &out {
            assert!((0.0..=1.0).contains(&r.final_score));
        }
    }

    #[test]
    fn parse_weights() {
        let w = RankWeights::parse("0.5,0.2,0.1,0.2").unwrap();
        assert_eq!(w.code, 0.5);
        assert!(RankWeights::parse("1,2,3").is_err());
        assert!(RankWeights::parse("1,2,3,-1").is_err());
        assert!(RankWeights::parse("a,b,c,d").is_err());
    }
}
