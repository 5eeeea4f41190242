//! End-to-end orchestration: extract trace, build query, search, fetch
//! patches, compute signals, rerank.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::codesim::{self, ProjectSimilarity};
use crate::projectsim::{self, Applicability, DependencyCoordinate};
use crate::quality::{self, QualitySignal};
use crate::querygen::{self};
use crate::rank::{self, RankWeights, Recommendation, ScoredCandidate};
use crate::search::{self, Backend, CandidateIssue, TargetIssue};

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub backend: Backend,
    pub limit: usize,
    pub min_match: usize,
    pub weights: RankWeights,
    pub fetch_workers: usize,
    pub quality_saturation_words: usize,
}

impl PipelineConfig {
    pub fn new(backend: Backend) -> PipelineConfig {
        PipelineConfig {
            backend,
            limit: 10,
            min_match: codesim::DEFAULT_MIN_MATCH,
            weights: RankWeights::default(),
            fetch_workers: 4,
            quality_saturation_words: quality::DEFAULT_SATURATION_WORDS,
        }
    }
}

/// Per-candidate working detail kept for `explain`: how each signal was
/// derived and how the weights renormalized.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExplainDetail {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<ProjectSimilarity>,
    pub dependency_intersection: Vec<String>,
    pub target_dependency_count: usize,
    pub candidate_dependency_count: usize,
    pub widget_intersection: Vec<String>,
    pub quality: QualitySignal,
    /// Sum of the weights whose signals applied to this candidate.
    pub applicable_weight_sum: f64,
}

/// Output of one recommendation run; the structured CLI format serializes
/// this directly.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub query: String,
    pub backend: String,
    pub recommendations: Vec<Recommendation>,
    pub details: BTreeMap<String, ExplainDetail>,
    /// Patch fetches that failed, as (url, error) pairs; non-fatal.
    pub fetch_failures: Vec<(String, String)>,
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Query(#[from] querygen::QueryError),
    #[error(transparent)]
    Search(#[from] search::SearchError),
}

fn candidate_dependencies(candidate: &CandidateIssue) -> BTreeSet<DependencyCoordinate> {
    let mut deps = BTreeSet::new();
    if let Some(patch) = &candidate.patch {
        for f in &patch.modified_files {
            if f.path.ends_with("pom.xml") {
                if let Ok(found) = projectsim::parse_maven_deps(&f.content) {
                    deps.extend(found);
                }
            }
        }
    }
    deps
}

/// Run the full pipeline for one target issue.
pub fn run_recommend(issue: &TargetIssue, cfg: &PipelineConfig) -> Result<RunReport, PipelineError> {
    let query = querygen::build_query(issue)?;
    let mut candidates = search::search(&query, &cfg.backend, cfg.limit)?;
    let fetch_failures = search::fetch_patches(&mut candidates, &cfg.backend, cfg.fetch_workers)
        .into_iter()
        .map(|(url, e)| (url, e.to_string()))
        .collect();

    let target_deps = issue
        .project_root
        .as_deref()
        .map(projectsim::project_dependencies)
        .unwrap_or_default();

    let mut scored = Vec::new();
    let mut details = BTreeMap::new();
    for candidate in candidates {
        let code = match (&candidate.patch, issue.project_root.as_deref()) {
            (Some(patch), Some(root)) if patch.java_files().next().is_some() => {
                Some(codesim::project_patch_similarity(root, patch, cfg.min_match))
            }
            _ => None,
        };
        let code_sim = code.as_ref().map(|c| c.overall);

        let candidate_deps = candidate_dependencies(&candidate);
        let dep_sim = projectsim::dependency_similarity(&target_deps, &candidate_deps).score();
        let dependency_intersection: Vec<String> = target_deps
            .intersection(&candidate_deps)
            .map(|d| format!("{}:{}", d.group, d.artifact))
            .collect();

        let candidate_widgets = candidate
            .patch
            .as_ref()
            .map(projectsim::patch_widgets)
            .unwrap_or_default();
        let ui_sim = projectsim::ui_similarity(issue, &candidate_widgets).score();
        let widget_intersection: Vec<String> = match ui_sim {
            Some(_) => {
                let mut target_vocab = issue
                    .project_root
                    .as_deref()
                    .map(projectsim::layout_widgets)
                    .unwrap_or_default();
                target_vocab.extend(projectsim::widgets_mentioned_in_text(&issue.body));
                target_vocab
                    .intersection(&candidate_widgets)
                    .cloned()
                    .collect()
            }
            None => Vec::new(),
        };

        let quality = quality::quality_score_with(&candidate, cfg.quality_saturation_words);

        let mut weight_sum = cfg.weights.quality;
        if code_sim.is_some() {
            weight_sum += cfg.weights.code;
        }
        if dep_sim.is_some() {
            weight_sum += cfg.weights.dependency;
        }
        if ui_sim.is_some() {
            weight_sum += cfg.weights.ui;
        }

        details.insert(
            candidate.url.clone(),
            ExplainDetail {
                code,
                dependency_intersection,
                target_dependency_count: target_deps.len(),
                candidate_dependency_count: candidate_deps.len(),
                widget_intersection,
                quality: quality.clone(),
                applicable_weight_sum: weight_sum,
            },
        );
        scored.push(ScoredCandidate {
            candidate,
            code_sim,
            dep_sim,
            ui_sim,
            quality: quality.score,
        });
    }

    let recommendations = rank::rerank(scored, &cfg.weights);
    Ok(RunReport {
        query: query.rendered(),
        backend: cfg.backend.identity(),
        recommendations,
        details,
        fetch_failures,
    })
}

/// The `dep_sim` applicability gate, re-exported for callers that only have
/// sets.
pub fn dependency_applicability(
    target: &BTreeSet<DependencyCoordinate>,
    candidate: &BTreeSet<DependencyCoordinate>,
) -> Applicability {
    projectsim::dependency_similarity(target, candidate)
}
