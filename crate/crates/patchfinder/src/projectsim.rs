//! Dependency similarity from Maven/Gradle manifests and UI similarity for
//! Android projects.

use std::collections::BTreeSet;
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use walkdir::WalkDir;

use crate::search::{Patch, TargetIssue};

/// (group, artifact) identity of a declared build dependency. Versions are
/// excluded: depending on different versions of one library still counts as
/// using the same library.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DependencyCoordinate {
    pub group: String,
    pub artifact: String,
}

impl DependencyCoordinate {
    pub fn new(group: &str, artifact: &str) -> DependencyCoordinate {
        DependencyCoordinate {
            group: group.to_string(),
            artifact: artifact.to_string(),
        }
    }
}

/// Set of normalized widget class simple names found in layout resources
/// and, for the target side, mentioned in the open issue's text.
pub type UiVocabulary = BTreeSet<String>;

/// A similarity signal that may not apply to a given target/candidate pair.
#[derive(Copy, Clone, Debug, PartialEq)]
pub enum Applicability {
    Score(f64),
    NotApplicable,
}

impl Applicability {
    pub fn score(&self) -> Option<f64> {
        match self {
            Applicability::Score(s) => Some(*s),
            Applicability::NotApplicable => None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("malformed manifest XML: {0}")]
    ManifestParse(String),
}

/// Extract dependency coordinates from a `pom.xml`. `${...}` placeholders
/// in group/artifact are resolved from the same file's `<properties>` (and
/// `project.groupId`/`project.artifactId`) when possible, else kept
/// verbatim.
pub fn parse_maven_deps(pom_content: &str) -> Result<BTreeSet<DependencyCoordinate>, ManifestError> {
    let doc = roxmltree::Document::parse(pom_content)
        .map_err(|e| ManifestError::ManifestParse(e.to_string()))?;
    let root = doc.root_element();

    let text_of = |node: roxmltree::Node, tag: &str| -> Option<String> {
        node.children()
            .find(|c| c.has_tag_name(tag))
            .and_then(|c| c.text())
            .map(|t| t.trim().to_string())
    };

    let mut props: Vec<(String, String)> = Vec::new();
    if let Some(section) = root.children().find(|c| c.has_tag_name("properties")) {
        for p in section.children().filter(|c| c.is_element()) {
            if let Some(v) = p.text() {
                props.push((p.tag_name().name().to_string(), v.trim().to_string()));
            }
        }
    }
    if let Some(gid) = text_of(root, "groupId") {
        props.push(("project.groupId".to_string(), gid));
    }
    if let Some(aid) = text_of(root, "artifactId") {
        props.push(("project.artifactId".to_string(), aid));
    }

    let resolve = |value: &str| -> String {
        let mut out = value.to_string();
        for (key, val) in &props {
            out = out.replace(&format!("${{{}}}", key), val);
        }
        out
    };

    let mut deps = BTreeSet::new();
    for node in root.descendants().filter(|n| n.has_tag_name("dependency")) {
        let (Some(group), Some(artifact)) = (text_of(node, "groupId"), text_of(node, "artifactId"))
        else {
            continue;
        };
        let group = resolve(&group);
        let artifact = resolve(&artifact);
        if !group.is_empty() && !artifact.is_empty() {
            deps.insert(DependencyCoordinate { group, artifact });
        }
    }
    Ok(deps)
}

fn gradle_dep_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        // implementation "g:a:v", api('g:a:v'), testImplementation("g:a:v") ...
        Regex::new(
            r#"(?m)^\s*(?:implementation|api|compile|compileOnly|runtimeOnly|testImplementation|testCompile|androidTestImplementation)[ \t]*\(?[ \t]*["']([^:"'\s]+):([^:"'\s]+):[^"']+["'][ \t]*\)?"#,
        )
        .expect("gradle regex")
    })
}

/// Pattern-extract coordinates from a Groovy or Kotlin DSL build script.
/// No script evaluation; lines outside the pattern are ignored.
pub fn parse_gradle_deps(build_script: &str) -> BTreeSet<DependencyCoordinate> {
    gradle_dep_re()
        .captures_iter(build_script)
        .map(|c| DependencyCoordinate::new(&c[1], &c[2]))
        .collect()
}

/// All dependency coordinates declared by manifests under `root`
/// (`pom.xml`, `build.gradle`, `build.gradle.kts`). Malformed Maven
/// manifests are skipped with a warning on stderr.
pub fn project_dependencies(root: &Path) -> BTreeSet<DependencyCoordinate> {
    let mut deps = BTreeSet::new();
    for entry in WalkDir::new(root).into_iter().filter_map(Result::ok) {
        if !entry.file_type().is_file() {
            continue;
        }
        let name = entry.file_name().to_string_lossy();
        let Ok(content) = std::fs::read_to_string(entry.path()) else {
            continue;
        };
        if name == "pom.xml" {
            match parse_maven_deps(&content) {
                Ok(found) => deps.extend(found),
                Err(e) => eprintln!("warning: skipping {}: {}", entry.path().display(), e),
            }
        } else if name == "build.gradle" || name == "build.gradle.kts" {
            deps.extend(parse_gradle_deps(&content));
        }
    }
    deps
}

fn jaccard<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

/// Jaccard similarity over coordinate sets. Not applicable when the target
/// declares no dependencies (the signal is skipped rather than scored);
/// an empty candidate set against a non-empty target scores 0.0.
pub fn dependency_similarity(
    target_deps: &BTreeSet<DependencyCoordinate>,
    candidate_deps: &BTreeSet<DependencyCoordinate>,
) -> Applicability {
    if target_deps.is_empty() {
        return Applicability::NotApplicable;
    }
    Applicability::Score(jaccard(target_deps, candidate_deps))
}

/// Common Android widget simple names recognized in free text.
const KNOWN_WIDGETS: &[&str] = &[
    "Button", "ImageButton", "TextView", "EditText", "ImageView", "CheckBox", "RadioButton",
    "RadioGroup", "Switch", "SeekBar", "ProgressBar", "Spinner", "ListView", "GridView",
    "RecyclerView", "ScrollView", "WebView", "VideoView", "ViewPager", "Toolbar", "CardView",
    "FloatingActionButton", "NavigationView", "TabLayout", "LinearLayout", "RelativeLayout",
    "FrameLayout", "ConstraintLayout", "CoordinatorLayout", "DrawerLayout", "Fragment",
    "BottomNavigationView", "SearchView", "Snackbar", "AlertDialog", "DatePicker", "TimePicker",
    "NumberPicker", "RatingBar", "Chip", "ChipGroup", "TextInputLayout", "ViewPager2",
];

fn normalize_widget(tag: &str) -> String {
    // vendor-prefixed tags like android.widget.Button keep the simple name
    tag.rsplit('.').next().unwrap_or(tag).to_lowercase()
}

fn widgets_from_layout_xml(content: &str) -> UiVocabulary {
    let mut out = UiVocabulary::new();
    if let Ok(doc) = roxmltree::Document::parse(content) {
        for node in doc.descendants().filter(|n| n.is_element()) {
            out.insert(normalize_widget(node.tag_name().name()));
        }
    }
    out
}

/// Widget vocabulary from `res/layout*/ *.xml` files under `root`.
/// Unreadable or malformed layout files are skipped.
pub fn layout_widgets(root: &Path) -> UiVocabulary {
    let mut out = UiVocabulary::new();
    for entry in WalkDir::new(root).into_iter().filter_map(Result::ok) {
        if !entry.file_type().is_file() {
            continue;
        }
        let path = entry.path();
        if path.extension().is_none_or(|x| x != "xml") {
            continue;
        }
        let in_layout_dir = path
            .parent()
            .and_then(|p| p.file_name())
            .map(|d| d.to_string_lossy().starts_with("layout"))
            .unwrap_or(false);
        if !in_layout_dir {
            continue;
        }
        match std::fs::read_to_string(path) {
            Ok(content) => out.extend(widgets_from_layout_xml(&content)),
            Err(e) => eprintln!("warning: unreadable layout {}: {}", path.display(), e),
        }
    }
    out
}

/// Widget names literally mentioned in free text, matched against the known
/// widget list case-insensitively.
pub fn widgets_mentioned_in_text(text: &str) -> UiVocabulary {
    let lower = text.to_lowercase();
    KNOWN_WIDGETS
        .iter()
        .filter(|w| {
            let needle = w.to_lowercase();
            lower
                .match_indices(&needle)
                .any(|(idx, m)| {
                    let before = lower[..idx].chars().next_back();
                    let after = lower[idx + m.len()..].chars().next();
                    !before.is_some_and(char::is_alphanumeric)
                        && !after.is_some_and(char::is_alphanumeric)
                })
        })
        .map(|w| w.to_lowercase())
        .collect()
}

/// Widget vocabulary of a candidate's patch: layout XML post-images.
pub fn patch_widgets(patch: &Patch) -> UiVocabulary {
    let mut out = UiVocabulary::new();
    for f in patch.xml_files() {
        out.extend(widgets_from_layout_xml(&f.content));
    }
    out
}

/// UI similarity: Jaccard over widget vocabularies. The target side is its
/// layout widgets plus widgets mentioned in the open issue's body/comments.
/// Not applicable when the target is not Android or either vocabulary is
/// empty.
pub fn ui_similarity(target: &TargetIssue, candidate_widgets: &UiVocabulary) -> Applicability {
    if !target.is_android {
        return Applicability::NotApplicable;
    }
    let mut target_vocab = target
        .project_root
        .as_deref()
        .map(layout_widgets)
        .unwrap_or_default();
    target_vocab.extend(widgets_mentioned_in_text(&target.body));
    for c in &target.comments {
        target_vocab.extend(widgets_mentioned_in_text(c));
    }
    if target_vocab.is_empty() || candidate_widgets.is_empty() {
        return Applicability::NotApplicable;
    }
    Applicability::Score(jaccard(&target_vocab, candidate_widgets))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maven_extracts_coordinates() {
        let pom = r#"<project>
  <groupId>org.example</groupId>
  <artifactId>app</artifactId>
  <dependencies>
    <dependency><groupId>junit</groupId><artifactId>junit</artifactId><version>4.13</version></dependency>
    <dependency><groupId>com.google.guava</groupId><artifactId>guava</artifactId></dependency>
  </dependencies>
</project>"#;
        let deps = parse_maven_deps(pom).unwrap();
        assert_eq!(deps.len(), 2);
        assert!(deps.contains(&DependencyCoordinate::new("junit", "junit")));
        assert!(deps.contains(&DependencyCoordinate::new("com.google.guava", "guava")));
    }

    #[test]
    fn maven_empty_dependencies() {
        let deps = parse_maven_deps("<project><dependencies/></project>").unwrap();
        assert!(deps.is_empty());
    }

    #[test]
    fn maven_resolves_property_placeholders() {
        let pom = r#"<project>
  <properties><groupId>org.x</groupId></properties>
  <groupId>org.x</groupId>
  <dependencies>
    <dependency><groupId>${project.groupId}</groupId><artifactId>core</artifactId></dependency>
    <dependency><groupId>${unknown.prop}</groupId><artifactId>misc</artifactId></dependency>
  </dependencies>
</project>"#;
        let deps = parse_maven_deps(pom).unwrap();
        assert!(deps.contains(&DependencyCoordinate::new("org.x", "core")));
        // unresolvable placeholder kept verbatim
        assert!(deps.contains(&DependencyCoordinate::new("${unknown.prop}", "misc")));
    }

    #[test]
    fn maven_rejects_malformed_xml() {
        assert!(parse_maven_deps("<project><dependencies>").is_err());
    }

    #[test]
    fn gradle_extracts_groovy_and_kotlin_forms() {
        let script = r#"
dependencies {
    implementation "com.squareup.okhttp3:okhttp:4.9.0"
    api('org.slf4j:slf4j-api:1.7.30')
    testImplementation("junit:junit:4.13.2")
    implementation project(":core")
    some unmatched line
}
"#;
        let deps = parse_gradle_deps(script);
        assert_eq!(deps.len(), 3);
        assert!(deps.contains(&DependencyCoordinate::new("com.squareup.okhttp3", "okhttp")));
        assert!(deps.contains(&DependencyCoordinate::new("org.slf4j", "slf4j-api")));
        assert!(deps.contains(&DependencyCoordinate::new("junit", "junit")));
    }

    fn set(pairs: &[(&str, &str)]) -> BTreeSet<DependencyCoordinate> {
        pairs
            .iter()
            .map(|(g, a)| DependencyCoordinate::new(g, a))
            .collect()
    }

    #[test]
    fn dependency_similarity_jaccard_and_skip_rule() {
        let both = set(&[("j", "j"), ("g", "g")]);
        assert_eq!(
            dependency_similarity(&both, &both),
            Applicability::Score(1.0)
        );
        assert_eq!(
            dependency_similarity(&set(&[]), &both),
            Applicability::NotApplicable
        );
        assert_eq!(
            dependency_similarity(&both, &set(&[("j", "j")])),
            Applicability::Score(0.5)
        );
        assert_eq!(
            dependency_similarity(&both, &set(&[])),
            Applicability::Score(0.0)
        );
    }

    #[test]
    fn dependency_similarity_is_symmetric() {
        let a = set(&[("a", "x"), ("b", "y"), ("c", "z")]);
        let b = set(&[("b", "y"), ("d", "w")]);
        assert_eq!(dependency_similarity(&a, &b), dependency_similarity(&b, &a));
    }

    fn android_target(dir: &Path, body: &str) -> TargetIssue {
        TargetIssue {
            url: "local:t".into(),
            title: "t".into(),
            body: body.into(),
            comments: vec![],
            project_root: Some(dir.to_path_buf()),
            is_android: true,
        }
    }

    fn write_layout(root: &Path, name: &str, content: &str) {
        let dir = root.join("res/layout");
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(dir.join(name), content).unwrap();
    }

    #[test]
    fn ui_similarity_jaccard_over_widgets() {
        let dir = tempfile::tempdir().unwrap();
        write_layout(
            dir.path(),
            "main.xml",
            "<LinearLayout><Button/><TextView/><RecyclerView/></LinearLayout>",
        );
        let target = android_target(dir.path(), "");
        let candidate: UiVocabulary = ["button", "textview", "linearlayout", "recyclerview"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(ui_similarity(&target, &candidate), Applicability::Score(1.0));

        let partial: UiVocabulary =
            ["button", "textview"].iter().map(|s| s.to_string()).collect();
        // target vocab has 4 entries, intersection 2, union 4
        assert_eq!(ui_similarity(&target, &partial), Applicability::Score(0.5));
    }

    #[test]
    fn ui_similarity_gates() {
        let dir = tempfile::tempdir().unwrap();
        let mut target = android_target(dir.path(), "");
        target.is_android = false;
        let vocab: UiVocabulary = ["button".to_string()].into_iter().collect();
        assert_eq!(ui_similarity(&target, &vocab), Applicability::NotApplicable);

        // android but no layouts and no mentions -> empty vocab -> n/a
        let target2 = android_target(dir.path(), "plain words only");
        assert_eq!(ui_similarity(&target2, &vocab), Applicability::NotApplicable);
    }

    #[test]
    fn issue_text_mentions_extend_target_vocab() {
        let dir = tempfile::tempdir().unwrap();
        let target = android_target(dir.path(), "The RecyclerView crashes when the Button is tapped");
        let vocab: UiVocabulary = ["recyclerview", "button"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        assert_eq!(ui_similarity(&target, &vocab), Applicability::Score(1.0));
        // substrings of other words do not count as mentions
        assert!(widgets_mentioned_in_text("buttonholes and chips").contains("chip") == false);
    }

    #[test]
    fn widget_names_are_prefix_insensitive() {
        let vocab = widgets_from_layout_xml(
            "<android.widget.LinearLayout><androidx.recyclerview.widget.RecyclerView/></android.widget.LinearLayout>",
        );
        assert!(vocab.contains("linearlayout"));
        assert!(vocab.contains("recyclerview"));
    }
}
