//! Extraction and parsing of JVM crash stack traces embedded in free-text
//! issue bodies and comments.
//!
//! The grammar covers traces as printed by `Throwable.printStackTrace()`:
//! a header line naming an `Exception`/`Error` class with an optional
//! message, followed by `at pkg.Cls.method(File.java:NN)` frames,
//! `... N more` elisions, and `Caused by:` chains. Traces from other
//! runtimes do not match.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;

/// One `at ...` line of a stack trace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StackFrame {
    /// Dotted fully-qualified class name, e.g. `java.io.DataOutputStream`.
    pub class_path: String,
    /// Method identifier, e.g. `writeUTF` or `<init>`.
    pub method: String,
    /// Source file name; `None` for `Unknown Source` / `Native Method`.
    pub file: Option<String>,
    /// 1-based line number when present.
    pub line: Option<u32>,
}

/// A parsed exception block, possibly chained via `Caused by:`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExceptionInfo {
    /// Fully-qualified exception type, e.g. `java.io.UTFDataFormatException`.
    pub exception_class: String,
    /// Last dotted segment of `exception_class`.
    pub simple_name: String,
    /// Raw message text; empty when the header had none.
    pub message: String,
    /// Frames in source order, innermost call first.
    pub frames: Vec<StackFrame>,
    /// Nested `Caused by:` chain, if any.
    pub caused_by: Option<Box<ExceptionInfo>>,
}

impl ExceptionInfo {
    fn new(exception_class: String, message: String) -> Self {
        let simple_name = exception_class
            .rsplit('.')
            .next()
            .unwrap_or(&exception_class)
            .to_string();
        ExceptionInfo {
            exception_class,
            simple_name,
            message,
            frames: Vec::new(),
            caused_by: None,
        }
    }

    /// Deepest entry of the `Caused by:` chain (the root cause), or `self`
    /// when there is no chain.
    pub fn root_cause(&self) -> &ExceptionInfo {
        let mut cur = self;
        while let Some(cause) = cur.caused_by.as_deref() {
            cur = cause;
        }
        cur
    }

    /// Render back to canonical trace text. Re-extracting the rendered text
    /// yields a structurally equal value.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.render_into(&mut out, false);
        out
    }

    fn render_into(&self, out: &mut String, as_cause: bool) {
        if as_cause {
            out.push_str("Caused by: ");
        }
        out.push_str(&self.exception_class);
        if !self.message.is_empty() {
            out.push_str(": ");
            out.push_str(&self.message);
        }
        out.push('\n');
        for frame in &self.frames {
            out.push_str(&format!("\tat {}\n", frame));
        }
        if let Some(cause) = self.caused_by.as_deref() {
            cause.render_into(out, true);
        }
    }
}

impl fmt::Display for StackFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}(", self.class_path, self.method)?;
        match (&self.file, self.line) {
            (Some(file), Some(line)) => write!(f, "{}:{}", file, line)?,
            (Some(file), None) => write!(f, "{}", file)?,
            _ => write!(f, "Unknown Source")?,
        }
        write!(f, ")")
    }
}

fn header_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^\s*(?:Caused by:\s+)?([A-Za-z_$][A-Za-z0-9_$]*(?:\.[A-Za-z_$][A-Za-z0-9_$]*)+(?:Exception|Error))(?::\s?(.*))?$",
        )
        .expect("header regex")
    })
}

fn frame_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^\s*at\s+([A-Za-z_$][A-Za-z0-9_$]*(?:\.[A-Za-z_$][A-Za-z0-9_$<>]*)+)\(([^()]*)\)\s*$",
        )
        .expect("frame regex")
    })
}

fn elision_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^\s*\.\.\.\s+\d+\s+more\s*$").expect("elision regex"))
}

fn is_caused_by(line: &str) -> bool {
    line.trim_start().starts_with("Caused by:")
}

/// Parse one `at ...` line into a [`StackFrame`]; `None` for lines outside
/// the grammar.
pub fn parse_frame(line: &str) -> Option<StackFrame> {
    let caps = frame_re().captures(line)?;
    let qualified = caps.get(1)?.as_str();
    let location = caps.get(2)?.as_str();
    // method is the last dotted segment, class path everything before it
    let (class_path, method) = qualified.rsplit_once('.')?;
    if class_path.is_empty() || method.is_empty() {
        return None;
    }
    let (file, line_no) = match location.rsplit_once(':') {
        Some((file, num)) => match num.parse::<u32>() {
            Ok(n) if n >= 1 => (Some(file.to_string()), Some(n)),
            _ => (Some(location.to_string()), None),
        },
        None => {
            if location == "Unknown Source" || location == "Native Method" {
                (None, None)
            } else if location.is_empty() {
                (None, None)
            } else {
                (Some(location.to_string()), None)
            }
        }
    };
    Some(StackFrame {
        class_path: class_path.to_string(),
        method: method.to_string(),
        file,
        line: line_no,
    })
}

/// Drop markdown fence delimiter lines so trace lines inside fenced code
/// blocks remain eligible for matching.
fn strip_fences(text: &str) -> Vec<&str> {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("```"))
        .collect()
}

/// Extract every maximal trace block found in `text`, in textual order.
/// Absence of traces is a valid empty result.
pub fn extract_traces(text: &str) -> Vec<ExceptionInfo> {
    let lines = strip_fences(text);
    let mut traces: Vec<ExceptionInfo> = Vec::new();
    // Chain under construction, outermost first.
    let mut chain: Vec<ExceptionInfo> = Vec::new();

    fn flush(chain: &mut Vec<ExceptionInfo>, traces: &mut Vec<ExceptionInfo>) {
        if chain.is_empty() {
            return;
        }
        let mut nested: Option<Box<ExceptionInfo>> = None;
        while let Some(mut info) = chain.pop() {
            info.caused_by = nested.take();
            nested = Some(Box::new(info));
        }
        traces.push(*nested.expect("non-empty chain"));
    }

    for line in lines {
        if let Some(caps) = header_re().captures(line) {
            let class = caps.get(1).expect("class group").as_str().to_string();
            let message = caps
                .get(2)
                .map(|m| m.as_str().trim_end().to_string())
                .unwrap_or_default();
            if is_caused_by(line) && !chain.is_empty() {
                chain.push(ExceptionInfo::new(class, message));
            } else {
                flush(&mut chain, &mut traces);
                chain.push(ExceptionInfo::new(class, message));
            }
        } else if let Some(frame) = parse_frame(line) {
            if let Some(current) = chain.last_mut() {
                current.frames.push(frame);
            }
            // frame lines without a preceding header are ignored
        } else if elision_re().is_match(line) {
            // `... N more` continues the current block
        } else if !chain.is_empty() && !line.trim().is_empty() {
            // any other non-blank line terminates the current block
            flush(&mut chain, &mut traces);
        }
    }
    flush(&mut chain, &mut traces);
    traces
}

/// Errors from this module.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TraceError {
    #[error("no stack trace found in issue text")]
    NoTraceFound,
}

/// The trace to query on: first trace in textual order, descending its
/// `Caused by:` chain to the root cause.
pub fn primary_exception(traces: &[ExceptionInfo]) -> Result<&ExceptionInfo, TraceError> {
    traces
        .first()
        .map(|t| t.root_cause())
        .ok_or(TraceError::NoTraceFound)
}
