//! End-to-end orchestration: scan a webapp directory, analyze every page,
//! build the model and the dependency graph, and emit the artifacts.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use globset::{Glob, GlobSet, GlobSetBuilder};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use walkdir::WalkDir;

use crate::code_model::{
    add_method_call, discover_model, serialize_model, ClassId, KdmModel, ModelError, ModelFormat, MutationReport,
    RelationKind,
};
use crate::dependency_extractor::{extract_url_refs, HttpMethod, TagKind, UrlRef};
use crate::deployment_mapper::{
    build_lookup_table, java_package, java_primary_class, parse_web_xml, resolve_url, scan_webservlet_annotations,
    ResolvedTarget, ServletDecl, TableEntry, UrlMapping, UrlMappingTable,
};
use crate::diagnostics::{Diagnostic, Severity};
use crate::jsp_parser::{decode_source, parse_jsp, Span};
use crate::servlet_translator::{render_servlet_source, translate_page, ServletUnit, TranslationOptions};

const WEB_XML_PATH: &str = "/WEB-INF/web.xml";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("webapp root `{0}` does not exist or is not a directory")]
    RootNotFound(PathBuf),
    #[error("invalid glob `{glob}`: {message}")]
    InvalidGlob { glob: String, message: String },
    #[error("unknown encoding label `{0}`")]
    UnknownEncoding(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("cannot write `{path}`: {source}")]
    Write { path: PathBuf, source: io::Error },
}

#[derive(Debug, Clone, Default)]
pub struct ScanOptions {
    /// Globs over root-relative paths (`dir/page.jsp`). Empty means all.
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    /// Extra directories searched for `.java` files.
    pub source_roots: Vec<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JavaSource {
    pub path: PathBuf,
    /// Path relative to the root or source root it was found under.
    pub display: String,
}

#[derive(Debug, Clone, Default)]
pub struct WebAppInventory {
    pub root: PathBuf,
    /// Context-relative page paths, sorted.
    pub jsp_pages: Vec<String>,
    pub java_sources: Vec<JavaSource>,
    pub web_xml: Option<PathBuf>,
    pub diagnostics: Vec<Diagnostic>,
}

fn glob_set(globs: &[String]) -> Result<Option<GlobSet>, PipelineError> {
    if globs.is_empty() {
        return Ok(None);
    }
    let mut builder = GlobSetBuilder::new();
    for g in globs {
        let glob = Glob::new(g).map_err(|e| PipelineError::InvalidGlob {
            glob: g.clone(),
            message: e.to_string(),
        })?;
        builder.add(glob);
    }
    builder.build().map(Some).map_err(|e| PipelineError::InvalidGlob {
        glob: globs.join(","),
        message: e.to_string(),
    })
}

fn relative_display(base: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(base).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

fn has_extension(path: &Path, exts: &[&str]) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| exts.iter().any(|x| e.eq_ignore_ascii_case(x)))
}

/// Walks `base` in sorted order, returning files accepted by `keep` along
/// with their `/`-joined relative paths.
fn walk_files(
    base: &Path,
    diagnostics: &mut Vec<Diagnostic>,
    mut keep: impl FnMut(&Path, &str) -> bool,
) -> Vec<(PathBuf, String)> {
    let mut out = Vec::new();
    for entry in WalkDir::new(base).sort_by_file_name() {
        let entry = match entry {
            Ok(e) => e,
            Err(err) => {
                let at = err.path().map(|p| relative_display(base, p)).unwrap_or_default();
                diagnostics.push(Diagnostic::warning(
                    "unreadable-entry",
                    format!("skipped `{at}`: {err}"),
                ));
                continue;
            }
        };
        if !entry.file_type().is_file() {
            continue;
        }
        let rel = relative_display(base, entry.path());
        if keep(entry.path(), &rel) {
            out.push((entry.path().to_path_buf(), rel));
        }
    }
    out
}

/// Lists the pages, Java sources and deployment descriptor of a webapp.
/// Output is sorted, so it does not depend on directory iteration order.
pub fn scan_webapp(root: &Path, options: &ScanOptions) -> Result<WebAppInventory, PipelineError> {
    if !root.is_dir() {
        return Err(PipelineError::RootNotFound(root.to_path_buf()));
    }
    let include = glob_set(&options.include)?;
    let exclude = glob_set(&options.exclude)?;
    let selected = |rel: &str| {
        include.as_ref().is_none_or(|s| s.is_match(rel)) && !exclude.as_ref().is_some_and(|s| s.is_match(rel))
    };

    let mut inv = WebAppInventory {
        root: root.to_path_buf(),
        ..Default::default()
    };
    let mut java = Vec::new();
    for (path, rel) in walk_files(root, &mut inv.diagnostics, |p, rel| {
        has_extension(p, &["jsp", "jspf", "java"]) && selected(rel)
    }) {
        if has_extension(&path, &["java"]) {
            java.push(JavaSource { path, display: rel });
        } else {
            inv.jsp_pages.push(format!("/{rel}"));
        }
    }
    for source_root in &options.source_roots {
        if !source_root.is_dir() {
            inv.diagnostics.push(Diagnostic::warning(
                "missing-source-root",
                format!("source root `{}` is not a directory", source_root.display()),
            ));
            continue;
        }
        for (path, rel) in walk_files(source_root, &mut inv.diagnostics, |p, rel| {
            has_extension(p, &["java"]) && selected(rel)
        }) {
            java.push(JavaSource { path, display: rel });
        }
    }
    // A source root inside the webapp would list files twice.
    let mut seen = BTreeSet::new();
    java.retain(|j| seen.insert(fs::canonicalize(&j.path).unwrap_or_else(|_| j.path.clone())));
    java.sort_by(|a, b| (&a.display, &a.path).cmp(&(&b.display, &b.path)));
    inv.java_sources = java;
    inv.jsp_pages.sort();

    let web_xml = root.join("WEB-INF").join("web.xml");
    if web_xml.is_file() {
        inv.web_xml = Some(web_xml);
    }
    Ok(inv)
}

#[derive(Debug, Clone, Default)]
pub struct PipelineConfig {
    pub context_path: String,
    /// WHATWG label used to decode pages; UTF-8 when absent.
    pub encoding: Option<String>,
    pub translation: TranslationOptions,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "type", content = "id", rename_all = "lowercase")]
pub enum GraphNode {
    Page(String),
    Class(String),
    External(String),
}

impl GraphNode {
    pub fn id(&self) -> &str {
        match self {
            GraphNode::Page(s) | GraphNode::Class(s) | GraphNode::External(s) => s,
        }
    }

    pub fn is_internal(&self) -> bool {
        !matches!(self, GraphNode::External(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: GraphNode,
    pub to: GraphNode,
    pub kind: TagKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnresolvedRef {
    pub from: String,
    pub raw_url: String,
    pub kind: TagKind,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DependencyGraph {
    pub nodes: BTreeSet<GraphNode>,
    pub edges: Vec<GraphEdge>,
    pub unresolved: Vec<UnresolvedRef>,
}

impl DependencyGraph {
    /// Adds an edge and both endpoints. Returns false for a duplicate.
    pub fn add_edge(&mut self, edge: GraphEdge) -> bool {
        if self.edges.contains(&edge) {
            return false;
        }
        self.nodes.insert(edge.from.clone());
        self.nodes.insert(edge.to.clone());
        self.edges.push(edge);
        true
    }

    pub fn internal_edges(&self) -> impl Iterator<Item = &GraphEdge> {
        self.edges.iter().filter(|e| e.to.is_internal())
    }
}

fn dot_quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Graphviz rendering. Pages are plain nodes, classes are boxes, external
/// URLs are notes; each unresolved reference points at its own dashed
/// placeholder labeled with the reason.
pub fn emit_dot(graph: &DependencyGraph) -> String {
    let mut out = String::from("digraph deps {\n");
    for node in &graph.nodes {
        let attrs = match node {
            GraphNode::Page(_) => "",
            GraphNode::Class(_) => " [shape=box]",
            GraphNode::External(_) => " [shape=note]",
        };
        let _ = writeln!(out, "  {}{attrs};", dot_quote(node.id()));
    }
    for edge in &graph.edges {
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            dot_quote(edge.from.id()),
            dot_quote(edge.to.id()),
            dot_quote(edge.kind.as_str())
        );
    }
    for (i, u) in graph.unresolved.iter().enumerate() {
        let placeholder = dot_quote(&format!("unresolved#{i}"));
        let _ = writeln!(
            out,
            "  {placeholder} [label={}, shape=plaintext, style=dashed];",
            dot_quote(&format!("{} ({})", u.raw_url, u.reason))
        );
        let _ = writeln!(
            out,
            "  {} -> {placeholder} [label={}, style=dashed];",
            dot_quote(&u.from),
            dot_quote(u.kind.as_str())
        );
    }
    out.push_str("}\n");
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RefReport {
    pub tag_kind: TagKind,
    pub attribute: String,
    pub raw_url: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub http_method: Option<HttpMethod>,
    pub dynamic: bool,
    pub span: Span,
    pub target: ResolvedTarget,
    /// What the reference did to the model, for internal targets. Kept
    /// page-local (no global ids) so one page's entry never depends on
    /// another page.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelEffect>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelEffect {
    Added,
    Duplicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PageStatus {
    Ok,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PageReport {
    pub page: String,
    pub status: PageStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_name: Option<String>,
    pub statements: usize,
    pub declarations: usize,
    pub refs: Vec<RefReport>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub pages: usize,
    pub pages_failed: usize,
    pub java_sources: usize,
    pub statements: usize,
    pub declarations: usize,
    pub refs: usize,
    pub internal: usize,
    pub external: usize,
    pub unresolved: usize,
    pub relationships: usize,
    pub info: usize,
    pub warnings: usize,
    pub errors: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Deployment {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub web_xml: Option<String>,
    pub java_sources: Vec<String>,
    pub servlets: Vec<ServletDecl>,
    pub mappings: Vec<TableEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Report {
    pub context_path: String,
    pub counts: Counts,
    pub pages: Vec<PageReport>,
    pub deployment: Deployment,
    /// Findings not tied to a single page.
    pub diagnostics: Vec<Diagnostic>,
}

impl Report {
    pub fn all_diagnostics(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .chain(self.pages.iter().flat_map(|p| p.diagnostics.iter()))
    }

    pub fn has_problems(&self) -> bool {
        self.all_diagnostics().any(Diagnostic::is_problem)
    }

    fn tally(&mut self) {
        let (mut info, mut warnings, mut errors) = (0, 0, 0);
        for d in self.all_diagnostics() {
            match d.severity {
                Severity::Info => info += 1,
                Severity::Warning => warnings += 1,
                Severity::Error => errors += 1,
            }
        }
        self.counts.info = info;
        self.counts.warnings = warnings;
        self.counts.errors = errors;
    }
}

#[derive(Debug, Clone)]
pub struct PipelineOutput {
    pub model: KdmModel,
    pub graph: DependencyGraph,
    pub report: Report,
    pub units: Vec<ServletUnit>,
}

struct PageAnalysis {
    unit: ServletUnit,
    refs: Vec<UrlRef>,
}

fn analyze_page(root: &Path, page: &str, config: &PipelineConfig) -> (Option<PageAnalysis>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let path = root.join(page.trim_start_matches('/'));
    let bytes = match fs::read(&path) {
        Ok(b) => b,
        Err(err) => {
            diags.push(Diagnostic::error("unreadable-page", format!("cannot read page: {err}")).in_file(page));
            return (None, diags);
        }
    };
    let source = match decode_source(&bytes, config.encoding.as_deref()) {
        Ok((text, had_errors)) => {
            if had_errors {
                diags.push(
                    Diagnostic::warning("invalid-encoding", "page contains undecodable bytes; replaced").in_file(page),
                );
            }
            text
        }
        Err(err) => {
            diags.push(Diagnostic::error("decode-failed", err.to_string()).in_file(page));
            return (None, diags);
        }
    };
    let doc = match parse_jsp(&source, page) {
        Ok(doc) => doc,
        Err(err) => {
            diags.push(Diagnostic::error("parse-failed", err.to_string()).in_file(page));
            return (None, diags);
        }
    };
    let mut unit = translate_page(&doc, &config.translation);
    diags.append(&mut unit.diagnostics);
    let extraction = extract_url_refs(&doc);
    diags.extend(extraction.diagnostics);
    (
        Some(PageAnalysis {
            unit,
            refs: extraction.refs,
        }),
        diags,
    )
}

/// Reads `web.xml` and the `@WebServlet` annotations into declarations and
/// mappings.
fn collect_deployment(
    inventory: &WebAppInventory,
    diagnostics: &mut Vec<Diagnostic>,
) -> (Vec<ServletDecl>, Vec<UrlMapping>) {
    let mut decls = Vec::new();
    let mut mappings = Vec::new();
    if let Some(path) = &inventory.web_xml {
        match fs::read(path) {
            Ok(bytes) => match parse_web_xml(&bytes) {
                Ok(mut parsed) => {
                    decls.append(&mut parsed.decls);
                    mappings.append(&mut parsed.mappings);
                    diagnostics.append(&mut parsed.diagnostics);
                }
                Err(err) => diagnostics.push(Diagnostic::error("xml-syntax", err.to_string()).in_file(WEB_XML_PATH)),
            },
            Err(err) => diagnostics
                .push(Diagnostic::error("unreadable-entry", format!("cannot read: {err}")).in_file(WEB_XML_PATH)),
        }
    }

    let scans: Vec<_> = inventory
        .java_sources
        .par_iter()
        .map(|java| match fs::read(&java.path) {
            Ok(bytes) => {
                let source = String::from_utf8_lossy(&bytes);
                let stem = java.path.file_stem().and_then(|s| s.to_str()).unwrap_or("Unknown");
                let class = java_primary_class(&source).unwrap_or_else(|| stem.to_string());
                let qualified = match java_package(&source) {
                    Some(pkg) => format!("{pkg}.{class}"),
                    None => class,
                };
                let mut scan = scan_webservlet_annotations(&source, &qualified);
                for d in &mut scan.diagnostics {
                    d.file = Some(java.display.clone());
                }
                scan
            }
            Err(err) => crate::deployment_mapper::AnnotationScan {
                entries: Vec::new(),
                diagnostics: vec![Diagnostic::warning("unreadable-entry", format!("cannot read: {err}"))
                    .in_file(java.display.clone())],
            },
        })
        .collect();
    for scan in scans {
        diagnostics.extend(scan.diagnostics);
        for (pattern, decl) in scan.entries {
            mappings.push(UrlMapping {
                url_pattern: pattern,
                servlet_name: decl.servlet_name.clone(),
                source: decl.source,
            });
            if !decls.contains(&decl) {
                decls.push(decl);
            }
        }
    }
    (decls, mappings)
}

/// Runs the whole analysis. Pages are parsed, translated and scanned in
/// parallel; everything that mutates the model runs sequentially in page
/// order, so the result is identical for identical input.
pub fn run_pipeline(inventory: &WebAppInventory, config: &PipelineConfig) -> Result<PipelineOutput, PipelineError> {
    if let Some(label) = &config.encoding {
        if encoding_rs::Encoding::for_label(label.trim().as_bytes()).is_none() {
            return Err(PipelineError::UnknownEncoding(label.clone()));
        }
    }
    let analyses: Vec<_> = inventory
        .jsp_pages
        .par_iter()
        .map(|page| analyze_page(&inventory.root, page, config))
        .collect();

    let mut report = Report {
        diagnostics: inventory.diagnostics.clone(),
        ..Default::default()
    };
    let mut units = Vec::new();
    let mut page_refs = Vec::new();
    for (page, (analysis, diagnostics)) in inventory.jsp_pages.iter().zip(analyses) {
        let mut entry = PageReport {
            page: page.clone(),
            status: PageStatus::Failed,
            class_name: None,
            statements: 0,
            declarations: 0,
            refs: Vec::new(),
            diagnostics,
        };
        if let Some(a) = analysis {
            entry.status = PageStatus::Ok;
            entry.class_name = Some(a.unit.qualified_name());
            entry.statements = a.unit.service_body.len();
            entry.declarations = a.unit.declarations.len();
            units.push(a.unit);
            page_refs.push(a.refs);
        } else {
            page_refs.push(Vec::new());
        }
        report.pages.push(entry);
    }

    let mut model = discover_model(&units)?;
    let page_class: BTreeMap<String, ClassId> = model
        .class_units
        .iter()
        .filter_map(|c| c.source_page.clone().map(|p| (p, c.id)))
        .collect();

    let (decls, mappings) = collect_deployment(inventory, &mut report.diagnostics);
    let (table, table_diags) = build_lookup_table(&decls, &mappings, &config.context_path);
    report.diagnostics.extend(table_diags);

    let known_pages: BTreeSet<String> = inventory.jsp_pages.iter().cloned().collect();
    let mut graph = DependencyGraph::default();
    for page in page_class.keys() {
        graph.nodes.insert(GraphNode::Page(page.clone()));
    }
    for (entry, refs) in report.pages.iter_mut().zip(page_refs) {
        let Some(&caller) = page_class.get(&entry.page) else {
            continue;
        };
        for url_ref in refs {
            let resolution = resolve_url(&table, &url_ref, &entry.page, &known_pages);
            entry.diagnostics.extend(resolution.diagnostics);
            let mut target = resolution.target;
            let mut effect = None;
            let from = GraphNode::Page(entry.page.clone());
            let internal = match &target {
                ResolvedTarget::InternalPage { page_path } => match page_class.get(page_path) {
                    Some(&id) => Some((id, GraphNode::Page(page_path.clone()))),
                    None => {
                        let reason = if known_pages.contains(page_path) {
                            format!("target page {page_path} was not analyzed")
                        } else {
                            format!("target page {page_path} does not exist")
                        };
                        target = ResolvedTarget::Unresolved { reason };
                        None
                    }
                },
                ResolvedTarget::InternalServletClass { class_name } => {
                    let id = match model.class_by_qualified_name(class_name) {
                        Some(c) => c.id,
                        None => model.add_servlet_class(class_name)?,
                    };
                    let node = match model.class(id).and_then(|c| c.source_page.clone()) {
                        Some(p) => GraphNode::Page(p),
                        None => GraphNode::Class(class_name.clone()),
                    };
                    Some((id, node))
                }
                ResolvedTarget::External { url } => {
                    graph.add_edge(GraphEdge {
                        from: from.clone(),
                        to: GraphNode::External(url.clone()),
                        kind: url_ref.tag_kind,
                    });
                    None
                }
                ResolvedTarget::Unresolved { .. } => None,
            };
            if let Some((id, node)) = internal {
                let report = add_method_call(&mut model, caller, id, RelationKind::Tag(url_ref.tag_kind))?;
                effect = Some(match report {
                    MutationReport::Added(_) => ModelEffect::Added,
                    MutationReport::Duplicate(_) => ModelEffect::Duplicate,
                });
                graph.add_edge(GraphEdge {
                    from,
                    to: node,
                    kind: url_ref.tag_kind,
                });
            }
            if let ResolvedTarget::Unresolved { reason } = &target {
                graph.unresolved.push(UnresolvedRef {
                    from: entry.page.clone(),
                    raw_url: url_ref.raw_url.clone(),
                    kind: url_ref.tag_kind,
                    reason: reason.clone(),
                });
            }
            entry.refs.push(RefReport {
                tag_kind: url_ref.tag_kind,
                attribute: url_ref.attribute,
                raw_url: url_ref.raw_url,
                http_method: url_ref.http_method,
                dynamic: url_ref.dynamic,
                span: url_ref.span,
                target,
                model: effect,
            });
        }
    }

    report.context_path = table.context_path.clone();
    report.deployment = deployment_summary(inventory, &table);
    let counts = &mut report.counts;
    counts.pages = inventory.jsp_pages.len();
    counts.java_sources = inventory.java_sources.len();
    counts.relationships = model.relationships.len();
    for page in &report.pages {
        counts.pages_failed += usize::from(page.status == PageStatus::Failed);
        counts.statements += page.statements;
        counts.declarations += page.declarations;
        counts.refs += page.refs.len();
        for r in &page.refs {
            match r.target {
                ResolvedTarget::InternalPage { .. } | ResolvedTarget::InternalServletClass { .. } => {
                    counts.internal += 1
                }
                ResolvedTarget::External { .. } => counts.external += 1,
                ResolvedTarget::Unresolved { .. } => counts.unresolved += 1,
            }
        }
    }
    report.tally();
    Ok(PipelineOutput {
        model,
        graph,
        report,
        units,
    })
}

fn deployment_summary(inventory: &WebAppInventory, table: &UrlMappingTable) -> Deployment {
    Deployment {
        web_xml: inventory.web_xml.as_ref().map(|_| WEB_XML_PATH.to_string()),
        java_sources: inventory.java_sources.iter().map(|j| j.display.clone()).collect(),
        servlets: table.decls.clone(),
        mappings: table.entries.clone(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Xmi,
    Json,
    Dot,
}

impl OutputFormat {
    pub const ALL: [OutputFormat; 3] = [OutputFormat::Xmi, OutputFormat::Json, OutputFormat::Dot];

    pub fn file_name(self) -> &'static str {
        match self {
            OutputFormat::Xmi => "model.xmi",
            OutputFormat::Json => "model.json",
            OutputFormat::Dot => "deps.dot",
        }
    }
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "xmi" => Ok(OutputFormat::Xmi),
            "json" => Ok(OutputFormat::Json),
            "dot" => Ok(OutputFormat::Dot),
            other => Err(format!("unknown format `{other}` (expected xmi, json or dot)")),
        }
    }
}

pub fn render_report(report: &Report) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(report).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

fn write_file(path: PathBuf, bytes: &[u8]) -> Result<PathBuf, PipelineError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|source| PipelineError::Write {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    fs::write(&path, bytes).map_err(|source| PipelineError::Write {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Writes the selected artifacts plus `report.json` into `out_dir`.
pub fn write_outputs(
    out_dir: &Path,
    formats: &[OutputFormat],
    output: &PipelineOutput,
) -> Result<Vec<PathBuf>, PipelineError> {
    let mut written = Vec::new();
    let selected: BTreeSet<OutputFormat> = formats.iter().copied().collect();
    for format in selected {
        let bytes = match format {
            OutputFormat::Xmi => serialize_model(&output.model, ModelFormat::Xmi),
            OutputFormat::Json => serialize_model(&output.model, ModelFormat::Json),
            OutputFormat::Dot => emit_dot(&output.graph).into_bytes(),
        };
        written.push(write_file(out_dir.join(format.file_name()), &bytes)?);
    }
    written.push(write_file(out_dir.join("report.json"), &render_report(&output.report))?);
    Ok(written)
}

/// Writes each translated servlet as a `.java` file under `dir`, laid out
/// by package.
pub fn write_servlet_sources(dir: &Path, units: &[ServletUnit]) -> Result<Vec<PathBuf>, PipelineError> {
    units
        .iter()
        .map(|unit| {
            write_file(
                dir.join(unit.source_file_path()),
                render_servlet_source(unit).as_bytes(),
            )
        })
        .collect()
}
