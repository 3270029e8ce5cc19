//! Deployment metadata: `web.xml` servlet declarations and mappings,
//! `@WebServlet` annotations, the URL lookup table, and URL resolution with
//! servlet-container matching precedence (exact, longest path prefix,
//! extension, default).

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dependency_extractor::{TagKind, UrlRef};
use crate::diagnostics::Diagnostic;
use crate::paths::{normalize, normalize_path, resolve_against};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeclSource {
    WebXml,
    Annotation,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ServletTarget {
    ServletClass(String),
    JspFile(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServletDecl {
    pub servlet_name: String,
    pub target: ServletTarget,
    pub source: DeclSource,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrlMapping {
    pub url_pattern: String,
    pub servlet_name: String,
    pub source: DeclSource,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WebXml {
    pub decls: Vec<ServletDecl>,
    pub mappings: Vec<UrlMapping>,
    pub diagnostics: Vec<Diagnostic>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapperError {
    #[error("web.xml is not well-formed: {0}")]
    XmlSyntax(String),
}

fn child_text<'a>(node: roxmltree::Node<'a, 'a>, name: &str) -> Option<&'a str> {
    node.children()
        .find(|c| c.is_element() && c.tag_name().name() == name)
        .and_then(|c| c.text())
        .map(str::trim)
        .filter(|t| !t.is_empty())
}

fn decode_xml(content: &[u8]) -> String {
    let content = content.strip_prefix(b"\xEF\xBB\xBF").unwrap_or(content);
    match std::str::from_utf8(content) {
        Ok(s) => s.to_string(),
        Err(_) => encoding_rs::WINDOWS_1252.decode(content).0.into_owned(),
    }
}

/// Reads the servlet declarations and URL mappings from a deployment
/// descriptor. Element matching uses local names only, so any namespace
/// (or none) works.
pub fn parse_web_xml(content: &[u8]) -> Result<WebXml, MapperError> {
    let text = decode_xml(content);
    let options = roxmltree::ParsingOptions {
        allow_dtd: true,
        ..Default::default()
    };
    let doc =
        roxmltree::Document::parse_with_options(&text, options).map_err(|e| MapperError::XmlSyntax(e.to_string()))?;
    let mut out = WebXml::default();
    let diag = |code: &str, msg: String| Diagnostic::warning(code, msg).in_file("/WEB-INF/web.xml");

    for node in doc.root_element().children().filter(|n| n.is_element()) {
        match node.tag_name().name() {
            "servlet" => {
                let Some(name) = child_text(node, "servlet-name") else {
                    out.diagnostics.push(diag(
                        "missing-servlet-name",
                        "<servlet> without <servlet-name> skipped".into(),
                    ));
                    continue;
                };
                let class = child_text(node, "servlet-class");
                let jsp = child_text(node, "jsp-file");
                let target = match (class, jsp) {
                    (Some(c), None) => ServletTarget::ServletClass(c.to_string()),
                    (None, Some(j)) => ServletTarget::JspFile(normalize_path(j)),
                    (Some(_), Some(_)) => {
                        out.diagnostics.push(diag(
                            "ambiguous-servlet",
                            format!("servlet `{name}` declares both servlet-class and jsp-file; skipped"),
                        ));
                        continue;
                    }
                    (None, None) => {
                        out.diagnostics.push(diag(
                            "servlet-without-target",
                            format!("servlet `{name}` has neither servlet-class nor jsp-file; skipped"),
                        ));
                        continue;
                    }
                };
                out.decls.push(ServletDecl {
                    servlet_name: name.to_string(),
                    target,
                    source: DeclSource::WebXml,
                });
            }
            "servlet-mapping" => {
                let Some(name) = child_text(node, "servlet-name") else {
                    out.diagnostics.push(diag(
                        "missing-servlet-name",
                        "<servlet-mapping> without <servlet-name> skipped".into(),
                    ));
                    continue;
                };
                let patterns = node
                    .children()
                    .filter(|c| c.is_element() && c.tag_name().name() == "url-pattern");
                for pattern in patterns {
                    out.mappings.push(UrlMapping {
                        url_pattern: pattern.text().unwrap_or("").trim().to_string(),
                        servlet_name: name.to_string(),
                        source: DeclSource::WebXml,
                    });
                }
            }
            _ => {}
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Str(String),
    Punct(char),
    Other,
}

/// Minimal Java lexer: identifiers, string literals, punctuation. Comments,
/// char literals and numbers are skipped or collapsed.
fn lex_java(src: &str) -> Vec<Tok> {
    let chars: Vec<char> = src.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            i += 2;
            while i < chars.len() && !(chars[i] == '*' && chars.get(i + 1) == Some(&'/')) {
                i += 1;
            }
            i += 2;
        } else if c == '"' {
            let text_block = chars.get(i + 1) == Some(&'"') && chars.get(i + 2) == Some(&'"');
            let mut s = String::new();
            if text_block {
                i += 3;
                while i < chars.len()
                    && !(chars[i] == '"' && chars.get(i + 1) == Some(&'"') && chars.get(i + 2) == Some(&'"'))
                {
                    s.push(chars[i]);
                    i += 1;
                }
                i += 3;
                toks.push(Tok::Str(s.trim().to_string()));
                continue;
            }
            i += 1;
            while i < chars.len() && chars[i] != '"' && chars[i] != '\n' {
                if chars[i] == '\\' && i + 1 < chars.len() {
                    i += 1;
                    s.push(match chars[i] {
                        'n' => '\n',
                        't' => '\t',
                        'r' => '\r',
                        other => other,
                    });
                } else {
                    s.push(chars[i]);
                }
                i += 1;
            }
            i += 1;
            toks.push(Tok::Str(s));
        } else if c == '\'' {
            i += 1;
            while i < chars.len() && chars[i] != '\'' && chars[i] != '\n' {
                if chars[i] == '\\' {
                    i += 1;
                }
                i += 1;
            }
            i += 1;
            toks.push(Tok::Other);
        } else if c.is_alphabetic() || c == '_' || c == '$' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '$') {
                i += 1;
            }
            toks.push(Tok::Ident(chars[start..i].iter().collect()));
        } else if c.is_ascii_digit() {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '.' || chars[i] == '_') {
                i += 1;
            }
            toks.push(Tok::Other);
        } else {
            toks.push(Tok::Punct(c));
            i += 1;
        }
    }
    toks
}

/// Reads a dotted name starting at `i`; returns the name and the index
/// after it.
fn dotted_name(toks: &[Tok], mut i: usize) -> Option<(String, usize)> {
    let Tok::Ident(first) = toks.get(i)? else { return None };
    let mut name = first.clone();
    i += 1;
    while toks.get(i) == Some(&Tok::Punct('.')) {
        match toks.get(i + 1) {
            Some(Tok::Ident(part)) => {
                name.push('.');
                name.push_str(part);
                i += 2;
            }
            _ => break,
        }
    }
    Some((name, i))
}

/// Package declared by a Java source file, if any.
pub fn java_package(source: &str) -> Option<String> {
    let toks = lex_java(source);
    let pos = toks.iter().position(|t| *t == Tok::Ident("package".into()))?;
    dotted_name(&toks, pos + 1).map(|(name, _)| name)
}

/// Name of the first class declared after the first `@WebServlet`, or after
/// the start of the file when there is none.
pub fn java_primary_class(source: &str) -> Option<String> {
    let toks = lex_java(source);
    let from = toks
        .windows(2)
        .position(|w| w[0] == Tok::Punct('@') && matches!(&w[1], Tok::Ident(n) if n == "WebServlet"))
        .unwrap_or(0);
    toks[from..].windows(2).find_map(|w| match (&w[0], &w[1]) {
        (Tok::Ident(kw), Tok::Ident(name)) if kw == "class" => Some(name.clone()),
        _ => None,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnnotationScan {
    pub entries: Vec<(String, ServletDecl)>,
    pub diagnostics: Vec<Diagnostic>,
}

enum ElementValue {
    Strings(Vec<String>),
    Unsupported,
}

/// Parses an annotation element value at `i`: a string, a `{...}` array of
/// strings, or anything else (skipped up to the next top-level `,` or `)`).
fn element_value(toks: &[Tok], mut i: usize) -> (ElementValue, usize) {
    match toks.get(i) {
        Some(Tok::Str(s)) if !matches!(toks.get(i + 1), Some(Tok::Punct('+'))) => {
            (ElementValue::Strings(vec![s.clone()]), i + 1)
        }
        Some(Tok::Punct('{')) => {
            i += 1;
            let mut out = Vec::new();
            let mut ok = true;
            while let Some(tok) = toks.get(i) {
                match tok {
                    Tok::Punct('}') => {
                        i += 1;
                        break;
                    }
                    Tok::Punct(',') => {}
                    Tok::Str(s) => out.push(s.clone()),
                    _ => ok = false,
                }
                i += 1;
            }
            (
                if ok {
                    ElementValue::Strings(out)
                } else {
                    ElementValue::Unsupported
                },
                i,
            )
        }
        _ => {
            let mut depth = 0usize;
            while let Some(tok) = toks.get(i) {
                match tok {
                    Tok::Punct('(') | Tok::Punct('{') => depth += 1,
                    Tok::Punct(')') | Tok::Punct('}') if depth == 0 => break,
                    Tok::Punct(')') | Tok::Punct('}') => depth -= 1,
                    Tok::Punct(',') if depth == 0 => break,
                    _ => {}
                }
                i += 1;
            }
            (ElementValue::Unsupported, i)
        }
    }
}

/// Lexical scan for `@WebServlet` annotations. Supports the single-value
/// form, `value = ...` and `urlPatterns = ...`, each either a string or an
/// array of strings. An explicit `name` becomes the servlet name; otherwise
/// the qualified class name is used, as containers do.
pub fn scan_webservlet_annotations(java_source: &str, class_qualified_name: &str) -> AnnotationScan {
    let toks = lex_java(java_source);
    let mut out = AnnotationScan::default();
    let diag =
        |msg: String| Diagnostic::warning("webservlet-annotation", msg).in_file(class_qualified_name.to_string());
    let mut i = 0;
    while i < toks.len() {
        if toks[i] != Tok::Punct('@') {
            i += 1;
            continue;
        }
        let Some((name, next)) = dotted_name(&toks, i + 1) else {
            i += 1;
            continue;
        };
        i = next;
        if name != "WebServlet" && !name.ends_with(".WebServlet") {
            continue;
        }
        if toks.get(i) != Some(&Tok::Punct('(')) {
            out.diagnostics.push(diag("@WebServlet without URL patterns".into()));
            continue;
        }
        i += 1;
        let mut patterns: Vec<String> = Vec::new();
        let mut servlet_name: Option<String> = None;
        let mut unsupported = false;
        let mut saw_value = false;
        let mut saw_url_patterns = false;

        let single = matches!(toks.get(i), Some(Tok::Str(_)) | Some(Tok::Punct('{')));
        if single {
            let (value, next) = element_value(&toks, i);
            i = next;
            match value {
                ElementValue::Strings(s) => patterns.extend(s),
                ElementValue::Unsupported => unsupported = true,
            }
        } else {
            while let Some(tok) = toks.get(i) {
                match tok {
                    Tok::Punct(')') => break,
                    Tok::Punct(',') => i += 1,
                    Tok::Ident(key) if toks.get(i + 1) == Some(&Tok::Punct('=')) => {
                        let key = key.clone();
                        let (value, next) = element_value(&toks, i + 2);
                        i = next;
                        match (key.as_str(), value) {
                            ("value", ElementValue::Strings(s)) => {
                                saw_value = true;
                                patterns.extend(s)
                            }
                            ("urlPatterns", ElementValue::Strings(s)) => {
                                saw_url_patterns = true;
                                patterns.extend(s)
                            }
                            ("name", ElementValue::Strings(s)) => servlet_name = s.into_iter().next(),
                            ("value" | "urlPatterns" | "name", ElementValue::Unsupported) => unsupported = true,
                            _ => {}
                        }
                    }
                    _ => {
                        unsupported = true;
                        i += 1;
                    }
                }
            }
        }
        // Skip to the closing parenthesis of the annotation.
        let mut depth = 0usize;
        while let Some(tok) = toks.get(i) {
            i += 1;
            match tok {
                Tok::Punct('(') => depth += 1,
                Tok::Punct(')') if depth == 0 => break,
                Tok::Punct(')') => depth -= 1,
                _ => {}
            }
        }
        if unsupported {
            out.diagnostics.push(diag(
                "@WebServlet element value is not a string literal; ignored".into(),
            ));
        }
        if saw_value && saw_url_patterns {
            out.diagnostics
                .push(diag("@WebServlet sets both value and urlPatterns; using both".into()));
        }
        if patterns.is_empty() && !unsupported {
            out.diagnostics.push(diag("@WebServlet without URL patterns".into()));
        }
        let decl = ServletDecl {
            servlet_name: servlet_name.unwrap_or_else(|| class_qualified_name.to_string()),
            target: ServletTarget::ServletClass(class_qualified_name.to_string()),
            source: DeclSource::Annotation,
        };
        for pattern in patterns {
            out.entries.push((pattern, decl.clone()));
        }
    }
    out
}

/// The four pattern shapes containers accept.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum UrlPattern {
    /// Matches one path. The empty pattern maps the context root, `/`.
    Exact(String),
    /// `/x/*`; stored without the trailing `/*`, so `/*` is `Prefix("")`.
    Prefix(String),
    /// `*.ext`; stored without `*.`.
    Extension(String),
    /// `/`
    Default,
}

impl UrlPattern {
    pub fn parse(pattern: &str) -> Option<UrlPattern> {
        if pattern.is_empty() {
            return Some(UrlPattern::Exact("/".into()));
        }
        if pattern == "/" {
            return Some(UrlPattern::Default);
        }
        if let Some(ext) = pattern.strip_prefix("*.") {
            if !ext.is_empty() && !ext.contains(['/', '*']) {
                return Some(UrlPattern::Extension(ext.to_string()));
            }
            return None;
        }
        if !pattern.starts_with('/') {
            return None;
        }
        if let Some(prefix) = pattern.strip_suffix("/*") {
            if prefix.contains('*') {
                return None;
            }
            return Some(UrlPattern::Prefix(prefix.to_string()));
        }
        if pattern.contains('*') {
            return None;
        }
        Some(UrlPattern::Exact(pattern.to_string()))
    }

    /// Ranking key: lower tier wins; within the prefix tier, longer wins.
    pub fn tier(&self) -> u8 {
        match self {
            UrlPattern::Exact(_) => 0,
            UrlPattern::Prefix(_) => 1,
            UrlPattern::Extension(_) => 2,
            UrlPattern::Default => 3,
        }
    }

    pub fn matches(&self, path: &str) -> bool {
        match self {
            UrlPattern::Exact(p) => p == path,
            UrlPattern::Prefix(p) => path == p || (path.starts_with(p.as_str()) && path[p.len()..].starts_with('/')),
            UrlPattern::Extension(ext) => {
                let last = path.rsplit('/').next().unwrap_or(path);
                last.rfind('.').is_some_and(|dot| &last[dot + 1..] == ext)
            }
            UrlPattern::Default => true,
        }
    }

    fn prefix_len(&self) -> usize {
        match self {
            UrlPattern::Prefix(p) => p.len(),
            _ => 0,
        }
    }
}

impl fmt::Display for UrlPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UrlPattern::Exact(p) => f.write_str(p),
            UrlPattern::Prefix(p) => write!(f, "{p}/*"),
            UrlPattern::Extension(e) => write!(f, "*.{e}"),
            UrlPattern::Default => f.write_str("/"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableEntry {
    pub url_pattern: String,
    pub pattern: UrlPattern,
    pub servlet_name: String,
    pub source: DeclSource,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrlMappingTable {
    pub entries: Vec<TableEntry>,
    pub decls: Vec<ServletDecl>,
    /// `""` for the root context, otherwise `/name` without a trailing `/`.
    pub context_path: String,
}

impl UrlMappingTable {
    pub fn decl(&self, servlet_name: &str) -> Option<&ServletDecl> {
        self.decls.iter().find(|d| d.servlet_name == servlet_name)
    }

    /// Every entry matching `path`, best first.
    pub fn candidates(&self, path: &str) -> Vec<&TableEntry> {
        let mut found: Vec<&TableEntry> = self.entries.iter().filter(|e| e.pattern.matches(path)).collect();
        found.sort_by_key(|e| (e.pattern.tier(), std::cmp::Reverse(e.pattern.prefix_len())));
        found
    }

    pub fn best_match(&self, path: &str) -> Option<&TableEntry> {
        self.candidates(path).into_iter().next()
    }
}

fn normalize_context_path(context_path: &str) -> String {
    let trimmed = context_path.trim().trim_end_matches('/');
    if trimmed.is_empty() {
        String::new()
    } else {
        normalize_path(trimmed).trim_end_matches('/').to_string()
    }
}

/// Merges declarations and mappings from both sources into one table.
/// Descriptor entries are processed before annotation entries and win any
/// collision, on servlet names and on patterns alike.
pub fn build_lookup_table(
    decls: &[ServletDecl],
    mappings: &[UrlMapping],
    context_path: &str,
) -> (UrlMappingTable, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut table = UrlMappingTable {
        context_path: normalize_context_path(context_path),
        ..Default::default()
    };
    let by_source = |src: DeclSource| move |d: &&ServletDecl| d.source == src;
    let ordered_decls = decls
        .iter()
        .filter(by_source(DeclSource::WebXml))
        .chain(decls.iter().filter(by_source(DeclSource::Annotation)));
    for decl in ordered_decls {
        if let Some(existing) = table.decl(&decl.servlet_name) {
            if existing != decl {
                diags.push(Diagnostic::info(
                    "shadowed-servlet",
                    format!(
                        "servlet `{}` from {:?} is shadowed by the {:?} declaration",
                        decl.servlet_name, decl.source, existing.source
                    ),
                ));
            }
            continue;
        }
        table.decls.push(decl.clone());
    }

    let ordered_mappings = mappings
        .iter()
        .filter(|m| m.source == DeclSource::WebXml)
        .chain(mappings.iter().filter(|m| m.source == DeclSource::Annotation));
    for mapping in ordered_mappings {
        let Some(pattern) = UrlPattern::parse(&mapping.url_pattern) else {
            diags.push(Diagnostic::warning(
                "invalid-url-pattern",
                format!(
                    "url-pattern `{}` of `{}` is not valid",
                    mapping.url_pattern, mapping.servlet_name
                ),
            ));
            continue;
        };
        if table.decl(&mapping.servlet_name).is_none() {
            diags.push(Diagnostic::warning(
                "dangling-mapping",
                format!(
                    "url-pattern `{}` maps to undeclared servlet `{}`",
                    mapping.url_pattern, mapping.servlet_name
                ),
            ));
            continue;
        }
        if let Some(existing) = table.entries.iter().find(|e| e.pattern == pattern) {
            if existing.servlet_name != mapping.servlet_name {
                diags.push(Diagnostic::warning(
                    "shadowed-mapping",
                    format!(
                        "url-pattern `{}` -> `{}` ({:?}) is shadowed by `{}` ({:?})",
                        mapping.url_pattern,
                        mapping.servlet_name,
                        mapping.source,
                        existing.servlet_name,
                        existing.source
                    ),
                ));
            }
            continue;
        }
        table.entries.push(TableEntry {
            url_pattern: mapping.url_pattern.clone(),
            pattern,
            servlet_name: mapping.servlet_name.clone(),
            source: mapping.source,
        });
    }
    (table, diags)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResolvedTarget {
    InternalPage { page_path: String },
    InternalServletClass { class_name: String },
    External { url: String },
    Unresolved { reason: String },
}

impl ResolvedTarget {
    fn unresolved(reason: impl Into<String>) -> Self {
        ResolvedTarget::Unresolved { reason: reason.into() }
    }

    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            ResolvedTarget::InternalPage { .. } | ResolvedTarget::InternalServletClass { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    pub target: ResolvedTarget,
    /// Context-relative path that was matched, when one was computed.
    pub path: Option<String>,
    pub diagnostics: Vec<Diagnostic>,
}

/// `scheme:` per RFC 3986, or a network-path reference (`//host`).
pub fn has_scheme(url: &str) -> bool {
    if url.starts_with("//") {
        return true;
    }
    let Some(colon) = url.find(':') else { return false };
    let scheme = &url[..colon];
    let mut chars = scheme.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

/// URLs from these tags are sent to the browser and therefore carry the
/// context path; all others are already context-relative.
fn is_client_url(kind: TagKind) -> bool {
    matches!(kind, TagKind::Form | TagKind::AnchorHref)
}

/// Resolves one reference. `pages` holds the context-relative paths of all
/// JSP files in the application, used for implicit JSP mappings and for
/// include directives, which name files rather than URLs.
pub fn resolve_url(
    table: &UrlMappingTable,
    url_ref: &UrlRef,
    source_page: &str,
    pages: &BTreeSet<String>,
) -> Resolution {
    let mut diagnostics = Vec::new();
    let done = |target, path, diagnostics| Resolution {
        target,
        path,
        diagnostics,
    };
    let raw = url_ref.raw_url.trim();

    if url_ref.dynamic || raw.contains("${") || raw.contains("<%=") {
        return done(ResolvedTarget::unresolved("dynamic"), None, diagnostics);
    }
    if has_scheme(raw) {
        return done(ResolvedTarget::External { url: raw.to_string() }, None, diagnostics);
    }
    let path_part = raw.split(['?', '#']).next().unwrap_or("");
    if path_part.is_empty() {
        let reason = if raw.is_empty() {
            "empty url"
        } else {
            "same-document reference"
        };
        return done(ResolvedTarget::unresolved(reason), None, diagnostics);
    }

    let mut server_relative = path_part.to_string();
    if path_part.starts_with('/') && is_client_url(url_ref.tag_kind) && !table.context_path.is_empty() {
        let ctx = table.context_path.as_str();
        match path_part.strip_prefix(ctx) {
            Some(rest) if rest.is_empty() || rest.starts_with('/') => {
                server_relative = if rest.is_empty() { "/".into() } else { rest.to_string() };
            }
            _ => {
                return done(
                    ResolvedTarget::unresolved(format!("outside context path {ctx}")),
                    None,
                    diagnostics,
                );
            }
        }
    }

    let normalized = resolve_against(source_page, &server_relative);
    if normalized.clamped {
        diagnostics.push(
            Diagnostic::warning(
                "path-escapes-root",
                format!("`{raw}` climbs above the context root; clamped"),
            )
            .in_file(source_page.to_string())
            .at(url_ref.span),
        );
    }
    let mut path = normalized.path;
    if path.len() > 1 && path.ends_with('.') && !path.ends_with("/.") {
        let trimmed = path.trim_end_matches('.').to_string();
        diagnostics.push(
            Diagnostic::info("trailing-dot", format!("trailing dot removed from `{raw}`"))
                .in_file(source_page.to_string())
                .at(url_ref.span),
        );
        path = normalize(&trimmed).path;
    }

    if matches!(
        url_ref.tag_kind,
        TagKind::IncludeDirective | TagKind::XmlIncludeDirective
    ) && pages.contains(&path)
    {
        return done(
            ResolvedTarget::InternalPage {
                page_path: path.clone(),
            },
            Some(path),
            diagnostics,
        );
    }

    let candidates = table.candidates(&path);
    if candidates.len() > 1 {
        let others: Vec<&str> = candidates[1..].iter().map(|e| e.url_pattern.as_str()).collect();
        diagnostics.push(
            Diagnostic::info(
                "shadowed-candidates",
                format!(
                    "`{path}` matched `{}`; also matched {:?}",
                    candidates[0].url_pattern, others
                ),
            )
            .in_file(source_page.to_string())
            .at(url_ref.span),
        );
    }
    let best = candidates.first().copied();
    // The container's implicit JSP mapping outranks the default servlet.
    let implicit_page = pages.contains(&path);
    let target = match best {
        Some(entry) if !(entry.pattern == UrlPattern::Default && implicit_page) => {
            match table.decl(&entry.servlet_name).map(|d| &d.target) {
                Some(ServletTarget::JspFile(file)) => ResolvedTarget::InternalPage {
                    page_path: normalize_path(file),
                },
                Some(ServletTarget::ServletClass(class)) => ResolvedTarget::InternalServletClass {
                    class_name: class.clone(),
                },
                None => ResolvedTarget::unresolved(format!("servlet `{}` is not declared", entry.servlet_name)),
            }
        }
        _ if implicit_page => ResolvedTarget::InternalPage {
            page_path: path.clone(),
        },
        _ => ResolvedTarget::unresolved(format!("no mapping for {path}")),
    };
    done(target, Some(path), diagnostics)
}
