//! Oracles, generators and fixtures shared by the integration tests and the
//! acceptance harness. The oracles work on raw text or on their own matching
//! rules and never call into the code they check.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use jspkdm::code_model::{add_method_call, deserialize_model_json, discover_model, RelationKind};
use jspkdm::dependency_extractor::{extract_url_refs, TagKind, UrlRef};
use jspkdm::deployment_mapper::{
    build_lookup_table, resolve_url, DeclSource, ResolvedTarget, ServletDecl, ServletTarget, UrlMapping,
};
use jspkdm::jsp_parser::{elements_of, parse_jsp, JspNode, NodeKind, Span};
use jspkdm::paths::normalize;
use jspkdm::servlet_translator::{render_servlet_source, translate_page, StatementKind, TranslationOptions};
use jspkdm::{serialize_model, KdmModel, ModelFormat};
use proptest::prelude::*;
use rand::seq::IndexedRandom;
use rand::Rng;
use regex::Regex;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).expect("fixture exists")
}

// ---------------------------------------------------------------------------
// Raw-text delimiter scanning

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct DelimiterCounts {
    pub scriptlets: usize,
    pub expressions: usize,
    pub declarations: usize,
    pub directives: usize,
    pub comments: usize,
}

/// Walks the text left to right looking only at `<%` delimiters.
fn scan_delimiters(src: &str, mut on_region: impl FnMut(char, usize, usize)) {
    let mut i = 0;
    while let Some(rel) = src[i..].find("<%") {
        let start = i + rel;
        if src[start..].starts_with("<%--") {
            let end = src[start + 4..]
                .find("--%>")
                .map(|r| start + 4 + r + 4)
                .unwrap_or(src.len());
            on_region('-', start, end);
            i = end;
            continue;
        }
        let marker = src[start + 2..].chars().next().unwrap_or(' ');
        let end = src[start + 2..]
            .find("%>")
            .map(|r| start + 2 + r + 2)
            .unwrap_or(src.len());
        let kind = match marker {
            '=' | '!' | '@' => marker,
            _ => 's',
        };
        on_region(kind, start, end);
        i = end;
    }
}

pub fn delimiter_counts(src: &str) -> DelimiterCounts {
    let mut c = DelimiterCounts::default();
    scan_delimiters(src, |kind, _, _| match kind {
        '-' => c.comments += 1,
        '=' => c.expressions += 1,
        '!' => c.declarations += 1,
        '@' => c.directives += 1,
        _ => c.scriptlets += 1,
    });
    c
}

/// The source with every scriptlet, expression, declaration and JSP comment
/// removed. Directives stay.
pub fn delete_scripting(src: &str) -> String {
    let mut out = String::new();
    let mut at = 0;
    scan_delimiters(src, |kind, start, end| {
        if kind != '@' {
            out.push_str(&src[at..start]);
            at = end;
        }
    });
    out.push_str(&src[at..]);
    out
}

// ---------------------------------------------------------------------------
// Java string literals

/// Decodes the escapes a Java string literal may contain.
pub fn java_unescape(lit: &str) -> String {
    let chars: Vec<char> = lit.chars().collect();
    let mut out = String::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i] != '\\' {
            out.push(chars[i]);
            i += 1;
            continue;
        }
        i += 1;
        match chars[i] {
            'n' => out.push('\n'),
            'r' => out.push('\r'),
            't' => out.push('\t'),
            'b' => out.push('\u{8}'),
            'f' => out.push('\u{c}'),
            'u' => {
                let hex: String = chars[i + 1..i + 5].iter().collect();
                out.push(char::from_u32(u32::from_str_radix(&hex, 16).unwrap()).unwrap());
                i += 4;
            }
            d @ '0'..='7' => {
                let mut value = d.to_digit(8).unwrap();
                let max = if d <= '3' { 2 } else { 1 };
                let mut taken = 0;
                while taken < max && i + 1 < chars.len() && ('0'..='7').contains(&chars[i + 1]) {
                    i += 1;
                    taken += 1;
                    value = value * 8 + chars[i].to_digit(8).unwrap();
                }
                out.push(char::from_u32(value).unwrap());
            }
            other => out.push(other),
        }
        i += 1;
    }
    out
}

/// The literal arguments of every `out.write("...")` in a Java source.
pub fn emitted_literals(java: &str) -> Vec<String> {
    let re = Regex::new(r#"out\.write\("((?:[^"\\]|\\.)*)"\);"#).unwrap();
    re.captures_iter(java).map(|c| java_unescape(&c[1])).collect()
}

pub fn count_matches(pattern: &str, text: &str) -> usize {
    Regex::new(pattern).unwrap().find_iter(text).count()
}

// ---------------------------------------------------------------------------
// Dependency tag oracle

/// Regex scanner for the ten dependency tag/attribute rows. Returns sorted
/// `(tag_kind, attribute, raw_url)` triples.
pub fn tag_table_oracle(src: &str) -> Vec<(String, String, String)> {
    let rows: [(&str, &str, &str); 10] = [
        ("form", "action", r#"(?i)<form\b[^>]*?\baction\s*=\s*"([^"]*)""#),
        ("jsp:include", "page", r#"<jsp:include\b[^>]*?\bpage\s*=\s*"([^"]*)""#),
        (
            "include-directive",
            "file",
            r#"<%@\s*include\b[^%]*?\bfile\s*=\s*"([^"]*)""#,
        ),
        (
            "jsp:directive.include",
            "file",
            r#"<jsp:directive\.include\b[^>]*?\bfile\s*=\s*"([^"]*)""#,
        ),
        ("jsp:forward", "page", r#"<jsp:forward\b[^>]*?\bpage\s*=\s*"([^"]*)""#),
        (
            "page-directive-errorPage",
            "errorPage",
            r#"<%@\s*page\b[^%]*?\berrorPage\s*=\s*"([^"]*)""#,
        ),
        (
            "jsp:directive.page-errorPage",
            "errorPage",
            r#"<jsp:directive\.page\b[^>]*?\berrorPage\s*=\s*"([^"]*)""#,
        ),
        ("a-href", "href", r#"(?i)<a\b[^>]*?\bhref\s*=\s*"([^"]*)""#),
        ("c:redirect", "url", r#"<c:redirect\b[^>]*?\burl\s*=\s*"([^"]*)""#),
        ("c:url", "value", r#"<c:url\b[^>]*?\bvalue\s*=\s*"([^"]*)""#),
    ];
    let mut out = Vec::new();
    for (kind, attr, pattern) in rows {
        for cap in Regex::new(pattern).unwrap().captures_iter(src) {
            out.push((kind.to_string(), attr.to_string(), cap[1].trim().to_string()));
        }
    }
    out.sort();
    out
}

pub fn extracted_triples(src: &str) -> Vec<(String, String, String)> {
    let doc = parse_jsp(src, "/page.jsp").unwrap();
    let mut out: Vec<_> = extract_url_refs(&doc)
        .refs
        .into_iter()
        .map(|r| (r.tag_kind.to_string(), r.attribute, r.raw_url))
        .collect();
    out.sort();
    out
}

// ---------------------------------------------------------------------------
// Random JSP pages

fn word() -> impl Strategy<Value = String> {
    "[a-zA-Z0-9 ]{0,8}"
}

fn attr_value() -> impl Strategy<Value = String> {
    prop_oneof![
        "[a-z/._]{0,10}",
        "[a-z/]{0,4}".prop_map(|p| format!("{p}<%= v %>")),
        "[a-z]{1,4}".prop_map(|p| format!("${{{p}}}")),
    ]
}

fn fragment() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => "[a-zA-Z0-9 \n.,;:!?()\u{e9}\u{4e2d}>'\"]{1,16}",
        1 => Just(" a < b ".to_string()),
        1 => Just("100%".to_string()),
        3 => ("(div|p|TD|a|form|span)", "(class|href|action|id)", attr_value())
            .prop_map(|(t, a, v)| format!("<{t} {a}=\"{v}\">")),
        2 => "(div|p|TD|a|form)".prop_map(|t| format!("</{t}>")),
        1 => Just("<br/>".to_string()),
        3 => "[a-z0-9 =+;(){}\n]{0,14}".prop_map(|c| format!("<%{c}%>")),
        3 => "[a-z0-9 +()]{0,10}".prop_map(|e| format!("<%= {e}%>")),
        1 => "[a-z ]{0,8}".prop_map(|d| format!("<%! int {d}; %>")),
        1 => word().prop_map(|c| format!("<%-- {c} --%>")),
        1 => Just("<%@ page import=\"java.util.*\" %>".to_string()),
        1 => Just("<%@ include file=\"/inc.jspf\" %>".to_string()),
        1 => word().prop_map(|c| format!("<!-- {c} -->")),
        1 => "[a-z]{1,6}".prop_map(|p| format!("<jsp:include page=\"/{p}.jsp\"/>")),
        1 => "[a-z]{1,6}".prop_map(|p| format!("<jsp:forward page=\"/{p}.jsp\"></jsp:forward>")),
        1 => word().prop_map(|w| format!("<c:if test=\"${{t}}\">{w}<%= w %></c:if>")),
        1 => Just("<c:forEach items=\"${xs}\">".to_string()),
        1 => "[a-z]{1,6}".prop_map(|u| format!("<c:url value=\"/{u}\"/>")),
    ]
}

/// Random pages mixing template text, HTML, scripting, directives and
/// actions. Scripting delimiters never occur inside scripting bodies.
pub fn jsp_source() -> impl Strategy<Value = String> {
    prop::collection::vec(fragment(), 0..24).prop_map(|parts| parts.concat())
}

/// Page paths with arbitrary printable segments.
pub fn page_path() -> impl Strategy<Value = String> {
    prop::collection::vec("[a-zA-Z0-9_\\-.$ \u{e9}]{1,8}", 1..4).prop_map(|segs| format!("/{}.jsp", segs.join("/")))
}

/// Paths with dot segments, repeated slashes and missing leading slash.
pub fn messy_path() -> impl Strategy<Value = String> {
    prop::collection::vec(
        prop_oneof![
            "[a-z]{1,3}",
            Just(".".to_string()),
            Just("..".to_string()),
            Just(String::new())
        ],
        0..8,
    )
    .prop_map(|segs| segs.join("/"))
}

// ---------------------------------------------------------------------------
// Property checks, shared by proptest suites and the acceptance harness

fn check_tiling(nodes: &[JspNode], span: Span, strict: bool) -> Result<(), String> {
    let mut at = span.start;
    for n in nodes {
        if strict && n.span.start != at {
            return Err(format!("gap or overlap at {at}: next node starts at {}", n.span.start));
        }
        if n.span.start < at || n.span.end < n.span.start || n.span.end > span.end {
            return Err(format!("node {:?} out of order or outside {span:?}", n.span));
        }
        // Children of an element sit inside it, sorted; they need not tile.
        check_tiling(&n.children, n.span, false)?;
        at = n.span.end;
    }
    if strict && at != span.end {
        return Err(format!("coverage ends at {at}, expected {}", span.end));
    }
    Ok(())
}

pub fn check_span_coverage(src: &str) -> Result<(), String> {
    let doc = parse_jsp(src, "/p.jsp").map_err(|e| e.to_string())?;
    check_tiling(&doc.nodes, Span::new(0, doc.source_length), true)?;
    let again = parse_jsp(src, "/p.jsp").map_err(|e| e.to_string())?;
    if again != doc {
        return Err("parse is not deterministic".into());
    }
    Ok(())
}

pub fn check_kind_counts(src: &str) -> Result<(), String> {
    let doc = parse_jsp(src, "/p.jsp").map_err(|e| e.to_string())?;
    let oracle = delimiter_counts(src);
    let count = |k| elements_of(&doc, &[k]).len();
    let got = (
        count(NodeKind::Scriptlet),
        count(NodeKind::Expression),
        count(NodeKind::Declaration),
        count(NodeKind::Comment),
    );
    let want = (
        oracle.scriptlets,
        oracle.expressions,
        oracle.declarations,
        oracle.comments,
    );
    if got != want {
        return Err(format!(
            "parser (scriptlet, expr, decl, comment) = {got:?}, delimiter oracle = {want:?}"
        ));
    }
    Ok(())
}

pub fn check_template_round_trip(src: &str) -> Result<(), String> {
    let doc = parse_jsp(src, "/p.jsp").map_err(|e| e.to_string())?;
    let unit = translate_page(&doc, &TranslationOptions::default());
    let joined: String = unit
        .service_body
        .iter()
        .filter(|s| s.kind == StatementKind::TemplateEmit)
        .map(|s| s.text.as_str())
        .collect();
    let want = delete_scripting(src);
    if joined != want {
        return Err(format!("template text {joined:?} != {want:?}"));
    }
    Ok(())
}

pub fn check_order(src: &str) -> Result<(), String> {
    let doc = parse_jsp(src, "/p.jsp").map_err(|e| e.to_string())?;
    let unit = translate_page(&doc, &TranslationOptions::default());
    let starts: Vec<usize> = unit.service_body.iter().map(|s| s.origin_span.start).collect();
    if starts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(format!("statement starts not increasing: {starts:?}"));
    }
    let refs = extract_url_refs(&doc).refs;
    if refs.windows(2).any(|w| w[0].span.start >= w[1].span.start) {
        return Err("url refs out of document order".into());
    }
    Ok(())
}

pub fn check_statement_counts(src: &str) -> Result<(), String> {
    let doc = parse_jsp(src, "/p.jsp").map_err(|e| e.to_string())?;
    let unit = translate_page(&doc, &TranslationOptions::default());
    let oracle = delimiter_counts(src);
    let of = |k| unit.service_body.iter().filter(|s| s.kind == k).count();
    let got = (
        of(StatementKind::InlineCode),
        unit.declarations.len(),
        of(StatementKind::ExpressionEmit),
    );
    let want = (oracle.scriptlets, oracle.declarations, oracle.expressions);
    if got != want {
        return Err(format!("(inline, declarations, emits) = {got:?}, expected {want:?}"));
    }
    Ok(())
}

pub fn check_render_unescape(src: &str) -> Result<(), String> {
    let doc = parse_jsp(src, "/p.jsp").map_err(|e| e.to_string())?;
    let unit = translate_page(&doc, &TranslationOptions::default());
    let java = render_servlet_source(&unit);
    let literals = emitted_literals(&java);
    let texts: Vec<String> = unit
        .service_body
        .iter()
        .filter(|s| s.kind == StatementKind::TemplateEmit)
        .map(|s| s.text.clone())
        .collect();
    if literals != texts {
        return Err(format!("unescaped literals {literals:?} != template texts {texts:?}"));
    }
    Ok(())
}

pub fn check_normalization(path: &str) -> Result<(), String> {
    let once = normalize(path).path;
    let twice = normalize(&once);
    if twice.path != once || twice.clamped {
        return Err(format!(
            "normalize not idempotent on {path:?}: {once:?} -> {:?}",
            twice.path
        ));
    }
    if !once.starts_with('/') || once.contains("//") || once.split('/').any(|s| s == ".." || s == ".") {
        return Err(format!("normalized path {once:?} is not canonical"));
    }
    Ok(())
}

pub fn check_dynamic_flagging(src: &str) -> Result<(), String> {
    let doc = parse_jsp(src, "/p.jsp").map_err(|e| e.to_string())?;
    for r in extract_url_refs(&doc).refs {
        let has_expr = r.raw_url.contains("${") || r.raw_url.contains("<%=");
        if has_expr != r.dynamic {
            return Err(format!("dynamic flag wrong for {:?}", r.raw_url));
        }
        if has_expr {
            let res = resolve_url(&Default::default(), &r, "/p.jsp", &BTreeSet::new());
            if !matches!(res.target, ResolvedTarget::Unresolved { .. }) {
                return Err(format!("dynamic {:?} resolved to {:?}", r.raw_url, res.target));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// URL pattern precedence

#[derive(Debug, Clone)]
pub struct PatternCase {
    pub patterns: Vec<String>,
    pub url: String,
}

const SEGMENTS: [&str; 3] = ["a", "b", "c"];
const EXTENSIONS: [&str; 2] = ["jsp", "do"];

fn random_path<R: Rng>(rng: &mut R, min: usize, max: usize) -> String {
    let n = rng.random_range(min..=max);
    let mut path = String::new();
    for _ in 0..n {
        path.push('/');
        path.push_str(SEGMENTS.choose(rng).unwrap());
    }
    path
}

pub fn random_pattern_case<R: Rng>(rng: &mut R) -> PatternCase {
    let mut patterns = BTreeSet::new();
    let n = rng.random_range(1..=8);
    while patterns.len() < n {
        let p = match rng.random_range(0..4) {
            0 => {
                let mut p = random_path(rng, 1, 3);
                if rng.random_bool(0.4) {
                    p.push('.');
                    p.push_str(EXTENSIONS.choose(rng).unwrap());
                }
                p
            }
            1 => format!("{}/*", random_path(rng, 0, 2)),
            2 => format!("*.{}", EXTENSIONS.choose(rng).unwrap()),
            _ => "/".to_string(),
        };
        patterns.insert(p);
    }
    let mut url = random_path(rng, 1, 4);
    if rng.random_bool(0.4) {
        url.push('.');
        url.push_str(EXTENSIONS.choose(rng).unwrap());
    }
    if rng.random_bool(0.05) {
        url = "/".into();
    }
    let mut patterns: Vec<String> = patterns.into_iter().collect();
    // Shuffle so declaration order carries no information.
    for i in (1..patterns.len()).rev() {
        let j = rng.random_range(0..=i);
        patterns.swap(i, j);
    }
    PatternCase { patterns, url }
}

/// Tests every pattern against the URL by the servlet rules and keeps the
/// best by (exact, longest prefix, extension, default).
pub fn precedence_oracle(patterns: &[String], url: &str) -> Option<usize> {
    let mut best: Option<((u8, std::cmp::Reverse<usize>), usize)> = None;
    for (i, p) in patterns.iter().enumerate() {
        let rank = if p == "/" {
            Some((3, 0))
        } else if let Some(ext) = p.strip_prefix("*.") {
            let last = url.rsplit('/').next().unwrap();
            (last.contains('.') && last.rsplit('.').next() == Some(ext)).then_some((2, 0))
        } else if let Some(base) = p.strip_suffix("/*") {
            (url == base || url.starts_with(&format!("{base}/"))).then_some((1, base.len()))
        } else {
            (url == p).then_some((0, 0))
        };
        if let Some((tier, len)) = rank {
            let key = (tier, std::cmp::Reverse(len));
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, i));
            }
        }
    }
    best.map(|(_, i)| i)
}

pub fn check_precedence(case: &PatternCase) -> Result<(), String> {
    let decls: Vec<ServletDecl> = (0..case.patterns.len())
        .map(|i| ServletDecl {
            servlet_name: format!("s{i}"),
            target: ServletTarget::ServletClass(format!("p.S{i}")),
            source: DeclSource::WebXml,
        })
        .collect();
    let mappings: Vec<UrlMapping> = case
        .patterns
        .iter()
        .enumerate()
        .map(|(i, p)| UrlMapping {
            url_pattern: p.clone(),
            servlet_name: format!("s{i}"),
            source: DeclSource::WebXml,
        })
        .collect();
    let (table, diags) = build_lookup_table(&decls, &mappings, "");
    if !diags.is_empty() {
        return Err(format!("unexpected table diagnostics {diags:?}"));
    }
    let url_ref = UrlRef {
        source_page: "/src.jsp".into(),
        tag_kind: TagKind::AnchorHref,
        attribute: "href".into(),
        raw_url: case.url.clone(),
        http_method: None,
        dynamic: false,
        span: Span::new(0, 0),
    };
    let got = resolve_url(&table, &url_ref, "/src.jsp", &BTreeSet::new()).target;
    let want = match precedence_oracle(&case.patterns, &case.url) {
        Some(i) => ResolvedTarget::InternalServletClass {
            class_name: format!("p.S{i}"),
        },
        None => ResolvedTarget::Unresolved {
            reason: format!("no mapping for {}", case.url),
        },
    };
    if got != want {
        return Err(format!("{case:?}: resolve_url gave {got:?}, oracle {want:?}"));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Random models

const PAGE_PARTS: [&str; 8] = [
    "<p>hello</p>",
    "<% int x = 1; %>",
    "<%= x %>",
    "<%! int y; %>",
    "<a href=\"/a.jsp\">a</a>",
    "text & \"quotes\" <b>bold</b>\n",
    "<jsp:include page=\"/b.jsp\"/>",
    "\u{e9}t\u{e9}",
];

/// A small model built the way the pipeline builds one: translated random
/// pages, a few plain servlet classes, and random calls among them.
pub fn random_model<R: Rng>(rng: &mut R) -> KdmModel {
    let pages = rng.random_range(1..=5);
    let mut units = Vec::new();
    for i in 0..pages {
        let mut src = String::new();
        for _ in 0..rng.random_range(0..6) {
            src.push_str(PAGE_PARTS.choose(rng).unwrap());
        }
        let path = format!("/d{}/p{i}.jsp", rng.random_range(0..3));
        let doc = parse_jsp(&src, &path).unwrap();
        units.push(translate_page(&doc, &TranslationOptions::default()));
    }
    let mut model = discover_model(&units).unwrap();
    for i in 0..rng.random_range(0..3) {
        model.add_servlet_class(&format!("com.x.Servlet{i}")).unwrap();
    }
    let classes = model.class_units.len();
    for _ in 0..rng.random_range(0..10) {
        let from = model.class_units[rng.random_range(0..pages)].id;
        let to = model.class_units[rng.random_range(0..classes)].id;
        let kind = if rng.random_bool(0.2) {
            RelationKind::Call
        } else {
            RelationKind::Tag(*TagKind::ALL.choose(rng).unwrap())
        };
        add_method_call(&mut model, from, to, kind).unwrap();
    }
    model
}

pub fn check_json_round_trip(model: &KdmModel) -> Result<(), String> {
    let bytes = serialize_model(model, ModelFormat::Json);
    let back = deserialize_model_json(&bytes).map_err(|e| e.to_string())?;
    if &back != model {
        return Err("JSON round-trip changed the model".into());
    }
    if serialize_model(&back, ModelFormat::Json) != bytes {
        return Err("re-serialization is not byte-identical".into());
    }
    Ok(())
}

/// Re-parses the XMI and checks that every relationship endpoint names a
/// ClassUnit element in the same document.
pub fn check_xmi_references(model: &KdmModel) -> Result<(), String> {
    let bytes = serialize_model(model, ModelFormat::Xmi);
    let text = String::from_utf8(bytes).map_err(|e| e.to_string())?;
    let doc = roxmltree::Document::parse(&text).map_err(|e| e.to_string())?;
    let xmi_attr = |n: &roxmltree::Node, local: &str| {
        n.attributes()
            .find(|a| a.name() == local && a.namespace() == Some("http://www.omg.org/XMI"))
            .map(|a| a.value().to_string())
    };
    let mut types = BTreeMap::new();
    for n in doc.descendants().filter(|n| n.is_element()) {
        if let Some(id) = xmi_attr(&n, "id") {
            if types
                .insert(id.clone(), xmi_attr(&n, "type").unwrap_or_default())
                .is_some()
            {
                return Err(format!("duplicate xmi:id {id}"));
            }
        }
    }
    let relations: Vec<_> = doc
        .descendants()
        .filter(|n| n.is_element() && n.tag_name().name() == "codeRelation")
        .collect();
    if relations.len() != model.relationships.len() {
        return Err(format!(
            "{} codeRelation elements for {} relationships",
            relations.len(),
            model.relationships.len()
        ));
    }
    for r in relations {
        for end in ["from", "to"] {
            let id = r.attribute(end).ok_or_else(|| format!("codeRelation without {end}"))?;
            match types.get(id).map(String::as_str) {
                Some("code:ClassUnit") => {}
                other => return Err(format!("{end}={id} resolves to {other:?}")),
            }
        }
    }
    for n in doc.descendants().filter(|n| n.is_element()) {
        if let Some(refs) = n.attribute("codeRelation") {
            for id in refs.split_whitespace() {
                if types.get(id).map(String::as_str) != Some("code:CodeRelationship") {
                    return Err(format!("codeRelation reference {id} does not resolve"));
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// The shop webapp fixture

pub const SHOP_CONTEXT: &str = "/shop";

/// Relationships traced by hand from the fixture sources: (from page,
/// target page or servlet class, tag kind).
pub const SHOP_RELATIONSHIPS: [(&str, &str, &str); 13] = [
    ("/index.jsp", "/error.jsp", "page-directive-errorPage"),
    ("/index.jsp", "/catalog.jsp", "a-href"),
    ("/index.jsp", "com.shop.LoginServlet", "form"),
    ("/index.jsp", "/WEB-INF/footer.jsp", "jsp:include"),
    ("/catalog.jsp", "com.shop.HelloServlet", "c:url"),
    ("/catalog.jsp", "/item.jsp", "jsp:forward"),
    ("/item.jsp", "/WEB-INF/footer.jsp", "include-directive"),
    ("/item.jsp", "/item.jsp", "a-href"),
    ("/item.jsp", "/index.jsp", "c:redirect"),
    ("/error.jsp", "/WEB-INF/footer.jsp", "jsp:directive.include"),
    ("/error.jsp", "/index.jsp", "a-href"),
    ("/WEB-INF/footer.jsp", "/error.jsp", "jsp:directive.page-errorPage"),
    ("/WEB-INF/footer.jsp", "/index.jsp", "a-href"),
];

pub fn shop_expected() -> BTreeSet<(String, String, String)> {
    SHOP_RELATIONSHIPS
        .iter()
        .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
        .collect()
}

/// Model relationships as (from, to, kind), naming page classes by their
/// source page and other classes by qualified name.
pub fn model_triples(model: &KdmModel) -> BTreeSet<(String, String, String)> {
    let name = |id| {
        let c = model.class(id).unwrap();
        c.source_page.clone().unwrap_or_else(|| c.qualified_name())
    };
    model
        .relationships
        .iter()
        .map(|r| (name(r.from), name(r.to), r.kind.as_str().to_string()))
        .collect()
}
