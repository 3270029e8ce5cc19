//! JSP to servlet translation.
//!
//! Each page becomes a [`ServletUnit`] following the Jasper rules: scriptlet
//! code is copied verbatim into `_jspService`, declarations become class
//! members, expressions become print calls, `jsp:useBean` and the property
//! actions become ordinary Java statements, registered custom tags become
//! tag-handler calls, and everything else is written out as template text.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::diagnostics::Diagnostic;
use crate::jsp_parser::{JspDocument, JspNode, NodeKind, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StatementKind {
    InlineCode,
    TemplateEmit,
    BeanInstantiation,
    PropertyGet,
    PropertySet,
    TagHandlerCall,
    ExpressionEmit,
}

impl StatementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            StatementKind::InlineCode => "InlineCode",
            StatementKind::TemplateEmit => "TemplateEmit",
            StatementKind::BeanInstantiation => "BeanInstantiation",
            StatementKind::PropertyGet => "PropertyGet",
            StatementKind::PropertySet => "PropertySet",
            StatementKind::TagHandlerCall => "TagHandlerCall",
            StatementKind::ExpressionEmit => "ExpressionEmit",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatementMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bean_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub property: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tag_name: Option<String>,
    /// Life-cycle calls made on a tag handler, in order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub handler_calls: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeStatement {
    pub kind: StatementKind,
    /// Java code, or the raw (unescaped) template text for `TemplateEmit`.
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<StatementMeta>,
    pub origin_span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ServletUnit {
    pub class_name: String,
    pub package: String,
    pub source_page: String,
    pub declarations: Vec<CodeStatement>,
    pub init_body: Vec<CodeStatement>,
    pub service_body: Vec<CodeStatement>,
    pub destroy_body: Vec<CodeStatement>,
    pub imports: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
}

impl ServletUnit {
    pub fn qualified_name(&self) -> String {
        if self.package.is_empty() {
            self.class_name.clone()
        } else {
            format!("{}.{}", self.package, self.class_name)
        }
    }

    /// Relative path of the rendered source, mirroring the package.
    pub fn source_file_path(&self) -> PathBuf {
        let mut path: PathBuf = self.package.split('.').filter(|s| !s.is_empty()).collect();
        path.push(format!("{}.java", self.class_name));
        path
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationOptions {
    pub package: String,
    /// Custom tags with a known handler class, keyed by full tag name
    /// (`prefix:name`). Tags not listed here are emitted as template text.
    pub tag_handlers: BTreeMap<String, String>,
}

impl Default for TranslationOptions {
    fn default() -> Self {
        TranslationOptions {
            package: "org.apache.jsp".to_string(),
            tag_handlers: BTreeMap::new(),
        }
    }
}

/// Name of the request-handling method every translated page exposes.
pub const SERVICE_METHOD: &str = "_jspService";
pub const INIT_METHOD: &str = "_jspInit";
pub const DESTROY_METHOD: &str = "_jspDestroy";

/// Maps a context-relative page path to a Java identifier.
///
/// The leading `/` is dropped and `jsp_` prepended. ASCII letters and digits
/// are kept, `.` becomes `_`, and every other character (including `/`, `_`
/// and `$`) becomes `$` followed by four lower-case hex digits of its UTF-16
/// code unit(s). The mapping is injective: `_` can only come from `.` and
/// `$` always starts a fixed-width escape.
pub fn mangle_class_name(page_path: &str) -> String {
    let rest = page_path.strip_prefix('/').unwrap_or(page_path);
    let mut out = String::with_capacity(rest.len() + 8);
    out.push_str("jsp_");
    let mut units = [0u16; 2];
    for ch in rest.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch);
        } else if ch == '.' {
            out.push('_');
        } else {
            for unit in ch.encode_utf16(&mut units) {
                let _ = write!(out, "${unit:04x}");
            }
        }
    }
    out
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

fn getter_name(property: &str) -> String {
    format!("get{}", capitalize(property))
}

fn setter_name(property: &str) -> String {
    format!("set{}", capitalize(property))
}

/// Java source for an attribute value: a string literal, or the embedded
/// expression when the whole value is a single `<%= ... %>`.
fn value_expression(value: &str) -> String {
    let t = value.trim();
    if let Some(inner) = t.strip_prefix("<%=").and_then(|r| r.strip_suffix("%>")) {
        if !inner.contains("%>") {
            return inner.trim().to_string();
        }
    }
    format!("\"{}\"", escape_java_string(value))
}

struct Translator<'a> {
    doc: &'a JspDocument,
    options: &'a TranslationOptions,
    unit: ServletUnit,
    pending: Option<(usize, usize, String)>,
    handler_counter: BTreeMap<String, usize>,
}

/// Applies the translation rules to every node, in document order.
pub fn translate_page(doc: &JspDocument, options: &TranslationOptions) -> ServletUnit {
    let mut t = Translator {
        doc,
        options,
        unit: ServletUnit {
            class_name: mangle_class_name(&doc.page_path),
            package: options.package.clone(),
            source_page: doc.page_path.clone(),
            declarations: Vec::new(),
            init_body: Vec::new(),
            service_body: Vec::new(),
            destroy_body: Vec::new(),
            imports: Vec::new(),
            diagnostics: Vec::new(),
        },
        pending: None,
        handler_counter: BTreeMap::new(),
    };
    for node in &doc.nodes {
        t.node(node);
    }
    t.flush();
    t.unit
}

impl Translator<'_> {
    fn template(&mut self, span: Span) {
        let text = self.doc.text(span);
        match &mut self.pending {
            Some((_, end, buf)) => {
                buf.push_str(text);
                *end = span.end;
            }
            None => self.pending = Some((span.start, span.end, text.to_string())),
        }
    }

    fn flush(&mut self) {
        if let Some((start, end, text)) = self.pending.take() {
            if !text.is_empty() {
                self.unit.service_body.push(CodeStatement {
                    kind: StatementKind::TemplateEmit,
                    text,
                    meta: None,
                    origin_span: Span::new(start, end),
                });
            }
        }
    }

    fn statement(&mut self, kind: StatementKind, text: String, meta: Option<StatementMeta>, span: Span) {
        self.flush();
        self.unit.service_body.push(CodeStatement {
            kind,
            text,
            meta,
            origin_span: span,
        });
    }

    fn diagnose(&mut self, diag: Diagnostic) {
        self.unit.diagnostics.push(diag.in_file(self.doc.page_path.clone()));
    }

    /// Template-text treatment for an element: start tag, translated body,
    /// end tag.
    fn verbatim_element(&mut self, node: &JspNode) {
        // Children either follow the start tag (action bodies) or sit inside
        // it (scripting embedded in an HTML tag); the gaps are template text.
        let mut at = node.span.start;
        for child in &node.children {
            if child.span.start > at {
                self.template(Span::new(at, child.span.start));
            }
            self.node(child);
            at = child.span.end;
        }
        if node.span.end > at {
            self.template(Span::new(at, node.span.end));
        }
    }

    fn children(&mut self, node: &JspNode) {
        for child in &node.children {
            self.node(child);
        }
    }

    fn node(&mut self, node: &JspNode) {
        match node.kind {
            NodeKind::TemplateText => self.template(node.span),
            NodeKind::HtmlElement => self.verbatim_element(node),
            NodeKind::Comment => {}
            NodeKind::Scriptlet => self.statement(StatementKind::InlineCode, node.body.clone(), None, node.span),
            NodeKind::Expression => self.statement(
                StatementKind::ExpressionEmit,
                node.body.trim().to_string(),
                None,
                node.span,
            ),
            NodeKind::Declaration => self.unit.declarations.push(CodeStatement {
                kind: StatementKind::InlineCode,
                text: node.body.trim().to_string(),
                meta: None,
                origin_span: node.span,
            }),
            NodeKind::Directive => {
                if !node.end_tag && (node.name == "page" || node.name == "jsp:directive.page") {
                    if let Some(imports) = node.attr_value("import") {
                        for import in imports.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                            if !self.unit.imports.iter().any(|i| i == import) {
                                self.unit.imports.push(import.to_string());
                            }
                        }
                    }
                }
                self.verbatim_element(node);
            }
            NodeKind::StandardAction if !node.end_tag => match node.name.as_str() {
                "jsp:useBean" => self.use_bean(node),
                "jsp:getProperty" => self.get_property(node),
                "jsp:setProperty" => self.set_property(node),
                _ => self.verbatim_element(node),
            },
            NodeKind::CustomAction if !node.end_tag => match self.options.tag_handlers.get(&node.name) {
                Some(handler) => {
                    let handler = handler.clone();
                    self.tag_handler(node, &handler)
                }
                None => self.verbatim_element(node),
            },
            NodeKind::StandardAction | NodeKind::CustomAction => self.verbatim_element(node),
        }
    }

    fn use_bean(&mut self, node: &JspNode) {
        let id = node.attr_value("id").filter(|v| !v.is_empty());
        let class = node.attr_value("class").filter(|v| !v.is_empty());
        let (Some(id), Some(class)) = (id, class) else {
            self.diagnose(
                Diagnostic::warning(
                    "usebean-missing-class",
                    "jsp:useBean without both `id` and `class`; emitted as template text",
                )
                .at(node.head),
            );
            self.verbatim_element(node);
            return;
        };
        let text = format!("{class} {id} = new {class}();");
        let meta = StatementMeta {
            bean_id: Some(id.to_string()),
            class_name: Some(class.to_string()),
            ..StatementMeta::default()
        };
        self.statement(StatementKind::BeanInstantiation, text, Some(meta), node.head);
        self.children(node);
    }

    fn get_property(&mut self, node: &JspNode) {
        let bean = node.attr_value("name").filter(|v| !v.is_empty());
        let property = node.attr_value("property").filter(|v| !v.is_empty());
        let (Some(bean), Some(property)) = (bean, property) else {
            self.diagnose(
                Diagnostic::warning(
                    "property-missing-attribute",
                    "jsp:getProperty needs `name` and `property`",
                )
                .at(node.head),
            );
            self.verbatim_element(node);
            return;
        };
        let method = getter_name(property);
        let text = format!("out.print({bean}.{method}());");
        let meta = StatementMeta {
            bean_id: Some(bean.to_string()),
            property: Some(property.to_string()),
            method: Some(method),
            ..StatementMeta::default()
        };
        self.statement(StatementKind::PropertyGet, text, Some(meta), node.head);
        self.children(node);
    }

    fn set_property(&mut self, node: &JspNode) {
        let bean = node.attr_value("name").filter(|v| !v.is_empty());
        let property = node.attr_value("property").filter(|v| !v.is_empty());
        let (Some(bean), Some(property)) = (bean, property) else {
            self.diagnose(
                Diagnostic::warning(
                    "property-missing-attribute",
                    "jsp:setProperty needs `name` and `property`",
                )
                .at(node.head),
            );
            self.verbatim_element(node);
            return;
        };
        let (text, method) = if property == "*" {
            (format!("JspRuntimeLibrary.introspect({bean}, request);"), None)
        } else {
            let method = setter_name(property);
            let arg = match (node.attr_value("value"), node.attr_value("param")) {
                (Some(v), _) => value_expression(v),
                (None, Some(p)) => format!("request.getParameter(\"{}\")", escape_java_string(p)),
                (None, None) => format!("request.getParameter(\"{}\")", escape_java_string(property)),
            };
            (format!("{bean}.{method}({arg});"), Some(method))
        };
        let meta = StatementMeta {
            bean_id: Some(bean.to_string()),
            property: Some(property.to_string()),
            method,
            ..StatementMeta::default()
        };
        self.statement(StatementKind::PropertySet, text, Some(meta), node.head);
        self.children(node);
    }

    fn tag_handler(&mut self, node: &JspNode, handler: &str) {
        let counter = self.handler_counter.entry(node.name.clone()).or_insert(0);
        let var = format!("_jspx_th_{}_{}", node.name.replace([':', '.', '-'], "_"), counter);
        *counter += 1;

        let mut calls = Vec::new();
        let mut text = format!("{handler} {var} = new {handler}();");
        for attr in &node.attributes {
            let setter = setter_name(&attr.name);
            let _ = write!(text, " {var}.{setter}({});", value_expression(&attr.value));
            calls.push(setter);
        }
        calls.push("doStartTag".to_string());
        let _ = write!(text, " {var}.doStartTag();");
        // Without a body there is nothing between start and end.
        let closes_here = node.tail.is_none();
        if closes_here {
            calls.push("doEndTag".to_string());
            let _ = write!(text, " {var}.doEndTag();");
        }
        let meta = StatementMeta {
            class_name: Some(handler.to_string()),
            tag_name: Some(node.name.clone()),
            handler_calls: calls,
            ..StatementMeta::default()
        };
        self.statement(StatementKind::TagHandlerCall, text, Some(meta), node.head);
        self.children(node);
        if let Some(tail) = node.tail {
            let meta = StatementMeta {
                class_name: Some(handler.to_string()),
                tag_name: Some(node.name.clone()),
                handler_calls: vec!["doEndTag".to_string()],
                ..StatementMeta::default()
            };
            self.statement(
                StatementKind::TagHandlerCall,
                format!("{var}.doEndTag();"),
                Some(meta),
                tail,
            );
        }
    }
}

/// Escapes text for a Java string literal body. Control characters other
/// than `\n`, `\r` and `\t` use three-digit octal escapes.
pub fn escape_java_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 8);
    for ch in s.chars() {
        match ch {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                let _ = write!(out, "\\{:03o}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

fn render_statement(out: &mut String, stmt: &CodeStatement, indent: &str) {
    match stmt.kind {
        StatementKind::TemplateEmit => {
            let _ = writeln!(out, "{indent}out.write(\"{}\");", escape_java_string(&stmt.text));
        }
        StatementKind::ExpressionEmit => {
            let _ = writeln!(out, "{indent}out.print({});", stmt.text);
        }
        _ => {
            let _ = writeln!(out, "{indent}{}", stmt.text.trim_end());
        }
    }
}

fn render_method(out: &mut String, signature: &str, body: &[CodeStatement], prelude: &[&str]) {
    let _ = writeln!(out, "    {signature} {{");
    if !body.is_empty() {
        for line in prelude {
            let _ = writeln!(out, "        {line}");
        }
    }
    for stmt in body {
        render_statement(out, stmt, "        ");
    }
    out.push_str("    }\n");
}

/// Renders servlet-shaped Java source for a unit. Output is deterministic.
pub fn render_servlet_source(unit: &ServletUnit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "// Generated from {}", unit.source_page);
    if !unit.package.is_empty() {
        let _ = writeln!(out, "package {};", unit.package);
    }
    out.push('\n');
    for import in ["javax.servlet.*", "javax.servlet.http.*", "javax.servlet.jsp.*"] {
        let _ = writeln!(out, "import {import};");
    }
    for import in &unit.imports {
        let _ = writeln!(out, "import {import};");
    }
    out.push('\n');
    let _ = writeln!(out, "public final class {} extends HttpServlet {{", unit.class_name);
    out.push('\n');
    for decl in &unit.declarations {
        render_statement(&mut out, decl, "    ");
    }
    if !unit.declarations.is_empty() {
        out.push('\n');
    }
    render_method(&mut out, &format!("public void {INIT_METHOD}()"), &unit.init_body, &[]);
    out.push('\n');
    render_method(
        &mut out,
        &format!("public void {DESTROY_METHOD}()"),
        &unit.destroy_body,
        &[],
    );
    out.push('\n');
    render_method(
        &mut out,
        &format!(
            "public void {SERVICE_METHOD}(HttpServletRequest request, HttpServletResponse response) throws java.io.IOException, ServletException"
        ),
        &unit.service_body,
        &[
            "final PageContext pageContext = JspFactory.getDefaultFactory().getPageContext(this, request, response, null, true, 8192, true);",
            "final JspWriter out = pageContext.getOut();",
        ],
    );
    out.push_str("}\n");
    out
}
