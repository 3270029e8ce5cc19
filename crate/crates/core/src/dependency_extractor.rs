//! Extraction of page-to-page URL references from the ten dependency-bearing
//! tag/attribute pairs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diagnostics::Diagnostic;
use crate::jsp_parser::{JspDocument, JspNode, NodeKind, Span};

/// The tag forms that carry a dependency on another server page.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TagKind {
    #[serde(rename = "form")]
    Form,
    #[serde(rename = "jsp:include")]
    JspInclude,
    #[serde(rename = "include-directive")]
    IncludeDirective,
    #[serde(rename = "jsp:directive.include")]
    XmlIncludeDirective,
    #[serde(rename = "jsp:forward")]
    JspForward,
    #[serde(rename = "page-directive-errorPage")]
    PageDirectiveErrorPage,
    #[serde(rename = "jsp:directive.page-errorPage")]
    XmlPageDirectiveErrorPage,
    #[serde(rename = "a-href")]
    AnchorHref,
    #[serde(rename = "c:redirect")]
    CoreRedirect,
    #[serde(rename = "c:url")]
    CoreUrl,
}

impl TagKind {
    pub const ALL: [TagKind; 10] = [
        TagKind::Form,
        TagKind::JspInclude,
        TagKind::IncludeDirective,
        TagKind::XmlIncludeDirective,
        TagKind::JspForward,
        TagKind::PageDirectiveErrorPage,
        TagKind::XmlPageDirectiveErrorPage,
        TagKind::AnchorHref,
        TagKind::CoreRedirect,
        TagKind::CoreUrl,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TagKind::Form => "form",
            TagKind::JspInclude => "jsp:include",
            TagKind::IncludeDirective => "include-directive",
            TagKind::XmlIncludeDirective => "jsp:directive.include",
            TagKind::JspForward => "jsp:forward",
            TagKind::PageDirectiveErrorPage => "page-directive-errorPage",
            TagKind::XmlPageDirectiveErrorPage => "jsp:directive.page-errorPage",
            TagKind::AnchorHref => "a-href",
            TagKind::CoreRedirect => "c:redirect",
            TagKind::CoreUrl => "c:url",
        }
    }

    /// The attribute holding the URL.
    pub fn attribute(self) -> &'static str {
        match self {
            TagKind::Form => "action",
            TagKind::JspInclude | TagKind::JspForward => "page",
            TagKind::IncludeDirective | TagKind::XmlIncludeDirective => "file",
            TagKind::PageDirectiveErrorPage | TagKind::XmlPageDirectiveErrorPage => "errorPage",
            TagKind::AnchorHref => "href",
            TagKind::CoreRedirect => "url",
            TagKind::CoreUrl => "value",
        }
    }
}

impl fmt::Display for TagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TagKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TagKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown tag kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HttpMethod {
    Get,
    Post,
    Put,
}

impl HttpMethod {
    fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "get" => Some(HttpMethod::Get),
            "post" => Some(HttpMethod::Post),
            "put" => Some(HttpMethod::Put),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrlRef {
    pub source_page: String,
    pub tag_kind: TagKind,
    pub attribute: String,
    pub raw_url: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub http_method: Option<HttpMethod>,
    pub dynamic: bool,
    pub span: Span,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Extraction {
    pub refs: Vec<UrlRef>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Maps a node to its dependency row. HTML names match case-insensitively,
/// JSP and prefixed names exactly. End tags never match.
pub fn classify_tag(node: &JspNode) -> Option<(TagKind, &'static str)> {
    if node.end_tag {
        return None;
    }
    let kind = match node.kind {
        NodeKind::HtmlElement if node.name.eq_ignore_ascii_case("form") => TagKind::Form,
        NodeKind::HtmlElement if node.name.eq_ignore_ascii_case("a") => TagKind::AnchorHref,
        NodeKind::StandardAction => match node.name.as_str() {
            "jsp:include" => TagKind::JspInclude,
            "jsp:forward" => TagKind::JspForward,
            _ => return None,
        },
        NodeKind::Directive => match node.name.as_str() {
            "include" => TagKind::IncludeDirective,
            "page" => TagKind::PageDirectiveErrorPage,
            "jsp:directive.include" => TagKind::XmlIncludeDirective,
            "jsp:directive.page" => TagKind::XmlPageDirectiveErrorPage,
            _ => return None,
        },
        NodeKind::CustomAction => match node.name.as_str() {
            "c:redirect" => TagKind::CoreRedirect,
            "c:url" => TagKind::CoreUrl,
            _ => return None,
        },
        _ => return None,
    };
    Some((kind, kind.attribute()))
}

fn is_dynamic_url(url: &str) -> bool {
    url.contains("<%=") || url.contains("${")
}

/// Every dependency reference in the page, in document order.
pub fn extract_url_refs(doc: &JspDocument) -> Extraction {
    let mut out = Extraction::default();
    visit(doc, &doc.nodes, &mut out);
    out
}

fn visit(doc: &JspDocument, nodes: &[JspNode], out: &mut Extraction) {
    for node in nodes {
        if let Some((kind, attribute)) = classify_tag(node) {
            extract_one(doc, node, kind, attribute, out);
        }
        visit(doc, &node.children, out);
    }
}

fn extract_one(doc: &JspDocument, node: &JspNode, kind: TagKind, attribute: &'static str, out: &mut Extraction) {
    let value = node.attr_value(attribute).map(str::trim);
    let raw_url = match value {
        Some(v) if !v.is_empty() => v,
        // Most page directives carry no errorPage at all.
        _ if matches!(
            kind,
            TagKind::PageDirectiveErrorPage | TagKind::XmlPageDirectiveErrorPage
        ) =>
        {
            return
        }
        found => {
            let what = if found.is_some() { "empty" } else { "missing" };
            out.diagnostics.push(
                Diagnostic::info(
                    "missing-url-attribute",
                    format!("<{}> has {what} `{attribute}` attribute", node.name),
                )
                .in_file(doc.page_path.clone())
                .at(node.head),
            );
            return;
        }
    };
    let http_method = if kind == TagKind::Form {
        match node.attr_value("method") {
            None => Some(HttpMethod::Get),
            Some(m) => match HttpMethod::parse(m) {
                Some(method) => Some(method),
                None => {
                    out.diagnostics.push(
                        Diagnostic::info("unknown-form-method", format!("form method `{m}` is not get/post/put"))
                            .in_file(doc.page_path.clone())
                            .at(node.head),
                    );
                    None
                }
            },
        }
    } else {
        None
    };
    out.refs.push(UrlRef {
        source_page: doc.page_path.clone(),
        tag_kind: kind,
        attribute: attribute.to_string(),
        raw_url: raw_url.to_string(),
        http_method,
        dynamic: is_dynamic_url(raw_url),
        span: node.head,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jsp_parser::parse_jsp;

    fn refs(src: &str) -> Extraction {
        extract_url_refs(&parse_jsp(src, "/p.jsp").unwrap())
    }

    #[test]
    fn form_with_method() {
        let ex = refs(r#"<form action="/myPage.jsp" method="get">"#);
        assert_eq!(ex.refs.len(), 1);
        let r = &ex.refs[0];
        assert_eq!(r.tag_kind, TagKind::Form);
        assert_eq!(r.attribute, "action");
        assert_eq!(r.raw_url, "/myPage.jsp");
        assert_eq!(r.http_method, Some(HttpMethod::Get));
        assert!(!r.dynamic);
    }

    #[test]
    fn form_method_defaults_to_get() {
        let ex = refs(r#"<FORM ACTION="x.jsp" METHOD="POST"><form action="y.jsp">"#);
        assert_eq!(ex.refs[0].http_method, Some(HttpMethod::Post));
        assert_eq!(ex.refs[1].http_method, Some(HttpMethod::Get));
    }

    #[test]
    fn page_directive_without_error_page_is_silent() {
        let ex = refs(r#"<%@ page import="java.util.*" %>"#);
        assert!(ex.refs.is_empty());
        assert!(ex.diagnostics.is_empty());
    }

    #[test]
    fn missing_attribute_is_a_diagnostic() {
        let ex = refs(r#"<a name="top">x</a><jsp:include flush="true"/>"#);
        assert!(ex.refs.is_empty());
        assert_eq!(ex.diagnostics.len(), 2);
    }

    #[test]
    fn classify() {
        let doc = parse_jsp(
            r#"<A href="x"><jsp:forward page="y"/><c:import url="z"/></A>"#,
            "/c.jsp",
        )
        .unwrap();
        assert_eq!(classify_tag(&doc.nodes[0]), Some((TagKind::AnchorHref, "href")));
        assert_eq!(classify_tag(&doc.nodes[1]), Some((TagKind::JspForward, "page")));
        assert_eq!(classify_tag(&doc.nodes[2]), None);
        assert_eq!(classify_tag(&doc.nodes[3]), None);
    }

    #[test]
    fn jsp_names_are_case_sensitive() {
        let ex = refs(r#"<JSP:INCLUDE page="/x.jsp"/><C:URL value="/y"/>"#);
        assert!(ex.refs.is_empty());
    }

    #[test]
    fn dynamic_and_external() {
        let ex =
            refs(r#"<a href="${ctx}/x.jsp">a</a><a href="https://www.example.org">b</a><c:redirect url="<%= u %>"/>"#);
        let flags: Vec<_> = ex.refs.iter().map(|r| r.dynamic).collect();
        assert_eq!(flags, vec![true, false, true]);
        assert_eq!(ex.refs[1].raw_url, "https://www.example.org");
    }

    #[test]
    fn raw_url_is_preserved() {
        let ex = refs(r#"<jsp:include page="/myPage.jsp." flush="true" />"#);
        assert_eq!(ex.refs[0].raw_url, "/myPage.jsp.");
    }

    #[test]
    fn nested_refs_in_order() {
        let ex = refs(r#"<c:if test="t"><jsp:include page="/a.jsp"/></c:if><a href="b.jsp">b</a>"#);
        let urls: Vec<_> = ex.refs.iter().map(|r| r.raw_url.as_str()).collect();
        assert_eq!(urls, vec!["/a.jsp", "b.jsp"]);
    }

    #[test]
    fn tag_kind_strings_round_trip() {
        for kind in TagKind::ALL {
            assert_eq!(kind.as_str().parse::<TagKind>().unwrap(), kind);
            let json = serde_json::to_string(&kind).unwrap();
            assert_eq!(json, format!("\"{}\"", kind.as_str()));
        }
    }
}
