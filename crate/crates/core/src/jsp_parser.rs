//! Tag-level parser for JSP pages.
//!
//! The output is a [`JspDocument`]: an ordered list of [`JspNode`]s whose
//! spans tile the source text exactly. Scripting elements (`<% %>`, `<%! %>`,
//! `<%= %>`), directives (`<%@ %>` and the `jsp:directive.*` XML forms), JSP
//! comments, standard actions (`jsp:*`), prefixed custom actions and HTML
//! tags each get their own node kind; everything else is template text.
//!
//! HTML is tokenized flatly: start tags and end tags are independent sibling
//! nodes. JSP actions with a body are nested, with their content in
//! `children`. An action whose end tag never shows up is unwound into a bare
//! start-tag node followed by its would-be children.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Half-open byte range `[start, end)` into a page's source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    TemplateText,
    Scriptlet,
    Declaration,
    Expression,
    Directive,
    StandardAction,
    CustomAction,
    HtmlElement,
    Comment,
}

impl NodeKind {
    pub fn is_scripting(self) -> bool {
        matches!(self, NodeKind::Scriptlet | NodeKind::Declaration | NodeKind::Expression)
    }

    pub fn is_element(self) -> bool {
        matches!(
            self,
            NodeKind::Directive | NodeKind::StandardAction | NodeKind::CustomAction | NodeKind::HtmlElement
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub value: String,
    /// True iff the value embeds `<%=` or `${`.
    pub dynamic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JspNode {
    pub kind: NodeKind,
    /// Tag or directive name as written, e.g. `jsp:include`, `FORM`, `page`.
    /// Empty for text, scripting and comment nodes.
    pub name: String,
    pub attributes: Vec<Attribute>,
    /// Raw inner text of scripting elements, comments and template text.
    pub body: String,
    pub children: Vec<JspNode>,
    pub span: Span,
    /// The start tag alone; equals `span` for nodes without children.
    pub head: Span,
    /// The matching end tag of a nested action.
    pub tail: Option<Span>,
    /// This node is a bare end tag such as `</form>`.
    pub end_tag: bool,
    pub self_closing: bool,
}

impl JspNode {
    fn leaf(kind: NodeKind, span: Span, body: String) -> Self {
        JspNode {
            kind,
            name: String::new(),
            attributes: Vec::new(),
            body,
            children: Vec::new(),
            span,
            head: span,
            tail: None,
            end_tag: false,
            self_closing: false,
        }
    }

    /// Looks up an attribute. HTML attribute names compare ASCII
    /// case-insensitively, JSP ones exactly.
    pub fn attr(&self, name: &str) -> Option<&Attribute> {
        if self.kind == NodeKind::HtmlElement {
            self.attributes.iter().find(|a| a.name.eq_ignore_ascii_case(name))
        } else {
            self.attributes.iter().find(|a| a.name == name)
        }
    }

    pub fn attr_value(&self, name: &str) -> Option<&str> {
        self.attr(name).map(|a| a.value.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JspDocument {
    /// Context-relative, `/`-prefixed path of the page.
    pub page_path: String,
    pub nodes: Vec<JspNode>,
    /// Length of `source` in bytes.
    pub source_length: usize,
    pub source: String,
}

impl JspDocument {
    pub fn text(&self, span: Span) -> &str {
        &self.source[span.start..span.end]
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unterminated scripting element starting at byte {offset}")]
    UnterminatedScriptlet { offset: usize },
    #[error("unterminated JSP comment starting at byte {offset}")]
    UnterminatedComment { offset: usize },
    #[error("unclosed quote in attribute `{name}` at byte {offset}")]
    MalformedAttribute { offset: usize, name: String },
    #[error("duplicate attribute `{name}` at byte {offset}")]
    DuplicateAttribute { offset: usize, name: String },
    #[error("invalid page path `{0}`")]
    InvalidPagePath(String),
    #[error("unknown encoding label `{0}`")]
    UnknownEncoding(String),
}

/// Decodes raw page bytes. `encoding` is a WHATWG label such as
/// `iso-8859-1`; UTF-8 is the default. The flag reports whether any bytes
/// had to be replaced.
pub fn decode_source(bytes: &[u8], encoding: Option<&str>) -> Result<(String, bool), ParseError> {
    let enc = match encoding {
        None => encoding_rs::UTF_8,
        Some(label) => encoding_rs::Encoding::for_label(label.trim().as_bytes())
            .ok_or_else(|| ParseError::UnknownEncoding(label.to_string()))?,
    };
    let (text, _, had_errors) = enc.decode(bytes);
    Ok((text.into_owned(), had_errors))
}

/// Parses one page. `page_path` is made context-relative (leading `/`,
/// forward slashes).
pub fn parse_jsp(source: &str, page_path: &str) -> Result<JspDocument, ParseError> {
    let trimmed = page_path.trim();
    if trimmed.is_empty() {
        return Err(ParseError::InvalidPagePath(page_path.to_string()));
    }
    let page_path = crate::paths::normalize_path(&trimmed.replace('\\', "/"));

    let mut parser = Parser {
        src: source,
        pos: 0,
        text_start: None,
        in_html_comment: false,
        stack: Vec::new(),
        top: Vec::new(),
    };
    parser.run()?;
    Ok(JspDocument {
        page_path,
        nodes: parser.top,
        source_length: source.len(),
        source: source.to_string(),
    })
}

/// All nodes whose kind is in `kinds`, depth-first in document order.
pub fn elements_of<'d>(doc: &'d JspDocument, kinds: &[NodeKind]) -> Vec<&'d JspNode> {
    fn walk<'d>(nodes: &'d [JspNode], kinds: &[NodeKind], out: &mut Vec<&'d JspNode>) {
        for n in nodes {
            if kinds.contains(&n.kind) {
                out.push(n);
            }
            walk(&n.children, kinds, out);
        }
    }
    let mut out = Vec::new();
    walk(&doc.nodes, kinds, &mut out);
    out
}

fn classify_name(name: &str) -> NodeKind {
    if name.starts_with("jsp:directive.") {
        NodeKind::Directive
    } else if name.starts_with("jsp:") {
        NodeKind::StandardAction
    } else if name.contains(':') {
        NodeKind::CustomAction
    } else {
        NodeKind::HtmlElement
    }
}

fn is_dynamic(value: &str) -> bool {
    value.contains("<%=") || value.contains("${")
}

fn is_name_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b':' | b'.' | b'_' | b'-')
}

struct Frame {
    node: JspNode,
    children: Vec<JspNode>,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    text_start: Option<usize>,
    in_html_comment: bool,
    stack: Vec<Frame>,
    top: Vec<JspNode>,
}

enum TagOutcome {
    Parsed,
    NotATag,
}

impl<'a> Parser<'a> {
    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn run(&mut self) -> Result<(), ParseError> {
        while self.pos < self.src.len() {
            let rest = self.rest();
            if self.in_html_comment {
                if rest.starts_with("-->") {
                    self.in_html_comment = false;
                    self.consume_text(3);
                    continue;
                }
                if rest.starts_with("<%--") {
                    self.jsp_comment()?;
                } else if rest.starts_with("<%") {
                    self.scripting()?;
                } else {
                    self.consume_text_char();
                }
                continue;
            }
            if rest.starts_with("<%--") {
                self.jsp_comment()?;
            } else if rest.starts_with("<%") {
                self.scripting()?;
            } else if rest.starts_with("<!--") {
                self.in_html_comment = true;
                self.consume_text(4);
            } else if rest.starts_with("</") {
                if let TagOutcome::NotATag = self.end_tag() {
                    self.consume_text(2);
                }
            } else if rest.len() > 1 && rest.as_bytes()[0] == b'<' && rest.as_bytes()[1].is_ascii_alphabetic() {
                if let TagOutcome::NotATag = self.start_tag()? {
                    self.consume_text(1);
                }
            } else {
                self.consume_text_char();
            }
        }
        self.flush_text();
        // Unwind actions that were never closed.
        while let Some(frame) = self.stack.pop() {
            self.unwind(frame);
        }
        Ok(())
    }

    fn consume_text(&mut self, n: usize) {
        if self.text_start.is_none() {
            self.text_start = Some(self.pos);
        }
        self.pos += n;
    }

    fn consume_text_char(&mut self) {
        // Jump to the next '<' in one step; everything before it is text.
        let rest = self.rest();
        let first = rest.chars().next().map_or(1, char::len_utf8);
        let tail = &rest[first..];
        let next = if self.in_html_comment {
            tail.find(['<', '-'])
        } else {
            tail.find('<')
        };
        self.consume_text(first + next.unwrap_or(tail.len()));
    }

    fn flush_text(&mut self) {
        if let Some(start) = self.text_start.take() {
            let span = Span::new(start, self.pos);
            let node = JspNode::leaf(NodeKind::TemplateText, span, self.src[start..self.pos].to_string());
            self.push(node);
        }
    }

    fn push(&mut self, node: JspNode) {
        match self.stack.last_mut() {
            Some(frame) => frame.children.push(node),
            None => self.top.push(node),
        }
    }

    fn emit(&mut self, node: JspNode) {
        self.flush_text();
        self.push(node);
    }

    fn unwind(&mut self, frame: Frame) {
        let Frame { mut node, children } = frame;
        node.span = node.head;
        self.push(node);
        for child in children {
            self.push(child);
        }
    }

    fn jsp_comment(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        let inner_start = start + 4;
        let Some(rel) = self.src[inner_start..].find("--%>") else {
            return Err(ParseError::UnterminatedComment { offset: start });
        };
        let inner_end = inner_start + rel;
        let end = inner_end + 4;
        let node = JspNode::leaf(
            NodeKind::Comment,
            Span::new(start, end),
            self.src[inner_start..inner_end].to_string(),
        );
        self.emit(node);
        self.pos = end;
        Ok(())
    }

    fn scripting(&mut self) -> Result<(), ParseError> {
        let start = self.pos;
        let rest = self.rest();
        let (kind, open_len) = match rest.as_bytes().get(2) {
            Some(b'!') => (NodeKind::Declaration, 3),
            Some(b'=') => (NodeKind::Expression, 3),
            Some(b'@') => (NodeKind::Directive, 3),
            _ => (NodeKind::Scriptlet, 2),
        };
        let inner_start = start + open_len;
        let Some(rel) = self.src[inner_start..].find("%>") else {
            return Err(ParseError::UnterminatedScriptlet { offset: start });
        };
        let inner_end = inner_start + rel;
        let end = inner_end + 2;
        let span = Span::new(start, end);
        let inner = &self.src[inner_start..inner_end];
        let node = if kind == NodeKind::Directive {
            let lead = inner.len() - inner.trim_start().len();
            let name_len = inner[lead..].bytes().take_while(|b| is_name_byte(*b)).count();
            let name = inner[lead..lead + name_len].to_string();
            let attr_from = inner_start + lead + name_len;
            let (attributes, _) = parse_attributes(self.src, attr_from, Some(inner_end))?;
            JspNode {
                kind,
                name,
                attributes,
                body: inner.to_string(),
                ..JspNode::leaf(kind, span, String::new())
            }
        } else {
            JspNode::leaf(kind, span, inner.to_string())
        };
        self.emit(node);
        self.pos = end;
        Ok(())
    }

    fn start_tag(&mut self) -> Result<TagOutcome, ParseError> {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let name_start = start + 1;
        let mut i = name_start;
        while i < bytes.len() && is_name_byte(bytes[i]) {
            i += 1;
        }
        // The name must be followed by whitespace, `>` or `/`.
        if i < bytes.len() && !(bytes[i].is_ascii_whitespace() || bytes[i] == b'>' || bytes[i] == b'/') {
            return Ok(TagOutcome::NotATag);
        }
        let name = self.src[name_start..i].to_string();
        let Some((attributes, close)) = parse_tag_attributes(self.src, i)? else {
            return Ok(TagOutcome::NotATag);
        };
        let (end, self_closing) = close;
        let kind = classify_name(&name);
        let span = Span::new(start, end);
        // HTML is template text, so scripting inside an HTML tag still
        // executes; JSP action attributes keep theirs as request-time values.
        let children = if kind == NodeKind::HtmlElement {
            embedded_scripting(self.src, span)
        } else {
            Vec::new()
        };
        let node = JspNode {
            kind,
            name,
            attributes,
            self_closing,
            children,
            ..JspNode::leaf(kind, span, String::new())
        };
        self.flush_text();
        self.pos = end;
        if kind != NodeKind::HtmlElement && !self_closing {
            self.stack.push(Frame {
                node,
                children: Vec::new(),
            });
        } else {
            self.push(node);
        }
        Ok(TagOutcome::Parsed)
    }

    fn end_tag(&mut self) -> TagOutcome {
        let start = self.pos;
        let bytes = self.src.as_bytes();
        let name_start = start + 2;
        let mut i = name_start;
        while i < bytes.len() && is_name_byte(bytes[i]) {
            i += 1;
        }
        if i == name_start || !bytes[name_start].is_ascii_alphabetic() {
            return TagOutcome::NotATag;
        }
        let name_end = i;
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= bytes.len() || bytes[i] != b'>' {
            return TagOutcome::NotATag;
        }
        let end = i + 1;
        let name = &self.src[name_start..name_end];
        let kind = classify_name(name);
        let span = Span::new(start, end);
        self.flush_text();
        self.pos = end;

        if kind != NodeKind::HtmlElement {
            if let Some(depth) = self.stack.iter().rposition(|f| f.node.name == name) {
                while self.stack.len() > depth + 1 {
                    let frame = self.stack.pop().expect("frame above match");
                    self.unwind(frame);
                }
                let Frame { mut node, children } = self.stack.pop().expect("matched frame");
                node.span = Span::new(node.head.start, end);
                node.tail = Some(span);
                node.children = children;
                self.push(node);
                return TagOutcome::Parsed;
            }
        }
        let node = JspNode {
            kind,
            name: name.to_string(),
            end_tag: true,
            ..JspNode::leaf(kind, span, String::new())
        };
        self.push(node);
        TagOutcome::Parsed
    }
}

/// Scripting elements embedded in the tag at `span`, as leaf nodes.
fn embedded_scripting(src: &str, span: Span) -> Vec<JspNode> {
    let mut out = Vec::new();
    let mut at = span.start;
    while let Some(rel) = src[at..span.end].find("<%") {
        let start = at + rel;
        let Some(close) = src[start + 2..span.end].find("%>") else {
            break;
        };
        let end = start + 2 + close + 2;
        let inner = &src[start + 2..end - 2];
        let (kind, body) = if let Some(c) = inner.strip_prefix("--").and_then(|c| c.strip_suffix("--")) {
            (NodeKind::Comment, c)
        } else {
            match inner.as_bytes().first() {
                Some(b'!') => (NodeKind::Declaration, &inner[1..]),
                Some(b'=') => (NodeKind::Expression, &inner[1..]),
                Some(b'@') => {
                    at = end;
                    continue;
                }
                _ => (NodeKind::Scriptlet, inner),
            }
        };
        out.push(JspNode::leaf(kind, Span::new(start, end), body.to_string()));
        at = end;
    }
    out
}

/// Skips an embedded `<% ... %>` starting at `i`, returning the index after
/// it, or `None` when it is not closed.
fn skip_embedded(bytes: &[u8], src: &str, i: usize) -> Option<usize> {
    if bytes[i] == b'<' && bytes.get(i + 1) == Some(&b'%') {
        src[i + 2..].find("%>").map(|rel| i + 2 + rel + 2)
    } else {
        Some(i + 1)
    }
}

type TagClose = (usize, bool);

/// Parses attributes of an HTML/XML style tag starting at `from` and up to
/// the closing `>` or `/>`. Returns `None` when the input ends before the
/// tag closes (the caller then treats the `<` as text).
fn parse_tag_attributes(src: &str, from: usize) -> Result<Option<(Vec<Attribute>, TagClose)>, ParseError> {
    let (attrs, stop) = parse_attributes(src, from, None)?;
    Ok(stop.map(|close| (attrs, close)))
}

/// Shared attribute scanner. With `limit` set, scanning stops at that byte
/// (directive bodies); otherwise it stops at `>` / `/>` and reports where
/// the tag ended.
fn parse_attributes(
    src: &str,
    from: usize,
    limit: Option<usize>,
) -> Result<(Vec<Attribute>, Option<TagClose>), ParseError> {
    let bytes = src.as_bytes();
    let end = limit.unwrap_or(bytes.len());
    let in_tag = limit.is_none();
    let mut attrs: Vec<Attribute> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    let mut i = from;
    loop {
        while i < end && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i >= end {
            return Ok((attrs, None));
        }
        if in_tag {
            if bytes[i] == b'>' {
                return Ok((attrs, Some((i + 1, false))));
            }
            if bytes[i] == b'/' {
                if bytes.get(i + 1) == Some(&b'>') {
                    return Ok((attrs, Some((i + 2, true))));
                }
                i += 1;
                continue;
            }
        }
        let name_start = i;
        while i < end
            && !bytes[i].is_ascii_whitespace()
            && bytes[i] != b'='
            && !(in_tag && (bytes[i] == b'>' || bytes[i] == b'/'))
        {
            if bytes[i] == b'<' && bytes.get(i + 1) == Some(&b'%') {
                // `<%= cond ? "checked" : "" %>` in attribute position.
                match skip_embedded(bytes, src, i) {
                    Some(next) => i = next.min(end),
                    None => return Err(ParseError::UnterminatedScriptlet { offset: i }),
                }
            } else {
                i += utf8_len(bytes[i]);
            }
        }
        if i == name_start {
            // Stray character (e.g. a lone quote); skip it.
            i += utf8_len(bytes[i]);
            continue;
        }
        let name = src[name_start..i].to_string();
        let mut j = i;
        while j < end && bytes[j].is_ascii_whitespace() {
            j += 1;
        }
        let value = if j < end && bytes[j] == b'=' {
            j += 1;
            while j < end && bytes[j].is_ascii_whitespace() {
                j += 1;
            }
            if j < end && (bytes[j] == b'"' || bytes[j] == b'\'') {
                let quote = bytes[j];
                let value_start = j + 1;
                let mut k = value_start;
                loop {
                    if k >= end {
                        return Err(ParseError::MalformedAttribute {
                            offset: name_start,
                            name,
                        });
                    }
                    if bytes[k] == quote {
                        break;
                    }
                    k = match skip_embedded(bytes, src, k) {
                        Some(next) => next,
                        None => {
                            return Err(ParseError::MalformedAttribute {
                                offset: name_start,
                                name,
                            })
                        }
                    };
                }
                i = k + 1;
                src[value_start..k].to_string()
            } else {
                let value_start = j;
                let mut k = j;
                while k < end && !bytes[k].is_ascii_whitespace() && !(in_tag && bytes[k] == b'>') {
                    k = match skip_embedded(bytes, src, k) {
                        Some(next) => next.min(end),
                        None => return Err(ParseError::UnterminatedScriptlet { offset: k }),
                    };
                }
                i = k;
                src[value_start..k].to_string()
            }
        } else {
            String::new()
        };
        if !seen.insert(name.to_ascii_lowercase()) {
            return Err(ParseError::DuplicateAttribute {
                offset: name_start,
                name,
            });
        }
        attrs.push(Attribute {
            dynamic: is_dynamic(&value),
            name,
            value,
        });
    }
}

fn utf8_len(first: u8) -> usize {
    match first {
        b if b < 0x80 => 1,
        b if b >= 0xF0 => 4,
        b if b >= 0xE0 => 3,
        _ => 2,
    }
}
