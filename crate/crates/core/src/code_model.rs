//! A small KDM code-model subset: `ClassUnit`, `MethodUnit`, `BlockUnit`,
//! code elements and `CodeRelationship` edges.
//!
//! The model is discovered from translated [`ServletUnit`]s and then
//! augmented with page dependencies by [`add_method_call`], which appends a
//! `newCall` element carrying a relationship to the caller's `_jspService`
//! block.

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dependency_extractor::TagKind;
use crate::jsp_parser::Span;
use crate::paths::normalize_path;
use crate::servlet_translator::{
    CodeStatement, ServletUnit, StatementKind, DESTROY_METHOD, INIT_METHOD, SERVICE_METHOD,
};

/// Index of a [`ClassUnit`] in [`KdmModel::class_units`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub usize);

/// Index of a [`CodeRelationship`] in [`KdmModel::relationships`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RelationshipId(pub usize);

/// What a relationship stands for: one of the dependency tag kinds, or a
/// generic call.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum RelationKind {
    Tag(TagKind),
    Call,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Tag(kind) => kind.as_str(),
            RelationKind::Call => "call",
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<TagKind> for RelationKind {
    fn from(kind: TagKind) -> Self {
        RelationKind::Tag(kind)
    }
}

impl From<RelationKind> for String {
    fn from(kind: RelationKind) -> Self {
        kind.as_str().to_string()
    }
}

impl TryFrom<String> for RelationKind {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        if s == "call" {
            Ok(RelationKind::Call)
        } else {
            s.parse().map(RelationKind::Tag)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ElementKind {
    InlineCode,
    TemplateEmit,
    BeanInstantiation,
    PropertyGet,
    PropertySet,
    TagHandlerCall,
    ExpressionEmit,
    /// An element added by dependency injection.
    Call,
}

impl ElementKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ElementKind::Call => "Call",
            ElementKind::InlineCode => StatementKind::InlineCode.as_str(),
            ElementKind::TemplateEmit => StatementKind::TemplateEmit.as_str(),
            ElementKind::BeanInstantiation => StatementKind::BeanInstantiation.as_str(),
            ElementKind::PropertyGet => StatementKind::PropertyGet.as_str(),
            ElementKind::PropertySet => StatementKind::PropertySet.as_str(),
            ElementKind::TagHandlerCall => StatementKind::TagHandlerCall.as_str(),
            ElementKind::ExpressionEmit => StatementKind::ExpressionEmit.as_str(),
        }
    }
}

impl From<StatementKind> for ElementKind {
    fn from(kind: StatementKind) -> Self {
        match kind {
            StatementKind::InlineCode => ElementKind::InlineCode,
            StatementKind::TemplateEmit => ElementKind::TemplateEmit,
            StatementKind::BeanInstantiation => ElementKind::BeanInstantiation,
            StatementKind::PropertyGet => ElementKind::PropertyGet,
            StatementKind::PropertySet => ElementKind::PropertySet,
            StatementKind::TagHandlerCall => ElementKind::TagHandlerCall,
            StatementKind::ExpressionEmit => ElementKind::ExpressionEmit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeElement {
    pub name: String,
    pub kind: ElementKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_span: Option<Span>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<RelationshipId>,
}

impl From<&CodeStatement> for CodeElement {
    fn from(stmt: &CodeStatement) -> Self {
        CodeElement {
            name: stmt.text.clone(),
            kind: stmt.kind.into(),
            origin_span: Some(stmt.origin_span),
            relations: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockUnit {
    pub elements: Vec<CodeElement>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<RelationshipId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodUnit {
    pub name: String,
    pub block: BlockUnit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassUnit {
    pub id: ClassId,
    pub name: String,
    pub package: String,
    /// Set for classes translated from a JSP page.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source_page: Option<String>,
    /// Class-level members (JSP declarations).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub members: Vec<CodeElement>,
    pub code_elements: Vec<MethodUnit>,
}

impl ClassUnit {
    pub fn qualified_name(&self) -> String {
        if self.package.is_empty() {
            self.name.clone()
        } else {
            format!("{}.{}", self.package, self.name)
        }
    }

    pub fn method(&self, name: &str) -> Option<&MethodUnit> {
        self.code_elements.iter().find(|m| m.name == name)
    }

    fn method_mut(&mut self, name: &str) -> Option<&mut MethodUnit> {
        self.code_elements.iter_mut().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PackageUnit {
    pub name: String,
    pub classes: Vec<ClassId>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeRelationship {
    pub id: RelationshipId,
    pub from: ClassId,
    pub to: ClassId,
    pub kind: RelationKind,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KdmModel {
    pub name: String,
    pub packages: Vec<PackageUnit>,
    pub class_units: Vec<ClassUnit>,
    pub relationships: Vec<CodeRelationship>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate class name `{0}`")]
    DuplicateClassName(String),
    #[error("class `{0}` has no `_jspService` method")]
    MissingServiceMethod(String),
    #[error("no class unit with id {0}")]
    UnknownClass(usize),
    #[error("inconsistent model: {0}")]
    Integrity(String),
    #[error("invalid model document: {0}")]
    Decode(String),
}

/// Outcome of [`add_method_call`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "status", content = "relationship")]
pub enum MutationReport {
    Added(RelationshipId),
    /// The `(from, to, kind)` triple already existed; nothing changed.
    Duplicate(RelationshipId),
}

pub const NEW_CALL: &str = "newCall";

impl KdmModel {
    pub fn new(name: impl Into<String>) -> Self {
        KdmModel {
            name: name.into(),
            packages: Vec::new(),
            class_units: Vec::new(),
            relationships: Vec::new(),
        }
    }

    pub fn class(&self, id: ClassId) -> Option<&ClassUnit> {
        self.class_units.get(id.0)
    }

    pub fn class_by_qualified_name(&self, qualified: &str) -> Option<&ClassUnit> {
        self.class_units.iter().find(|c| c.qualified_name() == qualified)
    }

    /// Adds a class and registers it in its package. Qualified names must
    /// be unique.
    pub fn add_class(
        &mut self,
        package: &str,
        name: &str,
        source_page: Option<String>,
        members: Vec<CodeElement>,
        code_elements: Vec<MethodUnit>,
    ) -> Result<ClassId, ModelError> {
        let qualified = if package.is_empty() {
            name.to_string()
        } else {
            format!("{package}.{name}")
        };
        if self.class_by_qualified_name(&qualified).is_some() {
            return Err(ModelError::DuplicateClassName(qualified));
        }
        let id = ClassId(self.class_units.len());
        self.class_units.push(ClassUnit {
            id,
            name: name.to_string(),
            package: package.to_string(),
            source_page,
            members,
            code_elements,
        });
        match self.packages.iter_mut().find(|p| p.name == package) {
            Some(p) => p.classes.push(id),
            None => self.packages.push(PackageUnit {
                name: package.to_string(),
                classes: vec![id],
            }),
        }
        Ok(id)
    }

    /// Adds a plain servlet class known only by its qualified name. It has
    /// no methods since its source is not analyzed.
    pub fn add_servlet_class(&mut self, qualified_name: &str) -> Result<ClassId, ModelError> {
        let (package, name) = match qualified_name.rfind('.') {
            Some(i) => (&qualified_name[..i], &qualified_name[i + 1..]),
            None => ("", qualified_name),
        };
        self.add_class(package, name, None, Vec::new(), Vec::new())
    }

    pub fn find_relationship(&self, from: ClassId, to: ClassId, kind: RelationKind) -> Option<&CodeRelationship> {
        self.relationships
            .iter()
            .find(|r| r.from == from && r.to == to && r.kind == kind)
    }

    /// Checks ids, references and naming rules.
    pub fn check_integrity(&self) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::Integrity(msg));
        let mut names = HashSet::new();
        for (i, class) in self.class_units.iter().enumerate() {
            if class.id != ClassId(i) {
                return bad(format!("class at index {i} has id {}", class.id.0));
            }
            if !names.insert(class.qualified_name()) {
                return Err(ModelError::DuplicateClassName(class.qualified_name()));
            }
            if class.source_page.is_some() && class.method(SERVICE_METHOD).is_none() {
                return Err(ModelError::MissingServiceMethod(class.name.clone()));
            }
            let elements = class
                .members
                .iter()
                .chain(class.code_elements.iter().flat_map(|m| m.block.elements.iter()));
            let block_refs = class.code_elements.iter().flat_map(|m| m.block.relations.iter());
            for rel in elements.flat_map(|e| e.relations.iter()).chain(block_refs) {
                if rel.0 >= self.relationships.len() {
                    return bad(format!(
                        "class `{}` references missing relationship {}",
                        class.name, rel.0
                    ));
                }
            }
        }
        let mut triples = HashSet::new();
        for (i, rel) in self.relationships.iter().enumerate() {
            if rel.id != RelationshipId(i) {
                return bad(format!("relationship at index {i} has id {}", rel.id.0));
            }
            if self.class(rel.from).is_none() || self.class(rel.to).is_none() {
                return bad(format!("relationship {i} has a dangling endpoint"));
            }
            if !triples.insert((rel.from, rel.to, rel.kind)) {
                return bad(format!("relationship {i} duplicates an earlier one"));
            }
        }
        for package in &self.packages {
            for id in &package.classes {
                if self.class(*id).is_none() {
                    return bad(format!("package `{}` lists missing class {}", package.name, id.0));
                }
            }
        }
        Ok(())
    }
}

fn method(name: &str, body: &[CodeStatement]) -> MethodUnit {
    MethodUnit {
        name: name.to_string(),
        block: BlockUnit {
            elements: body.iter().map(CodeElement::from).collect(),
            relations: Vec::new(),
        },
    }
}

/// Builds the model for a set of translated pages: one class per unit with
/// `_jspInit`, `_jspService` and `_jspDestroy`.
pub fn discover_model(units: &[ServletUnit]) -> Result<KdmModel, ModelError> {
    let mut model = KdmModel::new("jsp-webapp");
    for unit in units {
        let methods = vec![
            method(INIT_METHOD, &unit.init_body),
            method(SERVICE_METHOD, &unit.service_body),
            method(DESTROY_METHOD, &unit.destroy_body),
        ];
        let members = unit.declarations.iter().map(CodeElement::from).collect();
        model.add_class(
            &unit.package,
            &unit.class_name,
            Some(unit.source_page.clone()),
            members,
            methods,
        )?;
    }
    Ok(model)
}

/// Sequential search for the class translated from `source_page`.
pub fn find_class_unit<'m>(model: &'m KdmModel, source_page: &str) -> Option<&'m ClassUnit> {
    let wanted = normalize_path(source_page);
    model
        .class_units
        .iter()
        .find(|c| c.source_page.as_deref().map(normalize_path).as_deref() == Some(wanted.as_str()))
}

/// Records that `caller` depends on `target` by appending a `newCall`
/// element to the caller's `_jspService` block. Existing `(from, to, kind)`
/// triples are not added twice.
pub fn add_method_call(
    model: &mut KdmModel,
    caller: ClassId,
    target: ClassId,
    kind: RelationKind,
) -> Result<MutationReport, ModelError> {
    if model.class(target).is_none() {
        return Err(ModelError::UnknownClass(target.0));
    }
    let caller_unit = model.class(caller).ok_or(ModelError::UnknownClass(caller.0))?;
    if caller_unit.method(SERVICE_METHOD).is_none() {
        return Err(ModelError::MissingServiceMethod(caller_unit.name.clone()));
    }
    if let Some(existing) = model.find_relationship(caller, target, kind) {
        return Ok(MutationReport::Duplicate(existing.id));
    }
    let id = RelationshipId(model.relationships.len());
    model.relationships.push(CodeRelationship {
        id,
        from: caller,
        to: target,
        kind,
        label: NEW_CALL.to_string(),
    });
    let service = model.class_units[caller.0]
        .method_mut(SERVICE_METHOD)
        .expect("checked above");
    service.block.elements.push(CodeElement {
        name: NEW_CALL.to_string(),
        kind: ElementKind::Call,
        origin_span: None,
        relations: vec![id],
    });
    service.block.relations.push(id);
    Ok(MutationReport::Added(id))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelFormat {
    Xmi,
    Json,
}

/// Serializes the model. Output only depends on the model's contents.
pub fn serialize_model(model: &KdmModel, format: ModelFormat) -> Vec<u8> {
    match format {
        ModelFormat::Json => {
            let mut bytes = serde_json::to_vec_pretty(model).expect("model is always serializable");
            bytes.push(b'\n');
            bytes
        }
        ModelFormat::Xmi => write_xmi(model).into_bytes(),
    }
}

/// Parses a JSON model and checks its integrity.
pub fn deserialize_model_json(bytes: &[u8]) -> Result<KdmModel, ModelError> {
    let model: KdmModel = serde_json::from_slice(bytes).map_err(|e| ModelError::Decode(e.to_string()))?;
    model.check_integrity()?;
    Ok(model)
}

pub fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            '\t' => out.push_str("&#9;"),
            // Not representable in XML 1.0.
            c if (c as u32) < 0x20 => out.push('\u{FFFD}'),
            c => out.push(c),
        }
    }
    out
}

fn class_xmi_id(id: ClassId) -> String {
    format!("c{}", id.0)
}

fn rel_xmi_id(id: RelationshipId) -> String {
    format!("r{}", id.0)
}

fn refs_attr(refs: &[RelationshipId]) -> String {
    refs.iter().map(|r| rel_xmi_id(*r)).collect::<Vec<_>>().join(" ")
}

fn write_element(out: &mut String, indent: &str, id: &str, element: &CodeElement) {
    let _ = write!(
        out,
        "{indent}<codeElement xmi:id=\"{id}\" xmi:type=\"code:CodeElement\" name=\"{}\" kind=\"{}\"",
        xml_escape(&element.name),
        element.kind.as_str()
    );
    if let Some(span) = element.origin_span {
        let _ = write!(out, " span=\"{}:{}\"", span.start, span.end);
    }
    if !element.relations.is_empty() {
        let _ = write!(out, " codeRelation=\"{}\"", refs_attr(&element.relations));
    }
    out.push_str("/>\n");
}

fn write_xmi(model: &KdmModel) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str(
        "<xmi:XMI xmi:version=\"2.1\" xmlns:xmi=\"http://www.omg.org/XMI\" \
         xmlns:kdm=\"http://www.omg.org/spec/KDM/1.3/kdm\" \
         xmlns:code=\"http://www.omg.org/spec/KDM/1.3/code\" \
         xmlns:action=\"http://www.omg.org/spec/KDM/1.3/action\">\n",
    );
    let _ = writeln!(
        out,
        "  <kdm:Segment xmi:id=\"s0\" name=\"{}\">",
        xml_escape(&model.name)
    );
    let _ = writeln!(
        out,
        "    <model xmi:id=\"m0\" xmi:type=\"code:CodeModel\" name=\"{}\">",
        xml_escape(&model.name)
    );
    for (i, package) in model.packages.iter().enumerate() {
        let classes = package
            .classes
            .iter()
            .map(|c| class_xmi_id(*c))
            .collect::<Vec<_>>()
            .join(" ");
        let _ = writeln!(
            out,
            "      <package xmi:id=\"p{i}\" xmi:type=\"code:Package\" name=\"{}\" classes=\"{classes}\"/>",
            xml_escape(&package.name)
        );
    }
    for class in &model.class_units {
        let cid = class_xmi_id(class.id);
        let _ = write!(
            out,
            "      <codeElement xmi:id=\"{cid}\" xmi:type=\"code:ClassUnit\" name=\"{}\" package=\"{}\"",
            xml_escape(&class.name),
            xml_escape(&class.package)
        );
        if let Some(page) = &class.source_page {
            let _ = write!(out, " sourcePage=\"{}\"", xml_escape(page));
        }
        out.push_str(">\n");
        for (k, member) in class.members.iter().enumerate() {
            write_element(&mut out, "        ", &format!("{cid}.d{k}"), member);
        }
        for (j, method) in class.code_elements.iter().enumerate() {
            let mid = format!("{cid}.m{j}");
            let _ = writeln!(
                out,
                "        <codeElement xmi:id=\"{mid}\" xmi:type=\"code:MethodUnit\" name=\"{}\">",
                xml_escape(&method.name)
            );
            let _ = write!(
                out,
                "          <codeElement xmi:id=\"{mid}.b\" xmi:type=\"action:BlockUnit\""
            );
            if !method.block.relations.is_empty() {
                let _ = write!(out, " codeRelation=\"{}\"", refs_attr(&method.block.relations));
            }
            out.push_str(">\n");
            for (k, element) in method.block.elements.iter().enumerate() {
                write_element(&mut out, "            ", &format!("{mid}.e{k}"), element);
            }
            out.push_str("          </codeElement>\n");
            out.push_str("        </codeElement>\n");
        }
        out.push_str("      </codeElement>\n");
    }
    for rel in &model.relationships {
        let _ = writeln!(
            out,
            "      <codeRelation xmi:id=\"{}\" xmi:type=\"code:CodeRelationship\" from=\"{}\" to=\"{}\" kind=\"{}\" label=\"{}\"/>",
            rel_xmi_id(rel.id),
            class_xmi_id(rel.from),
            class_xmi_id(rel.to),
            xml_escape(rel.kind.as_str()),
            xml_escape(&rel.label)
        );
    }
    out.push_str("    </model>\n");
    out.push_str("  </kdm:Segment>\n");
    out.push_str("</xmi:XMI>\n");
    out
}
