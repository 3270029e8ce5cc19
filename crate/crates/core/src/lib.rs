//! Static analysis of JSP web applications.
//!
//! The pipeline parses every page into a tag-level [`JspDocument`], translates
//! it into a servlet-shaped [`ServletUnit`], discovers a KDM-style
//! [`KdmModel`] from those units, and then injects the page-to-page
//! dependencies found in JSP/HTML tags after resolving their URLs against the
//! deployment metadata (`web.xml` and `@WebServlet`).

pub mod code_model;
pub mod dependency_extractor;
pub mod deployment_mapper;
pub mod diagnostics;
pub mod jsp_parser;
pub mod paths;
pub mod pipeline;
pub mod servlet_translator;

pub use code_model::{
    add_method_call, discover_model, find_class_unit, serialize_model, ClassId, KdmModel, ModelFormat, MutationReport,
};
pub use dependency_extractor::{classify_tag, extract_url_refs, TagKind, UrlRef};
pub use deployment_mapper::{
    build_lookup_table, parse_web_xml, resolve_url, scan_webservlet_annotations, ResolvedTarget, UrlMappingTable,
};
pub use diagnostics::{Diagnostic, Severity};
pub use jsp_parser::{elements_of, parse_jsp, JspDocument, JspNode, NodeKind, Span};
pub use pipeline::{emit_dot, run_pipeline, scan_webapp, DependencyGraph, PipelineConfig, WebAppInventory};
pub use servlet_translator::{
    mangle_class_name, render_servlet_source, translate_page, ServletUnit, TranslationOptions,
};
