//! Context-relative path handling shared by the model lookup and the URL
//! resolver.

/// Result of normalizing a context-relative path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub path: String,
    /// Set when a `..` segment tried to climb above the context root.
    pub clamped: bool,
}

/// Normalizes a context-relative path: forces a leading `/`, collapses
/// repeated separators and resolves `.` and `..` segments. `..` never climbs
/// above the root. A trailing `/` is kept because servlet matching treats
/// `/a/` and `/a` differently.
pub fn normalize(path: &str) -> Normalized {
    let mut segments: Vec<&str> = Vec::new();
    let mut clamped = false;
    let trailing = path.len() > 1 && (path.ends_with('/') || path.ends_with("/.") || path.ends_with("/.."));
    for seg in path.split('/') {
        match seg {
            "" | "." => {}
            ".." => {
                if segments.pop().is_none() {
                    clamped = true;
                }
            }
            s => segments.push(s),
        }
    }
    let mut out = String::with_capacity(path.len() + 1);
    out.push('/');
    out.push_str(&segments.join("/"));
    if trailing && !segments.is_empty() {
        out.push('/');
    }
    Normalized { path: out, clamped }
}

/// Shorthand for [`normalize`] when clamping is irrelevant.
pub fn normalize_path(path: &str) -> String {
    normalize(path).path
}

/// Directory part of a page path, always ending in `/`.
pub fn parent_dir(page: &str) -> &str {
    match page.rfind('/') {
        Some(i) => &page[..=i],
        None => "/",
    }
}

/// Resolves `reference` against the page that contains it. References that
/// start with `/` are already context-relative.
pub fn resolve_against(page: &str, reference: &str) -> Normalized {
    if reference.starts_with('/') {
        normalize(reference)
    } else {
        let mut joined = String::from(parent_dir(page));
        joined.push_str(reference);
        normalize(&joined)
    }
}
