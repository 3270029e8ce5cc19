mod common;

use std::collections::BTreeSet;

use common::*;
use jspkdm::jsp_parser::parse_jsp;
use jspkdm::servlet_translator::{
    mangle_class_name, render_servlet_source, translate_page, StatementKind, TranslationOptions,
};
use proptest::prelude::*;

fn powers_unit() -> (String, jspkdm::ServletUnit) {
    let src = read_fixture("powers.jsp");
    let doc = parse_jsp(&src, "/powers.jsp").unwrap();
    (src.clone(), translate_page(&doc, &TranslationOptions::default()))
}

#[test]
fn powers_template_round_trip() {
    let (src, unit) = powers_unit();
    check_template_round_trip(&src).unwrap();
    let joined: String = unit
        .service_body
        .iter()
        .filter(|s| s.kind == StatementKind::TemplateEmit)
        .map(|s| s.text.as_str())
        .collect();
    assert!(joined.starts_with("<HTML>\n<HEAD><TITLE>Powers of 2</TITLE></HEAD>\n"));
    assert!(joined.contains("\n<TR>\n<TD></TD>\n<TD></TD>\n</TR>\n"));
    assert!(!joined.contains("<%"));
}

#[test]
fn powers_statements() {
    let (_, unit) = powers_unit();
    assert_eq!(unit.class_name, "jsp_powers_jsp");
    let kinds: Vec<_> = unit.service_body.iter().map(|s| s.kind).collect();
    use StatementKind::*;
    assert_eq!(
        kinds,
        vec![
            TemplateEmit,
            InlineCode,
            TemplateEmit,
            ExpressionEmit,
            TemplateEmit,
            ExpressionEmit,
            TemplateEmit,
            InlineCode,
            TemplateEmit
        ]
    );
    let exprs: Vec<_> = unit
        .service_body
        .iter()
        .filter(|s| s.kind == ExpressionEmit)
        .map(|s| s.text.as_str())
        .collect();
    assert_eq!(exprs, vec!["i", "Math.pow(2, i)"]);
}

#[test]
fn powers_rendered_servlet() {
    let (src, unit) = powers_unit();
    let java = render_servlet_source(&unit);
    assert_eq!(count_matches(r"\bclass\s+\w+", &java), 1);
    assert_eq!(count_matches(r"void\s+_jspService\s*\(", &java), 1);
    assert_eq!(emitted_literals(&java).concat(), delete_scripting(&src));
    assert!(java.contains("out.print(Math.pow(2, i));"));
    assert!(java.contains("for (int i=0; i<10; i++) {"));
}

#[test]
fn mangling_is_injective_on_random_paths() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    let alphabet: Vec<char> = "ab_.-/$ 1\u{e9}".chars().collect();
    let mut paths = BTreeSet::new();
    while paths.len() < 100 {
        let len = rng.random_range(1..10);
        let body: String = (0..len)
            .map(|_| alphabet[rng.random_range(0..alphabet.len())])
            .collect();
        paths.insert(format!("/{body}.jsp"));
    }
    let mangled: BTreeSet<String> = paths.iter().map(|p| mangle_class_name(p)).collect();
    assert_eq!(mangled.len(), paths.len());
}

proptest! {
    #[test]
    fn template_round_trip(src in jsp_source()) {
        check_template_round_trip(&src).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn order_preservation(src in jsp_source()) {
        check_order(&src).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn statement_count_conservation(src in jsp_source()) {
        check_statement_counts(&src).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn render_then_unescape(src in jsp_source()) {
        check_render_unescape(&src).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn control_characters_survive_rendering(text in "[\\x00-\\x1f\"\\\\a-z\u{2028}]{1,20}") {
        prop_assume!(!text.contains('<'));
        check_render_unescape(&text).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn mangled_names_are_identifiers(a in page_path(), b in page_path()) {
        let ma = mangle_class_name(&a);
        prop_assert!(ma.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '$'));
        prop_assert!(ma.starts_with("jsp_"));
        if a != b {
            prop_assert_ne!(ma, mangle_class_name(&b));
        }
    }
}
