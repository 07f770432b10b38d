//! In-place editing of `@adl.*` tags in the doc comment above a class or
//! member declaration. Bytes outside the edited comment are preserved.

use std::ops::Range;
use std::path::Path;

use super::doc::{comment_body, tag_segments, AdlTag, AnnotationError, DocComment};
use super::parser::{ClassDecl, SourceUnit};
use super::FrontendError;
use crate::model::PropertyKey;

/// Sets (`Some`) or removes (`None`) the tag for `key` on the class named
/// `class_name` (plain or `::`-qualified). Flags ignore the value text.
pub fn inject_annotation(
    source: &str,
    class_name: &str,
    key: &PropertyKey,
    value: Option<&str>,
) -> Result<String, FrontendError> {
    let unit = SourceUnit::parse(source, Path::new("<annotate>"))?;
    let class = find_class(&unit, class_name)?;
    edit(source, class.span.start, class.doc_span.clone(), key, value)
}

/// Like [`inject_annotation`], for the first member named `member_name`.
pub fn inject_member_annotation(
    source: &str,
    class_name: &str,
    member_name: &str,
    key: &PropertyKey,
    value: Option<&str>,
) -> Result<String, FrontendError> {
    let unit = SourceUnit::parse(source, Path::new("<annotate>"))?;
    let class = find_class(&unit, class_name)?;
    let member = class
        .members
        .iter()
        .find(|m| m.name == member_name)
        .ok_or_else(|| FrontendError::MemberNotFound {
            class: class_name.to_string(),
            member: member_name.to_string(),
        })?;
    edit(source, member.span.start, member.doc_span.clone(), key, value)
}

fn find_class<'u>(unit: &'u SourceUnit, name: &str) -> Result<&'u ClassDecl, FrontendError> {
    let matches: Vec<&ClassDecl> = if name.contains("::") {
        let name = name.trim_start_matches("::");
        unit.classes.iter().filter(|c| c.qualified_name() == name).collect()
    } else {
        unit.classes.iter().filter(|c| c.name == name).collect()
    };
    match matches.as_slice() {
        [] => Err(FrontendError::ClassNotFound(name.to_string())),
        [one] => Ok(one),
        _ => Err(FrontendError::AmbiguousClass(name.to_string())),
    }
}

fn line_start(source: &str, offset: usize) -> usize {
    source[..offset].rfind('\n').map_or(0, |i| i + 1)
}

/// Leading whitespace of the line containing `offset`, if nothing else
/// precedes `offset` on that line.
fn own_line_indent(source: &str, offset: usize) -> Option<&str> {
    let start = line_start(source, offset);
    let prefix = &source[start..offset];
    prefix.chars().all(|c| c == ' ' || c == '\t').then_some(prefix)
}

fn edit(
    source: &str,
    decl_start: usize,
    doc_span: Option<Range<usize>>,
    key: &PropertyKey,
    value: Option<&str>,
) -> Result<String, FrontendError> {
    let tag = AdlTag::from_key(key).ok_or_else(|| AnnotationError::NoTagForKey(key.clone()))?;
    let rendered = match value {
        Some(_) if tag.is_flag() => Some(format!("@{}", tag.tag_name())),
        Some(v) if v.trim().is_empty() => {
            return Err(AnnotationError::MissingArgument(tag.tag_name().to_string()).into())
        }
        Some(v) => Some(format!("@{} {}", tag.tag_name(), v.trim())),
        None => None,
    };
    let eol = if source.contains("\r\n") { "\r\n" } else { "\n" };

    let Some(doc_span) = doc_span else {
        let Some(rendered) = rendered else {
            return Ok(source.to_string());
        };
        let (at, indent) = match own_line_indent(source, decl_start) {
            Some(indent) => (line_start(source, decl_start), indent),
            None => (decl_start, ""),
        };
        let block = format!("{indent}/**{eol}{indent} * {rendered}{eol}{indent} */{eol}");
        let mut out = source.to_string();
        out.insert_str(at, &block);
        return Ok(out);
    };

    let raw = &source[doc_span.clone()];
    let current: Vec<Option<String>> = DocComment::parse(raw)
        .tags
        .into_iter()
        .filter(|t| t.name == tag.tag_name())
        .map(|t| t.argument)
        .collect();
    let unchanged = match value {
        None => current.is_empty(),
        Some(_) if tag.is_flag() => current.len() == 1,
        Some(v) => current.len() == 1 && current[0].as_deref() == Some(v.trim()),
    };
    if unchanged {
        return Ok(source.to_string());
    }

    let indent = own_line_indent(source, doc_span.start).unwrap_or("");
    let multi_line = if raw.contains('\n') {
        raw.to_string()
    } else {
        let inner = raw["/**".len()..raw.len() - "*/".len()].trim();
        if inner.is_empty() {
            format!("/**{eol}{indent} */")
        } else {
            format!("/**{eol}{indent} * {inner}{eol}{indent} */")
        }
    };

    let mut lines: Vec<String> = multi_line.split('\n').map(str::to_string).collect();
    let last = lines.len() - 1;
    let mut insert_at: Option<usize> = None;
    let mut index = 0;
    while index < lines.len() {
        let line = &lines[index];
        let body = comment_body(line);
        let targets: Vec<Range<usize>> = tag_segments(line, body.clone())
            .into_iter()
            .filter(|seg| {
                let name_end = line[seg.clone()]
                    .find(char::is_whitespace)
                    .map_or(seg.end, |p| seg.start + p);
                line[seg.start + 1..name_end] == *tag.tag_name()
            })
            .collect();
        if targets.is_empty() {
            index += 1;
            continue;
        }

        let mut edited = String::new();
        let mut cursor = 0;
        for seg in &targets {
            edited.push_str(&line[cursor..seg.start]);
            cursor = seg.end;
        }
        let rest = &line[cursor..];
        if rest.trim_end_matches('\r').is_empty() {
            let keep_cr = rest.ends_with('\r');
            edited.truncate(edited.trim_end().len());
            if keep_cr {
                edited.push('\r');
            }
        } else {
            if !edited.ends_with(char::is_whitespace) && rest.starts_with("*/") {
                edited.push(' ');
            }
            edited.push_str(rest);
        }

        let new_body = comment_body(&edited);
        let is_blank = edited[new_body].trim().is_empty();
        if is_blank && index != 0 && index != last && !edited.contains("*/") {
            lines.remove(index);
            insert_at.get_or_insert(index);
            continue;
        }
        lines[index] = edited;
        index += 1;
    }

    if let Some(rendered) = rendered {
        let cr = if eol == "\r\n" { "\r" } else { "" };
        let new_line = format!("{indent} * {rendered}{cr}");
        let last = lines.len() - 1;
        let closing_alone = lines[last].trim() == "*/";
        match insert_at {
            Some(at) => lines.insert(at, new_line),
            None if closing_alone => lines.insert(last, new_line),
            None => {
                // `... */` shares a line with content: split it.
                let closing = lines[last].rfind("*/").expect("doc comment ends with */");
                let head = lines[last][..closing].trim_end().to_string();
                lines[last] = head + cr;
                lines.push(new_line);
                lines.push(format!("{indent} */"));
            }
        }
    }

    let new_doc = lines.join("\n");
    let mut out = String::with_capacity(source.len() + 32);
    if doc_is_empty(&new_doc) {
        // Drop the whole comment, keeping the declaration's own indentation.
        let from = match own_line_indent(source, doc_span.start) {
            Some(_) => line_start(source, doc_span.start),
            None => doc_span.start,
        };
        let between = &source[doc_span.end..decl_start];
        let to = match between.rfind('\n') {
            Some(nl) => doc_span.end + nl + 1,
            None => decl_start,
        };
        out.push_str(&source[..from]);
        out.push_str(&source[to..]);
    } else {
        out.push_str(&source[..doc_span.start]);
        out.push_str(&new_doc);
        out.push_str(&source[doc_span.end..]);
    }
    Ok(out)
}

fn doc_is_empty(doc: &str) -> bool {
    doc.split('\n').all(|line| {
        let body = comment_body(line);
        line[body].trim().is_empty()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::extract_annotations;

    fn class_tags(source: &str, class: &str) -> Vec<(PropertyKey, String)> {
        let unit = SourceUnit::parse(source, Path::new("t.h")).unwrap();
        let class = find_class(&unit, class).unwrap();
        class
            .doc
            .as_ref()
            .map(|d| extract_annotations(d).unwrap())
            .unwrap_or_default()
    }

    #[test]
    fn creates_a_comment_block() {
        let src = "namespace n {\n  class X {\n  };\n}\n";
        let out = inject_annotation(src, "X", &PropertyKey::ADLPERSISTENT, Some("")).unwrap();
        assert_eq!(
            out,
            "namespace n {\n  /**\n   * @adl.persistent\n   */\n  class X {\n  };\n}\n"
        );
        let again = inject_annotation(&out, "n::X", &PropertyKey::ADLPERSISTENT, Some("")).unwrap();
        assert_eq!(again, out);
        let removed = inject_annotation(&out, "X", &PropertyKey::ADLPERSISTENT, None).unwrap();
        assert_eq!(removed, src);
    }

    #[test]
    fn appends_to_a_prose_comment() {
        let src = "/**\n * HV data.\n */\nclass X {};\n";
        let out = inject_annotation(src, "X", &PropertyKey::ADLPERSISTENT, Some("")).unwrap();
        assert_eq!(out, "/**\n * HV data.\n * @adl.persistent\n */\nclass X {};\n");
    }

    #[test]
    fn replaces_an_existing_value() {
        let src = "/**\n * @adl.interface interface\n * @brief x\n */\nclass X {};\n";
        let out = inject_annotation(src, "X", &PropertyKey::ADLINTERFACE, Some("DataObject")).unwrap();
        assert_eq!(
            out,
            "/**\n * @adl.interface DataObject\n * @brief x\n */\nclass X {};\n"
        );
        assert_eq!(
            class_tags(&out, "X"),
            vec![(PropertyKey::ADLINTERFACE, "DataObject".to_string())]
        );
    }

    #[test]
    fn expands_single_line_comments() {
        let src = "  /** @adl.persistent @adl.readonly */ class X {};\n";
        let out = inject_annotation(src, "X", &PropertyKey::ADLPERSISTENT, None).unwrap();
        assert_eq!(out, "  /**\n   * @adl.readonly\n   */ class X {};\n");
        let out = inject_annotation(&out, "X", &PropertyKey::ADLREADONLY, None).unwrap();
        assert_eq!(out, "class X {};\n");
    }

    #[test]
    fn splits_a_closing_line_with_content() {
        let src = "/** Prose\n * more */\nclass X {};\n";
        let out = inject_annotation(src, "X", &PropertyKey::ADLENABLED, Some("ADLEXT")).unwrap();
        assert_eq!(out, "/** Prose\n * more\n * @adl.enabled ADLEXT\n */\nclass X {};\n");
    }

    #[test]
    fn preserves_crlf() {
        let src = "/**\r\n * Doc\r\n */\r\nclass X {};\r\n";
        let out = inject_annotation(src, "X", &PropertyKey::ADLFOLDER, Some("out")).unwrap();
        assert_eq!(out, "/**\r\n * Doc\r\n * @adl.folder out\r\n */\r\nclass X {};\r\n");
        assert_eq!(
            inject_annotation(&out, "X", &PropertyKey::ADLFOLDER, None).unwrap(),
            src
        );
    }

    #[test]
    fn member_annotations() {
        let src = "class X {\n  long a;\n  long b;\n};\n";
        let out = inject_member_annotation(src, "X", "b", &PropertyKey::ADLREADONLY, Some("")).unwrap();
        assert_eq!(
            out,
            "class X {\n  long a;\n  /**\n   * @adl.readonly\n   */\n  long b;\n};\n"
        );
        assert!(matches!(
            inject_member_annotation(src, "X", "zz", &PropertyKey::ADLREADONLY, Some("")),
            Err(FrontendError::MemberNotFound { .. })
        ));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            inject_annotation("class X {};", "Y", &PropertyKey::ADLREADONLY, Some("")),
            Err(FrontendError::ClassNotFound(_))
        ));
        assert!(matches!(
            inject_annotation("class X {};", "X", &PropertyKey::NAME, Some("Y")),
            Err(FrontendError::Tag(AnnotationError::NoTagForKey(_)))
        ));
        assert!(matches!(
            inject_annotation("class X {};", "X", &PropertyKey::ADLFOLDER, Some(" ")),
            Err(FrontendError::Tag(AnnotationError::MissingArgument(_)))
        ));
        assert!(matches!(
            inject_annotation(
                "namespace a { class X {}; } namespace b { class X {}; }",
                "X",
                &PropertyKey::ADLREADONLY,
                Some("")
            ),
            Err(FrontendError::AmbiguousClass(_))
        ));
    }

    #[test]
    fn duplicate_tags_collapse_to_one() {
        let src = "/**\n * @adl.folder a\n * @adl.folder b\n */\nclass X {};\n";
        let out = inject_annotation(src, "X", &PropertyKey::ADLFOLDER, Some("c")).unwrap();
        assert_eq!(out, "/**\n * @adl.folder c\n */\nclass X {};\n");
    }
}
