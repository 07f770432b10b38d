//! Reads `.adl` files in the generator's dialect back into [`AdlUnit`]s and
//! checks them for consistency.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::adl::{guard_for, render_unit, AdlUnit, AttributeDecl, OperationDecl, ParamDecl};
use crate::config::{HeaderFields, SchemaSet};
use crate::model::{PropertyKey, ShapeType};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct AdlParseError {
    pub line: usize,
    pub message: String,
}

/// A parsed unit together with the 1-based source line of each part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedAdl {
    pub unit: AdlUnit,
    pub guard_line: usize,
    pub kind_line: usize,
    pub include_lines: Vec<usize>,
    pub attribute_lines: Vec<usize>,
    pub operation_lines: Vec<usize>,
}

pub fn parse_adl(text: &str) -> Result<AdlUnit, AdlParseError> {
    parse_adl_located(text).map(|parsed| parsed.unit)
}

/// Like [`parse_adl`], but rejects invalid UTF-8 with the line it occurs on.
pub fn parse_adl_bytes(bytes: &[u8]) -> Result<ParsedAdl, AdlParseError> {
    match std::str::from_utf8(bytes) {
        Ok(text) => parse_adl_located(text),
        Err(e) => Err(AdlParseError {
            line: 1 + bytes[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count(),
            message: "invalid UTF-8".to_string(),
        }),
    }
}

struct Lines<'a> {
    lines: Vec<&'a str>,
    next: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let mut lines: Vec<&str> = text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)).collect();
        if lines.last() == Some(&"") {
            lines.pop();
        }
        Lines { lines, next: 0 }
    }

    /// Next non-blank line and its 1-based number.
    fn next_content(&mut self) -> Option<(usize, &'a str)> {
        while self.next < self.lines.len() {
            let line = self.lines[self.next];
            self.next += 1;
            if !line.trim().is_empty() {
                return Some((self.next, line.trim()));
            }
        }
        None
    }

    fn peek_content(&self) -> Option<&'a str> {
        self.lines[self.next..].iter().map(|l| l.trim()).find(|l| !l.is_empty())
    }

    fn end_line(&self) -> usize {
        self.lines.len().max(1)
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str), AdlParseError> {
        let end = self.end_line();
        self.next_content().ok_or_else(|| AdlParseError {
            line: end,
            message: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn error(line: usize, message: impl Into<String>) -> AdlParseError {
    AdlParseError {
        line,
        message: message.into(),
    }
}

fn directive<'a>(line: &'a str, name: &str) -> Option<&'a str> {
    let rest = line.strip_prefix('#')?.trim_start().strip_prefix(name)?;
    (rest.is_empty() || rest.starts_with(char::is_whitespace)).then(|| rest.trim())
}

fn is_identifier(word: &str) -> bool {
    let mut chars = word.chars();
    chars.next().is_some_and(|c| c.is_alphabetic() || c == '_') && chars.all(|c| c.is_alphanumeric() || c == '_')
}

pub fn parse_adl_located(text: &str) -> Result<ParsedAdl, AdlParseError> {
    let mut lines = Lines::new(text);

    let (guard_line, line) = lines.expect("`#ifndef`")?;
    let guard = directive(line, "ifndef")
        .filter(|g| !g.is_empty())
        .ok_or_else(|| error(guard_line, "expected `#ifndef <guard>`"))?
        .to_string();
    let (number, line) = lines.expect("`#define`")?;
    match directive(line, "define") {
        Some(defined) if defined == guard => {}
        Some(defined) => {
            return Err(error(
                number,
                format!("guard mismatch: `#ifndef {guard}` but `#define {defined}`"),
            ))
        }
        None => return Err(error(number, "expected `#define`")),
    }

    let mut header = HeaderFields {
        title: String::new(),
        author: String::new(),
        version: String::new(),
    };
    if lines.peek_content() == Some("/**") {
        let (open, _) = lines.expect("`/**`")?;
        loop {
            let Some(&raw) = lines.lines.get(lines.next) else {
                return Err(error(open, "unterminated comment"));
            };
            lines.next += 1;
            let line = raw.trim();
            if line == "*/" {
                break;
            }
            let body = line.strip_prefix('*').unwrap_or(line).trim();
            if let Some(v) = body.strip_prefix("@Title:") {
                header.title = v.trim().to_string();
            } else if let Some(v) = body.strip_prefix("@Author:") {
                header.author = v.trim().to_string();
            } else if let Some(v) = body.strip_prefix("@Version:") {
                header.version = v.trim().to_string();
            } else if line.contains("*/") {
                return Err(error(lines.next, "comment must close on its own line"));
            }
        }
    }

    let mut includes = Vec::new();
    let mut include_lines = Vec::new();
    let (kind_line, declaration) = loop {
        let (number, line) = lines.expect("class declaration")?;
        match directive(line, "include") {
            Some(target) => {
                let target = target
                    .strip_prefix('"')
                    .and_then(|t| t.strip_suffix('"'))
                    .filter(|t| !t.is_empty() && !t.contains('"'))
                    .ok_or_else(|| error(number, "expected `#include \"<file>\"`"))?;
                includes.push(target.to_string());
                include_lines.push(number);
            }
            None => break (number, line),
        }
    };

    let words: Vec<&str> = declaration.trim_end_matches(';').split_whitespace().collect();
    let (extern_only, kind, class_name) = match words.as_slice() {
        ["extern", kind, name] if declaration.ends_with(';') => (true, *kind, *name),
        [kind, name] if !declaration.ends_with(';') => (false, *kind, *name),
        _ => {
            return Err(error(
                kind_line,
                "expected `<kind> <Class>` or `extern <kind> <Class>;`",
            ))
        }
    };
    if !is_identifier(kind) || !is_identifier(class_name) {
        return Err(error(kind_line, "kind and class name must be identifiers"));
    }

    let mut unit = AdlUnit::new(class_name, kind, header);
    unit.guard = guard;
    unit.includes = includes;
    unit.extern_only = extern_only;
    let mut attribute_lines = Vec::new();
    let mut operation_lines = Vec::new();

    if extern_only {
        if !unit.includes.is_empty() {
            return Err(error(include_lines[0], "extern declarations take no includes"));
        }
    } else {
        let (number, line) = lines.expect("`{`")?;
        if line != "{" {
            return Err(error(number, "expected `{` before the class body"));
        }
        loop {
            let (number, line) = lines.expect("`};`")?;
            if line == "};" {
                break;
            }
            if line.ends_with(");") {
                unit.operations
                    .push(parse_operation(line).map_err(|message| error(number, message))?);
                operation_lines.push(number);
            } else {
                unit.attributes
                    .push(parse_attribute(line).map_err(|message| error(number, message))?);
                attribute_lines.push(number);
            }
        }
    }

    let (number, line) = lines.expect("`#endif`")?;
    if directive(line, "endif") != Some("") {
        let what = if extern_only { "the extern declaration" } else { "`};`" };
        return Err(error(number, format!("unexpected content after {what}")));
    }
    if lines.next_content().is_some() {
        return Err(error(lines.next, "unexpected content after `#endif`"));
    }

    Ok(ParsedAdl {
        unit,
        guard_line,
        kind_line,
        include_lines,
        attribute_lines,
        operation_lines,
    })
}

/// Splits `<head> <middle...> <tail>`, keeping the middle's spelling.
fn split_ends(text: &str) -> Option<(&str, &str, &str)> {
    let text = text.trim();
    let head_end = text.find(char::is_whitespace)?;
    let tail_start = text.rfind(char::is_whitespace)? + 1;
    let middle = text.get(head_end..tail_start.saturating_sub(1))?.trim();
    (!middle.is_empty()).then(|| (&text[..head_end], middle, &text[tail_start..]))
}

fn parse_attribute(line: &str) -> Result<AttributeDecl, String> {
    let mut rest = line
        .strip_suffix(';')
        .ok_or_else(|| "expected `;` after member".to_string())?
        .trim();
    let mut take = |word: &str| -> bool {
        match rest.strip_prefix(word) {
            Some(r) if r.starts_with(char::is_whitespace) => {
                rest = r.trim_start();
                true
            }
            _ => false,
        }
    };
    let persistent = take("persistent");
    let readonly = take("readonly");
    let (visibility, after) = rest
        .split_once(char::is_whitespace)
        .ok_or_else(|| "unrecognized member declaration".to_string())?;
    let after = after.trim_start();
    let declaration = after
        .strip_prefix("attribute")
        .filter(|r| r.starts_with(char::is_whitespace))
        .ok_or_else(|| "expected `attribute` or an operation".to_string())?;
    let (type_spelling, name) = declaration
        .trim()
        .rsplit_once(char::is_whitespace)
        .ok_or_else(|| "attribute needs a type and a name".to_string())?;
    if !is_identifier(visibility) || !is_identifier(name) || type_spelling.trim().is_empty() {
        return Err("malformed attribute".to_string());
    }
    Ok(AttributeDecl {
        persistent,
        readonly,
        visibility: visibility.to_string(),
        type_spelling: type_spelling.trim().to_string(),
        name: name.to_string(),
    })
}

/// Splits at commas outside `<...>`.
fn split_top_level(text: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in text.char_indices() {
        match c {
            '<' => depth += 1,
            '>' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(&text[start..]);
    parts
}

fn parse_operation(line: &str) -> Result<OperationDecl, String> {
    let body = line.strip_suffix(");").unwrap_or(line);
    let (head, params) = body
        .split_once('(')
        .ok_or_else(|| "expected `(` in operation".to_string())?;
    let (visibility, return_type, name) =
        split_ends(head).ok_or_else(|| "operation needs visibility, return type and name".to_string())?;
    if !is_identifier(visibility) || !is_identifier(name) || params.contains(['(', ')']) {
        return Err("malformed operation".to_string());
    }
    let params = if params.trim().is_empty() {
        Vec::new()
    } else {
        split_top_level(params)
            .into_iter()
            .map(|param| {
                let (direction, type_spelling, name) =
                    split_ends(param).ok_or_else(|| format!("malformed parameter `{}`", param.trim()))?;
                if !is_identifier(direction) || !is_identifier(name) {
                    return Err(format!("malformed parameter `{}`", param.trim()));
                }
                Ok(ParamDecl {
                    direction: direction.to_string(),
                    type_spelling: type_spelling.to_string(),
                    name: name.to_string(),
                })
            })
            .collect::<Result<_, String>>()?
    };
    Ok(OperationDecl {
        visibility: visibility.to_string(),
        return_type: return_type.to_string(),
        name: name.to_string(),
        params,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Severity {
    #[serde(rename = "ERROR")]
    Error,
    #[serde(rename = "WARNING")]
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "ERROR",
            Severity::Warning => "WARNING",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub line: usize,
    pub message: String,
}

impl Diagnostic {
    /// `<file>:<line>: <severity>: <message>`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}: {}: {}", self.line, self.severity, self.message)
    }
}

/// Checks a unit as the generator would render it; line numbers refer to
/// the rendered text.
pub fn check_unit(unit: &AdlUnit, siblings: &BTreeSet<String>, schemas: &SchemaSet) -> Vec<Diagnostic> {
    match parse_adl_located(&render_unit(unit)) {
        Ok(mut parsed) => {
            // Rendering may normalise away details; check the caller's unit.
            parsed.unit = unit.clone();
            check_parsed(&parsed, siblings, schemas)
        }
        Err(e) => vec![Diagnostic {
            severity: Severity::Error,
            line: e.line,
            message: e.message,
        }],
    }
}

/// Checks a parsed file; line numbers refer to its source.
pub fn check_parsed(parsed: &ParsedAdl, siblings: &BTreeSet<String>, schemas: &SchemaSet) -> Vec<Diagnostic> {
    let unit = &parsed.unit;
    let mut diagnostics = Vec::new();
    let expected_guard = guard_for(&unit.class_name);
    if unit.guard != expected_guard {
        diagnostics.push(Diagnostic {
            severity: Severity::Error,
            line: parsed.guard_line,
            message: format!("guard `{}` should be `{expected_guard}`", unit.guard),
        });
    }

    // Attributes must be unique and distinct from operations; operations may
    // be overloaded but not repeated with the same parameter types.
    let mut attributes: HashMap<&str, usize> = HashMap::new();
    let line_of = |lines: &[usize], i: usize| lines.get(i).copied().unwrap_or(parsed.kind_line);
    for (i, attribute) in unit.attributes.iter().enumerate() {
        if attributes.insert(&attribute.name, i).is_some() {
            diagnostics.push(Diagnostic {
                severity: Severity::Error,
                line: line_of(&parsed.attribute_lines, i),
                message: format!("duplicate member `{}`", attribute.name),
            });
        }
    }
    let mut signatures = BTreeSet::new();
    for (i, operation) in unit.operations.iter().enumerate() {
        let types: Vec<&str> = operation.params.iter().map(|p| p.type_spelling.as_str()).collect();
        if attributes.contains_key(operation.name.as_str()) || !signatures.insert((operation.name.as_str(), types)) {
            diagnostics.push(Diagnostic {
                severity: Severity::Error,
                line: line_of(&parsed.operation_lines, i),
                message: format!("duplicate member `{}`", operation.name),
            });
        }
    }

    for (i, include) in unit.includes.iter().enumerate() {
        if !siblings.contains(include) {
            diagnostics.push(Diagnostic {
                severity: Severity::Warning,
                line: line_of(&parsed.include_lines, i),
                message: format!("included file `{include}` not found"),
            });
        }
    }

    if let Err(violation) = schemas.validate_value(ShapeType::Class, &PropertyKey::ADLINTERFACE, &unit.kind) {
        diagnostics.push(Diagnostic {
            severity: Severity::Warning,
            line: parsed.kind_line,
            message: format!("unknown kind: {violation}"),
        });
    }
    diagnostics.sort_by_key(|d| d.line);
    diagnostics
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG: &str = "#ifndef LArTBHVDData_ADL
#define LArTBHVDData_ADL
/**
 * @Title:  Module ADL generator for Together
 * @Author: Massimo_Marino@lbl.gov
 * @Version: 0.9.6
 */

ContainedObject LArTBHVDData
{

private attribute long moduleNumber;
private attribute short detectorType;
private attribute short unit;
private attribute long NHVch;
private attribute std::vector <double> HVdata;

};
#endif
";

    #[test]
    fn reads_reference_file() {
        let unit = parse_adl(FIG).unwrap();
        assert_eq!(unit.guard, "LArTBHVDData_ADL");
        assert_eq!(unit.kind, "ContainedObject");
        assert_eq!(unit.attributes.len(), 5);
        assert_eq!(unit.attributes[4].type_spelling, "std::vector <double>");
        assert_eq!(unit.header, HeaderFields::default());
        assert_eq!(render_unit(&unit), FIG);
        let diagnostics = check_unit(&unit, &BTreeSet::new(), &SchemaSet::builtin());
        assert!(diagnostics.is_empty(), "{diagnostics:?}");
    }

    #[test]
    fn tolerates_blank_runs_crlf_and_missing_header() {
        let text = "\r\n#ifndef X_ADL\r\n#define X_ADL\r\n\r\n\r\ninterface X\r\n{\r\n};\r\n\r\n#endif\r\n\r\n";
        let unit = parse_adl(text).unwrap();
        assert_eq!(unit, {
            let mut u = AdlUnit::new(
                "X",
                "interface",
                HeaderFields {
                    title: String::new(),
                    author: String::new(),
                    version: String::new(),
                },
            );
            u.guard = "X_ADL".into();
            u
        });
    }

    #[test]
    fn minimal_round_trip() {
        let unit = AdlUnit::new("X", "interface", HeaderFields::default());
        assert_eq!(parse_adl(&render_unit(&unit)).unwrap(), unit);
    }

    #[test]
    fn members_with_prefixes_and_operations() {
        let text = FIG.replace(
            "private attribute short unit;",
            "persistent readonly protected attribute short unit;\npublic long voltage(in long ch, in std::map <long, double> m);",
        );
        let unit = parse_adl(&text).unwrap();
        let unit_attr = &unit.attributes[2];
        assert!(unit_attr.persistent && unit_attr.readonly);
        assert_eq!(unit_attr.visibility, "protected");
        let op = &unit.operations[0];
        assert_eq!(op.params.len(), 2);
        assert_eq!(op.params[1].type_spelling, "std::map <long, double>");
    }

    #[test]
    fn parse_errors_carry_lines() {
        let cases = [
            (
                FIG.replace("#define LArTBHVDData_ADL", "#define OTHER"),
                2,
                "guard mismatch",
            ),
            (FIG.replace(" */\n", ""), 3, "unterminated comment"),
            (
                FIG.replace("{\n\n", "private attribute long x;\n{\n"),
                10,
                "expected `{`",
            ),
            (FIG.replace("};\n", "};\nprivate attribute long x;\n"), 19, "after `};`"),
            (format!("{FIG}junk\n"), 20, "after `#endif`"),
            (
                FIG.replace("private attribute short unit;", "private short unit;"),
                14,
                "expected `attribute`",
            ),
            (String::new(), 1, "end of file"),
        ];
        for (text, line, message) in cases {
            let err = parse_adl(&text).unwrap_err();
            assert_eq!(err.line, line, "{err}");
            assert!(err.message.contains(message), "{err}");
        }
    }

    #[test]
    fn invalid_utf8_is_an_error() {
        let err = parse_adl_bytes(b"#ifndef X\n\xff").unwrap_err();
        assert_eq!(err.line, 2);
    }

    #[test]
    fn diagnostics() {
        let schemas = SchemaSet::builtin();
        let mut unit = parse_adl(FIG).unwrap();
        unit.guard = "WRONG_ADL".into();
        let found = check_unit(&unit, &BTreeSet::new(), &schemas);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].severity, Severity::Error);
        assert_eq!(
            found[0].render("f.adl"),
            "f.adl:1: ERROR: guard `WRONG_ADL` should be `LArTBHVDData_ADL`"
        );

        let mut unit = parse_adl(FIG).unwrap();
        unit.includes.push("Missing.adl".into());
        unit.includes.push("Present.adl".into());
        let siblings: BTreeSet<String> = ["Present.adl".to_string()].into();
        let found = check_unit(&unit, &siblings, &schemas);
        assert_eq!(found.len(), 1);
        assert_eq!((found[0].severity, found[0].line), (Severity::Warning, 8));

        let mut unit = parse_adl(FIG).unwrap();
        unit.kind = "Widget".into();
        let dup = unit.attributes[0].clone();
        unit.attributes.push(dup);
        let found = check_unit(&unit, &BTreeSet::new(), &schemas);
        let severities: Vec<_> = found.iter().map(|d| (d.severity, d.line)).collect();
        assert_eq!(severities, [(Severity::Warning, 9), (Severity::Error, 17)]);
    }

    #[test]
    fn overloads_are_not_duplicates() {
        let op = |ty: &str| OperationDecl {
            visibility: "public".into(),
            return_type: "void".into(),
            name: "set".into(),
            params: vec![ParamDecl {
                direction: "in".into(),
                type_spelling: ty.into(),
                name: "v".into(),
            }],
        };
        let mut unit = AdlUnit::new("X", "interface", HeaderFields::default());
        unit.operations = vec![op("long"), op("double")];
        assert!(check_unit(&unit, &BTreeSet::new(), &SchemaSet::builtin()).is_empty());
        unit.operations.push(op("long"));
        assert_eq!(check_unit(&unit, &BTreeSet::new(), &SchemaSet::builtin()).len(), 1);
    }
}
