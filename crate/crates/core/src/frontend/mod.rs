//! C++ header frontend: reverse engineers annotated class declarations into
//! model elements, and edits `@adl.*` doc-comment annotations in place.

mod doc;
mod inject;
mod lexer;
mod parser;
mod types;

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::model::{ElementId, Model, ModelError, PropertyKey, ShapeType, MODEL_PART_PROJECT};

/// `MODEL_PART` value for elements read from library headers.
pub const MODEL_PART_IMPORTED: &str = "Imported";

pub use doc::{extract_annotations, AdlTag, AnnotationError, DocComment, DocTag};
pub use inject::{inject_annotation, inject_member_annotation};
pub use parser::{ClassDecl, MemberDecl, MemberKind, MethodKind, ParamDecl, SourceUnit, Visibility};
pub use types::{is_primitive, normalize_type, TypeError, TypeForm, TypeMap, TypeRef};

/// Header file extensions picked up when scanning directories.
pub const HEADER_EXTENSIONS: &[&str] = &["h", "hpp", "hh"];

#[derive(Debug, Error)]
pub enum FrontendError {
    #[error("{}:{line}:{column}: {message} (at `{token}`)", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        token: String,
        message: String,
    },
    #[error("{}:{line}:{column}: {error}", path.display())]
    Annotation {
        path: PathBuf,
        line: usize,
        column: usize,
        error: AnnotationError,
    },
    #[error("{}:{line}:{column}: class `{name}` is already declared", path.display())]
    NameCollision {
        path: PathBuf,
        line: usize,
        column: usize,
        name: String,
    },
    #[error("class `{0}` not found")]
    ClassNotFound(String),
    #[error("class name `{0}` is ambiguous; qualify it")]
    AmbiguousClass(String),
    #[error("member `{member}` not found in class `{class}`")]
    MemberNotFound { class: String, member: String },
    #[error(transparent)]
    Tag(#[from] AnnotationError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Parses `text` and adds its classes to `model` under a file-level package
/// named after `path`. Returns the CLASS elements in declaration order.
///
/// Nothing is added when parsing or annotation extraction fails, or when a
/// class name collides with one already in the model.
pub fn parse_header(model: &mut Model, text: &str, path: &Path) -> Result<Vec<ElementId>, FrontendError> {
    let unit = SourceUnit::parse(text, path)?;
    add_to_model(model, &unit)
}

/// Like [`parse_header`], but for library headers: every element added is
/// marked as imported and is never generated.
pub fn import_header(model: &mut Model, text: &str, path: &Path) -> Result<Vec<ElementId>, FrontendError> {
    let classes = parse_header(model, text, path)?;
    if let Some(&first) = classes.first() {
        let mut file = first;
        while let Some(parent) = model.element(file)?.parent() {
            file = parent;
        }
        let mut stack = vec![file];
        while let Some(id) = stack.pop() {
            model.put_property(id, PropertyKey::MODEL_PART, Some(MODEL_PART_IMPORTED))?;
            stack.extend_from_slice(model.element(id)?.children());
        }
    }
    Ok(classes)
}

pub fn add_to_model(model: &mut Model, unit: &SourceUnit) -> Result<Vec<ElementId>, FrontendError> {
    let lines = lexer::LineIndex::new(&unit.text);
    let located = |offset: usize| {
        let (line, column) = lines.position(offset);
        (unit.path.clone(), line, column)
    };
    let annotations = |doc: &Option<DocComment>, offset: Option<usize>| {
        doc.as_ref()
            .map(extract_annotations)
            .transpose()
            .map(Option::unwrap_or_default)
            .map_err(|error| {
                let (path, line, column) = located(offset.unwrap_or(0));
                FrontendError::Annotation {
                    path,
                    line,
                    column,
                    error,
                }
            })
    };

    // Validate everything before touching the model.
    let mut seen = HashSet::new();
    let mut class_annotations = Vec::new();
    for class in &unit.classes {
        let qualified = class.qualified_name();
        if model.lookup(&qualified).is_some() || !seen.insert(qualified.clone()) {
            let (path, line, column) = located(class.span.start);
            return Err(FrontendError::NameCollision {
                path,
                line,
                column,
                name: qualified,
            });
        }
        let own = annotations(&class.doc, class.doc_span.as_ref().map(|s| s.start))?;
        let members = class
            .members
            .iter()
            .map(|m| annotations(&m.doc, m.doc_span.as_ref().map(|s| s.start)))
            .collect::<Result<Vec<_>, _>>()?;
        class_annotations.push((own, members));
    }

    let project = || (PropertyKey::MODEL_PART, MODEL_PART_PROJECT.to_string());
    let file = model.add_package(None, &unit.path.display().to_string())?;
    model.put_property(file, PropertyKey::FILE, Some(&unit.path.display().to_string()))?;

    let mut namespaces: BTreeMap<Vec<String>, ElementId> = BTreeMap::new();
    let mut classes = Vec::new();
    for (class, (own, member_annotations)) in unit.classes.iter().zip(class_annotations) {
        let mut parent = file;
        for depth in 1..=class.scope.len() {
            let path = class.scope[..depth].to_vec();
            parent = match namespaces.get(&path) {
                Some(&id) => id,
                None => {
                    let id = model.add_package(Some(parent), &class.scope[depth - 1])?;
                    namespaces.insert(path, id);
                    id
                }
            };
        }

        let mut props = vec![(PropertyKey::NAME, class.name.clone()), project()];
        let explicit_kind = own
            .iter()
            .rev()
            .find(|(k, _)| *k == PropertyKey::ADLINTERFACE)
            .map(|(_, v)| v.as_str());
        let is_interface = match explicit_kind {
            Some(kind) => kind == "interface",
            None => class.looks_like_interface(),
        };
        if is_interface {
            props.push((PropertyKey::INTERFACE, String::new()));
        }
        if !class.bases.is_empty() {
            props.push((PropertyKey::EXTENDS, class.bases.join(", ")));
        }
        props.extend(own);
        let class_id = model.add_element(Some(parent), ShapeType::Class, props)?;

        for (member, annotations) in class.members.iter().zip(member_annotations) {
            let mut props = vec![
                (PropertyKey::NAME, member.name.clone()),
                (PropertyKey::VISIBILITY, member.visibility.as_str().to_string()),
                project(),
            ];
            match &member.kind {
                MemberKind::Field { type_spelling } => {
                    props.push((PropertyKey::TYPE, type_spelling.clone()));
                    props.extend(annotations);
                    model.add_element(Some(class_id), ShapeType::Attribute, props)?;
                }
                MemberKind::Method {
                    return_type, params, ..
                } => {
                    if let Some(return_type) = return_type {
                        props.push((PropertyKey::RETURN_TYPE, return_type.clone()));
                    }
                    props.extend(annotations);
                    let op = model.add_element(Some(class_id), ShapeType::Operation, props)?;
                    for param in params {
                        model.add_element(
                            Some(op),
                            ShapeType::Parameter,
                            [
                                (PropertyKey::NAME, param.name.clone()),
                                (PropertyKey::TYPE, param.type_spelling.clone()),
                                project(),
                            ],
                        )?;
                    }
                }
            }
        }
        classes.push(class_id);
    }
    Ok(classes)
}
