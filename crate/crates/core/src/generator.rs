//! Lowers selected project classes to [`AdlUnit`]s and writes them out.
//!
//! Only project-owned elements (`MODEL_PART` = `Model`) are ever generated.
//! Per class, `ADLENABLED` picks the output:
//!
//! * `EXTERNAL`: nothing, the description is maintained elsewhere;
//! * `ADLEXT`: a guarded `extern <kind> <Class>;` declaration;
//! * `ADL`: the full description.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Component, Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::adl::{render_unit, AdlUnit, AttributeDecl, OperationDecl, ParamDecl, ADL_EXTENSION};
use crate::config::{Config, HeaderFields, Violation};
use crate::frontend::{normalize_type, TypeError, TypeMap};
use crate::model::{Element, ElementId, Model, ModelError, ModelVisitor, PropertyKey, ShapeType, SCOPE_SEPARATOR};

pub const NO_OPEN_PROJECT: &str = "No open project";
pub const NO_SELECTION: &str = "No selection was made.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    #[serde(rename = "EXTERNAL")]
    External,
    #[serde(rename = "ADLEXT")]
    AdlExt,
    #[serde(rename = "ADL")]
    Adl,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::External, Mode::AdlExt, Mode::Adl];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::External => "EXTERNAL",
            Mode::AdlExt => "ADLEXT",
            Mode::Adl => "ADL",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Violation;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Violation {
                key: PropertyKey::ADLENABLED,
                value: s.to_string(),
                allowed: Mode::ALL.iter().map(|m| m.as_str().to_string()).collect(),
            })
    }
}

/// Effective generation settings for one class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GenOptions {
    pub mode: Mode,
    pub kind: String,
    pub folder: String,
    pub header: HeaderFields,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MemberErrorKind {
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("missing property {0}")]
    MissingProperty(PropertyKey),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("member `{member}`: {kind}")]
pub struct MemberError {
    pub member: String,
    pub kind: MemberErrorKind,
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("{NO_OPEN_PROJECT}")]
    NoOpenProject,
    #[error("{NO_SELECTION}")]
    NoSelection,
    #[error("class `{class}`: {violation}")]
    Validation { class: String, violation: Violation },
    #[error("class `{class}`: ADL folder {folder:?} must be a relative path inside the output root")]
    UnsafeFolder { class: String, folder: String },
    #[error("class `{class}`: {}", failures.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Members { class: String, failures: Vec<MemberError> },
    #[error("*** ERROR(Text): can't handle adl file for class {class} {cause}")]
    Write { class: String, cause: std::io::Error },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Matches a qualified name against a selector glob. `*` and `?` stay
/// within one `::` segment, `**` spans any number of segments, and the bare
/// selector `*` selects everything.
pub fn glob_matches(pattern: &str, qualified_name: &str) -> bool {
    if pattern == "*" {
        return true;
    }
    let pattern: Vec<&str> = pattern.split(SCOPE_SEPARATOR).collect();
    let name: Vec<&str> = qualified_name.split(SCOPE_SEPARATOR).collect();
    match_segments(&pattern, &name)
}

fn match_segments(pattern: &[&str], name: &[&str]) -> bool {
    match pattern.split_first() {
        None => name.is_empty(),
        Some((&"**", rest)) => (0..=name.len()).any(|skip| match_segments(rest, &name[skip..])),
        Some((first, rest)) => match name.split_first() {
            Some((segment, name_rest)) => {
                match_segment(first.as_bytes(), segment.as_bytes()) && match_segments(rest, name_rest)
            }
            None => false,
        },
    }
}

fn match_segment(pattern: &[u8], text: &[u8]) -> bool {
    match pattern.split_first() {
        None => text.is_empty(),
        Some((b'*', rest)) => (0..=text.len()).any(|skip| match_segment(rest, &text[skip..])),
        Some((b'?', rest)) => !text.is_empty() && match_segment(rest, &text[1..]),
        Some((c, rest)) => text.first() == Some(c) && match_segment(rest, &text[1..]),
    }
}

fn in_project(model: &Model, id: ElementId) -> Result<bool, ModelError> {
    let mut cursor = Some(id);
    while let Some(current) = cursor {
        let element = model.element(current)?;
        if !element.is_project_element() {
            return Ok(false);
        }
        cursor = element.parent();
    }
    Ok(true)
}

/// Project-owned CLASS elements whose qualified name matches any selector,
/// in model order.
pub fn select_classes(model: &Model, selectors: &[String]) -> Result<Vec<ElementId>, GenerateError> {
    if model.is_empty() {
        return Err(GenerateError::NoOpenProject);
    }
    let mut selected = Vec::new();
    for class in model.classes() {
        if !in_project(model, class)? {
            continue;
        }
        let name = model.qualified_name(class)?;
        if selectors.iter().any(|s| glob_matches(s, &name)) {
            selected.push(class);
        }
    }
    if selected.is_empty() {
        return Err(GenerateError::NoSelection);
    }
    Ok(selected)
}

/// Class properties override config defaults, which override built-ins.
pub fn resolve_options(model: &Model, class: ElementId, config: &Config) -> Result<GenOptions, GenerateError> {
    let element = model.element(class)?;
    if element.shape() != ShapeType::Class {
        return Err(ModelError::WrongShape {
            id: class,
            expected: ShapeType::Class,
            found: element.shape(),
        }
        .into());
    }
    let class_name = element.name().unwrap_or_default().to_string();
    let schemas = &config.schemas;
    let lookup = |key: &PropertyKey, fallback: &str| -> Result<String, GenerateError> {
        let value = element
            .property(key)
            .or_else(|| schemas.default_for(key))
            .unwrap_or(fallback)
            .to_string();
        schemas
            .validate_value(ShapeType::Class, key, &value)
            .map_err(|violation| GenerateError::Validation {
                class: class_name.clone(),
                violation,
            })?;
        Ok(value)
    };

    let mode = lookup(&PropertyKey::ADLENABLED, Mode::Adl.as_str())?
        .parse::<Mode>()
        .map_err(|violation| GenerateError::Validation {
            class: class_name.clone(),
            violation,
        })?;
    let first_kind = schemas
        .get(&PropertyKey::ADLINTERFACE)
        .and_then(|s| s.allowed.as_ref())
        .and_then(|a| a.first())
        .map_or("interface", String::as_str);
    let kind = lookup(&PropertyKey::ADLINTERFACE, first_kind)?;
    let folder = lookup(&PropertyKey::ADLFOLDER, "")?;
    let safe = Path::new(&folder)
        .components()
        .all(|c| matches!(c, Component::Normal(_) | Component::CurDir));
    if !safe {
        return Err(GenerateError::UnsafeFolder {
            class: class_name,
            folder,
        });
    }
    Ok(GenOptions {
        mode,
        kind,
        folder,
        header: config.defaults.header.clone(),
    })
}

fn required<'e>(member: &'e Element, key: &PropertyKey) -> Result<&'e str, MemberError> {
    member.property(key).ok_or_else(|| MemberError {
        member: member.name().unwrap_or_default().to_string(),
        kind: MemberErrorKind::MissingProperty(key.clone()),
    })
}

fn adl_type(member: &Element, spelling: &str, typemap: &TypeMap) -> Result<String, MemberError> {
    normalize_type(spelling, typemap)
        .map(|t| t.adl_spelling)
        .map_err(|e| MemberError {
            member: member.name().unwrap_or_default().to_string(),
            kind: e.into(),
        })
}

pub fn lower_attribute(member: &Element, typemap: &TypeMap) -> Result<AttributeDecl, MemberError> {
    let name = required(member, &PropertyKey::NAME)?;
    let spelling = required(member, &PropertyKey::TYPE)?;
    let visibility = required(member, &PropertyKey::VISIBILITY)?;
    Ok(AttributeDecl {
        persistent: member.has_property(&PropertyKey::ADLPERSISTENT),
        readonly: member.has_property(&PropertyKey::ADLREADONLY),
        visibility: visibility.to_string(),
        type_spelling: adl_type(member, spelling, typemap)?,
        name: name.to_string(),
    })
}

/// `None` for members without a return type (constructors, destructors).
pub fn lower_operation(
    model: &Model,
    member: &Element,
    typemap: &TypeMap,
) -> Result<Option<OperationDecl>, MemberError> {
    let Some(return_type) = member.property(&PropertyKey::RETURN_TYPE) else {
        return Ok(None);
    };
    let name = required(member, &PropertyKey::NAME)?;
    let visibility = required(member, &PropertyKey::VISIBILITY)?;
    let return_type = adl_type(member, return_type, typemap)?;
    // Only fails for non-operations, which have no RETURN_TYPE.
    let parameters = model.parameters(member.id()).unwrap_or_default();
    let params = parameters
        .into_iter()
        .map(|param| {
            let spelling = required(param, &PropertyKey::TYPE)?;
            Ok(ParamDecl {
                direction: "in".to_string(),
                type_spelling: adl_type(member, spelling, typemap)?,
                name: required(param, &PropertyKey::NAME)?.to_string(),
            })
        })
        .collect::<Result<Vec<_>, MemberError>>()?;
    Ok(Some(OperationDecl {
        visibility: visibility.to_string(),
        return_type,
        name: name.to_string(),
        params,
    }))
}

/// `<Type>.adl` for every non-primitive, non-library type a class refers to,
/// in first-reference order.
pub fn collect_includes(model: &Model, class: ElementId, typemap: &TypeMap) -> Result<Vec<String>, ModelError> {
    let class_name = model.element(class)?.name().unwrap_or_default().to_string();
    let mut spellings = Vec::new();
    for member in model.members(class)? {
        match member.shape() {
            ShapeType::Attribute => spellings.extend(member.property(&PropertyKey::TYPE)),
            ShapeType::Operation => {
                if let Some(return_type) = member.property(&PropertyKey::RETURN_TYPE) {
                    spellings.push(return_type);
                    for param in model.parameters(member.id())? {
                        spellings.extend(param.property(&PropertyKey::TYPE));
                    }
                }
            }
            _ => {}
        }
    }

    let mut includes: Vec<String> = Vec::new();
    for spelling in spellings {
        let Ok(parsed) = normalize_type(spelling, typemap) else {
            continue;
        };
        for name in parsed.named_types() {
            let bare = name.trim_start_matches(SCOPE_SEPARATOR);
            if bare.starts_with("std::") || typemap.contains(name) {
                continue;
            }
            let last = bare.rsplit(SCOPE_SEPARATOR).next().unwrap_or(bare);
            if last == class_name {
                continue;
            }
            let include = format!("{last}.{ADL_EXTENSION}");
            if !includes.contains(&include) {
                includes.push(include);
            }
        }
    }
    Ok(includes)
}

/// Collects lowered members while visiting a class.
struct MemberLowering<'a> {
    typemap: &'a TypeMap,
    attributes: Vec<AttributeDecl>,
    operations: Vec<OperationDecl>,
    failures: Vec<MemberError>,
}

impl ModelVisitor for MemberLowering<'_> {
    type Output = ();

    fn visit_package(&mut self, _: &Model, _: &Element) {}

    fn visit_diagram(&mut self, _: &Model, _: &Element) {}

    fn visit_node(&mut self, _: &Model, _: &Element) {}

    fn visit_member(&mut self, model: &Model, member: &Element) {
        match member.shape() {
            ShapeType::Attribute => match lower_attribute(member, self.typemap) {
                Ok(decl) => self.attributes.push(decl),
                Err(e) => self.failures.push(e),
            },
            ShapeType::Operation => match lower_operation(model, member, self.typemap) {
                Ok(Some(decl)) => self.operations.push(decl),
                Ok(None) => {}
                Err(e) => self.failures.push(e),
            },
            _ => {}
        }
    }
}

/// Builds the unit for one class, or `None` in `EXTERNAL` mode.
pub fn generate_unit(
    model: &Model,
    class: ElementId,
    options: &GenOptions,
    typemap: &TypeMap,
) -> Result<Option<AdlUnit>, GenerateError> {
    let element = model.element(class)?;
    let class_name = element.name().unwrap_or_default();
    let mut unit = AdlUnit::new(class_name, &options.kind, options.header.clone());
    match options.mode {
        Mode::External => return Ok(None),
        Mode::AdlExt => {
            unit.extern_only = true;
            return Ok(Some(unit));
        }
        Mode::Adl => {}
    }

    let mut lowering = MemberLowering {
        typemap,
        attributes: Vec::new(),
        operations: Vec::new(),
        failures: Vec::new(),
    };
    for member in model.members(class)? {
        model.accept(member.id(), &mut lowering)?;
    }
    if !lowering.failures.is_empty() {
        return Err(GenerateError::Members {
            class: class_name.to_string(),
            failures: lowering.failures,
        });
    }
    unit.attributes = lowering.attributes;
    unit.operations = lowering.operations;
    unit.includes = collect_includes(model, class, typemap)?;
    Ok(Some(unit))
}

/// Writes `<out_root>/<folder>/<Class>.adl`, announcing it on `diagnostics`.
/// The file is written beside its target and renamed into place, so a
/// failure leaves no partial output.
pub fn write_unit(
    unit: &AdlUnit,
    out_root: &Path,
    folder: &str,
    diagnostics: &mut dyn Write,
) -> Result<PathBuf, GenerateError> {
    let _ = writeln!(diagnostics, "ADL generation for class {}", unit.class_name);
    let dir = out_root.join(folder);
    let target = dir.join(unit.file_name());
    let staging = dir.join(format!(".{}.tmp", unit.file_name()));
    let result = fs::create_dir_all(&dir)
        .and_then(|()| fs::write(&staging, render_unit(unit)))
        .and_then(|()| fs::rename(&staging, &target));
    if let Err(cause) = result {
        let _ = fs::remove_file(&staging);
        return Err(GenerateError::Write {
            class: unit.class_name.clone(),
            cause,
        });
    }
    Ok(target)
}

/// Result of visiting one class.
#[derive(Debug)]
pub struct ClassOutcome {
    pub class: ElementId,
    pub qualified_name: String,
    pub options: Option<GenOptions>,
    pub result: Result<Option<AdlUnit>, GenerateError>,
}

/// Walks packages, diagrams and classes and generates a unit for every
/// project class reached. Imported elements are skipped along with their
/// contents.
pub struct AdlOutVisitor<'a> {
    config: &'a Config,
    typemap: &'a TypeMap,
    outcomes: Vec<ClassOutcome>,
    visited: HashSet<ElementId>,
}

impl<'a> AdlOutVisitor<'a> {
    pub fn new(config: &'a Config, typemap: &'a TypeMap) -> Self {
        AdlOutVisitor {
            config,
            typemap,
            outcomes: Vec::new(),
            visited: HashSet::new(),
        }
    }

    pub fn into_outcomes(self) -> Vec<ClassOutcome> {
        self.outcomes
    }

    fn visit_container(&mut self, model: &Model, container: &Element) {
        // A diagram leads back to its package, which may contain it.
        if !container.is_project_element() || !self.visited.insert(container.id()) {
            return;
        }
        for &child in container.children() {
            let _ = model.accept(child, self);
        }
    }
}

impl ModelVisitor for AdlOutVisitor<'_> {
    type Output = ();

    fn visit_package(&mut self, model: &Model, package: &Element) {
        self.visit_container(model, package);
    }

    fn visit_diagram(&mut self, model: &Model, diagram: &Element) {
        if let Ok(Some(package)) = model.containing_package(diagram.id()) {
            self.visit_package(model, package);
        }
    }

    fn visit_node(&mut self, model: &Model, node: &Element) {
        if node.shape() != ShapeType::Class || !node.is_project_element() {
            return;
        }
        if self.outcomes.iter().any(|o| o.class == node.id()) {
            return;
        }
        let qualified_name = model.qualified_name(node.id()).unwrap_or_default();
        let options = resolve_options(model, node.id(), self.config);
        let (options, result) = match options {
            Ok(options) => {
                let result = generate_unit(model, node.id(), &options, self.typemap);
                (Some(options), result)
            }
            Err(e) => (None, Err(e)),
        };
        self.outcomes.push(ClassOutcome {
            class: node.id(),
            qualified_name,
            options,
            result,
        });
    }

    fn visit_member(&mut self, _: &Model, _: &Element) {}
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attr(model: &mut Model, class: ElementId, name: &str, ty: &str, flags: &[PropertyKey]) -> ElementId {
        let mut props = vec![
            (PropertyKey::NAME, name.to_string()),
            (PropertyKey::TYPE, ty.to_string()),
            (PropertyKey::VISIBILITY, "private".to_string()),
        ];
        props.extend(flags.iter().map(|f| (f.clone(), String::new())));
        model.add_element(Some(class), ShapeType::Attribute, props).unwrap()
    }

    fn class(model: &mut Model, pkg: ElementId, name: &str, props: &[(PropertyKey, &str)]) -> ElementId {
        let mut all = vec![
            (PropertyKey::NAME, name.to_string()),
            (PropertyKey::MODEL_PART, "Model".to_string()),
        ];
        all.extend(props.iter().map(|(k, v)| (k.clone(), v.to_string())));
        model.add_element(Some(pkg), ShapeType::Class, all).unwrap()
    }

    #[test]
    fn globs() {
        assert!(glob_matches("*", "a::b::C"));
        assert!(glob_matches("a::*", "a::C"));
        assert!(!glob_matches("a::*", "a::b::C"));
        assert!(glob_matches("a::**", "a::b::C"));
        assert!(glob_matches("**::C", "C"));
        assert!(glob_matches("LArTB*", "LArTBRun"));
        assert!(glob_matches("?x", "ax"));
        assert!(!glob_matches("b::*", "a::C"));
    }

    #[test]
    fn selection_errors() {
        let model = Model::new();
        assert!(matches!(
            select_classes(&model, &["*".into()]),
            Err(GenerateError::NoOpenProject)
        ));

        let mut model = Model::new();
        let pkg = model.add_package(None, "p").unwrap();
        model
            .add_element(
                Some(pkg),
                ShapeType::Class,
                [
                    (PropertyKey::NAME, "Lib".into()),
                    (PropertyKey::MODEL_PART, "Imported".into()),
                ],
            )
            .unwrap();
        let err = select_classes(&model, &["*".into()]).unwrap_err();
        assert_eq!(err.to_string(), "No selection was made.");
        assert_eq!(GenerateError::NoOpenProject.to_string(), "No open project");
    }

    #[test]
    fn selection_by_prefix() {
        let mut model = Model::new();
        let file = model.add_package(None, "f.h").unwrap();
        model.put_property(file, PropertyKey::FILE, Some("f.h")).unwrap();
        let ns = model.add_package(Some(file), "LArTBEvent").unwrap();
        let ids: Vec<_> = ["A", "B", "C"].iter().map(|n| class(&mut model, ns, n, &[])).collect();
        class(&mut model, file, "Other", &[]);
        // Oracle: prefix filter over the qualified names in the index.
        let expected: Vec<ElementId> = model
            .classes()
            .into_iter()
            .filter(|&id| model.qualified_name(id).unwrap().starts_with("LArTBEvent::"))
            .collect();
        assert_eq!(expected, ids);
        assert_eq!(select_classes(&model, &["LArTBEvent::*".into()]).unwrap(), ids);
        assert_eq!(select_classes(&model, &["*".into()]).unwrap().len(), 4);
    }

    #[test]
    fn imported_packages_hide_their_classes() {
        let mut model = Model::new();
        let pkg = model.add_package(None, "lib").unwrap();
        model
            .put_property(pkg, PropertyKey::MODEL_PART, Some("Imported"))
            .unwrap();
        class(&mut model, pkg, "A", &[]);
        assert!(matches!(
            select_classes(&model, &["**".into()]),
            Err(GenerateError::NoSelection)
        ));
    }

    #[test]
    fn options_resolution() {
        let mut model = Model::new();
        let pkg = model.add_package(None, "p").unwrap();
        let plain = class(&mut model, pkg, "Plain", &[]);
        let contained = class(&mut model, pkg, "C", &[(PropertyKey::ADLINTERFACE, "ContainedObject")]);
        let external = class(&mut model, pkg, "E", &[(PropertyKey::ADLENABLED, "EXTERNAL")]);
        let bogus = class(&mut model, pkg, "B", &[(PropertyKey::ADLENABLED, "BOGUS")]);
        let escape = class(&mut model, pkg, "X", &[(PropertyKey::ADLFOLDER, "../up")]);
        let config = Config::default();

        let options = resolve_options(&model, plain, &config).unwrap();
        assert_eq!(
            (options.mode, options.kind.as_str(), options.folder.as_str()),
            (Mode::Adl, "interface", "")
        );
        assert_eq!(
            resolve_options(&model, contained, &config).unwrap().kind,
            "ContainedObject"
        );
        let options = resolve_options(&model, external, &config).unwrap();
        assert_eq!(options.mode, Mode::External);
        assert!(generate_unit(&model, external, &options, &TypeMap::default())
            .unwrap()
            .is_none());
        assert!(matches!(
            resolve_options(&model, bogus, &config),
            Err(GenerateError::Validation { .. })
        ));
        assert!(matches!(
            resolve_options(&model, escape, &config),
            Err(GenerateError::UnsafeFolder { .. })
        ));
        assert!(matches!(
            resolve_options(&model, pkg, &config),
            Err(GenerateError::Model(_))
        ));
    }

    #[test]
    fn attribute_lowering() {
        let mut model = Model::new();
        let pkg = model.add_package(None, "p").unwrap();
        let c = class(&mut model, pkg, "C", &[]);
        let hv = attr(&mut model, c, "HVdata", "std::vector<double>", &[]);
        let both = attr(
            &mut model,
            c,
            "HVdata",
            "std::vector<double>",
            &[PropertyKey::ADLPERSISTENT, PropertyKey::ADLREADONLY],
        );
        let ptr = attr(&mut model, c, "p", "double*", &[]);
        let map = TypeMap::default();

        let decl = lower_attribute(model.element(hv).unwrap(), &map).unwrap();
        assert_eq!(decl.render(), "private attribute std::vector <double> HVdata;");
        let decl = lower_attribute(model.element(both).unwrap(), &map).unwrap();
        assert_eq!(
            decl.render(),
            "persistent readonly private attribute std::vector <double> HVdata;"
        );
        let err = lower_attribute(model.element(ptr).unwrap(), &map).unwrap_err();
        assert_eq!(err.member, "p");
        assert!(matches!(err.kind, MemberErrorKind::Type(TypeError::Unsupported { .. })));
    }

    #[test]
    fn member_failures_are_aggregated() {
        let mut model = Model::new();
        let pkg = model.add_package(None, "p").unwrap();
        let c = class(&mut model, pkg, "C", &[]);
        attr(&mut model, c, "a", "double*", &[]);
        attr(&mut model, c, "b", "long", &[]);
        attr(&mut model, c, "d", "Foo&", &[]);
        let options = resolve_options(&model, c, &Config::default()).unwrap();
        let err = generate_unit(&model, c, &options, &TypeMap::default()).unwrap_err();
        let GenerateError::Members { failures, .. } = &err else {
            panic!("{err}")
        };
        let names: Vec<_> = failures.iter().map(|f| f.member.as_str()).collect();
        assert_eq!(names, ["a", "d"]);
    }

    #[test]
    fn includes() {
        let mut model = Model::new();
        let pkg = model.add_package(None, "p").unwrap();
        let c = class(&mut model, pkg, "Event", &[]);
        attr(&mut model, c, "run", "LArTBRun", &[]);
        attr(&mut model, c, "again", "ns::LArTBRun", &[]);
        attr(&mut model, c, "hits", "std::vector<Hit>", &[]);
        attr(&mut model, c, "name", "std::string", &[]);
        attr(&mut model, c, "self_ref", "std::vector<Event>", &[]);
        attr(&mut model, c, "n", "int", &[]);
        assert_eq!(
            collect_includes(&model, c, &TypeMap::default()).unwrap(),
            ["LArTBRun.adl", "Hit.adl"]
        );
    }

    #[test]
    fn visitor_skips_imported_and_external() {
        let mut model = Model::new();
        let pkg = model.add_package(None, "p").unwrap();
        let a = class(&mut model, pkg, "A", &[]);
        class(&mut model, pkg, "E", &[(PropertyKey::ADLENABLED, "EXTERNAL")]);
        model
            .add_element(
                Some(pkg),
                ShapeType::Class,
                [
                    (PropertyKey::NAME, "Lib".into()),
                    (PropertyKey::MODEL_PART, "Imported".into()),
                ],
            )
            .unwrap();
        let diagram = model
            .add_element(Some(pkg), ShapeType::Diagram, [(PropertyKey::NAME, "d".into())])
            .unwrap();
        model.add_diagram_reference(diagram, a).unwrap();

        let config = Config::default();
        let map = TypeMap::default();
        let mut visitor = AdlOutVisitor::new(&config, &map);
        model.accept(diagram, &mut visitor).unwrap();
        let outcomes = visitor.into_outcomes();
        let names: Vec<_> = outcomes.iter().map(|o| o.qualified_name.as_str()).collect();
        assert_eq!(names, ["p::A", "p::E"]);
        assert!(outcomes[0].result.as_ref().unwrap().is_some());
        assert!(outcomes[1].result.as_ref().unwrap().is_none());
    }
}
