//! In-memory read-write class model.
//!
//! A [`Model`] is an arena of [`Element`]s. Every element carries a shape
//! (stored as the `SHAPE_TYPE` property), an open-ended string property map
//! and an ordered list of children. Built-in keys such as `NAME` or `TYPE`
//! share one flat namespace with the ADL extension keys (`ADLENABLED`,
//! `ADLPERSISTENT`, ...), so tooling can attach new properties without
//! changing the model itself.
//!
//! Traversal goes through [`Model::accept`], which dispatches to exactly one
//! [`ModelVisitor`] callback chosen by the element's shape. Recursion is left
//! to the visitor.

use std::borrow::Cow;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{SchemaSet, Violation};

/// Value of `MODEL_PART` that marks an element as owned by the project.
pub const MODEL_PART_PROJECT: &str = "Model";

/// Separator between qualified name segments.
pub const SCOPE_SEPARATOR: &str = "::";

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct PropertyKey(Cow<'static, str>);

impl PropertyKey {
    pub const NAME: PropertyKey = PropertyKey::from_static("NAME");
    pub const TYPE: PropertyKey = PropertyKey::from_static("TYPE");
    pub const SHAPE_TYPE: PropertyKey = PropertyKey::from_static("SHAPE_TYPE");
    pub const MODEL_PART: PropertyKey = PropertyKey::from_static("MODEL_PART");
    pub const RETURN_TYPE: PropertyKey = PropertyKey::from_static("RETURN_TYPE");
    pub const VISIBILITY: PropertyKey = PropertyKey::from_static("VISIBILITY");
    pub const INTERFACE: PropertyKey = PropertyKey::from_static("INTERFACE");
    pub const EXTENDS: PropertyKey = PropertyKey::from_static("EXTENDS");
    /// Source file a file-level package was built from.
    pub const FILE: PropertyKey = PropertyKey::from_static("FILE");
    pub const ADLENABLED: PropertyKey = PropertyKey::from_static("ADLENABLED");
    pub const ADLFOLDER: PropertyKey = PropertyKey::from_static("ADLFOLDER");
    pub const ADLINTERFACE: PropertyKey = PropertyKey::from_static("ADLINTERFACE");
    pub const ADLPERSISTENT: PropertyKey = PropertyKey::from_static("ADLPERSISTENT");
    pub const ADLREADONLY: PropertyKey = PropertyKey::from_static("ADLREADONLY");

    const fn from_static(name: &'static str) -> Self {
        PropertyKey(Cow::Borrowed(name))
    }

    pub fn new(name: impl Into<String>) -> Result<Self, ModelError> {
        let name = name.into();
        if is_valid_key(&name) {
            Ok(PropertyKey(Cow::Owned(name)))
        } else {
            Err(ModelError::InvalidKey(name))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn is_valid_key(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_uppercase())
        && chars.all(|c| c.is_ascii_uppercase() || c.is_ascii_digit() || c == '_')
}

impl fmt::Display for PropertyKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for PropertyKey {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PropertyKey::new(s)
    }
}

impl TryFrom<String> for PropertyKey {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        PropertyKey::new(value)
    }
}

impl From<PropertyKey> for String {
    fn from(key: PropertyKey) -> Self {
        key.0.into_owned()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ShapeType {
    Package,
    Diagram,
    Class,
    Operation,
    Attribute,
    Parameter,
}

impl ShapeType {
    pub const ALL: [ShapeType; 6] = [
        ShapeType::Package,
        ShapeType::Diagram,
        ShapeType::Class,
        ShapeType::Operation,
        ShapeType::Attribute,
        ShapeType::Parameter,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ShapeType::Package => "PACKAGE",
            ShapeType::Diagram => "DIAGRAM",
            ShapeType::Class => "CLASS",
            ShapeType::Operation => "OPERATION",
            ShapeType::Attribute => "ATTRIBUTE",
            ShapeType::Parameter => "PARAMETER",
        }
    }

    /// Whether an element of this shape may own a child of shape `child`.
    pub fn may_contain(self, child: ShapeType) -> bool {
        use ShapeType::*;
        matches!(
            (self, child),
            (Package, Package | Diagram | Class) | (Class, Operation | Attribute) | (Operation, Parameter)
        )
    }

    fn required_keys(self) -> &'static [PropertyKey] {
        const NAME_ONLY: &[PropertyKey] = &[PropertyKey::NAME];
        const NAME_TYPE: &[PropertyKey] = &[PropertyKey::NAME, PropertyKey::TYPE];
        match self {
            ShapeType::Class | ShapeType::Operation => NAME_ONLY,
            ShapeType::Attribute | ShapeType::Parameter => NAME_TYPE,
            ShapeType::Package | ShapeType::Diagram => &[],
        }
    }
}

impl fmt::Display for ShapeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShapeType {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ShapeType::ALL
            .into_iter()
            .find(|shape| shape.as_str() == s)
            .ok_or_else(|| ModelError::UnknownShape(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(usize);

impl ElementId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Element {
    id: ElementId,
    properties: BTreeMap<PropertyKey, String>,
    children: Vec<ElementId>,
    parent: Option<ElementId>,
    /// Classes shown on a diagram. Only DIAGRAM elements have references;
    /// the referenced classes are owned elsewhere.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    references: Vec<ElementId>,
}

impl Element {
    pub fn id(&self) -> ElementId {
        self.id
    }

    pub fn shape(&self) -> ShapeType {
        self.properties
            .get(&PropertyKey::SHAPE_TYPE)
            .and_then(|s| s.parse().ok())
            .expect("SHAPE_TYPE is set on construction")
    }

    pub fn name(&self) -> Option<&str> {
        self.property(&PropertyKey::NAME)
    }

    pub fn property(&self, key: &PropertyKey) -> Option<&str> {
        self.properties.get(key).map(String::as_str)
    }

    pub fn has_property(&self, key: &PropertyKey) -> bool {
        self.properties.contains_key(key)
    }

    pub fn properties(&self) -> &BTreeMap<PropertyKey, String> {
        &self.properties
    }

    pub fn children(&self) -> &[ElementId] {
        &self.children
    }

    pub fn parent(&self) -> Option<ElementId> {
        self.parent
    }

    pub fn references(&self) -> &[ElementId] {
        &self.references
    }

    pub fn is_project_element(&self) -> bool {
        self.property(&PropertyKey::MODEL_PART) == Some(MODEL_PART_PROJECT)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown element {0}")]
    UnknownElement(ElementId),
    #[error("invalid property key `{0}`")]
    InvalidKey(String),
    #[error("unknown shape type `{0}`")]
    UnknownShape(String),
    #[error("element {id} is a {found}, expected {expected}")]
    WrongShape {
        id: ElementId,
        expected: ShapeType,
        found: ShapeType,
    },
    #[error("a {parent} cannot contain a {child}")]
    IllegalChild { parent: ShapeType, child: ShapeType },
    #[error("only packages may be model roots, got {0}")]
    IllegalRoot(ShapeType),
    #[error("{shape} element is missing required property {key}")]
    MissingProperty { shape: ShapeType, key: PropertyKey },
    #[error("duplicate qualified name `{0}`")]
    NameCollision(String),
    #[error("property {key} of element {id} cannot be changed after construction")]
    Immutable { id: ElementId, key: PropertyKey },
    #[error("element {0} is a PARAMETER; parameters are read through their operation")]
    Dispatch(ElementId),
    #[error(transparent)]
    Validation(#[from] Violation),
}

/// Double dispatch target for [`Model::accept`].
pub trait ModelVisitor {
    type Output;

    fn visit_package(&mut self, model: &Model, package: &Element) -> Self::Output;
    fn visit_diagram(&mut self, model: &Model, diagram: &Element) -> Self::Output;
    fn visit_node(&mut self, model: &Model, node: &Element) -> Self::Output;
    fn visit_member(&mut self, model: &Model, member: &Element) -> Self::Output;
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Model {
    elements: Vec<Element>,
    roots: Vec<ElementId>,
    index: BTreeMap<String, ElementId>,
}

impl Model {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }

    pub fn roots(&self) -> &[ElementId] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, id: ElementId) -> Result<&Element, ModelError> {
        self.elements.get(id.0).ok_or(ModelError::UnknownElement(id))
    }

    fn element_mut(&mut self, id: ElementId) -> Result<&mut Element, ModelError> {
        self.elements.get_mut(id.0).ok_or(ModelError::UnknownElement(id))
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> {
        self.elements.iter()
    }

    /// Qualified name → CLASS element, in name order.
    pub fn index(&self) -> &BTreeMap<String, ElementId> {
        &self.index
    }

    pub fn lookup(&self, qualified_name: &str) -> Option<ElementId> {
        self.index.get(qualified_name).copied()
    }

    /// Adds an element under `parent` (or as a root package when `parent` is
    /// `None`), enforcing shape legality and required properties.
    pub fn add_element(
        &mut self,
        parent: Option<ElementId>,
        shape: ShapeType,
        properties: impl IntoIterator<Item = (PropertyKey, String)>,
    ) -> Result<ElementId, ModelError> {
        match parent {
            Some(parent_id) => {
                let parent_shape = self.element(parent_id)?.shape();
                if !parent_shape.may_contain(shape) {
                    return Err(ModelError::IllegalChild {
                        parent: parent_shape,
                        child: shape,
                    });
                }
            }
            None if shape != ShapeType::Package => return Err(ModelError::IllegalRoot(shape)),
            None => {}
        }

        let mut props: BTreeMap<PropertyKey, String> = properties.into_iter().collect();
        props.insert(PropertyKey::SHAPE_TYPE, shape.as_str().to_string());
        if let Some(key) = shape.required_keys().iter().find(|k| !props.contains_key(*k)) {
            return Err(ModelError::MissingProperty {
                shape,
                key: key.clone(),
            });
        }

        let id = ElementId(self.elements.len());
        let qualified = if shape == ShapeType::Class {
            let name = &props[&PropertyKey::NAME];
            let qualified = self.scope_prefix(parent)? + name;
            if self.index.contains_key(&qualified) {
                return Err(ModelError::NameCollision(qualified));
            }
            Some(qualified)
        } else {
            None
        };

        self.elements.push(Element {
            id,
            properties: props,
            children: Vec::new(),
            parent,
            references: Vec::new(),
        });
        match parent {
            Some(parent_id) => self.elements[parent_id.0].children.push(id),
            None => self.roots.push(id),
        }
        if let Some(qualified) = qualified {
            self.index.insert(qualified, id);
        }
        Ok(id)
    }

    pub fn add_package(&mut self, parent: Option<ElementId>, name: &str) -> Result<ElementId, ModelError> {
        self.add_element(
            parent,
            ShapeType::Package,
            [
                (PropertyKey::NAME, name.to_string()),
                (PropertyKey::MODEL_PART, MODEL_PART_PROJECT.to_string()),
            ],
        )
    }

    /// Puts `class` on `diagram` without changing ownership.
    pub fn add_diagram_reference(&mut self, diagram: ElementId, class: ElementId) -> Result<(), ModelError> {
        self.expect_shape(class, ShapeType::Class)?;
        self.expect_shape(diagram, ShapeType::Diagram)?;
        self.element_mut(diagram)?.references.push(class);
        Ok(())
    }

    fn expect_shape(&self, id: ElementId, expected: ShapeType) -> Result<&Element, ModelError> {
        let element = self.element(id)?;
        let found = element.shape();
        if found != expected {
            return Err(ModelError::WrongShape { id, expected, found });
        }
        Ok(element)
    }

    /// `ns::Inner::` for an element whose parent chain is `ns`, `Inner`.
    /// File-level packages (those carrying `FILE`) do not contribute.
    fn scope_prefix(&self, mut cursor: Option<ElementId>) -> Result<String, ModelError> {
        let mut segments = Vec::new();
        while let Some(id) = cursor {
            let element = self.element(id)?;
            if !element.has_property(&PropertyKey::FILE) {
                if let Some(name) = element.name() {
                    segments.push(name);
                }
            }
            cursor = element.parent;
        }
        let mut prefix = String::new();
        for segment in segments.iter().rev() {
            prefix.push_str(segment);
            prefix.push_str(SCOPE_SEPARATOR);
        }
        Ok(prefix)
    }

    pub fn qualified_name(&self, id: ElementId) -> Result<String, ModelError> {
        let element = self.element(id)?;
        let name = element.name().unwrap_or_default();
        Ok(self.scope_prefix(element.parent)? + name)
    }

    pub fn get_property(&self, id: ElementId, key: &PropertyKey) -> Result<Option<&str>, ModelError> {
        Ok(self.element(id)?.property(key))
    }

    pub fn has_property(&self, id: ElementId, key: &PropertyKey) -> Result<bool, ModelError> {
        Ok(self.element(id)?.has_property(key))
    }

    /// Sets (`Some`) or removes (`None`) a property. `NAME` and `SHAPE_TYPE`
    /// are fixed at construction.
    pub fn put_property(&mut self, id: ElementId, key: PropertyKey, value: Option<&str>) -> Result<(), ModelError> {
        let element = self.element_mut(id)?;
        if key == PropertyKey::NAME || key == PropertyKey::SHAPE_TYPE {
            return Err(ModelError::Immutable { id, key });
        }
        match value {
            Some(value) => {
                element.properties.insert(key, value.to_string());
            }
            None => {
                element.properties.remove(&key);
            }
        }
        Ok(())
    }

    /// [`Model::put_property`] after checking the value against `schemas`.
    pub fn put_property_checked(
        &mut self,
        id: ElementId,
        key: PropertyKey,
        value: Option<&str>,
        schemas: &SchemaSet,
    ) -> Result<(), ModelError> {
        let shape = self.element(id)?.shape();
        if let Some(value) = value {
            schemas.validate_value(shape, &key, value)?;
        }
        self.put_property(id, key, value)
    }

    /// OPERATION and ATTRIBUTE children of a class, in declaration order.
    pub fn members(&self, class: ElementId) -> Result<Vec<&Element>, ModelError> {
        let class = self.expect_shape(class, ShapeType::Class)?;
        class
            .children
            .iter()
            .map(|&child| self.element(child))
            .filter(|child| {
                child
                    .as_ref()
                    .map(|c| matches!(c.shape(), ShapeType::Operation | ShapeType::Attribute))
                    .unwrap_or(true)
            })
            .collect()
    }

    /// PARAMETER children of an operation, in declaration order.
    pub fn parameters(&self, operation: ElementId) -> Result<Vec<&Element>, ModelError> {
        let operation = self.expect_shape(operation, ShapeType::Operation)?;
        operation.children.iter().map(|&child| self.element(child)).collect()
    }

    /// Nearest PACKAGE ancestor of an element.
    pub fn containing_package(&self, id: ElementId) -> Result<Option<&Element>, ModelError> {
        let mut cursor = self.element(id)?.parent;
        while let Some(parent) = cursor {
            let element = self.element(parent)?;
            if element.shape() == ShapeType::Package {
                return Ok(Some(element));
            }
            cursor = element.parent;
        }
        Ok(None)
    }

    pub fn is_project_element(&self, id: ElementId) -> Result<bool, ModelError> {
        Ok(self.element(id)?.is_project_element())
    }

    /// Every CLASS element in depth-first model order.
    pub fn classes(&self) -> Vec<ElementId> {
        let mut out = Vec::new();
        let mut stack: Vec<ElementId> = self.roots.iter().rev().copied().collect();
        while let Some(id) = stack.pop() {
            let element = &self.elements[id.0];
            if element.shape() == ShapeType::Class {
                out.push(id);
            }
            stack.extend(element.children.iter().rev().copied());
        }
        out
    }

    pub fn accept<V: ModelVisitor>(&self, id: ElementId, visitor: &mut V) -> Result<V::Output, ModelError> {
        let element = self.element(id)?;
        Ok(match element.shape() {
            ShapeType::Package => visitor.visit_package(self, element),
            ShapeType::Diagram => visitor.visit_diagram(self, element),
            ShapeType::Class => visitor.visit_node(self, element),
            ShapeType::Operation | ShapeType::Attribute => visitor.visit_member(self, element),
            ShapeType::Parameter => return Err(ModelError::Dispatch(id)),
        })
    }

    /// One line per element: indentation, shape, name and the remaining
    /// properties sorted by key.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for &root in &self.roots {
            self.dump_element(root, 0, &mut out);
        }
        out
    }

    fn dump_element(&self, id: ElementId, depth: usize, out: &mut String) {
        use std::fmt::Write;

        let element = &self.elements[id.0];
        let indent = "  ".repeat(depth);
        let _ = write!(out, "{indent}{} {}", element.shape(), element.name().unwrap_or("-"));
        for (key, value) in &element.properties {
            if *key == PropertyKey::NAME || *key == PropertyKey::SHAPE_TYPE {
                continue;
            }
            let _ = write!(out, " {key}={value:?}");
        }
        out.push('\n');
        for &reference in &element.references {
            let name = self.qualified_name(reference).unwrap_or_default();
            let _ = writeln!(out, "{indent}  REF {name}");
        }
        for &child in &element.children {
            self.dump_element(child, depth + 1, out);
        }
    }
}
