//! Inspector-style configuration files.
//!
//! The format is line oriented. Each logical line is `key.path = value`;
//! a physical line whose first non-blank character is `\` continues the
//! previous logical line. A value starting with `(` is an enumeration:
//!
//! ```text
//! inspector.node.element.*.Class.item.ADL.item.ADLENABLED =
//! \ ( {
//! \ values := {"EXTERNAL","ADLEXT","ADL"},
//! \ names := {"Explicit extern","Extern in .adl","Full ADL"}
//! \ }
//! \ )
//! ```
//!
//! Anything else is a scalar. Blank lines and lines starting with `#` are
//! skipped.
//!
//! Only the trailing segments of a key path carry meaning here:
//!
//! | key path ends with            | effect                                  |
//! |-------------------------------|-----------------------------------------|
//! | `.KEY = ( {...} )`            | allowed values and display names of KEY |
//! | `.KEY = text`                 | default value of KEY                    |
//! | `.KEY.default = text`         | default value of KEY (wins over above)  |
//! | `.KEY.name = text`            | human label of KEY (`n`, `na` accepted) |
//! | `adl.header.title` etc.       | header comment fields                   |
//! | `adl.typemap.<c++ type>`      | C++ → ADL type mapping                  |
//!
//! A `Class`, `Attribute`, `Operation` or `Member` segment restricts the
//! shapes a schema applies to; without one it applies to every shape.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use crate::frontend::TypeMap;
use crate::model::{PropertyKey, ShapeType};

pub const DEFAULT_TITLE: &str = "Module ADL generator for Together";
pub const DEFAULT_AUTHOR: &str = "Massimo_Marino@lbl.gov";
pub const DEFAULT_VERSION: &str = "0.9.6";

const HEADER_PREFIX: &str = "adl.header.";
const TYPEMAP_PREFIX: &str = "adl.typemap.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Payload {
    Scalar(String),
    Enum { values: Vec<String>, names: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfigEntry {
    pub key_path: String,
    pub payload: Payload,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config directory {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}line {line}: {message}", file.as_ref().map(|f| format!("{}: ", f.display())).unwrap_or_default())]
    Parse {
        file: Option<PathBuf>,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Invalid(String),
}

impl ConfigError {
    fn parse(line: usize, message: impl Into<String>) -> Self {
        ConfigError::Parse {
            file: None,
            line,
            message: message.into(),
        }
    }

    fn in_file(self, path: &Path) -> Self {
        match self {
            ConfigError::Parse { line, message, .. } => ConfigError::Parse {
                file: Some(path.to_path_buf()),
                line,
                message,
            },
            other => other,
        }
    }
}

/// A value offered for a schema-governed property that is not enumerated.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid value {value:?} for {key}; allowed: {{{}}}", allowed.join(", "))]
pub struct Violation {
    pub key: PropertyKey,
    pub value: String,
    pub allowed: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PropertySchema {
    pub key: PropertyKey,
    pub applies_to: BTreeSet<ShapeType>,
    pub allowed: Option<Vec<String>>,
    pub display_names: Option<Vec<String>>,
    pub default: Option<String>,
    pub label: Option<String>,
}

impl PropertySchema {
    fn new(key: PropertyKey) -> Self {
        PropertySchema {
            key,
            applies_to: BTreeSet::new(),
            allowed: None,
            display_names: None,
            default: None,
            label: None,
        }
    }

    fn enumerated(key: PropertyKey, shape: ShapeType, values: &[&str], names: &[&str], default: &str) -> Self {
        PropertySchema {
            applies_to: BTreeSet::from([shape]),
            allowed: Some(values.iter().map(|s| s.to_string()).collect()),
            display_names: Some(names.iter().map(|s| s.to_string()).collect()),
            default: Some(default.to_string()),
            ..PropertySchema::new(key)
        }
    }

    pub fn applies(&self, shape: ShapeType) -> bool {
        self.applies_to.is_empty() || self.applies_to.contains(&shape)
    }

    pub fn admits(&self, value: &str) -> bool {
        self.allowed
            .as_ref()
            .is_none_or(|allowed| allowed.iter().any(|a| a == value))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SchemaSet {
    schemas: BTreeMap<PropertyKey, PropertySchema>,
}

impl SchemaSet {
    /// The ADLENABLED and ADLINTERFACE enumerations.
    pub fn builtin() -> Self {
        let mut set = SchemaSet::default();
        set.insert(PropertySchema::enumerated(
            PropertyKey::ADLENABLED,
            ShapeType::Class,
            &["EXTERNAL", "ADLEXT", "ADL"],
            &["Explicit extern", "Extern in .adl", "Full ADL"],
            "ADL",
        ));
        set.insert(PropertySchema::enumerated(
            PropertyKey::ADLINTERFACE,
            ShapeType::Class,
            &["interface", "DataObject", "ContainedObject"],
            &["interface", "DataObject", "ContainedObject"],
            "interface",
        ));
        set
    }

    pub fn insert(&mut self, schema: PropertySchema) {
        self.schemas.insert(schema.key.clone(), schema);
    }

    pub fn get(&self, key: &PropertyKey) -> Option<&PropertySchema> {
        self.schemas.get(key)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PropertySchema> {
        self.schemas.values()
    }

    /// The schema governing `key` on elements of `shape`, if any.
    pub fn governing(&self, shape: ShapeType, key: &PropertyKey) -> Option<&PropertySchema> {
        self.schemas.get(key).filter(|s| s.applies(shape))
    }

    pub fn validate_value(&self, shape: ShapeType, key: &PropertyKey, value: &str) -> Result<(), Violation> {
        match self.governing(shape, key) {
            Some(schema) if !schema.admits(value) => Err(Violation {
                key: key.clone(),
                value: value.to_string(),
                allowed: schema.allowed.clone().unwrap_or_default(),
            }),
            _ => Ok(()),
        }
    }

    pub fn default_for(&self, key: &PropertyKey) -> Option<&str> {
        self.schemas.get(key).and_then(|s| s.default.as_deref())
    }

    fn entry(&mut self, key: PropertyKey) -> &mut PropertySchema {
        self.schemas
            .entry(key.clone())
            .or_insert_with(|| PropertySchema::new(key))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HeaderFields {
    pub title: String,
    pub author: String,
    pub version: String,
}

impl Default for HeaderFields {
    fn default() -> Self {
        HeaderFields {
            title: DEFAULT_TITLE.to_string(),
            author: DEFAULT_AUTHOR.to_string(),
            version: DEFAULT_VERSION.to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct GeneratorDefaults {
    pub header: HeaderFields,
    pub typemap: TypeMap,
}

/// Merged configuration: raw entries (last definition of a key path wins,
/// first-definition order kept) plus what they mean for generation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Config {
    entries: IndexMap<String, Payload>,
    pub schemas: SchemaSet,
    pub defaults: GeneratorDefaults,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            entries: IndexMap::new(),
            schemas: SchemaSet::builtin(),
            defaults: GeneratorDefaults::default(),
        }
    }
}

impl Config {
    pub fn from_entries(entries: impl IntoIterator<Item = ConfigEntry>) -> Result<Self, ConfigError> {
        let mut config = Config::default();
        config.merge(entries)?;
        Ok(config)
    }

    /// Overlays `entries` on the current entries key by key and rebuilds the
    /// derived schemas and defaults.
    pub fn merge(&mut self, entries: impl IntoIterator<Item = ConfigEntry>) -> Result<(), ConfigError> {
        for entry in entries {
            self.entries.insert(entry.key_path, entry.payload);
        }
        let (schemas, defaults) = interpret(&self.entries)?;
        self.schemas = schemas;
        self.defaults = defaults;
        Ok(())
    }

    pub fn entries(&self) -> impl Iterator<Item = ConfigEntry> + '_ {
        self.entries.iter().map(|(key_path, payload)| ConfigEntry {
            key_path: key_path.clone(),
            payload: payload.clone(),
        })
    }
}

/// Loads and merges every regular file in `dir`, in file name order.
pub fn load_config_dir(dir: &Path) -> Result<Config, ConfigError> {
    let io_err = |source| ConfigError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err)? {
        let entry = entry.map_err(io_err)?;
        if entry.file_type().map_err(io_err)?.is_file() {
            files.push(entry.path());
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));

    let mut config = Config::default();
    for file in files {
        let text = fs::read_to_string(&file).map_err(|source| ConfigError::Io {
            path: file.clone(),
            source,
        })?;
        let entries = parse_config(&text).map_err(|e| e.in_file(&file))?;
        config.merge(entries).map_err(|e| e.in_file(&file))?;
    }
    Ok(config)
}

fn interpret(entries: &IndexMap<String, Payload>) -> Result<(SchemaSet, GeneratorDefaults), ConfigError> {
    let mut schemas = SchemaSet::builtin();
    let mut defaults = GeneratorDefaults::default();
    let mut explicit_default: BTreeMap<PropertyKey, String> = BTreeMap::new();
    let mut scalar_default: BTreeMap<PropertyKey, String> = BTreeMap::new();

    for (key_path, payload) in entries {
        if let Some(field) = key_path.strip_prefix(HEADER_PREFIX) {
            let Payload::Scalar(value) = payload else {
                return Err(ConfigError::Invalid(format!("{key_path} expects a scalar value")));
            };
            match field {
                "title" => defaults.header.title = value.clone(),
                "author" => defaults.header.author = value.clone(),
                "version" => defaults.header.version = value.clone(),
                _ => {}
            }
            continue;
        }
        if let Some(cpp_type) = key_path.strip_prefix(TYPEMAP_PREFIX) {
            let Payload::Scalar(value) = payload else {
                return Err(ConfigError::Invalid(format!("{key_path} expects a scalar value")));
            };
            defaults.typemap.insert(cpp_type, value);
            continue;
        }

        let segments: Vec<&str> = key_path.split('.').collect();
        let Some((&last, rest)) = segments.split_last() else {
            continue;
        };
        let (key, role) = match PropertyKey::new(last) {
            Ok(key) => (key, Role::Value),
            Err(_) => match rest.last().and_then(|s| PropertyKey::new(*s).ok()) {
                Some(key) if !last.is_empty() && "name".starts_with(last) => (key, Role::Label),
                Some(key) if last == "default" => (key, Role::Default),
                _ => continue,
            },
        };

        let schema = schemas.entry(key.clone());
        for segment in rest {
            match *segment {
                "Class" => {
                    schema.applies_to.insert(ShapeType::Class);
                }
                "Attribute" => {
                    schema.applies_to.insert(ShapeType::Attribute);
                }
                "Operation" => {
                    schema.applies_to.insert(ShapeType::Operation);
                }
                "Member" => {
                    schema.applies_to.extend([ShapeType::Attribute, ShapeType::Operation]);
                }
                _ => {}
            }
        }
        match (role, payload) {
            (Role::Value, Payload::Enum { values, names }) => {
                schema.allowed = Some(values.clone());
                schema.display_names = Some(names.clone());
            }
            (Role::Value, Payload::Scalar(value)) => {
                scalar_default.insert(key, value.clone());
            }
            (Role::Default, Payload::Scalar(value)) => {
                explicit_default.insert(key, value.clone());
            }
            (Role::Label, Payload::Scalar(value)) => schema.label = Some(value.clone()),
            (_, Payload::Enum { .. }) => {
                return Err(ConfigError::Invalid(format!("{key_path} expects a scalar value")));
            }
        }
    }

    for (key, value) in scalar_default.into_iter().chain(explicit_default) {
        let schema = schemas.entry(key.clone());
        if !schema.admits(&value) {
            return Err(ConfigError::Invalid(format!(
                "default {value:?} for {key} is not one of {{{}}}",
                schema.allowed.as_deref().unwrap_or_default().join(", ")
            )));
        }
        schema.default = Some(value);
    }
    // A redefined enumeration may drop the built-in default.
    for schema in schemas.schemas.values_mut() {
        if let (Some(allowed), Some(default)) = (&schema.allowed, &schema.default) {
            if !allowed.contains(default) {
                schema.default = allowed.first().cloned();
            }
        }
    }
    Ok((schemas, defaults))
}

#[derive(Clone, Copy)]
enum Role {
    Value,
    Default,
    Label,
}

/// Parses one configuration file into its entries, in file order.
pub fn parse_config(text: &str) -> Result<Vec<ConfigEntry>, ConfigError> {
    let mut logical: Vec<(usize, String)> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line_no = index + 1;
        let trimmed = raw.trim();
        if let Some(rest) = trimmed.strip_prefix('\\') {
            let Some((_, current)) = logical.last_mut() else {
                return Err(ConfigError::parse(
                    line_no,
                    "continuation line without a preceding entry",
                ));
            };
            let rest = rest.trim();
            if !rest.is_empty() {
                if !current.is_empty() {
                    current.push(' ');
                }
                current.push_str(rest);
            }
            continue;
        }
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        logical.push((line_no, trimmed.to_string()));
    }

    logical
        .into_iter()
        .map(|(line, text)| parse_entry(line, &text))
        .collect()
}

fn parse_entry(line: usize, text: &str) -> Result<ConfigEntry, ConfigError> {
    let (key, value) = text
        .split_once('=')
        .ok_or_else(|| ConfigError::parse(line, format!("expected `=` in {text:?}")))?;
    let key_path = key.trim();
    if key_path.is_empty() {
        return Err(ConfigError::parse(line, "empty key path"));
    }
    if key_path.split('.').any(str::is_empty) {
        return Err(ConfigError::parse(
            line,
            format!("empty segment in key path {key_path:?}"),
        ));
    }
    let value = value.trim();
    let payload = if value.starts_with('(') {
        parse_enum(line, value)?
    } else {
        Payload::Scalar(value.to_string())
    };
    Ok(ConfigEntry {
        key_path: key_path.to_string(),
        payload,
    })
}

#[derive(Debug, PartialEq)]
enum Tok {
    Open(char),
    Close(char),
    Comma,
    Assign,
    Ident(String),
    Str(String),
}

fn lex_enum(line: usize, text: &str) -> Result<Vec<Tok>, ConfigError> {
    let mut toks = Vec::new();
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            c if c.is_whitespace() => {}
            '(' | '{' => toks.push(Tok::Open(c)),
            ')' | '}' => toks.push(Tok::Close(c)),
            ',' => toks.push(Tok::Comma),
            ':' if chars.peek() == Some(&'=') => {
                chars.next();
                toks.push(Tok::Assign);
            }
            '"' => {
                let mut s = String::new();
                loop {
                    match chars.next() {
                        Some('"') => break,
                        Some('\\') => match chars.next() {
                            Some(escaped) => s.push(escaped),
                            None => return Err(ConfigError::parse(line, "unterminated string")),
                        },
                        Some(other) => s.push(other),
                        None => return Err(ConfigError::parse(line, "unterminated string")),
                    }
                }
                toks.push(Tok::Str(s));
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut ident = String::from(c);
                while let Some(&next) = chars.peek() {
                    if next.is_alphanumeric() || next == '_' {
                        ident.push(next);
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Ident(ident));
            }
            other => {
                return Err(ConfigError::parse(line, format!("unexpected character {other:?}")));
            }
        }
    }
    Ok(toks)
}

fn parse_enum(line: usize, text: &str) -> Result<Payload, ConfigError> {
    let toks = lex_enum(line, text)?;

    let mut depth: Vec<char> = Vec::new();
    for tok in &toks {
        match tok {
            Tok::Open(c) => depth.push(*c),
            Tok::Close(c) => {
                let expected = if *c == ')' { '(' } else { '{' };
                if depth.pop() != Some(expected) {
                    return Err(ConfigError::parse(line, format!("unbalanced `{c}`")));
                }
            }
            _ => {}
        }
    }
    if let Some(open) = depth.last() {
        return Err(ConfigError::parse(line, format!("unclosed `{open}`")));
    }

    let mut cursor = toks.iter().peekable();
    let expect = |want: Tok, cursor: &mut std::iter::Peekable<std::slice::Iter<'_, Tok>>| match cursor.next() {
        Some(tok) if *tok == want => Ok(()),
        other => Err(ConfigError::parse(line, format!("expected {want:?}, found {other:?}"))),
    };
    expect(Tok::Open('('), &mut cursor)?;
    expect(Tok::Open('{'), &mut cursor)?;

    let mut values = None;
    let mut names = None;
    loop {
        let field = match cursor.next() {
            Some(Tok::Ident(field)) => field.clone(),
            Some(Tok::Close('}')) => break,
            other => {
                return Err(ConfigError::parse(
                    line,
                    format!("expected field name, found {other:?}"),
                ))
            }
        };
        expect(Tok::Assign, &mut cursor)?;
        expect(Tok::Open('{'), &mut cursor)?;
        let mut list = Vec::new();
        loop {
            match cursor.next() {
                Some(Tok::Str(s)) => list.push(s.clone()),
                Some(Tok::Close('}')) if list.is_empty() => break,
                other => return Err(ConfigError::parse(line, format!("expected string, found {other:?}"))),
            }
            match cursor.next() {
                Some(Tok::Comma) => continue,
                Some(Tok::Close('}')) => break,
                other => {
                    return Err(ConfigError::parse(
                        line,
                        format!("expected `,` or `}}`, found {other:?}"),
                    ))
                }
            }
        }
        match field.as_str() {
            "values" => values = Some(list),
            "names" => names = Some(list),
            other => return Err(ConfigError::parse(line, format!("unknown field `{other}`"))),
        }
        match cursor.next() {
            Some(Tok::Comma) => continue,
            Some(Tok::Close('}')) => break,
            other => {
                return Err(ConfigError::parse(
                    line,
                    format!("expected `,` or `}}`, found {other:?}"),
                ))
            }
        }
    }
    expect(Tok::Close(')'), &mut cursor)?;
    if let Some(extra) = cursor.next() {
        return Err(ConfigError::parse(
            line,
            format!("trailing {extra:?} after enumeration"),
        ));
    }

    let values = values.ok_or_else(|| ConfigError::parse(line, "enumeration without `values`"))?;
    let names = names.unwrap_or_else(|| values.clone());
    if names.len() != values.len() {
        return Err(ConfigError::parse(
            line,
            format!("{} values but {} names", values.len(), names.len()),
        ));
    }
    Ok(Payload::Enum { values, names })
}

fn quote_list(items: &[String]) -> String {
    let quoted: Vec<String> = items
        .iter()
        .map(|s| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\"")))
        .collect();
    format!("{{{}}}", quoted.join(","))
}

impl fmt::Display for ConfigEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.payload {
            Payload::Scalar(value) => write!(f, "{} = {}", self.key_path, value),
            Payload::Enum { values, names } => write!(
                f,
                "{} = ( {{ values := {}, names := {} }} )",
                self.key_path,
                quote_list(values),
                quote_list(names)
            ),
        }
    }
}

/// Renders entries back into the line grammar, one entry per line.
pub fn render_config(entries: &[ConfigEntry]) -> String {
    entries.iter().map(|e| format!("{e}\n")).collect()
}
