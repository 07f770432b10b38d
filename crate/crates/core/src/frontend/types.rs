//! Type expressions and their ADL spelling.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

const PRIMITIVE_WORDS: &[&str] = &[
    "void", "bool", "char", "wchar_t", "char16_t", "char32_t", "short", "int", "long", "signed", "unsigned", "float",
    "double",
];

/// Fixed-width typedefs treated like primitives.
const PRIMITIVE_ALIASES: &[&str] = &[
    "size_t", "int8_t", "int16_t", "int32_t", "int64_t", "uint8_t", "uint16_t", "uint32_t", "uint64_t",
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TypeError {
    #[error("unsupported type `{spelling}`: {reason}")]
    Unsupported { spelling: String, reason: String },
    #[error("malformed type `{spelling}`: {message}")]
    Syntax { spelling: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeForm {
    /// One or more primitive keywords, single-space separated.
    Primitive(String),
    Named(String),
    Template {
        head: String,
        args: Vec<TypeRef>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeRef {
    /// Source text as written.
    pub spelling: String,
    pub is_const: bool,
    pub form: TypeForm,
    pub adl_spelling: String,
}

impl TypeRef {
    /// Whitespace-normalized C++ rendering, e.g. `const std::vector<double>`.
    pub fn canonical(&self) -> String {
        let base = match &self.form {
            TypeForm::Primitive(name) | TypeForm::Named(name) => name.clone(),
            TypeForm::Template { head, args } => {
                let args: Vec<String> = args.iter().map(TypeRef::canonical).collect();
                format!("{head}<{}>", args.join(", "))
            }
        };
        if self.is_const {
            format!("const {base}")
        } else {
            base
        }
    }

    /// Every named type mentioned, outermost first. Template heads are not
    /// included, their arguments are.
    pub fn named_types(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_named(&mut out);
        out
    }

    fn collect_named<'a>(&'a self, out: &mut Vec<&'a str>) {
        match &self.form {
            TypeForm::Primitive(_) => {}
            TypeForm::Named(name) => out.push(name),
            TypeForm::Template { args, .. } => args.iter().for_each(|a| a.collect_named(out)),
        }
    }
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.adl_spelling)
    }
}

/// C++ → ADL spelling substitutions, applied to primitive and plain named
/// types.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct TypeMap {
    entries: BTreeMap<String, String>,
}

impl Default for TypeMap {
    fn default() -> Self {
        let mut map = TypeMap::empty();
        map.insert("int", "long");
        map.insert("unsigned int", "unsigned long");
        map
    }
}

impl TypeMap {
    pub fn empty() -> Self {
        TypeMap {
            entries: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, cpp: &str, adl: &str) {
        self.entries.insert(collapse_ws(cpp), adl.trim().to_string());
    }

    pub fn get(&self, cpp: &str) -> Option<&str> {
        self.entries.get(cpp).map(String::as_str)
    }

    pub fn contains(&self, cpp: &str) -> bool {
        self.entries.contains_key(cpp)
    }

    pub fn extend(&mut self, other: &TypeMap) {
        self.entries
            .extend(other.entries.iter().map(|(k, v)| (k.clone(), v.clone())));
    }

    /// Parses `cppType = adlType` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<TypeMap, String> {
        let mut map = TypeMap::empty();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (cpp, adl) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `cppType = adlType`", n + 1))?;
            if cpp.trim().is_empty() || adl.trim().is_empty() {
                return Err(format!("line {}: empty type name", n + 1));
            }
            map.insert(cpp, adl);
        }
        Ok(map)
    }
}

fn collapse_ws(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

pub fn is_primitive(name: &str) -> bool {
    name.split(' ').all(|w| PRIMITIVE_WORDS.contains(&w)) || PRIMITIVE_ALIASES.contains(&name)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Word(&'a str),
    Scope,
    Open,
    Close,
    Comma,
    Other(&'a str),
}

fn lex(spelling: &str) -> Vec<Tok<'_>> {
    let mut toks = Vec::new();
    let bytes = spelling.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_alphanumeric() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            toks.push(Tok::Word(&spelling[start..i]));
        } else if spelling[i..].starts_with("::") {
            toks.push(Tok::Scope);
            i += 2;
        } else {
            let len = spelling[i..].chars().next().map_or(1, char::len_utf8);
            toks.push(match c {
                b'<' => Tok::Open,
                b'>' => Tok::Close,
                b',' => Tok::Comma,
                _ => Tok::Other(&spelling[i..i + len]),
            });
            i += len;
        }
    }
    toks
}

struct TypeParser<'a> {
    spelling: &'a str,
    toks: Vec<Tok<'a>>,
    pos: usize,
}

impl<'a> TypeParser<'a> {
    fn syntax(&self, message: impl Into<String>) -> TypeError {
        TypeError::Syntax {
            spelling: self.spelling.to_string(),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Tok<'a>> {
        self.toks.get(self.pos)
    }

    fn eat_const(&mut self) -> bool {
        if self.peek() == Some(&Tok::Word("const")) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn parse_type(&mut self, map: &TypeMap) -> Result<TypeRef, TypeError> {
        let mut is_const = self.eat_const();
        let form = match self.peek() {
            Some(Tok::Word(w)) if PRIMITIVE_WORDS.contains(w) => {
                let mut words = Vec::new();
                while let Some(Tok::Word(w)) = self.peek() {
                    if !PRIMITIVE_WORDS.contains(w) {
                        break;
                    }
                    words.push(*w);
                    self.pos += 1;
                }
                TypeForm::Primitive(words.join(" "))
            }
            Some(Tok::Word(_)) | Some(Tok::Scope) => {
                let name = self.qualified_name()?;
                if self.peek() == Some(&Tok::Open) {
                    self.pos += 1;
                    let mut args = vec![self.parse_type(map)?];
                    loop {
                        match self.peek() {
                            Some(Tok::Comma) => {
                                self.pos += 1;
                                args.push(self.parse_type(map)?);
                            }
                            Some(Tok::Close) => {
                                self.pos += 1;
                                break;
                            }
                            _ => return Err(self.syntax("expected `,` or `>`")),
                        }
                    }
                    TypeForm::Template { head: name, args }
                } else if PRIMITIVE_ALIASES.contains(&name.as_str()) {
                    TypeForm::Primitive(name)
                } else {
                    TypeForm::Named(name)
                }
            }
            Some(Tok::Other("*" | "&")) => return Err(self.unsupported()),
            _ => return Err(self.syntax("expected a type name")),
        };
        is_const |= self.eat_const();
        if let Some(Tok::Other("*" | "&" | "[")) = self.peek() {
            return Err(self.unsupported());
        }

        let adl_spelling = match &form {
            TypeForm::Primitive(name) | TypeForm::Named(name) => map.get(name).unwrap_or(name).to_string(),
            TypeForm::Template { head, args } => {
                let args: Vec<&str> = args.iter().map(|a| a.adl_spelling.as_str()).collect();
                format!("{head} <{}>", args.join(", "))
            }
        };
        let mut parsed = TypeRef {
            spelling: String::new(),
            is_const,
            form,
            adl_spelling,
        };
        parsed.spelling = parsed.canonical();
        Ok(parsed)
    }

    fn qualified_name(&mut self) -> Result<String, TypeError> {
        let mut name = String::new();
        if self.peek() == Some(&Tok::Scope) {
            name.push_str("::");
            self.pos += 1;
        }
        loop {
            match self.peek() {
                Some(Tok::Word(w)) if *w != "const" => {
                    name.push_str(w);
                    self.pos += 1;
                }
                _ => return Err(self.syntax("expected identifier")),
            }
            if self.peek() == Some(&Tok::Scope) {
                name.push_str("::");
                self.pos += 1;
            } else {
                return Ok(name);
            }
        }
    }

    fn unsupported(&self) -> TypeError {
        TypeError::Unsupported {
            spelling: self.spelling.to_string(),
            reason: "pointer, reference and array types cannot be described".into(),
        }
    }
}

/// Parses a type expression and computes its ADL spelling under `map`.
pub fn normalize_type(spelling: &str, map: &TypeMap) -> Result<TypeRef, TypeError> {
    let mut parser = TypeParser {
        spelling,
        toks: lex(spelling),
        pos: 0,
    };
    if parser.toks.iter().any(|t| matches!(t, Tok::Other("*" | "&" | "["))) {
        return Err(parser.unsupported());
    }
    let mut parsed = parser.parse_type(map)?;
    if let Some(extra) = parser.peek() {
        return Err(parser.syntax(format!("unexpected {extra:?}")));
    }
    parsed.spelling = spelling.to_string();
    Ok(parsed)
}
