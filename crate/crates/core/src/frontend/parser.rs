//! Declaration parser for the supported header subset: include guards,
//! namespaces, `class`/`struct` definitions with access specifiers, data
//! members and method declarations. Inline method bodies are skipped by
//! brace matching.

use std::ops::Range;
use std::path::{Path, PathBuf};

use super::doc::DocComment;
use super::lexer::{tokenize, LineIndex, Token, TokenKind};
use super::FrontendError;

const ALLOWED_DIRECTIVES: &[&str] = &["ifndef", "ifdef", "define", "endif", "include", "pragma"];
const UNSUPPORTED_MEMBER_WORDS: &[&str] = &[
    "class", "struct", "union", "enum", "typedef", "using", "template", "friend", "operator",
];
const DECL_SPECIFIERS: &[&str] = &["virtual", "static", "inline", "explicit", "constexpr", "mutable"];
const PRIMITIVE_WORDS: &[&str] = &[
    "void", "bool", "char", "wchar_t", "short", "int", "long", "signed", "unsigned", "float", "double",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Visibility {
    Public,
    Protected,
    Private,
}

impl Visibility {
    pub fn as_str(self) -> &'static str {
        match self {
            Visibility::Public => "public",
            Visibility::Protected => "protected",
            Visibility::Private => "private",
        }
    }

    fn from_word(word: &str) -> Option<Self> {
        match word {
            "public" => Some(Visibility::Public),
            "protected" => Some(Visibility::Protected),
            "private" => Some(Visibility::Private),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamDecl {
    pub name: String,
    pub type_spelling: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    Constructor,
    Destructor,
    Regular,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MemberKind {
    Field {
        type_spelling: String,
    },
    Method {
        kind: MethodKind,
        return_type: Option<String>,
        params: Vec<ParamDecl>,
        pure_virtual: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MemberDecl {
    pub name: String,
    pub visibility: Visibility,
    pub kind: MemberKind,
    pub doc: Option<DocComment>,
    pub doc_span: Option<Range<usize>>,
    /// From the first token of the declaration to its terminator.
    pub span: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    /// Enclosing namespaces, outermost first.
    pub scope: Vec<String>,
    pub is_struct: bool,
    pub bases: Vec<String>,
    pub doc: Option<DocComment>,
    pub doc_span: Option<Range<usize>>,
    /// From the `class`/`struct` keyword through the closing `;`.
    pub span: Range<usize>,
    pub members: Vec<MemberDecl>,
}

impl ClassDecl {
    pub fn qualified_name(&self) -> String {
        let mut segments = self.scope.clone();
        segments.push(self.name.clone());
        segments.join("::")
    }

    /// Only pure-virtual methods (constructors and destructors aside) and no
    /// data members.
    pub fn looks_like_interface(&self) -> bool {
        let mut any_pure = false;
        for member in &self.members {
            match &member.kind {
                MemberKind::Field { .. } => return false,
                MemberKind::Method {
                    kind: MethodKind::Regular,
                    pure_virtual,
                    ..
                } => {
                    if !pure_virtual {
                        return false;
                    }
                    any_pure = true;
                }
                MemberKind::Method { .. } => {}
            }
        }
        any_pure
    }
}

/// One parsed header.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceUnit {
    pub path: PathBuf,
    pub text: String,
    pub classes: Vec<ClassDecl>,
}

impl SourceUnit {
    pub fn parse(text: &str, path: &Path) -> Result<SourceUnit, FrontendError> {
        let lines = LineIndex::new(text);
        let tokens = tokenize(text).map_err(|e| {
            let (line, column) = lines.position(e.offset);
            let token = text[e.offset..].chars().next().map(String::from).unwrap_or_default();
            FrontendError::Parse {
                path: path.to_path_buf(),
                line,
                column,
                token,
                message: e.message,
            }
        })?;
        let mut parser = Parser {
            path,
            text,
            lines: &lines,
            tokens: &tokens,
            pos: 0,
            classes: Vec::new(),
        };
        parser.items(&mut Vec::new(), false)?;
        Ok(SourceUnit {
            path: path.to_path_buf(),
            text: text.to_string(),
            classes: parser.classes,
        })
    }

    /// Verbatim text of each class declaration.
    pub fn class_texts(&self) -> impl Iterator<Item = &str> {
        self.classes.iter().map(|c| &self.text[c.span.clone()])
    }
}

struct Parser<'t, 'a> {
    path: &'t Path,
    text: &'a str,
    lines: &'t LineIndex,
    tokens: &'t [Token<'a>],
    pos: usize,
    classes: Vec<ClassDecl>,
}

impl<'t, 'a> Parser<'t, 'a> {
    fn peek(&self) -> Option<&'t Token<'a>> {
        self.tokens.get(self.pos)
    }

    fn peek_at(&self, ahead: usize) -> Option<&'t Token<'a>> {
        self.tokens.get(self.pos + ahead)
    }

    fn bump(&mut self) -> Option<&'t Token<'a>> {
        let tok = self.tokens.get(self.pos);
        self.pos += 1;
        tok
    }

    fn error_at(&self, token: Option<&Token<'_>>, message: impl Into<String>) -> FrontendError {
        let (offset, text) = match token {
            Some(t) => (t.start, t.text.to_string()),
            None => (self.text.len(), "<end of input>".to_string()),
        };
        let (line, column) = self.lines.position(offset);
        FrontendError::Parse {
            path: self.path.to_path_buf(),
            line,
            column,
            token: text,
            message: message.into(),
        }
    }

    fn expect(&mut self, text: &str) -> Result<&'t Token<'a>, FrontendError> {
        match self.peek() {
            Some(t) if t.is(text) => {
                self.pos += 1;
                Ok(t)
            }
            other => Err(self.error_at(other, format!("expected `{text}`"))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<&'t Token<'a>, FrontendError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => {
                self.pos += 1;
                Ok(t)
            }
            other => Err(self.error_at(other, format!("expected {what}"))),
        }
    }

    fn directive(&mut self) -> Result<(), FrontendError> {
        let tok = self.bump().expect("caller peeked");
        let name = tok.text[1..]
            .trim_start()
            .split(|c: char| !c.is_ascii_alphanumeric())
            .next()
            .unwrap_or("");
        if ALLOWED_DIRECTIVES.contains(&name) {
            Ok(())
        } else {
            Err(self.error_at(Some(tok), format!("unsupported preprocessor directive `#{name}`")))
        }
    }

    fn items(&mut self, scope: &mut Vec<String>, nested: bool) -> Result<(), FrontendError> {
        let mut pending_doc: Option<&Token<'_>> = None;
        loop {
            let Some(tok) = self.peek() else {
                if nested {
                    return Err(self.error_at(None, "unterminated namespace"));
                }
                return Ok(());
            };
            match tok.kind {
                TokenKind::Doc => {
                    pending_doc = Some(tok);
                    self.pos += 1;
                    continue;
                }
                TokenKind::Directive => self.directive()?,
                _ if tok.is("}") && nested => {
                    self.pos += 1;
                    if self.peek().is_some_and(|t| t.is(";")) {
                        self.pos += 1;
                    }
                    return Ok(());
                }
                _ if tok.is(";") => self.pos += 1,
                _ if tok.is("namespace") => {
                    self.pos += 1;
                    let name = self.ident("namespace name")?;
                    self.expect("{")?;
                    scope.push(name.text.to_string());
                    self.items(scope, true)?;
                    scope.pop();
                }
                _ if tok.is("class") || tok.is("struct") => {
                    self.class(scope, pending_doc.take())?;
                }
                _ => return Err(self.error_at(Some(tok), "unsupported declaration")),
            }
            pending_doc = None;
        }
    }

    fn class(&mut self, scope: &[String], doc: Option<&Token<'_>>) -> Result<(), FrontendError> {
        let keyword = self.bump().expect("caller peeked");
        let is_struct = keyword.text == "struct";
        let name = self.ident("class name")?.text.to_string();
        if self.peek().is_some_and(|t| t.is("final")) {
            self.pos += 1;
        }
        if self.peek().is_some_and(|t| t.is(";")) {
            // Forward declaration.
            self.pos += 1;
            return Ok(());
        }

        let mut bases = Vec::new();
        if self.peek().is_some_and(|t| t.is(":")) {
            self.pos += 1;
            let mut current: Vec<&Token<'_>> = Vec::new();
            loop {
                let tok = self
                    .bump()
                    .ok_or_else(|| self.error_at(None, "unterminated base list"))?;
                if tok.is("{") || tok.is(",") {
                    let words: Vec<&Token<'_>> = current
                        .drain(..)
                        .filter(|t| !matches!(t.text, "public" | "protected" | "private" | "virtual"))
                        .collect();
                    if words.is_empty() {
                        return Err(self.error_at(Some(tok), "empty base specifier"));
                    }
                    bases.push(render_tokens(&words));
                    if tok.is("{") {
                        self.pos -= 1;
                        break;
                    }
                } else {
                    current.push(tok);
                }
            }
        }
        self.expect("{")?;

        let mut visibility = if is_struct {
            Visibility::Public
        } else {
            Visibility::Private
        };
        let mut members = Vec::new();
        let mut pending_doc: Option<&Token<'_>> = None;
        let end = loop {
            let tok = self
                .peek()
                .ok_or_else(|| self.error_at(None, format!("unterminated class `{name}`")))?;
            if tok.kind == TokenKind::Doc {
                pending_doc = Some(tok);
                self.pos += 1;
                continue;
            }
            if tok.kind == TokenKind::Directive {
                return Err(self.error_at(Some(tok), "preprocessor directive inside a class"));
            }
            if tok.is("}") {
                self.pos += 1;
                break self.expect(";")?.end();
            }
            if let Some(v) = Visibility::from_word(tok.text) {
                if self.peek_at(1).is_some_and(|t| t.is(":")) {
                    visibility = v;
                    self.pos += 2;
                    pending_doc = None;
                    continue;
                }
            }
            if tok.is(";") {
                self.pos += 1;
                continue;
            }
            members.extend(self.member(&name, visibility, pending_doc.take())?);
        };

        self.classes.push(ClassDecl {
            name,
            scope: scope.to_vec(),
            is_struct,
            bases,
            doc: doc.map(|d| DocComment::parse(d.text)),
            doc_span: doc.map(Token::span),
            span: keyword.start..end,
            members,
        });
        Ok(())
    }

    /// Skips a balanced `{ ... }` group starting at the current token.
    fn skip_braces(&mut self) -> Result<(), FrontendError> {
        let open = self.bump().expect("caller peeked");
        let mut depth = 1;
        while depth > 0 {
            let tok = self.bump().ok_or_else(|| self.error_at(Some(open), "unbalanced `{`"))?;
            if tok.is("{") {
                depth += 1;
            } else if tok.is("}") {
                depth -= 1;
            }
        }
        Ok(())
    }

    fn member(
        &mut self,
        class_name: &str,
        visibility: Visibility,
        doc: Option<&Token<'_>>,
    ) -> Result<Vec<MemberDecl>, FrontendError> {
        let start = self.peek().expect("caller peeked").start;
        let mut decl: Vec<&'t Token<'a>> = Vec::new();
        let mut parens = 0usize;
        let end = loop {
            let tok = self
                .peek()
                .ok_or_else(|| self.error_at(None, "unterminated member declaration"))?;
            match tok.kind {
                TokenKind::Doc => {
                    self.pos += 1;
                    continue;
                }
                TokenKind::Directive => return Err(self.error_at(Some(tok), "preprocessor directive inside a class")),
                TokenKind::Ident if UNSUPPORTED_MEMBER_WORDS.contains(&tok.text) => {
                    return Err(self.error_at(Some(tok), "unsupported member declaration"));
                }
                _ => {}
            }
            if tok.is("(") || tok.is("[") {
                parens += 1;
            } else if tok.is(")") || tok.is("]") {
                parens = parens
                    .checked_sub(1)
                    .ok_or_else(|| self.error_at(Some(tok), "unbalanced parenthesis"))?;
            } else if parens == 0 && tok.is(";") {
                self.pos += 1;
                break tok.end();
            } else if parens == 0 && tok.is("}") {
                return Err(self.error_at(Some(tok), "expected `;`"));
            } else if parens == 0 && tok.is("{") {
                let is_function = decl.iter().any(|t| t.is("("));
                self.skip_braces()?;
                if is_function {
                    let end = self.tokens[self.pos - 1].end();
                    if self.peek().is_some_and(|t| t.is(";")) {
                        self.pos += 1;
                    }
                    break end;
                }
                // Brace initializer of a data member.
                continue;
            }
            decl.push(tok);
            self.pos += 1;
        };

        let doc_comment = doc.map(|d| DocComment::parse(d.text));
        let doc_span = doc.map(Token::span);
        let build = |name: String, kind: MemberKind| MemberDecl {
            name,
            visibility,
            kind,
            doc: doc_comment.clone(),
            doc_span: doc_span.clone(),
            span: start..end,
        };

        if let Some(open) = decl.iter().position(|t| t.is("(")) {
            let (name, kind) = self.method(class_name, &decl, open)?;
            return Ok(vec![build(name, kind)]);
        }
        self.fields(&decl)?
            .into_iter()
            .map(|(name, type_spelling)| Ok(build(name, MemberKind::Field { type_spelling })))
            .collect()
    }

    fn method(
        &self,
        class_name: &str,
        decl: &[&'t Token<'a>],
        open: usize,
    ) -> Result<(String, MemberKind), FrontendError> {
        let head = &decl[..open];
        let Some((name_tok, prefix)) = head.split_last() else {
            return Err(self.error_at(Some(decl[open]), "expected method name"));
        };
        if name_tok.kind != TokenKind::Ident {
            return Err(self.error_at(Some(name_tok), "expected method name"));
        }
        let mut prefix: Vec<&Token<'_>> = prefix
            .iter()
            .copied()
            .filter(|t| !DECL_SPECIFIERS.contains(&t.text))
            .collect();
        let is_destructor = prefix.last().is_some_and(|t| t.is("~"));
        if is_destructor {
            prefix.pop();
        }

        let mut depth = 0usize;
        let close = decl[open..]
            .iter()
            .position(|t| {
                if t.is("(") {
                    depth += 1;
                } else if t.is(")") {
                    depth -= 1;
                }
                depth == 0
            })
            .map(|p| p + open)
            .expect("member scan balanced the parentheses");
        let params = self.params(&decl[open + 1..close])?;
        let tail = &decl[close + 1..];
        let pure_virtual = tail
            .windows(2)
            .any(|w| w[0].is("=") && w[1].kind == TokenKind::Number && w[1].text == "0");

        let kind = if is_destructor {
            MethodKind::Destructor
        } else if prefix.is_empty() && name_tok.text == class_name {
            MethodKind::Constructor
        } else {
            MethodKind::Regular
        };
        let return_type = match kind {
            MethodKind::Regular if prefix.is_empty() => {
                return Err(self.error_at(Some(name_tok), "missing return type"));
            }
            MethodKind::Regular => Some(render_tokens(&prefix)),
            _ if !prefix.is_empty() => {
                return Err(self.error_at(Some(prefix[0]), "unexpected tokens before constructor"));
            }
            _ => None,
        };
        let name = if is_destructor {
            format!("~{}", name_tok.text)
        } else {
            name_tok.text.to_string()
        };
        Ok((
            name,
            MemberKind::Method {
                kind,
                return_type,
                params,
                pure_virtual,
            },
        ))
    }

    fn params(&self, tokens: &[&'t Token<'a>]) -> Result<Vec<ParamDecl>, FrontendError> {
        if tokens.is_empty() || (tokens.len() == 1 && tokens[0].is("void")) {
            return Ok(Vec::new());
        }
        split_top_level(tokens)
            .into_iter()
            .enumerate()
            .map(|(index, param)| {
                let param = strip_initializer(param);
                if param.is_empty() {
                    return Err(self.error_at(tokens.first().copied(), "empty parameter"));
                }
                let (name, type_tokens) = match param.split_last() {
                    Some((last, rest)) if is_declarator_name(last, rest) => (last.text.to_string(), rest),
                    _ => (format!("arg{index}"), param),
                };
                Ok(ParamDecl {
                    name,
                    type_spelling: render_tokens(type_tokens),
                })
            })
            .collect()
    }

    fn fields(&self, decl: &[&'t Token<'a>]) -> Result<Vec<(String, String)>, FrontendError> {
        let decl: Vec<&Token<'_>> = decl
            .iter()
            .copied()
            .filter(|t| !DECL_SPECIFIERS.contains(&t.text))
            .collect();
        let mut out = Vec::new();
        let mut base_type: Option<Vec<&Token<'_>>> = None;
        for declarator in split_top_level(&decl) {
            let declarator = strip_initializer(declarator);
            // Array extents stay with the type so they are reported later.
            let bracket = declarator.iter().position(|t| t.is("[")).unwrap_or(declarator.len());
            let (before, extent) = declarator.split_at(bracket);
            let Some((name, type_tokens)) = before.split_last() else {
                return Err(self.error_at(decl.first().copied(), "empty declarator"));
            };
            if name.kind != TokenKind::Ident || PRIMITIVE_WORDS.contains(&name.text) {
                return Err(self.error_at(Some(name), "expected member name"));
            }
            let mut spelling_tokens: Vec<&Token<'_>> = match &base_type {
                Some(base) => base.iter().chain(type_tokens).copied().collect(),
                None => {
                    if type_tokens.is_empty() {
                        return Err(self.error_at(Some(name), "missing member type"));
                    }
                    // Pointer/reference markers bind to the declarator.
                    let split = type_tokens
                        .iter()
                        .position(|t| t.is("*") || t.is("&"))
                        .unwrap_or(type_tokens.len());
                    base_type = Some(type_tokens[..split].to_vec());
                    type_tokens.to_vec()
                }
            };
            spelling_tokens.extend_from_slice(extent);
            out.push((name.text.to_string(), render_tokens(&spelling_tokens)));
        }
        Ok(out)
    }
}

fn is_declarator_name(last: &Token<'_>, rest: &[&Token<'_>]) -> bool {
    last.kind == TokenKind::Ident
        && !rest.is_empty()
        && !PRIMITIVE_WORDS.contains(&last.text)
        && last.text != "const"
        && !rest.last().is_some_and(|t| t.is("::"))
}

/// Splits on commas outside `<>`, `()` and `[]`.
fn split_top_level<'x, 'a>(tokens: &'x [&'x Token<'a>]) -> Vec<&'x [&'x Token<'a>]> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, tok) in tokens.iter().enumerate() {
        if tok.is("<") || tok.is("(") || tok.is("[") {
            depth += 1;
        } else if tok.is(">") || tok.is(")") || tok.is("]") {
            depth -= 1;
        } else if tok.is(",") && depth == 0 {
            parts.push(&tokens[start..i]);
            start = i + 1;
        }
    }
    parts.push(&tokens[start..]);
    parts
}

fn strip_initializer<'x, 'a>(tokens: &'x [&'x Token<'a>]) -> &'x [&'x Token<'a>] {
    let mut depth = 0i32;
    for (i, tok) in tokens.iter().enumerate() {
        if tok.is("<") || tok.is("(") {
            depth += 1;
        } else if tok.is(">") || tok.is(")") {
            depth -= 1;
        } else if tok.is("=") && depth == 0 {
            return &tokens[..i];
        }
    }
    tokens
}

/// Joins tokens with a space between adjacent words and after commas.
pub(crate) fn render_tokens(tokens: &[&Token<'_>]) -> String {
    let mut out = String::new();
    let mut prev: Option<&Token<'_>> = None;
    for tok in tokens {
        if let Some(p) = prev {
            if (p.is_word() && tok.is_word()) || p.is(",") {
                out.push(' ');
            }
        }
        out.push_str(tok.text);
        prev = Some(tok);
    }
    out
}
