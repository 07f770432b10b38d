//! The in-memory form of one `.adl` description file and its rendering.

use std::fmt::Write;

use serde::Serialize;

use crate::config::HeaderFields;

pub const GUARD_SUFFIX: &str = "_ADL";
pub const ADL_EXTENSION: &str = "adl";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AttributeDecl {
    pub persistent: bool,
    pub readonly: bool,
    pub visibility: String,
    /// ADL spelling, e.g. `std::vector <double>`.
    pub type_spelling: String,
    pub name: String,
}

impl AttributeDecl {
    /// `[persistent ][readonly ]<visibility> attribute <type> <name>;`
    pub fn render(&self) -> String {
        let mut decl = format!("{} attribute {} {};", self.visibility, self.type_spelling, self.name);
        if self.readonly {
            decl = format!("readonly {decl}");
        }
        if self.persistent {
            decl = format!("persistent {decl}");
        }
        decl
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParamDecl {
    pub direction: String,
    pub type_spelling: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OperationDecl {
    pub visibility: String,
    pub return_type: String,
    pub name: String,
    pub params: Vec<ParamDecl>,
}

impl OperationDecl {
    /// `<visibility> <returnType> <name>(in <type> <name>, ...);`
    pub fn render(&self) -> String {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|p| format!("{} {} {}", p.direction, p.type_spelling, p.name))
            .collect();
        format!(
            "{} {} {}({});",
            self.visibility,
            self.return_type,
            self.name,
            params.join(", ")
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdlUnit {
    pub guard: String,
    pub header: HeaderFields,
    pub includes: Vec<String>,
    pub kind: String,
    pub class_name: String,
    pub attributes: Vec<AttributeDecl>,
    pub operations: Vec<OperationDecl>,
    /// Only an `extern <kind> <class>;` declaration is emitted.
    pub extern_only: bool,
}

impl AdlUnit {
    pub fn new(class_name: &str, kind: &str, header: HeaderFields) -> Self {
        AdlUnit {
            guard: guard_for(class_name),
            header,
            includes: Vec::new(),
            kind: kind.to_string(),
            class_name: class_name.to_string(),
            attributes: Vec::new(),
            operations: Vec::new(),
            extern_only: false,
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.{ADL_EXTENSION}", self.class_name)
    }
}

pub fn guard_for(class_name: &str) -> String {
    format!("{class_name}{GUARD_SUFFIX}")
}

/// Renders a unit in the generator's layout. Output uses LF line endings.
pub fn render_unit(unit: &AdlUnit) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "#ifndef {}", unit.guard);
    let _ = writeln!(out, "#define {}", unit.guard);
    out.push_str("/**\n");
    let _ = writeln!(out, " * @Title:  {}", unit.header.title);
    let _ = writeln!(out, " * @Author: {}", unit.header.author);
    let _ = writeln!(out, " * @Version: {}", unit.header.version);
    out.push_str(" */\n");
    if unit.extern_only {
        out.push('\n');
        let _ = writeln!(out, "extern {} {};", unit.kind, unit.class_name);
        out.push_str("#endif\n");
        return out;
    }
    for include in &unit.includes {
        let _ = writeln!(out, "#include \"{include}\"");
    }
    out.push('\n');
    let _ = writeln!(out, "{} {}", unit.kind, unit.class_name);
    out.push_str("{\n\n");
    for attribute in &unit.attributes {
        out.push_str(&attribute.render());
        out.push('\n');
    }
    for operation in &unit.operations {
        out.push_str(&operation.render());
        out.push('\n');
    }
    out.push_str("\n};\n#endif\n");
    out
}
