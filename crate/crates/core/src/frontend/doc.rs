//! Javadoc-style doc comments and the `@adl.*` tag vocabulary.

use std::fmt;
use std::ops::Range;

use thiserror::Error;

use crate::model::PropertyKey;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocTag {
    /// Tag name without the leading `@`.
    pub name: String,
    pub argument: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocComment {
    pub raw: String,
    pub tags: Vec<DocTag>,
}

impl DocComment {
    pub fn parse(raw: &str) -> Self {
        let mut tags = Vec::new();
        for line in raw.split('\n') {
            let body = comment_body(line);
            for segment in tag_segments(line, body) {
                let (name, argument) = split_tag(&line[segment.clone()]);
                tags.push(DocTag {
                    name: name.to_string(),
                    argument: argument.map(str::to_string),
                });
            }
        }
        DocComment {
            raw: raw.to_string(),
            tags,
        }
    }
}

/// Byte range of the content of one comment line: without `/**`, `*/`, the
/// leading `*` decoration and trailing `\r`.
pub(crate) fn comment_body(line: &str) -> Range<usize> {
    let mut start = 0;
    let mut end = line.len();
    if line[..end].ends_with('\r') {
        end -= 1;
    }
    if let Some(pos) = line[..end].rfind("*/") {
        end = pos;
    }
    let trimmed = line[..end].trim_start();
    start += end - start - trimmed.len();
    if line[start..end].starts_with("/**") {
        start += 3;
    } else if line[start..end].starts_with('*') {
        start += 1;
    }
    if start > end {
        start = end;
    }
    start..end
}

/// Ranges (within `line`) of each `@tag argument` segment in `body`. A tag
/// starts with `@` at the beginning of the body or after whitespace and runs
/// to the next tag or the end of the body.
pub(crate) fn tag_segments(line: &str, body: Range<usize>) -> Vec<Range<usize>> {
    let text = &line[body.clone()];
    let bytes = text.as_bytes();
    let starts: Vec<usize> = (0..bytes.len())
        .filter(|&i| {
            bytes[i] == b'@'
                && (i == 0 || bytes[i - 1].is_ascii_whitespace())
                && bytes.get(i + 1).is_some_and(|b| b.is_ascii_alphabetic())
        })
        .collect();
    starts
        .iter()
        .enumerate()
        .map(|(n, &s)| {
            let e = starts.get(n + 1).copied().unwrap_or(bytes.len());
            body.start + s..body.start + e
        })
        .collect()
}

fn split_tag(segment: &str) -> (&str, Option<&str>) {
    let segment = segment.trim_end();
    let without_at = &segment[1..];
    match without_at.find(char::is_whitespace) {
        Some(pos) => {
            let argument = without_at[pos..].trim();
            (&without_at[..pos], (!argument.is_empty()).then_some(argument))
        }
        None => (without_at, None),
    }
}

/// The recognized annotation tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AdlTag {
    Enabled,
    Interface,
    Folder,
    Persistent,
    Readonly,
}

impl AdlTag {
    pub const ALL: [AdlTag; 5] = [
        AdlTag::Enabled,
        AdlTag::Interface,
        AdlTag::Folder,
        AdlTag::Persistent,
        AdlTag::Readonly,
    ];

    pub fn tag_name(self) -> &'static str {
        match self {
            AdlTag::Enabled => "adl.enabled",
            AdlTag::Interface => "adl.interface",
            AdlTag::Folder => "adl.folder",
            AdlTag::Persistent => "adl.persistent",
            AdlTag::Readonly => "adl.readonly",
        }
    }

    pub fn key(self) -> PropertyKey {
        match self {
            AdlTag::Enabled => PropertyKey::ADLENABLED,
            AdlTag::Interface => PropertyKey::ADLINTERFACE,
            AdlTag::Folder => PropertyKey::ADLFOLDER,
            AdlTag::Persistent => PropertyKey::ADLPERSISTENT,
            AdlTag::Readonly => PropertyKey::ADLREADONLY,
        }
    }

    /// Flags carry no argument and are tested by presence.
    pub fn is_flag(self) -> bool {
        matches!(self, AdlTag::Persistent | AdlTag::Readonly)
    }

    pub fn from_tag_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.tag_name() == name)
    }

    pub fn from_key(key: &PropertyKey) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.key() == *key)
    }
}

impl fmt::Display for AdlTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "@{}", self.tag_name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnnotationError {
    #[error("unknown annotation tag `@{0}`")]
    UnknownTag(String),
    #[error("annotation tag `@{0}` requires an argument")]
    MissingArgument(String),
    #[error("property {0} has no annotation tag")]
    NoTagForKey(PropertyKey),
}

/// Maps the `@adl.*` tags of a doc comment to properties, in order of
/// appearance. Other tags are ignored.
pub fn extract_annotations(doc: &DocComment) -> Result<Vec<(PropertyKey, String)>, AnnotationError> {
    let mut out = Vec::new();
    for tag in &doc.tags {
        if !tag.name.starts_with("adl.") {
            continue;
        }
        let adl = AdlTag::from_tag_name(&tag.name).ok_or_else(|| AnnotationError::UnknownTag(tag.name.clone()))?;
        let value = if adl.is_flag() {
            String::new()
        } else {
            tag.argument
                .clone()
                .ok_or_else(|| AnnotationError::MissingArgument(tag.name.clone()))?
        };
        out.push((adl.key(), value));
    }
    Ok(out)
}
