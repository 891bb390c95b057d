//! Lexicon and discourse files.
//!
//! A lexicon is a sequence of entries `key "gloss" := AVM .` and a discourse
//! file names its hierarchy and lexicon, then lists one clause key per line,
//! optionally followed by `@and`, `@or`, `@but` or `@none`:
//!
//! ```text
//! use hierarchy ../paper.hier;
//! use lexicon ../paper_examples.lex;
//! hannah_likes_ants
//! thomas_likes_bees
//! jessy_hates_them @but
//! ```

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::avm::read_avm;
use crate::discourse::{Connective, Dcu};
use crate::fs::FeatureStructure;
use crate::scan::Scanner;
use crate::types::{HierarchyError, TypeHierarchy};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconEntry {
    pub key: String,
    pub gloss: String,
    pub sem: FeatureStructure,
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    index: HashMap<String, usize>,
}

impl Lexicon {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &str) -> Option<&LexiconEntry> {
        self.index.get(key).map(|&i| &self.entries[i])
    }

    /// Entries in file order.
    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {}{message}", .key.as_ref().map(|k| format!("entry `{k}`: ")).unwrap_or_default())]
pub struct EntryError {
    pub key: Option<String>,
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Every problem found in a lexicon, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconErrors(pub Vec<EntryError>);

impl fmt::Display for LexiconErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for LexiconErrors {}

/// Byte offset just past the `.` closing the entry that starts at `start`,
/// ignoring dots inside quotes, brackets and comments.
fn entry_end(text: &str, start: usize) -> usize {
    let bytes = text.as_bytes();
    let (mut i, mut depth, mut quoted) = (start, 0usize, false);
    while i < bytes.len() {
        match bytes[i] {
            b'"' => quoted = !quoted,
            _ if quoted => {}
            b'#' if !bytes.get(i + 1).is_some_and(u8::is_ascii_digit) => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
                continue;
            }
            b'[' => depth += 1,
            b']' => depth = depth.saturating_sub(1),
            b'.' if depth == 0 => return i + 1,
            _ => {}
        }
        i += 1;
    }
    bytes.len()
}

pub fn load_lexicon(h: &TypeHierarchy, text: &str) -> Result<Lexicon, LexiconErrors> {
    let mut lex = Lexicon::default();
    let mut errors = Vec::new();
    let mut sc = Scanner::new(text);
    while !sc.at_end() {
        let end = entry_end(text, sc.offset());
        match read_entry(h, &mut sc) {
            Ok(entry) => {
                if lex.index.contains_key(&entry.key) {
                    let (line, col) = sc.position();
                    errors.push(EntryError {
                        key: Some(entry.key.clone()),
                        line,
                        col,
                        message: "duplicate key".into(),
                    });
                } else {
                    lex.index.insert(entry.key.clone(), lex.entries.len());
                    lex.entries.push(entry);
                }
            }
            Err(e) => errors.push(e),
        }
        sc.skip_to(end);
    }
    if errors.is_empty() {
        Ok(lex)
    } else {
        Err(LexiconErrors(errors))
    }
}

fn read_entry(h: &TypeHierarchy, sc: &mut Scanner<'_>) -> Result<LexiconEntry, EntryError> {
    let err = |sc: &Scanner<'_>, key: Option<&str>, message: String| {
        let (line, col) = sc.position();
        EntryError {
            key: key.map(str::to_string),
            line,
            col,
            message,
        }
    };
    let key = sc.word();
    if key.is_empty() {
        return Err(err(sc, None, "expected an entry key".into()));
    }
    let Some(gloss) = sc.quoted() else {
        return Err(err(sc, Some(key), "expected a quoted gloss".into()));
    };
    if !sc.eat_str(":=") {
        return Err(err(sc, Some(key), "expected `:=`".into()));
    }
    let sem = read_avm(h, sc).map_err(|e| EntryError {
        key: Some(key.to_string()),
        line: e.line,
        col: e.col,
        message: e.kind.to_string(),
    })?;
    if !sc.eat('.') {
        return Err(err(sc, Some(key), "expected `.` after the structure".into()));
    }
    Ok(LexiconEntry {
        key: key.to_string(),
        gloss: gloss.to_string(),
        sem,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    pub key: String,
    pub connective: Connective,
    pub line: usize,
}

/// A parsed discourse file; paths are as written, relative to the file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DiscourseFile {
    pub hierarchy: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub clauses: Vec<Clause>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {message}")]
pub struct DiscourseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

pub fn load_discourse(text: &str) -> Result<DiscourseFile, DiscourseError> {
    let mut file = DiscourseFile::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col = body.len() - body.trim_start().len() + 1;
        let fail = |message: String| DiscourseError { line, col, message };
        if let Some(rest) = trimmed.strip_prefix("use ") {
            let Some(rest) = rest.trim().strip_suffix(';') else {
                return Err(fail("expected `;` at end of `use` line".into()));
            };
            let mut parts = rest.split_whitespace();
            let (Some(kind), Some(path), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(fail("expected `use hierarchy <path>;` or `use lexicon <path>;`".into()));
            };
            let slot = match kind {
                "hierarchy" => &mut file.hierarchy,
                "lexicon" => &mut file.lexicon,
                _ => return Err(fail(format!("unknown `use` target `{kind}`"))),
            };
            if slot.is_some() {
                return Err(fail(format!("{kind} given twice")));
            }
            *slot = Some(PathBuf::from(path));
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let key = parts.next().unwrap_or_default();
        if !key
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(fail(format!("malformed clause key `{key}`")));
        }
        let connective = match parts.next() {
            None => Connective::None,
            Some(c) => match c.strip_prefix('@') {
                Some(name) => name.parse().map_err(fail)?,
                None => return Err(fail(format!("expected `@connective`, found `{c}`"))),
            },
        };
        if let Some(extra) = parts.next() {
            return Err(fail(format!("unexpected `{extra}` after clause")));
        }
        if file.clauses.is_empty() && connective != Connective::None {
            return Err(fail("the first clause cannot have a connective".into()));
        }
        file.clauses.push(Clause {
            key: key.to_string(),
            connective,
            line,
        });
    }
    if file.clauses.is_empty() {
        return Err(DiscourseError {
            line: text.lines().count().max(1),
            col: 1,
            message: "discourse has no clauses".into(),
        });
    }
    Ok(file)
}

impl DiscourseFile {
    /// Looks every clause up in `lex`.
    pub fn resolve(&self, lex: &Lexicon) -> Result<Vec<Dcu>, DiscourseError> {
        self.clauses
            .iter()
            .map(|c| match lex.get(&c.key) {
                Some(e) => Ok(Dcu {
                    id: c.key.clone(),
                    sem: e.sem.clone(),
                    connective: c.connective,
                }),
                None => Err(DiscourseError {
                    line: c.line,
                    col: 1,
                    message: format!("clause `{}` is not in the lexicon", c.key),
                }),
            })
            .collect()
    }
}

/// Failure to load one of the input files, naming the file.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Hierarchy {
        path: String,
        source: HierarchyError,
    },
    #[error("{path}:\n{source}")]
    Lexicon {
        path: String,
        source: LexiconErrors,
    },
    #[error("{path}: {source}")]
    Discourse {
        path: String,
        source: DiscourseError,
    },
    #[error("no {0} given")]
    Missing(&'static str),
}

pub fn read_file(path: &Path) -> Result<String, LoadError> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn open_hierarchy(path: &Path) -> Result<TypeHierarchy, LoadError> {
    read_file(path)?
        .parse()
        .map_err(|source| LoadError::Hierarchy {
            path: path.display().to_string(),
            source,
        })
}

pub fn open_lexicon(h: &TypeHierarchy, path: &Path) -> Result<Lexicon, LoadError> {
    load_lexicon(h, &read_file(path)?).map_err(|source| LoadError::Lexicon {
        path: path.display().to_string(),
        source,
    })
}

/// A discourse file together with everything it refers to.
#[derive(Debug, Clone)]
pub struct LoadedDiscourse {
    pub hierarchy: TypeHierarchy,
    pub lexicon: Lexicon,
    pub dcus: Vec<Dcu>,
}

/// Loads a discourse file and the hierarchy and lexicon it names. Explicit
/// paths take precedence over the file's `use` lines, which are resolved
/// against the file's directory.
pub fn open_discourse(
    path: &Path,
    hierarchy: Option<&Path>,
    lexicon: Option<&Path>,
) -> Result<LoadedDiscourse, LoadError> {
    let text = read_file(path)?;
    let file = load_discourse(&text).map_err(|source| LoadError::Discourse {
        path: path.display().to_string(),
        source,
    })?;
    let base = path.parent().unwrap_or(Path::new(""));
    let pick = |given: Option<&Path>, used: &Option<PathBuf>, what| {
        given
            .map(Path::to_path_buf)
            .or_else(|| used.as_ref().map(|p| base.join(p)))
            .ok_or(LoadError::Missing(what))
    };
    let hierarchy = open_hierarchy(&pick(hierarchy, &file.hierarchy, "hierarchy")?)?;
    let lexicon = open_lexicon(&hierarchy, &pick(lexicon, &file.lexicon, "lexicon")?)?;
    let dcus = file.resolve(&lexicon).map_err(|source| LoadError::Discourse {
        path: path.display().to_string(),
        source,
    })?;
    Ok(LoadedDiscourse {
        hierarchy,
        lexicon,
        dcus,
    })
}
