//! Function-word and tag lexicons, and token classification.
//!
//! Both lexicons are line-oriented TSV. The function-word file maps a surface
//! form to one or more interchangeability groups:
//!
//! ```text
//! # determiners
//! the	DET
//! of	PREP,PREP_GEN
//! ```
//!
//! The tag file maps a surface form to its ambiguity class (every tag the
//! form can carry) and its possible lemmas:
//!
//! ```text
//! fixed	verb,adj	fix
//! ```
//!
//! Two optional directives are understood. `@group NAME[,NAME...]` in the
//! function-word file declares the group table explicitly; once any group is
//! declared, entries referencing undeclared groups are rejected. `@default
//! TAG[,TAG...]` in the tag file sets the ambiguity class given to unknown
//! words (otherwise `UNKNOWN`).
//!
//! All keys and lookups are case-folded.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const DEFAULT_OPEN_CLASS_TAG: &str = "UNKNOWN";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FwId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TagId(pub u32);

pub fn fold_case(s: &str) -> String {
    s.to_lowercase()
}

/// Intersection test over two sorted, deduplicated slices.
pub(crate) fn sorted_overlap<T: Ord>(a: &[T], b: &[T]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FwEntry {
    pub id: FwId,
    /// Sorted, non-empty.
    pub groups: Vec<GroupId>,
}

#[derive(Debug, Clone, Default)]
pub struct FunctionWordLexicon {
    entries: HashMap<String, FwEntry>,
    surfaces: Vec<String>,
    groups: Vec<String>,
    group_ids: HashMap<String, GroupId>,
}

fn split_list(field: &str) -> Vec<String> {
    field
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Yields `(line_number, trimmed_line)` for every non-blank, non-comment line.
fn content_lines(source: &str) -> impl Iterator<Item = (usize, &str)> {
    source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
}

impl FunctionWordLexicon {
    pub fn parse(source: &str) -> Result<Self> {
        let mut declared: Vec<String> = Vec::new();
        let mut raw: Vec<(usize, String, Vec<String>)> = Vec::new();

        for (line, text) in content_lines(source) {
            if let Some(rest) = text.trim().strip_prefix("@group") {
                declared.extend(split_list(rest));
                continue;
            }
            let fields: Vec<&str> = text.split('\t').collect();
            if fields.len() != 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 2 tab-separated fields, found {}", fields.len()),
                });
            }
            let surface = fold_case(fields[0].trim());
            if surface.is_empty() {
                return Err(Error::Validation {
                    line,
                    message: "empty surface form".into(),
                });
            }
            let groups = split_list(fields[1]);
            if groups.is_empty() {
                return Err(Error::Validation {
                    line,
                    message: format!("function word {surface:?} has no group"),
                });
            }
            raw.push((line, surface, groups));
        }

        let explicit = !declared.is_empty();
        let mut lex = FunctionWordLexicon::default();
        for g in declared {
            lex.intern_group(&g);
        }
        for (line, surface, groups) in raw {
            let mut ids = Vec::with_capacity(groups.len());
            for g in &groups {
                let id = match lex.group_ids.get(g) {
                    Some(&id) => id,
                    None if explicit => {
                        return Err(Error::Validation {
                            line,
                            message: format!("undeclared group {g:?}"),
                        })
                    }
                    None => lex.intern_group(g),
                };
                ids.push(id);
            }
            let next_id = FwId(lex.surfaces.len() as u32);
            let entry = lex.entries.entry(surface.clone()).or_insert_with(|| FwEntry {
                id: next_id,
                groups: Vec::new(),
            });
            if entry.id == next_id {
                lex.surfaces.push(surface);
            }
            entry.groups.extend(ids);
            entry.groups.sort_unstable();
            entry.groups.dedup();
        }
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn intern_group(&mut self, name: &str) -> GroupId {
        if let Some(&id) = self.group_ids.get(name) {
            return id;
        }
        let id = GroupId(self.groups.len() as u32);
        self.groups.push(name.to_owned());
        self.group_ids.insert(name.to_owned(), id);
        id
    }

    pub fn lookup(&self, surface: &str) -> Option<&FwEntry> {
        self.entries.get(&fold_case(surface))
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.lookup(surface).is_some()
    }

    pub fn group_name(&self, id: GroupId) -> &str {
        &self.groups[id.0 as usize]
    }

    pub fn group_id(&self, name: &str) -> Option<GroupId> {
        self.group_ids.get(name).copied()
    }

    pub fn surface(&self, id: FwId) -> &str {
        &self.surfaces[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn group_count(&self) -> usize {
        self.groups.len()
    }

    /// Order-independent content hash, used to pin saved models to a lexicon.
    pub fn fingerprint(&self) -> String {
        let canon: BTreeMap<&str, BTreeSet<&str>> = self
            .entries
            .iter()
            .map(|(s, e)| {
                (
                    s.as_str(),
                    e.groups.iter().map(|&g| self.group_name(g)).collect(),
                )
            })
            .collect();
        let mut h = Sha256::new();
        for (s, groups) in canon {
            h.update(s.as_bytes());
            h.update(b"\t");
            for g in groups {
                h.update(g.as_bytes());
                h.update(b",");
            }
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}

/// The set of part-of-speech tags a surface form can carry. Never empty.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AmbiguityClass(Vec<TagId>);

impl AmbiguityClass {
    fn new(mut tags: Vec<TagId>) -> Self {
        tags.sort_unstable();
        tags.dedup();
        debug_assert!(!tags.is_empty());
        AmbiguityClass(tags)
    }

    pub fn tags(&self) -> &[TagId] {
        &self.0
    }

    pub fn overlaps(&self, other: &AmbiguityClass) -> bool {
        sorted_overlap(&self.0, &other.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagEntry {
    pub class: AmbiguityClass,
    /// Sorted, non-empty.
    pub lemmas: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TagLexicon {
    entries: HashMap<String, TagEntry>,
    tags: Vec<String>,
    tag_ids: HashMap<String, TagId>,
    open_class_default: AmbiguityClass,
}

impl Default for TagLexicon {
    fn default() -> Self {
        let mut lex = TagLexicon {
            entries: HashMap::new(),
            tags: Vec::new(),
            tag_ids: HashMap::new(),
            open_class_default: AmbiguityClass(Vec::new()),
        };
        let unk = lex.intern_tag(DEFAULT_OPEN_CLASS_TAG);
        lex.open_class_default = AmbiguityClass::new(vec![unk]);
        lex
    }
}

impl TagLexicon {
    pub fn parse(source: &str) -> Result<Self> {
        let mut lex = TagLexicon::default();
        for (line, text) in content_lines(source) {
            if let Some(rest) = text.trim().strip_prefix("@default") {
                let tags = split_list(rest);
                if tags.is_empty() {
                    return Err(Error::Validation {
                        line,
                        message: "empty default ambiguity class".into(),
                    });
                }
                let ids = tags.iter().map(|t| lex.intern_tag(t)).collect();
                lex.open_class_default = AmbiguityClass::new(ids);
                continue;
            }
            let fields: Vec<&str> = text.split('\t').collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 tab-separated fields, found {}", fields.len()),
                });
            }
            let surface = fold_case(fields[0].trim());
            if surface.is_empty() {
                return Err(Error::Validation {
                    line,
                    message: "empty surface form".into(),
                });
            }
            let tags = split_list(fields[1]);
            if tags.is_empty() {
                return Err(Error::Validation {
                    line,
                    message: format!("{surface:?} has an empty tag set"),
                });
            }
            let lemmas = split_list(fields[2]);
            if lemmas.is_empty() {
                return Err(Error::Validation {
                    line,
                    message: format!("{surface:?} has an empty lemma set"),
                });
            }
            let tag_ids: Vec<TagId> = tags.iter().map(|t| lex.intern_tag(t)).collect();
            match lex.entries.get_mut(&surface) {
                Some(existing) => {
                    let mut all = existing.class.0.clone();
                    all.extend(tag_ids);
                    existing.class = AmbiguityClass::new(all);
                    existing.lemmas.extend(lemmas);
                    existing.lemmas.sort();
                    existing.lemmas.dedup();
                }
                None => {
                    let mut lemmas = lemmas;
                    lemmas.sort();
                    lemmas.dedup();
                    lex.entries.insert(
                        surface,
                        TagEntry {
                            class: AmbiguityClass::new(tag_ids),
                            lemmas,
                        },
                    );
                }
            }
        }
        Ok(lex)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn intern_tag(&mut self, name: &str) -> TagId {
        if let Some(&id) = self.tag_ids.get(name) {
            return id;
        }
        let id = TagId(self.tags.len() as u32);
        self.tags.push(name.to_owned());
        self.tag_ids.insert(name.to_owned(), id);
        id
    }

    pub fn lookup(&self, surface: &str) -> Option<&TagEntry> {
        self.entries.get(&fold_case(surface))
    }

    /// Ambiguity class and lemmas for a content word; unknown words get the
    /// open-class default and their folded surface as lemma.
    pub fn analyse(&self, surface: &str) -> TagEntry {
        let folded = fold_case(surface);
        match self.entries.get(&folded) {
            Some(e) => e.clone(),
            None => TagEntry {
                class: self.open_class_default.clone(),
                lemmas: vec![folded],
            },
        }
    }

    pub fn open_class_default(&self) -> &AmbiguityClass {
        &self.open_class_default
    }

    pub fn tag_name(&self, id: TagId) -> &str {
        &self.tags[id.0 as usize]
    }

    pub fn tag_id(&self, name: &str) -> Option<TagId> {
        self.tag_ids.get(name).copied()
    }

    pub fn class_names(&self, class: &AmbiguityClass) -> Vec<&str> {
        class.tags().iter().map(|&t| self.tag_name(t)).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Distinct ambiguity classes carried by lexicon entries.
    pub fn ambiguity_classes(&self) -> BTreeSet<&AmbiguityClass> {
        self.entries.values().map(|e| &e.class).collect()
    }

    pub fn fingerprint(&self) -> String {
        let names = |c: &AmbiguityClass| -> BTreeSet<&str> {
            c.tags().iter().map(|&t| self.tag_name(t)).collect()
        };
        let canon: BTreeMap<&str, (BTreeSet<&str>, &[String])> = self
            .entries
            .iter()
            .map(|(s, e)| (s.as_str(), (names(&e.class), e.lemmas.as_slice())))
            .collect();
        let mut h = Sha256::new();
        h.update(b"@default\t");
        for t in names(&self.open_class_default) {
            h.update(t.as_bytes());
            h.update(b",");
        }
        h.update(b"\n");
        for (s, (tags, lemmas)) in canon {
            h.update(s.as_bytes());
            h.update(b"\t");
            for t in tags {
                h.update(t.as_bytes());
                h.update(b",");
            }
            h.update(b"\t");
            for l in lemmas {
                h.update(l.as_bytes());
                h.update(b",");
            }
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Function { id: FwId, groups: Vec<GroupId> },
    Content { class: AmbiguityClass, lemmas: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub kind: TokenKind,
}

impl Token {
    pub fn is_function_word(&self) -> bool {
        matches!(self.kind, TokenKind::Function { .. })
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.surface)
    }
}

/// Function-word lookup takes precedence over the tag lexicon.
pub fn classify_token(surface: &str, fw: &FunctionWordLexicon, tags: &TagLexicon) -> Token {
    let kind = match fw.lookup(surface) {
        Some(e) => TokenKind::Function {
            id: e.id,
            groups: e.groups.clone(),
        },
        None => {
            let TagEntry { class, lemmas } = tags.analyse(surface);
            TokenKind::Content { class, lemmas }
        }
    };
    Token {
        surface: surface.to_owned(),
        kind,
    }
}

/// Both lexicons, as needed for encoding.
#[derive(Debug, Clone, Default)]
pub struct Lexicons {
    pub function_words: FunctionWordLexicon,
    pub tags: TagLexicon,
}

impl Lexicons {
    pub fn new(function_words: FunctionWordLexicon, tags: TagLexicon) -> Self {
        Lexicons {
            function_words,
            tags,
        }
    }

    pub fn parse(fw_source: &str, tag_source: &str) -> Result<Self> {
        Ok(Lexicons::new(
            FunctionWordLexicon::parse(fw_source)?,
            TagLexicon::parse(tag_source)?,
        ))
    }

    pub fn load(fw_path: impl AsRef<Path>, tag_path: impl AsRef<Path>) -> Result<Self> {
        Ok(Lexicons::new(
            FunctionWordLexicon::load(fw_path)?,
            TagLexicon::load(tag_path)?,
        ))
    }

    pub fn classify(&self, surface: &str) -> Token {
        classify_token(surface, &self.function_words, &self.tags)
    }
}
