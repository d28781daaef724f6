//! Class catalogs for the label spaces and the attribute → characteristic
//! applicability rule.
//!
//! The taxonomy document is JSON with keys `attributes`, `sizes`,
//! `patterns`, `colors` and `characterizable`. Class entries are either a
//! plain name or `{"name": ..., "short": ...}` where `short` is the column
//! header used in tables. Two optional keys, `hair` and `sparse`, name the
//! Hair attribute and the Sparse/bald size class when a dataset renames them.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::maskcore::Task;

/// The catalog shipped with the toolkit.
pub const DEFAULT_DOCUMENT: &str = r#"{
  "attributes": [
    "Hat", "Hair", "Glove", "Glasses", "UpperClothes", "Mask", "Coat", "Socks",
    "Pants", "Torso-skin", "Scarf/Tie", "Skirt", "Face", "L-arm", "R-arm",
    "L-leg", "R-Leg", "L-shoe", "R-shoe"
  ],
  "sizes": [
    {"name": "Short/small", "short": "Short"},
    {"name": "Long/large", "short": "Long"},
    {"name": "Undetermined", "short": "Undet."},
    {"name": "Sparse/bald", "short": "Sparse"}
  ],
  "patterns": [
    "Solid",
    {"name": "Geometrical", "short": "Geom."},
    "Fancy",
    "Letters"
  ],
  "colors": [
    "Dark", "Medium", "Light", "Brown", "Red", "Pink", "Yellow", "Orange",
    "Green", "Blue", "Purple", "Multicolor"
  ],
  "characterizable": [
    "Hat", "Hair", "Glove", "Glasses", "UpperClothes", "Mask", "Coat", "Socks",
    "Pants", "Scarf/Tie", "Skirt", "L-shoe", "R-shoe"
  ]
}"#;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum ClassEntry {
    Name(String),
    Named { name: String, short: Option<String> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    attributes: Vec<ClassEntry>,
    sizes: Vec<ClassEntry>,
    patterns: Vec<ClassEntry>,
    colors: Vec<ClassEntry>,
    characterizable: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    hair: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sparse: Option<String>,
}

/// Names of one task's foreground classes; index `i` in `names` is class `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskCatalog {
    pub task: Task,
    pub names: Vec<String>,
    pub short_names: Vec<String>,
}

impl TaskCatalog {
    fn from_entries(task: Task, entries: Vec<ClassEntry>) -> Result<Self> {
        let expected = task.max_class() as usize;
        if entries.len() != expected {
            return Err(Error::Schema(format!(
                "{task} catalog has {} classes, expected {expected}",
                entries.len()
            )));
        }
        let (names, short_names): (Vec<_>, Vec<_>) = entries
            .into_iter()
            .map(|e| match e {
                ClassEntry::Name(n) => (n.clone(), n),
                ClassEntry::Named { name, short } => {
                    let short = short.unwrap_or_else(|| name.clone());
                    (name, short)
                }
            })
            .unzip();
        let mut seen = HashSet::new();
        for name in &names {
            if name.is_empty() {
                return Err(Error::Schema(format!("{task} catalog has an empty name")));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("{task} catalog repeats `{name}`")));
            }
        }
        Ok(Self {
            task,
            names,
            short_names,
        })
    }

    pub fn class_count(&self) -> usize {
        self.names.len()
    }

    /// Name of class `id`; 0 is `background`.
    pub fn name(&self, id: u16) -> &str {
        match id {
            0 => "background",
            i => &self.names[i as usize - 1],
        }
    }

    pub fn short_name(&self, id: u16) -> &str {
        match id {
            0 => "background",
            i => &self.short_names[i as usize - 1],
        }
    }

    pub fn index_of(&self, name: &str) -> Option<u16> {
        self.names.iter().position(|n| n == name).map(|i| i as u16 + 1)
    }

    fn entries(&self) -> Vec<ClassEntry> {
        self.names
            .iter()
            .zip(&self.short_names)
            .map(|(n, s)| {
                if n == s {
                    ClassEntry::Name(n.clone())
                } else {
                    ClassEntry::Named {
                        name: n.clone(),
                        short: Some(s.clone()),
                    }
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Taxonomy {
    attributes: TaskCatalog,
    sizes: TaskCatalog,
    patterns: TaskCatalog,
    colors: TaskCatalog,
    /// Indexed by attribute id, entry 0 (background) always false.
    characterizable: Vec<bool>,
    hair_index: u16,
    sparse_index: u16,
}

impl Default for Taxonomy {
    fn default() -> Self {
        load_taxonomy(DEFAULT_DOCUMENT).expect("built-in taxonomy is valid")
    }
}

pub fn load_taxonomy(document: &str) -> Result<Taxonomy> {
    let doc: Document =
        serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    let attributes = TaskCatalog::from_entries(Task::Attribute, doc.attributes)?;
    let sizes = TaskCatalog::from_entries(Task::Size, doc.sizes)?;
    let patterns = TaskCatalog::from_entries(Task::Pattern, doc.patterns)?;
    let colors = TaskCatalog::from_entries(Task::Color, doc.colors)?;

    let mut characterizable = vec![false; attributes.class_count() + 1];
    for name in &doc.characterizable {
        let id = attributes.index_of(name).ok_or_else(|| {
            Error::Schema(format!("characterizable class `{name}` is not an attribute"))
        })?;
        characterizable[id as usize] = true;
    }

    let hair_name = doc.hair.as_deref().unwrap_or("Hair");
    let hair_index = attributes
        .index_of(hair_name)
        .ok_or_else(|| Error::Schema(format!("hair class `{hair_name}` is not an attribute")))?;
    if !characterizable[hair_index as usize] {
        return Err(Error::Schema(format!("hair class `{hair_name}` must be characterizable")));
    }
    let sparse_name = doc.sparse.as_deref().unwrap_or("Sparse/bald");
    let sparse_index = sizes
        .index_of(sparse_name)
        .ok_or_else(|| Error::Schema(format!("sparse class `{sparse_name}` is not a size")))?;

    Ok(Taxonomy {
        attributes,
        sizes,
        patterns,
        colors,
        characterizable,
        hair_index,
        sparse_index,
    })
}

impl Taxonomy {
    pub fn catalog(&self, task: Task) -> &TaskCatalog {
        match task {
            Task::Attribute => &self.attributes,
            Task::Size => &self.sizes,
            Task::Pattern => &self.patterns,
            Task::Color => &self.colors,
            Task::Instance => panic!("instance maps have no class catalog"),
        }
    }

    pub fn class_name(&self, task: Task, id: u16) -> &str {
        self.catalog(task).name(id)
    }

    pub fn hair_index(&self) -> u16 {
        self.hair_index
    }

    pub fn sparse_index(&self) -> u16 {
        self.sparse_index
    }

    pub fn characterizable(&self, attribute_id: u16) -> Result<bool> {
        if attribute_id == 0 || attribute_id as usize >= self.characterizable.len() {
            return Err(Error::ClassOutOfRange {
                task: Task::Attribute,
                class: attribute_id as u32,
                max: self.attributes.class_count() as u32,
            });
        }
        Ok(self.characterizable[attribute_id as usize])
    }

    /// Lookup table indexed by attribute id, background included (false).
    pub fn characterizable_table(&self) -> &[bool] {
        &self.characterizable
    }

    pub fn characterizable_ids(&self) -> impl Iterator<Item = u16> + '_ {
        self.characterizable
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(i, _)| i as u16)
    }

    pub fn to_document(&self) -> String {
        let doc = Document {
            attributes: self.attributes.entries(),
            sizes: self.sizes.entries(),
            patterns: self.patterns.entries(),
            colors: self.colors.entries(),
            characterizable: self
                .characterizable_ids()
                .map(|id| self.attributes.name(id).to_owned())
                .collect(),
            hair: Some(self.attributes.name(self.hair_index).to_owned()),
            sparse: Some(self.sizes.name(self.sparse_index).to_owned()),
        };
        serde_json::to_string_pretty(&doc).expect("taxonomy serializes")
    }
}
