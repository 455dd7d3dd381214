use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a target class, `0..K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub usize);

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CategoryAction {
    Keep(ClassId),
    /// Region excluded from scoring.
    Ignore,
    Drop,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassMapping {
    pub source: u32,
    pub target: usize,
}

/// Source-category to target-class remapping.
///
/// Loaded from TOML:
///
/// ```toml
/// names = ["pedestrian", "people", "bicycle", "tricycle"]
/// ignore = [0]
/// drop = [4, 5, 6, 8, 9, 10, 11]
///
/// [[mapping]]
/// source = 1
/// target = 0
/// ```
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawClassMap", into = "RawClassMap")]
pub struct ClassMap {
    names: Vec<String>,
    mapping: Vec<ClassMapping>,
    drop: BTreeSet<u32>,
    ignore: BTreeSet<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClassMap {
    names: Vec<String>,
    #[serde(default)]
    ignore: Vec<u32>,
    #[serde(default)]
    drop: Vec<u32>,
    #[serde(default)]
    mapping: Vec<ClassMapping>,
}

impl TryFrom<RawClassMap> for ClassMap {
    type Error = Error;

    fn try_from(raw: RawClassMap) -> Result<Self> {
        ClassMap::new(raw.names, raw.mapping, raw.drop, raw.ignore)
    }
}

impl From<ClassMap> for RawClassMap {
    fn from(map: ClassMap) -> Self {
        RawClassMap {
            names: map.names,
            ignore: map.ignore.into_iter().collect(),
            drop: map.drop.into_iter().collect(),
            mapping: map.mapping,
        }
    }
}

impl ClassMap {
    pub fn new(
        names: Vec<String>,
        mapping: Vec<ClassMapping>,
        drop: impl IntoIterator<Item = u32>,
        ignore: impl IntoIterator<Item = u32>,
    ) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::ClassMap(
                "at least one class name is required".into(),
            ));
        }
        let mut seen_names = BTreeSet::new();
        for name in &names {
            if name.trim().is_empty() {
                return Err(Error::ClassMap("class names must be non-empty".into()));
            }
            if !seen_names.insert(name.as_str()) {
                return Err(Error::ClassMap(format!("duplicate class name {name:?}")));
            }
        }

        let mut sources = BTreeSet::new();
        let mut claim = |src: u32| {
            if sources.insert(src) {
                Ok(())
            } else {
                Err(Error::ClassMap(format!(
                    "source category {src} listed more than once"
                )))
            }
        };
        let mut targeted = vec![false; names.len()];
        for m in &mapping {
            claim(m.source)?;
            if m.target >= names.len() {
                return Err(Error::ClassMap(format!(
                    "source {} maps to class {} but only {} classes are named",
                    m.source,
                    m.target,
                    names.len()
                )));
            }
            targeted[m.target] = true;
        }
        let drop: BTreeSet<u32> = drop.into_iter().collect();
        let ignore: BTreeSet<u32> = ignore.into_iter().collect();
        for &src in drop.iter().chain(ignore.iter()) {
            claim(src)?;
        }
        if let Some(k) = targeted.iter().position(|t| !t) {
            return Err(Error::ClassMap(format!(
                "class {k} ({}) has no source category",
                names[k]
            )));
        }
        Ok(Self {
            names,
            mapping,
            drop,
            ignore,
        })
    }

    /// The four-class VisDrone remap: pedestrian, people, bicycle, tricycle.
    /// Category 0 (ignored regions) is kept as ignore; all other vehicle
    /// categories are dropped.
    pub fn visdrone_vru() -> Self {
        let mapping = [(1, 0), (2, 1), (3, 2), (7, 3)]
            .into_iter()
            .map(|(source, target)| ClassMapping { source, target })
            .collect();
        Self::new(
            ["pedestrian", "people", "bicycle", "tricycle"]
                .map(String::from)
                .to_vec(),
            mapping,
            [4, 5, 6, 8, 9, 10, 11],
            [0],
        )
        .expect("built-in class map is valid")
    }

    /// Maps every class id onto itself.
    pub fn identity(names: Vec<String>) -> Result<Self> {
        let mapping = (0..names.len())
            .map(|k| ClassMapping {
                source: k as u32,
                target: k,
            })
            .collect();
        Self::new(names, mapping, [], [])
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::ClassMap(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("class map serializes")
    }

    pub fn num_classes(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, class: ClassId) -> Option<&str> {
        self.names.get(class.0).map(String::as_str)
    }

    /// `None` for a category the map does not mention.
    pub fn action(&self, source: u32) -> Option<CategoryAction> {
        if let Some(m) = self.mapping.iter().find(|m| m.source == source) {
            return Some(CategoryAction::Keep(ClassId(m.target)));
        }
        if self.ignore.contains(&source) {
            return Some(CategoryAction::Ignore);
        }
        if self.drop.contains(&source) {
            return Some(CategoryAction::Drop);
        }
        None
    }
}
