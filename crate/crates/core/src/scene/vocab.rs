//! Closed vocabularies of object, relation and action names.

use std::fmt;
use std::path::Path;

use indexmap::IndexSet;
use serde::{Deserialize, Serialize};

use super::SceneError;

const DEFAULT_VOCAB: &str = include_str!("default_vocab.json");

/// Which of the three closed name sets a name belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NameKind {
    Object,
    Relation,
    Action,
}

impl fmt::Display for NameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NameKind::Object => "object",
            NameKind::Relation => "relation",
            NameKind::Action => "action",
        })
    }
}

/// The object, relation and action names a scene may use.
///
/// Each name gets a stable integer id: its position in the list it was
/// declared in. Lookups are exact and case-sensitive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    objects: IndexSet<String>,
    relations: IndexSet<String>,
    actions: IndexSet<String>,
}

#[derive(Serialize, Deserialize)]
struct VocabFile {
    objects: Vec<String>,
    relations: Vec<String>,
    actions: Vec<String>,
}

impl Vocabulary {
    pub fn new(
        objects: impl IntoIterator<Item = String>,
        relations: impl IntoIterator<Item = String>,
        actions: impl IntoIterator<Item = String>,
    ) -> Result<Self, SceneError> {
        let objects = collect_unique(objects, NameKind::Object)?;
        let relations = collect_unique(relations, NameKind::Relation)?;
        let actions = collect_unique(actions, NameKind::Action)?;
        let vocab = Self {
            objects,
            relations,
            actions,
        };
        vocab.check_disjoint()?;
        Ok(vocab)
    }

    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let file: VocabFile =
            serde_json::from_str(text).map_err(|e| SceneError::Format(e.to_string()))?;
        Self::new(file.objects, file.relations, file.actions)
    }

    pub fn load(path: &Path) -> Result<Self, SceneError> {
        let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        let file = VocabFile {
            objects: self.objects.iter().cloned().collect(),
            relations: self.relations.iter().cloned().collect(),
            actions: self.actions.iter().cloned().collect(),
        };
        serde_json::to_string_pretty(&file).expect("vocabulary serializes")
    }

    /// Returns a copy with extra names appended to each list.
    ///
    /// Existing ids are unchanged; new names get the next free ids.
    pub fn extended(
        &self,
        objects: &[&str],
        relations: &[&str],
        actions: &[&str],
    ) -> Result<Self, SceneError> {
        let chain = |base: &IndexSet<String>, extra: &[&str]| -> Vec<String> {
            base.iter()
                .cloned()
                .chain(extra.iter().map(|s| s.to_string()))
                .collect()
        };
        Self::new(
            chain(&self.objects, objects),
            chain(&self.relations, relations),
            chain(&self.actions, actions),
        )
    }

    fn set(&self, kind: NameKind) -> &IndexSet<String> {
        match kind {
            NameKind::Object => &self.objects,
            NameKind::Relation => &self.relations,
            NameKind::Action => &self.actions,
        }
    }

    pub fn id(&self, kind: NameKind, name: &str) -> Option<usize> {
        self.set(kind).get_index_of(name)
    }

    pub fn name(&self, kind: NameKind, id: usize) -> Option<&str> {
        self.set(kind).get_index(id).map(String::as_str)
    }

    pub fn contains(&self, kind: NameKind, name: &str) -> bool {
        self.set(kind).contains(name)
    }

    pub fn has_object(&self, name: &str) -> bool {
        self.objects.contains(name)
    }

    pub fn has_relation(&self, name: &str) -> bool {
        self.relations.contains(name)
    }

    pub fn has_action(&self, name: &str) -> bool {
        self.actions.contains(name)
    }

    /// The kind a name belongs to, if any.
    pub fn kind_of(&self, name: &str) -> Option<NameKind> {
        [NameKind::Object, NameKind::Relation, NameKind::Action]
            .into_iter()
            .find(|k| self.contains(*k, name))
    }

    pub fn objects(&self) -> impl Iterator<Item = &str> {
        self.objects.iter().map(String::as_str)
    }

    pub fn relations(&self) -> impl Iterator<Item = &str> {
        self.relations.iter().map(String::as_str)
    }

    pub fn actions(&self) -> impl Iterator<Item = &str> {
        self.actions.iter().map(String::as_str)
    }

    pub fn len(&self, kind: NameKind) -> usize {
        self.set(kind).len()
    }

    /// The object an action phrase is performed on, found by matching the
    /// phrase's words against the object list. `None` for phrases such as
    /// "standing up" that name no object.
    pub fn object_of_action(&self, action: &str) -> Option<&str> {
        action
            .split_whitespace()
            .find_map(|word| self.objects.get(word).map(String::as_str))
    }

    fn check_disjoint(&self) -> Result<(), SceneError> {
        let pairs = [
            (NameKind::Object, NameKind::Relation),
            (NameKind::Object, NameKind::Action),
            (NameKind::Relation, NameKind::Action),
        ];
        for (a, b) in pairs {
            if let Some(name) = self.set(a).iter().find(|n| self.set(b).contains(*n)) {
                return Err(SceneError::Vocabulary(format!(
                    "name {name:?} is both an {a} and a {b}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for Vocabulary {
    fn default() -> Self {
        Self::from_json(DEFAULT_VOCAB).expect("embedded vocabulary is valid")
    }
}

fn collect_unique(
    names: impl IntoIterator<Item = String>,
    kind: NameKind,
) -> Result<IndexSet<String>, SceneError> {
    let mut set = IndexSet::new();
    for name in names {
        if name.is_empty() {
            return Err(SceneError::Vocabulary(format!("empty {kind} name")));
        }
        if !set.insert(name.clone()) {
            return Err(SceneError::Vocabulary(format!(
                "duplicate {kind} name {name:?}"
            )));
        }
    }
    Ok(set)
}
