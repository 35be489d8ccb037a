use std::fmt;

use serde::{Deserialize, Serialize};

/// One action letter per decision state, in model state order, e.g. `"DI"`
/// for Direct at A and Indirect at B.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PolicyLabel(String);

impl PolicyLabel {
    pub fn new(label: impl Into<String>) -> Self {
        PolicyLabel(label.into())
    }

    pub fn from_letters(letters: impl IntoIterator<Item = char>) -> Self {
        PolicyLabel(letters.into_iter().collect())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn letters(&self) -> impl Iterator<Item = char> + '_ {
        self.0.chars()
    }
}

impl fmt::Display for PolicyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(&self.0)
    }
}

impl From<&str> for PolicyLabel {
    fn from(s: &str) -> Self {
        PolicyLabel(s.to_owned())
    }
}

impl PartialEq<&str> for PolicyLabel {
    fn eq(&self, other: &&str) -> bool {
        self.0 == *other
    }
}
