//! The two resource-distribution models and their access predicates.
//!
//! [`EnglPolicy`] assigns levels per group (a user or resource has a maximum
//! level inside each group it belongs to). [`EnlgPolicy`] assigns a global
//! maximum level per entity and then lists, per level, the groups the entity
//! belongs to.
//!
//! All indices in this module are 1-based: user `1` is the first entry of the
//! user catalog. Callers working with names resolve them through [`Catalog`].

mod catalog;
mod engl;
mod enlg;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use catalog::Catalog;
pub use engl::EnglPolicy;
pub use enlg::{AccessWitness, EnlgPolicy};

/// Which distribution model a policy follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Groups first, levels inside each group.
    Engl,
    /// Levels first, groups inside each level.
    Enlg,
}

impl Model {
    pub fn as_str(self) -> &'static str {
        match self {
            Model::Engl => "engl",
            Model::Enlg => "enlg",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Model {
    type Err = PolicyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "engl" => Ok(Model::Engl),
            "enlg" => Ok(Model::Enlg),
            other => Err(PolicyError::UnknownModel(other.to_string())),
        }
    }
}

/// A security level in `1..=q`.
///
/// The membership sentinel `0` is never a `SecurityLevel`; matrices store raw
/// `u8` entries and convert on the way out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct SecurityLevel(u8);

impl SecurityLevel {
    /// Returns `None` for the sentinel `0`.
    pub const fn new(value: u8) -> Option<Self> {
        if value == 0 {
            None
        } else {
            Some(SecurityLevel(value))
        }
    }

    pub const fn get(self) -> u8 {
        self.0
    }
}

impl TryFrom<u8> for SecurityLevel {
    type Error = PolicyError;

    fn try_from(value: u8) -> Result<Self, Self::Error> {
        SecurityLevel::new(value).ok_or(PolicyError::ZeroLevel)
    }
}

impl From<SecurityLevel> for u8 {
    fn from(level: SecurityLevel) -> u8 {
        level.0
    }
}

impl fmt::Display for SecurityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Axis of a policy index, used in error reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    User,
    Group,
    Resource,
    Level,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::User => "user",
            Axis::Group => "group",
            Axis::Resource => "resource",
            Axis::Level => "level",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyError {
    #[error("{axis} index {index} out of range 1..={len}")]
    IndexOutOfRange {
        axis: Axis,
        index: usize,
        len: usize,
    },
    #[error("level cap {cap} exceeds the user's entitlement {max}")]
    Entitlement { cap: u8, max: u8 },
    #[error("{axis} catalog is empty")]
    EmptyCatalog { axis: Axis },
    #[error("duplicate {axis} name {name:?}")]
    DuplicateName { axis: Axis, name: String },
    #[error("number of levels must be at least 1")]
    NoLevels,
    #[error("{what} entry {value} out of range {min}..={max}")]
    LevelOutOfRange {
        what: &'static str,
        value: u8,
        min: u8,
        max: u8,
    },
    #[error("{what} has {actual} entries, expected {expected}")]
    Shape {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("{axis} {index} is member at level {level} above its maximum {max}")]
    AboveMaximum {
        axis: Axis,
        index: usize,
        level: u8,
        max: u8,
    },
    #[error("security level 0 is reserved for non-membership")]
    ZeroLevel,
    #[error("unknown model tag {0:?}")]
    UnknownModel(String),
}

pub(crate) fn check_index(axis: Axis, index: usize, len: usize) -> Result<(), PolicyError> {
    if index == 0 || index > len {
        Err(PolicyError::IndexOutOfRange { axis, index, len })
    } else {
        Ok(())
    }
}

/// Either model, as loaded from a policy file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Policy {
    Engl(EnglPolicy),
    Enlg(EnlgPolicy),
}

impl Policy {
    pub fn model(&self) -> Model {
        match self {
            Policy::Engl(_) => Model::Engl,
            Policy::Enlg(_) => Model::Enlg,
        }
    }

    pub fn levels(&self) -> u8 {
        match self {
            Policy::Engl(p) => p.levels(),
            Policy::Enlg(p) => p.levels(),
        }
    }

    pub fn users(&self) -> &Catalog {
        match self {
            Policy::Engl(p) => p.users(),
            Policy::Enlg(p) => p.users(),
        }
    }

    pub fn groups(&self) -> &Catalog {
        match self {
            Policy::Engl(p) => p.groups(),
            Policy::Enlg(p) => p.groups(),
        }
    }

    pub fn resources(&self) -> &Catalog {
        match self {
            Policy::Engl(p) => p.resources(),
            Policy::Enlg(p) => p.resources(),
        }
    }

    /// Groups user `i` belongs to, with the user's highest level there.
    pub fn list_groups(&self, i: usize) -> Result<Vec<(usize, SecurityLevel)>, PolicyError> {
        match self {
            Policy::Engl(p) => p.list_groups(i),
            Policy::Enlg(p) => p.list_groups(i),
        }
    }

    /// Resources user `i` may use inside group `j`, optionally capped at a level.
    pub fn list_resources(
        &self,
        i: usize,
        j: usize,
        level_cap: Option<SecurityLevel>,
    ) -> Result<Vec<usize>, PolicyError> {
        match self {
            Policy::Engl(p) => p.list_resources(i, j, level_cap),
            Policy::Enlg(p) => p.list_resources(i, j, level_cap),
        }
    }

    /// True when the user holds at least one group membership.
    pub fn has_memberships(&self, i: usize) -> Result<bool, PolicyError> {
        Ok(!self.list_groups(i)?.is_empty())
    }
}

impl From<EnglPolicy> for Policy {
    fn from(p: EnglPolicy) -> Self {
        Policy::Engl(p)
    }
}

impl From<EnlgPolicy> for Policy {
    fn from(p: EnlgPolicy) -> Self {
        Policy::Enlg(p)
    }
}
