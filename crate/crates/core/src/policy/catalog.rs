use std::collections::HashMap;

use super::{Axis, PolicyError};

/// Ordered, duplicate-free list of identifiers with 1-based positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Catalog {
    axis: Axis,
    names: Vec<String>,
    positions: HashMap<String, usize>,
}

impl Catalog {
    pub fn new<I, S>(axis: Axis, names: I) -> Result<Self, PolicyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(PolicyError::EmptyCatalog { axis });
        }
        let mut positions = HashMap::with_capacity(names.len());
        for (offset, name) in names.iter().enumerate() {
            if positions.insert(name.clone(), offset + 1).is_some() {
                return Err(PolicyError::DuplicateName {
                    axis,
                    name: name.clone(),
                });
            }
        }
        Ok(Catalog {
            axis,
            names,
            positions,
        })
    }

    /// Catalog of `len` generated names `prefix1..prefixN`.
    pub fn numbered(axis: Axis, prefix: &str, len: usize) -> Result<Self, PolicyError> {
        Catalog::new(axis, (1..=len).map(|i| format!("{prefix}{i}")))
    }

    pub fn axis(&self) -> Axis {
        self.axis
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// 1-based position of `name`.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.positions.get(name).copied()
    }

    /// Name at 1-based `index`.
    pub fn name(&self, index: usize) -> Option<&str> {
        index
            .checked_sub(1)
            .and_then(|o| self.names.get(o))
            .map(String::as_str)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &str)> {
        self.names
            .iter()
            .enumerate()
            .map(|(o, n)| (o + 1, n.as_str()))
    }
}
