//! Assumption ledger attached to every estimate.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Where an input value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Stated by the user, on the command line or in the description.
    User,
    /// Read from the catalog bundle.
    Catalog,
    /// Filled in because nothing was stated.
    Default,
    /// Computed or inferred from other inputs.
    Derived,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::User => "user",
            Provenance::Catalog => "catalog",
            Provenance::Default => "default",
            Provenance::Derived => "derived",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A value together with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sourced<T> {
    pub value: T,
    pub provenance: Provenance,
}

impl<T> Sourced<T> {
    pub fn new(value: T, provenance: Provenance) -> Self {
        Sourced { value, provenance }
    }

    pub fn user(value: T) -> Self {
        Sourced::new(value, Provenance::User)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assumption {
    pub name: String,
    pub value: String,
    pub provenance: Provenance,
    /// Parameter count or similar is a placeholder rather than a published figure.
    pub assumed: bool,
    /// Value was solved from published outputs.
    pub fitted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Assumption {
    pub fn new(name: impl Into<String>, value: impl Into<String>, provenance: Provenance) -> Self {
        Assumption {
            name: name.into(),
            value: value.into(),
            provenance,
            assumed: false,
            fitted: false,
            note: None,
        }
    }

    pub fn assumed(mut self, yes: bool) -> Self {
        self.assumed = yes;
        self
    }

    pub fn fitted(mut self, yes: bool) -> Self {
        self.fitted = yes;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = {} [{}", self.name, self.value, self.provenance)?;
        if self.assumed {
            f.write_str(", assumed")?;
        }
        if self.fitted {
            f.write_str(", fitted")?;
        }
        f.write_str("]")?;
        if let Some(note) = &self.note {
            write!(f, " ({note})")?;
        }
        Ok(())
    }
}
