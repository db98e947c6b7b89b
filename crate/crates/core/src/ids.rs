//! Name newtypes for agents, programs and tasks.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid {what} name `{name}`: expected letters, digits, `_` or `-`")]
pub struct InvalidName {
    pub what: &'static str,
    pub name: String,
}

/// True for characters allowed in agent, program and task names.
pub fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

fn validate(what: &'static str, name: &str) -> Result<(), InvalidName> {
    if name.is_empty() || !name.chars().all(is_name_char) {
        return Err(InvalidName {
            what,
            name: name.to_string(),
        });
    }
    Ok(())
}

macro_rules! name_type {
    ($(#[$meta:meta])* $ty:ident, $what:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $ty(String);

        impl $ty {
            pub fn new(name: impl Into<String>) -> Result<Self, InvalidName> {
                let name = name.into();
                validate($what, &name)?;
                Ok(Self(name))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl FromStr for $ty {
            type Err = InvalidName;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                Self::new(s)
            }
        }

        impl AsRef<str> for $ty {
            fn as_ref(&self) -> &str {
                &self.0
            }
        }
    };
}

name_type!(
    /// An agent name. Compared by exact string equality.
    AgentId,
    "agent"
);
name_type!(
    /// A program (tool) that adequacy promises talk about.
    ProgramId,
    "program"
);
name_type!(
    /// A task a program may be used for.
    TaskId,
    "task"
);
