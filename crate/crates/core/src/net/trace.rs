use std::fmt;

use super::{Action, Kernel};

/// One transition firing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    /// 1-based position in the session.
    pub seq: usize,
    /// Short name, e.g. `t8`.
    pub transition: &'static str,
    pub action: Action,
    pub from: &'static str,
    /// Entered place, or `end` when the kernel was retired.
    pub to: &'static str,
    /// Kernel state right after the firing.
    pub kernel: Kernel,
}

impl Firing {
    /// `<seq>\t<transition>\t<from-place>\t<to-place>\t<outcome>`
    pub fn render(&self) -> String {
        format!(
            "{}\t{}:{}\t{}\t{}\t{}",
            self.seq,
            self.transition,
            self.action.name(),
            self.from,
            self.to,
            self.kernel.outcome
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub firings: Vec<Firing>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.firings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.firings.is_empty()
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.firings.iter().map(|f| f.transition).collect()
    }

    pub fn actions(&self) -> Vec<Action> {
        self.firings.iter().map(|f| f.action).collect()
    }

    pub fn fired(&self, transition: &str) -> bool {
        self.firings.iter().any(|f| f.transition == transition)
    }

    pub fn last(&self) -> Option<&Firing> {
        self.firings.last()
    }

    /// Final kernel, if anything fired.
    pub fn kernel(&self) -> Option<&Kernel> {
        self.last().map(|f| &f.kernel)
    }

    /// One firing per line, each terminated by `\n`.
    pub fn render(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for firing in &self.firings {
            writeln!(f, "{}", firing.render())?;
        }
        Ok(())
    }
}
