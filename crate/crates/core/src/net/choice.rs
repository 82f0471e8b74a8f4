use std::collections::VecDeque;
use std::io::{BufRead, Write};

use thiserror::Error;

use crate::policy::Axis;

/// Answer that leaves the session (at a group, level or resource prompt
/// that allows it).
pub const EXIT_ANSWER: &str = "-";
/// Level answer meaning "my full entitlement".
pub const MAX_LEVEL_ANSWER: &str = "*";

/// A decision the session needs from its user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Question {
    Group {
        options: Vec<(String, u8)>,
        exit_allowed: bool,
    },
    /// `max` is 0 when the selected group grants nothing.
    Level {
        max: u8,
        exit_allowed: bool,
    },
    Resource {
        options: Vec<String>,
    },
}

impl Question {
    pub fn kind(&self) -> &'static str {
        match self {
            Question::Group { .. } => "group",
            Question::Level { .. } => "level",
            Question::Resource { .. } => "resource",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChoiceError {
    #[error("script exhausted at {question} prompt")]
    Underrun { question: &'static str },
    #[error("unknown {axis} {name:?}")]
    UnknownName { axis: Axis, name: String },
    #[error("level {answer} exceeds entitlement {max}")]
    AboveEntitlement { answer: u8, max: u8 },
    #[error("malformed {question} answer {answer:?}")]
    Malformed {
        question: &'static str,
        answer: String,
    },
    #[error("exit is not available at the {question} prompt")]
    ExitNotAllowed { question: &'static str },
    #[error("reading answer: {0}")]
    Input(String),
}

/// Supplies session decisions.
pub trait ChoiceProvider {
    fn answer(&mut self, question: &Question) -> Result<String, ChoiceError>;
}

impl<C: ChoiceProvider + ?Sized> ChoiceProvider for &mut C {
    fn answer(&mut self, question: &Question) -> Result<String, ChoiceError> {
        (**self).answer(question)
    }
}

/// Fixed list of answers consumed in order. Unused answers are left alone.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ScriptedChoices {
    answers: VecDeque<String>,
}

impl ScriptedChoices {
    pub fn new<I, S>(answers: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        ScriptedChoices {
            answers: answers.into_iter().map(Into::into).collect(),
        }
    }

    /// Comma-separated answers, e.g. `g1,2,r1`.
    pub fn parse(script: &str) -> Self {
        if script.trim().is_empty() {
            return Self::default();
        }
        Self::new(script.split(',').map(str::trim))
    }

    pub fn remaining(&self) -> usize {
        self.answers.len()
    }
}

impl ChoiceProvider for ScriptedChoices {
    fn answer(&mut self, question: &Question) -> Result<String, ChoiceError> {
        self.answers.pop_front().ok_or(ChoiceError::Underrun {
            question: question.kind(),
        })
    }
}

/// Prompts on `out` with the legal options and reads one line per answer.
#[derive(Debug)]
pub struct InteractiveChoices<R, W> {
    input: R,
    out: W,
}

impl<R: BufRead, W: Write> InteractiveChoices<R, W> {
    pub fn new(input: R, out: W) -> Self {
        InteractiveChoices { input, out }
    }

    fn prompt(&mut self, question: &Question) -> std::io::Result<()> {
        match question {
            Question::Group {
                options,
                exit_allowed,
            } => {
                let listed: Vec<_> = options
                    .iter()
                    .map(|(g, l)| format!("{g} (level {l})"))
                    .collect();
                writeln!(self.out, "groups: {}", or_none(&listed))?;
                write!(self.out, "group{}> ", exit_hint(*exit_allowed))?;
            }
            Question::Level { max, exit_allowed } => {
                if *max == 0 {
                    writeln!(self.out, "levels: none")?;
                } else {
                    writeln!(self.out, "levels: 1..={max} ({MAX_LEVEL_ANSWER} for {max})")?;
                }
                write!(self.out, "level{}> ", exit_hint(*exit_allowed))?;
            }
            Question::Resource { options } => {
                writeln!(self.out, "resources: {}", or_none(options))?;
                write!(self.out, "resource{}> ", exit_hint(true))?;
            }
        }
        self.out.flush()
    }
}

fn or_none(items: &[String]) -> String {
    if items.is_empty() {
        "none".to_string()
    } else {
        items.join(", ")
    }
}

fn exit_hint(allowed: bool) -> String {
    if allowed {
        format!(" ({EXIT_ANSWER} to exit)")
    } else {
        String::new()
    }
}

impl<R: BufRead, W: Write> ChoiceProvider for InteractiveChoices<R, W> {
    fn answer(&mut self, question: &Question) -> Result<String, ChoiceError> {
        self.prompt(question)
            .map_err(|e| ChoiceError::Input(e.to_string()))?;
        let mut line = String::new();
        let read = self
            .input
            .read_line(&mut line)
            .map_err(|e| ChoiceError::Input(e.to_string()))?;
        if read == 0 {
            return Err(ChoiceError::Underrun {
                question: question.kind(),
            });
        }
        Ok(line.trim().to_string())
    }
}
