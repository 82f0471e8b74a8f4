//! Evaluation nets for user sessions.
//!
//! An [`ENet`] is the static structure: places, transitions with their input
//! and output places, permissive places bound to routing transitions, and the
//! places where the session asks its [`ChoiceProvider`] for a decision. A
//! [`Session`] owns the marking and the single kernel travelling through one
//! net instance.
//!
//! Both session nets share the same places `bp1, br1, br2, b1..b9` and the
//! same arcs:
//!
//! ```text
//! bp1 -t1-> b1 -t2[br1]-> b2 | b9
//! b2 -t3-> b3 -t5-> b4   (or b3 -t4-> end)
//! b4 -t6-> b5 -t7-> b6 -t8[br2]-> b7 | b9
//! b7 -t9-> b8 -t10-> b9 -t11-> end
//! ```
//!
//! They differ in what t3, t5 and t6 do: the group-first net lists groups,
//! selects one and then fixes the level; the level-first net fixes the level,
//! then lists and selects a group.

mod choice;
mod session;
mod trace;

use std::fmt;

use thiserror::Error;

use crate::audit::AuditError;
use crate::policy::{Axis, Model, PolicyError};

pub use choice::{
    ChoiceError, ChoiceProvider, InteractiveChoices, Question, ScriptedChoices, EXIT_ANSWER,
    MAX_LEVEL_ANSWER,
};
pub use session::{AuthStatus, Environment, Kernel, Outcome, Session, Step};
pub use trace::{Firing, Trace};

/// Index of a place inside its net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaceId(pub usize);

/// Index of a transition inside its net.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlaceKind {
    Ordinary,
    /// Entry point; a kernel appears here when a session starts.
    Peripheral,
    /// Control place holding the resolver of one routing transition.
    Permissive,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    pub name: &'static str,
    pub kind: PlaceKind,
    /// Decision requested from the choice provider while the kernel sits here.
    pub prompt: Option<Prompt>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Prompt {
    Group { exit_allowed: bool },
    Level { exit_allowed: bool },
    Resource,
}

/// What a transition does to the kernel when it fires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Ident,
    CheckAuthorities,
    ListGroups,
    SelectGroup,
    IdentLevel,
    ListResources,
    SelectResource,
    UseResource,
    LogFile,
    Quit,
}

impl Action {
    pub fn name(self) -> &'static str {
        match self {
            Action::Ident => "Ident",
            Action::CheckAuthorities => "CheckAuthorities",
            Action::ListGroups => "ListGroups",
            Action::SelectGroup => "SelectGroup",
            Action::IdentLevel => "IdentLevel",
            Action::ListResources => "ListResources",
            Action::SelectResource => "SelectResource",
            Action::UseResource => "UseResource",
            Action::LogFile => "LogFile",
            Action::Quit => "Quit",
        }
    }
}

/// Enabling condition beyond "the input place holds the kernel".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Guard {
    Always,
    /// The pending answer is an exit, or the kernel already asked to leave.
    Leave,
    /// Negation of `Leave`.
    Stay,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transition {
    pub name: &'static str,
    pub action: Action,
    pub guard: Guard,
    pub input: PlaceId,
    /// Empty for transitions that retire the kernel. Routing transitions list
    /// the accepting place first and the rejecting place second.
    pub outputs: Vec<PlaceId>,
    pub permissive: Option<PlaceId>,
}

impl Transition {
    /// `t8:SelectResource`
    pub fn label(&self) -> String {
        format!("{}:{}", self.name, self.action.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ENet {
    model: Model,
    places: Vec<Place>,
    transitions: Vec<Transition>,
    entry: PlaceId,
}

#[derive(Debug, Error)]
pub enum NetError {
    #[error("net is busy: a kernel already occupies {0}")]
    Busy(&'static str),
    #[error("no active session")]
    Inactive,
    #[error("policy model {policy} does not match the {net} net")]
    ModelMismatch { net: Model, policy: Model },
    #[error(transparent)]
    Choice(#[from] ChoiceError),
    #[error("structural fault: {0}")]
    Structural(String),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

impl ENet {
    pub fn model(&self) -> Model {
        self.model
    }

    pub fn places(&self) -> &[Place] {
        &self.places
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn place(&self, id: PlaceId) -> &Place {
        &self.places[id.0]
    }

    pub fn transition(&self, id: TransitionId) -> &Transition {
        &self.transitions[id.0]
    }

    pub fn entry(&self) -> PlaceId {
        self.entry
    }

    pub fn place_id(&self, name: &str) -> Option<PlaceId> {
        self.places.iter().position(|p| p.name == name).map(PlaceId)
    }

    pub fn transition_id(&self, name: &str) -> Option<TransitionId> {
        self.transitions
            .iter()
            .position(|t| t.name == name)
            .map(TransitionId)
    }

    /// Checks closure of arc references, permissive-place binding, the single
    /// peripheral entry and acyclicity from the entry to every exit.
    pub fn validate(&self) -> Result<(), NetError> {
        let fault = |msg: String| Err(NetError::Structural(msg));
        let n = self.places.len();
        let peripheral: Vec<_> = self
            .places
            .iter()
            .filter(|p| p.kind == PlaceKind::Peripheral)
            .collect();
        if peripheral.len() != 1 || self.place(self.entry).kind != PlaceKind::Peripheral {
            return fault("exactly one peripheral entry place expected".into());
        }
        for t in &self.transitions {
            let refs = std::iter::once(t.input)
                .chain(t.outputs.iter().copied())
                .chain(t.permissive);
            for p in refs {
                if p.0 >= n {
                    return fault(format!("{} references missing place #{}", t.name, p.0));
                }
            }
            if self.place(t.input).kind == PlaceKind::Permissive {
                return fault(format!("{} consumes from a permissive place", t.name));
            }
            if t.outputs
                .iter()
                .any(|&p| self.place(p).kind != PlaceKind::Ordinary)
            {
                return fault(format!("{} produces into a non-ordinary place", t.name));
            }
            match (t.permissive, t.outputs.len()) {
                (Some(p), 2) if self.place(p).kind == PlaceKind::Permissive => {}
                (Some(_), _) => return fault(format!("{} has a malformed resolver", t.name)),
                (None, 0 | 1) => {}
                (None, _) => return fault(format!("{} routes without a resolver", t.name)),
            }
        }
        for (i, place) in self.places.iter().enumerate() {
            if place.kind != PlaceKind::Permissive {
                continue;
            }
            let users = self
                .transitions
                .iter()
                .filter(|t| t.permissive == Some(PlaceId(i)))
                .count();
            if users != 1 {
                return fault(format!("{} bound to {users} transitions", place.name));
            }
        }
        // Depth-first search for a cycle over place -> place edges.
        let mut state = vec![0u8; n];
        fn visit(net: &ENet, p: usize, state: &mut [u8]) -> bool {
            state[p] = 1;
            for t in net.transitions.iter().filter(|t| t.input.0 == p) {
                for o in &t.outputs {
                    let seen = state[o.0];
                    if seen == 1 || (seen == 0 && !visit(net, o.0, state)) {
                        return false;
                    }
                }
            }
            state[p] = 2;
            true
        }
        if !visit(self, self.entry.0, &mut state) {
            return fault("cycle reachable from the entry place".into());
        }
        Ok(())
    }
}

impl fmt::Display for ENet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.transitions {
            let outs: Vec<_> = t.outputs.iter().map(|&p| self.place(p).name).collect();
            let to = if outs.is_empty() {
                "end".to_string()
            } else {
                outs.join("|")
            };
            write!(f, "{}\t{}\t{}", t.label(), self.place(t.input).name, to)?;
            if let Some(r) = t.permissive {
                write!(f, "\t[{}]", self.place(r).name)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// The group-first session net.
pub fn build_engl_net() -> ENet {
    build(
        Model::Engl,
        [Action::ListGroups, Action::SelectGroup, Action::IdentLevel],
        [
            ("b2", None),
            ("b3", Some(Prompt::Group { exit_allowed: true })),
            (
                "b4",
                Some(Prompt::Level {
                    exit_allowed: false,
                }),
            ),
        ],
    )
}

/// The level-first session net.
pub fn build_enlg_net() -> ENet {
    build(
        Model::Enlg,
        [Action::IdentLevel, Action::ListGroups, Action::SelectGroup],
        [
            ("b2", Some(Prompt::Level { exit_allowed: true })),
            ("b3", None),
            (
                "b4",
                Some(Prompt::Group {
                    exit_allowed: false,
                }),
            ),
        ],
    )
}

pub fn build_net(model: Model) -> ENet {
    match model {
        Model::Engl => build_engl_net(),
        Model::Enlg => build_enlg_net(),
    }
}

fn build(
    model: Model,
    [a3, a5, a6]: [Action; 3],
    prompts: [(&'static str, Option<Prompt>); 3],
) -> ENet {
    let ordinary = |name, prompt| Place {
        name,
        kind: PlaceKind::Ordinary,
        prompt,
    };
    let mut places = vec![
        Place {
            name: "bp1",
            kind: PlaceKind::Peripheral,
            prompt: None,
        },
        Place {
            name: "br1",
            kind: PlaceKind::Permissive,
            prompt: None,
        },
        Place {
            name: "br2",
            kind: PlaceKind::Permissive,
            prompt: None,
        },
    ];
    for name in ["b1", "b2", "b3", "b4", "b5", "b6", "b7", "b8", "b9"] {
        let prompt = match name {
            "b6" => Some(Prompt::Resource),
            _ => prompts
                .iter()
                .find(|(n, _)| *n == name)
                .and_then(|(_, p)| *p),
        };
        places.push(ordinary(name, prompt));
    }
    let id = |name: &str| {
        PlaceId(
            places
                .iter()
                .position(|p| p.name == name)
                .expect("place declared above"),
        )
    };
    let t =
        |name, action, guard, input: &str, outputs: &[&str], permissive: Option<&str>| Transition {
            name,
            action,
            guard,
            input: id(input),
            outputs: outputs.iter().map(|o| id(o)).collect(),
            permissive: permissive.map(id),
        };
    let transitions = vec![
        t("t1", Action::Ident, Guard::Always, "bp1", &["b1"], None),
        t(
            "t2",
            Action::CheckAuthorities,
            Guard::Always,
            "b1",
            &["b2", "b9"],
            Some("br1"),
        ),
        t("t3", a3, Guard::Always, "b2", &["b3"], None),
        t("t4", Action::Quit, Guard::Leave, "b3", &[], None),
        t("t5", a5, Guard::Stay, "b3", &["b4"], None),
        t("t6", a6, Guard::Always, "b4", &["b5"], None),
        t(
            "t7",
            Action::ListResources,
            Guard::Always,
            "b5",
            &["b6"],
            None,
        ),
        t(
            "t8",
            Action::SelectResource,
            Guard::Always,
            "b6",
            &["b7", "b9"],
            Some("br2"),
        ),
        t(
            "t9",
            Action::UseResource,
            Guard::Always,
            "b7",
            &["b8"],
            None,
        ),
        t("t10", Action::LogFile, Guard::Always, "b8", &["b9"], None),
        t("t11", Action::Quit, Guard::Always, "b9", &[], None),
    ];
    let entry = id("bp1");
    ENet {
        model,
        places,
        transitions,
        entry,
    }
}

pub(crate) fn unknown(axis: Axis, name: &str) -> ChoiceError {
    ChoiceError::UnknownName {
        axis,
        name: name.to_string(),
    }
}
