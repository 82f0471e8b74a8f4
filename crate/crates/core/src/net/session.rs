use std::fmt;

use serde::Serialize;

use super::choice::{ChoiceError, ChoiceProvider, Question, EXIT_ANSWER, MAX_LEVEL_ANSWER};
use super::trace::{Firing, Trace};
use super::{unknown, Action, ENet, Guard, NetError, PlaceId, Prompt, TransitionId};
use crate::audit::{AuditOutcome, AuditRecord, AuditSink, Clock};
use crate::policy::{Axis, Policy, SecurityLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AuthStatus {
    Unchecked,
    Granted,
    Denied,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pending,
    Denied,
    Used,
    Quit,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Pending => "pending",
            Outcome::Denied => "denied",
            Outcome::Used => "used",
            Outcome::Quit => "quit",
        })
    }
}

/// The token carried through a session net.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Kernel {
    pub session: String,
    pub user: String,
    pub auth: AuthStatus,
    pub group: Option<String>,
    pub level: Option<SecurityLevel>,
    /// Set only once the resource passed the access check.
    pub resource: Option<String>,
    pub outcome: Outcome,
    /// The user chose to leave before selecting a group.
    pub exit_requested: bool,
    #[serde(skip)]
    user_ix: Option<usize>,
    #[serde(skip)]
    group_ix: Option<usize>,
}

impl Kernel {
    fn new(session: String, user: String) -> Self {
        Kernel {
            session,
            user,
            auth: AuthStatus::Unchecked,
            group: None,
            level: None,
            resource: None,
            outcome: Outcome::Pending,
            exit_requested: false,
            user_ix: None,
            group_ix: None,
        }
    }

    /// 1-based catalog position of the user, once identified.
    pub fn user_index(&self) -> Option<usize> {
        self.user_ix
    }

    pub fn group_index(&self) -> Option<usize> {
        self.group_ix
    }
}

/// Everything a firing may consult or emit to.
pub struct Environment<'a> {
    pub policy: &'a Policy,
    pub choices: &'a mut dyn ChoiceProvider,
    pub audit: &'a mut dyn AuditSink,
    pub clock: &'a dyn Clock,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Fired(Firing),
    Complete,
}

/// One net instance: its marking and at most one kernel.
#[derive(Debug, Clone)]
pub struct Session<'n> {
    net: &'n ENet,
    marking: Vec<u8>,
    kernel: Option<Kernel>,
    pending: Option<String>,
    offered_groups: Vec<(usize, SecurityLevel)>,
    offered_resources: Vec<usize>,
    trace: Trace,
    started: bool,
}

impl<'n> Session<'n> {
    /// Instance with the empty initial marking.
    pub fn new(net: &'n ENet) -> Self {
        Session {
            net,
            marking: vec![0; net.places().len()],
            kernel: None,
            pending: None,
            offered_groups: Vec::new(),
            offered_resources: Vec::new(),
            trace: Trace::default(),
            started: false,
        }
    }

    pub fn net(&self) -> &ENet {
        self.net
    }

    /// Kernel count per place, in the net's place order.
    pub fn marking(&self) -> &[u8] {
        &self.marking
    }

    pub fn kernel(&self) -> Option<&Kernel> {
        self.kernel.as_ref()
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn is_active(&self) -> bool {
        self.kernel.is_some()
    }

    fn current_place(&self) -> Option<PlaceId> {
        self.marking.iter().position(|&c| c > 0).map(PlaceId)
    }

    /// Places a fresh kernel for `user` in the entry place.
    pub fn inject(&mut self, user: &str, session_id: &str) -> Result<(), NetError> {
        if let Some(p) = self.current_place() {
            return Err(NetError::Busy(self.net.place(p).name));
        }
        self.marking[self.net.entry().0] = 1;
        self.kernel = Some(Kernel::new(session_id.to_string(), user.to_string()));
        self.pending = None;
        self.offered_groups.clear();
        self.offered_resources.clear();
        self.trace = Trace::default();
        self.started = true;
        Ok(())
    }

    /// Fires the single enabled transition.
    pub fn step(&mut self, env: &mut Environment<'_>) -> Result<Step, NetError> {
        let Some(place) = self.current_place() else {
            return if self.started {
                Ok(Step::Complete)
            } else {
                Err(NetError::Inactive)
            };
        };
        if env.policy.model() != self.net.model() {
            return Err(NetError::ModelMismatch {
                net: self.net.model(),
                policy: env.policy.model(),
            });
        }
        if let (Some(prompt), None) = (self.net.place(place).prompt, &self.pending) {
            let question = self.question(prompt, env.policy)?;
            let answer = env.choices.answer(&question)?;
            let exit_allowed = match prompt {
                Prompt::Group { exit_allowed } | Prompt::Level { exit_allowed } => exit_allowed,
                Prompt::Resource => true,
            };
            if answer == EXIT_ANSWER && !exit_allowed {
                return Err(ChoiceError::ExitNotAllowed {
                    question: question.kind(),
                }
                .into());
            }
            self.pending = Some(answer);
        }

        let leaving = self.pending.as_deref() == Some(EXIT_ANSWER)
            || self.kernel.as_ref().is_some_and(|k| k.exit_requested);
        let enabled: Vec<TransitionId> = self
            .net
            .transitions()
            .iter()
            .enumerate()
            .filter(|(_, t)| {
                t.input == place
                    && match t.guard {
                        Guard::Always => true,
                        Guard::Leave => leaving,
                        Guard::Stay => !leaving,
                    }
            })
            .map(|(i, _)| TransitionId(i))
            .collect();
        let [tid] = enabled[..] else {
            return Err(NetError::Structural(format!(
                "{} transitions enabled at {}",
                enabled.len(),
                self.net.place(place).name
            )));
        };

        let transition = self.net.transition(tid);
        let route = self.fire(tid, env)?;
        self.marking[place.0] -= 1;
        let to = match route {
            Some(slot) => {
                let out = transition.outputs[slot];
                self.marking[out.0] += 1;
                self.net.place(out).name
            }
            None => "end",
        };
        if self.marking.iter().any(|&c| c > 1)
            || self.marking.iter().map(|&c| c as u32).sum::<u32>() > 1
        {
            return Err(NetError::Structural("unsafe marking".into()));
        }
        let kernel = self.kernel.clone().expect("kernel present while marked");
        if route.is_none() {
            self.kernel = None;
        }
        let firing = Firing {
            seq: self.trace.len() + 1,
            transition: transition.name,
            action: transition.action,
            from: self.net.place(place).name,
            to,
            kernel,
        };
        self.trace.firings.push(firing.clone());
        Ok(Step::Fired(firing))
    }

    /// Steps until a quit transition retires the kernel.
    pub fn run(&mut self, env: &mut Environment<'_>) -> Result<Trace, NetError> {
        loop {
            if let Step::Complete = self.step(env)? {
                return Ok(self.trace.clone());
            }
        }
    }

    fn question(&self, prompt: Prompt, policy: &Policy) -> Result<Question, NetError> {
        let kernel = self.kernel.as_ref().expect("kernel present while marked");
        Ok(match prompt {
            Prompt::Group { exit_allowed } => Question::Group {
                options: self
                    .offered_groups
                    .iter()
                    .map(|&(j, l)| (name(policy.groups().name(j)), l.get()))
                    .collect(),
                exit_allowed,
            },
            Prompt::Level { exit_allowed } => Question::Level {
                max: self.entitlement(kernel, policy)?,
                exit_allowed,
            },
            Prompt::Resource => Question::Resource {
                options: self
                    .offered_resources
                    .iter()
                    .map(|&k| name(policy.resources().name(k)))
                    .collect(),
            },
        })
    }

    /// Highest level the user may operate at in the current state.
    fn entitlement(&self, kernel: &Kernel, policy: &Policy) -> Result<u8, NetError> {
        let Some(i) = kernel.user_ix else {
            return Ok(0);
        };
        Ok(match policy {
            Policy::Engl(p) => match kernel.group_ix {
                Some(j) => p.user_level(i, j)?,
                None => 0,
            },
            Policy::Enlg(p) => p.user_max(i)?.get(),
        })
    }

    /// Applies the transition's kernel transform; returns the chosen output
    /// slot, or `None` when the kernel is retired.
    fn fire(
        &mut self,
        tid: TransitionId,
        env: &mut Environment<'_>,
    ) -> Result<Option<usize>, NetError> {
        let transition = self.net.transition(tid);
        let label = transition.label();
        let policy = env.policy;
        let pending = self.pending.take();
        let mut kernel = self.kernel.take().expect("kernel present while marked");
        let result = (|| -> Result<Option<usize>, NetError> {
            match transition.action {
                Action::Ident => {
                    kernel.user_ix = policy.users().position(&kernel.user);
                    kernel.auth = AuthStatus::Unchecked;
                    Ok(Some(0))
                }
                Action::CheckAuthorities => {
                    let granted = match kernel.user_ix {
                        Some(i) => policy.has_memberships(i)?,
                        None => false,
                    };
                    if granted {
                        kernel.auth = AuthStatus::Granted;
                        Ok(Some(0))
                    } else {
                        kernel.auth = AuthStatus::Denied;
                        kernel.outcome = Outcome::Denied;
                        emit(env, &kernel, &label, AuditOutcome::Denied, "")?;
                        Ok(Some(1))
                    }
                }
                Action::ListGroups => {
                    let i = identified(&kernel)?;
                    self.offered_groups = match (policy, kernel.level) {
                        (Policy::Enlg(p), Some(level)) => p.list_groups_at(i, level)?,
                        (Policy::Enlg(_), None) => Vec::new(),
                        (Policy::Engl(p), _) => p.list_groups(i)?,
                    };
                    Ok(Some(0))
                }
                Action::SelectGroup => {
                    let answer = answered(pending, "group")?;
                    let j = policy
                        .groups()
                        .position(&answer)
                        .ok_or_else(|| unknown(Axis::Group, &answer))?;
                    kernel.group = Some(answer);
                    kernel.group_ix = Some(j);
                    Ok(Some(0))
                }
                Action::IdentLevel => {
                    let answer = answered(pending, "level")?;
                    if answer == EXIT_ANSWER {
                        kernel.exit_requested = true;
                        return Ok(Some(0));
                    }
                    let max = self.entitlement(&kernel, policy)?;
                    kernel.level = if answer == MAX_LEVEL_ANSWER {
                        SecurityLevel::new(max)
                    } else {
                        let value: u8 = answer.parse().map_err(|_| ChoiceError::Malformed {
                            question: "level",
                            answer: answer.clone(),
                        })?;
                        if value == 0 {
                            return Err(ChoiceError::Malformed {
                                question: "level",
                                answer,
                            }
                            .into());
                        }
                        if value > max {
                            return Err(ChoiceError::AboveEntitlement { answer: value, max }.into());
                        }
                        SecurityLevel::new(value)
                    };
                    Ok(Some(0))
                }
                Action::ListResources => {
                    let i = identified(&kernel)?;
                    self.offered_resources = match (kernel.group_ix, kernel.level) {
                        (Some(j), Some(level)) => policy.list_resources(i, j, Some(level))?,
                        _ => Vec::new(),
                    };
                    Ok(Some(0))
                }
                Action::SelectResource => {
                    let answer = answered(pending, "resource")?;
                    if answer == EXIT_ANSWER {
                        return Ok(Some(1));
                    }
                    let k = policy
                        .resources()
                        .position(&answer)
                        .ok_or_else(|| unknown(Axis::Resource, &answer))?;
                    if self.offered_resources.contains(&k) {
                        kernel.resource = Some(answer);
                        Ok(Some(0))
                    } else {
                        kernel.outcome = Outcome::Denied;
                        emit(env, &kernel, &label, AuditOutcome::Denied, &answer)?;
                        Ok(Some(1))
                    }
                }
                Action::UseResource => {
                    kernel.outcome = Outcome::Used;
                    Ok(Some(0))
                }
                Action::LogFile => {
                    let resource = kernel.resource.clone().unwrap_or_default();
                    emit(env, &kernel, &label, AuditOutcome::Used, &resource)?;
                    Ok(Some(0))
                }
                Action::Quit => {
                    if kernel.outcome == Outcome::Pending {
                        kernel.outcome = Outcome::Quit;
                        emit(env, &kernel, &label, AuditOutcome::Quit, "")?;
                    }
                    Ok(None)
                }
            }
        })();
        self.kernel = Some(kernel);
        result
    }
}

fn name(n: Option<&str>) -> String {
    n.unwrap_or_default().to_string()
}

fn identified(kernel: &Kernel) -> Result<usize, NetError> {
    kernel
        .user_ix
        .ok_or_else(|| NetError::Structural("unidentified kernel past CheckAuthorities".into()))
}

fn answered(pending: Option<String>, question: &'static str) -> Result<String, NetError> {
    pending.ok_or_else(|| {
        NetError::Structural(format!("{question} transition fired without an answer"))
    })
}

fn emit(
    env: &mut Environment<'_>,
    kernel: &Kernel,
    transition: &str,
    outcome: AuditOutcome,
    resource: &str,
) -> Result<u64, NetError> {
    let record = AuditRecord {
        model: env.policy.model(),
        ts: env.clock.now(),
        session: kernel.session.clone(),
        transition: transition.to_string(),
        user: kernel.user.clone(),
        group: kernel.group.clone().unwrap_or_default(),
        level: kernel.level.map_or(0, SecurityLevel::get),
        resource: resource.to_string(),
        outcome,
    };
    Ok(env.audit.append(record)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{FixedClock, MemoryAudit};
    use crate::net::{build_engl_net, build_enlg_net, ScriptedChoices};
    use crate::policy::{EnglPolicy, EnlgPolicy};

    fn engl() -> Policy {
        EnglPolicy::numbered(
            3,
            vec![vec![3, 0], vec![2, 1]],
            vec![vec![2, 0], vec![0, 1]],
        )
        .unwrap()
        .into()
    }

    fn enlg() -> Policy {
        EnlgPolicy::numbered(
            3,
            2,
            vec![3, 2],
            vec![2],
            &[(1, 1, 1), (1, 2, 1), (2, 2, 1)],
            &[(1, 2, 1)],
        )
        .unwrap()
        .into()
    }

    fn simulate(
        net: &ENet,
        policy: &Policy,
        user: &str,
        script: &str,
    ) -> (Result<Trace, NetError>, Vec<AuditRecord>) {
        let mut session = Session::new(net);
        session.inject(user, "s1").unwrap();
        let mut choices = ScriptedChoices::parse(script);
        let mut audit = MemoryAudit::new();
        let clock = FixedClock::epoch();
        let mut env = Environment {
            policy,
            choices: &mut choices,
            audit: &mut audit,
            clock: &clock,
        };
        let trace = session.run(&mut env);
        (trace, audit.into_records())
    }

    #[test]
    fn engl_happy_path() {
        let net = build_engl_net();
        let (trace, audit) = simulate(&net, &engl(), "u1", "g1,2,r1");
        let trace = trace.unwrap();
        assert_eq!(
            trace.names(),
            ["t1", "t2", "t3", "t5", "t6", "t7", "t8", "t9", "t10", "t11"]
        );
        let k = trace.kernel().unwrap();
        assert_eq!(k.outcome, Outcome::Used);
        assert_eq!(k.level, SecurityLevel::new(2));
        assert_eq!(k.resource.as_deref(), Some("r1"));
        assert_eq!(audit.len(), 1);
        assert_eq!(audit[0].outcome, AuditOutcome::Used);
        assert_eq!(audit[0].transition, "t10:LogFile");
        assert_eq!(audit[0].level, 2);
    }

    #[test]
    fn unknown_user_denied_at_check() {
        let net = build_engl_net();
        let (trace, audit) = simulate(&net, &engl(), "eve", "");
        let trace = trace.unwrap();
        assert_eq!(trace.names(), ["t1", "t2", "t11"]);
        assert_eq!(trace.firings[1].to, "b9");
        assert_eq!(trace.kernel().unwrap().outcome, Outcome::Denied);
        assert_eq!(trace.kernel().unwrap().auth, AuthStatus::Denied);
        assert_eq!(audit.len(), 1);
        assert_eq!(audit[0].outcome, AuditOutcome::Denied);
        assert_eq!(audit[0].transition, "t2:CheckAuthorities");
    }

    #[test]
    fn inaccessible_resource_routes_to_b9() {
        let net = build_engl_net();
        let (trace, audit) = simulate(&net, &engl(), "u1", "g1,*,r2");
        let trace = trace.unwrap();
        let t8 = &trace.firings[6];
        assert_eq!((t8.transition, t8.from, t8.to), ("t8", "b6", "b9"));
        assert!(!trace.fired("t9"));
        assert_eq!(trace.kernel().unwrap().outcome, Outcome::Denied);
        assert_eq!(trace.kernel().unwrap().resource, None);
        assert_eq!(audit.len(), 1);
        assert_eq!(audit[0].resource, "r2");
        assert_eq!(audit[0].outcome, AuditOutcome::Denied);
    }

    #[test]
    fn early_quit_fires_t4() {
        let net = build_engl_net();
        let (trace, audit) = simulate(&net, &engl(), "u2", "-");
        let trace = trace.unwrap();
        assert_eq!(trace.names(), ["t1", "t2", "t3", "t4"]);
        assert_eq!(trace.kernel().unwrap().outcome, Outcome::Quit);
        assert_eq!(audit[0].outcome, AuditOutcome::Quit);
        assert_eq!(audit[0].transition, "t4:Quit");
    }

    #[test]
    fn resource_exit_quits_via_t11() {
        let net = build_engl_net();
        let (trace, audit) = simulate(&net, &engl(), "u2", "g2,*,-");
        let trace = trace.unwrap();
        assert_eq!(
            trace.names(),
            ["t1", "t2", "t3", "t5", "t6", "t7", "t8", "t11"]
        );
        assert_eq!(trace.kernel().unwrap().outcome, Outcome::Quit);
        assert_eq!(audit.len(), 1);
        assert_eq!(audit[0].transition, "t11:Quit");
    }

    #[test]
    fn non_member_group_is_denied_at_t8() {
        let net = build_engl_net();
        let (trace, audit) = simulate(&net, &engl(), "u1", "g2,*,r2");
        let trace = trace.unwrap();
        assert!(!trace.fired("t9"));
        assert_eq!(trace.kernel().unwrap().level, None);
        assert_eq!(audit[0].outcome, AuditOutcome::Denied);
    }

    #[test]
    fn choice_errors() {
        let net = build_engl_net();
        let (r, _) = simulate(&net, &engl(), "u1", "g1,2");
        assert!(matches!(
            r,
            Err(NetError::Choice(ChoiceError::Underrun {
                question: "resource"
            }))
        ));
        let (r, _) = simulate(&net, &engl(), "u1", "g9,2,r1");
        assert!(matches!(
            r,
            Err(NetError::Choice(ChoiceError::UnknownName {
                axis: Axis::Group,
                ..
            }))
        ));
        let (r, _) = simulate(&net, &engl(), "u1", "g1,4,r1");
        assert!(matches!(
            r,
            Err(NetError::Choice(ChoiceError::AboveEntitlement {
                answer: 4,
                max: 3
            }))
        ));
        let (r, _) = simulate(&net, &engl(), "u1", "g1,x,r1");
        assert!(matches!(
            r,
            Err(NetError::Choice(ChoiceError::Malformed { .. }))
        ));
        let (r, _) = simulate(&net, &engl(), "u1", "g1,-,r1");
        assert!(matches!(
            r,
            Err(NetError::Choice(ChoiceError::ExitNotAllowed {
                question: "level"
            }))
        ));
        let (r, _) = simulate(&net, &engl(), "u1", "g1,*,zz");
        assert!(matches!(
            r,
            Err(NetError::Choice(ChoiceError::UnknownName {
                axis: Axis::Resource,
                ..
            }))
        ));
    }

    #[test]
    fn enlg_happy_path_orders_level_first() {
        let net = build_enlg_net();
        let (trace, audit) = simulate(&net, &enlg(), "u2", "*,g1,r1");
        let trace = trace.unwrap();
        assert_eq!(
            trace.actions(),
            [
                Action::Ident,
                Action::CheckAuthorities,
                Action::IdentLevel,
                Action::ListGroups,
                Action::SelectGroup,
                Action::ListResources,
                Action::SelectResource,
                Action::UseResource,
                Action::LogFile,
                Action::Quit,
            ]
        );
        assert_eq!(audit[0].level, 2);
        assert_eq!(audit[0].group, "g1");
    }

    #[test]
    fn enlg_low_level_sees_no_resource() {
        let net = build_enlg_net();
        let (trace, audit) = simulate(&net, &enlg(), "u1", "1,g1,r1");
        assert!(!trace.unwrap().fired("t9"));
        assert_eq!(audit[0].outcome, AuditOutcome::Denied);
        assert_eq!(audit[0].level, 1);
    }

    #[test]
    fn enlg_exit_at_level_prompt() {
        let net = build_enlg_net();
        let (trace, _) = simulate(&net, &enlg(), "u1", "-");
        let trace = trace.unwrap();
        assert_eq!(trace.names(), ["t1", "t2", "t3", "t4"]);
        assert!(trace.kernel().unwrap().exit_requested);
        let (r, _) = simulate(&net, &enlg(), "u1", "*,-");
        assert!(matches!(
            r,
            Err(NetError::Choice(ChoiceError::ExitNotAllowed {
                question: "group"
            }))
        ));
    }

    #[test]
    fn inject_busy_and_initial_kernel() {
        let net = build_engl_net();
        let mut s = Session::new(&net);
        s.inject("u1", "s").unwrap();
        let bp1 = net.entry().0;
        assert_eq!(s.marking().iter().map(|&c| c as usize).sum::<usize>(), 1);
        assert_eq!(s.marking()[bp1], 1);
        let k = s.kernel().unwrap();
        assert_eq!(k.outcome, Outcome::Pending);
        assert_eq!(
            (k.group.as_ref(), k.level, k.resource.as_ref()),
            (None, None, None)
        );
        assert!(matches!(s.inject("u2", "t"), Err(NetError::Busy("bp1"))));
    }

    #[test]
    fn step_without_inject_is_inactive() {
        let net = build_engl_net();
        let mut s = Session::new(&net);
        let policy = engl();
        let mut choices = ScriptedChoices::default();
        let mut audit = MemoryAudit::new();
        let clock = FixedClock::epoch();
        let mut env = Environment {
            policy: &policy,
            choices: &mut choices,
            audit: &mut audit,
            clock: &clock,
        };
        assert!(matches!(s.step(&mut env), Err(NetError::Inactive)));
    }

    #[test]
    fn model_mismatch() {
        let net = build_enlg_net();
        let (r, _) = simulate(&net, &engl(), "u1", "");
        assert!(matches!(r, Err(NetError::ModelMismatch { .. })));
    }

    #[test]
    fn session_reusable_after_completion() {
        let net = build_engl_net();
        let policy = engl();
        let mut s = Session::new(&net);
        let clock = FixedClock::epoch();
        let mut audit = MemoryAudit::new();
        for _ in 0..2 {
            s.inject("u1", "s").unwrap();
            let mut choices = ScriptedChoices::parse("g1,*,r1");
            let mut env = Environment {
                policy: &policy,
                choices: &mut choices,
                audit: &mut audit,
                clock: &clock,
            };
            assert_eq!(s.run(&mut env).unwrap().len(), 10);
            assert!(!s.is_active());
        }
        assert_eq!(audit.records().len(), 2);
    }

    #[test]
    fn trace_render_format() {
        let net = build_engl_net();
        let (trace, _) = simulate(&net, &engl(), "u1", "g1,2,r1");
        let text = trace.unwrap().render();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 10);
        assert_eq!(lines[0], "1\tt1:Ident\tbp1\tb1\tpending");
        assert_eq!(lines[7], "8\tt9:UseResource\tb7\tb8\tused");
        assert_eq!(lines[9], "10\tt11:Quit\tb9\tend\tused");
    }
}
