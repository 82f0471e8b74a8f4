//! Brute-force cross-checks of the access predicates and session nets.
//!
//! The reference evaluation here quantifies over levels directly
//! ("some level `l` is the resource's level and every user reaches `l`")
//! instead of comparing matrix entries, so it shares no code path with the
//! predicates it checks.

use std::fmt;

use crate::audit::{AuditOutcome, FixedClock, MemoryAudit};
use crate::net::{
    build_net, Action, Environment, NetError, ScriptedChoices, Session, MAX_LEVEL_ANSWER,
};
use crate::policy::{AccessWitness, EnglPolicy, EnlgPolicy, Policy, SecurityLevel};

/// Running tally of a verification pass.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    pub policies: u64,
    pub checks: u64,
    pub sessions: u64,
    pub discrepancies: u64,
    /// First failing case, described.
    pub first: Option<String>,
}

impl Report {
    pub fn is_clean(&self) -> bool {
        self.discrepancies == 0
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.discrepancies += 1;
            if self.first.is_none() {
                self.first = Some(describe());
            }
        }
    }

    pub fn merge(&mut self, other: Report) {
        self.policies += other.policies;
        self.checks += other.checks;
        self.sessions += other.sessions;
        self.discrepancies += other.discrepancies;
        if self.first.is_none() {
            self.first = other.first;
        }
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "policies\t{}", self.policies)?;
        writeln!(f, "checks\t{}", self.checks)?;
        writeln!(f, "sessions\t{}", self.sessions)?;
        writeln!(f, "discrepancies\t{}", self.discrepancies)?;
        if let Some(first) = &self.first {
            writeln!(f, "first\t{first}")?;
        }
        Ok(())
    }
}

/// Reference evaluation for group-first policies.
pub mod oracle {
    use super::*;

    fn entry(value: Result<u8, crate::policy::PolicyError>) -> u8 {
        value.expect("oracle indices come from the policy's own ranges")
    }

    /// Some level `l` in `1..=q` is the resource's level in `j`, and each
    /// listed user reaches `l` in `j`.
    pub fn engl_grants(p: &EnglPolicy, users: &[usize], k: usize, j: usize) -> bool {
        (1..=p.levels()).any(|l| {
            entry(p.resource_level(k, j)) == l
                && users.iter().all(|&i| entry(p.user_level(i, j)) >= l)
        })
    }

    /// Every `(group, level)` pair satisfying the level-first interaction
    /// condition, optionally restricted to one group, in (group, level) order.
    pub fn enlg_witnesses(
        p: &EnlgPolicy,
        i0: usize,
        i1: usize,
        k: usize,
        group: Option<usize>,
    ) -> Vec<AccessWitness> {
        let lu0 = p.user_max(i0).expect("in range").get();
        let lu1 = p.user_max(i1).expect("in range").get();
        let lr = p.resource_max(k).expect("in range").get();
        let mut out = Vec::new();
        if lu0.min(lu1) < lr {
            return out;
        }
        for j in 1..=p.groups().len() {
            if group.is_some_and(|g| g != j) {
                continue;
            }
            for l in 1..=p.levels() {
                let holds = l <= lr
                    && p.user_in(i0, l, j).expect("in range")
                    && p.user_in(i1, l, j).expect("in range")
                    && p.resource_in(k, l, j).expect("in range");
                if holds {
                    out.push(AccessWitness {
                        level: SecurityLevel::new(l).expect("l >= 1"),
                        group: j,
                    });
                }
            }
        }
        out
    }
}

type EnglAccess<'a> = &'a dyn Fn(&EnglPolicy, usize, usize, usize) -> bool;
type EnglInteract<'a> = &'a dyn Fn(&EnglPolicy, usize, usize, usize, usize) -> bool;

/// The group-first predicates under test; swappable for fault injection.
#[derive(Clone, Copy)]
pub struct EnglPredicates<'a> {
    pub access: EnglAccess<'a>,
    pub interact: EnglInteract<'a>,
}

fn real_access(p: &EnglPolicy, i: usize, k: usize, j: usize) -> bool {
    p.can_access(i, k, j).expect("in range")
}

fn real_interact(p: &EnglPolicy, i0: usize, i1: usize, k: usize, j: usize) -> bool {
    p.can_interact(i0, i1, k, j).expect("in range")
}

impl Default for EnglPredicates<'static> {
    fn default() -> Self {
        EnglPredicates {
            access: &real_access,
            interact: &real_interact,
        }
    }
}

/// Compares the group-first predicates with the oracle on every tuple.
pub fn check_engl_predicates(p: &EnglPolicy, preds: EnglPredicates<'_>, report: &mut Report) {
    let (n, m, r) = (p.users().len(), p.groups().len(), p.resources().len());
    for j in 1..=m {
        for k in 1..=r {
            for i0 in 1..=n {
                let expected = oracle::engl_grants(p, &[i0], k, j);
                report.check((preds.access)(p, i0, k, j) == expected, || {
                    format!("access(u{i0}, r{k}, g{j}) disagrees with oracle {expected}")
                });
                for i1 in 1..=n {
                    let expected = oracle::engl_grants(p, &[i0, i1], k, j);
                    report.check((preds.interact)(p, i0, i1, k, j) == expected, || {
                        format!(
                            "interact(u{i0}, u{i1}, r{k}, g{j}) disagrees with oracle {expected}"
                        )
                    });
                }
            }
        }
    }
}

/// Compares the level-first predicates with full quantifier expansion:
/// presence must agree and the returned witness must be the smallest
/// (group, level) pair that satisfies the condition.
pub fn check_enlg_predicates(p: &EnlgPolicy, report: &mut Report) {
    let (n, r) = (p.users().len(), p.resources().len());
    for k in 1..=r {
        for i0 in 1..=n {
            for i1 in 1..=n {
                let all = oracle::enlg_witnesses(p, i0, i1, k, None);
                let got = p.can_interact(i0, i1, k).expect("in range");
                report.check(got == all.first().copied(), || {
                    format!(
                        "interact(u{i0}, u{i1}, r{k}) = {got:?}, oracle {:?}",
                        all.first()
                    )
                });
                if i0 == i1 {
                    let got = p.can_access(i0, k).expect("in range");
                    report.check(got == all.first().copied(), || {
                        format!("access(u{i0}, r{k}) = {got:?}, oracle {:?}", all.first())
                    });
                }
                for j in 1..=p.groups().len() {
                    let scoped = oracle::enlg_witnesses(p, i0, i1, k, Some(j));
                    let got = p.witness(i0, i1, k, Some(j), None).expect("in range");
                    report.check(got == scoped.first().copied(), || {
                        format!(
                            "witness(u{i0}, u{i1}, r{k}, g{j}) = {got:?}, oracle {:?}",
                            scoped.first()
                        )
                    });
                }
            }
        }
    }
}

/// Whether the oracle grants user `i` resource `k` through group `j`.
pub fn oracle_grants(policy: &Policy, i: usize, k: usize, j: usize) -> bool {
    match policy {
        Policy::Engl(p) => oracle::engl_grants(p, &[i], k, j),
        Policy::Enlg(p) => !oracle::enlg_witnesses(p, i, i, k, Some(j)).is_empty(),
    }
}

/// Script that selects group `group` at full entitlement and asks for
/// `resource`, in the answer order the model's net expects.
pub fn full_entitlement_script(policy: &Policy, group: &str, resource: &str) -> ScriptedChoices {
    match policy {
        Policy::Engl(_) => ScriptedChoices::new([group, MAX_LEVEL_ANSWER, resource]),
        Policy::Enlg(_) => ScriptedChoices::new([MAX_LEVEL_ANSWER, group, resource]),
    }
}

/// Runs one scripted session per (user, group, resource) and checks that
/// `UseResource` fires exactly when the oracle grants, that every session
/// leaves exactly one terminal audit record, and that each `UseResource`
/// firing is matched by one "used" record.
pub fn check_sessions(policy: &Policy, report: &mut Report) -> Result<(), NetError> {
    let net = build_net(policy.model());
    let clock = FixedClock::epoch();
    for (i, user) in policy.users().iter() {
        for (j, group) in policy.groups().iter() {
            for (k, resource) in policy.resources().iter() {
                let mut session = Session::new(&net);
                let id = format!("{user}/{group}/{resource}");
                session.inject(user, &id)?;
                let mut choices = full_entitlement_script(policy, group, resource);
                let mut audit = MemoryAudit::new();
                let mut env = Environment {
                    policy,
                    choices: &mut choices,
                    audit: &mut audit,
                    clock: &clock,
                };
                let trace = session.run(&mut env)?;
                report.sessions += 1;

                let expected = oracle_grants(policy, i, k, j);
                let used = trace
                    .actions()
                    .iter()
                    .filter(|&&a| a == Action::UseResource)
                    .count();
                report.check((used == 1) == expected && used <= 1, || {
                    format!(
                        "session {id}: UseResource fired {used} times, oracle grants {expected}"
                    )
                });
                let records = audit.records();
                let used_records = records
                    .iter()
                    .filter(|r| r.outcome == AuditOutcome::Used)
                    .count();
                report.check(records.len() == 1 && used_records == used, || {
                    format!(
                        "session {id}: {} audit records, {used_records} used",
                        records.len()
                    )
                });
                let ends_in_quit = trace
                    .last()
                    .is_some_and(|f| f.action == Action::Quit && f.to == "end");
                report.check(ends_in_quit, || {
                    format!("session {id}: trace does not end in Quit")
                });
            }
        }
    }
    Ok(())
}

/// Oracle agreement plus session/predicate agreement for one policy.
pub fn verify_policy(policy: &Policy) -> Result<Report, NetError> {
    let mut report = Report {
        policies: 1,
        ..Report::default()
    };
    match policy {
        Policy::Engl(p) => check_engl_predicates(p, EnglPredicates::default(), &mut report),
        Policy::Enlg(p) => check_enlg_predicates(p, &mut report),
    }
    check_sessions(policy, &mut report)?;
    Ok(report)
}

/// Algebraic laws of the group-first predicates on one policy: symmetry,
/// self-collapse, interaction as pairwise access, deny-by-default.
pub fn check_engl_laws(p: &EnglPolicy, preds: EnglPredicates<'_>, report: &mut Report) {
    let (n, m, r) = (p.users().len(), p.groups().len(), p.resources().len());
    for j in 1..=m {
        for k in 1..=r {
            let lrg = p.resource_level(k, j).expect("in range");
            for i0 in 1..=n {
                let a0 = (preds.access)(p, i0, k, j);
                report.check((preds.interact)(p, i0, i0, k, j) == a0, || {
                    format!("interact(u{i0}, u{i0}, r{k}, g{j}) differs from access")
                });
                let lug = p.user_level(i0, j).expect("in range");
                report.check(!(lug == 0 || lrg == 0) || !a0, || {
                    format!("access(u{i0}, r{k}, g{j}) granted on a zero entry")
                });
                for i1 in 1..=n {
                    let x = (preds.interact)(p, i0, i1, k, j);
                    report.check(x == (preds.interact)(p, i1, i0, k, j), || {
                        format!("interact(u{i0}, u{i1}, r{k}, g{j}) is not symmetric")
                    });
                    report.check(x == (a0 && (preds.access)(p, i1, k, j)), || {
                        format!("interact(u{i0}, u{i1}, r{k}, g{j}) differs from pairwise access")
                    });
                }
            }
        }
    }
}

fn truth_table(p: &EnglPolicy, preds: EnglPredicates<'_>) -> Vec<bool> {
    let (n, m, r) = (p.users().len(), p.groups().len(), p.resources().len());
    let mut out = Vec::new();
    for j in 1..=m {
        for k in 1..=r {
            for i0 in 1..=n {
                out.push((preds.access)(p, i0, k, j));
                for i1 in 1..=n {
                    out.push((preds.interact)(p, i0, i1, k, j));
                }
            }
        }
    }
    out
}

/// Raising one `Lug` entry never revokes a grant; lowering never adds one.
pub fn check_engl_monotonicity(p: &EnglPolicy, preds: EnglPredicates<'_>, report: &mut Report) {
    let base = truth_table(p, preds);
    for i in 1..=p.users().len() {
        for j in 1..=p.groups().len() {
            let v = p.user_level(i, j).expect("in range");
            if v < p.levels() {
                let up = truth_table(&p.with_user_level(i, j, v + 1).expect("in range"), preds);
                report.check(base.iter().zip(&up).all(|(&b, &u)| !b || u), || {
                    format!("raising Lug(u{i}, g{j}) to {} revoked a grant", v + 1)
                });
            }
            if v > 0 {
                let down = truth_table(&p.with_user_level(i, j, v - 1).expect("in range"), preds);
                report.check(base.iter().zip(&down).all(|(&b, &d)| b || !d), || {
                    format!("lowering Lug(u{i}, g{j}) to {} added a grant", v - 1)
                });
            }
        }
    }
}

/// Every group-first policy with two users, groups, resources and levels:
/// 3^4 user matrices times 3^4 resource matrices.
pub fn exhaustive_small(preds: EnglPredicates<'_>) -> Report {
    const Q: u8 = 2;
    let mut report = Report::default();
    let matrices: Vec<Vec<Vec<u8>>> = (0..81u32)
        .map(|code| {
            let digit = |d: u32| (code / 3u32.pow(d) % 3) as u8;
            vec![vec![digit(0), digit(1)], vec![digit(2), digit(3)]]
        })
        .collect();
    for lug in &matrices {
        for lrg in &matrices {
            let p = EnglPolicy::numbered(Q, lug.clone(), lrg.clone()).expect("entries within q");
            report.policies += 1;
            check_engl_predicates(&p, preds, &mut report);
            check_engl_laws(&p, preds, &mut report);
            check_engl_monotonicity(&p, preds, &mut report);
        }
    }
    report
}
