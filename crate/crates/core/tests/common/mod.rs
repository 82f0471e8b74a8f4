//! Test-side reference model: random policies generated together with their
//! raw tables, and predicates evaluated straight from those tables.

#![allow(dead_code)]

use std::collections::BTreeSet;

use enetacl::audit::{AuditRecord, FixedClock, MemoryAudit};
use enetacl::net::{build_net, Environment, NetError, ScriptedChoices, Session, Trace};
use enetacl::policy::{EnglPolicy, EnlgPolicy, Policy};
use rand::Rng;

/// Raw group-first tables, 0-based.
#[derive(Debug, Clone)]
pub struct RawEngl {
    pub q: u8,
    pub lug: Vec<Vec<u8>>,
    pub lrg: Vec<Vec<u8>>,
}

impl RawEngl {
    pub fn policy(&self) -> EnglPolicy {
        EnglPolicy::numbered(self.q, self.lug.clone(), self.lrg.clone()).unwrap()
    }

    pub fn n(&self) -> usize {
        self.lug.len()
    }

    pub fn m(&self) -> usize {
        self.lug[0].len()
    }

    pub fn p(&self) -> usize {
        self.lrg.len()
    }

    /// Interaction of the listed users (1-based) by resource `k` in group `j`:
    /// everyone is a member, the resource is a member, and the smallest user
    /// level reaches the resource level.
    pub fn grants(&self, users: &[usize], k: usize, j: usize) -> bool {
        let r = self.lrg[k - 1][j - 1];
        let levels: Vec<u8> = users.iter().map(|&i| self.lug[i - 1][j - 1]).collect();
        r != 0 && levels.iter().all(|&l| l != 0) && *levels.iter().min().unwrap() >= r
    }
}

/// Raw level-first tables; triples are 1-based `(entity, level, group)`.
#[derive(Debug, Clone)]
pub struct RawEnlg {
    pub q: u8,
    pub m: usize,
    pub lu: Vec<u8>,
    pub lr: Vec<u8>,
    pub ulg: BTreeSet<(usize, u8, usize)>,
    pub rlg: BTreeSet<(usize, u8, usize)>,
}

impl RawEnlg {
    pub fn policy(&self) -> EnlgPolicy {
        let ulg: Vec<_> = self.ulg.iter().copied().collect();
        let rlg: Vec<_> = self.rlg.iter().copied().collect();
        EnlgPolicy::numbered(self.q, self.m, self.lu.clone(), self.lr.clone(), &ulg, &rlg).unwrap()
    }

    pub fn n(&self) -> usize {
        self.lu.len()
    }

    pub fn p(&self) -> usize {
        self.lr.len()
    }

    /// All `(group, level)` pairs satisfying both interaction conditions,
    /// sorted by group then level. `group` restricts the scan.
    pub fn witnesses(
        &self,
        i0: usize,
        i1: usize,
        k: usize,
        group: Option<usize>,
    ) -> Vec<(usize, u8)> {
        let lr = self.lr[k - 1];
        if self.lu[i0 - 1].min(self.lu[i1 - 1]) < lr {
            return Vec::new();
        }
        let mut out = Vec::new();
        for j in 1..=self.m {
            if group.is_some_and(|g| g != j) {
                continue;
            }
            for l in 1..=lr {
                if self.ulg.contains(&(i0, l, j))
                    && self.ulg.contains(&(i1, l, j))
                    && self.rlg.contains(&(k, l, j))
                {
                    out.push((j, l));
                }
            }
        }
        out
    }
}

pub fn random_engl<R: Rng>(rng: &mut R, n: usize, m: usize, p: usize, q: u8) -> RawEngl {
    // Bias towards zeros so memberships are not saturated.
    let entry = |rng: &mut R| {
        if rng.gen_bool(0.35) {
            0
        } else {
            rng.gen_range(1..=q)
        }
    };
    let lug = (0..n)
        .map(|_| (0..m).map(|_| entry(rng)).collect())
        .collect();
    let lrg = (0..p)
        .map(|_| (0..m).map(|_| entry(rng)).collect())
        .collect();
    RawEngl { q, lug, lrg }
}

pub fn random_engl_dims<R: Rng>(rng: &mut R, max_dim: usize, max_q: u8) -> RawEngl {
    let (n, m, p) = (
        rng.gen_range(1..=max_dim),
        rng.gen_range(1..=max_dim),
        rng.gen_range(1..=max_dim),
    );
    let q = rng.gen_range(1..=max_q);
    random_engl(rng, n, m, p, q)
}

pub fn random_enlg<R: Rng>(rng: &mut R, n: usize, m: usize, p: usize, q: u8) -> RawEnlg {
    let lu: Vec<u8> = (0..n).map(|_| rng.gen_range(1..=q)).collect();
    let lr: Vec<u8> = (0..p).map(|_| rng.gen_range(1..=q)).collect();
    let density = rng.gen_range(0.2..0.8);
    let cube = |rng: &mut R, maxima: &[u8]| {
        let mut set = BTreeSet::new();
        for (e, &max) in maxima.iter().enumerate() {
            for l in 1..=max {
                for j in 1..=m {
                    if rng.gen_bool(density) {
                        set.insert((e + 1, l, j));
                    }
                }
            }
        }
        set
    };
    let ulg = cube(rng, &lu);
    let rlg = cube(rng, &lr);
    RawEnlg {
        q,
        m,
        lu,
        lr,
        ulg,
        rlg,
    }
}

pub fn random_enlg_dims<R: Rng>(rng: &mut R, max_dim: usize, max_q: u8) -> RawEnlg {
    let (n, m, p) = (
        rng.gen_range(1..=max_dim),
        rng.gen_range(1..=max_dim),
        rng.gen_range(1..=max_dim),
    );
    let q = rng.gen_range(1..=max_q);
    random_enlg(rng, n, m, p, q)
}

pub struct Run {
    pub result: Result<Trace, NetError>,
    pub records: Vec<AuditRecord>,
    /// Marking after injection and after every firing.
    pub markings: Vec<Vec<u8>>,
}

/// Steps one scripted session to completion with a fixed clock, recording
/// the marking at every step.
pub fn run_session(policy: &Policy, user: &str, session_id: &str, script: ScriptedChoices) -> Run {
    let net = build_net(policy.model());
    let mut session = Session::new(&net);
    session.inject(user, session_id).unwrap();
    let mut markings = vec![session.marking().to_vec()];
    let mut choices = script;
    let mut audit = MemoryAudit::new();
    let clock = FixedClock::epoch();
    let mut env = Environment {
        policy,
        choices: &mut choices,
        audit: &mut audit,
        clock: &clock,
    };
    let result = loop {
        match session.step(&mut env) {
            Ok(enetacl::net::Step::Fired(_)) => markings.push(session.marking().to_vec()),
            Ok(enetacl::net::Step::Complete) => break Ok(session.trace().clone()),
            Err(e) => break Err(e),
        }
    };
    Run {
        result,
        records: audit.into_records(),
        markings,
    }
}

/// At most one kernel anywhere, never two in a place.
pub fn marking_is_safe(marking: &[u8]) -> bool {
    marking.iter().all(|&c| c <= 1) && marking.iter().map(|&c| c as usize).sum::<usize>() <= 1
}

pub mod strategies {
    use super::*;
    use proptest::collection::vec;
    use proptest::prelude::*;

    pub fn engl(max_dim: usize, max_q: u8) -> impl Strategy<Value = RawEngl> {
        (1..=max_dim, 1..=max_dim, 1..=max_dim, 1..=max_q).prop_flat_map(|(n, m, p, q)| {
            (vec(vec(0..=q, m), n), vec(vec(0..=q, m), p)).prop_map(move |(lug, lrg)| RawEngl {
                q,
                lug,
                lrg,
            })
        })
    }

    fn cube(maxima: &[u8], q: u8, m: usize, bits: &[bool]) -> BTreeSet<(usize, u8, usize)> {
        let mut set = BTreeSet::new();
        for (e, &max) in maxima.iter().enumerate() {
            for l in 1..=max {
                for j in 1..=m {
                    if bits[(e * q as usize + (l as usize - 1)) * m + (j - 1)] {
                        set.insert((e + 1, l, j));
                    }
                }
            }
        }
        set
    }

    pub fn enlg(max_dim: usize, max_q: u8) -> impl Strategy<Value = RawEnlg> {
        (1..=max_dim, 1..=max_dim, 1..=max_dim, 1..=max_q).prop_flat_map(|(n, m, p, q)| {
            let cells = q as usize * m;
            (
                vec(1..=q, n),
                vec(1..=q, p),
                vec(any::<bool>(), n * cells),
                vec(any::<bool>(), p * cells),
            )
                .prop_map(move |(lu, lr, ub, rb)| {
                    let ulg = cube(&lu, q, m, &ub);
                    let rlg = cube(&lr, q, m, &rb);
                    RawEnlg {
                        q,
                        m,
                        lu,
                        lr,
                        ulg,
                        rlg,
                    }
                })
        })
    }
}
