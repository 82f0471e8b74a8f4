//! Command-line front end.
//!
//! Exit codes: 0 grant / success, 1 denial / quit / discrepancy,
//! 2 operational error.

use std::io::{BufRead, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::audit::{self, AuditError, AuditLog, AuditSink, Clock, MemoryAudit};
use crate::net::{
    build_net, ChoiceProvider, Environment, InteractiveChoices, NetError, Outcome, ScriptedChoices,
    Session, Step,
};
use crate::policy::{Axis, Model, Policy, PolicyError, SecurityLevel};
use crate::policy_io::{self, PolicyIoError};
use crate::verify::{self, EnglPredicates};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DENY: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "enetacl",
    version,
    about = "Group/level access policies and E-net session simulation"
)]
pub struct Cli {
    /// Policy file (JSON)
    #[arg(long, global = true)]
    pub policy: Option<PathBuf>,
    /// Expected model; must match the policy file's tag
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelArg>,
    /// Audit log path
    #[arg(long, global = true, env = "ENETACL_AUDIT")]
    pub audit: Option<PathBuf>,
    /// Session id (simulate) or session filter (audit)
    #[arg(long, global = true)]
    pub session: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelArg {
    Engl,
    Enlg,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Model {
        match m {
            ModelArg::Engl => Model::Engl,
            ModelArg::Enlg => Model::Enlg,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide access (or interaction, with --with) for a user and resource
    Check {
        user: String,
        resource: String,
        /// Group to evaluate in; required for engl, narrows the witness for enlg
        #[arg(long)]
        group: Option<String>,
        /// Second user: evaluate interaction instead of access
        #[arg(long = "with")]
        second_user: Option<String>,
    },
    /// List a user's groups, or the resources reachable in one group
    List {
        user: String,
        group: Option<String>,
        /// Level cap for the resource listing
        #[arg(long)]
        level: Option<u8>,
    },
    /// Run one user session through the model's net
    Simulate {
        user: String,
        /// Comma-separated answers, e.g. g1,*,r1
        #[arg(long, conflicts_with = "interactive")]
        script: Option<String>,
        /// Prompt for each decision on stderr, reading answers from stdin
        #[arg(long)]
        interactive: bool,
    },
    /// Cross-check predicates and sessions against brute-force enumeration
    Verify {
        /// Sweep every engl policy with two users, groups, resources and levels
        #[arg(long)]
        exhaustive_small: bool,
    },
    /// Replay an audit log
    Audit { log: Option<PathBuf> },
    /// Print a model's net structure
    Net,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("unknown {0} {1:?}")]
    UnknownName(Axis, String),
    #[error(transparent)]
    PolicyIo(#[from] PolicyIoError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub struct Io<'a> {
    pub stdin: &'a mut dyn BufRead,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, io: Io<'_>, clock: &dyn Clock) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(io.stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(io.stderr, "{e}");
                    EXIT_ERROR
                }
            };
        }
    };
    execute(cli, io, clock)
}

pub fn execute(cli: Cli, io: Io<'_>, clock: &dyn Clock) -> i32 {
    let Io {
        stdin,
        stdout,
        stderr,
    } = io;
    match dispatch(&cli, stdin, stdout, stderr, clock) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_ERROR
        }
    }
}

fn load_policy(cli: &Cli) -> Result<Policy, CliError> {
    let path = cli
        .policy
        .as_ref()
        .ok_or_else(|| CliError::Usage("--policy is required".into()))?;
    let policy = policy_io::load(path)?;
    if let Some(expected) = cli.model.map(Model::from) {
        if expected != policy.model() {
            return Err(CliError::Usage(format!(
                "--model {expected} does not match policy model {}",
                policy.model()
            )));
        }
    }
    Ok(policy)
}

fn lookup(policy: &Policy, axis: Axis, name: &str) -> Result<usize, CliError> {
    let catalog = match axis {
        Axis::User => policy.users(),
        Axis::Group => policy.groups(),
        _ => policy.resources(),
    };
    catalog
        .position(name)
        .ok_or_else(|| CliError::UnknownName(axis, name.to_string()))
}

fn dispatch(
    cli: &Cli,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
    clock: &dyn Clock,
) -> Result<i32, CliError> {
    match &cli.command {
        Command::Check {
            user,
            resource,
            group,
            second_user,
        } => {
            let policy = load_policy(cli)?;
            check(
                &policy,
                user,
                resource,
                group.as_deref(),
                second_user.as_deref(),
                stdout,
            )
        }
        Command::List { user, group, level } => {
            let policy = load_policy(cli)?;
            list(&policy, user, group.as_deref(), *level, stdout)
        }
        Command::Simulate {
            user,
            script,
            interactive,
        } => {
            let policy = load_policy(cli)?;
            let mut scripted;
            let mut prompted;
            let choices: &mut dyn ChoiceProvider = match (script, interactive) {
                (Some(s), false) => {
                    scripted = ScriptedChoices::parse(s);
                    &mut scripted
                }
                (None, true) => {
                    prompted = InteractiveChoices::new(stdin, &mut *stderr);
                    &mut prompted
                }
                _ => {
                    return Err(CliError::Usage(
                        "simulate needs --script or --interactive".into(),
                    ))
                }
            };
            let session_id = cli
                .session
                .clone()
                .unwrap_or_else(|| format!("s{}", clock.now().timestamp_millis()));
            let outcome = match &cli.audit {
                Some(path) => {
                    let mut log = AuditLog::open(path)?;
                    simulate(&policy, user, &session_id, choices, &mut log, clock, stdout)?
                }
                None => {
                    let mut sink = MemoryAudit::new();
                    simulate(
                        &policy,
                        user,
                        &session_id,
                        choices,
                        &mut sink,
                        clock,
                        stdout,
                    )?
                }
            };
            Ok(if outcome == Outcome::Used {
                EXIT_OK
            } else {
                EXIT_DENY
            })
        }
        Command::Verify { exhaustive_small } => {
            let report = if *exhaustive_small {
                verify::exhaustive_small(EnglPredicates::default())
            } else {
                verify::verify_policy(&load_policy(cli)?)?
            };
            write!(stdout, "{report}")?;
            Ok(if report.is_clean() {
                EXIT_OK
            } else {
                EXIT_DENY
            })
        }
        Command::Audit { log } => {
            let path = log
                .as_ref()
                .or(cli.audit.as_ref())
                .ok_or_else(|| CliError::Usage("audit log path required".into()))?;
            for record in audit::replay_file(path)? {
                if cli.session.as_ref().is_none_or(|s| *s == record.session) {
                    writeln!(stdout, "{}", record.to_line())?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Net => {
            let model = match (cli.model, &cli.policy) {
                (Some(m), _) => m.into(),
                (None, Some(_)) => load_policy(cli)?.model(),
                (None, None) => {
                    return Err(CliError::Usage("--model or --policy is required".into()))
                }
            };
            write!(stdout, "{}", build_net(model))?;
            Ok(EXIT_OK)
        }
    }
}

fn check(
    policy: &Policy,
    user: &str,
    resource: &str,
    group: Option<&str>,
    second_user: Option<&str>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let i0 = lookup(policy, Axis::User, user)?;
    let i1 = match second_user {
        Some(u) => lookup(policy, Axis::User, u)?,
        None => i0,
    };
    let k = lookup(policy, Axis::Resource, resource)?;
    let j = group.map(|g| lookup(policy, Axis::Group, g)).transpose()?;
    let allowed = match policy {
        Policy::Engl(p) => {
            let j =
                j.ok_or_else(|| CliError::Usage("--group is required for engl policies".into()))?;
            if p.can_interact(i0, i1, k, j)? {
                writeln!(out, "ALLOW")?;
                true
            } else {
                false
            }
        }
        Policy::Enlg(p) => match p.witness(i0, i1, k, j, None)? {
            Some(w) => {
                let g = policy.groups().name(w.group).unwrap_or_default();
                writeln!(out, "ALLOW level={} group={g}", w.level)?;
                true
            }
            None => false,
        },
    };
    if allowed {
        Ok(EXIT_OK)
    } else {
        writeln!(out, "DENY")?;
        Ok(EXIT_DENY)
    }
}

fn list(
    policy: &Policy,
    user: &str,
    group: Option<&str>,
    level: Option<u8>,
    out: &mut dyn Write,
) -> Result<i32, CliError> {
    let i = lookup(policy, Axis::User, user)?;
    match group {
        None => {
            if level.is_some() {
                return Err(CliError::Usage(
                    "--level applies to resource listings".into(),
                ));
            }
            for (j, l) in policy.list_groups(i)? {
                writeln!(out, "{}\t{l}", policy.groups().name(j).unwrap_or_default())?;
            }
        }
        Some(g) => {
            let j = lookup(policy, Axis::Group, g)?;
            let cap = level
                .map(|l| SecurityLevel::new(l).ok_or(PolicyError::ZeroLevel))
                .transpose()?;
            for k in policy.list_resources(i, j, cap)? {
                writeln!(out, "{}", policy.resources().name(k).unwrap_or_default())?;
            }
        }
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    policy: &Policy,
    user: &str,
    session_id: &str,
    choices: &mut dyn ChoiceProvider,
    audit: &mut dyn AuditSink,
    clock: &dyn Clock,
    out: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let net = build_net(policy.model());
    let mut session = Session::new(&net);
    session.inject(user, session_id)?;
    let mut env = Environment {
        policy,
        choices,
        audit,
        clock,
    };
    let mut outcome = Outcome::Pending;
    loop {
        match session.step(&mut env)? {
            Step::Fired(firing) => {
                writeln!(out, "{}", firing.render())?;
                outcome = firing.kernel.outcome;
            }
            Step::Complete => return Ok(outcome),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::FixedClock;

    fn fixture(name: &str) -> String {
        format!("{}/testdata/{name}", env!("CARGO_MANIFEST_DIR"))
    }

    fn call(args: &[&str], stdin: &str) -> (i32, String, String) {
        let mut input = stdin.as_bytes();
        let mut out = Vec::new();
        let mut err = Vec::new();
        let clock = FixedClock::epoch();
        let mut argv = vec!["enetacl"];
        argv.extend_from_slice(args);
        let code = run(
            argv,
            Io {
                stdin: &mut input,
                stdout: &mut out,
                stderr: &mut err,
            },
            &clock,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn check_exit_codes() {
        let p = fixture("fixture-engl.json");
        assert_eq!(
            call(&["check", "--policy", &p, "u1", "r1", "--group", "g1"], ""),
            (0, "ALLOW\n".into(), String::new())
        );
        assert_eq!(
            call(&["check", "--policy", &p, "u1", "r2", "--group", "g2"], "").0,
            1
        );
        let (code, _, err) = call(&["check", "--policy", &p, "eve", "r1", "--group", "g1"], "");
        assert_eq!(code, 2);
        assert!(err.contains("unknown user \"eve\""), "{err}");
    }

    #[test]
    fn check_enlg_prints_witness() {
        let p = fixture("fixture-enlg.json");
        let (code, out, _) = call(&["check", "--policy", &p, "u1", "r1", "--with", "u2"], "");
        assert_eq!((code, out.as_str()), (0, "ALLOW level=2 group=g1\n"));
        let (code, out, _) = call(&["check", "--policy", &p, "u1", "r1", "--group", "g2"], "");
        assert_eq!((code, out.as_str()), (1, "DENY\n"));
    }

    #[test]
    fn model_flag_mismatch() {
        let p = fixture("fixture-engl.json");
        let (code, _, err) = call(
            &["check", "--policy", &p, "--model", "enlg", "u1", "r1"],
            "",
        );
        assert_eq!(code, 2);
        assert!(err.contains("does not match"));
    }

    #[test]
    fn list_groups_and_resources() {
        let p = fixture("fixture-engl.json");
        assert_eq!(
            call(&["list", "--policy", &p, "u2"], "").1,
            "g1\t2\ng2\t1\n"
        );
        assert_eq!(call(&["list", "--policy", &p, "u1", "g1"], "").1, "r1\n");
        assert_eq!(
            call(&["list", "--policy", &p, "u1", "g1", "--level", "1"], "").1,
            ""
        );
        assert_eq!(
            call(&["list", "--policy", &p, "u2", "g2", "--level", "3"], "").0,
            2
        );
    }

    #[test]
    fn simulate_script_and_interactive_agree() {
        let p = fixture("fixture-engl.json");
        let scripted = call(
            &[
                "simulate",
                "--policy",
                &p,
                "--session",
                "s1",
                "u1",
                "--script",
                "g1,2,r1",
            ],
            "",
        );
        let interactive = call(
            &[
                "simulate",
                "--policy",
                &p,
                "--session",
                "s1",
                "u1",
                "--interactive",
            ],
            "g1\n2\nr1\n",
        );
        assert_eq!(scripted.0, 0);
        assert_eq!(scripted.1.lines().count(), 10);
        assert_eq!(scripted.0, interactive.0);
        assert_eq!(scripted.1, interactive.1);
        assert!(interactive.2.contains("groups: g1 (level 3)"));
    }

    #[test]
    fn simulate_denied_and_errors() {
        let p = fixture("fixture-engl.json");
        let (code, out, _) = call(
            &["simulate", "--policy", &p, "u1", "--script", "g1,*,r2"],
            "",
        );
        assert_eq!(code, 1);
        assert!(out.contains("\tt8:SelectResource\tb6\tb9\tdenied\n"));
        assert_eq!(
            call(&["simulate", "--policy", &p, "u1", "--script", "g1"], "").0,
            2
        );
        assert_eq!(call(&["simulate", "--policy", &p, "u1"], "").0, 2);
    }

    #[test]
    fn simulate_writes_audit_then_replays() {
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("audit.jsonl");
        let log = log.to_str().unwrap();
        let p = fixture("fixture-engl.json");
        call(
            &[
                "simulate",
                "--policy",
                &p,
                "--audit",
                log,
                "--session",
                "a",
                "u1",
                "--script",
                "g1,*,r1",
            ],
            "",
        );
        call(
            &[
                "simulate",
                "--policy",
                &p,
                "--audit",
                log,
                "--session",
                "b",
                "eve",
                "--script",
                "",
            ],
            "",
        );
        let (code, out, _) = call(&["audit", log], "");
        assert_eq!(code, 0);
        assert_eq!(out.lines().count(), 2);
        let (_, only_b, _) = call(&["audit", log, "--session", "b"], "");
        assert_eq!(only_b.lines().count(), 1);
        assert!(only_b.contains("\"outcome\":\"denied\""));
    }

    #[test]
    fn audit_parse_error_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let log = dir.path().join("bad.jsonl");
        std::fs::write(&log, "not json\n").unwrap();
        let (code, _, err) = call(&["audit", log.to_str().unwrap()], "");
        assert_eq!(code, 2);
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn verify_fixture() {
        let p = fixture("fixture-enlg.json");
        let (code, out, _) = call(&["verify", "--policy", &p], "");
        assert_eq!(code, 0);
        assert!(out.contains("discrepancies\t0\n"));
    }

    #[test]
    fn net_listing() {
        let (code, out, _) = call(&["net", "--model", "enlg"], "");
        assert_eq!(code, 0);
        assert!(out.starts_with("t1:Ident\tbp1\tb1\n"));
        assert!(out.contains("t3:IdentLevel\tb2\tb3\n"));
    }

    #[test]
    fn bad_args_exit_two_help_exits_zero() {
        assert_eq!(call(&["frobnicate"], "").0, 2);
        assert_eq!(call(&["--help"], "").0, 0);
    }
}
