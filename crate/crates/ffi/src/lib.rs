//! C ABI over `enetacl`.
//!
//! Policies are opaque handles created by [`enetacl_policy_parse`] and
//! released with [`enetacl_policy_free`]. Every call returns an
//! [`EnetaclStatus`]; on failure a description is available from
//! [`enetacl_last_error`] on the same thread. Strings handed out by the
//! library must be released with [`enetacl_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{self, AssertUnwindSafe};
use std::ptr;

use enetacl::audit::{AuditSink, Clock, FixedClock, MemoryAudit, SystemClock};
use enetacl::net::{build_net, Environment, NetError, Outcome, ScriptedChoices, Session, Step};
use enetacl::policy::{Axis, Catalog, Model, Policy};
use enetacl::policy_io;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnetaclStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    UnknownName = 4,
    MissingGroup = 5,
    Session = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnetaclModel {
    Engl = 0,
    Enlg = 1,
}

/// How a simulated session ended.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnetaclOutcome {
    Used = 0,
    Denied = 1,
    Quit = 2,
}

/// Access decision. `level` and `group` are the operating level and 1-based
/// group position when allowed, 0 otherwise.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EnetaclDecision {
    pub allowed: bool,
    pub level: u8,
    pub group: usize,
}

/// Opaque policy handle.
pub struct EnetaclPolicy {
    inner: Policy,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

struct Failure(EnetaclStatus, String);

impl Failure {
    fn new(status: EnetaclStatus, msg: impl Into<String>) -> Self {
        Failure(status, msg.into())
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EnetaclStatus {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EnetaclStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EnetaclStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(
            EnetaclStatus::NullArgument,
            format!("{what} is null"),
        ));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        Failure::new(
            EnetaclStatus::InvalidUtf8,
            format!("{what} is not valid UTF-8"),
        )
    })
}

unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn policy<'a>(p: *const EnetaclPolicy) -> Result<&'a Policy, Failure> {
    p.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| Failure::new(EnetaclStatus::NullArgument, "policy is null"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure::new(EnetaclStatus::NullArgument, format!("{what} is null")))
}

fn lookup(catalog: &Catalog, axis: Axis, name: &str) -> Result<usize, Failure> {
    catalog.position(name).ok_or_else(|| {
        Failure::new(
            EnetaclStatus::UnknownName,
            format!("unknown {axis} {name:?}"),
        )
    })
}

fn into_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .unwrap_or_default()
        .into_raw()
}

fn decide(
    p: &Policy,
    users: [&str; 2],
    resource: &str,
    group: Option<&str>,
) -> Result<EnetaclDecision, Failure> {
    let i0 = lookup(p.users(), Axis::User, users[0])?;
    let i1 = lookup(p.users(), Axis::User, users[1])?;
    let k = lookup(p.resources(), Axis::Resource, resource)?;
    let j = group
        .map(|g| lookup(p.groups(), Axis::Group, g))
        .transpose()?;
    let internal =
        |e: enetacl::policy::PolicyError| Failure::new(EnetaclStatus::Panic, e.to_string());
    match p {
        Policy::Engl(e) => {
            let j = j.ok_or_else(|| {
                Failure::new(
                    EnetaclStatus::MissingGroup,
                    "group-first policies need a group",
                )
            })?;
            let allowed = e.can_interact(i0, i1, k, j).map_err(internal)?;
            let level = if allowed {
                e.user_level(i0, j)
                    .map_err(internal)?
                    .min(e.user_level(i1, j).map_err(internal)?)
            } else {
                0
            };
            Ok(EnetaclDecision {
                allowed,
                level,
                group: if allowed { j } else { 0 },
            })
        }
        Policy::Enlg(e) => Ok(match e.witness(i0, i1, k, j, None).map_err(internal)? {
            Some(w) => EnetaclDecision {
                allowed: true,
                level: w.level.get(),
                group: w.group,
            },
            None => EnetaclDecision::default(),
        }),
    }
}

/// Parses and validates a JSON policy document.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out_policy` must be writable.
#[no_mangle]
pub unsafe extern "C" fn enetacl_policy_parse(
    text: *const c_char,
    out_policy: *mut *mut EnetaclPolicy,
) -> EnetaclStatus {
    guard(|| {
        let slot = out(out_policy, "out_policy")?;
        *slot = ptr::null_mut();
        let doc = self::text(text, "text")?;
        let parse = |e: policy_io::PolicyIoError| Failure::new(EnetaclStatus::Parse, e.to_string());
        let inner = policy_io::validate(&policy_io::parse(doc).map_err(parse)?).map_err(parse)?;
        *slot = Box::into_raw(Box::new(EnetaclPolicy { inner }));
        Ok(())
    })
}

/// Releases a policy handle. Null is ignored.
///
/// # Safety
/// `policy` must come from [`enetacl_policy_parse`] and not be used again.
#[no_mangle]
pub unsafe extern "C" fn enetacl_policy_free(policy: *mut EnetaclPolicy) {
    if !policy.is_null() {
        let _ = panic::catch_unwind(AssertUnwindSafe(|| drop(Box::from_raw(policy))));
    }
}

/// # Safety
/// `policy` must be a live handle; `out_model` must be writable.
#[no_mangle]
pub unsafe extern "C" fn enetacl_policy_model(
    policy: *const EnetaclPolicy,
    out_model: *mut EnetaclModel,
) -> EnetaclStatus {
    guard(|| {
        *out(out_model, "out_model")? = match self::policy(policy)?.model() {
            Model::Engl => EnetaclModel::Engl,
            Model::Enlg => EnetaclModel::Enlg,
        };
        Ok(())
    })
}

/// Decides whether `user` may access `resource`. `group` is required for
/// group-first policies; for level-first policies it is optional and
/// restricts the search.
///
/// # Safety
/// Strings must be NUL-terminated (`group` may be null); `policy` must be a
/// live handle; `out_decision` must be writable.
#[no_mangle]
pub unsafe extern "C" fn enetacl_check_access(
    policy: *const EnetaclPolicy,
    user: *const c_char,
    resource: *const c_char,
    group: *const c_char,
    out_decision: *mut EnetaclDecision,
) -> EnetaclStatus {
    guard(|| {
        let slot = out(out_decision, "out_decision")?;
        let user = text(user, "user")?;
        *slot = decide(
            self::policy(policy)?,
            [user, user],
            text(resource, "resource")?,
            optional_text(group, "group")?,
        )?;
        Ok(())
    })
}

/// Decides whether `user0` and `user1` may interact through `resource`.
///
/// # Safety
/// As for [`enetacl_check_access`].
#[no_mangle]
pub unsafe extern "C" fn enetacl_check_interact(
    policy: *const EnetaclPolicy,
    user0: *const c_char,
    user1: *const c_char,
    resource: *const c_char,
    group: *const c_char,
    out_decision: *mut EnetaclDecision,
) -> EnetaclStatus {
    guard(|| {
        let slot = out(out_decision, "out_decision")?;
        let users = [text(user0, "user0")?, text(user1, "user1")?];
        *slot = decide(
            self::policy(policy)?,
            users,
            text(resource, "resource")?,
            optional_text(group, "group")?,
        )?;
        Ok(())
    })
}

/// Writes the canonical JSON form of a policy.
///
/// # Safety
/// `policy` must be a live handle; `out_text` must be writable. The result
/// must be released with [`enetacl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn enetacl_policy_serialize(
    policy: *const EnetaclPolicy,
    out_text: *mut *mut c_char,
) -> EnetaclStatus {
    guard(|| {
        let slot = out(out_text, "out_text")?;
        *slot = into_c(policy_io::serialize(self::policy(policy)?));
        Ok(())
    })
}

/// Runs one session for `user` with comma-separated `script` answers.
///
/// On success `out_trace` holds one tab-separated firing per line and
/// `out_audit` the JSON-lines audit record(s). With `deterministic` set,
/// timestamps come from a fixed clock starting at 2000-01-01T00:00:00Z.
///
/// # Safety
/// Strings must be NUL-terminated; out pointers must be writable. Returned
/// strings must be released with [`enetacl_string_free`].
#[no_mangle]
pub unsafe extern "C" fn enetacl_simulate(
    policy: *const EnetaclPolicy,
    user: *const c_char,
    session_id: *const c_char,
    script: *const c_char,
    deterministic: bool,
    out_outcome: *mut EnetaclOutcome,
    out_trace: *mut *mut c_char,
    out_audit: *mut *mut c_char,
) -> EnetaclStatus {
    guard(|| {
        let outcome_slot = out(out_outcome, "out_outcome")?;
        let trace_slot = out(out_trace, "out_trace")?;
        let audit_slot = out(out_audit, "out_audit")?;
        *trace_slot = ptr::null_mut();
        *audit_slot = ptr::null_mut();
        let policy = self::policy(policy)?;
        let (user, id) = (text(user, "user")?, text(session_id, "session_id")?);
        let mut choices = ScriptedChoices::parse(text(script, "script")?);
        let fixed = FixedClock::epoch();
        let clock: &dyn Clock = if deterministic { &fixed } else { &SystemClock };
        let mut audit = MemoryAudit::new();
        let session_err = |e: NetError| Failure::new(EnetaclStatus::Session, e.to_string());

        let net = build_net(policy.model());
        let mut session = Session::new(&net);
        session.inject(user, id).map_err(session_err)?;
        let mut env = Environment {
            policy,
            choices: &mut choices,
            audit: &mut audit as &mut dyn AuditSink,
            clock,
        };
        let mut trace = String::new();
        let mut outcome = Outcome::Pending;
        while let Step::Fired(firing) = session.step(&mut env).map_err(session_err)? {
            trace.push_str(&firing.render());
            trace.push('\n');
            outcome = firing.kernel.outcome;
        }
        *outcome_slot = match outcome {
            Outcome::Used => EnetaclOutcome::Used,
            Outcome::Quit => EnetaclOutcome::Quit,
            Outcome::Denied | Outcome::Pending => EnetaclOutcome::Denied,
        };
        let lines: String = audit.records().iter().map(|r| r.to_line() + "\n").collect();
        *trace_slot = into_c(trace);
        *audit_slot = into_c(lines);
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used again.
#[no_mangle]
pub unsafe extern "C" fn enetacl_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or "" after success.
/// Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn enetacl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}
