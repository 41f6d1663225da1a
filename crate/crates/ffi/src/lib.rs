//! C ABI over `clonelab`.
//!
//! Objects are opaque heap handles released with the matching `*_free`
//! function. Fallible calls return a [`ClonelabStatus`] and write their
//! result through an out-pointer; the message of the most recent error on
//! the calling thread is available from [`clonelab_last_error`].
//! Strings returned by the library are freed with [`clonelab_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use clonelab::closure::{close, contains, name_generators, ClosureBudget, CloneFragment, Membership};
use clonelab::median::{amplification_schedule, parse_rational};
use clonelab::order_stats::{is_majority, order_stat};
use clonelab::wild::{in_pol_t1, is_almost_unary_family, wild_family_of_term, WildFamily};
use clonelab::{Chain, Error, OpTable, Registry, Term, VarMap};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClonelabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ArityMismatch = 3,
    DomainMismatch = 4,
    Parse = 5,
    BudgetExceeded = 6,
    Precondition = 7,
    Utf8 = 8,
    Panic = 99,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClonelabMembership {
    No = 0,
    Yes = 1,
    Unknown = 2,
}

pub struct ClonelabTable(OpTable);
pub struct ClonelabTerm(Term);
pub struct ClonelabFragment(CloneFragment);
pub struct ClonelabFamily(WildFamily);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> ClonelabStatus {
    match e {
        Error::ArityMismatch { .. } => ClonelabStatus::ArityMismatch,
        Error::DomainMismatch { .. } => ClonelabStatus::DomainMismatch,
        Error::Parse { .. } => ClonelabStatus::Parse,
        Error::BudgetExceeded { .. } | Error::ArityOverBudget { .. } | Error::InvalidBudget(_) => {
            ClonelabStatus::BudgetExceeded
        }
        Error::InvalidChain(_)
        | Error::ElementOutOfRange { .. }
        | Error::IndexOutOfRange { .. }
        | Error::InvalidVarMap(_)
        | Error::UnknownOp(_) => ClonelabStatus::InvalidArgument,
        _ => ClonelabStatus::Precondition,
    }
}

struct Failure(ClonelabStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null() -> Failure {
    Failure(ClonelabStatus::NullPointer, "null pointer argument".into())
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> ClonelabStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ClonelabStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            ClonelabStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(p: *const T) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(null)
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null());
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn text<'a>(s: *const c_char) -> Result<&'a str, Failure> {
    if s.is_null() {
        return Err(null());
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| Failure(ClonelabStatus::Utf8, "string is not UTF-8".into()))
}

fn owned_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

/// Message of the last failed call on this thread, or NULL. Owned by the
/// library and valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn clonelab_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn clonelab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

#[no_mangle]
pub extern "C" fn clonelab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// `m^n_k` on a chain of `chain` elements.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn clonelab_table_order_stat(
    n: usize,
    k: usize,
    chain: usize,
    out: *mut *mut ClonelabTable,
) -> ClonelabStatus {
    guard(|| put(out, ClonelabTable(order_stat(n, k, Chain::new(chain)?)?)))
}

/// A table from `len` values in lexicographic input order.
///
/// # Safety
/// `values` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn clonelab_table_from_values(
    arity: usize,
    chain: usize,
    values: *const u8,
    len: usize,
    out: *mut *mut ClonelabTable,
) -> ClonelabStatus {
    guard(|| {
        let v = slice(values, len)?.to_vec();
        put(out, ClonelabTable(OpTable::from_values(Chain::new(chain)?, arity, v)?))
    })
}

/// Parses the `optable <arity> <size>` text format.
///
/// # Safety
/// `text_in` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn clonelab_table_parse(
    text_in: *const c_char,
    out: *mut *mut ClonelabTable,
) -> ClonelabStatus {
    guard(|| put(out, ClonelabTable(OpTable::parse(text(text_in)?)?)))
}

/// # Safety
/// `t` must be a live table handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn clonelab_table_free(t: *mut ClonelabTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `t` must be a live table handle.
#[no_mangle]
pub unsafe extern "C" fn clonelab_table_arity(t: *const ClonelabTable) -> usize {
    t.as_ref().map_or(0, |t| t.0.arity())
}

/// # Safety
/// `t` must be a live table handle.
#[no_mangle]
pub unsafe extern "C" fn clonelab_table_chain_size(t: *const ClonelabTable) -> usize {
    t.as_ref().map_or(0, |t| t.0.chain().size())
}

/// # Safety
/// `t` must be live; `input` must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn clonelab_table_eval(
    t: *const ClonelabTable,
    input: *const usize,
    len: usize,
    out: *mut usize,
) -> ClonelabStatus {
    guard(|| {
        let t = borrow(t)?;
        let v = t.0.eval(slice(input, len)?)?;
        *out.as_mut().ok_or_else(null)? = v;
        Ok(())
    })
}

/// `outer(inners[0], …, inners[count-1])`.
///
/// # Safety
/// `inners` must hold `count` live table handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn clonelab_table_compose(
    outer: *const ClonelabTable,
    inners: *const *const ClonelabTable,
    count: usize,
    out: *mut *mut ClonelabTable,
) -> ClonelabStatus {
    guard(|| {
        let outer = borrow(outer)?;
        let inner: Vec<OpTable> = slice(inners, count)?
            .iter()
            .map(|&p| borrow(p).map(|t| t.0.clone()))
            .collect::<Result<_, _>>()?;
        put(out, ClonelabTable(outer.0.compose(&inner)?))
    })
}

/// Identification of variables: source position `i` reads variable
/// `assignment[i]` (1-based) of the new `target_arity`-ary table.
///
/// # Safety
/// `assignment` must hold `len` elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn clonelab_table_identify(
    t: *const ClonelabTable,
    assignment: *const usize,
    len: usize,
    target_arity: usize,
    out: *mut *mut ClonelabTable,
) -> ClonelabStatus {
    guard(|| {
        let t = borrow(t)?;
        let map = VarMap::new(target_arity, slice(assignment, len)?.to_vec())?;
        put(out, ClonelabTable(t.0.identify_vars(&map)?))
    })
}

/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn clonelab_table_equal(a: *const ClonelabTable, b: *const ClonelabTable) -> bool {
    matches!((a.as_ref(), b.as_ref()), (Some(a), Some(b)) if a.0 == b.0)
}

/// # Safety
/// `t` must be live.
#[no_mangle]
pub unsafe extern "C" fn clonelab_table_is_majority(t: *const ClonelabTable) -> bool {
    t.as_ref().is_some_and(|t| is_majority(&t.0))
}

/// Text form; free with `clonelab_string_free`.
///
/// # Safety
/// `t` must be live.
#[no_mangle]
pub unsafe extern "C" fn clonelab_table_to_text(t: *const ClonelabTable) -> *mut c_char {
    t.as_ref().map_or(ptr::null_mut(), |t| owned_string(t.0.to_text()))
}

/// Parses an s-expression term (optionally preceded by `term <arity>`).
///
/// # Safety
/// `text_in` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn clonelab_term_parse(
    text_in: *const c_char,
    out: *mut *mut ClonelabTerm,
) -> ClonelabStatus {
    guard(|| put(out, ClonelabTerm(Term::parse(text(text_in)?)?)))
}

/// # Safety
/// `t` must be a live term handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn clonelab_term_free(t: *mut ClonelabTerm) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `t` must be live.
#[no_mangle]
pub unsafe extern "C" fn clonelab_term_arity(t: *const ClonelabTerm) -> usize {
    t.as_ref().map_or(0, |t| t.0.arity())
}

/// Tabulates a term over order-statistic symbols.
///
/// # Safety
/// `t` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn clonelab_term_to_table(
    t: *const ClonelabTerm,
    chain: usize,
    out: *mut *mut ClonelabTable,
) -> ClonelabStatus {
    guard(|| {
        let t = borrow(t)?;
        put(out, ClonelabTable(t.0.to_table(Chain::new(chain)?, &Registry::new())?))
    })
}

/// Closes `count` generators (named `f1`, `f2`, … in witnesses).
///
/// # Safety
/// `gens` must hold `count` live handles on one chain; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn clonelab_close(
    gens: *const *const ClonelabTable,
    count: usize,
    max_arity: usize,
    max_tables: usize,
    out: *mut *mut ClonelabFragment,
) -> ClonelabStatus {
    guard(|| {
        let tables: Vec<OpTable> = slice(gens, count)?
            .iter()
            .map(|&p| borrow(p).map(|t| t.0.clone()))
            .collect::<Result<_, _>>()?;
        let Some(first) = tables.first() else {
            return Err(Failure(ClonelabStatus::InvalidArgument, "no generators".into()));
        };
        let budget = ClosureBudget::new(max_arity, max_tables, None)?;
        put(out, ClonelabFragment(close(&name_generators(&tables)?, first.chain(), &budget)?))
    })
}

/// # Safety
/// `f` must be a live fragment handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn clonelab_fragment_free(f: *mut ClonelabFragment) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Number of members of the given arity (0 if the arity was not computed).
///
/// # Safety
/// `f` must be live; `exhausted` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn clonelab_fragment_level_size(
    f: *const ClonelabFragment,
    arity: usize,
    exhausted: *mut bool,
) -> usize {
    let Some(level) = f.as_ref().and_then(|f| f.0.level(arity)) else {
        return 0;
    };
    if let Some(e) = exhausted.as_mut() {
        *e = level.exhausted();
    }
    level.len()
}

/// Membership of `target`; on `Yes`, `witness` (if non-NULL) receives the
/// witness term as a string to free with `clonelab_string_free`.
///
/// # Safety
/// Handles must be live; `membership` must be writable; `witness` may be NULL.
#[no_mangle]
pub unsafe extern "C" fn clonelab_fragment_contains(
    f: *const ClonelabFragment,
    target: *const ClonelabTable,
    membership: *mut ClonelabMembership,
    witness: *mut *mut c_char,
) -> ClonelabStatus {
    guard(|| {
        let m = contains(&borrow(f)?.0, &borrow(target)?.0)?;
        let out = membership.as_mut().ok_or_else(null)?;
        if let Some(w) = witness.as_mut() {
            *w = ptr::null_mut();
        }
        *out = match m {
            Membership::Yes(term) => {
                if let Some(w) = witness.as_mut() {
                    *w = owned_string(term.to_string());
                }
                ClonelabMembership::Yes
            }
            Membership::No => ClonelabMembership::No,
            Membership::Unknown => ClonelabMembership::Unknown,
        };
        Ok(())
    })
}

/// Wild family of a monotone term.
///
/// # Safety
/// `t` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn clonelab_wild_family(
    t: *const ClonelabTerm,
    out: *mut *mut ClonelabFamily,
) -> ClonelabStatus {
    guard(|| put(out, ClonelabFamily(wild_family_of_term(&borrow(t)?.0)?)))
}

/// # Safety
/// `f` must be a live family handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn clonelab_family_free(f: *mut ClonelabFamily) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// # Safety
/// `f` must be live.
#[no_mangle]
pub unsafe extern "C" fn clonelab_family_in_pol_t1(f: *const ClonelabFamily) -> bool {
    f.as_ref().is_some_and(|f| in_pol_t1(&f.0))
}

/// # Safety
/// `f` must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn clonelab_family_almost_unary(
    f: *const ClonelabFamily,
    out: *mut bool,
) -> ClonelabStatus {
    guard(|| {
        let v = is_almost_unary_family(&borrow(f)?.0)?;
        *out.as_mut().ok_or_else(null)? = v;
        Ok(())
    })
}

/// `{"n":…,"minimal_sets":[…]}`; free with `clonelab_string_free`.
///
/// # Safety
/// `f` must be live.
#[no_mangle]
pub unsafe extern "C" fn clonelab_family_to_json(f: *const ClonelabFamily) -> *mut c_char {
    f.as_ref().map_or(ptr::null_mut(), |f| owned_string(f.0.to_json().to_string()))
}

/// Amplification schedule for odd `n` and threshold `p/q`, as JSON.
///
/// # Safety
/// `out` must be writable; the string is freed with `clonelab_string_free`.
#[no_mangle]
pub unsafe extern "C" fn clonelab_amplification_json(
    n: usize,
    p: u64,
    q: u64,
    out: *mut *mut c_char,
) -> ClonelabStatus {
    guard(|| {
        let t = parse_rational(&format!("{p}/{q}"))?;
        let s = amplification_schedule(n, &t)?;
        let slot = out.as_mut().ok_or_else(null)?;
        *slot = owned_string(s.to_json().to_string());
        Ok(())
    })
}
