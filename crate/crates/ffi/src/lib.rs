//! C ABI over `periodgram`.
//!
//! Functions return a status code (`PG_OK` on success). Strings handed out by
//! the library are owned by the caller and must be released with
//! [`pg_string_free`]. After a failure, [`pg_last_error`] describes it; the
//! pointer stays valid until the next call on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use periodgram::bases::Family;
use periodgram::contiguity::{ExponentVector5, PeriodTable};
use periodgram::diameter::{fekete_maximize_family, FeketeConfig};
use periodgram::exactnum::{rational_to_string, zeta2};
use periodgram::gram::{report, ReportConfig};

pub const PG_OK: i32 = 0;
pub const PG_ERR_NULL: i32 = 1;
pub const PG_ERR_INVALID: i32 = 2;
pub const PG_ERR_COMPUTE: i32 = 3;
pub const PG_ERR_PANIC: i32 = 4;

/// Memoised table of integrals. Safe to share between threads.
pub struct PgPeriodTable {
    inner: PeriodTable,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let c = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(i32, String);

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> i32 {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PG_OK,
        Ok(Err(Failure(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic");
            PG_ERR_PANIC
        }
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(PG_ERR_INVALID, msg.into())
}

fn failed(msg: impl ToString) -> Failure {
    Failure(PG_ERR_COMPUTE, msg.to_string())
}

fn into_c(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s).map(CString::into_raw).map_err(|_| failed("string contains NUL"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(PG_ERR_NULL, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

unsafe fn table_ref<'a>(t: *const PgPeriodTable) -> Result<&'a PeriodTable, Failure> {
    t.as_ref().map(|t| &t.inner).ok_or_else(|| Failure(PG_ERR_NULL, "table is null".into()))
}

fn check_out<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure(PG_ERR_NULL, format!("{what} is null")))
    } else {
        Ok(())
    }
}

fn parse_family(name: &str, n: u32) -> Result<Family, Failure> {
    let f: Family = name.parse().map_err(|e: String| invalid(e))?;
    if n < f.min_level().max(1) {
        return Err(invalid(format!("level {n} is below the minimum for {f}")));
    }
    Ok(f)
}

/// Creates an empty table. Never returns null.
#[no_mangle]
pub extern "C" fn pg_table_new() -> *mut PgPeriodTable {
    Box::into_raw(Box::new(PgPeriodTable { inner: PeriodTable::new() }))
}

/// Releases a table. Null is ignored.
///
/// # Safety
/// `table` must come from [`pg_table_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pg_table_free(table: *mut PgPeriodTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Number of integrals memoised so far.
///
/// # Safety
/// `table` must be a live table or null.
#[no_mangle]
pub unsafe extern "C" fn pg_table_len(table: *const PgPeriodTable) -> usize {
    table.as_ref().map_or(0, |t| t.inner.len())
}

/// Exact integral for exponents `s[0..5]` as `const_part + xi_part·ζ(2)`.
/// Rationals are written as `p/q` strings; `value` receives the f64 value.
/// Any output pointer may be null if unwanted.
///
/// # Safety
/// `s` must point to five `u32`; output pointers must be valid or null.
#[no_mangle]
pub unsafe extern "C" fn pg_mellin_integral(
    table: *const PgPeriodTable,
    s: *const u32,
    const_part: *mut *mut c_char,
    xi_part: *mut *mut c_char,
    value: *mut f64,
) -> i32 {
    guard(|| {
        let t = table_ref(table)?;
        if s.is_null() {
            return Err(Failure(PG_ERR_NULL, "s is null".into()));
        }
        let mut e = [0u32; 5];
        e.copy_from_slice(std::slice::from_raw_parts(s, 5));
        let v = t.mellin_integral(&ExponentVector5(e)).map_err(failed)?;
        let c = into_c(rational_to_string(&v.const_part))?;
        let x = into_c(rational_to_string(&v.xi_part))?;
        if const_part.is_null() {
            drop(CString::from_raw(c));
        } else {
            *const_part = c;
        }
        if xi_part.is_null() {
            drop(CString::from_raw(x));
        } else {
            *xi_part = x;
        }
        if !value.is_null() {
            *value = v.to_f64();
        }
        Ok(())
    })
}

/// JSON report of the Gram matrix of `family` at level `n`.
///
/// # Safety
/// `family` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pg_gram_report_json(
    table: *const PgPeriodTable,
    family: *const c_char,
    n: u32,
    precision: u32,
    out: *mut *mut c_char,
) -> i32 {
    guard(|| {
        let t = table_ref(table)?;
        check_out(out, "out")?;
        let f = parse_family(read_str(family, "family")?, n)?;
        if precision < 10 {
            return Err(invalid("precision must be at least 10"));
        }
        let cfg = ReportConfig { precision, ..ReportConfig::default() };
        let r = report(t, f, n, &cfg).map_err(failed)?;
        *out = into_c(serde_json::to_string(&r).map_err(failed)?)?;
        Ok(())
    })
}

/// JSON result of a Fekete search for `family` at level `n` over the image
/// of the unit square.
///
/// # Safety
/// `family` must be a NUL-terminated string; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pg_fekete_json(
    family: *const c_char,
    n: u32,
    restarts: u32,
    seed: u64,
    out: *mut *mut c_char,
) -> i32 {
    guard(|| {
        check_out(out, "out")?;
        let f = parse_family(read_str(family, "family")?, n)?;
        let cfg = FeketeConfig { restarts: restarts.max(1) as usize, seed, ..FeketeConfig::default() };
        let r = fekete_maximize_family(f, n, &cfg).map_err(failed)?;
        *out = into_c(serde_json::to_string(&r).map_err(failed)?)?;
        Ok(())
    })
}

/// ζ(2) to `digits` significant decimal digits.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn pg_zeta2(digits: u32, out: *mut *mut c_char) -> i32 {
    guard(|| {
        check_out(out, "out")?;
        if digits == 0 || digits > 100_000 {
            return Err(invalid("digits must be in 1..=100000"));
        }
        *out = into_c(zeta2(digits + 5).to_decimal_string(digits))?;
        Ok(())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn pg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the most recent failure on this thread, or null.
#[no_mangle]
pub extern "C" fn pg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn pg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
