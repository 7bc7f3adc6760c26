//! C ABI over the plainsql engine.
//!
//! Every fallible call returns a [`PlainsqlStatus`]. On failure the message is
//! kept per thread and read with [`plainsql_last_error`]. Strings handed out
//! through `out` parameters are owned by the caller and released with
//! [`plainsql_string_free`]. Structured results are JSON.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::sync::Arc;

use chrono::NaiveDateTime;
use plainsql::{
    explain, normalize_query, parse_unresolved, Engine, EngineConfig, FixtureTranslator, OnboardingConfig,
    RemoteTranslator, ServiceError, Source, Translator,
};

/// Result codes. `PLAINSQL_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlainsqlStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    BadRequest = 3,
    UnknownDatabase = 4,
    UnknownResult = 5,
    BackendUnavailable = 6,
    NoTranslation = 7,
    UnsupportedSyntax = 8,
    InvalidSql = 9,
    RejectedStatement = 10,
    OnboardingFailed = 11,
    ExecutionFailed = 12,
    Internal = 13,
    Panic = 14,
}

impl PlainsqlStatus {
    fn of(e: &ServiceError) -> Self {
        match e.kind() {
            "unknown_database" => Self::UnknownDatabase,
            "unknown_result" => Self::UnknownResult,
            "backend_unavailable" => Self::BackendUnavailable,
            "no_translation" => Self::NoTranslation,
            "unsupported_syntax" => Self::UnsupportedSyntax,
            "invalid_sql" => Self::InvalidSql,
            "rejected_statement" => Self::RejectedStatement,
            "onboarding_failed" => Self::OnboardingFailed,
            "bad_request" => Self::BadRequest,
            "execution_failed" => Self::ExecutionFailed,
            _ => Self::Internal,
        }
    }
}

/// Opaque engine handle.
pub struct PlainsqlEngine {
    inner: Engine,
}

struct Failure(PlainsqlStatus, String);

impl From<ServiceError> for Failure {
    fn from(e: ServiceError) -> Self {
        Failure(PlainsqlStatus::of(&e), e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure(PlainsqlStatus::BadRequest, e.to_string())
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `f`, records its error or panic, and maps it to a status.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PlainsqlStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PlainsqlStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_last_error(&message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<String>()
                .map(String::as_str)
                .or_else(|| payload.downcast_ref::<&str>().copied())
                .unwrap_or("panic inside plainsql");
            set_last_error(message);
            PlainsqlStatus::Panic
        }
    }
}

/// Borrows a required C string.
unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(PlainsqlStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(PlainsqlStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

/// Borrows an optional C string; null means absent.
unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn engine<'a>(p: *const PlainsqlEngine) -> Result<&'a Engine, Failure> {
    p.as_ref()
        .map(|e| &e.inner)
        .ok_or_else(|| Failure(PlainsqlStatus::NullArgument, "engine is null".into()))
}

unsafe fn write_out(out: *mut *mut c_char, value: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure(PlainsqlStatus::NullArgument, "out is null".into()));
    }
    let c = CString::new(value).map_err(|_| Failure(PlainsqlStatus::Internal, "output contains a nul byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

fn reference_time(raw: Option<&str>) -> Result<Option<NaiveDateTime>, Failure> {
    raw.map(|r| {
        r.parse::<NaiveDateTime>()
            .map_err(|e| Failure(PlainsqlStatus::BadRequest, format!("reference time {r:?}: {e}")))
    })
    .transpose()
}

/// Message for the last failed call on this thread, or null. Valid until the
/// next plainsql call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn plainsql_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn plainsql_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned through an `out` parameter. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn plainsql_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Opens (or creates) an engine over `data_dir`.
///
/// The translator is the remote service at `backend_url` when given, else the
/// fixture file at `fixtures_path`, else an empty fixture table. Either may be
/// null.
///
/// # Safety
/// String arguments must be null or NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn plainsql_engine_open(
    data_dir: *const c_char,
    fixtures_path: *const c_char,
    backend_url: *const c_char,
    out: *mut *mut PlainsqlEngine,
) -> PlainsqlStatus {
    guard(|| {
        if out.is_null() {
            return Err(Failure(PlainsqlStatus::NullArgument, "out is null".into()));
        }
        let data_dir = text(data_dir, "data_dir")?;
        let translator: Arc<dyn Translator> = match (
            optional_text(backend_url, "backend_url")?,
            optional_text(fixtures_path, "fixtures_path")?,
        ) {
            (Some(url), _) => Arc::new(RemoteTranslator::new(url)),
            (None, Some(path)) => Arc::new(
                FixtureTranslator::from_file(Path::new(path))
                    .map_err(|e| Failure(PlainsqlStatus::BadRequest, format!("fixtures {path}: {e}")))?,
            ),
            (None, None) => Arc::new(FixtureTranslator::default()),
        };
        let inner = Engine::open(EngineConfig::new(data_dir), translator)?;
        *out = Box::into_raw(Box::new(PlainsqlEngine { inner }));
        Ok(())
    })
}

/// Destroys an engine. Null is ignored.
///
/// # Safety
/// `engine` must come from [`plainsql_engine_open`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn plainsql_engine_free(engine: *mut PlainsqlEngine) {
    if !engine.is_null() {
        drop(Box::from_raw(engine));
    }
}

/// Onboards a csv or SQLite file. `config_json` is an onboarding config
/// object or null. Writes the onboarded schema as JSON to `out`.
///
/// # Safety
/// Pointers must be valid as described on [`plainsql_engine_open`].
#[no_mangle]
pub unsafe extern "C" fn plainsql_onboard(
    engine: *const PlainsqlEngine,
    source_path: *const c_char,
    config_json: *const c_char,
    out: *mut *mut c_char,
) -> PlainsqlStatus {
    guard(|| {
        let engine = self::engine(engine)?;
        let source = Source::detect(text(source_path, "source_path")?)
            .map_err(|e| Failure(PlainsqlStatus::OnboardingFailed, e.to_string()))?;
        let config: OnboardingConfig = match optional_text(config_json, "config_json")? {
            Some(json) => serde_json::from_str(json)?,
            None => OnboardingConfig::default(),
        };
        let db = engine.onboard(&source, &config)?;
        write_out(out, serde_json::to_string(&db)?)
    })
}

/// Writes a JSON array of onboarded databases to `out`.
///
/// # Safety
/// Pointers must be valid as described on [`plainsql_engine_open`].
#[no_mangle]
pub unsafe extern "C" fn plainsql_databases(engine: *const PlainsqlEngine, out: *mut *mut c_char) -> PlainsqlStatus {
    guard(|| {
        let dbs: Vec<_> = self::engine(engine)?.databases().iter().map(|d| (**d).clone()).collect();
        write_out(out, serde_json::to_string(&dbs)?)
    })
}

/// Answers a question against a database. `reference_time` is
/// `YYYY-MM-DDTHH:MM:SS` or null for now. Writes the full response as JSON.
///
/// # Safety
/// Pointers must be valid as described on [`plainsql_engine_open`].
#[no_mangle]
pub unsafe extern "C" fn plainsql_query(
    engine: *const PlainsqlEngine,
    database_id: *const c_char,
    question: *const c_char,
    reference_time: *const c_char,
    out: *mut *mut c_char,
) -> PlainsqlStatus {
    guard(|| {
        let engine = self::engine(engine)?;
        let at = self::reference_time(optional_text(reference_time, "reference_time")?)?;
        let response = engine.query(text(database_id, "database_id")?, text(question, "question")?, at)?;
        write_out(out, serde_json::to_string(&response)?)
    })
}

/// Writes one page (1-based, newest first) of query history as JSON.
///
/// # Safety
/// Pointers must be valid as described on [`plainsql_engine_open`].
#[no_mangle]
pub unsafe extern "C" fn plainsql_history(
    engine: *const PlainsqlEngine,
    database_id: *const c_char,
    page: usize,
    out: *mut *mut c_char,
) -> PlainsqlStatus {
    guard(|| {
        let entries = self::engine(engine)?.history(text(database_id, "database_id")?, page)?;
        write_out(out, serde_json::to_string(&entries)?)
    })
}

/// Writes a stored result as CSV text.
///
/// # Safety
/// Pointers must be valid as described on [`plainsql_engine_open`].
#[no_mangle]
pub unsafe extern "C" fn plainsql_result_csv(
    engine: *const PlainsqlEngine,
    result_id: *const c_char,
    out: *mut *mut c_char,
) -> PlainsqlStatus {
    guard(|| {
        let bytes = self::engine(engine)?.result_csv(text(result_id, "result_id")?)?;
        let csv = String::from_utf8(bytes).map_err(|e| Failure(PlainsqlStatus::Internal, e.to_string()))?;
        write_out(out, csv)
    })
}

/// Writes the plain-English explanation of `sql` to `out`. No engine needed.
///
/// # Safety
/// `sql` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn plainsql_explain(sql: *const c_char, out: *mut *mut c_char) -> PlainsqlStatus {
    guard(|| {
        let parsed = parse_unresolved(text(sql, "sql")?).map_err(ServiceError::from)?;
        write_out(out, explain(&parsed).to_string())
    })
}

/// Rewrites date phrases in `query` relative to `reference_time` (or now)
/// and writes the normalized query with its substitutions as JSON.
///
/// # Safety
/// String arguments must be null where allowed or NUL-terminated; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn plainsql_normalize_query(
    query: *const c_char,
    reference_time: *const c_char,
    out: *mut *mut c_char,
) -> PlainsqlStatus {
    guard(|| {
        let query = text(query, "query")?;
        let at = self::reference_time(optional_text(reference_time, "reference_time")?)?
            .unwrap_or_else(|| chrono::Local::now().naive_local());
        write_out(out, serde_json::to_string(&normalize_query(query, at))?)
    })
}
