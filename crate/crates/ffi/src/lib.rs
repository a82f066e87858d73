//! C interface to `revcue`.
//!
//! Objects cross the boundary as opaque handles that must be released with
//! the matching `_free` function. Strings returned through `out_*` pointers
//! are owned by the caller and released with [`revcue_string_free`]. Every
//! fallible call returns a [`RevcueStatus`]; on failure
//! [`revcue_last_error_message`] describes the problem.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use revcue::collocation::{rank, Accumulator};
use revcue::lexicon::Category;
use revcue::preprocess::Preprocessor;
use revcue::{Comment, CueLexicon, Error, LintConfig, PreprocessConfig, WindowConfig};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RevcueStatus {
    Ok = 0,
    /// Null pointer, malformed UTF-8 or an invalid setting.
    InvalidArgument = 1,
    CorpusQuality = 2,
    Io = 3,
    Network = 4,
    /// Lexicon file could not be parsed.
    Lexicon = 5,
    /// A Rust panic was caught at the boundary.
    Panic = 6,
}

impl From<&Error> for RevcueStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Lexicon { .. } => RevcueStatus::Lexicon,
            Error::Io { .. } => RevcueStatus::Io,
            Error::CorpusQuality { .. } => RevcueStatus::CorpusQuality,
            Error::Network(_) => RevcueStatus::Network,
            Error::InProject { source, .. } => RevcueStatus::from(source.as_ref()),
            _ => RevcueStatus::InvalidArgument,
        }
    }
}

/// Cue lexicon handle.
pub struct RevcueLexicon(CueLexicon);

/// Incremental collocation counter for one project.
pub struct RevcueCollocator {
    project: String,
    preprocessor: Preprocessor,
    window: WindowConfig,
    acc: Accumulator,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

struct Failure(RevcueStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(RevcueStatus::from(&e), e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(RevcueStatus::InvalidArgument, msg.into())
}

/// Runs `f` behind a panic guard and records any error message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> RevcueStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RevcueStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside revcue");
            RevcueStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(invalid(format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{name} is not valid UTF-8")))
}

unsafe fn opt_str_arg<'a>(p: *const c_char, name: &str) -> Result<Option<&'a str>, Failure> {
    if p.is_null() {
        Ok(None)
    } else {
        str_arg(p, name).map(Some)
    }
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    let s = CString::new(s).map_err(|_| invalid("output contains a NUL byte"))?;
    *out = s.into_raw();
    Ok(())
}

fn to_json<T: serde::Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string(value).map_err(|e| invalid(format!("serializing JSON: {e}")))
}

fn out_ptr<T>(out: *mut T) -> Result<(), Failure> {
    if out.is_null() {
        Err(invalid("output pointer is null"))
    } else {
        Ok(())
    }
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next revcue call on the same thread.
#[no_mangle]
pub extern "C" fn revcue_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn revcue_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The bundled lexicon. Never null.
#[no_mangle]
pub extern "C" fn revcue_lexicon_default() -> *mut RevcueLexicon {
    Box::into_raw(Box::new(RevcueLexicon(CueLexicon::default_lexicon())))
}

/// Loads a `phrase<TAB>category` lexicon file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn revcue_lexicon_load(
    path: *const c_char,
    out: *mut *mut RevcueLexicon,
) -> RevcueStatus {
    guard(|| {
        out_ptr(out)?;
        let path = str_arg(path, "path")?;
        let lexicon = CueLexicon::load(path)?;
        *out = Box::into_raw(Box::new(RevcueLexicon(lexicon)));
        Ok(())
    })
}

/// # Safety
/// `lexicon` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn revcue_lexicon_free(lexicon: *mut RevcueLexicon) {
    if !lexicon.is_null() {
        drop(Box::from_raw(lexicon));
    }
}

/// Number of cue phrases, or 0 for a null handle.
///
/// # Safety
/// `lexicon` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn revcue_lexicon_len(lexicon: *const RevcueLexicon) -> usize {
    lexicon.as_ref().map_or(0, |l| l.0.len())
}

/// Writes the lexicon version string to `out`.
///
/// # Safety
/// `lexicon` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn revcue_lexicon_version(
    lexicon: *const RevcueLexicon,
    out: *mut *mut c_char,
) -> RevcueStatus {
    guard(|| {
        out_ptr(out)?;
        let lexicon = lexicon.as_ref().ok_or_else(|| invalid("lexicon is null"))?;
        write_string(out, lexicon.0.version().to_string())
    })
}

/// Looks up a cue phrase. `out_category` receives the category index
/// (0 Causality, 1 Contrast, 2 Exemplification, 3 Clarification,
/// 4 Similarity, 5 Hypothesis) or -1 when the phrase is not a cue.
///
/// # Safety
/// `lexicon` must be a live handle, `phrase` a NUL-terminated string and
/// `out_category` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn revcue_lexicon_lookup(
    lexicon: *const RevcueLexicon,
    phrase: *const c_char,
    out_category: *mut i32,
) -> RevcueStatus {
    guard(|| {
        out_ptr(out_category)?;
        let lexicon = lexicon.as_ref().ok_or_else(|| invalid("lexicon is null"))?;
        let phrase = str_arg(phrase, "phrase")?;
        *out_category = match lexicon.0.lookup(phrase) {
            Some(c) => category_index(c),
            None => -1,
        };
        Ok(())
    })
}

fn category_index(c: Category) -> i32 {
    Category::ALL.iter().position(|&x| x == c).map_or(-1, |i| i as i32)
}

/// Lints one comment and writes the report as JSON to `out_json`.
/// `config_toml` may be null for the default linter settings.
///
/// # Safety
/// Pointers must be live; strings NUL-terminated; `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn revcue_lint_json(
    lexicon: *const RevcueLexicon,
    comment_id: *const c_char,
    text: *const c_char,
    config_toml: *const c_char,
    out_json: *mut *mut c_char,
) -> RevcueStatus {
    guard(|| {
        out_ptr(out_json)?;
        let lexicon = lexicon.as_ref().ok_or_else(|| invalid("lexicon is null"))?;
        let id = str_arg(comment_id, "comment_id")?;
        let text = str_arg(text, "text")?;
        let config: LintConfig = match opt_str_arg(config_toml, "config_toml")? {
            Some(t) => toml::from_str(t).map_err(|e| invalid(format!("config: {e}")))?,
            None => LintConfig::default(),
        };
        let report =
            revcue::lint(&Comment::new(id, "-", text), &lexicon.0, &config);
        write_string(out_json, to_json(&report)?)
    })
}

/// Preprocesses a comment and writes its token array as JSON to `out_json`.
/// `config_toml` may be null for the defaults.
///
/// # Safety
/// `text` must be NUL-terminated and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn revcue_preprocess_json(
    text: *const c_char,
    config_toml: *const c_char,
    out_json: *mut *mut c_char,
) -> RevcueStatus {
    guard(|| {
        out_ptr(out_json)?;
        let text = str_arg(text, "text")?;
        let config = preprocess_config(config_toml)?;
        let tokens = Preprocessor::new(config).preprocess_text(text).tokens;
        write_string(out_json, to_json(&tokens)?)
    })
}

unsafe fn preprocess_config(p: *const c_char) -> Result<PreprocessConfig, Failure> {
    match opt_str_arg(p, "config_toml")? {
        Some(t) => toml::from_str(t).map_err(|e| invalid(format!("config: {e}"))),
        None => Ok(PreprocessConfig::default()),
    }
}

/// Starts counting code collocations for `project` with the given window
/// distance and the default exclusions.
///
/// # Safety
/// `project` must be NUL-terminated and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn revcue_collocator_new(
    project: *const c_char,
    window: usize,
    out: *mut *mut RevcueCollocator,
) -> RevcueStatus {
    guard(|| {
        out_ptr(out)?;
        let project = str_arg(project, "project")?.to_string();
        let window = WindowConfig {
            distance: window,
            ..WindowConfig::default()
        };
        window.validate()?;
        *out = Box::into_raw(Box::new(RevcueCollocator {
            project,
            preprocessor: Preprocessor::new(PreprocessConfig::default()),
            window,
            acc: Accumulator::default(),
        }));
        Ok(())
    })
}

/// Adds one raw comment to the counts.
///
/// # Safety
/// `collocator` must be a live handle and `text` NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn revcue_collocator_add(
    collocator: *mut RevcueCollocator,
    comment_id: *const c_char,
    text: *const c_char,
) -> RevcueStatus {
    guard(|| {
        let c = collocator
            .as_mut()
            .ok_or_else(|| invalid("collocator is null"))?;
        let id = str_arg(comment_id, "comment_id")?;
        let text = str_arg(text, "text")?;
        let stream = c
            .preprocessor
            .preprocess(&Comment::new(id, c.project.clone(), text));
        c.acc.add(&stream, &c.window);
        Ok(())
    })
}

/// Writes the ranked words with at least `min_frequency` pairs as JSON.
///
/// # Safety
/// `collocator` must be a live handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn revcue_collocator_ranked_json(
    collocator: *const RevcueCollocator,
    min_frequency: u64,
    out_json: *mut *mut c_char,
) -> RevcueStatus {
    guard(|| {
        out_ptr(out_json)?;
        let c = collocator
            .as_ref()
            .ok_or_else(|| invalid("collocator is null"))?;
        let table = c.acc.clone().into_table(&c.project, &c.window);
        write_string(out_json, to_json(&rank(&table, min_frequency))?)
    })
}

/// Writes the full count table as JSON.
///
/// # Safety
/// `collocator` must be a live handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn revcue_collocator_table_json(
    collocator: *const RevcueCollocator,
    out_json: *mut *mut c_char,
) -> RevcueStatus {
    guard(|| {
        out_ptr(out_json)?;
        let c = collocator
            .as_ref()
            .ok_or_else(|| invalid("collocator is null"))?;
        let table = c.acc.clone().into_table(&c.project, &c.window);
        write_string(out_json, to_json(&table.to_export())?)
    })
}

/// # Safety
/// `collocator` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn revcue_collocator_free(collocator: *mut RevcueCollocator) {
    if !collocator.is_null() {
        drop(Box::from_raw(collocator));
    }
}
