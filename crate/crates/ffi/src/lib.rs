//! C interface to `tropmetzler`.
//!
//! Games and pencils are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`TmStatus`]; on failure `tm_last_error` describes the problem. Numbers
//! cross the boundary as text (`"3/4"`, `"-inf"`) so that nothing is rounded.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use tropmetzler::game::Game;
use tropmetzler::harness;
use tropmetzler::pencil::{synthesize_from_game, ProjectedPencil};
use tropmetzler::rational::format_rational;
use tropmetzler::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Dimension = 4,
    Validation = 5,
    Singular = 6,
    NotCompliant = 7,
    InvalidPencil = 8,
    Precondition = 9,
    Other = 10,
    Panic = 11,
}

impl From<&Error> for TmStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::Parse(_) => TmStatus::Parse,
            Error::DimensionMismatch { .. } | Error::ArityMismatch { .. } => TmStatus::Dimension,
            Error::ValidationFailed(_) | Error::NonStochastic(_) => TmStatus::Validation,
            Error::SingularSystem(_) => TmStatus::Singular,
            Error::NotCompliant(_) => TmStatus::NotCompliant,
            Error::InvalidPencil(_) | Error::MixedSigns => TmStatus::InvalidPencil,
            Error::PreconditionViolated(_) => TmStatus::Precondition,
            _ => TmStatus::Other,
        }
    }
}

/// A validated game graph together with its absorption table.
pub struct TmGame {
    game: Game,
}

/// A pencil, possibly with hidden variables and a lift of visible points.
pub struct TmPencil {
    pencil: ProjectedPencil,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: TmStatus, msg: &str) -> TmStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> Result<(), TmStatus>) -> TmStatus {
    set_error("");
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TmStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(TmStatus::Panic, "internal panic"),
    }
}

fn lib(e: Error) -> TmStatus {
    fail(TmStatus::from(&e), &e.to_string())
}

unsafe fn text<'a>(p: *const c_char) -> Result<&'a str, TmStatus> {
    if p.is_null() {
        return Err(fail(TmStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(TmStatus::InvalidUtf8, "argument is not UTF-8"))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, TmStatus> {
    p.as_ref()
        .ok_or_else(|| fail(TmStatus::NullPointer, "null handle"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), TmStatus> {
    if out.is_null() {
        return Err(fail(TmStatus::NullPointer, "null output pointer"));
    }
    out.write(value);
    Ok(())
}

fn c_string(s: String) -> *mut c_char {
    CString::new(s).map_or(ptr::null_mut(), CString::into_raw)
}

/// Message of the last failed call on this thread, or an empty string. The
/// pointer stays valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn tm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses a graph document or a min-max operator document and validates it.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tm_game_from_json(json: *const c_char, out: *mut *mut TmGame) -> TmStatus {
    guard(|| {
        let graph = harness::parse_graph_or_operator(text(json)?).map_err(lib)?;
        let game = Game::new(graph).map_err(lib)?;
        write(out, Box::into_raw(Box::new(TmGame { game })))
    })
}

/// Releases a game. Null is ignored.
///
/// # Safety
/// `game` must come from `tm_game_from_json` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tm_game_free(game: *mut TmGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Number of Min vertices, i.e. the dimension of the operator; 0 for null.
///
/// # Safety
/// `game` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tm_game_dim(game: *const TmGame) -> usize {
    game.as_ref().map_or(0, |g| g.game.dim())
}

/// Evaluates the operator at a comma-separated rational point. The image is
/// returned as a JSON array of strings, to be released with `tm_string_free`.
///
/// # Safety
/// `game` must be a live handle, `point` a NUL-terminated string and `out`
/// a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tm_game_eval(
    game: *const TmGame,
    point: *const c_char,
    out: *mut *mut c_char,
) -> TmStatus {
    guard(|| {
        let game = handle(game)?;
        let x = harness::parse_point(text(point)?).map_err(lib)?;
        let fx = game.game.eval(&x).map_err(lib)?;
        let items: Vec<String> = fx
            .iter()
            .map(|v| format!("\"{}\"", format_rational(v)))
            .collect();
        write(out, c_string(format!("[{}]", items.join(","))))
    })
}

/// Tests `x ≤ F(x)` for a comma-separated point; `-inf` coordinates are
/// allowed.
///
/// # Safety
/// As for `tm_game_eval`.
#[no_mangle]
pub unsafe extern "C" fn tm_game_subfixed(
    game: *const TmGame,
    point: *const c_char,
    out: *mut bool,
) -> TmStatus {
    guard(|| {
        let game = handle(game)?;
        let x = harness::parse_trop_point(text(point)?).map_err(lib)?;
        let r = game.game.subfixed_trop(&x).map_err(lib)?;
        write(out, r)
    })
}

/// Builds the projected pencil whose visible part is the set of points with
/// `x ≤ F(x)`.
///
/// # Safety
/// `game` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tm_game_synthesize(
    game: *const TmGame,
    out: *mut *mut TmPencil,
) -> TmStatus {
    guard(|| {
        let game = handle(game)?;
        let pencil = synthesize_from_game(game.game.graph()).map_err(lib)?;
        write(out, Box::into_raw(Box::new(TmPencil { pencil })))
    })
}

/// Reads a pencil document. Such a pencil has no lift, so only
/// `tm_pencil_member` applies to it.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tm_pencil_from_json(
    json: *const c_char,
    out: *mut *mut TmPencil,
) -> TmStatus {
    guard(|| {
        let pencil = harness::parse_pencil(text(json)?).map_err(lib)?;
        write(out, Box::into_raw(Box::new(TmPencil { pencil })))
    })
}

/// Releases a pencil. Null is ignored.
///
/// # Safety
/// `pencil` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tm_pencil_free(pencil: *mut TmPencil) {
    if !pencil.is_null() {
        drop(Box::from_raw(pencil));
    }
}

/// Total number of variables; 0 for null.
///
/// # Safety
/// `pencil` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tm_pencil_vars(pencil: *const TmPencil) -> usize {
    pencil.as_ref().map_or(0, |p| p.pencil.pencil().vars())
}

/// Number of leading visible variables; 0 for null.
///
/// # Safety
/// `pencil` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn tm_pencil_visible(pencil: *const TmPencil) -> usize {
    pencil.as_ref().map_or(0, |p| p.pencil.visible())
}

/// Membership of a point given on all variables.
///
/// # Safety
/// `pencil` must be a live handle, `point` a NUL-terminated string and `out`
/// a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tm_pencil_member(
    pencil: *const TmPencil,
    point: *const c_char,
    out: *mut bool,
) -> TmStatus {
    guard(|| {
        let p = handle(pencil)?;
        let x = harness::parse_trop_point(text(point)?).map_err(lib)?;
        let r = p.pencil.pencil().member(&x).map_err(lib)?;
        write(out, r)
    })
}

/// Membership of a point given on the visible variables, decided by lifting
/// it to all variables. Fails with `TM_STATUS_PRECONDITION` when the pencil
/// carries no lift.
///
/// # Safety
/// As for `tm_pencil_member`.
#[no_mangle]
pub unsafe extern "C" fn tm_pencil_member_visible(
    pencil: *const TmPencil,
    point: *const c_char,
    out: *mut bool,
) -> TmStatus {
    guard(|| {
        let p = handle(pencil)?;
        if !p.pencil.has_lift() {
            return Err(fail(TmStatus::Precondition, "pencil has no lift"));
        }
        let x = harness::parse_trop_point(text(point)?).map_err(lib)?;
        let r = p.pencil.member_via_lift(&x).map_err(lib)?;
        write(out, r)
    })
}

/// Serializes a pencil as a JSON document, to be released with
/// `tm_string_free`.
///
/// # Safety
/// `pencil` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn tm_pencil_to_json(
    pencil: *const TmPencil,
    out: *mut *mut c_char,
) -> TmStatus {
    guard(|| {
        let p = handle(pencil)?;
        let doc = p.pencil.to_document();
        let s = serde_json::to_string(&doc).map_err(|e| fail(TmStatus::Other, &e.to_string()))?;
        write(out, c_string(s))
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
