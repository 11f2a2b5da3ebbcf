use std::ffi::{CStr, CString};
use std::ptr;

use tropmetzler_ffi::*;

const GRAPH: &str = include_str!("../../core/fixtures/example_graph.json");

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(tm_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn load() -> *mut TmGame {
    let mut game = ptr::null_mut();
    let status = unsafe { tm_game_from_json(c(GRAPH).as_ptr(), &mut game) };
    assert_eq!(status, TmStatus::Ok, "{}", last_error());
    game
}

#[test]
fn evaluates_example_graph() {
    let game = load();
    unsafe {
        assert_eq!(tm_game_dim(game), 3);
        let mut out = ptr::null_mut();
        assert_eq!(
            tm_game_eval(game, c("0,0,0").as_ptr(), &mut out),
            TmStatus::Ok
        );
        let s = CStr::from_ptr(out).to_str().unwrap().to_owned();
        tm_string_free(out);
        assert_eq!(s, r#"["4/3","6283185307/1000000000","0/1"]"#);

        let mut sub = false;
        assert_eq!(
            tm_game_subfixed(game, c("0,0,0").as_ptr(), &mut sub),
            TmStatus::Ok
        );
        assert!(sub);
        assert_eq!(
            tm_game_subfixed(game, c("2,0,0").as_ptr(), &mut sub),
            TmStatus::Ok
        );
        assert!(!sub);
        assert_eq!(
            tm_game_subfixed(game, c("-inf,0,0").as_ptr(), &mut sub),
            TmStatus::Ok
        );
        tm_game_free(game);
    }
}

#[test]
fn synthesized_pencil_agrees_with_operator() {
    let game = load();
    unsafe {
        let mut pencil = ptr::null_mut();
        assert_eq!(
            tm_game_synthesize(game, &mut pencil),
            TmStatus::Ok,
            "{}",
            last_error()
        );
        assert_eq!(tm_pencil_visible(pencil), 3);
        assert!(tm_pencil_vars(pencil) > 3);
        for point in ["0,0,0", "-3,0,0", "2,0,0", "0,-5,0", "2,2,0", "1,7,0"] {
            let (mut a, mut b) = (false, false);
            assert_eq!(
                tm_game_subfixed(game, c(point).as_ptr(), &mut a),
                TmStatus::Ok
            );
            assert_eq!(
                tm_pencil_member_visible(pencil, c(point).as_ptr(), &mut b),
                TmStatus::Ok
            );
            assert_eq!(a, b, "{point}");
        }
        tm_pencil_free(pencil);
        tm_game_free(game);
    }
}

#[test]
fn pencil_documents_round_trip() {
    let doc = r#"{"m":1,"n":1,"matrices":[[[{"sign":1,"abs":"0/1"}]],[[{"sign":-1,"abs":"0/1"}]]],"visible":1}"#;
    unsafe {
        let mut pencil = ptr::null_mut();
        let status = tm_pencil_from_json(c(doc).as_ptr(), &mut pencil);
        assert_eq!(status, TmStatus::Ok, "{}", last_error());
        let mut member = false;
        assert_eq!(
            tm_pencil_member(pencil, c("-1").as_ptr(), &mut member),
            TmStatus::Ok
        );
        assert!(member);
        assert_eq!(
            tm_pencil_member(pencil, c("1").as_ptr(), &mut member),
            TmStatus::Ok
        );
        assert!(!member);
        assert_eq!(
            tm_pencil_member_visible(pencil, c("0").as_ptr(), &mut member),
            TmStatus::Precondition
        );

        let mut out = ptr::null_mut();
        assert_eq!(tm_pencil_to_json(pencil, &mut out), TmStatus::Ok);
        let text = CStr::from_ptr(out).to_str().unwrap().to_owned();
        tm_string_free(out);
        let mut again = ptr::null_mut();
        assert_eq!(
            tm_pencil_from_json(c(&text).as_ptr(), &mut again),
            TmStatus::Ok
        );
        assert_eq!(tm_pencil_vars(again), 1);
        tm_pencil_free(again);
        tm_pencil_free(pencil);
    }
}

#[test]
fn errors_carry_codes_and_messages() {
    unsafe {
        let mut game = ptr::null_mut();
        assert_eq!(
            tm_game_from_json(ptr::null(), &mut game),
            TmStatus::NullPointer
        );
        assert_eq!(
            tm_game_from_json(c("{").as_ptr(), &mut game),
            TmStatus::Parse
        );
        assert!(last_error().contains("JSON"));
        assert!(game.is_null());

        let game = load();
        assert_eq!(last_error(), "");
        let mut out = ptr::null_mut();
        assert_eq!(
            tm_game_eval(game, c("0,0").as_ptr(), &mut out),
            TmStatus::Dimension
        );
        assert_eq!(
            tm_game_eval(game, c("0,0,0").as_ptr(), ptr::null_mut()),
            TmStatus::NullPointer
        );
        assert_eq!(tm_game_dim(ptr::null()), 0);
        tm_game_free(ptr::null_mut());
        tm_string_free(ptr::null_mut());
        tm_game_free(game);
    }
}

#[test]
fn header_declares_every_export() {
    let header = include_str!("../include/tropmetzler.h");
    let source = include_str!("../src/lib.rs");
    for line in source.lines() {
        if let Some(rest) = line.split("extern \"C\" fn ").nth(1) {
            let name = rest.split('(').next().unwrap();
            assert!(
                header.contains(&format!("{name}(")),
                "{name} missing from header"
            );
        }
    }
    assert!(header.contains("typedef struct TmGame TmGame;"));
    assert!(header.contains("TM_STATUS_OK = 0"));
}
