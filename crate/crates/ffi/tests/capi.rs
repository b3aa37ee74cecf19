use std::ffi::{c_char, CStr};
use std::path::Path;
use std::process::Command;
use std::ptr;

use imverde_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as c_char; 256];
    unsafe { imv_last_error(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

fn karate() -> *mut ImvGraph {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { imv_graph_karate(&mut g) }, ImvStatus::Ok);
    g
}

#[test]
fn graph_from_edges_and_size() {
    let src = [0usize, 1, 2];
    let dst = [1usize, 2, 3];
    let mut g = ptr::null_mut();
    let s = unsafe {
        imv_graph_from_edges(4, src.as_ptr(), dst.as_ptr(), ptr::null(), 3, false, &mut g)
    };
    assert_eq!(s, ImvStatus::Ok);
    let (mut n, mut m) = (0, 0);
    assert_eq!(unsafe { imv_graph_size(g, &mut n, &mut m) }, ImvStatus::Ok);
    assert_eq!((n, m), (4, 3));
    unsafe { imv_graph_free(g) };
}

#[test]
fn bad_edges_set_error_message() {
    let src = [0usize];
    let dst = [9usize];
    let mut g = ptr::null_mut();
    let s = unsafe {
        imv_graph_from_edges(4, src.as_ptr(), dst.as_ptr(), ptr::null(), 1, false, &mut g)
    };
    assert_eq!(s, ImvStatus::InvalidInput);
    assert!(g.is_null());
    assert!(!last_error().is_empty());
}

#[test]
fn null_pointers_are_rejected() {
    assert_eq!(
        unsafe { imv_graph_karate(ptr::null_mut()) },
        ImvStatus::NullPointer
    );
    let (mut n, mut m) = (0, 0);
    assert_eq!(
        unsafe { imv_graph_size(ptr::null(), &mut n, &mut m) },
        ImvStatus::NullPointer
    );
    assert!(last_error().contains("graph"));
    unsafe {
        imv_graph_free(ptr::null_mut());
        imv_model_free(ptr::null_mut());
    }
}

#[test]
fn walks_are_seeded_and_follow_edges() {
    let g = karate();
    let mut a = [0usize; 11];
    let mut b = [0usize; 11];
    for p in [&mut a, &mut b] {
        let s = unsafe {
            imv_walk(
                g,
                ImvVisiting::Exponential,
                0.7,
                0,
                10,
                42,
                p.as_mut_ptr(),
                p.len(),
            )
        };
        assert_eq!(s, ImvStatus::Ok);
    }
    assert_eq!(a, b);
    assert_eq!(a[0], 0);
    let short = unsafe { imv_walk(g, ImvVisiting::Constant, 0.0, 0, 10, 1, a.as_mut_ptr(), 5) };
    assert_eq!(short, ImvStatus::BufferTooSmall);
    let bad_alpha = unsafe {
        imv_walk(
            g,
            ImvVisiting::Exponential,
            1.5,
            0,
            10,
            1,
            a.as_mut_ptr(),
            a.len(),
        )
    };
    assert_eq!(bad_alpha, ImvStatus::InvalidInput);
    unsafe { imv_graph_free(g) };
}

#[test]
fn train_then_query_model() {
    let g = karate();
    let mut opts = std::mem::MaybeUninit::uninit();
    assert_eq!(
        unsafe { imv_train_options_default(opts.as_mut_ptr()) },
        ImvStatus::Ok
    );
    let mut opts = unsafe { opts.assume_init() };
    assert_eq!(opts.dim, 50);
    opts.dim = 8;
    opts.hidden = 8;
    opts.iters_unsup = 20;
    opts.iters_sup = 20;
    let labeled = [0usize, 33, 1, 32];
    let test = [2usize, 31, 3, 30];
    let mut m = ptr::null_mut();
    let s = unsafe {
        imv_train(
            g,
            labeled.as_ptr(),
            4,
            test.as_ptr(),
            4,
            1,
            &opts,
            7,
            &mut m,
        )
    };
    assert_eq!(s, ImvStatus::Ok, "{}", last_error());
    let (mut n, mut d, mut c) = (0, 0, 0);
    assert_eq!(
        unsafe { imv_model_shape(m, &mut n, &mut d, &mut c) },
        ImvStatus::Ok
    );
    assert_eq!((n, d, c), (34, 8, 2));
    let mut e = [0.0; 8];
    assert_eq!(
        unsafe { imv_model_embedding(m, 5, e.as_mut_ptr(), 8) },
        ImvStatus::Ok
    );
    assert!(e.iter().all(|x| x.is_finite()) && e.iter().any(|&x| x != 0.0));
    let mut p = [0.0; 2];
    assert_eq!(
        unsafe { imv_model_predict(m, g, 5, p.as_mut_ptr(), 2) },
        ImvStatus::Ok
    );
    assert!((p[0] + p[1] - 1.0).abs() < 1e-12);
    assert_eq!(
        unsafe { imv_model_embedding(m, 99, e.as_mut_ptr(), 8) },
        ImvStatus::InvalidInput
    );
    unsafe {
        imv_model_free(m);
        imv_graph_free(g);
    }
}

#[test]
fn divergent_training_reports_numeric() {
    let g = karate();
    let mut opts = std::mem::MaybeUninit::uninit();
    unsafe { imv_train_options_default(opts.as_mut_ptr()) };
    let mut opts = unsafe { opts.assume_init() };
    opts.lr_unsup = 1e200;
    opts.iters_unsup = 50;
    opts.iters_sup = 0;
    let labeled = [0usize, 33];
    let mut m = ptr::null_mut();
    let s = unsafe { imv_train(g, labeled.as_ptr(), 2, ptr::null(), 0, 1, &opts, 1, &mut m) };
    assert_eq!(s, ImvStatus::Numeric);
    assert!(m.is_null());
    unsafe { imv_graph_free(g) };
}

#[test]
fn metrics_match_hand_values() {
    let scores = [0.9, 0.8, 0.7, 0.6];
    let labels = [1u8, 0, 1, 0];
    let mut auc = 0.0;
    let mut ap = 0.0;
    assert_eq!(
        unsafe { imv_roc_auc(scores.as_ptr(), labels.as_ptr(), 4, &mut auc) },
        ImvStatus::Ok
    );
    assert_eq!(
        unsafe { imv_average_precision(scores.as_ptr(), labels.as_ptr(), 4, &mut ap) },
        ImvStatus::Ok
    );
    assert_eq!(auc, 0.75);
    assert!((ap - (1.0 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
    let one_class = [1u8; 4];
    let s = unsafe { imv_roc_auc(scores.as_ptr(), one_class.as_ptr(), 4, &mut auc) };
    assert_eq!(s, ImvStatus::InvalidInput);
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(imv_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api_and_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/imverde.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "imv_graph_karate",
        "imv_train",
        "imv_model_embedding",
        "imv_last_error",
        "IMV_STATUS_NUMERIC",
    ] {
        assert!(text.contains(f), "{f}");
    }
    let Ok(out) = Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(&header)
        .output()
    else {
        eprintln!("no C compiler; syntax check skipped");
        return;
    };
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
