//! Calls through the exported C functions exactly as a C caller would.

use std::ffi::{c_char, CStr, CString};
use std::process::Command;
use std::ptr;

use circle_response_ffi::*;

fn preset(name: &str) -> *mut CrMap {
    let name = CString::new(name).unwrap();
    let mut map = ptr::null_mut();
    assert_eq!(unsafe { cr_map_preset(name.as_ptr(), &mut map) }, CrStatus::Ok);
    assert!(!map.is_null());
    map
}

fn context(name: &str, modes: usize, scheme: CrScheme) -> *mut CrContext {
    let map = preset(name);
    let mut ctx = ptr::null_mut();
    let status = unsafe { cr_context_new(map, modes, 8, scheme, &mut ctx) };
    unsafe { cr_map_free(map) };
    assert_eq!(status, CrStatus::Ok, "{}", last_error());
    ctx
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 512];
    unsafe { cr_last_error_message(buf.as_mut_ptr(), buf.len()) };
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

#[test]
fn map_handles_evaluate_and_report_bounds() {
    let map = preset("doubling");
    let mut y = 0.0;
    assert_eq!(unsafe { cr_map_evaluate(map, 0.3, &mut y) }, CrStatus::Ok);
    assert!((y - 0.6).abs() < 1e-15);
    let mut bound = 0.0;
    assert_eq!(unsafe { cr_essential_bound(map, &mut bound) }, CrStatus::Ok);
    assert!((bound - 0.5).abs() < 1e-12);
    unsafe { cr_map_free(map) };
    unsafe { cr_map_free(ptr::null_mut()) };
}

#[test]
fn map_from_json_round_trips_the_preset() {
    let json = circle_response::CircleMap::sticky2x().to_json().unwrap();
    let json = CString::new(json).unwrap();
    let mut map = ptr::null_mut();
    assert_eq!(unsafe { cr_map_from_json(json.as_ptr(), &mut map) }, CrStatus::Ok);
    let mut y = 0.0;
    assert_eq!(unsafe { cr_map_evaluate(map, 0.25, &mut y) }, CrStatus::Ok);
    assert!((y - circle_response::CircleMap::sticky2x().evaluate(0.25)).abs() < 1e-15);
    unsafe { cr_map_free(map) };
}

#[test]
fn errors_map_to_status_codes_with_messages() {
    let name = CString::new("tent").unwrap();
    let mut map = ptr::null_mut();
    assert_eq!(unsafe { cr_map_preset(name.as_ptr(), &mut map) }, CrStatus::InvalidArgument);
    assert!(map.is_null());
    assert!(last_error().contains("tent"));
    assert_eq!(unsafe { cr_map_preset(ptr::null(), &mut map) }, CrStatus::NullPointer);
    assert_eq!(unsafe { cr_map_evaluate(ptr::null(), 0.1, &mut 0.0) }, CrStatus::NullPointer);
    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { cr_map_from_json(bad.as_ptr(), &mut map) }, CrStatus::InvalidArgument);
    let doubling = preset("doubling");
    let mut ctx = ptr::null_mut();
    assert_eq!(unsafe { cr_context_new(doubling, 15, 8, CrScheme::Spectral, &mut ctx) }, CrStatus::InvalidArgument);
    unsafe { cr_map_free(doubling) };
}

#[test]
fn error_message_is_truncated_to_the_buffer() {
    let name = CString::new("no-such-preset").unwrap();
    let mut map = ptr::null_mut();
    unsafe { cr_map_preset(name.as_ptr(), &mut map) };
    let full = unsafe { cr_last_error_message(ptr::null_mut(), 0) };
    let mut buf = [1 as c_char; 8];
    assert_eq!(unsafe { cr_last_error_message(buf.as_mut_ptr(), buf.len()) }, full);
    assert_eq!(buf[7], 0);
    assert_eq!(unsafe { CStr::from_ptr(buf.as_ptr()) }.to_bytes().len(), 7);
}

#[test]
fn doubling_context_spectrum_and_density() {
    let ctx = context("doubling", 32, CrScheme::Spectral);
    let (mut re, mut im) = (vec![0.0; 4], vec![0.0; 4]);
    let mut written = 0;
    assert_eq!(unsafe { cr_spectrum(ctx, re.as_mut_ptr(), im.as_mut_ptr(), 4, &mut written) }, CrStatus::Ok);
    assert_eq!(written, 4);
    assert!((re[0] - 1.0).abs() < 1e-10 && im[0].abs() < 1e-10);
    let mut density = vec![0.0; 64];
    assert_eq!(unsafe { cr_density_samples(ctx, density.as_mut_ptr(), 64) }, CrStatus::Ok);
    assert!(density.iter().all(|v| (v - 1.0).abs() < 1e-10));
    unsafe { cr_context_free(ctx) };
}

#[test]
fn expectation_optimum_through_the_abi() {
    let ctx = context("sticky2x", 128, CrScheme::CentralDifference);
    let cos: Vec<f64> = (0..128).map(|j| (std::f64::consts::TAU * j as f64 / 128.0).cos()).collect();
    let mut tdot = vec![0.0; 256];
    let mut objective = 0.0;
    let status = unsafe { cr_optimize_expectation(ctx, cos.as_ptr(), 128, 1.0, tdot.as_mut_ptr(), 256, &mut objective) };
    assert_eq!(status, CrStatus::Ok, "{}", last_error());
    assert!(objective > 0.0);
    let max = tdot.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(tdot[0].abs() <= 0.05 * max);
    let constant = vec![1.0; 128];
    let status = unsafe { cr_optimize_expectation(ctx, constant.as_ptr(), 128, 1.0, tdot.as_mut_ptr(), 256, &mut objective) };
    assert_eq!(status, CrStatus::Degenerate);
    unsafe { cr_context_free(ctx) };
}

#[test]
fn eigenvalue_optimum_through_the_abi() {
    let ctx = context("gapmap12-smooth", 256, CrScheme::CentralDifference);
    let mut tdot = vec![0.0; 256];
    let mut objective = 0.0;
    let status = unsafe { cr_optimize_eigenvalue(ctx, 1.0, tdot.as_mut_ptr(), 256, &mut objective) };
    assert_eq!(status, CrStatus::Numerical, "no eigenvalue selected yet");
    let mut lambda0 = 0.0;
    assert_eq!(unsafe { cr_context_set_eigenvalue(ctx, 0.7, &mut lambda0) }, CrStatus::Ok, "{}", last_error());
    assert!((lambda0 - 0.6992).abs() < 5e-3);
    assert_eq!(unsafe { cr_optimize_eigenvalue(ctx, 1.0, tdot.as_mut_ptr(), 256, &mut objective) }, CrStatus::Ok);
    assert!(objective > 0.0);
    assert_eq!(unsafe { cr_context_set_eigenvalue(ctx, 0.2, &mut lambda0) }, CrStatus::Numerical);
    unsafe { cr_context_free(ctx) };
}

#[test]
fn version_is_the_package_version() {
    let v = unsafe { CStr::from_ptr(cr_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

const HEADER: &str = include_str!("../include/circle_response.h");

#[test]
fn header_declares_every_exported_function() {
    let source = include_str!("../src/lib.rs");
    let names: Vec<&str> = source
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(names.len() >= 12, "{names:?}");
    for name in names {
        assert!(HEADER.contains(&format!("{name}(")), "{name} missing from header");
    }
    for opaque in ["typedef struct CrMap CrMap;", "typedef struct CrContext CrContext;", "CR_STATUS_PANIC = 6"] {
        assert!(HEADER.contains(opaque), "{opaque}");
    }
}

#[test]
fn header_compiles_as_c_and_cpp() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/circle_response.h");
    for (compiler, lang) in [("cc", "c"), ("c++", "c++")] {
        let out = Command::new(compiler)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang, header])
            .output()
            .unwrap_or_else(|e| panic!("{compiler}: {e}"));
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
}
