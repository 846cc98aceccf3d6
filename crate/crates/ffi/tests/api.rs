use std::ffi::{CStr, CString};
use std::ptr;

use perforated_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(pf_last_error()) }.to_string_lossy().into_owned()
}

const ANNULUS: &str = "[forcing]\nkind = constant\nvalue = 4\n[inclusion]\nshape = disk\nbase_center = 0, 0\n[sweep]\neps = 0.05\n";

#[test]
fn ellipse_map_round_trip() {
    let shape = CString::new("ellipse:1,2,2").unwrap();
    let mut map = ptr::null_mut();
    unsafe {
        assert_eq!(pf_map_new(shape.as_ptr(), 32, &mut map), PfStatus::Ok);
        let mut beta = 0.0;
        assert_eq!(pf_map_beta(map, &mut beta), PfStatus::Ok);
        // beta = 2 / (c (1/a + 1/b))
        assert!((beta - 2.0 / 3.0).abs() < 1e-14);
        let (mut zr, mut zi, mut wr, mut wi) = (0.0, 0.0, 0.0, 0.0);
        assert_eq!(pf_map_inverse(map, 1.3, -0.4, &mut zr, &mut zi), PfStatus::Ok);
        assert_eq!(pf_map_forward(map, zr, zi, &mut wr, &mut wi), PfStatus::Ok);
        assert!((wr - 1.3).abs() < 1e-12 && (wi + 0.4).abs() < 1e-12);
        // a point inside the inclusion is a domain error
        assert_eq!(pf_map_forward(map, 0.1, 0.0, &mut wr, &mut wi), PfStatus::Domain);
        assert!(last_error().contains("inside"), "{}", last_error());
        pf_map_free(map);
    }
}

#[test]
fn annulus_expansion_matches_closed_form_and_reference() {
    let text = CString::new(ANNULUS).unwrap();
    let mut scene = ptr::null_mut();
    unsafe {
        assert_eq!(pf_scene_from_str(text.as_ptr(), &mut scene), PfStatus::Ok);
        let mut n = 0;
        assert_eq!(pf_scene_inclusion_count(scene, &mut n), PfStatus::Ok);
        assert_eq!(n, 1);
        let eps = 0.05f64;
        let mut e = ptr::null_mut();
        assert_eq!(pf_expand(scene, eps, 2, &mut e), PfStatus::Ok);
        let mut order = 0;
        assert_eq!(pf_expansion_order(e, &mut order), PfStatus::Ok);
        assert_eq!(order, 2);
        let mut r = ptr::null_mut();
        assert_eq!(pf_reference_solve(scene, eps, &mut r), PfStatus::Ok);
        let (x, y) = (0.3, 0.4);
        let exact = 1.0 - 0.25 - (1.0 - eps * eps) * 0.5f64.ln() / eps.ln();
        let (mut u, mut v) = (0.0, 0.0);
        assert_eq!(pf_expansion_evaluate(e, x, y, 2, &mut u), PfStatus::Ok);
        assert_eq!(pf_reference_evaluate(r, x, y, &mut v), PfStatus::Ok);
        assert!((u - exact).abs() < 1e-10 && (v - exact).abs() < 1e-8, "{u} {v} {exact}");
        assert_eq!(pf_expansion_evaluate(e, x, y, 3, &mut u), PfStatus::InvalidInput);

        let mut res = 0.0;
        assert_eq!(pf_expansion_residual(e, 1, &mut res), PfStatus::Ok);
        assert!(res < 1e-10);

        let mut written = 0;
        assert_eq!(pf_expansion_coefficients(e, ptr::null_mut(), 0, &mut written), PfStatus::BufferTooSmall);
        assert_eq!(written, 1);
        let mut buf = [0.0; 1];
        assert_eq!(pf_expansion_coefficients(e, buf.as_mut_ptr(), 1, &mut written), PfStatus::Ok);
        assert!(buf[0] != 0.0);

        pf_reference_free(r);
        pf_expansion_free(e);
        pf_scene_free(scene);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut scene = ptr::null_mut();
        let bad = CString::new(ANNULUS.replace("base_center = 0, 0", "base_center = 0, 0\nexponent = 1.5")).unwrap();
        assert_eq!(pf_scene_from_str(bad.as_ptr(), &mut scene), PfStatus::Config);
        assert!(last_error().contains("line 7"), "{}", last_error());
        assert!(scene.is_null());

        let missing = CString::new("/nonexistent.cfg").unwrap();
        assert_eq!(pf_scene_from_file(missing.as_ptr(), &mut scene), PfStatus::Io);

        assert_eq!(pf_scene_from_str(ptr::null(), &mut scene), PfStatus::NullPointer);
        let mut beta = 0.0;
        assert_eq!(pf_map_beta(ptr::null(), &mut beta), PfStatus::NullPointer);

        let shape = CString::new("hexagon").unwrap();
        let mut map = ptr::null_mut();
        assert_eq!(pf_map_new(shape.as_ptr(), 8, &mut map), PfStatus::InvalidInput);

        let text = CString::new(ANNULUS).unwrap();
        assert_eq!(pf_scene_from_str(text.as_ptr(), &mut scene), PfStatus::Ok);
        let mut e = ptr::null_mut();
        assert_eq!(pf_expand(scene, 2.0, 1, &mut e), PfStatus::InvalidInput);
        pf_scene_free(scene);

        // freeing null is a no-op
        pf_scene_free(ptr::null_mut());
        pf_map_free(ptr::null_mut());
        pf_expansion_free(ptr::null_mut());
        pf_reference_free(ptr::null_mut());
    }
}

#[test]
fn validate_through_ffi() {
    let mut passed = 0;
    assert_eq!(unsafe { pf_validate(4, &mut passed) }, PfStatus::Ok);
    assert_eq!(passed, 1);
}
