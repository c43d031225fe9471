use std::ffi::{CStr, CString};
use std::ptr;

use kacward_ffi::*;

fn triangle() -> *mut KwGraph {
    let xs = [0.0, 1.0, 0.0];
    let ys = [0.0, 0.0, 1.0];
    let us = [0u32, 1, 2];
    let vs = [1u32, 2, 0];
    let w = [0.3, 0.5, 0.7];
    let mut g = ptr::null_mut();
    let s = unsafe { kw_graph_new(3, xs.as_ptr(), ys.as_ptr(), 3, us.as_ptr(), vs.as_ptr(), w.as_ptr(), &mut g) };
    assert_eq!(s, KW_OK);
    g
}

#[test]
fn triangle_partition_and_spin() {
    let g = triangle();
    let mut z = 0.0;
    assert_eq!(unsafe { kw_partition(g, &mut z) }, KW_OK);
    assert!((z - (1.0 + 0.3 * 0.5 * 0.7)).abs() < 1e-14);
    let mut face = 0usize;
    assert_eq!(unsafe { kw_face_at_point(g, 0.2, 0.2, &mut face) }, KW_OK);
    let mut s = 0.0;
    assert_eq!(unsafe { kw_spin_correlation(g, &face, 1, &mut s) }, KW_OK);
    let p = 0.3 * 0.5 * 0.7;
    assert!((s - (1.0 - p) / (1.0 + p)).abs() < 1e-14);
    let labels = [0usize, 1];
    let mut f = 0.0;
    assert_eq!(unsafe { kw_fermion_pfaffian(g, labels.as_ptr(), 2, &mut f) }, KW_OK);
    assert!(f.is_finite());
    unsafe { kw_graph_free(g) };
}

#[test]
fn json_and_torus_handles() {
    let text = CString::new(r#"{"vertices":[{"id":0,"x":0,"y":0},{"id":1,"x":1,"y":0},{"id":2,"x":0,"y":1}],
        "edges":[{"u":0,"v":1,"weight":0.3},{"u":1,"v":2,"weight":0.5},{"u":2,"v":0,"weight":0.7}]}"#)
    .unwrap();
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { kw_graph_from_json(text.as_ptr(), &mut g) }, KW_OK);
    let (mut nv, mut ne, mut nf) = (0, 0, 0);
    assert_eq!(unsafe { kw_graph_size(g, &mut nv, &mut ne, &mut nf) }, KW_OK);
    assert_eq!((nv, ne, nf), (3, 3, 2));
    unsafe { kw_graph_free(g) };

    let mut t = ptr::null_mut();
    assert_eq!(unsafe { kw_graph_torus(2, 2, 0.0001, &mut t) }, KW_OK);
    let (mut hi, mut lo) = (0.0, 0.0);
    assert_eq!(unsafe { kw_torus_partition(t, &mut hi, &mut lo) }, KW_OK);
    assert!((hi - 1.0).abs() < 1e-6 && (lo - 1.0).abs() < 1e-6);
    unsafe { kw_graph_free(t) };
}

#[test]
fn errors_are_codes() {
    let mut g = ptr::null_mut();
    let bad = CString::new("{not json").unwrap();
    assert_eq!(unsafe { kw_graph_from_json(bad.as_ptr(), &mut g) }, KW_ERR_INPUT);
    assert!(g.is_null());
    assert_eq!(unsafe { kw_partition(ptr::null(), ptr::null_mut()) }, KW_ERR_NULL);
    let tri = triangle();
    let mut z = 0.0;
    assert_eq!(unsafe { kw_double_partition(tri, &mut z) }, KW_ERR_INPUT);
    let msg = unsafe { CStr::from_ptr(kw_status_message(KW_ERR_INPUT)) };
    assert_eq!(msg.to_str().unwrap(), "invalid input");
    // crossing edges
    let xs = [0.0, 1.0, 1.0, 0.0];
    let ys = [0.0, 1.0, 0.0, 1.0];
    let (us, vs, w) = ([0u32, 2], [1u32, 3], [0.5, 0.5]);
    let mut c = ptr::null_mut();
    let s = unsafe { kw_graph_new(4, xs.as_ptr(), ys.as_ptr(), 2, us.as_ptr(), vs.as_ptr(), w.as_ptr(), &mut c) };
    assert_eq!(s, KW_ERR_INPUT);
    unsafe { kw_graph_free(tri) };
}

#[test]
fn header_lists_the_exports() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/kacward.h")).unwrap();
    for f in ["kw_graph_new", "kw_graph_free", "kw_partition", "kw_spin_correlation", "kw_torus_partition", "typedef struct KwGraph KwGraph"] {
        assert!(h.contains(f), "{f}");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = std::env::temp_dir().join("kacward_header_check");
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"kacward.h\"\nint main(void) { KwGraph *g = 0; double z; return kw_partition(g, &z) == KW_ERR_NULL ? 0 : 1; }\n",
    )
    .unwrap();
    let include = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let status = std::process::Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", include]).arg(&src).status();
    match status {
        Ok(s) => assert!(s.success()),
        Err(e) => eprintln!("no C compiler, header syntax unchecked: {e}"),
    }
}
