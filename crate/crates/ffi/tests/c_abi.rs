use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use dce_ffi::*;

const FILL_STR: &str = "def fill_str(Data):\n  s1 = input()\n  s2 = s1 + '<PAD>'\n  s3 = s1 + '<EOS>'\n  if len(s2) == 0:\n    print('Empty string')\n    Data.pad_str = None\n    Data.eos_str = None\n  else:\n    Data.pad_str = s2\n    Data.eos_str = 's3'\nfill_str(object())\n";

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

/// Takes ownership of a library string.
unsafe fn take(s: *mut libc::c_char) -> String {
    assert!(!s.is_null());
    let out = CStr::from_ptr(s).to_str().unwrap().to_string();
    dce_string_free(s);
    out
}

unsafe fn last_error() -> String {
    let p = dce_last_error();
    assert!(!p.is_null());
    CStr::from_ptr(p).to_string_lossy().into_owned()
}

unsafe fn snippet(code: &str, lang: &str) -> *mut DceSnippet {
    let mut s = ptr::null_mut();
    assert_eq!(
        dce_snippet_new(c(code).as_ptr(), c(lang).as_ptr(), &mut s),
        DceStatus::Ok
    );
    s
}

#[test]
fn oracle_findings_roundtrip() {
    unsafe {
        let s = snippet(FILL_STR, "python");
        assert_eq!(dce_snippet_len(s), 12);
        let mut out = ptr::null_mut();
        assert_eq!(dce_oracle_findings_json(s, &mut out), DceStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v[0]["index"], 4);
        assert_eq!(v[0]["type"], "unused");
        assert!(dce_last_error().is_null());
        dce_snippet_free(s);
    }
}

#[test]
fn attribution_and_bad_tau() {
    unsafe {
        let s = snippet(FILL_STR, "py");
        let mut out = ptr::null_mut();
        assert_eq!(dce_attribute_json(s, 2.0, 0.02, &mut out), DceStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["scores"].as_array().unwrap().len(), 12);
        assert_eq!(v["candidates"]["tau"], 2.0);

        let mut out = ptr::null_mut();
        assert_eq!(dce_attribute_json(s, 0.5, 0.02, &mut out), DceStatus::InvalidArgument);
        assert!(out.is_null());
        assert!(last_error().contains("tau"));
        dce_snippet_free(s);
    }
}

#[test]
fn argument_errors() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(
            dce_snippet_new(ptr::null(), c("python").as_ptr(), &mut s),
            DceStatus::NullArgument
        );
        assert!(last_error().contains("code"));
        assert_eq!(
            dce_snippet_new(c("x = 1\n").as_ptr(), c("cobol").as_ptr(), &mut s),
            DceStatus::InvalidArgument
        );
        assert_eq!(
            dce_snippet_new(c("x = 1\n").as_ptr(), c("python").as_ptr(), ptr::null_mut()),
            DceStatus::NullArgument
        );
        let bad = [0xffu8, 0];
        assert_eq!(
            dce_snippet_new(bad.as_ptr().cast(), c("python").as_ptr(), &mut s),
            DceStatus::InvalidUtf8
        );
        assert!(s.is_null());

        let mut out = ptr::null_mut();
        assert_eq!(dce_oracle_findings_json(ptr::null(), &mut out), DceStatus::NullArgument);
        assert_eq!(dce_snippet_len(ptr::null()), 0);
        // freeing NULL is a no-op
        dce_snippet_free(ptr::null_mut());
        dce_pipeline_free(ptr::null_mut());
        dce_string_free(ptr::null_mut());
    }
}

#[test]
fn pipeline_without_llm() {
    unsafe {
        let mut p = ptr::null_mut();
        let cfg = c("[pipeline]\nmode = \"no_llm\"\ntimings = false\n");
        assert_eq!(dce_pipeline_new(cfg.as_ptr(), &mut p), DceStatus::Ok);
        let s = snippet(FILL_STR, "python");
        let mut out = ptr::null_mut();
        assert_eq!(
            dce_pipeline_analyze_json(p, c("fill_str").as_ptr(), s, &mut out),
            DceStatus::Ok
        );
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["record_id"], "fill_str");
        assert_eq!(v["mode"], "no_llm");
        assert_eq!(v["llm_calls"], 0);
        assert!(v.get("timings").is_none());
        dce_snippet_free(s);
        dce_pipeline_free(p);

        let mut p = ptr::null_mut();
        assert_eq!(dce_pipeline_new(c("tua = 2\n").as_ptr(), &mut p), DceStatus::Config);
        assert!(p.is_null());
        assert_eq!(
            dce_pipeline_new(c("[pipeline]\ntau = 0.5\n").as_ptr(), &mut p),
            DceStatus::Config
        );
        assert!(last_error().contains("tau"));
    }
}

#[test]
fn audit_with_gold() {
    unsafe {
        let s = snippet(FILL_STR, "python");
        let fixed = FILL_STR.replace("  s3 = s1 + '<EOS>'\n", "");
        let mut out = ptr::null_mut();
        let gold = c(r#"[{"index": 4, "type": "unused"}]"#);
        assert_eq!(
            dce_audit_json(s, c(&fixed).as_ptr(), gold.as_ptr(), &mut out),
            DceStatus::Ok
        );
        let v: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
        assert_eq!(v["removed_all_gold"], true);
        assert_eq!(v["diff_confinement"], 1.0);

        assert_eq!(
            dce_audit_json(s, c(&fixed).as_ptr(), c("[4]").as_ptr(), &mut out),
            DceStatus::InvalidArgument
        );
        dce_snippet_free(s);
    }
}

#[test]
fn version_is_static() {
    let v = unsafe { CStr::from_ptr(dce_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// The generated header compiles as C and declares every entry point.
#[test]
fn header_compiles() {
    let header = Path::new(env!("CARGO_MANIFEST_DIR")).join("include/dce.h");
    let text = std::fs::read_to_string(&header).unwrap();
    for f in [
        "dce_snippet_new",
        "dce_snippet_free",
        "dce_oracle_findings_json",
        "dce_attribute_json",
        "dce_pipeline_new",
        "dce_pipeline_analyze_json",
        "dce_audit_json",
        "dce_last_error",
        "dce_string_free",
    ] {
        assert!(text.contains(&format!("{f}(")), "{f} missing");
    }
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping compile check");
        return;
    }
    let dir = tempfile_dir();
    let src = dir.join("use.c");
    std::fs::write(
        &src,
        "#include \"dce.h\"\nint main(void) {\n  DceSnippet *s = 0;\n  char *json = 0;\n  if (dce_snippet_new(\"x = 1\\n\", \"python\", &s) != DCE_STATUS_OK) return 1;\n  dce_oracle_findings_json(s, &json);\n  dce_string_free(json);\n  dce_snippet_free(s);\n  return 0;\n}\n",
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header.parent().unwrap())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("dce-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
