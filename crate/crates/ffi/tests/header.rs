use std::path::Path;
use std::process::Command;

fn header() -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/wavestab.h")).unwrap()
}

#[test]
fn header_declares_the_api() {
    let h = header();
    for name in [
        "ws_last_error",
        "ws_wave_new",
        "ws_wave_free",
        "ws_wave_kappa",
        "ws_wave_dispersion_roots",
        "ws_wave_ind1",
        "ws_wave_ind2",
        "ws_wave_bubble_max",
        "ws_find_kappa1",
        "ws_find_kappa2",
        "typedef struct WsWave WsWave",
        "WS_STATUS_DOMAIN = 2",
    ] {
        assert!(h.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let src = std::env::temp_dir().join("wavestab_header_check.c");
    std::fs::write(&src, "#include \"wavestab.h\"\nint main(void) { double k; return ws_find_kappa1(&k) == WS_STATUS_OK ? 0 : 1; }\n").unwrap();
    let Ok(out) = Command::new("cc").arg("-fsyntax-only").arg("-I").arg(&dir).arg(&src).output() else {
        eprintln!("no C compiler; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
