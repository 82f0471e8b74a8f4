//! Compiles a C program against the generated header and the static
//! library, then runs it.

use std::path::PathBuf;
use std::process::Command;

fn artifact_dir() -> PathBuf {
    // target/<profile>/deps/<test-binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let staticlib = artifact_dir().join("libenetacl_ffi.a");
    assert!(staticlib.exists(), "missing {}", staticlib.display());
    let out = tempfile_path("enetacl_c_program");

    let status = Command::new(&cc)
        .arg(manifest.join("tests/c_program.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&staticlib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("C compiler");
    assert!(status.success(), "C compile failed");

    let run = Command::new(&out)
        .arg(manifest.join("../core/testdata/fixture-engl.json"))
        .output()
        .unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(
        run.status.success(),
        "exit {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    let stdout = String::from_utf8(run.stdout).unwrap();
    assert!(stdout.starts_with("1\tt1:Ident\tbp1\tb1\tpending\n"));
    assert!(stdout.contains("\"transition\":\"t10:LogFile\""));
}

fn tempfile_path(stem: &str) -> PathBuf {
    std::env::temp_dir().join(format!("{stem}-{}", std::process::id()))
}
