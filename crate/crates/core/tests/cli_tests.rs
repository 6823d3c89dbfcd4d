use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn trilie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trilie")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn error_kind(o: &Output) -> String {
    assert!(!o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)));
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn data_files() {
    let o = trilie(&["check", "--input", &data("e2.json")]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("solvable: yes, triangular: no, witness e1"), "{}", stdout(&o));
    let o = trilie(&["mul", "--input", &data("af1.json"), "e2*e1"]);
    assert_eq!(stdout(&o), "e1*e2 - e2\n");
    let o = trilie(&["check", "--input", &data("heisenberg.json")]);
    assert!(stdout(&o).contains("nilpotent: yes"), "{}", stdout(&o));
    let o = trilie(&["sheaf", "--input", &data("cover_glue.json"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ok"], true);
    let o = trilie(&["sheaf", "--input", &data("cover_mismatch.json"), "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["ok"], false);
    assert_eq!(v["witness"]["beta"], serde_json::json!([1]));
}

#[test]
fn malformed_inputs_give_structured_errors() {
    let dir = std::env::temp_dir().join(format!("trilie-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let write = |name: &str, body: &str| {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p.to_string_lossy().into_owned()
    };
    let cases = [
        write("empty.json", ""),
        write("truncated.json", "{\"dim\": 3, \"brackets\": ["),
        write("wrong.json", "{\"dim\": \"three\"}"),
        write("index.json", "{\"dim\": 2, \"brackets\": [{\"i\": 1, \"j\": 7, \"c\": {\"1\": \"1\"}}]}"),
        write("binary.json", "\u{0}\u{1}\u{2}"),
        write("cover.json", "{\"algebra\": \"heisenberg\", \"N\": 2, \"sections\": [{\"region\": {\"boxes\": [[[\"1\", \"0\"]]]}, \"element\": \"e1\"}]}"),
    ];
    for path in &cases {
        for cmd in ["check", "adapt", "sheaf"] {
            let o = trilie(&[cmd, "--input", path]);
            assert_eq!(o.status.code(), Some(1), "{cmd} {path}");
            assert!(!error_kind(&o).is_empty());
        }
    }
    let o = trilie(&["check", "--input", &data("not_jacobi.json")]);
    assert!(stdout(&o).contains("jacobi: no, fails on (e1, e2, e3)"));
    assert_eq!(error_kind(&trilie(&["mul", "--input", &data("not_jacobi.json"), "e1*e2"])), "lie");
    assert_eq!(error_kind(&trilie(&["check", "--input", "/nonexistent/file.json"])), "io");
    let o = trilie(&["mul", "--algebra", "af1", "e1 *+ e9"]);
    assert_eq!(o.status.code(), Some(1));
    error_kind(&o);
    let o = trilie(&["growth", "--matrix", "[[1, 2], [3]]"]);
    error_kind(&o);
    let o = trilie(&["growth", "--matrix", "jordan:3", "--s-max", "1e12"]);
    assert_eq!(error_kind(&o), "budget");
    let o = trilie(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_kind(&o), "usage");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn fixed_seed_is_byte_deterministic() {
    let runs = [
        vec!["seminorm", "--algebra", "heisenberg", "--box", "0:1,0:1", "--order", "1"],
        vec!["dominate", "--algebra", "af1", "--beta", "1", "--format", "json"],
        vec!["growth", "--matrix", "jordan:3", "--format", "csv"],
        vec!["demo-e2", "--m", "2", "--format", "json"],
    ];
    for args in &runs {
        for seed in ["3", "11"] {
            let mut a = args.clone();
            a.extend(["--seed", seed]);
            let first = trilie(&a);
            assert!(first.status.success(), "{a:?}: {}", String::from_utf8_lossy(&first.stderr));
            assert_eq!(first.stdout, trilie(&a).stdout, "{a:?}");
        }
    }
    let base = ["seminorm", "--algebra", "heisenberg", "--format", "json"];
    let s3 = trilie(&[&base[..], &["--seed", "3"]].concat()).stdout;
    let s4 = trilie(&[&base[..], &["--seed", "4"]].concat()).stdout;
    assert_ne!(s3, s4);
}
