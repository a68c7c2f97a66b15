use std::process::Command;

fn atinf() -> Command {
    Command::new(env!("CARGO_BIN_EXE_atinf"))
}

#[test]
fn end_depth_csv_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let mut runs = Vec::new();
    for _ in 0..2 {
        let st = atinf()
            .args(["end-depth", "--group", "Zd:2", "--rmax", "4", "--out"])
            .arg(&a)
            .status()
            .unwrap();
        assert_eq!(st.code(), Some(0));
        runs.push(std::fs::read_to_string(&a).unwrap());
    }
    let text = &runs[0];
    assert_eq!(runs[0], runs[1]);
    assert!(text.contains("# config: "));
    assert!(text.contains("4,4,exact,10"));
}

#[test]
fn out_dir_variable_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let st = atinf()
        .env("ATINF_OUT_DIR", dir.path())
        .args(["dead-ends", "--group", "lamplighter", "--radius", "9", "--format", "json"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("dead-ends.json")).unwrap()).unwrap();
    assert!(!v["result"].as_array().unwrap().is_empty());
    assert_eq!(v["config"]["command"]["radius"], 9);
    assert!(v["version"].is_string());
}

#[test]
fn obstruction_is_a_definitive_answer() {
    let out = atinf().args(["sci-fill", "--group", "Zd:2", "--r", "1", "--window", "8"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("1,NA,lower_bound,8"));
}

#[test]
fn budget_exhaustion_exits_3() {
    let out = atinf()
        .args(["sci-fill", "--group", "Zd:3", "--r", "1", "--window", "6", "--budget", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(atinf().arg("frobnicate").status().unwrap().code(), Some(2));
    assert_eq!(atinf().args(["ball", "--group", "nope", "--radius", "2"]).status().unwrap().code(), Some(2));
    assert_eq!(
        atinf().args(["ball", "--group", "Zd:2", "--radius", "2", "--out", "/nonexistent/x.csv"]).status().unwrap().code(),
        Some(2)
    );
    assert_eq!(
        atinf().args(["ball", "--group", "lamplighter", "--radius", "2"]).status().unwrap().code(),
        Some(0)
    );
    assert_eq!(atinf().args(["sci-fill", "--group", "lamplighter", "--r", "1"]).status().unwrap().code(), Some(2));
}

#[test]
fn presentation_file_group() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("z2.txt");
    std::fs::write(&p, "name: z2\ngens: a b\nrel: abAB\n").unwrap();
    let out = atinf().args(["ball", "--radius", "3", "--group"]).arg(&p).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("3,12"));
}

#[test]
fn reduce_and_rough_equiv() {
    let out = atinf().args(["reduce", "--model", "bs12", "--word", "1 | t^-1 | a | t", "--format", "json"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["reduced"], "aa");
    let out = atinf().args(["reduce", "--model", "trefoil", "--word", "xx | YYY"]).output().unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).ends_with("pinch\n0\n"));

    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("f.csv");
    atinf().args(["end-depth", "--group", "Zd:2", "--rmax", "5", "--out"]).arg(&f).status().unwrap();
    let out = atinf().args(["rough-equiv", "--f"]).arg(&f).arg("--g").arg(&f).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("1,1,0,1,1,0"));
}

#[test]
fn fan_and_delta() {
    let out = atinf()
        .args(["fan", "--group", "surface2", "--radius", "6", "--depth", "2", "--format", "json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["verification"]["all_filled"], true);
    let out = atinf().args(["delta", "--group", "free:2", "--radius", "4", "--rho", "2"]).output().unwrap();
    assert!(String::from_utf8_lossy(&out.stdout).contains("2,0,"));
}
