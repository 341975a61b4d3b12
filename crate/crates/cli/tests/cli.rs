use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pyramid-eq"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn economy(n: usize, theta: f64, big_n: f64, extra: &str) -> String {
    format!(
        "grid_n = {n}\n\n[params]\ntheta = {theta}\ntheta_prime = 0.5\nn_students = {big_n}\nn_workers = 1\nc = 0.1\n{extra}"
    )
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schemas")
}

fn check_schema(doc: &Path, schema: &str) {
    let schema: Value = json(&schema_dir().join(format!("{schema}.schema.json")));
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let instance = json(doc);
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{} violates {schema}: {errors:?}", doc.display());
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn single_node_solve_has_zero_gap() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "one.toml",
        "grid_n = 1\n[params]\ntheta = 0.5\ntheta_prime = 0.5\nn_students = 2\nn_workers = 1\nc = 0.0\n[solver]\nc_delta = 1e-9\n",
    );
    let out = tmp.path().join("out");
    let o = run(&["solve", "--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let d = json(&out.join("duality.json"));
    assert!(d["gap"].as_f64().unwrap() <= 1e-9);
    assert!((d["lp_value"].as_f64().unwrap() - 0.25).abs() < 1e-8);
    let wages = fs::read_to_string(out.join("wages.csv")).unwrap();
    assert!(wages.starts_with("node,skill,v,u,v_w,v_m,v_t,occupation\n"));
    for name in ["matching_eps.csv", "matching_lambda.csv", "occupations.json", "specialization.json"] {
        assert!(out.join(name).exists(), "{name} missing");
    }
}

#[test]
fn out_of_range_theta_names_the_bound_and_line() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", &economy(8, 1.2, 10.0, ""));
    let o = run(&["solve", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    assert!(msg.contains("0 < theta < 1"), "{msg}");
    assert!(msg.contains("bad.toml:4:"), "{msg}");
}

#[test]
fn unknown_keys_and_bad_types_are_rejected_with_lines() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "typo.toml", &economy(8, 0.5, 2.0, "[solver]\ntoll = 1e-9\n"));
    let o = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("typo.toml:10:"), "{}", stderr(&o));

    let cfg = write_config(tmp.path(), "neg.toml", &economy(8, 0.5, 2.0, "[solver]\ndamping = 2.0\n"));
    let o = run(&["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("neg.toml:10: parameter damping"), "{}", stderr(&o));
}

#[test]
fn unwritable_output_directory_exits_one() {
    let tmp = TempDir::new().unwrap();
    let blocker = tmp.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = write_config(tmp.path(), "ok.toml", &economy(4, 0.5, 2.0, ""));
    let out = blocker.join("sub");
    let o = run(&["solve", "--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn iteration_cap_exits_two_with_partial_artifacts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "cap.toml", &economy(16, 0.5, 10.0, "[solver]\nmax_iter = 1\n"));
    let out = tmp.path().join("out");
    let o = run(&["solve", "--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(out.join("wages.csv").exists());
    assert_eq!(json(&out.join("duality.json"))["converged"], Value::Bool(false));
}

#[test]
fn gurus_tree_matches_the_mnemonic() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "g.toml", "[gurus]\nn = 10\nn_prime = 10\npopulation = 110\n");
    let out = tmp.path().join("out");
    let o = run(&["gurus", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.starts_with("110 = 90+9+(9+1+1)\n"), "{stdout}");
    let h = json(&out.join("hierarchy.json"));
    assert_eq!(h["levels"][0]["workers"], 90);
    assert_eq!(h["levels"][0]["managers"], 9);
    assert_eq!(h["levels"][0]["teachers"], 11);
    check_schema(&out.join("hierarchy.json"), "hierarchy");
    assert!(fs::read_to_string(out.join("hierarchy.txt")).unwrap().contains("9 teach workers"));
}

#[test]
fn inadmissible_population_lists_neighbours() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "g.toml", "[gurus]\nn = 10\nn_prime = 10\npopulation = 111\n");
    let o = run(&["gurus", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("110, 220"), "{}", stderr(&o));
}

#[test]
fn phase_reports_predicted_exponent_and_plots() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "p.toml", &economy(32, 0.5, 10.0, ""));
    let out = tmp.path().join("out");
    let (c, o) = (cfg.to_str().unwrap(), out.to_str().unwrap());
    let r = run(&["phase", "--quiet", "--config", c, "--out", o]);
    assert_eq!(r.status.code(), Some(1), "phase without artifacts must fail");
    let r = run(&["phase", "--solve", "--quiet", "--config", c, "--out", o]);
    assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
    let p = json(&out.join("phase.json"));
    assert!((p["predicted_exponent"].as_f64().unwrap() - 0.69897).abs() < 1e-5);
    assert_eq!(p["regime"], "N_theta>1");
    check_schema(&out.join("phase.json"), "phase");
    for svg in ["v.svg", "vprime_loglog.svg", "density.svg"] {
        let text = fs::read_to_string(out.join(svg)).unwrap();
        assert!(text.contains(r#"version="1.1""#) && text.trim_end().ends_with("</svg>"), "{svg}");
    }
    assert!(fs::read_to_string(out.join("vprime_loglog.svg")).unwrap().contains("predicted slope"));

    // Reading the artifacts back gives the same report.
    let first = fs::read(out.join("phase.json")).unwrap();
    let r = run(&["phase", "--quiet", "--config", c, "--out", o]);
    assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
    assert_eq!(first, fs::read(out.join("phase.json")).unwrap());
}

#[test]
fn sweep_emits_one_row_per_regime() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "s.toml",
        &economy(16, 0.5, 1.0, "\n[sweep]\nn_students = [1, 2, 4]\ntheta = [0.5]\n"),
    );
    let out = tmp.path().join("out");
    let o = bin()
        .args(["sweep", "--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .env("PYRAMID_EQ_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 3);
    for (row, label) in rows.iter().zip(["N_theta<1", "N_theta=1", "N_theta>1"]) {
        assert_eq!(row.split(',').nth(3), Some(label), "{row}");
    }
}

#[test]
fn bad_thread_cap_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", &economy(4, 0.5, 2.0, "\n[sweep]\nn_students = [2]\ntheta = [0.5]\n"));
    let o = bin()
        .args(["sweep", "--quiet", "--config", cfg.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()])
        .env("PYRAMID_EQ_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn overrides_take_precedence_over_the_file() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "o.toml", &economy(8, 0.5, 2.0, "[outputs]\ndir = \"ignored\"\n"));
    let out = tmp.path().join("chosen");
    let o = run(&[
        "solve", "--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--grid-n", "5",
        "--delta", "0.01",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!tmp.path().join("ignored").exists());
    let d = json(&out.join("duality.json"));
    assert_eq!(d["n"], 5);
    assert_eq!(d["delta"], 0.01);
    assert!(json(&out.join("occupations.json"))["predicted"].is_null());
}

#[test]
fn tabulated_inputs_resolve_next_to_the_config() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("alpha.csv"), "skill,density\n0,0.5\n1,1.5\n").unwrap();
    fs::write(
        tmp.path().join("bl.csv"),
        "k,b,slope\n0,1,1\n0.5,1.6487212707001282,1.6487212707001282\n1,2.718281828459045,2.718281828459045\n",
    )
    .unwrap();
    let extra = "b_l = { kind = \"tabulated\", file = \"bl.csv\" }\n[alpha]\nkind = \"tabulated\"\nfile = \"alpha.csv\"\n";
    let cfg = write_config(tmp.path(), "t.toml", &economy(8, 0.5, 2.0, extra));
    let out = tmp.path().join("out");
    let o = run(&["solve", "--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));

    let missing = write_config(tmp.path(), "m.toml", &economy(8, 0.5, 2.0, "[alpha]\nkind = \"tabulated\"\nfile = \"nope.csv\"\n"));
    let o = run(&["validate", "--config", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope.csv"), "{}", stderr(&o));
}

#[test]
fn emitted_json_matches_the_schemas() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.toml", &format!("seed = 3\n{}[probe]\namplitude = 1e-3\n", economy(12, 0.5, 3.0, "")));
    let out = tmp.path().join("out");
    let o = run(&["solve", "--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in ["duality", "occupations", "specialization"] {
        check_schema(&out.join(format!("{name}.json")), name);
    }
    assert!(json(&out.join("occupations.json"))["uniqueness_probe"]["seed"] == 3);
}

#[test]
fn repeated_runs_are_bit_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "d.toml", &economy(24, 0.5, 4.0, ""));
    let mut dirs = Vec::new();
    for k in 0..2 {
        let out = tmp.path().join(format!("run{k}"));
        let o = run(&["phase", "--solve", "--quiet", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        dirs.push(out);
    }
    let mut names: Vec<_> = fs::read_dir(&dirs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 10);
    for name in names {
        assert_eq!(fs::read(dirs[0].join(&name)).unwrap(), fs::read(dirs[1].join(&name)).unwrap(), "{name:?}");
    }
}
