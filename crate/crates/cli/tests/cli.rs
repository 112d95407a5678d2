use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/tests/fixtures");

fn irsmith(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irsmith"))
        .args(args)
        .output()
        .expect("spawn irsmith")
}

fn fixture(name: &str) -> String {
    format!("{FIXTURES}/{name}")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.rir"), dir.path().join("b.rir"));
    for p in [&a, &b] {
        let o = irsmith(&["generate", "--seed", "7", "--output", path_str(p)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = fs::read(&a).unwrap();
    assert!(!text.is_empty());
    assert_eq!(text, fs::read(&b).unwrap());
    let o = irsmith(&["verify", path_str(&a)]);
    assert_eq!(stdout(&o), "ok\n");
}

#[test]
fn generate_many_writes_named_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = irsmith(&["generate", "--seed", "1", "-n", "5", "--output", path_str(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_dir(dir.path().join("programs")).unwrap().count(), 5);
    let o = irsmith(&["generate", "-n", "5"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn missing_config_is_reported_with_its_path() {
    let o = irsmith(&["--config", "/definitely/not/here.cfg", "generate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("/definitely/not/here.cfg"), "{}", stderr(&o));
}

#[test]
fn bad_config_value_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "seed = 1\np_stop = lots\n").unwrap();
    let o = irsmith(&["--config", path_str(&cfg), "generate"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn flag_overrides_file_overrides_default() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.cfg");
    fs::write(&cfg, "seed = 11\np_stop = 0.3\n").unwrap();
    let dump = |args: &[&str]| {
        let mut all = args.to_vec();
        all.extend(["--dump-config", "-"]);
        let o = irsmith(&all);
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o)
    };
    let defaults = dump(&[]);
    assert!(defaults.contains("seed = 0\n") && defaults.contains("p_stop = 0.2\n"));
    let from_file = dump(&["--config", path_str(&cfg)]);
    assert!(from_file.contains("seed = 11\n") && from_file.contains("p_stop = 0.3\n"));
    let flagged = dump(&["--config", path_str(&cfg), "--seed", "99"]);
    assert!(flagged.contains("seed = 99\n") && flagged.contains("p_stop = 0.3\n"));
}

#[test]
fn dumped_config_reloads_to_the_same_programs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("dumped.cfg");
    let o = irsmith(&["--seed", "123", "--dump-config", path_str(&cfg)]);
    assert!(o.status.success());
    let from_flag = irsmith(&["--seed", "123", "generate"]);
    let from_file = irsmith(&["--config", path_str(&cfg), "generate"]);
    assert_eq!(stdout(&from_flag), stdout(&from_file));
}

#[test]
fn run_prints_the_outcome() {
    let o = irsmith(&["run", &fixture("doubling.rir"), "--args", "21", "--fuel", "1000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), "Completed: 42\n");

    let o = irsmith(&["run", &fixture("infinite_while.rir"), "--args", "-3", "--fuel", "1000"]);
    assert_eq!(stdout(&o), "FuelExhausted: 1000\n");

    let o = irsmith(&["run", &fixture("doubling.rir"), "--args", "1,2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn opt_folds_constants() {
    let o = irsmith(&["opt", "--passes", "constfold,dce", &fixture("fold.rir")]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("{value = 5 : i32}"), "{text}");
    assert!(!text.contains("arith.addi"), "{text}");

    let o = irsmith(&["opt", "--passes", "constfold,nonsense", &fixture("fold.rir")]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn opt_with_b2_misfolds_xor() {
    let o = irsmith(&["opt", "--inject", "b2", &fixture("xor_self.rir")]);
    assert!(stdout(&o).contains("{value = 1 : i32}"), "{}", stdout(&o));
    let o = irsmith(&["opt", &fixture("xor_self.rir")]);
    assert!(stdout(&o).contains("{value = 0 : i32}"), "{}", stdout(&o));
}

#[test]
fn verify_reports_one_line_per_violation() {
    let o = irsmith(&["verify", &fixture("use_before_def.rir")]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1, "{text}");
    assert!(text.starts_with("UseBeforeDef at main/body/op[0]: "), "{text}");

    let o = irsmith(&["verify", &fixture("golden.rir")]);
    assert!(o.status.success());
}

#[test]
fn diff_reports_a_verdict_per_input() {
    let o = irsmith(&["diff", &fixture("xor_self.rir"), "--inject", "b2", "--inputs", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().all(|l| l.contains("\tValueMismatch: ")), "{text}");
}

#[test]
fn fuzz_with_b2_exits_two_and_writes_groups() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("campaign");
    let o = irsmith(&["fuzz", "--inject", "b2", "-n", "2000", "--output-dir", path_str(&out)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let tsv = fs::read_to_string(out.join("groups.tsv")).unwrap();
    assert!(tsv.lines().count() > 1, "{tsv}");
    assert!(tsv.contains("\tValueMismatch: "));
    assert!(stdout(&o).contains("programs_generated: 2000\n"));
    assert!(out.join("report.txt").exists() && out.join("series.tsv").exists());
}

#[test]
fn fuzz_without_injection_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = irsmith(&["fuzz", "-n", "200", "--output-dir", path_str(dir.path())]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(
        fs::read_to_string(dir.path().join("groups.tsv")).unwrap(),
        "digest\tcount\tfirst_seed\tnormalized_message\n"
    );
}

#[test]
fn stats_reports_model_and_measurement() {
    let o = irsmith(&["stats", "-n", "200", "--trials", "1000"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.starts_with("op\tchosen\tgenerated\tsuccess_fraction\toccurrence\n"));
    assert!(text.contains("analytic\tp_g=0.2\tp_bool=1/90\t0.083296\n"), "{text}");
    assert!(text.contains("\nmeasured\tscf.while\t"), "{text}");
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = irsmith(&["frobnicate"]);
    assert_eq!(o.status.code(), Some(1));
    let o = irsmith(&[]);
    assert_eq!(o.status.code(), Some(1));
}
