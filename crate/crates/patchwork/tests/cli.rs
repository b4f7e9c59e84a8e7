//! End-to-end tests of the `patchwork` binary: exit codes per error class,
//! JSON report shapes and round trips, and the ex → fit pipeline.

use std::path::{Path, PathBuf};
use std::process::Command;

use patchwork::config::Configuration;
use patchwork::field::Field;
use patchwork::io::{
    read_table_csv, ConfigDto, DecomposeReportDto, ExtremalTableDto, FamilyReportDto,
    LinkedReportDto, PeriodicFitDto,
};
use patchwork::linalg::Vector;
use patchwork::structure::{branch_width, BwMode};

struct CliOutput {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run_cli(args: &[&str], envs: &[(&str, &str)]) -> CliOutput {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_patchwork"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("the binary runs");
    CliOutput {
        code: out.status.code().expect("no signal kills"),
        stdout: String::from_utf8(out.stdout).expect("utf-8 stdout"),
        stderr: String::from_utf8(out.stderr).expect("utf-8 stderr"),
    }
}

fn write_file(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).expect("fixture writes");
    path
}

fn gf2() -> Field {
    Field::of_order(2).unwrap()
}

/// `{e1, e2, e1+e2}` in the plane: branch-width 1, three points.
const TRIANGLE: &str = r#"{"field":{"p":2,"k":1},"ambient_dim":2,"vectors":[[1,0],[0,1],[1,1]]}"#;

/// Spanning one-loop patch on `e1`.
const LOOP_PATCH: &str =
    r#"{"field":{"p":2,"k":1},"ambient_dim":1,"vectors":[[1]],"left":[[1]],"right":[[1]]}"#;

/// The width-one ladder step `({e1+e2, e2}, [e1], [e2])`: each repetition
/// adds one dimension and two points.
const LADDER_PATCH: &str = r#"{"field":{"p":2,"k":1},"ambient_dim":2,"vectors":[[1,1],[0,1]],"left":[[1,0]],"right":[[0,1]]}"#;

/// Empty end patch with matching terminals.
const END_PATCH: &str =
    r#"{"field":{"p":2,"k":1},"ambient_dim":1,"vectors":[],"left":[[1]],"right":[[1]]}"#;

/// A 17-element simple configuration: too large for every exact search guard.
fn big_config() -> Configuration {
    let f = gf2();
    let mut vectors = vec![];
    for i in 0..5 {
        vectors.push(Vector::unit(5, i));
    }
    for i in 0..5 {
        for j in (i + 1)..5 {
            let v = Vector::unit(5, i).add(&f, &Vector::unit(5, j));
            vectors.push(v);
        }
    }
    vectors.push(
        Vector::unit(5, 0)
            .add(&f, &Vector::unit(5, 1))
            .add(&f, &Vector::unit(5, 2)),
    );
    vectors.push(
        Vector::unit(5, 2)
            .add(&f, &Vector::unit(5, 3))
            .add(&f, &Vector::unit(5, 4)),
    );
    let a = Configuration::new(f, 5, vectors).unwrap();
    assert_eq!(a.len(), 17, "guard tests need exactly 17 elements");
    a
}

#[test]
fn fit_reproduces_the_k33_slope_and_offsets() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_file(
        dir.path(),
        "k33.csv",
        "n,ex\n2,1\n3,3\n4,6\n5,10\n6,12\n7,15\n8,19\n9,21\n10,24\n11,28\n",
    );
    let out = run_cli(
        &["fit", "--table", table.to_str().unwrap(), "--p-max", "3"],
        &[],
    );
    assert_eq!(out.code, 0, "exact fit exits 0; stderr: {}", out.stderr);
    let fit: PeriodicFitDto = serde_json::from_str(&out.stdout).expect("fit JSON parses");
    assert_eq!(fit.delta, "3");
    assert_eq!(fit.period, 3);
    assert_eq!(fit.offsets, vec!["-6", "-6", "-5"]);
    assert!(fit.exact);
    assert!(fit.into_fit().is_ok(), "the printed fit round-trips");
}

#[test]
fn fit_without_an_exact_fit_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let table = write_file(
        dir.path(),
        "doubling.csv",
        "n,ex\n1,1\n2,2\n3,4\n4,8\n5,16\n6,32\n",
    );
    let out = run_cli(
        &["fit", "--table", table.to_str().unwrap(), "--p-max", "2"],
        &[],
    );
    assert_eq!(out.code, 1, "no linear-plus-periodic fit exists");
    let fit: PeriodicFitDto = serde_json::from_str(&out.stdout).expect("best fit still printed");
    assert!(!fit.exact);
}

#[test]
fn decompose_below_the_size_hypothesis_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(dir.path(), "triangle.json", TRIANGLE);
    let out = run_cli(
        &[
            "decompose",
            "--config",
            config.to_str().unwrap(),
            "--w",
            "2",
            "--p",
            "2",
        ],
        &[],
    );
    assert_eq!(out.code, 4, "|A| = 3 <= 2^2 violates the hypothesis");
    assert!(
        out.stderr.contains("override"),
        "the message points at the override: {}",
        out.stderr
    );
}

#[test]
fn decompose_override_flag_and_env_both_work() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(dir.path(), "triangle.json", TRIANGLE);
    let base = [
        "decompose",
        "--config",
        config.to_str().unwrap(),
        "--w",
        "2",
        "--p",
        "2",
    ];
    let mut with_flag = base.to_vec();
    with_flag.push("--override-threshold");
    for (args, envs) in [
        (with_flag, vec![]),
        (base.to_vec(), vec![("PATCHWORK_GUARD_OVERRIDE", "1")]),
    ] {
        let out = run_cli(&args, &envs);
        assert_eq!(
            out.code, 0,
            "override attempts the construction: {}",
            out.stderr
        );
        let report: DecomposeReportDto =
            serde_json::from_str(&out.stdout).expect("report JSON parses");
        assert_eq!(report.mode, "product");
        assert!(report.clauses.iter().all(|c| !c.is_fail()));
    }
}

#[test]
fn decompose_product_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(
        dir.path(),
        "five.json",
        r#"{"field":{"p":2,"k":1},"ambient_dim":3,"vectors":[[1,0,0],[0,1,0],[1,1,0],[0,1,1],[0,0,1]]}"#,
    );
    let out = run_cli(
        &[
            "decompose",
            "--config",
            config.to_str().unwrap(),
            "--w",
            "2",
            "--p",
            "2",
        ],
        &[],
    );
    assert_eq!(out.code, 0, "five elements beat 2^2: {}", out.stderr);
    let report: DecomposeReportDto = serde_json::from_str(&out.stdout).expect("report parses");
    assert_eq!(report.factors.len(), 2);
    assert!(report.clauses.iter().all(|c| !c.is_fail()));
    let mut covered: Vec<usize> = report.parts.iter().flatten().copied().collect();
    covered.sort_unstable();
    assert_eq!(
        covered,
        (0..5).collect::<Vec<_>>(),
        "parts partition the input"
    );
    for factor in &report.factors {
        factor
            .into_patch()
            .expect("every factor parses back into a patch");
    }
    let reparsed: DecomposeReportDto =
        serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(reparsed, report);
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let garbage = write_file(dir.path(), "garbage.json", "not json at all");
    let out = run_cli(
        &[
            "decompose",
            "--config",
            garbage.to_str().unwrap(),
            "--w",
            "1",
            "--p",
            "1",
        ],
        &[],
    );
    assert_eq!(out.code, 2, "unparseable JSON: {}", out.stderr);

    let bad_coords = write_file(
        dir.path(),
        "bad-coords.json",
        r#"{"field":{"p":2,"k":1},"ambient_dim":2,"vectors":[[1,7]]}"#,
    );
    let out = run_cli(
        &["check-linked", "--config", bad_coords.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.code, 2, "7 is not a GF(2) coordinate: {}", out.stderr);

    let missing = dir.path().join("does-not-exist.json");
    let out = run_cli(
        &["check-linked", "--config", missing.to_str().unwrap()],
        &[],
    );
    assert_eq!(
        out.code, 2,
        "unreadable files are invalid input: {}",
        out.stderr
    );
}

#[test]
fn check_linked_searches_small_inputs_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(dir.path(), "triangle.json", TRIANGLE);
    let out = run_cli(&["check-linked", "--config", config.to_str().unwrap()], &[]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let report: LinkedReportDto = serde_json::from_str(&out.stdout).expect("report parses");
    assert_eq!(report.mode, "exact");
    assert_eq!(report.width, 1, "a triangle of points has branch-width 1");
    assert_eq!(report.linked, Some(true));
}

#[test]
fn check_linked_validates_a_supplied_decomposition() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_file(dir.path(), "triangle.json", TRIANGLE);
    let a = Configuration::from_rows(gf2(), 2, &[&[1, 0], &[0, 1], &[1, 1]]).unwrap();
    let t = branch_width(&a, BwMode::Exact).unwrap().decomposition;
    let bd = write_file(dir.path(), "bd.json", &serde_json::to_string(&t).unwrap());
    let out = run_cli(
        &[
            "check-linked",
            "--config",
            config.to_str().unwrap(),
            "--bd",
            bd.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    let report: LinkedReportDto = serde_json::from_str(&out.stdout).expect("report parses");
    assert_eq!(report.mode, "supplied");
    assert_eq!(report.width, 1);
    assert_eq!(report.linked, Some(true));
    assert_eq!(
        report.decomposition, t,
        "the report echoes the supplied tree"
    );
}

#[test]
fn check_linked_falls_back_to_heuristic_above_the_guard() {
    let dir = tempfile::tempdir().unwrap();
    let a = big_config();
    let config = write_file(
        dir.path(),
        "big.json",
        &serde_json::to_string(&ConfigDto::from_config(&a)).unwrap(),
    );
    let out = run_cli(&["check-linked", "--config", config.to_str().unwrap()], &[]);
    assert_eq!(
        out.code, 0,
        "the heuristic report still succeeds: {}",
        out.stderr
    );
    let report: LinkedReportDto = serde_json::from_str(&out.stdout).expect("report parses");
    assert_eq!(report.mode, "heuristic");
    assert_eq!(report.linked, None);
    assert!(
        report.note.is_some(),
        "the report says why linkedness is undetermined"
    );
    assert!(report.width >= 1);
}

#[test]
fn check_linked_guarded_validation_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let a = big_config();
    let config = write_file(
        dir.path(),
        "big.json",
        &serde_json::to_string(&ConfigDto::from_config(&a)).unwrap(),
    );
    let t = branch_width(&a, BwMode::Heuristic).unwrap().decomposition;
    let bd = write_file(dir.path(), "bd.json", &serde_json::to_string(&t).unwrap());
    let out = run_cli(
        &[
            "check-linked",
            "--config",
            config.to_str().unwrap(),
            "--bd",
            bd.to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(
        out.code, 3,
        "validating a supplied tree on 17 elements exceeds the linkedness guard: {}",
        out.stderr
    );
    assert!(out.stderr.contains("guard"), "{}", out.stderr);
}

#[test]
fn grow_composes_the_expected_member() {
    let dir = tempfile::tempdir().unwrap();
    let g1 = write_file(dir.path(), "g1.json", LOOP_PATCH);
    let h = write_file(dir.path(), "h.json", LADDER_PATCH);
    let g2 = write_file(dir.path(), "g2.json", END_PATCH);
    let out = run_cli(
        &[
            "grow",
            "--g1",
            g1.to_str().unwrap(),
            "--h",
            h.to_str().unwrap(),
            "--g2",
            g2.to_str().unwrap(),
            "--L",
            "3",
        ],
        &[],
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    let member: patchwork::io::FamilyMemberDto =
        serde_json::from_str(&out.stdout).expect("member JSON parses");
    assert_eq!(member.dim, 4, "each ladder step adds one dimension");
    assert_eq!(member.epsilon, 7, "each ladder step adds two points");
    let config = member.config.into_config().expect("the member round-trips");
    assert_eq!(config.rank(), 4);
    assert_eq!(config.epsilon(), 7);
}

#[test]
fn grow_rejects_a_nonspanning_start() {
    let dir = tempfile::tempdir().unwrap();
    let g1 = write_file(dir.path(), "g1.json", END_PATCH);
    let h = write_file(dir.path(), "h.json", LADDER_PATCH);
    let out = run_cli(
        &[
            "grow",
            "--g1",
            g1.to_str().unwrap(),
            "--h",
            h.to_str().unwrap(),
            "--g2",
            g1.to_str().unwrap(),
            "--L",
            "1",
        ],
        &[],
    );
    assert_eq!(out.code, 2, "an empty core cannot span: {}", out.stderr);
    assert!(out.stderr.contains("spanning"), "{}", out.stderr);
}

#[test]
fn verify_family_reports_rank_by_rank_equality() {
    let dir = tempfile::tempdir().unwrap();
    let class = write_file(
        dir.path(),
        "class.json",
        r#"{"field":{"p":2,"k":1},"width_bound":1,"rank_cap":3}"#,
    );
    let g1 = write_file(dir.path(), "g1.json", LOOP_PATCH);
    let h = write_file(dir.path(), "h.json", LADDER_PATCH);
    let g2 = write_file(dir.path(), "g2.json", END_PATCH);
    let out = run_cli(
        &[
            "verify-family",
            "--class",
            class.to_str().unwrap(),
            "--g1",
            g1.to_str().unwrap(),
            "--h",
            h.to_str().unwrap(),
            "--g2",
            g2.to_str().unwrap(),
            "--n-max",
            "3",
        ],
        &[],
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    let report: FamilyReportDto = serde_json::from_str(&out.stdout).expect("report parses");
    assert!(
        report.all_equal,
        "the ladder family is extremal for width 1"
    );
    let ns: Vec<usize> = report.rows.iter().map(|r| r.n).collect();
    assert_eq!(ns, vec![1, 2, 3]);
    let eps: Vec<usize> = report.rows.iter().map(|r| r.family_epsilon).collect();
    assert_eq!(eps, vec![1, 3, 5]);
    assert!(report.rows.iter().all(|r| r.member_in_class));
}

#[test]
fn ex_then_fit_pipeline_finds_the_exact_slope() {
    let dir = tempfile::tempdir().unwrap();
    let class = write_file(
        dir.path(),
        "class.json",
        r#"{"field":{"p":2,"k":1},"width_bound":1,"rank_cap":5}"#,
    );
    let out_dir = dir.path().join("table");
    let out = run_cli(
        &[
            "ex",
            "--class",
            class.to_str().unwrap(),
            "--n-max",
            "5",
            "--out",
            out_dir.to_str().unwrap(),
            "--jobs",
            "4",
        ],
        &[],
    );
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(
        out.stdout.contains("n = 4: ex = 7 (exhaustive)"),
        "{}",
        out.stdout
    );
    assert!(
        out.stdout.contains("n = 5: ex = 9 (extension mode)"),
        "{}",
        out.stdout
    );

    let csv = out_dir.join("table.csv");
    let values = read_table_csv(&csv).expect("the CSV parses back");
    assert_eq!(
        values,
        [(0, 0), (1, 1), (2, 3), (3, 5), (4, 7), (5, 9)]
            .into_iter()
            .collect()
    );
    let json = std::fs::read_to_string(out_dir.join("table.json")).unwrap();
    let table: ExtremalTableDto = serde_json::from_str(&json).expect("the JSON export parses");
    let back = table.into_table().expect("and converts to a table");
    assert_eq!(back.values(), values);
    let witness = std::fs::read_to_string(out_dir.join("witness_3.json")).unwrap();
    let w: ConfigDto = serde_json::from_str(&witness).expect("witness files parse");
    let w = w.into_config().expect("and convert");
    assert_eq!(
        (w.rank(), w.epsilon()),
        (3, 5),
        "the witness achieves its table entry"
    );

    let fit_out = run_cli(
        &["fit", "--table", csv.to_str().unwrap(), "--p-max", "2"],
        &[],
    );
    assert_eq!(
        fit_out.code, 0,
        "the table fits exactly: {}",
        fit_out.stderr
    );
    let fit: PeriodicFitDto = serde_json::from_str(&fit_out.stdout).expect("fit parses");
    assert_eq!(fit.delta, "2");
    assert!(fit.exact);
}

#[test]
fn selftest_runs_single_criteria_and_reseeds() {
    let out = run_cli(&["selftest", "--only", "7"], &[]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    assert!(out.stdout.contains("criterion 07 pass"), "{}", out.stdout);

    let out = run_cli(&["selftest", "--only", "6", "--seed", "999"], &[]);
    assert_eq!(
        out.code, 0,
        "criterion 6 holds under a fresh seed: {}",
        out.stderr
    );
    assert!(out.stdout.contains("criterion 06 pass"), "{}", out.stdout);

    let out = run_cli(&["selftest", "--only", "11"], &[]);
    assert_eq!(out.code, 1, "there are only ten criteria");
    assert!(out.stdout.contains("FAIL"), "{}", out.stdout);
}
