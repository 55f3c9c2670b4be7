use std::path::PathBuf;
use std::process::Command;

use arbor::samplers::OffspringDistribution;
use arbor::DegreeStatistics;
use arbor_harness::parallel::THREADS_VAR;
use arbor_harness::{run, ConcentrationClass, ExperimentConfig, ExperimentKind, ExperimentReport, Target};

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("arbor-harness-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_arbor"))
}

fn binary(n: u64) -> DegreeStatistics {
    DegreeStatistics::tree([(0, n / 2 + 1), (2, n / 2)]).unwrap()
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let mut concentrate = ExperimentConfig::new(
        ExperimentKind::Concentration,
        Target::Offspring(OffspringDistribution::power_law(0.5, 4.5).unwrap()),
        vec![300],
        40,
        11,
    );
    concentrate.class = Some(ConcentrationClass::Prop24);
    let configs = [
        ExperimentConfig::new(ExperimentKind::TailSweep, Target::Statistics(binary(31)), vec![31], 5000, 11)
            .with_grid(vec![20.0, 80.0]),
        ExperimentConfig::new(ExperimentKind::Convergence, Target::LazyBinaryFamily, vec![200], 30, 11).with_grid(vec![0.5, 0.2]),
        concentrate,
    ];
    // the only test in this file touching the variable
    for config in &configs {
        std::env::remove_var(THREADS_VAR);
        let many = run(config).unwrap().deterministic_json().unwrap();
        std::env::set_var(THREADS_VAR, "1");
        let one = run(config).unwrap().deterministic_json().unwrap();
        std::env::set_var(THREADS_VAR, "3");
        let three = run(config).unwrap().deterministic_json().unwrap();
        std::env::remove_var(THREADS_VAR);
        assert_eq!(many, one);
        assert_eq!(many, three);
    }
}

#[test]
fn cells_reproduce_from_their_sub_config() {
    let config = ExperimentConfig::new(ExperimentKind::TailSweep, Target::Statistics(binary(15)), vec![15], 3000, 4)
        .with_grid(vec![10.0, 80.0, 125.0]);
    let report = run(&config).unwrap();
    for cell in &report.cells {
        let again = run(&cell.reproduce).unwrap();
        assert!(again.cells.contains(cell), "{cell:?}");
    }
    let config = ExperimentConfig::new(ExperimentKind::Convergence, Target::LazyBinaryFamily, vec![100], 20, 4).with_grid(vec![0.5, 0.1]);
    let report = run(&config).unwrap();
    for cell in report.cells_named("c_hat") {
        assert!(run(&cell.reproduce).unwrap().cells.contains(cell));
    }
}

#[test]
fn cli_equiv_writes_json_and_csv() {
    let dir = scratch("equiv");
    let out = dir.join("equiv.json");
    let status = cli().args(["equiv", "--max-n", "5", "--out"]).arg(&out).status().unwrap();
    assert!(status.success());
    let report: ExperimentReport = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(report.all_pass());
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    assert!(csv.starts_with("experiment,n,grid_value,empirical,ci_lo,ci_hi,bound,verdict\n"));
    assert_eq!(csv.lines().count(), report.cells.len() + 1);
}

#[test]
fn cli_tails_and_exit_codes() {
    let dir = scratch("tails");
    let stats = dir.join("stats.json");
    std::fs::write(&stats, binary(63).to_json()).unwrap();
    let output = cli()
        .args(["tails", "--grid", "80,125,216", "--reps", "2000", "--seed", "3", "--stats"])
        .arg(&stats)
        .output()
        .unwrap();
    assert!(output.status.success());
    let report: ExperimentReport = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report.config.seed, 3);
    assert_eq!(report.cells_named("tau_tail").count(), 3);

    std::fs::write(&stats, r#"{"0":1,"1":3}"#).unwrap();
    let status = cli().args(["tails", "--stats"]).arg(&stats).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn cli_converge_and_concentrate() {
    let dir = scratch("laws");
    let mu = dir.join("mu.json");
    std::fs::write(&mu, r#"{"masses":[0.4,0.2,0.4]}"#).unwrap();
    let output = cli()
        .args(["concentrate", "--class", "prop2.5", "--n", "500", "--reps", "50", "--seed", "1", "--mu"])
        .arg(&mu)
        .output()
        .unwrap();
    assert!(output.status.success());
    let report: ExperimentReport = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report.cells_named("pass_fraction").next().unwrap().empirical, 1.0);

    let output = cli().args(["converge", "--epsilons", "0.5,0.2", "--sizes", "200", "--reps", "20"]).output().unwrap();
    assert!(output.status.success());
    let report: ExperimentReport = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(report.cells_named("c_hat").count(), 2);
}

#[test]
fn cli_sample_and_zn() {
    let dir = scratch("small");
    let stats = dir.join("stats.json");
    std::fs::write(&stats, r#"{"0":3,"1":1,"3":1}"#).unwrap();
    let output = cli().args(["sample", "--count", "4", "--seed", "2", "--stats"]).arg(&stats).output().unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    for line in text.lines() {
        let mut word: Vec<usize> = line.split(' ').map(|x| x.parse().unwrap()).collect();
        word.sort_unstable();
        assert_eq!(word, vec![0, 0, 0, 1, 3]);
    }

    let weights = dir.join("w.json");
    std::fs::write(&weights, r#"{"weights":[1,0,1],"rho":"infinity"}"#).unwrap();
    let output = cli().args(["zn", "--n", "7", "--weights"]).arg(&weights).output().unwrap();
    assert!(output.status.success());
    let v: serde_json::Value = serde_json::from_slice(&output.stdout).unwrap();
    assert_eq!(v["zn_exact"], "5");
    assert!((v["zn"].as_f64().unwrap() - 5.0).abs() < 1e-9);
}
