use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_distrivote")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

/// 8 confident "A" answers and 12 unconfident "B" answers.
fn pools_file(dir: &Path) -> String {
    let mut s = String::new();
    for i in 0..20 {
        let (a, c) = if i < 8 { ("A", 9.0 + 0.01 * i as f64) } else { ("B", 3.0 + 0.01 * i as f64) };
        s += &format!("{{\"question_id\":\"q1\",\"trajectory_id\":\"t{i}\",\"answer\":\"{a}\",\"confidence\":{c}}}\n");
    }
    s += "{\"question_id\":\"q2\",\"trajectory_id\":\"u0\",\"answer\":\"7\",\"confidence\":1.5}\n";
    s += "{\"question_id\":\"q2\",\"trajectory_id\":\"u1\",\"answer\":\"8\",\"confidence\":0.5}\n";
    write(dir, "pools.jsonl", &s)
}

fn lines(o: &Output) -> Vec<serde_json::Value> {
    stdout(o).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn vote_dis_and_sc_differ() {
    let dir = tempfile::tempdir().unwrap();
    let pools = pools_file(dir.path());
    let dis = run(&["vote", "--in", &pools, "--method", "dis", "--seed", "1"]);
    assert!(dis.status.success(), "{}", String::from_utf8_lossy(&dis.stderr));
    let out = lines(&dis);
    assert_eq!(out.len(), 2);
    assert_eq!(out[0]["question_id"], "q1");
    assert_eq!(out[0]["answer"], "A");
    assert!(out[0]["provenance"]["stages"].as_array().unwrap().len() >= 2);

    let sc = lines(&run(&["vote", "--in", &pools, "--method", "sc"]));
    assert_eq!(sc[0]["answer"], "B");
}

#[test]
fn vote_flags_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let pools = pools_file(dir.path());
    let cfg = write(dir.path(), "vote.json", r#"{"n_intervals": 3, "partition": {"kind": "kmeans"}}"#);
    let o = run(&["vote", "--in", &pools, "--config", &cfg, "--no-reject", "--no-hier"]);
    assert!(o.status.success());
    let out = lines(&o);
    assert_eq!(out[0]["provenance"]["method"], "dis[kmeans,no-reject,no-hier,nc=3]");
    let o = run(&["vote", "--in", &pools, "--partition", "top:0.5"]);
    assert_eq!(lines(&o)[0]["answer"], "A");
}

#[test]
fn vote_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let pools = pools_file(dir.path());
    let a = run(&["vote", "--in", &pools, "--seed", "9"]);
    let b = run(&["vote", "--in", &pools, "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_input_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.jsonl", "{\"question_id\":\"q\",\"trajectory_id\":\"a\",\"confidence\":1}\n");
    let o = run(&["vote", "--in", &bad]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains(":1:"), "{err}");

    assert_eq!(run(&["vote", "--in", "/nonexistent/pools.jsonl"]).status.code(), Some(1));
    assert_eq!(run(&["vote", "--in", &bad, "--method", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn fit_dumps_mixture() {
    let dir = tempfile::tempdir().unwrap();
    let pools = pools_file(dir.path());
    let o = run(&["fit", "--in", &pools, "--partition", "gmm"]);
    assert!(o.status.success());
    let out = lines(&o);
    let means = out[0]["fit"]["means"].as_array().unwrap();
    assert!((means[0].as_f64().unwrap() - 3.135).abs() < 0.01);
    assert!((means[1].as_f64().unwrap() - 9.035).abs() < 0.01);
    assert_eq!(out[0]["pos"].as_array().unwrap().len(), 8);
}

#[test]
fn ssc_replay_reports_triggers() {
    let dir = tempfile::tempdir().unwrap();
    let steps = write(
        dir.path(),
        "steps.jsonl",
        "{\"id\":\"r1\",\"step_confidences\":[10,9,7,7.5]}\n{\"trajectory_id\":\"r2\",\"step_confidences\":[1,2,3]}\n",
    );
    let o = run(&["ssc-replay", "--in", &steps, "--alpha", "0.8", "--delta", "0.8"]);
    assert!(o.status.success());
    let out = lines(&o);
    assert_eq!(out[0]["id"], "r1");
    assert_eq!(out[0]["triggers"], serde_json::json!([2]));
    assert_eq!(out[0]["tau_history"].as_array().unwrap().len(), 4);
    assert_eq!(out[1]["triggers"], serde_json::json!([]));
    assert_eq!(run(&["ssc-replay", "--in", &steps, "--alpha", "1.5"]).status.code(), Some(1));
}

#[test]
fn simulate_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "sim.json",
        r#"{"base": {"budget": 32}, "delta_grid": [0, 4], "methods": ["sc", "dis"], "repeats": 4}"#,
    );
    let out = dir.path().join("results.csv");
    let o = run(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[0].starts_with("delta,method,repeat_count,mean_acc"));
    assert!(rows[1].starts_with("0.0,dis,4,"));

    let again = dir.path().join("again.csv");
    run(&["simulate", "--config", &cfg, "--out", again.to_str().unwrap(), "--seed", "3"]);
    assert_eq!(std::fs::read(&out).unwrap(), std::fs::read(&again).unwrap());
}

#[test]
fn verify_theorems_passes_on_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("theory.csv");
    let o = run(&["verify-theorems", "--grid", "0:3:0.5", "--samples", "20000", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).lines().all(|l| l.starts_with("PASS")));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 8);
    assert!(csv.starts_with("delta,R,P_lower,P_mc"));
}

#[test]
fn verify_theorems_failure_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    // two incorrect answers: the per-answer bound overshoots the true accuracy
    let cfg = write(
        dir.path(),
        "thm.json",
        r#"{"profile": {"correct": [1.0], "incorrect": [[1.0], [1.0]]}, "mu2": 3.0, "delta_grid": [0.0, 0.5, 1.0], "n_samples": 200000}"#,
    );
    let o = run(&["verify-theorems", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("FAIL"));
}

#[test]
fn metrics_reports_stages() {
    let dir = tempfile::tempdir().unwrap();
    let pools = pools_file(dir.path());
    let gt = write(dir.path(), "gt.jsonl", "{\"question_id\":\"q1\",\"answer\":\"A\"}\n{\"question_id\":\"q2\",\"answer\":\"8\"}\n");
    let o = run(&["metrics", "--in", &pools, "--gt", &gt]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = lines(&o);
    assert_eq!(out.len(), 3);
    assert_eq!(out[0]["stage1"]["acc"], 0.4);
    assert_eq!(out[0]["stage2"]["acc"], 1.0);
    assert_eq!(out[0]["voted_correct"], true);
    assert_eq!(out[2]["summary"]["questions"], 2);

    let partial = write(dir.path(), "gt2.jsonl", "{\"question_id\":\"q1\",\"answer\":\"A\"}\n");
    assert_eq!(run(&["metrics", "--in", &pools, "--gt", &partial]).status.code(), Some(1));
}

#[test]
fn stream_and_boxed_ingestion() {
    let dir = tempfile::tempdir().unwrap();
    let records = write(
        dir.path(),
        "rec.jsonl",
        "{\"question_id\":\"q\",\"trajectory_id\":\"a\"}\n{\"question_id\":\"q\",\"trajectory_id\":\"b\",\"text\":\"so \\\\boxed{5}\",\"confidence\":0.1}\n",
    );
    let mut s = String::new();
    for (p, tok) in ["\\boxed{", "4", "}"].iter().enumerate() {
        s += &format!(
            "{{\"question_id\":\"q\",\"trajectory_id\":\"a\",\"position\":{p},\"chosen_token\":{},\"topk\":[{{\"token\":\"x\",\"logprob\":-0.5}},{{\"token\":\"y\",\"logprob\":-1.5}}]}}\n",
            serde_json::to_string(tok).unwrap()
        );
    }
    let stream = write(dir.path(), "stream.jsonl", &s);
    let o = run(&["vote", "--in", &records, "--stream", &stream, "--extract-boxed", "--method", "wsc"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = lines(&o);
    // stream confidence is 1.0 for "4", far above 0.1 for "5"
    assert_eq!(out[0]["answer"], "4");
    assert_eq!(out[0]["tally"]["4"], 1.0);
}
