use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn phire(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phire"))
        .args(args)
        .env_remove("PHIRE_CALIBRATION")
        .output()
        .expect("spawn phire")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn p(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_string()
}

fn golden(name: &str) -> String {
    fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR"))
            .join("tests/golden")
            .join(name),
    )
    .unwrap()
}

#[test]
fn prove_and_verify_gate_20() {
    let dir = TempDir::new().unwrap();
    let proof = p(&dir, "proof.bin");
    let o = phire(&[
        "prove", "--gate", "20", "--mu", "12", "--seed", "7", "--out", &proof,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = phire(&["verify", "--gate", "20", "--proof", &proof, "--seed", "7"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).trim(), "accept");
    let o = phire(&[
        "verify", "--gate", "20", "--proof", &proof, "--mode", "trusting",
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn proof_bytes_are_stable() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (p(&dir, "a.bin"), p(&dir, "b.bin"));
    for out in [&a, &b] {
        assert_eq!(
            code(&phire(&[
                "prove", "--gate", "22", "--mu", "6", "--seed", "3", "--out", out
            ])),
            0
        );
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn truncated_proof_is_malformed() {
    let dir = TempDir::new().unwrap();
    let proof = p(&dir, "proof.bin");
    assert_eq!(
        code(&phire(&[
            "prove", "--gate", "20", "--mu", "8", "--seed", "1", "--out", &proof
        ])),
        0
    );
    let bytes = fs::read(&proof).unwrap();
    fs::write(&proof, &bytes[..bytes.len() - 7]).unwrap();
    let o = phire(&["verify", "--gate", "20", "--proof", &proof, "--seed", "1"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn flipped_byte_is_rejected() {
    let dir = TempDir::new().unwrap();
    let proof = p(&dir, "proof.bin");
    assert_eq!(
        code(&phire(&[
            "prove", "--gate", "20", "--mu", "8", "--seed", "1", "--out", &proof
        ])),
        0
    );
    let mut bytes = fs::read(&proof).unwrap();
    // low byte of the first round's first evaluation; the value stays canonical
    let name_len = u16::from_le_bytes([bytes[7], bytes[8]]) as usize;
    let first_eval = 9 + name_len + 32 + 4 + 4 + 1 + 32 + 4;
    bytes[first_eval] ^= 1;
    fs::write(&proof, &bytes).unwrap();
    let o = phire(&["verify", "--gate", "20", "--proof", &proof, "--seed", "1"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn violated_witness_is_rejected() {
    let dir = TempDir::new().unwrap();
    let proof = p(&dir, "proof.bin");
    let o = phire(&[
        "prove",
        "--gate",
        "22",
        "--mu",
        "8",
        "--seed",
        "5",
        "--violate",
        "--out",
        &proof,
    ]);
    assert_eq!(code(&o), 0);
    let o = phire(&[
        "verify",
        "--gate",
        "22",
        "--proof",
        &proof,
        "--seed",
        "5",
        "--violate",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn witness_dir_round_trip() {
    let dir = TempDir::new().unwrap();
    let wdir = p(&dir, "w");
    let proof = p(&dir, "proof.bin");
    assert_eq!(
        code(&phire(&[
            "witness", "--gate", "8", "--mu", "7", "--seed", "2", "--out", &wdir
        ])),
        0
    );
    assert!(dir.path().join("w/lambda.mle").exists());
    let o = phire(&[
        "prove",
        "--gate",
        "8",
        "--witness-dir",
        &wdir,
        "--out",
        &proof,
    ]);
    assert_eq!(code(&o), 0);
    let o = phire(&[
        "verify",
        "--gate",
        "8",
        "--proof",
        &proof,
        "--witness-dir",
        &wdir,
    ]);
    assert_eq!(code(&o), 0);
    // proof for a different gate
    let o = phire(&[
        "verify",
        "--gate",
        "9",
        "--proof",
        &proof,
        "--witness-dir",
        &wdir,
    ]);
    assert_eq!(code(&o), 3);
}

#[test]
fn permcheck_commands() {
    let dir = TempDir::new().unwrap();
    let (inst, bad, proof) = (p(&dir, "i.perm"), p(&dir, "bad.perm"), p(&dir, "p.bin"));
    assert_eq!(
        code(&phire(&[
            "perm", "gen", "--k", "3", "--mu", "8", "--seed", "4", "--out", &inst
        ])),
        0
    );
    assert_eq!(
        code(&phire(&[
            "perm",
            "prove",
            "--instance",
            &inst,
            "--out",
            &proof
        ])),
        0
    );
    assert_eq!(
        code(&phire(&[
            "perm",
            "verify",
            "--instance",
            &inst,
            "--proof",
            &proof
        ])),
        0
    );
    let o = phire(&[
        "perm", "gen", "--k", "3", "--mu", "8", "--seed", "4", "--tamper", "--out", &bad,
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        code(&phire(&[
            "perm",
            "verify",
            "--instance",
            &bad,
            "--proof",
            &proof
        ])),
        2
    );
    assert_eq!(
        code(&phire(&[
            "perm",
            "prove",
            "--instance",
            &bad,
            "--out",
            &proof
        ])),
        2
    );
}

#[test]
fn infeasible_shape_exit_code() {
    let o = phire(&["schedule", "--gate", "22", "--ees", "1"]);
    assert_eq!(code(&o), 4);
    let o = phire(&["model", "--gate", "22", "--pls", "0"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn unknown_gate_is_malformed() {
    assert_eq!(code(&phire(&["model", "--gate", "99"])), 3);
}

#[test]
fn bench_rows_and_header() {
    let o = phire(&["bench", "--gates", "", "--mu", "4"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 1);
    assert!(stdout(&o).starts_with("gate,name,degree,distinct_mles"));

    let o = phire(&["bench", "--gates", "all", "--mu", "5", "--seed", "9"]);
    assert_eq!(stdout(&o).lines().count(), 26);
    let again = phire(&["bench", "--gates", "all", "--mu", "5", "--seed", "9"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn bench_matches_golden() {
    let o = phire(&["bench", "--gates", "0,1,20", "--mu", "6", "--seed", "3"]);
    assert_eq!(stdout(&o), golden("bench_small.csv"));
}

#[test]
fn sweep_matches_golden() {
    let o = phire(&[
        "sweep-degree",
        "--from",
        "2",
        "--to",
        "8",
        "--ees",
        "6",
        "--pls",
        "5",
        "--pes",
        "4",
        "--tiers",
        "256,1024",
        "--mu",
        "12",
    ]);
    assert_eq!(stdout(&o), golden("sweep_e6.csv"));
}

#[test]
fn sweep_node_column_matches_formula() {
    let o = phire(&[
        "sweep-degree",
        "--from",
        "2",
        "--to",
        "30",
        "--ees",
        "6",
        "--mu",
        "14",
    ]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    let mut rows = out.lines().skip(1).peekable();
    assert!(rows.peek().is_some());
    let mut flagged = Vec::new();
    for row in rows {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[2], f[3], "{row}");
        if f[f.len() - 2] == "1" {
            flagged.push(f[0].parse::<usize>().unwrap());
            assert_eq!(f[f.len() - 1], "1", "increment without jump: {row}");
        }
    }
    assert_eq!(flagged, vec![6, 11, 16, 21, 26]);
}

#[test]
fn single_degree_sweep() {
    let o = phire(&["sweep-degree", "--from", "5", "--to", "5"]);
    assert_eq!(stdout(&o).lines().count(), 2);
    assert_eq!(
        code(&phire(&["sweep-degree", "--from", "1", "--to", "5"])),
        3
    );
}

#[test]
fn schedule_dump_matches_golden() {
    let dir = TempDir::new().unwrap();
    let dump = p(&dir, "s.json");
    let o = phire(&[
        "schedule", "--gate", "0", "--ees", "2", "--pls", "5", "--dump", &dump,
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read_to_string(&dump).unwrap(),
        golden("sched_g0_e2.json")
    );
}

#[test]
fn model_report_has_summary_row() {
    let o = phire(&["model", "--gate", "22", "--mu", "10"]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 1 + 10 + 1);
    assert!(lines[11].starts_with("22,pes4-e6-p5-bank4096-bw1024,total,"));
}

#[test]
fn dse_single_candidate_grid() {
    let dir = TempDir::new().unwrap();
    let grid = p(&dir, "grid.toml");
    let out = p(&dir, "pareto.csv");
    fs::write(
        &grid,
        "pes = [2]\nees = [3]\npls = [4]\nbank_log2 = [12]\nbandwidth_gbps = [512]\n",
    )
    .unwrap();
    let o = phire(&[
        "dse", "--grid", &grid, "--gates", "0,20", "--mu", "10", "--out", &out,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("tier_best,512,0,2,3,4,4096,512,"));

    fs::write(
        &grid,
        "pes = []\nees = [3]\npls = [4]\nbank_log2 = [12]\nbandwidth_gbps = [512]\n",
    )
    .unwrap();
    let o = phire(&["dse", "--grid", &grid, "--gates", "0", "--mu", "10"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn calibration_env_is_used() {
    let dir = TempDir::new().unwrap();
    let cal = p(&dir, "cal.toml");
    let base = fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/config/calibration.toml"),
    )
    .unwrap();
    fs::write(
        &cal,
        base.replace("inverse_units = 266", "inverse_units = 100"),
    )
    .unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_phire"))
        .args(["permgen", "--elements", "1000"])
        .env("PHIRE_CALIBRATION", &cal)
        .output()
        .unwrap();
    assert!(stdout(&o).contains("units 100"), "{}", stdout(&o));
    assert!(stdout(&phire(&["permgen", "--elements", "1000"])).contains("units 266"));
}

#[test]
fn gates_listing() {
    let o = phire(&["gates"]);
    assert_eq!(stdout(&o).lines().count(), 26);
    let o = phire(&["gates", "--show", "opencheck"]);
    assert!(stdout(&o).contains("gate opencheck"));
}
