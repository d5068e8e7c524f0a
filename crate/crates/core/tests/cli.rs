use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dyncorr::channels::{gates, tensor_channels, Channel, ChannelFile};
use dyncorr::experiments::RunManifest;
use dyncorr::linalg::{pauli, ComplexMatrix};
use dyncorr::models::full_decay_channel;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_dyncorr"));
    c.env_remove("DYNCORR_TOLERANCE_PROFILE");
    c
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin()
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&o.stdout),
            String::from_utf8_lossy(&o.stderr)
        )
    })
}

fn channel_file(dir: &Path, name: &str, channel: Channel, dims: (usize, usize)) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, ChannelFile { channel, dims }.to_json()).unwrap();
    path
}

fn unitary(m: ComplexMatrix) -> Channel {
    Channel::unitary(m).unwrap()
}

#[test]
fn measure_reference_channels() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    channel_file(d, "swap.json", unitary(gates::swap(2)), (2, 2));
    channel_file(d, "cnot.json", unitary(gates::cnot()), (2, 2));
    let e = full_decay_channel();
    let x = unitary(pauli::x());
    channel_file(d, "product.json", tensor_channels(&e, &x), (2, 2));

    for (file, want) in [
        ("swap.json", 1.0),
        ("cnot.json", 0.5),
        ("product.json", 0.0),
    ] {
        let o = run_in(d, &["measure", file]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let v = stdout_json(&o);
        let got = v["i_bar"].as_f64().unwrap();
        assert!((got - want).abs() < 1e-8, "{file}: {got}");
        for key in [
            "mutual_information_nats",
            "entropy_aa",
            "entropy_bb",
            "entropy_total",
            "p_error",
        ] {
            assert!(v[key].is_number(), "{key} missing");
        }
    }
    let m: RunManifest =
        serde_json::from_str(&fs::read_to_string(d.join("dyncorr-manifest.json")).unwrap())
            .unwrap();
    assert_eq!(m.command, "measure");
    assert_eq!(m.inputs.len(), 1);
}

#[test]
fn measure_error_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    fs::write(d.join("garbage.json"), "{ not json").unwrap();
    assert_eq!(code(&run_in(d, &["measure", "garbage.json"])), 2);
    assert_eq!(code(&run_in(d, &["measure", "missing.json"])), 2);

    // scaled identity: not trace preserving
    let half = r#"{"kind":"kraus","dims":[1,2],"operators":[[[[0.5,0],[0,0]],[[0,0],[0.5,0]]]]}"#;
    fs::write(d.join("leaky.json"), half).unwrap();
    assert_eq!(code(&run_in(d, &["measure", "leaky.json"])), 3);

    let not_unitary = r#"{"kind":"unitary","dims":[1,2],"matrix":[[[1,0],[1,0]],[[0,0],[1,0]]]}"#;
    fs::write(d.join("nu.json"), not_unitary).unwrap();
    assert_eq!(code(&run_in(d, &["measure", "nu.json"])), 3);

    channel_file(d, "swap.json", unitary(gates::swap(2)), (2, 2));
    let o = run_in(d, &["measure", "swap.json", "--dims", "2,3"]);
    assert_eq!(code(&o), 4);
    assert!(o.stdout.is_empty());
    assert!(!o.stderr.is_empty());

    // declared dims do not match the matrix
    let mut v: serde_json::Value = serde_json::from_str(
        &ChannelFile {
            channel: unitary(gates::swap(2)),
            dims: (2, 2),
        }
        .to_json(),
    )
    .unwrap();
    v["dims"] = serde_json::json!([2, 3]);
    fs::write(d.join("wrongdims.json"), v.to_string()).unwrap();
    assert_eq!(code(&run_in(d, &["measure", "wrongdims.json"])), 4);

    // valid channel but the measure needs d_A = d_B
    channel_file(d, "asym.json", Channel::identity(6), (2, 3));
    assert_eq!(code(&run_in(d, &["measure", "asym.json"])), 4);
}

#[test]
fn verify_unitary_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    channel_file(d, "swap.json", unitary(gates::swap(2)), (2, 2));
    channel_file(d, "cnot.json", unitary(gates::cnot()), (2, 2));
    channel_file(d, "uprime.json", unitary(gates::non_swap_maximal()), (2, 2));
    channel_file(
        d,
        "kraus.json",
        tensor_channels(&full_decay_channel(), &full_decay_channel()),
        (2, 2),
    );

    let o = run_in(d, &["verify-unitary", "swap.json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["maximally_correlated"], true);
    assert!(v["reshuffle_unitarity_defect"].as_f64().unwrap() < 1e-12);

    assert_eq!(code(&run_in(d, &["verify-unitary", "uprime.json"])), 0);

    let o = run_in(d, &["verify-unitary", "cnot.json"]);
    assert_eq!(code(&o), 10);
    let v = stdout_json(&o);
    assert_eq!(v["maximally_correlated"], false);
    assert!((v["i_bar"].as_f64().unwrap() - 0.5).abs() < 1e-9);

    assert_eq!(code(&run_in(d, &["verify-unitary", "kraus.json"])), 3);
}

#[test]
fn two_atom_outputs() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let o = run_in(
        d,
        &[
            "two-atom",
            "--r",
            "0.1,1,10",
            "--t-max",
            "50",
            "--t-points",
            "30",
            "--out",
            "run",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let traces = fs::read_to_string(d.join("run/two_atom_traces.csv")).unwrap();
    let mut lines = traces.lines();
    assert_eq!(lines.next(), Some("r,t,gamma0_t,i_bar"));
    assert_eq!(lines.count(), 90);
    let maxima = dyncorr::experiments::read_csv(d.join("run/two_atom_maxima.csv")).unwrap();
    assert_eq!(maxima.len(), 3);

    let m: RunManifest =
        serde_json::from_str(&fs::read_to_string(d.join("run/manifest.json")).unwrap()).unwrap();
    assert_eq!(m.command, "two-atom");
    assert_eq!(m.outputs.len(), 2);
    assert_eq!(
        m.outputs[0].sha256,
        dyncorr::experiments::sha256_file(d.join("run/two_atom_traces.csv")).unwrap()
    );
    assert_eq!(m.parameters["model"]["dipole_norm"], 2.0);
    assert_eq!(m.parameters["model"]["theta"], 0.0);
}

#[test]
fn two_atom_csv_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let args = |out: &'static str, workers: &'static str| {
        vec![
            "two-atom",
            "--r",
            "0,0.5,2",
            "--t-points",
            "20",
            "--out",
            out,
            "--workers",
            workers,
        ]
    };
    assert_eq!(code(&run_in(d, &args("a", "1"))), 0);
    assert_eq!(code(&run_in(d, &args("b", "3"))), 0);
    for f in ["two_atom_traces.csv", "two_atom_maxima.csv"] {
        assert_eq!(
            fs::read(d.join("a").join(f)).unwrap(),
            fs::read(d.join("b").join(f)).unwrap()
        );
    }
}

#[test]
fn two_atom_usage_errors() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(code(&run_in(d, &["two-atom", "--r", "", "--out", "x"])), 1);
    assert_eq!(code(&run_in(d, &["two-atom", "--out", "x"])), 1);
    assert_eq!(
        code(&run_in(d, &["two-atom", "--r", "-1", "--out", "x"])),
        1
    );
    assert_eq!(
        code(&run_in(
            d,
            &["two-atom", "--r", "1", "--dipole", "0", "--out", "x"]
        )),
        1
    );
}

#[test]
fn zz_thermal_outputs_and_codes() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let o = run_in(
        d,
        &[
            "zz-thermal",
            "--target-p-error",
            "0.05,0.1",
            "--T",
            "0.1,1,3",
            "--out",
            "zz",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let lines = dyncorr::experiments::read_csv(d.join("zz/zz_isolines.csv")).unwrap();
    assert_eq!(lines.len(), 6);
    for r in &lines {
        assert!((r.p_error.unwrap() - r.param("target").unwrap()).abs() < 1e-6);
    }
    let grid = dyncorr::experiments::read_csv(d.join("zz/zz_p_error_grid.csv")).unwrap();
    assert_eq!(grid.len(), 3 * 40);
    assert!(d.join("zz/manifest.json").exists());

    assert_eq!(
        code(&run_in(
            d,
            &["zz-thermal", "--target-p-error", "1.5", "--out", "zz"]
        )),
        1
    );
    assert_eq!(
        code(&run_in(
            d,
            &["zz-thermal", "--target-p-error", "0", "--out", "zz"]
        )),
        1
    );

    let o = run_in(
        d,
        &[
            "zz-thermal",
            "--target-p-error",
            "0.5",
            "--T",
            "0.2",
            "--t-max",
            "0.01",
            "--out",
            "zz",
        ],
    );
    assert_eq!(code(&o), 6);
    assert!(String::from_utf8_lossy(&o.stderr).contains("T = 0.2"));
}

#[test]
fn selftest_and_tolerance_config() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let o = run_in(d, &["selftest", "--seed", "7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
    assert!(d.join("dyncorr-manifest.json").exists());

    fs::write(d.join("neg.json"), r#"{"hermitian": -1e-10}"#).unwrap();
    assert_eq!(
        code(&run_in(d, &["--tolerances", "neg.json", "selftest"])),
        1
    );

    let o = bin()
        .current_dir(d)
        .env("DYNCORR_TOLERANCE_PROFILE", "strict")
        .args(["selftest", "--seed", "8"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let m: RunManifest =
        serde_json::from_str(&fs::read_to_string(d.join("dyncorr-manifest.json")).unwrap())
            .unwrap();
    assert_eq!(m.tolerances.hermitian, 1e-11);

    let o = bin()
        .current_dir(d)
        .env("DYNCORR_TOLERANCE_PROFILE", "sloppy")
        .arg("selftest")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn help_goes_to_stdout() {
    let o = bin().arg("--help").output().unwrap();
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("two-atom"));
}
