use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hdivflow::checkpoint::Checkpoint;
use hdivflow::fem::analysis::study::test_one_mesh;
use hdivflow::mesh_io::save_mesh;
use hdivflow::tables::{load_records, ConvergenceRecord, CutlineRecord};

fn hdivflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hdivflow"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn convergence_writes_table_with_orders() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdivflow(&["convergence", "--nu", "1", "--r", "2", "--meshes", "3", "--out", arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let path = dir.path().join("convergence.csv");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("nu,r,h,dt,velERR,preERR,order_vel,order_pre\n"));
    let rows: Vec<ConvergenceRecord> = load_records(&path).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].order_vel.is_none());
    let order = rows[2].order_vel.unwrap();
    assert!(order > 1.0 && order < 3.0, "{order}");
    assert!(rows.windows(2).all(|w| w[1].vel_err < w[0].vel_err));
}

#[test]
fn identical_configs_give_identical_csv() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let common = ["convergence", "--nu", "1,1e-5", "--r", "1.5", "--meshes", "2"];
    let run = |dir: &Path, jobs: &str| {
        let mut args = common.to_vec();
        args.extend(["--jobs", jobs, "--out", arg(dir)]);
        let out = hdivflow(&args);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        fs::read(dir.join("convergence.csv")).unwrap()
    };
    let serial = run(a.path(), "1");
    let parallel = run(b.path(), "3");
    assert_eq!(serial, parallel);
    let rows: Vec<ConvergenceRecord> = load_records(a.path().join("convergence.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.nu).collect::<Vec<_>>(), vec![1.0, 1.0, 1e-5, 1e-5]);
}

#[test]
fn missing_mesh_file_fails_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("no_such_mesh.txt");
    let out = hdivflow(&["run", "--mesh", arg(&missing), "--out", arg(dir.path())]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no_such_mesh.txt"), "{err}");
}

#[test]
fn invalid_parameters_fail_with_message() {
    let out = hdivflow(&["convergence", "--r", "0.5"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("r must exceed 1"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"nu": 1, "viscosity": 2}"#).unwrap();
    let out = hdivflow(&["convergence", "--config", arg(&cfg)]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown field `viscosity`") && err.contains("c.json"), "{err}");
}

#[test]
fn channel_writes_vtk_and_three_cutlines() {
    let dir = tempfile::tempdir().unwrap();
    let out = hdivflow(&["channel", "--r", "2.5", "--dt", "2.5", "--out", arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let vtk = fs::read_to_string(dir.path().join("channel_nu0.01_r2.5.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile Version 4.2\n"));
    assert!(vtk.contains("CELL_DATA 864\n"));
    for x in ["0.5", "1", "2.5"] {
        let rows: Vec<CutlineRecord> = load_records(dir.path().join(format!("cutline_nu0.01_r2.5_x{x}.csv"))).unwrap();
        assert_eq!(rows.len(), 41);
        assert!(rows.iter().all(|r| r.x_station == x.parse::<f64>().unwrap()));
        assert!(rows.iter().any(|r| r.ux > 0.0));
    }
}

#[test]
fn run_on_mesh_file_writes_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let mesh_path = dir.path().join("square.mesh");
    let mesh = test_one_mesh(4, 0.15, 7).unwrap();
    save_mesh(&mesh, &mesh_path).unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"command": "run", "nu": 1, "r": 1.5, "dt": 0.25}"#).unwrap();
    let out = hdivflow(&["run", "--config", arg(&cfg), "--mesh", arg(&mesh_path), "--out", arg(dir.path())]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run_dir = dir.path().join("run_nu1_r1.5");
    let last = Checkpoint::load(run_dir.join("checkpoint_00004.txt")).unwrap();
    assert_eq!(last.step, 4);
    assert!((last.time - 1.0).abs() < 1e-12);
    assert_eq!(last.velocity.0.len(), 2 * mesh.num_faces());
    assert_eq!(last.pressure.0.len(), mesh.num_elements());
    assert!(!run_dir.join("checkpoint_00005.txt").exists());
    assert!(fs::read_to_string(run_dir.join("final.vtk")).unwrap().contains("CELLS 32 128"));
    let rows: Vec<ConvergenceRecord> = load_records(dir.path().join("run.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].vel_err.is_finite() && rows[0].vel_err > 0.0);
}
