use illposed::condensates::{CondensateProblem, SpectralDataset};
use illposed::eit::{homogeneous_dataset, trig_patterns, ElectrodeDataset};
use illposed::io;
use serde_json::Value;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn illposed(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_illposed"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_config(dir: &Path, name: &str, json: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, json).unwrap();
    p
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_same_files(a: &Path, b: &Path) {
    let mut names: Vec<_> = fs::read_dir(a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for n in names {
        assert_eq!(fs::read(a.join(&n)).unwrap(), fs::read(b.join(&n)).unwrap(), "{n:?} differs");
    }
}

const SMALL_FIT: &str = r#"{
    "grid": {"axes": [{"dim": 6, "lo": -0.014, "hi": 0.0, "points": 15}], "fixed": {"8": 0.0032}},
    "data": {"synth": {"truth": {"6": -0.0068, "8": 0.0032}, "noise": 0.03, "seed": 5, "bins": 60}}
}"#;

#[test]
fn min_kernel_demo_reports_twenty_rows_and_four_choices() {
    let dir = TempDir::new().unwrap();
    let out = illposed(&["reg-sweep", "--out", "run"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = io::read_sweep_csv(&dir.path().join("run/sweep.csv")).unwrap();
    assert_eq!(rows.len(), 20);
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0] && w[0][1] <= w[1][1] && w[0][2] >= w[1][2]));
    let choices = read_json(&dir.path().join("run/lambda_choices.json"));
    let choices = choices.as_array().unwrap();
    let names: Vec<&str> = choices.iter().map(|c| c["strategy"].as_str().unwrap()).collect();
    assert_eq!(names, ["discrepancy", "energy", "miller", "l_curve"]);
    for c in choices {
        assert!(c["lambda"].as_f64().unwrap() > 0.0, "{c}");
    }
    // Discrepancy and L-curve agree within a decade on this problem.
    let l = |k: usize| choices[k]["lambda"].as_f64().unwrap();
    assert!((l(0) / l(3)).log10().abs() < 1.0);
}

#[test]
fn empty_lambda_grid_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    write_config(dir.path(), "c.json", r#"{"lambda_points": 0}"#);
    let out = illposed(&["reg-sweep", "--config", "c.json", "--out", "run"], dir.path());
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty"));
}

#[test]
fn bad_flags_and_configs_are_usage_errors() {
    let dir = TempDir::new().unwrap();
    assert_eq!(code(&illposed(&["reg-sweep", "--threads", "x"], dir.path())), 1);
    assert_eq!(code(&illposed(&["no-such-verb"], dir.path())), 1);
    assert_eq!(code(&illposed(&["cond-fit", "--channel", "W"], dir.path())), 1);
    write_config(dir.path(), "typo.json", r#"{"lamda_lo": 1e-3}"#);
    assert_eq!(code(&illposed(&["reg-sweep", "--config", "typo.json"], dir.path())), 1);
    assert_eq!(code(&illposed(&["reg-sweep", "--config", "absent.json"], dir.path())), 1);
    assert_eq!(code(&illposed(&["eit-recon"], dir.path())), 1);
}

#[test]
fn missing_data_file_is_a_data_error_naming_the_path() {
    let dir = TempDir::new().unwrap();
    write_config(dir.path(), "r.json", r#"{"dataset": "nowhere/data.json"}"#);
    let out = illposed(&["eit-recon", "--config", "r.json", "--out", "run"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere/data.json"));
}

#[test]
fn unattainable_target_is_a_numerical_failure() {
    let dir = TempDir::new().unwrap();
    write_config(
        dir.path(),
        "s.json",
        r#"{"synth": {"truth": {"6": -0.0068, "8": 0.0032}, "noise": 0.03, "seed": 1, "target_chi_l": 1e-30}}"#,
    );
    let out = illposed(&["cond-synth", "--config", "s.json", "--out", "run"], dir.path());
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    for (run, threads) in [("a", "1"), ("b", "3")] {
        let out = illposed(&["reg-sweep", "--seed", "7", "--threads", threads, "--out", run], d);
        assert_eq!(code(&out), 0);
    }
    assert_same_files(&d.join("a"), &d.join("b"));

    write_config(d, "fit.json", SMALL_FIT);
    for run in ["c", "e"] {
        assert_eq!(code(&illposed(&["cond-fit", "--config", "fit.json", "--out", run], d)), 0);
    }
    assert_same_files(&d.join("c"), &d.join("e"));
}

#[test]
fn seed_flag_changes_the_noise() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    for (run, seed) in [("a", "1"), ("b", "2")] {
        assert_eq!(code(&illposed(&["reg-sweep", "--seed", seed, "--out", run], d)), 0);
    }
    assert_ne!(fs::read(d.join("a/sweep.csv")).unwrap(), fs::read(d.join("b/sweep.csv")).unwrap());
}

#[test]
fn saved_config_reproduces_the_run() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(code(&illposed(&["cond-synth", "--seed", "9", "--out", "a"], d)), 0);
    assert_eq!(code(&illposed(&["cond-synth", "--config", "a/config.json", "--out", "b"], d)), 0);
    assert_same_files(&d.join("a"), &d.join("b"));
}

#[test]
fn homogeneous_single_reconstruction_is_zero() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let data = homogeneous_dataset(32, &trig_patterns(10)).unwrap();
    io::write_electrode_dataset(&d.join("data.json"), &data).unwrap();
    write_config(d, "r.json", r#"{"dataset": "data.json", "recon": {"mode": "single"}, "raster": 33}"#);
    let out = illposed(&["eit-recon", "--config", "r.json", "--out", "run"], d);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let raster = io::read_raster_csv(&d.join("run/field.csv")).unwrap();
    assert_eq!(raster.n, 33);
    let inside: Vec<f64> = raster.values.iter().copied().filter(|v| v.is_finite()).collect();
    assert!(inside.len() > 33 * 33 / 2);
    assert!(inside.iter().all(|v| v.abs() < 1e-12), "max {:e}", inside.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    let diag = read_json(&d.join("run/diagnostics.json"));
    assert_eq!(diag["mode"], "single");
    assert_eq!(diag["l_max"], 10);
}

#[test]
fn unit_conductivity_forward_gives_cosine_potentials() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write_config(d, "f.json", r#"{"max_harmonic": 1, "electrodes": 16}"#);
    let out = illposed(&["eit-forward", "--config", "f.json", "--out", "run"], d);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let data = io::read_electrode_dataset(&d.join("run/dataset.json")).unwrap();
    assert_eq!(data.excitations.len(), 2);
    let cos = data
        .excitations
        .iter()
        .find(|e| (e.current[0] - 1.0).abs() < 1e-12)
        .expect("cosine pattern");
    for (t, v) in data.electrode_angles.iter().zip(&cos.potential) {
        assert!((v - t.cos()).abs() < 1e-2, "θ = {t}: {v}");
    }
    // The emitted mesh and field read back and match each other.
    let mesh = io::read_mesh_csv(&d.join("run/mesh_nodes.csv"), &d.join("run/mesh_triangles.csv")).unwrap();
    let (points, sigma) = io::read_field_csv(&d.join("run/conductivity.csv")).unwrap();
    assert_eq!(points, mesh.nodes);
    assert!(sigma.iter().all(|&s| s == 1.0));
}

#[test]
fn forward_then_linear_reconstruction_locates_the_inclusion() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    // A homogeneous run on the same mesh serves as the measured φ0.
    for (name, preset) in [("fwd", "high_inclusion"), ("ref", "homogeneous")] {
        let json = format!(
            r#"{{"conductivity": {{"kind": "preset", "name": "{preset}"}}, "mesh": {{"kind": "rings", "rings": 24}}}}"#
        );
        write_config(d, "f.json", &json);
        assert_eq!(code(&illposed(&["eit-forward", "--config", "f.json", "--out", name], d)), 0);
    }
    write_config(
        d,
        "r.json",
        r#"{"dataset": "fwd/dataset.json",
            "recon": {"mode": "linear", "crossing": true, "reference": "ref/dataset.json", "noise_levels": [0.05, 0.1]}}"#,
    );
    let out = illposed(&["eit-recon", "--config", "r.json", "--out", "rec"], d);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let diag = read_json(&d.join("rec/diagnostics.json"));
    // The crossing never undercuts the default floor.
    assert!(diag["lambda"].as_f64().unwrap() >= 1e-6);
    assert_eq!(diag["noisy"].as_array().unwrap().len(), 2);
    let (points, sigma) = io::read_field_csv(&d.join("rec/field.csv")).unwrap();
    assert_eq!(points.len(), 24 * 64);
    let k = (0..sigma.len()).max_by(|&a, &b| sigma[a].total_cmp(&sigma[b])).unwrap();
    let p = points[k];
    assert!(sigma[k] > 1.0);
    assert!(p[0].hypot(p[1] - 0.4) < 0.2, "peak at {p:?}");
    // Noise robustness is an acceptance property; here the replays only
    // need to be well-formed fields on the same nodes.
    for file in ["field_noise0.csv", "field_noise1.csv"] {
        let (q, v) = io::read_field_csv(&d.join("rec").join(file)).unwrap();
        assert_eq!(q, points);
        assert!(v.iter().all(|s| s.is_finite() && *s > 0.0));
        assert_ne!(v, sigma);
    }
    let crossing = io::read_table_csv(&d.join("rec/crossing.csv")).unwrap();
    assert_eq!(crossing.headers, ["index", "sigma", "component"]);
    assert_eq!(crossing.rows.len() as u64, diag["rank"].as_u64().unwrap());
}

#[test]
fn synthetic_files_feed_the_fit() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    assert_eq!(code(&illposed(&["cond-synth", "--out", "syn"], d)), 0);
    let data: SpectralDataset =
        io::read_spectral_dataset(&d.join("syn/spectral_values.csv"), &d.join("syn/spectral_covariance.csv"))
            .unwrap();
    assert_eq!(data.s.len(), 125);
    let truth = io::read_table_csv(&d.join("syn/truth.csv")).unwrap();
    assert_eq!(truth.rows.len(), 125);

    write_config(
        d,
        "fit.json",
        r#"{
            "grid": {"axes": [{"dim": 6, "lo": -0.014, "hi": 0.0, "points": 15}], "fixed": {"8": 0.0032}},
            "data": {"files": {"values": "syn/spectral_values.csv", "covariance": "syn/spectral_covariance.csv"}}
        }"#,
    );
    let out = illposed(&["cond-fit", "--config", "fit.json", "--out", "fit"], d);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let fit = read_json(&d.join("fit/fit.json"));
    let best = fit["best"]["6"].as_f64().unwrap();
    assert!((best + 6.8e-3).abs() < 1.5e-3, "O6 = {best}");
    assert_eq!(fit["intervals"].as_array().unwrap().len(), 3);
    let (dims, surface) = io::read_surface_csv(&d.join("fit/surface.csv")).unwrap();
    assert_eq!(dims, [6]);
    assert_eq!(surface.len(), 15);
    let min = surface.iter().map(|p| p.chi_l).fold(f64::INFINITY, f64::min);
    assert_eq!(min, fit["chi_l_min"].as_f64().unwrap());

    // The same dataset assembled in-process gives the same χ²_exp.
    let model = illposed::condensates::ChannelModel::new(illposed::condensates::Channel::VMinusA, &[6, 8]).unwrap();
    let corridor = illposed::condensates::ErrorCorridor::power(10, 5.7e-3, -150.0, -1.0).unwrap();
    let problem = CondensateProblem::new(&data, &model, &corridor).unwrap();
    assert_eq!(problem.chi_exp(), fit["chi_exp"].as_f64().unwrap());
}

#[test]
fn channel_flag_selects_the_correlator() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    // Dimension 4 and a short interval suit V, A and V+A; V−A uses the defaults.
    write_config(
        d,
        "c.json",
        r#"{"model": {"channel": "V", "dims": [4, 6]},
            "corridor": {"form": {"kind": "combined", "dim": 8, "o_max": 0.01}, "s_lo": -3.5, "s_hi": -0.4},
            "synth": {"truth": {"4": 0.01, "6": -0.003}, "noise": 0.03, "seed": 1}}"#,
    );
    for flag in ["V-A", "V", "A", "V+A"] {
        let config = if flag == "V-A" { vec![] } else { vec!["--config", "c.json"] };
        let args = [vec!["cond-synth", "--channel", flag, "--out", flag], config].concat();
        let out = illposed(&args, d);
        assert_eq!(code(&out), 0, "{flag}: {}", String::from_utf8_lossy(&out.stderr));
        let cfg = read_json(&d.join(flag).join("config.json"));
        assert_eq!(cfg["model"]["channel"], flag);
    }
}

#[test]
fn dataset_json_has_the_documented_layout() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    write_config(d, "f.json", r#"{"max_harmonic": 2, "electrodes": 8, "mesh": {"kind": "rings", "rings": 8}}"#);
    assert_eq!(code(&illposed(&["eit-forward", "--config", "f.json", "--out", "run"], d)), 0);
    let v = read_json(&d.join("run/dataset.json"));
    assert_eq!(v["electrode_angles"].as_array().unwrap().len(), 8);
    let ex = v["excitations"].as_array().unwrap();
    assert_eq!(ex.len(), 4);
    assert_eq!(ex[0]["current"].as_array().unwrap().len(), 8);
    assert_eq!(ex[0]["potential"].as_array().unwrap().len(), 8);
    let back: ElectrodeDataset = serde_json::from_value(v).unwrap();
    assert_eq!(back, io::read_electrode_dataset(&d.join("run/dataset.json")).unwrap());
}
