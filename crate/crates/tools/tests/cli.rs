use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ifm_core::analysis::{self, EvConfig};
use ifm_tools::manifest::RunManifest;

fn ifm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ifm"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn data_table() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_index_table.csv")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|f| f.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn stderr_json(out: &Output) -> serde_json::Value {
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1, "{text}");
    serde_json::from_str(text.trim()).unwrap()
}

#[test]
fn ev_curve_matches_library_pointwise() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ev.csv");
    let res = ifm(&[
        "ev-curve",
        "--points",
        "101",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{res:?}");
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["R", "eta", "p_ifm", "p_abs"]);
    assert_eq!(rows.len(), 101);
    for row in &rows {
        let rep = analysis::ev_efficiency(&EvConfig::complementary(row[0]).unwrap()).unwrap();
        assert_eq!(row[1], rep.eta);
        assert_eq!(row[2], rep.p_l);
        assert_eq!(row[3], rep.p_abs);
    }
    assert_eq!(rows[50][1], 1.0 / 3.0);
    assert_eq!(rows[0][2], 0.0);

    let manifest: RunManifest =
        serde_json::from_str(&std::fs::read_to_string(RunManifest::path_for(&out)).unwrap())
            .unwrap();
    assert_eq!(manifest.command, "ev-curve");
    assert_eq!(manifest.outputs, std::slice::from_ref(&out));
    assert_eq!(manifest.config["r_values"].as_array().unwrap().len(), 101);
}

#[test]
fn zeno_curve_rows_and_empty_list() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("z.csv");
    let res = ifm(&[
        "zeno-curve",
        "--n-list",
        "5,10,20",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let (header, rows) = read_csv(&out);
    assert_eq!(header, ["N", "p_L", "p_U", "p_abs", "p_loss", "eta"]);
    assert_eq!(rows[1][0], 10.0);
    assert!((rows[1][1] - 0.780_546_069_781_140_5).abs() < 1e-12);

    let empty = dir.path().join("empty.csv");
    let res = ifm(&[
        "zeno-curve",
        "--n-list",
        "",
        "--output",
        empty.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    assert_eq!(
        std::fs::read_to_string(&empty).unwrap(),
        "N,p_L,p_U,p_abs,p_loss,eta\n"
    );

    let res = ifm(&[
        "zeno-curve",
        "--n-list",
        "1,4",
        "--output",
        empty.to_str().unwrap(),
    ]);
    assert!(!res.status.success());
    assert_eq!(stderr_json(&res)["error"], "validation");
}

#[test]
fn lossy_zeno_curve_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("lossy.toml");
    std::fs::write(
        &cfg,
        "[circuit]\nloss_per_stage = 0.074\n[curve]\nn_list = [10]\n",
    )
    .unwrap();
    let out = dir.path().join("z.csv");
    let res = ifm(&[
        "zeno-curve",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let (_, rows) = read_csv(&out);
    let rep = analysis::zeno_probabilities(10, 0.074).unwrap();
    assert_eq!(rows[0][5], rep.eta);
    assert!(rows[0][4] > 0.0);
}

#[test]
fn spectrum_with_and_without_absorbers() {
    let dir = tempfile::tempdir().unwrap();
    let open_cfg = dir.path().join("open.toml");
    std::fs::write(
        &open_cfg,
        "[circuit]\nscheme = \"ev\"\nr_bs1 = 0.852\nabsorbers = false\n",
    )
    .unwrap();
    let out = dir.path().join("open.csv");
    let res = ifm(&[
        "spectrum",
        "--config",
        open_cfg.to_str().unwrap(),
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "{res:?}");
    let summary: serde_json::Value = serde_json::from_slice(&res.stdout).unwrap();
    assert!(summary["visibility"].as_f64().unwrap() > 0.998);
    let (header, rows) = read_csv(&out);
    assert_eq!(
        header,
        ["lambda_nm", "p_upper", "p_lower", "p_absorbed", "p_lost"]
    );
    assert_eq!(rows.len(), 4001);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0]));

    // Every probability field carries at least 12 significant digits.
    let text = std::fs::read_to_string(&out).unwrap();
    let field = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
    let mantissa = field.split('e').next().unwrap().replace(['.', '-'], "");
    assert!(mantissa.len() >= 12, "{field}");

    let blocked_cfg = dir.path().join("blocked.toml");
    std::fs::write(
        &blocked_cfg,
        "[circuit]\nn_stages = 10\nabsorbers = true\n[sweep]\nlambda_min_nm = 1540\nlambda_max_nm = 1550\n",
    )
    .unwrap();
    let out = dir.path().join("blocked.csv");
    assert!(ifm(&[
        "spectrum",
        "--config",
        blocked_cfg.to_str().unwrap(),
        "--output",
        out.to_str().unwrap()
    ])
    .status
    .success());
    let (_, rows) = read_csv(&out);
    let lo = rows.iter().map(|r| r[2]).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r[2]).fold(0.0, f64::max);
    assert!(hi - lo < 1e-9, "absorbers leave a flat spectrum");
}

#[test]
fn single_wavelength_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("one.toml");
    std::fs::write(
        &cfg,
        "[sweep]\nlambda_min_nm = 1550\nlambda_max_nm = 1550\n",
    )
    .unwrap();
    let out = dir.path().join("one.csv");
    assert!(ifm(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        out.to_str().unwrap()
    ])
    .status
    .success());
    assert_eq!(read_csv(&out).1.len(), 1);
}

#[test]
fn count_is_deterministic_and_complete() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("count.toml");
    std::fs::write(&cfg, "[circuit]\nn_stages = 10\n[source]\nmu = 0.1\n").unwrap();
    let args = [
        "count",
        "--config",
        cfg.to_str().unwrap(),
        "--gates",
        "300000",
        "--seed",
        "4",
    ];
    let a = ifm(&args);
    let b = ifm(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let rec: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    for key in [
        "c_t",
        "c_l",
        "c_u",
        "explosions",
        "multi_photon_gates",
        "gates",
        "seed",
    ] {
        assert!(rec[key].is_u64(), "{key}");
    }
    assert_eq!(rec["gates"], 300_000);
    assert!(rec["eta_ev"]["eta"].is_f64() && rec["eta_zeno"]["sigma"].is_f64());

    let out = dir.path().join("count.json");
    let mut with_output = args.to_vec();
    with_output.extend(["--output", out.to_str().unwrap()]);
    assert!(ifm(&with_output).status.success());
    assert_eq!(std::fs::read(&out).unwrap(), a.stdout);
    assert!(RunManifest::path_for(&out).exists());
}

#[test]
fn design_coupler_prints_one_json_line() {
    let table = data_table();
    let res = ifm(&[
        "design-coupler",
        "--table",
        table.to_str().unwrap(),
        "--target-r",
        "0.9938",
        "--length-um",
        "20",
        "--bend-um",
        "2",
    ]);
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    let d: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!((d["R"].as_f64().unwrap() - 0.9938).abs() < 1e-6);
    let gap = d["gap_nm"].as_f64().unwrap();
    assert!((500.0..=650.0).contains(&gap));
    assert_eq!(d["bend_correction_um"], 2.0);

    let res = ifm(&[
        "design-coupler",
        "--table",
        table.to_str().unwrap(),
        "--target-r",
        "0.99999",
        "--length-um",
        "20",
        "--bend-um",
        "2",
    ]);
    assert!(!res.status.success());
    let err = stderr_json(&res);
    assert!(
        err["message"].as_str().unwrap().contains("unreachable"),
        "{err}"
    );
}

#[test]
fn bad_inputs_give_single_line_json_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad_table = dir.path().join("t.csv");
    std::fs::write(
        &bad_table,
        "# lambda_nm=1550\ngap_nm,n_s,n_a\n300,2.12,2.10\n270,2.1232,2.1036\n",
    )
    .unwrap();
    let res = ifm(&[
        "design-coupler",
        "--table",
        bad_table.to_str().unwrap(),
        "--target-r",
        "0.5",
        "--length-um",
        "20",
    ]);
    assert!(!res.status.success());
    let err = stderr_json(&res);
    assert_eq!(err["error"], "table");
    assert!(err["message"].as_str().unwrap().contains("row 2"));

    let cfg = dir.path().join("typo.toml");
    std::fs::write(&cfg, "[sweep]\nlambda_min = 1500\n").unwrap();
    let res = ifm(&[
        "spectrum",
        "--config",
        cfg.to_str().unwrap(),
        "--output",
        "x.csv",
    ]);
    assert_eq!(stderr_json(&res)["error"], "parse");

    let res = ifm(&["count"]);
    assert_eq!(res.status.code(), Some(2));
    assert_eq!(stderr_json(&res)["error"], "usage");

    let res = ifm(&[
        "ev-curve",
        "--points",
        "3",
        "--output",
        "/nonexistent-dir/ev.csv",
    ]);
    assert_eq!(stderr_json(&res)["error"], "io");
}

#[test]
fn help_lists_units() {
    for (cmd, unit) in [
        ("spectrum", "nm"),
        ("design-coupler", "um"),
        ("count", "photons per gate"),
        ("zeno-curve", "dimensionless"),
        ("ev-curve", "dimensionless"),
    ] {
        let res = ifm(&[cmd, "--help"]);
        assert!(res.status.success());
        let text = String::from_utf8(res.stdout).unwrap();
        assert!(text.contains("--output"), "{cmd}");
        assert!(text.contains(unit), "{cmd}: {text}");
    }
}

#[test]
fn shipped_recipes_parse() {
    let recipes = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../recipes");
    let mut seen = 0;
    for entry in std::fs::read_dir(recipes).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            ifm_tools::config::RunConfig::load(&path)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            seen += 1;
        }
    }
    assert!(seen >= 6);
}
