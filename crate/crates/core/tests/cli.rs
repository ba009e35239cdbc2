use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use hypmcf::config::read_config;
use hypmcf::diagnostics::{read_metadata_file, read_report_csv, CSV_HEADER};

fn hypmcf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypmcf")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn meta(dir: &Path, key: &str) -> Option<String> {
    read_metadata_file(&dir.join("metadata.txt")).unwrap().into_iter().find(|(k, _)| k == key).map(|(_, v)| v)
}

const AXI_SPHERE: &str = "method=axi\nlaw=lefloch\nshape=sphere\nradius=1\nv0=0\ndt=0.005\nt_final=1.0\nresolution=64\n";

#[test]
fn evolve_writes_outputs_and_records_the_halt() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "run.cfg", AXI_SPHERE);
    let out = tmp.path().join("out");
    let o = hypmcf(&["evolve", "--quiet", "--config", &cfg, "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stderr.is_empty());

    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some(CSV_HEADER));
    let rows = read_report_csv(&out.join("report.csv")).unwrap();
    // the sphere vanishes near T_max = 1/√2 and the run stops there
    let last = rows.last().unwrap();
    assert!(last.time < 0.75 && last.time > 0.65, "{}", last.time);
    assert!(last.area < 0.05 * rows[0].area);
    let halt = meta(&out, "halt_reason").unwrap();
    assert_ne!(halt, "completed");
    assert_eq!(meta(&out, "law").as_deref(), Some("lefloch"));
    assert!(out.join("snapshots/curve_0000000.csv").exists());

    // the recorded config reproduces the run
    let rerun = read_config(&out.join("config.txt")).unwrap();
    let again = tmp.path().join("again");
    let o = hypmcf(&["evolve", "--quiet", "--config", out.join("config.txt").to_str().unwrap(), "--output", again.to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(rerun.resolution().unwrap(), 64);
    assert_eq!(fs::read(out.join("report.csv")).unwrap(), fs::read(again.join("report.csv")).unwrap());
}

#[test]
fn fem_evolve_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "fem.cfg",
        "law=gurtin\nshape=ellipsoid\na=1\nb=2\nc=1\nv0=1\ndt=0.02\nt_final=0.2\nresolution=2\noutput_every=5\n",
    );
    let runs: Vec<Vec<u8>> = ["a", "b"]
        .iter()
        .map(|d| {
            let out = tmp.path().join(d);
            let o = hypmcf(&["--quiet", "evolve", "--config", &cfg, "--output", out.to_str().unwrap()]);
            assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
            assert!(out.join("snapshots/surface_0000005.off").exists());
            assert!(out.join("snapshots/surface_0000010.off").exists());
            fs::read(out.join("report.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    // expanding at first
    let rows = read_report_csv(&tmp.path().join("a/report.csv")).unwrap();
    assert!(rows[1].area > rows[0].area);
}

#[test]
fn bad_config_exits_nonzero_with_message() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.cfg", &AXI_SPHERE.replace("lefloch", "mystery"));
    let o = hypmcf(&["evolve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error:") && err.contains("mystery"), "{err}");

    let o = hypmcf(&["evolve", "--config", tmp.path().join("missing.cfg").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = hypmcf(&["frobnicate"]);
    assert!(!o.status.success());
}

#[test]
fn converge_writes_table() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "conv.cfg",
        "method=axi\nlaw=gurtin\nshape=sphere\nradius=1\nv0=0\ndt_scale=1\ndt_power=1\nt_final=0.5\nresolutions=32,64\n",
    );
    let out = tmp.path().join("conv");
    let o = hypmcf(&["converge", "--config", &cfg, "--output", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8_lossy(&o.stdout);
    assert!(table.contains("6.3402e-4"), "{table}");
    let csv = fs::read_to_string(out.join("convergence.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "resolution,h,dt,error,eoc");
    assert!(lines[1].starts_with("32,") && lines[1].ends_with(','));
    let eoc: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
    assert!(lines[2].starts_with("64,") && eoc > 1.9 && eoc < 2.5, "{}", lines[2]);
    assert!(out.join("resolution_32/report.csv").exists());
    assert!(out.join("resolution_64/metadata.txt").exists());
}

#[test]
fn converge_needs_an_exact_solution() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "torus.cfg",
        "method=axi\nlaw=gurtin\nshape=torus\nmajor=2\nminor=1\nv0=0\ndt=0.01\nt_final=0.1\nresolutions=32,64\n",
    );
    let o = hypmcf(&["converge", "--config", &cfg, "--output", tmp.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("exact solution"));
}

#[test]
fn compare_reports() {
    let tmp = tempfile::tempdir().unwrap();
    let mk = |name: &str, text: &str| {
        let cfg = write(tmp.path(), &format!("{name}.cfg"), text);
        let out = tmp.path().join(name);
        assert!(hypmcf(&["--quiet", "evolve", "--config", &cfg, "--output", out.to_str().unwrap()]).status.success());
        out.to_str().unwrap().to_string()
    };
    let axi = mk("axi", "method=axi\nlaw=gurtin\nshape=sphere\nradius=1\nv0=0\ndt=0.01\nt_final=0.5\nresolution=128\n");
    let fem = mk("fem", "method=fem\nlaw=gurtin\nshape=sphere\nradius=1\nv0=0\ndt=0.01\nt_final=0.5\nresolution=4\n");
    let lf = mk("lf", "method=axi\nlaw=lefloch\nshape=sphere\nradius=1\nv0=0\ndt=0.01\nt_final=0.5\nresolution=128\n");

    let o = hypmcf(&["compare", &axi, &axi]);
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout).to_string();
    assert!(text.contains("max_relative_area_discrepancy=0.000000e0"), "{text}");

    let out = tmp.path().join("cmp");
    let o = hypmcf(&["compare", &fem, &axi, "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(out.join("compare.txt")).unwrap();
    let d: f64 = text.lines().next().unwrap().split('=').nth(1).unwrap().parse().unwrap();
    assert!(d > 0.0 && d < 0.02, "{d}");

    let o = hypmcf(&["compare", &axi, &lf]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("laws differ"));
}
