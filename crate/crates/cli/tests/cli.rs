use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use otto_cli::config::RunConfig;
use otto_cli::{distribution_csv, sweep_csv};
use otto_core::stats::{kl_divergence, l1_coherence, moments, joint_distribution, scheme_cumulants};
use otto_core::strokes::gibbs_state;
use otto_core::{
    BathSpec, ColdStroke, CycleBlocks, CycleSpec, PointerWidth, SchemeRegistry, StrokeHamiltonian,
};

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn golden_configs() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "conf"))
        .collect();
    v.sort();
    v
}

fn otto(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_otto")).args(args).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

const BASE: &str = "\
omega1 = 1
omega2 = 3.2
beta_c = 3
beta_h = 0.2
gamma_c = 0.05
gamma_h = 0.05
";

fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines
        .map(|l| l.split(',').map(|f| f.parse::<f64>().unwrap()).collect())
        .collect();
    (header, rows)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a.is_nan() && b.is_nan()) || a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn run_matches_direct_library_calls() {
    let text = format!(
        "{BASE}epsilon = 0.4\ntau_b = 7\nstroke = parametric\nr = 0.3\nphi = 0.2\ncold = gksl\n\
         schemes = UM, TPM, S1, S2, S3\nsigmas = 0.7, 0/1/inf\nsweep = tau_b\nsweep_values = 2, 7.5, 19\n"
    );
    let config = RunConfig::parse(&text.replace("sigmas = 0.7, 0/1/inf", "sigmas = 0.7")).unwrap();
    let (header, rows) = parse_csv(&sweep_csv(&config).unwrap());
    assert_eq!(rows.len(), 3);
    assert_eq!(header.len(), 1 + 5 * 6);

    let registry = SchemeRegistry::with_builtin();
    for (row, tau_b) in rows.iter().zip([2.0, 7.5, 19.0]) {
        assert_eq!(row[0], tau_b);
        let h1 = StrokeHamiltonian::pauli(1.0, 0.4).unwrap();
        let h2 = StrokeHamiltonian::pauli(3.2, 0.4).unwrap();
        let cycle = CycleSpec::parametric(
            h1.clone(),
            h2,
            0.3,
            0.2,
            BathSpec::new(0.2, 0.05, tau_b),
            ColdStroke::Bath(BathSpec::new(3.0, 0.05, tau_b)),
        )
        .unwrap();
        let blocks = CycleBlocks::new(&cycle).unwrap();
        let reference = gibbs_state(&h1, 3.0).unwrap();
        for (k, name) in ["UM", "TPM", "S1", "S2", "S3"].iter().enumerate() {
            let sc = registry.uniform(name, PointerWidth::Finite(0.7)).unwrap();
            let ss = blocks.steady_state(&sc).unwrap();
            let c = scheme_cumulants(&blocks, &sc, &ss).unwrap();
            let cols = &row[1 + 6 * k..1 + 6 * (k + 1)];
            if *name != "UM" {
                let dist = joint_distribution(&blocks, &sc, &ss).unwrap();
                assert!(close(cols[0], moments(&dist, 1, 0).unwrap(), 1e-12));
            }
            assert!(close(cols[0], c.w, 1e-12), "{name} w");
            assert!(close(cols[1], c.w2c, 1e-12), "{name} w2c");
            assert!(close(cols[2], c.q_h, 1e-12), "{name} qh");
            assert!(close(cols[3], kl_divergence(&ss, &reference).unwrap(), 1e-12), "{name} kl");
            assert!(close(cols[4], l1_coherence(&ss, &h1), 1e-12), "{name} l1");
            let engine = -c.w > 0.0 && c.q_h > 0.0;
            assert_eq!(cols[5], if engine { 1.0 } else { 0.0 });
        }
    }

    let per_pointer = RunConfig::parse(&text.replace("UM, TPM, S1, S2, S3", "S3").replace("0/1/inf", "0/inf")).unwrap();
    let (header, _) = parse_csv(&sweep_csv(&per_pointer).unwrap());
    assert!(header.contains(&"S3_sigma0/inf_w".to_string()));
}

#[test]
fn golden_configs_round_trip() {
    let squash = |s: &str| {
        s.lines()
            .map(|l| l.split('#').next().unwrap())
            .flat_map(str::chars)
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
    };
    let configs = golden_configs();
    assert!(configs.len() >= 6);
    for path in configs {
        let text = fs::read_to_string(&path).unwrap();
        let config = RunConfig::parse(&text).unwrap();
        assert_eq!(squash(&config.to_config_string()), squash(&text), "{}", path.display());
        assert_eq!(RunConfig::parse(&config.to_config_string()).unwrap(), config);
    }
}

#[test]
fn binary_output_is_deterministic_and_thread_independent() {
    let path = configs_dir().join("transition_sweep.conf");
    let a = otto(&["run", path.to_str().unwrap()]);
    let b = otto(&["run", path.to_str().unwrap()]);
    let single = Command::new(env!("CARGO_BIN_EXE_otto"))
        .args(["run", path.to_str().unwrap()])
        .env("OTTO_THREADS", "1")
        .output()
        .unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, single.stdout);
    let config = RunConfig::parse(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(String::from_utf8(a.stdout).unwrap(), sweep_csv(&config).unwrap());
}

#[test]
fn output_path_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let text = format!(
        "{BASE}tau_b = 1\nstroke = parametric\nr = 0.2\ncold = reset\nschemes = TPM\n\
         sweep = tau_b\nsweep_start = 0\nsweep_stop = 4\nsweep_points = 3\noutput = {}\n",
        out.display()
    );
    let cfg = write_config(dir.path(), "a.conf", &text);
    let o = otto(&["run", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let csv = fs::read_to_string(out).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("tau_b,TPM_w,TPM_w2c,TPM_qh,TPM_kl,TPM_l1,TPM_engine\n"));
}

fn failure(text: &str, command: &str) -> (i32, String) {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.conf", text);
    let o = otto(&[command, cfg.to_str().unwrap()]);
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");
    (o.status.code().unwrap(), stderr)
}

#[test]
fn errors_are_distinct_and_nonzero() {
    let sweep = "sweep = tau_b\nsweep_start = 1\nsweep_stop = 2\nsweep_points = 2\n";
    let head = format!("{BASE}tau_b = 1\nstroke = parametric\nr = 0.2\n");

    let (unknown, msg) = failure(&format!("{head}schemes = TPM, S4\n{sweep}"), "run");
    assert!(msg.contains("unknown scheme"), "{msg}");

    let (count, msg) = failure(&format!("{head}schemes = S2\nsigmas = 1/2\n{sweep}"), "run");
    assert!(msg.contains("pointer widths"), "{msg}");

    let (io, msg) = failure(&format!("{head}schemes = TPM\n{sweep}output = /nonexistent-dir/x/out.csv\n"), "run");
    assert!(msg.contains("/nonexistent-dir/x/out.csv"), "{msg}");

    let (config, _) = failure(&format!("{head}schemes = TPM\nsweep = tau_b\nsweep_values = 2, 1\n"), "run");
    let (missing, _) = failure(&format!("{head}schemes = TPM\n"), "run");

    let codes = [unknown, count, io, config];
    for (i, a) in codes.iter().enumerate() {
        assert_ne!(*a, 0);
        for b in &codes[i + 1..] {
            assert_ne!(a, b);
        }
    }
    assert_eq!(missing, config);

    let o = otto(&["run", "/nonexistent-dir/none.conf"]);
    assert_eq!(o.status.code(), Some(io));
}

#[test]
fn distribution_errors() {
    let head = format!("{BASE}tau_b = 20\nstroke = parametric\nr = 0.2\n");
    let (code, msg) = failure(&format!("{head}schemes = UM\n"), "dist");
    assert_ne!(code, 0);
    assert!(msg.contains("UM"), "{msg}");
    let (code, msg) = failure(&format!("{head}schemes = S1\nsigmas = 1\n"), "dist");
    assert_ne!(code, 0);
    assert!(msg.contains("grid"), "{msg}");
    let (code, _) = failure(&format!("{head}schemes = S1\nsigmas = 1\ndist_w_min = 0\ndist_w_max = 1\ndist_points = 1\n"), "dist");
    assert_ne!(code, 0);
}

#[test]
fn tpm_distribution_sums_to_one() {
    let config = RunConfig::parse(&fs::read_to_string(configs_dir().join("tpm_dist.conf")).unwrap()).unwrap();
    let csv = distribution_csv(&config).unwrap();
    let (header, rows) = parse_csv(&csv);
    assert_eq!(header, ["w", "probability"]);
    let total: f64 = rows.iter().map(|r| r[1]).sum();
    assert!((total - 1.0).abs() < 1e-10);
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
    assert!(csv.lines().last().unwrap().starts_with("# total probability = "));
}

#[test]
fn projective_s3_differs_from_tpm() {
    let config = RunConfig::parse(&fs::read_to_string(configs_dir().join("s3_vs_tpm_dist.conf")).unwrap()).unwrap();
    let (header, rows) = parse_csv(&distribution_csv(&config).unwrap());
    assert_eq!(header, ["w", "probability", "reference", "difference"]);
    assert!(rows.iter().any(|r| r[3].abs() > 1e-6));
    for r in &rows {
        assert_eq!(r[3], r[1] - r[2]);
    }
}

#[test]
fn density_footer_reports_normalization() {
    for name in ["s1_dist_sigma0.1.conf", "s1_dist_sigma1.conf", "s1_dist_sigma10.conf"] {
        let config = RunConfig::parse(&fs::read_to_string(configs_dir().join(name)).unwrap()).unwrap();
        let csv = distribution_csv(&config).unwrap();
        let footer = csv.lines().last().unwrap();
        let value: f64 = footer.trim_start_matches("# normalization (trapezoid) = ").parse().unwrap();
        assert!((value - 1.0).abs() < 1e-5, "{name}: {value}");
        let (_, rows) = parse_csv(&csv);
        assert!(rows.iter().all(|r| r[1] >= -1e-12));
    }
}
