use iesc::cli_io::{bench, load_config, run_experiment, ExperimentConfig, RunOptions};
use iesc::Error;
use std::fs;
use std::path::Path;

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).unwrap()
}

fn rows(path: &Path) -> Vec<csv::StringRecord> {
    let mut r = csv::Reader::from_path(path).unwrap();
    r.records().map(|x| x.unwrap()).collect()
}

#[test]
fn loads_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("exp.toml");
    fs::write(
        &path,
        "[surface]\nradius = 0.5\n[media]\neps_rel_interior = [2.0, -0.1]\n[solver]\nmax_iters = 3\n",
    )
    .unwrap();
    let cfg = load_config(&path).unwrap();
    assert_eq!(cfg.radii, vec![0.5]);
    assert_eq!(cfg.solver.max_iters, 3);
    assert_eq!(cfg.eps_rel_interior.im, -0.1);
    assert!(cfg.defaulted.iter().any(|d| d.starts_with("source.kind")));
    assert!(load_config(&dir.path().join("missing.toml")).is_err());
}

#[test]
fn maps_have_one_row_per_node() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "surface.radius = 0.5\nmedia.eps_rel_interior = 2.0\nsolver.max_iters = 2\n\
         solver.record_maps = true\nsource.kind = \"planewave\"\noutputs.farfield = false\n",
    );
    let out = run_experiment(
        &cfg,
        &RunOptions {
            out: Some(dir.path().into()),
            deterministic: true,
        },
    )
    .unwrap();
    let n = out[0].nodes;
    for it in 1..=out[0].history.len() {
        for comp in iesc::cli_io::run::MAP_COMPONENTS {
            let p = dir.path().join(format!("dev_iter{it}_{comp}.csv"));
            assert_eq!(rows(&p).len(), n, "{}", p.display());
        }
    }
    assert!(dir.path().join("run.log").exists());
    assert!(!dir.path().join("farfield.csv").exists());
}

/// Convergence tables of two deterministic runs agree byte for byte apart
/// from the timing column.
#[test]
fn deterministic_reruns_match_except_timing() {
    let cfg = config("surface.radius = 0.6\nmedia.eps_rel_interior = 2.0\nsolver.max_iters = 3\n");
    let table = || {
        let dir = tempfile::tempdir().unwrap();
        run_experiment(
            &cfg,
            &RunOptions {
                out: Some(dir.path().into()),
                deterministic: true,
            },
        )
        .unwrap();
        rows(&dir.path().join("convergence.csv"))
            .iter()
            .map(|r| r.iter().take(9).collect::<Vec<_>>().join(","))
            .collect::<Vec<_>>()
    };
    let a = table();
    assert_eq!(a.len(), 3);
    assert_eq!(a, table());
}

#[test]
fn divergence_keeps_partial_history() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "surface.radius = 0.75\nmedia.eps_rel_interior = 2.0\nsolver.max_iters = 8\n\
         solver.update_sign = -1.0\nsource.kind = \"planewave\"\n",
    );
    match run_experiment(
        &cfg,
        &RunOptions {
            out: Some(dir.path().into()),
            deterministic: true,
        },
    ) {
        Err(Error::Divergence { history }) => {
            assert_eq!(
                rows(&dir.path().join("convergence.csv")).len(),
                history.len()
            );
            let log = fs::read_to_string(dir.path().join("run.log")).unwrap();
            assert!(log.contains("diverged"));
        }
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn plane_wave_writes_far_field_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        "surface.radius = 0.75\nmedia.eps_rel_interior = 2.0\nsolver.max_iters = 3\n\
         source.kind = \"planewave\"\noutputs.angles = 37\n",
    );
    let out = run_experiment(
        &cfg,
        &RunOptions {
            out: Some(dir.path().into()),
            deterministic: false,
        },
    )
    .unwrap();
    assert!(out[0].forward_lobe_db.unwrap().is_finite());
    let ff = rows(&dir.path().join("farfield.csv"));
    assert_eq!(ff.len(), 2 * 37);
    for r in &ff {
        for v in [&r[2], &r[3]] {
            let x: f64 = v.parse().unwrap();
            assert!(x.is_finite() && x >= 0.0);
        }
    }
    let cmp = rows(&dir.path().join("mie_compare.csv"));
    assert!(cmp.iter().any(|r| &r[3] == "1"));
    assert!(cmp.iter().all(|r| r[2].parse::<f64>().unwrap().is_finite()));
}

#[test]
fn sweep_runs_land_in_radius_directories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg =
        config("media.eps_rel_interior = 2.0\nsolver.max_iters = 1\nsweep.radii = [0.4, 0.5]\n");
    let out = run_experiment(
        &cfg,
        &RunOptions {
            out: Some(dir.path().into()),
            deterministic: true,
        },
    )
    .unwrap();
    assert_eq!(out.len(), 2);
    for s in &out {
        assert!(s.directory.starts_with(dir.path()));
        assert!(s.directory.join("convergence.csv").exists());
    }
    assert_ne!(out[0].directory, out[1].directory);
}

#[test]
fn single_radius_bench_has_one_row() {
    let cfg = config("surface.radius = 0.5\nmedia.eps_rel_interior = 2.0\n");
    let report = bench(&cfg).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert!(report.scaling.is_empty());
    let r = &report.rows[0];
    assert!(r.radiate_ordered > 0.0 && r.iteration > 0.0);
    assert!(r.order_difference < 1e-10);
    assert!(report.table().lines().count() >= 2);
}
