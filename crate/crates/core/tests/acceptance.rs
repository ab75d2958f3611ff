//! Acceptance gate. Each test prints one `criterion N: PASS|FAIL` line to
//! stderr (uncaptured) and then asserts.

use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;

use netconc::bounds::{bound_eval, BoundParams, BoundSpec, Theorem};
use netconc::ensembles::{Ensemble, EnsembleFamily};
use netconc::experiments::{
    gamma_sweep, run_concentration, switch_point, ExperimentConfig, Normalization, DEFAULT_TAIL_POINTS,
    DEFAULT_TAIL_SIGMAS,
};
use netconc::functionals::Functional;
use netconc::graph::{ConstraintSpec, Graph};
use netconc::optimizers::{optimize_exhaustive, optimize_sa, AnnealSchedule, OptimizerPolicy};
use netconc::seeding::stream_rng;

fn report(id: u32, pass: bool, detail: &str) {
    let line = format!("criterion {id}: {} | {detail}\n", if pass { "PASS" } else { "FAIL" });
    // bypasses libtest capture so the line shows for passing tests too
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

#[test]
fn criterion_1_annealing_matches_exhaustive() {
    let start = Instant::now();
    let ens = Ensemble::er_sparse(12, 3.0, 101).unwrap();
    let graphs: Vec<Graph> = (0..100).map(|i| ens.sample(i).unwrap()).collect();
    let mut details = Vec::new();
    let mut pass = true;
    for constraint in [ConstraintSpec::Unconstrained, ConstraintSpec::ZeroMagnetization] {
        let schedule = AnnealSchedule::for_constraint(&constraint);
        let outcomes: Vec<(bool, bool)> = graphs
            .par_iter()
            .enumerate()
            .map(|(i, g)| {
                let f = Functional::Bipartition;
                let exact = optimize_exhaustive(&f, g, &constraint).unwrap();
                let sa = optimize_sa(&f, g, &constraint, &schedule, 7_000 + i as u64).unwrap();
                assert!(constraint.is_satisfied(&sa.best_config));
                let matched = close(sa.best_value, exact.best_value);
                let below = sa.best_value < exact.best_value - 1e-9 * (1.0 + exact.best_value.abs());
                (matched, below)
            })
            .collect();
        let matched = outcomes.iter().filter(|o| o.0).count();
        let below = outcomes.iter().filter(|o| o.1).count();
        pass &= matched >= 95 && below == 0;
        details.push(format!("{constraint:?}: {matched}/100 matched, {below} below exact"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(60);
    report(
        1,
        pass,
        &format!("{}; {:.1}s", details.join("; "), elapsed.as_secs_f64()),
    );
    assert!(pass);
}

/// Largest allowed `|H - H'|` for one flipped edge, from the closed forms.
fn allowed_change(f: &Functional, n: usize, m: usize, m_flipped: usize) -> f64 {
    let n_f = n as f64;
    match f {
        Functional::Bipartition => 2.0 * 1.0 / n_f,
        Functional::CircuitPartition { .. } => 2.0 * 0.5 / n_f,
        Functional::Modularity => {
            let m_star = m.min(m_flipped) as f64;
            2.0 * (11.0 * n_f / (8.0 * m_star)) / n_f
        }
        Functional::QPotts { j, .. } => j / 2.0,
    }
}

#[test]
fn criterion_2_bounded_differences() {
    let n = 20;
    let ens = Ensemble::er_dense(n, 0.2, 202).unwrap();
    let cases = [
        (Functional::Bipartition, ConstraintSpec::ZeroMagnetization),
        (
            Functional::CircuitPartition { lambda_pen: 0.25 },
            ConstraintSpec::Unconstrained,
        ),
        (Functional::Modularity, ConstraintSpec::Unconstrained),
        (Functional::q_potts(2, 1.0, 0.5), ConstraintSpec::Unconstrained),
    ];
    let mut pass = true;
    let mut details = Vec::new();
    for (fi, (f, constraint)) in cases.iter().enumerate() {
        // 100 graphs x 10 flips
        let results: Vec<(usize, usize, f64)> = (0..100u64)
            .into_par_iter()
            .map(|gi| {
                let g = ens.sample(gi).unwrap();
                let h = optimize_exhaustive(f, &g, constraint).unwrap();
                assert!(h.exact);
                let mut rng = stream_rng(9_000 + 100 * fi as u64 + gi);
                let mut violations = 0;
                let mut worst: f64 = 0.0;
                let mut flips = 0;
                for _ in 0..10 {
                    let (a, b) = loop {
                        let a = rng.gen_range(0..n);
                        let b = rng.gen_range(0..n);
                        if a != b {
                            break (a, b);
                        }
                    };
                    let g2 = g.flip_edge(a, b).unwrap();
                    let h2 = optimize_exhaustive(f, &g2, constraint).unwrap();
                    let diff = (h.best_value - h2.best_value).abs();
                    let limit = allowed_change(f, n, g.edge_count(), g2.edge_count());
                    worst = worst.max(diff / limit);
                    if diff > limit + 1e-12 {
                        violations += 1;
                    }
                    flips += 1;
                }
                (flips, violations, worst)
            })
            .collect();
        let flips: usize = results.iter().map(|r| r.0).sum();
        let violations: usize = results.iter().map(|r| r.1).sum();
        let worst = results.iter().map(|r| r.2).fold(0.0, f64::max);
        pass &= violations == 0 && flips == 1000;
        details.push(format!(
            "{}: {flips} flips, {violations} violations, max ratio {worst:.3}",
            f.name()
        ));
    }
    report(2, pass, &details.join("; "));
    assert!(pass);
}

fn kbound_config(replicates: usize) -> ExperimentConfig {
    ExperimentConfig {
        ensemble: EnsembleFamily::KBound {
            inner: Box::new(EnsembleFamily::ErSparse { lambda: 4.0 }),
            k: 8,
        },
        ns: vec![50, 100, 200],
        seed: 303,
        functional: Functional::Bipartition,
        constraint: ConstraintSpec::ZeroMagnetization,
        optimizer: OptimizerPolicy::Anneal {
            schedule: AnnealSchedule::for_constraint(&ConstraintSpec::ZeroMagnetization),
        },
        replicates,
        bound: Some(BoundSpec::new(Theorem::T9, BoundParams::default())),
        normalization: Normalization::H,
        tail_points: DEFAULT_TAIL_POINTS,
        tail_sigmas: DEFAULT_TAIL_SIGMAS,
    }
}

#[test]
fn criterion_3_bound_dominates_tails() {
    let start = Instant::now();
    let cfg = kbound_config(500);
    let rep = run_concentration(&cfg).unwrap();
    let elapsed = start.elapsed();
    let mut violations = 0;
    let mut min_gap = f64::INFINITY;
    for row in &rep.tails {
        // oracle: 2 exp(-N t^2 / (8 K^2)), clamped
        let b = (2.0 * (-(row.n as f64) * row.t * row.t / (8.0 * 64.0)).exp()).min(1.0);
        assert!((row.bound_clamped.unwrap() - b).abs() < 1e-12);
        min_gap = min_gap.min(b - row.empirical);
        if row.empirical > b {
            violations += 1;
        }
    }
    let per_n_ok = cfg
        .ns
        .iter()
        .all(|&n| rep.tails.iter().filter(|r| r.n == n).count() == 20);
    let pass = violations == 0 && per_n_ok && rep.bound_dominates() && elapsed < Duration::from_secs(600);
    let stds: Vec<String> = rep
        .rows
        .iter()
        .map(|r| format!("N={} std={:.4}", r.n, r.std_h))
        .collect();
    report(
        3,
        pass,
        &format!(
            "{} tail points, {violations} violations, min(bound - empirical) = {min_gap:.4}; {}; {:.1}s",
            rep.tails.len(),
            stds.join(", "),
            elapsed.as_secs_f64()
        ),
    );
    assert!(pass);
}

fn scaling_config(
    family: EnsembleFamily,
    normalization: Normalization,
    constraint: ConstraintSpec,
    seed: u64,
) -> ExperimentConfig {
    ExperimentConfig {
        ensemble: family,
        ns: (2..=10).map(|k| 10 * k).collect(),
        seed,
        functional: Functional::Bipartition,
        optimizer: OptimizerPolicy::Anneal {
            schedule: AnnealSchedule::for_constraint(&constraint),
        },
        constraint,
        replicates: 100,
        bound: None,
        normalization,
        tail_points: DEFAULT_TAIL_POINTS,
        tail_sigmas: DEFAULT_TAIL_SIGMAS,
    }
}

fn scaling_slopes(constraint: ConstraintSpec) -> ((f64, f64), (f64, f64)) {
    let dense = run_concentration(&scaling_config(
        EnsembleFamily::ErDense { p: 0.05 },
        Normalization::HOverN,
        constraint.clone(),
        404,
    ))
    .unwrap();
    let sparse = run_concentration(&scaling_config(
        EnsembleFamily::ErSparse { lambda: 5.0 },
        Normalization::H,
        constraint,
        405,
    ))
    .unwrap();
    let fd = dense.fit.expect("dense fit");
    let fs = sparse.fit.expect("sparse fit");
    ((fd.slope, fd.stderr), (fs.slope, fs.stderr))
}

#[test]
fn criterion_4_scaling_exponents() {
    // gate: default (unconstrained) bipartition; the balanced-bisection
    // variant is measured and printed but not gated
    let start = Instant::now();
    let (d, s) = scaling_slopes(ConstraintSpec::Unconstrained);
    let elapsed = start.elapsed();
    let (dz, sz) = scaling_slopes(ConstraintSpec::ZeroMagnetization);
    let pass = (d.0 + 1.0).abs() <= 0.25 && (s.0 + 0.5).abs() <= 0.2 && elapsed < Duration::from_secs(1800);
    report(
        4,
        pass,
        &format!(
            "dense H/N slope {:.3} +- {:.3} (target -1.0 +- 0.25); sparse H slope {:.3} +- {:.3} (target -0.5 +- 0.2); \
             {:.1}s; info, zero magnetization: dense {:.3} +- {:.3}, sparse {:.3} +- {:.3}",
            d.0,
            d.1,
            s.0,
            s.1,
            elapsed.as_secs_f64(),
            dz.0,
            dz.1,
            sz.0,
            sz.1
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_5_edge_count_lower_tail() {
    let (n, p) = (60usize, 0.3);
    let ens = Ensemble::er_dense(n, p, 505).unwrap();
    let ms: Vec<f64> = (0..10_000u64)
        .into_par_iter()
        .map(|i| ens.sample(i).unwrap().edge_count() as f64)
        .collect();
    let exact_mean = p * (n * (n - 1) / 2) as f64;
    let sample_mean = ms.iter().sum::<f64>() / ms.len() as f64;
    let lemma = BoundSpec::new(Theorem::Lemma2, BoundParams::default());
    let mut pass = true;
    let mut details = Vec::new();
    for t in [0.1f64, 0.2, 0.3] {
        let bound = (-4.0 * t * t).exp();
        assert!((bound_eval(&lemma, t).unwrap().raw - bound).abs() < 1e-15);
        for (name, mean) in [("exact", exact_mean), ("sample", sample_mean)] {
            let frac = ms.iter().filter(|&&m| m - mean < -(n as f64) * t).count() as f64 / ms.len() as f64;
            pass &= frac <= bound;
            details.push(format!("t={t} {name} mean: {frac:.4} <= {bound:.4}"));
        }
    }
    report(5, pass, &details.join("; "));
    assert!(pass);
}

fn two_triangles() -> (Graph, Vec<usize>) {
    let g = Graph::from_edge_list(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)]).unwrap();
    (g, vec![0, 0, 0, 1, 1, 1])
}

#[test]
fn criterion_6_potts_threshold() {
    let (g, membership) = two_triangles();
    let gammas: Vec<f64> = (0..=50).map(|i| i as f64 * 0.01).collect();
    let pts = gamma_sweep(&g, &membership, 1.0, 2, &gammas).unwrap();
    let target = 1.0 / 18.0;
    let bracket = switch_point(&pts);
    let pass = match bracket {
        Some((lo, hi)) => lo <= target && target <= hi && hi - lo <= 0.01 + 1e-12,
        None => false,
    };
    let found = bracket.map_or("none".to_string(), |(lo, hi)| format!("[{lo:.2}, {hi:.2}]"));
    report(
        6,
        pass,
        &format!(
            "merged->split switch in {found}; expected to bracket J m12/(2 n1 n2) = {target:.4}; \
             exact enumeration switches at J m12/(n1 n2) = {:.4}",
            1.0 / 9.0
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_7_perturbation_conserves_edges() {
    let p4 = Graph::from_edge_list(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
    let ens = Ensemble::perturbed(p4, 0.2, 707).unwrap();
    let total: usize = (0..100_000u64)
        .into_par_iter()
        .map(|i| ens.sample(i).unwrap().edge_count())
        .sum();
    let mean = total as f64 / 1e5;
    let rel = (mean - 3.0).abs() / 3.0;
    let pass = rel <= 0.02;
    report(
        7,
        pass,
        &format!("mean m = {mean:.4} over 1e5 samples (relative error {:.4})", rel),
    );
    assert!(pass);
}

#[test]
fn criterion_8_chung_lu_pair_frequencies() {
    let samples = 100_000u64;
    let ens = Ensemble::chung_lu(vec![2.0; 4], 808).unwrap();
    let counts = (0..samples)
        .into_par_iter()
        .map(|i| {
            let g = ens.sample(i).unwrap();
            let mut c = [0u64; 6];
            for (k, (u, v)) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)].iter().enumerate() {
                c[k] += g.has_edge(*u, *v) as u64;
            }
            c
        })
        .reduce(|| [0u64; 6], |a, b| std::array::from_fn(|k| a[k] + b[k]));
    let se = (0.25 / samples as f64).sqrt();
    let z: Vec<f64> = counts.iter().map(|&c| (c as f64 / samples as f64 - 0.5) / se).collect();
    let pass = z.iter().all(|z| z.abs() <= 4.0);
    let zs: Vec<String> = z.iter().map(|z| format!("{z:+.2}")).collect();
    report(8, pass, &format!("pair z-scores [{}] (limit 4)", zs.join(", ")));
    assert!(pass);
}

fn netconc(args: &[&str], out: &Path, workers: usize) -> std::process::Output {
    let o = Command::new(env!("CARGO_BIN_EXE_netconc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--workers")
        .arg(workers.to_string())
        .output()
        .unwrap();
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn dir_files(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

#[test]
fn criterion_9_manifest_replay_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let root = tmp.path();
    let write = |name: &str, body: &str| -> PathBuf {
        let p = root.join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    std::fs::write(root.join("k3.edgelist"), Graph::complete(3).to_edge_list_string()).unwrap();
    let (tri, _) = two_triangles();
    tri.save_edge_list(root.join("triangles.edgelist")).unwrap();
    let sparse = Ensemble::er_sparse(16, 3.0, 9).unwrap().sample(0).unwrap();
    sparse.save_edge_list(root.join("sparse.edgelist")).unwrap();
    std::fs::write(root.join("k3.labels"), "0\n0\n0\n").unwrap();

    let configs = [
        (
            "gen",
            write(
                "gen.json",
                r#"{"ensemble":{"variant":"er_sparse","params":{"n":30,"lambda":3.0}},"seed":5,"count":3}"#,
            ),
        ),
        (
            "eval",
            write(
                "eval.json",
                r#"{"graph":"k3.edgelist","labels":"k3.labels","functional":{"kind":"bipartition"}}"#,
            ),
        ),
        (
            "opt",
            write(
                "opt.json",
                r#"{"graph":"sparse.edgelist","functional":{"kind":"modularity"},"optimizer":{"method":"anneal","steps":50,"restarts":4},"seed":11}"#,
            ),
        ),
        (
            "bounds",
            write(
                "bounds.json",
                r#"{"bound":{"theorem":"T7","params":{"n":100,"b":1.0,"beta":0.5}},"ts":[0.5,1,2,4],"optimize_mu":true}"#,
            ),
        ),
        (
            "concentrate",
            write(
                "concentrate.json",
                r#"{
            "ensemble":{"variant":"k_bound","params":{"inner":{"variant":"er_sparse","params":{"lambda":4.0}},"k":8}},
            "ns":[16,24,32],"seed":77,
            "functional":{"kind":"bipartition"},
            "constraint":{"kind":"zero_magnetization"},
            "optimizer":{"method":"anneal","steps":40,"restarts":3,"move_kind":"swap"},
            "replicates":12,
            "bound":{"theorem":"T9"}}"#,
            ),
        ),
        (
            "gamma-sweep",
            write(
                "gamma.json",
                r#"{"graph":"triangles.edgelist","membership":[0,0,0,1,1,1],"gammas":[0.0,0.05,0.1,0.15,0.2,0.5]}"#,
            ),
        ),
        (
            "fit",
            write("fit.json", r#"{"points":[[10,0.31],[20,0.22],[40,0.16],[80,0.11]]}"#),
        ),
    ];

    let mut mismatches = Vec::new();
    let mut files = 0;
    for (cmd, cfg) in &configs {
        let first = root.join(format!("{cmd}-w1"));
        let rerun = root.join(format!("{cmd}-w3"));
        let replay = root.join(format!("{cmd}-replay-w4"));
        netconc(&[cmd, "--config", cfg.to_str().unwrap()], &first, 1);
        netconc(&[cmd, "--config", cfg.to_str().unwrap()], &rerun, 3);
        let manifest = first.join("manifest.json");
        netconc(&["replay", "--manifest", manifest.to_str().unwrap()], &replay, 4);
        let a = dir_files(&first);
        files += a.len();
        for other in [&rerun, &replay] {
            if dir_files(other) != a {
                mismatches.push(format!("{cmd} vs {}", other.file_name().unwrap().to_string_lossy()));
            }
        }
        if *cmd == "concentrate" {
            for f in ["samples.csv", "report.csv", "tails.csv", "scaling.csv"] {
                assert!(a.contains_key(f), "missing {f}");
            }
        }
    }
    let pass = mismatches.is_empty();
    report(
        9,
        pass,
        &format!(
            "{} subcommands, {files} artifacts compared across workers 1/3/4 and replay; mismatches: {}",
            configs.len(),
            if pass {
                "none".to_string()
            } else {
                mismatches.join(", ")
            }
        ),
    );
    assert!(pass);
}
