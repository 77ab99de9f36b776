//! Acceptance suite: one PASS/FAIL line per criterion, run with
//! `cargo test -p tridyson --test acceptance`. Every criterion uses the
//! master seed below, fixed before any run was looked at.
//!
//! The process exits 0 even when a criterion fails so that a
//! statistically marginal criterion does not mask the others; pass
//! `--strict` (after `--`) to turn any FAIL into a nonzero exit.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use tridyson::dyson::study::{convergence_pair, qv_sample, scan_path, PathScan, QvSummary};
use tridyson::dyson::{
    all_ranges, detect_collisions, eigen_paths, interlacing_summary, simulate_matrix_path,
};
use tridyson::eig::{eigenvalues, sturm_count};
use tridyson::gbe::{time_slice_check, trace_moment_check, GbeConfig};
use tridyson::identities::run_exact_suite;
use tridyson::sde::SdeConfig;
use tridyson::SymTridiag;

const MASTER_SEED: u64 = 0;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    summary: String,
}

fn outcome(passed: bool, summary: String) -> Outcome {
    Outcome { passed, summary }
}

fn scan_paths(cfg: &SdeConfig, paths: u64) -> PathScan {
    let scans: Vec<PathScan> = (0..paths)
        .into_par_iter()
        .map(|i| scan_path(&simulate_matrix_path(cfg, i).expect("path")).expect("scan"))
        .collect();
    let mut total = PathScan::default();
    for s in &scans {
        total.merge(s);
    }
    total
}

fn small_regime() -> SdeConfig {
    SdeConfig::new(vec![2.0; 4], vec![1.0; 4], 1e-3, 0.5, MASTER_SEED)
}

fn exact_identities() -> Outcome {
    let reports = run_exact_suite(MASTER_SEED, 100, 7);
    let mut bad = Vec::new();
    let mut literal = 0;
    for r in &reports {
        if r.failure_count > 0 || r.instances < 100 {
            bad.push(format!(
                "{} ({} of {} failed)",
                r.name, r.failure_count, r.instances
            ));
        }
        if r.name == "zero-pattern-scope" {
            literal = r.scope_counterexamples.len();
        }
    }
    let passed = bad.is_empty() && literal >= 1;
    let summary = if passed {
        format!(
            "{} identities x 100 instances, 0 failures; {literal} literal-hypothesis counterexample(s)",
            reports.len()
        )
    } else {
        format!("failing: {}; literal counterexamples {literal}", bad.join(", "))
    };
    outcome(passed, summary)
}

fn identity_residual() -> Outcome {
    let s = scan_paths(&small_regime(), 20);
    outcome(
        s.max_iden_residual <= 1e-8,
        format!(
            "max relative residual {:.3e} over {} grid times (<= 1e-8)",
            s.max_iden_residual, s.times
        ),
    )
}

fn pathwise_tracking() -> Outcome {
    let cfg = SdeConfig::new(vec![3.0, 3.0], vec![1.0, 1.0], 2e-4, 0.25, MASTER_SEED);
    let points: Vec<_> = (0..20u64)
        .into_par_iter()
        .map(|i| convergence_pair(&cfg, i).expect("convergence pair"))
        .collect();
    let worst = points.iter().map(|p| p.coarse_error).fold(0.0, f64::max);
    let reduced = points.iter().filter(|p| p.reduced()).count();
    let truncated = points
        .iter()
        .filter(|p| p.coarse_truncation.is_some() || p.fine_truncation.is_some())
        .count();
    outcome(
        worst <= 0.05 && reduced >= 18,
        format!(
            "max discrepancy at dt=2e-4 {worst:.4} (<= 0.05); reduced on halving in {reduced}/20 (>= 18); truncated {truncated}"
        ),
    )
}

fn qv_summary(cfg: &SdeConfig, paths: u64) -> QvSummary {
    let samples: Vec<_> = (0..paths)
        .into_par_iter()
        .map(|i| qv_sample(&simulate_matrix_path(cfg, i).expect("path")).expect("no collision"))
        .collect();
    QvSummary::from_samples(&samples)
}

fn quadratic_variation() -> Outcome {
    let q3 = qv_summary(
        &SdeConfig::new(vec![3.0, 3.0], vec![1.0, 1.0], 2e-4, 0.25, MASTER_SEED),
        50,
    );
    let diag = (0..3).map(|i| q3.diag_rel_error(i)).fold(0.0, f64::max);
    let cross = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .map(|&(i, j)| q3.z_score(i, j))
        .fold(0.0, f64::max);
    let q2 = qv_summary(&SdeConfig::new(vec![3.0], vec![1.0], 2e-4, 0.25, MASTER_SEED), 50);
    let t = q2.mean_horizon;
    let ratio = q2.mean_realized[0][0] / (2.0 * t);
    let cross2 = q2.mean_realized[0][1].abs();
    outcome(
        diag <= 0.1 && cross <= 3.0 && (0.9..=1.1).contains(&ratio) && cross2 <= 0.05 * t,
        format!(
            "n=3: max diag rel err {diag:.4} (<= 0.1), max cross z {cross:.2} (<= 3); n=2: <l1>/2T {ratio:.4} in [0.9,1.1], |<l1,l2>| {cross2:.2e} (<= {:.2e})",
            0.05 * t
        ),
    )
}

fn coefficient_bound() -> Outcome {
    let s = scan_paths(&small_regime(), 20);
    let coeff = s.max_normalized_diag.max(s.max_normalized_off);
    let slack = 1e-10;
    outcome(
        coeff < 1.0 + slack && s.min_f_fraction >= -slack && s.max_f_fraction <= 1.0 + slack,
        format!(
            "max normalized coefficient {coeff:.6} (< 1 + 1e-10); F fraction in [{:.3e}, {:.6}]",
            s.min_f_fraction, s.max_f_fraction
        ),
    )
}

fn non_collision() -> Outcome {
    let cfg = SdeConfig::new(vec![2.0; 3], vec![1.0; 3], 1e-3, 1.0, MASTER_SEED);
    let ranges = all_ranges(4);
    let stats: Vec<(bool, bool, bool, f64)> = (0..100u64)
        .into_par_iter()
        .map(|i| {
            let p = simulate_matrix_path(&cfg, i).expect("path");
            let e = eigen_paths(&p, &ranges).expect("eigen paths");
            let c = detect_collisions(&e, 1e-6).expect("collisions");
            (
                c.collided(),
                p.stopped_at.is_some(),
                interlacing_summary(&e, true).holds(),
                c.min_gap,
            )
        })
        .collect();
    let collided = stats.iter().filter(|s| s.0).count();
    let absorbed = stats.iter().filter(|s| s.1).count();
    let broken = stats.iter().filter(|s| !s.2).count();
    let min_gap = stats.iter().map(|s| s.3).fold(f64::INFINITY, f64::min);

    let contrast = SdeConfig::new(vec![0.5], vec![0.1], 1e-3, 1.0, MASTER_SEED);
    let hits = (0..1000u64)
        .into_par_iter()
        .filter(|&i| {
            simulate_matrix_path(&contrast, i)
                .expect("path")
                .stopped_at
                .is_some()
        })
        .count();
    let fraction = hits as f64 / 1000.0;
    outcome(
        collided == 0 && absorbed == 0 && broken == 0 && fraction > 0.05,
        format!(
            "alpha=2: collisions {collided}, absorptions {absorbed}, interlacing failures {broken}, min gap {min_gap:.3e}; alpha=0.5: absorbed fraction {fraction:.3} (> 0.05)"
        ),
    )
}

fn ensemble_moments() -> Outcome {
    let mut parts = Vec::new();
    let mut passed = true;
    for (n, beta) in [(3, 0.5), (4, 1.0), (4, 2.0)] {
        let r = trace_moment_check(&GbeConfig {
            n,
            beta,
            samples: 10_000,
            seed: MASTER_SEED,
        })
        .expect("trace moment");
        passed &= r.passed;
        parts.push(format!("N={n} beta={beta}: z {:.2}", r.z));
    }
    let slice = time_slice_check(3, 1.0, 10_000, MASTER_SEED).expect("time slice");
    let worst = slice.comparisons.iter().map(|c| c.z).fold(0.0, f64::max);
    passed &= slice.passed;
    parts.push(format!(
        "time slice: {} comparisons, max z {worst:.2}",
        slice.comparisons.len()
    ));
    outcome(passed, parts.join("; "))
}

fn eigensolver() -> Outcome {
    let tol = 1e-12;
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let mut misses = 0;
    let mut checked = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=12);
        let diag: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..=10.0)).collect();
        let off: Vec<f64> = (1..n).map(|_| rng.random_range(-10.0..=10.0)).collect();
        let h = SymTridiag::new(diag, off).expect("shape");
        let spec = eigenvalues(&h, tol).expect("eigenvalues");
        for (k, &l) in spec.values().iter().enumerate() {
            checked += 1;
            if sturm_count(&h, l - 2.0 * tol) > k || sturm_count(&h, l + 2.0 * tol) < k + 1 {
                misses += 1;
            }
        }
    }
    let mut closed_form = 0.0_f64;
    for n in 1..=12 {
        let h = SymTridiag::new(vec![0.0; n], vec![1.0; n - 1]).expect("shape");
        let spec = eigenvalues(&h, tol).expect("eigenvalues");
        let mut want: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (k as f64 * PI / (n + 1) as f64).cos())
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in spec.values().iter().zip(&want) {
            closed_form = closed_form.max((a - b).abs());
        }
    }
    outcome(
        misses == 0 && closed_form <= 1e-10,
        format!("{checked} eigenvalues bracketed, {misses} misses; closed-form max error {closed_form:.2e} (<= 1e-10)"),
    )
}

fn main() {
    let strict = std::env::args().any(|a| a == "--strict");
    let criteria: [Criterion; 8] = [
        ("exact identity suite", exact_identities),
        ("identity residual along paths", identity_residual),
        ("pathwise SDE tracking", pathwise_tracking),
        ("quadratic variations", quadratic_variation),
        ("diffusion coefficient bound", coefficient_bound),
        ("non-collision and absorption contrast", non_collision),
        ("beta ensemble moments", ensemble_moments),
        ("eigensolver", eigensolver),
    ];
    let mut failed = BTreeSet::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        if !o.passed {
            failed.insert(k + 1);
        }
        println!(
            "{} {}. {name}: {} [{:.1}s]",
            if o.passed { "PASS" } else { "FAIL" },
            k + 1,
            o.summary,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed.len(),
        criteria.len()
    );
    if strict && !failed.is_empty() {
        std::process::exit(1);
    }
}
