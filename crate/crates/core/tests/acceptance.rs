//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero when any criterion fails. Runs without the libtest harness so the
//! lines always reach the output.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rop_core::certification::check_exact_condition;
use rop_core::harness::*;
use rop_core::matrix_core::{frobenius_inner, schatten_pow};
use rop_core::measurement::*;
use rop_core::solvers::{schatten_p_minimize, ConstraintSpec, SolverConfig};

use common::{gaussian, lemmas, oracle2x2, transcription};

const SEED: u64 = 2024;

type Lemma = fn(u64) -> Result<(), String>;
type Criterion = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn run(text: &str) -> ExperimentOutput {
    let cfg = ExperimentConfig::parse(text).expect("acceptance config parses");
    run_experiment::<f64>(&cfg).expect("sweep completes")
}

fn lemma_suite() -> Verdict {
    let start = Instant::now();
    let cases: [(&str, Lemma); 4] = [
        ("additivity", lemmas::schatten_additivity),
        ("stechkin", lemmas::stechkin),
        ("perturbation", lemmas::perturbation),
        ("f_max", lemmas::f_max),
    ];
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, check) in cases {
        let failed: Vec<String> = (0..500u64).filter_map(|i| check(SEED + i).err()).collect();
        pass &= failed.is_empty();
        parts.push(format!("{name} {}/500", 500 - failed.len()));
        if let Some(first) = failed.first() {
            parts.push(format!("first failure: {first}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 30.0;
    verdict(
        pass,
        format!("{}; {secs:.3}s (limit 30s)", parts.join(", ")),
    )
}

fn adjoint_and_debias() -> Verdict {
    let mut g = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for t in 0..200u64 {
        let sym = g.random_bool(0.5);
        let m = g.random_range(1..12);
        let n = if sym { m } else { g.random_range(1..12) };
        let l = g.random_range(1..60);
        let ens = RopEnsemble::<f64>::sample_gaussian(m, n, l, sym, SEED + t).unwrap();
        let x = gaussian(m, n, 3 * t);
        let z = gaussian(l, 1, 3 * t + 1).into_vec();
        let lhs: f64 = ens
            .apply(&x)
            .unwrap()
            .iter()
            .zip(&z)
            .map(|(a, b)| a * b)
            .sum();
        let rhs = frobenius_inner(&x, &ens.adjoint(&z).unwrap()).unwrap();
        worst = worst.max((lhs - rhs).abs() / (1.0 + lhs.abs()));
    }
    let mut consistency = 0.0f64;
    let mut contraction_ok = 0;
    for t in 0..100u64 {
        let m = g.random_range(1..10);
        let l = g.random_range(2..60);
        let ens = RopEnsemble::<f64>::sample_gaussian(m, m, l, true, SEED + 1000 + t).unwrap();
        let h = gaussian(m, m, 5 * t);
        let x = h.try_add(&h.transpose()).unwrap();
        let b = ens.measure(&x).unwrap();
        let (map, bt) = ens.debias(&b).unwrap();
        let ax = map.apply(&x).unwrap();
        for (u, v) in ax.iter().zip(&bt.values) {
            consistency = consistency.max((u - v).abs() / (1.0 + v.abs()));
        }
        let z = generate_noise(&NoiseSpec::LqBounded { q: 1.0, eta1: 0.3 }, &ens, t).unwrap();
        let (_, noisy) = ens.debias(&b.try_add(&z).unwrap()).unwrap();
        let lhs: f64 = noisy
            .values
            .iter()
            .zip(&ax)
            .map(|(u, v)| (u - v).abs())
            .sum();
        let rhs: f64 = z.values.iter().map(|v| v.abs()).sum();
        if lhs <= rhs + 1e-12 {
            contraction_ok += 1;
        }
    }
    verdict(
        worst <= 1e-9 && consistency <= 1e-10 && contraction_ok == 100,
        format!(
            "pairing worst {worst:.2e} (tol 1e-9, 200 triples); debias worst {consistency:.2e} (tol 1e-10); \
             l1 contraction {contraction_ok}/100"
        ),
    )
}

fn convex_recovery() -> Verdict {
    let start = Instant::now();
    let out = run("experiment = phase_transition\ndims = 20x20\nranks = 2\nL = 480\nmethod = nuclear\ntrials = 25\nseed = 2024\n");
    let secs = start.elapsed().as_secs_f64();
    let cell = &out.cells[0];
    verdict(
        cell.success_rate() >= 0.9 && secs < 300.0,
        format!(
            "nuclear 20x20 r=2 L=480: {}/{} (need >= 0.9), median error {:.2e}; {secs:.1}s (limit 300s)",
            cell.successes, cell.trials, cell.median_error
        ),
    )
}

fn nonconvex_advantage() -> Verdict {
    let rate = |method: &str, l: usize| {
        let extra = if method == "schatten-p" {
            "p = 0.5\n"
        } else {
            ""
        };
        let text = format!(
            "experiment = phase_transition\ndims = 20x20\nranks = 2\nL = {l}\nmethod = {method}\n{extra}trials = 25\nseed = 2024\n"
        );
        run(&text).cells[0].success_rate()
    };
    // The stated cell is L = 3 r (m + n); it is checked as stated whatever
    // the nuclear rate turns out to be. A second cell at L = 2 r (m + n) is
    // where the nuclear rate actually drops below one half.
    let (nuc3, sp3) = (rate("nuclear", 240), rate("schatten-p", 240));
    let (nuc2, sp2) = (rate("nuclear", 160), rate("schatten-p", 160));
    let premise = if nuc3 < 0.5 { "holds" } else { "does not hold" };
    verdict(
        sp3 >= nuc3 && sp2 >= nuc2,
        format!(
            "L=240: S_0.5 {sp3:.2} vs nuclear {nuc3:.2} (premise nuclear < 0.5 {premise}); \
             L=160: S_0.5 {sp2:.2} vs nuclear {nuc2:.2}"
        ),
    )
}

fn phase_transition_monotone() -> Verdict {
    let out = run("experiment = phase_transition\ndims = 16x16\nranks = 1\nratios = 1,2,3,4,5,6\nmethod = nuclear\ntrials = 25\nseed = 2024\n");
    let rates: Vec<f64> = out.cells.iter().map(|c| c.success_rate()).collect();
    let drops: Vec<f64> = rates
        .windows(2)
        .map(|w| w[0] - w[1])
        .filter(|&d| d > 0.0)
        .collect();
    let worst = drops.iter().copied().fold(0.0, f64::max);
    verdict(
        drops.len() <= 1 && worst <= 0.1 + 1e-12,
        format!(
            "rates {rates:?}; {} inversion(s), largest {worst:.2}",
            drops.len()
        ),
    )
}

fn bound_verification() -> Verdict {
    let out = run(
        "experiment = bound_check\ndims = 12x12\nranks = 1\nL = 160\nmethod = nuclear\nnoise = lq\nq = 1\np = 1\n\
         eta1 = 0.001,0.01,0.05,0.1\nk = 9\ntrials = 25\nseed = 2024\n",
    );
    let certified: usize = out.cells.iter().filter_map(|c| c.certified).sum();
    let violations: usize = out.cells.iter().filter_map(|c| c.violations).sum();
    let held = certified - violations;
    let frac = held as f64 / certified.max(1) as f64;
    let dual = transcription::compare_all(SEED);
    let dual_ok = dual == Ok(transcription::POINTS);
    verdict(
        certified >= 100 && frac >= 0.95 && dual_ok,
        format!(
            "{held}/{certified} certified trials under the bound (need >= 95% of >= 100); \
             caveat: RUB constants are inner Monte Carlo estimates, so certificates are optimistic; \
             transcriptions agree on {} of {} points at 1e-12",
            match &dual {
                Ok(n) => n.to_string(),
                Err(e) => format!("none ({e})"),
            },
            transcription::POINTS
        ),
    )
}

fn exact_condition() -> Verdict {
    let base = check_exact_condition(0.32, 1.01, 10.0, 1.0, 1.0).unwrap();
    let raised = check_exact_condition(0.32, 1.02, 10.0, 1.0, 1.0).unwrap();
    verdict(
        base && !raised,
        format!("C2=1.01 -> {base}, C2=1.02 -> {raised}"),
    )
}

fn phaselift() -> Verdict {
    let out = run("experiment = phaselift_demo\ndims = 16x16\nL = 160\ncorruption = 0,0.05\ntrials = 10\nseed = 2024\n");
    let clean = &out.cells[0];
    let dirty = &out.cells[1];
    verdict(
        clean.successes >= 8 && dirty.successes >= 6,
        format!(
            "cosine >= 0.999: noiseless {}/10 (need 8), 5% corruption {}/10 (need 6)",
            clean.successes, dirty.successes
        ),
    )
}

fn lad_robustness() -> Verdict {
    let out = run(
        "experiment = lad_robustness\ndims = 8x8\nranks = 1\nL = 120\ncorruption = 0.05\ncorruption_scale = 10\n\
         trials = 25\nseed = 2024\n",
    );
    let median = |name: &str| {
        out.cells
            .iter()
            .find(|c| c.method == name)
            .expect("method cell")
            .median_error
    };
    let (lad, ls) = (median("least-q"), median("least-squares"));
    verdict(
        lad <= 0.5 * ls,
        format!("median error LAD {lad:.2e} vs least squares {ls:.2e} (need ratio <= 0.5)"),
    )
}

fn two_by_two_oracle() -> Verdict {
    let cfg = SolverConfig::default().with_p(0.5);
    let mut worst = 0.0f64;
    for seed in 0..20 {
        let inst = oracle2x2::instance(seed);
        let (best, _) = oracle2x2::brute_force(&inst, 0.5);
        let report =
            schatten_p_minimize(&inst.ens, &inst.b, &ConstraintSpec::Equality, &cfg).unwrap();
        let got = schatten_pow(&report.estimate, 0.5).unwrap();
        let gap = if report.feasible {
            (got - best).abs()
        } else {
            f64::INFINITY
        };
        worst = worst.max(gap);
    }
    verdict(
        worst <= 1e-4,
        format!("largest objective gap {worst:.2e} over 20 instances (tol 1e-4)"),
    )
}

fn determinism() -> Verdict {
    let configs = [
        "experiment = phase_transition\ndims = 8x8\nranks = 1\nratios = 2,4\nmethod = schatten-p\np = 0.5\ntrials = 4\nseed = 7\n",
        "experiment = bound_check\ndims = 8x8\nranks = 1\nL = 100\nnoise = lq\neta1 = 0.01\ntrials = 3\nrub_trials = 50\nseed = 7\n",
        "experiment = lad_robustness\ndims = 5x5\nranks = 1\nL = 60\ncorruption = 0.05\ntrials = 3\nseed = 7\n",
        "experiment = phaselift_demo\ndims = 6x6\nL = 60\ncorruption = 0,0.05\ntrials = 3\nseed = 7\n",
    ];
    let mut same = 0;
    for text in configs {
        let a = run(text);
        let b = run(text);
        if a.trials_csv().unwrap() == b.trials_csv().unwrap()
            && a.cells_csv().unwrap() == b.cells_csv().unwrap()
        {
            same += 1;
        }
    }
    verdict(
        same == configs.len(),
        format!(
            "{same}/{} experiment kinds byte-identical on rerun",
            configs.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 11] = [
        ("lemma suite", lemma_suite),
        ("adjoint and debias identities", adjoint_and_debias),
        ("convex exact recovery", convex_recovery),
        ("nonconvex advantage", nonconvex_advantage),
        ("phase-transition monotonicity", phase_transition_monotone),
        ("bound verification", bound_verification),
        ("exact condition ground truth", exact_condition),
        ("PhaseLift demo", phaselift),
        ("LAD robustness", lad_robustness),
        ("2x2 global optimum", two_by_two_oracle),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let tag = if v.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!v.pass);
        println!(
            "{tag} [{:>2}] {name}: {} ({:.1}s)",
            i + 1,
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
