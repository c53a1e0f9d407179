//! Acceptance suite: one PASS/FAIL line per criterion, each under its time limit.
//!
//! Run with `cargo test -p pathgauge-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use pathgauge_core::bounds::{bernoulli_entropy, corollary_bound, risk_bound, ClassBounds, ConcentrationVariant, MixingProfile};
use pathgauge_core::estimators::{missing_mass_g, missing_mass_gt, prefix_min_profile, ExceptionSet, FiniteDistribution};
use pathgauge_core::geometry::{BaseMetric, GaugeSpec, Point, SamplePath};
use pathgauge_core::nnindex::{leave_one_out_min, prefix_min_indexed, Backend};
use pathgauge_core::processes::{simulate, EmbeddingSpec, ProcessKind, ProcessSpec, Space, DEFAULT_ZETA, DEFAULT_ZETA2};
use pathgauge_core::verify::{
    decay_study, validate_good_turing, validate_lemma1, validate_theorem1_lipschitz, BernoulliChain, DecayConfig, Lemma1Config,
    TauRule, Theorem1Config,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Check = fn() -> Outcome;

fn n_cycle_zero_g() -> Outcome {
    let spec = ProcessSpec::new(ProcessKind::CycleChain { states: 100, reset: 0.0 }, 17);
    let mut values = Vec::new();
    for n in [128usize, 512, 1024] {
        let path = simulate(&spec, n).expect("simulate");
        let g = prefix_min_indexed(&path, &GaugeSpec::Discrete, 100, &ExceptionSet::empty(n - 100), Backend::MetricIndexed)
            .and_then(|ip| missing_mass_g(&ip.profile))
            .expect("profile");
        values.push(g);
    }
    outcome(values.iter().all(|&g| g == 0.0), format!("G at n=128/512/1024 = {values:?}"))
}

fn lemma1_coverage() -> Outcome {
    let chains = [
        ("iid q=0.3", BernoulliChain::Iid { q: 0.3 }),
        (
            "markov-modulated",
            BernoulliChain::MarkovModulated { transition: [[0.95, 0.05], [0.1, 0.9]], q: [0.1, 0.8] },
        ),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, chain) in chains {
        let r = validate_lemma1(&Lemma1Config { chain, n: 200, delta: 0.05, trials: 10_000, seed: 2024 }).expect("lemma1");
        pass &= r.pass;
        detail.push(format!("{name}: {}/{} (rate {:.4}, p={:.3})", r.violations, r.trials, r.violation_rate, r.p_value));
    }
    outcome(pass, detail.join("; "))
}

fn theorem1_coverage() -> Outcome {
    let cycle = Theorem1Config {
        process: ProcessSpec::new(ProcessKind::CycleChain { states: 16, reset: 0.5 }, 31),
        embedding: EmbeddingSpec::Identity,
        l: 1.0,
        metric: BaseMetric::Discrete,
        t: 0.5,
        tau: 4,
        n: 64,
        delta: 0.1,
        trials: 500,
        mc_fresh: 0,
    };
    let circle = Theorem1Config {
        process: ProcessSpec::new(ProcessKind::IidUniform { space: Space::Circle }, 32),
        embedding: EmbeddingSpec::Identity,
        l: 1.0,
        metric: BaseMetric::Euclidean,
        t: 0.1,
        tau: 1,
        n: 256,
        delta: 0.1,
        trials: 500,
        mc_fresh: 2000,
    };
    let mut pass = true;
    let mut detail = Vec::new();
    for (name, cfg) in [("cycle N=16 p=0.5 (exact)", cycle), ("iid circle (monte carlo)", circle)] {
        let r = validate_theorem1_lipschitz(&cfg).expect("theorem1");
        pass &= r.pass;
        detail.push(format!("{name}: {}/{} (rate {:.4})", r.violations, r.trials, r.violation_rate));
    }
    outcome(pass, detail.join("; "))
}

fn good_turing_concentration() -> Outcome {
    let pi = FiniteDistribution::uniform_symbols(20).expect("pi");
    let r = validate_good_turing(&pi, 100, 0.5, 2000, 77).expect("good-turing");
    outcome(
        r.pass,
        format!(
            "rms={:.4} <= sqrt(7/100)={:.4}; observed rms <= 0.1: {}",
            r.rms,
            r.bound,
            if r.rms <= 0.1 { "yes" } else { "no" }
        ),
    )
}

fn random_path(rng: &mut ChaCha8Rng, n: usize, d: usize, lattice: bool) -> SamplePath {
    let mut x = vec![0.0; d];
    let points = (0..n)
        .map(|_| {
            for c in x.iter_mut() {
                *c += rng.random::<f64>() - 0.5;
            }
            if lattice {
                Point::Coords(x.iter().map(|c| c.round()).collect())
            } else {
                Point::Coords(x.clone())
            }
        })
        .collect();
    SamplePath::new(points).expect("path")
}

fn backend_equivalence() -> Outcome {
    let gauges = [
        GaugeSpec::lipschitz(1.0),
        GaugeSpec::Smooth { gamma: 2.0, lambda: 0.5 },
        GaugeSpec::Discrete,
    ];
    let (n, d) = (512usize, 8usize);
    let mut mismatches = 0;
    let (mut naive_evals, mut indexed_evals) = (0u64, 0u64);
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tau = [1usize, 4, 16][seed as usize % 3];
        for gauge in gauges {
            let path = random_path(&mut rng, n, d, gauge == GaugeSpec::Discrete);
            let b = ExceptionSet::empty(n - tau);
            let naive = prefix_min_indexed(&path, &gauge, tau, &b, Backend::Naive).expect("naive");
            let fast = prefix_min_indexed(&path, &gauge, tau, &b, Backend::MetricIndexed).expect("indexed");
            let same = |a: &[f64], b: &[f64]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits());
            if !same(&naive.profile.mins, &fast.profile.mins) {
                mismatches += 1;
            }
            let (loo_n, _) = leave_one_out_min(&path, &gauge, Backend::Naive).expect("loo naive");
            let (loo_i, _) = leave_one_out_min(&path, &gauge, Backend::MetricIndexed).expect("loo indexed");
            if !same(&loo_n, &loo_i) {
                mismatches += 1;
            }
            if gauge == GaugeSpec::lipschitz(1.0) {
                naive_evals += naive.stats.total();
                indexed_evals += fast.stats.total();
            }
        }
    }
    let ratio = indexed_evals as f64 / naive_evals as f64;
    outcome(
        mismatches == 0 && ratio < 0.5,
        format!("{mismatches} mismatching profiles; indexed/naive evaluations = {ratio:.3}"),
    )
}

fn decay_shape() -> Outcome {
    let cfg = DecayConfig {
        process: ProcessKind::TorusRotation { zeta1: DEFAULT_ZETA, zeta2: DEFAULT_ZETA2, reset: 1.0 },
        embedding: EmbeddingSpec::RasterRotation { with_scaling: true },
        gauge: GaugeSpec::lipschitz(1.0),
        tau: TauRule::ResetTv { eps: 0.1 },
        sizes: (1..=12).map(|k| 1usize << k).collect(),
        p_list: vec![1.0, 0.1, 0.001],
        seeds: (1..=10).collect(),
        backend: Backend::MetricIndexed,
    };
    let study = decay_study(&cfg).expect("study");
    let mut pass = true;
    let mut detail = Vec::new();
    for p in [1.0, 0.1] {
        let rows: Vec<_> = study.rows.iter().filter(|r| r.p == p && r.n >= 16).collect();
        let decreasing = rows.len() >= 2 && rows.windows(2).all(|w| w[1].mean_g < w[0].mean_g);
        pass &= decreasing;
        detail.push(format!(
            "p={p}: tau={} G(n={})={:.4} .. G(4096)={:.4} strictly decreasing={decreasing}",
            rows[0].tau,
            rows[0].n,
            rows[0].mean_g,
            rows.last().map_or(f64::NAN, |r| r.mean_g)
        ));
    }
    let last = study.rows.iter().find(|r| r.p == 0.001 && r.n == 4096).copied();
    match last {
        Some(r) => {
            let ok = r.mean_g < r.tau_over_n;
            pass &= ok;
            detail.push(format!("p=0.001: tau={} G(4096)={:.4} < tau/n={:.4}: {ok}", r.tau, r.mean_g, r.tau_over_n));
        }
        None => {
            pass = false;
            detail.push("p=0.001: no row at n=4096".into());
        }
    }
    outcome(pass, detail.join("; "))
}

/// Direct-definition `G` for `τ = 1` on scalar points.
fn brute_force_g(x: &[f64]) -> f64 {
    let n = x.len();
    let mut total = 0.0;
    for k in 1..n {
        let mut best = f64::INFINITY;
        for &xi in &x[..k] {
            best = best.min((x[k] - xi).abs());
        }
        total += best;
    }
    total / (n - 1) as f64
}

fn iid_g_magnitude() -> Outcome {
    let n = 4096;
    let kind = ProcessKind::IidUniform { space: Space::Circle };
    let mut sum = 0.0;
    let mut worst_gap: f64 = 0.0;
    for seed in 0..20u64 {
        let path = simulate(&ProcessSpec::new(kind, 1000 + seed), n).expect("simulate");
        let g = prefix_min_indexed(&path, &GaugeSpec::lipschitz(1.0), 1, &ExceptionSet::empty(n - 1), Backend::MetricIndexed)
            .and_then(|ip| missing_mass_g(&ip.profile))
            .expect("G");
        let xs: Vec<f64> = path.points().iter().map(|p| p.coord_slice().expect("coords")[0]).collect();
        worst_gap = worst_gap.max((g - brute_force_g(&xs)).abs());
        sum += g;
    }
    let mean = sum / 20.0;
    let reference = (n as f64).ln() / (2.0 * n as f64);
    outcome(
        mean <= 0.01 && worst_gap <= 1e-12,
        format!("mean G={mean:.5} (ln n/2n={reference:.5}); max |library - direct| = {worst_gap:e}"),
    )
}

/// `∫_0^∞ G_t dt` for a step function: sum of (gap between sorted values) × `G_t` at its left end.
fn integral_of_gt(profile: &pathgauge_core::PrefixGaugeProfile) -> f64 {
    let mut knots: Vec<f64> = profile.mins.clone();
    knots.push(0.0);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    knots
        .windows(2)
        .map(|w| {
            let gt = if w[0] == 0.0 {
                profile.mins.iter().filter(|&&m| m > 0.0).count() as f64 / profile.len() as f64
            } else {
                missing_mass_gt(profile, w[0]).expect("G_t")
            };
            (w[1] - w[0]) * gt
        })
        .sum()
}

fn formula_identities() -> Outcome {
    let class = ClassBounds { sup_f: 1.5, sup_g: 2.0 };
    let mix = MixingProfile::declared(5, 0.02, 0.01).expect("mixing");
    let mut worst_rel: f64 = 0.0;
    for (g, n) in [(0.0, 105usize), (0.3, 505), (0.01, 10_005)] {
        let a = corollary_bound(g, &class, &mix, n, 0.05, 0.0).expect("corollary").total;
        let b = risk_bound(g, &class, &mix, n, 0.05, ConcentrationVariant::Martingale).expect("risk").total;
        worst_rel = worst_rel.max((a - b).abs() / b);
    }
    let h_gap = (bernoulli_entropy(0.5) - std::f64::consts::LN_2).abs();

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_int: f64 = 0.0;
    for i in 0..100 {
        let n = rng.random_range(5..200);
        let tau = 1 + i % 3;
        let xs: Vec<f64> = (0..n).map(|_| (rng.random::<f64>() * 10.0).floor() / 10.0).collect();
        let path = SamplePath::from_scalars(&xs).expect("path");
        let profile = prefix_min_profile(&path, &GaugeSpec::lipschitz(1.0), tau, &ExceptionSet::empty(n - tau)).expect("profile");
        let g = missing_mass_g(&profile).expect("G");
        worst_int = worst_int.max((g - integral_of_gt(&profile)).abs());
    }
    outcome(
        worst_rel <= 1e-12 && h_gap <= 1e-12 && worst_int <= 1e-12,
        format!("corollary/risk rel gap {worst_rel:e}; |H(1/2) - ln 2| = {h_gap:e}; max |G - int G_t| = {worst_int:e}"),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, Check, Duration); 8] = [
        ("n-cycle zero G", n_cycle_zero_g, Duration::from_secs(1)),
        ("martingale lemma coverage", lemma1_coverage, Duration::from_secs(30)),
        ("excess-loss bound coverage", theorem1_coverage, Duration::from_secs(120)),
        ("Good-Turing concentration", good_turing_concentration, Duration::from_secs(30)),
        ("backend equivalence", backend_equivalence, Duration::from_secs(60)),
        ("decay study shape", decay_shape, Duration::from_secs(300)),
        ("iid G magnitude", iid_g_magnitude, Duration::from_secs(30)),
        ("formula identities", formula_identities, Duration::from_secs(5)),
    ];
    let mut failures = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let pass = out.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "{} [{}] {name} ({:.2}s / limit {}s): {}{}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            out.detail,
            if in_time { "" } else { " [time limit exceeded]" }
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
