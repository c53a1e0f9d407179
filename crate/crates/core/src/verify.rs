//! Monte Carlo validators and decay studies.
//!
//! Every validator is a pure function of its configuration: per-trial seeds
//! come from [`crate::seeds::derive`], trials run in parallel and their
//! results are reduced in trial order, so reports do not depend on the
//! thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

use crate::bounds::{excess_loss_probability_bound, lemma1_threshold};
use crate::error::{ensure_open_unit, ensure_positive, ensure_probability, Error, Result};
use crate::estimators::{
    isolated_fraction, missing_mass_g, missing_mass_gt, true_missing_mass, ExceptionSet, FiniteDistribution,
    InvariantDistribution,
};
use crate::geometry::{BaseMetric, GaugeSpec, SamplePath};
use crate::nnindex::{leave_one_out_min, prefix_min_indexed, Backend};
use crate::processes::{embed, mixing_bounds, reset_mixing_time, simulate, EmbeddingSpec, ProcessKind, ProcessSpec, StationaryLaw};
use crate::seeds::derive;

/// Level of the one-sided binomial test behind [`TrialReport::pass`].
pub const PASS_LEVEL: f64 = 0.001;

/// Smallest trial count accepted by the coverage validators.
pub const MIN_TRIALS: usize = 100;

/// Outcome of a coverage experiment claiming `violation rate ≤ target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trials: usize,
    pub violations: usize,
    pub violation_rate: f64,
    pub target: f64,
    /// `Pr{Bin(trials, target) ≥ violations}`.
    pub p_value: f64,
    pub pass: bool,
}

impl TrialReport {
    pub fn from_counts(trials: usize, violations: usize, target: f64) -> Result<Self> {
        if trials == 0 || violations > trials {
            return Err(Error::param("trials", format!("{violations} violations out of {trials} trials")));
        }
        ensure_probability("target", target)?;
        let p_value = if violations == 0 {
            1.0
        } else {
            let bin = Binomial::new(target, trials as u64).map_err(|e| Error::param("target", e.to_string()))?;
            bin.sf(violations as u64 - 1)
        };
        Ok(TrialReport {
            trials,
            violations,
            violation_rate: violations as f64 / trials as f64,
            target,
            p_value,
            pass: p_value >= PASS_LEVEL,
        })
    }
}

fn ensure_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::param("trials", format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    Ok(())
}

fn trial_rng(seed: u64, label: &str, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(seed, label, i as u64))
}

// ---------------------------------------------------------------------------
// Martingale lemma

/// `[0,1]`-valued sequences with known one-step conditional means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BernoulliChain {
    /// `R_j ~ Bernoulli(q)` independently.
    Iid { q: f64 },
    /// A hidden two-state Markov chain `S_j` (started stationary) with
    /// `transition[a][b] = Pr{S_{j+1} = b | S_j = a}`; `R_j ~ Bernoulli(q[S_j])`.
    /// The filtration is generated by `(S_i, R_i)_{i ≤ j}`.
    MarkovModulated { transition: [[f64; 2]; 2], q: [f64; 2] },
}

impl BernoulliChain {
    pub fn validate(&self) -> Result<()> {
        match self {
            BernoulliChain::Iid { q } => ensure_probability("q", *q),
            BernoulliChain::MarkovModulated { transition, q } => {
                for row in transition {
                    ensure_probability("transition", row[0])?;
                    ensure_probability("transition", row[1])?;
                    if (row[0] + row[1] - 1.0).abs() > 1e-12 {
                        return Err(Error::param("transition", "rows must sum to 1"));
                    }
                }
                if transition[0][1] + transition[1][0] == 0.0 {
                    return Err(Error::param("transition", "chain must leave at least one state"));
                }
                ensure_probability("q", q[0])?;
                ensure_probability("q", q[1])
            }
        }
    }

    /// Draws `(R_j, E[R_j | σ_{j−1}])` for `j = 1..n`.
    fn draw(&self, n: usize, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
        let mut r = Vec::with_capacity(n);
        let mut cond = Vec::with_capacity(n);
        match *self {
            BernoulliChain::Iid { q } => {
                for _ in 0..n {
                    r.push(if rng.random::<f64>() < q { 1.0 } else { 0.0 });
                    cond.push(q);
                }
            }
            BernoulliChain::MarkovModulated { transition, q } => {
                let pi1 = transition[0][1] / (transition[0][1] + transition[1][0]);
                // Law of S_j given σ_{j−1}, as Pr{S_j = 1}.
                let mut p1 = pi1;
                for _ in 0..n {
                    cond.push((1.0 - p1) * q[0] + p1 * q[1]);
                    let s = usize::from(rng.random::<f64>() < p1);
                    r.push(if rng.random::<f64>() < q[s] { 1.0 } else { 0.0 });
                    p1 = transition[s][1];
                }
            }
        }
        (r, cond)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Config {
    pub chain: BernoulliChain,
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    pub seed: u64,
}

/// Counts trials with `V > 2V̂ + e·ln(1/δ)/n`.
pub fn validate_lemma1(cfg: &Lemma1Config) -> Result<TrialReport> {
    cfg.chain.validate()?;
    ensure_trials(cfg.trials)?;
    ensure_open_unit("delta", cfg.delta)?;
    let threshold = lemma1_threshold(cfg.n, cfg.delta)?;
    let n = cfg.n as f64;
    let hits: Vec<bool> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(cfg.seed, "lemma1", i);
            let (r, cond) = cfg.chain.draw(cfg.n, &mut rng);
            let v_hat = r.iter().sum::<f64>() / n;
            let v = cond.iter().sum::<f64>() / n;
            v > 2.0 * v_hat + threshold
        })
        .collect();
    TrialReport::from_counts(cfg.trials, hits.iter().filter(|&&h| h).count(), cfg.delta)
}

// ---------------------------------------------------------------------------
// Excess-loss coverage for Lipschitz classes

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem1Config {
    pub process: ProcessSpec,
    pub embedding: EmbeddingSpec,
    pub l: f64,
    pub metric: BaseMetric,
    pub t: f64,
    pub tau: usize,
    pub n: usize,
    pub delta: f64,
    pub trials: usize,
    /// Fresh stationary draws per trial when `π` has no finite support.
    pub mc_fresh: usize,
}

/// Coverage of the thresholded bound for the class of all `L`-Lipschitz
/// functions.
///
/// For that class the supremum on the left is attained by
/// `f(x) = L·min_{j ≤ n−τ} d(x, X_j)` and equals the missing mass at `t` of the
/// first `n − τ` sample points under the gauge `L·d`. A trial violates when this
/// value exceeds the right-hand side, by more than three standard errors in
/// the Monte Carlo branch.
pub fn validate_theorem1_lipschitz(cfg: &Theorem1Config) -> Result<TrialReport> {
    ensure_trials(cfg.trials)?;
    ensure_positive("t", cfg.t)?;
    ensure_open_unit("delta", cfg.delta)?;
    cfg.embedding.validate()?;
    let kind = cfg.process.kind;
    if kind.is_reset_chain() && kind.reset_probability() == 0.0 {
        return Err(Error::UnsupportedProcess(
            "a chain without resets has no mixing bound to plug in".into(),
        ));
    }
    let gauge = GaugeSpec::Lipschitz { l: cfg.l, metric: cfg.metric };
    gauge.validate()?;
    let mix = mixing_bounds(&cfg.process, cfg.tau)?;
    if cfg.tau >= cfg.n {
        return Err(Error::param("tau", format!("tau = {} must be below n = {}", cfg.tau, cfg.n)));
    }
    let law = StationaryLaw::new(&kind, cfg.embedding);
    if law.finite_support().is_none() && cfg.mc_fresh == 0 {
        return Err(Error::param("mc_fresh", "Monte Carlo branch needs fresh draws"));
    }
    let m = cfg.n - cfg.tau;
    let seed = cfg.process.seed;

    let outcomes: Vec<Result<bool>> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| {
            let spec = ProcessSpec::new(kind, derive(seed, "trial", i as u64));
            let path = embed(&cfg.embedding, &simulate(&spec, cfg.n)?)?;
            let profile = prefix_min_indexed(&path, &gauge, cfg.tau, &ExceptionSet::empty(m), Backend::Naive)?.profile;
            let gt = missing_mass_gt(&profile, cfg.t)?;
            let rhs = excess_loss_probability_bound(gt, &mix, cfg.n, cfg.delta)?.total;
            let truth = true_missing_mass(&path.prefix(m)?, &gauge, cfg.t, &law, cfg.mc_fresh, derive(seed, "fresh", i as u64))?;
            let slack = if truth.exact { 0.0 } else { 3.0 * truth.std_error };
            Ok(truth.estimate > rhs + slack)
        })
        .collect();
    let mut violations = 0;
    for o in outcomes {
        if o? {
            violations += 1;
        }
    }
    TrialReport::from_counts(cfg.trials, violations, cfg.delta)
}

// ---------------------------------------------------------------------------
// Good-Turing concentration

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodTuringReport {
    pub trials: usize,
    pub n: usize,
    pub threshold: f64,
    /// Root-mean-square of `M̂ − GT` over trials.
    pub rms: f64,
    pub mean_missing_mass: f64,
    pub mean_good_turing: f64,
    /// `√(7/n)`.
    pub bound: f64,
    pub pass: bool,
}

/// RMS deviation between the exact missing mass and the Good-Turing
/// estimate under iid sampling from `pi`, with the discrete gauge.
pub fn validate_good_turing(pi: &FiniteDistribution, n: usize, threshold: f64, trials: usize, seed: u64) -> Result<GoodTuringReport> {
    if pi.atoms().len() < 2 {
        return Err(Error::param("pi", "support must have at least two atoms"));
    }
    if n == 0 || trials == 0 {
        return Err(Error::param("n/trials", "must be positive"));
    }
    ensure_positive("threshold", threshold)?;
    let gauge = GaugeSpec::Discrete;
    let rows: Vec<Result<(f64, f64)>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, "good_turing", i);
            let path = SamplePath::new((0..n).map(|_| pi.sample(&mut rng)).collect())?;
            let missing = true_missing_mass(&path, &gauge, threshold, pi, 0, 0)?.estimate;
            let (loo, _) = leave_one_out_min(&path, &gauge, Backend::MetricIndexed)?;
            Ok((missing, isolated_fraction(&loo, threshold)))
        })
        .collect();
    let (mut sq, mut sm, mut sg) = (0.0, 0.0, 0.0);
    for row in rows {
        let (m, g) = row?;
        sq += (m - g) * (m - g);
        sm += m;
        sg += g;
    }
    let k = trials as f64;
    let rms = (sq / k).sqrt();
    let bound = (7.0 / n as f64).sqrt();
    Ok(GoodTuringReport {
        trials,
        n,
        threshold,
        rms,
        mean_missing_mass: sm / k,
        mean_good_turing: sg / k,
        bound,
        pass: rms <= bound,
    })
}

// ---------------------------------------------------------------------------
// Decay studies

/// How the gap `τ` is chosen for each reset probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TauRule {
    Fixed { tau: usize },
    /// Smallest `τ` with `(1 − p)^τ ≤ eps`.
    ResetTv { eps: f64 },
}

impl TauRule {
    pub fn tau_for(&self, p: f64) -> Result<usize> {
        match *self {
            TauRule::Fixed { tau } => {
                if tau == 0 {
                    Err(Error::param("tau", "must be a positive integer"))
                } else {
                    Ok(tau)
                }
            }
            TauRule::ResetTv { eps } => reset_mixing_time(p, eps),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayConfig {
    /// Process template; its reset probability is replaced by each entry of `p_list`.
    pub process: ProcessKind,
    pub embedding: EmbeddingSpec,
    pub gauge: GaugeSpec,
    pub tau: TauRule,
    pub sizes: Vec<usize>,
    pub p_list: Vec<f64>,
    pub seeds: Vec<u64>,
    pub backend: Backend,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub p: f64,
    pub n: usize,
    pub tau: usize,
    pub mean_g: f64,
    /// Sample standard deviation over seeds (0 for a single seed).
    pub std_g: f64,
    pub tau_over_n: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkippedSize {
    pub p: f64,
    pub n: usize,
    pub tau: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayStudy {
    pub rows: Vec<DecayRow>,
    /// Sizes not exceeding `τ`, for which `G` is undefined.
    pub skipped: Vec<SkippedSize>,
    /// `per_seed[r][s]`: `G` of row `r` for seed `s`.
    pub per_seed: Vec<Vec<f64>>,
}

/// `G` over seeded paths for every `(p, n)` pair.
///
/// One path of the largest size is simulated per `(p, seed)`; since profile
/// entries depend only on earlier points, `G` at a smaller `n` is the mean of
/// the first `n − τ` entries, which equals `G` of the length-`n` prefix.
pub fn decay_study(cfg: &DecayConfig) -> Result<DecayStudy> {
    if cfg.sizes.is_empty() || cfg.p_list.is_empty() || cfg.seeds.is_empty() {
        return Err(Error::param("sizes/p_list/seeds", "must be nonempty"));
    }
    if cfg.sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("sizes", "must be strictly ascending"));
    }
    cfg.embedding.validate()?;
    cfg.gauge.validate()?;
    let n_max = *cfg.sizes.last().expect("nonempty");

    let mut study = DecayStudy {
        rows: Vec::new(),
        skipped: Vec::new(),
        per_seed: Vec::new(),
    };
    for &p in &cfg.p_list {
        let kind = cfg.process.with_reset(p);
        kind.validate()?;
        let tau = cfg.tau.tau_for(p)?;
        let sizes: Vec<usize> = cfg.sizes.iter().copied().filter(|&n| n > tau).collect();
        for &n in cfg.sizes.iter().filter(|&&n| n <= tau) {
            study.skipped.push(SkippedSize { p, n, tau });
        }
        if sizes.is_empty() {
            continue;
        }
        let per_seed: Vec<Result<Vec<f64>>> = cfg
            .seeds
            .par_iter()
            .map(|&seed| {
                let spec = ProcessSpec::new(kind, seed);
                let path = embed(&cfg.embedding, &simulate(&spec, n_max)?)?;
                let full = prefix_min_indexed(&path, &cfg.gauge, tau, &ExceptionSet::empty(n_max - tau), cfg.backend)?.profile;
                sizes.iter().map(|&n| missing_mass_g(&full.truncated(n)?)).collect()
            })
            .collect();
        let per_seed = per_seed.into_iter().collect::<Result<Vec<_>>>()?;
        for (j, &n) in sizes.iter().enumerate() {
            let values: Vec<f64> = per_seed.iter().map(|v| v[j]).collect();
            let (mean_g, std_g) = mean_std(&values);
            study.rows.push(DecayRow {
                p,
                n,
                tau,
                mean_g,
                std_g,
                tau_over_n: tau as f64 / n as f64,
            });
            study.per_seed.push(values);
        }
    }
    Ok(study)
}

/// Mean and sample standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, var.sqrt())
}

/// Weighted least-squares nonincreasing fit (pool-adjacent-violators).
pub fn isotonic_nonincreasing(values: &[f64], weights: &[f64]) -> Vec<f64> {
    assert_eq!(values.len(), weights.len());
    // Blocks of (weighted mean, weight, length).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(values.len());
    for (&v, &w) in values.iter().zip(weights) {
        blocks.push((v, w, 1));
        while blocks.len() > 1 {
            let (m2, w2, l2) = blocks[blocks.len() - 1];
            let (m1, w1, l1) = blocks[blocks.len() - 2];
            if m1 >= m2 {
                break;
            }
            blocks.truncate(blocks.len() - 2);
            blocks.push(((m1 * w1 + m2 * w2) / (w1 + w2), w1 + w2, l1 + l2));
        }
    }
    blocks.into_iter().flat_map(|(m, _, l)| std::iter::repeat(m).take(l)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::good_turing;
    use crate::geometry::Point;
    use crate::processes::Space;

    #[test]
    fn binomial_pass_rule() {
        let r = TrialReport::from_counts(10_000, 0, 0.05).unwrap();
        assert!(r.pass && r.p_value == 1.0);
        let r = TrialReport::from_counts(10_000, 500, 0.05).unwrap();
        assert!(r.pass);
        let r = TrialReport::from_counts(10_000, 600, 0.05).unwrap();
        assert!(!r.pass, "{}", r.p_value);
        // Pr{Bin(100, 0.1) ≥ 20} ≈ 0.00198: still a pass.
        let r = TrialReport::from_counts(100, 20, 0.1).unwrap();
        assert!(r.pass && (r.p_value - 0.001_978).abs() < 2e-5, "{}", r.p_value);
        assert!(TrialReport::from_counts(10, 11, 0.1).is_err());
    }

    fn lemma(chain: BernoulliChain) -> Lemma1Config {
        Lemma1Config { chain, n: 200, delta: 0.05, trials: 1000, seed: 1 }
    }

    #[test]
    fn lemma1_degenerate_chains_never_violate() {
        for q in [0.0, 1.0] {
            let r = validate_lemma1(&lemma(BernoulliChain::Iid { q })).unwrap();
            assert_eq!(r.violations, 0);
        }
    }

    #[test]
    fn lemma1_is_deterministic_and_checks_power() {
        let cfg = lemma(BernoulliChain::MarkovModulated { transition: [[0.9, 0.1], [0.2, 0.8]], q: [0.1, 0.7] });
        assert_eq!(validate_lemma1(&cfg).unwrap(), validate_lemma1(&cfg).unwrap());
        assert!(validate_lemma1(&Lemma1Config { trials: 99, ..cfg }).is_err());
        let bad = BernoulliChain::MarkovModulated { transition: [[0.9, 0.2], [0.2, 0.8]], q: [0.1, 0.7] };
        assert!(validate_lemma1(&lemma(bad)).is_err());
    }

    #[test]
    fn markov_modulated_conditional_means_match_frequencies() {
        let chain = BernoulliChain::MarkovModulated { transition: [[0.9, 0.1], [0.3, 0.7]], q: [0.2, 0.9] };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (r, cond) = chain.draw(200_000, &mut rng);
        let freq = r.iter().sum::<f64>() / r.len() as f64;
        let mean_cond = cond.iter().sum::<f64>() / cond.len() as f64;
        // Stationary mass on state 1 is 0.1 / 0.4 = 0.25.
        let expected = 0.75 * 0.2 + 0.25 * 0.9;
        assert!((freq - expected).abs() < 0.01);
        assert!((mean_cond - expected).abs() < 0.01);
    }

    fn circle_cfg(t: f64) -> Theorem1Config {
        Theorem1Config {
            process: ProcessSpec::new(ProcessKind::IidUniform { space: Space::Circle }, 3),
            embedding: EmbeddingSpec::Identity,
            l: 1.0,
            metric: BaseMetric::Euclidean,
            t,
            tau: 1,
            n: 64,
            delta: 0.1,
            trials: 100,
            mc_fresh: 200,
        }
    }

    #[test]
    fn theorem1_large_threshold_has_no_violations() {
        let r = validate_theorem1_lipschitz(&circle_cfg(1.0)).unwrap();
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn theorem1_rejects_chains_without_resets() {
        let cfg = Theorem1Config {
            process: ProcessSpec::new(ProcessKind::CycleChain { states: 16, reset: 0.0 }, 1),
            metric: BaseMetric::Discrete,
            t: 0.5,
            ..circle_cfg(0.5)
        };
        assert!(matches!(validate_theorem1_lipschitz(&cfg), Err(Error::UnsupportedProcess(_))));
    }

    #[test]
    fn good_turing_trivial_cases() {
        let pi = FiniteDistribution::uniform_symbols(5).unwrap();
        let r = validate_good_turing(&pi, 10_000, 0.5, 20, 1).unwrap();
        assert_eq!(r.rms, 0.0);
        assert!(validate_good_turing(&FiniteDistribution::uniform_symbols(1).unwrap(), 10, 0.5, 10, 1).is_err());

        let one = FiniteDistribution::new(vec![(Point::Symbol(7), 1.0)]).unwrap();
        let path = SamplePath::from_symbols(&[7; 12]).unwrap();
        assert_eq!(good_turing(&path, &GaugeSpec::Discrete, 0.5).unwrap(), 0.0);
        assert_eq!(true_missing_mass(&path, &GaugeSpec::Discrete, 0.5, &one, 0, 0).unwrap().estimate, 0.0);
    }

    #[test]
    fn isotonic_fit() {
        assert_eq!(isotonic_nonincreasing(&[3.0, 2.0, 1.0], &[1.0; 3]), vec![3.0, 2.0, 1.0]);
        assert_eq!(isotonic_nonincreasing(&[1.0, 3.0], &[1.0; 2]), vec![2.0, 2.0]);
        assert_eq!(isotonic_nonincreasing(&[4.0, 1.0, 3.0], &[1.0, 1.0, 3.0]), vec![4.0, 2.5, 2.5]);
    }

    #[test]
    fn decay_study_on_a_cycle_without_resets() {
        let cfg = DecayConfig {
            process: ProcessKind::CycleChain { states: 100, reset: 0.0 },
            embedding: EmbeddingSpec::Identity,
            gauge: GaugeSpec::Discrete,
            tau: TauRule::Fixed { tau: 100 },
            sizes: vec![64, 128, 256, 512, 1024],
            p_list: vec![0.0],
            seeds: vec![1, 2, 3],
            backend: Backend::MetricIndexed,
        };
        let study = decay_study(&cfg).unwrap();
        assert_eq!(study.skipped, vec![SkippedSize { p: 0.0, n: 64, tau: 100 }]);
        assert_eq!(study.rows.len(), 4);
        assert!(study.rows.iter().all(|r| r.mean_g == 0.0 && r.std_g == 0.0));
        assert_eq!(study.rows[0].tau_over_n, 100.0 / 128.0);
    }
}
