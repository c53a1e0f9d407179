//! Missing-mass estimators computed from a single sample path.
//!
//! With gap `τ` and exception set `B ⊆ [n−τ]`, the prefix profile is
//!
//! ```text
//! m_k = min_{i ∈ Bᶜ ∩ [k−τ]} g(X_k, X_i),     k = τ+1, …, n
//! ```
//!
//! and the estimators are `G = mean(m_k)` and `G_t = mean(1{m_k > t})`.
//! Indices in this module are 0-based: profile entry `j` belongs to path
//! position `k = τ + j` and admits earlier positions `i ≤ k − τ`.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};
use crate::geometry::{GaugeSpec, Point, SamplePath};

/// Indices excluded from both the max-Φ term and the prefix minima.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExceptionSet {
    indices: Vec<usize>,
    domain: usize,
}

impl ExceptionSet {
    /// `B = ∅` over a domain of `n − τ` admissible indices.
    pub fn empty(domain: usize) -> Self {
        ExceptionSet {
            indices: Vec::new(),
            domain,
        }
    }

    /// Sorted, deduplicated set; every index must be `< domain`.
    pub fn from_indices(mut indices: Vec<usize>, domain: usize) -> Result<Self> {
        indices.sort_unstable();
        let before = indices.len();
        indices.dedup();
        if indices.len() != before {
            return Err(Error::param("exceptions", "duplicate index"));
        }
        if let Some(&bad) = indices.iter().find(|&&i| i >= domain) {
            return Err(Error::param("exceptions", format!("index {bad} outside [0, {domain})")));
        }
        Ok(ExceptionSet { indices, domain })
    }

    /// The `round(α·domain)` indices with the largest `Φ(f, X_i)`, `i < domain`.
    ///
    /// `α·domain` must be integral. Ties resolve towards the lower index.
    pub fn top_phi(phi: &[f64], alpha: f64, domain: usize) -> Result<Self> {
        let count = exception_count(alpha, domain)?;
        if phi.len() < domain {
            return Err(Error::param("phi", format!("need {domain} values, got {}", phi.len())));
        }
        let mut order: Vec<usize> = (0..domain).collect();
        order.sort_by(|&a, &b| phi[b].total_cmp(&phi[a]).then(a.cmp(&b)));
        order.truncate(count);
        Self::from_indices(order, domain)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    /// `α = |B| / (n − τ)`.
    pub fn fraction(&self) -> f64 {
        if self.domain == 0 {
            0.0
        } else {
            self.indices.len() as f64 / self.domain as f64
        }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.indices.binary_search(&i).is_ok()
    }

    /// Membership mask over `0..domain`.
    pub(crate) fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.domain];
        for &i in &self.indices {
            m[i] = true;
        }
        m
    }
}

/// `α·domain` as an integer, rejecting non-integral products.
pub fn exception_count(alpha: f64, domain: usize) -> Result<usize> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::param("alpha", format!("must lie in [0, 1), got {alpha}")));
    }
    let raw = alpha * domain as f64;
    let rounded = raw.round();
    if (raw - rounded).abs() > 1e-9 {
        return Err(Error::param(
            "alpha",
            format!("alpha·(n−tau) = {raw} is not an integer"),
        ));
    }
    Ok(rounded as usize)
}

/// The inner minima of `G` and `G_t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrefixGaugeProfile {
    pub n: usize,
    pub tau: usize,
    pub exceptions: Vec<usize>,
    /// `mins[j]` belongs to path position `τ + j`; may contain `+∞`.
    #[serde(with = "extended_reals")]
    pub mins: Vec<f64>,
}

impl PrefixGaugeProfile {
    pub fn len(&self) -> usize {
        self.mins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mins.is_empty()
    }

    /// Profile of the path truncated to its first `m` points (`τ < m ≤ n`).
    ///
    /// Entries do not depend on later points, so truncation is exact.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m <= self.tau || m > self.n {
            return Err(Error::param("n", format!("truncation length must lie in {}..={}", self.tau + 1, self.n)));
        }
        Ok(PrefixGaugeProfile {
            n: m,
            tau: self.tau,
            exceptions: self.exceptions.iter().copied().filter(|&i| i < m - self.tau).collect(),
            mins: self.mins[..m - self.tau].to_vec(),
        })
    }
}

/// JSON has no infinity literal; these are written as the string "inf".
mod extended_reals {
    use serde::de::{self, Deserializer, SeqAccess, Visitor};
    use serde::ser::{SerializeSeq, Serializer};

    #[derive(serde::Serialize, serde::Deserialize)]
    #[serde(untagged)]
    enum Ext {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for x in v {
            if x.is_infinite() {
                seq.serialize_element(&Ext::Text("inf".into()))?;
            } else {
                seq.serialize_element(&Ext::Num(*x))?;
            }
        }
        seq.end()
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Vec<f64>;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a sequence of numbers or \"inf\"")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Vec<f64>, A::Error> {
                let mut out = Vec::new();
                while let Some(e) = seq.next_element::<Ext>()? {
                    out.push(match e {
                        Ext::Num(x) => x,
                        Ext::Text(t) if t == "inf" => f64::INFINITY,
                        Ext::Text(t) => return Err(de::Error::custom(format!("bad entry {t}"))),
                    });
                }
                Ok(out)
            }
        }
        d.deserialize_seq(V)
    }
}

/// Validates `(path, gauge, τ, B)` and returns the exception mask.
pub(crate) fn check_profile_inputs(
    path: &SamplePath,
    gauge: &GaugeSpec,
    tau: usize,
    exceptions: &ExceptionSet,
) -> Result<Vec<bool>> {
    gauge.validate()?;
    gauge.check_kind(path.kind())?;
    let n = path.len();
    if tau == 0 {
        return Err(Error::param("tau", "must be a positive integer"));
    }
    if tau >= n {
        return Err(Error::param("tau", format!("tau = {tau} must be below n = {n}")));
    }
    if exceptions.domain() != n - tau {
        return Err(Error::param(
            "exceptions",
            format!("exception domain {} differs from n − tau = {}", exceptions.domain(), n - tau),
        ));
    }
    let mask = exceptions.mask();
    // Domains are nested in k, so only the first one (index 0 alone) can be empty.
    if mask[0] {
        return Err(Error::EmptyPrefix { k: tau });
    }
    Ok(mask)
}

/// Exact prefix minima by direct enumeration (the reference kernel).
pub fn prefix_min_profile(
    path: &SamplePath,
    gauge: &GaugeSpec,
    tau: usize,
    exceptions: &ExceptionSet,
) -> Result<PrefixGaugeProfile> {
    let mask = check_profile_inputs(path, gauge, tau, exceptions)?;
    let pts = path.points();
    let n = pts.len();
    let mins: Vec<f64> = (tau..n)
        .into_par_iter()
        .map(|k| {
            let y = &pts[k];
            let mut best = f64::INFINITY;
            for i in 0..=k - tau {
                if !mask[i] {
                    best = best.min(gauge.eval_unchecked(y, &pts[i]));
                }
            }
            best
        })
        .collect();
    Ok(PrefixGaugeProfile {
        n,
        tau,
        exceptions: exceptions.indices().to_vec(),
        mins,
    })
}

/// `G = (1/(n−τ)) Σ_k m_k`, summed in ascending `k`.
pub fn missing_mass_g(profile: &PrefixGaugeProfile) -> Result<f64> {
    if profile.is_empty() {
        return Err(Error::param("profile", "empty profile"));
    }
    let mut sum = 0.0;
    for (index, &m) in profile.mins.iter().enumerate() {
        if m.is_infinite() {
            return Err(Error::InfiniteGauge { index });
        }
        sum += m;
    }
    Ok(sum / profile.len() as f64)
}

/// `G_t = (1/(n−τ)) Σ_k 1{m_k > t}`; `+∞` entries always count.
pub fn missing_mass_gt(profile: &PrefixGaugeProfile, t: f64) -> Result<f64> {
    ensure_positive("t", t)?;
    if profile.is_empty() {
        return Err(Error::param("profile", "empty profile"));
    }
    let count = profile.mins.iter().filter(|&&m| m > t).count();
    Ok(count as f64 / profile.len() as f64)
}

/// `min_{i ≠ k} g(X_k, X_i)` for every `k`, by direct enumeration.
pub(crate) fn leave_one_out_naive(path: &SamplePath, gauge: &GaugeSpec) -> Result<Vec<f64>> {
    gauge.validate()?;
    gauge.check_kind(path.kind())?;
    if path.len() < 2 {
        return Err(Error::param("n", "leave-one-out minima need at least 2 points"));
    }
    let pts = path.points();
    Ok((0..pts.len())
        .into_par_iter()
        .map(|k| {
            let mut best = f64::INFINITY;
            for (i, x) in pts.iter().enumerate() {
                if i != k {
                    best = best.min(gauge.eval_unchecked(&pts[k], x));
                }
            }
            best
        })
        .collect())
}

/// Generalised Good-Turing estimate `(1/n) Σ_k 1{min_{i≠k} g(X_k, X_i) > threshold}`.
///
/// For a Lipschitz class with constant `L` and excess `t`, pass
/// `threshold = t / L` with a unit-scale gauge.
pub fn good_turing(path: &SamplePath, gauge: &GaugeSpec, threshold: f64) -> Result<f64> {
    ensure_positive("threshold", threshold)?;
    let loo = leave_one_out_naive(path, gauge)?;
    Ok(isolated_fraction(&loo, threshold))
}

pub(crate) fn isolated_fraction(loo: &[f64], threshold: f64) -> f64 {
    loo.iter().filter(|&&m| m > threshold).count() as f64 / loo.len() as f64
}

/// Access to the invariant distribution `π` for ground-truth computations.
pub trait InvariantDistribution: Sync {
    /// Atoms and weights when `π` has finite support.
    fn finite_support(&self) -> Option<Vec<(Point, f64)>>;

    /// One draw `X ~ π`.
    fn sample(&self, rng: &mut dyn RngCore) -> Point;
}

/// A distribution on finitely many atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    atoms: Vec<(Point, f64)>,
    cumulative: Vec<f64>,
}

impl FiniteDistribution {
    /// Weights are normalised; they must be nonnegative with positive sum.
    pub fn new(atoms: Vec<(Point, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::param("atoms", "need at least one atom"));
        }
        let total: f64 = atoms.iter().map(|(_, w)| *w).sum();
        if atoms.iter().any(|(_, w)| !(w.is_finite() && *w >= 0.0)) || total.is_nan() || total <= 0.0 {
            return Err(Error::param("weights", "must be nonnegative with positive sum"));
        }
        let atoms: Vec<(Point, f64)> = atoms.into_iter().map(|(p, w)| (p, w / total)).collect();
        let mut acc = 0.0;
        let cumulative = atoms
            .iter()
            .map(|(_, w)| {
                acc += w;
                acc
            })
            .collect();
        Ok(FiniteDistribution { atoms, cumulative })
    }

    pub fn uniform_symbols(m: u64) -> Result<Self> {
        Self::new((0..m).map(|s| (Point::Symbol(s), 1.0)).collect())
    }

    pub fn atoms(&self) -> &[(Point, f64)] {
        &self.atoms
    }
}

impl InvariantDistribution for FiniteDistribution {
    fn finite_support(&self) -> Option<Vec<(Point, f64)>> {
        Some(self.atoms.clone())
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Point {
        let u: f64 = rng.random();
        let idx = self.cumulative.partition_point(|&c| c <= u).min(self.atoms.len() - 1);
        self.atoms[idx].0.clone()
    }
}

/// Ground-truth missing mass with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MissingMassEstimate {
    pub estimate: f64,
    pub std_error: f64,
    /// `true` when computed by enumerating a finite support.
    pub exact: bool,
}

/// `M̂(X, t) = Pr{ min_i g(X, X_i) > t | X }` for `X ~ π` independent of `reference`.
///
/// Finite supports are enumerated exactly; otherwise `n_mc` fresh draws
/// seeded by `seed` are used.
pub fn true_missing_mass(
    reference: &SamplePath,
    gauge: &GaugeSpec,
    t: f64,
    oracle: &dyn InvariantDistribution,
    n_mc: usize,
    seed: u64,
) -> Result<MissingMassEstimate> {
    ensure_positive("t", t)?;
    gauge.validate()?;
    gauge.check_kind(reference.kind())?;
    let pts = reference.points();
    let missing = |x: &Point| -> Result<bool> {
        if x.kind() != reference.kind() {
            return Err(Error::VariantMismatch("oracle draws differ from path points".into()));
        }
        Ok(pts.iter().all(|xi| gauge.eval_unchecked(x, xi) > t))
    };

    if let Some(atoms) = oracle.finite_support() {
        let mut mass = 0.0;
        for (x, w) in &atoms {
            if missing(x)? {
                mass += w;
            }
        }
        return Ok(MissingMassEstimate {
            estimate: mass,
            std_error: 0.0,
            exact: true,
        });
    }

    if n_mc < 1 {
        return Err(Error::param("n_mc", "Monte Carlo branch needs at least one draw"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..n_mc {
        let x = oracle.sample(&mut rng);
        if missing(&x)? {
            hits += 1;
        }
    }
    let p = hits as f64 / n_mc as f64;
    Ok(MissingMassEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / n_mc as f64).sqrt(),
        exact: false,
    })
}
