//! Exact nearest-distance backends for the prefix and leave-one-out kernels.
//!
//! The indexed backend minimises the *base metric* and applies the gauge's
//! nondecreasing transform once, after the minimum. Because floating-point
//! rounding is monotone, `transform(min d) == min transform(d)` bit for bit,
//! so both backends return identical profiles. Only minimum values are
//! reported; which index attains a tie is never observable.
//!
//! Euclidean gauges use an incremental vantage-point tree; each child link
//! keeps the range of distances from its subtree to the parent vantage
//! point, and a subtree is skipped when the triangle inequality proves it
//! cannot beat the current best. The tree is rebuilt balanced whenever it
//! doubles in size. The discrete metric only distinguishes equal from
//! unequal points, so it is served by an exact-match hash index.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{check_profile_inputs, leave_one_out_naive, prefix_min_profile, ExceptionSet, PrefixGaugeProfile};
use crate::geometry::{euclidean, BaseMetric, GaugeSpec, MetricForm, Point, SamplePath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Naive,
    MetricIndexed,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Naive => "naive",
            Backend::MetricIndexed => "indexed",
        }
    }
}

/// Distance-evaluation counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SearchStats {
    /// Evaluations spent answering queries.
    pub query_evals: u64,
    /// Evaluations spent inserting points and rebuilding the index.
    pub build_evals: u64,
}

impl SearchStats {
    pub fn total(&self) -> u64 {
        self.query_evals + self.build_evals
    }

    fn merge(self, other: SearchStats) -> SearchStats {
        SearchStats {
            query_evals: self.query_evals + other.query_evals,
            build_evals: self.build_evals + other.build_evals,
        }
    }
}

/// A profile together with the work it took.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedProfile {
    pub profile: PrefixGaugeProfile,
    pub stats: SearchStats,
}

const NO_CHILD: u32 = u32::MAX;

#[derive(Debug, Clone, Copy)]
struct Link {
    node: u32,
    /// Range of distances from the subtree's points to the parent vantage point.
    lo: f64,
    hi: f64,
}

impl Link {
    const EMPTY: Link = Link {
        node: NO_CHILD,
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };

    fn widen(&mut self, d: f64) {
        self.lo = self.lo.min(d);
        self.hi = self.hi.max(d);
    }
}

#[derive(Debug, Clone)]
struct VpNode {
    id: usize,
    /// Split radius; `NaN` until the first point is inserted below this node.
    mu: f64,
    inside: Link,
    outside: Link,
}

/// Incremental vantage-point tree over the coordinates of `points[id]`.
#[derive(Debug, Clone)]
pub struct VpTree<'a> {
    points: &'a [Point],
    nodes: Vec<VpNode>,
    root: u32,
    ids: Vec<usize>,
    built_at: usize,
}

/// Minimum size before the first balanced build.
const MIN_REBUILD: usize = 16;

impl<'a> VpTree<'a> {
    pub fn new(points: &'a [Point]) -> Self {
        VpTree {
            points,
            nodes: Vec::new(),
            root: NO_CHILD,
            ids: Vec::new(),
            built_at: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    fn dist(&self, a: &Point, id: usize) -> f64 {
        euclidean(a.coord_slice().unwrap_or(&[]), self.points[id].coord_slice().unwrap_or(&[]))
    }

    pub fn insert(&mut self, id: usize, stats: &mut SearchStats) {
        self.ids.push(id);
        if self.ids.len() >= MIN_REBUILD && self.ids.len() >= 2 * self.built_at {
            self.rebuild(stats);
            return;
        }
        let new = self.nodes.len() as u32;
        self.nodes.push(VpNode {
            id,
            mu: f64::NAN,
            inside: Link::EMPTY,
            outside: Link::EMPTY,
        });
        if self.root == NO_CHILD {
            self.root = new;
            return;
        }
        let p = &self.points[id];
        let mut cur = self.root as usize;
        loop {
            let d = self.dist(p, self.nodes[cur].id);
            stats.build_evals += 1;
            let node = &mut self.nodes[cur];
            if node.mu.is_nan() {
                node.mu = d;
            }
            let link = if d < node.mu { &mut node.inside } else { &mut node.outside };
            link.widen(d);
            if link.node == NO_CHILD {
                link.node = new;
                return;
            }
            cur = link.node as usize;
        }
    }

    fn rebuild(&mut self, stats: &mut SearchStats) {
        self.nodes.clear();
        self.nodes.reserve(self.ids.len());
        let mut items: Vec<(f64, usize)> = self.ids.iter().map(|&id| (0.0, id)).collect();
        self.root = self.build(&mut items, stats);
        self.built_at = self.ids.len();
    }

    fn build(&mut self, items: &mut [(f64, usize)], stats: &mut SearchStats) -> u32 {
        if items.is_empty() {
            return NO_CHILD;
        }
        // Deterministic pseudo-random vantage choice.
        let pick = (splitmix(self.nodes.len() as u64 ^ items.len() as u64) % items.len() as u64) as usize;
        items.swap(0, pick);
        let vp = items[0].1;
        let slot = self.nodes.len();
        self.nodes.push(VpNode {
            id: vp,
            mu: f64::NAN,
            inside: Link::EMPTY,
            outside: Link::EMPTY,
        });
        let rest = &mut items[1..];
        if rest.is_empty() {
            return slot as u32;
        }
        let vp_point = &self.points[vp];
        for item in rest.iter_mut() {
            item.0 = euclidean(
                vp_point.coord_slice().unwrap_or(&[]),
                self.points[item.1].coord_slice().unwrap_or(&[]),
            );
        }
        stats.build_evals += rest.len() as u64;
        let mid = rest.len() / 2;
        rest.select_nth_unstable_by(mid, |a, b| a.0.total_cmp(&b.0));
        let mu = rest[mid].0;
        // Points strictly closer than mu go inside.
        let split = partition(rest, |item| item.0 < mu);
        let (inner, outer) = rest.split_at_mut(split);
        let range = |xs: &[(f64, usize)]| {
            xs.iter().fold(Link::EMPTY, |mut l, x| {
                l.widen(x.0);
                l
            })
        };
        let mut inside = range(inner);
        let mut outside = range(outer);
        inside.node = self.build(inner, stats);
        outside.node = self.build(outer, stats);
        let node = &mut self.nodes[slot];
        node.mu = mu;
        node.inside = inside;
        node.outside = outside;
        slot as u32
    }

    /// Smallest distance from `q` to an inserted point other than `exclude`;
    /// `+∞` when there is none.
    pub fn nearest(&self, q: &Point, exclude: Option<usize>, stats: &mut SearchStats) -> f64 {
        let mut best = f64::INFINITY;
        if self.root != NO_CHILD {
            self.search(self.root, q, exclude, &mut best, stats);
        }
        best
    }

    fn search(&self, at: u32, q: &Point, exclude: Option<usize>, best: &mut f64, stats: &mut SearchStats) {
        let node = &self.nodes[at as usize];
        let d = self.dist(q, node.id);
        stats.query_evals += 1;
        if exclude != Some(node.id) && d < *best {
            *best = d;
        }
        let (first, second) = if d < node.mu {
            (&node.inside, &node.outside)
        } else {
            (&node.outside, &node.inside)
        };
        for link in [first, second] {
            if link.node == NO_CHILD {
                continue;
            }
            let lower = (link.lo - d).max(d - link.hi).max(0.0);
            // Slack absorbs rounding in the three computed distances.
            let slack = 1e-9 * (d + link.hi);
            if lower > *best + slack {
                continue;
            }
            self.search(link.node, q, exclude, best, stats);
        }
    }
}

fn partition<T>(xs: &mut [T], pred: impl Fn(&T) -> bool) -> usize {
    let mut store = 0;
    for i in 0..xs.len() {
        if pred(&xs[i]) {
            xs.swap(store, i);
            store += 1;
        }
    }
    store
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashable identity of a point; `-0.0` and `0.0` share a key.
fn point_key(p: &Point) -> Vec<u64> {
    let bits = |c: &[f64]| c.iter().map(|v| (v + 0.0).to_bits()).collect::<Vec<_>>();
    match p {
        Point::Symbol(s) => vec![0, *s],
        Point::Coords(c) => {
            let mut k = vec![1];
            k.extend(bits(c));
            k
        }
        Point::Labeled { coords, label } => {
            let mut k = vec![2, *label as u64];
            k.extend(bits(coords));
            k
        }
        Point::Paired { coords, target } => {
            let mut k = vec![3, (target + 0.0).to_bits()];
            k.extend(bits(coords));
            k
        }
    }
}

/// Exact-match index: nearest discrete-metric distance is 0 on a repeat, else 1.
#[derive(Debug, Clone, Default)]
struct ExactMatchIndex {
    counts: HashMap<Vec<u64>, usize>,
    total: usize,
}

impl ExactMatchIndex {
    fn insert(&mut self, p: &Point, stats: &mut SearchStats) {
        *self.counts.entry(point_key(p)).or_insert(0) += 1;
        self.total += 1;
        stats.build_evals += 1;
    }

    /// `exclude_self` removes one copy of `q` itself (leave-one-out queries).
    fn nearest(&self, q: &Point, exclude_self: bool, stats: &mut SearchStats) -> f64 {
        stats.query_evals += 1;
        let drop = usize::from(exclude_self);
        let same = self.counts.get(&point_key(q)).copied().unwrap_or(0).saturating_sub(drop);
        if same > 0 {
            0.0
        } else if self.total > drop {
            1.0
        } else {
            f64::INFINITY
        }
    }
}

enum Index<'a> {
    Vp(VpTree<'a>),
    /// Separate trees for labels −1 and +1.
    Labeled([VpTree<'a>; 2]),
    Exact(ExactMatchIndex),
}

impl<'a> Index<'a> {
    fn new(form: MetricForm, points: &'a [Point]) -> Self {
        match (form.metric, form.by_label) {
            (BaseMetric::Discrete, _) => Index::Exact(ExactMatchIndex::default()),
            (BaseMetric::Euclidean, false) => Index::Vp(VpTree::new(points)),
            (BaseMetric::Euclidean, true) => Index::Labeled([VpTree::new(points), VpTree::new(points)]),
        }
    }

    fn label_slot(p: &Point) -> usize {
        usize::from(p.label() == Some(1))
    }

    fn insert(&mut self, points: &[Point], id: usize, stats: &mut SearchStats) {
        match self {
            Index::Vp(t) => t.insert(id, stats),
            Index::Labeled(ts) => ts[Self::label_slot(&points[id])].insert(id, stats),
            Index::Exact(e) => e.insert(&points[id], stats),
        }
    }

    fn nearest(&self, q: &Point, exclude: Option<usize>, stats: &mut SearchStats) -> f64 {
        match self {
            Index::Vp(t) => t.nearest(q, exclude, stats),
            Index::Labeled(ts) => ts[Self::label_slot(q)].nearest(q, exclude, stats),
            Index::Exact(e) => e.nearest(q, exclude.is_some(), stats),
        }
    }
}

fn metric_form_for(gauge: &GaugeSpec) -> Result<MetricForm> {
    gauge.metric_form().ok_or_else(|| Error::IncompatibleBackend {
        backend: Backend::MetricIndexed.name(),
        gauge: gauge.name().to_string(),
    })
}

/// Prefix profile through the chosen backend.
///
/// Index `i` enters the structure when it first becomes admissible, i.e.
/// just before the query for path position `k = i + τ`.
pub fn prefix_min_indexed(
    path: &SamplePath,
    gauge: &GaugeSpec,
    tau: usize,
    exceptions: &ExceptionSet,
    backend: Backend,
) -> Result<IndexedProfile> {
    match backend {
        Backend::Naive => {
            let profile = prefix_min_profile(path, gauge, tau, exceptions)?;
            let n = path.len();
            let mut evals = 0u64;
            let mut admissible = 0u64;
            for k in tau..n {
                if !exceptions.contains(k - tau) {
                    admissible += 1;
                }
                evals += admissible;
            }
            Ok(IndexedProfile {
                profile,
                stats: SearchStats {
                    query_evals: evals,
                    build_evals: 0,
                },
            })
        }
        Backend::MetricIndexed => {
            let form = metric_form_for(gauge)?;
            let mask = check_profile_inputs(path, gauge, tau, exceptions)?;
            let pts = path.points();
            let mut stats = SearchStats::default();
            let mut index = Index::new(form, pts);
            let mut mins = Vec::with_capacity(pts.len() - tau);
            for k in tau..pts.len() {
                let i = k - tau;
                if !mask[i] {
                    index.insert(pts, i, &mut stats);
                }
                let d = index.nearest(&pts[k], None, &mut stats);
                mins.push(if d.is_infinite() { f64::INFINITY } else { gauge.transform(d) });
            }
            Ok(IndexedProfile {
                profile: PrefixGaugeProfile {
                    n: pts.len(),
                    tau,
                    exceptions: exceptions.indices().to_vec(),
                    mins,
                },
                stats,
            })
        }
    }
}

/// `min_{i ≠ k} g(X_k, X_i)` for every `k`.
pub fn leave_one_out_min(path: &SamplePath, gauge: &GaugeSpec, backend: Backend) -> Result<(Vec<f64>, SearchStats)> {
    let n = path.len() as u64;
    match backend {
        Backend::Naive => {
            let mins = leave_one_out_naive(path, gauge)?;
            Ok((
                mins,
                SearchStats {
                    query_evals: n * (n - 1),
                    build_evals: 0,
                },
            ))
        }
        Backend::MetricIndexed => {
            let form = metric_form_for(gauge)?;
            gauge.validate()?;
            gauge.check_kind(path.kind())?;
            if path.len() < 2 {
                return Err(Error::param("n", "leave-one-out minima need at least 2 points"));
            }
            let pts = path.points();
            let mut build = SearchStats::default();
            let mut index = Index::new(form, pts);
            for i in 0..pts.len() {
                index.insert(pts, i, &mut build);
            }
            // The index is frozen from here on; queries share it read-only.
            let index = &index;
            let (mins, stats): (Vec<f64>, Vec<SearchStats>) = (0..pts.len())
                .into_par_iter()
                .map(|k| {
                    let mut s = SearchStats::default();
                    let d = index.nearest(&pts[k], Some(k), &mut s);
                    (if d.is_infinite() { f64::INFINITY } else { gauge.transform(d) }, s)
                })
                .unzip();
            let stats = stats.into_iter().fold(build, SearchStats::merge);
            Ok((mins, stats))
        }
    }
}
