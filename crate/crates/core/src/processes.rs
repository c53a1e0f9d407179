//! Seeded simulators for reset chains, their embeddings, and mixing bounds.
//!
//! A reset chain follows a deterministic map `T` and, with probability `p`
//! at each step, redraws its state from the invariant law `π` instead:
//!
//! ```text
//! Pr{A | x} = (1 − p)·1{T x ∈ A} + p·π(A)
//! ```
//!
//! `T` is the unit rotation on the `N`-cycle, `x ↦ x + ζ mod 1` on the
//! circle, or the coordinatewise rotation by `(ζ₁, ζ₂)` on the 2-torus; `π`
//! is uniform in each case. Chains start from `π`, so they are stationary.
//!
//! Randomness comes from ChaCha8 with three independent streams of one
//! seed: stream 0 draws the start, stream 1 the reset decisions, stream 2
//! the redrawn states. Two chains sharing a seed but started differently
//! therefore coincide from their first reset onwards.

use std::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{MixingProfile, Provenance};
use crate::error::{ensure_probability, Error, Result};
use crate::estimators::InvariantDistribution;
use crate::geometry::{euclidean, Point, PointKind, SamplePath};

/// `1/φ²` for the golden ratio `φ`; a badly approximable rotation number.
pub const DEFAULT_ZETA: f64 = 0.381_966_011_250_105_1;
/// `√2 − 1`, second torus rotation number.
pub const DEFAULT_ZETA2: f64 = 0.414_213_562_373_095_03;

const STREAM_START: u64 = 0;
const STREAM_RESET: u64 = 1;
const STREAM_REDRAW: u64 = 2;

/// Phase space of a process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Space {
    Cycle { states: u64 },
    Circle,
    Torus,
}

impl Space {
    fn validate(&self) -> Result<()> {
        match self {
            Space::Cycle { states: 0 } => Err(Error::param("states", "the cycle needs at least one state")),
            _ => Ok(()),
        }
    }

    /// One draw from the uniform invariant law.
    pub fn sample_uniform(&self, rng: &mut dyn RngCore) -> Point {
        match *self {
            Space::Cycle { states } => Point::Symbol(rng.random_range(0..states)),
            Space::Circle => Point::Coords(vec![rng.random::<f64>()]),
            Space::Torus => {
                let a = rng.random::<f64>();
                let b = rng.random::<f64>();
                Point::Coords(vec![a, b])
            }
        }
    }

    pub fn point_kind(&self) -> PointKind {
        match self {
            Space::Cycle { .. } => PointKind::Symbol,
            Space::Circle => PointKind::Coords(1),
            Space::Torus => PointKind::Coords(2),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProcessKind {
    CycleChain { states: u64, reset: f64 },
    CircleRotation { zeta: f64, reset: f64 },
    TorusRotation { zeta1: f64, zeta2: f64, reset: f64 },
    IidUniform { space: Space },
}

impl ProcessKind {
    pub fn space(&self) -> Space {
        match *self {
            ProcessKind::CycleChain { states, .. } => Space::Cycle { states },
            ProcessKind::CircleRotation { .. } => Space::Circle,
            ProcessKind::TorusRotation { .. } => Space::Torus,
            ProcessKind::IidUniform { space } => space,
        }
    }

    /// Reset probability `p`; `1` for iid sampling.
    pub fn reset_probability(&self) -> f64 {
        match *self {
            ProcessKind::CycleChain { reset, .. }
            | ProcessKind::CircleRotation { reset, .. }
            | ProcessKind::TorusRotation { reset, .. } => reset,
            ProcessKind::IidUniform { .. } => 1.0,
        }
    }

    /// Same dynamics with another reset probability (iid stays iid).
    pub fn with_reset(self, p: f64) -> Self {
        match self {
            ProcessKind::CycleChain { states, .. } => ProcessKind::CycleChain { states, reset: p },
            ProcessKind::CircleRotation { zeta, .. } => ProcessKind::CircleRotation { zeta, reset: p },
            ProcessKind::TorusRotation { zeta1, zeta2, .. } => ProcessKind::TorusRotation { zeta1, zeta2, reset: p },
            iid @ ProcessKind::IidUniform { .. } => iid,
        }
    }

    pub fn is_reset_chain(&self) -> bool {
        !matches!(self, ProcessKind::IidUniform { .. })
    }

    pub fn validate(&self) -> Result<()> {
        self.space().validate()?;
        ensure_probability("p", self.reset_probability())?;
        let rotation = |name: &'static str, z: f64| {
            if (0.0..1.0).contains(&z) {
                Ok(())
            } else {
                Err(Error::param(name, format!("rotation must lie in [0, 1), got {z}")))
            }
        };
        match *self {
            ProcessKind::CircleRotation { zeta, .. } => rotation("zeta", zeta),
            ProcessKind::TorusRotation { zeta1, zeta2, .. } => {
                rotation("zeta1", zeta1)?;
                rotation("zeta2", zeta2)
            }
            _ => Ok(()),
        }
    }

    /// The deterministic map `T`.
    fn step(&self, x: &Point) -> Point {
        let rot = |v: f64, z: f64| {
            let s = v + z;
            if s >= 1.0 {
                s - 1.0
            } else {
                s
            }
        };
        match (*self, x) {
            (ProcessKind::CycleChain { states, .. }, Point::Symbol(s)) => Point::Symbol((s + 1) % states),
            (ProcessKind::CircleRotation { zeta, .. }, Point::Coords(c)) => Point::Coords(vec![rot(c[0], zeta)]),
            (ProcessKind::TorusRotation { zeta1, zeta2, .. }, Point::Coords(c)) => {
                Point::Coords(vec![rot(c[0], zeta1), rot(c[1], zeta2)])
            }
            _ => unreachable!("phase point shape does not match the process"),
        }
    }
}

/// A process together with its seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub kind: ProcessKind,
    pub seed: u64,
}

impl ProcessSpec {
    pub fn new(kind: ProcessKind, seed: u64) -> Self {
        ProcessSpec { kind, seed }
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// `n` stationary steps in phase space, starting from a draw of `π`.
pub fn simulate(spec: &ProcessSpec, n: usize) -> Result<SamplePath> {
    spec.kind.validate()?;
    let start = spec.kind.space().sample_uniform(&mut stream(spec.seed, STREAM_START));
    simulate_from(spec, n, start)
}

/// Like [`simulate`] but with a caller-chosen starting point.
pub fn simulate_from(spec: &ProcessSpec, n: usize, start: Point) -> Result<SamplePath> {
    spec.kind.validate()?;
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    let space = spec.kind.space();
    if start.kind() != space.point_kind() {
        return Err(Error::VariantMismatch("start point does not belong to the phase space".into()));
    }
    let p = spec.kind.reset_probability();
    let mut resets = stream(spec.seed, STREAM_RESET);
    let mut redraws = stream(spec.seed, STREAM_REDRAW);
    let mut points = Vec::with_capacity(n);
    let mut x = start;
    points.push(x.clone());
    for _ in 1..n {
        let u: f64 = resets.random();
        x = if u < p {
            space.sample_uniform(&mut redraws)
        } else {
            spec.kind.step(&x)
        };
        points.push(x.clone());
    }
    SamplePath::new(points)
}

/// Reset-coupling bound `φ(τ) = α(τ) = (1 − p)^τ`.
///
/// Given at least one reset within the gap the state is an exact draw from
/// `π`, so the dependence on the distant past is at most the probability of
/// no reset.
pub fn mixing_bounds(spec: &ProcessSpec, tau: usize) -> Result<MixingProfile> {
    spec.kind.validate()?;
    if tau == 0 {
        return Err(Error::param("tau", "must be a positive integer"));
    }
    let coef = match spec.kind {
        ProcessKind::IidUniform { .. } => 0.0,
        kind => (1.0 - kind.reset_probability()).powi(tau as i32),
    };
    Ok(MixingProfile {
        tau,
        phi_tau: coef,
        alpha_tau: coef,
        provenance: Provenance::ChainDerived,
    })
}

/// Smallest `τ ≥ 1` with `(1 − p)^τ ≤ ε`.
pub fn reset_mixing_time(p: f64, eps: f64) -> Result<usize> {
    ensure_probability("p", p)?;
    crate::error::ensure_open_unit("eps", eps)?;
    if p == 0.0 {
        return Err(Error::param("p", "a chain without resets has no finite mixing time"));
    }
    if p == 1.0 {
        return Ok(1);
    }
    let raw = ((1.0 / eps).ln() / (1.0 / (1.0 - p)).ln()).ceil().max(1.0) as usize;
    Ok(raw)
}

/// Circular distance on `[0, 1)` mod 1.
pub fn circle_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    d.min(1.0 - d)
}

/// Map from phase space into the ambient observation space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EmbeddingSpec {
    Identity,
    /// `x ↦ (cos 2πkx, sin 2πkx)_{k=1..D/2} / √(D/2)` on circle points; unit norm.
    Fourier { dim: usize },
    /// Rotates the template by `2πx₁`; with scaling also shrinks it by
    /// `0.75 + cos(2πx₂)/4`. Output is mean-zero with Euclidean norm `1/2`.
    RasterRotation { with_scaling: bool },
}

/// Side length of the raster template.
pub const RASTER_SIDE: usize = 16;

/// Seeded uniform noise restricted to a centred disc of radius 6.5 and
/// smoothed by one 3×3 box-blur pass.
#[allow(clippy::approx_constant)]
pub const RASTER_TEMPLATE: [[f64; RASTER_SIDE]; RASTER_SIDE] = [
    [0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000],
    [0.0000, 0.0000, 0.0000, 0.0000, 0.0066, 0.0084, 0.0124, 0.0181, 0.0909, 0.1668, 0.1546, 0.0800, 0.0000, 0.0000, 0.0000, 0.0000],
    [0.0000, 0.0000, 0.1107, 0.1601, 0.2646, 0.1936, 0.1999, 0.1391, 0.1831, 0.2710, 0.3221, 0.2989, 0.1553, 0.0604, 0.0000, 0.0000],
    [0.0000, 0.0000, 0.1486, 0.2801, 0.3876, 0.2810, 0.2604, 0.2733, 0.4140, 0.5312, 0.6143, 0.5593, 0.3313, 0.1277, 0.0000, 0.0000],
    [0.0000, 0.0466, 0.2543, 0.4516, 0.5370, 0.4212, 0.4350, 0.4972, 0.5282, 0.5450, 0.5875, 0.6123, 0.4428, 0.2062, 0.0584, 0.0000],
    [0.0000, 0.0551, 0.1572, 0.3168, 0.3522, 0.4057, 0.4331, 0.5979, 0.6658, 0.7354, 0.6789, 0.6331, 0.4806, 0.2818, 0.1040, 0.0000],
    [0.0000, 0.0576, 0.1311, 0.2272, 0.3211, 0.4860, 0.5301, 0.6141, 0.5856, 0.6771, 0.6036, 0.5148, 0.3939, 0.2320, 0.1110, 0.0000],
    [0.0000, 0.0650, 0.1690, 0.2295, 0.3191, 0.5058, 0.5264, 0.5831, 0.5266, 0.6509, 0.6084, 0.5627, 0.4334, 0.2646, 0.0761, 0.0000],
    [0.0000, 0.0994, 0.3044, 0.4002, 0.5079, 0.5943, 0.5938, 0.5301, 0.4298, 0.4843, 0.5022, 0.5153, 0.4956, 0.3342, 0.1300, 0.0000],
    [0.0000, 0.1655, 0.4318, 0.5653, 0.5706, 0.5816, 0.5907, 0.6033, 0.4858, 0.5367, 0.5168, 0.5930, 0.5515, 0.3879, 0.1520, 0.0000],
    [0.0000, 0.1116, 0.3346, 0.4830, 0.5189, 0.5394, 0.5918, 0.6740, 0.6456, 0.6742, 0.5987, 0.6053, 0.5045, 0.3504, 0.1285, 0.0000],
    [0.0000, 0.0687, 0.2698, 0.4374, 0.4993, 0.4727, 0.5080, 0.6522, 0.6458, 0.7163, 0.6366, 0.6393, 0.3949, 0.1998, 0.0289, 0.0000],
    [0.0000, 0.0000, 0.1308, 0.2418, 0.4154, 0.4911, 0.5562, 0.6141, 0.6018, 0.6897, 0.5792, 0.5137, 0.2497, 0.1287, 0.0000, 0.0000],
    [0.0000, 0.0000, 0.0843, 0.1504, 0.3132, 0.3649, 0.3717, 0.3324, 0.2958, 0.3977, 0.3648, 0.3205, 0.1458, 0.0551, 0.0000, 0.0000],
    [0.0000, 0.0000, 0.0000, 0.0000, 0.0707, 0.1734, 0.2026, 0.1855, 0.1626, 0.2277, 0.1740, 0.0942, 0.0000, 0.0000, 0.0000, 0.0000],
    [0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000, 0.0000],
];

impl EmbeddingSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EmbeddingSpec::Fourier { dim } if dim == 0 || dim % 2 == 1 => {
                Err(Error::param("dim", format!("Fourier dimension must be a positive even integer, got {dim}")))
            }
            _ => Ok(()),
        }
    }

    /// `1/√(D/2)`: the per-feature scale of the Fourier map.
    pub fn fourier_scale(dim: usize) -> f64 {
        1.0 / ((dim / 2) as f64).sqrt()
    }

    /// Analytic bracket `[lo, hi]` on `‖E(x) − E(y)‖ / d_circle(x, y)`.
    ///
    /// Only the Fourier map has one: `lo = 4/√K` from the first harmonic and
    /// `hi = 2π √(Σ k² / K)` from the derivative, with `K = D/2`.
    pub fn lipschitz_bracket(&self) -> Option<(f64, f64)> {
        match *self {
            EmbeddingSpec::Fourier { dim } => {
                let k = (dim / 2) as f64;
                let sum_sq: f64 = (1..=dim / 2).map(|j| (j * j) as f64).sum();
                Some((4.0 / k.sqrt(), 2.0 * PI * (sum_sq / k).sqrt()))
            }
            _ => None,
        }
    }

    pub fn embed_point(&self, x: &Point) -> Result<Point> {
        self.validate()?;
        match (*self, x) {
            (EmbeddingSpec::Identity, _) => Ok(x.clone()),
            (EmbeddingSpec::Fourier { dim }, Point::Coords(c)) if c.len() == 1 => {
                let scale = Self::fourier_scale(dim);
                let mut out = Vec::with_capacity(dim);
                for k in 1..=dim / 2 {
                    let arg = 2.0 * PI * k as f64 * c[0];
                    out.push(arg.cos() * scale);
                    out.push(arg.sin() * scale);
                }
                Ok(Point::Coords(out))
            }
            (EmbeddingSpec::RasterRotation { with_scaling: false }, Point::Coords(c)) if !c.is_empty() => {
                Ok(Point::Coords(render_raster(c[0], 1.0)))
            }
            (EmbeddingSpec::RasterRotation { with_scaling: true }, Point::Coords(c)) if c.len() == 2 => {
                Ok(Point::Coords(render_raster(c[0], 0.75 + (2.0 * PI * c[1]).cos() / 4.0)))
            }
            (emb, p) => Err(Error::VariantMismatch(format!(
                "embedding {emb:?} cannot take phase point of kind {:?}",
                p.kind()
            ))),
        }
    }
}

/// Pointwise embedding of a phase path.
pub fn embed(emb: &EmbeddingSpec, phase: &SamplePath) -> Result<SamplePath> {
    let pts = phase
        .points()
        .iter()
        .map(|p| emb.embed_point(p))
        .collect::<Result<Vec<_>>>()?;
    SamplePath::new(pts)
}

fn template_at(r: isize, c: isize) -> f64 {
    if r < 0 || c < 0 || r >= RASTER_SIDE as isize || c >= RASTER_SIDE as isize {
        0.0
    } else {
        RASTER_TEMPLATE[r as usize][c as usize]
    }
}

fn bilinear(row: f64, col: f64) -> f64 {
    let (r0, c0) = (row.floor(), col.floor());
    let (fr, fc) = (row - r0, col - c0);
    let (r0, c0) = (r0 as isize, c0 as isize);
    template_at(r0, c0) * (1.0 - fr) * (1.0 - fc)
        + template_at(r0, c0 + 1) * (1.0 - fr) * fc
        + template_at(r0 + 1, c0) * fr * (1.0 - fc)
        + template_at(r0 + 1, c0 + 1) * fr * fc
}

/// Renders the template rotated by `2π·turn` and scaled by `scale` about the
/// grid centre, then mean-centres and normalises to norm 1/2.
fn render_raster(turn: f64, scale: f64) -> Vec<f64> {
    let centre = (RASTER_SIDE as f64 - 1.0) / 2.0;
    let (sin, cos) = (2.0 * PI * turn).sin_cos();
    let mut img = Vec::with_capacity(RASTER_SIDE * RASTER_SIDE);
    for r in 0..RASTER_SIDE {
        for c in 0..RASTER_SIDE {
            let (u, v) = (c as f64 - centre, r as f64 - centre);
            // Inverse map from output pixel to template coordinates.
            let su = (cos * u + sin * v) / scale;
            let sv = (-sin * u + cos * v) / scale;
            img.push(bilinear(sv + centre, su + centre));
        }
    }
    let mean = img.iter().sum::<f64>() / img.len() as f64;
    for px in &mut img {
        *px -= mean;
    }
    let norm = img.iter().map(|v| v * v).sum::<f64>().sqrt();
    for px in &mut img {
        *px *= 0.5 / norm;
    }
    img
}

/// Largest observed `‖E(x) − E(y)‖ / d(x, y)` over `samples` random pairs
/// at phase separations below `0.01`, with `d` the circle or torus metric.
pub fn empirical_lipschitz(emb: &EmbeddingSpec, space: Space, samples: usize, seed: u64) -> Result<f64> {
    if matches!(space, Space::Cycle { .. }) {
        return Err(Error::UnsupportedProcess("cycle phase space has no continuous metric".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let x = space.sample_uniform(&mut rng);
        let coords = x.coord_slice().unwrap_or(&[]).to_vec();
        let y: Vec<f64> = coords
            .iter()
            .map(|&v| (v + rng.random::<f64>() * 0.01).rem_euclid(1.0))
            .collect();
        let d = coords
            .iter()
            .zip(&y)
            .map(|(&a, &b)| circle_distance(a, b).powi(2))
            .sum::<f64>()
            .sqrt();
        if d == 0.0 {
            continue;
        }
        let ex = emb.embed_point(&x)?;
        let ey = emb.embed_point(&Point::Coords(y))?;
        let ratio = euclidean(ex.coord_slice().unwrap_or(&[]), ey.coord_slice().unwrap_or(&[])) / d;
        best = best.max(ratio);
    }
    Ok(best)
}

/// The invariant law pushed through an embedding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationaryLaw {
    pub space: Space,
    pub embedding: EmbeddingSpec,
}

impl StationaryLaw {
    pub fn new(kind: &ProcessKind, embedding: EmbeddingSpec) -> Self {
        StationaryLaw {
            space: kind.space(),
            embedding,
        }
    }
}

impl InvariantDistribution for StationaryLaw {
    fn finite_support(&self) -> Option<Vec<(Point, f64)>> {
        match (self.space, self.embedding) {
            (Space::Cycle { states }, EmbeddingSpec::Identity) => {
                let w = 1.0 / states as f64;
                Some((0..states).map(|s| (Point::Symbol(s), w)).collect())
            }
            _ => None,
        }
    }

    fn sample(&self, rng: &mut dyn RngCore) -> Point {
        let x = self.space.sample_uniform(rng);
        self.embedding
            .embed_point(&x)
            .expect("stationary law pairs a space with a compatible embedding")
    }
}
