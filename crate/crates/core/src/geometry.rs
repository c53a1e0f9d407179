//! Point spaces, gauge functions and their paired Φ rules.
//!
//! A gauge pair `(g, Φ)` for a loss class `F` satisfies
//!
//! ```text
//! f(y) ≤ g(y, x) + Φ(f, x)      for all x, y and f ∈ F
//! ```
//!
//! with `g(x, y) = 0` iff `x = y`. Every gauge here except [`GaugeSpec::Regression`]
//! is a nondecreasing transform of a base metric, which is what lets the
//! nearest-neighbour kernels in [`crate::nnindex`] minimise over metric
//! distances and apply the transform once afterwards.
//!
//! The local-smoothness gauge uses `ρ(r) = c(1 + r²)` with exponent `q = 2`:
//!
//! ```text
//! g(y, x) = ½ (c (1 + d²))² d²,   d = ‖y − x‖
//! ```
//!
//! A variant of this formula with `(1 + d)²` in place of `(1 + d²)` is
//! sometimes quoted; it does not follow from `g = (ρ(d) d)^q / q` and is not
//! implemented.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_positive, Error, Result};

/// One observation `X_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Point {
    /// Dense real coordinates.
    Coords(Vec<f64>),
    /// A discrete state.
    Symbol(u64),
    /// Input coordinates with a class label in `{-1, +1}`.
    Labeled { coords: Vec<f64>, label: i8 },
    /// Input coordinates with a real regression target.
    Paired { coords: Vec<f64>, target: f64 },
}

/// Variant and dimension shared by all points of a path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointKind {
    Coords(usize),
    Symbol,
    Labeled(usize),
    Paired(usize),
}

impl PointKind {
    pub fn dim(self) -> usize {
        match self {
            PointKind::Coords(d) | PointKind::Labeled(d) | PointKind::Paired(d) => d,
            PointKind::Symbol => 1,
        }
    }

    fn describe(self) -> String {
        match self {
            PointKind::Coords(d) => format!("coords(D={d})"),
            PointKind::Symbol => "symbol".to_string(),
            PointKind::Labeled(d) => format!("labeled(D={d})"),
            PointKind::Paired(d) => format!("paired(D={d})"),
        }
    }
}

impl Point {
    pub fn coords(c: impl Into<Vec<f64>>) -> Self {
        Point::Coords(c.into())
    }

    pub fn kind(&self) -> PointKind {
        match self {
            Point::Coords(c) => PointKind::Coords(c.len()),
            Point::Symbol(_) => PointKind::Symbol,
            Point::Labeled { coords, .. } => PointKind::Labeled(coords.len()),
            Point::Paired { coords, .. } => PointKind::Paired(coords.len()),
        }
    }

    /// Coordinate slice, if the variant carries one.
    pub fn coord_slice(&self) -> Option<&[f64]> {
        match self {
            Point::Coords(c) => Some(c),
            Point::Labeled { coords, .. } | Point::Paired { coords, .. } => Some(coords),
            Point::Symbol(_) => None,
        }
    }

    pub fn label(&self) -> Option<i8> {
        match self {
            Point::Labeled { label, .. } => Some(*label),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let finite = |c: &[f64]| c.iter().all(|v| v.is_finite());
        match self {
            Point::Coords(c) => {
                if c.is_empty() {
                    return Err(Error::InvalidPoint("coordinate dimension must be at least 1".into()));
                }
                if !finite(c) {
                    return Err(Error::InvalidPoint("non-finite coordinate".into()));
                }
            }
            Point::Symbol(_) => {}
            Point::Labeled { coords, label } => {
                if coords.is_empty() || !finite(coords) {
                    return Err(Error::InvalidPoint("labeled point needs finite coordinates".into()));
                }
                if *label != 1 && *label != -1 {
                    return Err(Error::InvalidPoint(format!("label must be -1 or +1, got {label}")));
                }
            }
            Point::Paired { coords, target } => {
                if coords.is_empty() || !finite(coords) || !target.is_finite() {
                    return Err(Error::InvalidPoint("paired point needs finite coordinates and target".into()));
                }
            }
        }
        Ok(())
    }
}

/// The observed trajectory `X_1, …, X_n`. All points share one [`PointKind`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplePath {
    points: Vec<Point>,
    kind: PointKind,
}

impl SamplePath {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::param("path", "a sample path needs at least one point"))?;
        let kind = first.kind();
        for p in &points {
            p.validate()?;
            let k = p.kind();
            if k != kind {
                return Err(mismatch(kind, k));
            }
        }
        Ok(SamplePath { points, kind })
    }

    /// One-dimensional coordinate path, convenient for tests and examples.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Point::Coords(vec![v])).collect())
    }

    pub fn from_symbols(symbols: &[u64]) -> Result<Self> {
        Self::new(symbols.iter().map(|&s| Point::Symbol(s)).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn kind(&self) -> PointKind {
        self.kind
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &Point {
        &self.points[i]
    }

    /// The first `m` points (`1 ≤ m ≤ len`).
    pub fn prefix(&self, m: usize) -> Result<SamplePath> {
        if m == 0 || m > self.len() {
            return Err(Error::param("m", format!("prefix length must lie in 1..={}", self.len())));
        }
        Ok(SamplePath {
            points: self.points[..m].to_vec(),
            kind: self.kind,
        })
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }
}

fn mismatch(expected: PointKind, got: PointKind) -> Error {
    let (de, dg) = (expected.dim(), got.dim());
    if std::mem::discriminant(&expected) == std::mem::discriminant(&got) && de != dg {
        Error::DimensionMismatch { expected: de, got: dg }
    } else {
        Error::VariantMismatch(format!("expected {}, got {}", expected.describe(), got.describe()))
    }
}

/// Euclidean distance with a fixed summation order.
///
/// Both the naive and the indexed prefix kernels call this function, so the
/// two backends produce bit-identical minima.
#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

/// The metric underlying a metric-transform gauge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseMetric {
    Euclidean,
    /// `d(y, x) = 1` iff `y ≠ x`.
    Discrete,
}

impl BaseMetric {
    pub fn distance(self, y: &Point, x: &Point) -> f64 {
        match self {
            BaseMetric::Discrete => {
                if y == x {
                    0.0
                } else {
                    1.0
                }
            }
            BaseMetric::Euclidean => match (y.coord_slice(), x.coord_slice()) {
                (Some(a), Some(b)) => euclidean(a, b),
                // Symbols carry no coordinates; `check_kind` rejects this pairing.
                _ => f64::NAN,
            },
        }
    }
}

/// Tagged description of a gauge `g` together with its Φ rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GaugeSpec {
    /// `g = L·d`, `Φ(f, x) = f(x)`.
    Lipschitz { l: f64, metric: BaseMetric },
    /// `g((y,y'),(x,x')) = L·d(y,x) + |y' − x'|`, `Φ(f, x) = f(x)`.
    Regression { l: f64 },
    /// `g = L·d` on equal labels and `+∞` otherwise, `Φ(f, x) = f(x)`.
    HingeClassification { l: f64 },
    /// `g = (1+λ)(γ/2)‖y−x‖²`, `Φ(f, x) = (1 + 1/λ) f(x)`.
    Smooth { gamma: f64, lambda: f64 },
    /// `g = d` if `d ≤ r₀` else `+∞`, `Φ(f, x) = f(x) + L(f,x,r₀)²/2`.
    LocalLipschitzTruncated { r0: f64 },
    /// `g = ½(c(1+d²))²d²`, `Φ(f, x) = f(x) + (‖f'(x)‖ + γ(f,x)/4)²/(2c)`.
    LocalSmooth { c: f64 },
    /// `g = 1` iff `y ≠ x`, `Φ(f, x) = f(x)`.
    Discrete,
}

/// How a gauge factors through a metric: `g(y, x) = transform(d(y, x))`,
/// optionally `+∞` across different labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MetricForm {
    pub metric: BaseMetric,
    pub by_label: bool,
}

impl GaugeSpec {
    pub fn lipschitz(l: f64) -> Self {
        GaugeSpec::Lipschitz {
            l,
            metric: BaseMetric::Euclidean,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            GaugeSpec::Lipschitz { l, .. }
            | GaugeSpec::Regression { l }
            | GaugeSpec::HingeClassification { l } => ensure_positive("L", l),
            GaugeSpec::Smooth { gamma, lambda } => {
                ensure_positive("gamma", gamma)?;
                ensure_positive("lambda", lambda)
            }
            GaugeSpec::LocalLipschitzTruncated { r0 } => ensure_positive("r0", r0),
            GaugeSpec::LocalSmooth { c } => ensure_positive("c", c),
            GaugeSpec::Discrete => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GaugeSpec::Lipschitz { .. } => "lipschitz",
            GaugeSpec::Regression { .. } => "regression",
            GaugeSpec::HingeClassification { .. } => "hinge",
            GaugeSpec::Smooth { .. } => "smooth",
            GaugeSpec::LocalLipschitzTruncated { .. } => "local_lipschitz",
            GaugeSpec::LocalSmooth { .. } => "local_smooth",
            GaugeSpec::Discrete => "discrete",
        }
    }

    /// `false` for gauges that take the value `+∞`; those support only the
    /// thresholded (probability-of-excess-loss) bound.
    pub fn is_finite_valued(&self) -> bool {
        !matches!(
            self,
            GaugeSpec::HingeClassification { .. } | GaugeSpec::LocalLipschitzTruncated { .. }
        )
    }

    pub fn metric_form(&self) -> Option<MetricForm> {
        let euclid = |by_label| {
            Some(MetricForm {
                metric: BaseMetric::Euclidean,
                by_label,
            })
        };
        match self {
            GaugeSpec::Lipschitz { metric, .. } => Some(MetricForm {
                metric: *metric,
                by_label: false,
            }),
            GaugeSpec::Regression { .. } => None,
            GaugeSpec::HingeClassification { .. } => euclid(true),
            GaugeSpec::Smooth { .. }
            | GaugeSpec::LocalLipschitzTruncated { .. }
            | GaugeSpec::LocalSmooth { .. } => euclid(false),
            GaugeSpec::Discrete => Some(MetricForm {
                metric: BaseMetric::Discrete,
                by_label: false,
            }),
        }
    }

    /// Nondecreasing map from base-metric distance to gauge value.
    ///
    /// Only meaningful when [`metric_form`](Self::metric_form) is `Some`.
    #[inline]
    pub fn transform(&self, d: f64) -> f64 {
        match *self {
            GaugeSpec::Lipschitz { l, .. } | GaugeSpec::HingeClassification { l } => l * d,
            GaugeSpec::Smooth { gamma, lambda } => (1.0 + lambda) * (gamma * 0.5) * (d * d),
            GaugeSpec::LocalLipschitzTruncated { r0 } => {
                if d <= r0 {
                    d
                } else {
                    f64::INFINITY
                }
            }
            GaugeSpec::LocalSmooth { c } => {
                let rho = c * (1.0 + d * d);
                0.5 * (rho * rho) * (d * d)
            }
            GaugeSpec::Discrete => d,
            GaugeSpec::Regression { l } => l * d,
        }
    }

    /// Rejects point kinds this gauge is not defined on.
    pub fn check_kind(&self, kind: PointKind) -> Result<()> {
        let ok = matches!(
            (self, kind),
            (GaugeSpec::Lipschitz { metric: BaseMetric::Discrete, .. }, _)
                | (GaugeSpec::Discrete, _)
                | (GaugeSpec::Regression { .. }, PointKind::Paired(_))
                | (GaugeSpec::HingeClassification { .. }, PointKind::Labeled(_))
                | (GaugeSpec::Lipschitz { .. }, PointKind::Coords(_))
                | (GaugeSpec::Smooth { .. }, PointKind::Coords(_))
                | (GaugeSpec::LocalLipschitzTruncated { .. }, PointKind::Coords(_))
                | (GaugeSpec::LocalSmooth { .. }, PointKind::Coords(_))
        );
        if ok {
            Ok(())
        } else {
            Err(Error::VariantMismatch(format!(
                "gauge `{}` is not defined on {} points",
                self.name(),
                kind.describe()
            )))
        }
    }

    /// `g(y, x)` without kind checks; callers validate once per path.
    #[inline]
    pub(crate) fn eval_unchecked(&self, y: &Point, x: &Point) -> f64 {
        match (self, self.metric_form()) {
            (GaugeSpec::Regression { l }, _) => match (y, x) {
                (
                    Point::Paired { coords: a, target: ta },
                    Point::Paired { coords: b, target: tb },
                ) => l * euclidean(a, b) + (ta - tb).abs(),
                _ => f64::NAN,
            },
            (_, Some(form)) => {
                if form.by_label && y.label() != x.label() {
                    return f64::INFINITY;
                }
                self.transform(form.metric.distance(y, x))
            }
            (_, None) => unreachable!("only Regression lacks a metric form"),
        }
    }
}

/// Evaluates `g(y, x)`, an extended nonnegative real.
pub fn eval_gauge(gauge: &GaugeSpec, y: &Point, x: &Point) -> Result<f64> {
    gauge.validate()?;
    y.validate()?;
    x.validate()?;
    let (ky, kx) = (y.kind(), x.kind());
    if ky != kx {
        return Err(mismatch(ky, kx));
    }
    gauge.check_kind(ky)?;
    Ok(gauge.eval_unchecked(y, x))
}

/// Function-dependent quantities observed at the sample points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FunctionSample {
    /// `f(X_i) ≥ 0`.
    pub values: Vec<f64>,
    /// `‖f'(X_i)‖`.
    pub grad_norms: Option<Vec<f64>>,
    /// `γ(f, X_i)`.
    pub local_smoothness: Option<Vec<f64>>,
    /// `L(f, X_i, r₀)`.
    pub local_lipschitz: Option<Vec<f64>>,
}

impl FunctionSample {
    pub fn new(values: Vec<f64>) -> Self {
        FunctionSample {
            values,
            ..Default::default()
        }
    }

    pub fn with_grad_norms(mut self, v: Vec<f64>) -> Self {
        self.grad_norms = Some(v);
        self
    }

    pub fn with_local_smoothness(mut self, v: Vec<f64>) -> Self {
        self.local_smoothness = Some(v);
        self
    }

    pub fn with_local_lipschitz(mut self, v: Vec<f64>) -> Self {
        self.local_lipschitz = Some(v);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Checks array lengths against the path length and entry signs.
    pub fn validate(&self, n: usize) -> Result<()> {
        let arrays = [
            ("values", Some(&self.values)),
            ("grad_norms", self.grad_norms.as_ref()),
            ("local_smoothness", self.local_smoothness.as_ref()),
            ("local_lipschitz", self.local_lipschitz.as_ref()),
        ];
        for (name, arr) in arrays {
            let Some(arr) = arr else { continue };
            if arr.len() != n {
                return Err(Error::param(name, format!("length {} differs from path length {n}", arr.len())));
            }
            if let Some(v) = arr.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(Error::param(name, format!("entries must be finite and nonnegative, found {v}")));
            }
        }
        Ok(())
    }
}

/// Evaluates `Φ(f, X_i)` for the gauge's paired rule.
pub fn eval_phi(gauge: &GaugeSpec, fs: &FunctionSample, i: usize) -> Result<f64> {
    gauge.validate()?;
    let value = *fs
        .values
        .get(i)
        .ok_or_else(|| Error::param("i", format!("index {i} out of range for {} values", fs.len())))?;
    if !(value.is_finite() && value >= 0.0) {
        return Err(Error::param("values", format!("f(X_{i}) must be finite and nonnegative, got {value}")));
    }
    let entry = |arr: &Option<Vec<f64>>, name: &'static str| -> Result<f64> {
        let arr = arr.as_ref().ok_or(Error::MissingFunctionData(name))?;
        let v = *arr
            .get(i)
            .ok_or_else(|| Error::param(name, format!("index {i} out of range")))?;
        if v.is_finite() && v >= 0.0 {
            Ok(v)
        } else {
            Err(Error::param(name, format!("entries must be finite and nonnegative, got {v}")))
        }
    };
    match *gauge {
        GaugeSpec::Lipschitz { .. }
        | GaugeSpec::Regression { .. }
        | GaugeSpec::HingeClassification { .. }
        | GaugeSpec::Discrete => Ok(value),
        GaugeSpec::Smooth { lambda, .. } => Ok((1.0 + 1.0 / lambda) * value),
        GaugeSpec::LocalLipschitzTruncated { .. } => {
            let lip = entry(&fs.local_lipschitz, "local_lipschitz")?;
            Ok(value + lip * lip / 2.0)
        }
        GaugeSpec::LocalSmooth { c } => {
            let grad = entry(&fs.grad_norms, "grad_norms")?;
            let smooth = entry(&fs.local_smoothness, "local_smoothness")?;
            // A nonnegative differentiable f has a minimum wherever it vanishes.
            if value == 0.0 && grad != 0.0 {
                return Err(Error::param(
                    "grad_norms",
                    format!("f(X_{i}) = 0 forces f'(X_{i}) = 0, got gradient norm {grad}"),
                ));
            }
            let s = grad + smooth / 4.0;
            Ok(value + s * s / (2.0 * c))
        }
    }
}

/// `max_{x,y ∈ points} g(y, x)`; zero for a single point.
pub fn g_diameter(points: &[Point], gauge: &GaugeSpec) -> Result<f64> {
    let path = SamplePath::new(points.to_vec())?;
    gauge.validate()?;
    gauge.check_kind(path.kind())?;
    let mut diam: f64 = 0.0;
    for y in points {
        for x in points {
            diam = diam.max(gauge.eval_unchecked(y, x));
        }
    }
    Ok(diam)
}

/// A partition of a point list into parts of small g-diameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cover {
    pub parts: Vec<Vec<usize>>,
    /// `assignment[i]` is the part containing point `i`.
    pub assignment: Vec<usize>,
}

impl Cover {
    pub fn size(&self) -> usize {
        self.parts.len()
    }
}

/// Greedy upper estimate of the covering number `N(points, g, ε)`.
///
/// Parts are seeded in input order with the first uncovered point; a later
/// uncovered point joins the current part when its gauge to and from every
/// current member is at most `ε`, so each part has g-diameter `≤ ε`.
pub fn greedy_cover(points: &[Point], gauge: &GaugeSpec, eps: f64) -> Result<Cover> {
    ensure_positive("eps", eps)?;
    gauge.validate()?;
    let path = SamplePath::new(points.to_vec())?;
    gauge.check_kind(path.kind())?;

    let n = points.len();
    let mut assignment = vec![usize::MAX; n];
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for seed in 0..n {
        if assignment[seed] != usize::MAX {
            continue;
        }
        let id = parts.len();
        let mut members = vec![seed];
        assignment[seed] = id;
        for j in seed + 1..n {
            if assignment[j] != usize::MAX {
                continue;
            }
            let fits = members.iter().all(|&m| {
                gauge.eval_unchecked(&points[j], &points[m]) <= eps
                    && gauge.eval_unchecked(&points[m], &points[j]) <= eps
            });
            if fits {
                members.push(j);
                assignment[j] = id;
            }
        }
        parts.push(members);
    }
    Ok(Cover { parts, assignment })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[f64]) -> Point {
        Point::Coords(v.to_vec())
    }

    #[test]
    fn lipschitz_scales_euclidean_distance() {
        let g = GaugeSpec::lipschitz(2.0);
        assert_eq!(eval_gauge(&g, &c(&[0.0, 0.0]), &c(&[3.0, 4.0])).unwrap(), 10.0);
    }

    #[test]
    fn hinge_label_mismatch_is_infinite() {
        let g = GaugeSpec::HingeClassification { l: 1.0 };
        let y = Point::Labeled { coords: vec![0.5, 0.5], label: -1 };
        let x = Point::Labeled { coords: vec![0.5, 0.5], label: 1 };
        assert_eq!(eval_gauge(&g, &y, &x).unwrap(), f64::INFINITY);
        assert_eq!(eval_gauge(&g, &x, &x).unwrap(), 0.0);
    }

    #[test]
    fn every_variant_vanishes_on_the_diagonal() {
        let coords = c(&[0.3, -1.2]);
        let labeled = Point::Labeled { coords: vec![0.3, -1.2], label: 1 };
        let paired = Point::Paired { coords: vec![0.3], target: 4.0 };
        let cases: Vec<(GaugeSpec, Point)> = vec![
            (GaugeSpec::lipschitz(3.0), coords.clone()),
            (GaugeSpec::Lipschitz { l: 3.0, metric: BaseMetric::Discrete }, Point::Symbol(7)),
            (GaugeSpec::Regression { l: 2.0 }, paired),
            (GaugeSpec::HingeClassification { l: 2.0 }, labeled),
            (GaugeSpec::Smooth { gamma: 1.0, lambda: 0.5 }, coords.clone()),
            (GaugeSpec::LocalLipschitzTruncated { r0: 0.1 }, coords.clone()),
            (GaugeSpec::LocalSmooth { c: 2.0 }, coords.clone()),
            (GaugeSpec::Discrete, coords),
        ];
        for (g, p) in cases {
            assert_eq!(eval_gauge(&g, &p, &p).unwrap(), 0.0, "{g:?}");
        }
    }

    #[test]
    fn truncated_gauge_jumps_to_infinity_beyond_r0() {
        let g = GaugeSpec::LocalLipschitzTruncated { r0: 0.5 };
        assert_eq!(eval_gauge(&g, &c(&[0.0]), &c(&[0.5])).unwrap(), 0.5);
        assert_eq!(eval_gauge(&g, &c(&[0.0]), &c(&[0.51])).unwrap(), f64::INFINITY);
        assert!(!g.is_finite_valued());
    }

    #[test]
    fn regression_gauge_adds_target_gap() {
        let g = GaugeSpec::Regression { l: 2.0 };
        let y = Point::Paired { coords: vec![0.0, 0.0], target: 1.0 };
        let x = Point::Paired { coords: vec![3.0, 4.0], target: -0.5 };
        assert_eq!(eval_gauge(&g, &y, &x).unwrap(), 11.5);
    }

    #[test]
    fn mismatched_points_are_rejected() {
        let g = GaugeSpec::lipschitz(1.0);
        assert!(matches!(
            eval_gauge(&g, &c(&[0.0]), &c(&[0.0, 1.0])),
            Err(Error::DimensionMismatch { expected: 1, got: 2 })
        ));
        assert!(matches!(
            eval_gauge(&g, &c(&[0.0]), &Point::Symbol(0)),
            Err(Error::VariantMismatch(_))
        ));
        assert!(eval_gauge(&g, &Point::Symbol(1), &Point::Symbol(0)).is_err());
        assert!(eval_gauge(&GaugeSpec::lipschitz(-1.0), &c(&[0.0]), &c(&[1.0])).is_err());
    }

    #[test]
    fn phi_rules() {
        let fs = FunctionSample::new(vec![0.7, 0.5, 0.0])
            .with_grad_norms(vec![0.1, 0.0, 0.0])
            .with_local_smoothness(vec![0.0, 0.0, 0.8])
            .with_local_lipschitz(vec![2.0, 0.0, 0.0]);
        assert_eq!(eval_phi(&GaugeSpec::lipschitz(1.0), &fs, 0).unwrap(), 0.7);
        assert_eq!(eval_phi(&GaugeSpec::Smooth { gamma: 3.0, lambda: 1.0 }, &fs, 1).unwrap(), 1.0);
        // 0.7 + 2²/2
        let trunc = eval_phi(&GaugeSpec::LocalLipschitzTruncated { r0: 1.0 }, &fs, 0).unwrap();
        assert!((trunc - 2.7).abs() < 1e-15);
        // (1/(2c))(0 + 0.8/4)² with c = 1
        let ls = eval_phi(&GaugeSpec::LocalSmooth { c: 1.0 }, &fs, 2).unwrap();
        assert!((ls - 0.02).abs() < 1e-15, "{ls}");
    }

    #[test]
    fn phi_requires_the_arrays_its_gauge_needs() {
        let fs = FunctionSample::new(vec![0.0]);
        assert_eq!(
            eval_phi(&GaugeSpec::LocalSmooth { c: 1.0 }, &fs, 0),
            Err(Error::MissingFunctionData("grad_norms"))
        );
        assert_eq!(
            eval_phi(&GaugeSpec::LocalLipschitzTruncated { r0: 1.0 }, &fs, 0),
            Err(Error::MissingFunctionData("local_lipschitz"))
        );
        let bad = FunctionSample::new(vec![0.0])
            .with_grad_norms(vec![0.3])
            .with_local_smoothness(vec![1.0]);
        assert!(eval_phi(&GaugeSpec::LocalSmooth { c: 1.0 }, &bad, 0).is_err());
    }

    #[test]
    fn function_sample_validation() {
        let fs = FunctionSample::new(vec![0.1, 0.2]).with_grad_norms(vec![0.0]);
        assert!(fs.validate(2).is_err());
        assert!(FunctionSample::new(vec![0.1, -0.2]).validate(2).is_err());
        assert!(FunctionSample::new(vec![0.1, 0.2]).validate(2).is_ok());
    }

    #[test]
    fn greedy_cover_examples() {
        let g = GaugeSpec::lipschitz(1.0);
        let single = greedy_cover(&[c(&[1.0])], &g, 0.01).unwrap();
        assert_eq!(single.size(), 1);

        let symbols: Vec<Point> = (0..6).map(Point::Symbol).collect();
        assert_eq!(greedy_cover(&symbols, &GaugeSpec::Discrete, 0.5).unwrap().size(), 6);

        let line = [c(&[0.0]), c(&[0.5]), c(&[1.0])];
        let cover = greedy_cover(&line, &g, 0.6).unwrap();
        assert_eq!(cover.size(), 2);
        assert_eq!(cover.assignment, vec![0, 0, 1]);

        assert!(greedy_cover(&line, &g, 0.0).is_err());
    }

    #[test]
    fn diameter_of_a_segment() {
        let g = GaugeSpec::lipschitz(2.0);
        let pts = [c(&[0.0]), c(&[0.25]), c(&[1.0])];
        assert_eq!(g_diameter(&pts, &g).unwrap(), 2.0);
    }

    #[test]
    fn path_rejects_mixed_kinds_and_nan() {
        assert!(SamplePath::new(vec![c(&[0.0]), Point::Symbol(1)]).is_err());
        assert!(SamplePath::new(vec![c(&[f64::NAN])]).is_err());
        assert!(SamplePath::new(vec![]).is_err());
        assert!(SamplePath::new(vec![Point::Labeled { coords: vec![0.0], label: 0 }]).is_err());
    }
}
