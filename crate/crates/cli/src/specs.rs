//! Parsers for the compact `name:key=value,...` specifications used on the
//! command line.

use std::collections::BTreeMap;

use pathgauge_core::geometry::{BaseMetric, GaugeSpec};
use pathgauge_core::processes::{EmbeddingSpec, ProcessKind, Space, DEFAULT_ZETA, DEFAULT_ZETA2};
use pathgauge_core::verify::BernoulliChain;

/// Argument errors detected before any computation.
#[derive(Debug, Clone, PartialEq)]
pub struct ArgError(pub String);

impl std::fmt::Display for ArgError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

type Result<T> = std::result::Result<T, ArgError>;

pub fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ArgError(msg.into()))
}

struct Params {
    spec: String,
    values: BTreeMap<String, String>,
}

impl Params {
    fn new(spec: &str, rest: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let Some((k, v)) = item.split_once('=') else {
                return err(format!("`{spec}`: expected key=value, got `{item}`"));
            };
            if values.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return err(format!("`{spec}`: key `{k}` given twice"));
            }
        }
        Ok(Params { spec: spec.to_string(), values })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.values.remove(key)
    }

    fn real(&mut self, key: &str, default: Option<f64>) -> Result<f64> {
        match (self.take(key), default) {
            (Some(v), _) => v
                .parse()
                .map_err(|_| ArgError(format!("`{}`: `{key}` must be a real number, got `{v}`", self.spec))),
            (None, Some(d)) => Ok(d),
            (None, None) => err(format!("`{}`: missing `{key}`", self.spec)),
        }
    }

    fn integer(&mut self, key: &str, default: Option<u64>) -> Result<u64> {
        match (self.take(key), default) {
            (Some(v), _) => v
                .parse()
                .map_err(|_| ArgError(format!("`{}`: `{key}` must be a nonnegative integer, got `{v}`", self.spec))),
            (None, Some(d)) => Ok(d),
            (None, None) => err(format!("`{}`: missing `{key}`", self.spec)),
        }
    }

    fn finish<T>(self, value: T) -> Result<T> {
        match self.values.keys().next() {
            Some(k) => err(format!("`{}`: unknown key `{k}`", self.spec)),
            None => Ok(value),
        }
    }
}

fn split(spec: &str) -> (String, &str) {
    match spec.split_once(':') {
        Some((name, rest)) => (name.trim().to_ascii_lowercase(), rest),
        None => (spec.trim().to_ascii_lowercase(), ""),
    }
}

/// `cycle:states=N,p=P`, `circle:zeta=Z,p=P`, `torus:zeta1=Z1,zeta2=Z2,p=P`,
/// `iid:space=circle|torus|cycle[,states=N]`.
pub fn parse_process(spec: &str) -> Result<ProcessKind> {
    let (name, rest) = split(spec);
    let mut p = Params::new(spec, rest)?;
    let kind = match name.as_str() {
        "cycle" => ProcessKind::CycleChain {
            states: p.integer("states", None)?,
            reset: p.real("p", None)?,
        },
        "circle" => ProcessKind::CircleRotation {
            zeta: p.real("zeta", Some(DEFAULT_ZETA))?,
            reset: p.real("p", None)?,
        },
        "torus" => ProcessKind::TorusRotation {
            zeta1: p.real("zeta1", Some(DEFAULT_ZETA))?,
            zeta2: p.real("zeta2", Some(DEFAULT_ZETA2))?,
            reset: p.real("p", None)?,
        },
        "iid" => {
            let space = match p.take("space").as_deref() {
                Some("circle") | None => Space::Circle,
                Some("torus") => Space::Torus,
                Some("cycle") => Space::Cycle { states: p.integer("states", None)? },
                Some(other) => return err(format!("`{spec}`: unknown space `{other}`")),
            };
            ProcessKind::IidUniform { space }
        }
        other => return err(format!("unknown process `{other}` (expected cycle, circle, torus or iid)")),
    };
    p.finish(kind)
}

/// `identity`, `fourier:dim=D`, `raster`, `raster-scaled`.
pub fn parse_embedding(spec: &str) -> Result<EmbeddingSpec> {
    let (name, rest) = split(spec);
    let mut p = Params::new(spec, rest)?;
    let emb = match name.as_str() {
        "identity" => EmbeddingSpec::Identity,
        "fourier" => EmbeddingSpec::Fourier { dim: p.integer("dim", None)? as usize },
        "raster" => EmbeddingSpec::RasterRotation { with_scaling: false },
        "raster-scaled" => EmbeddingSpec::RasterRotation { with_scaling: true },
        other => return err(format!("unknown embedding `{other}` (expected identity, fourier, raster or raster-scaled)")),
    };
    p.finish(emb)
}

/// `lipschitz:L=1[,metric=euclidean|discrete]`, `regression:L=1`, `hinge:L=1`,
/// `smooth:gamma=G,lambda=M`, `local-lipschitz:r0=R`, `local-smooth:c=C`, `discrete`.
pub fn parse_gauge(spec: &str) -> Result<GaugeSpec> {
    let (name, rest) = split(spec);
    let mut p = Params::new(spec, rest)?;
    let gauge = match name.as_str() {
        "lipschitz" => {
            let l = p.real("L", Some(1.0))?;
            let metric = match p.take("metric").as_deref() {
                None | Some("euclidean") => BaseMetric::Euclidean,
                Some("discrete") => BaseMetric::Discrete,
                Some(other) => return err(format!("`{spec}`: unknown metric `{other}`")),
            };
            GaugeSpec::Lipschitz { l, metric }
        }
        "regression" => GaugeSpec::Regression { l: p.real("L", Some(1.0))? },
        "hinge" => GaugeSpec::HingeClassification { l: p.real("L", Some(1.0))? },
        "smooth" => GaugeSpec::Smooth {
            gamma: p.real("gamma", None)?,
            lambda: p.real("lambda", Some(1.0))?,
        },
        "local-lipschitz" => GaugeSpec::LocalLipschitzTruncated { r0: p.real("r0", None)? },
        "local-smooth" => GaugeSpec::LocalSmooth { c: p.real("c", None)? },
        "discrete" => GaugeSpec::Discrete,
        other => return err(format!("unknown gauge `{other}`")),
    };
    p.finish(gauge)
}

/// `iid:q=Q` or `markov:p01=A,p10=B,q0=Q0,q1=Q1`.
pub fn parse_chain(spec: &str) -> Result<BernoulliChain> {
    let (name, rest) = split(spec);
    let mut p = Params::new(spec, rest)?;
    let chain = match name.as_str() {
        "iid" => BernoulliChain::Iid { q: p.real("q", None)? },
        "markov" => {
            let a = p.real("p01", None)?;
            let b = p.real("p10", None)?;
            BernoulliChain::MarkovModulated {
                transition: [[1.0 - a, a], [b, 1.0 - b]],
                q: [p.real("q0", None)?, p.real("q1", None)?],
            }
        }
        other => return err(format!("unknown chain `{other}` (expected iid or markov)")),
    };
    p.finish(chain)
}

pub fn parse_list<T: std::str::FromStr>(name: &str, text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| ArgError(format!("--{name}: cannot parse `{s}`"))))
        .collect()
}
