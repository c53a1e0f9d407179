//! Fixtures shared by the benchmarks.

use pathgauge_core::geometry::SamplePath;
use pathgauge_core::processes::{embed, simulate, EmbeddingSpec, ProcessKind, ProcessSpec, Space, DEFAULT_ZETA, DEFAULT_ZETA2};

/// A torus rotation with resets, seen through the scaled raster embedding (D = 256).
pub fn raster_path(n: usize, reset: f64, seed: u64) -> SamplePath {
    let kind = ProcessKind::TorusRotation { zeta1: DEFAULT_ZETA, zeta2: DEFAULT_ZETA2, reset };
    let phase = simulate(&ProcessSpec::new(kind, seed), n).expect("valid process");
    embed(&EmbeddingSpec::RasterRotation { with_scaling: true }, &phase).expect("valid embedding")
}

/// An iid uniform sample on the circle, Fourier-embedded in `dim` coordinates.
pub fn fourier_iid_path(n: usize, dim: usize, seed: u64) -> SamplePath {
    let kind = ProcessKind::IidUniform { space: Space::Circle };
    let phase = simulate(&ProcessSpec::new(kind, seed), n).expect("valid process");
    embed(&EmbeddingSpec::Fourier { dim }, &phase).expect("valid embedding")
}
