use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("packet too narrow: sigma {sigma:.6e} < 3 dx = {min:.6e}")]
    PacketTooNarrow { sigma: f64, min: f64 },

    #[error("packet near boundary: center {center:.4} within {required:.4} of box edge")]
    PacketNearBoundary { center: f64, required: f64 },

    #[error("kernel under-resolved: width {sigma:.6e} < 3 dx = {min:.6e}")]
    KernelUnderResolved { sigma: f64, min: f64 },

    #[error("unsupported derivative order {order} (orders 0..=2 per term)")]
    UnsupportedDerivativeOrder { order: u8 },

    #[error("point {coordinate:.4} outside the guard band (|x| <= {limit:.4})")]
    OutOfBox { coordinate: f64, limit: f64 },

    #[error("time grid is not uniform (step spread {spread:.3e})")]
    NonUniformTimeGrid { spread: f64 },

    #[error("tangent frame degenerate: vector norm {norm:.3e} below 1e-6")]
    FrameDegenerate { norm: f64 },

    #[error("linear-approximation gate failed: ratio {ratio:.3e} > {threshold:.1e}")]
    LinearityGateFailed { ratio: f64, threshold: f64 },

    #[error("time step too large: phase advance {phase:.3} rad/step exceeds {limit}")]
    PhaseStepTooLarge { phase: f64, limit: f64 },

    #[error("boundary leak at step {step}: shell mass {mass:.3e} > {limit:.1e}")]
    BoundaryLeak { step: usize, mass: f64, limit: f64 },

    #[error("state is entangled: Schmidt number {schmidt:.6} > 1")]
    EntangledState { schmidt: f64 },

    #[error("spectral tail {fraction:.3e} of peak: input not band-limited")]
    SpectralTail { fraction: f64 },

    #[error("diagnostic stride too coarse for finite differences")]
    StrideTooCoarse,

    #[error("integration unstable: non-finite value at step {step}")]
    StepInstability { step: usize },

    #[error("probe under-resolved: sigma {sigma:.6e} < 3 dx = {min:.6e}")]
    ProbeUnderResolved { sigma: f64, min: f64 },

    #[error("separation {separation:.4} exceeds the overlap-precision limit {limit:.4}")]
    SeparationTooLarge { separation: f64, limit: f64 },

    #[error("operator is not self-adjoint")]
    NotSelfAdjoint,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
