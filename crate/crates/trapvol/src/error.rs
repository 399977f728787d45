//! Error type shared by every geometric operation.
//!
//! All failures are fail-fast: operations refuse to extrapolate outside a
//! chart's domain box, and degenerate data (non-space-like nodes, singular
//! metrics, non-Lorentzian normal planes) aborts the run with the offending
//! point attached instead of silently corrupting downstream formulas.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("point {point:?} is outside the chart domain (required margin {margin})")]
    OutsideDomain { point: Vec<f64>, margin: f64 },

    #[error("metric matrix is singular at {point:?}")]
    SingularMetric { point: Vec<f64> },

    #[error("metric does not have Lorentzian signature (-,+,...,+) at {point:?}")]
    BadSignature { point: Vec<f64> },

    #[error("induced metric is not positive definite at parameter point {node:?}: immersion is not space-like there")]
    NotSpacelike { node: Vec<f64> },

    #[error("differential is rank deficient at parameter point {node:?}")]
    RankDeficient { node: Vec<f64> },

    #[error("normal plane is not Lorentzian at parameter point {node:?} (normal Gram determinant {det})")]
    NormalPlaneNotLorentzian { node: Vec<f64>, det: f64 },

    #[error("mean curvature vector is not null at {node:?} (<H,H> = {pairing}) though a marginally trapped frame was requested")]
    MeanCurvatureNotNull { node: Vec<f64>, pairing: f64 },

    #[error("geodesic left the chart domain near {position:?}")]
    GeodesicDomainExit { position: Vec<f64> },

    #[error("geodesic integrator step size underflow (requested {steps} steps)")]
    StepUnderflow { steps: usize },

    #[error("geodesic velocity norm drifted by {drift:e}, beyond tolerance {tol:e}")]
    IntegratorDrift { drift: f64, tol: f64 },

    #[error("second-order derivative data is not available for this immersion (first-order deformation output)")]
    DerivativeOrderUnavailable,

    #[error("intrinsic curvature needs a constant-coefficient ambient metric")]
    IntrinsicCurvatureUnsupported,

    #[error("dual map linear system is singular at parameter point {node:?}")]
    DualMapSingular { node: Vec<f64> },

    #[error("Newton inversion diverged at s = {s} near {node:?}; shrink the inner variation range")]
    NewtonDiverged { s: f64, node: Vec<f64> },

    #[error("inner reparametrization Jacobian determinant {det:e} fell below threshold {threshold:e} at s = {s}")]
    JacobianDegenerate { s: f64, det: f64, threshold: f64 },

    #[error("operation requires a characteristic variation")]
    NotCharacteristic,

    #[error("unknown example id `{0}`")]
    UnknownExample(String),

    #[error("unknown chart `{0}`")]
    UnknownChart(String),

    #[error("bad run configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GeomError>;
