//! Numerical geometry of marginally trapped submanifolds.
//!
//! A codimension-2 space-like immersion `f : Σⁿ → M` into a Lorentzian
//! manifold is *marginally trapped* when its normal bundle carries a null
//! section ℓ₊ with ⟨ℓ₊, H⟩ ≡ 0, where H is the mean curvature vector.
//! Such immersions sit inside the null hypersurface swept by the light-like
//! geodesics t ↦ exp_{f(x)}(t ℓ₊(x)), and — when the ambient space satisfies
//! the null energy condition — they maximize volume among nearby
//! hypersurfaces of that sweep.
//!
//! This crate verifies that picture numerically, at desk scale:
//!
//! * [`ambient`] — local Lorentzian charts: metric, Christoffel symbols,
//!   curvature, Ricci, geodesic integration, and a pointwise null energy
//!   condition check.
//! * [`immersion`] — parametric space-like immersions: tangent frames,
//!   induced metric, second fundamental form, mean curvature vector, and
//!   volume by tensor Gauss–Legendre quadrature.
//! * [`nullframe`] — the null normal frame (ℓ₊, ℓ₋), null expansions θ±,
//!   shape operators A±, the marginally-trapped test, and the light-cone
//!   dual map.
//! * [`variation`] — deformations of an immersion, finite-difference
//!   derivatives of Vol(t), and the analytic first/second variation
//!   formulas with per-term breakdown.
//! * [`nullspace`] — the null-geodesic sweep Φ(t,x), its degeneracy
//!   diagnostics and focal values, inversion of inner reparametrizations,
//!   and the volume-maximality property suite.
//! * [`catalog`] — closed-form builders for the example families together
//!   with their expected facts.
//! * [`report`] — the batch driver behind the `trapvol` binary: run
//!   configuration, machine-readable reports, CSV curve output.
//!
//! Everything is pure and deterministic: grid reductions happen in a fixed
//! order, random families are seeded, and a given configuration always
//! produces byte-identical reports.

pub mod ambient;
pub mod catalog;
pub mod error;
pub mod fields;
pub mod immersion;
pub mod jet;
pub mod nullframe;
pub mod nullspace;
pub mod quad;
pub mod report;
pub mod tensor;
pub mod variation;

pub use error::GeomError;

/// Ambient vectors and points in chart coordinates.
pub type AVec = nalgebra::DVector<f64>;
/// Dense square matrices (metrics, Gram matrices, shape operators).
pub type AMat = nalgebra::DMatrix<f64>;

/// `|a - b| ≤ tol · max(|a|, |b|, floor)` — relative comparison with an
/// absolute fallback for values that are themselves at noise level.
pub fn close_rel(a: f64, b: f64, rel: f64, floor: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(floor)
}
