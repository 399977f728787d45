//! Closed-form builders for the marginally trapped example families.
//!
//! Every builder returns the chart, the immersion, the prescribed null
//! frame, and a list of expected facts, each checkable by an existing
//! operation at a stated tolerance. Hyperbolic and de Sitter hypersurfaces
//! are realized directly as immersions into Minkowski R⁴₁ through the
//! quadrics, so no intrinsic model of those spaces is needed.
//!
//! Catalog ids, in report order:
//!
//! * `lightcone-flat` — flat cylinder cut of the light cone,
//!   p(u,v) = (cosh u, sinh u, cos v, sin v). Induced metric is the
//!   identity, the dual map is q = −(cosh u, sinh u, −cos v, −sin v)/2, and
//!   A₊ = diag(1/2, −1/2), so the null-sweep focal values sit at t = ±2 and
//!   second variations are strictly negative.
//! * `lightcone-parabolic` — flat parabolic cut
//!   p(u,v) = ((1+u²+v²)/2, u, v, (u²+v²−1)/2) over a box away from the
//!   projection pole. Same flat induced metric, but the dual map is the
//!   constant null vector (−1,0,0,−1) and A₊ ≡ 0: the degenerate control
//!   among the light-cone cuts.
//! * `euclid-minimal-catenoid` — (0, catenoid) ⊂ R⁴₁ with ℓ± = (1, ±ν);
//!   H = 0, so the marginal frame is a prescription, not forced by H.
//! * `zmc-plane` — the trivial space-like plane (0, u, v, 0) with
//!   ℓ± = (1, 0, 0, ±1). A zero mean curvature graph in R³₁ would slot in
//!   here; only the plane ships.
//! * `horosphere` — {x ∈ H³ : ⟨x, w⟩ = −1} for w = (1,0,0,1), parametrized
//!   as (1 + s/2, u, v, s/2) with s = u² + v²; H = 2ℓ₊ with the constant
//!   ℓ₊ = w and A₊ = 0 (degenerate maximizer).
//! * `desitter-flat-slice` — {x ∈ S³₁ : ⟨x, w⟩ = 1} parametrized as
//!   (−s/2, u, v, 1 − s/2); H = 2ℓ₊ with ℓ₊ = −w.
//! * `ppwave-slice` — totally geodesic slice (x,y) ↦ (0, 0, x, y) of the
//!   `ppwave(-1)` chart with ℓ₊ = ∂u − (H/2)∂v; II = 0 and
//!   Ric(ℓ₊,ℓ₊) = 2 > 0, the curved-ambient case where the Ricci term
//!   alone drives the second variation negative.
//!
//! Parameter boxes are (u,v) ∈ [−0.8, 0.8]² with collar margin 0.2 except
//! for the catenoid (v ∈ [0.3, 5.9]); they keep every geodesic of the
//! variation and null-sweep suites inside the chart domains. The round
//! sphere slice — the untrapped negative control — is available through
//! [`round_sphere_control`] but is deliberately not a catalog id.

use crate::ambient::charts;
use crate::error::{GeomError, Result};
use crate::immersion::{Immersion, ParamDomain};
use crate::jet::Jet;
use crate::nullframe::{self, NullNormalFrame, NullSign};
use crate::quad::sample_lattice;
use crate::AVec;
use std::sync::Arc;

/// One verifiable expectation about an example, with its tolerance.
#[derive(Debug, Clone)]
pub enum Fact {
    /// The three frame pairings and normality, each ≤ tol.
    FrameInvariants { tol: f64 },
    /// g_ij = δ_ij to tol.
    InducedMetricIdentity { tol: f64 },
    /// Intrinsic scalar curvature of the induced metric ≤ tol.
    ScalarCurvatureZero { tol: f64 },
    /// |θ⁺| ≤ tol (the marginally trapped condition).
    ThetaPlusZero { tol: f64 },
    /// |θ⁻ − value| ≤ tol.
    ThetaMinusEquals { value: f64, tol: f64 },
    /// tr(A±) = θ± at every sample, ≤ tol.
    TraceIdentity { tol: f64 },
    /// ‖H‖ ≤ tol.
    MeanCurvatureZero { tol: f64 },
    /// ‖H + n·q‖ ≤ tol with q the dual map (light-cone examples, n = 2).
    MeanCurvatureIsMinusNDual { tol: f64 },
    /// ‖H − n·ℓ₊‖ ≤ tol (n = 2).
    MeanCurvatureIsNEllPlus { tol: f64 },
    /// Every II component ≤ tol.
    SecondFormZero { tol: f64 },
    /// Every A₊ entry ≤ tol.
    APlusZero { tol: f64 },
    /// Ric(ℓ₊, ℓ₊) > margin at every sample.
    RicciEllPlusAtLeast { margin: f64 },
}

impl Fact {
    pub fn label(&self) -> String {
        match self {
            Fact::FrameInvariants { .. } => "frame-invariants".into(),
            Fact::InducedMetricIdentity { .. } => "induced-metric-identity".into(),
            Fact::ScalarCurvatureZero { .. } => "scalar-curvature-zero".into(),
            Fact::ThetaPlusZero { .. } => "theta-plus-zero".into(),
            Fact::ThetaMinusEquals { value, .. } => format!("theta-minus-equals({value})"),
            Fact::TraceIdentity { .. } => "trace-identity".into(),
            Fact::MeanCurvatureZero { .. } => "mean-curvature-zero".into(),
            Fact::MeanCurvatureIsMinusNDual { .. } => "H-equals-minus-n-dual".into(),
            Fact::MeanCurvatureIsNEllPlus { .. } => "H-equals-n-ell-plus".into(),
            Fact::SecondFormZero { .. } => "second-form-zero".into(),
            Fact::APlusZero { .. } => "A-plus-zero".into(),
            Fact::RicciEllPlusAtLeast { .. } => "ricci-ell-plus-positive".into(),
        }
    }
}

/// Result of checking one fact over a sample lattice.
#[derive(Debug, Clone)]
pub struct FactOutcome {
    pub label: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// A catalog example: chart, immersion, prescribed frame, expectations.
pub struct ExampleRecord {
    pub id: &'static str,
    pub chart: Arc<crate::ambient::AmbientChart>,
    pub immersion: Arc<Immersion>,
    pub frame: Arc<NullNormalFrame>,
    pub expected: Vec<Fact>,
    /// Variation parameter range around 0 for deformation suites.
    pub t_range: f64,
    /// Singularity-free window for the null-geodesic sweep.
    pub t_window: f64,
    /// The mean curvature vanishes identically (frame is a prescription).
    pub h_vanishes: bool,
}

pub const IDS: [&str; 7] = [
    "lightcone-flat",
    "lightcone-parabolic",
    "euclid-minimal-catenoid",
    "zmc-plane",
    "horosphere",
    "desitter-flat-slice",
    "ppwave-slice",
];

pub fn ids() -> Vec<&'static str> {
    IDS.to_vec()
}

fn square_domain(half: f64, margin: f64) -> ParamDomain {
    ParamDomain::new(vec![(-half, half), (-half, half)], margin).unwrap()
}

pub fn build(id: &str) -> Result<ExampleRecord> {
    match id {
        "lightcone-flat" => Ok(lightcone_flat()),
        "lightcone-parabolic" => Ok(lightcone_parabolic()),
        "euclid-minimal-catenoid" => Ok(catenoid()),
        "zmc-plane" => Ok(zmc_plane()),
        "horosphere" => Ok(horosphere()),
        "desitter-flat-slice" => Ok(desitter_flat_slice()),
        "ppwave-slice" => Ok(ppwave_slice()),
        other => Err(GeomError::UnknownExample(other.to_string())),
    }
}

fn lightcone_flat() -> ExampleRecord {
    let chart = Arc::new(charts::minkowski(4));
    let imm = Immersion::from_jets(
        square_domain(0.8, 0.2),
        chart.clone(),
        Box::new(|x: &[Jet]| {
            let (u, v) = (&x[0], &x[1]);
            vec![u.cosh(), u.sinh(), v.cos(), v.sin()]
        }),
    );
    // ℓ₊ = dual map q, ℓ₋ = −2p: ⟨q, −2p⟩ = −2⟨q,p⟩ = −2
    let frame = NullNormalFrame::prescribed(
        |x: &[Jet]| {
            let (u, v) = (&x[0], &x[1]);
            vec![
                u.cosh() * -0.5,
                u.sinh() * -0.5,
                v.cos() * 0.5,
                v.sin() * 0.5,
            ]
        },
        |x: &[Jet]| {
            let (u, v) = (&x[0], &x[1]);
            vec![
                u.cosh() * -2.0,
                u.sinh() * -2.0,
                v.cos() * -2.0,
                v.sin() * -2.0,
            ]
        },
    );
    ExampleRecord {
        id: "lightcone-flat",
        chart,
        immersion: Arc::new(imm),
        frame: Arc::new(frame),
        expected: vec![
            Fact::FrameInvariants { tol: 1e-10 },
            Fact::InducedMetricIdentity { tol: 1e-9 },
            Fact::ScalarCurvatureZero { tol: 1e-8 },
            Fact::ThetaPlusZero { tol: 1e-7 },
            Fact::ThetaMinusEquals { value: 4.0, tol: 1e-7 },
            Fact::TraceIdentity { tol: 1e-8 },
            Fact::MeanCurvatureIsMinusNDual { tol: 1e-7 },
        ],
        t_range: 0.4,
        t_window: 1.5,
        h_vanishes: false,
    }
}

fn lightcone_parabolic() -> ExampleRecord {
    let chart = Arc::new(charts::minkowski(4));
    let imm = Immersion::from_jets(
        square_domain(0.8, 0.2),
        chart.clone(),
        Box::new(|x: &[Jet]| {
            let (u, v) = (&x[0], &x[1]);
            let s = &(u * u) + &(v * v);
            vec![
                &(&s + 1.0) * 0.5,
                u.clone(),
                v.clone(),
                &(&s - 1.0) * 0.5,
            ]
        }),
    );
    // the dual map of the parabolic cut is the constant (−1, 0, 0, −1)
    let frame = NullNormalFrame::prescribed(
        |x: &[Jet]| {
            let sp = x[0].space();
            vec![
                Jet::constant(sp, -1.0),
                Jet::constant(sp, 0.0),
                Jet::constant(sp, 0.0),
                Jet::constant(sp, -1.0),
            ]
        },
        |x: &[Jet]| {
            let (u, v) = (&x[0], &x[1]);
            let s = &(u * u) + &(v * v);
            vec![
                -(&(&s + 1.0)),
                u * -2.0,
                v * -2.0,
                -(&(&s - 1.0)),
            ]
        },
    );
    ExampleRecord {
        id: "lightcone-parabolic",
        chart,
        immersion: Arc::new(imm),
        frame: Arc::new(frame),
        expected: vec![
            Fact::FrameInvariants { tol: 1e-10 },
            Fact::InducedMetricIdentity { tol: 1e-9 },
            Fact::ScalarCurvatureZero { tol: 1e-8 },
            Fact::ThetaPlusZero { tol: 1e-7 },
            Fact::ThetaMinusEquals { value: 4.0, tol: 1e-7 },
            Fact::TraceIdentity { tol: 1e-8 },
            Fact::MeanCurvatureIsMinusNDual { tol: 1e-7 },
            Fact::APlusZero { tol: 1e-8 },
        ],
        t_range: 0.4,
        t_window: 1.5,
        h_vanishes: false,
    }
}

fn catenoid() -> ExampleRecord {
    let chart = Arc::new(charts::minkowski(4));
    let domain = ParamDomain::new(vec![(-0.8, 0.8), (0.3, 5.9)], 0.2).unwrap();
    let imm = Immersion::from_jets(
        domain,
        chart.clone(),
        Box::new(|x: &[Jet]| {
            let (u, v) = (&x[0], &x[1]);
            let sp = x[0].space();
            vec![
                Jet::constant(sp, 0.0),
                &u.cosh() * &v.cos(),
                &u.cosh() * &v.sin(),
                u.clone(),
            ]
        }),
    );
    // ν = (−cos v, −sin v, sinh u)/cosh u ; ℓ± = (1, ±ν)
    let nu = |x: &[Jet]| -> Vec<Jet> {
        let (u, v) = (&x[0], &x[1]);
        let sech = u.cosh().recip();
        vec![
            -(&(&v.cos() * &sech)),
            -(&(&v.sin() * &sech)),
            &u.sinh() * &sech,
        ]
    };
    let frame = NullNormalFrame::prescribed(
        move |x: &[Jet]| {
            let sp = x[0].space();
            let n = nu(x);
            vec![Jet::constant(sp, 1.0), n[0].clone(), n[1].clone(), n[2].clone()]
        },
        move |x: &[Jet]| {
            let sp = x[0].space();
            let (u, v) = (&x[0], &x[1]);
            let sech = u.cosh().recip();
            vec![
                Jet::constant(sp, 1.0),
                &v.cos() * &sech,
                &v.sin() * &sech,
                -(&(&u.sinh() * &sech)),
            ]
        },
    );
    ExampleRecord {
        id: "euclid-minimal-catenoid",
        chart,
        immersion: Arc::new(imm),
        frame: Arc::new(frame),
        expected: vec![
            Fact::FrameInvariants { tol: 1e-10 },
            Fact::MeanCurvatureZero { tol: 1e-7 },
            Fact::ThetaPlusZero { tol: 1e-7 },
            Fact::TraceIdentity { tol: 1e-8 },
        ],
        t_range: 0.4,
        t_window: 1.0,
        h_vanishes: true,
    }
}

fn zmc_plane() -> ExampleRecord {
    let chart = Arc::new(charts::minkowski(4));
    let imm = Immersion::from_jets(
        square_domain(0.8, 0.2),
        chart.clone(),
        Box::new(|x: &[Jet]| {
            let sp = x[0].space();
            vec![
                Jet::constant(sp, 0.0),
                x[0].clone(),
                x[1].clone(),
                Jet::constant(sp, 0.0),
            ]
        }),
    );
    // ν = time-like unit normal of the plane in the R³₁ factor; ℓ± = (ν, ±1)
    let frame = NullNormalFrame::prescribed(
        |x: &[Jet]| {
            let sp = x[0].space();
            vec![
                Jet::constant(sp, 1.0),
                Jet::constant(sp, 0.0),
                Jet::constant(sp, 0.0),
                Jet::constant(sp, 1.0),
            ]
        },
        |x: &[Jet]| {
            let sp = x[0].space();
            vec![
                Jet::constant(sp, 1.0),
                Jet::constant(sp, 0.0),
                Jet::constant(sp, 0.0),
                Jet::constant(sp, -1.0),
            ]
        },
    );
    ExampleRecord {
        id: "zmc-plane",
        chart,
        immersion: Arc::new(imm),
        frame: Arc::new(frame),
        expected: vec![
            Fact::FrameInvariants { tol: 1e-10 },
            Fact::SecondFormZero { tol: 1e-12 },
            Fact::MeanCurvatureZero { tol: 1e-12 },
            Fact::ThetaPlusZero { tol: 1e-12 },
            Fact::APlusZero { tol: 1e-12 },
            Fact::TraceIdentity { tol: 1e-8 },
        ],
        t_range: 0.4,
        t_window: 2.0,
        h_vanishes: true,
    }
}

fn horosphere() -> ExampleRecord {
    let chart = Arc::new(charts::minkowski(4));
    let imm = Immersion::from_jets(
        square_domain(0.8, 0.2),
        chart.clone(),
        Box::new(|x: &[Jet]| {
            let (u, v) = (&x[0], &x[1]);
            let s = &(u * u) + &(v * v);
            vec![&(&s * 0.5) + 1.0, u.clone(), v.clone(), &s * 0.5]
        }),
    );
    // ℓ₊ = ν + f = w (constant null), ℓ₋ = −ν + f = 2f − w
    let frame = NullNormalFrame::prescribed(
        |x: &[Jet]| {
            let sp = x[0].space();
            vec![
                Jet::constant(sp, 1.0),
                Jet::constant(sp, 0.0),
                Jet::constant(sp, 0.0),
                Jet::constant(sp, 1.0),
            ]
        },
        |x: &[Jet]| {
            let (u, v) = (&x[0], &x[1]);
            let s = &(u * u) + &(v * v);
            vec![&s + 1.0, u * 2.0, v * 2.0, &s - 1.0]
        },
    );
    ExampleRecord {
        id: "horosphere",
        chart,
        immersion: Arc::new(imm),
        frame: Arc::new(frame),
        expected: vec![
            Fact::FrameInvariants { tol: 1e-10 },
            Fact::InducedMetricIdentity { tol: 1e-9 },
            Fact::MeanCurvatureIsNEllPlus { tol: 1e-7 },
            Fact::APlusZero { tol: 1e-7 },
            Fact::ThetaPlusZero { tol: 1e-7 },
            Fact::ThetaMinusEquals { value: -4.0, tol: 1e-7 },
            Fact::TraceIdentity { tol: 1e-8 },
        ],
        t_range: 0.4,
        t_window: 2.0,
        h_vanishes: false,
    }
}

fn desitter_flat_slice() -> ExampleRecord {
    let chart = Arc::new(charts::minkowski(4));
    let imm = Immersion::from_jets(
        square_domain(0.8, 0.2),
        chart.clone(),
        Box::new(|x: &[Jet]| {
            let (u, v) = (&x[0], &x[1]);
            let s = &(u * u) + &(v * v);
            vec![&s * -0.5, u.clone(), v.clone(), -(&(&s * 0.5)) + 1.0]
        }),
    );
    // ℓ₊ = −ν − f = −w, ℓ₋ = −ν + f = 2f − w
    let frame = NullNormalFrame::prescribed(
        |x: &[Jet]| {
            let sp = x[0].space();
            vec![
                Jet::constant(sp, -1.0),
                Jet::constant(sp, 0.0),
                Jet::constant(sp, 0.0),
                Jet::constant(sp, -1.0),
            ]
        },
        |x: &[Jet]| {
            let (u, v) = (&x[0], &x[1]);
            let s = &(u * u) + &(v * v);
            vec![-(&(&s + 1.0)), u * 2.0, v * 2.0, -(&s) + 1.0]
        },
    );
    ExampleRecord {
        id: "desitter-flat-slice",
        chart,
        immersion: Arc::new(imm),
        frame: Arc::new(frame),
        expected: vec![
            Fact::FrameInvariants { tol: 1e-10 },
            Fact::InducedMetricIdentity { tol: 1e-9 },
            Fact::MeanCurvatureIsNEllPlus { tol: 1e-7 },
            Fact::APlusZero { tol: 1e-7 },
            Fact::ThetaPlusZero { tol: 1e-7 },
            Fact::ThetaMinusEquals { value: -4.0, tol: 1e-7 },
            Fact::TraceIdentity { tol: 1e-8 },
        ],
        t_range: 0.4,
        t_window: 2.0,
        h_vanishes: false,
    }
}

fn ppwave_slice() -> ExampleRecord {
    let chart = Arc::new(charts::ppwave(-1.0));
    let imm = Immersion::from_jets(
        square_domain(0.8, 0.2),
        chart.clone(),
        Box::new(|x: &[Jet]| {
            let sp = x[0].space();
            vec![
                Jet::constant(sp, 0.0),
                Jet::constant(sp, 0.0),
                x[0].clone(),
                x[1].clone(),
            ]
        }),
    );
    // the u-aligned null normal: ℓ₊ = ∂u − (H/2)∂v with H = −(x²+y²),
    // ℓ₋ = −2∂v is its partner with pairing −2
    let frame = NullNormalFrame::prescribed(
        |x: &[Jet]| {
            let sp = x[0].space();
            let s = &(&x[0] * &x[0]) + &(&x[1] * &x[1]);
            vec![
                Jet::constant(sp, 1.0),
                &s * 0.5,
                Jet::constant(sp, 0.0),
                Jet::constant(sp, 0.0),
            ]
        },
        |x: &[Jet]| {
            let sp = x[0].space();
            vec![
                Jet::constant(sp, 0.0),
                Jet::constant(sp, -2.0),
                Jet::constant(sp, 0.0),
                Jet::constant(sp, 0.0),
            ]
        },
    );
    ExampleRecord {
        id: "ppwave-slice",
        chart,
        immersion: Arc::new(imm),
        frame: Arc::new(frame),
        expected: vec![
            Fact::FrameInvariants { tol: 1e-10 },
            Fact::InducedMetricIdentity { tol: 1e-12 },
            Fact::SecondFormZero { tol: 1e-10 },
            Fact::ThetaPlusZero { tol: 1e-10 },
            Fact::ThetaMinusEquals { value: 0.0, tol: 1e-10 },
            Fact::TraceIdentity { tol: 1e-8 },
            Fact::RicciEllPlusAtLeast { margin: 1.0 },
        ],
        t_range: 0.35,
        t_window: 1.2,
        h_vanishes: true,
    }
}

/// Round sphere slice (0, r·S²) — untrapped, both expansions nonzero.
/// Negative control for the trapped check; not a catalog id.
pub fn round_sphere_control(r: f64) -> (Immersion, NullNormalFrame) {
    let chart = Arc::new(charts::minkowski(4));
    let domain = ParamDomain::new(
        vec![(0.3, std::f64::consts::PI - 0.3), (0.0, 2.0 * std::f64::consts::PI - 0.3)],
        0.25,
    )
    .unwrap();
    let imm = Immersion::from_jets(
        domain,
        chart,
        Box::new(move |x: &[Jet]| {
            let sp = x[0].space();
            let (th, ph) = (&x[0], &x[1]);
            vec![
                Jet::constant(sp, 0.0),
                &(&th.sin() * &ph.cos()) * r,
                &(&th.sin() * &ph.sin()) * r,
                &th.cos() * r,
            ]
        }),
    );
    (imm, NullNormalFrame::constructed(None))
}

/// Check one fact over a uniform sample lattice.
pub fn verify_fact(record: &ExampleRecord, fact: &Fact, per_axis: usize) -> Result<FactOutcome> {
    let imm = &record.immersion;
    let frame = &record.frame;
    let points = sample_lattice(&imm.domain.box_intervals, per_axis);
    let n = imm.n() as f64;
    let (max_residual, tolerance) = match fact {
        Fact::FrameInvariants { tol } => {
            let mut worst = 0.0f64;
            for x in &points {
                let res = frame.invariant_residuals(imm, x)?;
                for r in res {
                    worst = worst.max(r);
                }
            }
            (worst, *tol)
        }
        Fact::InducedMetricIdentity { tol } => {
            let mut worst = 0.0f64;
            for x in &points {
                let im = imm.induced_metric(x)?;
                let id = crate::AMat::identity(imm.n(), imm.n());
                worst = worst.max((im.g - id).norm());
            }
            (worst, *tol)
        }
        Fact::ScalarCurvatureZero { tol } => {
            let mut worst = 0.0f64;
            for x in &points {
                worst = worst.max(imm.intrinsic_scalar_curvature(x)?.abs());
            }
            (worst, *tol)
        }
        Fact::ThetaPlusZero { tol } => {
            let mut worst = 0.0f64;
            for x in &points {
                let th = nullframe::theta(imm, frame, x, NullSign::Plus)?;
                worst = worst.max(th.value.abs()).max(th.decomposition_residual);
            }
            (worst, *tol)
        }
        Fact::ThetaMinusEquals { value, tol } => {
            let mut worst = 0.0f64;
            for x in &points {
                let th = nullframe::theta(imm, frame, x, NullSign::Minus)?;
                worst = worst.max((th.value - value).abs());
            }
            (worst, *tol)
        }
        Fact::TraceIdentity { tol } => {
            let mut worst = 0.0f64;
            for x in &points {
                for sign in [NullSign::Plus, NullSign::Minus] {
                    let a = nullframe::shape_operator(imm, frame, x, sign)?;
                    let th = nullframe::theta(imm, frame, x, sign)?;
                    worst = worst.max((a.trace() - th.value).abs());
                }
            }
            (worst, *tol)
        }
        Fact::MeanCurvatureZero { tol } => {
            let mut worst = 0.0f64;
            for x in &points {
                worst = worst.max(imm.mean_curvature_vector(x)?.norm());
            }
            (worst, *tol)
        }
        Fact::MeanCurvatureIsMinusNDual { tol } => {
            let mut worst = 0.0f64;
            for x in &points {
                let h = imm.mean_curvature_vector(x)?;
                let q = nullframe::dual_map(imm, x)?;
                worst = worst.max((&h + &q * n).norm());
            }
            (worst, *tol)
        }
        Fact::MeanCurvatureIsNEllPlus { tol } => {
            let mut worst = 0.0f64;
            for x in &points {
                let h = imm.mean_curvature_vector(x)?;
                let s = frame.eval(imm, x)?;
                worst = worst.max((&h - &s.ell_plus * n).norm());
            }
            (worst, *tol)
        }
        Fact::SecondFormZero { tol } => {
            let mut worst = 0.0f64;
            for x in &points {
                let ii = imm.second_fundamental_form(x)?;
                for row in &ii {
                    for v in row {
                        worst = worst.max(v.norm());
                    }
                }
            }
            (worst, *tol)
        }
        Fact::APlusZero { tol } => {
            let mut worst = 0.0f64;
            for x in &points {
                let a = nullframe::shape_operator(imm, frame, x, NullSign::Plus)?;
                worst = worst.max(a.norm());
            }
            (worst, *tol)
        }
        Fact::RicciEllPlusAtLeast { margin } => {
            // residual = margin − min Ric(ℓ₊,ℓ₊); pass when every sample
            // clears the margin
            let mut min_ric = f64::INFINITY;
            for x in &points {
                let s = frame.eval(imm, x)?;
                let p = imm.position(x)?;
                min_ric =
                    min_ric.min(imm.chart.ricci(p.as_slice(), &s.ell_plus, &s.ell_plus)?);
            }
            ((margin - min_ric).max(0.0), f64::EPSILON)
        }
    };
    Ok(FactOutcome {
        label: fact.label(),
        max_residual,
        tolerance,
        pass: max_residual <= tolerance,
    })
}

/// Run every expected fact of an example.
pub fn verify_all_facts(record: &ExampleRecord, per_axis: usize) -> Result<Vec<FactOutcome>> {
    record
        .expected
        .iter()
        .map(|fact| verify_fact(record, fact, per_axis))
        .collect()
}

/// Pointwise NEC sweep of the chart over the immersion's image.
pub fn nec_over_example(record: &ExampleRecord, per_axis: usize) -> Result<crate::ambient::NecReport> {
    let points: Vec<Vec<f64>> =
        sample_lattice(&record.immersion.domain.box_intervals, per_axis)
            .iter()
            .map(|x| record.immersion.position(x).map(|p| p.as_slice().to_vec()))
            .collect::<Result<_>>()?;
    record.chart.nec_check(&points, 32, 1e-8)
}

/// Constructed-frame seed orientation at one parameter point: the
/// prescribed ℓ₊ there. Where H ≠ 0 the construction is forced and the
/// seed is ignored; where H ≡ 0 the null ray is a genuine choice that a
/// constant seed cannot make globally (the catenoid normal rotates a full
/// turn), so the tie-break is prescribed pointwise per example.
pub fn seed_orientation_at(record: &ExampleRecord, x: &[f64]) -> Result<AVec> {
    Ok(record.frame.eval(&record.immersion, x)?.ell_plus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nullframe::{marginally_trapped_check, shape_operator};

    #[test]
    fn every_catalog_example_passes_its_expected_facts() {
        for id in ids() {
            let record = build(id).unwrap();
            let outcomes = verify_all_facts(&record, 8).unwrap();
            for o in &outcomes {
                assert!(
                    o.pass,
                    "{id}/{}: residual {:e} > tol {:e}",
                    o.label, o.max_residual, o.tolerance
                );
            }
        }
    }

    #[test]
    fn every_catalog_example_is_marginally_trapped() {
        for id in ids() {
            let record = build(id).unwrap();
            let pts = sample_lattice(&record.immersion.domain.box_intervals, 8);
            let report =
                marginally_trapped_check(&record.immersion, &record.frame, &pts, 1e-6).unwrap();
            assert!(report.pass, "{id}: max|θ⁺| = {:e}", report.max_theta_plus);
        }
    }

    #[test]
    fn round_sphere_control_fails_trapped_check() {
        let (imm, frame) = round_sphere_control(1.0);
        let pts = sample_lattice(&imm.domain.box_intervals, 6);
        let report = marginally_trapped_check(&imm, &frame, &pts, 1e-6).unwrap();
        assert!(!report.pass);
    }

    #[test]
    fn unknown_id_is_rejected() {
        assert!(matches!(build("klein-bottle"), Err(GeomError::UnknownExample(_))));
    }

    #[test]
    fn lightcone_flat_shape_operator_is_half_diag() {
        let record = build("lightcone-flat").unwrap();
        let a = shape_operator(&record.immersion, &record.frame, &[0.3, -0.4], NullSign::Plus)
            .unwrap();
        assert!((a[(0, 0)] - 0.5).abs() <= 1e-12);
        assert!((a[(1, 1)] + 0.5).abs() <= 1e-12);
        assert!(a[(0, 1)].abs() <= 1e-12 && a[(1, 0)].abs() <= 1e-12);
    }

    #[test]
    fn constructed_frames_align_with_prescribed_ones() {
        // where H ≠ 0 the construction is forced; where H ≡ 0 the seed
        // orientation picks the prescribed ray
        for id in ids() {
            let record = build(id).unwrap();
            for x in sample_lattice(&record.immersion.domain.box_intervals, 4) {
                let seed = seed_orientation_at(&record, &x).unwrap();
                let built =
                    nullframe::build_null_frame(&record.immersion, &x, Some(&seed)).unwrap();
                let prescribed = record.frame.eval(&record.immersion, &x).unwrap();
                let res = nullframe::wedge_residual(&built.ell_plus, &prescribed.ell_plus);
                assert!(res <= 1e-8, "{id} at {x:?}: wedge residual {res:e}");
            }
        }
    }

    #[test]
    fn volume_converges_on_every_example() {
        // order 24 and order 32 grids agree to 1e-9 on every shipped id
        for id in ids() {
            let record = build(id).unwrap();
            let g24 = crate::quad::QuadratureGrid::for_domain(&record.immersion.domain, 24);
            let g32 = crate::quad::QuadratureGrid::for_domain(&record.immersion.domain, 32);
            let v24 = record.immersion.volume(&g24).unwrap();
            let v32 = record.immersion.volume(&g32).unwrap();
            assert!((v24 - v32).abs() <= 1e-9, "{id}: {v24} vs {v32}");
        }
    }

    #[test]
    fn nec_passes_on_all_catalog_charts() {
        for id in ids() {
            let record = build(id).unwrap();
            let rep = nec_over_example(&record, 5).unwrap();
            assert!(rep.pass, "{id}: min Ric(ℓ,ℓ) = {:e}", rep.min_value);
        }
    }

    #[test]
    fn chart_by_name_covers_catalog_charts() {
        assert!(charts::by_name("minkowski(4)").is_ok());
        assert!(charts::by_name("ppwave(-1)").is_ok());
    }
}
