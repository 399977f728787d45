//! Variations of an immersion and the volume variation formulas.
//!
//! A variation is a family F(t, ·) of immersions with F(0, ·) = f and
//! fixed boundary. Two kinds are supported:
//!
//! * **characteristic** — F(t,x) = exp_{f(x)}(τ(t,x) ℓ₊(x)) with
//!   τ(0,·) = 0. The variational field is X = φ ℓ₊ (φ = ∂_t τ|₀), every
//!   t-line is a pregeodesic, and the acceleration X′ = ψ ℓ₊ stays
//!   parallel to ℓ₊: these are the variations for which the volume
//!   formulas degenerate to an operator of order zero.
//! * **general** — F(t,x) = exp_{f(x)}(t X(x) + ½ t² X′(x)) for arbitrary
//!   fields X, X′ along f. The second variation only involves this 2-jet.
//!
//! Vol(t) = ∫ dV_t is differentiated two ways and the results are compared:
//! central finite differences in t with one Richardson level (every report
//! prints the associated noise floor), and the analytic formulas
//!
//! d/dt Vol|₀ = −∫ ⟨X, H⟩ dV₀,
//!
//! d²/dt² Vol|₀ = ∫ ( −Σᵢ R(X,eᵢ,eᵢ,X) + Σᵢ ⟨(∇̄ᵢX)⊥,(∇̄ᵢX)⊥⟩
//!                 − Σᵢⱼ ⟨∇̄ᵢX,eⱼ⟩⟨∇̄ⱼX,eᵢ⟩ + (Σᵢ⟨∇̄ᵢX,eᵢ⟩)²
//!                 − ⟨X′,H⟩ ) dV₀,
//!
//! which for a characteristic variation of a marginally trapped immersion
//! collapses to −∫ φ² (tr(A₊²) + Ric(ℓ₊,ℓ₊)) dV₀.
//!
//! Deformed immersions carry exact first-order x-derivatives: the geodesic
//! integrator propagates the linearized flow alongside, so Vol(t) is smooth
//! to machine precision and the finite differences in t see no grid noise.
//! The surface derivatives of closed-form fields go through jets; plain
//! closures fall back to directional differences at step 1e−5, which is
//! then the accuracy bottleneck.

use crate::error::{GeomError, Result};
use crate::fields::{ScalarField, TimeProfile, VectorField};
use crate::immersion::Immersion;
use crate::nullframe::{NullNormalFrame, NullSign};
use crate::quad::QuadratureGrid;
use crate::AVec;
use std::sync::Arc;

pub enum VariationSpec {
    Characteristic { tau: TimeProfile, t_range: f64 },
    General { x_field: VectorField, xprime_field: VectorField, t_range: f64 },
}

impl VariationSpec {
    /// Admissible variation realized along geodesics: τ(t,x) = t φ(x),
    /// which is in fact characteristic (ψ = 0).
    pub fn admissible(phi: ScalarField, t_range: f64) -> VariationSpec {
        let n = phi.dim();
        VariationSpec::Characteristic { tau: TimeProfile::linear(n, phi), t_range }
    }

    pub fn characteristic(tau: TimeProfile, t_range: f64) -> VariationSpec {
        VariationSpec::Characteristic { tau, t_range }
    }

    pub fn general(x_field: VectorField, xprime_field: VectorField, t_range: f64) -> VariationSpec {
        VariationSpec::General { x_field, xprime_field, t_range }
    }

    pub fn t_range(&self) -> f64 {
        match self {
            VariationSpec::Characteristic { t_range, .. } => *t_range,
            VariationSpec::General { t_range, .. } => *t_range,
        }
    }

    /// Default finite-difference step: 1e−2 × the half-width of t_range.
    pub fn default_fd_step(&self) -> f64 {
        1e-2 * self.t_range()
    }
}

/// The variational field X and acceleration field X′ of a spec, evaluated
/// with surface jacobians.
pub struct VariationFields<'a> {
    spec: &'a VariationSpec,
    frame: &'a NullNormalFrame,
}

impl<'a> VariationFields<'a> {
    pub fn new(spec: &'a VariationSpec, frame: &'a NullNormalFrame) -> Self {
        VariationFields { spec, frame }
    }

    /// (X, ∂ₖX, X′) at a parameter point.
    pub fn eval(&self, imm: &Immersion, x: &[f64]) -> Result<(AVec, Vec<AVec>, AVec)> {
        match self.spec {
            VariationSpec::Characteristic { tau, .. } => {
                let (sample, dplus, _) = self.frame.eval_with_jacobian(imm, x)?;
                let (phi, dphi) = tau.phi().eval_with_grad(x);
                let psi = tau.psi().eval(x);
                let xv = &sample.ell_plus * phi;
                let dx = dplus
                    .iter()
                    .zip(&dphi)
                    .map(|(dl, &dp)| dl * phi + &sample.ell_plus * dp)
                    .collect();
                let xp = &sample.ell_plus * psi;
                Ok((xv, dx, xp))
            }
            VariationSpec::General { x_field, xprime_field, .. } => {
                let (xv, dx) = x_field.eval_with_jacobian(x);
                let xp = xprime_field.eval(x);
                Ok((xv, dx, xp))
            }
        }
    }
}

/// Deform the immersion to parameter `t`. The result carries exact
/// first-order derivative data propagated through the geodesic flow.
pub fn deform(
    imm: &Arc<Immersion>,
    spec: &Arc<VariationSpec>,
    frame: &Arc<NullNormalFrame>,
    t: f64,
) -> Result<Immersion> {
    if t.abs() > spec.t_range() {
        return Err(GeomError::Config(format!(
            "deformation parameter {t} outside t_range ±{}",
            spec.t_range()
        )));
    }
    let base = imm.clone();
    let spec = spec.clone();
    let frame = frame.clone();
    let chart = base.chart.clone();
    let domain = base.domain.clone();
    let eval = move |x: &[f64]| -> Result<(AVec, Vec<AVec>)> {
        let data = base.eval(x)?;
        match &*spec {
            VariationSpec::Characteristic { tau, .. } => {
                let (sample, dplus, _) = frame.eval_with_jacobian(&base, x)?;
                let (tval, tgrad) = tau.eval_with_grad(t, x);
                // endpoint of s ↦ exp(s ℓ₊) at affine s = τ(t,x); the
                // x-derivative splits into the linearized flow at fixed s
                // plus the endpoint velocity times ∂ₖτ
                let (state, dpos, _) = chart.exp_map_linearized(
                    &data.position,
                    &sample.ell_plus,
                    tval,
                    &data.partials,
                    &dplus,
                )?;
                let partials = dpos
                    .iter()
                    .zip(&tgrad)
                    .map(|(dp, &dt)| dp + &state.velocity * dt)
                    .collect();
                Ok((state.position, partials))
            }
            VariationSpec::General { x_field, xprime_field, .. } => {
                let (xv, dxv) = x_field.eval_with_jacobian(x);
                let (pv, dpv) = xprime_field.eval_with_jacobian(x);
                let w = &xv * t + &pv * (0.5 * t * t);
                let dw: Vec<AVec> = dxv
                    .iter()
                    .zip(&dpv)
                    .map(|(a, b)| a * t + b * (0.5 * t * t))
                    .collect();
                let (state, dpos, _) =
                    chart.exp_map_linearized(&data.position, &w, 1.0, &data.partials, &dw)?;
                Ok((state.position, dpos))
            }
        }
    };
    Ok(Immersion::from_first_order(domain, imm.chart.clone(), Box::new(eval)))
}

/// Vol(t) at the given samples, in sample order.
pub fn vol_curve(
    imm: &Arc<Immersion>,
    spec: &Arc<VariationSpec>,
    frame: &Arc<NullNormalFrame>,
    grid: &QuadratureGrid,
    t_samples: &[f64],
) -> Result<Vec<(f64, f64)>> {
    t_samples
        .iter()
        .map(|&t| {
            let def = deform(imm, spec, frame, t)?;
            Ok((t, def.volume(grid)?))
        })
        .collect()
}

/// A derivative value with its printed noise floor.
#[derive(Debug, Clone)]
pub struct DerivativeEstimate {
    pub value: f64,
    pub noise_floor: f64,
    /// Set when |value| is within two decades of the floor.
    pub cancellation_warning: bool,
}

/// First and second t-derivatives of Vol at 0 by central differences with
/// one Richardson level, sharing the five volume evaluations.
pub struct VariationDerivatives {
    pub vol0: f64,
    pub first: DerivativeEstimate,
    pub second: DerivativeEstimate,
}

fn assemble_derivatives(
    v0: f64,
    vp1: f64,
    vm1: f64,
    vp2: f64,
    vm2: f64,
    h: f64,
) -> VariationDerivatives {
    let d1 = |vp: f64, vm: f64, h: f64| (vp - vm) / (2.0 * h);
    let first_raw = d1(vp1, vm1, h);
    let first_half = d1(vp2, vm2, h / 2.0);
    let first = (4.0 * first_half - first_raw) / 3.0;

    let d2 = |vp: f64, vm: f64, h: f64| (vp - 2.0 * v0 + vm) / (h * h);
    let second_raw = d2(vp1, vm1, h);
    let second_half = d2(vp2, vm2, h / 2.0);
    let second = (4.0 * second_half - second_raw) / 3.0;

    // volume evaluations are good to ~3e−14 relative (quadrature truncation
    // plus f64 accumulation); the floors carry the Richardson amplification
    // for the step and its half
    let eps = 3e-14 * (1.0 + v0.abs());
    let floor1 = 10.0 * eps / h;
    let floor2 = 100.0 * eps / (h * h);
    VariationDerivatives {
        vol0: v0,
        first: DerivativeEstimate {
            value: first,
            noise_floor: floor1,
            cancellation_warning: first.abs() < 100.0 * floor1,
        },
        second: DerivativeEstimate {
            value: second,
            noise_floor: floor2,
            cancellation_warning: second.abs() < 100.0 * floor2,
        },
    }
}

pub fn variation_derivatives(
    imm: &Arc<Immersion>,
    spec: &Arc<VariationSpec>,
    frame: &Arc<NullNormalFrame>,
    grid: &QuadratureGrid,
    h: f64,
) -> Result<VariationDerivatives> {
    assert!(h > 0.0 && h <= spec.t_range());
    let vol_at = |t: f64| -> Result<f64> { deform(imm, spec, frame, t)?.volume(grid) };
    let v0 = vol_at(0.0)?;
    let vp1 = vol_at(h)?;
    let vm1 = vol_at(-h)?;
    let vp2 = vol_at(h / 2.0)?;
    let vm2 = vol_at(-h / 2.0)?;
    Ok(assemble_derivatives(v0, vp1, vm1, vp2, vm2, h))
}

pub fn first_variation_fd(
    imm: &Arc<Immersion>,
    spec: &Arc<VariationSpec>,
    frame: &Arc<NullNormalFrame>,
    grid: &QuadratureGrid,
    h: f64,
) -> Result<DerivativeEstimate> {
    Ok(variation_derivatives(imm, spec, frame, grid, h)?.first)
}

pub fn second_variation_fd(
    imm: &Arc<Immersion>,
    spec: &Arc<VariationSpec>,
    frame: &Arc<NullNormalFrame>,
    grid: &QuadratureGrid,
    h: f64,
) -> Result<DerivativeEstimate> {
    Ok(variation_derivatives(imm, spec, frame, grid, h)?.second)
}

/// Analytic first variation −∫ ⟨X, H⟩ dV₀.
pub fn first_variation_formula(
    imm: &Immersion,
    spec: &VariationSpec,
    frame: &NullNormalFrame,
    grid: &QuadratureGrid,
) -> Result<f64> {
    let fields = VariationFields::new(spec, frame);
    grid.try_integrate(|x| {
        let data = imm.eval(x)?;
        let im = imm.induced_metric_from(&data, x)?;
        let ii = imm.second_fundamental_form_from(&data, &im, x)?;
        let h = crate::immersion::mean_curvature_from_parts(&im, &ii);
        let (xv, _, _) = fields.eval(imm, x)?;
        let pairing = imm.chart.pairing(data.position.as_slice(), &xv, &h);
        Ok(-pairing * im.det.sqrt())
    })
}

/// The five-term general second variation, with per-term integrals.
#[derive(Debug, Clone)]
pub struct GeneralSecondVariation {
    /// [curvature, normal-gradient, mixed-trace, divergence², acceleration]
    pub terms: [f64; 5],
    pub total: f64,
}

/// Assemble the general second variation formula pointwise with an
/// orthonormal tangent frame, and integrate each term.
pub fn second_variation_general_formula(
    imm: &Immersion,
    spec: &VariationSpec,
    frame: &NullNormalFrame,
    grid: &QuadratureGrid,
) -> Result<GeneralSecondVariation> {
    let fields = VariationFields::new(spec, frame);
    let n = imm.n();
    let m = imm.chart.dim;
    let flat = imm.chart.is_flat();
    use rayon::prelude::*;
    let per_node: Vec<Result<[f64; 5]>> = grid
        .nodes()
        .par_iter()
        .map(|node| -> Result<[f64; 5]> {
            let x = &node.x;
            let data = imm.eval(x)?;
            let im = imm.induced_metric_from(&data, x)?;
            let tf = imm.tangent_frame_from(&data, x)?;
            let p = data.position.as_slice();
            let (xv, dxv, xpv) = fields.eval(imm, x)?;

            // ∇̄_{∂_k} X = ∂_k X + Γ(∂_k f, X)
            let gamma = if flat { None } else { Some(imm.chart.christoffel(p)?) };
            let mut nabla_coord: Vec<AVec> = Vec::with_capacity(n);
            for k in 0..n {
                let mut w = dxv[k].clone();
                if let Some(g) = &gamma {
                    for lam in 0..m {
                        let mut corr = 0.0;
                        for mu in 0..m {
                            for nu in 0..m {
                                corr += g.get(lam, mu, nu) * data.partials[k][mu] * xv[nu];
                            }
                        }
                        w[lam] += corr;
                    }
                }
                nabla_coord.push(w);
            }
            // ∇̄_{e_i} X = Σ_k coeffs[(i,k)] ∇̄_{∂_k} X
            let nabla: Vec<AVec> = (0..n)
                .map(|i| {
                    let mut w = AVec::zeros(m);
                    for k in 0..n {
                        w += &nabla_coord[k] * tf.coeffs[(i, k)];
                    }
                    w
                })
                .collect();

            // term 1: −Σ R(X, e_i, e_i, X)
            let t1 = if flat {
                0.0
            } else {
                let sample = imm.chart.riemann(p)?;
                -(0..n).map(|i| sample.contract(&xv, &tf.ortho[i], &tf.ortho[i], &xv)).sum::<f64>()
            };
            // term 2: Σ ⟨(∇̄_i X)⊥, (∇̄_i X)⊥⟩
            let mut t2 = 0.0;
            for w in &nabla {
                let perp = imm.project_normal(&data, &im, w);
                t2 += imm.chart.pairing(p, &perp, &perp);
            }
            // terms 3, 4
            let mut t3 = 0.0;
            let mut div = 0.0;
            for i in 0..n {
                div += imm.chart.pairing(p, &nabla[i], &tf.ortho[i]);
                for j in 0..n {
                    t3 -= imm.chart.pairing(p, &nabla[i], &tf.ortho[j])
                        * imm.chart.pairing(p, &nabla[j], &tf.ortho[i]);
                }
            }
            let t4 = div * div;
            // term 5: −⟨X′, H⟩
            let ii = imm.second_fundamental_form_from(&data, &im, x)?;
            let hvec = crate::immersion::mean_curvature_from_parts(&im, &ii);
            let t5 = -imm.chart.pairing(p, &xpv, &hvec);

            let dv = im.det.sqrt() * node.weight;
            Ok([t1 * dv, t2 * dv, t3 * dv, t4 * dv, t5 * dv])
        })
        .collect();
    let mut terms = [0.0; 5];
    for r in per_node {
        let v = r?;
        for (acc, term) in terms.iter_mut().zip(v) {
            *acc += term;
        }
    }
    Ok(GeneralSecondVariation { terms, total: terms.iter().sum() })
}

/// The characteristic second variation −∫ φ² (tr(A₊²) + Ric(ℓ₊,ℓ₊)) dV₀,
/// together with the general formula on the same spec and their relative
/// gap (the two must agree; callers assert the gap).
#[derive(Debug, Clone)]
pub struct CharacteristicSecondVariation {
    pub value: f64,
    pub general: GeneralSecondVariation,
    pub relative_gap: f64,
}

pub fn second_variation_characteristic_formula(
    imm: &Immersion,
    spec: &VariationSpec,
    frame: &NullNormalFrame,
    grid: &QuadratureGrid,
) -> Result<CharacteristicSecondVariation> {
    let tau = match spec {
        VariationSpec::Characteristic { tau, .. } => tau,
        VariationSpec::General { .. } => return Err(GeomError::NotCharacteristic),
    };
    let flat = imm.chart.is_flat();
    let value = grid.try_integrate(|x| {
        let phi = tau.phi().eval(x);
        if phi == 0.0 {
            // collar nodes contribute nothing; skip the curvature work
            return Ok(0.0);
        }
        let im = imm.induced_metric(x)?;
        let a = crate::nullframe::shape_operator(imm, frame, x, NullSign::Plus)?;
        let tr_a2 = (&a * &a).trace();
        let ric = if flat {
            0.0
        } else {
            let s = frame.eval(imm, x)?;
            let p = imm.position(x)?;
            imm.chart.ricci(p.as_slice(), &s.ell_plus, &s.ell_plus)?
        };
        Ok(-phi * phi * (tr_a2 + ric) * im.det.sqrt())
    })?;
    let general = second_variation_general_formula(imm, spec, frame, grid)?;
    let scale = value.abs().max(general.total.abs()).max(1e-12);
    let relative_gap = (value - general.total).abs() / scale;
    Ok(CharacteristicSecondVariation { value, general, relative_gap })
}

/// Per-node cache of everything a characteristic variation suite needs
/// from the base immersion and frame: positions, partials, the frame and
/// its surface jacobian, the connection-corrected frame derivatives, the
/// tangent frame, and the scalar curvature data entering the second
/// variation. Building it costs one pass over the grid; every seeded
/// profile afterwards only evaluates its own φ, ψ, τ.
struct NodeGeom {
    x: Vec<f64>,
    w: f64,
    pos: AVec,
    partials: Vec<AVec>,
    ell: AVec,
    dell: Vec<AVec>,
    sqrt_det_g: f64,
    theta_plus: f64,
    /// tr(A₊²) and Ric(ℓ₊,ℓ₊), the order-zero integrand pieces.
    tr_a2: f64,
    ric_ell: f64,
    /// Σᵢ R(ℓ₊, eᵢ, eᵢ, ℓ₊) over the orthonormal tangent frame.
    riem_tangent_sum: f64,
    /// coeffs of the orthonormal frame: e_i = Σ_k coeffs[(i,k)] ∂_k f.
    coeffs: crate::AMat,
    /// ⟨ℓ₊, e_j⟩ (zero up to roundoff; kept so the cached route runs the
    /// same arithmetic as the reference assembly).
    le: Vec<f64>,
    /// M̂[(k,j)] = ⟨W0_k, e_j⟩ with W0_k = ∂_k ℓ₊ + Γ(∂_k f, ℓ₊).
    mhat: crate::AMat,
    /// normal projections for the T2 term: ⟨P⊥ℓ₊, P⊥ℓ₊⟩, ⟨P⊥ℓ₊, P⊥W0_k⟩,
    /// and the full matrix ⟨P⊥W0_k, P⊥W0_l⟩.
    c1: f64,
    c2: Vec<f64>,
    c3: crate::AMat,
}

pub struct VolumeEngine {
    imm: Arc<Immersion>,
    nodes: Vec<NodeGeom>,
    flat: bool,
}

/// Per-node (φ, χ) values and gradients of a polynomial time profile.
struct ProfileCache {
    rows: Vec<([f64; 2], Vec<f64>, Vec<f64>)>,
}

impl VolumeEngine {
    pub fn new(
        imm: &Arc<Immersion>,
        frame: &Arc<NullNormalFrame>,
        grid: &QuadratureGrid,
    ) -> Result<VolumeEngine> {
        use rayon::prelude::*;
        let flat = imm.chart.is_flat();
        let nodes: Vec<Result<NodeGeom>> = grid
            .nodes()
            .par_iter()
            .map(|node| -> Result<NodeGeom> {
                let x = &node.x;
                let data = imm.eval(x)?;
                let im = imm.induced_metric_from(&data, x)?;
                let tf = imm.tangent_frame_from(&data, x)?;
                let (s, dell, _) = frame.eval_with_jacobian(imm, x)?;
                let p = data.position.as_slice();
                let n = imm.n();
                let m = imm.chart.dim;

                let ii = imm.second_fundamental_form_from(&data, &im, x)?;
                let hv = crate::immersion::mean_curvature_from_parts(&im, &ii);
                let theta_plus = imm.chart.pairing(p, &hv, &s.ell_plus);
                let mut b = crate::AMat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        b[(i, j)] = imm.chart.pairing(p, &ii[i][j], &s.ell_plus);
                    }
                }
                let a_plus = &im.inv * b;
                let tr_a2 = (&a_plus * &a_plus).trace();

                let gamma = if flat { None } else { Some(imm.chart.christoffel(p)?) };
                // W0_k = ∂_k ℓ₊ + Γ(∂_k f, ℓ₊)
                let mut w0: Vec<AVec> = Vec::with_capacity(n);
                for k in 0..n {
                    let mut w = dell[k].clone();
                    if let Some(g) = &gamma {
                        for lam in 0..m {
                            let mut corr = 0.0;
                            for mu in 0..m {
                                for nu in 0..m {
                                    corr += g.get(lam, mu, nu)
                                        * data.partials[k][mu]
                                        * s.ell_plus[nu];
                                }
                            }
                            w[lam] += corr;
                        }
                    }
                    w0.push(w);
                }
                let mut le = vec![0.0; n];
                let mut mhat = crate::AMat::zeros(n, n);
                for j in 0..n {
                    le[j] = imm.chart.pairing(p, &s.ell_plus, &tf.ortho[j]);
                    for k in 0..n {
                        mhat[(k, j)] = imm.chart.pairing(p, &w0[k], &tf.ortho[j]);
                    }
                }
                let pl = imm.project_normal(&data, &im, &s.ell_plus);
                let pw: Vec<AVec> =
                    w0.iter().map(|w| imm.project_normal(&data, &im, w)).collect();
                let c1 = imm.chart.pairing(p, &pl, &pl);
                let c2 = pw.iter().map(|w| imm.chart.pairing(p, &pl, w)).collect();
                let mut c3 = crate::AMat::zeros(n, n);
                for k in 0..n {
                    for l in 0..n {
                        c3[(k, l)] = imm.chart.pairing(p, &pw[k], &pw[l]);
                    }
                }

                let (ric_ell, riem_tangent_sum) = if flat {
                    (0.0, 0.0)
                } else {
                    let sample = imm.chart.riemann(p)?;
                    let ric = sample.ricci_pair(&s.ell_plus, &s.ell_plus);
                    let sum = (0..n)
                        .map(|i| sample.contract(&s.ell_plus, &tf.ortho[i], &tf.ortho[i], &s.ell_plus))
                        .sum();
                    (ric, sum)
                };

                Ok(NodeGeom {
                    x: x.clone(),
                    w: node.weight,
                    pos: data.position,
                    partials: data.partials,
                    ell: s.ell_plus,
                    dell,
                    sqrt_det_g: im.det.sqrt(),
                    theta_plus,
                    tr_a2,
                    ric_ell,
                    riem_tangent_sum,
                    coeffs: tf.coeffs,
                    le,
                    mhat,
                    c1,
                    c2,
                    c3,
                })
            })
            .collect();
        let nodes = nodes.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(VolumeEngine { imm: imm.clone(), nodes, flat })
    }

    /// Per-node τ coefficient cache for polynomial time profiles; `None`
    /// for general t-dependence (reparametrized profiles).
    fn profile_cache(&self, tau: &TimeProfile) -> Option<ProfileCache> {
        match tau.form() {
            crate::fields::TimeForm::Polynomial { phi, chi } => {
                use rayon::prelude::*;
                let rows: Vec<([f64; 2], Vec<f64>, Vec<f64>)> = self
                    .nodes
                    .par_iter()
                    .map(|node| {
                        let (p, dp) = phi.eval_with_grad(&node.x);
                        let (c, dc) = chi.eval_with_grad(&node.x);
                        ([p, c], dp, dc)
                    })
                    .collect();
                Some(ProfileCache { rows })
            }
            crate::fields::TimeForm::General => None,
        }
    }

    fn tau_at(
        &self,
        tau: &TimeProfile,
        cache: Option<&ProfileCache>,
        idx: usize,
        t: f64,
    ) -> (f64, Vec<f64>) {
        match cache {
            Some(c) => {
                let ([p, ch], dp, dc) = &c.rows[idx];
                let val = t * p + t * t * ch;
                let grad = dp
                    .iter()
                    .zip(dc)
                    .map(|(a, b)| t * a + t * t * b)
                    .collect();
                (val, grad)
            }
            None => tau.eval_with_grad(t, &self.nodes[idx].x),
        }
    }

    /// Vol(t) of the characteristic deformation exp(τ(t,·) ℓ₊).
    pub fn volume(&self, spec: &VariationSpec, t: f64) -> Result<f64> {
        let tau = match spec {
            VariationSpec::Characteristic { tau, .. } => tau,
            VariationSpec::General { .. } => return Err(GeomError::NotCharacteristic),
        };
        let cache = self.profile_cache(tau);
        self.volume_inner(spec, tau, cache.as_ref(), t)
    }

    fn volume_inner(
        &self,
        spec: &VariationSpec,
        tau: &TimeProfile,
        cache: Option<&ProfileCache>,
        t: f64,
    ) -> Result<f64> {
        if t.abs() > spec.t_range() {
            return Err(GeomError::Config(format!(
                "deformation parameter {t} outside t_range ±{}",
                spec.t_range()
            )));
        }
        use rayon::prelude::*;
        let n = self.imm.n();
        let chart = &self.imm.chart;
        let vals: Vec<Result<f64>> = self
            .nodes
            .par_iter()
            .enumerate()
            .map(|(idx, node)| -> Result<f64> {
                let (tval, tgrad) = self.tau_at(tau, cache, idx, t);
                let (pos, dpos): (AVec, Vec<AVec>) = if self.flat {
                    let pos = &node.pos + &node.ell * tval;
                    let dpos = (0..n)
                        .map(|k| {
                            &node.partials[k]
                                + &(&node.dell[k] * tval)
                                + &(&node.ell * tgrad[k])
                        })
                        .collect();
                    (pos, dpos)
                } else {
                    let (state, dp, _) = chart.exp_map_linearized(
                        &node.pos,
                        &node.ell,
                        tval,
                        &node.partials,
                        &node.dell,
                    )?;
                    let dpos = dp
                        .iter()
                        .zip(&tgrad)
                        .map(|(d, &g)| d + &state.velocity * g)
                        .collect();
                    (state.position, dpos)
                };
                let gx = chart.metric_at(pos.as_slice());
                let mut g = crate::AMat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        g[(i, j)] = (dpos[i].transpose() * &gx * &dpos[j])[(0, 0)];
                    }
                }
                let det = g.determinant();
                if det <= 0.0 {
                    return Err(GeomError::NotSpacelike { node: node.x.clone() });
                }
                Ok(det.sqrt() * node.w)
            })
            .collect();
        let mut total = 0.0;
        for v in vals {
            total += v?;
        }
        Ok(total)
    }

    /// Shared first/second FD derivatives of Vol at 0 (five evaluations,
    /// one profile pass).
    pub fn derivatives(&self, spec: &VariationSpec, h: f64) -> Result<VariationDerivatives> {
        let tau = match spec {
            VariationSpec::Characteristic { tau, .. } => tau,
            VariationSpec::General { .. } => return Err(GeomError::NotCharacteristic),
        };
        let cache = self.profile_cache(tau);
        let vol = |t: f64| self.volume_inner(spec, tau, cache.as_ref(), t);
        let v0 = vol(0.0)?;
        let vp1 = vol(h)?;
        let vm1 = vol(-h)?;
        let vp2 = vol(h / 2.0)?;
        let vm2 = vol(-h / 2.0)?;
        Ok(assemble_derivatives(v0, vp1, vm1, vp2, vm2, h))
    }

    /// Vol(t) at each sample with one shared profile pass.
    pub fn curve(&self, spec: &VariationSpec, t_samples: &[f64]) -> Result<Vec<(f64, f64)>> {
        let tau = match spec {
            VariationSpec::Characteristic { tau, .. } => tau,
            VariationSpec::General { .. } => return Err(GeomError::NotCharacteristic),
        };
        let cache = self.profile_cache(tau);
        t_samples
            .iter()
            .map(|&t| Ok((t, self.volume_inner(spec, tau, cache.as_ref(), t)?)))
            .collect()
    }

    /// −∫ ⟨X, H⟩ dV₀ = −∫ φ θ⁺ dV₀ for a characteristic spec.
    pub fn first_variation_formula(&self, spec: &VariationSpec) -> Result<f64> {
        let tau = match spec {
            VariationSpec::Characteristic { tau, .. } => tau,
            VariationSpec::General { .. } => return Err(GeomError::NotCharacteristic),
        };
        Ok(self
            .nodes
            .iter()
            .map(|node| -tau.phi().eval(&node.x) * node.theta_plus * node.sqrt_det_g * node.w)
            .sum())
    }

    /// Characteristic-formula value together with the five-term assembly of the general
    /// formula, both over the cached geometry. Identical arithmetic to the
    /// reference implementations given X = φ ℓ₊, X′ = ψ ℓ₊.
    pub fn characteristic_second_variation(
        &self,
        spec: &VariationSpec,
    ) -> Result<CharacteristicSecondVariation> {
        let tau = match spec {
            VariationSpec::Characteristic { tau, .. } => tau,
            VariationSpec::General { .. } => return Err(GeomError::NotCharacteristic),
        };
        let n = self.imm.n();
        let mut value = 0.0;
        let mut terms = [0.0; 5];
        for node in &self.nodes {
            let (phi, dphi) = tau.phi().eval_with_grad(&node.x);
            let psi = tau.psi().eval(&node.x);
            let dv = node.sqrt_det_g * node.w;
            value += -phi * phi * (node.tr_a2 + node.ric_ell) * dv;

            // ⟨∇̄_{e_i}X, e_j⟩ = Σ_k coeffs[(i,k)] (∂_k φ ⟨ℓ,e_j⟩ + φ M̂_kj)
            let mut grad_pair = crate::AMat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    let mut v = 0.0;
                    for k in 0..n {
                        v += node.coeffs[(i, k)] * (dphi[k] * node.le[j] + phi * node.mhat[(k, j)]);
                    }
                    grad_pair[(i, j)] = v;
                }
            }
            let t1 = -phi * phi * node.riem_tangent_sum;
            // T2: (∇̄_{∂_k}X)⊥ = ∂_k φ P⊥ℓ + φ P⊥W0_k; the frame sum
            // Σ_i ⟨(∇̄_{e_i}X)⊥, (∇̄_{e_i}X)⊥⟩ expands bilinearly through
            // the coeffs and the cached pairings
            let mut t2 = 0.0;
            for i in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let cikl = node.coeffs[(i, k)] * node.coeffs[(i, l)];
                        if cikl == 0.0 {
                            continue;
                        }
                        let pk_pl = dphi[k] * dphi[l] * node.c1
                            + dphi[k] * phi * node.c2[l]
                            + dphi[l] * phi * node.c2[k]
                            + phi * phi * node.c3[(k, l)];
                        t2 += cikl * pk_pl;
                    }
                }
            }
            let mut t3 = 0.0;
            let mut div = 0.0;
            for i in 0..n {
                div += grad_pair[(i, i)];
                for j in 0..n {
                    t3 -= grad_pair[(i, j)] * grad_pair[(j, i)];
                }
            }
            let t4 = div * div;
            let t5 = -psi * node.theta_plus;
            terms[0] += t1 * dv;
            terms[1] += t2 * dv;
            terms[2] += t3 * dv;
            terms[3] += t4 * dv;
            terms[4] += t5 * dv;
        }
        let total: f64 = terms.iter().sum();
        let general = GeneralSecondVariation { terms, total };
        let scale = value.abs().max(total.abs()).max(1e-12);
        Ok(CharacteristicSecondVariation {
            value,
            relative_gap: (value - total).abs() / scale,
            general,
        })
    }
}

/// X = φ ℓ₊ as an explicit vector field (for building admissible but
/// non-characteristic general variations).
pub fn ell_plus_times(
    imm: &Arc<Immersion>,
    frame: &Arc<NullNormalFrame>,
    phi: Arc<ScalarField>,
) -> VectorField {
    let imm = imm.clone();
    let frame = frame.clone();
    VectorField::from_plain(move |x: &[f64]| {
        let s = frame.eval(&imm, x).expect("frame evaluation failed");
        &s.ell_plus * phi.eval(x)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ambient::charts;
    use crate::catalog;
    use crate::fields::{bump_profile, seeded_profile};
    use crate::immersion::ParamDomain;
    use crate::jet::Jet;
    use crate::quad::sample_lattice;

    fn grid_for(imm: &Immersion, order: usize) -> QuadratureGrid {
        QuadratureGrid::for_domain(&imm.domain, order)
    }

    fn bump_spec(imm: &Immersion, t_range: f64) -> Arc<VariationSpec> {
        Arc::new(VariationSpec::admissible(bump_profile(&imm.domain), t_range))
    }

    #[test]
    fn deform_at_zero_is_identity() {
        for id in ["lightcone-flat", "ppwave-slice"] {
            let rec = catalog::build(id).unwrap();
            let spec = bump_spec(&rec.immersion, rec.t_range);
            let def = deform(&rec.immersion, &spec, &rec.frame, 0.0).unwrap();
            for x in sample_lattice(&rec.immersion.domain.box_intervals, 4) {
                let a = rec.immersion.position(&x).unwrap();
                let b = def.position(&x).unwrap();
                assert!((a - b).norm() <= 1e-14, "{id}");
            }
        }
    }

    #[test]
    fn deform_outside_t_range_is_rejected() {
        let rec = catalog::build("zmc-plane").unwrap();
        let spec = bump_spec(&rec.immersion, 0.2);
        assert!(deform(&rec.immersion, &spec, &rec.frame, 0.3).is_err());
    }

    #[test]
    fn minkowski_characteristic_deform_matches_closed_form() {
        // on a flat chart the deformation is exactly f + τ ℓ₊; check that
        // the generic integrator path reproduces it
        let chart = Arc::new(charts::minkowski_generic(4));
        let domain = ParamDomain::new(vec![(-0.8, 0.8), (-0.8, 0.8)], 0.2).unwrap();
        let imm = Arc::new(Immersion::from_jets(
            domain,
            chart,
            Box::new(|x: &[Jet]| {
                let (u, v) = (&x[0], &x[1]);
                vec![u.cosh(), u.sinh(), v.cos(), v.sin()]
            }),
        ));
        let frame = Arc::new(NullNormalFrame::prescribed(
            |x: &[Jet]| {
                let (u, v) = (&x[0], &x[1]);
                vec![u.cosh() * -0.5, u.sinh() * -0.5, v.cos() * 0.5, v.sin() * 0.5]
            },
            |x: &[Jet]| {
                let (u, v) = (&x[0], &x[1]);
                vec![u.cosh() * -2.0, u.sinh() * -2.0, v.cos() * -2.0, v.sin() * -2.0]
            },
        ));
        let tau_amp = 0.3;
        let bump = Arc::new(bump_profile(&imm.domain));
        let spec = Arc::new(VariationSpec::admissible(
            ScalarField::new(2, {
                let bump = bump.clone();
                move |x: &[Jet]| bump.eval_jet(x) * tau_amp
            }),
            0.5,
        ));
        let t = 0.37;
        let def = deform(&imm, &spec, &frame, t).unwrap();
        for x in sample_lattice(&imm.domain.box_intervals, 5) {
            let base = imm.eval(&x).unwrap();
            let ell = frame.eval(&imm, &x).unwrap().ell_plus;
            let tau = t * tau_amp * bump.eval(&x);
            let expect = &base.position + &ell * tau;
            let got = def.position(&x).unwrap();
            assert!((got - expect).norm() <= 1e-11);
        }
    }

    #[test]
    fn fd_of_deform_recovers_variational_field() {
        let rec = catalog::build("ppwave-slice").unwrap();
        let phi = seeded_profile(&rec.immersion.domain, 5, 0.4);
        let spec = Arc::new(VariationSpec::admissible(phi, rec.t_range));
        let x = [0.25, -0.3];
        let fields = VariationFields::new(&spec, &rec.frame);
        let (xv, _, _) = fields.eval(&rec.immersion, &x).unwrap();
        let diff_at = |h: f64| -> AVec {
            let dp = deform(&rec.immersion, &spec, &rec.frame, h).unwrap();
            let dm = deform(&rec.immersion, &spec, &rec.frame, -h).unwrap();
            (dp.position(&x).unwrap() - dm.position(&x).unwrap()) / (2.0 * h)
        };
        let e1 = (diff_at(0.2) - &xv).norm();
        let e2 = (diff_at(0.1) - &xv).norm();
        // central difference error is O(h²)
        let ratio = e1 / e2;
        assert!((2.5..6.0).contains(&ratio), "O(h²) ratio {ratio} ({e1:e} vs {e2:e})");
        assert!(e2 <= 2e-3);
    }

    #[test]
    fn vol_curve_flat_for_zero_profile_and_concave_on_lightcone() {
        let rec = catalog::build("lightcone-flat").unwrap();
        let grid = grid_for(&rec.immersion, 10);
        let zero = Arc::new(VariationSpec::admissible(
            ScalarField::constant(2, 0.0),
            rec.t_range,
        ));
        let ts: Vec<f64> = (-4..=4).map(|k| 0.08 * k as f64).collect();
        let flat_curve = vol_curve(&rec.immersion, &zero, &rec.frame, &grid, &ts).unwrap();
        let v0 = flat_curve[4].1;
        for (_, v) in &flat_curve {
            assert!((v - v0).abs() <= 1e-12);
        }

        let spec = bump_spec(&rec.immersion, rec.t_range);
        let curve = vol_curve(&rec.immersion, &spec, &rec.frame, &grid, &ts).unwrap();
        for w in curve.windows(3) {
            let dd = w[2].1 - 2.0 * w[1].1 + w[0].1;
            assert!(dd <= 0.0, "discrete second difference {dd} > 0");
        }
        assert!(curve[4].1 > curve[0].1 && curve[4].1 > curve[8].1);
    }

    #[test]
    fn vol_curve_constant_on_horosphere() {
        let rec = catalog::build("horosphere").unwrap();
        let grid = grid_for(&rec.immersion, 10);
        let spec = bump_spec(&rec.immersion, rec.t_range);
        let ts: Vec<f64> = (-3..=3).map(|k| 0.03 * k as f64).collect();
        let curve = vol_curve(&rec.immersion, &spec, &rec.frame, &grid, &ts).unwrap();
        let v0 = curve[3].1;
        for (_, v) in &curve {
            assert!((v - v0).abs() <= 1e-9, "horosphere volume moved by {:e}", v - v0);
        }
    }

    #[test]
    fn first_variation_vanishes_for_admissible_specs_on_trapped_examples() {
        for id in ["lightcone-flat", "horosphere", "ppwave-slice"] {
            let rec = catalog::build(id).unwrap();
            let grid = grid_for(&rec.immersion, 10);
            for seed in [1u64, 2] {
                let phi = seeded_profile(&rec.immersion.domain, seed, 0.5);
                let spec = Arc::new(VariationSpec::admissible(phi, rec.t_range));
                let d =
                    variation_derivatives(&rec.immersion, &spec, &rec.frame, &grid, 0.004)
                        .unwrap();
                assert!(d.first.value.abs() <= 1e-6, "{id} seed {seed}: {:e}", d.first.value);
                let formula =
                    first_variation_formula(&rec.immersion, &spec, &rec.frame, &grid).unwrap();
                assert!(formula.abs() <= 1e-9, "{id} seed {seed}: formula {formula:e}");
            }
        }
    }

    #[test]
    fn first_variation_fd_matches_formula_on_untrapped_sphere() {
        let (imm, frame) = catalog::round_sphere_control(1.0);
        let imm = Arc::new(imm);
        let frame = Arc::new(frame);
        let grid = grid_for(&imm, 12);
        // mixed time-like and radial normal components so ⟨X, H⟩ ≠ 0,
        // plus an acceleration with a non-vanishing ⟨X′, H⟩
        let bump = Arc::new(bump_profile(&imm.domain));
        let b2 = bump.clone();
        let x_field = VectorField::from_jets(2, move |x: &[Jet]| {
            let b = bump.eval_jet(x);
            let (th, ph) = (&x[0], &x[1]);
            vec![
                &b * 0.5,
                &(&th.sin() * &ph.cos()) * &b,
                &(&th.sin() * &ph.sin()) * &b,
                &th.cos() * &b,
            ]
        });
        let xp_field = VectorField::from_jets(2, move |x: &[Jet]| {
            let b = &b2.eval_jet(x) * 0.3;
            let (th, ph) = (&x[0], &x[1]);
            vec![
                Jet::constant(x[0].space(), 0.0),
                &(&th.sin() * &ph.cos()) * &b,
                &(&th.sin() * &ph.sin()) * &b,
                &th.cos() * &b,
            ]
        });
        let spec = Arc::new(VariationSpec::general(x_field, xp_field, 0.3));
        let d = variation_derivatives(&imm, &spec, &frame, &grid, 0.003).unwrap();
        let formula = first_variation_formula(&imm, &spec, &frame, &grid).unwrap();
        assert!(formula.abs() > 0.1, "variation should move volume: {formula}");
        assert!(
            (d.first.value - formula).abs() <= 1e-5 * formula.abs(),
            "fd {} vs formula {}",
            d.first.value,
            formula
        );
    }

    #[test]
    fn second_variation_fd_zero_for_translations() {
        // zmc-plane with its constant frame: deformation is a translation
        let rec = catalog::build("zmc-plane").unwrap();
        let grid = grid_for(&rec.immersion, 8);
        let spec = bump_spec(&rec.immersion, rec.t_range);
        let d = variation_derivatives(&rec.immersion, &spec, &rec.frame, &grid, 0.004).unwrap();
        assert!(d.first.value.abs() <= 1e-10);
        assert!(d.second.value.abs() <= 1e-8);
        assert!(d.second.cancellation_warning);
    }

    #[test]
    fn characteristic_terms_vanish_in_general_formula() {
        // for X = φℓ₊: the normal-gradient term and the divergence² term
        // both vanish identically
        for id in ["lightcone-flat", "ppwave-slice", "horosphere"] {
            let rec = catalog::build(id).unwrap();
            let grid = grid_for(&rec.immersion, 10);
            let phi = seeded_profile(&rec.immersion.domain, 11, 0.5);
            let spec = Arc::new(VariationSpec::admissible(phi, rec.t_range));
            let g =
                second_variation_general_formula(&rec.immersion, &spec, &rec.frame, &grid)
                    .unwrap();
            assert!(g.terms[1].abs() <= 1e-8, "{id}: T2 = {:e}", g.terms[1]);
            assert!(g.terms[3].abs() <= 1e-8, "{id}: T4 = {:e}", g.terms[3]);
        }
    }

    #[test]
    fn zero_fields_give_zero_everything() {
        let rec = catalog::build("lightcone-flat").unwrap();
        let grid = grid_for(&rec.immersion, 8);
        let zero = Arc::new(VariationSpec::admissible(
            ScalarField::constant(2, 0.0),
            rec.t_range,
        ));
        let d = variation_derivatives(&rec.immersion, &zero, &rec.frame, &grid, 0.004).unwrap();
        assert_eq!(d.first.value, 0.0);
        assert_eq!(d.second.value, 0.0);
        let g = second_variation_general_formula(&rec.immersion, &zero, &rec.frame, &grid)
            .unwrap();
        assert_eq!(g.total, 0.0);
    }

    #[test]
    fn characteristic_formula_matches_fd_on_lightcone() {
        let rec = catalog::build("lightcone-flat").unwrap();
        let grid = grid_for(&rec.immersion, 12);
        let phi = seeded_profile(&rec.immersion.domain, 3, 0.6);
        let spec = Arc::new(VariationSpec::admissible(phi, rec.t_range));
        let c = second_variation_characteristic_formula(&rec.immersion, &spec, &rec.frame, &grid)
            .unwrap();
        assert!(c.value < -1e-4, "strictly negative, got {}", c.value);
        assert!(c.relative_gap <= 1e-6, "gap {:e}", c.relative_gap);
        let d = variation_derivatives(&rec.immersion, &spec, &rec.frame, &grid, 0.004).unwrap();
        assert!(
            (d.second.value - c.value).abs() <= 1e-3 * c.value.abs(),
            "fd {} vs formula {}",
            d.second.value,
            c.value
        );
        // tr(A₊²) = 1/2 on the cylinder cut: value must equal −½∫φ²
        let half_phi2 = grid
            .integrate(|x| {
                let p = match &*spec {
                    VariationSpec::Characteristic { tau, .. } => tau.phi().eval(x),
                    _ => unreachable!(),
                };
                0.5 * p * p
            });
        assert!((c.value + half_phi2).abs() <= 1e-9 * (1.0 + half_phi2.abs()));
    }

    #[test]
    fn characteristic_formula_on_horosphere_is_zero() {
        let rec = catalog::build("horosphere").unwrap();
        let grid = grid_for(&rec.immersion, 10);
        let phi = seeded_profile(&rec.immersion.domain, 9, 0.5);
        let spec = Arc::new(VariationSpec::admissible(phi, rec.t_range));
        let c = second_variation_characteristic_formula(&rec.immersion, &spec, &rec.frame, &grid)
            .unwrap();
        assert!(c.value.abs() <= 1e-10, "{:e}", c.value);
    }

    #[test]
    fn characteristic_formula_matches_fd_on_ppwave_via_ricci_term() {
        let rec = catalog::build("ppwave-slice").unwrap();
        let grid = grid_for(&rec.immersion, 10);
        let phi = seeded_profile(&rec.immersion.domain, 17, 0.5);
        let spec = Arc::new(VariationSpec::admissible(phi, rec.t_range));
        let c = second_variation_characteristic_formula(&rec.immersion, &spec, &rec.frame, &grid)
            .unwrap();
        // A₊ = 0 on the slice: the Ricci term alone drives the value, and
        // the chart passes the NEC so the sign is non-positive
        assert!(c.value < 0.0);
        let d = variation_derivatives(&rec.immersion, &spec, &rec.frame, &grid, 0.0035).unwrap();
        assert!(
            (d.second.value - c.value).abs() <= 1e-3 * c.value.abs(),
            "fd {} vs formula {}",
            d.second.value,
            c.value
        );
        assert!(c.relative_gap <= 1e-6, "gap vs general formula {:e}", c.relative_gap);
    }

    #[test]
    fn general_formula_matches_fd_on_untrapped_sphere() {
        let (imm, frame) = catalog::round_sphere_control(1.0);
        let imm = Arc::new(imm);
        let frame = Arc::new(frame);
        let grid = grid_for(&imm, 12);
        let bump = Arc::new(bump_profile(&imm.domain));
        let b2 = bump.clone();
        let x_field = VectorField::from_jets(2, move |x: &[Jet]| {
            let sp = x[0].space();
            let b = bump.eval_jet(x);
            vec![b, Jet::constant(sp, 0.0), Jet::constant(sp, 0.0), Jet::constant(sp, 0.0)]
        });
        let xp_field = VectorField::from_jets(2, move |x: &[Jet]| {
            let b = &b2.eval_jet(x) * 0.3;
            let (th, ph) = (&x[0], &x[1]);
            vec![
                Jet::constant(x[0].space(), 0.0),
                &(&th.sin() * &ph.cos()) * &b,
                &(&th.sin() * &ph.sin()) * &b,
                &th.cos() * &b,
            ]
        });
        let spec = Arc::new(VariationSpec::general(x_field, xp_field, 0.3));
        let g = second_variation_general_formula(&imm, &spec, &frame, &grid).unwrap();
        let d = variation_derivatives(&imm, &spec, &frame, &grid, 0.003).unwrap();
        assert!(
            (d.second.value - g.total).abs() <= 1e-3 * g.total.abs().max(1e-2),
            "fd {} vs formula {}",
            d.second.value,
            g.total
        );
        // the acceleration term must actually participate
        assert!(g.terms[4].abs() > 1e-3, "T5 = {:e}", g.terms[4]);
    }

    #[test]
    fn characteristic_operator_is_zeroth_order_in_phi() {
        let rec = catalog::build("lightcone-flat").unwrap();
        let grid = grid_for(&rec.immersion, 8);
        let base_phi = seeded_profile(&rec.immersion.domain, 21, 0.5);
        let spec = Arc::new(VariationSpec::admissible(base_phi, rec.t_range));
        let v1 = second_variation_characteristic_formula(&rec.immersion, &spec, &rec.frame, &grid)
            .unwrap()
            .value;
        for c in [0.5, 2.0, 10.0] {
            let phi_c = {
                let f = seeded_profile(&rec.immersion.domain, 21, 0.5);
                ScalarField::new(2, move |x: &[Jet]| f.eval_jet(x) * c)
            };
            let spec_c = Arc::new(VariationSpec::admissible(phi_c, rec.t_range));
            let vc =
                second_variation_characteristic_formula(&rec.immersion, &spec_c, &rec.frame, &grid)
                    .unwrap()
                    .value;
            let rel = (vc - c * c * v1).abs() / (c * c * v1).abs();
            assert!(rel <= 1e-10, "c = {c}: relative deviation {rel:e}");
        }
    }

    #[test]
    fn cached_engine_agrees_with_reference_routes() {
        for id in ["lightcone-flat", "ppwave-slice"] {
            let rec = catalog::build(id).unwrap();
            let grid = grid_for(&rec.immersion, 8);
            let engine = VolumeEngine::new(&rec.immersion, &rec.frame, &grid).unwrap();
            let phi = seeded_profile(&rec.immersion.domain, 13, 0.5);
            let spec = Arc::new(VariationSpec::admissible(phi, rec.t_range));

            for t in [0.0, 0.11, -0.27] {
                let direct = deform(&rec.immersion, &spec, &rec.frame, t)
                    .unwrap()
                    .volume(&grid)
                    .unwrap();
                let cached = engine.volume(&spec, t).unwrap();
                assert!((direct - cached).abs() <= 1e-13 * (1.0 + direct.abs()), "{id} t={t}");
            }

            let d_ref =
                variation_derivatives(&rec.immersion, &spec, &rec.frame, &grid, 0.004).unwrap();
            let d_eng = engine.derivatives(&spec, 0.004).unwrap();
            assert!((d_ref.second.value - d_eng.second.value).abs() <= 1e-10);

            let c_ref = second_variation_characteristic_formula(
                &rec.immersion,
                &spec,
                &rec.frame,
                &grid,
            )
            .unwrap();
            let c_eng = engine.characteristic_second_variation(&spec).unwrap();
            assert!(
                (c_ref.value - c_eng.value).abs() <= 1e-12 * (1.0 + c_ref.value.abs()),
                "{id}: characteristic {} vs {}",
                c_ref.value,
                c_eng.value
            );
            for (a, b) in c_ref.general.terms.iter().zip(&c_eng.general.terms) {
                assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{id}: {a} vs {b}");
            }

            let f_ref =
                first_variation_formula(&rec.immersion, &spec, &rec.frame, &grid).unwrap();
            let f_eng = engine.first_variation_formula(&spec).unwrap();
            assert!((f_ref - f_eng).abs() <= 1e-12);
        }
    }

    #[test]
    fn characteristic_formula_rejects_general_specs() {
        let rec = catalog::build("zmc-plane").unwrap();
        let grid = grid_for(&rec.immersion, 6);
        let x_field = VectorField::from_plain(|_: &[f64]| AVec::zeros(4));
        let xp_field = VectorField::from_plain(|_: &[f64]| AVec::zeros(4));
        let spec = VariationSpec::general(x_field, xp_field, 0.3);
        assert!(matches!(
            second_variation_characteristic_formula(&rec.immersion, &spec, &rec.frame, &grid),
            Err(GeomError::NotCharacteristic)
        ));
    }
}
