//! Null normal frames, null expansions, shape operators, and the
//! light-cone dual map.
//!
//! For a space-like codimension-2 immersion the normal plane at each point
//! is Lorentzian and carries exactly two null rays. A [`NullNormalFrame`]
//! fixes sections ℓ₊, ℓ₋ of those rays normalized by
//!
//! ⟨ℓ₊,ℓ₊⟩ = ⟨ℓ₋,ℓ₋⟩ = 0, ⟨ℓ₊,ℓ₋⟩ = −2,
//!
//! with a residual log-rescale gauge ℓ₊ ↦ e^λ ℓ₊, ℓ₋ ↦ e^{−λ} ℓ₋. The
//! null expansions are θ± = ⟨H, ℓ±⟩ and the shape operators satisfy
//! ⟨A± X, Y⟩ = ⟨II(X,Y), ℓ±⟩ = −⟨∇̄_X ℓ±, Y⟩; tr(A±) = θ± holds
//! identically and is asserted everywhere by the test suites. An immersion
//! is marginally trapped exactly when θ⁺ vanishes.

use crate::error::{GeomError, Result};
use crate::fields::ScalarField;
use crate::immersion::Immersion;
use crate::jet::Jet;
use crate::{AMat, AVec};
use std::sync::Arc;

pub type FrameJetFn = Box<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NullSign {
    Plus,
    Minus,
}

/// The pair (ℓ₊, ℓ₋) of null normal fields along an immersion.
pub enum NullNormalFrame {
    /// Closed-form sections (every catalog example), with exact surface
    /// derivatives through jets.
    Prescribed { plus: FrameJetFn, minus: FrameJetFn },
    /// Pointwise construction from the normal plane; surface derivatives by
    /// central differences at step `h`.
    Constructed { seed_orientation: Option<AVec>, h: f64 },
    /// Gauge-transformed frame: ℓ₊ ↦ e^λ ℓ₊, ℓ₋ ↦ e^{−λ} ℓ₋.
    Gauged { inner: Box<NullNormalFrame>, lambda: Arc<ScalarField> },
}

/// Frame vectors at one parameter point.
#[derive(Debug, Clone)]
pub struct FrameSample {
    pub ell_plus: AVec,
    pub ell_minus: AVec,
}

impl NullNormalFrame {
    pub fn prescribed(
        plus: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
        minus: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    ) -> NullNormalFrame {
        NullNormalFrame::Prescribed { plus: Box::new(plus), minus: Box::new(minus) }
    }

    pub fn constructed(seed_orientation: Option<AVec>) -> NullNormalFrame {
        NullNormalFrame::Constructed { seed_orientation, h: 1e-5 }
    }

    /// Apply the log-rescale gauge λ.
    pub fn with_gauge(self, lambda: ScalarField) -> NullNormalFrame {
        NullNormalFrame::Gauged { inner: Box::new(self), lambda: Arc::new(lambda) }
    }

    pub fn eval(&self, imm: &Immersion, x: &[f64]) -> Result<FrameSample> {
        match self {
            NullNormalFrame::Prescribed { plus, minus } => {
                let vars = Jet::variables(imm.jet_space(), x);
                let p = plus(&vars);
                let m = minus(&vars);
                Ok(FrameSample {
                    ell_plus: AVec::from_iterator(p.len(), p.iter().map(|j| j.value())),
                    ell_minus: AVec::from_iterator(m.len(), m.iter().map(|j| j.value())),
                })
            }
            NullNormalFrame::Constructed { seed_orientation, .. } => {
                build_null_frame(imm, x, seed_orientation.as_ref())
            }
            NullNormalFrame::Gauged { inner, lambda } => {
                let base = inner.eval(imm, x)?;
                let f = lambda.eval(x).exp();
                Ok(FrameSample { ell_plus: base.ell_plus * f, ell_minus: base.ell_minus / f })
            }
        }
    }

    /// Frame vectors together with their surface partials ∂_k ℓ±.
    pub fn eval_with_jacobian(
        &self,
        imm: &Immersion,
        x: &[f64],
    ) -> Result<(FrameSample, Vec<AVec>, Vec<AVec>)> {
        match self {
            NullNormalFrame::Prescribed { plus, minus } => {
                let vars = Jet::variables(imm.jet_space(), x);
                let p = plus(&vars);
                let mi = minus(&vars);
                let n = imm.n();
                let md = p.len();
                let sample = FrameSample {
                    ell_plus: AVec::from_iterator(md, p.iter().map(|j| j.value())),
                    ell_minus: AVec::from_iterator(md, mi.iter().map(|j| j.value())),
                };
                let dplus = (0..n)
                    .map(|k| AVec::from_iterator(md, p.iter().map(|j| j.d1(k))))
                    .collect();
                let dminus = (0..n)
                    .map(|k| AVec::from_iterator(md, mi.iter().map(|j| j.d1(k))))
                    .collect();
                Ok((sample, dplus, dminus))
            }
            NullNormalFrame::Constructed { h, .. } => {
                let sample = self.eval(imm, x)?;
                let n = imm.n();
                let mut dplus = Vec::with_capacity(n);
                let mut dminus = Vec::with_capacity(n);
                for k in 0..n {
                    let d = |h: f64| -> Result<(AVec, AVec)> {
                        let mut xp = x.to_vec();
                        xp[k] += h;
                        let mut xm = x.to_vec();
                        xm[k] -= h;
                        let sp = self.eval(imm, &xp)?;
                        let sm = self.eval(imm, &xm)?;
                        Ok((
                            (sp.ell_plus - sm.ell_plus) / (2.0 * h),
                            (sp.ell_minus - sm.ell_minus) / (2.0 * h),
                        ))
                    };
                    let (p1, m1) = d(*h)?;
                    let (p2, m2) = d(*h / 2.0)?;
                    dplus.push((p2 * 4.0 - p1) / 3.0);
                    dminus.push((m2 * 4.0 - m1) / 3.0);
                }
                Ok((sample, dplus, dminus))
            }
            NullNormalFrame::Gauged { inner, lambda } => {
                let (base, dp, dm) = inner.eval_with_jacobian(imm, x)?;
                let (lam, grad) = lambda.eval_with_grad(x);
                let f = lam.exp();
                let sample = FrameSample {
                    ell_plus: &base.ell_plus * f,
                    ell_minus: &base.ell_minus / f,
                };
                let dplus = dp
                    .iter()
                    .zip(&grad)
                    .map(|(d, &g)| (d + &base.ell_plus * g) * f)
                    .collect();
                let dminus = dm
                    .iter()
                    .zip(&grad)
                    .map(|(d, &g)| (d - &base.ell_minus * g) / f)
                    .collect();
                Ok((sample, dplus, dminus))
            }
        }
    }

    /// Max residuals of the frame conditions at one point:
    /// [|⟨ℓ₊,ℓ₊⟩|, |⟨ℓ₋,ℓ₋⟩|, |⟨ℓ₊,ℓ₋⟩ + 2|, max_i |⟨ℓ±, ∂_i f⟩|].
    pub fn invariant_residuals(&self, imm: &Immersion, x: &[f64]) -> Result<[f64; 4]> {
        let data = imm.eval(x)?;
        let s = self.eval(imm, x)?;
        let p = data.position.as_slice();
        let pp = imm.chart.pairing(p, &s.ell_plus, &s.ell_plus);
        let mm = imm.chart.pairing(p, &s.ell_minus, &s.ell_minus);
        let pm = imm.chart.pairing(p, &s.ell_plus, &s.ell_minus);
        let mut tangency = 0.0f64;
        for d in &data.partials {
            tangency = tangency.max(imm.chart.pairing(p, &s.ell_plus, d).abs());
            tangency = tangency.max(imm.chart.pairing(p, &s.ell_minus, d).abs());
        }
        Ok([pp.abs(), mm.abs(), (pm + 2.0).abs(), tangency])
    }
}

/// Construct the null normal frame at one point from the normal plane.
///
/// The two null rays of the plane come from the normal Gram matrix; each is
/// scaled to pair −1 with the chart's time-like frame vector
/// (future-pointing, deterministic gauge). When the mean curvature vector
/// does not vanish, ℓ₊ is the ray annihilating ⟨·, H⟩ (which is the ray
/// parallel to H for a marginally trapped immersion); otherwise the ray
/// with the larger pairing against `seed_orientation` wins. With no seed
/// the +√disc branch of the quadratic is the deterministic fallback.
pub fn build_null_frame(
    imm: &Immersion,
    x: &[f64],
    seed_orientation: Option<&AVec>,
) -> Result<FrameSample> {
    let data = imm.eval(x)?;
    let im = imm.induced_metric_from(&data, x)?;
    let p = data.position.as_slice();
    let m = imm.chart.dim;
    let n = imm.n();

    // Euclidean-orthonormal basis of the normal plane: project the
    // coordinate basis g-orthogonally onto the normal space, then take the
    // two largest candidates by pivoted Gram–Schmidt
    let gx = imm.chart.metric_at(p);
    let mut proj = AMat::identity(m, m);
    for i in 0..n {
        for j in 0..n {
            let gj = &gx * &data.partials[j];
            proj -= (&data.partials[i] * gj.transpose()) * im.inv[(i, j)];
        }
    }
    let mut candidates: Vec<AVec> = (0..m).map(|mu| proj.column(mu).into_owned()).collect();
    let mut basis: Vec<AVec> = Vec::with_capacity(2);
    for _ in 0..2 {
        for c in &mut candidates {
            for e in &basis {
                let d = c.dot(e);
                *c -= e * d;
            }
        }
        let (best, norm) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if norm < 1e-8 {
            return Err(GeomError::RankDeficient { node: x.to_vec() });
        }
        basis.push(&candidates[best] / norm);
    }
    let (n1, n2) = (basis[0].clone(), basis[1].clone());

    // normal Gram and its null directions
    let a = imm.chart.pairing(p, &n1, &n1);
    let b = imm.chart.pairing(p, &n1, &n2);
    let c = imm.chart.pairing(p, &n2, &n2);
    let det = a * c - b * b;
    if det >= -1e-12 {
        return Err(GeomError::NormalPlaneNotLorentzian { node: x.to_vec(), det });
    }
    let disc = (b * b - a * c).sqrt();
    // roots of a s² + 2 b s t + c t² = 0, taking the better-conditioned form
    let root = |sign: f64| -> AVec {
        let (s, t) = if a.abs() >= c.abs() {
            (-b + sign * disc, a)
        } else {
            (c, -b - sign * disc)
        };
        let norm = (s * s + t * t).sqrt();
        &n1 * (s / norm) + &n2 * (t / norm)
    };
    let mut branch_pos = root(1.0);
    let mut branch_neg = root(-1.0);

    // future-pointing normalization: ⟨d, e_time⟩ = −1
    let frame = imm.chart.orthonormal_frame(p)?;
    let e_time = &frame[0];
    for d in [&mut branch_pos, &mut branch_neg] {
        let pair = imm.chart.pairing(p, d, e_time);
        if pair.abs() < 1e-12 {
            return Err(GeomError::NormalPlaneNotLorentzian { node: x.to_vec(), det });
        }
        *d /= -pair;
    }

    // selection of ℓ₊
    let ii = imm.second_fundamental_form_from(&data, &im, x)?;
    let h = crate::immersion::mean_curvature_from_parts(&im, &ii);
    let pick_pos = if h.norm() > 1e-8 {
        let pair_pos = imm.chart.pairing(p, &branch_pos, &h).abs();
        let pair_neg = imm.chart.pairing(p, &branch_neg, &h).abs();
        pair_pos <= pair_neg
    } else {
        match seed_orientation {
            Some(seed) => {
                imm.chart.pairing(p, &branch_pos, seed)
                    >= imm.chart.pairing(p, &branch_neg, seed)
            }
            None => true,
        }
    };
    let (ell_plus, other) = if pick_pos {
        (branch_pos, branch_neg)
    } else {
        (branch_neg, branch_pos)
    };
    // enforce ⟨ℓ₊, ℓ₋⟩ = −2 exactly by construction
    let cross = imm.chart.pairing(p, &ell_plus, &other);
    let ell_minus = other * (-2.0 / cross);
    Ok(FrameSample { ell_plus, ell_minus })
}

/// Require ⟨H, H⟩ ≈ 0 at `x` (a marginally trapped immersion has null H).
pub fn require_mean_curvature_null(imm: &Immersion, x: &[f64], tol: f64) -> Result<()> {
    let data = imm.eval(x)?;
    let h = imm.mean_curvature_vector(x)?;
    let pairing = imm.chart.pairing(data.position.as_slice(), &h, &h);
    if pairing.abs() > tol {
        return Err(GeomError::MeanCurvatureNotNull { node: x.to_vec(), pairing });
    }
    Ok(())
}

/// Null expansion θ± = ⟨H, ℓ±⟩ plus the residual of the decomposition
/// H = −(θ⁻ ℓ₊ + θ⁺ ℓ₋)/2.
#[derive(Debug, Clone)]
pub struct ThetaSample {
    pub value: f64,
    pub decomposition_residual: f64,
}

pub fn theta(
    imm: &Immersion,
    frame: &NullNormalFrame,
    x: &[f64],
    sign: NullSign,
) -> Result<ThetaSample> {
    let data = imm.eval(x)?;
    let im = imm.induced_metric_from(&data, x)?;
    let ii = imm.second_fundamental_form_from(&data, &im, x)?;
    let h = crate::immersion::mean_curvature_from_parts(&im, &ii);
    let s = frame.eval(imm, x)?;
    let p = data.position.as_slice();
    let tp = imm.chart.pairing(p, &h, &s.ell_plus);
    let tm = imm.chart.pairing(p, &h, &s.ell_minus);
    let recombined = -(&s.ell_plus * tm + &s.ell_minus * tp) / 2.0;
    let residual = (&h - recombined).norm();
    Ok(ThetaSample {
        value: match sign {
            NullSign::Plus => tp,
            NullSign::Minus => tm,
        },
        decomposition_residual: residual,
    })
}

/// Shape operator A± in the coordinate basis: A± = g⁻¹ B± with
/// B±_ij = ⟨II_ij, ℓ±⟩. Primary (second-derivative) route.
pub fn shape_operator(
    imm: &Immersion,
    frame: &NullNormalFrame,
    x: &[f64],
    sign: NullSign,
) -> Result<AMat> {
    let data = imm.eval(x)?;
    let im = imm.induced_metric_from(&data, x)?;
    let ii = imm.second_fundamental_form_from(&data, &im, x)?;
    let s = frame.eval(imm, x)?;
    let ell = match sign {
        NullSign::Plus => &s.ell_plus,
        NullSign::Minus => &s.ell_minus,
    };
    let n = imm.n();
    let p = data.position.as_slice();
    let mut b = AMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            b[(i, j)] = imm.chart.pairing(p, &ii[i][j], ell);
        }
    }
    Ok(&im.inv * b)
}

/// Independent derivative route: ⟨A± X, Y⟩ = −⟨∇̄_X ℓ±, Y⟩, with the frame
/// differentiated along the surface plus a Christoffel correction. Serves
/// as a cross-check of [`shape_operator`].
pub fn shape_operator_via_nabla(
    imm: &Immersion,
    frame: &NullNormalFrame,
    x: &[f64],
    sign: NullSign,
) -> Result<AMat> {
    let data = imm.eval(x)?;
    let im = imm.induced_metric_from(&data, x)?;
    let (s, dplus, dminus) = frame.eval_with_jacobian(imm, x)?;
    let (ell, dell) = match sign {
        NullSign::Plus => (&s.ell_plus, &dplus),
        NullSign::Minus => (&s.ell_minus, &dminus),
    };
    let n = imm.n();
    let m = imm.chart.dim;
    let p = data.position.as_slice();
    let gamma = imm.chart.christoffel(p)?;
    let mut lowered = AMat::zeros(n, n);
    for i in 0..n {
        // ∇̄_{∂_i} ℓ = ∂_i ℓ + Γ(∂_i f, ℓ)
        let mut nabla = dell[i].clone();
        for lam in 0..m {
            let mut corr = 0.0;
            for mu in 0..m {
                for nu in 0..m {
                    corr += gamma.get(lam, mu, nu) * data.partials[i][mu] * ell[nu];
                }
            }
            nabla[lam] += corr;
        }
        for j in 0..n {
            lowered[(i, j)] = -imm.chart.pairing(p, &nabla, &data.partials[j]);
        }
    }
    Ok(&im.inv * lowered)
}

/// Marginally-trapped sweep over a point set.
#[derive(Debug, Clone)]
pub struct TrappedReport {
    pub max_theta_plus: f64,
    pub max_trace_a_plus: f64,
    pub max_decomposition_residual: f64,
    pub tol: f64,
    pub pass: bool,
}

pub fn marginally_trapped_check(
    imm: &Immersion,
    frame: &NullNormalFrame,
    points: &[Vec<f64>],
    tol_mt: f64,
) -> Result<TrappedReport> {
    let mut max_tp = 0.0f64;
    let mut max_tr = 0.0f64;
    let mut max_res = 0.0f64;
    for x in points {
        let th = theta(imm, frame, x, NullSign::Plus)?;
        let a = shape_operator(imm, frame, x, NullSign::Plus)?;
        max_tp = max_tp.max(th.value.abs());
        max_res = max_res.max(th.decomposition_residual);
        max_tr = max_tr.max(a.trace().abs());
    }
    Ok(TrappedReport {
        max_theta_plus: max_tp,
        max_trace_a_plus: max_tr,
        max_decomposition_residual: max_res,
        tol: tol_mt,
        pass: max_tp <= tol_mt,
    })
}

/// Dual map of a light-cone immersion p: the unique q with ⟨q,q⟩ = 0,
/// ⟨p,q⟩ = 1 and ⟨∂_i p, q⟩ = 0. The n+1 linear conditions leave the
/// one-parameter family q₀ + s·p, and ⟨q,q⟩ = 0 fixes s = −⟨q₀,q₀⟩/2
/// (using ⟨p,q₀⟩ = 1 and ⟨p,p⟩ = 0).
pub fn dual_map(imm: &Immersion, x: &[f64]) -> Result<AVec> {
    let data = imm.eval(x)?;
    let p = data.position.as_slice();
    let m = imm.chart.dim;
    let n = imm.n();
    let pp = imm.chart.pairing(p, &data.position, &data.position);
    if pp.abs() > 1e-10 {
        return Err(GeomError::Config(format!(
            "dual map needs a light-cone immersion: <p,p> = {pp:e} at {x:?}"
        )));
    }
    let gx = imm.chart.metric_at(p);
    let mut a = AMat::zeros(n + 1, m);
    let mut rhs = AVec::zeros(n + 1);
    let gp = &gx * &data.position;
    for col in 0..m {
        a[(0, col)] = gp[col];
    }
    rhs[0] = 1.0;
    for i in 0..n {
        let gi = &gx * &data.partials[i];
        for col in 0..m {
            a[(i + 1, col)] = gi[col];
        }
    }
    // least-norm particular solution via normal equations: q₀ = Aᵀ(AAᵀ)⁻¹rhs
    let aat = &a * a.transpose();
    let lu = aat.lu();
    let y = lu
        .solve(&rhs)
        .ok_or_else(|| GeomError::DualMapSingular { node: x.to_vec() })?;
    let q0 = a.transpose() * y;
    let q0q0 = imm.chart.pairing(p, &q0, &q0);
    Ok(&q0 + &data.position * (-q0q0 / 2.0))
}

/// Proportionality residual max_{i<j} |a_i b_j − a_j b_i| / (‖a‖ ‖b‖);
/// zero exactly when a ∥ b.
pub fn wedge_residual(a: &AVec, b: &AVec) -> f64 {
    let scale = a.norm() * b.norm();
    let mut worst = 0.0f64;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            worst = worst.max((a[i] * b[j] - a[j] * b[i]).abs());
        }
    }
    if scale > 0.0 {
        worst / scale
    } else {
        worst
    }
}
