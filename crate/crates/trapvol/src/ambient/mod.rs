//! Local Lorentzian ambient geometry.
//!
//! An [`AmbientChart`] is a metric with signature (−,+,…,+) on an open
//! coordinate box, given by a closure for g_{μν} plus, when available,
//! closed-form closures for its first and second coordinate derivatives.
//! Charts without closed-form derivatives fall back to central finite
//! differences with one Richardson level (curvature needs two derivative
//! orders, and naive differencing loses too many digits).
//!
//! Conventions, fixed once and checked by the test oracles rather than by
//! external tables:
//!
//! * curvature  R(X,Y)Z = ∇̄_X∇̄_Y Z − ∇̄_Y∇̄_X Z − ∇̄_{[X,Y]}Z,
//!   lowered as R(X,Y,Z,W) = ⟨R(X,Y)Z, W⟩;
//! * Ricci      Ric(X,Y) = −R(X,e₁,e₁,Y) + Σ_{i≥2} R(X,eᵢ,eᵢ,Y) over an
//!   orthonormal frame with ⟨e₁,e₁⟩ = −1, which coincides with the inverse
//!   metric contraction of the middle slots.
//!
//! Everything here is a pure function of immutable chart data and is safe
//! to call from multiple threads.

pub mod charts;

use crate::error::{GeomError, Result};
use crate::tensor::{Rank3, Rank4};
use crate::{AMat, AVec};
use rand::{Rng, SeedableRng};

pub type MetricFn = Box<dyn Fn(&[f64]) -> AMat + Send + Sync>;
pub type MetricGradFn = Box<dyn Fn(&[f64]) -> Rank3 + Send + Sync>;
pub type MetricHessFn = Box<dyn Fn(&[f64]) -> Rank4 + Send + Sync>;
pub type ChristoffelFn = Box<dyn Fn(&[f64]) -> Rank3 + Send + Sync>;
pub type ChristoffelGradFn = Box<dyn Fn(&[f64]) -> Rank4 + Send + Sync>;

/// A local Lorentzian metric on an open coordinate box.
pub struct AmbientChart {
    pub dim: usize,
    pub name: String,
    pub domain_box: Vec<(f64, f64)>,
    /// FD step for metric derivatives when no closed form is supplied.
    pub h_g: f64,
    /// Geodesic integrator steps per unit affine parameter.
    pub n_geo: usize,
    metric: MetricFn,
    metric_grad: Option<MetricGradFn>,
    metric_hess: Option<MetricHessFn>,
    christoffel_cf: Option<ChristoffelFn>,
    christoffel_grad_cf: Option<ChristoffelGradFn>,
    /// Christoffel symbols vanish identically (straight-line geodesics).
    flat: bool,
    /// Metric components do not depend on the point.
    constant_metric: Option<AMat>,
}

/// Riemann and Ricci data at one point, in the coordinate basis.
#[derive(Debug, Clone)]
pub struct CurvatureSample {
    pub point: Vec<f64>,
    /// Fully lowered R(∂μ, ∂ν, ∂ρ, ∂σ), indices in that order.
    pub riemann: Rank4,
    /// Ric_{μν} from the inverse-metric contraction of the middle slots.
    pub ricci: AMat,
}

impl CurvatureSample {
    /// Contract the lowered curvature with four vectors.
    pub fn contract(&self, a: &AVec, b: &AVec, c: &AVec, d: &AVec) -> f64 {
        let m = self.riemann.dim;
        let mut total = 0.0;
        for mu in 0..m {
            if a[mu] == 0.0 {
                continue;
            }
            for nu in 0..m {
                if b[nu] == 0.0 {
                    continue;
                }
                for rho in 0..m {
                    for sig in 0..m {
                        total += self.riemann.get(mu, nu, rho, sig)
                            * a[mu]
                            * b[nu]
                            * c[rho]
                            * d[sig];
                    }
                }
            }
        }
        total
    }

    pub fn ricci_pair(&self, x: &AVec, y: &AVec) -> f64 {
        (x.transpose() * &self.ricci * y)[(0, 0)]
    }
}

/// Endpoint of a geodesic integration.
#[derive(Debug, Clone)]
pub struct GeodesicState {
    pub position: AVec,
    pub velocity: AVec,
    pub affine_parameter: f64,
}

/// Pointwise null-energy-condition sweep result.
#[derive(Debug, Clone)]
pub struct NecReport {
    pub min_value: f64,
    pub min_point: Vec<f64>,
    pub violations: Vec<(Vec<f64>, f64)>,
    pub directions_per_point: usize,
    pub tol: f64,
    pub pass: bool,
}

impl AmbientChart {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        dim: usize,
        name: impl Into<String>,
        domain_box: Vec<(f64, f64)>,
        metric: MetricFn,
        metric_grad: Option<MetricGradFn>,
        metric_hess: Option<MetricHessFn>,
    ) -> AmbientChart {
        assert_eq!(domain_box.len(), dim);
        AmbientChart {
            dim,
            name: name.into(),
            domain_box,
            h_g: 1e-4,
            n_geo: 64,
            metric,
            metric_grad,
            metric_hess,
            christoffel_cf: None,
            christoffel_grad_cf: None,
            flat: false,
            constant_metric: None,
        }
    }

    pub fn with_christoffel(
        mut self,
        gamma: ChristoffelFn,
        gamma_grad: ChristoffelGradFn,
    ) -> Self {
        self.christoffel_cf = Some(gamma);
        self.christoffel_grad_cf = Some(gamma_grad);
        self
    }

    /// Mark the chart as having identically vanishing Christoffel symbols.
    pub fn flat_chart(mut self) -> Self {
        self.flat = true;
        self
    }

    /// Cache a point-independent metric matrix.
    pub fn constant(mut self, g: AMat) -> Self {
        self.constant_metric = Some(g);
        self
    }

    /// Drop every closed-form derivative so all derivative paths go through
    /// finite differences. Used to exercise the FD mode against the
    /// closed-form one.
    pub fn with_fd_derivatives(mut self) -> Self {
        self.metric_grad = None;
        self.metric_hess = None;
        self.christoffel_cf = None;
        self.christoffel_grad_cf = None;
        self.flat = false;
        self.constant_metric = None;
        self.name = format!("{}-fd", self.name);
        self
    }

    pub fn is_flat(&self) -> bool {
        self.flat
    }

    pub fn is_metric_constant(&self) -> bool {
        self.constant_metric.is_some()
    }

    fn fd_mode(&self) -> bool {
        self.metric_grad.is_none()
    }

    /// Margin the given operation needs from the domain boundary.
    fn margin(&self, derivative_orders: usize) -> f64 {
        if self.fd_mode() {
            (2 * derivative_orders) as f64 * self.h_g
        } else {
            0.0
        }
    }

    pub fn contains(&self, x: &[f64], margin: f64) -> bool {
        x.len() == self.dim
            && x.iter()
                .zip(&self.domain_box)
                .all(|(&xi, &(a, b))| xi > a + margin && xi < b - margin)
    }

    fn require_inside(&self, x: &[f64], margin: f64) -> Result<()> {
        if self.contains(x, margin) {
            Ok(())
        } else {
            Err(GeomError::OutsideDomain { point: x.to_vec(), margin })
        }
    }

    pub fn metric_at(&self, x: &[f64]) -> AMat {
        if let Some(g) = &self.constant_metric {
            return g.clone();
        }
        (self.metric)(x)
    }

    pub fn metric_inverse_at(&self, x: &[f64]) -> Result<AMat> {
        self.metric_at(x)
            .try_inverse()
            .ok_or_else(|| GeomError::SingularMetric { point: x.to_vec() })
    }

    /// ⟨a, b⟩ with respect to the chart metric at `x`.
    pub fn pairing(&self, x: &[f64], a: &AVec, b: &AVec) -> f64 {
        let g = self.metric_at(x);
        (a.transpose() * g * b)[(0, 0)]
    }

    /// ∂_λ g_{μν}, indexed (λ, μ, ν).
    pub fn metric_grad_at(&self, x: &[f64]) -> Rank3 {
        if self.constant_metric.is_some() {
            return Rank3::zeros(self.dim);
        }
        if let Some(f) = &self.metric_grad {
            return f(x);
        }
        let m = self.dim;
        let mut out = Rank3::zeros(m);
        for lam in 0..m {
            let d = self.fd_dir_derivative(x, lam, self.h_g);
            for mu in 0..m {
                for nu in 0..m {
                    out.set(lam, mu, nu, d[(mu, nu)]);
                }
            }
        }
        out
    }

    /// Central difference of the metric along coordinate `lam` with one
    /// Richardson level.
    fn fd_dir_derivative(&self, x: &[f64], lam: usize, h: f64) -> AMat {
        let eval = |step: f64| -> AMat {
            let mut y = x.to_vec();
            y[lam] += step;
            (self.metric)(&y)
        };
        let d = |h: f64| (eval(h) - eval(-h)) / (2.0 * h);
        (d(h / 2.0) * 4.0 - d(h)) / 3.0
    }

    /// ∂_κ ∂_λ g_{μν}, indexed (κ, λ, μ, ν).
    pub fn metric_hess_at(&self, x: &[f64]) -> Rank4 {
        if self.constant_metric.is_some() {
            return Rank4::zeros(self.dim);
        }
        if let Some(f) = &self.metric_hess {
            return f(x);
        }
        let m = self.dim;
        let h = self.h_g;
        let eval = |dx: &[(usize, f64)]| -> AMat {
            let mut y = x.to_vec();
            for &(i, s) in dx {
                y[i] += s;
            }
            (self.metric)(&y)
        };
        let mut out = Rank4::zeros(m);
        let g0 = (self.metric)(x);
        for ka in 0..m {
            for la in ka..m {
                let second = if ka == la {
                    let d2 = |h: f64| {
                        (eval(&[(ka, h)]) + eval(&[(ka, -h)]) - &g0 * 2.0) / (h * h)
                    };
                    (d2(h / 2.0) * 4.0 - d2(h)) / 3.0
                } else {
                    let cross = |h: f64| {
                        (eval(&[(ka, h), (la, h)]) - eval(&[(ka, h), (la, -h)])
                            - eval(&[(ka, -h), (la, h)])
                            + eval(&[(ka, -h), (la, -h)]))
                            / (4.0 * h * h)
                    };
                    (cross(h / 2.0) * 4.0 - cross(h)) / 3.0
                };
                for mu in 0..m {
                    for nu in 0..m {
                        out.set(ka, la, mu, nu, second[(mu, nu)]);
                        out.set(la, ka, mu, nu, second[(mu, nu)]);
                    }
                }
            }
        }
        out
    }

    /// Christoffel symbols Γ^λ_{μν}, indexed (λ, μ, ν).
    pub fn christoffel(&self, x: &[f64]) -> Result<Rank3> {
        self.require_inside(x, self.margin(1))?;
        if self.flat {
            return Ok(Rank3::zeros(self.dim));
        }
        if let Some(f) = &self.christoffel_cf {
            return Ok(f(x));
        }
        let ginv = self.metric_inverse_at(x)?;
        let dg = self.metric_grad_at(x);
        Ok(christoffel_from_parts(self.dim, &ginv, &dg))
    }

    /// ∂_κ Γ^λ_{μν}, indexed (κ, λ, μ, ν).
    pub fn christoffel_grad(&self, x: &[f64]) -> Result<Rank4> {
        self.require_inside(x, self.margin(2))?;
        if self.flat {
            return Ok(Rank4::zeros(self.dim));
        }
        if let Some(f) = &self.christoffel_grad_cf {
            return Ok(f(x));
        }
        let ginv = self.metric_inverse_at(x)?;
        let dg = self.metric_grad_at(x);
        let ddg = self.metric_hess_at(x);
        Ok(christoffel_grad_from_parts(self.dim, &ginv, &dg, &ddg))
    }

    /// Fully lowered curvature tensor and Ricci matrix at `x`.
    pub fn riemann(&self, x: &[f64]) -> Result<CurvatureSample> {
        self.require_inside(x, self.margin(2))?;
        let m = self.dim;
        if self.flat {
            return Ok(CurvatureSample {
                point: x.to_vec(),
                riemann: Rank4::zeros(m),
                ricci: AMat::zeros(m, m),
            });
        }
        let gamma = self.christoffel(x)?;
        let dgamma = self.christoffel_grad(x)?;
        let g = self.metric_at(x);
        let ginv = self.metric_inverse_at(x)?;
        let riem = riemann_lowered(m, &g, &gamma, &dgamma);
        let ricci = ricci_from_riemann(m, &ginv, &riem);
        Ok(CurvatureSample { point: x.to_vec(), riemann: riem, ricci })
    }

    /// Deterministic orthonormal frame at `x`, time-like vector first with
    /// ⟨e₁,e₁⟩ = −1. The time-like seed is the eigenvector of the unique
    /// negative metric eigenvalue (coordinate basis vectors need not be
    /// time-like anywhere, e.g. on a pp-wave chart); the space-like part is
    /// Gram–Schmidt over the coordinate basis.
    pub fn orthonormal_frame(&self, x: &[f64]) -> Result<Vec<AVec>> {
        let m = self.dim;
        let g = self.metric_at(x);
        let eig = g.clone().symmetric_eigen();
        let mut neg_idx = None;
        let mut negatives = 0;
        for (i, &lam) in eig.eigenvalues.iter().enumerate() {
            if lam < 0.0 {
                negatives += 1;
                neg_idx = Some(i);
            }
        }
        if negatives != 1 {
            return Err(GeomError::BadSignature { point: x.to_vec() });
        }
        let idx = neg_idx.unwrap();
        let mut e1: AVec = eig.eigenvectors.column(idx).into_owned();
        // deterministic sign: largest-magnitude component positive
        let k = e1.iter().enumerate().max_by(|a, b| a.1.abs().total_cmp(&b.1.abs())).unwrap().0;
        if e1[k] < 0.0 {
            e1 = -e1;
        }
        let n1 = self.pairing(x, &e1, &e1);
        e1 /= (-n1).sqrt();
        let mut frame = vec![e1];
        for i in 0..m {
            if frame.len() == m {
                break;
            }
            let mut v = AVec::zeros(m);
            v[i] = 1.0;
            // project out the frame built so far (Lorentzian pairings)
            for e in &frame {
                let ee = self.pairing(x, e, e);
                let ve = self.pairing(x, &v, e);
                v -= e * (ve / ee);
            }
            let vv = self.pairing(x, &v, &v);
            if vv <= 1e-12 {
                continue; // coordinate direction already spanned
            }
            frame.push(v / vv.sqrt());
        }
        if frame.len() != m {
            return Err(GeomError::BadSignature { point: x.to_vec() });
        }
        Ok(frame)
    }

    /// Ricci tensor evaluated through the orthonormal-frame sum
    /// −R(X,e₁,e₁,Y) + Σ_{i≥2} R(X,eᵢ,eᵢ,Y). Frame independent; equals the
    /// inverse-metric contraction held in [`CurvatureSample::ricci`].
    pub fn ricci(&self, x: &[f64], xv: &AVec, yv: &AVec) -> Result<f64> {
        let sample = self.riemann(x)?;
        let frame = self.orthonormal_frame(x)?;
        let mut total = -sample.contract(xv, &frame[0], &frame[0], yv);
        for e in frame.iter().skip(1) {
            total += sample.contract(xv, e, e, yv);
        }
        Ok(total)
    }

    /// Sweep Ric(ℓ,ℓ) over null directions at each sample point. The null
    /// samples come from boosting one fixed null vector ℓ₀ = e₁ + ê_last
    /// (rapidity 1) along a deterministic grid of unit space directions —
    /// coordinate axes, diagonals, then seeded fills up to
    /// `min_directions`. A fixed-rapidity boost keeps the samples away from
    /// degenerate null rays that a raw direction sweep would hit exactly.
    pub fn nec_check(&self, points: &[Vec<f64>], min_directions: usize, tol: f64) -> Result<NecReport> {
        let sdim = self.dim - 1;
        let dirs = unit_direction_grid(sdim, min_directions);
        let chi = 1.0f64;
        let (ch, sh) = (chi.cosh(), chi.sinh());
        let mut min_value = f64::INFINITY;
        let mut min_point = Vec::new();
        let mut violations = Vec::new();
        for p in points {
            let sample = self.riemann(p)?;
            let frame = self.orthonormal_frame(p)?;
            // ℓ₀ = e₁ + w with w the last space frame vector
            let w_idx = sdim; // frame[w_idx] is ê_last
            for d in &dirs {
                // boost along d̂ = Σ dᵢ êᵢ:  e₁ ↦ ch e₁ + sh d̂,
                // w ↦ w + (w·d̂)((ch−1) d̂ + sh e₁)
                let mut dhat = AVec::zeros(self.dim);
                for (i, &di) in d.iter().enumerate() {
                    dhat += &frame[i + 1] * di;
                }
                let wd = d[w_idx - 1]; // w·d̂ in frame components
                let mut ell = &frame[0] * (ch + sh * wd) + &frame[w_idx];
                ell += &dhat * (sh + (ch - 1.0) * wd);
                let v = sample.ricci_pair(&ell, &ell);
                if v < min_value {
                    min_value = v;
                    min_point = p.clone();
                }
                if v < -tol {
                    violations.push((p.clone(), v));
                }
            }
        }
        Ok(NecReport {
            pass: min_value >= -tol,
            min_value,
            min_point,
            violations,
            directions_per_point: dirs.len(),
            tol,
        })
    }

    /// Integrate the geodesic from `p` with initial velocity `v` to affine
    /// parameter `t_max` (fixed-step classic Runge–Kutta, no adaptivity, so
    /// reports reproduce bit-for-bit). The velocity norm is conserved to
    /// integrator tolerance and checked.
    pub fn exp_map(&self, p: &AVec, v: &AVec, t_max: f64) -> Result<GeodesicState> {
        let (state, _, _) = self.exp_map_linearized(p, v, t_max, &[], &[])?;
        Ok(state)
    }

    /// Geodesic integration carrying first-order sensitivities: `dp[k]`,
    /// `dv[k]` seed the variation of the initial position and velocity in
    /// direction `k`, and the returned vectors are the corresponding
    /// variations of the endpoint position and velocity.
    pub fn exp_map_linearized(
        &self,
        p: &AVec,
        v: &AVec,
        t_max: f64,
        dp: &[AVec],
        dv: &[AVec],
    ) -> Result<(GeodesicState, Vec<AVec>, Vec<AVec>)> {
        assert_eq!(dp.len(), dv.len());
        let m = self.dim;
        let margin = self.margin(2);
        self.require_inside(p.as_slice(), margin)?;

        if self.flat {
            // straight lines, exactly
            let pos = p + v * t_max;
            if !self.contains(pos.as_slice(), 0.0) {
                return Err(GeomError::GeodesicDomainExit { position: pos.as_slice().to_vec() });
            }
            let dpos: Vec<AVec> =
                dp.iter().zip(dv).map(|(a, b)| a + b * t_max).collect();
            let dvel: Vec<AVec> = dv.to_vec();
            return Ok((
                GeodesicState { position: pos, velocity: v.clone(), affine_parameter: t_max },
                dpos,
                dvel,
            ));
        }

        let steps = ((self.n_geo as f64) * t_max.abs()).ceil().max(1.0) as usize;
        if steps == 0 {
            return Err(GeomError::StepUnderflow { steps });
        }
        let h = t_max / steps as f64;
        let k = dp.len();

        // state layout: [pos | vel | dpos_0 | dvel_0 | ... ]
        let width = m * (2 + 2 * k);
        let mut y = vec![0.0; width];
        y[..m].copy_from_slice(p.as_slice());
        y[m..2 * m].copy_from_slice(v.as_slice());
        for i in 0..k {
            y[(2 + 2 * i) * m..(3 + 2 * i) * m].copy_from_slice(dp[i].as_slice());
            y[(3 + 2 * i) * m..(4 + 2 * i) * m].copy_from_slice(dv[i].as_slice());
        }

        let norm0 = self.pairing(p.as_slice(), v, v);

        let rhs = |y: &[f64], out: &mut [f64]| -> Result<()> {
            let pos = &y[..m];
            self.require_inside(pos, margin)
                .map_err(|_| GeomError::GeodesicDomainExit { position: pos.to_vec() })?;
            let gamma = self.christoffel(pos)?;
            let need_grad = k > 0;
            let dgamma = if need_grad { Some(self.christoffel_grad(pos)?) } else { None };
            let vel = &y[m..2 * m];
            // d pos = vel ; d vel^λ = −Γ^λ_{μν} v^μ v^ν
            out[..m].copy_from_slice(vel);
            for lam in 0..m {
                let mut acc = 0.0;
                for mu in 0..m {
                    if vel[mu] == 0.0 {
                        continue;
                    }
                    for nu in 0..m {
                        acc -= gamma.get(lam, mu, nu) * vel[mu] * vel[nu];
                    }
                }
                out[m + lam] = acc;
            }
            for i in 0..k {
                let dpos = &y[(2 + 2 * i) * m..(3 + 2 * i) * m];
                let dvel = &y[(3 + 2 * i) * m..(4 + 2 * i) * m];
                let (o1, o2) = ((2 + 2 * i) * m, (3 + 2 * i) * m);
                out[o1..o1 + m].copy_from_slice(dvel);
                let dg = dgamma.as_ref().unwrap();
                for lam in 0..m {
                    let mut acc = 0.0;
                    for mu in 0..m {
                        for nu in 0..m {
                            let vv = vel[mu] * vel[nu];
                            if vv != 0.0 {
                                let mut dgam = 0.0;
                                for ka in 0..m {
                                    dgam += dg.get(ka, lam, mu, nu) * dpos[ka];
                                }
                                acc -= dgam * vv;
                            }
                            acc -= 2.0 * gamma.get(lam, mu, nu) * dvel[mu] * vel[nu];
                        }
                    }
                    out[o2 + lam] = acc;
                }
            }
            Ok(())
        };

        let mut k1 = vec![0.0; width];
        let mut k2 = vec![0.0; width];
        let mut k3 = vec![0.0; width];
        let mut k4 = vec![0.0; width];
        let mut tmp = vec![0.0; width];
        for _ in 0..steps {
            rhs(&y, &mut k1)?;
            for i in 0..width {
                tmp[i] = y[i] + 0.5 * h * k1[i];
            }
            rhs(&tmp, &mut k2)?;
            for i in 0..width {
                tmp[i] = y[i] + 0.5 * h * k2[i];
            }
            rhs(&tmp, &mut k3)?;
            for i in 0..width {
                tmp[i] = y[i] + h * k3[i];
            }
            rhs(&tmp, &mut k4)?;
            for i in 0..width {
                y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }

        let position = AVec::from_column_slice(&y[..m]);
        let velocity = AVec::from_column_slice(&y[m..2 * m]);
        if !self.contains(position.as_slice(), 0.0) {
            return Err(GeomError::GeodesicDomainExit {
                position: position.as_slice().to_vec(),
            });
        }
        let norm1 = self.pairing(position.as_slice(), &velocity, &velocity);
        // the 1e-8 budget is calibrated to the default 64 steps/unit;
        // coarser configurations get the corresponding 4th-order allowance
        let coarse = (64.0 / self.n_geo as f64).powi(4).max(1.0);
        let tol = 1e-8 * (1.0 + norm0.abs()) * coarse;
        let drift = (norm1 - norm0).abs();
        if drift > tol {
            return Err(GeomError::IntegratorDrift { drift, tol });
        }

        let mut dpos_out = Vec::with_capacity(k);
        let mut dvel_out = Vec::with_capacity(k);
        for i in 0..k {
            dpos_out.push(AVec::from_column_slice(&y[(2 + 2 * i) * m..(3 + 2 * i) * m]));
            dvel_out.push(AVec::from_column_slice(&y[(3 + 2 * i) * m..(4 + 2 * i) * m]));
        }
        Ok((GeodesicState { position, velocity, affine_parameter: t_max }, dpos_out, dvel_out))
    }

    /// Check metric symmetry and Lorentzian signature at the given points.
    pub fn validate(&self, points: &[Vec<f64>]) -> Result<()> {
        for p in points {
            let g = self.metric_at(p);
            for i in 0..self.dim {
                for j in 0..self.dim {
                    if (g[(i, j)] - g[(j, i)]).abs() > 1e-14 {
                        return Err(GeomError::BadSignature { point: p.clone() });
                    }
                }
            }
            let eig = g.symmetric_eigen();
            let negatives = eig.eigenvalues.iter().filter(|&&l| l < 0.0).count();
            let positives = eig.eigenvalues.iter().filter(|&&l| l > 0.0).count();
            if negatives != 1 || positives != self.dim - 1 {
                return Err(GeomError::BadSignature { point: p.clone() });
            }
        }
        Ok(())
    }
}

/// ∂_κ Γ^λ_{μν} assembled from metric derivatives:
/// ∂_κ g^{λσ} = −(g⁻¹ ∂_κ g g⁻¹)^{λσ}, then the differentiated Levi-Civita
/// formula. Indexed (κ, λ, μ, ν).
pub fn christoffel_grad_from_parts(dim: usize, ginv: &AMat, dg: &Rank3, ddg: &Rank4) -> Rank4 {
    let m = dim;
    let mut dginv = Rank3::zeros(m);
    for ka in 0..m {
        let mut dgk = AMat::zeros(m, m);
        for mu in 0..m {
            for nu in 0..m {
                dgk[(mu, nu)] = dg.get(ka, mu, nu);
            }
        }
        let d = -(ginv * dgk * ginv);
        for la in 0..m {
            for si in 0..m {
                dginv.set(ka, la, si, d[(la, si)]);
            }
        }
    }
    let mut out = Rank4::zeros(m);
    for ka in 0..m {
        for la in 0..m {
            for mu in 0..m {
                for nu in 0..m {
                    let mut v = 0.0;
                    for si in 0..m {
                        let bracket =
                            dg.get(mu, si, nu) + dg.get(nu, si, mu) - dg.get(si, mu, nu);
                        let dbracket = ddg.get(ka, mu, si, nu) + ddg.get(ka, nu, si, mu)
                            - ddg.get(ka, si, mu, nu);
                        v += 0.5 * dginv.get(ka, la, si) * bracket
                            + 0.5 * ginv[(la, si)] * dbracket;
                    }
                    out.set(ka, la, mu, nu, v);
                }
            }
        }
    }
    out
}

/// Fully lowered curvature R(∂μ,∂ν,∂ρ,∂w) from Christoffel symbols and
/// their gradient:
/// R^σ_{μνρ} = ∂_μ Γ^σ_{νρ} − ∂_ν Γ^σ_{μρ} + Γ^σ_{μλ}Γ^λ_{νρ} − Γ^σ_{νλ}Γ^λ_{μρ},
/// then R_{μνρw} = g_{wσ} R^σ_{μνρ}.
pub fn riemann_lowered(dim: usize, g: &AMat, gamma: &Rank3, dgamma: &Rank4) -> Rank4 {
    let m = dim;
    let mut upper = Rank4::zeros(m);
    for mu in 0..m {
        for nu in 0..m {
            for rho in 0..m {
                for si in 0..m {
                    let mut up = dgamma.get(mu, si, nu, rho) - dgamma.get(nu, si, mu, rho);
                    for lam in 0..m {
                        up += gamma.get(si, mu, lam) * gamma.get(lam, nu, rho)
                            - gamma.get(si, nu, lam) * gamma.get(lam, mu, rho);
                    }
                    upper.set(mu, nu, rho, si, up);
                }
            }
        }
    }
    let mut riem = Rank4::zeros(m);
    for mu in 0..m {
        for nu in 0..m {
            for rho in 0..m {
                for w in 0..m {
                    let mut v = 0.0;
                    for si in 0..m {
                        v += g[(w, si)] * upper.get(mu, nu, rho, si);
                    }
                    riem.set(mu, nu, rho, w, v);
                }
            }
        }
    }
    riem
}

/// Ric_{μν} = g^{ab} R_{μ a b ν}.
pub fn ricci_from_riemann(dim: usize, ginv: &AMat, riem: &Rank4) -> AMat {
    let m = dim;
    let mut ricci = AMat::zeros(m, m);
    for mu in 0..m {
        for nu in 0..m {
            let mut v = 0.0;
            for a in 0..m {
                for b in 0..m {
                    v += ginv[(a, b)] * riem.get(mu, a, b, nu);
                }
            }
            ricci[(mu, nu)] = v;
        }
    }
    ricci
}

/// Standard Levi-Civita formula from an inverse metric and metric gradient.
pub fn christoffel_from_parts(dim: usize, ginv: &AMat, dg: &Rank3) -> Rank3 {
    let mut out = Rank3::zeros(dim);
    for lam in 0..dim {
        for mu in 0..dim {
            for nu in 0..dim {
                let mut v = 0.0;
                for si in 0..dim {
                    v += 0.5
                        * ginv[(lam, si)]
                        * (dg.get(mu, si, nu) + dg.get(nu, si, mu) - dg.get(si, mu, nu));
                }
                out.set(lam, mu, nu, v);
            }
        }
    }
    out
}

/// Deterministic set of at least `min_count` unit vectors in R^sdim:
/// coordinate axes, then normalized diagonals, then seeded fills.
pub fn unit_direction_grid(sdim: usize, min_count: usize) -> Vec<Vec<f64>> {
    let mut dirs = Vec::new();
    for i in 0..sdim {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; sdim];
            d[i] = s;
            dirs.push(d);
        }
    }
    if sdim > 1 {
        let corners = 1usize << sdim;
        let norm = (sdim as f64).sqrt();
        for c in 0..corners {
            let d: Vec<f64> = (0..sdim)
                .map(|i| if c >> i & 1 == 1 { -1.0 / norm } else { 1.0 / norm })
                .collect();
            dirs.push(d);
        }
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x9e37_79b9);
    while dirs.len() < min_count {
        let mut d: Vec<f64> = (0..sdim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n: f64 = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if n < 1e-3 {
            continue;
        }
        for v in &mut d {
            *v /= n;
        }
        dirs.push(d);
    }
    dirs
}
