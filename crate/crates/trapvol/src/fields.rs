//! Scalar and vector fields over the parameter box, and the profile
//! library used to build boundary-fixing variations.
//!
//! Profiles are polynomial bumps: on each axis a collar ramp rises from 0
//! at the boundary to 1 at the inner collar edge. The ramp is an 11th-degree
//! smoothstep with C⁵ contact at both junctions — reparametrizations of an
//! inner variation drag the collar junctions off the quadrature panel cuts,
//! and lower-order contact there visibly pollutes the 1e−8-level volume
//! comparisons.

use crate::error::Result;
use crate::immersion::ParamDomain;
use crate::jet::{Jet, JetSpace};
use crate::AVec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// Smoothstep with S(0) = 0, S(1) = 1 and five vanishing derivatives at
/// both ends; clamped outside [0, 1].
pub fn smoothstep_c5(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        let s6 = s.powi(6);
        s6 * (462.0 + s * (-1980.0 + s * (3465.0 + s * (-3080.0 + s * (1386.0 - s * 252.0)))))
    }
}

/// Jet version of [`smoothstep_c5`]; branches on the value part.
pub fn smoothstep_c5_jet(s: &Jet) -> Jet {
    let v = s.value();
    let sp = s.space();
    if v <= 0.0 {
        Jet::constant(sp, 0.0)
    } else if v >= 1.0 {
        Jet::constant(sp, 1.0)
    } else {
        let s2 = s * s;
        let s6 = &(&s2 * &s2) * &s2;
        let poly = &(&(&(&(&(s * -252.0) + 1386.0) * s - 3080.0) * s + 3465.0) * s - 1980.0) * s
            + 462.0;
        &s6 * &poly
    }
}

/// Real-valued field on the parameter box, with exact gradient data.
pub struct ScalarField {
    space: Arc<JetSpace>,
    f: Box<dyn Fn(&[Jet]) -> Jet + Send + Sync>,
}

impl ScalarField {
    pub fn new(n: usize, f: impl Fn(&[Jet]) -> Jet + Send + Sync + 'static) -> ScalarField {
        ScalarField { space: JetSpace::for_dim(n), f: Box::new(f) }
    }

    pub fn constant(n: usize, v: f64) -> ScalarField {
        ScalarField::new(n, move |x: &[Jet]| Jet::constant(x[0].space(), v))
    }

    pub fn dim(&self) -> usize {
        self.space.nvars()
    }

    pub fn eval_jet(&self, x: &[Jet]) -> Jet {
        (self.f)(x)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(&Jet::variables(&self.space, x)).value()
    }

    pub fn eval_with_grad(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let j = (self.f)(&Jet::variables(&self.space, x));
        (j.value(), j.grad())
    }

    /// Pointwise scaling by a constant.
    pub fn scaled(self: &Arc<Self>, c: f64) -> ScalarField {
        let inner = self.clone();
        ScalarField { space: inner.space.clone(), f: Box::new(move |x| inner.eval_jet(x) * c) }
    }
}

/// Ambient-vector-valued field along an immersion, given either in closed
/// form on jets (exact surface derivatives) or as a plain closure
/// differentiated by central differences with one Richardson level
/// (default step 1e−5).
pub enum VectorField {
    Jet {
        space: Arc<JetSpace>,
        f: Box<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>,
    },
    Plain {
        f: Box<dyn Fn(&[f64]) -> AVec + Send + Sync>,
        h: f64,
    },
}

impl VectorField {
    pub fn from_jets(
        n: usize,
        f: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + 'static,
    ) -> VectorField {
        VectorField::Jet { space: JetSpace::for_dim(n), f: Box::new(f) }
    }

    pub fn from_plain(f: impl Fn(&[f64]) -> AVec + Send + Sync + 'static) -> VectorField {
        VectorField::Plain { f: Box::new(f), h: 1e-5 }
    }

    pub fn eval(&self, x: &[f64]) -> AVec {
        match self {
            VectorField::Jet { space, f } => {
                let jets = f(&Jet::variables(space, x));
                AVec::from_iterator(jets.len(), jets.iter().map(|j| j.value()))
            }
            VectorField::Plain { f, .. } => f(x),
        }
    }

    /// Value together with the surface partials ∂X/∂x^k.
    pub fn eval_with_jacobian(&self, x: &[f64]) -> (AVec, Vec<AVec>) {
        match self {
            VectorField::Jet { space, f } => {
                let jets = f(&Jet::variables(space, x));
                let m = jets.len();
                let value = AVec::from_iterator(m, jets.iter().map(|j| j.value()));
                let jac = (0..space.nvars())
                    .map(|k| AVec::from_iterator(m, jets.iter().map(|j| j.d1(k))))
                    .collect();
                (value, jac)
            }
            VectorField::Plain { f, h } => {
                let h = *h;
                let value = f(x);
                let n = x.len();
                let jac = (0..n)
                    .map(|k| {
                        let d = |h: f64| {
                            let mut xp = x.to_vec();
                            xp[k] += h;
                            let mut xm = x.to_vec();
                            xm[k] -= h;
                            (f(&xp) - f(&xm)) / (2.0 * h)
                        };
                        (d(h / 2.0) * 4.0 - d(h)) / 3.0
                    })
                    .collect();
                (value, jac)
            }
        }
    }
}

/// Ramp width used by [`bump_profile`] on one axis: equal to the collar
/// width when the interior is wide enough, shrunk otherwise.
pub fn ramp_width(interval: (f64, f64), margin: f64) -> f64 {
    let side = interval.1 - interval.0;
    margin.min(0.25 * (side - 2.0 * margin))
}

/// The standard boundary bump: identically 0 on the collar of width
/// `boundary_margin`, identically 1 in the deep interior, joined by a C⁵
/// smoothstep ramp on each axis.
pub fn bump_profile(domain: &ParamDomain) -> ScalarField {
    let boxes = domain.box_intervals.clone();
    let m = domain.boundary_margin;
    assert!(m > 0.0, "bump profile needs a boundary collar");
    let widths: Vec<f64> = boxes.iter().map(|&iv| ramp_width(iv, m)).collect();
    ScalarField::new(domain.n, move |x: &[Jet]| {
        let sp = x[0].space();
        let mut out = Jet::constant(sp, 1.0);
        for (xi, (&(a, b), &w)) in x.iter().zip(boxes.iter().zip(&widths)) {
            let lo = (&(xi - a) - m) * (1.0 / w);
            let hi = (&(&(-xi) + b) - m) * (1.0 / w);
            out = &out * &smoothstep_c5_jet(&lo);
            out = &out * &smoothstep_c5_jet(&hi);
        }
        out
    })
}

/// Seeded random profile: bump × (c₀ + Σ_k c_k sin(ω_k · x + ρ_k)).
/// The constant term keeps |c₀| ∈ [0.3, 1] so the profile never degenerates
/// to numerical zero; total amplitude is bounded by `amplitude`.
pub fn seeded_profile(domain: &ParamDomain, seed: u64, amplitude: f64) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = domain.n;
    let c0: f64 = rng.gen_range(0.3..1.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    let n_terms = 2;
    let mut terms = Vec::new();
    for _ in 0..n_terms {
        let c: f64 = rng.gen_range(-0.5..0.5);
        let omega: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let rho: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        terms.push((c, omega, rho));
    }
    let bump = bump_profile(domain);
    ScalarField::new(n, move |x: &[Jet]| {
        let sp = x[0].space();
        let mut s = Jet::constant(sp, c0);
        for (c, omega, rho) in &terms {
            let mut phase = Jet::constant(sp, *rho);
            for (xi, w) in x.iter().zip(omega) {
                phase = &phase + &(xi * *w);
            }
            s = &s + &(phase.sin() * *c);
        }
        &(&bump.eval_jet(x) * &s) * amplitude
    })
}

/// Structural form of a time profile: polynomial profiles expose their
/// coefficient fields so evaluation loops can cache them per node instead
/// of rebuilding jets at every (t, x).
pub enum TimeForm {
    /// τ(t, x) = t φ(x) + t² χ(x).
    Polynomial { phi: Arc<ScalarField>, chi: Arc<ScalarField> },
    /// Arbitrary t-dependence (e.g. reparametrized inner variations).
    General,
}

/// Two-parameter scalar profile τ(t, x) with τ(0, ·) ≡ 0, carrying its own
/// t-derivatives at t = 0: φ = ∂_t τ(0,·) and ψ = ∂²_t τ(0,·).
pub struct TimeProfile {
    space: Arc<JetSpace>,
    f: Box<dyn Fn(f64, &[Jet]) -> Jet + Send + Sync>,
    phi: Arc<ScalarField>,
    psi: Arc<ScalarField>,
    form: TimeForm,
}

impl TimeProfile {
    pub fn new(
        n: usize,
        f: impl Fn(f64, &[Jet]) -> Jet + Send + Sync + 'static,
        phi: ScalarField,
        psi: ScalarField,
    ) -> TimeProfile {
        TimeProfile {
            space: JetSpace::for_dim(n),
            f: Box::new(f),
            phi: Arc::new(phi),
            psi: Arc::new(psi),
            form: TimeForm::General,
        }
    }

    /// τ(t, x) = t φ(x).
    pub fn linear(n: usize, phi: ScalarField) -> TimeProfile {
        TimeProfile::quadratic(n, phi, ScalarField::constant(n, 0.0))
    }

    /// τ(t, x) = t φ(x) + t² χ(x), so ψ = 2χ.
    pub fn quadratic(n: usize, phi: ScalarField, chi: ScalarField) -> TimeProfile {
        let phi = Arc::new(phi);
        let chi = Arc::new(chi);
        let (phi_in, chi_in) = (phi.clone(), chi.clone());
        TimeProfile {
            space: JetSpace::for_dim(n),
            f: Box::new(move |t, x| {
                &(phi_in.eval_jet(x) * t) + &(chi_in.eval_jet(x) * (t * t))
            }),
            phi: phi.clone(),
            psi: Arc::new(chi.scaled(2.0)),
            form: TimeForm::Polynomial { phi, chi },
        }
    }

    pub fn form(&self) -> &TimeForm {
        &self.form
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> f64 {
        (self.f)(t, &Jet::variables(&self.space, x)).value()
    }

    pub fn eval_with_grad(&self, t: f64, x: &[f64]) -> (f64, Vec<f64>) {
        let j = (self.f)(t, &Jet::variables(&self.space, x));
        (j.value(), j.grad())
    }

    pub fn eval_jet(&self, t: f64, x: &[Jet]) -> Jet {
        (self.f)(t, x)
    }

    /// φ = ∂_t τ at t = 0.
    pub fn phi(&self) -> &Arc<ScalarField> {
        &self.phi
    }

    /// ψ = ∂²_t τ at t = 0.
    pub fn psi(&self) -> &Arc<ScalarField> {
        &self.psi
    }
}

/// Parameter-box self-map family α(s, ·) with α(0, ·) = identity, for inner
/// variations of the null-geodesic sweep.
pub struct MapProfile {
    n: usize,
    space: Arc<JetSpace>,
    f: Box<dyn Fn(f64, &[Jet]) -> Vec<Jet> + Send + Sync>,
    /// ∂_s α at s = 0, as jets in x.
    ds0: Box<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>,
}

impl MapProfile {
    pub fn identity(n: usize) -> MapProfile {
        MapProfile {
            n,
            space: JetSpace::for_dim(n),
            f: Box::new(|_s, x: &[Jet]| x.to_vec()),
            ds0: Box::new(|x: &[Jet]| {
                x.iter().map(|xi| Jet::constant(xi.space(), 0.0)).collect()
            }),
        }
    }

    /// α(s, x) = x + s · disp(x), boundary-fixed when `disp` carries a bump.
    pub fn displacement(
        n: usize,
        disp: impl Fn(&[Jet]) -> Vec<Jet> + Send + Sync + Clone + 'static,
    ) -> MapProfile {
        let space = JetSpace::for_dim(n);
        let disp2 = disp.clone();
        MapProfile {
            n,
            space,
            f: Box::new(move |s, x: &[Jet]| {
                let d = disp(x);
                x.iter().zip(d).map(|(xi, di)| xi + &(di * s)).collect()
            }),
            ds0: Box::new(move |x: &[Jet]| disp2(x)),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn eval(&self, s: f64, x: &[f64]) -> Vec<f64> {
        (self.f)(s, &Jet::variables(&self.space, x))
            .iter()
            .map(|j| j.value())
            .collect()
    }

    /// Value and Jacobian ∂α^i/∂x^j.
    pub fn eval_with_jacobian(&self, s: f64, x: &[f64]) -> (Vec<f64>, crate::AMat) {
        let jets = (self.f)(s, &Jet::variables(&self.space, x));
        let value: Vec<f64> = jets.iter().map(|j| j.value()).collect();
        let mut jac = crate::AMat::zeros(self.n, self.n);
        for (i, j) in jets.iter().enumerate() {
            for k in 0..self.n {
                jac[(i, k)] = j.d1(k);
            }
        }
        (value, jac)
    }

    pub fn ds0(&self, x: &[f64]) -> Vec<f64> {
        (self.ds0)(&Jet::variables(&self.space, x))
            .iter()
            .map(|j| j.value())
            .collect()
    }

    pub fn ds0_jet(&self, x: &[Jet]) -> Vec<Jet> {
        (self.ds0)(x)
    }

    pub fn eval_jet(&self, s: f64, x: &[Jet]) -> Vec<Jet> {
        (self.f)(s, x)
    }
}

/// Seeded inner variation: a random time profile plus a random boundary-fixed
/// self-map displacement of bounded amplitude.
pub fn seeded_inner_maps(
    domain: &ParamDomain,
    seed: u64,
    tau_amplitude: f64,
    alpha_amplitude: f64,
) -> Result<(TimeProfile, MapProfile)> {
    let n = domain.n;
    let phi = seeded_profile(domain, seed.wrapping_mul(2).wrapping_add(1), tau_amplitude);
    let chi = seeded_profile(domain, seed.wrapping_mul(2).wrapping_add(7777), 0.3 * tau_amplitude);
    let tau = TimeProfile::quadratic(n, phi, chi);

    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_mul(31).wrapping_add(17));
    let coeffs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let freqs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
    let bump = Arc::new(bump_profile(domain));
    let amp = alpha_amplitude;
    let alpha = MapProfile::displacement(n, move |x: &[Jet]| {
        let b = bump.eval_jet(x);
        let mut phase = Jet::constant(x[0].space(), 0.0);
        for (xi, w) in x.iter().zip(&freqs) {
            phase = &phase + &(xi * *w);
        }
        // (cos + 1.5) ∈ [0.5, 2.5], so |d_i| ≤ amp
        let shaped = &(&b * &(&phase.cos() + 1.5)) * (amp / 2.5);
        coeffs.iter().map(|&c| &shaped * c).collect()
    });
    Ok((tau, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoothstep_contact_orders() {
        assert_eq!(smoothstep_c5(-0.2), 0.0);
        assert_eq!(smoothstep_c5(1.3), 1.0);
        assert!((smoothstep_c5(0.5) - 0.5).abs() < 1e-12);
        // flat contact at both ends: near s = 0 the function is ~462 s⁶, so
        // an FD probe at step h sees a slope of order h⁵
        let h = 5e-3;
        for x0 in [0.0, 1.0] {
            let d1 = (smoothstep_c5(x0 + h) - smoothstep_c5(x0 - h)) / (2.0 * h);
            let d2 = (smoothstep_c5(x0 + h) - 2.0 * smoothstep_c5(x0) + smoothstep_c5(x0 - h))
                / (h * h);
            assert!(d1.abs() < 1e-8, "{x0}: {d1}");
            assert!(d2.abs() < 1e-5, "{x0}: {d2}");
        }
    }

    #[test]
    fn bump_is_one_inside_and_zero_on_whole_collar() {
        // margin 0.2 → zero on [0, 0.2], ramp on [0.2, 0.4] (x axis)
        let domain = ParamDomain::new(vec![(0.0, 1.0), (-1.0, 1.0)], 0.2).unwrap();
        let bump = bump_profile(&domain);
        assert_eq!(bump.eval(&[0.5, 0.0]), 1.0);
        assert_eq!(bump.eval(&[0.45, 0.3]), 1.0);
        // identically zero on the whole collar, not just at the boundary
        assert_eq!(bump.eval(&[0.1, 0.0]), 0.0);
        assert_eq!(bump.eval(&[0.199, 0.0]), 0.0);
        assert_eq!(bump.eval(&[0.5, -0.85]), 0.0);
        // strictly between on the ramp
        let mid = bump.eval(&[0.3, 0.0]);
        assert!(mid > 0.0 && mid < 1.0);
        // gradient matches FD on the ramp
        let (_, g) = bump.eval_with_grad(&[0.3, 0.5]);
        let h = 1e-6;
        let fd = (bump.eval(&[0.3 + h, 0.5]) - bump.eval(&[0.3 - h, 0.5])) / (2.0 * h);
        assert!((g[0] - fd).abs() < 1e-7);
    }

    #[test]
    fn seeded_profile_vanishes_on_collar_and_is_reproducible() {
        let domain = ParamDomain::new(vec![(0.0, 1.0), (0.0, 1.0)], 0.2).unwrap();
        let p1 = seeded_profile(&domain, 42, 0.5);
        let p2 = seeded_profile(&domain, 42, 0.5);
        let p3 = seeded_profile(&domain, 43, 0.5);
        let x = [0.4, 0.6];
        assert_eq!(p1.eval(&x), p2.eval(&x));
        assert_ne!(p1.eval(&x), p3.eval(&x));
        assert_eq!(p1.eval(&[0.05, 0.5]), 0.0);
        assert!(p1.eval(&x).abs() <= 0.5 * 1.5);
    }

    #[test]
    fn time_profile_derivatives() {
        let domain = ParamDomain::new(vec![(0.0, 1.0)], 0.2).unwrap();
        let phi = bump_profile(&domain);
        let chi = ScalarField::constant(1, 0.25);
        let tau = TimeProfile::quadratic(1, phi, chi);
        let x = [0.5];
        assert_eq!(tau.eval(0.0, &x), 0.0);
        let h = 1e-5;
        let fd_phi = (tau.eval(h, &x) - tau.eval(-h, &x)) / (2.0 * h);
        assert!((tau.phi().eval(&x) - fd_phi).abs() < 1e-9);
        let fd_psi = (tau.eval(h, &x) - 2.0 * tau.eval(0.0, &x) + tau.eval(-h, &x)) / (h * h);
        assert!((tau.psi().eval(&x) - fd_psi).abs() < 1e-5);
    }

    #[test]
    fn map_profile_jacobian_matches_fd() {
        let domain = ParamDomain::new(vec![(0.0, 1.0), (0.0, 1.0)], 0.2).unwrap();
        let bump = Arc::new(bump_profile(&domain));
        let alpha = MapProfile::displacement(2, move |x: &[Jet]| {
            let b = bump.eval_jet(x);
            vec![&b * 0.1, &b * 0.05]
        });
        let s = 0.15;
        let x = [0.35, 0.55];
        let (val, jac) = alpha.eval_with_jacobian(s, &x);
        let h = 1e-6;
        for j in 0..2 {
            let mut xp = x;
            xp[j] += h;
            let mut xm = x;
            xm[j] -= h;
            let vp = alpha.eval(s, &xp);
            let vm = alpha.eval(s, &xm);
            for i in 0..2 {
                let fd = (vp[i] - vm[i]) / (2.0 * h);
                assert!((jac[(i, j)] - fd).abs() < 1e-6);
            }
        }
        let ds = alpha.ds0(&x);
        let v0 = alpha.eval(0.0, &x);
        assert_eq!(v0, x.to_vec());
        assert!((val[0] - (x[0] + s * ds[0])).abs() < 1e-12);
    }
}
