//! Parametric space-like immersions of a compact parameter box.
//!
//! An [`Immersion`] maps an n-dimensional box into an ambient chart. Its
//! derivative data comes from one of three sources:
//!
//! * closed-form positions evaluated on [`Jet`]s — exact partials up to
//!   order 3 (every shipped example),
//! * a first-order closure returning position and first partials — the
//!   output of geodesic deformations, where second derivatives are never
//!   needed,
//! * finite differences of a plain position closure with one Richardson
//!   level (fallback mode).
//!
//! A degenerate or non-space-like node aborts with the offending point:
//! every downstream formula would silently corrupt otherwise.

use crate::ambient::AmbientChart;
use crate::error::{GeomError, Result};
use crate::jet::{Jet, JetSpace};
use crate::quad::QuadratureGrid;
use crate::tensor::{Rank3, Rank4};
use crate::{AMat, AVec};
use std::sync::Arc;

/// Compact parameter box with a boundary collar of width `boundary_margin`
/// on which variations must vanish.
#[derive(Debug, Clone)]
pub struct ParamDomain {
    pub n: usize,
    pub box_intervals: Vec<(f64, f64)>,
    pub boundary_margin: f64,
}

impl ParamDomain {
    pub fn new(box_intervals: Vec<(f64, f64)>, boundary_margin: f64) -> Result<ParamDomain> {
        let n = box_intervals.len();
        let mut shortest = f64::INFINITY;
        for &(a, b) in &box_intervals {
            if !(b > a) {
                return Err(GeomError::Config(format!(
                    "degenerate parameter interval ({a}, {b})"
                )));
            }
            shortest = shortest.min(b - a);
        }
        if boundary_margin < 0.0 || boundary_margin >= 0.5 * shortest {
            return Err(GeomError::Config(format!(
                "boundary margin {boundary_margin} must lie in [0, {})",
                0.5 * shortest
            )));
        }
        Ok(ParamDomain { n, box_intervals, boundary_margin })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.n
            && x.iter()
                .zip(&self.box_intervals)
                .all(|(&xi, &(a, b))| xi >= a && xi <= b)
    }

    /// Strictly inside the collar (where variation profiles are 1).
    pub fn deep_interior(&self, x: &[f64]) -> bool {
        let m = self.boundary_margin;
        x.iter()
            .zip(&self.box_intervals)
            .all(|(&xi, &(a, b))| xi > a + m && xi < b - m)
    }

    pub fn center(&self) -> Vec<f64> {
        self.box_intervals.iter().map(|&(a, b)| 0.5 * (a + b)).collect()
    }
}

pub type JetPositionFn = Box<dyn Fn(&[Jet]) -> Vec<Jet> + Send + Sync>;
pub type FirstOrderFn = Box<dyn Fn(&[f64]) -> Result<(AVec, Vec<AVec>)> + Send + Sync>;
pub type PlainPositionFn = Box<dyn Fn(&[f64]) -> AVec + Send + Sync>;

pub enum DerivSource {
    /// Closed-form partials up to order 3 through jet evaluation.
    Jet(JetPositionFn),
    /// Position plus first partials only (geodesic deformations).
    FirstOrder(FirstOrderFn),
    /// Central finite differences with one Richardson level.
    Fd { position: PlainPositionFn, h: f64 },
}

/// Position and partial derivatives of an immersion at one parameter point.
#[derive(Debug, Clone)]
pub struct PointData {
    pub position: AVec,
    /// ∂f/∂x^i, i = 0..n.
    pub partials: Vec<AVec>,
    /// ∂²f/∂x^i∂x^j when the source provides order 2.
    pub second: Option<Vec<Vec<AVec>>>,
}

/// Induced metric with inverse and determinant.
#[derive(Debug, Clone)]
pub struct InducedMetric {
    pub g: AMat,
    pub inv: AMat,
    pub det: f64,
}

/// Raw coordinate tangents and an orthonormalized frame spanning them.
#[derive(Debug, Clone)]
pub struct TangentFrame {
    pub partials: Vec<AVec>,
    /// e_i, mutually orthonormal in the ambient metric.
    pub ortho: Vec<AVec>,
    /// Coefficients with e_i = Σ_k coeffs[(i, k)] ∂_k f.
    pub coeffs: AMat,
}

pub struct Immersion {
    pub domain: ParamDomain,
    pub chart: Arc<AmbientChart>,
    source: DerivSource,
    jet_space: Arc<JetSpace>,
}

impl Immersion {
    pub fn from_jets(
        domain: ParamDomain,
        chart: Arc<AmbientChart>,
        position: JetPositionFn,
    ) -> Immersion {
        let jet_space = JetSpace::for_dim(domain.n);
        Immersion { domain, chart, source: DerivSource::Jet(position), jet_space }
    }

    pub fn from_first_order(
        domain: ParamDomain,
        chart: Arc<AmbientChart>,
        eval: FirstOrderFn,
    ) -> Immersion {
        let jet_space = JetSpace::for_dim(domain.n);
        Immersion { domain, chart, source: DerivSource::FirstOrder(eval), jet_space }
    }

    pub fn from_fd(
        domain: ParamDomain,
        chart: Arc<AmbientChart>,
        position: PlainPositionFn,
        h: f64,
    ) -> Immersion {
        let jet_space = JetSpace::for_dim(domain.n);
        Immersion { domain, chart, source: DerivSource::Fd { position, h }, jet_space }
    }

    pub fn n(&self) -> usize {
        self.domain.n
    }

    pub fn jet_space(&self) -> &Arc<JetSpace> {
        &self.jet_space
    }

    /// Evaluate the position on jets (closed-form sources only).
    pub fn position_jets(&self, x: &[f64]) -> Result<Vec<Jet>> {
        match &self.source {
            DerivSource::Jet(f) => Ok(f(&Jet::variables(&self.jet_space, x))),
            _ => Err(GeomError::DerivativeOrderUnavailable),
        }
    }

    pub fn position(&self, x: &[f64]) -> Result<AVec> {
        match &self.source {
            DerivSource::Jet(f) => {
                let jets = f(&Jet::variables(&self.jet_space, x));
                Ok(AVec::from_iterator(jets.len(), jets.iter().map(|j| j.value())))
            }
            DerivSource::FirstOrder(f) => Ok(f(x)?.0),
            DerivSource::Fd { position, .. } => Ok(position(x)),
        }
    }

    /// Position with first (and, when available, second) partials.
    pub fn eval(&self, x: &[f64]) -> Result<PointData> {
        let n = self.domain.n;
        match &self.source {
            DerivSource::Jet(f) => {
                let jets = f(&Jet::variables(&self.jet_space, x));
                let m = jets.len();
                let position = AVec::from_iterator(m, jets.iter().map(|j| j.value()));
                let partials = (0..n)
                    .map(|i| AVec::from_iterator(m, jets.iter().map(|j| j.d1(i))))
                    .collect();
                let second = (0..n)
                    .map(|i| {
                        (0..n)
                            .map(|j| AVec::from_iterator(m, jets.iter().map(|c| c.d2(i, j))))
                            .collect()
                    })
                    .collect();
                Ok(PointData { position, partials, second: Some(second) })
            }
            DerivSource::FirstOrder(f) => {
                let (position, partials) = f(x)?;
                Ok(PointData { position, partials, second: None })
            }
            DerivSource::Fd { position, h } => {
                let h = *h;
                // second-order differences lose ~ε/h² to roundoff, so they
                // run at the larger step √h
                let h2 = h.sqrt();
                let pos = position(x);
                let shift = |offsets: &[(usize, f64)]| -> AVec {
                    let mut y = x.to_vec();
                    for &(i, s) in offsets {
                        y[i] += s;
                    }
                    position(&y)
                };
                let richardson1 = |i: usize| -> AVec {
                    let d = |h: f64| (shift(&[(i, h)]) - shift(&[(i, -h)])) / (2.0 * h);
                    (d(h / 2.0) * 4.0 - d(h)) / 3.0
                };
                let partials: Vec<AVec> = (0..n).map(richardson1).collect();
                let mut second = vec![vec![AVec::zeros(pos.len()); n]; n];
                for i in 0..n {
                    for j in i..n {
                        let val = if i == j {
                            let d2 = |h: f64| {
                                (shift(&[(i, h)]) + shift(&[(i, -h)]) - &pos * 2.0) / (h * h)
                            };
                            (d2(h2 / 2.0) * 4.0 - d2(h2)) / 3.0
                        } else {
                            let cr = |h: f64| {
                                (shift(&[(i, h), (j, h)]) - shift(&[(i, h), (j, -h)])
                                    - shift(&[(i, -h), (j, h)])
                                    + shift(&[(i, -h), (j, -h)]))
                                    / (4.0 * h * h)
                            };
                            (cr(h2 / 2.0) * 4.0 - cr(h2)) / 3.0
                        };
                        second[i][j] = val.clone();
                        second[j][i] = val;
                    }
                }
                Ok(PointData { position: pos, partials, second: Some(second) })
            }
        }
    }

    /// Mixed third partial ∂³f/∂x^i∂x^j∂x^k.
    pub fn third_partial(&self, x: &[f64], i: usize, j: usize, k: usize) -> Result<AVec> {
        match &self.source {
            DerivSource::Jet(f) => {
                let jets = f(&Jet::variables(&self.jet_space, x));
                Ok(AVec::from_iterator(jets.len(), jets.iter().map(|c| c.d3(i, j, k))))
            }
            DerivSource::FirstOrder(_) => Err(GeomError::DerivativeOrderUnavailable),
            DerivSource::Fd { h, .. } => {
                // plain central difference of the second partials
                let h = h.sqrt() * 4.0;
                let mut xp = x.to_vec();
                xp[k] += h;
                let mut xm = x.to_vec();
                xm[k] -= h;
                let sp = self.eval(&xp)?.second.unwrap()[i][j].clone();
                let sm = self.eval(&xm)?.second.unwrap()[i][j].clone();
                Ok((sp - sm) / (2.0 * h))
            }
        }
    }

    /// Induced metric g_ij = ⟨∂_i f, ∂_j f⟩; errors when not positive
    /// definite (space-like violation, which also covers rank deficiency).
    pub fn induced_metric(&self, x: &[f64]) -> Result<InducedMetric> {
        let data = self.eval(x)?;
        self.induced_metric_from(&data, x)
    }

    pub fn induced_metric_from(&self, data: &PointData, x: &[f64]) -> Result<InducedMetric> {
        let n = self.domain.n;
        let gx = self.chart.metric_at(data.position.as_slice());
        let mut g = AMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = (data.partials[i].transpose() * &gx * &data.partials[j])[(0, 0)];
            }
        }
        let chol = g.clone().cholesky().ok_or(GeomError::NotSpacelike { node: x.to_vec() })?;
        let det = chol.determinant();
        let inv = chol.inverse();
        if !(det > 0.0) {
            return Err(GeomError::NotSpacelike { node: x.to_vec() });
        }
        Ok(InducedMetric { g, inv, det })
    }

    /// Raw tangents plus a Gram–Schmidt orthonormal frame for them.
    pub fn tangent_frame(&self, x: &[f64]) -> Result<TangentFrame> {
        let data = self.eval(x)?;
        self.tangent_frame_from(&data, x)
    }

    pub fn tangent_frame_from(&self, data: &PointData, x: &[f64]) -> Result<TangentFrame> {
        let n = self.domain.n;
        let p = data.position.as_slice();
        let pair = |a: &AVec, b: &AVec| self.chart.pairing(p, a, b);
        let mut ortho: Vec<AVec> = Vec::with_capacity(n);
        let mut coeffs = AMat::zeros(n, n);
        for i in 0..n {
            let mut v = data.partials[i].clone();
            let mut row = AMat::zeros(1, n);
            row[(0, i)] = 1.0;
            for (j, e) in ortho.iter().enumerate() {
                let c = pair(&v, e);
                v -= e * c;
                for k in 0..n {
                    row[(0, k)] -= c * coeffs[(j, k)];
                }
            }
            let norm2 = pair(&v, &v);
            if norm2 <= 1e-14 {
                return Err(GeomError::RankDeficient { node: x.to_vec() });
            }
            let norm = norm2.sqrt();
            ortho.push(v / norm);
            for k in 0..n {
                coeffs[(i, k)] = row[(0, k)] / norm;
            }
        }
        Ok(TangentFrame { partials: data.partials.clone(), ortho, coeffs })
    }

    /// Tangential projection of an ambient vector at parameter point data.
    pub fn project_tangent(&self, data: &PointData, im: &InducedMetric, v: &AVec) -> AVec {
        let n = self.domain.n;
        let p = data.position.as_slice();
        let mut out = AVec::zeros(v.len());
        for i in 0..n {
            let vi: f64 = (0..n)
                .map(|j| im.inv[(i, j)] * self.chart.pairing(p, v, &data.partials[j]))
                .sum();
            out += &data.partials[i] * vi;
        }
        out
    }

    /// Normal projection: v minus its tangential part.
    pub fn project_normal(&self, data: &PointData, im: &InducedMetric, v: &AVec) -> AVec {
        v - self.project_tangent(data, im, v)
    }

    /// Second fundamental form II_ij = (∂²_ij f + Γ(∂_i f, ∂_j f))^⊥,
    /// normal-space valued and symmetric in (i, j).
    pub fn second_fundamental_form(&self, x: &[f64]) -> Result<Vec<Vec<AVec>>> {
        let data = self.eval(x)?;
        let im = self.induced_metric_from(&data, x)?;
        self.second_fundamental_form_from(&data, &im, x)
    }

    pub fn second_fundamental_form_from(
        &self,
        data: &PointData,
        im: &InducedMetric,
        _x: &[f64],
    ) -> Result<Vec<Vec<AVec>>> {
        let n = self.domain.n;
        let m = self.chart.dim;
        let second = data
            .second
            .as_ref()
            .ok_or(GeomError::DerivativeOrderUnavailable)?;
        let gamma = self.chart.christoffel(data.position.as_slice())?;
        let mut out = vec![vec![AVec::zeros(m); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut d = second[i][j].clone();
                for lam in 0..m {
                    let mut corr = 0.0;
                    for mu in 0..m {
                        for nu in 0..m {
                            corr += gamma.get(lam, mu, nu)
                                * data.partials[i][mu]
                                * data.partials[j][nu];
                        }
                    }
                    d[lam] += corr;
                }
                out[i][j] = self.project_normal(data, im, &d);
            }
        }
        Ok(out)
    }

    /// Mean curvature vector H = g^{ij} II_ij; lies in the normal space.
    pub fn mean_curvature_vector(&self, x: &[f64]) -> Result<AVec> {
        let data = self.eval(x)?;
        let im = self.induced_metric_from(&data, x)?;
        let ii = self.second_fundamental_form_from(&data, &im, x)?;
        Ok(mean_curvature_from_parts(&im, &ii))
    }

    /// ∫ sqrt(det g) over the parameter box by tensor Gauss–Legendre.
    pub fn volume(&self, grid: &QuadratureGrid) -> Result<f64> {
        grid.try_integrate(|x| Ok(self.induced_metric(x)?.det.sqrt()))
    }

    /// Check space-likeness and full rank at every grid node.
    pub fn validate(&self, grid: &QuadratureGrid) -> Result<()> {
        for node in grid.nodes() {
            self.induced_metric(&node.x)?;
        }
        Ok(())
    }

    /// Intrinsic scalar curvature of the induced metric, from exact jet
    /// derivatives of the position (needs order 3 and a constant-coefficient
    /// ambient metric; every catalog chart that ships a scalar-curvature
    /// fact is flat Minkowski).
    pub fn intrinsic_scalar_curvature(&self, x: &[f64]) -> Result<f64> {
        if !self.chart.is_metric_constant() {
            return Err(GeomError::IntrinsicCurvatureUnsupported);
        }
        let jets = self.position_jets(x)?;
        let n = self.domain.n;
        let gamb = self.chart.metric_at(x);
        let m = jets.len();
        let pair_d = |di: &dyn Fn(&Jet) -> f64, dj: &dyn Fn(&Jet) -> f64| -> f64 {
            let a: Vec<f64> = jets.iter().map(di).collect();
            let b: Vec<f64> = jets.iter().map(dj).collect();
            let mut v = 0.0;
            for mu in 0..m {
                for nu in 0..m {
                    v += gamb[(mu, nu)] * a[mu] * b[nu];
                }
            }
            v
        };
        // induced metric and its first two derivative orders by chain rule
        let mut g = AMat::zeros(n, n);
        let mut dg = Rank3::zeros(n);
        let mut ddg = Rank4::zeros(n);
        for i in 0..n {
            for j in 0..n {
                g[(i, j)] = pair_d(&|c| c.d1(i), &|c| c.d1(j));
                for k in 0..n {
                    dg.set(
                        k,
                        i,
                        j,
                        pair_d(&|c| c.d2(k, i), &|c| c.d1(j))
                            + pair_d(&|c| c.d1(i), &|c| c.d2(k, j)),
                    );
                    for l in 0..n {
                        ddg.set(
                            l,
                            k,
                            i,
                            j,
                            pair_d(&|c| c.d3(l, k, i), &|c| c.d1(j))
                                + pair_d(&|c| c.d2(k, i), &|c| c.d2(l, j))
                                + pair_d(&|c| c.d2(l, i), &|c| c.d2(k, j))
                                + pair_d(&|c| c.d1(i), &|c| c.d3(l, k, j)),
                        );
                    }
                }
            }
        }
        let ginv = g
            .clone()
            .try_inverse()
            .ok_or(GeomError::NotSpacelike { node: x.to_vec() })?;
        let gamma = crate::ambient::christoffel_from_parts(n, &ginv, &dg);
        let dgamma = crate::ambient::christoffel_grad_from_parts(n, &ginv, &dg, &ddg);
        let riem = crate::ambient::riemann_lowered(n, &g, &gamma, &dgamma);
        // scal = g^{ij} Ric_ij with the same middle-slot contraction as the
        // ambient Ricci
        let mut scal = 0.0;
        for i in 0..n {
            for a in 0..n {
                for b in 0..n {
                    for j in 0..n {
                        scal += ginv[(a, b)] * ginv[(i, j)] * riem.get(i, a, b, j);
                    }
                }
            }
        }
        Ok(scal)
    }
}

/// H = g^{ij} II_ij.
pub fn mean_curvature_from_parts(im: &InducedMetric, ii: &[Vec<AVec>]) -> AVec {
    let n = ii.len();
    let m = ii[0][0].len();
    let mut h = AVec::zeros(m);
    for i in 0..n {
        for j in 0..n {
            h += &ii[i][j] * im.inv[(i, j)];
        }
    }
    h
}
