//! Tensor-product Gauss–Legendre quadrature over a parameter box.
//!
//! Nodes and weights come from Newton iteration on the Legendre recurrence.
//! When the domain carries a boundary collar (where variation profiles ramp
//! from 0 to 1), each axis is split into panels at the collar junctions so
//! that every integrand stays piecewise-analytic inside a panel and the
//! rule keeps its spectral convergence.

use crate::immersion::ParamDomain;

/// Default Gauss–Legendre order per axis panel.
pub const DEFAULT_ORDER: usize = 24;

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for k in 0..n {
        // Chebyshev-flavored initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            let step = p / d;
            x -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        nodes[n - 1 - k] = x;
        weights[n - 1 - k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One quadrature node of the tensor grid.
#[derive(Debug, Clone)]
pub struct GridNode {
    pub x: Vec<f64>,
    pub weight: f64,
}

/// Tensor-product quadrature grid over a parameter box.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    pub order: usize,
    nodes: Vec<GridNode>,
}

impl QuadratureGrid {
    /// Grid adapted to `domain` at [`DEFAULT_ORDER`].
    pub fn default_for_domain(domain: &ParamDomain) -> QuadratureGrid {
        QuadratureGrid::for_domain(domain, DEFAULT_ORDER)
    }

    /// Grid adapted to `domain`: if the domain has a boundary collar, each
    /// axis is paneled at the collar and ramp junctions of the bump
    /// profiles, keeping integrands piecewise-analytic per panel.
    pub fn for_domain(domain: &ParamDomain, order: usize) -> QuadratureGrid {
        let mut axes: Vec<Vec<(f64, f64)>> = Vec::new();
        for &(a, b) in &domain.box_intervals {
            let m = domain.boundary_margin;
            let cuts: Vec<f64> = if m > 0.0 && 2.0 * m < b - a {
                let w = crate::fields::ramp_width((a, b), m);
                vec![a, a + m, a + m + w, b - m - w, b - m, b]
            } else {
                vec![a, b]
            };
            axes.push(axis_rule(&cuts, order));
        }
        QuadratureGrid { order, nodes: tensorize(&axes) }
    }

    /// Plain single-panel grid on a raw box (no collar structure).
    pub fn plain(box_intervals: &[(f64, f64)], order: usize) -> QuadratureGrid {
        let axes: Vec<Vec<(f64, f64)>> = box_intervals
            .iter()
            .map(|&(a, b)| axis_rule(&[a, b], order))
            .collect();
        QuadratureGrid { order, nodes: tensorize(&axes) }
    }

    pub fn nodes(&self) -> &[GridNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate a per-node function. Reduction runs in fixed node order so
    /// results are bit-stable.
    pub fn integrate<F: Fn(&[f64]) -> f64 + Sync>(&self, f: F) -> f64 {
        use rayon::prelude::*;
        let vals: Vec<f64> = self
            .nodes
            .par_iter()
            .map(|node| f(&node.x) * node.weight)
            .collect();
        vals.iter().sum()
    }

    /// Fallible variant of [`integrate`](Self::integrate); the first error in
    /// node order wins.
    pub fn try_integrate<F>(&self, f: F) -> crate::error::Result<f64>
    where
        F: Fn(&[f64]) -> crate::error::Result<f64> + Sync,
    {
        use rayon::prelude::*;
        let vals: Vec<crate::error::Result<f64>> = self
            .nodes
            .par_iter()
            .map(|node| f(&node.x).map(|v| v * node.weight))
            .collect();
        let mut total = 0.0;
        for v in vals {
            total += v?;
        }
        Ok(total)
    }
}

fn axis_rule(cuts: &[f64], order: usize) -> Vec<(f64, f64)> {
    let (xs, ws) = gauss_legendre(order);
    let mut rule = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for (x, wt) in xs.iter().zip(&ws) {
            rule.push((mid + half * x, half * wt));
        }
    }
    rule
}

fn tensorize(axes: &[Vec<(f64, f64)>]) -> Vec<GridNode> {
    let mut nodes = vec![GridNode { x: Vec::new(), weight: 1.0 }];
    for axis in axes {
        let mut next = Vec::with_capacity(nodes.len() * axis.len());
        for node in &nodes {
            for &(x, w) in axis {
                let mut xs = node.x.clone();
                xs.push(x);
                next.push(GridNode { x: xs, weight: node.weight * w });
            }
        }
        nodes = next;
    }
    nodes
}

/// Uniform interior sampling lattice (midpoint rule layout), for residual
/// sweeps that are not integrals.
pub fn sample_lattice(box_intervals: &[(f64, f64)], per_axis: usize) -> Vec<Vec<f64>> {
    let axes: Vec<Vec<f64>> = box_intervals
        .iter()
        .map(|&(a, b)| {
            (0..per_axis)
                .map(|i| a + (b - a) * (i as f64 + 0.5) / per_axis as f64)
                .collect()
        })
        .collect();
    let mut pts = vec![Vec::new()];
    for axis in &axes {
        let mut next = Vec::with_capacity(pts.len() * axis.len());
        for p in &pts {
            for &x in axis {
                let mut q = p.clone();
                q.push(x);
                next.push(q);
            }
        }
        pts = next;
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_monomials_exactly() {
        // order n integrates degree 2n-1 exactly on [-1, 1]
        for n in 1..=24 {
            let (xs, ws) = gauss_legendre(n);
            assert!(ws.iter().all(|&w| w > 0.0));
            assert!(xs.iter().all(|&x| x.abs() < 1.0));
            for deg in 0..(2 * n) {
                let estimate: f64 = xs
                    .iter()
                    .zip(&ws)
                    .map(|(x, w)| x.powi(deg as i32) * w)
                    .sum();
                let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
                assert!(
                    (estimate - exact).abs() < 1e-13,
                    "n={n} deg={deg}: {estimate} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn nodes_sorted_and_symmetric() {
        let (xs, _) = gauss_legendre(8);
        for w in xs.windows(2) {
            assert!(w[0] < w[1]);
        }
        for i in 0..4 {
            assert!((xs[i] + xs[7 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn plain_grid_integrates_2d_polynomial() {
        let grid = QuadratureGrid::plain(&[(0.0, 2.0), (-1.0, 1.0)], 6);
        // ∫0..2 ∫-1..1 (x²y² + x) dy dx = (8/3)(2/3) + 2·2/... compute: ∫x² dx = 8/3, ∫y² dy = 2/3; ∫x dx·∫dy = 2·2
        let got = grid.integrate(|p| p[0] * p[0] * p[1] * p[1] + p[0]);
        let exact = 8.0 / 3.0 * 2.0 / 3.0 + 2.0 * 2.0;
        assert!((got - exact).abs() < 1e-12);
    }

    #[test]
    fn paneled_grid_handles_collar_kinks() {
        use crate::immersion::ParamDomain;
        let domain = ParamDomain::new(vec![(0.0, 1.0)], 0.25).unwrap();
        let grid = QuadratureGrid::for_domain(&domain, 16);
        // piecewise linear hat that kinks exactly at the panel cuts
        let hat = |x: f64| {
            if x < 0.25 {
                x / 0.25
            } else if x > 0.75 {
                (1.0 - x) / 0.25
            } else {
                1.0
            }
        };
        let got = grid.integrate(|p| hat(p[0]));
        assert!((got - 0.75).abs() < 1e-14, "{got}");
    }

    #[test]
    fn sample_lattice_is_interior() {
        let pts = sample_lattice(&[(0.0, 1.0), (2.0, 3.0)], 24);
        assert_eq!(pts.len(), 24 * 24);
        for p in &pts {
            assert!(p[0] > 0.0 && p[0] < 1.0);
            assert!(p[1] > 2.0 && p[1] < 3.0);
        }
    }
}
