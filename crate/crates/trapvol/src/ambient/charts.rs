//! Built-in charts, addressable by name: `minkowski(dim)`, `ppwave(a)`,
//! `conformal(<omega id>)`.

use super::{AmbientChart, ChristoffelFn, ChristoffelGradFn, MetricFn, MetricGradFn, MetricHessFn};
use crate::error::{GeomError, Result};
use crate::tensor::{Rank3, Rank4};
use crate::AMat;

/// Flat Minkowski chart with signature (−,+,…,+). Geodesics short-circuit
/// to straight lines.
pub fn minkowski(dim: usize) -> AmbientChart {
    let g = eta(dim);
    let g_for_closure = g.clone();
    let metric: MetricFn = Box::new(move |_x: &[f64]| g_for_closure.clone());
    AmbientChart::new(
        dim,
        format!("minkowski({dim})"),
        vec![(-1e6, 1e6); dim],
        metric,
        Some(Box::new(move |_x: &[f64]| Rank3::zeros(dim)) as MetricGradFn),
        Some(Box::new(move |_x: &[f64]| Rank4::zeros(dim)) as MetricHessFn),
    )
    .flat_chart()
    .constant(g)
}

/// Minkowski with every shortcut disabled: geodesics actually integrate and
/// derivative queries run the generic closed-form path. Test-support chart.
pub fn minkowski_generic(dim: usize) -> AmbientChart {
    let metric: MetricFn = Box::new(move |_x: &[f64]| eta(dim));
    AmbientChart::new(
        dim,
        format!("minkowski-generic({dim})"),
        vec![(-1e6, 1e6); dim],
        metric,
        Some(Box::new(move |_x: &[f64]| Rank3::zeros(dim)) as MetricGradFn),
        Some(Box::new(move |_x: &[f64]| Rank4::zeros(dim)) as MetricHessFn),
    )
}

pub fn eta(dim: usize) -> AMat {
    let mut g = AMat::identity(dim, dim);
    g[(0, 0)] = -1.0;
    g
}

/// pp-wave chart on coordinates (u, v, x, y):
///   ds² = 2 du dv + H(x, y) du² + dx² + dy²,   H = a (x² + y²).
///
/// The v coordinate direction is covariantly constant and null; for a < 0
/// the chart satisfies the null energy condition with Ric(∂u, ∂u) = −2a.
pub fn ppwave(a: f64) -> AmbientChart {
    let dim = 4;
    let metric: MetricFn = Box::new(move |x: &[f64]| {
        let h = a * (x[2] * x[2] + x[3] * x[3]);
        let mut g = AMat::zeros(4, 4);
        g[(0, 0)] = h;
        g[(0, 1)] = 1.0;
        g[(1, 0)] = 1.0;
        g[(2, 2)] = 1.0;
        g[(3, 3)] = 1.0;
        g
    });
    let grad: MetricGradFn = Box::new(move |x: &[f64]| {
        let mut t = Rank3::zeros(4);
        t.set(2, 0, 0, 2.0 * a * x[2]);
        t.set(3, 0, 0, 2.0 * a * x[3]);
        t
    });
    let hess: MetricHessFn = Box::new(move |_x: &[f64]| {
        let mut t = Rank4::zeros(4);
        t.set(2, 2, 0, 0, 2.0 * a);
        t.set(3, 3, 0, 0, 2.0 * a);
        t
    });
    // Nonzero symbols: Γ^x_{uu} = −a x, Γ^y_{uu} = −a y,
    //                  Γ^v_{ux} = a x, Γ^v_{uy} = a y (and μν-symmetric mates).
    let gamma: ChristoffelFn = Box::new(move |p: &[f64]| {
        let (x, y) = (p[2], p[3]);
        let mut t = Rank3::zeros(4);
        t.set(2, 0, 0, -a * x);
        t.set(3, 0, 0, -a * y);
        t.set(1, 0, 2, a * x);
        t.set(1, 2, 0, a * x);
        t.set(1, 0, 3, a * y);
        t.set(1, 3, 0, a * y);
        t
    });
    let gamma_grad: ChristoffelGradFn = Box::new(move |_p: &[f64]| {
        let mut t = Rank4::zeros(4);
        t.set(2, 2, 0, 0, -a);
        t.set(3, 3, 0, 0, -a);
        t.set(2, 1, 0, 2, a);
        t.set(2, 1, 2, 0, a);
        t.set(3, 1, 0, 3, a);
        t.set(3, 1, 3, 0, a);
        t
    });
    AmbientChart::new(
        dim,
        format!("ppwave({a})"),
        vec![(-10.0, 10.0), (-10.0, 10.0), (-4.0, 4.0), (-4.0, 4.0)],
        metric,
        Some(grad),
        Some(hess),
    )
    .with_christoffel(gamma, gamma_grad)
}

/// Conformally flat chart g = e^{2ω} η. Registered ω's are addressed by id;
/// `t01` is ω(x) = 0.1 x⁰.
pub fn conformal(omega_id: &str) -> Result<AmbientChart> {
    let coef = match omega_id {
        "t01" => 0.1,
        _ => return Err(GeomError::UnknownChart(format!("conformal({omega_id})"))),
    };
    Ok(conformal_linear(coef))
}

/// g = e^{2 c x⁰} η on dim 4.
pub fn conformal_linear(c: f64) -> AmbientChart {
    let dim = 4;
    let metric: MetricFn = Box::new(move |x: &[f64]| {
        let f = (2.0 * c * x[0]).exp();
        eta(dim) * f
    });
    let grad: MetricGradFn = Box::new(move |x: &[f64]| {
        let f = (2.0 * c * x[0]).exp();
        let e = eta(dim);
        let mut t = Rank3::zeros(dim);
        for mu in 0..dim {
            t.set(0, mu, mu, 2.0 * c * f * e[(mu, mu)]);
        }
        t
    });
    let hess: MetricHessFn = Box::new(move |x: &[f64]| {
        let f = (2.0 * c * x[0]).exp();
        let e = eta(dim);
        let mut t = Rank4::zeros(dim);
        for mu in 0..dim {
            t.set(0, 0, mu, mu, 4.0 * c * c * f * e[(mu, mu)]);
        }
        t
    });
    AmbientChart::new(
        dim,
        format!("conformal({c})"),
        vec![(-3.0, 3.0), (-10.0, 10.0), (-10.0, 10.0), (-10.0, 10.0)],
        metric,
        Some(grad),
        Some(hess),
    )
}

/// Parse a chart name like `minkowski(4)`, `ppwave(-1)`, `conformal(t01)`.
pub fn by_name(name: &str) -> Result<AmbientChart> {
    let name = name.trim();
    let open = name.find('(');
    let (head, arg) = match (open, name.ends_with(')')) {
        (Some(i), true) => (&name[..i], &name[i + 1..name.len() - 1]),
        _ => return Err(GeomError::UnknownChart(name.to_string())),
    };
    match head {
        "minkowski" => {
            let dim: usize = arg
                .trim()
                .parse()
                .map_err(|_| GeomError::UnknownChart(name.to_string()))?;
            if dim < 3 {
                return Err(GeomError::UnknownChart(name.to_string()));
            }
            Ok(minkowski(dim))
        }
        "ppwave" => {
            let a: f64 = arg
                .trim()
                .parse()
                .map_err(|_| GeomError::UnknownChart(name.to_string()))?;
            Ok(ppwave(a))
        }
        "conformal" => conformal(arg.trim()),
        _ => Err(GeomError::UnknownChart(name.to_string())),
    }
}
