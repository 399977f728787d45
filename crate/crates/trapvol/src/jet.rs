//! Truncated multivariate Taylor arithmetic (order 3).
//!
//! A [`Jet`] carries the value of a smooth function of `n` parameters
//! together with every partial derivative up to total order 3, stored as
//! Taylor coefficients c_α = ∂^α f / α!. Evaluating a closed-form position
//! or frame field on jets therefore yields machine-precision derivatives —
//! no finite differencing — which is what the tight frame and trace
//! tolerances downstream rely on.
//!
//! Coefficients are indexed by the monomials of total degree ≤ 3 over the
//! `n` variables, enumerated degree by degree. The per-dimension tables
//! (monomial list, product table) live in a shared [`JetSpace`] so that
//! arithmetic is flat loops over precomputed index triples.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

const MAX_DEG: u32 = 3;

/// Index tables for jets in a fixed number of variables.
#[derive(Debug)]
pub struct JetSpace {
    nvars: usize,
    monos: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
    /// (i, j, k) with mono_i + mono_j = mono_k, total degree ≤ 3.
    products: Vec<(usize, usize, usize)>,
}

fn enumerate_monos(nvars: usize) -> Vec<Vec<u8>> {
    let mut monos = vec![vec![0u8; nvars]];
    let mut frontier = monos.clone();
    for _ in 0..MAX_DEG {
        let mut next = Vec::new();
        for m in &frontier {
            // raise only indices >= the last raised one to avoid duplicates
            let start = m
                .iter()
                .rposition(|&e| e > 0)
                .unwrap_or(0);
            for i in start..nvars {
                let mut m2 = m.clone();
                m2[i] += 1;
                next.push(m2);
            }
        }
        monos.extend(next.iter().cloned());
        frontier = next;
    }
    monos
}

impl JetSpace {
    fn build(nvars: usize) -> Arc<JetSpace> {
        assert!(nvars >= 1, "jets need at least one variable");
        let monos = enumerate_monos(nvars);
        let index: HashMap<Vec<u8>, usize> =
            monos.iter().cloned().enumerate().map(|(i, m)| (m, i)).collect();
        let mut products = Vec::new();
        for (i, a) in monos.iter().enumerate() {
            let da: u32 = a.iter().map(|&e| e as u32).sum();
            for (j, b) in monos.iter().enumerate() {
                let db: u32 = b.iter().map(|&e| e as u32).sum();
                if da + db > MAX_DEG {
                    continue;
                }
                let sum: Vec<u8> = a.iter().zip(b).map(|(x, y)| x + y).collect();
                products.push((i, j, index[&sum]));
            }
        }
        Arc::new(JetSpace { nvars, monos, index, products })
    }

    /// Shared space for `nvars` variables (cached globally).
    pub fn for_dim(nvars: usize) -> Arc<JetSpace> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<JetSpace>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().unwrap();
        guard.entry(nvars).or_insert_with(|| JetSpace::build(nvars)).clone()
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn mono_index(&self, exps: &[u8]) -> usize {
        self.index[&exps.to_vec()]
    }
}

#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    c: Vec<f64>,
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Jet(val={}, c={:?})", self.c[0], self.c)
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, v: f64) -> Jet {
        let mut c = vec![0.0; space.len()];
        c[0] = v;
        Jet { space: space.clone(), c }
    }

    /// The `var`-th coordinate function, seeded at `value`.
    pub fn variable(space: &Arc<JetSpace>, value: f64, var: usize) -> Jet {
        assert!(var < space.nvars);
        let mut c = vec![0.0; space.len()];
        c[0] = value;
        // degree-1 slots follow the constant slot in variable order
        c[1 + var] = 1.0;
        Jet { space: space.clone(), c }
    }

    /// Seed all coordinates of `x` as jet variables.
    pub fn variables(space: &Arc<JetSpace>, x: &[f64]) -> Vec<Jet> {
        assert_eq!(x.len(), space.nvars);
        x.iter().enumerate().map(|(i, &v)| Jet::variable(space, v, i)).collect()
    }

    /// Jet with prescribed value and gradient, higher coefficients zero.
    /// For data that is only known (or only consumed) to first order.
    pub fn from_value_grad(space: &Arc<JetSpace>, value: f64, grad: &[f64]) -> Jet {
        assert_eq!(grad.len(), space.nvars);
        let mut c = vec![0.0; space.len()];
        c[0] = value;
        c[1..1 + grad.len()].copy_from_slice(grad);
        Jet { space: space.clone(), c }
    }

    /// The jet of ∂f/∂x_k, exact through degree 2 (the degree-3 slots of
    /// the result are zero since the input is truncated).
    pub fn derivative(&self, k: usize) -> Jet {
        let sp = &self.space;
        let mut c = vec![0.0; sp.len()];
        for (idx, mono) in sp.monos.iter().enumerate() {
            let deg: u32 = mono.iter().map(|&e| e as u32).sum();
            if deg >= MAX_DEG {
                continue;
            }
            let mut up = mono.clone();
            up[k] += 1;
            let src = sp.mono_index(&up);
            c[idx] = self.c[src] * up[k] as f64;
        }
        Jet { space: sp.clone(), c }
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// First partial ∂f/∂x_i.
    pub fn d1(&self, i: usize) -> f64 {
        self.c[1 + i]
    }

    /// Gradient vector.
    pub fn grad(&self) -> Vec<f64> {
        (0..self.space.nvars).map(|i| self.d1(i)).collect()
    }

    /// Second partial ∂²f/∂x_i∂x_j.
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        let mut exps = vec![0u8; self.space.nvars];
        exps[i] += 1;
        exps[j] += 1;
        let fact = if i == j { 2.0 } else { 1.0 };
        self.c[self.space.mono_index(&exps)] * fact
    }

    /// Third partial ∂³f/∂x_i∂x_j∂x_k.
    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        let mut exps = vec![0u8; self.space.nvars];
        exps[i] += 1;
        exps[j] += 1;
        exps[k] += 1;
        let fact: f64 = exps
            .iter()
            .map(|&e| match e {
                3 => 6.0,
                2 => 2.0,
                _ => 1.0,
            })
            .product();
        self.c[self.space.mono_index(&exps)] * fact
    }

    fn same_space(&self, other: &Jet) {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space), "jets from different spaces");
    }

    pub fn mul_scalar(&self, s: f64) -> Jet {
        Jet { space: self.space.clone(), c: self.c.iter().map(|v| v * s).collect() }
    }

    /// Composition with a scalar function given by its derivatives at the
    /// value part: f(u) = f0 + f1·w + f2/2·w² + f3/6·w³, w = u − u₀.
    pub fn compose(&self, f0: f64, f1: f64, f2: f64, f3: f64) -> Jet {
        let mut w = self.clone();
        w.c[0] = 0.0;
        let w2 = &w * &w;
        let w3 = &w2 * &w;
        let mut out = Jet::constant(&self.space, f0);
        for i in 0..out.c.len() {
            out.c[i] += f1 * w.c[i] + 0.5 * f2 * w2.c[i] + f3 / 6.0 * w3.c[i];
        }
        out
    }

    pub fn sin(&self) -> Jet {
        let u = self.value();
        self.compose(u.sin(), u.cos(), -u.sin(), -u.cos())
    }

    pub fn cos(&self) -> Jet {
        let u = self.value();
        self.compose(u.cos(), -u.sin(), -u.cos(), u.sin())
    }

    pub fn sinh(&self) -> Jet {
        let u = self.value();
        self.compose(u.sinh(), u.cosh(), u.sinh(), u.cosh())
    }

    pub fn cosh(&self) -> Jet {
        let u = self.value();
        self.compose(u.cosh(), u.sinh(), u.cosh(), u.sinh())
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose(e, e, e, e)
    }

    pub fn sqrt(&self) -> Jet {
        let r = self.value().sqrt();
        self.compose(r, 0.5 / r, -0.25 / (r * r * r), 0.375 / (r * r * r * r * r))
    }

    pub fn recip(&self) -> Jet {
        let u = self.value();
        self.compose(1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u), -6.0 / (u * u * u * u))
    }

    pub fn powi(&self, k: i32) -> Jet {
        match k {
            0 => Jet::constant(&self.space, 1.0),
            k if k > 0 => {
                let mut out = self.clone();
                for _ in 1..k {
                    out = &out * self;
                }
                out
            }
            k => self.recip().powi(-k),
        }
    }
}

impl Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.same_space(rhs);
        Jet {
            space: self.space.clone(),
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.same_space(rhs);
        Jet {
            space: self.space.clone(),
            c: self.c.iter().zip(&rhs.c).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.same_space(rhs);
        let mut c = vec![0.0; self.space.len()];
        for &(i, j, k) in &self.space.products {
            c[k] += self.c[i] * rhs.c[j];
        }
        Jet { space: self.space.clone(), c }
    }
}

impl Div for &Jet {
    type Output = Jet;
    fn div(self, rhs: &Jet) -> Jet {
        self * &rhs.recip()
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.mul_scalar(-1.0)
    }
}

macro_rules! forward_owned {
    ($trait:ident, $m:ident) => {
        impl $trait for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        (&self).neg()
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.mul_scalar(s)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, s: f64) -> Jet {
        self.mul_scalar(s)
    }
}

impl Add<f64> for &Jet {
    type Output = Jet;
    fn add(self, s: f64) -> Jet {
        let mut out = self.clone();
        out.c[0] += s;
        out
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, s: f64) -> Jet {
        (&self) + s
    }
}

impl Sub<f64> for &Jet {
    type Output = Jet;
    fn sub(self, s: f64) -> Jet {
        self + (-s)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, s: f64) -> Jet {
        (&self) + (-s)
    }
}
