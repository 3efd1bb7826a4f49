//! Analytic test fields with exact partial derivatives of any order.
//!
//! Scalar fields are built from multivariate polynomials and plane waves
//! `a * sin(k.x + phase)`, closed under sums, scaling and differentiation.
//! A covector field is four scalar components.

use crate::tensor_core::{Mat4, Point4};

/// Derivative multi-index: `orders[i]` differentiations along `x^i`.
pub type Orders = [u32; 4];

fn falling(p: u32, n: u32) -> f64 {
    (0..n).map(|m| (p - m) as f64).product()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: [u32; 4],
}

impl Monomial {
    fn derivative(&self, x: &Point4, orders: Orders) -> f64 {
        let mut v = self.coeff;
        for i in 0..4 {
            let (p, n) = (self.powers[i], orders[i]);
            if n > p {
                return 0.0;
            }
            v *= falling(p, n) * x[i].powi((p - n) as i32);
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    pub terms: Vec<Monomial>,
}

impl Polynomial {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::new().term(c, [0; 4])
    }

    /// The coordinate function `x^axis`.
    pub fn coordinate(axis: usize) -> Self {
        let mut p = [0; 4];
        p[axis] = 1;
        Self::new().term(1.0, p)
    }

    pub fn term(mut self, coeff: f64, powers: [u32; 4]) -> Self {
        self.terms.push(Monomial { coeff, powers });
        self
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .map(|m| m.powers.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn derivative(&self, x: &Point4, orders: Orders) -> f64 {
        self.terms.iter().map(|m| m.derivative(x, orders)).sum()
    }
}

/// `amplitude * sin(k.x + phase)` with the Euclidean dot product `k.x`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWave {
    pub amplitude: f64,
    pub wavevector: [f64; 4],
    pub phase: f64,
}

impl PlaneWave {
    pub fn derivative(&self, x: &Point4, orders: Orders) -> f64 {
        let theta: f64 = (0..4).map(|i| self.wavevector[i] * x[i]).sum::<f64>() + self.phase;
        let n: u32 = orders.iter().sum();
        let factor: f64 = (0..4).map(|i| self.wavevector[i].powi(orders[i] as i32)).product();
        let trig = match n % 4 {
            0 => theta.sin(),
            1 => theta.cos(),
            2 => -theta.sin(),
            _ => -theta.cos(),
        };
        self.amplitude * factor * trig
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarField {
    Polynomial(Polynomial),
    PlaneWave(PlaneWave),
    Sum(Vec<ScalarField>),
    Scaled(f64, Box<ScalarField>),
    /// `∂/∂x^axis` of the inner field.
    Partial(usize, Box<ScalarField>),
}

impl From<Polynomial> for ScalarField {
    fn from(p: Polynomial) -> Self {
        ScalarField::Polynomial(p)
    }
}

impl From<PlaneWave> for ScalarField {
    fn from(w: PlaneWave) -> Self {
        ScalarField::PlaneWave(w)
    }
}

impl ScalarField {
    pub fn zero() -> Self {
        Polynomial::new().into()
    }

    pub fn constant(c: f64) -> Self {
        Polynomial::constant(c).into()
    }

    pub fn coordinate(axis: usize) -> Self {
        Polynomial::coordinate(axis).into()
    }

    pub fn wave(amplitude: f64, wavevector: [f64; 4], phase: f64) -> Self {
        PlaneWave {
            amplitude,
            wavevector,
            phase,
        }
        .into()
    }

    pub fn scaled(&self, s: f64) -> Self {
        ScalarField::Scaled(s, Box::new(self.clone()))
    }

    pub fn plus(&self, other: &ScalarField) -> Self {
        ScalarField::Sum(vec![self.clone(), other.clone()])
    }

    /// The field `∂f/∂x^axis`.
    pub fn partial(&self, axis: usize) -> Self {
        ScalarField::Partial(axis, Box::new(self.clone()))
    }

    pub fn derivative(&self, x: &Point4, orders: Orders) -> f64 {
        match self {
            ScalarField::Polynomial(p) => p.derivative(x, orders),
            ScalarField::PlaneWave(w) => w.derivative(x, orders),
            ScalarField::Sum(parts) => parts.iter().map(|f| f.derivative(x, orders)).sum(),
            ScalarField::Scaled(s, f) => s * f.derivative(x, orders),
            ScalarField::Partial(axis, f) => {
                let mut o = orders;
                o[*axis] += 1;
                f.derivative(x, o)
            }
        }
    }

    pub fn value(&self, x: &Point4) -> f64 {
        self.derivative(x, [0; 4])
    }

    pub fn gradient(&self, x: &Point4) -> [f64; 4] {
        std::array::from_fn(|i| {
            let mut o = [0; 4];
            o[i] = 1;
            self.derivative(x, o)
        })
    }

    pub fn hessian(&self, x: &Point4) -> Mat4 {
        let mut h = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let mut o = [0; 4];
                o[i] += 1;
                o[j] += 1;
                h[i][j] = self.derivative(x, o);
            }
        }
        h
    }

    pub fn label(&self) -> String {
        match self {
            ScalarField::Polynomial(p) => format!("poly(deg {}, {} terms)", p.degree(), p.terms.len()),
            ScalarField::PlaneWave(w) => format!("{}*sin(k={:?})", w.amplitude, w.wavevector),
            ScalarField::Sum(parts) => parts.iter().map(|f| f.label()).collect::<Vec<_>>().join(" + "),
            ScalarField::Scaled(s, f) => format!("{s}*({})", f.label()),
            ScalarField::Partial(a, f) => format!("d{a}({})", f.label()),
        }
    }
}

/// A covariant vector field `A_i(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovectorField {
    pub label: String,
    pub components: [ScalarField; 4],
}

impl CovectorField {
    pub fn new(label: impl Into<String>, components: [ScalarField; 4]) -> Self {
        Self {
            label: label.into(),
            components,
        }
    }

    pub fn zero() -> Self {
        Self::new("zero", std::array::from_fn(|_| ScalarField::zero()))
    }

    /// A field with a single nonzero component.
    pub fn single(label: impl Into<String>, axis: usize, f: ScalarField) -> Self {
        let mut c: [ScalarField; 4] = std::array::from_fn(|_| ScalarField::zero());
        c[axis] = f;
        Self::new(label, c)
    }

    /// `A_i = ∂f/∂x^i`.
    pub fn gradient_of(f: &ScalarField) -> Self {
        Self::new(format!("grad {}", f.label()), std::array::from_fn(|i| f.partial(i)))
    }

    /// The gauge-shifted field `A_i + ∂f/∂x^i`.
    pub fn plus_gradient(&self, f: &ScalarField) -> Self {
        Self::new(
            format!("{} + grad {}", self.label, f.label()),
            std::array::from_fn(|i| self.components[i].plus(&f.partial(i))),
        )
    }

    pub fn value(&self, x: &Point4) -> [f64; 4] {
        std::array::from_fn(|k| self.components[k].value(x))
    }

    /// `j[i][k] = ∂A_k/∂x^i`.
    pub fn jacobian(&self, x: &Point4) -> Mat4 {
        let mut j = [[0.0; 4]; 4];
        for (k, comp) in self.components.iter().enumerate() {
            let g = comp.gradient(x);
            for i in 0..4 {
                j[i][k] = g[i];
            }
        }
        j
    }

    /// `s[i][j][k] = ∂²A_k/∂x^i∂x^j`.
    pub fn second(&self, x: &Point4) -> [[[f64; 4]; 4]; 4] {
        let mut s = [[[0.0; 4]; 4]; 4];
        for (k, comp) in self.components.iter().enumerate() {
            let h = comp.hessian(x);
            for i in 0..4 {
                for j in 0..4 {
                    s[i][j][k] = h[i][j];
                }
            }
        }
        s
    }
}

/// Built-in field families used by the verification suites.
pub mod catalog {
    use super::*;

    /// Five covector families: polynomial and plane-wave, null and non-null.
    pub fn covector_families() -> Vec<CovectorField> {
        let x = |i| ScalarField::coordinate(i);
        vec![
            CovectorField::single("A1 = x0", 1, x(0)),
            CovectorField::single("A1 = (x0)^2", 1, Polynomial::new().term(1.0, [2, 0, 0, 0]).into()),
            null_plane_wave(),
            CovectorField::new(
                "mixed cubic",
                [
                    Polynomial::new().term(1.0, [0, 1, 1, 0]).term(-0.5, [0, 0, 0, 2]).into(),
                    Polynomial::new().term(1.0, [2, 0, 0, 1]).term(-1.0, [0, 0, 2, 0]).into(),
                    Polynomial::new().term(0.5, [1, 1, 0, 0]).term(0.25, [0, 3, 0, 0]).into(),
                    Polynomial::new().term(1.0, [0, 2, 0, 0]).term(1.0, [1, 0, 0, 1]).term(0.3, [0, 0, 0, 0]).into(),
                ],
            ),
            CovectorField::new(
                "plane-wave packet",
                [
                    ScalarField::wave(0.7, [1.0, 0.5, 0.0, -0.3], 0.2),
                    ScalarField::wave(0.4, [0.3, 1.1, 0.7, 0.0], 1.0),
                    ScalarField::wave(1.0, [2.0, 0.0, 1.0, 1.0], -0.4)
                        .plus(&ScalarField::wave(0.2, [0.5, 0.5, 0.5, 0.5], 0.0)),
                    ScalarField::wave(0.3, [0.0, 0.2, 0.9, 1.3], 0.7),
                ],
            ),
        ]
    }

    /// `A_2 = sin(x0 - x1)`: null wave vector, transverse, Lorenz gauge.
    pub fn null_plane_wave() -> CovectorField {
        CovectorField::single("A2 = sin(x0 - x1)", 2, ScalarField::wave(1.0, [1.0, -1.0, 0.0, 0.0], 0.0))
    }

    /// Five polynomial gauge functions of degree at most 3.
    pub fn gauge_functions() -> Vec<ScalarField> {
        vec![
            Polynomial::new().term(1.0, [1, 1, 0, 0]).into(),
            Polynomial::new().term(0.5, [2, 0, 0, 0]).term(-1.5, [0, 0, 1, 0]).into(),
            Polynomial::new().term(1.0, [0, 1, 1, 1]).into(),
            Polynomial::new()
                .term(2.0, [3, 0, 0, 0])
                .term(-1.0, [1, 2, 0, 0])
                .term(0.7, [0, 0, 2, 1])
                .term(0.1, [0, 0, 0, 1])
                .into(),
            Polynomial::new()
                .term(1.0, [1, 0, 0, 1])
                .term(-0.3, [0, 2, 0, 0])
                .term(0.9, [0, 1, 0, 2])
                .term(4.0, [0, 0, 0, 0])
                .into(),
        ]
    }
}
