//! Stationary points of discretized one-dimensional actions
//! `S = ∫ w(r) L(r, φ, φ') dr`.
//!
//! The trial space is piecewise linear: each element uses its own slope and
//! the trapezoid rule over its two nodes, which makes the Hessian of `S`
//! symmetric tridiagonal. Interior node values are found by damped Newton
//! iteration with Dirichlet values at both ends.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::tensor_core::Sign;

/// Gradient max-norm at which Newton stops.
pub const GRADIENT_TOLERANCE: f64 = 1e-10;
pub const MAX_ITERATIONS: usize = 100;
pub const MAX_HALVINGS: usize = 30;
/// Finite-difference step of [`gradient_check`].
pub const FD_STEP: f64 = 1e-6;

/// A Lagrangian density `L(r, φ, p)` with `p = φ'`, and its first and second
/// partial derivatives.
pub trait Density: Send + Sync {
    fn value(&self, r: f64, phi: f64, p: f64) -> f64;
    fn d_phi(&self, r: f64, phi: f64, p: f64) -> f64;
    fn d_p(&self, r: f64, phi: f64, p: f64) -> f64;
    fn d_phi_phi(&self, r: f64, phi: f64, p: f64) -> f64;
    fn d_phi_p(&self, r: f64, phi: f64, p: f64) -> f64;
    fn d_p_p(&self, r: f64, phi: f64, p: f64) -> f64;
    /// Whether the density is defined for slope `p`.
    fn admits(&self, _p: f64) -> bool {
        true
    }
}

/// `p^2 / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Quadratic;

impl Density for Quadratic {
    fn value(&self, _: f64, _: f64, p: f64) -> f64 {
        0.5 * p * p
    }
    fn d_phi(&self, _: f64, _: f64, _: f64) -> f64 {
        0.0
    }
    fn d_p(&self, _: f64, _: f64, p: f64) -> f64 {
        p
    }
    fn d_phi_phi(&self, _: f64, _: f64, _: f64) -> f64 {
        0.0
    }
    fn d_phi_p(&self, _: f64, _: f64, _: f64) -> f64 {
        0.0
    }
    fn d_p_p(&self, _: f64, _: f64, _: f64) -> f64 {
        1.0
    }
}

/// `sqrt(1 - sign p^2)`: the static radial reduction of the strict scalar
/// Lagrangian. The upper sign needs `|p| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrictRadial {
    pub sign: Sign,
}

impl StrictRadial {
    fn rad(&self, p: f64) -> f64 {
        1.0 - self.sign.value() * p * p
    }
}

impl Density for StrictRadial {
    fn value(&self, _: f64, _: f64, p: f64) -> f64 {
        self.rad(p).sqrt()
    }
    fn d_phi(&self, _: f64, _: f64, _: f64) -> f64 {
        0.0
    }
    fn d_p(&self, _: f64, _: f64, p: f64) -> f64 {
        -self.sign.value() * p / self.rad(p).sqrt()
    }
    fn d_phi_phi(&self, _: f64, _: f64, _: f64) -> f64 {
        0.0
    }
    fn d_phi_p(&self, _: f64, _: f64, _: f64) -> f64 {
        0.0
    }
    fn d_p_p(&self, _: f64, _: f64, p: f64) -> f64 {
        -self.sign.value() / self.rad(p).powf(1.5)
    }
    fn admits(&self, p: f64) -> bool {
        p.is_finite() && self.rad(p) > 0.0
    }
}

/// Measure factor in front of the density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Weight {
    #[default]
    Unit,
    /// `r^2`, the radial part of the volume element.
    RadialSquared,
}

impl Weight {
    pub fn at(self, r: f64) -> f64 {
        match self {
            Weight::Unit => 1.0,
            Weight::RadialSquared => r * r,
        }
    }
}

/// Grid, density, end values and measure of a one-dimensional action.
pub struct ActionProblem<D: Density> {
    grid: Vec<f64>,
    pub density: D,
    pub left: f64,
    pub right: f64,
    pub weight: Weight,
}

impl<D: Density> ActionProblem<D> {
    pub fn new(grid: Vec<f64>, density: D, left: f64, right: f64, weight: Weight) -> Result<Self> {
        if grid.len() < 3 {
            return Err(Error::InvalidInput(format!("need at least 3 nodes, got {}", grid.len())));
        }
        if grid.iter().any(|r| !r.is_finite()) || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("nodes must be finite and strictly increasing".into()));
        }
        if !(left.is_finite() && right.is_finite()) {
            return Err(Error::InvalidInput("boundary values must be finite".into()));
        }
        Ok(Self {
            grid,
            density,
            left,
            right,
            weight,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Linear interpolation of the boundary values.
    pub fn linear_guess(&self) -> Vec<f64> {
        let (a, b) = (self.grid[0], self.grid[self.grid.len() - 1]);
        self.grid
            .iter()
            .map(|r| self.left + (self.right - self.left) * (r - a) / (b - a))
            .collect()
    }

    fn check_len(&self, phi: &[f64]) -> Result<()> {
        if phi.len() != self.grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} node values for {} nodes",
                phi.len(),
                self.grid.len()
            )));
        }
        Ok(())
    }

    /// Slope of element `e`.
    fn slope(&self, phi: &[f64], e: usize) -> f64 {
        (phi[e + 1] - phi[e]) / (self.grid[e + 1] - self.grid[e])
    }

    fn check_domain(&self, phi: &[f64]) -> Result<()> {
        for e in 0..self.grid.len() - 1 {
            let s = self.slope(phi, e);
            if !self.density.admits(s) {
                return Err(Error::DomainViolation { element: e, slope: s });
            }
        }
        Ok(())
    }

    /// Trapezoidal action of element `e` given its end values.
    fn element_action(&self, e: usize, pa: f64, pb: f64) -> f64 {
        let (ra, rb) = (self.grid[e], self.grid[e + 1]);
        let h = rb - ra;
        let s = (pb - pa) / h;
        0.5 * h * (self.weight.at(ra) * self.density.value(ra, pa, s) + self.weight.at(rb) * self.density.value(rb, pb, s))
    }

    /// Gradient `(∂/∂φ_a, ∂/∂φ_b)` and Hessian `(aa, ab, bb)` of one element.
    fn element_derivatives(&self, e: usize, pa: f64, pb: f64) -> ([f64; 2], [f64; 3]) {
        let (ra, rb) = (self.grid[e], self.grid[e + 1]);
        let h = rb - ra;
        let s = (pb - pa) / h;
        let (wa, wb) = (self.weight.at(ra), self.weight.at(rb));
        let d = &self.density;
        let flux = wa * d.d_p(ra, pa, s) + wb * d.d_p(rb, pb, s);
        let stiff = wa * d.d_p_p(ra, pa, s) + wb * d.d_p_p(rb, pb, s);
        let (xa, xb) = (wa * d.d_phi_p(ra, pa, s), wb * d.d_phi_p(rb, pb, s));
        let g = [
            0.5 * h * wa * d.d_phi(ra, pa, s) - 0.5 * flux,
            0.5 * h * wb * d.d_phi(rb, pb, s) + 0.5 * flux,
        ];
        let hess = [
            0.5 * h * wa * d.d_phi_phi(ra, pa, s) - xa + stiff / (2.0 * h),
            0.5 * xa - 0.5 * xb - stiff / (2.0 * h),
            0.5 * h * wb * d.d_phi_phi(rb, pb, s) + xb + stiff / (2.0 * h),
        ];
        (g, hess)
    }

    /// Gradient of the action with respect to every node value.
    pub fn action_gradient(&self, phi: &[f64]) -> Result<Vec<f64>> {
        self.check_len(phi)?;
        self.check_domain(phi)?;
        let mut g = vec![0.0; phi.len()];
        for e in 0..phi.len() - 1 {
            let (ge, _) = self.element_derivatives(e, phi[e], phi[e + 1]);
            g[e] += ge[0];
            g[e + 1] += ge[1];
        }
        Ok(g)
    }

    /// Tridiagonal Hessian `(lower, diagonal, upper)` over all nodes.
    fn hessian(&self, phi: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = phi.len();
        let (mut lo, mut di, mut up) = (vec![0.0; n - 1], vec![0.0; n], vec![0.0; n - 1]);
        for e in 0..n - 1 {
            let (_, h) = self.element_derivatives(e, phi[e], phi[e + 1]);
            di[e] += h[0];
            up[e] += h[1];
            lo[e] += h[1];
            di[e + 1] += h[2];
        }
        (lo, di, up)
    }
}

/// `Σ_elements h/2 (w L|_a + w L|_b)` with the element slope at both ends.
pub fn discrete_action<D: Density>(p: &ActionProblem<D>, phi: &[f64]) -> Result<f64> {
    p.check_len(phi)?;
    p.check_domain(phi)?;
    Ok((0..phi.len() - 1).map(|e| p.element_action(e, phi[e], phi[e + 1])).sum())
}

/// `4π Σ r^2 T00` with `T00 = -L` for static fields, i.e. `-4π S` under the
/// `r^2` measure.
pub fn discrete_energy<D: Density>(p: &ActionProblem<D>, phi: &[f64]) -> Result<f64> {
    Ok(-4.0 * PI * discrete_action(p, phi)?)
}

/// Solves `a_i x_{i-1} + b_i x_i + c_i x_{i+1} = d_i`.
fn thomas(lo: &[f64], di: &[f64], up: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = di.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut piv = di[0];
    if piv == 0.0 || !piv.is_finite() {
        return None;
    }
    c[0] = if n > 1 { up[0] / piv } else { 0.0 };
    d[0] = rhs[0] / piv;
    for i in 1..n {
        piv = di[i] - lo[i - 1] * c[i - 1];
        if piv == 0.0 || !piv.is_finite() {
            return None;
        }
        c[i] = if i + 1 < n { up[i] / piv } else { 0.0 };
        d[i] = (rhs[i] - lo[i - 1] * d[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Some(d)
}

fn interior_norm(g: &[f64]) -> f64 {
    g[1..g.len() - 1].iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Outcome of a stationary solve.
#[derive(Debug, Clone, PartialEq)]
pub struct Stationary {
    pub phi: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
}

/// Node values at which the interior gradient of the discrete action
/// vanishes. The end values of `init` are replaced by the Dirichlet data.
pub fn solve_stationary<D: Density>(p: &ActionProblem<D>, init: &[f64]) -> Result<Stationary> {
    p.check_len(init)?;
    let n = init.len();
    let mut phi = init.to_vec();
    phi[0] = p.left;
    phi[n - 1] = p.right;
    let mut g = p.action_gradient(&phi)?;
    let mut norm = interior_norm(&g);
    for it in 0..MAX_ITERATIONS {
        if norm <= GRADIENT_TOLERANCE {
            return Ok(Stationary {
                phi,
                iterations: it,
                gradient_norm: norm,
            });
        }
        let (lo, di, up) = p.hessian(&phi);
        let rhs: Vec<f64> = g[1..n - 1].iter().map(|v| -v).collect();
        let step = thomas(&lo[1..n - 2], &di[1..n - 1], &up[1..n - 2], &rhs).ok_or(Error::NoConvergence {
            iterations: it,
            residual: norm,
        })?;
        let mut t = 1.0;
        let mut accepted = None;
        let mut last_domain = None;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = phi.clone();
            for (k, s) in step.iter().enumerate() {
                trial[k + 1] += t * s;
            }
            match p.action_gradient(&trial) {
                Ok(tg) => {
                    let tn = interior_norm(&tg);
                    if tn < norm {
                        accepted = Some((trial, tg, tn));
                        break;
                    }
                }
                Err(e @ Error::DomainViolation { .. }) => last_domain = Some(e),
                Err(e) => return Err(e),
            }
            t *= 0.5;
        }
        match accepted {
            Some((trial, tg, tn)) => {
                phi = trial;
                g = tg;
                norm = tn;
            }
            None => {
                return Err(last_domain.unwrap_or(Error::NoConvergence {
                    iterations: it + 1,
                    residual: norm,
                }))
            }
        }
    }
    if norm <= GRADIENT_TOLERANCE {
        return Ok(Stationary {
            phi,
            iterations: MAX_ITERATIONS,
            gradient_norm: norm,
        });
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        residual: norm,
    })
}

/// `max|g - g_fd| / max|g|` over all nodes, where `g_fd` takes central
/// differences of the actions of the elements touching each node. Absolute
/// when the analytic gradient vanishes.
pub fn gradient_check<D: Density>(p: &ActionProblem<D>, phi: &[f64]) -> Result<f64> {
    let g = p.action_gradient(phi)?;
    let n = phi.len();
    let local = |k: usize, v: f64| {
        let mut s = 0.0;
        if k > 0 {
            s += p.element_action(k - 1, phi[k - 1], v);
        }
        if k + 1 < n {
            s += p.element_action(k, v, phi[k + 1]);
        }
        s
    };
    let mut err = 0.0f64;
    let mut scale = 0.0f64;
    for k in 0..n {
        let fd = (local(k, phi[k] + FD_STEP) - local(k, phi[k] - FD_STEP)) / (2.0 * FD_STEP);
        err = err.max((fd - g[k]).abs());
        scale = scale.max(g[k].abs());
    }
    Ok(if scale > 0.0 { err / scale } else { err })
}

/// `r^2 φ' / sqrt(1 - sign φ'^2)` per element, from element slopes and
/// midpoint radii; constant for a stationary strict profile up to `O(Δ^2)`.
pub fn element_fluxes(grid: &[f64], phi: &[f64], sign: Sign) -> Vec<f64> {
    grid.windows(2)
        .zip(phi.windows(2))
        .map(|(r, v)| {
            let s = (v[1] - v[0]) / (r[1] - r[0]);
            let m = 0.5 * (r[0] + r[1]);
            m * m * s / (1.0 - sign.value() * s * s).sqrt()
        })
        .collect()
}

/// `n` equally spaced nodes on `[a, b]`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(b > a) {
        return Err(Error::InvalidInput(format!("uniform grid needs n >= 2 and a < b (n={n})")));
    }
    let h = (b - a) / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| a + h * i as f64).collect();
    g[n - 1] = b;
    Ok(g)
}
