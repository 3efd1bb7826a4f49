//! A single scalar field `phi` entering the metric as `h_ij = ± ∂_iφ ∂_jφ`.
//!
//! Static spherically symmetric solutions: the weak solution `c0 + c1/r`,
//! the strict solution with derivative `-c1 / sqrt(r^4 ± c1^2)` and its
//! improper integral, the field-free shell of the lower sign, and the energy
//! density `T00 = -r^2 / sqrt(r^4 ± c1^2)`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::quadrature::tanh_sinh;
use crate::tensor_core::{Point4, Sign, ETA};

/// Absolute error allowed for the strict potential.
pub const PHI_TOLERANCE: f64 = 1e-10;
const QUAD_TARGET: f64 = 1e-13;

/// Sign choice, integration constants and radial domain of a static problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialProblem {
    pub sign: Sign,
    pub c0: f64,
    pub c1: f64,
    pub r_min: f64,
    pub r_max: f64,
}

impl RadialProblem {
    pub fn new(sign: Sign, c0: f64, c1: f64, r_min: f64, r_max: f64) -> Result<Self> {
        let p = Self {
            sign,
            c0,
            c1,
            r_min,
            r_max,
        };
        if !(c0.is_finite() && c1.is_finite() && r_min.is_finite() && r_max.is_finite()) {
            return Err(Error::InvalidInput("non-finite radial problem parameter".into()));
        }
        if r_min < 0.0 || r_max <= r_min {
            return Err(Error::InvalidInput(format!(
                "radial domain [{r_min}, {r_max}] must satisfy 0 <= rmin < rmax"
            )));
        }
        if sign == Sign::Minus && r_min <= p.shell_radius() {
            return Err(Error::SingularShell {
                r: r_min,
                shell: p.shell_radius(),
            });
        }
        Ok(p)
    }

    /// `sqrt(|c1|)`; inside it the lower-sign solution has no field.
    pub fn shell_radius(&self) -> f64 {
        self.c1.abs().sqrt()
    }

    /// `r^4 + sign*c1^2`, factored so that the lower sign keeps full relative
    /// accuracy next to the shell.
    fn radicand(&self, r: f64) -> f64 {
        let a = self.c1.abs();
        match self.sign {
            Sign::Plus => r.powi(4) + a * a,
            Sign::Minus => (r - a.sqrt()) * (r + a.sqrt()) * (r * r + a),
        }
    }

    fn check_strict(&self, r: f64) -> Result<()> {
        if !r.is_finite() || r < 0.0 {
            return Err(Error::Domain(format!("radius {r} must be finite and >= 0")));
        }
        if self.sign == Sign::Minus && r <= self.shell_radius() {
            return Err(Error::SingularShell {
                r,
                shell: self.shell_radius(),
            });
        }
        Ok(())
    }
}

/// `(phi, dphi/dr) = (c0 + c1/r, -c1/r^2)`.
pub fn weak_radial(p: &RadialProblem, r: f64) -> Result<(f64, f64)> {
    if !r.is_finite() || r <= 0.0 {
        return Err(Error::Domain(format!("weak solution needs r > 0, got {r}")));
    }
    Ok((p.c0 + p.c1 / r, -p.c1 / (r * r)))
}

/// `dphi/dr = -c1 / sqrt(r^4 + sign*c1^2)`.
pub fn strict_radial_derivative(p: &RadialProblem, r: f64) -> Result<f64> {
    p.check_strict(r)?;
    if p.c1 == 0.0 {
        return Ok(0.0);
    }
    Ok(-p.c1 / p.radicand(r).sqrt())
}

/// Value and quadrature error bound of `c0 + ∫_r^∞ c1/sqrt(t^4 ± c1^2) dt`.
pub fn strict_radial_phi_with_bound(p: &RadialProblem, r: f64) -> Result<(f64, f64)> {
    p.check_strict(r)?;
    if p.c1 == 0.0 {
        return Ok((p.c0, 0.0));
    }
    let a = p.c1.abs();
    let sign_c1 = p.c1.signum();
    let scale = a.sqrt();
    let res = match p.sign {
        Sign::Plus => {
            // With u = 1/t the tail is ∫_0^{1/t0} c1 / sqrt(1 + c1^2 u^4) du;
            // below t0 = sqrt|c1| the integrand is integrated directly.
            let t0 = r.max(scale);
            let mut res = tanh_sinh(
                |u, _, _| {
                    let s = a * u * u;
                    1.0 / (1.0 + s * s).sqrt()
                },
                0.0,
                1.0 / t0,
                QUAD_TARGET,
            );
            if r < t0 {
                let inner = tanh_sinh(|t, _, _| 1.0 / (t.powi(4) + a * a).sqrt(), r, t0, QUAD_TARGET);
                res.value += inner.value;
                res.error_bound += inner.error_bound;
            }
            res
        }
        Sign::Minus => {
            // ∫_0^{1/r} c1 / sqrt(1 - c1^2 u^4) du; 1 - a u^2 is expanded
            // around the endpoint u = 1/r, where it is smallest.
            let upper = 1.0 / r;
            let gap = (r - scale) * (r + scale) / (r * r);
            tanh_sinh(
                |u, _, d| {
                    let one_minus = gap + a * d * (2.0 * upper - d);
                    1.0 / (one_minus * (1.0 + a * u * u)).sqrt()
                },
                0.0,
                upper,
                QUAD_TARGET,
            )
        }
    };
    let value = p.c0 + sign_c1 * a * res.value;
    let bound = a * res.error_bound;
    if !(value.is_finite() && bound <= PHI_TOLERANCE) {
        return Err(Error::QuadratureFailure {
            bound,
            tolerance: PHI_TOLERANCE,
        });
    }
    Ok((value, bound))
}

pub fn strict_radial_phi(p: &RadialProblem, r: f64) -> Result<f64> {
    strict_radial_phi_with_bound(p, r).map(|(v, _)| v)
}

/// `T00 = -r^2 / sqrt(r^4 + sign*c1^2)`.
pub fn energy_density_t00(p: &RadialProblem, r: f64) -> Result<f64> {
    p.check_strict(r)?;
    if p.c1 == 0.0 {
        return Ok(-1.0);
    }
    Ok(-r * r / p.radicand(r).sqrt())
}

/// `∫_{rmin}^{router} T00 4 pi r^2 dr`.
pub fn partial_energy(p: &RadialProblem, r_outer: f64) -> Result<f64> {
    p.check_strict(r_outer)?;
    if r_outer < p.r_min {
        return Err(Error::InvalidInput(format!(
            "outer radius {r_outer} below rmin {}",
            p.r_min
        )));
    }
    if r_outer == p.r_min {
        return Ok(0.0);
    }
    if p.c1 == 0.0 {
        return Ok(-4.0 * PI / 3.0 * (r_outer.powi(3) - p.r_min.powi(3)));
    }
    let res = tanh_sinh(
        |r, da, _| {
            let rad = match p.sign {
                Sign::Plus => p.radicand(r),
                // Distance from rmin keeps the shell factor accurate.
                Sign::Minus => {
                    let s = p.shell_radius();
                    ((p.r_min - s) + da) * (r + s) * (r * r + p.c1.abs())
                }
            };
            -4.0 * PI * r.powi(4) / rad.sqrt()
        },
        p.r_min,
        r_outer,
        QUAD_TARGET,
    );
    let tol = PHI_TOLERANCE * res.value.abs().max(1.0);
    if !(res.value.is_finite() && res.error_bound <= tol) {
        return Err(Error::QuadratureFailure {
            bound: res.error_bound,
            tolerance: tol,
        });
    }
    Ok(res.value)
}

/// Which static radial equation a profile is checked against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialOperator {
    /// `d/dr (r^2 φ')`.
    Linear,
    /// `d/dr (r^2 φ' / sqrt(1 ∓ φ'^2))`.
    Strict,
}

/// One sample of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialSample {
    pub r: f64,
    pub phi: f64,
    pub dphi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub samples: Vec<RadialSample>,
    pub sign: Sign,
    pub quadrature_error_bound: f64,
}

/// `n` log-spaced nodes from `r_min` to `r_max` inclusive.
pub fn geometric_grid(r_min: f64, r_max: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 || !(r_min > 0.0) || !(r_max > r_min) {
        return Err(Error::InvalidInput(format!(
            "geometric grid needs n >= 2 and 0 < rmin < rmax (n={n}, [{r_min}, {r_max}])"
        )));
    }
    let ratio = (r_max / r_min).ln() / (n - 1) as f64;
    let mut g: Vec<f64> = (0..n).map(|i| r_min * (ratio * i as f64).exp()).collect();
    g[0] = r_min;
    g[n - 1] = r_max;
    Ok(g)
}

/// Samples the weak solution on `grid`.
pub fn weak_profile(p: &RadialProblem, grid: &[f64]) -> Result<RadialSolution> {
    let samples = grid
        .iter()
        .map(|&r| weak_radial(p, r).map(|(phi, dphi)| RadialSample { r, phi, dphi }))
        .collect::<Result<Vec<_>>>()?;
    Ok(RadialSolution {
        samples,
        sign: p.sign,
        quadrature_error_bound: 0.0,
    })
}

/// Samples the strict solution on `grid`; every node is independent, so the
/// result does not depend on how the work is split.
pub fn strict_profile(p: &RadialProblem, grid: &[f64]) -> Result<RadialSolution> {
    let samples = grid
        .par_iter()
        .map(|&r| {
            let (phi, bound) = strict_radial_phi_with_bound(p, r)?;
            let dphi = strict_radial_derivative(p, r)?;
            Ok((RadialSample { r, phi, dphi }, bound))
        })
        .collect::<Result<Vec<_>>>()?;
    let bound = samples.iter().fold(0.0f64, |m, (_, b)| m.max(*b));
    Ok(RadialSolution {
        samples: samples.into_iter().map(|(s, _)| s).collect(),
        sign: p.sign,
        quadrature_error_bound: bound,
    })
}

/// Radial flux of the chosen operator; a solution keeps it constant.
pub fn radial_flux(op: RadialOperator, sign: Sign, r: f64, dphi: f64) -> f64 {
    match op {
        RadialOperator::Linear => r * r * dphi,
        RadialOperator::Strict => r * r * dphi / (1.0 - sign.value() * dphi * dphi).sqrt(),
    }
}

/// Max over interior samples of `|d(flux)/dr|` by centered differences on
/// the (possibly non-uniform) grid.
pub fn ode_residual(profile: &RadialSolution, op: RadialOperator) -> f64 {
    let s = &profile.samples;
    if s.len() < 3 {
        return 0.0;
    }
    let flux: Vec<f64> = s
        .iter()
        .map(|x| radial_flux(op, profile.sign, x.r, x.dphi))
        .collect();
    (1..s.len() - 1)
        .map(|i| {
            let (h0, h1) = (s[i].r - s[i - 1].r, s[i + 1].r - s[i].r);
            // Three-point derivative, second order on non-uniform spacing.
            let d = (-h1 / (h0 * (h0 + h1))) * flux[i - 1]
                + ((h1 - h0) / (h0 * h1)) * flux[i]
                + (h0 / (h1 * (h0 + h1))) * flux[i + 1];
            d.abs()
        })
        .fold(0.0, f64::max)
}

pub fn strict_ode_residual(profile: &RadialSolution) -> f64 {
    ode_residual(profile, RadialOperator::Strict)
}

/// Flux `∂_jφ / sqrt(1 ± L1)` of the strict scalar equation at a point, with
/// `L1 = eta^ij ∂_iφ ∂_jφ`. The strict equation is `eta^ij ∂_i(flux_j) = 0`.
pub fn strict_scalar_flux(sign: Sign, grad: &[f64; 4]) -> Result<[f64; 4]> {
    let l1: f64 = (0..4).map(|i| ETA[i] * grad[i] * grad[i]).sum();
    let rad = 1.0 + sign.value() * l1;
    if rad <= 0.0 {
        return Err(Error::IndefiniteMetric {
            radicand: rad,
            location: format!("gradient {grad:?}"),
        });
    }
    Ok(grad.map(|g| g / rad.sqrt()))
}

/// `eta^ij ∂_i∂_j phi`: the first-order (wave) equation residual.
pub fn wave_residual(phi: &ScalarField, x: &Point4) -> f64 {
    let h = phi.hessian(x);
    (0..4).map(|i| ETA[i] * h[i][i]).sum()
}
