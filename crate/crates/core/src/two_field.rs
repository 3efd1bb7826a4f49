//! Two scalar fields `φ`, `ψ` entering the metric as
//! `h_ij = ε_φ ∂_iφ ∂_jφ + ε_ψ ∂_iψ ∂_jψ`.
//!
//! With `P = <∂φ,∂φ>`, `Q = <∂ψ,∂ψ>`, `R = <∂φ,∂ψ>` (Minkowski products) the
//! strict Lagrangian is `sqrt(D)` with
//! `D = 1 + ε_φ P + ε_ψ Q + ε_φ ε_ψ (P Q - R^2)`, and the field equations are
//! `∂_i Φ^i = 0`, `∂_i Ψ^i = 0` for the fluxes
//!
//! ```text
//! Φ^i = η^ii (∂_iφ (1 + ε_ψ Q) - ε_ψ ∂_iψ R) / sqrt(D)
//! Ψ^i = η^ii (∂_iψ (1 + ε_φ P) - ε_φ ∂_iφ R) / sqrt(D)
//! ```
//!
//! Residuals are available for analytic 4D fields and for sampled 1+1D
//! grids; evolution is 1+1D leapfrog.

use rayon::prelude::*;

use crate::dual::Dual;
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::tensor_core::{Point4, Sign, SymTensor2, ETA};

/// Signature of the 1+1D reduction `(x^0, x^1)`.
pub const ETA2: [f64; 2] = [1.0, -1.0];

/// Largest `dt/dx` accepted by the evolution.
pub const CFL_LIMIT: f64 = 0.9;

/// Field magnitude treated as blowup.
pub const BLOWUP: f64 = 1e6;

/// Two analytic scalar fields with their sign coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub phi: ScalarField,
    pub psi: ScalarField,
    pub eps_phi: Sign,
    pub eps_psi: Sign,
}

impl FieldPair {
    pub fn new(phi: ScalarField, psi: ScalarField, eps_phi: Sign, eps_psi: Sign) -> Self {
        Self {
            phi,
            psi,
            eps_phi,
            eps_psi,
        }
    }

    /// `(φ, ε_φ) <-> (ψ, ε_ψ)`.
    pub fn swapped(&self) -> Self {
        Self::new(self.psi.clone(), self.phi.clone(), self.eps_psi, self.eps_phi)
    }

    /// The metric perturbation built from both gradients.
    pub fn metric_perturbation(&self, x: &Point4) -> SymTensor2 {
        let g = self.phi.gradient(x);
        let k = self.psi.gradient(x);
        let (ep, es) = (self.eps_phi.value(), self.eps_psi.value());
        SymTensor2::from_fn(|i, j| ep * g[i] * g[j] + es * k[i] * k[j])
    }
}

/// `η^ij (ε_φ ∂_iφ ∂_jφ + ε_ψ ∂_iψ ∂_jψ)`.
pub fn two_field_l1(pair: &FieldPair, x: &Point4) -> f64 {
    let g = pair.phi.gradient(x);
    let k = pair.psi.gradient(x);
    (0..4)
        .map(|i| ETA[i] * (pair.eps_phi.value() * g[i] * g[i] + pair.eps_psi.value() * k[i] * k[i]))
        .sum()
}

/// `ε_φ ε_ψ Σ_{a<b} η_a η_b (∂_aφ ∂_bψ - ∂_bφ ∂_aψ)^2`: six squared Jacobian
/// brackets, time-paired ones negative.
pub fn two_field_l2(pair: &FieldPair, x: &Point4) -> f64 {
    let g = pair.phi.gradient(x);
    let k = pair.psi.gradient(x);
    let mut sum = 0.0;
    for a in 0..4 {
        for b in (a + 1)..4 {
            let bracket = g[a] * k[b] - g[b] * k[a];
            sum += ETA[a] * ETA[b] * bracket * bracket;
        }
    }
    pair.eps_phi.value() * pair.eps_psi.value() * sum
}

/// `sqrt(1 + L1 + L2)`.
pub fn strict_two_field_lagrangian(pair: &FieldPair, x: &Point4) -> Result<f64> {
    let rad = 1.0 + two_field_l1(pair, x) + two_field_l2(pair, x);
    if rad < 0.0 {
        return Err(Error::IndefiniteMetric {
            radicand: rad,
            location: format!("{x:?}"),
        });
    }
    Ok(rad.sqrt())
}

/// Fluxes `(Φ, Ψ)` and the radicand `D`, generic over dimension so that the
/// same expression serves the 4D analytic and 1+1D grid paths.
fn fluxes<const N: usize>(
    eta: &[f64; N],
    eps_phi: f64,
    eps_psi: f64,
    g: &[Dual; N],
    k: &[Dual; N],
) -> ([Dual; N], [Dual; N], Dual) {
    let mut p = Dual::constant(0.0);
    let mut q = Dual::constant(0.0);
    let mut r = Dual::constant(0.0);
    for i in 0..N {
        p = p + eta[i] * (g[i] * g[i]);
        q = q + eta[i] * (k[i] * k[i]);
        r = r + eta[i] * (g[i] * k[i]);
    }
    let one = Dual::constant(1.0);
    let d = one + eps_phi * p + eps_psi * q + (eps_phi * eps_psi) * (p * q - r * r);
    let root = d.sqrt();
    let a_phi = one + eps_psi * q;
    let a_psi = one + eps_phi * p;
    let phi_flux = std::array::from_fn(|i| eta[i] * ((g[i] * a_phi - eps_psi * (k[i] * r)) / root));
    let psi_flux = std::array::from_fn(|i| eta[i] * ((k[i] * a_psi - eps_phi * (g[i] * r)) / root));
    (phi_flux, psi_flux, d)
}

fn plain<const N: usize>(v: &[f64; N]) -> [Dual; N] {
    v.map(Dual::constant)
}

/// Flux values `(Φ^i, Ψ^i)` at given gradients.
pub fn flux_at<const N: usize>(
    eta: &[f64; N],
    eps_phi: Sign,
    eps_psi: Sign,
    grad_phi: &[f64; N],
    grad_psi: &[f64; N],
) -> Result<([f64; N], [f64; N])> {
    let (f, s, d) = fluxes(eta, eps_phi.value(), eps_psi.value(), &plain(grad_phi), &plain(grad_psi));
    if d.re <= 0.0 {
        return Err(Error::IndefiniteMetric {
            radicand: d.re,
            location: format!("gradients {grad_phi:?}, {grad_psi:?}"),
        });
    }
    Ok((f.map(|v| v.re), s.map(|v| v.re)))
}

/// `(□φ, □ψ)` for analytic fields.
pub fn linear_residuals_at(pair: &FieldPair, x: &Point4) -> (f64, f64) {
    let box_of = |f: &ScalarField| {
        let h = f.hessian(x);
        (0..4).map(|i| ETA[i] * h[i][i]).sum::<f64>()
    };
    (box_of(&pair.phi), box_of(&pair.psi))
}

/// `(∂_i Φ^i, ∂_i Ψ^i)` for analytic fields, differentiated exactly through
/// the field Hessians.
pub fn strict_residuals_at(pair: &FieldPair, x: &Point4) -> Result<(f64, f64)> {
    let g = pair.phi.gradient(x);
    let k = pair.psi.gradient(x);
    let hg = pair.phi.hessian(x);
    let hk = pair.psi.hessian(x);
    let (ep, es) = (pair.eps_phi.value(), pair.eps_psi.value());
    let mut res = (0.0, 0.0);
    for i in 0..4 {
        // Derivative along x^i: the gradients move with the i-th Hessian row.
        let gd: [Dual; 4] = std::array::from_fn(|j| Dual::new(g[j], hg[i][j]));
        let kd: [Dual; 4] = std::array::from_fn(|j| Dual::new(k[j], hk[i][j]));
        let (f, s, d) = fluxes(&ETA, ep, es, &gd, &kd);
        if d.re <= 0.0 {
            return Err(Error::IndefiniteMetric {
                radicand: d.re,
                location: format!("{x:?}"),
            });
        }
        res.0 += f[i].eps;
        res.1 += s[i].eps;
    }
    Ok(res)
}

/// Samples of one field on a space-time grid, row-major in time.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub nt: usize,
    pub nx: usize,
    pub dt: f64,
    pub dx: f64,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn zeros(nt: usize, nx: usize, dt: f64, dx: f64) -> Self {
        Self {
            nt,
            nx,
            dt,
            dx,
            values: vec![0.0; nt * nx],
        }
    }

    /// Samples `f(t, x)` at `t = n dt`, `x = m dx`.
    pub fn sample(nt: usize, nx: usize, dt: f64, dx: f64, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut g = Self::zeros(nt, nx, dt, dx);
        for n in 0..nt {
            for m in 0..nx {
                g.values[n * nx + m] = f(n as f64 * dt, m as f64 * dx);
            }
        }
        g
    }

    #[inline]
    pub fn at(&self, n: usize, m: usize) -> f64 {
        self.values[n * self.nx + m]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    fn same_shape(&self, o: &Self) -> bool {
        self.nt == o.nt && self.nx == o.nx && self.dt == o.dt && self.dx == o.dx
    }
}

/// Two sampled fields with their sign coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoFieldGrid {
    pub phi: GridFunction,
    pub psi: GridFunction,
    pub eps_phi: Sign,
    pub eps_psi: Sign,
}

impl TwoFieldGrid {
    fn validate(&self) -> Result<()> {
        if !self.phi.same_shape(&self.psi) {
            return Err(Error::InvalidInput("phi and psi grids differ in shape".into()));
        }
        if self.phi.nt < 3 || self.phi.nx < 3 {
            return Err(Error::InvalidInput("residuals need at least 3x3 samples".into()));
        }
        if !(self.phi.dt > 0.0 && self.phi.dx > 0.0) {
            return Err(Error::InvalidInput("grid spacings must be positive".into()));
        }
        Ok(())
    }
}

/// Discrete `□φ` and `□ψ` on the interior points; the result has shape
/// `(nt-2) x (nx-2)`.
pub fn linear_residuals(s: &TwoFieldGrid) -> Result<(GridFunction, GridFunction)> {
    s.validate()?;
    let lap = |f: &GridFunction| {
        let (nt, nx) = (f.nt, f.nx);
        let mut out = GridFunction::zeros(nt - 2, nx - 2, f.dt, f.dx);
        for n in 1..nt - 1 {
            for m in 1..nx - 1 {
                let tt = (f.at(n + 1, m) - 2.0 * f.at(n, m) + f.at(n - 1, m)) / (f.dt * f.dt);
                let xx = (f.at(n, m + 1) - 2.0 * f.at(n, m) + f.at(n, m - 1)) / (f.dx * f.dx);
                out.values[(n - 1) * (nx - 2) + (m - 1)] = tt - xx;
            }
        }
        out
    };
    Ok((lap(&s.phi), lap(&s.psi)))
}

/// Discrete divergence `∂_t Φ^t + ∂_x Φ^x` (and the same for `Ψ`) on the
/// interior. Fluxes live on half points: the normal derivative there is a
/// one-cell difference, the tangential one the average of the two adjacent
/// centered differences.
pub fn strict_residuals(s: &TwoFieldGrid) -> Result<(GridFunction, GridFunction)> {
    s.validate()?;
    let (f, p) = (&s.phi, &s.psi);
    let (nt, nx, dt, dx) = (f.nt, f.nx, f.dt, f.dx);
    let (ep, es) = (s.eps_phi, s.eps_psi);

    // Flux at (n + 1/2, m): time-normal.
    let t_half = |n: usize, m: usize| -> Result<([f64; 2], [f64; 2])> {
        let ct = |g: &GridFunction| (g.at(n + 1, m) - g.at(n, m)) / dt;
        let cx = |g: &GridFunction| {
            0.25 * ((g.at(n, m + 1) - g.at(n, m - 1)) + (g.at(n + 1, m + 1) - g.at(n + 1, m - 1))) / dx
        };
        flux_at(&ETA2, ep, es, &[ct(f), cx(f)], &[ct(p), cx(p)])
    };
    // Flux at (n, m + 1/2): space-normal.
    let x_half = |n: usize, m: usize| -> Result<([f64; 2], [f64; 2])> {
        let cx = |g: &GridFunction| (g.at(n, m + 1) - g.at(n, m)) / dx;
        let ct = |g: &GridFunction| {
            0.25 * ((g.at(n + 1, m) - g.at(n - 1, m)) + (g.at(n + 1, m + 1) - g.at(n - 1, m + 1))) / dt
        };
        flux_at(&ETA2, ep, es, &[ct(f), cx(f)], &[ct(p), cx(p)])
    };

    let rows: Vec<Vec<(f64, f64)>> = (1..nt - 1)
        .into_par_iter()
        .map(|n| {
            (1..nx - 1)
                .map(|m| {
                    let (tp_f, tp_s) = t_half(n, m)?;
                    let (tm_f, tm_s) = t_half(n - 1, m)?;
                    let (xp_f, xp_s) = x_half(n, m)?;
                    let (xm_f, xm_s) = x_half(n, m - 1)?;
                    Ok((
                        (tp_f[0] - tm_f[0]) / dt + (xp_f[1] - xm_f[1]) / dx,
                        (tp_s[0] - tm_s[0]) / dt + (xp_s[1] - xm_s[1]) / dx,
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rf = GridFunction::zeros(nt - 2, nx - 2, dt, dx);
    let mut rs = rf.clone();
    for (n, row) in rows.into_iter().enumerate() {
        for (m, (a, b)) in row.into_iter().enumerate() {
            rf.values[n * (nx - 2) + m] = a;
            rs.values[n * (nx - 2) + m] = b;
        }
    }
    Ok((rf, rs))
}

/// Which equations drive the evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Two independent wave equations.
    Linear,
    /// The coupled strict equations.
    Strict,
}

/// Treatment of the ends of the 1D spatial grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Periodic,
    /// Mirror ghost cells (zero normal derivative).
    Reflective,
}

/// Two consecutive time levels of both fields on a 1D spatial grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionState {
    pub dt: f64,
    pub dx: f64,
    pub eps_phi: Sign,
    pub eps_psi: Sign,
    pub boundary: Boundary,
    pub phi_prev: Vec<f64>,
    pub phi_curr: Vec<f64>,
    pub psi_prev: Vec<f64>,
    pub psi_curr: Vec<f64>,
    /// Index of the `curr` level.
    pub step: usize,
}

impl EvolutionState {
    /// Samples `φ(t, x)` and `ψ(t, x)` at `t = 0` and `t = dt` on `x = m dx`.
    pub fn from_solution(
        nx: usize,
        dx: f64,
        dt: f64,
        eps: (Sign, Sign),
        phi: impl Fn(f64, f64) -> f64,
        psi: impl Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        let level = |f: &dyn Fn(f64, f64) -> f64, t: f64| (0..nx).map(|m| f(t, m as f64 * dx)).collect();
        let s = Self {
            dt,
            dx,
            eps_phi: eps.0,
            eps_psi: eps.1,
            boundary: Boundary::Periodic,
            phi_prev: level(&phi, 0.0),
            phi_curr: level(&phi, dt),
            psi_prev: level(&psi, 0.0),
            psi_curr: level(&psi, dt),
            step: 1,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_boundary(mut self, boundary: Boundary) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn nx(&self) -> usize {
        self.phi_curr.len()
    }

    pub fn validate(&self) -> Result<()> {
        let nx = self.phi_curr.len();
        if nx < 3 || [&self.phi_prev, &self.psi_prev, &self.psi_curr].iter().any(|v| v.len() != nx) {
            return Err(Error::InvalidInput("all levels need the same length >= 3".into()));
        }
        if !(self.dt > 0.0 && self.dx > 0.0) {
            return Err(Error::InvalidInput("grid spacings must be positive".into()));
        }
        let ratio = self.dt / self.dx;
        if ratio > CFL_LIMIT {
            return Err(Error::CflViolation {
                ratio,
                limit: CFL_LIMIT,
            });
        }
        Ok(())
    }

    /// Pointwise sum of two states on the same grid.
    pub fn superpose(&self, other: &Self) -> Result<Self> {
        if self.dt != other.dt || self.dx != other.dx || self.nx() != other.nx() {
            return Err(Error::InvalidInput("states live on different grids".into()));
        }
        let add = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Ok(Self {
            phi_prev: add(&self.phi_prev, &other.phi_prev),
            phi_curr: add(&self.phi_curr, &other.phi_curr),
            psi_prev: add(&self.psi_prev, &other.psi_prev),
            psi_curr: add(&self.psi_curr, &other.psi_curr),
            ..self.clone()
        })
    }

    /// Spatial neighbours of cell `m` under the boundary rule.
    fn neighbours(&self, m: usize) -> (usize, usize) {
        let nx = self.nx();
        match self.boundary {
            Boundary::Periodic => ((m + nx - 1) % nx, (m + 1) % nx),
            Boundary::Reflective => (
                if m == 0 { 1 } else { m - 1 },
                if m == nx - 1 { nx - 2 } else { m + 1 },
            ),
        }
    }

    fn second_x(&self, v: &[f64], m: usize) -> f64 {
        let (l, r) = self.neighbours(m);
        (v[r] - 2.0 * v[m] + v[l]) / (self.dx * self.dx)
    }

    fn centered_x(&self, v: &[f64], m: usize) -> f64 {
        let (l, r) = self.neighbours(m);
        (v[r] - v[l]) / (2.0 * self.dx)
    }
}

/// Second time derivatives of both fields at one cell from the quasilinear
/// form of the strict equations.
#[allow(clippy::too_many_arguments)]
fn strict_accelerations(
    ep: f64,
    es: f64,
    g: [f64; 2],
    k: [f64; 2],
    phi_tx: f64,
    phi_xx: f64,
    psi_tx: f64,
    psi_xx: f64,
) -> Result<(f64, f64)> {
    // d[dir] = derivative of (Φ^t, Φ^x, Ψ^t, Ψ^x) along one gradient slot.
    let seed = |slot: usize| {
        let mut gd = plain(&g);
        let mut kd = plain(&k);
        match slot {
            0 => gd[0].eps = 1.0,
            1 => gd[1].eps = 1.0,
            2 => kd[0].eps = 1.0,
            _ => kd[1].eps = 1.0,
        }
        let (f, s, d) = fluxes(&ETA2, ep, es, &gd, &kd);
        (f.map(|v| v.eps), s.map(|v| v.eps), d.re)
    };
    let (f_gt, s_gt, rad) = seed(0);
    if rad <= 0.0 {
        return Err(Error::IndefiniteMetric {
            radicand: rad,
            location: format!("gradients {g:?}, {k:?}"),
        });
    }
    let (f_gx, s_gx, _) = seed(1);
    let (f_kt, s_kt, _) = seed(2);
    let (f_kx, s_kx, _) = seed(3);

    // ∂_t Φ^t + ∂_x Φ^x = 0 with ∂_t g_t = φ_tt, ∂_t g_x = ∂_x g_t = φ_tx, ∂_x g_x = φ_xx.
    let a11 = f_gt[0];
    let a12 = f_kt[0];
    let b1 = -((f_gx[0] + f_gt[1]) * phi_tx + f_gx[1] * phi_xx + (f_kx[0] + f_kt[1]) * psi_tx + f_kx[1] * psi_xx);
    let a21 = s_gt[0];
    let a22 = s_kt[0];
    let b2 = -((s_gx[0] + s_gt[1]) * phi_tx + s_gx[1] * phi_xx + (s_kx[0] + s_kt[1]) * psi_tx + s_kx[1] * psi_xx);
    let det = a11 * a22 - a12 * a21;
    if det.abs() <= 1e-12 * (a11.abs() * a22.abs() + a12.abs() * a21.abs()) || !det.is_finite() {
        return Err(Error::IndefiniteMetric {
            radicand: det,
            location: "singular local system".into(),
        });
    }
    Ok(((b1 * a22 - a12 * b2) / det, (a11 * b2 - a21 * b1) / det))
}

/// Corrector passes of the strict step.
const STRICT_CORRECTIONS: usize = 2;

fn step_once(s: &EvolutionState, mode: Mode) -> Result<EvolutionState> {
    let nx = s.nx();
    let c2 = (s.dt / s.dx).powi(2);
    let linear_next = |prev: &[f64], curr: &[f64]| -> Vec<f64> {
        (0..nx)
            .map(|m| {
                let (l, r) = s.neighbours(m);
                2.0 * curr[m] - prev[m] + c2 * (curr[r] - 2.0 * curr[m] + curr[l])
            })
            .collect()
    };
    let mut phi_next = linear_next(&s.phi_prev, &s.phi_curr);
    let mut psi_next = linear_next(&s.psi_prev, &s.psi_curr);

    if mode == Mode::Strict {
        let (ep, es) = (s.eps_phi.value(), s.eps_psi.value());
        for _ in 0..STRICT_CORRECTIONS {
            let dt2 = 2.0 * s.dt;
            let phi_t: Vec<f64> = (0..nx).map(|m| (phi_next[m] - s.phi_prev[m]) / dt2).collect();
            let psi_t: Vec<f64> = (0..nx).map(|m| (psi_next[m] - s.psi_prev[m]) / dt2).collect();
            let acc = (0..nx)
                .into_par_iter()
                .map(|m| {
                    strict_accelerations(
                        ep,
                        es,
                        [phi_t[m], s.centered_x(&s.phi_curr, m)],
                        [psi_t[m], s.centered_x(&s.psi_curr, m)],
                        s.centered_x(&phi_t, m),
                        s.second_x(&s.phi_curr, m),
                        s.centered_x(&psi_t, m),
                        s.second_x(&s.psi_curr, m),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let dt_sq = s.dt * s.dt;
            phi_next = (0..nx)
                .map(|m| 2.0 * s.phi_curr[m] - s.phi_prev[m] + dt_sq * acc[m].0)
                .collect();
            psi_next = (0..nx)
                .map(|m| 2.0 * s.psi_curr[m] - s.psi_prev[m] + dt_sq * acc[m].1)
                .collect();
        }
    }

    let worst = phi_next.iter().chain(&psi_next).fold(0.0f64, |a, v| a.max(v.abs()));
    if !(worst <= BLOWUP) {
        return Err(Error::Blowup {
            step: s.step + 1,
            value: worst,
        });
    }
    Ok(EvolutionState {
        phi_prev: s.phi_curr.clone(),
        phi_curr: phi_next,
        psi_prev: s.psi_curr.clone(),
        psi_curr: psi_next,
        step: s.step + 1,
        ..s.clone()
    })
}

/// Advances `steps` leapfrog steps.
pub fn evolve_coupled(s: &EvolutionState, steps: usize, mode: Mode) -> Result<EvolutionState> {
    s.validate()?;
    let mut state = s.clone();
    for _ in 0..steps {
        state = step_once(&state, mode)?;
    }
    Ok(state)
}

/// Discrete energy of the linear equations between the two stored levels;
/// leapfrog with periodic ends keeps it constant up to roundoff.
pub fn linear_energy(s: &EvolutionState) -> f64 {
    let nx = s.nx();
    let one = |prev: &[f64], curr: &[f64]| -> f64 {
        (0..nx)
            .map(|m| {
                let (_, r) = s.neighbours(m);
                let vt = (curr[m] - prev[m]) / s.dt;
                let gx_curr = (curr[r] - curr[m]) / s.dx;
                let gx_prev = (prev[r] - prev[m]) / s.dx;
                vt * vt + gx_curr * gx_prev
            })
            .sum::<f64>()
    };
    0.5 * s.dx * (one(&s.phi_prev, &s.phi_curr) + one(&s.psi_prev, &s.psi_curr))
}

/// Discrete L2 norm of the difference of the current levels of two states.
pub fn l2_distance(a: &EvolutionState, b: &EvolutionState) -> f64 {
    let sq: f64 = a
        .phi_curr
        .iter()
        .zip(&b.phi_curr)
        .chain(a.psi_curr.iter().zip(&b.psi_curr))
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    (sq * a.dx).sqrt()
}

/// `‖evolve(a+b) - evolve(a) - evolve(b)‖₂` after `steps` steps.
pub fn superposition_defect(a: &EvolutionState, b: &EvolutionState, steps: usize, mode: Mode) -> Result<f64> {
    let sum = evolve_coupled(&a.superpose(b)?, steps, mode)?;
    let ea = evolve_coupled(a, steps, mode)?;
    let eb = evolve_coupled(b, steps, mode)?;
    Ok(l2_distance(&sum, &ea.superpose(&eb)?))
}

/// Geometry of the standard colliding-pulse experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSetup {
    pub cells: usize,
    pub length: f64,
    pub courant: f64,
    pub width: f64,
}

impl Default for PulseSetup {
    fn default() -> Self {
        Self {
            cells: 200,
            length: 40.0,
            courant: 0.5,
            width: 2.0,
        }
    }
}

impl PulseSetup {
    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn dt(&self) -> f64 {
        self.courant * self.dx()
    }

    /// A right-moving Gaussian in `φ` and a left-moving one in `ψ`, as two
    /// separate states whose sum makes the pulses collide mid-domain.
    pub fn colliding_pulses(&self, amplitude: f64) -> Result<(EvolutionState, EvolutionState)> {
        let (w, l) = (self.width, self.length);
        let gauss = move |s: f64| amplitude * (-(s / w) * (s / w)).exp();
        let right = move |t: f64, x: f64| gauss(x - 0.375 * l - t);
        let left = move |t: f64, x: f64| gauss(x - 0.625 * l + t);
        let zero = |_: f64, _: f64| 0.0;
        let eps = (Sign::Plus, Sign::Plus);
        let a = EvolutionState::from_solution(self.cells, self.dx(), self.dt(), eps, right, zero)?;
        let b = EvolutionState::from_solution(self.cells, self.dx(), self.dt(), eps, zero, left)?;
        Ok((a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Polynomial;
    use crate::scalar_field::strict_scalar_flux;
    use crate::tensor_core::l2_minors;

    fn pair(phi: ScalarField, psi: ScalarField) -> FieldPair {
        FieldPair::new(phi, psi, Sign::Plus, Sign::Plus)
    }

    #[test]
    fn l1_cases() {
        let x = [0.3, 0.2, 0.1, 0.0];
        assert_eq!(two_field_l1(&pair(ScalarField::zero(), ScalarField::zero()), &x), 0.0);
        let p = pair(ScalarField::coordinate(0), ScalarField::coordinate(1));
        assert_eq!(two_field_l1(&p, &x), 0.0);
        let phi = ScalarField::wave(0.4, [1.0, 0.3, -0.2, 0.5], 0.1);
        let g = phi.gradient(&x);
        let single: f64 = (0..4).map(|i| ETA[i] * g[i] * g[i]).sum();
        assert_eq!(two_field_l1(&pair(phi, ScalarField::zero()), &x), single);
    }

    #[test]
    fn l2_cases() {
        let x = [0.3, 0.2, 0.1, 0.5];
        let phi = ScalarField::wave(0.4, [1.0, 0.3, -0.2, 0.5], 0.1);
        assert_eq!(two_field_l2(&pair(phi.clone(), ScalarField::constant(2.0)), &x), 0.0);
        assert_eq!(two_field_l2(&pair(phi.clone(), phi.clone()), &x), 0.0);
        for (ep, es) in [(Sign::Plus, Sign::Plus), (Sign::Plus, Sign::Minus), (Sign::Minus, Sign::Minus)] {
            let p = FieldPair::new(ScalarField::coordinate(0), ScalarField::coordinate(1), ep, es);
            assert_eq!(two_field_l2(&p, &x), -ep.value() * es.value());
        }
        // The determinant pipeline agrees: h = diag(1, 1, 0, 0) has L2 = -1.
        let p = pair(ScalarField::coordinate(0), ScalarField::coordinate(1));
        assert_eq!(l2_minors(&p.metric_perturbation(&x)), -1.0);
    }

    #[test]
    fn strict_lagrangian_cases() {
        let x = [0.1, 0.2, 0.3, 0.4];
        assert_eq!(strict_two_field_lagrangian(&pair(ScalarField::zero(), ScalarField::zero()), &x), Ok(1.0));
        // phi = 2 x1 with eps = -1: 1 + (-1)(-4) is fine, eps = +1 gives 1 - 4 < 0.
        let steep: ScalarField = Polynomial::new().term(2.0, [0, 1, 0, 0]).into();
        let bad = pair(steep.clone(), ScalarField::zero());
        assert!(matches!(strict_two_field_lagrangian(&bad, &x), Err(Error::IndefiniteMetric { .. })));
        let ok = FieldPair::new(steep, ScalarField::zero(), Sign::Minus, Sign::Plus);
        assert!((strict_two_field_lagrangian(&ok, &x).unwrap() - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn swapping_fields_swaps_residuals() {
        let p = FieldPair::new(
            ScalarField::wave(0.2, [1.0, 0.4, 0.0, 0.3], 0.2),
            ScalarField::wave(0.3, [0.5, -0.2, 0.8, 0.0], -0.7),
            Sign::Plus,
            Sign::Minus,
        );
        let q = p.swapped();
        let x = [0.4, -0.1, 0.6, 0.2];
        assert_eq!(two_field_l1(&p, &x), two_field_l1(&q, &x));
        assert!((two_field_l2(&p, &x) - two_field_l2(&q, &x)).abs() < 1e-17);
        let (a, b) = strict_residuals_at(&p, &x).unwrap();
        let (c, d) = strict_residuals_at(&q, &x).unwrap();
        assert!((a - d).abs() < 1e-14 && (b - c).abs() < 1e-14);
    }

    #[test]
    fn single_field_flux_reduces_to_scalar_equation() {
        let g = [0.3, -0.1, 0.2, 0.05];
        for sign in [Sign::Plus, Sign::Minus] {
            let (f, s) = flux_at(&ETA, sign, Sign::Plus, &g, &[0.0; 4]).unwrap();
            let reference = strict_scalar_flux(sign, &g).unwrap();
            for i in 0..4 {
                assert!((f[i] - ETA[i] * reference[i]).abs() < 1e-16);
                assert_eq!(s[i], 0.0);
            }
        }
    }

    /// `sqrt(D)` as a function of the two gradients.
    fn lagrangian(ep: f64, es: f64, g: &[f64; 4], k: &[f64; 4]) -> f64 {
        let dot = |a: &[f64; 4], b: &[f64; 4]| (0..4).map(|i| ETA[i] * a[i] * b[i]).sum::<f64>();
        let (p, q, r) = (dot(g, g), dot(k, k), dot(g, k));
        (1.0 + ep * p + es * q + ep * es * (p * q - r * r)).sqrt()
    }

    #[test]
    fn fluxes_are_the_variational_derivative() {
        // Φ^j = ε_φ ∂L/∂(∂_jφ) and Ψ^j = ε_ψ ∂L/∂(∂_jψ) for every sign choice.
        let g = [0.21, -0.13, 0.07, 0.3];
        let k = [-0.11, 0.25, 0.18, -0.04];
        let h = 1e-6;
        for ep in [Sign::Plus, Sign::Minus] {
            for es in [Sign::Plus, Sign::Minus] {
                let (f, s) = flux_at(&ETA, ep, es, &g, &k).unwrap();
                for j in 0..4 {
                    let mut gp = g;
                    let mut gm = g;
                    gp[j] += h;
                    gm[j] -= h;
                    let dg = (lagrangian(ep.value(), es.value(), &gp, &k)
                        - lagrangian(ep.value(), es.value(), &gm, &k))
                        / (2.0 * h);
                    assert!((f[j] - ep.value() * dg).abs() < 1e-9, "{ep:?} {es:?} phi {j}");
                    let mut kp = k;
                    let mut km = k;
                    kp[j] += h;
                    km[j] -= h;
                    let dk = (lagrangian(ep.value(), es.value(), &g, &kp)
                        - lagrangian(ep.value(), es.value(), &g, &km))
                        / (2.0 * h);
                    assert!((s[j] - es.value() * dk).abs() < 1e-9, "{ep:?} {es:?} psi {j}");
                }
            }
        }
    }

    #[test]
    fn second_equation_with_fixed_signs_only_matches_positive_eps_phi() {
        // The second equation written with fixed "+" and "-" coincides with the
        // variational flux for ε_φ = +1 and differs for ε_φ = -1.
        let g = [0.21, -0.13, 0.07, 0.3];
        let k = [-0.11, 0.25, 0.18, -0.04];
        let dot = |a: &[f64; 4], b: &[f64; 4]| (0..4).map(|i| ETA[i] * a[i] * b[i]).sum::<f64>();
        for es in [Sign::Plus, Sign::Minus] {
            for ep in [Sign::Plus, Sign::Minus] {
                let root = lagrangian(ep.value(), es.value(), &g, &k);
                let fixed: [f64; 4] =
                    std::array::from_fn(|j| ETA[j] * (k[j] * (1.0 + dot(&g, &g)) - g[j] * dot(&g, &k)) / root);
                let (_, s) = flux_at(&ETA, ep, es, &g, &k).unwrap();
                let differs = (0..4).any(|j| (fixed[j] - s[j]).abs() > 1e-12);
                assert_eq!(differs, ep == Sign::Minus);
            }
        }
    }

    #[test]
    fn strict_residual_is_cubic_in_amplitude() {
        let x = [0.3, -0.2, 0.5, 0.1];
        let at = |a: f64| {
            let p = pair(
                ScalarField::wave(a, [1.0, 1.0, 0.0, 0.0], 0.0),
                ScalarField::wave(a, [1.0, -0.6, 0.8, 0.0], 0.3),
            );
            let (r1, r2) = strict_residuals_at(&p, &x).unwrap();
            let (l1, l2) = linear_residuals_at(&p, &x);
            assert!(l1.abs() < 1e-14 && l2.abs() < 1e-14);
            r1.abs().max(r2.abs())
        };
        let ratio = at(0.05) / at(0.1);
        assert!((ratio - 0.125).abs() < 0.01, "{ratio}");
        assert_eq!(at(0.0), 0.0);
    }

    fn grid_pair(phi: GridFunction, psi: GridFunction) -> TwoFieldGrid {
        TwoFieldGrid {
            phi,
            psi,
            eps_phi: Sign::Plus,
            eps_psi: Sign::Plus,
        }
    }

    #[test]
    fn linear_grid_residuals() {
        let f = |t: f64, x: f64| (x - t).sin() * 0.3;
        let res = |n: usize| {
            let (dt, dx) = (0.6 / n as f64, 1.0 / n as f64);
            let s = grid_pair(
                GridFunction::sample(2 * n, 4 * n, dt, dx, f),
                GridFunction::sample(2 * n, 4 * n, dt, dx, |_, _| 0.0),
            );
            linear_residuals(&s).unwrap().0.max_abs()
        };
        let ratio = res(20) / res(40);
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
        let lin = grid_pair(
            GridFunction::sample(5, 6, 0.1, 0.2, |t, x| 2.0 * t - 3.0 * x + 1.0),
            GridFunction::sample(5, 6, 0.1, 0.2, |t, x| t + x),
        );
        let (a, b) = linear_residuals(&lin).unwrap();
        assert!(a.max_abs() < 1e-12 && b.max_abs() < 1e-12);
    }

    #[test]
    fn linear_grid_residuals_add() {
        let (nt, nx, dt, dx) = (8, 10, 0.05, 0.1);
        let f = GridFunction::sample(nt, nx, dt, dx, |t, x| (t * x).cos());
        let g = GridFunction::sample(nt, nx, dt, dx, |t, x| (2.0 * x - t).sin());
        let mut fg = f.clone();
        for (v, w) in fg.values.iter_mut().zip(&g.values) {
            *v += w;
        }
        let zero = GridFunction::zeros(nt, nx, dt, dx);
        let rf = linear_residuals(&grid_pair(f, zero.clone())).unwrap().0;
        let rg = linear_residuals(&grid_pair(g, zero.clone())).unwrap().0;
        let rfg = linear_residuals(&grid_pair(fg, zero)).unwrap().0;
        for i in 0..rf.values.len() {
            assert!((rfg.values[i] - rf.values[i] - rg.values[i]).abs() < 1e-9);
        }
    }

    #[test]
    fn strict_grid_residuals() {
        let (nt, nx, dt, dx) = (6, 7, 0.05, 0.1);
        let zero = GridFunction::zeros(nt, nx, dt, dx);
        let (a, b) = strict_residuals(&grid_pair(zero.clone(), zero.clone())).unwrap();
        assert_eq!(a.max_abs(), 0.0);
        assert_eq!(b.max_abs(), 0.0);
        // Opposite-moving waves sampled with dt = dx: the linear residual
        // vanishes, the strict one is cubic in the amplitude.
        let run = |amp: f64| {
            let h = 0.05;
            let s = grid_pair(
                GridFunction::sample(20, 40, h, h, |t, x| amp * (2.0 * (x - t)).sin()),
                GridFunction::sample(20, 40, h, h, |t, x| amp * (3.0 * (x + t)).cos()),
            );
            let (l1, l2) = linear_residuals(&s).unwrap();
            assert!(l1.max_abs() < 1e-9 && l2.max_abs() < 1e-9);
            let (r1, r2) = strict_residuals(&s).unwrap();
            r1.max_abs().max(r2.max_abs())
        };
        let ratio = run(0.1) / run(0.05);
        assert!((6.0..=10.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn evolution_rejects_bad_cfl() {
        let s = EvolutionState::from_solution(10, 0.1, 0.095, (Sign::Plus, Sign::Plus), |_, _| 0.0, |_, _| 0.0);
        assert!(matches!(s, Err(Error::CflViolation { .. })));
    }

    #[test]
    fn zero_data_stays_zero() {
        let s = EvolutionState::from_solution(16, 0.1, 0.05, (Sign::Plus, Sign::Plus), |_, _| 0.0, |_, _| 0.0)
            .unwrap();
        for mode in [Mode::Linear, Mode::Strict] {
            let e = evolve_coupled(&s, 50, mode).unwrap();
            assert!(e.phi_curr.iter().chain(&e.psi_curr).all(|v| *v == 0.0));
            assert_eq!(e.step, 51);
        }
    }

    #[test]
    fn standing_wave_returns_after_one_period() {
        let nx = 128;
        let length = 2.0 * std::f64::consts::PI;
        let dx = length / nx as f64;
        let period_steps = 256;
        let dt = length / period_steps as f64;
        let wave = |t: f64, x: f64| x.sin() * t.cos();
        let s = EvolutionState::from_solution(nx, dx, dt, (Sign::Plus, Sign::Plus), wave, |_, _| 0.0).unwrap();
        let e = evolve_coupled(&s, period_steps, Mode::Linear).unwrap();
        // After one period the `curr` level sits at t = T + dt.
        let exact: Vec<f64> = (0..nx).map(|m| wave(dt, m as f64 * dx)).collect();
        let err: f64 = e.phi_curr.iter().zip(&exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let norm: f64 = exact.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err / norm < 0.01, "{}", err / norm);
    }

    #[test]
    fn leapfrog_energy_is_conserved() {
        let setup = PulseSetup::default();
        let (a, b) = setup.colliding_pulses(0.3).unwrap();
        let s = a.superpose(&b).unwrap();
        let e0 = linear_energy(&s);
        let e = evolve_coupled(&s, 200, Mode::Linear).unwrap();
        assert!(((linear_energy(&e) - e0) / e0).abs() < 1e-12);
    }

    #[test]
    fn linear_mode_superposes() {
        let (a, b) = PulseSetup::default().colliding_pulses(1.0).unwrap();
        assert!(superposition_defect(&a, &b, 100, Mode::Linear).unwrap() <= 1e-10);
    }

    #[test]
    fn strict_mode_breaks_superposition_cubically() {
        let setup = PulseSetup {
            width: 4.0,
            ..PulseSetup::default()
        };
        let defect = |amp| {
            let (a, b) = setup.colliding_pulses(amp).unwrap();
            superposition_defect(&a, &b, 100, Mode::Strict).unwrap()
        };
        let (d1, d2) = (defect(1.0), defect(0.5));
        assert!(d1 > 0.0);
        let ratio = d1 / d2;
        assert!((6.0..=10.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn strict_mode_tracks_linear_mode_at_small_amplitude() {
        let (a, b) = PulseSetup::default().colliding_pulses(1e-3).unwrap();
        let s = a.superpose(&b).unwrap();
        let mut lin = s.clone();
        let mut strict = s;
        for _ in 0..20 {
            lin = evolve_coupled(&lin, 1, Mode::Linear).unwrap();
            strict = evolve_coupled(&strict, 1, Mode::Strict).unwrap();
            let dev = lin
                .phi_curr
                .iter()
                .zip(&strict.phi_curr)
                .chain(lin.psi_curr.iter().zip(&strict.psi_curr))
                .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
            assert!(dev <= 1e-8 * strict.step as f64, "{dev}");
        }
    }

    #[test]
    fn reflective_boundary_keeps_a_constant() {
        let s = EvolutionState::from_solution(12, 0.1, 0.05, (Sign::Plus, Sign::Plus), |_, _| 0.7, |_, _| -0.2)
            .unwrap()
            .with_boundary(Boundary::Reflective);
        let e = evolve_coupled(&s, 30, Mode::Strict).unwrap();
        assert!(e.phi_curr.iter().all(|v| (v - 0.7).abs() < 1e-14));
    }

    #[test]
    fn blowup_is_reported() {
        let s = EvolutionState::from_solution(8, 0.1, 0.05, (Sign::Plus, Sign::Plus), |t, _| 1e6 * (1.0 + t * 100.0), |_, _| 0.0)
            .unwrap();
        assert!(matches!(evolve_coupled(&s, 5, Mode::Linear), Err(Error::Blowup { .. })));
    }
}
